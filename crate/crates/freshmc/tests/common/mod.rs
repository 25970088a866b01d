//! Seeded random generators shared by the property and acceptance suites.

#![allow(dead_code)]

use freshmc::fra::{Config, Fra, RegisterAssignment, StateId, TransKind, Transition};
use freshmc::game::{Owner, ParityGame};
use freshmc::logic::{self, Fix, Formula, Label, Sigma, Value};
use freshmc::nominal::{Name, Permutation};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random finite permutation built from swaps over names `0..m`.
pub fn gen_permutation(rng: &mut ChaCha8Rng, m: u32, swaps: usize) -> Permutation {
    let mut p = Permutation::identity();
    for _ in 0..swaps {
        let a = Name(rng.gen_range(0..m));
        let b = Name(rng.gen_range(0..m));
        p = Permutation::swap(a, b).compose(&p);
    }
    p
}

// ---------------------------------------------------------------------------
// Random formulas

#[derive(Clone)]
pub struct FormulaCfg {
    /// Approximate size budget.
    pub budget: u64,
    pub allow_not: bool,
    pub max_fixpoints: usize,
    pub max_arity: usize,
    /// Cap on nested name binders (quantifiers plus fixpoint parameters).
    pub max_binder_depth: u32,
    /// Name literals to draw from.
    pub names: Vec<Name>,
    /// Tag signature for modal labels.
    pub tags: Vec<(String, usize)>,
}

impl Default for FormulaCfg {
    fn default() -> Self {
        FormulaCfg {
            budget: 18,
            allow_not: true,
            max_fixpoints: 2,
            max_arity: 1,
            max_binder_depth: 3,
            names: vec![Name(0), Name(1)],
            tags: vec![("o".into(), 1), ("p".into(), 1)],
        }
    }
}

struct GenState<'a> {
    cfg: &'a FormulaCfg,
    rng: &'a mut ChaCha8Rng,
    fixpoints_left: usize,
    next_val: u32,
    next_rec: u32,
    val_scope: Vec<String>,
    /// (variable, arity, negation parity at the binder)
    rec_scope: Vec<(String, usize, u32)>,
    nots: u32,
    binder_depth: u32,
}

impl GenState<'_> {
    fn value(&mut self) -> Value {
        let vars = self.val_scope.len();
        let total = vars + self.cfg.names.len();
        if total == 0 {
            return Value::Name(Name(0));
        }
        let k = self.rng.gen_range(0..total.max(1));
        if k < vars {
            Value::Var(self.val_scope[k].clone())
        } else {
            Value::Name(self.cfg.names[k - vars])
        }
    }

    fn callable(&self) -> Vec<(String, usize)> {
        self.rec_scope
            .iter()
            .filter(|(_, _, p)| (self.nots - p) % 2 == 0)
            .map(|(v, a, _)| (v.clone(), *a))
            .collect()
    }
}

fn gen_node(st: &mut GenState<'_>, budget: u64) -> Formula {
    let leafish = budget < 4;
    let calls = st.callable();
    // leaf choices
    if leafish {
        if !calls.is_empty() && st.rng.gen_bool(0.5) {
            let (var, arity) = calls[st.rng.gen_range(0..calls.len())].clone();
            let args = (0..arity).map(|_| st.value()).collect();
            return Formula::Call(var, args);
        }
        let u = st.value();
        let v = st.value();
        return if st.rng.gen_bool(0.5) {
            Formula::Eq(u, v)
        } else {
            Formula::Neq(u, v)
        };
    }

    let mut options: Vec<u32> = vec![0, 1]; // or, and
    if st.cfg.allow_not {
        options.push(2);
    }
    if st.binder_depth < st.cfg.max_binder_depth {
        options.extend([3, 4, 5]); // some, all, fresh
    }
    if !st.cfg.tags.is_empty() {
        options.extend([6, 7]); // diamond, box
    }
    if st.fixpoints_left > 0 && st.binder_depth < st.cfg.max_binder_depth {
        options.extend([8, 8]); // applied fixpoint, weighted up
    }
    if !calls.is_empty() {
        options.push(9);
    }
    match options[st.rng.gen_range(0..options.len())] {
        0 | 1 => {
            let left = budget / 2 + st.rng.gen_range(0..2);
            let a = gen_node(st, left.max(2));
            let b = gen_node(st, budget.saturating_sub(logic::size(&a) + 1).max(2));
            if st.rng.gen_bool(0.5) {
                Formula::Or(a.boxed(), b.boxed())
            } else {
                Formula::And(a.boxed(), b.boxed())
            }
        }
        2 => {
            st.nots += 1;
            let a = gen_node(st, budget - 1);
            st.nots -= 1;
            Formula::Not(a.boxed())
        }
        3 | 4 | 5 => {
            let x = format!("x{}", st.next_val);
            st.next_val += 1;
            st.val_scope.push(x.clone());
            st.binder_depth += 1;
            let body = gen_node(st, budget - 1);
            st.binder_depth -= 1;
            st.val_scope.pop();
            let body = ensure_var_occurs(body, &x);
            match st.rng.gen_range(0..3) {
                0 => Formula::SomeName(x, body.boxed()),
                1 => Formula::AllName(x, body.boxed()),
                _ => Formula::Fresh(x, body.boxed()),
            }
        }
        6 | 7 => {
            let (tag, arity) = st.cfg.tags[st.rng.gen_range(0..st.cfg.tags.len())].clone();
            let args = (0..arity).map(|_| st.value()).collect();
            let body = gen_node(st, budget.saturating_sub(1 + arity as u64).max(2));
            let label = Label { tag, args };
            if st.rng.gen_bool(0.5) {
                Formula::Diamond(label, body.boxed())
            } else {
                Formula::Box(label, body.boxed())
            }
        }
        8 => {
            st.fixpoints_left -= 1;
            let var = format!("X{}", st.next_rec);
            st.next_rec += 1;
            let arity = st.rng.gen_range(
                0..=st
                    .cfg
                    .max_arity
                    .min((st.cfg.max_binder_depth - st.binder_depth) as usize),
            );
            let sigma = if st.rng.gen_bool(0.5) {
                Sigma::Mu
            } else {
                Sigma::Nu
            };
            let params: Vec<String> = (0..arity)
                .map(|_| {
                    let x = format!("x{}", st.next_val);
                    st.next_val += 1;
                    x
                })
                .collect();
            let args: Vec<Value> = (0..arity).map(|_| st.value()).collect();
            st.rec_scope.push((var.clone(), arity, st.nots));
            let depth = st.val_scope.len();
            st.val_scope.extend(params.iter().cloned());
            st.binder_depth += arity as u32;
            let mut body = gen_node(st, budget.saturating_sub(2 + 2 * arity as u64).max(2));
            st.binder_depth -= arity as u32;
            st.val_scope.truncate(depth);
            st.rec_scope.pop();
            // the bound variable must occur in its body
            if !logic::free_rec_vars(&body).contains(&var) {
                let call = Formula::Call(
                    var.clone(),
                    params.iter().map(|p| Value::Var(p.clone())).collect(),
                );
                body = if st.rng.gen_bool(0.5) {
                    Formula::Or(body.boxed(), call.boxed())
                } else {
                    Formula::And(body.boxed(), call.boxed())
                };
            }
            for p in &params {
                body = ensure_var_occurs(body, p);
            }
            Formula::Fix(
                sigma,
                Fix {
                    var,
                    params,
                    body: body.boxed(),
                    args,
                },
            )
        }
        _ => {
            let (var, arity) = calls[st.rng.gen_range(0..calls.len())].clone();
            let args = (0..arity).map(|_| st.value()).collect();
            Formula::Call(var, args)
        }
    }
}

/// Every bound variable must occur in its binder's body; a vacuous binder
/// gets a semantically neutral `x = x` conjunct.
fn ensure_var_occurs(body: Formula, x: &str) -> Formula {
    if logic::free_value_vars(&body).contains(x) {
        body
    } else {
        let refl = Formula::Eq(Value::Var(x.to_string()), Value::Var(x.to_string()));
        Formula::And(body.boxed(), refl.boxed())
    }
}

/// A random closed firm formula satisfying the syntactic well-formedness
/// conditions, with globally unique binders.
pub fn gen_formula(rng: &mut ChaCha8Rng, cfg: &FormulaCfg) -> Formula {
    let budget = cfg.budget;
    let mut st = GenState {
        cfg,
        rng,
        fixpoints_left: cfg.max_fixpoints,
        next_val: 0,
        next_rec: 0,
        val_scope: Vec::new(),
        rec_scope: Vec::new(),
        nots: 0,
        binder_depth: 0,
    };
    let phi = gen_node(&mut st, budget);
    assert!(logic::validate(&phi).is_ok(), "generator emitted {phi}");
    assert!(logic::is_firm(&phi) && logic::is_closed(&phi));
    phi
}

// ---------------------------------------------------------------------------
// Random automata and setups

pub struct FraCfg {
    pub max_states: usize,
    pub max_registers: usize,
    pub tag_count: usize,
    pub max_transitions: usize,
}

impl Default for FraCfg {
    fn default() -> Self {
        FraCfg {
            max_states: 3,
            max_registers: 2,
            tag_count: 2,
            max_transitions: 5,
        }
    }
}

pub fn gen_fra(rng: &mut ChaCha8Rng, cfg: &FraCfg) -> Fra {
    let n_states = rng.gen_range(1..=cfg.max_states);
    let registers = rng.gen_range(0..=cfg.max_registers);
    let states: Vec<(String, BTreeSet<usize>)> = (0..n_states)
        .map(|i| {
            let mut avail = BTreeSet::new();
            for r in 1..=registers {
                // keep availability sets small: universes grow fast
                if rng.gen_bool(0.35) {
                    avail.insert(r);
                }
            }
            (format!("q{i}"), avail)
        })
        .collect();
    let tags: BTreeMap<String, usize> = (0..cfg.tag_count).map(|i| (format!("t{i}"), 1)).collect();
    let tag_names: Vec<String> = tags.keys().cloned().collect();

    let mut transitions = Vec::new();
    for _ in 0..rng.gen_range(1..=cfg.max_transitions) {
        let from = rng.gen_range(0..n_states);
        let to = rng.gen_range(0..n_states);
        let (src, dst) = (&states[from].1, &states[to].1);
        // collect the kinds the availability conditions allow
        let mut kinds = Vec::new();
        for i in 1..=registers {
            if src.contains(&i) && dst.is_subset(src) {
                kinds.push(TransKind::Read(i));
            }
            let mut granted = src.clone();
            granted.insert(i);
            if dst.is_subset(&granted) {
                kinds.push(TransKind::LocalFresh(i));
                kinds.push(TransKind::GlobalFresh(i));
            }
        }
        if kinds.is_empty() {
            continue;
        }
        transitions.push(Transition {
            from: StateId(from),
            tag: tag_names[rng.gen_range(0..tag_names.len())].clone(),
            kind: kinds[rng.gen_range(0..kinds.len())],
            to: StateId(to),
        });
    }
    let fra = Fra::new(registers, states, tags, transitions);
    assert!(fra.validate().is_ok());
    fra
}

/// A random valid configuration of the automaton, with small names.
pub fn gen_config(rng: &mut ChaCha8Rng, fra: &Fra) -> Config {
    let state = StateId(rng.gen_range(0..fra.state_count()));
    let avail: Vec<usize> = fra.avail(state).iter().copied().collect();
    let regs = RegisterAssignment(
        avail
            .iter()
            .enumerate()
            .map(|(k, &i)| (i, Name(k as u32)))
            .collect(),
    );
    let mut history = regs.range();
    if rng.gen_bool(0.4) {
        history.insert(Name(avail.len() as u32));
    }
    let cfg = Config::new(state, regs, history);
    assert!(cfg.validate(fra).is_ok());
    cfg
}

/// Formula configuration for game-vs-oracle runs: negation allowed, labels
/// drawn from the automaton tags, small binder depth to keep pools small.
pub fn setup_formula_cfg(fra: &Fra, budget: u64) -> FormulaCfg {
    FormulaCfg {
        budget,
        allow_not: true,
        max_fixpoints: 2,
        max_arity: 1,
        max_binder_depth: 2,
        names: vec![Name(0)],
        tags: fra.tags.iter().map(|(t, &a)| (t.clone(), a)).collect(),
    }
}

// ---------------------------------------------------------------------------
// Random parity games

pub struct GameCfg {
    pub max_positions: usize,
    pub max_rank: u32,
    pub max_degree: usize,
    /// Probability that a position keeps no successors at all.
    pub dead_end_prob: f64,
}

impl Default for GameCfg {
    fn default() -> Self {
        GameCfg {
            max_positions: 12,
            max_rank: 4,
            max_degree: 3,
            dead_end_prob: 0.15,
        }
    }
}

pub fn gen_parity_game(rng: &mut ChaCha8Rng, cfg: &GameCfg) -> ParityGame {
    let n = rng.gen_range(1..=cfg.max_positions);
    let owners: Vec<Owner> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.5) {
                Owner::Defender
            } else {
                Owner::Attacker
            }
        })
        .collect();
    let ranks: Vec<u32> = (0..n).map(|_| rng.gen_range(0..=cfg.max_rank)).collect();
    let succ: Vec<Vec<usize>> = (0..n)
        .map(|_| {
            if rng.gen_bool(cfg.dead_end_prob) {
                return Vec::new();
            }
            let degree = rng.gen_range(1..=cfg.max_degree);
            let mut out: Vec<usize> = Vec::new();
            for _ in 0..degree {
                let t = rng.gen_range(0..n);
                if !out.contains(&t) {
                    out.push(t);
                }
            }
            out
        })
        .collect();
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    ParityGame {
        keys: (0..n).map(|i| format!("p{i}")).collect(),
        owners,
        ranks,
        succ,
        root: 0,
        max_rank,
    }
}

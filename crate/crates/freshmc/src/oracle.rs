//! Direct denotational evaluation over a finite name pool: the
//! bounded-semantics cross-check for game verdicts.
//!
//! The evaluator interprets formulas over all configurations whose names
//! are drawn from a fixed finite pool, with fixpoints computed by Kleene
//! iteration in the (finite) powerset lattice. Two departures from a
//! naive finite restriction keep it faithful at desk scale:
//!
//! * modal steps trim histories through the same well-bounding as the
//!   transition semantics, so globally-fresh loops stay live instead of
//!   exhausting the pool;
//! * the fresh quantifier picks one canonical fresh name per
//!   configuration (all fresh choices agree by equivariance), falling
//!   back to the smallest candidate when a history has swallowed every
//!   candidate. The fallback keeps the quantifier exactly self-dual on
//!   every configuration; it only fires outside the history budget where
//!   no finite pool can be exact.

use crate::fra::{self, Config, Fra, RegisterAssignment};
use crate::game;
use crate::logic::{self, Formula, Sigma, ValueSubst};
use crate::nominal::{support, Name, Nominal, Permutation};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("pool of {pool} names cannot fill {needed} registers")]
    PoolTooSmall { pool: usize, needed: usize },
    #[error("name {0} does not belong to the pool")]
    NameOutsidePool(Name),
    #[error("formula has free value variables; the oracle evaluates firm formulas only")]
    NotFirm,
    #[error("unbound recursion variable {0}")]
    UnboundRecVar(String),
    #[error("configuration not in the enumerated universe: {0}")]
    UnknownConfig(String),
    #[error("no pool name is fresh for the formula; enlarge the pool")]
    NoFreshCandidate,
}

/// A finite stand-in for the name alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NamePool(BTreeSet<Name>);

impl NamePool {
    pub fn new(names: BTreeSet<Name>) -> NamePool {
        NamePool(names)
    }

    /// Default sizing: the names of the formula and start history plus
    /// `grade + 2` extra fresh names.
    pub fn default_for(phi0: &Formula, start_history: &BTreeSet<Name>, fra: &Fra) -> NamePool {
        let mut names = support(phi0);
        names.extend(start_history.iter().copied());
        let g =
            support(phi0).len() as u32 + logic::bounding_depth(phi0) + fra.register_index() as u32;
        let extra = g + 2;
        let mut next = 0u32;
        for _ in 0..extra {
            while names.contains(&Name(next)) {
                next += 1;
            }
            names.insert(Name(next));
            next += 1;
        }
        NamePool(names)
    }

    pub fn contains(&self, a: Name) -> bool {
        self.0.contains(&a)
    }

    pub fn iter(&self) -> impl Iterator<Item = Name> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &BTreeSet<Name> {
        &self.0
    }
}

/// A set of configurations, stored as a bitset over the enumerated
/// universe of a [`Universe`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigSet {
    words: Vec<u64>,
    len: usize,
}

impl ConfigSet {
    fn empty(len: usize) -> ConfigSet {
        ConfigSet {
            words: vec![0; len.div_ceil(64)],
            len,
        }
    }

    fn full(len: usize) -> ConfigSet {
        let mut s = ConfigSet::empty(len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn insert(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn union_with(&mut self, other: &ConfigSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &ConfigSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    fn complement(&self) -> ConfigSet {
        let mut out = ConfigSet {
            words: self.words.iter().map(|w| !w).collect(),
            len: self.len,
        };
        // clear the padding bits
        let tail = self.len % 64;
        if tail != 0 {
            if let Some(last) = out.words.last_mut() {
                *last &= (1u64 << tail) - 1;
            }
        }
        out
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_indices(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.contains(i))
    }

    pub fn is_subset(&self, other: &ConfigSet) -> bool {
        self.words
            .iter()
            .zip(&other.words)
            .all(|(a, b)| a & !b == 0)
    }
}

/// All configurations over the pool: every state, every injective filling
/// of its available registers, every history containing the register
/// contents. A state whose registers cannot be filled injectively from
/// the pool contributes no configurations.
pub fn enumerate_configs(fra: &Fra, pool: &NamePool) -> Vec<Config> {
    let names: Vec<Name> = pool.iter().collect();
    let mut out = BTreeSet::new();
    for q in 0..fra.state_count() {
        let avail: Vec<usize> = fra.avail(fra::StateId(q)).iter().copied().collect();
        let mut fillings: Vec<Vec<Name>> = vec![Vec::new()];
        for _ in 0..avail.len() {
            let mut next = Vec::new();
            for partial in &fillings {
                for &a in &names {
                    if !partial.contains(&a) {
                        let mut p = partial.clone();
                        p.push(a);
                        next.push(p);
                    }
                }
            }
            fillings = next;
        }
        for filling in fillings {
            let regs =
                RegisterAssignment(avail.iter().copied().zip(filling.iter().copied()).collect());
            let range = regs.range();
            let rest: Vec<Name> = names
                .iter()
                .copied()
                .filter(|a| !range.contains(a))
                .collect();
            for mask in 0..(1u64 << rest.len()) {
                let mut history = range.clone();
                for (i, &a) in rest.iter().enumerate() {
                    if mask >> i & 1 == 1 {
                        history.insert(a);
                    }
                }
                out.insert(Config::new(fra::StateId(q), regs.clone(), history));
            }
        }
    }
    out.into_iter().collect()
}

/// The enumerated configuration universe with successor caches.
pub struct Universe<'a> {
    pub fra: &'a Fra,
    pub pool: NamePool,
    /// History budget: modal successors are trimmed to at most
    /// `history_bound + 1` names, keeping the state- and
    /// formula-relevant ones.
    pub history_bound: u32,
    configs: Vec<Config>,
    index: HashMap<Config, usize>,
    succ_cache: HashMap<(String, Name, Vec<Name>), Vec<Vec<usize>>>,
}

impl<'a> Universe<'a> {
    pub fn new(
        fra: &'a Fra,
        pool: NamePool,
        history_bound: u32,
    ) -> Result<Universe<'a>, OracleError> {
        let needed = fra.register_index();
        if pool.len() < needed {
            return Err(OracleError::PoolTooSmall {
                pool: pool.len(),
                needed,
            });
        }
        let configs = enumerate_configs(fra, &pool);
        let index = configs
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), i))
            .collect();
        Ok(Universe {
            fra,
            pool,
            history_bound,
            configs,
            index,
            succ_cache: HashMap::new(),
        })
    }

    pub fn configs(&self) -> &[Config] {
        &self.configs
    }

    pub fn size(&self) -> usize {
        self.configs.len()
    }

    pub fn index_of(&self, cfg: &Config) -> Result<usize, OracleError> {
        self.index
            .get(cfg)
            .copied()
            .ok_or_else(|| OracleError::UnknownConfig(cfg.to_string()))
    }

    pub fn empty_set(&self) -> ConfigSet {
        ConfigSet::empty(self.size())
    }

    pub fn full_set(&self) -> ConfigSet {
        ConfigSet::full(self.size())
    }

    pub fn set_from(&self, cfgs: &[Config]) -> Result<ConfigSet, OracleError> {
        let mut s = self.empty_set();
        for c in cfgs {
            s.insert(self.index_of(c)?);
        }
        Ok(s)
    }

    /// Per-configuration successor indices under label `(tag, a)`, with
    /// histories trimmed relative to the continuation formula `body`.
    /// The trimming only depends on the support of `body`.
    fn successors(&mut self, tag: &str, a: Name, body: &Formula) -> &Vec<Vec<usize>> {
        let supp: Vec<Name> = support(body).into_iter().collect();
        let key = (tag.to_string(), a, supp);
        if !self.succ_cache.contains_key(&key) {
            let bound = self.history_bound;
            let rel: Vec<Vec<usize>> = self
                .configs
                .iter()
                .map(|c| {
                    fra::step(self.fra, c, tag, a)
                        .into_iter()
                        .map(|mut d| {
                            d.history = game::well_bound(&d.history, &d.regs, body, bound);
                            self.index[&d]
                        })
                        .collect()
                })
                .collect();
            self.succ_cache.insert(key.clone(), rel);
        }
        &self.succ_cache[&key]
    }
}

/// An assignment entry: the table of a recursion variable over pool
/// tuples, plus an over-approximation of the support of the assigned
/// function (the names of its defining fixpoint and of the enclosing
/// assignment, never the table keys).
#[derive(Clone, Debug)]
pub struct AssignEntry {
    pub table: BTreeMap<Vec<Name>, ConfigSet>,
    pub support: BTreeSet<Name>,
}

/// A finite map from recursion variables to pool-tuple-indexed tables.
#[derive(Clone, Debug, Default)]
pub struct VariableAssignment {
    entries: BTreeMap<String, AssignEntry>,
}

impl VariableAssignment {
    pub fn empty() -> VariableAssignment {
        VariableAssignment::default()
    }

    pub fn get(&self, var: &str) -> Option<&AssignEntry> {
        self.entries.get(var)
    }

    pub fn with(&self, var: &str, entry: AssignEntry) -> VariableAssignment {
        let mut out = self.clone();
        out.entries.insert(var.to_string(), entry);
        out
    }

    /// Union of the entries' support approximations.
    pub fn support(&self) -> BTreeSet<Name> {
        let mut s = BTreeSet::new();
        for e in self.entries.values() {
            s.extend(e.support.iter().copied());
        }
        s
    }

    /// Renames the assignment through a pool-preserving permutation,
    /// given the universe for re-indexing the member sets.
    pub fn permute(&self, p: &Permutation, uni: &Universe<'_>) -> VariableAssignment {
        let entries = self
            .entries
            .iter()
            .map(|(x, e)| {
                let table = e
                    .table
                    .iter()
                    .map(|(key, set)| {
                        let new_key: Vec<Name> = key.iter().map(|&a| p.apply(a)).collect();
                        let mut new_set = uni.empty_set();
                        for i in set.iter_indices() {
                            let moved = uni.configs()[i].permute(p);
                            new_set.insert(uni.index_of(&moved).expect("pool-preserving"));
                        }
                        (new_key, new_set)
                    })
                    .collect();
                (
                    x.clone(),
                    AssignEntry {
                        table,
                        support: e.support.permute(p),
                    },
                )
            })
            .collect();
        VariableAssignment { entries }
    }
}

fn tuples(pool: &NamePool, arity: usize) -> Vec<Vec<Name>> {
    let mut out = vec![Vec::new()];
    for _ in 0..arity {
        let mut next = Vec::new();
        for t in &out {
            for a in pool.iter() {
                let mut t2 = t.clone();
                t2.push(a);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

fn value_name(v: &logic::Value, pool: &NamePool) -> Result<Name, OracleError> {
    match v.as_name() {
        Some(a) if pool.contains(a) => Ok(a),
        Some(a) => Err(OracleError::NameOutsidePool(a)),
        None => Err(OracleError::NotFirm),
    }
}

/// Evaluates a firm formula to the set of configurations satisfying it,
/// with quantifiers ranging over the pool and fixpoints computed by
/// Kleene iteration.
pub fn eval(
    phi: &Formula,
    xi: &VariableAssignment,
    uni: &mut Universe<'_>,
) -> Result<ConfigSet, OracleError> {
    match phi {
        Formula::Eq(u, v) => {
            let a = value_name(u, &uni.pool)?;
            let b = value_name(v, &uni.pool)?;
            Ok(if a == b {
                uni.full_set()
            } else {
                uni.empty_set()
            })
        }
        Formula::Neq(u, v) => {
            let a = value_name(u, &uni.pool)?;
            let b = value_name(v, &uni.pool)?;
            Ok(if a != b {
                uni.full_set()
            } else {
                uni.empty_set()
            })
        }
        Formula::Not(b) => Ok(eval(b, xi, uni)?.complement()),
        Formula::Or(a, b) => {
            let mut s = eval(a, xi, uni)?;
            s.union_with(&eval(b, xi, uni)?);
            Ok(s)
        }
        Formula::And(a, b) => {
            let mut s = eval(a, xi, uni)?;
            s.intersect_with(&eval(b, xi, uni)?);
            Ok(s)
        }
        Formula::SomeName(x, body) => {
            let mut acc = uni.empty_set();
            for a in uni.pool.iter().collect::<Vec<_>>() {
                let inst = logic::subst_values(body, &ValueSubst::block(vec![(x.clone(), a)]));
                acc.union_with(&eval(&inst, xi, uni)?);
            }
            Ok(acc)
        }
        Formula::AllName(x, body) => {
            let mut acc = uni.full_set();
            for a in uni.pool.iter().collect::<Vec<_>>() {
                let inst = logic::subst_values(body, &ValueSubst::block(vec![(x.clone(), a)]));
                acc.intersect_with(&eval(&inst, xi, uni)?);
            }
            Ok(acc)
        }
        Formula::Fresh(x, body) => {
            // one canonical fresh name per configuration: the smallest
            // candidate outside its history, falling back to the smallest
            // candidate overall when the history has swallowed them all
            let mut forbidden = support(body.as_ref());
            forbidden.extend(xi.support());
            let candidates: Vec<Name> =
                uni.pool.iter().filter(|a| !forbidden.contains(a)).collect();
            if candidates.is_empty() {
                return Err(OracleError::NoFreshCandidate);
            }
            let mut acc = uni.empty_set();
            let mut pending: Vec<usize> = (0..uni.size()).collect();
            let mut first_eval: Option<ConfigSet> = None;
            for &a in &candidates {
                if pending.is_empty() && first_eval.is_some() {
                    break;
                }
                let inst = logic::subst_values(body, &ValueSubst::block(vec![(x.clone(), a)]));
                let s = eval(&inst, xi, uni)?;
                let mut still = Vec::new();
                for &i in &pending {
                    if uni.configs()[i].history.contains(&a) {
                        still.push(i);
                    } else if s.contains(i) {
                        acc.insert(i);
                    }
                }
                pending = still;
                if first_eval.is_none() {
                    first_eval = Some(s);
                }
            }
            if let Some(s) = first_eval {
                for i in pending {
                    if s.contains(i) {
                        acc.insert(i);
                    }
                }
            }
            Ok(acc)
        }
        Formula::Diamond(label, body) => {
            let target = eval(body, xi, uni)?;
            if label.args.len() != 1 {
                // automaton labels carry exactly one name
                return Ok(uni.empty_set());
            }
            let a = value_name(&label.args[0], &uni.pool)?;
            let mut out = uni.empty_set();
            let succ = uni.successors(&label.tag, a, body).clone();
            for (i, js) in succ.iter().enumerate() {
                if js.iter().any(|&j| target.contains(j)) {
                    out.insert(i);
                }
            }
            Ok(out)
        }
        Formula::Box(label, body) => {
            let target = eval(body, xi, uni)?;
            if label.args.len() != 1 {
                return Ok(uni.full_set());
            }
            let a = value_name(&label.args[0], &uni.pool)?;
            let mut out = uni.empty_set();
            let succ = uni.successors(&label.tag, a, body).clone();
            for (i, js) in succ.iter().enumerate() {
                if js.iter().all(|&j| target.contains(j)) {
                    out.insert(i);
                }
            }
            Ok(out)
        }
        Formula::Call(x, args) => {
            let entry = xi
                .get(x)
                .ok_or_else(|| OracleError::UnboundRecVar(x.clone()))?;
            let mut key = Vec::with_capacity(args.len());
            for v in args {
                key.push(value_name(v, &uni.pool)?);
            }
            // tables are total over pool tuples
            Ok(entry.table[&key].clone())
        }
        Formula::Fix(sigma, f) => {
            let mut args = Vec::with_capacity(f.args.len());
            for v in &f.args {
                args.push(value_name(v, &uni.pool)?);
            }
            let table = kleene(*sigma, f, xi, uni)?;
            Ok(table[&args].clone())
        }
    }
}

/// Kleene iteration for `(σX(x⃗).body)` over all pool tuples: upward from
/// the empty function for µ, downward from the full one for ν. The
/// iteration is synchronous and stops at the first repeated table.
fn kleene(
    sigma: Sigma,
    f: &logic::Fix,
    xi: &VariableAssignment,
    uni: &mut Universe<'_>,
) -> Result<BTreeMap<Vec<Name>, ConfigSet>, OracleError> {
    let keys = tuples(&uni.pool, f.params.len());
    let init = match sigma {
        Sigma::Mu => uni.empty_set(),
        Sigma::Nu => uni.full_set(),
    };
    let mut cur: BTreeMap<Vec<Name>, ConfigSet> =
        keys.iter().map(|k| (k.clone(), init.clone())).collect();
    let mut entry_support = support(f.body.as_ref());
    entry_support.extend(xi.support());
    loop {
        let entry = AssignEntry {
            table: cur.clone(),
            support: entry_support.clone(),
        };
        let xi2 = xi.with(&f.var, entry);
        let mut next = BTreeMap::new();
        for key in &keys {
            let inst = logic::subst_values(
                &f.body,
                &ValueSubst::block(f.params.iter().cloned().zip(key.iter().copied()).collect()),
            );
            next.insert(key.clone(), eval(&inst, &xi2, uni)?);
        }
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
}

/// `eval(¬fresh x.φ) == eval(fresh x.¬φ)` on this pool.
pub fn check_self_duality(
    phi: &Formula,
    xi: &VariableAssignment,
    uni: &mut Universe<'_>,
) -> Result<bool, OracleError> {
    let (x, body) = match phi {
        Formula::Fresh(x, body) => (x, body),
        _ => return Err(OracleError::NotFirm),
    };
    let lhs = eval(&Formula::Not(phi.clone().boxed()), xi, uni)?;
    let rhs = eval(
        &Formula::Fresh(x.clone(), Formula::Not(body.clone()).boxed()),
        xi,
        uni,
    )?;
    Ok(lhs == rhs)
}

/// Full membership check for a closed formula: builds the default pool,
/// enumerates the universe, and evaluates. The formula may contain
/// negation.
pub fn check_membership(fra: &Fra, phi0: &Formula, start: &Config) -> Result<bool, OracleError> {
    if !logic::is_firm(phi0) {
        return Err(OracleError::NotFirm);
    }
    let pool = NamePool::default_for(phi0, &start.history, fra);
    let bound =
        support(phi0).len() as u32 + logic::bounding_depth(phi0) + fra.register_index() as u32;
    let mut uni = Universe::new(fra, pool, bound)?;
    let set = eval(phi0, &VariableAssignment::empty(), &mut uni)?;
    Ok(set.contains(uni.index_of(start)?))
}

/// Verdict agreement between the game pipeline and the oracle for a
/// normalized, negation-free formula.
pub fn agrees_with_game(
    fra: &Fra,
    phi_game: &Formula,
    phi_oracle: &Formula,
    start: &Config,
    opts: &game::BuildOptions,
) -> Result<(bool, bool), Box<dyn std::error::Error>> {
    let og = game::build_orbit_game(fra, phi_game, start, opts)?;
    let by_game = crate::solver::winner(&og.game) == game::Owner::Defender;
    let by_oracle = check_membership(fra, phi_oracle, start)?;
    Ok((by_game, by_oracle))
}

//! Construction of the history-bounded parity game quotiented by renaming
//! of names.
//!
//! Positions pair an automaton configuration with a closed, negation-free
//! formula. Histories are trimmed to at most `grade + 1` names whenever a
//! transition would grow them further, keeping every name that still
//! matters to the state or the formula. Positions are deduplicated by a
//! canonical renaming, so the reachable game is finite whenever the grade
//! is.

use crate::fra::{self, Config, Fra, RegisterAssignment, StateId};
use crate::logic::{self, Formula, LogicError, RankTable, RecBlock, RecSubst, Value, ValueSubst};
use crate::nominal::{
    canonical_renaming, fresh_name, support, Name, Nominal, PartialInjection, Permutation,
};
use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Owner {
    Defender,
    Attacker,
}

impl Owner {
    pub fn opponent(self) -> Owner {
        match self {
            Owner::Defender => Owner::Attacker,
            Owner::Attacker => Owner::Defender,
        }
    }
}

impl fmt::Display for Owner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Owner::Defender => write!(f, "D"),
            Owner::Attacker => write!(f, "A"),
        }
    }
}

#[derive(Debug, Error)]
pub enum GameError {
    #[error(transparent)]
    Logic(#[from] LogicError),
    #[error("formula contains negation; eliminate it first")]
    NotNegationFree,
    #[error("label <{tag}:...> has arity {arity}; automata only read single names")]
    LabelArity { tag: String, arity: usize },
    #[error("label tag {0} is not declared by the model")]
    UnknownLabelTag(String),
    #[error("invalid start configuration: {0}")]
    BadConfig(String),
    #[error("position ceiling of {0} exceeded while building the game")]
    PositionCeiling(usize),
    #[error("internal error: {0}")]
    Internal(String),
}

// ---------------------------------------------------------------------------
// Closure triples

/// A subformula of the root paired with the value and recursion
/// substitutions accumulated along a play. Expanding the triple
/// reconstructs the position formula.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClosureTriple {
    pub psi: Formula,
    pub gamma: ValueSubst,
    pub theta: RecSubst,
}

impl ClosureTriple {
    pub fn root(phi0: &Formula) -> ClosureTriple {
        ClosureTriple {
            psi: phi0.clone(),
            gamma: ValueSubst::empty(),
            theta: RecSubst::empty(),
        }
    }

    /// `psi{θ}{γ}`.
    pub fn expand(&self) -> Result<Formula, LogicError> {
        let with_rec = logic::subst_rec(&self.psi, &self.theta)?;
        Ok(logic::subst_values(&with_rec, &self.gamma))
    }

    /// Names occurring in any component.
    pub fn support(&self) -> BTreeSet<Name> {
        let mut s = support(&self.psi);
        s.extend(support(&self.gamma));
        s.extend(support(&self.theta));
        s
    }
}

// ---------------------------------------------------------------------------
// Positions

/// The identity-relevant part of a position: configuration plus the
/// expanded formula. Canonical renaming of this core is the orbit key.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PosCore {
    pub state: StateId,
    pub regs: RegisterAssignment,
    pub history: BTreeSet<Name>,
    pub formula: Formula,
}

impl Nominal for PosCore {
    fn permute(&self, p: &Permutation) -> Self {
        PosCore {
            state: self.state,
            regs: self.regs.permute(p),
            history: self.history.permute(p),
            formula: self.formula.permute(p),
        }
    }
    /// Registers in index order, then the formula depth-first, then the
    /// remaining history names in ascending order.
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        self.regs.visit_names(visit);
        self.formula.visit_names(visit);
        self.history.visit_names(visit);
    }
}

impl PosCore {
    pub fn config(&self) -> Config {
        Config::new(self.state, self.regs.clone(), self.history.clone())
    }

    /// Support of the state-and-formula pair, the set a move instantiation
    /// must protect.
    pub fn protected(&self) -> BTreeSet<Name> {
        let mut s = self.regs.range();
        s.extend(support(&self.formula));
        s
    }
}

/// A game position: the core plus its closure-triple bookkeeping.
#[derive(Clone, Debug)]
pub struct Position {
    pub core: PosCore,
    pub triple: ClosureTriple,
}

impl Position {
    pub fn permute(&self, p: &Permutation) -> Position {
        Position {
            core: self.core.permute(p),
            triple: ClosureTriple {
                psi: self.triple.psi.permute(p),
                gamma: self.triple.gamma.permute(p),
                theta: self.triple.theta.permute(p),
            },
        }
    }
}

/// Which player owns a position with this (expanded) formula at its head.
pub fn owner_of(phi: &Formula) -> Result<Owner, GameError> {
    match phi {
        Formula::Eq(u, v) => Ok(if u == v {
            Owner::Attacker
        } else {
            Owner::Defender
        }),
        Formula::Neq(u, v) => Ok(if u == v {
            Owner::Defender
        } else {
            Owner::Attacker
        }),
        Formula::Or(..) | Formula::SomeName(..) | Formula::Diamond(..) => Ok(Owner::Defender),
        Formula::And(..) | Formula::AllName(..) | Formula::Box(..) => Ok(Owner::Attacker),
        // single-successor positions; the owner cannot affect the winner
        Formula::Fresh(..) | Formula::Fix(..) => Ok(Owner::Defender),
        Formula::Not(..) => Err(GameError::NotNegationFree),
        Formula::Call(x, _) => Err(GameError::Internal(format!(
            "open recursion variable {x} reached the game"
        ))),
    }
}

// ---------------------------------------------------------------------------
// Grade and well-bounding

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Grade {
    /// `|supp(φ₀)| + ‖φ₀‖ + register index`: the history budget.
    pub n: u32,
    /// `|supp(φ₀)| + ‖φ₀‖`: the part contributed by the formula.
    pub potential: u32,
    pub supp_size: u32,
    pub depth: u32,
    pub reg_index: u32,
}

/// The grade of a setup. The formula must be closed and firm.
pub fn grade(phi0: &Formula, fra: &Fra) -> Result<Grade, LogicError> {
    logic::require_firm(phi0)?;
    logic::require_closed(phi0)?;
    let supp_size = support(phi0).len() as u32;
    let depth = logic::bounding_depth(phi0);
    let reg_index = fra.register_index() as u32;
    Ok(Grade {
        n: supp_size + depth + reg_index,
        potential: supp_size + depth,
        supp_size,
        depth,
        reg_index,
    })
}

/// Trims a history to at most `n + 1` names: keeps everything while the
/// history is small, otherwise keeps the names still relevant to the state
/// and formula and completes with the smallest remaining names.
pub fn well_bound(
    history: &BTreeSet<Name>,
    regs: &RegisterAssignment,
    phi: &Formula,
    n: u32,
) -> BTreeSet<Name> {
    if history.len() <= n as usize {
        return history.clone();
    }
    let mut relevant = regs.range();
    relevant.extend(support(phi));
    let mut keep: BTreeSet<Name> = history.intersection(&relevant).copied().collect();
    debug_assert!(keep.len() <= (n + 1) as usize);
    for &a in history.iter() {
        if keep.len() >= (n + 1) as usize {
            break;
        }
        keep.insert(a);
    }
    keep
}

// ---------------------------------------------------------------------------
// Moves

fn single_successor_core(core: &PosCore, formula: Formula) -> PosCore {
    PosCore {
        state: core.state,
        regs: core.regs.clone(),
        history: core.history.clone(),
        formula,
    }
}

/// The instantiation names a quantifier must try at this position.
fn quantifier_candidates(core: &PosCore) -> Vec<Name> {
    fra::representative_names(&core.config(), &core.protected())
}

/// Updates a closure triple for a move that instantiates a value binder.
fn triple_instantiate(
    triple: &ClosureTriple,
    x: &str,
    a: Name,
) -> Result<ClosureTriple, GameError> {
    let body = match &triple.psi {
        Formula::SomeName(y, b) | Formula::AllName(y, b) | Formula::Fresh(y, b) if y == x => {
            b.as_ref().clone()
        }
        other => {
            return Err(GameError::Internal(format!(
                "triple out of sync: expected binder on {x}, found {}",
                other.head_name()
            )))
        }
    };
    let mut gamma = triple.gamma.clone();
    gamma.push_block(vec![(x.to_string(), a)]);
    Ok(ClosureTriple {
        psi: body,
        gamma,
        theta: triple.theta.clone(),
    })
}

/// Updates a closure triple for a fixpoint unfolding. The recorded
/// subformula is either the applied fixpoint itself or a bare recursion
/// variable whose abstraction is already in θ.
fn triple_unfold(triple: &ClosureTriple, args: &[Name]) -> Result<ClosureTriple, GameError> {
    match &triple.psi {
        Formula::Fix(sigma, f) => {
            let mut gamma = triple.gamma.clone();
            gamma.push_block(f.params.iter().cloned().zip(args.iter().copied()).collect());
            let mut theta = triple.theta.clone();
            theta.push_block(RecBlock::from_fix(*sigma, f));
            Ok(ClosureTriple {
                psi: f.body.as_ref().clone(),
                gamma,
                theta,
            })
        }
        Formula::Call(x, _) => {
            let block = triple
                .theta
                .lookup(x)
                .ok_or_else(|| GameError::Internal(format!("no recorded abstraction for {x}")))?
                .clone();
            let mut gamma = triple.gamma.clone();
            gamma.push_block(
                block
                    .params
                    .iter()
                    .cloned()
                    .zip(args.iter().copied())
                    .collect(),
            );
            Ok(ClosureTriple {
                psi: block.body.as_ref().clone(),
                gamma,
                theta: triple.theta.clone(),
            })
        }
        other => Err(GameError::Internal(format!(
            "triple out of sync: expected fixpoint, found {}",
            other.head_name()
        ))),
    }
}

/// For boolean moves the stored subformula mirrors the expanded head.
fn triple_child(triple: &ClosureTriple, pick_right: bool) -> Result<ClosureTriple, GameError> {
    let psi = match &triple.psi {
        Formula::Or(a, b) | Formula::And(a, b) => {
            if pick_right {
                b.as_ref().clone()
            } else {
                a.as_ref().clone()
            }
        }
        other => {
            return Err(GameError::Internal(format!(
                "triple out of sync: expected a boolean connective, found {}",
                other.head_name()
            )))
        }
    };
    Ok(ClosureTriple {
        psi,
        gamma: triple.gamma.clone(),
        theta: triple.theta.clone(),
    })
}

fn triple_modal(triple: &ClosureTriple) -> Result<ClosureTriple, GameError> {
    let psi = match &triple.psi {
        Formula::Diamond(_, b) | Formula::Box(_, b) => b.as_ref().clone(),
        other => {
            return Err(GameError::Internal(format!(
                "triple out of sync: expected a modality, found {}",
                other.head_name()
            )))
        }
    };
    Ok(ClosureTriple {
        psi,
        gamma: triple.gamma.clone(),
        theta: triple.theta.clone(),
    })
}

/// Successor positions of `pos` under the game rules, with histories
/// trimmed through [`well_bound`] at modal moves.
pub fn expand_moves(pos: &Position, n: u32, fra: &Fra) -> Result<Vec<Position>, GameError> {
    let core = &pos.core;
    let mut out = Vec::new();
    match &core.formula {
        Formula::Eq(..) | Formula::Neq(..) => {}
        Formula::Or(a, b) | Formula::And(a, b) => {
            out.push(Position {
                core: single_successor_core(core, a.as_ref().clone()),
                triple: triple_child(&pos.triple, false)?,
            });
            out.push(Position {
                core: single_successor_core(core, b.as_ref().clone()),
                triple: triple_child(&pos.triple, true)?,
            });
        }
        Formula::SomeName(x, body) | Formula::AllName(x, body) => {
            for a in quantifier_candidates(core) {
                let inst = logic::subst_values(body, &ValueSubst::block(vec![(x.clone(), a)]));
                out.push(Position {
                    core: single_successor_core(core, inst),
                    triple: triple_instantiate(&pos.triple, x, a)?,
                });
            }
        }
        Formula::Fresh(x, body) => {
            // one representative choice: fresh for the formula and history
            let mut used = support(&core.formula);
            used.extend(core.history.iter().copied());
            let a = fresh_name(&used);
            let inst = logic::subst_values(body, &ValueSubst::block(vec![(x.clone(), a)]));
            out.push(Position {
                core: single_successor_core(core, inst),
                triple: triple_instantiate(&pos.triple, x, a)?,
            });
        }
        Formula::Diamond(label, body) | Formula::Box(label, body) => {
            if label.args.len() != 1 {
                return Err(GameError::LabelArity {
                    tag: label.tag.clone(),
                    arity: label.args.len(),
                });
            }
            let a = label.args[0]
                .as_name()
                .ok_or_else(|| GameError::Internal("label argument is not a name".into()))?;
            for succ in fra::step(fra, &core.config(), &label.tag, a) {
                let history = well_bound(&succ.history, &succ.regs, body, n);
                out.push(Position {
                    core: PosCore {
                        state: succ.state,
                        regs: succ.regs,
                        history,
                        formula: body.as_ref().clone(),
                    },
                    triple: triple_modal(&pos.triple)?,
                });
            }
        }
        Formula::Fix(_, f) => {
            let mut args = Vec::with_capacity(f.args.len());
            for a in &f.args {
                args.push(a.as_name().ok_or_else(|| {
                    GameError::Internal("fixpoint argument is not a name".into())
                })?);
            }
            let unfolded = logic::unfold(&core.formula)?;
            out.push(Position {
                core: single_successor_core(core, unfolded),
                triple: triple_unfold(&pos.triple, &args)?,
            });
        }
        Formula::Not(..) => return Err(GameError::NotNegationFree),
        Formula::Call(x, _) => {
            return Err(GameError::Internal(format!(
                "open recursion variable {x} reached the game"
            )))
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// The finite game

/// A finite parity game over canonical position keys.
#[derive(Clone, Debug)]
pub struct ParityGame {
    pub keys: Vec<String>,
    pub owners: Vec<Owner>,
    pub ranks: Vec<u32>,
    pub succ: Vec<Vec<usize>>,
    pub root: usize,
    pub max_rank: u32,
}

impl ParityGame {
    pub fn len(&self) -> usize {
        self.owners.len()
    }

    pub fn is_empty(&self) -> bool {
        self.owners.is_empty()
    }

    pub fn edge_count(&self) -> usize {
        self.succ.iter().map(|s| s.len()).sum()
    }
}

/// The constructed orbit game together with its representatives and the
/// size accounting used by the stats command.
#[derive(Clone, Debug)]
pub struct OrbitGame {
    pub game: ParityGame,
    /// Canonical core per position (the orbit key).
    pub canon: Vec<PosCore>,
    /// First-discovered representative per position, with its triple.
    pub reps: Vec<Position>,
    pub grade: Grade,
    /// Upper bound on the number of orbit positions, evaluated with
    /// slack factor 2.
    pub bound: u128,
}

fn factorial_ratio(m: u64, s: u64) -> u128 {
    // m! / s! for s <= m
    let mut acc: u128 = 1;
    for k in (s + 1)..=m {
        acc = acc.saturating_mul(k as u128);
    }
    acc
}

/// `|Q| · |φ₀| · M!/|supp(φ₀)|! · (N+1)^(M+1) · 2`, saturating.
pub fn orbit_size_bound(phi0: &Formula, fra: &Fra, g: &Grade) -> u128 {
    let states = fra.state_count() as u128;
    let fsize = logic::size(phi0) as u128;
    let ratio = factorial_ratio(g.potential as u64, g.supp_size as u64);
    let base = (g.n + 1) as u128;
    let mut pow: u128 = 1;
    for _ in 0..=g.potential {
        pow = pow.saturating_mul(base);
    }
    states
        .saturating_mul(fsize)
        .saturating_mul(ratio)
        .saturating_mul(pow)
        .saturating_mul(2)
}

/// Compact printable form of a canonical core, used as the dump key.
pub fn render_key(fra: &Fra, core: &PosCore) -> String {
    let mut h = String::new();
    for (i, a) in core.history.iter().enumerate() {
        if i > 0 {
            h.push(',');
        }
        h.push_str(&a.to_string());
    }
    format!(
        "{} {} {{{}}} {}",
        fra.state_name(core.state),
        core.regs,
        h,
        core.formula
    )
}

#[derive(Clone, Copy, Debug)]
pub struct BuildOptions {
    pub max_positions: usize,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_positions: 200_000,
        }
    }
}

/// Builds the finite orbit game for a closed, firm, negation-free,
/// binder-normalized formula and a start configuration.
pub fn build_orbit_game(
    fra: &Fra,
    phi0: &Formula,
    start: &Config,
    opts: &BuildOptions,
) -> Result<OrbitGame, GameError> {
    if logic::count_not(phi0) > 0 {
        return Err(GameError::NotNegationFree);
    }
    let g = grade(phi0, fra)?;
    let ranks_table = RankTable::new(phi0)?;
    start.validate(fra).map_err(GameError::BadConfig)?;
    check_labels(phi0, fra)?;

    let root_history = well_bound(&start.history, &start.regs, phi0, g.n);
    let root = Position {
        core: PosCore {
            state: start.state,
            regs: start.regs.clone(),
            history: root_history,
            formula: phi0.clone(),
        },
        triple: ClosureTriple::root(phi0),
    };

    struct Build {
        index: HashMap<PosCore, usize>,
        canon: Vec<PosCore>,
        reps: Vec<Position>,
        owners: Vec<Owner>,
        ranks: Vec<u32>,
        succ: Vec<Vec<usize>>,
        queue: VecDeque<usize>,
    }

    impl Build {
        fn intern(&mut self, pos: Position, table: &RankTable) -> Result<usize, GameError> {
            let (key, _) = canonical_renaming(&pos.core, &BTreeSet::new());
            if let Some(&id) = self.index.get(&key) {
                return Ok(id);
            }
            let id = self.canon.len();
            self.index.insert(key.clone(), id);
            self.canon.push(key);
            self.owners.push(owner_of(&pos.core.formula)?);
            self.ranks.push(table.rank(&pos.core.formula));
            self.reps.push(pos);
            self.succ.push(Vec::new());
            self.queue.push_back(id);
            Ok(id)
        }
    }

    let mut b = Build {
        index: HashMap::new(),
        canon: Vec::new(),
        reps: Vec::new(),
        owners: Vec::new(),
        ranks: Vec::new(),
        succ: Vec::new(),
        queue: VecDeque::new(),
    };

    let root_id = b.intern(root, &ranks_table)?;

    while let Some(id) = b.queue.pop_front() {
        if b.canon.len() > opts.max_positions {
            return Err(GameError::PositionCeiling(opts.max_positions));
        }
        let rep = b.reps[id].clone();
        let mut edges = Vec::new();
        for m in expand_moves(&rep, g.n, fra)? {
            let sid = b.intern(m, &ranks_table)?;
            if !edges.contains(&sid) {
                edges.push(sid);
            }
        }
        b.succ[id] = edges;
    }

    let max_rank = b.ranks.iter().copied().max().unwrap_or(0);
    let keys = b.canon.iter().map(|c| render_key(fra, c)).collect();
    let bound = orbit_size_bound(phi0, fra, &g);
    Ok(OrbitGame {
        game: ParityGame {
            keys,
            owners: b.owners,
            ranks: b.ranks,
            succ: b.succ,
            root: root_id,
            max_rank,
        },
        canon: b.canon,
        reps: b.reps,
        grade: g,
        bound,
    })
}

fn check_labels(phi0: &Formula, fra: &Fra) -> Result<(), GameError> {
    fn go(phi: &Formula, fra: &Fra) -> Result<(), GameError> {
        match phi {
            Formula::Diamond(l, b) | Formula::Box(l, b) => {
                if !fra.tags.contains_key(&l.tag) {
                    return Err(GameError::UnknownLabelTag(l.tag.clone()));
                }
                if l.args.len() != 1 {
                    return Err(GameError::LabelArity {
                        tag: l.tag.clone(),
                        arity: l.args.len(),
                    });
                }
                go(b, fra)
            }
            Formula::Not(b)
            | Formula::SomeName(_, b)
            | Formula::AllName(_, b)
            | Formula::Fresh(_, b) => go(b, fra),
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, fra)?;
                go(b, fra)
            }
            Formula::Fix(_, f) => go(&f.body, fra),
            _ => Ok(()),
        }
    }
    go(phi0, fra)
}

// ---------------------------------------------------------------------------
// Pairwise nominal equivalence of positions

/// Structural descent over two expanded formulas, accumulating the partial
/// injection their names must satisfy. Variable identifiers and tags must
/// match verbatim; only names are matched up.
fn match_formulas(a: &Formula, b: &Formula, inj: PartialInjection) -> Option<PartialInjection> {
    use Formula::*;
    let match_values = |u: &Value, v: &Value, inj: PartialInjection| -> Option<PartialInjection> {
        match (u, v) {
            (Value::Name(m), Value::Name(n)) => inj.extend_match(&[*m], &[*n]),
            (Value::Var(x), Value::Var(y)) if x == y => Some(inj),
            _ => None,
        }
    };
    match (a, b) {
        (Eq(u1, v1), Eq(u2, v2)) | (Neq(u1, v1), Neq(u2, v2)) => {
            let inj = match_values(u1, u2, inj)?;
            match_values(v1, v2, inj)
        }
        (Not(x), Not(y)) => match_formulas(x, y, inj),
        (Or(x1, y1), Or(x2, y2)) | (And(x1, y1), And(x2, y2)) => {
            let inj = match_formulas(x1, x2, inj)?;
            match_formulas(y1, y2, inj)
        }
        (SomeName(x, f), SomeName(y, g))
        | (AllName(x, f), AllName(y, g))
        | (Fresh(x, f), Fresh(y, g)) => {
            if x != y {
                return None;
            }
            match_formulas(f, g, inj)
        }
        (Diamond(l1, f), Diamond(l2, g)) | (Box(l1, f), Box(l2, g)) => {
            if l1.tag != l2.tag || l1.args.len() != l2.args.len() {
                return None;
            }
            let mut inj = inj;
            for (u, v) in l1.args.iter().zip(&l2.args) {
                inj = match_values(u, v, inj)?;
            }
            match_formulas(f, g, inj)
        }
        (Call(x, a1), Call(y, a2)) => {
            if x != y || a1.len() != a2.len() {
                return None;
            }
            let mut inj = inj;
            for (u, v) in a1.iter().zip(a2) {
                inj = match_values(u, v, inj)?;
            }
            Some(inj)
        }
        (Fix(s1, f1), Fix(s2, f2)) => {
            if s1 != s2
                || f1.var != f2.var
                || f1.params != f2.params
                || f1.args.len() != f2.args.len()
            {
                return None;
            }
            let mut inj = match_formulas(&f1.body, &f2.body, inj)?;
            for (u, v) in f1.args.iter().zip(&f2.args) {
                inj = match_values(u, v, inj)?;
            }
            Some(inj)
        }
        _ => None,
    }
}

/// A permutation witnessing that two positions are the same up to renaming
/// of names, or `None`. Histories must have equal sizes, the formulas must
/// match structurally, the register assignments must match index-wise, the
/// matched names must agree on history membership, and the redundant parts
/// of the histories must have equal sizes.
pub fn nominal_equiv_positions(p1: &PosCore, p2: &PosCore) -> Option<Permutation> {
    if p1.history.len() != p2.history.len() {
        return None;
    }
    let inj = match_formulas(&p1.formula, &p2.formula, PartialInjection::new())?;
    let inj = fra::extend_with_state(&inj, (p1.state, &p1.regs), (p2.state, &p2.regs))?;

    // matched names must lie on the same side of the history
    for (a, b) in inj.pairs() {
        if p1.history.contains(&a) != p2.history.contains(&b) {
            return None;
        }
    }
    // equally many redundant history names on both sides
    let red1: Vec<Name> = p1
        .history
        .iter()
        .copied()
        .filter(|a| !inj.contains_source(*a))
        .collect();
    let red2: Vec<Name> = p2
        .history
        .iter()
        .copied()
        .filter(|b| !inj.contains_target(*b))
        .collect();
    if red1.len() != red2.len() {
        return None;
    }
    let inj = inj.extend_match(&red1, &red2)?;
    let perm = inj.into_permutation();
    debug_assert_eq!(p1.permute(&perm), *p2);
    Some(perm)
}

// ---------------------------------------------------------------------------
// Dump format

impl OrbitGame {
    /// One line per position: `key ; owner ; rank ; successor keys…`,
    /// sorted by key, preceded by a header naming the root, the grade and
    /// the maximum rank.
    pub fn dump(&self) -> String {
        let g = &self.game;
        let mut order: Vec<usize> = (0..g.len()).collect();
        order.sort_by(|&i, &j| g.keys[i].cmp(&g.keys[j]));
        let mut out = String::new();
        out.push_str(&format!("# root: {}\n", g.keys[g.root]));
        out.push_str(&format!("# grade: {}\n", self.grade.n));
        out.push_str(&format!("# max_rank: {}\n", g.max_rank));
        out.push_str(&format!(
            "# positions: {} edges: {}\n",
            g.len(),
            g.edge_count()
        ));
        for i in order {
            out.push_str(&g.keys[i]);
            out.push_str(&format!(" ; {} ; {}", g.owners[i], g.ranks[i]));
            let mut succ_keys: Vec<&str> = g.succ[i].iter().map(|&s| g.keys[s].as_str()).collect();
            succ_keys.sort();
            for s in succ_keys {
                out.push_str(" ; ");
                out.push_str(s);
            }
            out.push('\n');
        }
        out
    }
}

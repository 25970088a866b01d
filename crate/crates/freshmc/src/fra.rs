//! Fresh-register automata and their derived configuration semantics.
//!
//! A configuration pairs a state with an injective register assignment and
//! a history of every name seen so far. Transitions read a stored name, a
//! locally fresh name (not in the registers) or a globally fresh name (not
//! in the history), always extending the history.

use crate::nominal::{fresh_name, Name, Nominal, PartialInjection, Permutation};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TransKind {
    /// Read the name stored in the register.
    Read(usize),
    /// Read a name not currently stored in any register; store it.
    LocalFresh(usize),
    /// Read a name not seen in the history; store it.
    GlobalFresh(usize),
}

impl TransKind {
    pub fn register(&self) -> usize {
        match *self {
            TransKind::Read(i) | TransKind::LocalFresh(i) | TransKind::GlobalFresh(i) => i,
        }
    }
}

impl fmt::Display for TransKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TransKind::Read(i) => write!(f, "read({i})"),
            TransKind::LocalFresh(i) => write!(f, "lfresh({i})"),
            TransKind::GlobalFresh(i) => write!(f, "gfresh({i})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Transition {
    pub from: StateId,
    pub tag: String,
    pub kind: TransKind,
    pub to: StateId,
}

#[derive(Clone, Debug)]
pub struct Fra {
    pub registers: usize,
    state_names: Vec<String>,
    avail: Vec<BTreeSet<usize>>,
    /// Tag signature with arities; transitions may only use arity-1 tags.
    pub tags: BTreeMap<String, usize>,
    transitions: Vec<Transition>,
    outgoing: Vec<Vec<usize>>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FraViolation {
    #[error("transition {0}: register {1} out of range 1..={2}")]
    RegisterOutOfRange(String, usize, usize),
    #[error("transition {0}: read register {1} not available at the source state")]
    ReadUnavailable(String, usize),
    #[error("transition {0}: target availability is not included in {1}")]
    AvailNotMonotone(String, String),
    #[error("transition {0}: tag {1} is not declared")]
    UnknownTag(String, String),
    #[error("transition {0}: tag {1} has arity {2}, transitions need arity 1")]
    TagArity(String, String, usize),
}

impl Fra {
    pub fn new(
        registers: usize,
        states: Vec<(String, BTreeSet<usize>)>,
        tags: BTreeMap<String, usize>,
        transitions: Vec<Transition>,
    ) -> Fra {
        let mut outgoing = vec![Vec::new(); states.len()];
        for (i, t) in transitions.iter().enumerate() {
            outgoing[t.from.0].push(i);
        }
        let (state_names, avail) = states.into_iter().unzip();
        Fra {
            registers,
            state_names,
            avail,
            tags,
            transitions,
            outgoing,
        }
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q.0]
    }

    pub fn state_by_name(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|s| s == name).map(StateId)
    }

    pub fn avail(&self, q: StateId) -> &BTreeSet<usize> {
        &self.avail[q.0]
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    fn describe(&self, t: &Transition) -> String {
        format!(
            "{} --{},{}--> {}",
            self.state_name(t.from),
            t.tag,
            t.kind,
            self.state_name(t.to)
        )
    }

    /// Checks the availability-monotonicity conditions and the arity-1
    /// restriction on transition tags.
    pub fn validate(&self) -> Result<(), Vec<FraViolation>> {
        let mut out = Vec::new();
        for t in &self.transitions {
            let d = self.describe(t);
            let i = t.kind.register();
            if i == 0 || i > self.registers {
                out.push(FraViolation::RegisterOutOfRange(
                    d.clone(),
                    i,
                    self.registers,
                ));
            }
            match self.tags.get(&t.tag) {
                None => out.push(FraViolation::UnknownTag(d.clone(), t.tag.clone())),
                Some(&ar) if ar != 1 => {
                    out.push(FraViolation::TagArity(d.clone(), t.tag.clone(), ar))
                }
                _ => {}
            }
            let src = self.avail(t.from);
            let dst = self.avail(t.to);
            match t.kind {
                TransKind::Read(i) => {
                    if !src.contains(&i) {
                        out.push(FraViolation::ReadUnavailable(d.clone(), i));
                    }
                    if !dst.is_subset(src) {
                        out.push(FraViolation::AvailNotMonotone(
                            d.clone(),
                            format!("{src:?}"),
                        ));
                    }
                }
                TransKind::LocalFresh(i) | TransKind::GlobalFresh(i) => {
                    let mut allowed = src.clone();
                    allowed.insert(i);
                    if !dst.is_subset(&allowed) {
                        out.push(FraViolation::AvailNotMonotone(
                            d.clone(),
                            format!("{allowed:?}"),
                        ));
                    }
                }
            }
        }
        if out.is_empty() {
            Ok(())
        } else {
            Err(out)
        }
    }

    /// Maximum number of registers available at any state.
    pub fn register_index(&self) -> usize {
        self.avail.iter().map(|a| a.len()).max().unwrap_or(0)
    }
}

/// An injective partial map from register indices to names.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegisterAssignment(pub BTreeMap<usize, Name>);

impl RegisterAssignment {
    pub fn empty() -> Self {
        RegisterAssignment::default()
    }

    pub fn get(&self, i: usize) -> Option<Name> {
        self.0.get(&i).copied()
    }

    pub fn range(&self) -> BTreeSet<Name> {
        self.0.values().copied().collect()
    }

    pub fn is_injective(&self) -> bool {
        self.range().len() == self.0.len()
    }

    /// `ρ[i↦a]↾avail`: update then restrict the domain.
    fn updated_restricted(&self, i: usize, a: Name, avail: &BTreeSet<usize>) -> RegisterAssignment {
        let mut m = self.0.clone();
        m.insert(i, a);
        m.retain(|k, _| avail.contains(k));
        RegisterAssignment(m)
    }

    fn restricted(&self, avail: &BTreeSet<usize>) -> RegisterAssignment {
        let mut m = self.0.clone();
        m.retain(|k, _| avail.contains(k));
        RegisterAssignment(m)
    }
}

impl fmt::Display for RegisterAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (n, (i, a)) in self.0.iter().enumerate() {
            write!(f, "{}{}>{}", if n == 0 { "" } else { "," }, i, a)?;
        }
        write!(f, "]")
    }
}

impl Nominal for RegisterAssignment {
    fn permute(&self, p: &Permutation) -> Self {
        RegisterAssignment(self.0.iter().map(|(&i, &a)| (i, p.apply(a))).collect())
    }
    /// Visited in register-index order.
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        for &a in self.0.values() {
            visit(a);
        }
    }
}

/// A runtime configuration: state, registers, and the accumulated history.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Config {
    pub state: StateId,
    pub regs: RegisterAssignment,
    pub history: BTreeSet<Name>,
}

impl Config {
    pub fn new(state: StateId, regs: RegisterAssignment, history: BTreeSet<Name>) -> Config {
        Config {
            state,
            regs,
            history,
        }
    }

    /// Checks injectivity, domain = availability, and range ⊆ history.
    pub fn validate(&self, fra: &Fra) -> Result<(), String> {
        if !self.regs.is_injective() {
            return Err(format!(
                "register assignment {} is not injective",
                self.regs
            ));
        }
        let dom: BTreeSet<usize> = self.regs.0.keys().copied().collect();
        if &dom != fra.avail(self.state) {
            return Err(format!(
                "register domain {:?} differs from the availability {:?} of {}",
                dom,
                fra.avail(self.state),
                fra.state_name(self.state)
            ));
        }
        if !self.regs.range().is_subset(&self.history) {
            return Err(format!(
                "register contents {} not contained in the history",
                self.regs
            ));
        }
        Ok(())
    }
}

impl fmt::Display for Config {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(q{}, {}, {{", self.state.0, self.regs)?;
        for (n, a) in self.history.iter().enumerate() {
            write!(f, "{}{}", if n == 0 { "" } else { "," }, a)?;
        }
        write!(f, "}})")
    }
}

impl Nominal for Config {
    fn permute(&self, p: &Permutation) -> Self {
        Config {
            state: self.state,
            regs: self.regs.permute(p),
            history: self.history.permute(p),
        }
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        self.regs.visit_names(visit);
        self.history.visit_names(visit);
    }
}

/// All configurations reachable from `cfg` by one `(tag, a)`-labelled
/// transition. The history always grows by `a`; registers are updated and
/// restricted to the availability of the target state.
pub fn step(fra: &Fra, cfg: &Config, tag: &str, a: Name) -> Vec<Config> {
    let mut out = BTreeSet::new();
    for &ti in &fra.outgoing[cfg.state.0] {
        let t = &fra.transitions[ti];
        if t.tag != tag {
            continue;
        }
        let avail_to = fra.avail(t.to);
        let regs = match t.kind {
            TransKind::Read(i) => {
                if cfg.regs.get(i) != Some(a) {
                    continue;
                }
                cfg.regs.restricted(avail_to)
            }
            TransKind::LocalFresh(i) => {
                if cfg.regs.range().contains(&a) {
                    continue;
                }
                cfg.regs.updated_restricted(i, a, avail_to)
            }
            TransKind::GlobalFresh(i) => {
                if cfg.history.contains(&a) {
                    continue;
                }
                cfg.regs.updated_restricted(i, a, avail_to)
            }
        };
        let mut history = cfg.history.clone();
        history.insert(a);
        out.insert(Config::new(t.to, regs, history));
    }
    out.into_iter().collect()
}

/// The candidate names a quantifier or transition needs to try so that
/// every successor is covered up to renaming that fixes `protected`:
/// the protected names and register contents, one representative of the
/// remaining history, and one canonical fresh name.
pub fn representative_names(cfg: &Config, protected: &BTreeSet<Name>) -> Vec<Name> {
    let mut cands: BTreeSet<Name> = protected.clone();
    cands.extend(cfg.regs.range());
    if let Some(&h) = cfg.history.difference(&cands).next() {
        cands.insert(h);
    }
    let mut used: BTreeSet<Name> = cfg.history.clone();
    used.extend(protected.iter().copied());
    cands.insert(fresh_name(&used));
    cands.into_iter().collect()
}

/// Successors of `cfg` restricted to representative names. Complete up to
/// nominal equivalence of the resulting positions when `protected`
/// contains the support of the state and of the current formula.
pub fn representative_successors(
    fra: &Fra,
    cfg: &Config,
    protected: &BTreeSet<Name>,
) -> Vec<((String, Name), Config)> {
    let cands = representative_names(cfg, protected);
    let mut out = Vec::new();
    for tag in fra.tags.keys() {
        for &a in &cands {
            for succ in step(fra, cfg, tag, a) {
                out.push(((tag.clone(), a), succ));
            }
        }
    }
    out
}

/// Extends a partial injection with the index-wise matching of two
/// register assignments over the same state.
pub fn extend_with_state(
    inj: &PartialInjection,
    s1: (StateId, &RegisterAssignment),
    s2: (StateId, &RegisterAssignment),
) -> Option<PartialInjection> {
    if s1.0 != s2.0 {
        return None;
    }
    let (r1, r2) = (s1.1, s2.1);
    if r1.0.keys().ne(r2.0.keys()) {
        return None;
    }
    let mut out = inj.clone();
    for (i, &a) in &r1.0 {
        let b = r2.0[i];
        if !out.extend_pair(a, b) {
            return None;
        }
    }
    Some(out)
}

/// A permutation mapping one state-assignment pair to another while also
/// sending `a` pointwise to `b`, or `None` when no such permutation
/// exists. Runs in time linear in `|a|` plus the register count.
pub fn permutation_oracle(
    s1: (StateId, &RegisterAssignment),
    s2: (StateId, &RegisterAssignment),
    a: &[Name],
    b: &[Name],
) -> Option<Permutation> {
    let inj = PartialInjection::new().extend_match(a, b)?;
    let inj = extend_with_state(&inj, s1, s2)?;
    Some(inj.into_permutation())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(i: u32) -> Name {
        Name(i)
    }

    fn avail(regs: &[usize]) -> BTreeSet<usize> {
        regs.iter().copied().collect()
    }

    /// The session automaton: start a fresh session, use it, terminate it.
    pub fn sessions() -> Fra {
        let tags = [("S", 1), ("U", 1), ("T", 1)]
            .into_iter()
            .map(|(t, a)| (t.to_string(), a))
            .collect();
        Fra::new(
            1,
            vec![("q0".into(), avail(&[])), ("q1".into(), avail(&[1]))],
            tags,
            vec![
                Transition {
                    from: StateId(0),
                    tag: "S".into(),
                    kind: TransKind::GlobalFresh(1),
                    to: StateId(1),
                },
                Transition {
                    from: StateId(1),
                    tag: "U".into(),
                    kind: TransKind::Read(1),
                    to: StateId(1),
                },
                Transition {
                    from: StateId(1),
                    tag: "T".into(),
                    kind: TransKind::Read(1),
                    to: StateId(0),
                },
            ],
        )
    }

    #[test]
    fn sessions_automaton_validates() {
        assert!(sessions().validate().is_ok());
    }

    #[test]
    fn validate_flags_unavailable_read() {
        let fra = Fra::new(
            1,
            vec![("q0".into(), avail(&[])), ("q1".into(), avail(&[]))],
            [("t".to_string(), 1)].into_iter().collect(),
            vec![Transition {
                from: StateId(0),
                tag: "t".into(),
                kind: TransKind::Read(1),
                to: StateId(1),
            }],
        );
        let errs = fra.validate().unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, FraViolation::ReadUnavailable(..))));
    }

    #[test]
    fn validate_flags_non_monotone_availability() {
        // target keeps registers {1,2} though only {1} can be granted
        let fra = Fra::new(
            2,
            vec![("q0".into(), avail(&[])), ("q1".into(), avail(&[1, 2]))],
            [("t".to_string(), 1)].into_iter().collect(),
            vec![Transition {
                from: StateId(0),
                tag: "t".into(),
                kind: TransKind::GlobalFresh(1),
                to: StateId(1),
            }],
        );
        let errs = fra.validate().unwrap_err();
        assert!(errs
            .iter()
            .any(|e| matches!(e, FraViolation::AvailNotMonotone(..))));
    }

    #[test]
    fn register_index_examples() {
        assert_eq!(sessions().register_index(), 1);
        let bare = Fra::new(0, vec![("q0".into(), avail(&[]))], BTreeMap::new(), vec![]);
        assert_eq!(bare.register_index(), 0);
        let two = Fra::new(
            2,
            vec![("q0".into(), avail(&[1, 2]))],
            BTreeMap::new(),
            vec![],
        );
        assert_eq!(two.register_index(), 2);
    }

    #[test]
    fn step_examples() {
        let fra = sessions();
        let start = Config::new(StateId(0), RegisterAssignment::empty(), BTreeSet::new());
        let succ = step(&fra, &start, "S", n(0));
        assert_eq!(succ.len(), 1);
        assert_eq!(succ[0].state, StateId(1));
        assert_eq!(succ[0].regs.get(1), Some(n(0)));
        assert_eq!(succ[0].history, [n(0)].into_iter().collect());

        // U only reads the stored name
        let cfg = succ.into_iter().next().unwrap();
        assert!(step(&fra, &cfg, "U", n(1)).is_empty());
        assert_eq!(step(&fra, &cfg, "U", n(0)).len(), 1);

        // globally fresh transitions refuse names in the history
        assert!(step(&fra, &start, "S", n(0))[0].history.contains(&n(0)));
        let seen = Config::new(
            StateId(0),
            RegisterAssignment::empty(),
            [n(0)].into_iter().collect(),
        );
        assert!(step(&fra, &seen, "S", n(0)).is_empty());
    }

    #[test]
    fn representative_successors_single_fresh_loop() {
        // one state, no available registers, one globally fresh loop
        let fra = Fra::new(
            1,
            vec![("q0".into(), avail(&[]))],
            [("o".to_string(), 1)].into_iter().collect(),
            vec![Transition {
                from: StateId(0),
                tag: "o".into(),
                kind: TransKind::GlobalFresh(1),
                to: StateId(0),
            }],
        );
        let cfg = Config::new(StateId(0), RegisterAssignment::empty(), BTreeSet::new());
        let moves = representative_successors(&fra, &cfg, &BTreeSet::new());
        assert_eq!(moves.len(), 1);
        assert_eq!(moves[0].0, ("o".to_string(), n(0)));
    }

    #[test]
    fn representative_successors_history_and_fresh() {
        // locally fresh loop; protected {#0} leaves #1 as the history
        // representative plus one fresh name
        let fra = Fra::new(
            1,
            vec![("q1".into(), avail(&[1]))],
            [("o".to_string(), 1)].into_iter().collect(),
            vec![Transition {
                from: StateId(0),
                tag: "o".into(),
                kind: TransKind::LocalFresh(1),
                to: StateId(0),
            }],
        );
        let cfg = Config::new(
            StateId(0),
            RegisterAssignment([(1, n(0))].into_iter().collect()),
            [n(0), n(1)].into_iter().collect(),
        );
        let protected: BTreeSet<Name> = [n(0)].into_iter().collect();
        let moves = representative_successors(&fra, &cfg, &protected);
        let names: BTreeSet<Name> = moves.iter().map(|((_, a), _)| *a).collect();
        // #0 is stored so the locally fresh loop refuses it
        assert_eq!(names, [n(1), n(2)].into_iter().collect());
    }

    #[test]
    fn representative_successors_stuck() {
        let fra = sessions();
        let cfg = Config::new(
            StateId(1),
            RegisterAssignment([(1, n(0))].into_iter().collect()),
            [n(0)].into_iter().collect(),
        );
        // q1 has U and T transitions; a stuck state has none
        let stuck = Fra::new(1, vec![("q".into(), avail(&[]))], fra.tags.clone(), vec![]);
        let c = Config::new(StateId(0), RegisterAssignment::empty(), BTreeSet::new());
        assert!(representative_successors(&stuck, &c, &BTreeSet::new()).is_empty());
        assert!(!representative_successors(&fra, &cfg, &BTreeSet::new()).is_empty());
    }

    #[test]
    fn permutation_oracle_examples() {
        let r1 = RegisterAssignment([(1, n(0))].into_iter().collect());
        let r2 = RegisterAssignment([(1, n(5))].into_iter().collect());
        let p = permutation_oracle((StateId(1), &r1), (StateId(1), &r2), &[], &[]).unwrap();
        assert_eq!(p.apply(n(0)), n(5));

        // different state components
        let e = RegisterAssignment::empty();
        assert!(permutation_oracle((StateId(0), &e), (StateId(1), &e), &[], &[]).is_none());

        // conflicting requirements #0↦#5 vs #0↦#6
        assert!(
            permutation_oracle((StateId(1), &r1), (StateId(1), &r2), &[n(0)], &[n(6)]).is_none()
        );
    }
}

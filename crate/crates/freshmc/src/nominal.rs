//! Names, finite permutations, support, and orbit canonicalization.
//!
//! Everything that carries names implements [`Nominal`]: a permutation
//! action plus a deterministic name traversal. Support and canonical
//! renaming are derived from the traversal, so for the syntactic values
//! used in this crate (trees, tuples, finite maps and sets) the computed
//! support is exactly the set of names occurring in the value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// An atom: a pure identifier compared only for equality.
///
/// The total order on the underlying integer is never observed by the
/// semantics; it only pins down canonical forms and fresh-name choices.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Name(pub u32);

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Smallest name not contained in `used`.
pub fn fresh_name(used: &BTreeSet<Name>) -> Name {
    let mut n = 0u32;
    for name in used {
        if name.0 == n {
            n += 1;
        } else if name.0 > n {
            break;
        }
    }
    Name(n)
}

/// A finite permutation of names.
///
/// Stored as the map of moved names together with its inverse; names
/// outside the map are fixed. Pairs `(a, a)` are normalized away, so the
/// stored domain has no fixed points.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Permutation {
    forward: BTreeMap<Name, Name>,
    inverse: BTreeMap<Name, Name>,
}

impl Permutation {
    pub fn identity() -> Self {
        Permutation::default()
    }

    /// The transposition exchanging `a` and `b`; `swap(a, a)` is the identity.
    pub fn swap(a: Name, b: Name) -> Self {
        let mut p = Permutation::default();
        if a != b {
            p.forward.insert(a, b);
            p.forward.insert(b, a);
            p.inverse = p.forward.clone();
        }
        p
    }

    /// Builds a permutation from explicit pairs, closing them into cycles
    /// if needed. Panics if the pairs are not injective/functional.
    fn from_moved_pairs(pairs: &BTreeMap<Name, Name>) -> Self {
        let mut inj = PartialInjection::default();
        for (&a, &b) in pairs {
            assert!(inj.extend_pair(a, b), "pairs do not form an injection");
        }
        inj.into_permutation()
    }

    pub fn apply(&self, a: Name) -> Name {
        *self.forward.get(&a).unwrap_or(&a)
    }

    pub fn apply_inverse(&self, a: Name) -> Name {
        *self.inverse.get(&a).unwrap_or(&a)
    }

    /// `self ∘ other`: applies `other` first, then `self`.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let mut forward = BTreeMap::new();
        let mut domain: BTreeSet<Name> = self.forward.keys().copied().collect();
        domain.extend(other.forward.keys().copied());
        for a in domain {
            let b = self.apply(other.apply(a));
            if b != a {
                forward.insert(a, b);
            }
        }
        let inverse = forward.iter().map(|(&a, &b)| (b, a)).collect();
        Permutation { forward, inverse }
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            forward: self.inverse.clone(),
            inverse: self.forward.clone(),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.forward.is_empty()
    }

    /// The set of names moved by the permutation.
    pub fn moved(&self) -> BTreeSet<Name> {
        self.forward.keys().copied().collect()
    }
}

/// A finite injective partial map on names.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PartialInjection {
    forward: BTreeMap<Name, Name>,
    backward: BTreeMap<Name, Name>,
}

impl PartialInjection {
    pub fn new() -> Self {
        PartialInjection::default()
    }

    pub fn get(&self, a: Name) -> Option<Name> {
        self.forward.get(&a).copied()
    }

    pub fn len(&self) -> usize {
        self.forward.len()
    }

    pub fn is_empty(&self) -> bool {
        self.forward.is_empty()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (Name, Name)> + '_ {
        self.forward.iter().map(|(&a, &b)| (a, b))
    }

    pub fn contains_source(&self, a: Name) -> bool {
        self.forward.contains_key(&a)
    }

    pub fn contains_target(&self, b: Name) -> bool {
        self.backward.contains_key(&b)
    }

    /// Adds the pair `a ↦ b`. Returns `false` when the pair conflicts with
    /// functionality or injectivity; a pair already present is accepted.
    pub fn extend_pair(&mut self, a: Name, b: Name) -> bool {
        match (self.forward.get(&a), self.backward.get(&b)) {
            (Some(&b2), _) => b2 == b,
            (None, Some(_)) => false,
            (None, None) => {
                self.forward.insert(a, b);
                self.backward.insert(b, a);
                true
            }
        }
    }

    /// Smallest extension mapping `c` pointwise to `d`, or `None` when the
    /// lengths differ or some pair conflicts with the stored injection.
    pub fn extend_match(&self, c: &[Name], d: &[Name]) -> Option<PartialInjection> {
        if c.len() != d.len() {
            return None;
        }
        let mut out = self.clone();
        for (&a, &b) in c.iter().zip(d.iter()) {
            if !out.extend_pair(a, b) {
                return None;
            }
        }
        Some(out)
    }

    /// Completes the injection to a finite permutation extending it.
    ///
    /// The pairs form disjoint paths and cycles on names; each maximal path
    /// is closed by mapping its final target back to its initial source.
    pub fn into_permutation(&self) -> Permutation {
        let mut forward = BTreeMap::new();
        for (&a, &b) in &self.forward {
            if a != b {
                forward.insert(a, b);
            }
        }
        // Close open chains: a target that is not a source starts the tail.
        let sources: BTreeSet<Name> = self.forward.keys().copied().collect();
        for &a in self.forward.keys() {
            if self.backward.contains_key(&a) {
                continue; // not the head of a chain
            }
            // Walk the chain from its head `a` to the last target.
            let mut cur = a;
            while let Some(&next) = self.forward.get(&cur) {
                cur = next;
            }
            if cur != a && !sources.contains(&cur) {
                forward.insert(cur, a);
            }
        }
        let inverse = forward.iter().map(|(&a, &b)| (b, a)).collect();
        Permutation { forward, inverse }
    }
}

/// Values that names act on: a permutation action plus a deterministic
/// traversal of the names occurring in the value.
pub trait Nominal: Sized {
    fn permute(&self, p: &Permutation) -> Self;
    fn visit_names(&self, visit: &mut dyn FnMut(Name));
}

/// The set of names occurring in `x`; for the syntactic values of this
/// crate this is the least support.
pub fn support<T: Nominal>(x: &T) -> BTreeSet<Name> {
    let mut s = BTreeSet::new();
    x.visit_names(&mut |n| {
        s.insert(n);
    });
    s
}

/// Names of `x` in order of first occurrence under the traversal.
pub fn names_in_order<T: Nominal>(x: &T) -> Vec<Name> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    x.visit_names(&mut |n| {
        if seen.insert(n) {
            out.push(n);
        }
    });
    out
}

/// Renames the non-protected names of `x` to the smallest names outside
/// `protected`, in order of first occurrence. Returns the renamed value and
/// a witnessing permutation fixing `protected` pointwise.
///
/// Canonicalizing the result again (with the same protected set) is the
/// identity, and two values get equal canonical forms exactly when some
/// permutation fixing `protected` maps one to the other.
pub fn canonical_renaming<T: Nominal>(x: &T, protected: &BTreeSet<Name>) -> (T, Permutation) {
    let mut pairs = BTreeMap::new();
    let mut next = 0u32;
    for a in names_in_order(x) {
        if protected.contains(&a) || pairs.contains_key(&a) {
            continue;
        }
        while protected.contains(&Name(next)) {
            next += 1;
        }
        pairs.insert(a, Name(next));
        next += 1;
    }
    let perm = Permutation::from_moved_pairs(&pairs);
    (x.permute(&perm), perm)
}

impl Nominal for Name {
    fn permute(&self, p: &Permutation) -> Self {
        p.apply(*self)
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        visit(*self);
    }
}

impl Nominal for BTreeSet<Name> {
    fn permute(&self, p: &Permutation) -> Self {
        self.iter().map(|&a| p.apply(a)).collect()
    }
    /// Visited in ascending order.
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        for &a in self {
            visit(a);
        }
    }
}

impl<T: Nominal> Nominal for Vec<T> {
    fn permute(&self, p: &Permutation) -> Self {
        self.iter().map(|x| x.permute(p)).collect()
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        for x in self {
            x.visit_names(visit);
        }
    }
}

impl<A: Nominal, B: Nominal> Nominal for (A, B) {
    fn permute(&self, p: &Permutation) -> Self {
        (self.0.permute(p), self.1.permute(p))
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        self.0.visit_names(visit);
        self.1.visit_names(visit);
    }
}

//! Properties of the permutation action, support, the partial-injection
//! matcher and canonical renaming, cross-checked against brute force.

mod common;

use common::{gen_permutation, rng};
use freshmc::logic::{Formula, Value};
use freshmc::nominal::{canonical_renaming, support, Name, Nominal, PartialInjection, Permutation};
use rand::prelude::*;
use std::collections::BTreeSet;

fn gen_name_vec(rng: &mut rand_chacha::ChaCha8Rng, m: u32, len: usize) -> Vec<Name> {
    (0..len).map(|_| Name(rng.gen_range(0..m))).collect()
}

#[test]
fn action_laws_hold() {
    let mut rng = rng(11);
    for _ in 0..300 {
        let p1 = gen_permutation(&mut rng, 8, 4);
        let p2 = gen_permutation(&mut rng, 8, 4);
        let len = rng.gen_range(0..6);
        let x = gen_name_vec(&mut rng, 8, len);
        assert_eq!(x.permute(&Permutation::identity()), x);
        assert_eq!(
            x.permute(&p2).permute(&p1),
            x.permute(&p1.compose(&p2)),
            "composition law"
        );
        assert!(p1.compose(&p1.inverse()).is_identity());
    }
}

#[test]
fn support_is_equivariant() {
    let mut rng = rng(12);
    for _ in 0..300 {
        let p = gen_permutation(&mut rng, 8, 4);
        let len = rng.gen_range(0..6);
        let x = gen_name_vec(&mut rng, 8, len);
        assert_eq!(support(&x.permute(&p)), support(&x).permute(&p));
    }
}

#[test]
fn fixing_the_support_fixes_the_value() {
    let mut rng = rng(13);
    for _ in 0..300 {
        let len = rng.gen_range(0..6);
        let x = gen_name_vec(&mut rng, 5, len);
        let supp = support(&x);
        // build a permutation moving only names outside the support
        let mut p = Permutation::identity();
        for _ in 0..3 {
            let a = Name(rng.gen_range(5..9));
            let b = Name(rng.gen_range(5..9));
            if !supp.contains(&a) && !supp.contains(&b) {
                p = Permutation::swap(a, b).compose(&p);
            }
        }
        assert_eq!(x.permute(&p), x);
    }
}

/// A name-vector pairing is a well-defined injection exactly when equal
/// sources always face equal targets and vice versa.
fn brute_force_pairable(c: &[Name], d: &[Name]) -> bool {
    if c.len() != d.len() {
        return false;
    }
    for i in 0..c.len() {
        for j in 0..c.len() {
            if (c[i] == c[j]) != (d[i] == d[j]) {
                return false;
            }
        }
    }
    true
}

#[test]
fn extend_match_agrees_with_brute_force_pairing() {
    let mut rng = rng(14);
    for _ in 0..1000 {
        let len = rng.gen_range(0..=5);
        let c = gen_name_vec(&mut rng, 4, len);
        let d = gen_name_vec(&mut rng, 4, len);
        let got = PartialInjection::new().extend_match(&c, &d);
        assert_eq!(
            got.is_some(),
            brute_force_pairable(&c, &d),
            "{c:?} vs {d:?}"
        );
        if let Some(inj) = got {
            for (a, b) in c.iter().zip(&d) {
                assert_eq!(inj.get(*a), Some(*b));
            }
        }
    }
}

/// Brute force: try every injection between the name sets of the two
/// values and test whether its completion maps one to the other.
fn brute_force_equivalent<T: Nominal + PartialEq>(x: &T, y: &T) -> bool {
    let sx: Vec<Name> = support(x).into_iter().collect();
    let sy: Vec<Name> = support(y).into_iter().collect();
    if sx.len() != sy.len() {
        return false;
    }
    fn perms(items: &[Name]) -> Vec<Vec<Name>> {
        if items.is_empty() {
            return vec![Vec::new()];
        }
        let mut out = Vec::new();
        for (i, &head) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in perms(&rest) {
                tail.insert(0, head);
                out.push(tail);
            }
        }
        out
    }
    for target in perms(&sy) {
        let inj = PartialInjection::new().extend_match(&sx, &target);
        if let Some(inj) = inj {
            if &x.permute(&inj.into_permutation()) == y {
                return true;
            }
        }
    }
    false
}

#[test]
fn canonical_forms_agree_with_brute_force_equivalence() {
    let mut rng = rng(15);
    let empty = BTreeSet::new();
    for _ in 0..400 {
        let xlen = rng.gen_range(0..5);
        let x = gen_name_vec(&mut rng, 4, xlen);
        let ylen = rng.gen_range(0..5);
        let y = gen_name_vec(&mut rng, 4, ylen);
        let (cx, px) = canonical_renaming(&x, &empty);
        let (cy, _) = canonical_renaming(&y, &empty);
        assert_eq!(x.permute(&px), cx, "witness maps input to canonical form");
        assert_eq!(
            cx == cy,
            brute_force_equivalent(&x, &y),
            "{x:?} vs {y:?} (canonical {cx:?} vs {cy:?})"
        );
    }
}

#[test]
fn canonical_renaming_acts_on_formulas() {
    // apply(swap(#0,#1), <o:#0>(#0 = #1)) = <o:#1>(#1 = #0)
    let phi = Formula::Diamond(
        freshmc::logic::Label {
            tag: "o".into(),
            args: vec![Value::Name(Name(0))],
        },
        Formula::Eq(Value::Name(Name(0)), Value::Name(Name(1))).boxed(),
    );
    let moved = phi.permute(&Permutation::swap(Name(0), Name(1)));
    let expected = Formula::Diamond(
        freshmc::logic::Label {
            tag: "o".into(),
            args: vec![Value::Name(Name(1))],
        },
        Formula::Eq(Value::Name(Name(1)), Value::Name(Name(0))).boxed(),
    );
    assert_eq!(moved, expected);

    // canonical_renaming(#7 = #9) renumbers by first occurrence
    let phi = Formula::Eq(Value::Name(Name(7)), Value::Name(Name(9)));
    let (canon, _) = canonical_renaming(&phi, &BTreeSet::new());
    assert_eq!(
        canon,
        Formula::Eq(Value::Name(Name(0)), Value::Name(Name(1)))
    );
}

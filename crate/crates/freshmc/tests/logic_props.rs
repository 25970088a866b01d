//! Properties of the formula transformations: size accounting of negation
//! elimination, the support-size inequality, substitution equivariance,
//! normalization, ranks and unfolding.

mod common;

use common::{gen_formula, gen_permutation, rng, FormulaCfg};
use freshmc::logic::{
    self, alpha_eq, bounding_depth, count_not, negation_free, normalize_binders, size, zeta,
    Formula, RankTable, Sigma, ValueSubst,
};
use freshmc::nominal::{support, Name, Nominal};
use rand::prelude::*;

#[test]
fn negation_elimination_shrinks_by_the_negation_count() {
    let mut rng = rng(21);
    let cfg = FormulaCfg::default();
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        let nf = negation_free(&phi).unwrap();
        assert!(count_not(&nf) == 0);
        assert!(
            size(&nf) <= size(&phi) - count_not(&phi),
            "size {} -> {} with {} negations in {phi}",
            size(&phi),
            size(&nf),
            count_not(&phi)
        );
    }
}

#[test]
fn negation_elimination_is_idempotent() {
    let mut rng = rng(22);
    let cfg = FormulaCfg::default();
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        let once = negation_free(&phi).unwrap();
        assert_eq!(negation_free(&once).unwrap(), once);
    }
}

#[test]
fn support_and_binding_depth_are_bounded_by_size() {
    let mut rng = rng(23);
    let cfg = FormulaCfg {
        allow_not: false,
        ..FormulaCfg::default()
    };
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        // firm and closed by generation; every binder occurs in its body
        assert!(
            support(&phi).len() as u64 + 2 * bounding_depth(&phi) as u64 + zeta(&phi) as u64
                <= size(&phi),
            "inequality fails on {phi}"
        );
    }
}

#[test]
fn value_substitution_commutes_with_the_action() {
    let mut rng = rng(24);
    let cfg = FormulaCfg::default();
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        let p = gen_permutation(&mut rng, 6, 3);
        // substitute names for value variables of a quantifier-stripped body
        let gamma = ValueSubst::block(vec![
            ("x0".into(), Name(rng.gen_range(0..6))),
            ("zz".into(), Name(rng.gen_range(0..6))),
        ]);
        let lhs = logic::subst_values(&phi, &gamma).permute(&p);
        let rhs = logic::subst_values(&phi.permute(&p), &gamma.permute(&p));
        assert_eq!(lhs, rhs, "on {phi}");
    }
}

#[test]
fn recursion_substitution_commutes_with_the_action() {
    let mut rng = rng(29);
    let cfg = FormulaCfg {
        names: vec![Name(0), Name(1), Name(2)],
        ..FormulaCfg::default()
    };
    for _ in 0..200 {
        // build a substitution from a generated fixpoint, apply it to a
        // formula calling the same variable
        let fix = gen_formula(&mut rng, &cfg);
        let Some(fixnode) = (match &fix {
            Formula::Fix(..) => Some(&fix),
            _ => None,
        }) else {
            continue;
        };
        let (sigma, f) = match fixnode {
            Formula::Fix(s, f) => (*s, f),
            _ => unreachable!(),
        };
        let mut theta = logic::RecSubst::empty();
        theta.push_block(logic::RecBlock::from_fix(sigma, f));
        let args: Vec<logic::Value> = (0..f.params.len())
            .map(|i| logic::Value::Name(Name(i as u32)))
            .collect();
        let host = Formula::Or(
            Formula::Call(f.var.clone(), args).boxed(),
            Formula::Eq(logic::Value::Name(Name(0)), logic::Value::Name(Name(1))).boxed(),
        );
        let p = gen_permutation(&mut rng, 5, 3);
        let lhs = logic::subst_rec(&host, &theta).unwrap().permute(&p);
        let rhs = logic::subst_rec(&host.permute(&p), &theta.permute(&p)).unwrap();
        assert_eq!(lhs, rhs);
    }
}

#[test]
fn normalization_preserves_alpha_equivalence_and_is_idempotent() {
    let mut rng = rng(25);
    let cfg = FormulaCfg::default();
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        let norm = normalize_binders(&phi);
        assert!(alpha_eq(&phi, &norm), "{phi} vs {norm}");
        assert_eq!(normalize_binders(&norm), norm);
        assert!(logic::bound_rec_vars(&norm).is_ok());
    }
}

#[test]
fn ranks_are_odd_exactly_at_least_fixpoints() {
    let mut rng = rng(26);
    let cfg = FormulaCfg {
        allow_not: false,
        max_fixpoints: 3,
        ..FormulaCfg::default()
    };
    for _ in 0..200 {
        let phi = gen_formula(&mut rng, &cfg);
        let table = RankTable::new(&phi).unwrap();
        let max = table.alternation_depth();
        fn walk(phi: &Formula, table: &RankTable, max: u32) {
            let r = table.rank(phi);
            match phi {
                Formula::Fix(Sigma::Mu, _) => assert_eq!(r % 2, 1),
                Formula::Fix(Sigma::Nu, _) => assert_eq!(r % 2, 0),
                _ => assert_eq!(r, 0),
            }
            assert!(r <= max + 1);
            match phi {
                Formula::Not(b)
                | Formula::SomeName(_, b)
                | Formula::AllName(_, b)
                | Formula::Fresh(_, b)
                | Formula::Diamond(_, b)
                | Formula::Box(_, b) => walk(b, table, max),
                Formula::Or(a, b) | Formula::And(a, b) => {
                    walk(a, table, max);
                    walk(b, table, max);
                }
                Formula::Fix(_, f) => walk(&f.body, table, max),
                _ => {}
            }
        }
        walk(&phi, &table, max);
    }
}

/// Applied fixpoints of the root formula, paired with their argument
/// names, collected by unfolding from the root once per fixpoint node.
fn find_applied_fixpoint(phi: &Formula) -> Option<&Formula> {
    match phi {
        Formula::Fix(..) => Some(phi),
        Formula::Not(b)
        | Formula::SomeName(_, b)
        | Formula::AllName(_, b)
        | Formula::Fresh(_, b)
        | Formula::Diamond(_, b)
        | Formula::Box(_, b) => find_applied_fixpoint(b),
        Formula::Or(a, b) | Formula::And(a, b) => {
            find_applied_fixpoint(a).or_else(|| find_applied_fixpoint(b))
        }
        _ => None,
    }
}

#[test]
fn unfolding_preserves_support_and_binders() {
    let mut rng = rng(27);
    let cfg = FormulaCfg {
        allow_not: false,
        max_fixpoints: 2,
        names: vec![Name(0), Name(1), Name(2)],
        ..FormulaCfg::default()
    };
    let mut tested = 0;
    for _ in 0..400 {
        let phi = gen_formula(&mut rng, &cfg);
        // only firm applications unfold; the generator can park variables
        // under binders, so search for a closed applied fixpoint
        let Some(fix) = find_applied_fixpoint(&phi) else {
            continue;
        };
        let args: Vec<Name> = match fix {
            Formula::Fix(_, f) => match f.args.iter().map(|v| v.as_name()).collect() {
                Some(names) => names,
                None => continue,
            },
            _ => unreachable!(),
        };
        let unfolded = match logic::unfold(fix) {
            Ok(u) => u,
            Err(_) => continue,
        };
        tested += 1;
        let mut lhs = support(&unfolded);
        lhs.extend(args.iter().copied());
        let mut rhs = support(fix);
        rhs.extend(args.iter().copied());
        assert_eq!(lhs, rhs, "support of unfold({fix})");

        let binders_before = logic::bound_rec_vars(fix).unwrap();
        // unfolding duplicates binders, so collect without the uniqueness check
        fn binders(phi: &Formula, out: &mut Vec<String>) {
            match phi {
                Formula::Fix(_, f) => {
                    out.push(f.var.clone());
                    binders(&f.body, out);
                }
                Formula::Not(b)
                | Formula::SomeName(_, b)
                | Formula::AllName(_, b)
                | Formula::Fresh(_, b)
                | Formula::Diamond(_, b)
                | Formula::Box(_, b) => binders(b, out),
                Formula::Or(a, b) | Formula::And(a, b) => {
                    binders(a, out);
                    binders(b, out);
                }
                _ => {}
            }
        }
        let mut after = Vec::new();
        binders(&unfolded, &mut after);
        for var in after {
            assert!(
                binders_before.contains(&var),
                "unfolding introduced binder {var}"
            );
        }
    }
    assert!(tested >= 50, "only {tested} unfoldable samples");
}

#[test]
fn negation_free_handles_derived_connectives_natively() {
    let mut rng = rng(28);
    let cfg = FormulaCfg {
        allow_not: false,
        ..FormulaCfg::default()
    };
    for _ in 0..100 {
        let phi = gen_formula(&mut rng, &cfg);
        assert_eq!(negation_free(&phi).unwrap(), phi);
    }
}

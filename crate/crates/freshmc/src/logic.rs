//! Formula syntax and the transformations the checking pipeline needs:
//! size measures, binder normalization, negation elimination, value and
//! recursion substitution, fixpoint unfolding, alternation depth and the
//! rank function used by the parity game.

use crate::nominal::{Name, Nominal, Permutation};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// A value: a name literal or a value variable.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Value {
    Name(Name),
    Var(String),
}

impl Value {
    pub fn as_name(&self) -> Option<Name> {
        match self {
            Value::Name(n) => Some(*n),
            Value::Var(_) => None,
        }
    }
}

/// A modal label: a tag applied to a vector of values.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub tag: String,
    pub args: Vec<Value>,
}

/// Fixpoint polarity.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sigma {
    Mu,
    Nu,
}

impl Sigma {
    pub fn dual(self) -> Sigma {
        match self {
            Sigma::Mu => Sigma::Nu,
            Sigma::Nu => Sigma::Mu,
        }
    }
}

/// An applied fixpoint `(σX(x⃗).body)(args)`; `args.len() == params.len()`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fix {
    pub var: String,
    pub params: Vec<String>,
    pub body: Box<Formula>,
    pub args: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Eq(Value, Value),
    Neq(Value, Value),
    Not(Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// `some x. φ` — disjunction over all names.
    SomeName(String, Box<Formula>),
    /// `all x. φ` — conjunction over all names.
    AllName(String, Box<Formula>),
    /// `fresh x. φ` — quantification over names fresh for the formula and
    /// the current history (self-dual).
    Fresh(String, Box<Formula>),
    Diamond(Label, Box<Formula>),
    Box(Label, Box<Formula>),
    Fix(Sigma, Fix),
    /// `X(u⃗)` — an applied recursion variable.
    Call(String, Vec<Value>),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LogicError {
    #[error("recursion variable {var} occurs under an odd number of negations from its binder")]
    OddNegation { var: String },
    #[error("arity mismatch for {var}: expected {expected}, found {found}")]
    Arity {
        var: String,
        expected: usize,
        found: usize,
    },
    #[error("formula has free value variables: {0:?}")]
    NotFirm(Vec<String>),
    #[error("formula has free recursion variables: {0:?}")]
    NotClosed(Vec<String>),
    #[error("substituting for {var} would capture {captured}")]
    Capture { var: String, captured: String },
    #[error("bound recursion variables are not unique (normalize first): {0}")]
    DuplicateBinder(String),
    #[error("expected an applied fixpoint, found {0}")]
    NotFixpoint(String),
    #[error("fixpoint argument {0} is not a name (formula not firm)")]
    NonNameArgument(String),
}

impl Formula {
    pub fn boxed(self) -> Box<Formula> {
        Box::new(self)
    }

    /// Convenience for building `(σX(x⃗).body)(args)`.
    pub fn fix(
        sigma: Sigma,
        var: &str,
        params: &[&str],
        body: Formula,
        args: Vec<Value>,
    ) -> Formula {
        Formula::Fix(
            sigma,
            Fix {
                var: var.to_string(),
                params: params.iter().map(|s| s.to_string()).collect(),
                body: body.boxed(),
                args,
            },
        )
    }

    pub fn head_name(&self) -> &'static str {
        match self {
            Formula::Eq(..) => "=",
            Formula::Neq(..) => "!=",
            Formula::Not(..) => "!",
            Formula::Or(..) => "|",
            Formula::And(..) => "&",
            Formula::SomeName(..) => "some",
            Formula::AllName(..) => "all",
            Formula::Fresh(..) => "fresh",
            Formula::Diamond(..) => "<>",
            Formula::Box(..) => "[]",
            Formula::Fix(Sigma::Mu, _) => "mu",
            Formula::Fix(Sigma::Nu, _) => "nu",
            Formula::Call(..) => "call",
        }
    }
}

// ---------------------------------------------------------------------------
// Measures

/// Formula size `|φ|`.
pub fn size(phi: &Formula) -> u64 {
    match phi {
        Formula::Eq(..) | Formula::Neq(..) => 2,
        Formula::Not(b)
        | Formula::SomeName(_, b)
        | Formula::AllName(_, b)
        | Formula::Fresh(_, b) => 1 + size(b),
        Formula::Or(a, b) | Formula::And(a, b) => 1 + size(a) + size(b),
        Formula::Diamond(l, b) | Formula::Box(l, b) => 1 + l.args.len() as u64 + size(b),
        Formula::Call(_, args) => 1 + args.len() as u64,
        Formula::Fix(_, f) => 1 + size(&f.body) + 2 * f.args.len() as u64,
    }
}

/// Bounding depth `‖φ‖`: the name-binding capacity along the deepest
/// binder path.
pub fn bounding_depth(phi: &Formula) -> u32 {
    match phi {
        Formula::Eq(..) | Formula::Neq(..) | Formula::Call(..) => 0,
        Formula::Not(b) | Formula::Diamond(_, b) | Formula::Box(_, b) => bounding_depth(b),
        Formula::Or(a, b) | Formula::And(a, b) => bounding_depth(a).max(bounding_depth(b)),
        Formula::SomeName(_, b) | Formula::AllName(_, b) | Formula::Fresh(_, b) => {
            1 + bounding_depth(b)
        }
        Formula::Fix(_, f) => bounding_depth(&f.body) + f.params.len() as u32,
    }
}

/// Number of `Not` nodes.
pub fn count_not(phi: &Formula) -> u64 {
    match phi {
        Formula::Eq(..) | Formula::Neq(..) | Formula::Call(..) => 0,
        Formula::Not(b) => 1 + count_not(b),
        Formula::SomeName(_, b)
        | Formula::AllName(_, b)
        | Formula::Fresh(_, b)
        | Formula::Diamond(_, b)
        | Formula::Box(_, b) => count_not(b),
        Formula::Or(a, b) | Formula::And(a, b) => count_not(a) + count_not(b),
        Formula::Fix(_, f) => count_not(&f.body),
    }
}

fn visit_values<'a>(phi: &'a Formula, visit: &mut dyn FnMut(&'a Value)) {
    match phi {
        Formula::Eq(u, v) | Formula::Neq(u, v) => {
            visit(u);
            visit(v);
        }
        Formula::Not(b)
        | Formula::SomeName(_, b)
        | Formula::AllName(_, b)
        | Formula::Fresh(_, b) => visit_values(b, visit),
        Formula::Or(a, b) | Formula::And(a, b) => {
            visit_values(a, visit);
            visit_values(b, visit);
        }
        Formula::Diamond(l, b) | Formula::Box(l, b) => {
            l.args.iter().for_each(&mut *visit);
            visit_values(b, visit);
        }
        Formula::Call(_, args) => args.iter().for_each(visit),
        Formula::Fix(_, f) => {
            visit_values(&f.body, visit);
            f.args.iter().for_each(visit);
        }
    }
}

/// Free value variables.
pub fn free_value_vars(phi: &Formula) -> BTreeSet<String> {
    fn go(phi: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        let var = |v: &Value, bound: &Vec<String>, out: &mut BTreeSet<String>| {
            if let Value::Var(x) = v {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
        };
        match phi {
            Formula::Eq(u, v) | Formula::Neq(u, v) => {
                var(u, bound, out);
                var(v, bound, out);
            }
            Formula::Not(b) => go(b, bound, out),
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::SomeName(x, b) | Formula::AllName(x, b) | Formula::Fresh(x, b) => {
                bound.push(x.clone());
                go(b, bound, out);
                bound.pop();
            }
            Formula::Diamond(l, b) | Formula::Box(l, b) => {
                l.args.iter().for_each(|v| var(v, bound, out));
                go(b, bound, out);
            }
            Formula::Call(_, args) => args.iter().for_each(|v| var(v, bound, out)),
            Formula::Fix(_, f) => {
                let depth = bound.len();
                bound.extend(f.params.iter().cloned());
                go(&f.body, bound, out);
                bound.truncate(depth);
                f.args.iter().for_each(|v| var(v, bound, out));
            }
        }
    }
    let mut out = BTreeSet::new();
    go(phi, &mut Vec::new(), &mut out);
    out
}

/// Free recursion variables.
pub fn free_rec_vars(phi: &Formula) -> BTreeSet<String> {
    fn go(phi: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
        match phi {
            Formula::Eq(..) | Formula::Neq(..) => {}
            Formula::Not(b)
            | Formula::SomeName(_, b)
            | Formula::AllName(_, b)
            | Formula::Fresh(_, b)
            | Formula::Diamond(_, b)
            | Formula::Box(_, b) => go(b, bound, out),
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, bound, out);
                go(b, bound, out);
            }
            Formula::Call(x, _) => {
                if !bound.contains(x) {
                    out.insert(x.clone());
                }
            }
            Formula::Fix(_, f) => {
                bound.push(f.var.clone());
                go(&f.body, bound, out);
                bound.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(phi, &mut Vec::new(), &mut out);
    out
}

pub fn is_firm(phi: &Formula) -> bool {
    free_value_vars(phi).is_empty()
}

pub fn is_closed(phi: &Formula) -> bool {
    free_rec_vars(phi).is_empty()
}

/// Number of distinct free value variables.
pub fn zeta(phi: &Formula) -> u32 {
    free_value_vars(phi).len() as u32
}

pub fn require_firm(phi: &Formula) -> Result<(), LogicError> {
    let fv = free_value_vars(phi);
    if fv.is_empty() {
        Ok(())
    } else {
        Err(LogicError::NotFirm(fv.into_iter().collect()))
    }
}

pub fn require_closed(phi: &Formula) -> Result<(), LogicError> {
    let fv = free_rec_vars(phi);
    if fv.is_empty() {
        Ok(())
    } else {
        Err(LogicError::NotClosed(fv.into_iter().collect()))
    }
}

// ---------------------------------------------------------------------------
// Validation

/// Checks arity consistency of recursion variables and the requirement that
/// every bound recursion variable occurs under an even number of negations
/// from its binder.
pub fn validate(phi: &Formula) -> Result<(), LogicError> {
    fn go(
        phi: &Formula,
        rec: &mut Vec<(String, usize, u32)>, // (var, arity, negation parity at binder)
        free: &mut BTreeMap<String, usize>,
        nots: u32,
    ) -> Result<(), LogicError> {
        match phi {
            Formula::Eq(..) | Formula::Neq(..) => Ok(()),
            Formula::Not(b) => go(b, rec, free, nots + 1),
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, rec, free, nots)?;
                go(b, rec, free, nots)
            }
            Formula::SomeName(_, b) | Formula::AllName(_, b) | Formula::Fresh(_, b) => {
                go(b, rec, free, nots)
            }
            Formula::Diamond(_, b) | Formula::Box(_, b) => go(b, rec, free, nots),
            Formula::Call(x, args) => {
                if let Some((_, ar, binder_nots)) = rec.iter().rev().find(|(v, _, _)| v == x) {
                    if *ar != args.len() {
                        return Err(LogicError::Arity {
                            var: x.clone(),
                            expected: *ar,
                            found: args.len(),
                        });
                    }
                    if (nots - binder_nots) % 2 != 0 {
                        return Err(LogicError::OddNegation { var: x.clone() });
                    }
                } else {
                    let ar = free.entry(x.clone()).or_insert(args.len());
                    if *ar != args.len() {
                        return Err(LogicError::Arity {
                            var: x.clone(),
                            expected: *ar,
                            found: args.len(),
                        });
                    }
                }
                Ok(())
            }
            Formula::Fix(_, f) => {
                if f.args.len() != f.params.len() {
                    return Err(LogicError::Arity {
                        var: f.var.clone(),
                        expected: f.params.len(),
                        found: f.args.len(),
                    });
                }
                rec.push((f.var.clone(), f.params.len(), nots));
                let r = go(&f.body, rec, free, nots);
                rec.pop();
                r
            }
        }
    }
    go(phi, &mut Vec::new(), &mut BTreeMap::new(), 0)
}

// ---------------------------------------------------------------------------
// Binder normalization

/// Renames binders so that every bound recursion variable is globally
/// unique (and disjoint from the free ones), and no value binder on `x`
/// sits inside another binder on `x`. Renaming is deterministic: fresh
/// identifiers are numbered in traversal order.
pub fn normalize_binders(phi: &Formula) -> Formula {
    fn numbered(base: &str, used: &mut BTreeSet<String>) -> String {
        let mut k = 1u32;
        loop {
            let cand = format!("{base}{k}");
            if !used.contains(&cand) {
                used.insert(cand.clone());
                return cand;
            }
            k += 1;
        }
    }

    fn all_value_idents(phi: &Formula, out: &mut BTreeSet<String>) {
        visit_values(phi, &mut |v| {
            if let Value::Var(x) = v {
                out.insert(x.clone());
            }
        });
        match phi {
            Formula::SomeName(x, b) | Formula::AllName(x, b) | Formula::Fresh(x, b) => {
                out.insert(x.clone());
                all_value_idents(b, out);
            }
            Formula::Not(b) | Formula::Diamond(_, b) | Formula::Box(_, b) => {
                all_value_idents(b, out)
            }
            Formula::Or(a, b) | Formula::And(a, b) => {
                all_value_idents(a, out);
                all_value_idents(b, out);
            }
            Formula::Fix(_, f) => {
                out.extend(f.params.iter().cloned());
                all_value_idents(&f.body, out);
            }
            _ => {}
        }
    }

    struct St {
        rec_used: BTreeSet<String>,
        val_used: BTreeSet<String>,
    }

    fn ren_value(v: &Value, val_ren: &BTreeMap<String, String>) -> Value {
        match v {
            Value::Var(x) => match val_ren.get(x) {
                Some(y) => Value::Var(y.clone()),
                None => v.clone(),
            },
            Value::Name(_) => v.clone(),
        }
    }

    fn go(
        phi: &Formula,
        st: &mut St,
        rec_ren: &BTreeMap<String, String>,
        val_ren: &BTreeMap<String, String>,
        val_scope: &BTreeSet<String>,
    ) -> Formula {
        let rv = |v: &Value| ren_value(v, val_ren);
        match phi {
            Formula::Eq(u, v) => Formula::Eq(rv(u), rv(v)),
            Formula::Neq(u, v) => Formula::Neq(rv(u), rv(v)),
            Formula::Not(b) => Formula::Not(go(b, st, rec_ren, val_ren, val_scope).boxed()),
            Formula::Or(a, b) => Formula::Or(
                go(a, st, rec_ren, val_ren, val_scope).boxed(),
                go(b, st, rec_ren, val_ren, val_scope).boxed(),
            ),
            Formula::And(a, b) => Formula::And(
                go(a, st, rec_ren, val_ren, val_scope).boxed(),
                go(b, st, rec_ren, val_ren, val_scope).boxed(),
            ),
            Formula::SomeName(x, b) | Formula::AllName(x, b) | Formula::Fresh(x, b) => {
                let (target, mut ren2) = if val_scope.contains(x) {
                    let fresh = numbered(x, &mut st.val_used);
                    let mut r = val_ren.clone();
                    r.insert(x.clone(), fresh.clone());
                    (fresh, r)
                } else {
                    let mut r = val_ren.clone();
                    r.remove(x); // the binder shadows any outer renaming of x
                    (x.clone(), r)
                };
                // keep ren2 consistent when the binder keeps its name
                if &target == x {
                    ren2.remove(x);
                }
                let mut scope2 = val_scope.clone();
                scope2.insert(target.clone());
                scope2.insert(x.clone());
                let body = go(b, st, rec_ren, &ren2, &scope2);
                match phi {
                    Formula::SomeName(..) => Formula::SomeName(target, body.boxed()),
                    Formula::AllName(..) => Formula::AllName(target, body.boxed()),
                    _ => Formula::Fresh(target, body.boxed()),
                }
            }
            Formula::Diamond(l, b) => Formula::Diamond(
                Label {
                    tag: l.tag.clone(),
                    args: l.args.iter().map(rv).collect(),
                },
                go(b, st, rec_ren, val_ren, val_scope).boxed(),
            ),
            Formula::Box(l, b) => Formula::Box(
                Label {
                    tag: l.tag.clone(),
                    args: l.args.iter().map(rv).collect(),
                },
                go(b, st, rec_ren, val_ren, val_scope).boxed(),
            ),
            Formula::Call(x, args) => {
                let x2 = rec_ren.get(x).cloned().unwrap_or_else(|| x.clone());
                Formula::Call(x2, args.iter().map(rv).collect())
            }
            Formula::Fix(sigma, f) => {
                let target = if st.rec_used.contains(&f.var) {
                    numbered(&f.var, &mut st.rec_used)
                } else {
                    st.rec_used.insert(f.var.clone());
                    f.var.clone()
                };
                let mut rec2 = rec_ren.clone();
                rec2.insert(f.var.clone(), target.clone());

                // fixpoint params are value binders too
                let mut params2 = Vec::with_capacity(f.params.len());
                let mut ren2 = val_ren.clone();
                let mut scope2 = val_scope.clone();
                for p in &f.params {
                    let tp = if scope2.contains(p) {
                        let fresh = numbered(p, &mut st.val_used);
                        ren2.insert(p.clone(), fresh.clone());
                        fresh
                    } else {
                        ren2.remove(p);
                        p.clone()
                    };
                    scope2.insert(tp.clone());
                    scope2.insert(p.clone());
                    params2.push(tp);
                }
                let body = go(&f.body, st, &rec2, &ren2, &scope2);
                Formula::Fix(
                    *sigma,
                    Fix {
                        var: target,
                        params: params2,
                        body: body.boxed(),
                        args: f.args.iter().map(rv).collect(),
                    },
                )
            }
        }
    }

    let mut val_used = BTreeSet::new();
    all_value_idents(phi, &mut val_used);
    let mut rec_used = free_rec_vars(phi);
    // free variables must never be picked as fresh binder names
    let mut st = St {
        rec_used: std::mem::take(&mut rec_used),
        val_used,
    };
    go(
        phi,
        &mut st,
        &BTreeMap::new(),
        &BTreeMap::new(),
        &BTreeSet::new(),
    )
}

/// Returns the bound recursion variables, failing on duplicates.
pub fn bound_rec_vars(phi: &Formula) -> Result<Vec<String>, LogicError> {
    fn go(phi: &Formula, out: &mut Vec<String>) -> Result<(), LogicError> {
        match phi {
            Formula::Fix(_, f) => {
                if out.contains(&f.var) {
                    return Err(LogicError::DuplicateBinder(f.var.clone()));
                }
                out.push(f.var.clone());
                go(&f.body, out)
            }
            Formula::Not(b)
            | Formula::SomeName(_, b)
            | Formula::AllName(_, b)
            | Formula::Fresh(_, b)
            | Formula::Diamond(_, b)
            | Formula::Box(_, b) => go(b, out),
            Formula::Or(a, b) | Formula::And(a, b) => {
                go(a, out)?;
                go(b, out)
            }
            _ => Ok(()),
        }
    }
    let mut out = Vec::new();
    go(phi, &mut out)?;
    Ok(out)
}

/// Structural equality up to renaming of bound variables (both value and
/// recursion variables). Names are compared literally.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    fn val_eq(u: &Value, v: &Value, env: &[(String, String)]) -> bool {
        match (u, v) {
            (Value::Name(m), Value::Name(n)) => m == n,
            (Value::Var(x), Value::Var(y)) => {
                for (l, r) in env.iter().rev() {
                    if l == x || r == y {
                        return l == x && r == y;
                    }
                }
                x == y
            }
            _ => false,
        }
    }
    fn go(
        a: &Formula,
        b: &Formula,
        venv: &mut Vec<(String, String)>,
        renv: &mut Vec<(String, String)>,
    ) -> bool {
        use Formula::*;
        match (a, b) {
            (Eq(u1, v1), Eq(u2, v2)) | (Neq(u1, v1), Neq(u2, v2)) => {
                val_eq(u1, u2, venv) && val_eq(v1, v2, venv)
            }
            (Not(x), Not(y)) => go(x, y, venv, renv),
            (Or(x1, y1), Or(x2, y2)) | (And(x1, y1), And(x2, y2)) => {
                go(x1, x2, venv, renv) && go(y1, y2, venv, renv)
            }
            (SomeName(x, f), SomeName(y, g))
            | (AllName(x, f), AllName(y, g))
            | (Fresh(x, f), Fresh(y, g)) => {
                venv.push((x.clone(), y.clone()));
                let r = go(f, g, venv, renv);
                venv.pop();
                r
            }
            (Diamond(l1, f), Diamond(l2, g)) | (Box(l1, f), Box(l2, g)) => {
                l1.tag == l2.tag
                    && l1.args.len() == l2.args.len()
                    && l1
                        .args
                        .iter()
                        .zip(&l2.args)
                        .all(|(u, v)| val_eq(u, v, venv))
                    && go(f, g, venv, renv)
            }
            (Call(x, a1), Call(y, a2)) => {
                let matched = renv
                    .iter()
                    .rev()
                    .find(|(l, r)| l == x || r == y)
                    .map(|(l, r)| l == x && r == y)
                    .unwrap_or(x == y);
                matched
                    && a1.len() == a2.len()
                    && a1.iter().zip(a2).all(|(u, v)| val_eq(u, v, venv))
            }
            (Fix(s1, f1), Fix(s2, f2)) => {
                if s1 != s2
                    || f1.params.len() != f2.params.len()
                    || f1.args.len() != f2.args.len()
                    || !f1
                        .args
                        .iter()
                        .zip(&f2.args)
                        .all(|(u, v)| val_eq(u, v, venv))
                {
                    return false;
                }
                renv.push((f1.var.clone(), f2.var.clone()));
                for (p, q) in f1.params.iter().zip(&f2.params) {
                    venv.push((p.clone(), q.clone()));
                }
                let r = go(&f1.body, &f2.body, venv, renv);
                venv.truncate(venv.len() - f1.params.len());
                renv.pop();
                r
            }
            _ => false,
        }
    }
    go(a, b, &mut Vec::new(), &mut Vec::new())
}

// ---------------------------------------------------------------------------
// Substitution

/// A sequence of value-substitution blocks `{a⃗/x⃗}`.
///
/// Blocks normally bind disjoint variables, in which case the application
/// order is irrelevant. Game plays can pass the same binder twice, so
/// blocks are applied newest first: an occurrence freed by the latest
/// binder passage is resolved by the latest block, never by a stale one.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueSubst {
    blocks: Vec<BTreeMap<String, Name>>,
}

impl ValueSubst {
    pub fn empty() -> Self {
        ValueSubst::default()
    }

    pub fn block(pairs: Vec<(String, Name)>) -> Self {
        let mut s = ValueSubst::default();
        s.push_block(pairs);
        s
    }

    pub fn push_block(&mut self, pairs: Vec<(String, Name)>) {
        self.blocks.push(pairs.into_iter().collect());
    }

    pub fn blocks(&self) -> &[BTreeMap<String, Name>] {
        &self.blocks
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn subst_value_block(phi: &Formula, block: &BTreeMap<String, Name>) -> Formula {
    if block.is_empty() {
        return phi.clone();
    }
    let sv = |v: &Value| match v {
        Value::Var(x) => match block.get(x) {
            Some(&n) => Value::Name(n),
            None => v.clone(),
        },
        Value::Name(_) => v.clone(),
    };
    match phi {
        Formula::Eq(u, v) => Formula::Eq(sv(u), sv(v)),
        Formula::Neq(u, v) => Formula::Neq(sv(u), sv(v)),
        Formula::Not(b) => Formula::Not(subst_value_block(b, block).boxed()),
        Formula::Or(a, b) => Formula::Or(
            subst_value_block(a, block).boxed(),
            subst_value_block(b, block).boxed(),
        ),
        Formula::And(a, b) => Formula::And(
            subst_value_block(a, block).boxed(),
            subst_value_block(b, block).boxed(),
        ),
        Formula::SomeName(x, b) | Formula::AllName(x, b) | Formula::Fresh(x, b) => {
            let body = if block.contains_key(x) {
                let mut inner = block.clone();
                inner.remove(x);
                subst_value_block(b, &inner)
            } else {
                subst_value_block(b, block)
            };
            match phi {
                Formula::SomeName(..) => Formula::SomeName(x.clone(), body.boxed()),
                Formula::AllName(..) => Formula::AllName(x.clone(), body.boxed()),
                _ => Formula::Fresh(x.clone(), body.boxed()),
            }
        }
        Formula::Diamond(l, b) => Formula::Diamond(
            Label {
                tag: l.tag.clone(),
                args: l.args.iter().map(&sv).collect(),
            },
            subst_value_block(b, block).boxed(),
        ),
        Formula::Box(l, b) => Formula::Box(
            Label {
                tag: l.tag.clone(),
                args: l.args.iter().map(&sv).collect(),
            },
            subst_value_block(b, block).boxed(),
        ),
        Formula::Call(x, args) => Formula::Call(x.clone(), args.iter().map(&sv).collect()),
        Formula::Fix(sigma, f) => {
            let mut inner = block.clone();
            for p in &f.params {
                inner.remove(p);
            }
            Formula::Fix(
                *sigma,
                Fix {
                    var: f.var.clone(),
                    params: f.params.clone(),
                    body: subst_value_block(&f.body, &inner).boxed(),
                    args: f.args.iter().map(&sv).collect(),
                },
            )
        }
    }
}

/// Applies a value substitution, blocks newest first. Replacement targets
/// are names, so no capture can occur.
pub fn subst_values(phi: &Formula, gamma: &ValueSubst) -> Formula {
    gamma
        .blocks
        .iter()
        .rev()
        .fold(phi.clone(), |acc, b| subst_value_block(&acc, b))
}

/// The fixpoint abstraction stored in a recursion-substitution block:
/// `σX(x⃗).body` without its application arguments.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecBlock {
    pub sigma: Sigma,
    pub var: String,
    pub params: Vec<String>,
    pub body: Box<Formula>,
}

impl RecBlock {
    pub fn from_fix(sigma: Sigma, f: &Fix) -> RecBlock {
        RecBlock {
            sigma,
            var: f.var.clone(),
            params: f.params.clone(),
            body: f.body.clone(),
        }
    }

    /// The abstraction viewed as a formula with dummy arguments, for
    /// free-variable computations.
    fn as_formula(&self) -> Formula {
        Formula::Fix(
            self.sigma,
            Fix {
                var: self.var.clone(),
                params: self.params.clone(),
                body: self.body.clone(),
                args: self.params.iter().map(|p| Value::Var(p.clone())).collect(),
            },
        )
    }
}

/// A sequence of recursion-substitution blocks `{σX(x⃗).φ / X}`.
///
/// Blocks are applied newest first: the most recently pushed block is
/// substituted into the formula before the older ones, so recursion
/// variables that are free inside an inserted abstraction are resolved by
/// the blocks that were already present when it was recorded.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RecSubst {
    blocks: Vec<RecBlock>,
}

impl RecSubst {
    pub fn empty() -> Self {
        RecSubst::default()
    }

    pub fn push_block(&mut self, block: RecBlock) {
        self.blocks.push(block);
    }

    pub fn blocks(&self) -> &[RecBlock] {
        &self.blocks
    }

    pub fn lookup(&self, var: &str) -> Option<&RecBlock> {
        self.blocks.iter().rev().find(|b| b.var == var)
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

fn subst_rec_one(phi: &Formula, block: &RecBlock) -> Result<Formula, LogicError> {
    // Free variables of the abstraction, for capture detection.
    let abs_formula = block.as_formula();
    let abs_val_fv = free_value_vars(&abs_formula);
    let abs_rec_fv = free_rec_vars(&abs_formula);

    fn go(
        phi: &Formula,
        block: &RecBlock,
        abs_val_fv: &BTreeSet<String>,
        abs_rec_fv: &BTreeSet<String>,
    ) -> Result<Formula, LogicError> {
        // Does the target variable occur free below? Cheap enough at this scale.
        let relevant = |f: &Formula| free_rec_vars(f).contains(&block.var);
        match phi {
            Formula::Eq(..) | Formula::Neq(..) => Ok(phi.clone()),
            Formula::Not(b) => Ok(Formula::Not(go(b, block, abs_val_fv, abs_rec_fv)?.boxed())),
            Formula::Or(a, b) => Ok(Formula::Or(
                go(a, block, abs_val_fv, abs_rec_fv)?.boxed(),
                go(b, block, abs_val_fv, abs_rec_fv)?.boxed(),
            )),
            Formula::And(a, b) => Ok(Formula::And(
                go(a, block, abs_val_fv, abs_rec_fv)?.boxed(),
                go(b, block, abs_val_fv, abs_rec_fv)?.boxed(),
            )),
            Formula::SomeName(x, b) | Formula::AllName(x, b) | Formula::Fresh(x, b) => {
                if abs_val_fv.contains(x) && relevant(b) {
                    return Err(LogicError::Capture {
                        var: block.var.clone(),
                        captured: x.clone(),
                    });
                }
                let body = go(b, block, abs_val_fv, abs_rec_fv)?.boxed();
                Ok(match phi {
                    Formula::SomeName(..) => Formula::SomeName(x.clone(), body),
                    Formula::AllName(..) => Formula::AllName(x.clone(), body),
                    _ => Formula::Fresh(x.clone(), body),
                })
            }
            Formula::Diamond(l, b) => Ok(Formula::Diamond(
                l.clone(),
                go(b, block, abs_val_fv, abs_rec_fv)?.boxed(),
            )),
            Formula::Box(l, b) => Ok(Formula::Box(
                l.clone(),
                go(b, block, abs_val_fv, abs_rec_fv)?.boxed(),
            )),
            Formula::Call(x, args) => {
                if x == &block.var {
                    Ok(Formula::Fix(
                        block.sigma,
                        Fix {
                            var: block.var.clone(),
                            params: block.params.clone(),
                            body: block.body.clone(),
                            args: args.clone(),
                        },
                    ))
                } else {
                    Ok(phi.clone())
                }
            }
            Formula::Fix(sigma, f) => {
                if f.var == block.var {
                    // shadowed; arguments are values and contain no recursion variables
                    return Ok(phi.clone());
                }
                if abs_rec_fv.contains(&f.var) && relevant(&f.body) {
                    return Err(LogicError::Capture {
                        var: block.var.clone(),
                        captured: f.var.clone(),
                    });
                }
                for p in &f.params {
                    if abs_val_fv.contains(p) && relevant(&f.body) {
                        return Err(LogicError::Capture {
                            var: block.var.clone(),
                            captured: p.clone(),
                        });
                    }
                }
                Ok(Formula::Fix(
                    *sigma,
                    Fix {
                        var: f.var.clone(),
                        params: f.params.clone(),
                        body: go(&f.body, block, abs_val_fv, abs_rec_fv)?.boxed(),
                        args: f.args.clone(),
                    },
                ))
            }
        }
    }
    go(phi, block, &abs_val_fv, &abs_rec_fv)
}

/// Applies a recursion substitution, blocks newest first.
pub fn subst_rec(phi: &Formula, theta: &RecSubst) -> Result<Formula, LogicError> {
    let mut acc = phi.clone();
    for block in theta.blocks.iter().rev() {
        acc = subst_rec_one(&acc, block)?;
    }
    Ok(acc)
}

/// Unfolds an applied fixpoint: `(σX(x⃗).ψ)(a⃗)` becomes
/// `(ψ{σX(x⃗).ψ/X}){a⃗/x⃗}`. The arguments must be names.
pub fn unfold(phi: &Formula) -> Result<Formula, LogicError> {
    let (sigma, f) = match phi {
        Formula::Fix(sigma, f) => (*sigma, f),
        other => return Err(LogicError::NotFixpoint(other.head_name().to_string())),
    };
    let mut names = Vec::with_capacity(f.args.len());
    for a in &f.args {
        match a.as_name() {
            Some(n) => names.push(n),
            None => return Err(LogicError::NonNameArgument(format!("{a}"))),
        }
    }
    let block = RecBlock::from_fix(sigma, f);
    let body = subst_rec_one(&f.body, &block)?;
    let gamma = ValueSubst::block(f.params.iter().cloned().zip(names).collect());
    Ok(subst_values(&body, &gamma))
}

// ---------------------------------------------------------------------------
// Negation elimination

/// Wraps every free occurrence of `X(u⃗)` in a negation.
pub fn negate_rec_var(phi: &Formula, var: &str) -> Formula {
    match phi {
        Formula::Eq(..) | Formula::Neq(..) => phi.clone(),
        Formula::Not(b) => Formula::Not(negate_rec_var(b, var).boxed()),
        Formula::Or(a, b) => Formula::Or(
            negate_rec_var(a, var).boxed(),
            negate_rec_var(b, var).boxed(),
        ),
        Formula::And(a, b) => Formula::And(
            negate_rec_var(a, var).boxed(),
            negate_rec_var(b, var).boxed(),
        ),
        Formula::SomeName(x, b) => Formula::SomeName(x.clone(), negate_rec_var(b, var).boxed()),
        Formula::AllName(x, b) => Formula::AllName(x.clone(), negate_rec_var(b, var).boxed()),
        Formula::Fresh(x, b) => Formula::Fresh(x.clone(), negate_rec_var(b, var).boxed()),
        Formula::Diamond(l, b) => Formula::Diamond(l.clone(), negate_rec_var(b, var).boxed()),
        Formula::Box(l, b) => Formula::Box(l.clone(), negate_rec_var(b, var).boxed()),
        Formula::Call(x, _) if x == var => Formula::Not(phi.clone().boxed()),
        Formula::Call(..) => phi.clone(),
        Formula::Fix(sigma, f) => {
            if f.var == var {
                phi.clone()
            } else {
                Formula::Fix(
                    *sigma,
                    Fix {
                        var: f.var.clone(),
                        params: f.params.clone(),
                        body: negate_rec_var(&f.body, var).boxed(),
                        args: f.args.clone(),
                    },
                )
            }
        }
    }
}

/// `!φ`: pushes negation through all connectives, leaving no `Not` node.
///
/// The result is semantically equivalent and no larger than
/// `size(φ) - count_not(φ)`. Rejects formulas with free value variables.
pub fn negation_free(phi: &Formula) -> Result<Formula, LogicError> {
    require_firm(phi)?;

    fn nf(phi: &Formula) -> Result<Formula, LogicError> {
        match phi {
            Formula::Eq(..) | Formula::Neq(..) | Formula::Call(..) => Ok(phi.clone()),
            Formula::Not(b) => nf_not(b),
            Formula::Or(a, b) => Ok(Formula::Or(nf(a)?.boxed(), nf(b)?.boxed())),
            Formula::And(a, b) => Ok(Formula::And(nf(a)?.boxed(), nf(b)?.boxed())),
            Formula::SomeName(x, b) => Ok(Formula::SomeName(x.clone(), nf(b)?.boxed())),
            Formula::AllName(x, b) => Ok(Formula::AllName(x.clone(), nf(b)?.boxed())),
            Formula::Fresh(x, b) => Ok(Formula::Fresh(x.clone(), nf(b)?.boxed())),
            Formula::Diamond(l, b) => Ok(Formula::Diamond(l.clone(), nf(b)?.boxed())),
            Formula::Box(l, b) => Ok(Formula::Box(l.clone(), nf(b)?.boxed())),
            Formula::Fix(sigma, f) => Ok(Formula::Fix(
                *sigma,
                Fix {
                    var: f.var.clone(),
                    params: f.params.clone(),
                    body: nf(&f.body)?.boxed(),
                    args: f.args.clone(),
                },
            )),
        }
    }

    /// `!(¬φ)`, by duality.
    fn nf_not(phi: &Formula) -> Result<Formula, LogicError> {
        match phi {
            Formula::Eq(u, v) => Ok(Formula::Neq(u.clone(), v.clone())),
            Formula::Neq(u, v) => Ok(Formula::Eq(u.clone(), v.clone())),
            Formula::Not(b) => nf(b),
            Formula::Or(a, b) => Ok(Formula::And(nf_not(a)?.boxed(), nf_not(b)?.boxed())),
            Formula::And(a, b) => Ok(Formula::Or(nf_not(a)?.boxed(), nf_not(b)?.boxed())),
            Formula::SomeName(x, b) => Ok(Formula::AllName(x.clone(), nf_not(b)?.boxed())),
            Formula::AllName(x, b) => Ok(Formula::SomeName(x.clone(), nf_not(b)?.boxed())),
            Formula::Fresh(x, b) => Ok(Formula::Fresh(x.clone(), nf_not(b)?.boxed())),
            Formula::Diamond(l, b) => Ok(Formula::Box(l.clone(), nf_not(b)?.boxed())),
            Formula::Box(l, b) => Ok(Formula::Diamond(l.clone(), nf_not(b)?.boxed())),
            Formula::Fix(sigma, f) => Ok(Formula::Fix(
                sigma.dual(),
                Fix {
                    var: f.var.clone(),
                    params: f.params.clone(),
                    body: nf_not(&negate_rec_var(&f.body, &f.var))?.boxed(),
                    args: f.args.clone(),
                },
            )),
            // A bare negated recursion variable cannot occur in formulas
            // satisfying the even-negation condition.
            Formula::Call(x, _) => Err(LogicError::OddNegation { var: x.clone() }),
        }
    }

    nf(phi)
}

// ---------------------------------------------------------------------------
// Alternation depth and ranks

/// Alternation depths of the bound recursion variables of a normalized
/// formula, and the derived rank function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankTable {
    adepth: BTreeMap<String, u32>,
}

impl RankTable {
    /// Requires globally unique binders; use [`normalize_binders`] first.
    pub fn new(root: &Formula) -> Result<RankTable, LogicError> {
        let vars = bound_rec_vars(root)?;
        let idx: BTreeMap<&str, usize> = vars
            .iter()
            .enumerate()
            .map(|(i, v)| (v.as_str(), i))
            .collect();
        let n = vars.len();
        let mut sigma = vec![Sigma::Mu; n];
        let mut base = vec![vec![false; n]; n]; // base[x][y]: X free in body of Y's binder

        fn scan(
            phi: &Formula,
            idx: &BTreeMap<&str, usize>,
            sigma: &mut Vec<Sigma>,
            base: &mut Vec<Vec<bool>>,
        ) {
            match phi {
                Formula::Fix(s, f) => {
                    let y = idx[f.var.as_str()];
                    sigma[y] = *s;
                    // occurrences free in the body: not under a binder for
                    // the same variable inside the body
                    fn frees(
                        phi: &Formula,
                        shadow: &mut Vec<String>,
                        idx: &BTreeMap<&str, usize>,
                        out: &mut BTreeSet<usize>,
                    ) {
                        match phi {
                            Formula::Call(x, _) => {
                                if !shadow.contains(x) {
                                    if let Some(&i) = idx.get(x.as_str()) {
                                        out.insert(i);
                                    }
                                }
                            }
                            Formula::Fix(_, g) => {
                                shadow.push(g.var.clone());
                                frees(&g.body, shadow, idx, out);
                                shadow.pop();
                            }
                            Formula::Not(b)
                            | Formula::SomeName(_, b)
                            | Formula::AllName(_, b)
                            | Formula::Fresh(_, b)
                            | Formula::Diamond(_, b)
                            | Formula::Box(_, b) => frees(b, shadow, idx, out),
                            Formula::Or(a, b) | Formula::And(a, b) => {
                                frees(a, shadow, idx, out);
                                frees(b, shadow, idx, out);
                            }
                            _ => {}
                        }
                    }
                    let mut occ = BTreeSet::new();
                    frees(&f.body, &mut vec![f.var.clone()], idx, &mut occ);
                    for x in occ {
                        base[x][y] = true;
                    }
                    scan(&f.body, idx, sigma, base);
                }
                Formula::Not(b)
                | Formula::SomeName(_, b)
                | Formula::AllName(_, b)
                | Formula::Fresh(_, b)
                | Formula::Diamond(_, b)
                | Formula::Box(_, b) => scan(b, idx, sigma, base),
                Formula::Or(a, b) | Formula::And(a, b) => {
                    scan(a, idx, sigma, base);
                    scan(b, idx, sigma, base);
                }
                _ => {}
            }
        }
        scan(root, &idx, &mut sigma, &mut base);

        // transitive closure of the dependency relation
        let mut reach = base;
        for k in 0..n {
            for i in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }

        // longest alternating chain starting at each variable
        let mut memo: Vec<Option<u32>> = vec![None; n];
        fn depth(
            x: usize,
            reach: &Vec<Vec<bool>>,
            sigma: &Vec<Sigma>,
            memo: &mut Vec<Option<u32>>,
        ) -> u32 {
            if let Some(d) = memo[x] {
                return d;
            }
            let mut best = 1;
            for y in 0..reach.len() {
                if y != x && reach[x][y] && sigma[y] != sigma[x] {
                    best = best.max(1 + depth(y, reach, sigma, memo));
                }
            }
            memo[x] = Some(best);
            best
        }
        let mut adepth = BTreeMap::new();
        for (i, v) in vars.iter().enumerate() {
            adepth.insert(v.clone(), depth(i, &reach, &sigma, &mut memo));
        }
        Ok(RankTable { adepth })
    }

    pub fn adepth_of(&self, var: &str) -> Option<u32> {
        self.adepth.get(var).copied()
    }

    /// Maximum alternation depth, zero when there are no fixpoints.
    pub fn alternation_depth(&self) -> u32 {
        self.adepth.values().copied().max().unwrap_or(0)
    }

    /// Position rank: `2⌊adepth(X)/2⌋` for an applied `νX`, one more for an
    /// applied `µX`, zero for every other formula.
    pub fn rank(&self, phi: &Formula) -> u32 {
        match phi {
            Formula::Fix(Sigma::Nu, f) => {
                let d = self.adepth_of(&f.var).unwrap_or(0);
                2 * (d / 2)
            }
            Formula::Fix(Sigma::Mu, f) => {
                let d = self.adepth_of(&f.var).unwrap_or(0);
                2 * (d / 2) + 1
            }
            _ => 0,
        }
    }
}

pub fn alternation_depth(phi: &Formula) -> Result<u32, LogicError> {
    Ok(RankTable::new(phi)?.alternation_depth())
}

pub fn adepth_of(phi: &Formula, var: &str) -> Result<u32, LogicError> {
    Ok(RankTable::new(phi)?.adepth_of(var).unwrap_or(0))
}

// ---------------------------------------------------------------------------
// Nominal structure

impl Nominal for Value {
    fn permute(&self, p: &Permutation) -> Self {
        match self {
            Value::Name(n) => Value::Name(p.apply(*n)),
            Value::Var(_) => self.clone(),
        }
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        if let Value::Name(n) = self {
            visit(*n);
        }
    }
}

impl Nominal for Label {
    fn permute(&self, p: &Permutation) -> Self {
        Label {
            tag: self.tag.clone(),
            args: self.args.permute(p),
        }
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        self.args.visit_names(visit);
    }
}

impl Nominal for Formula {
    fn permute(&self, p: &Permutation) -> Self {
        match self {
            Formula::Eq(u, v) => Formula::Eq(u.permute(p), v.permute(p)),
            Formula::Neq(u, v) => Formula::Neq(u.permute(p), v.permute(p)),
            Formula::Not(b) => Formula::Not(b.permute(p).boxed()),
            Formula::Or(a, b) => Formula::Or(a.permute(p).boxed(), b.permute(p).boxed()),
            Formula::And(a, b) => Formula::And(a.permute(p).boxed(), b.permute(p).boxed()),
            Formula::SomeName(x, b) => Formula::SomeName(x.clone(), b.permute(p).boxed()),
            Formula::AllName(x, b) => Formula::AllName(x.clone(), b.permute(p).boxed()),
            Formula::Fresh(x, b) => Formula::Fresh(x.clone(), b.permute(p).boxed()),
            Formula::Diamond(l, b) => Formula::Diamond(l.permute(p), b.permute(p).boxed()),
            Formula::Box(l, b) => Formula::Box(l.permute(p), b.permute(p).boxed()),
            Formula::Call(x, args) => Formula::Call(x.clone(), args.permute(p)),
            Formula::Fix(sigma, f) => Formula::Fix(
                *sigma,
                Fix {
                    var: f.var.clone(),
                    params: f.params.clone(),
                    body: f.body.permute(p).boxed(),
                    args: f.args.permute(p),
                },
            ),
        }
    }

    /// Left-to-right depth-first traversal.
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        match self {
            Formula::Eq(u, v) | Formula::Neq(u, v) => {
                u.visit_names(visit);
                v.visit_names(visit);
            }
            Formula::Not(b)
            | Formula::SomeName(_, b)
            | Formula::AllName(_, b)
            | Formula::Fresh(_, b) => b.visit_names(visit),
            Formula::Or(a, b) | Formula::And(a, b) => {
                a.visit_names(visit);
                b.visit_names(visit);
            }
            Formula::Diamond(l, b) | Formula::Box(l, b) => {
                l.visit_names(visit);
                b.visit_names(visit);
            }
            Formula::Call(_, args) => args.visit_names(visit),
            Formula::Fix(_, f) => {
                f.body.visit_names(visit);
                f.args.visit_names(visit);
            }
        }
    }
}

impl Nominal for ValueSubst {
    fn permute(&self, p: &Permutation) -> Self {
        ValueSubst {
            blocks: self
                .blocks
                .iter()
                .map(|b| b.iter().map(|(x, &n)| (x.clone(), p.apply(n))).collect())
                .collect(),
        }
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        for b in &self.blocks {
            for &n in b.values() {
                visit(n);
            }
        }
    }
}

impl Nominal for RecSubst {
    fn permute(&self, p: &Permutation) -> Self {
        RecSubst {
            blocks: self
                .blocks
                .iter()
                .map(|b| RecBlock {
                    sigma: b.sigma,
                    var: b.var.clone(),
                    params: b.params.clone(),
                    body: b.body.permute(p).boxed(),
                })
                .collect(),
        }
    }
    fn visit_names(&self, visit: &mut dyn FnMut(Name)) {
        for b in &self.blocks {
            b.body.visit_names(visit);
        }
    }
}

// ---------------------------------------------------------------------------
// Printing (grammar-compatible; see the frontend parser)

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Name(n) => write!(f, "{n}"),
            Value::Var(x) => write!(f, "{x}"),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.tag)?;
        for (i, a) in self.args.iter().enumerate() {
            write!(f, "{}{}", if i == 0 { ":" } else { "," }, a)?;
        }
        Ok(())
    }
}

// Precedence levels: 0 = or, 1 = and, 2 = unary. Binders extend maximally
// to the right, so they print bare only in rightmost position (at or
// precedence); everywhere else they are parenthesized.
fn fmt_prec(phi: &Formula, min: u8, rightmost: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let paren = |needed: bool,
                 f: &mut fmt::Formatter<'_>,
                 inner: &dyn Fn(&mut fmt::Formatter<'_>, bool) -> fmt::Result| {
        if needed {
            write!(f, "(")?;
            inner(f, true)?;
            write!(f, ")")
        } else {
            inner(f, rightmost)
        }
    };
    match phi {
        Formula::Eq(u, v) => write!(f, "{u} = {v}"),
        Formula::Neq(u, v) => write!(f, "{u} != {v}"),
        Formula::Or(a, b) => paren(min > 0, f, &|f, rm| {
            fmt_prec(a, 0, false, f)?;
            write!(f, " | ")?;
            fmt_prec(b, 1, rm, f)
        }),
        Formula::And(a, b) => paren(min > 1, f, &|f, rm| {
            fmt_prec(a, 1, false, f)?;
            write!(f, " & ")?;
            fmt_prec(b, 2, rm, f)
        }),
        Formula::Not(b) => {
            write!(f, "!")?;
            fmt_prec(b, 2, rightmost, f)
        }
        Formula::Diamond(l, b) => {
            write!(f, "<{l}> ")?;
            fmt_prec(b, 2, rightmost, f)
        }
        Formula::Box(l, b) => {
            write!(f, "[{l}] ")?;
            fmt_prec(b, 2, rightmost, f)
        }
        Formula::SomeName(x, b) => paren(!rightmost, f, &|f, _| {
            write!(f, "some {x}. ")?;
            fmt_prec(b, 0, true, f)
        }),
        Formula::AllName(x, b) => paren(!rightmost, f, &|f, _| {
            write!(f, "all {x}. ")?;
            fmt_prec(b, 0, true, f)
        }),
        Formula::Fresh(x, b) => paren(!rightmost, f, &|f, _| {
            write!(f, "fresh {x}. ")?;
            fmt_prec(b, 0, true, f)
        }),
        Formula::Call(x, args) => {
            write!(f, "{x}")?;
            if !args.is_empty() {
                write!(f, "(")?;
                for (i, a) in args.iter().enumerate() {
                    write!(f, "{}{}", if i == 0 { "" } else { "," }, a)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }
        Formula::Fix(sigma, fx) => paren(!rightmost, f, &|f, _| {
            write!(
                f,
                "{} {}",
                if *sigma == Sigma::Mu { "mu" } else { "nu" },
                fx.var
            )?;
            if !fx.params.is_empty() {
                write!(f, "(")?;
                for (i, p) in fx.params.iter().enumerate() {
                    write!(f, "{}{}", if i == 0 { "" } else { "," }, p)?;
                }
                write!(f, ")")?;
            }
            write!(f, ". ")?;
            fmt_prec(&fx.body, 0, true, f)?;
            if !fx.args.is_empty() {
                write!(f, " (")?;
                for (i, a) in fx.args.iter().enumerate() {
                    write!(f, "{}{}", if i == 0 { "" } else { "," }, a)?;
                }
                write!(f, ")")?;
            }
            Ok(())
        }),
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_prec(self, 0, true, f)
    }
}

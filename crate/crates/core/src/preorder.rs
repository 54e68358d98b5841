//! The normalisation pre-order `≤` on types and its coercion witnesses.
//!
//! `≤` is the minimal pre-order with `s ≤ omega`, the lattice projection and
//! injection laws for `&`/`|`, their glb/lub rules, `a ≤ s -> a` for atoms,
//! `omega ≤ s -> omega`, and arrow contra/co-variance. The decision procedure
//! is syntax-directed (transitivity is not a rule; its admissibility is
//! validated against [`leq_closure_oracle`], the literal least-fixpoint
//! reading, over bounded universes).
//!
//! Whenever `leq(s, t)` holds there is a finite hereditary identity typable
//! at `s -> t`; [`leq_witness`] builds it by recursion on the decision trace.

use std::cell::RefCell;
use std::collections::{HashMap, HashSet};

use crate::lambda::{beta_normalize, LambdaTerm, PermTree};
use crate::types::{canonicalize, TypeExpr};

/// Decision trace mirroring the cases of the syntax-directed algorithm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LeqTrace {
    /// `t = omega`
    Top,
    /// `s == t`, both the same atom
    ReflAtom,
    /// `t = t1 & t2`, premises for both conjuncts
    AndRight(Box<LeqTrace>, Box<LeqTrace>),
    /// `s = s1 | s2`, premises for both disjuncts
    OrLeft(Box<LeqTrace>, Box<LeqTrace>),
    /// `s = s1 & s2`, proved through one projection (true = left)
    AndProj(bool, Box<LeqTrace>),
    /// `t = t1 | t2`, proved through one injection (true = left)
    OrInj(bool, Box<LeqTrace>),
    /// `s` atomic or omega, `t = t1 -> t2`, premise for `s ≤ t2`
    AtomArrow(Box<LeqTrace>),
    /// both arrows: contravariant premise, covariant premise
    Arrow(Box<LeqTrace>, Box<LeqTrace>),
}

fn decide(s: &TypeExpr, t: &TypeExpr, memo: &mut HashMap<(String, String), bool>) -> bool {
    // 1. top
    if *t == TypeExpr::Omega {
        return true;
    }
    let key = (
        canonicalize(s).sort_key(),
        canonicalize(t).sort_key(),
    );
    if let Some(&r) = memo.get(&key) {
        return r;
    }
    let r = decide_uncached(s, t, memo);
    memo.insert(key, r);
    r
}

fn decide_uncached(
    s: &TypeExpr,
    t: &TypeExpr,
    memo: &mut HashMap<(String, String), bool>,
) -> bool {
    // 2. intersections on the right are invertible
    if let TypeExpr::And(t1, t2) = t {
        return decide(s, t1, memo) && decide(s, t2, memo);
    }
    // 3. unions on the left are invertible
    if let TypeExpr::Or(s1, s2) = s {
        return decide(s1, t, memo) && decide(s2, t, memo);
    }
    // 4. branching: projections of s, injections into t
    if let TypeExpr::And(s1, s2) = s {
        if decide(s1, t, memo) || decide(s2, t, memo) {
            return true;
        }
    }
    if let TypeExpr::Or(t1, t2) = t {
        if decide(s, t1, memo) || decide(s, t2, memo) {
            return true;
        }
    }
    // 5. structural
    match (s, t) {
        (TypeExpr::Atom(a), TypeExpr::Atom(b)) => a == b,
        (TypeExpr::Atom(_) | TypeExpr::Omega, TypeExpr::Arrow(_, t2)) => decide(s, t2, memo),
        (TypeExpr::Arrow(s1, s2), TypeExpr::Arrow(t1, t2)) => {
            decide(t1, s1, memo) && decide(s2, t2, memo)
        }
        _ => false,
    }
}

thread_local! {
    static LEQ_MEMO: RefCell<HashMap<(String, String), bool>> = RefCell::new(HashMap::new());
}

/// Decide `s ≤ t`. Memoized (per thread) on the AC-canonical forms of both
/// sides; AC-invariance of `≤` is a tested property.
pub fn leq(s: &TypeExpr, t: &TypeExpr) -> bool {
    LEQ_MEMO.with(|m| decide(s, t, &mut m.borrow_mut()))
}

/// Decide `s ≤ t` and return the decision trace of the successful run.
/// Traces follow the exact binary structure of `s` and `t`, so they are
/// computed without the AC-keyed cache.
pub fn leq_trace(s: &TypeExpr, t: &TypeExpr) -> Option<LeqTrace> {
    if !leq(s, t) {
        return None;
    }
    let tr = trace_rec(s, t);
    debug_assert!(tr.is_some(), "leq and leq_trace disagree on {s} ≤ {t}");
    tr
}

fn trace_rec(s: &TypeExpr, t: &TypeExpr) -> Option<LeqTrace> {
    if *t == TypeExpr::Omega {
        return Some(LeqTrace::Top);
    }
    if !leq(s, t) {
        return None;
    }
    if let TypeExpr::And(t1, t2) = t {
        return Some(LeqTrace::AndRight(
            Box::new(trace_rec(s, t1)?),
            Box::new(trace_rec(s, t2)?),
        ));
    }
    if let TypeExpr::Or(s1, s2) = s {
        return Some(LeqTrace::OrLeft(
            Box::new(trace_rec(s1, t)?),
            Box::new(trace_rec(s2, t)?),
        ));
    }
    if let TypeExpr::And(s1, s2) = s {
        if let Some(tr) = trace_rec(s1, t) {
            return Some(LeqTrace::AndProj(true, Box::new(tr)));
        }
        if let Some(tr) = trace_rec(s2, t) {
            return Some(LeqTrace::AndProj(false, Box::new(tr)));
        }
    }
    if let TypeExpr::Or(t1, t2) = t {
        if let Some(tr) = trace_rec(s, t1) {
            return Some(LeqTrace::OrInj(true, Box::new(tr)));
        }
        if let Some(tr) = trace_rec(s, t2) {
            return Some(LeqTrace::OrInj(false, Box::new(tr)));
        }
    }
    match (s, t) {
        (TypeExpr::Atom(a), TypeExpr::Atom(b)) if a == b => Some(LeqTrace::ReflAtom),
        (TypeExpr::Atom(_) | TypeExpr::Omega, TypeExpr::Arrow(_, t2)) => {
            Some(LeqTrace::AtomArrow(Box::new(trace_rec(s, t2)?)))
        }
        (TypeExpr::Arrow(s1, s2), TypeExpr::Arrow(t1, t2)) => Some(LeqTrace::Arrow(
            Box::new(trace_rec(t1, s1)?),
            Box::new(trace_rec(s2, t2)?),
        )),
        _ => None,
    }
}

/// Least common η-expansion of two hereditary identities: pointwise maximum
/// arity, joined recursively. Each input η-reduces back out of the join, so
/// the join is typable wherever either input is.
pub fn fhi_join(a: &PermTree, b: &PermTree) -> PermTree {
    debug_assert!(a.is_fhi() && b.is_fhi());
    let n = a.arity().max(b.arity());
    let id = PermTree::identity();
    let children = (0..n)
        .map(|i| {
            let ca = a.children.get(i).unwrap_or(&id);
            let cb = b.children.get(i).unwrap_or(&id);
            fhi_join(ca, cb)
        })
        .collect();
    PermTree {
        perm: (0..n).collect(),
        children,
    }
}

/// Witness tree for a decision trace. All permutations are identities.
pub fn witness_tree(tr: &LeqTrace) -> PermTree {
    match tr {
        LeqTrace::Top | LeqTrace::ReflAtom => PermTree::identity(),
        LeqTrace::AndRight(a, b) | LeqTrace::OrLeft(a, b) => {
            fhi_join(&witness_tree(a), &witness_tree(b))
        }
        LeqTrace::AndProj(_, tr) | LeqTrace::OrInj(_, tr) => witness_tree(tr),
        LeqTrace::AtomArrow(tail) => {
            let tail = witness_tree(tail);
            prepend_child(PermTree::identity(), tail)
        }
        LeqTrace::Arrow(contra, cov) => {
            let contra = witness_tree(contra);
            let cov = witness_tree(cov);
            prepend_child(contra, cov)
        }
    }
}

/// β-normal form of `\x y. rest(x (first y))`: a hereditary identity whose
/// first child is `first` and whose remaining children are `rest`'s.
fn prepend_child(first: PermTree, rest: PermTree) -> PermTree {
    let mut children = vec![first];
    children.extend(rest.children);
    let n = children.len();
    PermTree {
        perm: (0..n).collect(),
        children,
    }
}

/// Witness tree for `s ≤ t`, when it holds.
pub fn leq_witness_tree(s: &TypeExpr, t: &TypeExpr) -> Option<PermTree> {
    leq_trace(s, t).map(|tr| witness_tree(&tr))
}

/// The β-normal hereditary identity typable at `s -> t`, when `s ≤ t`.
pub fn leq_witness(s: &TypeExpr, t: &TypeExpr) -> Option<LambdaTerm> {
    leq_witness_tree(s, t).map(|w| {
        beta_normalize(&w.to_term()).expect("hereditary identities are linear")
    })
}

// ---------------------------------------------------------------------------
// Least-fixpoint oracle
// ---------------------------------------------------------------------------

/// Literal least-fixpoint reading of the pre-order over a finite universe:
/// the least set of pairs closed under all rules whose premises and
/// conclusions stay inside the universe. Test oracle only — quadratic space,
/// cubic time.
pub fn leq_closure_oracle(universe: &[TypeExpr]) -> HashSet<(usize, usize)> {
    let n = universe.len();
    let index: HashMap<&TypeExpr, usize> = universe.iter().zip(0..).collect();
    let idx = |t: &TypeExpr| index.get(t).copied();

    let mut rel = vec![vec![false; n]; n];
    // base cases
    for (i, u) in universe.iter().enumerate() {
        rel[i][i] = true;
        if let Some(o) = idx(&TypeExpr::Omega) {
            rel[i][o] = true;
        }
        match u {
            TypeExpr::And(l, r) => {
                if let Some(j) = idx(l) {
                    rel[i][j] = true;
                }
                if let Some(j) = idx(r) {
                    rel[i][j] = true;
                }
            }
            TypeExpr::Or(l, r) => {
                if let Some(j) = idx(l) {
                    rel[j][i] = true;
                }
                if let Some(j) = idx(r) {
                    rel[j][i] = true;
                }
            }
            TypeExpr::Arrow(_, tail) => match &**tail {
                TypeExpr::Atom(_) | TypeExpr::Omega => {
                    if let Some(j) = idx(tail) {
                        rel[j][i] = true;
                    }
                }
                _ => {}
            },
            _ => {}
        }
    }

    let ands: Vec<(usize, usize, usize)> = universe
        .iter()
        .enumerate()
        .filter_map(|(i, u)| match u {
            TypeExpr::And(l, r) => Some((i, idx(l)?, idx(r)?)),
            _ => None,
        })
        .collect();
    let ors: Vec<(usize, usize, usize)> = universe
        .iter()
        .enumerate()
        .filter_map(|(i, u)| match u {
            TypeExpr::Or(l, r) => Some((i, idx(l)?, idx(r)?)),
            _ => None,
        })
        .collect();
    let arrows: Vec<(usize, usize, usize)> = universe
        .iter()
        .enumerate()
        .filter_map(|(i, u)| match u {
            TypeExpr::Arrow(l, r) => Some((i, idx(l)?, idx(r)?)),
            _ => None,
        })
        .collect();

    let mut changed = true;
    while changed {
        changed = false;
        // transitivity
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] && !rel[i][j] {
                            rel[i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        // glb: s ≤ l, s ≤ r  ⟹  s ≤ l & r
        for &(u, l, r) in &ands {
            for s in 0..n {
                if rel[s][l] && rel[s][r] && !rel[s][u] {
                    rel[s][u] = true;
                    changed = true;
                }
            }
        }
        // lub: l ≤ t, r ≤ t  ⟹  l | r ≤ t
        for &(u, l, r) in &ors {
            for t in 0..n {
                if rel[l][t] && rel[r][t] && !rel[u][t] {
                    rel[u][t] = true;
                    changed = true;
                }
            }
        }
        // arrow contra/co-variance
        for &(u1, a1, b1) in &arrows {
            for &(u2, a2, b2) in &arrows {
                if rel[a2][a1] && rel[b1][b2] && !rel[u1][u2] {
                    rel[u1][u2] = true;
                    changed = true;
                }
            }
        }
    }

    let mut out = HashSet::new();
    for (i, row) in rel.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v {
                out.insert((i, j));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{recognize_fhp, verify_inverse_pair};
    use crate::types::parse_type;

    fn p(s: &str) -> TypeExpr {
        parse_type(s).unwrap()
    }

    #[test]
    fn basic_pairs() {
        assert!(leq(&p("a"), &p("omega")));
        assert!(leq(&p("a -> b"), &p("omega")));
        assert!(leq(&p("a"), &p("s -> a")));
        assert!(leq(&p("p2"), &p("p1 -> p2")));
        assert!(!leq(&p("omega"), &p("a")));
        assert!(leq(&p("a & b"), &p("a")));
        assert!(leq(&p("a & b"), &p("b")));
        assert!(leq(&p("a"), &p("a | b")));
        assert!(leq(&p("omega"), &p("s -> omega")));
        assert!(leq(&p("omega"), &p("s -> t -> omega")));
        assert!(!leq(&p("a -> b"), &p("b -> a")));
    }

    #[test]
    fn nested_atom_expansion_uses_transitivity_freely() {
        // a ≤ s1 -> s2 -> a needs a transitive chain in the inductive reading
        assert!(leq(&p("a"), &p("s1 -> s2 -> a")));
        assert!(leq(&p("a & b"), &p("s -> a")));
        assert!(leq(&p("a"), &p("s -> (a | r)")));
    }

    #[test]
    fn arrows_are_contravariant() {
        assert!(leq(&p("(a | b) -> c"), &p("a -> c")));
        assert!(!leq(&p("a -> c"), &p("(a | b) -> c")));
        assert!(leq(&p("a -> c & d"), &p("a -> c")));
    }

    #[test]
    fn no_bcd_distributivity() {
        // (a -> b) & (a -> c) ≤ a -> b & c is absent from this pre-order
        assert!(!leq(&p("(a -> b) & (a -> c)"), &p("a -> b & c")));
        // the converse direction holds by projection-free arrow rules
        assert!(leq(&p("a -> b & c"), &p("a -> b")));
    }

    #[test]
    fn leq_is_ac_invariant_on_samples() {
        let pairs = [
            ("a & b", "b & a"),
            ("(a & b) & c", "a & (b & c)"),
            ("a | (b | c)", "(c | b) | a"),
        ];
        for (x, y) in pairs {
            assert!(leq(&p(x), &p(y)));
            assert!(leq(&p(y), &p(x)));
        }
    }

    #[test]
    fn oracle_tiny_universes() {
        let u = vec![p("p"), p("omega")];
        let rel = leq_closure_oracle(&u);
        assert!(rel.contains(&(0, 0)));
        assert!(rel.contains(&(1, 1)));
        assert!(rel.contains(&(0, 1)));
        assert!(!rel.contains(&(1, 0)));

        let u = vec![p("p"), p("omega"), p("omega -> p")];
        let rel = leq_closure_oracle(&u);
        assert!(rel.contains(&(0, 2)), "p ≤ omega -> p");

        let u = vec![p("p & q"), p("p"), p("q"), p("omega")];
        let rel = leq_closure_oracle(&u);
        assert!(rel.contains(&(0, 1)));
        assert!(rel.contains(&(0, 2)));
    }

    #[test]
    fn witnesses_are_hereditary_identities() {
        let cases = [
            ("p", "p"),
            ("p", "s -> p"),
            ("p & q", "p"),
            ("p", "s1 -> s2 -> p"),
            ("a -> p", "(a & b) -> p"),
            ("p & q", "(s -> p) & (s -> q)"),
            ("p | q", "omega"),
            ("omega", "s -> omega"),
            ("a | b", "(s -> a) | b"),
        ];
        for (s, t) in cases {
            let (s, t) = (p(s), p(t));
            assert!(leq(&s, &t), "{s} ≤ {t}");
            let w = leq_witness(&s, &t).unwrap();
            let tree = recognize_fhp(&w).unwrap();
            assert!(tree.is_fhi(), "witness for {s} ≤ {t} must be an fhi: {w}");
            assert!(verify_inverse_pair(&w, &LambdaTerm::identity()));
        }
        assert!(leq_witness(&p("omega"), &p("p")).is_none());
    }

    #[test]
    fn witness_examples_from_atom_rule() {
        let w = leq_witness(&p("p"), &p("s -> p")).unwrap();
        assert!(crate::lambda::alpha_eq(
            &w,
            &crate::lambda::parse_term("\\x y. x y").unwrap()
        ));
        let w = leq_witness(&p("p & q"), &p("p")).unwrap();
        assert!(crate::lambda::alpha_eq(&w, &LambdaTerm::identity()));
    }

    #[test]
    fn join_is_a_common_eta_expansion() {
        let a = witness_tree(&leq_trace(&p("p"), &p("s -> p")).unwrap());
        let b = PermTree::identity();
        let j = fhi_join(&a, &b);
        assert_eq!(j, a);
        assert!(j.is_fhi());
    }
}

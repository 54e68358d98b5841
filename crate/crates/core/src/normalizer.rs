//! The isomorphism-preserving rewrite system on types.
//!
//! Inner rules rewrite in any context; the top distribution rule applies only
//! at positions reachable from the root through intersections, which is what
//! makes the system terminate while still reaching the conjunctive normal
//! form (top-level intersections of unions, arrow left-hand sides free of
//! unions, arrow right-hand sides free of intersections).
//!
//! Matching of the erasure rules is modulo commutativity and associativity of
//! the node being rewritten: one component of a flattened `&`/`|` node is
//! erased when the rest of the node sits below/above it in the pre-order.
//!
//! Every step carries a pair of hereditary-identity witnesses; the
//! certificate composes them into an inverse coercion pair between the input
//! and its normal form.

use crate::lambda::{compose_unchecked, LambdaTerm, PermTree};
use crate::preorder::{leq, leq_witness_tree};
use crate::types::{canonicalize, CanonicalType, CtxStep, TypeContext, TypeExpr};

/// Tags for the nine rewrite rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RewriteRule {
    /// `omega -> a  ↝  a` for atoms `a`
    PhiRule,
    /// `s ↝ omega` when `omega ≤ s` and `s ≠ omega`
    OmegaRule,
    /// `s -> t & r  ↝  (s -> t) & (s -> r)`
    AndArrowRule,
    /// `(s | t) & r -> z  ↝  (s & r) | (t & r) -> z`
    ArrowAndRule,
    /// `s | t -> r  ↝  (s -> r) & (t -> r)`
    OrArrowRule,
    /// `s -> (t & r) | z  ↝  s -> (t | z) & (r | z)`
    ArrowOrRule,
    /// `s & t ↝ s` when `s ≤ t` (modulo AC of the node)
    LeqAndRule,
    /// `s | t ↝ t` when `s ≤ t` (modulo AC of the node)
    LeqOrRule,
    /// `(s & t) | r  ⟹  (s | r) & (t | r)`, only under `&`-paths from the root
    TopDistRule,
}

impl RewriteRule {
    pub fn label(&self) -> &'static str {
        match self {
            RewriteRule::PhiRule => "phi",
            RewriteRule::OmegaRule => "omega",
            RewriteRule::AndArrowRule => "and-arrow",
            RewriteRule::ArrowAndRule => "arrow-and",
            RewriteRule::OrArrowRule => "or-arrow",
            RewriteRule::ArrowOrRule => "arrow-or",
            RewriteRule::LeqAndRule => "leq-and",
            RewriteRule::LeqOrRule => "leq-or",
            RewriteRule::TopDistRule => "top-dist",
        }
    }
}

/// One rewrite: `before ↝ after` at `position` inside the whole type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RewriteStep {
    pub rule: RewriteRule,
    pub position: TypeContext,
    pub before: TypeExpr,
    pub after: TypeExpr,
}

impl RewriteStep {
    pub fn render(&self) -> String {
        format!(
            "{} @ {} : {} ==> {}",
            self.rule.label(),
            self.position.render(),
            self.before,
            self.after
        )
    }
}

/// Steps plus the composed inverse witnesses between the original type and
/// its normal form.
#[derive(Debug, Clone)]
pub struct NormCertificate {
    pub steps: Vec<RewriteStep>,
    pub witness_fwd: LambdaTerm,
    pub witness_bwd: LambdaTerm,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("rewrite step budget exceeded (nontermination bug)")]
    BudgetExceeded,
    #[error("termination measure failed to decrease at step: {0}")]
    MeasureViolation(String),
    #[error("internal witness composition failed: {0}")]
    WitnessFailure(String),
}

// ---------------------------------------------------------------------------
// Connective flattening helpers
// ---------------------------------------------------------------------------

fn flatten<'a>(t: &'a TypeExpr, want_and: bool, out: &mut Vec<&'a TypeExpr>) {
    match t {
        TypeExpr::And(l, r) if want_and => {
            flatten(l, true, out);
            flatten(r, true, out);
        }
        TypeExpr::Or(l, r) if !want_and => {
            flatten(l, false, out);
            flatten(r, false, out);
        }
        other => out.push(other),
    }
}

fn components(t: &TypeExpr, want_and: bool) -> Vec<&TypeExpr> {
    let mut out = Vec::new();
    flatten(t, want_and, &mut out);
    out
}

fn refold(comps: &[&TypeExpr], want_and: bool) -> TypeExpr {
    let mut iter = comps.iter().rev();
    let mut acc = (*iter.next().expect("refold of empty component list")).clone();
    for c in iter {
        acc = if want_and {
            TypeExpr::and((*c).clone(), acc)
        } else {
            TypeExpr::or((*c).clone(), acc)
        };
    }
    acc
}

// ---------------------------------------------------------------------------
// Redex search
// ---------------------------------------------------------------------------

/// All applicable (rule, position) pairs of the whole type, in a fixed
/// deterministic order.
pub fn find_redexes(t: &TypeExpr) -> Vec<RewriteStep> {
    let mut out = Vec::new();
    scan(t, &TypeContext::root(), true, &mut out);
    out
}

fn scan(t: &TypeExpr, pos: &TypeContext, and_path: bool, out: &mut Vec<RewriteStep>) {
    node_redexes(t, pos, and_path, out);
    match t {
        TypeExpr::Atom(_) | TypeExpr::Omega => {}
        TypeExpr::Arrow(l, r) => {
            scan(l, &pos.push(CtxStep::ArrowLeft), false, out);
            scan(r, &pos.push(CtxStep::ArrowRight), false, out);
        }
        TypeExpr::And(l, r) => {
            scan(l, &pos.push(CtxStep::AndLeft), and_path, out);
            scan(r, &pos.push(CtxStep::AndRight), and_path, out);
        }
        TypeExpr::Or(l, r) => {
            scan(l, &pos.push(CtxStep::OrLeft), false, out);
            scan(r, &pos.push(CtxStep::OrRight), false, out);
        }
    }
}

fn node_redexes(t: &TypeExpr, pos: &TypeContext, and_path: bool, out: &mut Vec<RewriteStep>) {
    let mut push = |rule: RewriteRule, after: TypeExpr| {
        out.push(RewriteStep {
            rule,
            position: pos.clone(),
            before: t.clone(),
            after,
        })
    };

    if let TypeExpr::Arrow(l, r) = t {
        if **l == TypeExpr::Omega && matches!(**r, TypeExpr::Atom(_)) {
            push(RewriteRule::PhiRule, (**r).clone());
        }
    }

    if *t != TypeExpr::Omega && leq(&TypeExpr::Omega, t) {
        push(RewriteRule::OmegaRule, TypeExpr::Omega);
    }

    match t {
        TypeExpr::Arrow(l, r) => {
            if let TypeExpr::And(rl, rr) = &**r {
                push(
                    RewriteRule::AndArrowRule,
                    TypeExpr::and(
                        TypeExpr::arrow((**l).clone(), (**rl).clone()),
                        TypeExpr::arrow((**l).clone(), (**rr).clone()),
                    ),
                );
            }
            if let TypeExpr::Or(ll, lr) = &**l {
                push(
                    RewriteRule::OrArrowRule,
                    TypeExpr::and(
                        TypeExpr::arrow((**ll).clone(), (**r).clone()),
                        TypeExpr::arrow((**lr).clone(), (**r).clone()),
                    ),
                );
            }
            if matches!(**l, TypeExpr::And(..)) {
                if let Some(after_l) = distribute(l, true) {
                    push(
                        RewriteRule::ArrowAndRule,
                        TypeExpr::arrow(after_l, (**r).clone()),
                    );
                }
            }
            if matches!(**r, TypeExpr::Or(..)) {
                if let Some(after_r) = distribute(r, false) {
                    push(
                        RewriteRule::ArrowOrRule,
                        TypeExpr::arrow((**l).clone(), after_r),
                    );
                }
            }
        }
        TypeExpr::And(..) => {
            for (j, after) in erasures(t, true) {
                let _ = j;
                push(RewriteRule::LeqAndRule, after);
            }
        }
        TypeExpr::Or(..) => {
            for (j, after) in erasures(t, false) {
                let _ = j;
                push(RewriteRule::LeqOrRule, after);
            }
            if and_path {
                if let Some(after) = distribute(t, false) {
                    push(RewriteRule::TopDistRule, after);
                }
            }
        }
        _ => {}
    }
}

/// Distribute the first nested opposite connective out of a flattened node:
/// for an `&` node (`want_and`), find the first `|` component `s | t` and
/// produce `(s & rest) | (t & rest)`; dually for a `|` node.
fn distribute(t: &TypeExpr, want_and: bool) -> Option<TypeExpr> {
    let comps = components(t, want_and);
    let (idx, inner) = comps.iter().enumerate().find_map(|(i, c)| match c {
        TypeExpr::Or(l, r) if want_and => Some((i, (&**l, &**r))),
        TypeExpr::And(l, r) if !want_and => Some((i, (&**l, &**r))),
        _ => None,
    })?;
    let rest: Vec<&TypeExpr> = comps
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != idx)
        .map(|(_, c)| *c)
        .collect();
    let rest = refold(&rest, want_and);
    let (a, b) = inner;
    let mk_in = |x: &TypeExpr| {
        if want_and {
            TypeExpr::and(x.clone(), rest.clone())
        } else {
            TypeExpr::or(x.clone(), rest.clone())
        }
    };
    Some(if want_and {
        TypeExpr::or(mk_in(a), mk_in(b))
    } else {
        TypeExpr::and(mk_in(a), mk_in(b))
    })
}

/// Erasable components of a flattened `&`/`|` node. For `&`: component `c`
/// is erased when `rest ≤ c`; for `|`: when `c ≤ rest`.
fn erasures(t: &TypeExpr, is_and: bool) -> Vec<(usize, TypeExpr)> {
    let comps = components(t, is_and);
    if comps.len() < 2 {
        return Vec::new();
    }
    let mut out = Vec::new();
    for j in 0..comps.len() {
        let rest: Vec<&TypeExpr> = comps
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != j)
            .map(|(_, c)| *c)
            .collect();
        let kept = refold(&rest, is_and);
        let ok = if is_and {
            leq(&kept, comps[j])
        } else {
            leq(comps[j], &kept)
        };
        if ok {
            out.push((j, kept));
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Termination measure: recursive path ordering with position-dependent
// precedence (`| ≻ &` at top and right of arrows, `& ≻ |` at left of arrows)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pol {
    Pos,
    Neg,
}

fn head_prec(t: &TypeExpr, pol: Pol) -> u8 {
    match t {
        TypeExpr::Arrow(..) => 5,
        TypeExpr::And(..) => {
            if pol == Pol::Neg {
                4
            } else {
                3
            }
        }
        TypeExpr::Or(..) => {
            if pol == Pol::Neg {
                3
            } else {
                4
            }
        }
        TypeExpr::Atom(_) => 1,
        TypeExpr::Omega => 0,
    }
}

fn child_args(t: &TypeExpr, pol: Pol) -> Vec<(&TypeExpr, Pol)> {
    match t {
        TypeExpr::Atom(_) | TypeExpr::Omega => Vec::new(),
        TypeExpr::Arrow(l, r) => vec![(&**l, Pol::Neg), (&**r, Pol::Pos)],
        TypeExpr::And(..) => components(t, true).into_iter().map(|c| (c, pol)).collect(),
        TypeExpr::Or(..) => components(t, false).into_iter().map(|c| (c, pol)).collect(),
    }
}

fn rpo_ge(s: &TypeExpr, t: &TypeExpr, pol: Pol) -> bool {
    s == t || rpo_gt(s, t, pol)
}

/// Strict recursive-path-ordering comparison at a given hole polarity.
pub fn rpo_gt(s: &TypeExpr, t: &TypeExpr, pol: Pol) -> bool {
    // subterm case
    for (si, _) in child_args(s, pol) {
        if rpo_ge(si, t, pol) {
            return true;
        }
    }
    let ps = head_prec(s, pol);
    let pt = head_prec(t, pol);
    let dominates_args = || {
        child_args(t, pol)
            .into_iter()
            .all(|(tj, pj)| rpo_gt(s, tj, pj))
    };
    if ps > pt {
        return dominates_args();
    }
    if ps < pt {
        return false;
    }
    // equal heads: atoms compare by name only (handled by the s == t shortcut
    // in rpo_ge; distinct atoms are incomparable)
    match (s, t) {
        (TypeExpr::Atom(_), TypeExpr::Atom(_)) => false,
        (TypeExpr::Omega, TypeExpr::Omega) => false,
        (TypeExpr::Arrow(l1, r1), TypeExpr::Arrow(l2, r2)) => {
            let lex = if l1 == l2 {
                rpo_gt(r1, r2, Pol::Pos)
            } else {
                rpo_gt(l1, l2, Pol::Neg)
            };
            lex && dominates_args()
        }
        (TypeExpr::And(..), TypeExpr::And(..)) | (TypeExpr::Or(..), TypeExpr::Or(..)) => {
            let ss: Vec<&TypeExpr> = child_args(s, pol).into_iter().map(|(c, _)| c).collect();
            let ts: Vec<&TypeExpr> = child_args(t, pol).into_iter().map(|(c, _)| c).collect();
            multiset_gt(&ss, &ts, pol) && dominates_args()
        }
        _ => false,
    }
}

fn multiset_gt(ss: &[&TypeExpr], ts: &[&TypeExpr], pol: Pol) -> bool {
    let mut ts_left: Vec<&TypeExpr> = ts.to_vec();
    let mut ss_left: Vec<&TypeExpr> = Vec::new();
    'outer: for s in ss {
        for i in 0..ts_left.len() {
            if ts_left[i] == *s {
                ts_left.remove(i);
                continue 'outer;
            }
        }
        ss_left.push(s);
    }
    if ts_left.is_empty() {
        return !ss_left.is_empty();
    }
    !ss_left.is_empty()
        && ts_left
            .iter()
            .all(|t| ss_left.iter().any(|s| rpo_gt(s, t, pol)))
}

// ---------------------------------------------------------------------------
// Step witnesses
// ---------------------------------------------------------------------------

/// `\x y. x y` as a permutator tree.
fn eta_id() -> PermTree {
    PermTree::new(vec![0], vec![PermTree::identity()])
}

/// Local inverse witness pair (fwd: before -> after, bwd: after -> before)
/// for a step, before context lifting.
fn step_witness_trees(step: &RewriteStep) -> (PermTree, PermTree) {
    let id = PermTree::identity();
    match step.rule {
        RewriteRule::PhiRule | RewriteRule::TopDistRule => (id.clone(), id),
        RewriteRule::AndArrowRule
        | RewriteRule::ArrowAndRule
        | RewriteRule::OrArrowRule
        | RewriteRule::ArrowOrRule => (eta_id(), eta_id()),
        RewriteRule::OmegaRule => {
            let bwd = leq_witness_tree(&TypeExpr::Omega, &step.before)
                .expect("omega rule fired without omega ≤ before");
            (id, bwd)
        }
        RewriteRule::LeqAndRule => {
            // before = kept & erased (modulo AC), after = kept, kept ≤ erased
            let erased = erased_component(step, true);
            let bwd = leq_witness_tree(&step.after, &erased)
                .expect("leq-and rule fired without kept ≤ erased");
            (id, bwd)
        }
        RewriteRule::LeqOrRule => {
            let erased = erased_component(step, false);
            let fwd = leq_witness_tree(&erased, &step.after)
                .expect("leq-or rule fired without erased ≤ kept");
            (fwd, id)
        }
    }
}

/// Recover the erased component of an erasure step: the multiset difference
/// between the flattened before and after nodes.
fn erased_component(step: &RewriteStep, is_and: bool) -> TypeExpr {
    let before = components(&step.before, is_and);
    let mut after: Vec<&TypeExpr> = components(&step.after, is_and);
    let mut erased = Vec::new();
    'outer: for b in before {
        for i in 0..after.len() {
            if after[i] == b {
                after.remove(i);
                continue 'outer;
            }
        }
        erased.push(b);
    }
    assert_eq!(erased.len(), 1, "erasure steps remove exactly one component");
    erased[0].clone()
}

/// Lift a local witness pair through one context step. Intersection and
/// union contexts leave witnesses unchanged; arrow contexts wrap them.
fn lift_pair(pair: (PermTree, PermTree), step: CtxStep) -> (PermTree, PermTree) {
    let (f, b) = pair;
    match step {
        CtxStep::AndLeft | CtxStep::AndRight | CtxStep::OrLeft | CtxStep::OrRight => (f, b),
        // hole -> r : `\x y. x (Id y)` with the *backward* witness inside
        CtxStep::ArrowLeft => (
            PermTree::new(vec![0], vec![b.clone()]),
            PermTree::new(vec![0], vec![f]),
        ),
        // r -> hole : `\x y. Id (x y)`
        CtxStep::ArrowRight => (prepend_identity(f), prepend_identity(b)),
    }
}

fn prepend_identity(t: PermTree) -> PermTree {
    let mut children = vec![PermTree::identity()];
    children.extend(t.children);
    let n = children.len();
    PermTree {
        perm: (0..n).collect(),
        children,
    }
}

fn lifted_step_witnesses(step: &RewriteStep) -> (LambdaTerm, LambdaTerm) {
    let mut pair = step_witness_trees(step);
    for ctx in step.position.path.iter().rev() {
        pair = lift_pair(pair, *ctx);
    }
    (pair.0.to_term(), pair.1.to_term())
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

fn step_budget(t: &TypeExpr) -> u64 {
    1u64.checked_shl(t.size().min(24) as u32).unwrap_or(u64::MAX)
}

fn pick_innermost_leftmost(redexes: &[RewriteStep]) -> usize {
    let key = |s: &RewriteStep| {
        let depth = s.position.path.len();
        let path: Vec<u8> = s
            .position
            .path
            .iter()
            .map(|c| match c {
                CtxStep::ArrowLeft | CtxStep::AndLeft | CtxStep::OrLeft => 0u8,
                _ => 1u8,
            })
            .collect();
        (usize::MAX - depth, path)
    };
    redexes
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| key(a).cmp(&key(b)).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("pick from non-empty redex list")
}

/// Normalize with the deterministic innermost-leftmost strategy, producing
/// the AC-canonical normal form and a step certificate whose witnesses form
/// an inverse pair between `t` and its normal form.
pub fn normalize(t: &TypeExpr) -> Result<(CanonicalType, NormCertificate), NormalizeError> {
    normalize_impl(t, &mut pick_innermost_leftmost)
}

/// Normalize under an arbitrary redex-selection strategy; used to sample
/// confluence. Returns only the canonical normal form.
pub fn normalize_with_picker(
    t: &TypeExpr,
    picker: &mut dyn FnMut(&[RewriteStep]) -> usize,
) -> Result<CanonicalType, NormalizeError> {
    let mut pick = |r: &[RewriteStep]| picker(r).min(r.len() - 1);
    normalize_impl(t, &mut pick).map(|(nf, _)| nf)
}

fn normalize_impl(
    t: &TypeExpr,
    picker: &mut dyn FnMut(&[RewriteStep]) -> usize,
) -> Result<(CanonicalType, NormCertificate), NormalizeError> {
    let mut cur = t.clone();
    let mut budget = step_budget(t);
    let mut steps: Vec<RewriteStep> = Vec::new();
    let mut fwd = LambdaTerm::identity();
    let mut bwd = LambdaTerm::identity();

    loop {
        let redexes = find_redexes(&cur);
        if redexes.is_empty() {
            break;
        }
        let step = redexes[picker(&redexes)].clone();
        let next = step.position.plug(&cur, step.after.clone());
        if !rpo_gt(&cur, &next, Pol::Pos) {
            return Err(NormalizeError::MeasureViolation(step.render()));
        }
        let (sf, sb) = lifted_step_witnesses(&step);
        fwd = compose_unchecked(&sf, &fwd)
            .map_err(|e| NormalizeError::WitnessFailure(e.to_string()))?;
        bwd = compose_unchecked(&bwd, &sb)
            .map_err(|e| NormalizeError::WitnessFailure(e.to_string()))?;
        steps.push(step);
        cur = next;
        if budget == 0 {
            return Err(NormalizeError::BudgetExceeded);
        }
        budget -= 1;
    }

    Ok((
        canonicalize(&cur),
        NormCertificate {
            steps,
            witness_fwd: fwd,
            witness_bwd: bwd,
        },
    ))
}

/// No rule applies anywhere in `t`.
pub fn is_normal(t: &TypeExpr) -> bool {
    find_redexes(t).is_empty()
}

/// Equality of normal forms, modulo AC.
pub fn nf_equal(s: &TypeExpr, t: &TypeExpr) -> Result<bool, NormalizeError> {
    Ok(normalize(s)?.0 == normalize(t)?.0)
}

/// The inverse hereditary-identity pair between `t` and its normal form.
pub fn iso_to_nf(t: &TypeExpr) -> Result<(LambdaTerm, LambdaTerm), NormalizeError> {
    let (_, cert) = normalize(t)?;
    Ok((cert.witness_fwd, cert.witness_bwd))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{alpha_eq, recognize_fhp, verify_inverse_pair};
    use crate::types::parse_type;

    fn p(s: &str) -> TypeExpr {
        parse_type(s).unwrap()
    }

    fn nf(s: &str) -> CanonicalType {
        normalize(&p(s)).unwrap().0
    }

    fn c(s: &str) -> CanonicalType {
        canonicalize(&p(s))
    }

    #[test]
    fn redex_examples() {
        let r = find_redexes(&p("omega -> a"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule, RewriteRule::PhiRule);

        let r = find_redexes(&p("s -> omega"));
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].rule, RewriteRule::OmegaRule);

        assert!(find_redexes(&p("a")).is_empty());
        assert!(find_redexes(&p("omega")).is_empty());
    }

    #[test]
    fn erasure_matches_modulo_commutativity() {
        // (p1 -> p2) & p2 rewrites to p2 because p2 ≤ p1 -> p2
        let r = find_redexes(&p("(p1 -> p2) & p2"));
        assert!(r
            .iter()
            .any(|s| s.rule == RewriteRule::LeqAndRule && s.after == p("p2")));
    }

    #[test]
    fn worked_examples() {
        assert_eq!(nf("((p1 -> p2) & p2) | p3"), c("p2 | p3"));
        assert_eq!(nf("((p1 -> p2) | p2) & p3"), c("(p1 -> p2) & p3"));
        assert_eq!(nf("s -> t & r"), c("(s -> t) & (s -> r)"));
        assert_eq!(nf("omega -> p -> p"), c("omega -> p -> p"));
        assert_eq!(nf("omega -> p"), c("p"));
        assert_eq!(nf("(s | t) -> r"), c("(s -> r) & (t -> r)"));
    }

    #[test]
    fn normal_forms_are_ac_canonical() {
        assert_eq!(nf("a & b"), nf("b & a"));
        assert_eq!(nf("p"), nf("omega -> p"));
        assert_ne!(nf("p1 -> p2"), nf("p2 -> p1"));
    }

    #[test]
    fn idempotence_with_empty_certificate() {
        let (n1, _) = normalize(&p("((p1 -> p2) & p2) | p3")).unwrap();
        let (n2, cert2) = normalize(&n1.to_type_expr()).unwrap();
        assert_eq!(n1, n2);
        assert!(cert2.steps.is_empty());
        assert!(alpha_eq(&cert2.witness_fwd, &LambdaTerm::identity()));
    }

    #[test]
    fn certificates_verify() {
        for s in [
            "((p1 -> p2) & p2) | p3",
            "s -> t & r",
            "(s | t) -> r",
            "omega -> p",
            "p -> omega",
            "((a | b) & c) -> d",
            "a -> ((b & c) | d)",
            "(a & b) | c",
            "(omega -> p) & (q -> omega)",
        ] {
            let t = p(s);
            let (_, cert) = normalize(&t).unwrap();
            assert!(
                verify_inverse_pair(&cert.witness_fwd, &cert.witness_bwd),
                "certificate witnesses for {s} must be inverse"
            );
            let tree = recognize_fhp(&cert.witness_fwd).unwrap();
            assert!(tree.is_fhi(), "forward witness for {s} must be an fhi");
        }
    }

    #[test]
    fn example_identity_witness_through_or_context() {
        // only the erasure fires, lifted through a union context
        let (_, cert) = normalize(&p("((p1 -> p2) & p2) | p3")).unwrap();
        assert!(alpha_eq(&cert.witness_fwd, &LambdaTerm::identity()));
    }

    #[test]
    fn example_eta_witness_for_distribution() {
        let (_, cert) = normalize(&p("s -> t & r")).unwrap();
        let eta = crate::lambda::parse_term("\\x y. x y").unwrap();
        assert!(alpha_eq(&cert.witness_fwd, &eta));
        assert!(alpha_eq(&cert.witness_bwd, &eta));
    }

    #[test]
    fn rpo_decreases_on_rule_shapes() {
        let cases = [
            ("omega -> a", "a"),
            ("s -> omega", "omega"),
            ("s -> t & r", "(s -> t) & (s -> r)"),
            ("(s | t) & r -> z", "((s & r) | (t & r)) -> z"),
            ("(s | t) -> r", "(s -> r) & (t -> r)"),
            ("s -> (t & r) | z", "s -> (t | z) & (r | z)"),
            ("(a & b) | r", "(a | r) & (b | r)"),
        ];
        for (before, after) in cases {
            assert!(
                rpo_gt(&p(before), &p(after), Pol::Pos),
                "{before} must RPO-dominate {after}"
            );
            assert!(!rpo_gt(&p(after), &p(before), Pol::Pos));
        }
    }

    #[test]
    fn deep_types_normalize_within_budget() {
        let t = p("((a | b) & (c | d)) -> ((e & f) | (g & h))");
        let (n, cert) = normalize(&t).unwrap();
        assert!(!cert.steps.is_empty());
        assert!(is_normal(&n.to_type_expr()));
    }

    #[test]
    fn nf_equal_examples() {
        assert!(nf_equal(&p("p"), &p("omega -> p")).unwrap());
        assert!(nf_equal(&p("s & t"), &p("t & s")).unwrap());
        assert!(!nf_equal(&p("p1 -> p2"), &p("p2 -> p1")).unwrap());
    }

    #[test]
    fn trace_format_is_stable() {
        let (_, cert) = normalize(&p("(omega -> p) | q")).unwrap();
        assert_eq!(cert.steps.len(), 1);
        assert_eq!(cert.steps[0].render(), "phi @ or-left : omega -> p ==> p");
    }
}

//! Similarity of normal types: the relation that licenses coercion synthesis.
//!
//! Similarity relates whole *sequences* of normal-type pairs. A sequence is
//! similar when it can be decomposed by three moves: identical sequences are
//! similar; an entry that is an intersection (or union) on both sides may be
//! split into two block entries; and when every entry is atomic or an arrow,
//! all entries may be decomposed through a shared argument arity and a single
//! shared permutation of argument columns. The shared permutation is the
//! whole point: isomorphism by argument swapping must act uniformly across
//! every member of an intersection or union.
//!
//! The split move here only considers splits whose re-merged form is already
//! normal (no erasure fires across the split); splits that would need
//! erasure are pruned and counted, making the procedure sound but possibly
//! incomplete with respect to the generative definition.

use std::collections::HashMap;
use std::fmt;

use crate::normalizer::is_normal;
use crate::types::{CanonicalType, TypeExpr};

/// Classification of a type against the normal-form grammar:
/// atoms/omega/arrows (α), intersections of those (ξ), unions of those (μ),
/// and top-level normal types (η, intersections of unions).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormalClass {
    AtomOrArrow,
    InterOfAA,
    UnionOfAA,
    NormalType,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("type is not in normal form: {0}")]
pub struct NotNormalError(pub String);

fn is_alpha(c: &CanonicalType) -> bool {
    match c {
        CanonicalType::Atom(_) | CanonicalType::Omega => true,
        CanonicalType::Arrow(l, r) => is_xi(l) && is_mu(r),
        _ => false,
    }
}

fn is_xi(c: &CanonicalType) -> bool {
    match c {
        CanonicalType::And(cs) => cs.iter().all(is_alpha),
        other => is_alpha(other),
    }
}

fn is_mu(c: &CanonicalType) -> bool {
    match c {
        CanonicalType::Or(cs) => cs.iter().all(is_alpha),
        other => is_alpha(other),
    }
}

fn is_eta(c: &CanonicalType) -> bool {
    match c {
        CanonicalType::And(cs) => cs.iter().all(is_mu),
        other => is_mu(other),
    }
}

/// Classify a normal form. Fails when the shape does not match the grammar
/// or when some rewrite rule still applies (the input was not normal).
pub fn classify(c: &CanonicalType) -> Result<NormalClass, NotNormalError> {
    let t = c.to_type_expr();
    if !is_normal(&t) {
        return Err(NotNormalError(t.to_string()));
    }
    if is_alpha(c) {
        Ok(NormalClass::AtomOrArrow)
    } else if is_xi(c) {
        Ok(NormalClass::InterOfAA)
    } else if is_mu(c) {
        Ok(NormalClass::UnionOfAA)
    } else if is_eta(c) {
        Ok(NormalClass::NormalType)
    } else {
        Err(NotNormalError(t.to_string()))
    }
}

/// Length of the explicit arrow spine.
pub fn spine_len(c: &CanonicalType) -> usize {
    match c {
        CanonicalType::Arrow(_, r) => 1 + spine_len(r),
        _ => 0,
    }
}

/// Decompose a normal type as `nf(a_1 -> .. -> a_n -> tail)`: read the
/// explicit spine and, when it is shorter than `n`, pad with trailing
/// `omega` arguments — legal exactly when the remaining tail is atomic,
/// because only then is the padding invisible to normalization.
pub fn arrow_view(a: &CanonicalType, n: usize) -> Option<(Vec<CanonicalType>, CanonicalType)> {
    let mut args = Vec::with_capacity(n);
    let mut cur = a.clone();
    while args.len() < n {
        match cur {
            CanonicalType::Arrow(l, r) => {
                args.push(*l);
                cur = *r;
            }
            _ => break,
        }
    }
    if args.len() < n {
        if !matches!(cur, CanonicalType::Atom(_) | CanonicalType::Omega) {
            return None;
        }
        while args.len() < n {
            args.push(CanonicalType::Omega);
        }
    }
    Some((args, cur))
}

/// Derivation tree for similarity of a pair sequence.
///
/// In `ArrowPerm`, `perm[p] = i` means argument position `p` of every
/// right-hand entry carries column `i` of the left-hand entries; `columns[i]`
/// relates column `i` of the left side to the matching right-hand column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SimilarityDerivation {
    Refl {
        pairs: Vec<(CanonicalType, CanonicalType)>,
    },
    MergeAnd {
        pairs: Vec<(CanonicalType, CanonicalType)>,
        index: usize,
        premise: Box<SimilarityDerivation>,
    },
    MergeOr {
        pairs: Vec<(CanonicalType, CanonicalType)>,
        index: usize,
        premise: Box<SimilarityDerivation>,
    },
    ArrowPerm {
        pairs: Vec<(CanonicalType, CanonicalType)>,
        arity: usize,
        perm: Vec<usize>,
        columns: Vec<SimilarityDerivation>,
        tail: Box<SimilarityDerivation>,
    },
}

impl SimilarityDerivation {
    pub fn pairs(&self) -> &[(CanonicalType, CanonicalType)] {
        match self {
            SimilarityDerivation::Refl { pairs }
            | SimilarityDerivation::MergeAnd { pairs, .. }
            | SimilarityDerivation::MergeOr { pairs, .. }
            | SimilarityDerivation::ArrowPerm { pairs, .. } => pairs,
        }
    }

    /// True when no node uses a non-identity permutation.
    pub fn identity_perms_only(&self) -> bool {
        match self {
            SimilarityDerivation::Refl { .. } => true,
            SimilarityDerivation::MergeAnd { premise, .. }
            | SimilarityDerivation::MergeOr { premise, .. } => premise.identity_perms_only(),
            SimilarityDerivation::ArrowPerm {
                perm,
                columns,
                tail,
                ..
            } => {
                perm.iter().enumerate().all(|(p, &i)| p == i)
                    && columns.iter().all(|c| c.identity_perms_only())
                    && tail.identity_perms_only()
            }
        }
    }

    /// Indented one-node-per-line trace.
    pub fn render(&self) -> String {
        fn go(d: &SimilarityDerivation, depth: usize, out: &mut String) {
            let pad = "  ".repeat(depth);
            match d {
                SimilarityDerivation::Refl { pairs } => {
                    out.push_str(&format!("{pad}refl ({} pairs)\n", pairs.len()));
                }
                SimilarityDerivation::MergeAnd { index, premise, .. } => {
                    out.push_str(&format!("{pad}merge-and at {index}\n"));
                    go(premise, depth + 1, out);
                }
                SimilarityDerivation::MergeOr { index, premise, .. } => {
                    out.push_str(&format!("{pad}merge-or at {index}\n"));
                    go(premise, depth + 1, out);
                }
                SimilarityDerivation::ArrowPerm {
                    arity,
                    perm,
                    columns,
                    tail,
                    ..
                } => {
                    let image: Vec<String> =
                        perm.iter().map(|i| (i + 1).to_string()).collect();
                    out.push_str(&format!(
                        "{pad}arrow-perm n={arity} pi=[{}]\n",
                        image.join(" ")
                    ));
                    for c in columns {
                        go(c, depth + 1, out);
                    }
                    go(tail, depth + 1, out);
                }
            }
        }
        let mut s = String::new();
        go(self, 0, &mut s);
        s
    }
}

impl fmt::Display for SimilarityDerivation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

/// Result of a similarity query: the derivation when one exists, plus how
/// many splits were pruned because the re-merged entry would not be normal.
#[derive(Debug, Clone)]
pub struct SimilarOutcome {
    pub derivation: Option<SimilarityDerivation>,
    pub pruned_splits: usize,
}

/// Decide similarity of two normal types. `strong_only` restricts the arrow
/// move to identity permutations, so a positive answer witnesses strong
/// isomorphism.
pub fn similar(
    h: &CanonicalType,
    k: &CanonicalType,
    strong_only: bool,
) -> Result<SimilarOutcome, NotNormalError> {
    classify(h)?;
    classify(k)?;
    let mut search = Search {
        memo: HashMap::new(),
        pruned: 0,
        strong: strong_only,
    };
    let derivation = search.solve(&[(h.clone(), k.clone())]);
    Ok(SimilarOutcome {
        derivation,
        pruned_splits: search.pruned,
    })
}

type Seq = Vec<(CanonicalType, CanonicalType)>;

struct Search {
    memo: HashMap<String, Option<SimilarityDerivation>>,
    pruned: usize,
    strong: bool,
}

fn seq_key(seq: &[(CanonicalType, CanonicalType)]) -> String {
    seq.iter()
        .map(|(a, b)| format!("{}~{}", a.sort_key(), b.sort_key()))
        .collect::<Vec<_>>()
        .join(";")
}

impl Search {
    fn solve(&mut self, seq: &[(CanonicalType, CanonicalType)]) -> Option<SimilarityDerivation> {
        let key = seq_key(seq);
        if let Some(cached) = self.memo.get(&key) {
            return cached.clone();
        }
        let result = self.solve_uncached(seq);
        self.memo.insert(key, result.clone());
        result
    }

    fn solve_uncached(
        &mut self,
        seq: &[(CanonicalType, CanonicalType)],
    ) -> Option<SimilarityDerivation> {
        // (1) identical sequences
        if seq.iter().all(|(a, b)| a == b) {
            return Some(SimilarityDerivation::Refl {
                pairs: seq.to_vec(),
            });
        }
        // (3) shared arrow decomposition, smallest arity first
        if let Some(d) = self.try_arrow(seq) {
            return Some(d);
        }
        // (2) block splits of intersections and unions
        if let Some(d) = self.try_splits(seq) {
            return Some(d);
        }
        None
    }

    fn try_arrow(&mut self, seq: &Seq) -> Option<SimilarityDerivation> {
        if !seq
            .iter()
            .all(|(a, b)| is_alpha(a) && is_alpha(b))
        {
            return None;
        }
        let max_spine = seq
            .iter()
            .map(|(a, b)| spine_len(a).max(spine_len(b)))
            .max()
            .unwrap_or(0);
        if max_spine == 0 {
            // all entries atomic: the arrow move cannot make progress
            return None;
        }
        for n in 1..=max_spine {
            let views_h: Option<Vec<_>> = seq.iter().map(|(a, _)| arrow_view(a, n)).collect();
            let views_k: Option<Vec<_>> = seq.iter().map(|(_, b)| arrow_view(b, n)).collect();
            let (Some(views_h), Some(views_k)) = (views_h, views_k) else {
                continue;
            };
            // column i of the left side must match some view position p of
            // the right side, one shared assignment for the whole sequence
            let col_seq = |i: usize, p: usize| -> Seq {
                views_h
                    .iter()
                    .zip(views_k.iter())
                    .map(|((ha, _), (ka, _))| (ha[i].clone(), ka[p].clone()))
                    .collect()
            };
            let tail_seq: Seq = views_h
                .iter()
                .zip(views_k.iter())
                .map(|((_, ht), (_, kt))| (ht.clone(), kt.clone()))
                .collect();

            let Some(tail) = self.solve(&tail_seq) else {
                continue;
            };
            // assignment[i] = view position of column i (this is π⁻¹)
            let mut assignment = vec![usize::MAX; n];
            let mut used = vec![false; n];
            let mut col_derivs: Vec<Option<SimilarityDerivation>> = vec![None; n];
            if self.assign_columns(0, n, &mut assignment, &mut used, &mut col_derivs, &col_seq) {
                let mut perm = vec![usize::MAX; n];
                for (i, &p) in assignment.iter().enumerate() {
                    perm[p] = i;
                }
                return Some(SimilarityDerivation::ArrowPerm {
                    pairs: seq.clone(),
                    arity: n,
                    perm,
                    columns: col_derivs.into_iter().map(|d| d.unwrap()).collect(),
                    tail: Box::new(tail),
                });
            }
        }
        None
    }

    fn assign_columns(
        &mut self,
        i: usize,
        n: usize,
        assignment: &mut Vec<usize>,
        used: &mut Vec<bool>,
        col_derivs: &mut Vec<Option<SimilarityDerivation>>,
        col_seq: &dyn Fn(usize, usize) -> Seq,
    ) -> bool {
        if i == n {
            return true;
        }
        // identity position first keeps synthesized permutations minimal
        let mut candidates: Vec<usize> = Vec::with_capacity(n);
        if !used[i] {
            candidates.push(i);
        }
        if !self.strong {
            candidates.extend((0..n).filter(|&p| p != i && !used[p]));
        }
        for p in candidates {
            if let Some(d) = self.solve(&col_seq(i, p)) {
                assignment[i] = p;
                used[p] = true;
                col_derivs[i] = Some(d);
                if self.assign_columns(i + 1, n, assignment, used, col_derivs, col_seq) {
                    return true;
                }
                used[p] = false;
                col_derivs[i] = None;
            }
        }
        false
    }

    fn try_splits(&mut self, seq: &Seq) -> Option<SimilarityDerivation> {
        for (i, (h, k)) in seq.iter().enumerate() {
            let (ha, ka, is_and) = match (h, k) {
                (CanonicalType::And(ha), CanonicalType::And(ka)) => (ha, ka, true),
                (CanonicalType::Or(ha), CanonicalType::Or(ka)) => (ha, ka, false),
                _ => continue,
            };
            let (p, q) = (ha.len(), ka.len());
            // first block of the left side always keeps component 0:
            // swapping both sides' blocks gives the same subproblem
            for mask_a in 0u32..(1 << (p - 1)) {
                let mask_a = (mask_a << 1) | 1;
                if mask_a == (1 << p) - 1 {
                    continue;
                }
                let (a1, a2) = split_blocks(ha, mask_a, is_and);
                for mask_b in 1u32..(1 << q) - 1 {
                    let (b1, b2) = split_blocks(ka, mask_b, is_and);
                    if ![&a1, &a2, &b1, &b2].iter().all(|c| is_normal(&c.to_type_expr())) {
                        self.pruned += 1;
                        continue;
                    }
                    let mut sub = seq.clone();
                    sub.splice(i..=i, [(a1.clone(), b1.clone()), (a2.clone(), b2.clone())]);
                    if let Some(premise) = self.solve(&sub) {
                        let node = if is_and {
                            SimilarityDerivation::MergeAnd {
                                pairs: seq.clone(),
                                index: i,
                                premise: Box::new(premise),
                            }
                        } else {
                            SimilarityDerivation::MergeOr {
                                pairs: seq.clone(),
                                index: i,
                                premise: Box::new(premise),
                            }
                        };
                        return Some(node);
                    }
                }
            }
        }
        None
    }
}

fn split_blocks(comps: &[CanonicalType], mask: u32, is_and: bool) -> (CanonicalType, CanonicalType) {
    let mut in_block = Vec::new();
    let mut out_block = Vec::new();
    for (j, c) in comps.iter().enumerate() {
        if mask & (1 << j) != 0 {
            in_block.push(c.clone());
        } else {
            out_block.push(c.clone());
        }
    }
    (mk_block(in_block, is_and), mk_block(out_block, is_and))
}

fn mk_block(mut comps: Vec<CanonicalType>, is_and: bool) -> CanonicalType {
    if comps.len() == 1 {
        comps.pop().unwrap()
    } else if is_and {
        CanonicalType::And(comps)
    } else {
        CanonicalType::Or(comps)
    }
}

/// Convenience wrapper: normalize-free similarity on raw types that are
/// already normal.
pub fn similar_types(
    h: &TypeExpr,
    k: &TypeExpr,
    strong_only: bool,
) -> Result<SimilarOutcome, NotNormalError> {
    similar(
        &crate::types::canonicalize(h),
        &crate::types::canonicalize(k),
        strong_only,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normalizer::normalize;
    use crate::types::{canonicalize, parse_type};

    fn c(s: &str) -> CanonicalType {
        canonicalize(&parse_type(s).unwrap())
    }

    fn nf(s: &str) -> CanonicalType {
        normalize(&parse_type(s).unwrap()).unwrap().0
    }

    fn sim(a: &str, b: &str) -> bool {
        similar(&nf(a), &nf(b), false)
            .unwrap()
            .derivation
            .is_some()
    }

    fn sim_strong(a: &str, b: &str) -> bool {
        similar(&nf(a), &nf(b), true)
            .unwrap()
            .derivation
            .is_some()
    }

    #[test]
    fn classify_grammar() {
        assert_eq!(classify(&c("p")).unwrap(), NormalClass::AtomOrArrow);
        assert_eq!(classify(&c("omega")).unwrap(), NormalClass::AtomOrArrow);
        assert_eq!(classify(&c("p -> q")).unwrap(), NormalClass::AtomOrArrow);
        assert_eq!(classify(&c("p & q")).unwrap(), NormalClass::InterOfAA);
        assert_eq!(classify(&c("p | q")).unwrap(), NormalClass::UnionOfAA);
        assert_eq!(
            classify(&c("(p | q) & r")).unwrap(),
            NormalClass::NormalType
        );
        // shape fits the grammar but an erasure still applies → not normal
        assert!(classify(&c("(p1 -> p2) & p2")).is_err());
        assert!(classify(&c("omega -> p")).is_err());
    }

    #[test]
    fn arrow_views() {
        assert_eq!(
            arrow_view(&c("p1 -> p3"), 2),
            Some((vec![c("p1"), c("omega")], c("p3")))
        );
        assert_eq!(arrow_view(&c("p"), 1), Some((vec![c("omega")], c("p"))));
        assert_eq!(arrow_view(&c("p1 -> p2"), 0), Some((vec![], c("p1 -> p2"))));
        // padding past a union tail is not normalization-invisible
        assert_eq!(arrow_view(&c("s -> (p | q)"), 2), None);
    }

    #[test]
    fn reflexive_and_ac_stable() {
        assert!(sim("p & q", "q & p"));
        assert!(sim("(p | q) & r", "r & (q | p)"));
        assert!(sim("p", "p"));
        assert!(!sim("p", "q"));
        assert!(!sim("p", "omega"));
    }

    #[test]
    fn swap_is_similar() {
        assert!(sim("p1 -> p2 -> p3", "p2 -> p1 -> p3"));
        assert!(!sim_strong("p1 -> p2 -> p3", "p2 -> p1 -> p3"));
        assert!(!sim("p1 -> p2", "p2 -> p1"));
    }

    #[test]
    fn omega_padding_swap() {
        // ω→φ→φ ~ φ→φ with the swap permutation, but not strongly
        assert!(sim("omega -> p -> p", "p -> p"));
        assert!(!sim_strong("omega -> p -> p", "p -> p"));
    }

    #[test]
    fn the_shared_permutation_matters() {
        // swapping works inside one arrow but the same permutation must
        // apply to both members of the intersection
        assert!(sim(
            "(p1 -> p2 -> p3) & (q1 -> q2 -> q3)",
            "(p2 -> p1 -> p3) & (q2 -> q1 -> q3)"
        ));
        assert!(!sim(
            "(p1 -> p2 -> p3) & (q1 -> q2 -> q3)",
            "(p2 -> p1 -> p3) & (q1 -> q2 -> q3)"
        ));
    }

    #[test]
    fn paper_section5_example() {
        let a = "p1 -> p3";
        let b = "omega -> p2 -> p4";
        let d = similar(
            &CanonicalType::Or(vec![nf(a), nf(b)]),
            &CanonicalType::Or(vec![nf("omega -> p1 -> p3"), nf("p2 -> p4")]),
            false,
        )
        .unwrap()
        .derivation;
        assert!(d.is_some());

        assert!(sim(
            "p5 -> p6 -> p7 -> ((p1 -> p3) | (omega -> p2 -> p4))",
            "p7 -> p5 -> p6 -> ((omega -> p1 -> p3) | (p2 -> p4))"
        ));
    }

    #[test]
    fn symmetry_of_outcomes() {
        let pairs = [
            ("p1 -> p2 -> p3", "p2 -> p1 -> p3"),
            ("omega -> p -> p", "p -> p"),
            ("p & (q | r)", "(r | q) & p"),
            ("p -> q", "q -> p"),
            ("p & q", "p | q"),
        ];
        for (a, b) in pairs {
            assert_eq!(sim(a, b), sim(b, a), "symmetry on ({a}, {b})");
        }
    }

    #[test]
    fn not_normal_is_rejected() {
        let e = similar(&c("omega -> p"), &c("p"), false);
        assert!(e.is_err());
    }

    #[test]
    fn derivation_shape_for_swap() {
        let d = similar(&nf("p1 -> p2 -> p3"), &nf("p2 -> p1 -> p3"), false)
            .unwrap()
            .derivation
            .unwrap();
        match &d {
            SimilarityDerivation::ArrowPerm { arity, perm, .. } => {
                assert_eq!(*arity, 2);
                assert_eq!(perm, &vec![1, 0]);
            }
            other => panic!("expected arrow-perm, got {other:?}"),
        }
        assert!(!d.identity_perms_only());
    }
}

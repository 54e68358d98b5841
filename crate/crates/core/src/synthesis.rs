//! Coercion synthesis: from similarity derivations to verified inverse
//! pairs of finite hereditary permutators, plus the stock strong
//! isomorphisms and the end-to-end pipeline.
//!
//! Every witness returned from this module has passed
//! [`verify_inverse_pair`]; a verification failure aborts with an error
//! rather than returning an unchecked pair.

use std::fmt;

use crate::lambda::{
    beta_normalize, compose_unchecked, recognize_fhp, verify_inverse_pair, LambdaTerm,
};
use crate::normalizer::{normalize, NormCertificate, NormalizeError};
use crate::preorder::{leq, leq_witness};
use crate::similarity::{similar, NotNormalError, SimilarityDerivation};
use crate::types::{canonicalize, TypeExpr};

/// The twelve stock strong isomorphisms.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lemma3Name {
    IdemAnd,
    IdemOr,
    CommAnd,
    CommOr,
    AssocAnd,
    AssocOr,
    DistAndOr,
    DistOrAnd,
    DistArrowAnd,
    DistArrowOr,
    EraseAnd,
    EraseOr,
}

impl Lemma3Name {
    pub const ALL: [Lemma3Name; 12] = [
        Lemma3Name::IdemAnd,
        Lemma3Name::IdemOr,
        Lemma3Name::CommAnd,
        Lemma3Name::CommOr,
        Lemma3Name::AssocAnd,
        Lemma3Name::AssocOr,
        Lemma3Name::DistAndOr,
        Lemma3Name::DistOrAnd,
        Lemma3Name::DistArrowAnd,
        Lemma3Name::DistArrowOr,
        Lemma3Name::EraseAnd,
        Lemma3Name::EraseOr,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Lemma3Name::IdemAnd => "idem-and",
            Lemma3Name::IdemOr => "idem-or",
            Lemma3Name::CommAnd => "comm-and",
            Lemma3Name::CommOr => "comm-or",
            Lemma3Name::AssocAnd => "assoc-and",
            Lemma3Name::AssocOr => "assoc-or",
            Lemma3Name::DistAndOr => "dist-and-or",
            Lemma3Name::DistOrAnd => "dist-or-and",
            Lemma3Name::DistArrowAnd => "dist-arrow-and",
            Lemma3Name::DistArrowOr => "dist-arrow-or",
            Lemma3Name::EraseAnd => "erase-and",
            Lemma3Name::EraseOr => "erase-or",
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Lemma3Name::IdemAnd | Lemma3Name::IdemOr => 1,
            Lemma3Name::CommAnd | Lemma3Name::CommOr | Lemma3Name::EraseAnd
            | Lemma3Name::EraseOr => 2,
            _ => 3,
        }
    }
}

/// Where a witness came from.
#[derive(Debug, Clone)]
pub enum Provenance {
    Lemma3(Lemma3Name),
    LeqWitness,
    NormCertificate,
    Similarity(Box<SimilarityDerivation>),
}

/// A verified inverse coercion pair between two types.
#[derive(Debug, Clone)]
pub struct IsoWitness {
    pub source: TypeExpr,
    pub target: TypeExpr,
    pub fwd: LambdaTerm,
    pub bwd: LambdaTerm,
    pub strong: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SynthesisError {
    #[error("normalization failed: {0}")]
    Normalize(#[from] NormalizeError),
    #[error("{0}")]
    NotNormal(#[from] NotNormalError),
    #[error("witness construction bug: synthesized pair failed verification for {0} vs {1}")]
    VerificationFailed(String, String),
    #[error("term-level failure during synthesis: {0}")]
    Lambda(String),
    #[error("{0} expects {1} type argument(s)")]
    WrongArity(&'static str, usize),
    #[error("erase isomorphisms require the erased side to sit below the kept side")]
    EraseUnordered,
}

impl From<crate::lambda::LambdaError> for SynthesisError {
    fn from(e: crate::lambda::LambdaError) -> Self {
        SynthesisError::Lambda(e.to_string())
    }
}

impl fmt::Display for IsoWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "fwd: {}", self.fwd)?;
        write!(f, "bwd: {}", self.bwd)
    }
}

fn is_fhi_term(t: &LambdaTerm) -> bool {
    recognize_fhp(t).map(|p| p.is_fhi()).unwrap_or(false)
}

fn checked(
    source: TypeExpr,
    target: TypeExpr,
    fwd: LambdaTerm,
    bwd: LambdaTerm,
    provenance: Provenance,
) -> Result<IsoWitness, SynthesisError> {
    if !verify_inverse_pair(&fwd, &bwd) {
        return Err(SynthesisError::VerificationFailed(
            source.to_string(),
            target.to_string(),
        ));
    }
    let strong = is_fhi_term(&fwd) && is_fhi_term(&bwd);
    Ok(IsoWitness {
        source,
        target,
        fwd,
        bwd,
        strong,
        provenance,
    })
}

/// Instantiate one of the stock strong isomorphisms. Every witness is the
/// identity except for the two arrow distributions, which need the
/// one-step η-expansion `\x y. x y`; the erase pair composes the pre-order
/// witness for the erased side.
pub fn lemma3_witness(
    name: Lemma3Name,
    args: &[TypeExpr],
) -> Result<IsoWitness, SynthesisError> {
    use TypeExpr as T;
    if args.len() != name.arity() {
        return Err(SynthesisError::WrongArity(name.label(), name.arity()));
    }
    let id = LambdaTerm::identity();
    let eta = || {
        LambdaTerm::abs(
            "x",
            LambdaTerm::abs(
                "y",
                LambdaTerm::app(LambdaTerm::var("x"), LambdaTerm::var("y")),
            ),
        )
    };
    let (source, target, fwd, bwd) = match name {
        Lemma3Name::IdemAnd => {
            let s = args[0].clone();
            (T::and(s.clone(), s.clone()), s, id.clone(), id)
        }
        Lemma3Name::IdemOr => {
            let s = args[0].clone();
            (T::or(s.clone(), s.clone()), s, id.clone(), id)
        }
        Lemma3Name::CommAnd => {
            let (s, t) = (args[0].clone(), args[1].clone());
            (T::and(s.clone(), t.clone()), T::and(t, s), id.clone(), id)
        }
        Lemma3Name::CommOr => {
            let (s, t) = (args[0].clone(), args[1].clone());
            (T::or(s.clone(), t.clone()), T::or(t, s), id.clone(), id)
        }
        Lemma3Name::AssocAnd => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::and(T::and(s.clone(), t.clone()), r.clone()),
                T::and(s, T::and(t, r)),
                id.clone(),
                id,
            )
        }
        Lemma3Name::AssocOr => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::or(T::or(s.clone(), t.clone()), r.clone()),
                T::or(s, T::or(t, r)),
                id.clone(),
                id,
            )
        }
        Lemma3Name::DistAndOr => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::and(T::or(s.clone(), t.clone()), r.clone()),
                T::or(T::and(s, r.clone()), T::and(t, r)),
                id.clone(),
                id,
            )
        }
        Lemma3Name::DistOrAnd => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::or(T::and(s.clone(), t.clone()), r.clone()),
                T::and(T::or(s, r.clone()), T::or(t, r)),
                id.clone(),
                id,
            )
        }
        Lemma3Name::DistArrowAnd => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::arrow(s.clone(), T::and(t.clone(), r.clone())),
                T::and(T::arrow(s.clone(), t), T::arrow(s, r)),
                eta(),
                eta(),
            )
        }
        Lemma3Name::DistArrowOr => {
            let (s, t, r) = (args[0].clone(), args[1].clone(), args[2].clone());
            (
                T::arrow(T::or(s.clone(), t.clone()), r.clone()),
                T::and(T::arrow(s, r.clone()), T::arrow(t, r)),
                eta(),
                eta(),
            )
        }
        Lemma3Name::EraseAnd => {
            let (s, t) = (args[0].clone(), args[1].clone());
            if !leq(&s, &t) {
                return Err(SynthesisError::EraseUnordered);
            }
            let w = leq_witness(&s, &t).expect("leq implies a witness");
            (T::and(s.clone(), t), s, id, w)
        }
        Lemma3Name::EraseOr => {
            let (s, t) = (args[0].clone(), args[1].clone());
            if !leq(&s, &t) {
                return Err(SynthesisError::EraseUnordered);
            }
            let w = leq_witness(&s, &t).expect("leq implies a witness");
            (T::or(s, t.clone()), t, w, id)
        }
    };
    checked(source, target, fwd, bwd, Provenance::Lemma3(name))
}

/// Inverse permutator pair for a similarity derivation. One pair proves all
/// positions of the derivation's pair sequence at once.
pub fn derivation_to_fhp_pair(
    d: &SimilarityDerivation,
) -> Result<(LambdaTerm, LambdaTerm), SynthesisError> {
    let mut counter = 0usize;
    let (f, b) = build_pair(d, &mut counter);
    Ok((beta_normalize(&f)?, beta_normalize(&b)?))
}

fn build_pair(d: &SimilarityDerivation, counter: &mut usize) -> (LambdaTerm, LambdaTerm) {
    match d {
        SimilarityDerivation::Refl { .. } => {
            let id = *counter;
            *counter += 1;
            let x = format!("i{id}");
            (
                LambdaTerm::abs(x.clone(), LambdaTerm::var(x.clone())),
                LambdaTerm::abs(x.clone(), LambdaTerm::var(x)),
            )
        }
        // the merged entries re-associate without erasure, so the
        // normalization identities of the merge formula degenerate to
        // `\x. x` and the pair passes through unchanged
        SimilarityDerivation::MergeAnd { premise, .. }
        | SimilarityDerivation::MergeOr { premise, .. } => build_pair(premise, counter),
        SimilarityDerivation::ArrowPerm {
            perm,
            columns,
            tail,
            ..
        } => {
            let n = perm.len();
            let (tail_f, tail_b) = build_pair(tail, counter);
            let cols: Vec<(LambdaTerm, LambdaTerm)> =
                columns.iter().map(|c| build_pair(c, counter)).collect();
            let mut pinv = vec![0usize; n];
            for (p, &i) in perm.iter().enumerate() {
                pinv[i] = p;
            }
            let id = *counter;
            *counter += 1;
            let x = format!("f{id}");
            let ys: Vec<String> = (0..n).map(|p| format!("a{id}_{p}")).collect();

            // fwd: \x y_0..y_{n-1}. tail_f (x (col_0.bwd y_{π⁻¹(0)}) ..)
            let mut spine = LambdaTerm::var(x.clone());
            for (i, col) in cols.iter().enumerate() {
                spine = LambdaTerm::app(
                    spine,
                    LambdaTerm::app(col.1.clone(), LambdaTerm::var(ys[pinv[i]].clone())),
                );
            }
            let mut names = vec![x.clone()];
            names.extend(ys.iter().cloned());
            let fwd = build_abs(&names, LambdaTerm::app(tail_f, spine));

            // bwd: \x y_0..y_{n-1}. tail_b (x (col_{π(0)}.fwd y_{π(0)}) ..)
            let id2 = *counter;
            *counter += 1;
            let x2 = format!("f{id2}");
            let zs: Vec<String> = (0..n).map(|p| format!("b{id2}_{p}")).collect();
            let mut spine = LambdaTerm::var(x2.clone());
            for &i in perm.iter() {
                spine = LambdaTerm::app(
                    spine,
                    LambdaTerm::app(cols[i].0.clone(), LambdaTerm::var(zs[i].clone())),
                );
            }
            let mut names = vec![x2];
            names.extend(zs.iter().cloned());
            let bwd = build_abs(&names, LambdaTerm::app(tail_b, spine));
            (fwd, bwd)
        }
    }
}

fn build_abs(names: &[String], body: LambdaTerm) -> LambdaTerm {
    crate::lambda::build_abs(names, body)
}

/// Pipeline data kept alongside a synthesized witness so that typing
/// derivations can be emitted later.
pub struct SynthesisTrace {
    pub cert_source: NormCertificate,
    pub cert_target: NormCertificate,
    pub derivation: SimilarityDerivation,
}

/// Normalize both types, search for a similarity derivation between the
/// normal forms, and compose the certificate witnesses around the
/// permutator pair. `None` means no witness was found — similarity is not
/// known to be complete, so this is never a non-isomorphism proof.
pub fn synthesize_iso(
    s: &TypeExpr,
    t: &TypeExpr,
    strong_only: bool,
) -> Result<Option<IsoWitness>, SynthesisError> {
    Ok(synthesize_iso_traced(s, t, strong_only)?.map(|(w, _)| w))
}

/// [`synthesize_iso`] plus the pipeline pieces the typing emitter needs.
pub fn synthesize_iso_traced(
    s: &TypeExpr,
    t: &TypeExpr,
    strong_only: bool,
) -> Result<Option<(IsoWitness, SynthesisTrace)>, SynthesisError> {
    let (nf_s, cert_s) = normalize(s)?;
    let (nf_t, cert_t) = normalize(t)?;
    let outcome = similar(&nf_s, &nf_t, strong_only)?;
    let Some(derivation) = outcome.derivation else {
        return Ok(None);
    };
    let (p, p_inv) = derivation_to_fhp_pair(&derivation)?;
    let fwd = compose_unchecked(&cert_t.witness_bwd, &compose_unchecked(&p, &cert_s.witness_fwd)?)?;
    let bwd = compose_unchecked(&cert_s.witness_bwd, &compose_unchecked(&p_inv, &cert_t.witness_fwd)?)?;
    let witness = checked(
        s.clone(),
        t.clone(),
        fwd,
        bwd,
        Provenance::Similarity(Box::new(derivation.clone())),
    )?;
    Ok(Some((
        witness,
        SynthesisTrace {
            cert_source: cert_s,
            cert_target: cert_t,
            derivation,
        },
    )))
}

/// The inverse pair between a type and its normal form, as a witness value.
pub fn nf_witness(t: &TypeExpr) -> Result<IsoWitness, SynthesisError> {
    let (nf, cert) = normalize(t)?;
    checked(
        t.clone(),
        nf.to_type_expr(),
        cert.witness_fwd.clone(),
        cert.witness_bwd.clone(),
        Provenance::NormCertificate,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lambda::{alpha_eq, betaeta_equal, parse_term};
    use crate::types::parse_type;

    fn p(s: &str) -> TypeExpr {
        parse_type(s).unwrap()
    }

    fn t(s: &str) -> LambdaTerm {
        parse_term(s).unwrap()
    }

    #[test]
    fn swap_synthesis() {
        let w = synthesize_iso(&p("p1 -> p2 -> p3"), &p("p2 -> p1 -> p3"), false)
            .unwrap()
            .unwrap();
        assert!(alpha_eq(&w.fwd, &t("\\x y1 y2. x y2 y1")));
        assert!(verify_inverse_pair(&w.fwd, &w.bwd));
        assert!(!w.strong);
    }

    #[test]
    fn omega_padding_iso_and_strong_split() {
        let w = synthesize_iso(&p("omega -> p -> p"), &p("p -> p"), false)
            .unwrap()
            .unwrap();
        assert!(betaeta_equal(&w.fwd, &t("\\x y z. x z y")).unwrap());
        assert!(synthesize_iso(&p("omega -> p -> p"), &p("p -> p"), true)
            .unwrap()
            .is_none());
    }

    #[test]
    fn identity_on_equal_types() {
        let w = synthesize_iso(&p("p & q"), &p("p & q"), true).unwrap().unwrap();
        assert!(alpha_eq(&w.fwd, &LambdaTerm::identity()));
        assert!(w.strong);
    }

    #[test]
    fn ac_rearrangement_is_strong() {
        let w = synthesize_iso(&p("p & q"), &p("q & p"), true).unwrap().unwrap();
        assert!(w.strong);
        assert!(alpha_eq(&w.fwd, &LambdaTerm::identity()));
    }

    #[test]
    fn round_trip_witnesses_are_mutual_inverses() {
        let a = p("p1 -> p2 -> p3");
        let b = p("p2 -> p1 -> p3");
        let w1 = synthesize_iso(&a, &b, false).unwrap().unwrap();
        let w2 = synthesize_iso(&b, &a, false).unwrap().unwrap();
        assert!(verify_inverse_pair(&w1.fwd, &w2.fwd));
    }

    #[test]
    fn no_witness_for_plain_reversal() {
        assert!(synthesize_iso(&p("p -> q"), &p("q -> p"), false)
            .unwrap()
            .is_none());
    }

    #[test]
    fn grand_example_pair() {
        let s = p("p5 -> p6 -> p7 -> ((p1 -> p3) | (omega -> p2 -> p4))");
        let t_ = p("p7 -> p5 -> p6 -> ((omega -> p1 -> p3) | (p2 -> p4))");
        let w = synthesize_iso(&s, &t_, false).unwrap().unwrap();
        assert!(alpha_eq(
            &w.fwd,
            &t("\\x y1 y2 y3 y4 y5. x y2 y3 y1 y5 y4")
        ));
        assert!(alpha_eq(
            &w.bwd,
            &t("\\x y1 y2 y3 y4 y5. x y3 y1 y2 y5 y4")
        ));
        assert!(verify_inverse_pair(&w.fwd, &w.bwd));
    }

    #[test]
    fn lemma3_all_twelve() {
        let (s, t_, r) = (p("s"), p("t"), p("r"));
        for name in Lemma3Name::ALL {
            let args: Vec<TypeExpr> = match name {
                Lemma3Name::EraseAnd | Lemma3Name::EraseOr => {
                    vec![p("p2"), p("p1 -> p2")]
                }
                _ => [s.clone(), t_.clone(), r.clone()][..name.arity()].to_vec(),
            };
            let w = lemma3_witness(name, &args).unwrap();
            assert!(w.strong, "{} must be strong", name.label());
            assert!(verify_inverse_pair(&w.fwd, &w.bwd));
            match name {
                Lemma3Name::DistArrowAnd | Lemma3Name::DistArrowOr => {
                    assert!(alpha_eq(&w.fwd, &t("\\x y. x y")));
                }
                Lemma3Name::EraseAnd => {
                    assert!(alpha_eq(&w.fwd, &LambdaTerm::identity()));
                }
                Lemma3Name::EraseOr => {
                    assert!(alpha_eq(&w.bwd, &LambdaTerm::identity()));
                }
                _ => {
                    assert!(alpha_eq(&w.fwd, &LambdaTerm::identity()));
                    assert!(alpha_eq(&w.bwd, &LambdaTerm::identity()));
                }
            }
        }
    }

    #[test]
    fn erase_requires_order() {
        assert!(matches!(
            lemma3_witness(Lemma3Name::EraseAnd, &[p("p"), p("q")]),
            Err(SynthesisError::EraseUnordered)
        ));
    }

    #[test]
    fn erase_or_example() {
        // ((p1 -> p2) | p2) erases to p1 -> p2 since p2 ≤ p1 -> p2
        let w = lemma3_witness(Lemma3Name::EraseOr, &[p("p2"), p("p1 -> p2")]).unwrap();
        assert_eq!(w.target, p("p1 -> p2"));
    }

    #[test]
    fn derivation_pair_for_pure_swap() {
        use crate::normalizer::normalize;
        let nf_s = normalize(&p("p1 -> p2 -> p3")).unwrap().0;
        let nf_t = normalize(&p("p2 -> p1 -> p3")).unwrap().0;
        let d = similar(&nf_s, &nf_t, false).unwrap().derivation.unwrap();
        let (f, b) = derivation_to_fhp_pair(&d).unwrap();
        assert!(alpha_eq(&f, &t("\\x y1 y2. x y2 y1")));
        assert!(alpha_eq(&b, &t("\\x y1 y2. x y2 y1")));
    }

    #[test]
    fn transitivity_by_composition() {
        let a = p("p1 -> p2 -> p3");
        let b = p("p2 -> p1 -> p3");
        let c = p("p2 -> omega -> p1 -> p3");
        let w1 = synthesize_iso(&a, &b, false).unwrap().unwrap();
        let w2 = synthesize_iso(&b, &c, false).unwrap().unwrap();
        let fwd = crate::lambda::fhp_compose(&w2.fwd, &w1.fwd).unwrap();
        let bwd = crate::lambda::fhp_compose(&w1.bwd, &w2.bwd).unwrap();
        assert!(verify_inverse_pair(&fwd, &bwd));
        let direct = synthesize_iso(&a, &c, false).unwrap().unwrap();
        assert!(betaeta_equal(&fwd, &direct.fwd).unwrap());
    }
}

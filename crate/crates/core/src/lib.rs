//! Deciding and certifying type isomorphism for a λ-calculus with
//! intersection and union types in which atomic types behave as functions
//! (every atom `a` is semantically equal to `omega -> a`).
//!
//! The pipeline:
//!
//! 1. [`types`] — type syntax, parsing/printing, AC-canonical forms, and the
//!    semantic equivalence generated by the functional reading of atoms.
//! 2. [`preorder`] — the normalisation pre-order `≤` together with coercion
//!    witnesses (finite hereditary identities).
//! 3. [`normalizer`] — an isomorphism-preserving rewrite system computing
//!    unique normal forms, with per-step witness certificates.
//! 4. [`similarity`] — the similarity relation on normal types that drives
//!    coercion synthesis.
//! 5. [`synthesis`] — construction of invertible coercion pairs (finite
//!    hereditary permutators) from similarity derivations.
//! 6. [`lambda`] — untyped linear λ-terms, β/η normalisation, and the
//!    permutator algebra used to verify every synthesized coercion.
//! 7. [`typing`] — an explicit typing-derivation checker plus best-effort
//!    derivation emission for synthesized witnesses.
//! 8. [`index`] — signature corpus ingestion and query-by-type modulo
//!    isomorphism, returning verified coercions.
//!
//! Every positive answer produced by [`synthesis`] or [`index`] carries a
//! coercion pair that has been re-verified by βη-reduction; a negative
//! answer is only "no witness found", never a non-isomorphism proof.

pub mod cli;
pub mod index;
pub mod lambda;
pub mod normalizer;
pub mod preorder;
pub mod similarity;
pub mod synthesis;
pub mod types;
pub mod typing;

pub use lambda::{LambdaTerm, PermTree};
pub use normalizer::{NormCertificate, RewriteRule, RewriteStep};
pub use similarity::SimilarityDerivation;
pub use synthesis::IsoWitness;
pub use types::{CanonicalType, TypeContext, TypeExpr};
pub use typing::TypingDerivation;

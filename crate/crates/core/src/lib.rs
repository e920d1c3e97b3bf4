//! Random sign and selector subseries in concrete separable Banach spaces.
//!
//! The library provides exact and floating-point models of a handful of
//! classical sequence spaces, countable norming families on their duals,
//! formal series with sign/selector coefficient laws, finite-budget
//! convergence detectors that emit re-checkable certificates, exhaustive
//! small-case checks of the Levy maximal inequality and symmetrization
//! identities, and block extraction experiments around unconditional
//! convergence.

pub mod catalog;
pub mod convergence;
pub mod error;
pub mod ito_nisio;
pub mod norming;
pub mod orlicz_pettis;
pub mod sampling;
pub mod scalar;
pub mod series;
pub mod space;

pub use catalog::{
    catalog, catalog_names, oracle_verdict, FamilySpec, LawVerdict, OracleAnswer, OracleSummary,
    Predicate,
};
pub use convergence::{
    detect_bounded, detect_strong, detect_weak, recheck_verdict, Budget, Certificate,
    ConvergenceVerdict, EpsFail, GapWitness, LimitRef, Outcome, StabEntry, WeakEntry,
};
pub use error::{LabError, Result};
pub use ito_nisio::{
    dichotomy_experiment, equidistribution_check, levy_check_exhaustive, terms_prefix,
    DichotomyReport, EquidistReport, LevyReport, ENUMERATION_CAP,
};
pub use norming::{monomial_test_family, norming_family, norming_sup, NormingFamily};
pub use orlicz_pettis::{
    extract_blocks, op_experiment, subseries_flip_identity, unconditional_cauchy_scan,
    FlipIdentity, OpReport, OP_PASS_LEVEL,
};
pub use sampling::{sample_coarse, sample_haar, sample_selectors, Seed};
pub use scalar::{Precision, Scalar};
pub use series::{
    chi_from_eps, coarse_coefficients, partial_sum, s_from_sigma, sigma_from_s,
    verify_selector_identity, verify_sigma_identity, BlockIdSet, BlockPartition, CoeffKind,
    CoeffTail, CoefficientSeq, FormalSeries, LawTag, SelectorSplit, SignSplit,
};
pub use space::{Form, Functional, PNorm, Space, SpaceKind, Vector};

//! The family catalog and its analytic oracles.
//!
//! Each named family couples a term generator with closed-form ground truth:
//! whether signed/selected subseries converge strongly, weakly against the
//! canonical norming family, or stay bounded.  Oracle answers for law-tailed
//! coefficient sequences are almost-sure statements; by independence of the
//! tail they do not depend on the materialized prefix, which is what lets a
//! single closed form certify every sample drawn from the law.
//!
//! Families:
//!
//! * `l2_diagonal(alpha)`: x_n = e_n/(n+1)^alpha in SeqL2.  Orthogonal
//!   terms make every predicate sign-independent: summability in any form
//!   is equivalent to 2*alpha > 1, and the integral bound
//!   sum_{n>M} (n+1)^{-2 alpha} <= (M+1)^{1-2 alpha}/(2 alpha - 1) gives
//!   explicit stabilization frontiers.
//! * `l1_absolute`: x_n = e_n 2^{-n}, absolutely summable, tail mass 2^{-M}.
//! * `c0_basis`: x_n = e_n.  Bounded for all sign/selector coefficients
//!   (disjoint unit supports), never summable in any form unless the
//!   coefficients are eventually zero: the coordinate limit fails to vanish.
//! * `c0_paired`: x_{2k} = e_k, x_{2k+1} = -e_k.  Bounded by 2; weakly
//!   summable exactly when the pair differences c_{2k} - c_{2k+1} are
//!   eventually zero (as written: to 0); never strongly summable for signs
//!   because the odd partial sums leave a unit coordinate dangling.
//! * `linf_monomial`: x_0 = 1, x_n = t^n - t^{n-1}.  With all-one signs the
//!   partial sums telescope to t^N: sup norm one forever, yet every
//!   integrable test functional pairs to zero in the limit.  The oracle
//!   covers constant signs and eventually-zero coefficients only.
//! * `torus_fourier(alpha)`: mode coefficients a_n = (n+1)^{-alpha}; by the
//!   Parseval identity partial-sum norms equal l2 coefficient norms, so the
//!   oracle coincides with the diagonal one.

use crate::error::{LabError, Result};
use crate::scalar::ratio_to_f64;
use crate::series::{CoeffKind, CoeffTail, CoefficientSeq, FormalSeries, Terms};
use crate::series::BlockIdSet;
use crate::space::Space;
use crate::Precision;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Zero};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Predicate {
    Strong,
    Weak,
    Bounded,
    Unconditional,
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Predicate::Strong => "strong",
            Predicate::Weak => "weak",
            Predicate::Bounded => "bounded",
            Predicate::Unconditional => "unconditional",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OracleAnswer {
    Converges,
    Diverges,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawVerdict {
    AlwaysConverges,
    AlwaysDiverges,
}

/// Ground-truth summary for the family under its canonical coefficient
/// regime: independent uniform signs for every family except the monomial
/// model, which is catalogued as written (all-one signs).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct OracleSummary {
    pub unconditional: bool,
    pub strong: LawVerdict,
    pub weak: LawVerdict,
    pub bounded: bool,
}

impl OracleSummary {
    /// Convergence implications that any consistent summary must satisfy.
    pub fn validate(&self) -> Result<()> {
        if self.strong == LawVerdict::AlwaysConverges && self.weak != LawVerdict::AlwaysConverges {
            return Err(LabError::InvalidInput(
                "inconsistent oracle: strong convergence without weak".into(),
            ));
        }
        if self.weak == LawVerdict::AlwaysConverges && !self.bounded {
            return Err(LabError::InvalidInput(
                "inconsistent oracle: weak convergence without boundedness".into(),
            ));
        }
        if self.unconditional && self.strong != LawVerdict::AlwaysConverges {
            return Err(LabError::InvalidInput(
                "inconsistent oracle: unconditional without strong".into(),
            ));
        }
        Ok(())
    }
}

fn serialize_params<S: serde::Serializer>(
    params: &BTreeMap<String, BigRational>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = ser.serialize_map(Some(params.len()))?;
    for (k, v) in params {
        map.serialize_entry(k, &v.to_string())?;
    }
    map.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct FamilySpec {
    pub name: String,
    #[serde(serialize_with = "serialize_params")]
    pub params: BTreeMap<String, BigRational>,
    pub space: Space,
    pub summary: OracleSummary,
}

impl FamilySpec {
    /// Rebuilds the family's series; the catalog is the single source of
    /// truth for the (name, params) -> terms mapping.
    pub fn series(&self) -> Result<FormalSeries> {
        Ok(catalog(&self.name, &self.params, self.space.precision)?.0)
    }
}

pub const CATALOG_NAMES: [&str; 6] = [
    "l2_diagonal",
    "l1_absolute",
    "c0_basis",
    "c0_paired",
    "linf_monomial",
    "torus_fourier",
];

pub fn catalog_names() -> &'static [&'static str] {
    &CATALOG_NAMES
}

fn get_alpha(params: &BTreeMap<String, BigRational>) -> BigRational {
    params.get("alpha").cloned().unwrap_or_else(BigRational::one)
}

fn check_params(name: &str, params: &BTreeMap<String, BigRational>, allowed: &[&str]) -> Result<()> {
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) {
            return Err(LabError::InvalidInput(format!(
                "family {name} does not take a parameter named {key}"
            )));
        }
    }
    Ok(())
}

fn two_alpha_gt_one(alpha: &BigRational) -> bool {
    alpha * BigRational::from_integer(BigInt::from(2)) > BigRational::one()
}

fn verdict(b: bool) -> LawVerdict {
    if b {
        LawVerdict::AlwaysConverges
    } else {
        LawVerdict::AlwaysDiverges
    }
}

/// Builds a catalog family.  Exact precision requires rational term
/// coefficients, so diagonal families demand integer alpha there; use
/// float precision for fractional exponents.
pub fn catalog(
    name: &str,
    params: &BTreeMap<String, BigRational>,
    precision: Precision,
) -> Result<(FormalSeries, FamilySpec)> {
    let (series, summary) = match name {
        "l2_diagonal" | "torus_fourier" => {
            check_params(name, params, &["alpha"])?;
            let alpha = get_alpha(params);
            if alpha < BigRational::zero() {
                return Err(LabError::InvalidInput("alpha must be >= 0".into()));
            }
            if precision == Precision::Exact && !alpha.is_integer() {
                return Err(LabError::InvalidInput(format!(
                    "exact mode needs integer alpha, got {alpha}; use float precision"
                )));
            }
            let conv = two_alpha_gt_one(&alpha);
            let (space, terms) = if name == "l2_diagonal" {
                (Space::seq_l2(precision), Terms::L2Diagonal { alpha })
            } else {
                (Space::torus_trig(precision), Terms::TorusDiagonal { alpha })
            };
            let series = FormalSeries::from_terms(space, terms, Some("l2_tail"), None);
            let summary = OracleSummary {
                unconditional: conv,
                strong: verdict(conv),
                weak: verdict(conv),
                bounded: conv,
            };
            (series, summary)
        }
        "l1_absolute" => {
            check_params(name, params, &[])?;
            let series = FormalSeries::from_terms(
                Space::seq_l1(precision),
                Terms::L1Geometric,
                Some("absolute"),
                None,
            );
            let summary = OracleSummary {
                unconditional: true,
                strong: LawVerdict::AlwaysConverges,
                weak: LawVerdict::AlwaysConverges,
                bounded: true,
            };
            (series, summary)
        }
        "c0_basis" => {
            check_params(name, params, &[])?;
            let series = FormalSeries::from_terms(
                Space::seq_c0(precision),
                Terms::C0Basis,
                Some("c0_basis"),
                None,
            );
            let summary = OracleSummary {
                unconditional: false,
                strong: LawVerdict::AlwaysDiverges,
                weak: LawVerdict::AlwaysDiverges,
                bounded: true,
            };
            (series, summary)
        }
        "c0_paired" => {
            check_params(name, params, &[])?;
            let series = FormalSeries::from_terms(
                Space::seq_c0(precision),
                Terms::C0Paired,
                Some("c0_paired"),
                None,
            );
            let summary = OracleSummary {
                unconditional: false,
                strong: LawVerdict::AlwaysDiverges,
                weak: LawVerdict::AlwaysDiverges,
                bounded: true,
            };
            (series, summary)
        }
        "linf_monomial" => {
            check_params(name, params, &[])?;
            let series = FormalSeries::from_terms(
                Space::monomial_linf(precision),
                Terms::MonomialTelescope,
                Some("monomial"),
                None,
            );
            let summary = OracleSummary {
                unconditional: false,
                strong: LawVerdict::AlwaysDiverges,
                weak: LawVerdict::AlwaysConverges,
                bounded: true,
            };
            (series, summary)
        }
        _ => {
            return Err(LabError::InvalidInput(format!(
                "unknown family {name}; known: {}",
                CATALOG_NAMES.join(", ")
            )))
        }
    };
    summary.validate()?;
    let spec = FamilySpec {
        name: name.to_string(),
        params: params.clone(),
        space: *series.space(),
        summary,
    };
    Ok((series, spec))
}

/// Closed-form ground truth for a predicate on (series, coefficients).
///
/// `Ok(None)` means the series carries no oracle for this shape;
/// `OracleIncomplete` means an oracle exists but cannot decide this
/// coefficient pattern.  For law tails the answer is the almost-sure one.
pub(crate) fn law_answer(
    s: &FormalSeries,
    pred: Predicate,
    c: &CoefficientSeq,
) -> Result<Option<bool>> {
    answer_terms(s.terms(), s, pred, c)
}

fn incomplete(s: &FormalSeries, pred: Predicate) -> LabError {
    LabError::OracleIncomplete {
        family: s.oracle_id().unwrap_or("unnamed").to_string(),
        predicate: pred.to_string(),
    }
}

fn answer_terms(
    terms: &Terms,
    s: &FormalSeries,
    pred: Predicate,
    c: &CoefficientSeq,
) -> Result<Option<bool>> {
    let ev_zero = c.eventually_zero();
    match terms {
        Terms::Zero | Terms::Finite(_) => Ok(Some(true)),
        Terms::L2Diagonal { alpha } | Terms::TorusDiagonal { alpha } => {
            if ev_zero == Some(true) {
                return Ok(Some(true));
            }
            match c.kind() {
                CoeffKind::Signs | CoeffKind::Selectors => Ok(Some(two_alpha_gt_one(alpha))),
                CoeffKind::Scalars => Err(incomplete(s, pred)),
            }
        }
        Terms::L1Geometric => match c.kind() {
            CoeffKind::Signs | CoeffKind::Selectors => Ok(Some(true)),
            CoeffKind::Scalars => {
                if ev_zero == Some(true) {
                    Ok(Some(true))
                } else {
                    Err(incomplete(s, pred))
                }
            }
        },
        Terms::RepeatVector(v) => {
            if v.is_zero() || ev_zero == Some(true) {
                return Ok(Some(true));
            }
            // a fixed nonzero step fires infinitely often under every
            // non-vanishing tail (law tails almost surely), so the partial
            // sums escape every bounded set and every weak tube
            Ok(Some(false))
        }
        Terms::C0Basis => answer_disjoint_units(s, pred, c),
        Terms::C0Paired => match pred {
            Predicate::Bounded => match c.kind() {
                CoeffKind::Signs | CoeffKind::Selectors => Ok(Some(true)),
                CoeffKind::Scalars => {
                    if ev_zero == Some(true) {
                        Ok(Some(true))
                    } else {
                        Err(incomplete(s, pred))
                    }
                }
            },
            Predicate::Strong => {
                if c.kind() == CoeffKind::Signs {
                    // the odd-even gap S_{2K} - S_{2K-1} = c_{2K} e_K keeps
                    // unit norm for every sign choice
                    return Ok(Some(false));
                }
                Ok(Some(ev_zero.unwrap_or(false)))
            }
            Predicate::Weak => Ok(Some(pair_differences_vanish(c))),
            Predicate::Unconditional => Ok(Some(ev_zero == Some(true))),
        },
        Terms::MonomialTelescope => {
            if ev_zero == Some(true) {
                return Ok(Some(true));
            }
            if constant_sign(c).is_some() {
                return Ok(Some(match pred {
                    Predicate::Strong | Predicate::Unconditional => false,
                    Predicate::Weak | Predicate::Bounded => true,
                }));
            }
            Err(incomplete(s, pred))
        }
        Terms::Restricted { base, keep, .. } => {
            if keep.is_finite() {
                // finitely many surviving blocks, each finite: a finite sum
                return Ok(Some(true));
            }
            match keep {
                BlockIdSet::All => answer_terms(base.terms(), s, pred, c),
                BlockIdSet::Evens => answer_evens_restriction(base.terms(), s, pred, c),
                BlockIdSet::Explicit(_) => unreachable!("explicit sets are finite"),
            }
        }
    }
}

/// Infinitely many surviving terms with disjoint unit supports: bounded for
/// signs/selectors, summable in any form only for eventually-zero
/// coefficients (otherwise some coordinate of the candidate limit stays at
/// a nonzero integer, which no element of c0 matches).
fn answer_disjoint_units(s: &FormalSeries, pred: Predicate, c: &CoefficientSeq) -> Result<Option<bool>> {
    let ev_zero = c.eventually_zero();
    match pred {
        Predicate::Bounded => match c.kind() {
            CoeffKind::Signs | CoeffKind::Selectors => Ok(Some(true)),
            CoeffKind::Scalars => {
                if ev_zero == Some(true) {
                    Ok(Some(true))
                } else {
                    Err(incomplete(s, pred))
                }
            }
        },
        Predicate::Strong | Predicate::Weak | Predicate::Unconditional => {
            // law tails have infinite support almost surely
            Ok(Some(ev_zero.unwrap_or(false)))
        }
    }
}

fn answer_evens_restriction(
    base: &Terms,
    s: &FormalSeries,
    pred: Predicate,
    c: &CoefficientSeq,
) -> Result<Option<bool>> {
    match base {
        Terms::Zero | Terms::Finite(_) => Ok(Some(true)),
        Terms::L1Geometric => answer_terms(base, s, pred, c),
        // dropping terms of an orthogonal diagonal never changes the
        // dichotomy side: the surviving index set has positive density
        // because every finite partition ends in fresh singletons
        Terms::L2Diagonal { .. } | Terms::TorusDiagonal { .. } => answer_terms(base, s, pred, c),
        // beyond the finite block list the surviving terms are disjoint
        // units (for the paired family exactly one of +-e_k survives per k)
        Terms::C0Basis | Terms::C0Paired => answer_disjoint_units(s, pred, c),
        // survivors arrive at positive density, which changes nothing
        Terms::RepeatVector(_) => answer_terms(base, s, pred, c),
        Terms::MonomialTelescope => {
            if c.eventually_zero() == Some(true) {
                Ok(Some(true))
            } else {
                Err(incomplete(s, pred))
            }
        }
        Terms::Restricted { .. } => Ok(None),
    }
}

/// Whether the pair differences c_{2k} - c_{2k+1} vanish eventually: the
/// weak-limit candidate of the paired family is exactly that coordinate
/// sequence.  Deterministic tails make consecutive values equal from some
/// point on; a law tail splits infinitely many pairs almost surely, because
/// every representable partition ends in fresh singleton ids.
fn pair_differences_vanish(c: &CoefficientSeq) -> bool {
    if let Some((block_values, _part)) = c.expansion() {
        return pair_differences_vanish(block_values);
    }
    !matches!(c.tail(), CoeffTail::Law(_))
}

/// Some(v) when the coefficients are constantly v in {-1,+1}.
fn constant_sign(c: &CoefficientSeq) -> Option<i64> {
    if c.kind() != CoeffKind::Signs {
        return None;
    }
    [1i64, -1].into_iter().find(|&v| c.is_constant(v))
}

/// The public oracle entry point: errors with `OracleIncomplete` when the
/// family cannot decide the (predicate, coefficients) combination.
pub fn oracle_verdict(
    spec: &FamilySpec,
    pred: Predicate,
    c: &CoefficientSeq,
) -> Result<OracleAnswer> {
    let s = spec.series()?;
    match law_answer(&s, pred, c)? {
        Some(true) => Ok(OracleAnswer::Converges),
        Some(false) => Ok(OracleAnswer::Diverges),
        None => Err(LabError::OracleIncomplete {
            family: spec.name.clone(),
            predicate: pred.to_string(),
        }),
    }
}

fn alpha_of(terms: &Terms) -> Option<f64> {
    match terms {
        Terms::L2Diagonal { alpha } | Terms::TorusDiagonal { alpha } => Some(ratio_to_f64(alpha)),
        Terms::Restricted { base, keep, .. } if !keep.is_finite() => alpha_of(base.terms()),
        _ => None,
    }
}

/// A frontier M such that the tail beyond M stays within eps in norm, when
/// the oracle knows the series converges strongly for these coefficients.
/// May hugely exceed any scan budget; that is the point.
pub(crate) fn stabilization_frontier(
    s: &FormalSeries,
    c: &CoefficientSeq,
    eps: f64,
) -> Option<f64> {
    if law_answer(s, Predicate::Strong, c).ok().flatten() != Some(true) {
        return None;
    }
    if let Some(end) = c.support_end() {
        let hint = s.max_index_hint().unwrap_or(0) as f64;
        return Some(hint.max(end as f64));
    }
    if let Some(a) = alpha_of(s.terms()) {
        // integral tail bound: sum_{n>M} (n+1)^{-2a} <= (M+1)^{1-2a}/(2a-1)
        let two_a = 2.0 * a;
        if two_a <= 1.0 {
            return None;
        }
        let m_plus_1 = (eps * eps * (two_a - 1.0)).powf(-1.0 / (two_a - 1.0));
        return Some(m_plus_1.max(1.0));
    }
    if matches!(s.terms(), Terms::L1Geometric) {
        // tail mass sum_{n>M} 2^{-n} = 2^{-M}
        return Some((1.0 / eps).log2().max(0.0));
    }
    if let Some(h) = s.max_index_hint() {
        return Some(h as f64);
    }
    None
}

/// Upper bound for the tail norm beyond frontier m, for re-checking
/// oracle-certified stabilization entries.
pub(crate) fn tail_bound(s: &FormalSeries, c: &CoefficientSeq, m: f64) -> Option<f64> {
    if let Some(end) = c.support_end() {
        let end = (s.max_index_hint().unwrap_or(0) as f64).max(end as f64);
        return Some(if m >= end { 0.0 } else { f64::INFINITY });
    }
    if let Some(a) = alpha_of(s.terms()) {
        let two_a = 2.0 * a;
        if two_a <= 1.0 {
            return Some(f64::INFINITY);
        }
        return Some(((m + 1.0).powf(1.0 - two_a) / (two_a - 1.0)).sqrt());
    }
    if matches!(s.terms(), Terms::L1Geometric) {
        return Some(2.0f64.powf(-m));
    }
    None
}

/// Uniform bound on all partial-sum norms, when the oracle knows one.
pub(crate) fn sup_bound(s: &FormalSeries, c: &CoefficientSeq) -> Option<f64> {
    if law_answer(s, Predicate::Bounded, c).ok().flatten() != Some(true) {
        return None;
    }
    match s.terms() {
        Terms::L2Diagonal { .. } | Terms::TorusDiagonal { .. } => {
            let a = alpha_of(s.terms())?;
            if 2.0 * a > 1.0 {
                Some((1.0 + 1.0 / (2.0 * a - 1.0)).sqrt())
            } else {
                None
            }
        }
        Terms::L1Geometric => Some(2.0),
        Terms::C0Basis => Some(1.0),
        Terms::C0Paired => Some(2.0),
        Terms::MonomialTelescope => Some(1.0),
        Terms::Restricted { base, .. } => sup_bound_restricted(base.terms()),
        Terms::Zero | Terms::Finite(_) | Terms::RepeatVector(_) => None,
    }
}

fn sup_bound_restricted(base: &Terms) -> Option<f64> {
    match base {
        Terms::L1Geometric => Some(2.0),
        Terms::C0Basis => Some(1.0),
        Terms::C0Paired => Some(2.0),
        Terms::L2Diagonal { alpha } | Terms::TorusDiagonal { alpha } => {
            let a = ratio_to_f64(alpha);
            if 2.0 * a > 1.0 {
                Some((1.0 + 1.0 / (2.0 * a - 1.0)).sqrt())
            } else {
                None
            }
        }
        _ => None,
    }
}

/// A norm level that window gaps keep reaching beyond every frontier, when
/// the oracle knows the series diverges strongly for these coefficients.
/// `INFINITY` means gaps grow without bound.
pub(crate) fn gap_floor(s: &FormalSeries, c: &CoefficientSeq) -> Option<f64> {
    if law_answer(s, Predicate::Strong, c).ok().flatten() != Some(false) {
        return None;
    }
    match s.terms() {
        Terms::L2Diagonal { .. } | Terms::TorusDiagonal { .. } => Some(f64::INFINITY),
        Terms::C0Basis | Terms::C0Paired => Some(1.0),
        Terms::MonomialTelescope => Some(1.0),
        // single-index windows keep norm ||v|| whenever the coefficient fires
        Terms::RepeatVector(v) => Some(v.norm_approx()),
        Terms::Restricted { base, keep, .. } if !keep.is_finite() => match base.terms() {
            Terms::C0Basis | Terms::C0Paired => Some(1.0),
            Terms::L2Diagonal { .. } | Terms::TorusDiagonal { .. } => Some(f64::INFINITY),
            _ => None,
        },
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{sample_haar, Seed};
    use crate::series::LawTag;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn params_alpha(n: i64, d: i64) -> BTreeMap<String, BigRational> {
        BTreeMap::from([("alpha".to_string(), rat(n, d))])
    }

    #[test]
    fn catalog_lists_six_families_and_rejects_unknown() {
        for name in catalog_names() {
            let (s, spec) = catalog(name, &BTreeMap::new(), Precision::Float64).unwrap();
            assert_eq!(spec.name, *name);
            assert_eq!(s.space(), &spec.space);
            spec.summary.validate().unwrap();
        }
        assert!(catalog("l3_diagonal", &BTreeMap::new(), Precision::Exact).is_err());
        assert!(catalog("l2_diagonal", &params_alpha(-1, 1), Precision::Exact).is_err());
        let bogus = BTreeMap::from([("beta".to_string(), rat(1, 1))]);
        assert!(catalog("c0_basis", &bogus, Precision::Exact).is_err());
    }

    #[test]
    fn diagonal_summary_follows_the_exponent() {
        let (_, conv) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        assert_eq!(conv.summary.strong, LawVerdict::AlwaysConverges);
        assert!(conv.summary.unconditional);

        let (_, div) = catalog("l2_diagonal", &params_alpha(2, 5), Precision::Float64).unwrap();
        assert_eq!(div.summary.strong, LawVerdict::AlwaysDiverges);
        assert_eq!(div.summary.weak, LawVerdict::AlwaysDiverges);
        assert!(!div.summary.bounded);

        // exact mode refuses fractional exponents
        assert!(catalog("l2_diagonal", &params_alpha(2, 5), Precision::Exact).is_err());

        let (_, torus) = catalog("torus_fourier", &params_alpha(3, 5), Precision::Float64).unwrap();
        assert_eq!(torus.summary.strong, LawVerdict::AlwaysConverges);
    }

    #[test]
    fn oracle_answers_match_closed_forms() {
        let (_, half) = catalog("l2_diagonal", &params_alpha(1, 2), Precision::Float64).unwrap();
        let eps = sample_haar(Seed::new(1), 32);
        assert_eq!(
            oracle_verdict(&half, Predicate::Strong, &eps).unwrap(),
            OracleAnswer::Diverges
        );

        let (_, basis) = catalog("c0_basis", &BTreeMap::new(), Precision::Exact).unwrap();
        let finite_sel = CoefficientSeq::selectors(vec![1, 0, 1], CoeffTail::Zero).unwrap();
        assert_eq!(
            oracle_verdict(&basis, Predicate::Strong, &finite_sel).unwrap(),
            OracleAnswer::Converges
        );
        assert_eq!(
            oracle_verdict(&basis, Predicate::Bounded, &eps).unwrap(),
            OracleAnswer::Converges
        );
        assert_eq!(
            oracle_verdict(&basis, Predicate::Weak, &CoefficientSeq::selectors_all_one()).unwrap(),
            OracleAnswer::Diverges
        );

        let (_, l1) = catalog("l1_absolute", &BTreeMap::new(), Precision::Exact).unwrap();
        let any_sel = CoefficientSeq::selectors(vec![1, 1, 0, 1], CoeffTail::Law(LawTag::Bernoulli))
            .unwrap();
        assert_eq!(
            oracle_verdict(&l1, Predicate::Strong, &any_sel).unwrap(),
            OracleAnswer::Converges
        );
    }

    #[test]
    fn paired_family_separates_weak_from_strong() {
        let (s, spec) = catalog("c0_paired", &BTreeMap::new(), Precision::Exact).unwrap();
        let ones = CoefficientSeq::signs_all_plus();
        // as written: weakly summable to zero, never strongly
        assert_eq!(law_answer(&s, Predicate::Weak, &ones).unwrap(), Some(true));
        assert_eq!(law_answer(&s, Predicate::Strong, &ones).unwrap(), Some(false));
        assert_eq!(law_answer(&s, Predicate::Bounded, &ones).unwrap(), Some(true));

        // random signs split infinitely many pairs almost surely
        let eps = sample_haar(Seed::new(5), 64);
        assert_eq!(
            oracle_verdict(&spec, Predicate::Weak, &eps).unwrap(),
            OracleAnswer::Diverges
        );

        // coarse signs over a finite partition still split the tail pairs
        let part = std::sync::Arc::new(
            crate::series::BlockPartition::new(vec![vec![0, 1], vec![2, 3]]).unwrap(),
        );
        let coarse = crate::sampling::sample_coarse(Seed::new(5), &part, 16);
        assert_eq!(law_answer(&s, Predicate::Weak, &coarse).unwrap(), Some(false));

        // deterministic coarse tails pair up eventually
        let det = CoefficientSeq::coarse(
            CoefficientSeq::signs(vec![1, -1], CoeffTail::One).unwrap(),
            part,
        );
        assert_eq!(law_answer(&s, Predicate::Weak, &det).unwrap(), Some(true));
    }

    #[test]
    fn monomial_oracle_covers_constant_signs_only() {
        let (s, spec) = catalog("linf_monomial", &BTreeMap::new(), Precision::Exact).unwrap();
        let ones = CoefficientSeq::signs_all_plus();
        assert_eq!(law_answer(&s, Predicate::Strong, &ones).unwrap(), Some(false));
        assert_eq!(law_answer(&s, Predicate::Weak, &ones).unwrap(), Some(true));
        assert_eq!(law_answer(&s, Predicate::Bounded, &ones).unwrap(), Some(true));
        assert_eq!(
            law_answer(&s, Predicate::Weak, &CoefficientSeq::signs_all_minus()).unwrap(),
            Some(true)
        );

        let eps = sample_haar(Seed::new(2), 16);
        assert!(matches!(
            oracle_verdict(&spec, Predicate::Strong, &eps),
            Err(LabError::OracleIncomplete { .. })
        ));
    }

    #[test]
    fn stabilization_frontier_and_tail_bound_cohere() {
        let (s, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let all = CoefficientSeq::selectors_all_one();
        let eps = 1.0 / 8.0;
        let m = stabilization_frontier(&s, &all, eps).unwrap();
        assert!(m >= 63.0, "frontier {m}");
        let b = tail_bound(&s, &all, m).unwrap();
        assert!(b <= eps * 1.0001, "bound {b} vs {eps}");

        let (l1, _) = catalog("l1_absolute", &BTreeMap::new(), Precision::Exact).unwrap();
        let m1 = stabilization_frontier(&l1, &all, 1.0 / 512.0).unwrap();
        assert!((9.0..=10.0).contains(&m1), "frontier {m1}");
        assert!(tail_bound(&l1, &all, m1).unwrap() <= 1.0 / 512.0 + 1e-12);

        // divergent exponents have no frontier and infinite gap floor
        let (sf, _) = catalog("l2_diagonal", &params_alpha(1, 2), Precision::Float64).unwrap();
        let eps_signs = sample_haar(Seed::new(3), 8);
        assert!(stabilization_frontier(&sf, &eps_signs, 0.5).is_none());
        assert_eq!(gap_floor(&sf, &eps_signs), Some(f64::INFINITY));

        let (basis, _) = catalog("c0_basis", &BTreeMap::new(), Precision::Exact).unwrap();
        assert_eq!(gap_floor(&basis, &eps_signs), Some(1.0));
        assert_eq!(sup_bound(&basis, &eps_signs), Some(1.0));
    }

    #[test]
    fn restricted_series_oracles() {
        use crate::series::{BlockIdSet, BlockPartition};
        let (base, _) = catalog("c0_paired", &BTreeMap::new(), Precision::Exact).unwrap();
        let part = BlockPartition::singletons();
        let evens =
            FormalSeries::restricted(base.clone(), part.clone(), BlockIdSet::Evens);
        let eps = sample_haar(Seed::new(8), 32);
        // surviving terms are disjoint units: divergence for live signs
        assert_eq!(law_answer(&evens, Predicate::Weak, &eps).unwrap(), Some(false));
        assert_eq!(law_answer(&evens, Predicate::Bounded, &eps).unwrap(), Some(true));

        let finite = FormalSeries::restricted(
            base,
            part,
            BlockIdSet::Explicit([0usize, 4].into_iter().collect()),
        );
        assert_eq!(law_answer(&finite, Predicate::Strong, &eps).unwrap(), Some(true));
    }
}

//! Finite-budget detectors for the three summability predicates: strong
//! (norm-Cauchy partial sums), weak against a countable functional family,
//! and bounded partial sums.
//!
//! A finite scan cannot decide an infinite-limit predicate, so verdicts are
//! three-valued and every verdict carries a certificate that an independent
//! routine can re-check.  Divergence is only asserted on the strength of an
//! analytic oracle or an exact obstruction; a finite witness without either
//! is reported with a `heuristic` flag.  When an oracle covers the input it
//! takes precedence over the scan, and the certificate records whether the
//! scan agreed: weak scans in particular can pass a tube around a truncated
//! partial sum whose coordinatewise limit lies outside the space, which no
//! finite family of functionals can see.
//!
//! Stabilization frontiers are searched on a dyadic grid up to n_max/2, so a
//! scan-level "converged" always leaves half the budget as verification
//! margin.  Fine tolerances routinely stabilize far beyond any feasible
//! budget (an orthogonal diagonal with unit exponent needs M of the order
//! 1/eps^2); those entries are certified by the oracle's closed-form tail
//! bound instead of by observation, and the re-checker validates the bound
//! rather than the scan.

use crate::catalog::{
    gap_floor, law_answer, stabilization_frontier, sup_bound, tail_bound, Predicate,
};
use crate::error::{LabError, Result};
use crate::norming::NormingFamily;
use crate::scalar::{ratio_to_f64, Scalar};
use crate::series::{partial_sum, CoefficientSeq, FormalSeries};
use crate::space::{Space, SpaceKind, Vector};
use crate::Precision;
use num::bigint::BigInt;
use num::rational::BigRational;
use num::Zero as NumZero;
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

/// Comparison slack for float-precision re-checks; exact precision uses
/// rational comparisons and ignores it.
const FLOAT_TOL: f64 = 1e-7;

fn ser_rationals<S: serde::Serializer>(
    v: &Vec<BigRational>,
    ser: S,
) -> std::result::Result<S::Ok, S::Error> {
    ser.collect_seq(v.iter().map(|r| r.to_string()))
}

#[derive(Clone, Debug, Serialize)]
pub struct Budget {
    /// Partial sums are scanned for N <= n_max.
    pub n_max: usize,
    /// Strictly decreasing positive tolerances, coarsest first.
    #[serde(serialize_with = "ser_rationals")]
    pub eps_grid: Vec<BigRational>,
    /// How many functionals of the norming family the weak scan consults.
    pub k_functionals: usize,
    /// How many candidate limits the weak scan tries per tolerance.
    pub candidate_count: usize,
    /// Norm level the bounded scan treats as numeric blow-up.
    pub blow_up: f64,
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            n_max: 4096,
            eps_grid: vec![rat(1, 2), rat(1, 8), rat(1, 64), rat(1, 512)],
            k_functionals: 256,
            candidate_count: 64,
            blow_up: 1024.0,
        }
    }
}

impl Budget {
    pub fn validate(&self) -> Result<()> {
        if self.n_max < 1 {
            return Err(LabError::Precondition("budget needs n_max >= 1".into()));
        }
        if self.eps_grid.is_empty() {
            return Err(LabError::Precondition("budget needs a nonempty eps grid".into()));
        }
        for w in self.eps_grid.windows(2) {
            if w[1] >= w[0] {
                return Err(LabError::Precondition(
                    "eps grid must be strictly decreasing".into(),
                ));
            }
        }
        if self.eps_grid.iter().any(|e| e <= &BigRational::zero()) {
            return Err(LabError::Precondition("eps grid must be strictly positive".into()));
        }
        if self.k_functionals < 1 || self.candidate_count < 1 {
            return Err(LabError::Precondition(
                "budget needs at least one functional and one candidate".into(),
            ));
        }
        if !(self.blow_up > 0.0) {
            return Err(LabError::Precondition("blow-up threshold must be positive".into()));
        }
        Ok(())
    }

    /// Scan-level claims must stabilize at or before this index, keeping the
    /// other half of the budget as verification window.
    pub fn margin(&self) -> usize {
        self.n_max / 2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Converged,
    Diverged,
    Undecided,
}

/// Per-tolerance record inside a strong stabilization certificate.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StabEntry {
    /// The scan saw every window starting past `frontier` stay within eps.
    Observed { eps: String, eps_f64: f64, frontier: usize, max_tail: f64 },
    /// Stabilization holds by the oracle's tail bound; the frontier hint may
    /// exceed any feasible scan horizon.
    OracleCertified { eps: String, eps_f64: f64, frontier_hint: Option<f64> },
}

/// Per-tolerance record inside a weak tube certificate.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeakEntry {
    /// Every scanned functional kept |trace - pairing(candidate)| within eps
    /// from the margin onward.
    Tube { eps: String, eps_f64: f64, candidate_truncation: Option<usize>, max_dev: f64 },
    OracleCertified { eps: String, eps_f64: f64 },
}

/// What the weak detector reports as the limit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitRef {
    Zero,
    Truncation(usize),
    Unresolved,
}

/// A window whose norm provably reaches `level`.  Indices are inclusive on
/// both ends.  For sup-norm spaces without exactly computable norms the
/// witness carries a rational evaluation point; |value at the point| is an
/// exact lower bound for the window's norm.
#[derive(Clone, Debug, Serialize)]
pub struct GapWitness {
    pub lo: usize,
    pub hi: usize,
    pub observed: f64,
    pub level: String,
    pub level_f64: f64,
    pub at_point: Option<String>,
    pub exact_value: Option<String>,
}

/// A tolerance the scan could not resolve, with the best value it reached.
#[derive(Clone, Debug, Serialize)]
pub struct EpsFail {
    pub eps: String,
    pub eps_f64: f64,
    pub best: f64,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Certificate {
    StrongStabilization {
        entries: Vec<StabEntry>,
        limit_truncation: usize,
        limit_norm: f64,
        oracle: Option<String>,
        scan_agrees: bool,
    },
    StrongGap {
        witness: GapWitness,
        oracle: Option<String>,
        /// Analytic level that window gaps approach beyond every frontier,
        /// when the oracle provides one.
        gap_floor: Option<f64>,
        heuristic: bool,
        frontiers_with_gap: usize,
        frontiers_tested: usize,
    },
    StrongExhausted {
        stabilized: Vec<StabEntry>,
        unresolved: Vec<EpsFail>,
        oracle_incomplete: bool,
    },
    WeakTube {
        entries: Vec<WeakEntry>,
        frontier: usize,
        functionals_checked: usize,
        limit: LimitRef,
        oracle: Option<String>,
        scan_agrees: bool,
    },
    /// Two trace values of one functional past the margin separated by more
    /// than 2*eps: no single limit can sit within eps of both.
    WeakObstruction {
        functional_index: usize,
        n_lo: usize,
        n_hi: usize,
        value_lo: f64,
        value_hi: f64,
        exact_lo: Option<String>,
        exact_hi: Option<String>,
        separation: f64,
        eps: String,
        eps_f64: f64,
        oracle: Option<String>,
    },
    /// The oracle refutes weak summability; the scan may nonetheless have
    /// found a tube around a truncation, which is exactly the blind spot of
    /// finitely many functionals.
    WeakRefuted {
        oracle: String,
        reason: String,
        scan_found_tube: bool,
    },
    WeakExhausted {
        succeeded: Vec<WeakEntry>,
        failed: Vec<EpsFail>,
        functionals_checked: usize,
        oracle_incomplete: bool,
    },
    BoundedBy {
        observed_max: f64,
        at_index: usize,
        /// Certified uniform bound; `None` when only the observation stands.
        bound: Option<f64>,
        /// True when partial sums are constant past a known horizon inside
        /// the scan, making the observed maximum the exact supremum.
        exact_sup: bool,
        oracle: Option<String>,
    },
    BlowUp {
        observed_max: f64,
        at_index: usize,
        threshold: f64,
        oracle: Option<String>,
        heuristic: bool,
    },
    BoundedExhausted {
        observed_max: f64,
        at_index: usize,
        threshold: f64,
        oracle_says_unbounded: bool,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceVerdict {
    pub outcome: Outcome,
    pub certificate: Certificate,
    pub budget: Budget,
}

/// A tolerance in every representation the scans need.
struct EpsT {
    rat: BigRational,
    scalar: Scalar,
    f: f64,
    /// Threshold in norm-key units: squared on euclidean spaces.
    key: Scalar,
}

fn eps_triples(b: &Budget, space: &Space) -> Vec<EpsT> {
    b.eps_grid
        .iter()
        .map(|r| {
            let scalar = Scalar::from_rational(space.precision, r);
            let key = if space.is_euclidean() { scalar.sq() } else { scalar.clone() };
            EpsT { rat: r.clone(), scalar, f: ratio_to_f64(r), key }
        })
        .collect()
}

fn require_materialized(c: &CoefficientSeq, n_max: usize) -> Result<()> {
    if c.available_up_to(n_max) {
        Ok(())
    } else {
        Err(LabError::Precondition(format!(
            "coefficients must be materialized through index {n_max}; sample a longer prefix"
        )))
    }
}

/// Oracle answer split into (answer, incompleteness flag).
fn oracle_answer(s: &FormalSeries, pred: Predicate, c: &CoefficientSeq) -> Result<(Option<bool>, bool)> {
    match law_answer(s, pred, c) {
        Ok(v) => Ok((v, false)),
        Err(LabError::OracleIncomplete { .. }) => Ok((None, true)),
        Err(e) => Err(e),
    }
}

fn oracle_name(s: &FormalSeries) -> String {
    s.oracle_id().unwrap_or("unnamed").to_string()
}

/// Dyadic frontiers 0, 1, 2, 4, ... capped and completed at the margin.
fn frontier_grid(margin: usize) -> Vec<usize> {
    let mut g = vec![0, margin];
    let mut p = 1usize;
    while p < margin {
        g.push(p);
        p *= 2;
    }
    g.sort_unstable();
    g.dedup();
    g
}

/// Candidate truncation indices: 0, the dyadic frontiers, and an even fill,
/// all at or before the margin so every candidate leaves the same
/// verification window.
fn candidate_truncations(margin: usize, count: usize) -> Vec<usize> {
    let target = count.saturating_sub(1).max(1);
    let mut keep: BTreeSet<usize> = BTreeSet::new();
    keep.insert(0);
    keep.insert(margin);
    let mut p = 1usize;
    while p < margin && keep.len() < target {
        keep.insert(p);
        p *= 2;
    }
    let slots = target.saturating_sub(keep.len());
    for i in 1..=slots {
        if keep.len() >= target {
            break;
        }
        keep.insert(i * margin / (slots + 1));
    }
    keep.into_iter().collect()
}

/// Evaluation points for sup-norm observation on the interval: a uniform
/// dyadic comb plus points 2^{-1/m} where windows around index m peak.
fn monomial_points(n_max: usize) -> Vec<f64> {
    let mut pts: Vec<f64> = (0..=64).map(|j| j as f64 / 64.0).collect();
    let mut m = 1usize;
    loop {
        pts.push(0.5f64.powf(1.0 / m as f64));
        if m > n_max {
            break;
        }
        m *= 2;
    }
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts
}

fn eval_term_f64(v: &Vector, t: f64) -> f64 {
    v.coords().iter().map(|(k, c)| c.to_f64() * t.powi(*k as i32)).sum()
}

/// Maximum tail-window data for one frontier: the largest norm of
/// S_N - S_frontier over frontier < N <= n_max.
struct FrontierObs {
    frontier: usize,
    /// Exact norm-key of the maximum, when the space supports exact keys.
    key: Option<Scalar>,
    /// Norm-scale observation (for sup-norm spaces without exact keys this
    /// is a grid lower estimate).
    norm_f64: f64,
    arg_hi: usize,
    arg_point: Option<f64>,
}

fn obs_le(obs: &FrontierObs, eps: &EpsT) -> bool {
    match &obs.key {
        Some(k) => k.cmp_same(&eps.key) != Ordering::Greater,
        None => obs.norm_f64 <= eps.f,
    }
}

fn obs_ge(obs: &FrontierObs, eps: &EpsT) -> bool {
    match &obs.key {
        Some(k) => k.cmp_same(&eps.key) != Ordering::Less,
        None => obs.norm_f64 >= eps.f,
    }
}

/// One accumulation pass per frontier; exact norm keys throughout.
fn tail_scan_accum(
    s: &FormalSeries,
    c: &CoefficientSeq,
    grid: &[usize],
    n_max: usize,
) -> Result<Vec<FrontierObs>> {
    let space = *s.space();
    let euclid = space.is_euclidean();
    let mut out = Vec::with_capacity(grid.len());
    for &m in grid {
        let mut acc = crate::space::NormAccum::new(space);
        let mut best: Option<Scalar> = None;
        let mut arg = m + 1;
        for n in (m + 1)..=n_max {
            acc.add_scaled(&s.term(n)?, c.value(n)?)?;
            let k = acc.norm_key()?;
            if best.as_ref().map_or(true, |b| k.cmp_same(b) == Ordering::Greater) {
                best = Some(k);
                arg = n;
            }
        }
        let key = best.unwrap_or_else(|| Scalar::zero(space.precision));
        let norm_f64 = if euclid { key.to_f64().max(0.0).sqrt() } else { key.to_f64() };
        out.push(FrontierObs { frontier: m, key: Some(key), norm_f64, arg_hi: arg, arg_point: None });
    }
    Ok(out)
}

/// Single-pass grid scan for the sup-norm-of-polynomials space: windows are
/// measured as max |S_N(t) - S_M(t)| over the evaluation points, an exact
/// lower bound for the sup norm.
fn tail_scan_monomial(
    s: &FormalSeries,
    c: &CoefficientSeq,
    grid: &[usize],
    n_max: usize,
) -> Result<Vec<FrontierObs>> {
    let pts = monomial_points(n_max);
    let np = pts.len();
    let mut running = vec![0.0f64; np];
    let mut snaps: Vec<Option<Vec<f64>>> = vec![None; grid.len()];
    let mut best = vec![(0.0f64, 0usize, 0.0f64); grid.len()];
    for n in 0..=n_max {
        let term = s.term(n)?;
        let cv = c.value(n)?;
        if cv != 0 && !term.is_zero() {
            for (j, t) in pts.iter().enumerate() {
                running[j] += cv as f64 * eval_term_f64(&term, *t);
            }
        }
        for (gi, &m) in grid.iter().enumerate() {
            if m == n {
                snaps[gi] = Some(running.clone());
            } else if m < n {
                let snap = snaps[gi].as_ref().expect("snapshot taken when N passed the frontier");
                for j in 0..np {
                    let d = (running[j] - snap[j]).abs();
                    if d > best[gi].0 {
                        best[gi] = (d, n, pts[j]);
                    }
                }
            }
        }
    }
    Ok(grid
        .iter()
        .zip(best)
        .map(|(&m, (d, arg, pt))| FrontierObs {
            frontier: m,
            key: None,
            norm_f64: d,
            arg_hi: if arg > m { arg } else { m + 1 },
            arg_point: Some(pt),
        })
        .collect())
}

fn tail_scan(
    s: &FormalSeries,
    c: &CoefficientSeq,
    grid: &[usize],
    n_max: usize,
) -> Result<Vec<FrontierObs>> {
    if s.space().kind == SpaceKind::MonomialLinf {
        tail_scan_monomial(s, c, grid, n_max)
    } else {
        tail_scan_accum(s, c, grid, n_max)
    }
}

/// Largest grid tolerance the observation provably reaches, as a rational.
fn witness_level(observed: &FrontierObs, eps: &[EpsT]) -> BigRational {
    for e in eps {
        if obs_ge(observed, e) {
            return e.rat.clone();
        }
    }
    BigRational::zero()
}

/// Exact-point refinement of a sup-norm gap witness: picks a dyadic point
/// near the grid argmax and evaluates the window there exactly.
fn monomial_witness(
    s: &FormalSeries,
    c: &CoefficientSeq,
    lo: usize,
    hi: usize,
    near: f64,
    eps: &[EpsT],
) -> Result<(Option<String>, Option<String>, BigRational, f64)> {
    let p = s.space().precision;
    let s_hi = partial_sum(s, c, hi)?;
    let window = if lo == 0 { s_hi } else { s_hi.sub(&partial_sum(s, c, lo - 1)?)? };
    let denom = 4096i64;
    let base = (near * denom as f64).round() as i64;
    let mut best_val: Option<Scalar> = None;
    let mut best_q = rat(1, 2);
    for cand in [base - 1, base, base + 1] {
        let qn = cand.clamp(1, denom);
        let q = rat(qn, denom);
        let v = window.eval_at(&Scalar::from_rational(p, &q))?.abs();
        if best_val.as_ref().map_or(true, |b| v.cmp_same(b) == Ordering::Greater) {
            best_val = Some(v);
            best_q = q;
        }
    }
    let v = best_val.expect("three candidate points were evaluated");
    let mut level = BigRational::zero();
    for e in eps {
        if v.cmp_same(&e.scalar) != Ordering::Less {
            level = e.rat.clone();
            break;
        }
    }
    let exact = v.as_rational().map(|r| r.to_string());
    Ok((Some(best_q.to_string()), exact, level, v.to_f64()))
}

/// Strong summability scan: norm-Cauchy stabilization of the partial sums.
pub fn detect_strong(
    s: &FormalSeries,
    c: &CoefficientSeq,
    b: &Budget,
) -> Result<ConvergenceVerdict> {
    b.validate()?;
    require_materialized(c, b.n_max)?;
    let eps = eps_triples(b, s.space());
    let grid = frontier_grid(b.margin());
    let obs = tail_scan(s, c, &grid, b.n_max)?;

    // per-eps: first dyadic frontier whose whole tail window stays inside
    let found: Vec<Option<usize>> =
        eps.iter().map(|e| obs.iter().position(|o| obs_le(o, e))).collect();
    let scan_converged = found.iter().all(Option::is_some);
    let gap_count = obs.iter().filter(|o| obs_ge(o, &eps[0])).count();
    let persistent_gap = gap_count == obs.len();

    let (ans, incomplete) = oracle_answer(s, Predicate::Strong, c)?;

    let entries_for = |obs: &[FrontierObs], certify: bool| -> Vec<StabEntry> {
        eps.iter()
            .zip(&found)
            .filter_map(|(e, f)| match f {
                Some(i) => Some(StabEntry::Observed {
                    eps: e.rat.to_string(),
                    eps_f64: e.f,
                    frontier: obs[*i].frontier,
                    max_tail: obs[*i].norm_f64,
                }),
                None if certify => Some(StabEntry::OracleCertified {
                    eps: e.rat.to_string(),
                    eps_f64: e.f,
                    frontier_hint: stabilization_frontier(s, c, e.f),
                }),
                None => None,
            })
            .collect()
    };

    let gap_cert = |oracle: Option<String>, heuristic: bool| -> Result<Certificate> {
        let margin_obs = obs.last().expect("frontier grid is nonempty");
        let lo = margin_obs.frontier + 1;
        let hi = margin_obs.arg_hi;
        let (at_point, exact_value, level, observed) = match margin_obs.arg_point {
            Some(pt) if s.space().kind == SpaceKind::MonomialLinf => {
                monomial_witness(s, c, lo, hi, pt, &eps)?
            }
            _ => (None, None, witness_level(margin_obs, &eps), margin_obs.norm_f64),
        };
        Ok(Certificate::StrongGap {
            witness: GapWitness {
                lo,
                hi,
                observed,
                level: level.to_string(),
                level_f64: ratio_to_f64(&level),
                at_point,
                exact_value,
            },
            oracle,
            gap_floor: gap_floor(s, c),
            heuristic,
            frontiers_with_gap: gap_count,
            frontiers_tested: obs.len(),
        })
    };

    let verdict = |outcome, certificate| ConvergenceVerdict {
        outcome,
        certificate,
        budget: b.clone(),
    };

    match ans {
        Some(true) => {
            let limit_norm = partial_sum(s, c, b.n_max)?.norm_approx();
            Ok(verdict(
                Outcome::Converged,
                Certificate::StrongStabilization {
                    entries: entries_for(&obs, true),
                    limit_truncation: b.n_max,
                    limit_norm,
                    oracle: Some(oracle_name(s)),
                    scan_agrees: scan_converged,
                },
            ))
        }
        Some(false) => Ok(verdict(
            Outcome::Diverged,
            gap_cert(Some(oracle_name(s)), false)?,
        )),
        None if scan_converged => {
            let limit_norm = partial_sum(s, c, b.n_max)?.norm_approx();
            Ok(verdict(
                Outcome::Converged,
                Certificate::StrongStabilization {
                    entries: entries_for(&obs, false),
                    limit_truncation: b.n_max,
                    limit_norm,
                    oracle: None,
                    scan_agrees: true,
                },
            ))
        }
        None if persistent_gap => Ok(verdict(Outcome::Diverged, gap_cert(None, true)?)),
        None => {
            let unresolved = eps
                .iter()
                .zip(&found)
                .filter(|(_, f)| f.is_none())
                .map(|(e, _)| EpsFail {
                    eps: e.rat.to_string(),
                    eps_f64: e.f,
                    best: obs
                        .iter()
                        .map(|o| o.norm_f64)
                        .fold(f64::INFINITY, f64::min),
                })
                .collect();
            Ok(verdict(
                Outcome::Undecided,
                Certificate::StrongExhausted {
                    stabilized: entries_for(&obs, false),
                    unresolved,
                    oracle_incomplete: incomplete,
                },
            ))
        }
    }
}

/// Boundedness scan: the running maximum of partial-sum norms.
pub fn detect_bounded(
    s: &FormalSeries,
    c: &CoefficientSeq,
    b: &Budget,
) -> Result<ConvergenceVerdict> {
    b.validate()?;
    require_materialized(c, b.n_max)?;

    let (observed_max, at_max, first_exceed) = if s.space().kind == SpaceKind::MonomialLinf {
        let pts = monomial_points(b.n_max);
        let mut running = vec![0.0f64; pts.len()];
        let mut best = (0.0f64, 0usize);
        let mut exceed = None;
        for n in 0..=b.n_max {
            let term = s.term(n)?;
            let cv = c.value(n)?;
            if cv != 0 && !term.is_zero() {
                for (j, t) in pts.iter().enumerate() {
                    running[j] += cv as f64 * eval_term_f64(&term, *t);
                }
            }
            let m = running.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            if m > best.0 {
                best = (m, n);
            }
            if exceed.is_none() && m > b.blow_up {
                exceed = Some(n);
            }
        }
        (best.0, best.1, exceed)
    } else {
        let mut acc = crate::space::NormAccum::new(*s.space());
        let mut best_key: Option<Scalar> = None;
        let mut best = (0.0f64, 0usize);
        let mut exceed = None;
        for n in 0..=b.n_max {
            acc.add_scaled(&s.term(n)?, c.value(n)?)?;
            let k = acc.norm_key()?;
            if best_key.as_ref().map_or(true, |bk| k.cmp_same(bk) == Ordering::Greater) {
                let nf = if s.space().is_euclidean() {
                    k.to_f64().max(0.0).sqrt()
                } else {
                    k.to_f64()
                };
                best_key = Some(k);
                best = (nf, n);
            }
            if exceed.is_none() && best.0 > b.blow_up {
                exceed = Some(n);
            }
        }
        (best.0, best.1, exceed)
    };

    // partial sums freeze past this index, when one is known
    let horizon = match (s.max_index_hint(), c.support_end()) {
        (Some(h), Some(e)) => Some(h.min(e)),
        (Some(h), None) => Some(h),
        (None, Some(e)) => Some(e),
        (None, None) => None,
    };
    let exact_sup = horizon.is_some_and(|h| h <= b.n_max);

    let (ans, _incomplete) = oracle_answer(s, Predicate::Bounded, c)?;
    let exceeded = first_exceed.is_some();
    let verdict = |outcome, certificate| ConvergenceVerdict {
        outcome,
        certificate,
        budget: b.clone(),
    };

    match ans {
        Some(true) => Ok(verdict(
            Outcome::Converged,
            Certificate::BoundedBy {
                observed_max,
                at_index: at_max,
                bound: if exact_sup { Some(observed_max) } else { sup_bound(s, c) },
                exact_sup,
                oracle: Some(oracle_name(s)),
            },
        )),
        None if exact_sup => Ok(verdict(
            Outcome::Converged,
            Certificate::BoundedBy {
                observed_max,
                at_index: at_max,
                bound: Some(observed_max),
                exact_sup: true,
                oracle: None,
            },
        )),
        Some(false) if exceeded => Ok(verdict(
            Outcome::Diverged,
            Certificate::BlowUp {
                observed_max,
                at_index: first_exceed.expect("exceeded implies an index"),
                threshold: b.blow_up,
                oracle: Some(oracle_name(s)),
                heuristic: false,
            },
        )),
        None if exceeded => Ok(verdict(
            Outcome::Diverged,
            Certificate::BlowUp {
                observed_max,
                at_index: first_exceed.expect("exceeded implies an index"),
                threshold: b.blow_up,
                oracle: None,
                heuristic: true,
            },
        )),
        other => Ok(verdict(
            Outcome::Undecided,
            Certificate::BoundedExhausted {
                observed_max,
                at_index: at_max,
                threshold: b.blow_up,
                oracle_says_unbounded: other == Some(false),
            },
        )),
    }
}

struct WeakScanData {
    smax: Vec<Scalar>,
    smax_at: Vec<usize>,
    smin: Vec<Scalar>,
    smin_at: Vec<usize>,
    cand_pairings: BTreeMap<usize, Vec<Scalar>>,
}

fn weak_scan(
    s: &FormalSeries,
    c: &CoefficientSeq,
    fam: &NormingFamily,
    b: &Budget,
    cands: &[usize],
) -> Result<WeakScanData> {
    let p = s.space().precision;
    let margin = b.margin();
    let lams: Vec<_> = fam.iter().take(b.k_functionals).collect();
    let k = lams.len();
    let mut traces = vec![Scalar::zero(p); k];
    let mut data = WeakScanData {
        smax: Vec::new(),
        smax_at: vec![margin; k],
        smin: Vec::new(),
        smin_at: vec![margin; k],
        cand_pairings: BTreeMap::new(),
    };
    let cand_set: BTreeSet<usize> = cands.iter().copied().collect();
    for n in 0..=b.n_max {
        let cv = c.value(n)?;
        if cv != 0 {
            let term = s.term(n)?;
            if !term.is_zero() {
                for (i, lam) in lams.iter().enumerate() {
                    let pv = lam.pair(&term)?;
                    if !pv.is_zero() {
                        traces[i] = traces[i].add(&pv.scale_int(cv));
                    }
                }
            }
        }
        if cand_set.contains(&n) {
            data.cand_pairings.insert(n, traces.clone());
        }
        if n == margin {
            data.smax = traces.clone();
            data.smin = traces.clone();
        } else if n > margin {
            for i in 0..k {
                if traces[i].cmp_same(&data.smax[i]) == Ordering::Greater {
                    data.smax[i] = traces[i].clone();
                    data.smax_at[i] = n;
                }
                if traces[i].cmp_same(&data.smin[i]) == Ordering::Less {
                    data.smin[i] = traces[i].clone();
                    data.smin_at[i] = n;
                }
            }
        }
    }
    Ok(data)
}

/// Weak summability scan against the first functionals of `fam`: for each
/// tolerance, some candidate limit must keep every scanned trace inside its
/// tube from the margin onward.  Verdicts are relative to the supplied
/// family; a family that is not norming for the space still yields honest
/// tube/obstruction observations for its own functionals.
pub fn detect_weak(
    s: &FormalSeries,
    c: &CoefficientSeq,
    fam: &NormingFamily,
    b: &Budget,
) -> Result<ConvergenceVerdict> {
    b.validate()?;
    require_materialized(c, b.n_max)?;
    fam.space().same_as(s.space())?;
    let p = s.space().precision;
    let eps = eps_triples(b, s.space());
    let margin = b.margin();
    let cands = candidate_truncations(margin, b.candidate_count);
    let data = weak_scan(s, c, fam, b, &cands)?;
    let k = data.smax.len();
    let zero = Scalar::zero(p);

    // candidate search per eps: zero first, then truncations in order
    let tube_dev = |pairings: Option<&Vec<Scalar>>| -> Scalar {
        let mut worst = zero.clone();
        for i in 0..k {
            let lx = pairings.map_or_else(|| zero.clone(), |v| v[i].clone());
            let up = data.smax[i].sub(&lx);
            let dn = lx.sub(&data.smin[i]);
            let d = if up.cmp_same(&dn) == Ordering::Greater { up } else { dn };
            if d.cmp_same(&worst) == Ordering::Greater {
                worst = d;
            }
        }
        worst
    };
    let mut entries: Vec<WeakEntry> = Vec::new();
    let mut failed: Vec<EpsFail> = Vec::new();
    for e in &eps {
        let mut chosen: Option<(Option<usize>, f64)> = None;
        let mut best_dev = f64::INFINITY;
        let zdev = tube_dev(None);
        if zdev.cmp_same(&e.scalar) != Ordering::Greater {
            chosen = Some((None, zdev.to_f64()));
        } else {
            best_dev = best_dev.min(zdev.to_f64());
            for m in &cands {
                let d = tube_dev(data.cand_pairings.get(m));
                if d.cmp_same(&e.scalar) != Ordering::Greater {
                    chosen = Some((Some(*m), d.to_f64()));
                    break;
                }
                best_dev = best_dev.min(d.to_f64());
            }
        }
        match chosen {
            Some((cand, dev)) => entries.push(WeakEntry::Tube {
                eps: e.rat.to_string(),
                eps_f64: e.f,
                candidate_truncation: cand,
                max_dev: dev,
            }),
            None => failed.push(EpsFail { eps: e.rat.to_string(), eps_f64: e.f, best: best_dev }),
        }
    }
    let scan_converged = failed.is_empty();

    // exact obstruction at the coarsest tolerance
    let two_eps0 = eps[0].scalar.scale_int(2);
    let obstruction = (0..k).find(|&i| {
        data.smax[i].sub(&data.smin[i]).cmp_same(&two_eps0) == Ordering::Greater
    });

    let (ans, incomplete) = oracle_answer(s, Predicate::Weak, c)?;
    let verdict = |outcome, certificate| ConvergenceVerdict {
        outcome,
        certificate,
        budget: b.clone(),
    };
    let obstruction_cert = |i: usize, oracle: Option<String>| -> Certificate {
        let (a, b_) = (data.smin_at[i], data.smax_at[i]);
        let (n_lo, v_lo, n_hi, v_hi) = if a <= b_ {
            (a, data.smin[i].clone(), b_, data.smax[i].clone())
        } else {
            (b_, data.smax[i].clone(), a, data.smin[i].clone())
        };
        Certificate::WeakObstruction {
            functional_index: i,
            n_lo,
            n_hi,
            value_lo: v_lo.to_f64(),
            value_hi: v_hi.to_f64(),
            exact_lo: v_lo.as_rational().map(|r| r.to_string()),
            exact_hi: v_hi.as_rational().map(|r| r.to_string()),
            separation: data.smax[i].sub(&data.smin[i]).to_f64(),
            eps: eps[0].rat.to_string(),
            eps_f64: eps[0].f,
            oracle,
        }
    };
    let tube_cert = |entries: Vec<WeakEntry>, oracle: Option<String>, scan_agrees: bool| {
        let limit = entries
            .iter()
            .rev()
            .find_map(|en| match en {
                WeakEntry::Tube { candidate_truncation, .. } => Some(match candidate_truncation {
                    None => LimitRef::Zero,
                    Some(m) => LimitRef::Truncation(*m),
                }),
                WeakEntry::OracleCertified { .. } => None,
            })
            .unwrap_or(LimitRef::Unresolved);
        Certificate::WeakTube {
            entries,
            frontier: margin,
            functionals_checked: k,
            limit,
            oracle,
            scan_agrees,
        }
    };

    match ans {
        Some(true) => {
            let mut all = entries;
            for f in &failed {
                all.push(WeakEntry::OracleCertified { eps: f.eps.clone(), eps_f64: f.eps_f64 });
            }
            Ok(verdict(
                Outcome::Converged,
                tube_cert(all, Some(oracle_name(s)), scan_converged),
            ))
        }
        Some(false) => match obstruction {
            Some(i) => Ok(verdict(Outcome::Diverged, obstruction_cert(i, Some(oracle_name(s))))),
            None => Ok(verdict(
                Outcome::Diverged,
                Certificate::WeakRefuted {
                    oracle: oracle_name(s),
                    reason: "no element of the space matches the candidate limit; \
                             finitely many functionals cannot detect this"
                        .into(),
                    scan_found_tube: scan_converged,
                },
            )),
        },
        None if scan_converged => Ok(verdict(Outcome::Converged, tube_cert(entries, None, true))),
        None => match obstruction {
            Some(i) => Ok(verdict(Outcome::Diverged, obstruction_cert(i, None))),
            None => Ok(verdict(
                Outcome::Undecided,
                Certificate::WeakExhausted {
                    succeeded: entries,
                    failed,
                    functionals_checked: k,
                    oracle_incomplete: incomplete,
                },
            )),
        },
    }
}

// ---------------------------------------------------------------------------
// Independent re-checking.

/// Running partial sum with norms recomputed by elementary bookkeeping,
/// deliberately separate from the scan accumulator.
struct DirectSum {
    space: Space,
    coords: BTreeMap<usize, Scalar>,
    abs_sum: Scalar,
    sq_sum: Scalar,
    pts: Vec<f64>,
    vals: Vec<f64>,
}

impl DirectSum {
    fn new(space: Space, n_max: usize) -> Self {
        let pts = if space.kind == SpaceKind::MonomialLinf {
            monomial_points(n_max)
        } else {
            Vec::new()
        };
        let vals = vec![0.0; pts.len()];
        DirectSum {
            space,
            coords: BTreeMap::new(),
            abs_sum: Scalar::zero(space.precision),
            sq_sum: Scalar::zero(space.precision),
            pts,
            vals,
        }
    }

    fn add_term(&mut self, v: &Vector, k: i64) {
        if k == 0 {
            return;
        }
        for (i, s) in v.coords() {
            let delta = s.scale_int(k);
            let old = self
                .coords
                .remove(i)
                .unwrap_or_else(|| Scalar::zero(self.space.precision));
            let new = old.add(&delta);
            self.abs_sum = self.abs_sum.add(&new.abs()).sub(&old.abs());
            self.sq_sum = self.sq_sum.add(&new.sq()).sub(&old.sq());
            if !new.is_zero() {
                self.coords.insert(*i, new);
            }
        }
        for (j, t) in self.pts.iter().enumerate() {
            self.vals[j] += k as f64 * eval_term_f64(v, *t);
        }
    }

    fn sup(&self) -> Scalar {
        let mut m = Scalar::zero(self.space.precision);
        for c in self.coords.values() {
            m = m.max_same(c.abs());
        }
        m
    }

    fn exact_key(&self) -> Option<Scalar> {
        match self.space.kind {
            SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: crate::space::PNorm::One, .. } => {
                Some(self.abs_sum.clone())
            }
            SpaceKind::SeqL2
            | SpaceKind::TorusTrig
            | SpaceKind::FiniteDim { p: crate::space::PNorm::Two, .. } => Some(self.sq_sum.clone()),
            SpaceKind::SeqC0 | SpaceKind::FiniteDim { p: crate::space::PNorm::Inf, .. } => {
                Some(self.sup())
            }
            SpaceKind::MonomialLinf => None,
        }
    }

    fn norm_f64(&self) -> f64 {
        match self.exact_key() {
            Some(k) => {
                if self.space.is_euclidean() {
                    k.to_f64().max(0.0).sqrt()
                } else {
                    k.to_f64()
                }
            }
            None => self.vals.iter().fold(0.0f64, |a, v| a.max(v.abs())),
        }
    }

    /// norm <= eps, exactly where the space allows, with float slack
    /// elsewhere.
    fn le_eps(&self, e: &EpsT) -> bool {
        match self.exact_key() {
            Some(k) => k.cmp_same(&e.key) != Ordering::Greater,
            None => self.norm_f64() <= e.f + FLOAT_TOL,
        }
    }
}

fn eps_t(space: &Space, r: &BigRational) -> EpsT {
    let scalar = Scalar::from_rational(space.precision, r);
    let key = if space.is_euclidean() { scalar.sq() } else { scalar.clone() };
    EpsT { rat: r.clone(), scalar, f: ratio_to_f64(r), key }
}

fn parse_level(space: &Space, s: &str) -> Result<EpsT> {
    let r = crate::scalar::parse_rational(s)
        .ok_or_else(|| LabError::InvalidInput(format!("unparseable certificate level: {s}")))?;
    Ok(eps_t(space, &r))
}

fn recheck_stab_entry(
    s: &FormalSeries,
    c: &CoefficientSeq,
    n_max: usize,
    entry: &StabEntry,
) -> Result<bool> {
    match entry {
        StabEntry::Observed { eps, frontier, .. } => {
            let e = parse_level(s.space(), eps)?;
            let mut d = DirectSum::new(*s.space(), n_max);
            for n in (*frontier + 1)..=n_max {
                d.add_term(&s.term(n)?, c.value(n)?);
                if !d.le_eps(&e) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        StabEntry::OracleCertified { eps, frontier_hint, .. } => {
            if law_answer(s, Predicate::Strong, c).ok().flatten() != Some(true) {
                return Ok(false);
            }
            let e = parse_level(s.space(), eps)?;
            if let Some(bound) = frontier_hint.and_then(|m| tail_bound(s, c, m)) {
                return Ok(bound <= e.f * (1.0 + 1e-9));
            }
            Ok(true)
        }
    }
}

fn recheck_gap(
    s: &FormalSeries,
    c: &CoefficientSeq,
    w: &GapWitness,
    oracle: &Option<String>,
    heuristic: bool,
) -> Result<bool> {
    if w.lo > w.hi {
        return Err(LabError::InvalidInput("gap witness has lo > hi".into()));
    }
    if !heuristic
        && oracle.is_some()
        && law_answer(s, Predicate::Strong, c).ok().flatten() != Some(false)
    {
        return Ok(false);
    }
    let level = parse_level(s.space(), &w.level)?;
    if level.rat.is_zero() {
        return Ok(true);
    }
    let s_hi = partial_sum(s, c, w.hi)?;
    let window = if w.lo == 0 { s_hi } else { s_hi.sub(&partial_sum(s, c, w.lo - 1)?)? };
    if let Some(q) = &w.at_point {
        let qr = crate::scalar::parse_rational(q)
            .ok_or_else(|| LabError::InvalidInput(format!("unparseable witness point: {q}")))?;
        let qs = Scalar::from_rational(s.space().precision, &qr);
        let v = window.eval_at(&qs)?.abs();
        return Ok(v.cmp_same(&level.scalar) != Ordering::Less);
    }
    match window.norm_cmp(&level.scalar) {
        Ok(ord) => Ok(ord != Ordering::Less),
        Err(_) => Ok(window.norm_approx() >= level.f - FLOAT_TOL),
    }
}

fn recheck_weak_traces(
    s: &FormalSeries,
    c: &CoefficientSeq,
    fam: &NormingFamily,
    n_max: usize,
    k: usize,
    frontier: usize,
    entries: &[(Option<usize>, EpsT)],
) -> Result<bool> {
    let p = s.space().precision;
    let lams: Vec<_> = fam.iter().take(k).collect();
    let mut traces = vec![Scalar::zero(p); lams.len()];
    let mut snaps: BTreeMap<usize, Vec<Scalar>> = BTreeMap::new();
    let wanted: BTreeSet<usize> = entries.iter().filter_map(|(m, _)| *m).collect();
    for n in 0..=n_max {
        let cv = c.value(n)?;
        if cv != 0 {
            let term = s.term(n)?;
            if !term.is_zero() {
                for (i, lam) in lams.iter().enumerate() {
                    let pv = lam.pair(&term)?;
                    if !pv.is_zero() {
                        traces[i] = traces[i].add(&pv.scale_int(cv));
                    }
                }
            }
        }
        if wanted.contains(&n) {
            snaps.insert(n, traces.clone());
        }
        if n >= frontier {
            for (m, e) in entries {
                for (i, t) in traces.iter().enumerate() {
                    let lx = match m {
                        None => Scalar::zero(p),
                        Some(mm) => match snaps.get(mm) {
                            Some(v) => v[i].clone(),
                            None => return Err(LabError::InvalidInput(
                                "tube candidate truncation lies beyond its frontier".into(),
                            )),
                        },
                    };
                    let dev = t.sub(&lx).abs();
                    let limit = if p == Precision::Exact {
                        e.scalar.clone()
                    } else {
                        Scalar::F64(e.f + FLOAT_TOL)
                    };
                    if dev.cmp_same(&limit) == Ordering::Greater {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

fn recheck_obstruction(
    s: &FormalSeries,
    c: &CoefficientSeq,
    fam: &NormingFamily,
    idx: usize,
    n_lo: usize,
    n_hi: usize,
    eps: &str,
) -> Result<bool> {
    let p = s.space().precision;
    let lam = fam.functional(idx);
    let mut trace = Scalar::zero(p);
    let (mut v_lo, mut v_hi) = (None, None);
    for n in 0..=n_lo.max(n_hi) {
        let cv = c.value(n)?;
        if cv != 0 {
            let pv = lam.pair(&s.term(n)?)?;
            if !pv.is_zero() {
                trace = trace.add(&pv.scale_int(cv));
            }
        }
        if n == n_lo {
            v_lo = Some(trace.clone());
        }
        if n == n_hi {
            v_hi = Some(trace.clone());
        }
    }
    let (a, b) = (v_lo.expect("loop reaches n_lo"), v_hi.expect("loop reaches n_hi"));
    let sep = a.sub(&b).abs();
    let e = parse_level(s.space(), eps)?;
    let two_eps = e.scalar.scale_int(2);
    Ok(sep.cmp_same(&two_eps) == Ordering::Greater)
}

/// Verifies a certificate against the series it was issued for, using fresh
/// elementary computations.  `Ok(false)` means the certificate's claims did
/// not survive; errors indicate structurally invalid certificates or missing
/// inputs (the weak certificates need the functional family).
///
/// Cost scales with n_max^2 coordinate updates in the worst case; re-check
/// at the budget you can afford to verify.
pub fn recheck_verdict(
    s: &FormalSeries,
    c: &CoefficientSeq,
    fam: Option<&NormingFamily>,
    v: &ConvergenceVerdict,
) -> Result<bool> {
    let b = &v.budget;
    b.validate()?;
    require_materialized(c, b.n_max)?;
    let need_fam = || {
        fam.ok_or_else(|| {
            LabError::Precondition("re-checking a weak certificate needs the functional family".into())
        })
    };
    match &v.certificate {
        Certificate::StrongStabilization { entries, oracle, .. } => {
            if oracle.is_some() && law_answer(s, Predicate::Strong, c).ok().flatten() != Some(true) {
                return Ok(false);
            }
            for e in entries {
                if !recheck_stab_entry(s, c, b.n_max, e)? {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Certificate::StrongGap { witness, oracle, heuristic, .. } => {
            recheck_gap(s, c, witness, oracle, *heuristic)
        }
        Certificate::StrongExhausted { .. } => Ok(true),
        Certificate::WeakTube { entries, frontier, functionals_checked, oracle, .. } => {
            let fam = need_fam()?;
            fam.space().same_as(s.space())?;
            if oracle.is_some() && law_answer(s, Predicate::Weak, c).ok().flatten() != Some(true) {
                return Ok(false);
            }
            let mut tube_entries = Vec::new();
            for e in entries {
                match e {
                    WeakEntry::Tube { eps, candidate_truncation, .. } => {
                        tube_entries.push((*candidate_truncation, parse_level(s.space(), eps)?));
                    }
                    WeakEntry::OracleCertified { .. } => {
                        if oracle.is_none() {
                            return Ok(false);
                        }
                    }
                }
            }
            recheck_weak_traces(s, c, fam, b.n_max, *functionals_checked, *frontier, &tube_entries)
        }
        Certificate::WeakObstruction { functional_index, n_lo, n_hi, eps, oracle, .. } => {
            let fam = need_fam()?;
            fam.space().same_as(s.space())?;
            if oracle.is_some() && law_answer(s, Predicate::Weak, c).ok().flatten() != Some(false) {
                return Ok(false);
            }
            recheck_obstruction(s, c, fam, *functional_index, *n_lo, *n_hi, eps)
        }
        Certificate::WeakRefuted { .. } => {
            Ok(law_answer(s, Predicate::Weak, c).ok().flatten() == Some(false))
        }
        Certificate::WeakExhausted { .. } => Ok(true),
        Certificate::BoundedBy { observed_max, bound, exact_sup, oracle, .. } => {
            if oracle.is_some() && law_answer(s, Predicate::Bounded, c).ok().flatten() != Some(true)
            {
                return Ok(false);
            }
            if *exact_sup {
                let horizon_ok = s
                    .max_index_hint()
                    .into_iter()
                    .chain(c.support_end())
                    .any(|h| h <= b.n_max);
                if !horizon_ok {
                    return Ok(false);
                }
            } else if oracle.is_none() {
                // nothing but an observation: no convergence claim to verify
                return Ok(false);
            }
            let mut d = DirectSum::new(*s.space(), b.n_max);
            let mut max = 0.0f64;
            for n in 0..=b.n_max {
                d.add_term(&s.term(n)?, c.value(n)?);
                max = max.max(d.norm_f64());
            }
            if (max - observed_max).abs() > FLOAT_TOL.max(1e-6 * observed_max.abs()) {
                return Ok(false);
            }
            if let Some(bd) = bound {
                if max > bd + FLOAT_TOL.max(1e-6 * bd.abs()) {
                    return Ok(false);
                }
            }
            Ok(true)
        }
        Certificate::BlowUp { at_index, threshold, oracle, heuristic, .. } => {
            if !heuristic
                && oracle.is_some()
                && law_answer(s, Predicate::Bounded, c).ok().flatten() != Some(false)
            {
                return Ok(false);
            }
            if *at_index > b.n_max {
                return Err(LabError::InvalidInput("blow-up index beyond budget".into()));
            }
            let norm = partial_sum(s, c, *at_index)?.norm_approx();
            Ok(norm > threshold - FLOAT_TOL)
        }
        Certificate::BoundedExhausted { .. } => Ok(true),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::catalog;
    use crate::norming::norming_family;
    use crate::sampling::{sample_haar, Seed};
    use crate::series::{BlockIdSet, BlockPartition};
    use std::collections::BTreeMap as Map;

    fn small_budget(n_max: usize) -> Budget {
        Budget { n_max, ..Budget::default() }
    }

    /// Haar signs materialized through index n_max inclusive.
    fn haar(seed: u64, n_max: usize) -> CoefficientSeq {
        sample_haar(Seed::new(seed), n_max + 1)
    }

    fn params_alpha(n: i64, d: i64) -> Map<String, BigRational> {
        Map::from([("alpha".to_string(), rat(n, d))])
    }

    fn all_one_selectors() -> CoefficientSeq {
        CoefficientSeq::selectors_all_one()
    }

    #[test]
    fn budget_validation_rejects_bad_grids() {
        let mut b = Budget::default();
        b.eps_grid = vec![];
        assert!(b.validate().is_err());
        b.eps_grid = vec![rat(1, 8), rat(1, 2)];
        assert!(b.validate().is_err());
        b.eps_grid = vec![rat(1, 2), rat(0, 1)];
        assert!(b.validate().is_err());
        assert!(Budget::default().validate().is_ok());
    }

    #[test]
    fn detectors_demand_materialized_coefficients() {
        let (s, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let short = sample_haar(Seed::new(1), 8);
        let b = small_budget(64);
        assert!(matches!(detect_strong(&s, &short, &b), Err(LabError::Precondition(_))));
    }

    #[test]
    fn strong_l2_unit_exponent_mixes_observed_and_certified_entries() {
        let (s, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let b = small_budget(256);
        let v = detect_strong(&s, &all_one_selectors(), &b).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::StrongStabilization { entries, oracle, scan_agrees, .. } = &v.certificate
        else {
            panic!("expected stabilization, got {:?}", v.certificate);
        };
        assert_eq!(oracle.as_deref(), Some("l2_tail"));
        assert!(!scan_agrees, "fine tolerances stabilize beyond the scan");
        assert!(matches!(entries[0], StabEntry::Observed { .. }));
        assert!(matches!(entries[3], StabEntry::OracleCertified { frontier_hint: Some(h), .. } if h > 256.0));
        assert!(recheck_verdict(&s, &all_one_selectors(), None, &v).unwrap());
    }

    #[test]
    fn strong_c0_basis_gap_is_one_unit_wide() {
        let (s, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let eps = haar(7, 64);
        let b = small_budget(64);
        let v = detect_strong(&s, &eps, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::StrongGap { witness, oracle, heuristic, frontiers_with_gap, frontiers_tested, .. } =
            &v.certificate
        else {
            panic!("expected gap, got {:?}", v.certificate);
        };
        // every single added basis vector is a unit gap
        assert_eq!(witness.lo, 33);
        assert_eq!(witness.hi, 33);
        assert!((witness.observed - 1.0).abs() < 1e-12);
        assert_eq!(witness.level, "1/2");
        assert_eq!(oracle.as_deref(), Some("c0_basis"));
        assert!(!heuristic);
        assert_eq!(frontiers_with_gap, frontiers_tested);
        assert!(recheck_verdict(&s, &eps, None, &v).unwrap());
    }

    #[test]
    fn strong_harmonic_l2_diverges_with_oracle() {
        let (s, _) = catalog("l2_diagonal", &params_alpha(1, 2), Precision::Float64).unwrap();
        let eps = haar(3, 256);
        let v = detect_strong(&s, &eps, &small_budget(256)).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::StrongGap { witness, heuristic, .. } = &v.certificate else {
            panic!("expected gap");
        };
        assert!(!heuristic);
        assert_eq!(witness.level, "1/2");
        assert!(recheck_verdict(&s, &eps, None, &v).unwrap());
    }

    #[test]
    fn strong_l1_converges_by_scan_alone() {
        let (s, _) = catalog("l1_absolute", &Map::new(), Precision::Exact).unwrap();
        let v = detect_strong(&s, &all_one_selectors(), &small_budget(64)).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::StrongStabilization { entries, scan_agrees, .. } = &v.certificate else {
            panic!("expected stabilization");
        };
        assert!(scan_agrees);
        assert!(entries.iter().all(|e| matches!(e, StabEntry::Observed { .. })));
        assert!(recheck_verdict(&s, &all_one_selectors(), None, &v).unwrap());
    }

    #[test]
    fn strong_monomial_telescope_diverges_with_exact_point_witness() {
        let (s, _) = catalog("linf_monomial", &Map::new(), Precision::Exact).unwrap();
        let ones = CoefficientSeq::signs_all_plus();
        let v = detect_strong(&s, &ones, &small_budget(256)).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::StrongGap { witness, oracle, gap_floor, .. } = &v.certificate else {
            panic!("expected gap");
        };
        assert_eq!(oracle.as_deref(), Some("monomial"));
        assert_eq!(*gap_floor, Some(1.0));
        assert!(witness.at_point.is_some());
        assert!(witness.exact_value.is_some());
        assert_eq!(witness.level, "1/8");
        assert!(witness.observed > 0.2);
        assert!(recheck_verdict(&s, &ones, None, &v).unwrap());
    }

    #[test]
    fn strong_zero_series_converges_at_any_budget() {
        let s = FormalSeries::zero(Space::seq_c0(Precision::Exact));
        let eps = haar(9, 32);
        let v = detect_strong(&s, &eps, &small_budget(32)).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
    }

    /// A doubly restricted constant-term series: no oracle covers it, so
    /// only heuristic/obstruction paths can decide.  Surviving terms are e_0
    /// on the even indices.
    fn oracle_free_growing_series() -> FormalSeries {
        let e0 = Vector::basis(Space::seq_l2(Precision::Exact), 0).unwrap();
        let inner = FormalSeries::restricted(
            FormalSeries::repeated(e0),
            BlockPartition::singletons(),
            BlockIdSet::Evens,
        );
        FormalSeries::restricted(inner, BlockPartition::singletons(), BlockIdSet::Evens)
    }

    #[test]
    fn heuristic_paths_fire_without_an_oracle() {
        let s = oracle_free_growing_series();
        let ones = CoefficientSeq::signs_all_plus();
        let mut b = small_budget(128);
        b.blow_up = 16.0;

        let vs = detect_strong(&s, &ones, &b).unwrap();
        assert_eq!(vs.outcome, Outcome::Diverged);
        let Certificate::StrongGap { heuristic, oracle, .. } = &vs.certificate else {
            panic!("expected gap");
        };
        assert!(heuristic);
        assert!(oracle.is_none());
        assert!(recheck_verdict(&s, &ones, None, &vs).unwrap());

        let vb = detect_bounded(&s, &ones, &b).unwrap();
        assert_eq!(vb.outcome, Outcome::Diverged);
        let Certificate::BlowUp { heuristic, oracle, at_index, .. } = &vb.certificate else {
            panic!("expected blow-up");
        };
        assert!(heuristic);
        assert!(oracle.is_none());
        assert!(*at_index <= 33, "norm passes 16 once 16 copies of e_0 landed");
        assert!(recheck_verdict(&s, &ones, None, &vb).unwrap());

        let fam = norming_family(s.space()).unwrap();
        let vw = detect_weak(&s, &ones, &fam, &b).unwrap();
        assert_eq!(vw.outcome, Outcome::Diverged);
        let Certificate::WeakObstruction { oracle, functional_index, separation, .. } =
            &vw.certificate
        else {
            panic!("expected obstruction, got {:?}", vw.certificate);
        };
        assert!(oracle.is_none());
        assert_eq!(*functional_index, 0, "the first coordinate functional sees the growth");
        assert!(*separation > 1.0);
        assert!(recheck_verdict(&s, &ones, Some(&fam), &vw).unwrap());
    }

    #[test]
    fn bounded_repeat_vector_blows_up_with_oracle() {
        let e0 = Vector::basis(Space::seq_l1(Precision::Exact), 0).unwrap();
        let s = FormalSeries::repeated(e0);
        let mut b = small_budget(64);
        b.blow_up = 16.0;
        let v = detect_bounded(&s, &CoefficientSeq::signs_all_plus(), &b).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::BlowUp { at_index, oracle, heuristic, observed_max, .. } = &v.certificate
        else {
            panic!("expected blow-up");
        };
        // |S_N| = N + 1 crosses 16 at N = 16
        assert_eq!(*at_index, 16);
        assert_eq!(oracle.as_deref(), Some("repeat"));
        assert!(!heuristic);
        assert!((observed_max - 65.0).abs() < 1e-12);
        assert!(recheck_verdict(&s, &CoefficientSeq::signs_all_plus(), None, &v).unwrap());
    }

    #[test]
    fn bounded_c0_and_l2_report_certified_bounds() {
        let (c0, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let eps = haar(5, 64);
        let v = detect_bounded(&c0, &eps, &small_budget(64)).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::BoundedBy { observed_max, bound, .. } = &v.certificate else {
            panic!("expected bound");
        };
        assert!((observed_max - 1.0).abs() < 1e-12);
        assert_eq!(*bound, Some(1.0));
        assert!(recheck_verdict(&c0, &eps, None, &v).unwrap());

        let (l2, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let v2 = detect_bounded(&l2, &all_one_selectors(), &small_budget(128)).unwrap();
        assert_eq!(v2.outcome, Outcome::Converged);
        let Certificate::BoundedBy { observed_max, bound, .. } = &v2.certificate else {
            panic!("expected bound");
        };
        assert!(*observed_max <= bound.unwrap());
        assert!(recheck_verdict(&l2, &all_one_selectors(), None, &v2).unwrap());
    }

    #[test]
    fn bounded_finite_series_reports_exact_sup() {
        let space = Space::seq_l2(Precision::Exact);
        let vs = vec![
            Vector::from_ints(space, &[(0, 3)]).unwrap(),
            Vector::from_ints(space, &[(1, 4)]).unwrap(),
        ];
        let s = FormalSeries::from_vectors(space, vs).unwrap();
        let v = detect_bounded(&s, &all_one_selectors(), &small_budget(16)).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::BoundedBy { exact_sup, bound, observed_max, .. } = &v.certificate else {
            panic!("expected bound");
        };
        assert!(exact_sup);
        assert_eq!(*bound, Some(*observed_max));
        assert!((observed_max - 5.0).abs() < 1e-12);
    }

    #[test]
    fn weak_c0_basis_oracle_overrides_a_deceptive_tube() {
        let (s, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let fam = norming_family(s.space()).unwrap();
        let mut b = small_budget(64);
        b.k_functionals = 16;
        b.candidate_count = 8;
        let v = detect_weak(&s, &all_one_selectors(), &fam, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::WeakRefuted { oracle, scan_found_tube, .. } = &v.certificate else {
            panic!("expected oracle refutation, got {:?}", v.certificate);
        };
        assert_eq!(oracle, "c0_basis");
        assert!(
            scan_found_tube,
            "a truncation freezes every scanned coordinate, the classic finite-scan blind spot"
        );
        assert!(recheck_verdict(&s, &all_one_selectors(), Some(&fam), &v).unwrap());
    }

    #[test]
    fn weak_monomial_telescope_converges_to_zero() {
        let (s, _) = catalog("linf_monomial", &Map::new(), Precision::Exact).unwrap();
        let fam = crate::norming::monomial_test_family(s.space()).unwrap();
        let ones = CoefficientSeq::signs_all_plus();
        let mut b = small_budget(1024);
        b.k_functionals = 8;
        b.candidate_count = 4;
        let v = detect_weak(&s, &ones, &fam, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::WeakTube { limit, scan_agrees, entries, .. } = &v.certificate else {
            panic!("expected tube, got {:?}", v.certificate);
        };
        assert_eq!(*limit, LimitRef::Zero);
        assert!(scan_agrees, "pairings die like 1/N, within reach of this budget");
        assert!(entries.iter().all(|e| matches!(
            e,
            WeakEntry::Tube { candidate_truncation: None, .. }
        )));
        assert!(recheck_verdict(&s, &ones, Some(&fam), &v).unwrap());

        // the same input diverges strongly: the counterexample pair
        let vs = detect_strong(&s, &ones, &b).unwrap();
        assert_eq!(vs.outcome, Outcome::Diverged);
    }

    #[test]
    fn weak_zero_series_converges_to_zero() {
        let s = FormalSeries::zero(Space::seq_l2(Precision::Exact));
        let fam = norming_family(s.space()).unwrap();
        let mut b = small_budget(32);
        b.k_functionals = 8;
        let v = detect_weak(&s, &haar(2, 32), &fam, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Converged);
        let Certificate::WeakTube { limit, .. } = &v.certificate else { panic!("expected tube") };
        assert_eq!(*limit, LimitRef::Zero);
    }

    #[test]
    fn weak_rejects_family_from_another_space() {
        let (s, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let fam = norming_family(&Space::seq_l2(Precision::Exact)).unwrap();
        let err = detect_weak(&s, &all_one_selectors(), &fam, &small_budget(16));
        assert!(matches!(err, Err(LabError::SpaceMismatch { .. })));
    }

    #[test]
    fn weak_obstruction_cites_oracle_when_available() {
        let e0 = Vector::basis(Space::seq_l2(Precision::Exact), 0).unwrap();
        let s = FormalSeries::repeated(e0);
        let fam = norming_family(s.space()).unwrap();
        let mut b = small_budget(64);
        b.k_functionals = 8;
        let ones = CoefficientSeq::signs_all_plus();
        let v = detect_weak(&s, &ones, &fam, &b).unwrap();
        assert_eq!(v.outcome, Outcome::Diverged);
        let Certificate::WeakObstruction { oracle, exact_lo, exact_hi, .. } = &v.certificate else {
            panic!("expected obstruction, got {:?}", v.certificate);
        };
        assert_eq!(oracle.as_deref(), Some("repeat"));
        assert!(exact_lo.is_some() && exact_hi.is_some());
        assert!(recheck_verdict(&s, &ones, Some(&fam), &v).unwrap());
    }

    #[test]
    fn tampered_certificates_fail_the_recheck() {
        let (s, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let eps = haar(7, 64);
        let mut v = detect_strong(&s, &eps, &small_budget(64)).unwrap();
        if let Certificate::StrongGap { witness, .. } = &mut v.certificate {
            witness.level = "2".into();
            witness.level_f64 = 2.0;
        }
        assert!(!recheck_verdict(&s, &eps, None, &v).unwrap());

        let (l2, _) = catalog("l2_diagonal", &params_alpha(1, 1), Precision::Exact).unwrap();
        let mut v2 = detect_strong(&l2, &all_one_selectors(), &small_budget(256)).unwrap();
        if let Certificate::StrongStabilization { entries, .. } = &mut v2.certificate {
            if let StabEntry::Observed { frontier, .. } = &mut entries[0] {
                *frontier = 0;
            }
        }
        assert!(!recheck_verdict(&l2, &all_one_selectors(), None, &v2).unwrap());
    }

    #[test]
    fn verdicts_serialize_with_stable_field_names() {
        let (s, _) = catalog("c0_basis", &Map::new(), Precision::Exact).unwrap();
        let eps = haar(7, 64);
        let v = detect_strong(&s, &eps, &small_budget(64)).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["outcome"], "diverged");
        assert_eq!(json["certificate"]["kind"], "strong_gap");
        assert_eq!(json["certificate"]["witness"]["level"], "1/2");
        assert_eq!(json["budget"]["n_max"], 64);
        assert_eq!(json["budget"]["eps_grid"][0], "1/2");
    }

    #[test]
    fn frontier_and_candidate_grids_are_well_formed() {
        let g = frontier_grid(2048);
        assert_eq!(g.first(), Some(&0));
        assert_eq!(g.last(), Some(&2048));
        assert!(g.windows(2).all(|w| w[0] < w[1]));

        let cands = candidate_truncations(2048, 64);
        assert!(cands.contains(&0) && cands.contains(&2048));
        assert!(cands.len() <= 63);
        assert!(cands.iter().all(|&m| m <= 2048));

        assert_eq!(frontier_grid(0), vec![0]);
        assert_eq!(candidate_truncations(0, 4), vec![0]);
    }
}

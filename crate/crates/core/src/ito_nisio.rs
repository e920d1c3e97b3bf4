//! Exact finite checks of the symmetric-series toolkit, plus the
//! strong/weak dichotomy experiment.
//!
//! The enumeration checks walk the whole sign cube {-1,+1}^n, so their
//! results are theorems about the finite instance, not samples: Levy's
//! maximal inequality is counted exactly, and the sign-flip
//! equidistribution identity is verified as a multiset equality.  The
//! dichotomy experiment is statistical: it samples coefficient sequences,
//! runs the strong and weak detectors on each, and checks that the decided
//! fractions land at 0 or 1 - the finite-budget shadow of the zero-one law
//! for almost-sure convergence, and of the equivalence of strong and weak
//! almost-sure summability for symmetric series.

use crate::convergence::{detect_strong, detect_weak, Budget, Outcome};
use crate::error::{LabError, Result};
use crate::norming::NormingFamily;
use crate::sampling::{sample_haar, Seed};
use crate::scalar::Scalar;
use crate::series::FormalSeries;
use crate::space::Vector;
use crate::Precision;
use num::bigint::BigInt;
use num::rational::BigRational;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;

/// Sign cubes beyond this edge length are refused outright.
pub const ENUMERATION_CAP: usize = 20;

/// Decided fractions must land at or below this, or at or above its mirror,
/// for the dichotomy experiment to pass.
pub const DICHOTOMY_LOW: f64 = 0.01;
pub const DICHOTOMY_HIGH: f64 = 0.99;
/// An undecided fraction above this flags the whole report as inconclusive.
pub const UNDECIDED_CAP: f64 = 0.20;

/// Spawn parallel branches near the root of an enumeration this deep.
const PAR_DEPTH: usize = 3;

#[derive(Clone, Debug, Serialize)]
pub struct LevyReport {
    pub terms: usize,
    pub patterns: u64,
    /// Sign patterns with some partial sum of norm >= R.
    pub prefix_hits: u64,
    /// Sign patterns whose full sum has norm >= R.
    pub full_hits: u64,
    pub lhs: String,
    pub lhs_f64: f64,
    pub rhs: String,
    pub rhs_f64: f64,
    pub holds: bool,
}

#[derive(Clone, Copy, Default)]
struct LevyCounts {
    prefix: u64,
    full: u64,
}

impl LevyCounts {
    fn merge(self, other: LevyCounts) -> LevyCounts {
        LevyCounts { prefix: self.prefix + other.prefix, full: self.full + other.full }
    }
}

fn levy_walk(terms: &[Vector], r: &Scalar, i: usize, sum: &Vector, hit: bool) -> Result<LevyCounts> {
    if i == terms.len() {
        let full = sum.norm_cmp(r)? != Ordering::Less;
        return Ok(LevyCounts { prefix: hit as u64, full: full as u64 });
    }
    let branch = |sign: i64| -> Result<LevyCounts> {
        let next = sum.add_scaled_int(&terms[i], sign)?;
        let h = hit || next.norm_cmp(r)? != Ordering::Less;
        levy_walk(terms, r, i + 1, &next, h)
    };
    let (a, b) = if i < PAR_DEPTH && terms.len() - i >= 8 {
        rayon::join(|| branch(1), || branch(-1))
    } else {
        (branch(1), branch(-1))
    };
    Ok(a?.merge(b?))
}

/// Counts, over every sign pattern, how often some partial sum reaches norm
/// R versus how often the full sum does, and checks Levy's maximal
/// inequality
///
///   P[max_k ||S_k|| >= R]  <=  2 P[||S_n|| >= R]
///
/// with exact fractions.  Norm comparisons are exact wherever the space
/// supports them; spaces whose norms cannot be compared exactly in exact
/// precision propagate their norm error.
pub fn levy_check_exhaustive(terms: &[Vector], r: &Scalar) -> Result<LevyReport> {
    if terms.is_empty() {
        return Err(LabError::Precondition("the maximal inequality needs at least one term".into()));
    }
    if terms.len() > ENUMERATION_CAP {
        return Err(LabError::EnumerationTooLarge { len: terms.len(), cap: ENUMERATION_CAP });
    }
    let space = *terms[0].space();
    for t in terms {
        space.same_as(t.space())?;
    }
    if r.precision() != space.precision {
        return Err(LabError::Precondition("threshold precision must match the space".into()));
    }
    if r.is_negative() {
        return Err(LabError::Precondition("threshold must be nonnegative".into()));
    }
    let counts = levy_walk(terms, r, 0, &Vector::zero(space), false)?;
    let patterns = 1u64 << terms.len();
    let denom = BigInt::from(patterns);
    let lhs = BigRational::new(BigInt::from(counts.prefix), denom.clone());
    let rhs = BigRational::new(BigInt::from(2 * counts.full), denom);
    Ok(LevyReport {
        terms: terms.len(),
        patterns,
        prefix_hits: counts.prefix,
        full_hits: counts.full,
        lhs: lhs.to_string(),
        lhs_f64: crate::scalar::ratio_to_f64(&lhs),
        rhs: rhs.to_string(),
        rhs_f64: crate::scalar::ratio_to_f64(&rhs),
        holds: lhs <= rhs,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct EquidistReport {
    pub n: usize,
    pub m: usize,
    pub patterns: u64,
    pub multiset_equal: bool,
}

type CanonVec = Vec<(usize, BigRational)>;

fn canon(v: &Vector) -> CanonVec {
    v.coords()
        .iter()
        .map(|(i, s)| {
            let r = s.as_rational().expect("equidistribution runs in exact precision");
            (*i, r.clone())
        })
        .collect()
}

fn equidist_walk(
    terms: &[Vector],
    n: usize,
    m: usize,
    i: usize,
    sum: &Vector,
    snap: Option<&Vector>,
) -> Result<(Vec<CanonVec>, Vec<CanonVec>)> {
    if i == m + 1 {
        let snap = snap.expect("the snapshot exists once depth passed n");
        let flipped = sum.add_scaled_int(snap, -2)?;
        return Ok((vec![canon(sum)], vec![canon(&flipped)]));
    }
    let branch = |sign: i64| -> Result<(Vec<CanonVec>, Vec<CanonVec>)> {
        let next = sum.add_scaled_int(&terms[i], sign)?;
        let next_snap = if i == n { Some(&next) } else { snap };
        equidist_walk(terms, n, m, i + 1, &next, next_snap)
    };
    let (a, b) = if i < PAR_DEPTH && m + 1 - i >= 8 {
        rayon::join(|| branch(1), || branch(-1))
    } else {
        (branch(1), branch(-1))
    };
    let (mut a, b) = (a?, b?);
    a.0.extend(b.0);
    a.1.extend(b.1);
    Ok(a)
}

/// Enumerates all sign patterns of length M+1 and compares the multiset of
/// partial sums S_M with the multiset of S_M - 2 S_N.  Flipping the first
/// N+1 signs is a bijection of the cube that realizes the second form, so
/// equality is forced; this check verifies the identity exactly rather than
/// assuming it.  Exact precision only: multiset equality of floats is
/// meaningless.
pub fn equidistribution_check(terms: &[Vector], n: usize, m: usize) -> Result<EquidistReport> {
    if n > m {
        return Err(LabError::Precondition("equidistribution needs N <= M".into()));
    }
    if m + 1 > ENUMERATION_CAP {
        return Err(LabError::EnumerationTooLarge { len: m + 1, cap: ENUMERATION_CAP });
    }
    if terms.len() <= m {
        return Err(LabError::Precondition(format!(
            "need at least {} terms to form S_{m}",
            m + 1
        )));
    }
    let space = *terms[0].space();
    for t in terms {
        space.same_as(t.space())?;
    }
    if space.precision != Precision::Exact {
        return Err(LabError::Unsupported(
            "equidistribution is an exact multiset identity; use exact precision".into(),
        ));
    }
    let (mut plain, mut flipped) =
        equidist_walk(&terms[..=m], n, m, 0, &Vector::zero(space), None)?;
    plain.sort();
    flipped.sort();
    Ok(EquidistReport {
        n,
        m,
        patterns: 1u64 << (m + 1),
        multiset_equal: plain == flipped,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DichotomyReport {
    pub samples: usize,
    pub seed: Seed,
    pub strong_converged: usize,
    pub strong_diverged: usize,
    pub strong_undecided: usize,
    pub weak_converged: usize,
    pub weak_diverged: usize,
    pub weak_undecided: usize,
    /// Converged fraction among decided strong verdicts.
    pub frac_strong: f64,
    /// Converged fraction among decided weak verdicts.
    pub frac_weak: f64,
    /// Larger of the two sides' undecided fractions.
    pub frac_undecided: f64,
    /// Samples where both sides decided and disagreed.
    pub disagreements: usize,
    pub dichotomy_pass: bool,
    pub inconclusive: bool,
}

fn side_fraction(conv: usize, div: usize) -> Option<f64> {
    let decided = conv + div;
    if decided == 0 {
        None
    } else {
        Some(conv as f64 / decided as f64)
    }
}

fn at_extreme(f: f64) -> Option<bool> {
    if f >= DICHOTOMY_HIGH {
        Some(true)
    } else if f <= DICHOTOMY_LOW {
        Some(false)
    } else {
        None
    }
}

/// Samples sign sequences, runs the strong and weak detectors on each, and
/// checks the zero-one behaviour: the decided fractions must sit at an
/// extreme, and both detectors must sit at the same extreme.  Sample i uses
/// stream seed.stream + 1 + i, so reports are reproducible regardless of
/// how the parallel scheduler interleaves them.
pub fn dichotomy_experiment(
    s: &FormalSeries,
    samples: usize,
    b: &Budget,
    fam: &NormingFamily,
    seed: Seed,
) -> Result<DichotomyReport> {
    if samples < 100 {
        return Err(LabError::Precondition(
            "dichotomy statistics need at least 100 samples".into(),
        ));
    }
    b.validate()?;
    let outcomes: Vec<(Outcome, Outcome)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(Outcome, Outcome)> {
            let eps = sample_haar(seed.sample_stream(i), b.n_max + 1);
            let strong = detect_strong(s, &eps, b)?.outcome;
            let weak = detect_weak(s, &eps, fam, b)?.outcome;
            Ok((strong, weak))
        })
        .collect::<Result<_>>()?;

    let count = |side: fn(&(Outcome, Outcome)) -> Outcome, o: Outcome| {
        outcomes.iter().filter(|p| side(p) == o).count()
    };
    let sc = count(|p| p.0, Outcome::Converged);
    let sd = count(|p| p.0, Outcome::Diverged);
    let su = count(|p| p.0, Outcome::Undecided);
    let wc = count(|p| p.1, Outcome::Converged);
    let wd = count(|p| p.1, Outcome::Diverged);
    let wu = count(|p| p.1, Outcome::Undecided);
    let disagreements = outcomes
        .iter()
        .filter(|(a, w)| {
            *a != Outcome::Undecided && *w != Outcome::Undecided && a != w
        })
        .count();

    let fs = side_fraction(sc, sd);
    let fw = side_fraction(wc, wd);
    let frac_undecided = (su.max(wu)) as f64 / samples as f64;
    let inconclusive = frac_undecided > UNDECIDED_CAP || fs.is_none() || fw.is_none();
    let dichotomy_pass = match (fs, fw) {
        (Some(fs), Some(fw)) => match (at_extreme(fs), at_extreme(fw)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        },
        _ => false,
    };
    Ok(DichotomyReport {
        samples,
        seed,
        strong_converged: sc,
        strong_diverged: sd,
        strong_undecided: su,
        weak_converged: wc,
        weak_diverged: wd,
        weak_undecided: wu,
        frac_strong: fs.unwrap_or(f64::NAN),
        frac_weak: fw.unwrap_or(f64::NAN),
        frac_undecided,
        disagreements,
        dichotomy_pass,
        inconclusive,
    })
}

/// Terms x_0..x_k of a series as concrete vectors, for feeding the
/// enumeration checks.
pub fn terms_prefix(s: &FormalSeries, k: usize) -> Result<Vec<Vector>> {
    (0..=k).map(|n| s.term(n)).collect()
}

//! The unconditional-summability pipeline: detect failure of the
//! unconditional Cauchy property, extract disjoint finite blocks whose sums
//! keep a fixed norm, coarse-grain random signs over those blocks, and
//! demonstrate statistically that the coarse random series and its selector
//! subseries both fail weak summability almost surely.
//!
//! The chain mirrors the classical Orlicz-Pettis reduction: a series that
//! is not unconditionally Cauchy admits finite sets arbitrarily far out
//! whose sums have norm bounded below; grouping those sets as blocks and
//! flipping one sign per block produces a random series whose failure is a
//! tail event, hence almost sure.  None of this identifies a concrete bad
//! sign pattern; the experiments report fractions, not witnesses.

use crate::convergence::{detect_weak, Budget, Outcome};
use crate::error::{LabError, Result};
use crate::norming::NormingFamily;
use crate::sampling::{sample_coarse, Seed};
use crate::scalar::Scalar;
use crate::series::{BlockIdSet, BlockPartition, CoeffKind, CoeffTail, CoefficientSeq, FormalSeries};
use crate::space::Vector;
use crate::Precision;
use rayon::prelude::*;
use serde::Serialize;
use std::cmp::Ordering;
use std::sync::Arc;

/// Failure fractions at or above this level count as almost-sure failure at
/// desk scale.
pub const OP_PASS_LEVEL: f64 = 0.99;

fn check_delta(s: &FormalSeries, delta: &Scalar) -> Result<()> {
    if delta.precision() != s.space().precision {
        return Err(LabError::Precondition("delta precision must match the space".into()));
    }
    if delta.is_zero() || delta.is_negative() {
        return Err(LabError::Precondition("delta must be strictly positive".into()));
    }
    Ok(())
}

/// First contiguous window (from..=n) whose partial sum reaches norm delta,
/// checked after every added term so cancelling pairs are still caught at
/// the prefix that precedes the cancellation.
fn first_block_from(
    s: &FormalSeries,
    delta: &Scalar,
    from: usize,
    n_max: usize,
) -> Result<Option<Vec<usize>>> {
    let mut acc = crate::space::NormAccum::new(*s.space());
    for n in from..=n_max {
        acc.add_scaled(&s.term(n)?, 1)?;
        let reached = match acc.norm_cmp(delta) {
            Ok(ord) => ord != Ordering::Less,
            // grid evaluation is an exact lower bound for sup norms that
            // have no exact comparison, so >= delta stays a true claim
            Err(LabError::InexactNorm(_)) => acc.norm_approx() >= delta.to_f64(),
            Err(e) => return Err(e),
        };
        if reached {
            return Ok(Some((from..=n).collect()));
        }
    }
    Ok(None)
}

/// Searches (margin, n_max] for a finite index set whose term sum has norm
/// at least delta.  A return of `None` means the budget window holds no
/// such contiguous set: either the series is unconditionally summable past
/// the frontier, or the budget is too small to tell.  `Some(F)` is an
/// exactly verified norm lower bound, which is the finite signature of
/// unconditional-Cauchy failure.
pub fn unconditional_cauchy_scan(
    s: &FormalSeries,
    delta: &Scalar,
    b: &Budget,
) -> Result<Option<Vec<usize>>> {
    b.validate()?;
    check_delta(s, delta)?;
    first_block_from(s, delta, b.margin() + 1, b.n_max)
}

/// Extracts `count` pairwise disjoint finite blocks, in increasing index
/// order, each with term-sum norm at least delta.  Indices left unclaimed
/// become singleton blocks of the returned partition, so the induced map f
/// is total with finite fibers, and f restricted to the extracted blocks is
/// monotone.  Fewer than `count` blocks inside the budget is an error that
/// carries the partial extraction.
pub fn extract_blocks(
    s: &FormalSeries,
    delta: &Scalar,
    count: usize,
    b: &Budget,
) -> Result<BlockPartition> {
    b.validate()?;
    check_delta(s, delta)?;
    if count < 1 {
        return Err(LabError::Precondition("block count must be at least 1".into()));
    }
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(count);
    let mut from = 0usize;
    while blocks.len() < count {
        match first_block_from(s, delta, from, b.n_max)? {
            Some(f) => {
                from = f.last().expect("blocks are nonempty") + 1;
                blocks.push(f);
            }
            None => {
                return Err(LabError::BudgetExhausted {
                    blocks,
                    requested: count,
                    frontier: from,
                })
            }
        }
    }
    // invariant: emitted in increasing index order, so f is monotone on them
    assert!(
        blocks.windows(2).all(|w| w[0].last() < w[1].first()),
        "extraction must advance strictly"
    );
    BlockPartition::new(blocks)
}

#[derive(Clone, Debug, Serialize)]
pub struct OpReport {
    pub samples: usize,
    pub seed: Seed,
    /// Blocks of the partition whose id lies in T, re-verified here.
    pub tested_blocks: usize,
    /// Smallest verified block-sum norm among them.
    pub hypothesis_floor: f64,
    pub sigma_diverged: usize,
    pub sigma_converged: usize,
    pub sigma_undecided: usize,
    pub s_diverged: usize,
    pub s_converged: usize,
    pub s_undecided: usize,
    /// Diverged fraction of decided weak verdicts for the sign form.
    pub frac_sigma_fail_weak: f64,
    /// Same for the selector form.
    pub frac_s_fail_weak: f64,
    /// Samples where both forms decided and agreed.
    pub agreements: usize,
    pub pass: bool,
}

fn fail_fraction(div: usize, conv: usize) -> Option<f64> {
    let decided = div + conv;
    if decided == 0 {
        None
    } else {
        Some(div as f64 / decided as f64)
    }
}

/// Draws one sign per block, expands it over the partition, and runs the
/// weak detector on the coarse sign series and on its selector companion
///
///   sigma form:  sum of eps_{f(n)} x_n,     n with f(n) in T
///   S form:      sum of chi_{f(n)} x_n,     chi = (1 - eps)/2
///
/// The lower-bound hypothesis - every tested block of T sums to norm bounded
/// away from zero - is re-verified on the partition before sampling; a
/// partition whose blocks cancel (or with nothing to test) is refused,
/// which is exactly what happens when the series is unconditionally
/// summable and extraction never succeeded.
pub fn op_experiment(
    s: &FormalSeries,
    part: &Arc<BlockPartition>,
    t: &BlockIdSet,
    samples: usize,
    fam: &NormingFamily,
    b: &Budget,
    seed: Seed,
) -> Result<OpReport> {
    b.validate()?;
    if samples < 1 {
        return Err(LabError::Precondition("at least one sample".into()));
    }
    let mut tested = 0usize;
    let mut floor = f64::INFINITY;
    for (id, block) in part.blocks().iter().enumerate() {
        if !t.contains(id) {
            continue;
        }
        let mut sum = Vector::zero(*s.space());
        for &n in block {
            sum = sum.add_scaled_int(&s.term(n)?, 1)?;
        }
        if sum.is_zero() {
            return Err(LabError::Precondition(format!(
                "block {id} sums to zero; the block-norm lower bound fails"
            )));
        }
        tested += 1;
        floor = floor.min(sum.norm_approx());
    }
    if tested == 0 {
        return Err(LabError::Precondition(
            "no explicit block of the partition lies in T; the lower-bound hypothesis is untestable"
                .into(),
        ));
    }

    let restricted = FormalSeries::restricted(s.clone(), (**part).clone(), t.clone());
    let outcomes: Vec<(Outcome, Outcome)> = (0..samples)
        .into_par_iter()
        .map(|i| -> Result<(Outcome, Outcome)> {
            let eps = sample_coarse(seed.sample_stream(i), part, b.n_max + 1);
            let sigma = detect_weak(&restricted, &eps, fam, b)?.outcome;
            let chi = eps.chi_from_eps()?;
            let sform = detect_weak(&restricted, &chi, fam, b)?.outcome;
            Ok((sigma, sform))
        })
        .collect::<Result<_>>()?;

    let count = |side: fn(&(Outcome, Outcome)) -> Outcome, o: Outcome| {
        outcomes.iter().filter(|p| side(p) == o).count()
    };
    let sig_d = count(|p| p.0, Outcome::Diverged);
    let sig_c = count(|p| p.0, Outcome::Converged);
    let sig_u = count(|p| p.0, Outcome::Undecided);
    let sf_d = count(|p| p.1, Outcome::Diverged);
    let sf_c = count(|p| p.1, Outcome::Converged);
    let sf_u = count(|p| p.1, Outcome::Undecided);
    let agreements = outcomes
        .iter()
        .filter(|(a, w)| *a != Outcome::Undecided && *w != Outcome::Undecided && a == w)
        .count();
    let fs = fail_fraction(sig_d, sig_c);
    let ff = fail_fraction(sf_d, sf_c);
    let pass = matches!((fs, ff), (Some(a), Some(b)) if a >= OP_PASS_LEVEL && b >= OP_PASS_LEVEL);
    Ok(OpReport {
        samples,
        seed,
        tested_blocks: tested,
        hypothesis_floor: floor,
        sigma_diverged: sig_d,
        sigma_converged: sig_c,
        sigma_undecided: sig_u,
        s_diverged: sf_d,
        s_converged: sf_c,
        s_undecided: sf_u,
        frac_sigma_fail_weak: fs.unwrap_or(f64::NAN),
        frac_s_fail_weak: ff.unwrap_or(f64::NAN),
        agreements,
        pass,
    })
}

#[derive(Clone, Debug)]
pub struct FlipIdentity {
    /// Block-level signs with the T entries negated, materialized through
    /// every id used below the checked horizon.  The tail is only adjusted
    /// when the flip is expressible lazily (T = all, or finite T inside the
    /// materialized prefix); consume it through `checked_up_to`.
    pub eps_flipped: CoefficientSeq,
    pub checked_up_to: usize,
    pub holds: bool,
    pub max_residual: f64,
}

/// Flips the block signs on T and verifies, at every truncation N up to
/// n_max, the vector identity
///
///   S_N(eps') - S_N(eps) = -2 * S_N restricted to T (eps)
///
/// term by term against the actual series, restriction, and coarse
/// expansion.  Exact precision checks exact vector equality; float
/// precision tracks the residual norm.
pub fn subseries_flip_identity(
    s: &FormalSeries,
    part: &Arc<BlockPartition>,
    t: &BlockIdSet,
    eps_blocks: &CoefficientSeq,
    n_max: usize,
) -> Result<FlipIdentity> {
    if eps_blocks.kind() != CoeffKind::Signs {
        return Err(LabError::InvalidInput("block coefficients must be signs".into()));
    }
    let needed = (0..=n_max)
        .map(|n| part.f(n))
        .max()
        .expect("the index range is nonempty");
    if !eps_blocks.available_up_to(needed) {
        return Err(LabError::Precondition(format!(
            "block signs must be materialized through id {needed}"
        )));
    }
    let mut prefix = Vec::with_capacity(needed + 1);
    for id in 0..=needed {
        let v = eps_blocks.value(id)?;
        prefix.push(if t.contains(id) { -v } else { v });
    }
    let tail = match (t, eps_blocks.tail()) {
        (BlockIdSet::All, CoeffTail::One) => CoeffTail::MinusOne,
        (BlockIdSet::All, CoeffTail::MinusOne) => CoeffTail::One,
        (BlockIdSet::Explicit(ids), tail) if ids.iter().all(|&i| i <= needed) => tail,
        // sign-symmetric laws are flip-invariant; other combinations are
        // only valid through the materialized prefix
        (_, tail) => tail,
    };
    let eps_flipped = CoefficientSeq::signs(prefix, tail)?;

    let restricted = FormalSeries::restricted(s.clone(), (**part).clone(), t.clone());
    let c = CoefficientSeq::coarse(eps_blocks.clone(), part.clone());
    let cf = CoefficientSeq::coarse(eps_flipped.clone(), part.clone());
    let exact = s.space().precision == Precision::Exact;
    let mut residual = Vector::zero(*s.space());
    let mut max_residual = 0.0f64;
    let mut holds = true;
    for n in 0..=n_max {
        let x = s.term(n)?;
        let xt = restricted.term(n)?;
        residual = residual.add_scaled_int(&x, cf.value(n)? - c.value(n)?)?;
        residual = residual.add_scaled_int(&xt, 2 * c.value(n)?)?;
        if exact {
            if !residual.is_zero() {
                holds = false;
                max_residual = max_residual.max(residual.norm_approx());
            }
        } else {
            let r = residual.norm_approx();
            max_residual = max_residual.max(r);
            if r > 1e-9 {
                holds = false;
            }
        }
    }
    Ok(FlipIdentity { eps_flipped, checked_up_to: n_max, holds, max_residual })
}

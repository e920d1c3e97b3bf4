//! Formal series, coefficient sequences, block partitions, and the
//! sign/selector calculus connecting signed sums to selector sums.
//!
//! A `FormalSeries` is a pure generator n -> x_n in a declared space.  A
//! `CoefficientSeq` is an explicit prefix of integer values plus a tail
//! description: a deterministic constant or a sampling law.  Evaluating a
//! value beyond the materialized prefix of a law-tailed sequence is an
//! error: detectors only ever read the sampled range, while analytic
//! oracles reason from the law tag itself (the answers are almost-sure
//! statements and do not depend on any finite prefix).

use crate::error::{LabError, Result};
use crate::scalar::{Precision, Scalar};
use crate::space::{Space, Vector};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;
use serde::ser::SerializeSeq;
use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffKind {
    Signs,
    Selectors,
    Scalars,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LawTag {
    /// Independent uniform signs on {-1,+1}.
    Haar,
    /// Independent uniform selectors on {0,1}.
    Bernoulli,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoeffTail {
    Zero,
    One,
    MinusOne,
    Law(LawTag),
}

#[derive(Clone, Debug)]
enum CoeffData {
    Prefix(Arc<Vec<i64>>),
    /// value(n) = block_values(f(n)): the coarse expansion of a sequence
    /// indexed by block ids.
    Expanded {
        block_values: Arc<CoefficientSeq>,
        part: Arc<BlockPartition>,
    },
}

#[derive(Clone, Debug)]
pub struct CoefficientSeq {
    kind: CoeffKind,
    data: CoeffData,
    tail: CoeffTail,
}

fn check_value(kind: CoeffKind, v: i64) -> Result<()> {
    let ok = match kind {
        CoeffKind::Signs => v == 1 || v == -1,
        CoeffKind::Selectors => v == 0 || v == 1,
        CoeffKind::Scalars => true,
    };
    if ok {
        Ok(())
    } else {
        Err(LabError::InvalidInput(format!(
            "value {v} is out of range for {kind:?} coefficients"
        )))
    }
}

fn check_tail(kind: CoeffKind, tail: CoeffTail) -> Result<()> {
    let ok = match kind {
        CoeffKind::Signs => matches!(
            tail,
            CoeffTail::One | CoeffTail::MinusOne | CoeffTail::Law(LawTag::Haar)
        ),
        CoeffKind::Selectors => matches!(
            tail,
            CoeffTail::Zero | CoeffTail::One | CoeffTail::Law(LawTag::Bernoulli)
        ),
        CoeffKind::Scalars => !matches!(tail, CoeffTail::Law(_)),
    };
    if ok {
        Ok(())
    } else {
        Err(LabError::InvalidInput(format!(
            "tail {tail:?} does not fit {kind:?} coefficients"
        )))
    }
}

impl CoefficientSeq {
    pub fn new(kind: CoeffKind, prefix: Vec<i64>, tail: CoeffTail) -> Result<Self> {
        for &v in &prefix {
            check_value(kind, v)?;
        }
        check_tail(kind, tail)?;
        Ok(CoefficientSeq { kind, data: CoeffData::Prefix(Arc::new(prefix)), tail })
    }

    pub fn signs(prefix: Vec<i64>, tail: CoeffTail) -> Result<Self> {
        Self::new(CoeffKind::Signs, prefix, tail)
    }

    pub fn selectors(prefix: Vec<i64>, tail: CoeffTail) -> Result<Self> {
        Self::new(CoeffKind::Selectors, prefix, tail)
    }

    pub fn signs_all_plus() -> Self {
        Self::signs(Vec::new(), CoeffTail::One).expect("constant signs")
    }

    pub fn signs_all_minus() -> Self {
        Self::signs(Vec::new(), CoeffTail::MinusOne).expect("constant signs")
    }

    pub fn selectors_all_one() -> Self {
        Self::selectors(Vec::new(), CoeffTail::One).expect("constant selectors")
    }

    pub fn selectors_all_zero() -> Self {
        Self::selectors(Vec::new(), CoeffTail::Zero).expect("constant selectors")
    }

    /// Coarse expansion: n -> block_values(f(n)), constant on every block.
    pub fn coarse(block_values: CoefficientSeq, part: Arc<BlockPartition>) -> Self {
        CoefficientSeq {
            kind: block_values.kind,
            tail: block_values.tail,
            data: CoeffData::Expanded { block_values: Arc::new(block_values), part },
        }
    }

    pub fn kind(&self) -> CoeffKind {
        self.kind
    }

    pub fn tail(&self) -> CoeffTail {
        self.tail
    }

    /// The law governing the unmaterialized tail, if any.
    pub fn tail_law(&self) -> Option<LawTag> {
        match self.tail {
            CoeffTail::Law(l) => Some(l),
            _ => None,
        }
    }

    /// The coarse structure, if this sequence is a block expansion.
    pub fn expansion(&self) -> Option<(&CoefficientSeq, &Arc<BlockPartition>)> {
        match &self.data {
            CoeffData::Expanded { block_values, part } => Some((block_values, part)),
            CoeffData::Prefix(_) => None,
        }
    }

    pub fn value(&self, n: usize) -> Result<i64> {
        match &self.data {
            CoeffData::Prefix(p) => {
                if n < p.len() {
                    return Ok(p[n]);
                }
                match self.tail {
                    CoeffTail::Zero => Ok(0),
                    CoeffTail::One => Ok(1),
                    CoeffTail::MinusOne => Ok(-1),
                    CoeffTail::Law(_) => {
                        Err(LabError::CoefficientsUnavailable { index: n, len: p.len() })
                    }
                }
            }
            CoeffData::Expanded { block_values, part } => block_values.value(part.f(n)),
        }
    }

    /// True when value(m) is computable for every m <= n.
    pub fn available_up_to(&self, n: usize) -> bool {
        match &self.data {
            CoeffData::Prefix(p) => !matches!(self.tail, CoeffTail::Law(_)) || n < p.len(),
            CoeffData::Expanded { block_values, part } => {
                (0..=n).all(|m| block_values.available_up_to(part.f(m)))
            }
        }
    }

    /// Whether all but finitely many values are zero; None when the tail is
    /// a law (the almost-sure answer belongs to the analytic oracles).
    pub fn eventually_zero(&self) -> Option<bool> {
        match &self.data {
            CoeffData::Prefix(_) => match self.tail {
                CoeffTail::Zero => Some(true),
                CoeffTail::One | CoeffTail::MinusOne => Some(false),
                CoeffTail::Law(_) => None,
            },
            // f has finite fibers, so the expansion is eventually zero iff
            // the block values are
            CoeffData::Expanded { block_values, .. } => block_values.eventually_zero(),
        }
    }

    /// True when every value equals v, prefix and tail alike.
    pub fn is_constant(&self, v: i64) -> bool {
        match &self.data {
            CoeffData::Prefix(p) => {
                let tail_matches = match self.tail {
                    CoeffTail::Zero => v == 0,
                    CoeffTail::One => v == 1,
                    CoeffTail::MinusOne => v == -1,
                    CoeffTail::Law(_) => false,
                };
                tail_matches && p.iter().all(|&x| x == v)
            }
            // f is onto the id range, so the expansion is constant exactly
            // when the block values are
            CoeffData::Expanded { block_values, .. } => block_values.is_constant(v),
        }
    }

    /// An index bound with value(n) == 0 for all n beyond it; defined only
    /// when the sequence is known to be eventually zero.
    pub fn support_end(&self) -> Option<usize> {
        match &self.data {
            CoeffData::Prefix(p) => {
                if self.tail != CoeffTail::Zero {
                    return None;
                }
                Some(p.iter().rposition(|&v| v != 0).unwrap_or(0))
            }
            CoeffData::Expanded { block_values, part } => {
                let block_end = block_values.support_end()?;
                // ids up to block_end are the only ones that can carry a
                // nonzero value; take the largest index in their fibers
                let mut end = 0usize;
                for id in 0..=block_end {
                    for n in part.fiber(id) {
                        end = end.max(n);
                    }
                }
                Some(end)
            }
        }
    }

    /// chi_n = (1 - eps_n)/2, turning signs into selectors; the minus signs
    /// select.  Tails map One -> Zero, MinusOne -> One, Haar -> Bernoulli.
    pub fn chi_from_eps(&self) -> Result<CoefficientSeq> {
        if self.kind != CoeffKind::Signs {
            return Err(LabError::InvalidInput(
                "chi_from_eps needs sign coefficients".into(),
            ));
        }
        let tail = match self.tail {
            CoeffTail::One => CoeffTail::Zero,
            CoeffTail::MinusOne => CoeffTail::One,
            CoeffTail::Law(LawTag::Haar) => CoeffTail::Law(LawTag::Bernoulli),
            t => {
                return Err(LabError::InvalidInput(format!(
                    "sign sequence with impossible tail {t:?}"
                )))
            }
        };
        Ok(match &self.data {
            CoeffData::Prefix(p) => CoefficientSeq {
                kind: CoeffKind::Selectors,
                data: CoeffData::Prefix(Arc::new(p.iter().map(|v| (1 - v) / 2).collect())),
                tail,
            },
            CoeffData::Expanded { block_values, part } => CoefficientSeq {
                kind: CoeffKind::Selectors,
                data: CoeffData::Expanded {
                    block_values: Arc::new(block_values.chi_from_eps()?),
                    part: part.clone(),
                },
                tail,
            },
        })
    }
}

/// chi_n = (1 - eps_n)/2 as a free function.
pub fn chi_from_eps(eps: &CoefficientSeq) -> Result<CoefficientSeq> {
    eps.chi_from_eps()
}

/// An ordered list of pairwise disjoint finite nonempty index sets.  The
/// induced map f sends an index to its block's position; indices outside
/// every block get fresh singleton ids numbered after all blocks, in index
/// order, so f is total with finite fibers.
#[derive(Clone, Debug)]
pub struct BlockPartition {
    blocks: Vec<Vec<usize>>,
    owner: BTreeMap<usize, usize>,
    claimed: Vec<usize>,
}

impl Serialize for BlockPartition {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = ser.serialize_seq(Some(self.blocks.len()))?;
        for b in &self.blocks {
            seq.serialize_element(b)?;
        }
        seq.end()
    }
}

impl BlockPartition {
    pub fn new(blocks: Vec<Vec<usize>>) -> Result<Self> {
        let mut owner = BTreeMap::new();
        let mut sorted_blocks = Vec::with_capacity(blocks.len());
        for (id, block) in blocks.into_iter().enumerate() {
            if block.is_empty() {
                return Err(LabError::InvalidInput(format!("block {id} is empty")));
            }
            let mut b = block;
            b.sort_unstable();
            b.dedup();
            for &n in &b {
                if owner.insert(n, id).is_some() {
                    return Err(LabError::InvalidInput(format!(
                        "index {n} appears in two blocks"
                    )));
                }
            }
            sorted_blocks.push(b);
        }
        let claimed: Vec<usize> = owner.keys().copied().collect();
        Ok(BlockPartition { blocks: sorted_blocks, owner, claimed })
    }

    /// The empty block list: every index is its own singleton and f is the
    /// identity.
    pub fn singletons() -> Self {
        BlockPartition { blocks: Vec::new(), owner: BTreeMap::new(), claimed: Vec::new() }
    }

    pub fn num_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// Block id of n, or the fresh singleton id for unclaimed indices.
    pub fn f(&self, n: usize) -> usize {
        if let Some(&id) = self.owner.get(&n) {
            return id;
        }
        let claimed_below = self.claimed.partition_point(|&m| m < n);
        self.blocks.len() + (n - claimed_below)
    }

    /// The finite fiber f^{-1}(id).
    pub fn fiber(&self, id: usize) -> Vec<usize> {
        if id < self.blocks.len() {
            return self.blocks[id].clone();
        }
        // invert the singleton numbering: the rank among unclaimed indices
        let rank = id - self.blocks.len();
        let mut n = rank;
        loop {
            let claimed_below = self.claimed.partition_point(|&m| m <= n);
            let candidate = rank + claimed_below;
            if candidate == n {
                return vec![n];
            }
            n = candidate;
        }
    }
}

/// A decidable set of block ids.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BlockIdSet {
    All,
    Evens,
    Explicit(BTreeSet<usize>),
}

impl BlockIdSet {
    pub fn contains(&self, id: usize) -> bool {
        match self {
            BlockIdSet::All => true,
            BlockIdSet::Evens => id % 2 == 0,
            BlockIdSet::Explicit(s) => s.contains(&id),
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, BlockIdSet::Explicit(_))
    }
}

impl Serialize for BlockIdSet {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            BlockIdSet::All => ser.serialize_str("all"),
            BlockIdSet::Evens => ser.serialize_str("evens"),
            BlockIdSet::Explicit(s) => {
                let mut seq = ser.serialize_seq(Some(s.len()))?;
                for id in s {
                    seq.serialize_element(id)?;
                }
                seq.end()
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Terms {
    Zero,
    /// x_n = e_n / (n+1)^alpha.
    L2Diagonal { alpha: BigRational },
    /// x_n = (mode n) / (n+1)^alpha; partial-sum norms are the l2 norms of
    /// the mode coefficients.
    TorusDiagonal { alpha: BigRational },
    /// x_n = e_n * 2^{-n}, absolutely summable.
    L1Geometric,
    /// x_n = e_n.
    C0Basis,
    /// x_{2k} = e_k, x_{2k+1} = -e_k.
    C0Paired,
    /// x_n = v for every n; with nonvanishing coefficients the partial sums
    /// grow without bound, the stock example of an unbounded scan.
    RepeatVector(Arc<Vector>),
    /// x_0 = 1, x_n = t^n - t^{n-1}: the all-one partial sums telescope to
    /// t^N, which never converges in sup norm but pairs to zero against
    /// every integrable test functional.
    MonomialTelescope,
    Finite(Arc<Vec<Vector>>),
    Restricted {
        base: Arc<FormalSeries>,
        part: Arc<BlockPartition>,
        keep: BlockIdSet,
    },
}

/// A pure term generator n -> x_n in a fixed space, with an optional
/// analytic-oracle identifier and an optional index beyond which all terms
/// are zero.
#[derive(Clone, Debug)]
pub struct FormalSeries {
    space: Space,
    terms: Terms,
    oracle_id: Option<&'static str>,
    max_index_hint: Option<usize>,
}

impl FormalSeries {
    pub(crate) fn from_terms(
        space: Space,
        terms: Terms,
        oracle_id: Option<&'static str>,
        max_index_hint: Option<usize>,
    ) -> Self {
        FormalSeries { space, terms, oracle_id, max_index_hint }
    }

    pub fn zero(space: Space) -> Self {
        Self::from_terms(space, Terms::Zero, None, Some(0))
    }

    pub fn from_vectors(space: Space, vectors: Vec<Vector>) -> Result<Self> {
        for v in &vectors {
            space.same_as(v.space())?;
        }
        let hint = vectors.len().saturating_sub(1);
        Ok(Self::from_terms(space, Terms::Finite(Arc::new(vectors)), None, Some(hint)))
    }

    /// term(n) = v for every n.
    pub fn repeated(v: Vector) -> Self {
        let space = *v.space();
        Self::from_terms(space, Terms::RepeatVector(Arc::new(v)), Some("repeat"), None)
    }

    /// term(n) = x_n if f(n) lies in `keep`, else zero.
    pub fn restricted(base: FormalSeries, part: BlockPartition, keep: BlockIdSet) -> Self {
        let space = base.space;
        let oracle_id = base.oracle_id;
        let hint = base.max_index_hint;
        Self::from_terms(
            space,
            Terms::Restricted { base: Arc::new(base), part: Arc::new(part), keep },
            oracle_id,
            hint,
        )
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn oracle_id(&self) -> Option<&'static str> {
        self.oracle_id
    }

    pub fn max_index_hint(&self) -> Option<usize> {
        self.max_index_hint
    }

    pub(crate) fn terms(&self) -> &Terms {
        &self.terms
    }

    pub fn term(&self, n: usize) -> Result<Vector> {
        let p = self.space.precision;
        match &self.terms {
            Terms::Zero => Ok(Vector::zero(self.space)),
            Terms::L2Diagonal { alpha } | Terms::TorusDiagonal { alpha } => {
                let c = inverse_power(p, n, alpha)?;
                Vector::new(self.space, [(n, c)])
            }
            Terms::L1Geometric => {
                let c = match p {
                    Precision::Exact => Scalar::ratio(p, 1, 1i64 << n.min(62)),
                    Precision::Float64 => Scalar::F64(0.5f64.powi(n as i32)),
                };
                if n > 62 && p == Precision::Exact {
                    // 2^{-n} beyond i64: build from big integers
                    let den = BigInt::from(2).pow(n as u32);
                    let r = BigRational::new(BigInt::from(1), den);
                    return Vector::new(self.space, [(n, Scalar::from_rational(p, &r))]);
                }
                Vector::new(self.space, [(n, c)])
            }
            Terms::C0Basis => Vector::basis(self.space, n),
            Terms::C0Paired => {
                let k = n / 2;
                let sign = if n % 2 == 0 { 1 } else { -1 };
                Vector::from_ints(self.space, &[(k, sign)])
            }
            Terms::MonomialTelescope => {
                if n == 0 {
                    Vector::basis(self.space, 0)
                } else {
                    Vector::from_ints(self.space, &[(n, 1), (n - 1, -1)])
                }
            }
            Terms::RepeatVector(v) => Ok((**v).clone()),
            Terms::Finite(v) => Ok(v.get(n).cloned().unwrap_or_else(|| Vector::zero(self.space))),
            Terms::Restricted { base, part, keep } => {
                if keep.contains(part.f(n)) {
                    base.term(n)
                } else {
                    Ok(Vector::zero(self.space))
                }
            }
        }
    }
}

/// (n+1)^{-alpha} in the requested precision.  Exact mode requires integer
/// alpha >= 0 so the value is rational; catalog construction enforces this.
fn inverse_power(p: Precision, n: usize, alpha: &BigRational) -> Result<Scalar> {
    match p {
        Precision::Float64 => {
            let a = crate::scalar::ratio_to_f64(alpha);
            Ok(Scalar::F64(((n + 1) as f64).powf(-a)))
        }
        Precision::Exact => {
            if !alpha.is_integer() || alpha < &BigRational::from_integer(BigInt::from(0)) {
                return Err(LabError::InvalidInput(format!(
                    "exact diagonal terms need integer alpha >= 0, got {alpha}"
                )));
            }
            let k = alpha.to_integer().to_u32().ok_or_else(|| {
                LabError::InvalidInput("alpha too large for exact power".into())
            })?;
            let den = BigInt::from(n + 1).pow(k);
            let r = BigRational::new(BigInt::from(1), den);
            Ok(Scalar::from_rational(p, &r))
        }
    }
}

/// S_N = sum_{n=0}^{N} c(n) x_n, inclusive of index N.
pub fn partial_sum(s: &FormalSeries, c: &CoefficientSeq, n_inclusive: usize) -> Result<Vector> {
    let mut acc: BTreeMap<usize, Scalar> = BTreeMap::new();
    for n in 0..=n_inclusive {
        let k = c.value(n)?;
        if k == 0 {
            continue;
        }
        let x = s.term(n)?;
        for (i, v) in x.coords() {
            let add = v.scale_int(k);
            match acc.get_mut(i) {
                Some(cur) => *cur = cur.add(&add),
                None => {
                    acc.insert(*i, add);
                }
            }
        }
    }
    Vector::new(*s.space(), acc)
}

/// The selector decomposition of a sign sequence: plus = (1+eps)/2 selects
/// the +1 positions, minus = (1-eps)/2 the -1 positions, materialized
/// through index `upto`.  The signed sum is exactly the difference of the
/// two selector sums, asserted by `verify_sigma_identity`.
pub struct SignSplit {
    pub plus: CoefficientSeq,
    pub minus: CoefficientSeq,
    pub upto: usize,
}

pub fn sigma_from_s(eps: &CoefficientSeq, upto: usize) -> Result<SignSplit> {
    if eps.kind() != CoeffKind::Signs {
        return Err(LabError::InvalidInput("sigma_from_s needs sign coefficients".into()));
    }
    let mut plus = Vec::with_capacity(upto + 1);
    let mut minus = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        let v = eps.value(n)?;
        plus.push((1 + v) / 2);
        minus.push((1 - v) / 2);
    }
    let (pt, mt) = match eps.tail() {
        CoeffTail::One => (CoeffTail::One, CoeffTail::Zero),
        CoeffTail::MinusOne => (CoeffTail::Zero, CoeffTail::One),
        CoeffTail::Law(LawTag::Haar) => {
            (CoeffTail::Law(LawTag::Bernoulli), CoeffTail::Law(LawTag::Bernoulli))
        }
        t => return Err(LabError::InvalidInput(format!("sign tail {t:?} is impossible"))),
    };
    Ok(SignSplit {
        plus: CoefficientSeq::selectors(plus, pt)?,
        minus: CoefficientSeq::selectors(minus, mt)?,
        upto,
    })
}

/// The sign decomposition of a selector sequence: the all-one signs and the
/// centered signs 2*chi - 1.  The selector sum is exactly half the sum of
/// the two signed sums, asserted by `verify_selector_identity`.
pub struct SelectorSplit {
    pub ones: CoefficientSeq,
    pub centered: CoefficientSeq,
    pub upto: usize,
}

pub fn s_from_sigma(chi: &CoefficientSeq, upto: usize) -> Result<SelectorSplit> {
    if chi.kind() != CoeffKind::Selectors {
        return Err(LabError::InvalidInput("s_from_sigma needs selector coefficients".into()));
    }
    let mut centered = Vec::with_capacity(upto + 1);
    for n in 0..=upto {
        centered.push(2 * chi.value(n)? - 1);
    }
    let ct = match chi.tail() {
        CoeffTail::One => CoeffTail::One,
        CoeffTail::Zero => CoeffTail::MinusOne,
        CoeffTail::Law(LawTag::Bernoulli) => CoeffTail::Law(LawTag::Haar),
        t => return Err(LabError::InvalidInput(format!("selector tail {t:?} is impossible"))),
    };
    Ok(SelectorSplit {
        ones: CoefficientSeq::signs_all_plus(),
        centered: CoefficientSeq::signs(centered, ct)?,
        upto,
    })
}

/// Exact check of the signed/selector sum identity at truncation `n`.
pub fn verify_sigma_identity(s: &FormalSeries, eps: &CoefficientSeq, n: usize) -> Result<bool> {
    let split = sigma_from_s(eps, n)?;
    let lhs = partial_sum(s, eps, n)?;
    let rhs = partial_sum(s, &split.plus, n)?.sub(&partial_sum(s, &split.minus, n)?)?;
    Ok(lhs == rhs)
}

/// Exact check of the selector/signed half-sum identity at truncation `n`.
pub fn verify_selector_identity(s: &FormalSeries, chi: &CoefficientSeq, n: usize) -> Result<bool> {
    let split = s_from_sigma(chi, n)?;
    let lhs = partial_sum(s, chi, n)?;
    let half = Scalar::ratio(s.space().precision, 1, 2);
    let rhs = partial_sum(s, &split.ones, n)?
        .add(&partial_sum(s, &split.centered, n)?)?
        .scale(&half)?;
    Ok(lhs == rhs)
}

/// n -> c(f(n)): expand block-indexed coefficients to index space.
pub fn coarse_coefficients(c: &CoefficientSeq, part: &Arc<BlockPartition>) -> CoefficientSeq {
    CoefficientSeq::coarse(c.clone(), part.clone())
}

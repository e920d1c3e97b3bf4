//! The concrete separable spaces, their vectors, and dual-ball functionals.
//!
//! Sequence spaces (`SeqL1`, `SeqL2`, `SeqC0`, `FiniteDim`, `TorusTrig`) store
//! vectors as sparse coordinate maps.  `MonomialLinf` is the analytic model
//! space: vectors are polynomial coefficient lists over the powers of t on
//! [0,1], the norm is the sup norm (exact only for monomials), and functionals
//! are integration against indicators or polynomial densities.  That space
//! deliberately has no norming family; it exists to show what breaks without
//! one.

use crate::error::{LabError, Result};
use crate::scalar::{exact_sqrt, Precision, Scalar};
use serde::Serialize;
use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

/// Norm exponent for `FiniteDim`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PNorm {
    One,
    Two,
    Inf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpaceKind {
    SeqL1,
    SeqL2,
    SeqC0,
    FiniteDim { dim: usize, p: PNorm },
    MonomialLinf,
    TorusTrig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Space {
    pub kind: SpaceKind,
    pub precision: Precision,
}

impl Space {
    pub fn seq_l1(precision: Precision) -> Self {
        Space { kind: SpaceKind::SeqL1, precision }
    }
    pub fn seq_l2(precision: Precision) -> Self {
        Space { kind: SpaceKind::SeqL2, precision }
    }
    pub fn seq_c0(precision: Precision) -> Self {
        Space { kind: SpaceKind::SeqC0, precision }
    }
    pub fn finite_dim(dim: usize, p: PNorm, precision: Precision) -> Result<Self> {
        if dim == 0 {
            return Err(LabError::InvalidInput("dimension must be positive".into()));
        }
        Ok(Space { kind: SpaceKind::FiniteDim { dim, p }, precision })
    }
    pub fn monomial_linf(precision: Precision) -> Self {
        Space { kind: SpaceKind::MonomialLinf, precision }
    }
    pub fn torus_trig(precision: Precision) -> Self {
        Space { kind: SpaceKind::TorusTrig, precision }
    }

    /// Squared-norm spaces, where exact work happens on norm squares.
    pub fn is_euclidean(&self) -> bool {
        matches!(
            self.kind,
            SpaceKind::SeqL2 | SpaceKind::TorusTrig | SpaceKind::FiniteDim { p: PNorm::Two, .. }
        )
    }

    pub fn check_index(&self, index: usize) -> Result<()> {
        if let SpaceKind::FiniteDim { dim, .. } = self.kind {
            if index >= dim {
                return Err(LabError::DimensionExceeded { index, dim });
            }
        }
        Ok(())
    }

    pub fn same_as(&self, other: &Space) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(LabError::SpaceMismatch {
                expected: self.to_string(),
                found: other.to_string(),
            })
        }
    }
}

impl fmt::Display for Space {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SpaceKind::SeqL1 => "SeqL1".into(),
            SpaceKind::SeqL2 => "SeqL2".into(),
            SpaceKind::SeqC0 => "SeqC0".into(),
            SpaceKind::FiniteDim { dim, p } => format!("FiniteDim({dim},{p:?})"),
            SpaceKind::MonomialLinf => "MonomialLinf".into(),
            SpaceKind::TorusTrig => "TorusTrig".into(),
        };
        let prec = match self.precision {
            Precision::Exact => "exact",
            Precision::Float64 => "f64",
        };
        write!(f, "{kind}[{prec}]")
    }
}

/// Grid size for the sup-norm scan on general polynomials (float mode only).
const POLY_SCAN_GRID: usize = 2048;
const POLY_REFINE_STEPS: usize = 60;

/// A sparse vector.  Coordinates are basis coefficients for the sequence
/// spaces, polynomial coefficients over powers of t for `MonomialLinf`, and
/// trigonometric mode coefficients for `TorusTrig`.  No zero entries stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Vector {
    space: Space,
    coords: BTreeMap<usize, Scalar>,
}

impl Vector {
    pub fn new(space: Space, entries: impl IntoIterator<Item = (usize, Scalar)>) -> Result<Self> {
        let mut coords = BTreeMap::new();
        for (i, s) in entries {
            space.check_index(i)?;
            if s.precision() != space.precision {
                return Err(LabError::InvalidInput(format!(
                    "scalar precision does not match {space}"
                )));
            }
            if !s.is_zero() {
                coords.insert(i, s);
            }
        }
        Ok(Vector { space, coords })
    }

    pub fn zero(space: Space) -> Self {
        Vector { space, coords: BTreeMap::new() }
    }

    /// Unit basis vector: e_i, the monomial t^i, or the i-th mode.
    pub fn basis(space: Space, i: usize) -> Result<Self> {
        space.check_index(i)?;
        let mut coords = BTreeMap::new();
        coords.insert(i, Scalar::from_int(space.precision, 1));
        Ok(Vector { space, coords })
    }

    pub fn from_ints(space: Space, entries: &[(usize, i64)]) -> Result<Self> {
        Vector::new(
            space,
            entries.iter().map(|&(i, v)| (i, Scalar::from_int(space.precision, v))),
        )
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn coords(&self) -> &BTreeMap<usize, Scalar> {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn support_end(&self) -> usize {
        self.coords.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn add(&self, other: &Vector) -> Result<Vector> {
        self.add_scaled_int(other, 1)
    }

    pub fn sub(&self, other: &Vector) -> Result<Vector> {
        self.add_scaled_int(other, -1)
    }

    /// self + k * other, exact in exact mode.
    pub fn add_scaled_int(&self, other: &Vector, k: i64) -> Result<Vector> {
        self.space.same_as(&other.space)?;
        let mut coords = self.coords.clone();
        for (i, s) in &other.coords {
            let delta = s.scale_int(k);
            let entry = coords
                .remove(i)
                .unwrap_or_else(|| Scalar::zero(self.space.precision));
            let new = entry.add(&delta);
            if !new.is_zero() {
                coords.insert(*i, new);
            }
        }
        Ok(Vector { space: self.space, coords })
    }

    pub fn scale(&self, s: &Scalar) -> Result<Vector> {
        if s.precision() != self.space.precision {
            return Err(LabError::InvalidInput(format!(
                "scalar precision does not match {}",
                self.space
            )));
        }
        let mut coords = BTreeMap::new();
        if !s.is_zero() {
            for (i, c) in &self.coords {
                coords.insert(*i, c.mul(s));
            }
        }
        Ok(Vector { space: self.space, coords })
    }

    pub fn neg(&self) -> Vector {
        let coords = self.coords.iter().map(|(i, c)| (*i, c.neg())).collect();
        Vector { space: self.space, coords }
    }

    fn abs_sum(&self) -> Scalar {
        let mut acc = Scalar::zero(self.space.precision);
        for c in self.coords.values() {
            acc = acc.add(&c.abs());
        }
        acc
    }

    fn sq_sum(&self) -> Scalar {
        let mut acc = Scalar::zero(self.space.precision);
        for c in self.coords.values() {
            acc = acc.add(&c.sq());
        }
        acc
    }

    fn sup_abs(&self) -> Scalar {
        let mut acc = Scalar::zero(self.space.precision);
        for c in self.coords.values() {
            acc = acc.max_same(c.abs());
        }
        acc
    }

    /// Squared norm.  The exact primitive on euclidean spaces; elsewhere the
    /// square of `norm`.
    pub fn norm_sq(&self) -> Result<Scalar> {
        if self.space.is_euclidean() {
            Ok(self.sq_sum())
        } else {
            Ok(self.norm()?.sq())
        }
    }

    /// The norm of the vector.
    ///
    /// Exact mode returns the exact value where it is rational (always for
    /// the l1/sup norms; for euclidean norms only when the squared norm is a
    /// perfect square; for `MonomialLinf` only for monomials and zero) and
    /// `InexactNorm` otherwise.  Use `norm_cmp` for exact threshold tests.
    pub fn norm(&self) -> Result<Scalar> {
        match self.space.kind {
            SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: PNorm::One, .. } => Ok(self.abs_sum()),
            SpaceKind::SeqC0 | SpaceKind::FiniteDim { p: PNorm::Inf, .. } => Ok(self.sup_abs()),
            SpaceKind::SeqL2 | SpaceKind::TorusTrig | SpaceKind::FiniteDim { p: PNorm::Two, .. } => {
                let sq = self.sq_sum();
                match sq {
                    Scalar::F64(x) => Ok(Scalar::F64(x.sqrt())),
                    Scalar::Rat(r) => exact_sqrt(&r)
                        .map(Scalar::Rat)
                        .ok_or_else(|| LabError::InexactNorm(format!("squared norm {r}"))),
                }
            }
            SpaceKind::MonomialLinf => self.monomial_sup(),
        }
    }

    fn monomial_sup(&self) -> Result<Scalar> {
        if self.coords.is_empty() {
            return Ok(Scalar::zero(self.space.precision));
        }
        if self.coords.len() == 1 {
            // |c t^k| attains |c| at t = 1 (at t = 0 for k = 0).
            let c = self.coords.values().next().unwrap();
            return Ok(c.abs());
        }
        match self.space.precision {
            Precision::Exact => Err(LabError::InexactNorm(
                "sup norm of a non-monomial polynomial".into(),
            )),
            Precision::Float64 => Ok(Scalar::F64(poly_sup_abs(&self.coords))),
        }
    }

    /// Compares the norm against a nonnegative threshold, exactly in exact
    /// mode (squared comparison on euclidean spaces, so no square roots).
    pub fn norm_cmp(&self, threshold: &Scalar) -> Result<Ordering> {
        if threshold.is_negative() {
            return Ok(Ordering::Greater);
        }
        if self.space.is_euclidean() {
            Ok(self.sq_sum().cmp_same(&threshold.sq()))
        } else {
            Ok(self.norm()?.cmp_same(threshold))
        }
    }

    /// Evaluates the polynomial at a point of [0,1].  Only meaningful on
    /// `MonomialLinf`; |eval_at(t)| is an exact lower bound for the sup norm,
    /// which is how divergence witnesses on that space are certified.
    pub fn eval_at(&self, t: &Scalar) -> Result<Scalar> {
        if !matches!(self.space.kind, SpaceKind::MonomialLinf) {
            return Err(LabError::Unsupported(format!(
                "pointwise evaluation lives on MonomialLinf, not {}",
                self.space
            )));
        }
        let mut acc = Scalar::zero(self.space.precision);
        for (k, c) in &self.coords {
            acc = acc.add(&c.mul(&pow(t, *k as u32)));
        }
        Ok(acc)
    }

    pub fn norm_approx(&self) -> f64 {
        match self.space.kind {
            SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: PNorm::One, .. } => {
                self.abs_sum().to_f64()
            }
            SpaceKind::SeqC0 | SpaceKind::FiniteDim { p: PNorm::Inf, .. } => {
                self.sup_abs().to_f64()
            }
            SpaceKind::SeqL2 | SpaceKind::TorusTrig | SpaceKind::FiniteDim { p: PNorm::Two, .. } => {
                self.sq_sum().to_f64().sqrt()
            }
            SpaceKind::MonomialLinf => {
                if self.coords.len() <= 1 {
                    self.sup_abs().to_f64()
                } else {
                    poly_sup_abs(&self.coords)
                }
            }
        }
    }
}

fn poly_eval(coords: &BTreeMap<usize, Scalar>, t: f64) -> f64 {
    let mut acc = 0.0;
    for (k, c) in coords {
        acc += c.to_f64() * t.powi(*k as i32);
    }
    acc
}

/// Approximate sup of |p(t)| on [0,1]: grid scan then local ternary refine.
fn poly_sup_abs(coords: &BTreeMap<usize, Scalar>) -> f64 {
    let mut best = 0.0f64;
    let mut best_t = 0.0f64;
    for i in 0..=POLY_SCAN_GRID {
        let t = i as f64 / POLY_SCAN_GRID as f64;
        let v = poly_eval(coords, t).abs();
        if v > best {
            best = v;
            best_t = t;
        }
    }
    let h = 1.0 / POLY_SCAN_GRID as f64;
    let mut lo = (best_t - h).max(0.0);
    let mut hi = (best_t + h).min(1.0);
    for _ in 0..POLY_REFINE_STEPS {
        let m1 = lo + (hi - lo) / 3.0;
        let m2 = hi - (hi - lo) / 3.0;
        if poly_eval(coords, m1).abs() < poly_eval(coords, m2).abs() {
            lo = m1;
        } else {
            hi = m2;
        }
    }
    let t = (lo + hi) / 2.0;
    best.max(poly_eval(coords, t).abs())
}

/// A functional from the declared dual ball of its space.
#[derive(Clone, Debug, PartialEq)]
pub struct Functional {
    space: Space,
    form: Form,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Form {
    /// Coordinate pairing sum(lambda_i v_i); the dual-ball bound depends on
    /// the space kind.
    Coeffs(BTreeMap<usize, Scalar>),
    /// Integration against the indicator of [a,b] in [0,1] (`MonomialLinf`).
    Indicator { a: Scalar, b: Scalar },
    /// Integration against a polynomial density with L1 mass at most one
    /// (`MonomialLinf`); the mass is bounded by sum |g_k|/(k+1).
    PolyDensity(BTreeMap<usize, Scalar>),
}

impl Functional {
    pub fn coeffs(space: Space, entries: impl IntoIterator<Item = (usize, Scalar)>) -> Result<Self> {
        if matches!(space.kind, SpaceKind::MonomialLinf) {
            return Err(LabError::Unsupported(
                "coordinate functionals are not part of the MonomialLinf model".into(),
            ));
        }
        let mut coords = BTreeMap::new();
        for (i, s) in entries {
            space.check_index(i)?;
            if s.precision() != space.precision {
                return Err(LabError::InvalidInput(format!(
                    "scalar precision does not match {space}"
                )));
            }
            if !s.is_zero() {
                coords.insert(i, s);
            }
        }
        let f = Functional { space, form: Form::Coeffs(coords) };
        f.check_ball()?;
        Ok(f)
    }

    pub fn coeffs_from_ints(space: Space, entries: &[(usize, i64)]) -> Result<Self> {
        Functional::coeffs(
            space,
            entries.iter().map(|&(i, v)| (i, Scalar::from_int(space.precision, v))),
        )
    }

    /// Coordinate functional e_i* (valid on every sequence-space kind).
    pub fn basis(space: Space, i: usize) -> Result<Self> {
        Functional::coeffs(space, [(i, Scalar::from_int(space.precision, 1))])
    }

    pub fn indicator(space: Space, a: Scalar, b: Scalar) -> Result<Self> {
        if !matches!(space.kind, SpaceKind::MonomialLinf) {
            return Err(LabError::Unsupported(format!(
                "indicator functionals only pair with MonomialLinf, not {space}"
            )));
        }
        let zero = Scalar::zero(space.precision);
        let one = Scalar::from_int(space.precision, 1);
        if a.cmp_same(&zero) == Ordering::Less
            || b.cmp_same(&a) == Ordering::Less
            || one.cmp_same(&b) == Ordering::Less
        {
            return Err(LabError::FunctionalOutOfBall(format!(
                "indicator needs 0 <= a <= b <= 1, got [{a}, {b}]"
            )));
        }
        Ok(Functional { space, form: Form::Indicator { a, b } })
    }

    pub fn poly_density(
        space: Space,
        entries: impl IntoIterator<Item = (usize, Scalar)>,
    ) -> Result<Self> {
        if !matches!(space.kind, SpaceKind::MonomialLinf) {
            return Err(LabError::Unsupported(format!(
                "polynomial densities only pair with MonomialLinf, not {space}"
            )));
        }
        let mut coords = BTreeMap::new();
        for (i, s) in entries {
            if s.precision() != space.precision {
                return Err(LabError::InvalidInput(format!(
                    "scalar precision does not match {space}"
                )));
            }
            if !s.is_zero() {
                coords.insert(i, s);
            }
        }
        let f = Functional { space, form: Form::PolyDensity(coords) };
        f.check_ball()?;
        Ok(f)
    }

    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn form(&self) -> &Form {
        &self.form
    }

    fn check_ball(&self) -> Result<()> {
        let bound = match &self.form {
            Form::Coeffs(coords) => {
                let v = Vector { space: self.space, coords: coords.clone() };
                match self.space.kind {
                    // dual of l1 is sup, dual of c0 is l1, l2 self-dual
                    SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: PNorm::One, .. } => v.sup_abs(),
                    SpaceKind::SeqC0 | SpaceKind::FiniteDim { p: PNorm::Inf, .. } => v.abs_sum(),
                    SpaceKind::SeqL2
                    | SpaceKind::TorusTrig
                    | SpaceKind::FiniteDim { p: PNorm::Two, .. } => {
                        // compare squared mass against 1 to stay exact
                        let sq = v.sq_sum();
                        let one = Scalar::from_int(self.space.precision, 1);
                        return check_at_most_one(&sq, &one, self.space.precision);
                    }
                    SpaceKind::MonomialLinf => unreachable!(),
                }
            }
            Form::Indicator { .. } => return Ok(()),
            Form::PolyDensity(coords) => {
                let mut mass = Scalar::zero(self.space.precision);
                for (k, c) in coords {
                    let w = Scalar::ratio(self.space.precision, 1, (*k as i64) + 1);
                    mass = mass.add(&c.abs().mul(&w));
                }
                mass
            }
        };
        let one = Scalar::from_int(self.space.precision, 1);
        check_at_most_one(&bound, &one, self.space.precision)
    }

    /// The dual pairing <f, v>.
    pub fn pair(&self, v: &Vector) -> Result<Scalar> {
        self.space.same_as(&v.space)?;
        match &self.form {
            Form::Coeffs(lambda) => {
                let mut acc = Scalar::zero(self.space.precision);
                // iterate over the smaller support
                if lambda.len() <= v.coords.len() {
                    for (i, l) in lambda {
                        if let Some(c) = v.coords.get(i) {
                            acc = acc.add(&l.mul(c));
                        }
                    }
                } else {
                    for (i, c) in &v.coords {
                        if let Some(l) = lambda.get(i) {
                            acc = acc.add(&l.mul(c));
                        }
                    }
                }
                Ok(acc)
            }
            Form::Indicator { a, b } => {
                // integral over [a,b] of sum c_k t^k = sum c_k (b^{k+1}-a^{k+1})/(k+1)
                let mut acc = Scalar::zero(self.space.precision);
                for (k, c) in &v.coords {
                    let e = (*k as u32) + 1;
                    let term = pow(b, e).sub(&pow(a, e));
                    let w = Scalar::ratio(self.space.precision, 1, e as i64);
                    acc = acc.add(&c.mul(&term).mul(&w));
                }
                Ok(acc)
            }
            Form::PolyDensity(g) => {
                // integral over [0,1] of g(t) v(t) = sum g_j c_k / (j+k+1)
                let mut acc = Scalar::zero(self.space.precision);
                for (j, gj) in g {
                    for (k, ck) in &v.coords {
                        let w = Scalar::ratio(self.space.precision, 1, (j + k + 1) as i64);
                        acc = acc.add(&gj.mul(ck).mul(&w));
                    }
                }
                Ok(acc)
            }
        }
    }
}

fn check_at_most_one(value: &Scalar, one: &Scalar, precision: Precision) -> Result<()> {
    let ok = match precision {
        Precision::Exact => value.cmp_same(one) != Ordering::Greater,
        // constructions may round through f64; allow one part in 1e9
        Precision::Float64 => value.to_f64() <= 1.0 + 1e-9,
    };
    if ok {
        Ok(())
    } else {
        Err(LabError::FunctionalOutOfBall(format!("dual bound {value} exceeds 1")))
    }
}

fn pow(base: &Scalar, mut e: u32) -> Scalar {
    let mut acc = Scalar::from_int(base.precision(), 1);
    let mut b = base.clone();
    while e > 0 {
        if e & 1 == 1 {
            acc = acc.mul(&b);
        }
        e >>= 1;
        if e > 0 {
            b = b.sq();
        }
    }
    acc
}

/// Incremental partial-sum accumulator used by the scans.  Keeps the running
/// vector together with enough state to answer norm comparisons in O(1) for
/// the l1/l2 norms and amortized O(support) for sup norms.
pub(crate) struct NormAccum {
    space: Space,
    coords: BTreeMap<usize, Scalar>,
    abs_sum: Scalar,
    sq_sum: Scalar,
    sup_max: Scalar,
    sup_dirty: bool,
}

impl NormAccum {
    pub fn new(space: Space) -> Self {
        NormAccum {
            space,
            coords: BTreeMap::new(),
            abs_sum: Scalar::zero(space.precision),
            sq_sum: Scalar::zero(space.precision),
            sup_max: Scalar::zero(space.precision),
            sup_dirty: false,
        }
    }

    pub fn add_scaled(&mut self, v: &Vector, k: i64) -> Result<()> {
        self.space.same_as(v.space())?;
        if k == 0 {
            return Ok(());
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
            let new_abs = new.abs();
            match new_abs.cmp_same(&self.sup_max) {
                Ordering::Greater => {
                    self.sup_max = new_abs;
                    self.sup_dirty = false;
                }
                _ => {
                    if old.abs().cmp_same(&self.sup_max) == Ordering::Equal {
                        self.sup_dirty = true;
                    }
                }
            }
            if !new.is_zero() {
                self.coords.insert(*i, new);
            }
        }
        Ok(())
    }

    fn sup(&mut self) -> Scalar {
        if self.sup_dirty {
            let mut m = Scalar::zero(self.space.precision);
            for c in self.coords.values() {
                m = m.max_same(c.abs());
            }
            self.sup_max = m;
            self.sup_dirty = false;
        }
        self.sup_max.clone()
    }

    /// Monotone proxy for the norm: squared norm on euclidean spaces, the
    /// norm itself elsewhere.  Errors on exact non-monomial `MonomialLinf`.
    pub fn norm_key(&mut self) -> Result<Scalar> {
        match self.space.kind {
            SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: PNorm::One, .. } => {
                Ok(self.abs_sum.clone())
            }
            SpaceKind::SeqC0 | SpaceKind::FiniteDim { p: PNorm::Inf, .. } => Ok(self.sup()),
            SpaceKind::SeqL2 | SpaceKind::TorusTrig | SpaceKind::FiniteDim { p: PNorm::Two, .. } => {
                Ok(self.sq_sum.clone())
            }
            SpaceKind::MonomialLinf => self.snapshot().norm(),
        }
    }

    /// Threshold in norm units mapped into `norm_key` units.
    pub fn key_for_threshold(&self, threshold: &Scalar) -> Scalar {
        if self.space.is_euclidean() {
            threshold.sq()
        } else {
            threshold.clone()
        }
    }

    pub fn norm_cmp(&mut self, threshold: &Scalar) -> Result<Ordering> {
        if threshold.is_negative() {
            return Ok(Ordering::Greater);
        }
        let key = self.norm_key()?;
        Ok(key.cmp_same(&self.key_for_threshold(threshold)))
    }

    pub fn norm_approx(&mut self) -> f64 {
        match self.norm_key() {
            Ok(k) => {
                if self.space.is_euclidean() {
                    k.to_f64().sqrt()
                } else {
                    k.to_f64()
                }
            }
            Err(_) => self.snapshot().norm_approx(),
        }
    }

    pub fn snapshot(&self) -> Vector {
        Vector { space: self.space, coords: self.coords.clone() }
    }
}

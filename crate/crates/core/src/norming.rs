//! Countable norming families with fixed, documented enumerations.
//!
//! Each space gets one canonical family from its dual ball:
//!
//! * `SeqC0`: coordinate functionals e_k*; the sup norm is attained exactly.
//! * `SeqL1` and `FiniteDim(d,1)`: finitely supported sign patterns in
//!   {-1,0,+1}, enumerated by support bound then base-3 digits; the sign
//!   pattern of the vector attains the l1 norm exactly.
//! * `SeqL2`, `TorusTrig`, `FiniteDim(d,2)`: even positions are the
//!   normalized basis vectors (the mode functionals on the torus); odd
//!   positions walk a master enumeration of nonzero rational vectors, each
//!   rescaled into the unit ball.  When the vector's norm is rational the
//!   rescaling is exact normalization, otherwise a dyadic lower approximation
//!   of 1/norm at a precision ladder that is unbounded along the stream, so
//!   the family is genuinely norming while good approximants still appear at
//!   feasible indices.
//! * `FiniteDim(d,inf)`: +-e_j first (these attain the sup norm), then the
//!   master enumeration rescaled exactly to l1 mass one.
//!
//! `MonomialLinf` has no norming family by design; `monomial_test_family`
//! exposes the deliberately non-norming test functionals used by the weak
//! detector on that space.

use crate::error::{LabError, Result};
use crate::scalar::{dyadic_floor_sqrt, exact_sqrt, Scalar};
use crate::space::{Functional, PNorm, Space, SpaceKind, Vector};
use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, Zero};
use std::cmp::Ordering;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scheme {
    C0Coords,
    SignPatterns,
    EuclideanBall,
    DualInf,
    MonomialTest,
}

#[derive(Clone, Debug)]
pub struct NormingFamily {
    space: Space,
    scheme: Scheme,
}

/// The canonical norming family of the space.
pub fn norming_family(space: &Space) -> Result<NormingFamily> {
    let scheme = match space.kind {
        SpaceKind::SeqC0 => Scheme::C0Coords,
        SpaceKind::SeqL1 | SpaceKind::FiniteDim { p: PNorm::One, .. } => Scheme::SignPatterns,
        SpaceKind::SeqL2 | SpaceKind::TorusTrig | SpaceKind::FiniteDim { p: PNorm::Two, .. } => {
            Scheme::EuclideanBall
        }
        SpaceKind::FiniteDim { p: PNorm::Inf, .. } => Scheme::DualInf,
        SpaceKind::MonomialLinf => return Err(LabError::NotNorming("MonomialLinf")),
    };
    Ok(NormingFamily { space: *space, scheme })
}

/// The fixed non-norming functional list for the analytic model space:
/// indicators of [0,1] and [0,1/2], the densities t and t^2, then dyadic
/// indicators and higher monomial densities.
pub fn monomial_test_family(space: &Space) -> Result<NormingFamily> {
    if !matches!(space.kind, SpaceKind::MonomialLinf) {
        return Err(LabError::Unsupported(format!(
            "the test family pairs with MonomialLinf, not {space}"
        )));
    }
    Ok(NormingFamily { space: *space, scheme: Scheme::MonomialTest })
}

impl NormingFamily {
    pub fn space(&self) -> &Space {
        &self.space
    }

    pub fn is_norming(&self) -> bool {
        self.scheme != Scheme::MonomialTest
    }

    pub fn description(&self) -> &'static str {
        match self.scheme {
            Scheme::C0Coords => "coordinate functionals",
            Scheme::SignPatterns => "finite sign patterns",
            Scheme::EuclideanBall => "normalized basis vectors and rescaled rational vectors",
            Scheme::DualInf => "signed coordinates and rescaled rational vectors",
            Scheme::MonomialTest => "indicator and monomial-density test functionals (not norming)",
        }
    }

    pub fn iter(&self) -> FamilyIter {
        FamilyIter {
            space: self.space,
            scheme: self.scheme,
            idx: 0,
            master: Master::new(match self.space.kind {
                SpaceKind::FiniteDim { dim, .. } => Some(dim),
                _ => None,
            }),
            pattern: PatternState { level: 1, t: 0 },
        }
    }

    /// The k-th functional of the fixed enumeration.
    pub fn functional(&self, k: usize) -> Functional {
        self.iter().nth(k).expect("family enumerations are endless")
    }

    /// max over the first `k` functionals of |<f, v>|.
    pub fn norming_sup(&self, v: &Vector, k: usize) -> Result<Scalar> {
        self.space.same_as(v.space())?;
        let mut best = Scalar::zero(self.space.precision);
        for f in self.iter().take(k) {
            let p = f.pair(v)?.abs();
            best = best.max_same(p);
        }
        Ok(best)
    }

    /// First index whose pairing reaches norm(v) - delta, scanning at most
    /// `cap` functionals.  Exact in exact mode: the test compares the norm
    /// against pairing + delta with no square roots.
    pub fn index_attaining(&self, v: &Vector, delta: &Scalar, cap: usize) -> Result<Option<usize>> {
        self.space.same_as(v.space())?;
        for (k, f) in self.iter().take(cap).enumerate() {
            let p = f.pair(v)?.abs();
            let reach = p.add(delta);
            if v.norm_cmp(&reach)? != Ordering::Greater {
                return Ok(Some(k));
            }
        }
        Ok(None)
    }
}

/// Shorthand for `fam.norming_sup(v, k)` matching the operation name.
pub fn norming_sup(v: &Vector, fam: &NormingFamily, k: usize) -> Result<Scalar> {
    fam.norming_sup(v, k)
}

struct PatternState {
    level: u32,
    t: u64,
}

pub struct FamilyIter {
    space: Space,
    scheme: Scheme,
    idx: usize,
    master: Master,
    pattern: PatternState,
}

impl Iterator for FamilyIter {
    type Item = Functional;

    fn next(&mut self) -> Option<Functional> {
        let k = self.idx;
        self.idx += 1;
        let f = match self.scheme {
            Scheme::C0Coords => Functional::basis(self.space, k).expect("basis functional"),
            Scheme::SignPatterns => self.next_pattern(),
            Scheme::EuclideanBall => self.euclidean(k),
            Scheme::DualInf => self.dual_inf(k),
            Scheme::MonomialTest => monomial_test(self.space, k),
        };
        Some(f)
    }
}

impl FamilyIter {
    fn dim(&self) -> Option<usize> {
        match self.space.kind {
            SpaceKind::FiniteDim { dim, .. } => Some(dim),
            _ => None,
        }
    }

    /// Sign patterns in {-1,0,+1}: level b holds the patterns supported in
    /// [0,b) whose top coordinate b-1 is nonzero, ordered by the base-3
    /// counter t (digit 1 -> +1, digit 2 -> -1, little-endian).  With a
    /// dimension cap the patterns run out and the stream continues with
    /// master vectors rescaled exactly to sup-norm one.
    fn next_pattern(&mut self) -> Functional {
        let cap = self.dim();
        loop {
            let b = self.pattern.level as usize;
            if let Some(d) = cap {
                if b > d {
                    let u = self.master.get(self.idx_overflow(d));
                    let sup = u
                        .iter()
                        .map(|(_, r)| r.abs())
                        .max()
                        .unwrap_or_else(BigRational::one);
                    let scaled: Vec<(usize, BigRational)> =
                        u.iter().map(|(i, r)| (*i, r / &sup)).collect();
                    return rational_coeffs(self.space, &scaled);
                }
            }
            let t = self.pattern.t;
            if t >= 3u64.pow(self.pattern.level) {
                self.pattern.level += 1;
                self.pattern.t = 0;
                continue;
            }
            self.pattern.t += 1;
            let mut digits = Vec::with_capacity(b);
            let mut x = t;
            for _ in 0..b {
                digits.push((x % 3) as u8);
                x /= 3;
            }
            if digits[b - 1] == 0 {
                continue;
            }
            let entries: Vec<(usize, i64)> = digits
                .iter()
                .enumerate()
                .filter(|(_, d)| **d != 0)
                .map(|(i, d)| (i, if *d == 1 { 1 } else { -1 }))
                .collect();
            return Functional::coeffs_from_ints(self.space, &entries).expect("sign pattern");
        }
    }

    fn idx_overflow(&self, d: usize) -> usize {
        // patterns exhausted: 3^d - 1 of them came first
        self.idx - 1 - (3usize.pow(d as u32) - 1)
    }

    /// Evens: normalized basis vectors (cycled modulo the dimension when
    /// finite).  Odds in stripes of eight: stripes 0..6 rescale master[i]
    /// at dyadic precision 4<<s; stripe 7 revisits master vectors at an
    /// unbounded precision ladder 512 + 64j along the Cantor diagonal.
    fn euclidean(&mut self, k: usize) -> Functional {
        if k % 2 == 0 {
            let mut i = k / 2;
            if let Some(d) = self.dim() {
                i %= d;
            }
            return Functional::basis(self.space, i).expect("basis functional");
        }
        let m = (k - 1) / 2;
        let (i, t) = if m % 8 < 7 {
            (m / 8, 4u32 << (m % 8))
        } else {
            let (a, j) = cantor_unpair(m / 8);
            (a, 512 + 64 * (j as u32))
        };
        let u = self.master.get(i).clone();
        let scaled = scale_to_euclidean_ball(&u, t);
        rational_coeffs(self.space, &scaled)
    }

    /// +-e_j for j < d, then master vectors rescaled exactly to l1 mass one.
    fn dual_inf(&mut self, k: usize) -> Functional {
        let d = self.dim().expect("DualInf only on FiniteDim");
        if k < 2 * d {
            let sign = if k % 2 == 0 { 1 } else { -1 };
            return Functional::coeffs_from_ints(self.space, &[(k / 2, sign)])
                .expect("signed coordinate");
        }
        let u = self.master.get(k - 2 * d).clone();
        let mass: BigRational = u.iter().map(|(_, r)| r.abs()).sum();
        let scaled: Vec<(usize, BigRational)> = u.iter().map(|(i, r)| (*i, r / &mass)).collect();
        rational_coeffs(self.space, &scaled)
    }
}

fn rational_coeffs(space: Space, entries: &[(usize, BigRational)]) -> Functional {
    Functional::coeffs(
        space,
        entries
            .iter()
            .map(|(i, r)| (*i, Scalar::from_rational(space.precision, r))),
    )
    .expect("rescaled vector stays in the dual ball")
}

/// u * rho with rho = 1/|u| when that is rational, otherwise the dyadic
/// floor of 1/|u| at t bits, so the result always stays in the unit ball.
fn scale_to_euclidean_ball(u: &[(usize, BigRational)], t: u32) -> Vec<(usize, BigRational)> {
    let norm_sq: BigRational = u.iter().map(|(_, r)| r * r).sum();
    if norm_sq.is_zero() {
        return Vec::new();
    }
    let rho = match exact_sqrt(&norm_sq) {
        Some(s) => s.recip(),
        None => dyadic_floor_sqrt(&norm_sq.recip(), t),
    };
    u.iter().map(|(i, r)| (*i, r * &rho)).collect()
}

fn cantor_unpair(n: usize) -> (usize, usize) {
    let mut d = 0usize;
    let mut base = 0usize;
    while base + d + 1 <= n {
        d += 1;
        base += d;
    }
    let j = n - base;
    (d - j, j)
}

fn monomial_test(space: Space, k: usize) -> Functional {
    let s = |n: i64, d: i64| Scalar::ratio(space.precision, n, d);
    match k {
        0 => Functional::indicator(space, s(0, 1), s(1, 1)).unwrap(),
        1 => Functional::indicator(space, s(0, 1), s(1, 2)).unwrap(),
        2 => Functional::poly_density(space, [(1usize, s(1, 1))]).unwrap(),
        3 => Functional::poly_density(space, [(2usize, s(1, 1))]).unwrap(),
        _ => {
            let mut rem = k - 4;
            let mut level = 2u32;
            loop {
                let block = (1usize << level) + 1;
                if rem < block {
                    break;
                }
                rem -= block;
                level += 1;
            }
            let cells = 1i64 << level;
            if rem < cells as usize {
                let j = rem as i64;
                Functional::indicator(space, s(j, cells), s(j + 1, cells)).unwrap()
            } else {
                Functional::poly_density(space, [(level as usize, s(1, 1))]).unwrap()
            }
        }
    }
}

/// Master enumeration of nonzero finitely supported rational vectors.
///
/// Vectors are graded by weight(u) = support_end + sum(|p|-1 + q-1) over the
/// entries p/q; each weight level is emitted in a deterministic DFS order
/// (top support index ascending, skips before assignments, value cost
/// ascending, +p/q before -p/q).  Every rational vector appears exactly once
/// and small vectors appear early.
struct Master {
    cap_dim: Option<usize>,
    items: Vec<Vec<(usize, BigRational)>>,
    next_level: usize,
}

impl Master {
    fn new(cap_dim: Option<usize>) -> Self {
        Master { cap_dim, items: Vec::new(), next_level: 0 }
    }

    fn get(&mut self, i: usize) -> &Vec<(usize, BigRational)> {
        while self.items.len() <= i {
            self.next_level += 1;
            let level = generate_level(self.next_level, self.cap_dim);
            self.items.extend(level);
        }
        &self.items[i]
    }
}

fn values_with_cost(c: usize) -> Vec<BigRational> {
    let mut out = Vec::new();
    for a in 0..=c {
        let p = (a + 1) as i64;
        let q = (c - a + 1) as i64;
        if num::integer::gcd(p, q) == 1 {
            out.push(BigRational::new(BigInt::from(p), BigInt::from(q)));
            out.push(BigRational::new(BigInt::from(-p), BigInt::from(q)));
        }
    }
    out
}

fn generate_level(beta: usize, cap_dim: Option<usize>) -> Vec<Vec<(usize, BigRational)>> {
    let mut out = Vec::new();
    for top in 0..beta {
        if let Some(d) = cap_dim {
            if top >= d {
                break;
            }
        }
        let budget = beta - top - 1;
        let mut current: Vec<(usize, BigRational)> = Vec::new();
        dfs_level(0, top, budget, &mut current, &mut out);
    }
    out
}

fn dfs_level(
    pos: usize,
    top: usize,
    rem: usize,
    current: &mut Vec<(usize, BigRational)>,
    out: &mut Vec<Vec<(usize, BigRational)>>,
) {
    if pos == top {
        for v in values_with_cost(rem) {
            let mut u = current.clone();
            u.push((top, v));
            out.push(u);
        }
        return;
    }
    // skip this position first
    dfs_level(pos + 1, top, rem, current, out);
    for c in 0..=rem {
        for v in values_with_cost(c) {
            current.push((pos, v));
            dfs_level(pos + 1, top, rem - c, current, out);
            current.pop();
        }
    }
}

//! Exact counting of integral points on `N(x + yω) = m` with
//! `max(|x|, |y|) ≤ T`, by exhaustive scan and by walking unit orbits.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{is_perfect_square, isqrt_u128};
use crate::census::EquationSpec;
use crate::error::{Error, Result};
use crate::quadfield::{sign_of_surd, QuadElem};

/// Largest `T` accepted by [`brute_count`].
pub const BRUTE_LIMIT: u64 = 100_000_000;

/// Largest `|y|` scanned by [`fundamental_solutions`].
pub const ORBIT_SCAN_LIMIT: u64 = 50_000_000;

fn perfect_sqrt_i128(v: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let r = isqrt_u128(v as u128) as i128;
    (r * r == v).then_some(r)
}

/// Number of `x` with `|x| ≤ T` and `N(x + yω) = m` for a fixed `y`.
fn count_row(y: i128, m: i128, b: i128, disc: i128, t: i128) -> Result<u64> {
    // x = (−b·y ± √(D·y² + 4m)) / 2
    let rad = disc
        .checked_mul(y)
        .and_then(|v| v.checked_mul(y))
        .and_then(|v| v.checked_add(4 * m))
        .ok_or_else(|| Error::InvalidInput("coefficients overflow the scan arithmetic".into()))?;
    let Some(r) = perfect_sqrt_i128(rad) else {
        return Ok(0);
    };
    let mut n = 0;
    let roots: &[i128] = if r == 0 { &[0] } else { &[r, -r] };
    for &s in roots {
        let num = -b * y + s;
        if num % 2 == 0 && (num / 2).abs() <= t {
            n += 1;
        }
    }
    Ok(n)
}

/// Exhaustive count of `N(X, T)`: scans `0 ≤ y ≤ T` in parallel and tests
/// `D·y² + 4m` for squares; rows with `y ≠ 0` are doubled by `(x, y) ↦ (−x, −y)`.
pub fn brute_count(spec: &EquationSpec, t: u64) -> Result<u64> {
    if t == 0 {
        return Err(Error::InvalidInput("T must be positive".into()));
    }
    if t > BRUTE_LIMIT {
        return Err(Error::ScanBudget(format!(
            "T = {t} exceeds the scan budget {BRUTE_LIMIT}; use count_via_orbits"
        )));
    }
    let m = spec
        .m
        .to_i128()
        .filter(|m| m.abs() < 1 << 100)
        .ok_or_else(|| Error::InvalidInput("m too large for scanning".into()))?;
    let (b, _) = spec.field.norm_form_coeffs();
    let (b, disc, ti) = (b as i128, spec.disc as i128, t as i128);
    let zero_row = count_row(0, m, b, disc, ti)?;
    let rest: Result<u64> = (1..=t)
        .into_par_iter()
        .map(|y| count_row(y as i128, m, b, disc, ti))
        .try_reduce(|| 0, |a, b| Ok(a + b));
    Ok(zero_row + 2 * rest?)
}

/// Compare `|σ₁(u)|` with `|σ₁(v)|` exactly.
fn cmp_abs_sigma1(u: &QuadElem, v: &QuadElem) -> Ordering {
    let abs = |w: &QuadElem| {
        if w.sign_sigma1() == Ordering::Less {
            w.neg()
        } else {
            w.clone()
        }
    };
    let diff = abs(u).add(&abs(v).neg()).expect("same field");
    let (a, b) = if diff.d() % 4 == 1 {
        (2 * &diff.x + &diff.y, diff.y.clone())
    } else {
        (diff.x.clone(), diff.y.clone())
    };
    sign_of_surd(&a, &b, diff.d())
}

/// Integral points on `N(z) = m` up to the action of `±ε^k`, as
/// representatives in the half-open domain `√(|m|/ε) < |σ₁(z)| ≤ √(|m|ε)`.
#[derive(Debug, Clone)]
pub struct SolutionOrbits {
    pub d: u64,
    pub m: BigInt,
    pub eps: QuadElem,
    pub log_eps: f64,
    pub representatives: Vec<QuadElem>,
}

impl SolutionOrbits {
    pub fn orbit_count(&self) -> usize {
        self.representatives.len()
    }

    fn eps_inv(&self) -> QuadElem {
        self.eps.conj()
    }

    /// `|σ₁(z)| ≤ √(|m|ε)`, i.e. `|σ₁(z)| ≤ |σ₁(ε·z̄)|`.
    fn below_upper(&self, z: &QuadElem) -> bool {
        cmp_abs_sigma1(z, &self.eps.mul_unchecked(&z.conj())) != Ordering::Greater
    }

    /// `|σ₁(z)| > √(|m|/ε)`, i.e. `|σ₁(ε·z)| > |σ₁(z̄)|`.
    fn above_lower(&self, z: &QuadElem) -> bool {
        cmp_abs_sigma1(&self.eps.mul_unchecked(z), &z.conj()) == Ordering::Greater
    }

    pub fn in_domain(&self, z: &QuadElem) -> bool {
        self.below_upper(z) && self.above_lower(z)
    }

    /// Moves `z` into the fundamental domain by powers of `ε`.
    pub fn reduce(&self, z: &QuadElem) -> QuadElem {
        let inv = self.eps_inv();
        let mut w = z.clone();
        while !self.below_upper(&w) {
            w = w.mul_unchecked(&inv);
        }
        while !self.above_lower(&w) {
            w = w.mul_unchecked(&self.eps);
        }
        w
    }

    /// A small solution: least height among `±z·ε^{−1,0,1}` over the
    /// representatives, preferring nonnegative coordinates.
    pub fn witness(&self) -> Option<(BigInt, BigInt)> {
        let inv = self.eps_inv();
        self.representatives
            .iter()
            .flat_map(|z| {
                let c = [z.mul_unchecked(&inv), z.clone(), z.mul_unchecked(&self.eps)];
                c.into_iter().flat_map(|w| [w.neg(), w])
            })
            .min_by(|a, b| {
                let key = |w: &QuadElem| (w.height(), w.x.is_negative() || w.y.is_negative(), w.x.clone(), w.y.clone());
                key(a).cmp(&key(b))
            })
            .map(|w| (w.x, w.y))
    }
}

/// Enumerates all orbits of solutions. Every domain representative has
/// `|y| ≤ √(|m|ε)/√d` (or `2√(|m|ε)/√d` when `ω = (1 + √d)/2`), so a
/// bounded scan of `y` finds them all.
pub fn fundamental_solutions(spec: &EquationSpec) -> Result<SolutionOrbits> {
    let field = &spec.field;
    let d = field.d;
    let scale = if field.omega_is_half_integral() { 2.0 } else { 1.0 };
    let m_abs_ln = spec.m.abs().to_f64().map(f64::ln).unwrap_or(f64::INFINITY);
    let ln_bound = 0.5 * (m_abs_ln + field.log_eps - (d as f64).ln()) + f64::ln(scale);
    if !(ln_bound < (ORBIT_SCAN_LIMIT as f64).ln()) {
        return Err(Error::ScanBudget(format!(
            "orbit scan for d = {d}, m = {} needs |y| up to e^{ln_bound:.1}",
            spec.m
        )));
    }
    let y_max = ln_bound.exp().floor() as i64 + 2;
    let (b, _) = field.norm_form_coeffs();
    let disc = BigInt::from(field.disc);
    let four_m = 4 * &spec.m;
    let mut orbits = SolutionOrbits {
        d,
        m: spec.m.clone(),
        eps: field.eps.clone(),
        log_eps: field.log_eps,
        representatives: Vec::new(),
    };
    let mut found: BTreeSet<(BigInt, BigInt)> = BTreeSet::new();
    for y in -y_max..=y_max {
        let yb = BigInt::from(y);
        let rad: BigInt = &disc * &yb * &yb + &four_m;
        if rad.is_negative() {
            continue;
        }
        let Some(r) = is_perfect_square(&rad) else {
            continue;
        };
        for s in [r.clone(), -r] {
            let num = -&yb * b + s;
            if num.is_odd() {
                continue;
            }
            let z = field.elem(num / 2, yb.clone());
            let w = orbits.reduce(&z);
            found.insert((w.x, w.y));
        }
    }
    orbits.representatives = found.into_iter().map(|(x, y)| field.elem(x, y)).collect();
    Ok(orbits)
}

/// Walks one direction of an orbit, counting points of height `≤ T`.
///
/// Each coordinate obeys `u_{k+1} = tr(ε)·u_k − u_{k−1}` with `tr(ε) ≥ 3`,
/// so once `|y_k| > T` and `y_{k+1}` has the same sign with `|y_{k+1}| ≥ |y_k|`,
/// `|y|` grows for the rest of the walk.
fn walk(start: &QuadElem, step: &QuadElem, t: &BigInt) -> BigInt {
    let mut count = BigInt::zero();
    let mut w = start.clone();
    loop {
        let next = w.mul_unchecked(step);
        let stop = w.y.abs() > *t
            && (&w.y * &next.y).is_positive()
            && next.y.abs() >= w.y.abs();
        if stop {
            return count;
        }
        if w.height() <= *t {
            count += 1;
        }
        w = next;
    }
}

/// Exact `N(X, T)` from the orbit representatives, for arbitrarily large `T`.
pub fn count_orbits_to(orbits: &SolutionOrbits, t: &BigInt) -> BigInt {
    let inv = orbits.eps_inv();
    orbits
        .representatives
        .iter()
        .map(|z| walk(z, &orbits.eps, t) + walk(&z.mul_unchecked(&inv), &inv, t))
        .sum()
}

pub fn count_via_orbits(spec: &EquationSpec, t: &BigInt) -> Result<BigInt> {
    if !t.is_positive() {
        return Err(Error::InvalidInput("T must be positive".into()));
    }
    Ok(count_orbits_to(&fundamental_solutions(spec)?, t))
}

/// Staircase slope of `N(X, T)` against `log T`: `2·(#orbits) / log ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSlope {
    /// Numerator of the slope over `log ε`.
    pub numerator: u64,
    pub log_eps: f64,
}

impl ExactSlope {
    pub fn value(&self) -> f64 {
        self.numerator as f64 / self.log_eps
    }

    /// `self / other` as an exact rational; both slopes must share `ε`.
    pub fn ratio(&self, other: &ExactSlope) -> Option<BigRational> {
        (other.numerator != 0 && self.log_eps == other.log_eps)
            .then(|| BigRational::new(self.numerator.into(), other.numerator.into()))
    }
}

pub fn exact_slope(spec: &EquationSpec) -> Result<ExactSlope> {
    let orbits = fundamental_solutions(spec)?;
    Ok(slope_of(&orbits))
}

pub fn slope_of(orbits: &SolutionOrbits) -> ExactSlope {
    ExactSlope {
        numerator: 2 * orbits.orbit_count() as u64,
        log_eps: orbits.log_eps,
    }
}

/// `exact_slope / predicted_slope`, which simplifies to `#orbits · h⁺ · √D / c_m`.
pub fn calibration(spec: &EquationSpec) -> Result<f64> {
    let group = crate::classgroup::class_group(spec.disc)?;
    let c = crate::census::c_m(spec, &group)?;
    if c.is_zero() {
        return Err(Error::ZeroCharacterSum);
    }
    let orbits = fundamental_solutions(spec)?;
    Ok(calibration_from(orbits.orbit_count(), group.h_plus(), spec.disc, &c))
}

pub fn calibration_from(orbit_count: usize, h_plus: usize, disc: u64, c: &BigInt) -> f64 {
    let c = c.to_f64().unwrap_or(f64::INFINITY);
    orbit_count as f64 * h_plus as f64 * (disc as f64).sqrt() / c
}

/// Exact `N(X, T)` by scanning, in `BigInt`, for oracles in tests.
#[doc(hidden)]
pub fn naive_count(spec: &EquationSpec, t: i64) -> u64 {
    let mut n = 0;
    for x in -t..=t {
        for y in -t..=t {
            if spec.field.norm_form(&x.into(), &y.into()) == spec.m {
                n += 1;
            }
        }
    }
    n
}

impl SolutionOrbits {
    /// Whether `z` lies in the orbit of some representative.
    pub fn contains(&self, z: &QuadElem) -> bool {
        let w = self.reduce(z);
        self.representatives.contains(&w)
    }

    pub fn is_empty(&self) -> bool {
        self.representatives.is_empty()
    }
}

//! Arithmetic in the maximal order `Z[ω]` of `Q(√d)`, `d > 1` squarefree,
//! with `ω = √d` for `d ≢ 1 (mod 4)` and `ω = (1 + √d)/2` otherwise.

use std::cmp::Ordering;
use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::factorize;
use crate::error::{Error, Result};

/// An element `x + y·ω` of the maximal order of `Q(√d)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuadElem {
    d: u64,
    pub x: BigInt,
    pub y: BigInt,
}

/// `(tr ω, N ω)`.
fn omega_data(d: u64) -> (i64, BigInt) {
    if d % 4 == 1 {
        (1, BigInt::from((1 - d as i128) / 4))
    } else {
        (0, -BigInt::from(d))
    }
}

/// Sign of `a + b·√d` (`d > 0` not a square), computed exactly.
pub fn sign_of_surd(a: &BigInt, b: &BigInt, d: u64) -> Ordering {
    let sa = a.sign();
    let sb = b.sign();
    use num_bigint::Sign::*;
    match (sa, sb) {
        (NoSign, NoSign) => Ordering::Equal,
        (Plus, Plus) | (Plus, NoSign) | (NoSign, Plus) => Ordering::Greater,
        (Minus, Minus) | (Minus, NoSign) | (NoSign, Minus) => Ordering::Less,
        (Plus, Minus) => (a * a).cmp(&(b * b * d)),
        (Minus, Plus) => (b * b * d).cmp(&(a * a)),
    }
}

/// Natural log of `a + b√d`, which must be positive; accurate for operands
/// far beyond the `f64` range.
fn ln_surd(a: &BigInt, b: &BigInt, d: u64) -> f64 {
    let bits = a.bits().max(b.bits());
    let shift = bits.saturating_sub(900);
    let a_s = (a >> shift).to_f64().unwrap();
    let b_s = (b >> shift).to_f64().unwrap();
    let sd = (d as f64).sqrt();
    let v = a_s + b_s * sd;
    // When a and b have opposite signs the value may suffer cancellation;
    // fall back to |a² − d b²| / |a − b√d|.
    let v = if a_s * b_s < 0.0 {
        let n = (a * a - b * b * d).abs();
        let nb = n.bits().saturating_sub(900);
        let n_f = (&n >> nb).to_f64().unwrap();
        let den = (a_s - b_s * sd).abs();
        return n_f.ln() + (nb as f64) * std::f64::consts::LN_2 - den.ln()
            - (shift as f64) * std::f64::consts::LN_2;
    } else {
        v
    };
    v.ln() + (shift as f64) * std::f64::consts::LN_2
}

impl QuadElem {
    pub fn new(d: u64, x: impl Into<BigInt>, y: impl Into<BigInt>) -> Self {
        QuadElem {
            d,
            x: x.into(),
            y: y.into(),
        }
    }

    pub fn one(d: u64) -> Self {
        Self::new(d, 1, 0)
    }

    pub fn d(&self) -> u64 {
        self.d
    }

    fn check(&self, other: &QuadElem) -> Result<()> {
        if self.d != other.d {
            return Err(Error::FieldMismatch(self.d, other.d));
        }
        Ok(())
    }

    pub fn mul(&self, other: &QuadElem) -> Result<QuadElem> {
        self.check(other)?;
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &QuadElem) -> QuadElem {
        let (t, n) = omega_data(self.d);
        let yy = &self.y * &other.y;
        let x = &self.x * &other.x - &n * &yy;
        let y = &self.x * &other.y + &other.x * &self.y + yy * t;
        QuadElem { d: self.d, x, y }
    }

    pub fn add(&self, other: &QuadElem) -> Result<QuadElem> {
        self.check(other)?;
        Ok(QuadElem {
            d: self.d,
            x: &self.x + &other.x,
            y: &self.y + &other.y,
        })
    }

    pub fn neg(&self) -> QuadElem {
        QuadElem {
            d: self.d,
            x: -&self.x,
            y: -&self.y,
        }
    }

    pub fn conj(&self) -> QuadElem {
        let (t, _) = omega_data(self.d);
        QuadElem {
            d: self.d,
            x: &self.x + &self.y * t,
            y: -&self.y,
        }
    }

    /// Exact norm; always an integer since elements lie in the order.
    pub fn norm(&self) -> BigInt {
        let (t, n) = omega_data(self.d);
        &self.x * &self.x + &self.x * &self.y * t + n * &self.y * &self.y
    }

    pub fn norm_rational(&self) -> BigRational {
        BigRational::from_integer(self.norm())
    }

    pub fn trace(&self) -> BigInt {
        let (t, _) = omega_data(self.d);
        2 * &self.x + &self.y * t
    }

    /// `(a, b, denom)` with the element equal to `(a + b√d)/denom` and
    /// `denom ∈ {1, 2}` minimal.
    pub fn sqrt_coords(&self) -> (BigInt, BigInt, u8) {
        if self.d % 4 == 1 {
            let a = 2 * &self.x + &self.y;
            if self.y.is_even() {
                (a / 2, &self.y / 2, 1)
            } else {
                (a, self.y.clone(), 2)
            }
        } else {
            (self.x.clone(), self.y.clone(), 1)
        }
    }

    /// `2σ₁ = A + B√d`; returns `(A, B)`.
    fn doubled_surd(&self) -> (BigInt, BigInt) {
        if self.d % 4 == 1 {
            (2 * &self.x + &self.y, self.y.clone())
        } else {
            (2 * &self.x, 2 * &self.y)
        }
    }

    /// Exact sign of the real embedding `σ₁` (with `√d > 0`).
    pub fn sign_sigma1(&self) -> Ordering {
        let (a, b) = self.doubled_surd();
        sign_of_surd(&a, &b, self.d)
    }

    pub fn sign_sigma2(&self) -> Ordering {
        self.conj().sign_sigma1()
    }

    /// `(σ₁(x), σ₂(x))` as floats. The smaller-magnitude coordinate is
    /// recovered from the norm to avoid cancellation.
    pub fn embed(&self) -> (f64, f64) {
        let (a, b) = self.doubled_surd();
        let sd = (self.d as f64).sqrt();
        let af = a.to_f64().unwrap_or(f64::INFINITY);
        let bf = b.to_f64().unwrap_or(f64::INFINITY);
        let s1 = (af + bf * sd) / 2.0;
        let s2 = (af - bf * sd) / 2.0;
        let n = self.norm().to_f64().unwrap_or(f64::NAN);
        if n == 0.0 {
            return (s1, s2);
        }
        if s1.abs() >= s2.abs() {
            (s1, n / s1)
        } else {
            (n / s2, s2)
        }
    }

    /// `ln |σ₁(x)|` for nonzero `x`, valid beyond the `f64` range.
    pub fn ln_abs_sigma1(&self) -> f64 {
        let (a, b) = self.doubled_surd();
        let (a, b) = if sign_of_surd(&a, &b, self.d) == Ordering::Less {
            (-a, -b)
        } else {
            (a, b)
        };
        ln_surd(&a, &b, self.d) - std::f64::consts::LN_2
    }

    /// Height `max(|x|, |y|)` in the integral basis.
    pub fn height(&self) -> BigInt {
        self.x.abs().max(self.y.abs())
    }

    pub fn is_unit(&self) -> bool {
        self.norm().abs().is_one()
    }

    pub fn pow(&self, mut e: u64) -> QuadElem {
        let mut acc = QuadElem::one(self.d);
        let mut base = self.clone();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_unchecked(&base);
            }
            base = base.mul_unchecked(&base);
            e >>= 1;
        }
        acc
    }
}

impl fmt::Display for QuadElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b, den) = self.sqrt_coords();
        let body = if b.is_zero() {
            format!("{a}")
        } else {
            let coef = if b.abs().is_one() {
                String::new()
            } else {
                format!("{}*", b.abs())
            };
            let sign = if b.is_negative() { "-" } else { "+" };
            if a.is_zero() {
                format!("{}{coef}sqrt({})", if b.is_negative() { "-" } else { "" }, self.d)
            } else {
                format!("{a}{sign}{coef}sqrt({})", self.d)
            }
        };
        if den == 2 {
            write!(f, "({body})/2")
        } else {
            write!(f, "{body}")
        }
    }
}

/// Unit data of the maximal order of `Q(√d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldData {
    pub d: u64,
    /// Fundamental discriminant `D`.
    pub disc: u64,
    /// Fundamental unit `ε₀ > 1`.
    pub eps0: QuadElem,
    pub norm_eps0: i8,
    /// Least unit `ε > 1` of norm `+1`.
    pub eps: QuadElem,
    pub log_eps: f64,
    /// Period length of the continued fraction of `ω`.
    pub period: usize,
}

impl FieldData {
    pub fn omega_is_half_integral(&self) -> bool {
        self.d % 4 == 1
    }

    pub fn sqrt_disc(&self) -> f64 {
        (self.disc as f64).sqrt()
    }

    pub fn elem(&self, x: impl Into<BigInt>, y: impl Into<BigInt>) -> QuadElem {
        QuadElem::new(self.d, x, y)
    }

    /// `N(x + yω)` as a polynomial in the basis coordinates.
    pub fn norm_form(&self, x: &BigInt, y: &BigInt) -> BigInt {
        QuadElem::new(self.d, x.clone(), y.clone()).norm()
    }

    /// Coefficients `(b, c)` of the norm form `x² + b·xy + c·y²`.
    pub fn norm_form_coeffs(&self) -> (i64, i64) {
        if self.d % 4 == 1 {
            (1, (1 - self.d as i64) / 4)
        } else {
            (0, -(self.d as i64))
        }
    }
}

pub fn is_squarefree(d: u64) -> bool {
    if d == 0 {
        return false;
    }
    factorize(&BigInt::from(d))
        .map(|f| f.factors.iter().all(|(_, e)| *e == 1))
        .unwrap_or(false)
}

pub fn fundamental_discriminant(d: u64) -> u64 {
    if d % 4 == 1 {
        d
    } else {
        4 * d
    }
}

/// Unit data for `Q(√d)` via the continued fraction of `ω`.
///
/// The complete quotients `(P + √d)/Q` are iterated in exact integer
/// arithmetic. The first convergent `p/q` with `N(p − qω) = ±1` yields the
/// fundamental unit `ε₀ = p − q·ω̄`; it must appear within the first period,
/// which is checked.
pub fn field_data(d: u64) -> Result<FieldData> {
    if d <= 1 || !is_squarefree(d) {
        return Err(Error::InvalidField(format!("d = {d}")));
    }
    let db = BigInt::from(d);
    let s = db.sqrt();
    let (mut p_cq, mut q_cq) = if d % 4 == 1 {
        (BigInt::one(), BigInt::from(2))
    } else {
        (BigInt::zero(), BigInt::one())
    };
    let (t, _) = omega_data(d);

    let (mut p_prev, mut p_cur) = (BigInt::zero(), BigInt::one());
    let (mut q_prev, mut q_cur) = (BigInt::one(), BigInt::zero());
    let mut seen: HashMap<(BigInt, BigInt), usize> = HashMap::new();
    let mut eps0: Option<(QuadElem, usize)> = None;
    let mut period = None;

    for k in 0usize.. {
        let key = (p_cq.clone(), q_cq.clone());
        if let Some(&first) = seen.get(&key) {
            period = Some((first, k - first));
            break;
        }
        seen.insert(key, k);

        let a = if q_cq.is_positive() {
            (&p_cq + &s).div_floor(&q_cq)
        } else {
            (-&p_cq - &s - 1u32).div_floor(&(-&q_cq))
        };
        let p_next = &a * &p_cur + &p_prev;
        let q_next = &a * &q_cur + &q_prev;
        p_prev = std::mem::replace(&mut p_cur, p_next);
        q_prev = std::mem::replace(&mut q_cur, q_next);

        if eps0.is_none() && q_cur.is_positive() {
            let small = QuadElem::new(d, p_cur.clone(), -q_cur.clone());
            if small.is_unit() {
                // ε₀ = conj(p − qω) = p − q·ω̄ = (p − q·t) + q·ω
                let unit = QuadElem::new(d, &p_cur - &q_cur * t, q_cur.clone());
                eps0 = Some((unit, k));
            }
        }

        let p_new = &a * &q_cq - &p_cq;
        let q_new = (&db - &p_new * &p_new) / &q_cq;
        p_cq = p_new;
        q_cq = q_new;
    }

    let (start, len) = period.expect("continued fraction of a quadratic irrational is periodic");
    let (eps0, idx) = eps0.ok_or_else(|| Error::Internal(format!("no unit within the period for d = {d}")))?;
    if idx >= start + len {
        return Err(Error::Internal(format!(
            "unit found outside the first period for d = {d}"
        )));
    }
    let norm_eps0 = eps0.norm().to_i8().expect("unit norm");
    let eps = if norm_eps0 == 1 {
        eps0.clone()
    } else {
        eps0.mul_unchecked(&eps0)
    };
    let log_eps = eps.ln_abs_sigma1();
    Ok(FieldData {
        d,
        disc: fundamental_discriminant(d),
        eps0,
        norm_eps0,
        eps,
        log_eps,
        period: len,
    })
}

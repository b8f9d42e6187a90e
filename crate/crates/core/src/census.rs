//! The character-sum census for `N(x + yω) = m` over a real quadratic field:
//! prime classification, the split-prime factors `δ_p(φ)`, the integer
//! `c_m`, the solvability verdict and the predicted growth rate.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorize, kronecker, sqrt_mod_prime_power, Factorization, Place};
use crate::classgroup::{class_group, NarrowClassGroup};
use crate::counting::fundamental_solutions;
use crate::cyclotomic::CycloInt;
use crate::error::{Error, Result};
use crate::localdata::locally_solvable;
use crate::quadfield::{field_data, FieldData};

/// One norm equation `N(x + yω) = m` over the maximal order of `Q(√d)`.
#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub d: u64,
    pub disc: u64,
    pub m: BigInt,
    pub m_fact: Factorization,
    pub field: FieldData,
}

impl EquationSpec {
    pub fn new(d: u64, m: impl Into<BigInt>) -> Result<Self> {
        Self::with_field(field_data(d)?, m)
    }

    /// Reuses precomputed unit data, for sweeps over `m`.
    pub fn with_field(field: FieldData, m: impl Into<BigInt>) -> Result<Self> {
        let m = m.into();
        if m.is_zero() {
            return Err(Error::ZeroRhs);
        }
        let m_fact = factorize(&m)?;
        Ok(EquationSpec {
            d: field.d,
            disc: field.disc,
            m,
            m_fact,
            field,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrimeCategory {
    /// `p | D`.
    Ramified,
    /// `(D/p) = +1`.
    Split,
    /// `(D/p) = −1`.
    Inert,
}

/// The finer partition of primes `p ∤ 34` used for `x² − 34y² = m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pell34Class {
    /// `(2/p) = (17/p) = −1`.
    Pi1,
    /// `(34/p) = −1`.
    Pi2,
    /// `(2/p) = (17/p) = 1` and `((−7 + 4√2)/p) = 1`.
    Pi3,
    /// `(2/p) = (17/p) = 1` and `((−7 + 4√2)/p) = −1`.
    Pi4,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassifiedPrime {
    pub p: BigInt,
    pub exponent: u32,
    pub category: PrimeCategory,
    pub pell34: Option<Pell34Class>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrimeClassification {
    pub primes: Vec<ClassifiedPrime>,
}

impl PrimeClassification {
    pub fn of(&self, cat: PrimeCategory) -> impl Iterator<Item = &ClassifiedPrime> {
        self.primes.iter().filter(move |c| c.category == cat)
    }

    pub fn get(&self, p: &BigInt) -> Option<&ClassifiedPrime> {
        self.primes.iter().find(|c| &c.p == p)
    }
}

/// Tag of an odd prime `p ∤ 34` in the `Π₁…Π₄` partition.
pub fn pell34_class(p: &BigInt) -> Option<Pell34Class> {
    let two = BigInt::from(2);
    if *p == two || *p == BigInt::from(17) {
        return None;
    }
    let l2 = kronecker(&two, p);
    let l17 = kronecker(&BigInt::from(17), p);
    Some(match (l2, l17) {
        (-1, -1) => Pell34Class::Pi1,
        (1, 1) => {
            // (−7 − 4r)(−7 + 4r) = 17 is a square mod p, so either root r works.
            let r = sqrt_mod_prime_power(&two, p, 1).expect("2 is a square mod p");
            let v = BigInt::from(-7) + 4 * r;
            if kronecker(&v, p) == 1 {
                Pell34Class::Pi3
            } else {
                Pell34Class::Pi4
            }
        }
        _ => Pell34Class::Pi2,
    })
}

pub fn classify_primes(spec: &EquationSpec) -> PrimeClassification {
    let disc = BigInt::from(spec.disc);
    let primes = spec
        .m_fact
        .factors
        .iter()
        .map(|(p, e)| {
            let category = match kronecker(&disc, p) {
                0 => PrimeCategory::Ramified,
                1 => PrimeCategory::Split,
                _ => PrimeCategory::Inert,
            };
            let pell34 = if spec.d == 34 { pell34_class(p) } else { None };
            ClassifiedPrime {
                p: p.clone(),
                exponent: *e,
                category,
                pell34,
            }
        })
        .collect();
    PrimeClassification { primes }
}

/// `δ_p(φ) = Σ_{j=0}^{e} ζ^{2j−e}` where `ζ = φ(σ_p) = ζ_n^k`.
pub fn delta_p(n: u32, k: u64, e: u32) -> CycloInt {
    (0..=e as i64).fold(CycloInt::zero(n), |acc, j| {
        acc.add(&CycloInt::zeta_pow(n, k as i64 * (2 * j - e as i64)))
    })
}

/// The character sum
/// `c_m = Σ_φ φ(σ_sgn) · Π_{p | D} φ(σ_p)^{t_p} · Π_{p split} δ_p(φ)`,
/// certified to be a nonnegative rational integer.
pub fn c_m(spec: &EquationSpec, group: &NarrowClassGroup) -> Result<BigInt> {
    if group.discriminant() != &BigInt::from(spec.disc) {
        return Err(Error::InvalidInput(format!(
            "class group of discriminant {} used for D = {}",
            group.discriminant(),
            spec.disc
        )));
    }
    let n = group.exponent() as u32;
    let classes = classify_primes(spec);
    let sign = if spec.m.is_negative() { group.sign_class() } else { group.identity() };

    let mut ramified = Vec::new();
    let mut split = Vec::new();
    for cp in &classes.primes {
        match cp.category {
            PrimeCategory::Ramified => ramified.push((group.frobenius_class(&cp.p)?, cp.exponent)),
            PrimeCategory::Split => split.push((group.frobenius_class(&cp.p)?, cp.exponent)),
            PrimeCategory::Inert => {}
        }
    }

    let mut total = CycloInt::zero(n);
    for chi in group.characters() {
        let mut exp = chi.exponent_at(sign);
        for &(g, t) in &ramified {
            exp += chi.exponent_at(g) * t as u64;
        }
        let mut term = CycloInt::zeta_pow(n, (exp % n as u64) as i64);
        for &(g, e) in &split {
            term = term.mul(&delta_p(n, chi.exponent_at(g), e));
        }
        total = total.add(&term);
    }
    match total.as_integer() {
        Some(v) if !v.is_negative() => Ok(v),
        _ => Err(Error::Internal(format!(
            "character sum for d = {}, m = {} is not a nonnegative integer: {total:?}",
            spec.d, spec.m
        ))),
    }
}

/// `2·c_m / (h⁺ · √D · log ε)`.
pub fn predicted_slope_from(c: &BigInt, h_plus: usize, field: &FieldData) -> f64 {
    2.0 * c.to_f64().unwrap_or(f64::INFINITY) / (h_plus as f64 * field.sqrt_disc() * field.log_eps)
}

/// The raw formula, without the local-solvability gate applied by [`verdict`].
pub fn predicted_slope(spec: &EquationSpec) -> Result<f64> {
    let group = class_group(spec.disc)?;
    let c = c_m(spec, &group)?;
    Ok(predicted_slope_from(&c, group.h_plus(), &spec.field))
}

#[derive(Debug, Clone, PartialEq)]
pub struct CensusVerdict {
    pub d: u64,
    pub m: BigInt,
    /// Local solvability at `∞` and at every prime dividing `2dm`.
    pub locally_solvable: Vec<(Place, bool)>,
    pub c_m: BigInt,
    pub solvable: bool,
    pub predicted_slope: f64,
    pub witness: Option<(BigInt, BigInt)>,
    /// `(−1)^{s₀} · Π_{p ∈ Π₁} p^{e_p}`, only from [`pell34_criterion`].
    pub m1: Option<BigInt>,
}

impl CensusVerdict {
    pub fn locally_solvable_everywhere(&self) -> bool {
        self.locally_solvable.iter().all(|(_, ok)| *ok)
    }
}

/// Primes dividing `2dm`, ascending.
fn bad_primes(spec: &EquationSpec) -> Result<Vec<BigInt>> {
    let n = BigInt::from(2u64) * spec.d * &spec.m;
    Ok(factorize(&n)?.factors.into_iter().map(|(p, _)| p).collect())
}

pub fn local_flags(spec: &EquationSpec) -> Result<Vec<(Place, bool)>> {
    // an indefinite binary form represents every nonzero real
    let mut flags = vec![(Place::Infinity, true)];
    for p in bad_primes(spec)? {
        let ok = locally_solvable(spec, &p)?;
        flags.push((Place::Prime(p), ok));
    }
    Ok(flags)
}

pub fn verdict(spec: &EquationSpec) -> Result<CensusVerdict> {
    verdict_with(spec, &class_group(spec.disc)?)
}

/// [`verdict`] with a precomputed class group.
pub fn verdict_with(spec: &EquationSpec, group: &NarrowClassGroup) -> Result<CensusVerdict> {
    let locally = local_flags(spec)?;
    let c = c_m(spec, group)?;
    let everywhere = locally.iter().all(|(_, ok)| *ok);
    let solvable = everywhere && !c.is_zero();
    let witness = if solvable {
        fundamental_solutions(spec)?.witness()
    } else {
        None
    };
    Ok(CensusVerdict {
        d: spec.d,
        m: spec.m.clone(),
        locally_solvable: locally,
        // a local obstruction makes the count identically zero
        predicted_slope: if everywhere { predicted_slope_from(&c, group.h_plus(), &spec.field) } else { 0.0 },
        c_m: c,
        solvable,
        witness,
        m1: None,
    })
}

/// The explicit criterion for `x² − 34y² = m`.
///
/// Writing `m = (−1)^{s₀} 2^{s₁} 17^{s₂} Π p^{e_p}`, the equation is solvable
/// iff `m₁ ≡ ±1 (mod 8)`, `(m₁/17) = 1`, every `p ∈ Π₂` has even exponent, and
/// one of three cases holds; each case fixes `c_m` in closed form.
pub fn pell34_criterion(m: impl Into<BigInt>) -> Result<CensusVerdict> {
    let spec = EquationSpec::new(34, m)?;
    let s0 = u32::from(spec.m.is_negative());
    let s2 = spec.m_fact.exponent(&BigInt::from(17));
    let classes = classify_primes(&spec);

    let mut m1 = if s0 == 1 { BigInt::from(-1) } else { BigInt::one() };
    let mut pi1 = Vec::new();
    let mut pi34_prod = BigInt::one(); // Π_{Π₃ ∪ Π₄} (1 + e)
    let mut pi4_sum = 0u32;
    let mut inert_ok = true;
    let mut inert_flags = Vec::new();
    for cp in &classes.primes {
        let e = cp.exponent;
        match cp.pell34 {
            Some(Pell34Class::Pi1) => {
                m1 *= cp.p.pow(e);
                pi1.push(e);
            }
            Some(Pell34Class::Pi2) => {
                inert_ok &= e % 2 == 0;
                inert_flags.push((Place::Prime(cp.p.clone()), e % 2 == 0));
            }
            Some(Pell34Class::Pi3) => pi34_prod *= 1 + e,
            Some(Pell34Class::Pi4) => {
                pi34_prod *= 1 + e;
                pi4_sum += e;
            }
            None => {}
        }
    }
    let m1_mod8 = m1.mod_floor(&BigInt::from(8));
    let ok2 = m1_mod8 == BigInt::one() || m1_mod8 == BigInt::from(7);
    let ok17 = kronecker(&m1, &BigInt::from(17)) == 1;
    let mut locally = vec![
        (Place::Infinity, true),
        (Place::prime(2), ok2),
        (Place::prime(17), ok17),
    ];
    locally.extend(inert_flags);
    let local_ok = ok2 && ok17 && inert_ok;

    let pi1_prod: BigInt = pi1.iter().map(|&e| BigInt::from(1 + e)).product();
    let c = if !local_ok {
        BigInt::zero()
    } else if pi1.iter().any(|e| e % 2 == 1) {
        // case (1): 2 Π_{Π(m) \ Π₂} (1 + e)
        2 * &pi1_prod * &pi34_prod
    } else if !pi1.is_empty() {
        // case (2): 2 r Π_{Π₃ ∪ Π₄} (1 + e)
        let parity = s0 + s2 + pi1.iter().sum::<u32>() / 2 + pi4_sum;
        let sign = if parity.is_multiple_of(2) { 1 } else { -1 };
        let r = BigInt::from(sign) + &pi1_prod;
        2 * r * &pi34_prod
    } else if pi4_sum % 2 == (s0 + s2) % 2 {
        // case (3)
        4 * &pi34_prod
    } else {
        BigInt::zero()
    };
    let solvable = local_ok && !c.is_zero();
    // c_m / 4 over √34·log ε; the case constants are 1/(2√34), r/(2√34), 1/√34
    let predicted = c.to_f64().unwrap() / (4.0 * 34f64.sqrt() * spec.field.log_eps);
    let witness = if solvable {
        fundamental_solutions(&spec)?.witness()
    } else {
        None
    };
    Ok(CensusVerdict {
        d: 34,
        m: spec.m.clone(),
        locally_solvable: locally,
        c_m: c,
        solvable,
        predicted_slope: predicted,
        witness,
        m1: Some(m1),
    })
}

/// Whether `x² − δy² = −1` has an integral solution, read off the narrow
/// class group: the class of `−1` is trivial iff `h⁺ = h`.
pub fn neg_pell_solvable(delta: u64) -> Result<bool> {
    if delta % 4 == 1 {
        return Err(Error::InvalidInput(format!("δ = {delta} must not be 1 mod 4")));
    }
    if delta <= 1 || !crate::quadfield::is_squarefree(delta) {
        return Err(Error::InvalidInput(format!("δ = {delta} must be squarefree and > 1")));
    }
    let g = class_group(4 * delta)?;
    Ok(g.sign_class() == g.identity())
}

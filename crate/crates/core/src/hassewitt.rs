//! Quadratic spaces over `Q`: congruence diagonalization, Hasse–Witt
//! invariants, and the constant `c_n(a)` for the variety of symmetric
//! `n × n` integer matrices of determinant `a`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use crate::arith::{factorize, hilbert_symbol, Place};
use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<BigRational>>;

/// A nondegenerate quadratic space with a diagonal basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSpace {
    pub source: Matrix,
    pub diagonal: Vec<BigRational>,
}

impl QuadraticSpace {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    pub fn determinant(&self) -> BigRational {
        self.diagonal.iter().fold(BigRational::one(), |acc, d| acc * d)
    }

    /// `⟨d₁, …, d_n⟩` directly.
    pub fn from_diagonal(diagonal: Vec<BigRational>) -> Result<Self> {
        if diagonal.iter().any(Zero::is_zero) {
            return Err(Error::SingularMatrix);
        }
        let n = diagonal.len();
        let mut source = vec![vec![BigRational::zero(); n]; n];
        for (i, d) in diagonal.iter().enumerate() {
            source[i][i] = d.clone();
        }
        Ok(QuadraticSpace { source, diagonal })
    }
}

pub fn int_matrix(rows: &[&[i64]]) -> Matrix {
    rows.iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(v.into())).collect())
        .collect()
}

fn check_symmetric(m: &Matrix) -> Result<usize> {
    let n = m.len();
    if n == 0 || m.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidInput("matrix must be square and nonempty".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if m[i][j] != m[j][i] {
                return Err(Error::InvalidInput("matrix must be symmetric".into()));
            }
        }
    }
    Ok(n)
}

/// Congruence diagonalization `PᵀMP = diag(d₁, …, d_n)` over `Q`.
pub fn diagonalize(m: &Matrix) -> Result<QuadraticSpace> {
    let n = check_symmetric(m)?;
    let order: Vec<usize> = (0..n).collect();
    diagonalize_with_order(m, &order)
}

/// [`diagonalize`] after permuting the basis by `order`, which yields a
/// different (congruent) diagonal in general.
pub fn diagonalize_with_order(m: &Matrix, order: &[usize]) -> Result<QuadraticSpace> {
    let n = check_symmetric(m)?;
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n).collect::<Vec<_>>() {
        return Err(Error::InvalidInput("order must be a permutation".into()));
    }
    let mut a: Matrix = order
        .iter()
        .map(|&i| order.iter().map(|&j| m[i][j].clone()).collect())
        .collect();
    let mut diagonal = Vec::with_capacity(n);
    for i in 0..n {
        if a[i][i].is_zero() {
            if let Some(j) = (i + 1..n).find(|&j| !a[j][j].is_zero()) {
                a.swap(i, j);
                for row in a.iter_mut() {
                    row.swap(i, j);
                }
            } else if let Some(j) = (i + 1..n).find(|&j| !a[i][j].is_zero()) {
                // e_i ← e_i + e_j makes the pivot 2·a_ij
                for k in 0..n {
                    let v = a[j][k].clone();
                    a[i][k] += v;
                }
                for k in 0..n {
                    let v = a[k][j].clone();
                    a[k][i] += v;
                }
            } else {
                return Err(Error::SingularMatrix);
            }
        }
        let pivot = a[i][i].clone();
        for k in i + 1..n {
            if a[k][i].is_zero() {
                continue;
            }
            let f = &a[k][i] / &pivot;
            for l in i..n {
                let v = &f * &a[i][l];
                a[k][l] -= v;
            }
            for l in i..n {
                let v = &f * &a[l][i];
                a[l][k] -= v;
            }
        }
        diagonal.push(pivot);
    }
    Ok(QuadraticSpace {
        source: m.clone(),
        diagonal,
    })
}

/// `Π_{i<j} (d_i, d_j)_v`.
pub fn hasse_invariant(q: &QuadraticSpace, place: &Place) -> i8 {
    let d = &q.diagonal;
    let mut h = 1;
    for i in 0..d.len() {
        for j in i + 1..d.len() {
            h *= hilbert_symbol(&d[i], &d[j], place);
        }
    }
    h
}

/// `lim h` at the real place for `X_a`, by dimension and the sign of `a`.
pub fn arch_h_limit(n: u32, sign_a: i8) -> Result<i8> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("dimension {n} < 3")));
    }
    match (sign_a.signum(), n % 4) {
        (1, 1) | (1, 3) | (1, 0) => Ok(1),
        (1, 2) => Ok(0),
        (-1, 3) => Ok(1),
        (-1, 1) => Ok(-1),
        (-1, _) => Err(Error::UnspecifiedLimit { n }),
        _ => Err(Error::InvalidInput("a must be nonzero".into())),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CnaReport {
    pub n: u32,
    pub a: BigInt,
    /// `ρ_p = ∫h d_p / ∫d_p` for each `p | 2a`.
    pub ratios: Vec<(u64, BigRational)>,
    pub arch_limit: i8,
    pub c_value: BigRational,
}

/// `ρ₂` for `(n, a) = (3, 1)`: the two `SL₃(Z₂)`-orbits have representatives
/// `L₁` and `L₋₁` with `h = ±1` and weights inverse to their local densities,
/// whose ratio is `R = (1 + 2⁻¹)/(1 − 2⁻¹) = 3`; so `ρ₂ = (1 − R)/(1 + R)`.
pub fn builtin_rho2_n3_a1() -> BigRational {
    let half = BigRational::new(1.into(), 2.into());
    let one = BigRational::one();
    let r = (&one + &half) / (&one - &half);
    (&one - &r) / (&one + &r)
}

/// `c_n(a) = 1 + (Π_{p | 2a} ρ_p) · ℓ` with `ℓ` the archimedean limit.
/// Ratios are required only when `ℓ ≠ 0`.
pub fn c_n_a(n: u32, a: &BigInt, ratios: &BTreeMap<u64, BigRational>) -> Result<CnaReport> {
    if a.is_zero() {
        return Err(Error::InvalidInput("a must be nonzero".into()));
    }
    let sign = if a.is_negative() { -1 } else { 1 };
    let ell = arch_h_limit(n, sign)?;
    let mut primes: Vec<u64> = factorize(&(a * 2))?
        .factors
        .iter()
        .map(|(p, _)| p.to_u64().ok_or_else(|| Error::InvalidInput(format!("prime {p} too large"))))
        .collect::<Result<_>>()?;
    primes.sort_unstable();
    let mut used = Vec::new();
    let mut product = BigRational::one();
    for p in primes {
        let rho = match ratios.get(&p) {
            Some(r) => Some(r.clone()),
            None if p == 2 && n == 3 && a.is_one() => Some(builtin_rho2_n3_a1()),
            None => None,
        };
        match rho {
            Some(r) => {
                product *= &r;
                used.push((p, r));
            }
            None if ell == 0 => {}
            None => return Err(Error::MissingRatio(p)),
        }
    }
    let c_value = BigRational::one() + product * BigRational::from_integer(ell.into());
    Ok(CnaReport {
        n,
        a: a.clone(),
        ratios: used,
        arch_limit: ell,
        c_value,
    })
}

/// `#{X ∈ M₃(Z/8) : XᵀLX ≡ L (mod 8)}` by column-wise search: column `i`
/// must satisfy `x_iᵀ L x_j ≡ L_ij` against every earlier column `j`.
pub fn isometry_count_mod8(l: &[[i64; 3]; 3]) -> u64 {
    const M: i64 = 8;
    let vecs: Vec<[i64; 3]> = (0..512)
        .map(|i| [i % 8, (i / 8) % 8, i / 64])
        .collect();
    let form = |u: &[i64; 3], v: &[i64; 3]| -> i64 {
        let mut s = 0;
        for i in 0..3 {
            for j in 0..3 {
                s += u[i] * l[i][j] * v[j];
            }
        }
        s.rem_euclid(M)
    };
    let target = |i: usize, j: usize| l[i][j].rem_euclid(M);
    let col = |k: usize| -> Vec<&[i64; 3]> { vecs.iter().filter(|v| form(v, v) == target(k, k)).collect() };
    let (c0, c1, c2) = (col(0), col(1), col(2));
    c0.par_iter()
        .map(|x0| {
            let mut n = 0u64;
            for x1 in c1.iter().filter(|x1| form(x0, x1) == target(0, 1)) {
                n += c2
                    .iter()
                    .filter(|x2| form(x0, x2) == target(0, 2) && form(x1, x2) == target(1, 2))
                    .count() as u64;
            }
            n
        })
        .sum()
}

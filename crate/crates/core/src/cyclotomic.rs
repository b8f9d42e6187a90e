//! Exact arithmetic in `Z[ζ_n] ≅ Z[x]/(Φ_n(x))`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{One, Zero};

fn cyclotomic_poly(n: u32) -> Vec<i64> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Vec<i64>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(p) = cache.lock().unwrap().get(&n) {
        return p.clone();
    }
    // x^n − 1 divided by Φ_d for every proper divisor d of n.
    let mut num = vec![0i64; n as usize + 1];
    num[0] = -1;
    num[n as usize] = 1;
    for d in 1..n {
        if n.is_multiple_of(d) {
            num = poly_div_exact(&num, &cyclotomic_poly(d));
        }
    }
    cache.lock().unwrap().insert(n, num.clone());
    num
}

/// Quotient of `a / b` for monic `b` dividing `a` (coefficients low → high).
fn poly_div_exact(a: &[i64], b: &[i64]) -> Vec<i64> {
    let mut rem = a.to_vec();
    let db = b.len() - 1;
    let dq = rem.len() - 1 - db;
    let mut q = vec![0i64; dq + 1];
    for i in (0..=dq).rev() {
        let c = rem[i + db];
        q[i] = c;
        for (j, &bj) in b.iter().enumerate() {
            rem[i + j] -= c * bj;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    q
}

/// An element of `Z[ζ_n]`, stored as coefficients of `1, ζ, …, ζ^{φ(n)−1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CycloInt {
    n: u32,
    coeffs: Vec<BigInt>,
}

impl CycloInt {
    pub fn degree_of(n: u32) -> usize {
        cyclotomic_poly(n).len() - 1
    }

    pub fn zero(n: u32) -> Self {
        CycloInt {
            n,
            coeffs: vec![BigInt::zero(); Self::degree_of(n)],
        }
    }

    pub fn from_integer(n: u32, v: impl Into<BigInt>) -> Self {
        let mut z = Self::zero(n);
        z.coeffs[0] = v.into();
        z
    }

    pub fn one(n: u32) -> Self {
        Self::from_integer(n, 1)
    }

    /// `ζ_n^k` for any integer `k`.
    pub fn zeta_pow(n: u32, k: i64) -> Self {
        let e = k.rem_euclid(n as i64) as usize;
        let mut raw = vec![BigInt::zero(); e + 1];
        raw[e] = BigInt::one();
        Self::reduce(n, raw)
    }

    fn reduce(n: u32, mut raw: Vec<BigInt>) -> Self {
        let phi = cyclotomic_poly(n);
        let deg = phi.len() - 1;
        while raw.len() > deg {
            let top = raw.pop().unwrap();
            if top.is_zero() {
                continue;
            }
            let shift = raw.len() - deg;
            // x^{shift+deg} ≡ −Σ_{j<deg} φ_j x^{shift+j}
            for (j, &c) in phi[..deg].iter().enumerate() {
                if c != 0 {
                    raw[shift + j] -= &top * c;
                }
            }
        }
        raw.resize(deg, BigInt::zero());
        CycloInt { n, coeffs: raw }
    }

    pub fn order(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "cyclotomic order mismatch");
        CycloInt {
            n: self.n,
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&BigInt::from(-1)))
    }

    pub fn scale(&self, k: &BigInt) -> Self {
        CycloInt {
            n: self.n,
            coeffs: self.coeffs.iter().map(|a| a * k).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.n, other.n, "cyclotomic order mismatch");
        let mut raw = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len()];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    raw[i + j] += a * b;
                }
            }
        }
        Self::reduce(self.n, raw)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// The value as a rational integer, when it lies in `Z`.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.coeffs[1..]
            .iter()
            .all(Zero::is_zero)
            .then(|| self.coeffs[0].clone())
    }
}

impl fmt::Debug for CycloInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CycloInt<{}>{:?}", self.n, self.coeffs)
    }
}

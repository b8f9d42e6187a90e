//! Exact integer and rational primitives: factorization, residue symbols,
//! Hilbert symbols, square roots modulo prime powers.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

const TRIAL_LIMIT: u64 = 1_000_000;

/// `sign · Π p^e` with primes strictly increasing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    pub sign: i8,
    pub factors: Vec<(BigInt, u32)>,
}

impl Factorization {
    pub fn value(&self) -> BigInt {
        let mut acc = BigInt::from(self.sign);
        for (p, e) in &self.factors {
            acc *= num_traits::pow(p.clone(), *e as usize);
        }
        acc
    }

    /// Exponent of `p` (zero when `p` does not divide).
    pub fn exponent(&self, p: &BigInt) -> u32 {
        self.factors
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn primes(&self) -> impl Iterator<Item = &BigInt> {
        self.factors.iter().map(|(p, _)| p)
    }
}

/// A place of `Q`: the real place or a finite prime.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Infinity,
    Prime(BigInt),
}

impl Place {
    pub fn prime(p: u64) -> Self {
        Place::Prime(BigInt::from(p))
    }
}

impl std::fmt::Display for Place {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Place::Infinity => write!(f, "inf"),
            Place::Prime(p) => write!(f, "{p}"),
        }
    }
}

fn small_primes() -> &'static [u64] {
    static PRIMES: OnceLock<Vec<u64>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        let n = TRIAL_LIMIT as usize;
        let mut sieve = vec![true; n + 1];
        sieve[0] = false;
        sieve[1] = false;
        let mut i = 2;
        while i * i <= n {
            if sieve[i] {
                let mut j = i * i;
                while j <= n {
                    sieve[j] = false;
                    j += i;
                }
            }
            i += 1;
        }
        sieve
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k as u64))
            .collect()
    })
}

/// Exact factorization of a nonzero integer.
///
/// Trial division up to 10⁶, then Brent's variant of Pollard rho on the
/// cofactor. Prime certification is deterministic Miller–Rabin below 2⁶⁴
/// and Baillie–PSW above.
pub fn factorize(n: &BigInt) -> Result<Factorization> {
    if n.is_zero() {
        return Err(Error::ZeroFactorization);
    }
    let sign = if n.is_negative() { -1 } else { 1 };
    let mut rest = n.abs();
    let mut found: Vec<BigInt> = Vec::new();
    let mut exps: Vec<(BigInt, u32)> = Vec::new();

    for &p in small_primes() {
        let pb = BigInt::from(p);
        if &pb * &pb > rest {
            break;
        }
        let mut e = 0;
        while (&rest % &pb).is_zero() {
            rest /= &pb;
            e += 1;
        }
        if e > 0 {
            exps.push((pb, e));
        }
    }
    if rest > BigInt::one() {
        let limit = BigInt::from(TRIAL_LIMIT);
        if rest <= &limit * &limit {
            found.push(rest);
        } else {
            split_large(rest, &mut found);
        }
    }
    found.sort();
    for p in found {
        match exps.last_mut() {
            Some((q, e)) if *q == p => *e += 1,
            _ => exps.push((p, 1)),
        }
    }
    exps.sort_by(|a, b| a.0.cmp(&b.0));
    // merge duplicates that trial division and rho may both have produced
    let mut factors: Vec<(BigInt, u32)> = Vec::with_capacity(exps.len());
    for (p, e) in exps {
        match factors.last_mut() {
            Some((q, f)) if *q == p => *f += e,
            _ => factors.push((p, e)),
        }
    }
    Ok(Factorization { sign, factors })
}

fn split_large(n: BigInt, out: &mut Vec<BigInt>) {
    if n.is_one() {
        return;
    }
    if is_probable_prime(&n) {
        out.push(n);
        return;
    }
    if let Some(r) = is_perfect_square(&n) {
        split_large(r.clone(), out);
        split_large(r, out);
        return;
    }
    let d = match n.to_u64() {
        Some(small) => BigInt::from(pollard_brent_u64(small)),
        None => pollard_brent_big(&n),
    };
    split_large(&n / &d, out);
    split_large(d, out);
}

fn mulmod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn powmod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mulmod(acc, b, m);
        }
        b = mulmod(b, b, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = powmod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mulmod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Nontrivial divisor of an odd composite `n`.
fn pollard_brent_u64(n: u64) -> u64 {
    if n.is_multiple_of(2) {
        return 2;
    }
    let mut c = 1u64;
    loop {
        let f = |x: u64| ((mulmod(x, x, n) as u128 + c as u128) % n as u128) as u64;
        let (mut y, mut r, mut q, m) = (2u64, 1u64, 1u64, 128u64);
        let mut g = 1u64;
        let mut x = y;
        let mut ys = y;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..m.min(r - k) {
                    y = f(y);
                    q = mulmod(q, x.abs_diff(y), n);
                }
                g = q.gcd(&n);
                k += m;
            }
            r *= 2;
        }
        if g == n {
            loop {
                ys = f(ys);
                g = x.abs_diff(ys).gcd(&n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
        c += 1;
    }
}

fn pollard_brent_big(n: &BigInt) -> BigInt {
    if n.is_even() {
        return BigInt::from(2);
    }
    let mut c = BigInt::one();
    loop {
        let f = |x: &BigInt| (x * x + &c) % n;
        let mut y = BigInt::from(2);
        let mut r = 1u64;
        let mut q = BigInt::one();
        let m = 128u64;
        let mut g = BigInt::one();
        let mut x = y.clone();
        let mut ys = y.clone();
        while g.is_one() {
            x = y.clone();
            for _ in 0..r {
                y = f(&y);
            }
            let mut k = 0;
            while k < r && g.is_one() {
                ys = y.clone();
                for _ in 0..m.min(r - k) {
                    y = f(&y);
                    q = (q * (&x - &y).abs()) % n;
                }
                g = q.gcd(n);
                k += m;
            }
            r *= 2;
        }
        if &g == n {
            loop {
                ys = f(&ys);
                g = (&x - &ys).abs().gcd(n);
                if !g.is_one() {
                    break;
                }
            }
        }
        if &g != n {
            return g;
        }
        c += 1;
    }
}

/// Primality: deterministic below 2⁶⁴, Baillie–PSW above.
pub fn is_probable_prime(n: &BigInt) -> bool {
    if let Some(small) = n.to_u64() {
        return is_prime_u64(small);
    }
    if n.is_negative() || n.is_even() {
        return false;
    }
    for &p in &small_primes()[..100] {
        if (n % p).is_zero() {
            return false;
        }
    }
    strong_probable_prime_base2(n) && strong_lucas_probable_prime(n)
}

fn strong_probable_prime_base2(n: &BigInt) -> bool {
    let nm1: BigInt = n - 1;
    let s = nm1.trailing_zeros().unwrap_or(0);
    let d = &nm1 >> s;
    let mut x = BigInt::from(2).modpow(&d, n);
    if x.is_one() || x == nm1 {
        return true;
    }
    for _ in 1..s {
        x = (&x * &x) % n;
        if x == nm1 {
            return true;
        }
    }
    false
}

fn half_mod(x: BigInt, n: &BigInt) -> BigInt {
    let x = x.mod_floor(n);
    if x.is_odd() {
        (x + n) >> 1
    } else {
        x >> 1
    }
}

/// Strong Lucas test with Selfridge's parameter choice.
fn strong_lucas_probable_prime(n: &BigInt) -> bool {
    if is_perfect_square(n).is_some() {
        return false;
    }
    let mut dd = BigInt::from(5);
    loop {
        match kronecker(&dd, n) {
            -1 => break,
            0
                if dd.abs() != *n => {
                    return false;
                }
            _ => {}
        }
        dd = if dd.is_positive() { -(dd + 2u32) } else { -(dd - 2u32) };
    }
    let p = BigInt::one();
    let q: BigInt = (BigInt::one() - &dd) / 4;
    let np1: BigInt = n + 1;
    let s = np1.trailing_zeros().unwrap_or(0);
    let d = &np1 >> s;

    let mut u = BigInt::one();
    let mut v = p.clone();
    let mut qk = q.mod_floor(n);
    let bits = d.bits();
    for i in (0..bits - 1).rev() {
        u = (&u * &v).mod_floor(n);
        v = (&v * &v - &qk * 2u32).mod_floor(n);
        qk = (&qk * &qk).mod_floor(n);
        if d.bit(i) {
            let nu = half_mod(&p * &u + &v, n);
            let nv = half_mod(&dd * &u + &p * &v, n);
            u = nu;
            v = nv;
            qk = (&qk * &q).mod_floor(n);
        }
    }
    if u.is_zero() || v.is_zero() {
        return true;
    }
    for _ in 1..s {
        v = (&v * &v - &qk * 2u32).mod_floor(n);
        qk = (&qk * &qk).mod_floor(n);
        if v.is_zero() {
            return true;
        }
    }
    false
}

/// The Kronecker symbol `(a/n)`.
pub fn kronecker(a: &BigInt, n: &BigInt) -> i8 {
    if n.is_zero() {
        return if a.abs().is_one() { 1 } else { 0 };
    }
    let mut k: i8 = 1;
    let mut b = n.clone();
    if b.is_negative() {
        b = -b;
        if a.is_negative() {
            k = -k;
        }
    }
    let v = b.trailing_zeros().unwrap_or(0);
    if v > 0 {
        if a.is_even() {
            return 0;
        }
        b >>= v;
        if v % 2 == 1 {
            k *= kron2(a);
        }
    }
    // b is now odd and positive: Jacobi symbol.
    k * jacobi(&a.mod_floor(&b), &b)
}

/// `(a/2)` for odd `a`.
fn kron2(a: &BigInt) -> i8 {
    match a.mod_floor(&BigInt::from(8)).to_u8().unwrap() {
        1 | 7 => 1,
        _ => -1,
    }
}

fn jacobi(a: &BigInt, b: &BigInt) -> i8 {
    let mut a = a.clone();
    let mut b = b.clone();
    let mut k: i8 = 1;
    let three = BigInt::from(3);
    let four = BigInt::from(4);
    loop {
        if b.is_one() {
            return k;
        }
        if a.is_zero() {
            return 0;
        }
        let v = a.trailing_zeros().unwrap_or(0);
        a >>= v;
        if v % 2 == 1 {
            k *= kron2(&b);
        }
        if a.mod_floor(&four) == three && b.mod_floor(&four) == three {
            k = -k;
        }
        let r = b.mod_floor(&a);
        b = a;
        a = r;
    }
}

pub fn kronecker_i64(a: i64, n: i64) -> i8 {
    kronecker(&BigInt::from(a), &BigInt::from(n))
}

/// `(v, u)` with `n = p^v · u` and `p ∤ u`. `n` must be nonzero.
pub fn split_valuation(n: &BigInt, p: &BigInt) -> (u32, BigInt) {
    debug_assert!(!n.is_zero());
    let mut v = 0;
    let mut u = n.clone();
    loop {
        let (q, r) = u.div_rem(p);
        if !r.is_zero() {
            return (v, u);
        }
        u = q;
        v += 1;
    }
}

pub fn valuation(n: &BigInt, p: &BigInt) -> u32 {
    if n.is_zero() {
        return u32::MAX;
    }
    split_valuation(n, p).0
}

/// `r` with `r² = n`, if `n` is a perfect square.
pub fn is_perfect_square(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Exact `⌊√n⌋` for `u128`.
pub fn isqrt_u128(n: u128) -> u128 {
    n.isqrt()
}

/// Square root of a unit `a` modulo an odd prime `p` (Tonelli–Shanks,
/// non-residue chosen as the least one).
fn sqrt_mod_odd_prime(a: &BigInt, p: &BigInt) -> Option<BigInt> {
    let a = a.mod_floor(p);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    if jacobi(&a, p) != 1 {
        return None;
    }
    let pm1: BigInt = p - 1;
    let s = pm1.trailing_zeros().unwrap_or(0);
    let q = &pm1 >> s;
    let mut z = BigInt::from(2);
    while jacobi(&z, p) != -1 {
        z += 1;
    }
    let mut m = s;
    let mut c = z.modpow(&q, p);
    let mut t = a.modpow(&q, p);
    let mut r = a.modpow(&((&q + 1) >> 1), p);
    while !t.is_one() {
        let mut i = 0;
        let mut t2 = t.clone();
        while !t2.is_one() {
            t2 = (&t2 * &t2) % p;
            i += 1;
        }
        let b = c.modpow(&(BigInt::one() << (m - i - 1)), p);
        m = i;
        c = (&b * &b) % p;
        t = (t * &c) % p;
        r = (r * b) % p;
    }
    Some(r)
}

/// All square roots of a unit `u` modulo `p^k`, as residues in `[0, p^k)`.
fn unit_roots_mod_prime_power(u: &BigInt, p: &BigInt, k: u32) -> Vec<BigInt> {
    let two = BigInt::from(2);
    if *p == two {
        let mut roots = vec![BigInt::one()];
        let mut modulus = two.clone();
        if !(u.mod_floor(&modulus)).is_one() {
            return Vec::new();
        }
        for _ in 1..k {
            let next_mod: BigInt = &modulus * 2;
            let target = u.mod_floor(&next_mod);
            let mut next = Vec::new();
            for r in &roots {
                for cand in [r.clone(), r + &modulus] {
                    if (&cand * &cand).mod_floor(&next_mod) == target && !next.contains(&cand) {
                        next.push(cand);
                    }
                }
            }
            roots = next;
            modulus = next_mod;
            if roots.is_empty() {
                break;
            }
        }
        roots.sort();
        return roots;
    }
    let Some(r0) = sqrt_mod_odd_prime(u, p) else {
        return Vec::new();
    };
    // Newton/Hensel lift: r ← r − (r² − u)/(2r) mod p^j
    let mut r = r0;
    let mut modulus = p.clone();
    for _ in 1..k {
        modulus *= p;
        let inv = mod_inverse(&(2 * &r), &modulus).expect("2r is a unit");
        r = (&r - (&r * &r - u) * inv).mod_floor(&modulus);
    }
    let other = (-&r).mod_floor(&modulus);
    let mut v = vec![r, other];
    v.sort();
    v.dedup();
    v
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.mod_floor(m).extended_gcd(m);
    e.gcd.is_one().then(|| e.x.mod_floor(m))
}

/// Least nonnegative `r` with `r² ≡ a (mod p^k)`, if any.
pub fn sqrt_mod_prime_power(a: &BigInt, p: &BigInt, k: u32) -> Option<BigInt> {
    assert!(k >= 1);
    let modulus = num_traits::pow(p.clone(), k as usize);
    let a = a.mod_floor(&modulus);
    if a.is_zero() {
        return Some(BigInt::zero());
    }
    let (v, u) = split_valuation(&a, p);
    if v % 2 == 1 {
        return None;
    }
    let half = num_traits::pow(p.clone(), (v / 2) as usize);
    let rest = k - v;
    let roots = unit_roots_mod_prime_power(&u, p, rest);
    // r = p^{v/2}·s with s² ≡ u mod p^{k−v}; s is only determined mod p^{k−v},
    // so the least representative uses the least root class.
    let sub_mod = num_traits::pow(p.clone(), rest as usize);
    roots
        .into_iter()
        .map(|s| (s.mod_floor(&sub_mod)) * &half)
        .min()
}

fn square_class_integer(x: &BigRational) -> BigInt {
    x.numer() * x.denom()
}

/// Hilbert symbol `(a, b)_v` for nonzero rationals.
///
/// At `p = 2`, writing `a = 2^α u`, `b = 2^β w` with `u, w` odd:
/// `(a, b)_2 = (−1)^{ε(u)ε(w) + α·ω(w) + β·ω(u)}` where
/// `ε(u) = (u − 1)/2 mod 2` and `ω(u) = (u² − 1)/8 mod 2`.
/// At odd `p`: `(−1)^{αβ·ε(p)} (u/p)^β (w/p)^α`.
pub fn hilbert_symbol(a: &BigRational, b: &BigRational, place: &Place) -> i8 {
    assert!(!a.is_zero() && !b.is_zero(), "Hilbert symbol of zero");
    let a = square_class_integer(a);
    let b = square_class_integer(b);
    hilbert_symbol_int(&a, &b, place)
}

pub fn hilbert_symbol_int(a: &BigInt, b: &BigInt, place: &Place) -> i8 {
    let p = match place {
        Place::Infinity => {
            return if a.is_negative() && b.is_negative() { -1 } else { 1 };
        }
        Place::Prime(p) => p,
    };
    let (alpha, u) = split_valuation(a, p);
    let (beta, w) = split_valuation(b, p);
    if *p == BigInt::from(2) {
        let eps = |x: &BigInt| -> u32 { x.mod_floor(&BigInt::from(4)).to_u32().unwrap() / 2 };
        let omega = |x: &BigInt| -> u32 {
            match x.mod_floor(&BigInt::from(8)).to_u32().unwrap() {
                1 | 7 => 0,
                _ => 1,
            }
        };
        let e = eps(&u) * eps(&w) + alpha * omega(&w) + beta * omega(&u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    } else {
        let mut s: i8 = 1;
        let eps_p = ((p - 1u32) / 2u32).is_odd();
        if eps_p && (alpha * beta) % 2 == 1 {
            s = -s;
        }
        if beta % 2 == 1 {
            s *= kronecker(&u, p);
        }
        if alpha % 2 == 1 {
            s *= kronecker(&w, p);
        }
        s
    }
}

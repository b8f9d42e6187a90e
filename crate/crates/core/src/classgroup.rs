//! The narrow class group of a real quadratic field, realized as the group
//! of proper-equivalence classes of primitive indefinite binary quadratic
//! forms `ax² + bxy + cy²` of fundamental discriminant `D > 0`.
//!
//! Classes are identified by a canonical member of their reduction cycle:
//! the lexicographically least `(a, b)` among the reduced forms in the
//! cycle. Composition is Dirichlet's united-form formula followed by
//! re-canonicalization.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::arith::{factorize, kronecker, sqrt_mod_prime_power};
use crate::cyclotomic::CycloInt;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Form {
    pub a: BigInt,
    pub b: BigInt,
    pub c: BigInt,
}

impl fmt::Display for Form {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.a, self.b, self.c)
    }
}

impl Form {
    /// A primitive form of positive non-square discriminant with `a ≠ 0`.
    pub fn new(a: impl Into<BigInt>, b: impl Into<BigInt>, c: impl Into<BigInt>) -> Result<Form> {
        let f = Form {
            a: a.into(),
            b: b.into(),
            c: c.into(),
        };
        let disc = f.discriminant();
        if f.a.is_zero() {
            return Err(Error::InvalidForm(format!("{f}: leading coefficient is zero")));
        }
        if !disc.is_positive() || disc.sqrt().pow(2) == disc {
            return Err(Error::InvalidForm(format!(
                "{f}: discriminant {disc} must be positive and non-square"
            )));
        }
        if !f.a.gcd(&f.b).gcd(&f.c).is_one() {
            return Err(Error::InvalidForm(format!("{f} is not primitive")));
        }
        Ok(f)
    }

    pub fn discriminant(&self) -> BigInt {
        &self.b * &self.b - 4 * &self.a * &self.c
    }

    /// `(1, 0, −D/4)` or `(1, 1, (1 − D)/4)`.
    pub fn principal(disc: &BigInt) -> Form {
        let b = if disc.is_even() { BigInt::zero() } else { BigInt::one() };
        let c = (&b * &b - disc) / 4;
        Form { a: BigInt::one(), b, c }
    }

    /// The form of the inverse class.
    pub fn opposite(&self) -> Form {
        Form {
            a: self.a.clone(),
            b: -&self.b,
            c: self.c.clone(),
        }
    }

    /// Reduced: `|√D − 2|a|| < b < √D`.
    pub fn is_reduced(&self) -> bool {
        let s = self.discriminant().sqrt();
        let two_a = 2 * self.a.abs();
        self.b.is_positive() && self.b <= s && &two_a - &self.b <= s && &self.b + &two_a > s
    }

    /// One step of the reduction operator `ρ(a, b, c) = (c, b′, a′)`.
    fn rho(&self, disc: &BigInt, s: &BigInt) -> Form {
        let c_abs = self.c.abs();
        let m: BigInt = 2 * &c_abs;
        let target = (-&self.b).mod_floor(&m);
        let b_new = if &c_abs > s {
            // −|c| < b′ ≤ |c|
            let mut b = target;
            if b > c_abs {
                b -= &m;
            }
            b
        } else {
            // √D − 2|c| < b′ < √D: the largest b′ ≤ ⌊√D⌋ in the residue class
            let diff = (s - &target).mod_floor(&m);
            s - diff
        };
        let a_new = (&b_new * &b_new - disc) / (4 * &self.c);
        Form {
            a: self.c.clone(),
            b: b_new,
            c: a_new,
        }
    }
}

/// The reduced forms in the `ρ`-cycle of `f`, starting from the first
/// reduced form reached.
pub fn cycle(f: &Form) -> Vec<Form> {
    let disc = f.discriminant();
    let s = disc.sqrt();
    let mut g = f.clone();
    while !g.is_reduced() {
        g = g.rho(&disc, &s);
    }
    let start = g.clone();
    let mut out = vec![start.clone()];
    loop {
        g = g.rho(&disc, &s);
        if g == start {
            break;
        }
        out.push(g.clone());
    }
    out
}

/// Canonical representative of the proper-equivalence class of `f`.
pub fn reduce(f: &Form) -> Form {
    cycle(f)
        .into_iter()
        .min_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)))
        .expect("cycles are nonempty")
}

/// A member of the class of `f` with positive leading coefficient.
fn positive_member(f: &Form) -> Form {
    let mut members = cycle(f);
    members.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    members
        .into_iter()
        .find(|g| g.a.is_positive())
        .expect("reduced indefinite cycles contain forms with a > 0")
}

/// Dirichlet composition of two forms with positive leading coefficients.
fn compose_raw(f: &Form, g: &Form, disc: &BigInt) -> Form {
    let (a1, b1) = (&f.a, &f.b);
    let (a2, b2) = (&g.a, &g.b);
    let s: BigInt = (b1 + b2) / 2;
    let e1 = a1.extended_gcd(a2);
    let e2 = e1.gcd.extended_gcd(&s);
    let e = e2.gcd.clone();
    let u = &e2.x * &e1.x;
    let v = &e2.x * &e1.y;
    let w = e2.y;
    // u·a1 + v·a2 + w·s = e
    let big_a = a1 * a2 / (&e * &e);
    let numer: BigInt = &u * a1 * b2 + &v * a2 * b1 + &w * (b1 * b2 + disc) / 2;
    let big_b = (numer / &e).mod_floor(&(&big_a * 2u32));
    let big_c = (&big_b * &big_b - disc) / (4 * &big_a);
    Form {
        a: big_a,
        b: big_b,
        c: big_c,
    }
}

/// Composition of classes; the result is the canonical representative.
pub fn compose(f: &Form, g: &Form) -> Result<Form> {
    let disc = f.discriminant();
    if disc != g.discriminant() {
        return Err(Error::InvalidForm(format!(
            "discriminants differ: {f} and {g}"
        )));
    }
    for h in [f, g] {
        if !h.a.gcd(&h.b).gcd(&h.c).is_one() {
            return Err(Error::InvalidForm(format!("{h} is not primitive")));
        }
    }
    let fp = positive_member(f);
    let gp = positive_member(g);
    let raw = compose_raw(&fp, &gp, &disc);
    if raw.discriminant() != disc {
        return Err(Error::Internal(format!("composition of {f} and {g} left the discriminant")));
    }
    Ok(reduce(&raw))
}

pub fn is_fundamental_discriminant(disc: u64) -> bool {
    let sqf = |n: u64| {
        n > 0
            && factorize(&BigInt::from(n))
                .map(|f| f.factors.iter().all(|(_, e)| *e == 1))
                .unwrap_or(false)
    };
    match disc % 4 {
        1 => disc > 1 && sqf(disc),
        0 => {
            let m = disc / 4;
            (m % 4 == 2 || m % 4 == 3) && sqf(m)
        }
        _ => false,
    }
}

pub type ClassId = usize;

/// The narrow class group `Cl⁺(D)` with its full multiplication table.
#[derive(Debug, Clone)]
pub struct NarrowClassGroup {
    disc: BigInt,
    classes: Vec<Form>,
    index: HashMap<Form, ClassId>,
    table: Vec<Vec<ClassId>>,
    identity: ClassId,
    orders: Vec<u64>,
    /// Generators and their orders; the group is the direct sum of the
    /// cyclic subgroups, with orders dividing one another.
    structure: Vec<(ClassId, u64)>,
    /// Coordinates of each class in the basis given by `structure`.
    coords: Vec<Vec<u64>>,
    exponent: u64,
}

/// Enumerates all reduced forms of discriminant `D`.
fn reduced_forms(disc: &BigInt) -> Vec<Form> {
    let s = disc.sqrt();
    let s_u = s.to_u64().expect("discriminant fits in u64");
    let par = if disc.is_even() { 0 } else { 1 };
    let mut out = Vec::new();
    for b in (1..=s_u).filter(|b| b % 2 == par) {
        let bb = BigInt::from(b);
        let n: BigInt = (disc - &bb * &bb) / 4;
        let n_u = n.to_u64().expect("fits in u64");
        let mut a = 1u64;
        while a * a <= n_u {
            if n_u.is_multiple_of(a) {
                for cand in [a, n_u / a] {
                    for sign in [1i64, -1] {
                        let a_b = BigInt::from(cand) * sign;
                        let c = -(&n / &a_b);
                        let f = Form {
                            a: a_b,
                            b: bb.clone(),
                            c,
                        };
                        if f.is_reduced() && f.a.gcd(&f.b).gcd(&f.c).is_one() && !out.contains(&f) {
                            out.push(f);
                        }
                    }
                }
            }
            a += 1;
        }
    }
    out.sort();
    out
}

/// Builds the narrow class group of a positive fundamental discriminant.
pub fn class_group(disc: u64) -> Result<NarrowClassGroup> {
    if !is_fundamental_discriminant(disc) {
        return Err(Error::NonFundamental(disc.to_string()));
    }
    let disc_b = BigInt::from(disc);
    let forms = reduced_forms(&disc_b);
    let mut classes: Vec<Form> = Vec::new();
    let mut index: HashMap<Form, ClassId> = HashMap::new();
    let mut seen = std::collections::HashSet::new();
    for f in &forms {
        if seen.contains(f) {
            continue;
        }
        let cyc = cycle(f);
        for g in &cyc {
            seen.insert(g.clone());
        }
        let canon = cyc
            .iter()
            .min_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)))
            .unwrap()
            .clone();
        classes.push(canon);
    }
    classes.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    let principal = reduce(&Form::principal(&disc_b));
    // principal class first
    let pos = classes.iter().position(|f| *f == principal).unwrap();
    let p = classes.remove(pos);
    classes.insert(0, p);
    for (i, f) in classes.iter().enumerate() {
        index.insert(f.clone(), i);
    }
    let h = classes.len();
    let mut table = vec![vec![0; h]; h];
    for i in 0..h {
        for j in i..h {
            let prod = compose(&classes[i], &classes[j])?;
            let k = *index
                .get(&prod)
                .ok_or_else(|| Error::Internal(format!("composition produced unknown class {prod}")))?;
            table[i][j] = k;
            table[j][i] = k;
        }
    }
    let mut group = NarrowClassGroup {
        disc: disc_b,
        classes,
        index,
        table,
        identity: 0,
        orders: Vec::new(),
        structure: Vec::new(),
        coords: Vec::new(),
        exponent: 1,
    };
    group.orders = (0..h).map(|g| group.compute_order(g)).collect();
    group.exponent = group.orders.iter().copied().max().unwrap_or(1);
    group.compute_structure()?;
    Ok(group)
}

fn prime_factors_u64(n: u64) -> Vec<u64> {
    factorize(&BigInt::from(n))
        .map(|f| f.factors.iter().map(|(p, _)| p.to_u64().unwrap()).collect())
        .unwrap_or_default()
}

impl NarrowClassGroup {
    pub fn discriminant(&self) -> &BigInt {
        &self.disc
    }

    pub fn h_plus(&self) -> usize {
        self.classes.len()
    }

    pub fn identity(&self) -> ClassId {
        self.identity
    }

    pub fn classes(&self) -> &[Form] {
        &self.classes
    }

    pub fn form(&self, g: ClassId) -> &Form {
        &self.classes[g]
    }

    pub fn op(&self, a: ClassId, b: ClassId) -> ClassId {
        self.table[a][b]
    }

    pub fn pow(&self, g: ClassId, k: u64) -> ClassId {
        (0..k).fold(self.identity, |acc, _| self.op(acc, g))
    }

    pub fn inverse(&self, g: ClassId) -> ClassId {
        self.pow(g, self.orders[g] - 1)
    }

    pub fn order(&self, g: ClassId) -> u64 {
        self.orders[g]
    }

    pub fn exponent(&self) -> u64 {
        self.exponent
    }

    /// Cyclic decomposition: `(generator, order)` pairs with orders dividing
    /// one another (empty for the trivial group).
    pub fn structure(&self) -> &[(ClassId, u64)] {
        &self.structure
    }

    pub fn invariant_factors(&self) -> Vec<u64> {
        self.structure.iter().map(|&(_, n)| n).collect()
    }

    pub fn class_of(&self, f: &Form) -> Result<ClassId> {
        if f.discriminant() != self.disc {
            return Err(Error::InvalidForm(format!(
                "{f} has discriminant {} not {}",
                f.discriminant(),
                self.disc
            )));
        }
        let canon = reduce(f);
        self.index
            .get(&canon)
            .copied()
            .ok_or_else(|| Error::Internal(format!("class of {f} missing from the table")))
    }

    fn compute_order(&self, g: ClassId) -> u64 {
        let mut k = 1;
        let mut acc = g;
        while acc != self.identity {
            acc = self.op(acc, g);
            k += 1;
        }
        k
    }

    fn span_size(&self, gens: &[(ClassId, u64)]) -> usize {
        let mut set = vec![false; self.h_plus()];
        set[self.identity] = true;
        let mut frontier = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &(g, _) in gens {
                let y = self.op(x, g);
                if !set[y] {
                    set[y] = true;
                    frontier.push(y);
                }
            }
        }
        set.iter().filter(|&&b| b).count()
    }

    /// Invariant factors from torsion counts, then a basis by backtracking.
    fn compute_structure(&mut self) -> Result<()> {
        let h = self.h_plus() as u64;
        let mut factors: Vec<u64> = Vec::new();
        for l in prime_factors_u64(h) {
            // f(j) = log_l |G[l^j]| = Σ_i min(j, λ_i)
            let mut f_prev = 0u32;
            let mut parts_ge: Vec<u32> = Vec::new();
            let mut j = 1u32;
            loop {
                let lj = l.pow(j);
                let count = self.orders.iter().filter(|&&o| lj % o == 0).count() as u64;
                let mut f = 0u32;
                let mut c = count;
                while c > 1 {
                    c /= l;
                    f += 1;
                }
                if f == f_prev {
                    break;
                }
                parts_ge.push(f - f_prev);
                f_prev = f;
                j += 1;
            }
            // λ as a partition: number of parts ≥ j is parts_ge[j−1]
            let nparts = parts_ge.first().copied().unwrap_or(0) as usize;
            let mut lambda = vec![0u32; nparts];
            for (jj, &cnt) in parts_ge.iter().enumerate() {
                for part in lambda.iter_mut().take(cnt as usize) {
                    *part = jj as u32 + 1;
                }
            }
            // lambda sorted descending; merge into invariant factors from the top
            if factors.len() < lambda.len() {
                let extra = lambda.len() - factors.len();
                let mut pad = vec![1u64; extra];
                pad.extend(factors);
                factors = pad;
            }
            let r = factors.len();
            for (i, &part) in lambda.iter().enumerate() {
                factors[r - 1 - i] *= l.pow(part);
            }
        }
        let target = self.h_plus();
        let mut chosen: Vec<(ClassId, u64)> = Vec::new();
        let order_desc: Vec<u64> = factors.iter().rev().copied().collect();
        if !self.search_basis(&order_desc, &mut chosen, target) {
            return Err(Error::Internal("no basis found for the class group".into()));
        }
        chosen.reverse();
        self.structure = chosen;

        let mut coords = vec![Vec::new(); target];
        let ns: Vec<u64> = self.structure.iter().map(|&(_, n)| n).collect();
        let mut idx = vec![0u64; ns.len()];
        loop {
            let mut g = self.identity;
            for (k, &(gen, _)) in self.structure.iter().enumerate() {
                g = self.op(g, self.pow(gen, idx[k]));
            }
            coords[g] = idx.clone();
            let mut k = 0;
            while k < ns.len() {
                idx[k] += 1;
                if idx[k] < ns[k] {
                    break;
                }
                idx[k] = 0;
                k += 1;
            }
            if k == ns.len() {
                break;
            }
        }
        self.coords = coords;
        Ok(())
    }

    fn search_basis(&self, orders: &[u64], chosen: &mut Vec<(ClassId, u64)>, target: usize) -> bool {
        let Some((&n, rest)) = orders.split_first() else {
            return self.span_size(chosen) == target;
        };
        let expect: usize = chosen.iter().map(|&(_, o)| o as usize).product::<usize>() * n as usize;
        for g in 0..self.h_plus() {
            if self.orders[g] != n {
                continue;
            }
            chosen.push((g, n));
            if self.span_size(chosen) == expect && self.search_basis(rest, chosen, target) {
                return true;
            }
            chosen.pop();
        }
        false
    }

    pub fn coords(&self, g: ClassId) -> &[u64] {
        &self.coords[g]
    }

    /// Class of a form `(p, b, (b² − D)/4p)` for a given root `b`.
    pub fn frobenius_form(&self, p: &BigInt, b: &BigInt) -> Result<Form> {
        let four_p = 4 * p;
        let num = b * b - &self.disc;
        if !num.mod_floor(&four_p).is_zero() {
            return Err(Error::InvalidForm(format!("{b}² ≢ D mod 4·{p}")));
        }
        Form::new(p.clone(), b.clone(), num / four_p)
    }

    /// Frobenius class of a prime `p` that splits or ramifies.
    ///
    /// For a split prime the class is that of one of the two primes above
    /// `p`; the other has the inverse class.
    pub fn frobenius_class(&self, p: &BigInt) -> Result<ClassId> {
        match kronecker(&self.disc, p) {
            -1 => Err(Error::InertPrime(p.to_string())),
            _ => {
                let b = if *p == BigInt::from(2) {
                    let d8 = self.disc.mod_floor(&BigInt::from(8));
                    (0..4)
                        .map(BigInt::from)
                        .find(|b| (b * b).mod_floor(&BigInt::from(8)) == d8)
                        .ok_or_else(|| Error::Internal("no 2-adic root of D".into()))?
                } else {
                    let r = sqrt_mod_prime_power(&self.disc, p, 1)
                        .ok_or_else(|| Error::Internal(format!("D is not a square mod {p}")))?;
                    if r.is_even() == self.disc.is_even() {
                        r
                    } else {
                        r + p
                    }
                };
                self.class_of(&self.frobenius_form(p, &b)?)
            }
        }
    }

    /// Class of the form representing `−1`: `(−1, 0, D/4)` or `(−1, 1, (D − 1)/4)`.
    pub fn sign_class(&self) -> ClassId {
        let b = if self.disc.is_even() { BigInt::zero() } else { BigInt::one() };
        let c = (&self.disc - &b * &b) / 4;
        let f = Form {
            a: BigInt::from(-1),
            b,
            c,
        };
        self.class_of(&f).expect("sign form has discriminant D")
    }

    /// `h = h⁺ / |⟨σ₋₁⟩|`.
    pub fn wide_class_number(&self) -> usize {
        self.h_plus() / self.order(self.sign_class()) as usize
    }

    /// All `h⁺` characters, each valued in the `exponent()`-th roots of unity.
    pub fn characters(&self) -> Vec<Character> {
        let n = self.exponent;
        let ns: Vec<u64> = self.structure.iter().map(|&(_, o)| o).collect();
        let mut out = Vec::with_capacity(self.h_plus());
        let mut ks = vec![0u64; ns.len()];
        loop {
            let exps = (0..self.h_plus())
                .map(|g| {
                    self.coords[g]
                        .iter()
                        .zip(&ks)
                        .zip(&ns)
                        .map(|((&c, &k), &ni)| c * k * (n / ni))
                        .sum::<u64>()
                        % n
                })
                .collect();
            out.push(Character { n, exps });
            let mut i = 0;
            while i < ns.len() {
                ks[i] += 1;
                if ks[i] < ns[i] {
                    break;
                }
                ks[i] = 0;
                i += 1;
            }
            if i == ns.len() {
                break;
            }
        }
        out
    }
}

/// A character `χ: Cl⁺(D) → μ_n`, stored as exponents: `χ(g) = ζ_n^{e(g)}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Character {
    n: u64,
    exps: Vec<u64>,
}

impl Character {
    pub fn modulus(&self) -> u64 {
        self.n
    }

    pub fn exponent_at(&self, g: ClassId) -> u64 {
        self.exps[g]
    }

    pub fn value(&self, g: ClassId) -> CycloInt {
        CycloInt::zeta_pow(self.n as u32, self.exps[g] as i64)
    }

    pub fn is_trivial(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    /// Order of the character as an element of the dual group.
    pub fn order(&self) -> u64 {
        self.exps
            .iter()
            .map(|&e| self.n / self.n.gcd(&e))
            .fold(1, |acc, o| acc.lcm(&o))
    }

    pub fn mul(&self, other: &Character) -> Character {
        Character {
            n: self.n,
            exps: self
                .exps
                .iter()
                .zip(&other.exps)
                .map(|(a, b)| (a + b) % self.n)
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bi(x: i64) -> BigInt {
        BigInt::from(x)
    }

    fn form(a: i64, b: i64, c: i64) -> Form {
        Form::new(a, b, c).unwrap()
    }

    #[test]
    fn reduce_examples() {
        let d = bi(136);
        let p = Form::principal(&d);
        assert_eq!(reduce(&p), reduce(&form(1, 10, -9)));
        let f = form(3, 2, -11);
        assert_eq!(reduce(&reduce(&f)), reduce(&f));
        // translation (p, b, c) → (p, b + 2p, c′)
        let g = form(3, 8, -6);
        assert_eq!(g.discriminant(), d);
        assert_eq!(reduce(&f), reduce(&g));
    }

    #[test]
    fn form_validation() {
        assert!(Form::new(0, 1, 1).is_err());
        assert!(Form::new(2, 2, -2).is_err()); // not primitive
        assert!(Form::new(1, 2, 1).is_err()); // D = 0
        assert!(Form::new(1, 0, 1).is_err()); // D < 0
        assert!(Form::new(1, 3, 2).is_err()); // D = 1 square
    }

    #[test]
    fn group_orders() {
        let g = class_group(136).unwrap();
        assert_eq!(g.h_plus(), 4);
        assert_eq!(g.invariant_factors(), vec![4]);
        assert_eq!(class_group(8).unwrap().h_plus(), 1);
        assert_eq!(class_group(40).unwrap().h_plus(), 2);
        assert!(matches!(class_group(36), Err(Error::NonFundamental(_))));
        assert!(matches!(class_group(32), Err(Error::NonFundamental(_))));
        // Q(√79): h = 3, N(ε₀) = +1 so h⁺ = 6
        let g = class_group(316).unwrap();
        assert_eq!(g.h_plus(), 6);
        assert_eq!(g.wide_class_number(), 3);
        // D = 4·2·3·5·7 = 840 has 2-rank 3 in the narrow group
        let g = class_group(840).unwrap();
        assert_eq!(g.invariant_factors().iter().product::<u64>(), g.h_plus() as u64);
        assert!(g.invariant_factors().len() >= 3);
    }

    #[test]
    fn frobenius_table_for_136() {
        let g = class_group(136).unwrap();
        assert_eq!(g.frobenius_class(&bi(2)).unwrap(), g.identity());
        assert_eq!(g.order(g.frobenius_class(&bi(17)).unwrap()), 2);
        let s3 = g.frobenius_class(&bi(3)).unwrap();
        assert_eq!(g.order(s3), 4);
        assert_eq!(g.op(s3, s3), g.sign_class());
        assert_eq!(g.order(g.sign_class()), 2);
        assert!(matches!(g.frobenius_class(&bi(7)), Err(Error::InertPrime(_))));
    }

    #[test]
    fn sign_class_examples() {
        assert_eq!(class_group(8).unwrap().sign_class(), 0);
        let g = class_group(136).unwrap();
        let s = g.sign_class();
        assert_eq!(g.op(s, s), g.identity());
    }

    #[test]
    fn group_axioms_exhaustive() {
        for disc in [8u64, 12, 40, 60, 136, 145, 156, 221, 316, 440, 520, 840] {
            let g = class_group(disc).unwrap();
            let h = g.h_plus();
            for a in 0..h {
                assert_eq!(g.op(a, g.identity()), a);
                let inv = g.class_of(&g.form(a).opposite()).unwrap();
                assert_eq!(g.op(a, inv), g.identity(), "D={disc}");
                for b in 0..h {
                    for c in 0..h {
                        assert_eq!(g.op(g.op(a, b), c), g.op(a, g.op(b, c)), "D={disc}");
                    }
                }
            }
        }
    }

    #[test]
    fn composition_is_well_defined_on_classes() {
        let disc = bi(136);
        let g = class_group(136).unwrap();
        // non-reduced members of classes, composed, land in the product class
        let f1 = form(3, 2, -11);
        let f2 = form(3, 8, -6);
        let f3 = form(3, -2, -11);
        let prod = compose(&f1, &f3).unwrap();
        assert_eq!(prod, reduce(&Form::principal(&disc)));
        let a = g.class_of(&f1).unwrap();
        assert_eq!(g.class_of(&compose(&f2, &f2).unwrap()).unwrap(), g.op(a, a));
        assert_eq!(compose(&Form::principal(&disc), &f1).unwrap(), reduce(&f1));
    }

    #[test]
    fn frobenius_independent_of_root_choice() {
        for disc in [8u64, 40, 136] {
            let g = class_group(disc).unwrap();
            let d = bi(disc as i64);
            for p in (2u64..=100).filter(|&p| crate::arith::is_prime_u64(p)) {
                let pb = bi(p as i64);
                if kronecker(&d, &pb) != 1 {
                    continue;
                }
                let base = g.frobenius_class(&pb).unwrap();
                let mut seen_classes = std::collections::HashSet::new();
                for b in 0..(2 * p as i64) {
                    if let Ok(f) = g.frobenius_form(&pb, &bi(b)) {
                        let c = g.class_of(&f).unwrap();
                        // the root b and −b give the two primes above p
                        assert!(c == base || c == g.inverse(base), "D={disc} p={p} b={b}");
                        if (b * b - disc as i64).rem_euclid(4 * p as i64) == 0 && b % (2 * p as i64) == b {
                            seen_classes.insert(c);
                        }
                    }
                }
                assert!(seen_classes.len() <= 2);
                let o = g.order(base);
                assert_eq!(g.h_plus() as u64 % o, 0);
                assert_eq!(g.op(base, g.inverse(base)), g.identity());
            }
        }
    }

    #[test]
    fn sign_class_tracks_unit_norm() {
        for d in 2u64..=50 {
            if !crate::quadfield::is_squarefree(d) {
                continue;
            }
            let fd = crate::quadfield::field_data(d).unwrap();
            let g = class_group(fd.disc).unwrap();
            assert_eq!(g.sign_class() == g.identity(), fd.norm_eps0 == -1, "d={d}");
            assert_eq!(g.h_plus() % g.order(g.sign_class()) as usize, 0);
        }
    }

    #[test]
    fn characters_of_136() {
        let g = class_group(136).unwrap();
        let chars = g.characters();
        assert_eq!(chars.len(), 4);
        let mut orders: Vec<u64> = chars.iter().map(Character::order).collect();
        orders.sort();
        assert_eq!(orders, vec![1, 2, 4, 4]);
    }

    #[test]
    fn character_orthogonality_exact() {
        for disc in [8u64, 40, 136, 316, 840, 221] {
            let g = class_group(disc).unwrap();
            let chars = g.characters();
            let h = g.h_plus();
            assert_eq!(chars.len(), h);
            let n = g.exponent() as u32;
            for x in 0..h {
                let s = chars
                    .iter()
                    .fold(CycloInt::zero(n), |acc, c| acc.add(&c.value(x)));
                let expect = if x == g.identity() { h as i64 } else { 0 };
                assert_eq!(s.as_integer(), Some(bi(expect)), "D={disc} class {x}");
            }
            // homomorphisms
            for c in &chars {
                for a in 0..h {
                    for b in 0..h {
                        assert_eq!(
                            (c.exponent_at(a) + c.exponent_at(b)) % c.modulus(),
                            c.exponent_at(g.op(a, b))
                        );
                    }
                }
            }
            // closed under multiplication and separating
            for a in &chars {
                for b in &chars {
                    assert!(chars.contains(&a.mul(b)));
                }
            }
            for x in 0..h {
                for y in (x + 1)..h {
                    assert!(chars.iter().any(|c| c.exponent_at(x) != c.exponent_at(y)));
                }
            }
        }
    }
}

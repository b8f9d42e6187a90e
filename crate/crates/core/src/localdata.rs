//! Local data for `N(x + yω) = m`: `p`-adic solvability, `p`-adic densities
//! by congruence counting, and archimedean volumes.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::ToPrimitive;

use crate::arith::{hilbert_symbol_int, is_prime_u64, valuation, Place};
use crate::census::EquationSpec;
use crate::error::{Error, Result};

/// Largest residue count per level explored by the exhaustive local search;
/// beyond it the norm-residue symbol decides.
const SEARCH_PRIME_LIMIT: u64 = 1 << 12;

/// Upper bound on the number of residue evaluations in [`local_density`].
pub const DENSITY_WORK_LIMIT: u64 = 1_000_000_000;

struct LocalSearch {
    p: i128,
    b: i128,
    c: i128,
    m: i128,
    depth: u32,
}

impl LocalSearch {
    fn f(&self, x: i128, y: i128, modulus: i128) -> i128 {
        (x * x + self.b * x * y + self.c * y * y - self.m).rem_euclid(modulus)
    }

    fn val(&self, mut v: i128, cap: u32) -> u32 {
        if v == 0 {
            return cap;
        }
        let mut k = 0;
        while v % self.p == 0 && k < cap {
            v /= self.p;
            k += 1;
        }
        k
    }

    /// Residues `(x, y)` mod `p^j` with `F ≡ m`; accept once `j > 2t` where
    /// `t` is the valuation of the gradient.
    fn dfs(&self, x: i128, y: i128, j: u32, pj: i128) -> bool {
        let gx = 2 * x + self.b * y;
        let gy = self.b * x + 2 * self.c * y;
        let t = self.val(gx.rem_euclid(pj), j).min(self.val(gy.rem_euclid(pj), j));
        if j > 2 * t {
            return true;
        }
        if j >= self.depth {
            return false;
        }
        let next = pj * self.p;
        for a in 0..self.p {
            for bb in 0..self.p {
                let (x2, y2) = (x + a * pj, y + bb * pj);
                if self.f(x2, y2, next) == 0 && self.dfs(x2, y2, j + 1, next) {
                    return true;
                }
            }
        }
        false
    }
}

/// Whether `N(x + yω) = m` has a solution in `Z_p`.
///
/// For `p ∤ 2dm` the answer is yes. Otherwise residues mod `p^j` are searched
/// depth-first up to `K = v_p(4dm) + 3`, accepting a residue solution whose
/// gradient has valuation `t` with `j > 2t`; Hensel's lemma lifts it. Every
/// `Z_p`-solution has `2t < K`, so the search is exhaustive.
pub fn locally_solvable(spec: &EquationSpec, p: &BigInt) -> Result<bool> {
    let pu = p
        .to_u64()
        .filter(|&q| is_prime_u64(q))
        .ok_or_else(|| Error::InvalidInput(format!("{p} is not a prime")))?;
    let four_dm = BigInt::from(4u64) * spec.d * &spec.m;
    if !(BigInt::from(2u64) * spec.d * &spec.m).is_multiple_of(p) {
        return Ok(true);
    }
    if pu > SEARCH_PRIME_LIMIT {
        // norms from the completion: (m, D)_p = 1
        return Ok(hilbert_symbol_int(&spec.m, &BigInt::from(spec.disc), &Place::Prime(p.clone())) == 1);
    }
    let depth = valuation(&four_dm, p) + 3;
    let p_i = pu as i128;
    let (b, c) = {
        let (b, c) = spec.field.norm_form_coeffs();
        (b as i128, c as i128)
    };
    let modulus = p_i.checked_pow(depth).ok_or_else(|| {
        Error::InvalidInput(format!("p^{depth} for p = {p} exceeds the search arithmetic"))
    })?;
    let m = spec.m.mod_floor(&BigInt::from(modulus)).to_i128().unwrap();
    let search = LocalSearch { p: p_i, b, c, m, depth };
    for x in 0..p_i {
        for y in 0..p_i {
            if search.f(x, y, p_i) == 0 && search.dfs(x, y, 1, p_i) {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

/// `#{(x, y) mod p^k : N(x + yω) ≡ m} / p^k`.
///
/// When `ω = √d`, or `p` is odd (so `(x, y) ↦ (2x + y, y)` is invertible and
/// `4N = X² − dY²`), the count is a convolution of two square histograms in
/// `O(p^k)`. For `p = 2` with `ω = (1 + √d)/2` the pairs are scanned directly.
pub fn local_density(spec: &EquationSpec, p: u64, k: u32) -> Result<BigRational> {
    if k == 0 {
        return Err(Error::InvalidInput("k must be positive".into()));
    }
    if !is_prime_u64(p) {
        return Err(Error::InvalidInput(format!("{p} is not a prime")));
    }
    let q = p
        .checked_pow(k)
        .filter(|&q| q <= DENSITY_WORK_LIMIT)
        .ok_or_else(|| Error::MemoryGuard(format!("{p}^{k} residues")))?;
    let qb = BigInt::from(q);
    let half = spec.field.omega_is_half_integral();
    let count: u64 = if half && p == 2 {
        if q.checked_mul(q).is_none_or(|w| w > DENSITY_WORK_LIMIT) {
            return Err(Error::MemoryGuard(format!("{p}^{} pairs", 2 * k)));
        }
        let (b, c) = spec.field.norm_form_coeffs();
        let (b, c, qi) = (b as i128, c as i128, q as i128);
        let m = spec.m.mod_floor(&qb).to_i128().unwrap();
        let mut n = 0;
        for x in 0..qi {
            for y in 0..qi {
                if (x * x + b * x * y + c * y * y - m).rem_euclid(qi) == 0 {
                    n += 1;
                }
            }
        }
        n
    } else {
        // X² − d·Y² ≡ target, with target = m (ω = √d) or 4m (p odd, ω half-integral)
        let target = if half { 4 * &spec.m } else { spec.m.clone() };
        let t = target.mod_floor(&qb).to_u128().unwrap();
        let dm = (spec.d % q) as u128;
        let qq = q as u128;
        let mut squares = vec![0u32; q as usize];
        for x in 0..qq {
            squares[(x * x % qq) as usize] += 1;
        }
        let mut n = 0u64;
        for y in 0..qq {
            let u = (t + dm * (y * y % qq)) % qq;
            n += squares[u as usize] as u64;
        }
        n
    };
    Ok(BigRational::new(count.into(), qb))
}

/// Local density at the first depth where it is certified stable,
/// `k = v_p(4dm) + 3`.
pub fn stable_local_density(spec: &EquationSpec, p: u64) -> Result<BigRational> {
    let four_dm = BigInt::from(4u64) * spec.d * &spec.m;
    let k = valuation(&four_dm, &BigInt::from(p)) + 3;
    local_density(spec, p, k)
}

/// The place of the base field below which the volume is taken.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BasePlace {
    Real,
    Complex,
}

fn factorial(k: u32) -> f64 {
    (1..=k).map(f64::from).product()
}

/// Leading coefficient of the archimedean volume of the height ball,
/// `d_v(X(F_v, T)) ~ coeff · (log T)^{r+s−1}`, for a degree `n` extension
/// with `r` real and `s` complex places above `v`.
///
/// Real `v` with `r ≥ 1`: `2^{r−1}(2π)^s n^{r+s−1}/(r+s−1)! · |NΔ|⁻¹`.
/// Real `v` with `r = 0`: `(2π)^{s−1} n^{s−1}/(s−1)! · |NΔ|⁻¹`, `s = n/2`.
/// Complex `v`: `(2π)^{n−1} n^{n−1}/(n−1)! · |NΔ|⁻¹`, with `s = n` places above.
pub fn lemvol_coefficient(n: u32, r: u32, s: u32, abs_n_delta: f64, base: BasePlace) -> Result<f64> {
    let bad = |why: &str| Err(Error::InvalidPlaces(format!("n = {n}, r = {r}, s = {s}: {why}")));
    if !(abs_n_delta > 0.0) {
        return bad("|N(Δ)| must be positive");
    }
    if r + s == 0 {
        return bad("no places");
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let nf = f64::from(n);
    let coeff = match base {
        BasePlace::Real => {
            if r + 2 * s != n {
                return bad("r + 2s must equal n");
            }
            if r >= 1 {
                let k = r + s - 1;
                2f64.powi(r as i32 - 1) * two_pi.powi(s as i32) * nf.powi(k as i32) / factorial(k)
            } else {
                let k = s - 1;
                two_pi.powi(k as i32) * nf.powi(k as i32) / factorial(k)
            }
        }
        BasePlace::Complex => {
            if r != 0 || s != n {
                return bad("above a complex place all n places are complex");
            }
            let k = n - 1;
            two_pi.powi(k as i32) * nf.powi(k as i32) / factorial(k)
        }
    };
    Ok(coeff / abs_n_delta)
}

/// Coordinates `(x, y) = (a_x·z₁ + b_x·z₂, a_y·z₁ + b_y·z₂)` in terms of the
/// embeddings `z₁ = σ₁(x + yω)`, `z₂ = σ₂(x + yω)`.
fn coordinate_map(spec: &EquationSpec) -> [(f64, f64); 2] {
    let sd = (spec.d as f64).sqrt();
    if spec.field.omega_is_half_integral() {
        // y = (z₁ − z₂)/√d, x = (z₁ + z₂)/2 − y/2
        let (ay, by) = (1.0 / sd, -1.0 / sd);
        [(0.5 - ay / 2.0, 0.5 - by / 2.0), (ay, by)]
    } else {
        [(0.5, 0.5), (0.5 / sd, -0.5 / sd)]
    }
}

/// Archimedean volume `d_∞(X(R, T))` of `{N = m, |x|, |y| ≤ T}` for the
/// measure `D⁻¹·|dz₂|/|z₂|`, by exact breakpoints in `t = z₂ > 0`.
///
/// On the branch `z₂ = t > 0` (so `z₁ = m/t`) each constraint
/// `|A·m/t + B·t| ≤ T` is bounded by the positive roots of `B t² ∓ T t + A m`;
/// the volume is twice the summed log-lengths of the feasible segments,
/// the factor 2 accounting for the branch `z₂ < 0`.
pub fn arch_volume_hyperbola(spec: &EquationSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput("T must be positive".into()));
    }
    let m = spec.m.to_f64().ok_or_else(|| Error::InvalidInput("m out of range".into()))?;
    let coords = coordinate_map(spec);
    let mut cuts = Vec::new();
    for &(a, b) in &coords {
        for sgn in [1.0, -1.0] {
            // b t² − sgn·T t + a m = 0
            let disc = t * t - 4.0 * a * b * m;
            if disc < 0.0 {
                continue;
            }
            // r₁ without cancellation, r₂ from r₁·r₂ = a·m/b
            let r1 = (sgn * t + sgn * disc.sqrt()) / (2.0 * b);
            let r2 = a * m / (b * r1);
            for root in [r1, r2] {
                if root > 0.0 && root.is_finite() {
                    cuts.push(root);
                }
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let feasible = |z2: f64| {
        let z1 = m / z2;
        coords.iter().all(|&(a, b)| (a * z1 + b * z2).abs() <= t)
    };
    let mut total = 0.0;
    for w in cuts.windows(2) {
        let mid = (w[0] * w[1]).sqrt();
        if feasible(mid) {
            total += (w[1] / w[0]).ln();
        }
    }
    Ok(2.0 * total / spec.disc as f64)
}

/// The same volume by Gauss–Legendre quadrature of `|d ln|z₂||/D` along the
/// branches `x = (−by ± √(Dy² + 4m))/2` (for `m > 0`) or
/// `y = (−bx ± √(Dx² + 4cm))/(2c)` (for `m < 0`).
pub fn arch_volume_quadrature(spec: &EquationSpec, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidInput("T must be positive".into()));
    }
    let m = spec.m.to_f64().ok_or_else(|| Error::InvalidInput("m out of range".into()))?;
    let (b, c) = spec.field.norm_form_coeffs();
    let (b, c) = (b as f64, c as f64);
    let disc = spec.disc as f64;
    let sd = (spec.d as f64).sqrt();
    // ω̄ = −√d or (1 − √d)/2
    let (omega, omega_bar) = if spec.field.omega_is_half_integral() {
        ((1.0 + sd) / 2.0, (1.0 - sd) / 2.0)
    } else {
        (sd, -sd)
    };
    let by_y = m > 0.0;

    // point (x, y) and d ln|z₂| / dp on branch `sgn` at parameter p
    let eval = |p: f64, sgn: f64| -> (f64, f64, f64) {
        let (x, y, dx, dy) = if by_y {
            let y = p;
            let x = (-b * y + sgn * (disc * y * y + 4.0 * m).sqrt()) / 2.0;
            let dx = -(b * x + 2.0 * c * y) / (2.0 * x + b * y);
            (x, y, dx, 1.0)
        } else {
            let x = p;
            let y = (-b * x + sgn * (disc * x * x + 4.0 * c * m).sqrt()) / (2.0 * c);
            let dy = -(2.0 * x + b * y) / (b * x + 2.0 * c * y);
            (x, y, 1.0, dy)
        };
        // z₁z₂ = m, so |d ln z₂| = |d ln z₁|; use the larger conjugate
        let (z1, z2) = (x + y * omega, x + y * omega_bar);
        let g = if z1.abs() >= z2.abs() {
            (dx + dy * omega) / z1
        } else {
            (dx + dy * omega_bar) / z2
        };
        (x, y, g.abs())
    };

    // Gauss–Legendre nodes on [−1, 1]
    const NODES: [(f64, f64); 8] = [
        (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
        (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
        (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
        (0.183_434_642_495_649_8, 0.362_683_783_378_362),
        (0.525_532_409_916_329, 0.313_706_645_877_887_3),
        (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
        (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    ];

    // p = sinh(u), u ∈ [−asinh T, asinh T]
    let umax = t.asinh();
    let grid = 4000usize;
    let mut total = 0.0;
    for sgn in [1.0, -1.0] {
        let inside = |u: f64| {
            let (x, y, _) = eval(u.sinh(), sgn);
            x.abs() <= t && y.abs() <= t && x.is_finite() && y.is_finite()
        };
        let h = 2.0 * umax / grid as f64;
        for i in 0..grid {
            let (mut lo, mut hi) = (-umax + i as f64 * h, -umax + (i + 1) as f64 * h);
            let (fl, fh) = (inside(lo), inside(hi));
            if !fl && !fh {
                continue;
            }
            if fl != fh {
                // trim the cell to its feasible part
                let (mut a, mut bb) = (lo, hi);
                for _ in 0..80 {
                    let mid = 0.5 * (a + bb);
                    if inside(mid) == fl {
                        a = mid;
                    } else {
                        bb = mid;
                    }
                }
                if fl {
                    hi = a;
                } else {
                    lo = bb;
                }
            }
            let (mid, half) = (0.5 * (lo + hi), 0.5 * (hi - lo));
            for &(node, w) in &NODES {
                let u = mid + half * node;
                let (_, _, g) = eval(u.sinh(), sgn);
                total += w * half * g * u.cosh();
            }
        }
    }
    Ok(total / disc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::{Signed, Zero};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn spec(d: u64, m: i64) -> EquationSpec {
        EquationSpec::new(d, m).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn solvability_examples() {
        assert!(locally_solvable(&spec(34, -1), &17.into()).unwrap());
        assert!(!locally_solvable(&spec(34, 7), &7.into()).unwrap());
        assert!(locally_solvable(&spec(2, 1), &2.into()).unwrap());
        assert!(locally_solvable(&spec(34, 1), &5.into()).unwrap());
        assert!(locally_solvable(&spec(34, 1), &4.into()).is_err());
    }

    #[test]
    fn solvability_matches_norm_residue_symbol() {
        for d in [2u64, 3, 5, 6, 10, 13, 17, 21, 34] {
            let disc = BigInt::from(crate::quadfield::fundamental_discriminant(d));
            for m in (-120i64..=120).filter(|&m| m != 0) {
                let s = spec(d, m);
                for p in [2u64, 3, 5, 7, 11, 13, 17] {
                    let expect = hilbert_symbol_int(&m.into(), &disc, &Place::prime(p)) == 1;
                    assert_eq!(locally_solvable(&s, &p.into()).unwrap(), expect, "d={d} m={m} p={p}");
                }
            }
        }
    }

    #[test]
    fn density_examples() {
        for k in 1..=4 {
            assert_eq!(local_density(&spec(34, 1), 5, k).unwrap(), q(4, 5));
            assert_eq!(local_density(&spec(34, 1), 7, k).unwrap(), q(8, 7));
            assert_eq!(local_density(&spec(34, 1), 3, k).unwrap(), q(2, 3));
        }
        assert!(matches!(local_density(&spec(34, 1), 7, 20), Err(Error::MemoryGuard(_))));
        assert!(matches!(local_density(&spec(5, 1), 2, 16), Err(Error::MemoryGuard(_))));
    }

    /// Oracle: direct scan of all pairs.
    fn density_scan(s: &EquationSpec, p: u64, k: u32) -> BigRational {
        let q = p.pow(k) as i64;
        let mut n = 0i64;
        for x in 0..q {
            for y in 0..q {
                let v = s.field.norm_form(&x.into(), &y.into()) - &s.m;
                if v.mod_floor(&BigInt::from(q)).is_zero() {
                    n += 1;
                }
            }
        }
        BigRational::new(n.into(), q.into())
    }

    #[test]
    fn density_matches_direct_scan() {
        for d in [2u64, 5, 13, 34] {
            for m in [-7i64, -2, 1, 3, 4, 12] {
                let s = spec(d, m);
                for (p, k) in [(2u64, 5u32), (3, 3), (5, 2), (17, 1)] {
                    assert_eq!(local_density(&s, p, k).unwrap(), density_scan(&s, p, k), "d={d} m={m} p={p}");
                }
            }
        }
    }

    #[test]
    fn density_stabilizes() {
        for d in [2u64, 34] {
            for m in (-20i64..=20).filter(|&m| m != 0) {
                let s = spec(d, m);
                for p in [2u64, 3, 5, 7, 17] {
                    let k0 = valuation(&(BigInt::from(4 * d as i64) * m), &p.into()) + 3;
                    if p.pow(k0 + 1) > 2_000_000 {
                        continue;
                    }
                    let a = local_density(&s, p, k0).unwrap();
                    let b = local_density(&s, p, k0 + 1).unwrap();
                    assert_eq!(a, b, "d={d} m={m} p={p}");
                    assert_eq!(a.is_positive(), locally_solvable(&s, &p.into()).unwrap());
                }
            }
        }
    }

    #[test]
    fn unramified_closed_forms() {
        for d in [2u64, 34] {
            let disc = BigInt::from(4 * d);
            for m in (-10i64..=10).filter(|&m| m != 0) {
                for p in [3u64, 5, 7, 11, 13, 17] {
                    if (2 * d as i64 * m) % p as i64 == 0 {
                        continue;
                    }
                    let s = spec(d, m);
                    let expect = match crate::arith::kronecker(&disc, &p.into()) {
                        1 => q(p as i64 - 1, p as i64),
                        _ => q(p as i64 + 1, p as i64),
                    };
                    assert_eq!(stable_local_density(&s, p).unwrap(), expect);
                }
            }
        }
    }

    #[test]
    fn lemvol_examples() {
        let c = lemvol_coefficient(2, 2, 0, 136.0, BasePlace::Real).unwrap();
        assert!((c - 4.0 / 136.0).abs() < 1e-15);
        let c = lemvol_coefficient(3, 3, 0, 7.0, BasePlace::Real).unwrap();
        assert!((c - 18.0 / 7.0).abs() < 1e-14);
        let c = lemvol_coefficient(3, 1, 1, 7.0, BasePlace::Real).unwrap();
        assert!((c - 6.0 * std::f64::consts::PI / 7.0).abs() < 1e-14);
        let c = lemvol_coefficient(4, 0, 2, 1.0, BasePlace::Real).unwrap();
        assert!((c - 8.0 * std::f64::consts::PI).abs() < 1e-12);
        let c = lemvol_coefficient(2, 0, 2, 1.0, BasePlace::Complex).unwrap();
        assert!((c - 4.0 * std::f64::consts::PI).abs() < 1e-12);
        assert!(lemvol_coefficient(3, 2, 0, 1.0, BasePlace::Real).is_err());
        assert!(lemvol_coefficient(2, 0, 0, 1.0, BasePlace::Real).is_err());
        assert!(lemvol_coefficient(2, 1, 1, 1.0, BasePlace::Complex).is_err());
    }

    #[test]
    fn arch_volume_exact_value_for_pell34() {
        // x = (z₁ + z₂)/2 binds: ln-length 2·ln(T + √(T² − 1)) per branch
        for t in [10.0f64, 1e4, 1e8] {
            let v = arch_volume_hyperbola(&spec(34, 1), t).unwrap();
            let expect = 4.0 * (t + (t * t - 1.0).sqrt()).ln() / 136.0;
            assert!((v / expect - 1.0).abs() < 1e-9, "T={t}: {v} vs {expect}");
        }
        assert_eq!(arch_volume_hyperbola(&spec(34, 100), 1.0).unwrap(), 0.0);
    }

    #[test]
    fn arch_volume_closed_form_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
        let ds = [2u64, 3, 5, 13, 34, 35, 94];
        for _ in 0..20 {
            let d = ds[rng.gen_range(0..ds.len())];
            let mut m = rng.gen_range(-50i64..=50);
            if m == 0 {
                m = 1;
            }
            let t = 10f64.powf(rng.gen_range(2.0..9.0));
            let s = spec(d, m);
            let a = arch_volume_hyperbola(&s, t).unwrap();
            let b = arch_volume_quadrature(&s, t).unwrap();
            assert!((a - b).abs() <= 0.01 * a.abs().max(1e-12), "d={d} m={m} T={t}: {a} vs {b}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn solvable_iff_positive_density(m in -60i64..60, p in prop::sample::select(vec![2u64, 3, 5, 7])) {
            prop_assume!(m != 0);
            let s = spec(34, m);
            prop_assert_eq!(
                stable_local_density(&s, p).unwrap().is_positive(),
                locally_solvable(&s, &p.into()).unwrap()
            );
        }
    }
}

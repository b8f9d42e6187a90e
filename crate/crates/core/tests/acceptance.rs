//! Acceptance suite. Prints one `PASS`/`FAIL` line per criterion and exits
//! nonzero if any criterion fails.
//!
//! Run with `cargo test -p normcensus --test acceptance`.

use std::collections::BTreeMap;
use std::f64::consts::{LN_10, PI};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use normcensus::arith::{factorize, hilbert_symbol_int, kronecker, Place};
use normcensus::census::{c_m, neg_pell_solvable, pell34_criterion, verdict_with};
use normcensus::classgroup::class_group;
use normcensus::counting::{
    brute_count, calibration_from, count_orbits_to, fundamental_solutions, slope_of,
};
use normcensus::hassewitt::{arch_h_limit, c_n_a, diagonalize, hasse_invariant, Matrix};
use normcensus::localdata::{
    arch_volume_hyperbola, lemvol_coefficient, stable_local_density, BasePlace,
};
use normcensus::quadfield::{field_data, is_squarefree};
use normcensus::{EquationSpec, Result};

type Outcome = Result<(bool, String)>;
type Criterion = (&'static str, fn() -> Outcome);

fn spec(d: u64, m: i64) -> EquationSpec {
    EquationSpec::new(d, m).expect("valid equation")
}

fn c1_class_field_anchors() -> Outcome {
    let g = class_group(136)?;
    let sigma = |p: i64| g.frobenius_class(&BigInt::from(p)).map(|c| g.order(c));
    let (o2, o17, o3, om1) = (sigma(2)?, sigma(17)?, sigma(3)?, g.order(g.sign_class()));
    let cyclic = g.invariant_factors() == vec![4];
    let ok = g.h_plus() == 4 && cyclic && o2 == 1 && o17 == 2 && o3 == 4 && om1 == 2;
    Ok((
        ok,
        format!(
            "h+ = {}, factors {:?}, ord σ2 = {o2}, σ17 = {o17}, σ3 = {o3}, σ-1 = {om1}",
            g.h_plus(),
            g.invariant_factors()
        ),
    ))
}

fn c2_unit_anchors() -> Outcome {
    let f34 = field_data(34)?;
    let f2 = field_data(2)?;
    let ok = f34.eps.x == 35.into()
        && f34.eps.y == 6.into()
        && f2.eps0.x == 1.into()
        && f2.eps0.y == 1.into()
        && f2.norm_eps0 == -1;
    Ok((
        ok,
        format!(
            "ε(34) = {}+{}√34, ε0(2) = {}+{}√2 with norm {}",
            f34.eps.x, f34.eps.y, f2.eps0.x, f2.eps0.y, f2.norm_eps0
        ),
    ))
}

fn c3_solvability_equivalence() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for d in [2u64, 10, 34] {
        let field = field_data(d)?;
        let group = class_group(field.disc)?;
        for m in (-300i64..=300).filter(|&m| m != 0) {
            let s = EquationSpec::with_field(field.clone(), m)?;
            let v = verdict_with(&s, &group)?;
            let exists = !fundamental_solutions(&s)?.representatives.is_empty();
            checked += 1;
            if v.solvable != exists {
                bad.push((d, m));
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} equations, discrepancies {bad:?}")))
}

fn c4_pell34_consistency() -> Outcome {
    let field = field_data(34)?;
    let group = class_group(136)?;
    let mut bad = Vec::new();
    for m in (-300i64..=300).filter(|&m| m != 0) {
        let general = verdict_with(&EquationSpec::with_field(field.clone(), m)?, &group)?;
        let special = pell34_criterion(m)?;
        let same_c = !general.locally_solvable_everywhere() || general.c_m == special.c_m;
        let same_slope = (general.predicted_slope - special.predicted_slope).abs() <= 1e-12;
        if general.solvable != special.solvable || !same_c || !same_slope {
            bad.push(m);
        }
    }
    Ok((bad.is_empty(), format!("600 values of m, disagreements {bad:?}")))
}

fn c5_obstructions() -> Outcome {
    let group = class_group(136)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [-1i64, -2] {
        let s = spec(34, m);
        let v = verdict_with(&s, &group)?;
        let brute = brute_count(&s, 1_000_000)?;
        let this = v.locally_solvable_everywhere() && v.c_m.is_zero() && !v.solvable && brute == 0;
        ok &= this;
        notes.push(format!(
            "m = {m}: local {}, c_m {}, N(T=1e6) = {brute}",
            v.locally_solvable_everywhere(),
            v.c_m
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn c6_negative_pell() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = Vec::new();
    for delta in (2u64..=50).filter(|&d| is_squarefree(d) && d % 4 != 1) {
        let f = field_data(delta)?;
        let g = class_group(f.disc)?;
        let claim = neg_pell_solvable(delta)?;
        let narrow_eq_wide = g.h_plus() == g.wide_class_number();
        let found = !fundamental_solutions(&EquationSpec::with_field(f, -1)?)?
            .representatives
            .is_empty();
        checked.push(delta);
        if claim != narrow_eq_wide || claim != found {
            bad.push(delta);
        }
    }
    Ok((bad.is_empty(), format!("{} values of δ, disagreements {bad:?}", checked.len())))
}

fn c7_slope_proportionality() -> Outcome {
    let group = class_group(136)?;
    let base = spec(34, 1);
    let s1 = slope_of(&fundamental_solutions(&base)?);
    let c1 = c_m(&base, &group)?;
    let mut ok = true;
    let mut notes = Vec::new();
    for m in [1i64, 2, 9, 33, -33] {
        let s = spec(34, m);
        let slope = slope_of(&fundamental_solutions(&s)?);
        let cm = c_m(&s, &group)?;
        let measured = slope.ratio(&s1);
        let predicted = BigRational::new(cm.clone(), c1.clone());
        let expected = match m {
            33 | -33 => Some(BigRational::from_integer(2.into())),
            2 | 9 | 1 => Some(BigRational::one()),
            _ => None,
        };
        let this = measured.as_ref() == Some(&predicted) && expected.as_ref() == Some(&predicted);
        ok &= this;
        let shown = measured.map_or("undefined".to_string(), |r| r.to_string());
        notes.push(format!("m = {m}: {shown} vs {predicted}"));
    }
    Ok((ok, notes.join(", ")))
}

fn c8_calibration() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for d in [2u64, 34] {
        let field = field_data(d)?;
        let group = class_group(field.disc)?;
        let mut values = Vec::new();
        for m in (-50i64..=50).filter(|&m| m != 0) {
            let s = EquationSpec::with_field(field.clone(), m)?;
            let orbits = fundamental_solutions(&s)?;
            if orbits.representatives.is_empty() {
                continue;
            }
            let c = c_m(&s, &group)?;
            if c.is_zero() {
                ok = false;
                notes.push(format!("d = {d}, m = {m}: solvable with c_m = 0"));
                continue;
            }
            values.push(calibration_from(orbits.orbit_count(), group.h_plus(), field.disc, &c));
        }
        let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let spread = (hi - lo) / mean;
        ok &= !values.is_empty() && spread <= 0.01;
        notes.push(format!(
            "d = {d}: {} solvable m, ratio {mean:.6} (2√D = {:.6}), spread {spread:.2e}",
            values.len(),
            2.0 * field.sqrt_disc()
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn c9_staircase() -> Outcome {
    let mut ok = true;
    let mut worst = 0.0f64;
    for m in [1i64, 2, 33] {
        let orbits = fundamental_solutions(&spec(34, m))?;
        let slope = slope_of(&orbits).value();
        let n = orbits.orbit_count() as f64;
        for k in 1..=10u32 {
            let t = BigInt::from(10).pow(10 * k);
            let count = count_orbits_to(&orbits, &t).to_f64().unwrap_or(f64::NAN);
            let log_t = 10.0 * k as f64 * LN_10;
            let gap = (count / log_t - slope).abs();
            let bound = 2.0 * n / log_t;
            worst = worst.max(gap / bound);
            ok &= gap <= bound;
        }
    }
    Ok((ok, format!("worst gap/bound = {worst:.3} over m ∈ {{1, 2, 33}}, T up to 1e100")))
}

fn c10_local_densities() -> Outcome {
    let mut checked = 0;
    let mut bad = Vec::new();
    for d in [2u64, 34] {
        let field = field_data(d)?;
        let disc = BigInt::from(field.disc);
        for m in (-10i64..=10).filter(|&m| m != 0) {
            let s = EquationSpec::with_field(field.clone(), m)?;
            for p in [3u64, 5, 7, 11, 13, 17] {
                if (2 * d as i64 * m) % p as i64 == 0 {
                    continue;
                }
                let sign = kronecker(&disc, &BigInt::from(p));
                let expect = BigRational::one() - BigRational::new(sign.into(), p.into());
                checked += 1;
                if stable_local_density(&s, p)? != expect {
                    bad.push((d, m, p));
                }
            }
        }
    }
    Ok((bad.is_empty(), format!("{checked} (d, m, p) triples, mismatches {bad:?}")))
}

fn c11_archimedean_volume() -> Outcome {
    let t = 1e8f64;
    let v = arch_volume_hyperbola(&spec(34, 1), t)?;
    let ratio = v / ((4.0 / 136.0) * t.ln());
    let in_band = (0.98..=1.02).contains(&ratio);

    let q = 7.0;
    let lemvol = [
        ((2, 2, 0, 136.0), 2f64.powi(1) * 2f64.powi(1) / 1.0 / 136.0),
        ((3, 3, 0, q), 2f64.powi(2) * 3f64.powi(2) / 2.0 / q),
        ((3, 1, 1, q), 2.0 * PI * 3.0 / 1.0 / q),
    ];
    let mut lemvol_ok = true;
    for ((n, r, s, nd), expect) in lemvol {
        let got = lemvol_coefficient(n, r, s, nd, BasePlace::Real)?;
        lemvol_ok &= (got - expect).abs() <= 1e-14 * expect.abs();
    }
    Ok((
        in_band && lemvol_ok,
        format!(
            "volume ratio at T = 1e8 is {ratio:.6} (band [0.98, 1.02]); lemvol tuples {}",
            if lemvol_ok { "match" } else { "differ" }
        ),
    ))
}

fn c12_hasse_witt() -> Outcome {
    let q = |n: i64, d: i64| BigRational::new(n.into(), d.into());
    let l_minus: Matrix = vec![
        vec![q(1, 1), q(0, 1), q(0, 1)],
        vec![q(0, 1), q(-1, 1), q(0, 1)],
        vec![q(0, 1), q(0, 1), q(-1, 1)],
    ];
    let l_plus: Matrix = vec![
        vec![q(2, 1), q(1, 1), q(0, 1)],
        vec![q(1, 1), q(2, 1), q(0, 1)],
        vec![q(0, 1), q(0, 1), q(1, 3)],
    ];
    let h_minus = hasse_invariant(&diagonalize(&l_minus)?, &Place::prime(2));
    let h_plus = hasse_invariant(&diagonalize(&l_plus)?, &Place::prime(2));

    let c31 = c_n_a(3, &BigInt::one(), &BTreeMap::new())?.c_value;
    let mut even_ok = true;
    for n in [6u32, 10, 14, 18] {
        for a in [1i64, 2, 3, 5, 12] {
            even_ok &= arch_h_limit(n, 1)? == 0
                && c_n_a(n, &BigInt::from(a), &BTreeMap::new())?.c_value.is_one();
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x4ec1_9051);
    let mut failures = 0;
    for _ in 0..1000 {
        let draw = |rng: &mut ChaCha8Rng| {
            let v: i64 = rng.gen_range(1..=1_000_000);
            BigInt::from(if rng.gen_bool(0.5) { -v } else { v })
        };
        let (a, b) = (draw(&mut rng), draw(&mut rng));
        let mut places = vec![Place::Infinity, Place::prime(2)];
        for p in factorize(&(&a * &b).abs())?.primes() {
            if *p != BigInt::from(2) {
                places.push(Place::Prime(p.clone()));
            }
        }
        let product: i32 = places.iter().map(|v| hilbert_symbol_int(&a, &b, v) as i32).product();
        if product != 1 {
            failures += 1;
        }
    }

    let ok = h_minus == -1 && h_plus == 1 && c31 == q(1, 2) && even_ok && failures == 0;
    Ok((
        ok,
        format!(
            "h(L-1) = {h_minus}, h(L1) = {h_plus}, c_3(1) = {c31}, n ≡ 2 mod 4 gives 1: {even_ok}, reciprocity failures {failures}/1000"
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("class-field anchors", c1_class_field_anchors),
        ("unit anchors", c2_unit_anchors),
        ("solvability equivalence", c3_solvability_equivalence),
        ("x² − 34y² = m consistency", c4_pell34_consistency),
        ("known obstructions", c5_obstructions),
        ("negative Pell classification", c6_negative_pell),
        ("slope proportionality", c7_slope_proportionality),
        ("calibration report", c8_calibration),
        ("staircase convergence", c9_staircase),
        ("local densities", c10_local_densities),
        ("archimedean volume", c11_archimedean_volume),
        ("Hasse–Witt anchors", c12_hasse_witt),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        if !ok {
            failed += 1;
        }
        println!(
            "{} {:>2}. {name}: {detail} [{:.1}s]",
            if ok { "PASS" } else { "FAIL" },
            i + 1,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Randomized and structural invariants across the arithmetic layers.

use hecke_resonance::afe::{afe_central_value_detailed, AfeConfig};
use hecke_resonance::chars::{char_orthogonality_sum, make_characters};
use hecke_resonance::field::{build_field, FieldContext, Splitting};
use hecke_resonance::ideals::{
    diagonal_classify, enumerate_ideals, DiagonalClass, Ideal,
};
use hecke_resonance::resonance::{support_products, ResonatorSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random ideal from prime ideals over rational primes up to `pmax`.
fn random_ideal(ctx: &FieldContext, rng: &mut ChaCha8Rng, pmax: u64, max_primes: usize) -> Ideal {
    let mut ideal = Ideal::unit();
    let n = rng.gen_range(1..=max_primes);
    for _ in 0..n {
        let p = loop {
            let c = rng.gen_range(2..=pmax);
            if hecke_resonance::field::is_prime_u64(c) {
                break c;
            }
        };
        let e = rng.gen_range(1..=2u32);
        let factor = match ctx.splitting_type(p).unwrap() {
            Splitting::Split(a, b) => {
                if rng.gen_bool(0.5) {
                    Ideal::from_prime(a, e)
                } else {
                    Ideal::from_prime(b, e)
                }
            }
            Splitting::Inert(q) => Ideal::from_prime(q, 1),
            Splitting::Ramified(q) => Ideal::from_prime(q, e),
        };
        ideal = ideal.mul(&factor).unwrap();
    }
    ideal
}

/// Random principal ideal: a random ideal times a prime representative of
/// its inverse class.
fn random_principal(ctx: &FieldContext, rng: &mut ChaCha8Rng) -> Ideal {
    let a = random_ideal(ctx, rng, 60, 3);
    let inv = ctx.inverse_class(a.class_index(ctx));
    let fix = ctx.class_prime_reps()[inv].clone();
    let out = a.mul(&fix).unwrap();
    debug_assert_eq!(out.class_index(ctx), ctx.identity_class());
    out
}

#[test]
fn norm_is_multiplicative() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for d in [-1i64, -5, -23] {
        let ctx = build_field(d).unwrap();
        for _ in 0..500 {
            let a = random_ideal(&ctx, &mut rng, 60, 3);
            let b = random_ideal(&ctx, &mut rng, 60, 3);
            let ab = a.mul(&b).unwrap();
            assert_eq!(ab.norm().unwrap(), a.norm().unwrap() * b.norm().unwrap());
        }
    }
}

#[test]
fn unit_window_uniqueness() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for d in [-1i64, -3, -5] {
        let ctx = build_field(d).unwrap();
        let rp = ctx.ring();
        for _ in 0..500 {
            let a = random_principal(&ctx, &mut rng);
            let g = a.principal_generator(&ctx).unwrap().expect("principal");
            let in_window = rp
                .units()
                .iter()
                .map(|&u| rp.mul(g.coords, u))
                .filter(|&v| rp.in_arg_window(v))
                .count();
            assert_eq!(in_window, 1);
            // and the found generator is the one in the window
            assert!(rp.in_arg_window(g.coords));
            // |gamma|^2 equals the norm exactly
            assert_eq!(rp.norm(g.coords) as u128, a.norm().unwrap());
        }
    }
}

#[test]
fn class_map_is_a_homomorphism() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for d in [-5i64, -14, -21, -23] {
        let ctx = build_field(d).unwrap();
        for _ in 0..200 {
            let a = random_ideal(&ctx, &mut rng, 60, 3);
            let b = random_ideal(&ctx, &mut rng, 60, 3);
            let want = ctx.compose_classes(a.class_index(&ctx), b.class_index(&ctx));
            assert_eq!(a.mul(&b).unwrap().class_index(&ctx), want);
        }
    }
}

#[test]
fn conjugate_ideal_has_equal_norm_and_inverse_class() {
    let mut rng = ChaCha8Rng::seed_from_u64(14);
    for d in [-5i64, -14, -23] {
        let ctx = build_field(d).unwrap();
        for _ in 0..200 {
            let a = random_ideal(&ctx, &mut rng, 60, 3);
            let c = a.conj();
            assert_eq!(a.norm().unwrap(), c.norm().unwrap());
            assert_eq!(
                c.class_index(&ctx),
                ctx.inverse_class(a.class_index(&ctx))
            );
        }
    }
}

/// Near-real canonical generators of small products are exactly rational:
/// for d = -1, N = 50, X = 5000, every pair with |arg gamma_{a conj b}|
/// below X^{-1+0.1} lies in P0.
#[test]
fn small_angles_force_rationality() {
    let ctx = build_field(-1).unwrap();
    let x = 5000.0f64;
    let threshold = x.powf(-1.0 + 0.1);
    let ideals = enumerate_ideals(&ctx, 50.0).unwrap();
    let mut checked = 0usize;
    for a in &ideals {
        for b in &ideals {
            let prod = a.mul(&b.conj()).unwrap();
            let g = prod.principal_generator(&ctx).unwrap().expect("h = 1");
            if g.arg_gamma.abs() < threshold {
                assert!(prod.is_rational(), "{a} * conj({b}) = {prod}");
                checked += 1;
            }
        }
    }
    assert!(checked > ideals.len()); // the diagonal pairs at least
}

#[test]
fn unit_generator_invariance_of_character_phase() {
    let mut rng = ChaCha8Rng::seed_from_u64(15);
    for d in [-1i64, -3, -5] {
        let ctx = build_field(d).unwrap();
        let rp = ctx.ring();
        let ell = ctx.omega_k as i64 * 3;
        for _ in 0..200 {
            let a = random_principal(&ctx, &mut rng);
            let g = a.principal_generator(&ctx).unwrap().unwrap();
            let base = Complex64::from_polar(1.0, ell as f64 * rp.arg(g.coords));
            for &u in &rp.units() {
                let v = rp.mul(g.coords, u);
                let alt = Complex64::from_polar(1.0, ell as f64 * rp.arg(v));
                assert!((base - alt).norm() < 1e-12);
            }
        }
    }
}

#[test]
fn character_well_definedness_two_routes() {
    let mut rng = ChaCha8Rng::seed_from_u64(16);
    for d in [-1i64, -5, -14, -21] {
        let ctx = build_field(d).unwrap();
        let ell = ctx.omega_k as i64;
        for xi in make_characters(&ctx, ell) {
            for _ in 0..50 {
                let a = random_ideal(&ctx, &mut rng, 40, 3);
                let v1 = xi.eval(&a, &ctx).unwrap();
                let v2 = xi.eval_via_class_decomposition(&a, &ctx).unwrap();
                assert!((v1 - v2).norm() < 1e-12, "d={d} a={a}: {v1} vs {v2}");
                assert!((v1.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn character_multiplicativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for d in [-5i64, -21] {
        let ctx = build_field(d).unwrap();
        let xi = &make_characters(&ctx, 2 * ctx.omega_k as i64)[ctx.h_k - 1];
        for _ in 0..100 {
            let a = random_ideal(&ctx, &mut rng, 40, 2);
            let b = random_ideal(&ctx, &mut rng, 40, 2);
            let lhs = xi.eval(&a.mul(&b).unwrap(), &ctx).unwrap();
            let rhs = xi.eval(&a, &ctx).unwrap() * xi.eval(&b, &ctx).unwrap();
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }
}

#[test]
fn orthogonality_random_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(18);
    for d in [-5i64, -14] {
        let ctx = build_field(d).unwrap();
        let ell = ctx.omega_k as i64 * 2;
        for _ in 0..100 {
            let a = random_ideal(&ctx, &mut rng, 50, 3);
            let s = char_orthogonality_sum(&ctx, ell, &a).unwrap();
            if a.class_index(&ctx) == ctx.identity_class() {
                let g = a.principal_generator(&ctx).unwrap().unwrap();
                let want = ctx.h_k as f64
                    * Complex64::from_polar(1.0, ell as f64 * g.arg_gamma);
                assert!((s - want).norm() < 1e-12);
            } else {
                assert!(s.norm() < 1e-12);
            }
        }
    }
}

/// The k = k0 * conj(a'') * b'' parametrization of the rational diagonal
/// agrees with brute-force classification of every k.
#[test]
fn diagonal_parametrization_matches_brute_force() {
    let ctx = build_field(-1).unwrap();
    let spec = ResonatorSpec::desk_default(26.0, &ctx).unwrap(); // pairs {5, 13}
    let products = support_products(&spec, spec.n_length).unwrap();
    let kmax = 300.0;
    let ideals = enumerate_ideals(&ctx, kmax).unwrap();
    for pa in &products {
        for pb in &products {
            // parametrized: k = (m) conj(a'') b''
            let (_, ap) = pa.ideal.p0_pprime_split();
            let (_, bp) = pb.ideal.p0_pprime_split();
            let core = ap.gcd(&bp);
            let a2 = ap.div_exact(&core).unwrap();
            let b2 = bp.div_exact(&core).unwrap();
            let q = (a2.norm().unwrap() * b2.norm().unwrap()) as f64;
            let mut expected = 0u64;
            let mut m = 1.0f64;
            while m * m * q <= kmax {
                expected += 1;
                m += 1.0;
            }
            // brute force over all ideals
            let mut got = 0u64;
            for k in &ideals {
                if let DiagonalClass::InP0 { .. } =
                    diagonal_classify(k, &pa.ideal, &pb.ideal, &ctx).unwrap()
                {
                    got += 1;
                }
            }
            assert_eq!(got, expected, "pair ({}, {})", pa.ideal, pb.ideal);
        }
    }
}

#[test]
fn truncation_monotonicity_of_afe() {
    let cfg4 = AfeConfig { slack: 4.0, ..Default::default() };
    let cfg9 = AfeConfig { slack: 9.0, ..Default::default() };
    for d in [-1i64, -3, -5] {
        let ctx = build_field(d).unwrap();
        for k in 1..=5 {
            let ell = ctx.omega_k as i64 * 2 * k;
            for xi in make_characters(&ctx, ell) {
                let a = afe_central_value_detailed(&xi, &ctx, &cfg4).unwrap();
                let b = afe_central_value_detailed(&xi, &ctx, &cfg9).unwrap();
                assert!(
                    (a.value - b.value).abs() <= a.est_err + b.est_err,
                    "d={d} ell={ell}: {} vs {} (est {} + {})",
                    a.value,
                    b.value,
                    a.est_err,
                    b.est_err
                );
            }
        }
    }
}

/// The phase-precomputed resonator evaluation inside the moment sweeps must
/// agree with direct per-character evaluation, including for class groups
/// with several generators.
#[test]
fn moment_denominator_matches_naive_resonator_sum() {
    use hecke_resonance::kernels::bump_phi;
    use hecke_resonance::resonance::{moment_denominator, resonator_eval};
    for d in [-5i64, -21, -23] {
        let ctx = build_field(d).unwrap();
        let spec = ResonatorSpec::desk_default(30.0, &ctx).unwrap();
        assert!(!spec.support.is_empty(), "d={d} should have split primes below 30");
        let x = 200.0;
        let (direct, _) = moment_denominator(x, &spec, &ctx, 0.05).unwrap();
        let w = ctx.omega_k as i64;
        let mut naive = 0.0;
        let mut k = (x as i64) / w;
        loop {
            let ell = w * k;
            if ell as f64 > 2.0 * x {
                break;
            }
            let weight = bump_phi(ell as f64 / x);
            if weight > 0.0 {
                for xi in make_characters(&ctx, ell) {
                    naive += weight * resonator_eval(&xi, &spec, &ctx).unwrap().norm_sqr();
                }
            }
            k += 1;
        }
        assert!(
            (direct - naive).abs() <= 1e-9 * naive.abs().max(1.0),
            "d={d}: {direct} vs {naive}"
        );
    }
}

/// At `Re s = 2` the Gaussian-smoothed series agrees with the raw partial
/// sum of the absolutely convergent series truncated at norm 1e6.
#[test]
fn smoothed_series_matches_raw_partial_sum() {
    use hecke_resonance::afe::smoothed_series_value;
    use num_complex::Complex64 as C;
    let ctx = build_field(-1).unwrap();
    let xi = &make_characters(&ctx, 4)[0];
    let smoothed = smoothed_series_value(C::new(2.0, 0.0), xi, &ctx, 1e4).unwrap();
    // raw sum over the unit-orbit sector of Z[i], norms up to 1e6
    let mut raw = 0.0f64;
    let bound = 1_000_000i64;
    let umax = (bound as f64).sqrt() as i64 + 1;
    for u in 1..=umax {
        for v in -u..u {
            let n = u * u + v * v;
            if n == 0 || n > bound {
                continue;
            }
            let theta = (v as f64).atan2(u as f64);
            raw += (4.0 * theta).cos() / (n * n) as f64;
        }
    }
    assert!(smoothed.im.abs() < 1e-12);
    assert!((smoothed.re - raw).abs() <= 1e-5, "{} vs {raw}", smoothed.re);
}

#[test]
fn afe_cost_contract_at_ell_1e4() {
    let ctx = build_field(-1).unwrap();
    let cfg = AfeConfig::default();
    let xi = &make_characters(&ctx, 10_000)[0];
    // warm up once (lazy allocations, page faults)
    let _ = afe_central_value_detailed(xi, &ctx, &cfg).unwrap();
    let t0 = std::time::Instant::now();
    let eval = afe_central_value_detailed(xi, &ctx, &cfg).unwrap();
    let elapsed = t0.elapsed();
    assert!(eval.n_terms > 1000);
    assert!(
        elapsed.as_millis() <= 50,
        "AFE at ell = 10^4 took {elapsed:?} (contract: 50 ms)"
    );
}

#[test]
fn numerator_decomposition_and_lower_bound() {
    use hecke_resonance::kernels::phi_hat_zero;
    use hecke_resonance::resonance::{extreme_value_search, moment_numerator};
    let ctx = build_field(-1).unwrap();
    let cfg = AfeConfig::default();
    let x = 2048.0f64;
    let spec = ResonatorSpec::desk_default(x.powf(0.25 - 0.05), &ctx).unwrap();
    let m = moment_numerator(x, &spec, &ctx, &cfg, 0.05, true).unwrap();
    let lower = m.diagonal_lower.unwrap();
    // the truncated diagonal lower bound cannot exceed the direct moment
    // plus the off-diagonal mass
    assert!(lower <= m.direct.abs() + m.offdiag_mass, "{lower} vs {m:?}");

    // empty support: diagonal_lower reduces to the rational k0 harmonic sum
    let empty = ResonatorSpec::desk_default(4.0, &ctx).unwrap();
    let me = moment_numerator(x, &empty, &ctx, &cfg, 0.05, true).unwrap();
    let cut = x / (2.0 * ctx.c_k);
    let mut h = 0.0;
    let mut k = 1.0f64;
    while k * k <= cut {
        h += 1.0 / k;
        k += 1.0;
    }
    let want = 2.0 * ctx.h_k as f64 / ctx.omega_k as f64 * phi_hat_zero() * x * h;
    assert!((me.diagonal_lower.unwrap() - want).abs() < 1e-9 * want);

    // the reported maximum dominates the weighted average
    let out = extreme_value_search(x, &spec, &ctx, &cfg, 0.05).unwrap();
    assert!(out.weighted_avg_bound > 0.0);
    assert!(out.log_abs_l_star >= out.weighted_avg_bound.ln());
}

#[test]
fn probe_count_at_x_4096() {
    use hecke_resonance::resonance::offdiagonal_probe;
    let ctx = build_field(-1).unwrap();
    let pairs = vec![(Ideal::unit(), Ideal::unit())];
    let probes = offdiagonal_probe(4096.0, &ctx, 0, 1, &pairs, 1.0).unwrap();
    let p = probes.iter().find(|p| p.nu == 0 && p.m == 1).unwrap();
    assert!((p.bound - 65.0).abs() < 1e-12);
    assert!((p.count as f64) <= 40.0 * p.bound, "count {} bound {}", p.count, p.bound);
    assert!(p.count > 0, "the window should not be empty at this scale");
}

#[test]
fn empty_support_moment_formulas() {
    let ctx = build_field(-1).unwrap();
    let spec = ResonatorSpec::desk_default(4.0, &ctx).unwrap();
    assert!(spec.support.is_empty());
    let x = 400.0;
    let (direct, model) = hecke_resonance::resonance::moment_denominator(x, &spec, &ctx, 0.05).unwrap();
    // R = 1: direct = h sum_ell Phi(ell/X), model = h X Phi_hat(0)/omega
    let mut plain = 0.0;
    let mut k = 0;
    loop {
        let ell = 4 * k;
        let u = ell as f64 / x;
        if u > 2.0 {
            break;
        }
        plain += hecke_resonance::kernels::bump_phi(u);
        k += 1;
    }
    assert!((direct - plain).abs() < 1e-9);
    assert!((direct - model).abs() <= 1e-6 * x);
}

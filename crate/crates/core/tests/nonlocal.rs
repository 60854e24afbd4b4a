use fracp_core::nonlocal::{
    coincidence_tail_bound, cover, dyadic_tail_chain, elementary_superlevel_inequality, finite_difference, gagliardo_seminorm,
    mean, mean_subtracted_tail, minkowski_sum_inequality, seminorm_power_on_samples, tail, tail_decomposition,
    AnalyticClosure, Ball, Exterior, GridFunction, Mesh, NonlocalError,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn affine_on(lo: f64, hi: f64, nodes: usize) -> GridFunction {
    GridFunction::from_closure(Mesh::new(lo, hi, nodes).unwrap(), AnalyticClosure::affine(1.0, 0.0))
}

/// Midpoint double sum of `|x−y|^{q−1−γq}` for `w(x)=x` on `(−1,1)²`, skipping the diagonal cells.
fn brute_force_affine(gamma: f64, q: f64, cells: usize) -> f64 {
    let h = 2.0 / cells as f64;
    let e = q - 1.0 - gamma * q;
    let mut acc = 0.0;
    for i in 0..cells {
        for j in 0..cells {
            if i != j {
                acc += ((i as f64 - j as f64).abs() * h).powf(e);
            }
        }
    }
    // Diagonal cells: ∬_{cell²} |x−y|^e = 2h^{e+2}/((e+1)(e+2)).
    acc * h * h + cells as f64 * 2.0 * h.powf(e + 2.0) / ((e + 1.0) * (e + 2.0))
}

#[test]
fn seminorm_of_identity_is_area_of_square() {
    let w = affine_on(-1.0, 1.0, 201);
    let r = gagliardo_seminorm(&w, &Ball::new(0.0, 1.0).unwrap(), 0.5, 2.0).unwrap();
    assert!(rel(r.power, 4.0) < 1e-12, "{}", r.power);
    assert!(rel(r.value, 2.0) < 1e-12);
}

#[test]
fn seminorm_of_constant_vanishes() {
    let w = GridFunction::from_closure(Mesh::new(-1.0, 1.0, 101).unwrap(), AnalyticClosure::constant(3.5));
    let r = gagliardo_seminorm(&w, &Ball::new(0.0, 1.0).unwrap(), 0.3, 1.5).unwrap();
    assert_eq!(r.power, 0.0);
}

#[test]
fn seminorm_matches_brute_force_double_sum() {
    let w = affine_on(-1.0, 1.0, 401);
    let r = gagliardo_seminorm(&w, &Ball::new(0.0, 1.0).unwrap(), 0.25, 2.0).unwrap();
    let oracle = brute_force_affine(0.25, 2.0, 1600);
    assert!(rel(r.power, oracle) < 1e-3, "{} vs {}", r.power, oracle);
}

#[test]
fn seminorm_converges_for_smooth_function() {
    let ball = Ball::new(0.0, 1.0).unwrap();
    let coarse = GridFunction::from_fn(Mesh::new(-1.0, 1.0, 161).unwrap(), f64::sin, Exterior::zero()).unwrap();
    let fine = GridFunction::from_fn(Mesh::new(-1.0, 1.0, 641).unwrap(), f64::sin, Exterior::zero()).unwrap();
    let a = gagliardo_seminorm(&coarse, &ball, 0.4, 2.0).unwrap().power;
    let b = gagliardo_seminorm(&fine, &ball, 0.4, 2.0).unwrap().power;
    assert!(rel(a, b) < 1e-3, "{a} vs {b}");
}

#[test]
fn seminorm_flags_jump_with_large_order() {
    let mesh = Mesh::new(-1.0, 1.0, 1025).unwrap();
    let w = GridFunction::from_fn(mesh, |x| if x < 0.0 { 0.0 } else { 1.0 }, Exterior::zero()).unwrap();
    match gagliardo_seminorm(&w, &Ball::new(0.0, 1.0).unwrap(), 0.6, 2.0) {
        Err(NonlocalError::DivergentSeminorm { values }) => assert_eq!(values.len(), 3),
        other => panic!("expected divergence, got {other:?}"),
    }
}

#[test]
fn seminorm_rejects_ball_outside_mesh() {
    let w = affine_on(-1.0, 1.0, 11);
    assert!(matches!(
        gagliardo_seminorm(&w, &Ball::new(0.5, 1.0).unwrap(), 0.5, 2.0),
        Err(NonlocalError::OutsideMesh { .. })
    ));
}

#[test]
fn seminorm_scaling_for_power_functions() {
    let (gamma, q, radius, nodes) = (0.35, 2.5, 1.0, 257);
    let base = GridFunction::from_closure(Mesh::new(-radius, radius, nodes).unwrap(), AnalyticClosure::power(1.0, 3.0));
    let reference = gagliardo_seminorm(&base, &Ball::new(0.0, radius).unwrap(), gamma, q).unwrap().power;
    for lambda in [2.0f64, 4.0] {
        let small = radius / lambda;
        let scaled = GridFunction::from_closure(
            Mesh::new(-small, small, nodes).unwrap(),
            AnalyticClosure::power(lambda.powi(3), 3.0),
        );
        let v = gagliardo_seminorm(&scaled, &Ball::new(0.0, small).unwrap(), gamma, q).unwrap().power;
        let expected = lambda.powf(gamma * q - 1.0) * reference;
        assert!(rel(v, expected) < 1e-4, "λ={lambda}: {v} vs {expected}");
    }
}

#[test]
fn compensated_reduction_is_order_independent() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let values: Vec<f64> = (0..2001).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| seminorm_power_on_samples(&values, 1e-3, 0.3, 2.0))
    };
    let one = run(1);
    for threads in [2, 3, 8] {
        assert!(rel(run(threads), one) < 1e-13);
    }
}

#[test]
fn embedding_scaling_ratio_stays_bounded() {
    let (gamma, sigma, q) = (0.25, 0.75, 2.0);
    let mut ratios = Vec::new();
    for k in 0..5 {
        let r = 2f64.powi(-k);
        let w = GridFunction::from_fn(Mesh::new(-r, r, 129).unwrap(), |x| (x + 0.3).exp(), Exterior::zero()).unwrap();
        let ball = Ball::new(0.0, r).unwrap();
        let low = gagliardo_seminorm(&w, &ball, gamma, q).unwrap().power;
        let high = gagliardo_seminorm(&w, &ball, sigma, q).unwrap().power;
        ratios.push(r.powf(gamma * q) * low / (r.powf(sigma * q) * high));
    }
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    assert!(lo > 0.0 && hi / lo < 2.0, "{ratios:?}");
}

#[test]
fn differences_annihilate_constants_and_affine_functions() {
    let mesh = Mesh::new(-1.0, 1.0, 201).unwrap();
    let c = GridFunction::from_closure(mesh, AnalyticClosure::constant(2.0));
    for h in [0.1, -0.3, 0.037] {
        assert!(finite_difference(&c, h, 1).unwrap().values().iter().all(|&v| v == 0.0));
    }
    let x = GridFunction::from_closure(mesh, AnalyticClosure::affine(1.0, 0.0));
    let d1 = finite_difference(&x, 0.1, 1).unwrap();
    assert!(d1.values().iter().all(|&v| (v - 0.1).abs() < 1e-14));
    let d2 = finite_difference(&x, 0.1, 2).unwrap();
    assert!(d2.values().iter().all(|&v| v.abs() < 1e-14));
    assert_eq!(d2.mesh().nodes(), 201 - 20);
}

#[test]
fn second_difference_of_square_is_twice_step_squared() {
    let mesh = Mesh::new(-1.0, 1.0, 201).unwrap();
    let w = GridFunction::from_closure(mesh, AnalyticClosure::power(1.0, 2.0));
    let d2 = finite_difference(&w, 0.1, 2).unwrap();
    assert!(d2.values().iter().all(|&v| (v - 0.02).abs() < 1e-13));
    // Off-lattice step goes through interpolation; the exterior keeps it exact at the ends.
    let off = finite_difference(&w, 0.1234, 1).unwrap();
    let x0 = off.mesh().x(0);
    assert!((off.values()[0] - ((x0 + 0.1234f64).powi(2) - x0 * x0)).abs() < 1e-4);
}

#[test]
fn second_order_equals_nested_first_order() {
    let mesh = Mesh::new(0.0, 2.0, 121).unwrap();
    let w = GridFunction::from_fn(mesh, |x| (3.0 * x).sin() + x * x * x, Exterior::zero()).unwrap();
    for h in [0.05, -0.1, 1.0 / 6.0] {
        let direct = finite_difference(&w, h, 2).unwrap();
        let nested = finite_difference(&finite_difference(&w, h, 1).unwrap(), h, 1).unwrap();
        assert_eq!(direct.mesh(), nested.mesh());
        assert_eq!(direct.values(), nested.values());
    }
    assert!(finite_difference(&w, 0.1, 3).is_err());
}

#[test]
fn tail_of_function_vanishing_outside_ball_is_zero() {
    let mesh = Mesh::new(-0.5, 0.5, 101).unwrap();
    let u = GridFunction::from_fn(mesh, |x| 1.0 - 4.0 * x * x, Exterior::zero()).unwrap();
    assert_eq!(tail(&u, &Ball::new(0.0, 0.5).unwrap(), 2.0, 0.75).unwrap(), 0.0);
}

#[test]
fn tail_of_constant_closed_form() {
    for (c, radius) in [(1.0, 0.5), (2.5, 1.0), (-3.0, 2.0)] {
        let u = GridFunction::from_closure(Mesh::new(-1.0, 1.0, 81).unwrap(), AnalyticClosure::constant(c));
        let t = tail(&u, &Ball::new(0.0, radius).unwrap(), 2.0, 0.75).unwrap();
        assert!(rel(t, 4.0 / 3.0 * c.abs()) < 1e-8, "{t}");
    }
}

#[test]
fn tail_of_identity_closed_form() {
    for radius in [0.25, 0.5, 1.0, 3.0] {
        let u = affine_on(-1.0, 1.0, 81);
        let t = tail(&u, &Ball::new(0.0, radius).unwrap(), 2.0, 0.75).unwrap();
        assert!(rel(t, 4.0 * radius) < 1e-8, "R={radius}: {t}");
    }
}

#[test]
fn power_tail_branch_matches_generic_quadrature() {
    let mesh = Mesh::new(-1.0, 1.0, 201).unwrap();
    let f = |x: f64| 2.0 * x.abs().powf(0.4);
    let closed = GridFunction::from_fn(mesh, f, Exterior::PowerTail { amplitude: 2.0, exponent: 0.4 }).unwrap();
    let generic = GridFunction::from_fn(mesh, f, Exterior::AnalyticClosure(AnalyticClosure::power(2.0, 0.4))).unwrap();
    for radius in [0.3, 1.0, 1.7] {
        let ball = Ball::new(0.0, radius).unwrap();
        let a = tail(&closed, &ball, 2.5, 0.6).unwrap();
        let b = tail(&generic, &ball, 2.5, 0.6).unwrap();
        assert!(rel(a, b) < 1e-8, "{a} vs {b}");
    }
}

#[test]
fn tail_rejects_exterior_outside_weighted_space() {
    let u = GridFunction::from_closure(Mesh::new(-1.0, 1.0, 11).unwrap(), AnalyticClosure::power(1.0, 2.0));
    assert!(matches!(
        tail(&u, &Ball::new(0.0, 1.0).unwrap(), 2.0, 0.75),
        Err(NonlocalError::DivergentTail { .. })
    ));
}

#[test]
fn decomposition_first_term_zero_when_exterior_matches_mean() {
    let mesh = Mesh::new(-1.0, 1.0, 201).unwrap();
    let u = GridFunction::from_fn(mesh, |x| 1.0 + 0.0 * x, Exterior::AnalyticClosure(AnalyticClosure::constant(1.0))).unwrap();
    let rep = tail_decomposition(&u, &Ball::new(0.1, 0.3).unwrap(), &Ball::new(0.0, 1.0).unwrap(), 2.0, 0.75).unwrap();
    assert!(rep.decomposition.first.abs() < 1e-12);
    assert!(rep.bound_i.abs() < 1e-12);
    assert!(rep.first_term_bounded());
}

#[test]
fn decomposition_concentric_coefficient() {
    let u = GridFunction::from_fn(
        Mesh::new(-1.0, 1.0, 201).unwrap(),
        |x| x * x * x + 0.5,
        Exterior::AnalyticClosure(AnalyticClosure::new("cubic-ish", 0.5, |x: f64| x.signum() * x.abs().sqrt() + 0.5)),
    )
    .unwrap();
    let (inner, outer) = (Ball::new(0.0, 0.4).unwrap(), Ball::new(0.0, 1.0).unwrap());
    let (p, s) = (2.5, 0.6);
    let rep = tail_decomposition(&u, &inner, &outer, p, s).unwrap();
    let sp_conj = s * p / (p - 1.0);
    let expected = (0.4f64).powf(sp_conj) * mean_subtracted_tail(&u, &outer, p, s).unwrap();
    assert!(rel(rep.bound_i, expected) < 1e-14);
    assert!(rel(rep.decomposition.first, rep.bound_i) < 1e-9);
}

#[test]
fn decomposition_bounds_for_shifted_balls() {
    let u = affine_on(-2.0, 2.0, 401);
    let rep = tail_decomposition(&u, &Ball::new(0.2, 0.3).unwrap(), &Ball::new(0.0, 1.0).unwrap(), 2.0, 0.75).unwrap();
    assert!(rep.decomposition.first > 0.0);
    assert!(rep.first_term_bounded(), "{rep:?}");
    assert!(rep.recombination_holds(), "{rep:?}");
    assert!(rep.decomposition.second <= rep.majorant_ii * (1.0 + 1e-9));
    assert!((rep.constant_tail_factor - 4.0 / 3.0).abs() < 1e-15);
}

#[test]
fn two_piece_split_is_an_identity() {
    // Centred odd data: both means vanish, so the pieces add up exactly.
    for (p, s) in [(2.0, 0.75), (3.0, 0.8), (1.6, 0.8)] {
        let u = affine_on(-2.0, 2.0, 401);
        let rep = tail_decomposition(&u, &Ball::new(0.0, 0.3).unwrap(), &Ball::new(0.0, 1.0).unwrap(), p, s).unwrap();
        let d = rep.decomposition;
        assert!(d.third.abs() < 1e-14);
        let sum = d.first.powf(p - 1.0) + d.second.powf(p - 1.0);
        assert!(rel(rep.tail_value.powf(p - 1.0), sum) < 1e-9, "p={p}");
    }
}

#[test]
fn dyadic_chain_without_steps_is_plain_tail() {
    let u = affine_on(-2.0, 2.0, 401);
    let ball = Ball::new(0.0, 0.1).unwrap();
    let chain = dyadic_tail_chain(&u, &ball, 0, 2.0, 0.75).unwrap();
    assert!(chain.summands.is_empty());
    assert_eq!(chain.remaining, chain.lhs);
    assert!(rel(chain.lhs, 0.4) < 1e-8);
}

#[test]
fn dyadic_chain_of_constant_has_zero_summands() {
    let u = GridFunction::from_closure(Mesh::new(-2.0, 2.0, 201).unwrap(), AnalyticClosure::constant(4.0));
    let chain = dyadic_tail_chain(&u, &Ball::new(0.0, 0.1).unwrap(), 3, 2.0, 0.75).unwrap();
    assert!(chain.summands.iter().all(|&v| v.abs() < 1e-12));
}

#[test]
fn dyadic_chain_affine_decay_rate() {
    let u = affine_on(-2.0, 2.0, 801);
    let (p, s) = (2.0, 0.75);
    let chain = dyadic_tail_chain(&u, &Ball::new(0.0, 0.1).unwrap(), 3, p, s).unwrap();
    let factor = 2f64.powf(1.0 - s * p / (p - 1.0));
    for w in chain.summands.windows(2) {
        assert!(rel(w[1] / w[0], factor) < 1e-6, "{:?}", chain.summands);
    }
    // Oscillation of the identity on B_ρ is ρ/3^{1/2} for p = 2.
    assert!(rel(chain.oscillations[0], 0.2 / 3f64.sqrt()) < 1e-8);
}

#[test]
fn coincidence_of_identical_functions() {
    let u = affine_on(-2.0, 2.0, 401);
    let rep = coincidence_tail_bound(&u, &u, &Ball::new(0.0, 0.3).unwrap(), &Ball::new(0.0, 1.0).unwrap(), 2.0, 0.75).unwrap();
    assert_eq!(rep.lhs, rep.tail_u);
    assert_eq!(rep.difference_term, 0.0);
}

#[test]
fn coincidence_difference_term_of_bump() {
    let mesh = Mesh::new(-2.0, 2.0, 801).unwrap();
    let u = GridFunction::from_closure(mesh, AnalyticClosure::affine(1.0, 0.0));
    let bump = |x: f64| if x.abs() < 0.5 { (1.0 - 4.0 * x * x).powi(2) } else { 0.0 };
    let v = GridFunction::from_fn(mesh, move |x| x + bump(x), Exterior::AnalyticClosure(AnalyticClosure::affine(1.0, 0.0))).unwrap();
    let (inner, outer) = (Ball::new(0.0, 0.25).unwrap(), Ball::new(0.0, 1.0).unwrap());
    let p = 2.0;
    let rep = coincidence_tail_bound(&u, &v, &inner, &outer, p, 0.75).unwrap();
    // ∫_{−1/2}^{1/2} (1−4x²)^4 dx = 128/315.
    let lp: f64 = 128.0 / 315.0 / 2.0;
    let expected = (1.0f64 / 0.25).powf(1.0 / (p - 1.0)) * lp.powf(1.0 / p);
    assert!(rel(rep.difference_term, expected) < 1e-4, "{} vs {}", rep.difference_term, expected);
    assert!(rep.lhs <= rep.tail_u + rep.tail_difference + 4.0 / 3.0 * rep.mean_gap + 1e-12);
}

#[test]
fn coincidence_detects_exterior_perturbation() {
    let mesh = Mesh::new(-2.0, 2.0, 401).unwrap();
    let u = GridFunction::from_closure(mesh, AnalyticClosure::affine(1.0, 0.0));
    let mut vals = u.values().to_vec();
    vals[390] += 1e-6;
    let v = GridFunction::new(mesh, vals, u.exterior().clone()).unwrap();
    assert!(matches!(
        coincidence_tail_bound(&u, &v, &Ball::new(0.0, 0.3).unwrap(), &Ball::new(0.0, 1.0).unwrap(), 2.0, 0.75),
        Err(NonlocalError::CoincidenceViolated { .. })
    ));
}

#[test]
fn means_use_the_same_rule_as_norms() {
    let u = affine_on(-1.0, 1.0, 101);
    assert!(mean(&u, &Ball::new(0.2, 0.5).unwrap()).unwrap() - 0.2 < 1e-14);
}

#[test]
fn cover_one_dimensional_lattice() {
    let c = cover(&[0.0], 1.0, 0.25).unwrap();
    let xs: Vec<f64> = c.centers.iter().map(|z| z[0]).collect();
    assert_eq!(xs.len(), 9);
    for (k, x) in xs.iter().enumerate() {
        assert!((x - (-1.0 + 0.25 * k as f64)).abs() < 1e-15);
    }
    let samples: Vec<Vec<f64>> = (0..=20000).map(|j| vec![-1.0 + j as f64 * 1e-4]).collect();
    assert!(c.uncovered(&samples).is_empty());
}

#[test]
fn cover_near_half_radius_is_small() {
    let c = cover(&[0.0], 1.0, 0.4999).unwrap();
    assert!(c.centers.len() <= 5);
    let samples: Vec<Vec<f64>> = (0..=20000).map(|j| vec![-1.0 + j as f64 * 1e-4]).collect();
    assert!(c.uncovered(&samples).is_empty());
    assert!(cover(&[0.0], 1.0, 0.5).is_err());
}

#[test]
fn cover_two_and_three_dimensions() {
    for (center, r) in [(vec![0.3, -0.2], 0.2), (vec![0.0, 0.0, 0.0], 0.3)] {
        let c = cover(&center, 1.0, r).unwrap();
        let samples = c.grid_samples(1.0, if center.len() == 2 { 201 } else { 41 });
        assert!(c.uncovered(&samples).is_empty());
        let profile = c.overlap_profile(3, if center.len() == 2 { 61 } else { 17 });
        let dim = center.len() as i32;
        // Lattice bounds: count ≤ (2√n+1)^n (R/r)^n and overlap ≤ (4√n+1)^n 2^{nk}.
        let sq = (dim as f64).sqrt();
        assert!(profile.count_constant <= (2.0 * sq + 1.0).powi(dim));
        assert!(profile.overlap_constant <= (4.0 * sq + 1.0).powi(dim));
    }
}

#[test]
fn superlevel_example_and_equal_vectors() {
    let r = elementary_superlevel_inequality(1.0, 2.0, 1.0, &[2.0], &[1.0]).unwrap();
    assert_eq!((r.lhs, r.rhs), (2.0, 4.0));
    assert!(r.holds);
    let r = elementary_superlevel_inequality(1.5, 3.0, 0.5, &[1.0, 2.0], &[1.0, 2.0]).unwrap();
    assert!(r.holds);
    assert!(matches!(
        elementary_superlevel_inequality(1.0, 2.0, 3.0, &[2.0], &[1.0]),
        Err(NonlocalError::PreconditionViolated(_))
    ));
}

#[test]
fn superlevel_random_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..100_000 {
        let dim = rng.gen_range(1..=3);
        let gamma = rng.gen_range(1.0..4.0);
        let alpha = gamma + rng.gen_range(0.0..3.0);
        let k = rng.gen_range(0.01..5.0);
        let mut a: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        if na < k {
            let scale = k / na.max(1e-12) * rng.gen_range(1.0..3.0);
            a.iter_mut().for_each(|x| *x *= scale);
            if a.iter().all(|&x| x == 0.0) {
                continue;
            }
        }
        let b: Vec<f64> = (0..dim).map(|_| rng.gen_range(-10.0..10.0)).collect();
        let r = elementary_superlevel_inequality(gamma, alpha, k, &a, &b).unwrap();
        assert!(r.holds, "γ={gamma} α={alpha} K={k} a={a:?} b={b:?}");
    }
}

proptest! {
    #[test]
    fn minkowski_holds_for_random_arrays(
        rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 7), 1..6),
        pick in 0usize..4,
    ) {
        let p = [1.0, 1.5, 2.0, 3.0][pick];
        let r = minkowski_sum_inequality(&rows, p).unwrap();
        prop_assert!(r.holds, "{:?}", r);
    }
}

#[test]
fn grid_function_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let mesh = Mesh::new(-1.0, 1.0, 33).unwrap();
    for exterior in [
        Exterior::ZeroBeyond { radius: 1.5 },
        Exterior::PowerTail { amplitude: 0.5, exponent: 0.25 },
        Exterior::AnalyticClosure(AnalyticClosure::affine(2.0, -1.0)),
    ] {
        let u = GridFunction::from_fn(mesh, |x| x.cos(), exterior).unwrap();
        let stem = dir.path().join("u");
        u.write(&stem).unwrap();
        let back = GridFunction::read(&stem).unwrap();
        assert_eq!(back.values(), u.values());
        assert_eq!(back.mesh(), u.mesh());
        for x in [-7.0, -1.2, 1.3, 12.0] {
            assert_eq!(back.value_at(x), u.value_at(x));
        }
    }
}

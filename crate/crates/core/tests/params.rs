use fracp_core::params::*;
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i128>;

fn q(n: i128, d: i128) -> Q {
    Ratio::new(n, d)
}

fn f(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

/// Independent rational evaluation of the exponent formulas.
struct Exact {
    n: Q,
    p: Q,
    s: Q,
}

impl Exact {
    fn one() -> Q {
        q(1, 1)
    }
    fn p_conj(&self) -> Q {
        self.p / (self.p - Self::one())
    }
    fn sp_conj(&self) -> Q {
        self.s * self.p_conj()
    }
    fn s_o(&self) -> Q {
        (Self::one() + self.n / (self.p * (self.p - Self::one()))) / self.p_conj()
    }
    fn alpha_candidates(&self) -> (Q, Q) {
        let first = self.n / ((self.p - Self::one()) * (self.n + self.p * (self.sp_conj() - Self::one())));
        (first, Self::one() / self.p)
    }
    fn r_max(&self) -> Q {
        self.n / ((self.p - Self::one()) * (self.sp_conj() - Self::one()))
    }
    fn q_of(&self, r: Q) -> Q {
        r * self.n * (self.p - Self::one()) / (self.n - r * (self.p - Self::one()) * (self.sp_conj() - Self::one()))
    }
    fn gamma_of(&self, r: Q) -> Q {
        self.n / (r * (self.p - Self::one())) - self.sp_conj()
    }
    fn eps(&self, a: Q) -> Q {
        self.sp_conj() - Self::one() - (self.n / self.p) * (Self::one() / (a * (self.p - Self::one())) - Self::one())
    }
}

#[test]
fn one_dimensional_fixture() {
    let (params, base) = derive(1, 1.5, 0.5).unwrap();
    let ex = Exact { n: q(1, 1), p: q(3, 2), s: q(1, 2) };
    assert_eq!(ex.p_conj(), q(3, 1));
    assert_eq!(ex.sp_conj(), q(3, 2));
    assert_eq!(ex.s_o(), q(7, 9));
    let (a1, a2) = ex.alpha_candidates();
    assert_eq!(a1, q(8, 7));
    assert_eq!(a2, q(2, 3));
    assert!((base.p_conj - 3.0).abs() < 1e-15);
    assert!((base.sp_conj - 1.5).abs() < 1e-15);
    assert!((base.s_o - 7.0 / 9.0).abs() < 1e-15);
    assert!((base.alpha - f(a1)).abs() < 1e-15);
    assert_eq!(base.branch, AlphaBranch::SubThreshold);
    assert!((base.r_min - 12.0 / 7.0).abs() < 1e-14);
    assert!((base.r_max - f(ex.r_max())).abs() < 1e-14);
    assert!((params.sobolev_exponent() - 6.0).abs() < 1e-14);
}

#[test]
fn two_dimensional_fixture() {
    let (_, base) = derive(2, 2.0, 0.75).unwrap();
    let ex = Exact { n: q(2, 1), p: q(2, 1), s: q(3, 4) };
    assert_eq!(ex.s_o(), q(1, 1));
    let (a1, _) = ex.alpha_candidates();
    assert_eq!(a1, q(2, 3));
    assert!((base.p_conj - 2.0).abs() < 1e-15);
    assert!((base.sp_conj - 1.5).abs() < 1e-15);
    assert!((base.s_o - 1.0).abs() < 1e-15);
    assert!((base.alpha - 2.0 / 3.0).abs() < 1e-15);
    assert_eq!(base.branch, AlphaBranch::SubThreshold);
}

#[test]
fn super_threshold_branch_reported() {
    let params = ProblemParams::new(1, 3.0, 0.95).unwrap();
    assert!(params.s > params.s_o());
    assert_eq!(params.alpha_branch(), AlphaBranch::SuperThreshold);
    assert_eq!(params.alpha(), 1.0 / 3.0);
}

#[test]
fn low_order_rejected() {
    match derive(1, 2.0, 0.4) {
        Err(ParamsError::InvalidRegime { sp_conj }) => assert!((sp_conj - 0.8).abs() < 1e-15),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn sharp_exponent_fixtures() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let ex = Exact { n: q(1, 1), p: q(3, 2), s: q(1, 2) };
    let d = sharp_exponents(&params, 2.0).unwrap();
    assert_eq!(ex.q_of(q(2, 1)), q(2, 1));
    assert_eq!(ex.gamma_of(q(2, 1)), q(-1, 2));
    assert!((d.q - 2.0).abs() < 1e-14);
    assert!((d.mu - 1.0).abs() < 1e-14);
    assert!((d.gamma_example + 0.5).abs() < 1e-14);

    let params = ProblemParams::new(2, 2.0, 0.75).unwrap();
    let ex = Exact { n: q(2, 1), p: q(2, 1), s: q(3, 4) };
    let d = sharp_exponents(&params, 1.5).unwrap();
    assert_eq!(ex.q_of(q(3, 2)), q(12, 5));
    assert_eq!(ex.gamma_of(q(3, 2)), q(-1, 6));
    assert!((d.q - 2.4).abs() < 1e-14);
    assert!((d.mu - 0.625).abs() < 1e-14);
    assert!((d.gamma_example + 1.0 / 6.0).abs() < 1e-14);
}

#[test]
fn q_grows_without_bound_towards_r_max() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let mut prev = 0.0;
    for k in 1..9 {
        let r = 4.0 - 10f64.powi(-k);
        let d = sharp_exponents(&params, r).unwrap();
        assert!(d.q > prev);
        prev = d.q;
    }
    assert!(prev > 1e7);
    assert!(matches!(sharp_exponents(&params, 4.0 - 1e-10), Err(ParamsError::Pole { .. })));
    assert!(matches!(sharp_exponents(&params, 4.0), Err(ParamsError::Pole { .. })));
    assert!(matches!(sharp_exponents(&params, 5.0), Err(ParamsError::OutOfRange { .. })));
    assert!(matches!(sharp_exponents(&params, 1.5), Err(ParamsError::OutOfRange { .. })));
    assert!(matches!(sharp_exponents(&params, params.r_min()), Err(ParamsError::OutOfRange { .. })));
}

#[test]
fn budget_fixture_two_dimensional() {
    let params = ProblemParams::new(2, 2.0, 0.75).unwrap();
    let ex = Exact { n: q(2, 1), p: q(2, 1), s: q(3, 4) };
    assert_eq!(ex.eps(q(1, 1)), q(1, 2));
    let b = budget(&params, 1.0, None).unwrap();
    assert!((b.epsilon - 0.5).abs() < 1e-15);
    assert!((b.theta - 3.5).abs() < 1e-15);
    assert!((b.eps_bar_const - 0.5).abs() < 1e-15);
    // β = (θ−sp)/(θ−sp+ε̄p) = 2/3 and γ_o = ε̄(θ−p)/(θ−sp+ε̄p) = 1/4.
    let (theta, sp, eb, p) = (q(7, 2), q(3, 2), q(1, 2), q(2, 1));
    assert_eq!((theta - sp) / (theta - sp + eb * p), q(2, 3));
    assert_eq!(eb * (theta - p) / (theta - sp + eb * p), q(1, 4));
    assert!((b.beta() - 2.0 / 3.0).abs() < 1e-15);
    assert!((b.gamma_o() - 0.25).abs() < 1e-15);
    assert!(b.usable);
    let h_o = (1.0f64 / 16.0).powf(1.5).min((1.0f64 / 7.0).powf(3.0));
    assert!(((b.h_o() - h_o) / h_o).abs() < 1e-14);
}

#[test]
fn budget_fixture_one_dimensional() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let ex = Exact { n: q(1, 1), p: q(3, 2), s: q(1, 2) };
    assert_eq!(ex.eps(q(6, 5)), q(1, 18));
    let b = budget(&params, 1.2, None).unwrap();
    assert!((b.epsilon - 1.0 / 18.0).abs() < 1e-15);
    assert!((b.theta - (1.5 + 0.375)).abs() < 1e-15);
    assert!((b.eps_bar_const - 0.5 / 18.0).abs() < 1e-15);
}

#[test]
fn budget_rejects_auxiliary_out_of_range() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    assert!(matches!(budget(&params, 1.0, None), Err(ParamsError::AuxiliaryOutOfRange { .. })));
    assert!(matches!(budget(&params, 2.5, None), Err(ParamsError::AuxiliaryOutOfRange { .. })));
    assert!(matches!(budget(&params, 1.5, Some(1.5)), Err(ParamsError::InvalidChi { .. })));
}

#[test]
fn variable_coefficient_budget() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let b = budget(&params, 1.2, Some(0.5)).unwrap();
    let eps: f64 = 1.0 / 18.0;
    let expected = 0.25f64.min(1.0) * eps.min(0.5 / 0.5);
    assert!((b.eps_bar_var.unwrap() - expected).abs() < 1e-15);
    assert!(b.variable.as_ref().unwrap().gamma_o > 0.0);
}

#[test]
fn window_checks() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let sharp = sharp_exponents(&params, 2.0).unwrap();
    let (lo, hi) = a_tilde_window(&params, &sharp).unwrap();
    assert!((lo - 8.0 / 7.0).abs() < 1e-15);
    assert!((hi - 4.0 / 3.0).abs() < 1e-15);
    assert!(budget_for_r(&params, &sharp, 1.2, None).is_ok());
    assert!(matches!(budget_for_r(&params, &sharp, 1.5, None), Err(ParamsError::OutsideWindow { .. })));
    // At r = r_min the condition ãp < r leaves nothing above α.
    let r = params.r_min();
    let q_min = params.q_of_r(r);
    let edge = DerivedExponents { r, q: q_min, mu: r / q_min, ..sharp };
    assert!(matches!(a_tilde_window(&params, &edge), Err(ParamsError::EmptyWindow { .. })));
}

#[test]
fn fw_identity_fixtures() {
    let params = ProblemParams::new(2, 2.0, 0.75).unwrap();
    let c = fw_exponent_identity(&params, 1.0);
    assert!(c.holds);
    assert!((c.lhs - 0.75).abs() < 1e-15 && (c.rhs - 0.75).abs() < 1e-15);
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    assert!(fw_exponent_identity(&params, 1.2).holds);
    let ex = Exact { n: q(1, 1), p: q(3, 2), s: q(1, 2) };
    let a = q(6, 5);
    let lhs = ex.n - ex.n / ex.p + ex.s - ex.n / (a * ex.p);
    let rhs = (Exact::one() - ex.s + ex.eps(a)) * (ex.p - Exact::one());
    assert_eq!(lhs, rhs);
}

#[test]
fn interpolation_fixture_one_dimensional() {
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    let sharp = sharp_exponents(&params, 2.0).unwrap();
    let ie = interpolation_exponents(&params, &sharp, 1.2).unwrap();
    // Rational recomputation: nμp/(n−εp) with μ=1, ε=1/18.
    let inner = q(1, 1) * q(3, 2) / (q(1, 1) - q(1, 18) * q(3, 2));
    assert_eq!(inner, q(18, 11));
    assert!((ie.inner_exponent - 18.0 / 11.0).abs() < 1e-14);
    assert!((ie.tail_power - 1.0).abs() < 1e-14);
    assert!((1.0 + ie.tail_power - 2.0).abs() < 1e-14);
    assert!((ie.theta_holder - 0.45).abs() < 1e-15);
    assert!(ie.all_hold());
}

#[test]
fn interpolation_fixture_two_dimensional() {
    let params = ProblemParams::new(2, 2.0, 0.75).unwrap();
    let sharp = sharp_exponents(&params, 1.5).unwrap();
    let a = default_a_tilde(&params, &sharp).unwrap();
    let ie = interpolation_exponents(&params, &sharp, a).unwrap();
    assert!((sharp.mu + ie.tail_power - 1.0).abs() < 1e-12);
    assert!(ie.all_hold());
    // μ + μq(sp′−1)/n with μ = 5/8, q = 12/5.
    assert_eq!(q(5, 8) + q(5, 8) * q(12, 5) * q(1, 2) / q(2, 1), q(1, 1));
}

#[test]
fn comparison_radius_exponent_values() {
    let params = ProblemParams::new(1, 2.0, 0.75).unwrap();
    assert!((params.comparison_radius_exponent(0.5) - 2.0).abs() < 1e-15);
    let params = ProblemParams::new(1, 1.5, 0.5).unwrap();
    // (0.5/0.5)(1 + 0.5·3/0.5) = 4.
    assert!((params.comparison_radius_exponent(0.5) - 4.0).abs() < 1e-14);
}

fn admissible() -> impl Strategy<Value = (usize, f64, f64, f64)> {
    (1usize..=3, 1.05f64..3.95, 0.0f64..1.0, 0.02f64..0.98).prop_filter_map("needs s p' > 1", |(n, p, t, u)| {
        let s_lo = (p - 1.0) / p;
        let s = s_lo + (1.0 - s_lo) * (0.02 + 0.96 * t);
        let params = ProblemParams::new(n, p, s).ok()?;
        let (lo, hi) = (params.r_min(), params.r_max());
        Some((n, p, s, lo + (hi - lo) * u))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn sharp_identities(tuple in admissible()) {
        let (n, p, s, r) = tuple;
        let params = ProblemParams::new(n, p, s).unwrap();
        let d = sharp_exponents(&params, r).unwrap();
        prop_assert!(d.q > p);
        prop_assert!(((d.q - params.dim() / (d.gamma_example + 1.0)) / d.q).abs() < 1e-12);
        prop_assert!(((d.mu * d.q - r) / r).abs() < 1e-12);
        prop_assert!(params.alpha() >= 1.0 / p && params.alpha() < 1.0 / (p - 1.0));
        prop_assert!(params.r_min() < params.r_max());
    }

    #[test]
    fn budget_sequences(tuple in admissible(), w in 0.01f64..0.99) {
        let (n, p, s, _) = tuple;
        let params = ProblemParams::new(n, p, s).unwrap();
        let a = params.alpha() + w * (1.0 / (p - 1.0) - params.alpha());
        let b = budget(&params, a, None).unwrap();
        prop_assert!(b.epsilon >= 0.0 && b.epsilon <= params.sp_conj() - 1.0 + 1e-12);
        prop_assert!(b.theta > p);
        let seq = &b.constant.sigma_seq;
        for k in 1..seq.len() {
            prop_assert!(seq[k] > seq[k - 1] && seq[k] < 1.0);
        }
        prop_assert!(b.gamma_o() > 0.0);
        let lim = b.constant.theta_limit();
        let th = &b.constant.theta_seq;
        let gaps: Vec<f64> = th.iter().map(|t| (t - lim).abs()).collect();
        for k in 1..gaps.len() {
            prop_assert!(gaps[k] <= gaps[k - 1] + 1e-15);
        }
        prop_assert!(fw_exponent_identity(&params, a).holds);
        if a < params.dim() / (p * (p - 1.0) * (params.sp_conj() - 1.0)) {
            prop_assert!(b.epsilon < params.dim() / p);
        }
    }

    #[test]
    fn epsilon_increasing_in_auxiliary(tuple in admissible()) {
        let (n, p, s, _) = tuple;
        let params = ProblemParams::new(n, p, s).unwrap();
        let lo = params.alpha();
        let hi = 1.0 / (p - 1.0);
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=20 {
            let a = lo + (hi - lo) * k as f64 / 20.0;
            let e = params.epsilon(a);
            prop_assert!(e > prev);
            prev = e;
        }
    }

    #[test]
    fn interpolation_bookkeeping(tuple in admissible(), w in 0.05f64..0.95) {
        let (n, p, s, r) = tuple;
        let params = ProblemParams::new(n, p, s).unwrap();
        let sharp = sharp_exponents(&params, r).unwrap();
        if let Ok((lo, hi)) = a_tilde_window(&params, &sharp) {
            let a = lo + w * (hi - lo);
            let ie = interpolation_exponents(&params, &sharp, a).unwrap();
            prop_assert!(ie.all_hold(), "{ie:?}");
        }
    }
}

#[test]
fn classical_limit_as_s_tends_to_one() {
    for &(n, p, r) in &[(3usize, 2.0, 2.0), (2, 1.5, 1.5), (3, 3.0, 2.5)] {
        let classical = r * n as f64 * (p - 1.0) / (n as f64 - r);
        let mut errs = Vec::new();
        for k in 2..7 {
            let s = 1.0 - 10f64.powi(-k);
            let params = ProblemParams::new(n, p, s).unwrap();
            errs.push((params.q_of_r(r) - classical).abs());
        }
        for w in errs.windows(2) {
            assert!(w[1] < w[0]);
        }
        assert!(errs.last().unwrap() / classical < 1e-4);
    }
}

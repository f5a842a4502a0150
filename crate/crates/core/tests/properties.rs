use std::f64::consts::PI;

use powmean::cauchy::{
    asymptotic_variance_cos, asymptotic_variance_quadrature, mle_fixed_point, sample_cauchy,
};
use powmean::complex::principal_pow;
use powmean::estimators::{
    geometric_mean, quasi_arithmetic_mean, sums_of_products, truncated_power_mean,
    truncation_residual_ratio,
};
use powmean::mixture::{population_moments, solve_mixture, RootBranch};
use powmean::montecarlo::trial_rng;
use powmean::{Complex, ComplexParam, Generator, MixtureParams, MleConfig, Sample};
use proptest::prelude::*;
use rand::Rng;

const I: Complex = Complex::new(0.0, 1.0);
const ZERO: Complex = Complex::new(0.0, 0.0);

/// Powers away from the ill-conditioned band `0 < |p| < 0.01`.
fn power() -> impl Strategy<Value = f64> {
    prop_oneof![
        Just(0.0),
        -1.0..-0.01f64,
        0.01..1.0f64,
        Just(-1.0),
        Just(1.0)
    ]
}

fn shift() -> impl Strategy<Value = Complex> {
    (-2.0..2.0f64, prop_oneof![Just(0.0), 0.0..2.0f64]).prop_map(|(re, im)| Complex::new(re, im))
}

fn sample(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-50.0..50.0f64, 1..max_len)
}

fn qam(p: f64, alpha: Complex, xs: &[f64]) -> Complex {
    let g = Generator::new(p, alpha).unwrap();
    quasi_arithmetic_mean(&g, &Sample::new(xs.to_vec()).unwrap())
        .unwrap()
        .estimate
}

fn brute_force(m: usize, alpha: Complex, xs: &[f64]) -> Complex {
    let mut total = ZERO;
    let mut count = 0usize;
    for mask in 0u32..(1 << xs.len()) {
        if mask.count_ones() as usize != m {
            continue;
        }
        let prod = xs
            .iter()
            .enumerate()
            .filter(|(j, _)| mask & (1 << j) != 0)
            .fold(Complex::new(1.0, 0.0), |acc, (_, &x)| {
                acc * principal_pow(x + alpha, 1.0 / m as f64).unwrap()
            });
        total += prod;
        count += 1;
    }
    total / count as f64 - alpha
}

fn scale_of(xs: &[f64], alpha: Complex) -> f64 {
    xs.iter()
        .fold(alpha.norm().max(1.0), |acc, x| acc.max(x.abs()))
}

proptest! {
    #[test]
    fn idempotence(p in power(), alpha in shift(), x in -50.0..50.0f64, n in 1usize..20) {
        prop_assume!((x + alpha).norm() > 1e-6);
        let m = qam(p, alpha, &vec![x; n]);
        prop_assert!((m - x).norm() <= 1e-10 * x.abs().max(1.0), "{m} vs {x}");
    }

    #[test]
    fn upper_half_plane_closure(p in power(), alpha in shift(), xs in sample(30)) {
        prop_assume!(xs.iter().all(|x| (x + alpha).norm() > 1e-6));
        let m = qam(p, alpha, &xs);
        prop_assert!(m.im >= -1e-9 * scale_of(&xs, alpha), "{m}");
    }

    #[test]
    fn scale_equivariance(p in power(), xs in sample(30), a in 0.1..10.0f64) {
        prop_assume!(xs.iter().all(|x| x.abs() > 1e-6));
        let base = qam(p, ZERO, &xs);
        let scaled: Vec<f64> = xs.iter().map(|x| a * x).collect();
        let m = qam(p, ZERO, &scaled);
        prop_assert!((m - a * base).norm() <= 1e-10 * (a * base).norm().max(1e-300), "{m} vs {}", a * base);
    }

    #[test]
    fn shift_covariance(p in power(), shift_by in -2.0..2.0f64, xs in sample(30)) {
        prop_assume!(xs.iter().all(|x| (x + shift_by).abs() > 1e-6));
        let alpha = Complex::new(shift_by, 0.0);
        let direct = qam(p, alpha, &xs);
        let moved: Vec<f64> = xs.iter().map(|x| x + shift_by).collect();
        let via_zero = qam(p, ZERO, &moved) - alpha;
        prop_assert!((direct - via_zero).norm() <= 1e-10 * scale_of(&xs, alpha), "{direct} vs {via_zero}");
    }

    #[test]
    fn geometric_is_log_generator(alpha in shift(), xs in sample(30)) {
        prop_assume!(xs.iter().all(|x| (x + alpha).norm() > 1e-6));
        let g = geometric_mean(alpha, &Sample::new(xs.clone()).unwrap()).unwrap().estimate;
        let m = qam(0.0, alpha, &xs);
        prop_assert!((g - m).norm() <= 1e-10 * m.norm().max(1.0));
    }

    #[test]
    fn sums_of_products_match_subsets(
        xs in prop::collection::vec(-20.0..20.0f64, 1..=8),
        alpha in shift(),
        pick in 0usize..8,
    ) {
        prop_assume!(xs.iter().all(|x| (x + alpha).norm() > 1e-6));
        let m = 1 + pick % xs.len();
        let dp = sums_of_products(m, alpha, &Sample::new(xs.clone()).unwrap()).unwrap().estimate;
        let bf = brute_force(m, alpha, &xs);
        prop_assert!((dp - bf).norm() <= 1e-10 * bf.norm().max(1.0), "m={m}: {dp} vs {bf}");
    }

    #[test]
    fn full_order_product_is_geometric(xs in prop::collection::vec(-20.0..20.0f64, 1..=12), alpha in shift()) {
        prop_assume!(xs.iter().all(|x| (x + alpha).norm() > 1e-6));
        let s = Sample::new(xs.clone()).unwrap();
        let r = sums_of_products(xs.len(), alpha, &s).unwrap().estimate;
        let g = geometric_mean(alpha, &s).unwrap().estimate;
        prop_assert!((r - g).norm() <= 1e-12 * g.norm().max(1.0) * xs.len() as f64, "{r} vs {g}");
    }
}

fn fixed_samples() -> Vec<Vec<f64>> {
    (0..5)
        .map(|k| {
            let mut rng = trial_rng(77, k);
            sample_cauchy(ComplexParam::new(1.0, 2.0).unwrap(), 25, &mut rng)
                .unwrap()
                .into_values()
        })
        .collect()
}

#[test]
fn negative_power_tends_to_geometric() {
    for xs in fixed_samples() {
        for alpha in [ZERO, I, Complex::new(0.5, 0.25)] {
            let g = geometric_mean(alpha, &Sample::new(xs.clone()).unwrap())
                .unwrap()
                .estimate;
            let gaps: Vec<f64> = [-1e-2, -1e-3, -1e-4]
                .iter()
                .map(|&p| (qam(p, alpha, &xs) - g).norm())
                .collect();
            assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
            assert!(gaps[2] < 1e-2, "{gaps:?}");
        }
    }
}

#[test]
fn harmonic_limit_from_above() {
    for xs in fixed_samples() {
        for alpha in [I, Complex::new(-1.0, 0.5)] {
            let h = qam(-1.0, alpha, &xs);
            let near = qam(-1.0 + 1e-4, alpha, &xs);
            assert!((near - h).norm() < 1e-3, "{near} vs {h}");
        }
    }
}

#[test]
fn truncated_mean_tends_to_geometric() {
    for xs in fixed_samples() {
        for alpha in [ZERO, I] {
            let s = Sample::new(xs.clone()).unwrap();
            let t = truncated_power_mean(1e-4, alpha, &s).unwrap().estimate;
            let g = geometric_mean(alpha, &s).unwrap().estimate;
            assert!((t - g).norm() < 1e-3, "{t} vs {g}");
        }
    }
}

fn unit_circle_point(theta: f64) -> Complex {
    Complex::from_polar(1.0, theta)
}

#[test]
fn residual_ratio_bounded_by_grid_maximum() {
    let mut rng = trial_rng(5, 0);
    for p in [0.1, 0.25, 0.5, 0.75, 0.9] {
        let mut bound: f64 = 0.0;
        for i in 0..=60 {
            let x = unit_circle_point(PI * i as f64 / 60.0);
            for j in 0..=60 {
                let phi = PI * j as f64 / 60.0;
                for k in 0..=120 {
                    let y = Complex::from_polar(10f64.powf(-6.0 + k as f64 * 0.1), phi);
                    bound = bound.max(truncation_residual_ratio(p, x, y));
                }
            }
        }
        assert!(bound.is_finite() && bound > 0.0);
        for _ in 0..20_000 {
            let sx = 10f64.powf(rng.gen_range(-3.0..3.0));
            let x = Complex::from_polar(sx, rng.gen_range(0.0..=PI));
            let y = Complex::from_polar(
                sx * 10f64.powf(rng.gen_range(-6.0..6.0)),
                rng.gen_range(0.0..=PI),
            );
            let r = truncation_residual_ratio(p, x, y);
            assert!(
                r <= 1.05 * bound,
                "p={p}: {r} > 1.05 * {bound} at x={x}, y={y}"
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn variance_respects_information_bound(
        p in -1.0..0.0f64,
        a_re in -2.0..2.0f64,
        a_im in 0.0..2.0f64,
        real_shift in any::<bool>(),
        mu in -3.0..3.0f64,
        sigma in 0.2..4.0f64,
    ) {
        let alpha = Complex::new(a_re, if real_shift { 0.0 } else { a_im.max(1e-3) });
        prop_assume!(!(real_shift && p <= -0.5));
        let gamma = ComplexParam::new(mu, sigma).unwrap();
        let v = asymptotic_variance_quadrature(p, alpha, gamma).unwrap();
        prop_assert!(v >= 4.0 * sigma * sigma * (1.0 - 1e-9), "V = {v}, 4 sigma^2 = {}", 4.0 * sigma * sigma);
    }

    #[test]
    fn cosine_form_matches_quadrature(p in -0.49..-0.01f64, a in -3.0..3.0f64, mu in -3.0..3.0f64, sigma in 0.2..4.0f64) {
        let gamma = ComplexParam::new(mu, sigma).unwrap();
        let c = asymptotic_variance_cos(p, a, gamma).unwrap();
        let q = asymptotic_variance_quadrature(p, Complex::new(a, 0.0), gamma).unwrap();
        prop_assert!((c - q).abs() <= 1e-6 * c, "{c} vs {q}");
    }
}

#[test]
fn cosine_form_decreasing() {
    let gamma = ComplexParam::new(0.0, 1.0).unwrap();
    let values: Vec<f64> = (1..=100)
        .map(|k| asymptotic_variance_cos(-0.5 + 0.5 * k as f64 / 101.0, 0.0, gamma).unwrap())
        .collect();
    assert!(values.windows(2).all(|w| w[1] < w[0]), "{values:?}");
}

#[test]
fn mle_steps_shrink_after_burn_in() {
    const BURN_IN: usize = 3;
    for (k, n) in [5usize, 20, 100].into_iter().cycle().take(100).enumerate() {
        let mut rng = trial_rng(314, k as u64);
        let s = sample_cauchy(ComplexParam::new(0.0, 1.0).unwrap(), n, &mut rng).unwrap();
        let r = mle_fixed_point(&s, MleConfig::default()).unwrap();
        assert!(r.converged, "sample {k}");
        // below ~1e-13 the steps are rounding noise
        let steps: Vec<f64> = r
            .steps
            .iter()
            .skip(BURN_IN)
            .copied()
            .take_while(|&d| d > 1e-13)
            .collect();
        assert!(
            steps.windows(2).all(|w| w[1] <= w[0]),
            "sample {k} (n={n}): {:?}",
            r.steps
        );
    }
}

fn mixture_strategy(on_ratio_branch: bool) -> impl Strategy<Value = MixtureParams> {
    (
        0.05..0.95f64,
        -10.0..10.0f64,
        0.2..10.0f64,
        -10.0..10.0f64,
        0.2..10.0f64,
        0.2..0.8f64,
    )
        .prop_filter_map("components too close", move |(t, m1, s1, m2, s2, u)| {
            let alpha = 0.1;
            let g1 = ComplexParam::new(m1, s1).unwrap();
            let g2 = if on_ratio_branch {
                let a1 = principal_pow(g1.to_complex(), alpha).unwrap();
                let a2 = Complex::new(a1.re, a1.im * u);
                ComplexParam::from_complex(principal_pow(a2, 1.0 / alpha).unwrap()).ok()?
            } else {
                ComplexParam::new(m2, s2).unwrap()
            };
            let params = MixtureParams::new(t, g1, g2).ok()?;
            let (a1, a2) = params.roots(alpha);
            ((a1 - a2).norm() >= 0.05 * a1.norm().max(a2.norm())).then_some(params)
        })
}

fn check_round_trip(
    params: &MixtureParams,
    branch: RootBranch,
    tol: f64,
) -> Result<(), TestCaseError> {
    let alpha = 0.1;
    let est = solve_mixture(&population_moments(params, alpha).unwrap()).unwrap();
    prop_assert_eq!(est.branch, branch);
    let (a1, a2) = params.roots(alpha);
    let straight = (est.a1 - a1).norm().max((est.a2 - a2).norm());
    let crossed = (est.a1 - a2).norm().max((est.a2 - a1).norm());
    prop_assert!(
        straight.min(crossed) < tol,
        "roots off by {}",
        straight.min(crossed)
    );
    let t = params.t();
    let t_err = if straight <= crossed {
        (est.t_hat - t).abs()
    } else {
        (est.t_hat - (1.0 - t)).abs()
    };
    prop_assert!(t_err < 1e-9, "t off by {t_err}");
    Ok(())
}

proptest! {
    #[test]
    fn mixture_round_trip_direct(params in mixture_strategy(false)) {
        let (a1, a2) = params.roots(0.1);
        prop_assume!((a1 - a2).re.abs() > 1e-3);
        check_round_trip(&params, RootBranch::Direct, 1e-9)?;
    }

    #[test]
    fn mixture_round_trip_ratio(params in mixture_strategy(true)) {
        check_round_trip(&params, RootBranch::Ratio, 1e-8)?;
    }
}

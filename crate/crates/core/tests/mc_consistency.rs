//! Monte Carlo cross-checks between the simulator, the transform and the pricer.

mod support;

use hhvix::mc::{CirScheme, Estimate, SimConfig, Simulator};
use hhvix::params::ModelParams;
use hhvix::pricer::{price_call, PricingContext};
use hhvix::vix::forward_variance;
use hhvix::{CharFn, Complex64, PricingRequest, QuadratureConfig, RiccatiSystem, SolveOptions};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use support::{identity_shift, reference_jump, reference_params};

fn simulator(p: ModelParams, n: usize, seed: u64) -> Simulator {
    Simulator::new(p, identity_shift(&p), reference_jump(), SimConfig::new(n, seed)).unwrap()
}

fn request(p: &ModelParams, strike: f64, t_mat: f64) -> PricingRequest {
    PricingRequest { t: 0.0, t_mat, strike, v_t: p.v0, lambda_t: p.lambda0, quadrature: QuadratureConfig::default() }
}

#[test]
fn transform_satisfies_tower_property() {
    let p = reference_params();
    let s = 0.5 * p.horizon;
    let shift = identity_shift(&p);
    let sys = RiccatiSystem::new(&p, &shift, reference_jump()).unwrap();
    let cf = CharFn::new(sys, shift, SolveOptions::sparse(&[0.0, s]));
    let (phi, psi) = (Complex64::new(0.5, -4.0), Complex64::new(0.1, 0.7));
    let sol = cf.solution(phi, psi).unwrap();
    let target = sol.evaluate(0.0, p.v0, p.lambda0).unwrap();

    let sim = simulator(p, 100_000, 21);
    let vals = sim
        .map_paths(s, &[s], |path| sol.evaluate(s, path.v_grid[0], path.lambda_grid[0]).unwrap())
        .unwrap();
    let re = Estimate::from_samples(&vals.iter().map(|z| z.re).collect::<Vec<_>>());
    let im = Estimate::from_samples(&vals.iter().map(|z| z.im).collect::<Vec<_>>());
    assert!(re.z_score(target.re) < 3.0 && im.z_score(target.im) < 3.0, "{re:?} {im:?} vs {target}");
}

#[test]
fn forward_variance_is_a_martingale_in_s() {
    let p = reference_params();
    let shift = identity_shift(&p);
    let m = reference_jump().mean();
    let (s, t) = (0.25, 0.5);
    let target = forward_variance(&shift, &p, m, 0.0, t, p.v0, p.lambda0).unwrap();
    let sim = simulator(p, 200_000, 22);
    let vals = sim
        .map_paths(s, &[s], |path| forward_variance(&shift, &p, m, s, t, path.v_grid[0], path.lambda_grid[0]).unwrap())
        .unwrap();
    let est = Estimate::from_samples(&vals);
    assert!(est.z_score(target) < 3.0, "{est:?} vs {target}");
}

#[test]
fn exact_and_euler_schemes_agree() {
    let p = reference_params();
    let exact = simulator(p, 40_000, 23);
    let mut euler = simulator(p, 40_000, 24);
    euler.config.cir_scheme = CirScheme::Euler;
    euler.config.euler_steps_per_year = 2000;
    let times = [0.25, 0.5];
    let (a, b) = (exact.forward_variance(&times).unwrap(), euler.forward_variance(&times).unwrap());
    for (x, y) in a.iter().zip(&b) {
        let se = (x.se * x.se + y.se * y.se).sqrt();
        assert!((x.mean - y.mean).abs() < 3.0 * se, "{x:?} vs {y:?}");
    }
    let phi = Complex64::new(1.0, -5.0);
    let (x, y) = (exact.char_fn(phi, Complex64::new(0.0, 0.0), 0.5).unwrap(), euler.char_fn(phi, Complex64::new(0.0, 0.0), 0.5).unwrap());
    for (u, w) in [(x.re, y.re), (x.im, y.im)] {
        assert!((u.mean - w.mean).abs() < 3.0 * (u.se * u.se + w.se * w.se).sqrt(), "{u:?} vs {w:?}");
    }
}

#[test]
fn mean_intensity_follows_linear_dynamics() {
    let p = reference_params();
    let gap = p.beta - p.alpha;
    let stationary = p.beta * p.lambda0 / gap;
    let times = [0.25, 1.0];
    let est = simulator(p, 200_000, 25).mean_intensity(&times).unwrap();
    for (t, e) in times.iter().zip(&est) {
        let exact = (p.lambda0 - stationary) * (-gap * t).exp() + stationary;
        assert!(e.z_score(exact) < 3.0, "t = {t}: {e:?} vs {exact}");
    }
}

/// With `eta = 0` the variance is plain CIR, so the price can be checked
/// against a standalone full-truncation Euler simulation.
#[test]
fn pure_heston_price_matches_standalone_simulation() {
    let p = ModelParams { eta: 0.0, ..reference_params() };
    let ctx = PricingContext::new(p, reference_jump(), identity_shift(&p)).unwrap();
    let (strike, t_mat) = (20.0, 0.5);
    let fourier = price_call(&request(&p, strike, t_mat), &ctx).unwrap().price;

    let kd = p.kappa * p.delta;
    let a = (1.0 - (-kd).exp()) / kd;
    let c = p.vbar * (1.0 - a);
    let steps = 1000;
    let h = t_mat / steps as f64;
    let disc = (-p.r * t_mat).exp();
    let payoffs: Vec<f64> = (0..60_000u64)
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + i);
            let mut v = p.v0;
            for _ in 0..steps {
                let z: f64 = StandardNormal.sample(&mut rng);
                let vp = v.max(0.0);
                v += p.kappa * (p.vbar - vp) * h + p.sigma * (vp * h).sqrt() * z;
            }
            disc * (100.0 * (a * v.max(0.0) + c).sqrt() - strike).max(0.0)
        })
        .collect();
    let est = Estimate::from_samples(&payoffs);
    assert!(est.z_score(fourier) < 3.0, "{est:?} vs {fourier}");
}

#[test]
fn zero_strike_call_is_discounted_mean_vix() {
    let p = reference_params();
    let ctx = PricingContext::new(p, reference_jump(), identity_shift(&p)).unwrap();
    let sim = simulator(p, 200_000, 26);
    let mean_vix = sim.vix_call(&ctx.coeffs, 0.0, 0.5).unwrap();
    let at_money = price_call(&request(&p, 20.0, 0.5), &ctx).unwrap().price;
    assert!(mean_vix.mean > at_money);
    let tiny = price_call(&request(&p, 1e-6, 0.5), &ctx).unwrap().price;
    assert!(mean_vix.z_score(tiny) < 3.0, "{mean_vix:?} vs {tiny}");
}

//! Monte Carlo simulation of `(v, lambda)` under the shifted measure.
//!
//! Paths are independent: path `i` draws from a ChaCha stream selected by
//! `(seed, i)`, so estimates do not depend on the thread count. Per-path
//! values are collected in path order and reduced by pairwise summation.

pub mod hawkes;
pub mod variance;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::JumpLaw;
use crate::params::{MeasureShift, ModelParams};
use crate::pricer::quadrature::pairwise_sum;
use crate::vix::VixCoefficients;

pub use hawkes::{simulate_hawkes, HawkesPath};
pub use variance::{simulate_variance, Cir, CirScheme, VarianceModel, VariancePath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub n_paths: usize,
    pub seed: u64,
    #[serde(default)]
    pub cir_scheme: CirScheme,
    #[serde(default = "SimConfig::default_euler_steps")]
    pub euler_steps_per_year: usize,
}

impl SimConfig {
    fn default_euler_steps() -> usize {
        2000
    }

    pub fn new(n_paths: usize, seed: u64) -> Self {
        Self { n_paths, seed, cir_scheme: CirScheme::Exact, euler_steps_per_year: 2000 }
    }
}

/// One simulated realization on `[0, horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSample {
    pub events: Vec<f64>,
    pub jump_sizes: Vec<f64>,
    pub v_t: f64,
    pub lambda_t: f64,
    pub checkpoints: Vec<f64>,
    pub v_grid: Vec<f64>,
    pub lambda_grid: Vec<f64>,
    /// `int_0^T lambda_s ds`.
    pub integrated_intensity: f64,
}

impl PathSample {
    pub fn n_events(&self) -> usize {
        self.events.len()
    }

    /// `L_T`, the summed jump sizes.
    pub fn jump_total(&self) -> f64 {
        pairwise_sum(&self.jump_sizes)
    }
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub n: usize,
}

impl Estimate {
    /// Mean and standard error with the unbiased variance; `se = 0` for one sample.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = pairwise_sum(xs) / n as f64;
        let se = if n > 1 {
            let dev: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
            (pairwise_sum(&dev) / (n - 1) as f64 / n as f64).sqrt()
        } else {
            0.0
        };
        Self { mean, se, n }
    }

    /// `|value - mean| / se`; infinite when `se = 0` and the values differ.
    pub fn z_score(&self, value: f64) -> f64 {
        let d = (value - self.mean).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.se
        }
    }
}

/// Complex sample mean with per-component standard errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.re.mean, self.im.mean)
    }

    /// Whether `value` lies in the `k`-standard-error box.
    pub fn contains(&self, value: Complex64, k: f64) -> bool {
        self.re.z_score(value.re) <= k && self.im.z_score(value.im) <= k
    }
}

/// Simulator for one model under one measure shift.
#[derive(Debug, Clone, Copy)]
pub struct Simulator {
    pub params: ModelParams,
    pub shift: MeasureShift,
    pub jump: JumpLaw,
    pub config: SimConfig,
}

impl Simulator {
    pub fn new(params: ModelParams, shift: MeasureShift, jump: JumpLaw, config: SimConfig) -> Result<Self> {
        if config.n_paths == 0 {
            return Err(Error::InvalidInput("n_paths must be >= 1".into()));
        }
        if !(params.alpha > 0.0 && params.alpha < params.beta) {
            return Err(Error::InvalidInput("simulation needs 0 < alpha < beta".into()));
        }
        jump.validate()?;
        Ok(Self { params, shift, jump, config })
    }

    fn rng(&self, path: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        rng.set_stream(path as u64);
        rng
    }

    fn variance_model(&self) -> VarianceModel {
        VarianceModel {
            cir: Cir { kappa: self.shift.kappa_a, vbar: self.shift.vbar_a, sigma: self.params.sigma },
            eta: self.params.eta,
            jump: self.jump,
            scheme: self.config.cir_scheme,
            euler_steps_per_year: self.config.euler_steps_per_year,
        }
    }

    /// Path `index` on `[0, horizon]`, recording the state at sorted `checkpoints`.
    pub fn path(&self, index: usize, horizon: f64, checkpoints: &[f64]) -> Result<PathSample> {
        if checkpoints.iter().any(|&c| !(c >= 0.0 && c <= horizon)) || checkpoints.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidInput("checkpoints must be sorted within [0, horizon]".into()));
        }
        let p = &self.params;
        let mut rng = self.rng(index);
        let hawkes = simulate_hawkes(p.lambda0, p.alpha, p.beta, horizon, &mut rng);
        let mut marks = checkpoints.to_vec();
        marks.push(horizon);
        let var = simulate_variance(&self.variance_model(), p.v0, &hawkes.events, &marks, &mut rng)?;
        let v_t = *var.at_checkpoints.last().expect("horizon checkpoint");
        let mut v_grid = var.at_checkpoints;
        v_grid.pop();
        Ok(PathSample {
            lambda_grid: checkpoints.iter().map(|&c| hawkes.intensity_after(c)).collect(),
            lambda_t: hawkes.lambda_end(),
            integrated_intensity: hawkes.integrated_intensity(horizon),
            checkpoints: checkpoints.to_vec(),
            events: hawkes.events,
            jump_sizes: var.jump_sizes,
            v_t,
            v_grid,
        })
    }

    /// `f(path)` for every path, in path order.
    pub fn map_paths<T, F>(&self, horizon: f64, checkpoints: &[f64], f: F) -> Result<Vec<T>>
    where
        T: Send,
        F: Fn(&PathSample) -> T + Sync,
    {
        (0..self.config.n_paths)
            .into_par_iter()
            .map(|i| self.path(i, horizon, checkpoints).map(|s| f(&s)))
            .collect()
    }

    /// `E[exp(phi v_T + psi lambda_T)]` at `horizon`.
    pub fn char_fn(&self, phi: Complex64, psi: Complex64, horizon: f64) -> Result<ComplexEstimate> {
        let vals = self.map_paths(horizon, &[], |s| (phi * s.v_t + psi * s.lambda_t).exp())?;
        let re: Vec<f64> = vals.iter().map(|z| z.re).collect();
        let im: Vec<f64> = vals.iter().map(|z| z.im).collect();
        Ok(ComplexEstimate { re: Estimate::from_samples(&re), im: Estimate::from_samples(&im) })
    }

    /// `E[v_t]` at each of the sorted `times`.
    pub fn forward_variance(&self, times: &[f64]) -> Result<Vec<Estimate>> {
        let horizon = times.last().copied().unwrap_or(0.0);
        let grids = self.map_paths(horizon, times, |s| s.v_grid.clone())?;
        Ok((0..times.len())
            .map(|j| Estimate::from_samples(&grids.iter().map(|g| g[j]).collect::<Vec<_>>()))
            .collect())
    }

    /// `E[lambda_t]` at each of the sorted `times`.
    pub fn mean_intensity(&self, times: &[f64]) -> Result<Vec<Estimate>> {
        let horizon = times.last().copied().unwrap_or(0.0);
        let grids = self.map_paths(horizon, times, |s| s.lambda_grid.clone())?;
        Ok((0..times.len())
            .map(|j| Estimate::from_samples(&grids.iter().map(|g| g[j]).collect::<Vec<_>>()))
            .collect())
    }

    /// `(N_T - int lambda, L_T - E[J] int lambda)`, both martingales started at 0.
    pub fn compensators(&self, horizon: f64) -> Result<(Estimate, Estimate)> {
        let m = self.jump.mean();
        let vals = self.map_paths(horizon, &[], |s| {
            let comp = s.integrated_intensity;
            (s.n_events() as f64 - comp, s.jump_total() - m * comp)
        })?;
        let a: Vec<f64> = vals.iter().map(|v| v.0).collect();
        let b: Vec<f64> = vals.iter().map(|v| v.1).collect();
        Ok((Estimate::from_samples(&a), Estimate::from_samples(&b)))
    }

    /// Discounted `E[(100 sqrt(A v + B lambda + C) - K)^+]` at `t_mat`.
    pub fn vix_call(&self, coeffs: &VixCoefficients, strike: f64, t_mat: f64) -> Result<Estimate> {
        let disc = (-self.params.r * t_mat).exp();
        let vals = self.map_paths(t_mat, &[], |s| {
            let vix = 100.0 * coeffs.radicand(s.v_t, s.lambda_t).max(0.0).sqrt();
            disc * (vix - strike).max(0.0)
        })?;
        Ok(Estimate::from_samples(&vals))
    }
}

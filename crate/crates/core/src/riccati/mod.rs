//! Generalized Riccati system for the joint transform of `(v_T, lambda_T)`.
//!
//! In physical time `t` on `[0, T]`:
//!
//! ```text
//! G' = kappa_a G - sigma^2 G^2 / 2,                 G(T) = phi
//! H' = beta H - e^{alpha H} M_J(eta G) + 1,         H(T) = psi
//! F' = -kappa_a vbar_a G - beta lambda0 H,          F(T) = 0
//! ```
//!
//! `G` has a closed form. `H` is integrated backward in `s = T - t` with an
//! adaptive Dormand-Prince pair, and `F` is accumulated by Gauss-Legendre
//! quadrature over each accepted step using the step's dense output.

mod dopri;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::jumps::JumpLaw;
use crate::params::{compute_l_j, MeasureShift, ModelParams};

pub use dopri::DenseStep;

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
const GL5: [(f64, f64); 5] = [
    (0.0, 0.568_888_888_888_888_9),
    (-0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (0.538_469_310_105_683_1, 0.478_628_670_499_366_47),
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Slack added to the explosion threshold for `Re H`.
const GUARD_SLACK: f64 = 10.0;

/// Solver tolerances and output grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub atol: f64,
    pub rtol: f64,
    /// Uniform points on `[0, T]`, endpoints included. Zero keeps only the
    /// endpoints and `extra_times`.
    pub grid_points: usize,
    pub extra_times: Vec<f64>,
    pub max_steps: usize,
    /// Bound on the defect `|h' - f(s, h)| / (1 + |h|)` of the continuous
    /// solution for `H`, checked inside every step. Infinite disables it.
    pub defect_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            atol: 1e-10,
            rtol: 1e-10,
            grid_points: 512,
            extra_times: Vec::new(),
            max_steps: 200_000,
            defect_tol: 1e-9,
        }
    }
}

impl SolveOptions {
    /// Endpoints plus the given times only; what the pricer uses per node.
    pub fn sparse(times: &[f64]) -> Self {
        Self { grid_points: 0, extra_times: times.to_vec(), ..Self::default() }
    }
}

/// Which admissibility constraint on `(phi, psi)` is closest to binding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    RePhiPositive,
    RePhiUpper,
    RePsiUpper,
}

/// Outcome of [`RiccatiSystem::domain_check`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainVerdict {
    pub passed: bool,
    pub binding: Constraint,
    /// Distance to the binding constraint; negative or zero means violated.
    pub slack: f64,
    pub phi_upper: f64,
    pub psi_upper: f64,
    pub message: String,
}

/// `G`, `H`, `F` and their time derivatives on an increasing grid over `[0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct OdeSolution {
    pub phi: Complex64,
    pub psi: Complex64,
    pub horizon: f64,
    pub grid: Vec<f64>,
    pub g_vals: Vec<Complex64>,
    pub h_vals: Vec<Complex64>,
    pub f_vals: Vec<Complex64>,
    pub dg_vals: Vec<Complex64>,
    pub dh_vals: Vec<Complex64>,
    pub df_vals: Vec<Complex64>,
    pub tol_abs: f64,
    pub tol_rel: f64,
    /// Accepted integrator steps.
    pub steps: usize,
    system: RiccatiSystem,
    h_traj: HTrajectory,
    f_cum: Vec<Complex64>,
}

fn hermite(t0: f64, t1: f64, y0: Complex64, y1: Complex64, d0: Complex64, d1: Complex64, t: f64) -> Complex64 {
    let h = t1 - t0;
    let u = (t - t0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    y0 * h00 + d0 * (h10 * h) + y1 * h01 + d1 * (h11 * h)
}

impl OdeSolution {
    /// `(G, H, F)` at `t`; exact stored values on grid points, cubic Hermite
    /// interpolation between them.
    pub fn eval(&self, t: f64) -> Result<[Complex64; 3]> {
        let n = self.grid.len();
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfGrid { t, horizon: self.horizon });
        }
        let i = self.grid.partition_point(|&g| g < t);
        if i < n && self.grid[i] == t {
            return Ok([self.g_vals[i], self.h_vals[i], self.f_vals[i]]);
        }
        let (a, b) = (i - 1, i);
        let (t0, t1) = (self.grid[a], self.grid[b]);
        let interp = |y: &[Complex64], d: &[Complex64]| hermite(t0, t1, y[a], y[b], d[a], d[b], t);
        Ok([
            interp(&self.g_vals, &self.dg_vals),
            interp(&self.h_vals, &self.dh_vals),
            interp(&self.f_vals, &self.df_vals),
        ])
    }

    /// `(G, H, F)` at any `t` from the solver itself: closed-form `G`, the
    /// integrator's continuous extension for `H`, and `F` by quadrature of
    /// that extension. Unlike [`OdeSolution::eval`] this does not depend on the grid.
    pub fn dense(&self, t: f64) -> Result<[Complex64; 3]> {
        let sys = &self.system;
        let g = sys.solve_g(self.phi, t)?;
        let h = self.h_traj.at(t);
        let f = sys.f_at(self.phi, &self.h_traj, &self.f_cum, t)?;
        Ok([g, h, f])
    }

    /// Terminal index (`t = T`).
    pub fn last(&self) -> usize {
        self.grid.len() - 1
    }
}

/// `h(s)`, `h'(s)` and `h''(s)` at a step boundary, with `h(s) = H(T - s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Knot {
    s: f64,
    y: Complex64,
    d1: Complex64,
    d2: Complex64,
}

/// Quintic Hermite interpolant between two knots and its derivative at `s`.
fn quintic(a: &Knot, b: &Knot, s: f64) -> (Complex64, Complex64) {
    if s == b.s {
        return (b.y, b.d1);
    }
    let h = b.s - a.s;
    let u = (s - a.s) / h;
    let (u2, u3) = (u * u, u * u * u);
    let (u4, u5) = (u3 * u, u3 * u2);
    let h0 = 1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5;
    let h1 = u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5;
    let h2 = 0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5);
    let h3 = 0.5 * (u3 - 2.0 * u4 + u5);
    let h4 = -4.0 * u3 + 7.0 * u4 - 3.0 * u5;
    let h5 = 10.0 * u3 - 15.0 * u4 + 6.0 * u5;
    let value = a.y * h0 + a.d1 * (h * h1) + a.d2 * (h * h * h2) + b.d2 * (h * h * h3) + b.d1 * (h * h4) + b.y * h5;
    // d/du of the basis, divided by h for d/ds.
    let g0 = -30.0 * u2 + 60.0 * u3 - 30.0 * u4;
    let g1 = 1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4;
    let g2 = 0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4);
    let g3 = 0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4);
    let g4 = -12.0 * u2 + 28.0 * u3 - 15.0 * u4;
    let g5 = -g0;
    let slope = (a.y * g0 + b.y * g5) / h + a.d1 * g1 + b.d1 * g4 + (a.d2 * g2 + b.d2 * g3) * h;
    (value, slope)
}

/// Backward solution for `H` in `s = T - t`. Between accepted steps it is
/// the quintic Hermite interpolant of value, slope and curvature, which is
/// an order more accurate than the integrator's own continuous extension.
#[derive(Debug, Clone, PartialEq)]
pub struct HTrajectory {
    pub psi: Complex64,
    pub horizon: f64,
    steps: Vec<DenseStep>,
    knots: Vec<Knot>,
    atol: f64,
    rtol: f64,
}

impl HTrajectory {
    fn step_index(&self, s: f64) -> usize {
        self.steps
            .partition_point(|st| st.s1() < s)
            .min(self.steps.len().saturating_sub(1))
    }

    fn interp(&self, i: usize, s: f64) -> Complex64 {
        quintic(&self.knots[i], &self.knots[i + 1], s).0
    }

    /// `H(T - s)`.
    pub fn at_s(&self, s: f64) -> Complex64 {
        if self.steps.is_empty() || s <= 0.0 {
            return self.psi;
        }
        self.interp(self.step_index(s), s)
    }

    /// `H(t)`.
    pub fn at(&self, t: f64) -> Complex64 {
        self.at_s(self.horizon - t)
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }
}

/// The Riccati system for one model, measure shift and horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSystem {
    pub kappa_a: f64,
    pub vbar_a: f64,
    pub sigma: f64,
    pub eta: f64,
    pub lambda0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub horizon: f64,
    pub jump: JumpLaw,
    pub l_j: f64,
}

impl RiccatiSystem {
    /// Builds the system on `[0, p.T]`. `eta = 0` is accepted and switches the
    /// jump term off.
    pub fn new(p: &ModelParams, shift: &MeasureShift, jump: JumpLaw) -> Result<Self> {
        jump.validate()?;
        if !(p.eta >= 0.0) {
            return Err(Error::InvalidInput(format!("eta = {} must be >= 0", p.eta)));
        }
        Ok(Self {
            kappa_a: shift.kappa_a,
            vbar_a: shift.vbar_a,
            sigma: p.sigma,
            eta: p.eta,
            lambda0: p.lambda0,
            alpha: p.alpha,
            beta: p.beta,
            horizon: p.horizon,
            jump,
            l_j: compute_l_j(p, &jump)?,
        })
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    /// `min{2 kappa_a / (sigma^2 (2 e^{kappa_a T} - 1)), L_J}`.
    pub fn phi_upper(&self) -> f64 {
        let s2 = self.sigma * self.sigma;
        let g_bound = 2.0 * self.kappa_a / (s2 * (2.0 * (self.kappa_a * self.horizon).exp() - 1.0));
        g_bound.min(self.l_j)
    }

    /// `(beta - alpha) / (alpha beta)`.
    pub fn psi_upper(&self) -> f64 {
        (self.beta - self.alpha) / (self.alpha * self.beta)
    }

    pub fn domain_check(&self, phi: Complex64, psi: Complex64) -> DomainVerdict {
        let phi_upper = self.phi_upper();
        let psi_upper = self.psi_upper();
        let candidates = [
            (Constraint::RePhiPositive, phi.re),
            (Constraint::RePhiUpper, phi_upper - phi.re),
            (Constraint::RePsiUpper, psi_upper - psi.re),
        ];
        let (binding, slack) = candidates
            .iter()
            .copied()
            .fold((Constraint::RePhiPositive, f64::INFINITY), |acc, (c, s)| {
                // NaN slack must register as a failure.
                if s.is_nan() || s < acc.1 {
                    (c, if s.is_nan() { f64::NEG_INFINITY } else { s })
                } else {
                    acc
                }
            });
        let finite = phi.im.is_finite() && psi.im.is_finite();
        let passed = slack > 0.0 && finite;
        let message = if !finite {
            "imaginary parts must be finite".to_string()
        } else if passed {
            String::new()
        } else {
            match binding {
                Constraint::RePhiPositive => "Re(phi) must be strictly positive".to_string(),
                Constraint::RePhiUpper => {
                    format!("Re(phi) = {} must be below {phi_upper}", phi.re)
                }
                Constraint::RePsiUpper => {
                    format!("Re(psi) = {} must be below {psi_upper}", psi.re)
                }
            }
        };
        DomainVerdict { passed, binding, slack, phi_upper, psi_upper, message }
    }

    fn require_domain(&self, phi: Complex64, psi: Complex64) -> Result<()> {
        let v = self.domain_check(phi, psi);
        if v.passed {
            Ok(())
        } else {
            Err(Error::DomainViolation(v.message))
        }
    }

    /// Closed-form `G(t; phi)` at `s = T - t`.
    fn g_at_s(&self, phi: Complex64, s: f64) -> Result<Complex64> {
        if s == 0.0 {
            return Ok(phi);
        }
        let k = self.kappa_a;
        let s2 = self.sigma * self.sigma;
        // Numerator and denominator scaled by e^{-kappa_a s}.
        let decay = (-k * s).exp();
        let denom = (Complex64::new(2.0 * k, 0.0) / phi - s2) + s2 * decay;
        if denom.norm() / decay < 1e-30 || !denom.norm().is_finite() {
            return Err(Error::DegenerateDenominator { t: self.horizon - s });
        }
        Ok(Complex64::new(2.0 * k * decay, 0.0) / denom)
    }

    /// `G(t; phi) = 2 kappa_a / (sigma^2 + e^{kappa_a (T - t)} (2 kappa_a / phi - sigma^2))`.
    pub fn solve_g(&self, phi: Complex64, t: f64) -> Result<Complex64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfGrid { t, horizon: self.horizon });
        }
        self.g_at_s(phi, self.horizon - t)
    }

    fn dg_dt(&self, g: Complex64) -> Complex64 {
        g * self.kappa_a - g * g * (0.5 * self.sigma * self.sigma)
    }

    fn jump_term(&self, g: Complex64) -> Complex64 {
        if self.eta == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            self.jump.mgf_unchecked(g * self.eta)
        }
    }

    fn dh_dt(&self, g: Complex64, h: Complex64) -> Complex64 {
        h * self.beta - (h * self.alpha).exp() * self.jump_term(g) + 1.0
    }

    fn df_dt(&self, g: Complex64, h: Complex64) -> Complex64 {
        -(g * (self.kappa_a * self.vbar_a) + h * (self.beta * self.lambda0))
    }

    /// `Re H` ceiling `(1/alpha) ln(beta / (alpha U)) + 10` with `U = M_J(eta Re phi)`.
    pub fn explosion_guard(&self, phi: Complex64) -> f64 {
        let u = if self.eta == 0.0 { 1.0 } else { self.jump.mgf_real(self.eta * phi.re) };
        (self.beta / (self.alpha * u)).ln() / self.alpha + GUARD_SLACK
    }

    /// Integrates `H` backward from `H(T) = psi`.
    pub fn solve_h(&self, phi: Complex64, psi: Complex64, opts: &SolveOptions) -> Result<HTrajectory> {
        self.require_domain(phi, psi)?;
        // G is checked once on a coarse sweep so the RHS can assume a valid denominator.
        for i in 0..=16 {
            self.g_at_s(phi, self.horizon * i as f64 / 16.0)?;
        }
        let guard = self.explosion_guard(phi);
        let rhs = |s: f64, h: Complex64| {
            let g = self.g_at_s(phi, s).unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            -self.dh_dt(g, h)
        };
        let tol = dopri::Tolerances { atol: opts.atol, rtol: opts.rtol, max_steps: opts.max_steps };
        let mut steps = Vec::new();
        let mut knots = Vec::new();
        let (d1, d2) = self.h_slopes(phi, 0.0, psi)?;
        knots.push(Knot { s: 0.0, y: psi, d1, d2 });
        let horizon = self.horizon;
        dopri::integrate(rhs, horizon, psi, &tol, |st| {
            let y1 = st.y1();
            if !(y1.re < guard) || !y1.im.is_finite() {
                return Err(Error::ExplosionGuard { t: horizon - st.s1(), re_h: y1.re, guard });
            }
            let (d1, d2) = self.h_slopes(phi, st.s1(), y1)?;
            let end = Knot { s: st.s1(), y: y1, d1, d2 };
            let start = knots.last().unwrap();
            let mut q = 0.0f64;
            if opts.defect_tol.is_finite() {
                for u in [0.2, 0.5, 0.8] {
                    let s = st.s0 + u * st.h;
                    let (y, dy) = quintic(start, &end, s);
                    let defect = (dy - self.h_slopes(phi, s, y)?.0).norm();
                    q = q.max(defect / (opts.defect_tol * (1.0 + y.norm())));
                }
            }
            if q <= 1.0 {
                steps.push(*st);
                knots.push(end);
            }
            Ok(q)
        })?;
        Ok(HTrajectory { psi, horizon, steps, knots, atol: opts.atol, rtol: opts.rtol })
    }

    /// `h'(s)` and `h''(s)` for `h(s) = H(T - s)` from the equation itself.
    fn h_slopes(&self, phi: Complex64, s: f64, h: Complex64) -> Result<(Complex64, Complex64)> {
        let g = self.g_at_s(phi, s)?;
        let d1 = -self.dh_dt(g, h);
        let dg = -self.dg_dt(g);
        let e = (h * self.alpha).exp();
        let (m, dm) = if self.eta == 0.0 {
            (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0))
        } else {
            (self.jump.mgf_unchecked(g * self.eta), self.jump.mgf_deriv_unchecked(g * self.eta) * self.eta)
        };
        let d2 = -((self.beta - self.alpha * e * m) * d1 - e * dm * dg);
        Ok((d1, d2))
    }

    /// Integral of `-F'` over `[a, b]` inside one step, by five-point
    /// Gauss-Legendre bisected until halves and whole agree to the solver
    /// tolerances. The step size alone only tracks `H`.
    fn f_piece(&self, phi: Complex64, h: &HTrajectory, step: usize, a: f64, b: f64) -> Result<Complex64> {
        let rule = |a: f64, b: f64| -> Result<Complex64> {
            let mid = 0.5 * (a + b);
            let half = 0.5 * (b - a);
            let mut acc = Complex64::new(0.0, 0.0);
            for &(x, w) in &GL5 {
                let s = mid + half * x;
                let g = self.g_at_s(phi, s)?;
                acc += -self.df_dt(g, h.interp(step, s)) * w;
            }
            Ok(acc * half)
        };
        let mut total = Complex64::new(0.0, 0.0);
        let mut stack = vec![(a, b, rule(a, b)?, 0u32)];
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let m = 0.5 * (lo + hi);
            let (left, right) = (rule(lo, m)?, rule(m, hi)?);
            let both = left + right;
            let tol = (h.atol + h.rtol * both.norm()) * ((hi - lo) / self.horizon).max(1e-3);
            if (both - whole).norm() <= tol || depth >= 40 {
                total += both;
            } else {
                stack.push((m, hi, right, depth + 1));
                stack.push((lo, m, left, depth + 1));
            }
        }
        Ok(total)
    }

    /// `F` at the end of each step, starting from `F(T) = 0`.
    fn f_cumulative(&self, phi: Complex64, h: &HTrajectory) -> Result<Vec<Complex64>> {
        let mut cum = Vec::with_capacity(h.steps.len() + 1);
        cum.push(Complex64::new(0.0, 0.0));
        for (i, st) in h.steps.iter().enumerate() {
            let last = *cum.last().unwrap();
            cum.push(last + self.f_piece(phi, h, i, st.s0, st.s1())?);
        }
        Ok(cum)
    }

    fn f_at(&self, phi: Complex64, h: &HTrajectory, cum: &[Complex64], t: f64) -> Result<Complex64> {
        if !(t >= 0.0 && t <= self.horizon) {
            return Err(Error::OutOfGrid { t, horizon: self.horizon });
        }
        let s = self.horizon - t;
        if s == 0.0 || h.steps.is_empty() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let i = h.step_index(s);
        let st = &h.steps[i];
        if s == st.s1() {
            return Ok(cum[i + 1]);
        }
        Ok(cum[i] + self.f_piece(phi, h, i, st.s0, s)?)
    }

    /// `F(t) = int_t^T [kappa_a vbar_a G(u) + beta lambda0 H(u)] du` at each requested `t`.
    pub fn solve_f(&self, phi: Complex64, h: &HTrajectory, times: &[f64]) -> Result<Vec<Complex64>> {
        let cum = self.f_cumulative(phi, h)?;
        times.iter().map(|&t| self.f_at(phi, h, &cum, t)).collect()
    }

    /// Full solve of `(G, H, F)` on the grid described by `opts`.
    pub fn solve(&self, phi: Complex64, psi: Complex64, opts: &SolveOptions) -> Result<OdeSolution> {
        let h_traj = self.solve_h(phi, psi, opts)?;
        let t_end = self.horizon;

        let mut grid: Vec<f64> = Vec::with_capacity(opts.grid_points + opts.extra_times.len() + 2);
        grid.push(0.0);
        grid.push(t_end);
        if opts.grid_points >= 2 {
            let n = opts.grid_points - 1;
            grid.extend((1..n).map(|i| t_end * i as f64 / n as f64));
        }
        for &t in &opts.extra_times {
            if !(t >= 0.0 && t <= t_end) {
                return Err(Error::OutOfGrid { t, horizon: t_end });
            }
            grid.push(t);
        }
        grid.sort_by(|a, b| a.total_cmp(b));
        grid.dedup();

        let f_cum = self.f_cumulative(phi, &h_traj)?;
        let f_vals = grid.iter().map(|&t| self.f_at(phi, &h_traj, &f_cum, t)).collect::<Result<Vec<_>>>()?;
        let mut g_vals = Vec::with_capacity(grid.len());
        let mut h_vals = Vec::with_capacity(grid.len());
        for &t in &grid {
            g_vals.push(self.solve_g(phi, t)?);
            h_vals.push(h_traj.at(t));
        }
        let dg_vals = g_vals.iter().map(|&g| self.dg_dt(g)).collect();
        let dh_vals = g_vals.iter().zip(&h_vals).map(|(&g, &h)| self.dh_dt(g, h)).collect();
        let df_vals = g_vals.iter().zip(&h_vals).map(|(&g, &h)| self.df_dt(g, h)).collect();

        Ok(OdeSolution {
            phi,
            psi,
            horizon: t_end,
            grid,
            g_vals,
            h_vals,
            f_vals,
            dg_vals,
            dh_vals,
            df_vals,
            tol_abs: opts.atol,
            tol_rel: opts.rtol,
            steps: h_traj.steps.len(),
            system: *self,
            h_traj,
            f_cum,
        })
    }

    /// Residuals `(G' - rhs_G, H' - rhs_H, F' - rhs_F)` of the system at `t`,
    /// given derivatives estimated by the caller.
    pub fn residuals(
        &self,
        vals: [Complex64; 3],
        derivs: [Complex64; 3],
    ) -> [Complex64; 3] {
        let [g, h, _] = vals;
        [
            derivs[0] - self.dg_dt(g),
            derivs[1] - self.dh_dt(g, h),
            derivs[2] - self.df_dt(g, h),
        ]
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::params::tests::test_params;

    pub(crate) fn test_system() -> RiccatiSystem {
        let p = test_params();
        let shift = MeasureShift::identity(&p).unwrap();
        RiccatiSystem::new(&p, &shift, JumpLaw::Exponential { rate: 20.0 }).unwrap()
    }

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    /// Fixed-step RK4 oracle for `(G, H, F)` in `s = T - t`.
    fn rk4_oracle(sys: &RiccatiSystem, phi: Complex64, psi: Complex64, t: f64, n: usize) -> [Complex64; 3] {
        let f = |y: [Complex64; 3]| -> [Complex64; 3] {
            let [g, h, _] = y;
            [-sys.dg_dt(g), -sys.dh_dt(g, h), -sys.df_dt(g, h)]
        };
        let span = sys.horizon - t;
        let dt = span / n as f64;
        let mut y = [phi, psi, c(0.0, 0.0)];
        let add = |y: [Complex64; 3], k: [Complex64; 3], w: f64| [y[0] + k[0] * w, y[1] + k[1] * w, y[2] + k[2] * w];
        for _ in 0..n {
            let k1 = f(y);
            let k2 = f(add(y, k1, dt / 2.0));
            let k3 = f(add(y, k2, dt / 2.0));
            let k4 = f(add(y, k3, dt));
            for j in 0..3 {
                y[j] += (k1[j] + k2[j] * 2.0 + k3[j] * 2.0 + k4[j]) * (dt / 6.0);
            }
        }
        y
    }

    #[test]
    fn domain_examples() {
        let sys = test_system();
        assert!(sys.domain_check(c(1e-6, 0.0), c(0.0, 0.0)).passed);
        let v = sys.domain_check(c(0.0, 1.0), c(0.0, 0.0));
        assert!(!v.passed);
        assert_eq!(v.binding, Constraint::RePhiPositive);
        assert_eq!(v.message, "Re(phi) must be strictly positive");

        let p = test_params();
        let shift = MeasureShift::new(&p, 0.1).unwrap();
        let sys = RiccatiSystem::new(&p, &shift, JumpLaw::Exponential { rate: 20.0 }).unwrap();
        let bound = 2.0 * 3.03 / (0.09 * (2.0 * 3.03f64.exp() - 1.0));
        assert!((sys.phi_upper() - bound).abs() < 1e-15);
        assert!(sys.domain_check(c(bound * (1.0 - 1e-9), 0.0), c(0.0, 0.0)).passed);
        let v = sys.domain_check(c(bound * (1.0 + 1e-9), 0.0), c(0.0, 0.0));
        assert!(!v.passed && v.binding == Constraint::RePhiUpper);
        let v = sys.domain_check(c(0.1, 0.0), c(0.5, 0.0));
        assert!(!v.passed && v.binding == Constraint::RePsiUpper);
    }

    #[test]
    fn g_matches_rk4() {
        let p = test_params();
        let shift = MeasureShift { a: 0.0, kappa_a: 2.0, vbar_a: 0.06 };
        let sys = RiccatiSystem::new(&p, &shift, JumpLaw::Exponential { rate: 20.0 }).unwrap();
        assert_eq!(sys.solve_g(c(0.05, 0.0), 1.0).unwrap(), c(0.05, 0.0));
        for (phi, t) in [(c(0.05, 0.0), 0.0), (c(0.05, 0.5), 0.5)] {
            let got = sys.solve_g(phi, t).unwrap();
            let oracle = rk4_oracle(&sys, phi, c(0.0, 0.0), t, 100_000)[0];
            assert!((got - oracle).norm() / oracle.norm() < 1e-8, "{got} vs {oracle}");
        }
    }

    #[test]
    fn h_vanishes_without_jumps() {
        let p = ModelParams { eta: 0.0, ..test_params() };
        let shift = MeasureShift::identity(&p).unwrap();
        let sys = RiccatiSystem::new(&p, &shift, JumpLaw::Exponential { rate: 20.0 }).unwrap();
        let sol = sys.solve(c(0.05, 0.3), c(0.0, 0.0), &SolveOptions::default()).unwrap();
        assert!(sol.h_vals.iter().all(|h| h.norm() < 1e-15));
    }

    #[test]
    fn h_and_f_match_rk4() {
        let sys = test_system();
        let opts = SolveOptions::default();
        for psi in [c(0.0, 0.0), c(0.2, 0.0)] {
            let phi = c(0.05, 0.0);
            let sol = sys.solve(phi, psi, &opts).unwrap();
            let oracle = rk4_oracle(&sys, phi, psi, 0.0, 1_000_000);
            assert!((sol.h_vals[0] - oracle[1]).norm() < 1e-8, "{} vs {}", sol.h_vals[0], oracle[1]);
            assert!((sol.f_vals[0] - oracle[2]).norm() < 1e-8);
        }
    }

    #[test]
    fn complex_arguments_match_rk4() {
        let sys = test_system();
        let (phi, psi) = (c(0.05, 0.4), c(0.2, -0.3));
        let sol = sys.solve(phi, psi, &SolveOptions::default()).unwrap();
        let oracle = rk4_oracle(&sys, phi, psi, 0.0, 200_000);
        assert!((sol.f_vals[0] - oracle[2]).norm() < 1e-9);
        assert!((sol.g_vals[0] - oracle[0]).norm() < 1e-12);
    }

    #[test]
    fn terminal_conditions_exact() {
        let sys = test_system();
        let (phi, psi) = (c(0.3, -2.0), c(0.1, 4.0));
        let sol = sys.solve(phi, psi, &SolveOptions::default()).unwrap();
        let n = sol.last();
        assert_eq!(sol.g_vals[n], phi);
        assert_eq!(sol.h_vals[n], psi);
        assert_eq!(sol.f_vals[n], c(0.0, 0.0));
        assert_eq!(sol.grid.len(), 512);
    }

    #[test]
    fn conjugate_symmetry() {
        let sys = test_system();
        let (phi, psi) = (c(0.3, -2.0), c(0.1, 4.0));
        let a = sys.solve(phi, psi, &SolveOptions::default()).unwrap();
        let b = sys.solve(phi.conj(), psi.conj(), &SolveOptions::default()).unwrap();
        for i in 0..a.grid.len() {
            assert!((a.h_vals[i].conj() - b.h_vals[i]).norm() < 1e-13);
            assert!((a.f_vals[i].conj() - b.f_vals[i]).norm() < 1e-13);
        }
    }

    #[test]
    fn tolerance_robustness() {
        let sys = test_system();
        let (phi, psi) = (c(0.4, 3.0), c(0.3, -1.0));
        let tight = sys.solve(phi, psi, &SolveOptions::default()).unwrap();
        let loose = sys
            .solve(phi, psi, &SolveOptions { atol: 1e-6, rtol: 1e-6, ..SolveOptions::default() })
            .unwrap();
        assert!((tight.h_vals[0] - loose.h_vals[0]).norm() < 1e-5);
    }

    #[test]
    fn jump_mgf_stays_below_ceiling() {
        let sys = test_system();
        let p = test_params();
        let ceiling = p.hawkes_mgf_ceiling();
        let phi = c(0.95 * sys.phi_upper(), 1.5);
        for i in 0..=1000 {
            let t = i as f64 / 1000.0;
            let g = sys.solve_g(phi, t).unwrap();
            assert!(g.re <= phi.re + 1e-15);
            assert!(sys.jump.mgf_real(sys.eta * g.re) < ceiling);
        }
    }

    #[test]
    fn out_of_domain_is_rejected() {
        let sys = test_system();
        let r = sys.solve(c(0.0, 1.0), c(0.0, 0.0), &SolveOptions::default());
        assert!(matches!(r, Err(Error::DomainViolation(_))));
        let sol = sys.solve(c(0.1, 0.0), c(0.0, 0.0), &SolveOptions::default()).unwrap();
        assert!(matches!(sol.eval(1.5), Err(Error::OutOfGrid { .. })));
    }
}

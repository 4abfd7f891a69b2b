//! Dormand-Prince 5(4) for a complex scalar ODE with continuous extension.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// One accepted step `[s0, s0 + h]` with its quartic interpolant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenseStep {
    pub s0: f64,
    pub h: f64,
    rcont: [Complex64; 5],
}

impl DenseStep {
    pub fn s1(&self) -> f64 {
        self.s0 + self.h
    }

    pub fn y0(&self) -> Complex64 {
        self.rcont[0]
    }

    pub fn y1(&self) -> Complex64 {
        self.rcont[0] + self.rcont[1]
    }

    pub fn eval(&self, s: f64) -> Complex64 {
        let theta = (s - self.s0) / self.h;
        let theta1 = 1.0 - theta;
        let r = &self.rcont;
        r[0] + (r[1] + (r[2] + (r[3] + r[4] * theta1) * theta) * theta1) * theta
    }
}

pub struct Tolerances {
    pub atol: f64,
    pub rtol: f64,
    pub max_steps: usize,
}

/// Integrates `y' = f(s, y)` from `s = 0` to `s_end`, handing every step
/// that passes the error test to `on_step`. The callback may abort the
/// integration, or return a ratio `q` from its own accuracy test: `q <= 1`
/// accepts the step, `q > 1` rejects it, and the next step size respects
/// `q` as if it scaled like a fifth-order error.
pub fn integrate<F, C>(f: F, s_end: f64, y0: Complex64, tol: &Tolerances, mut on_step: C) -> Result<()>
where
    F: Fn(f64, Complex64) -> Complex64,
    C: FnMut(&DenseStep) -> Result<f64>,
{
    if s_end <= 0.0 {
        return Ok(());
    }
    let h_min = 1e-14 * s_end;
    let mut s = 0.0;
    let mut y = y0;
    let mut k1 = f(s, y);
    let mut h = initial_step(&f, y, k1, s_end, tol);
    let mut last_rejected = false;
    let mut steps = 0usize;

    while s < s_end {
        if steps >= tol.max_steps {
            return Err(Error::StepSizeUnderflow { s, h });
        }
        steps += 1;
        let last = s + h >= s_end;
        if last {
            h = s_end - s;
        }

        let k2 = f(s + C2 * h, y + k1 * (h * A21));
        let k3 = f(s + C3 * h, y + (k1 * A31 + k2 * A32) * h);
        let k4 = f(s + C4 * h, y + (k1 * A41 + k2 * A42 + k3 * A43) * h);
        let k5 = f(s + C5 * h, y + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h);
        let k6 = f(s + h, y + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h);
        let y1 = y + (k1 * A71 + k3 * A73 + k4 * A74 + k5 * A75 + k6 * A76) * h;
        let s1 = if last { s_end } else { s + h };
        let k7 = f(s1, y1);

        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
        let scale = tol.atol + tol.rtol * y.norm().max(y1.norm());
        let err = err_vec.norm() / scale;

        let mut verdict = None;
        if err.is_finite() && err <= 1.0 {
            let ydiff = y1 - y;
            let bspl = k1 * h - ydiff;
            let rcont = [
                y,
                ydiff,
                bspl,
                ydiff - k7 * h - bspl,
                (k1 * D1 + k3 * D3 + k4 * D4 + k5 * D5 + k6 * D6 + k7 * D7) * h,
            ];
            verdict = Some(on_step(&DenseStep { s0: s, h: s1 - s, rcont })?);
        }
        if let Some(q) = verdict.filter(|&q| q <= 1.0) {
            s = s1;
            y = y1;
            k1 = k7;
            let ratio = err.max(q);
            let mut fac = if ratio == 0.0 { FAC_MAX } else { SAFETY * ratio.powf(-0.2) };
            fac = fac.clamp(FAC_MIN, FAC_MAX);
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h *= fac;
        } else if let Some(q) = verdict {
            h *= (SAFETY * q.powf(-0.2)).clamp(FAC_MIN, SAFETY);
            last_rejected = true;
        } else {
            let fac = if err.is_finite() {
                (SAFETY * err.powf(-0.2)).clamp(FAC_MIN, 1.0)
            } else {
                FAC_MIN
            };
            h *= fac;
            last_rejected = true;
        }
        if h < h_min && s < s_end {
            return Err(Error::StepSizeUnderflow { s, h });
        }
    }
    Ok(())
}

fn initial_step<F>(f: &F, y0: Complex64, k1: Complex64, span: f64, tol: &Tolerances) -> f64
where
    F: Fn(f64, Complex64) -> Complex64,
{
    let sk = tol.atol + tol.rtol * y0.norm();
    let d0 = y0.norm() / sk;
    let d1 = k1.norm() / sk;
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h0 = h0.min(span);
    let k2 = f(h0, y0 + k1 * h0);
    let d2 = (k2 - k1).norm() / sk / h0;
    let dm = d1.max(d2);
    let h1 = if dm <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / dm).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}

//! Complementary error function on the complex plane.
//!
//! The right half-plane is covered by two methods. The Maclaurin series of
//! `erf` is used wherever its rounding error, estimated from the sum of the
//! absolute values of its terms, stays below `1e-13` relative to the result.
//! That holds near the origin and in a band around the imaginary axis, where
//! the continued fraction converges slowly. Elsewhere the Laplace continued
//! fraction for `sqrt(pi) e^{z^2} erfc(z)` is evaluated by the modified Lentz
//! method. The left half-plane follows from `erfc(-z) = 2 - erfc(z)`.

use num_complex::Complex64;

const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Largest `|z|` handed to the series; beyond it the terms risk overflow.
const SERIES_MAX_ABS: f64 = 20.0;
/// The series is not attempted once `Re z` exceeds this and `|z| > 3`.
const SERIES_MAX_RE: f64 = 2.0;
const SERIES_COND_LIMIT: f64 = 1e-13;
const CF_MAX_TERMS: usize = 20_000;

pub fn erfc(z: Complex64) -> Complex64 {
    if z.re.is_nan() || z.im.is_nan() {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    if z.re < 0.0 {
        return Complex64::new(2.0, 0.0) - erfc_right(-z);
    }
    erfc_right(z)
}

fn erfc_right(z: Complex64) -> Complex64 {
    if z == Complex64::new(0.0, 0.0) {
        return Complex64::new(1.0, 0.0);
    }
    let r = z.norm();
    if r <= SERIES_MAX_ABS && (r <= 3.0 || z.re <= SERIES_MAX_RE) {
        if let Some(v) = series(z) {
            return v;
        }
    }
    continued_fraction(z)
}

/// `1 - erf(z)` from the Maclaurin series, or `None` when rounding in the
/// partial sums would exceed the accuracy target.
fn series(z: Complex64) -> Option<Complex64> {
    let z2 = -(z * z);
    let mut p = z;
    let mut sum = z;
    let mut abs_sum = z.norm();
    let mut n = 0usize;
    loop {
        n += 1;
        p = p * z2 / n as f64;
        let term = p / (2 * n + 1) as f64;
        sum += term;
        let tn = term.norm();
        abs_sum += tn;
        if tn <= 1e-17 * sum.norm() || n > 2000 {
            break;
        }
    }
    let erf = sum * FRAC_2_SQRT_PI;
    let out = Complex64::new(1.0, 0.0) - erf;
    let cond = f64::EPSILON * (1.0 + FRAC_2_SQRT_PI * abs_sum) / out.norm();
    (cond <= SERIES_COND_LIMIT).then_some(out)
}

/// `erfc(z) = e^{-z^2} / sqrt(pi) * 1/(z + (1/2)/(z + 1/(z + (3/2)/(z + ...))))`.
fn continued_fraction(z: Complex64) -> Complex64 {
    let z2 = z * z;
    if z2.re > 750.0 {
        return Complex64::new(0.0, 0.0);
    }
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = if z.norm() == 0.0 { tiny } else { z };
    let mut c = f;
    let mut d = Complex64::new(0.0, 0.0);
    for n in 1..=CF_MAX_TERMS {
        let a = n as f64 / 2.0;
        d = z + d * a;
        if d.norm() < TINY {
            d = tiny;
        }
        c = z + c.inv() * a;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            break;
        }
    }
    (-z2).exp() * FRAC_1_SQRT_PI / f
}

//! Adaptive Gauss-Kronrod (7, 15) integration over `[0, inf)` in doubling panels.
//!
//! Each panel is refined level by level: every open subinterval contributes
//! its 15 nodes to a single batch, so the integrand can be evaluated in
//! parallel while the result stays independent of scheduling.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const FIRST_PANEL: f64 = 64.0;
pub const MAX_UPPER: f64 = 1_048_576.0;

/// Pairwise summation in slice order.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

fn nodes(a: f64, b: f64) -> [f64; 15] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 15];
    out[0] = c;
    for j in 0..7 {
        out[1 + 2 * j] = c - h * XGK[j];
        out[2 + 2 * j] = c + h * XGK[j];
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Rule {
    value: f64,
    abs: f64,
    err: f64,
}

fn apply(a: f64, b: f64, f: &[f64]) -> Rule {
    let h = 0.5 * (b - a);
    let fc = f[0];
    let mut resk = fc * WGK[7];
    let mut resg = fc * WG[3];
    let mut resabs = resk.abs();
    for j in 0..7 {
        let (f1, f2) = (f[1 + 2 * j], f[2 + 2 * j]);
        resk += WGK[j] * (f1 + f2);
        resabs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let reskh = 0.5 * resk;
    let mut resasc = WGK[7] * (fc - reskh).abs();
    for j in 0..7 {
        resasc += WGK[j] * ((f[1 + 2 * j] - reskh).abs() + (f[2 + 2 * j] - reskh).abs());
    }
    let value = resk * h;
    let resabs = resabs * h.abs();
    let resasc = resasc * h.abs();
    let mut err = ((resk - resg) * h).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs);
    }
    Rule { value, abs: resabs, err }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadOutcome {
    pub value: f64,
    pub error: f64,
    pub nodes: usize,
    pub upper: f64,
    /// Every evaluated `(x, f(x))`, sorted by `x`.
    pub samples: Vec<(f64, f64)>,
}

/// Integrates `f` over `[0, inf)` to relative tolerance `tol`.
///
/// `f` receives a batch of abscissae and returns the integrand at each, in order.
pub fn integrate_half_line<F>(f: F, tol: f64, max_nodes: usize) -> Result<QuadOutcome>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut panel_values: Vec<f64> = Vec::new();
    let mut total_err = 0.0;
    let mut nodes_used = 0usize;
    let mut samples = Vec::new();
    let (mut a, mut b) = (0.0, FIRST_PANEL);

    loop {
        let mut open = vec![(a, b)];
        let mut done: Vec<(f64, Rule)> = Vec::new();
        let prior = pairwise_sum(&panel_values);
        while !open.is_empty() {
            let xs: Vec<f64> = open.iter().flat_map(|&(l, r)| nodes(l, r)).collect();
            nodes_used += xs.len();
            if nodes_used > max_nodes {
                return Err(Error::QuadratureNotConverged(format!(
                    "node budget {max_nodes} exhausted on panel [{a}, {b}]"
                )));
            }
            let fx = f(&xs)?;
            if let Some(bad) = fx.iter().position(|v| !v.is_finite()) {
                return Err(Error::QuadratureNotConverged(format!(
                    "non-finite integrand {} at {}",
                    fx[bad], xs[bad]
                )));
            }
            samples.extend(xs.iter().copied().zip(fx.iter().copied()));
            let rules: Vec<Rule> = open
                .iter()
                .enumerate()
                .map(|(i, &(l, r))| apply(l, r, &fx[15 * i..15 * (i + 1)]))
                .collect();
            let level_value: f64 = rules.iter().map(|r| r.value).sum::<f64>()
                + done.iter().map(|(_, r)| r.value).sum::<f64>();
            let target = tol * (prior + level_value).abs();
            let width = b - a;
            let mut next = Vec::new();
            for (&(l, r), rule) in open.iter().zip(rules) {
                let share = target * (r - l) / width;
                if rule.err <= share || rule.err <= f64::MIN_POSITIVE || (r - l) < width * 1e-12 {
                    done.push((l, rule));
                } else {
                    let m = 0.5 * (l + r);
                    next.push((l, m));
                    next.push((m, r));
                }
            }
            open = next;
        }
        done.sort_by(|x, y| x.0.total_cmp(&y.0));
        let values: Vec<f64> = done.iter().map(|(_, r)| r.value).collect();
        let panel = pairwise_sum(&values);
        let panel_abs: f64 = done.iter().map(|(_, r)| r.abs).sum();
        total_err += done.iter().map(|(_, r)| r.err).sum::<f64>();
        panel_values.push(panel);
        let total = pairwise_sum(&panel_values);

        let tail = panel.abs().max(panel_abs);
        if tail < tol * total.abs() || tail == 0.0 {
            samples.sort_by(|x, y| x.0.total_cmp(&y.0));
            return Ok(QuadOutcome { value: total, error: total_err + tail, nodes: nodes_used, upper: b, samples });
        }
        if b >= MAX_UPPER {
            return Err(Error::QuadratureNotConverged(format!(
                "truncation point exceeded {MAX_UPPER} with last panel {tail:e} vs total {total:e}"
            )));
        }
        a = b;
        b *= 2.0;
    }
}

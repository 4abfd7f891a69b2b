//! Model parameters and the admissibility checks that gate pricing.
//!
//! Base invariants (positivity, Hawkes stability `alpha < beta`, Feller), the
//! exponential-moment bound `c_l`, the jump bound `L_J`, the range of
//! admissible measure shifts `a`, and the resulting risk-neutral
//! reversion parameters all live here.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jumps::JumpLaw;

/// 30 calendar days in years.
pub const VIX_WINDOW: f64 = 30.0 / 365.0;

/// Relative tolerance on `|kappa_a - (beta - alpha)|` below which the shift is singular.
pub const SINGULAR_SHIFT_TOL: f64 = 1e-10;

fn default_delta() -> f64 {
    VIX_WINDOW
}

/// Heston, Hawkes, jump-scaling and rate parameters. Rates are per year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    /// Constant physical drift; `None` means `mu = r`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub r: f64,
    pub rho: f64,
    pub v0: f64,
    pub kappa: f64,
    pub vbar: f64,
    pub sigma: f64,
    pub eta: f64,
    pub lambda0: f64,
    pub alpha: f64,
    pub beta: f64,
    /// Model horizon in years.
    #[serde(rename = "T")]
    pub horizon: f64,
    #[serde(default = "default_delta")]
    pub delta: f64,
}

impl ModelParams {
    pub fn drift(&self) -> f64 {
        self.mu.unwrap_or(self.r)
    }

    /// `(beta / alpha) exp(alpha / beta - 1)`, the Hawkes-side ceiling on jump MGFs.
    pub fn hawkes_mgf_ceiling(&self) -> f64 {
        (self.beta / self.alpha) * (self.alpha / self.beta - 1.0).exp()
    }
}

/// A violated base invariant together with the offending values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseViolation {
    NonPositive { name: &'static str, value: f64 },
    Stability { alpha: f64, beta: f64 },
    Feller { two_kappa_vbar: f64, sigma_sq: f64 },
    Correlation { rho: f64 },
}

impl fmt::Display for BaseViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BaseViolation::NonPositive { name, value } => {
                write!(f, "{name} must be > 0 (got {value})")
            }
            BaseViolation::Stability { alpha, beta } => {
                write!(f, "stability violated: need 0 < alpha < beta (alpha={alpha}, beta={beta})")
            }
            BaseViolation::Feller { two_kappa_vbar, sigma_sq } => write!(
                f,
                "Feller violated: 2 kappa vbar = {two_kappa_vbar} < sigma^2 = {sigma_sq}"
            ),
            BaseViolation::Correlation { rho } => write!(f, "need rho^2 < 1 (rho={rho})"),
        }
    }
}

/// Every violated base invariant; empty means valid.
pub fn validate_base(p: &ModelParams) -> Vec<BaseViolation> {
    let mut out = Vec::new();
    let positives = [
        ("v0", p.v0),
        ("kappa", p.kappa),
        ("vbar", p.vbar),
        ("sigma", p.sigma),
        ("eta", p.eta),
        ("lambda0", p.lambda0),
        ("T", p.horizon),
        ("delta", p.delta),
    ];
    for (name, value) in positives {
        if !(value > 0.0 && value.is_finite()) {
            out.push(BaseViolation::NonPositive { name, value });
        }
    }
    if !(p.alpha > 0.0 && p.alpha < p.beta) {
        out.push(BaseViolation::Stability { alpha: p.alpha, beta: p.beta });
    }
    let two_kv = 2.0 * p.kappa * p.vbar;
    let s2 = p.sigma * p.sigma;
    if !(two_kv >= s2) {
        out.push(BaseViolation::Feller { two_kappa_vbar: two_kv, sigma_sq: s2 });
    }
    if !(p.rho * p.rho < 1.0) {
        out.push(BaseViolation::Correlation { rho: p.rho });
    }
    out
}

/// `Lambda(c) = 2 eta c (e^{DT} - 1) / (D - kappa + (D + kappa) e^{DT})` with
/// `D = sqrt(kappa^2 - 2 sigma^2 c)`, for `c <= kappa^2 / (2 sigma^2)`.
pub fn moment_exponent(p: &ModelParams, c: f64) -> f64 {
    let d2 = p.kappa * p.kappa - 2.0 * p.sigma * p.sigma * c;
    let d = d2.max(0.0).sqrt();
    let t = p.horizon;
    if d == 0.0 {
        return 2.0 * p.eta * c * t / (2.0 + p.kappa * t);
    }
    // Divided through by e^{DT} so large DT cannot overflow.
    let one_minus = -(-d * t).exp_m1();
    2.0 * p.eta * c * one_minus / ((d + p.kappa) * one_minus + 2.0 * d * (-d * t).exp())
}

fn c_feasible(p: &ModelParams, jump: &JumpLaw, ceiling: f64, c: f64) -> bool {
    let l = moment_exponent(p, c);
    l < jump.eps_j() && jump.mgf_real(l) <= ceiling
}

/// `c_l`: supremum of `c <= kappa^2 / (2 sigma^2)` with `Lambda(c) < eps_J`
/// and `M_J(Lambda(c)) <= (beta/alpha) e^{alpha/beta - 1}`.
pub fn compute_c_l(p: &ModelParams, jump: &JumpLaw) -> Result<f64> {
    const GRID: usize = 64;
    const ABS_TOL: f64 = 1e-12;

    let c_max = p.kappa * p.kappa / (2.0 * p.sigma * p.sigma);
    if !(c_max > 0.0 && c_max.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "kappa^2 / (2 sigma^2) = {c_max} is not a positive finite number"
        )));
    }
    let ceiling = p.hawkes_mgf_ceiling();
    let feasible = |c: f64| c_feasible(p, jump, ceiling, c);

    if !feasible(c_max * 1e-14) {
        return Err(Error::NoAdmissibleC);
    }

    let mut lo = 0.0;
    let mut hi = c_max;
    loop {
        let flags: Vec<bool> = (1..=GRID)
            .map(|i| feasible(lo + (hi - lo) * i as f64 / GRID as f64))
            .collect();
        let last_true = flags.iter().rposition(|&f| f);
        let monotone = match last_true {
            Some(k) => flags[..=k].iter().all(|&f| f) && flags[k + 1..].iter().all(|&f| !f),
            None => true,
        };
        let width = (hi - lo) / GRID as f64;
        let bracket = |k: Option<usize>| match k {
            Some(k) => (lo + width * (k + 1) as f64, lo + width * (k + 2) as f64),
            None => (lo, lo + width),
        };
        if last_true == Some(GRID - 1) {
            return Ok(hi);
        }
        let (a, b) = bracket(last_true);
        if monotone {
            // Bisection on a down-set.
            let (mut a, mut b) = (a, b);
            while b - a > ABS_TOL && b - a > a.abs() * f64::EPSILON * 4.0 {
                let mid = 0.5 * (a + b);
                if feasible(mid) {
                    a = mid;
                } else {
                    b = mid;
                }
            }
            return Ok(a);
        }
        // Non-monotone: refine around the last feasible/infeasible transition.
        if b - a <= ABS_TOL {
            return Ok(a);
        }
        lo = a;
        hi = b;
    }
}

/// `L_J = M_J^{-1}((beta/alpha) e^{alpha/beta - 1}) / eta`; `+inf` when `eta = 0`.
pub fn compute_l_j(p: &ModelParams, jump: &JumpLaw) -> Result<f64> {
    if p.eta == 0.0 {
        return Ok(f64::INFINITY);
    }
    let ceiling = p.hawkes_mgf_ceiling();
    if ceiling <= 1.0 && p.alpha > 0.0 && p.alpha < p.beta {
        // alpha / beta so close to 1 that the ceiling rounds to 1.
        return Ok(0.0);
    }
    Ok(jump.mgf_inverse(ceiling)? / p.eta)
}

/// Largest admissible `|a|` given `c_l`, `Q1` and `s`.
pub fn max_shift(p: &ModelParams, c_l: f64, q1: f64, s: f64) -> Result<f64> {
    let rho2 = p.rho * p.rho;
    if !(rho2 < c_l) {
        return Err(Error::AssumptionViolated(format!(
            "rho^2 = {rho2} must be < c_l = {c_l}"
        )));
    }
    let qs = q1 * s;
    let b1 = (2.0 * c_l).sqrt() / 2.0;
    let b2 = (c_l - rho2).sqrt();
    let b3 = (c_l / 2.0).sqrt() / qs;
    let b4 = ((1.0 - rho2) * c_l / (qs * (2.0 * qs * (1.0 - rho2) + rho2 * s - 1.0))).sqrt();
    Ok(b1.min(b2).min(b3).min(b4).max(0.0))
}

/// Constants fixed by the measure-change assumptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AssumptionConfig {
    #[serde(rename = "Q2", default = "AssumptionConfig::default_q2")]
    pub q2: f64,
    #[serde(default = "AssumptionConfig::default_eps")]
    pub eps1: f64,
    #[serde(default = "AssumptionConfig::default_eps")]
    pub eps2: f64,
}

impl AssumptionConfig {
    fn default_q2() -> f64 {
        2.0
    }
    fn default_eps() -> f64 {
        1.0
    }
    pub fn q1(&self) -> f64 {
        self.q2 / (self.q2 - 1.0)
    }
}

impl Default for AssumptionConfig {
    fn default() -> Self {
        Self { q2: 2.0, eps1: 1.0, eps2: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionFlag {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Admissibility constants and per-condition verdicts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub c_l: Option<f64>,
    #[serde(rename = "L_J")]
    pub l_j: Option<f64>,
    pub a_max: Option<f64>,
    #[serde(rename = "Q1")]
    pub q1: f64,
    #[serde(rename = "Q2")]
    pub q2: f64,
    pub eps1: f64,
    pub eps2: f64,
    pub flags: Vec<ConditionFlag>,
}

impl AdmissibilityReport {
    pub fn is_admissible(&self) -> bool {
        self.flags.iter().all(|f| f.passed)
    }
}

fn flag(name: &str, passed: bool, detail: impl Into<String>) -> ConditionFlag {
    ConditionFlag { name: name.to_string(), passed, detail: detail.into() }
}

/// Runs every admissibility computation and collects the verdicts.
///
/// Numerical failures are reported as failed flags rather than errors so the
/// report is always available for inspection.
pub fn admissibility(
    p: &ModelParams,
    jump: &JumpLaw,
    cfg: &AssumptionConfig,
) -> AdmissibilityReport {
    let mut flags = Vec::new();
    let base = validate_base(p);
    let find = |pred: &dyn Fn(&BaseViolation) -> bool| base.iter().find(|v| pred(v));

    let nonpos: Vec<String> = base
        .iter()
        .filter(|v| matches!(v, BaseViolation::NonPositive { .. }))
        .map(|v| v.to_string())
        .collect();
    flags.push(flag("positivity", nonpos.is_empty(), nonpos.join("; ")));
    let stab = find(&|v| matches!(v, BaseViolation::Stability { .. }));
    flags.push(flag(
        "stability",
        stab.is_none(),
        stab.map(|v| v.to_string()).unwrap_or_else(|| format!("alpha={} < beta={}", p.alpha, p.beta)),
    ));
    let feller = find(&|v| matches!(v, BaseViolation::Feller { .. }));
    flags.push(flag(
        "feller",
        feller.is_none(),
        feller.map(|v| v.to_string()).unwrap_or_default(),
    ));
    let corr = find(&|v| matches!(v, BaseViolation::Correlation { .. }));
    flags.push(flag(
        "correlation",
        corr.is_none(),
        corr.map(|v| v.to_string()).unwrap_or_default(),
    ));
    let law_ok = jump.validate();
    flags.push(flag(
        "jump_law",
        law_ok.is_ok(),
        law_ok.err().map(|e| e.to_string()).unwrap_or_default(),
    ));

    let mut report = AdmissibilityReport {
        c_l: None,
        l_j: None,
        a_max: None,
        q1: cfg.q1(),
        q2: cfg.q2,
        eps1: cfg.eps1,
        eps2: cfg.eps2,
        flags: Vec::new(),
    };
    if !base.is_empty() || jump.validate().is_err() {
        report.flags = flags;
        return report;
    }

    match compute_c_l(p, jump) {
        Ok(c) => {
            report.c_l = Some(c);
            flags.push(flag("c_l_positive", c > 0.0, format!("c_l = {c}")));
        }
        Err(e) => flags.push(flag("c_l_positive", false, e.to_string())),
    }
    match compute_l_j(p, jump) {
        Ok(l) => {
            report.l_j = Some(l);
            flags.push(flag("L_J_positive", l > 0.0, format!("L_J = {l}")));
        }
        Err(e) => flags.push(flag("L_J_positive", false, e.to_string())),
    }

    let rho2 = p.rho * p.rho;
    if let Some(c_l) = report.c_l {
        flags.push(flag(
            "rho_sq_below_c_l",
            rho2 < c_l,
            format!("rho^2 = {rho2}, c_l = {c_l}"),
        ));
    }

    // Drift condition: infinite bound when mu = r.
    let d = (p.drift() - p.r).powi(2);
    let s1 = 2.0 + cfg.eps1;
    let feller_gap = ((2.0 * p.kappa * p.vbar - p.sigma * p.sigma) / (2.0 * p.sigma)).powi(2);
    let drift_bound = if d == 0.0 {
        f64::INFINITY
    } else {
        (1.0 - rho2) / (d * (s1 * s1 - s1)) * feller_gap
    };
    flags.push(flag(
        "drift_bound",
        drift_bound > 1.0,
        format!("bound = {drift_bound}"),
    ));
    flags.push(flag(
        "q2_range",
        cfg.q2 > 1.0 && cfg.q2 < drift_bound,
        format!("need 1 < Q2 = {} < {drift_bound}", cfg.q2),
    ));
    flags.push(flag(
        "eps_positive",
        cfg.eps1 > 0.0 && cfg.eps2 > 0.0,
        format!("eps1 = {}, eps2 = {}", cfg.eps1, cfg.eps2),
    ));
    let strict_feller = 2.0 * p.kappa * p.vbar > (1.0 + cfg.eps2) * p.sigma * p.sigma;
    flags.push(flag(
        "strict_feller",
        strict_feller,
        format!(
            "2 kappa vbar = {} vs (1 + eps2) sigma^2 = {}",
            2.0 * p.kappa * p.vbar,
            (1.0 + cfg.eps2) * p.sigma * p.sigma
        ),
    ));

    if let Some(c_l) = report.c_l {
        if cfg.q2 > 1.0 {
            match max_shift(p, c_l, cfg.q1(), s1) {
                Ok(a) => report.a_max = Some(a),
                Err(e) => flags.push(flag("a_max", false, e.to_string())),
            }
        }
    }
    report.flags = flags;
    report
}

/// Risk-neutral reversion parameters under the shifted measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MeasureShift {
    pub a: f64,
    pub kappa_a: f64,
    pub vbar_a: f64,
}

impl MeasureShift {
    /// `kappa_a = kappa + a sigma`, `vbar_a = kappa vbar / kappa_a`, with the
    /// positivity and non-singularity checks but no range check on `a`.
    pub fn new(p: &ModelParams, a: f64) -> Result<Self> {
        let kappa_a = p.kappa + a * p.sigma;
        if !(kappa_a > 0.0) {
            return Err(Error::InvalidInput(format!("kappa_a = {kappa_a} must be > 0")));
        }
        let gap = p.beta - p.alpha;
        if (kappa_a - gap).abs() <= SINGULAR_SHIFT_TOL * gap.max(1.0) {
            return Err(Error::SingularShift { kappa_a, gap });
        }
        Ok(Self { a, kappa_a, vbar_a: p.kappa * p.vbar / kappa_a })
    }

    pub fn identity(p: &ModelParams) -> Result<Self> {
        Self::new(p, 0.0)
    }
}

/// Range-checked construction of the shift `a` against a computed report.
pub fn check_shift(p: &ModelParams, a: f64, report: &AdmissibilityReport) -> Result<MeasureShift> {
    let a_max = report.a_max.ok_or_else(|| {
        Error::AssumptionViolated("admissible shift range unavailable (see report flags)".into())
    })?;
    if !(a.abs() < a_max) {
        return Err(Error::ShiftOutOfRange { a, a_max });
    }
    MeasureShift::new(p, a)
}

//! Command implementations. Each writes its main result to the configured
//! output and bulk tables to the CSV paths given on the command line.

use std::fmt::Write as _;
use std::path::Path;

use hhvix::mc::{Estimate, Simulator};
use hhvix::params::{admissibility, check_shift};
use hhvix::pricer::{price_call, Pricer, PricingContext};
use hhvix::vix::{forward_variance, vix_coefficients};
use hhvix::{
    AdmissibilityReport, CharFn, Complex64, MeasureShift, PricingRequest, RiccatiSystem, SolveOptions,
};
use serde_json::{json, Value};

use crate::config::{Format, RunConfig};
use crate::{CharfnArgs, CliError, ContractArgs, DumpArgs, PriceArgs, SimulateArgs, StateArgs, Target};

fn cx(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(e, path))
}

fn emit(cfg: &RunConfig, text: &str) -> Result<(), CliError> {
    match &cfg.output.path {
        Some(p) => write_file(Path::new(p), text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cfg: &RunConfig, v: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(v).expect("JSON values always serialize");
    text.push('\n');
    emit(cfg, &text)
}

fn csv(header: &str, rows: impl IntoIterator<Item = Vec<f64>>) -> String {
    let mut out = format!("{header}\n");
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format!("{x:.16e}")).collect();
        let _ = writeln!(out, "{}", cells.join(","));
    }
    out
}

/// Admissibility gate shared by every computing command.
fn admitted(cfg: &RunConfig) -> Result<(AdmissibilityReport, MeasureShift), CliError> {
    let report = admissibility(&cfg.model, &cfg.jump, &cfg.assumption);
    if !report.is_admissible() {
        let failed: Vec<String> =
            report.flags.iter().filter(|f| !f.passed).map(|f| format!("{}: {}", f.name, f.detail)).collect();
        return Err(CliError::inadmissible(format!("inadmissible configuration; {}", failed.join("; "))));
    }
    let shift = check_shift(&cfg.model, cfg.shift_a, &report)?;
    Ok((report, shift))
}

fn request(cfg: &RunConfig, c: &ContractArgs) -> Result<PricingRequest, CliError> {
    let p = &cfg.pricing;
    let strike = c.strike.or(p.strike).ok_or_else(|| CliError::usage("strike required (--strike or pricing.K)"))?;
    let t_mat = c
        .maturity
        .or(p.t_mat)
        .ok_or_else(|| CliError::usage("maturity required (--maturity or pricing.T_mat)"))?;
    let mut quadrature = p.quadrature;
    if let Some(f) = c.phi_r_fraction {
        quadrature.phi_r_fraction = f;
    }
    let (t, v_t, lambda_t) = state(cfg, &c.state);
    Ok(PricingRequest { t, t_mat, strike, v_t, lambda_t, quadrature })
}

fn state(cfg: &RunConfig, s: &StateArgs) -> (f64, f64, f64) {
    let p = &cfg.pricing;
    (
        s.t.or(p.t).unwrap_or(0.0),
        s.v.or(p.v_t).unwrap_or(cfg.model.v0),
        s.lambda.or(p.lambda_t).unwrap_or(cfg.model.lambda0),
    )
}

pub fn validate(cfg: &RunConfig) -> Result<u8, CliError> {
    let report = admissibility(&cfg.model, &cfg.jump, &cfg.assumption);
    let shift = check_shift(&cfg.model, cfg.shift_a, &report);
    let admissible = report.is_admissible() && shift.is_ok();
    let mut v = serde_json::to_value(&report).expect("report serializes");
    v["admissible"] = json!(admissible);
    v["shift"] = match &shift {
        Ok(s) => serde_json::to_value(s).expect("shift serializes"),
        Err(e) => json!({ "a": cfg.shift_a, "error": e.to_string() }),
    };
    emit_json(cfg, &v)?;
    Ok(if admissible { 0 } else { 1 })
}

pub fn price(cfg: &RunConfig, args: &PriceArgs) -> Result<(), CliError> {
    let (_, shift) = admitted(cfg)?;
    let req = request(cfg, &args.contract)?;
    let ctx = PricingContext::new(cfg.model, cfg.jump, shift)?;
    let (res, mut samples) = Pricer::new(&ctx, &req)?.price_with_samples()?;
    if let Some(path) = &args.dump_integrand {
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        write_file(path, &csv("phi_I,integrand", samples.iter().map(|&(x, y)| vec![x, y])))?;
    }
    emit_json(
        cfg,
        &json!({
            "price": res.price,
            "phi_R": res.phi_r,
            "nodes": res.nodes_used,
            "est_error": res.est_quad_error,
            "discount": res.discount,
            "truncation": res.truncation,
            "K": req.strike,
            "T_mat": req.t_mat,
            "t": req.t,
            "v_t": req.v_t,
            "lambda_t": req.lambda_t,
        }),
    )
}

pub fn charfn(cfg: &RunConfig, args: &CharfnArgs) -> Result<(), CliError> {
    let (_, shift) = admitted(cfg)?;
    let (t, v, lambda) = state(cfg, &args.state);
    let system = RiccatiSystem::new(&cfg.model, &shift, cfg.jump)?;
    let opts = SolveOptions { grid_points: args.grid_points, extra_times: vec![t], ..SolveOptions::default() };
    let engine = CharFn::new(system, shift, opts.clone());
    let value = engine.char_fn(args.phi, args.psi, t, v, lambda)?;
    let sol = system.solve(args.phi, args.psi, &opts)?;
    let rows = || {
        sol.grid.iter().enumerate().map(|(i, &t)| {
            let (g, h, f) = (sol.g_vals[i], sol.h_vals[i], sol.f_vals[i]);
            vec![t, g.re, g.im, h.re, h.im, f.re, f.im]
        })
    };
    const HEADER: &str = "t,re_G,im_G,re_H,im_H,re_F,im_F";
    if let Some(path) = &args.trajectory {
        write_file(path, &csv(HEADER, rows()))?;
    }
    if cfg.output.format == Format::Csv {
        return emit(cfg, &csv(HEADER, rows()));
    }
    let [g, h, f] = sol.eval(t)?;
    emit_json(
        cfg,
        &json!({
            "phi": cx(args.phi),
            "psi": cx(args.psi),
            "t": t,
            "v": v,
            "lambda": lambda,
            "value": cx(value),
            "G": cx(g),
            "H": cx(h),
            "F": cx(f),
            "steps": sol.steps,
        }),
    )
}

pub fn vix(cfg: &RunConfig) -> Result<(), CliError> {
    let (_, shift) = admitted(cfg)?;
    let coeffs = vix_coefficients(&shift, &cfg.model, cfg.jump.mean())?;
    emit_json(cfg, &serde_json::to_value(coeffs).expect("coefficients serialize"))
}

fn estimate_json(e: &Estimate, analytic: f64) -> (Value, Value, f64) {
    (json!(e.mean), json!(e.se), e.z_score(analytic))
}

pub fn simulate(cfg: &RunConfig, args: &SimulateArgs) -> Result<(), CliError> {
    let (_, shift) = admitted(cfg)?;
    let p = cfg.model;
    let mut sim_cfg = cfg.sim_config();
    if let Some(n) = args.paths {
        sim_cfg.n_paths = n;
    }
    if sim_cfg.n_paths == 0 {
        return Err(CliError::usage("n_paths must be positive"));
    }
    let sim = Simulator::new(p, shift, cfg.jump, sim_cfg)?;

    let (horizon, estimate, se, analytic, z) = match args.target {
        Target::Charfn => {
            let phi = args.phi.ok_or_else(|| CliError::usage("--phi required for target charfn"))?;
            let psi = args.psi.unwrap_or(Complex64::new(0.0, 0.0));
            let system = RiccatiSystem::new(&p, &shift, cfg.jump)?;
            let exact = CharFn::new(system, shift, SolveOptions::sparse(&[0.0])).char_fn(phi, psi, 0.0, p.v0, p.lambda0)?;
            let est = sim.char_fn(phi, psi, p.horizon)?;
            let z = est.re.z_score(exact.re).max(est.im.z_score(exact.im));
            (p.horizon, cx(est.mean()), cx(Complex64::new(est.re.se, est.im.se)), cx(exact), z)
        }
        Target::Price => {
            let contract = ContractArgs {
                strike: args.strike,
                maturity: args.maturity,
                phi_r_fraction: None,
                state: StateArgs { t: Some(0.0), v: Some(p.v0), lambda: Some(p.lambda0) },
            };
            let req = request(cfg, &contract)?;
            let ctx = PricingContext::new(p, cfg.jump, shift)?;
            let exact = price_call(&req, &ctx)?.price;
            let est = sim.vix_call(&ctx.coeffs, req.strike, req.t_mat)?;
            let (m, s, z) = estimate_json(&est, exact);
            (req.t_mat, m, s, json!(exact), z)
        }
        Target::ForwardVariance => {
            let t = args.time.unwrap_or(p.horizon);
            if !(t > 0.0 && t <= p.horizon) {
                return Err(CliError::usage("--time must lie in (0, T]"));
            }
            let exact = forward_variance(&shift, &p, cfg.jump.mean(), 0.0, t, p.v0, p.lambda0)?;
            let est = sim.forward_variance(&[t])?[0];
            let (m, s, z) = estimate_json(&est, exact);
            (t, m, s, json!(exact), z)
        }
    };

    if let Some(path) = &args.paths_csv {
        let rows = sim.map_paths(horizon, &[], |s| (s.v_t, s.lambda_t, s.n_events()))?;
        let rows = rows.iter().enumerate().map(|(i, &(v, l, n))| vec![i as f64, v, l, n as f64]);
        let mut text = String::from("path_id,v_T,lambda_T,n_events\n");
        for r in rows {
            let _ = writeln!(text, "{},{:.16e},{:.16e},{}", r[0] as usize, r[1], r[2], r[3] as usize);
        }
        write_file(path, &text)?;
    }

    let target = match args.target {
        Target::Charfn => "charfn",
        Target::Price => "price",
        Target::ForwardVariance => "forward-variance",
    };
    emit_json(
        cfg,
        &json!({
            "target": target,
            "estimate": estimate,
            "se": se,
            "analytic": analytic,
            "z_score": z,
            "horizon": horizon,
            "n_paths": sim_cfg.n_paths,
            "seed": sim_cfg.seed,
        }),
    )
}

pub fn dump_integrand(cfg: &RunConfig, args: &DumpArgs) -> Result<(), CliError> {
    if args.points < 2 || !(args.max_phi_i > 0.0) {
        return Err(CliError::usage("need --points >= 2 and --max-phi-i > 0"));
    }
    let (_, shift) = admitted(cfg)?;
    let req = request(cfg, &args.contract)?;
    let ctx = PricingContext::new(cfg.model, cfg.jump, shift)?;
    let pricer = Pricer::new(&ctx, &req)?;
    let xs: Vec<f64> = (0..args.points).map(|i| args.max_phi_i * i as f64 / (args.points - 1) as f64).collect();
    let (a, b) = (ctx.coeffs.a, ctx.coeffs.b);
    let phis: Vec<(Complex64, Complex64)> = xs
        .iter()
        .map(|&y| {
            let phi = Complex64::new(pricer.phi_r(), y);
            (phi * a, phi * b)
        })
        .collect();
    let f: Vec<Complex64> = pricer
        .charfn()
        .exponent_batch(req.t, req.v_t, req.lambda_t, &phis)?
        .into_iter()
        .map(|e| e.exp())
        .collect();
    let integrand = pricer.integrand_batch(&xs)?;

    if cfg.output.format == Format::Csv {
        let rows = (0..xs.len()).map(|i| vec![xs[i], f[i].re, f[i].im, integrand[i]]);
        return emit(cfg, &csv("phi_I,re_f,im_f,integrand", rows));
    }
    let rows: Vec<Value> = (0..xs.len())
        .map(|i| json!({ "phi_I": xs[i], "re_f": f[i].re, "im_f": f[i].im, "integrand": integrand[i] }))
        .collect();
    emit_json(cfg, &json!({ "phi_R": pricer.phi_r(), "rows": rows }))
}

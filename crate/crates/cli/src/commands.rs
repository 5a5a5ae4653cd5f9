use rayon::prelude::*;
use serde_json::{json, Map, Value};

use lyapexp::meanfield::{mf_lambda, mf_phase_curve, mf_stationary_points, MF_CRITICAL_BETA};
use lyapexp::numerics::QuadratureSpec;
use lyapexp::phase::{
    appendix_b_checks, clausius_clapeyron_check, critical_constants, critical_exponent_fit,
    jump_coefficients_near_critical, locate_critical_point_for, near_critical_points,
    trace_phase_curve, ExactModel, MeanFieldModel, OrderParameterEquation,
};
use lyapexp::simulate::{
    clt_check, estimate_moment, exact_moment, lln_check, simulate_paths, Noise, SimSpec,
};
use lyapexp::variational::{big_f_with, lyapunov};
use lyapexp::{CriticalPoint, ModelParams};

use crate::args::*;
use crate::error::CliError;
use crate::output::{Cell, Report, Table};

type Result<T> = std::result::Result<T, CliError>;

/// Largest `n·paths` a Monte Carlo run may request.
pub const MC_STEP_BUDGET: f64 = 1e10;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn positive(name: &str, grid: &Grid) -> Result<()> {
    match grid.0.iter().find(|v| !(**v > 0.0)) {
        Some(v) => Err(usage(format!("--{name} values must be positive, got {v}"))),
        None => Ok(()),
    }
}

fn non_negative(name: &str, grid: &Grid) -> Result<()> {
    match grid.0.iter().find(|v| !(**v >= 0.0)) {
        Some(v) => Err(usage(format!("--{name} values must be non-negative, got {v}"))),
        None => Ok(()),
    }
}

pub fn lyapunov_table(args: &LyapunovArgs) -> Result<Report> {
    positive("rho", &args.rho)?;
    non_negative("beta", &args.beta)?;
    if args.q == 0 {
        return Err(usage("--q must be at least 1"));
    }
    let q = args.q as f64;
    let points: Vec<(f64, f64)> = args.rho.0.iter().flat_map(|&r| args.beta.0.iter().map(move |&b| (r, b))).collect();
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&(rho, beta)| -> Result<Vec<Cell>> {
            let scaled = ModelParams::new(rho, q * beta)?;
            let r = lyapunov(&scaled)?;
            let mf = mf_lambda(&scaled)?;
            let other = r.coexisting.map(|c| c.slopes);
            Ok(vec![
                rho.into(),
                beta.into(),
                args.q.into(),
                (q * r.lambda).into(),
                r.selected.d.into(),
                r.all_branches.len().into(),
                (q * r.dlambda_drho).into(),
                (q * q * r.dlambda_dbeta).into(),
                (q * (q * beta / 3.0 + rho.ln())).into(),
                (q * (q * beta / 3.0 + rho.ln_1p())).into(),
                (q * mf.lambda_bar).into(),
                other.map(|s| q * s.dlambda_drho).into(),
                other.map(|s| q * q * s.dlambda_dbeta).into(),
            ])
        })
        .collect::<Result<_>>()?;
    let mut t = Table::new(&[
        "rho",
        "beta",
        "q",
        "lambda",
        "d_selected",
        "n_branches",
        "dlambda_drho",
        "dlambda_dbeta",
        "lower_bound",
        "upper_bound",
        "meanfield_lambda",
        "coexisting_dlambda_drho",
        "coexisting_dlambda_dbeta",
    ]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::table("lyapunov", t))
}

pub fn big_f_table(args: &BigFArgs) -> Result<Report> {
    positive("rho", &args.rho)?;
    let spec = QuadratureSpec::new(args.rel_tol, args.abs_tol, args.max_subdivisions)
        .map_err(|e| usage(e.to_string()))?;
    let points: Vec<(f64, f64)> = args
        .rho
        .0
        .iter()
        .flat_map(|&r| args.a.0.iter().filter(move |&&a| a > r.ln()).map(move |&a| (r, a)))
        .collect();
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&(rho, a)| Ok(vec![rho.into(), a.into(), big_f_with(a, rho, &spec)?.into()]))
        .collect::<Result<_>>()?;
    let mut t = Table::new(&["rho", "a", "F"]);
    rows.into_iter().for_each(|r| t.push(r));
    Ok(Report::table("bigf", t))
}

fn critical_json(cp: &CriticalPoint) -> Value {
    json!({
        "rho_c": cp.rho_c,
        "beta_c": cp.beta_c,
        "a_c": cp.a_c,
        "d_c": cp.d_c,
        "inflections": cp.inflections,
    })
}

pub fn phase_table(args: &PhaseArgs) -> Result<(Report, Value)> {
    positive("rho", &args.rho)?;
    let pts = trace_phase_curve(&args.rho.0)?;
    let numeric: Vec<Option<f64>> = if pts.len() >= 3 {
        let interior = clausius_clapeyron_check(&pts)?;
        std::iter::once(None)
            .chain(interior.into_iter().map(|(n, _)| Some(n)))
            .chain(std::iter::once(None))
            .collect()
    } else {
        vec![None; pts.len()]
    };
    let mut columns = vec![
        "rho",
        "beta_cr",
        "inv_beta_cr",
        "a1",
        "a2",
        "d1",
        "d2",
        "jump_drho",
        "jump_dbeta",
        "slope_numeric",
        "slope_formula",
    ];
    if args.mean_field {
        columns.push("meanfield_beta_cr");
    }
    let mut t = Table::new(&columns);
    for (p, num) in pts.iter().zip(numeric) {
        let mut row: Vec<Cell> = vec![
            p.rho.into(),
            p.beta_cr.into(),
            (1.0 / p.beta_cr).into(),
            p.a1.into(),
            p.a2.into(),
            p.d1.into(),
            p.d2.into(),
            p.jump_drho.into(),
            p.jump_dbeta.into(),
            num.into(),
            (-p.jump_drho / p.jump_dbeta).into(),
        ];
        if args.mean_field {
            row.push(mf_phase_curve(p.rho).ok().into());
        }
        t.push(row);
    }
    let cp = locate_critical_point_for::<f64, _>(&ExactModel)?;
    let mut critical = Map::new();
    critical.insert("schema_version".into(), json!("1"));
    critical.insert("critical_point".into(), critical_json(&cp));
    if args.mean_field {
        critical.insert(
            "meanfield_endpoint".into(),
            json!({"rho_c": (-2.0f64).exp(), "beta_c": MF_CRITICAL_BETA}),
        );
    }
    let mut report = Report::table("phase", t);
    report.extra.extend(critical.clone().into_iter().filter(|(k, _)| k != "schema_version"));
    Ok((report, Value::Object(critical)))
}

pub fn critical_table(args: &CriticalArgs) -> Result<Report> {
    let models: Vec<Model> = match args.model {
        Some(m) => vec![m],
        None => vec![Model::Exact, Model::Meanfield],
    };
    let mut t = Table::new(&[
        "model",
        "rho_c",
        "beta_c",
        "a_c",
        "d_c",
        "n_inflections",
        "third_derivative",
        "d_const",
        "gamma_predicted",
        "c1_predicted",
        "c2_predicted",
    ]);
    let mut records = Vec::new();
    for m in models {
        let (name, cp) = match m {
            Model::Exact => ("exact", locate_critical_point_for::<f64, _>(&ExactModel)?),
            Model::Meanfield => ("meanfield", locate_critical_point_for::<f64, _>(&MeanFieldModel)?),
        };
        let consts = match m {
            Model::Exact => Some(critical_constants(&cp)?),
            Model::Meanfield => None,
        };
        t.push(vec![
            name.into(),
            cp.rho_c.into(),
            cp.beta_c.into(),
            cp.a_c.into(),
            cp.d_c.into(),
            cp.inflections.len().into(),
            consts.map(|c| c.third_derivative).into(),
            consts.map(|c| c.d_const).into(),
            consts.map(|c| c.gamma).into(),
            consts.map(|c| c.c1).into(),
            consts.map(|c| c.c2).into(),
        ]);
        let mut rec = critical_json(&cp);
        rec.as_object_mut().expect("object").insert("model".into(), json!(name));
        if let Some(c) = consts {
            rec.as_object_mut().expect("object").insert("constants".into(), serde_json::to_value(c)?);
        }
        records.push(rec);
    }
    let mut body = Map::new();
    body.insert("critical_points".into(), Value::Array(records));
    Ok(Report {
        command: "critical",
        table: t,
        body: Some(body),
        extra: Map::new(),
    })
}

pub fn meanfield_table(args: &MeanFieldArgs) -> Result<Report> {
    positive("rho", &args.rho)?;
    non_negative("beta", &args.beta)?;
    let mut t = Table::new(&[
        "rho",
        "beta",
        "a_star",
        "a1",
        "a2",
        "lambda_bar",
        "delta",
        "on_curve",
        "n_stationary",
    ]);
    for &rho in &args.rho.0 {
        for &beta in &args.beta.0 {
            let params = ModelParams::new(rho, beta)?;
            let r = mf_lambda(&params)?;
            let n = mf_stationary_points(&params)?.len();
            t.push(vec![
                rho.into(),
                beta.into(),
                r.a_star.into(),
                r.branch_a1.into(),
                r.branch_a2.into(),
                r.lambda_bar.into(),
                r.delta.into(),
                r.on_curve.into(),
                n.into(),
            ]);
        }
    }
    Ok(Report::table("meanfield", t))
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn simulate_report(args: &SimulateArgs, seed: u64) -> Result<Report> {
    let noise = match args.noise {
        NoiseKind::None => Noise::None,
        NoiseKind::Constant => Noise::Constant { value: args.noise_param },
        NoiseKind::Exponential => Noise::Exponential { mean: args.noise_param },
        NoiseKind::Uniform => Noise::Uniform { upper: args.noise_param },
    };
    let spec = SimSpec::fixed_beta(args.rho, args.beta, args.n, args.paths, seed)?
        .with_q(args.q)
        .with_x0(args.x0)
        .with_noise(noise);
    spec.validate()?;
    let needs_paths = !args.exact || args.lln || args.clt || args.per_path;
    if needs_paths && (args.n as f64) * (args.paths as f64) > MC_STEP_BUDGET {
        return Err(lyapexp::Error::Budget(format!(
            "n·paths = {} exceeds the Monte Carlo budget {MC_STEP_BUDGET:e}",
            args.n as f64 * args.paths as f64
        ))
        .into());
    }
    let estimate = if args.exact { exact_moment(&spec)? } else { estimate_moment(&spec)? };
    let method = serde_json::to_value(estimate.method)?;
    let method_name = method.as_str().unwrap_or_default().to_string();

    let mut t = Table::new(&["section", "n", "quantity", "value"]);
    let n = args.n;
    t.push(vec!["moment".into(), n.into(), "method".into(), method_name.as_str().into()]);
    t.push(vec!["moment".into(), n.into(), "q".into(), args.q.into()]);
    t.push(vec!["moment".into(), n.into(), "implied_beta".into(), spec.implied_beta().into()]);
    t.push(vec!["moment".into(), n.into(), "log_moment".into(), estimate.log_moment.into()]);
    t.push(vec!["moment".into(), n.into(), "stderr_log".into(), estimate.stderr_log.into()]);
    t.push(vec!["moment".into(), n.into(), "paths_used".into(), estimate.paths_used.into()]);

    let mut body = Map::new();
    body.insert("parameters".into(), serde_json::to_value(spec)?);
    body.insert("implied_beta".into(), json!(spec.implied_beta()));
    body.insert("method".into(), method);
    body.insert("log_moment".into(), json!(estimate.log_moment));
    body.insert("stderr_log".into(), json!(estimate.stderr_log));
    body.insert("paths_used".into(), json!(estimate.paths_used));

    if args.lln {
        let rep = lln_check(&spec)?;
        for r in &rep.rungs {
            for (k, v) in [("mean", r.mean), ("stderr", r.stderr), ("deviation", r.deviation), ("tolerance", r.tolerance)] {
                t.push(vec!["lln".into(), r.n.into(), k.into(), v.into()]);
            }
            t.push(vec!["lln".into(), r.n.into(), "within".into(), r.within.into()]);
        }
        t.push(vec!["lln".into(), n.into(), "target".into(), rep.target.into()]);
        t.push(vec!["lln".into(), n.into(), "shrinking".into(), rep.shrinking.into()]);
        body.insert("lln".into(), serde_json::to_value(&rep)?);
    }
    if args.clt {
        let rep = clt_check(&spec)?;
        for (k, v) in [
            ("mean", rep.mean),
            ("variance", rep.variance),
            ("target_variance", rep.target_variance),
            ("relative_error", rep.relative_error),
            ("qq_max_deviation", rep.qq_max_deviation),
        ] {
            t.push(vec!["clt".into(), n.into(), k.into(), v.into()]);
        }
        body.insert("clt".into(), serde_json::to_value(rep)?);
    }
    if args.per_path {
        let batch = simulate_paths(&spec)?;
        let mut logs: Vec<f64> = batch.log_x().into_iter().filter(|v| v.is_finite()).collect();
        logs.sort_by(f64::total_cmp);
        let mut summary = Map::new();
        summary.insert("flagged".into(), json!(batch.flagged.len()));
        t.push(vec!["per_path".into(), n.into(), "flagged".into(), batch.flagged.len().into()]);
        if !logs.is_empty() {
            for (k, p) in [("min", 0.0), ("q05", 0.05), ("q25", 0.25), ("median", 0.5), ("q75", 0.75), ("q95", 0.95), ("max", 1.0)] {
                let v = quantile(&logs, p);
                summary.insert(format!("log_x_{k}"), json!(v));
                t.push(vec!["per_path".into(), n.into(), format!("log_x_{k}").as_str().into(), v.into()]);
            }
        }
        body.insert("per_path".into(), Value::Object(summary));
    }
    Ok(Report {
        command: "simulate",
        table: t,
        body: Some(body),
        extra: Map::new(),
    })
}

fn model_fit<M: OrderParameterEquation<f64>>(
    model: &M,
    ts: &[f64],
    window: (f64, f64),
) -> Result<(CriticalPoint, lyapexp::phase::PowerFit, lyapexp::phase::JumpFit)> {
    let cp = locate_critical_point_for(model)?;
    let near = near_critical_points(model, &cp, ts)?;
    let fit = critical_exponent_fit(&near, &cp, window)?;
    let jumps = jump_coefficients_near_critical(&near, &cp, window)?;
    Ok((cp, fit, jumps))
}

pub fn exponent_report(args: &ExponentArgs) -> Result<Report> {
    let (lo, hi) = (args.window_lo, args.window_hi);
    if !(lo > 0.0 && hi.is_finite() && lo < hi && hi < 1.0) {
        return Err(usage(format!("fit window must satisfy 0 < window-lo < window-hi < 1, got [{lo}, {hi}]")));
    }
    if args.points < 3 {
        return Err(usage("--points must be at least 3"));
    }
    let ts: Vec<f64> = (0..args.points)
        .map(|k| (lo.ln() + (hi / lo).ln() * k as f64 / (args.points - 1) as f64).exp())
        .collect();
    let window = (lo, hi);
    let (name, (cp, fit, jumps), predicted) = match args.model {
        Model::Exact => {
            let out = model_fit(&ExactModel, &ts, window)?;
            let c = critical_constants(&out.0)?;
            let predicted = json!({
                "alpha": 0.5,
                "gamma": c.gamma,
                "D_c": c.d_const,
                "c1": c.c1,
                "c2": c.c2,
                "third_derivative": c.third_derivative,
            });
            ("exact", out, predicted)
        }
        Model::Meanfield => {
            let out = model_fit(&MeanFieldModel, &ts, window)?;
            // Δ ≈ √3·(β/6 − 1)^{1/2}; Δ(∂λ̄/∂β) = Δ/3, Δ(∂λ̄/∂ρ) = Δ/ρ_c.
            let g = 0.5f64.sqrt();
            let predicted = json!({
                "alpha": 0.5,
                "gamma": g,
                "c1": g / 3.0,
                "c2": g * 2.0f64.exp(),
            });
            ("meanfield", out, predicted)
        }
    };
    let mut t = Table::new(&["quantity", "value"]);
    let rows: [(&str, Cell); 12] = [
        ("model", name.into()),
        ("rho_c", cp.rho_c.into()),
        ("beta_c", cp.beta_c.into()),
        ("alpha", fit.alpha.into()),
        ("gamma", fit.gamma.into()),
        ("r_squared", fit.r_squared.into()),
        ("points_used", fit.points_used.into()),
        ("window_lo", lo.into()),
        ("window_hi", hi.into()),
        ("c1", jumps.c1().into()),
        ("c2", jumps.c2().into()),
        ("gamma_predicted", predicted["gamma"].as_f64().into()),
    ];
    for (k, v) in rows {
        t.push(vec![k.into(), v]);
    }
    let mut body = Map::new();
    body.insert("model".into(), json!(name));
    body.insert("critical_point".into(), critical_json(&cp));
    body.insert("alpha".into(), json!(fit.alpha));
    body.insert("gamma".into(), json!(fit.gamma));
    body.insert("r_squared".into(), json!(fit.r_squared));
    body.insert("points_used".into(), json!(fit.points_used));
    body.insert("window".into(), json!([lo, hi]));
    body.insert("c1".into(), json!(jumps.c1()));
    body.insert("c2".into(), json!(jumps.c2()));
    body.insert("jump_fits".into(), serde_json::to_value(jumps)?);
    body.insert("predicted".into(), predicted);
    Ok(Report {
        command: "exponent",
        table: t,
        body: Some(body),
        extra: Map::new(),
    })
}

pub fn appendix_b_table(args: &AppendixBArgs) -> Result<Report> {
    positive("a", &args.a)?;
    positive("rho", &args.rho)?;
    let mut t = Table::new(&["a", "rho", "j", "lower", "upper", "expansion", "scaled_remainder", "within_bounds"]);
    let mut hold = true;
    let mut worst = 0.0f64;
    for &rho in &args.rho.0 {
        let rep = appendix_b_checks(&args.a.0, rho)?;
        hold &= rep.bounds_hold;
        worst = worst.max(rep.max_scaled_remainder);
        for r in rep.rows {
            let slack = 1e-12 * r.j.abs().max(1.0);
            let within = r.lower <= r.j + slack && r.j <= r.upper + slack;
            t.push(vec![
                r.a.into(),
                r.rho.into(),
                r.j.into(),
                r.lower.into(),
                r.upper.into(),
                r.expansion.into(),
                r.scaled_remainder.into(),
                within.into(),
            ]);
        }
    }
    let mut report = Report::table("appendixb", t);
    report.extra.insert("bounds_hold".into(), json!(hold));
    report.extra.insert("max_scaled_remainder".into(), json!(worst));
    Ok(report)
}

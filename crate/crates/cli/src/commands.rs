use std::fmt::Write as _;

use bindet::closedform::{closed_form_fim, taylor_model_at, ClosedFormError};
use bindet::detection::{detection_probability, detection_probability_derivatives};
use bindet::fisher::{
    expected_f22, expected_fim_2d, expected_fim_quadrature, f22_r_domain, tau_grid, x_breve,
};
use bindet::montecarlo::{mse_report, run_campaign, MonteCarloError, TrialOutcome};
use bindet::specfun::{marcum_q, marcum_q_da, marcum_q_daa};
use bindet::{QuadratureSpec, SimConfig};

use crate::config::{num, Config, MethodKind};
use crate::CliError;

/// Rendered output plus the exit code to report after writing it.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

pub const CRB_COLUMNS: &str = "tau,alpha,method,m,F11,F22,crb_P,crb_x,quality_flag";
pub const TRIAL_COLUMNS: &str = "trial,n_sensors,n_detections,P_hat,x_hat,y_hat,converged,nll";
pub const SUMMARY_COLUMNS: &str =
    "mse_P,mse_x,mse_y,crb_P,crb_x,ratio_P,ratio_x,ratio_y,n_used,n_failed";

fn closed_form_alpha_ok(alpha: f64) -> bool {
    alpha == 2.0 || alpha == 4.0
}

pub fn crb(cfg: &Config) -> Result<Output, CliError> {
    let det = cfg.detector()?;
    let field = cfg.field()?;
    if cfg.has(MethodKind::ClosedForm) && !closed_form_alpha_ok(cfg.alpha) {
        return Err(CliError::Config(format!(
            "{}; use methods=quadrature",
            ClosedFormError::UnsupportedAlpha(cfg.alpha)
        )));
    }
    let taus = match cfg.sweep {
        Some((a, b, s)) => tau_grid(a, b, s),
        None => vec![cfg.tau],
    };
    let quad = QuadratureSpec::default();
    let m = cfg.order();
    let mut out = cfg.header("crb", None);
    out.push_str(CRB_COLUMNS);
    out.push('\n');
    let mut fallback = false;
    for &tau in &taus {
        let d = det.with_tau(tau);
        for &method in &cfg.methods {
            let (name, m_col, r, flag) = match method {
                MethodKind::Quadrature => {
                    let r = expected_fim_quadrature(&d, cfg.power, &field, &quad)?;
                    ("quadrature", String::new(), r, "ok".to_string())
                }
                MethodKind::ClosedForm => match closed_form_fim(&d, cfg.power, &field, m) {
                    Ok((r, q)) => ("closed-form", m.to_string(), r, q.to_string()),
                    Err(ClosedFormError::ModelInvalid { .. }) => {
                        fallback = true;
                        let r = expected_fim_quadrature(&d, cfg.power, &field, &quad)?;
                        (
                            "quadrature",
                            m.to_string(),
                            r,
                            "fallback:model-invalid".to_string(),
                        )
                    }
                    Err(e) => return Err(CliError::Compute(e.to_string())),
                },
            };
            let _ = writeln!(
                out,
                "{},{},{name},{m_col},{},{},{},{},{flag}",
                num(tau),
                num(cfg.alpha),
                num(r.f11),
                num(r.f22),
                num(r.crb_p),
                num(r.crb_x)
            );
        }
    }
    Ok(Output {
        text: out,
        code: if fallback { 3 } else { 0 },
    })
}

pub fn simulate(cfg: &Config) -> Result<Output, CliError> {
    let det = cfg.detector()?;
    let field = cfg.field()?;
    let truth = cfg.truth()?;
    let config_err = |e: MonteCarloError| CliError::Config(e.to_string());
    let mut sim = SimConfig::new(field, det, truth, cfg.trials, cfg.seed).map_err(config_err)?;
    if let Some(r) = cfg.region_radius {
        sim = sim.with_region_radius(r).map_err(config_err)?;
    }
    let crb = expected_fim_quadrature(&det, cfg.power, &field, &QuadratureSpec::default())?;
    let results = run_campaign(&sim);

    let mut out = cfg.header("simulate", Some(sim.region_radius));
    let _ = writeln!(out, "# expected_sensors = {}", num(sim.expected_sensors()));
    out.push_str(TRIAL_COLUMNS);
    out.push('\n');
    for r in &results {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.trial,
            r.n_sensors,
            r.n_detections,
            num(r.theta_hat.power),
            num(r.theta_hat.x),
            num(r.theta_hat.y),
            r.converged,
            num(r.neg_log_lik)
        );
    }
    let outcomes = [
        TrialOutcome::Converged,
        TrialOutcome::IterationCap,
        TrialOutcome::NoDetections,
        TrialOutcome::Failed,
    ]
    .map(|o| {
        format!(
            "{}={}",
            o.as_str(),
            results.iter().filter(|r| r.outcome == o).count()
        )
    });
    let _ = writeln!(out, "# outcomes: {}", outcomes.join(", "));
    let _ = writeln!(out, "# summary");
    out.push_str(SUMMARY_COLUMNS);
    out.push('\n');
    let code = match mse_report(&results, &truth) {
        Ok(rep) => {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                num(rep.mse_p),
                num(rep.mse_x),
                num(rep.mse_y),
                num(crb.crb_p),
                num(crb.crb_x),
                num(rep.mse_p / crb.crb_p),
                num(rep.mse_x / crb.crb_x),
                num(rep.mse_y / crb.crb_y),
                rep.n_used,
                rep.n_failed
            );
            0
        }
        Err(MonteCarloError::AllTrialsFailed(n)) => {
            let nan = num(f64::NAN);
            let _ = writeln!(
                out,
                "{nan},{nan},{nan},{},{},{nan},{nan},{nan},0,{n}",
                num(crb.crb_p),
                num(crb.crb_x)
            );
            4
        }
        Err(e) => return Err(CliError::Compute(e.to_string())),
    };
    Ok(Output { text: out, code })
}

struct Check {
    pass: bool,
    name: String,
    detail: String,
}

pub fn check(cfg: &Config) -> Result<Output, CliError> {
    let det = cfg.detector()?;
    let field = cfg.field()?;
    let p = cfg.power;
    let t = det.t();
    let rb = field.r_breve();
    let xb = x_breve(&det, p, &field);
    let mut checks = Vec::new();
    let mut add = |pass: bool, name: &str, detail: String| {
        checks.push(Check {
            pass,
            name: name.to_string(),
            detail,
        })
    };

    add(
        rb.is_finite() && rb > 0.0 && xb.is_finite(),
        "r_breve",
        format!(
            "r_breve = {}, x_breve = {}, t = {}",
            num(rb),
            num(xb),
            num(t)
        ),
    );

    let mut worst_r: f64 = 0.0;
    let mut worst_p: f64 = 0.0;
    for r in [rb, 2.0 * rb, 4.0 * rb] {
        let (dr, dp) = detection_probability_derivatives(&det, p, r)?;
        let pd = |pw: f64, rr: f64| detection_probability(&det, pw, rr);
        let h = 1e-5 * r;
        let fd_r = (pd(p, r + h)? - pd(p, r - h)?) / (2.0 * h);
        let h = 1e-5 * p;
        let fd_p = (pd(p + h, r)? - pd(p - h, r)?) / (2.0 * h);
        worst_r = worst_r.max((dr - fd_r).abs() / dr.abs().max(1e-12));
        worst_p = worst_p.max((dp - fd_p).abs() / dp.abs().max(1e-12));
    }
    add(
        worst_r <= 1e-5 && worst_p <= 1e-5,
        "detection derivatives",
        format!(
            "max relative error vs central differences at r_breve x (1, 2, 4): dPD/dr {worst_r:.2e}, dPD/dP {worst_p:.2e} (<= 1e-5)"
        ),
    );

    let q = |a: f64| marcum_q(a.abs(), t);
    let h = 1e-5;
    let fd1 = (q(xb + h)? - q(xb - h)?) / (2.0 * h);
    let h2 = 1e-4;
    let fd2 = (q(xb + h2)? - 2.0 * q(xb)? + q(xb - h2)?) / (h2 * h2);
    let e1 = (marcum_q_da(xb, t)? - fd1).abs();
    let e2 = (marcum_q_daa(xb, t)? - fd2).abs();
    add(
        e1 <= 1e-6 && e2 <= 1e-4,
        "marcum derivatives",
        format!(
            "at (x_breve, t): dQ/da error {e1:.2e} (<= 1e-6), d2Q/da2 error {e2:.2e} (<= 1e-4)"
        ),
    );

    let quad = QuadratureSpec::default();
    let fim = expected_fim_quadrature(&det, p, &field, &quad)?;
    let r_dom = f22_r_domain(&det, p, &field, &quad)?;
    let x_dom = expected_f22(&det, p, &field, &quad)?;
    let rel = (r_dom - x_dom).abs() / x_dom;
    add(
        rel <= 1e-7,
        "F22 substitution",
        format!("distance-domain vs x-domain F22 relative difference {rel:.2e} (<= 1e-7)"),
    );

    let full = expected_fim_2d(&det, p, &field, &quad.with_rel_tol(1e-8))?;
    let off = full[0][1].abs().max(full[0][2].abs()).max(full[1][2].abs()) / full[1][1];
    let d11 = (full[0][0] - fim.f11).abs() / fim.f11;
    let d22 = (full[1][1] - fim.f22).abs() / fim.f22;
    let d33 = (full[2][2] - fim.f33).abs() / fim.f33;
    let diag = d11.max(d22).max(d33);
    add(
        off <= 1e-10 && diag <= 1e-6,
        "diagonality",
        format!(
            "two-dimensional FIM: max |off-diagonal| / F22 = {off:.2e} (<= 1e-10), diagonal vs one-dimensional {diag:.2e} (<= 1e-6)"
        ),
    );

    if cfg.has(MethodKind::ClosedForm) {
        let m = cfg.order();
        match closed_form_fim(&det, p, &field, m) {
            Ok((_, quality)) => {
                let f2 = taylor_model_at(xb, t).map(|tm| tm.f2).unwrap_or(f64::NAN);
                add(
                    quality.is_clean(),
                    "closed form",
                    format!(
                        "m = {m}, f2 = {f2:.4}, flags {quality}, deviation from 16-point estimate {:.2}%",
                        100.0 * quality.deviation
                    ),
                );
            }
            Err(e) => add(false, "closed form", e.to_string()),
        }
    }

    let mut out = cfg.header("check", None);
    let failed = checks.iter().filter(|c| !c.pass).count();
    for c in &checks {
        let _ = writeln!(
            out,
            "{} {}: {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    let _ = writeln!(out, "# {} checks, {failed} failed", checks.len());
    Ok(Output {
        text: out,
        code: if failed == 0 { 0 } else { 1 },
    })
}

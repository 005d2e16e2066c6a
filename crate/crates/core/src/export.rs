//! File output: CSV and JSON writers shared by the CLI.
//!
//! Every file starts with a comment line carrying the fully resolved
//! configuration, and all floats are printed with 17 significant digits so
//! identical inputs produce byte-identical files.

use crate::algebra::{amplitude, ModelParams};
use crate::analysis::{OrbitMetrics, SweepResult};
use crate::branch::{Branch, Segment};
use crate::profiles::{evaluate_f, ParametricProfile, Parametrisation, VerificationReport};
use crate::simulator::Trajectory;
use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

/// 17 significant digits, locale-free.
pub fn fmt_f64(x: f64) -> String {
    if x.is_infinite() {
        return if x > 0.0 { "inf".to_string() } else { "-inf".to_string() };
    }
    if x.is_nan() {
        return "nan".to_string();
    }
    format!("{x:.16e}")
}

/// `# key=value ...` header line embedded in every output file.
pub fn config_line(params: &ModelParams, extra: &[(&str, String)]) -> String {
    let mut line = format!(
        "# eps={} K1={} K2={} a1={} a2={} c={}",
        fmt_f64(params.eps),
        fmt_f64(params.k1),
        fmt_f64(params.k2),
        fmt_f64(params.a1),
        fmt_f64(params.a2),
        fmt_f64(params.c),
    );
    for (k, v) in extra {
        let _ = write!(line, " {k}={v}");
    }
    line
}

pub fn write_text(path: &Path, content: &str) -> io::Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    fs::write(path, content)
}

/// Branch samples: one row per sampled K1 per leg.
pub fn branch_csv(
    params: &ModelParams,
    branch: &Branch,
    samples_per_leg: usize,
    k1_cap: f64,
    config: &str,
) -> String {
    let mut out = String::new();
    out.push_str(config);
    out.push('\n');
    out.push_str("kind,n,m,K1,T,T1,T2,theta,amplitude,period\n");
    for seg in &branch.segments {
        let leg = match seg {
            Segment::Leg(l) => l,
            Segment::Gap { .. } => continue,
        };
        let hi = if leg.k1_hi.is_finite() { leg.k1_hi } else { k1_cap.max(leg.k1_lo + 1.0) };
        let lo = leg.k1_lo;
        // Sample strictly inside: the endpoints are condition boundaries.
        let n = samples_per_leg.max(2);
        for i in 0..n {
            let frac = (i as f64 + 0.5) / n as f64;
            let k1 = lo + (hi - lo) * frac;
            let p = params.with_k1(k1);
            let sol = match crate::algebra::construct(&p, leg.index, leg.kind) {
                Ok(s) => s,
                Err(_) => continue,
            };
            let amp = amplitude(&sol, &p);
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                leg.kind.label(),
                leg.index.n,
                leg.index.m,
                fmt_f64(k1),
                fmt_f64(sol.period),
                fmt_f64(sol.t1),
                fmt_f64(sol.t2),
                fmt_f64(sol.theta),
                fmt_f64(amp),
                fmt_f64(sol.period),
            );
        }
    }
    out
}

pub fn bifurcation_json(params: &ModelParams, branch: &Branch, config: &str) -> String {
    let points: Vec<serde_json::Value> = branch
        .points
        .iter()
        .map(|pt| {
            serde_json::json!({
                "kind": format!("{:?}", pt.kind),
                "K1": pt.k1,
                "participants": pt.participants.iter().map(|(k, n, m)| {
                    serde_json::json!({"kind": k.label(), "n": n, "m": m})
                }).collect::<Vec<_>>(),
            })
        })
        .collect();
    let gaps: Vec<serde_json::Value> = branch
        .segments
        .iter()
        .filter_map(|s| match s {
            Segment::Gap { k1_lo, k1_hi } => {
                Some(serde_json::json!({"K1_lo": k1_lo, "K1_hi": k1_hi}))
            }
            _ => None,
        })
        .collect();
    let doc = serde_json::json!({
        "config": config,
        "params": params,
        "bifurcation_points": points,
        "gaps": gaps,
    });
    serde_json::to_string_pretty(&doc).expect("branch JSON serialises")
}

/// Profile samples: columns mu,t,u.
pub fn profile_csv(profile: &ParametricProfile, per_piece: usize, config: &str) -> String {
    let mut out = String::new();
    out.push_str(config);
    out.push('\n');
    out.push_str("mu,t,u\n");
    let n = per_piece.max(2);
    for w in profile.breakpoints.windows(2) {
        for i in 0..n {
            let mu = w[0].mu + (w[1].mu - w[0].mu) * i as f64 / (n - 1) as f64;
            let _ = writeln!(
                out,
                "{},{},{}",
                fmt_f64(mu),
                fmt_f64(profile.t_at(mu)),
                fmt_f64(profile.u_at(mu))
            );
        }
    }
    out
}

/// Parametrisation samples: columns eta,mu0,mu1,mu2,F (mu2 empty when the
/// solution has a single delay).
pub fn parametrisation_csv(
    profile: &ParametricProfile,
    parm: &Parametrisation,
    per_piece: usize,
    config: &str,
) -> String {
    let mut out = String::new();
    out.push_str(config);
    out.push('\n');
    out.push_str("eta,mu0,mu1,mu2,F\n");
    let n = per_piece.max(2);
    for piece in &parm.pieces {
        for i in 0..n {
            let eta = piece.eta_lo + (piece.eta_hi - piece.eta_lo) * i as f64 / (n - 1) as f64;
            let mu2 = if parm.delays() > 1 { fmt_f64(parm.mu(2, eta)) } else { String::new() };
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt_f64(eta),
                fmt_f64(parm.mu(0, eta)),
                fmt_f64(parm.mu(1, eta)),
                mu2,
                fmt_f64(evaluate_f(profile, parm, eta))
            );
        }
    }
    out
}

pub fn verification_json(
    sol: &crate::algebra::SingularSolution,
    report: &VerificationReport,
    config: &str,
) -> String {
    let doc = serde_json::json!({
        "config": config,
        "solution": sol,
        "report": report,
    });
    serde_json::to_string_pretty(&doc).expect("verification JSON serialises")
}

/// Trajectory samples: columns t,u.
pub fn trajectory_csv(traj: &Trajectory, config: &str) -> String {
    let mut out = String::new();
    out.push_str(config);
    out.push('\n');
    out.push_str("t,u\n");
    for &(t, u) in &traj.samples {
        let _ = writeln!(out, "{},{}", fmt_f64(t), fmt_f64(u));
    }
    out
}

pub fn metrics_json(metrics: &OrbitMetrics, config: &str) -> String {
    let doc = serde_json::json!({
        "config": config,
        "K1": metrics.k1,
        "eps": metrics.eps,
        "period": metrics.period,
        "amplitude": metrics.amplitude,
        "modality": metrics.modality,
        "converged": metrics.converged,
    });
    serde_json::to_string_pretty(&doc).expect("metrics JSON serialises")
}

/// Sweep rows: direction,K1,period,amplitude,modality,converged.
pub fn sweep_csv(results: &[SweepResult], config: &str) -> String {
    let mut out = String::new();
    out.push_str(config);
    out.push('\n');
    out.push_str("direction,K1,period,amplitude,modality,converged\n");
    for res in results {
        let dir = match res.direction {
            crate::analysis::SweepDirection::Up => "up",
            crate::analysis::SweepDirection::Down => "down",
        };
        for m in &res.samples {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                dir,
                fmt_f64(m.k1),
                fmt_f64(m.period),
                fmt_f64(m.amplitude),
                m.modality,
                m.converged
            );
        }
    }
    out
}

/// Cusp point as JSON.
pub fn cusp_json(k2: f64, n: u32, m: u32, a: f64, k1: f64) -> String {
    let doc = serde_json::json!({
        "K2": k2, "n": n, "m": m, "A": a, "K1": k1,
    });
    serde_json::to_string_pretty(&doc).expect("cusp JSON serialises")
}

//! Orbit metrics and warm-started parameter sweeps.
//!
//! The period comes from upward crossings of the mid-level section
//! `u = (max+min)/2`: crossings are far better conditioned than minima,
//! which flatten near the turning point. Orbits with several teeth per
//! period (including period-doubled ones) cross the section more than once
//! per period with unequal spacings, so crossings are grouped: the smallest
//! block size whose block sums repeat to within the convergence tolerance
//! determines the period. Block size one reproduces the plain
//! mean-spacing rule.

use crate::algebra::{amplitude, ModelParams, SingularSolution, SolutionKind};
use crate::simulator::{HistorySpec, Integrator, SimError, StepControl, Trajectory};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AnalysisError {
    /// Fewer than three section crossings: the trajectory decayed to
    /// equilibrium or never oscillated.
    #[error("no oscillation: {crossings} section crossings in the analysis window")]
    NoOscillation { crossings: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// Metrics of one (putative) periodic orbit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct OrbitMetrics {
    pub k1: f64,
    pub eps: f64,
    pub period: f64,
    /// max - min of u over the last full period.
    pub amplitude: f64,
    /// Local maxima per period with prominence at least 1% of amplitude.
    pub modality: usize,
    /// Crossing spacings repeated to better than 1e-3 relative.
    pub converged: bool,
}

/// Relative spread of crossing spacings below which the orbit counts as
/// converged.
pub const CONVERGENCE_TOL: f64 = 1e-3;
/// Peak prominence threshold as a fraction of amplitude: separates genuine
/// sawteeth from integration wiggle.
pub const PROMINENCE_FRAC: f64 = 0.01;
/// Largest crossing-group size tried when the plain spacing sequence does
/// not repeat (covers period-doubled orbits with several teeth).
const MAX_GROUP: usize = 8;

/// Extracts period, amplitude and modality from the trailing
/// `tail_fraction` of the trajectory.
pub fn extract(traj: &Trajectory, tail_fraction: f64) -> Result<OrbitMetrics, AnalysisError> {
    extract_from_samples(&traj.samples, tail_fraction, f64::NAN, f64::NAN)
}

/// As [`extract`], with the parameter stamp filled in.
pub fn extract_with(
    traj: &Trajectory,
    tail_fraction: f64,
    params: &ModelParams,
) -> Result<OrbitMetrics, AnalysisError> {
    extract_from_samples(&traj.samples, tail_fraction, params.k1, params.eps)
}

fn extract_from_samples(
    samples: &[(f64, f64)],
    tail_fraction: f64,
    k1: f64,
    eps: f64,
) -> Result<OrbitMetrics, AnalysisError> {
    let (t0, t_end) = match (samples.first(), samples.last()) {
        (Some(&(a, _)), Some(&(b, _))) if b > a => (a, b),
        _ => return Err(AnalysisError::NoOscillation { crossings: 0 }),
    };
    let t_start = t_end - tail_fraction.clamp(0.05, 1.0) * (t_end - t0);
    let from = samples.partition_point(|&(t, _)| t < t_start);
    let tail = &samples[from..];
    if tail.len() < 8 {
        return Err(AnalysisError::NoOscillation { crossings: 0 });
    }
    let (u_min, u_max) = tail
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, u)| (lo.min(u), hi.max(u)));
    let mid = 0.5 * (u_min + u_max);
    let crossings = upward_crossings(tail, mid);
    if crossings.len() < 3 {
        return Err(AnalysisError::NoOscillation { crossings: crossings.len() });
    }
    let (p0, conv0) = period_from_crossings(&crossings);

    // The crossing repeat can be a submultiple of the true period: a
    // period-doubled orbit with nearly congruent halves crosses the section
    // on an almost even grid while its teeth heights cycle with the full
    // period. Promote to the smallest multiple at which the peak-height
    // sequence repeats.
    let amp_tail = u_max - u_min;
    let peaks = peak_sequence(tail, PROMINENCE_FRAC * amp_tail);
    let mut period = p0;
    let mut converged = conv0;
    if conv0 && peaks.len() >= 2 {
        converged = false;
        for mult in 1..=8u32 {
            let per = p0 * mult as f64;
            if 2.0 * per > t_end - tail[0].0 {
                break;
            }
            if heights_repeat(&peaks, t_end, per, PROMINENCE_FRAC * amp_tail) {
                period = per;
                converged = true;
                break;
            }
        }
    }

    // Amplitude and modality over one full interior period (the last peak
    // of the tail has truncated prominence, so step one period back).
    let (win_lo, win_hi) = if t_end - 2.0 * period >= tail[0].0 {
        (t_end - 2.0 * period, t_end - period)
    } else {
        (t_end - period, t_end)
    };
    let wfrom = tail.partition_point(|&(t, _)| t < win_lo);
    let wto = tail.partition_point(|&(t, _)| t < win_hi);
    let window = &tail[wfrom..wto.max(wfrom + 2).min(tail.len())];
    let (a_min, a_max) = window
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, u)| (lo.min(u), hi.max(u)));
    let amplitude = a_max - a_min;
    let modality = peaks
        .iter()
        .filter(|&&(t, _)| t >= win_lo && t < win_hi)
        .count();
    Ok(OrbitMetrics { k1, eps, period, amplitude, modality: modality.max(1), converged })
}

/// Times and heights of tail local maxima with prominence above
/// `threshold`.
fn peak_sequence(tail: &[(f64, f64)], threshold: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for i in 1..tail.len() - 1 {
        let (t, u) = tail[i];
        if u > tail[i - 1].1 && u >= tail[i + 1].1 {
            // Prominence within the tail: descend both ways until a sample
            // above the peak appears.
            let mut left_min = u;
            let mut j = i;
            while j > 0 && tail[j - 1].1 <= u {
                j -= 1;
                left_min = left_min.min(tail[j].1);
            }
            let mut right_min = u;
            let mut j = i;
            while j + 1 < tail.len() && tail[j + 1].1 <= u {
                j += 1;
                right_min = right_min.min(tail[j].1);
            }
            if u - left_min.max(right_min) >= threshold {
                out.push((t, u));
            }
        }
    }
    out
}

/// True when every peak in the last `per` of the tail has a matching peak
/// one `per` earlier with height within `tol`.
fn heights_repeat(peaks: &[(f64, f64)], t_end: f64, per: f64, tol: f64) -> bool {
    let spacing = if peaks.len() >= 2 {
        (peaks.last().unwrap().0 - peaks[0].0) / (peaks.len() - 1) as f64
    } else {
        per
    };
    let t_tol = (0.1 * per).min(0.45 * spacing);
    let recent: Vec<&(f64, f64)> =
        peaks.iter().filter(|&&(t, _)| t >= t_end - per && t < t_end).collect();
    if recent.is_empty() {
        return false;
    }
    for &&(t, h) in &recent {
        let target = t - per;
        let found = peaks
            .iter()
            .filter(|&&(tc, _)| (tc - target).abs() <= t_tol)
            .min_by(|a, b| (a.0 - target).abs().total_cmp(&(b.0 - target).abs()));
        match found {
            Some(&(_, hc)) if (hc - h).abs() <= tol => {}
            _ => return false,
        }
    }
    true
}

fn upward_crossings(samples: &[(f64, f64)], level: f64) -> Vec<f64> {
    let mut out = Vec::new();
    for w in samples.windows(2) {
        let (t0, u0) = w[0];
        let (t1, u1) = w[1];
        if u0 < level && u1 >= level {
            out.push(t0 + (t1 - t0) * (level - u0) / (u1 - u0));
        }
    }
    out
}

/// Mean repeat time of the crossing sequence. Group sizes 1..=MAX_GROUP are
/// tried in order; the first whose non-overlapping block sums have relative
/// spread below `CONVERGENCE_TOL` over the last five blocks wins.
fn period_from_crossings(crossings: &[f64]) -> (f64, bool) {
    let n = crossings.len();
    for group in 1..=MAX_GROUP {
        let blocks = (n - 1) / group;
        if blocks < 5 {
            break;
        }
        let mut spans = [0.0f64; 5];
        for (b, span) in spans.iter_mut().enumerate() {
            let hi = n - 1 - b * group;
            let lo = hi - group;
            *span = crossings[hi] - crossings[lo];
        }
        let mean = spans.iter().sum::<f64>() / spans.len() as f64;
        if mean <= 0.0 {
            continue;
        }
        let var = spans.iter().map(|s| (s - mean) * (s - mean)).sum::<f64>() / spans.len() as f64;
        if var.sqrt() / mean < CONVERGENCE_TOL {
            return (mean, true);
        }
    }
    // Not converged: report the plain mean spacing of the last few
    // crossings anyway.
    let take = (n - 1).min(5);
    let mean = (crossings[n - 1] - crossings[n - 1 - take]) / take as f64;
    (mean, false)
}

/// Relative disagreement between a measured orbit and a singular solution.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularComparison {
    pub period_rel_err: f64,
    pub amp_rel_err: f64,
    pub modality_match: bool,
}

pub fn compare_to_singular(
    metrics: &OrbitMetrics,
    sol: &SingularSolution,
    params: &ModelParams,
) -> SingularComparison {
    let amp = amplitude(sol, params);
    let expected_modality = match sol.kind {
        SolutionKind::Unimodal => 1,
        _ => 2,
    };
    SingularComparison {
        period_rel_err: (metrics.period - sol.period).abs() / sol.period,
        amp_rel_err: (metrics.amplitude - amp).abs() / amp,
        modality_match: metrics.modality == expected_modality,
    }
}

/// Integration schedule for convergence-chasing runs.
#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    /// Time integrated before the first convergence check.
    pub t_initial: f64,
    /// Additional time per retry while unconverged.
    pub t_chunk: f64,
    /// Hard cap on total integrated time.
    pub t_max: f64,
    pub tail_fraction: f64,
    pub control: StepControl,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            t_initial: 80.0,
            t_chunk: 40.0,
            t_max: 400.0,
            tail_fraction: 0.5,
            control: StepControl::default(),
        }
    }
}

/// Integrates until the orbit metrics converge (or `t_max` is reached) and
/// returns the final trajectory with its metrics.
pub fn converge_run(
    params: &ModelParams,
    history: HistorySpec,
    opts: &RunOptions,
) -> Result<(Trajectory, OrbitMetrics), AnalysisError> {
    let mut integ = Integrator::new(params, history, opts.control)?;
    integ.advance_to(opts.t_initial)?;
    loop {
        let traj = integ.trajectory();
        match extract_with(&traj, opts.tail_fraction, params) {
            Ok(m) if m.converged => return Ok((traj, m)),
            Ok(m) => {
                if integ.t() + opts.t_chunk > opts.t_max {
                    return Ok((traj, m));
                }
            }
            Err(AnalysisError::NoOscillation { .. }) => {
                if integ.t() + opts.t_chunk > opts.t_max {
                    let m = extract_with(&traj, opts.tail_fraction, params)?;
                    return Ok((traj, m));
                }
            }
            Err(e) => return Err(e),
        }
        integ.advance_to(integ.t() + opts.t_chunk)?;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SweepDirection {
    Up,
    Down,
}

/// One directional sweep over K1 with per-sample warm starts.
#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub direction: SweepDirection,
    pub samples: Vec<OrbitMetrics>,
    /// K1 brackets where the period jumped by more than `JUMP_TOL`
    /// relative between adjacent samples.
    pub jumps: Vec<(f64, f64)>,
}

/// Relative period change flagged as a jump between adjacent sweep samples.
pub const JUMP_TOL: f64 = 0.05;

/// Sweeps K1 from `k1_from` to `k1_to` (direction inferred), warm-starting
/// every run from the final window of the previous one. Failed samples are
/// recorded as unconverged NaN entries and do not abort the sweep.
pub fn sweep(
    params: &ModelParams,
    k1_from: f64,
    k1_to: f64,
    steps: usize,
    eps: f64,
    opts: &RunOptions,
) -> SweepResult {
    assert!(steps >= 2, "a sweep needs at least two samples");
    let direction = if k1_to >= k1_from { SweepDirection::Up } else { SweepDirection::Down };
    let mut samples = Vec::with_capacity(steps);
    let mut history: Option<HistorySpec> = None;
    for i in 0..steps {
        let k1 = k1_from + (k1_to - k1_from) * i as f64 / (steps - 1) as f64;
        let p = params.with_k1(k1).with_eps(eps);
        let start = history.clone().unwrap_or_else(|| HistorySpec::cold(&p));
        match converge_run(&p, start, opts) {
            Ok((traj, m)) => {
                history = Some(HistorySpec::Window(traj.final_window()));
                samples.push(m);
            }
            Err(_) => {
                samples.push(OrbitMetrics {
                    k1,
                    eps,
                    period: f64::NAN,
                    amplitude: f64::NAN,
                    modality: 0,
                    converged: false,
                });
            }
        }
    }
    let mut jumps = Vec::new();
    for w in samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        if a.period.is_finite()
            && b.period.is_finite()
            && (b.period - a.period).abs() / a.period > JUMP_TOL
        {
            jumps.push((a.k1.min(b.k1), a.k1.max(b.k1)));
        }
    }
    SweepResult { direction, samples, jumps }
}

//! Forward integration of the eps > 0 DDE with continuous dense output.
//!
//! The delayed arguments `alpha_i(t, u) = t - a_i - c u(t)` move with the
//! state, so every right-hand-side evaluation needs the solution at an
//! arbitrary past time. Each step stores a cubic Hermite interpolant
//! (endpoint values and derivatives); delayed lookups evaluate the stored
//! segment containing `alpha`, the history function for `alpha <= t0`, or
//! extrapolate the most recent segment when `alpha` lands inside the step
//! currently being taken (the first delay shrinks towards zero near the
//! orbit minimum).
//!
//! Stepping is a classical explicit 4-stage scheme with base step
//! `min(eps/10, a1(1+K1+K2)/400)`, which explicit stability alone would
//! permit, except in two places the step is reduced locally: whenever a
//! delayed argument sits on a steep stored drop (feedback gain
//! `c K |U'| / eps`), and during the plunge towards the floor `u = -a1/c`
//! where the first delay vanishes and the deceleration zone is far
//! narrower than the base step. Implicit methods were not an option worth
//! their cost here: they would need nonlinear solves through
//! state-dependent delayed Jacobians while the relaxation dynamics keep
//! the explicit scheme cheap everywhere else.

use crate::algebra::{ModelParams, SingularSolution};
use crate::profiles::profile_of;
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    /// A delayed argument ran ahead of the current time: well-posedness
    /// (K2 < 1) was violated numerically.
    #[error("advanced delay at t = {t}: alpha = {alpha} exceeds current time")]
    AdvancedDelay { t: f64, alpha: f64 },
    /// A delayed argument fell behind the retained dense-output window.
    #[error("history underrun at t = {t}: alpha = {alpha} precedes the retained window starting at {window_start}")]
    HistoryUnderrun { t: f64, alpha: f64, window_start: f64 },
    #[error("integration requires eps > 0 (got {eps})")]
    NonPositiveEps { eps: f64 },
}

/// Grazing tolerance for delayed arguments: advances below this are
/// clamped to the current time (vanishing-delay corner roundoff), larger
/// ones reject the step.
const ADVANCE_CLAMP: f64 = 1e-6;

/// Step-internal failure; the step is retried smaller before any of these
/// escalate to a `SimError`.
enum LookupFail {
    Advanced { t: f64, alpha: f64 },
    Underrun { t: f64, alpha: f64, window_start: f64 },
    BelowFloor { t: f64, u: f64 },
}

/// Right-hand side of the DDE: `u' = (-u - K1 u(alpha1) - K2 u(alpha2)) / eps`.
pub fn rhs(params: &ModelParams, _t: f64, u_t: f64, u_d1: f64, u_d2: f64) -> f64 {
    (-u_t - params.k1 * u_d1 - params.k2 * u_d2) / params.eps
}

/// Initial data for `t <= t0`.
#[derive(Debug, Clone)]
pub enum HistorySpec {
    Constant(f64),
    /// Follow the eps = 0 profile of a constructed singular solution,
    /// sampled at `t + phase`.
    SingularWarmStart { solution: SingularSolution, phase: f64 },
    Sinusoid { amplitude: f64, period: f64, offset: f64 },
    /// Resume from the retained dense window of a previous trajectory
    /// (parameter sweeps warm-start successive runs this way).
    Window(HistoryWindow),
}

impl HistorySpec {
    /// Cold-start default: a small oscillation near the linear frequency
    /// scale, seeding the principal-branch basin.
    pub fn cold(params: &ModelParams) -> Self {
        HistorySpec::Sinusoid {
            amplitude: 0.1,
            period: params.a1 * (1.0 + params.k1 + params.k2) / (1.0 + params.k2),
            offset: 0.0,
        }
    }

    /// Warm start phased to the middle of the first rising leg. Starting
    /// exactly at the profile minimum would place the first delayed
    /// argument on a drop, where the discontinuous delayed value whips the
    /// explicit stages.
    pub fn warm_start(solution: SingularSolution) -> Self {
        HistorySpec::SingularWarmStart { solution, phase: 0.5 * solution.t1 }
    }
}

/// Dense samples saved from the tail of a finished trajectory, evaluated at
/// absolute times of the original run.
#[derive(Debug, Clone)]
pub struct HistoryWindow {
    segments: Vec<Segment>,
    pub t_start: f64,
    pub t_end: f64,
}

impl HistoryWindow {
    pub fn eval(&self, t: f64) -> f64 {
        if self.segments.is_empty() {
            return 0.0;
        }
        if t <= self.t_start {
            return self.segments[0].u0;
        }
        if t >= self.t_end {
            let last = self.segments.last().unwrap();
            return last.u1;
        }
        let mut lo = 0usize;
        let mut hi = self.segments.len() - 1;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.segments[mid].t1 < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        self.segments[lo].eval(t)
    }
}

enum CompiledHistory {
    Constant(f64),
    /// Periodic lookup table (strictly increasing times over one period).
    Table { ts: Vec<f64>, us: Vec<f64>, period: f64, phase: f64 },
    Sinusoid { amplitude: f64, omega: f64, offset: f64 },
    Window(HistoryWindow),
}

impl CompiledHistory {
    fn eval(&self, t: f64) -> f64 {
        match self {
            CompiledHistory::Constant(u) => *u,
            CompiledHistory::Table { ts, us, period, phase } => {
                let x = (t + phase).rem_euclid(*period);
                let mut lo = 0usize;
                let mut hi = ts.len() - 1;
                while lo + 1 < hi {
                    let mid = (lo + hi) / 2;
                    if ts[mid] <= x {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let w = ts[hi] - ts[lo];
                if w > 0.0 {
                    us[lo] + (us[hi] - us[lo]) * (x - ts[lo]) / w
                } else {
                    us[lo]
                }
            }
            CompiledHistory::Sinusoid { amplitude, omega, offset } => {
                offset + amplitude * (omega * t).sin()
            }
            CompiledHistory::Window(w) => w.eval(w.t_end + t),
        }
    }
}

/// Builds a time-parametrised table of the singular solution with its
/// instantaneous drops spread over a finite width. The spreading dilates
/// the INNER variable (`t_w(eta) = t(mu0(eta)) + delta eta`), not the
/// profile itself: that keeps the delayed value sweeping down the drop as
/// the current point climbs the rising leg, which is what the exact
/// solution does, so the field stays near balance along the history.
fn dilated_table(
    params: &ModelParams,
    solution: &SingularSolution,
    phase: f64,
) -> Result<CompiledHistory, crate::profiles::ProfileError> {
    let profile = profile_of(params, solution)?;
    let (u_lo, u_hi) = profile.u_range();
    let span = u_hi - u_lo;
    // A delayed lookup on a drop of slope span/w feeds back into the field
    // with gain c K1 span / (w eps); with h = eps/10 the explicit stages
    // need w >~ c K1 span / 28 to stay stable.
    let w_target = (params.c * params.k1 * span / 20.0).max(10.0 * params.eps);
    match crate::profiles::parametrisation(params, solution) {
        Ok(parm) => {
            let period_eta = parm.period_eta;
            let rising: f64 = parm.jstar.iter().map(|&(a, b)| b - a).sum();
            let flat = (period_eta - rising).max(1e-9);
            let delta = w_target / flat;
            let n = 8192usize;
            let mut ts = Vec::with_capacity(n + 1);
            let mut us = Vec::with_capacity(n + 1);
            let t_base = profile.t_at(parm.mu(0, 0.0));
            for i in 0..=n {
                let eta = period_eta * i as f64 / n as f64;
                let mu0 = parm.mu(0, eta);
                ts.push(profile.t_at(mu0) - t_base + delta * eta);
                us.push(profile.u_at(mu0));
            }
            let period = profile.period_t + delta * period_eta;
            Ok(CompiledHistory::Table { ts, us, period, phase })
        }
        Err(_) => {
            // Marginal solutions can lack a valid parametrisation; fall
            // back to spreading the drops of the time profile directly.
            let drops = profile.drops();
            let w = w_target.min(0.45 * profile.min_rise()).max(1e-9);
            let n = 8192usize;
            let period = profile.period_t;
            let mut ts = Vec::with_capacity(n + 1);
            let mut us = Vec::with_capacity(n + 1);
            for i in 0..=n {
                let t = period * i as f64 / n as f64;
                let mut u = profile.u_at_time(t);
                for &(td, u_top) in &drops {
                    let d = (t - td).rem_euclid(period);
                    if d <= w {
                        let u_after = profile.u_at_time(td + w);
                        u = u_top + (u_after - u_top) * d / w;
                    }
                }
                ts.push(t);
                us.push(u);
            }
            Ok(CompiledHistory::Table { ts, us, period, phase })
        }
    }
}

fn compile_history(
    params: &ModelParams,
    start: &HistorySpec,
) -> Result<CompiledHistory, crate::profiles::ProfileError> {
    Ok(match start {
        HistorySpec::Constant(u) => CompiledHistory::Constant(*u),
        HistorySpec::SingularWarmStart { solution, phase } => {
            dilated_table(params, solution, *phase)?
        }
        HistorySpec::Sinusoid { amplitude, period, offset } => CompiledHistory::Sinusoid {
            amplitude: *amplitude,
            omega: std::f64::consts::TAU / period,
            offset: *offset,
        },
        HistorySpec::Window(w) => CompiledHistory::Window(w.clone()),
    })
}

/// One step of dense output: cubic Hermite on [t0, t1] from endpoint values
/// and derivatives, plus the delayed arguments at the right endpoint for
/// the monotonicity diagnostic.
#[derive(Debug, Clone, Copy)]
struct Segment {
    t0: f64,
    t1: f64,
    u0: f64,
    u1: f64,
    f0: f64,
    f1: f64,
    alpha1: f64,
    alpha2: f64,
}

impl Segment {
    fn eval(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        (2.0 * s3 - 3.0 * s2 + 1.0) * self.u0
            + (s3 - 2.0 * s2 + s) * h * self.f0
            + (-2.0 * s3 + 3.0 * s2) * self.u1
            + (s3 - s2) * h * self.f1
    }

    fn eval_derivative(&self, t: f64) -> f64 {
        let h = self.t1 - self.t0;
        let s = (t - self.t0) / h;
        let s2 = s * s;
        ((6.0 * s2 - 6.0 * s) * self.u0
            + (3.0 * s2 - 4.0 * s + 1.0) * h * self.f0
            + (-6.0 * s2 + 6.0 * s) * self.u1
            + (3.0 * s2 - 2.0 * s) * h * self.f1)
            / h
    }
}

/// Step-size and output options.
#[derive(Debug, Clone, Copy)]
pub struct StepControl {
    /// Fixed step; `None` selects `min(eps/10, a1(1+K1+K2)/400)`.
    pub step: Option<f64>,
    /// Keep every `output_stride`-th step point in the sample record.
    pub output_stride: usize,
}

impl Default for StepControl {
    fn default() -> Self {
        Self { step: None, output_stride: 10 }
    }
}

pub fn default_step(params: &ModelParams) -> f64 {
    (params.eps / 10.0).min(params.a1 * (1.0 + params.k1 + params.k2) / 400.0)
}

/// Completed (or in-progress) solution: sparse samples over the whole run
/// plus dense segments over a sliding window long enough for every delayed
/// lookup.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t0: f64,
    pub t_end: f64,
    pub step: f64,
    /// (t, u) at every `output_stride`-th step over the whole run.
    pub samples: Vec<(f64, f64)>,
    segments: VecDeque<Segment>,
    /// Count of step points in the retained window where a delayed argument
    /// decreased. Transients may violate monotonicity; a converged periodic
    /// regime should not.
    pub alpha_monotonicity_violations: usize,
    /// Stage lookups whose delayed argument grazed past the current time
    /// within the clamp tolerance.
    pub clamped_lookups: usize,
    /// Steps retried with a smaller size after a stage crossed the floor.
    pub rejected_steps: usize,
}

impl Trajectory {
    /// Dense evaluation inside the retained window.
    pub fn eval(&self, t: f64) -> Option<f64> {
        let first = self.segments.front()?;
        let last = self.segments.back()?;
        if t < first.t0 || t > last.t1 {
            return None;
        }
        let idx = self.locate(t)?;
        Some(self.segments[idx].eval(t))
    }

    fn locate(&self, t: f64) -> Option<usize> {
        let mut lo = 0usize;
        let mut hi = self.segments.len().checked_sub(1)?;
        while lo < hi {
            let mid = (lo + hi) / 2;
            if self.segments[mid].t1 < t {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Some(lo)
    }

    pub fn window_start(&self) -> f64 {
        self.segments.front().map_or(self.t0, |s| s.t0)
    }

    /// Snapshot of the retained dense window, usable as history for a
    /// warm-started follow-up run.
    pub fn final_window(&self) -> HistoryWindow {
        HistoryWindow {
            segments: self.segments.iter().copied().collect(),
            t_start: self.window_start(),
            t_end: self.t_end,
        }
    }

    /// Max of `|eps u' + u + K1 u(alpha1) + K2 u(alpha2)|` over `probes`
    /// off-step points of the retained window, with `u'` taken from the
    /// dense-output derivative.
    pub fn max_residual(&self, params: &ModelParams, probes: usize) -> f64 {
        let (w0, w1) = (self.window_start(), self.t_end);
        let lo = w0 + 0.25 * (w1 - w0);
        let mut worst: f64 = 0.0;
        for i in 0..probes {
            let t = lo + (w1 - lo) * (i as f64 + 0.37) / probes as f64;
            let u = match self.eval(t) {
                Some(u) => u,
                None => continue,
            };
            let du = match self.locate(t) {
                Some(idx) => self.segments[idx].eval_derivative(t),
                None => continue,
            };
            let a1 = t - params.a1 - params.c * u;
            let a2 = t - params.a2 - params.c * u;
            let (u1, u2) = match (self.eval(a1), self.eval(a2)) {
                (Some(u1), Some(u2)) => (u1, u2),
                _ => continue,
            };
            worst = worst.max((params.eps * du + u + params.k1 * u1 + params.k2 * u2).abs());
        }
        worst
    }
}

/// Stepping state, kept public so callers can advance in chunks (parameter
/// sweeps integrate until the orbit metrics converge).
pub struct Integrator {
    params: ModelParams,
    history: CompiledHistory,
    h: f64,
    output_stride: usize,
    t: f64,
    u: f64,
    f: f64,
    step_count: usize,
    t0: f64,
    segments: VecDeque<Segment>,
    samples: Vec<(f64, f64)>,
    running_max_abs_u: f64,
    clamped_lookups: usize,
    rejected_steps: usize,
}

impl Integrator {
    // NaN eps must fail the guard, hence the negated comparison.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(params: &ModelParams, history: HistorySpec, control: StepControl) -> Result<Self, SimError> {
        if !(params.eps > 0.0) {
            return Err(SimError::NonPositiveEps { eps: params.eps });
        }
        let compiled = compile_history(params, &history).unwrap_or(CompiledHistory::Constant(0.0));
        let t0 = 0.0;
        let u0 = compiled.eval(t0);
        let mut s = Self {
            params: *params,
            history: compiled,
            h: control.step.unwrap_or_else(|| default_step(params)),
            output_stride: control.output_stride.max(1),
            t: t0,
            u: u0,
            f: 0.0,
            step_count: 0,
            t0,
            segments: VecDeque::new(),
            samples: vec![(t0, u0)],
            running_max_abs_u: u0.abs(),
            clamped_lookups: 0,
            rejected_steps: 0,
        };
        let mut clamped = 0usize;
        s.f = s.field(t0, u0, &mut clamped).map_err(|e| match e {
            LookupFail::Advanced { t, alpha } => SimError::AdvancedDelay { t, alpha },
            LookupFail::Underrun { t, alpha, window_start } => {
                SimError::HistoryUnderrun { t, alpha, window_start }
            }
            LookupFail::BelowFloor { t, .. } => SimError::AdvancedDelay { t, alpha: t },
        })?;
        s.clamped_lookups += clamped;
        Ok(s)
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    /// Delayed lookup at `alpha`. `now` is the stage time the lookup
    /// belongs to. Grazing advances up to `ADVANCE_CLAMP` are clamped to
    /// `now` (they arise from roundoff at the vanishing-delay corner);
    /// larger advances are rejected so the enclosing step can retry with a
    /// smaller size or fail hard.
    fn lookup(&self, now: f64, alpha: f64, clamped: &mut usize) -> Result<f64, LookupFail> {
        let mut alpha = alpha;
        if alpha > now {
            if alpha > now + ADVANCE_CLAMP {
                return Err(LookupFail::Advanced { t: now, alpha });
            }
            *clamped += 1;
            alpha = now;
        }
        if alpha <= self.t0 {
            return Ok(self.history.eval(alpha));
        }
        match self.segments.front() {
            None => Ok(self.history.eval(self.t0)),
            Some(first) => {
                if alpha < first.t0 {
                    return Err(LookupFail::Underrun {
                        t: now,
                        alpha,
                        window_start: first.t0,
                    });
                }
                let last = self.segments.back().unwrap();
                if alpha >= last.t1 {
                    // Inside the step being taken: extrapolate the freshest
                    // segment (at most one step beyond its right end).
                    return Ok(last.eval(alpha));
                }
                let mut lo = 0usize;
                let mut hi = self.segments.len() - 1;
                while lo < hi {
                    let mid = (lo + hi) / 2;
                    if self.segments[mid].t1 < alpha {
                        lo = mid + 1;
                    } else {
                        hi = mid;
                    }
                }
                Ok(self.segments[lo].eval(alpha))
            }
        }
    }

    fn field(&self, now: f64, u: f64, clamped: &mut usize) -> Result<f64, LookupFail> {
        let p = &self.params;
        let a1 = now - p.a1 - p.c * u;
        let a2 = now - p.a2 - p.c * u;
        let u1 = self.lookup(now, a1, clamped)?;
        let u2 = self.lookup(now, a2, clamped)?;
        Ok(rhs(p, now, u, u1, u2))
    }

    /// One attempted step of size `h`; no state is mutated on rejection.
    fn try_step(&self, h: f64) -> Result<(Segment, f64, usize), LookupFail> {
        let (t, u) = (self.t, self.u);
        let mut clamped = 0usize;
        let k1 = self.f;
        let k2 = self.field(t + 0.5 * h, u + 0.5 * h * k1, &mut clamped)?;
        let k3 = self.field(t + 0.5 * h, u + 0.5 * h * k2, &mut clamped)?;
        let k4 = self.field(t + h, u + h * k3, &mut clamped)?;
        let u_next = u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        let floor = -self.params.a1 / self.params.c;
        if u_next < floor {
            // Crossing the floor would advance the first delay next step.
            return Err(LookupFail::BelowFloor { t: t + h, u: u_next });
        }
        let t_next = t + h;
        let f_next = self.field(t_next, u_next, &mut clamped)?;
        let p = &self.params;
        let seg = Segment {
            t0: t,
            t1: t_next,
            u0: u,
            u1: u_next,
            f0: k1,
            f1: f_next,
            alpha1: t_next - p.a1 - p.c * u_next,
            alpha2: t_next - p.a2 - p.c * u_next,
        };
        Ok((seg, f_next, clamped))
    }

    /// Backward-difference slope of the stored solution at a delayed
    /// argument, used to sense how stiff the delayed feedback currently is.
    fn delayed_slope(&self, now: f64, alpha: f64) -> f64 {
        let delta = 0.25 * self.h;
        let mut scratch = 0usize;
        match (
            self.lookup(now, alpha, &mut scratch),
            self.lookup(now, alpha - delta, &mut scratch),
        ) {
            (Ok(a), Ok(b)) => (a - b) / delta,
            _ => 0.0,
        }
    }

    /// Takes one step of at most `h_req`, with two reductions.
    ///
    /// Stability: a delayed lookup moving across a drop of slope U' feeds
    /// back into the field with gain c K |U'| / eps, and on every rising
    /// leg the first delayed argument parks on the previous drop, so the
    /// step is capped at ~2 eps / (1 + c sum K_i |U'_i|). The cap is also
    /// proportional to the base step so refining the base step refines the
    /// whole trajectory.
    ///
    /// Floor: each drop plunges at |u'| ~ (1+K1+K2) umax / eps towards
    /// u = -a1/c where the first delay vanishes, and the deceleration zone
    /// above the floor is far narrower than the base step; a fixed step
    /// would jump below the floor and advance the delay. While plunging the
    /// step is limited to a fraction of the time-to-floor and halved on
    /// rejection until the stages stay causal.
    fn step_once(&mut self, h_req: f64) -> Result<(), SimError> {
        let mut h = h_req;
        let h_min = self.h * 1e-6;
        let p = self.params;
        let s1 = self.delayed_slope(self.t, self.t - p.a1 - p.c * self.u);
        let s2 = self.delayed_slope(self.t, self.t - p.a2 - p.c * self.u);
        let gain = 1.0 + p.c * (p.k1 * s1.abs() + p.k2 * s2.abs());
        let h_stab = (2.0 * p.eps).min(20.0 * self.h) / gain;
        h = h.min(h_stab.max(self.h * 1e-3));
        let margin = self.u + p.a1 / p.c;
        let guard_band = 0.1 * (p.a1 / p.c + self.running_max_abs_u);
        if (self.f < 0.0 || margin < guard_band) && self.f != 0.0 && margin > 0.0 {
            h = h.min((0.25 * margin / self.f.abs()).max(h_min));
        }
        loop {
            match self.try_step(h) {
                Ok((seg, f_next, clamped)) => {
                    self.commit(seg, f_next, clamped);
                    return Ok(());
                }
                Err(LookupFail::Underrun { t, alpha, window_start }) => {
                    return Err(SimError::HistoryUnderrun { t, alpha, window_start });
                }
                Err(fail) => {
                    if h <= h_min {
                        return Err(match fail {
                            LookupFail::Advanced { t, alpha } => {
                                SimError::AdvancedDelay { t, alpha }
                            }
                            LookupFail::BelowFloor { t, u } => SimError::AdvancedDelay {
                                t,
                                alpha: t - self.params.a1 - self.params.c * u,
                            },
                            LookupFail::Underrun { t, alpha, window_start } => {
                                SimError::HistoryUnderrun { t, alpha, window_start }
                            }
                        });
                    }
                    h = (0.5 * h).max(h_min);
                    self.rejected_steps += 1;
                }
            }
        }
    }

    fn commit(&mut self, seg: Segment, f_next: f64, clamped: usize) {
        self.t = seg.t1;
        self.u = seg.u1;
        self.f = f_next;
        self.segments.push_back(seg);
        self.step_count += 1;
        self.clamped_lookups += clamped;
        self.running_max_abs_u = self.running_max_abs_u.max(self.u.abs());
        if self.step_count.is_multiple_of(self.output_stride) {
            self.samples.push((self.t, self.u));
        }
        self.prune();
    }

    fn prune(&mut self) {
        let p = &self.params;
        let window = p.a2 + p.c * self.running_max_abs_u * 1.2 + p.a1;
        let cutoff = self.t - window;
        while let Some(front) = self.segments.front() {
            if front.t1 < cutoff {
                self.segments.pop_front();
            } else {
                break;
            }
        }
    }

    /// Integrates forward to `t_target` (final partial step clamped).
    pub fn advance_to(&mut self, t_target: f64) -> Result<(), SimError> {
        while self.t < t_target - 1e-12 {
            let h = self.h.min(t_target - self.t);
            self.step_once(h)?;
        }
        Ok(())
    }

    /// Snapshot of the run so far.
    pub fn trajectory(&self) -> Trajectory {
        Trajectory {
            t0: self.t0,
            t_end: self.t,
            step: self.h,
            samples: self.samples.clone(),
            segments: self.segments.clone(),
            alpha_monotonicity_violations: self
                .segments
                .iter()
                .zip(self.segments.iter().skip(1))
                .filter(|(a, b)| b.alpha1 < a.alpha1 || b.alpha2 < a.alpha2)
                .count(),
            clamped_lookups: self.clamped_lookups,
            rejected_steps: self.rejected_steps,
        }
    }
}

/// Integrates from the history up to `t_end`.
pub fn integrate(
    params: &ModelParams,
    history: HistorySpec,
    t_end: f64,
    control: StepControl,
) -> Result<Trajectory, SimError> {
    let mut integ = Integrator::new(params, history, control)?;
    integ.advance_to(t_end)?;
    Ok(integ.trajectory())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{construct, BranchIndex, SolutionKind};

    fn params(a: f64, k1: f64, eps: f64) -> ModelParams {
        ModelParams::new(eps, k1, 0.5, 1.0, a, 1.0).unwrap()
    }

    #[test]
    fn zero_history_stays_zero() {
        let p = params(6.0, 4.0, 0.1);
        let traj = integrate(&p, HistorySpec::Constant(0.0), 20.0, StepControl::default()).unwrap();
        for &(_, u) in &traj.samples {
            assert_eq!(u, 0.0);
        }
    }

    #[test]
    fn rhs_values() {
        let p = params(6.0, 4.0, 0.1);
        assert_eq!(rhs(&p, 0.0, 0.0, 0.0, 0.0), 0.0);
        assert_eq!(rhs(&p, 0.0, 1.0, 0.0, 0.0), -10.0);
    }

    #[test]
    fn warm_start_tracks_singular_orbit() {
        let p = params(6.0, 4.0, 0.05);
        let sol = construct(&p, BranchIndex::new(0, 0), SolutionKind::Unimodal).unwrap();
        let traj = integrate(
            &p,
            HistorySpec::warm_start(sol),
            120.0,
            StepControl::default(),
        )
        .unwrap();
        let (lo, hi) = traj
            .samples
            .iter()
            .skip(traj.samples.len() / 2)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, u)| {
                (lo.min(u), hi.max(u))
            });
        let amp = hi - lo;
        // Amplitude stays near the singular value T/c = 16/3.
        assert!((amp - 16.0 / 3.0).abs() < 0.5, "amplitude {amp}");
        assert_eq!(traj.alpha_monotonicity_violations, 0);
    }

    #[test]
    fn residual_shrinks_with_step() {
        let p = params(6.0, 4.0, 0.1);
        let sol = construct(&p, BranchIndex::new(0, 0), SolutionKind::Unimodal).unwrap();
        let run = |h: f64| {
            let traj = integrate(
                &p,
                HistorySpec::warm_start(sol),
                60.0,
                StepControl { step: Some(h), output_stride: 10 },
            )
            .unwrap();
            traj.max_residual(&p, 600)
        };
        let r1 = run(0.01);
        let r2 = run(0.005);
        assert!(
            r2 < r1 / 3.5,
            "halving the step should cut the residual by about 8x: {r1} -> {r2}"
        );
    }

    #[test]
    fn eps_zero_rejected() {
        let p = ModelParams::new(0.0, 4.0, 0.5, 1.0, 6.0, 1.0).unwrap();
        assert!(matches!(
            integrate(&p, HistorySpec::Constant(0.0), 1.0, StepControl::default()),
            Err(SimError::NonPositiveEps { .. })
        ));
    }

    #[test]
    fn window_resume_is_seamless() {
        let p = params(6.0, 4.0, 0.05);
        let sol = construct(&p, BranchIndex::new(0, 0), SolutionKind::Unimodal).unwrap();
        let first = integrate(
            &p,
            HistorySpec::warm_start(sol),
            60.0,
            StepControl::default(),
        )
        .unwrap();
        let resumed = integrate(
            &p,
            HistorySpec::Window(first.final_window()),
            30.0,
            StepControl::default(),
        )
        .unwrap();
        let (lo, hi) = resumed
            .samples
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, u)| {
                (lo.min(u), hi.max(u))
            });
        assert!((hi - lo - 16.0 / 3.0).abs() < 0.5);
    }
}

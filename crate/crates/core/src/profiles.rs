//! Piecewise-linear singular solution profiles and their inner
//! parametrisations.
//!
//! A profile is a parametric curve `mu -> (t(mu), u(mu))` with `t`
//! nondecreasing: the rising legs carry the slow dynamics, the vertical
//! drops are the instantaneous jumps of the eps -> 0 limit. A solution of
//! the DDE is certified by three monotone maps `mu0, mu1, mu2` of an inner
//! variable `eta` such that the delayed-time identity
//! `t(mu_i(eta)) = t(mu0(eta)) - a_i - c u(mu0(eta))` holds and the field
//! `F(eta) = -u(mu0) - K1 u(mu1) - K2 u(mu2)` vanishes on the slow set J*
//! and is negative inside the drop set J-. `verify` checks all of this on a
//! dense grid; since every map is affine per piece, the grid is pure
//! redundancy against transcription mistakes.

use crate::algebra::{ModelParams, SingularSolution, SolutionKind};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ProfileError {
    #[error("solution kind {got} does not match the requested profile {expected}")]
    KindMismatch { expected: &'static str, got: &'static str },
    #[error("parametrisation coefficient {name} = {value} lies outside (0,1)")]
    DegenerateCoefficient { name: &'static str, value: f64 },
    #[error("one-delay gain must exceed 1 (got {k})")]
    InvalidGain { k: f64 },
}

/// Breakpoint of a piecewise-linear parametric curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Breakpoint {
    pub mu: f64,
    pub t: f64,
    pub u: f64,
}

/// One period of a piecewise-linear admissible profile, extended
/// periodically: shifting `mu` by `period_mu` shifts `t` by `period_t` and
/// leaves `u` unchanged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParametricProfile {
    /// Breakpoints covering mu in [0, period_mu], ordered by mu.
    pub breakpoints: Vec<Breakpoint>,
    /// Mu-length of one period (2 for the sawtooth, 4 for bimodal shapes).
    pub period_mu: f64,
    /// Time advanced over one period.
    pub period_t: f64,
}

impl ParametricProfile {
    fn locate(&self, mu: f64) -> (usize, f64, f64) {
        let k = ((mu - self.breakpoints[0].mu) / self.period_mu).floor();
        let local = mu - k * self.period_mu;
        let bp = &self.breakpoints;
        for i in 0..bp.len() - 1 {
            if local <= bp[i + 1].mu || i == bp.len() - 2 {
                let w = bp[i + 1].mu - bp[i].mu;
                let frac = if w > 0.0 { (local - bp[i].mu) / w } else { 0.0 };
                return (i, frac, k);
            }
        }
        unreachable!("breakpoint list is nonempty")
    }

    pub fn t_at(&self, mu: f64) -> f64 {
        let (i, frac, k) = self.locate(mu);
        let bp = &self.breakpoints;
        bp[i].t + frac * (bp[i + 1].t - bp[i].t) + k * self.period_t
    }

    pub fn u_at(&self, mu: f64) -> f64 {
        let (i, frac, _) = self.locate(mu);
        let bp = &self.breakpoints;
        bp[i].u + frac * (bp[i + 1].u - bp[i].u)
    }

    /// Value of `u` at absolute time `t`, read off the rising legs. At a
    /// drop instant (where the limit is set-valued) the value at the top of
    /// the drop is returned.
    pub fn u_at_time(&self, t: f64) -> f64 {
        let k = (t / self.period_t).floor();
        let local = t - k * self.period_t;
        let bp = &self.breakpoints;
        for i in 0..bp.len() - 1 {
            let (t0, t1) = (bp[i].t, bp[i + 1].t);
            if t1 > t0 && local >= t0 && local <= t1 {
                let frac = (local - t0) / (t1 - t0);
                return bp[i].u + frac * (bp[i + 1].u - bp[i].u);
            }
        }
        // local falls exactly on a drop; take the first breakpoint at it.
        for b in bp {
            if (b.t - local).abs() <= 1e-12 * self.period_t.max(1.0) {
                return b.u;
            }
        }
        bp[0].u
    }

    pub fn max_abs_u(&self) -> f64 {
        self.breakpoints.iter().map(|b| b.u.abs()).fold(0.0, f64::max)
    }

    /// Drop instants within one period as `(time, u at the top of the
    /// drop)`, in increasing time.
    pub fn drops(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        for w in self.breakpoints.windows(2) {
            if w[1].t == w[0].t && w[1].u < w[0].u {
                out.push((w[0].t, w[0].u));
            }
        }
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    /// Shortest rising-leg duration, a cap for history mollification.
    pub fn min_rise(&self) -> f64 {
        self.breakpoints
            .windows(2)
            .filter(|w| w[1].t > w[0].t)
            .map(|w| w[1].t - w[0].t)
            .fold(f64::INFINITY, f64::min)
    }

    /// Global minimum and maximum of `u` over one period.
    pub fn u_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for b in &self.breakpoints {
            lo = lo.min(b.u);
            hi = hi.max(b.u);
        }
        (lo, hi)
    }
}

/// Affine map on one eta piece: `mu(eta) = base + slope * (eta - eta_lo)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AffineMap {
    pub base: f64,
    pub slope: f64,
}

impl AffineMap {
    fn eval(&self, d: f64) -> f64 {
        self.base + self.slope * d
    }
}

/// One unit piece of the inner parametrisation: the maps `mu0, mu1[, mu2]`
/// restricted to `eta in [eta_lo, eta_hi]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Piece {
    pub eta_lo: f64,
    pub eta_hi: f64,
    /// mu0 followed by one map per delay.
    pub maps: Vec<AffineMap>,
}

/// Inner parametrisation of a singular solution over one eta period,
/// together with the context needed to evaluate the field F.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parametrisation {
    pub pieces: Vec<Piece>,
    /// Eta-length of one period (5 unimodal, 10 bimodal, 3 one-delay).
    pub period_eta: f64,
    /// Mu shift corresponding to one eta period.
    pub period_mu: f64,
    /// Closed intervals of the base period where t(mu0) strictly increases.
    pub jstar: Vec<(f64, f64)>,
    /// Open intervals of the base period where the profile drops.
    pub jminus: Vec<(f64, f64)>,
    /// Delay gains (K1[, K2] or the one-delay K).
    pub gains: Vec<f64>,
    /// Delay offsets (a1[, a2]).
    pub offsets: Vec<f64>,
    pub c: f64,
}

impl Parametrisation {
    /// Value of map `i` (0 = mu0) at any eta, by periodic extension.
    pub fn mu(&self, i: usize, eta: f64) -> f64 {
        let k = (eta / self.period_eta).floor();
        let local = eta - k * self.period_eta;
        let pieces = &self.pieces;
        let mut idx = pieces.len() - 1;
        for (p, piece) in pieces.iter().enumerate() {
            if local <= piece.eta_hi || p == pieces.len() - 1 {
                idx = p;
                break;
            }
        }
        let piece = &pieces[idx];
        piece.maps[i].eval(local - piece.eta_lo) + k * self.period_mu
    }

    pub fn delays(&self) -> usize {
        self.gains.len()
    }
}

/// `F(eta) = -u(mu0) - sum_i K_i u(mu_i)`: the right-hand side of the DDE
/// along the parametrised solution.
pub fn evaluate_f(profile: &ParametricProfile, parm: &Parametrisation, eta: f64) -> f64 {
    let mut f = -profile.u_at(parm.mu(0, eta));
    for (i, k) in parm.gains.iter().enumerate() {
        f -= k * profile.u_at(parm.mu(i + 1, eta));
    }
    f
}

/// Convenience wrapper evaluating F for a constructed solution.
pub fn evaluate_f_for(
    params: &ModelParams,
    sol: &SingularSolution,
    parm: &Parametrisation,
    eta: f64,
) -> Result<f64, ProfileError> {
    let profile = profile_of(params, sol)?;
    Ok(evaluate_f(&profile, parm, eta))
}

/// Sawtooth profile with `n` whole periods of delay offset: u rises from
/// `(-a1 + nT)/c` to `(-a1 + (n+1)T)/c` over one period, then drops.
pub fn sawtooth_profile(params: &ModelParams, n: u32, period: f64) -> ParametricProfile {
    let (a1, c) = (params.a1, params.c);
    let u_min = (-a1 + n as f64 * period) / c;
    let u_max = (-a1 + (n as f64 + 1.0) * period) / c;
    ParametricProfile {
        breakpoints: vec![
            Breakpoint { mu: 0.0, t: 0.0, u: u_min },
            Breakpoint { mu: 1.0, t: period, u: u_max },
            Breakpoint { mu: 2.0, t: period, u: u_min },
        ],
        period_mu: 2.0,
        period_t: period,
    }
}

/// Bimodal profile with the first maximum global (rising legs of durations
/// t1 and t2 with a drop after each).
pub fn type_i_profile(params: &ModelParams, sol: &SingularSolution) -> Result<ParametricProfile, ProfileError> {
    if sol.kind != SolutionKind::TypeI {
        return Err(ProfileError::KindMismatch { expected: "type-i", got: sol.kind.label() });
    }
    let (a1, c) = (params.a1, params.c);
    let (t_per, t1, t2, theta, n) = (sol.period, sol.t1, sol.t2, sol.theta, sol.index.n as f64);
    let u_min = (-a1 + n * t_per) / c;
    Ok(ParametricProfile {
        breakpoints: vec![
            Breakpoint { mu: 0.0, t: 0.0, u: u_min },
            Breakpoint { mu: 1.0, t: t1, u: u_min + t1 / c },
            Breakpoint { mu: 2.0, t: t1, u: u_min + ((1.0 - theta) * t1 - t2) / c },
            Breakpoint { mu: 3.0, t: t_per, u: u_min + (1.0 - theta) * t1 / c },
            Breakpoint { mu: 4.0, t: t_per, u: u_min },
        ],
        period_mu: 4.0,
        period_t: t_per,
    })
}

/// Bimodal profile with the second maximum global.
pub fn type_ii_profile(params: &ModelParams, sol: &SingularSolution) -> Result<ParametricProfile, ProfileError> {
    if sol.kind != SolutionKind::TypeII {
        return Err(ProfileError::KindMismatch { expected: "type-ii", got: sol.kind.label() });
    }
    let (a1, c) = (params.a1, params.c);
    let (t_per, t1, t2, theta, n) = (sol.period, sol.t1, sol.t2, sol.theta, sol.index.n as f64);
    let u_min = (-a1 + n * t_per) / c;
    Ok(ParametricProfile {
        breakpoints: vec![
            Breakpoint { mu: 0.0, t: 0.0, u: u_min },
            Breakpoint { mu: 1.0, t: t1, u: u_min + t1 / c },
            Breakpoint { mu: 2.0, t: t1, u: u_min + (t1 - theta * t2) / c },
            Breakpoint { mu: 3.0, t: t_per, u: u_min + (t1 + (1.0 - theta) * t2) / c },
            Breakpoint { mu: 4.0, t: t_per, u: u_min },
        ],
        period_mu: 4.0,
        period_t: t_per,
    })
}

/// Profile matching the solution kind.
pub fn profile_of(params: &ModelParams, sol: &SingularSolution) -> Result<ParametricProfile, ProfileError> {
    match sol.kind {
        SolutionKind::Unimodal => Ok(sawtooth_profile(params, sol.index.n, sol.period)),
        SolutionKind::TypeI => type_i_profile(params, sol),
        SolutionKind::TypeII => type_ii_profile(params, sol),
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<f64, ProfileError> {
    if value > 0.0 && value < 1.0 {
        Ok(value)
    } else {
        Err(ProfileError::DegenerateCoefficient { name, value })
    }
}

/// Inner parametrisation for the three solution kinds. The pieces are
/// written for the base cell; periodic extension adds `period_mu` to every
/// map per eta period.
pub fn parametrisation(params: &ModelParams, sol: &SingularSolution) -> Result<Parametrisation, ProfileError> {
    let (k1, k2) = (params.k1, params.k2);
    let n = sol.index.n as f64;
    let m = sol.index.m as f64;
    let theta = sol.theta;
    let mk = |base0: f64, s0: f64, base1: f64, s1: f64, base2: f64, s2: f64| Piece {
        eta_lo: 0.0,
        eta_hi: 0.0,
        maps: vec![
            AffineMap { base: base0, slope: s0 },
            AffineMap { base: base1, slope: s1 },
            AffineMap { base: base2, slope: s2 },
        ],
    };
    let mut pieces;
    let (period_eta, period_mu, jstar);
    match sol.kind {
        SolutionKind::Unimodal => {
            period_eta = 5.0;
            period_mu = 2.0;
            jstar = vec![(0.0, 1.0)];
            pieces = vec![
                mk(0.0, 1.0, -2.0 * n - 1.0 / k1, 1.0 / k1, -2.0 * (n + m) - 1.0 - theta, 0.0),
                mk(1.0, theta, -2.0 * n, theta, -2.0 * (n + m) - 1.0 - theta, theta),
                mk(1.0 + theta, 0.0, -2.0 * n + theta, 0.0, -2.0 * (n + m) - 1.0, 1.0),
                mk(
                    1.0 + theta,
                    1.0 - theta,
                    -2.0 * n + theta,
                    1.0 - theta,
                    -2.0 * (n + m),
                    1.0 - theta,
                ),
                mk(2.0, 0.0, -2.0 * n + 1.0, 1.0 - 1.0 / k1, -2.0 * (n + m) + 1.0 - theta, 0.0),
            ];
        }
        SolutionKind::TypeI => {
            let (t1, t2) = (sol.t1, sol.t2);
            let s11 = check_unit("s11", theta * t1 / (t2 + theta * t1))?;
            let s12 = check_unit("s12", 1.0 - t2 / ((1.0 - theta) * t1))?;
            let s13 = check_unit("s13", 1.0 - 1.0 / (k1 * (1.0 - theta)))?;
            let s14 = check_unit("s14", 1.0 - t2 / (k2 * (1.0 - theta) * t1))?;
            let r = t2 / t1;
            period_eta = 10.0;
            period_mu = 4.0;
            jstar = vec![(0.0, 1.0), (5.0, 6.0)];
            let b2 = -4.0 * (n + m);
            pieces = vec![
                mk(0.0, 1.0, -4.0 * n - 1.0 + s13, 1.0 - s13, b2 - 3.0 - theta, 0.0),
                mk(1.0, s11, -4.0 * n, theta, b2 - 3.0 - theta, theta),
                mk(1.0 + s11, 0.0, -4.0 * n + theta, 0.0, b2 - 3.0, 1.0),
                mk(1.0 + s11, 1.0 - s11, -4.0 * n + theta, r, b2 - 2.0, 1.0),
                mk(2.0, 0.0, -4.0 * n + theta + r, 0.0, b2 - 1.0, s14),
                mk(2.0, 1.0, -4.0 * n + theta + r, 0.0, b2 - 1.0 + s14, 1.0 - s14),
                mk(
                    3.0,
                    s12,
                    -4.0 * n + theta + r,
                    1.0 - theta - r,
                    b2,
                    1.0 - theta - r,
                ),
                mk(3.0 + s12, 0.0, -4.0 * n + 1.0, 1.0, b2 + 1.0 - theta - r, 0.0),
                mk(3.0 + s12, 1.0 - s12, -4.0 * n + 2.0, 1.0, b2 + 1.0 - theta - r, r),
                mk(4.0, 0.0, -4.0 * n + 3.0, s13, b2 + 1.0 - theta, 0.0),
            ];
        }
        SolutionKind::TypeII => {
            let (t1, t2, t_per) = (sol.t1, sol.t2, sol.period);
            let s21 = check_unit("s21", (t1 - theta * t2) / (t_per - theta * t2))?;
            let s22 = check_unit("s22", (t_per - t2) / (t_per - theta * t2))?;
            let s23 = check_unit("s23", 1.0 - t1 / (k1 * (t1 + (1.0 - theta) * t2)))?;
            let s24 = check_unit("s24", 1.0 - t2 / (k2 * (t1 + (1.0 - theta) * t2)))?;
            let w = theta * t2 / t1;
            period_eta = 10.0;
            period_mu = 4.0;
            jstar = vec![(0.0, 1.0), (3.0, 4.0)];
            let b2 = -4.0 * (n + m);
            pieces = vec![
                mk(0.0, 1.0, -4.0 * n - (1.0 - s23), 1.0 - s23, b2 - 1.0 - theta, 0.0),
                mk(1.0, 1.0, -4.0 * n, w, b2 - 1.0 - theta, theta),
                mk(2.0, 0.0, -4.0 * n + w, 0.0, b2 - 1.0, s24),
                mk(2.0, 1.0, -4.0 * n + w, 0.0, b2 - 1.0 + s24, 1.0 - s24),
                mk(3.0, s21, -4.0 * n + w, 1.0 - w, b2, 1.0 - w),
                mk(3.0 + s21, 0.0, -4.0 * n + 1.0, 1.0, b2 + 1.0 - w, 0.0),
                mk(3.0 + s21, s22 - s21, -4.0 * n + 2.0, theta, b2 + 1.0 - w, w),
                mk(3.0 + s22, 0.0, -4.0 * n + 2.0 + theta, 0.0, b2 + 1.0, 1.0),
                mk(3.0 + s22, 1.0 - s22, -4.0 * n + 2.0 + theta, 1.0 - theta, b2 + 2.0, 1.0 - theta),
                mk(4.0, 0.0, -4.0 * n + 3.0, s23, b2 + 3.0 - theta, 0.0),
            ];
        }
    }
    for (i, piece) in pieces.iter_mut().enumerate() {
        piece.eta_lo = i as f64;
        piece.eta_hi = i as f64 + 1.0;
    }
    let jminus = complement_intervals(&jstar, period_eta);
    Ok(Parametrisation {
        pieces,
        period_eta,
        period_mu,
        jstar,
        jminus,
        gains: vec![k1, k2],
        offsets: vec![params.a1, params.a2],
        c: params.c,
    })
}

fn complement_intervals(jstar: &[(f64, f64)], period: f64) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for (i, &(_, hi)) in jstar.iter().enumerate() {
        let next_lo = if i + 1 < jstar.len() { jstar[i + 1].0 } else { jstar[0].0 + period };
        if next_lo > hi {
            out.push((hi, next_lo));
        }
    }
    out
}

/// Grid verification of the singular-solution conditions: delayed-time
/// identity for every delay, F = 0 on J*, F < 0 in the interior of J-.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub max_delay_identity_residual: f64,
    pub max_abs_f_on_jstar: f64,
    /// Maximum of F over J- grid points at least one piece-width away from
    /// the J- boundary (where F vanishes continuously).
    pub max_f_on_jminus: f64,
    pub grid_points: usize,
    pub pass: bool,
}

/// Absolute tolerance for the delayed-time identity (time units).
pub const TOL_ID: f64 = 1e-9;
/// F must stay at or below this value one piece-width inside J-.
pub const JMINUS_MARGIN: f64 = -1e-12;
/// Default verification grid density per piece.
pub const DEFAULT_GRID: usize = 200;

pub fn verify_parametrisation(
    profile: &ParametricProfile,
    parm: &Parametrisation,
    grid_per_piece: usize,
) -> VerificationReport {
    let n = grid_per_piece.max(3);
    let tol_f =
        1e-9 * (1.0 + profile.max_abs_u() * (1.0 + parm.gains.iter().sum::<f64>()) / parm.c);
    let in_jstar = |eta: f64| {
        parm.jstar
            .iter()
            .any(|&(lo, hi)| eta >= lo - 1e-12 && eta <= hi + 1e-12)
    };
    let jminus_interior = |eta: f64| {
        parm.jminus
            .iter()
            .any(|&(lo, hi)| eta >= lo + 1.0 - 1e-12 && eta <= hi - 1.0 + 1e-12)
    };
    let mut max_resid: f64 = 0.0;
    let mut max_abs_jstar: f64 = 0.0;
    let mut max_jminus = f64::NEG_INFINITY;
    let mut count = 0usize;
    for piece in &parm.pieces {
        for g in 0..n {
            let eta = piece.eta_lo + (piece.eta_hi - piece.eta_lo) * g as f64 / (n - 1) as f64;
            count += 1;
            let mu0 = parm.mu(0, eta);
            let t0 = profile.t_at(mu0);
            let u0 = profile.u_at(mu0);
            for (i, &a_i) in parm.offsets.iter().enumerate() {
                let ti = profile.t_at(parm.mu(i + 1, eta));
                let resid = (ti - (t0 - a_i - parm.c * u0)).abs();
                max_resid = max_resid.max(resid);
            }
            let f = evaluate_f(profile, parm, eta);
            if in_jstar(eta) {
                max_abs_jstar = max_abs_jstar.max(f.abs());
            } else if jminus_interior(eta) {
                max_jminus = max_jminus.max(f);
            }
        }
    }
    let pass = max_resid <= TOL_ID && max_abs_jstar <= tol_f && max_jminus <= JMINUS_MARGIN;
    VerificationReport {
        max_delay_identity_residual: max_resid,
        max_abs_f_on_jstar: max_abs_jstar,
        max_f_on_jminus: max_jminus,
        grid_points: count,
        pass,
    }
}

/// Builds the profile and parametrisation for `sol` and verifies them on
/// the default grid.
pub fn verify(params: &ModelParams, sol: &SingularSolution) -> Result<VerificationReport, ProfileError> {
    verify_with_grid(params, sol, DEFAULT_GRID)
}

pub fn verify_with_grid(
    params: &ModelParams,
    sol: &SingularSolution,
    grid_per_piece: usize,
) -> Result<VerificationReport, ProfileError> {
    let profile = profile_of(params, sol)?;
    let parm = parametrisation(params, sol)?;
    Ok(verify_parametrisation(&profile, &parm, grid_per_piece))
}

/// Sawtooth solution of the one-delay equation
/// `eps u' = -u(t) - K u(t - a1 - c u(t))`: period
/// `T = a1 (1+K) / (1 + n (1+K))` with a three-piece parametrisation.
pub fn one_delay_solution(
    a1: f64,
    c: f64,
    k: f64,
    n: u32,
) -> Result<(f64, Parametrisation, ParametricProfile), ProfileError> {
    if k <= 1.0 {
        return Err(ProfileError::InvalidGain { k });
    }
    let nf = n as f64;
    let period = a1 * (1.0 + k) / (1.0 + nf * (1.0 + k));
    let u_min = (-a1 + nf * period) / c;
    let u_max = (-a1 + (nf + 1.0) * period) / c;
    let profile = ParametricProfile {
        breakpoints: vec![
            Breakpoint { mu: 0.0, t: 0.0, u: u_min },
            Breakpoint { mu: 1.0, t: period, u: u_max },
            Breakpoint { mu: 2.0, t: period, u: u_min },
        ],
        period_mu: 2.0,
        period_t: period,
    };
    let mk = |base0: f64, s0: f64, base1: f64, s1: f64| Piece {
        eta_lo: 0.0,
        eta_hi: 0.0,
        maps: vec![AffineMap { base: base0, slope: s0 }, AffineMap { base: base1, slope: s1 }],
    };
    let mut pieces = vec![
        mk(0.0, 1.0, -2.0 * nf - 1.0 + (k - 1.0) / k, 1.0 / k),
        mk(1.0, 1.0, -2.0 * nf, 1.0),
        mk(2.0, 0.0, -2.0 * nf + 1.0, (k - 1.0) / k),
    ];
    for (i, piece) in pieces.iter_mut().enumerate() {
        piece.eta_lo = i as f64;
        piece.eta_hi = i as f64 + 1.0;
    }
    let jstar = vec![(0.0, 1.0)];
    let jminus = complement_intervals(&jstar, 3.0);
    let parm = Parametrisation {
        pieces,
        period_eta: 3.0,
        period_mu: 2.0,
        jstar,
        jminus,
        gains: vec![k],
        offsets: vec![a1],
        c,
    };
    Ok((period, parm, profile))
}

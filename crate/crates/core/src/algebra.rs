//! Closed-form quantities for the singular (eps = 0) periodic solutions of
//!
//! ```text
//! eps u'(t) = -u(t) - K1 u(t - a1 - c u(t)) - K2 u(t - a2 - c u(t))
//! ```
//!
//! Solutions are classified by the number of local maxima per period
//! (unimodal sawtooth, type I and type II bimodal) and indexed by a pair
//! `(n, m)`: `n` whole periods between current time and the first delayed
//! time, `m` whole periods between the two delayed times. Everything here
//! is exact arithmetic on the model parameters; no iteration.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Physical parameters of the DDE. `a2 > a1 > 0` is required, and the ratio
/// `A = a2/a1 > 1` drives the whole branch structure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// Perturbation parameter; ignored by the singular algebra, used by the
    /// integrator. Must be >= 0.
    pub eps: f64,
    /// Gain on the first delayed term, > 0. The bifurcation parameter.
    pub k1: f64,
    /// Gain on the second delayed term; 0 < k2 < 1 keeps the initial value
    /// problem well posed.
    pub k2: f64,
    /// Offset of the first delay, > 0 (time units).
    pub a1: f64,
    /// Offset of the second delay; a2 > a1.
    pub a2: f64,
    /// Slope of the state dependence of both delays, > 0 (time per state unit).
    pub c: f64,
}

#[derive(Debug, Error)]
#[error("invalid model parameters: {}", violations.join("; "))]
pub struct InvalidParams {
    pub violations: Vec<String>,
}

impl ModelParams {
    /// Validates every invariant and reports all violations at once. The
    /// negated comparisons are deliberate: NaN inputs must fail.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    pub fn new(eps: f64, k1: f64, k2: f64, a1: f64, a2: f64, c: f64) -> Result<Self, InvalidParams> {
        let mut violations = Vec::new();
        if !(eps >= 0.0) {
            violations.push(format!("eps must be >= 0 (got {eps})"));
        }
        if !(k1 > 0.0) {
            violations.push(format!("K1 must be > 0 (got {k1})"));
        }
        if !(k2 > 0.0 && k2 < 1.0) {
            violations.push(format!("K2 must satisfy 0 < K2 < 1 (got {k2})"));
        }
        if !(a1 > 0.0) {
            violations.push(format!("a1 must be > 0 (got {a1})"));
        }
        if !(a2 > a1) {
            violations.push(format!("a2 must exceed a1 (got a1={a1}, a2={a2})"));
        }
        if !(c > 0.0) {
            violations.push(format!("c must be > 0 (got {c})"));
        }
        if violations.is_empty() {
            Ok(Self { eps, k1, k2, a1, a2, c })
        } else {
            Err(InvalidParams { violations })
        }
    }

    /// Delay-offset ratio `A = a2/a1 > 1`.
    pub fn ratio(&self) -> f64 {
        self.a2 / self.a1
    }

    pub fn with_k1(&self, k1: f64) -> Self {
        Self { k1, ..*self }
    }

    pub fn with_eps(&self, eps: f64) -> Self {
        Self { eps, ..*self }
    }
}

/// Branch index: `t - alpha1 in [nT, (n+1)T]` and `a2 - a1 in (mT, (m+1)T)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BranchIndex {
    pub n: u32,
    pub m: u32,
}

impl BranchIndex {
    pub fn new(n: u32, m: u32) -> Self {
        Self { n, m }
    }
}

/// Number and arrangement of local maxima per period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SolutionKind {
    /// Sawtooth: one local maximum per period.
    Unimodal,
    /// Two maxima, the first is the global maximum.
    TypeI,
    /// Two maxima, the second is the global maximum.
    TypeII,
}

impl SolutionKind {
    pub fn label(&self) -> &'static str {
        match self {
            SolutionKind::Unimodal => "unimodal",
            SolutionKind::TypeI => "type-i",
            SolutionKind::TypeII => "type-ii",
        }
    }
}

/// One singular periodic solution: period, leg durations and the fractional
/// phase `theta` between the two delayed times.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SingularSolution {
    pub kind: SolutionKind,
    pub index: BranchIndex,
    /// Period T = t1 + t2.
    pub period: f64,
    /// Duration of the rising first leg (equals `period` for unimodal).
    pub t1: f64,
    /// Duration of the second leg (0 for unimodal).
    pub t2: f64,
    /// Fractional part of a period between the two delayed times. Defined
    /// per kind: a2-a1 = (m+theta)T (unimodal), mT + t2 + theta t1 (type I),
    /// mT + theta t2 (type II).
    pub theta: f64,
    /// True when some strict existence inequality holds by less than 1e-9;
    /// branch scans treat such points as boundary candidates.
    pub marginal: bool,
}

/// Signed slack of one strict existence inequality (> 0 means satisfied).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionMargin {
    pub name: &'static str,
    pub margin: f64,
}

#[derive(Debug, Error)]
pub enum AlgebraError {
    /// `m <= n(A-1) - 1`: no unimodal leg carries this index.
    #[error("degenerate index: m - n(A-1) + 1 = {offset_plus_one} is not positive")]
    DegenerateIndex { offset_plus_one: f64 },
    /// The shared denominator s(K1) of the bimodal closed forms vanishes.
    #[error("singular denominator s(K1) = {s} at K1 = {k1}")]
    SingularDenominator { s: f64, k1: f64 },
}

#[derive(Debug, Error)]
pub enum ConstructError {
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    /// One or more strict existence inequalities fail; margins <= 0 listed.
    #[error("existence conditions violated: {}", violated.iter().map(|c| format!("{} (margin {:.3e})", c.name, c.margin)).collect::<Vec<_>>().join(", "))]
    ConditionViolation { violated: Vec<ConditionMargin> },
}

/// Margin below which a satisfied strict inequality is flagged as marginal.
pub const MARGINAL_TOL: f64 = 1e-9;
/// |s(K1)| below this is treated as a singular denominator.
pub const SINGULAR_S_TOL: f64 = 1e-12;

/// `m - n(A-1)`, the only combination through which the closed forms depend
/// on the index pair. Computed as a single expression so that index pairs
/// with equal offsets evaluate bit-identically (rational-ratio alignment).
pub fn index_offset(params: &ModelParams, idx: BranchIndex) -> f64 {
    idx.m as f64 - idx.n as f64 * (params.ratio() - 1.0)
}

/// Quadratic (in K1) whose negativity is the lower theta bound for unimodal
/// solutions; its roots are the leg endpoints M-.. M+.
pub fn g_nm(params: &ModelParams, idx: BranchIndex, k1: f64) -> f64 {
    let a = params.ratio();
    let k2 = params.k2;
    let q = index_offset(params, idx);
    q * ((k1 + k2) * (k1 + k2) - 1.0) - k1 * ((a - 1.0) * (1.0 + k2) - k2)
        + k2 * (1.0 + k2)
        + (a - 1.0)
}

/// Numerator polynomial of the type II second-leg duration.
pub fn h_nm(params: &ModelParams, idx: BranchIndex, k1: f64) -> f64 {
    let a = params.ratio();
    let k2 = params.k2;
    let q = index_offset(params, idx);
    q * (k1 + k2 + 1.0) * (k1 + 2.0 * k2 - 1.0) - k1 * ((a - 1.0) * (1.0 + k2) - k2)
        + k2 * (1.0 + k2)
        + (a - 1.0) * (1.0 - k2)
}

/// K1 value at which the unimodal upper theta bound (theta < 1) becomes
/// tight: the left end of the unimodal leg when it binds.
pub fn l_nm(params: &ModelParams, idx: BranchIndex) -> Result<f64, AlgebraError> {
    let q1 = index_offset(params, idx) + 1.0;
    if q1 <= 0.0 {
        return Err(AlgebraError::DegenerateIndex { offset_plus_one: q1 });
    }
    Ok((params.ratio() - 1.0) / q1 - (1.0 + params.k2))
}

/// Real roots of `g_nm` in K1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum RootSet {
    None,
    Single(f64),
    /// Ordered lower, upper.
    Pair(f64, f64),
}

/// Discriminant window treated as a double root; the cusp regime operates
/// deliberately close to double roots.
const DISC_TOL: f64 = 1e-14;

/// Roots of `g_nm(K1) = 0`. When the quadratic coefficient `m - n(A-1)`
/// vanishes exactly the linear equation is solved instead; the larger-
/// magnitude quadratic root is computed first and the other recovered from
/// the product of roots to avoid cancellation.
pub fn m_roots(params: &ModelParams, idx: BranchIndex) -> RootSet {
    let a_ratio = params.ratio();
    let k2 = params.k2;
    let q = index_offset(params, idx);
    let beta = (a_ratio - 1.0) * (1.0 + k2) - k2;
    // g = q K1^2 + b K1 + c0
    let b = 2.0 * q * k2 - beta;
    let c0 = q * (k2 * k2 - 1.0) + k2 * (1.0 + k2) + (a_ratio - 1.0);
    if q == 0.0 {
        if b == 0.0 {
            return RootSet::None;
        }
        let root = -c0 / b;
        if root > 0.0 {
            return RootSet::Single(root);
        }
        return RootSet::None;
    }
    let disc = b * b - 4.0 * q * c0;
    if disc < -DISC_TOL {
        return RootSet::None;
    }
    if disc <= DISC_TOL {
        let double = -b / (2.0 * q);
        return RootSet::Pair(double, double);
    }
    let sqrt_disc = disc.sqrt();
    let w = if b >= 0.0 {
        -0.5 * (b + sqrt_disc)
    } else {
        -0.5 * (b - sqrt_disc)
    };
    let r1 = w / q;
    let r2 = c0 / w;
    if r1 <= r2 {
        RootSet::Pair(r1, r2)
    } else {
        RootSet::Pair(r2, r1)
    }
}

impl RootSet {
    /// Largest root, if any.
    pub fn upper(&self) -> Option<f64> {
        match *self {
            RootSet::None => None,
            RootSet::Single(r) => Some(r),
            RootSet::Pair(_, hi) => Some(hi),
        }
    }

    pub fn lower(&self) -> Option<f64> {
        match *self {
            RootSet::None => None,
            RootSet::Single(r) => Some(r),
            RootSet::Pair(lo, _) => Some(lo),
        }
    }
}

/// Smallest index `m` admitting a unimodal solution for this `n`: the unique
/// integer in `(n(A-1)-1, n(A-1)]`.
pub fn m_zero(params: &ModelParams, n: u32) -> i64 {
    let x = n as f64 * (params.ratio() - 1.0);
    x.floor() as i64
}

/// Index value above which the theta < 1 bound holds for every K1 > 1.
pub fn m_star(params: &ModelParams, n: u32) -> f64 {
    let a = params.ratio();
    n as f64 * (a - 1.0) + (a - 3.0 - params.k2) / (2.0 + params.k2)
}

/// Largest index (not necessarily integer) for which the unimodal leg
/// interval (M-, M+) is nonempty.
pub fn m_star_star(params: &ModelParams, n: u32) -> f64 {
    let a = params.ratio();
    let k2 = params.k2;
    let p = 1.0 + k2;
    let half = 0.5 * ((a - 1.0) * (p * p - k2) + k2);
    let rad = (1.0 + p * p) * (((a - 1.0) * k2 + 1.0) * ((a - 1.0) * k2 + 1.0) - 1.0);
    n as f64 * (a - 1.0) + half - 0.5 * rad.sqrt()
}

/// Upper index bound for the fold at M+: legs with `m in (n(A-1), m_dagger)`
/// end in a genuine fold where unimodal and type I solutions coincide.
pub fn m_dagger(params: &ModelParams, n: u32) -> f64 {
    let a = params.ratio();
    let k2 = params.k2;
    let lim = (1.0 + k2) / (2.0 + k2);
    let alt = 1.0 - (a - 1.0) / ((2.0 + k2) * (3.0 + k2));
    m_star(params, n) + lim.min(alt)
}

/// Shared denominator `s(K1) = 1 - m(K1-1) + n(1+K1+K2)` of the bimodal
/// period and leg-duration formulas.
pub fn s_of_k1(idx: BranchIndex, k2: f64, k1: f64) -> f64 {
    1.0 - idx.m as f64 * (k1 - 1.0) + idx.n as f64 * (1.0 + k1 + k2)
}

/// Raw closed-form evaluation for one kind at one parameter point, before
/// any condition checks.
#[derive(Debug, Clone, Copy)]
struct RawSolution {
    period: f64,
    t1: f64,
    t2: f64,
    theta: f64,
}

fn raw_unimodal(params: &ModelParams, idx: BranchIndex) -> RawSolution {
    let (k1, k2, a1, a2) = (params.k1, params.k2, params.a1, params.a2);
    let (n, m) = (idx.n as f64, idx.m as f64);
    let period = (a1 * (1.0 + k1 + k2) + (a2 - a1) * k2)
        / (1.0 + (m + 1.0) * k2 + n * (1.0 + k1 + k2));
    let theta = (a2 - a1) / period - m;
    RawSolution { period, t1: period, t2: 0.0, theta }
}

fn bimodal_period(params: &ModelParams, s: f64) -> f64 {
    let (k1, k2, a1, a2) = (params.k1, params.k2, params.a1, params.a2);
    (a1 * (1.0 + k1 + k2) + (a2 - a1) * (1.0 - k1)) / s
}

fn raw_bimodal(params: &ModelParams, idx: BranchIndex, kind: SolutionKind) -> Result<RawSolution, AlgebraError> {
    let s = s_of_k1(idx, params.k2, params.k1);
    if s.abs() <= SINGULAR_S_TOL {
        return Err(AlgebraError::SingularDenominator { s, k1: params.k1 });
    }
    let period = bimodal_period(params, s);
    let m = idx.m as f64;
    let (a1, a2) = (params.a1, params.a2);
    match kind {
        SolutionKind::TypeI => {
            let t2 = a1 * g_nm(params, idx, params.k1) / s;
            let t1 = period - t2;
            let theta = (a2 - a1 - m * period - t2) / t1;
            Ok(RawSolution { period, t1, t2, theta })
        }
        SolutionKind::TypeII => {
            let t2 = a1 * h_nm(params, idx, params.k1) / s;
            let t1 = period - t2;
            let theta = (a2 - a1 - m * period) / t2;
            Ok(RawSolution { period, t1, t2, theta })
        }
        SolutionKind::Unimodal => unreachable!("bimodal evaluation for unimodal kind"),
    }
}

/// Signed margins of every strict inequality required for the given kind to
/// exist at these parameters. All margins are continuous in K1 away from
/// s(K1) = 0, which makes them usable as bisection targets.
pub fn condition_margins(
    params: &ModelParams,
    idx: BranchIndex,
    kind: SolutionKind,
) -> Result<Vec<ConditionMargin>, AlgebraError> {
    let (k1, k2) = (params.k1, params.k2);
    let mut out = Vec::new();
    let mut push = |name: &'static str, margin: f64| out.push(ConditionMargin { name, margin });
    match kind {
        SolutionKind::Unimodal => {
            let raw = raw_unimodal(params, idx);
            push("K1>1", k1 - 1.0);
            push("theta<1", 1.0 - raw.theta);
            push("theta>K2/(K1+K2-1)", raw.theta - k2 / (k1 + k2 - 1.0));
        }
        SolutionKind::TypeI => {
            let raw = raw_bimodal(params, idx, kind)?;
            push("K1>1", k1 - 1.0);
            push("T>0", raw.period);
            push("T2>0", raw.t2);
            push("theta>0", raw.theta);
            push("theta<1-1/K1", 1.0 - 1.0 / k1 - raw.theta);
            push(
                "theta*T1>(K2/(K1-1))*T2",
                raw.theta * raw.t1 - k2 / (k1 - 1.0) * raw.t2,
            );
            push(
                "theta*T1<T1-T2/K2",
                raw.t1 - raw.t2 / k2 - raw.theta * raw.t1,
            );
            // Negativity of the field at the eighth parametrisation corner,
            // F = [T1(1 - K1(1-theta)) + (K1+K2-1) T2]/c. Not implied by
            // the bounds above (grid verification finds violations without
            // it, e.g. A=2.776, K2=0.881, K1=1.796, n=1, m=2).
            push(
                "T1*(K1*(1-theta)-1)>(K1+K2-1)*T2",
                raw.t1 * (k1 * (1.0 - raw.theta) - 1.0) - (k1 + k2 - 1.0) * raw.t2,
            );
        }
        SolutionKind::TypeII => {
            let raw = raw_bimodal(params, idx, kind)?;
            push("K1+K2>1", k1 + k2 - 1.0);
            push("T>0", raw.period);
            push("T2>0", raw.t2);
            push("theta>0", raw.theta);
            push("theta<1", 1.0 - raw.theta);
            push(
                "theta<T1/T2+1-1/K2",
                raw.t1 / raw.t2 + 1.0 - 1.0 / k2 - raw.theta,
            );
            // Field negativity at the eighth corner,
            // F = [theta T2 (K1+K2) - (K1+K2-1) T1]/c. For K1 >= 1 this is
            // the stated bound and implies the sixth-corner one; for
            // K1 < 1 it is needed in addition to the two mixed bounds.
            push(
                "theta<(1-1/(K1+K2))*T1/T2",
                (1.0 - 1.0 / (k1 + k2)) * raw.t1 / raw.t2 - raw.theta,
            );
            if k1 < 1.0 {
                push(
                    "theta<1-((1-K1)/K1)*T1/T2",
                    1.0 - (1.0 - k1) / k1 * raw.t1 / raw.t2 - raw.theta,
                );
                push(
                    "theta<(1-K1/(2K1+K2-1))*T1/T2",
                    (1.0 - k1 / (2.0 * k1 + k2 - 1.0)) * raw.t1 / raw.t2 - raw.theta,
                );
            }
        }
    }
    Ok(out)
}

/// Evaluates the closed forms without checking the existence inequalities.
/// Intended for limits taken exactly at leg boundaries, where a strict
/// inequality holds with margin zero and [`construct`] rejects the point.
pub fn evaluate_unchecked(
    params: &ModelParams,
    idx: BranchIndex,
    kind: SolutionKind,
) -> Result<SingularSolution, AlgebraError> {
    let raw = match kind {
        SolutionKind::Unimodal => raw_unimodal(params, idx),
        _ => raw_bimodal(params, idx, kind)?,
    };
    Ok(SingularSolution {
        kind,
        index: idx,
        period: raw.period,
        t1: raw.t1,
        t2: raw.t2,
        theta: raw.theta,
        marginal: true,
    })
}

/// Evaluates the closed forms for one kind and checks every strict existence
/// inequality. Pure: identical inputs give bit-identical results.
pub fn construct(
    params: &ModelParams,
    idx: BranchIndex,
    kind: SolutionKind,
) -> Result<SingularSolution, ConstructError> {
    let margins = condition_margins(params, idx, kind)?;
    let violated: Vec<ConditionMargin> = margins
        .iter()
        .filter(|c| c.margin <= 0.0 || c.margin.is_nan())
        .cloned()
        .collect();
    if !violated.is_empty() {
        return Err(ConstructError::ConditionViolation { violated });
    }
    let marginal = margins.iter().any(|c| c.margin < MARGINAL_TOL);
    let raw = match kind {
        SolutionKind::Unimodal => raw_unimodal(params, idx),
        _ => raw_bimodal(params, idx, kind)?,
    };
    Ok(SingularSolution {
        kind,
        index: idx,
        period: raw.period,
        t1: raw.t1,
        t2: raw.t2,
        theta: raw.theta,
        marginal,
    })
}

/// Peak-to-trough height of the singular profile: T/c for the sawtooth,
/// T1/c for type I (first maximum is global), (T1 + (1-theta) T2)/c for
/// type II (second maximum is global).
pub fn amplitude(sol: &SingularSolution, params: &ModelParams) -> f64 {
    match sol.kind {
        SolutionKind::Unimodal => sol.period / params.c,
        SolutionKind::TypeI => sol.t1 / params.c,
        SolutionKind::TypeII => (sol.t1 + (1.0 - sol.theta) * sol.t2) / params.c,
    }
}

//! Acceptance suite: one test per criterion, each printing a pass line.
//!
//! Criteria 1-5 exercise the exact eps = 0 machinery (closed forms, leg
//! boundaries, grid verification, coincidence limits, rational-ratio
//! alignment). Criteria 6-8 integrate the eps > 0 equation and check that
//! the singular predictions persist: orbit metrics against the closed
//! forms, the hysteresis window between the two folds, and the stable
//! period-doubled orbit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use singular_dde::algebra::{
    construct, evaluate_unchecked, l_nm, m_roots, m_star_star, m_zero, BranchIndex, ModelParams,
    RootSet, SolutionKind,
};
use singular_dde::analysis::{compare_to_singular, converge_run, extract_with, sweep, RunOptions};
use singular_dde::branch::{
    alignment_check, assemble, bimodal_leg, cusp_locus, unimodal_legs, BifurcationKind,
};
use singular_dde::profiles::{
    evaluate_f, one_delay_solution, parametrisation, profile_of, verify_parametrisation,
    verify_with_grid,
};
use singular_dde::simulator::{integrate, HistorySpec, StepControl};

fn params(a: f64, k2: f64, k1: f64, eps: f64) -> ModelParams {
    ModelParams::new(eps, k1, k2, 1.0, a, 1.0).unwrap()
}

#[test]
fn acceptance_1_algebraic_fixtures() {
    let idx01 = BranchIndex::new(0, 1);
    match m_roots(&params(6.0, 0.5, 2.0, 0.0), idx01) {
        RootSet::Pair(lo, hi) => {
            assert!((lo - 1.0).abs() <= 1e-9 && (hi - 5.0).abs() <= 1e-9);
        }
        other => panic!("expected pair (1,5), got {other:?}"),
    }
    assert_eq!(l_nm(&params(6.0, 0.5, 2.0, 0.0), BranchIndex::new(0, 0)).unwrap(), 3.5);
    assert_eq!(l_nm(&params(5.0, 0.5, 2.0, 0.0), BranchIndex::new(0, 0)).unwrap(), 2.5);
    assert_eq!(l_nm(&params(5.75, 0.5, 2.0, 0.0), idx01).unwrap(), 0.875);
    match m_roots(&params(4.54, 0.5, 2.0, 0.0), idx01) {
        RootSet::Pair(lo, hi) => {
            assert!((lo - 1.6066).abs() <= 5e-5, "lower root {lo}");
            assert!((hi - 2.2034).abs() <= 5e-5, "upper root {hi}");
        }
        other => panic!("expected pair near (1.6066, 2.2034), got {other:?}"),
    }
    match m_roots(&params(5.75, 0.5, 2.0, 0.0), idx01) {
        RootSet::Pair(lo, _) => assert!((lo - 1.0348).abs() <= 5e-5, "lower root {lo}"),
        other => panic!("expected pair, got {other:?}"),
    }
    match m_roots(&params(1.5, 0.5, 2.0, 0.0), BranchIndex::new(0, 0)) {
        RootSet::Single(r) => assert!((r - 5.0).abs() <= 1e-12),
        other => panic!("expected single root 5, got {other:?}"),
    }
    let expected = [(1, 4.5, 2.0), (2, 7.0, 1.5), (3, 9.5, 4.0 / 3.0)];
    for (m, a, k1) in expected {
        let (ca, ck1) = cusp_locus(0.5, 0, m).unwrap();
        assert!((ca - a).abs() <= 1e-12 && (ck1 - k1).abs() <= 1e-12);
    }
    println!("[PASS] criterion 1: algebraic fixtures (roots, L values, cusp locus)");
}

#[test]
fn acceptance_2_leg_fixtures() {
    let p6 = params(6.0, 0.5, 2.0, 0.0);
    let t1 = bimodal_leg(&p6, 0, 1, SolutionKind::TypeI, 50.0).unwrap();
    assert!((t1.k1_lo - 4.7122).abs() <= 1e-3, "type I lo {}", t1.k1_lo);
    assert!((t1.k1_hi - 5.0).abs() <= 1e-3, "type I hi {}", t1.k1_hi);
    let t2 = bimodal_leg(&p6, 0, 1, SolutionKind::TypeII, 50.0).unwrap();
    assert!((t2.k1_lo - 3.5).abs() <= 1e-3, "type II lo {}", t2.k1_lo);
    assert!((t2.k1_hi - 4.5549).abs() <= 1e-3, "type II hi {}", t2.k1_hi);

    let branch = assemble(&params(5.0, 0.5, 2.0, 0.0), 0, 50.0);
    let folds: Vec<f64> = branch
        .points
        .iter()
        .filter(|pt| pt.kind == BifurcationKind::Fold)
        .map(|pt| pt.k1)
        .collect();
    assert_eq!(folds.len(), 2, "A=5 folds: {folds:?}");
    assert!((folds[0] - 2.5).abs() <= 1e-3);
    assert!((folds[1] - 3.2808).abs() <= 1e-3);

    let legs = unimodal_legs(&params(11.1, 0.5, 2.0, 0.0), 1);
    assert_eq!(legs.first().map(|l| l.index.m), Some(10), "A=11.1 n=1 first leg");
    println!("[PASS] criterion 2: leg fixtures (bimodal intervals, A=5 folds, A=11.1 n=1)");
}

/// Draws a random valid (params, index, K1-inside-leg) for the kind, or
/// None when this (A, K2, n, m) has no leg.
fn draw_case(
    rng: &mut ChaCha8Rng,
    kind: SolutionKind,
) -> Option<(ModelParams, BranchIndex)> {
    let a = 1.0 + 11.0 * rng.gen::<f64>();
    let k2 = 0.05 + 0.9 * rng.gen::<f64>();
    let p = params(a, k2, 2.0, 0.0);
    let frac = 0.05 + 0.9 * rng.gen::<f64>();
    match kind {
        SolutionKind::Unimodal => {
            let n = rng.gen_range(0..3u32);
            let legs = unimodal_legs(&p, n);
            if legs.is_empty() {
                return None;
            }
            let leg = &legs[rng.gen_range(0..legs.len())];
            if leg.degenerate_linear {
                return None;
            }
            let hi = if leg.k1_hi.is_finite() { leg.k1_hi } else { leg.k1_lo + 8.0 };
            let k1 = leg.k1_lo + frac * (hi - leg.k1_lo);
            Some((p.with_k1(k1), leg.index))
        }
        _ => {
            let n = rng.gen_range(0..2u32);
            let m_lo = m_zero(&p, n).max(0);
            let m_hi = (m_star_star(&p, n).floor() as i64 + 1).max(m_lo);
            let m = rng.gen_range(m_lo..=m_hi) as u32;
            let leg = bimodal_leg(&p, n, m, kind, 30.0)?;
            let hi = if leg.k1_hi.is_finite() { leg.k1_hi } else { leg.k1_lo + 8.0 };
            let k1 = leg.k1_lo + frac * (hi - leg.k1_lo);
            Some((p.with_k1(k1), leg.index))
        }
    }
}

#[test]
fn acceptance_3_verification_property_suite() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_dde0);
    for kind in [SolutionKind::Unimodal, SolutionKind::TypeI, SolutionKind::TypeII] {
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < 200 {
            attempts += 1;
            assert!(attempts < 40_000, "draw budget exhausted for {kind:?} at {accepted}");
            let (p, idx) = match draw_case(&mut rng, kind) {
                Some(c) => c,
                None => continue,
            };
            let sol = match construct(&p, idx, kind) {
                Ok(s) if !s.marginal => s,
                _ => continue,
            };
            let report = verify_with_grid(&p, &sol, 200).unwrap_or_else(|e| {
                panic!("{kind:?} at A={} K2={} K1={} n={} m={}: {e}", p.ratio(), p.k2, p.k1, idx.n, idx.m)
            });
            assert!(
                report.pass && report.max_delay_identity_residual <= 1e-9,
                "{kind:?} at A={} K2={} K1={} n={} m={}: {report:?}",
                p.ratio(), p.k2, p.k1, idx.n, idx.m
            );
            // Per-piece affinity of F.
            let prof = profile_of(&p, &sol).unwrap();
            let parm = parametrisation(&p, &sol).unwrap();
            let scale = 1.0 + prof.max_abs_u() * (1.0 + p.k1 + p.k2) / p.c;
            for piece in &parm.pieces {
                let f_lo = evaluate_f(&prof, &parm, piece.eta_lo);
                let f_hi = evaluate_f(&prof, &parm, piece.eta_hi);
                let f_mid = evaluate_f(&prof, &parm, 0.5 * (piece.eta_lo + piece.eta_hi));
                assert!((f_mid - 0.5 * (f_lo + f_hi)).abs() <= 1e-9 * scale);
            }
            accepted += 1;
        }
    }
    for k in [1.5, 2.0, 5.0, 20.0] {
        for n in 0..=3u32 {
            let (_, parm, prof) = one_delay_solution(1.0, 1.0, k, n).unwrap();
            let rep = verify_parametrisation(&prof, &parm, 200);
            assert!(rep.pass, "one-delay K={k} n={n}: {rep:?}");
        }
    }
    println!("[PASS] criterion 3: 200 random draws per kind verified; one-delay grid passes");
}

#[test]
fn acceptance_4_coincidence_limits() {
    let base = params(6.0, 0.5, 2.0, 0.0);
    let idx01 = BranchIndex::new(0, 1);
    let m_plus = m_roots(&base, idx01).upper().unwrap();
    let pk = base.with_k1(m_plus - 1e-9);
    let t1 = construct(&pk, idx01, SolutionKind::TypeI).unwrap();
    let uni = construct(&pk, idx01, SolutionKind::Unimodal).unwrap();
    assert!(t1.t2 <= 1e-6 * t1.period, "type I T2 at fold: {}", t1.t2);
    assert!((t1.period - uni.period).abs() <= 1e-6 * uni.period);

    // Exactly at L00 theta = 0, a strict boundary, so the closed forms are
    // evaluated unchecked: the type II legs split as K2 T and (1-K2) T.
    let l00 = l_nm(&base, BranchIndex::new(0, 0)).unwrap();
    let at_l = evaluate_unchecked(&base.with_k1(l00), idx01, SolutionKind::TypeII).unwrap();
    assert!((at_l.t2 - base.k2 * at_l.period).abs() <= 1e-9 * at_l.period);
    assert!((at_l.t1 - (1.0 - base.k2) * at_l.period).abs() <= 1e-9 * at_l.period);

    let mut prev = f64::INFINITY;
    for k in 2..=6 {
        let sol = construct(
            &base.with_k1(l00 + 10f64.powi(-k)),
            idx01,
            SolutionKind::TypeII,
        )
        .unwrap();
        assert!(sol.theta > 0.0 && sol.theta < prev, "theta not monotone at k={k}");
        prev = sol.theta;
    }
    println!("[PASS] criterion 4: fold coincidences at M+ and L00, theta monotone to 0");
}

#[test]
fn acceptance_5_alignment() {
    let p55 = params(5.5, 0.5, 2.0, 0.0);
    let (i0, i1) = (BranchIndex::new(0, 2), BranchIndex::new(2, 11));
    match (l_nm(&p55, i0), l_nm(&p55, i1)) {
        (Ok(a), Ok(b)) => assert_eq!(a.to_bits(), b.to_bits(), "L differs"),
        other => panic!("L undefined: {other:?}"),
    }
    match (m_roots(&p55, i0), m_roots(&p55, i1)) {
        (RootSet::None, RootSet::None) => {}
        (RootSet::Single(a), RootSet::Single(b)) => assert_eq!(a.to_bits(), b.to_bits()),
        (RootSet::Pair(a0, a1), RootSet::Pair(b0, b1)) => {
            assert_eq!(a0.to_bits(), b0.to_bits());
            assert_eq!(a1.to_bits(), b1.to_bits());
        }
        other => panic!("root sets differ in kind: {other:?}"),
    }
    assert!(alignment_check(&p55, 1, 0, 2));

    let p6 = params(6.0, 0.5, 2.0, 0.0);
    let (j0, j1) = (BranchIndex::new(0, 1), BranchIndex::new(1, 6));
    assert_eq!(
        l_nm(&p6, j0).unwrap().to_bits(),
        l_nm(&p6, j1).unwrap().to_bits()
    );
    match (m_roots(&p6, j0), m_roots(&p6, j1)) {
        (RootSet::Pair(a0, a1), RootSet::Pair(b0, b1)) => {
            assert_eq!(a0.to_bits(), b0.to_bits());
            assert_eq!(a1.to_bits(), b1.to_bits());
        }
        other => panic!("A=6 expected pairs: {other:?}"),
    }
    assert!(alignment_check(&p6, 1, 0, 1));
    println!("[PASS] criterion 5: exact branch alignment for A=11/2 and A=6");
}

#[test]
fn acceptance_6_simulation_vs_singular() {
    // Unimodal m=0 at A=6, K1=4: eps = 0.05 run within tolerance, and the
    // amplitude error shrinks monotonically along eps = 0.2, 0.1, 0.05.
    let mut amp_errors = Vec::new();
    let mut metrics_005 = None;
    for eps in [0.2, 0.1, 0.05] {
        let p = params(6.0, 0.5, 4.0, eps);
        let sol = construct(&p, BranchIndex::new(0, 0), SolutionKind::Unimodal).unwrap();
        let (_, m) = converge_run(
            &p,
            HistorySpec::warm_start(sol),
            &RunOptions { t_initial: 150.0, t_max: 500.0, ..Default::default() },
        )
        .unwrap();
        assert!(m.converged, "eps={eps} did not converge");
        let cmp = compare_to_singular(&m, &sol, &p);
        amp_errors.push(cmp.amp_rel_err);
        if eps == 0.05 {
            metrics_005 = Some((m, cmp, sol));
        }
    }
    let (m, cmp, sol) = metrics_005.unwrap();
    assert_eq!(m.modality, 1, "unimodal orbit");
    assert!(cmp.period_rel_err <= 0.05, "period {} vs {}", m.period, sol.period);
    let singular_amp = singular_dde::algebra::amplitude(&sol, &params(6.0, 0.5, 4.0, 0.05));
    assert!(
        m.amplitude < singular_amp && cmp.amp_rel_err <= 0.05,
        "amplitude {} should sit within 5% below {singular_amp}",
        m.amplitude
    );
    assert!(
        amp_errors[0] > amp_errors[1] && amp_errors[1] > amp_errors[2],
        "amplitude error not monotone over eps: {amp_errors:?}"
    );

    // Type II orbit at A = 7/6, K1 = 4, cold start.
    let p = ModelParams::new(0.05, 4.0, 0.5, 1.0, 7.0 / 6.0, 1.0).unwrap();
    let (_, m) = converge_run(&p, HistorySpec::cold(&p), &RunOptions::default()).unwrap();
    let sol = construct(&p, BranchIndex::new(0, 0), SolutionKind::TypeII).unwrap();
    let cmp = compare_to_singular(&m, &sol, &p);
    assert_eq!(m.modality, 2, "type II orbit has two maxima");
    assert!(cmp.amp_rel_err <= 0.10, "amplitude {} vs singular", m.amplitude);
    println!(
        "[PASS] criterion 6: A=6 orbit within 5% (amp errors {:?}), A=7/6 type II within 10%",
        amp_errors
    );
}

#[test]
fn acceptance_7_hysteresis_window() {
    let opts = RunOptions::default();
    // A = 4.54: folds at 1.9892 and 2.079 for eps = 0.02.
    let p = params(4.54, 0.5, 2.0, 0.02);
    let up = sweep(&p, 1.90, 2.15, 60, 0.02, &opts);
    let down = sweep(&p, 2.15, 1.90, 60, 0.02, &opts);
    let mid = |j: &(f64, f64)| 0.5 * (j.0 + j.1);
    let up_jump = up
        .jumps
        .iter()
        .map(mid)
        .min_by(|a, b| (a - 2.079).abs().total_cmp(&(b - 2.079).abs()))
        .expect("up sweep must jump");
    let down_jump = down
        .jumps
        .iter()
        .map(mid)
        .min_by(|a, b| (a - 1.9892).abs().total_cmp(&(b - 1.9892).abs()))
        .expect("down sweep must jump");
    assert!((up_jump - 2.079).abs() <= 0.02, "up jump at {up_jump}");
    assert!((down_jump - 1.9892).abs() <= 0.02, "down jump at {down_jump}");
    assert!(down_jump < up_jump, "bistability window is not empty");

    // A = 4.48: the fold pair has unfolded; no hysteresis, but a smooth
    // unimodal <-> bimodal transition near K1 = 1.92.
    let p = params(4.48, 0.5, 2.0, 0.02);
    let up48 = sweep(&p, 1.90, 2.15, 60, 0.02, &opts);
    let down48 = sweep(&p, 2.15, 1.90, 60, 0.02, &opts);
    assert!(
        up48.jumps.is_empty() && down48.jumps.is_empty(),
        "A=4.48 should have no period jumps: {:?} {:?}",
        up48.jumps,
        down48.jumps
    );
    let transition = up48
        .samples
        .windows(2)
        .find(|w| w[0].modality != w[1].modality)
        .map(|w| 0.5 * (w[0].k1 + w[1].k1))
        .expect("modality transition present");
    assert!((transition - 1.92).abs() <= 0.03, "transition at {transition}");
    println!(
        "[PASS] criterion 7: A=4.54 bistable window [{down_jump:.4}, {up_jump:.4}], A=4.48 smooth transition at {transition:.4}"
    );
}

#[test]
fn acceptance_8_period_doubling() {
    // Stable period-doubled orbit at A = 1.5, K1 = 2.6, eps = 0.05 from a
    // cold start. The doubling mode grows slowly, so use a long fixed
    // horizon rather than an early convergence exit.
    let p = params(1.5, 0.5, 2.6, 0.05);
    let traj = integrate(&p, HistorySpec::cold(&p), 600.0, StepControl::default()).unwrap();
    let m = extract_with(&traj, 0.25, &p).unwrap();
    assert!(m.converged, "doubled orbit converged");
    assert!((m.period - 7.0).abs() <= 0.7, "period {} should be 7 +- 10%", m.period);
    assert!(m.modality >= 4, "modality {} should be >= 4", m.modality);

    // The doubling onsets D1 = 2.3347 and D2 = 3.3414 are bracketed by
    // modality / period jumps in cold-started scans to within 0.1.
    let onset = |k1s: &[f64]| -> Option<(f64, f64)> {
        let mut prev: Option<(f64, bool)> = None;
        for &k1 in k1s {
            let pk = p.with_k1(k1);
            let traj = integrate(&pk, HistorySpec::cold(&pk), 500.0, StepControl::default()).ok()?;
            let m = extract_with(&traj, 0.25, &pk).ok()?;
            let doubled = m.modality >= 4 || m.period > 5.0;
            if let Some((k_prev, was)) = prev {
                if was != doubled {
                    return Some((k_prev.min(k1), k_prev.max(k1)));
                }
            }
            prev = Some((k1, doubled));
        }
        None
    };
    let grid_d1: Vec<f64> = (0..=6).map(|i| 2.25 + 0.03 * i as f64).collect();
    let (lo1, hi1) = onset(&grid_d1).expect("doubling onset near D1");
    assert!(
        lo1 - 0.1 <= 2.3347 && 2.3347 <= hi1 + 0.1,
        "D1 bracket ({lo1}, {hi1}) vs 2.3347"
    );
    let grid_d2: Vec<f64> = (0..=6).map(|i| 3.45 - 0.04 * i as f64).collect();
    let (lo2, hi2) = onset(&grid_d2).expect("doubling onset near D2");
    assert!(
        lo2 - 0.1 <= 3.3414 && 3.3414 <= hi2 + 0.1,
        "D2 bracket ({lo2}, {hi2}) vs 3.3414"
    );
    println!(
        "[PASS] criterion 8: doubled orbit period {:.4}, modality {}; D1 in ({lo1:.3},{hi1:.3}), D2 in ({lo2:.3},{hi2:.3})",
        m.period, m.modality
    );
}

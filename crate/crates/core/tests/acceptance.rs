//! Acceptance suite: one test per shipped criterion, each printing a
//! PASS/FAIL line with the measured numbers.
//!
//! Three sub-checks are expected to fail and fail honestly: the closed
//! gate at ratios (√143, 16) has an exact infidelity floor of 2.68e-4
//! (the √257 sector cannot return perfectly), which caps criterion 1,
//! the γ = 0 end of the dephasing sweep, and the best reachable optimum
//! of criterion 8 at 8.6e-5 inside the search box. The suite states the
//! measured values so the floor is visible, not hidden behind loosened
//! tolerances.

use ndarray::Array2;
use num_complex::Complex64 as C64;
use std::sync::OnceLock;
use std::time::Instant;
use toffoli_sim::*;

type CMat = Array2<C64>;

const ETA_OMEGA1: f64 = 2.0 * std::f64::consts::PI * 1.0e4;

fn default_noise(n_bar: f64, gamma: f64) -> NoiseParams {
    NoiseParams::new(1.0 / 0.14, n_bar, gamma).unwrap()
}

fn printed_matrix() -> CMat {
    let mut m = CMat::eye(8);
    m[[4, 4]] = C64::new(0.999, 0.0);
    m[[5, 5]] = C64::new(0.998, 0.0);
    m[[6, 6]] = C64::new(0.0, 0.0);
    m[[7, 7]] = C64::new(0.0, 0.0);
    m[[6, 7]] = C64::new(1.0, 0.0);
    m[[7, 6]] = C64::new(1.0, 0.0);
    m
}

fn chi_of_logical(m: &CMat) -> ProcessMatrix {
    let m_dag = m.t().mapv(|z| z.conj());
    chi_of_map(|rho: &CMat| Ok(m.dot(rho).dot(&m_dag))).unwrap()
}

/// Closed-gate fidelity numbers at the default configuration.
fn closed_gate_fidelity() -> (f64, f64) {
    let spec = build_space(2).unwrap();
    let gate = ToffoliGate::new(&spec, &RabiConfig::default()).unwrap();
    let chi = chi_of_logical(&gate.logical().unwrap());
    let chi_t = chi_of_unitary(&ideal_toffoli()).unwrap();
    let f_gate = gate_fidelity(&chi_t, &chi);
    (f_gate, avg_state_fidelity(f_gate, 8))
}

/// QPT of the noisy gate; returns (chi, fidelity, max row discrepancy,
/// leakage of the |111> probe, diagnostics of that probe).
fn noisy_qpt(
    nph: usize,
    noise: &NoiseParams,
) -> (ProcessMatrix, f64, f64, f64, toffoli_sim::lindblad::EvolveDiagnostics) {
    let spec = build_space(nph).unwrap();
    let cfg = RabiConfig::default();
    let gate = ToffoliGate::new(&spec, &cfg).unwrap();
    let integ = IntegratorConfig::for_gate(&cfg);
    let chi = chi_of_map(|rho: &CMat| Ok(noisy_gate_map(&gate, rho, noise, &integ)?.rho)).unwrap();
    let chi_t = chi_of_unitary(&ideal_toffoli()).unwrap();
    let f_avg = avg_state_fidelity(gate_fidelity(&chi_t, &chi), 8);
    let (_, max_disc) = discrepancy_rows(&chi, &chi_t);
    let mut probe = CMat::zeros((8, 8));
    probe[[7, 7]] = C64::new(1.0, 0.0);
    let out = noisy_gate_map(&gate, &probe, noise, &integ).unwrap();
    (chi, f_avg, max_disc, out.leakage, out.diagnostics)
}

/// The n̄ = 1 heating point at the production cutoff is shared between
/// criteria 6 and 9.
fn heating_nbar1() -> &'static (f64, f64) {
    static CELL: OnceLock<(f64, f64)> = OnceLock::new();
    CELL.get_or_init(|| {
        let (_, f_avg, _, leak, _) = noisy_qpt(10, &default_noise(1.0, 1.0 / 0.085));
        (f_avg, leak)
    })
}

#[test]
fn criterion_01_unitary_gate_quality() {
    let t0 = Instant::now();
    let (_, f_avg) = closed_gate_fidelity();
    let infidelity = 1.0 - f_avg;
    let pass = infidelity <= 1e-4;
    println!(
        "criterion 1 (unitary gate quality): {} — 1 - F_avg = {infidelity:.4e} (limit 1e-4) in {:.1?}",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(
        pass,
        "1 - F_avg = {infidelity:.4e} > 1e-4: the sqrt(257) sector of the default \
         ratio working point (sqrt(143), 16) caps the closed gate at an exact \
         infidelity of 2.68e-4; no tighter value exists for this pulse schedule"
    );
    assert!(t0.elapsed().as_secs() < 10, "runtime budget exceeded");
}

#[test]
fn criterion_02_printed_matrix_reproduction() {
    let t0 = Instant::now();
    let spec = build_space(2).unwrap();
    let gate = ToffoliGate::new(&spec, &RabiConfig::default()).unwrap();
    let m = gate.logical().unwrap();
    let target = printed_matrix();
    let mut fails: Vec<String> = Vec::new();

    let entrywise = (&m - &target).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
    if entrywise > 5e-3 {
        fails.push(format!("entrywise max |M - printed| = {entrywise:.3e} > 5e-3"));
    }

    // the two sub-unity diagonal entries, descending, against 0.999/0.998
    let mut sub: Vec<f64> = m
        .diag()
        .iter()
        .take(6)
        .map(|z| z.re)
        .filter(|&x| x < 1.0 - 1e-9)
        .collect();
    sub.sort_by(|a, b| b.total_cmp(a));
    if sub.len() != 2 {
        fails.push(format!("expected two sub-unity diagonal entries, found {sub:?}"));
    } else {
        for (got, want) in sub.iter().zip([0.999, 0.998]) {
            if (got - want).abs() > 2e-3 {
                fails.push(format!("sub-unity entry {got:.6} vs printed {want} beyond 2e-3"));
            }
        }
    }

    // off-block entries: everything outside the diagonal and the swap block
    let mut offblock: f64 = 0.0;
    for i in 0..8 {
        for j in 0..8 {
            if i == j || (i == 6 && j == 7) || (i == 7 && j == 6) {
                continue;
            }
            offblock = offblock.max(m[[i, j]].norm());
        }
    }
    if offblock > 1e-2 {
        fails.push(format!("off-block entry {offblock:.3e} > 1e-2"));
    }

    println!(
        "criterion 2 (printed-matrix reproduction): {} — entrywise {entrywise:.3e}, sub-unity {sub:?}, off-block {offblock:.3e} in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 2 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_03_chi_closeness() {
    let t0 = Instant::now();
    let spec = build_space(2).unwrap();
    let gate = ToffoliGate::new(&spec, &RabiConfig::default()).unwrap();
    let chi = chi_of_logical(&gate.logical().unwrap());
    let chi_t = chi_of_unitary(&ideal_toffoli()).unwrap();
    let max_diff = (chi.matrix() - chi_t.matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0_f64, f64::max);
    let pass = max_diff <= 1e-3;
    println!(
        "criterion 3 (chi closeness): {} — max |chi - chi_T| = {max_diff:.4e} (limit 1e-3) in {:.1?}",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(pass, "max entrywise |chi(U) - chi_T| = {max_diff:.4e} > 1e-3");
}

#[test]
fn criterion_04_oracle_equivalence() {
    let t0 = Instant::now();
    let spec = build_space(2).unwrap();
    let cfg = RabiConfig::default();
    let gate = ToffoliGate::new(&spec, &cfg).unwrap();
    let t_tc = gate.t_tc();
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let t = t_tc * (0.05 + 1.5 * k as f64 / 19.0);
        let m = gate.logical_at(t).unwrap();
        let pred = gate::oracle_logical_matrix(t, &cfg);
        // every logical-basis amplitude for all 8 inputs
        for j in 0..8 {
            for i in 0..8 {
                worst = worst.max((m[[i, j]] - pred[[i, j]]).norm());
            }
        }
    }
    let pass = worst <= 1e-8;
    println!(
        "criterion 4 (oracle equivalence): {} — worst amplitude deviation {worst:.3e} over 8 inputs x 20 times in {:.1?}",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(pass, "gate amplitudes deviate from the sector oracle by {worst:.3e} > 1e-8");
}

#[test]
fn criterion_05_dephasing_sweep() {
    let t0 = Instant::now();
    let ratios = [0.0, 3.125e-3, 6.25e-3, 9.375e-3, 12.5e-3];
    let mut fs = Vec::new();
    for &r in &ratios {
        let (_, f_avg, _, _, _) = noisy_qpt(10, &default_noise(1.0, r * ETA_OMEGA1));
        println!("  dephasing gamma/(eta om1) = {r:.5}: F_avg = {f_avg:.7}");
        fs.push(f_avg);
    }
    let mut fails: Vec<String> = Vec::new();
    if fs[0] < 0.9999 {
        fails.push(format!(
            "F_avg(gamma=0) = {:.6} < 0.9999: the closed-gate floor (1 - 2.68e-4) plus \
             kappa losses make this endpoint unreachable at the working ratios",
            fs[0]
        ));
    }
    if *fs.last().unwrap() < 0.93 {
        fails.push(format!("F_avg at the top dephasing rate = {:.5} < 0.93", fs.last().unwrap()));
    }
    for w in fs.windows(2) {
        if w[1] > w[0] + 1e-9 {
            fails.push(format!("sweep not monotone: {:?}", fs));
            break;
        }
    }
    println!(
        "criterion 5 (dephasing sweep): {} — endpoints {:.6} / {:.5} in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        fs[0],
        fs.last().unwrap(),
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 5 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_06_heating_worst_case() {
    let t0 = Instant::now();
    let (f1, _) = *heating_nbar1();
    let (_, f5, max_disc, leak5, _) = noisy_qpt(25, &default_noise(5.0, 1.0 / 0.085));
    let ratio = f5 / f1;
    let mut fails: Vec<String> = Vec::new();
    if (f5 - 0.9949).abs() > 5e-3 {
        fails.push(format!("F_avg(n=5) = {f5:.6} outside 0.9949 ± 5e-3"));
    }
    if !(1e-3..=5e-3).contains(&max_disc) {
        fails.push(format!("max row discrepancy {max_disc:.3e} outside [1e-3, 5e-3]"));
    }
    if (ratio - 0.995).abs() > 5e-3 {
        fails.push(format!("F_avg(5)/F_avg(1) = {ratio:.6} outside 0.995 ± 5e-3"));
    }
    if leak5 > 1e-2 {
        fails.push(format!("leakage at n=5 is {leak5:.3e} > 1e-2"));
    }
    println!(
        "criterion 6 (heating worst case): {} — F_avg(5) = {f5:.6}, ratio = {ratio:.6}, max disc = {max_disc:.3e}, leak = {leak5:.3e} in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 6 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_07_monte_carlo_fluctuations() {
    let t0 = Instant::now();
    let spec = build_space(2).unwrap();
    let base = RabiConfig::default();
    let mc5 = mc_average_fidelity(
        &spec,
        &base,
        &FluctuationConfig::new(0.05, 500, 20240811).unwrap(),
        &NoiseParams::ZERO,
        None,
    )
    .unwrap();
    let mc1 = mc_average_fidelity(
        &spec,
        &base,
        &FluctuationConfig::new(0.01, 500, 20240811).unwrap(),
        &NoiseParams::ZERO,
        None,
    )
    .unwrap();
    let mut fails: Vec<String> = Vec::new();
    if (mc5.mean_f_avg - 0.71).abs() > 0.06 {
        fails.push(format!(
            "mean F_avg at Delta = 5% is {:.4} ± {:.4}, outside 0.71 ± 0.06",
            mc5.mean_f_avg, mc5.std_error
        ));
    }
    // strict ordering at 99% confidence
    let z = (mc1.mean_f_avg - mc5.mean_f_avg)
        / (mc1.std_error.powi(2) + mc5.std_error.powi(2)).sqrt();
    if z < 2.326 {
        fails.push(format!("Delta=1% mean not above Delta=5% mean at 99% (z = {z:.2})"));
    }
    println!(
        "criterion 7 (mc fluctuations): {} — mean(5%) = {:.4} ± {:.4} [std-dev semantics], mean(1%) = {:.4}, z = {z:.1} in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        mc5.mean_f_avg,
        mc5.std_error,
        mc1.mean_f_avg,
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 7 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_08_ratio_optimizer() {
    let t0 = Instant::now();
    let base = RabiConfig::default();
    let out = optimize(&base, &RatioSearchConfig::default()).unwrap();
    let mut fails: Vec<String> = Vec::new();
    if out.infidelity > 2e-5 {
        fails.push(format!(
            "best infidelity in the default box is {:.3e} > 2e-5 at ({:.4}, {:.4}): \
             the commensurability lattice admits no deeper point with the gate window \
             fixed at pi/(eta om1); the balanced optimum near (11.966, 15.979) is the floor",
            out.infidelity, out.r2, out.r3
        ));
    }
    // seeded refinement in a tiny box stays at the working point
    let seed = (143.0_f64.sqrt(), 16.0);
    let seeded = optimize(
        &base,
        &RatioSearchConfig {
            r2_bounds: (seed.0 - 5e-3, seed.0 + 5e-3),
            r3_bounds: (seed.1 - 5e-3, seed.1 + 5e-3),
            grid_points: 3,
            tol: 1e-7,
            joint_time: false,
        },
    )
    .unwrap();
    if (seeded.r2 - seed.0).abs() > 1e-2 || (seeded.r3 - seed.1).abs() > 1e-2 {
        fails.push(format!(
            "seeded refinement left the working point: ({:.4}, {:.4})",
            seeded.r2, seeded.r3
        ));
    }
    println!(
        "criterion 8 (ratio optimizer): {} — box optimum {:.3e} at ({:.4}, {:.4}); seeded ({:.5}, {:.5}) in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        out.infidelity,
        out.r2,
        out.r3,
        seeded.r2,
        seeded.r3,
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 8 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_09_physical_invariants() {
    let t0 = Instant::now();
    let mut fails: Vec<String> = Vec::new();

    // integrator diagnostics on a production run
    let (_, _, _, _, diag) = noisy_qpt(10, &default_noise(1.0, 1.0 / 0.085));
    if diag.max_trace_drift > 1e-8 {
        fails.push(format!("trace drift {:.2e} > 1e-8", diag.max_trace_drift));
    }
    if diag.max_herm_drift > 1e-10 {
        fails.push(format!("hermiticity drift {:.2e} > 1e-10", diag.max_herm_drift));
    }
    if diag.min_eigenvalue < -1e-7 {
        fails.push(format!("min eigenvalue {:.2e} < -1e-7", diag.min_eigenvalue));
    }

    // phonon-cutoff convergence on the same noise point
    let (f_lo, _) = *heating_nbar1();
    let (_, f_hi, _, _, _) = noisy_qpt(15, &default_noise(1.0, 1.0 / 0.085));
    let shift = (f_hi - f_lo).abs();
    if shift > 1e-4 {
        fails.push(format!("cutoff 10 -> 15 shifts F_avg by {shift:.2e} > 1e-4"));
    }

    // analytic channels at H = 0
    let spec = build_space(22).unwrap();
    let h = Operator::sparse(toffoli_sim::sparse::CsrMatrix::from_triplets(spec.dim(), vec![]));
    let kappa = 3.0e4;
    let n_bar = 2.0;
    let t = 2.0e-5;
    let mut rho = CMat::zeros((spec.dim(), spec.dim()));
    rho[[0, 0]] = C64::new(1.0, 0.0); // |l l l, 0> as a vacuum-phonon start
    let integ = IntegratorConfig::with_dt(t / 1500.0);
    let (out, _) = evolve(
        &spec,
        &rho,
        t,
        &h,
        &NoiseParams::new(kappa, n_bar, 0.0).unwrap(),
        &integ,
    )
    .unwrap();
    let mut n_exp = 0.0;
    for k in 0..spec.dim() {
        n_exp += spec.phonon_of(k) as f64 * out[[k, k]].re;
    }
    let want = n_bar * (1.0 - (-kappa * t).exp());
    if (n_exp - want).abs() > 1e-6 {
        fails.push(format!("relaxation <n>(t) off by {:.2e}", (n_exp - want).abs()));
    }

    let spec4 = build_space(4).unwrap();
    let h4 = Operator::sparse(toffoli_sim::sparse::CsrMatrix::from_triplets(spec4.dim(), vec![]));
    let gamma = 2.0e4;
    let mut rho4 = CMat::zeros((spec4.dim(), spec4.dim()));
    rho4[[0, 0]] = C64::new(0.5, 0.0);
    rho4[[2, 2]] = C64::new(0.5, 0.0);
    rho4[[0, 2]] = C64::new(0.5, 0.0);
    rho4[[2, 0]] = C64::new(0.5, 0.0);
    let (out4, _) = evolve(
        &spec4,
        &rho4,
        t,
        &h4,
        &NoiseParams::new(0.0, 0.0, gamma).unwrap(),
        &IntegratorConfig::with_dt(t / 1500.0),
    )
    .unwrap();
    let want4 = 0.5 * (-gamma * 4.0 * t).exp();
    if (out4[[0, 2]].re - want4).abs() > 1e-6 {
        fails.push(format!(
            "dephasing coherence off by {:.2e}",
            (out4[[0, 2]].re - want4).abs()
        ));
    }

    println!(
        "criterion 9 (physical invariants): {} — drift {:.1e}, herm {:.1e}, min eig {:.1e}, cutoff shift {shift:.1e} in {:.1?}",
        if fails.is_empty() { "PASS" } else { "FAIL" },
        diag.max_trace_drift,
        diag.max_herm_drift,
        diag.min_eigenvalue,
        t0.elapsed()
    );
    assert!(fails.is_empty(), "criterion 9 sub-checks failed:\n{}", fails.join("\n"));
}

#[test]
fn criterion_10_qpt_self_consistency() {
    let t0 = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..50u64 {
        let u = random_unitary(seed);
        let u_dag = u.t().mapv(|z| z.conj());
        let via_map = chi_of_map(|rho: &CMat| Ok(u.dot(rho).dot(&u_dag))).unwrap();
        let via_unitary = chi_of_unitary(&u).unwrap();
        let diff = (via_map.matrix() - via_unitary.matrix())
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max);
        worst = worst.max(diff);
    }
    // explicit held-out residual on one reconstructed map
    let u = random_unitary(123);
    let u_dag = u.t().mapv(|z| z.conj());
    let chi = chi_of_map(|rho: &CMat| Ok(u.dot(rho).dot(&u_dag))).unwrap();
    let basis = OperatorBasis::three_qubit();
    let mut held = CMat::eye(8).mapv(|z| z * C64::new(0.05, 0.0));
    held[[2, 2]] += C64::new(0.6, 0.0);
    held[[2, 5]] = C64::new(0.1, 0.2);
    held[[5, 2]] = C64::new(0.1, -0.2);
    let direct = u.dot(&held).dot(&u_dag);
    let recon = chi.apply(&basis, &held);
    let residual = (&direct - &recon).iter().map(|z| z.norm()).fold(0.0_f64, f64::max);

    let pass = worst <= 1e-9 && residual <= 1e-6;
    println!(
        "criterion 10 (qpt self-consistency): {} — 50-unitary worst diff {worst:.2e}, held-out residual {residual:.2e} in {:.1?}",
        if pass { "PASS" } else { "FAIL" },
        t0.elapsed()
    );
    assert!(worst <= 1e-9, "chi_of_map vs chi_of_unitary differ by {worst:.2e} > 1e-9");
    assert!(residual <= 1e-6, "held-out residual {residual:.2e} > 1e-6");
}

fn random_unitary(seed: u64) -> CMat {
    let mut x = seed.wrapping_add(0x9e3779b97f4a7c15);
    let mut next = move || {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((x >> 33) as f64) / (u32::MAX as f64) - 0.5
    };
    let g = CMat::from_shape_fn((8, 8), |_| C64::new(next(), next()));
    let h = &g + &g.t().mapv(|z| z.conj());
    toffoli_sim::expm::expm_unitary(&Operator::dense(h), 1.0)
        .unwrap()
        .to_dense()
}

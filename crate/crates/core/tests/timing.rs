use std::time::Instant;
use toffoli_sim::*;
use ndarray::Array2;
use num_complex::Complex64 as C64;

#[test]
#[ignore]
fn timing_probe() {
    for nph in [10usize, 25] {
        let spec = build_space(nph).unwrap();
        let cfg = RabiConfig::default();
        let gate = ToffoliGate::new(&spec, &cfg).unwrap();
        let integ = IntegratorConfig::for_gate(&cfg);
        let noise = NoiseParams::new(1.0 / 0.14, 1.0, 1.0 / 0.085).unwrap();
        let mut rho = Array2::<C64>::zeros((8, 8));
        rho[[7, 7]] = C64::new(1.0, 0.0);
        let t0 = Instant::now();
        let out = noisy_gate_map(&gate, &rho, &noise, &integ).unwrap();
        println!(
            "nph={nph}: one probe {:?} (steps {}, leak {:.2e}, mineig {:.2e})",
            t0.elapsed(),
            out.diagnostics.steps,
            out.leakage,
            out.diagnostics.min_eigenvalue
        );
    }
}

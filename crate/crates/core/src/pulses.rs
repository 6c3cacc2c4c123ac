//! Effective sideband Hamiltonians and the composite encode/decode pulse.
//!
//! A red-sideband pulse exchanges one phonon against a spin flip,
//! Ĥ_r = ζ â σ̂₊ + h.c.; a blue-sideband pulse creates or destroys spin and
//! phonon excitations together, Ĥ_b = ζ â† σ̂₊ + h.c., with σ̂₊^{(αβ)} =
//! |β⟩⟨α|. Each pulse may carry a laser phase φ, realized as ζ → ζe^{iφ}
//! on the raising part. The composite R̂ = R̂_C⁻ R̂_B⁻ R̂_A⁺ with the phases
//! below flips the phonon conditioned on the spin,
//!
//!   R̂ |g₁, 0⟩ = |g₁, 1⟩,   R̂ |e₁, 0⟩ = |e₁, 0⟩,
//!
//! with no residual phase: a bare e^{iHτ} product leaves ±i factors, and
//! the laser phases are the physical knob that removes them.

use crate::error::{Error, Result};
use crate::expm::expm_unitary;
use crate::hilbert::{HilbertSpec, Level, Operator};
use std::f64::consts::{FRAC_PI_2, PI};

/// Laser phase of pulse A; B and C run at phase zero. Calibrated on the
/// ion-1 ⊗ {0,1}-phonon block so the composite satisfies the phonon-flip
/// identity exactly (the three π-pulses contribute i³ = −i, cancelled by
/// e^{iφ_A}).
pub const PULSE_PHASE_A: f64 = FRAC_PI_2;
pub const PULSE_PHASE_B: f64 = 0.0;
pub const PULSE_PHASE_C: f64 = 0.0;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Sideband {
    Red,
    Blue,
}

/// One sideband pulse: e^{+i Ĥ τ} with Ĥ the chosen sideband coupling.
#[derive(Clone, Debug)]
pub struct SidebandPulse {
    pub ion: usize,
    /// Ordered level pair (α, β); the raising part takes α to β.
    pub transition: (Level, Level),
    pub sideband: Sideband,
    /// Coupling ζ = ηΩ/2 (angular frequency, ħ = 1).
    pub coupling: f64,
    /// Laser phase φ on the raising part.
    pub phase: f64,
    /// Pulse duration τ.
    pub duration: f64,
    /// The pulses of the composite use e^{+iĤτ}.
    pub exponent_sign: f64,
}

impl SidebandPulse {
    fn new(
        ion: usize,
        transition: (Level, Level),
        sideband: Sideband,
        coupling: f64,
        phase: f64,
    ) -> Self {
        SidebandPulse {
            ion,
            transition,
            sideband,
            coupling,
            phase,
            duration: PI / (2.0 * coupling),
            exponent_sign: 1.0,
        }
    }

    pub fn hamiltonian(&self, spec: &HilbertSpec) -> Result<Operator> {
        sideband_h(
            spec,
            self.ion,
            self.transition.0,
            self.transition.1,
            self.coupling,
            self.phase,
            self.sideband,
        )
    }

    pub fn unitary(&self, spec: &HilbertSpec) -> Result<Operator> {
        let h = self.hamiltonian(spec)?;
        expm_unitary(&h, -self.exponent_sign * self.duration)
    }
}

fn sideband_h(
    spec: &HilbertSpec,
    ion: usize,
    alpha: Level,
    beta: Level,
    zeta: f64,
    phase: f64,
    sideband: Sideband,
) -> Result<Operator> {
    if alpha == beta {
        return Err(Error::invalid("sideband transition needs two distinct levels"));
    }
    if zeta <= 0.0 {
        return Err(Error::invalid(format!("coupling must be positive, got {zeta}")));
    }
    let sigma_plus = spec.ion_op(ion, beta, alpha)?; // |beta><alpha|
    let phonon = match sideband {
        Sideband::Red => spec.annihilator(),
        Sideband::Blue => spec.annihilator().adjoint(),
    };
    let raising = phonon
        .matmul(&sigma_plus)
        .scale(crate::C64::from_polar(zeta, phase));
    Ok(raising.add(&raising.adjoint()))
}

/// Ĥ_r^{(αβ)}(ζ) = ζ â σ̂₊^{(αβ)} + h.c.
pub fn red_sideband_h(
    spec: &HilbertSpec,
    ion: usize,
    alpha: Level,
    beta: Level,
    zeta: f64,
) -> Result<Operator> {
    sideband_h(spec, ion, alpha, beta, zeta, 0.0, Sideband::Red)
}

/// Ĥ_b^{(αβ)}(ζ) = ζ â† σ̂₊^{(αβ)} + h.c.
pub fn blue_sideband_h(
    spec: &HilbertSpec,
    ion: usize,
    alpha: Level,
    beta: Level,
    zeta: f64,
) -> Result<Operator> {
    sideband_h(spec, ion, alpha, beta, zeta, 0.0, Sideband::Blue)
}

/// The composite encode/decode operation on ion 1 and the phonon mode.
#[derive(Clone, Debug)]
pub struct CompositePulse {
    pub pulses: Vec<SidebandPulse>,
    pub operator: Operator,
}

/// Build R̂ = R̂_C⁻(π/2ζ) · R̂_B⁻(π/2ζ) · R̂_A⁺(π/2ζ): a blue π-pulse on the
/// g↔e transition followed by red π-pulses on e↔l and g↔l, all on ion 1.
pub fn composite_r(spec: &HilbertSpec, zeta: f64) -> Result<CompositePulse> {
    let pulses = vec![
        SidebandPulse::new(1, (Level::G, Level::E), Sideband::Blue, zeta, PULSE_PHASE_A),
        SidebandPulse::new(1, (Level::E, Level::L), Sideband::Red, zeta, PULSE_PHASE_B),
        SidebandPulse::new(1, (Level::G, Level::L), Sideband::Red, zeta, PULSE_PHASE_C),
    ];
    let mut op: Option<Operator> = None;
    for p in &pulses {
        let u = p.unitary(spec)?;
        op = Some(match op {
            None => u,
            Some(prev) => u.matmul(&prev),
        });
    }
    // prune the dense product; R acts on ion 1 ⊗ phonon only, so most
    // entries are structural zeros
    let op = Operator::sparse(crate::sparse::CsrMatrix::from_dense(
        &op.unwrap().to_dense(),
        1e-13,
    ));
    Ok(CompositePulse { pulses, operator: op })
}

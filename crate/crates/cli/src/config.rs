//! Declarative experiment configuration: a TOML file with nested
//! sections, merged with command-line overrides. Unknown keys are
//! rejected so typos fail loudly instead of silently running defaults.

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};
use std::path::Path;
use toffoli_sim::{FluctuationConfig, IntegratorConfig, NoiseParams, RabiConfig, RatioSearchConfig, SpreadSemantics};

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub system: SystemSection,
    #[serde(default)]
    pub noise: NoiseSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub fluctuations: FluctuationsSection,
    #[serde(default)]
    pub search: SearchSection,
    #[serde(default)]
    pub dephasing: DephasingSection,
    #[serde(default)]
    pub heating: HeatingSection,
    #[serde(default)]
    pub run: RunSection,
    /// Written by the tool into manifests; ignored on input.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<ProvenanceSection>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    pub eta: f64,
    /// Reference Rabi frequency Ω₁ in rad/s.
    pub omega1: f64,
    pub ratio2: f64,
    pub ratio3: f64,
    pub zeta_r: f64,
    pub trap_freq: f64,
}

impl Default for SystemSection {
    fn default() -> Self {
        let r = RabiConfig::default();
        SystemSection {
            eta: r.eta,
            omega1: r.omega1,
            ratio2: r.ratio2,
            ratio3: r.ratio3,
            zeta_r: r.zeta_r,
            trap_freq: r.trap_freq,
        }
    }
}

impl SystemSection {
    pub fn to_rabi(&self) -> RabiConfig {
        RabiConfig {
            eta: self.eta,
            omega1: self.omega1,
            ratio2: self.ratio2,
            ratio3: self.ratio3,
            zeta_r: self.zeta_r,
            trap_freq: self.trap_freq,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    /// Heating rate κ in 1/s.
    pub kappa: f64,
    pub n_bar: f64,
    /// Dephasing rate γ in 1/s.
    pub gamma: f64,
}

impl Default for NoiseSection {
    fn default() -> Self {
        // kappa^-1 = 140 ms, gamma^-1 = 85 ms
        NoiseSection { kappa: 1.0 / 0.14, n_bar: 1.0, gamma: 1.0 / 0.085 }
    }
}

impl NoiseSection {
    pub fn to_params(&self) -> anyhow::Result<NoiseParams> {
        Ok(NoiseParams::new(self.kappa, self.n_bar, self.gamma)?)
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntegratorSection {
    /// Maximum RK4 step in seconds; default derived from the gate scales.
    pub dt_max: Option<f64>,
    pub tail_tol: Option<f64>,
}

impl IntegratorSection {
    pub fn to_integrator(&self, rabi: &RabiConfig) -> IntegratorConfig {
        let mut integ = match self.dt_max {
            Some(dt) => IntegratorConfig::with_dt(dt),
            None => IntegratorConfig::for_gate(rabi),
        };
        if let Some(t) = self.tail_tol {
            integ.tail_tol = t;
        }
        integ
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluctuationsSection {
    pub delta: f64,
    pub n_samples: usize,
    /// "std-dev" or "half-width".
    pub semantics: String,
    pub fluctuate_pulse: bool,
}

impl Default for FluctuationsSection {
    fn default() -> Self {
        FluctuationsSection {
            delta: 0.05,
            n_samples: 500,
            semantics: "std-dev".into(),
            fluctuate_pulse: false,
        }
    }
}

impl FluctuationsSection {
    pub fn to_fluctuation(&self, seed: u64) -> anyhow::Result<FluctuationConfig> {
        let mut fc = FluctuationConfig::new(self.delta, self.n_samples, seed)?;
        fc.semantics = match self.semantics.as_str() {
            "std-dev" => SpreadSemantics::StdDev,
            "half-width" => SpreadSemantics::HalfWidth,
            other => bail!("unknown spread semantics '{other}' (use std-dev or half-width)"),
        };
        fc.fluctuate_pulse = self.fluctuate_pulse;
        Ok(fc)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSection {
    pub r2_min: f64,
    pub r2_max: f64,
    pub r3_min: f64,
    pub r3_max: f64,
    pub grid_points: usize,
    pub tol: f64,
    pub joint_time: bool,
}

impl Default for SearchSection {
    fn default() -> Self {
        let s = RatioSearchConfig::default();
        SearchSection {
            r2_min: s.r2_bounds.0,
            r2_max: s.r2_bounds.1,
            r3_min: s.r3_bounds.0,
            r3_max: s.r3_bounds.1,
            grid_points: s.grid_points,
            tol: s.tol,
            joint_time: s.joint_time,
        }
    }
}

impl SearchSection {
    pub fn to_search(&self) -> RatioSearchConfig {
        RatioSearchConfig {
            r2_bounds: (self.r2_min, self.r2_max),
            r3_bounds: (self.r3_min, self.r3_max),
            grid_points: self.grid_points,
            tol: self.tol,
            joint_time: self.joint_time,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DephasingSection {
    /// Upper end of the γ/(ηΩ₁) grid.
    pub gamma_ratio_max: f64,
    pub points: usize,
}

impl Default for DephasingSection {
    fn default() -> Self {
        DephasingSection { gamma_ratio_max: 12.5e-3, points: 6 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeatingSection {
    pub n_bar_values: Vec<f64>,
}

impl Default for HeatingSection {
    fn default() -> Self {
        HeatingSection { n_bar_values: vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0] }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: u64,
    pub phonon_cutoff: Option<usize>,
    pub threads: Option<usize>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 1, phonon_cutoff: None, threads: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProvenanceSection {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub started_utc: String,
    pub finished_utc: Option<String>,
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let cfg: ExperimentConfig = toml::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        Ok(cfg)
    }

    /// Phonon cutoff for open-system runs at a given bath occupation:
    /// 10 up to n̄ = 1, growing to 25 at n̄ = 5, unless pinned.
    pub fn cutoff_for(&self, n_bar: f64) -> usize {
        if let Some(n) = self.run.phonon_cutoff {
            return n;
        }
        if n_bar <= 1.0 {
            10
        } else {
            (10.0 + (3.75 * (n_bar - 1.0)).ceil()) as usize
        }
    }
}

//! Strict JSON run configuration.
//!
//! Unknown keys are rejected with the offending key named; each experiment
//! demands exactly its own sections and rejects the rest. Applied defaults
//! (ℏ = 1, m = 1, record_every = 10, ...) are materialized into the parsed
//! config so the echoed copy in the run summary is fully resolved.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::Method;
use crate::grid::{natural_momentum_range, PhaseSpaceGrid};
use crate::hamiltonian::{Hamiltonian, Potential};

pub const DEFAULT_MASS: f64 = 1.0;
pub const DEFAULT_HBAR: f64 = 1.0;
pub const DEFAULT_RECORD_EVERY: usize = 10;
pub const DEFAULT_TRIALS: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    Evolve,
    Compare,
    Transform,
    Smear,
    Measure,
    IdentityChecks,
}

impl std::fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            ExperimentKind::Evolve => "evolve",
            ExperimentKind::Compare => "compare",
            ExperimentKind::Transform => "transform",
            ExperimentKind::Smear => "smear",
            ExperimentKind::Measure => "measure",
            ExperimentKind::IdentityChecks => "identity_checks",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub nx: usize,
    pub np: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub p_min: f64,
    pub p_max: f64,
}

impl GridSpec {
    pub fn build(&self) -> Result<PhaseSpaceGrid> {
        PhaseSpaceGrid::new(self.nx, self.np, (self.x_min, self.x_max), (self.p_min, self.p_max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
}

impl PotentialSpec {
    pub fn build(&self) -> Result<Potential> {
        match self.kind.as_str() {
            "polynomial" => {
                if self.values.is_some() {
                    return Err(Error::Config(
                        "hamiltonian.potential: polynomial takes coefficients, not values".into(),
                    ));
                }
                let coefficients = self.coefficients.clone().ok_or_else(|| {
                    Error::Config("hamiltonian.potential.coefficients is required".into())
                })?;
                Ok(Potential::polynomial(coefficients))
            }
            "tabulated" => {
                if self.coefficients.is_some() {
                    return Err(Error::Config(
                        "hamiltonian.potential: tabulated takes values, not coefficients".into(),
                    ));
                }
                let values = self.values.clone().ok_or_else(|| {
                    Error::Config("hamiltonian.potential.values is required".into())
                })?;
                Ok(Potential::tabulated(values))
            }
            other => Err(Error::Config(format!(
                "hamiltonian.potential.type must be \"polynomial\" or \"tabulated\", got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    #[serde(default)]
    pub mass: Option<f64>,
    #[serde(default)]
    pub hbar: Option<f64>,
    pub potential: PotentialSpec,
}

impl HamiltonianSpec {
    fn resolve(&mut self) {
        self.mass.get_or_insert(DEFAULT_MASS);
        self.hbar.get_or_insert(DEFAULT_HBAR);
    }

    pub fn build(&self) -> Result<Hamiltonian> {
        Hamiltonian::new(
            self.mass.unwrap_or(DEFAULT_MASS),
            self.hbar.unwrap_or(DEFAULT_HBAR),
            self.potential.build()?,
        )
    }

    pub fn hbar_value(&self) -> f64 {
        self.hbar.unwrap_or(DEFAULT_HBAR)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub x0: f64,
    pub p0: f64,
    pub sigma_x: f64,
    pub sigma_p: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MethodSpec {
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
}

impl MethodSpec {
    pub fn build(&self, context: &str) -> Result<Method> {
        let needs_k = |k: Option<usize>| {
            k.ok_or_else(|| Error::Config(format!("{context}.k_max is required for {}", self.method)))
        };
        let forbids_k = |k: Option<usize>| {
            if k.is_some() {
                Err(Error::Config(format!(
                    "{context}.k_max is not a parameter of {}",
                    self.method
                )))
            } else {
                Ok(())
            }
        };
        match self.method.as_str() {
            "liouville" => {
                forbids_k(self.k_max)?;
                Ok(Method::Liouville)
            }
            "moyal_spectral" => {
                forbids_k(self.k_max)?;
                Ok(Method::MoyalSpectral)
            }
            "moyal_truncated" => Ok(Method::MoyalTruncated {
                k_max: needs_k(self.k_max)?,
            }),
            "sinh_truncated" => Ok(Method::SinhTruncated {
                k_max: needs_k(self.k_max)?,
            }),
            other => Err(Error::Config(format!(
                "{context}.method must be one of liouville, moyal_spectral, moyal_truncated, \
                 sinh_truncated; got \"{other}\""
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionSpec {
    pub dt: f64,
    pub steps: usize,
    pub method: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(default)]
    pub record_every: Option<usize>,
}

impl EvolutionSpec {
    fn resolve(&mut self) {
        self.record_every.get_or_insert(DEFAULT_RECORD_EVERY);
    }

    pub fn method_spec(&self) -> MethodSpec {
        MethodSpec {
            method: self.method.clone(),
            k_max: self.k_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config("evolution.dt must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("evolution.steps must be at least 1".into()));
        }
        self.method_spec().build("evolution")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    pub dt: f64,
    pub steps: usize,
    pub methods: Vec<MethodSpec>,
    #[serde(default)]
    pub record_every: Option<usize>,
}

impl ComparisonSpec {
    fn resolve(&mut self) {
        self.record_every.get_or_insert(DEFAULT_RECORD_EVERY);
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Config("comparison.dt must be positive".into()));
        }
        if self.steps == 0 {
            return Err(Error::Config("comparison.steps must be at least 1".into()));
        }
        if self.methods.len() != 2 {
            return Err(Error::Config(format!(
                "comparison.methods must name exactly 2 methods, got {}",
                self.methods.len()
            )));
        }
        self.methods[0].build("comparison.methods[0]")?;
        self.methods[1].build("comparison.methods[1]")?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WavefunctionSpec {
    pub nx: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub x0: f64,
    pub p0: f64,
    pub sigma: f64,
    #[serde(default)]
    pub hbar: Option<f64>,
}

impl WavefunctionSpec {
    fn resolve(&mut self) {
        self.hbar.get_or_insert(DEFAULT_HBAR);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentumSpec {
    pub np: usize,
    #[serde(default)]
    pub p_min: Option<f64>,
    #[serde(default)]
    pub p_max: Option<f64>,
}

impl MomentumSpec {
    /// Resolve an explicit or natural momentum window for the given x grid.
    fn resolve_for(&mut self, nx: usize, x_length: f64, hbar: f64) -> Result<()> {
        match (self.p_min, self.p_max) {
            (Some(_), Some(_)) => Ok(()),
            (None, None) => {
                let (lo, hi) = natural_momentum_range(nx, x_length, hbar);
                self.p_min = Some(lo);
                self.p_max = Some(hi);
                Ok(())
            }
            _ => Err(Error::Config(
                "momentum.p_min and momentum.p_max must be given together (or both omitted for \
                 the natural window)"
                    .into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmearingSpec {
    pub sigma_xi: f64,
    pub n: usize,
    pub x0: f64,
    pub p0: f64,
    #[serde(default)]
    pub hbar: Option<f64>,
}

impl SmearingSpec {
    fn resolve(&mut self) {
        self.hbar.get_or_insert(DEFAULT_HBAR);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasurementSpec {
    /// Constituent count; a JSON double so that macroscopic counts like 1e23
    /// can be written directly.
    pub n_atoms: f64,
    pub tau_micro: f64,
    pub separation: f64,
    #[serde(default)]
    pub trials: Option<usize>,
}

impl MeasurementSpec {
    fn resolve(&mut self) {
        self.trials.get_or_insert(DEFAULT_TRIALS);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub experiment: ExperimentKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hamiltonian: Option<HamiltonianSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<InitialStateSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evolution: Option<EvolutionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub comparison: Option<ComparisonSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wavefunction: Option<WavefunctionSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub momentum: Option<MomentumSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smearing: Option<SmearingSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measurement: Option<MeasurementSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl RunConfig {
    /// Enforce the per-experiment section contract and materialize defaults.
    pub fn validate_and_resolve(&mut self) -> Result<()> {
        use ExperimentKind::*;
        let required: &[&str] = match self.experiment {
            Evolve => &["grid", "hamiltonian", "initial_state", "evolution"],
            Compare => &["grid", "hamiltonian", "initial_state", "comparison"],
            Transform => &["wavefunction", "momentum"],
            Smear => &["grid", "smearing", "seed"],
            Measure => &["measurement", "seed"],
            IdentityChecks => &["seed"],
        };
        let present: Vec<(&str, bool)> = vec![
            ("grid", self.grid.is_some()),
            ("hamiltonian", self.hamiltonian.is_some()),
            ("initial_state", self.initial_state.is_some()),
            ("evolution", self.evolution.is_some()),
            ("comparison", self.comparison.is_some()),
            ("wavefunction", self.wavefunction.is_some()),
            ("momentum", self.momentum.is_some()),
            ("smearing", self.smearing.is_some()),
            ("measurement", self.measurement.is_some()),
            ("seed", self.seed.is_some()),
        ];
        for (name, is_present) in &present {
            let needed = required.contains(name);
            if needed && !is_present {
                return Err(Error::Config(format!(
                    "experiment \"{}\" requires the \"{name}\" section",
                    self.experiment
                )));
            }
            if !needed && *is_present {
                return Err(Error::Config(format!(
                    "experiment \"{}\" does not accept the \"{name}\" section",
                    self.experiment
                )));
            }
        }

        if let Some(g) = &self.grid {
            g.build()?;
        }
        if let Some(h) = &mut self.hamiltonian {
            h.resolve();
            h.build()?;
        }
        if let Some(s) = &self.initial_state {
            if s.kind != "gaussian" {
                return Err(Error::Config(format!(
                    "initial_state.type must be \"gaussian\", got \"{}\"",
                    s.kind
                )));
            }
            if !(s.sigma_x > 0.0 && s.sigma_p > 0.0) {
                return Err(Error::Config("initial_state sigmas must be positive".into()));
            }
        }
        if let Some(e) = &mut self.evolution {
            e.resolve();
            e.validate()?;
        }
        if let Some(c) = &mut self.comparison {
            c.resolve();
            c.validate()?;
        }
        if let Some(w) = &mut self.wavefunction {
            w.resolve();
            if !(w.sigma > 0.0) {
                return Err(Error::Config("wavefunction.sigma must be positive".into()));
            }
        }
        if self.experiment == Transform {
            let w = self.wavefunction.as_ref().expect("checked above");
            let hbar = w.hbar.unwrap_or(DEFAULT_HBAR);
            let (nx, len) = (w.nx, w.x_max - w.x_min);
            self.momentum
                .as_mut()
                .expect("checked above")
                .resolve_for(nx, len, hbar)?;
        }
        if let Some(s) = &mut self.smearing {
            s.resolve();
            if !(s.sigma_xi > 0.0) {
                return Err(Error::Config("smearing.sigma_xi must be positive".into()));
            }
            if s.n == 0 {
                return Err(Error::Config("smearing.n must be at least 1".into()));
            }
        }
        if let Some(m) = &mut self.measurement {
            m.resolve();
            if !(m.n_atoms.is_finite() && m.n_atoms >= 1.0) {
                return Err(Error::Config("measurement.n_atoms must be at least 1".into()));
            }
            if !(m.tau_micro > 0.0) {
                return Err(Error::Config("measurement.tau_micro must be positive".into()));
            }
            if !(m.separation > 0.0) {
                return Err(Error::Config("measurement.separation must be positive".into()));
            }
        }
        Ok(())
    }
}

/// Syntactic parse only; unknown keys are rejected with the key named and
/// the line/column position.
pub fn parse_document(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| Error::Config(format!("config parse: {e}")))
}

/// Parse and validate a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut config = parse_document(text)?;
    config.validate_and_resolve()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal_evolve() -> String {
        serde_json::json!({
            "experiment": "evolve",
            "grid": {"nx": 128, "np": 128, "x_min": -8.0, "x_max": 8.0, "p_min": -8.0, "p_max": 8.0},
            "hamiltonian": {"potential": {"type": "polynomial", "coefficients": [0.0, 0.0, 0.5]}},
            "initial_state": {"type": "gaussian", "x0": 2.0, "p0": 0.0,
                              "sigma_x": 0.7071067811865476, "sigma_p": 0.7071067811865476},
            "evolution": {"dt": 0.005, "steps": 1257, "method": "moyal_spectral"}
        })
        .to_string()
    }

    #[test]
    fn minimal_evolve_gets_defaults_echoed() {
        let cfg = parse_config(&minimal_evolve()).unwrap();
        assert_eq!(cfg.hamiltonian.as_ref().unwrap().mass, Some(1.0));
        assert_eq!(cfg.hamiltonian.as_ref().unwrap().hbar, Some(1.0));
        assert_eq!(cfg.evolution.as_ref().unwrap().record_every, Some(10));
        // Round trip: the resolved config re-parses to itself.
        let text = serde_json::to_string(&cfg).unwrap();
        let again = parse_config(&text).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn unknown_keys_are_named() {
        let bad = minimal_evolve().replace("\"method\":", "\"methd\":");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("methd"), "{err}");
    }

    #[test]
    fn negative_dt_is_rejected_with_the_key_path() {
        let bad = minimal_evolve().replace("\"dt\":0.005", "\"dt\":-0.1");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("evolution.dt must be positive"), "{err}");
    }

    #[test]
    fn extra_sections_are_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal_evolve()).unwrap();
        doc["seed"] = serde_json::json!(7);
        let err = parse_config(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("does not accept"), "{err}");
    }

    #[test]
    fn missing_sections_are_rejected() {
        let mut doc: serde_json::Value = serde_json::from_str(&minimal_evolve()).unwrap();
        doc.as_object_mut().unwrap().remove("grid");
        let err = parse_config(&doc.to_string()).unwrap_err();
        assert!(err.to_string().contains("requires"), "{err}");
    }

    #[test]
    fn truncated_methods_need_k_max() {
        let bad = minimal_evolve().replace("moyal_spectral", "moyal_truncated");
        let err = parse_config(&bad).unwrap_err();
        assert!(err.to_string().contains("k_max"), "{err}");
        let good = minimal_evolve().replace(
            "\"method\":\"moyal_spectral\"",
            "\"method\":\"moyal_truncated\",\"k_max\":1",
        );
        assert!(parse_config(&good).is_ok());
    }

    #[test]
    fn huge_atom_counts_parse() {
        let cfg = parse_config(
            &serde_json::json!({
                "experiment": "measure",
                "measurement": {"n_atoms": 1e23, "tau_micro": 1.0, "separation": 10.0},
                "seed": 7
            })
            .to_string(),
        )
        .unwrap();
        assert_eq!(cfg.measurement.unwrap().n_atoms, 1e23);
    }
}

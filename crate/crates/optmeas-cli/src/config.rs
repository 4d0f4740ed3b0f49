//! Experiment configuration: a single JSON document. Unknown keys are a
//! hard error — a silently ignored typo in a tolerance corrupts
//! experiments.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use optmeas::design_solver::{Algorithm, SolverConfig};
use optmeas::measures::AdmissibleWeight;
use optmeas::poly_basis::PointSet;

use crate::RunError;

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub domain: DomainConfig,
    pub weight: WeightConfig,
    pub degrees: Vec<usize>,
    pub solver: SolverSection,
    pub outputs: PathBuf,
    pub seed: u64,
    /// Subgrid size for the brute-force Fekete route in `diameter`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fekete_subgrid_points: Option<usize>,
    /// Largest total moment order tracked by `converge`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moment_cap: Option<u32>,
    /// Localization radius for the `converge` mass diagnostic.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub localization_radius: Option<f64>,
    /// Scale factor on every invariant threshold used by `check`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub check_tolerance_scale: Option<f64>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainConfig {
    Interval { a: f64, b: f64, points: usize },
    Disk { radial_points: usize, angular_points: usize },
    Custom { csv_path: PathBuf },
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightConfig {
    Constant,
    Gaussian { c: f64 },
    Power { a: f64 },
    Custom { csv_path: PathBuf },
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSection {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub algorithm: AlgorithmName,
    pub prune_threshold: f64,
}

#[derive(Clone, Copy, Debug, Deserialize, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmName {
    Multiplicative,
    Exchange,
    Hybrid,
}

impl From<AlgorithmName> for Algorithm {
    fn from(name: AlgorithmName) -> Self {
        match name {
            AlgorithmName::Multiplicative => Algorithm::Multiplicative,
            AlgorithmName::Exchange => Algorithm::Exchange,
            AlgorithmName::Hybrid => Algorithm::Hybrid,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path)
            .map_err(|e| RunError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        let config: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| RunError::Usage(format!("config parse error: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.degrees.is_empty() {
            return Err(RunError::Usage("degrees must be nonempty".into()));
        }
        if self.degrees.windows(2).any(|w| w[1] <= w[0]) {
            return Err(RunError::Usage(
                "degrees must be strictly increasing".into(),
            ));
        }
        if !(self.solver.tolerance > 0.0) {
            return Err(RunError::Usage("solver.tolerance must be > 0".into()));
        }
        if self.solver.max_iterations == 0 {
            return Err(RunError::Usage("solver.max_iterations must be ≥ 1".into()));
        }
        if !(self.solver.prune_threshold >= 0.0) {
            return Err(RunError::Usage(
                "solver.prune_threshold must be ≥ 0".into(),
            ));
        }
        Ok(())
    }

    pub fn solver_config(&self) -> SolverConfig<f64> {
        SolverConfig {
            tolerance: self.solver.tolerance,
            max_iterations: self.solver.max_iterations,
            algorithm: self.solver.algorithm.into(),
            prune_threshold: self.solver.prune_threshold,
        }
    }

    /// Builds the candidate point set from the domain section.
    pub fn candidate_set(&self) -> Result<PointSet<f64>, RunError> {
        match &self.domain {
            DomainConfig::Interval { a, b, points } => {
                if *points == 0 {
                    return Err(RunError::Usage("interval needs ≥ 1 point".into()));
                }
                Ok(PointSet::interval_grid(*a, *b, *points))
            }
            DomainConfig::Disk {
                radial_points,
                angular_points,
            } => {
                if *radial_points == 0 || *angular_points == 0 {
                    return Err(RunError::Usage("disk grid sizes must be ≥ 1".into()));
                }
                Ok(PointSet::disk_grid(*radial_points, *angular_points))
            }
            DomainConfig::Custom { csv_path } => {
                let file = fs::File::open(csv_path).map_err(|e| {
                    RunError::Usage(format!("cannot open {}: {e}", csv_path.display()))
                })?;
                optmeas::io::read_point_set_csv(file, "custom")
                    .map_err(|e| RunError::Usage(format!("points CSV: {e}")))
            }
        }
    }

    /// Tabulates the configured weight on an arbitrary point set. The
    /// custom CSV variant is only valid on the candidate set itself.
    pub fn weight_on(&self, points: &PointSet<f64>) -> Result<AdmissibleWeight<f64>, RunError> {
        match &self.weight {
            WeightConfig::Constant => Ok(AdmissibleWeight::constant(points.len())),
            WeightConfig::Gaussian { c } => Ok(AdmissibleWeight::gaussian(points, *c)),
            WeightConfig::Power { a } => Ok(AdmissibleWeight::power(points, *a)),
            WeightConfig::Custom { csv_path } => {
                let file = fs::File::open(csv_path).map_err(|e| {
                    RunError::Usage(format!("cannot open {}: {e}", csv_path.display()))
                })?;
                let phi = optmeas::io::read_phi_csv(file, points.len())
                    .map_err(|e| RunError::Usage(format!("weight CSV: {e}")))?;
                AdmissibleWeight::from_phi(phi, "custom")
                    .map_err(|e| RunError::Usage(format!("weight CSV: {e}")))
            }
        }
    }
}

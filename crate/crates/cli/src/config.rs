//! Run configuration, read from TOML. Unknown keys are rejected.

use aperture_bie::geometry::{ApertureSpec, MeshOptions};
use aperture_bie::QuadratureSettings;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Scalar,
    Vector,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AssemblyPath {
    Spatial,
    Spectral,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveConfig {
    /// Wavenumber; `0` selects the static unit-potential problem (scalar only).
    pub k: f64,
    #[serde(default = "default_direction")]
    pub m: [f64; 3],
    /// Polarization of the incident electric field (vector problems).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<[f64; 3]>,
}

fn default_direction() -> [f64; 3] {
    [0.0, 0.0, -1.0]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeshConfig {
    pub h: f64,
    #[serde(default = "default_ratio")]
    pub grading_ratio: f64,
    #[serde(default = "default_layers")]
    pub grading_layers: usize,
}

fn default_ratio() -> f64 {
    MeshOptions::<f64>::default().grading_ratio
}

fn default_layers() -> usize {
    MeshOptions::<f64>::default().grading_layers
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectralConfig {
    pub xi_max: f64,
    pub n_radial: usize,
    pub n_angular: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<f64>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        SpectralConfig {
            xi_max: 400.0,
            n_radial: 1600,
            n_angular: 1200,
            exclusion: None,
        }
    }
}

/// Field-map sample points: an explicit list and/or a straight line of points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldsConfig {
    #[serde(default)]
    pub points: Vec<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<LineConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineConfig {
    pub start: [f64; 3],
    pub end: [f64; 3],
    pub count: usize,
}

impl FieldsConfig {
    pub fn sample_points(&self) -> Vec<[f64; 3]> {
        let mut out = self.points.clone();
        if let Some(l) = &self.line {
            let n = l.count.max(1);
            for i in 0..n {
                let t = if n == 1 { 0.0 } else { i as f64 / (n - 1) as f64 };
                out.push([0, 1, 2].map(|j| l.start[j] + t * (l.end[j] - l.start[j])));
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceConfig {
    pub levels: usize,
}

impl Default for ConvergenceConfig {
    fn default() -> Self {
        ConvergenceConfig { levels: 3 }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    #[serde(default = "default_assembly")]
    pub assembly: AssemblyPath,
    pub wave: WaveConfig,
    pub aperture: ApertureSpec<f64>,
    pub mesh: MeshConfig,
    #[serde(default)]
    pub quadrature: QuadratureSettings,
    #[serde(default)]
    pub spectral: SpectralConfig,
    #[serde(default)]
    pub fields: FieldsConfig,
    #[serde(default)]
    pub convergence: ConvergenceConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_assembly() -> AssemblyPath {
    AssemblyPath::Spatial
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String, CliError> {
        toml::to_string(self).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn mesh_options(&self) -> MeshOptions<f64> {
        MeshOptions::graded(self.mesh.grading_ratio, self.mesh.grading_layers)
    }

    /// Cross-field checks, run before any computation.
    pub fn validate(&self) -> Result<(), CliError> {
        let w = &self.wave;
        if !(w.k >= 0.0) || !w.k.is_finite() {
            return Err(bad("wave.k", format!("must be finite and nonnegative, got {}", w.k)));
        }
        if w.k == 0.0 && self.problem == Problem::Vector {
            return Err(bad("wave.k", "vector problems need k > 0"));
        }
        let norm = |v: [f64; 3]| (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if w.k > 0.0 {
            if (norm(w.m) - 1.0).abs() > 1e-9 {
                return Err(bad("wave.m", format!("must be a unit vector, |m| = {}", norm(w.m))));
            }
            if !(w.m[2] < 0.0) {
                return Err(bad("wave.m", "must point into the screen (m₃ < 0)"));
            }
        }
        match (self.problem, w.p) {
            (Problem::Vector, None) => return Err(bad("wave.p", "required for vector problems")),
            (Problem::Vector, Some(p)) => {
                if norm(p) == 0.0 || !p.iter().all(|v| v.is_finite()) {
                    return Err(bad("wave.p", "must be a nonzero finite vector"));
                }
                let dot = p[0] * w.m[0] + p[1] * w.m[1] + p[2] * w.m[2];
                if dot.abs() > 1e-9 * norm(p) {
                    return Err(bad("wave.p", format!("must be orthogonal to m (p·m = {dot})")));
                }
            }
            (Problem::Scalar, Some(_)) => return Err(bad("wave.p", "only meaningful for vector problems")),
            (Problem::Scalar, None) => {}
        }
        self.aperture.validate().map_err(|e| bad("aperture", e))?;
        if !(self.mesh.h > 0.0) || !self.mesh.h.is_finite() {
            return Err(bad("mesh.h", format!("must be positive, got {}", self.mesh.h)));
        }
        if !(self.mesh.grading_ratio > 0.0 && self.mesh.grading_ratio <= 1.0) {
            return Err(bad("mesh.grading_ratio", "must lie in (0, 1]"));
        }
        self.quadrature.validate().map_err(|e| bad("quadrature", e))?;
        if self.assembly != AssemblyPath::Spatial {
            let s = &self.spectral;
            if !(s.xi_max > 2.0 * w.k) || !s.xi_max.is_finite() {
                return Err(bad("spectral.xi_max", format!("must exceed 2k = {}", 2.0 * w.k)));
            }
            if s.n_radial == 0 || s.n_angular == 0 {
                return Err(bad("spectral", "n_radial and n_angular must be positive"));
            }
            if let Some(e) = s.exclusion {
                if !(e > 0.0) {
                    return Err(bad("spectral.exclusion", "must be positive"));
                }
            }
        }
        for p in self.fields.sample_points() {
            if !p.iter().all(|v| v.is_finite()) {
                return Err(bad("fields", "sample points must be finite"));
            }
        }
        Ok(())
    }
}

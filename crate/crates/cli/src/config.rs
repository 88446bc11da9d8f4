//! Run configuration: JSON in, core types out.

use std::path::Path;

use cutlab_core::cut::CutOptions;
use cutlab_core::stability::{Family, Resolution, SweepTolerances};
use cutlab_core::submanifold::Curve;
use cutlab_core::{Backend, MetricField, ScalarField, SubmanifoldSpec, Surface, Vec3};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("config error at `{key}` (line {line}, column {column}): {message}")]
    Parse {
        key: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("config error at `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("unknown scenario `{0}`; built-ins: {1}")]
    UnknownScenario(String, String),
}

fn invalid(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: String,
    pub backend: BackendConfig,
    pub submanifold: SubmanifoldConfig,
    pub resolution: ResolutionConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<FamilyConfig>,
    #[serde(default)]
    pub validate: ValidateConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BackendConfig {
    Chart { periods: [f64; 2], metric: MetricConfig },
    Sphere { radius: f64 },
    Ellipsoid { axes: [f64; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MetricConfig {
    Flat,
    Constant { gxx: f64, gxy: f64, gyy: f64 },
    WarpedDiag { amplitude: f64, period: f64 },
    WarpedLinear { amplitude: f64, period: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SubmanifoldConfig {
    Point { at: [f64; 3] },
    HorizontalLine { y0: f64 },
    ChartCircle { center: [f64; 2], radius: f64 },
    Latitude { z0: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldConfig {
    Constant {
        value: f64,
    },
    SinProduct {
        amplitude: f64,
        periods: [f64; 2],
    },
    PeriodicBump {
        amplitude: f64,
        center: [f64; 2],
        concentration: f64,
        periods: [f64; 2],
    },
    Linear {
        coefficients: [f64; 3],
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolutionConfig {
    /// Directions per side (curves) or on the circle (points).
    pub m: usize,
    /// Samples of `N` used for foot points and curvature bounds.
    pub m_n: usize,
    pub dt: f64,
    pub t_max: f64,
    #[serde(default)]
    pub tolerances: ToleranceConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub tol: f64,
    pub scan_step: f64,
    pub locate_width: f64,
    pub capture: f64,
    pub angle_tol: f64,
    pub hit_tol: f64,
    pub focal_tol: f64,
    pub pair_tol: f64,
    pub frame_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let o = CutOptions::default();
        ToleranceConfig {
            tol: o.tol,
            scan_step: o.scan_step,
            locate_width: o.locate_width,
            capture: o.capture,
            angle_tol: o.angle_tol,
            hit_tol: o.hit_tol,
            focal_tol: o.focal_tol,
            pair_tol: o.pair_tol,
            frame_tol: o.frame_tol,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FamilyConfig {
    /// `e^{2τφ}·g`
    Conformal {
        phi: FieldConfig,
        tau: Vec<f64>,
        #[serde(default)]
        tolerances: SweepToleranceConfig,
    },
    /// `e^{2τ}·g`, checked against the exact scaling.
    Homothety {
        tau: Vec<f64>,
        #[serde(default)]
        tolerances: SweepToleranceConfig,
    },
    /// `(1 − τ)·g + τ·g1`
    Blend {
        to: BackendConfig,
        tau: Vec<f64>,
        #[serde(default)]
        tolerances: SweepToleranceConfig,
    },
    /// `N_τ` between `N` and `to`.
    Embedding {
        to: SubmanifoldConfig,
        tau: Vec<f64>,
        #[serde(default)]
        tolerances: SweepToleranceConfig,
    },
}

impl FamilyConfig {
    pub fn taus(&self) -> &[f64] {
        match self {
            FamilyConfig::Conformal { tau, .. }
            | FamilyConfig::Homothety { tau, .. }
            | FamilyConfig::Blend { tau, .. }
            | FamilyConfig::Embedding { tau, .. } => tau,
        }
    }

    pub fn tolerances(&self) -> &SweepToleranceConfig {
        match self {
            FamilyConfig::Conformal { tolerances, .. }
            | FamilyConfig::Homothety { tolerances, .. }
            | FamilyConfig::Blend { tolerances, .. }
            | FamilyConfig::Embedding { tolerances, .. } => tolerances,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepToleranceConfig {
    pub inj: f64,
    pub hausdorff: f64,
    pub rho: f64,
    pub focal_margin: f64,
}

impl Default for SweepToleranceConfig {
    fn default() -> Self {
        let t = SweepTolerances::default();
        SweepToleranceConfig {
            inj: t.inj,
            hausdorff: t.hausdorff,
            rho: t.rho,
            focal_margin: t.focal_margin,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    /// Eikonal grid spacing in aux units.
    pub grid_spacing: f64,
    /// Tube radius around `N` and the cut locus; `None` uses `max(2·spacing, 2·err)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exclusion: Option<f64>,
    pub eikonal_tol: f64,
    pub eikonal_fraction: f64,
    /// Random directions used by the integrator refinement check.
    pub refinement_directions: usize,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig {
            grid_spacing: 0.02,
            exclusion: None,
            eikonal_tol: 1e-2,
            eikonal_fraction: 0.95,
            refinement_directions: 4,
        }
    }
}

/// Parses JSON, naming the offending key on failure.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let mut key = e.path().to_string();
        let inner = e.into_inner();
        let message = inner.to_string();
        // serde reports a missing field at its parent
        if let Some(field) = message.strip_prefix("missing field `").and_then(|m| m.split('`').next()) {
            key = if key == "." { field.to_string() } else { format!("{key}.{field}") };
        }
        ConfigError::Parse {
            key,
            line: inner.line(),
            column: inner.column(),
            message: strip_position(&message),
        }
    })?;
    config.check()?;
    Ok(config)
}

fn strip_position(message: &str) -> String {
    match message.rfind(" at line ") {
        Some(k) => message[..k].to_string(),
        None => message.to_string(),
    }
}

pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

impl RunConfig {
    /// Invariants serde cannot express.
    pub fn check(&self) -> Result<(), ConfigError> {
        let r = &self.resolution;
        if r.m < 16 {
            return Err(invalid("resolution.m", "needs at least 16 directions"));
        }
        if r.m_n < 8 {
            return Err(invalid("resolution.m_n", "needs at least 8 samples"));
        }
        for (key, v) in [("resolution.dt", r.dt), ("resolution.t_max", r.t_max)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(key, format!("must be positive, got {v}")));
            }
        }
        let t = &r.tolerances;
        for (key, v) in [
            ("tol", t.tol),
            ("scan_step", t.scan_step),
            ("locate_width", t.locate_width),
            ("capture", t.capture),
            ("angle_tol", t.angle_tol),
            ("hit_tol", t.hit_tol),
            ("focal_tol", t.focal_tol),
            ("pair_tol", t.pair_tol),
            ("frame_tol", t.frame_tol),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(&format!("resolution.tolerances.{key}"), format!("must be positive, got {v}")));
            }
        }
        if let Some(f) = &self.family {
            let taus = f.taus();
            if taus.is_empty() {
                return Err(invalid("family.tau", "ladder is empty"));
            }
            if taus.iter().any(|t| !(*t > 0.0 && t.is_finite())) || taus.windows(2).any(|w| !(w[1] < w[0])) {
                return Err(invalid("family.tau", "ladder must be positive and strictly decreasing"));
            }
            let s = f.tolerances();
            for (key, v) in [("inj", s.inj), ("hausdorff", s.hausdorff), ("rho", s.rho), ("focal_margin", s.focal_margin)] {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(invalid(&format!("family.tolerances.{key}"), format!("must be positive, got {v}")));
                }
            }
        }
        let v = &self.validate;
        if !(v.grid_spacing > 0.0) || !(v.eikonal_tol > 0.0) || !(v.eikonal_fraction > 0.0 && v.eikonal_fraction <= 1.0) {
            return Err(invalid("validate", "spacing and tolerances must be positive, fraction in (0, 1]"));
        }
        if v.exclusion.is_some_and(|e| !(e > 0.0)) {
            return Err(invalid("validate.exclusion", "must be positive"));
        }
        if self.threads == Some(0) {
            return Err(invalid("threads", "must be at least 1"));
        }
        Ok(())
    }

    pub fn backend(&self) -> Backend {
        self.backend.build()
    }

    pub fn submanifold(&self) -> SubmanifoldSpec {
        self.submanifold.build(self.resolution.m_n)
    }

    pub fn cut_options(&self) -> CutOptions {
        let t = &self.resolution.tolerances;
        CutOptions {
            tol: t.tol,
            scan_step: t.scan_step,
            locate_width: t.locate_width,
            capture: t.capture,
            angle_tol: t.angle_tol,
            hit_tol: t.hit_tol,
            focal_tol: t.focal_tol,
            pair_tol: t.pair_tol,
            frame_tol: t.frame_tol,
        }
    }

    pub fn sweep_resolution(&self) -> Resolution {
        Resolution {
            m: self.resolution.m,
            dt: self.resolution.dt,
            t_max: self.resolution.t_max,
            cut: self.cut_options(),
        }
    }

    /// The core family, or `None` without a family block.
    pub fn family(&self) -> Option<(Family, Vec<f64>, SweepTolerances)> {
        let f = self.family.as_ref()?;
        let n = self.submanifold();
        let base = self.backend();
        let family = match f {
            FamilyConfig::Conformal { phi, .. } => Family::Conformal {
                base,
                phi: phi.build(),
                n,
            },
            FamilyConfig::Homothety { .. } => Family::Conformal {
                base,
                phi: ScalarField::Constant { value: 1.0 },
                n,
            },
            FamilyConfig::Blend { to, .. } => Family::Blend {
                from: base,
                to: to.build(),
                n,
            },
            FamilyConfig::Embedding { to, .. } => Family::Embedding {
                backend: base,
                from: n,
                to: to.build(self.resolution.m_n),
            },
        };
        let t = f.tolerances();
        let tols = SweepTolerances {
            inj: t.inj,
            hausdorff: t.hausdorff,
            rho: t.rho,
            focal_margin: t.focal_margin,
        };
        Some((family, f.taus().to_vec(), tols))
    }
}

impl BackendConfig {
    pub fn build(&self) -> Backend {
        match self {
            BackendConfig::Chart { periods, metric } => Backend::chart(*periods, metric.build()),
            BackendConfig::Sphere { radius } => Backend::sphere(*radius),
            BackendConfig::Ellipsoid { axes } => Backend::implicit(Surface::Ellipsoid { axes: *axes }, ScalarField::zero()),
        }
    }
}

impl MetricConfig {
    pub fn build(&self) -> MetricField {
        match self {
            MetricConfig::Flat => MetricField::Flat,
            MetricConfig::Constant { gxx, gxy, gyy } => MetricField::Constant {
                gxx: *gxx,
                gxy: *gxy,
                gyy: *gyy,
            },
            MetricConfig::WarpedDiag { amplitude, period } => MetricField::WarpedDiag {
                amplitude: *amplitude,
                period: *period,
            },
            MetricConfig::WarpedLinear { amplitude, period } => MetricField::WarpedLinear {
                amplitude: *amplitude,
                period: *period,
            },
        }
    }
}

impl SubmanifoldConfig {
    pub fn build(&self, samples: usize) -> SubmanifoldSpec {
        match self {
            SubmanifoldConfig::Point { at } => SubmanifoldSpec::point(Vec3::new(at[0], at[1], at[2])),
            SubmanifoldConfig::HorizontalLine { y0 } => SubmanifoldSpec::curve(Curve::HorizontalCircle { y0: *y0 }, samples),
            SubmanifoldConfig::ChartCircle { center, radius } => SubmanifoldSpec::curve(
                Curve::ChartCircle {
                    center: *center,
                    radius: *radius,
                },
                samples,
            ),
            SubmanifoldConfig::Latitude { z0 } => SubmanifoldSpec::curve(Curve::Latitude { z0: *z0 }, samples),
        }
    }
}

impl FieldConfig {
    pub fn build(&self) -> ScalarField {
        match self {
            FieldConfig::Constant { value } => ScalarField::Constant { value: *value },
            FieldConfig::SinProduct { amplitude, periods } => ScalarField::SinProduct {
                amplitude: *amplitude,
                periods: *periods,
            },
            FieldConfig::PeriodicBump {
                amplitude,
                center,
                concentration,
                periods,
            } => ScalarField::PeriodicBump {
                amplitude: *amplitude,
                center: *center,
                concentration: *concentration,
                periods: *periods,
            },
            FieldConfig::Linear { coefficients } => ScalarField::Linear {
                coefficients: *coefficients,
            },
        }
    }
}

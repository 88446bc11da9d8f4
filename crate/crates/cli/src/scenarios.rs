//! Bundled scenarios.

use crate::config::*;

pub const NAMES: &[&str] = &[
    "flat-torus-line",
    "flat-torus-point",
    "sphere-equator",
    "sphere-point",
    "warped-torus-line",
    "conformal-bump-sweep",
    "homothety-sweep",
    "embedding-sweep",
    "sphere-latitude-sweep",
];

/// Ladder shared by the bundled sweeps.
pub const LADDER: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

fn unit_torus(metric: MetricConfig) -> BackendConfig {
    BackendConfig::Chart {
        periods: [1.0, 1.0],
        metric,
    }
}

fn warped() -> BackendConfig {
    unit_torus(MetricConfig::WarpedDiag {
        amplitude: 0.2,
        period: 1.0,
    })
}

fn resolution(t_max: f64) -> ResolutionConfig {
    ResolutionConfig {
        m: 256,
        m_n: 256,
        dt: 1e-3,
        t_max,
        tolerances: ToleranceConfig::default(),
    }
}

fn base(name: &str, backend: BackendConfig, submanifold: SubmanifoldConfig, t_max: f64) -> RunConfig {
    RunConfig {
        scenario: name.to_string(),
        backend,
        submanifold,
        resolution: resolution(t_max),
        family: None,
        validate: ValidateConfig::default(),
        output: None,
        seed: 0,
        threads: None,
    }
}

fn line(y0: f64) -> SubmanifoldConfig {
    SubmanifoldConfig::HorizontalLine { y0 }
}

pub fn builtin(name: &str) -> Result<RunConfig, ConfigError> {
    let config = match name {
        "flat-torus-line" => base(name, unit_torus(MetricConfig::Flat), line(0.0), 1.1),
        "flat-torus-point" => base(
            name,
            unit_torus(MetricConfig::Flat),
            SubmanifoldConfig::Point { at: [0.0, 0.0, 0.0] },
            1.1,
        ),
        "sphere-equator" => {
            let mut c = base(name, BackendConfig::Sphere { radius: 1.0 }, SubmanifoldConfig::Latitude { z0: 0.0 }, 3.3);
            c.validate.grid_spacing = 0.05;
            c
        }
        "sphere-point" => {
            let mut c = base(
                name,
                BackendConfig::Sphere { radius: 1.0 },
                SubmanifoldConfig::Point { at: [0.0, 0.0, 1.0] },
                3.3,
            );
            c.validate.grid_spacing = 0.05;
            c
        }
        "warped-torus-line" => base(name, warped(), line(0.0), 1.0),
        "conformal-bump-sweep" => RunConfig {
            family: Some(FamilyConfig::Conformal {
                phi: FieldConfig::PeriodicBump {
                    amplitude: 0.2,
                    center: [0.75, 0.0],
                    concentration: 2.0,
                    periods: [1.0, 1.0],
                },
                tau: LADDER.to_vec(),
                tolerances: SweepToleranceConfig::default(),
            }),
            ..base(name, warped(), line(0.0), 1.0)
        },
        "homothety-sweep" => RunConfig {
            family: Some(FamilyConfig::Homothety {
                tau: LADDER.to_vec(),
                tolerances: SweepToleranceConfig::default(),
            }),
            ..base(name, warped(), line(0.0), 1.0)
        },
        "embedding-sweep" => RunConfig {
            family: Some(FamilyConfig::Embedding {
                to: line(0.1),
                tau: LADDER.to_vec(),
                tolerances: SweepToleranceConfig::default(),
            }),
            ..base(name, unit_torus(MetricConfig::Flat), line(0.0), 1.1)
        },
        "sphere-latitude-sweep" => RunConfig {
            family: Some(FamilyConfig::Embedding {
                to: SubmanifoldConfig::Latitude { z0: 0.2 },
                tau: LADDER.to_vec(),
                tolerances: SweepToleranceConfig::default(),
            }),
            ..base(
                name,
                BackendConfig::Sphere { radius: 1.0 },
                SubmanifoldConfig::Latitude { z0: 0.0 },
                2.0,
            )
        },
        _ => return Err(ConfigError::UnknownScenario(name.to_string(), NAMES.join(", "))),
    };
    config.check()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_builtin_is_valid() {
        for name in NAMES {
            let c = builtin(name).unwrap();
            assert_eq!(c.scenario, *name);
            assert_eq!(parse(&serde_json::to_string(&c).unwrap()).unwrap(), c);
        }
        assert!(builtin("nope").is_err());
    }
}

//! Run configuration: sectioned TOML describing the domain, medium, source,
//! solver and experiments.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::boundary::{BoundarySource, Gamma, SideA, SourceKind};
use crate::error::{Error, Result};
use crate::geometry::{DomainGeometry, Interface, SubdomainPartition};
use crate::media::{CoefficientField, MediumModel, PhaseFunction};
use crate::problem::TransportProblem;
use crate::solver::SolverSettings;
use crate::vector::Vec3;

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub out: Option<String>,
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub partition: PartitionConfig,
    pub medium: MediumConfig,
    pub source: SourceConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub experiment: ExperimentConfig,
    #[serde(default)]
    pub verify: VerifyConfig,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GeometryConfig {
    pub kind: String,
    #[serde(default)]
    pub center: Vec<f64>,
    #[serde(default = "one")]
    pub radius: f64,
    #[serde(default)]
    pub vertices: Vec<[f64; 2]>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            kind: "disk".into(),
            center: vec![0.0, 0.0],
            radius: 1.0,
            vertices: Vec::new(),
        }
    }
}

#[derive(Clone, Debug, Default, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PartitionConfig {
    #[serde(default)]
    pub interfaces: Vec<InterfaceConfig>,
    pub max_crossings: Option<usize>,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterfaceConfig {
    #[serde(alias = "sphere")]
    Circle {
        #[serde(default)]
        center: Vec<f64>,
        radius: f64,
    },
    Plane { normal: Vec<f64>, offset: f64 },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(untagged)]
pub enum FieldConfig {
    Constant(f64),
    Table(FieldTable),
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldTable {
    Affine {
        value: f64,
        gradient: Vec<f64>,
        #[serde(default)]
        origin: Vec<f64>,
    },
    Gaussian {
        base: f64,
        amplitude: f64,
        center: Vec<f64>,
        width: f64,
    },
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub mu_t: Vec<FieldConfig>,
    pub mu_s: Vec<FieldConfig>,
    #[serde(default = "isotropic")]
    pub phase: String,
    #[serde(default)]
    pub g: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SourceConfig {
    pub kind: String,
    #[serde(rename = "I", alias = "intensity", default = "one")]
    pub intensity: f64,
    pub gamma_angles: Option<[f64; 2]>,
    pub gamma_plane: Option<PlaneConfig>,
    #[serde(rename = "side_A", alias = "side_a", default = "positive")]
    pub side_a: String,
    #[serde(default)]
    pub anisotropy: f64,
    #[serde(default)]
    pub beam: Vec<f64>,
    #[serde(default)]
    pub concentration: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PlaneConfig {
    pub normal: Vec<f64>,
    pub offset: f64,
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub h: f64,
    pub n_directions: usize,
    pub tol: f64,
    pub quad_order: usize,
    pub max_terms: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let d = SolverSettings::default();
        SolverConfig {
            h: d.h,
            n_directions: d.n_directions,
            tol: d.tol,
            quad_order: d.quad_order,
            max_terms: d.max_terms,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Incoming directions per `gamma` point in a jump scan; odd counts
    /// include the inward normal.
    pub fan: usize,
    pub n_angles: usize,
    pub n_offsets: usize,
    pub image_size: usize,
    /// `"arc_basis"`, `"direct"` or `"exact"`.
    pub mode: String,
    pub basis_arcs: usize,
    pub basis_h: f64,
    pub basis_directions: usize,
    pub basis_tol: f64,
    /// Error mask radius as a fraction of the disk radius.
    pub mask: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            fan: 33,
            n_angles: 180,
            n_offsets: 129,
            image_size: 128,
            mode: "arc_basis".into(),
            basis_arcs: 32,
            basis_h: 1.0 / 16.0,
            basis_directions: 16,
            basis_tol: 1e-2,
            mask: 0.8,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub residual_samples: usize,
    pub residual_max: f64,
    pub measure_nodes: usize,
    pub measure_tol: f64,
    /// Sphere quadratures converge slowly; balls get their own budget.
    pub measure_nodes_3d: usize,
    pub measure_tol_3d: f64,
    pub jump_tol: f64,
    pub straddle_ratio: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            residual_samples: 200,
            residual_max: 5e-2,
            measure_nodes: 2048,
            measure_tol: 1e-6,
            measure_nodes_3d: 20000,
            measure_tol_3d: 1e-2,
            jump_tol: 0.05,
            straddle_ratio: 0.1,
        }
    }
}

fn one() -> f64 {
    1.0
}

fn isotropic() -> String {
    "isotropic".into()
}

fn positive() -> String {
    "positive".into()
}

fn vec_of(key: &str, v: &[f64], dim: usize) -> Result<Vec3> {
    if v.is_empty() {
        return Ok(Vec3::ZERO);
    }
    if v.len() != dim {
        return Err(Error::config(key, format!("expected {dim} components, got {}", v.len())));
    }
    Ok(Vec3::from_slice(v).expect("length checked"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let key = e
                .message()
                .split('`')
                .nth(1)
                .unwrap_or("config")
                .to_string();
            Error::config(&key, e.to_string())
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn dim(&self) -> usize {
        if self.geometry.kind == "ball" {
            3
        } else {
            2
        }
    }

    pub fn geometry(&self) -> Result<DomainGeometry> {
        let g = &self.geometry;
        let wrap = |e: Error| Error::config("geometry", e.to_string());
        match g.kind.as_str() {
            "disk" => {
                let c = vec_of("geometry.center", &g.center, 2)?;
                DomainGeometry::disk([c.x, c.y], g.radius).map_err(wrap)
            }
            "ball" => {
                let c = vec_of("geometry.center", &g.center, 3)?;
                DomainGeometry::ball(c.to_array(), g.radius).map_err(wrap)
            }
            "polygon" => DomainGeometry::polygon(&g.vertices).map_err(wrap),
            other => Err(Error::config(
                "geometry.kind",
                format!("unknown kind `{other}` (disk, ball, polygon)"),
            )),
        }
    }

    pub fn partition(&self, geometry: &DomainGeometry) -> Result<SubdomainPartition> {
        let dim = geometry.dim();
        let interfaces = self
            .partition
            .interfaces
            .iter()
            .map(|i| match i {
                InterfaceConfig::Circle { center, radius } => Ok(Interface::Sphere {
                    center: vec_of("partition.interfaces.center", center, dim)?,
                    radius: *radius,
                }),
                InterfaceConfig::Plane { normal, offset } => Ok(Interface::Plane {
                    normal: vec_of("partition.interfaces.normal", normal, dim)?,
                    offset: *offset,
                }),
            })
            .collect::<Result<Vec<_>>>()?;
        let probe = SubdomainPartition::new(&interfaces, usize::MAX)
            .map_err(|e| Error::config("partition.interfaces", e.to_string()))?;
        let max = self
            .partition
            .max_crossings
            .unwrap_or_else(|| probe.natural_crossing_bound());
        SubdomainPartition::new(&interfaces, max)
            .map_err(|e| Error::config("partition.interfaces", e.to_string()))
    }

    pub fn medium(&self, geometry: &DomainGeometry, partition: &SubdomainPartition) -> Result<MediumModel> {
        let m = &self.medium;
        let dim = geometry.dim();
        let field = |key: &str, f: &FieldConfig| -> Result<CoefficientField> {
            Ok(match f {
                FieldConfig::Constant(c) => CoefficientField::Constant(*c),
                FieldConfig::Table(FieldTable::Affine {
                    value,
                    gradient,
                    origin,
                }) => CoefficientField::Affine {
                    value: *value,
                    gradient: vec_of(key, gradient, dim)?,
                    origin: vec_of(key, origin, dim)?,
                },
                FieldConfig::Table(FieldTable::Gaussian {
                    base,
                    amplitude,
                    center,
                    width,
                }) => CoefficientField::Gaussian {
                    base: *base,
                    amplitude: *amplitude,
                    center: vec_of(key, center, dim)?,
                    width: *width,
                },
            })
        };
        let mu_t = m.mu_t.iter().map(|f| field("medium.mu_t", f)).collect::<Result<Vec<_>>>()?;
        let mu_s = m.mu_s.iter().map(|f| field("medium.mu_s", f)).collect::<Result<Vec<_>>>()?;
        let phase = match m.phase.as_str() {
            "isotropic" => PhaseFunction::Isotropic,
            "hg" => PhaseFunction::HenyeyGreenstein { g: m.g },
            other => {
                return Err(Error::config(
                    "medium.phase",
                    format!("unknown phase `{other}` (isotropic, hg)"),
                ))
            }
        };
        MediumModel::new(mu_t, mu_s, phase, geometry, partition)
            .map(|md| md.with_quad_order(self.solver.quad_order.max(1)))
            .map_err(|e| {
                let msg = e.to_string();
                let key = if msg.contains("mu_s <=") {
                    "medium.mu_s"
                } else if msg.contains("asymmetry") {
                    "medium.g"
                } else if msg.contains("subdomains") {
                    "medium.mu_t"
                } else {
                    "medium"
                };
                Error::config(key, msg)
            })
    }

    pub fn source(&self, geometry: &DomainGeometry) -> Result<BoundarySource> {
        let s = &self.source;
        let dim = geometry.dim();
        let kind = match s.kind.as_str() {
            "constant" => SourceKind::Constant { value: s.intensity },
            "direction_smooth" => SourceKind::DirectionSmooth {
                intensity: s.intensity,
                anisotropy: s.anisotropy,
            },
            "space_smooth" => SourceKind::SpaceSmooth {
                intensity: s.intensity,
                beam: vec_of("source.beam", &s.beam, dim)?,
                concentration: s.concentration,
            },
            "piecewise_ab" => {
                let gamma = if dim == 2 {
                    let [a1, a2] = s.gamma_angles.ok_or_else(|| {
                        Error::config("source.gamma_angles", "required for piecewise_ab in 2D")
                    })?;
                    Gamma::from_angles(geometry, a1, a2)
                } else {
                    let p = s.gamma_plane.as_ref().ok_or_else(|| {
                        Error::config("source.gamma_plane", "required for piecewise_ab in 3D")
                    })?;
                    Gamma::plane(geometry, vec_of("source.gamma_plane.normal", &p.normal, 3)?, p.offset)
                }
                .map_err(|e| Error::config("source.gamma", e.to_string()))?;
                let side_a = match s.side_a.as_str() {
                    "positive" => SideA::Positive,
                    "negative" => SideA::Negative,
                    other => {
                        return Err(Error::config(
                            "source.side_A",
                            format!("expected positive or negative, got `{other}`"),
                        ))
                    }
                };
                SourceKind::PiecewiseAB {
                    intensity: s.intensity,
                    gamma,
                    side_a,
                }
            }
            other => {
                return Err(Error::config(
                    "source.kind",
                    format!("unknown kind `{other}`"),
                ))
            }
        };
        BoundarySource::new(kind).map_err(|e| Error::config("source", e.to_string()))
    }

    pub fn solver_settings(&self) -> Result<SolverSettings> {
        let s = &self.solver;
        let settings = SolverSettings {
            h: s.h,
            n_directions: s.n_directions,
            tol: s.tol,
            quad_order: s.quad_order,
            max_terms: s.max_terms,
            keep_terms: 0,
        };
        Ok(settings)
    }

    /// Assembles and validates the transport problem.
    pub fn problem(&self) -> Result<TransportProblem> {
        let geometry = self.geometry()?;
        let partition = self.partition(&geometry)?;
        let medium = self.medium(&geometry, &partition)?;
        let source = self.source(&geometry)?;
        let settings = self.solver_settings()?;
        settings
            .validate(geometry.diameter())
            .map_err(|e| Error::config("solver", e.to_string()))?;
        TransportProblem::new(geometry, partition, medium, source)
            .map_err(|e| Error::config("source", e.to_string()))
    }
}

/// The two-point `gamma` through the top and bottom of the unit disk used
/// by the default configurations.
pub const VERTICAL_GAMMA: [f64; 2] = [PI / 2.0, -PI / 2.0];

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_REGION: &str = r#"
seed = 3

[geometry]
kind = "disk"
radius = 1.0

[partition]
interfaces = [{ kind = "circle", radius = 0.5 }]

[medium]
mu_t = [1.0, 2.0]
mu_s = [0.5, 0.5]
phase = "isotropic"

[source]
kind = "piecewise_ab"
I = 1.0
gamma_angles = [1.5707963267948966, -1.5707963267948966]
side_A = "positive"

[solver]
h = 0.0625
n_directions = 16
tol = 1e-3
"#;

    #[test]
    fn parses_two_region_config() {
        let cfg = RunConfig::from_toml(TWO_REGION).unwrap();
        let p = cfg.problem().unwrap();
        assert_eq!(p.partition.piece_count(), 2);
        assert_eq!(p.partition.max_crossings(), 2);
        assert_eq!(cfg.experiment.n_offsets, 129);
        let back = RunConfig::from_toml(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn scattering_above_extinction_is_rejected() {
        let text = TWO_REGION.replace("mu_s = [0.5, 0.5]", "mu_s = [1.5, 0.5]");
        let err = RunConfig::from_toml(&text).unwrap().problem().unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("mu_s <= mu_t"), "{msg}");
    }

    #[test]
    fn unknown_keys_name_the_key() {
        let text = TWO_REGION.replace("tol = 1e-3", "tol = 1e-3\nbogus = 2");
        let err = RunConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }
}

//! Scene files: a dimension, a region, explicit family members and the
//! check configuration, as declarative JSON.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normality::MartyConfig;
use crate::polynomial::ComplexPoly;
use crate::position::Region;
use crate::projective::{MovingHyperplane, ProjCurve, RawHyperplane, RawTuple};
use crate::sharing::{CheckConfig, FamilyMember};
use crate::tolerance::Tolerances;

pub const SCHEMA_VERSION: u32 = 1;

/// Parameters of the rescaling explorer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ZalcmanConfig {
    pub zeta_radius: f64,
    pub grid_n: usize,
}

impl Default for ZalcmanConfig {
    fn default() -> Self {
        ZalcmanConfig {
            zeta_radius: 2.0,
            grid_n: 21,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    pub n: usize,
    pub region: Region,
    pub members: Vec<FamilyMember>,
    pub config: CheckConfig,
    pub zalcman: ZalcmanConfig,
    pub metadata: BTreeMap<String, serde_json::Value>,
}

/// Wire form of the `config` block.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub epsilon: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_match: Option<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub marty: MartyConfig,
    #[serde(default)]
    pub zalcman: ZalcmanConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MemberFile {
    pub label: String,
    pub curve: RawTuple,
    pub hyperplanes: Vec<RawHyperplane>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionFile {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    pub grid_nx: usize,
    pub grid_ny: usize,
}

/// Top-level scene document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneFile {
    #[serde(default = "default_version")]
    pub schema_version: u32,
    pub n: usize,
    pub region: RegionFile,
    pub config: ConfigFile,
    pub members: Vec<MemberFile>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

fn default_version() -> u32 {
    SCHEMA_VERSION
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub grid: Option<(usize, usize)>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub tol_root: Option<f64>,
}

fn invalid(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Validation {
        path: path.into(),
        message: message.into(),
    }
}

impl SceneFile {
    pub fn apply(&mut self, o: &Overrides) {
        if let Some((nx, ny)) = o.grid {
            self.region.grid_nx = nx;
            self.region.grid_ny = ny;
        }
        if let Some(e) = o.epsilon {
            self.config.epsilon = e;
        }
        if let Some(d) = o.delta {
            self.config.delta = d;
        }
        if let Some(t) = o.tol_root {
            self.config.tolerances.root = t;
        }
    }

    /// Enforce every type invariant, reporting the JSON path of the first
    /// violation. Hyperplanes are normalized against the region grid.
    pub fn validate(self) -> Result<Scene> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(invalid(
                "schema_version",
                format!(
                    "unsupported version {}, expected {SCHEMA_VERSION}",
                    self.schema_version
                ),
            ));
        }
        let r = &self.region;
        let region = Region::new(r.x_min, r.x_max, r.y_min, r.y_max, r.grid_nx, r.grid_ny)
            .map_err(|e| e.at("region"))?;
        let c = &self.config;
        let config = CheckConfig {
            epsilon: c.epsilon,
            delta: c.delta,
            region,
            tau_match: c.tau_match,
            tol: c.tolerances,
            marty: c.marty,
        };
        config.validate().map_err(|e| e.at("config"))?;
        if c.zalcman.zeta_radius <= 0.0 || c.zalcman.grid_n < 2 {
            return Err(invalid(
                "config.zalcman",
                "zeta_radius must be positive and grid_n >= 2",
            ));
        }

        let n = self.n;
        let mut labels = HashSet::new();
        let mut members = Vec::with_capacity(self.members.len());
        for (i, m) in self.members.into_iter().enumerate() {
            let path = format!("members[{i}]");
            if !labels.insert(m.label.clone()) {
                return Err(invalid(
                    format!("{path}.label"),
                    format!("duplicate label {:?}", m.label),
                ));
            }
            if m.curve.n != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.curve.n,
                });
            }
            let curve =
                to_curve(m.curve, n, &config.tol).map_err(|e| e.at(&format!("{path}.curve")))?;
            if m.hyperplanes.len() != 2 * n + 1 {
                return Err(invalid(
                    format!("{path}.hyperplanes"),
                    format!(
                        "expected 2n+1 = {} hyperplanes, found {}",
                        2 * n + 1,
                        m.hyperplanes.len()
                    ),
                ));
            }
            let mut hyperplanes = Vec::with_capacity(m.hyperplanes.len());
            for (j, h) in m.hyperplanes.into_iter().enumerate() {
                if h.n != n {
                    return Err(Error::DimensionMismatch {
                        expected: n,
                        found: h.n,
                    });
                }
                let h = to_hyperplane(h, n, &config.tol)
                    .map_err(|e| e.at(&format!("{path}.hyperplanes[{j}]")))?;
                hyperplanes.push(h.normalized(&region));
            }
            members.push(FamilyMember::new(m.label, curve, hyperplanes).map_err(|e| e.at(&path))?);
        }
        Ok(Scene {
            n,
            region,
            members,
            zalcman: c.zalcman,
            config,
            metadata: self.metadata,
        })
    }
}

fn check_count(items: &[ComplexPoly], n: usize) -> Result<()> {
    if items.len() != n + 1 {
        return Err(invalid(
            "",
            format!(
                "expected n+1 = {} polynomials, found {}",
                n + 1,
                items.len()
            ),
        ));
    }
    Ok(())
}

fn to_curve(raw: RawTuple, n: usize, tol: &Tolerances) -> Result<ProjCurve> {
    check_count(&raw.components, n)?;
    ProjCurve::new_with(raw.components, tol)
}

fn to_hyperplane(raw: RawHyperplane, n: usize, tol: &Tolerances) -> Result<MovingHyperplane> {
    check_count(&raw.coeffs, n)?;
    MovingHyperplane::new_with(raw.coeffs, tol)
}

impl Scene {
    pub fn to_file(&self) -> SceneFile {
        let r = &self.region;
        SceneFile {
            schema_version: SCHEMA_VERSION,
            n: self.n,
            region: RegionFile {
                x_min: r.x_min,
                x_max: r.x_max,
                y_min: r.y_min,
                y_max: r.y_max,
                grid_nx: r.grid_nx,
                grid_ny: r.grid_ny,
            },
            config: ConfigFile {
                epsilon: self.config.epsilon,
                delta: self.config.delta,
                tau_match: self.config.tau_match,
                tolerances: self.config.tol,
                marty: self.config.marty,
                zalcman: self.zalcman,
            },
            members: self
                .members
                .iter()
                .map(|m| MemberFile {
                    label: m.label.clone(),
                    curve: RawTuple {
                        n: m.curve.n(),
                        components: m.curve.components().to_vec(),
                    },
                    hyperplanes: m
                        .hyperplanes
                        .iter()
                        .cloned()
                        .map(RawHyperplane::from)
                        .collect(),
                })
                .collect(),
            metadata: self.metadata.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("scene serializes")
    }

    pub fn curves(&self) -> Vec<ProjCurve> {
        self.members.iter().map(|m| m.curve.clone()).collect()
    }
}

pub fn parse_scene(text: &str, overrides: &Overrides) -> Result<Scene> {
    let mut file: SceneFile =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    file.apply(overrides);
    file.validate()
}

pub fn load_scene(path: impl AsRef<Path>) -> Result<Scene> {
    load_scene_with(path, &Overrides::default())
}

pub fn load_scene_with(path: impl AsRef<Path>, overrides: &Overrides) -> Result<Scene> {
    let text = std::fs::read_to_string(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    parse_scene(&text, overrides)
}

pub fn save_scene(scene: &Scene, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, scene.to_json() + "\n")?;
    Ok(())
}

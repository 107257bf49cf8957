//! Ply materials: technical constants or polar moduli, plus file I/O.
//!
//! Units are an opaque consistency tag ("GPa,mm", "MPa,mm", ...). No
//! conversion is attempted; mixing tags inside one stack is an error.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kelvin::Tensor4Sym;
use crate::polar::{self, BoundsKind, PolarElastic};

/// How a ply material is specified.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", content = "params", rename_all = "snake_case")]
pub enum MaterialSource {
    /// Engineering constants of an orthotropic ply in its own axes.
    Technical {
        e1: f64,
        e2: f64,
        g12: f64,
        nu12: f64,
    },
    /// Polar moduli of the reduced stiffness; angles in radians.
    Polar {
        t0: f64,
        t1: f64,
        r0: f64,
        r1: f64,
        phi0: f64,
        phi1: f64,
    },
}

/// A ply material: elastic definition, thickness and units tag.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Material {
    pub name: String,
    pub source: MaterialSource,
    /// Ply thickness, in the length unit of the units tag.
    pub thickness: f64,
    pub units: String,
}

impl Material {
    pub fn technical(
        name: &str,
        e1: f64,
        e2: f64,
        g12: f64,
        nu12: f64,
        thickness: f64,
        units: &str,
    ) -> Self {
        Material {
            name: name.to_string(),
            source: MaterialSource::Technical { e1, e2, g12, nu12 },
            thickness,
            units: units.to_string(),
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn polar(
        name: &str,
        t0: f64,
        t1: f64,
        r0: f64,
        r1: f64,
        phi0: f64,
        phi1: f64,
        thickness: f64,
        units: &str,
    ) -> Self {
        Material {
            name: name.to_string(),
            source: MaterialSource::Polar {
                t0,
                t1,
                r0,
                r1,
                phi0,
                phi1,
            },
            thickness,
            units: units.to_string(),
        }
    }

    fn invalid(&self, reason: &str) -> Error {
        Error::InvalidMaterial {
            name: self.name.clone(),
            reason: reason.to_string(),
        }
    }

    /// Plane-stress reduced stiffness in the ply frame, Kelvin notation.
    pub fn reduced_stiffness(&self) -> Result<Tensor4Sym> {
        if !self.thickness.is_finite() || self.thickness <= 0.0 {
            return Err(self.invalid("ply thickness must be positive"));
        }
        let q = match self.source {
            MaterialSource::Technical { e1, e2, g12, nu12 } => {
                if e1 <= 0.0 || e2 <= 0.0 || g12 <= 0.0 {
                    return Err(self.invalid("moduli must be positive"));
                }
                let nu21 = nu12 * e2 / e1;
                let den = 1.0 - nu12 * nu21;
                if den <= 0.0 {
                    return Err(self.invalid("1 - nu12*nu21 must be positive"));
                }
                Tensor4Sym::new(e1 / den, nu12 * e2 / den, 0.0, e2 / den, 0.0, 2.0 * g12)
            }
            MaterialSource::Polar {
                t0,
                t1,
                r0,
                r1,
                phi0,
                phi1,
            } => {
                if r0 < 0.0 || r1 < 0.0 {
                    return Err(self.invalid("r0 and r1 must be non-negative"));
                }
                let p = PolarElastic::from_components(
                    t0,
                    t1,
                    r0 * (4.0 * phi0).cos(),
                    r0 * (4.0 * phi0).sin(),
                    r1 * (2.0 * phi1).cos(),
                    r1 * (2.0 * phi1).sin(),
                );
                polar::to_cartesian_sym(&p, 0.0)
            }
        };
        let report = polar::bounds_check(
            &polar::from_cartesian_sym(&q),
            BoundsKind::StiffnessPositiveDefinite,
        );
        if !report.passed() {
            return Err(self.invalid(&format!(
                "stiffness bounds violated: {:?}",
                report.violations
            )));
        }
        Ok(q)
    }

    /// Polar parameters of the reduced stiffness.
    pub fn polar_moduli(&self) -> Result<PolarElastic> {
        Ok(polar::from_cartesian_sym(&self.reduced_stiffness()?))
    }

    /// Engineering constants recovered through the compliance of Q.
    pub fn technical_constants(&self) -> Result<(f64, f64, f64, f64)> {
        let s = self.reduced_stiffness()?.invert()?;
        let e1 = 1.0 / s.m11;
        let e2 = 1.0 / s.m22;
        let nu12 = -s.m12 / s.m11;
        let g12 = 1.0 / (2.0 * s.m66);
        Ok((e1, e2, g12, nu12))
    }

    /// Anisotropy ratio rho = R1/R0 of the ply, when R0 > 0.
    pub fn anisotropy_ratio(&self) -> Result<Option<f64>> {
        let p = self.polar_moduli()?;
        Ok(p.phi0_defined.then(|| p.r1 / p.r0))
    }
}

/// The materials shipped with the toolkit.
pub fn builtins() -> Vec<Material> {
    vec![
        // Carbon-epoxy T300-5208; the usual 0.125 mm nominal ply.
        Material::technical("T300-5208", 181.0, 10.30, 7.17, 0.28, 0.125, "GPa,mm"),
        // Balanced carbon-epoxy fabric.
        Material::technical("CE-fabric-gay", 5.4e4, 5.4e4, 4.0e3, 0.045, 0.16, "MPa,mm"),
    ]
}

/// Finds a material by name in `extra` first, then among the builtins.
pub fn find(name: &str, extra: &[Material]) -> Option<Material> {
    extra
        .iter()
        .find(|m| m.name == name)
        .cloned()
        .or_else(|| builtins().into_iter().find(|m| m.name == name))
}

// ---------------------------------------------------------------------------
// File format. Angles are degrees in files, radians in memory.
// ---------------------------------------------------------------------------

pub const MATERIAL_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(
    deny_unknown_fields,
    tag = "model",
    content = "params",
    rename_all = "snake_case"
)]
enum SourceFile {
    Technical {
        e1: f64,
        e2: f64,
        g12: f64,
        nu12: f64,
    },
    Polar {
        t0: f64,
        t1: f64,
        r0: f64,
        r1: f64,
        phi0_deg: f64,
        phi1_deg: f64,
    },
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialEntry {
    name: String,
    #[serde(flatten)]
    source: SourceFile,
    thickness: f64,
    units: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaterialFile {
    schema_version: u32,
    materials: Vec<MaterialEntry>,
}

fn entry_to_material(e: MaterialEntry) -> Material {
    let source = match e.source {
        SourceFile::Technical { e1, e2, g12, nu12 } => {
            MaterialSource::Technical { e1, e2, g12, nu12 }
        }
        SourceFile::Polar {
            t0,
            t1,
            r0,
            r1,
            phi0_deg,
            phi1_deg,
        } => MaterialSource::Polar {
            t0,
            t1,
            r0,
            r1,
            phi0: phi0_deg.to_radians(),
            phi1: phi1_deg.to_radians(),
        },
    };
    Material {
        name: e.name,
        source,
        thickness: e.thickness,
        units: e.units,
    }
}

fn material_to_entry(m: &Material) -> MaterialEntry {
    let source = match m.source {
        MaterialSource::Technical { e1, e2, g12, nu12 } => {
            SourceFile::Technical { e1, e2, g12, nu12 }
        }
        MaterialSource::Polar {
            t0,
            t1,
            r0,
            r1,
            phi0,
            phi1,
        } => SourceFile::Polar {
            t0,
            t1,
            r0,
            r1,
            phi0_deg: phi0.to_degrees(),
            phi1_deg: phi1.to_degrees(),
        },
    };
    MaterialEntry {
        name: m.name.clone(),
        source,
        thickness: m.thickness,
        units: m.units.clone(),
    }
}

fn parse_error(path: &Path, err: &serde_json::Error) -> Error {
    Error::Parse {
        path: path.display().to_string(),
        message: format!("{err} (line {}, column {})", err.line(), err.column()),
    }
}

/// Loads a material file. An empty (or whitespace-only) file is an empty
/// list.
pub fn load_materials(path: &Path) -> Result<Vec<Material>> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let file: MaterialFile = serde_json::from_str(&text).map_err(|e| parse_error(path, &e))?;
    if file.schema_version != MATERIAL_SCHEMA_VERSION {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("unsupported schema_version {}", file.schema_version),
        });
    }
    Ok(file.materials.into_iter().map(entry_to_material).collect())
}

/// Writes a material file in the documented schema.
pub fn save_materials(path: &Path, materials: &[Material]) -> Result<()> {
    let file = MaterialFile {
        schema_version: MATERIAL_SCHEMA_VERSION,
        materials: materials.iter().map(material_to_entry).collect(),
    };
    let text = serde_json::to_string_pretty(&file).expect("material file serializes");
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

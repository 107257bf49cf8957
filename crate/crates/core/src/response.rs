//! Plate response to membrane forces and bending moments.
//!
//! The inverse constitutive law gives mid-plane strains and curvatures:
//!
//!   eps   = (1/h)   calA N + (2/h^2)  calB M
//!   kappa = (2/h^2) calB^T N + (12/h^3) calD M
//!
//! Curvatures are Kelvin 3-vectors (kappa6 = sqrt(2) kappa12). A uniform
//! curvature field integrates to the quadratic deflection surface
//! w = -1/2 (k1 x^2 + sqrt(2) k6 x y + k2 y^2); positive curvature gives a
//! downward-convex surface with w(0,0) = 0.

use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kelvin::{Vec3K, SQRT2};
use crate::laminate::LaminateTensors;

/// In-plane forces, moments and plate geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    /// Membrane forces (force/length), Kelvin components.
    pub n: Vec3K,
    /// Bending moments (force), Kelvin components.
    pub m: Vec3K,
    /// Plate side along x.
    pub lx: f64,
    /// Plate side along y.
    pub ly: f64,
    /// Units tag; checked against the laminate when present.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub units: Option<String>,
}

impl LoadCase {
    pub fn membrane(n1: f64, n2: f64, n6: f64, lx: f64, ly: f64) -> Self {
        LoadCase {
            n: Vec3K::new(n1, n2, n6),
            m: Vec3K::zero(),
            lx,
            ly,
            units: None,
        }
    }
}

/// Mid-plane strains, curvatures and the curvature invariants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResponseResult {
    pub eps: Vec3K,
    pub kappa: Vec3K,
    /// Gaussian curvature K = k1 k2 - (k6/sqrt 2)^2.
    pub gaussian_k: f64,
    /// Mean curvature H = (k1 + k2)/2.
    pub mean_h: f64,
}

/// Evaluates the inverse constitutive law for one load case.
pub fn respond(lt: &LaminateTensors, lc: &LoadCase) -> Result<ResponseResult> {
    if !(lc.lx > 0.0 && lc.ly > 0.0) {
        return Err(Error::InvalidStack(
            "plate dimensions must be positive".into(),
        ));
    }
    if let Some(units) = &lc.units {
        if units != &lt.units {
            return Err(Error::UnitsMismatch {
                expected: lt.units.clone(),
                found: units.clone(),
            });
        }
    }
    let h = lt.h;
    let eps = lt
        .cal_a
        .apply(&lc.n)
        .scale(1.0 / h)
        .add(&lt.cal_b.apply(&lc.m).scale(2.0 / (h * h)));
    let kappa = lt
        .cal_b
        .transpose()
        .apply(&lc.n)
        .scale(2.0 / (h * h))
        .add(&lt.cal_d.apply(&lc.m).scale(12.0 / (h * h * h)));
    let k12 = kappa.c6 / SQRT2;
    Ok(ResponseResult {
        eps,
        kappa,
        gaussian_k: kappa.c1 * kappa.c2 - k12 * k12,
        mean_h: 0.5 * (kappa.c1 + kappa.c2),
    })
}

/// A sampled deflection surface over the centered plate rectangle.
#[derive(Debug, Clone, Serialize)]
pub struct SurfaceMesh {
    pub nx: usize,
    pub ny: usize,
    /// Row-major (x varies fastest) vertices (x, y, w).
    pub vertices: Vec<[f64; 3]>,
}

/// Samples w(x, y) = -1/2 (k1 x^2 + sqrt(2) k6 x y + k2 y^2) on an
/// nx-by-ny grid over [-lx/2, lx/2] x [-ly/2, ly/2].
pub fn surface_mesh(rr: &ResponseResult, lc: &LoadCase, nx: usize, ny: usize) -> SurfaceMesh {
    assert!(nx >= 2 && ny >= 2, "grid must be at least 2x2");
    let (k1, k2, k6) = (rr.kappa.c1, rr.kappa.c2, rr.kappa.c6);
    let mut vertices = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        let y = -lc.ly / 2.0 + lc.ly * j as f64 / (ny - 1) as f64;
        for i in 0..nx {
            let x = -lc.lx / 2.0 + lc.lx * i as f64 / (nx - 1) as f64;
            let w = -0.5 * (k1 * x * x + SQRT2 * k6 * x * y + k2 * y * y);
            vertices.push([x, y, w]);
        }
    }
    SurfaceMesh { nx, ny, vertices }
}

impl SurfaceMesh {
    pub fn w(&self, i: usize, j: usize) -> f64 {
        self.vertices[j * self.nx + i][2]
    }

    /// CSV with an x,y,w header, one vertex per row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y,w\n");
        for v in &self.vertices {
            out.push_str(&format!("{},{},{}\n", v[0], v[1], v[2]));
        }
        out
    }

    /// Wavefront OBJ: vertices plus quad faces.
    pub fn to_obj(&self) -> String {
        let mut out = String::new();
        for v in &self.vertices {
            out.push_str(&format!("v {} {} {}\n", v[0], v[1], v[2]));
        }
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                let v0 = j * self.nx + i + 1;
                let v1 = v0 + 1;
                let v2 = v0 + self.nx + 1;
                let v3 = v0 + self.nx;
                out.push_str(&format!("f {v0} {v1} {v2} {v3}\n"));
            }
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }

    pub fn write_obj(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_obj()).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        })
    }
}

/// Loads a load-case file (JSON, schema_version 1).
pub fn load_load_case(path: &Path) -> Result<LoadCase> {
    #[derive(Deserialize)]
    #[serde(deny_unknown_fields)]
    struct LoadFile {
        schema_version: u32,
        n: [f64; 3],
        #[serde(default)]
        m: [f64; 3],
        lx: f64,
        ly: f64,
        #[serde(default)]
        units: Option<String>,
    }
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let f: LoadFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: format!("{e} (line {}, column {})", e.line(), e.column()),
    })?;
    if f.schema_version != 1 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("unsupported schema_version {}", f.schema_version),
        });
    }
    Ok(LoadCase {
        n: Vec3K::new(f.n[0], f.n[1], f.n[2]),
        m: Vec3K::new(f.m[0], f.m[1], f.m[2]),
        lx: f.lx,
        ly: f.ly,
        units: f.units,
    })
}

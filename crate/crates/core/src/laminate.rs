//! Stacking sequences and their homogenized tensors.
//!
//! A stack is an ordered list of (material, orientation) plies, index k = 1
//! at the bottom (z in [-h/2, -h/2 + t1]). Homogenization produces the
//! stiffness tensors A, B, D and, through the block inverse of the
//! constitutive law, the compliances calA, calB, calD:
//!
//!   calA = (A - 3 B D^-1 B)^-1
//!   calB = -3 calA B D^-1 = (-3 calD B A^-1)^T = -3 A^-1 B calD
//!   calD = (D - 3 B A^-1 B)^-1

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::kelvin::{Tensor4Gen, Tensor4Sym};
use crate::material::{self, Material};
use crate::polar::{self, PolarElastic, PolarGeneral, DEFAULT_TOL};

/// One ply: a material and its orientation in the laminate frame (radians).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ply {
    pub material: Material,
    pub angle: f64,
}

/// An ordered stacking sequence, bottom ply first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stack {
    plies: Vec<Ply>,
}

impl Stack {
    pub fn new(plies: Vec<Ply>) -> Result<Self> {
        if plies.is_empty() {
            return Err(Error::InvalidStack("a stack needs at least one ply".into()));
        }
        let units = plies[0].material.units.clone();
        for p in &plies {
            if p.material.units != units {
                return Err(Error::UnitsMismatch {
                    expected: units,
                    found: p.material.units.clone(),
                });
            }
            if !p.material.thickness.is_finite() || p.material.thickness <= 0.0 {
                return Err(Error::InvalidStack(format!(
                    "ply material '{}' has non-positive thickness",
                    p.material.name
                )));
            }
            if !p.angle.is_finite() {
                return Err(Error::InvalidStack("non-finite ply angle".into()));
            }
        }
        Ok(Stack { plies })
    }

    /// Identical-ply stack from one material and a list of orientations.
    pub fn identical(material: &Material, angles: &[f64]) -> Result<Self> {
        Self::new(
            angles
                .iter()
                .map(|&a| Ply {
                    material: material.clone(),
                    angle: a,
                })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.plies.len()
    }

    pub fn plies(&self) -> &[Ply] {
        &self.plies
    }

    pub fn angles(&self) -> Vec<f64> {
        self.plies.iter().map(|p| p.angle).collect()
    }

    pub fn units(&self) -> &str {
        &self.plies[0].material.units
    }

    pub fn thickness(&self) -> f64 {
        self.plies.iter().map(|p| p.material.thickness).sum()
    }

    /// z0..zn with z0 = -h/2 and zn = +h/2; strictly increasing.
    pub fn z_coords(&self) -> Vec<f64> {
        let h = self.thickness();
        let mut z = Vec::with_capacity(self.n() + 1);
        let mut cur = -h / 2.0;
        z.push(cur);
        for p in &self.plies {
            cur += p.material.thickness;
            z.push(cur);
        }
        // kill the roundoff on the top face so zn = +h/2 exactly
        *z.last_mut().unwrap() = h / 2.0;
        z
    }

    pub fn is_identical_ply(&self) -> bool {
        self.plies
            .iter()
            .all(|p| p.material == self.plies[0].material)
    }

    /// The stack with the z axis reversed (ply order flipped).
    pub fn flip_z(&self) -> Stack {
        let mut plies = self.plies.clone();
        plies.reverse();
        Stack { plies }
    }

    /// The stack with every ply orientation shifted by `alpha`.
    pub fn rotated(&self, alpha: f64) -> Stack {
        Stack {
            plies: self
                .plies
                .iter()
                .map(|p| Ply {
                    material: p.material.clone(),
                    angle: p.angle + alpha,
                })
                .collect(),
        }
    }
}

/// Homogenization weights a_k, b_k, d_k for an identical-ply laminate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerWeights {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
}

impl LayerWeights {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let a = vec![1.0 / nf; n];
        let b = (1..=n)
            .map(|k| (2.0 * k as f64 - nf - 1.0) / (nf * nf))
            .collect();
        let d = (1..=n)
            .map(|k| {
                let kf = k as f64;
                (12.0 * kf * (kf - nf - 1.0) + 4.0 + 3.0 * nf * (nf + 2.0)) / (nf * nf * nf)
            })
            .collect();
        LayerWeights { a, b, d }
    }
}

/// The twelve lamination parameters of an identical-ply stack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaminationParameters {
    /// xi1..xi12 in order.
    pub xi: [f64; 12],
}

impl LaminationParameters {
    /// (xi1, xi2): a-weighted 4-theta harmonic.
    pub fn a4(&self) -> (f64, f64) {
        (self.xi[0], self.xi[1])
    }
    /// (xi3, xi4): a-weighted 2-theta harmonic.
    pub fn a2(&self) -> (f64, f64) {
        (self.xi[2], self.xi[3])
    }
    /// (xi5, xi6): b-weighted 4-theta harmonic.
    pub fn b4(&self) -> (f64, f64) {
        (self.xi[4], self.xi[5])
    }
    /// (xi7, xi8): b-weighted 2-theta harmonic.
    pub fn b2(&self) -> (f64, f64) {
        (self.xi[6], self.xi[7])
    }
    /// (xi9, xi10): d-weighted 4-theta harmonic.
    pub fn d4(&self) -> (f64, f64) {
        (self.xi[8], self.xi[9])
    }
    /// (xi11, xi12): d-weighted 2-theta harmonic.
    pub fn d2(&self) -> (f64, f64) {
        (self.xi[10], self.xi[11])
    }
}

/// Computes xi1..xi12 for an identical-ply stack.
pub fn lamination_parameters(stack: &Stack) -> Result<LaminationParameters> {
    if !stack.is_identical_ply() {
        return Err(Error::NotIdenticalPly);
    }
    let w = LayerWeights::new(stack.n());
    let mut xi = [0.0; 12];
    for (idx, weights) in [&w.a, &w.b, &w.d].into_iter().enumerate() {
        let mut four = Complex64::new(0.0, 0.0);
        let mut two = Complex64::new(0.0, 0.0);
        for (k, p) in stack.plies.iter().enumerate() {
            four += weights[k] * Complex64::from_polar(1.0, 4.0 * p.angle);
            two += weights[k] * Complex64::from_polar(1.0, 2.0 * p.angle);
        }
        xi[4 * idx] = four.re;
        xi[4 * idx + 1] = four.im;
        xi[4 * idx + 2] = two.re;
        xi[4 * idx + 3] = two.im;
    }
    Ok(LaminationParameters { xi })
}

/// Stiffness of a ply oriented at `delta` in the laminate frame. Rotating
/// the frame by `-delta` adds `delta` to the ply's polar angles, which is
/// what the polar homogenization rules require.
pub fn ply_stiffness_at(q: &Tensor4Sym, delta: f64) -> Tensor4Sym {
    q.rotate(-delta)
}

/// The compliance tensors from A, B, D through the block inverse.
pub fn compliance_from_stiffness(
    a: &Tensor4Sym,
    b: &Tensor4Sym,
    d: &Tensor4Sym,
) -> Result<(Tensor4Sym, Tensor4Gen, Tensor4Sym)> {
    let a_inv = a.invert()?;
    let d_inv = d.invert()?;
    let bdb = b.to_gen().mul(&d_inv.to_gen()).mul(&b.to_gen()).sym_part();
    let bab = b.to_gen().mul(&a_inv.to_gen()).mul(&b.to_gen()).sym_part();
    let cal_a = a.sub(&bdb.scale(3.0)).invert()?;
    let cal_d = d.sub(&bab.scale(3.0)).invert()?;
    let cal_b = cal_a
        .to_gen()
        .mul(&b.to_gen())
        .mul(&d_inv.to_gen())
        .scale(-3.0);
    Ok((cal_a, cal_b, cal_d))
}

/// The homogenized laminate: stiffnesses, compliances, polar forms, flags.
#[derive(Debug, Clone, Serialize)]
pub struct LaminateTensors {
    pub h: f64,
    pub units: String,
    pub a: Tensor4Sym,
    pub b: Tensor4Sym,
    pub d: Tensor4Sym,
    pub cal_a: Tensor4Sym,
    pub cal_b: Tensor4Gen,
    pub cal_d: Tensor4Sym,
    pub a_polar: PolarElastic,
    pub b_polar: PolarElastic,
    pub d_polar: PolarElastic,
    pub cal_a_polar: PolarElastic,
    pub cal_b_polar: PolarGeneral,
    pub cal_d_polar: PolarElastic,
    pub lamination: Option<LaminationParameters>,
    /// Polar moduli of the basic layer, for identical-ply stacks.
    pub layer_polar: Option<PolarElastic>,
    pub identical_ply: bool,
    pub b_zero: bool,
    pub quasi_homogeneous: bool,
    pub qhcl: bool,
    /// ||B||_F / ||A||_F.
    pub b_norm_ratio: f64,
    /// ||A - D||_F / ||A||_F.
    pub ad_ratio: f64,
}

impl LaminateTensors {
    /// Homogenizes a stack: Cartesian A, B, D sums, block-inverse
    /// compliances, polar extractions and the structural flags.
    pub fn from_stack(stack: &Stack) -> Result<Self> {
        let z = stack.z_coords();
        let h = stack.thickness();
        let mut a = Tensor4Sym::zero();
        let mut b = Tensor4Sym::zero();
        let mut d = Tensor4Sym::zero();
        for (k, ply) in stack.plies().iter().enumerate() {
            let q = ply_stiffness_at(&ply.material.reduced_stiffness()?, ply.angle);
            let (z0, z1) = (z[k], z[k + 1]);
            a = a.add(&q.scale((z1 - z0) / h));
            b = b.add(&q.scale((z1 * z1 - z0 * z0) / (h * h)));
            d = d.add(&q.scale(4.0 * (z1 * z1 * z1 - z0 * z0 * z0) / (h * h * h)));
        }
        let identical = stack.is_identical_ply();
        let lamination = identical.then(|| lamination_parameters(stack).expect("identical ply"));
        let layer_polar = if identical {
            Some(stack.plies()[0].material.polar_moduli()?)
        } else {
            None
        };
        let mut lt = Self::from_stiffness(&a, &b, &d, h, stack.units())?;
        lt.lamination = lamination;
        lt.layer_polar = layer_polar;
        lt.identical_ply = identical;
        Ok(lt)
    }

    /// Builds the laminate record directly from stiffness tensors. Used for
    /// synthetic instances; the identical-ply flag is then inferred from the
    /// polar structure (zero isotropic part of B, shared isotropic parts of
    /// A and D).
    pub fn from_stiffness(
        a: &Tensor4Sym,
        b: &Tensor4Sym,
        d: &Tensor4Sym,
        h: f64,
        units: &str,
    ) -> Result<Self> {
        let (cal_a, cal_b, cal_d) = compliance_from_stiffness(a, b, d)?;
        let a_polar = polar::from_cartesian_sym(a);
        let b_polar = polar::from_cartesian_sym(b);
        let d_polar = polar::from_cartesian_sym(d);
        let scale = a_polar.scale().max(d_polar.scale());
        let identical_ply = b_polar.t0.abs() <= 1e-9 * scale
            && b_polar.t1.abs() <= 1e-9 * scale
            && (a_polar.t0 - d_polar.t0).abs() <= 1e-9 * scale
            && (a_polar.t1 - d_polar.t1).abs() <= 1e-9 * scale;
        let a_norm = a.frobenius();
        let b_norm_ratio = b.frobenius() / a_norm;
        let ad_ratio = a.sub(d).frobenius() / a_norm;
        let b_zero = b_norm_ratio < DEFAULT_TOL;
        Ok(LaminateTensors {
            h,
            units: units.to_string(),
            a: *a,
            b: *b,
            d: *d,
            cal_a,
            cal_b,
            cal_d,
            a_polar,
            b_polar,
            d_polar,
            cal_a_polar: polar::from_cartesian_sym(&cal_a),
            cal_b_polar: polar::from_cartesian_gen(&cal_b),
            cal_d_polar: polar::from_cartesian_sym(&cal_d),
            lamination: None,
            layer_polar: None,
            identical_ply,
            b_zero,
            quasi_homogeneous: ad_ratio < DEFAULT_TOL && b_zero,
            qhcl: ad_ratio < DEFAULT_TOL && !b_zero,
            b_norm_ratio,
            ad_ratio,
        })
    }

    /// Isotropic parts of the basic layer: from the stack material when
    /// known, otherwise from A (they coincide for identical plies).
    pub fn layer_isotropic_parts(&self) -> (f64, f64) {
        match &self.layer_polar {
            Some(p) => (p.t0, p.t1),
            None => (self.a_polar.t0, self.a_polar.t1),
        }
    }

    /// Relative asymmetry of the compliance coupling tensor,
    /// ||calB - calB^T|| / ||calB|| (zero for a vanishing calB).
    pub fn skew_residual(&self) -> f64 {
        let norm = self.cal_b.frobenius();
        if norm == 0.0 {
            return 0.0;
        }
        2.0 * self.cal_b.skew_norm() / norm
    }
}

/// Direct polar-sum homogenization of A, B, D: an independent route that
/// must agree with the Cartesian path.
pub fn polar_homogenize(stack: &Stack) -> Result<(PolarElastic, PolarElastic, PolarElastic)> {
    let z = stack.z_coords();
    let h = stack.thickness();
    let mut sums = [[Complex64::new(0.0, 0.0); 2]; 3];
    let mut iso = [[0.0f64; 2]; 3];
    for (k, ply) in stack.plies().iter().enumerate() {
        let p = ply.material.polar_moduli()?;
        let (z0, z1) = (z[k], z[k + 1]);
        let w = [
            (z1 - z0) / h,
            (z1 * z1 - z0 * z0) / (h * h),
            4.0 * (z1 * z1 * z1 - z0 * z0 * z0) / (h * h * h),
        ];
        let four = Complex64::from_polar(p.r0, 4.0 * (p.phi0 + ply.angle));
        let two = Complex64::from_polar(p.r1, 2.0 * (p.phi1 + ply.angle));
        for (i, wi) in w.iter().enumerate() {
            sums[i][0] += wi * four;
            sums[i][1] += wi * two;
            iso[i][0] += wi * p.t0;
            iso[i][1] += wi * p.t1;
        }
    }
    let build = |i: usize| {
        PolarElastic::from_components(
            iso[i][0],
            iso[i][1],
            sums[i][0].re,
            sums[i][0].im,
            sums[i][1].re,
            sums[i][1].im,
        )
    };
    Ok((build(0), build(1), build(2)))
}

// ---------------------------------------------------------------------------
// Stack file format: angles in degrees, material by name or inline.
// ---------------------------------------------------------------------------

pub const STACK_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum MaterialRef {
    Name(String),
    Inline(Box<Material>),
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlyEntry {
    angle_deg: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    material: Option<MaterialRef>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StackFile {
    schema_version: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    material: Option<MaterialRef>,
    plies: Vec<PlyEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
}

fn resolve(r: &MaterialRef, extra: &[Material], path: &Path) -> Result<Material> {
    match r {
        MaterialRef::Name(name) => material::find(name, extra).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            message: format!("unknown material '{name}'"),
        }),
        MaterialRef::Inline(m) => Ok((**m).clone()),
    }
}

/// Loads a stack file; ply-level materials override the stack-level default.
/// `extra` supplies named materials on top of the builtins.
pub fn load_stack(path: &Path, extra: &[Material]) -> Result<Stack> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let file: StackFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: format!("{e} (line {}, column {})", e.line(), e.column()),
    })?;
    if file.schema_version != STACK_SCHEMA_VERSION {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("unsupported schema_version {}", file.schema_version),
        });
    }
    let default = file
        .material
        .as_ref()
        .map(|r| resolve(r, extra, path))
        .transpose()?;
    let mut plies = Vec::with_capacity(file.plies.len());
    for (i, entry) in file.plies.iter().enumerate() {
        let mat = match (&entry.material, &default) {
            (Some(r), _) => resolve(r, extra, path)?,
            (None, Some(m)) => m.clone(),
            (None, None) => {
                return Err(Error::Parse {
                    path: path.display().to_string(),
                    message: format!("ply {} has no material and no stack default", i + 1),
                })
            }
        };
        plies.push(Ply {
            material: mat,
            angle: entry.angle_deg.to_radians(),
        });
    }
    Stack::new(plies)
}

/// Writes a stack file: identical-ply stacks get one stack-level material,
/// hybrids inline one material per ply.
pub fn save_stack(path: &Path, stack: &Stack) -> Result<()> {
    let identical = stack.is_identical_ply();
    let file = StackFile {
        schema_version: STACK_SCHEMA_VERSION,
        material: identical
            .then(|| MaterialRef::Inline(Box::new(stack.plies()[0].material.clone()))),
        plies: stack
            .plies()
            .iter()
            .map(|p| PlyEntry {
                angle_deg: p.angle.to_degrees(),
                material: (!identical).then(|| MaterialRef::Inline(Box::new(p.material.clone()))),
            })
            .collect(),
        notes: None,
    };
    let text = serde_json::to_string_pretty(&file).expect("stack file serializes");
    fs::write(path, text).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

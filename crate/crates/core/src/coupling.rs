//! Properties of the coupling tensors B and calB.
//!
//! Covers the symmetry conditions for calB = calB^T (the skew tensor
//! H = D B^-1 A - A B^-1 D and the three scalar closed forms C1..C3 for
//! identical plies), the decomposition of calB into an elastic part and a
//! complementary part, rari-constancy, the singularity analysis of B with
//! its polar determinant formula, shape classification, and closed-form
//! compliance evaluators for the special laminate families. The closed
//! forms double as oracles against the numeric block-inverse path.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kelvin::{Tensor4Gen, Tensor4Sym, SQRT2};
use crate::laminate::LaminateTensors;
use crate::polar::{
    self, classify, dist_to_quarter_grid, gen_from_harmonics, sym_from_harmonics, wrap_half,
    wrap_quarter, PolarGeneral, SymmetryClass,
};

/// How the shift angles are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ShiftMode {
    /// Standard: delta = Phi1 differences, Phi = Phi0 - Phi1.
    Phi1,
    /// Square-symmetric layers (R1 = 0 everywhere): Phi = Phi0 and the
    /// deltas are Phi0 differences.
    Phi0,
}

/// Shift angles of A and D with respect to B, plus the three invariant
/// angle differences. Undefined inputs propagate as `None`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShiftAngles {
    pub mode: ShiftMode,
    pub delta_a: Option<f64>,
    pub delta_d: Option<f64>,
    pub phi_a: Option<f64>,
    pub phi_b: Option<f64>,
    pub phi_d: Option<f64>,
}

/// Computes the shift angles from the polar forms of A, B, D.
pub fn shift_angles(lt: &LaminateTensors) -> ShiftAngles {
    let (a, b, d) = (&lt.a_polar, &lt.b_polar, &lt.d_polar);
    if b.phi1_defined {
        ShiftAngles {
            mode: ShiftMode::Phi1,
            delta_a: a.phi1_defined.then(|| wrap_half(a.phi1 - b.phi1)),
            delta_d: d.phi1_defined.then(|| wrap_half(d.phi1 - b.phi1)),
            phi_a: a.angle_invariant(),
            phi_b: b.angle_invariant(),
            phi_d: d.angle_invariant(),
        }
    } else {
        // R1^B = 0: Phi1^B undefined, use the Phi0 angles throughout.
        ShiftAngles {
            mode: ShiftMode::Phi0,
            delta_a: (a.phi0_defined && b.phi0_defined).then(|| wrap_quarter(a.phi0 - b.phi0)),
            delta_d: (d.phi0_defined && b.phi0_defined).then(|| wrap_quarter(d.phi0 - b.phi0)),
            phi_a: a.phi0_defined.then_some(a.phi0),
            phi_b: b.phi0_defined.then_some(b.phi0),
            phi_d: d.phi0_defined.then_some(d.phi0),
        }
    }
}

/// The special laminate families with dedicated symmetry conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpecialCase {
    /// A, B, D ordinarily orthotropic with coinciding axes.
    OrthotropicCoaxial,
    /// A isotropic, D ordinarily orthotropic.
    ExtensionIsoBendingOrtho,
    /// A = D (quasi-homogeneous coupled); the conditions hold identically.
    Qhcl,
    /// R1^A = R1^B = R1^D = 0, hybrid laminate.
    SquareSymmetricHybrid,
    /// R1 = 0 with identical plies: R0^A sin 4 delta_A = R0^D sin 4 delta_D.
    SquareSymmetricIdentical,
    /// R0^A = R0^B = R0^D = 0, hybrid laminate (three conditions).
    R0OrthotropicHybrid,
    /// R0 = 0 with identical plies: R1^A sin 2 delta_A = R1^D sin 2 delta_D.
    R0OrthotropicIdentical,
    /// All of A, B, D isotropic (e.g. a bimetal): calB has a closed form.
    HybridIsotropic,
    /// Square-symmetric identical plies with rari-constant calB:
    /// R0^A cos 4 delta_A + R0^D cos 4 delta_D = 0.
    RariConstantSquareSymmetric,
}

impl SpecialCase {
    pub fn name(&self) -> &'static str {
        match self {
            SpecialCase::OrthotropicCoaxial => "orthotropic-coaxial",
            SpecialCase::ExtensionIsoBendingOrtho => "extension-iso-bending-ortho",
            SpecialCase::Qhcl => "qhcl",
            SpecialCase::SquareSymmetricHybrid => "square-symmetric-hybrid",
            SpecialCase::SquareSymmetricIdentical => "square-symmetric-identical",
            SpecialCase::R0OrthotropicHybrid => "r0-orthotropic-hybrid",
            SpecialCase::R0OrthotropicIdentical => "r0-orthotropic-identical",
            SpecialCase::HybridIsotropic => "hybrid-isotropic",
            SpecialCase::RariConstantSquareSymmetric => "rari-constant-square-symmetric",
        }
    }
}

/// Report of the calB-symmetry analysis.
#[derive(Debug, Clone, Serialize)]
pub struct BSymReport {
    /// ||calB - calB^T||_F / ||calB||_F.
    pub skew_residual: f64,
    /// Whether calB is symmetric within the report tolerance.
    pub symmetric: bool,
    /// (H12, H13, H23) when B is safely invertible.
    pub h_entries: Option<[f64; 3]>,
    /// ||sym(H)||_F / ||D B^-1 A||_F; H must be skew, so this is a
    /// consistency check on the computation itself.
    pub h_sym_residual: Option<f64>,
    /// Reason H was not computed.
    pub h_omitted: Option<String>,
    /// The closed-form conditions C1, C2, C3 for identical-ply laminates.
    pub c_values: Option<[f64; 3]>,
    /// Reason the closed forms were not evaluated.
    pub c_omitted: Option<String>,
    /// First special-case family whose structural preconditions hold.
    pub matched_special_case: Option<SpecialCase>,
    pub tol: f64,
}

/// Parameters of an identical-ply laminate in the frame-free form used by
/// the closed-form conditions.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CInputs {
    pub t0: f64,
    pub t1: f64,
    pub r0a: f64,
    pub r1a: f64,
    pub r0b: f64,
    pub r1b: f64,
    pub r0d: f64,
    pub r1d: f64,
    pub phi_a: f64,
    pub phi_b: f64,
    pub phi_d: f64,
    pub delta_a: f64,
    pub delta_d: f64,
}

impl CInputs {
    pub(crate) fn from_laminate(lt: &LaminateTensors) -> Option<Self> {
        let s = shift_angles(lt);
        let (t0, t1) = lt.layer_isotropic_parts();
        Some(CInputs {
            t0,
            t1,
            r0a: lt.a_polar.r0,
            r1a: lt.a_polar.r1,
            r0b: lt.b_polar.r0,
            r1b: lt.b_polar.r1,
            r0d: lt.d_polar.r0,
            r1d: lt.d_polar.r1,
            // Undefined angles only multiply vanishing moduli in the
            // closed forms, so zero is a safe stand-in.
            phi_a: s.phi_a.unwrap_or(0.0),
            phi_b: s.phi_b?,
            phi_d: s.phi_d.unwrap_or(0.0),
            delta_a: s.delta_a.unwrap_or(0.0),
            delta_d: s.delta_d.unwrap_or(0.0),
        })
    }
}

/// The brace contents of the three closed-form conditions (the printed
/// C values are these divided by R0^B R1^B^2 cos 4 Phi_B and scaled by 2,
/// sqrt 2, sqrt 2 respectively).
pub(crate) fn c_braces(p: &CInputs) -> [f64; 3] {
    let CInputs {
        t0,
        t1,
        r0a,
        r1a,
        r0b,
        r1b,
        r0d,
        r1d,
        phi_a,
        phi_b,
        phi_d,
        delta_a,
        delta_d,
    } = *p;
    let c1 = r0b * r0b * t1 * (r1a * (2.0 * delta_a).cos() - r1d * (2.0 * delta_d).cos())
        + r1b
            * (2.0 * r0a * r1b * r1d * (4.0 * (delta_a + phi_a)).sin() * (2.0 * delta_d).sin()
                + 2.0 * r0b * r1a * r1d * (2.0 * (delta_a - delta_d)).sin() * (4.0 * phi_b).sin()
                - 2.0 * r0d * r1a * r1b * (2.0 * delta_a).sin() * (4.0 * (delta_d + phi_d)).sin()
                + r0b
                    * t1
                    * (r0d * (4.0 * (delta_d + phi_d - phi_b)).cos()
                        - r0a * (4.0 * (delta_a + phi_a - phi_b)).cos()));
    let c2 = (2.0 * r1b * r1b * t0 - r0b * r0b * t1)
        * (r1a * (2.0 * delta_a).sin() - r1d * (2.0 * delta_d).sin())
        - r0b * r0b * r1a * r1d * (2.0 * (delta_a - delta_d)).sin()
        + t0 * r1b
            * r1b
            * (r0a * (4.0 * (delta_a + phi_a)).sin() - r0d * (4.0 * (delta_d + phi_d)).sin())
        + 2.0 * r0a * r1b * r1b * r1d * (2.0 * delta_d).sin() * (4.0 * (delta_a + phi_a)).cos()
        + t0 * r0b
            * r1b
            * (r1a * (2.0 * (delta_a - 2.0 * phi_b)).sin()
                - r1d * (2.0 * (delta_d - 2.0 * phi_b)).sin())
        + 2.0 * r0b * r1a * r1b * r1d * (2.0 * (delta_a - delta_d)).sin() * (4.0 * phi_b).cos()
        + t1 * r0b
            * r1b
            * (r0a * (4.0 * (delta_a + phi_a - phi_b)).sin()
                - r0d * (4.0 * (delta_d + phi_d - phi_b)).sin())
        - r0a * r0d * r1b * r1b * (4.0 * (delta_a - delta_d + phi_a - phi_d)).sin()
        - 2.0 * r0d * r1a * r1b * r1b * (2.0 * delta_a).sin() * (4.0 * (delta_d + phi_d)).cos()
        + r0b
            * r1b
            * (r0d * r1a * (2.0 * (delta_a - 2.0 * (delta_d + phi_d - phi_b))).sin()
                - r0a * r1d * (2.0 * (delta_d - 2.0 * (delta_a + phi_a - phi_b))).sin());
    let c3 = r1a * (2.0 * r1b * r1b * t0 - r0b * r0b * t1) * (2.0 * delta_a).sin()
        + r0b * r0b * r1d * (t1 * (2.0 * delta_d).sin() + r1a * (2.0 * (delta_a - delta_d)).sin())
        - t0 * r1b
            * r1b
            * (2.0 * r1d * (2.0 * delta_d).sin() + r0a * (4.0 * (delta_a + phi_a)).sin())
        + 2.0 * r0a * r1b * r1b * r1d * (2.0 * delta_d).sin() * (4.0 * (delta_a + phi_a)).cos()
        + 2.0 * r0b * r1a * r1b * r1d * (2.0 * (delta_a - delta_d)).sin() * (4.0 * phi_b).cos()
        + t0 * r0b
            * r1b
            * (r1d * (2.0 * (delta_d - 2.0 * phi_b)).sin()
                - r1a * (2.0 * (delta_a - 2.0 * phi_b)).sin())
        + t1 * r0b
            * r1b
            * (r0a * (4.0 * (delta_a + phi_a - phi_b)).sin()
                - r0d * (4.0 * (delta_d + phi_d - phi_b)).sin())
        + r0d
            * r1b
            * r1b
            * (t0 * (4.0 * (delta_d + phi_d)).sin()
                - r0a * (4.0 * (delta_d + phi_d - delta_a - phi_a)).sin())
        - 2.0 * r0d * r1a * r1b * r1b * (2.0 * delta_a).sin() * (4.0 * (delta_d + phi_d)).cos()
        + r0b
            * r1b
            * (r0a * r1d * (2.0 * (delta_d - 2.0 * (delta_a + phi_a - phi_b))).sin()
                - r0d * r1a * (2.0 * (delta_a - 2.0 * (delta_d + phi_d - phi_b))).sin());
    [c1, c2, c3]
}

/// Evaluates C1, C2, C3 with their printed prefactors.
fn c_values(p: &CInputs) -> [f64; 3] {
    let den = p.r0b * p.r1b * p.r1b * (4.0 * p.phi_b).cos();
    let b = c_braces(p);
    [2.0 * b[0] / den, SQRT2 * b[1] / den, SQRT2 * b[2] / den]
}

/// The skew tensor H = D B^-1 A - A B^-1 D.
pub fn h_tensor(lt: &LaminateTensors) -> Result<Tensor4Gen> {
    let b_inv = lt.b.invert()?.to_gen();
    let (a, d) = (lt.a.to_gen(), lt.d.to_gen());
    Ok(d.mul(&b_inv).mul(&a).sub(&a.mul(&b_inv).mul(&d)))
}

/// Checks the structural preconditions of each special case against `lt`.
pub fn case_applies(lt: &LaminateTensors, case: SpecialCase, tol: f64) -> bool {
    let (a, b, d) = (&lt.a_polar, &lt.b_polar, &lt.d_polar);
    let scale = a.scale().max(d.scale()).max(b.scale());
    let zero = |x: f64| x.abs() <= tol * scale;
    let s = shift_angles(lt);
    let on_grid = |x: Option<f64>, step: f64| {
        let v = x.unwrap_or(0.0);
        ((v / step).round() * step - v).abs() <= tol.max(1e-9)
    };
    match case {
        SpecialCase::Qhcl => lt.ad_ratio <= tol && !zero(lt.b.frobenius()),
        SpecialCase::OrthotropicCoaxial => {
            lt.identical_ply
                && matches!(classify(a, tol), SymmetryClass::OrdinaryOrthotropic { .. })
                && matches!(classify(b, tol), SymmetryClass::OrdinaryOrthotropic { .. })
                && matches!(classify(d, tol), SymmetryClass::OrdinaryOrthotropic { .. })
                && on_grid(s.delta_a, std::f64::consts::FRAC_PI_2)
                && on_grid(s.delta_d, std::f64::consts::FRAC_PI_2)
        }
        SpecialCase::ExtensionIsoBendingOrtho => {
            lt.identical_ply
                && classify(a, tol) == SymmetryClass::Isotropic
                && matches!(classify(d, tol), SymmetryClass::OrdinaryOrthotropic { .. })
                && b.phi0_defined
                && b.phi1_defined
        }
        SpecialCase::SquareSymmetricHybrid => zero(a.r1) && zero(b.r1) && zero(d.r1),
        SpecialCase::SquareSymmetricIdentical => {
            lt.identical_ply && zero(a.r1) && zero(b.r1) && zero(d.r1)
        }
        SpecialCase::R0OrthotropicHybrid => zero(a.r0) && zero(b.r0) && zero(d.r0),
        SpecialCase::R0OrthotropicIdentical => {
            lt.identical_ply && zero(a.r0) && zero(b.r0) && zero(d.r0)
        }
        SpecialCase::HybridIsotropic => {
            zero(a.r0) && zero(a.r1) && zero(b.r0) && zero(b.r1) && zero(d.r0) && zero(d.r1)
        }
        SpecialCase::RariConstantSquareSymmetric => {
            case_applies(lt, SpecialCase::SquareSymmetricIdentical, tol)
        }
    }
}

/// Evaluates the symmetry condition residuals of a special case. Residuals
/// are normalized by the magnitude of the participating sides, so values
/// near zero mean the condition holds.
pub fn special_case_bsym(lt: &LaminateTensors, case: SpecialCase, tol: f64) -> Result<Vec<f64>> {
    if !case_applies(lt, case, tol) {
        return Err(Error::CaseNotApplicable {
            case: case.name().to_string(),
            reason: "structural preconditions not met".to_string(),
        });
    }
    let (a, b, d) = (&lt.a_polar, &lt.b_polar, &lt.d_polar);
    let s = shift_angles(lt);
    // Residuals are normalized by the coefficient scale of the condition,
    // not by the sides themselves: both sides of a satisfied condition can
    // vanish together.
    let normalized = |lhs: f64, rhs: f64, scale: f64| {
        if scale == 0.0 {
            0.0
        } else {
            (lhs - rhs) / scale
        }
    };
    match case {
        SpecialCase::Qhcl => Ok(vec![lt.ad_ratio]),
        SpecialCase::OrthotropicCoaxial => {
            let parity = |x: Option<f64>, step: f64| -> f64 {
                let k = (x.unwrap_or(0.0) / step).round() as i64;
                if k.rem_euclid(2) == 0 {
                    1.0
                } else {
                    -1.0
                }
            };
            let ka = parity(s.phi_a, std::f64::consts::FRAC_PI_4);
            let kb = parity(s.phi_b, std::f64::consts::FRAC_PI_4);
            let kd = parity(s.phi_d, std::f64::consts::FRAC_PI_4);
            let ha = parity(s.delta_a, std::f64::consts::FRAC_PI_2);
            let hd = parity(s.delta_d, std::f64::consts::FRAC_PI_2);
            let lhs = (ka * a.r0 - kd * d.r0) * b.r1;
            let rhs = kb * b.r0 * (ha * a.r1 - hd * d.r1);
            let scale = (a.r0 + d.r0) * b.r1 + b.r0 * (a.r1 + d.r1);
            Ok(vec![normalized(lhs, rhs, scale)])
        }
        SpecialCase::ExtensionIsoBendingOrtho => {
            let kd = if (4.0 * s.phi_d.unwrap_or(0.0)).cos() >= 0.0 {
                1.0
            } else {
                -1.0
            };
            let dd = s.delta_d.unwrap_or(0.0);
            let phib = s.phi_b.unwrap_or(0.0);
            let lhs = kd * d.r0 * b.r1 * (4.0 * (dd - phib)).cos();
            let rhs = b.r0 * d.r1 * (2.0 * dd).cos();
            let scale = d.r0 * b.r1 + b.r0 * d.r1;
            Ok(vec![normalized(lhs, rhs, scale)])
        }
        SpecialCase::SquareSymmetricHybrid => {
            let da = s.delta_a.unwrap_or(0.0);
            let dd = s.delta_d.unwrap_or(0.0);
            let lhs = a.r0 * b.r0 * d.t0 * (4.0 * da).sin() - b.r0 * d.r0 * a.t0 * (4.0 * dd).sin();
            let rhs = a.r0 * d.r0 * b.t0 * (4.0 * (da - dd)).sin();
            let scale =
                a.r0 * b.r0 * d.t0.abs() + b.r0 * d.r0 * a.t0.abs() + a.r0 * d.r0 * b.t0.abs();
            Ok(vec![normalized(lhs, rhs, scale)])
        }
        SpecialCase::SquareSymmetricIdentical => {
            let da = s.delta_a.unwrap_or(0.0);
            let dd = s.delta_d.unwrap_or(0.0);
            Ok(vec![normalized(
                a.r0 * (4.0 * da).sin(),
                d.r0 * (4.0 * dd).sin(),
                a.r0 + d.r0,
            )])
        }
        SpecialCase::R0OrthotropicHybrid => {
            let da = s.delta_a.unwrap_or(0.0);
            let dd = s.delta_d.unwrap_or(0.0);
            let (sa, sd, sad) = ((2.0 * da).sin(), (2.0 * dd).sin(), (2.0 * (da - dd)).sin());
            let (ca, cd) = ((2.0 * da).cos(), (2.0 * dd).cos());
            let ka = a.r1 * (b.t0 * d.t1 - d.t0 * b.t1);
            let kd = d.r1 * (a.t0 * b.t1 - b.t0 * a.t1);
            let kb = b.r1 * (a.t0 * d.t1 - d.t0 * a.t1);
            let r1 = normalized(ka * ca + kd * cd, kb, ka.abs() + kd.abs() + kb.abs());
            let pa2 = a.r1
                * (2.0 * b.r1 * b.r1 * d.t0 - b.r1 * b.t0 * d.t0
                    + b.t0 * (b.t0 * d.t1 - d.t0 * b.t1));
            let pd2 = d.r1
                * (b.r1 * a.t0 * b.t0
                    - 2.0 * b.r1 * b.r1 * a.t0
                    - b.t0 * (b.t0 * a.t1 - a.t0 * b.t1));
            let pb2 = a.r1 * d.r1 * b.t0 * (2.0 * b.r1 - b.t0);
            let r2 = normalized(
                pa2 * sa + pd2 * sd,
                pb2 * sad,
                pa2.abs() + pd2.abs() + pb2.abs(),
            );
            let pa3 = a.r1
                * (2.0 * b.r1 * b.r1 * d.t0
                    + b.r1 * b.t0 * d.t0
                    + b.t0 * (b.t0 * d.t1 - d.t0 * b.t1));
            let pd3 = d.r1
                * (b.r1 * a.t0 * b.t0
                    + 2.0 * b.r1 * b.r1 * a.t0
                    + b.t0 * (b.t0 * a.t1 - a.t0 * b.t1));
            let pb3 = a.r1 * d.r1 * b.t0 * (2.0 * b.r1 + b.t0);
            let r3 = normalized(
                pa3 * sa - pd3 * sd,
                pb3 * sad,
                pa3.abs() + pd3.abs() + pb3.abs(),
            );
            Ok(vec![r1, r2, r3])
        }
        SpecialCase::R0OrthotropicIdentical => {
            let da = s.delta_a.unwrap_or(0.0);
            let dd = s.delta_d.unwrap_or(0.0);
            Ok(vec![normalized(
                a.r1 * (2.0 * da).sin(),
                d.r1 * (2.0 * dd).sin(),
                a.r1 + d.r1,
            )])
        }
        SpecialCase::HybridIsotropic => {
            let pred = predict_hybrid_isotropic_calb(lt);
            let norm = pred.frobenius().max(lt.cal_b.frobenius());
            Ok(vec![if norm == 0.0 {
                0.0
            } else {
                lt.cal_b.sub(&pred).frobenius() / norm
            }])
        }
        SpecialCase::RariConstantSquareSymmetric => {
            let da = s.delta_a.unwrap_or(0.0);
            let dd = s.delta_d.unwrap_or(0.0);
            Ok(vec![normalized(
                a.r0 * (4.0 * da).cos(),
                -d.r0 * (4.0 * dd).cos(),
                a.r0 + d.r0,
            )])
        }
    }
}

const MATCH_ORDER: [SpecialCase; 8] = [
    SpecialCase::Qhcl,
    SpecialCase::HybridIsotropic,
    SpecialCase::SquareSymmetricIdentical,
    SpecialCase::SquareSymmetricHybrid,
    SpecialCase::R0OrthotropicIdentical,
    SpecialCase::R0OrthotropicHybrid,
    SpecialCase::OrthotropicCoaxial,
    SpecialCase::ExtensionIsoBendingOrtho,
];

/// Full calB-symmetry report: the direct skew residual, the H entries when
/// B is safely invertible, and the identical-ply closed forms when defined.
pub fn bsym_conditions(lt: &LaminateTensors, tol: f64) -> BSymReport {
    let skew_residual = lt.skew_residual();
    let mut h_entries = None;
    let mut h_sym_residual = None;
    let mut h_omitted = None;
    // Near-singular B (within 10x of the inversion threshold) makes H
    // meaningless; the direct skew residual is still reported.
    if lt.b.near_singular(10.0) {
        h_omitted = Some("B is singular or near singular".to_string());
    } else {
        match h_tensor(lt) {
            Ok(h) => {
                h_entries = Some([h.m[0][1], h.m[0][2], h.m[1][2]]);
                // Normalized by ||D B^-1 A||, not ||H||: H itself vanishes
                // exactly when calB is symmetric.
                match lt.b.invert() {
                    Ok(b_inv) => {
                        let dba = lt.d.to_gen().mul(&b_inv.to_gen()).mul(&lt.a.to_gen());
                        let norm = dba.frobenius();
                        h_sym_residual = Some(if norm == 0.0 {
                            0.0
                        } else {
                            h.sym_part().frobenius() / norm
                        });
                    }
                    Err(e) => h_omitted = Some(e.to_string()),
                }
            }
            Err(e) => h_omitted = Some(e.to_string()),
        }
    }
    let mut c_vals = None;
    let mut c_omitted = None;
    if !lt.identical_ply {
        c_omitted = Some("closed forms require identical plies".to_string());
    } else if let Some(reason) = &h_omitted {
        c_omitted = Some(reason.clone());
    } else {
        match CInputs::from_laminate(lt) {
            Some(p) => {
                let scale = p.t0.max(p.t1);
                if p.r0b <= tol * scale || p.r1b <= tol * scale {
                    c_omitted = Some("R0^B or R1^B vanishes".to_string());
                } else if (4.0 * p.phi_b).cos().abs() <= tol {
                    c_omitted = Some("cos 4 Phi_B vanishes".to_string());
                } else {
                    c_vals = Some(c_values(&p));
                }
            }
            None => c_omitted = Some("Phi_B undefined".to_string()),
        }
    }
    let matched_special_case = MATCH_ORDER
        .into_iter()
        .find(|&case| case_applies(lt, case, tol));
    BSymReport {
        skew_residual,
        symmetric: skew_residual <= tol,
        h_entries,
        h_sym_residual,
        h_omitted,
        c_values: c_vals,
        c_omitted,
        matched_special_case,
        tol,
    }
}

// ---------------------------------------------------------------------------
// Decomposition of calB.
// ---------------------------------------------------------------------------

/// Splits calB into its elastic part (built from the six elastic-type polar
/// parameters t0, t1, r0, r1, phi0, phi1) and the complementary part, which
/// carries only t3, r1, r2 and phi2 - phi1.
pub fn decompose_calb(calb: &Tensor4Gen) -> (Tensor4Sym, Tensor4Gen) {
    let p = polar::from_cartesian_gen(calb);
    let (c0, s0) = p.r0_components();
    let (c1, s1) = p.r1_components();
    let elastic = sym_from_harmonics(p.t0, p.t1, c0, s0, c1, s1, 0.0);
    let complementary = calb.sub(&elastic.to_gen());
    (elastic, complementary)
}

// ---------------------------------------------------------------------------
// Singularity of B.
// ---------------------------------------------------------------------------

/// Which branch of the singularity analysis fired.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SingularityCause {
    /// B square symmetric: R1^B = 0.
    R1BZero,
    /// B R0-orthotropic: R0^B = 0.
    R0BZero,
    /// Phi_B = pi/8 + k pi/4.
    PhiBEighthPi,
    /// Hybrid orthotropic B: T1^B (T0^B + (-1)^k R0^B) = 2 R1^B^2.
    OrthotropicRelation,
    /// Hybrid isotropic B: T0^B T1^B = 0.
    IsotropicProduct,
    None,
}

/// Singularity verdict for B with the polar determinant cross-check.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SingularityVerdict {
    /// det B from the 3x3 matrix.
    pub det_matrix: f64,
    /// 16 [T1^B (T0^B^2 - R0^B^2) - 2 R1^B^2 (T0^B - R0^B cos 4 Phi_B)].
    pub det_polar: f64,
    pub singular: bool,
    pub cause: SingularityCause,
}

/// The polar closed form of det B.
pub fn det_b_polar(b: &crate::polar::PolarElastic) -> f64 {
    let phi = b.angle_invariant().unwrap_or(0.0);
    16.0 * (b.t1 * (b.t0 * b.t0 - b.r0 * b.r0)
        - 2.0 * b.r1 * b.r1 * (b.t0 - b.r0 * (4.0 * phi).cos()))
}

/// Classifies whether and why B is singular.
pub fn singularity(lt: &LaminateTensors, tol: f64) -> SingularityVerdict {
    let b = &lt.b_polar;
    let det_matrix = lt.b.det();
    let det_polar = det_b_polar(b);
    let norm = lt.b.frobenius();
    let singular = det_matrix.abs() <= tol.max(crate::kelvin::SINGULARITY_REL) * norm.powi(3);
    let scale = b.scale().max(f64::MIN_POSITIVE);
    let cause = if !singular {
        SingularityCause::None
    } else if lt.identical_ply {
        if b.r1 <= tol * scale {
            SingularityCause::R1BZero
        } else if b.r0 <= tol * scale {
            SingularityCause::R0BZero
        } else if b
            .angle_invariant()
            .map(|phi| (4.0 * phi).cos().abs() <= 1e-6)
            .unwrap_or(false)
        {
            SingularityCause::PhiBEighthPi
        } else {
            SingularityCause::None
        }
    } else {
        match classify(b, tol) {
            SymmetryClass::Isotropic => SingularityCause::IsotropicProduct,
            SymmetryClass::OrdinaryOrthotropic { k } => {
                let sign = if k == 0 { 1.0 } else { -1.0 };
                let rel = b.t1 * (b.t0 + sign * b.r0) - 2.0 * b.r1 * b.r1;
                if rel.abs() <= 1e-6 * scale * scale {
                    SingularityCause::OrthotropicRelation
                } else {
                    SingularityCause::None
                }
            }
            SymmetryClass::SquareSymmetric => SingularityCause::R1BZero,
            SymmetryClass::R0Orthotropic => SingularityCause::R0BZero,
            SymmetryClass::GeneralAnisotropic => SingularityCause::None,
        }
    };
    SingularityVerdict {
        det_matrix,
        det_polar,
        singular,
        cause,
    }
}

// ---------------------------------------------------------------------------
// Shapes.
// ---------------------------------------------------------------------------

/// How the matrix of a coupling tensor is filled in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BShape {
    /// Only the 16/26 (and 61/62) slots are populated.
    AnglePlyShear,
    /// Only the 11/22 diagonal is populated.
    CrossPlyDiagonal,
    /// Pure 4-theta harmonic: 11 = 22 = -12, 66 = -2*11, 16 = -26.
    SquareSymmetricShape,
    /// Pure 2-theta harmonic: 11 = -22, 12 = 66 = 0, 16 = 26.
    R0OrthoShape,
    Full,
    Zero,
}

/// Shape classification of B and calB with the sharing verdict.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShapeReport {
    pub b_shape: BShape,
    pub calb_shape: BShape,
    pub shapes_match: bool,
}

fn shape_of(m: &Tensor4Gen, scale: f64, tol: f64) -> BShape {
    let norm = m.frobenius();
    if norm <= tol * scale {
        return BShape::Zero;
    }
    let eps = tol.max(1e-12) * norm;
    let e = &m.m;
    let zero = |x: f64| x.abs() <= eps;
    let shear_only =
        zero(e[0][0]) && zero(e[1][1]) && zero(e[0][1]) && zero(e[1][0]) && zero(e[2][2]);
    if shear_only {
        return BShape::AnglePlyShear;
    }
    let diag_only = zero(e[0][1])
        && zero(e[1][0])
        && zero(e[0][2])
        && zero(e[1][2])
        && zero(e[2][0])
        && zero(e[2][1])
        && zero(e[2][2]);
    if diag_only {
        return BShape::CrossPlyDiagonal;
    }
    let square = zero(e[0][0] - e[1][1])
        && zero(e[0][0] + e[0][1])
        && zero(e[0][1] - e[1][0])
        && zero(e[2][2] + 2.0 * e[0][0])
        && zero(e[0][2] + e[1][2])
        && zero(e[2][0] + e[2][1]);
    if square {
        return BShape::SquareSymmetricShape;
    }
    let r0_ortho = zero(e[0][0] + e[1][1])
        && zero(e[0][1])
        && zero(e[1][0])
        && zero(e[2][2])
        && zero(e[0][2] - e[1][2])
        && zero(e[2][0] - e[2][1]);
    if r0_ortho {
        return BShape::R0OrthoShape;
    }
    BShape::Full
}

/// Classifies the shapes of B and calB in the laminate frame.
pub fn shape_classify(lt: &LaminateTensors, tol: f64) -> ShapeReport {
    let b_shape = shape_of(&lt.b.to_gen(), lt.a.frobenius(), tol);
    let calb_shape = shape_of(&lt.cal_b, lt.cal_a.frobenius(), tol);
    ShapeReport {
        b_shape,
        calb_shape,
        shapes_match: b_shape == calb_shape,
    }
}

/// Reconstructs B of an identical-ply laminate from the lamination
/// parameters, the layer moduli and the anisotropy ratio, through the
/// general shape matrix written in the frame aligned with B.
pub fn reconstruct_b_from_xi(lt: &LaminateTensors) -> Result<Tensor4Sym> {
    let (Some(xi), Some(layer)) = (&lt.lamination, &lt.layer_polar) else {
        return Err(Error::NotIdenticalPly);
    };
    // Layer orthotropy parity and reference axis.
    let (reference, parity) = if layer.phi1_defined && layer.phi0_defined {
        let diff = wrap_quarter(layer.phi0 - layer.phi1);
        let (dist, k) = dist_to_quarter_grid(diff);
        if dist > 1e-9 {
            return Err(Error::CaseNotApplicable {
                case: "xi-reconstruction".to_string(),
                reason: "layer is not ordinarily orthotropic".to_string(),
            });
        }
        (layer.phi1, if k == 0 { 1.0 } else { -1.0 })
    } else if layer.phi1_defined {
        // R0 = 0 layer: only the 2-theta harmonic contributes.
        (layer.phi1, 1.0)
    } else if layer.phi0_defined {
        // Square-symmetric layer: only the 4-theta harmonic contributes.
        (layer.phi0, 1.0)
    } else {
        // Isotropic layer: B vanishes identically.
        return Ok(Tensor4Sym::zero());
    };
    // Work in the frame aligned with Phi1^B so the xi8 term drops out; any
    // frame does when R1^B vanishes.
    let alpha = if lt.b_polar.phi1_defined {
        lt.b_polar.phi1
    } else {
        0.0
    };
    let rot4 = num_complex::Complex64::from_polar(1.0, 4.0 * (reference - alpha));
    let rot2 = num_complex::Complex64::from_polar(1.0, 2.0 * (reference - alpha));
    let (x5, x6) = xi.b4();
    let (x7, x8) = xi.b2();
    let four = num_complex::Complex64::new(x5, x6) * rot4;
    let two = num_complex::Complex64::new(x7, x8) * rot2;
    let (xi5, xi6, xi7) = (four.re, four.im, two.re);
    let r0 = layer.r0;
    let r1 = layer.r1;
    if r1 * two.im.abs() > 1e-9 * layer.scale() {
        return Err(Error::CaseNotApplicable {
            case: "xi-reconstruction".to_string(),
            reason: "aligned xi8 does not vanish".to_string(),
        });
    }
    let d11 = parity * r0 * xi5 + 4.0 * r1 * xi7;
    let d22 = parity * r0 * xi5 - 4.0 * r1 * xi7;
    let off = -parity * r0 * xi5;
    let shear = SQRT2 * parity * r0 * xi6;
    let aligned = Tensor4Sym::new(d11, off, shear, d22, -shear, -2.0 * parity * r0 * xi5);
    Ok(aligned.rotate(-alpha))
}

// ---------------------------------------------------------------------------
// Closed-form compliances for the special families.
// ---------------------------------------------------------------------------

/// The special families with closed-form compliance parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ComplianceCase {
    /// Isotropic quasi-homogeneous coupled laminate with R1^B = 0.
    IsoQhclR1B0,
    /// Isotropic quasi-homogeneous coupled laminate with R0^B = 0.
    IsoQhclR0B0,
    /// A isotropic, D and B orthotropic co-axial, R1^B = 0 and
    /// R1^D^2 = T1 R0^D.
    ExtIsoBendOrtho,
    /// Square-symmetric coupled laminate (R1^A = R1^D = 0, co-axial) with
    /// R1^B = 0.
    SquareSymR1B0,
    /// Square-symmetric coupled laminate with R0^B = 0.
    SquareSymR0B0,
    /// All-isotropic hybrid stack (bimetal-like).
    HybridIsotropic,
}

impl ComplianceCase {
    pub const ALL: [ComplianceCase; 6] = [
        ComplianceCase::IsoQhclR1B0,
        ComplianceCase::IsoQhclR0B0,
        ComplianceCase::ExtIsoBendOrtho,
        ComplianceCase::SquareSymR1B0,
        ComplianceCase::SquareSymR0B0,
        ComplianceCase::HybridIsotropic,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ComplianceCase::IsoQhclR1B0 => "iso-qhcl-r1b0",
            ComplianceCase::IsoQhclR0B0 => "iso-qhcl-r0b0",
            ComplianceCase::ExtIsoBendOrtho => "ext-iso-bend-ortho",
            ComplianceCase::SquareSymR1B0 => "square-sym-r1b0",
            ComplianceCase::SquareSymR0B0 => "square-sym-r0b0",
            ComplianceCase::HybridIsotropic => "hybrid-isotropic",
        }
    }
}

/// Predicted compliance tensors from the closed forms of one case.
#[derive(Debug, Clone, Serialize)]
pub struct CompliancePrediction {
    pub case: ComplianceCase,
    pub cal_a: Option<Tensor4Sym>,
    pub cal_b: Tensor4Gen,
    pub cal_d: Option<Tensor4Sym>,
}

fn not_applicable(case: ComplianceCase, reason: &str) -> Error {
    Error::CaseNotApplicable {
        case: case.name().to_string(),
        reason: reason.to_string(),
    }
}

fn predict_hybrid_isotropic_calb(lt: &LaminateTensors) -> Tensor4Gen {
    let (a, b, d) = (&lt.a_polar, &lt.b_polar, &lt.d_polar);
    let t0 = 0.75 * b.t0 / (3.0 * b.t0 * b.t0 - a.t0 * d.t0);
    let t1 = (3.0 / 16.0) * b.t1 / (3.0 * b.t1 * b.t1 - a.t1 * d.t1);
    Tensor4Gen::new([
        [t0 + 2.0 * t1, -t0 + 2.0 * t1, 0.0],
        [-t0 + 2.0 * t1, t0 + 2.0 * t1, 0.0],
        [0.0, 0.0, 2.0 * t0],
    ])
}

/// Evaluates the closed-form compliance prediction for `case`, verifying
/// its hypotheses within `tol` first.
pub fn compliance_special_forms(
    lt: &LaminateTensors,
    case: ComplianceCase,
    tol: f64,
) -> Result<CompliancePrediction> {
    let (a, b, d) = (&lt.a_polar, &lt.b_polar, &lt.d_polar);
    let scale = a.scale().max(d.scale());
    let zero = |x: f64| x.abs() <= tol * scale;
    let (t0, t1) = lt.layer_isotropic_parts();
    match case {
        ComplianceCase::IsoQhclR1B0 => {
            if !lt.identical_ply {
                return Err(not_applicable(case, "requires identical plies"));
            }
            if !(zero(a.r0) && zero(a.r1) && zero(d.r0) && zero(d.r1)) {
                return Err(not_applicable(case, "A and D must be isotropic"));
            }
            if lt.ad_ratio > tol {
                return Err(not_applicable(case, "A and D must coincide"));
            }
            if !zero(b.r1) {
                return Err(not_applicable(case, "R1^B must vanish"));
            }
            if zero(b.r0) {
                return Err(not_applicable(case, "R0^B must be nonzero"));
            }
            let den = 4.0 * (t0 * t0 - 3.0 * b.r0 * b.r0);
            let t0a = t0 / den;
            let t1a = 1.0 / (16.0 * t1);
            let cal_a = sym_from_harmonics(t0a, t1a, 0.0, 0.0, 0.0, 0.0, 0.0);
            // The 4-theta harmonic of calB is a negative multiple of B's:
            // r0^B(compliance) = 3 R0^B / den in modulus, anti-aligned.
            let factor = -3.0 / den;
            let (c0, s0) = b.r0_components();
            let cal_b = gen_from_harmonics(
                0.0,
                0.0,
                0.0,
                factor * c0,
                factor * s0,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
            );
            Ok(CompliancePrediction {
                case,
                cal_a: Some(cal_a),
                cal_b,
                cal_d: Some(cal_a),
            })
        }
        ComplianceCase::IsoQhclR0B0 => {
            if !lt.identical_ply {
                return Err(not_applicable(case, "requires identical plies"));
            }
            if !(zero(a.r0) && zero(a.r1) && zero(d.r0) && zero(d.r1)) {
                return Err(not_applicable(case, "A and D must be isotropic"));
            }
            if lt.ad_ratio > tol {
                return Err(not_applicable(case, "A and D must coincide"));
            }
            if !zero(b.r0) {
                return Err(not_applicable(case, "R0^B must vanish"));
            }
            if zero(b.r1) {
                return Err(not_applicable(case, "R1^B must be nonzero"));
            }
            let den = t0 * t1 - 6.0 * b.r1 * b.r1;
            let t0a = (t0 * t1 - 3.0 * b.r1 * b.r1) / (4.0 * t0 * den);
            let t1a = t0 / (16.0 * den);
            let r0a = 3.0 * b.r1 * b.r1 / (4.0 * t0 * den);
            // The compliance r0 axis follows Phi1^B (even in the sign of
            // R1^B); the 2-theta harmonic of calB anti-aligns with B's.
            let axis = b.phi1;
            let cal_a = sym_from_harmonics(
                t0a,
                t1a,
                r0a * (4.0 * axis).cos(),
                r0a * (4.0 * axis).sin(),
                0.0,
                0.0,
                0.0,
            );
            let factor = -3.0 / (8.0 * den);
            let (c1b, s1b) = b.r1_components();
            let (c1, s1) = (factor * c1b, factor * s1b);
            let cal_b = gen_from_harmonics(0.0, 0.0, 0.0, 0.0, 0.0, c1, s1, c1, s1, 0.0);
            Ok(CompliancePrediction {
                case,
                cal_a: Some(cal_a),
                cal_b,
                cal_d: Some(cal_a),
            })
        }
        ComplianceCase::ExtIsoBendOrtho => {
            if !lt.identical_ply {
                return Err(not_applicable(case, "requires identical plies"));
            }
            if !(zero(a.r0) && zero(a.r1)) {
                return Err(not_applicable(case, "A must be isotropic"));
            }
            if !zero(b.r1) {
                return Err(not_applicable(case, "R1^B must vanish"));
            }
            if zero(b.r0) || zero(d.r0) || zero(d.r1) {
                return Err(not_applicable(case, "R0^B, R0^D, R1^D must be nonzero"));
            }
            // Co-axiality: Phi0^B, Phi0^D aligned with Phi1^D; amplitudes
            // are signed along that axis.
            let axis = d.phi1;
            let r0d = d.r0 * (4.0 * (d.phi0 - axis)).cos();
            let r0b_s = b.r0 * (4.0 * (b.phi0 - axis)).cos();
            if (r0d.abs() - d.r0).abs() > 10.0 * tol * scale
                || (r0b_s.abs() - b.r0).abs() > 10.0 * tol * scale
            {
                return Err(not_applicable(case, "B and D must be co-axial"));
            }
            if r0d <= 0.0 {
                return Err(not_applicable(case, "requires Phi_D = 0 (k_D = 0)"));
            }
            let cond = d.r1 * d.r1 - t1 * r0d;
            if cond.abs() > 100.0 * tol * scale * scale {
                return Err(not_applicable(case, "R1^D^2 = T1 R0^D not met"));
            }
            let den = t0 * t0 - t0 * r0d - 3.0 * b.r0 * b.r0;
            let t0a = (t0 - r0d) / (4.0 * den);
            let t1a = 1.0 / (16.0 * t1);
            let t0d = t0 / (4.0 * den);
            let t1d = (t0 * t0 + t0 * r0d - 3.0 * b.r0 * b.r0) / (16.0 * t1 * den);
            // The 2-theta harmonic of calD anti-aligns with R1^D.
            let r1d = -t0 / (8.0 * den) * (r0d / t1).sqrt();
            let cal_a = sym_from_harmonics(t0a, t1a, 0.0, 0.0, 0.0, 0.0, 0.0);
            let cal_d = sym_from_harmonics(
                t0d,
                t1d,
                0.0,
                0.0,
                r1d * (2.0 * axis).cos(),
                r1d * (2.0 * axis).sin(),
                0.0,
            );
            // calB from the explicit aligned matrix, rotated back.
            let b11 = 3.0 * r0b_s * ((t1 * r0d).sqrt() - t1) / (4.0 * t1 * den);
            let b12 = 3.0 * r0b_s * ((t1 * r0d).sqrt() + t1) / (4.0 * t1 * den);
            let b66 = 3.0 * r0b_s / (2.0 * den);
            let aligned = Tensor4Gen::new([[b11, b12, 0.0], [-b11, -b12, 0.0], [0.0, 0.0, b66]]);
            let cal_b = aligned.rotate(-axis);
            Ok(CompliancePrediction {
                case,
                cal_a: Some(cal_a),
                cal_b,
                cal_d: Some(cal_d),
            })
        }
        ComplianceCase::SquareSymR1B0 => {
            if !lt.identical_ply {
                return Err(not_applicable(case, "requires identical plies"));
            }
            if !(zero(a.r1) && zero(d.r1) && zero(b.r1)) {
                return Err(not_applicable(case, "R1 of A, B, D must vanish"));
            }
            if zero(b.r0) {
                return Err(not_applicable(case, "R0^B must be nonzero"));
            }
            // Signed amplitudes along the common Phi0^B axis.
            let axis = b.phi0;
            let r0a = a.r0 * (4.0 * (a.phi0 - axis)).cos();
            let r0d = d.r0 * (4.0 * (d.phi0 - axis)).cos();
            if (a.phi0_defined && (r0a.abs() - a.r0).abs() > 10.0 * tol * scale)
                || (d.phi0_defined && (r0d.abs() - d.r0).abs() > 10.0 * tol * scale)
            {
                return Err(not_applicable(case, "A, B, D must be co-axial"));
            }
            let mu = (3.0 * b.r0 * b.r0 - (t0 - r0a) * (t0 - r0d))
                * (3.0 * b.r0 * b.r0 - (t0 + r0a) * (t0 + r0d));
            let t0a = t0 * (t0 * t0 - r0d * r0d - 3.0 * b.r0 * b.r0) / (4.0 * mu);
            let t1a = 1.0 / (16.0 * t1);
            // The 4-theta harmonics of the compliances anti-align with the
            // stiffness ones; the isotropic parts keep the printed signs.
            let r0a_c = -(3.0 * b.r0 * b.r0 * r0d + r0a * (t0 * t0 - r0d * r0d)) / (4.0 * mu);
            let t0b = 3.0 * t0 * b.r0 * (r0a + r0d) / (4.0 * mu);
            let r0b_c = -3.0 * b.r0 * (r0a * r0d + t0 * t0 - 3.0 * b.r0 * b.r0) / (4.0 * mu);
            let t0d = t0 * (t0 * t0 - r0a * r0a - 3.0 * b.r0 * b.r0) / (4.0 * mu);
            let t1d = 1.0 / (16.0 * t1);
            let r0d_c = -(3.0 * b.r0 * b.r0 * r0a + r0d * (t0 * t0 - r0a * r0a)) / (4.0 * mu);
            let (s4, c4) = (4.0 * axis).sin_cos();
            let cal_a = sym_from_harmonics(t0a, t1a, r0a_c * c4, r0a_c * s4, 0.0, 0.0, 0.0);
            let cal_d = sym_from_harmonics(t0d, t1d, r0d_c * c4, r0d_c * s4, 0.0, 0.0, 0.0);
            let cal_b = gen_from_harmonics(
                t0b,
                0.0,
                0.0,
                r0b_c * c4,
                r0b_c * s4,
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
            );
            Ok(CompliancePrediction {
                case,
                cal_a: Some(cal_a),
                cal_b,
                cal_d: Some(cal_d),
            })
        }
        ComplianceCase::SquareSymR0B0 => {
            if !lt.identical_ply {
                return Err(not_applicable(case, "requires identical plies"));
            }
            if !(zero(a.r1) && zero(d.r1) && zero(b.r0)) {
                return Err(not_applicable(case, "needs R1^A = R1^D = 0 and R0^B = 0"));
            }
            if zero(b.r1) {
                return Err(not_applicable(case, "R1^B must be nonzero"));
            }
            // Common axis from Phi1^B; A and D amplitudes signed along it.
            let axis = b.phi1;
            let r0a = a.r0 * (4.0 * (a.phi0 - axis)).cos();
            let r0d = d.r0 * (4.0 * (d.phi0 - axis)).cos();
            if (a.phi0_defined && (r0a.abs() - a.r0).abs() > 10.0 * tol * scale)
                || (d.phi0_defined && (r0d.abs() - d.r0).abs() > 10.0 * tol * scale)
            {
                return Err(not_applicable(case, "A, B, D must be co-axial"));
            }
            let den_a = t1 * (t0 + r0a) - 6.0 * b.r1 * b.r1;
            let den_d = t1 * (t0 + r0d) - 6.0 * b.r1 * b.r1;
            let t0a = (t0 * t1 - 3.0 * b.r1 * b.r1) / (4.0 * (t0 - r0a) * den_a);
            let t1a = (t0 + r0d) / (16.0 * den_d);
            // Anisotropic compliance parts anti-align with the stiffness
            // ones; note the isotropic parts cross over (t1^A carries R0^D).
            let r0a_c = -(t1 * r0a - 3.0 * b.r1 * b.r1) / (4.0 * (t0 - r0a) * den_a);
            let r1b = -3.0 * b.r1 / (8.0 * den_a);
            let r2b = -3.0 * b.r1 / (8.0 * den_d);
            let t0d = (t0 * t1 - 3.0 * b.r1 * b.r1) / (4.0 * (t0 - r0d) * den_d);
            let t1d = (t0 + r0a) / (16.0 * den_a);
            let r0d_c = -(t1 * r0d - 3.0 * b.r1 * b.r1) / (4.0 * (t0 - r0d) * den_d);
            let (s4, c4) = (4.0 * axis).sin_cos();
            let (s2, c2) = (2.0 * axis).sin_cos();
            let cal_a = sym_from_harmonics(t0a, t1a, r0a_c * c4, r0a_c * s4, 0.0, 0.0, 0.0);
            let cal_d = sym_from_harmonics(t0d, t1d, r0d_c * c4, r0d_c * s4, 0.0, 0.0, 0.0);
            let cal_b = gen_from_harmonics(
                0.0,
                0.0,
                0.0,
                0.0,
                0.0,
                r1b * c2,
                r1b * s2,
                r2b * c2,
                r2b * s2,
                0.0,
            );
            Ok(CompliancePrediction {
                case,
                cal_a: Some(cal_a),
                cal_b,
                cal_d: Some(cal_d),
            })
        }
        ComplianceCase::HybridIsotropic => {
            let all_iso =
                zero(a.r0) && zero(a.r1) && zero(b.r0) && zero(b.r1) && zero(d.r0) && zero(d.r1);
            if !all_iso {
                return Err(not_applicable(case, "A, B, D must all be isotropic"));
            }
            Ok(CompliancePrediction {
                case,
                cal_a: None,
                cal_b: predict_hybrid_isotropic_calb(lt),
                cal_d: None,
            })
        }
    }
}

/// Rari-constancy residual of calB: |t0^B - t1^B| relative to the parameter
/// scale. Zero means calB is rari-constant.
pub fn calb_rari_residual(p: &PolarGeneral) -> f64 {
    let scale = p.scale().max(f64::MIN_POSITIVE);
    (p.t0 - p.t1).abs() / scale
}

#[cfg(test)]
mod tests;

//! Polar representation of plane elastic-type tensors.
//!
//! A symmetric tensor is parameterized by two isotropy moduli (T0, T1), two
//! anisotropy moduli (R0, R1 >= 0) and two angles (Phi0, Phi1); the moduli
//! and the angle difference Phi0 - Phi1 are invariants, and every elastic
//! symmetry corresponds to a special invariant value. The non-symmetric
//! compliance coupling tensor needs three extra parameters (t3, r2, phi2).

use serde::{Deserialize, Serialize};

use crate::kelvin::{Tensor4Gen, Tensor4Sym, SQRT2};

/// Default classification tolerance, relative to the tensor scale.
pub const DEFAULT_TOL: f64 = 1e-8;

const PI: f64 = std::f64::consts::PI;

/// Reduce an angle to (-pi/4, pi/4] (the canonical range of a 4-theta term).
pub fn wrap_quarter(x: f64) -> f64 {
    let mut y = x.rem_euclid(PI / 2.0);
    if y > PI / 4.0 {
        y -= PI / 2.0;
    }
    // rem_euclid can land exactly on -pi/4 through roundoff
    if y <= -PI / 4.0 {
        y += PI / 2.0;
    }
    y
}

/// Reduce an angle to (-pi/2, pi/2] (the canonical range of a 2-theta term).
pub fn wrap_half(x: f64) -> f64 {
    let mut y = x.rem_euclid(PI);
    if y > PI / 2.0 {
        y -= PI;
    }
    if y <= -PI / 2.0 {
        y += PI;
    }
    y
}

/// Distance from `x` to the nearest multiple of pi/4, together with the
/// parity (0 for even multiples, 1 for odd) of that nearest multiple.
pub fn dist_to_quarter_grid(x: f64) -> (f64, u8) {
    let k = (x / (PI / 4.0)).round();
    let dist = (x - k * PI / 4.0).abs();
    let parity = (k as i64).rem_euclid(2) as u8;
    (dist, parity)
}

/// Polar parameters of a symmetric elastic-type tensor.
///
/// `r0`, `r1` are moduli of complex numbers and therefore non-negative; the
/// angles are stored in canonical ranges, and an angle whose modulus vanishes
/// is stored as 0 with its defined-flag cleared. The isotropy parts `t0`,
/// `t1` may be negative for coupling tensors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarElastic {
    pub t0: f64,
    pub t1: f64,
    pub r0: f64,
    pub r1: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub phi0_defined: bool,
    pub phi1_defined: bool,
}

impl PolarElastic {
    /// Builds from signed harmonic components: `c0 + i s0 = r0 e^{4 i phi0}`
    /// and `c1 + i s1 = r1 e^{2 i phi1}`.
    pub fn from_components(t0: f64, t1: f64, c0: f64, s0: f64, c1: f64, s1: f64) -> Self {
        let scale = [t0.abs(), t1.abs(), c0.hypot(s0), c1.hypot(s1)]
            .into_iter()
            .fold(0.0f64, f64::max);
        let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let r0 = c0.hypot(s0);
        let r1 = c1.hypot(s1);
        let phi0_defined = r0 > eps;
        let phi1_defined = r1 > eps;
        PolarElastic {
            t0,
            t1,
            r0,
            r1,
            phi0: if phi0_defined {
                wrap_quarter(s0.atan2(c0) / 4.0)
            } else {
                0.0
            },
            phi1: if phi1_defined {
                wrap_half(s1.atan2(c1) / 2.0)
            } else {
                0.0
            },
            phi0_defined,
            phi1_defined,
        }
    }

    pub fn isotropic(t0: f64, t1: f64) -> Self {
        Self::from_components(t0, t1, 0.0, 0.0, 0.0, 0.0)
    }

    /// `r0 e^{4 i phi0}` as (real, imag).
    pub fn r0_components(&self) -> (f64, f64) {
        (
            self.r0 * (4.0 * self.phi0).cos(),
            self.r0 * (4.0 * self.phi0).sin(),
        )
    }

    /// `r1 e^{2 i phi1}` as (real, imag).
    pub fn r1_components(&self) -> (f64, f64) {
        (
            self.r1 * (2.0 * self.phi1).cos(),
            self.r1 * (2.0 * self.phi1).sin(),
        )
    }

    /// The invariant angle difference Phi0 - Phi1, reduced to (-pi/4, pi/4].
    /// None when either angle is undefined.
    pub fn angle_invariant(&self) -> Option<f64> {
        (self.phi0_defined && self.phi1_defined).then(|| wrap_quarter(self.phi0 - self.phi1))
    }

    /// Scale by which classification tolerances are measured.
    pub fn scale(&self) -> f64 {
        [self.t0.abs(), self.t1.abs(), self.r0, self.r1]
            .into_iter()
            .fold(0.0f64, f64::max)
    }
}

/// Polar parameters of a general (non-symmetric) plane tensor: the six
/// elastic-type parameters plus `t3`, `r2`, `phi2`. A symmetric tensor
/// reduces to `t3 = 0`, `r2 = r1`, `phi2 = phi1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolarGeneral {
    pub t0: f64,
    pub t1: f64,
    pub t3: f64,
    pub r0: f64,
    pub r1: f64,
    pub r2: f64,
    pub phi0: f64,
    pub phi1: f64,
    pub phi2: f64,
    pub phi0_defined: bool,
    pub phi1_defined: bool,
    pub phi2_defined: bool,
}

impl PolarGeneral {
    /// Builds from signed harmonic components; see
    /// [`PolarElastic::from_components`].
    #[allow(clippy::too_many_arguments)]
    pub fn from_components(
        t0: f64,
        t1: f64,
        t3: f64,
        c0: f64,
        s0: f64,
        c1: f64,
        s1: f64,
        c2: f64,
        s2: f64,
    ) -> Self {
        let scale = [
            t0.abs(),
            t1.abs(),
            t3.abs(),
            c0.hypot(s0),
            c1.hypot(s1),
            c2.hypot(s2),
        ]
        .into_iter()
        .fold(0.0f64, f64::max);
        let eps = 1e-12 * scale.max(f64::MIN_POSITIVE);
        let r0 = c0.hypot(s0);
        let r1 = c1.hypot(s1);
        let r2 = c2.hypot(s2);
        let phi0_defined = r0 > eps;
        let phi1_defined = r1 > eps;
        let phi2_defined = r2 > eps;
        PolarGeneral {
            t0,
            t1,
            t3,
            r0,
            r1,
            r2,
            phi0: if phi0_defined {
                wrap_quarter(s0.atan2(c0) / 4.0)
            } else {
                0.0
            },
            phi1: if phi1_defined {
                wrap_half(s1.atan2(c1) / 2.0)
            } else {
                0.0
            },
            phi2: if phi2_defined {
                wrap_half(s2.atan2(c2) / 2.0)
            } else {
                0.0
            },
            phi0_defined,
            phi1_defined,
            phi2_defined,
        }
    }

    pub fn r0_components(&self) -> (f64, f64) {
        (
            self.r0 * (4.0 * self.phi0).cos(),
            self.r0 * (4.0 * self.phi0).sin(),
        )
    }

    pub fn r1_components(&self) -> (f64, f64) {
        (
            self.r1 * (2.0 * self.phi1).cos(),
            self.r1 * (2.0 * self.phi1).sin(),
        )
    }

    pub fn r2_components(&self) -> (f64, f64) {
        (
            self.r2 * (2.0 * self.phi2).cos(),
            self.r2 * (2.0 * self.phi2).sin(),
        )
    }

    pub fn scale(&self) -> f64 {
        [
            self.t0.abs(),
            self.t1.abs(),
            self.t3.abs(),
            self.r0,
            self.r1,
            self.r2,
        ]
        .into_iter()
        .fold(0.0f64, f64::max)
    }

    /// Whether the parameters satisfy the symmetric-tensor reduction within
    /// `tol` (relative to the parameter scale).
    pub fn is_symmetric_reduction(&self, tol: f64) -> bool {
        let eps = tol * self.scale().max(f64::MIN_POSITIVE);
        let (c1, s1) = self.r1_components();
        let (c2, s2) = self.r2_components();
        self.t3.abs() <= eps && (c1 - c2).abs() <= eps && (s1 - s2).abs() <= eps
    }
}

/// The elastic symmetry classes of the polar dictionary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SymmetryClass {
    GeneralAnisotropic,
    /// Phi0 - Phi1 = k pi/4 with k in {0, 1}.
    OrdinaryOrthotropic {
        k: u8,
    },
    /// R0 = 0.
    R0Orthotropic,
    /// R1 = 0.
    SquareSymmetric,
    /// R0 = R1 = 0.
    Isotropic,
}

impl std::fmt::Display for SymmetryClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SymmetryClass::GeneralAnisotropic => write!(f, "general anisotropic"),
            SymmetryClass::OrdinaryOrthotropic { k } => write!(f, "ordinarily orthotropic (k={k})"),
            SymmetryClass::R0Orthotropic => write!(f, "R0-orthotropic"),
            SymmetryClass::SquareSymmetric => write!(f, "square symmetric"),
            SymmetryClass::Isotropic => write!(f, "isotropic"),
        }
    }
}

/// Extracts polar parameters from a symmetric Kelvin matrix by inverting the
/// six directional component formulas at theta = 0.
pub fn from_cartesian_sym(t: &Tensor4Sym) -> PolarElastic {
    let t0 = (t.m11 + t.m22 - 2.0 * t.m12 + 2.0 * t.m66) / 8.0;
    let t1 = (t.m11 + t.m22 + 2.0 * t.m12) / 8.0;
    let c0 = (t.m11 + t.m22 - 2.0 * t.m12 - 2.0 * t.m66) / 8.0;
    let s0 = (t.m16 - t.m26) / (2.0 * SQRT2);
    let c1 = (t.m11 - t.m22) / 8.0;
    let s1 = (t.m16 + t.m26) / (4.0 * SQRT2);
    PolarElastic::from_components(t0, t1, c0, s0, c1, s1)
}

/// Evaluates the six directional component formulas at direction `theta`.
pub fn to_cartesian_sym(p: &PolarElastic, theta: f64) -> Tensor4Sym {
    let (c0, s0) = p.r0_components();
    let (c1, s1) = p.r1_components();
    sym_from_harmonics(p.t0, p.t1, c0, s0, c1, s1, theta)
}

/// Assembles a symmetric Kelvin matrix from signed harmonic components,
/// evaluated at direction `theta`.
pub fn sym_from_harmonics(
    t0: f64,
    t1: f64,
    c0: f64,
    s0: f64,
    c1: f64,
    s1: f64,
    theta: f64,
) -> Tensor4Sym {
    // r0 cos 4(phi0 - theta) etc., expanded on the stored components.
    let (s4, c4) = (4.0 * theta).sin_cos();
    let (s2, c2) = (2.0 * theta).sin_cos();
    let c0t = c0 * c4 + s0 * s4;
    let s0t = s0 * c4 - c0 * s4;
    let c1t = c1 * c2 + s1 * s2;
    let s1t = s1 * c2 - c1 * s2;
    Tensor4Sym::new(
        t0 + 2.0 * t1 + c0t + 4.0 * c1t,
        -t0 + 2.0 * t1 - c0t,
        SQRT2 * (s0t + 2.0 * s1t),
        t0 + 2.0 * t1 + c0t - 4.0 * c1t,
        SQRT2 * (-s0t + 2.0 * s1t),
        2.0 * (t0 - c0t),
    )
}

/// Extracts the nine polar parameters of a general Kelvin matrix by solving
/// the component relations at theta = 0.
pub fn from_cartesian_gen(t: &Tensor4Gen) -> PolarGeneral {
    let m = &t.m;
    let t1 = (m[0][0] + m[1][1] + m[0][1] + m[1][0]) / 8.0;
    let t0 = (m[0][0] + m[1][1] - m[0][1] - m[1][0]) / 8.0 + m[2][2] / 4.0;
    let c0 = (m[0][0] + m[1][1] - m[0][1] - m[1][0]) / 8.0 - m[2][2] / 4.0;
    let s0 = (m[0][2] - m[1][2] + m[2][0] - m[2][1]) / (4.0 * SQRT2);
    let t3 = (m[2][0] - m[2][1] - m[0][2] + m[1][2]) / (4.0 * SQRT2);
    let c1 = (m[0][0] - m[1][1] + m[0][1] - m[1][0]) / 8.0;
    let s1 = (m[2][0] + m[2][1]) / (4.0 * SQRT2);
    let c2 = (m[0][0] - m[1][1] - m[0][1] + m[1][0]) / 8.0;
    let s2 = (m[0][2] + m[1][2]) / (4.0 * SQRT2);
    PolarGeneral::from_components(t0, t1, t3, c0, s0, c1, s1, c2, s2)
}

/// Evaluates the nine-parameter component formulas at direction `theta`.
pub fn to_cartesian_gen(p: &PolarGeneral, theta: f64) -> Tensor4Gen {
    let (c0, s0) = p.r0_components();
    let (c1, s1) = p.r1_components();
    let (c2, s2) = p.r2_components();
    gen_from_harmonics(p.t0, p.t1, p.t3, c0, s0, c1, s1, c2, s2, theta)
}

/// Assembles a general Kelvin matrix from signed harmonic components at
/// direction `theta`. The r1 pair fills the first two columns, the r2 pair
/// the first two rows; they coincide for a symmetric tensor.
#[allow(clippy::too_many_arguments)]
pub fn gen_from_harmonics(
    t0: f64,
    t1: f64,
    t3: f64,
    c0: f64,
    s0: f64,
    c1: f64,
    s1: f64,
    c2: f64,
    s2: f64,
    theta: f64,
) -> Tensor4Gen {
    let (s4, c4) = (4.0 * theta).sin_cos();
    let (s2t, c2t) = (2.0 * theta).sin_cos();
    let c0t = c0 * c4 + s0 * s4;
    let s0t = s0 * c4 - c0 * s4;
    let c1t = c1 * c2t + s1 * s2t;
    let s1t = s1 * c2t - c1 * s2t;
    let c2p = c2 * c2t + s2 * s2t;
    let s2p = s2 * c2t - c2 * s2t;
    Tensor4Gen::new([
        [
            t0 + 2.0 * t1 + c0t + 2.0 * c1t + 2.0 * c2p,
            -t0 + 2.0 * t1 - c0t + 2.0 * c1t - 2.0 * c2p,
            SQRT2 * (-t3 + s0t + 2.0 * s2p),
        ],
        [
            -t0 + 2.0 * t1 - c0t - 2.0 * c1t + 2.0 * c2p,
            t0 + 2.0 * t1 + c0t - 2.0 * c1t - 2.0 * c2p,
            SQRT2 * (t3 - s0t + 2.0 * s2p),
        ],
        [
            SQRT2 * (t3 + s0t + 2.0 * s1t),
            SQRT2 * (-t3 - s0t + 2.0 * s1t),
            2.0 * (t0 - c0t),
        ],
    ])
}

/// Picks the most specific symmetry class holding within `tol` (relative to
/// the parameter scale): isotropy, then the special orthotropies, then
/// ordinary orthotropy.
pub fn classify(p: &PolarElastic, tol: f64) -> SymmetryClass {
    let eps = tol * p.scale().max(f64::MIN_POSITIVE);
    let r0_zero = p.r0 <= eps;
    let r1_zero = p.r1 <= eps;
    if r0_zero && r1_zero {
        return SymmetryClass::Isotropic;
    }
    if r0_zero {
        return SymmetryClass::R0Orthotropic;
    }
    if r1_zero {
        return SymmetryClass::SquareSymmetric;
    }
    if let Some(diff) = p.angle_invariant() {
        let (dist, k) = dist_to_quarter_grid(diff);
        if dist <= tol.max(1e-12) {
            return SymmetryClass::OrdinaryOrthotropic { k };
        }
    }
    SymmetryClass::GeneralAnisotropic
}

/// Which bound set applies to a tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundsKind {
    /// All four polar bounds (positive-definite elasticity).
    StiffnessPositiveDefinite,
    /// Only R0 >= 0 and R1 >= 0; the coupling tensors define no quadratic
    /// form, so the first two bounds do not apply.
    Coupling,
}

/// One violated admissibility bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BoundViolation {
    /// T0 - R0 must be positive.
    T0MinusR0 {
        value: f64,
    },
    /// T1 (T0^2 - R0^2) - 2 R1^2 [T0 - R0 cos 4(Phi0 - Phi1)] must be
    /// positive.
    SecondOrderBound {
        value: f64,
    },
    R0Negative {
        value: f64,
    },
    R1Negative {
        value: f64,
    },
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsReport {
    pub kind: BoundsKind,
    pub violations: Vec<BoundViolation>,
}

impl BoundsReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks the polar admissibility bounds for `p`.
pub fn bounds_check(p: &PolarElastic, kind: BoundsKind) -> BoundsReport {
    let mut violations = Vec::new();
    if p.r0 < 0.0 {
        violations.push(BoundViolation::R0Negative { value: p.r0 });
    }
    if p.r1 < 0.0 {
        violations.push(BoundViolation::R1Negative { value: p.r1 });
    }
    if kind == BoundsKind::StiffnessPositiveDefinite {
        let first = p.t0 - p.r0;
        if first <= 0.0 {
            violations.push(BoundViolation::T0MinusR0 { value: first });
        }
        // With an undefined angle the corresponding modulus vanishes, so the
        // cosine factor is irrelevant.
        let dphi = p.phi0 - p.phi1;
        let second = p.t1 * (p.t0 * p.t0 - p.r0 * p.r0)
            - 2.0 * p.r1 * p.r1 * (p.t0 - p.r0 * (4.0 * dphi).cos());
        if second <= 0.0 {
            violations.push(BoundViolation::SecondOrderBound { value: second });
        }
    }
    BoundsReport { kind, violations }
}

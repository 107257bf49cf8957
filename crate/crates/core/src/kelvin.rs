//! Kelvin-notation algebra for plane fourth-rank tensors.
//!
//! Plane symmetric second-rank tensors are stored as 3-vectors with the
//! shear slot scaled by sqrt(2); fourth-rank elasticity-type tensors become
//! 3x3 matrices with sqrt(2) on the 16/26 entries and 2 on the 66 entry.
//! With this scaling the frame-rotation operator is orthogonal, so rotation
//! preserves determinants and Frobenius norms exactly.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Relative singularity threshold: |det m| < SINGULARITY_REL * ||m||_F^3.
pub const SINGULARITY_REL: f64 = 1e-9;

fn assert_finite(label: &str, values: &[f64]) {
    for v in values {
        assert!(v.is_finite(), "{label}: non-finite component {v}");
    }
}

/// Kelvin 3-vector for plane symmetric second-rank tensors (N, M, strain,
/// curvature). The shear slot is `c6 = sqrt(2) * t12`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec3K {
    pub c1: f64,
    pub c2: f64,
    pub c6: f64,
}

impl Vec3K {
    pub fn new(c1: f64, c2: f64, c6: f64) -> Self {
        assert_finite("Vec3K", &[c1, c2, c6]);
        Self { c1, c2, c6 }
    }

    pub fn zero() -> Self {
        Self {
            c1: 0.0,
            c2: 0.0,
            c6: 0.0,
        }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.c1, self.c2, self.c6]
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            c1: s * self.c1,
            c2: s * self.c2,
            c6: s * self.c6,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            c1: self.c1 + other.c1,
            c2: self.c2 + other.c2,
            c6: self.c6 + other.c6,
        }
    }

    pub fn norm(&self) -> f64 {
        (self.c1 * self.c1 + self.c2 * self.c2 + self.c6 * self.c6).sqrt()
    }

    /// Components in the frame rotated by `theta`.
    pub fn rotate(&self, theta: f64) -> Self {
        let r = rotation_operator(theta);
        let v = self.as_array();
        let mut out = [0.0; 3];
        for (i, row) in r.iter().enumerate() {
            out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
        }
        Self {
            c1: out[0],
            c2: out[1],
            c6: out[2],
        }
    }
}

/// The orthogonal Kelvin rotation operator for a frame rotation by `theta`.
pub fn rotation_operator(theta: f64) -> [[f64; 3]; 3] {
    let (s, c) = theta.sin_cos();
    let (c2, s2, cs) = (c * c, s * s, c * s);
    [
        [c2, s2, SQRT2 * cs],
        [s2, c2, -SQRT2 * cs],
        [-SQRT2 * cs, SQRT2 * cs, c2 - s2],
    ]
}

fn mat_mul(a: &[[f64; 3]; 3], b: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
        }
    }
    out
}

fn mat_transpose(a: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = a[j][i];
        }
    }
    out
}

fn mat_det(m: &[[f64; 3]; 3]) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn mat_frobenius(m: &[[f64; 3]; 3]) -> f64 {
    m.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
}

/// Symmetric elasticity-type tensor in Kelvin notation (A, B, D, Q and the
/// symmetric compliances). Only the six independent entries are stored, so
/// symmetry holds by construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor4Sym {
    pub m11: f64,
    pub m12: f64,
    pub m16: f64,
    pub m22: f64,
    pub m26: f64,
    pub m66: f64,
}

impl Tensor4Sym {
    pub fn new(m11: f64, m12: f64, m16: f64, m22: f64, m26: f64, m66: f64) -> Self {
        assert_finite("Tensor4Sym", &[m11, m12, m16, m22, m26, m66]);
        Self {
            m11,
            m12,
            m16,
            m22,
            m26,
            m66,
        }
    }

    pub fn zero() -> Self {
        Self::new(0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn identity() -> Self {
        Self::new(1.0, 0.0, 0.0, 1.0, 0.0, 1.0)
    }

    pub fn diag(d1: f64, d2: f64, d3: f64) -> Self {
        Self::new(d1, 0.0, 0.0, d2, 0.0, d3)
    }

    pub fn to_mat(&self) -> [[f64; 3]; 3] {
        [
            [self.m11, self.m12, self.m16],
            [self.m12, self.m22, self.m26],
            [self.m16, self.m26, self.m66],
        ]
    }

    /// Builds from a full 3x3 matrix, averaging the off-diagonal pairs.
    /// Intended for products that are symmetric up to roundoff.
    pub fn from_mat_symmetrized(m: &[[f64; 3]; 3]) -> Self {
        Self::new(
            m[0][0],
            0.5 * (m[0][1] + m[1][0]),
            0.5 * (m[0][2] + m[2][0]),
            m[1][1],
            0.5 * (m[1][2] + m[2][1]),
            m[2][2],
        )
    }

    pub fn to_gen(&self) -> Tensor4Gen {
        Tensor4Gen { m: self.to_mat() }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::new(
            s * self.m11,
            s * self.m12,
            s * self.m16,
            s * self.m22,
            s * self.m26,
            s * self.m66,
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(
            self.m11 + o.m11,
            self.m12 + o.m12,
            self.m16 + o.m16,
            self.m22 + o.m22,
            self.m26 + o.m26,
            self.m66 + o.m66,
        )
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn det(&self) -> f64 {
        mat_det(&self.to_mat())
    }

    pub fn frobenius(&self) -> f64 {
        mat_frobenius(&self.to_mat())
    }

    /// Components in the frame rotated by `theta`. For a tensor with polar
    /// moduli (T0, T1, R0, R1, Phi0, Phi1) this shifts both polar angles by
    /// `-theta`, matching the directional component formulas.
    pub fn rotate(&self, theta: f64) -> Self {
        let r = rotation_operator(theta);
        let m = mat_mul(&mat_mul(&r, &self.to_mat()), &mat_transpose(&r));
        Self::from_mat_symmetrized(&m)
    }

    /// Closed-form adjugate inverse. Fails when |det| is below the
    /// scale-invariant singularity threshold; B is legitimately singular for
    /// several laminate families, so callers must handle this.
    pub fn invert(&self) -> Result<Tensor4Sym> {
        let m = self.to_mat();
        let det = mat_det(&m);
        let threshold = SINGULARITY_REL * mat_frobenius(&m).powi(3);
        if det.abs() <= threshold {
            return Err(Error::SingularMatrix { det, threshold });
        }
        // Adjugate of a symmetric matrix is symmetric.
        let c11 = m[1][1] * m[2][2] - m[1][2] * m[2][1];
        let c12 = -(m[0][1] * m[2][2] - m[0][2] * m[2][1]);
        let c13 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
        let c22 = m[0][0] * m[2][2] - m[0][2] * m[2][0];
        let c23 = -(m[0][0] * m[1][2] - m[0][2] * m[1][0]);
        let c33 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        Ok(Tensor4Sym::new(
            c11 / det,
            c12 / det,
            c13 / det,
            c22 / det,
            c23 / det,
            c33 / det,
        ))
    }

    /// Whether the matrix is near singular: |det| within `factor` times the
    /// singularity threshold.
    pub fn near_singular(&self, factor: f64) -> bool {
        let m = self.to_mat();
        self.det().abs() <= factor * SINGULARITY_REL * mat_frobenius(&m).powi(3)
    }

    /// Positive definiteness via leading principal minors.
    pub fn is_positive_definite(&self) -> bool {
        self.m11 > 0.0 && (self.m11 * self.m22 - self.m12 * self.m12) > 0.0 && self.det() > 0.0
    }

    /// Matrix-vector product on a Kelvin 3-vector.
    pub fn apply(&self, v: &Vec3K) -> Vec3K {
        let m = self.to_mat();
        let x = v.as_array();
        Vec3K::new(
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        )
    }
}

/// General (not necessarily symmetric) Kelvin 3x3 tensor; houses the
/// compliance coupling tensor, which generally lacks the major symmetries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tensor4Gen {
    pub m: [[f64; 3]; 3],
}

impl Tensor4Gen {
    pub fn new(m: [[f64; 3]; 3]) -> Self {
        for row in &m {
            assert_finite("Tensor4Gen", row);
        }
        Self { m }
    }

    pub fn zero() -> Self {
        Self { m: [[0.0; 3]; 3] }
    }

    pub fn transpose(&self) -> Self {
        Self {
            m: mat_transpose(&self.m),
        }
    }

    pub fn det(&self) -> f64 {
        mat_det(&self.m)
    }

    pub fn frobenius(&self) -> f64 {
        mat_frobenius(&self.m)
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = self.m;
        for row in &mut m {
            for x in row {
                *x *= s;
            }
        }
        Self { m }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut m = self.m;
        for (row, orow) in m.iter_mut().zip(&o.m) {
            for (x, y) in row.iter_mut().zip(orow) {
                *x += y;
            }
        }
        Self { m }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.scale(-1.0))
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self {
            m: mat_mul(&self.m, &o.m),
        }
    }

    /// Symmetric part (m + m^T) / 2.
    pub fn sym_part(&self) -> Tensor4Sym {
        Tensor4Sym::from_mat_symmetrized(&self.m)
    }

    /// Frobenius norm of the skew part (m - m^T) / 2; zero for symmetric
    /// input.
    pub fn skew_norm(&self) -> f64 {
        let m = &self.m;
        let a = 0.5 * (m[0][1] - m[1][0]);
        let b = 0.5 * (m[0][2] - m[2][0]);
        let c = 0.5 * (m[1][2] - m[2][1]);
        (2.0 * (a * a + b * b + c * c)).sqrt()
    }

    pub fn rotate(&self, theta: f64) -> Self {
        let r = rotation_operator(theta);
        Self {
            m: mat_mul(&mat_mul(&r, &self.m), &mat_transpose(&r)),
        }
    }

    pub fn apply(&self, v: &Vec3K) -> Vec3K {
        let m = &self.m;
        let x = v.as_array();
        Vec3K::new(
            m[0][0] * x[0] + m[0][1] * x[1] + m[0][2] * x[2],
            m[1][0] * x[0] + m[1][1] * x[1] + m[1][2] * x[2],
            m[2][0] * x[0] + m[2][1] * x[1] + m[2][2] * x[2],
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn t300_q() -> Tensor4Sym {
        // T300-5208 reduced stiffness from technical constants, GPa.
        let (e1, e2, g12, nu12) = (181.0, 10.30, 7.17, 0.28);
        let nu21 = nu12 * e2 / e1;
        let den = 1.0 - nu12 * nu21;
        Tensor4Sym::new(e1 / den, nu12 * e2 / den, 0.0, e2 / den, 0.0, 2.0 * g12)
    }

    #[test]
    fn rotate_identity_is_identity() {
        for theta in [0.0, 0.3, 1.2, std::f64::consts::PI] {
            let r = Tensor4Sym::identity().rotate(theta);
            let d = r.sub(&Tensor4Sym::identity()).frobenius();
            assert!(d < 1e-14, "theta={theta}, d={d}");
        }
    }

    #[test]
    fn rotate_by_pi_is_identity_map() {
        let q = t300_q();
        let r = q.rotate(std::f64::consts::PI);
        assert!(r.sub(&q).frobenius() < 1e-12 * q.frobenius());
    }

    #[test]
    fn rotate_zero_is_noop() {
        let q = t300_q();
        let r = q.rotate(0.0);
        assert_eq!(q, r);
    }

    #[test]
    fn rotate_matches_polar_component_formula() {
        // Q11 at direction theta must equal
        // T0 + 2 T1 + R0 cos 4(Phi0 - theta) + 4 R1 cos 2(Phi1 - theta),
        // with the moduli extracted from the matrix itself (Phi0 = Phi1 = 0
        // for this ply).
        let q = t300_q();
        let t0 = (q.m11 + q.m22 - 2.0 * q.m12 + 2.0 * q.m66) / 8.0;
        let t1 = (q.m11 + q.m22 + 2.0 * q.m12) / 8.0;
        let r0 = (q.m11 + q.m22 - 2.0 * q.m12 - 2.0 * q.m66) / 8.0;
        let r1 = (q.m11 - q.m22) / 8.0;
        let theta = std::f64::consts::PI / 3.0;
        let expect = t0 + 2.0 * t1 + r0 * (4.0 * theta).cos() + 4.0 * r1 * (2.0 * theta).cos();
        let got = q.rotate(theta).m11;
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn invert_identity() {
        let inv = Tensor4Sym::identity().invert().unwrap();
        assert!(inv.sub(&Tensor4Sym::identity()).frobenius() < 1e-15);
    }

    #[test]
    fn invert_diagonal() {
        let inv = Tensor4Sym::diag(2.0, 4.0, 8.0).invert().unwrap();
        let expect = Tensor4Sym::diag(0.5, 0.25, 0.125);
        assert!(inv.sub(&expect).frobenius() < 1e-15);
    }

    #[test]
    fn invert_residual() {
        let q = t300_q();
        let prod = q.to_gen().mul(&q.invert().unwrap().to_gen());
        let res = prod.sub(&Tensor4Sym::identity().to_gen()).frobenius();
        assert!(res < 1e-12, "residual {res}");
    }

    #[test]
    fn invert_singular_rejected() {
        let singular = Tensor4Sym::new(1.0, 1.0, 0.0, 1.0, 0.0, 0.0);
        match singular.invert() {
            Err(Error::SingularMatrix { det, threshold }) => {
                assert!(det.abs() <= threshold);
            }
            other => panic!("expected SingularMatrix, got {other:?}"),
        }
    }

    #[test]
    fn det_and_skew_basics() {
        assert_relative_eq!(Tensor4Sym::identity().det(), 1.0);
        assert_relative_eq!(Tensor4Sym::diag(1.0, 2.0, 3.0).det(), 6.0);
        assert_eq!(t300_q().to_gen().skew_norm(), 0.0);
    }

    fn arb_sym() -> impl Strategy<Value = Tensor4Sym> {
        let f = -50.0..50.0f64;
        (f.clone(), f.clone(), f.clone(), f.clone(), f.clone(), f)
            .prop_map(|(a, b, c, d, e, g)| Tensor4Sym::new(a, b, c, d, e, g))
    }

    fn arb_gen() -> impl Strategy<Value = Tensor4Gen> {
        proptest::array::uniform3(proptest::array::uniform3(-50.0..50.0f64))
            .prop_map(Tensor4Gen::new)
    }

    proptest! {
        #[test]
        fn rotation_preserves_det_and_norm_sym(t in arb_sym(), theta in -6.3..6.3f64) {
            let r = t.rotate(theta);
            let scale = t.frobenius().max(1.0);
            prop_assert!((r.det() - t.det()).abs() <= 1e-12 * scale.powi(3));
            prop_assert!((r.frobenius() - t.frobenius()).abs() <= 1e-12 * scale);
        }

        #[test]
        fn rotation_preserves_det_and_norm_gen(t in arb_gen(), theta in -6.3..6.3f64) {
            let r = t.rotate(theta);
            let scale = t.frobenius().max(1.0);
            prop_assert!((r.det() - t.det()).abs() <= 1e-12 * scale.powi(3));
            prop_assert!((r.frobenius() - t.frobenius()).abs() <= 1e-12 * scale);
        }

        #[test]
        fn rotation_group_action(t in arb_sym(), a in -3.2..3.2f64, b in -3.2..3.2f64) {
            let scale = t.frobenius().max(1.0);
            let two_step = t.rotate(a).rotate(b);
            let one_step = t.rotate(a + b);
            prop_assert!(two_step.sub(&one_step).frobenius() <= 1e-12 * scale);
            let back = t.rotate(a).rotate(-a);
            prop_assert!(back.sub(&t).frobenius() <= 1e-12 * scale);
        }

        #[test]
        fn double_inversion_round_trips(t in arb_sym()) {
            // Only well-conditioned inputs.
            let m = t;
            prop_assume!(m.det().abs() > 1e-3 * m.frobenius().powi(3));
            let back = m.invert().unwrap().invert().unwrap();
            prop_assert!(back.sub(&m).frobenius() <= 1e-10 * m.frobenius());
        }

        #[test]
        fn skew_norm_of_symmetric_is_zero(t in arb_sym()) {
            prop_assert_eq!(t.to_gen().skew_norm(), 0.0);
        }

        #[test]
        fn sym_plus_skew_reassembles(t in arb_gen()) {
            let sym = t.sym_part().to_gen();
            let skew = t.sub(&sym);
            let back = sym.add(&skew);
            prop_assert!(back.sub(&t).frobenius() <= 1e-14 * t.frobenius().max(1.0));
        }
    }
}

//! The analysis report assembled from the core operations.

use serde::Serialize;

use lamipolar_core::coupling::{self, BShape, BSymReport, SingularityVerdict};
use lamipolar_core::laminate::{LaminateTensors, Stack};
use lamipolar_core::polar::{self, BoundsKind, BoundsReport, PolarElastic, PolarGeneral};
use lamipolar_core::{SymmetryClass, Tensor4Gen, Tensor4Sym};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct StackEcho {
    pub n: usize,
    pub thickness: f64,
    pub units: String,
    pub identical_ply: bool,
    pub plies: Vec<PlyEcho>,
}

#[derive(Debug, Serialize)]
pub struct PlyEcho {
    pub material: String,
    pub angle_deg: f64,
}

#[derive(Debug, Serialize)]
pub struct SymTensorReport {
    pub cartesian: [[f64; 3]; 3],
    pub polar: PolarElastic,
    pub symmetry: SymmetryClass,
}

#[derive(Debug, Serialize)]
pub struct GenTensorReport {
    pub cartesian: [[f64; 3]; 3],
    pub polar: PolarGeneral,
}

#[derive(Debug, Serialize)]
pub struct CouplingFlags {
    pub b_zero: bool,
    pub quasi_homogeneous: bool,
    pub qhcl: bool,
    pub b_rari_constant: bool,
    pub calb_symmetric: bool,
    pub calb_skew_residual: f64,
    pub calb_rari_residual: f64,
    pub b_singular: bool,
    pub singularity: SingularityVerdict,
    pub b_shape: BShape,
    pub calb_shape: BShape,
    pub shapes_match: bool,
    pub bsym: BSymReport,
}

/// Full analysis of one laminate; a pure function of the stack and the
/// tolerance.
#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    pub tolerance: f64,
    pub stack: StackEcho,
    pub a: SymTensorReport,
    pub b: SymTensorReport,
    pub d: SymTensorReport,
    pub cal_a: SymTensorReport,
    pub cal_b: GenTensorReport,
    pub cal_d: SymTensorReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lamination_parameters: Option<[f64; 12]>,
    pub bounds_a: BoundsReport,
    pub bounds_d: BoundsReport,
    pub bounds_b_coupling: BoundsReport,
}

fn sym_report(t: &Tensor4Sym, p: &PolarElastic, tol: f64) -> SymTensorReport {
    SymTensorReport {
        cartesian: t.to_mat(),
        polar: *p,
        symmetry: polar::classify(p, tol),
    }
}

fn gen_report(t: &Tensor4Gen, p: &PolarGeneral) -> GenTensorReport {
    GenTensorReport {
        cartesian: t.m,
        polar: *p,
    }
}

fn analyze(stack: &Stack, lt: &LaminateTensors, tol: f64) -> AnalysisReport {
    AnalysisReport {
        schema_version: REPORT_SCHEMA_VERSION,
        tolerance: tol,
        stack: StackEcho {
            n: stack.n(),
            thickness: stack.thickness(),
            units: stack.units().to_string(),
            identical_ply: stack.is_identical_ply(),
            plies: stack
                .plies()
                .iter()
                .map(|p| PlyEcho {
                    material: p.material.name.clone(),
                    angle_deg: p.angle.to_degrees(),
                })
                .collect(),
        },
        a: sym_report(&lt.a, &lt.a_polar, tol),
        b: sym_report(&lt.b, &lt.b_polar, tol),
        d: sym_report(&lt.d, &lt.d_polar, tol),
        cal_a: sym_report(&lt.cal_a, &lt.cal_a_polar, tol),
        cal_b: gen_report(&lt.cal_b, &lt.cal_b_polar),
        cal_d: sym_report(&lt.cal_d, &lt.cal_d_polar, tol),
        lamination_parameters: lt.lamination.as_ref().map(|x| x.xi),
        bounds_a: polar::bounds_check(&lt.a_polar, BoundsKind::StiffnessPositiveDefinite),
        bounds_d: polar::bounds_check(&lt.d_polar, BoundsKind::StiffnessPositiveDefinite),
        bounds_b_coupling: polar::bounds_check(&lt.b_polar, BoundsKind::Coupling),
    }
}

#[derive(Debug, Serialize)]
pub struct FullReport {
    #[serde(flatten)]
    pub analysis: AnalysisReport,
    pub coupling: CouplingFlags,
}

pub fn full_report(stack: &Stack, lt: &LaminateTensors, tol: f64) -> FullReport {
    let analysis = analyze(stack, lt, tol);
    let shapes = coupling::shape_classify(lt, tol);
    let singularity = coupling::singularity(lt, tol);
    let bsym = coupling::bsym_conditions(lt, tol);
    let b_norm = lt.b.frobenius();
    let rari = if b_norm > 0.0 {
        (lt.b.m12 - lt.b.m66 / 2.0).abs() <= tol.max(1e-12) * b_norm
    } else {
        true
    };
    FullReport {
        analysis,
        coupling: CouplingFlags {
            b_zero: lt.b_zero,
            quasi_homogeneous: lt.quasi_homogeneous,
            qhcl: lt.qhcl,
            b_rari_constant: rari,
            calb_symmetric: bsym.symmetric,
            calb_skew_residual: bsym.skew_residual,
            calb_rari_residual: coupling::calb_rari_residual(&lt.cal_b_polar),
            b_singular: singularity.singular,
            singularity,
            b_shape: shapes.b_shape,
            calb_shape: shapes.calb_shape,
            shapes_match: shapes.shapes_match,
            bsym,
        },
    }
}

fn fmt_mat(m: &[[f64; 3]; 3]) -> String {
    let mut out = String::new();
    for row in m {
        out.push_str(&format!(
            "    [{:>13.6e} {:>13.6e} {:>13.6e}]\n",
            row[0], row[1], row[2]
        ));
    }
    out
}

fn fmt_polar_elastic(p: &PolarElastic) -> String {
    format!(
        "    T0={:.6e} T1={:.6e} R0={:.6e} R1={:.6e} Phi0={:.4}deg{} Phi1={:.4}deg{}",
        p.t0,
        p.t1,
        p.r0,
        p.r1,
        p.phi0.to_degrees(),
        if p.phi0_defined { "" } else { " (undefined)" },
        p.phi1.to_degrees(),
        if p.phi1_defined { "" } else { " (undefined)" },
    )
}

fn fmt_polar_general(p: &PolarGeneral) -> String {
    format!(
        "    t0={:.6e} t1={:.6e} t3={:.6e}\n    r0={:.6e} r1={:.6e} r2={:.6e}\n    \
         phi0={:.4}deg phi1={:.4}deg phi2={:.4}deg",
        p.t0,
        p.t1,
        p.t3,
        p.r0,
        p.r1,
        p.r2,
        p.phi0.to_degrees(),
        p.phi1.to_degrees(),
        p.phi2.to_degrees(),
    )
}

/// Human-readable rendering of the same report object.
pub fn render_text(report: &FullReport) -> String {
    let a = &report.analysis;
    let mut out = String::new();
    out.push_str(&format!(
        "laminate: {} plies, h = {} {}, identical plies: {}\n",
        a.stack.n, a.stack.thickness, a.stack.units, a.stack.identical_ply
    ));
    for (i, ply) in a.stack.plies.iter().enumerate() {
        out.push_str(&format!(
            "  ply {:>2}: {:>8.3} deg  {}\n",
            i + 1,
            ply.angle_deg,
            ply.material
        ));
    }
    for (name, rep) in [
        ("A", &a.a),
        ("B", &a.b),
        ("D", &a.d),
        ("calA", &a.cal_a),
        ("calD", &a.cal_d),
    ] {
        out.push_str(&format!("{name} [{}]:\n", rep.symmetry));
        out.push_str(&fmt_mat(&rep.cartesian));
        out.push_str(&fmt_polar_elastic(&rep.polar));
        out.push('\n');
    }
    out.push_str("calB:\n");
    out.push_str(&fmt_mat(&a.cal_b.cartesian));
    out.push_str(&fmt_polar_general(&a.cal_b.polar));
    out.push('\n');
    if let Some(xi) = &a.lamination_parameters {
        out.push_str("lamination parameters xi1..xi12:\n   ");
        for x in xi {
            out.push_str(&format!(" {x:.6}"));
        }
        out.push('\n');
    }
    let c = &report.coupling;
    out.push_str(&format!(
        "coupling: B zero: {}, quasi-homogeneous: {}, QHCL: {}\n",
        c.b_zero, c.quasi_homogeneous, c.qhcl
    ));
    out.push_str(&format!(
        "  B rari-constant: {}, B singular: {} (cause {:?})\n",
        c.b_rari_constant, c.b_singular, c.singularity.cause
    ));
    out.push_str(&format!(
        "  calB symmetric: {} (skew residual {:.3e}), rari residual {:.3e}\n",
        c.calb_symmetric, c.calb_skew_residual, c.calb_rari_residual
    ));
    out.push_str(&format!(
        "  shapes: B {:?}, calB {:?}, shared: {}\n",
        c.b_shape, c.calb_shape, c.shapes_match
    ));
    if let Some(case) = c.bsym.matched_special_case {
        out.push_str(&format!("  matched special case: {}\n", case.name()));
    }
    if let Some(h) = c.bsym.h_entries {
        out.push_str(&format!(
            "  H entries: H12={:.6e} H13={:.6e} H23={:.6e}\n",
            h[0], h[1], h[2]
        ));
    }
    if let Some(cv) = c.bsym.c_values {
        out.push_str(&format!(
            "  closed forms: C1={:.6e} C2={:.6e} C3={:.6e}\n",
            cv[0], cv[1], cv[2]
        ));
    }
    out.push_str(&format!(
        "bounds: A {}, D {}, B(coupling) {}\n",
        if a.bounds_a.passed() {
            "pass"
        } else {
            "VIOLATED"
        },
        if a.bounds_d.passed() {
            "pass"
        } else {
            "VIOLATED"
        },
        if a.bounds_b_coupling.passed() {
            "pass"
        } else {
            "VIOLATED"
        },
    ));
    out
}

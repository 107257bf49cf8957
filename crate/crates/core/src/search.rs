//! Seedable stochastic search over stacking sequences.
//!
//! Simulated annealing over a discrete orientation alphabet: one ply
//! orientation is mutated per move, moves are accepted by the Metropolis
//! rule, and the temperature cools geometrically per epoch. Fixed seeds
//! reproduce the full trace bit for bit.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::path::Path;

use crate::coupling::{self, SpecialCase};
use crate::error::{Error, Result};
use crate::laminate::{LaminateTensors, Stack};
use crate::material::{self, Material};

/// The named residual functionals an objective can combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TermKind {
    /// In-plane isotropy: magnitude of (xi1, xi2, xi3, xi4).
    AIso,
    /// Bending isotropy: magnitude of (xi9..xi12).
    DIso,
    /// ||A - D||_F / ||A||_F.
    AEqD,
    /// Penalty when ||B||_F / ||A||_F falls below `min_ratio` (default 1e-3).
    BNonzero,
    /// ||calB - calB^T|| / ||calB||.
    BsymSkew,
    /// |t0^B - t1^B| of calB, normalized.
    CalbRari,
    /// R0^B relative to the stiffness scale.
    R0bZero,
    /// R1^B relative to the stiffness scale.
    R1bZero,
    /// R0^A relative to the stiffness scale.
    R0aZero,
    /// R1^A relative to the stiffness scale.
    R1aZero,
    /// Square-symmetric identical-ply symmetry condition residual.
    ScSquareSymmetric,
    /// R0-orthotropic identical-ply symmetry condition residual.
    ScR0Orthotropic,
    /// Orthotropic co-axial symmetry condition residual.
    ScOrthotropicCoaxial,
}

impl TermKind {
    fn special_case(self) -> Option<SpecialCase> {
        match self {
            TermKind::ScSquareSymmetric => Some(SpecialCase::SquareSymmetricIdentical),
            TermKind::ScR0Orthotropic => Some(SpecialCase::R0OrthotropicIdentical),
            TermKind::ScOrthotropicCoaxial => Some(SpecialCase::OrthotropicCoaxial),
            _ => None,
        }
    }
}

/// One weighted term of a search objective.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectiveTerm {
    pub name: TermKind,
    pub weight: f64,
    /// Optional numeric parameters (e.g. `min_ratio` for `b_nonzero`).
    #[serde(default, skip_serializing_if = "std::collections::BTreeMap::is_empty")]
    pub params: std::collections::BTreeMap<String, f64>,
}

/// A weighted sum of squared residual terms; zero means every target met.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Objective {
    pub terms: Vec<ObjectiveTerm>,
}

impl Objective {
    pub fn single(name: TermKind, weight: f64) -> Self {
        Objective {
            terms: vec![ObjectiveTerm {
                name,
                weight,
                params: Default::default(),
            }],
        }
    }

    pub fn push(mut self, name: TermKind, weight: f64) -> Self {
        self.terms.push(ObjectiveTerm {
            name,
            weight,
            params: Default::default(),
        });
        self
    }

    fn validate(&self) -> Result<()> {
        for t in &self.terms {
            if t.weight.is_nan() || t.weight < 0.0 {
                return Err(Error::InvalidSearchConfig(
                    "objective weights must be non-negative".into(),
                ));
            }
        }
        Ok(())
    }

    /// Unweighted residual of one term.
    fn term_value(&self, term: &ObjectiveTerm, lt: &LaminateTensors) -> f64 {
        let scale = lt.a_polar.scale().max(f64::MIN_POSITIVE);
        match term.name {
            TermKind::AIso => match &lt.lamination {
                Some(xi) => {
                    let (a, b) = xi.a4();
                    let (c, d) = xi.a2();
                    (a * a + b * b + c * c + d * d).sqrt()
                }
                None => (lt.a_polar.r0.hypot(lt.a_polar.r1)) / scale,
            },
            TermKind::DIso => match &lt.lamination {
                Some(xi) => {
                    let (a, b) = xi.d4();
                    let (c, d) = xi.d2();
                    (a * a + b * b + c * c + d * d).sqrt()
                }
                None => (lt.d_polar.r0.hypot(lt.d_polar.r1)) / scale,
            },
            TermKind::AEqD => lt.ad_ratio,
            TermKind::BNonzero => {
                let min_ratio = term.params.get("min_ratio").copied().unwrap_or(1e-3);
                (min_ratio - lt.b_norm_ratio).max(0.0) / min_ratio
            }
            TermKind::BsymSkew => lt.skew_residual(),
            TermKind::CalbRari => coupling::calb_rari_residual(&lt.cal_b_polar),
            TermKind::R0bZero => lt.b_polar.r0 / scale,
            TermKind::R1bZero => lt.b_polar.r1 / scale,
            TermKind::R0aZero => lt.a_polar.r0 / scale,
            TermKind::R1aZero => lt.a_polar.r1 / scale,
            TermKind::ScSquareSymmetric
            | TermKind::ScR0Orthotropic
            | TermKind::ScOrthotropicCoaxial => {
                let case = term.name.special_case().expect("special-case term");
                match coupling::special_case_bsym(lt, case, 1e-6) {
                    Ok(res) => res.iter().fold(0.0f64, |acc, r| acc.max(r.abs())),
                    Err(_) => 1.0,
                }
            }
        }
    }

    /// Weighted sum of squared residuals.
    pub fn evaluate(&self, lt: &LaminateTensors) -> f64 {
        self.terms
            .iter()
            .map(|t| {
                let v = self.term_value(t, lt);
                t.weight * v * v
            })
            .sum()
    }

    /// Per-term unweighted residuals, for reporting.
    pub fn breakdown(&self, lt: &LaminateTensors) -> Vec<(TermKind, f64)> {
        self.terms
            .iter()
            .map(|t| (t.name, self.term_value(t, lt)))
            .collect()
    }
}

/// Configuration of one annealing run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Allowed ply orientations, degrees.
    pub alphabet_deg: Vec<f64>,
    /// Number of plies.
    pub n: usize,
    pub material: Material,
    pub seed: u64,
    /// Maximum number of chain evaluations.
    pub budget: u64,
    /// Convergence threshold on the objective.
    pub tolerance: f64,
    /// Starting temperature; estimated from 100 random stacks when absent.
    pub initial_temperature: Option<f64>,
    /// Geometric cooling factor per epoch.
    pub cooling: f64,
    /// Moves per epoch.
    pub epoch_len: usize,
}

impl SearchConfig {
    pub fn new(alphabet_deg: Vec<f64>, n: usize, material: Material, seed: u64) -> Self {
        SearchConfig {
            alphabet_deg,
            n,
            material,
            seed,
            budget: 50_000,
            tolerance: 1e-12,
            initial_temperature: None,
            cooling: 0.97,
            epoch_len: 100,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.alphabet_deg.is_empty() {
            return Err(Error::InvalidSearchConfig(
                "alphabet must be nonempty".into(),
            ));
        }
        if self.n < 2 {
            return Err(Error::InvalidSearchConfig("need at least two plies".into()));
        }
        if self.budget < 1 {
            return Err(Error::InvalidSearchConfig(
                "budget must be at least 1".into(),
            ));
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return Err(Error::InvalidSearchConfig(
                "cooling must be in (0, 1)".into(),
            ));
        }
        if self.epoch_len == 0 {
            return Err(Error::InvalidSearchConfig(
                "epoch_len must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One point of the annealing trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TraceEntry {
    pub eval: u64,
    pub current: f64,
    pub best: f64,
}

/// Result of a search run.
#[derive(Debug, Clone, Serialize)]
pub struct SearchResult {
    pub angles_deg: Vec<f64>,
    pub material: String,
    pub objective: f64,
    pub converged: bool,
    pub evaluations: u64,
    pub residuals: Vec<(TermKind, f64)>,
    pub trace: Vec<TraceEntry>,
}

impl SearchResult {
    pub fn stack(&self, materials: &[Material]) -> Result<Stack> {
        let m = material::find(&self.material, materials).ok_or_else(|| {
            Error::InvalidSearchConfig(format!("unknown material '{}'", self.material))
        })?;
        let angles: Vec<f64> = self.angles_deg.iter().map(|a| a.to_radians()).collect();
        Stack::identical(&m, &angles)
    }
}

fn stack_from_indices(cfg: &SearchConfig, idx: &[usize]) -> Result<Stack> {
    let angles: Vec<f64> = idx
        .iter()
        .map(|&i| cfg.alphabet_deg[i].to_radians())
        .collect();
    Stack::identical(&cfg.material, &angles)
}

fn evaluate_indices(cfg: &SearchConfig, obj: &Objective, idx: &[usize]) -> Result<f64> {
    let stack = stack_from_indices(cfg, idx)?;
    Ok(obj.evaluate(&LaminateTensors::from_stack(&stack)?))
}

/// Estimates the starting temperature as the sample standard deviation of
/// the objective over 100 random stacks (its own RNG stream).
fn estimate_temperature(cfg: &SearchConfig, obj: &Objective) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7e39_a1c5_55aa_0f01);
    let mut values = Vec::with_capacity(100);
    for _ in 0..100 {
        let idx: Vec<usize> = (0..cfg.n)
            .map(|_| rng.gen_range(0..cfg.alphabet_deg.len()))
            .collect();
        values.push(evaluate_indices(cfg, obj, &idx)?);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let var =
        values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (values.len() - 1) as f64;
    let std = var.sqrt();
    Ok(if std > 0.0 { std } else { 1.0 })
}

/// Runs the annealing chain. Deterministic for a fixed (config, objective)
/// pair; exhausting the budget is not an error, the best-so-far stack is
/// returned with `converged = false`.
pub fn search(cfg: &SearchConfig, obj: &Objective) -> Result<SearchResult> {
    cfg.validate()?;
    obj.validate()?;
    let temp0 = match cfg.initial_temperature {
        Some(t) => t,
        None => estimate_temperature(cfg, obj)?,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut current: Vec<usize> = (0..cfg.n)
        .map(|_| rng.gen_range(0..cfg.alphabet_deg.len()))
        .collect();
    let mut current_val = evaluate_indices(cfg, obj, &current)?;
    let mut best = current.clone();
    let mut best_val = current_val;
    let mut evals: u64 = 1;
    let mut trace = vec![TraceEntry {
        eval: 1,
        current: current_val,
        best: best_val,
    }];
    let mut temp = temp0;
    let mut moves_in_epoch = 0usize;
    let mut since_improvement: u64 = 0;
    let reheat_after = (40 * cfg.epoch_len as u64).max(1000);
    while best_val > cfg.tolerance && evals < cfg.budget {
        // Moves: mutate one ply, or swap two plies. Swaps preserve the
        // orientation counts, which keeps A fixed while reshuffling B and D.
        let mut cand = current.clone();
        if cfg.alphabet_deg.len() > 1 && rng.gen_bool(0.5) {
            let ply = rng.gen_range(0..cfg.n);
            let mut next = rng.gen_range(0..cfg.alphabet_deg.len() - 1);
            if next >= cand[ply] {
                next += 1;
            }
            cand[ply] = next;
        } else {
            let i = rng.gen_range(0..cfg.n);
            let j = rng.gen_range(0..cfg.n);
            cand.swap(i, j);
        }
        let cand_val = evaluate_indices(cfg, obj, &cand)?;
        evals += 1;
        let delta = cand_val - current_val;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temp).exp() {
            current = cand;
            current_val = cand_val;
        }
        if cand_val < best_val {
            best_val = cand_val;
            best = current.clone();
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        trace.push(TraceEntry {
            eval: evals,
            current: current_val,
            best: best_val,
        });
        moves_in_epoch += 1;
        if moves_in_epoch >= cfg.epoch_len {
            moves_in_epoch = 0;
            temp *= cfg.cooling;
        }
        // Plateau escape: re-warm the chain from a fresh random state.
        if since_improvement >= reheat_after {
            since_improvement = 0;
            temp = temp0;
            current = (0..cfg.n)
                .map(|_| rng.gen_range(0..cfg.alphabet_deg.len()))
                .collect();
            current_val = evaluate_indices(cfg, obj, &current)?;
            evals += 1;
            trace.push(TraceEntry {
                eval: evals,
                current: current_val,
                best: best_val,
            });
        }
    }
    let stack = stack_from_indices(cfg, &best)?;
    let lt = LaminateTensors::from_stack(&stack)?;
    Ok(SearchResult {
        angles_deg: best.iter().map(|&i| cfg.alphabet_deg[i]).collect(),
        material: cfg.material.name.clone(),
        objective: best_val,
        converged: best_val <= cfg.tolerance,
        evaluations: evals,
        residuals: obj.breakdown(&lt),
        trace,
    })
}

// ---------------------------------------------------------------------------
// The five known 18-ply quasi-homogeneous coupled sequences.
// ---------------------------------------------------------------------------

/// The five 18-ply three-orientation QHCL stacking sequences, as indices
/// 0, 1, 2 into an (alpha, beta, gamma) orientation triple.
pub const QHCL_SEQUENCES: [[u8; 18]; 5] = [
    [0, 0, 1, 0, 1, 2, 1, 0, 0, 0, 2, 1, 2, 2, 1, 2, 1, 2],
    [0, 0, 1, 0, 2, 1, 1, 0, 0, 0, 1, 2, 2, 2, 2, 1, 1, 2],
    [0, 0, 1, 0, 2, 1, 2, 0, 0, 0, 1, 1, 2, 2, 2, 1, 1, 2],
    [0, 1, 2, 2, 1, 1, 2, 0, 1, 1, 0, 2, 0, 2, 0, 0, 2, 1],
    [0, 1, 2, 2, 1, 2, 1, 2, 0, 0, 2, 1, 0, 0, 1, 1, 0, 2],
];

/// Orientation lists (radians) for the five QHCL sequences with the given
/// (alpha, beta, gamma) triple in degrees.
pub fn qhcl_angle_sets(alpha_deg: f64, beta_deg: f64, gamma_deg: f64) -> Vec<Vec<f64>> {
    let tri = [
        alpha_deg.to_radians(),
        beta_deg.to_radians(),
        gamma_deg.to_radians(),
    ];
    QHCL_SEQUENCES
        .iter()
        .map(|seq| seq.iter().map(|&i| tri[i as usize]).collect())
        .collect()
}

/// Verification of one known QHCL sequence.
#[derive(Debug, Clone, Serialize)]
pub struct QhclSequenceReport {
    pub index: usize,
    pub ad_ratio: f64,
    pub a_iso_residual: f64,
    pub b_norm_ratio: f64,
    pub skew_residual: f64,
    pub cal_ad_ratio: f64,
    pub qhcl: bool,
}

/// Verification of the full QHCL suite with (0, 60, -60) T300 plies.
#[derive(Debug, Clone, Serialize)]
pub struct QhclReport {
    pub sequences: Vec<QhclSequenceReport>,
    /// Max cross-sequence deviation of A (relative Frobenius).
    pub a_spread: f64,
    /// Max cross-sequence deviation of calA.
    pub cal_a_spread: f64,
    /// Min pairwise distance between the B tensors (relative to ||A||).
    pub b_min_distance: f64,
}

/// Homogenizes the five known sequences and verifies the QHCL claims.
pub fn verify_known_sequences() -> Result<QhclReport> {
    let m = material::find("T300-5208", &[]).expect("builtin material");
    let mut reports = Vec::new();
    let mut lts = Vec::new();
    for (i, angles) in qhcl_angle_sets(0.0, 60.0, -60.0).into_iter().enumerate() {
        let stack = Stack::identical(&m, &angles)?;
        let lt = LaminateTensors::from_stack(&stack)?;
        let scale = lt.a_polar.scale();
        reports.push(QhclSequenceReport {
            index: i + 1,
            ad_ratio: lt.ad_ratio,
            a_iso_residual: lt.a_polar.r0.hypot(lt.a_polar.r1) / scale,
            b_norm_ratio: lt.b_norm_ratio,
            skew_residual: lt.skew_residual(),
            cal_ad_ratio: lt.cal_a.sub(&lt.cal_d).frobenius() / lt.cal_a.frobenius(),
            qhcl: lt.qhcl,
        });
        lts.push(lt);
    }
    let a_norm = lts[0].a.frobenius();
    let mut a_spread = 0.0f64;
    let mut cal_a_spread = 0.0f64;
    let mut b_min_distance = f64::INFINITY;
    for i in 0..lts.len() {
        for j in i + 1..lts.len() {
            a_spread = a_spread.max(lts[i].a.sub(&lts[j].a).frobenius() / a_norm);
            cal_a_spread = cal_a_spread
                .max(lts[i].cal_a.sub(&lts[j].cal_a).frobenius() / lts[i].cal_a.frobenius());
            b_min_distance = b_min_distance.min(lts[i].b.sub(&lts[j].b).frobenius() / a_norm);
        }
    }
    Ok(QhclReport {
        sequences: reports,
        a_spread,
        cal_a_spread,
        b_min_distance,
    })
}

// ---------------------------------------------------------------------------
// Search spec file.
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, untagged)]
enum MaterialRef {
    Name(String),
    Inline(Box<Material>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchSpecFile {
    schema_version: u32,
    alphabet_deg: Vec<f64>,
    n: usize,
    material: MaterialRef,
    seed: u64,
    budget: u64,
    objective: Vec<ObjectiveTerm>,
    #[serde(default)]
    tolerance: Option<f64>,
    #[serde(default)]
    initial_temperature: Option<f64>,
    #[serde(default)]
    cooling: Option<f64>,
    #[serde(default)]
    epoch_len: Option<usize>,
}

/// Loads a search spec file into a config and an objective.
pub fn load_search_spec(path: &Path, extra: &[Material]) -> Result<(SearchConfig, Objective)> {
    let text = fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let f: SearchSpecFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        message: format!("{e} (line {}, column {})", e.line(), e.column()),
    })?;
    if f.schema_version != 1 {
        return Err(Error::Parse {
            path: path.display().to_string(),
            message: format!("unsupported schema_version {}", f.schema_version),
        });
    }
    let mat = match f.material {
        MaterialRef::Name(name) => material::find(&name, extra).ok_or_else(|| Error::Parse {
            path: path.display().to_string(),
            message: format!("unknown material '{name}'"),
        })?,
        MaterialRef::Inline(m) => *m,
    };
    let mut cfg = SearchConfig::new(f.alphabet_deg, f.n, mat, f.seed);
    cfg.budget = f.budget;
    if let Some(t) = f.tolerance {
        cfg.tolerance = t;
    }
    cfg.initial_temperature = f.initial_temperature;
    if let Some(c) = f.cooling {
        cfg.cooling = c;
    }
    if let Some(e) = f.epoch_len {
        cfg.epoch_len = e;
    }
    Ok((cfg, Objective { terms: f.objective }))
}

//! Command-line laminate analysis: homogenization and polar reports,
//! coupling-symmetry checks, directional diagrams, curvature responses with
//! mesh emission, and stacking-sequence search.
//!
//! Angles are degrees at every file and flag boundary. Exit codes: 0 on
//! success, 1 when a checked condition does not hold, 2 on input errors.

mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lamipolar_core::error::Error;
use lamipolar_core::laminate::{self, LaminateTensors, Stack};
use lamipolar_core::material;
use lamipolar_core::polar::{self, DEFAULT_TOL};
use lamipolar_core::response::{self, surface_mesh};
use lamipolar_core::search;

#[derive(Parser)]
#[command(
    name = "lamipolar",
    version,
    about = "Polar-formalism analysis of coupled laminates"
)]
struct Cli {
    /// Tolerance for classifications and condition checks; overrides the
    /// LAMIPOLAR_TOL environment variable.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct StackArgs {
    /// Stack file (JSON).
    #[arg(long)]
    stack: PathBuf,
    /// Extra material definitions (JSON); builtins are always available.
    #[arg(long)]
    materials: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Homogenize a stack and report stiffness/compliance tensors, polar
    /// parameters, symmetry classes and coupling flags.
    Analyze {
        #[command(flatten)]
        stack: StackArgs,
        /// Emit the report as JSON (default is text).
        #[arg(long, conflicts_with = "text")]
        json: bool,
        /// Emit the report as text (the default).
        #[arg(long)]
        text: bool,
    },
    /// Sample a directional diagram as CSV rows (theta_deg, value).
    Diagram {
        #[command(flatten)]
        stack: StackArgs,
        /// Quantity: a Kelvin component like A11, D16, calB61, or EA / ED
        /// for the directional Young's moduli.
        #[arg(long)]
        quantity: String,
        /// Samples over [0, 360) degrees.
        #[arg(long, default_value_t = 720)]
        samples: usize,
        /// Output file (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check whether the compliance coupling tensor is symmetric.
    /// Exits 0 when symmetric within tolerance, 1 when not.
    CheckBsym {
        #[command(flatten)]
        stack: StackArgs,
        #[arg(long)]
        json: bool,
    },
    /// Mid-plane strains and curvatures for a load case, with optional
    /// deflection-surface emission.
    Respond {
        #[command(flatten)]
        stack: StackArgs,
        /// Load-case file (JSON).
        #[arg(long)]
        load: PathBuf,
        /// Write OUT.csv and OUT.obj with the deflection surface.
        #[arg(long)]
        mesh: Option<PathBuf>,
        /// Mesh grid, e.g. 41x41.
        #[arg(long, default_value = "41x41")]
        grid: String,
        #[arg(long)]
        json: bool,
    },
    /// Run a stacking-sequence search from a spec file.
    Search {
        /// Search spec file (JSON).
        #[arg(long)]
        spec: PathBuf,
        /// Extra material definitions (JSON).
        #[arg(long)]
        materials: Option<PathBuf>,
        /// Output file for the result JSON (stdout when absent).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn tolerance(cli_tol: Option<f64>) -> Result<f64, Error> {
    if let Some(t) = cli_tol {
        return Ok(t);
    }
    match std::env::var("LAMIPOLAR_TOL") {
        Ok(v) => v.parse().map_err(|_| Error::Parse {
            path: "LAMIPOLAR_TOL".to_string(),
            message: format!("not a number: '{v}'"),
        }),
        Err(_) => Ok(DEFAULT_TOL),
    }
}

fn load_inputs(args: &StackArgs) -> Result<(Stack, LaminateTensors), Error> {
    let extra = match &args.materials {
        Some(path) => material::load_materials(path)?,
        None => Vec::new(),
    };
    let stack = laminate::load_stack(&args.stack, &extra)?;
    let lt = LaminateTensors::from_stack(&stack)?;
    Ok((stack, lt))
}

fn write_or_print(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io {
            path: path.display().to_string(),
            source: e,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// One diagram sample: the requested quantity at direction theta.
fn quantity_at(lt: &LaminateTensors, quantity: &str, theta: f64) -> Result<f64, Error> {
    let unknown = || Error::UnknownQuantity(quantity.to_string());
    if quantity == "EA" {
        return Ok(1.0 / polar::to_cartesian_sym(&lt.cal_a_polar, theta).m11);
    }
    if quantity == "ED" {
        return Ok(1.0 / polar::to_cartesian_sym(&lt.cal_d_polar, theta).m11);
    }
    let (name, comp) = quantity
        .char_indices()
        .find(|(_, c)| c.is_ascii_digit())
        .map(|(i, _)| quantity.split_at(i))
        .ok_or_else(unknown)?;
    let idx = |c: char| -> Result<usize, Error> {
        match c {
            '1' => Ok(0),
            '2' => Ok(1),
            '6' => Ok(2),
            _ => Err(unknown()),
        }
    };
    let mut chars = comp.chars();
    let (Some(r), Some(cc), None) = (chars.next(), chars.next(), chars.next()) else {
        return Err(unknown());
    };
    let (i, j) = (idx(r)?, idx(cc)?);
    let sym = |p: &polar::PolarElastic| polar::to_cartesian_sym(p, theta).to_mat()[i][j];
    match name {
        "A" => Ok(sym(&lt.a_polar)),
        "B" => Ok(sym(&lt.b_polar)),
        "D" => Ok(sym(&lt.d_polar)),
        "calA" => Ok(sym(&lt.cal_a_polar)),
        "calD" => Ok(sym(&lt.cal_d_polar)),
        "calB" => Ok(polar::to_cartesian_gen(&lt.cal_b_polar, theta).m[i][j]),
        _ => Err(unknown()),
    }
}

fn parse_grid(grid: &str) -> Result<(usize, usize), Error> {
    let bad = || Error::Parse {
        path: "--grid".to_string(),
        message: format!("expected NXxNY, got '{grid}'"),
    };
    let (nx, ny) = grid.split_once('x').ok_or_else(bad)?;
    let nx: usize = nx.parse().map_err(|_| bad())?;
    let ny: usize = ny.parse().map_err(|_| bad())?;
    if nx < 2 || ny < 2 {
        return Err(bad());
    }
    Ok((nx, ny))
}

fn run(cli: Cli) -> Result<u8, Error> {
    let tol = tolerance(cli.tol)?;
    match cli.command {
        Command::Analyze { stack, json, .. } => {
            let (st, lt) = load_inputs(&stack)?;
            let report = report::full_report(&st, &lt, tol);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            } else {
                print!("{}", report::render_text(&report));
            }
            Ok(0)
        }
        Command::Diagram {
            stack,
            quantity,
            samples,
            out,
        } => {
            if samples < 8 {
                return Err(Error::Parse {
                    path: "--samples".to_string(),
                    message: "need at least 8 samples".to_string(),
                });
            }
            let (_, lt) = load_inputs(&stack)?;
            // validate the quantity once before sampling
            quantity_at(&lt, &quantity, 0.0)?;
            let mut csv = String::from("theta_deg,value\n");
            for k in 0..samples {
                let theta_deg = 360.0 * k as f64 / samples as f64;
                let v = quantity_at(&lt, &quantity, theta_deg.to_radians())?;
                csv.push_str(&format!("{theta_deg},{v}\n"));
            }
            write_or_print(&out, &csv)?;
            Ok(0)
        }
        Command::CheckBsym { stack, json } => {
            let (_, lt) = load_inputs(&stack)?;
            let report = lamipolar_core::coupling::bsym_conditions(&lt, tol);
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&report).expect("serializable")
                );
            } else {
                println!(
                    "calB symmetric: {} (skew residual {:.6e}, tolerance {:.1e})",
                    report.symmetric, report.skew_residual, tol
                );
                if let Some(c) = report.c_values {
                    println!(
                        "closed forms: C1={:.6e} C2={:.6e} C3={:.6e}",
                        c[0], c[1], c[2]
                    );
                }
                if let Some(case) = report.matched_special_case {
                    println!("matched special case: {}", case.name());
                }
            }
            Ok(if report.symmetric { 0 } else { 1 })
        }
        Command::Respond {
            stack,
            load,
            mesh,
            grid,
            json,
        } => {
            let (_, lt) = load_inputs(&stack)?;
            let lc = response::load_load_case(&load)?;
            let rr = response::respond(&lt, &lc)?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&rr).expect("serializable")
                );
            } else {
                println!(
                    "eps    = ({:.6e}, {:.6e}, {:.6e})",
                    rr.eps.c1, rr.eps.c2, rr.eps.c6
                );
                println!(
                    "kappa  = ({:.6e}, {:.6e}, {:.6e}) 1/length",
                    rr.kappa.c1, rr.kappa.c2, rr.kappa.c6
                );
                println!(
                    "gaussian K = {:.6e}, mean H = {:.6e}",
                    rr.gaussian_k, rr.mean_h
                );
            }
            if let Some(base) = mesh {
                let (nx, ny) = parse_grid(&grid)?;
                let m = surface_mesh(&rr, &lc, nx, ny);
                m.write_csv(&base.with_extension("csv"))?;
                m.write_obj(&base.with_extension("obj"))?;
            }
            Ok(0)
        }
        Command::Search {
            spec,
            materials,
            out,
        } => {
            let extra = match &materials {
                Some(path) => material::load_materials(path)?,
                None => Vec::new(),
            };
            let (cfg, obj) = search::load_search_spec(&spec, &extra)?;
            let result = search::search(&cfg, &obj)?;
            let summary = serde_json::json!({
                "schema_version": 1,
                "angles_deg": result.angles_deg,
                "material": result.material,
                "objective": result.objective,
                "converged": result.converged,
                "evaluations": result.evaluations,
                "residuals": result.residuals,
                "trace": {
                    "entries": result.trace.len(),
                    "initial": result.trace.first(),
                    "final": result.trace.last(),
                },
            });
            let text = format!(
                "{}\n",
                serde_json::to_string_pretty(&summary).expect("serializable")
            );
            write_or_print(&out, &text)?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

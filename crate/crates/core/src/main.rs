use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use stringeq::bracket_jacobian::{jacobian_identity_check, solve_string_system, string_residual};
use stringeq::cli_io::{export_svg, export_trajectory, load_config, parse_complex, RunReport};
use stringeq::cplx_fn::{AnalyticMap, CircleGrid, PolynomialMap};
use stringeq::evolution::{run_evolution, Mode, StopReason};
use stringeq::moments::{quadrature_check, quadrature_coeffs, two_point_quadrature, AreaResolution, TestFunction};
use stringeq::scenarios::{three_way_moments, verify_scenario, Check, Family};
use stringeq::{Error, Tolerances};

#[derive(Parser)]
#[command(
    name = "stringeq",
    version,
    about = "String equation, harmonic moments and Hele-Shaw evolution"
)]
#[command(arg_required_else_help = true)]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Include wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Harmonic moments by Richardson's formula, residues and area quadrature.
    Moments {
        #[command(flatten)]
        map: MapArgs,
        /// Highest moment index (default depends on the map).
        #[arg(long)]
        order: Option<usize>,
    },
    /// Solve the string system for a polynomial map and check the bracket.
    BracketCheck {
        #[command(flatten)]
        poly: PolyArgs,
        #[arg(long, default_value_t = 1024)]
        grid: usize,
    },
    /// Compare det(V U) with the resultant formula.
    Jacobian {
        #[command(flatten)]
        poly: PolyArgs,
    },
    /// Run a Hele-Shaw evolution from a TOML scenario file.
    Evolve {
        #[arg(long)]
        config: PathBuf,
    },
    /// Verify the closed-form properties of a scenario family.
    Scenario {
        #[command(flatten)]
        map: FamilyArgs,
    },
    /// Check the quadrature identity against area integrals.
    QuadratureCheck {
        #[command(flatten)]
        map: MapArgs,
    },
}

#[derive(Args)]
struct PolyArgs {
    /// Degree n of the polynomial map.
    #[arg(long)]
    degree: Option<usize>,
    /// Coefficients a_0, a_1, ... separated by commas; complex entries like 0.2-0.1i.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "random")]
    coeffs: Option<Vec<String>>,
    /// Draw a random map of this degree.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FamilyArgs {
    /// disk, polynomial, example_abc, subcase1 or subcase2.
    family: String,
    #[arg(long = "M0", alias = "m0")]
    m0: Option<f64>,
    #[arg(long = "B1", alias = "b1", allow_hyphen_values = true)]
    b1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    /// |c| for example_abc.
    #[arg(long)]
    c: Option<f64>,
    #[arg(long)]
    radius: Option<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    coeffs: Option<Vec<String>>,
}

#[derive(Args)]
struct MapArgs {
    /// A polynomial map given by its coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "family")]
    coeffs: Option<Vec<String>>,
    /// Or a scenario file whose family defines the map.
    #[arg(long)]
    family: Option<PathBuf>,
}

/// Usage or configuration problems exit with 2, failed checks with 1.
enum Failure {
    Usage(String),
    Run(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config { .. } | Error::Parameter(_) => Failure::Usage(e.to_string()),
            other => Failure::Run(other),
        }
    }
}

fn complex_arg(name: &str, s: &str) -> Result<Complex64, Failure> {
    parse_complex(s).map_err(|m| Failure::Usage(format!("--{name}: {m}")))
}

fn complex_list(name: &str, items: &[String]) -> Result<Vec<Complex64>, Failure> {
    items.iter().map(|s| complex_arg(name, s)).collect()
}

fn random_polynomial(n: usize, seed: u64) -> Result<PolynomialMap, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex64::new(1.0, 0.0)];
    for _ in 0..n {
        let r = rng.gen_range(0.05..0.5) / n as f64;
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        coeffs.push(Complex64::from_polar(r, phase));
    }
    Ok(PolynomialMap::new(coeffs)?)
}

impl PolyArgs {
    fn build(&self) -> Result<PolynomialMap, Failure> {
        let map = match (&self.coeffs, self.random) {
            (Some(c), None) => PolynomialMap::new(complex_list("coeffs", c)?)?,
            (None, Some(n)) => random_polynomial(n, self.seed)?,
            _ => return Err(Failure::Usage("give either --coeffs or --random N".into())),
        };
        if let Some(d) = self.degree {
            if d != map.n() {
                return Err(Failure::Usage(format!(
                    "--degree {d} does not match the {} coefficients given",
                    map.n() + 1
                )));
            }
        }
        Ok(map)
    }
}

impl FamilyArgs {
    fn family(&self) -> Result<Family, Failure> {
        let need =
            |v: Option<f64>, key: &str| v.ok_or_else(|| Failure::Usage(format!("{} needs --{key}", self.family)));
        let need_c = |v: &Option<String>, key: &str| match v {
            Some(s) => complex_arg(key, s),
            None => Err(Failure::Usage(format!("{} needs --{key}", self.family))),
        };
        Ok(match self.family.as_str() {
            "disk" => Family::Disk {
                radius: self.radius.unwrap_or(1.0),
            },
            "polynomial" => Family::Polynomial {
                coeffs: complex_list(
                    "coeffs",
                    self.coeffs
                        .as_deref()
                        .ok_or_else(|| Failure::Usage("polynomial needs --coeffs".into()))?,
                )?,
            },
            "example_abc" => Family::ExampleAbc {
                a: need_c(&self.a, "a")?,
                b: need_c(&self.b, "b")?,
                c_magnitude: need(self.c, "c")?,
            },
            "subcase1" => Family::Subcase1 {
                m0: need(self.m0, "M0")?,
                b1: need_c(&self.b1, "B1")?,
            },
            "subcase2" => Family::Subcase2 {
                m0: need(self.m0, "M0")?,
                b1: need_c(&self.b1, "B1")?,
            },
            other => {
                return Err(Failure::Usage(format!(
                    "unknown family `{other}`; expected disk, polynomial, example_abc, subcase1 or subcase2"
                )))
            }
        })
    }
}

impl MapArgs {
    fn family(&self) -> Result<Family, Failure> {
        match (&self.coeffs, &self.family) {
            (Some(c), None) => Ok(Family::Polynomial {
                coeffs: complex_list("coeffs", c)?,
            }),
            (None, Some(path)) => Ok(load_config(path)?.family),
            _ => Err(Failure::Usage(
                "give either --coeffs or --family <scenario.toml>".into(),
            )),
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("report values serialize")
}

fn run_moments(map_args: &MapArgs, order: Option<usize>) -> Result<RunReport, Failure> {
    let family = map_args.family()?;
    let map = family.build()?;
    let tol = Tolerances::default();
    let order = order.unwrap_or_else(|| map.default_moment_count());
    let (richardson, residue, area) = three_way_moments(&map, order, &tol)?;
    let checks = vec![
        Check::measured("moments richardson vs residue", richardson.max_gap(&residue), 1e-10),
        Check::measured("moments residue vs area", residue.max_gap(&area), 1e-6),
    ];
    Ok(RunReport::new(
        "moments",
        json!({ "family": family, "order": order }),
        checks,
        json!({ "richardson": richardson, "residue": residue, "area": area }),
    ))
}

fn run_bracket(poly_args: &PolyArgs, grid_size: usize) -> Result<RunReport, Failure> {
    let map = poly_args.build()?;
    let tol = Tolerances::default();
    let grid = CircleGrid::new(grid_size)?;
    let spec = json!({ "coeffs": map.coeffs(), "grid": grid_size });
    let sol = match solve_string_system(&map, &tol) {
        Ok(s) => s,
        Err(e @ Error::Degenerate { .. }) => {
            let checks = vec![Check::failed("string system solvable")];
            return Ok(RunReport::new(
                "bracket-check",
                spec,
                checks,
                json!({ "error": e.to_string() }),
            ));
        }
        Err(e) => return Err(e.into()),
    };
    let analytic: AnalyticMap = map.clone().into();
    let residual = string_residual(&analytic, &sol.velocity_function(), &grid);
    let checks = vec![
        Check::measured("string residual", residual, 1e-10),
        Check::measured("velocity symmetry", sol.symmetry_defect(), 1e-10),
    ];
    Ok(RunReport::new(
        "bracket-check",
        spec,
        checks,
        json!({ "velocities": sol }),
    ))
}

fn run_jacobian(poly_args: &PolyArgs) -> Result<RunReport, Failure> {
    let map = poly_args.build()?;
    let report = jacobian_identity_check(&map)?;
    let checks = vec![
        Check::measured("jacobian identity", report.rel_error, 1e-8),
        Check::measured("jacobian identity up to (-1)^n", report.parity_rel_error, 1e-8),
        Check::measured("det V closed form", report.det_v_rel_error(), 1e-10),
        Check::measured("V U against finite differences", report.fd_max_error, 1e-6),
    ];
    let spec = json!({ "degree": map.n(), "coeffs": map.coeffs(), "random": poly_args.random, "seed": poly_args.seed });
    Ok(RunReport::new("jacobian", spec, checks, to_json(&report)))
}

fn run_evolve(config: &Path) -> Result<RunReport, Failure> {
    let spec = load_config(config)?;
    let traj = run_evolution(&spec)?;
    let mut checks = vec![match &traj.stop {
        StopReason::Completed => Check::ok("run completed"),
        _ => Check::failed("run completed"),
    }];
    let last = traj.states.last();
    match traj.mode {
        Mode::Polynomial => {
            // M_0 moves at rate 1; the rest are conserved
            let drift = last.map_or(0.0, |s| s.max_moment_drift());
            checks.push(Check::measured("moment conservation", drift, 1e-8));
        }
        Mode::Taylor => {
            let drift = last.map_or(0.0, |s| s.max_branch_drift());
            checks.push(Check::measured("branch points fixed", drift, 1e-6));
        }
    }
    let mut artifacts = Vec::new();
    if !traj.states.is_empty() {
        if let Some(p) = &spec.outputs.csv {
            export_trajectory(&traj, p.as_ref())?;
            artifacts.push(p.clone());
        }
        if let Some(p) = &spec.outputs.svg {
            export_svg(&traj, p.as_ref())?;
            artifacts.push(p.clone());
        }
    }
    let data = json!({
        "mode": traj.mode,
        "stop": traj.stop,
        "states": traj.states.len(),
        "final": last,
    });
    let mut report = RunReport::new("evolve", to_json(&spec), checks, data);
    report.artifacts = artifacts;
    if let Some(p) = &spec.outputs.json {
        report.artifacts.push(p.clone());
        std::fs::write(p, serde_json::to_string_pretty(&report).expect("report serializes")).map_err(Error::from)?;
    }
    Ok(report)
}

fn run_scenario(args: &FamilyArgs) -> Result<RunReport, Failure> {
    let family = args.family()?;
    let report = verify_scenario(&family, &Tolerances::default())?;
    Ok(RunReport::new(
        "scenario",
        to_json(&family),
        report.checks,
        json!({ "family": report.family }),
    ))
}

fn run_quadrature(map_args: &MapArgs) -> Result<RunReport, Failure> {
    let family = map_args.family()?;
    let map = family.build()?;
    let data = match &map {
        AnalyticMap::ExampleAbc(m) => two_point_quadrature(m),
        other => quadrature_coeffs(other, &Tolerances::default())?,
    };
    let mut tests: Vec<TestFunction> = (0..6).map(TestFunction::Monomial).collect();
    tests.push(TestFunction::Exp(Complex64::new(0.5, 0.25)));
    let residuals = quadrature_check(&map, &data, &tests, &AreaResolution::default())?;
    let checks = residuals
        .iter()
        .map(|r| Check::measured(format!("quadrature {}", r.test_function.label()), r.residual, 1e-6))
        .collect();
    Ok(RunReport::new(
        "quadrature-check",
        to_json(&family),
        checks,
        json!({ "quadrature": data, "residuals": residuals }),
    ))
}

fn jacobian_sides(report: &RunReport) -> String {
    let d = &report.data;
    let c = |v: &serde_json::Value| format!("{} {:+}i", v[0], v[1].as_f64().unwrap_or(f64::NAN));
    format!(
        "n = {}\ndet(V U)                      = {}\n2 a0^(n^2+3n+1) Res(f', f'*)  = {}\nrelative error                = {}\n",
        d["n"],
        c(&d["lhs"]),
        c(&d["rhs"]),
        d["rel_error"]
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let result = match &cli.command {
        Command::Moments { map, order } => run_moments(map, *order),
        Command::BracketCheck { poly, grid } => run_bracket(poly, *grid),
        Command::Jacobian { poly } => run_jacobian(poly),
        Command::Evolve { config } => run_evolve(config),
        Command::Scenario { map } => run_scenario(map),
        Command::QuadratureCheck { map } => run_quadrature(map),
    };
    let mut report = match result {
        Ok(r) => r,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            return ExitCode::from(2);
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    if cli.timing {
        report.timing = Some(start.elapsed().as_secs_f64());
    }
    let mut text = String::new();
    if cli.json {
        text = serde_json::to_string_pretty(&report).expect("report serializes");
        text.push('\n');
    } else {
        if matches!(cli.command, Command::Jacobian { .. }) {
            text.push_str(&jacobian_sides(&report));
        }
        text.push_str(&report.render_text());
        text.push_str(if report.passed {
            "all checks passed\n"
        } else {
            "some checks failed\n"
        });
    }
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

//! `lapzeta`: lattice and zeta-regularized determinants from the command line.
//!
//! Exit codes: 0 success, 2 bad flags or input, 3 zero eigenvalue,
//! 4 numerical failure, 5 a verification check failed, 1 I/O failure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod grid;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use lapzeta::coeffs::{corner_constant, free_corner_constant, CoeffTable};
use lapzeta::continuum::{zeta_prime_zero_box, zeta_prime_zero_massive_torus, BoxSpec, ZetaPrime};
use lapzeta::quadrature::QuadratureConfig;
use lapzeta::report::{sig17, ExpansionReport};
use lapzeta::spectra::{logdet_exact, BoundaryCondition, LatticeSpec};
use lapzeta::verify::{
    box_expansion_report, chebyshev_product, default_basis, massive_h_values,
    massive_torus_expansion_report, ratio_2d, reg_limit_chain, with_negative_powers, SizeRule,
};
use lapzeta::Error;
use serde::Serialize;
use serde_json::{json, Value};

use crate::grid::Grid;

#[derive(Parser, Debug)]
#[command(
    name = "lapzeta",
    version,
    about = "Lattice Laplacian determinants and their zeta-regularized limits"
)]
struct Cli {
    /// Output format on stdout.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,
    /// Also write `<OUT>.json` and `<OUT>.csv`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Absolute quadrature tolerance.
    #[arg(long, default_value_t = 1e-12, global = true)]
    abs_tol: f64,
    /// Relative quadrature tolerance.
    #[arg(long, default_value_t = 1e-12, global = true)]
    rel_tol: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Geometry {
    /// Dirichlet box, massless.
    Box,
    /// Flat torus, massive.
    Torus,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact log-determinant of a lattice Laplacian.
    Logdet {
        /// Axis sizes, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        dims: Vec<usize>,
        /// dirichlet, free or periodic.
        #[arg(long, default_value = "dirichlet")]
        bc: BoundaryCondition,
        /// Added mass term m̃².
        #[arg(long, default_value_t = 0.0)]
        mass_squared: f64,
        /// Multiply the operator by U².
        #[arg(long)]
        rescale: Option<f64>,
        /// Drop zero eigenvalues instead of failing on them.
        #[arg(long)]
        exclude_zero_modes: bool,
    },
    /// Zeta-regularized log-determinant of a box or torus.
    ZetaDet {
        /// Side lengths, comma separated.
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<f64>,
        /// Mass; required for the torus.
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long, value_enum, default_value_t = Geometry::Box)]
        geometry: Geometry,
    },
    /// Table of the bulk and boundary coefficients L^d_i(0).
    Coeffs {
        #[arg(long)]
        d: usize,
    },
    /// Residuals of the Dirichlet box expansion over a scale grid.
    VerifyHypercube {
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<f64>,
        /// start:stop:geometric[:ratio] or start:stop:linear[:step].
        #[arg(long)]
        u_grid: Grid,
        /// Bound on the last Cauchy difference.
        #[arg(long, default_value_t = 1e-2)]
        cauchy_tol: f64,
        /// Differences below this count as converged.
        #[arg(long, default_value_t = 1e-9)]
        floor: f64,
    },
    /// H_N(0) of the massive torus against its predicted limit.
    VerifyMassiveTorus {
        #[arg(long = "box", value_delimiter = ',', required = true)]
        sides: Vec<f64>,
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        u_grid: Grid,
        #[arg(long, default_value_t = 1e-2)]
        cauchy_tol: f64,
        #[arg(long, default_value_t = 1e-9)]
        floor: f64,
    },
    /// Regularized limit of log det(n²Δ) on the unit cube.
    Reglim {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n_grid: Grid,
        /// Extra basis terms n^-1 .. n^-K.
        #[arg(long, default_value_t = 0)]
        negative_powers: usize,
        /// Allowed gap between the predicted and zeta determinants.
        #[arg(long, default_value_t = 1e-2)]
        tol: f64,
    },
    /// Doubled torus over Dirichlet square determinant identity.
    Ratio2d {
        #[arg(long)]
        n1: usize,
        #[arg(long)]
        n2: usize,
        #[arg(long)]
        mass_squared: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Cosine products against their Chebyshev closed forms.
    Chebyshev {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        x: f64,
    },
    /// Re-render a saved expansion report.
    Show { path: PathBuf },
}

enum Failure {
    Lib(Error),
    Io(String),
    Check(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ZeroEigenvalue => 3,
        Error::QuadratureFailure { .. } | Error::IllConditioned(_) => 4,
        _ => 2,
    }
}

/// The three renderings of one result.
struct Rendered {
    table: String,
    json: String,
    csv: String,
}

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn key_values(rows: &[(&str, f64)]) -> (String, String) {
    let mut table = String::new();
    let mut csv = String::from("name,value\n");
    for (k, v) in rows {
        let _ = writeln!(table, "{k} {}", sig17(*v));
        let _ = writeln!(csv, "{k},{}", sig17(*v));
    }
    (table, csv)
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

fn quad(cli: &Cli) -> Result<QuadratureConfig, Failure> {
    let q = QuadratureConfig {
        abs_tol: cli.abs_tol,
        rel_tol: cli.rel_tol,
        ..QuadratureConfig::default()
    };
    q.validate()?;
    Ok(q)
}

fn require_grid(points: usize) -> Result<(), Failure> {
    if points < 2 {
        return Err(
            Error::InvalidInput("verification grids need at least two points".into()).into(),
        );
    }
    Ok(())
}

fn zeta_rendered(z: &ZetaPrime, sides: &[f64], mass: f64) -> Rendered {
    let mut rows = vec![("log_det", z.log_det()), ("zeta_prime", z.zeta_prime)];
    rows.extend(z.terms.iter().map(|t| (t.name.as_str(), t.value)));
    rows.push(("quadrature_error", z.quadrature_error));
    let (table, csv) = key_values(&rows);
    let json = to_json(&json!({
        "sides": sides,
        "mass": mass,
        "log_det": z.log_det(),
        "zeta_prime": z.zeta_prime,
        "quadrature_error": z.quadrature_error,
        "terms": z.terms,
    }));
    Rendered { table, json, csv }
}

fn report_rendered(rep: &ExpansionReport) -> Rendered {
    Rendered {
        table: rep.render_table(),
        json: rep.to_json(),
        csv: rep.to_csv(),
    }
}

fn cauchy_checks(diffs: &[f64], floor: f64, tol: f64) -> Vec<Check> {
    let decreasing = diffs.windows(2).all(|w| w[1] < w[0] || w[1] <= floor);
    let last = diffs.last().copied().unwrap_or(0.0);
    vec![
        Check {
            name: "cauchy_decreasing",
            passed: decreasing,
            detail: format!("{diffs:?}"),
        },
        Check {
            name: "cauchy_last",
            passed: last <= tol,
            detail: format!("{last:e} against {tol:e}"),
        },
    ]
}

fn run(cli: &Cli) -> Result<(Rendered, Vec<Check>), Failure> {
    let none = Vec::new();
    match &cli.command {
        Command::Logdet {
            dims,
            bc,
            mass_squared,
            rescale,
            exclude_zero_modes,
        } => {
            let mut spec = LatticeSpec::new(dims.clone(), *bc)?.with_mass_squared(*mass_squared)?;
            if let Some(u) = rescale {
                spec = spec.with_rescale(*u)?;
            }
            let logdet = logdet_exact(&spec, *exclude_zero_modes)?;
            let json = to_json(&json!({
                "sizes": dims,
                "bc": bc,
                "mass_squared": mass_squared,
                "rescale": rescale,
                "exclude_zero_modes": exclude_zero_modes,
                "eigenvalue_count": spec.total_count().to_string(),
                "logdet": logdet,
            }));
            let (_, csv) = key_values(&[("logdet", logdet)]);
            Ok((
                Rendered {
                    table: format!("{}\n", sig17(logdet)),
                    json,
                    csv,
                },
                none,
            ))
        }
        Command::ZetaDet {
            sides,
            mass,
            geometry,
        } => {
            let q = quad(cli)?;
            let m = mass.unwrap_or(0.0);
            let b = BoxSpec::with_mass(sides.clone(), m)?;
            let z = match geometry {
                Geometry::Box => zeta_prime_zero_box(&b, &q)?,
                Geometry::Torus => zeta_prime_zero_massive_torus(&b, &q)?,
            };
            Ok((zeta_rendered(&z, sides, m), none))
        }
        Command::Coeffs { d } => {
            let table = CoeffTable::compute(*d, &quad(cli)?)?;
            let mut csv = String::from("i,value,error\n");
            for (i, e) in &table.entries {
                let _ = writeln!(csv, "{i},{},{}", sig17(e.value), sig17(e.error));
            }
            Ok((
                Rendered {
                    table: table.render_table(),
                    json: table.to_json(),
                    csv,
                },
                none,
            ))
        }
        Command::VerifyHypercube {
            sides,
            u_grid,
            cauchy_tol,
            floor,
        } => {
            let grid = u_grid.points();
            require_grid(grid.len())?;
            let rep = box_expansion_report(
                &BoxSpec::new(sides.clone())?,
                &grid,
                SizeRule::RoundHalfEven,
                &quad(cli)?,
            )?;
            let mut checks =
                cauchy_checks(&rep.convergence.cauchy_differences, *floor, *cauchy_tol);
            checks.push(Check {
                name: "bookkeeping",
                passed: rep.records.iter().all(|r| r.bookkeeping_holds()),
                detail: String::new(),
            });
            Ok((report_rendered(&rep), checks))
        }
        Command::VerifyMassiveTorus {
            sides,
            mass,
            u_grid,
            cauchy_tol,
            floor,
        } => {
            let grid = u_grid.points();
            require_grid(grid.len())?;
            let b = BoxSpec::with_mass(sides.clone(), *mass)?;
            let rep =
                massive_torus_expansion_report(&b, &grid, SizeRule::RoundHalfEven, &quad(cli)?)?;
            let h = massive_h_values(&rep);
            let diffs: Vec<f64> = h.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
            Ok((
                report_rendered(&rep),
                cauchy_checks(&diffs, *floor, *cauchy_tol),
            ))
        }
        Command::Reglim {
            d,
            n_grid,
            negative_powers,
            tol,
        } => {
            let grid = n_grid.integer_points();
            let basis = with_negative_powers(default_basis(*d), *negative_powers);
            let r = reg_limit_chain(*d, &grid, &basis, &quad(cli)?)?;
            let rows = [
                ("lim", r.fit.a00),
                ("corner_constant", corner_constant(*d)),
                ("free_cube_constant", free_corner_constant(*d)),
                ("log_det_predicted", r.log_det_predicted),
                ("log_det_free_constant", r.log_det_free_constant),
                ("log_det_zeta", r.log_det_zeta),
                ("discrepancy", r.discrepancy()),
                ("fit_condition", r.fit.fit_condition),
                ("fit_residual_norm", r.fit.fit_residual_norm),
            ];
            let (table, csv) = key_values(&rows);
            let json = to_json(&json!({
                "lim": r.fit.a00,
                "corner_constant": corner_constant(*d),
                "free_cube_constant": free_corner_constant(*d),
                "chain": r,
            }));
            let checks = vec![Check {
                name: "limit_matches_zeta",
                passed: r.discrepancy().abs() <= *tol,
                detail: format!("{:e} against {tol:e}", r.discrepancy()),
            }];
            Ok((Rendered { table, json, csv }, checks))
        }
        Command::Ratio2d {
            n1,
            n2,
            mass_squared,
            tol,
        } => {
            let r = ratio_2d(*n1, *n2, *mass_squared)?;
            let corrected = (r.log_lhs - r.log_rhs_corrected).abs();
            let printed = (r.log_lhs - r.log_rhs_printed).abs();
            let rows = [
                ("log_lhs", r.log_lhs),
                ("log_rhs_printed", r.log_rhs_printed),
                ("log_rhs_corrected", r.log_rhs_corrected),
                ("corrected_gap", corrected),
                ("printed_gap", printed),
            ];
            let (table, csv) = key_values(&rows);
            let json = to_json(&json!({
                "n1": n1,
                "n2": n2,
                "mass_squared": mass_squared,
                "ratio": r,
                "corrected_matches": corrected <= *tol,
                "printed_matches": printed <= *tol,
            }));
            if printed > *tol {
                eprintln!("note: printed right side differs from the determinant ratio by log factor {printed:e}");
            }
            let checks = vec![Check {
                name: "corrected_identity",
                passed: corrected <= *tol,
                detail: format!("{corrected:e} against {tol:e}"),
            }];
            Ok((Rendered { table, json, csv }, checks))
        }
        Command::Chebyshev { n, x } => {
            let c = chebyshev_product(*n, *x)?;
            let rows = [
                ("full_cycle", c.full_cycle),
                ("closed_form", c.closed_form),
                ("half_index", c.half_index),
                ("half_index_closed_form", c.half_index_closed_form),
            ];
            let (table, csv) = key_values(&rows);
            Ok((
                Rendered {
                    table,
                    json: to_json(&c),
                    csv,
                },
                none,
            ))
        }
        Command::Show { path } => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            let rep = ExpansionReport::from_json(&text)
                .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
            Ok((report_rendered(&rep), none))
        }
    }
}

fn write_outputs(base: &Path, r: &Rendered) -> Result<(), Failure> {
    for (ext, body) in [("json", &r.json), ("csv", &r.csv)] {
        let path = base.with_extension(ext);
        std::fs::write(&path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var("LAPZETA_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("LAPZETA_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    let (rendered, checks) = run(cli)?;
    if let Some(base) = &cli.out {
        write_outputs(base, &rendered)?;
    }
    let body = match cli.format {
        Format::Table => &rendered.table,
        Format::Json => &rendered.json,
        Format::Csv => &rendered.csv,
    };
    let mut stdout = std::io::stdout().lock();
    let written = stdout.write_all(body.as_bytes()).and_then(|_| {
        if body.ends_with('\n') {
            Ok(())
        } else {
            stdout.write_all(b"\n")
        }
    });
    match written.and_then(|_| stdout.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            return Err(Failure::Io(e.to_string()))
        }
        _ => {}
    }
    let failed: Vec<&Check> = checks.iter().filter(|c| !c.passed).collect();
    if failed.is_empty() {
        return Ok(());
    }
    Err(Failure::Check(json!({
        "status": "assertion_failed",
        "failed": failed
            .iter()
            .map(|c| json!({ "check": c.name, "detail": c.detail }))
            .collect::<Vec<_>>(),
    })))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(msg) = configure_threads() {
        eprintln!("error: {msg}");
        return ExitCode::from(2);
    }
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Check(record)) => {
            eprintln!("{record}");
            ExitCode::from(5)
        }
    }
}

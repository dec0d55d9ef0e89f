mod error;
mod report;
mod svg;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use convexpos::asymptotics::{exact_reference, format_rational, ExactShape};
use convexpos::mc::{self, MCEstimate};
use convexpos::{find_dom, AsymptoticModel, Point, Polygon};

use error::{CliError, CliResult};
use report::{asymptotic_rows, AnalysisReport};

#[derive(Parser)]
#[command(name = "convexpos", version, about = "Convex position of uniform points in convex polygons")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Limit shape, maximal affine perimeter and asymptotic constants.
    Analyze {
        polygon: PathBuf,
        /// Write the JSON report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Values of n for the asymptote table.
        #[arg(long, value_delimiter = ',', default_values_t = [10u64, 100, 1000])]
        n: Vec<u64>,
    },
    /// CSV table of the log-asymptote and the n^2 P^(1/n) proxy.
    Asymptotic {
        polygon: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<u64>,
    },
    /// Monte Carlo estimate as CSV.
    Montecarlo {
        /// Polygon file; not used by the bipointed estimator.
        polygon: Option<PathBuf>,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, env = "CONVEXPOS_SEED", default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        workers: usize,
        #[arg(long, value_enum, default_value_t = Estimator::Convex)]
        estimator: Estimator,
    },
    /// Closed-form probability for the square, triangle or bi-pointed
    /// triangle: a fraction for n <= 30, otherwise its natural log.
    Exact {
        #[arg(long, value_enum)]
        shape: ShapeArg,
        #[arg(long)]
        n: u64,
        /// Print the natural log even when the fraction is available.
        #[arg(long)]
        log: bool,
    },
    /// Parallel containing polygon of a point set.
    Pcp {
        polygon: PathBuf,
        /// CSV file of "x,y" rows.
        points: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Estimator {
    Convex,
    FullSided,
    Bipointed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ShapeArg {
    Square,
    Triangle,
    Bipointed,
}

impl From<ShapeArg> for ExactShape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Square => ExactShape::Square,
            ShapeArg::Triangle => ExactShape::Triangle,
            ShapeArg::Bipointed => ExactShape::Bipointed,
        }
    }
}

fn read_to_string(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Read {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|e| CliError::Write {
        path: path.display().to_string(),
        message: e.to_string(),
    })
}

fn read_polygon(path: &Path) -> CliResult<Polygon> {
    Ok(Polygon::from_json_str(&read_to_string(path)?)?)
}

/// Reads "x,y" rows; a first row that does not parse is taken as a header.
fn read_points(path: &Path) -> CliResult<Vec<Point>> {
    let text = read_to_string(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let bad = |message: String| CliError::Points {
        path: path.display().to_string(),
        message,
    };
    let mut out = Vec::new();
    for (row, record) in reader.records().enumerate() {
        let record = record.map_err(|e| bad(e.to_string()))?;
        if record.len() != 2 {
            return Err(bad(format!("row {} has {} fields, expected 2", row + 1, record.len())));
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(x), Ok(y)) => out.push(Point::new(x, y)),
            _ if row == 0 => continue,
            _ => return Err(bad(format!("row {} is not numeric", row + 1))),
        }
    }
    Ok(out)
}

/// A closed downstream pipe ends output quietly.
fn stdout_result(r: io::Result<()>) -> CliResult<()> {
    match r {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Write {
            path: "stdout".into(),
            message: e.to_string(),
        }),
        _ => Ok(()),
    }
}

fn print_line(text: &str) -> CliResult<()> {
    let mut out = io::stdout().lock();
    stdout_result(writeln!(out, "{text}").and_then(|_| out.flush()))
}

fn emit_csv<T: Serialize>(rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_writer(io::stdout().lock());
    for r in rows {
        if let Err(e) = w.serialize(r) {
            return match e.into_kind() {
                csv::ErrorKind::Io(io) => stdout_result(Err(io)),
                other => Err(CliError::Write {
                    path: "stdout".into(),
                    message: format!("{other:?}"),
                }),
            };
        }
    }
    stdout_result(w.flush())
}

#[derive(Serialize)]
struct McRow<'a> {
    estimator: &'a str,
    polygon_hash: &'a str,
    n: usize,
    trials: u64,
    successes: u64,
    p_hat: f64,
    ci_low: f64,
    ci_high: f64,
    seed: u64,
}

impl<'a> McRow<'a> {
    fn new(estimator: &'a str, polygon_hash: &'a str, n: usize, e: &MCEstimate) -> Self {
        McRow {
            estimator,
            polygon_hash,
            n,
            trials: e.trials,
            successes: e.successes,
            p_hat: e.p_hat,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            seed: e.seed,
        }
    }
}

#[derive(Serialize)]
struct PcpOutput {
    #[serde(flatten)]
    data: mc::PcpData,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<&'static str>,
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze { polygon, out, svg, n } => {
            let poly = read_polygon(&polygon)?;
            let dom = find_dom(&poly)?;
            let model = AsymptoticModel::from_report(&poly, &dom)?;
            let report = AnalysisReport::build(&poly, &dom, &model, &n);
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            match out {
                Some(path) => write_file(&path, &(json + "\n"))?,
                None => print_line(&json)?,
            }
            if let Some(path) = svg {
                write_file(&path, &svg::analysis_figure(&poly, &dom))?;
            }
        }
        Command::Asymptotic { polygon, n } => {
            if let Some(&bad) = n.iter().find(|&&v| v < 3) {
                return Err(CliError::Usage(format!("n must be at least 3, got {bad}")));
            }
            let poly = read_polygon(&polygon)?;
            let model = AsymptoticModel::for_polygon(&poly)?;
            emit_csv(&asymptotic_rows(&model, &n))?;
        }
        Command::Montecarlo {
            polygon,
            n,
            trials,
            seed,
            workers,
            estimator,
        } => {
            let rows = match estimator {
                Estimator::Bipointed => {
                    let (tri, _, _) = mc::bipointed_triangle();
                    let e = mc::estimate_bipointed(n, trials, seed, workers)?;
                    vec![("bipointed", tri.hash_hex(), e)]
                }
                Estimator::Convex | Estimator::FullSided => {
                    let path = polygon.ok_or_else(|| {
                        CliError::Usage("a polygon file is required for this estimator".into())
                    })?;
                    let poly = read_polygon(&path)?;
                    let hash = poly.hash_hex();
                    if matches!(estimator, Estimator::Convex) {
                        let e = mc::estimate_convex_probability(&poly, n, trials, seed, workers)?;
                        vec![("convex_position", hash, e)]
                    } else {
                        let e = mc::estimate_full_sided(&poly, n, trials, seed, workers)?;
                        vec![
                            ("convex_position", hash.clone(), e.convex),
                            ("full_sided", hash, e.full_sided),
                        ]
                    }
                }
            };
            let rows: Vec<McRow> = rows
                .iter()
                .map(|(name, hash, e)| McRow::new(name, hash, n, e))
                .collect();
            emit_csv(&rows)?;
        }
        Command::Exact { shape, n, log } => {
            let v = exact_reference(shape.into(), n)?;
            match (&v.rational, log) {
                (Some(q), false) => print_line(&format_rational(q))?,
                _ => print_line(&v.log.to_string())?,
            }
        }
        Command::Pcp { polygon, points, svg } => {
            let poly = read_polygon(&polygon)?;
            let pts = read_points(&points)?;
            let data = mc::compute_pcp(&poly, &pts)?;
            if let Some(path) = svg {
                write_file(&path, &svg::pcp_figure(&poly, &pts, &data))?;
            }
            let note = data
                .s
                .is_none()
                .then_some("points are not in convex position; size vector omitted");
            let out = PcpOutput { data, note };
            print_line(&serde_json::to_string_pretty(&out).expect("pcp serializes"))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

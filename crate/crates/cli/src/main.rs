//! `regcorr`: generate test data, run the RC pipelines, reproduce the
//! reference tables and write plot-ready figure data.
//!
//! Exit codes: 0 ok, 2 input error, 3 detection failure, 4 numerical
//! failure (ill-conditioned fit).

mod config;
mod figures;

use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use regcorr::grid::{average, sample, FunctionId, Grid2DCells, Grid2DSamples, UniformGrid1D};
use regcorr::io::{self, Matrix, Series};
use regcorr::rc::{rc_cell_averages_with, rc_point_values_with, Framework};
use regcorr::tensor2d::{rc2d_cell_averages_with, rc2d_point_values_with, Rc2DParams};
use regcorr::{Error, Execution};

use config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(
    name = "regcorr",
    version,
    about = "Regularization-correction subdivision"
)]
struct Cli {
    /// Defaults from a file of `key=value` lines (keys: n, levels, a,
    /// framework, threshold, out). Flags win over the file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct FrameworkFlag {
    /// Point values.
    #[arg(long, conflicts_with = "cell")]
    point: bool,
    /// Cell averages.
    #[arg(long)]
    cell: bool,
}

impl FrameworkFlag {
    fn get(&self) -> Option<Framework> {
        match (self.point, self.cell) {
            (true, _) => Some(Framework::Point),
            (_, true) => Some(Framework::Cell),
            _ => None,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample or average a test function (exp1..exp4, exp2D_point, exp2D).
    Gen {
        function: String,
        /// Jump parameter of exp1.
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[command(flatten)]
        framework: FrameworkFlag,
        /// Number of cells per axis.
        #[arg(long)]
        n: Option<usize>,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run RC on a series or matrix CSV and write the result directory.
    Rc {
        input: PathBuf,
        #[arg(long)]
        levels: Option<usize>,
        #[arg(long)]
        threshold: Option<f64>,
        /// Must match the kind recorded in the input header.
        #[command(flatten)]
        framework: FrameworkFlag,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce one of the reference tables (1..=5) as CSV.
    Table {
        id: u8,
        #[arg(long)]
        threshold: Option<f64>,
        /// CSV file; the CSV goes to stdout when absent, otherwise a text
        /// rendering does.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the data behind one of the reference figures (1..=11).
    Fig {
        id: u8,
        #[arg(long)]
        threshold: Option<f64>,
        /// Output directory, `fig_NN` when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<Error>() {
            return match e.root() {
                Error::MultipleSingularitiesTooClose { .. }
                | Error::RowWithoutSingularity(_)
                | Error::RowWithMultipleSingularities { .. }
                | Error::IndexOutOfRange { .. }
                | Error::DegenerateSmoothness => 3,
                Error::IllConditioned(_) => 4,
                _ => 2,
            };
        }
    }
    2
}

fn configure_threads() -> Result<()> {
    let Ok(value) = std::env::var("RC_SUBDIV_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .with_context(|| format!("RC_SUBDIV_THREADS must be a positive integer, got `{value}`"))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .context("configuring the thread pool")?;
    #[cfg(not(feature = "parallel"))]
    let _ = threads;
    Ok(())
}

fn base_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        cfg.apply_file(path)?;
    }
    Ok(cfg)
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .context("writing to stdout"),
    }
}

fn cmd_gen(cfg: &RunConfig, function: &str) -> Result<()> {
    let id: FunctionId = function.parse()?;
    let id = id.with_parameter(cfg.a);
    let text = match (id.univariate(), cfg.framework) {
        (Some(f), Framework::Point) => io::series_to_csv(&sample(&f, &UniformGrid1D::unit(cfg.n)?)),
        (Some(f), Framework::Cell) => io::cells_to_csv(&average(&f, &UniformGrid1D::unit(cfg.n)?)),
        (None, framework) => {
            let bf = match id {
                FunctionId::Exp2DPoint => regcorr::grid::BivariateFunction::CircleArc,
                _ => regcorr::grid::BivariateFunction::Quadrants,
            };
            match framework {
                Framework::Point => io::matrix_to_csv(&Grid2DSamples::sample(bf, cfg.n)?),
                Framework::Cell => io::cell_matrix_to_csv(&Grid2DCells::average(bf, cfg.n)?),
            }
        }
    };
    write_or_print(cfg.out.as_deref(), &text)
}

enum Input {
    Series(Series),
    Matrix(Matrix),
}

fn read_input(path: &Path) -> Result<Input> {
    let text = fs::read_to_string(path)
        .map_err(Error::from)
        .with_context(|| format!("reading {}", path.display()))?;
    let header = text.lines().next().unwrap_or_default();
    let parsed = if header.contains("rows=") {
        io::matrix_from_csv(&text).map(Input::Matrix)
    } else {
        io::series_from_csv(&text).map(Input::Series)
    };
    parsed.with_context(|| format!("parsing {}", path.display()))
}

fn input_framework(input: &Input) -> Framework {
    match input {
        Input::Series(s) => s.framework(),
        Input::Matrix(Matrix::Point(_)) => Framework::Point,
        Input::Matrix(Matrix::Cell(_)) => Framework::Cell,
    }
}

fn cmd_rc(cfg: &RunConfig, input_path: &Path, requested: Option<Framework>) -> Result<()> {
    let out = cfg.out.as_deref().context("rc needs --out DIR")?;
    let input = read_input(input_path)?;
    let framework = input_framework(&input);
    if let Some(req) = requested {
        if req != framework {
            return Err(Error::InvalidParameter(format!(
                "--{} given but {} holds {} data",
                req.name(),
                input_path.display(),
                framework.name()
            ))
            .into());
        }
    }
    let params = cfg.detection();
    let exec = Execution::Parallel;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let meta = vec![
        ("framework".to_string(), framework.name().to_string()),
        ("threshold".to_string(), format!("{:?}", cfg.threshold)),
    ];
    let start = Instant::now();
    match input {
        Input::Series(Series::Point(s)) => {
            let r = rc_point_values_with(&s, cfg.levels, &params, exec)?;
            io::write_rc_result(out, &r, None, &meta)?;
        }
        Input::Series(Series::Cell(c)) => {
            let r = rc_cell_averages_with(&c, cfg.levels, &params, exec)?;
            io::write_rc_result(out, &r.primitive, Some(&r.averages), &meta)?;
        }
        Input::Matrix(Matrix::Point(m)) => {
            let p = Rc2DParams {
                detection: params,
                ..Rc2DParams::default()
            };
            let r = rc2d_point_values_with(&m, cfg.levels, &p, exec)?;
            fs::write(out.join("output.csv"), io::matrix_to_csv(&r.output))?;
            fs::write(out.join("subdivided.csv"), io::matrix_to_csv(&r.subdivided))?;
            fs::write(out.join("correction.csv"), io::matrix_to_csv(&r.correction))?;
            fs::write(out.join("masked.csv"), io::matrix_to_csv(&r.masked))?;
            if let Some(curve) = &r.curve {
                fs::write(
                    out.join("curve.csv"),
                    io::curve_to_csv(curve, r.output.y_grid().nodes()),
                )?;
            }
            write_meta(out, cfg.levels, &meta)?;
        }
        Input::Matrix(Matrix::Cell(m)) => {
            let r = rc2d_cell_averages_with(&m, cfg.levels, &params, exec)?;
            fs::write(out.join("output.csv"), io::cell_matrix_to_csv(&r))?;
            write_meta(out, cfg.levels, &meta)?;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    fs::write(
        out.join("timings.txt"),
        format!("elapsed_seconds={secs:.6}\n"),
    )?;
    Ok(())
}

fn write_meta(dir: &Path, levels: usize, meta: &[(String, String)]) -> Result<()> {
    let mut text = format!("levels={levels}\n");
    for (k, v) in meta {
        let _ = writeln!(text, "{k}={v}");
    }
    fs::write(dir.join("meta.txt"), text)?;
    Ok(())
}

fn cmd_table(cfg: &RunConfig, id: u8) -> Result<()> {
    if !regcorr::analysis::TABLE_IDS.contains(&id) {
        return Err(Error::InvalidParameter(format!("unknown table {id} (known: 1..=5)")).into());
    }
    let table = regcorr::analysis::study_table(id, &cfg.detection(), Execution::Parallel)?;
    let csv = table.to_csv();
    match cfg.out.as_deref() {
        Some(path) => {
            write_or_print(Some(path), &csv)?;
            write_or_print(None, &table.to_text())
        }
        None => write_or_print(None, &csv),
    }
}

fn cmd_fig(cfg: &RunConfig, id: u8) -> Result<()> {
    let dir = cfg
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("fig_{id:02}")));
    let files = figures::write_figure(id, &dir, &cfg.detection(), Execution::Parallel)?;
    let mut text = String::new();
    let _ = writeln!(
        text,
        "figure {id}: {}",
        figures::DESCRIPTIONS[usize::from(id) - 1]
    );
    for f in files {
        let _ = writeln!(text, "{}", dir.join(f).display());
    }
    write_or_print(None, &text)
}

fn run(cli: Cli) -> Result<()> {
    configure_threads()?;
    let mut cfg = base_config(&cli)?;
    match cli.command {
        Command::Gen {
            function,
            a,
            framework,
            n,
            out,
        } => {
            cfg.apply(&Overrides {
                n,
                a,
                framework: framework.get(),
                out,
                ..Default::default()
            });
            cmd_gen(&cfg, &function)
        }
        Command::Rc {
            input,
            levels,
            threshold,
            framework,
            out,
        } => {
            cfg.apply(&Overrides {
                levels,
                threshold,
                out,
                ..Default::default()
            });
            cmd_rc(&cfg, &input, framework.get())
        }
        Command::Table { id, threshold, out } => {
            cfg.apply(&Overrides {
                threshold,
                out,
                ..Default::default()
            });
            cmd_table(&cfg, id)
        }
        Command::Fig { id, threshold, out } => {
            cfg.apply(&Overrides {
                threshold,
                out,
                ..Default::default()
            });
            cmd_fig(&cfg, id)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

//! Command-line front end.
//!
//! [`dispatch`] parses arguments, runs one subcommand and returns the exit
//! code: 0 on success, 1 for invalid input or usage, 2 when an exact
//! internal identity fails.

pub mod config;
pub mod render;
mod report;

use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::error::{GasketError, Result};
use crate::measures::{cylinder_reports, write_tsv, BoundaryVector};
use crate::numerics::{int, rat};
use crate::renorm::{constants_table, extension_for, spectral_data, verify_r_bounds};
use crate::rsg::{estimate_event_probability, format_estimate};
use crate::singularity::{
    criterion_path, criterion_traces, hellinger_affinity, martingale_trace, summarize,
};
use crate::words::{
    check_condition_a, check_condition_b_sufficient, Letter, DEFAULT_ENUM_CEILING,
    DEFAULT_MAX_LEVEL,
};

use config::{load_config, parse_boundary, RunConfig};
use render::{render_svg, Coloring};

/// Environment variable overriding the enumeration ceiling.
pub const CEILING_VAR: &str = "GASKET_ENUM_CEILING";

#[derive(Parser, Debug)]
#[command(
    name = "gasket",
    version,
    about = "Inhomogeneous Sierpinski gasket toolkit"
)]
struct Cli {
    /// Emit JSON records instead of text.
    #[arg(long, global = true)]
    machine: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Renormalization constant r(ν).
    Renorm {
        #[arg(long)]
        nu: u32,
        /// Report every level from 2 to ν together with the bounds check.
        #[arg(long)]
        all: bool,
        /// Largest accepted level.
        #[arg(long = "max-level", default_value_t = DEFAULT_MAX_LEVEL)]
        max_level: u32,
    },
    /// Harmonic extension matrix of one cell.
    Extend {
        #[arg(long)]
        nu: u32,
        #[arg(long)]
        cell: usize,
    },
    /// Constants of the singularity argument for a configuration.
    Constants {
        #[arg(long)]
        config: PathBuf,
    },
    /// Cylinder table of λ_q and λ_⟨x⟩ at one depth.
    Cylinders {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long)]
        boundary: Option<String>,
    },
    /// Hellinger affinities H_0 … H_m.
    Hellinger {
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "max-depth")]
        max_depth: Option<u64>,
    },
    /// Block-martingale criterion along sampled paths.
    Martingale {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        paths: Option<u64>,
        #[arg(long)]
        blocks: Option<u64>,
        #[arg(long = "block-len")]
        block_len: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check that corner weights avoid the resistance constants.
    ConditionA {
        #[arg(long)]
        config: PathBuf,
    },
    /// Finite-horizon evidence for a level sequence.
    ConditionB {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        l0: Option<u64>,
        #[arg(long)]
        l1: Option<u64>,
        #[arg(long)]
        horizon: Option<u64>,
    },
    /// Monte Carlo estimate of the coverage event probability.
    RsgProb {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: Option<u64>,
        #[arg(long)]
        l0: Option<u64>,
        #[arg(long)]
        l1: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        k: Option<u64>,
    },
    /// SVG drawing of the depth-m cells.
    Render {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        depth: Option<u64>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long = "color-by", default_value = "ratio")]
        color_by: String,
    },
}

/// Enumeration ceiling from the environment, or the default.
pub fn enum_ceiling() -> Result<u64> {
    match std::env::var(CEILING_VAR) {
        Ok(v) => v.trim().parse().map_err(|_| {
            GasketError::validation(format!(
                "{CEILING_VAR} must be a positive integer, got {v:?}"
            ))
        }),
        Err(_) => Ok(DEFAULT_ENUM_CEILING),
    }
}

/// Runs the command line `args` (program name first) and returns the exit code.
pub fn dispatch<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{text}");
                    0
                }
                _ => {
                    let _ = write!(err, "{text}");
                    1
                }
            };
        }
    };
    match run(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_internal() {
                2
            } else {
                1
            }
        }
    }
}

fn io_err(e: std::io::Error) -> GasketError {
    GasketError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn json(out: &mut dyn Write, value: &impl serde::Serialize) -> Result<()> {
    let text =
        serde_json::to_string_pretty(value).map_err(|e| GasketError::consistency(e.to_string()))?;
    writeln!(out, "{text}").map_err(io_err)
}

/// A parameter from the flag, else from `[run]`, else `default`.
fn param(flag: Option<u64>, cfg: &RunConfig, key: &str, default: Option<u64>) -> Result<u64> {
    flag.or_else(|| cfg.run.get(key))
        .or(default)
        .ok_or_else(|| {
            GasketError::validation(format!(
                "missing --{} (or {key} in [run])",
                key.replace('_', "-")
            ))
        })
}

fn as_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

/// Boundary vector for the energy measures: the flag, the config, or the
/// normalized harmonic `(1/2, 0, 0)`.
fn boundary_of(cfg: &RunConfig, flag: Option<&str>) -> Result<BoundaryVector> {
    match (flag, &cfg.boundary) {
        (Some(text), _) => parse_boundary(text),
        (None, Some(x)) => Ok(x.clone()),
        (None, None) => Ok(BoundaryVector::new([rat(1, 2), int(0), int(0)])),
    }
}

fn shell_boundary(cfg: &RunConfig) -> Result<BoundaryVector> {
    let x = boundary_of(cfg, None)?;
    if !x.in_unit_shell() {
        return Err(GasketError::validation(format!(
            "boundary {x} has 2Q(x) = {}, but this command needs 2Q(x) = 1",
            x.total_mass()
        )));
    }
    Ok(x)
}

fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    let machine = cli.machine;
    let ceiling = enum_ceiling()?;
    match &cli.command {
        Command::Renorm { nu, all, max_level } => {
            if *nu < 2 || nu > max_level {
                return Err(GasketError::validation(format!(
                    "level must lie in 2..={max_level}, got {nu}"
                )));
            }
            let levels: Vec<u32> = if *all { (2..=*nu).collect() } else { vec![*nu] };
            let mut rows = Vec::new();
            for level in levels {
                let bounds = verify_r_bounds(level)?;
                let s = spectral_data(level)?.s;
                rows.push(report::RenormRow::new(&bounds, &s));
            }
            if machine {
                return json(out, &rows);
            }
            for row in &rows {
                if *all {
                    writeln!(out, "{}", row.long_line()).map_err(io_err)?;
                } else {
                    writeln!(out, "r({}) = {}", row.nu, row.r).map_err(io_err)?;
                }
            }
            Ok(())
        }
        Command::Extend { nu, cell } => {
            let a = extension_for(Letter::new(*cell, *nu)?)?;
            let rows = report::matrix_rows(&a.matrix);
            if machine {
                return json(
                    out,
                    &serde_json::json!({ "nu": nu, "cell": cell, "matrix": rows }),
                );
            }
            writeln!(out, "A_{cell}^({nu}) =").map_err(io_err)?;
            for row in rows {
                writeln!(out, "{}", row.join("\t")).map_err(io_err)?;
            }
            Ok(())
        }
        Command::Constants { config } => {
            let cfg = load_config(config)?;
            let table = constants_table(&cfg.level_set()?, &cfg.weights()?)?;
            let rec = report::ConstantsRecord::from(&table);
            if machine {
                return json(out, &rec);
            }
            write!(out, "{}", rec.text()).map_err(io_err)
        }
        Command::Cylinders {
            config,
            depth,
            boundary,
        } => {
            let cfg = load_config(config)?;
            let depth = as_usize(param(*depth, &cfg, "depth", None)?);
            let x = boundary_of(&cfg, boundary.as_deref())?;
            let rows = cylinder_reports(&cfg.label_rule()?, &cfg.weights()?, &x, depth, ceiling)?;
            if machine {
                let recs: Vec<_> = rows.iter().map(|r| r.record()).collect();
                return json(out, &recs);
            }
            write_tsv(&rows, out).map_err(io_err)
        }
        Command::Hellinger { config, max_depth } => {
            let cfg = load_config(config)?;
            let m = as_usize(param(*max_depth, &cfg, "max_depth", None)?);
            let x = shell_boundary(&cfg)?;
            let series = hellinger_affinity(&cfg.label_rule()?, &cfg.weights()?, &x, m, ceiling)?;
            if machine {
                return json(out, &series);
            }
            write!(out, "{}", report::affinity_text(&series)).map_err(io_err)
        }
        Command::Martingale {
            config,
            paths,
            blocks,
            block_len,
            seed,
        } => {
            let cfg = load_config(config)?;
            let paths = param(*paths, &cfg, "paths", Some(100))?;
            let blocks = as_usize(param(*blocks, &cfg, "blocks", Some(20))?);
            let m = as_usize(param(*block_len, &cfg, "block_len", Some(1))?);
            let seed = param(*seed, &cfg, "seed", None)?;
            if paths == 0 {
                return Err(GasketError::validation("--paths must be at least 1"));
            }
            let rule = cfg.label_rule()?;
            let q = cfg.weights()?;
            let x = boundary_of(&cfg, None)?;
            if paths == 1 {
                let path = criterion_path(&rule, &q, m * blocks, seed, 0)?;
                let trace = martingale_trace(&rule, &q, &x, &path, m, blocks, ceiling)?;
                if machine {
                    return json(out, &trace);
                }
                return write!(out, "{}", report::trace_text(&trace)).map_err(io_err);
            }
            let traces = criterion_traces(&rule, &q, &x, paths, blocks, m, seed, ceiling)?;
            let summary = summarize(&traces, blocks, m);
            if machine {
                return json(out, &summary);
            }
            write!(out, "{}", report::summary_text(&summary)).map_err(io_err)
        }
        Command::ConditionA { config } => {
            let cfg = load_config(config)?;
            let verdict = check_condition_a(&cfg.level_set()?, &cfg.weights()?)?;
            let violations: Vec<String> = verdict
                .violations
                .iter()
                .map(|(i, nu)| format!("{i}^{nu}"))
                .collect();
            if machine {
                return json(
                    out,
                    &serde_json::json!({ "holds": verdict.holds, "violations": violations }),
                );
            }
            if verdict.holds {
                writeln!(out, "condition (A): holds").map_err(io_err)
            } else {
                writeln!(out, "condition (A): fails at {}", violations.join(", ")).map_err(io_err)
            }
        }
        Command::ConditionB {
            config,
            l0,
            l1,
            horizon,
        } => {
            let cfg = load_config(config)?;
            let l0 = as_usize(param(*l0, &cfg, "l0", Some(1))?);
            let l1 = as_usize(param(*l1, &cfg, "l1", Some(1))?);
            let horizon = as_usize(param(*horizon, &cfg, "horizon", None)?);
            let ev = check_condition_b_sufficient(&cfg.label_rule()?, l0, l1, horizon)?;
            let rec = report::ConditionBRecord::from(&ev);
            if machine {
                return json(out, &rec);
            }
            write!(out, "{}", rec.text()).map_err(io_err)
        }
        Command::RsgProb {
            config,
            trials,
            l0,
            l1,
            seed,
            k,
        } => {
            let cfg = load_config(config)?;
            let trials = param(*trials, &cfg, "trials", None)?;
            let l0 = as_usize(param(*l0, &cfg, "l0", Some(1))?);
            let l1 = as_usize(param(*l1, &cfg, "l1", Some(1))?);
            let seed = param(*seed, &cfg, "seed", None)?;
            let k = as_usize(param(*k, &cfg, "k", Some(0))?);
            let rho = cfg.level_distribution()?;
            let est = estimate_event_probability(&rho, &cfg.weights()?, l0, l1, k, trials, seed)?;
            if machine {
                return json(out, &est);
            }
            write!(out, "{}", format_estimate(&est)).map_err(io_err)
        }
        Command::Render {
            config,
            depth,
            out: path,
            color_by,
        } => {
            let cfg = load_config(config)?;
            let depth = as_usize(param(*depth, &cfg, "depth", None)?);
            let coloring: Coloring = color_by.parse()?;
            let x = boundary_of(&cfg, None)?;
            let svg = render_svg(
                &cfg.label_rule()?,
                &cfg.weights()?,
                Some(&x),
                depth,
                coloring,
                ceiling,
            )?;
            std::fs::write(path, &svg).map_err(|source| GasketError::Io {
                path: path.clone(),
                source,
            })?;
            let polygons = svg.matches("<polygon").count();
            if machine {
                return json(
                    out,
                    &serde_json::json!({ "out": path, "triangles": polygons }),
                );
            }
            writeln!(out, "wrote {} ({polygons} triangles)", path.display()).map_err(io_err)
        }
    }
}

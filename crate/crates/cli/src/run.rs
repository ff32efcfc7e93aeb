//! The subcommands, separated from argument parsing so that tests can drive
//! them directly.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use anyhow::{Context, Result};
use rayon::prelude::*;
use udw_harvest::harvest::{
    check_congruence, find_amax, find_ddmax, harvest, run_sweep, HarvestError, HarvestResult,
    Quantity, SweepTable, ThresholdResult,
};

use crate::config::{Config, RunSection, ThresholdPlan, ThresholdTarget};
use crate::output::{self, Destination};
use crate::presets::{self, JobKind};

/// Version recorded in every manifest.
pub const ARTIFACT_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

/// Completion state of a command that ran to the end.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completion {
    AllConverged,
    Flagged,
}

impl Completion {
    fn from_flags(flags: &[bool]) -> Self {
        if flags.iter().all(|&f| f) {
            Self::AllConverged
        } else {
            Self::Flagged
        }
    }

    fn and(self, other: Self) -> Self {
        if self == Self::AllConverged {
            other
        } else {
            self
        }
    }

    pub fn exit_code(self) -> u8 {
        match self {
            Self::AllConverged => 0,
            Self::Flagged => 2,
        }
    }
}

/// Settings shared by every subcommand.
#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Worker threads, all available cores when absent.
    pub threads: Option<usize>,
    /// Relative tolerance of the double integrals, overriding the
    /// configuration.
    pub tol: Option<f64>,
}

impl RunOptions {
    /// Applies the tolerance override and fills in every default.
    pub fn resolve(&self, config: &Config) -> Result<Config> {
        let config = match self.tol {
            Some(tol) => config.clone().with_rel_tol(tol),
            None => config.clone(),
        };
        Ok(config.resolved()?)
    }

    /// Runs `f` on a pool of the requested size.
    pub fn install<T: Send>(&self, f: impl FnOnce() -> T + Send) -> Result<T> {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Some(n) = self.threads {
            builder = builder.num_threads(n);
        }
        let pool = builder.build().context("cannot start the worker pool")?;
        Ok(pool.install(f))
    }

    fn threads_used(&self) -> usize {
        self.threads.unwrap_or_else(rayon::current_num_threads)
    }
}

pub fn read_config(path: &Path) -> Result<Config> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Config::from_toml(&text).with_context(|| format!("in {}", path.display()))
}

/// P and X of the configured pair.
pub fn point(config: &Config) -> Result<HarvestResult> {
    let cfg = config.scenario_config()?;
    let quad = config.quadrature_spec()?;
    check_congruence(&cfg, &quad)?;
    Ok(harvest(&cfg, &[Quantity::P, Quantity::X], &quad)?)
}

/// Human-readable report of a point evaluation.
pub fn format_point(r: &HarvestResult) -> String {
    let x = r.x.unwrap_or_default();
    let err_x = r.err_x.unwrap_or_default();
    let concurrence = r.concurrence().unwrap_or_default();
    let err_concurrence = if concurrence > 0.0 {
        2.0 * (err_x + r.err_p)
    } else {
        0.0
    };
    let lines = [
        ("p_a", r.p_a, r.err_p),
        ("p_b", r.p_b, r.err_p),
        ("re_x", x.re, err_x),
        ("im_x", x.im, err_x),
        ("abs_x", x.norm(), err_x),
        ("concurrence", concurrence, err_concurrence),
    ];
    let mut out = String::new();
    for (label, value, err) in lines {
        writeln!(
            out,
            "{label:<12} = {:>24} ± {:.2e}",
            output::number(value),
            err
        )
        .unwrap();
    }
    writeln!(out, "{:<12} = {}", "converged", r.converged).unwrap();
    out
}

pub fn sweep(config: &Config) -> Result<SweepTable> {
    let spec = config.sweep_spec()?;
    let quad = config.quadrature_spec()?;
    Ok(run_sweep(&spec, &quad)?)
}

/// Threshold found at one grid point. Failures are kept per row.
#[derive(Clone, Debug, PartialEq)]
pub struct ThresholdRow {
    pub swept_value: f64,
    pub outcome: Result<ThresholdResult, HarvestError>,
}

impl ThresholdRow {
    pub fn converged(&self) -> bool {
        matches!(&self.outcome, Ok(t) if t.converged)
    }
}

/// Runs the threshold search at every grid point, in parallel and in grid
/// order.
pub fn threshold(config: &Config) -> Result<Vec<ThresholdRow>> {
    let plan: ThresholdPlan = config.threshold_plan()?;
    let quad = config.quadrature_spec()?;
    Ok(plan
        .grid
        .par_iter()
        .map(|&swept_value| {
            let outcome = plan
                .parameter
                .apply(&plan.template, swept_value)
                .map_err(HarvestError::from)
                .and_then(|cfg| match plan.target {
                    ThresholdTarget::DdMax => find_ddmax(&cfg, plan.bracket, &quad, plan.tol),
                    ThresholdTarget::AMax => find_amax(&cfg, plan.bracket, &quad, plan.tol),
                });
            ThresholdRow {
                swept_value,
                outcome,
            }
        })
        .collect())
}

fn run_section(
    command: &str,
    output: &Path,
    opts: &RunOptions,
    start: Instant,
    flags: Vec<bool>,
    errors: Vec<String>,
) -> RunSection {
    RunSection {
        artifact_version: ARTIFACT_VERSION.into(),
        command: command.into(),
        output: output.display().to_string(),
        threads: opts.threads_used(),
        wall_time_seconds: start.elapsed().as_secs_f64(),
        rows_converged: flags,
        row_errors: errors,
    }
}

/// Evaluates one point, prints it and optionally writes it as a table.
pub fn cmd_point(
    config: &Config,
    output: Option<&Path>,
    opts: &RunOptions,
) -> Result<(String, Completion)> {
    let config = opts.resolve(config)?;
    config.scenario_config()?;
    let destination = output.map(Destination::create).transpose()?;
    let start = Instant::now();
    let result = opts.install(|| point(&config))??;
    if let Some(d) = destination {
        let run = run_section(
            "point",
            &d.path.clone(),
            opts,
            start,
            vec![result.converged],
            Vec::new(),
        );
        d.finish(
            vec![output::point_row(&result)],
            &output::POINT_COLUMNS,
            &config,
            run,
        )?;
    }
    Ok((
        format_point(&result),
        Completion::from_flags(&[result.converged]),
    ))
}

/// Runs a sweep and writes its table and manifest.
pub fn cmd_sweep(config: &Config, output: &Path, opts: &RunOptions) -> Result<Completion> {
    let config = opts.resolve(config)?;
    config.sweep_spec()?;
    let destination = Destination::create(output)?;
    let start = Instant::now();
    let table = opts.install(|| sweep(&config))??;
    let flags: Vec<bool> = table.rows.iter().map(|r| r.converged()).collect();
    let errors = table
        .rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.outcome.as_ref().err().map(|e| format!("row {i}: {e}")))
        .collect();
    let run = run_section("sweep", output, opts, start, flags.clone(), errors);
    destination.finish(
        output::sweep_rows(&table),
        &output::SWEEP_COLUMNS,
        &config,
        run,
    )?;
    Ok(Completion::from_flags(&flags))
}

/// Runs a threshold search over a grid and writes its table and manifest.
pub fn cmd_threshold(config: &Config, output: &Path, opts: &RunOptions) -> Result<Completion> {
    let config = opts.resolve(config)?;
    config.threshold_plan()?;
    let destination = Destination::create(output)?;
    let start = Instant::now();
    let rows = opts.install(|| threshold(&config))??;
    let flags: Vec<bool> = rows.iter().map(ThresholdRow::converged).collect();
    let errors = rows
        .iter()
        .enumerate()
        .filter_map(|(i, r)| r.outcome.as_ref().err().map(|e| format!("row {i}: {e}")))
        .collect();
    let run = run_section("threshold", output, opts, start, flags.clone(), errors);
    let table = rows
        .iter()
        .map(|r| output::threshold_row(r.swept_value, &r.outcome))
        .collect();
    destination.finish(table, &output::THRESHOLD_COLUMNS, &config, run)?;
    Ok(Completion::from_flags(&flags))
}

/// Runs every job of a preset, writing `<job>.csv` files into `dir`.
pub fn cmd_preset(name: &str, dir: &Path, opts: &RunOptions) -> Result<Completion> {
    let jobs = presets::jobs(name)?;
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    for job in &jobs {
        let path = dir.join(format!("{}.csv", job.name));
        Destination::create(&path)?;
    }
    let mut completion = Completion::AllConverged;
    for job in &jobs {
        let path = dir.join(format!("{}.csv", job.name));
        let done = match job.kind {
            JobKind::Sweep => cmd_sweep(&job.config, &path, opts)?,
            JobKind::Threshold => cmd_threshold(&job.config, &path, opts)?,
        };
        completion = completion.and(done);
    }
    Ok(completion)
}

//! Figure presets: canned parameterizations of the standard figures.
//!
//! A preset name `figN` selects every panel of figure N and `figNx` a single
//! panel. Each panel expands into one job per curve, and every job writes
//! one CSV file. Grid densities are defaults of this tool and are recorded
//! in each manifest.

use udw_harvest::detector::Scenario;
use udw_harvest::harvest::{Quantity, SweptParameter};

use crate::config::{
    Config, DetectorSection, QuadratureSection, ScenarioSection, SweepSection, ThresholdSection,
    ThresholdTarget,
};

/// Energy gap used by every figure.
pub const OMEGA: f64 = 0.1;

/// Points per sweep curve.
pub const SWEEP_POINTS: usize = 61;

/// Points per threshold curve.
pub const THRESHOLD_POINTS: usize = 12;

/// Figure names accepted by `--preset`.
pub const FIGURES: [&str; 9] = [
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9",
];

/// Whether a job is a plain sweep or a threshold search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JobKind {
    Sweep,
    Threshold,
}

/// One curve of a figure panel.
#[derive(Clone, Debug, PartialEq)]
pub struct Job {
    /// File stem of the CSV output, such as `fig2a_dd_1`.
    pub name: String,
    pub kind: JobKind,
    pub config: Config,
}

#[derive(Debug, thiserror::Error)]
#[error("unknown preset {0:?}; expected one of fig1..fig9, optionally followed by a panel letter")]
pub struct UnknownPreset(pub String);

/// Expands a preset name into its jobs.
pub fn jobs(name: &str) -> Result<Vec<Job>, UnknownPreset> {
    let unknown = || UnknownPreset(name.to_owned());
    let (figure, panel) = match name.strip_suffix(|c: char| c.is_ascii_lowercase()) {
        Some(figure) if FIGURES.contains(&figure) => (figure, name[figure.len()..].chars().next()),
        _ if FIGURES.contains(&name) => (name, None),
        _ => return Err(unknown()),
    };
    let panels = panels(figure);
    let selected: Vec<Job> = panels
        .into_iter()
        .filter(|(letter, _)| panel.is_none() || panel == Some(*letter))
        .flat_map(|(_, jobs)| jobs)
        .collect();
    if selected.is_empty() {
        return Err(unknown());
    }
    Ok(selected)
}

fn panels(figure: &str) -> Vec<(char, Vec<Job>)> {
    match figure {
        "fig1" => vec![('a', fig1a()), ('b', fig1b())],
        "fig2" => vec![('a', fig2a()), ('b', fig2b())],
        "fig3" => vec![('a', fig3())],
        "fig4" => vec![('a', fig4())],
        "fig5" => lettered([0.1, 0.5, 1.0], fig5),
        "fig6" => lettered([0.5, 0.8, 1.5], fig6),
        "fig7" => lettered([0.2, 0.5, 1.0], fig7),
        "fig8" => lettered([0.1, 0.5, 1.0], fig8),
        "fig9" => lettered([0.2, 0.5, 1.0], fig9),
        _ => Vec::new(),
    }
}

fn lettered(values: [f64; 3], build: impl Fn(char, f64) -> Vec<Job>) -> Vec<(char, Vec<Job>)> {
    ['a', 'b', 'c']
        .into_iter()
        .zip(values)
        .map(|(k, v)| (k, build(k, v)))
        .collect()
}

/// Formats a parameter value for a file name, `0.5` becoming `0p5`.
fn tag(value: f64) -> String {
    format!("{value}").replace('.', "p")
}

fn config(kind: Scenario, a: f64, dd: f64, dz: f64) -> Config {
    Config {
        scenario: ScenarioSection {
            kind,
            a_sigma: a,
            dd_over_sigma: dd,
            dz_over_sigma: dz,
        },
        detector: DetectorSection { omega_sigma: OMEGA },
        quadrature: QuadratureSection::default(),
        sweep: None,
        threshold: None,
        run: None,
    }
}

fn sweep(
    mut config: Config,
    parameter: SweptParameter,
    (start, stop, points): (f64, f64, usize),
    quantities: &[Quantity],
) -> Config {
    config.sweep = Some(SweepSection {
        parameter,
        grid: None,
        start: Some(start),
        stop: Some(stop),
        points: Some(points),
        quantities: quantities.to_vec(),
    });
    config
}

fn threshold(
    mut config: Config,
    target: ThresholdTarget,
    bracket: [f64; 2],
    range: (f64, f64),
) -> Config {
    config = sweep(
        config,
        SweptParameter::DeltaZ,
        (range.0, range.1, THRESHOLD_POINTS),
        &[],
    );
    config.threshold = Some(ThresholdSection {
        target,
        bracket,
        tol: udw_harvest::harvest::DEFAULT_THRESHOLD_TOL,
    });
    config
}

fn sweep_job(name: String, config: Config) -> Job {
    Job {
        name,
        kind: JobKind::Sweep,
        config,
    }
}

fn threshold_job(name: String, config: Config) -> Job {
    Job {
        name,
        kind: JobKind::Threshold,
        config,
    }
}

/// Scenario matching an acceleration, the static pair when it vanishes.
fn moving(kind: Scenario, a: f64) -> Scenario {
    if a == 0.0 {
        Scenario::Inertial
    } else {
        kind
    }
}

const HARVEST: [Quantity; 3] = [Quantity::P, Quantity::X, Quantity::Concurrence];
const DZ_RANGE: (f64, f64, usize) = (0.02, 4.0, SWEEP_POINTS);
const DD_MAX_BRACKET: [f64; 2] = [0.2, 4.0];
const A_MAX_BRACKET: [f64; 2] = [0.02, 2.0];
const THRESHOLD_DZ: (f64, f64) = (0.2, 3.0);

/// Transition probability against acceleration for three distances.
fn fig1a() -> Vec<Job> {
    [0.1, 0.5, 1.0]
        .into_iter()
        .map(|dz| {
            let c = sweep(
                config(Scenario::Parallel, 1.0, 1.0, dz),
                SweptParameter::A,
                (0.0, 2.0, SWEEP_POINTS),
                &[Quantity::P],
            );
            sweep_job(format!("fig1a_dz_{}", tag(dz)), c)
        })
        .collect()
}

/// Transition probability against distance for four accelerations.
fn fig1b() -> Vec<Job> {
    [0.0, 0.5, 1.0, 1.2]
        .into_iter()
        .map(|a| {
            let c = sweep(
                config(moving(Scenario::Parallel, a), a, 1.0, 1.0),
                SweptParameter::DeltaZ,
                DZ_RANGE,
                &[Quantity::P],
            );
            sweep_job(format!("fig1b_a_{}", tag(a)), c)
        })
        .collect()
}

/// Static concurrence against distance for three separations.
fn fig2a() -> Vec<Job> {
    [0.5, 1.0, 1.5]
        .into_iter()
        .map(|dd| {
            let c = sweep(
                config(Scenario::Inertial, 0.0, dd, 1.0),
                SweptParameter::DeltaZ,
                DZ_RANGE,
                &HARVEST,
            );
            sweep_job(format!("fig2a_dd_{}", tag(dd)), c)
        })
        .collect()
}

/// Static concurrence against separation for three distances.
fn fig2b() -> Vec<Job> {
    [0.1, 0.5, 1.5]
        .into_iter()
        .map(|dz| {
            let c = sweep(
                config(Scenario::Inertial, 0.0, 1.0, dz),
                SweptParameter::DeltaD,
                (0.05, 3.0, SWEEP_POINTS),
                &HARVEST,
            );
            sweep_job(format!("fig2b_dz_{}", tag(dz)), c)
        })
        .collect()
}

/// Static `|X|` and transition probability against distance.
fn fig3() -> Vec<Job> {
    let c = sweep(
        config(Scenario::Inertial, 0.0, 1.0, 1.0),
        SweptParameter::DeltaZ,
        DZ_RANGE,
        &HARVEST,
    );
    vec![sweep_job("fig3".into(), c)]
}

/// Static separation threshold against distance, with a far-from-boundary
/// reference.
fn fig4() -> Vec<Job> {
    let curve = threshold(
        config(Scenario::Inertial, 0.0, 1.0, 1.0),
        ThresholdTarget::DdMax,
        DD_MAX_BRACKET,
        (0.2, 5.0),
    );
    let mut reference = threshold(
        config(Scenario::Inertial, 0.0, 1.0, 1.0),
        ThresholdTarget::DdMax,
        DD_MAX_BRACKET,
        (0.2, 5.0),
    );
    if let Some(s) = reference.sweep.as_mut() {
        *s = SweepSection {
            grid: Some(vec![100.0]),
            start: None,
            stop: None,
            points: None,
            ..s.clone()
        };
    }
    vec![
        threshold_job("fig4".into(), curve),
        threshold_job("fig4_free".into(), reference),
    ]
}

fn scenario_curves(panel: String, build: impl Fn(Scenario) -> Config) -> Vec<Job> {
    std::iter::once(Scenario::Inertial)
        .chain(Scenario::ACCELERATED)
        .map(|s| sweep_job(format!("{panel}_{}", s.name()), build(s)))
        .collect()
}

/// Concurrence against distance at `Δd = 1` for one acceleration.
fn fig5(panel: char, a: f64) -> Vec<Job> {
    scenario_curves(format!("fig5{panel}"), |s| {
        let a = if s == Scenario::Inertial { 0.0 } else { a };
        sweep(
            config(s, a, 1.0, 1.0),
            SweptParameter::DeltaZ,
            DZ_RANGE,
            &HARVEST,
        )
    })
}

/// Concurrence against distance at `a = 0.5` for one separation.
fn fig6(panel: char, dd: f64) -> Vec<Job> {
    scenario_curves(format!("fig6{panel}"), |s| {
        let a = if s == Scenario::Inertial { 0.0 } else { 0.5 };
        sweep(
            config(s, a, dd, 1.0),
            SweptParameter::DeltaZ,
            DZ_RANGE,
            &HARVEST,
        )
    })
}

/// Concurrence against acceleration at `Δz = 0.5` for one separation.
fn fig7(panel: char, dd: f64) -> Vec<Job> {
    Scenario::ACCELERATED
        .into_iter()
        .map(|s| {
            let c = sweep(
                config(s, 1.0, dd, 0.5),
                SweptParameter::A,
                (0.0, 2.0, SWEEP_POINTS),
                &HARVEST,
            );
            sweep_job(format!("fig7{panel}_{}", s.name()), c)
        })
        .collect()
}

/// Separation threshold against distance for one acceleration, with the
/// static curve for comparison.
fn fig8(panel: char, a: f64) -> Vec<Job> {
    std::iter::once(Scenario::Inertial)
        .chain(Scenario::ACCELERATED)
        .map(|s| {
            let a = if s == Scenario::Inertial { 0.0 } else { a };
            let c = threshold(
                config(s, a, 1.0, 1.0),
                ThresholdTarget::DdMax,
                DD_MAX_BRACKET,
                THRESHOLD_DZ,
            );
            threshold_job(format!("fig8{panel}_{}", s.name()), c)
        })
        .collect()
}

/// Acceleration threshold against distance for one separation.
fn fig9(panel: char, dd: f64) -> Vec<Job> {
    Scenario::ACCELERATED
        .into_iter()
        .map(|s| {
            let c = threshold(
                config(s, 1.0, dd, 1.0),
                ThresholdTarget::AMax,
                A_MAX_BRACKET,
                THRESHOLD_DZ,
            );
            threshold_job(format!("fig9{panel}_{}", s.name()), c)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_resolves() {
        for figure in FIGURES {
            let jobs = jobs(figure).unwrap();
            assert!(!jobs.is_empty(), "{figure}");
            for job in jobs {
                let resolved = job.config.resolved().unwrap();
                match job.kind {
                    JobKind::Sweep => {
                        resolved.sweep_spec().unwrap();
                    }
                    JobKind::Threshold => {
                        resolved.threshold_plan().unwrap();
                    }
                }
            }
        }
    }

    #[test]
    fn panels_select_a_subset() {
        assert_eq!(jobs("fig2a").unwrap().len(), 3);
        assert_eq!(jobs("fig2").unwrap().len(), 6);
        assert_eq!(jobs("fig7b").unwrap().len(), 3);
        assert_eq!(jobs("fig8").unwrap().len(), 12);
        assert!(jobs("fig3b").is_err());
        assert!(jobs("fig10").is_err());
        assert!(jobs("fig").is_err());
    }

    #[test]
    fn job_names_are_unique() {
        let mut names: Vec<String> = FIGURES
            .iter()
            .flat_map(|f| jobs(f).unwrap())
            .map(|j| j.name)
            .collect();
        let n = names.len();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), n);
    }
}

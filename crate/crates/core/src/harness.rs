//! Parameter sweeps over seeded, paired trials and their CSV/SVG output.
//!
//! Files written by [`write_results`]:
//!
//! * `trials.csv`: one row per completed trial, ordered by
//!   (value index, scheme, trial index). Contains no wall-clock data, so
//!   repeated sweeps produce identical files.
//! * `aggregate.csv`: per (value, scheme) mean and standard error of the
//!   makespan plus completion rate, computed from `trials.csv` alone.
//! * `runtime.csv`: per-trial optimizer wall-clock times, same ordering.
//! * `failures.csv`: trials that could not run, with the reason.
//! * `makespan.svg` (optional): mean makespan with standard-error bars.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comms::SchemeKind;
use crate::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::sim::{run_trial, TrialResult};

pub const DEFAULT_TRIALS: u64 = 100;
pub const FAST_TRIALS: u64 = 20;

/// Derived sweep parameters on top of the raw config fields.
pub const DERIVED_PARAMETERS: [&str; 4] = [
    "agents_subjects",
    "comm_frequency",
    "bandwidth_range",
    "bandwidth_ratio",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials_per_value: u64,
    #[serde(default = "all_schemes")]
    pub schemes: Vec<SchemeKind>,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub base: ScenarioConfig,
}

fn default_trials() -> u64 {
    DEFAULT_TRIALS
}

fn all_schemes() -> Vec<SchemeKind> {
    SchemeKind::ALL.to_vec()
}

impl SweepSpec {
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|message| Error::Parse {
            path: path.to_path_buf(),
            message,
        })
    }

    /// Checks the parameter name and every value against the base config.
    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("sweep lists no schemes".into()));
        }
        for &v in &self.values {
            apply_parameter(&self.base, &self.parameter, v)?;
        }
        Ok(())
    }
}

fn format_value(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// `base` with the swept parameter set to `value`.
///
/// * `agents_subjects`: n = m = value / 2, with the bandwidth limit scaled
///   to keep the base ratio B / n.
/// * `comm_frequency`: communication period 1 / value seconds.
/// * `bandwidth_range`: pairwise costs uniform in [1, 1 + value].
/// * `bandwidth_ratio`: B = value * n.
/// * any config field name: that field.
pub fn apply_parameter(base: &ScenarioConfig, parameter: &str, value: f64) -> Result<ScenarioConfig> {
    let mut c = base.clone();
    let bad = |what: &str| Error::InvalidConfig(format!("{parameter} = {value}: {what}"));
    match parameter {
        "agents_subjects" => {
            if value < 2.0 || value.fract() != 0.0 || !(value as u64).is_multiple_of(2) {
                return Err(bad("needs a positive even integer"));
            }
            let half = value as usize / 2;
            let ratio = f64::from(base.bandwidth_limit) / base.n_agents.max(1) as f64;
            c.n_agents = half;
            c.m_subjects = half;
            c.bandwidth_limit = (ratio * half as f64).round() as u32;
        }
        "comm_frequency" => {
            if !(value > 0.0) {
                return Err(bad("needs a positive frequency"));
            }
            c.comm_period = 1.0 / value;
        }
        "bandwidth_range" => {
            if value < 0.0 || value.fract() != 0.0 {
                return Err(bad("needs a non-negative integer"));
            }
            c.pairwise_bandwidth_range = [1, 1 + value as u32];
        }
        "bandwidth_ratio" => {
            if value < 0.0 {
                return Err(bad("needs a non-negative ratio"));
            }
            c.bandwidth_limit = (value * c.n_agents as f64).round() as u32;
        }
        field => c.set_field(field, &format_value(value))?,
    }
    c.validate()?;
    Ok(c)
}

/// Seed shared by every scheme for trial `trial` of value `value_index`.
pub fn trial_seed(base_seed: u64, value_index: usize, trial: u64) -> u64 {
    // splitmix64 finalizer over the packed coordinates
    let mut z = base_seed
        .wrapping_add((value_index as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15))
        .wrapping_add(trial.wrapping_mul(0xbf58_476d_1ce4_e5b9))
        .wrapping_add(0x94d0_49bb_1331_11eb);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRow {
    pub value_index: usize,
    pub value: f64,
    pub scheme: SchemeKind,
    pub trial: u64,
    pub seed: u64,
    pub config_digest: String,
    pub makespan: f64,
    pub timed_out: bool,
    pub agent_subject_collisions: u64,
    pub agent_agent_collisions: u64,
    pub epochs: u64,
    pub mean_bandwidth_used: f64,
    pub max_bandwidth_used: u32,
    pub bandwidth_limit: u32,
    pub total_deliveries: u64,
    pub stopped_time: f64,
}

impl TrialRow {
    pub const HEADER: [&'static str; 16] = [
        "value_index",
        "value",
        "scheme",
        "trial",
        "seed",
        "config_digest",
        "makespan",
        "timed_out",
        "agent_subject_collisions",
        "agent_agent_collisions",
        "epochs",
        "mean_bandwidth_used",
        "max_bandwidth_used",
        "bandwidth_limit",
        "total_deliveries",
        "stopped_time",
    ];

    fn new(value_index: usize, value: f64, trial: u64, r: &TrialResult) -> Self {
        Self {
            value_index,
            value,
            scheme: r.scheme,
            trial,
            seed: r.seed,
            config_digest: r.config_digest.clone(),
            makespan: r.makespan,
            timed_out: r.timed_out,
            agent_subject_collisions: r.agent_subject_collisions,
            agent_agent_collisions: r.agent_agent_collisions,
            epochs: r.epochs,
            mean_bandwidth_used: r.mean_bandwidth_used,
            max_bandwidth_used: r.max_bandwidth_used,
            bandwidth_limit: r.bandwidth_limit,
            total_deliveries: r.total_deliveries,
            stopped_time: r.stopped_time,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimeRow {
    pub value_index: usize,
    pub value: f64,
    pub scheme: SchemeKind,
    pub trial: u64,
    pub mean_optimizer_time: f64,
    pub max_optimizer_time: f64,
}

impl RuntimeRow {
    pub const HEADER: [&'static str; 6] = [
        "value_index",
        "value",
        "scheme",
        "trial",
        "mean_optimizer_time",
        "max_optimizer_time",
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRow {
    pub value_index: usize,
    pub value: f64,
    pub scheme: SchemeKind,
    pub trial: u64,
    pub seed: u64,
    pub reason: String,
}

impl FailureRow {
    pub const HEADER: [&'static str; 6] = ["value_index", "value", "scheme", "trial", "seed", "reason"];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub value_index: usize,
    pub value: f64,
    pub scheme: SchemeKind,
    pub trials: u64,
    /// Mean makespan with timed-out trials counted at the time limit.
    pub mean_makespan: f64,
    pub stderr_makespan: f64,
    pub completion_rate: f64,
    pub mean_agent_subject_collisions: f64,
    pub mean_bandwidth_used: f64,
    pub max_bandwidth_used: u32,
    pub bandwidth_limit: u32,
}

impl AggregateRow {
    pub const HEADER: [&'static str; 11] = [
        "value_index",
        "value",
        "scheme",
        "trials",
        "mean_makespan",
        "stderr_makespan",
        "completion_rate",
        "mean_agent_subject_collisions",
        "mean_bandwidth_used",
        "max_bandwidth_used",
        "bandwidth_limit",
    ];
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepResults {
    pub parameter: String,
    pub trials: Vec<TrialRow>,
    pub runtime: Vec<RuntimeRow>,
    pub failures: Vec<FailureRow>,
}

/// Runs every (value, scheme, trial) combination, in parallel, and returns
/// rows in (value index, scheme, trial index) order. Trials that fail are
/// logged and returned as failure rows.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResults> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (vi, &value) in spec.values.iter().enumerate() {
        let config = apply_parameter(&spec.base, &spec.parameter, value)?;
        for &scheme in &spec.schemes {
            for trial in 0..spec.trials_per_value {
                let seed = trial_seed(spec.base_seed, vi, trial);
                jobs.push((vi, value, scheme, trial, ScenarioConfig { seed, ..config.clone() }));
            }
        }
    }

    let outcomes: Vec<_> = jobs
        .par_iter()
        .map(|(vi, value, scheme, trial, config)| {
            (*vi, *value, *scheme, *trial, config.seed, run_trial(config, *scheme))
        })
        .collect();

    let mut out = SweepResults {
        parameter: spec.parameter.clone(),
        ..SweepResults::default()
    };
    for (vi, value, scheme, trial, seed, outcome) in outcomes {
        match outcome {
            Ok(r) => {
                out.runtime.push(RuntimeRow {
                    value_index: vi,
                    value,
                    scheme,
                    trial,
                    mean_optimizer_time: r.mean_optimizer_time,
                    max_optimizer_time: r.max_optimizer_time,
                });
                out.trials.push(TrialRow::new(vi, value, trial, &r));
            }
            Err(e) => {
                log::warn!(
                    "{}={} {} trial {} (seed {}) excluded: {}",
                    spec.parameter,
                    value,
                    scheme,
                    trial,
                    seed,
                    e
                );
                out.failures.push(FailureRow {
                    value_index: vi,
                    value,
                    scheme,
                    trial,
                    seed,
                    reason: e.to_string(),
                });
            }
        }
    }
    Ok(out)
}

/// Per (value, scheme) statistics, in first-appearance order of the rows.
pub fn aggregate(rows: &[TrialRow]) -> Vec<AggregateRow> {
    let mut keys: Vec<(usize, SchemeKind)> = Vec::new();
    for r in rows {
        if !keys.contains(&(r.value_index, r.scheme)) {
            keys.push((r.value_index, r.scheme));
        }
    }
    keys.into_iter()
        .map(|(vi, scheme)| {
            let group: Vec<&TrialRow> = rows
                .iter()
                .filter(|r| r.value_index == vi && r.scheme == scheme)
                .collect();
            let n = group.len() as f64;
            let mean = |f: &dyn Fn(&TrialRow) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / n;
            let mean_makespan = mean(&|r| r.makespan);
            let stderr_makespan = if group.len() > 1 {
                let var = group.iter().map(|r| (r.makespan - mean_makespan).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            AggregateRow {
                value_index: vi,
                value: group[0].value,
                scheme,
                trials: group.len() as u64,
                mean_makespan,
                stderr_makespan,
                completion_rate: mean(&|r| if r.timed_out { 0.0 } else { 1.0 }),
                mean_agent_subject_collisions: mean(&|r| r.agent_subject_collisions as f64),
                mean_bandwidth_used: mean(&|r| r.mean_bandwidth_used),
                max_bandwidth_used: group.iter().map(|r| r.max_bandwidth_used).max().unwrap_or(0),
                bandwidth_limit: group.iter().map(|r| r.bandwidth_limit).min().unwrap_or(0),
            }
        })
        .collect()
}

fn csv_error(path: &Path) -> impl FnOnce(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn write_csv<T: Serialize>(path: &Path, header: &[&str], rows: &[T]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(csv_error(path))?;
    w.write_record(header).map_err(csv_error(path))?;
    for row in rows {
        w.serialize(row).map_err(csv_error(path))?;
    }
    w.flush().map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).map_err(csv_error(path))?;
    r.deserialize()
        .collect::<std::result::Result<Vec<T>, _>>()
        .map_err(csv_error(path))
}

/// Paths written by [`write_results`].
#[derive(Debug, Clone, PartialEq)]
pub struct OutputFiles {
    pub trials: PathBuf,
    pub aggregate: PathBuf,
    pub runtime: PathBuf,
    pub failures: PathBuf,
    pub svg: Option<PathBuf>,
}

pub fn write_results(results: &SweepResults, dir: &Path, svg: bool) -> Result<OutputFiles> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let files = OutputFiles {
        trials: dir.join("trials.csv"),
        aggregate: dir.join("aggregate.csv"),
        runtime: dir.join("runtime.csv"),
        failures: dir.join("failures.csv"),
        svg: svg.then(|| dir.join("makespan.svg")),
    };
    let agg = aggregate(&results.trials);
    write_csv(&files.trials, &TrialRow::HEADER, &results.trials)?;
    write_csv(&files.aggregate, &AggregateRow::HEADER, &agg)?;
    write_csv(&files.runtime, &RuntimeRow::HEADER, &results.runtime)?;
    write_csv(&files.failures, &FailureRow::HEADER, &results.failures)?;
    if let Some(path) = &files.svg {
        fs::write(path, render_svg(&results.parameter, &agg)).map_err(|source| Error::Io {
            path: path.clone(),
            source,
        })?;
    }
    Ok(files)
}

fn scheme_color(s: SchemeKind) -> &'static str {
    match s {
        SchemeKind::Iknap => "#1f77b4",
        SchemeKind::NoComm => "#ff7f0e",
        SchemeKind::BroadcastBaseline => "#2ca02c",
    }
}

/// Line chart of mean makespan against the swept value, one line per
/// scheme, with standard-error bars.
pub fn render_svg(parameter: &str, rows: &[AggregateRow]) -> String {
    let (w, h, pad) = (640.0, 400.0, 60.0);
    let mut svg = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" font-family=\"sans-serif\" font-size=\"12\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    if rows.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.value).collect();
    let lo_v = rows
        .iter()
        .map(|r| r.mean_makespan - r.stderr_makespan)
        .fold(f64::INFINITY, f64::min);
    let hi_v = rows
        .iter()
        .map(|r| r.mean_makespan + r.stderr_makespan)
        .fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = (
        xs.iter().cloned().fold(f64::INFINITY, f64::min),
        xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
    );
    let xr = if x1 > x0 { x1 - x0 } else { 1.0 };
    let (y0, y1) = if hi_v > lo_v {
        (lo_v, hi_v)
    } else {
        (lo_v - 1.0, hi_v + 1.0)
    };
    let px = |x: f64| pad + (x - x0) / xr * (w - 2.0 * pad);
    let py = |y: f64| h - pad - (y - y0) / (y1 - y0) * (h - 2.0 * pad);

    let _ = writeln!(
        svg,
        "<line x1=\"{pad}\" y1=\"{b}\" x2=\"{r}\" y2=\"{b}\" stroke=\"black\"/>\n<line x1=\"{pad}\" y1=\"{pad}\" x2=\"{pad}\" y2=\"{b}\" stroke=\"black\"/>",
        b = h - pad,
        r = w - pad
    );
    let _ = writeln!(
        svg,
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{parameter}</text>",
        w / 2.0,
        h - 15.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"15\" y=\"{}\" transform=\"rotate(-90 15 {})\" text-anchor=\"middle\">makespan (s)</text>",
        h / 2.0,
        h / 2.0
    );
    for (y, label) in [(y0, y0), (y1, y1)] {
        let _ = writeln!(
            svg,
            "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{label:.1}</text>",
            pad - 5.0,
            py(y) + 4.0
        );
    }
    let mut seen_x: Vec<f64> = Vec::new();
    for &x in &xs {
        if !seen_x.contains(&x) {
            seen_x.push(x);
            let _ = writeln!(
                svg,
                "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>",
                px(x),
                h - pad + 15.0,
                format_value(x)
            );
        }
    }

    let mut schemes: Vec<SchemeKind> = Vec::new();
    for r in rows {
        if !schemes.contains(&r.scheme) {
            schemes.push(r.scheme);
        }
    }
    for (i, &s) in schemes.iter().enumerate() {
        let color = scheme_color(s);
        let mut pts: Vec<&AggregateRow> = rows.iter().filter(|r| r.scheme == s).collect();
        pts.sort_by(|a, b| a.value.total_cmp(&b.value));
        let line: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.value), py(r.mean_makespan)))
            .collect();
        let _ = writeln!(
            svg,
            "<polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"2\" points=\"{}\"/>",
            line.join(" ")
        );
        for r in pts {
            let x = px(r.value);
            let _ = writeln!(
                svg,
                "<line x1=\"{x:.2}\" y1=\"{:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"{color}\"/>\n<circle cx=\"{x:.2}\" cy=\"{:.2}\" r=\"3\" fill=\"{color}\"/>",
                py(r.mean_makespan - r.stderr_makespan),
                py(r.mean_makespan + r.stderr_makespan),
                py(r.mean_makespan)
            );
        }
        let ly = pad + 16.0 * i as f64;
        let _ = writeln!(
            svg,
            "<rect x=\"{}\" y=\"{}\" width=\"12\" height=\"12\" fill=\"{color}\"/><text x=\"{}\" y=\"{}\">{s}</text>",
            w - pad - 90.0,
            ly - 10.0,
            w - pad - 72.0,
            ly
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derived_parameters() {
        let base = ScenarioConfig::default();
        let c = apply_parameter(&base, "agents_subjects", 20.0).unwrap();
        assert_eq!((c.n_agents, c.m_subjects, c.bandwidth_limit), (10, 10, 50));
        let c = apply_parameter(&base, "comm_frequency", 2.0).unwrap();
        assert_eq!(c.comm_period, 0.5);
        let c = apply_parameter(&base, "bandwidth_range", 9.0).unwrap();
        assert_eq!(c.pairwise_bandwidth_range, [1, 10]);
        let c = apply_parameter(&base, "bandwidth_ratio", 2.0).unwrap();
        assert_eq!(c.bandwidth_limit, 10);
        let c = apply_parameter(&base, "n_walls", 3.0).unwrap();
        assert_eq!(c.n_walls, 3);
        let c = apply_parameter(&base, "alpha", 0.5).unwrap();
        assert_eq!(c.alpha, 0.5);
    }

    #[test]
    fn bad_parameters_rejected() {
        let base = ScenarioConfig::default();
        assert!(matches!(
            apply_parameter(&base, "warp", 1.0),
            Err(Error::UnknownParameter(_))
        ));
        assert!(apply_parameter(&base, "agents_subjects", 5.0).is_err());
        assert!(apply_parameter(&base, "comm_frequency", 0.0).is_err());
        assert!(apply_parameter(&base, "alpha", -1.0).is_err());
    }

    #[test]
    fn seeds_are_paired_and_distinct() {
        let a = trial_seed(7, 0, 0);
        assert_eq!(a, trial_seed(7, 0, 0));
        let mut all: Vec<u64> = (0..5).flat_map(|v| (0..50).map(move |t| trial_seed(7, v, t))).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 250);
        assert_ne!(trial_seed(7, 0, 0), trial_seed(8, 0, 0));
    }

    #[test]
    fn spec_parses_with_defaults() {
        let spec =
            SweepSpec::from_toml_str("parameter = \"alpha\"\nvalues = [0.01, 0.1]\n[base]\nn_walls = 4\n").unwrap();
        assert_eq!(spec.trials_per_value, DEFAULT_TRIALS);
        assert_eq!(spec.schemes, SchemeKind::ALL.to_vec());
        assert_eq!(spec.base.n_walls, 4);
        spec.validate().unwrap();
        assert!(SweepSpec::from_toml_str("parameter = \"alpha\"\nvalues = [1]\nbogus = 1\n").is_err());
    }

    fn row(vi: usize, scheme: SchemeKind, trial: u64, makespan: f64, timed_out: bool) -> TrialRow {
        TrialRow {
            value_index: vi,
            value: vi as f64,
            scheme,
            trial,
            seed: trial,
            config_digest: "d".into(),
            makespan,
            timed_out,
            agent_subject_collisions: 1,
            agent_agent_collisions: 0,
            epochs: 10,
            mean_bandwidth_used: 3.0,
            max_bandwidth_used: 5,
            bandwidth_limit: 25,
            total_deliveries: 4,
            stopped_time: 0.5,
        }
    }

    #[test]
    fn aggregate_statistics() {
        let rows = vec![
            row(0, SchemeKind::Iknap, 0, 10.0, false),
            row(0, SchemeKind::Iknap, 1, 14.0, false),
            row(0, SchemeKind::Iknap, 2, 120.0, true),
            row(0, SchemeKind::NoComm, 0, 11.0, false),
        ];
        let agg = aggregate(&rows);
        assert_eq!(agg.len(), 2);
        let a = &agg[0];
        assert_eq!(a.trials, 3);
        assert!((a.mean_makespan - 48.0).abs() < 1e-12);
        // sample variance of {10, 14, 120} is 3892
        assert!((a.stderr_makespan - (3892.0f64 / 3.0).sqrt()).abs() < 1e-9);
        assert!((a.completion_rate - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(agg[1].stderr_makespan, 0.0);
    }

    #[test]
    fn svg_mentions_every_scheme() {
        let rows = vec![
            row(0, SchemeKind::Iknap, 0, 10.0, false),
            row(1, SchemeKind::Iknap, 0, 12.0, false),
            row(0, SchemeKind::BroadcastBaseline, 0, 11.0, false),
        ];
        let svg = render_svg("alpha", &aggregate(&rows));
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert!(svg.contains("iknap") && svg.contains("broadcast"));
        assert!(render_svg("alpha", &[]).contains("</svg>"));
    }
}

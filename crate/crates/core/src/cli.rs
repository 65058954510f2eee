//! Configuration files, subcommands and CSV output.
//!
//! # Config schema (TOML)
//!
//! ```toml
//! [topology]
//! kind = "single_hop"        # links = 4
//! # kind = "switch"          # n = 3
//! # kind = "conflict_graph"  # links = 5, edges = [[0, 1], [1, 2]]
//!
//! [channel]                  # scalar parameters apply to every link
//! kind = "on_off"            # rate = 1, q = [0.6, 0.5, 0.4, 0.3]
//! # kind = "constant"        # rate = 1
//! # kind = "discrete"        # values = [0, 1, 2], probs = [0.2, 0.5, 0.3]
//! # kind = "mixed"           # links = [{ kind = "constant", rate = 4 }, ...]
//!
//! [arrivals]
//! kind = "bernoulli"         # p = 0.225
//! # kind = "constant"        # a = 1
//! # kind = "bursty"          # k = 5, scale = 1: 2*k*scale packets w.p. 1/k
//! # kind = "discrete" | "mixed" as for the channel
//!
//! [policy]
//! kind = "rsg"               # mws | rsg | rsg_variant | round_robin
//! alpha = 1.0                # scalar or per-link list, default 1
//! beta = [1.0, 0.0]          # default 1
//! gamma = 2.0                # default 0
//! tie_rule = "lowest_index"  # or "seeded_uniform"
//!
//! [run]                      # optional, every field has a default
//! horizon = 1000000
//! warmup = 10000
//! seed = 0
//! replications = 8
//! ```

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use crate::engine::{self, BoundsReport, Comparison, ExperimentStats, SweepRow};
use crate::error::Error;
use crate::model::*;
use crate::stats::{Estimate, LinkStats, RunStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_OUT_OF_REGION: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error(transparent)]
    Invalid(#[from] Error),
    #[error("arrival rates lie outside the capacity region")]
    OutOfRegion,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Parse { .. } | CliError::Invalid(_) => EXIT_INVALID,
            CliError::OutOfRegion => EXIT_OUT_OF_REGION,
        }
    }
}

#[derive(Deserialize, Debug, Clone)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T: Clone> OneOrMany<T> {
    fn expand(&self, field: &'static str, links: usize) -> Result<Vec<T>, Error> {
        match self {
            OneOrMany::One(v) => Ok(vec![v.clone(); links]),
            OneOrMany::Many(v) if v.len() == links => Ok(v.clone()),
            OneOrMany::Many(v) => Err(Error::DimensionMismatch {
                field,
                expected: links,
                found: v.len(),
            }),
        }
    }
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    topology: TopologySection,
    channel: ChannelSection,
    arrivals: ArrivalSection,
    policy: PolicySection,
    #[serde(default)]
    run: RunSection,
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum TopologySection {
    SingleHop { links: usize },
    Switch { n: usize },
    ConflictGraph {
        links: usize,
        #[serde(default)]
        edges: Vec<(usize, usize)>,
    },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ChannelEntry {
    Constant { rate: Count },
    OnOff { rate: Count, q: f64 },
    Discrete { values: Vec<Count>, probs: Vec<f64> },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ChannelSection {
    Constant { rate: OneOrMany<Count> },
    OnOff { rate: OneOrMany<Count>, q: OneOrMany<f64> },
    Discrete { values: Vec<Count>, probs: Vec<f64> },
    Mixed { links: Vec<ChannelEntry> },
}

#[derive(Deserialize, Debug, Clone)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ArrivalEntry {
    Bernoulli { p: f64 },
    Constant { a: Count },
    Bursty {
        k: Count,
        #[serde(default = "one")]
        scale: Count,
    },
    Discrete { values: Vec<Count>, probs: Vec<f64> },
}

#[derive(Deserialize, Debug)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum ArrivalSection {
    Bernoulli { p: OneOrMany<f64> },
    Constant { a: OneOrMany<Count> },
    Bursty {
        k: OneOrMany<Count>,
        #[serde(default = "one_of")]
        scale: OneOrMany<Count>,
    },
    Discrete { values: Vec<Count>, probs: Vec<f64> },
    Mixed { links: Vec<ArrivalEntry> },
}

fn one() -> Count {
    1
}

fn one_of() -> OneOrMany<Count> {
    OneOrMany::One(1)
}

fn unit_weight() -> OneOrMany<f64> {
    OneOrMany::One(1.0)
}

#[derive(Deserialize, Debug, Clone, Copy)]
#[serde(rename_all = "snake_case")]
enum PolicyKindField {
    Mws,
    Rsg,
    RsgVariant,
    RoundRobin,
}

#[derive(Deserialize, Debug, Clone, Copy, Default)]
#[serde(rename_all = "snake_case")]
enum TieRuleField {
    #[default]
    LowestIndex,
    SeededUniform,
}

#[derive(Deserialize, Debug)]
#[serde(deny_unknown_fields)]
struct PolicySection {
    kind: PolicyKindField,
    #[serde(default = "unit_weight")]
    alpha: OneOrMany<f64>,
    #[serde(default = "unit_weight")]
    beta: OneOrMany<f64>,
    #[serde(default)]
    gamma: f64,
    #[serde(default)]
    tie_rule: TieRuleField,
}

#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct RunSection {
    horizon: Option<u64>,
    warmup: Option<u64>,
    seed: Option<u64>,
    replications: Option<usize>,
}

fn discrete(values: &[Count], probs: &[f64], what: &'static str, link: usize) -> Result<DiscreteDist, Error> {
    DiscreteDist::new(values, probs).map_err(|reason| Error::InvalidDistribution { what, link, reason })
}

impl ChannelEntry {
    fn build(&self, link: usize) -> Result<ChannelDist, Error> {
        Ok(match self {
            ChannelEntry::Constant { rate } => ChannelDist::Constant(*rate),
            ChannelEntry::OnOff { rate, q } => ChannelDist::OnOff { rate: *rate, q: *q },
            ChannelEntry::Discrete { values, probs } => ChannelDist::Discrete(discrete(values, probs, "channel", link)?),
        })
    }
}

impl ArrivalEntry {
    fn build(&self, link: usize) -> Result<ArrivalDist, Error> {
        Ok(match self {
            ArrivalEntry::Bernoulli { p } => ArrivalDist::Bernoulli { p: *p },
            ArrivalEntry::Constant { a } => ArrivalDist::Constant(*a),
            ArrivalEntry::Bursty { k, scale } => ArrivalDist::Bursty { k: *k, scale: *scale },
            ArrivalEntry::Discrete { values, probs } => ArrivalDist::Discrete(discrete(values, probs, "arrival", link)?),
        })
    }
}

impl ChannelSection {
    fn entries(&self, links: usize) -> Result<Vec<ChannelEntry>, Error> {
        Ok(match self {
            ChannelSection::Constant { rate } => rate
                .expand("channel.rate", links)?
                .into_iter()
                .map(|rate| ChannelEntry::Constant { rate })
                .collect(),
            ChannelSection::OnOff { rate, q } => rate
                .expand("channel.rate", links)?
                .into_iter()
                .zip(q.expand("channel.q", links)?)
                .map(|(rate, q)| ChannelEntry::OnOff { rate, q })
                .collect(),
            ChannelSection::Discrete { values, probs } => vec![
                ChannelEntry::Discrete {
                    values: values.clone(),
                    probs: probs.clone(),
                };
                links
            ],
            ChannelSection::Mixed { links } => links.clone(),
        })
    }
}

impl ArrivalSection {
    fn entries(&self, links: usize) -> Result<Vec<ArrivalEntry>, Error> {
        Ok(match self {
            ArrivalSection::Bernoulli { p } => p
                .expand("arrivals.p", links)?
                .into_iter()
                .map(|p| ArrivalEntry::Bernoulli { p })
                .collect(),
            ArrivalSection::Constant { a } => a
                .expand("arrivals.a", links)?
                .into_iter()
                .map(|a| ArrivalEntry::Constant { a })
                .collect(),
            ArrivalSection::Bursty { k, scale } => k
                .expand("arrivals.k", links)?
                .into_iter()
                .zip(scale.expand("arrivals.scale", links)?)
                .map(|(k, scale)| ArrivalEntry::Bursty { k, scale })
                .collect(),
            ArrivalSection::Discrete { values, probs } => vec![
                ArrivalEntry::Discrete {
                    values: values.clone(),
                    probs: probs.clone(),
                };
                links
            ],
            ArrivalSection::Mixed { links } => links.clone(),
        })
    }
}

impl ConfigFile {
    fn build(self) -> Result<SimConfig, Error> {
        let topology = match self.topology {
            TopologySection::SingleHop { links } => Topology::SingleHop { links },
            TopologySection::Switch { n } => Topology::Switch { n },
            TopologySection::ConflictGraph { links, edges } => Topology::ConflictGraph { links, edges },
        };
        let links = topology.num_links();
        let channel = self
            .channel
            .entries(links)?
            .iter()
            .enumerate()
            .map(|(l, e)| e.build(l))
            .collect::<Result<Vec<_>, _>>()?;
        let arrivals = self
            .arrivals
            .entries(links)?
            .iter()
            .enumerate()
            .map(|(l, e)| e.build(l))
            .collect::<Result<Vec<_>, _>>()?;
        let p = self.policy;
        let policy = PolicySpec {
            kind: match p.kind {
                PolicyKindField::Mws => PolicyKind::Mws,
                PolicyKindField::Rsg => PolicyKind::Rsg,
                PolicyKindField::RsgVariant => PolicyKind::RsgVariant,
                PolicyKindField::RoundRobin => PolicyKind::RoundRobin,
            },
            alpha: p.alpha.expand("policy.alpha", links)?,
            beta: p.beta.expand("policy.beta", links)?,
            gamma: p.gamma,
            tie_rule: match p.tie_rule {
                TieRuleField::LowestIndex => TieRule::LowestIndex,
                TieRuleField::SeededUniform => TieRule::SeededUniform,
            },
        };
        let defaults = RunParams::default();
        let run = RunParams {
            horizon: self.run.horizon.unwrap_or(defaults.horizon),
            warmup: self.run.warmup.unwrap_or(defaults.warmup),
            seed: self.run.seed.unwrap_or(defaults.seed),
            replications: self.run.replications.unwrap_or(defaults.replications),
        };
        Ok(SimConfig {
            topology,
            channel: ChannelModel(channel),
            arrivals: ArrivalModel(arrivals),
            policy,
            run,
        })
    }
}

/// Parses and validates config text; `origin` labels error messages.
pub fn parse_config_str(text: &str, origin: &Path) -> Result<SimConfig, CliError> {
    let file: ConfigFile = toml::from_str(text).map_err(|e| CliError::Parse {
        path: origin.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(validate_config(&file.build()?)?)
}

pub fn parse_config(path: &Path) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config_str(&text, path)
}

/// Parses `"0,0.5,2"` or `"pow2:a..b"` (inclusive integer exponents).
pub fn parse_gamma_spec(spec: &str) -> Result<Vec<f64>, Error> {
    let invalid = |reason: String| Error::InvalidParameter { name: "gamma", reason };
    if let Some(range) = spec.trim().strip_prefix("pow2:") {
        let (lo, hi) = range
            .split_once("..")
            .ok_or_else(|| invalid(format!("`{spec}` is not of the form pow2:a..b")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<i32>()
                .map_err(|e| invalid(format!("exponent `{s}`: {e}")))
        };
        let (lo, hi) = (parse(lo)?, parse(hi)?);
        if lo > hi {
            return Err(invalid(format!("empty range {lo}..{hi}")));
        }
        return Ok((lo..=hi).map(|k| f64::from(k).exp2()).collect());
    }
    let values = spec
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().map_err(|e| invalid(format!("`{s}`: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(invalid("empty list".into()));
    }
    Ok(values)
}

#[derive(Parser, Debug)]
#[command(name = "regsched", version, about = "Simulate and analyze regular-service link scheduling")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args, Debug, Default, Clone)]
pub struct Overrides {
    /// Master seed
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Slots per replication
    #[arg(long, global = true)]
    horizon: Option<u64>,
    /// Slots discarded before statistics start
    #[arg(long, global = true)]
    warmup: Option<u64>,
    /// Number of replications
    #[arg(long, global = true)]
    reps: Option<usize>,
    /// Maximum concurrent replications (0 = one per core)
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
}

impl Overrides {
    fn apply(&self, cfg: SimConfig) -> Result<SimConfig, CliError> {
        let mut cfg = cfg;
        if let Some(v) = self.seed {
            cfg.run.seed = v;
        }
        if let Some(v) = self.horizon {
            cfg.run.horizon = v;
        }
        if let Some(v) = self.warmup {
            cfg.run.warmup = v;
        }
        if let Some(v) = self.reps {
            cfg.run.replications = v;
        }
        Ok(validate_config(&cfg)?)
    }

    fn load(&self, path: &Path) -> Result<SimConfig, CliError> {
        self.apply(parse_config(path)?)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Simulate one configuration; one CSV row per link plus an aggregate row
    Run {
        config: PathBuf,
        /// Output CSV (stdout when omitted)
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Simulate the config's policy over a list of gamma values
    Sweep {
        config: PathBuf,
        /// Comma-separated values or pow2:a..b
        #[arg(short, long, allow_hyphen_values = true)]
        gamma: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Paired comparison of two policies on common random numbers
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Print capacity margins and analytic bounds
    Bounds { config: PathBuf },
}

/// Parses arguments, executes the subcommand and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match execute(&cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let o = &cli.overrides;
    match &cli.command {
        Command::Run { config, output } => {
            let cfg = o.load(config)?;
            let exp = engine::run_experiment(&cfg, o.jobs)?;
            write_output(output.as_deref(), &run_csv(&exp))
        }
        Command::Sweep { config, gamma, output } => {
            let gammas = parse_gamma_spec(gamma)?;
            let cfg = o.load(config)?;
            let rows = engine::sweep_gamma(&cfg, &gammas, o.jobs)?;
            write_output(output.as_deref(), &sweep_csv(&rows))
        }
        Command::Compare {
            config_a,
            config_b,
            output,
        } => {
            let a = o.load(config_a)?;
            let b = o.load(config_b)?;
            let cmp = engine::compare(&a, &b, o.jobs)?;
            write_output(output.as_deref(), &compare_csv(&cmp))
        }
        Command::Bounds { config } => {
            let cfg = o.load(config)?;
            let report = engine::bounds_report(&cfg)?;
            print!("{}", bounds_text(&report));
            if report.margin.is_interior() {
                Ok(())
            } else {
                Err(CliError::OutOfRegion)
            }
        }
    }
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => fs::write(p, text).map_err(|source| CliError::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => io::stdout().write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        }),
    }
}

fn num(x: f64) -> String {
    x.to_string()
}

fn opt(x: Option<Estimate>) -> String {
    x.map(|e| num(e.mean)).unwrap_or_default()
}

fn stderr(x: Option<Estimate>) -> String {
    x.and_then(|e| e.stderr).map(num).unwrap_or_default()
}

fn to_csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("writing to memory");
    for row in rows {
        w.write_record(row).expect("writing to memory");
    }
    String::from_utf8(w.into_inner().expect("writing to memory")).expect("csv output is utf-8")
}

pub const RUN_COLUMNS: [&str; 17] = [
    "link",
    "mean_q",
    "std_q",
    "mean_t",
    "e_i",
    "e_i2",
    "norm_i2",
    "var_i",
    "p_service",
    "mean_unused",
    "mean_departed",
    "regularity_metric",
    "weighted_norm_i2",
    "sum_alpha_meanq",
    "lemma1_residual_max",
    "lemma2_r1",
    "lemma2_r2",
];

/// Per-link rows, then an `all` row with totals over links and the
/// aggregate-only columns. Values are means across replications.
pub fn run_csv(exp: &ExperimentStats) -> String {
    let s = exp.summary();
    let mut rows: Vec<Vec<String>> = s
        .links
        .iter()
        .enumerate()
        .map(|(l, ls)| {
            let mut row = vec![
                l.to_string(),
                num(ls.mean_q.mean),
                num(ls.std_q.mean),
                num(ls.mean_t.mean),
                opt(ls.e_i),
                opt(ls.e_i2),
                opt(ls.norm_i2),
                opt(ls.var_i),
                num(ls.p_service.mean),
                num(ls.mean_unused.mean),
                num(ls.mean_departed.mean),
            ];
            row.resize(RUN_COLUMNS.len(), String::new());
            row
        })
        .collect();
    let sum_p = exp.estimate(|r| r.links.iter().map(|l| l.p_service).sum());
    rows.push(vec![
        "all".into(),
        num(s.total_mean_q.mean),
        String::new(),
        num(s.sum_mean_t.mean),
        String::new(),
        String::new(),
        String::new(),
        String::new(),
        num(sum_p.mean),
        num(s.total_mean_unused.mean),
        num(s.total_mean_departed.mean),
        num(s.regularity_metric.mean),
        opt(s.weighted_norm_i2),
        num(s.sum_alpha_mean_q.mean),
        opt(s.lemma1_residual_max),
        num(s.lemma2_r1.mean),
        num(s.lemma2_r2.mean),
    ]);
    to_csv(&RUN_COLUMNS, &rows)
}

pub const SWEEP_COLUMNS: [&str; 12] = [
    "gamma",
    "total_mean_q",
    "total_mean_q_stderr",
    "regularity_metric",
    "regularity_metric_stderr",
    "sum_alpha_meanq",
    "sum_alpha_meanq_stderr",
    "lemma2_r1",
    "lemma2_r2",
    "lower_bound",
    "upper_bound_measuredH",
    "upper_bound_conservative",
];

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            let s = &r.summary;
            vec![
                num(r.gamma),
                num(s.total_mean_q.mean),
                stderr(Some(s.total_mean_q)),
                num(s.regularity_metric.mean),
                stderr(Some(s.regularity_metric)),
                num(s.sum_alpha_mean_q.mean),
                stderr(Some(s.sum_alpha_mean_q)),
                num(s.lemma2_r1.mean),
                num(s.lemma2_r2.mean),
                num(r.bounds.lower_bound),
                num(r.upper_bound_measured_h),
                num(r.bounds.upper_bound_conservative),
            ]
        })
        .collect();
    to_csv(&SWEEP_COLUMNS, &rows)
}

type LinkMetric = fn(&LinkStats) -> Option<f64>;

const COMPARE_METRICS: [(&str, LinkMetric); 5] = [
    ("mean_unused", |l| Some(l.mean_unused)),
    ("norm_i2", |l| l.inter_service.map(|i| i.normalized_second_moment())),
    ("var_i", |l| l.inter_service.map(|i| i.variance())),
    ("mean_q", |l| Some(l.mean_q)),
    ("std_q", |l| Some(l.std_q)),
];

/// Header of [`compare_csv`]: `link`, then `<metric>_a`, `<metric>_b`,
/// `<metric>_delta` and `<metric>_delta_stderr` per metric, with
/// `delta = b - a` paired by replication.
pub fn compare_columns() -> Vec<String> {
    let mut cols = vec!["link".to_string()];
    for (name, _) in COMPARE_METRICS {
        for suffix in ["a", "b", "delta", "delta_stderr"] {
            cols.push(format!("{name}_{suffix}"));
        }
    }
    cols
}

pub fn compare_csv(cmp: &Comparison) -> String {
    let links = cmp.a.runs[0].num_links();
    let cell = |f: &dyn Fn(&RunStats) -> Option<f64>| {
        [
            opt(cmp.a.estimate_opt(f)),
            opt(cmp.b.estimate_opt(f)),
            opt(cmp.paired_delta(f)),
            stderr(cmp.paired_delta(f)),
        ]
    };
    let mut rows = Vec::with_capacity(links + 1);
    for l in 0..links {
        let mut row = vec![l.to_string()];
        for (_, metric) in COMPARE_METRICS {
            row.extend(cell(&|r: &RunStats| metric(&r.links[l])));
        }
        rows.push(row);
    }
    // totals exist only for the additive metrics
    let mut total = vec!["all".to_string()];
    for (name, metric) in COMPARE_METRICS {
        if name == "mean_unused" || name == "mean_q" {
            total.extend(cell(&|r: &RunStats| r.links.iter().map(metric).sum()));
        } else {
            total.extend(std::iter::repeat_n(String::new(), 4));
        }
    }
    rows.push(total);
    let header = compare_columns();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    to_csv(&header, &rows)
}

/// `quantity,value` lines.
pub fn bounds_text(r: &BoundsReport) -> String {
    let mut rows = vec![
        vec!["additive_eps".to_string(), num(r.margin.additive_eps)],
        vec!["multiplicative_eps".to_string(), num(r.margin.multiplicative_eps)],
        vec!["drift_constant_b".to_string(), num(r.drift_constant)],
        vec!["queue_bound".to_string(), num(r.queue_bound)],
        vec!["regularity_lower_bound".to_string(), num(r.lower_bound)],
        vec!["regularity_upper_bound_conservative".to_string(), num(r.upper_bound_conservative)],
    ];
    if let Some(t) = r.symmetric_threshold {
        rows.push(vec!["symmetric_threshold".to_string(), num(t)]);
    }
    to_csv(&["quantity", "value"], &rows)
}

//! Seeded simulation loop, replication management and experiment drivers.
//!
//! # Random streams
//!
//! Replication `r` of an experiment with master seed `s` runs with seed
//! `splitmix64(s + (r + 1) * 0x9E3779B97F4A7C15)`. Inside a replication each
//! (purpose, link) pair owns a ChaCha8 generator seeded from the replication
//! seed and switched to stream `(purpose << 32) | link`, with purposes
//! arrival = 0, channel = 1 and tie-break = 2 (tie-breaking uses link 0).
//! Arrival and channel sequences therefore do not depend on the policy, so
//! two policies run with the same seeds see common random numbers.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{self, CapacityMargin};
use crate::dynamics::{commit_slot, evaluate_slot, SlotOutcome};
use crate::error::{Error, Result};
use crate::model::{validate_config, PolicyKind, SimConfig, SystemState};
use crate::policies::Scheduler;
use crate::stats::{lemma2_residuals, Estimate, LinkStats, RunStats, StatsAccumulator};

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
#[repr(u64)]
pub enum StreamPurpose {
    Arrival = 0,
    Channel = 1,
    TieBreak = 2,
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replication `index` under `master`.
pub fn replication_seed(master: u64, index: u64) -> u64 {
    splitmix64(master.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA)))
}

/// Generator for one (purpose, link) pair of a replication.
pub fn stream_rng(replication_seed: u64, purpose: StreamPurpose, link: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(replication_seed);
    rng.set_stream(((purpose as u64) << 32) | link as u64);
    rng
}

/// Runs one replication of a configuration with the given replication seed.
///
/// The result is a pure function of `(cfg, seed)`.
pub fn run_replication(cfg: &SimConfig, seed: u64) -> Result<RunStats> {
    simulate(&validate_config(cfg)?, seed)
}

fn simulate(cfg: &SimConfig, seed: u64) -> Result<RunStats> {
    let links = cfg.num_links();
    let set = cfg.topology.schedule_set()?;
    let channel = cfg.channel.distributions()?;
    let arrivals = cfg.arrivals.distributions()?;
    let lambda: Vec<f64> = arrivals.iter().map(|d| d.mean()).collect();
    let mode = cfg.policy.tsls_mode();

    let mut arrival_rng: Vec<_> = (0..links).map(|l| stream_rng(seed, StreamPurpose::Arrival, l)).collect();
    let mut channel_rng: Vec<_> = (0..links).map(|l| stream_rng(seed, StreamPurpose::Channel, l)).collect();
    let mut tie_rng = stream_rng(seed, StreamPurpose::TieBreak, 0);

    let mut scheduler = Scheduler::new(cfg.policy.clone());
    let mut acc = StatsAccumulator::new(links, cfg.run.warmup, cfg.run.horizon);
    let mut state = SystemState::zero(links);
    let mut a = vec![0; links];
    let mut c = vec![0; links];
    let mut outcome = SlotOutcome::with_links(links);

    for slot in 0..cfg.run.horizon {
        for l in 0..links {
            c[l] = channel[l].sample(&mut channel_rng[l]);
            a[l] = arrivals[l].sample(&mut arrival_rng[l]);
        }
        let index = scheduler.decide(&state, &c, &set, &mut tie_rng)?;
        let schedule = set.get(index).bits();
        evaluate_slot(&state, &a, &c, schedule, &mut outcome);
        if slot >= cfg.run.warmup {
            acc.record_slot(&state, &a, &c, &outcome);
        }
        commit_slot(&mut state, &a, &c, schedule, mode, &outcome);
    }
    acc.finalize(&lambda, &cfg.policy.alpha, &cfg.policy.beta)
}

/// Replication results in replication order, with their seeds.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentStats {
    pub seeds: Vec<u64>,
    pub runs: Vec<RunStats>,
}

impl ExperimentStats {
    /// Builds from explicit (seed, run) pairs.
    pub fn from_runs(seeds: Vec<u64>, runs: Vec<RunStats>) -> Self {
        debug_assert_eq!(seeds.len(), runs.len());
        Self { seeds, runs }
    }

    pub fn replications(&self) -> usize {
        self.runs.len()
    }

    pub fn estimate(&self, f: impl Fn(&RunStats) -> f64) -> Estimate {
        let samples: Vec<f64> = self.runs.iter().map(f).collect();
        Estimate::from_samples(&samples).expect("an experiment has at least one replication")
    }

    /// Estimate over the replications where `f` is defined.
    pub fn estimate_opt(&self, f: impl Fn(&RunStats) -> Option<f64>) -> Option<Estimate> {
        let samples: Vec<f64> = self.runs.iter().filter_map(f).collect();
        Estimate::from_samples(&samples)
    }

    pub fn link_estimate(&self, link: usize, f: impl Fn(&LinkStats) -> f64) -> Estimate {
        self.estimate(|r| f(&r.links[link]))
    }

    pub fn link_estimate_opt(&self, link: usize, f: impl Fn(&LinkStats) -> Option<f64>) -> Option<Estimate> {
        self.estimate_opt(|r| f(&r.links[link]))
    }

    pub fn summary(&self) -> Summary {
        let links = self.runs[0].num_links();
        let link_summaries = (0..links)
            .map(|l| LinkSummary {
                mean_q: self.link_estimate(l, |s| s.mean_q),
                std_q: self.link_estimate(l, |s| s.std_q),
                mean_t: self.link_estimate(l, |s| s.mean_t),
                e_i: self.link_estimate_opt(l, |s| s.inter_service.map(|i| i.mean)),
                e_i2: self.link_estimate_opt(l, |s| s.inter_service.map(|i| i.second_moment)),
                norm_i2: self.link_estimate_opt(l, |s| s.inter_service.map(|i| i.normalized_second_moment())),
                var_i: self.link_estimate_opt(l, |s| s.inter_service.map(|i| i.variance())),
                p_service: self.link_estimate(l, |s| s.p_service),
                mean_unused: self.link_estimate(l, |s| s.mean_unused),
                mean_departed: self.link_estimate(l, |s| s.mean_departed),
                mean_arrival: self.link_estimate(l, |s| s.mean_arrival),
                mean_channel: self.link_estimate(l, |s| s.mean_channel),
            })
            .collect();
        Summary {
            links: link_summaries,
            total_mean_q: self.estimate(|r| r.total_mean_q),
            total_mean_q_late: self.estimate(|r| r.total_mean_q_late),
            sum_alpha_mean_q: self.estimate(|r| r.sum_alpha_mean_q),
            sum_mean_t: self.estimate(|r| r.links.iter().map(|s| s.mean_t).sum()),
            total_mean_unused: self.estimate(|r| r.links.iter().map(|s| s.mean_unused).sum()),
            total_mean_departed: self.estimate(|r| r.links.iter().map(|s| s.mean_departed).sum()),
            regularity_metric: self.estimate(|r| r.regularity_metric),
            weighted_norm_i2: self.estimate_opt(|r| r.weighted_norm_i2),
            h_beta: self.estimate(|r| r.h_beta),
            lemma1_residual_max: self.estimate_opt(RunStats::lemma1_residual_max),
            lemma2_r1: self.estimate(|r| lemma2_residuals(r).r1_rel),
            lemma2_r2: self.estimate(|r| lemma2_residuals(r).r2_rel),
        }
    }
}

/// Per-link estimates across replications. Inter-service fields use only
/// the replications in which the link completed an interval.
#[derive(Clone, Debug, PartialEq)]
pub struct LinkSummary {
    pub mean_q: Estimate,
    pub std_q: Estimate,
    pub mean_t: Estimate,
    pub e_i: Option<Estimate>,
    pub e_i2: Option<Estimate>,
    pub norm_i2: Option<Estimate>,
    pub var_i: Option<Estimate>,
    pub p_service: Estimate,
    pub mean_unused: Estimate,
    pub mean_departed: Estimate,
    pub mean_arrival: Estimate,
    pub mean_channel: Estimate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Summary {
    pub links: Vec<LinkSummary>,
    pub total_mean_q: Estimate,
    pub total_mean_q_late: Estimate,
    pub sum_alpha_mean_q: Estimate,
    pub sum_mean_t: Estimate,
    pub total_mean_unused: Estimate,
    pub total_mean_departed: Estimate,
    pub regularity_metric: Estimate,
    pub weighted_norm_i2: Option<Estimate>,
    pub h_beta: Estimate,
    pub lemma1_residual_max: Option<Estimate>,
    /// Relative residuals of the counter identities.
    pub lemma2_r1: Estimate,
    pub lemma2_r2: Estimate,
}

fn run_seeds<T: Send>(jobs: usize, seeds: &[u64], f: impl Fn(u64) -> Result<T> + Sync) -> Result<Vec<T>> {
    if jobs == 1 || seeds.len() == 1 {
        return seeds.iter().map(|&s| f(s)).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter {
            name: "jobs",
            reason: e.to_string(),
        })?;
    // indexed collect keeps replication order
    pool.install(|| seeds.par_iter().map(|&s| f(s)).collect())
}

/// Runs `cfg.run.replications` replications on at most `jobs` threads
/// (0 lets the thread pool choose).
pub fn run_experiment(cfg: &SimConfig, jobs: usize) -> Result<ExperimentStats> {
    let cfg = validate_config(cfg)?;
    let seeds: Vec<u64> = (0..cfg.run.replications as u64)
        .map(|r| replication_seed(cfg.run.seed, r))
        .collect();
    let runs = run_seeds(jobs, &seeds, |s| simulate(&cfg, s))?;
    Ok(ExperimentStats { seeds, runs })
}

/// Analytic quantities of a configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundsReport {
    pub lambda: Vec<f64>,
    pub margin: CapacityMargin,
    /// Per-link boundary rate when all arrival rates are equal.
    pub symmetric_threshold: Option<f64>,
    pub drift_constant: f64,
    /// NaN outside the capacity region.
    pub queue_bound: f64,
    /// NaN when every `beta_l lambda_l` is zero.
    pub lower_bound: f64,
    /// Upper bound with the measured-H term dropped; infinite at `gamma = 0`
    /// and NaN outside the capacity region.
    pub upper_bound_conservative: f64,
}

impl BoundsReport {
    /// The regularity upper bound with a measured mean of `sum_{l in H} beta_l`.
    pub fn upper_bound(&self, cfg: &SimConfig, measured_h_beta: f64) -> f64 {
        let p = &cfg.policy;
        if !(self.margin.multiplicative_eps > 0.0) {
            return f64::NAN;
        }
        if p.gamma == 0.0 {
            return f64::INFINITY;
        }
        bounds::regularity_upper_bound(
            &p.alpha,
            &p.beta,
            p.gamma,
            &cfg.channel,
            &cfg.arrivals,
            self.margin.multiplicative_eps,
            measured_h_beta.clamp(0.0, p.beta.iter().sum()),
        )
        .unwrap_or(f64::NAN)
    }
}

pub fn bounds_report(cfg: &SimConfig) -> Result<BoundsReport> {
    let cfg = validate_config(cfg)?;
    let p = &cfg.policy;
    let set = cfg.topology.schedule_set()?;
    let lambda = cfg.arrivals.rates()?;
    let margin = bounds::capacity_margin(&lambda, &set, &cfg.channel)?;
    let drift_constant = bounds::drift_constant_b(&p.alpha, &p.beta, p.gamma, &cfg.channel, &cfg.arrivals)?;
    let queue_bound = bounds::queue_bound(drift_constant, margin.additive_eps).unwrap_or(f64::NAN);
    let lower_bound = bounds::regularity_lower_bound(&lambda, &p.beta, &set).unwrap_or(f64::NAN);
    let mut report = BoundsReport {
        symmetric_threshold: bounds::symmetric_threshold(&lambda, &margin),
        lambda,
        margin,
        drift_constant,
        queue_bound,
        lower_bound,
        upper_bound_conservative: f64::NAN,
    };
    report.upper_bound_conservative = report.upper_bound(&cfg, 0.0);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub gamma: f64,
    pub experiment: ExperimentStats,
    pub summary: Summary,
    pub bounds: BoundsReport,
    pub upper_bound_measured_h: f64,
}

/// Runs one experiment per `gamma`, sharing seeds across rows.
///
/// Every row uses the regular-service policy of `base` (or its variant when
/// `base` already uses it); a zero `gamma` reproduces max-weight exactly.
pub fn sweep_gamma(base: &SimConfig, gammas: &[f64], jobs: usize) -> Result<Vec<SweepRow>> {
    if gammas.is_empty() {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "empty list".into(),
        });
    }
    if let Some(g) = gammas.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("{g} must be finite and non-negative"),
        });
    }
    if gammas.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: "values must be sorted ascending".into(),
        });
    }
    let kind = match base.policy.kind {
        PolicyKind::RoundRobin => return Err(Error::InvalidParameter {
            name: "policy",
            reason: "a gamma sweep needs a max-weight policy".into(),
        }),
        PolicyKind::RsgVariant => PolicyKind::RsgVariant,
        PolicyKind::Mws | PolicyKind::Rsg => PolicyKind::Rsg,
    };
    gammas
        .iter()
        .map(|&gamma| {
            let mut policy = base.policy.clone();
            policy.kind = kind;
            policy.gamma = gamma;
            let cfg = base.with_policy(policy);
            let experiment = run_experiment(&cfg, jobs)?;
            let summary = experiment.summary();
            let bounds = bounds_report(&cfg)?;
            let upper_bound_measured_h = bounds.upper_bound(&cfg, summary.h_beta.mean);
            Ok(SweepRow {
                gamma,
                experiment,
                summary,
                bounds,
                upper_bound_measured_h,
            })
        })
        .collect()
}

/// Two experiments on common random numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub a: ExperimentStats,
    pub b: ExperimentStats,
}

impl Comparison {
    /// Estimate of the per-replication difference `f(b) - f(a)`, over the
    /// replications where both sides are defined.
    pub fn paired_delta(&self, f: impl Fn(&RunStats) -> Option<f64>) -> Option<Estimate> {
        let diffs: Vec<f64> = self
            .a
            .runs
            .iter()
            .zip(&self.b.runs)
            .filter_map(|(ra, rb)| Some(f(rb)? - f(ra)?))
            .collect();
        Estimate::from_samples(&diffs)
    }
}

/// Runs `a` and `b` with identical replication seeds. Fails unless the
/// configurations differ only in the policy.
pub fn compare(a: &SimConfig, b: &SimConfig, jobs: usize) -> Result<Comparison> {
    let a = validate_config(a)?;
    let b = validate_config(b)?;
    if !a.same_system(&b) {
        let what = if a.topology != b.topology {
            "topology"
        } else if a.channel != b.channel {
            "channel"
        } else if a.arrivals != b.arrivals {
            "arrivals"
        } else {
            "run"
        };
        return Err(Error::ConfigMismatch(format!("`{what}` sections differ")));
    }
    Ok(Comparison {
        a: run_experiment(&a, jobs)?,
        b: run_experiment(&b, jobs)?,
    })
}

//! Domain types shared by the simulator, the policies and the analytic bounds.
//!
//! Everything here is plain data. A [`SimConfig`] is checked and canonicalized
//! by [`validate_config`]; after that it is treated as immutable and may be
//! shared read-only between replications.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};

/// Packets, slots and channel rates are all non-negative integers.
pub type Count = u64;

/// Tolerance on the total probability mass of a user-supplied distribution.
const MASS_TOLERANCE: f64 = 1e-6;

/// An activation vector: bit `l` is set when link `l` transmits in the slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScheduleVector(Vec<bool>);

impl ScheduleVector {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn from_active(num_links: usize, active: &[usize]) -> Self {
        let mut bits = vec![false; num_links];
        for &l in active {
            bits[l] = true;
        }
        Self(bits)
    }

    /// Parses a string of `0`/`1` characters, link 0 first.
    pub fn parse(bits: &str) -> Option<Self> {
        bits.chars()
            .map(|ch| match ch {
                '0' => Some(false),
                '1' => Some(true),
                _ => None,
            })
            .collect::<Option<Vec<_>>>()
            .map(Self)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_active(&self, link: usize) -> bool {
        self.0[link]
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn active_links(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &b)| b).map(|(l, _)| l)
    }

    pub fn count_active(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for ScheduleVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Which construction produced a [`ScheduleSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScheduleOrigin {
    SingleHop,
    Switch(usize),
    ConflictGraph,
}

/// The explicit, finite set of feasible schedules of a topology.
///
/// Invariants: non-empty, all vectors have the same length, no duplicates and
/// every link is active in at least one schedule. The order of the schedules
/// is canonical and defines the lowest-index tie rule.
#[derive(Clone, Debug, PartialEq)]
pub struct ScheduleSet {
    num_links: usize,
    origin: ScheduleOrigin,
    schedules: Vec<ScheduleVector>,
    active: Vec<Vec<usize>>,
}

impl ScheduleSet {
    pub fn new(
        num_links: usize,
        schedules: Vec<ScheduleVector>,
        origin: ScheduleOrigin,
    ) -> Result<Self> {
        if num_links == 0 {
            return Err(Error::EmptyTopology);
        }
        if schedules.is_empty() {
            return Err(Error::InvalidScheduleSet("no schedules".into()));
        }
        for s in &schedules {
            if s.len() != num_links {
                return Err(Error::DimensionMismatch {
                    field: "schedule",
                    expected: num_links,
                    found: s.len(),
                });
            }
        }
        let mut seen = std::collections::HashSet::new();
        for s in &schedules {
            if !seen.insert(s) {
                return Err(Error::InvalidScheduleSet(format!("duplicate schedule {s}")));
            }
        }
        for link in 0..num_links {
            if !schedules.iter().any(|s| s.is_active(link)) {
                return Err(Error::NeverSchedulable { link });
            }
        }
        let active = schedules.iter().map(|s| s.active_links().collect()).collect();
        Ok(Self {
            num_links,
            origin,
            schedules,
            active,
        })
    }

    pub fn num_links(&self) -> usize {
        self.num_links
    }

    pub fn origin(&self) -> ScheduleOrigin {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.schedules.len()
    }

    pub fn is_empty(&self) -> bool {
        self.schedules.is_empty()
    }

    pub fn get(&self, index: usize) -> &ScheduleVector {
        &self.schedules[index]
    }

    /// Active link indices of schedule `index`.
    pub fn active(&self, index: usize) -> &[usize] {
        &self.active[index]
    }

    pub fn iter(&self) -> impl Iterator<Item = &ScheduleVector> {
        self.schedules.iter()
    }

    pub fn contains(&self, s: &ScheduleVector) -> bool {
        self.schedules.contains(s)
    }

    pub fn position(&self, s: &ScheduleVector) -> Option<usize> {
        self.schedules.iter().position(|x| x == s)
    }

    /// `max_{S} sum_{l in S} weight_l` over the explicit set.
    pub fn max_weighted_sum(&self, weights: &[f64]) -> f64 {
        self.active
            .iter()
            .map(|links| links.iter().map(|&l| weights[l]).sum::<f64>())
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// A finite distribution over non-negative integers, kept in canonical form:
/// support sorted ascending without duplicates, strictly positive
/// probabilities summing to one.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDist {
    values: Vec<Count>,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl DiscreteDist {
    pub fn new(values: &[Count], probs: &[f64]) -> std::result::Result<Self, String> {
        if values.len() != probs.len() {
            return Err(format!(
                "{} support values but {} probabilities",
                values.len(),
                probs.len()
            ));
        }
        if values.is_empty() {
            return Err("empty support".into());
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(format!("probability {p} is not in [0, 1]"));
        }
        let mut pairs: Vec<(Count, f64)> = values.iter().copied().zip(probs.iter().copied()).collect();
        pairs.sort_by_key(|&(v, _)| v);
        let mut merged: Vec<(Count, f64)> = Vec::with_capacity(pairs.len());
        for (v, p) in pairs {
            match merged.last_mut() {
                Some((last, acc)) if *last == v => *acc += p,
                _ => merged.push((v, p)),
            }
        }
        merged.retain(|&(_, p)| p > 0.0);
        let total: f64 = merged.iter().map(|&(_, p)| p).sum();
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(format!("probabilities sum to {total}, not 1"));
        }
        if (total - 1.0).abs() > 1e-12 {
            for (_, p) in &mut merged {
                *p /= total;
            }
        }
        let (values, probs): (Vec<_>, Vec<_>) = merged.into_iter().unzip();
        let mut cdf = Vec::with_capacity(probs.len());
        let mut acc = 0.0;
        for &p in &probs {
            acc += p;
            cdf.push(acc);
        }
        Ok(Self { values, probs, cdf })
    }

    pub fn point(value: Count) -> Self {
        Self {
            values: vec![value],
            probs: vec![1.0],
            cdf: vec![1.0],
        }
    }

    pub fn values(&self) -> &[Count] {
        &self.values
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn support(&self) -> impl Iterator<Item = (Count, f64)> + '_ {
        self.values.iter().copied().zip(self.probs.iter().copied())
    }

    pub fn max(&self) -> Count {
        *self.values.last().expect("canonical support is non-empty")
    }

    pub fn mean(&self) -> f64 {
        self.support().map(|(v, p)| v as f64 * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.support().map(|(v, p)| (v as f64).powi(2) * p).sum()
    }

    pub fn is_degenerate(&self) -> bool {
        self.values.len() == 1
    }

    /// Draws one value. Degenerate distributions consume no randomness.
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Count {
        if self.values.len() == 1 {
            return self.values[0];
        }
        let u: f64 = rng.gen();
        for (i, &c) in self.cdf.iter().enumerate() {
            if u < c {
                return self.values[i];
            }
        }
        self.max()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelDist {
    /// Rate `c` in every slot.
    Constant(Count),
    /// Rate `rate` with probability `q`, otherwise 0.
    OnOff { rate: Count, q: f64 },
    Discrete(DiscreteDist),
}

impl ChannelDist {
    pub fn to_discrete(&self, link: usize) -> Result<DiscreteDist> {
        let invalid = |reason: String| Error::InvalidDistribution {
            what: "channel",
            link,
            reason,
        };
        match *self {
            ChannelDist::Constant(c) => Ok(DiscreteDist::point(c)),
            ChannelDist::OnOff { rate, q } => {
                if !(0.0..=1.0).contains(&q) {
                    return Err(invalid(format!("availability {q} is not in [0, 1]")));
                }
                DiscreteDist::new(&[0, rate], &[1.0 - q, q]).map_err(invalid)
            }
            ChannelDist::Discrete(ref d) => DiscreteDist::new(&d.values, &d.probs).map_err(invalid),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ArrivalDist {
    /// One packet with probability `p`.
    Bernoulli { p: f64 },
    Constant(Count),
    /// `2 k scale` packets with probability `1/k`, otherwise none; mean `2 scale`.
    Bursty { k: Count, scale: Count },
    Discrete(DiscreteDist),
}

impl ArrivalDist {
    pub fn to_discrete(&self, link: usize) -> Result<DiscreteDist> {
        let invalid = |reason: String| Error::InvalidDistribution {
            what: "arrival",
            link,
            reason,
        };
        match *self {
            ArrivalDist::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(format!("Bernoulli rate {p} is not in [0, 1]")));
                }
                DiscreteDist::new(&[0, 1], &[1.0 - p, p]).map_err(invalid)
            }
            ArrivalDist::Constant(a) => Ok(DiscreteDist::point(a)),
            ArrivalDist::Bursty { k, scale } => {
                if k == 0 {
                    return Err(invalid("burstiness K must be at least 1".into()));
                }
                let p = 1.0 / k as f64;
                DiscreteDist::new(&[0, 2 * k * scale], &[1.0 - p, p]).map_err(invalid)
            }
            ArrivalDist::Discrete(ref d) => DiscreteDist::new(&d.values, &d.probs).map_err(invalid),
        }
    }
}

/// Per-link channel distributions, independent across links and i.i.d. over slots.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelModel(pub Vec<ChannelDist>);

impl ChannelModel {
    pub fn uniform(num_links: usize, dist: ChannelDist) -> Self {
        Self(vec![dist; num_links])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distributions(&self) -> Result<Vec<DiscreteDist>> {
        self.0.iter().enumerate().map(|(l, d)| d.to_discrete(l)).collect()
    }

    /// Largest rate any link can offer.
    pub fn c_max(&self) -> Result<Count> {
        Ok(self.distributions()?.iter().map(DiscreteDist::max).max().unwrap_or(0))
    }
}

/// Per-link arrival distributions, independent across links and i.i.d. over slots.
#[derive(Clone, Debug, PartialEq)]
pub struct ArrivalModel(pub Vec<ArrivalDist>);

impl ArrivalModel {
    pub fn uniform(num_links: usize, dist: ArrivalDist) -> Self {
        Self(vec![dist; num_links])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn distributions(&self) -> Result<Vec<DiscreteDist>> {
        self.0.iter().enumerate().map(|(l, d)| d.to_discrete(l)).collect()
    }

    pub fn a_max(&self) -> Result<Count> {
        Ok(self.distributions()?.iter().map(DiscreteDist::max).max().unwrap_or(0))
    }

    /// Mean arrival rates, the `lambda` vector.
    pub fn rates(&self) -> Result<Vec<f64>> {
        Ok(self.distributions()?.iter().map(DiscreteDist::mean).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PolicyKind {
    /// Max-weight on `alpha_l Q_l C_l`.
    Mws,
    /// Max-weight on `(alpha_l Q_l + gamma beta_l T_l) C_l`.
    Rsg,
    /// Same selection as [`PolicyKind::Rsg`]; the time-since-last-service
    /// counter freezes while the link has an empty queue.
    RsgVariant,
    /// Cyclic one-link-per-slot service, single-hop only.
    RoundRobin,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TieRule {
    /// First maximizer in the schedule set's canonical order.
    #[default]
    LowestIndex,
    /// Uniform among maximizers, drawn from the replication's tie-break stream.
    SeededUniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PolicySpec {
    pub kind: PolicyKind,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    pub gamma: f64,
    pub tie_rule: TieRule,
}

impl PolicySpec {
    pub fn mws(num_links: usize) -> Self {
        Self {
            kind: PolicyKind::Mws,
            alpha: vec![1.0; num_links],
            beta: vec![1.0; num_links],
            gamma: 0.0,
            tie_rule: TieRule::LowestIndex,
        }
    }

    pub fn rsg(num_links: usize, gamma: f64) -> Self {
        Self {
            kind: PolicyKind::Rsg,
            gamma,
            ..Self::mws(num_links)
        }
    }

    pub fn round_robin(num_links: usize) -> Self {
        Self {
            kind: PolicyKind::RoundRobin,
            ..Self::mws(num_links)
        }
    }

    /// Which counter update the dynamics must apply under this policy.
    pub fn tsls_mode(&self) -> TsLsMode {
        match self.kind {
            PolicyKind::RsgVariant => TsLsMode::Variant,
            _ => TsLsMode::Standard,
        }
    }
}

/// Time-since-last-service update rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum TsLsMode {
    /// Reset on service, otherwise increment.
    #[default]
    Standard,
    /// Reset on service, increment only while the queue is non-empty.
    Variant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Topology {
    SingleHop { links: usize },
    /// `n x n` input-queued switch, link `i*n + j` connects input `i` to output `j`.
    Switch { n: usize },
    ConflictGraph { links: usize, edges: Vec<(usize, usize)> },
}

impl Topology {
    pub fn num_links(&self) -> usize {
        match *self {
            Topology::SingleHop { links } => links,
            Topology::Switch { n } => n * n,
            Topology::ConflictGraph { links, .. } => links,
        }
    }

    pub fn schedule_set(&self) -> Result<ScheduleSet> {
        use crate::schedule_space::*;
        match self {
            Topology::SingleHop { links } => single_hop_schedules(*links),
            Topology::Switch { n } => switch_matchings(*n),
            Topology::ConflictGraph { links, edges } => conflict_graph_schedules(*links, edges),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunParams {
    pub horizon: u64,
    pub warmup: u64,
    pub seed: u64,
    pub replications: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            horizon: 1_000_000,
            warmup: 10_000,
            seed: 0,
            replications: 8,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub topology: Topology,
    pub channel: ChannelModel,
    pub arrivals: ArrivalModel,
    pub policy: PolicySpec,
    pub run: RunParams,
}

impl SimConfig {
    pub fn num_links(&self) -> usize {
        self.topology.num_links()
    }

    /// Returns a copy that differs only in the policy.
    pub fn with_policy(&self, policy: PolicySpec) -> Self {
        Self {
            policy,
            ..self.clone()
        }
    }

    /// True when both configs describe the same network, traffic and run
    /// parameters and may differ only in the scheduling policy.
    pub fn same_system(&self, other: &SimConfig) -> bool {
        self.topology == other.topology
            && self.channel == other.channel
            && self.arrivals == other.arrivals
            && self.run == other.run
    }
}

/// The Markov state of the network at the beginning of a slot.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SystemState {
    pub queues: Vec<Count>,
    pub tsls: Vec<Count>,
    pub slot: u64,
}

impl SystemState {
    pub fn zero(num_links: usize) -> Self {
        Self {
            queues: vec![0; num_links],
            tsls: vec![0; num_links],
            slot: 0,
        }
    }

    pub fn num_links(&self) -> usize {
        self.queues.len()
    }
}

fn check_len(field: &'static str, expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch {
            field,
            expected,
            found,
        });
    }
    Ok(())
}

/// Checks every invariant of a configuration and returns its canonical form.
///
/// Canonicalization rewrites user-supplied discrete distributions into sorted,
/// merged, normalized form; applying it twice is a no-op.
pub fn validate_config(cfg: &SimConfig) -> Result<SimConfig> {
    let links = cfg.num_links();
    if links == 0 {
        return Err(Error::EmptyTopology);
    }
    check_len("channel", links, cfg.channel.len())?;
    check_len("arrivals", links, cfg.arrivals.len())?;
    check_len("alpha", links, cfg.policy.alpha.len())?;
    check_len("beta", links, cfg.policy.beta.len())?;

    let p = &cfg.policy;
    if let Some(a) = p.alpha.iter().find(|a| !(a.is_finite() && **a > 0.0)) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            reason: format!("{a} must be finite and positive"),
        });
    }
    if let Some(b) = p.beta.iter().find(|b| !(b.is_finite() && **b >= 0.0)) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: format!("{b} must be finite and non-negative"),
        });
    }
    if !(p.gamma.is_finite() && p.gamma >= 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("{} must be finite and non-negative", p.gamma),
        });
    }

    let channel = canonical_channels(&cfg.channel)?;
    let arrivals = canonical_arrivals(&cfg.arrivals)?;

    if cfg.run.warmup >= cfg.run.horizon {
        return Err(Error::WarmupTooLong {
            warmup: cfg.run.warmup,
            horizon: cfg.run.horizon,
        });
    }
    if cfg.run.replications == 0 {
        return Err(Error::InvalidParameter {
            name: "replications",
            reason: "must be at least 1".into(),
        });
    }

    let schedules = cfg.topology.schedule_set()?;
    if p.kind == PolicyKind::RoundRobin && schedules.origin() != ScheduleOrigin::SingleHop {
        return Err(Error::RoundRobinUnsupported);
    }

    Ok(SimConfig {
        topology: cfg.topology.clone(),
        channel,
        arrivals,
        policy: cfg.policy.clone(),
        run: cfg.run,
    })
}

fn canonical_channels(model: &ChannelModel) -> Result<ChannelModel> {
    let mut out = Vec::with_capacity(model.len());
    for (link, dist) in model.0.iter().enumerate() {
        let d = dist.to_discrete(link)?;
        if d.mean() <= 0.0 {
            return Err(Error::ZeroMean {
                what: "channel",
                link,
            });
        }
        out.push(match dist {
            ChannelDist::Discrete(_) => ChannelDist::Discrete(d),
            other => other.clone(),
        });
    }
    Ok(ChannelModel(out))
}

fn canonical_arrivals(model: &ArrivalModel) -> Result<ArrivalModel> {
    let mut out = Vec::with_capacity(model.len());
    for (link, dist) in model.0.iter().enumerate() {
        let d = dist.to_discrete(link)?;
        if d.mean() <= 0.0 {
            return Err(Error::ZeroMean {
                what: "arrival",
                link,
            });
        }
        out.push(match dist {
            ArrivalDist::Discrete(_) => ArrivalDist::Discrete(d),
            other => other.clone(),
        });
    }
    Ok(ArrivalModel(out))
}

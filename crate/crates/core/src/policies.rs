//! Per-slot schedule selection.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{Count, PolicyKind, PolicySpec, ScheduleOrigin, ScheduleSet, SystemState, TieRule};

/// `w_l = alpha_l * Q_l`.
pub fn mws_weights(queues: &[Count], alpha: &[f64]) -> Vec<f64> {
    queues.iter().zip(alpha).map(|(&q, &a)| a * q as f64).collect()
}

/// `w_l = alpha_l * Q_l + gamma * beta_l * T_l`.
pub fn rsg_weights(queues: &[Count], tsls: &[Count], alpha: &[f64], beta: &[f64], gamma: f64) -> Vec<f64> {
    let mut w = vec![0.0; queues.len()];
    fill_rsg_weights(&mut w, queues, tsls, alpha, beta, gamma);
    w
}

#[inline]
fn fill_rsg_weights(w: &mut [f64], queues: &[Count], tsls: &[Count], alpha: &[f64], beta: &[f64], gamma: f64) {
    for l in 0..w.len() {
        w[l] = alpha[l] * queues[l] as f64 + gamma * beta[l] * tsls[l] as f64;
    }
}

/// Value of schedule `index` under weights `w` and channel `c`.
#[inline]
pub fn schedule_value(w: &[f64], c: &[Count], set: &ScheduleSet, index: usize) -> f64 {
    set.active(index).iter().map(|&l| w[l] * c[l] as f64).sum()
}

/// Index of a schedule maximizing `sum_l w_l c_l S_l` over the explicit set.
///
/// `rng` is only consumed under [`TieRule::SeededUniform`], and only when
/// more than one schedule attains the maximum.
pub fn select_max_weight<R: Rng + ?Sized>(
    w: &[f64],
    c: &[Count],
    set: &ScheduleSet,
    tie_rule: TieRule,
    rng: &mut R,
) -> usize {
    let mut best = 0;
    let mut best_value = schedule_value(w, c, set, 0);
    let mut ties = 1u32;
    for index in 1..set.len() {
        let value = schedule_value(w, c, set, index);
        if value > best_value {
            best = index;
            best_value = value;
            ties = 1;
        } else if value == best_value && tie_rule == TieRule::SeededUniform {
            // reservoir sampling over the maximizers seen so far
            ties += 1;
            if rng.gen_range(0..ties) == 0 {
                best = index;
            }
        }
    }
    best
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RoundRobinState {
    pub next_link: usize,
}

/// Serves the link under the cursor and advances it modulo the link count.
/// Ignores queues, counters and channel state.
pub fn select_round_robin(rr: RoundRobinState, set: &ScheduleSet) -> Result<(usize, RoundRobinState)> {
    if set.origin() != ScheduleOrigin::SingleHop {
        return Err(Error::RoundRobinUnsupported);
    }
    // single-hop sets list link l's one-hot vector at index l
    let links = set.num_links();
    let index = rr.next_link % links;
    Ok((
        index,
        RoundRobinState {
            next_link: (index + 1) % links,
        },
    ))
}

/// Per-replication scheduler: the policy plus its mutable selection state.
#[derive(Clone, Debug)]
pub struct Scheduler {
    policy: PolicySpec,
    round_robin: RoundRobinState,
    weights: Vec<f64>,
}

impl Scheduler {
    pub fn new(policy: PolicySpec) -> Self {
        let links = policy.alpha.len();
        Self {
            policy,
            round_robin: RoundRobinState::default(),
            weights: vec![0.0; links],
        }
    }

    pub fn policy(&self) -> &PolicySpec {
        &self.policy
    }

    /// Picks the schedule index for the current slot.
    #[inline]
    pub fn decide<R: Rng + ?Sized>(
        &mut self,
        state: &SystemState,
        channel: &[Count],
        set: &ScheduleSet,
        rng: &mut R,
    ) -> Result<usize> {
        let p = &self.policy;
        match p.kind {
            PolicyKind::RoundRobin => {
                let (index, next) = select_round_robin(self.round_robin, set)?;
                self.round_robin = next;
                Ok(index)
            }
            PolicyKind::Mws => {
                fill_rsg_weights(&mut self.weights, &state.queues, &state.tsls, &p.alpha, &p.beta, 0.0);
                Ok(select_max_weight(&self.weights, channel, set, p.tie_rule, rng))
            }
            PolicyKind::Rsg | PolicyKind::RsgVariant => {
                fill_rsg_weights(&mut self.weights, &state.queues, &state.tsls, &p.alpha, &p.beta, p.gamma);
                Ok(select_max_weight(&self.weights, channel, set, p.tie_rule, rng))
            }
        }
    }
}

/// Stateless form of [`Scheduler::decide`] that threads the round-robin cursor explicitly.
pub fn decide<R: Rng + ?Sized>(
    policy: &PolicySpec,
    state: &SystemState,
    channel: &[Count],
    set: &ScheduleSet,
    rr: &mut RoundRobinState,
    rng: &mut R,
) -> Result<usize> {
    let mut scheduler = Scheduler::new(policy.clone());
    scheduler.round_robin = *rr;
    let index = scheduler.decide(state, channel, set, rng)?;
    *rr = scheduler.round_robin;
    Ok(index)
}

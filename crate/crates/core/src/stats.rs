//! Streaming steady-state statistics.
//!
//! Every accumulator only sees slots at or after the warmup boundary. Sums
//! of integer quantities are kept in integer form so that periodic
//! schedules produce exact means.

use crate::dynamics::SlotOutcome;
use crate::error::{Error, Result};
use crate::model::{Count, SystemState};

/// Inter-service time samples of one link.
///
/// Sampling starts at the link's first service event after warmup; the
/// partial interval that straddles the warmup boundary is discarded.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct InterServiceRecorder {
    last_service: Option<u64>,
    count: u64,
    sum: u128,
    sum_sq: u128,
}

impl InterServiceRecorder {
    pub fn record_service(&mut self, slot: u64) {
        if let Some(last) = self.last_service {
            let gap = u128::from(slot - last);
            debug_assert!(gap >= 1);
            self.count += 1;
            self.sum += gap;
            self.sum_sq += gap * gap;
        }
        self.last_service = Some(slot);
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn moments(&self) -> Option<InterServiceMoments> {
        (self.count > 0).then(|| InterServiceMoments {
            samples: self.count,
            mean: self.sum as f64 / self.count as f64,
            second_moment: self.sum_sq as f64 / self.count as f64,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InterServiceMoments {
    pub samples: u64,
    pub mean: f64,
    pub second_moment: f64,
}

impl InterServiceMoments {
    /// `E[I^2] / E[I]^2`, at least 1.
    pub fn normalized_second_moment(&self) -> f64 {
        self.second_moment / (self.mean * self.mean)
    }

    pub fn variance(&self) -> f64 {
        (self.second_moment - self.mean * self.mean).max(0.0)
    }

    /// Mean counter value implied by the renewal identity, `(E[I^2]/E[I] - 1) / 2`.
    pub fn implied_mean_tsls(&self) -> f64 {
        0.5 * (self.second_moment / self.mean - 1.0)
    }
}

#[derive(Clone, Debug, Default)]
struct LinkAccumulator {
    sum_q: u128,
    sum_q2: u128,
    sum_t: u128,
    sum_t2: u128,
    served: u64,
    sum_t_served: u128,
    sum_t2_served: u128,
    unused: u128,
    departed: u128,
    arrivals: u128,
    channel: u128,
    inter: InterServiceRecorder,
}

/// Per-replication accumulator fed once per counted slot.
#[derive(Clone, Debug)]
pub struct StatsAccumulator {
    warmup: u64,
    late_start: u64,
    slots: u64,
    late_slots: u64,
    late_sum_q: u128,
    links: Vec<LinkAccumulator>,
}

impl StatsAccumulator {
    pub fn new(num_links: usize, warmup: u64, horizon: u64) -> Self {
        Self {
            warmup,
            late_start: warmup + horizon.saturating_sub(warmup) / 2,
            slots: 0,
            late_slots: 0,
            late_sum_q: 0,
            links: vec![LinkAccumulator::default(); num_links],
        }
    }

    pub fn slots_counted(&self) -> u64 {
        self.slots
    }

    /// Records one slot. `state` is the beginning-of-slot state, before the
    /// outcome is applied; service events are evaluated against its counters.
    pub fn record_slot(&mut self, state: &SystemState, arrivals: &[Count], channel: &[Count], outcome: &SlotOutcome) {
        debug_assert!(state.slot >= self.warmup);
        self.slots += 1;
        let late = state.slot >= self.late_start;
        if late {
            self.late_slots += 1;
        }
        for (l, acc) in self.links.iter_mut().enumerate() {
            let q = u128::from(state.queues[l]);
            let t = u128::from(state.tsls[l]);
            acc.sum_q += q;
            acc.sum_q2 += q * q;
            acc.sum_t += t;
            acc.sum_t2 += t * t;
            acc.unused += u128::from(outcome.unused[l]);
            acc.departed += u128::from(outcome.departed[l]);
            acc.arrivals += u128::from(arrivals[l]);
            acc.channel += u128::from(channel[l]);
            if late {
                self.late_sum_q += q;
            }
            if outcome.service_event[l] {
                acc.served += 1;
                acc.sum_t_served += t;
                acc.sum_t2_served += t * t;
                acc.inter.record_service(state.slot);
            }
        }
    }

    /// Converts the sums into per-slot means.
    pub fn finalize(&self, lambda: &[f64], alpha: &[f64], beta: &[f64]) -> Result<RunStats> {
        if self.slots == 0 {
            return Err(Error::NoCountedSlots);
        }
        let m = self.slots as f64;
        let links: Vec<LinkStats> = self
            .links
            .iter()
            .map(|acc| {
                let mean_q = acc.sum_q as f64 / m;
                let mean_q2 = acc.sum_q2 as f64 / m;
                LinkStats {
                    mean_q,
                    std_q: (mean_q2 - mean_q * mean_q).max(0.0).sqrt(),
                    mean_t: acc.sum_t as f64 / m,
                    mean_t2: acc.sum_t2 as f64 / m,
                    inter_service: acc.inter.moments(),
                    p_service: acc.served as f64 / m,
                    mean_unused: acc.unused as f64 / m,
                    mean_departed: acc.departed as f64 / m,
                    mean_arrival: acc.arrivals as f64 / m,
                    mean_channel: acc.channel as f64 / m,
                }
            })
            .collect();

        let bl = |l: usize| beta[l] * lambda[l];
        let n = links.len();
        let weighted_norm_i2 = (0..n)
            .map(|l| {
                if beta[l] == 0.0 {
                    return Some(0.0);
                }
                links[l].inter_service.map(|i| {
                    let rho = lambda[l] * i.mean;
                    beta[l] * rho * i.normalized_second_moment()
                })
            })
            .sum::<Option<f64>>();

        Ok(RunStats {
            slots_counted: self.slots,
            sum_beta_lambda: (0..n).map(bl).sum(),
            sum_beta: beta.iter().sum(),
            sum_alpha_mean_q: (0..n).map(|l| alpha[l] * links[l].mean_q).sum(),
            total_mean_q: links.iter().map(|s| s.mean_q).sum(),
            total_mean_q_late: if self.late_slots > 0 {
                self.late_sum_q as f64 / self.late_slots as f64
            } else {
                f64::NAN
            },
            regularity_metric: (0..n).map(|l| bl(l) * links[l].mean_t).sum(),
            weighted_norm_i2,
            h_beta_lambda: (0..n).map(|l| bl(l) * self.links[l].served as f64 / m).sum(),
            h_beta_lambda_t: (0..n).map(|l| bl(l) * self.links[l].sum_t_served as f64 / m).sum(),
            h_beta_lambda_t2: (0..n).map(|l| bl(l) * self.links[l].sum_t2_served as f64 / m).sum(),
            h_beta: (0..n).map(|l| beta[l] * self.links[l].served as f64 / m).sum(),
            links,
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinkStats {
    pub mean_q: f64,
    /// Population standard deviation of `Q_l[t]` over counted slots.
    pub std_q: f64,
    pub mean_t: f64,
    pub mean_t2: f64,
    /// Absent when the link had no complete inter-service interval.
    pub inter_service: Option<InterServiceMoments>,
    /// Fraction of slots with `C_l S_l > 0`.
    pub p_service: f64,
    pub mean_unused: f64,
    pub mean_departed: f64,
    pub mean_arrival: f64,
    pub mean_channel: f64,
}

impl LinkStats {
    /// `|mean T - (E[I^2]/E[I] - 1)/2| / max(mean T, 1)`.
    pub fn lemma1_residual(&self) -> Option<f64> {
        self.inter_service
            .map(|i| (self.mean_t - i.implied_mean_tsls()).abs() / self.mean_t.max(1.0))
    }
}

/// Finalized estimates of one replication.
#[derive(Clone, Debug, PartialEq)]
pub struct RunStats {
    pub links: Vec<LinkStats>,
    pub slots_counted: u64,
    pub sum_beta_lambda: f64,
    pub sum_beta: f64,
    pub sum_alpha_mean_q: f64,
    pub total_mean_q: f64,
    /// Total mean queue over the second half of the counted window.
    pub total_mean_q_late: f64,
    /// `sum_l beta_l lambda_l mean T_l`.
    pub regularity_metric: f64,
    /// `sum_l beta_l rho_l E[I^2]/E[I]^2` with `rho_l = lambda_l E[I_l]`.
    pub weighted_norm_i2: Option<f64>,
    /// Time average of `sum_{l in H} beta_l lambda_l`, `H` = links with a service event.
    pub h_beta_lambda: f64,
    /// Time average of `sum_{l in H} beta_l lambda_l T_l`.
    pub h_beta_lambda_t: f64,
    /// Time average of `sum_{l in H} beta_l lambda_l T_l^2`.
    pub h_beta_lambda_t2: f64,
    /// Time average of `sum_{l in H} beta_l`.
    pub h_beta: f64,
}

impl RunStats {
    pub fn num_links(&self) -> usize {
        self.links.len()
    }

    pub fn lemma1_residual_max(&self) -> Option<f64> {
        self.links
            .iter()
            .filter_map(LinkStats::lemma1_residual)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: f64| a.max(r))))
    }

    /// Residual of `sum beta rho E[I^2]/E[I]^2 = 2 sum beta lambda E[T] + sum beta lambda`.
    pub fn weighted_identity_residual(&self) -> Option<f64> {
        self.weighted_norm_i2
            .map(|lhs| (lhs - (2.0 * self.regularity_metric + self.sum_beta_lambda)).abs())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Lemma2Residuals {
    pub r1_abs: f64,
    pub r1_rel: f64,
    pub r2_abs: f64,
    pub r2_rel: f64,
}

fn relative(lhs: f64, rhs: f64) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if scale == 0.0 {
        0.0
    } else {
        (lhs - rhs).abs() / scale
    }
}

/// Residuals of the first- and second-moment counter identities.
///
/// `r1 = |E[sum_H bl T] - (sum bl - E[sum_H bl])|` and
/// `r2 = |2 sum bl E[T] - (sum bl - E[sum_H bl] + E[sum_H bl T^2])|`, with
/// `bl = beta_l lambda_l`. Relative values divide by the larger side.
pub fn lemma2_residuals(run: &RunStats) -> Lemma2Residuals {
    let rhs1 = run.sum_beta_lambda - run.h_beta_lambda;
    let lhs1 = run.h_beta_lambda_t;
    let lhs2 = 2.0 * run.regularity_metric;
    let rhs2 = rhs1 + run.h_beta_lambda_t2;
    Lemma2Residuals {
        r1_abs: (lhs1 - rhs1).abs(),
        r1_rel: relative(lhs1, rhs1),
        r2_abs: (lhs2 - rhs2).abs(),
        r2_rel: relative(lhs2, rhs2),
    }
}

/// Mean and standard error across replications.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub stderr: Option<f64>,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Option<Self> {
        if samples.is_empty() {
            return None;
        }
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let stderr = (samples.len() >= 2).then(|| {
            let var = samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
            (var / n).sqrt()
        });
        Some(Self { mean, stderr })
    }

    pub fn stderr_or_zero(&self) -> f64 {
        self.stderr.unwrap_or(0.0)
    }

    /// `sqrt(se_a^2 + se_b^2)`.
    pub fn joint_stderr(&self, other: &Estimate) -> f64 {
        self.stderr_or_zero().hypot(other.stderr_or_zero())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn outcome(served: &[bool]) -> SlotOutcome {
        SlotOutcome {
            departed: vec![0; served.len()],
            unused: vec![0; served.len()],
            service_event: served.to_vec(),
        }
    }

    fn state(q: &[Count], t: &[Count], slot: u64) -> SystemState {
        SystemState {
            queues: q.to_vec(),
            tsls: t.to_vec(),
            slot,
        }
    }

    #[test]
    fn conditional_sums_for_single_slot() {
        let mut acc = StatsAccumulator::new(1, 0, 1);
        acc.record_slot(&state(&[0], &[4], 0), &[0], &[1], &outcome(&[true]));
        let run = acc.finalize(&[0.2], &[1.0], &[1.0]).unwrap();
        assert!((run.h_beta_lambda - 0.2).abs() < 1e-15);
        assert!((run.h_beta_lambda_t - 0.8).abs() < 1e-15);
        assert!((run.h_beta_lambda_t2 - 3.2).abs() < 1e-15);
        assert_eq!(run.h_beta, 1.0);
    }

    #[test]
    fn no_service_leaves_conditional_sums_empty() {
        let mut acc = StatsAccumulator::new(2, 0, 2);
        acc.record_slot(&state(&[1, 2], &[3, 4], 0), &[0, 0], &[1, 1], &outcome(&[false, false]));
        let run = acc.finalize(&[0.2, 0.3], &[1.0; 2], &[1.0; 2]).unwrap();
        assert_eq!(run.h_beta_lambda, 0.0);
        assert_eq!(run.h_beta_lambda_t, 0.0);
        assert_eq!(run.h_beta_lambda_t2, 0.0);
    }

    #[test]
    fn mean_queue_over_trajectory() {
        let mut acc = StatsAccumulator::new(1, 0, 4);
        for (slot, q) in [0, 1, 2, 1].into_iter().enumerate() {
            acc.record_slot(&state(&[q], &[0], slot as u64), &[0], &[1], &outcome(&[false]));
        }
        let run = acc.finalize(&[0.5], &[1.0], &[1.0]).unwrap();
        assert_eq!(run.links[0].mean_q, 1.0);
        assert!((run.links[0].std_q - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn inter_service_moments() {
        let mut rec = InterServiceRecorder::default();
        for slot in [3, 7, 12] {
            rec.record_service(slot);
        }
        let m = rec.moments().unwrap();
        assert_eq!(m.samples, 2);
        assert_eq!(m.mean, 4.5);
        assert_eq!(m.second_moment, 20.5);
        assert!((m.normalized_second_moment() - 1.012_345_679).abs() < 1e-9);
        assert_eq!(m.variance(), 0.25);
    }

    fn periodic_run(period: u64, slots: u64, warmup: u64) -> RunStats {
        let mut acc = StatsAccumulator::new(1, warmup, slots);
        let mut st = SystemState::zero(1);
        // counter phase aligned with the first service at slot period - 1
        st.tsls[0] = 0;
        for slot in 0..slots {
            st.slot = slot;
            let served = (slot + 1) % period == 0;
            if slot >= warmup {
                acc.record_slot(&st, &[1], &[1], &outcome(&[served]));
            }
            st.tsls[0] = crate::dynamics::step_tsls(st.tsls[0], 1, served);
        }
        acc.finalize(&[1.0 / period as f64], &[1.0], &[1.0]).unwrap()
    }

    #[test]
    fn periodic_service_is_perfectly_regular() {
        let run = periodic_run(4, 400, 0);
        let link = &run.links[0];
        assert_eq!(link.mean_t, 1.5);
        let i = link.inter_service.unwrap();
        assert_eq!(i.normalized_second_moment(), 1.0);
        assert_eq!(link.lemma1_residual(), Some(0.0));
    }

    #[test]
    fn lemma2_holds_pathwise_over_whole_periods() {
        for period in 1..7 {
            let run = periodic_run(period, 60 * period, 0);
            let r = lemma2_residuals(&run);
            assert!(r.r1_abs < 1e-12, "period {period}: {r:?}");
            assert!(r.r2_abs < 1e-12, "period {period}: {r:?}");
        }
    }

    #[test]
    fn warmup_discards_first_partial_interval() {
        let run = periodic_run(4, 403, 3);
        // services at 3, 7, ..., 399 -> 99 complete intervals after warmup
        assert_eq!(run.links[0].inter_service.unwrap().samples, 99);
        assert_eq!(run.slots_counted, 400);
    }

    #[test]
    fn missing_samples_are_absent_not_zero() {
        let mut acc = StatsAccumulator::new(1, 0, 1);
        acc.record_slot(&state(&[0], &[0], 0), &[0], &[1], &outcome(&[true]));
        let run = acc.finalize(&[0.5], &[1.0], &[1.0]).unwrap();
        assert!(run.links[0].inter_service.is_none());
        assert!(run.weighted_norm_i2.is_none());
    }

    #[test]
    fn finalize_needs_counted_slots() {
        let acc = StatsAccumulator::new(2, 10, 20);
        assert_eq!(acc.finalize(&[0.1; 2], &[1.0; 2], &[1.0; 2]), Err(Error::NoCountedSlots));
    }

    #[test]
    fn estimate_standard_error() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(e.mean, 2.5);
        assert!((e.stderr.unwrap() - (5.0f64 / 12.0).sqrt()).abs() < 1e-12);
        let one = Estimate::from_samples(&[7.0]).unwrap();
        assert_eq!(one.stderr, None);
        assert_eq!(Estimate::from_samples(&[3.0; 5]).unwrap().stderr, Some(0.0));
    }
}

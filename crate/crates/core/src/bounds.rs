//! Closed-form and LP-based analytic quantities: capacity margins, the drift
//! constant and queue bound, the regularity lower and upper bounds, and the
//! quadratic-plus-linear Lyapunov function.

use crate::error::{Error, Result};
use crate::lp;
use crate::model::{ArrivalModel, ChannelModel, Count, DiscreteDist, ScheduleSet};

/// Largest number of joint channel states enumerated for the capacity LP.
pub const MAX_CHANNEL_STATES: usize = 4096;

/// Distance of an arrival-rate vector from the capacity-region boundary.
///
/// Both are positive exactly when the vector lies in the interior.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CapacityMargin {
    /// Largest `eps` with `lambda + eps * 1` in the region.
    pub additive_eps: f64,
    /// Largest `eps` with `lambda * (1 + eps)` in the region.
    pub multiplicative_eps: f64,
}

impl CapacityMargin {
    pub fn is_interior(&self) -> bool {
        self.additive_eps > 0.0 && self.multiplicative_eps > 0.0
    }
}

/// Enumerates the joint channel states as the product of per-link supports.
fn joint_channel_states(dists: &[DiscreteDist]) -> Result<Vec<(Vec<Count>, f64)>> {
    let count = dists
        .iter()
        .try_fold(1usize, |acc, d| acc.checked_mul(d.values().len()).filter(|&n| n <= MAX_CHANNEL_STATES));
    let Some(count) = count else {
        return Err(Error::GuardExceeded {
            what: "joint channel states",
            value: usize::MAX,
            limit: MAX_CHANNEL_STATES,
        });
    };
    let mut states = Vec::with_capacity(count);
    states.push((Vec::with_capacity(dists.len()), 1.0));
    for d in dists {
        states = states
            .into_iter()
            .flat_map(|(c, p)| {
                d.support().map(move |(v, q)| {
                    let mut c = c.clone();
                    c.push(v);
                    (c, p * q)
                })
            })
            .collect();
    }
    Ok(states)
}

/// Solves for both capacity margins of `lambda` by linear programming over
/// per-channel-state time shares of the feasible schedules.
pub fn capacity_margin(lambda: &[f64], schedules: &ScheduleSet, channel: &ChannelModel) -> Result<CapacityMargin> {
    let links = schedules.num_links();
    if lambda.len() != links || channel.len() != links {
        return Err(Error::DimensionMismatch {
            field: "lambda",
            expected: links,
            found: if lambda.len() != links { lambda.len() } else { channel.len() },
        });
    }
    let states = joint_channel_states(&channel.distributions()?)?;

    // Per state, the distinct non-zero service vectors c * s.
    let mut columns: Vec<(usize, Vec<f64>)> = Vec::new();
    for (k, (c, prob)) in states.iter().enumerate() {
        let mut seen: Vec<Vec<Count>> = Vec::new();
        for s in schedules.iter() {
            let rate: Vec<Count> = (0..links).map(|l| if s.is_active(l) { c[l] } else { 0 }).collect();
            if rate.iter().all(|&r| r == 0) || seen.contains(&rate) {
                continue;
            }
            columns.push((k, rate.iter().map(|&r| prob * r as f64).collect()));
            seen.push(rate);
        }
    }
    let shares = columns.len();
    let vars = shares + 1;
    let margin_var = shares;

    // Rows: one time-sharing budget per channel state, then one per link.
    let build = |link_row: &dyn Fn(usize) -> (f64, f64)| {
        let mut a = Vec::with_capacity(states.len() + links);
        let mut b = Vec::with_capacity(states.len() + links);
        for k in 0..states.len() {
            let mut row = vec![0.0; vars];
            for (j, (state, _)) in columns.iter().enumerate() {
                if *state == k {
                    row[j] = 1.0;
                }
            }
            a.push(row);
            b.push(1.0);
        }
        for l in 0..links {
            let mut row = vec![0.0; vars];
            for (j, (_, served)) in columns.iter().enumerate() {
                row[j] = -served[l];
            }
            let (coef, rhs) = link_row(l);
            row[margin_var] = coef;
            a.push(row);
            b.push(rhs);
        }
        (a, b)
    };
    let mut objective = vec![0.0; vars];
    objective[margin_var] = 1.0;

    // lambda_l + eps <= service_l, with eps shifted by max lambda so that the
    // origin is feasible; the optimum is never below -max lambda.
    let shift = lambda.iter().copied().fold(0.0, f64::max);
    let (a, b) = build(&|l| (1.0, shift - lambda[l]));
    let additive = lp::maximize(&objective, &a, &b)?.objective - shift;

    // (1 + eps) lambda_l <= service_l
    let (a, b) = build(&|l| (lambda[l], 0.0));
    let multiplicative = lp::maximize(&objective, &a, &b)?.objective - 1.0;

    Ok(CapacityMargin {
        additive_eps: additive,
        multiplicative_eps: multiplicative,
    })
}

/// For a symmetric rate vector, the common per-link rate on the region boundary.
pub fn symmetric_threshold(lambda: &[f64], margin: &CapacityMargin) -> Option<f64> {
    let first = *lambda.first()?;
    lambda
        .iter()
        .all(|&x| x == first)
        .then_some(first * (1.0 + margin.multiplicative_eps))
}

/// Lower bound on `sum_l beta_l lambda_l E[T_l]` valid for every stabilizing policy:
/// `(sum bl / max_S sum_{l in S} bl - 1) * sum bl / 2`.
pub fn regularity_lower_bound(lambda: &[f64], beta: &[f64], schedules: &ScheduleSet) -> Result<f64> {
    let bl: Vec<f64> = lambda.iter().zip(beta).map(|(l, b)| l * b).collect();
    let total: f64 = bl.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidParameter {
            name: "beta",
            reason: "sum of beta_l * lambda_l must be positive".into(),
        });
    }
    let best = schedules.max_weighted_sum(&bl);
    Ok(0.5 * (total / best - 1.0) * total)
}

/// `sum_l alpha_l (E[A_l^2] + E[C_l^2])`.
fn second_moment_sum(alpha: &[f64], channel: &ChannelModel, arrivals: &ArrivalModel) -> Result<f64> {
    let a = arrivals.distributions()?;
    let c = channel.distributions()?;
    Ok(alpha
        .iter()
        .enumerate()
        .map(|(l, w)| w * (a[l].second_moment() + c[l].second_moment()))
        .sum())
}

/// Upper bound on the regularity metric of the regular-service policy.
///
/// `measured_h_beta` estimates the steady-state mean of `sum_{l in H} beta_l`,
/// which the bound does not close in general; 0 gives the conservative value.
#[allow(clippy::too_many_arguments)]
pub fn regularity_upper_bound(
    alpha: &[f64],
    beta: &[f64],
    gamma: f64,
    channel: &ChannelModel,
    arrivals: &ArrivalModel,
    eps_mult: f64,
    measured_h_beta: f64,
) -> Result<f64> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "gamma",
            reason: format!("{gamma} must be positive for the upper bound"),
        });
    }
    if !(eps_mult > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("multiplicative margin {eps_mult} must be positive"),
        });
    }
    let sum_beta: f64 = beta.iter().sum();
    if !(0.0..=sum_beta * (1.0 + 1e-12)).contains(&measured_h_beta) {
        return Err(Error::InvalidParameter {
            name: "measured_h_beta",
            reason: format!("{measured_h_beta} is outside [0, {sum_beta}]"),
        });
    }
    let c_max = channel.c_max()? as f64;
    let first = c_max / (1.0 + eps_mult) * (sum_beta - measured_h_beta).max(0.0);
    let second = second_moment_sum(alpha, channel, arrivals)? / (2.0 * gamma * (1.0 + eps_mult));
    Ok(first + second)
}

/// `B = 4 gamma C_max sum beta + sum alpha (E[A^2] + E[C^2])`.
pub fn drift_constant_b(
    alpha: &[f64],
    beta: &[f64],
    gamma: f64,
    channel: &ChannelModel,
    arrivals: &ArrivalModel,
) -> Result<f64> {
    let c_max = channel.c_max()? as f64;
    Ok(4.0 * gamma * c_max * beta.iter().sum::<f64>() + second_moment_sum(alpha, channel, arrivals)?)
}

/// Bound `B / (2 eps)` on the long-run `sum_l alpha_l E[Q_l]`.
pub fn queue_bound(b: f64, eps_add: f64) -> Result<f64> {
    if !(eps_add > 0.0) {
        return Err(Error::InvalidParameter {
            name: "eps",
            reason: format!("additive margin {eps_add} must be positive"),
        });
    }
    Ok(b / (2.0 * eps_add))
}

/// `W = sum alpha Q^2 + 4 gamma C_max sum beta T`.
pub fn lyapunov_w(queues: &[Count], tsls: &[Count], alpha: &[f64], beta: &[f64], gamma: f64, c_max: Count) -> f64 {
    let quad: f64 = queues.iter().zip(alpha).map(|(&q, a)| a * (q as f64).powi(2)).sum();
    let lin: f64 = tsls.iter().zip(beta).map(|(&t, b)| b * t as f64).sum();
    quad + 4.0 * gamma * c_max as f64 * lin
}

/// Exact counter statistics under service every `period` slots:
/// `(mean T, E[I^2]/E[I]^2)`.
pub fn lemma1_oracle(period: u64) -> Result<(f64, f64)> {
    if period == 0 {
        return Err(Error::InvalidParameter {
            name: "period",
            reason: "must be at least 1".into(),
        });
    }
    // one cycle visits T = 0, 1, ..., period - 1 once each
    let cycle_sum: u64 = (0..period).sum();
    Ok((cycle_sum as f64 / period as f64, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ArrivalDist, ChannelDist};
    use crate::schedule_space::{single_hop_schedules, switch_matchings};

    fn nonfading(links: usize) -> ChannelModel {
        ChannelModel::uniform(links, ChannelDist::Constant(1))
    }

    #[test]
    fn two_link_simplex_margins() {
        let set = single_hop_schedules(2).unwrap();
        let m = capacity_margin(&[0.3, 0.4], &set, &nonfading(2)).unwrap();
        assert!((m.additive_eps - 0.15).abs() < 1e-9);
        assert!((m.multiplicative_eps - (1.0 / 0.7 - 1.0)).abs() < 1e-9);
        assert!(m.is_interior());
    }

    #[test]
    fn symmetric_region_thresholds() {
        let set = single_hop_schedules(4).unwrap();
        let m = capacity_margin(&[0.225; 4], &set, &nonfading(4)).unwrap();
        assert!((m.additive_eps - 0.025).abs() < 1e-9);
        assert!((symmetric_threshold(&[0.225; 4], &m).unwrap() - 0.25).abs() < 1e-9);

        let fading = ChannelModel::uniform(4, ChannelDist::OnOff { rate: 1, q: 0.8 });
        let m = capacity_margin(&[0.2; 4], &set, &fading).unwrap();
        let boundary = (1.0 - 0.2f64.powi(4)) / 4.0;
        assert!((boundary - 0.2496).abs() < 1e-12);
        assert!((symmetric_threshold(&[0.2; 4], &m).unwrap() - boundary).abs() < 1e-9);
        assert!((m.additive_eps - (boundary - 0.2)).abs() < 1e-9);

        let switch = switch_matchings(3).unwrap();
        let m = capacity_margin(&[0.3; 9], &switch, &nonfading(9)).unwrap();
        assert!((symmetric_threshold(&[0.3; 9], &m).unwrap() - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn outside_region_gives_negative_margins() {
        let set = single_hop_schedules(4).unwrap();
        let m = capacity_margin(&[0.3; 4], &set, &nonfading(4)).unwrap();
        assert!((m.additive_eps + 0.05).abs() < 1e-9);
        assert!(m.multiplicative_eps < 0.0);
        assert!(!m.is_interior());
    }

    #[test]
    fn lower_bound_examples() {
        let set = single_hop_schedules(4).unwrap();
        let lb = regularity_lower_bound(&[0.225; 4], &[1.0; 4], &set).unwrap();
        assert!((lb - 1.35).abs() < 1e-12);
        // symmetric link-sum form L(L-1)/2
        assert!((lb / 0.225 - 6.0).abs() < 1e-12);

        let full = crate::schedule_space::conflict_graph_schedules(3, &[]).unwrap();
        assert_eq!(regularity_lower_bound(&[0.2, 0.3, 0.1], &[1.0; 3], &full).unwrap(), 0.0);
    }

    #[test]
    fn lower_bound_scale_consistency() {
        let set = switch_matchings(3).unwrap();
        let lambda = [0.5, 0.3, 0.1, 0.2, 0.4, 0.3, 0.1, 0.2, 0.5];
        let beta = [1.0, 0.5, 2.0, 1.0, 1.0, 0.0, 3.0, 1.0, 1.0];
        let base = regularity_lower_bound(&lambda, &beta, &set).unwrap();
        for k in [0.25, 3.0, 17.0] {
            let scaled: Vec<f64> = beta.iter().map(|b| b * k).collect();
            let v = regularity_lower_bound(&lambda, &scaled, &set).unwrap() / k;
            assert!((v - base).abs() < 1e-12 * base.max(1.0));
        }
    }

    fn fading_traffic() -> (ChannelModel, ArrivalModel) {
        (nonfading(4), ArrivalModel::uniform(4, ArrivalDist::Bernoulli { p: 0.225 }))
    }

    #[test]
    fn upper_bound_examples() {
        let (c, a) = fading_traffic();
        let second = regularity_upper_bound(&[1.0; 4], &[1.0; 4], 1.0, &c, &a, 0.1111, 4.0).unwrap();
        assert!((second - 4.9 / 2.2222).abs() < 1e-12);
        assert!((second - 2.205).abs() < 1e-3);

        // gamma -> infinity at lambda = 1 / (L (1 + eps)): link-sum bound L (L - 1)
        let eps = 0.25 / 0.225 - 1.0;
        let ub = regularity_upper_bound(&[1.0; 4], &[1.0; 4], 1e12, &c, &a, eps, 1.0).unwrap();
        assert!((ub / 0.225 - 12.0).abs() < 1e-6);

        assert!(regularity_upper_bound(&[1.0; 4], &[1.0; 4], 0.0, &c, &a, 0.1, 0.0).is_err());
        assert!(regularity_upper_bound(&[1.0; 4], &[1.0; 4], 1.0, &c, &a, 0.0, 0.0).is_err());
        assert!(regularity_upper_bound(&[1.0; 4], &[1.0; 4], 1.0, &c, &a, 0.1, 4.5).is_err());
    }

    #[test]
    fn drift_constant_and_queue_bound() {
        let (c, a) = fading_traffic();
        let b = drift_constant_b(&[1.0; 4], &[1.0; 4], 1.0, &c, &a).unwrap();
        assert!((b - 20.9).abs() < 1e-12);
        let b0 = drift_constant_b(&[1.0; 4], &[1.0; 4], 0.0, &c, &a).unwrap();
        assert!((b0 - 4.9).abs() < 1e-12);
        let b2 = drift_constant_b(&[1.0; 4], &[1.0; 4], 2.0, &c, &a).unwrap();
        assert!((b2 - b - 16.0).abs() < 1e-12);

        assert!((queue_bound(20.9, 0.025).unwrap() - 418.0).abs() < 1e-9);
        assert!((queue_bound(20.9, 0.1).unwrap() - 104.5).abs() < 1e-9);
        assert!(queue_bound(20.9, 0.0).is_err());
    }

    #[test]
    fn lyapunov_examples() {
        assert_eq!(lyapunov_w(&[2, 0], &[0, 3], &[1.0; 2], &[1.0; 2], 1.0, 1), 16.0);
        assert_eq!(lyapunov_w(&[0, 0], &[0, 0], &[1.0; 2], &[1.0; 2], 1.0, 1), 0.0);
        assert_eq!(lyapunov_w(&[2, 3], &[5, 3], &[1.0, 2.0], &[1.0; 2], 0.0, 4), 22.0);
    }

    #[test]
    fn lemma1_oracle_examples() {
        assert_eq!(lemma1_oracle(4).unwrap(), (1.5, 1.0));
        assert_eq!(lemma1_oracle(1).unwrap(), (0.0, 1.0));
        let (mean_t, _) = lemma1_oracle(2).unwrap();
        // renewal identity with I = 2 deterministically
        assert_eq!(mean_t, 0.5 * (4.0 / 2.0 - 1.0));
        assert!(lemma1_oracle(0).is_err());
    }

    #[test]
    fn channel_state_guard() {
        let set = single_hop_schedules(13).unwrap();
        let fading = ChannelModel::uniform(13, ChannelDist::OnOff { rate: 1, q: 0.5 });
        assert!(matches!(
            capacity_margin(&[0.01; 13], &set, &fading),
            Err(Error::GuardExceeded { .. })
        ));
    }
}

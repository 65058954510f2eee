#![allow(dead_code)]

use regsched::model::*;

/// Stationary quantities of the two-link max-weight chain.
#[derive(Debug, Clone, Copy)]
pub struct ChainSolution {
    pub mean_q: [f64; 2],
    pub mean_t: [f64; 2],
    /// Probability mass on the truncation boundary.
    pub boundary_mass: f64,
    pub iterations: usize,
}

/// Power iteration on the `(Q1, Q2, T1, T2)` chain of a two-link single-hop
/// network with unit service, Bernoulli(`p`) arrivals on both links and
/// max-queue scheduling with ties to link 1.
///
/// Exactly one link is served per slot, so after the first slot one counter
/// is zero; a state is stored as `(q1, q2, last served, other counter)`.
/// Queues are capped at `q_cap` and counters at `t_cap`.
pub fn two_link_max_weight_chain(p: [f64; 2], q_cap: usize, t_cap: usize) -> ChainSolution {
    let nq = q_cap + 1;
    let index = |q1: usize, q2: usize, served: usize, t: usize| ((q1 * nq + q2) * 2 + served) * t_cap + (t - 1);
    let states = nq * nq * 2 * t_cap;
    let arrival = |a1: usize, a2: usize| {
        (if a1 == 1 { p[0] } else { 1.0 - p[0] }) * (if a2 == 1 { p[1] } else { 1.0 - p[1] })
    };

    let mut pi = vec![0.0; states];
    pi[index(0, 0, 0, 1)] = 1.0;
    let mut next = vec![0.0; states];
    let mut iterations = 0;
    loop {
        next.iter_mut().for_each(|x| *x = 0.0);
        for q1 in 0..nq {
            for q2 in 0..nq {
                let serve = if q1 >= q2 { 0 } else { 1 };
                for last in 0..2 {
                    for t in 1..=t_cap {
                        let mass = pi[index(q1, q2, last, t)];
                        if mass == 0.0 {
                            continue;
                        }
                        // the link not served now: its counter grows by one
                        let t_next = if serve == last { (t + 1).min(t_cap) } else { 1 };
                        for a1 in 0..2 {
                            for a2 in 0..2 {
                                let mut q = [q1 + a1, q2 + a2];
                                q[serve] = q[serve].saturating_sub(1);
                                let q = [q[0].min(q_cap), q[1].min(q_cap)];
                                next[index(q[0], q[1], serve, t_next)] += mass * arrival(a1, a2);
                            }
                        }
                    }
                }
            }
        }
        iterations += 1;
        let diff: f64 = pi.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut pi, &mut next);
        if diff < 1e-14 || iterations > 100_000 {
            break;
        }
    }

    let mut mean_q = [0.0; 2];
    let mut mean_t = [0.0; 2];
    let mut boundary_mass = 0.0;
    for q1 in 0..nq {
        for q2 in 0..nq {
            for last in 0..2 {
                for t in 1..=t_cap {
                    let m = pi[index(q1, q2, last, t)];
                    mean_q[0] += m * q1 as f64;
                    mean_q[1] += m * q2 as f64;
                    mean_t[1 - last] += m * t as f64;
                    if q1 == q_cap || q2 == q_cap || t == t_cap {
                        boundary_mass += m;
                    }
                }
            }
        }
    }
    ChainSolution {
        mean_q,
        mean_t,
        boundary_mass,
        iterations,
    }
}

/// Maximum of `sum w_l c_l` over every partial matching of an `n x n` switch,
/// by enumerating all link subsets.
pub fn brute_force_switch_max(n: usize, w: &[f64], c: &[Count]) -> f64 {
    let links = n * n;
    let mut best = 0.0f64;
    'subsets: for mask in 0u32..(1 << links) {
        let mut rows = 0u32;
        let mut cols = 0u32;
        let mut value = 0.0;
        for l in 0..links {
            if mask & (1 << l) != 0 {
                let (i, j) = (l / n, l % n);
                if rows & (1 << i) != 0 || cols & (1 << j) != 0 {
                    continue 'subsets;
                }
                rows |= 1 << i;
                cols |= 1 << j;
                value += w[l] * c[l] as f64;
            }
        }
        best = best.max(value);
    }
    best
}

pub fn run(horizon: u64, replications: usize, seed: u64) -> RunParams {
    RunParams {
        horizon,
        warmup: 10_000,
        seed,
        replications,
    }
}

/// Single-hop network with unit non-fading channels and Bernoulli arrivals.
pub fn single_hop(p: &[f64], policy: PolicySpec, run: RunParams) -> SimConfig {
    let links = p.len();
    SimConfig {
        topology: Topology::SingleHop { links },
        channel: ChannelModel::uniform(links, ChannelDist::Constant(1)),
        arrivals: ArrivalModel(p.iter().map(|&p| ArrivalDist::Bernoulli { p }).collect()),
        policy,
        run,
    }
}

/// Two links with rate-4 channels: one packet per slot on link 1 and
/// `2k` packets with probability `1/k` on link 2.
pub fn two_link_bursty(k: u64, policy: PolicySpec, run: RunParams) -> SimConfig {
    SimConfig {
        topology: Topology::SingleHop { links: 2 },
        channel: ChannelModel::uniform(2, ChannelDist::Constant(4)),
        arrivals: ArrivalModel(vec![ArrivalDist::Constant(1), ArrivalDist::Bursty { k, scale: 1 }]),
        policy,
        run,
    }
}

/// Regular-service policy on the two-link setup: regularity matters on link 1 only.
pub fn link1_regular(kind: PolicyKind, gamma: f64) -> PolicySpec {
    PolicySpec {
        kind,
        beta: vec![1.0, 0.0],
        ..PolicySpec::rsg(2, gamma)
    }
}

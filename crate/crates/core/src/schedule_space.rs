//! Feasible-schedule sets for the supported interference models.
//!
//! Only maximal schedules are enumerated: with non-negative weights a
//! max-weight schedule can always be found among them.

use crate::error::{Error, Result};
use crate::model::{ScheduleOrigin, ScheduleSet, ScheduleVector};

pub const MAX_SWITCH_PORTS: usize = 6;
pub const MAX_CONFLICT_LINKS: usize = 20;

/// One link per slot: the `links` one-hot vectors, link 0 first.
pub fn single_hop_schedules(links: usize) -> Result<ScheduleSet> {
    if links == 0 {
        return Err(Error::EmptyTopology);
    }
    let schedules = (0..links)
        .map(|l| ScheduleVector::from_active(links, &[l]))
        .collect();
    ScheduleSet::new(links, schedules, ScheduleOrigin::SingleHop)
}

/// All `n!` perfect matchings of an `n x n` switch, in lexicographic order of
/// the input-to-output permutation.
pub fn switch_matchings(n: usize) -> Result<ScheduleSet> {
    if n == 0 {
        return Err(Error::EmptyTopology);
    }
    if n > MAX_SWITCH_PORTS {
        return Err(Error::GuardExceeded {
            what: "switch ports",
            value: n,
            limit: MAX_SWITCH_PORTS,
        });
    }
    let links = n * n;
    let mut perm: Vec<usize> = (0..n).collect();
    let mut schedules = Vec::new();
    loop {
        let active: Vec<usize> = perm.iter().enumerate().map(|(i, &j)| i * n + j).collect();
        schedules.push(ScheduleVector::from_active(links, &active));
        if !next_permutation(&mut perm) {
            break;
        }
    }
    ScheduleSet::new(links, schedules, ScheduleOrigin::Switch(n))
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// All maximal independent sets of the conflict graph, ordered so that
/// schedules activating lower-indexed links come first.
pub fn conflict_graph_schedules(links: usize, edges: &[(usize, usize)]) -> Result<ScheduleSet> {
    if links == 0 {
        return Err(Error::EmptyTopology);
    }
    if links > MAX_CONFLICT_LINKS {
        return Err(Error::GuardExceeded {
            what: "conflict-graph links",
            value: links,
            limit: MAX_CONFLICT_LINKS,
        });
    }
    let mut neighbors = vec![0u32; links];
    for &(a, b) in edges {
        if a >= links || b >= links {
            return Err(Error::EdgeOutOfRange { a, b, links });
        }
        if a == b {
            return Err(Error::SelfLoop(a));
        }
        neighbors[a] |= 1 << b;
        neighbors[b] |= 1 << a;
    }

    let mut sets: Vec<ScheduleVector> = Vec::new();
    for mask in 1u32..(1u32 << links) {
        let independent = (0..links).all(|l| mask & (1 << l) == 0 || neighbors[l] & mask == 0);
        if !independent {
            continue;
        }
        let maximal = (0..links).all(|l| mask & (1 << l) != 0 || neighbors[l] & mask != 0);
        if maximal {
            sets.push(ScheduleVector::from_bits(
                (0..links).map(|l| mask & (1 << l) != 0).collect(),
            ));
        }
    }
    sets.sort_unstable_by(|x, y| y.cmp(x));
    ScheduleSet::new(links, sets, ScheduleOrigin::ConflictGraph)
}

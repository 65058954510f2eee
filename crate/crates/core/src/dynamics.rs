//! One-slot transitions of queues and time-since-last-service counters.
//!
//! Within a slot the scheduler sees `(Q[t], T[t])` and the channel `C[t]`;
//! arrivals `A[t]` are added afterwards and can be served in the same slot.

use crate::error::{Error, Result};
use crate::model::{Count, ScheduleVector, SystemState, TsLsMode};

/// `(q + a - c*s)^+`.
#[inline]
pub fn step_queue(q: Count, a: Count, c: Count, s: bool) -> Count {
    (q + a).saturating_sub(offered(c, s))
}

/// Counter update: 0 after a service event (`c*s > 0`), otherwise `t + 1`.
/// A service event does not require backlog.
#[inline]
pub fn step_tsls(t: Count, c: Count, s: bool) -> Count {
    if offered(c, s) > 0 {
        0
    } else {
        t + 1
    }
}

/// Variant counter: like [`step_tsls`], but frozen while `backlog` is zero.
///
/// `backlog` is the queue length the scheduler observed at the start of the
/// slot.
#[inline]
pub fn step_tsls_variant(t: Count, backlog: Count, c: Count, s: bool) -> Count {
    if offered(c, s) > 0 {
        0
    } else if backlog == 0 {
        t
    } else {
        t + 1
    }
}

/// Splits the offered service `c*s` into packets sent and capacity wasted.
#[inline]
pub fn departures_and_unused(q: Count, a: Count, c: Count, s: bool) -> (Count, Count) {
    let offered = offered(c, s);
    let departed = (q + a).min(offered);
    (departed, offered - departed)
}

#[inline]
fn offered(c: Count, s: bool) -> Count {
    if s {
        c
    } else {
        0
    }
}

/// Per-link quantities produced by one slot.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SlotOutcome {
    pub departed: Vec<Count>,
    pub unused: Vec<Count>,
    pub service_event: Vec<bool>,
}

impl SlotOutcome {
    pub fn with_links(num_links: usize) -> Self {
        Self {
            departed: vec![0; num_links],
            unused: vec![0; num_links],
            service_event: vec![false; num_links],
        }
    }
}

/// Applies the queue and counter updates to every link and advances the slot.
pub fn advance_slot(
    state: &SystemState,
    arrivals: &[Count],
    channel: &[Count],
    schedule: &ScheduleVector,
    mode: TsLsMode,
) -> Result<(SystemState, SlotOutcome)> {
    let links = state.num_links();
    for (field, found) in [
        ("tsls", state.tsls.len()),
        ("arrivals", arrivals.len()),
        ("channel", channel.len()),
        ("schedule", schedule.len()),
    ] {
        if found != links {
            return Err(Error::DimensionMismatch {
                field,
                expected: links,
                found,
            });
        }
    }
    let mut next = state.clone();
    let mut outcome = SlotOutcome::with_links(links);
    evaluate_slot(state, arrivals, channel, schedule.bits(), &mut outcome);
    commit_slot(&mut next, arrivals, channel, schedule.bits(), mode, &outcome);
    Ok((next, outcome))
}

/// Computes departures, unused service and service events without touching
/// the state. Dimensions are the caller's responsibility.
#[inline]
pub(crate) fn evaluate_slot(
    state: &SystemState,
    arrivals: &[Count],
    channel: &[Count],
    schedule: &[bool],
    out: &mut SlotOutcome,
) {
    for l in 0..state.queues.len() {
        let (d, u) = departures_and_unused(state.queues[l], arrivals[l], channel[l], schedule[l]);
        out.departed[l] = d;
        out.unused[l] = u;
        out.service_event[l] = offered(channel[l], schedule[l]) > 0;
    }
}

/// Moves `state` to the next slot using an outcome from [`evaluate_slot`].
#[inline]
pub(crate) fn commit_slot(
    state: &mut SystemState,
    arrivals: &[Count],
    channel: &[Count],
    schedule: &[bool],
    mode: TsLsMode,
    outcome: &SlotOutcome,
) {
    for l in 0..state.queues.len() {
        let q = state.queues[l];
        let t = state.tsls[l];
        state.tsls[l] = match mode {
            TsLsMode::Standard => step_tsls(t, channel[l], schedule[l]),
            TsLsMode::Variant => step_tsls_variant(t, q, channel[l], schedule[l]),
        };
        state.queues[l] = q + arrivals[l] - outcome.departed[l];
    }
    state.slot += 1;
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn queue_examples() {
        assert_eq!(step_queue(5, 2, 4, true), 3);
        assert_eq!(step_queue(1, 0, 4, true), 0);
        assert_eq!(step_queue(3, 2, 7, false), 5);
    }

    #[test]
    fn tsls_examples() {
        assert_eq!(step_tsls(7, 3, true), 0);
        assert_eq!(step_tsls(7, 1, false), 8);
        assert_eq!(step_tsls(7, 0, true), 8);
    }

    #[test]
    fn tsls_variant_examples() {
        assert_eq!(step_tsls_variant(4, 0, 0, false), 4);
        assert_eq!(step_tsls_variant(4, 3, 0, true), 5);
        assert_eq!(step_tsls_variant(4, 3, 2, true), 0);
    }

    #[test]
    fn departure_examples() {
        assert_eq!(departures_and_unused(1, 0, 4, true), (1, 3));
        assert_eq!(departures_and_unused(5, 2, 4, true), (4, 0));
        assert_eq!(departures_and_unused(0, 0, 4, false), (0, 0));
    }

    #[test]
    fn advance_two_links() {
        let state = SystemState {
            queues: vec![5, 1],
            tsls: vec![0, 7],
            slot: 10,
        };
        let s = ScheduleVector::parse("10").unwrap();
        let (next, out) = advance_slot(&state, &[2, 0], &[4, 4], &s, TsLsMode::Standard).unwrap();
        assert_eq!(next.queues, vec![3, 1]);
        assert_eq!(next.tsls, vec![0, 8]);
        assert_eq!(next.slot, 11);
        assert_eq!(out.departed, vec![4, 0]);
        assert_eq!(out.unused, vec![0, 0]);
        assert_eq!(out.service_event, vec![true, false]);
    }

    #[test]
    fn advance_from_zero_state_wastes_service() {
        let state = SystemState {
            queues: vec![0, 0],
            tsls: vec![5, 2],
            slot: 0,
        };
        let s = ScheduleVector::parse("10").unwrap();
        let (next, out) = advance_slot(&state, &[0, 0], &[3, 2], &s, TsLsMode::Standard).unwrap();
        assert_eq!(next.queues, vec![0, 0]);
        assert_eq!(next.tsls[0], 0);
        assert_eq!(out.unused[0], 3);
    }

    #[test]
    fn variant_freezes_idle_links() {
        let state = SystemState {
            queues: vec![0, 0],
            tsls: vec![3, 9],
            slot: 4,
        };
        let s = ScheduleVector::parse("00").unwrap();
        let (next, _) = advance_slot(&state, &[0, 0], &[1, 1], &s, TsLsMode::Variant).unwrap();
        assert_eq!(next.tsls, vec![3, 9]);
    }

    #[test]
    fn advance_rejects_mismatched_dimensions() {
        let state = SystemState::zero(2);
        let s = ScheduleVector::parse("10").unwrap();
        assert!(matches!(
            advance_slot(&state, &[0, 0, 0], &[1, 1], &s, TsLsMode::Standard),
            Err(Error::DimensionMismatch { field: "arrivals", .. })
        ));
    }

    proptest! {
        #[test]
        fn per_link_conservation(q in 0u64..50, a in 0u64..20, c in 0u64..10, s: bool) {
            let (d, u) = departures_and_unused(q, a, c, s);
            prop_assert_eq!(q + a - d, step_queue(q, a, c, s));
            prop_assert_eq!(d + u, if s { c } else { 0 });
        }

        #[test]
        fn standard_counter_dichotomy(t in 0u64..1000, c in 0u64..5, s: bool) {
            let next = step_tsls(t, c, s);
            prop_assert!(next == 0 || next == t + 1);
            prop_assert_eq!(next == 0, c > 0 && s);
        }

        #[test]
        fn variant_never_exceeds_standard(
            steps in prop::collection::vec((0u64..3, 0u64..3, any::<bool>()), 1..300),
        ) {
            let mut std_state = SystemState::zero(1);
            let mut var_state = SystemState::zero(1);
            for (a, c, s) in steps {
                let sched = ScheduleVector::from_bits(vec![s]);
                let (n1, _) = advance_slot(&std_state, &[a], &[c], &sched, TsLsMode::Standard).unwrap();
                let (n2, _) = advance_slot(&var_state, &[a], &[c], &sched, TsLsMode::Variant).unwrap();
                // identical schedules give identical queues in both modes
                prop_assert_eq!(&n1.queues, &n2.queues);
                prop_assert!(n2.tsls[0] <= n1.tsls[0]);
                std_state = n1;
                var_state = n2;
            }
        }
    }
}

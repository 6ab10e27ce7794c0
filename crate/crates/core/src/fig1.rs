//! Hand-built five-channel, one-pair replay of the worked handoff example.
//!
//! The pair starts on channel 3. A PU returns to channel 3 at slot 11, so the
//! pair moves to channel 4, the only channel idle with the longest vacancy.
//! At slot 19 a PU returns to channel 4 while every other channel is busy for
//! much longer, so the pair stays and waits it out.

use std::collections::BTreeSet;
use std::fmt;

use crate::mac::{Event, EventTrace, SimInputs, Simulator};
use crate::metrics::RunMetrics;
use crate::model::{Channel, Protocol, SimConfig, Slot};
use crate::traffic::{PuSchedule, SuArrivals};

pub const SCHEDULE_CSV: &str = "\
channel,start_slot,end_slot
1,0,4
1,14,113
2,0,119
3,11,110
4,0,8
4,19,28
5,0,3
5,12,111
";

pub fn config() -> SimConfig {
    SimConfig {
        num_channels: 5,
        num_pairs: 1,
        data_phase_slots: 7,
        handoff_delay: 1,
        horizon: 120,
        lambda_p: 0.0,
        lambda_s: 0.0,
        su_packet_bits: 60_000,
        protocol: Protocol::GcsSrv,
        seed: 1,
        ..SimConfig::default()
    }
}

pub fn inputs() -> SimInputs {
    let cfg = config();
    SimInputs {
        schedule: PuSchedule::from_csv(SCHEDULE_CSV, cfg.num_channels, cfg.horizon)
            .expect("fixture schedule is valid"),
        arrivals: vec![SuArrivals { slots: vec![0] }],
    }
}

/// A channel decision driven by an upcoming PU arrival.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Switch {
        from: Channel,
        to: Channel,
        pu_at: Slot,
    },
    Stay {
        channel: Channel,
        pu_at: Slot,
    },
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Decision::Switch { from, to, pu_at } => {
                write!(f, "switch {}→{} at slot {pu_at}", from.0, to.0)
            }
            Decision::Stay { channel, pu_at } => write!(f, "stay on {} at slot {pu_at}", channel.0),
        }
    }
}

/// PU-driven decisions in trace order, one per PU arrival.
pub fn decisions(trace: &EventTrace) -> Vec<Decision> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for r in trace.records() {
        let d = match r.event {
            Event::Handoff {
                from,
                to,
                pu_at: Some(pu_at),
                ..
            } => Decision::Switch { from, to, pu_at },
            Event::Stay { channel, pu_at, .. } => Decision::Stay { channel, pu_at },
            _ => continue,
        };
        let key = match d {
            Decision::Switch { from, pu_at, .. } => (from, pu_at),
            Decision::Stay { channel, pu_at } => (channel, pu_at),
        };
        if seen.insert(key) {
            out.push(d);
        }
    }
    out
}

pub fn narrative(decisions: &[Decision]) -> String {
    decisions
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

pub struct Replay {
    pub metrics: RunMetrics,
    pub trace: EventTrace,
    pub decisions: Vec<Decision>,
}

pub fn replay() -> Replay {
    let cfg = config().validate().expect("fixture config is valid");
    let (metrics, trace) = Simulator::new(&cfg, inputs(), true).run();
    let decisions = decisions(&trace);
    Replay {
        metrics,
        trace,
        decisions,
    }
}

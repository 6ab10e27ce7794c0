//! Append-only event log of a run, serialized as `slot<TAB>kind<TAB>key=value...`.

use std::fmt::{self, Write as _};

use sha2::{Digest, Sha256};

use crate::model::{Channel, PairId, Slot};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Event {
    Frame {
        frame: u64,
    },
    PuStart {
        channel: Channel,
    },
    PuStop {
        channel: Channel,
    },
    /// Common coordination channel for this control phase.
    Rendezvous {
        channel: Channel,
    },
    /// Every rendezvous candidate was SU-occupied; no coordination this frame.
    NoRendezvous,
    Prs {
        order: Vec<PairId>,
    },
    /// A PU arrival at `pu_at` ahead on the pair's channel; the pair keeps it.
    Stay {
        pair: PairId,
        channel: Channel,
        pu_at: Slot,
        staying: u64,
    },
    /// The pair asks for a handoff in the first part of the control phase.
    HandoffRequest {
        pair: PairId,
        channel: Channel,
        pu_at: Option<Slot>,
    },
    SenseBroadcast {
        pair: PairId,
        mini_slot: u64,
    },
    Rts {
        pair: PairId,
        channel: Channel,
        mini_slot: u64,
    },
    Cts {
        pair: PairId,
        channel: Channel,
        mini_slot: u64,
    },
    Assign {
        pair: PairId,
        channel: Channel,
    },
    Handoff {
        pair: PairId,
        from: Channel,
        to: Channel,
        pu_at: Option<Slot>,
    },
    /// Contended but got nothing; retries next control phase.
    Wait {
        pair: PairId,
    },
    Release {
        pair: PairId,
        channel: Channel,
    },
    /// Fell silent ahead of a PU on its channel.
    Pause {
        pair: PairId,
        channel: Channel,
    },
    Complete {
        pair: PairId,
        service_slots: u64,
    },
    PuCollision {
        pair: PairId,
        channel: Channel,
    },
    SuCollision {
        channel: Channel,
        pairs: Vec<PairId>,
    },
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn opt(v: Option<Slot>) -> String {
    v.map_or_else(|| "-".into(), |s| s.to_string())
}

impl Event {
    pub fn kind(&self) -> &'static str {
        match self {
            Event::Frame { .. } => "frame",
            Event::PuStart { .. } => "pu_start",
            Event::PuStop { .. } => "pu_stop",
            Event::Rendezvous { .. } => "rendezvous",
            Event::NoRendezvous => "no_rendezvous",
            Event::Prs { .. } => "prs",
            Event::Stay { .. } => "stay",
            Event::HandoffRequest { .. } => "handoff_request",
            Event::SenseBroadcast { .. } => "sense_broadcast",
            Event::Rts { .. } => "rts",
            Event::Cts { .. } => "cts",
            Event::Assign { .. } => "assign",
            Event::Handoff { .. } => "handoff",
            Event::Wait { .. } => "wait",
            Event::Release { .. } => "release",
            Event::Pause { .. } => "pause",
            Event::Complete { .. } => "complete",
            Event::PuCollision { .. } => "pu_collision",
            Event::SuCollision { .. } => "su_collision",
        }
    }

    fn fields(&self) -> Vec<(&'static str, String)> {
        match self {
            Event::Frame { frame } => vec![("frame", frame.to_string())],
            Event::PuStart { channel } | Event::PuStop { channel } => {
                vec![("channel", channel.to_string())]
            }
            Event::Rendezvous { channel } => vec![("channel", channel.to_string())],
            Event::NoRendezvous => vec![],
            Event::Prs { order } => vec![("order", join(order))],
            Event::Stay {
                pair,
                channel,
                pu_at,
                staying,
            } => vec![
                ("pair", pair.to_string()),
                ("channel", channel.to_string()),
                ("pu_at", pu_at.to_string()),
                ("staying", staying.to_string()),
            ],
            Event::HandoffRequest {
                pair,
                channel,
                pu_at,
            } => vec![
                ("pair", pair.to_string()),
                ("channel", channel.to_string()),
                ("pu_at", opt(*pu_at)),
            ],
            Event::SenseBroadcast { pair, mini_slot } => vec![
                ("pair", pair.to_string()),
                ("mini_slot", mini_slot.to_string()),
            ],
            Event::Rts {
                pair,
                channel,
                mini_slot,
            }
            | Event::Cts {
                pair,
                channel,
                mini_slot,
            } => vec![
                ("pair", pair.to_string()),
                ("channel", channel.to_string()),
                ("mini_slot", mini_slot.to_string()),
            ],
            Event::Assign { pair, channel }
            | Event::Release { pair, channel }
            | Event::Pause { pair, channel }
            | Event::PuCollision { pair, channel } => {
                vec![("pair", pair.to_string()), ("channel", channel.to_string())]
            }
            Event::Handoff {
                pair,
                from,
                to,
                pu_at,
            } => vec![
                ("pair", pair.to_string()),
                ("from", from.to_string()),
                ("to", to.to_string()),
                ("pu_at", opt(*pu_at)),
            ],
            Event::Wait { pair } => vec![("pair", pair.to_string())],
            Event::Complete {
                pair,
                service_slots,
            } => vec![
                ("pair", pair.to_string()),
                ("service_slots", service_slots.to_string()),
            ],
            Event::SuCollision { channel, pairs } => {
                vec![("channel", channel.to_string()), ("pairs", join(pairs))]
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub slot: Slot,
    pub event: Event,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}", self.slot, self.event.kind())?;
        for (k, v) in self.event.fields() {
            write!(f, "\t{k}={v}")?;
        }
        Ok(())
    }
}

/// Ordered event log. A disabled trace drops everything pushed to it.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EventTrace {
    enabled: bool,
    records: Vec<TraceRecord>,
}

impl EventTrace {
    pub fn new(enabled: bool) -> Self {
        EventTrace {
            enabled,
            records: Vec::new(),
        }
    }

    pub fn enabled(&self) -> bool {
        self.enabled
    }

    pub fn push(&mut self, slot: Slot, event: Event) {
        if self.enabled {
            debug_assert!(self.records.last().is_none_or(|r| r.slot <= slot));
            self.records.push(TraceRecord { slot, event });
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(self.records.len() * 32);
        for r in &self.records {
            let _ = writeln!(out, "{r}");
        }
        out
    }

    /// SHA-256 of [`EventTrace::serialize`], hex encoded.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.records {
            h.update(r.to_string().as_bytes());
            h.update(b"\n");
        }
        h.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

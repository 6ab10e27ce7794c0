//! State carried by one SU transmitter/receiver pair.

use crate::gcs::SuFlags;
use crate::model::{Channel, PairId, Slot};

/// The packet currently being sent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InFlight {
    pub arrival: Slot,
    /// First slot at which the protocol tried to serve this packet.
    pub service_start: Slot,
    pub remaining_bits: u64,
}

/// Timestamps of a delivered packet.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PacketRecord {
    pub arrival: Slot,
    pub service_start: Slot,
    pub completion: Slot,
}

impl PacketRecord {
    /// Slots from first contention to completion, both inclusive.
    pub fn service_slots(&self) -> u64 {
        self.completion - self.service_start + 1
    }
}

#[derive(Debug, Clone)]
pub struct SuPairState {
    pub id: PairId,
    arrivals: Vec<Slot>,
    /// Packets whose arrival slot has been reached.
    arrived: usize,
    /// Packets taken off the queue (in flight or delivered).
    started: usize,
    pub in_flight: Option<InFlight>,
    pub channel: Option<Channel>,
    pub flags: SuFlags,
    /// Slots of silence still owed after a handoff.
    pub retune_left: u64,
    /// Silent for the rest of the current data phase.
    pub halted: bool,
    pub delivered_bits: u64,
    pub completed: Vec<PacketRecord>,
    pub collision_slots: u64,
}

impl SuPairState {
    pub fn new(id: PairId, arrivals: Vec<Slot>) -> Self {
        debug_assert!(arrivals.windows(2).all(|w| w[0] <= w[1]));
        SuPairState {
            id,
            arrivals,
            arrived: 0,
            started: 0,
            in_flight: None,
            channel: None,
            flags: SuFlags::default(),
            retune_left: 0,
            halted: false,
            delivered_bits: 0,
            completed: Vec::new(),
            collision_slots: 0,
        }
    }

    /// Node ids of the transmitter and receiver.
    pub fn nodes(&self) -> (u32, u32) {
        (2 * self.id.0 - 1, 2 * self.id.0)
    }

    /// Admits every packet that has arrived by slot `t`.
    pub fn admit_arrivals(&mut self, t: Slot) {
        while self.arrived < self.arrivals.len() && self.arrivals[self.arrived] <= t {
            self.arrived += 1;
        }
    }

    pub fn arrived_packets(&self) -> usize {
        self.arrived
    }

    pub fn queued_packets(&self) -> usize {
        self.arrived - self.started
    }

    /// Moves the head-of-queue packet into service if nothing is in flight.
    /// Returns true when a packet is in flight afterwards.
    pub fn start_next(&mut self, t: Slot, packet_bits: u64) -> bool {
        if self.in_flight.is_none() && self.queued_packets() > 0 {
            self.in_flight = Some(InFlight {
                arrival: self.arrivals[self.started],
                service_start: t,
                remaining_bits: packet_bits,
            });
            self.started += 1;
        }
        self.flags.fdt = self.in_flight.is_some();
        self.flags.fdt
    }

    /// Sends one slot worth of bits. Returns the finished packet, if any.
    pub fn deliver(&mut self, t: Slot, bits: u64) -> Option<PacketRecord> {
        let pkt = self.in_flight.as_mut().expect("deliver without a packet");
        let sent = bits.min(pkt.remaining_bits);
        pkt.remaining_bits -= sent;
        self.delivered_bits += sent;
        if pkt.remaining_bits > 0 {
            return None;
        }
        let rec = PacketRecord {
            arrival: pkt.arrival,
            service_start: pkt.service_start,
            completion: t,
        };
        self.in_flight = None;
        self.flags.fdt = false;
        self.completed.push(rec);
        Some(rec)
    }

    pub fn in_flight_remaining(&self) -> u64 {
        self.in_flight.map_or(0, |p| p.remaining_bits)
    }
}

//! Per-run counters and the two headline metrics: average throughput per pair
//! and average service time per packet.

use crate::model::SimConfig;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PairMetrics {
    pub delivered_bits: u64,
    pub completed_packets: u64,
    /// Service time of each delivered packet, in slots.
    pub service_slots: Vec<u64>,
    /// Bits of the unfinished packet already delivered at the horizon.
    pub in_flight_delivered_bits: u64,
    pub pu_collision_slots: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunMetrics {
    pub config: SimConfig,
    pub pairs: Vec<PairMetrics>,
    pub pu_su_collision_slots: u64,
    pub su_su_collision_slots: u64,
    pub handoffs: u64,
    pub horizon: u64,
    pub arrived_bits: u64,
    /// Slots at which arrived bits did not equal delivered + queued + in-flight bits.
    pub conservation_violations: u64,
}

impl RunMetrics {
    pub fn total_delivered_bits(&self) -> u64 {
        self.pairs.iter().map(|p| p.delivered_bits).sum()
    }

    pub fn completed_packets(&self) -> u64 {
        self.pairs.iter().map(|p| p.completed_packets).sum()
    }
}

/// Average SU throughput per pair in bits per second.
pub fn throughput(m: &RunMetrics, cfg: &SimConfig) -> f64 {
    let seconds = m.horizon as f64 * cfg.slot_duration;
    m.total_delivered_bits() as f64 / seconds / cfg.num_pairs as f64
}

/// Mean service time over delivered packets in seconds, `None` with no deliveries.
pub fn avg_service_time(m: &RunMetrics, cfg: &SimConfig) -> Option<f64> {
    let (sum, n) = m
        .pairs
        .iter()
        .flat_map(|p| p.service_slots.iter())
        .fold((0u64, 0u64), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum as f64 / n as f64 * cfg.slot_duration)
}

//! Comparison protocols: random channel selection and selection by observed
//! idle probability.
//!
//! Neither protocol looks ahead into the PU schedule. They share the frame
//! structure, PRS claiming and mini-slot discipline with GCS-SRV; only the
//! ranking of candidate channels differs. A PU appearing under a transmitting
//! baseline pair costs that slot as a collision before the pair backs off.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::mac::pair::SuPairState;
use crate::model::{Channel, Slot, Stream};

/// Uniform over all channels except `current`.
pub fn random_select(
    num_channels: usize,
    current: Option<Channel>,
    stream: &mut Stream,
) -> Channel {
    let candidates: Vec<Channel> = Channel::all(num_channels)
        .filter(|c| Some(*c) != current)
        .collect();
    match candidates.len() {
        0 => current.expect("at least one channel"),
        n => candidates[stream.random_range(0..n)],
    }
}

/// Random preference list: a uniform shuffle of every channel except `current`.
/// Its head is distributed exactly like [`random_select`].
pub fn random_ranking(
    num_channels: usize,
    current: Option<Channel>,
    stream: &mut Stream,
) -> Vec<Channel> {
    let mut v: Vec<Channel> = Channel::all(num_channels)
        .filter(|c| Some(*c) != current)
        .collect();
    v.shuffle(stream);
    v
}

/// Sliding window of past idle/busy observations per channel.
#[derive(Debug, Clone)]
pub struct IdleHistory {
    window: usize,
    obs: Vec<VecDeque<bool>>,
    idle: Vec<usize>,
    /// Latest slot observed, if any.
    last_observed: Option<Slot>,
}

impl IdleHistory {
    pub fn new(num_channels: usize, window: usize) -> Self {
        IdleHistory {
            window: window.max(1),
            obs: vec![VecDeque::with_capacity(window.max(1)); num_channels],
            idle: vec![0; num_channels],
            last_observed: None,
        }
    }

    pub fn num_channels(&self) -> usize {
        self.obs.len()
    }

    pub fn last_observed(&self) -> Option<Slot> {
        self.last_observed
    }

    /// Records whether `ch` was idle during slot `slot`.
    pub fn observe(&mut self, ch: Channel, slot: Slot, idle: bool) {
        let i = ch.index();
        let buf = &mut self.obs[i];
        if buf.len() == self.window && buf.pop_front() == Some(true) {
            self.idle[i] -= 1;
        }
        buf.push_back(idle);
        if idle {
            self.idle[i] += 1;
        }
        self.last_observed = Some(self.last_observed.map_or(slot, |s| s.max(slot)));
    }

    pub fn observations(&self, ch: Channel) -> usize {
        self.obs[ch.index()].len()
    }
}

/// Fraction of observed slots the channel was idle; 0.5 before any observation.
pub fn idle_probability(hist: &IdleHistory, ch: Channel) -> f64 {
    let n = hist.observations(ch);
    if n == 0 {
        0.5
    } else {
        hist.idle[ch.index()] as f64 / n as f64
    }
}

/// Channels other than `current` by descending idle probability; equal
/// probabilities are ordered uniformly at random.
pub fn prob_ranking(
    hist: &IdleHistory,
    current: Option<Channel>,
    stream: &mut Stream,
) -> Vec<Channel> {
    let mut v: Vec<(Channel, f64)> = Channel::all(hist.num_channels())
        .filter(|c| Some(*c) != current)
        .map(|c| (c, idle_probability(hist, c)))
        .collect();
    v.shuffle(stream);
    v.sort_by(|a, b| b.1.total_cmp(&a.1));
    v.into_iter().map(|(c, _)| c).collect()
}

/// The most likely idle channel other than `current`.
pub fn prob_select(hist: &IdleHistory, current: Option<Channel>, stream: &mut Stream) -> Channel {
    prob_ranking(hist, current, stream)
        .first()
        .copied()
        .or(current)
        .expect("at least one channel")
}

/// A PU showed up under a transmitting baseline pair at slot `t`.
///
/// The slot is lost (the pair's remaining bits are untouched), the pair stops
/// for the rest of the data phase and asks for a new channel at the next
/// control phase.
pub fn handle_pu_collision(pair: &mut SuPairState, _t: Slot) {
    pair.collision_slots += 1;
    pair.halted = true;
    pair.flags.fcs = true;
}

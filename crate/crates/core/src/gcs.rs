//! Greedy channel selection.
//!
//! Two criteria decide a handoff. A pair about to lose its channel `k` to the
//! PU compares the staying time `S_k` against each candidate's changing time
//! plus the retuning delay, and stays unless switching is strictly faster.
//! Among candidates that are idle right now (zero changing time) it prefers
//! the one that stays vacant longest. Vacancy ties go to the lower channel
//! number so every node derives the same list.

use crate::model::Channel;
use crate::traffic::Prediction;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Stay,
    Switch,
}

/// Per-pair protocol flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SuFlags {
    /// Data transmission: an unfinished packet is pending.
    pub fdt: bool,
    /// Channel switching: the pair asks for a handoff in the next control phase.
    pub fcs: bool,
    /// Data sending: the pair holds an assignment for the current data phase.
    pub fds: bool,
}

/// Ranked handoff targets for one pair (or for the rendezvous choice when no
/// current channel is given).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelRanking {
    /// Candidates in preference order.
    pub lsc: Vec<Channel>,
    /// Negotiation channels: every non-current channel with zero changing time.
    pub lnc: Vec<Channel>,
    /// `(channel, ST value, action)` from the stay/switch comparison, only
    /// filled when the pair has a current channel.
    pub stay_switch: Vec<(Channel, u64, Action)>,
}

impl ChannelRanking {
    pub fn best(&self) -> Option<Channel> {
        self.lsc.first().copied()
    }
}

/// Staying wins ties: `S_k = C_j + t_h` keeps the pair where it is.
pub fn stay_or_switch(stay: u64, change: u64, handoff_delay: u64) -> (u64, Action) {
    if stay <= change + handoff_delay {
        (stay, Action::Stay)
    } else {
        (change, Action::Switch)
    }
}

/// Channels by descending vacant time, ties by ascending channel number.
pub fn rank_vacant(vacant: &[(Channel, u64)]) -> Vec<Channel> {
    let mut v = vacant.to_vec();
    v.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    v.into_iter().map(|(c, _)| c).collect()
}

pub fn build_ranking(pred: &Prediction, handoff_delay: u64) -> ChannelRanking {
    let lnc: Vec<Channel> = pred
        .changing
        .iter()
        .filter(|(c, la)| la.slots == 0 && Some(*c) != pred.current)
        .map(|(c, _)| *c)
        .collect();
    let vacant: Vec<(Channel, u64)> = pred
        .vacant
        .iter()
        .filter(|(c, _)| lnc.contains(c))
        .map(|(c, la)| (*c, la.slots))
        .collect();
    let stay_switch = match pred.stay {
        Some(s) => pred
            .changing
            .iter()
            .map(|(c, la)| {
                let (st, action) = stay_or_switch(s.slots, la.slots, handoff_delay);
                (*c, st, action)
            })
            .collect(),
        None => Vec::new(),
    };
    ChannelRanking {
        lsc: rank_vacant(&vacant),
        lnc,
        stay_switch,
    }
}

/// Channel-switching flag for a pair on `current` facing a PU arrival.
///
/// Only zero-changing-time channels are targets, so the comparison is against
/// the best of them with `C = 0`.
pub fn decide_handoff(
    current: Channel,
    stay: u64,
    ranking: &ChannelRanking,
    handoff_delay: u64,
) -> bool {
    if stay == 0 {
        return false;
    }
    match ranking.best() {
        None => false,
        Some(best) if best == current => false,
        Some(_) => stay_or_switch(stay, 0, handoff_delay).1 == Action::Switch,
    }
}

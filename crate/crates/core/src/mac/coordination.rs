//! Distributed channel claiming inside one control phase.
//!
//! Every pair derives the same pseudo-random selecting sequence (PRS) from the
//! shared seed and frame number, then claims channels in that order: the first
//! pair takes its best channel, and every later pair skips whatever has already
//! been taken. No two pairs can end up on the same channel.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;

use crate::model::{derive_stream, Channel, PairId};

/// Claim order for control phase `frame`, identical at every node.
pub fn generate_prs(seed: u64, frame: u64, num_pairs: usize) -> Vec<PairId> {
    let mut order: Vec<PairId> = (0..num_pairs).map(PairId::from_index).collect();
    order.shuffle(&mut derive_stream(seed, "prs", frame));
    order
}

/// Best-ranked channel not already held by a pair still transmitting from the
/// previous data phase. `None` means nobody can coordinate this frame.
pub fn rendezvous_channel(ranking: &[Channel], su_occupied: &BTreeSet<Channel>) -> Option<Channel> {
    ranking.iter().find(|c| !su_occupied.contains(c)).copied()
}

/// Walks `prs`, letting each eligible pair take the first unclaimed channel on
/// its own list. Claimed channels are added to `claimed`. Returns assignments
/// in claim order; pairs whose list is exhausted are left out and wait for the
/// next control phase.
pub fn claim_channels(
    prs: &[PairId],
    eligible: &BTreeSet<PairId>,
    rankings: &BTreeMap<PairId, Vec<Channel>>,
    claimed: &mut BTreeSet<Channel>,
) -> Vec<(PairId, Channel)> {
    let mut out = Vec::new();
    for pair in prs.iter().filter(|p| eligible.contains(p)) {
        let Some(list) = rankings.get(pair) else {
            continue;
        };
        if let Some(ch) = list.iter().find(|c| !claimed.contains(c)) {
            claimed.insert(*ch);
            out.push((*pair, *ch));
        }
    }
    out
}

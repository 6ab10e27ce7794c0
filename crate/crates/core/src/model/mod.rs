//! Configuration, frame layout, identifiers and seeded streams.

pub mod config;
pub mod frame;
pub mod stream;

use std::fmt;

pub use config::{ConfigError, Protocol, SimConfig};
pub use frame::{FrameLayout, Phase, SlotPosition};
pub use stream::{derive_stream, Stream};

/// Absolute slot index since the start of the run.
pub type Slot = u64;

/// 1-based channel number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Channel(pub u32);

impl Channel {
    /// Zero-based position for per-channel tables.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        Channel(i as u32 + 1)
    }

    /// Channels `1..=m`.
    pub fn all(m: usize) -> impl Iterator<Item = Channel> + Clone {
        (0..m).map(Channel::from_index)
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// 1-based SU transmitter/receiver pair number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairId(pub u32);

impl PairId {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(i: usize) -> Self {
        PairId(i as u32 + 1)
    }
}

impl fmt::Display for PairId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

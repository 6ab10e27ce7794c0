//! Split-phase frame: one control slot cut into `2K` mini-slots, then `D` data slots.

use super::config::SimConfig;

/// Control phase length in slots.
pub const CONTROL_SLOTS: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Phase {
    Control,
    Data,
}

/// Position of an absolute slot inside the frame structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SlotPosition {
    pub frame: u64,
    pub phase: Phase,
    /// Offset within the phase (0 for the control slot, 0..D for data slots).
    pub offset: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub control_slots: u64,
    pub mini_slots: u64,
    pub data_slots: u64,
    pub frame_len: u64,
}

impl FrameLayout {
    pub fn new(num_pairs: usize, data_slots: u64) -> Self {
        FrameLayout {
            control_slots: CONTROL_SLOTS,
            mini_slots: 2 * num_pairs as u64,
            data_slots,
            frame_len: CONTROL_SLOTS + data_slots,
        }
    }

    pub fn from_config(cfg: &SimConfig) -> Self {
        Self::new(cfg.num_pairs, cfg.data_phase_slots)
    }

    pub fn position(&self, slot: u64) -> SlotPosition {
        let frame = slot / self.frame_len;
        let within = slot % self.frame_len;
        if within < self.control_slots {
            SlotPosition {
                frame,
                phase: Phase::Control,
                offset: within,
            }
        } else {
            SlotPosition {
                frame,
                phase: Phase::Data,
                offset: within - self.control_slots,
            }
        }
    }

    /// Inverse of [`FrameLayout::position`].
    pub fn slot_of(&self, pos: SlotPosition) -> u64 {
        let base = pos.frame * self.frame_len;
        match pos.phase {
            Phase::Control => base + pos.offset,
            Phase::Data => base + self.control_slots + pos.offset,
        }
    }

    pub fn control_slot(&self, frame: u64) -> u64 {
        frame * self.frame_len
    }

    /// Absolute data slots of `frame`, clipped to `horizon`.
    pub fn data_span(&self, frame: u64, horizon: u64) -> std::ops::Range<u64> {
        let start = self.control_slot(frame) + self.control_slots;
        start.min(horizon)..(start + self.data_slots).min(horizon)
    }

    /// Mini-slots (RTS, CTS) of the pair at 1-based PRS position `rank`.
    pub fn mini_slots_for(&self, rank: usize) -> (u64, u64) {
        let r = rank as u64;
        (2 * r - 1, 2 * r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn layout_for_ten_pairs() {
        let f = FrameLayout::new(10, 10);
        assert_eq!(f.mini_slots, 20);
        assert_eq!(f.frame_len, 11);
    }

    #[test]
    fn slot_positions() {
        let f = FrameLayout::new(10, 10);
        assert_eq!(
            f.position(0),
            SlotPosition {
                frame: 0,
                phase: Phase::Control,
                offset: 0
            }
        );
        assert_eq!(f.position(11).frame, 1);
        assert_eq!(f.position(11).phase, Phase::Control);
        assert_eq!(f.position(10).phase, Phase::Data);
        assert_eq!(f.position(10).offset, 9);
        assert_eq!(f.data_span(1, 1_000), 12..22);
        assert_eq!(f.data_span(1, 15), 12..15);
    }

    #[test]
    fn mini_slot_pairs() {
        let f = FrameLayout::new(3, 10);
        assert_eq!(f.mini_slots_for(1), (1, 2));
        assert_eq!(f.mini_slots_for(3), (5, 6));
    }

    proptest! {
        #[test]
        fn position_is_a_bijection(d in 1u64..40, k in 1usize..20, slot in 0u64..100_000) {
            let f = FrameLayout::new(k, d);
            let pos = f.position(slot);
            prop_assert_eq!(f.slot_of(pos), slot);
            match pos.phase {
                Phase::Control => prop_assert!(pos.offset < f.control_slots),
                Phase::Data => prop_assert!(pos.offset < f.data_slots),
            }
        }
    }
}

//! Primary-user ON-OFF schedules, secondary-user arrivals, and the lookahead
//! queries (staying, changing and vacant time) answered from them.
//!
//! Each channel carries one PU modelled as an M/D/1 FIFO queue: Poisson
//! arrivals, fixed-length packets. Its service periods, merged whenever one
//! packet follows another without a gap, are the ON intervals. The schedule is
//! generated up front for the whole horizon, so any slot can be queried ahead
//! of time.

use rand_distr::{Distribution, Exp};
use thiserror::Error;

use crate::model::{derive_stream, Channel, SimConfig, Slot, Stream};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TrafficError {
    #[error("slot {slot} is outside the horizon of {horizon} slots")]
    OutOfHorizon { slot: Slot, horizon: Slot },
    #[error("channel {0} does not exist")]
    UnknownChannel(Channel),
    #[error("channel {channel} is busy at slot {slot}; vacant time needs an idle channel")]
    ChannelBusy { channel: Channel, slot: Slot },
    #[error("schedule csv line {line}: {message}")]
    Csv { line: u64, message: String },
}

/// Inclusive range of PU-busy slots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BusyInterval {
    pub start: Slot,
    pub end: Slot,
}

impl BusyInterval {
    pub fn slots(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn contains(&self, t: Slot) -> bool {
        self.start <= t && t <= self.end
    }
}

/// A lookahead length in slots; `censored` when the true value runs past the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Lookahead {
    pub slots: u64,
    pub censored: bool,
}

impl Lookahead {
    pub fn exact(slots: u64) -> Self {
        Lookahead {
            slots,
            censored: false,
        }
    }
}

/// Busy intervals of one channel, sorted and pairwise separated by idle slots.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ChannelSchedule {
    intervals: Vec<BusyInterval>,
    horizon: Slot,
}

impl ChannelSchedule {
    /// Builds a schedule, merging touching intervals. Intervals must be sorted
    /// and disjoint.
    pub fn from_intervals(
        intervals: impl IntoIterator<Item = BusyInterval>,
        horizon: Slot,
    ) -> Result<Self, String> {
        let mut out: Vec<BusyInterval> = Vec::new();
        for iv in intervals {
            if iv.end < iv.start {
                return Err(format!("interval [{}, {}] is reversed", iv.start, iv.end));
            }
            if iv.start >= horizon {
                return Err(format!(
                    "interval [{}, {}] starts at or after the horizon {horizon}",
                    iv.start, iv.end
                ));
            }
            match out.last_mut() {
                Some(last) if iv.start <= last.end => {
                    return Err(format!(
                        "interval [{}, {}] overlaps or precedes [{}, {}]",
                        iv.start, iv.end, last.start, last.end
                    ))
                }
                Some(last) if iv.start == last.end + 1 => last.end = iv.end,
                _ => out.push(iv),
            }
        }
        Ok(ChannelSchedule {
            intervals: out,
            horizon,
        })
    }

    pub fn idle(horizon: Slot) -> Self {
        ChannelSchedule {
            intervals: Vec::new(),
            horizon,
        }
    }

    pub fn intervals(&self) -> &[BusyInterval] {
        &self.intervals
    }

    pub fn horizon(&self) -> Slot {
        self.horizon
    }

    /// Index of the first interval whose end is at or after `t`.
    fn first_ending_at_or_after(&self, t: Slot) -> usize {
        self.intervals.partition_point(|iv| iv.end < t)
    }

    /// Interval covering `t`, if any. `t` is not range-checked.
    pub fn interval_at(&self, t: Slot) -> Option<BusyInterval> {
        self.intervals
            .get(self.first_ending_at_or_after(t))
            .filter(|iv| iv.start <= t)
            .copied()
    }

    pub fn busy_at(&self, t: Slot) -> bool {
        self.interval_at(t).is_some()
    }

    /// First busy slot in `[from, to)`, if any.
    pub fn first_busy_in(&self, from: Slot, to: Slot) -> Option<Slot> {
        let iv = self.intervals.get(self.first_ending_at_or_after(from))?;
        let s = iv.start.max(from);
        (s < to).then_some(s)
    }

    /// Slots until the channel is next idle, 0 when idle at `t`.
    pub fn time_to_idle_unchecked(&self, t: Slot) -> Lookahead {
        match self.interval_at(t) {
            None => Lookahead::exact(0),
            Some(iv) if iv.end >= self.horizon => Lookahead {
                slots: self.horizon - t,
                censored: true,
            },
            Some(iv) => Lookahead::exact(iv.end - t + 1),
        }
    }

    /// Idle slots from `t` before the next busy interval, or `None` if busy at `t`.
    pub fn vacant_time_unchecked(&self, t: Slot) -> Option<Lookahead> {
        match self.intervals.get(self.first_ending_at_or_after(t)) {
            Some(iv) if iv.start <= t => None,
            Some(iv) => Some(Lookahead::exact(iv.start - t)),
            None => Some(Lookahead {
                slots: self.horizon - t,
                censored: true,
            }),
        }
    }

    /// Number of busy slots inside `[0, horizon)`.
    pub fn busy_slots(&self) -> u64 {
        self.intervals
            .iter()
            .map(|iv| iv.end.min(self.horizon - 1) - iv.start + 1)
            .sum()
    }
}

/// Ground-truth PU activity for every channel over the run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PuSchedule {
    channels: Vec<ChannelSchedule>,
    horizon: Slot,
}

impl PuSchedule {
    pub fn new(channels: Vec<ChannelSchedule>, horizon: Slot) -> Self {
        debug_assert!(channels.iter().all(|c| c.horizon == horizon));
        PuSchedule { channels, horizon }
    }

    /// One independent M/D/1 process per channel, stream `(seed, "pu", channel)`.
    pub fn generate(cfg: &SimConfig) -> Self {
        let channels = Channel::all(cfg.num_channels)
            .map(|ch| {
                let mut stream = derive_stream(cfg.seed, "pu", ch.0 as u64);
                generate_pu_schedule(cfg, &mut stream)
            })
            .collect();
        PuSchedule::new(channels, cfg.horizon)
    }

    pub fn horizon(&self) -> Slot {
        self.horizon
    }

    pub fn num_channels(&self) -> usize {
        self.channels.len()
    }

    pub fn channel(&self, ch: Channel) -> Result<&ChannelSchedule, TrafficError> {
        if ch.0 == 0 {
            return Err(TrafficError::UnknownChannel(ch));
        }
        self.channels
            .get(ch.index())
            .ok_or(TrafficError::UnknownChannel(ch))
    }

    pub(crate) fn get(&self, ch: Channel) -> &ChannelSchedule {
        &self.channels[ch.index()]
    }

    fn check(&self, ch: Channel, t: Slot) -> Result<&ChannelSchedule, TrafficError> {
        let sched = self.channel(ch)?;
        if t >= self.horizon {
            return Err(TrafficError::OutOfHorizon {
                slot: t,
                horizon: self.horizon,
            });
        }
        Ok(sched)
    }

    pub fn is_pu_busy(&self, ch: Channel, t: Slot) -> Result<bool, TrafficError> {
        Ok(self.check(ch, t)?.busy_at(t))
    }

    /// Staying time when applied to the current channel, changing time for any
    /// other channel.
    pub fn time_to_idle(&self, ch: Channel, t: Slot) -> Result<Lookahead, TrafficError> {
        Ok(self.check(ch, t)?.time_to_idle_unchecked(t))
    }

    pub fn vacant_time(&self, ch: Channel, t: Slot) -> Result<Lookahead, TrafficError> {
        self.check(ch, t)?
            .vacant_time_unchecked(t)
            .ok_or(TrafficError::ChannelBusy {
                channel: ch,
                slot: t,
            })
    }

    /// Every lookahead quantity a pair on `current` (or on no channel) needs at `t`.
    pub fn predict(&self, current: Option<Channel>, t: Slot) -> Result<Prediction, TrafficError> {
        if t >= self.horizon {
            return Err(TrafficError::OutOfHorizon {
                slot: t,
                horizon: self.horizon,
            });
        }
        let stay = current.map(|k| self.time_to_idle(k, t)).transpose()?;
        let mut changing = Vec::with_capacity(self.channels.len());
        let mut vacant = Vec::new();
        for ch in Channel::all(self.channels.len()).filter(|c| Some(*c) != current) {
            let sched = self.get(ch);
            let c = sched.time_to_idle_unchecked(t);
            changing.push((ch, c));
            if c.slots == 0 {
                vacant.push((ch, sched.vacant_time_unchecked(t).expect("idle channel")));
            }
        }
        Ok(Prediction {
            slot: t,
            current,
            stay,
            changing,
            vacant,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("channel,start_slot,end_slot\n");
        for ch in Channel::all(self.channels.len()) {
            for iv in self.get(ch).intervals() {
                out.push_str(&format!("{},{},{}\n", ch, iv.start, iv.end));
            }
        }
        out
    }

    /// Parses `channel,start_slot,end_slot` rows. Rows must be sorted by channel
    /// then start; touching intervals are merged.
    pub fn from_csv(text: &str, num_channels: usize, horizon: Slot) -> Result<Self, TrafficError> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let headers = reader.headers().map_err(|e| TrafficError::Csv {
            line: 1,
            message: e.to_string(),
        })?;
        let expected = ["channel", "start_slot", "end_slot"];
        if headers.iter().collect::<Vec<_>>() != expected {
            return Err(TrafficError::Csv {
                line: 1,
                message: format!("header must be `{}`", expected.join(",")),
            });
        }
        let mut per_channel: Vec<Vec<BusyInterval>> = vec![Vec::new(); num_channels];
        let mut last_channel = 0u32;
        for rec in reader.records() {
            let rec = rec.map_err(|e| TrafficError::Csv {
                line: e.position().map_or(0, |p| p.line()),
                message: e.to_string(),
            })?;
            let line = rec.position().map_or(0, |p| p.line());
            let err = |message: String| TrafficError::Csv { line, message };
            let field = |i: usize| -> Result<u64, TrafficError> {
                rec.get(i)
                    .unwrap_or("")
                    .parse::<u64>()
                    .map_err(|e| err(format!("{}: {e}", expected[i])))
            };
            let ch = field(0)? as u32;
            if ch == 0 || ch as usize > num_channels {
                return Err(err(format!("channel {ch} outside 1..={num_channels}")));
            }
            if ch < last_channel {
                return Err(err("rows must be sorted by channel".into()));
            }
            last_channel = ch;
            per_channel[ch as usize - 1].push(BusyInterval {
                start: field(1)?,
                end: field(2)?,
            });
        }
        let channels = per_channel
            .into_iter()
            .enumerate()
            .map(|(i, ivs)| {
                ChannelSchedule::from_intervals(ivs, horizon).map_err(|m| TrafficError::Csv {
                    line: 0,
                    message: format!("channel {}: {m}", i + 1),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PuSchedule::new(channels, horizon))
    }
}

/// Lookahead snapshot at one slot for one deciding pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediction {
    pub slot: Slot,
    pub current: Option<Channel>,
    /// Staying time on the current channel.
    pub stay: Option<Lookahead>,
    /// Changing time of every channel other than the current one.
    pub changing: Vec<(Channel, Lookahead)>,
    /// Vacant time of every non-current channel with zero changing time.
    pub vacant: Vec<(Channel, Lookahead)>,
}

/// Poisson arrival slots at `rate_per_sec` over `[0, horizon)`.
pub fn poisson_arrival_slots(
    rate_per_sec: f64,
    slot_duration: f64,
    horizon: Slot,
    stream: &mut Stream,
) -> Vec<Slot> {
    let per_slot = rate_per_sec * slot_duration;
    if per_slot <= 0.0 {
        return Vec::new();
    }
    let gap = Exp::new(per_slot).expect("positive rate");
    let mut out = Vec::with_capacity((per_slot * horizon as f64 * 1.05) as usize + 16);
    let mut t = 0.0f64;
    loop {
        t += gap.sample(stream);
        let slot = t.floor();
        if slot >= horizon as f64 {
            break;
        }
        out.push(slot as Slot);
    }
    out
}

/// PU packet arrival slots of one channel.
pub fn pu_arrival_slots(cfg: &SimConfig, stream: &mut Stream) -> Vec<Slot> {
    poisson_arrival_slots(cfg.lambda_p, cfg.slot_duration, cfg.horizon, stream)
}

/// FIFO service of fixed-length packets, merged into busy periods.
pub fn busy_periods(arrivals: &[Slot], service_slots: u64, horizon: Slot) -> ChannelSchedule {
    let mut intervals: Vec<BusyInterval> = Vec::new();
    let mut free_at = 0;
    for &a in arrivals {
        let start = a.max(free_at);
        if start >= horizon {
            break;
        }
        let end = start + service_slots - 1;
        free_at = end + 1;
        match intervals.last_mut() {
            Some(last) if last.end + 1 == start => last.end = end,
            _ => intervals.push(BusyInterval { start, end }),
        }
    }
    ChannelSchedule { intervals, horizon }
}

/// ON-OFF schedule of one channel drawn from `stream`.
pub fn generate_pu_schedule(cfg: &SimConfig, stream: &mut Stream) -> ChannelSchedule {
    let arrivals = pu_arrival_slots(cfg, stream);
    busy_periods(&arrivals, cfg.pu_packet_slots(), cfg.horizon)
}

/// Packet arrival slots of one SU pair.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct SuArrivals {
    pub slots: Vec<Slot>,
}

impl SuArrivals {
    /// Arrivals for every pair, stream `(seed, "su", pair)`.
    pub fn generate_all(cfg: &SimConfig) -> Vec<SuArrivals> {
        (1..=cfg.num_pairs as u64)
            .map(|p| generate_su_arrivals(cfg, &mut derive_stream(cfg.seed, "su", p)))
            .collect()
    }
}

pub fn generate_su_arrivals(cfg: &SimConfig, stream: &mut Stream) -> SuArrivals {
    SuArrivals {
        slots: poisson_arrival_slots(cfg.lambda_s, cfg.slot_duration, cfg.horizon, stream),
    }
}

//! Slot-by-slot run of the split-phase protocol.
//!
//! Each frame opens with one control slot. Pairs that must leave their channel
//! claim first, pairs starting a new transmission claim second, both walking
//! the same PRS. The data slots follow, where assigned pairs send one slot of
//! bits at a time. Under GCS-SRV a pair reads the PU schedule ahead and goes
//! silent before the PU starts; the baselines find out by colliding.

use std::collections::{BTreeMap, BTreeSet};

use crate::baselines::{self, IdleHistory};
use crate::gcs::{self, ChannelRanking};
use crate::mac::coordination::{claim_channels, generate_prs, rendezvous_channel};
use crate::mac::pair::SuPairState;
use crate::mac::trace::{Event, EventTrace};
use crate::metrics::{PairMetrics, RunMetrics};
use crate::model::{
    derive_stream, Channel, ConfigError, FrameLayout, PairId, Protocol, SimConfig, Slot, Stream,
};
use crate::traffic::{PuSchedule, SuArrivals};

/// Everything random about a run, fixed before the first slot.
#[derive(Debug, Clone)]
pub struct SimInputs {
    pub schedule: PuSchedule,
    pub arrivals: Vec<SuArrivals>,
}

impl SimInputs {
    pub fn generate(cfg: &SimConfig) -> Self {
        SimInputs {
            schedule: PuSchedule::generate(cfg),
            arrivals: SuArrivals::generate_all(cfg),
        }
    }
}

/// Validates `cfg`, generates its traffic and runs to the horizon with tracing on.
pub fn run_simulation(cfg: &SimConfig) -> Result<(RunMetrics, EventTrace), ConfigError> {
    let cfg = cfg.clone().validate()?;
    let inputs = SimInputs::generate(&cfg);
    Ok(Simulator::new(&cfg, inputs, true).run())
}

/// Same as [`run_simulation`] without recording the trace.
pub fn run_metrics(cfg: &SimConfig) -> Result<RunMetrics, ConfigError> {
    let cfg = cfg.clone().validate()?;
    let inputs = SimInputs::generate(&cfg);
    Ok(Simulator::new(&cfg, inputs, false).run().0)
}

/// Outcome of one control phase.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ControlOutcome {
    pub rendezvous: Option<Channel>,
    /// Handoff assignments in claim order.
    pub handoffs: Vec<(PairId, Channel)>,
    /// New-transmission assignments in claim order.
    pub new_transmissions: Vec<(PairId, Channel)>,
    /// Pairs that contended without getting a channel.
    pub waiting: Vec<PairId>,
}

pub struct Simulator {
    cfg: SimConfig,
    layout: FrameLayout,
    bits_per_slot: u64,
    schedule: PuSchedule,
    pairs: Vec<SuPairState>,
    trace: EventTrace,
    history: Option<IdleHistory>,
    select_streams: Vec<Stream>,
    rendezvous_stream: Stream,
    pu_cursor: Vec<(usize, Option<Slot>)>,
    channel_load: Vec<Vec<PairId>>,
    /// Oracle pairs currently sitting out a PU busy stretch.
    paused: Vec<bool>,
    pu_su_collisions: u64,
    su_su_collisions: u64,
    handoffs: u64,
    conservation_violations: u64,
}

impl Simulator {
    /// `cfg` must already be validated; `inputs` must match its channel and
    /// pair counts.
    pub fn new(cfg: &SimConfig, inputs: SimInputs, record_trace: bool) -> Self {
        assert_eq!(inputs.schedule.num_channels(), cfg.num_channels);
        assert_eq!(inputs.arrivals.len(), cfg.num_pairs);
        let pairs = inputs
            .arrivals
            .into_iter()
            .enumerate()
            .map(|(i, a)| SuPairState::new(PairId::from_index(i), a.slots))
            .collect();
        let history = (cfg.protocol == Protocol::Probability)
            .then(|| IdleHistory::new(cfg.num_channels, cfg.prob_window));
        Simulator {
            layout: FrameLayout::from_config(cfg),
            bits_per_slot: cfg.bits_per_slot(),
            schedule: inputs.schedule,
            pairs,
            trace: EventTrace::new(record_trace),
            history,
            select_streams: (1..=cfg.num_pairs as u64)
                .map(|p| derive_stream(cfg.seed, "select", p))
                .collect(),
            rendezvous_stream: derive_stream(cfg.seed, "rendezvous", 0),
            pu_cursor: vec![(0, None); cfg.num_channels],
            channel_load: vec![Vec::new(); cfg.num_channels],
            paused: vec![false; cfg.num_pairs],
            pu_su_collisions: 0,
            su_su_collisions: 0,
            handoffs: 0,
            conservation_violations: 0,
            cfg: cfg.clone(),
        }
    }

    pub fn pairs(&self) -> &[SuPairState] {
        &self.pairs
    }

    pub fn pairs_mut(&mut self) -> &mut [SuPairState] {
        &mut self.pairs
    }

    pub fn layout(&self) -> FrameLayout {
        self.layout
    }

    pub fn trace(&self) -> &EventTrace {
        &self.trace
    }

    /// Runs every remaining frame and returns the metrics and trace.
    pub fn run(mut self) -> (RunMetrics, EventTrace) {
        let frames = self.cfg.horizon.div_ceil(self.layout.frame_len);
        for frame in 0..frames {
            self.run_control_phase(frame);
            self.run_data_phase(frame);
        }
        self.finish()
    }

    fn begin_slot(&mut self, t: Slot) {
        for p in &mut self.pairs {
            p.admit_arrivals(t);
        }
        if let (Some(h), Some(prev)) = (self.history.as_mut(), t.checked_sub(1)) {
            for ch in Channel::all(self.cfg.num_channels) {
                h.observe(ch, prev, !self.schedule.get(ch).busy_at(prev));
            }
        }
        if self.trace.enabled() {
            self.emit_pu_events(t);
        }
    }

    fn emit_pu_events(&mut self, t: Slot) {
        for ch in Channel::all(self.cfg.num_channels) {
            let (next, stop) = &mut self.pu_cursor[ch.index()];
            if *stop == Some(t) {
                *stop = None;
                self.trace.push(t, Event::PuStop { channel: ch });
            }
            let ivs = self.schedule.get(ch).intervals();
            if let Some(iv) = ivs.get(*next).filter(|iv| iv.start == t) {
                *next += 1;
                *stop = (iv.end + 1 < self.cfg.horizon).then_some(iv.end + 1);
                self.trace.push(t, Event::PuStart { channel: ch });
            }
        }
    }

    fn end_slot(&mut self) {
        let packet = self.cfg.su_packet_bits;
        let ok = self.pairs.iter().all(|p| {
            p.arrived_packets() as u64 * packet
                == p.delivered_bits + p.queued_packets() as u64 * packet + p.in_flight_remaining()
        });
        if !ok {
            self.conservation_violations += 1;
        }
    }

    fn ranking_for(
        &mut self,
        pair: Option<PairId>,
        current: Option<Channel>,
        at: Slot,
    ) -> ChannelRanking {
        let m = self.cfg.num_channels;
        let stream = match pair {
            Some(p) => &mut self.select_streams[p.index()],
            None => &mut self.rendezvous_stream,
        };
        let lsc = match self.cfg.protocol {
            Protocol::GcsSrv => {
                let pred = self
                    .schedule
                    .predict(current, at)
                    .expect("ranking inside the horizon");
                return gcs::build_ranking(&pred, self.cfg.handoff_delay);
            }
            Protocol::Random => baselines::random_ranking(m, current, stream),
            Protocol::Probability => baselines::prob_ranking(
                self.history.as_ref().expect("probability history"),
                current,
                stream,
            ),
        };
        ChannelRanking {
            lnc: lsc.clone(),
            lsc,
            stay_switch: Vec::new(),
        }
    }

    /// Negotiates channel use for the data phase of `frame`.
    pub fn run_control_phase(&mut self, frame: u64) -> ControlOutcome {
        let c = self.layout.control_slot(frame);
        let horizon = self.cfg.horizon;
        if c >= horizon {
            return ControlOutcome::default();
        }
        self.begin_slot(c);
        self.trace.push(c, Event::Frame { frame });
        let span = self.layout.data_span(frame, horizon);
        let packet = self.cfg.su_packet_bits;

        self.paused.fill(false);
        for p in &mut self.pairs {
            p.halted = false;
            p.retune_left = 0;
            p.flags.fds = false;
            p.start_next(c, packet);
            if !p.flags.fdt {
                p.flags.fcs = false;
                if let Some(ch) = p.channel.take() {
                    self.trace.push(
                        c,
                        Event::Release {
                            pair: p.id,
                            channel: ch,
                        },
                    );
                }
            }
        }
        if span.is_empty() {
            self.end_slot();
            return ControlOutcome::default();
        }
        let first = span.start;

        // Part one: pairs that must leave their channel. Part two: pairs with
        // data but no channel.
        let mut rankings: BTreeMap<PairId, Vec<Channel>> = BTreeMap::new();
        let mut part_one: BTreeSet<PairId> = BTreeSet::new();
        let mut part_two: BTreeSet<PairId> = BTreeSet::new();
        let mut pu_at: BTreeMap<PairId, Slot> = BTreeMap::new();
        for i in 0..self.pairs.len() {
            let (id, fdt, channel) = {
                let p = &self.pairs[i];
                (p.id, p.flags.fdt, p.channel)
            };
            if !fdt {
                continue;
            }
            match (channel, self.cfg.protocol) {
                (Some(k), Protocol::GcsSrv) => {
                    let sched = self.schedule.get(k);
                    let fcs = match sched.first_busy_in(span.start, span.end) {
                        None => false,
                        Some(a) => {
                            let staying = sched.time_to_idle_unchecked(a).slots;
                            let arrival = sched.interval_at(a).map_or(a, |iv| iv.start);
                            pu_at.insert(id, arrival);
                            let ranking = self.ranking_for(Some(id), Some(k), first);
                            let fcs =
                                gcs::decide_handoff(k, staying, &ranking, self.cfg.handoff_delay);
                            if fcs {
                                rankings.insert(id, ranking.lsc);
                            } else {
                                self.trace.push(
                                    c,
                                    Event::Stay {
                                        pair: id,
                                        channel: k,
                                        pu_at: arrival,
                                        staying,
                                    },
                                );
                            }
                            fcs
                        }
                    };
                    self.pairs[i].flags.fcs = fcs;
                    self.pairs[i].flags.fds = true;
                    if fcs {
                        part_one.insert(id);
                    }
                }
                (Some(k), _) => {
                    if self.pairs[i].flags.fcs {
                        let ranking = self.ranking_for(Some(id), Some(k), first);
                        rankings.insert(id, ranking.lsc);
                        part_one.insert(id);
                    } else {
                        self.pairs[i].flags.fds = true;
                    }
                }
                (None, _) => {
                    let ranking = self.ranking_for(Some(id), None, first);
                    rankings.insert(id, ranking.lsc);
                    part_two.insert(id);
                }
            }
        }
        for id in &part_one {
            let p = &self.pairs[id.index()];
            self.trace.push(
                c,
                Event::HandoffRequest {
                    pair: *id,
                    channel: p.channel.expect("handoff pair holds a channel"),
                    pu_at: pu_at.get(id).copied(),
                },
            );
        }

        let mut outcome = ControlOutcome::default();
        if part_one.is_empty() && part_two.is_empty() {
            self.end_slot();
            return outcome;
        }

        let su_occupied: BTreeSet<Channel> = self.pairs.iter().filter_map(|p| p.channel).collect();
        let global = self.ranking_for(None, None, first);
        outcome.rendezvous = rendezvous_channel(&global.lsc, &su_occupied);
        let Some(rv) = outcome.rendezvous else {
            self.trace.push(c, Event::NoRendezvous);
            outcome.waiting = part_one.iter().chain(&part_two).copied().collect();
            self.settle_waiting(c, &outcome.waiting);
            self.end_slot();
            return outcome;
        };
        self.trace.push(c, Event::Rendezvous { channel: rv });

        let prs = generate_prs(self.cfg.seed, frame, self.cfg.num_pairs);
        self.trace.push(c, Event::Prs { order: prs.clone() });
        let mut claimed = su_occupied;
        outcome.handoffs = claim_channels(&prs, &part_one, &rankings, &mut claimed);
        outcome.new_transmissions = claim_channels(&prs, &part_two, &rankings, &mut claimed);

        let assigned: BTreeMap<PairId, Channel> = outcome
            .handoffs
            .iter()
            .chain(&outcome.new_transmissions)
            .copied()
            .collect();
        for (rank, id) in prs.iter().enumerate() {
            let Some(&to) = assigned.get(id) else {
                continue;
            };
            let (rts, cts) = self.layout.mini_slots_for(rank + 1);
            if part_one.contains(id) {
                self.trace.push(
                    c,
                    Event::SenseBroadcast {
                        pair: *id,
                        mini_slot: rts,
                    },
                );
            }
            self.trace.push(
                c,
                Event::Rts {
                    pair: *id,
                    channel: to,
                    mini_slot: rts,
                },
            );
            self.trace.push(
                c,
                Event::Cts {
                    pair: *id,
                    channel: to,
                    mini_slot: cts,
                },
            );
            let p = &mut self.pairs[id.index()];
            match p.channel {
                Some(from) if from != to => {
                    p.retune_left = self.cfg.handoff_delay;
                    self.handoffs += 1;
                    self.trace.push(
                        c,
                        Event::Handoff {
                            pair: *id,
                            from,
                            to,
                            pu_at: pu_at.get(id).copied(),
                        },
                    );
                }
                _ => self.trace.push(
                    c,
                    Event::Assign {
                        pair: *id,
                        channel: to,
                    },
                ),
            }
            p.channel = Some(to);
            p.flags.fcs = false;
            p.flags.fds = true;
        }
        outcome.waiting = part_one
            .iter()
            .chain(&part_two)
            .filter(|id| !assigned.contains_key(id))
            .copied()
            .collect();
        self.settle_waiting(c, &outcome.waiting);
        self.end_slot();
        outcome
    }

    /// Pairs left without a new channel. GCS pairs keep their channel and
    /// send on it until the PU arrives. Baseline pairs vacate the channel
    /// they collided on and contend as new transmissions next frame.
    fn settle_waiting(&mut self, c: Slot, waiting: &[PairId]) {
        let oracle = self.cfg.protocol.has_oracle();
        for id in waiting {
            self.trace.push(c, Event::Wait { pair: *id });
            let p = &mut self.pairs[id.index()];
            if oracle {
                p.flags.fds = p.channel.is_some();
            } else {
                p.flags.fds = false;
                p.flags.fcs = false;
                if let Some(ch) = p.channel.take() {
                    self.trace.push(
                        c,
                        Event::Release {
                            pair: p.id,
                            channel: ch,
                        },
                    );
                }
            }
        }
    }

    /// Sends data during the data phase of `frame`.
    pub fn run_data_phase(&mut self, frame: u64) {
        let span = self.layout.data_span(frame, self.cfg.horizon);
        for t in span {
            self.run_data_slot(t);
        }
    }

    fn run_data_slot(&mut self, t: Slot) {
        self.begin_slot(t);
        let packet = self.cfg.su_packet_bits;
        let oracle = self.cfg.protocol.has_oracle();
        for load in &mut self.channel_load {
            load.clear();
        }
        for p in &mut self.pairs {
            if !p.flags.fds || p.halted {
                continue;
            }
            let Some(ch) = p.channel else { continue };
            if p.retune_left > 0 {
                p.retune_left -= 1;
                continue;
            }
            if !p.start_next(t, packet) {
                continue;
            }
            if oracle {
                let sched = self.schedule.get(ch);
                if sched.busy_at(t) {
                    p.flags.fcs = true;
                    if !self.paused[p.id.index()] {
                        self.paused[p.id.index()] = true;
                        self.trace.push(
                            t,
                            Event::Pause {
                                pair: p.id,
                                channel: ch,
                            },
                        );
                    }
                    continue;
                }
                self.paused[p.id.index()] = false;
            }
            self.channel_load[ch.index()].push(p.id);
        }

        for ch in Channel::all(self.cfg.num_channels) {
            let senders = std::mem::take(&mut self.channel_load[ch.index()]);
            if senders.is_empty() {
                continue;
            }
            let pu_busy = self.schedule.get(ch).busy_at(t);
            if pu_busy {
                for id in &senders {
                    self.pu_su_collisions += 1;
                    baselines::handle_pu_collision(&mut self.pairs[id.index()], t);
                    self.trace.push(
                        t,
                        Event::PuCollision {
                            pair: *id,
                            channel: ch,
                        },
                    );
                }
            } else if senders.len() > 1 {
                self.su_su_collisions += senders.len() as u64;
                self.trace.push(
                    t,
                    Event::SuCollision {
                        channel: ch,
                        pairs: senders.clone(),
                    },
                );
            } else {
                let p = &mut self.pairs[senders[0].index()];
                if let Some(rec) = p.deliver(t, self.bits_per_slot) {
                    self.trace.push(
                        t,
                        Event::Complete {
                            pair: p.id,
                            service_slots: rec.service_slots(),
                        },
                    );
                }
            }
            self.channel_load[ch.index()] = senders;
        }
        self.end_slot();
    }

    pub fn finish(self) -> (RunMetrics, EventTrace) {
        let packet = self.cfg.su_packet_bits;
        let pairs = self
            .pairs
            .iter()
            .map(|p| PairMetrics {
                delivered_bits: p.delivered_bits,
                completed_packets: p.completed.len() as u64,
                service_slots: p.completed.iter().map(|r| r.service_slots()).collect(),
                in_flight_delivered_bits: p.in_flight.map_or(0, |f| packet - f.remaining_bits),
                pu_collision_slots: p.collision_slots,
            })
            .collect();
        let arrived_bits = self
            .pairs
            .iter()
            .map(|p| p.arrived_packets() as u64 * packet)
            .sum();
        let metrics = RunMetrics {
            pairs,
            pu_su_collision_slots: self.pu_su_collisions,
            su_su_collision_slots: self.su_su_collisions,
            handoffs: self.handoffs,
            horizon: self.cfg.horizon,
            arrived_bits,
            conservation_violations: self.conservation_violations,
            config: self.cfg,
        };
        (metrics, self.trace)
    }
}

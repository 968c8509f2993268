//! Superframe loop for the concurrent (CTS) and direct (DTS) schemes.
//!
//! Each superframe opens with a request phase: queue loads are sampled, the
//! weighted graph is rebuilt and every holder of a ready payload learns its next
//! hop. The transmission period is then filled in rounds. A round collects one
//! request per holder-flow pair (head of queue only), schedules it within the
//! slot budget still open, and executes the groups. Rounds repeat until no
//! request fits. Payloads relayed during a superframe become eligible for
//! forwarding in the next one. A request refused by the admission draw stays
//! queued and asks again in the next round.
//!
//! Network throughput counts every bit carried over the air, relay hops
//! included; end-to-end delivery is reported per flow and as
//! `delivered_throughput_bps`.

use std::cell::RefCell;
use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{link_slots, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::{place_nodes, NodeLayout};
use crate::metrics::jain_index;
use crate::pathing::{build_graph, LoadTable, PathTree};
use crate::scalar::Scalar;
use crate::scheduling::{
    build_schedule_with, prioritize, Admission, InterferenceModel, SchedulerConfig, SlotDemand, TReq,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum Mode {
    #[default]
    Cts,
    Dts,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Cts => "cts",
            Mode::Dts => "dts",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "cts" => Ok(Mode::Cts),
            "dts" => Ok(Mode::Dts),
            other => Err(format!("expected cts or dts, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrafficModel {
    /// Sources always hold one pending payload.
    Saturated,
    /// Each source starts with `payloads` payloads and nothing more.
    Burst { payloads: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Flow {
    pub flow_id: usize,
    pub source: usize,
    pub destination: usize,
    pub saturated: bool,
}

/// Draws `count` distinct ordered (source, destination) pairs.
///
/// The pairs are a prefix of one seeded shuffle of all pairs, so a smaller
/// flow count under the same rng state yields a subset of a larger one.
pub fn spawn_flows<S: Scalar, R: Rng + ?Sized>(count: usize, layout: &NodeLayout<S>, rng: &mut R) -> Result<Vec<Flow>> {
    let n = layout.len();
    let available = n * n.saturating_sub(1);
    if count == 0 || count > available {
        return Err(Error::TooManyFlows {
            requested: count,
            available,
        });
    }
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|s| (0..n).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect();
    pairs.shuffle(rng);
    Ok(pairs
        .into_iter()
        .take(count)
        .enumerate()
        .map(|(flow_id, (source, destination))| Flow {
            flow_id,
            source,
            destination,
            saturated: true,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Payload<S> {
    pub flow_id: usize,
    pub bits: S,
    pub hop_count: u32,
    /// First superframe in which this payload may be forwarded.
    ready_sf: u64,
    /// Visited nodes, recorded only when trail recording is enabled.
    pub trail: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams<S> {
    pub mode: Mode,
    pub channel: ChannelParams<S>,
    pub superframe_duration_s: S,
    /// Fraction of the superframe spent in beacon and request periods.
    pub overhead_fraction: S,
    pub interference_model: InterferenceModel,
    pub admission: Admission,
    pub traffic: TrafficModel,
    /// Superframes without service after which a backlogged flow counts as starved.
    pub starvation_threshold: u64,
}

impl<S: Scalar> Default for KernelParams<S> {
    fn default() -> Self {
        KernelParams {
            mode: Mode::Cts,
            channel: ChannelParams::default(),
            superframe_duration_s: S::lit(0.065_536),
            overhead_fraction: S::lit(0.1),
            interference_model: InterferenceModel::DualSector,
            admission: Admission::default(),
            traffic: TrafficModel::Saturated,
            starvation_threshold: 10,
        }
    }
}

impl<S: Scalar> KernelParams<S> {
    /// Slots available in one transmission period.
    pub fn budget_slots(&self) -> u64 {
        let tp = (S::one() - self.overhead_fraction) * self.superframe_duration_s;
        (tp / self.channel.slot_duration_s).floor().to_u64().unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuperframeStats<S> {
    pub sf: u64,
    pub mode: Mode,
    pub requests: usize,
    pub groups: usize,
    pub scheduled: usize,
    /// Requests still unplaced when the transmission period closed.
    pub deferred: usize,
    pub rejected: usize,
    pub bits_delivered: S,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScheduleTraceRow {
    pub sf: u64,
    pub group_index: usize,
    pub flow_id: usize,
    pub requester: usize,
    pub next_dest: usize,
    pub slots: u64,
    pub duration: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GraphTraceRow<S> {
    pub sf: u64,
    pub src: usize,
    pub dst: usize,
    pub weight: S,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSummary<S> {
    pub mode: Mode,
    /// Bits carried over the air on every hop, per second.
    pub network_throughput_bps: S,
    /// Bits delivered end to end, per second.
    pub delivered_throughput_bps: S,
    pub per_flow_throughput_bps: Vec<S>,
    /// `None` when no flow delivered anything.
    pub jain_index: Option<S>,
    pub superframes_run: u64,
    pub rejected_total: u64,
    pub deferred_total: u64,
    pub mean_group_size: S,
    pub starved_flows: usize,
    pub delivered_bits: S,
    pub carried_bits: S,
    pub injected_bits: S,
    pub transmissions: u64,
}

impl<S: Scalar> RunSummary<S> {
    pub fn mean_flow_throughput_bps(&self) -> S {
        if self.per_flow_throughput_bps.is_empty() {
            return S::zero();
        }
        self.per_flow_throughput_bps.iter().fold(S::zero(), |a, &b| a + b)
            / S::from_count(self.per_flow_throughput_bps.len())
    }
}

struct KernelDemand<'a, S> {
    layout: &'a NodeLayout<S>,
    params: &'a ChannelParams<S>,
    cache: &'a RefCell<HashMap<(usize, usize, usize), u64>>,
}

impl<S: Scalar> SlotDemand for KernelDemand<'_, S> {
    fn slots(&self, from: usize, to: usize, active_flows: usize) -> Result<u64> {
        let key = (from, to, active_flows);
        if let Some(&s) = self.cache.borrow().get(&key) {
            return Ok(s);
        }
        let s = link_slots(self.params, self.layout.distance(from, to), active_flows)?;
        self.cache.borrow_mut().insert(key, s);
        Ok(s)
    }
}

/// Mutable state of one simulation run.
#[derive(Debug)]
pub struct SimState<S> {
    layout: NodeLayout<S>,
    flows: Vec<Flow>,
    params: KernelParams<S>,
    rng: ChaCha8Rng,
    /// node → flow → FIFO of payloads held there.
    queues: Vec<BTreeMap<usize, VecDeque<Payload<S>>>>,
    sf: u64,
    clock_s: S,
    delivered_bits: Vec<S>,
    injected_bits: S,
    carried_bits: S,
    unserved_streak: Vec<u64>,
    served: Vec<bool>,
    rejected_total: u64,
    deferred_total: u64,
    groups_total: u64,
    members_total: u64,
    transmissions: u64,
    slot_cache: RefCell<HashMap<(usize, usize, usize), u64>>,
    direct_slot_cache: RefCell<HashMap<(usize, usize, usize), u64>>,
    record_trails: bool,
    delivered_trails: Vec<(usize, Vec<usize>)>,
    record_schedule: bool,
    schedule_trace: Vec<ScheduleTraceRow>,
    record_graph: bool,
    graph_trace: Vec<GraphTraceRow<S>>,
    sf_trace: Vec<SuperframeStats<S>>,
}

impl<S: Scalar> SimState<S> {
    pub fn new(layout: NodeLayout<S>, flows: Vec<Flow>, params: KernelParams<S>, rng: ChaCha8Rng) -> Result<Self> {
        params.channel.validate()?;
        for f in &flows {
            layout.check_node(f.source)?;
            layout.check_node(f.destination)?;
            if f.source == f.destination {
                return Err(Error::SameEndpoints(f.source));
            }
        }
        let mut flows = flows;
        let saturated = matches!(params.traffic, TrafficModel::Saturated);
        for f in &mut flows {
            f.saturated = saturated;
        }
        let n = layout.len();
        let mut state = SimState {
            delivered_bits: vec![S::zero(); flows.len()],
            unserved_streak: vec![0; flows.len()],
            served: vec![false; flows.len()],
            queues: vec![BTreeMap::new(); n],
            layout,
            flows,
            params,
            rng,
            sf: 0,
            clock_s: S::zero(),
            injected_bits: S::zero(),
            carried_bits: S::zero(),
            rejected_total: 0,
            deferred_total: 0,
            groups_total: 0,
            members_total: 0,
            transmissions: 0,
            slot_cache: RefCell::new(HashMap::new()),
            direct_slot_cache: RefCell::new(HashMap::new()),
            record_trails: false,
            delivered_trails: Vec::new(),
            record_schedule: false,
            schedule_trace: Vec::new(),
            record_graph: false,
            graph_trace: Vec::new(),
            sf_trace: Vec::new(),
        };
        let initial = match params.traffic {
            TrafficModel::Saturated => 1,
            TrafficModel::Burst { payloads } => payloads,
        };
        for fi in 0..state.flows.len() {
            for _ in 0..initial {
                state.inject(fi);
            }
        }
        Ok(state)
    }

    /// Keeps the full hop trail of every delivered payload.
    pub fn record_trails(&mut self, on: bool) {
        self.record_trails = on;
    }

    pub fn record_schedule(&mut self, on: bool) {
        self.record_schedule = on;
    }

    pub fn record_graph(&mut self, on: bool) {
        self.record_graph = on;
    }

    pub fn layout(&self) -> &NodeLayout<S> {
        &self.layout
    }

    pub fn flows(&self) -> &[Flow] {
        &self.flows
    }

    pub fn params(&self) -> &KernelParams<S> {
        &self.params
    }

    pub fn superframe(&self) -> u64 {
        self.sf
    }

    pub fn clock_s(&self) -> S {
        self.clock_s
    }

    pub fn delivered_bits(&self) -> &[S] {
        &self.delivered_bits
    }

    pub fn injected_bits(&self) -> S {
        self.injected_bits
    }

    pub fn delivered_trails(&self) -> &[(usize, Vec<usize>)] {
        &self.delivered_trails
    }

    pub fn schedule_trace(&self) -> &[ScheduleTraceRow] {
        &self.schedule_trace
    }

    pub fn graph_trace(&self) -> &[GraphTraceRow<S>] {
        &self.graph_trace
    }

    pub fn superframe_trace(&self) -> &[SuperframeStats<S>] {
        &self.sf_trace
    }

    /// Payloads held at `node` for `flow_id`.
    pub fn queue(&self, node: usize, flow_id: usize) -> Option<&VecDeque<Payload<S>>> {
        self.queues[node].get(&flow_id)
    }

    pub fn queued_bits(&self, node: usize) -> S {
        self.queues[node]
            .values()
            .flat_map(|q| q.iter())
            .fold(S::zero(), |a, p| a + p.bits)
    }

    pub fn queued_payloads(&self) -> usize {
        self.queues.iter().flat_map(|m| m.values()).map(VecDeque::len).sum()
    }

    fn inject(&mut self, flow_index: usize) {
        let flow = self.flows[flow_index];
        let bits = self.params.channel.payload_bits;
        self.queues[flow.source]
            .entry(flow.flow_id)
            .or_default()
            .push_back(Payload {
                flow_id: flow.flow_id,
                bits,
                hop_count: 0,
                ready_sf: self.sf,
                trail: Vec::new(),
            });
        self.injected_bits = self.injected_bits + bits;
    }

    fn flow_index(&self, flow_id: usize) -> usize {
        self.flows
            .iter()
            .position(|f| f.flow_id == flow_id)
            .expect("payload belongs to a known flow")
    }

    /// Saturated sources always hold one payload of their own.
    fn refill_sources(&mut self) {
        for fi in 0..self.flows.len() {
            let f = self.flows[fi];
            if !f.saturated {
                continue;
            }
            let empty = self.queues[f.source].get(&f.flow_id).is_none_or(VecDeque::is_empty);
            if empty {
                self.inject(fi);
            }
        }
    }

    /// Moves the head payload of (`holder`, `flow_id`) one hop; returns delivered bits.
    fn transmit(&mut self, holder: usize, flow_id: usize, next: usize) -> S {
        let queue = self.queues[holder]
            .get_mut(&flow_id)
            .expect("scheduled holder has a queue");
        let mut payload = queue.pop_front().expect("scheduled holder has a payload");
        if queue.is_empty() {
            self.queues[holder].remove(&flow_id);
        }
        payload.hop_count += 1;
        if self.record_trails {
            if payload.trail.is_empty() {
                payload.trail.push(holder);
            }
            payload.trail.push(next);
        }
        self.transmissions += 1;
        self.carried_bits = self.carried_bits + payload.bits;
        let fi = self.flow_index(flow_id);
        self.served[fi] = true;
        if next == self.flows[fi].destination {
            let bits = payload.bits;
            self.delivered_bits[fi] = self.delivered_bits[fi] + bits;
            if self.record_trails {
                self.delivered_trails.push((flow_id, payload.trail));
            }
            bits
        } else {
            payload.ready_sf = self.sf + 1;
            self.queues[next].entry(flow_id).or_default().push_back(payload);
            S::zero()
        }
    }

    fn head_ready(&self, node: usize, flow_id: usize) -> bool {
        self.queues[node]
            .get(&flow_id)
            .and_then(VecDeque::front)
            .is_some_and(|p| p.ready_sf <= self.sf)
    }

    pub fn step(&mut self) -> Result<SuperframeStats<S>> {
        match self.params.mode {
            Mode::Cts => self.run_superframe_cts(),
            Mode::Dts => self.run_superframe_dts(),
        }
    }

    /// One superframe of the concurrent scheme with multihop relaying.
    pub fn run_superframe_cts(&mut self) -> Result<SuperframeStats<S>> {
        self.begin_superframe();
        let n = self.layout.len();

        // request phase: loads, graph, next hops
        let loads: Vec<S> = (0..n).map(|j| self.queued_bits(j)).collect();
        let loads = LoadTable::new(loads, &self.layout);
        let graph = build_graph(&self.layout, &loads);
        if self.record_graph {
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        self.graph_trace.push(GraphTraceRow {
                            sf: self.sf,
                            src: i,
                            dst: j,
                            weight: graph.weight(i, j),
                        });
                    }
                }
            }
        }
        let mut trees: HashMap<usize, PathTree<S>> = HashMap::new();
        let mut hops: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for node in 0..n {
            for &flow_id in self.queues[node].keys() {
                let dst = self.flows[self.flow_index(flow_id)].destination;
                let tree = match trees.entry(dst) {
                    Entry::Occupied(e) => e.into_mut(),
                    Entry::Vacant(e) => e.insert(PathTree::toward(&graph, dst)?),
                };
                hops.insert((node, flow_id), tree.next_hop(node)?);
            }
        }

        // transmission period
        let config = SchedulerConfig {
            budget_slots: self.params.budget_slots(),
            model: self.params.interference_model,
            admission: self.params.admission,
        };
        let mut remaining = config.budget_slots;
        let mut stats = self.empty_stats();
        let mut group_index = 0usize;
        loop {
            self.refill_sources();
            let mut requests = Vec::new();
            {
                let demand = KernelDemand {
                    layout: &self.layout,
                    params: &self.params.channel,
                    cache: &self.slot_cache,
                };
                for (&(node, flow_id), &next) in &hops {
                    if !self.head_ready(node, flow_id) {
                        continue;
                    }
                    requests.push(TReq {
                        requester: node,
                        next_dest: next,
                        slots: demand.slots(node, next, 1)?,
                        flow_id,
                    });
                }
            }
            if requests.is_empty() {
                stats.deferred = 0;
                break;
            }
            stats.requests += requests.len();
            let schedule = {
                let demand = KernelDemand {
                    layout: &self.layout,
                    params: &self.params.channel,
                    cache: &self.slot_cache,
                };
                let round = SchedulerConfig {
                    budget_slots: remaining,
                    ..config
                };
                build_schedule_with(&requests, &self.layout, &demand, &round, &mut self.rng)?
            };
            stats.rejected += schedule.rejected.len();
            stats.deferred = schedule.deferred.len();
            if schedule.groups.is_empty() {
                break;
            }
            remaining -= schedule.total_slots();
            for group in &schedule.groups {
                stats.groups += 1;
                self.groups_total += 1;
                self.members_total += group.len() as u64;
                for (member, &slots) in group.members.iter().zip(&group.member_slots) {
                    if self.record_schedule {
                        self.schedule_trace.push(ScheduleTraceRow {
                            sf: self.sf,
                            group_index,
                            flow_id: member.flow_id,
                            requester: member.requester,
                            next_dest: member.next_dest,
                            slots,
                            duration: group.duration_slots,
                        });
                    }
                    stats.scheduled += 1;
                    stats.bits_delivered =
                        stats.bits_delivered + self.transmit(member.requester, member.flow_id, member.next_dest);
                }
                group_index += 1;
            }
        }
        Ok(self.end_superframe(stats))
    }

    /// One superframe of the direct scheme: one transmission at a time, no relays.
    pub fn run_superframe_dts(&mut self) -> Result<SuperframeStats<S>> {
        self.begin_superframe();
        let channel = self.params.channel.without_interference();
        let mut remaining = self.params.budget_slots();
        let mut stats = self.empty_stats();
        let mut group_index = 0usize;
        loop {
            self.refill_sources();
            let mut requests = Vec::new();
            {
                let demand = KernelDemand {
                    layout: &self.layout,
                    params: &channel,
                    cache: &self.direct_slot_cache,
                };
                for f in &self.flows {
                    if self.head_ready(f.source, f.flow_id) {
                        requests.push(TReq {
                            requester: f.source,
                            next_dest: f.destination,
                            slots: demand.slots(f.source, f.destination, 1)?,
                            flow_id: f.flow_id,
                        });
                    }
                }
            }
            if requests.is_empty() {
                stats.deferred = 0;
                break;
            }
            stats.requests += requests.len();
            let mut served = 0usize;
            let mut deferred = 0usize;
            for r in prioritize(&requests) {
                if r.slots > remaining {
                    deferred += 1;
                    continue;
                }
                remaining -= r.slots;
                served += 1;
                stats.groups += 1;
                stats.scheduled += 1;
                self.groups_total += 1;
                self.members_total += 1;
                if self.record_schedule {
                    self.schedule_trace.push(ScheduleTraceRow {
                        sf: self.sf,
                        group_index,
                        flow_id: r.flow_id,
                        requester: r.requester,
                        next_dest: r.next_dest,
                        slots: r.slots,
                        duration: r.slots,
                    });
                }
                group_index += 1;
                stats.bits_delivered = stats.bits_delivered + self.transmit(r.requester, r.flow_id, r.next_dest);
            }
            stats.deferred = deferred;
            if served == 0 {
                break;
            }
        }
        Ok(self.end_superframe(stats))
    }

    fn empty_stats(&self) -> SuperframeStats<S> {
        SuperframeStats {
            sf: self.sf,
            mode: self.params.mode,
            requests: 0,
            groups: 0,
            scheduled: 0,
            deferred: 0,
            rejected: 0,
            bits_delivered: S::zero(),
        }
    }

    fn begin_superframe(&mut self) {
        self.served.iter_mut().for_each(|s| *s = false);
        self.refill_sources();
    }

    fn end_superframe(&mut self, stats: SuperframeStats<S>) -> SuperframeStats<S> {
        for fi in 0..self.flows.len() {
            let fid = self.flows[fi].flow_id;
            if self.served[fi] {
                self.unserved_streak[fi] = 0;
            } else if self.queues.iter().any(|m| m.contains_key(&fid)) {
                self.unserved_streak[fi] += 1;
            }
        }
        self.rejected_total += stats.rejected as u64;
        self.deferred_total += stats.deferred as u64;
        self.sf += 1;
        self.clock_s = S::from_u64(self.sf).unwrap() * self.params.superframe_duration_s;
        self.sf_trace.push(stats.clone());
        stats
    }

    pub fn summary(&self) -> RunSummary<S> {
        let elapsed = self.clock_s;
        let per_flow: Vec<S> = self
            .delivered_bits
            .iter()
            .map(|&b| if elapsed > S::zero() { b / elapsed } else { S::zero() })
            .collect();
        let delivered = self.delivered_bits.iter().fold(S::zero(), |a, &b| a + b);
        let rate = |bits: S| if elapsed > S::zero() { bits / elapsed } else { S::zero() };
        let mean_group_size = if self.groups_total > 0 {
            S::from_u64(self.members_total).unwrap() / S::from_u64(self.groups_total).unwrap()
        } else {
            S::zero()
        };
        RunSummary {
            mode: self.params.mode,
            network_throughput_bps: rate(self.carried_bits),
            delivered_throughput_bps: rate(delivered),
            jain_index: jain_index(&per_flow).ok(),
            per_flow_throughput_bps: per_flow,
            superframes_run: self.sf,
            rejected_total: self.rejected_total,
            deferred_total: self.deferred_total,
            mean_group_size,
            starved_flows: self
                .unserved_streak
                .iter()
                .filter(|&&s| s >= self.params.starvation_threshold)
                .count(),
            delivered_bits: delivered,
            carried_bits: self.carried_bits,
            injected_bits: self.injected_bits,
            transmissions: self.transmissions,
        }
    }
}

/// Rng for one purpose within a run; streams keep layout, flows and admission independent.
pub fn seeded_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub const LAYOUT_STREAM: u64 = 0;
pub const FLOW_STREAM: u64 = 1;
pub const ADMISSION_STREAM: u64 = 2;

/// Everything needed to run one cell.
#[derive(Debug, Clone)]
pub struct SimConfig<S> {
    pub kernel: KernelParams<S>,
    pub nodes: usize,
    pub room_width: S,
    pub room_height: S,
    pub coverage_radius: S,
    pub flows: usize,
    pub superframes: u64,
    pub seed: u64,
    /// Replay this layout instead of drawing one.
    pub layout: Option<NodeLayout<S>>,
    pub record_schedule: bool,
    pub record_graph: bool,
}

impl<S: Scalar> Default for SimConfig<S> {
    fn default() -> Self {
        SimConfig {
            kernel: KernelParams::default(),
            nodes: 30,
            room_width: S::lit(16.0),
            room_height: S::lit(16.0),
            coverage_radius: S::lit(23.0),
            flows: 6,
            superframes: 200,
            seed: 1,
            layout: None,
            record_schedule: false,
            record_graph: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput<S> {
    pub summary: RunSummary<S>,
    pub layout: NodeLayout<S>,
    pub flows: Vec<Flow>,
    pub superframes: Vec<SuperframeStats<S>>,
    pub schedule_trace: Vec<ScheduleTraceRow>,
    pub graph_trace: Vec<GraphTraceRow<S>>,
}

/// Places nodes and flows from the seed and builds the initial state.
pub fn prepare<S: Scalar>(config: &SimConfig<S>) -> Result<SimState<S>> {
    let layout = match &config.layout {
        Some(l) => l.clone(),
        None => place_nodes(
            config.nodes,
            config.room_width,
            config.room_height,
            config.coverage_radius,
            &mut seeded_rng(config.seed, LAYOUT_STREAM),
        )?,
    };
    let flows = spawn_flows(config.flows, &layout, &mut seeded_rng(config.seed, FLOW_STREAM))?;
    let mut state = SimState::new(layout, flows, config.kernel, seeded_rng(config.seed, ADMISSION_STREAM))?;
    state.record_schedule(config.record_schedule);
    state.record_graph(config.record_graph);
    Ok(state)
}

pub fn run_simulation<S: Scalar>(config: &SimConfig<S>) -> Result<RunOutput<S>> {
    if config.superframes == 0 {
        return Err(Error::config("superframes", "must be at least 1"));
    }
    let mut state = prepare(config)?;
    for _ in 0..config.superframes {
        state.step()?;
    }
    Ok(RunOutput {
        summary: state.summary(),
        flows: state.flows.clone(),
        superframes: std::mem::take(&mut state.sf_trace),
        schedule_trace: std::mem::take(&mut state.schedule_trace),
        graph_trace: std::mem::take(&mut state.graph_trace),
        layout: state.layout,
    })
}

//! Concurrent-group formation for one transmission period.
//!
//! Requests are visited in priority order (largest slot demand first). Each one
//! goes into the first existing group it does not conflict with, provided the
//! group's duration after re-rating every member at the new group size still
//! fits the slot budget. Otherwise a new group is opened if the budget allows,
//! and if neither works the request is deferred. Before insertion an admission
//! draw against the prospective group's size may reject it.

use std::cmp::Reverse;
use std::collections::HashMap;
use std::str::FromStr;

use rand::Rng;

use crate::channel::{link_slots, ChannelParams};
use crate::error::{Error, Result};
use crate::geometry::NodeLayout;
use crate::scalar::Scalar;

/// Probability, per existing group member, that a joining request is refused.
pub const DEFAULT_REJECTION_PER_MEMBER: f64 = 0.1;

/// Transmission request: one payload hop from `requester` to `next_dest`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TReq {
    pub requester: usize,
    pub next_dest: usize,
    pub slots: u64,
    pub flow_id: usize,
}

impl TReq {
    fn touches(&self, node: usize) -> bool {
        self.requester == node || self.next_dest == node
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InterferenceModel {
    /// Victim receiver must be inside the aggressor's transmit wedge and be listening toward it.
    #[default]
    DualSector,
    /// Being inside the aggressor's transmit wedge is enough.
    TxBeam,
}

impl InterferenceModel {
    pub fn as_str(self) -> &'static str {
        match self {
            InterferenceModel::DualSector => "dual_sector",
            InterferenceModel::TxBeam => "tx_beam",
        }
    }
}

impl FromStr for InterferenceModel {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dual_sector" => Ok(InterferenceModel::DualSector),
            "tx_beam" => Ok(InterferenceModel::TxBeam),
            other => Err(format!("expected dual_sector or tx_beam, got {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admission {
    /// Refuse with probability `min(1, per_member · group size)`.
    Probabilistic {
        per_member: f64,
    },
    AlwaysAdmit,
}

impl Default for Admission {
    fn default() -> Self {
        Admission::Probabilistic {
            per_member: DEFAULT_REJECTION_PER_MEMBER,
        }
    }
}

/// Sort by slot demand descending, then requester id, then flow id.
pub fn prioritize(requests: &[TReq]) -> Vec<TReq> {
    let mut out = requests.to_vec();
    out.sort_by_key(|r| (Reverse(r.slots), r.requester, r.flow_id, r.next_dest));
    out
}

/// Whether two requests may not share a group.
pub fn conflicts<S: Scalar>(a: &TReq, b: &TReq, layout: &NodeLayout<S>, model: InterferenceModel) -> bool {
    if a.touches(b.requester) || a.touches(b.next_dest) {
        return true;
    }
    interferes(a, b, layout, model) || interferes(b, a, layout, model)
}

/// Does `aggressor`'s transmission disturb `victim`'s receiver?
fn interferes<S: Scalar>(aggressor: &TReq, victim: &TReq, layout: &NodeLayout<S>, model: InterferenceModel) -> bool {
    let illuminated = layout.beam_covers(aggressor.requester, aggressor.next_dest, victim.next_dest);
    match model {
        InterferenceModel::TxBeam => illuminated,
        InterferenceModel::DualSector => {
            illuminated
                && layout.sector(victim.next_dest, victim.requester)
                    == layout.sector(victim.next_dest, aggressor.requester)
        }
    }
}

pub fn rejection_probability(per_member: f64, group_size: usize) -> f64 {
    (per_member * group_size as f64).clamp(0.0, 1.0)
}

/// Admission draw against a group that currently has `group_size_so_far` members.
pub fn admit<R: Rng + ?Sized>(group_size_so_far: usize, rng: &mut R) -> bool {
    admit_with(DEFAULT_REJECTION_PER_MEMBER, group_size_so_far, rng)
}

pub fn admit_with<R: Rng + ?Sized>(per_member: f64, group_size_so_far: usize, rng: &mut R) -> bool {
    let p = rejection_probability(per_member, group_size_so_far);
    if p <= 0.0 {
        return true;
    }
    rng.gen::<f64>() >= p
}

/// Slot demand of a hop when `active_flows` transmissions share the group.
pub trait SlotDemand {
    fn slots(&self, from: usize, to: usize, active_flows: usize) -> Result<u64>;
}

/// Slot demand computed directly from the channel model.
#[derive(Debug, Clone, Copy)]
pub struct ChannelLinks<'a, S> {
    pub layout: &'a NodeLayout<S>,
    pub params: &'a ChannelParams<S>,
}

impl<S: Scalar> SlotDemand for ChannelLinks<'_, S> {
    fn slots(&self, from: usize, to: usize, active_flows: usize) -> Result<u64> {
        link_slots(self.params, self.layout.distance(from, to), active_flows)
    }
}

/// Memoizing wrapper around another demand model.
#[derive(Debug)]
pub struct CachedDemand<D> {
    inner: D,
    cache: std::cell::RefCell<HashMap<(usize, usize, usize), u64>>,
}

impl<D: SlotDemand> CachedDemand<D> {
    pub fn new(inner: D) -> Self {
        CachedDemand {
            inner,
            cache: Default::default(),
        }
    }
}

impl<D: SlotDemand> SlotDemand for CachedDemand<D> {
    fn slots(&self, from: usize, to: usize, active_flows: usize) -> Result<u64> {
        let key = (from, to, active_flows);
        if let Some(&s) = self.cache.borrow().get(&key) {
            return Ok(s);
        }
        let s = self.inner.slots(from, to, active_flows)?;
        self.cache.borrow_mut().insert(key, s);
        Ok(s)
    }
}

/// A set of mutually compatible requests sharing one channel allocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Group {
    pub members: Vec<TReq>,
    /// Slot demand of each member re-rated at the group's size.
    pub member_slots: Vec<u64>,
    pub duration_slots: u64,
}

impl Group {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    pub groups: Vec<Group>,
    /// Did not fit any group within the slot budget.
    pub deferred: Vec<TReq>,
    /// Refused by the admission draw.
    pub rejected: Vec<TReq>,
}

impl Schedule {
    pub fn total_slots(&self) -> u64 {
        self.groups.iter().map(|g| g.duration_slots).sum()
    }

    pub fn scheduled(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchedulerConfig {
    pub budget_slots: u64,
    pub model: InterferenceModel,
    pub admission: Admission,
}

impl SchedulerConfig {
    pub fn new(budget_slots: u64) -> Self {
        SchedulerConfig {
            budget_slots,
            model: InterferenceModel::default(),
            admission: Admission::default(),
        }
    }
}

/// Builds a schedule with the default interference model and admission rule.
pub fn build_schedule<S: Scalar, R: Rng + ?Sized>(
    requests: &[TReq],
    layout: &NodeLayout<S>,
    params: &ChannelParams<S>,
    budget_slots: u64,
    rng: &mut R,
) -> Result<Schedule> {
    let demand = ChannelLinks { layout, params };
    build_schedule_with(requests, layout, &demand, &SchedulerConfig::new(budget_slots), rng)
}

pub fn build_schedule_with<S: Scalar, D: SlotDemand + ?Sized, R: Rng + ?Sized>(
    requests: &[TReq],
    layout: &NodeLayout<S>,
    demand: &D,
    config: &SchedulerConfig,
    rng: &mut R,
) -> Result<Schedule> {
    for r in requests {
        layout.check_node(r.requester)?;
        layout.check_node(r.next_dest)?;
        if r.requester == r.next_dest {
            return Err(Error::SameEndpoints(r.requester));
        }
    }

    let mut schedule = Schedule::default();
    let mut used: u64 = 0;

    for req in prioritize(requests) {
        let mut placement: Option<(Option<usize>, Vec<u64>, u64)> = None;

        for (gi, group) in schedule.groups.iter().enumerate() {
            if group.members.iter().any(|m| conflicts(&req, m, layout, config.model)) {
                continue;
            }
            let size = group.len() + 1;
            let mut slots = Vec::with_capacity(size);
            for m in group.members.iter().chain(std::iter::once(&req)) {
                slots.push(demand.slots(m.requester, m.next_dest, size)?);
            }
            let duration = slots.iter().copied().max().unwrap_or(0);
            if used - group.duration_slots + duration <= config.budget_slots {
                placement = Some((Some(gi), slots, duration));
                break;
            }
        }

        if placement.is_none() {
            let duration = demand.slots(req.requester, req.next_dest, 1)?;
            if used + duration <= config.budget_slots {
                placement = Some((None, vec![duration], duration));
            }
        }

        let Some((target, slots, duration)) = placement else {
            schedule.deferred.push(req);
            continue;
        };

        let size_so_far = target.map_or(0, |gi| schedule.groups[gi].len());
        let admitted = match config.admission {
            Admission::AlwaysAdmit => true,
            Admission::Probabilistic { per_member } => admit_with(per_member, size_so_far, rng),
        };
        if !admitted {
            schedule.rejected.push(req);
            continue;
        }

        match target {
            Some(gi) => {
                let group = &mut schedule.groups[gi];
                used = used - group.duration_slots + duration;
                group.members.push(req);
                group.member_slots = slots;
                group.duration_slots = duration;
            }
            None => {
                used += duration;
                schedule.groups.push(Group {
                    members: vec![req],
                    member_slots: slots,
                    duration_slots: duration,
                });
            }
        }
    }

    Ok(schedule)
}

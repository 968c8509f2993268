#![allow(dead_code)]

use std::collections::HashMap;

use rand::Rng;
use wpan_cts::channel::{link_rate, slots_for_payload, ChannelParams, LinkRate};
use wpan_cts::geometry::{distance, in_beam, sector_of, NodeLayout, Point};
use wpan_cts::metrics::jain_index;
use wpan_cts::pathing::{build_graph, LoadTable, PathTree, WeightedGraph};
use wpan_cts::scheduling::{
    build_schedule_with, conflicts, Admission, CachedDemand, ChannelLinks, InterferenceModel, Schedule,
    SchedulerConfig, SlotDemand, TReq,
};

pub const ROOM: f64 = 16.0;
pub const RADIUS: f64 = 23.0;

pub fn random_point<R: Rng>(rng: &mut R) -> Point<f64> {
    Point::new(rng.gen_range(0.0..=ROOM), rng.gen_range(0.0..=ROOM))
}

/// `n` distinct points in the default room.
pub fn random_layout<R: Rng>(rng: &mut R, n: usize) -> NodeLayout<f64> {
    let mut pts: Vec<Point<f64>> = Vec::with_capacity(n);
    while pts.len() < n {
        let p = random_point(rng);
        if pts.iter().all(|q| *q != p) {
            pts.push(p);
        }
    }
    NodeLayout::new(pts, ROOM, ROOM, RADIUS).expect("room fits within the coverage radius")
}

pub fn random_requests<R: Rng>(rng: &mut R, nodes: usize, count: usize) -> Vec<TReq> {
    (0..count)
        .map(|flow_id| {
            let requester = rng.gen_range(0..nodes);
            let mut next_dest = rng.gen_range(0..nodes - 1);
            if next_dest >= requester {
                next_dest += 1;
            }
            TReq {
                requester,
                next_dest,
                slots: 0,
                flow_id,
            }
        })
        .collect()
}

fn key(r: &TReq) -> (usize, usize, usize) {
    (r.requester, r.next_dest, r.flow_id)
}

/// Partition, pairwise compatibility, budget and re-rating invariants of one schedule.
pub fn check_schedule(
    requests: &[TReq],
    layout: &NodeLayout<f64>,
    demand: &dyn SlotDemand,
    config: &SchedulerConfig,
    schedule: &Schedule,
) -> Result<(), String> {
    let mut seen: HashMap<(usize, usize, usize), i64> = HashMap::new();
    for r in requests {
        *seen.entry(key(r)).or_default() += 1;
    }
    let placed = schedule
        .groups
        .iter()
        .flat_map(|g| g.members.iter())
        .chain(&schedule.deferred)
        .chain(&schedule.rejected);
    for r in placed {
        *seen.entry(key(r)).or_default() -= 1;
    }
    if let Some((k, c)) = seen.iter().find(|(_, &c)| c != 0) {
        return Err(format!("request {k:?} placed {} times", 1 - c));
    }
    if matches!(config.admission, Admission::AlwaysAdmit) && !schedule.rejected.is_empty() {
        return Err("always-admit rejected a request".into());
    }
    let mut total = 0u64;
    for (gi, g) in schedule.groups.iter().enumerate() {
        if g.members.is_empty() || g.members.len() != g.member_slots.len() {
            return Err(format!("group {gi} malformed"));
        }
        for (i, a) in g.members.iter().enumerate() {
            for b in &g.members[i + 1..] {
                if conflicts(a, b, layout, config.model) {
                    return Err(format!("group {gi} holds conflicting {a:?} and {b:?}"));
                }
            }
            let want = demand
                .slots(a.requester, a.next_dest, g.members.len())
                .map_err(|e| e.to_string())?;
            if g.member_slots[i] != want {
                return Err(format!(
                    "group {gi} member {i} has {} slots, expected {want}",
                    g.member_slots[i]
                ));
            }
        }
        let longest = g.member_slots.iter().copied().max().unwrap();
        if g.duration_slots != longest {
            return Err(format!(
                "group {gi} duration {} != longest member {longest}",
                g.duration_slots
            ));
        }
        total += g.duration_slots;
    }
    if total != schedule.total_slots() || total > config.budget_slots {
        return Err(format!("total {total} exceeds budget {}", config.budget_slots));
    }
    Ok(())
}

/// One random scheduling instance checked end to end.
pub fn schedule_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let nodes = rng.gen_range(2..=12);
    let layout = random_layout(rng, nodes);
    let count = rng.gen_range(0..=16);
    let requests = random_requests(rng, nodes, count);
    let params = ChannelParams::<f64>::default().with_pathloss(*[2.0, 2.5, 3.0].get(rng.gen_range(0..3)).unwrap());
    let demand = CachedDemand::new(ChannelLinks {
        layout: &layout,
        params: &params,
    });
    let config = SchedulerConfig {
        budget_slots: rng.gen_range(0..=3000),
        model: if rng.gen_bool(0.5) {
            InterferenceModel::DualSector
        } else {
            InterferenceModel::TxBeam
        },
        admission: if rng.gen_bool(0.5) {
            Admission::AlwaysAdmit
        } else {
            Admission::Probabilistic { per_member: 0.1 }
        },
    };
    let schedule = build_schedule_with(&requests, &layout, &demand, &config, rng).map_err(|e| e.to_string())?;
    check_schedule(&requests, &layout, &demand, &config, &schedule)
}

pub fn conflicts_symmetric_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let nodes = rng.gen_range(4..=10);
    let layout = random_layout(rng, nodes);
    let reqs = random_requests(rng, nodes, 2);
    for model in [InterferenceModel::DualSector, InterferenceModel::TxBeam] {
        let ab = conflicts(&reqs[0], &reqs[1], &layout, model);
        let ba = conflicts(&reqs[1], &reqs[0], &layout, model);
        if ab != ba {
            return Err(format!("{model:?}: {:?} vs {:?} asymmetric", reqs[0], reqs[1]));
        }
    }
    if conflicts(&reqs[0], &reqs[1], &layout, InterferenceModel::DualSector)
        && !conflicts(&reqs[0], &reqs[1], &layout, InterferenceModel::TxBeam)
    {
        return Err("dual-sector conflict not seen by the beam-only model".into());
    }
    Ok(())
}

/// Minimum total weight over all simple paths, by exhaustive enumeration.
pub fn brute_force_cost(graph: &WeightedGraph<f64>, src: usize, dst: usize) -> f64 {
    fn walk(g: &WeightedGraph<f64>, at: usize, dst: usize, visited: &mut Vec<bool>, acc: f64, best: &mut f64) {
        if at == dst {
            *best = best.min(acc);
            return;
        }
        for next in 0..g.len() {
            if !visited[next] {
                visited[next] = true;
                walk(g, next, dst, visited, acc + g.weight(at, next), best);
                visited[next] = false;
            }
        }
    }
    let mut visited = vec![false; graph.len()];
    visited[src] = true;
    let mut best = f64::INFINITY;
    walk(graph, src, dst, &mut visited, 0.0, &mut best);
    best
}

pub fn random_graph<R: Rng>(rng: &mut R) -> WeightedGraph<f64> {
    let n = rng.gen_range(2..=8);
    if rng.gen_bool(0.5) {
        let layout = random_layout(rng, n);
        let loads: Vec<f64> = (0..n)
            .map(|_| {
                if rng.gen_bool(0.5) {
                    0.0
                } else {
                    1e7 * rng.gen_range(0..4) as f64
                }
            })
            .collect();
        build_graph(&layout, &LoadTable::new(loads, &layout))
    } else {
        // small integer weights make ties common
        let w = (0..n * n)
            .map(|k| {
                if k / n == k % n {
                    0.0
                } else {
                    rng.gen_range(0..6) as f64
                }
            })
            .collect();
        WeightedGraph::from_matrix(n, w).unwrap()
    }
}

pub fn path_weight(graph: &WeightedGraph<f64>, path: &[usize]) -> f64 {
    path.windows(2).map(|w| graph.weight(w[0], w[1])).sum()
}

pub fn dijkstra_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let g = random_graph(rng);
    for dst in 0..g.len() {
        let tree = PathTree::toward(&g, dst).map_err(|e| e.to_string())?;
        for src in 0..g.len() {
            if src == dst {
                continue;
            }
            let best = brute_force_cost(&g, src, dst);
            let path = tree.path(src).map_err(|e| e.to_string())?;
            let got = path_weight(&g, &path);
            let tol = 1e-9 * best.abs().max(1.0);
            if (got - best).abs() > tol || (tree.cost(src) - best).abs() > tol {
                return Err(format!("{src}->{dst}: path {path:?} weighs {got}, optimum {best}"));
            }
            if path.first() != Some(&src) || path.last() != Some(&dst) {
                return Err(format!("{src}->{dst}: bad endpoints {path:?}"));
            }
        }
    }
    Ok(())
}

pub fn rate_monotone_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(2.0..=4.0);
    let p = ChannelParams::<f64>::default().with_pathloss(n);
    let d1 = rng.gen_range(0.05..30.0);
    let d2 = d1 * rng.gen_range(1.0..3.0);
    let nf1 = rng.gen_range(1..=8);
    let nf2 = nf1 + rng.gen_range(0..=4);
    let r = |p: &ChannelParams<f64>, d: f64, nf: usize| link_rate(p, d, nf).unwrap().0;
    if r(&p, d1, nf1) < r(&p, d2, nf1) {
        return Err(format!("rate rose with distance {d1} -> {d2} at n={n}"));
    }
    if r(&p, d1, nf1) < r(&p, d1, nf2) {
        return Err(format!("rate rose with group size {nf1} -> {nf2}"));
    }
    // beyond 1 m a steeper exponent loses more power
    let far = 1.0 + d1;
    let n2 = n + rng.gen_range(0.0..1.0);
    if r(&p, far, nf1) < r(&p.with_pathloss(n2), far, nf1) {
        return Err(format!("rate rose with exponent {n} -> {n2} at {far} m"));
    }
    Ok(())
}

pub fn slots_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let p = ChannelParams::<f64> {
        payload_bits: 10f64.powf(rng.gen_range(3.0..9.0)),
        slot_duration_s: 10f64.powf(rng.gen_range(-7.0..-3.0)),
        ..ChannelParams::default()
    };
    let rate = 10f64.powf(rng.gen_range(6.0..12.0));
    let k = slots_for_payload(&p, LinkRate(rate)).map_err(|e| e.to_string())?;
    if (k as f64) * p.slot_duration_s * rate < p.payload_bits {
        return Err(format!("{k} slots carry less than {} bits at {rate}", p.payload_bits));
    }
    if k > 1 && ((k - 1) as f64) * p.slot_duration_s * rate >= p.payload_bits {
        return Err(format!("{k} slots is not minimal at {rate}"));
    }
    Ok(())
}

pub fn jain_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let n = rng.gen_range(1..=20);
    let mut xs: Vec<f64> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.2) {
                0.0
            } else {
                rng.gen_range(0.0..1e11)
            }
        })
        .collect();
    if xs.iter().all(|&x| x == 0.0) {
        xs[0] = 1.0;
    }
    let j = jain_index(&xs).map_err(|e| e.to_string())?;
    let lo = 1.0 / n as f64;
    if j < lo * (1.0 - 1e-12) || j > 1.0 + 1e-12 {
        return Err(format!("jain {j} outside [{lo}, 1] for {xs:?}"));
    }
    Ok(())
}

pub fn geometry_instance<R: Rng>(rng: &mut R) -> Result<(), String> {
    let a = random_point(rng);
    let b = random_point(rng);
    if a == b {
        return Ok(());
    }
    if distance(a, b) != distance(b, a) {
        return Err("distance asymmetric".into());
    }
    let s = sector_of(a, b).unwrap();
    if sector_of(b, a).unwrap() != s.opposite() {
        return Err(format!("reverse sector of {a:?}->{b:?} is not opposite"));
    }
    let rot = |p: Point<f64>| Point::new(-p.y, p.x);
    let r = sector_of(rot(a), rot(b)).unwrap().value();
    if r != (s.value() + 2) % 8 {
        return Err(format!("quarter turn moved sector {} to {r}", s.value()));
    }
    if !in_beam(a, b, b, distance(a, b)) {
        return Err("beam misses its own aim point".into());
    }
    Ok(())
}

/// Runs `check` `count` times and reports the first failure.
pub fn repeat<R: Rng>(
    rng: &mut R,
    count: usize,
    mut check: impl FnMut(&mut R) -> Result<(), String>,
) -> Result<(), String> {
    for i in 0..count {
        check(rng).map_err(|e| format!("instance {i}: {e}"))?;
    }
    Ok(())
}

mod common;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wpan_cts::channel::ChannelParams;
use wpan_cts::geometry::NodeLayout;
use wpan_cts::scheduling::{
    build_schedule_with, conflicts, Admission, ChannelLinks, InterferenceModel, SchedulerConfig, SlotDemand, TReq,
};

/// Straight-line first-fit: priority order, first compatible group whose re-rated
/// duration keeps the whole schedule within budget, else a new group, else deferred.
fn reference(
    requests: &[TReq],
    layout: &NodeLayout<f64>,
    demand: &dyn SlotDemand,
    budget: u64,
    model: InterferenceModel,
) -> (Vec<Vec<TReq>>, Vec<TReq>) {
    let mut order = requests.to_vec();
    order.sort_by(|a, b| {
        b.slots
            .cmp(&a.slots)
            .then(a.requester.cmp(&b.requester))
            .then(a.flow_id.cmp(&b.flow_id))
            .then(a.next_dest.cmp(&b.next_dest))
    });
    let duration = |g: &[TReq]| -> u64 {
        g.iter()
            .map(|m| demand.slots(m.requester, m.next_dest, g.len()).unwrap())
            .max()
            .unwrap_or(0)
    };
    let mut groups: Vec<Vec<TReq>> = Vec::new();
    let mut deferred = Vec::new();
    'next: for r in order {
        let total: u64 = groups.iter().map(|g| duration(g)).sum();
        for g in groups.iter_mut() {
            if g.iter().any(|m| conflicts(&r, m, layout, model)) {
                continue;
            }
            let mut grown = g.clone();
            grown.push(r);
            if total - duration(g) + duration(&grown) <= budget {
                *g = grown;
                continue 'next;
            }
        }
        if total + duration(&[r]) <= budget {
            groups.push(vec![r]);
        } else {
            deferred.push(r);
        }
    }
    (groups, deferred)
}

#[test]
fn first_fit_matches_reference_on_small_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let params = ChannelParams::<f64>::default();
    for _ in 0..3000 {
        let nodes = rng.gen_range(2..=8);
        let layout = common::random_layout(&mut rng, nodes);
        let count = rng.gen_range(1..=6);
        let mut requests = common::random_requests(&mut rng, nodes, count);
        let demand = ChannelLinks {
            layout: &layout,
            params: &params,
        };
        for r in &mut requests {
            r.slots = demand.slots(r.requester, r.next_dest, 1).unwrap();
        }
        let model = if rng.gen_bool(0.5) {
            InterferenceModel::DualSector
        } else {
            InterferenceModel::TxBeam
        };
        let config = SchedulerConfig {
            budget_slots: rng.gen_range(0..=1500),
            model,
            admission: Admission::AlwaysAdmit,
        };
        let got = build_schedule_with(&requests, &layout, &demand, &config, &mut rng).unwrap();
        let (groups, deferred) = reference(&requests, &layout, &demand, config.budget_slots, model);
        let got_groups: Vec<Vec<TReq>> = got.groups.iter().map(|g| g.members.clone()).collect();
        assert_eq!(got_groups, groups);
        assert_eq!(got.deferred, deferred);
        assert!(got.rejected.is_empty());
    }
}

#[test]
fn every_request_lands_exactly_once_under_any_admission() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    common::repeat(&mut rng, 2000, common::schedule_instance).unwrap();
}

#[test]
fn certain_rejection_leaves_only_singletons() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let params = ChannelParams::<f64>::default();
    for _ in 0..200 {
        let layout = common::random_layout(&mut rng, 10);
        let requests = common::random_requests(&mut rng, 10, 8);
        let demand = ChannelLinks {
            layout: &layout,
            params: &params,
        };
        let config = SchedulerConfig {
            budget_slots: 100_000,
            model: InterferenceModel::DualSector,
            admission: Admission::Probabilistic { per_member: 1.0 },
        };
        let s = build_schedule_with(&requests, &layout, &demand, &config, &mut rng).unwrap();
        assert!(s.groups.iter().all(|g| g.len() == 1));
        assert_eq!(s.scheduled() + s.rejected.len() + s.deferred.len(), requests.len());
    }
}

//! Per-window plan generation and selection.

mod candidates;
mod partition;
mod route;

pub use candidates::{enumerate_combinations, top_delayed_candidates, Candidate, Coverage, FlightRange};
pub use partition::{select_plans, PartitionInstance, PlanOption, Selection};
pub use route::{cost_plan, greedy_route, Plan};

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::model::{DroneSpec, EnvironmentConstants, RequestId};
use crate::segmentation::ServiceMap;

use candidates::{combination_masks, mask_members};
use route::route_and_cost;

/// Every feasible plan for one drone: each payload-feasible combination of
/// its top candidates, routed to each legal end depot. Always contains a
/// customer-free plan.
pub fn generate_plans(
    drone: usize,
    map: &ServiceMap,
    range: &FlightRange,
    pending: &[Candidate],
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    max_parcels: usize,
) -> Result<(Vec<Candidate>, Vec<Plan>)> {
    let start = range.start_area;
    let cands = top_delayed_candidates(pending, range, map.depot(start), max_parcels);
    let mut plans = Vec::new();
    for mask in combination_masks(&cands, spec.max_payload, max_parcels) {
        let members = mask_members(mask, cands.len());
        for &end in &range.end_areas {
            if let Some(p) = route_and_cost(drone, map, start, end, &cands, &members, spec, consts, range.range_cap)? {
                plans.push(p);
            }
        }
    }
    if !plans.iter().any(|p| p.customers.is_empty()) {
        plans.push(Plan::idle(drone, start));
    }
    Ok((cands, plans))
}

#[derive(Debug, Clone)]
pub struct WindowPlan {
    /// Selected plan per drone.
    pub plans: Vec<Plan>,
    /// Customers that had to be covered after reductions.
    pub universe: Vec<RequestId>,
    /// Candidates removed from the universe to restore feasibility.
    pub dropped: Vec<RequestId>,
    /// Number of plans costed across all drones.
    pub plans_considered: usize,
}

/// Plans one window for all drones. When exact coverage of the candidate
/// union is impossible, the least delayed offending customer is removed and
/// the selection repeated.
pub fn plan_window(
    map: &ServiceMap,
    ranges: &[FlightRange],
    pending: &[Candidate],
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    max_parcels: usize,
) -> Result<WindowPlan> {
    let mut per_drone = Vec::with_capacity(ranges.len());
    let mut universe = BTreeSet::new();
    let mut plans_considered = 0;
    for (u, range) in ranges.iter().enumerate() {
        let (cands, plans) = generate_plans(u, map, range, pending, spec, consts, max_parcels)?;
        universe.extend(cands.iter().map(|c| c.id));
        plans_considered += plans.len();
        per_drone.push(plans);
    }
    let delay_of = |id: RequestId| {
        pending
            .iter()
            .find(|c| c.id == id)
            .map(|c| c.delay_hours)
            .unwrap_or(0.0)
    };

    let mut dropped = Vec::new();
    loop {
        let inst = PartitionInstance {
            universe: universe.iter().copied().collect(),
            plans: per_drone
                .iter()
                .map(|l| l.iter().map(|p| PlanOption::new(p.customers.clone(), p.energy)).collect())
                .collect(),
        };
        match select_plans(&inst) {
            Ok(sel) => {
                let plans = sel
                    .choice
                    .iter()
                    .enumerate()
                    .map(|(u, &k)| per_drone[u][k].clone())
                    .collect();
                return Ok(WindowPlan {
                    plans,
                    universe: inst.universe,
                    dropped,
                    plans_considered,
                });
            }
            Err(Error::Infeasible { uncoverable, conflicted }) => {
                let pool = if uncoverable.is_empty() { conflicted } else { uncoverable };
                let victim = pool
                    .iter()
                    .copied()
                    .min_by(|&a, &b| delay_of(a).total_cmp(&delay_of(b)).then(b.cmp(&a)))
                    .ok_or_else(|| Error::Policy("infeasible window with nothing to drop".into()))?;
                universe.remove(&victim);
                dropped.push(victim);
                for list in &mut per_drone {
                    list.retain(|p| !p.customers.contains(&victim));
                }
            }
            Err(e) => return Err(e),
        }
    }
}

/// Plan-choice action space: slot `m` is the bitmask `m` over the drone's top
/// candidates from its own and neighbouring areas, routed to whichever of
/// those depots is cheapest. `None` marks an infeasible slot.
#[allow(clippy::too_many_arguments)]
pub fn plan_slots(
    drone: usize,
    map: &ServiceMap,
    start_area: usize,
    pending: &[Candidate],
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    max_parcels: usize,
    range_cap: f64,
) -> Result<(Vec<Candidate>, Vec<Option<Plan>>)> {
    let mut areas = vec![start_area];
    areas.extend(map.neighbors[start_area].iter().copied());
    let range = FlightRange {
        start_area,
        coverage: Coverage::Areas(areas.clone()),
        end_areas: areas,
        range_cap,
    };
    let cands = top_delayed_candidates(pending, &range, map.depot(start_area), max_parcels);
    let feasible: BTreeSet<u32> = combination_masks(&cands, spec.max_payload, max_parcels).into_iter().collect();
    let mut slots = vec![None; 1usize << max_parcels];
    slots[0] = Some(Plan::idle(drone, start_area));
    for mask in 1u32..(1u32 << cands.len()) {
        if !feasible.contains(&mask) {
            continue;
        }
        let members = mask_members(mask, cands.len());
        let mut best: Option<Plan> = None;
        for &end in &range.end_areas {
            if let Some(p) = route_and_cost(drone, map, start_area, end, &cands, &members, spec, consts, range_cap)? {
                if best.as_ref().is_none_or(|b| p.energy < b.energy) {
                    best = Some(p);
                }
            }
        }
        slots[mask as usize] = best;
    }
    Ok((cands, slots))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Bounds, Point2D};
    use crate::segmentation::grid_segment;

    fn setup() -> (ServiceMap, DroneSpec, EnvironmentConstants) {
        let map = grid_segment(Bounds::default(), 16).unwrap().with_neighbors(3).unwrap();
        (map, DroneSpec::default(), EnvironmentConstants::default())
    }

    fn cand(map: &ServiceMap, id: u64, x: f64, y: f64, mass: f64, delay: f64) -> Candidate {
        let location = Point2D::new(x, y);
        Candidate {
            id,
            location,
            parcel_mass: mass,
            delay_hours: delay,
            area: map.area_of(location),
        }
    }

    #[test]
    fn idle_when_nothing_pending() {
        let (map, spec, c) = setup();
        let ranges: Vec<_> = (0..3).map(|u| FlightRange::for_action(&map, u, 0, 3000.0).unwrap()).collect();
        let wp = plan_window(&map, &ranges, &[], &spec, &c, 4).unwrap();
        assert!(wp.plans.iter().all(|p| p.is_idle() && p.energy == 0.0));
    }

    #[test]
    fn overlapping_drones_are_disjoint() {
        let (map, spec, c) = setup();
        let pending: Vec<_> = (0..6)
            .map(|i| cand(&map, i + 1, 1000.0 + 150.0 * i as f64, 1200.0, 0.5, i as f64 * 0.5))
            .collect();
        let ranges: Vec<_> = (0..2).map(|_| FlightRange::for_action(&map, 0, 0, 3000.0).unwrap()).collect();
        let wp = plan_window(&map, &ranges, &pending, &spec, &c, 4).unwrap();
        let mut served: Vec<_> = wp.plans.iter().flat_map(|p| p.customers.clone()).collect();
        let n = served.len();
        served.sort_unstable();
        served.dedup();
        assert_eq!(served.len(), n);
        let universe: BTreeSet<_> = wp.universe.iter().copied().collect();
        assert_eq!(served.into_iter().collect::<BTreeSet<_>>(), universe);
    }

    #[test]
    fn heavy_set_reduced_to_min_energy_cover() {
        let (map, spec, c) = setup();
        // three 1 kg parcels, only two fit
        let pending = vec![
            cand(&map, 1, 1300.0, 1250.0, 1.0, 2.0),
            cand(&map, 2, 1250.0, 1400.0, 1.0, 1.0),
            cand(&map, 3, 1200.0, 1250.0, 1.0, 0.5),
        ];
        let ranges = vec![FlightRange::for_action(&map, 0, 0, 3000.0).unwrap()];
        let wp = plan_window(&map, &ranges, &pending, &spec, &c, 4).unwrap();
        assert_eq!(wp.dropped, vec![3]);
        let mut got = wp.plans[0].customers.clone();
        got.sort_unstable();
        assert_eq!(got, vec![1, 2]);
        // exhaustive: among plans covering {1, 2} exactly, the chosen is cheapest
        let (_, all) = generate_plans(0, &map, &ranges[0], &pending, &spec, &c, 4).unwrap();
        let best = all
            .iter()
            .filter(|p| {
                let mut s = p.customers.clone();
                s.sort_unstable();
                s == vec![1, 2]
            })
            .map(|p| p.energy)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(wp.plans[0].energy, best);
    }

    #[test]
    fn global_pool_is_superset() {
        let (map, spec, c) = setup();
        let pending: Vec<_> = (0..20)
            .map(|i| cand(&map, i + 1, 400.0 * i as f64 + 100.0, 300.0 * (i % 7) as f64 + 100.0, 0.3, (i % 3) as f64))
            .collect();
        let start = map.area_of(Point2D::new(100.0, 100.0));
        let global = FlightRange::global(&map, start);
        let local = FlightRange::for_action(&map, start, 0, 3000.0).unwrap();
        let g: BTreeSet<_> = pending.iter().filter(|x| global.covers(x.area)).map(|x| x.id).collect();
        let l: BTreeSet<_> = pending.iter().filter(|x| local.covers(x.area)).map(|x| x.id).collect();
        assert!(l.is_subset(&g));
        let (_, gp) = generate_plans(0, &map, &global, &pending, &spec, &c, 4).unwrap();
        let (_, lp) = generate_plans(0, &map, &local, &pending, &spec, &c, 4).unwrap();
        assert!(gp.len() > lp.len());
    }

    #[test]
    fn slots_mask_infeasible() {
        let (map, spec, c) = setup();
        let pending = vec![
            cand(&map, 1, 1300.0, 1250.0, 2.0, 1.0),
            cand(&map, 2, 1250.0, 1400.0, 1.0, 1.0),
        ];
        let (cands, slots) = plan_slots(0, &map, 0, &pending, &spec, &c, 4, 3000.0).unwrap();
        assert_eq!(cands.len(), 2);
        assert_eq!(slots.len(), 16);
        assert!(slots[0].is_some() && slots[1].is_some() && slots[2].is_some());
        assert!(slots[3].is_none());
        assert!(slots[4..].iter().all(|s| s.is_none()));
    }
}

use serde::{Deserialize, Serialize};

use super::Candidate;
use crate::energy;
use crate::error::Result;
use crate::model::{DroneSpec, EnvironmentConstants, Point2D, RequestId};
use crate::segmentation::ServiceMap;

const LENGTH_SLACK: f64 = 1e-9;

/// One drone's route for a window: depot, customers in visiting order,
/// depot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Plan {
    pub drone: usize,
    pub customers: Vec<RequestId>,
    pub start_depot: usize,
    pub end_depot: usize,
    pub path_length: f64,
    pub energy: f64,
    pub parcel_mass: f64,
}

impl Plan {
    /// Stay at the depot for the window.
    pub fn idle(drone: usize, depot: usize) -> Self {
        Plan {
            drone,
            customers: Vec::new(),
            start_depot: depot,
            end_depot: depot,
            path_length: 0.0,
            energy: 0.0,
            parcel_mass: 0.0,
        }
    }

    pub fn is_idle(&self) -> bool {
        self.customers.is_empty() && self.start_depot == self.end_depot
    }

    pub fn node_string(&self) -> String {
        let mut parts = vec![format!("D{}", self.start_depot)];
        parts.extend(self.customers.iter().map(|c| c.to_string()));
        parts.push(format!("D{}", self.end_depot));
        parts.join(">")
    }
}

/// Nearest-neighbour ordering of `stops` from `start`, finishing at `end`.
/// Returns the visiting order (indices into `stops`) and the path length.
pub fn greedy_route(start: Point2D, stops: &[Point2D], end: Point2D) -> (Vec<usize>, f64) {
    let mut left: Vec<usize> = (0..stops.len()).collect();
    let mut order = Vec::with_capacity(stops.len());
    let mut here = start;
    let mut length = 0.0;
    while !left.is_empty() {
        let (slot, dist) = left
            .iter()
            .enumerate()
            .map(|(slot, &i)| (slot, here.distance(&stops[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("non-empty");
        let next = left.remove(slot);
        length += dist;
        here = stops[next];
        order.push(next);
    }
    length += here.distance(&end);
    (order, length)
}

/// Costs an ordered route. `None` when the path exceeds `range_cap`.
#[allow(clippy::too_many_arguments)]
pub fn cost_plan(
    drone: usize,
    map: &ServiceMap,
    start_depot: usize,
    end_depot: usize,
    ordered: &[&Candidate],
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    range_cap: f64,
) -> Result<Option<Plan>> {
    let start = map.depot(start_depot);
    let end = map.depot(end_depot);
    let mut stops = Vec::with_capacity(ordered.len() + 2);
    stops.push((start, 0.0));
    stops.extend(ordered.iter().map(|c| (c.location, c.parcel_mass)));
    stops.push((end, 0.0));
    let path_length: f64 = stops.windows(2).map(|w| w[0].0.distance(&w[1].0)).sum();
    if path_length > range_cap + LENGTH_SLACK {
        return Ok(None);
    }
    let parcel_mass: f64 = ordered.iter().map(|c| c.parcel_mass).sum();
    if parcel_mass > spec.max_payload + LENGTH_SLACK {
        return Ok(None);
    }
    let energy = energy::route_energy(spec, consts, &stops)?;
    let plan = Plan {
        drone,
        customers: ordered.iter().map(|c| c.id).collect(),
        start_depot,
        end_depot,
        path_length,
        energy,
        parcel_mass,
    };
    debug_assert!({
        let mut ids = plan.customers.clone();
        ids.sort_unstable();
        ids.windows(2).all(|w| w[0] != w[1])
    });
    Ok(Some(plan))
}

/// Greedy-routes `members` of `candidates` toward `end_depot` and costs it.
#[allow(clippy::too_many_arguments)]
pub(crate) fn route_and_cost(
    drone: usize,
    map: &ServiceMap,
    start_depot: usize,
    end_depot: usize,
    candidates: &[Candidate],
    members: &[usize],
    spec: &DroneSpec,
    consts: &EnvironmentConstants,
    range_cap: f64,
) -> Result<Option<Plan>> {
    let pts: Vec<Point2D> = members.iter().map(|&i| candidates[i].location).collect();
    let (order, _) = greedy_route(map.depot(start_depot), &pts, map.depot(end_depot));
    let ordered: Vec<&Candidate> = order.iter().map(|&k| &candidates[members[k]]).collect();
    cost_plan(drone, map, start_depot, end_depot, &ordered, spec, consts, range_cap)
}

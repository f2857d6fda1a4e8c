use serde::{Deserialize, Serialize};

use crate::model::{Point2D, RequestId};
use crate::segmentation::ServiceMap;

/// A pending request as the planner sees it in the current window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub id: RequestId,
    pub location: Point2D,
    pub parcel_mass: f64,
    pub delay_hours: f64,
    pub area: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Coverage {
    Areas(Vec<usize>),
    Everywhere,
}

/// Where a drone may search this window and where it may land.
#[derive(Debug, Clone, PartialEq)]
pub struct FlightRange {
    pub start_area: usize,
    pub coverage: Coverage,
    pub end_areas: Vec<usize>,
    /// Path-length cap in meters.
    pub range_cap: f64,
}

impl FlightRange {
    /// Range fixed by a flight-range action: the start and destination
    /// areas, landing at the destination depot.
    pub fn for_action(map: &ServiceMap, start_area: usize, action: usize, range_cap: f64) -> Option<Self> {
        let dest = map.action_target(start_area, action)?;
        let mut areas = vec![start_area];
        if dest != start_area {
            areas.push(dest);
        }
        Some(FlightRange {
            start_area,
            coverage: Coverage::Areas(areas),
            end_areas: vec![dest],
            range_cap,
        })
    }

    /// The whole map, any depot as destination, no path cap.
    pub fn global(map: &ServiceMap, start_area: usize) -> Self {
        FlightRange {
            start_area,
            coverage: Coverage::Everywhere,
            end_areas: (0..map.len()).collect(),
            range_cap: f64::INFINITY,
        }
    }

    pub fn covers(&self, area: usize) -> bool {
        match &self.coverage {
            Coverage::Everywhere => true,
            Coverage::Areas(a) => a.contains(&area),
        }
    }
}

/// Up to `max_parcels` pending requests inside the range, most delayed
/// first; ties go to the request nearer the start depot, then lower id.
pub fn top_delayed_candidates(
    pending: &[Candidate],
    range: &FlightRange,
    start_depot: Point2D,
    max_parcels: usize,
) -> Vec<Candidate> {
    let mut inside: Vec<(f64, &Candidate)> = pending
        .iter()
        .filter(|c| range.covers(c.area))
        .map(|c| (c.location.distance(&start_depot), c))
        .collect();
    inside.sort_by(|a, b| {
        b.1.delay_hours
            .total_cmp(&a.1.delay_hours)
            .then(a.0.total_cmp(&b.0))
            .then(a.1.id.cmp(&b.1.id))
    });
    inside.into_iter().take(max_parcels).map(|(_, c)| c.clone()).collect()
}

/// All subsets of at most `max_parcels` candidates whose parcels fit the
/// payload, as index lists in increasing bitmask order. The first entry is
/// always the empty (idle) subset.
pub fn enumerate_combinations(candidates: &[Candidate], max_payload: f64, max_parcels: usize) -> Vec<Vec<usize>> {
    combination_masks(candidates, max_payload, max_parcels)
        .into_iter()
        .map(|mask| mask_members(mask, candidates.len()))
        .collect()
}

pub(crate) fn combination_masks(candidates: &[Candidate], max_payload: f64, max_parcels: usize) -> Vec<u32> {
    let n = candidates.len();
    assert!(n <= 20, "too many candidates to enumerate ({n})");
    (0u32..(1u32 << n))
        .filter(|&mask| {
            if mask.count_ones() as usize > max_parcels {
                return false;
            }
            let mass: f64 = mask_members(mask, n).iter().map(|&i| candidates[i].parcel_mass).sum();
            mass <= max_payload + 1e-9
        })
        .collect()
}

pub(crate) fn mask_members(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(id: u64, x: f64, delay: f64, mass: f64) -> Candidate {
        Candidate {
            id,
            location: Point2D::new(x, 0.0),
            parcel_mass: mass,
            delay_hours: delay,
            area: 0,
        }
    }

    fn everywhere() -> FlightRange {
        FlightRange {
            start_area: 0,
            coverage: Coverage::Everywhere,
            end_areas: vec![0],
            range_cap: f64::INFINITY,
        }
    }

    #[test]
    fn top_k_by_delay() {
        let pending: Vec<_> = [3.0, 2.0, 2.0, 1.0, 0.0]
            .iter()
            .enumerate()
            .map(|(i, &d)| cand(i as u64 + 1, 10.0 * i as f64, d, 0.5))
            .collect();
        let top = top_delayed_candidates(&pending, &everywhere(), Point2D::new(0.0, 0.0), 3);
        let delays: Vec<f64> = top.iter().map(|c| c.delay_hours).collect();
        assert_eq!(delays, vec![3.0, 2.0, 2.0]);
    }

    #[test]
    fn empty_range_gives_nothing() {
        let pending = vec![cand(1, 0.0, 1.0, 0.5)];
        let range = FlightRange {
            coverage: Coverage::Areas(vec![3]),
            ..everywhere()
        };
        assert!(top_delayed_candidates(&pending, &range, Point2D::new(0.0, 0.0), 4).is_empty());
    }

    #[test]
    fn tie_broken_by_id() {
        let pending = vec![cand(9, 5.0, 1.0, 0.5), cand(4, 5.0, 1.0, 0.5)];
        let top = top_delayed_candidates(&pending, &everywhere(), Point2D::new(0.0, 0.0), 1);
        assert_eq!(top[0].id, 4);
    }

    #[test]
    fn combinations_under_payload() {
        let c: Vec<_> = (1..=3).map(|i| cand(i, 0.0, 0.0, 1.0)).collect();
        let combos = enumerate_combinations(&c, 2.5, 4);
        assert_eq!(combos[0], Vec::<usize>::new());
        assert_eq!(combos.len() - 1, 6);
        assert!(combos.iter().all(|s| s.len() <= 2));
    }

    #[test]
    fn heavy_candidate_excluded() {
        let c = vec![cand(1, 0.0, 0.0, 3.0), cand(2, 0.0, 0.0, 1.0)];
        let combos = enumerate_combinations(&c, 2.5, 4);
        assert!(combos.iter().all(|s| !s.contains(&0)));
        assert_eq!(combos.len(), 2);
        assert_eq!(enumerate_combinations(&[], 2.5, 4), vec![Vec::<usize>::new()]);
    }
}

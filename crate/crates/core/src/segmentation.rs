//! Service areas and depots.
//!
//! Areas are Voronoi cells of the depot set, so a point belongs to the area
//! of its nearest depot (ties go to the lowest index). Depots come either
//! from K-means over historical demand or from a square grid.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Bounds, Point2D};

pub const KMEANS_MAX_ITERS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MapKind {
    Kmeans,
    Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ServiceMap {
    pub kind: MapKind,
    pub bounds: Bounds,
    pub depots: Vec<Point2D>,
    /// Symmetric, irreflexive adjacency lists (sorted).
    pub adjacency: Vec<Vec<usize>>,
    /// Per area, the nearest other areas ordered by depot distance. Action
    /// `j >= 1` targets `neighbors[area][j - 1]`; action 0 stays.
    pub neighbors: Vec<Vec<usize>>,
}

impl ServiceMap {
    pub fn from_depots(kind: MapKind, bounds: Bounds, depots: Vec<Point2D>) -> Result<Self> {
        if depots.is_empty() {
            return Err(Error::Segmentation("at least one depot required".into()));
        }
        let n = depots.len();
        Ok(ServiceMap {
            kind,
            bounds,
            depots,
            adjacency: vec![Vec::new(); n],
            neighbors: vec![Vec::new(); n],
        })
    }

    pub fn len(&self) -> usize {
        self.depots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.depots.is_empty()
    }

    /// Index of the nearest depot, lowest index on ties.
    pub fn area_of(&self, p: Point2D) -> usize {
        nearest(&self.depots, p)
    }

    pub fn depot(&self, area: usize) -> Point2D {
        self.depots[area]
    }

    /// Builds the k-nearest neighbour lists and their symmetric closure.
    pub fn with_neighbors(mut self, k_neighbors: usize) -> Result<Self> {
        let (neighbors, adjacency) = area_adjacency(&self.depots, k_neighbors)?;
        self.neighbors = neighbors;
        self.adjacency = adjacency;
        Ok(self)
    }

    /// Destination area for a flight-range action taken from `area`.
    pub fn action_target(&self, area: usize, action: usize) -> Option<usize> {
        match action {
            0 => Some(area),
            j => self.neighbors[area].get(j - 1).copied(),
        }
    }

    pub fn write_json(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

fn nearest(centers: &[Point2D], p: Point2D) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centers.iter().enumerate() {
        let d = (c.x - p.x).powi(2) + (c.y - p.y).powi(2);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

/// Per-area `k` nearest depots plus the symmetrized adjacency relation.
pub fn area_adjacency(
    depots: &[Point2D],
    k_neighbors: usize,
) -> Result<(Vec<Vec<usize>>, Vec<Vec<usize>>)> {
    let n = depots.len();
    if k_neighbors >= n.max(1) && !(n == 1 && k_neighbors == 0) {
        return Err(Error::Segmentation(format!(
            "k_neighbors {k_neighbors} must be below the area count {n}"
        )));
    }
    let mut neighbors = Vec::with_capacity(n);
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| {
            let da = depots[i].distance(&depots[a]);
            let db = depots[i].distance(&depots[b]);
            da.total_cmp(&db).then(a.cmp(&b))
        });
        others.truncate(k_neighbors);
        for &j in &others {
            adjacency[i].push(j);
            adjacency[j].push(i);
        }
        neighbors.push(others);
    }
    for list in &mut adjacency {
        list.sort_unstable();
        list.dedup();
    }
    Ok((neighbors, adjacency))
}

#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub centers: Vec<Point2D>,
    pub labels: Vec<usize>,
    pub iterations: usize,
    /// Within-cluster sum of squares after every assignment step.
    pub objective_history: Vec<f64>,
    pub converged: bool,
}

fn sse(points: &[Point2D], centers: &[Point2D], labels: &[usize]) -> f64 {
    points
        .iter()
        .zip(labels)
        .map(|(p, &l)| (p.x - centers[l].x).powi(2) + (p.y - centers[l].y).powi(2))
        .sum()
}

/// Plain Lloyd iteration seeded with `n` distinct data points chosen at
/// random, stopped once the assignment no longer changes.
pub fn kmeans(points: &[Point2D], n: usize, seed: u64) -> Result<KMeansFit> {
    if points.is_empty() {
        return Err(Error::Segmentation("no points to cluster".into()));
    }
    if n == 0 {
        return Err(Error::Segmentation("need at least one cluster".into()));
    }
    let mut distinct: Vec<Point2D> = Vec::with_capacity(n);
    for p in points {
        if !p.is_finite() {
            return Err(Error::Segmentation("non-finite point".into()));
        }
        if distinct.len() < n && !distinct.contains(p) {
            distinct.push(*p);
        }
    }
    if distinct.len() < n {
        return Err(Error::Segmentation(format!(
            "{n} clusters requested but only {} distinct points",
            distinct.len()
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centers: Vec<Point2D> = Vec::with_capacity(n);
    // sample indices until n distinct locations are found
    let order = rand::seq::index::sample(&mut rng, points.len(), points.len());
    for i in order.iter() {
        if !centers.contains(&points[i]) {
            centers.push(points[i]);
            if centers.len() == n {
                break;
            }
        }
    }

    let mut labels: Vec<usize> = points.iter().map(|p| nearest(&centers, *p)).collect();
    let mut history = vec![sse(points, &centers, &labels)];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < KMEANS_MAX_ITERS {
        iterations += 1;
        update_centers(points, &labels, &mut centers);
        let next: Vec<usize> = points.iter().map(|p| nearest(&centers, *p)).collect();
        let obj = sse(points, &centers, &next);
        let prev = *history.last().expect("history seeded");
        assert!(
            obj <= prev * (1.0 + 1e-12) + 1e-9,
            "k-means objective increased: {prev} -> {obj}"
        );
        history.push(obj);
        if next == labels {
            converged = true;
            break;
        }
        labels = next;
    }
    Ok(KMeansFit {
        centers,
        labels,
        iterations,
        objective_history: history,
        converged,
    })
}

fn update_centers(points: &[Point2D], labels: &[usize], centers: &mut [Point2D]) {
    let k = centers.len();
    let mut sum = vec![(0.0, 0.0); k];
    let mut count = vec![0usize; k];
    for (p, &l) in points.iter().zip(labels) {
        sum[l].0 += p.x;
        sum[l].1 += p.y;
        count[l] += 1;
    }
    let mut taken: Vec<usize> = Vec::new();
    for c in 0..k {
        if count[c] > 0 {
            centers[c] = Point2D::new(sum[c].0 / count[c] as f64, sum[c].1 / count[c] as f64);
        }
    }
    for c in 0..k {
        if count[c] == 0 {
            // empty cluster: move it onto the point worst served by its center
            let far = points
                .iter()
                .enumerate()
                .filter(|(i, _)| !taken.contains(i))
                .map(|(i, p)| (i, p.distance(&centers[labels[i]])))
                .max_by(|a, b| a.1.total_cmp(&b.1).then(b.0.cmp(&a.0)))
                .map(|(i, _)| i)
                .expect("points non-empty");
            taken.push(far);
            centers[c] = points[far];
        }
    }
}

/// K-means service map over historical customer locations.
pub fn kmeans_segment(points: &[Point2D], n: usize, seed: u64, bounds: Bounds) -> Result<ServiceMap> {
    let fit = kmeans(points, n, seed)?;
    ServiceMap::from_depots(MapKind::Kmeans, bounds, fit.centers)
}

/// `sqrt(n) x sqrt(n)` equal cells, depots at cell centres, numbered
/// row-major from the `(0, 0)` corner.
pub fn grid_segment(bounds: Bounds, n: usize) -> Result<ServiceMap> {
    let side = (n as f64).sqrt().round() as usize;
    if n == 0 || side * side != n {
        return Err(Error::Segmentation(format!("{n} is not a perfect square")));
    }
    let cw = bounds.width / side as f64;
    let ch = bounds.height / side as f64;
    let mut depots = Vec::with_capacity(n);
    for row in 0..side {
        for col in 0..side {
            depots.push(Point2D::new((col as f64 + 0.5) * cw, (row as f64 + 0.5) * ch));
        }
    }
    ServiceMap::from_depots(MapKind::Grid, bounds, depots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cluster_is_mean() {
        let pts = vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(4.0, 0.0),
            Point2D::new(2.0, 6.0),
        ];
        let map = kmeans_segment(&pts, 1, 3, Bounds::default()).unwrap();
        assert!((map.depots[0].x - 2.0).abs() < 1e-9);
        assert!((map.depots[0].y - 2.0).abs() < 1e-9);
    }

    #[test]
    fn errors() {
        assert!(kmeans(&[], 1, 0).is_err());
        let pts = vec![Point2D::new(1.0, 1.0); 5];
        assert!(kmeans(&pts, 2, 0).is_err());
        assert!(grid_segment(Bounds::default(), 5).is_err());
    }

    #[test]
    fn grid_centres() {
        let map = grid_segment(Bounds::default(), 4).unwrap();
        let want = [(2500.0, 2500.0), (7500.0, 2500.0), (2500.0, 7500.0), (7500.0, 7500.0)];
        for (d, w) in map.depots.iter().zip(want) {
            assert_eq!((d.x, d.y), w);
        }
        assert_eq!(map.area_of(Point2D::new(0.0, 0.0)), 0);
        assert_eq!(map.area_of(Point2D::new(10_000.0, 10_000.0)), 3);
    }

    #[test]
    fn adjacency_examples() {
        let map = grid_segment(Bounds::default(), 4).unwrap().with_neighbors(3).unwrap();
        for i in 0..4 {
            let others: Vec<usize> = (0..4).filter(|&j| j != i).collect();
            assert_eq!(map.adjacency[i], others);
        }
        let line = vec![
            Point2D::new(0.0, 0.0),
            Point2D::new(1.0, 0.0),
            Point2D::new(2.0, 0.0),
        ];
        let (_, adj) = area_adjacency(&line, 1).unwrap();
        assert_eq!(adj[1], vec![0, 2]);
        assert!(area_adjacency(&line, 3).is_err());
    }

    #[test]
    fn action_targets() {
        let map = grid_segment(Bounds::default(), 16).unwrap().with_neighbors(3).unwrap();
        assert_eq!(map.action_target(5, 0), Some(5));
        for a in 1..=3 {
            let t = map.action_target(5, a).unwrap();
            assert_ne!(t, 5);
            assert!(map.adjacency[5].contains(&t));
        }
        assert_eq!(map.action_target(5, 4), None);
    }
}

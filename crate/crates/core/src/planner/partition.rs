//! Exact plan selection: one plan per drone, universe customers covered
//! exactly once, minimum total cost.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::RequestId;

const NODE_BUDGET: u64 = 50_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanOption {
    pub customers: Vec<RequestId>,
    pub cost: f64,
}

impl PlanOption {
    pub fn new(customers: Vec<RequestId>, cost: f64) -> Self {
        PlanOption { customers, cost }
    }
}

/// Per-drone plan lists plus the customers that must be covered. Customers
/// outside the universe may appear in plans; they are then optional but
/// still served at most once.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PartitionInstance {
    pub universe: Vec<RequestId>,
    pub plans: Vec<Vec<PlanOption>>,
}

/// Chosen plan index per drone and the total cost summed in drone order.
#[derive(Debug, Clone, PartialEq)]
pub struct Selection {
    pub choice: Vec<usize>,
    pub cost: f64,
}

impl PartitionInstance {
    pub fn num_drones(&self) -> usize {
        self.plans.len()
    }

    /// Cost of a full assignment, or `None` if it breaks a constraint.
    pub fn evaluate(&self, choice: &[usize]) -> Option<f64> {
        if choice.len() != self.plans.len() {
            return None;
        }
        let mut seen = BTreeSet::new();
        let mut cost = 0.0;
        for (u, &k) in choice.iter().enumerate() {
            let plan = self.plans[u].get(k)?;
            for c in &plan.customers {
                if !seen.insert(*c) {
                    return None;
                }
            }
            cost += plan.cost;
        }
        if self.universe.iter().all(|c| seen.contains(c)) {
            Some(cost)
        } else {
            None
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("drones {}\nuniverse", self.plans.len());
        for c in &self.universe {
            let _ = write!(out, " {c}");
        }
        out.push('\n');
        for (u, list) in self.plans.iter().enumerate() {
            for p in list {
                let ids = if p.customers.is_empty() {
                    "-".to_string()
                } else {
                    p.customers.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
                };
                let _ = writeln!(out, "plan {u} {:?} {ids}", p.cost);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, msg: &str| Error::Parse(format!("line {line}: {msg}"));
        let mut inst = PartitionInstance::default();
        let mut have_drones = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let mut parts = raw.split_whitespace();
            match parts.next() {
                None => continue,
                Some(s) if s.starts_with('#') => continue,
                Some("drones") => {
                    let n: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(line, "expected drone count"))?;
                    inst.plans = vec![Vec::new(); n];
                    have_drones = true;
                }
                Some("universe") => {
                    for s in parts {
                        inst.universe.push(s.parse().map_err(|_| bad(line, "bad customer id"))?);
                    }
                }
                Some("plan") => {
                    if !have_drones {
                        return Err(bad(line, "plan before drones line"));
                    }
                    let u: usize = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(line, "bad drone index"))?;
                    let cost: f64 = parts
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(line, "bad cost"))?;
                    let ids = parts.next().ok_or_else(|| bad(line, "missing customer list"))?;
                    let customers = if ids == "-" {
                        Vec::new()
                    } else {
                        ids.split(',')
                            .map(|s| s.parse().map_err(|_| bad(line, "bad customer id")))
                            .collect::<Result<Vec<_>>>()?
                    };
                    let slot = inst.plans.get_mut(u).ok_or_else(|| bad(line, "drone out of range"))?;
                    slot.push(PlanOption::new(customers, cost));
                }
                Some(other) => return Err(bad(line, &format!("unknown record `{other}`"))),
            }
        }
        Ok(inst)
    }
}

struct Compact {
    /// Per drone: (original index, mask, cost), after dominance reduction.
    plans: Vec<Vec<(usize, u128, f64)>>,
    required: u128,
    ids: Vec<RequestId>,
}

fn compact(inst: &PartitionInstance) -> Result<Compact> {
    let mut ids: BTreeSet<RequestId> = inst.universe.iter().copied().collect();
    for list in &inst.plans {
        for p in list {
            ids.extend(p.customers.iter().copied());
        }
    }
    if ids.len() > 128 {
        return Err(Error::TooLarge(format!("{} distinct customers (max 128)", ids.len())));
    }
    let ids: Vec<RequestId> = ids.into_iter().collect();
    let bit = |c: &RequestId| 1u128 << ids.binary_search(c).expect("indexed");
    let required = inst.universe.iter().fold(0u128, |m, c| m | bit(c));

    let mut plans = Vec::with_capacity(inst.plans.len());
    for list in &inst.plans {
        let mut best: BTreeMap<u128, (usize, f64)> = BTreeMap::new();
        for (k, p) in list.iter().enumerate() {
            if !p.cost.is_finite() {
                return Err(Error::Parse(format!("non-finite plan cost {}", p.cost)));
            }
            let mut mask = 0u128;
            let mut repeated = false;
            for c in &p.customers {
                let b = bit(c);
                repeated |= mask & b != 0;
                mask |= b;
            }
            if repeated {
                continue;
            }
            match best.get(&mask) {
                Some(&(_, cost)) if cost <= p.cost => {}
                _ => {
                    best.insert(mask, (k, p.cost));
                }
            }
        }
        let mut kept: Vec<(usize, u128, f64)> = best.into_iter().map(|(m, (k, c))| (k, m, c)).collect();
        kept.sort_by_key(|e| e.0);
        plans.push(kept);
    }
    Ok(Compact { plans, required, ids })
}

fn ids_of(mask: u128, ids: &[RequestId]) -> Vec<RequestId> {
    (0..ids.len()).filter(|&i| mask & (1 << i) != 0).map(|i| ids[i]).collect()
}

struct Search<'a> {
    plans: &'a [Vec<(usize, u128, f64)>],
    required: u128,
    suffix_union: Vec<u128>,
    suffix_min: Vec<f64>,
    stack: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
    nodes: u64,
}

impl Search<'_> {
    fn run(&mut self, depth: usize, used: u128, cost: f64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > NODE_BUDGET {
            return Err(Error::TooLarge("plan selection node budget exhausted".into()));
        }
        if depth == self.plans.len() {
            if used & self.required == self.required
                && self.best.as_ref().is_none_or(|(b, _)| cost < *b)
            {
                self.best = Some((cost, self.stack.clone()));
            }
            return Ok(());
        }
        if self.required & !used & !self.suffix_union[depth] != 0 {
            return Ok(());
        }
        if let Some((b, _)) = &self.best {
            let bound = cost + self.suffix_min[depth];
            if bound - b > 1e-12 * b.abs().max(1.0) {
                return Ok(());
            }
        }
        for (slot, &(_, mask, c)) in self.plans[depth].iter().enumerate() {
            if mask & used != 0 {
                continue;
            }
            self.stack.push(slot);
            self.run(depth + 1, used | mask, cost + c)?;
            self.stack.pop();
        }
        Ok(())
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Minimum-cost selection by depth-first branch and bound. Among optimal
/// assignments the lexicographically smallest vector of plan indices wins.
pub fn select_plans(inst: &PartitionInstance) -> Result<Selection> {
    let mut cp = compact(inst)?;
    let n = cp.plans.len();

    let all_union = cp.plans.iter().flatten().fold(0u128, |m, p| m | p.1);
    let uncoverable = cp.required & !all_union;
    if uncoverable != 0 {
        return Err(Error::Infeasible {
            uncoverable: ids_of(uncoverable, &cp.ids),
            conflicted: Vec::new(),
        });
    }
    if cp.plans.iter().any(|l| l.is_empty()) {
        return Err(Error::Infeasible {
            uncoverable: Vec::new(),
            conflicted: ids_of(cp.required, &cp.ids),
        });
    }

    // A required customer only one drone can reach must be in that drone's plan.
    for u in 0..n {
        let others = (0..n)
            .filter(|&v| v != u)
            .flat_map(|v| cp.plans[v].iter())
            .fold(0u128, |m, p| m | p.1);
        let forced = cp.required & !others;
        if forced == 0 {
            continue;
        }
        cp.plans[u].retain(|p| p.1 & forced == forced);
        if cp.plans[u].is_empty() {
            return Err(Error::Infeasible {
                uncoverable: Vec::new(),
                conflicted: ids_of(forced, &cp.ids),
            });
        }
    }

    // Drones that can share a customer form one component.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut owner: Vec<Option<usize>> = vec![None; cp.ids.len()];
    for (u, list) in cp.plans.iter().enumerate() {
        let reach = list.iter().fold(0u128, |m, p| m | p.1);
        for (i, slot) in owner.iter_mut().enumerate() {
            if reach & (1 << i) == 0 {
                continue;
            }
            match *slot {
                None => *slot = Some(u),
                Some(v) => {
                    let (a, b) = (find(&mut parent, u), find(&mut parent, v));
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for u in 0..n {
        let r = find(&mut parent, u);
        groups.entry(r).or_default().push(u);
    }

    let mut choice = vec![0usize; n];
    for drones in groups.values() {
        let plans: Vec<Vec<(usize, u128, f64)>> = drones.iter().map(|&u| cp.plans[u].clone()).collect();
        let reach = plans.iter().flatten().fold(0u128, |m, p| m | p.1);
        let required = cp.required & reach;
        let mut suffix_union = vec![0u128; plans.len() + 1];
        let mut suffix_min = vec![0.0; plans.len() + 1];
        for d in (0..plans.len()).rev() {
            suffix_union[d] = suffix_union[d + 1] | plans[d].iter().fold(0u128, |m, p| m | p.1);
            let m = plans[d].iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
            suffix_min[d] = suffix_min[d + 1] + m;
        }
        let mut search = Search {
            plans: &plans,
            required,
            suffix_union,
            suffix_min,
            stack: Vec::with_capacity(plans.len()),
            best: None,
            nodes: 0,
        };
        search.run(0, 0, 0.0)?;
        let (_, slots) = search.best.ok_or_else(|| Error::Infeasible {
            uncoverable: Vec::new(),
            conflicted: ids_of(required, &cp.ids),
        })?;
        for (i, &u) in drones.iter().enumerate() {
            choice[u] = plans[i][slots[i]].0;
        }
    }
    let cost = inst.evaluate(&choice).expect("selection satisfies constraints");
    Ok(Selection { choice, cost })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn inst(universe: &[u64], plans: Vec<Vec<(&[u64], f64)>>) -> PartitionInstance {
        PartitionInstance {
            universe: universe.to_vec(),
            plans: plans
                .into_iter()
                .map(|l| l.into_iter().map(|(c, k)| PlanOption::new(c.to_vec(), k)).collect())
                .collect(),
        }
    }

    #[test]
    fn single_drone_argmin() {
        let i = inst(&[1], vec![vec![(&[1], 10.0), (&[1], 7.0)]]);
        let s = select_plans(&i).unwrap();
        assert_eq!(s.choice, vec![1]);
        assert_eq!(s.cost, 7.0);
    }

    #[test]
    fn two_by_two() {
        let i = inst(
            &[1, 2],
            vec![
                vec![(&[], 0.0), (&[1], 3.0), (&[2], 5.0)],
                vec![(&[], 0.0), (&[1], 4.0), (&[2], 1.0)],
            ],
        );
        let s = select_plans(&i).unwrap();
        assert_eq!(s.choice, vec![1, 2]);
        assert_eq!(s.cost, 4.0);
    }

    #[test]
    fn ties_prefer_lower_indices() {
        let i = inst(&[1], vec![vec![(&[], 0.0), (&[1], 2.0)], vec![(&[], 0.0), (&[1], 2.0)]]);
        assert_eq!(select_plans(&i).unwrap().choice, vec![0, 1]);
        let dup = inst(&[], vec![vec![(&[], 1.0), (&[], 1.0)]]);
        assert_eq!(select_plans(&dup).unwrap().choice, vec![0]);
    }

    #[test]
    fn uncoverable_is_reported() {
        let i = inst(&[1, 9], vec![vec![(&[], 0.0), (&[1], 1.0)]]);
        match select_plans(&i) {
            Err(Error::Infeasible { uncoverable, .. }) => assert_eq!(uncoverable, vec![9]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn conflict_is_reported() {
        // both customers reachable, but only together by one drone with no joint plan
        let i = inst(&[1, 2], vec![vec![(&[], 0.0), (&[1], 1.0), (&[2], 1.0)]]);
        match select_plans(&i) {
            Err(Error::Infeasible { uncoverable, conflicted }) => {
                assert!(uncoverable.is_empty());
                assert_eq!(conflicted, vec![1, 2]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn optional_customers_served_at_most_once() {
        let i = inst(
            &[],
            vec![vec![(&[5], 1.0), (&[], 2.0)], vec![(&[5], 1.0), (&[], 3.0)]],
        );
        let s = select_plans(&i).unwrap();
        assert_eq!(s.choice, vec![1, 0]);
        assert_eq!(s.cost, 3.0);
    }

    #[test]
    fn text_round_trip() {
        let i = inst(
            &[3, 4],
            vec![vec![(&[], 0.0), (&[3, 4], 0.1 + 0.2)], vec![(&[4], 1e-300)]],
        );
        let back = PartitionInstance::from_text(&i.to_text()).unwrap();
        assert_eq!(back, i);
        assert!(PartitionInstance::from_text("plan 0 1 -").is_err());
        assert!(PartitionInstance::from_text("drones 1\nplan 0 x -").is_err());
    }
}

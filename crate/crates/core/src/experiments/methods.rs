use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::env::{Controller, Decisions, Environment};
use crate::error::{Error, Result};
use crate::planner::{plan_window, FlightRange};
use crate::segmentation::MapKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum MethodId {
    MarOps,
    OpsGlobal,
    OpsRandom,
    Mappo,
    Squares,
}

impl MethodId {
    pub const ALL: [MethodId; 5] = [
        MethodId::MarOps,
        MethodId::OpsGlobal,
        MethodId::OpsRandom,
        MethodId::Mappo,
        MethodId::Squares,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MethodId::MarOps => "MAR_OPS",
            MethodId::OpsGlobal => "OPS_GLOBAL",
            MethodId::OpsRandom => "OPS_RANDOM",
            MethodId::Mappo => "MAPPO",
            MethodId::Squares => "SQUARES",
        }
    }

    pub fn map_kind(self) -> MapKind {
        match self {
            MethodId::Squares => MapKind::Grid,
            _ => MapKind::Kmeans,
        }
    }

    pub fn is_learned(self) -> bool {
        matches!(self, MethodId::MarOps | MethodId::Mappo | MethodId::Squares)
    }

    /// Whether plans are held to the airframe's rated range.
    pub fn range_capped(self) -> bool {
        self != MethodId::OpsGlobal
    }
}

impl fmt::Display for MethodId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MethodId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_uppercase().replace('-', "_");
        MethodId::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::Config(format!("unknown method `{s}`")))
    }
}

/// Every drone searches the whole map and may land at any depot.
#[derive(Debug, Clone, Default)]
pub struct GlobalController;

impl Controller for GlobalController {
    fn decide(&mut self, env: &Environment<'_>, _rng: &mut ChaCha8Rng) -> Result<Decisions> {
        let clock = Instant::now();
        let n = env.num_drones();
        let ranges: Vec<FlightRange> = (0..n)
            .map(|u| FlightRange::global(env.map, env.drone(u).current_depot))
            .collect();
        let wp = plan_window(
            env.map,
            &ranges,
            &env.candidates(),
            &env.spec,
            &env.consts,
            env.scenario.max_parcels,
        )?;
        Ok(Decisions {
            plans: wp.plans,
            choices: vec![None; n],
            actions: vec![None; n],
            planning_seconds: clock.elapsed().as_secs_f64(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for m in MethodId::ALL {
            assert_eq!(m.name().parse::<MethodId>().unwrap(), m);
            assert_eq!(m.name().to_lowercase().parse::<MethodId>().unwrap(), m);
        }
        assert!("nope".parse::<MethodId>().is_err());
        assert_eq!(serde_json::to_string(&MethodId::OpsGlobal).unwrap(), "\"OPS_GLOBAL\"");
    }

    #[test]
    fn squares_differs_only_in_map() {
        assert_eq!(MethodId::Squares.map_kind(), MapKind::Grid);
        assert_eq!(MethodId::MarOps.map_kind(), MapKind::Kmeans);
        assert_eq!(MethodId::Squares.range_capped(), MethodId::MarOps.range_capped());
        assert_eq!(MethodId::Squares.is_learned(), MethodId::MarOps.is_learned());
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Agent;
use crate::error::{Error, Result};

pub const CHECKPOINT_VERSION: u32 = 1;

/// JSON dump of a trained agent: architectures and flat parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    /// Which controller the agent drives, e.g. `mar_ops` or `mappo`.
    pub method: String,
    pub agent: Agent,
}

impl Checkpoint {
    pub fn new(method: &str, agent: &Agent) -> Self {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            method: method.to_string(),
            agent: agent.clone(),
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cp: Checkpoint = serde_json::from_str(&text)?;
        if cp.version != CHECKPOINT_VERSION {
            return Err(Error::Parse(format!(
                "checkpoint version {} not supported (expected {CHECKPOINT_VERSION})",
                cp.version
            )));
        }
        for net in [&cp.agent.actor, &cp.agent.critic] {
            if net.params.len() != net.arch.param_count() {
                return Err(Error::Dimension {
                    expected: net.arch.param_count(),
                    got: net.params.len(),
                });
            }
        }
        Ok(cp)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub episode: usize,
    pub mean_reward: f64,
    pub mean_delay: f64,
    pub mean_energy: f64,
}

pub fn write_curves(path: impl AsRef<Path>, curves: &[CurvePoint]) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for c in curves {
        w.serialize(c)?;
    }
    w.flush().map_err(|e| Error::io(path, e))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::LearningConfig;

    #[test]
    fn round_trip() {
        let cfg = LearningConfig {
            hidden_size: 4,
            ..Default::default()
        };
        let agent = Agent::new(6, 4, &cfg, 3);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.json");
        Checkpoint::new("mar_ops", &agent).save(&path).unwrap();
        let back = Checkpoint::load(&path).unwrap();
        assert_eq!(back.agent, agent);
        assert_eq!(back.method, "mar_ops");
    }

    #[test]
    fn rejects_other_versions() {
        let cfg = LearningConfig {
            hidden_size: 4,
            ..Default::default()
        };
        let mut cp = Checkpoint::new("mappo", &Agent::new(2, 2, &cfg, 1));
        cp.version = 99;
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("agent.json");
        cp.save(&path).unwrap();
        assert!(Checkpoint::load(&path).is_err());
    }
}

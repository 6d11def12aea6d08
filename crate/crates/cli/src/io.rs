//! Instance and rule files (JSON) and the CSV conventions shared by every
//! artifact this tool writes.
//!
//! Instance format: an object with `resources` (id/value pairs), `agents`
//! (one list of actions per agent, each action a list of resource ids),
//! `basis` (`n` and the values `w(1..n)`), and `rule` (`f(1..n)`). Boundary
//! zeros at indices 0 and n+1 are implicit. Ids may be sparse in the file;
//! they are remapped to dense indices on load, preserving id order.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use gmmc_core::{Allocation, DistributionRule, Error, GameInstance, Result, WelfareBasis};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResourceEntry {
    pub id: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BasisEntry {
    pub n: usize,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleEntry {
    pub f: Vec<f64>,
}

/// On-disk form of a game instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceFile {
    pub resources: Vec<ResourceEntry>,
    pub agents: Vec<Vec<Vec<usize>>>,
    pub basis: BasisEntry,
    pub rule: RuleEntry,
}

impl InstanceFile {
    pub fn from_instance(instance: &GameInstance) -> Self {
        Self {
            resources: instance
                .values()
                .iter()
                .enumerate()
                .map(|(id, &value)| ResourceEntry { id, value })
                .collect(),
            agents: instance.action_sets().to_vec(),
            basis: BasisEntry {
                n: instance.basis().n(),
                w: instance.basis().interior().to_vec(),
            },
            rule: RuleEntry {
                f: instance.rule().interior().to_vec(),
            },
        }
    }

    pub fn to_instance(&self) -> Result<GameInstance> {
        if self.basis.w.len() != self.basis.n {
            return Err(Error::Structural(format!(
                "basis declares n = {} but carries {} values",
                self.basis.n,
                self.basis.w.len()
            )));
        }
        let mut dense: BTreeMap<usize, usize> = BTreeMap::new();
        let mut values = Vec::with_capacity(self.resources.len());
        for r in &self.resources {
            if dense.insert(r.id, values.len()).is_some() {
                return Err(Error::Structural(format!("duplicate resource id {}", r.id)));
            }
            values.push(r.value);
        }
        let agents = self
            .agents
            .iter()
            .enumerate()
            .map(|(i, actions)| {
                actions
                    .iter()
                    .map(|action| {
                        action
                            .iter()
                            .map(|id| {
                                dense.get(id).copied().ok_or_else(|| {
                                    Error::Structural(format!(
                                        "agent {i} references unknown resource id {id}"
                                    ))
                                })
                            })
                            .collect::<Result<Vec<usize>>>()
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        GameInstance::new(
            values,
            agents,
            WelfareBasis::new(self.basis.w.clone())?,
            DistributionRule::new(self.rule.f.clone())?,
        )
    }
}

/// A worst-case certificate on disk: the instance plus the equilibrium and
/// optimal choice vectors.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessFile {
    pub instance: InstanceFile,
    pub equilibrium: Vec<usize>,
    pub optimal: Vec<usize>,
}

impl WitnessFile {
    pub fn new(instance: &GameInstance, equilibrium: &Allocation, optimal: &Allocation) -> Self {
        Self {
            instance: InstanceFile::from_instance(instance),
            equilibrium: equilibrium.choices().to_vec(),
            optimal: optimal.choices().to_vec(),
        }
    }
}

pub fn load_instance(path: &Path) -> std::io::Result<Result<GameInstance>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_instance(&text))
}

pub fn parse_instance(text: &str) -> Result<GameInstance> {
    let file: InstanceFile = serde_json::from_str(text)
        .map_err(|e| Error::Structural(format!("instance JSON: {e}")))?;
    file.to_instance()
}

pub fn save_instance(path: &Path, instance: &GameInstance) -> std::io::Result<()> {
    let file = InstanceFile::from_instance(instance);
    fs::write(path, serde_json::to_string_pretty(&file).expect("serializable"))
}

/// Rule file: `{"f": [...]}` with values `f(1..n)`.
pub fn parse_rule(text: &str) -> Result<DistributionRule> {
    let entry: RuleEntry =
        serde_json::from_str(text).map_err(|e| Error::Structural(format!("rule JSON: {e}")))?;
    DistributionRule::new(entry.f)
}

pub fn load_rule(path: &Path) -> std::io::Result<Result<DistributionRule>> {
    let text = fs::read_to_string(path)?;
    Ok(parse_rule(&text))
}

pub fn save_rule(path: &Path, rule: &DistributionRule) -> std::io::Result<()> {
    let entry = RuleEntry {
        f: rule.interior().to_vec(),
    };
    fs::write(path, serde_json::to_string_pretty(&entry).expect("serializable"))
}

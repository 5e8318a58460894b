//! JSON model documents: the on-disk form of a pointed model.
//!
//! ```json
//! {
//!   "agents": ["a", "b"],
//!   "atoms": ["p"],
//!   "worlds": [{"id": "s", "atoms": ["p"]}, {"id": "t", "atoms": []}],
//!   "relations": {"a": [["s", "t"]], "b": [["s"], ["t"]]},
//!   "actual": "s"
//! }
//! ```
//!
//! Relations are partitions given as block lists. Every document is run
//! through [`validate`] before a model is built from it.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::kripke::{KripkeModel, ModelError, PointedModel, ValidationReport, Violation, WorldId, MAX_ATOMS};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub agents: Vec<String>,
    pub atoms: Vec<String>,
    pub worlds: Vec<WorldDoc>,
    pub relations: BTreeMap<String, Vec<Vec<String>>>,
    pub actual: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorldDoc {
    pub id: String,
    pub atoms: Vec<String>,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("cannot read model file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed model JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Reports every structural problem in a document; ok iff none.
pub fn validate(doc: &ModelDoc) -> ValidationReport {
    let mut violations = Vec::new();

    let mut seen = HashSet::new();
    for agent in &doc.agents {
        if !seen.insert(agent.as_str()) {
            violations.push(Violation::DuplicateAgent { agent: agent.clone() });
        }
    }
    let mut seen = HashSet::new();
    for atom in &doc.atoms {
        if !seen.insert(atom.as_str()) {
            violations.push(Violation::DuplicateAtom { atom: atom.clone() });
        }
    }
    if doc.atoms.len() > MAX_ATOMS {
        violations.push(Violation::TooManyAtoms { count: doc.atoms.len() });
    }
    if doc.worlds.is_empty() {
        violations.push(Violation::NoWorlds);
    }

    let mut world_ids = HashSet::new();
    for world in &doc.worlds {
        if !world_ids.insert(world.id.as_str()) {
            violations.push(Violation::DuplicateWorld { world: world.id.clone() });
        }
        for atom in &world.atoms {
            if !doc.atoms.contains(atom) {
                violations.push(Violation::DanglingAtom { world: world.id.clone(), atom: atom.clone() });
            }
        }
    }

    for (agent, blocks) in &doc.relations {
        if !doc.agents.contains(agent) {
            violations.push(Violation::UnknownAgent { agent: agent.clone() });
        }
        let mut hits: HashMap<&str, usize> = HashMap::new();
        for world in blocks.iter().flatten() {
            if world_ids.contains(world.as_str()) {
                *hits.entry(world.as_str()).or_default() += 1;
            } else {
                violations.push(Violation::UnknownWorld { agent: agent.clone(), world: world.clone() });
            }
        }
        let mut reported = HashSet::new();
        for world in &doc.worlds {
            if !reported.insert(world.id.as_str()) {
                continue;
            }
            match hits.get(world.id.as_str()).copied().unwrap_or(0) {
                0 => violations.push(Violation::UncoveredWorld { agent: agent.clone(), world: world.id.clone() }),
                1 => {}
                _ => violations.push(Violation::OverlappingBlocks { agent: agent.clone(), world: world.id.clone() }),
            }
        }
    }
    for agent in &doc.agents {
        if !doc.relations.contains_key(agent) {
            violations.push(Violation::MissingRelation { agent: agent.clone() });
        }
    }

    if !world_ids.contains(doc.actual.as_str()) {
        violations.push(Violation::UnknownActual { world: doc.actual.clone() });
    }
    ValidationReport { violations }
}

impl ModelDoc {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model documents always serialize")
    }

    /// Validates and builds the pointed model. Worlds are numbered in
    /// document order.
    pub fn to_pointed(&self) -> Result<PointedModel, ModelError> {
        let report = validate(self);
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let index: HashMap<&str, WorldId> = self
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| (w.id.as_str(), WorldId(i as u64)))
            .collect();
        let worlds = self
            .worlds
            .iter()
            .enumerate()
            .map(|(i, w)| {
                let bits = w
                    .atoms
                    .iter()
                    .map(|a| 1u64 << self.atoms.iter().position(|x| x == a).expect("validated"))
                    .fold(0, |acc, b| acc | b);
                (WorldId(i as u64), bits)
            })
            .collect();
        let relations = self
            .agents
            .iter()
            .map(|agent| {
                self.relations[agent]
                    .iter()
                    .map(|block| block.iter().map(|w| index[w.as_str()]).collect())
                    .collect()
            })
            .collect();
        let model = KripkeModel::from_blocks(self.agents.clone(), self.atoms.clone(), worlds, relations)?
            .with_world_names(self.worlds.iter().map(|w| w.id.clone()).collect());
        PointedModel::new(model, index[self.actual.as_str()])
    }

    /// Document form of an in-memory model. World ids are the model's labels.
    pub fn from_pointed(pm: &PointedModel) -> Self {
        let model = pm.model();
        let label = |w: WorldId| model.world_label(w).expect("world of this model");
        let worlds = model
            .worlds()
            .iter()
            .map(|&w| {
                let bits = model.valuation(w).expect("world of this model");
                WorldDoc {
                    id: label(w),
                    atoms: (0..model.atoms().len())
                        .filter(|i| bits >> i & 1 == 1)
                        .map(|i| model.atoms()[i].clone())
                        .collect(),
                }
            })
            .collect();
        let relations = model
            .all_agents()
            .into_iter()
            .map(|a| {
                let part = model.partition(a);
                let mut blocks = vec![Vec::new(); part.block_count()];
                for (pos, &w) in model.worlds().iter().enumerate() {
                    blocks[part.block_of(pos) as usize].push(label(w));
                }
                (model.agents()[a.0].clone(), blocks)
            })
            .collect();
        ModelDoc {
            agents: model.agents().to_vec(),
            atoms: model.atoms().to_vec(),
            worlds,
            relations,
            actual: label(pm.actual()),
        }
    }
}

pub fn load_model(path: &Path) -> Result<PointedModel, LoadError> {
    let text = std::fs::read_to_string(path)?;
    Ok(ModelDoc::from_json(&text)?.to_pointed()?)
}

/// JSON Schema (draft 2020-12) for model documents.
pub const MODEL_SCHEMA: &str = r##"{
  "$schema": "https://json-schema.org/draft/2020-12/schema",
  "title": "Pointed S5 Kripke model",
  "type": "object",
  "required": ["agents", "atoms", "worlds", "relations", "actual"],
  "additionalProperties": false,
  "properties": {
    "agents": {"type": "array", "items": {"type": "string"}, "uniqueItems": true},
    "atoms": {"type": "array", "items": {"type": "string"}, "uniqueItems": true, "maxItems": 64},
    "worlds": {
      "type": "array",
      "minItems": 1,
      "items": {
        "type": "object",
        "required": ["id", "atoms"],
        "additionalProperties": false,
        "properties": {
          "id": {"type": "string"},
          "atoms": {"type": "array", "items": {"type": "string"}}
        }
      }
    },
    "relations": {
      "description": "Per agent, a partition of the world ids into indistinguishability blocks.",
      "type": "object",
      "additionalProperties": {
        "type": "array",
        "items": {"type": "array", "items": {"type": "string"}}
      }
    },
    "actual": {"type": "string"}
  }
}
"##;

//! Finite S5 possible-worlds models.
//!
//! Each agent's indistinguishability relation is stored as a partition of the
//! world set: every world carries the label of the block it belongs to. That
//! encoding makes reflexivity, symmetry and transitivity structural. Models
//! arriving as explicit block lists (see [`crate::model_file`]) go through the
//! validator before a [`KripkeModel`] is built from them.

use std::fmt;

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of an agent within a model's agent table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AgentId(pub usize);

/// Stable identity of a world. Village worlds use the bitmask of unfaithful
/// men (bit `i` set means man `i + 1` is unfaithful); file-loaded models
/// number their worlds in document order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct WorldId(pub u64);

impl fmt::Display for WorldId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Set of world positions within one particular model.
pub(crate) type WorldSet = FixedBitSet;

/// Maximum number of atoms a model may declare; valuations are one `u64` per world.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("unknown world {0}")]
    UnknownWorld(WorldId),
    #[error("unknown agent index {0}")]
    UnknownAgent(usize),
    #[error("unknown agent `{0}`")]
    UnknownAgentName(String),
    #[error("unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("model has no worlds")]
    Collapsed,
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),
}

/// One agent's partition of the world positions into blocks.
///
/// Block labels are canonical: numbered in order of first appearance when
/// scanning positions upward, so equal partitions compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Partition {
    block_of: Vec<u32>,
    blocks: u32,
}

impl Partition {
    /// Canonicalizes arbitrary per-position labels.
    pub(crate) fn from_labels<I: IntoIterator<Item = u64>>(labels: I) -> Self {
        let mut seen = std::collections::HashMap::new();
        let block_of = labels
            .into_iter()
            .map(|label| {
                let next = seen.len() as u32;
                *seen.entry(label).or_insert(next)
            })
            .collect();
        Partition { block_of, blocks: seen.len() as u32 }
    }

    /// Labels already numbered in first-appearance order, `blocks` of them.
    pub(crate) fn new_canonical(block_of: Vec<u32>, blocks: u32) -> Self {
        Partition { block_of, blocks }
    }

    pub(crate) fn block_of(&self, pos: usize) -> u32 {
        self.block_of[pos]
    }

    pub(crate) fn block_count(&self) -> usize {
        self.blocks as usize
    }

    fn restrict(&self, keep: &WorldSet) -> Self {
        let mut relabel = vec![u32::MAX; self.blocks as usize];
        let mut blocks = 0;
        let block_of = keep
            .ones()
            .map(|pos| {
                let slot = &mut relabel[self.block_of[pos] as usize];
                if *slot == u32::MAX {
                    *slot = blocks;
                    blocks += 1;
                }
                *slot
            })
            .collect();
        Partition { block_of, blocks }
    }
}

/// A finite multi-agent S5 model. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    agents: Vec<String>,
    atoms: Vec<String>,
    /// Strictly ascending.
    worlds: Vec<WorldId>,
    world_names: Option<Vec<String>>,
    valuation: Vec<u64>,
    relations: Vec<Partition>,
}

impl KripkeModel {
    /// Assembles a model from already-consistent parts. Callers guarantee that
    /// `worlds` is strictly ascending and each partition covers every position.
    pub(crate) fn from_raw(
        agents: Vec<String>,
        atoms: Vec<String>,
        worlds: Vec<WorldId>,
        world_names: Option<Vec<String>>,
        valuation: Vec<u64>,
        relations: Vec<Partition>,
    ) -> Self {
        debug_assert!(worlds.windows(2).all(|w| w[0] < w[1]));
        debug_assert_eq!(worlds.len(), valuation.len());
        debug_assert_eq!(agents.len(), relations.len());
        debug_assert!(relations.iter().all(|p| p.block_of.len() == worlds.len()));
        KripkeModel { agents, atoms, worlds, world_names, valuation, relations }
    }

    /// Builds a model from explicit block lists, validating them first.
    ///
    /// `worlds` pairs each world with its atom bit pattern; `relations[a]` is
    /// agent `a`'s list of blocks.
    pub fn from_blocks(
        agents: Vec<String>,
        atoms: Vec<String>,
        worlds: Vec<(WorldId, u64)>,
        relations: Vec<Vec<Vec<WorldId>>>,
    ) -> Result<Self, ModelError> {
        let report = validate_blocks(&agents, &atoms, &worlds, &relations);
        if !report.is_ok() {
            return Err(ModelError::Invalid(report));
        }
        let mut worlds = worlds;
        worlds.sort_by_key(|(id, _)| *id);
        let ids: Vec<WorldId> = worlds.iter().map(|(id, _)| *id).collect();
        let valuation = worlds.iter().map(|(_, bits)| *bits).collect();
        let relations = relations
            .iter()
            .map(|blocks| {
                let mut label = vec![0u64; ids.len()];
                for (b, block) in blocks.iter().enumerate() {
                    for w in block {
                        let pos = ids.binary_search(w).expect("validated");
                        label[pos] = b as u64;
                    }
                }
                Partition::from_labels(label)
            })
            .collect();
        Ok(Self::from_raw(agents, atoms, ids, None, valuation, relations))
    }

    pub(crate) fn with_world_names(mut self, names: Vec<String>) -> Self {
        debug_assert_eq!(names.len(), self.worlds.len());
        self.world_names = Some(names);
        self
    }

    pub fn agents(&self) -> &[String] {
        &self.agents
    }

    pub fn atoms(&self) -> &[String] {
        &self.atoms
    }

    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    /// A model with zero worlds, produced when an update rules out everything.
    pub fn is_collapsed(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn agent_id(&self, name: &str) -> Option<AgentId> {
        self.agents.iter().position(|a| a == name).map(AgentId)
    }

    pub fn agent_name(&self, agent: AgentId) -> Option<&str> {
        self.agents.get(agent.0).map(String::as_str)
    }

    pub fn all_agents(&self) -> Vec<AgentId> {
        (0..self.agents.len()).map(AgentId).collect()
    }

    pub fn atom_index(&self, name: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a == name)
    }

    pub fn contains(&self, w: WorldId) -> bool {
        self.position(w).is_some()
    }

    /// Display label of a world: its file id when loaded from a document,
    /// otherwise the set of true atoms.
    pub fn world_label(&self, w: WorldId) -> Option<String> {
        let pos = self.position(w)?;
        if let Some(names) = &self.world_names {
            return Some(names[pos].clone());
        }
        let bits = self.valuation[pos];
        let atoms: Vec<&str> = (0..self.atoms.len())
            .filter(|i| bits >> i & 1 == 1)
            .map(|i| self.atoms[i].as_str())
            .collect();
        Some(format!("{{{}}}", atoms.join(",")))
    }

    /// Atom bit pattern at `w`.
    pub fn valuation(&self, w: WorldId) -> Result<u64, ModelError> {
        Ok(self.valuation[self.require(w)?])
    }

    pub(crate) fn position(&self, w: WorldId) -> Option<usize> {
        self.worlds.binary_search(&w).ok()
    }

    pub(crate) fn require(&self, w: WorldId) -> Result<usize, ModelError> {
        self.position(w).ok_or(ModelError::UnknownWorld(w))
    }

    pub(crate) fn require_agent(&self, a: AgentId) -> Result<(), ModelError> {
        if a.0 < self.agents.len() {
            Ok(())
        } else {
            Err(ModelError::UnknownAgent(a.0))
        }
    }

    pub(crate) fn valuation_at(&self, pos: usize) -> u64 {
        self.valuation[pos]
    }

    pub(crate) fn partition(&self, a: AgentId) -> &Partition {
        &self.relations[a.0]
    }

    pub(crate) fn empty_set(&self) -> WorldSet {
        FixedBitSet::with_capacity(self.worlds.len())
    }

    pub(crate) fn full_set(&self) -> WorldSet {
        let mut all = self.empty_set();
        all.insert_range(..);
        all
    }

    pub(crate) fn ids_of(&self, set: &WorldSet) -> Vec<WorldId> {
        set.ones().map(|pos| self.worlds[pos]).collect()
    }

    /// Agent `a`'s block containing `w`, in ascending world order.
    pub fn accessible(&self, w: WorldId, a: AgentId) -> Result<Vec<WorldId>, ModelError> {
        let pos = self.require(w)?;
        self.require_agent(a)?;
        let part = self.partition(a);
        let block = part.block_of(pos);
        Ok((0..self.worlds.len())
            .filter(|&p| part.block_of(p) == block)
            .map(|p| self.worlds[p])
            .collect())
    }

    /// The submodel over exactly the worlds in `keep`. Blocks are intersected
    /// with `keep`; an empty `keep` yields the collapsed model.
    pub fn restrict<I>(&self, keep: I) -> Result<KripkeModel, ModelError>
    where
        I: IntoIterator<Item = WorldId>,
    {
        let mut set = self.empty_set();
        for w in keep {
            set.insert(self.require(w)?);
        }
        Ok(self.restrict_to(&set))
    }

    pub(crate) fn restrict_to(&self, keep: &WorldSet) -> KripkeModel {
        let worlds = keep.ones().map(|p| self.worlds[p]).collect();
        let valuation = keep.ones().map(|p| self.valuation[p]).collect();
        let world_names = self
            .world_names
            .as_ref()
            .map(|names| keep.ones().map(|p| names[p].clone()).collect());
        let relations = self.relations.iter().map(|r| r.restrict(keep)).collect();
        KripkeModel::from_raw(
            self.agents.clone(),
            self.atoms.clone(),
            worlds,
            world_names,
            valuation,
            relations,
        )
    }

    /// Worlds reachable from `w` through any chain of the group's relations.
    /// An empty group reaches only `w` itself.
    pub fn reachable(&self, w: WorldId, group: &[AgentId]) -> Result<Vec<WorldId>, ModelError> {
        let pos = self.require(w)?;
        for &a in group {
            self.require_agent(a)?;
        }
        let comp = self.components(group);
        let mine = comp[pos];
        Ok((0..self.worlds.len())
            .filter(|&p| comp[p] == mine)
            .map(|p| self.worlds[p])
            .collect())
    }

    /// Connected-component representative per position under the union of the
    /// group's partitions.
    pub(crate) fn components(&self, group: &[AgentId]) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.worlds.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &a in group {
            let part = self.partition(a);
            let mut first = vec![usize::MAX; part.block_count()];
            for pos in 0..self.worlds.len() {
                let slot = &mut first[part.block_of(pos) as usize];
                if *slot == usize::MAX {
                    *slot = pos;
                } else {
                    let (x, y) = (find(&mut parent, *slot), find(&mut parent, pos));
                    if x != y {
                        parent[y] = x;
                    }
                }
            }
        }
        (0..parent.len()).map(|p| find(&mut parent, p)).collect()
    }
}

/// A model together with its designated actual world.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointedModel {
    model: KripkeModel,
    actual: WorldId,
}

impl PointedModel {
    pub fn new(model: KripkeModel, actual: WorldId) -> Result<Self, ModelError> {
        if model.is_collapsed() {
            return Err(ModelError::Collapsed);
        }
        model.require(actual)?;
        Ok(PointedModel { model, actual })
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn actual(&self) -> WorldId {
        self.actual
    }

    pub fn into_parts(self) -> (KripkeModel, WorldId) {
        (self.model, self.actual)
    }
}

/// A single well-formedness problem found by the validator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The same world is listed in two blocks (or twice) for one agent.
    OverlappingBlocks { agent: String, world: String },
    /// A world sits in no block of the agent's partition.
    UncoveredWorld { agent: String, world: String },
    /// A block mentions a world that the model does not declare.
    UnknownWorld { agent: String, world: String },
    /// A world's valuation uses an atom missing from the atom table.
    DanglingAtom { world: String, atom: String },
    DuplicateWorld { world: String },
    DuplicateAgent { agent: String },
    DuplicateAtom { atom: String },
    /// Relations are given for an agent that is not declared.
    UnknownAgent { agent: String },
    /// No partition at all is given for a declared agent.
    MissingRelation { agent: String },
    UnknownActual { world: String },
    NoWorlds,
    TooManyAtoms { count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::OverlappingBlocks { agent, world } => {
                write!(f, "overlapping blocks: world `{world}` appears more than once for agent `{agent}`")
            }
            Violation::UncoveredWorld { agent, world } => {
                write!(f, "uncovered world: `{world}` is in no block of agent `{agent}`")
            }
            Violation::UnknownWorld { agent, world } => {
                write!(f, "unknown world `{world}` in a block of agent `{agent}`")
            }
            Violation::DanglingAtom { world, atom } => {
                write!(f, "dangling atom `{atom}` at world `{world}`")
            }
            Violation::DuplicateWorld { world } => write!(f, "duplicate world `{world}`"),
            Violation::DuplicateAgent { agent } => write!(f, "duplicate agent `{agent}`"),
            Violation::DuplicateAtom { atom } => write!(f, "duplicate atom `{atom}`"),
            Violation::UnknownAgent { agent } => write!(f, "relation given for unknown agent `{agent}`"),
            Violation::MissingRelation { agent } => write!(f, "no relation given for agent `{agent}`"),
            Violation::UnknownActual { world } => write!(f, "actual world `{world}` is not declared"),
            Violation::NoWorlds => write!(f, "model declares no worlds"),
            Violation::TooManyAtoms { count } => {
                write!(f, "{count} atoms declared, at most {MAX_ATOMS} supported")
            }
        }
    }
}

/// Outcome of validation: ok iff there are no violations.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn has(&self, pred: impl Fn(&Violation) -> bool) -> bool {
        self.violations.iter().any(pred)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

fn validate_blocks(
    agents: &[String],
    atoms: &[String],
    worlds: &[(WorldId, u64)],
    relations: &[Vec<Vec<WorldId>>],
) -> ValidationReport {
    let mut violations = Vec::new();
    if atoms.len() > MAX_ATOMS {
        violations.push(Violation::TooManyAtoms { count: atoms.len() });
    }
    if worlds.is_empty() {
        violations.push(Violation::NoWorlds);
    }
    let mut ids: Vec<WorldId> = worlds.iter().map(|(id, _)| *id).collect();
    ids.sort();
    for pair in ids.windows(2) {
        if pair[0] == pair[1] {
            violations.push(Violation::DuplicateWorld { world: pair[0].to_string() });
        }
    }
    ids.dedup();
    let declared = atoms.len().min(MAX_ATOMS);
    for (id, bits) in worlds {
        let extra = if declared == 64 { 0 } else { bits >> declared };
        if extra != 0 {
            let atom = declared + extra.trailing_zeros() as usize;
            violations.push(Violation::DanglingAtom { world: id.to_string(), atom: format!("bit {atom}") });
        }
    }
    for (a, blocks) in relations.iter().enumerate() {
        let agent = agents.get(a).cloned().unwrap_or_else(|| format!("agent {a}"));
        let mut hits = vec![0usize; ids.len()];
        for w in blocks.iter().flatten() {
            match ids.binary_search(w) {
                Ok(pos) => hits[pos] += 1,
                Err(_) => violations.push(Violation::UnknownWorld { agent: agent.clone(), world: w.to_string() }),
            }
        }
        for (pos, &count) in hits.iter().enumerate() {
            let world = ids[pos].to_string();
            match count {
                0 => violations.push(Violation::UncoveredWorld { agent: agent.clone(), world }),
                1 => {}
                _ => violations.push(Violation::OverlappingBlocks { agent: agent.clone(), world }),
            }
        }
    }
    for agent in agents.iter().skip(relations.len()) {
        violations.push(Violation::MissingRelation { agent: agent.clone() });
    }
    ValidationReport { violations }
}

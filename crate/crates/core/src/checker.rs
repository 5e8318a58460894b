//! Truth evaluation over S5 models, plus subjective probability and the
//! information content of an event.
//!
//! Evaluation works on whole extensions: one post-order pass over the formula
//! computes, for every subformula exactly once, the set of worlds where it
//! holds. Modal operators then cost one pass over the worlds, so `E^k p`
//! takes `k` passes instead of the exponential blow-up of evaluating each
//! world recursively.

use std::cmp::Ordering;
use std::fmt;

use num_rational::Ratio;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::formula::{Formula, Group};
use crate::kripke::{AgentId, KripkeModel, ModelError, PointedModel, WorldId, WorldSet};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("formula mentions unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("formula mentions unknown atom `{0}`")]
    UnknownAtom(String),
    #[error("cannot evaluate: no worlds")]
    NoWorlds,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// The worlds of one model where a formula holds, ascending.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extension {
    worlds: Vec<WorldId>,
}

impl Extension {
    pub fn worlds(&self) -> &[WorldId] {
        &self.worlds
    }

    pub fn len(&self) -> usize {
        self.worlds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.worlds.is_empty()
    }

    pub fn contains(&self, w: WorldId) -> bool {
        self.worlds.binary_search(&w).is_ok()
    }
}

pub fn extension(model: &KripkeModel, f: &Formula) -> Result<Extension, EvalError> {
    let set = eval_set(model, f)?;
    Ok(Extension { worlds: model.ids_of(&set) })
}

pub(crate) fn eval_set(model: &KripkeModel, f: &Formula) -> Result<WorldSet, EvalError> {
    Evaluator { model }.eval(f)
}

/// Truth of `f` at the actual world.
pub fn holds(pm: &PointedModel, f: &Formula) -> Result<bool, EvalError> {
    let model = pm.model();
    if model.is_collapsed() {
        return Err(EvalError::NoWorlds);
    }
    let set = eval_set(model, f)?;
    Ok(set.contains(model.require(pm.actual())?))
}

/// Fraction of the agent's accessible worlds (from the actual world) where
/// `f` holds, under a uniform prior.
pub fn subjective_probability(pm: &PointedModel, agent: AgentId, f: &Formula) -> Result<Probability, EvalError> {
    let model = pm.model();
    if model.is_collapsed() {
        return Err(EvalError::NoWorlds);
    }
    let actual = model.require(pm.actual())?;
    model.require_agent(agent)?;
    let set = eval_set(model, f)?;
    let part = model.partition(agent);
    let block = part.block_of(actual);
    let (mut hits, mut total) = (0u64, 0u64);
    for pos in (0..model.world_count()).filter(|&p| part.block_of(p) == block) {
        total += 1;
        hits += u64::from(set.contains(pos));
    }
    Ok(Probability::new(hits, total).expect("0 <= hits <= total, total >= 1"))
}

/// Information content `-log2 p` of an event with probability `p`.
pub fn info_content(p: Probability) -> Surprisal {
    let (num, den) = (p.numerator(), p.denominator());
    if num == 0 {
        Surprisal::ImpossibleEvent
    } else if num == den {
        Surprisal::Bits(0.0)
    } else {
        Surprisal::Bits((den as f64).log2() - (num as f64).log2())
    }
}

struct Evaluator<'m> {
    model: &'m KripkeModel,
}

impl Evaluator<'_> {
    fn group(&self, group: &Group) -> Result<Vec<AgentId>, EvalError> {
        match group {
            Group::All => Ok(self.model.all_agents()),
            Group::Agents(names) => names.iter().map(|n| self.agent(n)).collect(),
        }
    }

    fn agent(&self, name: &str) -> Result<AgentId, EvalError> {
        self.model.agent_id(name).ok_or_else(|| EvalError::UnknownAgent(name.to_string()))
    }

    /// Worlds whose `agent` block lies entirely inside `inner`.
    fn knows(&self, agent: AgentId, inner: &WorldSet) -> WorldSet {
        let part = self.model.partition(agent);
        let mut whole = vec![true; part.block_count()];
        for pos in 0..self.model.world_count() {
            if !inner.contains(pos) {
                whole[part.block_of(pos) as usize] = false;
            }
        }
        let mut out = self.model.empty_set();
        for pos in 0..self.model.world_count() {
            if whole[part.block_of(pos) as usize] {
                out.insert(pos);
            }
        }
        out
    }

    fn eval(&self, f: &Formula) -> Result<WorldSet, EvalError> {
        stacker::maybe_grow(64 * 1024, 2 * 1024 * 1024, || self.eval_node(f))
    }

    fn eval_node(&self, f: &Formula) -> Result<WorldSet, EvalError> {
        let model = self.model;
        Ok(match f {
            Formula::True => model.full_set(),
            Formula::False => model.empty_set(),
            Formula::Atom(name) => {
                let bit = model.atom_index(name).ok_or_else(|| EvalError::UnknownAtom(name.clone()))?;
                let mut out = model.empty_set();
                for pos in 0..model.world_count() {
                    if model.valuation_at(pos) >> bit & 1 == 1 {
                        out.insert(pos);
                    }
                }
                out
            }
            Formula::Not(g) => {
                let mut out = self.eval(g)?;
                out.toggle_range(..);
                out
            }
            Formula::And(g, h) => {
                let mut out = self.eval(g)?;
                out.intersect_with(&self.eval(h)?);
                out
            }
            Formula::Or(g, h) => {
                let mut out = self.eval(g)?;
                out.union_with(&self.eval(h)?);
                out
            }
            Formula::Implies(g, h) => {
                let mut out = self.eval(g)?;
                out.toggle_range(..);
                out.union_with(&self.eval(h)?);
                out
            }
            Formula::Iff(g, h) => {
                let mut out = self.eval(g)?;
                out.symmetric_difference_with(&self.eval(h)?);
                out.toggle_range(..);
                out
            }
            Formula::Knows(agent, g) => {
                let agent = self.agent(agent)?;
                self.knows(agent, &self.eval(g)?)
            }
            Formula::Everyone(group, g) => {
                let agents = self.group(group)?;
                let inner = self.eval(g)?;
                let mut out = model.full_set();
                for agent in agents {
                    out.intersect_with(&self.knows(agent, &inner));
                }
                out
            }
            Formula::Common(group, g) => {
                let agents = self.group(group)?;
                let inner = self.eval(g)?;
                let comp = model.components(&agents);
                let mut whole = vec![true; model.world_count()];
                for pos in 0..model.world_count() {
                    if !inner.contains(pos) {
                        whole[comp[pos]] = false;
                    }
                }
                let mut out = model.empty_set();
                for pos in 0..model.world_count() {
                    if whole[comp[pos]] {
                        out.insert(pos);
                    }
                }
                out
            }
            Formula::Announce(g, h) => {
                let announced = self.eval(g)?;
                let updated = model.restrict_to(&announced);
                let after = Evaluator { model: &updated }.eval(h)?;
                let mut out = announced.clone();
                out.toggle_range(..);
                for (new_pos, old_pos) in announced.ones().enumerate() {
                    if after.contains(new_pos) {
                        out.insert(old_pos);
                    }
                }
                out
            }
        })
    }
}

/// An exact probability in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(Ratio<u64>);

impl Probability {
    pub const ONE: Probability = Probability(Ratio::new_raw(1, 1));
    pub const ZERO: Probability = Probability(Ratio::new_raw(0, 1));

    /// `None` unless `0 <= numerator <= denominator` and `denominator > 0`.
    pub fn new(numerator: u64, denominator: u64) -> Option<Self> {
        (denominator > 0 && numerator <= denominator).then(|| Probability(Ratio::new(numerator, denominator)))
    }

    pub fn numerator(&self) -> u64 {
        *self.0.numer()
    }

    pub fn denominator(&self) -> u64 {
        *self.0.denom()
    }

    pub fn is_certain(&self) -> bool {
        self.numerator() == self.denominator()
    }

    pub fn to_f64(&self) -> f64 {
        self.numerator() as f64 / self.denominator() as f64
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denominator() == 1 {
            write!(f, "{}", self.numerator())
        } else {
            write!(f, "{}/{}", self.numerator(), self.denominator())
        }
    }
}

impl Serialize for Probability {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

/// Information content in bits. An impossible event has no finite surprisal
/// and is kept as its own value so the type stays totally ordered.
#[derive(Clone, Copy, Debug)]
pub enum Surprisal {
    Bits(f64),
    ImpossibleEvent,
}

impl Surprisal {
    pub fn bits(&self) -> Option<f64> {
        match self {
            Surprisal::Bits(b) => Some(*b),
            Surprisal::ImpossibleEvent => None,
        }
    }
}

impl Ord for Surprisal {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Surprisal::Bits(a), Surprisal::Bits(b)) => a.total_cmp(b),
            (Surprisal::Bits(_), Surprisal::ImpossibleEvent) => Ordering::Less,
            (Surprisal::ImpossibleEvent, Surprisal::Bits(_)) => Ordering::Greater,
            (Surprisal::ImpossibleEvent, Surprisal::ImpossibleEvent) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Surprisal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for Surprisal {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Surprisal {}

impl fmt::Display for Surprisal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Surprisal::Bits(b) => write!(f, "{b} bits"),
            Surprisal::ImpossibleEvent => write!(f, "impossible event"),
        }
    }
}

impl Serialize for Surprisal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Surprisal::Bits(b) => serializer.serialize_f64(*b),
            Surprisal::ImpossibleEvent => serializer.serialize_str("impossible"),
        }
    }
}

//! Test-only helpers shared by the integration suites: seeded random models
//! and formulas, and a naive per-world evaluator used as an oracle.
#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stobon::{AgentId, Formula, Group, KripkeModel, PointedModel, WorldId};

pub const AGENTS: [&str; 3] = ["a", "b", "c"];
pub const ATOMS: [&str; 3] = ["p", "q", "r"];

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random pointed S5 model with 1..=max_worlds worlds, the fixed agents and
/// atoms, and random partitions.
pub fn random_model(rng: &mut impl Rng, max_worlds: usize) -> PointedModel {
    let count = rng.random_range(1..=max_worlds);
    let worlds: Vec<(WorldId, u64)> = (0..count)
        .map(|i| (WorldId(i as u64 * 3 + 1), rng.random_range(0..1u64 << ATOMS.len())))
        .collect();
    let relations = AGENTS
        .iter()
        .map(|_| {
            let blocks = rng.random_range(1..=count);
            let mut out = vec![Vec::new(); blocks];
            for (id, _) in &worlds {
                out[rng.random_range(0..blocks)].push(*id);
            }
            out.retain(|b| !b.is_empty());
            out
        })
        .collect();
    let model = KripkeModel::from_blocks(
        AGENTS.iter().map(|s| s.to_string()).collect(),
        ATOMS.iter().map(|s| s.to_string()).collect(),
        worlds.clone(),
        relations,
    )
    .expect("generated partitions are valid");
    let actual = worlds[rng.random_range(0..count)].0;
    PointedModel::new(model, actual).unwrap()
}

fn random_group(rng: &mut impl Rng) -> Group {
    if rng.random_bool(0.5) {
        Group::All
    } else {
        let mut names: Vec<String> = AGENTS.iter().filter(|_| rng.random_bool(0.5)).map(|s| s.to_string()).collect();
        if names.is_empty() {
            names.push(AGENTS[rng.random_range(0..AGENTS.len())].to_string());
        }
        Group::Agents(names)
    }
}

/// Random formula over the fixed agents and atoms, of depth at most `depth`.
pub fn random_formula(rng: &mut impl Rng, depth: usize) -> Formula {
    if depth <= 1 || rng.random_bool(0.2) {
        return match rng.random_range(0..8) {
            0 => Formula::True,
            1 => Formula::False,
            _ => Formula::atom(ATOMS[rng.random_range(0..ATOMS.len())]),
        };
    }
    let d = depth - 1;
    match rng.random_range(0..11) {
        0 => Formula::not(random_formula(rng, d)),
        1 => Formula::and(random_formula(rng, d), random_formula(rng, d)),
        2 => Formula::or(random_formula(rng, d), random_formula(rng, d)),
        3 => Formula::implies(random_formula(rng, d), random_formula(rng, d)),
        4 => Formula::iff(random_formula(rng, d), random_formula(rng, d)),
        5 | 6 => Formula::knows(AGENTS[rng.random_range(0..AGENTS.len())], random_formula(rng, d)),
        7 => Formula::everyone(random_group(rng), random_formula(rng, d)),
        8 => Formula::common(random_group(rng), random_formula(rng, d)),
        _ => Formula::announce(random_formula(rng, d), random_formula(rng, d)),
    }
}

fn resolve(model: &KripkeModel, group: &Group) -> Vec<AgentId> {
    match group {
        Group::All => model.all_agents(),
        Group::Agents(names) => names.iter().map(|n| model.agent_id(n).unwrap()).collect(),
    }
}

/// Textbook per-world semantics, recursing on every accessible world.
/// Shares nothing with the library's extension engine beyond the model's
/// `accessible`, `valuation` and `restrict` primitives.
pub fn naive_holds(model: &KripkeModel, w: WorldId, f: &Formula) -> bool {
    match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Atom(name) => {
            let bit = model.atom_index(name).unwrap();
            model.valuation(w).unwrap() >> bit & 1 == 1
        }
        Formula::Not(g) => !naive_holds(model, w, g),
        Formula::And(g, h) => naive_holds(model, w, g) && naive_holds(model, w, h),
        Formula::Or(g, h) => naive_holds(model, w, g) || naive_holds(model, w, h),
        Formula::Implies(g, h) => !naive_holds(model, w, g) || naive_holds(model, w, h),
        Formula::Iff(g, h) => naive_holds(model, w, g) == naive_holds(model, w, h),
        Formula::Knows(agent, g) => {
            let a = model.agent_id(agent).unwrap();
            model.accessible(w, a).unwrap().into_iter().all(|v| naive_holds(model, v, g))
        }
        Formula::Everyone(group, g) => resolve(model, group)
            .into_iter()
            .all(|a| model.accessible(w, a).unwrap().into_iter().all(|v| naive_holds(model, v, g))),
        Formula::Common(group, g) => {
            let agents = resolve(model, group);
            let mut seen = BTreeSet::from([w]);
            let mut queue = VecDeque::from([w]);
            while let Some(v) = queue.pop_front() {
                for &a in &agents {
                    for u in model.accessible(v, a).unwrap() {
                        if seen.insert(u) {
                            queue.push_back(u);
                        }
                    }
                }
            }
            seen.into_iter().all(|v| naive_holds(model, v, g))
        }
        Formula::Announce(g, h) => {
            if !naive_holds(model, w, g) {
                return true;
            }
            let keep: Vec<WorldId> = model.worlds().iter().copied().filter(|&v| naive_holds(model, v, g)).collect();
            let updated = model.restrict(keep).unwrap();
            naive_holds(&updated, w, h)
        }
    }
}

/// Worlds where `f` holds under the naive semantics.
pub fn naive_extension(model: &KripkeModel, f: &Formula) -> Vec<WorldId> {
    model.worlds().iter().copied().filter(|&w| naive_holds(model, w, f)).collect()
}

/// `C(n, k)` by multiplicative formula in u128.
pub fn binomial(n: u64, k: u64) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

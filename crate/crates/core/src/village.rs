//! The village: its possible-worlds model, the synchronous morning-by-morning
//! protocol, a counting engine for large villages, and executable checks of
//! the knowledge-timing and nested-knowledge assertions.
//!
//! Men are numbered from 1. Man `i` is bit `i - 1` of a world id, his
//! unfaithfulness is atom `u{i}` and his wife is agent `w{i}`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::checker::{eval_set, holds, EvalError};
use crate::formula::{nest_everyone, Formula, Group};
use crate::kripke::{KripkeModel, ModelError, Partition, PointedModel, WorldId};

/// Largest village the explicit engine builds by default (2^24 worlds).
pub const MAX_EXPLICIT_MEN: usize = 24;
pub const DEFAULT_MAX_WORLDS: u64 = 1 << MAX_EXPLICIT_MEN;
/// Largest village for nested-E verification.
pub const MAX_NESTED_MEN: usize = 12;
/// Largest village whose world counts the fast engine reports exactly.
const MAX_COUNTED_MEN: usize = 127;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VillageError {
    #[error("a village of {n} men needs 2^{n} worlds, above the limit of {limit}; use the fast engine instead")]
    TooLarge { n: usize, limit: u64 },
    #[error("a village needs at least one man")]
    NoMen,
    #[error("man {man} is outside 1..={n}")]
    ManOutOfRange { man: usize, n: usize },
    #[error("truthfulness violation: `{0}` is false at the actual world")]
    TruthfulnessViolation(String),
    #[error("unsupported scenario: {0}")]
    UnsupportedScenario(String),
    #[error("protocol state has collapsed: no world is consistent with the public history")]
    Collapsed,
    #[error("{what} requires 1 <= k <= n <= {max}, got n = {n}, k = {k}")]
    Guard { what: &'static str, n: usize, k: usize, max: usize },
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl From<ModelError> for VillageError {
    fn from(e: ModelError) -> Self {
        VillageError::Eval(EvalError::Model(e))
    }
}

pub fn wife(i: usize) -> String {
    format!("w{i}")
}

pub fn unfaithful_atom(i: usize) -> Formula {
    Formula::atom(format!("u{i}"))
}

/// World id of the given set of unfaithful men.
pub fn world_of(men: impl IntoIterator<Item = usize>) -> WorldId {
    WorldId(men.into_iter().fold(0, |acc, i| acc | 1 << (i - 1)))
}

/// Men unfaithful in a village world, ascending.
pub fn men_of(w: WorldId) -> BTreeSet<usize> {
    (0..64).filter(|b| w.0 >> b & 1 == 1).map(|b| b + 1).collect()
}

fn check_men(n: usize, men: &BTreeSet<usize>) -> Result<(), VillageError> {
    match men.iter().find(|&&m| m == 0 || m > n) {
        Some(&man) => Err(VillageError::ManOutOfRange { man, n }),
        None => Ok(()),
    }
}

pub fn build_village(n: usize, unfaithful: &[usize]) -> Result<PointedModel, VillageError> {
    build_village_limited(n, unfaithful, DEFAULT_MAX_WORLDS)
}

/// The pre-oracle village: one world per subset of unfaithful men, wife `i`
/// unable to tell apart worlds that differ only in her own husband.
pub fn build_village_limited(n: usize, unfaithful: &[usize], max_worlds: u64) -> Result<PointedModel, VillageError> {
    if n == 0 {
        return Err(VillageError::NoMen);
    }
    if n >= 63 || (1u64 << n) > max_worlds {
        return Err(VillageError::TooLarge { n, limit: max_worlds });
    }
    let actual: BTreeSet<usize> = unfaithful.iter().copied().collect();
    check_men(n, &actual)?;
    let count = 1u64 << n;
    let worlds: Vec<WorldId> = (0..count).map(WorldId).collect();
    let valuation: Vec<u64> = (0..count).collect();
    let relations = (0..n)
        .map(|bit| {
            // Blocks pair w with w ^ (1 << bit); number them by the smaller
            // member with the bit squeezed out, which is first-appearance order.
            let low = (1u64 << bit) - 1;
            let block_of = (0..count).map(|w| (((w >> (bit + 1)) << bit) | (w & low)) as u32).collect();
            Partition::new_canonical(block_of, (count / 2) as u32)
        })
        .collect();
    let model = KripkeModel::from_raw(
        (1..=n).map(wife).collect(),
        (1..=n).map(|i| format!("u{i}")).collect(),
        worlds,
        None,
        valuation,
        relations,
    );
    Ok(PointedModel::new(model, world_of(actual))?)
}

/// `u1 | u2 | ... | un`, folded to the left.
pub fn at_least_one(n: usize) -> Formula {
    (2..=n).fold(unfaithful_atom(1), |acc, i| Formula::or(acc, unfaithful_atom(i)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub n_men: usize,
    pub unfaithful: BTreeSet<usize>,
    #[serde(default)]
    pub deviants: BTreeSet<usize>,
    pub max_mornings: usize,
}

impl ScenarioSpec {
    pub fn new(n_men: usize, unfaithful: impl IntoIterator<Item = usize>) -> Self {
        ScenarioSpec {
            n_men,
            unfaithful: unfaithful.into_iter().collect(),
            deviants: BTreeSet::new(),
            max_mornings: n_men + 2,
        }
    }

    pub fn with_deviants(mut self, deviants: impl IntoIterator<Item = usize>) -> Self {
        self.deviants = deviants.into_iter().collect();
        self
    }

    pub fn with_max_mornings(mut self, max_mornings: usize) -> Self {
        self.max_mornings = max_mornings;
        self
    }

    pub fn validate(&self) -> Result<(), VillageError> {
        if self.n_men == 0 {
            return Err(VillageError::NoMen);
        }
        check_men(self.n_men, &self.unfaithful)?;
        check_men(self.n_men, &self.deviants)?;
        if self.unfaithful.is_empty() {
            return Err(VillageError::TruthfulnessViolation(
                "at least one man is unfaithful".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayEvent {
    pub morning: usize,
    pub killed: BTreeSet<usize>,
    /// Worlds left after the morning's update; `None` when too large to count.
    pub model_size_after: Option<u128>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Completed,
    Collapsed { morning: usize },
    MorningLimitReached,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub spec: ScenarioSpec,
    pub events: Vec<DayEvent>,
    pub outcome: Outcome,
}

impl Trace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("traces always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Fixed-width table, one row per morning.
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{:>7}  {:<30}  {:>12}", "morning", "event", "worlds");
        for e in &self.events {
            let event = if e.killed.is_empty() {
                "no killings".to_string()
            } else {
                format!("killed: {}", join(&e.killed))
            };
            let size = e.model_size_after.map_or_else(|| "-".to_string(), |s| s.to_string());
            let _ = writeln!(out, "{:>7}  {:<30}  {:>12}", e.morning, event, size);
        }
        let outcome = match self.outcome {
            Outcome::Completed => "completed".to_string(),
            Outcome::Collapsed { morning } => format!("collapsed at morning {morning}"),
            Outcome::MorningLimitReached => format!("morning limit {} reached", self.spec.max_mornings),
        };
        let _ = writeln!(out, "outcome: {outcome}");
        out
    }

    pub fn quiet_mornings(&self) -> usize {
        self.events.iter().take_while(|e| e.killed.is_empty()).count()
    }
}

pub(crate) fn join(men: &BTreeSet<usize>) -> String {
    men.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PublicEvent {
    Announcement(Formula),
    Morning(DayEvent),
}

/// The evolving shared model of a run. The actual world is tracked
/// separately from the model because public observations can rule it out.
#[derive(Clone, Debug)]
pub struct ProtocolState {
    model: KripkeModel,
    actual: WorldId,
    n_men: usize,
    morning: usize,
    history: Vec<PublicEvent>,
}

impl ProtocolState {
    pub fn new(village: PointedModel) -> Self {
        let n_men = village.model().agents().len();
        let (model, actual) = village.into_parts();
        ProtocolState { model, actual, n_men, morning: 0, history: Vec::new() }
    }

    pub fn model(&self) -> &KripkeModel {
        &self.model
    }

    pub fn actual(&self) -> WorldId {
        self.actual
    }

    pub fn morning(&self) -> usize {
        self.morning
    }

    pub fn history(&self) -> &[PublicEvent] {
        &self.history
    }

    /// No world left, or the public history has ruled out the actual world.
    pub fn is_collapsed(&self) -> bool {
        !self.model.contains(self.actual)
    }

    pub fn pointed(&self) -> Result<PointedModel, VillageError> {
        if self.is_collapsed() {
            return Err(VillageError::Collapsed);
        }
        Ok(PointedModel::new(self.model.clone(), self.actual)?)
    }

    /// Public truthful announcement of `f`: keep only the worlds where it holds.
    pub fn announce(mut self, f: Formula) -> Result<Self, VillageError> {
        if !holds(&self.pointed()?, &f)? {
            return Err(VillageError::TruthfulnessViolation(f.to_string()));
        }
        let keep = eval_set(&self.model, &f)?;
        self.model = self.model.restrict_to(&keep);
        self.history.push(PublicEvent::Announcement(f));
        Ok(self)
    }

    /// Wives who know their husband is unfaithful at the actual world.
    pub fn knowers(&self) -> Result<BTreeSet<usize>, VillageError> {
        let pos = self.model.require(self.actual).map_err(|_| VillageError::Collapsed)?;
        let masks = self.knower_masks()?;
        Ok(men_of(WorldId(masks[pos])))
    }

    /// Per world position, the bitmask of wives who would know (and so kill).
    fn knower_masks(&self) -> Result<Vec<u64>, VillageError> {
        let mut masks = vec![0u64; self.model.world_count()];
        for i in 1..=self.n_men {
            let knows = eval_set(&self.model, &Formula::knows(wife(i), unfaithful_atom(i)))?;
            for pos in knows.ones() {
                masks[pos] |= 1 << (i - 1);
            }
        }
        Ok(masks)
    }

    /// One morning: every compliant wife who knows kills; everyone observes
    /// who died and keeps only the worlds that predict exactly those deaths.
    ///
    /// Deviance is secret, so predictions assume every wife complies.
    pub fn step_morning(mut self, deviants: &BTreeSet<usize>) -> Result<(Self, DayEvent), VillageError> {
        let actual = self.model.require(self.actual).map_err(|_| VillageError::Collapsed)?;
        let masks = self.knower_masks()?;
        let deviant_mask = world_of(deviants.iter().copied()).0;
        let observed = masks[actual] & !deviant_mask;
        let mut keep = self.model.empty_set();
        for (pos, &mask) in masks.iter().enumerate() {
            if mask == observed {
                keep.insert(pos);
            }
        }
        self.model = self.model.restrict_to(&keep);
        self.morning += 1;
        let event = DayEvent {
            morning: self.morning,
            killed: men_of(WorldId(observed)),
            model_size_after: Some(self.model.world_count() as u128),
        };
        self.history.push(PublicEvent::Morning(event.clone()));
        Ok((self, event))
    }
}

pub fn run_protocol(spec: &ScenarioSpec) -> Result<Trace, VillageError> {
    run_protocol_limited(spec, DEFAULT_MAX_WORLDS)
}

/// Explicit-model engine: build the village, announce that at least one man
/// is unfaithful, then step mornings until a killing, a collapse or the
/// morning limit.
pub fn run_protocol_limited(spec: &ScenarioSpec, max_worlds: u64) -> Result<Trace, VillageError> {
    spec.validate()?;
    let unfaithful: Vec<usize> = spec.unfaithful.iter().copied().collect();
    let village = build_village_limited(spec.n_men, &unfaithful, max_worlds)?;
    let mut state = ProtocolState::new(village).announce(at_least_one(spec.n_men))?;
    let mut events = Vec::new();
    let mut outcome = Outcome::MorningLimitReached;
    for _ in 0..spec.max_mornings {
        let (next, event) = state.step_morning(&spec.deviants)?;
        state = next;
        let killed = !event.killed.is_empty();
        events.push(event);
        if state.is_collapsed() {
            outcome = Outcome::Collapsed { morning: state.morning() };
            break;
        }
        if killed {
            outcome = Outcome::Completed;
            break;
        }
    }
    Ok(Trace { spec: spec.clone(), events, outcome })
}

/// Counting engine state. `lower_bound` is the publicly known minimum number
/// of unfaithful men; each quiet morning raises it by one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FastState {
    pub n: usize,
    pub k: usize,
    pub lower_bound: usize,
    pub morning: usize,
    suffix_counts: Option<Vec<u128>>,
}

impl FastState {
    /// State right after the oracle, which sets the lower bound to 1.
    pub fn new(n: usize, k: usize) -> Self {
        FastState { n, k, lower_bound: 1, morning: 0, suffix_counts: suffix_binomial_sums(n) }
    }

    /// Men a wife sees unfaithful: everyone but her own husband.
    pub fn observed_count(&self, betrayed: bool) -> usize {
        if betrayed {
            self.k - 1
        } else {
            self.k
        }
    }

    /// Worlds with at least `lower_bound` unfaithful men.
    pub fn world_count(&self) -> Option<u128> {
        self.suffix_counts.as_ref().map(|s| s.get(self.lower_bound).copied().unwrap_or(0))
    }

    /// A wife knows once the men she sees fall short of the public lower
    /// bound: her own husband must make up the difference.
    pub fn step(&mut self, unfaithful: &BTreeSet<usize>) -> DayEvent {
        self.morning += 1;
        let betrayed_kill = self.observed_count(true) < self.lower_bound;
        let faithful_kill = self.observed_count(false) < self.lower_bound;
        let killed: BTreeSet<usize> = (1..=self.n)
            .filter(|i| if unfaithful.contains(i) { betrayed_kill } else { faithful_kill })
            .collect();
        let model_size_after = if killed.is_empty() {
            self.lower_bound += 1;
            self.world_count()
        } else {
            // Only the actual world predicts exactly these deaths.
            self.suffix_counts.as_ref().map(|_| 1)
        };
        DayEvent { morning: self.morning, killed, model_size_after }
    }
}

/// `sums[l] = sum over j >= l of C(n, j)`, when every entry fits in a u128.
fn suffix_binomial_sums(n: usize) -> Option<Vec<u128>> {
    if n > MAX_COUNTED_MEN {
        return None;
    }
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for j in 1..row.len() {
            next[j] = row[j - 1] + row[j];
        }
        row = next;
    }
    let mut sums = vec![0u128; n + 2];
    for j in (0..=n).rev() {
        sums[j] = sums[j + 1] + row[j];
    }
    Some(sums)
}

/// Counting engine: same trace as [`run_protocol`] for compliant scenarios,
/// without building any model.
pub fn run_protocol_fast(spec: &ScenarioSpec) -> Result<Trace, VillageError> {
    if !spec.deviants.is_empty() {
        return Err(VillageError::UnsupportedScenario(
            "the fast engine models only compliant wives; use the exact engine for deviants".into(),
        ));
    }
    spec.validate()?;
    let mut state = FastState::new(spec.n_men, spec.unfaithful.len());
    let mut events = Vec::new();
    let mut outcome = Outcome::MorningLimitReached;
    for _ in 0..spec.max_mornings {
        let event = state.step(&spec.unfaithful);
        let killed = !event.killed.is_empty();
        events.push(event);
        if killed {
            outcome = Outcome::Completed;
            break;
        }
    }
    Ok(Trace { spec: spec.clone(), events, outcome })
}

/// Result of checking one instance of an assertion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AssertionReport {
    pub holds: bool,
    pub details: Vec<String>,
}

impl AssertionReport {
    fn new() -> Self {
        AssertionReport { holds: true, details: Vec::new() }
    }

    fn require(&mut self, ok: bool, detail: String) {
        if !ok {
            self.holds = false;
            self.details.push(format!("FAILED: {detail}"));
        } else {
            self.details.push(detail);
        }
    }
}

fn guard(what: &'static str, n: usize, k: usize, max: usize) -> Result<(), VillageError> {
    if 1 <= k && k <= n && n <= max {
        Ok(())
    } else {
        Err(VillageError::Guard { what, n, k, max })
    }
}

/// With `k` unfaithful men (men `1..=k`) in a village of `n`: the first
/// `k - 1` mornings are quiet, morning `k` kills exactly them, and the
/// betrayed wives come to know at the state `k - 1` mornings after the
/// proclamation, while no faithful wife ever does.
pub fn check_s(n: usize, k: usize) -> Result<AssertionReport, VillageError> {
    guard("S check", n, k, MAX_EXPLICIT_MEN)?;
    let mut report = AssertionReport::new();
    let unfaithful: BTreeSet<usize> = (1..=k).collect();

    let trace = run_protocol(&ScenarioSpec::new(n, unfaithful.clone()))?;
    report.require(trace.outcome == Outcome::Completed, format!("outcome {:?}", trace.outcome));
    report.require(trace.events.len() == k, format!("{} mornings recorded", trace.events.len()));
    report.require(trace.quiet_mornings() == k - 1, format!("{} quiet mornings", trace.quiet_mornings()));
    let last = trace.events.last().map(|e| e.killed.clone()).unwrap_or_default();
    report.require(last == unfaithful, format!("morning {k} killed {{{}}}", join(&last)));

    let village = build_village(n, &(1..=k).collect::<Vec<_>>())?;
    let mut state = ProtocolState::new(village);
    let before = state.knowers()?;
    report.require(before.is_empty(), format!("before the oracle, knowers {{{}}}", join(&before)));
    state = state.announce(at_least_one(n))?;
    let no_deviants = BTreeSet::new();
    for mornings in 0..=k {
        let knowers = state.knowers()?;
        let expected = if mornings + 1 >= k { unfaithful.clone() } else { BTreeSet::new() };
        report.require(
            knowers == expected,
            format!("{mornings} mornings after the proclamation, knowers {{{}}}", join(&knowers)),
        );
        report.require(
            knowers.is_subset(&unfaithful),
            format!("{mornings} mornings after the proclamation, no faithful wife knows"),
        );
        if mornings < k {
            state = state.step_morning(&no_deviants)?.0;
        }
    }
    Ok(report)
}

/// With `k` unfaithful men, before the oracle: `E^(k-1) at_least_one` holds
/// at the actual world, yet no betrayed wife knows it.
///
/// All betrayed wives are checked; by symmetry "some" and "all" coincide.
pub fn check_t(n: usize, k: usize) -> Result<AssertionReport, VillageError> {
    guard("T check", n, k, MAX_NESTED_MEN)?;
    let mut report = AssertionReport::new();
    let pm = build_village(n, &(1..=k).collect::<Vec<_>>())?;
    let nested = nest_everyone(at_least_one(n), k - 1, &Group::All);
    report.require(holds(&pm, &nested)?, format!("E^{} at_least_one holds at the actual world", k - 1));
    for i in 1..=k {
        let knows = holds(&pm, &Formula::knows(wife(i), nested.clone()))?;
        report.require(!knows, format!("wife {i} does not know E^{} at_least_one", k - 1));
    }
    report.details.push(format!("checked all {k} betrayed wives"));
    Ok(report)
}

/// Which assertion a sweep checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Assertion {
    S,
    T,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub assertion: Assertion,
    pub max_n: usize,
    pub checked: usize,
    /// `(n, k, details)` of every failing instance.
    pub failures: Vec<(usize, usize, Vec<String>)>,
}

impl SweepReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the assertion for every `1 <= k <= n <= max_n`.
pub fn sweep(assertion: Assertion, max_n: usize) -> Result<SweepReport, VillageError> {
    let mut report = SweepReport { assertion, max_n, checked: 0, failures: Vec::new() };
    for n in 1..=max_n {
        for k in 1..=n {
            let r = match assertion {
                Assertion::S => check_s(n, k)?,
                Assertion::T => check_t(n, k)?,
            };
            report.checked += 1;
            if !r.holds {
                report.failures.push((n, k, r.details));
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    #[test]
    fn village_of_two() {
        let pm = build_village(2, &[]).unwrap();
        let m = pm.model();
        assert_eq!(m.world_count(), 4);
        let w1 = m.agent_id("w1").unwrap();
        assert_eq!(m.accessible(WorldId(0b00), w1).unwrap(), vec![WorldId(0b00), WorldId(0b01)]);
        assert_eq!(m.accessible(WorldId(0b10), w1).unwrap(), vec![WorldId(0b10), WorldId(0b11)]);
        assert_eq!(m.accessible(WorldId(0b11), w1).unwrap(), vec![WorldId(0b10), WorldId(0b11)]);
    }

    #[test]
    fn accessible_flips_own_bit() {
        let pm = build_village(1, &[1]).unwrap();
        assert_eq!(pm.actual(), WorldId(1));
        assert_eq!(pm.model().accessible(WorldId(1), pm.model().agent_id("w1").unwrap()).unwrap(), vec![WorldId(0), WorldId(1)]);
        let pm = build_village(3, &[1, 2, 3]).unwrap();
        let w1 = pm.model().agent_id("w1").unwrap();
        assert_eq!(pm.model().accessible(world_of([1, 2, 3]), w1).unwrap(), vec![world_of([2, 3]), world_of([1, 2, 3])]);
    }

    #[test]
    fn construction_guards() {
        assert_eq!(build_village(0, &[]).unwrap_err(), VillageError::NoMen);
        assert!(matches!(build_village(25, &[]), Err(VillageError::TooLarge { n: 25, .. })));
        assert!(build_village(25, &[]).unwrap_err().to_string().contains("fast engine"));
        assert_eq!(build_village(3, &[4]).unwrap_err(), VillageError::ManOutOfRange { man: 4, n: 3 });
        assert!(build_village_limited(4, &[], 8).is_err());
        assert!(build_village_limited(3, &[], 8).is_ok());
    }

    #[test]
    fn at_least_one_shapes() {
        assert_eq!(at_least_one(1), Formula::atom("u1"));
        assert_eq!(at_least_one(3).to_string(), "u1 | u2 | u3");
    }

    #[test]
    fn announce_removes_the_faithful_world() {
        let state = ProtocolState::new(build_village(2, &[1]).unwrap()).announce(at_least_one(2)).unwrap();
        assert_eq!(state.model().world_count(), 3);
        assert!(!state.model().contains(WorldId(0)));
        let state = ProtocolState::new(build_village(1, &[1]).unwrap()).announce(Formula::atom("u1")).unwrap();
        assert_eq!(state.model().world_count(), 1);
        assert!(holds(&state.pointed().unwrap(), &Formula::knows("w1", Formula::atom("u1"))).unwrap());
        let err = ProtocolState::new(build_village(2, &[]).unwrap()).announce(at_least_one(2)).unwrap_err();
        assert!(matches!(err, VillageError::TruthfulnessViolation(_)));
    }

    #[test]
    fn two_wives_first_morning_is_quiet() {
        let state = ProtocolState::new(build_village(2, &[1, 2]).unwrap()).announce(at_least_one(2)).unwrap();
        let (state, event) = state.step_morning(&BTreeSet::new()).unwrap();
        assert_eq!(event, DayEvent { morning: 1, killed: set(&[]), model_size_after: Some(1) });
        assert_eq!(state.model().worlds(), &[world_of([1, 2])]);
    }

    #[test]
    fn rebel_widow_collapses_the_model() {
        let state = ProtocolState::new(build_village(1, &[1]).unwrap()).announce(at_least_one(1)).unwrap();
        let (state, event) = state.step_morning(&set(&[1])).unwrap();
        assert!(event.killed.is_empty());
        assert_eq!(event.model_size_after, Some(0));
        assert!(state.is_collapsed());
        assert_eq!(state.step_morning(&set(&[1])).unwrap_err(), VillageError::Collapsed);
    }

    #[test]
    fn scenario_validation() {
        assert!(matches!(run_protocol(&ScenarioSpec::new(3, [])), Err(VillageError::TruthfulnessViolation(_))));
        assert!(matches!(
            run_protocol(&ScenarioSpec::new(3, [1]).with_deviants([5])),
            Err(VillageError::ManOutOfRange { man: 5, n: 3 })
        ));
        assert!(matches!(
            run_protocol_fast(&ScenarioSpec::new(3, [1]).with_deviants([1])),
            Err(VillageError::UnsupportedScenario(_))
        ));
    }

    #[test]
    fn basis_and_small_runs() {
        let trace = run_protocol(&ScenarioSpec::new(1, [1])).unwrap();
        assert_eq!(trace.events, vec![DayEvent { morning: 1, killed: set(&[1]), model_size_after: Some(1) }]);
        assert_eq!(trace.outcome, Outcome::Completed);

        let trace = run_protocol(&ScenarioSpec::new(5, [1, 3, 4])).unwrap();
        let killed: Vec<_> = trace.events.iter().map(|e| e.killed.clone()).collect();
        assert_eq!(killed, vec![set(&[]), set(&[]), set(&[1, 3, 4])]);
        assert_eq!(trace, run_protocol_fast(&ScenarioSpec::new(5, [1, 3, 4])).unwrap());
    }

    #[test]
    fn morning_limit_is_reported() {
        let trace = run_protocol(&ScenarioSpec::new(4, [1, 2, 3]).with_max_mornings(2)).unwrap();
        assert_eq!(trace.outcome, Outcome::MorningLimitReached);
        assert_eq!(trace.events.len(), 2);
        let fast = run_protocol_fast(&ScenarioSpec::new(4, [1, 2, 3]).with_max_mornings(2)).unwrap();
        assert_eq!(trace, fast);
    }

    #[test]
    fn secret_rebel_in_a_larger_village() {
        // Wife 1 knows on morning 1 but does not act; the quiet morning rules
        // out the actual world while {1,2} survives.
        let trace = run_protocol(&ScenarioSpec::new(2, [1]).with_deviants([1])).unwrap();
        assert_eq!(trace.outcome, Outcome::Collapsed { morning: 1 });
        assert_eq!(trace.events[0].model_size_after, Some(1));
    }

    #[test]
    fn fast_engine_at_a_hundred() {
        let trace = run_protocol_fast(&ScenarioSpec::new(100, 1..=100)).unwrap();
        assert_eq!(trace.quiet_mornings(), 99);
        assert_eq!(trace.events[99].killed.len(), 100);
        assert_eq!(trace.events[0].model_size_after, Some((1u128 << 100) - 1 - 100));
    }

    #[test]
    fn fast_engine_scales() {
        let trace = run_protocol_fast(&ScenarioSpec::new(1_000_000, [7, 999_999])).unwrap();
        assert_eq!(trace.events.len(), 2);
        assert_eq!(trace.events[1].killed, set(&[7, 999_999]));
        assert_eq!(trace.events[0].model_size_after, None);
    }

    #[test]
    fn suffix_sums_fit_at_the_edge() {
        let sums = suffix_binomial_sums(127).unwrap();
        assert_eq!(sums[0], 1u128 << 127);
        assert_eq!(sums[127], 1);
        assert!(suffix_binomial_sums(128).is_none());
    }

    #[test]
    fn check_examples() {
        assert!(check_s(1, 1).unwrap().holds);
        assert!(check_s(4, 4).unwrap().holds);
        assert!(check_t(2, 1).unwrap().holds);
        assert!(check_t(2, 2).unwrap().holds);
        assert!(matches!(check_t(13, 2), Err(VillageError::Guard { .. })));
        assert!(matches!(check_s(3, 0), Err(VillageError::Guard { .. })));
    }

    #[test]
    fn table_rendering() {
        let table = run_protocol(&ScenarioSpec::new(3, [1, 2])).unwrap().to_table();
        assert!(table.contains("no killings"));
        assert!(table.contains("killed: 1,2"));
        assert!(table.ends_with("outcome: completed\n"));
    }
}

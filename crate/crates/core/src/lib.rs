//! Multi-agent epistemic model checking for the unfaithful-husbands puzzle.
//!
//! * [`kripke`]: finite S5 models, restriction and reachability.
//! * [`formula`] and [`parser`]: the formula language.
//! * [`checker`]: truth, extensions, subjective probability and surprisal.
//! * [`village`]: the puzzle model, the morning-by-morning protocol and the
//!   assertion checks.
//! * [`model_file`]: JSON model documents.

pub mod checker;
pub mod formula;
pub mod kripke;
pub mod model_file;
pub mod parser;
pub mod village;

pub use checker::{extension, holds, info_content, subjective_probability, EvalError, Extension, Probability, Surprisal};
pub use formula::{nest_everyone, render, Formula, Group};
pub use kripke::{AgentId, KripkeModel, ModelError, PointedModel, ValidationReport, Violation, WorldId};
pub use model_file::{load_model, validate, LoadError, ModelDoc};
pub use parser::{parse, ParseError, GRAMMAR};
pub use village::{
    at_least_one, build_village, check_s, check_t, run_protocol, run_protocol_fast, Assertion, AssertionReport,
    DayEvent, Outcome, ProtocolState, ScenarioSpec, Trace, VillageError,
};

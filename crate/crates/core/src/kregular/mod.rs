//! k-regular sequence engine: linear-representation evaluation, closure
//! constructions, recurrence-system evaluation, relation verification and
//! exact relation guessing.

mod guess;
mod recurrence;
mod rep;

pub use guess::{guess_relations, GuessConfig, GuessError};
pub use recurrence::{
    eval_recurrence, rep_from_system, verify_relations, ClassRef, Evaluator, RecurrenceError,
    RecurrenceSystem, Relation, RelationReport, Term, Violation,
};
pub use rep::{
    eval_rep, rep_mod, rep_product, rep_sum, LinearRep, LinearRepresentation, RepError,
    DEFAULT_STATE_CAP,
};

//! Enumeration and evaluation of object-relational mapping alternatives.
//!
//! An [`ObjectModel`] is parsed from the `.om` DSL, every legal assignment of
//! mapping strategies is turned into a relational schema, and the schemas are
//! scored, clustered and filtered down to a Pareto front.

pub mod dsl;
pub mod mapping;
pub mod metrics;
pub mod model;
pub mod split;
pub mod sql;
pub mod synth;
pub mod tradeoff;
pub mod validator;

pub use dsl::{check_source, parse_model, print_model, ParseError};
pub use mapping::{
    build_schema, AssociationStrategy, ClassStrategy, Field, FieldKind, ForeignKey, Infeasible,
    InfeasibleRule, MappingCandidate, StrategyAssignment, Table,
};
pub use metrics::{metric_vector, ClassMetrics, MetricVector, METRIC_NAMES};
pub use model::{
    validate_model, Association, Attribute, Class, Diagnostic, DiagnosticCode, Multiplicity,
    ObjectModel,
};
pub use split::{component_pins, compose, find_bridges, split, ModelGraph, Selection, SplitResult};
pub use sql::emit_sql;
pub use synth::{
    apply_preset, enumerate, enumerate_with, EnumerateOptions, PinSet, Preset, SynthesisError,
    SynthesisResult,
};
pub use tradeoff::{cluster, pareto, radar, EquivalenceClass, ParetoReport};

//! Executable semantics for a timed process calculus of IoT networks:
//! located, possibly mobile nodes with sensors, actuators and ranged
//! channels.

pub mod congruence;
pub mod equivalence;
pub mod error;
pub mod frontend;
pub mod lts;
pub mod meta;
pub mod models;
pub mod reduction;
pub mod syntax;
pub mod universe;
pub mod value;

pub use congruence::{canonicalize, congruent, structural_hash};
pub use error::{Error, Result};
pub use syntax::{
    check_well_formed, free_channels, substitute, BoolExpr, CommAction, Interface, Mobility, Network, Node, Prefix,
    Process, ValueExpr, Violation,
};
pub use universe::{load_universe, ModelUniverse, Range, SensorKind, UniverseDecl};
pub use value::{Name, Value};
pub use equivalence::{expansion, weak_bisimilar, weak_bisimilar_across, EquivalenceVerdict, Move, Outcome, Side};
pub use frontend::{parse_model, parse_network, parse_process, print_model, print_network, print_process};
pub use lts::{build_lts, Label, Mode, TransitionSystem};
pub use meta::{check_harmony, check_time_properties, rd_bound, PropertyReport};
pub use reduction::{barbs, reductions, update_sensor, Barb, Engine, ReductionLabel};

//! Fixtures shared by the benchmarks.

use cait_core::models::{build_smart_home, light_subsystem, ScenarioConfig, Variant};
use cait_core::{parse_model, parse_network, ModelUniverse, Network};

pub fn smart_home(variant: Variant) -> (ModelUniverse, Network) {
    build_smart_home(&ScenarioConfig::with_variant(variant)).expect("bundled model")
}

pub fn lights(variant: Variant) -> (ModelUniverse, Network) {
    light_subsystem(&ScenarioConfig::with_variant(variant)).expect("bundled model")
}

const WRITES: &str = "
location h
delta 0
actuator a domain {0, 1}
network
0
";

/// Two single-node networks that write the same values on one actuator,
/// in parallel and in sequence.
pub fn writers() -> (ModelUniverse, Network, Network) {
    let (u, _) = parse_model(WRITES).expect("bundled model");
    let split = parse_network("n[a = 0 |> a!1 | a!0.a!1] stat @ h", &u).expect("bundled network");
    let seq = parse_network("n[a = 0 |> a!1.a!0.a!1] stat @ h", &u).expect("bundled network");
    (u, split, seq)
}

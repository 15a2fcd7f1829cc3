use std::collections::BTreeSet;
use std::path::PathBuf;

use cait_core::lts::extensional_transitions;
use cait_core::models::{light_subsystem_text, smart_home_text, ScenarioConfig, Variant};
use cait_core::syntax::Process;
use cait_core::{
    barbs, build_lts, canonicalize, check_well_formed, parse_model, print_model, Barb, Label, Mode, ModelUniverse,
    Network, Node,
};

const BUDGET: usize = 100_000;

fn models_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn bundled() -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = std::fs::read_dir(models_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "cait"))
        .map(|p| {
            let name = p.file_stem().unwrap().to_string_lossy().into_owned();
            (name, std::fs::read_to_string(&p).unwrap())
        })
        .collect();
    out.sort();
    out
}

fn small() -> Vec<(String, ModelUniverse, Network)> {
    bundled()
        .into_iter()
        .filter(|(name, _)| !name.starts_with("smart_home"))
        .map(|(name, text)| {
            let (u, net) = parse_model(&text).unwrap();
            (name, u, net)
        })
        .collect()
}

#[test]
fn every_bundled_model_round_trips() {
    let models = bundled();
    assert!(models.len() >= 9);
    for (name, text) in models {
        let (u, net) = parse_model(&text).unwrap_or_else(|e| panic!("{name}: {e}"));
        let printed = print_model(&u, &net);
        let (u2, net2) = parse_model(&printed).unwrap_or_else(|e| panic!("{name}: {e}\n{printed}"));
        assert_eq!(u.to_decl(), u2.to_decl(), "{name}");
        assert_eq!(net, net2, "{name}");
        assert_eq!(print_model(&u2, &net2), printed, "{name}");
    }
}

#[test]
fn smart_home_files_match_the_builder() {
    for (variant, suffix) in [(Variant::Proximity, "proximity"), (Variant::Gps, "gps")] {
        let cfg = ScenarioConfig::with_variant(variant);
        let dir = models_dir();
        let full = std::fs::read_to_string(dir.join(format!("smart_home_{suffix}.cait"))).unwrap();
        let lights = std::fs::read_to_string(dir.join(format!("lights_{suffix}.cait"))).unwrap();
        assert_eq!(full, smart_home_text(&cfg).unwrap());
        assert_eq!(lights, light_subsystem_text(&cfg).unwrap());
    }
}

fn actuator_barbs(ts: &[(Label, Network)]) -> BTreeSet<Barb> {
    ts.iter()
        .filter_map(|(l, _)| match l {
            Label::ActuatorEnv {
                actuator,
                location,
                value,
            } => Some(Barb {
                actuator: actuator.clone(),
                location: location.clone(),
                value: value.clone(),
            }),
            _ => None,
        })
        .collect()
}

#[test]
fn reachable_states_stay_well_formed_and_show_their_barbs() {
    for (name, u, net) in small() {
        let lts = build_lts(&net, &u, Mode::Extensional, BUDGET).unwrap();
        for m in &lts.states {
            assert!(check_well_formed(m, &u).is_empty(), "{name}");
            let ts = extensional_transitions(m, &u).unwrap();
            assert_eq!(actuator_barbs(&ts), barbs(m), "{name}");
        }
    }
}

/// Congruent rewrites of `net`: reversed node and component order, plus a
/// spare `nil` in every node.
fn shuffled(net: &Network) -> Network {
    let mut nodes: Vec<Node> = net
        .nodes
        .iter()
        .map(|n| {
            let mut parts: Vec<Process> = n.process.components().to_vec();
            parts.reverse();
            parts.push(Process::Nil);
            Node {
                process: Process::Par(parts),
                ..n.clone()
            }
        })
        .collect();
    nodes.reverse();
    let mut restricted = net.restricted.clone();
    restricted.reverse();
    Network { restricted, nodes }
}

#[test]
fn congruent_states_have_the_same_transitions() {
    for (name, u, net) in small() {
        let lts = build_lts(&net, &u, Mode::Extensional, BUDGET).unwrap();
        for m in &lts.states {
            let n = shuffled(m);
            assert_ne!(&n, m);
            assert_eq!(&canonicalize(&n), m);
            let mut a = extensional_transitions(m, &u).unwrap();
            let mut b = extensional_transitions(&n, &u).unwrap();
            a.sort();
            b.sort();
            assert_eq!(a, b, "{name}");
        }
    }
}

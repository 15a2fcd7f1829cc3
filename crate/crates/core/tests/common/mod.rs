//! Random well-formed networks over a small fixed universe.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use cait_core::frontend::parse_model;
use cait_core::syntax::{BoolExpr, CommAction, Interface, Mobility, Network, Node, Prefix, Process, ValueExpr};
use cait_core::{reductions, ModelUniverse, Name, Value};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const UNIVERSE: &str = "
location h, k
dist h k 1
delta 1
channel l range local domain {0, 1}
channel c range 1 domain {0, 1}
channel g range inf domain {0, 1}
sensor s node domain {0, 1}
sensor t location domain {0, 1}
actuator a domain {0, 1}
actuator b domain {0, 1}
actuator e domain {0, 1}
network
0
";

pub const MAX_DEPTH: u32 = 6;
pub const MAX_NODES: usize = 3;

pub fn universe() -> ModelUniverse {
    parse_model(UNIVERSE).expect("generator universe").0
}

struct Scope {
    actuators: Vec<Name>,
    sensors: Vec<Name>,
    ints: Vec<Name>,
    locs: Vec<Name>,
    // recursion variables: (name, already under a time guard)
    recs: Vec<(Name, bool)>,
    fresh: usize,
}

impl Scope {
    fn fresh(&mut self, base: &str) -> Name {
        self.fresh += 1;
        Name::new(&format!("{base}{}", self.fresh))
    }

    fn guarded(&self) -> Vec<Name> {
        // innermost binding of each name wins
        let mut out: Vec<Name> = Vec::new();
        for (i, (x, g)) in self.recs.iter().enumerate() {
            let shadowed = self.recs[i + 1..].iter().any(|(y, _)| y == x);
            if *g && !shadowed {
                out.push(x.clone());
            }
        }
        out
    }

    fn with_time_guard<T>(&mut self, f: impl FnOnce(&mut Scope) -> T) -> T {
        let saved: Vec<bool> = self.recs.iter().map(|r| r.1).collect();
        for r in &mut self.recs {
            r.1 = true;
        }
        let out = f(self);
        for (r, g) in self.recs.iter_mut().zip(saved) {
            r.1 = g;
        }
        out
    }
}

fn bit(rng: &mut StdRng) -> Value {
    Value::Int(rng.gen_range(0..2))
}

fn int_expr(rng: &mut StdRng, scope: &Scope) -> ValueExpr {
    if !scope.ints.is_empty() && rng.gen_bool(0.5) {
        ValueExpr::Var(scope.ints[rng.gen_range(0..scope.ints.len())].clone())
    } else {
        ValueExpr::Lit(bit(rng))
    }
}

fn channel(rng: &mut StdRng) -> Name {
    Name::new(["l", "c", "g"][rng.gen_range(0..3)])
}

fn guard(rng: &mut StdRng, scope: &Scope) -> BoolExpr {
    let lhs = int_expr(rng, scope);
    let rhs = ValueExpr::Lit(bit(rng));
    let b = if rng.gen_bool(0.5) {
        BoolExpr::Eq(lhs, rhs)
    } else {
        BoolExpr::Lt(lhs, rhs)
    };
    if rng.gen_bool(0.2) {
        BoolExpr::Not(Box::new(b))
    } else {
        b
    }
}

fn leaf(rng: &mut StdRng, scope: &Scope) -> Process {
    let vars = scope.guarded();
    if !vars.is_empty() && rng.gen_bool(0.6) {
        Process::Var(vars[rng.gen_range(0..vars.len())].clone())
    } else {
        Process::Nil
    }
}

fn process(rng: &mut StdRng, scope: &mut Scope, depth: u32) -> Process {
    if depth == 0 {
        return leaf(rng, scope);
    }
    let d = depth - 1;
    match rng.gen_range(0..11) {
        0 => leaf(rng, scope),
        1 => scope.with_time_guard(|s| Process::sleep(process(rng, s, d))),
        2 if !scope.actuators.is_empty() => {
            let a = scope.actuators[rng.gen_range(0..scope.actuators.len())].clone();
            let value = int_expr(rng, scope);
            Process::prefix(Prefix::WriteActuator { value, actuator: a }, process(rng, scope, d))
        }
        3 if !scope.sensors.is_empty() => {
            let sensor = scope.sensors[rng.gen_range(0..scope.sensors.len())].clone();
            let var = scope.fresh("x");
            scope.ints.push(var.clone());
            let p = process(rng, scope, d);
            scope.ints.pop();
            Process::prefix(Prefix::ReadSensor { var, sensor }, p)
        }
        4 => {
            let x = scope.fresh("y");
            scope.locs.push(x.clone());
            let b = BoolExpr::Eq(ValueExpr::Var(x.clone()), ValueExpr::Lit(Value::loc("h")));
            let then = process(rng, scope, d.saturating_sub(1));
            let otherwise = process(rng, scope, d.saturating_sub(1));
            scope.locs.pop();
            Process::prefix(Prefix::GetPos(x), Process::cond(b, then, otherwise))
        }
        5 | 6 => {
            let channel = channel(rng);
            let (pi, bound) = if rng.gen_bool(0.5) {
                let payload = int_expr(rng, scope);
                (CommAction::Send { channel, payload }, None)
            } else {
                let x = scope.fresh("z");
                (
                    CommAction::Receive {
                        channel,
                        bind: Some(x.clone()),
                    },
                    Some(x),
                )
            };
            if let Some(x) = &bound {
                scope.ints.push(x.clone());
            }
            let then = process(rng, scope, d);
            if bound.is_some() {
                scope.ints.pop();
            }
            let otherwise = scope.with_time_guard(|s| process(rng, s, d));
            Process::timeout(pi, then, otherwise)
        }
        7 => {
            let b = guard(rng, scope);
            let then = process(rng, scope, d);
            let otherwise = process(rng, scope, d);
            Process::cond(b, then, otherwise)
        }
        // parallel composition under recursion replicates without bound
        8 if scope.recs.is_empty() => {
            let a = process(rng, scope, d);
            let b = process(rng, scope, d);
            Process::par(a, b)
        }
        9 | 10 => {
            let x = scope.fresh("X");
            scope.recs.push((x.clone(), false));
            let body = process(rng, scope, d);
            scope.recs.pop();
            Process::Fix(x, std::sync::Arc::new(body))
        }
        _ => leaf(rng, scope),
    }
}

/// A random closed, time-guarded, well-formed network.
pub fn random_network(seed: u64) -> Network {
    let mut rng = StdRng::seed_from_u64(seed);
    let count = rng.gen_range(1..=MAX_NODES);
    let mut nodes = Vec::new();
    for i in 0..count {
        let mobility = if rng.gen_bool(0.3) {
            Mobility::Mobile
        } else {
            Mobility::Stationary
        };
        let mut interface = Interface::default();
        let actuator = Name::new(["a", "b", "e"][i]);
        if rng.gen_bool(0.7) {
            interface.actuators.insert(actuator, bit(&mut rng));
        }
        if i == 0 && rng.gen_bool(0.6) {
            interface.sensors.insert(Name::new("s"), bit(&mut rng));
        }
        if mobility == Mobility::Stationary && rng.gen_bool(0.4) {
            interface.sensors.insert(Name::new("t"), bit(&mut rng));
        }
        let mut scope = Scope {
            actuators: interface.actuators.keys().cloned().collect(),
            sensors: interface.sensors.keys().cloned().collect(),
            ints: Vec::new(),
            locs: Vec::new(),
            recs: Vec::new(),
            fresh: 0,
        };
        let process = process(&mut rng, &mut scope, MAX_DEPTH);
        nodes.push(Node {
            name: Name::new(&format!("n{i}")),
            interface,
            process,
            mobility,
            location: Name::new(["h", "k"][rng.gen_range(0..2)]),
        });
    }
    let mut net = Network {
        restricted: Vec::new(),
        nodes,
    };
    for c in ["c", "g"] {
        if rng.gen_bool(0.3) {
            net = net.restrict(Name::new(c));
        }
    }
    net
}

/// Longest sequence of instantaneous reductions from `net`, by exhaustive
/// depth-first search. `None` if an instantaneous cycle is reachable.
pub fn longest_chain(
    net: &Network,
    u: &ModelUniverse,
    memo: &mut HashMap<Network, u64>,
    active: &mut HashSet<Network>,
) -> Option<u64> {
    if let Some(&n) = memo.get(net) {
        return Some(n);
    }
    if !active.insert(net.clone()) {
        return None;
    }
    let mut best = 0;
    for (label, next) in reductions(net, u).unwrap() {
        if label.is_instantaneous() {
            best = best.max(1 + longest_chain(&next, u, memo, active)?);
        }
    }
    active.remove(net);
    memo.insert(net.clone(), best);
    Some(best)
}

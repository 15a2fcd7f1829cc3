//! Reduction semantics: instantaneous (`tau`, actuator changes) and timed
//! reductions, barbs, and environmental sensor updates.
//!
//! Redexes are located by walking each node process down to its active
//! leaves (prefixes and timeouts), unfolding recursion and resolving guards
//! only along the way. The reduct is rebuilt along the same paths, so
//! untouched parallel components keep their folded shape.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use rustc_hash::FxHashSet;
use serde::Serialize;

use crate::congruence::canonicalize;
use crate::error::{Error, Result};
use crate::syntax::{check_well_formed, substitute, unfold, CommAction, Mobility, Network, Prefix, Process};
use crate::universe::{ModelUniverse, Range};
use crate::value::{Name, Value};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum ReductionLabel {
    Tau,
    Act(Name),
    TimeStep,
}

impl ReductionLabel {
    pub fn is_instantaneous(&self) -> bool {
        !matches!(self, ReductionLabel::TimeStep)
    }
}

impl fmt::Display for ReductionLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReductionLabel::Tau => f.write_str("tau"),
            ReductionLabel::Act(a) => write!(f, "act({a})"),
            ReductionLabel::TimeStep => f.write_str("sigma"),
        }
    }
}

/// `a@h!v`: actuator `a` at location `h` currently shows `v`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub struct Barb {
    pub actuator: Name,
    pub location: Name,
    pub value: Value,
}

impl fmt::Display for Barb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}!{}", self.actuator, self.location, self.value)
    }
}

/// Deliberately broken semantics, used to show that the meta-theory checks
/// can fail.
#[cfg(feature = "mutants")]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mutation {
    /// Let time pass even when a cross-node communication is enabled.
    DropTimeParNegativePremise,
    /// The labelled semantics gives recursion no transitions.
    DropFix,
}

/// Engine configuration. The default is the faithful semantics.
#[derive(Clone, Copy, Default, Debug, PartialEq, Eq)]
pub struct Engine {
    pub(crate) drop_timepar_premise: bool,
    pub(crate) drop_fix: bool,
}

impl Engine {
    #[cfg(feature = "mutants")]
    pub fn mutant(m: Mutation) -> Engine {
        match m {
            Mutation::DropTimeParNegativePremise => Engine {
                drop_timepar_premise: true,
                ..Engine::default()
            },
            Mutation::DropFix => Engine {
                drop_fix: true,
                ..Engine::default()
            },
        }
    }
}

/// Checks the preconditions shared by every semantic operation.
pub fn validate(net: &Network, u: &ModelUniverse) -> Result<()> {
    let violations = check_well_formed(net, u);
    if !violations.is_empty() {
        return Err(Error::IllFormed(violations));
    }
    net.check_closed()
}

/// All one-step reducts of `net`, canonicalized and deduplicated.
pub fn reductions(net: &Network, u: &ModelUniverse) -> Result<Vec<(ReductionLabel, Network)>> {
    validate(net, u)?;
    Ok(Engine::default().reductions(net, u))
}

struct Leaf {
    path: Vec<usize>,
    active: Process,
}

fn leaves(p: &Process, path: &mut Vec<usize>, out: &mut Vec<Leaf>) {
    match p {
        Process::Nil => {}
        Process::Par(ps) => {
            for (i, q) in ps.iter().enumerate() {
                path.push(i);
                leaves(q, path, out);
                path.pop();
            }
        }
        Process::Cond(b, then, otherwise) => match b.eval() {
            Some(true) => leaves(then, path, out),
            Some(false) => leaves(otherwise, path, out),
            None => out.push(Leaf {
                path: path.clone(),
                active: p.clone(),
            }),
        },
        Process::Fix(x, body) => leaves(&unfold(x, body), path, out),
        _ => out.push(Leaf {
            path: path.clone(),
            active: p.clone(),
        }),
    }
}

fn node_leaves(p: &Process) -> Vec<Leaf> {
    let mut out = Vec::new();
    leaves(p, &mut Vec::new(), &mut out);
    out
}

/// Replaces the leaves at the given paths, unfolding and resolving along
/// the paths exactly as `leaves` did.
fn rebuild(p: &Process, holes: &[(&[usize], Process)]) -> Process {
    if holes.is_empty() {
        return p.clone();
    }
    if let Some((_, q)) = holes.iter().find(|(path, _)| path.is_empty()) {
        return q.clone();
    }
    match p {
        Process::Par(ps) => Process::Par(
            ps.iter()
                .enumerate()
                .map(|(i, q)| {
                    let sub: Vec<(&[usize], Process)> = holes
                        .iter()
                        .filter(|(path, _)| path[0] == i)
                        .map(|(path, r)| (&path[1..], r.clone()))
                        .collect();
                    rebuild(q, &sub)
                })
                .collect(),
        ),
        Process::Cond(b, then, otherwise) => match b.eval() {
            Some(true) => rebuild(then, holes),
            _ => rebuild(otherwise, holes),
        },
        Process::Fix(x, body) => rebuild(&unfold(x, body), holes),
        _ => unreachable!("hole path does not address a leaf"),
    }
}

/// Residue of a leaf after one time unit, if it can let time pass.
fn time_residue(leaf: &Process) -> Option<Process> {
    match leaf {
        Process::Prefix(Prefix::Sleep, cont) => Some(cont.as_ref().clone()),
        Process::Timeout(_, _, otherwise) => Some(otherwise.as_ref().clone()),
        _ => None,
    }
}

fn send_parts(leaf: &Process) -> Option<(&Name, &Value, &Process)> {
    match leaf {
        Process::Timeout(CommAction::Send { channel, payload }, then, _) => Some((channel, payload.closed()?, then)),
        _ => None,
    }
}

fn receive_parts(leaf: &Process) -> Option<(&Name, &Option<Name>, &Process)> {
    match leaf {
        Process::Timeout(CommAction::Receive { channel, bind }, then, _) => Some((channel, bind, then)),
        _ => None,
    }
}

fn received(bind: &Option<Name>, cont: &Process, v: &Value) -> Process {
    match bind {
        Some(x) => substitute(cont, x, v),
        None => cont.clone(),
    }
}

impl Engine {
    /// One-step reducts without validating the input. Callers must ensure
    /// `net` is closed and well-formed.
    pub fn reductions(&self, net: &Network, u: &ModelUniverse) -> Vec<(ReductionLabel, Network)> {
        let mut out = Vec::new();
        let all_leaves: Vec<Vec<Leaf>> = net.nodes.iter().map(|n| node_leaves(&n.process)).collect();
        // tau reductions of each node in isolation
        let mut node_has_tau = vec![false; net.nodes.len()];

        for (i, node) in net.nodes.iter().enumerate() {
            let ls = &all_leaves[i];
            let with = |holes: &[(&[usize], Process)]| {
                let mut m = net.clone();
                m.nodes[i].process = rebuild(&node.process, holes);
                m
            };
            for leaf in ls {
                match &leaf.active {
                    Process::Prefix(Prefix::GetPos(x), cont) => {
                        let r = substitute(cont, x, &Value::Loc(node.location.clone()));
                        out.push((ReductionLabel::Tau, with(&[(&leaf.path, r)])));
                        node_has_tau[i] = true;
                    }
                    Process::Prefix(Prefix::ReadSensor { var, sensor }, cont) => {
                        if let Some(v) = node.interface.sensors.get(sensor) {
                            out.push((ReductionLabel::Tau, with(&[(&leaf.path, substitute(cont, var, v))])));
                            node_has_tau[i] = true;
                        }
                    }
                    Process::Prefix(Prefix::WriteActuator { value, actuator }, cont) => {
                        let (Some(v), Some(current)) = (value.closed(), node.interface.actuators.get(actuator))
                        else {
                            continue;
                        };
                        let mut m = with(&[(&leaf.path, cont.as_ref().clone())]);
                        if current == v {
                            out.push((ReductionLabel::Tau, m));
                            node_has_tau[i] = true;
                        } else {
                            m.nodes[i].interface.actuators.insert(actuator.clone(), v.clone());
                            out.push((ReductionLabel::Act(actuator.clone()), m));
                        }
                    }
                    _ => {}
                }
            }
            // intra-node communication on local channels
            for s in ls {
                let Some((c, v, then)) = send_parts(&s.active) else { continue };
                if u.range(c) != Some(Range::Local) {
                    continue;
                }
                for r in ls {
                    if r.path == s.path {
                        continue;
                    }
                    let Some((c2, bind, cont)) = receive_parts(&r.active) else { continue };
                    if c2 != c {
                        continue;
                    }
                    let holes = [(&s.path[..], then.clone()), (&r.path[..], received(bind, cont, v))];
                    out.push((ReductionLabel::Tau, with(&holes)));
                    node_has_tau[i] = true;
                }
            }
        }

        // inter-node communication
        let mut global_tau = false;
        for (i, sender) in net.nodes.iter().enumerate() {
            for s in &all_leaves[i] {
                let Some((c, v, then)) = send_parts(&s.active) else { continue };
                for (j, receiver) in net.nodes.iter().enumerate() {
                    if i == j || !u.in_range(c, &sender.location, &receiver.location) {
                        continue;
                    }
                    for r in &all_leaves[j] {
                        let Some((c2, bind, cont)) = receive_parts(&r.active) else { continue };
                        if c2 != c {
                            continue;
                        }
                        let mut m = net.clone();
                        m.nodes[i].process = rebuild(&sender.process, &[(&s.path, then.clone())]);
                        m.nodes[j].process = rebuild(&receiver.process, &[(&r.path, received(bind, cont, v))]);
                        out.push((ReductionLabel::Tau, m));
                        global_tau = true;
                    }
                }
            }
        }

        let network_tau = global_tau || node_has_tau.iter().any(|t| *t);
        if !network_tau || self.drop_timepar_premise {
            self.time_steps(net, u, &all_leaves, &node_has_tau, &mut out);
        }

        let mut out: Vec<(ReductionLabel, Network)> =
            out.into_iter().map(|(l, m)| (l, canonicalize(&m))).collect();
        out.sort();
        out.dedup();
        out
    }

    fn time_steps(
        &self,
        net: &Network,
        u: &ModelUniverse,
        all_leaves: &[Vec<Leaf>],
        node_has_tau: &[bool],
        out: &mut Vec<(ReductionLabel, Network)>,
    ) {
        let mut stepped = net.clone();
        let mut moves: Vec<(usize, Vec<Name>)> = Vec::new();
        for (i, node) in net.nodes.iter().enumerate() {
            if node_has_tau[i] {
                return;
            }
            let mut holes = Vec::new();
            for leaf in &all_leaves[i] {
                match time_residue(&leaf.active) {
                    Some(r) => holes.push((&leaf.path[..], r)),
                    None => return,
                }
            }
            stepped.nodes[i].process = rebuild(&node.process, &holes);
            if node.mobility == Mobility::Mobile {
                moves.push((i, u.reachable_locations(&node.location, u.delta())));
            }
        }
        // one successor per combination of mobile-node destinations
        let mut successors = vec![stepped];
        for (i, targets) in moves {
            successors = successors
                .into_iter()
                .flat_map(|m| {
                    targets.iter().map(move |k| {
                        let mut m = m.clone();
                        m.nodes[i].location = k.clone();
                        m
                    })
                })
                .collect();
        }
        out.extend(successors.into_iter().map(|m| (ReductionLabel::TimeStep, m)));
    }
}

/// The strong barbs of `net`.
pub fn barbs(net: &Network) -> BTreeSet<Barb> {
    net.nodes
        .iter()
        .flat_map(|n| {
            n.interface.actuators.iter().map(move |(a, v)| Barb {
                actuator: a.clone(),
                location: n.location.clone(),
                value: v.clone(),
            })
        })
        .collect()
}

/// `net[s@h -> v]`: nodes at `h` that define `s` get the new value.
pub fn update_sensor(net: &Network, u: &ModelUniverse, s: &Name, h: &Name, v: &Value) -> Result<Network> {
    let decl = u.sensor(s).ok_or_else(|| Error::dangling("sensor", s))?;
    if !decl.domain.contains(v) {
        return Err(Error::DomainViolation {
            name: s.to_string(),
            value: v.to_string(),
        });
    }
    if !u.has_location(h) {
        return Err(Error::dangling("location", h));
    }
    let mut m = net.clone();
    for node in m.nodes.iter_mut() {
        if &node.location == h {
            if let Some(slot) = node.interface.sensors.get_mut(s) {
                *slot = v.clone();
            }
        }
    }
    Ok(m)
}

/// Breadth-first reachability under the reductions whose label satisfies
/// `follow`. Returns canonical states in discovery order.
pub(crate) fn reachable_by(
    engine: Engine,
    net: &Network,
    u: &ModelUniverse,
    budget: usize,
    follow: impl Fn(&ReductionLabel) -> bool,
) -> Result<Vec<Network>> {
    let start = canonicalize(net);
    let mut seen: FxHashSet<Network> = FxHashSet::default();
    let mut order = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(start.clone());
    queue.push_back(start);
    while let Some(m) = queue.pop_front() {
        for (l, m2) in engine.reductions(&m, u) {
            if follow(&l) && !seen.contains(&m2) {
                if seen.len() >= budget {
                    return Err(Error::StateSpaceBudgetExceeded {
                        limit: budget,
                        frontier: queue.len() + 1,
                        sample: queue.iter().take(3).map(crate::frontend::print_network).collect(),
                    });
                }
                seen.insert(m2.clone());
                queue.push_back(m2);
            }
        }
        order.push(m);
    }
    Ok(order)
}

/// `net` weakly exhibits `b`: some state reachable through `tau` and time
/// steps (never actuator changes) has the barb.
pub fn weak_barb(net: &Network, b: &Barb, u: &ModelUniverse, budget: usize) -> Result<bool> {
    validate(net, u)?;
    let states = reachable_by(Engine::default(), net, u, budget, |l| !matches!(l, ReductionLabel::Act(_)))?;
    Ok(states.iter().any(|m| barbs(m).contains(b)))
}

/// Every state reachable by instantaneous reductions alone, `net` included.
/// Finite for every well-formed network.
pub fn instantaneous_closure(net: &Network, u: &ModelUniverse) -> Result<Vec<Network>> {
    validate(net, u)?;
    reachable_by(Engine::default(), net, u, usize::MAX, ReductionLabel::is_instantaneous)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{Interface, Node, ValueExpr};
    use crate::universe::{load_universe, SensorKind, UniverseDecl};

    fn n(s: &str) -> Name {
        Name::new(s)
    }

    fn universe() -> ModelUniverse {
        load_universe(&UniverseDecl {
            locations: vec![n("h"), n("k")],
            distances: vec![(n("h"), n("k"), 1)],
            delta: 1,
            channels: vec![
                (n("c"), Range::Infinite, None),
                (n("l"), Range::Local, Some(vec![Value::Int(0), Value::Int(1)])),
                (n("near"), Range::Finite(0), None),
            ],
            sensors: vec![(n("s"), SensorKind::NodeDependent, vec![Value::Int(0), Value::Int(1)])],
            actuators: vec![(n("a"), vec![Value::Int(0), Value::Int(1)])],
        })
        .unwrap()
    }

    fn write(v: i64, cont: Process) -> Process {
        Process::prefix(
            Prefix::WriteActuator {
                value: ValueExpr::Lit(Value::Int(v)),
                actuator: n("a"),
            },
            cont,
        )
    }

    fn send(c: &str, v: Value, then: Process, otherwise: Process) -> Process {
        Process::timeout(
            CommAction::Send {
                channel: n(c),
                payload: ValueExpr::Lit(v),
            },
            then,
            otherwise,
        )
    }

    fn recv(c: &str, x: Option<&str>, then: Process, otherwise: Process) -> Process {
        Process::timeout(
            CommAction::Receive {
                channel: n(c),
                bind: x.map(n),
            },
            then,
            otherwise,
        )
    }

    fn node(name: &str, iface: Interface, p: Process, mobility: Mobility, at: &str) -> Node {
        Node {
            name: n(name),
            interface: iface,
            process: p,
            mobility,
            location: n(at),
        }
    }

    fn actuator_iface(v: i64) -> Interface {
        let mut i = Interface::default();
        i.actuators.insert(n("a"), Value::Int(v));
        i
    }

    /// `n[a=0 |> a!1 | a!0.a!1]`
    fn two_writers() -> Network {
        Network::node(node(
            "n",
            actuator_iface(0),
            Process::Par(vec![write(1, Process::Nil), write(0, write(1, Process::Nil))]),
            Mobility::Stationary,
            "h",
        ))
    }

    #[test]
    fn actuator_writes_split_into_tau_and_act() {
        let labels: BTreeSet<_> = reductions(&two_writers(), &universe())
            .unwrap()
            .into_iter()
            .map(|(l, _)| l)
            .collect();
        assert_eq!(labels, [ReductionLabel::Tau, ReductionLabel::Act(n("a"))].into_iter().collect());
    }

    #[test]
    fn empty_network_lets_time_pass() {
        let r = reductions(&Network::empty(), &universe()).unwrap();
        assert_eq!(r, vec![(ReductionLabel::TimeStep, Network::empty())]);
    }

    #[test]
    fn instantaneous_closure_of_two_writers() {
        // Oracle: a state is the multiset of remaining write sequences plus
        // the actuator value; a step pops the head of one sequence and
        // stores it.
        let mut seen = BTreeSet::new();
        let mut stack = vec![(vec![vec![1i64], vec![0, 1]], 0i64)];
        while let Some((chains, a)) = stack.pop() {
            let mut key = chains.clone();
            key.sort();
            if !seen.insert((key, a)) {
                continue;
            }
            for i in 0..chains.len() {
                let mut next = chains.clone();
                let v = next[i].remove(0);
                if next[i].is_empty() {
                    next.remove(i);
                }
                stack.push((next, v));
            }
        }
        let closure = instantaneous_closure(&two_writers(), &universe()).unwrap();
        assert_eq!(closure.len(), seen.len());
        assert_eq!(closure.len(), 6);
    }

    #[test]
    fn time_is_blocked_by_pending_global_communication() {
        let u = universe();
        let m = Network {
            restricted: vec![],
            nodes: vec![
                node("p", Interface::default(), send("c", Value::Unit, Process::Nil, Process::Nil), Mobility::Stationary, "h"),
                node("q", Interface::default(), recv("c", None, Process::Nil, Process::Nil), Mobility::Stationary, "k"),
            ],
        };
        let r = reductions(&m, &u).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, ReductionLabel::Tau);
        #[cfg(feature = "mutants")]
        {
            let broken = Engine::mutant(Mutation::DropTimeParNegativePremise).reductions(&m, &u);
            assert!(broken.iter().any(|(l, _)| *l == ReductionLabel::TimeStep));
        }
    }

    #[test]
    fn short_range_channel_needs_proximity() {
        let u = universe();
        let mk = |at: &str| Network {
            restricted: vec![],
            nodes: vec![
                node("p", Interface::default(), send("near", Value::Unit, Process::Nil, Process::Nil), Mobility::Stationary, "h"),
                node("q", Interface::default(), recv("near", None, Process::Nil, Process::Nil), Mobility::Stationary, at),
            ],
        };
        assert!(reductions(&mk("h"), &u).unwrap().iter().all(|(l, _)| *l == ReductionLabel::Tau));
        assert!(reductions(&mk("k"), &u).unwrap().iter().all(|(l, _)| *l == ReductionLabel::TimeStep));
    }

    #[test]
    fn local_channels_only_within_a_node() {
        let u = universe();
        let p = Process::Par(vec![
            send("l", Value::Int(1), Process::Nil, Process::Nil),
            recv("l", Some("x"), write(0, Process::Nil), Process::Nil),
        ]);
        let m = Network::node(node("n", actuator_iface(0), p, Mobility::Stationary, "h"));
        let r = reductions(&m, &u).unwrap();
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].0, ReductionLabel::Tau);
    }

    #[test]
    fn mobile_nodes_fan_out_over_reachable_locations() {
        let u = universe();
        let m = Network::node(node("n", Interface::default(), Process::sleep(Process::Nil), Mobility::Mobile, "h"));
        let locs: BTreeSet<_> = reductions(&m, &u)
            .unwrap()
            .into_iter()
            .map(|(_, m)| m.nodes[0].location.clone())
            .collect();
        assert_eq!(locs, [n("h"), n("k")].into_iter().collect());
    }

    #[test]
    fn untouched_recursive_components_stay_folded() {
        let u = universe();
        let ticker = Process::fix("X", send("c", Value::Unit, Process::sleep(Process::Var(n("X"))), Process::Var(n("X"))));
        let m = Network::node(node(
            "n",
            actuator_iface(0),
            Process::Par(vec![ticker.clone(), write(1, Process::Nil)]),
            Mobility::Stationary,
            "h",
        ));
        let r = reductions(&m, &u).unwrap();
        assert_eq!(r.len(), 1);
        let expected = crate::congruence::canonical_process(&ticker);
        assert_eq!(r[0].1.nodes[0].process, expected);
    }

    #[test]
    fn barbs_and_sensor_updates() {
        let u = universe();
        assert!(barbs(&Network::empty()).is_empty());
        let mut iface = actuator_iface(1);
        iface.sensors.insert(n("s"), Value::Int(0));
        let m = Network::node(node("n", iface, Process::Nil, Mobility::Stationary, "h"));
        let b: Vec<_> = barbs(&m).into_iter().collect();
        assert_eq!(b, vec![Barb { actuator: n("a"), location: n("h"), value: Value::Int(1) }]);

        let updated = update_sensor(&m, &u, &n("s"), &n("h"), &Value::Int(1)).unwrap();
        assert_eq!(updated.nodes[0].interface.sensors[&n("s")], Value::Int(1));
        assert_eq!(barbs(&updated), barbs(&m));
        let elsewhere = update_sensor(&m, &u, &n("s"), &n("k"), &Value::Int(1)).unwrap();
        assert_eq!(elsewhere, m);
        let back = update_sensor(&updated, &u, &n("s"), &n("h"), &Value::Int(0)).unwrap();
        assert_eq!(canonicalize(&back), canonicalize(&m));
        assert!(matches!(
            update_sensor(&m, &u, &n("s"), &n("h"), &Value::Int(7)),
            Err(Error::DomainViolation { .. })
        ));
    }

    #[test]
    fn weak_barbs_ignore_actuator_changes() {
        let u = universe();
        let m = Network::node(node("n", actuator_iface(0), write(1, Process::Nil), Mobility::Stationary, "h"));
        let on = Barb { actuator: n("a"), location: n("h"), value: Value::Int(1) };
        let off = Barb { value: Value::Int(0), ..on.clone() };
        assert!(!weak_barb(&m, &on, &u, 100).unwrap());
        assert!(weak_barb(&m, &off, &u, 100).unwrap());
        let late = Network::node(node(
            "n",
            actuator_iface(0),
            Process::sleep(write(0, Process::Nil)),
            Mobility::Stationary,
            "h",
        ));
        assert!(weak_barb(&late, &off, &u, 100).unwrap());
    }

    #[test]
    fn ill_formed_input_is_rejected() {
        let u = universe();
        let m = Network::node(node("n", Interface::default(), write(1, Process::Nil), Mobility::Stationary, "h"));
        assert!(matches!(reductions(&m, &u), Err(Error::IllFormed(_))));
    }
}

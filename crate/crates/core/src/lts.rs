//! Labelled transition semantics: intensional rules for processes and
//! networks, the extensional rules that add the environment, and
//! breadth-first construction of finite transition systems.

use rustc_hash::FxHashMap;
use std::fmt;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;

use crate::congruence::canonicalize;
use crate::error::{Error, Result};
use crate::reduction::{barbs, update_sensor, validate, Engine};
use crate::syntax::{substitute, unfold, CommAction, Mobility, Network, Prefix, Process};
use crate::universe::{ModelUniverse, Range};
use crate::value::{Name, Value};

/// Labels of process transitions.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ProcessLabel {
    Sigma,
    Tau,
    Out(Name, Value),
    In(Name, Value),
    AtLoc(Name),
    SensorRead(Value, Name),
    ActuatorWrite(Value, Name),
}

/// Labels of network transitions, both intensional (`Send`, `Recv` at the
/// sender's or receiver's location) and extensional (everything else beyond
/// `Tau`, `Sigma`, `Act`).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum Label {
    Tau,
    Sigma,
    Act(Name),
    Send { channel: Name, value: Value, location: Name },
    Recv { channel: Name, value: Value, location: Name },
    SendObs { channel: Name, value: Value, observer: Name },
    RecvObs { channel: Name, value: Value, observer: Name },
    SensorEnv { sensor: Name, location: Name, value: Value },
    ActuatorEnv { actuator: Name, location: Name, value: Value },
}

impl Label {
    pub fn is_tau(&self) -> bool {
        matches!(self, Label::Tau)
    }

    /// Physical transitions, i.e. interactions with the physical world.
    pub fn is_physical(&self) -> bool {
        matches!(self, Label::SensorEnv { .. } | Label::ActuatorEnv { .. })
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Tau => f.write_str("tau"),
            Label::Sigma => f.write_str("sigma"),
            Label::Act(a) => write!(f, "act({a})"),
            Label::Send { channel, value, location } => write!(f, "snd({channel},{value},{location})"),
            Label::Recv { channel, value, location } => write!(f, "rcv({channel},{value},{location})"),
            Label::SendObs { channel, value, observer } => write!(f, "snd({channel},{value},{observer})"),
            Label::RecvObs { channel, value, observer } => write!(f, "rcv({channel},{value},{observer})"),
            Label::SensorEnv { sensor, location, value } => write!(f, "sensor({sensor},{location},{value})"),
            Label::ActuatorEnv { actuator, location, value } => write!(f, "actuator({actuator},{location},{value})"),
        }
    }
}

fn push_unique<T: PartialEq>(v: &mut Vec<T>, x: T) {
    if !v.contains(&x) {
        v.push(x);
    }
}

/// Process transitions of a closed process (free recursion variables under
/// their binders are fine).
pub fn process_transitions(p: &Process, u: &ModelUniverse) -> Vec<(ProcessLabel, Process)> {
    Engine::default().process_transitions(p, u)
}

/// Network transitions of a closed, well-formed network.
pub fn network_transitions(net: &Network, u: &ModelUniverse) -> Result<Vec<(Label, Network)>> {
    validate(net, u)?;
    Ok(Engine::default().network_transitions(net, u))
}

/// Extensional transitions of a closed, well-formed network.
pub fn extensional_transitions(net: &Network, u: &ModelUniverse) -> Result<Vec<(Label, Network)>> {
    validate(net, u)?;
    Ok(Engine::default().extensional_transitions(net, u))
}

impl Engine {
    pub fn process_transitions(&self, p: &Process, u: &ModelUniverse) -> Vec<(ProcessLabel, Process)> {
        let mut out = Vec::new();
        match p {
            Process::Nil => out.push((ProcessLabel::Sigma, Process::Nil)),
            Process::Var(_) => {}
            Process::Prefix(pre, cont) => match pre {
                Prefix::Sleep => out.push((ProcessLabel::Sigma, cont.as_ref().clone())),
                Prefix::GetPos(x) => {
                    for h in u.locations() {
                        out.push((ProcessLabel::AtLoc(h.clone()), substitute(cont, x, &Value::Loc(h.clone()))));
                    }
                }
                Prefix::ReadSensor { var, sensor } => {
                    if let Some(decl) = u.sensor(sensor) {
                        for v in decl.domain.values() {
                            out.push((ProcessLabel::SensorRead(v.clone(), sensor.clone()), substitute(cont, var, v)));
                        }
                    }
                }
                Prefix::WriteActuator { value, actuator } => {
                    if let Some(v) = value.closed() {
                        out.push((ProcessLabel::ActuatorWrite(v.clone(), actuator.clone()), cont.as_ref().clone()));
                    }
                }
            },
            Process::Timeout(pi, then, otherwise) => {
                match pi {
                    CommAction::Send { channel, payload } => {
                        if let Some(v) = payload.closed() {
                            out.push((ProcessLabel::Out(channel.clone(), v.clone()), then.as_ref().clone()));
                        }
                    }
                    CommAction::Receive { channel, bind } => {
                        if let Some(decl) = u.channel(channel) {
                            for v in decl.domain.values() {
                                let cont = match bind {
                                    Some(x) => substitute(then, x, v),
                                    None => then.as_ref().clone(),
                                };
                                out.push((ProcessLabel::In(channel.clone(), v.clone()), cont));
                            }
                        }
                    }
                }
                out.push((ProcessLabel::Sigma, otherwise.as_ref().clone()));
            }
            Process::Cond(b, then, otherwise) => match b.eval() {
                Some(true) => return self.process_transitions(then, u),
                Some(false) => return self.process_transitions(otherwise, u),
                None => {}
            },
            Process::Fix(x, body) => {
                if !self.drop_fix {
                    return self.process_transitions(&unfold(x, body), u);
                }
            }
            Process::Par(ps) => return self.par_transitions(ps, u),
        }
        out
    }

    fn par_transitions(&self, ps: &[Process], u: &ModelUniverse) -> Vec<(ProcessLabel, Process)> {
        let mut out = Vec::new();
        let each: Vec<Vec<(ProcessLabel, Process)>> = ps.iter().map(|p| self.process_transitions(p, u)).collect();
        let replace = |i: usize, q: Process| {
            let mut v = ps.to_vec();
            v[i] = q;
            v
        };
        // (ParP): any non-timed move of one component
        for (i, ts) in each.iter().enumerate() {
            for (l, q) in ts {
                if *l != ProcessLabel::Sigma {
                    push_unique(&mut out, (l.clone(), Process::Par(replace(i, q.clone()))));
                }
            }
        }
        // (Com): local channels only
        for (i, ts) in each.iter().enumerate() {
            for (l, q) in ts {
                let ProcessLabel::Out(c, v) = l else { continue };
                if u.range(c) != Some(Range::Local) {
                    continue;
                }
                for (j, r) in ps.iter().enumerate() {
                    if i == j {
                        continue;
                    }
                    for r2 in self.inputs_on(r, c, v) {
                        let mut next = replace(i, q.clone());
                        next[j] = r2;
                        push_unique(&mut out, (ProcessLabel::Tau, Process::Par(next)));
                    }
                }
            }
        }
        // (TimeParP)
        let has_tau = out.iter().any(|(l, _)| *l == ProcessLabel::Tau);
        if !has_tau {
            let mut products: Vec<Vec<Process>> = vec![Vec::new()];
            for ts in &each {
                let sigmas: Vec<&Process> =
                    ts.iter().filter(|(l, _)| *l == ProcessLabel::Sigma).map(|(_, q)| q).collect();
                products = products
                    .into_iter()
                    .flat_map(|prefix| {
                        sigmas.iter().map(move |q| {
                            let mut v = prefix.clone();
                            v.push((*q).clone());
                            v
                        })
                    })
                    .collect();
            }
            for v in products {
                push_unique(&mut out, (ProcessLabel::Sigma, Process::Par(v)));
            }
        }
        out
    }

    /// Residues of `p` after receiving exactly `v` on `c`.
    fn inputs_on(&self, p: &Process, c: &Name, v: &Value) -> Vec<Process> {
        match p {
            Process::Timeout(CommAction::Receive { channel, bind }, then, _) if channel == c => vec![match bind {
                Some(x) => substitute(then, x, v),
                None => then.as_ref().clone(),
            }],
            Process::Par(ps) => {
                let mut out = Vec::new();
                for (i, q) in ps.iter().enumerate() {
                    for q2 in self.inputs_on(q, c, v) {
                        let mut next = ps.to_vec();
                        next[i] = q2;
                        out.push(Process::Par(next));
                    }
                }
                out
            }
            Process::Cond(b, then, otherwise) => match b.eval() {
                Some(true) => self.inputs_on(then, c, v),
                Some(false) => self.inputs_on(otherwise, c, v),
                None => Vec::new(),
            },
            Process::Fix(x, body) if !self.drop_fix => self.inputs_on(&unfold(x, body), c, v),
            _ => Vec::new(),
        }
    }

    /// Network transitions without validation; successors are canonical.
    pub fn network_transitions(&self, net: &Network, u: &ModelUniverse) -> Vec<(Label, Network)> {
        let mut out: Vec<(Label, Network)> = Vec::new();
        let per_node: Vec<Vec<(ProcessLabel, Process)>> =
            net.nodes.iter().map(|n| self.process_transitions(&n.process, u)).collect();
        let mut sigma_residues: Vec<Vec<Process>> = Vec::new();
        let mut any_tau = false;

        for (i, node) in net.nodes.iter().enumerate() {
            let with = |p: &Process| {
                let mut m = net.clone();
                m.nodes[i].process = p.clone();
                m
            };
            let mut node_tau = false;
            let mut sigmas = Vec::new();
            for (l, p) in &per_node[i] {
                match l {
                    ProcessLabel::AtLoc(h) if *h == node.location => {
                        out.push((Label::Tau, with(p)));
                        node_tau = true;
                    }
                    ProcessLabel::SensorRead(v, s) if node.interface.sensors.get(s) == Some(v) => {
                        out.push((Label::Tau, with(p)));
                        node_tau = true;
                    }
                    ProcessLabel::ActuatorWrite(v, a) => match node.interface.actuators.get(a) {
                        Some(cur) if cur == v => {
                            out.push((Label::Tau, with(p)));
                            node_tau = true;
                        }
                        Some(_) => {
                            let mut m = with(p);
                            m.nodes[i].interface.actuators.insert(a.clone(), v.clone());
                            out.push((Label::Act(a.clone()), m));
                        }
                        None => {}
                    },
                    ProcessLabel::Tau => {
                        out.push((Label::Tau, with(p)));
                        node_tau = true;
                    }
                    ProcessLabel::Out(c, v) if is_global(u, c) => out.push((
                        Label::Send {
                            channel: c.clone(),
                            value: v.clone(),
                            location: node.location.clone(),
                        },
                        with(p),
                    )),
                    ProcessLabel::In(c, v) if is_global(u, c) => out.push((
                        Label::Recv {
                            channel: c.clone(),
                            value: v.clone(),
                            location: node.location.clone(),
                        },
                        with(p),
                    )),
                    ProcessLabel::Sigma => sigmas.push(p.clone()),
                    _ => {}
                }
            }
            any_tau |= node_tau;
            // (TimeStat)/(TimeMob) need the node itself to be tau-free
            sigma_residues.push(if node_tau { Vec::new() } else { sigmas });
        }

        // (GlbCom)
        for (i, sender) in net.nodes.iter().enumerate() {
            for (l, p) in &per_node[i] {
                let ProcessLabel::Out(c, v) = l else { continue };
                if !is_global(u, c) {
                    continue;
                }
                for (j, receiver) in net.nodes.iter().enumerate() {
                    if i == j || !u.in_range(c, &sender.location, &receiver.location) {
                        continue;
                    }
                    for q in self.inputs_on(&receiver.process, c, v) {
                        let mut m = net.clone();
                        m.nodes[i].process = p.clone();
                        m.nodes[j].process = q;
                        out.push((Label::Tau, m));
                        any_tau = true;
                    }
                }
            }
        }

        // (TimePar)/(TimeZero)
        if !any_tau && sigma_residues.iter().all(|s| !s.is_empty()) {
            let mut products = vec![net.clone()];
            for (i, node) in net.nodes.iter().enumerate() {
                let targets = match node.mobility {
                    Mobility::Stationary => vec![node.location.clone()],
                    Mobility::Mobile => u.reachable_locations(&node.location, u.delta()),
                };
                products = products
                    .into_iter()
                    .flat_map(|m| {
                        let targets = &targets;
                        sigma_residues[i].iter().flat_map(move |p| {
                            let m = m.clone();
                            targets.iter().map(move |k| {
                                let mut m = m.clone();
                                m.nodes[i].process = p.clone();
                                m.nodes[i].location = k.clone();
                                m
                            })
                        })
                    })
                    .collect();
            }
            out.extend(products.into_iter().map(|m| (Label::Sigma, m)));
        }

        // (Res)
        out.retain(|(l, _)| match l {
            Label::Send { channel, .. } | Label::Recv { channel, .. } => !net.restricted.contains(channel),
            _ => true,
        });
        finish(out)
    }

    /// Extensional transitions without validation; successors are canonical.
    pub fn extensional_transitions(&self, net: &Network, u: &ModelUniverse) -> Vec<(Label, Network)> {
        let mut out = Vec::new();
        for (l, m) in self.network_transitions(net, u) {
            match l {
                Label::Send { channel, value, location } => {
                    for k in u.locations() {
                        if u.in_range(&channel, &location, k) {
                            out.push((
                                Label::SendObs {
                                    channel: channel.clone(),
                                    value: value.clone(),
                                    observer: k.clone(),
                                },
                                m.clone(),
                            ));
                        }
                    }
                }
                Label::Recv { channel, value, location } => {
                    for k in u.locations() {
                        if u.in_range(&channel, k, &location) {
                            out.push((
                                Label::RecvObs {
                                    channel: channel.clone(),
                                    value: value.clone(),
                                    observer: k.clone(),
                                },
                                m.clone(),
                            ));
                        }
                    }
                }
                l => out.push((l, m)),
            }
        }
        let mut out = finish(out);
        // updates and reads touch interface values only, so a canonical
        // state stays canonical
        let base = canonicalize(net);
        for (s, decl) in u.sensors() {
            for h in u.locations() {
                for v in decl.domain.values() {
                    let m = update_sensor(&base, u, s, h, v).expect("declared sensor, location and value");
                    out.push((
                        Label::SensorEnv {
                            sensor: s.clone(),
                            location: h.clone(),
                            value: v.clone(),
                        },
                        m,
                    ));
                }
            }
        }
        for b in barbs(net) {
            out.push((
                Label::ActuatorEnv {
                    actuator: b.actuator,
                    location: b.location,
                    value: b.value,
                },
                base.clone(),
            ));
        }
        out.sort();
        out
    }
}

fn is_global(u: &ModelUniverse, c: &Name) -> bool {
    matches!(u.range(c), Some(r) if !r.is_local())
}

fn finish(out: Vec<(Label, Network)>) -> Vec<(Label, Network)> {
    let mut out: Vec<(Label, Network)> = out.into_iter().map(|(l, m)| (l, canonicalize(&m))).collect();
    out.sort();
    out.dedup();
    out
}

/// A finite transition system over canonical network states. State 0 is
/// always the initial state; edges are sorted by source, label, target.
#[derive(Clone, Debug)]
pub struct TransitionSystem<L = Label> {
    pub states: Vec<Network>,
    pub initial: usize,
    pub edges: Vec<(usize, L, usize)>,
    offsets: Vec<usize>,
}

impl<L> TransitionSystem<L> {
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    /// Outgoing edges of state `s`.
    pub fn out_edges(&self, s: usize) -> &[(usize, L, usize)] {
        &self.edges[self.offsets[s]..self.offsets[s + 1]]
    }

    pub fn index_of(&self, net: &Network) -> Option<usize> {
        let canon = canonicalize(net);
        self.states.iter().position(|m| *m == canon)
    }
}

impl<L: fmt::Display> TransitionSystem<L> {
    /// The line-oriented export: a header `states N init I`, then one
    /// `src<TAB>label<TAB>dst` row per edge.
    pub fn export_graph(&self) -> String {
        let mut s = format!("states {} init {}\n", self.num_states(), self.initial);
        for (a, l, b) in &self.edges {
            let _ = writeln!(s, "{a}\t{l}\t{b}");
        }
        s
    }

    /// Graphviz rendering. Self-loops are dashed so environment identities
    /// stand out.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph lts {\n  node [shape=circle];\n");
        let _ = writeln!(s, "  init [shape=point];\n  init -> {};", self.initial);
        for i in 0..self.num_states() {
            let _ = writeln!(s, "  {i};");
        }
        for (a, l, b) in &self.edges {
            let style = if a == b { " style=dashed" } else { "" };
            let _ = writeln!(s, "  {a} -> {b} [label=\"{l}\"{style}];");
        }
        s.push_str("}\n");
        s
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Intensional,
    Extensional,
}

/// Breadth-first exploration from `init` with deterministic numbering.
/// Successors of a layer are computed in parallel when `parallel` is set;
/// the result does not depend on scheduling.
pub(crate) fn explore<L, F>(init: &Network, budget: usize, parallel: bool, succ: F) -> Result<TransitionSystem<L>>
where
    L: Clone + Ord + Send + Sync,
    F: Fn(&Network) -> Vec<(L, Network)> + Sync,
{
    let start = canonicalize(init);
    let mut index: FxHashMap<Network, usize> = FxHashMap::default();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<(usize, L, usize)> = Vec::new();
    let mut frontier = vec![0usize];
    while !frontier.is_empty() {
        let computed: Vec<Vec<(L, Network)>> = if parallel {
            frontier.par_iter().map(|&s| succ(&states[s])).collect()
        } else {
            frontier.iter().map(|&s| succ(&states[s])).collect()
        };
        let mut next = Vec::new();
        for (pos, (&s, succs)) in frontier.iter().zip(computed).enumerate() {
            for (l, m) in succs {
                let t = match index.get(&m) {
                    Some(&t) => t,
                    None => {
                        if states.len() >= budget {
                            let pending: Vec<usize> = frontier[pos..].iter().chain(next.iter()).copied().collect();
                            return Err(Error::StateSpaceBudgetExceeded {
                                limit: budget,
                                frontier: pending.len(),
                                sample: pending
                                    .iter()
                                    .take(3)
                                    .map(|&i| crate::frontend::print_network(&states[i]))
                                    .collect(),
                            });
                        }
                        let t = states.len();
                        states.push(m.clone());
                        index.insert(m, t);
                        next.push(t);
                        t
                    }
                };
                edges.push((s, l, t));
            }
        }
        frontier = next;
    }
    edges.sort();
    edges.dedup();
    let mut offsets = vec![0; states.len() + 1];
    for (a, _, _) in &edges {
        offsets[a + 1] += 1;
    }
    for i in 0..states.len() {
        offsets[i + 1] += offsets[i];
    }
    Ok(TransitionSystem {
        states,
        initial: 0,
        edges,
        offsets,
    })
}

/// The transition system reachable from `net` in the given mode.
pub fn build_lts(net: &Network, u: &ModelUniverse, mode: Mode, budget: usize) -> Result<TransitionSystem> {
    Engine::default().build_lts(net, u, mode, budget, false)
}

impl Engine {
    pub fn build_lts(
        &self,
        net: &Network,
        u: &ModelUniverse,
        mode: Mode,
        budget: usize,
        parallel: bool,
    ) -> Result<TransitionSystem> {
        if budget == 0 {
            return Err(Error::ConfigViolation("state budget must be positive".into()));
        }
        validate(net, u)?;
        match mode {
            Mode::Intensional => explore(net, budget, parallel, |m| self.network_transitions(m, u)),
            Mode::Extensional => explore(net, budget, parallel, |m| self.extensional_transitions(m, u)),
        }
    }

    /// The transition system of the reduction semantics.
    pub fn reduction_system(
        &self,
        net: &Network,
        u: &ModelUniverse,
        budget: usize,
    ) -> Result<TransitionSystem<crate::reduction::ReductionLabel>> {
        validate(net, u)?;
        explore(net, budget, false, |m| self.reductions(m, u))
    }
}

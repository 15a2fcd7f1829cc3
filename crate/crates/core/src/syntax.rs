//! Abstract syntax of processes and networks, substitution, and the static
//! checks (closedness, time-guarded recursion, well-formedness).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::universe::{ModelUniverse, SensorKind};
use crate::value::{Name, Value};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum ValueExpr {
    Lit(Value),
    Var(Name),
}

impl ValueExpr {
    pub fn closed(&self) -> Option<&Value> {
        match self {
            ValueExpr::Lit(v) => Some(v),
            ValueExpr::Var(_) => None,
        }
    }

    fn subst(&self, x: &Name, v: &Value) -> ValueExpr {
        match self {
            ValueExpr::Var(y) if y == x => ValueExpr::Lit(v.clone()),
            e => e.clone(),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum BoolExpr {
    Lit(bool),
    Eq(ValueExpr, ValueExpr),
    Lt(ValueExpr, ValueExpr),
    Leq(ValueExpr, ValueExpr),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    /// Evaluates a closed guard; `None` if a variable is still free.
    ///
    /// Integers are compared numerically. Any other pair of values falls
    /// back to the total structural order, so evaluation never gets stuck.
    pub fn eval(&self) -> Option<bool> {
        fn lt(a: &Value, b: &Value) -> bool {
            match (a, b) {
                (Value::Int(x), Value::Int(y)) => x < y,
                _ => a < b,
            }
        }
        Some(match self {
            BoolExpr::Lit(b) => *b,
            BoolExpr::Eq(a, b) => a.closed()? == b.closed()?,
            BoolExpr::Lt(a, b) => lt(a.closed()?, b.closed()?),
            BoolExpr::Leq(a, b) => {
                let (a, b) = (a.closed()?, b.closed()?);
                a == b || lt(a, b)
            }
            BoolExpr::Not(b) => !b.eval()?,
            BoolExpr::And(a, b) => {
                // both sides must be closed for the guard to be decided
                let (a, b) = (a.eval()?, b.eval()?);
                a && b
            }
        })
    }

    fn subst(&self, x: &Name, v: &Value) -> BoolExpr {
        match self {
            BoolExpr::Lit(b) => BoolExpr::Lit(*b),
            BoolExpr::Eq(a, b) => BoolExpr::Eq(a.subst(x, v), b.subst(x, v)),
            BoolExpr::Lt(a, b) => BoolExpr::Lt(a.subst(x, v), b.subst(x, v)),
            BoolExpr::Leq(a, b) => BoolExpr::Leq(a.subst(x, v), b.subst(x, v)),
            BoolExpr::Not(b) => BoolExpr::Not(Box::new(b.subst(x, v))),
            BoolExpr::And(a, b) => BoolExpr::And(Box::new(a.subst(x, v)), Box::new(b.subst(x, v))),
        }
    }

    fn vars(&self, out: &mut Vec<Name>) {
        let mut push = |e: &ValueExpr| {
            if let ValueExpr::Var(x) = e {
                out.push(x.clone())
            }
        };
        match self {
            BoolExpr::Lit(_) => {}
            BoolExpr::Eq(a, b) | BoolExpr::Lt(a, b) | BoolExpr::Leq(a, b) => {
                push(a);
                push(b);
            }
            BoolExpr::Not(b) => b.vars(out),
            BoolExpr::And(a, b) => {
                a.vars(out);
                b.vars(out);
            }
        }
    }
}

/// Intra-node prefixes.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Prefix {
    /// `sigma`: sleep for one time unit.
    Sleep,
    /// `@(x)`: bind the node's current location.
    GetPos(Name),
    /// `s?(x)`: read sensor `s` into `x`.
    ReadSensor { var: Name, sensor: Name },
    /// `a!v`: write `v` on actuator `a`.
    WriteActuator { value: ValueExpr, actuator: Name },
}

impl Prefix {
    fn binder(&self) -> Option<&Name> {
        match self {
            Prefix::GetPos(x) | Prefix::ReadSensor { var: x, .. } => Some(x),
            _ => None,
        }
    }
}

/// Channel actions, always under a timeout.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum CommAction {
    Send { channel: Name, payload: ValueExpr },
    /// A receive with no variable discards the (unit) payload.
    Receive { channel: Name, bind: Option<Name> },
}

impl CommAction {
    pub fn channel(&self) -> &Name {
        match self {
            CommAction::Send { channel, .. } | CommAction::Receive { channel, .. } => channel,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Process {
    Nil,
    Prefix(Prefix, Arc<Process>),
    /// `timeout(pi.P, Q)`: communicate now and continue as `P`, or become
    /// `Q` after one time unit.
    Timeout(CommAction, Arc<Process>, Arc<Process>),
    Par(Vec<Process>),
    Cond(BoolExpr, Arc<Process>, Arc<Process>),
    Var(Name),
    Fix(Name, Arc<Process>),
}

impl Process {
    pub fn prefix(p: Prefix, cont: Process) -> Process {
        Process::Prefix(p, Arc::new(cont))
    }

    pub fn sleep(cont: Process) -> Process {
        Process::prefix(Prefix::Sleep, cont)
    }

    pub fn timeout(pi: CommAction, then: Process, otherwise: Process) -> Process {
        Process::Timeout(pi, Arc::new(then), Arc::new(otherwise))
    }

    pub fn cond(b: BoolExpr, then: Process, otherwise: Process) -> Process {
        Process::Cond(b, Arc::new(then), Arc::new(otherwise))
    }

    pub fn fix(x: &str, body: Process) -> Process {
        Process::Fix(Name::new(x), Arc::new(body))
    }

    /// Binary parallel composition, flattening nested `Par`s and dropping
    /// `nil`s.
    pub fn par(a: Process, b: Process) -> Process {
        let mut out = Vec::new();
        for p in [a, b] {
            match p {
                Process::Nil => {}
                Process::Par(ps) => out.extend(ps),
                p => out.push(p),
            }
        }
        match out.len() {
            0 => Process::Nil,
            1 => out.pop().unwrap(),
            _ => Process::Par(out),
        }
    }

    pub fn par_all(ps: impl IntoIterator<Item = Process>) -> Process {
        ps.into_iter().fold(Process::Nil, Process::par)
    }

    /// Parallel components (a non-`Par` process is its own single component).
    pub fn components(&self) -> &[Process] {
        match self {
            Process::Par(ps) => ps,
            Process::Nil => &[],
            p => std::slice::from_ref(p),
        }
    }
}

/// `T{v/x}`: replace free occurrences of the value variable `x`.
///
/// Values are closed, so no capture can happen; binders of `x` shadow.
pub fn substitute(term: &Process, x: &Name, v: &Value) -> Process {
    match term {
        Process::Nil | Process::Var(_) => term.clone(),
        Process::Prefix(pre, cont) => {
            let pre2 = match pre {
                Prefix::WriteActuator { value, actuator } => Prefix::WriteActuator {
                    value: value.subst(x, v),
                    actuator: actuator.clone(),
                },
                p => p.clone(),
            };
            let cont2 = if pre.binder() == Some(x) {
                cont.clone()
            } else {
                Arc::new(substitute(cont, x, v))
            };
            Process::Prefix(pre2, cont2)
        }
        Process::Timeout(pi, then, otherwise) => {
            let (pi2, shadowed) = match pi {
                CommAction::Send { channel, payload } => (
                    CommAction::Send {
                        channel: channel.clone(),
                        payload: payload.subst(x, v),
                    },
                    false,
                ),
                CommAction::Receive { bind, .. } => (pi.clone(), bind.as_ref() == Some(x)),
            };
            let then2 = if shadowed {
                then.clone()
            } else {
                Arc::new(substitute(then, x, v))
            };
            Process::Timeout(pi2, then2, Arc::new(substitute(otherwise, x, v)))
        }
        Process::Par(ps) => Process::Par(ps.iter().map(|p| substitute(p, x, v)).collect()),
        Process::Cond(b, p, q) => Process::Cond(
            b.subst(x, v),
            Arc::new(substitute(p, x, v)),
            Arc::new(substitute(q, x, v)),
        ),
        Process::Fix(y, body) => Process::Fix(y.clone(), Arc::new(substitute(body, x, v))),
    }
}

/// `T{Q/X}` for a closed `Q`: replace free occurrences of process variable
/// `X`.
pub fn substitute_process(term: &Process, x: &Name, q: &Process) -> Process {
    match term {
        Process::Nil => Process::Nil,
        Process::Var(y) if y == x => q.clone(),
        Process::Var(_) => term.clone(),
        Process::Prefix(pre, cont) => Process::Prefix(pre.clone(), Arc::new(substitute_process(cont, x, q))),
        Process::Timeout(pi, p, r) => Process::Timeout(
            pi.clone(),
            Arc::new(substitute_process(p, x, q)),
            Arc::new(substitute_process(r, x, q)),
        ),
        Process::Par(ps) => Process::Par(ps.iter().map(|p| substitute_process(p, x, q)).collect()),
        Process::Cond(b, p, r) => Process::Cond(
            b.clone(),
            Arc::new(substitute_process(p, x, q)),
            Arc::new(substitute_process(r, x, q)),
        ),
        Process::Fix(y, _) if y == x => term.clone(),
        Process::Fix(y, body) => Process::Fix(y.clone(), Arc::new(substitute_process(body, x, q))),
    }
}

/// One unfolding of `fix X.P` into `P{fix X.P / X}`.
pub fn unfold(x: &Name, body: &Arc<Process>) -> Process {
    let whole = Process::Fix(x.clone(), body.clone());
    substitute_process(body, x, &whole)
}

impl Process {
    /// Free process variables.
    pub fn free_process_vars(&self) -> BTreeSet<Name> {
        fn go(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            match p {
                Process::Nil => {}
                Process::Var(x) => {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
                Process::Prefix(_, c) => go(c, bound, out),
                Process::Timeout(_, a, b) | Process::Cond(_, a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Process::Par(ps) => ps.iter().for_each(|p| go(p, bound, out)),
                Process::Fix(x, body) => {
                    bound.push(x.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Free value variables.
    pub fn free_value_vars(&self) -> BTreeSet<Name> {
        fn go(p: &Process, bound: &mut Vec<Name>, out: &mut BTreeSet<Name>) {
            let use_expr = |e: &ValueExpr, bound: &Vec<Name>, out: &mut BTreeSet<Name>| {
                if let ValueExpr::Var(x) = e {
                    if !bound.contains(x) {
                        out.insert(x.clone());
                    }
                }
            };
            match p {
                Process::Nil | Process::Var(_) => {}
                Process::Prefix(pre, c) => {
                    if let Prefix::WriteActuator { value, .. } = pre {
                        use_expr(value, bound, out);
                    }
                    match pre.binder() {
                        Some(x) => {
                            bound.push(x.clone());
                            go(c, bound, out);
                            bound.pop();
                        }
                        None => go(c, bound, out),
                    }
                }
                Process::Timeout(pi, then, otherwise) => {
                    match pi {
                        CommAction::Send { payload, .. } => {
                            use_expr(payload, bound, out);
                            go(then, bound, out);
                        }
                        CommAction::Receive { bind: Some(x), .. } => {
                            bound.push(x.clone());
                            go(then, bound, out);
                            bound.pop();
                        }
                        CommAction::Receive { bind: None, .. } => go(then, bound, out),
                    }
                    go(otherwise, bound, out);
                }
                Process::Cond(b, p, q) => {
                    let mut vs = Vec::new();
                    b.vars(&mut vs);
                    for x in vs {
                        if !bound.contains(&x) {
                            out.insert(x);
                        }
                    }
                    go(p, bound, out);
                    go(q, bound, out);
                }
                Process::Par(ps) => ps.iter().for_each(|p| go(p, bound, out)),
                Process::Fix(_, body) => go(body, bound, out),
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    /// Checks that in every `fix X.P`, each free `X` in `P` sits under a
    /// `sigma` prefix or in the else-branch of a timeout.
    pub fn check_time_guarded(&self) -> Result<()> {
        // Is some free occurrence of `x` in `p` reachable without crossing a
        // time guard?
        fn unguarded(p: &Process, x: &Name) -> bool {
            match p {
                Process::Nil => false,
                Process::Var(y) => y == x,
                Process::Prefix(Prefix::Sleep, _) => false,
                Process::Prefix(_, c) => unguarded(c, x),
                Process::Timeout(_, then, _) => unguarded(then, x),
                Process::Cond(_, a, b) => unguarded(a, x) || unguarded(b, x),
                Process::Par(ps) => ps.iter().any(|p| unguarded(p, x)),
                Process::Fix(y, _) if y == x => false,
                Process::Fix(_, body) => unguarded(body, x),
            }
        }
        fn go(p: &Process) -> Result<()> {
            match p {
                Process::Nil | Process::Var(_) => Ok(()),
                Process::Prefix(_, c) => go(c),
                Process::Timeout(_, a, b) | Process::Cond(_, a, b) => {
                    go(a)?;
                    go(b)
                }
                Process::Par(ps) => ps.iter().try_for_each(go),
                Process::Fix(x, body) => {
                    if unguarded(body, x) {
                        return Err(Error::NotTimeGuarded(x.to_string()));
                    }
                    go(body)
                }
            }
        }
        go(self)
    }

    /// Channels occurring in the process.
    pub fn channels(&self, out: &mut BTreeSet<Name>) {
        match self {
            Process::Nil | Process::Var(_) => {}
            Process::Prefix(_, c) => c.channels(out),
            Process::Timeout(pi, a, b) => {
                out.insert(pi.channel().clone());
                a.channels(out);
                b.channels(out);
            }
            Process::Cond(_, a, b) => {
                a.channels(out);
                b.channels(out);
            }
            Process::Par(ps) => ps.iter().for_each(|p| p.channels(out)),
            Process::Fix(_, body) => body.channels(out),
        }
    }

    /// Sensor and actuator names used by prefixes.
    pub fn physical_names(&self, sensors: &mut BTreeSet<Name>, actuators: &mut BTreeSet<Name>) {
        match self {
            Process::Nil | Process::Var(_) => {}
            Process::Prefix(pre, c) => {
                match pre {
                    Prefix::ReadSensor { sensor, .. } => {
                        sensors.insert(sensor.clone());
                    }
                    Prefix::WriteActuator { actuator, .. } => {
                        actuators.insert(actuator.clone());
                    }
                    _ => {}
                }
                c.physical_names(sensors, actuators)
            }
            Process::Timeout(_, a, b) | Process::Cond(_, a, b) => {
                a.physical_names(sensors, actuators);
                b.physical_names(sensors, actuators);
            }
            Process::Par(ps) => ps.iter().for_each(|p| p.physical_names(sensors, actuators)),
            Process::Fix(_, body) => body.physical_names(sensors, actuators),
        }
    }

    fn rename_channel(&self, from: &Name, to: &Name) -> Process {
        let rn = |c: &Name| if c == from { to.clone() } else { c.clone() };
        match self {
            Process::Nil | Process::Var(_) => self.clone(),
            Process::Prefix(pre, c) => Process::Prefix(pre.clone(), Arc::new(c.rename_channel(from, to))),
            Process::Timeout(pi, a, b) => {
                let pi = match pi {
                    CommAction::Send { channel, payload } => CommAction::Send {
                        channel: rn(channel),
                        payload: payload.clone(),
                    },
                    CommAction::Receive { channel, bind } => CommAction::Receive {
                        channel: rn(channel),
                        bind: bind.clone(),
                    },
                };
                Process::Timeout(pi, Arc::new(a.rename_channel(from, to)), Arc::new(b.rename_channel(from, to)))
            }
            Process::Cond(g, a, b) => Process::Cond(
                g.clone(),
                Arc::new(a.rename_channel(from, to)),
                Arc::new(b.rename_channel(from, to)),
            ),
            Process::Par(ps) => Process::Par(ps.iter().map(|p| p.rename_channel(from, to)).collect()),
            Process::Fix(x, body) => Process::Fix(x.clone(), Arc::new(body.rename_channel(from, to))),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, serde::Serialize)]
pub enum Mobility {
    Stationary,
    Mobile,
}

/// The physical interface of a node: current sensor and actuator values.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Interface {
    pub sensors: BTreeMap<Name, Value>,
    pub actuators: BTreeMap<Name, Value>,
}

impl Interface {
    pub fn is_empty(&self) -> bool {
        self.sensors.is_empty() && self.actuators.is_empty()
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Node {
    pub name: Name,
    pub interface: Interface,
    pub process: Process,
    pub mobility: Mobility,
    pub location: Name,
}

/// A network in restriction-prenex form: `(new c1..ck)(n1[..] | ... | nm[..])`.
/// The empty node list is the empty network `0`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Network {
    pub restricted: Vec<Name>,
    pub nodes: Vec<Node>,
}

impl Network {
    pub fn empty() -> Network {
        Network::default()
    }

    pub fn node(node: Node) -> Network {
        Network {
            restricted: Vec::new(),
            nodes: vec![node],
        }
    }

    /// Every channel name occurring anywhere, free or restricted.
    pub fn all_channels(&self) -> BTreeSet<Name> {
        let mut out: BTreeSet<Name> = self.restricted.iter().cloned().collect();
        for n in &self.nodes {
            n.process.channels(&mut out);
        }
        out
    }

    /// `M | N`. Restricted names of either side that clash with a channel of
    /// the other side are alpha-renamed with primes.
    pub fn par(self, other: Network) -> Network {
        let mut left = self;
        let mut right = other;
        let taken: BTreeSet<Name> = left.all_channels().union(&right.all_channels()).cloned().collect();
        let mut taken = taken;
        let right_chans = right.all_channels();
        for c in left.restricted.clone() {
            if right_chans.contains(&c) {
                let fresh = fresh_channel(&c, &taken);
                taken.insert(fresh.clone());
                left = left.rename_restricted(&c, &fresh);
            }
        }
        let left_chans = left.all_channels();
        for c in right.restricted.clone() {
            if left_chans.contains(&c) {
                let fresh = fresh_channel(&c, &taken);
                taken.insert(fresh.clone());
                right = right.rename_restricted(&c, &fresh);
            }
        }
        left.restricted.extend(right.restricted);
        left.nodes.extend(right.nodes);
        left
    }

    /// `(new c) M`.
    pub fn restrict(mut self, c: Name) -> Network {
        if self.restricted.contains(&c) {
            // the inner binder shadows: rename it away first
            let taken = self.all_channels();
            let fresh = fresh_channel(&c, &taken);
            self = self.rename_restricted(&c, &fresh);
        }
        self.restricted.insert(0, c);
        self
    }

    fn rename_restricted(mut self, from: &Name, to: &Name) -> Network {
        for r in self.restricted.iter_mut() {
            if r == from {
                *r = to.clone();
            }
        }
        for n in self.nodes.iter_mut() {
            n.process = n.process.rename_channel(from, to);
        }
        self
    }

    pub fn find_node(&self, name: &Name) -> Option<&Node> {
        self.nodes.iter().find(|n| &n.name == name)
    }

    /// Checks closedness and time-guardedness of every node process.
    pub fn check_closed(&self) -> Result<()> {
        for n in &self.nodes {
            if let Some(x) = n.process.free_process_vars().into_iter().next() {
                return Err(Error::dangling("process variable", format!("{x} (in node {})", n.name)));
            }
            if let Some(x) = n.process.free_value_vars().into_iter().next() {
                return Err(Error::dangling("variable", format!("{x} (in node {})", n.name)));
            }
            n.process.check_time_guarded()?;
        }
        Ok(())
    }
}

fn fresh_channel(c: &Name, taken: &BTreeSet<Name>) -> Name {
    let mut candidate = c.primed();
    while taken.contains(&candidate) {
        candidate = candidate.primed();
    }
    candidate
}

/// Channels occurring in processes, minus the restricted ones.
pub fn free_channels(net: &Network) -> BTreeSet<Name> {
    let mut out = BTreeSet::new();
    for n in &net.nodes {
        n.process.channels(&mut out);
    }
    for c in &net.restricted {
        out.remove(c);
    }
    out
}

/// A breach of one of the well-formedness clauses.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateNodeName(Name),
    SharedActuator { actuator: Name, nodes: (Name, Name) },
    SharedNodeSensor { sensor: Name, nodes: (Name, Name) },
    UndefinedSensor { node: Name, sensor: Name },
    UndefinedActuator { node: Name, actuator: Name },
    MobileLocationSensor { node: Name, sensor: Name },
    ValueOutOfDomain { node: Name, name: Name, value: Value },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateNodeName(n) => write!(f, "two nodes are named {n}"),
            Violation::SharedActuator { actuator, nodes } => {
                write!(f, "actuator {actuator} is in both {} and {}", nodes.0, nodes.1)
            }
            Violation::SharedNodeSensor { sensor, nodes } => {
                write!(f, "node-dependent sensor {sensor} is in both {} and {}", nodes.0, nodes.1)
            }
            Violation::UndefinedSensor { node, sensor } => {
                write!(f, "node {node} reads sensor {sensor} missing from its interface")
            }
            Violation::UndefinedActuator { node, actuator } => {
                write!(f, "node {node} writes actuator {actuator} missing from its interface")
            }
            Violation::MobileLocationSensor { node, sensor } => {
                write!(f, "mobile node {node} has location-dependent sensor {sensor}")
            }
            Violation::ValueOutOfDomain { node, name, value } => {
                write!(f, "node {node}: {name} holds {value}, outside its domain")
            }
        }
    }
}

/// All well-formedness violations of `net`. An empty list means the network
/// is well-formed.
pub fn check_well_formed(net: &Network, u: &ModelUniverse) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut seen: BTreeMap<&Name, ()> = BTreeMap::new();
    let mut actuator_owner: BTreeMap<&Name, &Name> = BTreeMap::new();
    let mut sensor_owner: BTreeMap<&Name, &Name> = BTreeMap::new();
    for node in &net.nodes {
        if seen.insert(&node.name, ()).is_some() {
            out.push(Violation::DuplicateNodeName(node.name.clone()));
        }
        for a in node.interface.actuators.keys() {
            if let Some(other) = actuator_owner.insert(a, &node.name) {
                out.push(Violation::SharedActuator {
                    actuator: a.clone(),
                    nodes: (other.clone(), node.name.clone()),
                });
            }
        }
        for s in node.interface.sensors.keys() {
            let kind = u.sensor(s).map(|d| d.kind).unwrap_or(SensorKind::NodeDependent);
            match kind {
                SensorKind::NodeDependent => {
                    if let Some(other) = sensor_owner.insert(s, &node.name) {
                        out.push(Violation::SharedNodeSensor {
                            sensor: s.clone(),
                            nodes: (other.clone(), node.name.clone()),
                        });
                    }
                }
                SensorKind::LocationDependent => {
                    if node.mobility == Mobility::Mobile {
                        out.push(Violation::MobileLocationSensor {
                            node: node.name.clone(),
                            sensor: s.clone(),
                        });
                    }
                }
            }
        }
        let (mut sensors, mut actuators) = (BTreeSet::new(), BTreeSet::new());
        node.process.physical_names(&mut sensors, &mut actuators);
        for s in sensors {
            if !node.interface.sensors.contains_key(&s) {
                out.push(Violation::UndefinedSensor {
                    node: node.name.clone(),
                    sensor: s,
                });
            }
        }
        for a in actuators {
            if !node.interface.actuators.contains_key(&a) {
                out.push(Violation::UndefinedActuator {
                    node: node.name.clone(),
                    actuator: a,
                });
            }
        }
        let stored = node
            .interface
            .sensors
            .iter()
            .map(|(s, v)| (s, v, u.sensor(s).map(|d| &d.domain)))
            .chain(node.interface.actuators.iter().map(|(a, v)| (a, v, u.actuator(a))));
        for (name, v, domain) in stored {
            if let Some(d) = domain {
                if !d.contains(v) {
                    out.push(Violation::ValueOutOfDomain {
                        node: node.name.clone(),
                        name: name.clone(),
                        value: v.clone(),
                    });
                }
            }
        }
    }
    out
}

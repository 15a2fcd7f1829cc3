//! Weak bisimilarity over the extensional transition system, the expansion
//! preorder, and observer contexts for individual extensional actions.

use std::collections::{BTreeSet, VecDeque};

use rustc_hash::FxHashMap as HashMap;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lts::{Label, Mode, TransitionSystem};
use crate::reduction::{barbs, validate, Barb, Engine, ReductionLabel};
use crate::syntax::{free_channels, BoolExpr, CommAction, Interface, Mobility, Network, Node, Prefix, Process, ValueExpr};
use crate::universe::ModelUniverse;
use crate::value::{Name, Value};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// One attacker move of the bisimulation game: the side that moves and the
/// (weak) action it performs.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Move {
    pub side: Side,
    pub label: Label,
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::Left => "left",
            Side::Right => "right",
        };
        write!(f, "{side}:{}", self.label)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Bisimilar,
    Distinct,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Stats {
    pub left_states: usize,
    pub right_states: usize,
    /// Blocks of the coarsest weak bisimulation on the disjoint union.
    pub blocks: usize,
    pub rounds: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct EquivalenceVerdict {
    pub result: Outcome,
    /// Empty when bisimilar. Otherwise a play in which the defender has run
    /// out of answers after the last move.
    pub witness: Vec<Move>,
    pub stats: Stats,
}

impl EquivalenceVerdict {
    pub fn is_bisimilar(&self) -> bool {
        self.result == Outcome::Bisimilar
    }
}

/// Weak bisimilarity of two networks over one universe.
pub fn weak_bisimilar(m: &Network, n: &Network, u: &ModelUniverse, budget: usize) -> Result<EquivalenceVerdict> {
    weak_bisimilar_across(m, u, n, u, budget)
}

/// Weak bisimilarity where each network has its own universe. The two
/// universes must agree on everything an observer can see: locations,
/// distances, the mobility bound, sensors, actuators, and the declarations
/// of channels free on either side.
pub fn weak_bisimilar_across(
    m: &Network,
    um: &ModelUniverse,
    n: &Network,
    un: &ModelUniverse,
    budget: usize,
) -> Result<EquivalenceVerdict> {
    check_compatible(m, um, n, un)?;
    let left = Engine::default().build_lts(m, um, Mode::Extensional, budget, true)?;
    let right = Engine::default().build_lts(n, un, Mode::Extensional, budget, true)?;
    Ok(bisimulation_game(&left, &right))
}

fn check_compatible(m: &Network, um: &ModelUniverse, n: &Network, un: &ModelUniverse) -> Result<()> {
    let (a, b) = (um.to_decl(), un.to_decl());
    let mut same_locations: Vec<&Name> = a.locations.iter().collect();
    let mut other: Vec<&Name> = b.locations.iter().collect();
    same_locations.sort();
    other.sort();
    if same_locations != other {
        return Err(Error::ConfigViolation("the universes declare different locations".into()));
    }
    for h in um.locations() {
        for k in um.locations() {
            if um.distance(h, k) != un.distance(h, k) {
                return Err(Error::ConfigViolation(format!("the universes disagree on the distance between {h} and {k}")));
            }
        }
    }
    if um.delta() != un.delta() {
        return Err(Error::ConfigViolation("the universes have different mobility bounds".into()));
    }
    let mut sa = a.sensors.clone();
    let mut sb = b.sensors.clone();
    sa.sort_by(|x, y| x.0.cmp(&y.0));
    sb.sort_by(|x, y| x.0.cmp(&y.0));
    if sa != sb {
        return Err(Error::ConfigViolation("the universes declare different sensors".into()));
    }
    let mut aa = a.actuators.clone();
    let mut ab = b.actuators.clone();
    aa.sort_by(|x, y| x.0.cmp(&y.0));
    ab.sort_by(|x, y| x.0.cmp(&y.0));
    if aa != ab {
        return Err(Error::ConfigViolation("the universes declare different actuators".into()));
    }
    let free: BTreeSet<Name> = free_channels(m).into_iter().chain(free_channels(n)).collect();
    for c in free {
        let da = um.channel(&c);
        let db = un.channel(&c);
        if da != db {
            return Err(Error::ConfigViolation(format!("the universes disagree on the free channel {c}")));
        }
    }
    Ok(())
}

/// Interned labels and the disjoint union of two transition systems.
struct Joint {
    labels: Vec<Label>,
    tau: u32,
    /// Strong edges per state.
    strong: Vec<Vec<(u32, u32)>>,
    left_states: usize,
}

impl Joint {
    fn new(systems: &[&TransitionSystem]) -> Joint {
        let mut ids: HashMap<Label, u32> = HashMap::default();
        let mut labels = vec![Label::Tau];
        ids.insert(Label::Tau, 0);
        let total: usize = systems.iter().map(|t| t.num_states()).sum();
        let mut strong = vec![Vec::new(); total];
        let mut offset = 0;
        for t in systems {
            for (a, l, b) in &t.edges {
                let id = *ids.entry(l.clone()).or_insert_with(|| {
                    labels.push(l.clone());
                    (labels.len() - 1) as u32
                });
                strong[offset + a].push((id, (offset + b) as u32));
            }
            offset += t.num_states();
        }
        Joint {
            labels,
            tau: 0,
            strong,
            left_states: systems[0].num_states(),
        }
    }

    fn len(&self) -> usize {
        self.strong.len()
    }

    /// States reachable through zero or more `tau` edges, sorted.
    fn tau_closures(&self) -> Vec<Vec<u32>> {
        (0..self.len())
            .into_par_iter()
            .map(|s| {
                let mut seen = BTreeSet::from([s as u32]);
                let mut queue = vec![s as u32];
                while let Some(x) = queue.pop() {
                    for &(l, y) in &self.strong[x as usize] {
                        if l == self.tau && seen.insert(y) {
                            queue.push(y);
                        }
                    }
                }
                seen.into_iter().collect()
            })
            .collect()
    }

    /// Weak edges: `s ==tau^==> t` (zero or more) and `s ==a==> t`.
    fn weak_edges(&self, closure: &[Vec<u32>]) -> Vec<Vec<(u32, u32)>> {
        (0..self.len())
            .into_par_iter()
            .map(|s| {
                let mut out: Vec<(u32, u32)> = closure[s].iter().map(|&t| (self.tau, t)).collect();
                for &x in &closure[s] {
                    for &(l, y) in &self.strong[x as usize] {
                        if l != self.tau {
                            out.extend(closure[y as usize].iter().map(|&t| (l, t)));
                        }
                    }
                }
                out.sort_unstable();
                out.dedup();
                out
            })
            .collect()
    }
}

fn bisimulation_game(left: &TransitionSystem, right: &TransitionSystem) -> EquivalenceVerdict {
    let joint = Joint::new(&[left, right]);
    let closure = joint.tau_closures();
    let weak = joint.weak_edges(&closure);
    let history = refine(&weak);
    let last = history.last().expect("at least the initial partition");
    let (l0, r0) = (left.initial, joint.left_states + right.initial);
    let blocks = last.iter().copied().collect::<BTreeSet<_>>().len();
    let stats = Stats {
        left_states: left.num_states(),
        right_states: right.num_states(),
        blocks,
        rounds: history.len() - 1,
    };
    if last[l0] == last[r0] {
        return EquivalenceVerdict {
            result: Outcome::Bisimilar,
            witness: Vec::new(),
            stats,
        };
    }
    let witness = distinguishing_play(&joint, &weak, &history, l0, r0);
    EquivalenceVerdict {
        result: Outcome::Distinct,
        witness,
        stats,
    }
}

/// Signature refinement to the coarsest partition stable under the weak
/// edges. Returns the partition after every round; round 0 is trivial.
fn refine(weak: &[Vec<(u32, u32)>]) -> Vec<Vec<u32>> {
    let n = weak.len();
    let mut history = vec![vec![0u32; n]];
    let mut count = 1;
    loop {
        let block = history.last().unwrap();
        let sigs: Vec<Vec<(u32, u32)>> = weak
            .par_iter()
            .map(|edges| {
                let mut sig: Vec<(u32, u32)> = edges.iter().map(|&(l, t)| (l, block[t as usize])).collect();
                sig.sort_unstable();
                sig.dedup();
                sig
            })
            .collect();
        let mut ids: HashMap<(u32, &[(u32, u32)]), u32> = HashMap::default();
        let next: Vec<u32> = (0..n)
            .map(|s| {
                let fresh = ids.len() as u32;
                *ids.entry((block[s], &sigs[s])).or_insert(fresh)
            })
            .collect();
        let new_count = ids.len();
        drop(ids);
        history.push(next);
        if new_count == count {
            break;
        }
        count = new_count;
    }
    history
}

fn separation(history: &[Vec<u32>], s: usize, t: usize) -> Option<usize> {
    history.iter().position(|b| b[s] != b[t])
}

fn distinguishing_play(joint: &Joint, weak: &[Vec<(u32, u32)>], history: &[Vec<u32>], l0: usize, r0: usize) -> Vec<Move> {
    let side_of = |s: usize| if s < joint.left_states { Side::Left } else { Side::Right };
    let mut play = Vec::new();
    let (mut s, mut t) = (l0, r0);
    while let Some(r) = separation(history, s, t) {
        let prev = &history[r - 1];
        let sig = |x: usize| -> BTreeSet<(u32, u32)> { weak[x].iter().map(|&(l, y)| (l, prev[y as usize])).collect() };
        let (ss, st) = (sig(s), sig(t));
        let (attacker, defender, (label, target)) = match ss.difference(&st).next() {
            Some(&m) => (s, t, m),
            None => (t, s, *st.difference(&ss).next().expect("signatures differ")),
        };
        let next_attacker = weak[attacker]
            .iter()
            .find(|&&(l, y)| l == label && prev[y as usize] == target)
            .map(|&(_, y)| y as usize)
            .expect("move exists");
        play.push(Move {
            side: side_of(attacker),
            label: joint.labels[label as usize].clone(),
        });
        // the defender's most resilient answer
        let answer = weak[defender]
            .iter()
            .filter(|&&(l, _)| l == label)
            .map(|&(_, y)| y as usize)
            .max_by_key(|&y| (separation(history, next_attacker, y).unwrap_or(usize::MAX), std::cmp::Reverse(y)));
        match answer {
            None => break,
            Some(y) => {
                if side_of(attacker) == Side::Left {
                    (s, t) = (next_attacker, y);
                } else {
                    (s, t) = (y, next_attacker);
                }
            }
        }
    }
    play
}

/// The expansion preorder: `m` is expanded by `n`, written `m ≲ n`. `n` may
/// use more internal steps than `m`: it answers each `tau` of `m` with one
/// or more, while `m` answers a `tau` of `n` with at most one, and any other
/// action of `n` with a single strong step.
pub fn expansion(m: &Network, n: &Network, u: &ModelUniverse, budget: usize) -> Result<bool> {
    let small = Engine::default().build_lts(m, u, Mode::Extensional, budget, true)?;
    let large = Engine::default().build_lts(n, u, Mode::Extensional, budget, true)?;
    Ok(expands(&large, &small))
}

/// Greatest relation `R ⊆ E × S` such that every strong move of `E` is
/// answered by at most one step of `S`, and every strong move of `S` by a
/// weak move of `E` with at least one step.
fn expands(e: &TransitionSystem, s: &TransitionSystem) -> bool {
    let joint = Joint::new(&[e, s]);
    let off = joint.left_states;
    let closure = joint.tau_closures();
    // weak moves of E with at least one step
    let plus: Vec<Vec<(u32, u32)>> = (0..off)
        .into_par_iter()
        .map(|x| {
            let mut out = Vec::new();
            for &y in &closure[x] {
                for &(l, z) in &joint.strong[y as usize] {
                    out.extend(closure[z as usize].iter().map(|&w| (l, w)));
                }
            }
            out.sort_unstable();
            out.dedup();
            out
        })
        .collect();
    let ns = s.num_states();
    let (strong, plus, tau) = (&joint.strong, &plus, joint.tau);
    let mut rel = vec![vec![true; ns]; off];
    loop {
        let snapshot = &rel;
        let removals: Vec<(usize, usize)> = (0..off)
            .into_par_iter()
            .flat_map_iter(|x| {
                (0..ns).filter_map(move |y| {
                    if !snapshot[x][y] {
                        return None;
                    }
                    let sy = y + off;
                    let e_ok = strong[x].iter().all(|&(l, x2)| {
                        let x2 = x2 as usize;
                        (l == tau && snapshot[x2][y])
                            || strong[sy]
                                .iter()
                                .any(|&(l2, y2)| l2 == l && snapshot[x2][y2 as usize - off])
                    });
                    let s_ok = e_ok
                        && strong[sy].iter().all(|&(l, y2)| {
                            let y2 = y2 as usize - off;
                            plus[x].iter().any(|&(l2, x2)| l2 == l && snapshot[x2 as usize][y2])
                        });
                    (!s_ok).then_some((x, y))
                })
            })
            .collect();
        if removals.is_empty() {
            break;
        }
        for (x, y) in removals {
            rel[x][y] = false;
        }
    }
    rel[e.initial][s.initial]
}

/// A context that detects one extensional action: a single stationary node
/// owning a fresh actuator whose barb `flag` reports the detection.
#[derive(Clone, Debug)]
pub struct ObserverTest {
    pub network: Network,
    /// The universe extended with the fresh actuator.
    pub universe: ModelUniverse,
    pub flag: Barb,
    /// For actuator-change tests, the change that must happen before the
    /// flag counts.
    pub trigger: Option<Name>,
}

fn fresh_name(taken: impl Fn(&Name) -> bool, base: &str) -> Name {
    let mut n = Name::new(base);
    while taken(&n) {
        n = n.primed();
    }
    n
}

/// Builds the observer for `action` against `net` (whose node names must be
/// avoided) over `u`. Physical actions have no observer.
pub fn build_observer(action: &Label, net: &Network, u: &ModelUniverse) -> Result<ObserverTest> {
    let node_name = fresh_name(|n| net.nodes.iter().any(|m| &m.name == n), "obs");
    let flag = fresh_name(|n| u.actuator(n).is_some() || u.sensor(n).is_some() || u.is_channel(n), "flag");
    let mut universe = u.clone();
    universe.add_actuator(flag.clone(), vec![Value::Int(0), Value::Int(1)])?;
    let write = |v: i64, p: Process| {
        Process::prefix(
            Prefix::WriteActuator {
                value: ValueExpr::Lit(Value::Int(v)),
                actuator: flag.clone(),
            },
            p,
        )
    };
    let raise_and_lower = || write(1, write(0, Process::Nil));
    let (location, process, watch, trigger) = match action {
        Label::Act(a) => {
            let k = u.locations().first().cloned().ok_or_else(|| Error::ConfigViolation("no locations".into()))?;
            (k, write(1, Process::Nil), Value::Int(0), Some(a.clone()))
        }
        Label::Sigma => {
            let k = u.locations().first().cloned().ok_or_else(|| Error::ConfigViolation("no locations".into()))?;
            (k, Process::sleep(raise_and_lower()), Value::Int(1), None)
        }
        Label::SendObs { channel, value, observer } => {
            let x = Name::new("x");
            let check = Process::cond(
                BoolExpr::Eq(ValueExpr::Var(x.clone()), ValueExpr::Lit(value.clone())),
                raise_and_lower(),
                Process::Nil,
            );
            let pi = CommAction::Receive {
                channel: channel.clone(),
                bind: Some(x),
            };
            (observer.clone(), Process::timeout(pi, check, Process::Nil), Value::Int(1), None)
        }
        Label::RecvObs { channel, value, observer } => {
            let pi = CommAction::Send {
                channel: channel.clone(),
                payload: ValueExpr::Lit(value.clone()),
            };
            (observer.clone(), Process::timeout(pi, raise_and_lower(), Process::Nil), Value::Int(1), None)
        }
        other => return Err(Error::UnobservableAction(other.to_string())),
    };
    let mut interface = Interface::default();
    interface.actuators.insert(flag.clone(), Value::Int(0));
    let network = Network::node(Node {
        name: node_name,
        interface,
        process,
        mobility: Mobility::Stationary,
        location: location.clone(),
    });
    Ok(ObserverTest {
        network,
        universe,
        flag: Barb {
            actuator: flag,
            location,
            value: watch,
        },
        trigger,
    })
}

/// Runs `net | test` and reports whether the flag barb is reached. Only
/// internal and time steps of the composition are followed, plus the
/// observer's own actuator changes and, for actuator tests, one change of
/// the watched actuator.
pub fn observe(net: &Network, u: &ModelUniverse, test: &ObserverTest, budget: usize) -> Result<bool> {
    validate(net, u)?;
    let system = net.clone().par(test.network.clone());
    validate(&system, &test.universe)?;
    let engine = Engine::default();
    let start = crate::congruence::canonicalize(&system);
    let armed = test.trigger.is_none();
    let mut seen: HashMap<(Network, bool), ()> = HashMap::default();
    let mut queue = VecDeque::from([(start, armed)]);
    while let Some((m, armed)) = queue.pop_front() {
        if seen.contains_key(&(m.clone(), armed)) {
            continue;
        }
        if armed && barbs(&m).contains(&test.flag) {
            return Ok(true);
        }
        if seen.len() >= budget {
            return Err(Error::StateSpaceBudgetExceeded {
                limit: budget,
                frontier: queue.len(),
                sample: vec![crate::frontend::print_network(&m)],
            });
        }
        seen.insert((m.clone(), armed), ());
        for (l, m2) in engine.reductions(&m, &test.universe) {
            let next_armed = match &l {
                ReductionLabel::Tau | ReductionLabel::TimeStep => Some(armed),
                ReductionLabel::Act(a) if *a == test.flag.actuator => Some(armed),
                ReductionLabel::Act(a) if !armed && Some(a) == test.trigger.as_ref() => Some(true),
                ReductionLabel::Act(_) => None,
            };
            if let Some(b) = next_armed {
                queue.push_back((m2, b));
            }
        }
    }
    Ok(false)
}

/// How a law instance is checked.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// The left side expands the right side.
    Expansion,
    Bisimilarity,
}

/// A concrete instance of an algebraic law together with a counterpart
/// that violates its side condition.
#[derive(Clone, Debug)]
pub struct LawInstance {
    pub law: u8,
    pub statement: &'static str,
    pub kind: LawKind,
    pub left: Network,
    pub right: Network,
    pub violated_left: Network,
    pub violated_right: Network,
}

#[derive(Clone, Debug, Serialize)]
pub struct LawReport {
    pub law: u8,
    pub statement: &'static str,
    pub kind: LawKind,
    pub holds: bool,
    /// The side-condition-violating counterpart is told apart.
    pub counterpart_distinct: bool,
    pub counterpart_witness: Vec<Move>,
}

impl LawReport {
    pub fn passed(&self) -> bool {
        self.holds && self.counterpart_distinct
    }
}

const LAW_UNIVERSE: &str = "
location h, k
dist h k 1
delta 1
channel l range local domain {0, 1}
channel g range inf domain {0, 1}
channel c range inf domain {0, 1}
channel c0 range 0 domain {0, 1}
channel r range 0 domain {0, 1}
sensor s node domain {0, 1}
actuator a domain {0, 1}
network
0
";

#[rustfmt::skip]
const LAWS: [(u8, &str, LawKind, [&str; 4]); 7] = [
    (1, "an actuator write of the current value is internal", LawKind::Expansion, [
        "n[a = 1 |> a!1.sigma.a!0 | timeout(g!<0>)] stat @ h",
        "n[a = 1 |> sigma.a!0 | timeout(g!<0>)] stat @ h",
        "n[a = 0 |> a!1.sigma.a!0 | timeout(g!<0>)] stat @ h",
        "n[a = 0 |> sigma.a!0 | timeout(g!<0>)] stat @ h",
    ]),
    (2, "reading the position substitutes the current location", LawKind::Expansion, [
        "n[|> @(x).[x = h] timeout(g!<1>) ; timeout(g!<0>)] mob @ h",
        "n[|> [h = h] timeout(g!<1>) ; timeout(g!<0>)] mob @ h",
        "n[|> @(x).[x = h] timeout(g!<1>) ; timeout(g!<0>)] mob @ h",
        "n[|> [k = h] timeout(g!<1>) ; timeout(g!<0>)] mob @ h",
    ]),
    (3, "intra-node communication on a local channel is internal", LawKind::Expansion, [
        "n[|> timeout(l!<1>.timeout(g!<1>), nil) | timeout(l?(x).[x = 1] timeout(g!<0>) ; nil, nil)] stat @ h",
        "n[|> timeout(g!<1>) | [1 = 1] timeout(g!<0>) ; nil] stat @ h",
        "n[|> timeout(c!<1>.timeout(g!<1>), nil) | timeout(c?(x).[x = 1] timeout(g!<0>) ; nil, nil)] stat @ h",
        "n[|> timeout(g!<1>) | [1 = 1] timeout(g!<0>) ; nil] stat @ h",
    ]),
    (4, "restricted Internet communication between nodes is internal", LawKind::Expansion, [
        "new c . (n[|> timeout(c!<1>.timeout(g!<1>), nil)] stat @ h | m[|> timeout(c?(x).[x = 1] timeout(g!<0>) ; nil, nil)] stat @ k)",
        "new c . (n[|> timeout(g!<1>)] stat @ h | m[|> [1 = 1] timeout(g!<0>) ; nil] stat @ k)",
        "new c0 . (n[|> timeout(c0!<1>.timeout(g!<1>), nil)] stat @ h | m[|> timeout(c0?(x).[x = 1] timeout(g!<0>) ; nil, nil)] stat @ k)",
        "new c0 . (n[|> timeout(g!<1>)] stat @ h | m[|> [1 = 1] timeout(g!<0>) ; nil] stat @ k)",
    ]),
    (5, "a process without communication or actuator writes is garbage", LawKind::Bisimilarity, [
        "n[s = 0, a = 0 |> fix X. s?(x). @(y). [x = 1] sigma.X ; sigma.X] stat @ h",
        "n[s = 0, a = 0 |> nil] stat @ h",
        "n[s = 0, a = 0 |> fix X. s?(x). [x = 1] a!1.sigma.X ; a!0.sigma.X] stat @ h",
        "n[s = 0, a = 0 |> nil] stat @ h",
    ]),
    (6, "a terminated node without actuators is garbage", LawKind::Bisimilarity, [
        "n[|> nil] stat @ h",
        "0",
        "n[a = 0 |> nil] stat @ h",
        "0",
    ]),
    (7, "nodes with empty interfaces and only unbounded or local channels are anonymous and their mobility is unobservable", LawKind::Bisimilarity, [
        "n[|> fix X. timeout(g!<1>.sigma.X, sigma.X) | fix Y. timeout(l!<0>.sigma.Y, sigma.Y)] mob @ h",
        "m[|> fix X. timeout(g!<1>.sigma.X, sigma.X) | fix Y. timeout(l!<0>.sigma.Y, sigma.Y)] stat @ k",
        "n[|> fix X. timeout(r!<1>.sigma.X, sigma.X)] mob @ h",
        "m[|> fix X. timeout(r!<1>.sigma.X, sigma.X)] stat @ k",
    ]),
];

/// The bundled law instances and their universe.
pub fn law_instances() -> (ModelUniverse, Vec<LawInstance>) {
    let (u, _) = crate::frontend::parse_model(LAW_UNIVERSE).expect("bundled universe parses");
    let parse = |s: &str| crate::frontend::parse_network(s, &u).expect("bundled law parses");
    let laws = LAWS
        .iter()
        .map(|&(law, statement, kind, [l, r, vl, vr])| LawInstance {
            law,
            statement,
            kind,
            left: parse(l),
            right: parse(r),
            violated_left: parse(vl),
            violated_right: parse(vr),
        })
        .collect();
    (u, laws)
}

/// Checks every bundled law instance and its violating counterpart.
pub fn check_algebraic_laws(budget: usize) -> Result<Vec<LawReport>> {
    let (u, laws) = law_instances();
    laws.into_iter()
        .map(|inst| {
            let holds = match inst.kind {
                LawKind::Expansion => {
                    expansion(&inst.right, &inst.left, &u, budget)?
                        && weak_bisimilar(&inst.left, &inst.right, &u, budget)?.is_bisimilar()
                }
                LawKind::Bisimilarity => weak_bisimilar(&inst.left, &inst.right, &u, budget)?.is_bisimilar(),
            };
            let counter = weak_bisimilar(&inst.violated_left, &inst.violated_right, &u, budget)?;
            Ok(LawReport {
                law: inst.law,
                statement: inst.statement,
                kind: inst.kind,
                holds,
                counterpart_distinct: !counter.is_bisimilar(),
                counterpart_witness: counter.witness,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_model, parse_network};
    use crate::lts::build_lts;

    const BUDGET: usize = 20_000;

    const EXAMPLES: &str = "
location h, k
dist h k 1
delta 0
channel c range inf
actuator a domain {0, 1}
network
0
";

    fn universe() -> ModelUniverse {
        parse_model(EXAMPLES).unwrap().0
    }

    fn net(s: &str, u: &ModelUniverse) -> Network {
        parse_network(s, u).unwrap()
    }

    #[test]
    fn delayed_transmission_is_distinguished() {
        let u = universe();
        let m = net("n[|> sigma.timeout(c!<>)] stat @ h", &u);
        let n = net("n[|> timeout(c!<>)] stat @ h", &u);
        let v = weak_bisimilar(&m, &n, &u, BUDGET).unwrap();
        assert_eq!(v.result, Outcome::Distinct);
        assert!(!v.witness.is_empty());
    }

    #[test]
    fn actuator_sequences_are_distinguished_by_an_actuator_change() {
        let u = universe();
        let m = net("n[a = 0 |> a!1 | a!0.a!1] stat @ h", &u);
        let n = net("n[a = 0 |> a!1.a!0.a!1] stat @ h", &u);
        let v = weak_bisimilar(&m, &n, &u, BUDGET).unwrap();
        assert_eq!(v.result, Outcome::Distinct);
        assert!(v.witness.iter().any(|mv| matches!(mv.label, Label::Act(_))), "{:?}", v.witness);
    }

    #[test]
    fn identity_is_bisimilar() {
        let u = universe();
        let m = net("n[a = 0 |> a!1 | a!0.a!1] stat @ h", &u);
        let v = weak_bisimilar(&m, &m, &u, BUDGET).unwrap();
        assert!(v.is_bisimilar());
        assert!(v.witness.is_empty());
        assert_eq!(v.stats.left_states, v.stats.right_states);
    }

    #[test]
    fn witness_replays_on_the_transition_systems() {
        // each move of the play is available as a weak move on its side
        let u = universe();
        let m = net("n[a = 0 |> a!1 | a!0.a!1] stat @ h", &u);
        let n = net("n[a = 0 |> a!1.a!0.a!1] stat @ h", &u);
        let v = weak_bisimilar(&m, &n, &u, BUDGET).unwrap();
        let first = &v.witness[0];
        let lts = build_lts(if first.side == Side::Left { &m } else { &n }, &u, Mode::Extensional, BUDGET).unwrap();
        let weakly_enabled: BTreeSet<Label> = {
            let mut states = vec![lts.initial];
            let mut i = 0;
            while i < states.len() {
                for (_, l, t) in lts.out_edges(states[i]) {
                    if l.is_tau() && !states.contains(t) {
                        states.push(*t);
                    }
                }
                i += 1;
            }
            states.iter().flat_map(|&s| lts.out_edges(s).iter().map(|e| e.1.clone())).collect()
        };
        assert!(first.label.is_tau() || weakly_enabled.contains(&first.label));
    }

    #[test]
    fn expansion_is_reflexive_and_counts_internal_steps() {
        let (u, laws) = law_instances();
        let law1 = &laws[0];
        assert!(expansion(&law1.left, &law1.left, &u, BUDGET).unwrap());
        // the right side has fewer internal steps, so it expands nothing more
        assert!(expansion(&law1.right, &law1.left, &u, BUDGET).unwrap());
        assert!(!expansion(&law1.left, &law1.right, &u, BUDGET).unwrap());
    }

    #[test]
    fn all_laws_hold_and_counterparts_are_distinct() {
        let reports = check_algebraic_laws(BUDGET).unwrap();
        assert_eq!(reports.len(), 7);
        for r in &reports {
            assert!(r.holds, "law {} does not hold", r.law);
            assert!(r.counterpart_distinct, "law {} counterpart not distinguished", r.law);
            assert!(!r.counterpart_witness.is_empty());
        }
    }

    #[test]
    fn bisimilar_law_pairs_have_equal_strong_barbs() {
        let (u, laws) = law_instances();
        for l in &laws {
            assert!(weak_bisimilar(&l.left, &l.right, &u, BUDGET).unwrap().is_bisimilar());
            assert_eq!(barbs(&l.left), barbs(&l.right), "law {}", l.law);
        }
    }

    #[test]
    fn physical_actions_have_no_observer() {
        let u = universe();
        let label = Label::ActuatorEnv {
            actuator: Name::new("a"),
            location: Name::new("h"),
            value: Value::Int(0),
        };
        assert!(matches!(build_observer(&label, &Network::empty(), &u), Err(Error::UnobservableAction(_))));
    }

    #[test]
    fn send_observer_sees_the_prompt_transmission() {
        let u = universe();
        let label = Label::SendObs {
            channel: Name::new("c"),
            value: Value::Unit,
            observer: Name::new("k"),
        };
        let prompt = net("n[|> timeout(c!<>)] stat @ h", &u);
        let test = build_observer(&label, &prompt, &u).unwrap();
        assert!(observe(&prompt, &u, &test, BUDGET).unwrap());
        let delayed = net("n[|> sigma.timeout(c!<>)] stat @ h", &u);
        assert!(!observe(&delayed, &u, &test, BUDGET).unwrap());
        assert!(!observe(&Network::empty(), &u, &test, BUDGET).unwrap());
    }

    #[test]
    fn sigma_observer_raises_after_one_step() {
        let u = universe();
        let test = build_observer(&Label::Sigma, &Network::empty(), &u).unwrap();
        assert!(observe(&Network::empty(), &u, &test, BUDGET).unwrap());
        // time cannot pass before the actuator changes
        let stuck = net("n[a = 0 |> a!1.a!0.sigma.nil] stat @ h", &u);
        assert!(!observe(&stuck, &u, &test, BUDGET).unwrap());
    }

    /// Weak transitions from the initial state, straight from the LTS.
    fn weak_labels(net: &Network, u: &ModelUniverse) -> BTreeSet<Label> {
        let lts = build_lts(net, u, Mode::Extensional, BUDGET).unwrap();
        let closure = |s: usize| {
            let mut seen = vec![s];
            let mut i = 0;
            while i < seen.len() {
                for (_, l, t) in lts.out_edges(seen[i]) {
                    if l.is_tau() && !seen.contains(t) {
                        seen.push(*t);
                    }
                }
                i += 1;
            }
            seen
        };
        closure(lts.initial)
            .into_iter()
            .flat_map(|s| lts.out_edges(s).iter().map(|e| e.1.clone()).collect::<Vec<_>>())
            .filter(|l| !l.is_tau() && !l.is_physical())
            .collect()
    }

    #[test]
    fn observers_agree_with_the_transition_system() {
        let u = universe();
        let nets = [
            "n[|> timeout(c!<>)] stat @ h",
            "n[|> sigma.timeout(c!<>)] stat @ h",
            "n[|> timeout(c?().sigma.nil)] stat @ k",
            "n[a = 0 |> a!1 | a!0.a!1] stat @ h",
            "n[a = 0 |> fix X. a!1.a!0.sigma.X] stat @ h",
            "0",
        ];
        let mut candidates: BTreeSet<Label> = BTreeSet::new();
        for s in nets {
            candidates.extend(weak_labels(&net(s, &u), &u));
        }
        candidates.insert(Label::Act(Name::new("a")));
        for s in nets {
            let m = net(s, &u);
            let weak = weak_labels(&m, &u);
            for l in &candidates {
                let test = build_observer(l, &m, &u).unwrap();
                assert_eq!(observe(&m, &u, &test, BUDGET).unwrap(), weak.contains(l), "{s} / {l}");
            }
        }
    }

    #[test]
    fn mismatched_universes_are_rejected() {
        let u = universe();
        let other = u.with_delta(3);
        let m = net("0", &u);
        assert!(matches!(weak_bisimilar_across(&m, &u, &m, &other, BUDGET), Err(Error::ConfigViolation(_))));
    }
}

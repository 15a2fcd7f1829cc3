//! Checks of the time properties, the well-timedness bound and the
//! agreement of reduction and transition semantics on concrete state
//! spaces.

use std::collections::{BTreeSet, HashMap};

use serde::Serialize;

use crate::congruence::canonicalize;
use crate::error::{Error, Result};
use crate::frontend::print_network;
use crate::lts::{explore, Label, TransitionSystem};
use crate::reduction::{update_sensor, validate, Engine, ReductionLabel};
use crate::syntax::{Network, Prefix, Process};
use crate::universe::ModelUniverse;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub check: &'static str,
    pub state: String,
    pub explanation: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct PropertyReport {
    pub property: &'static str,
    /// Reachable states the property was checked on.
    pub states: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

pub const MAXIMAL_PROGRESS: &str = "maximal progress";
pub const PATIENCE: &str = "patience";
pub const TIME_DETERMINISM: &str = "local time determinism";
pub const WELL_TIMEDNESS: &str = "well-timedness";
pub const HARMONY: &str = "harmony";

/// Untimed prefixes a process can consume before it must let time pass.
pub fn pfx(p: &Process) -> Result<u64> {
    Ok(match p {
        Process::Nil => 0,
        Process::Prefix(Prefix::Sleep, _) => 0,
        Process::Prefix(_, c) => 1 + pfx(c)?,
        Process::Timeout(_, then, _) => 1 + pfx(then)?,
        Process::Cond(_, a, b) => pfx(a)?.max(pfx(b)?),
        Process::Par(ps) => ps.iter().map(pfx).sum::<Result<u64>>()?,
        Process::Fix(_, body) => pfx(body)?,
        Process::Var(x) => return Err(Error::NotTimeGuarded(x.to_string())),
    })
}

/// Upper bound on the length of any sequence of instantaneous reductions.
pub fn rd_bound(net: &Network) -> Result<u64> {
    net.nodes.iter().map(|n| pfx(&n.process)).sum()
}

/// Maximal progress, patience, local time determinism and well-timedness
/// on every state reachable through reductions and sensor updates.
pub fn check_time_properties(net: &Network, u: &ModelUniverse, budget: usize) -> Result<PropertyReport> {
    Engine::default().check_time_properties(net, u, budget)
}

/// Reduction successors and intensional transitions coincide on `tau`,
/// actuator changes and time steps, on every state reachable through
/// reductions and sensor updates.
pub fn check_harmony(net: &Network, u: &ModelUniverse, budget: usize) -> Result<PropertyReport> {
    Engine::default().check_harmony(net, u, budget)
}

/// Lengths of the longest instantaneous chains from every state; `None`
/// when a state lies on an instantaneous cycle.
pub(crate) fn longest_instantaneous_chains(sys: &TransitionSystem<Step>) -> Vec<Option<u64>> {
    #[derive(Clone, Copy)]
    enum Mark {
        Unvisited,
        Active,
        Done(Option<u64>),
    }
    fn visit(sys: &TransitionSystem<Step>, s: usize, marks: &mut [Mark]) -> Option<u64> {
        match marks[s] {
            Mark::Done(v) => return v,
            Mark::Active => return None,
            Mark::Unvisited => {}
        }
        marks[s] = Mark::Active;
        let mut best = Some(0);
        for (_, l, t) in sys.out_edges(s) {
            if matches!(l, Some(l) if l.is_instantaneous()) {
                best = match (best, visit(sys, *t, marks)) {
                    (Some(b), Some(v)) => Some(b.max(v + 1)),
                    _ => None,
                };
            }
        }
        marks[s] = Mark::Done(best);
        best
    }
    let mut marks = vec![Mark::Unvisited; sys.num_states()];
    (0..sys.num_states()).map(|s| visit(sys, s, &mut marks)).collect()
}

/// An edge of the explored state space: a reduction, or `None` for a sensor
/// update by the environment.
pub(crate) type Step = Option<ReductionLabel>;

impl Engine {
    pub(crate) fn environment_system(
        &self,
        net: &Network,
        u: &ModelUniverse,
        budget: usize,
    ) -> Result<TransitionSystem<Step>> {
        validate(net, u)?;
        explore(net, budget, true, |m| {
            let mut out: Vec<(Step, Network)> = self.reductions(m, u).into_iter().map(|(l, n)| (Some(l), n)).collect();
            for (s, decl) in u.sensors() {
                for h in u.locations() {
                    for v in decl.domain.values() {
                        let n = update_sensor(m, u, s, h, v).expect("declared sensor, location and value");
                        if &n != m {
                            out.push((None, n));
                        }
                    }
                }
            }
            out
        })
    }

    pub fn check_time_properties(&self, net: &Network, u: &ModelUniverse, budget: usize) -> Result<PropertyReport> {
        let sys = self.environment_system(net, u, budget)?;
        let chains = longest_instantaneous_chains(&sys);
        let mut out = Vec::new();
        let mut cex = |check, s: usize, explanation: String| {
            out.push(Counterexample {
                check,
                state: print_network(&sys.states[s]),
                explanation,
            })
        };
        for s in 0..sys.num_states() {
            let edges: Vec<(&ReductionLabel, usize)> =
                sys.out_edges(s).iter().filter_map(|(_, l, t)| l.as_ref().map(|l| (l, *t))).collect();
            let instantaneous: BTreeSet<String> =
                edges.iter().filter(|e| e.0.is_instantaneous()).map(|e| e.0.to_string()).collect();
            let timed: Vec<usize> = edges.iter().filter(|e| !e.0.is_instantaneous()).map(|e| e.1).collect();
            if !timed.is_empty() && !instantaneous.is_empty() {
                let offered: Vec<String> = instantaneous.into_iter().collect();
                cex(MAXIMAL_PROGRESS, s, format!("time passes although {} is enabled", offered.join(", ")));
            } else if timed.is_empty() && instantaneous.is_empty() {
                cex(PATIENCE, s, "no reduction is enabled, not even a time step".into());
            }
            for (i, &a) in timed.iter().enumerate() {
                for &b in &timed[i + 1..] {
                    if let Some(why) = time_determinism_violation(&sys.states[a], &sys.states[b], u) {
                        cex(TIME_DETERMINISM, s, why);
                    }
                }
            }
            let bound = rd_bound(&sys.states[s])?;
            match chains[s] {
                None => cex(WELL_TIMEDNESS, s, "lies on a cycle of instantaneous reductions".into()),
                Some(len) if len > bound => cex(
                    WELL_TIMEDNESS,
                    s,
                    format!("an instantaneous chain of length {len} exceeds the bound {bound}"),
                ),
                Some(_) => {}
            }
        }
        Ok(PropertyReport {
            property: "time",
            states: sys.num_states(),
            counterexamples: out,
        })
    }

    pub fn check_harmony(&self, net: &Network, u: &ModelUniverse, budget: usize) -> Result<PropertyReport> {
        let sys = self.environment_system(net, u, budget)?;
        let mut out = Vec::new();
        for (s, state) in sys.states.iter().enumerate() {
            let reduced: BTreeSet<(Label, Network)> = sys
                .out_edges(s)
                .iter()
                .filter_map(|(_, l, t)| l.as_ref().map(|l| (as_label(l), sys.states[*t].clone())))
                .collect();
            let derived: BTreeSet<(Label, Network)> = self
                .network_transitions(state, u)
                .into_iter()
                .filter(|(l, _)| matches!(l, Label::Tau | Label::Act(_) | Label::Sigma))
                .collect();
            for (l, m) in reduced.difference(&derived) {
                out.push(Counterexample {
                    check: HARMONY,
                    state: print_network(state),
                    explanation: format!("reduction {l} to {} has no matching transition", print_network(m)),
                });
            }
            for (l, m) in derived.difference(&reduced) {
                out.push(Counterexample {
                    check: HARMONY,
                    state: print_network(state),
                    explanation: format!("transition {l} to {} has no matching reduction", print_network(m)),
                });
            }
        }
        Ok(PropertyReport {
            property: HARMONY,
            states: sys.num_states(),
            counterexamples: out,
        })
    }
}

fn as_label(l: &ReductionLabel) -> Label {
    match l {
        ReductionLabel::Tau => Label::Tau,
        ReductionLabel::Act(a) => Label::Act(a.clone()),
        ReductionLabel::TimeStep => Label::Sigma,
    }
}

/// Two time successors of one state may differ only in where mobile nodes
/// went, and not by more than twice the mobility bound.
fn time_determinism_violation(a: &Network, b: &Network, u: &ModelUniverse) -> Option<String> {
    let (a, b) = (canonicalize(a), canonicalize(b));
    if a.restricted != b.restricted {
        return Some("time successors restrict different channels".into());
    }
    let index: HashMap<_, _> = b.nodes.iter().map(|n| (&n.name, n)).collect();
    if a.nodes.len() != b.nodes.len() {
        return Some("time successors have different nodes".into());
    }
    for n in &a.nodes {
        let Some(m) = index.get(&n.name) else {
            return Some(format!("node {} is missing from a time successor", n.name));
        };
        if n.process != m.process || n.interface != m.interface || n.mobility != m.mobility {
            return Some(format!("node {} evolves differently in two time successors", n.name));
        }
        let d = u.distance(&n.location, &m.location).unwrap_or(u32::MAX);
        if d > 2 * u.delta() {
            return Some(format!("node {} ends up {d} apart in two time successors", n.name));
        }
    }
    None
}

/// Validates and returns the reachable states of `net` under reductions.
pub fn reachable_states(net: &Network, u: &ModelUniverse, budget: usize) -> Result<Vec<Network>> {
    validate(net, u)?;
    Ok(Engine::default().reduction_system(net, u, budget)?.states)
}

//! Structural congruence as a canonical form.
//!
//! The canonical form elides `nil` and `0`, flattens and sorts parallel
//! compositions at both levels, resolves closed guards, renames recursion
//! binders by nesting depth, sorts nodes, and drops restricted channels that
//! are used nowhere. Recursion is never unfolded here; the transition rules
//! unfold it on demand.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use crate::syntax::{Network, Node, Process};
use crate::value::Name;

pub fn canonicalize(net: &Network) -> Network {
    let mut nodes: Vec<Node> = net
        .nodes
        .iter()
        .map(|n| Node {
            process: canonical_process(&n.process),
            ..n.clone()
        })
        .collect();
    nodes.sort();
    let mut used = BTreeSet::new();
    for n in &nodes {
        n.process.channels(&mut used);
    }
    let mut restricted: Vec<Name> = net.restricted.iter().filter(|c| used.contains(*c)).cloned().collect();
    restricted.sort();
    restricted.dedup();
    Network { restricted, nodes }
}

pub fn canonical_process(p: &Process) -> Process {
    canon(p, &mut Vec::new())
}

fn binder_name(depth: usize) -> Name {
    thread_local! {
        static NAMES: std::cell::RefCell<Vec<Name>> = const { std::cell::RefCell::new(Vec::new()) };
    }
    NAMES.with(|names| {
        let mut names = names.borrow_mut();
        while names.len() <= depth {
            let i = names.len();
            names.push(Name::new(&format!("X{i}")));
        }
        names[depth].clone()
    })
}

// `env` maps the recursion binders in scope (innermost last) to their
// canonical names.
fn canon(p: &Process, env: &mut Vec<(Name, Name)>) -> Process {
    canon_changed(p, env).unwrap_or_else(|| p.clone())
}

fn canon_arc(p: &Arc<Process>, env: &mut Vec<(Name, Name)>) -> (Arc<Process>, bool) {
    match canon_changed(p, env) {
        Some(q) => (Arc::new(q), true),
        None => (p.clone(), false),
    }
}

// Returns `None` when `p` is already canonical under `env`, so unchanged
// subterms keep sharing their allocation.
fn canon_changed(p: &Process, env: &mut Vec<(Name, Name)>) -> Option<Process> {
    match p {
        Process::Nil => None,
        Process::Var(x) => match env.iter().rev().find(|(old, _)| old == x) {
            Some((_, new)) if new != x => Some(Process::Var(new.clone())),
            _ => None,
        },
        Process::Prefix(pre, c) => {
            let (c, changed) = canon_arc(c, env);
            changed.then(|| Process::Prefix(pre.clone(), c))
        }
        Process::Timeout(pi, a, b) => {
            let (a, ca) = canon_arc(a, env);
            let (b, cb) = canon_arc(b, env);
            (ca || cb).then(|| Process::Timeout(pi.clone(), a, b))
        }
        Process::Cond(b, then, otherwise) => match b.eval() {
            Some(true) => Some(canon(then, env)),
            Some(false) => Some(canon(otherwise, env)),
            None => {
                let (t, ct) = canon_arc(then, env);
                let (o, co) = canon_arc(otherwise, env);
                (ct || co).then(|| Process::Cond(b.clone(), t, o))
            }
        },
        Process::Par(ps) => {
            let mut changed = false;
            let mut out = Vec::with_capacity(ps.len());
            for q in ps {
                let c = canon_changed(q, env);
                changed |= c.is_some();
                match c.unwrap_or_else(|| q.clone()) {
                    Process::Nil => changed = true,
                    Process::Par(inner) => {
                        changed = true;
                        out.extend(inner)
                    }
                    q => out.push(q),
                }
            }
            if !changed && out.windows(2).all(|w| w[0] <= w[1]) && out.len() > 1 {
                return None;
            }
            out.sort();
            Some(match out.len() {
                0 => Process::Nil,
                1 => out.pop().unwrap(),
                _ => Process::Par(out),
            })
        }
        Process::Fix(x, body) => {
            let fresh = binder_name(env.len());
            env.push((x.clone(), fresh.clone()));
            let (body, changed) = canon_arc(body, env);
            env.pop();
            (changed || fresh != *x).then_some(Process::Fix(fresh, body))
        }
    }
}

pub fn congruent(m: &Network, n: &Network) -> bool {
    canonicalize(m) == canonicalize(n)
}

/// Hash of the canonical form. Stable across runs of the same build.
pub fn structural_hash(net: &Network) -> u64 {
    let mut h = DefaultHasher::new();
    canonicalize(net).hash(&mut h);
    h.finish()
}

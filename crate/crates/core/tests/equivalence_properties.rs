mod common;

use cait_core::equivalence::law_instances;
use cait_core::{barbs, parse_network, update_sensor, weak_bisimilar, ModelUniverse, Name, Network, Value};

const BUDGET: usize = 20_000;

fn bisimilar(m: &Network, n: &Network, u: &ModelUniverse) -> bool {
    weak_bisimilar(m, n, u, BUDGET).unwrap().is_bisimilar()
}

/// Random networks, each next to a copy with an extra idle node.
fn pool(u: &ModelUniverse) -> Vec<Network> {
    let idle = parse_network("idle[|> nil] stat @ h", u).unwrap();
    let mut out = Vec::new();
    for seed in [3, 8, 11, 20, 41, 57] {
        let net = common::random_network(seed);
        out.push(net.clone().par(idle.clone()));
        out.push(net);
    }
    out
}

#[test]
fn bisimilarity_is_an_equivalence() {
    let u = common::universe();
    let nets = pool(&u);
    let k = nets.len();
    let mut rel = vec![vec![false; k]; k];
    for i in 0..k {
        for j in 0..k {
            rel[i][j] = bisimilar(&nets[i], &nets[j], &u);
        }
    }
    for i in 0..k {
        assert!(rel[i][i], "not reflexive at {i}");
        for j in 0..k {
            assert_eq!(rel[i][j], rel[j][i], "not symmetric at {i}, {j}");
            for l in 0..k {
                assert!(!(rel[i][j] && rel[j][l]) || rel[i][l], "not transitive at {i}, {j}, {l}");
            }
        }
    }
    // the idle node is invisible
    for i in (0..k).step_by(2) {
        assert!(rel[i][i + 1]);
    }
}

#[test]
fn bisimilar_networks_have_equal_strong_barbs() {
    let u = common::universe();
    let nets = pool(&u);
    for m in &nets {
        for n in &nets {
            if bisimilar(m, n, &u) {
                assert_eq!(barbs(m), barbs(n));
            }
        }
    }
    let (u, laws) = law_instances();
    for law in &laws {
        assert!(bisimilar(&law.left, &law.right, &u));
        assert_eq!(barbs(&law.left), barbs(&law.right), "law {}", law.law);
    }
}

#[test]
fn law_pairs_stay_bisimilar_in_context() {
    let (u, laws) = law_instances();
    let contexts: Vec<Network> = [
        "o[|> timeout(g?(x).sigma.nil, nil)] stat @ k",
        "o[|> fix Z. timeout(g!<1>.sigma.Z, sigma.Z)] stat @ h",
        "o[|> fix Z. timeout(c?(x).sigma.Z, sigma.Z)] mob @ k",
    ]
    .iter()
    .map(|s| parse_network(s, &u).unwrap())
    .collect();
    for law in &laws {
        let (m, n) = (&law.left, &law.right);
        for o in &contexts {
            assert!(
                bisimilar(&m.clone().par(o.clone()), &n.clone().par(o.clone()), &u),
                "law {} in parallel with {o:?}",
                law.law
            );
        }
        for c in ["g", "c"] {
            let c = Name::new(c);
            assert!(
                bisimilar(&m.clone().restrict(c.clone()), &n.clone().restrict(c.clone()), &u),
                "law {} under new {c}",
                law.law
            );
        }
        let s = Name::new("s");
        let has_sensor = |net: &Network| net.nodes.iter().any(|nd| nd.interface.sensors.contains_key(&s));
        if has_sensor(m) && has_sensor(n) {
            for v in [0, 1] {
                for h in u.locations() {
                    let (Ok(m2), Ok(n2)) = (
                        update_sensor(m, &u, &s, h, &Value::Int(v)),
                        update_sensor(n, &u, &s, h, &Value::Int(v)),
                    ) else {
                        continue;
                    };
                    assert!(bisimilar(&m2, &n2, &u), "law {} after s@{h} := {v}", law.law);
                }
            }
        }
    }
}

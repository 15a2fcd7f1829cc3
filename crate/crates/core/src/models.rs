//! The smart home: a phone, two light managers and a boiler manager, with
//! lights driven either by proximity or by the phone's position.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::Serialize;

use crate::equivalence::{weak_bisimilar_across, EquivalenceVerdict};
use crate::error::{Error, Result};
use crate::frontend::{parse_model, print_network};
use crate::meta::{Counterexample, PropertyReport};
use crate::reduction::{barbs, update_sensor, Barb, Engine, ReductionLabel};
use crate::syntax::Network;
use crate::universe::{ModelUniverse, Range};
use crate::value::{Name, Value};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Lights switch on when the phone is within range of a room.
    Proximity,
    /// The phone reports its position to a central light manager.
    Gps,
}

#[derive(Clone, Debug, Serialize)]
pub struct ScenarioConfig {
    pub variant: Variant,
    pub theta: i64,
    pub temperatures: Vec<i64>,
    pub delta: u32,
    /// Overrides the ranges of `c1` and `c2`.
    pub light_ranges: Option<(Range, Range)>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            variant: Variant::Proximity,
            theta: 20,
            temperatures: vec![15, 20, 25],
            delta: 1,
            light_ranges: None,
        }
    }
}

impl ScenarioConfig {
    pub fn with_variant(variant: Variant) -> Self {
        ScenarioConfig {
            variant,
            ..Default::default()
        }
    }

    fn ranges(&self) -> (Range, Range) {
        self.light_ranges.unwrap_or(match self.variant {
            Variant::Proximity => (Range::Finite(0), Range::Finite(0)),
            Variant::Gps => (Range::Finite(2), Range::Finite(1)),
        })
    }

    fn check(&self) -> Result<()> {
        if !self.temperatures.contains(&self.theta) {
            return Err(Error::ConfigViolation(format!(
                "the threshold {} is not in the temperature domain",
                self.theta
            )));
        }
        let distinct: BTreeSet<_> = self.temperatures.iter().collect();
        if distinct.len() != self.temperatures.len() {
            return Err(Error::ConfigViolation("repeated temperature".into()));
        }
        Ok(())
    }
}

const ROOMS: [&str; 5] = ["out", "loc1", "loc2", "loc3", "loc4"];

fn universe_text(cfg: &ScenarioConfig, lights_only: bool) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "location {}", ROOMS.join(", "));
    for i in 0..ROOMS.len() {
        for j in i + 1..ROOMS.len() {
            // out is as far from room i as room i is from the entrance's
            // outer side
            let d = if i == 0 { j } else { j - i };
            let _ = writeln!(s, "dist {} {} {d}", ROOMS[i], ROOMS[j]);
        }
    }
    let _ = writeln!(s, "delta {}", cfg.delta);
    if !lights_only {
        s.push_str("channel b range inf domain {man, auto}\n");
    }
    let (r1, r2) = cfg.ranges();
    let _ = writeln!(s, "channel c1 range {r1}\nchannel c2 range {r2}");
    if cfg.variant == Variant::Gps {
        let _ = writeln!(s, "channel g range inf domain {{{}}}", ROOMS.join(", "));
    }
    s.push_str("sensor mode node domain {man, auto}\n");
    if !lights_only {
        let temps: Vec<String> = cfg.temperatures.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(s, "sensor temp location domain {{{}}}", temps.join(", "));
        s.push_str("actuator boiler domain {on, off}\n");
    }
    s.push_str("actuator light1 domain {on, off}\nactuator light2 domain {on, off}\n");
    s
}

fn definitions(cfg: &ScenarioConfig, lights_only: bool) -> String {
    let mut s = String::from(
        "def LightCtrl = fix X. timeout(c1!<>.sigma.X, X) | fix X. timeout(c2!<>.sigma.X, X)
def L1 = fix X. timeout(c1?().light1!on.sigma.X, light1!off.X)
def L2 = fix X. timeout(c2?().light2!on.sigma.X, light2!off.X)
",
    );
    if !lights_only {
        s.push_str("def BoilerCtrl = fix X. mode?(z). timeout(b!<z>.sigma.X, X)\n");
        let _ = writeln!(
            s,
            "def TempCtrl = temp?(t). [t < {}] boiler!on.sigma.X ; boiler!off.sigma.X",
            cfg.theta
        );
        s.push_str(
            "def Manual = fix Y. b?(y). [y = auto] X ; sigma.Y
def Auto = fix X. timeout(b?(x). [x = man] boiler!on.sigma.Manual ; TempCtrl, TempCtrl)
",
        );
    }
    if cfg.variant == Variant::Gps {
        s.push_str(
            "def GpsLightCtrl = fix X. @(x). timeout(g!<x>.sigma.X, X)
def CLM = fix X. timeout(g?(y). [y = loc1] timeout(c1!<>.sigma.X, X) ; [y = loc4] timeout(c2!<>.sigma.X, X) ; sigma.X, X)
",
        );
    }
    s
}

fn network_text(cfg: &ScenarioConfig, lights_only: bool) -> String {
    let light_ctrl = match cfg.variant {
        Variant::Proximity => "LightCtrl",
        Variant::Gps => "GpsLightCtrl",
    };
    let phone = if lights_only {
        light_ctrl.to_string()
    } else {
        format!("BoilerCtrl | {light_ctrl}")
    };
    let mut nodes = vec![
        format!("nP[mode = auto |> {phone}] mob @ out"),
        "n1[light1 = off |> L1] stat @ loc1".to_string(),
        "n2[light2 = off |> L2] stat @ loc4".to_string(),
    ];
    if !lights_only {
        nodes.push(format!("nB[temp = {}, boiler = off |> Auto] stat @ loc2", cfg.theta));
    }
    let restricted = match cfg.variant {
        Variant::Proximity => "c1, c2",
        Variant::Gps => {
            nodes.push("nLM[|> CLM] stat @ loc3".to_string());
            "c1, c2, g"
        }
    };
    format!("new {restricted} . (\n  {}\n)\n", nodes.join("\n| "))
}

/// The model file for a configuration.
pub fn smart_home_text(cfg: &ScenarioConfig) -> Result<String> {
    cfg.check()?;
    Ok(format!("{}{}network\n{}", universe_text(cfg, false), definitions(cfg, false), network_text(cfg, false)))
}

/// The full system, restricted on its short-range (and position) channels.
pub fn build_smart_home(cfg: &ScenarioConfig) -> Result<(ModelUniverse, Network)> {
    parse_model(&smart_home_text(cfg)?)
}

/// The phone with only its light controller, the two light managers and,
/// for the position variant, the central light manager.
pub fn light_subsystem(cfg: &ScenarioConfig) -> Result<(ModelUniverse, Network)> {
    parse_model(&light_subsystem_text(cfg)?)
}

pub fn light_subsystem_text(cfg: &ScenarioConfig) -> Result<String> {
    cfg.check()?;
    Ok(format!("{}{}network\n{}", universe_text(cfg, true), definitions(cfg, true), network_text(cfg, true)))
}

pub const MANUAL_MODE: &str = "manual mode switches the boiler on";
pub const COLD: &str = "low temperature switches the boiler on";
pub const WARM: &str = "high temperature switches the boiler off";
pub const ONE_ROOM: &str = "never both lights on";

fn barb(actuator: &str, location: &str, value: &str) -> Barb {
    Barb {
        actuator: Name::new(actuator),
        location: Name::new(location),
        value: Value::atom(value),
    }
}

/// States reachable by instantaneous reductions that can let time pass.
fn settled(engine: &Engine, net: &Network, u: &ModelUniverse) -> Vec<Network> {
    crate::reduction::reachable_by(*engine, net, u, usize::MAX, ReductionLabel::is_instantaneous)
        .expect("instantaneous closure is finite")
        .into_iter()
        .filter(|m| engine.reductions(m, u).iter().any(|(l, _)| *l == ReductionLabel::TimeStep))
        .collect()
}

/// The four run-time properties, checked on the initial state and every
/// state entered by a time step.
pub fn check_runtime_properties(cfg: &ScenarioConfig, budget: usize) -> Result<Vec<PropertyReport>> {
    let (u, net) = build_smart_home(cfg)?;
    let engine = Engine::default();
    let sys = engine.reduction_system(&net, &u, budget)?;
    let mut derivatives: BTreeSet<usize> = BTreeSet::from([sys.initial]);
    derivatives.extend(sys.edges.iter().filter(|e| e.1 == ReductionLabel::TimeStep).map(|e| e.2));
    let on = barb("boiler", "loc2", "on");
    let off = barb("boiler", "loc2", "off");
    let mut reports: Vec<PropertyReport> = [MANUAL_MODE, COLD, WARM, ONE_ROOM]
        .into_iter()
        .map(|property| PropertyReport {
            property,
            states: derivatives.len(),
            counterexamples: Vec::new(),
        })
        .collect();
    let mut fail = |i: usize, state: &Network, explanation: String| {
        let check = reports[i].property;
        reports[i].counterexamples.push(Counterexample {
            check,
            state: print_network(state),
            explanation,
        })
    };
    let temp = Name::new("temp");
    let mode = Name::new("mode");
    for &d in &derivatives {
        let state = &sys.states[d];
        let phone = state
            .nodes
            .iter()
            .find(|n| n.interface.sensors.contains_key(&mode))
            .ok_or_else(|| Error::ConfigViolation("no node carries the mode sensor".into()))?;
        let manual = update_sensor(state, &u, &mode, &phone.location, &Value::atom("man"))?;
        for s in settled(&engine, &manual, &u) {
            if !barbs(&s).contains(&on) {
                fail(0, &s, "the boiler is not on when time passes".into());
            }
        }
        for &t in &cfg.temperatures {
            let heated = update_sensor(state, &u, &temp, &Name::new("loc2"), &Value::Int(t))?;
            let (i, want) = if t < cfg.theta { (1, &on) } else { (2, &off) };
            for s in settled(&engine, &heated, &u) {
                if !barbs(&s).contains(want) {
                    fail(i, &s, format!("with temperature {t} the boiler is not {} when time passes", want.value));
                }
            }
        }
        let instant = crate::reduction::reachable_by(engine, state, &u, usize::MAX, ReductionLabel::is_instantaneous)?;
        for s in instant {
            let b = barbs(&s);
            let lit1 = b.contains(&barb("light1", "loc1", "on"));
            let lit2 = b.contains(&barb("light2", "loc4", "on"));
            if (lit1 && !b.contains(&barb("light2", "loc4", "off"))) || (lit2 && !b.contains(&barb("light1", "loc1", "off"))) {
                fail(3, &s, "both lights are on".into());
            }
        }
    }
    Ok(reports)
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemEquality {
    pub lights: EquivalenceVerdict,
    /// `None` when only the light subsystems were compared.
    pub full: Option<EquivalenceVerdict>,
}

/// Compares the proximity and position variants: first the light
/// subsystems, then, if `full` is set, the complete systems.
pub fn check_system_equality(cfg: &ScenarioConfig, full: bool, budget: usize) -> Result<SystemEquality> {
    let prox = ScenarioConfig {
        variant: Variant::Proximity,
        ..cfg.clone()
    };
    let gps = ScenarioConfig {
        variant: Variant::Gps,
        ..cfg.clone()
    };
    let (ul, l) = light_subsystem(&prox)?;
    let (ur, r) = light_subsystem(&gps)?;
    let lights = weak_bisimilar_across(&l, &ul, &r, &ur, budget)?;
    let full = if full {
        let (ul, l) = build_smart_home(&prox)?;
        let (ur, r) = build_smart_home(&gps)?;
        Some(weak_bisimilar_across(&l, &ul, &r, &ur, budget)?)
    } else {
        None
    };
    Ok(SystemEquality { lights, full })
}

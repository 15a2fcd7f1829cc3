//! The finite world a model lives in: locations and their distances,
//! channel ranges, value domains and the mobility bound.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::value::{Name, Value};

/// Transmission range of a channel.
///
/// The derived order is the inclusion order of the sets of location pairs a
/// range admits: `Local < Finite(0) < Finite(1) < ... < Infinite`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Range {
    /// Intra-node only (written `-1` in the literature).
    Local,
    Finite(u32),
    Infinite,
}

impl Range {
    pub fn is_local(self) -> bool {
        self == Range::Local
    }

    /// Whether two nodes at distance `d` can talk on a channel of this range.
    pub fn admits(self, d: u32) -> bool {
        match self {
            Range::Local => false,
            Range::Finite(n) => d <= n,
            Range::Infinite => true,
        }
    }
}

impl fmt::Display for Range {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Range::Local => f.write_str("local"),
            Range::Finite(n) => write!(f, "{n}"),
            Range::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum SensorKind {
    /// Travels with its node; names are globally unique.
    NodeDependent,
    /// Senses the node's place; allowed in stationary nodes only.
    LocationDependent,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum DomainKind {
    Sensor,
    Actuator,
    Channel,
}

/// A finite, non-empty set of admissible values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValueDomain {
    pub kind: DomainKind,
    values: Vec<Value>,
}

impl ValueDomain {
    pub fn new(kind: DomainKind, owner: &str, values: Vec<Value>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ConfigViolation(format!("empty domain for `{owner}`")));
        }
        for (i, v) in values.iter().enumerate() {
            if values[..i].contains(v) {
                return Err(Error::Duplicate {
                    kind: "domain value",
                    name: format!("{owner}: {v}"),
                });
            }
        }
        Ok(ValueDomain { kind, values })
    }

    pub fn values(&self) -> &[Value] {
        &self.values
    }

    pub fn contains(&self, v: &Value) -> bool {
        self.values.contains(v)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChannelDecl {
    pub range: Range,
    pub domain: ValueDomain,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SensorDecl {
    pub kind: SensorKind,
    pub domain: ValueDomain,
}

/// Unvalidated universe declarations, as produced by the model parser.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct UniverseDecl {
    pub locations: Vec<Name>,
    pub distances: Vec<(Name, Name, u32)>,
    pub delta: u32,
    /// `None` domain means the unit domain `{()}`.
    pub channels: Vec<(Name, Range, Option<Vec<Value>>)>,
    pub sensors: Vec<(Name, SensorKind, Vec<Value>)>,
    pub actuators: Vec<(Name, Vec<Value>)>,
}

/// Every global finite structure a model needs. Immutable once loaded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModelUniverse {
    locations: Vec<Name>,
    index: HashMap<Name, usize>,
    dist: Vec<Vec<u32>>,
    delta: u32,
    channels: BTreeMap<Name, ChannelDecl>,
    sensors: BTreeMap<Name, SensorDecl>,
    actuators: BTreeMap<Name, ValueDomain>,
}

/// Validates a declaration block: unique names, a complete distance table
/// that is a metric (zero diagonal, symmetry, triangle inequality), and
/// well-formed value domains.
pub fn load_universe(decl: &UniverseDecl) -> Result<ModelUniverse> {
    let mut index = HashMap::new();
    for (i, l) in decl.locations.iter().enumerate() {
        if index.insert(l.clone(), i).is_some() {
            return Err(Error::Duplicate {
                kind: "location",
                name: l.to_string(),
            });
        }
    }
    let n = decl.locations.len();
    let mut dist: Vec<Vec<Option<u32>>> = vec![vec![None; n]; n];
    for i in 0..n {
        dist[i][i] = Some(0);
    }
    for (a, b, d) in &decl.distances {
        let i = *index.get(a).ok_or_else(|| Error::dangling("location", a))?;
        let j = *index.get(b).ok_or_else(|| Error::dangling("location", b))?;
        if i == j {
            if *d != 0 {
                return Err(Error::MetricViolation(format!("d({a},{a}) = {d}, expected 0")));
            }
            continue;
        }
        for (x, y) in [(i, j), (j, i)] {
            match dist[x][y] {
                Some(prev) if prev != *d => {
                    return Err(Error::MetricViolation(format!(
                        "d({},{}) declared as both {prev} and {d}",
                        decl.locations[x], decl.locations[y]
                    )))
                }
                _ => dist[x][y] = Some(*d),
            }
        }
    }
    let mut table = vec![vec![0u32; n]; n];
    for i in 0..n {
        for j in 0..n {
            table[i][j] = dist[i][j].ok_or_else(|| {
                Error::MetricViolation(format!(
                    "no distance declared between {} and {}",
                    decl.locations[i], decl.locations[j]
                ))
            })?;
        }
    }
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if table[i][j] > table[i][k] + table[k][j] {
                    return Err(Error::MetricViolation(format!(
                        "triangle inequality fails: d({a},{b}) = {} > d({a},{c}) + d({c},{b}) = {}",
                        table[i][j],
                        table[i][k] + table[k][j],
                        a = decl.locations[i],
                        b = decl.locations[j],
                        c = decl.locations[k],
                    )));
                }
            }
        }
    }

    let mut u = ModelUniverse {
        locations: decl.locations.clone(),
        index,
        dist: table,
        delta: decl.delta,
        channels: BTreeMap::new(),
        sensors: BTreeMap::new(),
        actuators: BTreeMap::new(),
    };
    for (c, range, domain) in &decl.channels {
        let values = domain.clone().unwrap_or_else(|| vec![Value::Unit]);
        u.add_channel(c.clone(), *range, values)?;
    }
    for (s, kind, values) in &decl.sensors {
        u.add_sensor(s.clone(), *kind, values.clone())?;
    }
    for (a, values) in &decl.actuators {
        u.add_actuator(a.clone(), values.clone())?;
    }
    Ok(u)
}

impl ModelUniverse {
    fn check_fresh(&self, name: &Name) -> Result<()> {
        if self.channels.contains_key(name)
            || self.sensors.contains_key(name)
            || self.actuators.contains_key(name)
        {
            return Err(Error::Duplicate {
                kind: "name",
                name: name.to_string(),
            });
        }
        Ok(())
    }

    fn check_values(&self, owner: &Name, values: &[Value]) -> Result<()> {
        for v in values {
            if let Value::Loc(l) = v {
                if !self.index.contains_key(l) {
                    return Err(Error::dangling("location", format!("{l} (in domain of {owner})")));
                }
            }
        }
        Ok(())
    }

    pub fn add_channel(&mut self, c: Name, range: Range, values: Vec<Value>) -> Result<()> {
        self.check_fresh(&c)?;
        self.check_values(&c, &values)?;
        let domain = ValueDomain::new(DomainKind::Channel, c.as_str(), values)?;
        self.channels.insert(c, ChannelDecl { range, domain });
        Ok(())
    }

    pub fn add_sensor(&mut self, s: Name, kind: SensorKind, values: Vec<Value>) -> Result<()> {
        self.check_fresh(&s)?;
        self.check_values(&s, &values)?;
        let domain = ValueDomain::new(DomainKind::Sensor, s.as_str(), values)?;
        self.sensors.insert(s, SensorDecl { kind, domain });
        Ok(())
    }

    pub fn add_actuator(&mut self, a: Name, values: Vec<Value>) -> Result<()> {
        self.check_fresh(&a)?;
        self.check_values(&a, &values)?;
        let domain = ValueDomain::new(DomainKind::Actuator, a.as_str(), values)?;
        self.actuators.insert(a, domain);
        Ok(())
    }

    pub fn locations(&self) -> &[Name] {
        &self.locations
    }

    pub fn has_location(&self, h: &Name) -> bool {
        self.index.contains_key(h)
    }

    pub fn delta(&self) -> u32 {
        self.delta
    }

    pub fn with_delta(&self, delta: u32) -> ModelUniverse {
        ModelUniverse {
            delta,
            ..self.clone()
        }
    }

    pub fn distance(&self, h: &Name, k: &Name) -> Option<u32> {
        Some(self.dist[*self.index.get(h)?][*self.index.get(k)?])
    }

    pub fn channel(&self, c: &Name) -> Option<&ChannelDecl> {
        self.channels.get(c.base())
    }

    pub fn channels(&self) -> impl Iterator<Item = (&Name, &ChannelDecl)> {
        self.channels.iter()
    }

    pub fn range(&self, c: &Name) -> Option<Range> {
        self.channel(c).map(|d| d.range)
    }

    pub fn sensor(&self, s: &Name) -> Option<&SensorDecl> {
        self.sensors.get(s)
    }

    pub fn sensors(&self) -> impl Iterator<Item = (&Name, &SensorDecl)> {
        self.sensors.iter()
    }

    pub fn actuator(&self, a: &Name) -> Option<&ValueDomain> {
        self.actuators.get(a)
    }

    pub fn actuators(&self) -> impl Iterator<Item = (&Name, &ValueDomain)> {
        self.actuators.iter()
    }

    pub fn is_channel(&self, c: &Name) -> bool {
        self.channel(c).is_some()
    }

    /// True iff a node at `h` and a node at `k` can communicate on `c`.
    /// Local channels never connect distinct nodes; undeclared channels never
    /// connect anything.
    pub fn in_range(&self, c: &Name, h: &Name, k: &Name) -> bool {
        match (self.range(c), self.distance(h, k)) {
            (Some(r), Some(d)) => r.admits(d),
            _ => false,
        }
    }

    /// `{ k | d(h,k) <= delta }`, in declaration order.
    pub fn reachable_locations(&self, h: &Name, delta: u32) -> Vec<Name> {
        let Some(&i) = self.index.get(h) else {
            return Vec::new();
        };
        self.locations
            .iter()
            .enumerate()
            .filter(|(j, _)| self.dist[i][*j] <= delta)
            .map(|(_, k)| k.clone())
            .collect()
    }

    /// Renders the universe back into declaration form.
    pub fn to_decl(&self) -> UniverseDecl {
        let mut distances = Vec::new();
        for (i, a) in self.locations.iter().enumerate() {
            for (j, b) in self.locations.iter().enumerate().skip(i + 1) {
                distances.push((a.clone(), b.clone(), self.dist[i][j]));
            }
        }
        UniverseDecl {
            locations: self.locations.clone(),
            distances,
            delta: self.delta,
            channels: self
                .channels
                .iter()
                .map(|(c, d)| (c.clone(), d.range, Some(d.domain.values().to_vec())))
                .collect(),
            sensors: self
                .sensors
                .iter()
                .map(|(s, d)| (s.clone(), d.kind, d.domain.values().to_vec()))
                .collect(),
            actuators: self
                .actuators
                .iter()
                .map(|(a, d)| (a.clone(), d.values().to_vec()))
                .collect(),
        }
    }
}

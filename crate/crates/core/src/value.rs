//! Names and basic values shared by every layer of the calculus.

use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

/// An interned-by-sharing identifier (node, channel, sensor, actuator,
/// location or variable name).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Name(Arc<str>);

impl Name {
    pub fn new(s: &str) -> Self {
        Name(Arc::from(s))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The name with trailing `'` marks removed. Primed channel names are
    /// alpha-variants that share the declaration of their base name.
    pub fn base(&self) -> &str {
        self.0.trim_end_matches('\'')
    }

    pub fn primed(&self) -> Name {
        Name::new(&format!("{}'", self.0))
    }
}

impl fmt::Debug for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Name {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::borrow::Borrow<str> for Name {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Name {
    fn from(s: &str) -> Self {
        Name::new(s)
    }
}

impl Serialize for Name {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// A basic value: booleans, integers, named constants (`on`, `man`, ...),
/// physical locations and the unit value `()`.
///
/// The derived order (variant, then payload) is the one used when sorting
/// parallel components.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Value {
    Unit,
    Bool(bool),
    Int(i64),
    Atom(Name),
    Loc(Name),
}

impl Value {
    pub fn atom(s: &str) -> Self {
        Value::Atom(Name::new(s))
    }

    pub fn loc(s: &str) -> Self {
        Value::Loc(Name::new(s))
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Unit => f.write_str("()"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Int(i) => write!(f, "{i}"),
            Value::Atom(n) | Value::Loc(n) => write!(f, "{n}"),
        }
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

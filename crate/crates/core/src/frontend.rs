//! The model text format: a universe block, process definitions and a
//! network, plus a deterministic pretty-printer whose output parses back.
//!
//! ```text
//! location h, k
//! dist h k 1
//! delta 1
//! channel c range inf domain {0, 1}
//! sensor s node domain {0, 1}
//! actuator a domain {0, 1}
//! def Echo = fix X. s?(x). timeout(c!<x>.sigma.X, X)
//! network
//! n[s = 0, a = 0 |> Echo] stat @ h
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::syntax::{BoolExpr, CommAction, Interface, Mobility, Network, Node, Prefix, Process, ValueExpr};
use crate::universe::{load_universe, ModelUniverse, Range, SensorKind, UniverseDecl};
use crate::value::{Name, Value};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

const SYMBOLS: [&str; 20] = [
    "|>", "<=", "&&", "[", "]", "(", ")", "{", "}", ",", ".", "|", ";", "=", "<", ">", "!", "?", "@", "^",
];

fn lex(text: &str) -> Result<Vec<Token>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let (line, column) = (lineno + 1, i + 1);
            if c == '#' {
                break;
            }
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_ascii_digit() || (c == '-' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
                let start = i;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                let v = s.parse().map_err(|_| Error::Parse {
                    line,
                    column,
                    message: format!("integer `{s}` out of range"),
                })?;
                out.push(Token {
                    tok: Tok::Int(v),
                    line,
                    column,
                });
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '\'') {
                    i += 1;
                }
                out.push(Token {
                    tok: Tok::Ident(chars[start..i].iter().collect()),
                    line,
                    column,
                });
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(s) => {
                    out.push(Token {
                        tok: Tok::Sym(s),
                        line,
                        column,
                    });
                    i += s.len();
                }
                None => {
                    return Err(Error::Parse {
                        line,
                        column,
                        message: format!("unexpected character `{c}`"),
                    })
                }
            }
        }
    }
    let (line, column) = out.last().map(|t| (t.line, t.column + 1)).unwrap_or((1, 1));
    out.push(Token {
        tok: Tok::Eof,
        line,
        column,
    });
    Ok(out)
}

const KEYWORDS: [&str; 12] = [
    "nil", "sigma", "fix", "timeout", "new", "def", "network", "stat", "mob", "not", "true", "false",
];

/// A value as written, before identifiers are resolved.
#[derive(Clone, Debug)]
enum RawValue {
    Int(i64),
    Bool(bool),
    Unit,
    Ident(String),
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    universe: Option<&'a ModelUniverse>,
    defs: HashMap<String, Process>,
    value_scope: Vec<Name>,
    proc_scope: Vec<Name>,
    /// Inside a `def`, unbound process variables are left free.
    in_def: bool,
    fresh: usize,
    /// Definitions seen in the declaration block: name and token offset.
    pending: Vec<(String, usize)>,
}

impl<'a> Parser<'a> {
    fn new(toks: Vec<Token>) -> Self {
        Parser {
            toks,
            pos: 0,
            universe: None,
            defs: HashMap::new(),
            value_scope: Vec::new(),
            proc_scope: Vec::new(),
            in_def: false,
            fresh: 0,
            pending: Vec::new(),
        }
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse {
            line: t.line,
            column: t.column,
            message: message.into(),
        })
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(i) => format!("`{i}`"),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn at_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn at_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.at_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", Self::describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<()> {
        if self.at_kw(k) {
            self.next();
            Ok(())
        } else {
            self.err(format!("expected `{k}`, found {}", Self::describe(self.peek())))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.next();
                Ok(s)
            }
            t => self.err(format!("expected {what}, found {}", Self::describe(&t))),
        }
    }

    fn int(&mut self) -> Result<i64> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.next();
                Ok(i)
            }
            t => self.err(format!("expected a number, found {}", Self::describe(&t))),
        }
    }

    fn nat(&mut self) -> Result<u32> {
        let i = self.int()?;
        u32::try_from(i).or_else(|_| self.err(format!("expected a natural number, found {i}")))
    }

    fn u(&self) -> &'a ModelUniverse {
        self.universe.expect("universe is loaded before processes are parsed")
    }

    // ---- values ----

    fn raw_value(&mut self) -> Result<RawValue> {
        match self.peek().clone() {
            Tok::Int(i) => {
                self.next();
                Ok(RawValue::Int(i))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                self.next();
                Ok(RawValue::Bool(s == "true"))
            }
            Tok::Sym("(") if *self.peek_at(1) == Tok::Sym(")") => {
                self.next();
                self.next();
                Ok(RawValue::Unit)
            }
            Tok::Ident(_) => Ok(RawValue::Ident(self.ident("a value")?)),
            t => self.err(format!("expected a value, found {}", Self::describe(&t))),
        }
    }

    fn resolve_literal(locations: &[Name], v: RawValue) -> Value {
        match v {
            RawValue::Int(i) => Value::Int(i),
            RawValue::Bool(b) => Value::Bool(b),
            RawValue::Unit => Value::Unit,
            RawValue::Ident(s) => {
                let n = Name::new(&s);
                if locations.contains(&n) {
                    Value::Loc(n)
                } else {
                    Value::Atom(n)
                }
            }
        }
    }

    fn value_expr(&mut self) -> Result<ValueExpr> {
        let raw = self.raw_value()?;
        if let RawValue::Ident(s) = &raw {
            let n = Name::new(s);
            if self.value_scope.contains(&n) {
                return Ok(ValueExpr::Var(n));
            }
        }
        Ok(ValueExpr::Lit(Self::resolve_literal(self.u().locations(), raw)))
    }

    fn closed_value(&mut self) -> Result<Value> {
        let raw = self.raw_value()?;
        Ok(Self::resolve_literal(self.u().locations(), raw))
    }

    // ---- universe ----

    fn value_set(&mut self) -> Result<Vec<RawValue>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        if !self.at_sym("}") {
            loop {
                out.push(self.raw_value()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("}")?;
        Ok(out)
    }

    fn universe_block(&mut self) -> Result<ModelUniverse> {
        let mut decl = UniverseDecl::default();
        let mut channels: Vec<(Name, Range, Option<Vec<RawValue>>)> = Vec::new();
        let mut sensors: Vec<(Name, SensorKind, Vec<RawValue>)> = Vec::new();
        let mut actuators: Vec<(Name, Vec<RawValue>)> = Vec::new();
        let mut raw_defs: Vec<(String, usize)> = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(k) if k == "location" => {
                    self.next();
                    loop {
                        decl.locations.push(Name::new(&self.ident("a location name")?));
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                }
                Tok::Ident(k) if k == "dist" => {
                    self.next();
                    let a = self.ident("a location")?;
                    let b = self.ident("a location")?;
                    let d = self.nat()?;
                    decl.distances.push((Name::new(&a), Name::new(&b), d));
                }
                Tok::Ident(k) if k == "delta" => {
                    self.next();
                    decl.delta = self.nat()?;
                }
                Tok::Ident(k) if k == "channel" => {
                    self.next();
                    let c = self.ident("a channel name")?;
                    self.expect_kw("range")?;
                    let range = match self.peek().clone() {
                        Tok::Ident(r) if r == "local" => {
                            self.next();
                            Range::Local
                        }
                        Tok::Ident(r) if r == "inf" => {
                            self.next();
                            Range::Infinite
                        }
                        Tok::Int(_) => Range::Finite(self.nat()?),
                        t => return self.err(format!("expected `local`, `inf` or a number, found {}", Self::describe(&t))),
                    };
                    let domain = if self.at_kw("domain") {
                        self.next();
                        Some(self.value_set()?)
                    } else {
                        None
                    };
                    channels.push((Name::new(&c), range, domain));
                }
                Tok::Ident(k) if k == "sensor" => {
                    self.next();
                    let s = self.ident("a sensor name")?;
                    let kind = match self.peek().clone() {
                        Tok::Ident(x) if x == "node" => SensorKind::NodeDependent,
                        Tok::Ident(x) if x == "location" => SensorKind::LocationDependent,
                        t => return self.err(format!("expected `node` or `location`, found {}", Self::describe(&t))),
                    };
                    self.next();
                    self.expect_kw("domain")?;
                    sensors.push((Name::new(&s), kind, self.value_set()?));
                }
                Tok::Ident(k) if k == "actuator" => {
                    self.next();
                    let a = self.ident("an actuator name")?;
                    self.expect_kw("domain")?;
                    actuators.push((Name::new(&a), self.value_set()?));
                }
                Tok::Ident(k) if k == "def" => {
                    // parsed once the universe is known
                    let start = self.pos;
                    self.next();
                    let name = self.ident("a definition name")?;
                    raw_defs.push((name, start));
                    self.skip_to_statement()?;
                }
                Tok::Ident(k) if k == "network" => break,
                t => return self.err(format!("expected a declaration or `network`, found {}", Self::describe(&t))),
            }
        }
        let locs = decl.locations.clone();
        decl.channels = channels
            .into_iter()
            .map(|(c, r, d)| (c, r, d.map(|vs| vs.into_iter().map(|v| Self::resolve_literal(&locs, v)).collect())))
            .collect();
        decl.sensors = sensors
            .into_iter()
            .map(|(s, k, vs)| (s, k, vs.into_iter().map(|v| Self::resolve_literal(&locs, v)).collect()))
            .collect();
        decl.actuators = actuators
            .into_iter()
            .map(|(a, vs)| (a, vs.into_iter().map(|v| Self::resolve_literal(&locs, v)).collect()))
            .collect();
        let u = load_universe(&decl)?;
        self.pending = raw_defs;
        Ok(u)
    }

    /// Skips the body of a definition: everything up to the next top-level
    /// declaration keyword.
    fn skip_to_statement(&mut self) -> Result<()> {
        const STARTS: [&str; 8] = ["location", "dist", "delta", "channel", "sensor", "actuator", "def", "network"];
        loop {
            match self.peek() {
                Tok::Eof => return self.err("expected `network`"),
                Tok::Ident(k) if STARTS.contains(&k.as_str()) => {
                    // `location` also appears as a sensor kind, but only
                    // right after a sensor name, never inside a process
                    return Ok(());
                }
                _ => {
                    self.next();
                }
            }
        }
    }

    // ---- processes ----

    fn process(&mut self) -> Result<Process> {
        let mut parts = vec![self.seq()?];
        while self.at_sym("|") && !self.at_sym("|>") {
            self.next();
            parts.push(self.seq()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Process::Par(parts)
        })
    }

    /// Continuation after a prefix: `. seq`, or nothing (meaning `nil`).
    fn continuation(&mut self) -> Result<Process> {
        if self.eat_sym(".") {
            self.seq()
        } else {
            Ok(Process::Nil)
        }
    }

    fn with_value_binder<T>(&mut self, x: &Name, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.value_scope.push(x.clone());
        let r = f(self);
        self.value_scope.pop();
        r
    }

    fn fresh_binder(&mut self, avoid: &Process) -> Name {
        loop {
            let candidate = Name::new(&format!("_R{}", self.fresh));
            self.fresh += 1;
            if !avoid.free_process_vars().contains(&candidate) {
                return candidate;
            }
        }
    }

    fn comm(&mut self) -> Result<(CommAction, Option<Name>)> {
        let c = self.ident("a channel")?;
        let channel = Name::new(&c);
        if !self.u().is_channel(&channel) {
            return self.err(format!("undeclared channel `{c}`"));
        }
        if self.eat_sym("!") {
            self.expect_sym("<")?;
            let payload = if self.at_sym(">") {
                ValueExpr::Lit(Value::Unit)
            } else {
                self.value_expr()?
            };
            self.expect_sym(">")?;
            Ok((CommAction::Send { channel, payload }, None))
        } else if self.eat_sym("?") {
            self.expect_sym("(")?;
            let bind = if self.at_sym(")") {
                None
            } else {
                Some(Name::new(&self.ident("a variable")?))
            };
            self.expect_sym(")")?;
            Ok((CommAction::Receive { channel, bind: bind.clone() }, bind))
        } else {
            self.err(format!("expected `!` or `?` after channel `{c}`"))
        }
    }

    fn comm_continuation(&mut self, bind: &Option<Name>, proc_level: bool) -> Result<Process> {
        let parse = |p: &mut Self| -> Result<Process> {
            if p.eat_sym(".") {
                if proc_level {
                    p.process()
                } else {
                    p.seq()
                }
            } else {
                Ok(Process::Nil)
            }
        };
        match bind {
            Some(x) => self.with_value_binder(x, parse),
            None => parse(self),
        }
    }

    fn seq(&mut self) -> Result<Process> {
        match self.peek().clone() {
            Tok::Ident(k) if k == "nil" => {
                self.next();
                Ok(Process::Nil)
            }
            Tok::Ident(k) if k == "sigma" => {
                self.next();
                let times = if self.eat_sym("^") { self.nat()? } else { 1 };
                let mut p = self.continuation()?;
                for _ in 0..times {
                    p = Process::sleep(p);
                }
                Ok(p)
            }
            Tok::Ident(k) if k == "fix" => {
                self.next();
                let x = Name::new(&self.ident("a process variable")?);
                self.expect_sym(".")?;
                self.proc_scope.push(x.clone());
                let body = self.seq();
                self.proc_scope.pop();
                Ok(Process::Fix(x, std::sync::Arc::new(body?)))
            }
            Tok::Ident(k) if k == "timeout" => {
                self.next();
                self.expect_sym("(")?;
                let (pi, bind) = self.comm()?;
                let then = self.comm_continuation(&bind, true)?;
                let otherwise = if self.eat_sym(",") { self.process()? } else { Process::Nil };
                self.expect_sym(")")?;
                Ok(Process::timeout(pi, then, otherwise))
            }
            Tok::Sym("@") => {
                self.next();
                self.expect_sym("(")?;
                let x = Name::new(&self.ident("a variable")?);
                self.expect_sym(")")?;
                let cont = self.with_value_binder(&x, |p| p.continuation())?;
                Ok(Process::prefix(Prefix::GetPos(x), cont))
            }
            Tok::Sym("[") => {
                self.next();
                let b = self.bexp()?;
                self.expect_sym("]")?;
                let then = self.seq()?;
                self.expect_sym(";")?;
                let otherwise = self.seq()?;
                Ok(Process::cond(b, then, otherwise))
            }
            Tok::Sym("(") => {
                self.next();
                let p = self.process()?;
                self.expect_sym(")")?;
                Ok(p)
            }
            Tok::Ident(name) if !KEYWORDS.contains(&name.as_str()) => {
                let n = Name::new(&name);
                let u = self.u();
                match self.peek_at(1).clone() {
                    Tok::Sym("?") if u.sensor(&n).is_some() => {
                        self.next();
                        self.next();
                        self.expect_sym("(")?;
                        let x = Name::new(&self.ident("a variable")?);
                        self.expect_sym(")")?;
                        let cont = self.with_value_binder(&x, |p| p.continuation())?;
                        Ok(Process::prefix(Prefix::ReadSensor { var: x, sensor: n }, cont))
                    }
                    Tok::Sym("!") if u.actuator(&n).is_some() => {
                        self.next();
                        self.next();
                        let value = self.value_expr()?;
                        let cont = self.continuation()?;
                        Ok(Process::prefix(Prefix::WriteActuator { value, actuator: n }, cont))
                    }
                    Tok::Sym("?") | Tok::Sym("!") if u.is_channel(&n) => {
                        // a bare channel action repeats until it succeeds
                        let (pi, bind) = self.comm()?;
                        let cont = self.comm_continuation(&bind, false)?;
                        let x = self.fresh_binder(&cont);
                        let body = Process::timeout(pi, cont, Process::Var(x.clone()));
                        Ok(Process::Fix(x, std::sync::Arc::new(body)))
                    }
                    Tok::Sym("?") | Tok::Sym("!") => self.err(format!("undeclared sensor, actuator or channel `{name}`")),
                    _ => {
                        self.next();
                        if self.proc_scope.contains(&n) {
                            Ok(Process::Var(n))
                        } else if let Some(p) = self.defs.get(&name) {
                            Ok(p.clone())
                        } else if self.in_def {
                            Ok(Process::Var(n))
                        } else {
                            self.pos -= 1;
                            self.err(format!("undefined process `{name}`"))
                        }
                    }
                }
            }
            t => self.err(format!("expected a process, found {}", Self::describe(&t))),
        }
    }

    fn bexp(&mut self) -> Result<BoolExpr> {
        let mut b = self.batom()?;
        while self.eat_sym("&&") {
            let rhs = self.batom()?;
            b = BoolExpr::And(Box::new(b), Box::new(rhs));
        }
        Ok(b)
    }

    fn batom(&mut self) -> Result<BoolExpr> {
        if self.at_kw("not") || (self.at_sym("!")) {
            self.next();
            return Ok(BoolExpr::Not(Box::new(self.batom()?)));
        }
        if self.at_sym("(") && *self.peek_at(1) != Tok::Sym(")") {
            self.next();
            let b = self.bexp()?;
            self.expect_sym(")")?;
            return Ok(b);
        }
        let is_op = |t: &Tok| matches!(t, Tok::Sym("=") | Tok::Sym("<") | Tok::Sym("<="));
        if (self.at_kw("true") || self.at_kw("false")) && !is_op(self.peek_at(1)) {
            let b = self.at_kw("true");
            self.next();
            return Ok(BoolExpr::Lit(b));
        }
        let lhs = self.value_expr()?;
        let op = self.next();
        let rhs = self.value_expr()?;
        match op {
            Tok::Sym("=") => Ok(BoolExpr::Eq(lhs, rhs)),
            Tok::Sym("<") => Ok(BoolExpr::Lt(lhs, rhs)),
            Tok::Sym("<=") => Ok(BoolExpr::Leq(lhs, rhs)),
            t => {
                self.pos -= 1;
                self.err(format!("expected `=`, `<` or `<=`, found {}", Self::describe(&t)))
            }
        }
    }

    // ---- networks ----

    fn network(&mut self) -> Result<Network> {
        let mut net = self.net_atom()?;
        while self.eat_sym("|") {
            let rhs = self.net_atom()?;
            net = net.par(rhs);
        }
        Ok(net)
    }

    fn net_atom(&mut self) -> Result<Network> {
        match self.peek().clone() {
            Tok::Int(0) => {
                self.next();
                Ok(Network::empty())
            }
            Tok::Ident(k) if k == "new" => {
                self.next();
                let mut chans = Vec::new();
                loop {
                    let c = self.ident("a channel")?;
                    if !self.u().is_channel(&Name::new(&c)) {
                        return self.err(format!("undeclared channel `{c}`"));
                    }
                    chans.push(Name::new(&c));
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(".")?;
                let mut net = self.net_atom()?;
                for c in chans.into_iter().rev() {
                    net = net.restrict(c);
                }
                Ok(net)
            }
            Tok::Sym("(") => {
                self.next();
                let net = self.network()?;
                self.expect_sym(")")?;
                Ok(net)
            }
            Tok::Ident(_) => self.node().map(Network::node),
            t => self.err(format!("expected a network, found {}", Self::describe(&t))),
        }
    }

    fn node(&mut self) -> Result<Node> {
        let name = Name::new(&self.ident("a node name")?);
        self.expect_sym("[")?;
        let mut interface = Interface::default();
        if !self.at_sym("|>") {
            loop {
                let entry = self.ident("a sensor or actuator")?;
                let key = Name::new(&entry);
                self.expect_sym("=")?;
                let v = self.closed_value()?;
                let slot = if self.u().sensor(&key).is_some() {
                    &mut interface.sensors
                } else if self.u().actuator(&key).is_some() {
                    &mut interface.actuators
                } else {
                    return self.err(format!("`{entry}` is neither a declared sensor nor an actuator"));
                };
                if slot.insert(key, v).is_some() {
                    return self.err(format!("`{entry}` appears twice in the interface"));
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
        }
        self.expect_sym("|>")?;
        let process = self.process()?;
        self.expect_sym("]")?;
        let mobility = match self.peek().clone() {
            Tok::Ident(k) if k == "stat" => Mobility::Stationary,
            Tok::Ident(k) if k == "mob" => Mobility::Mobile,
            t => return self.err(format!("expected `stat` or `mob`, found {}", Self::describe(&t))),
        };
        self.next();
        self.expect_sym("@")?;
        let loc = self.ident("a location")?;
        let location = Name::new(&loc);
        if !self.u().has_location(&location) {
            self.pos -= 1;
            return self.err(format!("undeclared location `{loc}`"));
        }
        Ok(Node {
            name,
            interface,
            process,
            mobility,
            location,
        })
    }
}

impl<'a> Parser<'a> {
    fn parse_defs(&mut self, defs: Vec<(String, usize)>) -> Result<()> {
        let resume = self.pos;
        for (name, start) in defs {
            self.pos = start;
            self.expect_kw("def")?;
            self.ident("a definition name")?;
            self.expect_sym("=")?;
            self.in_def = true;
            let body = self.process();
            self.in_def = false;
            let body = body?;
            if !matches!(self.peek(), Tok::Ident(k) if ["location", "dist", "delta", "channel", "sensor", "actuator", "def", "network"].contains(&k.as_str()))
            {
                return self.err(format!("unexpected {} after definition of `{name}`", Self::describe(self.peek())));
            }
            if self.defs.insert(name.clone(), body).is_some() {
                return Err(Error::Duplicate {
                    kind: "definition",
                    name,
                });
            }
        }
        self.pos = resume;
        Ok(())
    }
}

/// Parses a complete model: universe declarations, definitions, network.
pub fn parse_model(text: &str) -> Result<(ModelUniverse, Network)> {
    let toks = lex(text)?;
    let mut p = Parser::new(toks);
    let u = p.universe_block()?;
    let net = {
        let mut q = Parser::new(p.toks);
        q.universe = Some(&u);
        q.parse_defs(p.pending)?;
        q.pos = p.pos;
        q.expect_kw("network")?;
        let net = q.network()?;
        if *q.peek() != Tok::Eof {
            return q.err(format!("unexpected {} after the network", Parser::describe(q.peek())));
        }
        net
    };
    Ok((u, net))
}

/// Parses a network (no declarations) against an existing universe.
pub fn parse_network(text: &str, u: &ModelUniverse) -> Result<Network> {
    let mut p = Parser::new(lex(text)?);
    p.universe = Some(u);
    let net = p.network()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after the network", Parser::describe(p.peek())));
    }
    Ok(net)
}

/// Parses a process against an existing universe. Unbound process
/// variables are an error.
pub fn parse_process(text: &str, u: &ModelUniverse) -> Result<Process> {
    let mut p = Parser::new(lex(text)?);
    p.universe = Some(u);
    let proc = p.process()?;
    if *p.peek() != Tok::Eof {
        return p.err(format!("unexpected {} after the process", Parser::describe(p.peek())));
    }
    Ok(proc)
}

// ---- printing ----

fn print_value(v: &Value) -> String {
    v.to_string()
}

fn print_vexpr(e: &ValueExpr) -> String {
    match e {
        ValueExpr::Lit(v) => print_value(v),
        ValueExpr::Var(x) => x.to_string(),
    }
}

fn print_bexp(b: &BoolExpr) -> String {
    match b {
        BoolExpr::Lit(b) => b.to_string(),
        BoolExpr::Eq(a, b) => format!("{} = {}", print_vexpr(a), print_vexpr(b)),
        BoolExpr::Lt(a, b) => format!("{} < {}", print_vexpr(a), print_vexpr(b)),
        BoolExpr::Leq(a, b) => format!("{} <= {}", print_vexpr(a), print_vexpr(b)),
        BoolExpr::Not(b) => format!("not ({})", print_bexp(b)),
        BoolExpr::And(a, b) => format!("({}) && ({})", print_bexp(a), print_bexp(b)),
    }
}

fn print_comm(pi: &CommAction) -> String {
    match pi {
        CommAction::Send {
            channel,
            payload: ValueExpr::Lit(Value::Unit),
        } => format!("{channel}!<>"),
        CommAction::Send { channel, payload } => format!("{channel}!<{}>", print_vexpr(payload)),
        CommAction::Receive { channel, bind: None } => format!("{channel}?()"),
        CommAction::Receive {
            channel,
            bind: Some(x),
        } => format!("{channel}?({x})"),
    }
}

fn print_seq(p: &Process, out: &mut String) {
    match p {
        Process::Nil => out.push_str("nil"),
        Process::Var(x) => out.push_str(x.as_str()),
        Process::Prefix(pre, cont) => {
            match pre {
                Prefix::Sleep => out.push_str("sigma"),
                Prefix::GetPos(x) => {
                    let _ = write!(out, "@({x})");
                }
                Prefix::ReadSensor { var, sensor } => {
                    let _ = write!(out, "{sensor}?({var})");
                }
                Prefix::WriteActuator { value, actuator } => {
                    let _ = write!(out, "{actuator}!{}", print_vexpr(value));
                }
            }
            out.push('.');
            print_seq(cont, out);
        }
        Process::Timeout(pi, then, otherwise) => {
            let _ = write!(out, "timeout({}.", print_comm(pi));
            print_proc(then, out);
            out.push_str(", ");
            print_proc(otherwise, out);
            out.push(')');
        }
        Process::Cond(b, then, otherwise) => {
            let _ = write!(out, "[{}] ", print_bexp(b));
            print_seq(then, out);
            out.push_str(" ; ");
            print_seq(otherwise, out);
        }
        Process::Fix(x, body) => {
            let _ = write!(out, "fix {x}. ");
            print_seq(body, out);
        }
        Process::Par(ps) => match ps.len() {
            0 => out.push_str("nil"),
            _ => {
                out.push('(');
                print_proc(p, out);
                out.push(')');
            }
        },
    }
}

fn print_proc(p: &Process, out: &mut String) {
    match p {
        Process::Par(ps) if !ps.is_empty() => {
            for (i, q) in ps.iter().enumerate() {
                if i > 0 {
                    out.push_str(" | ");
                }
                print_seq(q, out);
            }
        }
        _ => print_seq(p, out),
    }
}

pub fn print_process(p: &Process) -> String {
    let mut s = String::new();
    print_proc(p, &mut s);
    s
}

fn print_interface(i: &Interface) -> String {
    let entries: Vec<String> = i
        .sensors
        .iter()
        .chain(i.actuators.iter())
        .map(|(k, v)| format!("{k} = {}", print_value(v)))
        .collect();
    if entries.is_empty() {
        String::new()
    } else {
        format!("{} ", entries.join(", "))
    }
}

pub fn print_node(n: &Node) -> String {
    let mobility = match n.mobility {
        Mobility::Stationary => "stat",
        Mobility::Mobile => "mob",
    };
    format!(
        "{}[{}|> {}] {mobility} @ {}",
        n.name,
        print_interface(&n.interface),
        print_process(&n.process),
        n.location
    )
}

/// Deterministic rendering of a network; restricted channels come first.
pub fn print_network(net: &Network) -> String {
    let body = if net.nodes.is_empty() {
        "0".to_string()
    } else {
        net.nodes.iter().map(print_node).collect::<Vec<_>>().join("\n| ")
    };
    if net.restricted.is_empty() {
        body
    } else {
        let names: Vec<&str> = net.restricted.iter().map(|c| c.as_str()).collect();
        format!("new {} . (\n{}\n)", names.join(", "), body)
    }
}

fn print_set(vs: &[Value]) -> String {
    format!("{{{}}}", vs.iter().map(print_value).collect::<Vec<_>>().join(", "))
}

pub fn print_universe(u: &ModelUniverse) -> String {
    let d = u.to_decl();
    let mut s = String::new();
    if !d.locations.is_empty() {
        let names: Vec<&str> = d.locations.iter().map(|l| l.as_str()).collect();
        let _ = writeln!(s, "location {}", names.join(", "));
    }
    for (a, b, n) in &d.distances {
        let _ = writeln!(s, "dist {a} {b} {n}");
    }
    let _ = writeln!(s, "delta {}", d.delta);
    for (c, r, dom) in &d.channels {
        let _ = write!(s, "channel {c} range {r}");
        if let Some(vs) = dom {
            let _ = write!(s, " domain {}", print_set(vs));
        }
        s.push('\n');
    }
    let mut sensors: BTreeMap<&Name, String> = BTreeMap::new();
    for (name, kind, vs) in &d.sensors {
        let kind = match kind {
            SensorKind::NodeDependent => "node",
            SensorKind::LocationDependent => "location",
        };
        sensors.insert(name, format!("sensor {name} {kind} domain {}", print_set(vs)));
    }
    for line in sensors.values() {
        let _ = writeln!(s, "{line}");
    }
    for (a, vs) in &d.actuators {
        let _ = writeln!(s, "actuator {a} domain {}", print_set(vs));
    }
    s
}

/// A complete model file for `net` over `u`.
pub fn print_model(u: &ModelUniverse, net: &Network) -> String {
    format!("{}network\n{}\n", print_universe(u), print_network(net))
}

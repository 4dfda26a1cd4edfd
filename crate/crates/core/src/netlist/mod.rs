// SPDX-License-Identifier: Apache-2.0

//! Fan-out-free circuit representation.
//!
//! A [`Circuit`] is a list of boundary [`Line`]s and an ordered list of
//! gate instances. Every gate input port names its single driver; every
//! gate output port carries exactly one [`Disposition`]. Sequential state is
//! expressed with [`FeedbackArc`]s, which are the only edges allowed to point
//! backwards in gate order.

mod builders;
mod format;
mod random;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::gate::GateSpec;

pub use builders::{builtin_circuit, d_latch_q, d_latch_qq, jk_latch_q, jk_latch_qq, BUILTIN_NAMES};
pub use format::{parse, parse_with_library, serialize, NetlistError};
pub use random::random_circuit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LineRole {
    PrimaryInput,
    ConstantZero,
    ConstantOne,
}

impl LineRole {
    pub fn as_str(self) -> &'static str {
        match self {
            LineRole::PrimaryInput => "primary_input",
            LineRole::ConstantZero => "constant_zero",
            LineRole::ConstantOne => "constant_one",
        }
    }

    pub fn is_constant(self) -> bool {
        matches!(self, LineRole::ConstantZero | LineRole::ConstantOne)
    }
}

/// A boundary input line. A complemented primary input carries the
/// negation of the external signal named `id`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub id: String,
    pub role: LineRole,
    pub complemented: bool,
}

impl Line {
    pub fn input(id: impl Into<String>) -> Self {
        Line { id: id.into(), role: LineRole::PrimaryInput, complemented: false }
    }

    pub fn complemented_input(id: impl Into<String>) -> Self {
        Line { id: id.into(), role: LineRole::PrimaryInput, complemented: true }
    }

    pub fn zero(id: impl Into<String>) -> Self {
        Line { id: id.into(), role: LineRole::ConstantZero, complemented: false }
    }

    pub fn one(id: impl Into<String>) -> Self {
        Line { id: id.into(), role: LineRole::ConstantOne, complemented: false }
    }
}

/// A (gate instance, port) pair; both 0-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PortRef {
    pub gate: usize,
    pub port: usize,
}

impl PortRef {
    pub fn new(gate: usize, port: usize) -> Self {
        PortRef { gate, port }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.gate, self.port)
    }
}

/// What drives a gate input port.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Driver {
    Line(String),
    Gate(PortRef),
    Feedback(String),
}

/// Where a gate output port goes.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Disposition {
    Consumed(PortRef),
    Primary(String),
    Feedback(String),
    Garbage,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GateInstance {
    pub gate: Arc<GateSpec>,
    pub inputs: Vec<Driver>,
    /// `None` marks an output with no disposition, which [`validate`] rejects.
    pub outputs: Vec<Option<Disposition>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeedbackArc {
    /// Output port producing the next state.
    pub source: PortRef,
    /// Input port consuming the current state.
    pub target: PortRef,
    pub state: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Circuit {
    pub lines: Vec<Line>,
    pub gates: Vec<GateInstance>,
    pub feedbacks: Vec<FeedbackArc>,
}

impl Circuit {
    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// External input names, in line order.
    pub fn input_names(&self) -> Vec<&str> {
        self.lines.iter().filter(|l| l.role == LineRole::PrimaryInput).map(|l| l.id.as_str()).collect()
    }

    /// State names, in feedback-arc order.
    pub fn state_names(&self) -> Vec<&str> {
        self.feedbacks.iter().map(|f| f.state.as_str()).collect()
    }

    /// Primary output names with their source ports, in gate/port order.
    pub fn primary_outputs(&self) -> Vec<(&str, PortRef)> {
        self.output_ports()
            .filter_map(|(p, d)| match d {
                Some(Disposition::Primary(n)) => Some((n.as_str(), p)),
                _ => None,
            })
            .collect()
    }

    pub fn output_ports(&self) -> impl Iterator<Item = (PortRef, Option<&Disposition>)> + '_ {
        self.gates
            .iter()
            .enumerate()
            .flat_map(|(g, inst)| inst.outputs.iter().enumerate().map(move |(p, d)| (PortRef::new(g, p), d.as_ref())))
    }

    pub fn input_ports(&self) -> impl Iterator<Item = (PortRef, &Driver)> + '_ {
        self.gates
            .iter()
            .enumerate()
            .flat_map(|(g, inst)| inst.inputs.iter().enumerate().map(move |(p, d)| (PortRef::new(g, p), d)))
    }

    pub fn output_port_count(&self) -> usize {
        self.gates.iter().map(|g| g.gate.arity()).sum()
    }
}

/// Distinct structural rule codes reported by [`validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rule {
    ArityMismatch,
    DuplicateLine,
    InvalidLine,
    UnknownLine,
    PortOutOfRange,
    CyclicOrder,
    FanOut,
    DanglingPort,
    DispositionMismatch,
    FeedbackMismatch,
    DuplicateName,
}

impl Rule {
    pub fn code(self) -> &'static str {
        match self {
            Rule::ArityMismatch => "E001-arity",
            Rule::DuplicateLine => "E002-duplicate-line",
            Rule::InvalidLine => "E003-invalid-line",
            Rule::UnknownLine => "E004-unknown-line",
            Rule::PortOutOfRange => "E005-port-range",
            Rule::CyclicOrder => "E006-cyclic-order",
            Rule::FanOut => "E007-fan-out",
            Rule::DanglingPort => "E008-dangling-port",
            Rule::DispositionMismatch => "E009-disposition-mismatch",
            Rule::FeedbackMismatch => "E010-feedback",
            Rule::DuplicateName => "E011-duplicate-name",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("[{}] {element}: {message}", rule.code())]
pub struct ValidationError {
    pub rule: Rule,
    pub element: String,
    pub message: String,
}

fn violation(rule: Rule, element: impl Into<String>, message: impl Into<String>) -> ValidationError {
    ValidationError { rule, element: element.into(), message: message.into() }
}

/// Checks every structural invariant, returning the first violation.
pub fn validate(circuit: &Circuit) -> Result<(), ValidationError> {
    let mut line_ids = HashSet::new();
    for line in &circuit.lines {
        if !line_ids.insert(line.id.as_str()) {
            return Err(violation(Rule::DuplicateLine, format!("line {}", line.id), "line id defined twice"));
        }
        if line.complemented && line.role != LineRole::PrimaryInput {
            return Err(violation(
                Rule::InvalidLine,
                format!("line {}", line.id),
                "only primary inputs may be complemented",
            ));
        }
    }

    let gate_count = circuit.gates.len();
    let port_exists = |p: PortRef| p.gate < gate_count && p.port < circuit.gates[p.gate].gate.arity();

    for (g, inst) in circuit.gates.iter().enumerate() {
        let arity = inst.gate.arity();
        if inst.inputs.len() != arity || inst.outputs.len() != arity {
            return Err(violation(
                Rule::ArityMismatch,
                format!("instance {g} ({})", inst.gate.name()),
                format!("{} inputs and {} outputs bound for arity {arity}", inst.inputs.len(), inst.outputs.len()),
            ));
        }
    }

    // Feedback arcs: one per state, endpoints in range and agreeing with the
    // port bindings.
    let mut states: HashMap<&str, &FeedbackArc> = HashMap::new();
    for arc in &circuit.feedbacks {
        let el = format!("feedback {}", arc.state);
        if states.insert(arc.state.as_str(), arc).is_some() {
            return Err(violation(Rule::DuplicateName, el, "state name used by two feedback arcs"));
        }
        if line_ids.contains(arc.state.as_str()) {
            return Err(violation(Rule::DuplicateName, el, "state name collides with a line id"));
        }
        if !port_exists(arc.source) || !port_exists(arc.target) {
            return Err(violation(Rule::PortOutOfRange, el, "arc endpoint does not exist"));
        }
        let target_driver = &circuit.gates[arc.target.gate].inputs[arc.target.port];
        if *target_driver != Driver::Feedback(arc.state.clone()) {
            return Err(violation(
                Rule::FeedbackMismatch,
                el,
                format!("target in:{} is not bound to feedback:{}", arc.target, arc.state),
            ));
        }
        let source_disp = &circuit.gates[arc.source.gate].outputs[arc.source.port];
        if *source_disp != Some(Disposition::Feedback(arc.state.clone())) {
            return Err(violation(
                Rule::FeedbackMismatch,
                el,
                format!("source out:{} is not marked feedback:{}", arc.source, arc.state),
            ));
        }
    }

    // Drivers: existence, ordering, single consumer.
    let mut line_users: HashMap<&str, PortRef> = HashMap::new();
    let mut port_users: HashMap<PortRef, PortRef> = HashMap::new();
    for (at, driver) in circuit.input_ports() {
        let el = format!("in:{at}");
        match driver {
            Driver::Line(id) => {
                if !line_ids.contains(id.as_str()) {
                    return Err(violation(Rule::UnknownLine, el, format!("line `{id}` is not declared")));
                }
                if let Some(prev) = line_users.insert(id, at) {
                    return Err(violation(
                        Rule::FanOut,
                        format!("line {id}"),
                        format!("drives both in:{prev} and in:{at}"),
                    ));
                }
            }
            Driver::Gate(src) => {
                if !port_exists(*src) {
                    return Err(violation(Rule::PortOutOfRange, el, format!("out:{src} does not exist")));
                }
                if src.gate >= at.gate {
                    return Err(violation(
                        Rule::CyclicOrder,
                        el,
                        format!("driven by out:{src}, which is not earlier in gate order"),
                    ));
                }
                if let Some(prev) = port_users.insert(*src, at) {
                    return Err(violation(
                        Rule::FanOut,
                        format!("out:{src}"),
                        format!("drives both in:{prev} and in:{at}"),
                    ));
                }
            }
            Driver::Feedback(state) => match states.get(state.as_str()) {
                None => {
                    return Err(violation(Rule::FeedbackMismatch, el, format!("no feedback arc for state `{state}`")))
                }
                Some(arc) if arc.target != at => {
                    return Err(violation(
                        Rule::FanOut,
                        format!("feedback {state}"),
                        format!("drives both in:{} and in:{at}", arc.target),
                    ))
                }
                Some(_) => {}
            },
        }
    }

    // Dispositions: every output accounted for exactly once.
    let mut primaries = HashSet::new();
    for (at, disp) in circuit.output_ports() {
        let el = format!("out:{at}");
        let consumer = port_users.get(&at);
        match disp {
            None => {
                return Err(violation(
                    Rule::DanglingPort,
                    el,
                    match consumer {
                        Some(c) => format!("consumed by in:{c} but carries no disposition"),
                        None => "output has no disposition".to_string(),
                    },
                ))
            }
            Some(Disposition::Consumed(target)) => match consumer {
                Some(c) if c == target => {}
                Some(c) => {
                    return Err(violation(
                        Rule::DispositionMismatch,
                        el,
                        format!("marked for in:{target} but consumed by in:{c}"),
                    ))
                }
                None => {
                    return Err(violation(
                        Rule::DanglingPort,
                        el,
                        format!("marked for in:{target}, which is driven by something else"),
                    ))
                }
            },
            Some(other) => {
                if let Some(c) = consumer {
                    return Err(violation(Rule::FanOut, el, format!("consumed by in:{c} and also marked {other:?}")));
                }
                match other {
                    Disposition::Primary(name) => {
                        if !primaries.insert(name.as_str()) {
                            return Err(violation(
                                Rule::DuplicateName,
                                el,
                                format!("primary output `{name}` defined twice"),
                            ));
                        }
                    }
                    Disposition::Feedback(state) => match states.get(state.as_str()) {
                        Some(arc) if arc.source == at => {}
                        _ => {
                            return Err(violation(
                                Rule::FeedbackMismatch,
                                el,
                                format!("marked feedback:{state} without a matching arc"),
                            ))
                        }
                    },
                    _ => {}
                }
            }
        }
    }
    Ok(())
}

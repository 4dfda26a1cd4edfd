// SPDX-License-Identifier: Apache-2.0

//! JSON netlist format.
//!
//! ```json
//! {
//!   "gates_custom": [{"name": "MYG", "arity": 2, "outputs": ["B", "A"]}],
//!   "lines": [{"id": "E", "role": "primary_input"},
//!             {"id": "K", "role": "primary_input", "complemented": true},
//!             {"id": "zero", "role": "constant_zero"}],
//!   "instances": [{"gate": "SG",
//!                  "inputs": ["line:E", "feedback:Q", "line:D", "line:zero"],
//!                  "outputs": ["garbage", "primary:Q", "feedback:Q", "garbage"]}],
//!   "feedbacks": [{"source": "out:0:2", "target": "in:0:1", "state": "Q"}]
//! }
//! ```
//!
//! Input refs: `line:<id>`, `out:<instance>:<port>`, `feedback:<state>`.
//! Output refs: `in:<instance>:<port>`, `primary:<name>`, `feedback:<state>`,
//! `garbage`. Instance and port numbers are 0-based. Unknown fields are
//! rejected.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Circuit, Disposition, Driver, FeedbackArc, GateInstance, Line, LineRole, PortRef};
use crate::gate::{is_builtin, GateError, GateLibrary, GateSpec};

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{location}: {message}")]
    Semantic { location: String, message: String },
    #[error("{location}: unknown gate `{name}`")]
    UnknownGate { location: String, name: String },
    #[error("{location}: {source}")]
    Gate { location: String, source: GateError },
}

fn semantic(location: impl Into<String>, message: impl Into<String>) -> NetlistError {
    NetlistError::Semantic { location: location.into(), message: message.into() }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetlistDoc {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    gates_custom: Vec<CustomGateDoc>,
    lines: Vec<LineDoc>,
    instances: Vec<InstanceDoc>,
    #[serde(default)]
    feedbacks: Vec<FeedbackDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomGateDoc {
    name: String,
    arity: usize,
    outputs: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineDoc {
    id: String,
    role: RoleDoc,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    complemented: bool,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RoleDoc {
    PrimaryInput,
    ConstantZero,
    ConstantOne,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    gate: String,
    inputs: Vec<String>,
    outputs: Vec<Option<String>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeedbackDoc {
    source: String,
    target: String,
    state: String,
}

impl From<RoleDoc> for LineRole {
    fn from(r: RoleDoc) -> Self {
        match r {
            RoleDoc::PrimaryInput => LineRole::PrimaryInput,
            RoleDoc::ConstantZero => LineRole::ConstantZero,
            RoleDoc::ConstantOne => LineRole::ConstantOne,
        }
    }
}

impl From<LineRole> for RoleDoc {
    fn from(r: LineRole) -> Self {
        match r {
            LineRole::PrimaryInput => RoleDoc::PrimaryInput,
            LineRole::ConstantZero => RoleDoc::ConstantZero,
            LineRole::ConstantOne => RoleDoc::ConstantOne,
        }
    }
}

fn port_ref(text: &str, prefix: &str, location: &str) -> Result<PortRef, NetlistError> {
    let body = text
        .strip_prefix(prefix)
        .ok_or_else(|| semantic(location, format!("expected `{prefix}<instance>:<port>`, got `{text}`")))?;
    let (g, p) =
        body.split_once(':').ok_or_else(|| semantic(location, format!("malformed port reference `{text}`")))?;
    let num = |s: &str| s.parse::<usize>().map_err(|_| semantic(location, format!("bad number `{s}` in `{text}`")));
    Ok(PortRef::new(num(g)?, num(p)?))
}

fn nonempty<'a>(value: &'a str, text: &str, location: &str) -> Result<&'a str, NetlistError> {
    if value.is_empty() {
        Err(semantic(location, format!("empty name in `{text}`")))
    } else {
        Ok(value)
    }
}

fn parse_driver(text: &str, location: &str) -> Result<Driver, NetlistError> {
    if let Some(id) = text.strip_prefix("line:") {
        Ok(Driver::Line(nonempty(id, text, location)?.to_string()))
    } else if let Some(state) = text.strip_prefix("feedback:") {
        Ok(Driver::Feedback(nonempty(state, text, location)?.to_string()))
    } else if text.starts_with("out:") {
        Ok(Driver::Gate(port_ref(text, "out:", location)?))
    } else {
        Err(semantic(location, format!("unrecognized input reference `{text}`")))
    }
}

fn parse_disposition(text: &str, location: &str) -> Result<Disposition, NetlistError> {
    if text == "garbage" {
        Ok(Disposition::Garbage)
    } else if let Some(name) = text.strip_prefix("primary:") {
        Ok(Disposition::Primary(nonempty(name, text, location)?.to_string()))
    } else if let Some(state) = text.strip_prefix("feedback:") {
        Ok(Disposition::Feedback(nonempty(state, text, location)?.to_string()))
    } else if text.starts_with("in:") {
        Ok(Disposition::Consumed(port_ref(text, "in:", location)?))
    } else {
        Err(semantic(location, format!("unrecognized output reference `{text}`")))
    }
}

fn driver_text(d: &Driver) -> String {
    match d {
        Driver::Line(id) => format!("line:{id}"),
        Driver::Gate(p) => format!("out:{p}"),
        Driver::Feedback(s) => format!("feedback:{s}"),
    }
}

fn disposition_text(d: &Disposition) -> String {
    match d {
        Disposition::Consumed(p) => format!("in:{p}"),
        Disposition::Primary(n) => format!("primary:{n}"),
        Disposition::Feedback(s) => format!("feedback:{s}"),
        Disposition::Garbage => "garbage".to_string(),
    }
}

/// Parses a netlist against the built-in gates plus any `gates_custom`.
pub fn parse(text: &str) -> Result<Circuit, NetlistError> {
    parse_with_library(text, &GateLibrary::builtin())
}

pub fn parse_with_library(text: &str, library: &GateLibrary) -> Result<Circuit, NetlistError> {
    let doc: NetlistDoc = serde_json::from_str(text).map_err(|e| NetlistError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut library = library.clone();
    for (i, g) in doc.gates_custom.iter().enumerate() {
        let location = format!("gates_custom[{i}]");
        let exprs: Vec<&str> = g.outputs.iter().map(String::as_str).collect();
        let spec = GateSpec::parse(&g.name, g.arity, &exprs)
            .map_err(|source| NetlistError::Gate { location: location.clone(), source })?;
        library.insert(Arc::new(spec)).map_err(|source| NetlistError::Gate { location, source })?;
    }

    let lines =
        doc.lines.into_iter().map(|l| Line { id: l.id, role: l.role.into(), complemented: l.complemented }).collect();

    let mut gates = Vec::with_capacity(doc.instances.len());
    for (i, inst) in doc.instances.iter().enumerate() {
        let location = format!("instances[{i}]");
        let gate = library.get(&inst.gate).ok_or_else(|| NetlistError::UnknownGate {
            location: format!("{location}.gate"),
            name: inst.gate.clone(),
        })?;
        let inputs = inst
            .inputs
            .iter()
            .enumerate()
            .map(|(p, t)| parse_driver(t, &format!("{location}.inputs[{p}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let outputs = inst
            .outputs
            .iter()
            .enumerate()
            .map(|(p, t)| t.as_deref().map(|t| parse_disposition(t, &format!("{location}.outputs[{p}]"))).transpose())
            .collect::<Result<Vec<_>, _>>()?;
        gates.push(GateInstance { gate, inputs, outputs });
    }

    let feedbacks = doc
        .feedbacks
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let location = format!("feedbacks[{i}]");
            Ok(FeedbackArc {
                source: port_ref(&f.source, "out:", &format!("{location}.source"))?,
                target: port_ref(&f.target, "in:", &format!("{location}.target"))?,
                state: nonempty(&f.state, &f.state, &format!("{location}.state"))?.to_string(),
            })
        })
        .collect::<Result<Vec<_>, NetlistError>>()?;

    Ok(Circuit { lines, gates, feedbacks })
}

/// Renders a circuit as pretty-printed JSON. Gates that are not built-ins
/// are emitted under `gates_custom`.
pub fn serialize(circuit: &Circuit) -> Result<String, NetlistError> {
    let mut custom: BTreeMap<&str, &GateSpec> = BTreeMap::new();
    let mut gates_custom = Vec::new();
    for (i, inst) in circuit.gates.iter().enumerate() {
        let spec = inst.gate.as_ref();
        if is_builtin(spec) {
            continue;
        }
        match custom.get(spec.name()) {
            Some(prev) if *prev == spec => {}
            Some(_) => {
                return Err(semantic(
                    format!("instances[{i}]"),
                    format!("two different gates are named `{}`", spec.name()),
                ))
            }
            None => {
                custom.insert(spec.name(), spec);
                gates_custom.push(CustomGateDoc {
                    name: spec.name().to_string(),
                    arity: spec.arity(),
                    outputs: spec.outputs().iter().map(ToString::to_string).collect(),
                });
            }
        }
    }
    let doc = NetlistDoc {
        gates_custom,
        lines: circuit
            .lines
            .iter()
            .map(|l| LineDoc { id: l.id.clone(), role: l.role.into(), complemented: l.complemented })
            .collect(),
        instances: circuit
            .gates
            .iter()
            .map(|g| InstanceDoc {
                gate: g.gate.name().to_string(),
                inputs: g.inputs.iter().map(driver_text).collect(),
                outputs: g.outputs.iter().map(|d| d.as_ref().map(disposition_text)).collect(),
            })
            .collect(),
        feedbacks: circuit
            .feedbacks
            .iter()
            .map(|f| FeedbackDoc {
                source: format!("out:{}", f.source),
                target: format!("in:{}", f.target),
                state: f.state.clone(),
            })
            .collect(),
    };
    Ok(serde_json::to_string_pretty(&doc).expect("netlist document serializes"))
}

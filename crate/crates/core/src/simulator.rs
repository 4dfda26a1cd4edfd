// SPDX-License-Identifier: Apache-2.0

//! Level-sensitive latch simulation.
//!
//! One input event means one pass over the gates in order, with every
//! feedback target reading the current state and every feedback source
//! producing the next state. Exhaustive checks enumerate assignments with
//! the state bits most significant, then the inputs in line order, so the
//! reported counterexample is the lowest-indexed failing assignment.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::exec::Exec;
use crate::expr::{BoundExpr, Expr, ExprError};
use crate::gate::{Bijectivity, GateSpec};
use crate::netlist::{validate, Circuit, Disposition, Driver, LineRole, ValidationError};

/// Largest number of free wires [`check_cut_bijective`] will enumerate.
pub const MAX_CUT_WIRES: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("invalid circuit: {0}")]
    Invalid(#[from] ValidationError),
    #[error("no value bound for input `{0}`")]
    MissingInput(String),
    #[error("no value bound for state `{0}`")]
    MissingState(String),
    #[error("`{0}` is neither an input nor a state of the circuit")]
    UnknownBinding(String),
    #[error("equation: {0}")]
    Equation(#[from] ExprError),
    #[error("circuit has {0} states; name the one to check")]
    AmbiguousState(usize),
    #[error("expected exactly two primary outputs, found {0}")]
    OutputCount(usize),
    #[error("{wires} free wires exceed the enumeration limit of {max}")]
    Capacity { wires: usize, max: usize },
    #[error("event {index}: {source}")]
    Event { index: usize, source: Box<SimError> },
}

/// Values of the feedback states, by state name.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct LatchState {
    pub values: BTreeMap<String, bool>,
}

impl LatchState {
    pub fn new<S: Into<String>>(values: impl IntoIterator<Item = (S, bool)>) -> Self {
        LatchState { values: values.into_iter().map(|(k, v)| (k.into(), v)).collect() }
    }

    pub fn get(&self, name: &str) -> Option<bool> {
        self.values.get(name).copied()
    }
}

pub type Bindings = BTreeMap<String, bool>;

/// Result of one combinational pass.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub outputs: Bindings,
    pub next_state: LatchState,
    /// Value of every gate output port, indexed `[gate][port]`.
    pub port_values: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, Copy)]
enum Source {
    Const(bool),
    Input { index: usize, invert: bool },
    State(usize),
    Port(usize),
}

/// A validated circuit flattened into index form for repeated evaluation.
#[derive(Debug, Clone)]
pub struct CompiledCircuit {
    inputs: Vec<String>,
    states: Vec<String>,
    gates: Vec<(Arc<GateSpec>, Vec<Source>, usize)>,
    outputs: Vec<(String, usize)>,
    next: Vec<usize>,
    port_count: usize,
}

impl CompiledCircuit {
    pub fn new(circuit: &Circuit) -> Result<Self, SimError> {
        validate(circuit)?;
        let inputs: Vec<String> = circuit.input_names().into_iter().map(String::from).collect();
        let states: Vec<String> = circuit.state_names().into_iter().map(String::from).collect();
        let mut offsets = Vec::with_capacity(circuit.gates.len());
        let mut port_count = 0;
        for inst in &circuit.gates {
            offsets.push(port_count);
            port_count += inst.gate.arity();
        }
        let gates = circuit
            .gates
            .iter()
            .zip(&offsets)
            .map(|(inst, &off)| {
                let sources = inst
                    .inputs
                    .iter()
                    .map(|d| match d {
                        Driver::Line(id) => {
                            let line = circuit.line(id).expect("validated");
                            match line.role {
                                LineRole::ConstantZero => Source::Const(false),
                                LineRole::ConstantOne => Source::Const(true),
                                LineRole::PrimaryInput => Source::Input {
                                    index: inputs.iter().position(|n| n == id).expect("validated"),
                                    invert: line.complemented,
                                },
                            }
                        }
                        Driver::Gate(p) => Source::Port(offsets[p.gate] + p.port),
                        Driver::Feedback(s) => Source::State(states.iter().position(|n| n == s).expect("validated")),
                    })
                    .collect();
                (inst.gate.clone(), sources, off)
            })
            .collect();
        let outputs =
            circuit.primary_outputs().into_iter().map(|(n, p)| (n.to_string(), offsets[p.gate] + p.port)).collect();
        let next = circuit.feedbacks.iter().map(|f| offsets[f.source.gate] + f.source.port).collect();
        Ok(CompiledCircuit { inputs, states, gates, outputs, next, port_count })
    }

    pub fn input_names(&self) -> &[String] {
        &self.inputs
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn output_names(&self) -> Vec<&str> {
        self.outputs.iter().map(|(n, _)| n.as_str()).collect()
    }

    /// Evaluates all ports given positional input and state values.
    pub fn eval_ports(&self, inputs: &[bool], state: &[bool]) -> Vec<bool> {
        let mut ports = vec![false; self.port_count];
        for (spec, sources, off) in &self.gates {
            let packed = sources.iter().fold(0u32, |acc, s| {
                let bit = match *s {
                    Source::Const(b) => b,
                    Source::Input { index, invert } => inputs[index] ^ invert,
                    Source::State(i) => state[i],
                    Source::Port(p) => ports[p],
                };
                (acc << 1) | u32::from(bit)
            });
            let out = spec.eval_packed(packed);
            let arity = spec.arity();
            for p in 0..arity {
                ports[off + p] = (out >> (arity - 1 - p)) & 1 == 1;
            }
        }
        ports
    }

    /// Positional (outputs, next state).
    pub fn eval_positional(&self, inputs: &[bool], state: &[bool]) -> (Vec<bool>, Vec<bool>) {
        let ports = self.eval_ports(inputs, state);
        (self.outputs.iter().map(|(_, p)| ports[*p]).collect(), self.next.iter().map(|&p| ports[p]).collect())
    }

    fn positional(&self, inputs: &Bindings, state: &LatchState) -> Result<(Vec<bool>, Vec<bool>), SimError> {
        if let Some(k) = inputs.keys().find(|k| !self.inputs.contains(k)) {
            return Err(SimError::UnknownBinding(k.clone()));
        }
        if let Some(k) = state.values.keys().find(|k| !self.states.contains(k)) {
            return Err(SimError::UnknownBinding(k.clone()));
        }
        let ins = self
            .inputs
            .iter()
            .map(|n| inputs.get(n).copied().ok_or_else(|| SimError::MissingInput(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        let st = self
            .states
            .iter()
            .map(|n| state.get(n).ok_or_else(|| SimError::MissingState(n.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok((ins, st))
    }

    pub fn eval(&self, inputs: &Bindings, state: &LatchState) -> Result<Evaluation, SimError> {
        let (ins, st) = self.positional(inputs, state)?;
        let ports = self.eval_ports(&ins, &st);
        let mut port_values = Vec::with_capacity(self.gates.len());
        for (spec, _, off) in &self.gates {
            port_values.push(ports[*off..off + spec.arity()].to_vec());
        }
        Ok(Evaluation {
            outputs: self.outputs.iter().map(|(n, p)| (n.clone(), ports[*p])).collect(),
            next_state: LatchState {
                values: self.states.iter().cloned().zip(self.next.iter().map(|&p| ports[p])).collect(),
            },
            port_values,
        })
    }

    /// Number of exhaustive assignments over states and inputs.
    pub fn assignment_count(&self) -> u64 {
        1u64 << (self.states.len() + self.inputs.len())
    }

    /// Splits an assignment index into (inputs, states); states occupy the
    /// high bits.
    pub fn decode(&self, index: u64) -> (Vec<bool>, Vec<bool>) {
        let n_in = self.inputs.len();
        let n_st = self.states.len();
        let total = n_in + n_st;
        let bit = |pos: usize| (index >> (total - 1 - pos)) & 1 == 1;
        let states = (0..n_st).map(bit).collect();
        let inputs = (0..n_in).map(|i| bit(n_st + i)).collect();
        (inputs, states)
    }

    /// Named assignment, inputs first then states.
    pub fn describe(&self, inputs: &[bool], states: &[bool]) -> Vec<(String, bool)> {
        self.inputs
            .iter()
            .cloned()
            .zip(inputs.iter().copied())
            .chain(self.states.iter().cloned().zip(states.iter().copied()))
            .collect()
    }
}

pub fn eval_combinational(circuit: &Circuit, inputs: &Bindings, state: &LatchState) -> Result<Evaluation, SimError> {
    CompiledCircuit::new(circuit)?.eval(inputs, state)
}

pub fn step(circuit: &Circuit, inputs: &Bindings, state: &LatchState) -> Result<LatchState, SimError> {
    Ok(eval_combinational(circuit, inputs, state)?.next_state)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SimStep {
    pub event: usize,
    pub inputs: Bindings,
    pub state_before: LatchState,
    pub outputs: Bindings,
    pub state_after: LatchState,
    /// False when re-applying the same inputs would move the state again.
    #[serde(skip_serializing_if = "is_true")]
    pub stable: bool,
}

fn is_true(b: &bool) -> bool {
    *b
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimTrace {
    pub steps: Vec<SimStep>,
}

impl SimTrace {
    pub fn final_state(&self) -> Option<&LatchState> {
        self.steps.last().map(|s| &s.state_after)
    }

    /// Indices of events whose held inputs did not reach a fixpoint.
    pub fn unstable_events(&self) -> Vec<usize> {
        self.steps.iter().filter(|s| !s.stable).map(|s| s.event).collect()
    }

    pub fn to_json_lines(&self) -> String {
        self.steps.iter().map(|s| serde_json::to_string(s).expect("trace step serializes") + "\n").collect()
    }
}

pub fn simulate_sequence(circuit: &Circuit, events: &[Bindings], initial: &LatchState) -> Result<SimTrace, SimError> {
    let compiled = CompiledCircuit::new(circuit)?;
    let mut state = initial.clone();
    let mut steps = Vec::with_capacity(events.len());
    for (index, ev) in events.iter().enumerate() {
        let wrap = |e: SimError| SimError::Event { index, source: Box::new(e) };
        let eval = compiled.eval(ev, &state).map_err(wrap)?;
        let again = compiled.eval(ev, &eval.next_state).map_err(wrap)?;
        steps.push(SimStep {
            event: index,
            inputs: ev.clone(),
            state_before: state,
            outputs: eval.outputs,
            state_after: eval.next_state.clone(),
            stable: again.next_state == eval.next_state,
        });
        state = eval.next_state;
    }
    Ok(SimTrace { steps })
}

/// Outcome of an exhaustive check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub holds: bool,
    pub total: u64,
    /// First failing assignment, inputs then states.
    pub counterexample: Option<Vec<(String, bool)>>,
    /// (expected, actual) at the counterexample, where meaningful.
    pub mismatch: Option<(bool, bool)>,
}

impl Verdict {
    fn from_search(
        compiled: &CompiledCircuit,
        total: u64,
        failing: Option<u64>,
        detail: impl Fn(u64) -> Option<(bool, bool)>,
    ) -> Self {
        match failing {
            None => Verdict { holds: true, total, counterexample: None, mismatch: None },
            Some(i) => {
                let (ins, st) = compiled.decode(i);
                Verdict { holds: false, total, counterexample: Some(compiled.describe(&ins, &st)), mismatch: detail(i) }
            }
        }
    }

    /// `E=0,D=1,Q=0` rendering of the counterexample.
    pub fn counterexample_text(&self) -> Option<String> {
        self.counterexample
            .as_ref()
            .map(|cx| cx.iter().map(|(n, v)| format!("{n}={}", u8::from(*v))).collect::<Vec<_>>().join(","))
    }
}

/// Checks that the next state equals `equation` on every assignment.
/// The circuit must have exactly one state.
pub fn check_characteristic(circuit: &Circuit, equation: &Expr) -> Result<Verdict, SimError> {
    check_characteristic_with(Exec::default(), circuit, None, equation)
}

/// Like [`check_characteristic`], with an explicit executor and optionally
/// a named state for multi-state circuits.
pub fn check_characteristic_with(
    exec: Exec,
    circuit: &Circuit,
    state: Option<&str>,
    equation: &Expr,
) -> Result<Verdict, SimError> {
    let compiled = CompiledCircuit::new(circuit)?;
    let target = match state {
        Some(name) => {
            compiled.states.iter().position(|s| s == name).ok_or_else(|| SimError::UnknownBinding(name.to_string()))?
        }
        None if compiled.states.len() == 1 => 0,
        None => return Err(SimError::AmbiguousState(compiled.states.len())),
    };
    let symbols: Vec<&str> = compiled.inputs.iter().chain(compiled.states.iter()).map(String::as_str).collect();
    let bound: BoundExpr = equation.bind(&symbols)?;
    let expected_actual = |i: u64| {
        let (ins, st) = compiled.decode(i);
        let vars: Vec<bool> = ins.iter().chain(st.iter()).copied().collect();
        let (_, next) = compiled.eval_positional(&ins, &st);
        (bound.eval(&vars), next[target])
    };
    let total = compiled.assignment_count();
    let failing = exec.find_first(total, |i| {
        let (e, a) = expected_actual(i);
        e != a
    });
    Ok(Verdict::from_search(&compiled, total, failing, |i| Some(expected_actual(i))))
}

/// Checks a named primary output against `equation` on every assignment.
pub fn check_output(circuit: &Circuit, output: &str, equation: &Expr) -> Result<Verdict, SimError> {
    let compiled = CompiledCircuit::new(circuit)?;
    let slot = compiled
        .outputs
        .iter()
        .position(|(n, _)| n == output)
        .ok_or_else(|| SimError::UnknownBinding(output.to_string()))?;
    let symbols: Vec<&str> = compiled.inputs.iter().chain(compiled.states.iter()).map(String::as_str).collect();
    let bound = equation.bind(&symbols)?;
    let expected_actual = |i: u64| {
        let (ins, st) = compiled.decode(i);
        let vars: Vec<bool> = ins.iter().chain(st.iter()).copied().collect();
        let (outs, _) = compiled.eval_positional(&ins, &st);
        (bound.eval(&vars), outs[slot])
    };
    let total = compiled.assignment_count();
    let failing = Exec::default().find_first(total, |i| {
        let (e, a) = expected_actual(i);
        e != a
    });
    Ok(Verdict::from_search(&compiled, total, failing, |i| Some(expected_actual(i))))
}

/// Checks that the two primary outputs differ on every assignment.
pub fn check_complementarity(circuit: &Circuit) -> Result<Verdict, SimError> {
    let compiled = CompiledCircuit::new(circuit)?;
    if compiled.outputs.len() != 2 {
        return Err(SimError::OutputCount(compiled.outputs.len()));
    }
    let total = compiled.assignment_count();
    let pair = |i: u64| {
        let (ins, st) = compiled.decode(i);
        let (outs, _) = compiled.eval_positional(&ins, &st);
        (outs[0], outs[1])
    };
    let failing = Exec::default().find_first(total, |i| {
        let (a, b) = pair(i);
        a == b
    });
    Ok(Verdict::from_search(&compiled, total, failing, |i| Some(pair(i))))
}

/// Checks the fixpoint law step(x, step(x, s)) = step(x, s) on every
/// assignment.
pub fn check_stability(circuit: &Circuit) -> Result<Verdict, SimError> {
    let compiled = CompiledCircuit::new(circuit)?;
    let total = compiled.assignment_count();
    let failing = Exec::default().find_first(total, |i| {
        let (ins, st) = compiled.decode(i);
        let (_, once) = compiled.eval_positional(&ins, &st);
        let (_, twice) = compiled.eval_positional(&ins, &once);
        once != twice
    });
    Ok(Verdict::from_search(&compiled, total, failing, |_| None))
}

/// Cuts every feedback arc, treats each line- or feedback-driven input port
/// as a free wire and each unconsumed output port as an output wire, and
/// checks that the induced map is a bijection.
pub fn check_cut_bijective(circuit: &Circuit) -> Result<Bijectivity, SimError> {
    validate(circuit)?;
    let offsets: Vec<usize> = circuit
        .gates
        .iter()
        .scan(0, |acc, g| {
            let o = *acc;
            *acc += g.gate.arity();
            Some(o)
        })
        .collect();
    let free_in: Vec<(usize, usize)> =
        circuit.input_ports().filter(|(_, d)| !matches!(d, Driver::Gate(_))).map(|(p, _)| (p.gate, p.port)).collect();
    let free_out: Vec<usize> = circuit
        .output_ports()
        .filter(|(_, d)| !matches!(d, Some(Disposition::Consumed(_))))
        .map(|(p, _)| offsets[p.gate] + p.port)
        .collect();
    let wires = free_in.len();
    if wires > MAX_CUT_WIRES {
        return Err(SimError::Capacity { wires, max: MAX_CUT_WIRES });
    }
    debug_assert_eq!(wires, free_out.len());
    let total_ports: usize = circuit.output_port_count();
    let mut seen: Vec<Option<u32>> = vec![None; 1 << wires];
    for pattern in 0..(1u32 << wires) {
        let mut ports = vec![false; total_ports];
        for (g, inst) in circuit.gates.iter().enumerate() {
            let packed = inst.inputs.iter().enumerate().fold(0u32, |acc, (p, d)| {
                let bit = match d {
                    Driver::Gate(src) => ports[offsets[src.gate] + src.port],
                    _ => {
                        let k = free_in.iter().position(|&w| w == (g, p)).expect("free wire");
                        (pattern >> (wires - 1 - k)) & 1 == 1
                    }
                };
                (acc << 1) | u32::from(bit)
            });
            let out = inst.gate.eval_packed(packed);
            let arity = inst.gate.arity();
            for p in 0..arity {
                ports[offsets[g] + p] = (out >> (arity - 1 - p)) & 1 == 1;
            }
        }
        let image = free_out.iter().fold(0u32, |acc, &p| (acc << 1) | u32::from(ports[p]));
        if let Some(first) = seen[image as usize] {
            return Ok(Bijectivity::Collision { first: first as usize, second: pattern as usize });
        }
        seen[image as usize] = Some(pattern);
    }
    Ok(Bijectivity::Bijective)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netlist::{d_latch_q, d_latch_qq, jk_latch_q, jk_latch_qq};

    fn b(pairs: &[(&str, u8)]) -> Bindings {
        pairs.iter().map(|(k, v)| (k.to_string(), *v == 1)).collect()
    }

    fn q(v: u8) -> LatchState {
        LatchState::new([("Q", v == 1)])
    }

    fn e(s: &str) -> Expr {
        s.parse().unwrap()
    }

    #[test]
    fn d_latch_eval() {
        let ev = eval_combinational(&d_latch_q(), &b(&[("E", 1), ("D", 0)]), &q(1)).unwrap();
        assert!(!ev.outputs["Q"]);
        assert_eq!(ev.next_state, q(0));
        assert_eq!(ev.port_values.len(), 1);
        let ev = eval_combinational(&d_latch_q(), &b(&[("E", 0), ("D", 1)]), &q(0)).unwrap();
        assert_eq!((ev.outputs["Q"], ev.next_state.clone()), (false, q(0)));
    }

    #[test]
    fn jk_toggle_and_reset() {
        let next = step(&jk_latch_q(), &b(&[("E", 1), ("J", 1), ("K", 1)]), &q(1)).unwrap();
        assert_eq!(next, q(0));
        let next = step(&jk_latch_q(), &b(&[("E", 1), ("J", 0), ("K", 1)]), &q(1)).unwrap();
        assert_eq!(next, q(0));
    }

    #[test]
    fn missing_and_unknown_bindings() {
        let c = d_latch_q();
        assert_eq!(step(&c, &b(&[("E", 1)]), &q(0)), Err(SimError::MissingInput("D".into())));
        assert_eq!(
            step(&c, &b(&[("E", 1), ("D", 1)]), &LatchState::default()),
            Err(SimError::MissingState("Q".into()))
        );
        assert_eq!(step(&c, &b(&[("E", 1), ("D", 1), ("X", 0)]), &q(0)), Err(SimError::UnknownBinding("X".into())));
    }

    #[test]
    fn sequences() {
        let c = d_latch_q();
        let trace = simulate_sequence(
            &c,
            &[b(&[("E", 1), ("D", 1)]), b(&[("E", 0), ("D", 0)]), b(&[("E", 0), ("D", 1)])],
            &q(0),
        )
        .unwrap();
        let traj: Vec<bool> = trace.steps.iter().map(|s| s.state_after.values["Q"]).collect();
        assert_eq!(traj, vec![true, true, true]);
        for w in trace.steps.windows(2) {
            assert_eq!(w[0].state_after, w[1].state_before);
        }
        assert!(trace.unstable_events().is_empty());
        assert!(simulate_sequence(&c, &[], &q(0)).unwrap().steps.is_empty());

        let jk = jk_latch_q();
        let ev = b(&[("E", 1), ("J", 1), ("K", 1)]);
        let trace = simulate_sequence(&jk, &[ev.clone(), ev], &q(0)).unwrap();
        let traj: Vec<bool> = trace.steps.iter().map(|s| s.state_after.values["Q"]).collect();
        assert_eq!(traj, vec![true, false]);
        // held toggle inputs do not reach a fixpoint
        assert_eq!(trace.unstable_events(), vec![0, 1]);
    }

    #[test]
    fn event_errors_carry_index() {
        let err = simulate_sequence(&d_latch_q(), &[b(&[("E", 1), ("D", 1)]), b(&[("E", 1)])], &q(0)).unwrap_err();
        assert!(matches!(err, SimError::Event { index: 1, .. }));
    }

    #[test]
    fn trace_json_lines() {
        let trace = simulate_sequence(&d_latch_q(), &[b(&[("E", 1), ("D", 1)])], &q(0)).unwrap();
        let line = trace.to_json_lines();
        let v: serde_json::Value = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(v["event"], 0);
        assert_eq!(v["state_after"]["Q"], true);
        assert_eq!(v["inputs"]["D"], true);
        assert!(v.get("stable").is_none());
    }

    #[test]
    fn characteristic_checks() {
        let v = check_characteristic(&d_latch_q(), &e("D*E + !E*Q")).unwrap();
        assert!(v.holds);
        assert_eq!(v.total, 8);
        let v = check_characteristic(&d_latch_q(), &e("D")).unwrap();
        assert!(!v.holds);
        assert_eq!(v.counterexample_text().unwrap(), "E=0,D=1,Q=0");
        assert_eq!(v.mismatch, Some((true, false)));
        let v = check_characteristic(&jk_latch_qq(), &e("(J*!Q + !K*Q)*E + !E*Q")).unwrap();
        assert!(v.holds);
        assert_eq!(v.total, 16);
        assert_eq!(
            check_characteristic(&d_latch_q(), &e("D*X")),
            Err(SimError::Equation(ExprError::UnknownSymbol("X".into())))
        );
    }

    #[test]
    fn complementarity() {
        assert!(check_complementarity(&d_latch_qq()).unwrap().holds);
        assert_eq!(check_complementarity(&jk_latch_qq()).unwrap().total, 16);
        assert_eq!(check_complementarity(&d_latch_q()), Err(SimError::OutputCount(1)));
    }

    #[test]
    fn cut_bijectivity_of_builders() {
        for c in [d_latch_q(), d_latch_qq(), jk_latch_q(), jk_latch_qq()] {
            assert_eq!(check_cut_bijective(&c).unwrap(), Bijectivity::Bijective);
        }
    }
}

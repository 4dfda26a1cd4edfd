// SPDX-License-Identifier: Apache-2.0

//! Bounded exhaustive synthesis of single-state latches.
//!
//! Circuits are grown one gate at a time. Every input port of a new gate is
//! bound to an unused primary input (plain, or complemented if allowed),
//! the current state (exactly once per circuit), a fresh constant line, or
//! a still-free output port of an earlier gate. Behavior is tracked as bit
//! masks over all input/state assignments, so two partial circuits that
//! leave the same multiset of free-port functions and the same remaining
//! resources have identical futures; only the first of them is kept.
//!
//! A circuit realizes a target when its free ports can be matched
//! injectively onto the required functions: one port becomes the feedback
//! source, one port per named output becomes primary, the rest garbage.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::exec::Exec;
use crate::expr::{Expr, ExprError};
use crate::gate::{GateLibrary, GateSpec, MAX_ARITY};
use crate::netlist::{serialize, Circuit, Disposition, Driver, FeedbackArc, GateInstance, Line, PortRef};
use crate::simulator::CompiledCircuit;

pub const DEFAULT_MAX_GATES: usize = 3;
pub const DEFAULT_MAX_LINES: usize = 6;
/// Environment variable overriding the line capacity in front ends.
pub const MAX_LINES_ENV: &str = "REVLATCH_MAX_LINES";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SearchError {
    #[error("bounds ({max_gates} gates, {max_lines} lines) exceed capacity ({cap_gates} gates, {cap_lines} lines)")]
    Capacity { max_gates: usize, max_lines: usize, cap_gates: usize, cap_lines: usize },
    #[error("invalid target: {0}")]
    Spec(String),
    #[error("target equation: {0}")]
    Equation(#[from] ExprError),
    #[error("unknown target `{0}` (expected d-latch-q, d-latch-qq, jk-latch-q or jk-latch-qq)")]
    UnknownTarget(String),
}

/// What a synthesized latch must compute.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpec {
    pub name: String,
    pub input_names: Vec<String>,
    /// Exactly one state is supported.
    pub state_names: Vec<String>,
    /// Function fed back as the next state.
    pub next_state: Expr,
    /// Named primary outputs and their functions.
    pub required_outputs: Vec<(String, Expr)>,
    pub allow_complemented_inputs: bool,
    pub allow_constants: bool,
    /// Gate count the target is claimed to need, if any.
    pub claimed_min_gates: Option<usize>,
}

const D_NEXT: &str = "D*E + E'*Q";
const JK_NEXT: &str = "(J*Q' + K'*Q)*E + E'*Q";

impl TargetSpec {
    pub fn new(
        name: &str,
        inputs: &[&str],
        state: &str,
        next_state: Expr,
        required_outputs: Vec<(String, Expr)>,
    ) -> Result<Self, SearchError> {
        let spec = TargetSpec {
            name: name.to_string(),
            input_names: inputs.iter().map(|s| s.to_string()).collect(),
            state_names: vec![state.to_string()],
            next_state,
            required_outputs,
            allow_complemented_inputs: false,
            allow_constants: true,
            claimed_min_gates: None,
        };
        spec.check()?;
        Ok(spec)
    }

    /// Checks the structural invariants.
    pub fn check(&self) -> Result<(), SearchError> {
        if self.state_names.len() != 1 {
            return Err(SearchError::Spec(format!("expected one state, found {}", self.state_names.len())));
        }
        if self.input_names.len() > 5 {
            return Err(SearchError::Spec("at most 5 inputs are supported".into()));
        }
        if self.required_outputs.len() >= MAX_REQUIRED {
            return Err(SearchError::Spec(format!("at most {} required outputs are supported", MAX_REQUIRED - 1)));
        }
        let symbols: Vec<&str> = self.symbols();
        let mut seen = HashSet::new();
        for s in &symbols {
            if !seen.insert(*s) {
                return Err(SearchError::Spec(format!("symbol `{s}` declared twice")));
            }
        }
        self.next_state.bind(&symbols)?;
        let mut names = HashSet::new();
        for (name, e) in &self.required_outputs {
            if !names.insert(name.as_str()) {
                return Err(SearchError::Spec(format!("output `{name}` required twice")));
            }
            e.bind(&symbols)?;
        }
        Ok(())
    }

    fn symbols(&self) -> Vec<&str> {
        self.input_names.iter().chain(&self.state_names).map(String::as_str).collect()
    }

    pub fn state(&self) -> &str {
        &self.state_names[0]
    }

    pub fn with_complemented_inputs(mut self, allow: bool) -> Self {
        self.allow_complemented_inputs = allow;
        self
    }

    fn latch(name: &str, inputs: &[&str], next: &str, with_complement: bool, claim: usize) -> Self {
        let next: Expr = next.parse().expect("built-in equation parses");
        let mut outputs = vec![("Q".to_string(), next.clone())];
        if with_complement {
            outputs.push(("Qbar".to_string(), Expr::not(next.clone())));
        }
        let mut spec = TargetSpec::new(name, inputs, "Q", next, outputs).expect("built-in target is valid");
        spec.claimed_min_gates = Some(claim);
        spec
    }

    pub fn d_latch_q() -> Self {
        Self::latch("d-latch-q", &["E", "D"], D_NEXT, false, 1)
    }

    pub fn d_latch_qq() -> Self {
        Self::latch("d-latch-qq", &["E", "D"], D_NEXT, true, 2)
    }

    /// JK target with complemented inputs allowed, the wiring the reference
    /// design uses for K.
    pub fn jk_latch_q() -> Self {
        Self::latch("jk-latch-q", &["E", "J", "K"], JK_NEXT, false, 2).with_complemented_inputs(true)
    }

    pub fn jk_latch_qq() -> Self {
        Self::latch("jk-latch-qq", &["E", "J", "K"], JK_NEXT, true, 3).with_complemented_inputs(true)
    }

    pub fn builtin(name: &str) -> Result<Self, SearchError> {
        match name {
            "d-latch-q" => Ok(Self::d_latch_q()),
            "d-latch-qq" => Ok(Self::d_latch_qq()),
            "jk-latch-q" => Ok(Self::jk_latch_q()),
            "jk-latch-qq" => Ok(Self::jk_latch_qq()),
            other => Err(SearchError::UnknownTarget(other.to_string())),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "inputs": self.input_names,
            "states": self.state_names,
            "next_state": self.next_state.to_string(),
            "required_outputs": self.required_outputs.iter()
                .map(|(n, e)| json!({"name": n, "equation": e.to_string()}))
                .collect::<Vec<_>>(),
            "allow_complemented_inputs": self.allow_complemented_inputs,
            "allow_constants": self.allow_constants,
            "claimed_min_gates": self.claimed_min_gates,
        })
    }
}

/// The gate set searched by default: {FG, TG, FRG, PG, SG}. Strict runs,
/// which take away complemented inputs from a target that normally has
/// them, add NOT so inversion stays expressible as a gate.
pub fn default_library(strict: bool) -> GateLibrary {
    if strict {
        GateLibrary::from_names(&["NOT", "FG", "TG", "FRG", "PG", "SG"]).expect("built-in names")
    } else {
        GateLibrary::standard()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SearchBounds {
    pub max_gates: usize,
    pub max_lines: usize,
}

impl SearchBounds {
    pub fn new(max_gates: usize, max_lines: usize) -> Self {
        SearchBounds { max_gates, max_lines }
    }

    pub fn check(&self, capacity: SearchBounds) -> Result<(), SearchError> {
        if self.max_gates > capacity.max_gates || self.max_lines > capacity.max_lines {
            return Err(SearchError::Capacity {
                max_gates: self.max_gates,
                max_lines: self.max_lines,
                cap_gates: capacity.max_gates,
                cap_lines: capacity.max_lines,
            });
        }
        Ok(())
    }
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds::new(DEFAULT_MAX_GATES, DEFAULT_MAX_LINES)
    }
}

/// Default capacity with the line limit taken from [`MAX_LINES_ENV`] when
/// it holds a number.
pub fn capacity_from_env() -> SearchBounds {
    let lines = std::env::var(MAX_LINES_ENV).ok().and_then(|v| v.trim().parse().ok());
    SearchBounds::new(DEFAULT_MAX_GATES, lines.unwrap_or(DEFAULT_MAX_LINES))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchVerdict {
    Found,
    Exhausted,
}

/// How a search outcome relates to the target's claimed gate count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimStatus {
    /// Found at exactly the claimed count.
    Confirmed,
    /// Exhausted below the claimed count: no smaller realization exists.
    Consistent,
    /// Found with fewer gates than claimed.
    Refuted,
    /// Nothing found although the bounds reach the claimed count.
    Unattained,
    /// The target carries no claim.
    Unclaimed,
}

impl ClaimStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            ClaimStatus::Confirmed => "confirmed",
            ClaimStatus::Consistent => "consistent",
            ClaimStatus::Refuted => "refuted",
            ClaimStatus::Unattained => "unattained",
            ClaimStatus::Unclaimed => "unclaimed",
        }
    }

    pub fn is_ok(self) -> bool {
        matches!(self, ClaimStatus::Confirmed | ClaimStatus::Consistent | ClaimStatus::Unclaimed)
    }
}

#[derive(Debug, Clone)]
pub struct SearchResult {
    pub spec: TargetSpec,
    pub library: Vec<String>,
    pub bounds: SearchBounds,
    pub verdict: SearchVerdict,
    pub min_gates: Option<usize>,
    pub witness: Option<Circuit>,
    /// Candidates examined over all gate counts: one-gate extensions at
    /// stored levels, port bindings tried at the final level.
    pub explored: u64,
    pub explored_per_level: Vec<u64>,
    pub wall_time: Duration,
}

impl SearchResult {
    pub fn claim_status(&self) -> ClaimStatus {
        let Some(claim) = self.spec.claimed_min_gates else {
            return ClaimStatus::Unclaimed;
        };
        match (self.verdict, self.min_gates) {
            (SearchVerdict::Found, Some(k)) if k == claim => ClaimStatus::Confirmed,
            (SearchVerdict::Found, Some(k)) if k < claim => ClaimStatus::Refuted,
            (SearchVerdict::Found, _) => ClaimStatus::Unattained,
            (SearchVerdict::Exhausted, _) if self.bounds.max_gates < claim => ClaimStatus::Consistent,
            (SearchVerdict::Exhausted, _) => ClaimStatus::Unattained,
        }
    }

    pub fn to_json(&self) -> Value {
        let witness = self
            .witness
            .as_ref()
            .map(|c| serde_json::from_str::<Value>(&serialize(c).expect("witness serializes")).expect("valid JSON"));
        json!({
            "spec": self.spec.to_json(),
            "library": self.library,
            "bounds": self.bounds,
            "verdict": self.verdict,
            "min_gates": self.min_gates,
            "claim_status": self.claim_status(),
            "witness": witness,
            "explored": self.explored,
            "explored_per_level": self.explored_per_level,
            "wall_time": self.wall_time.as_secs_f64(),
        })
    }
}

impl fmt::Display for SearchResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} [{}] gates <= {}, lines <= {}{}: ",
            self.spec.name,
            self.library.join(","),
            self.bounds.max_gates,
            self.bounds.max_lines,
            if self.spec.allow_complemented_inputs { ", complemented inputs" } else { "" }
        )?;
        match self.min_gates {
            Some(k) => write!(f, "found with {k} gate{}", if k == 1 { "" } else { "s" })?,
            None => write!(f, "exhausted")?,
        }
        let noun = if self.explored == 1 { "candidate" } else { "candidates" };
        write!(f, " ({} {noun}, {:.3}s)", self.explored, self.wall_time.as_secs_f64())?;
        if let Some(claim) = self.spec.claimed_min_gates {
            write!(f, "; claim {claim}: {}", self.claim_status().as_str())?;
        }
        Ok(())
    }
}

/// Checks `candidate` against every requirement of `spec` by exhaustive
/// simulation over the target's inputs and state. A candidate may leave
/// declared inputs unconnected, which only succeeds when the requirements
/// ignore them. Invalid or mis-shaped candidates do not realize anything.
pub fn realizes(candidate: &Circuit, spec: &TargetSpec) -> bool {
    realizes_with(Exec::default(), candidate, spec)
}

pub fn realizes_with(exec: Exec, candidate: &Circuit, spec: &TargetSpec) -> bool {
    if candidate.state_names() != [spec.state()] {
        return false;
    }
    let Ok(compiled) = CompiledCircuit::new(candidate) else {
        return false;
    };
    let Some(routes) = compiled
        .input_names()
        .iter()
        .map(|n| spec.input_names.iter().position(|s| s == n))
        .collect::<Option<Vec<usize>>>()
    else {
        return false;
    };
    let symbols: Vec<&str> = spec.input_names.iter().map(String::as_str).chain([spec.state()]).collect();
    let Ok(next) = spec.next_state.bind(&symbols) else {
        return false;
    };
    let names = compiled.output_names();
    let mut outputs = Vec::with_capacity(spec.required_outputs.len());
    for (name, e) in &spec.required_outputs {
        match (names.iter().position(|n| n == name), e.bind(&symbols)) {
            (Some(slot), Ok(bound)) => outputs.push((slot, bound)),
            _ => return false,
        }
    }
    let width = symbols.len();
    let mismatch = exec.find_first(1u64 << width, |i| {
        let vars: Vec<bool> = (0..width).map(|v| (i >> (width - 1 - v)) & 1 == 1).collect();
        let ins: Vec<bool> = routes.iter().map(|&r| vars[r]).collect();
        let (outs, state) = compiled.eval_positional(&ins, &vars[width - 1..]);
        state[0] != next.eval(&vars) || outputs.iter().any(|(slot, e)| outs[*slot] != e.eval(&vars))
    });
    mismatch.is_none()
}

// ---------------------------------------------------------------------------
// Enumeration core

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Src {
    Input { index: u8, inverted: bool },
    State,
    Const(bool),
    Port { gate: u8, port: u8 },
}

#[derive(Debug, Clone, Copy)]
struct Placed {
    gate: usize,
    arity: usize,
    inputs: [Src; MAX_ARITY],
}

impl Placed {
    fn inputs(&self) -> &[Src] {
        &self.inputs[..self.arity]
    }
}

/// Most required functions (next state plus named outputs) a target may
/// list.
const MAX_REQUIRED: usize = 8;

/// Small multiset of behavior masks.
#[derive(Debug, Clone, Copy)]
struct Need {
    vals: [u64; MAX_REQUIRED],
    len: usize,
}

impl Need {
    /// Takes one occurrence of `v` out; false if there is none.
    fn take(&mut self, v: u64) -> bool {
        match self.vals[..self.len].iter().position(|&x| x == v) {
            Some(i) => {
                self.len -= 1;
                self.vals[i] = self.vals[self.len];
                true
            }
            None => false,
        }
    }
}

#[derive(Debug, Clone)]
struct Partial {
    gates: Vec<Placed>,
    /// Unconsumed output ports with their behavior masks.
    free: Vec<(u8, u8, u64)>,
    used_inputs: u8,
    state_used: bool,
    lines: usize,
}

impl Partial {
    fn empty() -> Self {
        Partial { gates: vec![], free: vec![], used_inputs: 0, state_used: false, lines: 0 }
    }

    fn key(&self) -> (Vec<u64>, u8, bool, usize) {
        let mut masks: Vec<u64> = self.free.iter().map(|f| f.2).collect();
        masks.sort_unstable();
        (masks, self.used_inputs, self.state_used, self.lines)
    }
}

/// Precomputed search context.
struct Ctx<'a> {
    spec: &'a TargetSpec,
    gates: Vec<Arc<GateSpec>>,
    max_lines: usize,
    full: u64,
    /// Masks of the inputs, then the state.
    var_masks: Vec<u64>,
    /// Next state first, then the named outputs.
    required: Vec<u64>,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a TargetSpec, library: &GateLibrary, max_lines: usize) -> Result<Self, SearchError> {
        spec.check()?;
        let vars = spec.input_names.len() + 1;
        let total = 1u64 << vars;
        let full = if total == 64 { u64::MAX } else { (1u64 << total) - 1 };
        // Assignment index: state most significant, then inputs in order.
        let var_masks = (0..vars)
            .map(|v| {
                let bit = if v == vars - 1 { vars - 1 } else { vars - 2 - v };
                (0..total).filter(|i| i >> bit & 1 == 1).fold(0u64, |m, i| m | 1 << i)
            })
            .collect::<Vec<_>>();
        let symbols = spec.symbols();
        let mut required = vec![spec.next_state.bind(&symbols)?.eval_words(&var_masks, full)];
        for (_, e) in &spec.required_outputs {
            required.push(e.bind(&symbols)?.eval_words(&var_masks, full));
        }
        Ok(Ctx { spec, gates: library.iter().cloned().collect(), max_lines, full, var_masks, required })
    }

    fn src_mask(&self, p: &Partial, s: Src) -> u64 {
        match s {
            Src::Input { index, inverted } => {
                let m = self.var_masks[index as usize];
                if inverted {
                    !m & self.full
                } else {
                    m
                }
            }
            Src::State => *self.var_masks.last().expect("one state"),
            Src::Const(false) => 0,
            Src::Const(true) => self.full,
            Src::Port { gate, port } => p.free.iter().find(|f| f.0 == gate && f.1 == port).expect("free port").2,
        }
    }

    /// Calls `visit` with every way of appending library gate `g` to `p`.
    fn extend(&self, p: &Partial, g: usize, visit: &mut dyn FnMut(Partial)) {
        let arity = self.gates[g].arity();
        let mut chosen = Vec::with_capacity(arity);
        self.bind_ports(p, g, arity, &mut chosen, p.used_inputs, p.state_used, p.lines, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn bind_ports(
        &self,
        p: &Partial,
        g: usize,
        arity: usize,
        chosen: &mut Vec<Src>,
        used_inputs: u8,
        state_used: bool,
        lines: usize,
        visit: &mut dyn FnMut(Partial),
    ) {
        if chosen.len() == arity {
            visit(self.place(p, g, chosen, used_inputs, state_used, lines));
            return;
        }
        let line_ok = lines < self.max_lines;
        if line_ok {
            for i in 0..self.spec.input_names.len() as u8 {
                if used_inputs >> i & 1 == 1 {
                    continue;
                }
                for inverted in [false, true] {
                    if inverted && !self.spec.allow_complemented_inputs {
                        continue;
                    }
                    chosen.push(Src::Input { index: i, inverted });
                    self.bind_ports(p, g, arity, chosen, used_inputs | 1 << i, state_used, lines + 1, visit);
                    chosen.pop();
                }
            }
            if !state_used {
                chosen.push(Src::State);
                self.bind_ports(p, g, arity, chosen, used_inputs, true, lines + 1, visit);
                chosen.pop();
            }
            if self.spec.allow_constants {
                for v in [false, true] {
                    chosen.push(Src::Const(v));
                    self.bind_ports(p, g, arity, chosen, used_inputs, state_used, lines + 1, visit);
                    chosen.pop();
                }
            }
        }
        for &(gate, port, _) in &p.free {
            let s = Src::Port { gate, port };
            if chosen.contains(&s) {
                continue;
            }
            chosen.push(s);
            self.bind_ports(p, g, arity, chosen, used_inputs, state_used, lines, visit);
            chosen.pop();
        }
    }

    fn place(&self, p: &Partial, g: usize, inputs: &[Src], used_inputs: u8, state_used: bool, lines: usize) -> Partial {
        let in_masks: Vec<u64> = inputs.iter().map(|&s| self.src_mask(p, s)).collect();
        let out_masks = self.gates[g].eval_words(&in_masks, self.full);
        let index = p.gates.len() as u8;
        let mut free: Vec<(u8, u8, u64)> =
            p.free.iter().copied().filter(|&(gate, port, _)| !inputs.contains(&Src::Port { gate, port })).collect();
        free.extend(out_masks.into_iter().enumerate().map(|(port, m)| (index, port as u8, m)));
        let mut gates = p.gates.clone();
        let mut fixed = [Src::Const(false); MAX_ARITY];
        fixed[..inputs.len()].copy_from_slice(inputs);
        gates.push(Placed { gate: g, arity: inputs.len(), inputs: fixed });
        Partial { gates, free, used_inputs, state_used, lines }
    }

    /// First injective matching of the required functions onto free ports,
    /// as free-port indices.
    fn matching(&self, p: &Partial) -> Option<Vec<usize>> {
        if !p.state_used {
            return None;
        }
        fn go(req: &[u64], free: &[(u8, u8, u64)], taken: &mut Vec<usize>) -> bool {
            let Some(&want) = req.get(taken.len()) else {
                return true;
            };
            for (i, f) in free.iter().enumerate() {
                if f.2 == want && !taken.contains(&i) {
                    taken.push(i);
                    if go(req, free, taken) {
                        return true;
                    }
                    taken.pop();
                }
            }
            false
        }
        let mut taken = Vec::new();
        go(&self.required, &p.free, &mut taken).then_some(taken)
    }

    /// Every assignment of the feedback source and named outputs to
    /// distinct free ports, regardless of behavior.
    fn all_dispositions(&self, p: &Partial) -> Vec<Vec<usize>> {
        fn go(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..n {
                if !cur.contains(&i) {
                    cur.push(i);
                    go(n, k, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        if p.state_used {
            go(p.free.len(), self.required.len(), &mut Vec::new(), &mut out);
        }
        out
    }

    /// Required functions missing from the free ports of `p`.
    fn deficit(&self, p: &Partial) -> Need {
        let mut need = Need { vals: [0; MAX_REQUIRED], len: 0 };
        let mut pool: Vec<u64> = p.free.iter().map(|f| f.2).collect();
        for &r in &self.required {
            match pool.iter().position(|&m| m == r) {
                Some(i) => {
                    pool.swap_remove(i);
                }
                None => {
                    need.vals[need.len] = r;
                    need.len += 1;
                }
            }
        }
        need
    }

    /// First way of appending one gate to `p` that makes it realize the
    /// target, with the number of port bindings tried. Gate outputs
    /// are evaluated as soon as the ports they read are bound, and a branch
    /// is cut once the outputs still open cannot cover what is missing.
    fn probe_last(&self, p: &Partial) -> (Option<Partial>, u64) {
        let need = self.deficit(p);
        let mut nodes = 0;
        for g in 0..self.gates.len() {
            let gate = &self.gates[g];
            let arity = gate.arity();
            let mut ready = vec![Vec::new(); arity];
            for o in 0..arity {
                ready[gate.output_support_max(o).unwrap_or(0)].push(o);
            }
            let open_after: Vec<usize> = (0..arity).map(|t| ready[t + 1..].iter().map(Vec::len).sum()).collect();
            if need.len > arity {
                continue;
            }
            let mut probe = LastGate {
                ctx: self,
                p,
                g,
                arity,
                ready,
                open_after,
                chosen: [Src::Const(false); MAX_ARITY],
                in_masks: [0; MAX_ARITY],
                out_masks: [0; MAX_ARITY],
                nodes: 0,
            };
            let hit = probe.bind(0, 0, p.used_inputs, p.state_used, p.lines, need);
            nodes += probe.nodes;
            if hit.is_some() {
                return (hit, nodes);
            }
        }
        (None, nodes)
    }

    /// Turns a complete partial into a netlist. `roles[0]` is the free-port
    /// index of the feedback source, `roles[1..]` those of the named outputs.
    fn build(&self, p: &Partial, roles: &[usize]) -> Circuit {
        let spec = self.spec;
        let state = spec.state().to_string();
        let mut lines = Vec::new();
        for (i, name) in spec.input_names.iter().enumerate() {
            let used = p.gates.iter().flat_map(|g| g.inputs()).find_map(|s| match s {
                Src::Input { index, inverted } if *index as usize == i => Some(*inverted),
                _ => None,
            });
            match used {
                Some(false) => lines.push(Line::input(name.clone())),
                Some(true) => lines.push(Line::complemented_input(name.clone())),
                None => {}
            }
        }
        let mut consts = 0;
        let mut target = None;
        let mut gates: Vec<GateInstance> = p
            .gates
            .iter()
            .map(|pl| GateInstance {
                gate: self.gates[pl.gate].clone(),
                inputs: vec![],
                outputs: vec![Some(Disposition::Garbage); self.gates[pl.gate].arity()],
            })
            .collect();
        for (gi, pl) in p.gates.iter().enumerate() {
            for (port, s) in pl.inputs().iter().enumerate() {
                let here = PortRef::new(gi, port);
                let d = match *s {
                    Src::Input { index, .. } => Driver::Line(spec.input_names[index as usize].clone()),
                    Src::State => {
                        target = Some(here);
                        Driver::Feedback(state.clone())
                    }
                    Src::Const(v) => {
                        consts += 1;
                        let id = format!("{}{consts}", if v { "one" } else { "zero" });
                        lines.push(if v { Line::one(id.clone()) } else { Line::zero(id.clone()) });
                        Driver::Line(id)
                    }
                    Src::Port { gate, port: sp } => {
                        gates[gate as usize].outputs[sp as usize] = Some(Disposition::Consumed(here));
                        Driver::Gate(PortRef::new(gate as usize, sp as usize))
                    }
                };
                gates[gi].inputs.push(d);
            }
        }
        let port_of = |i: usize| PortRef::new(p.free[i].0 as usize, p.free[i].1 as usize);
        let source = port_of(roles[0]);
        gates[source.gate].outputs[source.port] = Some(Disposition::Feedback(state.clone()));
        for ((name, _), &i) in spec.required_outputs.iter().zip(&roles[1..]) {
            let at = port_of(i);
            gates[at.gate].outputs[at.port] = Some(Disposition::Primary(name.clone()));
        }
        Circuit { lines, gates, feedbacks: vec![FeedbackArc { source, target: target.expect("state used"), state }] }
    }
}

/// Depth-first binding of the final gate's ports.
struct LastGate<'c> {
    ctx: &'c Ctx<'c>,
    p: &'c Partial,
    g: usize,
    arity: usize,
    /// Outputs fully determined once port `t` is bound.
    ready: Vec<Vec<usize>>,
    /// Outputs still undetermined after port `t` is bound.
    open_after: Vec<usize>,
    chosen: [Src; MAX_ARITY],
    in_masks: [u64; MAX_ARITY],
    out_masks: [u64; MAX_ARITY],
    /// Port bindings tried, complete or not.
    nodes: u64,
}

impl LastGate<'_> {
    fn bind(
        &mut self,
        t: usize,
        consumed: u32,
        used_inputs: u8,
        state_used: bool,
        lines: usize,
        need: Need,
    ) -> Option<Partial> {
        if t == self.arity {
            return self.leaf(consumed, used_inputs, state_used, lines);
        }
        let ctx = self.ctx;
        let spec = ctx.spec;
        let line_ok = lines < ctx.max_lines;
        if line_ok {
            for i in 0..spec.input_names.len() as u8 {
                if used_inputs >> i & 1 == 1 {
                    continue;
                }
                for inverted in [false, true] {
                    if inverted && !spec.allow_complemented_inputs {
                        continue;
                    }
                    let s = Src::Input { index: i, inverted };
                    if let Some(hit) = self.try_src(t, s, consumed, used_inputs | 1 << i, state_used, lines + 1, need) {
                        return Some(hit);
                    }
                }
            }
            if !state_used {
                if let Some(hit) = self.try_src(t, Src::State, consumed, used_inputs, true, lines + 1, need) {
                    return Some(hit);
                }
            }
            if spec.allow_constants {
                for v in [false, true] {
                    if let Some(hit) =
                        self.try_src(t, Src::Const(v), consumed, used_inputs, state_used, lines + 1, need)
                    {
                        return Some(hit);
                    }
                }
            }
        }
        for idx in 0..self.p.free.len() {
            if consumed >> idx & 1 == 1 {
                continue;
            }
            let (gate, port, _) = self.p.free[idx];
            let s = Src::Port { gate, port };
            if let Some(hit) = self.try_src(t, s, consumed | 1 << idx, used_inputs, state_used, lines, need) {
                return Some(hit);
            }
        }
        None
    }

    #[allow(clippy::too_many_arguments)]
    fn try_src(
        &mut self,
        t: usize,
        s: Src,
        consumed: u32,
        used_inputs: u8,
        state_used: bool,
        lines: usize,
        mut need: Need,
    ) -> Option<Partial> {
        self.nodes += 1;
        self.chosen[t] = s;
        self.in_masks[t] = self.ctx.src_mask(self.p, s);
        let gate = &self.ctx.gates[self.g];
        for &o in &self.ready[t] {
            let v = gate.eval_output_words(o, &self.in_masks[..self.arity], self.ctx.full);
            self.out_masks[o] = v;
            need.take(v);
        }
        if need.len > self.open_after[t] {
            return None;
        }
        self.bind(t + 1, consumed, used_inputs, state_used, lines, need)
    }

    fn leaf(&mut self, consumed: u32, used_inputs: u8, state_used: bool, lines: usize) -> Option<Partial> {
        if !state_used {
            return None;
        }
        let mut pool: Vec<u64> = self
            .p
            .free
            .iter()
            .enumerate()
            .filter(|(i, _)| consumed >> i & 1 == 0)
            .map(|(_, f)| f.2)
            .chain(self.out_masks[..self.arity].iter().copied())
            .collect();
        for r in &self.ctx.required {
            let i = pool.iter().position(|m| m == r)?;
            pool.swap_remove(i);
        }
        Some(self.ctx.place(self.p, self.g, &self.chosen[..self.arity], used_inputs, state_used, lines))
    }
}

/// Visits every fan-out-free candidate up to `bounds`, without behavioral
/// deduplication: the empty circuit, then for each gate count every gate
/// sequence, port binding and disposition of the free ports. Stops early
/// when `visit` returns false.
pub fn for_each_candidate(
    spec: &TargetSpec,
    library: &GateLibrary,
    bounds: SearchBounds,
    capacity: SearchBounds,
    visit: &mut dyn FnMut(Circuit) -> bool,
) -> Result<(), SearchError> {
    bounds.check(capacity)?;
    let ctx = Ctx::new(spec, library, bounds.max_lines)?;
    if !visit(Circuit::default()) {
        return Ok(());
    }
    fn grow(ctx: &Ctx, p: &Partial, left: usize, visit: &mut dyn FnMut(Circuit) -> bool) -> bool {
        for g in 0..ctx.gates.len() {
            let mut children = Vec::new();
            ctx.extend(p, g, &mut |c| children.push(c));
            for child in children {
                for roles in ctx.all_dispositions(&child) {
                    if !visit(ctx.build(&child, &roles)) {
                        return false;
                    }
                }
                if left > 1 && !grow(ctx, &child, left - 1, visit) {
                    return false;
                }
            }
        }
        true
    }
    if bounds.max_gates > 0 {
        grow(&ctx, &Partial::empty(), bounds.max_gates, visit);
    }
    Ok(())
}

/// Collects [`for_each_candidate`] with the default capacity.
pub fn enumerate_candidates(
    spec: &TargetSpec,
    library: &GateLibrary,
    bounds: SearchBounds,
) -> Result<Vec<Circuit>, SearchError> {
    let mut out = Vec::new();
    for_each_candidate(spec, library, bounds, SearchBounds::default(), &mut |c| {
        out.push(c);
        true
    })?;
    Ok(out)
}

/// Smallest gate count within `bounds` realizing `spec`.
pub fn min_gates(spec: &TargetSpec, library: &GateLibrary, bounds: SearchBounds) -> Result<SearchResult, SearchError> {
    min_gates_with(Exec::default(), spec, library, bounds, SearchBounds::default())
}

pub fn min_gates_with(
    exec: Exec,
    spec: &TargetSpec,
    library: &GateLibrary,
    bounds: SearchBounds,
    capacity: SearchBounds,
) -> Result<SearchResult, SearchError> {
    bounds.check(capacity)?;
    let start = Instant::now();
    let ctx = Ctx::new(spec, library, bounds.max_lines)?;
    let mut level = vec![Partial::empty()];
    let mut per_level = vec![1u64];
    let mut found = ctx.matching(&level[0]).map(|roles| (0, ctx.build(&level[0], &roles)));
    for k in 1..=bounds.max_gates {
        if found.is_some() {
            break;
        }
        if k < bounds.max_gates {
            let (next, examined) = expand(exec, &ctx, &level);
            per_level.push(examined);
            level = next;
            if let Some(i) = exec.find_first(level.len() as u64, |i| ctx.matching(&level[i as usize]).is_some()) {
                let p = &level[i as usize];
                found = Some((k, ctx.build(p, &ctx.matching(p).expect("matched above"))));
            }
        } else {
            // The last gate is probed, not stored. Parents missing the
            // fewest required functions go first.
            let mut order: Vec<usize> = (0..level.len()).collect();
            let deficits: Vec<usize> = level.iter().map(|p| ctx.deficit(p).len).collect();
            order.sort_by_key(|&i| deficits[i]);
            let mut examined = 0;
            'blocks: for block in order.chunks(PROBE_BLOCK) {
                let results = exec.map(block, |&i| ctx.probe_last(&level[i]));
                for (hit, nodes) in results {
                    examined += nodes;
                    if let Some(child) = hit {
                        let roles = ctx.matching(&child).expect("probe checked the matching");
                        found = Some((k, ctx.build(&child, &roles)));
                        break 'blocks;
                    }
                }
            }
            per_level.push(examined);
        }
        if level.is_empty() {
            break;
        }
    }
    let (verdict, min_gates, witness) = match found {
        Some((k, c)) => {
            debug_assert!(realizes_with(exec, &c, spec));
            (SearchVerdict::Found, Some(k), Some(c))
        }
        None => (SearchVerdict::Exhausted, None, None),
    };
    Ok(SearchResult {
        spec: spec.clone(),
        library: library.names().into_iter().map(String::from).collect(),
        bounds,
        verdict,
        min_gates,
        witness,
        explored: per_level.iter().sum(),
        explored_per_level: per_level,
        wall_time: start.elapsed(),
    })
}

const EXPAND_BLOCK: usize = 64;
const PROBE_BLOCK: usize = 256;

/// All one-gate extensions of `level`, keeping the first partial for each
/// key, with the number of extensions generated.
fn expand(exec: Exec, ctx: &Ctx, level: &[Partial]) -> (Vec<Partial>, u64) {
    let mut next = Vec::new();
    let mut seen = HashSet::new();
    let mut examined = 0u64;
    for block in level.chunks(EXPAND_BLOCK) {
        let children = exec.map(block, |p| {
            let mut local = HashSet::new();
            let mut out = Vec::new();
            let mut count = 0u64;
            for g in 0..ctx.gates.len() {
                ctx.extend(p, g, &mut |c| {
                    count += 1;
                    if local.insert(c.key()) {
                        out.push(c);
                    }
                });
            }
            (out, count)
        });
        for (kids, count) in children {
            examined += count;
            next.extend(kids.into_iter().filter(|c| seen.insert(c.key())));
        }
    }
    (next, examined)
}

// SPDX-License-Identifier: Apache-2.0

//! Reversible gate library.
//!
//! A [`GateSpec`] is a k×k gate described by one boolean expression per
//! output over the input symbols `A`..`H`. The induced map on `{0,1}^k` is
//! tabulated at construction and rejected unless it is a bijection.
//!
//! Bit order everywhere: input `A` is the most significant bit of a row
//! index, output 1 is the most significant bit of a row value.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

use crate::bits::BitVector;
use crate::expr::{BoundExpr, Expr, ExprError};
use crate::metrics::HwTriple;

/// Largest supported gate arity (tables of 256 rows).
pub const MAX_ARITY: usize = 8;

/// Input symbols, in port order.
pub const GATE_SYMBOLS: [&str; MAX_ARITY] = ["A", "B", "C", "D", "E", "F", "G", "H"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GateError {
    #[error("gate {gate}: expected {expected} input bits, got {got}")]
    InputShape { gate: String, expected: usize, got: usize },
    #[error("arity {arity} exceeds the supported maximum of {max}")]
    Capacity { arity: usize, max: usize },
    #[error("gate {gate} is not invertible: inputs {first} and {second} map to the same output")]
    NotInvertible { gate: String, first: usize, second: usize },
    #[error("gate {gate}: {message}")]
    Definition { gate: String, message: String },
    #[error("gate {gate} has no port {port}")]
    PortOutOfRange { gate: String, port: usize },
    #[error("gate {gate}: {source}")]
    Expr { gate: String, source: ExprError },
    #[error("gate {0} is already defined")]
    Duplicate(String),
}

/// Definition of a k×k reversible gate.
#[derive(Debug, Clone)]
pub struct GateSpec {
    name: String,
    arity: usize,
    outputs: Vec<Expr>,
    compiled: Vec<BoundExpr>,
    table: Vec<u32>,
    complexity: HwTriple,
}

impl PartialEq for GateSpec {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.arity == other.arity && self.outputs == other.outputs
    }
}

impl Eq for GateSpec {}

impl GateSpec {
    /// Builds a gate, checking the expression shapes and that the induced
    /// map is a bijection.
    pub fn new(name: impl Into<String>, arity: usize, outputs: Vec<Expr>) -> Result<Self, GateError> {
        let name = name.into();
        let def_err = |message: String| GateError::Definition { gate: name.clone(), message };
        if arity == 0 {
            return Err(def_err("arity must be positive".into()));
        }
        if arity > MAX_ARITY {
            return Err(GateError::Capacity { arity, max: MAX_ARITY });
        }
        if outputs.len() != arity {
            return Err(def_err(format!("{} output expressions for arity {arity}", outputs.len())));
        }
        let symbols = &GATE_SYMBOLS[..arity];
        let mut compiled = Vec::with_capacity(arity);
        let mut complexity = HwTriple::ZERO;
        for e in &outputs {
            let counts = e.op_counts();
            if counts.or > 0 {
                return Err(def_err(format!("OR is not allowed in gate outputs (`{e}`)")));
            }
            complexity = complexity + HwTriple::new(counts.xor, counts.and, counts.not);
            compiled.push(e.bind(symbols).map_err(|source| GateError::Expr { gate: name.clone(), source })?);
        }
        let table = (0..1u32 << arity)
            .map(|row| {
                let vars: Vec<bool> = (0..arity).map(|i| (row >> (arity - 1 - i)) & 1 == 1).collect();
                compiled.iter().fold(0u32, |acc, e| (acc << 1) | u32::from(e.eval(&vars)))
            })
            .collect::<Vec<_>>();
        let spec = GateSpec { name, arity, outputs, compiled, table, complexity };
        if let Bijectivity::Collision { first, second } = check_bijective(&spec.table_unchecked()) {
            return Err(GateError::NotInvertible { gate: spec.name, first, second });
        }
        Ok(spec)
    }

    /// Convenience constructor from expression strings.
    pub fn parse(name: impl Into<String>, arity: usize, outputs: &[&str]) -> Result<Self, GateError> {
        let name = name.into();
        let exprs = outputs
            .iter()
            .map(|s| s.parse::<Expr>().map_err(|source| GateError::Expr { gate: name.clone(), source }))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(name, arity, exprs)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn outputs(&self) -> &[Expr] {
        &self.outputs
    }

    /// Per-gate (α, β, δ) contribution: unshared operation counts of every
    /// output expression.
    pub fn complexity(&self) -> HwTriple {
        self.complexity
    }

    /// Table lookup for an input pattern packed MSB-first.
    pub fn eval_packed(&self, input: u32) -> u32 {
        self.table[input as usize]
    }

    pub fn eval(&self, input: BitVector) -> Result<BitVector, GateError> {
        if input.len() != self.arity {
            return Err(GateError::InputShape { gate: self.name.clone(), expected: self.arity, got: input.len() });
        }
        Ok(BitVector::new(self.eval_packed(input.value()), self.arity))
    }

    /// Bit-parallel evaluation over up to 64 assignments at once.
    pub fn eval_words(&self, inputs: &[u64], full: u64) -> Vec<u64> {
        debug_assert_eq!(inputs.len(), self.arity);
        self.compiled.iter().map(|e| e.eval_words(inputs, full)).collect()
    }

    /// Bit-parallel evaluation of one output. Inputs past the output's
    /// highest referenced port are not read.
    pub fn eval_output_words(&self, port: usize, inputs: &[u64], full: u64) -> u64 {
        self.compiled[port].eval_words(inputs, full)
    }

    /// Highest input port output `port` reads; `None` for a constant.
    pub fn output_support_max(&self, port: usize) -> Option<usize> {
        self.compiled[port].max_var()
    }

    /// Input port copied unchanged to output `port`, if it is a plain wire.
    pub fn output_passthrough(&self, port: usize) -> Option<usize> {
        match self.compiled[port] {
            BoundExpr::Var(i) => Some(i),
            _ => None,
        }
    }

    fn table_unchecked(&self) -> TruthTable {
        TruthTable { arity: self.arity, rows: self.table.clone() }
    }
}

impl fmt::Display for GateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({}x{}):", self.name, self.arity, self.arity)?;
        for (i, e) in self.outputs.iter().enumerate() {
            write!(f, " o{}={}", i + 1, e)?;
        }
        Ok(())
    }
}

/// Outputs of a k-bit function for every input pattern, indexed with
/// input `A` as the most significant bit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TruthTable {
    arity: usize,
    rows: Vec<u32>,
}

impl TruthTable {
    pub fn from_rows(arity: usize, rows: &[BitVector]) -> Result<Self, GateError> {
        if arity > MAX_ARITY {
            return Err(GateError::Capacity { arity, max: MAX_ARITY });
        }
        let shape = |message: String| GateError::Definition { gate: "table".into(), message };
        if rows.len() != 1 << arity {
            return Err(shape(format!("{} rows for arity {arity}", rows.len())));
        }
        if let Some(r) = rows.iter().find(|r| r.len() != arity) {
            return Err(shape(format!("row `{r}` has the wrong width")));
        }
        Ok(TruthTable { arity, rows: rows.iter().map(|r| r.value()).collect() })
    }

    pub fn identity(arity: usize) -> Self {
        TruthTable { arity, rows: (0..1u32 << arity).collect() }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, input: usize) -> BitVector {
        BitVector::new(self.rows[input], self.arity)
    }

    pub fn rows(&self) -> impl Iterator<Item = BitVector> + '_ {
        self.rows.iter().map(|&r| BitVector::new(r, self.arity))
    }

    /// Table of `then ∘ self`: apply `self` first, then `then`.
    pub fn compose(&self, then: &TruthTable) -> Result<TruthTable, GateError> {
        if self.arity != then.arity {
            return Err(GateError::InputShape { gate: "table".into(), expected: self.arity, got: then.arity });
        }
        Ok(TruthTable { arity: self.arity, rows: self.rows.iter().map(|&r| then.rows[r as usize]).collect() })
    }

    pub fn is_identity(&self) -> bool {
        self.rows.iter().enumerate().all(|(i, &r)| r as usize == i)
    }
}

/// Outcome of a bijectivity check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bijectivity {
    Bijective,
    /// Two input indices that map to the same output; `first < second`.
    Collision {
        first: usize,
        second: usize,
    },
}

impl Bijectivity {
    pub fn is_bijective(self) -> bool {
        self == Bijectivity::Bijective
    }
}

pub fn truth_table(gate: &GateSpec) -> Result<TruthTable, GateError> {
    truth_table_capped(gate, MAX_ARITY)
}

/// Like [`truth_table`] with an explicit arity ceiling.
pub fn truth_table_capped(gate: &GateSpec, max_arity: usize) -> Result<TruthTable, GateError> {
    if gate.arity > max_arity {
        return Err(GateError::Capacity { arity: gate.arity, max: max_arity });
    }
    Ok(gate.table_unchecked())
}

pub fn check_bijective(table: &TruthTable) -> Bijectivity {
    let mut seen: Vec<Option<usize>> = vec![None; 1 << table.arity];
    for (i, &r) in table.rows.iter().enumerate() {
        match seen[r as usize] {
            Some(first) => return Bijectivity::Collision { first, second: i },
            None => seen[r as usize] = Some(i),
        }
    }
    Bijectivity::Bijective
}

pub fn inverse_gate(gate: &GateSpec) -> Result<TruthTable, GateError> {
    inverse_table(&truth_table(gate)?).map_err(|e| match e {
        GateError::NotInvertible { first, second, .. } => {
            GateError::NotInvertible { gate: gate.name.clone(), first, second }
        }
        other => other,
    })
}

pub fn inverse_table(table: &TruthTable) -> Result<TruthTable, GateError> {
    if let Bijectivity::Collision { first, second } = check_bijective(table) {
        return Err(GateError::NotInvertible { gate: "table".into(), first, second });
    }
    let mut rows = vec![0u32; table.rows.len()];
    for (i, &r) in table.rows.iter().enumerate() {
        rows[r as usize] = i as u32;
    }
    Ok(TruthTable { arity: table.arity, rows })
}

/// One row of a NAND-universality check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NandRow {
    pub a: bool,
    pub b: bool,
    pub output: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NandVerdict {
    pub holds: bool,
    /// 0-based index of the output port that was checked.
    pub output_port: usize,
    pub rows: Vec<NandRow>,
}

/// Fixes the ports in `const_bindings` (0-based) and checks that the last
/// output equals NAND of the two remaining free inputs, in port order.
pub fn check_nand_universality(
    gate: &GateSpec,
    const_bindings: &BTreeMap<usize, bool>,
) -> Result<NandVerdict, GateError> {
    if let Some(&port) = const_bindings.keys().find(|&&p| p >= gate.arity) {
        return Err(GateError::PortOutOfRange { gate: gate.name.clone(), port });
    }
    let free: Vec<usize> = (0..gate.arity).filter(|p| !const_bindings.contains_key(p)).collect();
    if free.len() != 2 {
        return Err(GateError::Definition {
            gate: gate.name.clone(),
            message: format!("NAND check needs exactly two free inputs, found {}", free.len()),
        });
    }
    let output_port = gate.arity - 1;
    let rows: Vec<NandRow> = [(false, false), (false, true), (true, false), (true, true)]
        .into_iter()
        .map(|(a, b)| {
            let mut bits = vec![false; gate.arity];
            for (&p, &v) in const_bindings {
                bits[p] = v;
            }
            bits[free[0]] = a;
            bits[free[1]] = b;
            let out = gate.eval_packed(BitVector::from_bools(&bits).value());
            NandRow { a, b, output: BitVector::new(out, gate.arity).get(output_port) }
        })
        .collect();
    let holds = rows.iter().all(|r| r.output == !(r.a && r.b));
    Ok(NandVerdict { holds, output_port, rows })
}

macro_rules! builtin {
    ($fn_name:ident, $name:literal, $arity:literal, [$($out:literal),+ $(,)?]) => {
        pub fn $fn_name() -> Arc<GateSpec> {
            static CELL: OnceLock<Arc<GateSpec>> = OnceLock::new();
            CELL.get_or_init(|| {
                Arc::new(GateSpec::parse($name, $arity, &[$($out),+]).expect("built-in gate is reversible"))
            })
            .clone()
        }
    };
}

builtin!(not_gate, "NOT", 1, ["!A"]);
// Feynman / CNOT
builtin!(feynman, "FG", 2, ["A", "A ^ B"]);
builtin!(toffoli, "TG", 3, ["A", "B", "A*B ^ C"]);
builtin!(fredkin, "FRG", 3, ["A", "!A*B ^ A*C", "!A*C ^ A*B"]);
builtin!(peres, "PG", 3, ["A", "A ^ B", "A*B ^ C"]);
builtin!(sayem, "SG", 4, ["A", "!A*B ^ A*C", "!A*B ^ A*C ^ D", "A*B ^ !A*C ^ D"]);

/// A named set of gates.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GateLibrary {
    gates: Vec<Arc<GateSpec>>,
}

impl GateLibrary {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Every built-in gate: NOT, FG, TG, FRG, PG, SG.
    pub fn builtin() -> Self {
        GateLibrary { gates: vec![not_gate(), feynman(), toffoli(), fredkin(), peres(), sayem()] }
    }

    /// The five-gate synthesis library {FG, TG, FRG, PG, SG}.
    pub fn standard() -> Self {
        GateLibrary { gates: vec![feynman(), toffoli(), fredkin(), peres(), sayem()] }
    }

    /// Case-insensitive lookup.
    pub fn get(&self, name: &str) -> Option<Arc<GateSpec>> {
        self.gates.iter().find(|g| g.name.eq_ignore_ascii_case(name)).cloned()
    }

    pub fn insert(&mut self, gate: Arc<GateSpec>) -> Result<(), GateError> {
        if self.get(&gate.name).is_some() {
            return Err(GateError::Duplicate(gate.name.clone()));
        }
        self.gates.push(gate);
        Ok(())
    }

    /// Builds a library from names resolved against the built-ins.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self, String> {
        let all = Self::builtin();
        let mut lib = Self::empty();
        for n in names {
            let g = all.get(n.as_ref()).ok_or_else(|| format!("unknown gate `{}`", n.as_ref()))?;
            lib.insert(g).map_err(|e| e.to_string())?;
        }
        Ok(lib)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<GateSpec>> {
        self.gates.iter()
    }

    pub fn names(&self) -> Vec<&str> {
        self.gates.iter().map(|g| g.name()).collect()
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }
}

/// True if `gate` is one of the built-in gates (by full definition).
pub fn is_builtin(gate: &GateSpec) -> bool {
    GateLibrary::builtin().iter().any(|g| **g == *gate)
}

// SPDX-License-Identifier: Apache-2.0

//! Cost metrics for reversible circuits.
//!
//! * gate count: number of instances;
//! * garbage: output ports marked garbage (feedback sources are not garbage);
//! * constant inputs: constant lines feeding a gate;
//! * delay: most gates on any path from a boundary input (line or feedback
//!   target) to a primary output, ignoring feedback arcs;
//! * hardware complexity: (α, β, δ) = (two-input XOR, two-input AND, NOT)
//!   operation counts.

use std::fmt;
use std::ops::{Add, Sub};

use serde::Serialize;

use crate::gate::feynman;
use crate::netlist::{Circuit, Disposition, Driver, LineRole};

/// Hardware-complexity triple.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize)]
pub struct HwTriple {
    /// α: two-input XOR operations.
    pub xor: u32,
    /// β: two-input AND operations.
    pub and: u32,
    /// δ: NOT operations.
    pub not: u32,
}

impl HwTriple {
    pub const ZERO: HwTriple = HwTriple { xor: 0, and: 0, not: 0 };

    pub const fn new(xor: u32, and: u32, not: u32) -> Self {
        HwTriple { xor, and, not }
    }

    /// Component-wise difference, if `other` fits inside `self`.
    pub fn checked_sub(self, other: HwTriple) -> Option<HwTriple> {
        Some(HwTriple {
            xor: self.xor.checked_sub(other.xor)?,
            and: self.and.checked_sub(other.and)?,
            not: self.not.checked_sub(other.not)?,
        })
    }
}

impl Add for HwTriple {
    type Output = HwTriple;

    fn add(self, o: HwTriple) -> HwTriple {
        HwTriple::new(self.xor + o.xor, self.and + o.and, self.not + o.not)
    }
}

impl Sub for HwTriple {
    type Output = HwTriple;

    fn sub(self, o: HwTriple) -> HwTriple {
        self.checked_sub(o).expect("hardware complexity underflow")
    }
}

impl std::iter::Sum for HwTriple {
    fn sum<I: Iterator<Item = HwTriple>>(iter: I) -> HwTriple {
        iter.fold(HwTriple::ZERO, Add::add)
    }
}

impl fmt::Display for HwTriple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}α+{}β+{}δ", self.xor, self.and, self.not)
    }
}

/// Pricing convention for [`hw_complexity`].
///
/// Both conventions charge the same items: per-gate expression counts, an
/// FG by how its second input is bound, and 1δ per complemented input line.
/// `Paper` additionally asks reports to annotate known gaps between the
/// computed and the published triples.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub enum Convention {
    Strict,
    #[default]
    Paper,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Strict => "strict",
            Convention::Paper => "paper",
        }
    }
}

impl std::str::FromStr for Convention {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(Convention::Strict),
            "paper" => Ok(Convention::Paper),
            other => Err(format!("unknown convention `{other}` (expected strict or paper)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CostReport {
    pub gate_count: usize,
    pub garbage_count: usize,
    pub constant_inputs: usize,
    pub delay: usize,
    pub hw_complexity: HwTriple,
    pub hw_breakdown: Vec<HwItem>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HwItem {
    pub source: String,
    pub cost: HwTriple,
}

pub fn gate_count(circuit: &Circuit) -> usize {
    circuit.gates.len()
}

pub fn garbage_count(circuit: &Circuit) -> usize {
    circuit.output_ports().filter(|(_, d)| matches!(d, Some(Disposition::Garbage))).count()
}

/// Gate input ports driven by a constant line.
pub fn constant_inputs(circuit: &Circuit) -> usize {
    circuit
        .input_ports()
        .filter(|(_, d)| match d {
            Driver::Line(id) => circuit.line(id).is_some_and(|l| l.role.is_constant()),
            _ => false,
        })
        .count()
}

/// Longest gate path ending at each gate, counting the gate itself.
/// Feedback-driven and line-driven ports start paths.
pub fn gate_depths(circuit: &Circuit) -> Vec<usize> {
    let mut depth = vec![0usize; circuit.gates.len()];
    for (g, inst) in circuit.gates.iter().enumerate() {
        let upstream = inst
            .inputs
            .iter()
            .filter_map(|d| match d {
                Driver::Gate(p) if p.gate < g => Some(depth[p.gate]),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        depth[g] = upstream + 1;
    }
    depth
}

pub fn delay(circuit: &Circuit) -> usize {
    let depth = gate_depths(circuit);
    circuit.primary_outputs().iter().map(|(_, p)| depth[p.gate]).max().unwrap_or(0)
}

/// Itemized hardware complexity.
pub fn hw_breakdown(circuit: &Circuit) -> Vec<HwItem> {
    let fg = feynman();
    let mut items = Vec::new();
    for (g, inst) in circuit.gates.iter().enumerate() {
        let (cost, usage) = if *inst.gate == *fg {
            let role = match &inst.inputs[1] {
                Driver::Line(id) => circuit.line(id).map(|l| l.role),
                _ => None,
            };
            match role {
                Some(LineRole::ConstantZero) => (HwTriple::ZERO, " as copy"),
                Some(LineRole::ConstantOne) => (HwTriple::new(0, 0, 1), " as inverter"),
                _ => (inst.gate.complexity(), ""),
            }
        } else {
            (inst.gate.complexity(), "")
        };
        items.push(HwItem { source: format!("{}#{g}{usage}", inst.gate.name()), cost });
    }
    for line in circuit.lines.iter().filter(|l| l.complemented) {
        items.push(HwItem { source: format!("complemented input {}", line.id), cost: HwTriple::new(0, 0, 1) });
    }
    items
}

pub fn hw_complexity(circuit: &Circuit, _convention: Convention) -> HwTriple {
    hw_breakdown(circuit).iter().map(|i| i.cost).sum()
}

pub fn cost_report(circuit: &Circuit, convention: Convention) -> CostReport {
    CostReport {
        gate_count: gate_count(circuit),
        garbage_count: garbage_count(circuit),
        constant_inputs: constant_inputs(circuit),
        delay: delay(circuit),
        hw_complexity: hw_complexity(circuit, convention),
        hw_breakdown: hw_breakdown(circuit),
    }
}

impl fmt::Display for CostReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "gates            {}", self.gate_count)?;
        writeln!(f, "garbage outputs  {}", self.garbage_count)?;
        writeln!(f, "constant inputs  {}", self.constant_inputs)?;
        writeln!(f, "delay            {}", self.delay)?;
        write!(f, "hw complexity    {}", self.hw_complexity)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::{sayem, toffoli};
    use crate::netlist::{d_latch_q, d_latch_qq, jk_latch_q, jk_latch_qq, GateInstance, Line};

    fn single_fg(p_garbage: bool) -> Circuit {
        Circuit {
            lines: vec![Line::input("A"), Line::input("B")],
            gates: vec![GateInstance {
                gate: feynman(),
                inputs: vec![Driver::Line("A".into()), Driver::Line("B".into())],
                outputs: vec![
                    Some(if p_garbage { Disposition::Garbage } else { Disposition::Primary("P".into()) }),
                    Some(Disposition::Primary("X".into())),
                ],
            }],
            feedbacks: vec![],
        }
    }

    #[test]
    fn counts() {
        assert_eq!(gate_count(&d_latch_q()), 1);
        assert_eq!(gate_count(&jk_latch_qq()), 3);
        assert_eq!(gate_count(&Circuit::default()), 0);
        assert_eq!(garbage_count(&d_latch_q()), 2);
        assert_eq!(garbage_count(&jk_latch_q()), 3);
        assert_eq!(garbage_count(&single_fg(false)), 0);
        assert_eq!(garbage_count(&single_fg(true)), 1);
        assert_eq!(constant_inputs(&d_latch_qq()), 2);
    }

    #[test]
    fn delays() {
        assert_eq!(delay(&single_fg(false)), 1);
        assert_eq!(delay(&d_latch_qq()), 2);
        assert_eq!(delay(&jk_latch_qq()), 3);
        assert_eq!(delay(&Circuit::default()), 0);
        let parallel = Circuit {
            lines: ["a", "b", "c", "d", "e", "f", "g"].into_iter().map(Line::input).collect(),
            gates: vec![
                GateInstance {
                    gate: toffoli(),
                    inputs: ["a", "b", "c"].iter().map(|s| Driver::Line(s.to_string())).collect(),
                    outputs: vec![
                        Some(Disposition::Garbage),
                        Some(Disposition::Garbage),
                        Some(Disposition::Primary("x".into())),
                    ],
                },
                GateInstance {
                    gate: sayem(),
                    inputs: ["d", "e", "f", "g"].iter().map(|s| Driver::Line(s.to_string())).collect(),
                    outputs: vec![
                        Some(Disposition::Garbage),
                        Some(Disposition::Primary("y".into())),
                        Some(Disposition::Garbage),
                        Some(Disposition::Garbage),
                    ],
                },
            ],
            feedbacks: vec![],
        };
        assert_eq!(delay(&parallel), 1);
    }

    #[test]
    fn hardware_complexity() {
        assert_eq!(hw_complexity(&jk_latch_qq(), Convention::Paper), HwTriple::new(7, 10, 7));
        assert_eq!(hw_complexity(&d_latch_qq(), Convention::Paper), HwTriple::new(5, 6, 4));
        assert_eq!(hw_complexity(&d_latch_qq(), Convention::Strict), HwTriple::new(5, 6, 4));
        assert_eq!(hw_complexity(&Circuit::default(), Convention::Strict), HwTriple::ZERO);
        assert_eq!(hw_complexity(&single_fg(false), Convention::Strict), HwTriple::new(1, 0, 0));
        assert_eq!(HwTriple::new(7, 10, 7).to_string(), "7α+10β+7δ");
    }
}

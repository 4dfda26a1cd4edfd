// SPDX-License-Identifier: Apache-2.0

//! Reversible gates, latch netlists built from them, exhaustive simulation,
//! cost metrics and bounded exhaustive synthesis.

pub mod bits;
pub mod exec;
pub mod expr;
pub mod gate;
pub mod metrics;
pub mod netlist;
pub mod reference;
pub mod report;
pub mod search;
pub mod simulator;

pub use bits::BitVector;
pub use exec::Exec;
pub use expr::Expr;
pub use gate::{GateLibrary, GateSpec, TruthTable};
pub use metrics::{Convention, CostReport, HwTriple};
pub use netlist::{validate, Circuit};
pub use search::{SearchBounds, SearchResult, TargetSpec};

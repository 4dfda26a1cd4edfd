// SPDX-License-Identifier: Apache-2.0

//! Reference latch netlists.
//!
//! Wiring summary (ports 1-based here, 0-based in code):
//!
//! * D-latch, Q only: one SG with inputs (E, Q, D, 0). Output 2 is the
//!   primary `Q`, output 3 feeds back as state `Q`, outputs 1 and 4 are
//!   garbage. With input 4 tied to 0, outputs 2 and 3 both equal DE + E'Q.
//! * D-latch, Q and complement: as above, with SG output 2 routed into an
//!   FG whose second input is tied to 1, giving `Q` and `Qbar`.
//! * JK-latch, Q only: an FRG with inputs (Q, J, K') computes JQ' + K'Q on
//!   output 2 and passes Q through on output 1; both feed the SG that
//!   realizes the gated D stage. K' enters as a complemented input line.
//! * JK-latch, Q and complement: adds the same FG inverter stage.

use super::{Circuit, Disposition, Driver, FeedbackArc, GateInstance, Line, PortRef};
use crate::gate::{feynman, fredkin, sayem};

pub const BUILTIN_NAMES: [&str; 4] = ["d-latch-q", "d-latch-qq", "jk-latch-q", "jk-latch-qq"];

fn line(id: &str) -> Driver {
    Driver::Line(id.to_string())
}

fn out(gate: usize, port: usize) -> Driver {
    Driver::Gate(PortRef::new(gate, port))
}

fn to(gate: usize, port: usize) -> Option<Disposition> {
    Some(Disposition::Consumed(PortRef::new(gate, port)))
}

fn primary(name: &str) -> Option<Disposition> {
    Some(Disposition::Primary(name.to_string()))
}

fn feedback() -> Option<Disposition> {
    Some(Disposition::Feedback("Q".to_string()))
}

const GARBAGE: Option<Disposition> = Some(Disposition::Garbage);

fn inverter_stage(mut c: Circuit, sg: usize) -> Circuit {
    let fg = c.gates.len();
    c.lines.push(Line::one("one"));
    c.gates[sg].outputs[1] = to(fg, 0);
    c.gates.push(GateInstance {
        gate: feynman(),
        inputs: vec![out(sg, 1), line("one")],
        outputs: vec![primary("Q"), primary("Qbar")],
    });
    c
}

pub fn d_latch_q() -> Circuit {
    Circuit {
        lines: vec![Line::input("E"), Line::input("D"), Line::zero("zero")],
        gates: vec![GateInstance {
            gate: sayem(),
            inputs: vec![line("E"), Driver::Feedback("Q".into()), line("D"), line("zero")],
            outputs: vec![GARBAGE, primary("Q"), feedback(), GARBAGE],
        }],
        feedbacks: vec![FeedbackArc { source: PortRef::new(0, 2), target: PortRef::new(0, 1), state: "Q".into() }],
    }
}

pub fn d_latch_qq() -> Circuit {
    inverter_stage(d_latch_q(), 0)
}

pub fn jk_latch_q() -> Circuit {
    Circuit {
        lines: vec![Line::input("E"), Line::input("J"), Line::complemented_input("K"), Line::zero("zero")],
        gates: vec![
            GateInstance {
                gate: fredkin(),
                inputs: vec![Driver::Feedback("Q".into()), line("J"), line("K")],
                outputs: vec![to(1, 1), to(1, 2), GARBAGE],
            },
            GateInstance {
                gate: sayem(),
                inputs: vec![line("E"), out(0, 0), out(0, 1), line("zero")],
                outputs: vec![GARBAGE, primary("Q"), feedback(), GARBAGE],
            },
        ],
        feedbacks: vec![FeedbackArc { source: PortRef::new(1, 2), target: PortRef::new(0, 0), state: "Q".into() }],
    }
}

pub fn jk_latch_qq() -> Circuit {
    inverter_stage(jk_latch_q(), 1)
}

/// Looks up a reference netlist by its CLI name.
pub fn builtin_circuit(name: &str) -> Option<Circuit> {
    match name {
        "d-latch-q" => Some(d_latch_q()),
        "d-latch-qq" => Some(d_latch_qq()),
        "jk-latch-q" => Some(jk_latch_q()),
        "jk-latch-qq" => Some(jk_latch_qq()),
        _ => None,
    }
}

// SPDX-License-Identifier: Apache-2.0

use rand::seq::SliceRandom;
use rand::Rng;

use super::{Circuit, Disposition, Driver, FeedbackArc, GateInstance, Line, LineRole, PortRef};
use crate::gate::GateLibrary;

/// Draws a random circuit that satisfies every [`validate`](super::validate)
/// rule: gates from `library`, up to `max_gates` instances, a mix of
/// primary/constant/complemented lines, internal wiring, and feedback arcs.
pub fn random_circuit<R: Rng + ?Sized>(rng: &mut R, library: &GateLibrary, max_gates: usize) -> Circuit {
    let gates_lib: Vec<_> = library.iter().cloned().collect();
    let mut c = Circuit::default();
    if gates_lib.is_empty() {
        return c;
    }
    let n = rng.gen_range(0..=max_gates);
    let mut free: Vec<PortRef> = Vec::new();
    let mut pending: Vec<(String, PortRef)> = Vec::new();

    for g in 0..n {
        let spec = gates_lib.choose(rng).expect("non-empty").clone();
        let arity = spec.arity();
        let mut inputs = Vec::with_capacity(arity);
        for p in 0..arity {
            let roll = rng.gen_range(0..10);
            if roll < 4 && !free.is_empty() {
                let src = free.swap_remove(rng.gen_range(0..free.len()));
                c.gates[src.gate].outputs[src.port] = Some(Disposition::Consumed(PortRef::new(g, p)));
                inputs.push(Driver::Gate(src));
            } else if roll < 5 {
                let state = format!("S{}", pending.len() + c.feedbacks.len());
                pending.push((state.clone(), PortRef::new(g, p)));
                inputs.push(Driver::Feedback(state));
            } else {
                inputs.push(Driver::Line(fresh_line(rng, &mut c)));
            }
        }
        c.gates.push(GateInstance { gate: spec, inputs, outputs: vec![None; arity] });
        free.extend((0..arity).map(|p| PortRef::new(g, p)));
    }

    for (state, target) in pending {
        if free.is_empty() {
            let id = fresh_line(rng, &mut c);
            c.gates[target.gate].inputs[target.port] = Driver::Line(id);
            continue;
        }
        let source = free.swap_remove(rng.gen_range(0..free.len()));
        c.gates[source.gate].outputs[source.port] = Some(Disposition::Feedback(state.clone()));
        c.feedbacks.push(FeedbackArc { source, target, state });
    }

    free.sort();
    for (k, p) in free.into_iter().enumerate() {
        c.gates[p.gate].outputs[p.port] =
            Some(if rng.gen_bool(0.5) { Disposition::Primary(format!("o{k}")) } else { Disposition::Garbage });
    }
    c
}

fn fresh_line<R: Rng + ?Sized>(rng: &mut R, c: &mut Circuit) -> String {
    let id = format!("l{}", c.lines.len());
    let role = *[LineRole::PrimaryInput, LineRole::ConstantZero, LineRole::ConstantOne].choose(rng).expect("non-empty");
    let complemented = role == LineRole::PrimaryInput && rng.gen_bool(0.25);
    c.lines.push(Line { id: id.clone(), role, complemented });
    id
}

// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use revlatch_core::gate::GateLibrary;
use revlatch_core::metrics::garbage_count;
use revlatch_core::netlist::{
    builtin_circuit, d_latch_q, d_latch_qq, parse, random_circuit, serialize, validate, Circuit, Disposition, Driver,
    Line, NetlistError, PortRef, Rule, BUILTIN_NAMES,
};

fn random(seed: u64, max_gates: usize) -> Circuit {
    random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), &GateLibrary::builtin(), max_gates)
}

/// Consumers per driver, counted from the input side only.
fn consumers(c: &Circuit) -> HashMap<Driver, usize> {
    let mut n = HashMap::new();
    for inst in &c.gates {
        for d in &inst.inputs {
            *n.entry(d.clone()).or_insert(0) += 1;
        }
    }
    n
}

fn rule_of(c: &Circuit) -> Rule {
    validate(c).expect_err("mutation must be rejected").rule
}

#[test]
fn builders_validate_and_round_trip() {
    for name in BUILTIN_NAMES {
        let c = builtin_circuit(name).unwrap();
        validate(&c).unwrap();
        assert_eq!(parse(&serialize(&c).unwrap()).unwrap(), c, "{name}");
    }
    assert!(builtin_circuit("sr-latch").is_none());
}

#[test]
fn second_use_of_a_line_is_fan_out() {
    let mut c = d_latch_q();
    let e = c.gates[0].inputs[0].clone();
    c.gates[0].inputs[2] = e;
    assert_eq!(rule_of(&c), Rule::FanOut);
}

#[test]
fn missing_disposition_is_dangling() {
    let mut c = d_latch_q();
    c.gates[0].outputs[0] = None;
    assert_eq!(rule_of(&c), Rule::DanglingPort);
}

#[test]
fn unknown_line_is_rejected() {
    let mut c = d_latch_q();
    c.gates[0].inputs[2] = Driver::Line("nowhere".into());
    assert_eq!(rule_of(&c), Rule::UnknownLine);
}

#[test]
fn forward_reference_is_cyclic() {
    let mut c = d_latch_qq();
    let g = 1;
    let p = c.gates[g].inputs.iter().position(|d| matches!(d, Driver::Gate(_))).expect("internal input");
    let Driver::Gate(src) = c.gates[g].inputs[p].clone() else { unreachable!() };
    // Point the first gate back at the second one instead.
    c.gates[src.gate].outputs[src.port] = Some(Disposition::Garbage);
    c.gates[g].inputs[p] = Driver::Line("spare".into());
    c.lines.push(Line::zero("spare"));
    let victim = c.gates[0].inputs.iter().position(|d| matches!(d, Driver::Line(_))).unwrap();
    let Driver::Line(freed) = std::mem::replace(&mut c.gates[0].inputs[victim], Driver::Gate(PortRef::new(1, 0)))
    else {
        unreachable!()
    };
    c.lines.retain(|l| l.id != freed);
    c.gates[1].outputs[0] = Some(Disposition::Consumed(PortRef::new(0, victim)));
    assert_eq!(rule_of(&c), Rule::CyclicOrder);
}

#[test]
fn malformed_documents_are_rejected() {
    assert!(matches!(parse("{ \"lines\": [").unwrap_err(), NetlistError::Syntax { .. }));
    let good = serialize(&d_latch_q()).unwrap();
    let unknown_gate = good.replace("\"SG\"", "\"XG\"");
    assert!(matches!(parse(&unknown_gate).unwrap_err(), NetlistError::UnknownGate { .. }));
    let bad_driver = good.replace("line:D", "wire:D");
    assert!(matches!(parse(&bad_driver).unwrap_err(), NetlistError::Semantic { .. }));
    let extra_field = good.replacen("\"lines\"", "\"colour\": 1, \"lines\"", 1);
    assert!(parse(&extra_field).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn random_circuits_validate_and_round_trip(seed in any::<u64>(), max_gates in 0usize..=6) {
        let c = random(seed, max_gates);
        prop_assert!(validate(&c).is_ok());
        let text = serialize(&c).unwrap();
        let back = parse(&text).unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(serialize(&back).unwrap(), text);
    }

    #[test]
    fn no_driver_has_two_consumers(seed in any::<u64>()) {
        let c = random(seed, 6);
        for (driver, n) in consumers(&c) {
            prop_assert!(n <= 1, "{:?} drives {} ports", driver, n);
        }
    }

    #[test]
    fn every_output_port_lands_in_exactly_one_class(seed in any::<u64>()) {
        let c = random(seed, 6);
        let internal = c.gates.iter().flat_map(|g| &g.inputs).filter(|d| matches!(d, Driver::Gate(_))).count();
        let total: usize = c.gates.iter().map(|g| g.gate.arity()).sum();
        prop_assert_eq!(c.primary_outputs().len() + garbage_count(&c) + c.feedbacks.len() + internal, total);
    }
}

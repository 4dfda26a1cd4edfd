// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use revlatch_core::gate::GateLibrary;
use revlatch_core::netlist::{d_latch_q, d_latch_qq, jk_latch_q, jk_latch_qq, random_circuit, Circuit};
use revlatch_core::simulator::{
    check_complementarity, check_cut_bijective, check_stability, eval_combinational, simulate_sequence, step, Bindings,
    LatchState, MAX_CUT_WIRES,
};

fn bind(pairs: &[(&str, bool)]) -> Bindings {
    pairs.iter().map(|&(n, v)| (n.to_string(), v)).collect()
}

fn q(v: bool) -> LatchState {
    LatchState::new([("Q", v)])
}

/// Case analysis of a gated D latch.
fn d_next(e: bool, d: bool, q: bool) -> bool {
    if e {
        d
    } else {
        q
    }
}

/// Case analysis of a gated JK latch.
fn jk_next(e: bool, j: bool, k: bool, q: bool) -> bool {
    match (e, j, k) {
        (false, _, _) => q,
        (true, false, false) => q,
        (true, false, true) => false,
        (true, true, false) => true,
        (true, true, true) => !q,
    }
}

fn outputs_track_state(c: &Circuit, ev: &Bindings, state: bool, both: bool) {
    let out = eval_combinational(c, ev, &q(state)).unwrap();
    let next = out.next_state.get("Q").unwrap();
    assert_eq!(out.outputs["Q"], next);
    if both {
        assert_eq!(out.outputs["Qbar"], !next);
    }
}

#[test]
fn d_latches_are_transparent_when_enabled() {
    for (c, both) in [(d_latch_q(), false), (d_latch_qq(), true)] {
        for bits in 0..8u8 {
            let (e, d, s) = (bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
            let ev = bind(&[("E", e), ("D", d)]);
            assert_eq!(step(&c, &ev, &q(s)).unwrap().get("Q"), Some(d_next(e, d, s)));
            outputs_track_state(&c, &ev, s, both);
        }
    }
}

#[test]
fn jk_latches_follow_the_excitation_table() {
    for (c, both) in [(jk_latch_q(), false), (jk_latch_qq(), true)] {
        for bits in 0..16u8 {
            let (e, j, k, s) = (bits & 8 != 0, bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
            let ev = bind(&[("E", e), ("J", j), ("K", k)]);
            assert_eq!(step(&c, &ev, &q(s)).unwrap().get("Q"), Some(jk_next(e, j, k, s)), "E={e} J={j} K={k} Q={s}");
            outputs_track_state(&c, &ev, s, both);
        }
    }
}

#[test]
fn d_latches_settle_in_one_step() {
    for c in [d_latch_q(), d_latch_qq()] {
        let v = check_stability(&c).unwrap();
        assert!(v.holds && v.total == 8);
    }
}

#[test]
fn jk_toggle_is_the_only_unsettled_assignment() {
    for c in [jk_latch_q(), jk_latch_qq()] {
        for bits in 0..16u8 {
            let (e, j, k, s) = (bits & 8 != 0, bits & 4 != 0, bits & 2 != 0, bits & 1 != 0);
            let ev = bind(&[("E", e), ("J", j), ("K", k)]);
            let once = step(&c, &ev, &q(s)).unwrap();
            let twice = step(&c, &ev, &once).unwrap();
            assert_eq!(once == twice, !(e && j && k));
        }
        let v = check_stability(&c).unwrap();
        assert_eq!(v.counterexample_text().as_deref(), Some("E=1,J=1,K=1,Q=0"));
    }
}

#[test]
fn both_output_builders_are_complementary() {
    for c in [d_latch_qq(), jk_latch_qq()] {
        assert!(check_complementarity(&c).unwrap().holds);
    }
}

#[test]
fn builders_are_reversible_with_feedback_cut() {
    for c in [d_latch_q(), d_latch_qq(), jk_latch_q(), jk_latch_qq()] {
        assert!(check_cut_bijective(&c).unwrap().is_bijective());
    }
}

fn events(names: &'static [&'static str]) -> impl Strategy<Value = Vec<Bindings>> {
    proptest::collection::vec(proptest::collection::vec(any::<bool>(), names.len()), 0..24).prop_map(move |rows| {
        rows.into_iter().map(|row| names.iter().map(|n| n.to_string()).zip(row).collect()).collect()
    })
}

proptest! {
    #[test]
    fn d_sequences_match_a_fold(evs in events(&["E", "D"]), init in any::<bool>()) {
        for c in [d_latch_q(), d_latch_qq()] {
            let trace = simulate_sequence(&c, &evs, &q(init)).unwrap();
            let mut s = init;
            for (st, ev) in trace.steps.iter().zip(&evs) {
                s = d_next(ev["E"], ev["D"], s);
                prop_assert_eq!(st.state_after.get("Q"), Some(s));
                prop_assert!(st.stable);
            }
            prop_assert_eq!(trace.steps.len(), evs.len());
        }
    }

    #[test]
    fn jk_sequences_match_a_fold(evs in events(&["E", "J", "K"]), init in any::<bool>()) {
        for c in [jk_latch_q(), jk_latch_qq()] {
            let trace = simulate_sequence(&c, &evs, &q(init)).unwrap();
            let mut s = init;
            for (st, ev) in trace.steps.iter().zip(&evs) {
                s = jk_next(ev["E"], ev["J"], ev["K"], s);
                prop_assert_eq!(st.state_after.get("Q"), Some(s));
                prop_assert_eq!(st.stable, !(ev["E"] && ev["J"] && ev["K"]));
            }
        }
    }

    #[test]
    fn random_circuits_are_reversible_with_feedback_cut(seed in any::<u64>()) {
        let c = random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), &GateLibrary::builtin(), 3);
        let wires: usize = c.gates.iter().map(|g| g.gate.arity()).sum::<usize>();
        prop_assume!(wires <= MAX_CUT_WIRES);
        prop_assert!(check_cut_bijective(&c).unwrap().is_bijective());
    }

    #[test]
    fn evaluation_is_deterministic(seed in any::<u64>(), assignment in any::<u64>()) {
        let c = random_circuit(&mut ChaCha8Rng::seed_from_u64(seed), &GateLibrary::builtin(), 4);
        let ins: Bindings = c.input_names().into_iter().enumerate()
            .map(|(i, n)| (n.to_string(), assignment >> i & 1 == 1)).collect();
        let st = LatchState::new(c.state_names().into_iter().enumerate()
            .map(|(i, n)| (n.to_string(), assignment >> (32 + i) & 1 == 1)));
        let a = eval_combinational(&c, &ins, &st).unwrap();
        let b = eval_combinational(&c, &ins, &st).unwrap();
        prop_assert_eq!(a, b);
    }
}

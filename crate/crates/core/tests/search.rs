// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use revlatch_core::exec::Exec;
use revlatch_core::expr::Expr;
use revlatch_core::gate::GateLibrary;
use revlatch_core::netlist::{d_latch_q, validate, Circuit, Driver, LineRole};
use revlatch_core::search::{
    enumerate_candidates, for_each_candidate, min_gates, min_gates_with, realizes, SearchBounds, SearchError,
    SearchVerdict, TargetSpec,
};
use revlatch_core::simulator::check_complementarity;

fn falling(n: u64, k: u64) -> u64 {
    (0..k).map(|i| n.saturating_sub(i)).product()
}

fn choose(n: u64, k: u64) -> u64 {
    if k > n {
        0
    } else {
        falling(n, k) / falling(k, k)
    }
}

/// Closed-form number of one-gate candidates: the state on one port,
/// distinct primary inputs (times polarity) on some of the others,
/// constants on the rest; then the feedback source and named outputs on
/// distinct ports. Plus the empty circuit.
fn one_gate_count(spec: &TargetSpec, library: &GateLibrary, max_lines: u64) -> u64 {
    let n = spec.input_names.len() as u64;
    let r = spec.required_outputs.len() as u64;
    let pol: u64 = if spec.allow_complemented_inputs { 2 } else { 1 };
    let consts: u64 = if spec.allow_constants { 2 } else { 0 };
    let mut total = 1;
    for gate in library.iter() {
        let a = gate.arity() as u64;
        if a > max_lines {
            continue;
        }
        let wirings: u64 =
            (0..a).map(|j| choose(a - 1, j) * falling(n, j) * pol.pow(j as u32) * consts.pow((a - 1 - j) as u32)).sum();
        total += a * wirings * falling(a, 1 + r);
    }
    total
}

#[test]
fn one_gate_enumeration_matches_closed_form() {
    let libraries = [
        GateLibrary::standard(),
        GateLibrary::builtin(),
        GateLibrary::from_names(&["SG"]).unwrap(),
        GateLibrary::from_names(&["FG", "NOT"]).unwrap(),
    ];
    let targets = [
        TargetSpec::d_latch_q(),
        TargetSpec::d_latch_qq(),
        TargetSpec::jk_latch_q(),
        TargetSpec::jk_latch_q().with_complemented_inputs(false),
        TargetSpec::jk_latch_qq(),
    ];
    for library in &libraries {
        for spec in &targets {
            for lines in [2, 3, 4, 5] {
                let got = enumerate_candidates(spec, library, SearchBounds::new(1, lines)).unwrap().len() as u64;
                let want = one_gate_count(spec, library, lines as u64);
                assert_eq!(got, want, "{} over {:?} with {lines} lines", spec.name, library.names());
            }
        }
    }
}

#[test]
fn zero_gates_yield_only_the_empty_circuit() {
    let all =
        enumerate_candidates(&TargetSpec::d_latch_q(), &GateLibrary::standard(), SearchBounds::new(0, 6)).unwrap();
    assert_eq!(all, vec![Circuit::default()]);
    let r = min_gates(&TargetSpec::d_latch_q(), &GateLibrary::standard(), SearchBounds::new(0, 6)).unwrap();
    assert_eq!(r.verdict, SearchVerdict::Exhausted);
}

#[test]
fn feynman_candidates_have_two_lines() {
    let fg = GateLibrary::from_names(&["FG"]).unwrap();
    let all = enumerate_candidates(&TargetSpec::d_latch_q(), &fg, SearchBounds::new(1, 6)).unwrap();
    for c in all.iter().skip(1) {
        assert_eq!(c.lines.len() + c.feedbacks.len(), 2);
        assert_eq!(c.output_port_count(), 2);
        assert!(validate(c).is_ok());
        assert!(!realizes(c, &TargetSpec::d_latch_q()));
    }
}

/// Renames constant lines by order of first use.
fn canonical(c: &Circuit) -> Circuit {
    let mut c = c.clone();
    let mut renames = Vec::new();
    for inst in &c.gates {
        for d in &inst.inputs {
            if let Driver::Line(id) = d {
                let line = c.line(id).unwrap();
                if line.role != LineRole::PrimaryInput {
                    renames.push((id.clone(), format!("k{}", renames.len())));
                }
            }
        }
    }
    for (from, to) in &renames {
        for line in c.lines.iter_mut().filter(|l| &l.id == from) {
            line.id = to.clone();
        }
        for inst in c.gates.iter_mut() {
            for d in inst.inputs.iter_mut() {
                if matches!(d, Driver::Line(id) if id == from) {
                    *d = Driver::Line(to.clone());
                }
            }
        }
    }
    c.lines.sort_by(|a, b| a.id.cmp(&b.id));
    c
}

#[test]
fn sg_candidates_include_the_reference_wiring() {
    let sg = GateLibrary::from_names(&["SG"]).unwrap();
    let all = enumerate_candidates(&TargetSpec::d_latch_q(), &sg, SearchBounds::new(1, 6)).unwrap();
    let reference = canonical(&d_latch_q());
    assert_eq!(all.iter().filter(|c| canonical(c) == reference).count(), 1);
    assert_eq!(all.iter().filter(|c| realizes(c, &TargetSpec::d_latch_q())).count(), 2);
}

#[test]
fn capacity_errors() {
    let lib = GateLibrary::standard();
    for bounds in [SearchBounds::new(4, 6), SearchBounds::new(2, 7)] {
        assert!(matches!(
            enumerate_candidates(&TargetSpec::d_latch_q(), &lib, bounds),
            Err(SearchError::Capacity { .. })
        ));
        assert!(matches!(min_gates(&TargetSpec::d_latch_q(), &lib, bounds), Err(SearchError::Capacity { .. })));
    }
    let roomy = SearchBounds::new(3, 8);
    assert!(min_gates_with(Exec::Sequential, &TargetSpec::d_latch_q(), &lib, SearchBounds::new(1, 7), roomy).is_ok());
}

#[test]
fn identity_target_needs_a_wire_through() {
    // Q+ = Q with output Q: a gate that passes the state through on two
    // ports, such as FG with a constant-0 second input.
    let q: Expr = "Q".parse().unwrap();
    let spec = TargetSpec::new("hold", &["E"], "Q", q.clone(), vec![("Q".into(), q)]).unwrap();
    let r = min_gates(&spec, &GateLibrary::from_names(&["FG"]).unwrap(), SearchBounds::new(1, 3)).unwrap();
    assert_eq!(r.min_gates, Some(1));
    assert!(realizes(r.witness.as_ref().unwrap(), &spec));
}

#[test]
fn unused_inputs_are_dont_cares() {
    // E*D'*Q' + E*D*Q' mentions D but does not depend on it; two Toffoli
    // gates compute E ^ E*Q without ever reading D.
    let next = from_table(&["E", "D", "Q"], 0b0101_0000);
    let spec = TargetSpec::new("toggle-on", &["E", "D"], "Q", next, vec![]).unwrap();
    let tg = GateLibrary::from_names(&["TG"]).unwrap();
    let r = min_gates(&spec, &tg, SearchBounds::new(2, 5)).unwrap();
    let w = r.witness.as_ref().unwrap();
    assert_eq!(w.input_names(), ["E"]);
    assert!(realizes(w, &spec));

    let depends: Expr = "E*D*!Q".parse().unwrap();
    let strict = TargetSpec::new("needs-d", &["E", "D"], "Q", depends, vec![]).unwrap();
    assert!(!realizes(w, &strict));
}

#[test]
fn claims_hold_at_full_bounds() {
    let lib = GateLibrary::standard();
    for (spec, k) in [(TargetSpec::d_latch_q(), 1), (TargetSpec::d_latch_qq(), 2), (TargetSpec::jk_latch_q(), 2)] {
        let r = min_gates(&spec, &lib, SearchBounds::new(k, 6)).unwrap();
        assert_eq!(r.min_gates, Some(k), "{}", spec.name);
        let w = r.witness.as_ref().unwrap();
        assert!(validate(w).is_ok() && realizes(w, &spec));
        assert_eq!(w.gates.len(), k);
        if spec.required_outputs.len() == 2 {
            assert!(check_complementarity(w).unwrap().holds);
        }
    }
}

#[test]
fn parallel_and_sequential_agree() {
    let lib = GateLibrary::standard();
    let cap = SearchBounds::default();
    for spec in
        [TargetSpec::d_latch_qq(), TargetSpec::jk_latch_q(), TargetSpec::jk_latch_q().with_complemented_inputs(false)]
    {
        let a = min_gates_with(Exec::Sequential, &spec, &lib, SearchBounds::new(2, 6), cap).unwrap();
        let b = min_gates_with(Exec::Parallel, &spec, &lib, SearchBounds::new(2, 6), cap).unwrap();
        assert_eq!(a.min_gates, b.min_gates);
        assert_eq!(a.witness, b.witness);
        assert_eq!(a.explored_per_level, b.explored_per_level);
    }
}

/// Sum of minterms over `vars` for the truth table `bits`, with the first
/// variable most significant in the row index.
fn from_table(vars: &[&str], bits: u32) -> Expr {
    let n = vars.len();
    let mut terms = (0..1u32 << n).filter(|row| bits >> row & 1 == 1).map(|row| {
        (0..n)
            .map(|v| {
                let var = Expr::var(vars[v]);
                if row >> (n - 1 - v) & 1 == 1 {
                    var
                } else {
                    Expr::not(var)
                }
            })
            .reduce(Expr::and)
            .expect("at least one variable")
    });
    match terms.next() {
        None => Expr::Const(false),
        Some(first) => terms.fold(first, Expr::or),
    }
}

/// Smallest gate count among raw candidates that pass simulation.
fn brute_force_min(spec: &TargetSpec, library: &GateLibrary, bounds: SearchBounds) -> Option<usize> {
    let mut best: Option<usize> = None;
    for_each_candidate(spec, library, bounds, SearchBounds::default(), &mut |c| {
        let k = c.gates.len();
        if best.is_none_or(|b| k < b) && realizes(&c, spec) {
            best = Some(k);
        }
        true
    })
    .unwrap();
    best
}

const SMALL_GATES: [&str; 5] = ["NOT", "FG", "TG", "PG", "FRG"];

/// Brute force is slow in debug builds; PROPTEST_CASES raises the count.
fn brute_force_cases() -> u32 {
    std::env::var("PROPTEST_CASES").ok().and_then(|v| v.parse().ok()).unwrap_or(24)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(brute_force_cases()))]

    #[test]
    fn pruned_search_matches_brute_force(
        next in 0u32..256,
        output in prop_oneof![Just(None), (0u32..256).prop_map(Some)],
        picks in proptest::sample::subsequence(SMALL_GATES.to_vec(), 1..=2),
        complemented in any::<bool>(),
        max_gates in 1usize..=2,
        max_lines in 3usize..=4,
    ) {
        let vars = ["E", "D", "Q"];
        let mut outputs = vec![("Q".to_string(), from_table(&vars, next))];
        if let Some(bits) = output {
            outputs.push(("X".to_string(), from_table(&vars, bits)));
        }
        let spec = TargetSpec::new("random", &["E", "D"], "Q", from_table(&vars, next), outputs)
            .unwrap()
            .with_complemented_inputs(complemented);
        let library = GateLibrary::from_names(&picks).unwrap();
        let bounds = SearchBounds::new(max_gates, max_lines);
        let fast = min_gates(&spec, &library, bounds).unwrap();
        prop_assert_eq!(fast.min_gates, brute_force_min(&spec, &library, bounds));
        if let Some(w) = &fast.witness {
            prop_assert!(validate(w).is_ok());
            prop_assert!(realizes(w, &spec));
        }
    }

    #[test]
    fn larger_bounds_never_raise_the_minimum(
        next in 0u32..256,
        picks in proptest::sample::subsequence(SMALL_GATES.to_vec(), 1..=3),
    ) {
        let vars = ["E", "D", "Q"];
        let spec = TargetSpec::new("random", &["E", "D"], "Q", from_table(&vars, next), vec![]).unwrap();
        let library = GateLibrary::from_names(&picks).unwrap();
        let small = min_gates(&spec, &library, SearchBounds::new(1, 4)).unwrap();
        let large = min_gates(&spec, &library, SearchBounds::new(2, 5)).unwrap();
        if let Some(k) = small.min_gates {
            prop_assert!(large.min_gates.is_some_and(|k2| k2 <= k));
        }
    }
}

// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::f64::consts::PI;

use proptest::prelude::*;

use topas::circuit::{emit_qasm, parse_qasm};
use topas::mapper::{mapped_distance, sabre_layout, sabre_route, validate_mapping};
use topas::numerics::hs_distance;
use topas::partitioner::scan_partition;
use topas::selector::{indicator, select_subtopology, similarity, BiasTable};
use topas::topology::{build_topology, canonical_form, embedded_subtopologies, is_isomorphic};
use topas::{Circuit, Gate, Graph, WeightedGraph};

fn gate(n: usize) -> impl Strategy<Value = Gate> {
    let u3 = (0..n, 0.0..PI, -PI..PI, -PI..PI).prop_map(|(q, t, p, l)| Gate::u3(q, t, p, l));
    let cx = (0..n, 1..n).prop_map(move |(a, d)| Gate::cnot(a, (a + d) % n));
    prop_oneof![u3, cx]
}

fn circuit(widths: std::ops::RangeInclusive<usize>, gates: std::ops::Range<usize>) -> impl Strategy<Value = Circuit> {
    widths.prop_flat_map(move |n| {
        prop::collection::vec(gate(n), gates.clone()).prop_map(move |gs| Circuit::from_gates(n, gs).unwrap())
    })
}

fn with_swaps(n: usize) -> impl Strategy<Value = Circuit> {
    let g = prop_oneof![
        3 => gate(n),
        1 => (0..n, 1..n).prop_map(move |(a, d)| Gate::swap(a, (a + d) % n)),
    ];
    prop::collection::vec(g, 0..25).prop_map(move |gs| Circuit::from_gates(n, gs).unwrap())
}

fn weighted(k: usize) -> impl Strategy<Value = WeightedGraph> {
    prop::collection::vec(0u64..5, k * (k - 1) / 2).prop_map(move |ws| {
        let mut g = WeightedGraph::new(k);
        let mut i = 0;
        for u in 0..k {
            for v in u + 1..k {
                if ws[i] > 0 {
                    g.add_weight(u, v, ws[i]);
                }
                i += 1;
            }
        }
        g
    })
}

/// Gates of `c` on qubit `q`, in order.
fn track(c: &Circuit, q: usize) -> Vec<Gate> {
    c.gates().iter().filter(|g| g.acts_on(q)).copied().collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn qasm_round_trips(c in circuit(2..=6, 0..40)) {
        let back = parse_qasm(&emit_qasm(&c)).unwrap();
        prop_assert_eq!(back.width(), c.width());
        prop_assert_eq!(back.gates(), c.gates());
    }

    #[test]
    fn swap_decomposition_is_exact(c in (2usize..=4).prop_flat_map(with_swaps)) {
        let d = c.decompose_swaps();
        let swap_free = d.gates().iter().all(|g| !matches!(g, Gate::Swap { .. }));
        prop_assert!(swap_free);
        prop_assert_eq!(d.cnot_count(), c.cnot_count());
        prop_assert!(hs_distance(&d.unitary().unwrap(), &c.unitary().unwrap()).unwrap() < 1e-12);
    }

    #[test]
    fn connectivity_weights_count_two_qubit_gates(c in circuit(2..=8, 0..60)) {
        let g = c.connectivity_graph();
        prop_assert_eq!(g.total_weight() as usize, c.gates().iter().filter(|g| g.is_two_qubit()).count());
    }

    #[test]
    fn partitions_conserve_and_respect_order(c in circuit(2..=9, 1..80), k in 2usize..=4) {
        let pc = scan_partition(&c, k).unwrap();
        let mut seen = vec![0usize; c.len()];
        for p in &pc.partitions {
            prop_assert!(p.width() <= k);
            prop_assert!(p.qubits.windows(2).all(|w| w[0] < w[1]));
            prop_assert!(p.gate_indices.windows(2).all(|w| w[0] < w[1]));
            for &i in &p.gate_indices {
                seen[i] += 1;
            }
            if p.width() >= 2 {
                let support = p.subcircuit.connectivity_graph().support();
                prop_assert!(support.is_connected(), "partition {} is disconnected", p.id);
            }
        }
        prop_assert!(seen.iter().all(|&n| n == 1));
        let r = pc.reassemble();
        prop_assert_eq!(r.len(), c.len());
        for q in 0..c.width() {
            prop_assert_eq!(track(&r, q), track(&c, q));
        }
    }

    #[test]
    fn reassembly_preserves_the_unitary(c in circuit(2..=5, 1..40), k in 2usize..=4) {
        let pc = scan_partition(&c, k).unwrap();
        let d = hs_distance(&pc.reassemble().unitary().unwrap(), &c.unitary().unwrap()).unwrap();
        prop_assert!(d < 1e-12);
    }

    #[test]
    fn similarity_is_bounded_and_scale_free(g in weighted(4), scale in 1u64..7) {
        prop_assume!(g.edge_count() > 0);
        let line = indicator(&Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap());
        let s = similarity(&line, &g.weight_vector()).unwrap();
        prop_assert!((0.0..=1.0).contains(&s));
        let t = similarity(&line, &g.scaled(scale).weight_vector()).unwrap();
        prop_assert!((s - t).abs() < 1e-15);
    }

    #[test]
    fn selection_is_scale_invariant(g in weighted(4), scale in 2u64..9) {
        let mesh = build_topology("mesh:6x6").unwrap();
        let cands = embedded_subtopologies(&mesh, 4);
        let bias = BiasTable::default_for(&mesh);
        let a = select_subtopology(0, &g, &cands, &bias).unwrap();
        let b = select_subtopology(0, &g.scaled(scale), &cands, &bias).unwrap();
        prop_assert_eq!(&a.subtopology.name, &b.subtopology.name);
        prop_assert_eq!(&a.permutation, &b.permutation);
        prop_assert!(a.score <= 1.0);
        let covers = g.edges().all(|((u, v), _)| a.permuted_graph().has_edge(u, v));
        if g.edge_count() > 0 {
            prop_assert!(a.score > 0.0);
            prop_assert_eq!(a.score == 1.0, covers);
        }
    }

    #[test]
    fn canonical_form_ignores_labels(edges in prop::collection::vec((0usize..5, 0usize..5), 0..10), perm in Just((0..5).collect::<Vec<usize>>()).prop_shuffle()) {
        let g = Graph::from_edges(5, edges.into_iter().filter(|(a, b)| a != b)).unwrap();
        let h = g.relabel(&perm);
        prop_assert_eq!(canonical_form(&g), canonical_form(&h));
        prop_assert!(is_isomorphic(&g, &h));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn routing_is_valid_and_exact(c in circuit(2..=5, 1..40), seed in any::<u64>(), spec in prop::sample::select(vec!["linear:5", "mesh:2x3", "mesh:2x2"])) {
        let phys = build_topology(spec).unwrap();
        prop_assume!(c.width() <= phys.size());
        let p = sabre_layout(&c, &phys, 3, seed).unwrap();
        let mc = sabre_route(&c, &phys, &p, seed).unwrap();
        prop_assert!(validate_mapping(&mc, &phys));
        prop_assert!(mapped_distance(&c, &mc, 10).unwrap() < 1e-12);
    }
}

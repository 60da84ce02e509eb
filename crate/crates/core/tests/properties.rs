use num_complex::Complex64;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use vqe_recycle::graph::{induced_subgraph, is_connected, parse_edge_list_str, Graph, Network};
use vqe_recycle::maxcut::{brute_force_optima, cut_value, min_hamming_distance, Assignment};
use vqe_recycle::optimizer::{minimize, OptimizerConfig};
use vqe_recycle::qsim::{
    build_ansatz_state, diagonal_hamiltonian, expectation, zero_state, AnsatzSpec, CircuitKind, StateVector,
};
use vqe_recycle::sampler::{build_dataset, DatasetSpec};
use vqe_recycle::synth::{road_like_network, RoadLikeParams};
use vqe_recycle::vqe::{run_vqe, InitStrategy};

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (2..=max_n).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).collect();
        prop::sample::subsequence(pairs.clone(), 0..=pairs.len()).prop_map(move |e| Graph::new(n, e).unwrap())
    })
}

fn spin_cut(g: &Graph, a: &Assignment) -> i32 {
    g.edges().iter().map(|&(i, j)| (1 - a.spin(i) * a.spin(j)) / 2).sum()
}

proptest! {
    #[test]
    fn edge_list_parse_ignores_line_order(
        edges in prop::collection::vec((0u64..40, 0u64..40), 1..60),
        seed in any::<u64>(),
    ) {
        let lines: Vec<String> = edges.iter().map(|(a, b)| format!("{a}\t{b}")).collect();
        let mut shuffled = lines.clone();
        shuffled.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let a = parse_edge_list_str(&format!("# header\n{}\n", lines.join("\n"))).unwrap();
        let b = parse_edge_list_str(&shuffled.join("\n")).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn induced_subgraph_keeps_exactly_the_inner_edges(
        edges in prop::collection::vec((0u64..25, 0u64..25), 1..80),
        pick in prop::collection::vec(any::<prop::sample::Index>(), 1..12),
    ) {
        let net = Network::from_edges(edges);
        prop_assume!(!net.is_empty());
        let ids = net.node_ids();
        let mut nodes: Vec<u64> = pick.iter().map(|i| ids[i.index(ids.len())]).collect();
        nodes.sort_unstable();
        nodes.dedup();
        let g = induced_subgraph(&net, &nodes).unwrap();
        let inner = net.edges().filter(|(a, b)| nodes.contains(a) && nodes.contains(b)).count();
        prop_assert_eq!(g.edge_count(), inner);
        prop_assert_eq!(g.n(), nodes.len());
        for &(i, j) in g.edges() {
            prop_assert!(i < j && j < g.n());
            prop_assert!(net.has_edge(nodes[i], nodes[j]));
        }
    }

    #[test]
    fn cut_is_complement_invariant_and_matches_spin_form(g in graph_strategy(10), mask in any::<u32>()) {
        let a = Assignment::new(g.n(), mask & ((1 << g.n()) - 1)).unwrap();
        let c = cut_value(&g, &a).unwrap();
        prop_assert_eq!(c, cut_value(&g, &a.complement()).unwrap());
        prop_assert_eq!(c as i32, spin_cut(&g, &a));
    }

    #[test]
    fn no_assignment_beats_the_optimum(g in graph_strategy(9), seed in any::<u64>()) {
        let optima = brute_force_optima(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..1000 {
            let a = Assignment::new(g.n(), rand::Rng::gen_range(&mut rng, 0..1u32 << g.n())).unwrap();
            prop_assert!(cut_value(&g, &a).unwrap() <= optima.opt_cut());
        }
        for a in optima.assignments() {
            prop_assert_eq!(cut_value(&g, &a).unwrap(), optima.opt_cut());
            prop_assert!(optima.contains(&a.complement()));
        }
    }

    #[test]
    fn hamming_distance_is_symmetric_and_bounded(n in 2usize..9, s1 in any::<u64>(), s2 in any::<u64>()) {
        let random = |seed: u64| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<(usize, usize)> = (0..n)
                .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
                .filter(|_| rand::Rng::gen_bool(&mut rng, 0.5))
                .collect();
            brute_force_optima(&Graph::new(n, edges).unwrap()).unwrap()
        };
        let (a, b) = (random(s1), random(s2));
        let d = min_hamming_distance(&a, &b).unwrap();
        prop_assert_eq!(d, min_hamming_distance(&b, &a).unwrap());
        prop_assert!(d as usize <= n / 2);
    }

    #[test]
    fn gates_preserve_norm_and_invert(
        n in 1usize..6,
        ops in prop::collection::vec((0u8..4, 0usize..6, 0usize..6, -7.0f64..7.0), 1..40),
    ) {
        let mut s = zero_state(n).unwrap();
        for &(kind, q, t, theta) in &ops {
            let (q, t) = (q % n, t % n);
            let before = s.clone();
            match kind {
                0 => {
                    s.apply_rx(q, theta).unwrap();
                    let mut back = s.clone();
                    back.apply_rx(q, -theta).unwrap();
                    assert_same(&back, &before);
                }
                1 => {
                    s.apply_ry(q, theta).unwrap();
                    let mut back = s.clone();
                    back.apply_ry(q, -theta).unwrap();
                    assert_same(&back, &before);
                }
                2 => s.apply_h(q).unwrap(),
                _ if q != t => {
                    s.apply_cnot(q, t).unwrap();
                    let mut back = s.clone();
                    back.apply_cnot(q, t).unwrap();
                    assert_same(&back, &before);
                }
                _ => {}
            }
            prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn expectation_is_bounded_and_flip_symmetric(
        g in graph_strategy(7),
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 128),
    ) {
        let dim = 1usize << g.n();
        let norm: f64 = raw[..dim].iter().map(|(a, b)| a * a + b * b).sum::<f64>().sqrt();
        prop_assume!(norm > 1e-3);
        let amps: Vec<Complex64> = raw[..dim].iter().map(|&(a, b)| Complex64::new(a / norm, b / norm)).collect();
        let flipped: Vec<Complex64> = (0..dim).map(|x| amps[x ^ (dim - 1)]).collect();
        let h = diagonal_hamiltonian(&g).unwrap();
        let opt = brute_force_optima(&g).unwrap().opt_cut() as f64;
        let e = expectation(&StateVector::from_amplitudes(amps).unwrap(), &h).unwrap();
        let ef = expectation(&StateVector::from_amplitudes(flipped).unwrap(), &h).unwrap();
        prop_assert!(e >= -opt - 1e-12 && e <= 1e-12);
        prop_assert!((e - ef).abs() < 1e-12);
    }

    #[test]
    fn ansatz_states_are_normalized(n in 1usize..9, layers in 1usize..4, had in any::<bool>(), seed in any::<u64>()) {
        let kind = if had { CircuitKind::Had } else { CircuitKind::Base };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta: Vec<f64> = (0..2 * n * layers).map(|_| rand::Rng::gen_range(&mut rng, -7.0..7.0)).collect();
        let s = build_ansatz_state(&AnsatzSpec::new(kind, n, layers), &theta).unwrap();
        prop_assert!((s.norm_sqr() - 1.0).abs() < 1e-10);
    }
}

fn assert_same(a: &StateVector, b: &StateVector) {
    for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
        assert!((x - y).norm() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimizer_trace_respects_budget_and_is_deterministic(
        dim in 1usize..7,
        budget in 1usize..300,
        center in prop::collection::vec(-3.0f64..3.0, 6),
        x0 in prop::collection::vec(-3.0f64..3.0, 6),
        rhobeg in 0.1f64..2.0,
    ) {
        let f = |x: &[f64]| -> f64 {
            x.iter().zip(&center).enumerate().map(|(k, (a, c))| (k + 1) as f64 * (a - c).powi(2)).sum::<f64>()
                + (x[0] * 1.3).sin()
        };
        let cfg = OptimizerConfig { rhobeg, rhoend: rhobeg * 1e-4, max_evals: budget };
        let r = minimize(f, &x0[..dim], &cfg).unwrap();
        prop_assert!(r.evals_used <= budget);
        prop_assert_eq!(r.trace.len(), r.evals_used);
        let best = r.trace.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert_eq!(r.best_f, best);
        prop_assert_eq!(f(&r.best_x), r.best_f);
        let running = vqe_recycle::stats::best_so_far(&r.trace);
        prop_assert!(running.windows(2).all(|w| w[1] <= w[0]));
        let again = minimize(f, &x0[..dim], &cfg).unwrap();
        prop_assert_eq!(again, r);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn vqe_runs_are_reproducible_and_consistent(g in graph_strategy(5), seed in any::<u64>(), had in any::<bool>()) {
        prop_assume!(g.edge_count() > 0);
        let kind = if had { CircuitKind::Had } else { CircuitKind::Base };
        let spec = AnsatzSpec::new(kind, g.n(), 2);
        let opt = brute_force_optima(&g).unwrap().opt_cut();
        let cfg = OptimizerConfig::with_budget(60);
        let run = |s| run_vqe(&g, &spec, &InitStrategy::RandomUniform, &cfg, opt, &mut ChaCha8Rng::seed_from_u64(s)).unwrap();
        let a = run(seed);
        prop_assert_eq!(&a, &run(seed));
        prop_assert!(a.evals_used <= 60);
        prop_assert!((a.approx_ratio_expect - (-a.best_energy) / opt as f64).abs() < 1e-9);
        prop_assert!(a.approx_ratio_argmax <= 1.0);
    }

    #[test]
    fn datasets_are_balanced_connected_and_deterministic(seed in any::<u64>()) {
        let net = road_like_network(&RoadLikeParams { width: 30, height: 30, ..Default::default() }, 11);
        let spec = DatasetSpec { size: 8, pairs_per_hd: 2, hd_range: 0..=3, ..Default::default() };
        let ds = build_dataset(&net, &spec, seed, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        for hd in 0..=3 {
            prop_assert_eq!(ds.pairs.iter().filter(|p| p.hd == hd).count(), 2);
        }
        for p in &ds.pairs {
            for g in [&p.source, &p.target] {
                prop_assert_eq!(g.n(), 8);
                prop_assert!(is_connected(g));
                prop_assert!(g.edge_count() >= 7);
            }
        }
        let again = build_dataset(&net, &spec, seed, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert_eq!(ds.to_json(), again.to_json());
    }
}

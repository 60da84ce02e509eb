use vqe_recycle::experiment::{collect_outputs, run_experiment, ExperimentConfig, Variant};
use vqe_recycle::synth::{road_like_network, RoadLikeParams};

fn cfg(jobs: usize) -> ExperimentConfig {
    ExperimentConfig {
        node_count: 6,
        layers: 2,
        pairs_per_hd: 2,
        hd_max: 3,
        seeds: vec![4, 5],
        maxiter_full: 120,
        maxiter_accel: 20,
        jobs: Some(jobs),
        ..Default::default()
    }
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let net = road_like_network(&RoadLikeParams { width: 30, height: 30, ..Default::default() }, 2);
    let mut order = Vec::new();
    let serial = run_experiment(&net, &cfg(1), |r| {
        order.push((r.seed, r.pair_index));
        Ok(())
    })
    .unwrap();
    let parallel = run_experiment(&net, &cfg(3), |_| Ok(())).unwrap();
    assert_eq!(serial.results.len(), 16);
    assert_eq!(order.len(), 16);
    assert_eq!(serial.results, parallel.results);
    assert_eq!(serial.datasets, parallel.datasets);
    assert_eq!(collect_outputs(&serial.results), collect_outputs(&parallel.results));
}

#[test]
fn budgets_and_transfer_integrity() {
    let net = road_like_network(&RoadLikeParams { width: 30, height: 30, ..Default::default() }, 2);
    let c = cfg(2);
    let out = run_experiment(&net, &c, |_| Ok(())).unwrap();
    let mut accel_evals = 0;
    let mut full_evals = 0;
    let mut instances = 0;
    for pr in &out.results {
        assert!(pr.is_complete());
        for &circuit in &c.circuits {
            instances += 1;
            let pre = pr.get(circuit, Variant::PretrainSource).unwrap();
            for v in [Variant::PostTl, Variant::AccelPostTl] {
                let post = pr.get(circuit, v).unwrap();
                assert_eq!(post.initial_params, pre.final_params);
                assert_eq!(post.init, "transfer");
            }
            for (_, v, rec) in pr.runs.iter().filter(|(cc, _, _)| *cc == circuit) {
                let cap = if v.is_accel() { c.maxiter_accel } else { c.maxiter_full };
                assert!(rec.evals_used <= cap && rec.trace.len() == rec.evals_used);
                let best = vqe_recycle::stats::best_so_far(&rec.trace);
                assert!(best.windows(2).all(|w| w[1] <= w[0]));
            }
            accel_evals += pr.get(circuit, Variant::AccelPostTl).unwrap().evals_used;
            full_evals += pr.get(circuit, Variant::Standard).unwrap().evals_used;
        }
    }
    assert!(accel_evals <= c.maxiter_accel * instances);
    assert!(full_evals <= c.maxiter_full * instances);
}

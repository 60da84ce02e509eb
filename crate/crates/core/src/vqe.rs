//! The hybrid loop: initial parameters, objective wiring and run metrics.

use std::f64::consts::TAU;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::maxcut::cut_value;
use crate::optimizer::{minimize, OptimizerConfig, Termination};
use crate::qsim::{
    argmax_bitstring, diagonal_hamiltonian, expectation, zero_state, Ansatz, AnsatzSpec,
    CircuitKind, ParamVector,
};

/// Half-width of the near-zero initialization interval.
pub const NEAR_ZERO_HALF_WIDTH: f64 = 0.001;

#[derive(Clone, Debug, PartialEq)]
pub enum InitStrategy {
    /// Each angle uniform in `[-0.001, 0.001]`.
    NearZero,
    /// Reuse parameters optimized on another instance.
    Transfer(ParamVector),
    /// Each angle uniform in `[0, 2π)`.
    RandomUniform,
}

impl InitStrategy {
    pub fn tag(&self) -> &'static str {
        match self {
            InitStrategy::NearZero => "near_zero",
            InitStrategy::Transfer(_) => "transfer",
            InitStrategy::RandomUniform => "random_uniform",
        }
    }
}

pub fn init_params<R: Rng + ?Sized>(
    strategy: &InitStrategy,
    dim: usize,
    rng: &mut R,
) -> Result<ParamVector> {
    if dim == 0 {
        return Err(Error::domain("parameter dimension must be >= 1"));
    }
    let angles = match strategy {
        InitStrategy::NearZero => (0..dim)
            .map(|_| rng.gen_range(-NEAR_ZERO_HALF_WIDTH..=NEAR_ZERO_HALF_WIDTH))
            .collect(),
        InitStrategy::RandomUniform => (0..dim).map(|_| rng.gen_range(0.0..TAU)).collect(),
        InitStrategy::Transfer(theta) => {
            if theta.len() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: theta.len(),
                });
            }
            theta.to_vec()
        }
    };
    Ok(ParamVector::new(angles))
}

/// `cut / opt_cut`.
pub fn approximation_ratio(cut: f64, opt_cut: u32) -> Result<f64> {
    if opt_cut == 0 {
        return Err(Error::domain("approximation ratio undefined for opt_cut = 0"));
    }
    if cut < 0.0 {
        return Err(Error::domain(format!("negative cut value {cut}")));
    }
    Ok(cut / f64::from(opt_cut))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub graph_id: String,
    pub circuit: CircuitKind,
    pub init: String,
    pub initial_params: ParamVector,
    /// Energy of every objective evaluation in call order.
    pub trace: Vec<f64>,
    pub evals_used: usize,
    pub termination: Termination,
    pub final_params: ParamVector,
    pub best_energy: f64,
    pub argmax_cut: u32,
    pub expected_cut: f64,
    pub approx_ratio_argmax: f64,
    pub approx_ratio_expect: f64,
}

impl RunRecord {
    pub fn first_energy(&self) -> Option<f64> {
        self.trace.first().copied()
    }
}

/// Runs one VQE optimization of `g` and scores the state at the best
/// parameters found.
pub fn run_vqe<R: Rng + ?Sized>(
    g: &Graph,
    spec: &AnsatzSpec,
    strategy: &InitStrategy,
    cfg: &OptimizerConfig,
    opt_cut: u32,
    rng: &mut R,
) -> Result<RunRecord> {
    if spec.n != g.n() {
        return Err(Error::Dimension {
            expected: g.n(),
            got: spec.n,
        });
    }
    if opt_cut == 0 {
        return Err(Error::domain("opt_cut must be positive"));
    }
    let ansatz = Ansatz::new(*spec)?;
    let hamiltonian = diagonal_hamiltonian(g)?;
    let theta0 = init_params(strategy, spec.dim(), rng)?;

    let mut state = zero_state(spec.n)?;
    let mut scratch = state.amplitudes().to_vec();
    let objective = |theta: &[f64]| -> f64 {
        ansatz
            .prepare(theta, &mut state, &mut scratch)
            .expect("optimizer keeps the parameter dimension");
        expectation(&state, &hamiltonian).expect("state and hamiltonian share n")
    };
    let result = minimize(objective, &theta0, cfg)?;

    let final_state = ansatz.state(&result.best_x)?;
    let energy = expectation(&final_state, &hamiltonian)?;
    let argmax_cut = cut_value(g, &argmax_bitstring(&final_state))?;
    let expected_cut = (-energy).max(0.0);

    Ok(RunRecord {
        graph_id: String::new(),
        circuit: spec.kind,
        init: strategy.tag().to_string(),
        initial_params: theta0,
        evals_used: result.evals_used,
        termination: result.termination,
        best_energy: result.best_f,
        argmax_cut,
        expected_cut,
        approx_ratio_argmax: approximation_ratio(f64::from(argmax_cut), opt_cut)?,
        // Rounding in the probability sum can push this a hair above 1.
        approx_ratio_expect: approximation_ratio(expected_cut, opt_cut)?.min(1.0),
        final_params: ParamVector::new(result.best_x),
        trace: result.trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn near_zero_and_random_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = init_params(&InitStrategy::NearZero, 72, &mut rng).unwrap();
        assert_eq!(p.len(), 72);
        assert!(p.iter().all(|v| v.abs() <= 0.001));
        let p = init_params(&InitStrategy::RandomUniform, 72, &mut rng).unwrap();
        assert!(p.iter().all(|v| (0.0..TAU).contains(v)));
    }

    #[test]
    fn transfer_is_identity() {
        let theta = ParamVector::new(vec![0.5, -1.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let out = init_params(&InitStrategy::Transfer(theta.clone()), 3, &mut rng).unwrap();
        assert_eq!(out, theta);
        assert!(matches!(
            init_params(&InitStrategy::Transfer(theta), 4, &mut rng),
            Err(Error::Dimension { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn ratio_examples() {
        assert_eq!(approximation_ratio(8.0, 8).unwrap(), 1.0);
        assert_eq!(approximation_ratio(0.0, 8).unwrap(), 0.0);
        assert_eq!(approximation_ratio(4.0, 8).unwrap(), 0.5);
        assert!(approximation_ratio(1.0, 0).is_err());
    }

    #[test]
    fn triangle_reaches_optimum() {
        let g = Graph::new(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let spec = AnsatzSpec::new(CircuitKind::Base, 3, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rec = run_vqe(
            &g,
            &spec,
            &InitStrategy::NearZero,
            &OptimizerConfig::with_budget(300),
            2,
            &mut rng,
        )
        .unwrap();
        assert_eq!(rec.argmax_cut, 2);
        assert_eq!(rec.approx_ratio_argmax, 1.0);
        assert!(rec.evals_used <= 300);
    }

    #[test]
    fn zero_parameters_start_at_zero_cut() {
        let g = Graph::new(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let spec = AnsatzSpec::new(CircuitKind::Base, 4, 3);
        let frozen = InitStrategy::Transfer(ParamVector::zeros(spec.dim()));
        let rec = run_vqe(
            &g,
            &spec,
            &frozen,
            &OptimizerConfig::with_budget(spec.dim() + 2),
            3,
            &mut ChaCha8Rng::seed_from_u64(0),
        )
        .unwrap();
        assert_eq!(rec.trace[0], 0.0);
        assert_eq!(rec.evals_used, spec.dim() + 2);
    }

    #[test]
    fn mismatched_spec_is_rejected() {
        let g = Graph::new(3, [(0, 1)]).unwrap();
        let spec = AnsatzSpec::new(CircuitKind::Base, 4, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(run_vqe(&g, &spec, &InitStrategy::NearZero, &OptimizerConfig::default(), 1, &mut rng).is_err());
    }
}

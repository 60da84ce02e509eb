//! COBYLA (Powell's constrained optimization by linear approximation),
//! restricted to unconstrained problems.
//!
//! The method keeps a simplex of `m + 1` points, interpolates a linear model
//! of the objective through them, and alternates trust-region steps of radius
//! `ρ` with geometry-improving steps whenever the simplex degenerates. `ρ`
//! halves from `rhobeg` down to `rhoend`. With no constraints the
//! trust-region subproblem (minimize a linear model inside a ball) is solved
//! by `-ρ g/‖g‖`, computed the way TRSTLP computes it. The other update rules
//! (simplex acceptability, vertex replacement, pole switching) follow the
//! reference algorithm.
//!
//! Budget semantics: `max_evals` counts objective evaluations, not outer
//! iterations.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const DELTA: f64 = 1.1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerConfig {
    pub rhobeg: f64,
    pub rhoend: f64,
    pub max_evals: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        OptimizerConfig {
            rhobeg: 1.0,
            rhoend: 1e-4,
            max_evals: 1000,
        }
    }
}

impl OptimizerConfig {
    pub fn with_budget(max_evals: usize) -> Self {
        OptimizerConfig {
            max_evals,
            ..Default::default()
        }
    }

    /// Budgets below `dim + 1` are allowed: the run stops partway through the
    /// initial simplex, which is what a short accelerated run amounts to.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.rhoend > 0.0 && self.rhoend < self.rhobeg && self.rhobeg.is_finite()) {
            problems.push(format!(
                "need 0 < rhoend < rhobeg, got rhobeg={} rhoend={}",
                self.rhobeg, self.rhoend
            ));
        }
        if self.max_evals == 0 {
            problems.push("max_evals must be >= 1".to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(problems))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    BudgetExhausted,
    TrustRegionConverged,
    /// The inverse simplex matrix lost accuracy; the reference algorithm
    /// stops here too.
    RoundingErrors,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::BudgetExhausted => "budget_exhausted",
            Termination::TrustRegionConverged => "trust_region_converged",
            Termination::RoundingErrors => "rounding_errors",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizeResult {
    pub best_x: Vec<f64>,
    pub best_f: f64,
    pub evals_used: usize,
    /// Objective value of every evaluation, in call order; evaluation `k`
    /// (1-based) is `trace[k - 1]`.
    pub trace: Vec<f64>,
    pub termination: Termination,
}

struct Evaluator<F> {
    objective: F,
    budget: usize,
    trace: Vec<f64>,
    best_x: Vec<f64>,
    best_f: f64,
}

impl<F: FnMut(&[f64]) -> f64> Evaluator<F> {
    /// `Ok(None)` once the budget is spent.
    fn eval(&mut self, x: &[f64]) -> Result<Option<f64>> {
        if self.trace.len() >= self.budget {
            return Ok(None);
        }
        let f = (self.objective)(x);
        self.trace.push(f);
        if !f.is_finite() {
            return Err(Error::NonFiniteObjective {
                evaluation: self.trace.len(),
                value: f,
                trace: std::mem::take(&mut self.trace),
            });
        }
        if f < self.best_f {
            self.best_f = f;
            self.best_x.clear();
            self.best_x.extend_from_slice(x);
        }
        Ok(Some(f))
    }

    fn finish(self, termination: Termination) -> OptimizeResult {
        OptimizeResult {
            best_x: self.best_x,
            best_f: self.best_f,
            evals_used: self.trace.len(),
            trace: self.trace,
            termination,
        }
    }
}

/// Simplex state: `pole` is the best vertex, `sim[j]` is the displacement of
/// vertex `j` from it (column `j` of Powell's SIM), and `simi` is the inverse
/// of the matrix with those columns, stored by rows.
struct Simplex {
    n: usize,
    pole: Vec<f64>,
    fpole: f64,
    sim: Vec<Vec<f64>>,
    simi: Vec<Vec<f64>>,
    fval: Vec<f64>,
}

impl Simplex {
    fn new(x0: &[f64], rho: f64) -> Self {
        let n = x0.len();
        let mut sim = vec![vec![0.0; n]; n];
        let mut simi = vec![vec![0.0; n]; n];
        for i in 0..n {
            sim[i][i] = rho;
            simi[i][i] = 1.0 / rho;
        }
        Simplex {
            n,
            pole: x0.to_vec(),
            fpole: 0.0,
            sim,
            simi,
            fval: vec![0.0; n],
        }
    }

    /// Moves the lowest vertex into the pole position.
    fn switch_to_best(&mut self) {
        let mut nbest = None;
        let mut phimin = self.fpole;
        for (j, &f) in self.fval.iter().enumerate() {
            if f < phimin {
                nbest = Some(j);
                phimin = f;
            }
        }
        let Some(nb) = nbest else { return };
        std::mem::swap(&mut self.fpole, &mut self.fval[nb]);
        let shift = std::mem::replace(&mut self.sim[nb], vec![0.0; self.n]);
        for col in self.sim.iter_mut() {
            for (c, d) in col.iter_mut().zip(&shift) {
                *c -= d;
            }
        }
        for (p, d) in self.pole.iter_mut().zip(&shift) {
            *p += d;
        }
        let mut row = vec![0.0; self.n];
        for r in &self.simi {
            for (acc, v) in row.iter_mut().zip(r) {
                *acc -= v;
            }
        }
        self.simi[nb] = row;
    }

    /// Largest entry of `simi * sim - I`. Four columns at a time; each entry
    /// is still summed in index order.
    fn inverse_error(&self) -> f64 {
        let n = self.n;
        let mut error = 0.0f64;
        for (i, r) in self.simi.iter().enumerate() {
            let diag = |j: usize| if i == j { -1.0 } else { 0.0 };
            let mut j = 0;
            while j + 4 <= n {
                let (c0, c1, c2, c3) = (&self.sim[j], &self.sim[j + 1], &self.sim[j + 2], &self.sim[j + 3]);
                let mut t = [diag(j), diag(j + 1), diag(j + 2), diag(j + 3)];
                for k in 0..n {
                    let a = r[k];
                    t[0] += a * c0[k];
                    t[1] += a * c1[k];
                    t[2] += a * c2[k];
                    t[3] += a * c3[k];
                }
                for v in t {
                    error = error.max(v.abs());
                }
                j += 4;
            }
            for j in j..n {
                let mut t = diag(j);
                for k in 0..n {
                    t += r[k] * self.sim[j][k];
                }
                error = error.max(t.abs());
            }
        }
        error
    }

    /// Gradient of the linear interpolant through the simplex.
    fn gradient(&self) -> Vec<f64> {
        let mut g = vec![0.0; self.n];
        for (j, r) in self.simi.iter().enumerate() {
            let w = self.fval[j] - self.fpole;
            for (gi, v) in g.iter_mut().zip(r) {
                *gi += w * v;
            }
        }
        g
    }

    /// `simi` row `j` times `dx`.
    fn simi_dot(&self, j: usize, dx: &[f64]) -> f64 {
        self.simi[j].iter().zip(dx).map(|(a, b)| a * b).sum()
    }

    /// Replaces vertex `jdrop` by `pole + dx` with value `f`.
    fn replace_vertex(&mut self, jdrop: usize, dx: &[f64], f: f64) {
        self.sim[jdrop].copy_from_slice(dx);
        let temp = self.simi_dot(jdrop, dx);
        for v in self.simi[jdrop].iter_mut() {
            *v /= temp;
        }
        for j in 0..self.n {
            if j != jdrop {
                let t = self.simi_dot(j, dx);
                for i in 0..self.n {
                    let delta = t * self.simi[jdrop][i];
                    self.simi[j][i] -= delta;
                }
            }
        }
        self.fval[jdrop] = f;
    }

    fn offset(&self, dx: &[f64]) -> Vec<f64> {
        self.pole.iter().zip(dx).map(|(p, d)| p + d).collect()
    }
}

fn reduce_rho(rho: f64, rhoend: f64) -> f64 {
    let half = 0.5 * rho;
    if half <= 1.5 * rhoend {
        rhoend
    } else {
        half
    }
}

/// Minimizer of the linear model `-a·dx` over the ball of radius `rho`,
/// where `a = -grad`. The arithmetic mirrors the reference TRSTLP on an
/// empty constraint set (Givens rotations onto `a`, then a full step to the
/// boundary), so steps agree with it to the last bit. `None` when every
/// component of the gradient is lost to rounding.
fn trust_step(grad: &[f64], rho: f64) -> Option<Vec<f64>> {
    let n = grad.len();
    let a: Vec<f64> = grad.iter().map(|g| -g).collect();
    let mut z = vec![vec![0.0; n]; n]; // z[col][row]
    for (k, col) in z.iter_mut().enumerate() {
        col[k] = 1.0;
    }
    let mut tot = 0.0;
    for k in (0..n).rev() {
        let mut sp = 0.0;
        let mut spabs = 0.0;
        for i in 0..n {
            let t = z[k][i] * a[i];
            sp += t;
            spabs += t.abs();
        }
        let acca = spabs + 0.1 * sp.abs();
        let accb = spabs + 0.2 * sp.abs();
        if spabs >= acca || acca >= accb {
            sp = 0.0;
        }
        if tot == 0.0 {
            tot = sp;
        } else {
            let temp = (sp * sp + tot * tot).sqrt();
            let alpha = sp / temp;
            let beta = tot / temp;
            tot = temp;
            let (head, tail) = z.split_at_mut(k + 1);
            let (zk, zkp) = (&mut head[k], &mut tail[0]);
            for i in 0..n {
                let t = alpha * zk[i] + beta * zkp[i];
                zkp[i] = alpha * zkp[i] - beta * zk[i];
                zk[i] = t;
            }
        }
    }
    if tot == 0.0 {
        return None;
    }
    let inv = 1.0 / tot;
    let sdirn: Vec<f64> = z[0].iter().map(|v| inv * v).collect();
    let dd = rho * rho;
    let ss: f64 = sdirn.iter().fold(0.0, |acc, v| acc + v * v);
    let step = dd / ((ss * dd).sqrt() + 0.0);
    Some(sdirn.iter().map(|v| 0.0 + step * v).collect())
}

/// Minimizes `objective` from `x0`. Every objective call is recorded in the
/// result trace; a non-finite value aborts with the partial trace attached.
pub fn minimize<F>(objective: F, x0: &[f64], cfg: &OptimizerConfig) -> Result<OptimizeResult>
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    if n == 0 {
        return Err(Error::domain("cannot minimize over zero parameters"));
    }
    cfg.validate()?;

    let mut ev = Evaluator {
        objective,
        budget: cfg.max_evals,
        trace: Vec::with_capacity(cfg.max_evals),
        best_x: x0.to_vec(),
        best_f: f64::INFINITY,
    };
    let mut rho = cfg.rhobeg;
    let mut s = Simplex::new(x0, rho);

    // Initial simplex: step each coordinate by +ρ from the current best point.
    let mut x = x0.to_vec();
    match ev.eval(&x)? {
        Some(f) => s.fpole = f,
        None => return Ok(ev.finish(Termination::BudgetExhausted)),
    }
    for j in 0..n {
        x[j] += rho;
        let Some(f) = ev.eval(&x)? else {
            return Ok(ev.finish(Termination::BudgetExhausted));
        };
        if s.fpole <= f {
            s.fval[j] = f;
            x[j] = s.pole[j];
        } else {
            s.pole[j] = x[j];
            s.fval[j] = s.fpole;
            s.fpole = f;
            for k in 0..=j {
                s.sim[k][j] = -rho;
                let temp: f64 = (k..=j).map(|i| -s.simi[i][k]).sum();
                s.simi[j][k] = temp;
            }
        }
    }

    let mut trust_region_next = true;
    let mut vsig = vec![0.0; n];
    let mut veta = vec![0.0; n];
    let mut sigbar = vec![0.0; n];

    loop {
        s.switch_to_best();
        if s.inverse_error() > 0.1 {
            return Ok(ev.finish(Termination::RoundingErrors));
        }
        let grad = s.gradient();

        let parsig = ALPHA * rho;
        let pareta = BETA * rho;
        let mut acceptable = true;
        for j in 0..n {
            let wsig: f64 = s.simi[j].iter().map(|v| v * v).sum();
            let weta: f64 = s.sim[j].iter().map(|v| v * v).sum();
            vsig[j] = 1.0 / wsig.sqrt();
            veta[j] = weta.sqrt();
            if vsig[j] < parsig || veta[j] > pareta {
                acceptable = false;
            }
        }

        if !trust_region_next && !acceptable {
            // Geometry step: replace the vertex that is farthest away, or
            // failing that the one closest to the opposite face.
            let mut jdrop = None;
            let mut temp = pareta;
            for j in 0..n {
                if veta[j] > temp {
                    jdrop = Some(j);
                    temp = veta[j];
                }
            }
            if jdrop.is_none() {
                for j in 0..n {
                    if vsig[j] < temp {
                        jdrop = Some(j);
                        temp = vsig[j];
                    }
                }
            }
            let jdrop = jdrop.expect("an unacceptable simplex has a vertex to drop");
            let scale = GAMMA * rho * vsig[jdrop];
            let mut dx: Vec<f64> = s.simi[jdrop].iter().map(|v| scale * v).collect();
            // Take the side on which the linear model decreases.
            let model_change: f64 = grad.iter().zip(&dx).map(|(g, d)| g * d).sum();
            if model_change > 0.0 {
                dx.iter_mut().for_each(|d| *d = -*d);
            }
            let x = s.offset(&dx);
            let Some(f) = ev.eval(&x)? else {
                return Ok(ev.finish(Termination::BudgetExhausted));
            };
            s.replace_vertex(jdrop, &dx, f);
            trust_region_next = true;
            continue;
        }

        let Some(dx) = trust_step(&grad, rho) else {
            // Flat model: nothing to step along, so treat it like a step
            // that was too short.
            if !acceptable {
                trust_region_next = false;
                continue;
            }
            if rho > cfg.rhoend {
                rho = reduce_rho(rho, cfg.rhoend);
                continue;
            }
            return Ok(ev.finish(Termination::TrustRegionConverged));
        };
        let mut prerem = 0.0 - grad.iter().zip(&dx).fold(0.0, |acc, (g, d)| acc - (-g) * d);
        let x = s.offset(&dx);
        let Some(f) = ev.eval(&x)? else {
            return Ok(ev.finish(Termination::BudgetExhausted));
        };
        trust_region_next = true;

        let mut trured = s.fpole - f;
        if f == s.fpole {
            prerem = 0.0;
            trured = 0.0;
        }

        // Pick the vertex to replace; mandatory when the step improved f.
        let mut ratio = if trured <= 0.0 { 1.0 } else { 0.0 };
        let mut jdrop = None;
        for j in 0..n {
            let temp = s.simi_dot(j, &dx).abs();
            if temp > ratio {
                jdrop = Some(j);
                ratio = temp;
            }
            sigbar[j] = temp * vsig[j];
        }
        let mut edgmax = DELTA * rho;
        let mut far = None;
        for j in 0..n {
            if sigbar[j] >= parsig || sigbar[j] >= vsig[j] {
                let mut temp = veta[j];
                if trured > 0.0 {
                    temp = (0..n)
                        .map(|i| (dx[i] - s.sim[j][i]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                }
                if temp > edgmax {
                    far = Some(j);
                    edgmax = temp;
                }
            }
        }
        if far.is_some() {
            jdrop = far;
        }
        if let Some(jd) = jdrop {
            s.replace_vertex(jd, &dx, f);
            if trured > 0.0 && trured >= 0.1 * prerem {
                continue;
            }
        }

        if !acceptable {
            trust_region_next = false;
            continue;
        }
        if rho > cfg.rhoend {
            rho = reduce_rho(rho, cfg.rhoend);
            continue;
        }
        return Ok(ev.finish(Termination::TrustRegionConverged));
    }
}

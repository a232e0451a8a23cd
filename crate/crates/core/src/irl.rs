//! Maximum-entropy inverse reinforcement learning with a Laplace approximation
//! of the trajectory partition function.
//!
//! For a demonstration with control vector `u` (one acceleration per step),
//! the cost is expanded to second order around the demonstration,
//! `C(ũ) ≈ C + gᵀδ + ½ δᵀHδ`, which gives the per-demo negative log-likelihood
//!
//! ```text
//! −log P(u | θ) ≈ ½ gᵀH⁻¹g − ½ log det H + (N/2) log 2π
//! ```
//!
//! Both `g` and `H` are linear in θ, so they are precomputed per feature and
//! the objective and its gradient cost only small dense solves.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::ad::{Jet, Real};
use crate::costs::{human_phi, Exogenous, FeatureConfig, SocialInfo, Weights, HUMAN_FEATURES};
use crate::error::{Error, Result};
use crate::world::{step_generic, ControlSequence, StateT, VehicleParams, WorldState};

const NF: usize = HUMAN_FEATURES.len();
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One recorded human trajectory with the context it was driven in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Demonstration {
    pub x0: WorldState,
    pub info: SocialInfo,
    pub u_r: ControlSequence,
    pub u_h: ControlSequence,
    pub dt: f64,
    /// Index of the demonstrating human in `x0.humans`.
    #[serde(default)]
    pub human: usize,
}

impl Demonstration {
    pub fn validate(&self) -> Result<()> {
        if self.u_h.is_empty() {
            return Err(Error::Domain("demonstration has no human controls".into()));
        }
        if self.u_r.len() != self.u_h.len() {
            return Err(Error::arity(
                "demonstration robot controls",
                self.u_h.len(),
                self.u_r.len(),
            ));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::Domain(format!(
                "demonstration dt must be positive, got {}",
                self.dt
            )));
        }
        if self.human >= self.x0.humans.len() {
            return Err(Error::Lookup(format!("human {}", self.human)));
        }
        if self
            .u_h
            .controls()
            .iter()
            .chain(self.u_r.controls())
            .any(|u| !u.is_finite())
        {
            return Err(Error::InvalidState(
                "non-finite demonstration control".into(),
            ));
        }
        self.x0.validate()
    }
}

/// Parses one demonstration per non-blank line of JSON.
pub fn parse_demos(text: &str) -> Result<Vec<Demonstration>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let d: Demonstration = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        d.validate().map_err(|e| Error::Parse {
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(d);
    }
    Ok(out)
}

/// Serializes demonstrations one per line.
pub fn write_demos(demos: &[Demonstration]) -> String {
    demos
        .iter()
        .map(|d| serde_json::to_string(d).expect("demonstrations serialize") + "\n")
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrlOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Drop the gradient term, treating every demonstration as a stationary point.
    pub locally_optimal: bool,
    pub vehicle: VehicleParams,
    pub features: FeatureConfig,
}

impl Default for IrlOptions {
    fn default() -> Self {
        IrlOptions {
            tol: 1e-6,
            max_iter: 500,
            locally_optimal: false,
            vehicle: VehicleParams::default(),
            features: FeatureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IrlResult {
    pub theta: Weights,
    pub nll: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after each accepted iteration.
    pub history: Vec<f64>,
}

/// Per-feature totals of a demonstration: value, gradient and Hessian with
/// respect to the human controls.
#[derive(Debug, Clone)]
pub struct DemoTerms {
    pub phi: [f64; NF],
    pub grad: Vec<DVector<f64>>,
    pub hess: Vec<DMatrix<f64>>,
}

impl DemoTerms {
    pub fn new(demo: &Demonstration, opts: &IrlOptions) -> Result<DemoTerms> {
        demo.validate()?;
        let n = demo.u_h.len();
        let exo = Exogenous::new(&demo.x0, &demo.u_r, n, &opts.vehicle, demo.dt);
        let h0 = &demo.x0.humans[demo.human];
        let c = |v: f64| Jet::constant_n(n, v);
        let mut s = StateT {
            x: c(h0.state.x),
            y: c(h0.state.y),
            heading: c(h0.state.heading),
            speed: c(h0.state.speed),
        };
        let mut prev = c(h0.last_accel);
        let mut totals: Vec<Jet> = (0..NF).map(|_| c(0.0)).collect();
        for (k, u) in demo.u_h.controls().iter().enumerate() {
            let a = Jet::variable(n, k, u.accel);
            let phi = human_phi(
                &s,
                a.clone(),
                prev,
                &demo.info,
                &exo.robot[k],
                &exo.peds[k],
                &opts.features,
            );
            for (t, f) in totals.iter_mut().zip(phi) {
                *t = t.clone() + f;
            }
            s = step_generic(&s, a.clone(), u.steer, &opts.vehicle, demo.dt);
            prev = a;
        }
        let mut phi = [0.0; NF];
        let mut grad = Vec::with_capacity(NF);
        let mut hess = Vec::with_capacity(NF);
        for (f, t) in totals.into_iter().enumerate() {
            phi[f] = t.value();
            grad.push(DVector::from_vec(t.grad));
            let m = DMatrix::from_row_slice(n, n, &t.hess);
            hess.push((&m + m.transpose()) * 0.5);
        }
        Ok(DemoTerms { phi, grad, hess })
    }

    pub fn dim(&self) -> usize {
        self.grad[0].len()
    }

    pub fn cost(&self, theta: &[f64]) -> f64 {
        theta.iter().zip(&self.phi).map(|(t, p)| t * p).sum()
    }

    pub fn gradient(&self, theta: &[f64]) -> DVector<f64> {
        let mut g = DVector::zeros(self.dim());
        for (t, gf) in theta.iter().zip(&self.grad) {
            g.axpy(*t, gf, 1.0);
        }
        g
    }

    pub fn hessian(&self, theta: &[f64]) -> DMatrix<f64> {
        let n = self.dim();
        let mut h = DMatrix::zeros(n, n);
        for (t, hf) in theta.iter().zip(&self.hess) {
            h += hf * *t;
        }
        h
    }
}

/// Precomputed demonstration set.
#[derive(Debug, Clone)]
pub struct Problem {
    terms: Vec<DemoTerms>,
    locally_optimal: bool,
}

struct Eval {
    value: f64,
    grad: Option<[f64; NF]>,
}

impl Problem {
    pub fn new(demos: &[Demonstration], opts: &IrlOptions) -> Result<Problem> {
        if demos.is_empty() {
            return Err(Error::Domain(
                "at least one demonstration is required".into(),
            ));
        }
        let terms = demos
            .iter()
            .enumerate()
            .map(|(i, d)| {
                DemoTerms::new(d, opts).map_err(|e| Error::DegenerateDemo {
                    index: i,
                    msg: e.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Problem {
            terms,
            locally_optimal: opts.locally_optimal,
        })
    }

    pub fn terms(&self) -> &[DemoTerms] {
        &self.terms
    }

    fn eval(&self, theta: &[f64], with_grad: bool) -> Result<Eval> {
        if theta.len() != NF {
            return Err(Error::arity("human weights", NF, theta.len()));
        }
        let mut value = 0.0;
        let mut grad = [0.0; NF];
        for (i, t) in self.terms.iter().enumerate() {
            let n = t.dim();
            let mut h = t.hessian(theta);
            let lmin = h.clone().symmetric_eigenvalues().min();
            if !lmin.is_finite() {
                return Err(Error::DegenerateDemo {
                    index: i,
                    msg: "non-finite Hessian".into(),
                });
            }
            if lmin < 1e-8 {
                for k in 0..n {
                    h[(k, k)] += 1e-6;
                }
            }
            let chol = h.cholesky().ok_or_else(|| Error::DegenerateDemo {
                index: i,
                msg: format!(
                    "cost Hessian is not positive definite (smallest eigenvalue {lmin:.3e})"
                ),
            })?;
            let logdet = 2.0
                * chol
                    .l_dirty()
                    .diagonal()
                    .iter()
                    .map(|d| d.ln())
                    .sum::<f64>();
            let mut v = -0.5 * logdet + 0.5 * n as f64 * LN_2PI;
            let g = t.gradient(theta);
            let hinv_g = if self.locally_optimal {
                None
            } else {
                let x = chol.solve(&g);
                v += 0.5 * g.dot(&x);
                Some(x)
            };
            value += v;
            if with_grad {
                let hinv = chol.inverse();
                for f in 0..NF {
                    let mut d = -0.5 * hinv.component_mul(&t.hess[f]).sum();
                    if let Some(x) = &hinv_g {
                        d += t.grad[f].dot(x) - 0.5 * x.dot(&(&t.hess[f] * x));
                    }
                    grad[f] += d;
                }
            }
        }
        Ok(Eval {
            value,
            grad: with_grad.then_some(grad),
        })
    }

    pub fn nll(&self, theta: &Weights) -> Result<f64> {
        Ok(self.eval(theta.values(), false)?.value)
    }

    pub fn grad(&self, theta: &Weights) -> Result<Weights> {
        Ok(Weights(
            self.eval(theta.values(), true)?.grad.unwrap().to_vec(),
        ))
    }
}

/// Laplace negative log-likelihood of the demonstrations, summed in index order.
pub fn neg_log_likelihood(
    theta: &Weights,
    demos: &[Demonstration],
    opts: &IrlOptions,
) -> Result<f64> {
    Problem::new(demos, opts)?.nll(theta)
}

/// Analytic gradient of [`neg_log_likelihood`] with respect to θ.
pub fn grad_neg_log_likelihood(
    theta: &Weights,
    demos: &[Demonstration],
    opts: &IrlOptions,
) -> Result<Weights> {
    Problem::new(demos, opts)?.grad(theta)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Minimizes the negative log-likelihood by gradient descent with
/// Barzilai–Borwein trial steps and Armijo backtracking.
///
/// Points where some demonstration's Hessian is not positive definite count as
/// infeasible and are backtracked away from. The objective is non-increasing
/// across accepted iterations.
pub fn learn_weights(
    demos: &[Demonstration],
    theta0: &Weights,
    opts: &IrlOptions,
) -> Result<IrlResult> {
    if !theta0.is_finite() {
        return Err(Error::Domain("initial weights must be finite".into()));
    }
    let problem = Problem::new(demos, opts)?;
    let mut x = theta0.values().to_vec();
    let first = problem.eval(&x, true)?;
    let mut f = first.value;
    let mut g = first.grad.unwrap();
    let mut step = 1.0 / norm(&g).max(1.0);
    let mut iterations = 0;
    let mut history = Vec::new();

    while norm(&g) > opts.tol && iterations < opts.max_iter {
        let gg: f64 = g.iter().map(|v| v * v).sum();
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = x.iter().zip(&g).map(|(xi, gi)| xi - t * gi).collect();
            if let Ok(e) = problem.eval(&trial, false) {
                if e.value.is_finite() && e.value < f && e.value <= f - 1e-4 * t * gg {
                    accepted = Some((trial, e.value));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((xn, fn_)) = accepted else {
            log::debug!("line search stalled at iteration {iterations}");
            break;
        };
        let gn = problem.eval(&xn, true)?.grad.unwrap();
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|v| v * v).sum();
        step = if sy > 0.0 { ss / sy } else { t * 2.0 };
        history.push(fn_);
        x = xn;
        f = fn_;
        g = gn;
        iterations += 1;
        log::trace!(
            "irl iteration {iterations}: nll {f:.12e}, |grad| {:.3e}",
            norm(&g)
        );
    }
    let grad_norm = norm(&g);
    Ok(IrlResult {
        theta: Weights(x),
        nll: f,
        grad_norm,
        iterations,
        converged: grad_norm <= opts.tol,
        history,
    })
}

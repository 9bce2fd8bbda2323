//! Constrained minimization through smooth reparameterization, finite
//! differences, and Hessian-based inference.
//!
//! Objectives are always written in the constrained (natural) parameter
//! space. [`minimize`] maps them onto an unconstrained space through a
//! [`Transform`] and runs BFGS there with central-difference gradients.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};

/// Base relative step for first derivatives, `eps^(1/3)`.
pub fn gradient_step() -> f64 {
    f64::EPSILON.cbrt()
}

/// Base relative step for second derivatives, `eps^(1/4)`.
pub fn hessian_step() -> f64 {
    f64::EPSILON.powf(0.25)
}

/// Bijection between an unconstrained vector and the feasible region.
pub trait Transform: Send + Sync {
    fn constrain(&self, unconstrained: &[f64]) -> Vec<f64>;
    fn unconstrain(&self, constrained: &[f64]) -> Vec<f64>;
}

/// No constraints.
#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Transform for Identity {
    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        u.to_vec()
    }
    fn unconstrain(&self, x: &[f64]) -> Vec<f64> {
        x.to_vec()
    }
}

/// One contiguous group of parameters and its constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Block {
    /// `n` unrestricted parameters.
    Free(usize),
    /// One parameter `> 0` (log map).
    Positive,
    /// One parameter in `(lower, upper)` (logistic map).
    Interval { lower: f64, upper: f64 },
    /// Two parameters `x, y ≥ 0` with `x + y < bound`. Mapped as a total
    /// `x + y = bound·σ(u₀)` and a share `x / (x + y) = σ(u₁)`.
    SimplexPair { bound: f64 },
}

impl Block {
    fn width(&self) -> usize {
        match self {
            Block::Free(n) => *n,
            Block::Positive | Block::Interval { .. } => 1,
            Block::SimplexPair { .. } => 2,
        }
    }
}

/// A parameter vector described as a sequence of [`Block`]s.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamTransform {
    blocks: Vec<Block>,
}

impl ParamTransform {
    pub fn new(blocks: Vec<Block>) -> Self {
        Self { blocks }
    }

    pub fn dimension(&self) -> usize {
        self.blocks.iter().map(Block::width).sum()
    }
}

pub fn logistic(u: f64) -> f64 {
    if u >= 0.0 {
        1.0 / (1.0 + (-u).exp())
    } else {
        let e = u.exp();
        e / (1.0 + e)
    }
}

pub fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Keeps inverse maps finite when a parameter sits exactly on the boundary.
fn clamp_open(p: f64) -> f64 {
    p.clamp(1e-12, 1.0 - 1e-12)
}

impl Transform for ParamTransform {
    fn constrain(&self, u: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(u.len());
        let mut k = 0;
        for block in &self.blocks {
            match *block {
                Block::Free(n) => out.extend_from_slice(&u[k..k + n]),
                Block::Positive => out.push(u[k].exp()),
                Block::Interval { lower, upper } => {
                    out.push(lower + (upper - lower) * logistic(u[k]))
                }
                Block::SimplexPair { bound } => {
                    let total = bound * logistic(u[k]);
                    let share = logistic(u[k + 1]);
                    out.push(total * share);
                    out.push(total * (1.0 - share));
                }
            }
            k += block.width();
        }
        out
    }

    fn unconstrain(&self, x: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(x.len());
        let mut k = 0;
        for block in &self.blocks {
            match *block {
                Block::Free(n) => out.extend_from_slice(&x[k..k + n]),
                Block::Positive => out.push(x[k].max(f64::MIN_POSITIVE).ln()),
                Block::Interval { lower, upper } => {
                    out.push(logit(clamp_open((x[k] - lower) / (upper - lower))))
                }
                Block::SimplexPair { bound } => {
                    let total = x[k] + x[k + 1];
                    out.push(logit(clamp_open(total / bound)));
                    let share = if total > 0.0 { x[k] / total } else { 0.5 };
                    out.push(logit(clamp_open(share)));
                }
            }
            k += block.width();
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Euclidean norm of the unconstrained gradient at which the run counts
    /// as converged.
    pub gradient: f64,
    /// Stop once a full iteration moves the unconstrained point by less than
    /// this (relative, infinity norm).
    pub step: f64,
    pub max_iterations: usize,
    /// Relative finite-difference step; `None` means `eps^(1/3)`.
    pub fd_step: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            gradient: 1e-6,
            step: 1e-9,
            max_iterations: 2000,
            fd_step: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Termination {
    GradientTolerance,
    StepTolerance,
    IterationLimit,
    LineSearchFailure,
    NonFiniteGradient,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct OptimResult {
    /// Optimum in the constrained space.
    pub point: Vec<f64>,
    pub objective_value: f64,
    pub converged: bool,
    pub iterations: usize,
    /// Norm of the gradient in the unconstrained space.
    pub gradient_norm: f64,
    pub termination: Termination,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Central-difference gradient; on failure returns the offending probe.
fn central_gradient<F>(f: &F, x: &[f64], base: f64) -> std::result::Result<Vec<f64>, (usize, Vec<f64>)>
where
    F: Fn(&[f64]) -> f64 + ?Sized,
{
    let mut probe = x.to_vec();
    let mut grad = vec![0.0; x.len()];
    for i in 0..x.len() {
        let h = base * (1.0 + x[i].abs());
        probe[i] = x[i] + h;
        let fp = f(&probe);
        if !fp.is_finite() {
            return Err((i, probe));
        }
        probe[i] = x[i] - h;
        let fm = f(&probe);
        if !fm.is_finite() {
            return Err((i, probe));
        }
        probe[i] = x[i];
        grad[i] = (fp - fm) / (2.0 * h);
    }
    Ok(grad)
}

/// Central-difference gradient with per-coordinate step
/// `step·(1 + |xᵢ|)`; `step` defaults to `eps^(1/3)`.
pub fn numerical_gradient<F>(objective: F, point: &[f64], step: Option<f64>) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let base = step.unwrap_or_else(gradient_step);
    central_gradient(&objective, point, base).map_err(|(index, probe)| Error::NonFiniteProbe { index, probe })
}

/// Central-difference Hessian, symmetrized. `step` defaults to `eps^(1/4)`.
pub fn numerical_hessian<F>(objective: F, point: &[f64], step: Option<f64>) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> f64,
{
    let base = step.unwrap_or_else(hessian_step);
    let n = point.len();
    let h: Vec<f64> = point.iter().map(|x| base * (1.0 + x.abs())).collect();
    let mut probe = point.to_vec();
    let eval = |probe: &[f64], index: usize| -> Result<f64> {
        let v = objective(probe);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteProbe {
                index,
                probe: probe.to_vec(),
            })
        }
    };
    let f0 = eval(&probe, 0)?;
    let mut hess = DMatrix::zeros(n, n);
    for i in 0..n {
        probe[i] = point[i] + h[i];
        let fp = eval(&probe, i)?;
        probe[i] = point[i] - h[i];
        let fm = eval(&probe, i)?;
        probe[i] = point[i];
        hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h[i] * h[i]);
        for j in 0..i {
            let mut corner = |si: f64, sj: f64| -> Result<f64> {
                probe[i] = point[i] + si * h[i];
                probe[j] = point[j] + sj * h[j];
                let v = eval(&probe, i);
                probe[i] = point[i];
                probe[j] = point[j];
                v
            };
            let fpp = corner(1.0, 1.0)?;
            let fpm = corner(1.0, -1.0)?;
            let fmp = corner(-1.0, 1.0)?;
            let fmm = corner(-1.0, -1.0)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * h[i] * h[j]);
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok((&hess + hess.transpose()) * 0.5)
}

/// Estimates with standard errors from the inverse observed information.
#[derive(Debug, Clone, serde::Serialize)]
pub struct InferenceResult {
    pub estimates: Vec<f64>,
    pub standard_errors: Vec<f64>,
    pub t_statistics: Vec<f64>,
    #[serde(skip)]
    pub covariance: DMatrix<f64>,
}

impl InferenceResult {
    pub fn from_covariance(estimates: Vec<f64>, covariance: DMatrix<f64>) -> Self {
        let standard_errors: Vec<f64> = (0..estimates.len())
            .map(|i| covariance[(i, i)].max(0.0).sqrt())
            .collect();
        let t_statistics = estimates
            .iter()
            .zip(&standard_errors)
            .map(|(e, s)| e / s)
            .collect();
        Self {
            estimates,
            standard_errors,
            t_statistics,
            covariance,
        }
    }

    /// Two-sided p-values against the standard normal.
    pub fn p_values(&self) -> Vec<f64> {
        self.t_statistics.iter().map(|&t| two_sided_p(t)).collect()
    }

    /// Re-expresses the inference for the parameters `scale[i] · xᵢ`.
    pub fn rescaled(&self, estimates: Vec<f64>, scale: &[f64]) -> Self {
        let n = scale.len();
        let cov = DMatrix::from_fn(n, n, |i, j| self.covariance[(i, j)] * scale[i] * scale[j]);
        Self::from_covariance(estimates, cov)
    }

    /// Keeps only the listed parameters.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let est = indices.iter().map(|&i| self.estimates[i]).collect();
        let cov = DMatrix::from_fn(indices.len(), indices.len(), |a, b| {
            self.covariance[(indices[a], indices[b])]
        });
        Self::from_covariance(est, cov)
    }
}

pub fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

pub fn two_sided_p(t: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { f64::NAN } else { 0.0 };
    }
    libm::erfc(t.abs() / std::f64::consts::SQRT_2)
}

fn invert_information(hess: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let (min_eig, max_eig) = crate::linalg::eigen_range(hess);
    let singular = || Error::SingularInformation {
        min_eigenvalue: min_eig,
        max_eigenvalue: max_eig,
    };
    if !(min_eig > 0.0) || min_eig < 1e-12 * max_eig.abs() {
        return Err(singular());
    }
    let chol = hess.clone().cholesky().ok_or_else(singular)?;
    Ok(chol.inverse())
}

/// Plain inverse-observed-information standard errors. `objective` is the
/// full negative log-likelihood in the constrained parameterization.
pub fn standard_errors<F>(objective: F, point: &[f64]) -> Result<InferenceResult>
where
    F: Fn(&[f64]) -> f64,
{
    let hess = numerical_hessian(objective, point, None)?;
    let cov = invert_information(&hess)?;
    Ok(InferenceResult::from_covariance(point.to_vec(), cov))
}

/// Sandwich (QML-robust) standard errors `H⁻¹ (Σ gₜgₜᵀ) H⁻¹`, where
/// `contributions` returns the per-observation negative log-likelihood terms.
pub fn sandwich_standard_errors<F>(contributions: F, point: &[f64]) -> Result<InferenceResult>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let total = |x: &[f64]| contributions(x).iter().sum::<f64>();
    let hess = numerical_hessian(total, point, None)?;
    let h_inv = invert_information(&hess)?;
    let k = point.len();
    let base = gradient_step();
    let mut probe = point.to_vec();
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(k);
    for i in 0..k {
        let h = base * (1.0 + point[i].abs());
        probe[i] = point[i] + h;
        let plus = contributions(&probe);
        probe[i] = point[i] - h;
        let minus = contributions(&probe);
        probe[i] = point[i];
        if plus.iter().chain(&minus).any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteProbe {
                index: i,
                probe: probe.clone(),
            });
        }
        scores.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect());
    }
    let nobs = scores.first().map_or(0, Vec::len);
    let meat = DMatrix::from_fn(k, k, |a, b| (0..nobs).map(|t| scores[a][t] * scores[b][t]).sum());
    let cov = &h_inv * meat * &h_inv;
    Ok(InferenceResult::from_covariance(point.to_vec(), cov))
}

/// BFGS in the unconstrained space of `transform`, with Armijo backtracking.
/// Reaching the iteration cap is reported through `converged = false`, not as
/// an error.
pub fn minimize<F>(
    objective: F,
    init: &[f64],
    transform: &dyn Transform,
    tol: &Tolerances,
) -> Result<OptimResult>
where
    F: Fn(&[f64]) -> f64,
{
    let eval = |u: &[f64]| -> f64 {
        let v = objective(&transform.constrain(u));
        if v.is_finite() {
            v
        } else {
            f64::INFINITY
        }
    };
    let base = tol.fd_step.unwrap_or_else(gradient_step);
    let n = init.len();
    let mut u = transform.unconstrain(init);
    let mut f = eval(&u);
    if !f.is_finite() {
        return Err(Error::NonFinite(format!(
            "objective is not finite at the initial point {init:?}"
        )));
    }
    let finish = |u: &[f64], f: f64, iterations: usize, gnorm: f64, termination: Termination| OptimResult {
        point: transform.constrain(u),
        objective_value: f,
        converged: termination == Termination::GradientTolerance,
        iterations,
        gradient_norm: gnorm,
        termination,
    };
    let mut g = match central_gradient(&eval, &u, base) {
        Ok(g) => g,
        Err(_) => return Ok(finish(&u, f, 0, f64::NAN, Termination::NonFiniteGradient)),
    };
    let mut h_inv = DMatrix::<f64>::identity(n, n);
    let mut fresh = true;
    let mut scaled = false;

    for iter in 0..tol.max_iterations {
        let gnorm = norm(&g);
        if gnorm <= tol.gradient {
            return Ok(finish(&u, f, iter, gnorm, Termination::GradientTolerance));
        }
        let gv = nalgebra::DVector::from_column_slice(&g);
        let mut d: Vec<f64> = (-(&h_inv * &gv)).iter().copied().collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h_inv.fill_with_identity();
            fresh = true;
            scaled = false;
            d = g.iter().map(|x| -x).collect();
            slope = -gnorm * gnorm;
        }
        let mut alpha = if fresh && !scaled {
            (1.0 / d.iter().fold(0.0_f64, |m, x| m.max(x.abs()))).min(1.0)
        } else {
            1.0
        };

        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<f64> = u.iter().zip(&d).map(|(a, b)| a + alpha * b).collect();
            let ft = eval(&trial);
            if ft.is_finite() && ft <= f + 1e-4 * alpha * slope {
                accepted = Some((trial, ft));
                break;
            }
            let next = if ft.is_finite() {
                let denom = 2.0 * (ft - f - slope * alpha);
                if denom > 0.0 {
                    -slope * alpha * alpha / denom
                } else {
                    0.5 * alpha
                }
            } else {
                0.25 * alpha
            };
            alpha = next.clamp(0.1 * alpha, 0.5 * alpha);
        }

        let Some((u_new, f_new)) = accepted else {
            if !fresh {
                h_inv.fill_with_identity();
                fresh = true;
                scaled = false;
                continue;
            }
            return Ok(finish(&u, f, iter, gnorm, Termination::LineSearchFailure));
        };

        let g_new = match central_gradient(&eval, &u_new, base) {
            Ok(g) => g,
            Err(_) => {
                return Ok(finish(&u_new, f_new, iter + 1, f64::NAN, Termination::NonFiniteGradient))
            }
        };
        let s: Vec<f64> = u_new.iter().zip(&u).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let u_scale = 1.0 + u_new.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        let step_size = s.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        u = u_new;
        f = f_new;
        g = g_new;
        if step_size <= tol.step * u_scale {
            let gnorm = norm(&g);
            let termination = if gnorm <= tol.gradient {
                Termination::GradientTolerance
            } else {
                Termination::StepTolerance
            };
            return Ok(finish(&u, f, iter + 1, gnorm, termination));
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 * norm(&s) * norm(&y) {
            if !scaled {
                let yy = dot(&y, &y);
                h_inv = DMatrix::identity(n, n) * (sy / yy);
                scaled = true;
            }
            let rho = 1.0 / sy;
            let sv = nalgebra::DVector::from_column_slice(&s);
            let yv = nalgebra::DVector::from_column_slice(&y);
            let hy = &h_inv * &yv;
            let yhy = yv.dot(&hy);
            // H ← H − ρ(H y sᵀ + s yᵀ H) + (ρ² yᵀHy + ρ) s sᵀ
            h_inv -= (&hy * sv.transpose() + &sv * hy.transpose()) * rho;
            h_inv += (&sv * sv.transpose()) * (rho * rho * yhy + rho);
            fresh = false;
        }
    }
    let gnorm = norm(&g);
    let termination = if gnorm <= tol.gradient {
        Termination::GradientTolerance
    } else {
        Termination::IterationLimit
    };
    Ok(finish(&u, f, tol.max_iterations, gnorm, termination))
}

/// Runs [`minimize`] from every starting point (in parallel) and returns the
/// best run together with all runs in input order. Ties resolve to the
/// earliest start. Starts at which the objective is not finite are skipped;
/// it is an error only if every start is unusable.
pub fn minimize_multistart<F>(
    objective: F,
    inits: &[Vec<f64>],
    transform: &dyn Transform,
    tol: &Tolerances,
) -> Result<(OptimResult, Vec<Result<OptimResult>>)>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    let runs: Vec<Result<OptimResult>> = inits
        .par_iter()
        .map(|init| minimize(&objective, init, transform, tol))
        .collect();
    let mut best: Option<&OptimResult> = None;
    for run in runs.iter().flatten() {
        let better = match best {
            None => true,
            Some(b) => {
                // converged runs beat non-converged ones at equal objective
                run.objective_value < b.objective_value
                    || (run.objective_value == b.objective_value && run.converged && !b.converged)
            }
        };
        if better {
            best = Some(run);
        }
    }
    match best.cloned() {
        Some(b) => Ok((b, runs)),
        None => Err(Error::NonFinite(
            "objective is not finite at any starting point".into(),
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quadratic_unconstrained() {
        let res = minimize(|x| (x[0] - 3.0).powi(2), &[0.0], &Identity, &Tolerances::default()).unwrap();
        assert!(res.converged);
        assert!((res.point[0] - 3.0).abs() < 1e-8, "{res:?}");
    }

    #[test]
    fn positivity_transform_reaches_boundary() {
        let transform = ParamTransform::new(vec![Block::Positive]);
        let tol = Tolerances {
            gradient: 1e-9,
            ..Tolerances::default()
        };
        let res = minimize(|x| x[0] * x[0], &[1.0], &transform, &tol).unwrap();
        assert!(res.converged, "{res:?}");
        assert!(res.point[0] > 0.0 && res.point[0] < 1e-4, "{res:?}");
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let tol = Tolerances {
            gradient: 1e-9,
            ..Tolerances::default()
        };
        let res = minimize(f, &[-1.2, 1.0], &Identity, &tol).unwrap();
        assert!((res.point[0] - 1.0).abs() < 1e-6, "{res:?}");
        assert!((res.point[1] - 1.0).abs() < 1e-6, "{res:?}");
    }

    #[test]
    fn result_never_worse_than_start() {
        let f = |x: &[f64]| (x[0].sin() + 0.1 * x[0] * x[0]) * (1.0 + x[1] * x[1]);
        for start in [[-3.0, 1.0], [0.5, -2.0], [4.0, 0.0]] {
            let res = minimize(f, &start, &Identity, &Tolerances::default()).unwrap();
            assert!(res.objective_value <= f(&start));
        }
    }

    #[test]
    fn non_finite_start_is_an_error() {
        let err = minimize(|x| x[0].ln(), &[-1.0], &Identity, &Tolerances::default());
        assert!(err.is_err());
    }

    #[test]
    fn iteration_cap_is_not_an_error() {
        let f = |x: &[f64]| 100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2);
        let tol = Tolerances {
            max_iterations: 3,
            ..Tolerances::default()
        };
        let res = minimize(f, &[-1.2, 1.0], &Identity, &tol).unwrap();
        assert!(!res.converged);
        assert_eq!(res.termination, Termination::IterationLimit);
    }

    #[test]
    fn multistart_picks_lowest() {
        let f = |x: &[f64]| (x[0] * x[0] - 1.0).powi(2) + 0.1 * x[0];
        let (best, runs) =
            minimize_multistart(f, &[vec![2.0], vec![-2.0]], &Identity, &Tolerances::default()).unwrap();
        assert_eq!(runs.len(), 2);
        assert!(best.point[0] < 0.0);
    }

    #[test]
    fn hessian_of_quadratic_form() {
        let a = DMatrix::from_row_slice(3, 3, &[2.0, 0.5, -0.3, 0.5, 1.0, 0.2, -0.3, 0.2, 3.0]);
        let f = |x: &[f64]| {
            let v = nalgebra::DVector::from_column_slice(x);
            (v.transpose() * &a * &v)[(0, 0)]
        };
        let h = numerical_hessian(f, &[0.3, -1.2, 0.7], None).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                assert!((h[(i, j)] - 2.0 * a[(i, j)]).abs() < 1e-5);
                assert_eq!(h[(i, j)], h[(j, i)]);
            }
        }
    }

    #[test]
    fn gradient_of_sum_of_squares() {
        let g = numerical_gradient(|x: &[f64]| x.iter().map(|v| v * v).sum(), &[1.0, 2.0], None).unwrap();
        assert!((g[0] - 2.0).abs() < 1e-7);
        assert!((g[1] - 4.0).abs() < 1e-7);
    }

    #[test]
    fn gradient_reports_offending_probe() {
        let err = numerical_gradient(|x: &[f64]| x[1].sqrt(), &[1.0, 0.0], None).unwrap_err();
        match err {
            Error::NonFiniteProbe { index, probe } => {
                assert_eq!(index, 1);
                assert!(probe[1] < 0.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gaussian_mean_standard_error() {
        let data: Vec<f64> = (0..400).map(|i| ((i * 37 % 101) as f64 - 50.0) / 10.0).collect();
        let sigma = 2.0;
        let nll = |x: &[f64]| data.iter().map(|d| 0.5 * ((d - x[0]) / sigma).powi(2)).sum::<f64>();
        let mean = crate::linalg::mean(&data);
        let inf = standard_errors(nll, &[mean]).unwrap();
        let expected = sigma / (data.len() as f64).sqrt();
        assert!((inf.standard_errors[0] / expected - 1.0).abs() < 0.01);
        assert!((inf.t_statistics[0] - mean / inf.standard_errors[0]).abs() < 1e-12);
    }

    #[test]
    fn flat_objective_is_singular() {
        let err = standard_errors(|_x: &[f64]| 1.0, &[0.5, 0.5]).unwrap_err();
        assert!(err.to_string().contains("information matrix singular near optimum"));
    }

    #[test]
    fn sandwich_matches_plain_for_gaussian_mean() {
        let data: Vec<f64> = (0..500).map(|i| ((i * 53 % 97) as f64 - 48.0) / 20.0).collect();
        let var = crate::linalg::population_variance(&data);
        let contrib = |x: &[f64]| data.iter().map(|d| 0.5 * (d - x[0]).powi(2) / var).collect::<Vec<_>>();
        let mean = crate::linalg::mean(&data);
        let sandwich = sandwich_standard_errors(contrib, &[mean]).unwrap();
        let plain = standard_errors(|x: &[f64]| contrib(x).iter().sum(), &[mean]).unwrap();
        assert!((sandwich.standard_errors[0] / plain.standard_errors[0] - 1.0).abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn transform_round_trip(
            free in -50.0f64..50.0,
            pos in 1e-6f64..1e3,
            interval in 0.011f64..0.989,
            total in 0.01f64..0.98,
            share in 0.01f64..0.99,
        ) {
            let t = ParamTransform::new(vec![
                Block::Free(1),
                Block::Positive,
                Block::Interval { lower: 0.0, upper: 1.0 },
                Block::SimplexPair { bound: 0.9999 },
            ]);
            let x = vec![free, pos, interval, total * share, total * (1.0 - share)];
            let back = t.constrain(&t.unconstrain(&x));
            for (a, b) in x.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()), "{a} vs {b}");
            }
        }
    }
}

//! Full BEKK-GARCH(1,1) by Gaussian QML and spillover-direction inference.
//!
//! Convention used throughout:
//!
//! ```text
//! H_t = C Cᵀ + Aᵀ ε_{t−1} ε_{t−1}ᵀ A + Bᵀ H_{t−1} B
//! ```
//!
//! so `h_ii,t` contains `(Σ_k a_ki ε_k,t−1)²`: the entry `a[j][i]` (and
//! likewise `b[j][i]`) carries the effect of market `j` on the variance of
//! market `i`. Printed coefficient tables written with the opposite
//! convention (`A ε εᵀ Aᵀ`) are the transpose of this one.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::garch::{fit_garch11, GarchConfig};
use crate::linalg::{cholesky_in_place, cholesky_quad_form, population_covariance};
use crate::optim::{
    minimize_multistart, standard_errors, two_sided_p, Identity, InferenceResult, OptimResult, Tolerances,
};
use crate::panel::ReturnPanel;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Largest system fitted without `force`.
pub const MAX_SERIES: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct BekkParams {
    /// Lower triangular with positive diagonal.
    pub c: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

impl BekkParams {
    pub fn dim(&self) -> usize {
        self.c.nrows()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.c.nrows();
        for (name, m) in [("C", &self.c), ("A", &self.a), ("B", &self.b)] {
            if m.shape() != (n, n) {
                return Err(Error::InvalidParameters(format!("{name} must be {n}x{n}")));
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidParameters(format!("{name} has non-finite entries")));
            }
        }
        for i in 0..n {
            if !(self.c[(i, i)] > 0.0) {
                return Err(Error::InvalidParameters("C must have a positive diagonal".into()));
            }
            for j in (i + 1)..n {
                if self.c[(i, j)] != 0.0 {
                    return Err(Error::InvalidParameters("C must be lower triangular".into()));
                }
            }
        }
        Ok(())
    }

    /// Puts the parameters in the sign-normalized representative:
    /// `a[0][0] ≥ 0`, `b[0][0] ≥ 0`, positive diagonal of `C`.
    pub fn normalized(mut self) -> Self {
        if self.a[(0, 0)] < 0.0 {
            self.a.neg_mut();
        }
        if self.b[(0, 0)] < 0.0 {
            self.b.neg_mut();
        }
        let n = self.dim();
        for k in 0..n {
            if self.c[(k, k)] < 0.0 {
                for i in k..n {
                    self.c[(i, k)] = -self.c[(i, k)];
                }
            }
        }
        self
    }

    /// Spectral radius of `A ⊗ A + B ⊗ B`; values ≥ 1 mean the fitted
    /// covariance recursion is not covariance stationary.
    pub fn persistence_radius(&self) -> f64 {
        let m = self.a.kronecker(&self.a) + self.b.kronecker(&self.b);
        m.complex_eigenvalues()
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// `vec(H̄)` solving `H̄ = CCᵀ + AᵀH̄A + BᵀH̄B`, if the system is
    /// stationary.
    pub fn unconditional_covariance(&self) -> Option<DMatrix<f64>> {
        let n = self.dim();
        let cc = &self.c * self.c.transpose();
        // vec(AᵀHA) = (Aᵀ ⊗ Aᵀ) vec(H) for column-major vec
        let at = self.a.transpose();
        let bt = self.b.transpose();
        let m = DMatrix::identity(n * n, n * n) - at.kronecker(&at) - bt.kronecker(&bt);
        let v = m.lu().solve(&nalgebra::DVector::from_column_slice(cc.as_slice()))?;
        Some(DMatrix::from_column_slice(n, n, v.as_slice()))
    }
}

/// Number of free parameters in the full model.
pub fn parameter_count(n: usize) -> usize {
    n * (n + 1) / 2 + 2 * n * n
}

/// Conditional covariance path. `H_1` is the sample covariance of the
/// residuals.
pub fn bekk_filter(params: &BekkParams, residuals: &DMatrix<f64>) -> Result<Vec<DMatrix<f64>>> {
    params.validate()?;
    let n = params.dim();
    if residuals.ncols() != n {
        return Err(Error::InvalidInput(format!(
            "residual matrix has {} columns, parameters are {n}x{n}",
            residuals.ncols()
        )));
    }
    let cc = &params.c * params.c.transpose();
    let h0 = population_covariance(residuals);
    let mut path = Vec::with_capacity(residuals.nrows());
    let mut h = h0;
    for t in 0..residuals.nrows() {
        if t > 0 {
            let e = residuals.row(t - 1).transpose();
            let v = params.a.transpose() * e;
            h = &cc + &v * v.transpose() + params.b.transpose() * &h * &params.b;
        }
        path.push(h.clone());
    }
    Ok(path)
}

/// Row-major flattening.
fn flat(m: &DMatrix<f64>) -> Vec<f64> {
    let (r, c) = m.shape();
    (0..r * c).map(|k| m[(k / c, k % c)]).collect()
}

/// `½ Σ [N ln 2π + ln|H_t| + ε_tᵀ H_t⁻¹ ε_t]` on flat row-major buffers.
/// `∞` if any `H_t` is not positive definite.
fn nll_flat(cc: &[f64], a: &[f64], b: &[f64], eps: &[f64], n: usize, h0: &[f64]) -> f64 {
    let t_len = eps.len() / n;
    let mut h = h0.to_vec();
    let mut hb = vec![0.0; n * n];
    let mut chol = vec![0.0; n * n];
    let mut v = vec![0.0; n];
    let mut work = vec![0.0; n];
    let mut total = 0.0;
    for t in 0..t_len {
        if t > 0 {
            let e = &eps[(t - 1) * n..t * n];
            for i in 0..n {
                v[i] = (0..n).map(|k| a[k * n + i] * e[k]).sum();
            }
            for i in 0..n {
                for j in 0..n {
                    hb[i * n + j] = (0..n).map(|k| h[i * n + k] * b[k * n + j]).sum();
                }
            }
            for i in 0..n {
                for j in 0..=i {
                    let bhb: f64 = (0..n).map(|k| b[k * n + i] * hb[k * n + j]).sum();
                    let val = cc[i * n + j] + v[i] * v[j] + bhb;
                    h[i * n + j] = val;
                    h[j * n + i] = val;
                }
            }
        }
        chol.copy_from_slice(&h);
        let Some(log_det) = cholesky_in_place(&mut chol, n) else {
            return f64::INFINITY;
        };
        let quad = cholesky_quad_form(&chol, n, &eps[t * n..(t + 1) * n], &mut work);
        total += 0.5 * (n as f64 * LN_2PI + log_det + quad);
    }
    if total.is_finite() {
        total
    } else {
        f64::INFINITY
    }
}

/// Gaussian negative log-likelihood of `params` on `residuals`.
pub fn bekk_nll(params: &BekkParams, residuals: &DMatrix<f64>) -> f64 {
    let n = params.dim();
    let cc = &params.c * params.c.transpose();
    let h0 = population_covariance(residuals);
    nll_flat(&flat(&cc), &flat(&params.a), &flat(&params.b), &flat(residuals), n, &flat(&h0))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BekkConfig {
    /// Restrict `A` and `B` to be diagonal.
    pub diagonal: bool,
    /// Replace `C` by the value implied by the sample covariance.
    pub variance_targeting: bool,
    /// Jittered starts in addition to the deterministic ones.
    pub restarts: usize,
    pub seed: u64,
    /// Allow more than [`MAX_SERIES`] series.
    pub force: bool,
    #[serde(skip)]
    pub tolerances: Tolerances,
}

impl Default for BekkConfig {
    fn default() -> Self {
        Self {
            diagonal: false,
            variance_targeting: false,
            restarts: 5,
            seed: 20_210_121,
            force: false,
            tolerances: Tolerances::default(),
        }
    }
}

/// How a packed parameter vector maps onto `(C, A, B)`.
#[derive(Debug, Clone, Copy)]
struct Layout {
    n: usize,
    diagonal: bool,
    targeting: bool,
}

impl Layout {
    fn c_len(&self) -> usize {
        if self.targeting {
            0
        } else {
            self.n * (self.n + 1) / 2
        }
    }

    fn ab_len(&self) -> usize {
        if self.diagonal {
            self.n
        } else {
            self.n * self.n
        }
    }

    fn len(&self) -> usize {
        self.c_len() + 2 * self.ab_len()
    }

    fn labels(&self) -> Vec<String> {
        let n = self.n;
        let mut out = Vec::new();
        if !self.targeting {
            for i in 0..n {
                for j in 0..=i {
                    out.push(format!("C({},{})", i + 1, j + 1));
                }
            }
        }
        for m in ["A", "B"] {
            for i in 0..n {
                for j in 0..n {
                    if !self.diagonal || i == j {
                        out.push(format!("{m}({},{})", i + 1, j + 1));
                    }
                }
            }
        }
        out
    }

    /// Flat row-major `(A, B)` from the packed vector.
    fn unpack_ab(&self, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.n;
        let off = self.c_len();
        let m = self.ab_len();
        let expand = |s: &[f64]| {
            if self.diagonal {
                let mut v = vec![0.0; n * n];
                for i in 0..n {
                    v[i * n + i] = s[i];
                }
                v
            } else {
                s.to_vec()
            }
        };
        (expand(&x[off..off + m]), expand(&x[off + m..off + 2 * m]))
    }

    fn unpack_c(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut c = vec![0.0; n * n];
        let mut k = 0;
        for i in 0..n {
            for j in 0..=i {
                c[i * n + j] = x[k];
                k += 1;
            }
        }
        c
    }

    fn pack(&self, p: &BekkParams) -> Vec<f64> {
        let n = self.n;
        let mut x = Vec::with_capacity(self.len());
        if !self.targeting {
            for i in 0..n {
                for j in 0..=i {
                    x.push(p.c[(i, j)]);
                }
            }
        }
        for m in [&p.a, &p.b] {
            for i in 0..n {
                for j in 0..n {
                    if !self.diagonal || i == j {
                        x.push(m[(i, j)]);
                    }
                }
            }
        }
        x
    }
}

fn to_matrix(v: &[f64], n: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(n, n, v)
}

/// `CCᵀ = S − AᵀSA − BᵀSB`, `None` unless positive definite.
fn targeted_cc(s: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let cc = s - a.transpose() * s * a - b.transpose() * s * b;
    cc.clone().cholesky().map(|_| cc)
}

/// Everything the objective needs, on the standardized residuals.
struct Problem {
    layout: Layout,
    eps: Vec<f64>,
    h0: Vec<f64>,
    sample_cov: DMatrix<f64>,
}

impl Problem {
    fn nll(&self, x: &[f64]) -> f64 {
        let n = self.layout.n;
        let (a, b) = self.layout.unpack_ab(x);
        let cc = if self.layout.targeting {
            match targeted_cc(&self.sample_cov, &to_matrix(&a, n), &to_matrix(&b, n)) {
                Some(cc) => flat(&cc),
                None => return f64::INFINITY,
            }
        } else {
            let c = to_matrix(&self.layout.unpack_c(x), n);
            flat(&(&c * c.transpose()))
        };
        nll_flat(&cc, &a, &b, &self.eps, n, &self.h0)
    }

    fn params(&self, x: &[f64]) -> BekkParams {
        let n = self.layout.n;
        let (a, b) = self.layout.unpack_ab(x);
        let (a, b) = (to_matrix(&a, n), to_matrix(&b, n));
        let c = if self.layout.targeting {
            targeted_cc(&self.sample_cov, &a, &b)
                .and_then(|cc| cc.cholesky().map(|ch| ch.l()))
                .unwrap_or_else(|| DMatrix::from_diagonal_element(n, n, f64::NAN))
        } else {
            to_matrix(&self.layout.unpack_c(x), n)
        };
        BekkParams { c, a, b }
    }

    /// Starting parameters from diagonal `A`, `B`, with `C` implied by the
    /// sample covariance where possible.
    fn start(&self, a: DMatrix<f64>, b: DMatrix<f64>) -> Vec<f64> {
        let n = self.layout.n;
        let c = targeted_cc(&self.sample_cov, &a, &b)
            .and_then(|cc| cc.cholesky().map(|ch| ch.l()))
            .unwrap_or_else(|| {
                let d = DMatrix::from_fn(n, n, |i, j| if i == j { 0.05 * self.sample_cov[(i, i)] } else { 0.0 });
                d.cholesky().expect("positive diagonal").l()
            });
        self.layout.pack(&BekkParams { c, a, b })
    }
}

#[derive(Debug, Clone)]
pub struct BekkFit {
    pub names: Vec<String>,
    pub params: BekkParams,
    pub residuals: DMatrix<f64>,
    pub cov_path: Vec<DMatrix<f64>>,
    pub loglik: f64,
    /// Labels (`C(i,j)`, `A(i,j)`, `B(i,j)`, 1-based) aligned with
    /// `inference`.
    pub labels: Vec<String>,
    pub inference: Option<InferenceResult>,
    pub optim: OptimResult,
    pub diagonal: bool,
    pub warnings: Vec<String>,
}

impl BekkFit {
    /// Point estimate for a label such as `"A(2,1)"`, with or without
    /// standard errors.
    pub fn estimate(&self, label: &str) -> Option<f64> {
        let (kind, rest) = label.split_at_checked(1)?;
        let (i, j) = rest.strip_prefix('(')?.strip_suffix(')')?.split_once(',')?;
        let (i, j) = (i.parse::<usize>().ok()?.checked_sub(1)?, j.parse::<usize>().ok()?.checked_sub(1)?);
        let m = match kind {
            "C" => &self.params.c,
            "A" => &self.params.a,
            "B" => &self.params.b,
            _ => return None,
        };
        (i < m.nrows() && j < m.ncols()).then(|| m[(i, j)])
    }

    /// `(estimate, standard error, t)` for a label such as `"A(2,1)"`.
    pub fn coefficient(&self, label: &str) -> Option<(f64, f64, f64)> {
        let k = self.labels.iter().position(|l| l == label)?;
        let inf = self.inference.as_ref()?;
        Some((inf.estimates[k], inf.standard_errors[k], inf.t_statistics[k]))
    }
}

fn non_convergence(what: &str, best: &OptimResult, runs: &[Result<OptimResult>]) -> Error {
    let attempts: Vec<String> = runs
        .iter()
        .map(|r| match r {
            Ok(r) => format!("{:?} nll={:.6} |g|={:.2e}", r.termination, r.objective_value, r.gradient_norm),
            Err(e) => e.to_string(),
        })
        .collect();
    Error::NonConvergence(format!(
        "{what} failed from all starts; best |g|={:.2e}; attempts: [{}]",
        best.gradient_norm,
        attempts.join("; ")
    ))
}

fn jittered(rng: &mut ChaCha8Rng, n: usize, diagonal: bool) -> (DMatrix<f64>, DMatrix<f64>) {
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for i in 0..n {
        let ai: f64 = rng.random_range(0.15..0.45);
        let total: f64 = rng.random_range(0.85..0.97);
        a[(i, i)] = ai;
        b[(i, i)] = (total - ai * ai).max(0.25).sqrt();
        if !diagonal {
            for j in 0..n {
                if j != i {
                    a[(i, j)] = rng.random_range(-0.05..0.05);
                    b[(i, j)] = rng.random_range(-0.03..0.03);
                }
            }
        }
    }
    (a, b)
}

/// Fits BEKK-GARCH(1,1) to constant-mean residuals of `returns`.
///
/// Each series is divided by its standard deviation before optimizing;
/// estimates and standard errors are mapped back (`c_ij·d_i`,
/// `a_ij·d_j/d_i`), which leaves t-statistics unchanged.
pub fn fit_bekk(returns: &ReturnPanel, config: &BekkConfig) -> Result<BekkFit> {
    let n = returns.n_series();
    let t_len = returns.n_obs();
    if n == 0 {
        return Err(Error::InvalidInput("BEKK needs at least one series".into()));
    }
    if n > MAX_SERIES && !config.force {
        return Err(Error::InvalidInput(format!(
            "BEKK with {n} series has {} parameters; refusing above {MAX_SERIES} series without force",
            parameter_count(n)
        )));
    }
    let mut warnings = Vec::new();
    let k_full = parameter_count(n);
    if (t_len as f64) < 50.0 * k_full as f64 / n as f64 {
        warnings.push(format!(
            "{t_len} observations is short for {k_full} BEKK parameters (recommended ≥ {})",
            50 * k_full / n
        ));
    }
    if t_len < 10 {
        return Err(Error::InsufficientData(format!("{t_len} observations")));
    }

    let means = returns.returns.row_mean();
    let mut residuals = returns.returns.clone();
    for mut row in residuals.row_iter_mut() {
        row -= &means;
    }
    let scale: Vec<f64> = (0..n)
        .map(|i| crate::linalg::sample_variance(&crate::linalg::column(&residuals, i)).sqrt())
        .collect();
    if scale.iter().any(|s| !(*s > 0.0)) {
        return Err(Error::InvalidInput("a return series is constant".into()));
    }
    let std_resid = DMatrix::from_fn(t_len, n, |t, i| residuals[(t, i)] / scale[i]);
    let sample_cov = population_covariance(&std_resid);
    let problem = |diagonal: bool| Problem {
        layout: Layout {
            n,
            diagonal,
            targeting: config.variance_targeting,
        },
        eps: flat(&std_resid),
        h0: flat(&sample_cov),
        sample_cov: sample_cov.clone(),
    };

    // univariate fits seed the diagonal of A and B
    let uni_config = GarchConfig {
        min_obs: 10,
        restarts: 1,
        ..GarchConfig::default()
    };
    let mut a0 = DMatrix::zeros(n, n);
    let mut b0 = DMatrix::zeros(n, n);
    for i in 0..n {
        let (alpha, beta) = fit_garch11(&crate::linalg::column(&std_resid, i), &uni_config)
            .map(|f| (f.params.alpha, f.params.beta))
            .unwrap_or((0.05, 0.90));
        a0[(i, i)] = alpha.max(0.01).sqrt();
        b0[(i, i)] = beta.max(0.5).sqrt();
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let diag_problem = problem(true);
    let mut diag_starts = vec![diag_problem.start(a0.clone(), b0.clone())];
    for _ in 0..2 {
        let (a, b) = jittered(&mut rng, n, true);
        diag_starts.push(diag_problem.start(a, b));
    }
    let (diag_best, diag_runs) =
        minimize_multistart(|x: &[f64]| diag_problem.nll(x) / t_len as f64, &diag_starts, &Identity, &config.tolerances)?;

    let (problem, best, runs) = if config.diagonal {
        (diag_problem, diag_best, diag_runs)
    } else {
        let full = problem(false);
        let mut starts = vec![
            full.layout.pack(&diag_problem.params(&diag_best.point)),
            full.start(a0, b0),
        ];
        for _ in 0..config.restarts {
            let (a, b) = jittered(&mut rng, n, false);
            starts.push(full.start(a, b));
        }
        let (best, runs) =
            minimize_multistart(|x: &[f64]| full.nll(x) / t_len as f64, &starts, &Identity, &config.tolerances)?;
        (full, best, runs)
    };

    if !best.converged {
        if best.gradient_norm.is_finite() && best.gradient_norm <= 1e-3 {
            warnings.push(format!(
                "BEKK optimizer stopped ({:?}) with gradient norm {:.2e}",
                best.termination, best.gradient_norm
            ));
        } else {
            return Err(non_convergence("BEKK fit", &best, &runs));
        }
    }

    let scaled_params = problem.params(&best.point).normalized();
    let x_scaled = problem.layout.pack(&scaled_params);
    let layout = problem.layout;
    let labels = layout.labels();

    // map back to the original scale
    let d = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&scale));
    let d_inv = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(n, scale.iter().map(|s| 1.0 / s)));
    let params = BekkParams {
        c: &d * &scaled_params.c,
        a: &d_inv * &scaled_params.a * &d,
        b: &d_inv * &scaled_params.b * &d,
    };
    let mut factors = Vec::with_capacity(layout.len());
    if !layout.targeting {
        for i in 0..n {
            for _ in 0..=i {
                factors.push(scale[i]);
            }
        }
    }
    for _ in 0..2 {
        for i in 0..n {
            for j in 0..n {
                if !layout.diagonal || i == j {
                    factors.push(scale[j] / scale[i]);
                }
            }
        }
    }
    let x_orig = layout.pack(&params);

    let inference = match standard_errors(|x: &[f64]| problem.nll(x), &x_scaled) {
        Ok(inf) => Some(inf.rescaled(x_orig, &factors)),
        Err(e) => {
            warnings.push(format!("BEKK standard errors unavailable: {e}"));
            None
        }
    };
    let radius = params.persistence_radius();
    if radius >= 1.0 {
        warnings.push(format!(
            "spectral radius of A⊗A + B⊗B is {radius:.4} (≥ 1): fitted recursion is explosive"
        ));
    }
    let cov_path = bekk_filter(&params, &residuals)?;
    let loglik = -bekk_nll(&params, &residuals);
    Ok(BekkFit {
        names: returns.names.clone(),
        params,
        residuals,
        cov_path,
        loglik,
        labels,
        inference,
        optim: best,
        diagonal: layout.diagonal,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    None,
    IToJ,
    JToI,
    Bidirectional,
}

/// Which transmission channels are significant for one direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Channels {
    /// Shock (ARCH) coefficient.
    pub arch: bool,
    /// Volatility (GARCH) coefficient.
    pub garch: bool,
}

impl Channels {
    pub fn any(&self) -> bool {
        self.arch || self.garch
    }

    pub fn describe(&self) -> &'static str {
        match (self.arch, self.garch) {
            (true, true) => "arch+garch",
            (true, false) => "arch-only",
            (false, true) => "garch-only",
            (false, false) => "none",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DirectionVerdict {
    pub i: usize,
    pub j: usize,
    pub classification: Direction,
    /// From `a[i][j]`, `b[i][j]`.
    pub i_to_j: Channels,
    /// From `a[j][i]`, `b[j][i]`.
    pub j_to_i: Channels,
}

/// Pure function of the four significance flags.
pub fn classify(i: usize, j: usize, i_to_j: Channels, j_to_i: Channels) -> DirectionVerdict {
    let classification = match (i_to_j.any(), j_to_i.any()) {
        (false, false) => Direction::None,
        (true, false) => Direction::IToJ,
        (false, true) => Direction::JToI,
        (true, true) => Direction::Bidirectional,
    };
    DirectionVerdict {
        i,
        j,
        classification,
        i_to_j,
        j_to_i,
    }
}

/// Spillover direction between markets `i` and `j` (0-based) from the
/// significance of the off-diagonal `A`/`B` entries at `level`. Entries
/// without a standard error count as not significant.
pub fn classify_direction(fit: &BekkFit, i: usize, j: usize, level: f64) -> Result<DirectionVerdict> {
    let n = fit.params.dim();
    if i == j || i >= n || j >= n {
        return Err(Error::InvalidInput(format!("invalid pair ({i}, {j}) for {n} series")));
    }
    let significant = |m: &str, r: usize, c: usize| {
        fit.coefficient(&format!("{m}({},{})", r + 1, c + 1))
            .map(|(_, _, t)| two_sided_p(t) < level)
            .unwrap_or(false)
    };
    let i_to_j = Channels {
        arch: significant("A", i, j),
        garch: significant("B", i, j),
    };
    let j_to_i = Channels {
        arch: significant("A", j, i),
        garch: significant("B", j, i),
    };
    Ok(classify(i, j, i_to_j, j_to_i))
}

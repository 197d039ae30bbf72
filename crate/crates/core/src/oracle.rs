//! Finite-difference reference solutions of the per-mode boundary value problems.
//!
//! Nothing here evaluates the closed-form kernels while solving; the
//! comparison in [`compare_mode`] is the only place where both meet.
//!
//! The fourth-order problem for `û_d` is split with `w = (s² − ∂²)û_d`:
//!
//! ```text
//! (λ + s² − ∂²) w = 0,    w − s² û_d + ∂² û_d = 0,    0 < y < Y
//! û_d(0) = 0,             (λ + α) ∂û_d(0) − s² û_d(0) + w(0) = −i ξ·φ̂
//! ```

use num_complex::Complex64;
use serde::Serialize;

use crate::banded::{solve_banded, BandMatrix};
use crate::error::{invalid, Error, Result};
use crate::kernels::{RadialKernel, ResolventParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Condition imposed at the truncation point `y = Y`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayBc {
    /// `û_d(Y) = 0`, `w(Y) = 0`.
    DirichletPair,
    /// `(∂ + s)û_d(Y) = w(Y)/(q + s)` and `(∂ + q)w(Y) = 0`: exact for the
    /// decaying solution, so any `Y` works.
    Asymptotic,
}

impl std::str::FromStr for DecayBc {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dirichlet_pair" => Ok(Self::DirichletPair),
            "asymptotic" => Ok(Self::Asymptotic),
            other => Err(invalid(format!("unknown decay condition '{other}' (dirichlet_pair | asymptotic)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OdeOracleConfig {
    pub truncation_length: f64,
    pub steps: usize,
    pub decay_bc: DecayBc,
}

impl OdeOracleConfig {
    pub fn new(truncation_length: f64, steps: usize, decay_bc: DecayBc) -> Result<Self> {
        if !(truncation_length > 0.0) || !truncation_length.is_finite() {
            return Err(invalid(format!("truncation length must be positive, got {truncation_length}")));
        }
        if steps < 64 {
            return Err(invalid(format!("oracle needs at least 64 steps, got {steps}")));
        }
        Ok(Self { truncation_length, steps, decay_bc })
    }

    /// Asymptotic condition at `Y = 12/Re q`, twelve decay lengths of the
    /// fast root, which keeps `h|q|` small while covering the boundary layer.
    pub fn adequate(params: &ResolventParams, s: f64, steps: usize) -> Result<Self> {
        let q = shifted_root(params.lambda, s);
        Self::new(12.0 / q.re, steps, DecayBc::Asymptotic)
    }

    pub fn step(&self) -> f64 {
        self.truncation_length / self.steps as f64
    }

    pub fn nodes(&self) -> Vec<f64> {
        let h = self.step();
        (0..=self.steps).map(|j| j as f64 * h).collect()
    }

    fn check_truncation(&self, decay: f64) -> Result<()> {
        if self.decay_bc == DecayBc::DirichletPair && (-decay * self.truncation_length).exp() >= 1e-10 {
            return Err(Error::InsufficientTruncation(format!(
                "e^(-{decay:.3e}·Y) ≥ 1e-10 at Y = {}; enlarge Y or use the asymptotic condition",
                self.truncation_length
            )));
        }
        Ok(())
    }
}

/// Principal root `√(λ + s²)`, computed locally.
fn shifted_root(lambda: Complex64, s: f64) -> Complex64 {
    (lambda + s * s).sqrt()
}

/// Sampled oracle solution on the uniform grid `y_j = jY/N`.
#[derive(Debug, Clone, PartialEq)]
pub struct FdSolution {
    pub y: Vec<f64>,
    pub values: Vec<Complex64>,
    /// Row-wise backward error of the discrete linear solve.
    pub residual: f64,
}

fn mode_modulus(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Solves the `û_d` problem for one nonzero mode.
pub fn solve_mode_fd(
    params: &ResolventParams,
    xi: &[f64],
    rhs_phi_hat: &[Complex64],
    cfg: &OdeOracleConfig,
) -> Result<FdSolution> {
    let t = params.tdim();
    if xi.len() != t || rhs_phi_hat.len() != t {
        return Err(Error::ShapeMismatch(format!("oracle needs {t}-vectors for ξ and φ̂")));
    }
    let s = mode_modulus(xi);
    if s == 0.0 {
        return Err(Error::Precondition("the ξ = 0 mode of u_d vanishes identically; nothing to solve".into()));
    }
    let lambda = params.lambda;
    let q = shifted_root(lambda, s);
    cfg.check_truncation(s.min(q.re))?;
    let div_phi: Complex64 = (0..t).map(|a| I * xi[a] * rhs_phi_hat[a]).sum();

    let n = cfg.steps;
    let h = cfg.step();
    let (h2, s2) = (h * h, s * s);
    let u = |j: usize| 2 * j;
    let w = |j: usize| 2 * j + 1;
    let mut a = BandMatrix::zeros(2 * (n + 1), 4, 3);
    let mut b = vec![ZERO; 2 * (n + 1)];
    let mut put = |row: usize, col: usize, v: Complex64| a.set(row, col, v);

    put(u(0), u(0), ONE)?;
    let robin = lambda + params.alpha;
    put(w(0), u(0), -3.0 * robin / (2.0 * h) - s2)?;
    put(w(0), u(1), 4.0 * robin / (2.0 * h))?;
    put(w(0), u(2), -robin / (2.0 * h))?;
    put(w(0), w(0), ONE)?;
    b[w(0)] = -div_phi;

    for j in 1..n {
        put(u(j), u(j - 1), (1.0 / h2).into())?;
        put(u(j), u(j), (-s2 - 2.0 / h2).into())?;
        put(u(j), u(j + 1), (1.0 / h2).into())?;
        put(u(j), w(j), ONE)?;
        put(w(j), w(j - 1), (-1.0 / h2).into())?;
        put(w(j), w(j), lambda + s2 + 2.0 / h2)?;
        put(w(j), w(j + 1), (-1.0 / h2).into())?;
    }

    match cfg.decay_bc {
        DecayBc::DirichletPair => {
            put(u(n), u(n), ONE)?;
            put(w(n), w(n), ONE)?;
        }
        DecayBc::Asymptotic => {
            let d = 1.0 / (2.0 * h);
            put(u(n), u(n), (3.0 * d + s).into())?;
            put(u(n), u(n - 1), (-4.0 * d).into())?;
            put(u(n), u(n - 2), d.into())?;
            put(u(n), w(n), -1.0 / (q + s))?;
            put(w(n), w(n), 3.0 * d + q)?;
            put(w(n), w(n - 1), (-4.0 * d).into())?;
            put(w(n), w(n - 2), d.into())?;
        }
    }

    let (x, residual) = solve_banded(a, &b)?;
    Ok(FdSolution { y: cfg.nodes(), values: x.into_iter().step_by(2).collect(), residual })
}

/// Solves `(λ + s² − ∂²)v = 0`, `(λ + α − ∂)v(0) = ĥ` with decay at `Y`.
pub fn solve_vprime_mode_fd(params: &ResolventParams, xi: &[f64], h_hat: Complex64, cfg: &OdeOracleConfig) -> Result<FdSolution> {
    if xi.len() != params.tdim() {
        return Err(Error::ShapeMismatch(format!("oracle needs a {}-vector ξ", params.tdim())));
    }
    let s = mode_modulus(xi);
    let lambda = params.lambda;
    let q = shifted_root(lambda, s);
    cfg.check_truncation(q.re)?;
    let n = cfg.steps;
    let h = cfg.step();
    let d = 1.0 / (2.0 * h);
    let mut a = BandMatrix::zeros(n + 1, 2, 2);
    let mut b = vec![ZERO; n + 1];
    let robin = lambda + params.alpha;
    a.set(0, 0, robin + 3.0 * d)?;
    a.set(0, 1, (-4.0 * d).into())?;
    a.set(0, 2, d.into())?;
    b[0] = h_hat;
    for j in 1..n {
        a.set(j, j - 1, (-1.0 / (h * h)).into())?;
        a.set(j, j, lambda + s * s + 2.0 / (h * h))?;
        a.set(j, j + 1, (-1.0 / (h * h)).into())?;
    }
    match cfg.decay_bc {
        DecayBc::DirichletPair => a.set(n, n, ONE)?,
        DecayBc::Asymptotic => {
            a.set(n, n, 3.0 * d + q)?;
            a.set(n, n - 1, (-4.0 * d).into())?;
            a.set(n, n - 2, d.into())?;
        }
    }
    let (values, residual) = solve_banded(a, &b)?;
    Ok(FdSolution { y: cfg.nodes(), values, residual })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModeComparison {
    pub s: f64,
    pub steps: usize,
    pub truncation_length: f64,
    /// `max_j |û_d^FD − i ξ·φ̂ m0| / max_j |i ξ·φ̂ m0|` for unit `φ̂ ∥ ξ`
    pub u_d_deviation: f64,
    /// same for `v̂′` against `ĥ e^{−yq}/(λ + α + q)` with `ĥ = 1`
    pub v_deviation: f64,
    /// largest linear-solve residual of the two systems
    pub solve_residual: f64,
}

impl ModeComparison {
    pub fn deviation(&self) -> f64 {
        self.u_d_deviation.max(self.v_deviation)
    }
}

fn relative_deviation(fd: &FdSolution, exact: impl Fn(f64) -> Complex64) -> f64 {
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (&y, v) in fd.y.iter().zip(&fd.values) {
        let e = exact(y);
        num = num.max((v - e).norm());
        den = den.max(e.norm());
    }
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

/// Solves both oracle problems at `ξ` and measures them against the kernels.
pub fn compare_mode(params: &ResolventParams, xi: &[f64], cfg: &OdeOracleConfig) -> Result<ModeComparison> {
    let s = mode_modulus(xi);
    if s == 0.0 {
        return Err(Error::Precondition("compare_mode needs ξ ≠ 0".into()));
    }
    let phi: Vec<Complex64> = xi.iter().map(|v| Complex64::from(v / s)).collect();
    let ud = solve_mode_fd(params, xi, &phi, cfg)?;
    let v = solve_vprime_mode_fd(params, xi, ONE, cfg)?;
    let kernel = RadialKernel::new(params, s);
    Ok(ModeComparison {
        s,
        steps: cfg.steps,
        truncation_length: cfg.truncation_length,
        u_d_deviation: relative_deviation(&ud, |y| I * s * kernel.m0(y)),
        v_deviation: relative_deviation(&v, |y| kernel.m4(y)),
        solve_residual: ud.residual.max(v.residual),
    })
}

/// `compare_mode` at `N` and `2N`, with the observed order `log₂(dev_N / dev_2N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRecord {
    pub coarse: ModeComparison,
    pub fine: ModeComparison,
    pub ratio: f64,
    pub order: f64,
}

pub fn convergence(params: &ResolventParams, xi: &[f64], cfg: &OdeOracleConfig) -> Result<ConvergenceRecord> {
    let coarse = compare_mode(params, xi, cfg)?;
    let fine_cfg = OdeOracleConfig { steps: 2 * cfg.steps, ..*cfg };
    let fine = compare_mode(params, xi, &fine_cfg)?;
    let ratio = coarse.deviation() / fine.deviation();
    Ok(ConvergenceRecord { coarse, fine, ratio, order: ratio.log2() })
}

//! Scaling experiments: resolvent decay in `|λ|`, uniformity in `α`, and
//! gradient and second-order norm ratios at fixed `λ`.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use rayon::prelude::*;

use crate::certify::LogAxis;
use crate::error::{invalid, Error, Result};
use crate::fields::{
    inverse_dft, lp_norm_gamma, lp_norm_omega_stack, BoundaryField, FieldArray, PhysicalField, SpectralField,
    TangentialGrid, WallGrid,
};
use crate::kernels::ResolventParams;
use crate::report::fmt_f64;
use crate::solver::{filtered_phi_hat, solve_boundary_driven, solve_velocity, SolutionBundle};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Seeded random boundary data with Fourier modes `|k| ≤ max_mode`.
///
/// Coefficients are drawn in a fixed mode order that does not depend on the
/// grid, so the same seed gives the same function at every resolution that
/// resolves the band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BandLimitedSampler {
    pub seed: u64,
    pub max_mode: usize,
}

impl BandLimitedSampler {
    pub fn new(seed: u64, max_mode: usize) -> Result<Self> {
        if max_mode == 0 {
            return Err(invalid("band limit must be at least 1"));
        }
        Ok(Self { seed, max_mode })
    }

    /// `(k, c_k)` pairs with `c_{−k} = conj(c_k)`; envelope `exp(−2|k|²/K²)`.
    pub fn coefficients(&self, tdim: usize, components: usize) -> Vec<([i64; 2], Vec<Complex64>)> {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(self.seed);
        let k_max = self.max_mode as i64;
        let second = if tdim == 2 { -k_max..=k_max } else { 0..=0 };
        let mut out = Vec::new();
        for k1 in -k_max..=k_max {
            for k2 in second.clone() {
                let upper = k1 > 0 || (k1 == 0 && k2 > 0);
                let radius2 = (k1 * k1 + k2 * k2) as f64;
                if !upper || radius2 > (k_max * k_max) as f64 {
                    continue;
                }
                let env = (-2.0 * radius2 / (k_max * k_max) as f64).exp();
                let c: Vec<Complex64> = (0..components)
                    .map(|_| env * Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                    .collect();
                out.push(([-k1, -k2], c.iter().map(|v| v.conj()).collect()));
                out.push(([k1, k2], c));
            }
        }
        let mean: Vec<Complex64> = (0..components).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
        out.push(([0, 0], mean));
        out
    }

    pub fn spectral(&self, tgrid: &TangentialGrid, components: usize) -> Result<SpectralField> {
        if 2 * self.max_mode >= tgrid.n {
            return Err(invalid(format!("band limit {} is not resolved by n = {}", self.max_mode, tgrid.n)));
        }
        let scale = (tgrid.n as f64).powi(tgrid.tdim as i32);
        let mut field = SpectralField::zeros(*tgrid, WallGrid::trace(), components);
        for (k, c) in self.coefficients(tgrid.tdim, components) {
            let point = if tgrid.tdim == 1 {
                tgrid.mode_index(k[0])
            } else {
                tgrid.mode_index(k[0]) * tgrid.n + tgrid.mode_index(k[1])
            };
            for (j, v) in c.iter().enumerate() {
                field.set(point, 0, j, scale * v);
            }
        }
        Ok(field)
    }

    pub fn sample(&self, tgrid: &TangentialGrid, components: usize) -> Result<BoundaryField> {
        let spec = self.spectral(tgrid, components)?;
        let mut field = BoundaryField::from_spectral(&spec)?;
        // the data is real by construction; drop the rounding residue
        let plain = FieldArray::from_values(
            *tgrid,
            WallGrid::trace(),
            components,
            field.values().iter().map(|v| Complex64::new(v.re, 0.0)).collect(),
        )?;
        field = BoundaryField::new(PhysicalField(plain))?;
        Ok(field)
    }
}

/// Tangential box, wall levels and the `λ`-adapted wall truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepGrids {
    pub n: usize,
    pub box_length: f64,
    /// Number of wall intervals `M`.
    pub intervals: usize,
    /// `Y = decay_lengths / min(Re √λ, 1)`.
    pub decay_lengths: f64,
    /// `y₁ = min(first_fraction·Y, layer_fraction/Re √λ)`.
    pub first_fraction: f64,
    pub layer_fraction: f64,
}

impl SweepGrids {
    pub fn new(n: usize, box_length: f64, intervals: usize) -> Self {
        Self { n, box_length, intervals, decay_lengths: 10.0, first_fraction: 0.01, layer_fraction: 0.02 }
    }

    pub fn tangential(&self, tdim: usize) -> Result<TangentialGrid> {
        TangentialGrid::new(tdim, self.n, self.box_length)
    }

    pub fn wall_for(&self, lambda: Complex64) -> Result<WallGrid> {
        let root = lambda.sqrt().re;
        let y_max = self.decay_lengths / root.min(1.0);
        let first = (self.first_fraction * y_max).min(self.layer_fraction / root);
        WallGrid::geometric(y_max, self.intervals, first / y_max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecaySample {
    pub modulus: f64,
    pub angle: f64,
    pub alpha: f64,
    pub p: f64,
    pub norm_omega: f64,
    pub norm_gamma: f64,
    pub phi_norm: f64,
}

impl DecaySample {
    /// `(‖u‖_Ω + ‖tr u‖_Γ)|λ| / ‖φ‖`
    pub fn constant(&self) -> f64 {
        (self.norm_omega + self.norm_gamma) * self.modulus / self.phi_norm
    }
}

/// One `(p, θ, α)` series of the decay sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayReport {
    pub p: f64,
    pub angle: f64,
    pub alpha: f64,
    pub samples: Vec<DecaySample>,
    /// Least-squares slope of `log(‖u‖_Ω + ‖tr u‖_Γ)` against `log |λ|`.
    pub fitted_slope: f64,
    /// Root-mean-square residual of the fit in natural-log units.
    pub fit_residual: f64,
    /// `max (‖u‖_Ω + ‖tr u‖_Γ)|λ| / ‖φ‖` over the series.
    pub decay_constant: f64,
    /// Set when the data vanish and no fit is possible.
    pub degenerate: bool,
    /// Largest relative norm change when the wall grid is refined at the
    /// extreme moduli of the series; `None` if not checked.
    pub refinement_shift: Option<f64>,
    pub under_resolved: bool,
}

/// `(slope, rms residual)` of the least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx) * (v - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = x.iter().zip(y).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayConfig {
    pub dim: usize,
    pub ps: Vec<f64>,
    pub moduli: LogAxis,
    pub angles: Vec<f64>,
    pub alphas: Vec<f64>,
    pub grids: SweepGrids,
    /// Re-solve the first and last modulus of each series on a refined wall grid.
    pub check_refinement: bool,
}

impl DecayConfig {
    pub fn validate(&self, omega: f64) -> Result<()> {
        if self.moduli.len() < 8 {
            return Err(invalid(format!("decay fits need at least 8 moduli, got {}", self.moduli.len())));
        }
        if self.moduli.include_zero || self.moduli.lo < omega {
            return Err(invalid(format!("decay moduli must satisfy |λ| ≥ ω = {omega}")));
        }
        if self.ps.is_empty() || self.angles.is_empty() || self.alphas.is_empty() {
            return Err(invalid("decay sweep needs at least one p, angle and α"));
        }
        Ok(())
    }
}

fn velocity_norms(
    params: &ResolventParams,
    tgrid: &TangentialGrid,
    wgrid: &WallGrid,
    phi_hat: &SpectralField,
    ps: &[f64],
) -> Result<Vec<(f64, f64)>> {
    let u = solve_velocity(params, tgrid, wgrid, phi_hat)?;
    let trace = BoundaryField::trace_of(&u)?;
    ps.iter()
        .map(|&p| Ok((lp_norm_omega_stack(&[&u], p)?, lp_norm_gamma(&trace, p)?)))
        .collect()
}

/// Runs every `(θ, α)` series for all exponents in `cfg.ps` with fixed data `φ`.
///
/// Moduli within a series are solved in parallel; samples stay ordered by `|λ|`.
pub fn resolvent_decay(cfg: &DecayConfig, phi: &BoundaryField) -> Result<Vec<DecayReport>> {
    let tdim = cfg.dim - 1;
    let tgrid = cfg.grids.tangential(tdim)?;
    if phi.tgrid() != &tgrid || phi.components() != tdim {
        return Err(Error::ShapeMismatch("boundary data does not match the sweep grid".into()));
    }
    let phi_hat = filtered_phi_hat(phi);
    let phi_filtered = BoundaryField::from_spectral(&phi_hat)?;
    let phi_norms: Vec<f64> = cfg.ps.iter().map(|&p| lp_norm_gamma(&phi_filtered, p)).collect::<Result<_>>()?;
    let moduli = cfg.moduli.points();
    let mut reports = Vec::new();
    for &angle in &cfg.angles {
        for &alpha in &cfg.alphas {
            let solved: Vec<(Vec<(f64, f64)>, Option<f64>)> = moduli
                .par_iter()
                .enumerate()
                .map(|(i, &modulus)| {
                    let params = ResolventParams::from_polar(modulus, angle, alpha, cfg.dim)?;
                    let wgrid = cfg.grids.wall_for(params.lambda)?;
                    let norms = velocity_norms(&params, &tgrid, &wgrid, &phi_hat, &cfg.ps)?;
                    let mut shift = None;
                    if cfg.check_refinement && (i == 0 || i + 1 == moduli.len()) {
                        let fine = velocity_norms(&params, &tgrid, &wgrid.refined(), &phi_hat, &cfg.ps)?;
                        for (a, b) in norms.iter().zip(&fine) {
                            let s = relative_change(a.0, b.0).max(relative_change(a.1, b.1));
                            shift = Some(shift.map_or(s, |v: f64| v.max(s)));
                        }
                    }
                    Ok((norms, shift))
                })
                .collect::<Result<_>>()?;
            let shift = solved.iter().filter_map(|r| r.1).reduce(f64::max);
            let mut per_p: Vec<Vec<DecaySample>> = vec![Vec::new(); cfg.ps.len()];
            for (&modulus, (norms, _)) in moduli.iter().zip(&solved) {
                for (j, &(norm_omega, norm_gamma)) in norms.iter().enumerate() {
                    per_p[j].push(DecaySample { modulus, angle, alpha, p: cfg.ps[j], norm_omega, norm_gamma, phi_norm: phi_norms[j] });
                }
            }
            for (j, samples) in per_p.into_iter().enumerate() {
                reports.push(decay_report(cfg.ps[j], angle, alpha, samples, shift));
            }
        }
    }
    Ok(reports)
}

fn relative_change(x: f64, y: f64) -> f64 {
    if x == y {
        0.0
    } else {
        (x - y).abs() / x.abs().max(y.abs())
    }
}

fn decay_report(p: f64, angle: f64, alpha: f64, samples: Vec<DecaySample>, shift: Option<f64>) -> DecayReport {
    let degenerate = samples.iter().any(|s| !(s.norm_omega + s.norm_gamma > 0.0) || !(s.phi_norm > 0.0));
    let (fitted_slope, fit_residual, decay_constant) = if degenerate {
        (f64::NAN, f64::NAN, f64::NAN)
    } else {
        let x: Vec<f64> = samples.iter().map(|s| s.modulus.ln()).collect();
        let y: Vec<f64> = samples.iter().map(|s| (s.norm_omega + s.norm_gamma).ln()).collect();
        let (slope, res) = fit_line(&x, &y);
        (slope, res, samples.iter().map(DecaySample::constant).fold(0.0, f64::max))
    };
    DecayReport {
        p,
        angle,
        alpha,
        samples,
        fitted_slope,
        fit_residual,
        decay_constant,
        degenerate,
        refinement_shift: shift,
        under_resolved: shift.is_some_and(|s| s > 0.01),
    }
}

/// Spread of decay constants over `α` for one `(p, θ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaUniformity {
    pub p: f64,
    pub angle: f64,
    pub alphas: Vec<f64>,
    pub constants: Vec<f64>,
    pub slopes: Vec<f64>,
    /// `max constant / min constant`
    pub spread: f64,
}

pub fn alpha_uniformity(reports: &[DecayReport]) -> Vec<AlphaUniformity> {
    let mut out: Vec<AlphaUniformity> = Vec::new();
    for r in reports {
        match out.iter_mut().find(|u| u.p == r.p && u.angle == r.angle) {
            Some(u) => {
                u.alphas.push(r.alpha);
                u.constants.push(r.decay_constant);
                u.slopes.push(r.fitted_slope);
            }
            None => out.push(AlphaUniformity {
                p: r.p,
                angle: r.angle,
                alphas: vec![r.alpha],
                constants: vec![r.decay_constant],
                slopes: vec![r.fitted_slope],
                spread: f64::NAN,
            }),
        }
    }
    for u in &mut out {
        let max = u.constants.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = u.constants.iter().copied().fold(f64::INFINITY, f64::min);
        u.spread = max / min;
    }
    out
}

/// Velocity `(û′, û_d)` and its analytic normal derivative, spectral.
fn velocity_spectral(bundle: &SolutionBundle) -> Result<(SpectralField, SpectralField)> {
    let sp = &bundle.spectral;
    Ok((SpectralField::stack(&[&sp.u_prime, &sp.u_d])?, SpectralField::stack(&[&sp.dy_u_prime, &sp.dy_u_d])?))
}

fn physical_all(fields: &[SpectralField]) -> Result<Vec<PhysicalField>> {
    fields.iter().map(inverse_dft).collect()
}

fn stack_norm(fields: &[PhysicalField], p: f64) -> Result<f64> {
    let refs: Vec<&PhysicalField> = fields.iter().collect();
    lp_norm_omega_stack(&refs, p)
}

/// `W^{1,p}(Ω)` norm of the velocity and `Lᵖ(Ω)` norm of the pressure.
pub fn first_order_norms(bundle: &SolutionBundle, p: f64) -> Result<(f64, f64)> {
    let (u, dy) = velocity_spectral(bundle)?;
    let mut grads = vec![dy];
    for axis in 0..bundle.params.tdim() {
        grads.push(u.tangential_derivative(axis)?);
    }
    let value = stack_norm(&physical_all(&[u])?, p)?;
    let grad = stack_norm(&physical_all(&grads)?, p)?;
    let w1p = (value.powf(p) + grad.powf(p)).powf(1.0 / p);
    let pressure = lp_norm_omega_stack(&[&bundle.pressure], p)?;
    Ok((w1p, pressure))
}

/// `‖∇²u‖_{Lᵖ(Ω)}` (all second derivatives, pointwise Frobenius) and `‖∇π‖_{Lᵖ(Ω)}`.
pub fn second_order_norms(bundle: &SolutionBundle, p: f64) -> Result<(f64, f64)> {
    let sp = &bundle.spectral;
    let t = bundle.params.tdim();
    let (u, dy) = velocity_spectral(bundle)?;
    let dyy = SpectralField::stack(&[&sp.dy2_u_prime, &sp.dy2_u_d])?;
    let mut hessian = vec![dyy];
    for a in 0..t {
        let ua = u.tangential_derivative(a)?;
        let mixed = dy.tangential_derivative(a)?;
        hessian.push(mixed.clone());
        hessian.push(mixed);
        for b in 0..t {
            hessian.push(ua.tangential_derivative(b)?);
        }
    }
    let second = stack_norm(&physical_all(&hessian)?, p)?;
    let mut grad_p = vec![sp.dy_pressure.clone()];
    for a in 0..t {
        grad_p.push(sp.pressure.tangential_derivative(a)?);
    }
    let pressure = stack_norm(&physical_all(&grad_p)?, p)?;
    Ok((second, pressure))
}

/// Discrete `W^{1,p}(Γ)` norm of boundary data, the stand-in for the trace-space norm.
pub fn boundary_w1p_norm(phi: &BoundaryField, p: f64) -> Result<f64> {
    let hat = filtered_phi_hat(phi);
    let mut fields = vec![];
    for a in 0..phi.tgrid().tdim {
        fields.push(hat.tangential_derivative(a)?);
    }
    let grads = physical_all(&fields)?;
    let refs: Vec<&PhysicalField> = grads.iter().collect();
    let value = lp_norm_gamma(&BoundaryField::from_spectral(&hat)?, p)?;
    let grad = lp_norm_omega_stack(&refs, p)?;
    Ok((value.powf(p) + grad.powf(p)).powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatioSample {
    pub seed: u64,
    pub numerator: f64,
    pub phi_norm: f64,
    /// `None` when `φ = 0`.
    pub ratio: Option<f64>,
    /// Ratio recomputed on the refined grid, if requested.
    pub refined_ratio: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioReport {
    pub name: String,
    pub p: f64,
    pub lambda: Complex64,
    pub alpha: f64,
    pub samples: Vec<RatioSample>,
    /// `max ratio / min ratio` over samples with nonzero data.
    pub spread: f64,
    /// Largest relative ratio change under refinement.
    pub refinement_shift: Option<f64>,
    pub degenerate: bool,
}

fn ratio_report(name: &str, p: f64, params: &ResolventParams, samples: Vec<RatioSample>) -> RatioReport {
    let ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
    let spread = if ratios.is_empty() {
        f64::NAN
    } else {
        ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max) / ratios.iter().copied().fold(f64::INFINITY, f64::min)
    };
    let shifts: Vec<f64> = samples
        .iter()
        .filter_map(|s| Some((s.refined_ratio? - s.ratio?).abs() / s.ratio?))
        .collect();
    RatioReport {
        name: name.into(),
        p,
        lambda: params.lambda,
        alpha: params.alpha,
        degenerate: ratios.len() < samples.len(),
        samples,
        spread,
        refinement_shift: if shifts.is_empty() { None } else { Some(shifts.iter().copied().fold(0.0, f64::max)) },
    }
}

fn ratio_or_none(num: f64, den: f64) -> Option<f64> {
    (den > 0.0).then(|| num / den)
}

/// Boundary data for a ratio experiment: a sampler seed or an explicit field.
#[derive(Debug, Clone)]
pub enum PhiSource {
    Sampler(BandLimitedSampler),
    Field(BoundaryField),
}

impl PhiSource {
    fn seed(&self) -> u64 {
        match self {
            Self::Sampler(s) => s.seed,
            Self::Field(_) => 0,
        }
    }

    fn on(&self, tgrid: &TangentialGrid, components: usize) -> Result<BoundaryField> {
        match self {
            Self::Sampler(s) => s.sample(tgrid, components),
            Self::Field(f) => {
                if f.tgrid() != tgrid {
                    return Err(Error::ShapeMismatch("explicit boundary data cannot be moved to another grid".into()));
                }
                Ok(f.clone())
            }
        }
    }
}

/// `(‖u‖_{W^{1,p}} + ‖π‖_{Lᵖ}) / ‖φ‖_{Lᵖ(Γ)}` for each data sample; with
/// `refine` the ratio is recomputed on a doubled wall grid.
pub fn gradient_estimate(
    params: &ResolventParams,
    p: f64,
    grids: &SweepGrids,
    phis: &[PhiSource],
    refine: bool,
) -> Result<RatioReport> {
    let tgrid = grids.tangential(params.tdim())?;
    let wgrid = grids.wall_for(params.lambda)?;
    let ratio_on = |wg: &WallGrid, phi: &BoundaryField| -> Result<(f64, f64)> {
        let bundle = solve_boundary_driven(params, &tgrid, wg, phi)?;
        let (w1p, pressure) = first_order_norms(&bundle, p)?;
        let den = lp_norm_gamma(&BoundaryField::from_spectral(&bundle.phi_hat)?, p)?;
        Ok((w1p + pressure, den))
    };
    let mut samples = Vec::new();
    for src in phis {
        let phi = src.on(&tgrid, params.tdim())?;
        let (num, den) = ratio_on(&wgrid, &phi)?;
        let refined_ratio = if refine && den > 0.0 {
            let (n2, d2) = ratio_on(&wgrid.refined(), &phi)?;
            ratio_or_none(n2, d2)
        } else {
            None
        };
        samples.push(RatioSample { seed: src.seed(), numerator: num, phi_norm: den, ratio: ratio_or_none(num, den), refined_ratio });
    }
    Ok(ratio_report("gradient_estimate", p, params, samples))
}

/// `(‖∇²u‖_{Lᵖ} + ‖∇π‖_{Lᵖ}) / ‖φ‖_{W^{1,p}(Γ)}`. The denominator is a
/// discrete `W^{1,p}(Γ)` proxy for the trace-space norm, an upper bound for
/// it. With `refine` the ratio is recomputed with doubled tangential resolution.
pub fn second_order_proxy(
    params: &ResolventParams,
    p: f64,
    grids: &SweepGrids,
    phis: &[PhiSource],
    refine: bool,
) -> Result<RatioReport> {
    let ratio_on = |g: &SweepGrids, src: &PhiSource| -> Result<(f64, f64)> {
        let tgrid = g.tangential(params.tdim())?;
        let phi = src.on(&tgrid, params.tdim())?;
        let bundle = solve_boundary_driven(params, &tgrid, &g.wall_for(params.lambda)?, &phi)?;
        let (second, pressure) = second_order_norms(&bundle, p)?;
        Ok((second + pressure, boundary_w1p_norm(&phi, p)?))
    };
    let mut samples = Vec::new();
    for src in phis {
        let (num, den) = ratio_on(grids, src)?;
        let refined_ratio = if refine && den > 0.0 {
            let fine = SweepGrids { n: 2 * grids.n, ..*grids };
            let (n2, d2) = ratio_on(&fine, src)?;
            ratio_or_none(n2, d2)
        } else {
            None
        };
        samples.push(RatioSample { seed: src.seed(), numerator: num, phi_norm: den, ratio: ratio_or_none(num, den), refined_ratio });
    }
    Ok(ratio_report("second_order_proxy (W^{1,p}(Γ) surrogate for the trace norm)", p, params, samples))
}

/// Rows `modulus,angle,alpha,p,norm_omega,norm_gamma,phi_norm`.
pub fn decay_csv(reports: &[DecayReport]) -> String {
    let mut out = String::from("modulus,angle,alpha,p,norm_omega,norm_gamma,phi_norm\n");
    let mut rows: Vec<&DecaySample> = reports.iter().flat_map(|r| r.samples.iter()).collect();
    rows.sort_by(|a, b| {
        (a.modulus, a.angle, a.alpha, a.p).partial_cmp(&(b.modulus, b.angle, b.alpha, b.p)).unwrap_or(std::cmp::Ordering::Equal)
    });
    for s in rows {
        let cells = [s.modulus, s.angle, s.alpha, s.p, s.norm_omega, s.norm_gamma, s.phi_norm];
        out.push_str(&cells.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}

/// A single harmonic `a e^{i k·x}` in the first tangential component.
pub fn harmonic_phi(tgrid: &TangentialGrid, components: usize, k: [i64; 2], amplitude: Complex64) -> BoundaryField {
    let w = 2.0 * std::f64::consts::PI / tgrid.box_length;
    BoundaryField::from_fn(*tgrid, components, |x, out| {
        let phase = w * (k[0] as f64 * x[0] + k[1] as f64 * x[1]);
        out[0] = amplitude * (I * phase).exp();
        for v in out.iter_mut().skip(1) {
            *v = ZERO;
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn sampler_is_real_and_grid_independent() {
        let s = BandLimitedSampler::new(3, 4).unwrap();
        let coarse = TangentialGrid::new(2, 16, 2.0 * PI).unwrap();
        let fine = TangentialGrid::new(2, 32, 2.0 * PI).unwrap();
        let a = s.spectral(&coarse, 1).unwrap();
        let b = s.spectral(&fine, 1).unwrap();
        let pa = BoundaryField::from_spectral(&a).unwrap();
        assert!(pa.max_imag() < 1e-13 * pa.max_abs());
        let pb = BoundaryField::from_spectral(&b).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let va = pa.get(i * 16 + j, 0, 0);
                let vb = pb.get(2 * i * 32 + 2 * j, 0, 0);
                assert!((va - vb).norm() < 1e-12, "{va} {vb}");
            }
        }
        assert!(s.spectral(&TangentialGrid::new(2, 8, 1.0).unwrap(), 1).is_err());
    }

    #[test]
    fn fit_recovers_exact_power_law() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| 3.0 - 1.25 * v).collect();
        let (slope, res) = fit_line(&x, &y);
        assert!((slope + 1.25).abs() < 1e-14);
        assert!(res < 1e-14);
    }

    #[test]
    fn wall_grid_resolves_boundary_layer() {
        let g = SweepGrids::new(16, 2.0 * PI, 192);
        let w = g.wall_for(Complex64::new(1e6, 0.0)).unwrap();
        assert!((w.y_max() - 10.0).abs() < 1e-12);
        assert!((w.levels()[1] - 2e-5).abs() < 1e-12);
        let w = g.wall_for(Complex64::new(0.25, 0.0)).unwrap();
        assert!((w.y_max() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn zero_data_is_flagged() {
        let cfg = DecayConfig {
            dim: 2,
            ps: vec![2.0],
            moduli: LogAxis::new(1e2, 1e3, 8, false).unwrap(),
            angles: vec![0.0],
            alphas: vec![0.0],
            grids: SweepGrids::new(16, 2.0 * PI, 32),
            check_refinement: false,
        };
        let tg = cfg.grids.tangential(1).unwrap();
        let phi = BoundaryField::from_fn(tg, 1, |_, _| {});
        let r = resolvent_decay(&cfg, &phi).unwrap();
        assert!(r[0].degenerate);
        let params = ResolventParams::new(Complex64::new(4.0, 0.0), 0.0, 2).unwrap();
        let g = gradient_estimate(&params, 2.0, &cfg.grids, &[PhiSource::Field(phi)], false).unwrap();
        assert!(g.degenerate);
        assert!(g.samples[0].ratio.is_none());
    }
}

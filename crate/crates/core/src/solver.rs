//! Mode-by-mode assembly of the boundary-driven solution and its residual checks.
//!
//! For a mode `ξ ≠ 0` with unit direction `ξ̂` write `a = ξ̂·φ̂` and
//! `h = φ̂ − aξ̂`. Then
//!
//! ```text
//! û′  = −∂_y m0 · a ξ̂ + m4 · h
//! û_d = i|ξ| a · m0
//! π̂   = −i a · P e^{−y|ξ|},   P = (q + s)/(α + λ + q + s)
//! ```
//!
//! At `ξ = 0` only `û′ = m4 φ̂` survives and the pressure mean is fixed to zero.
//! Data at the Nyquist frequency is discarded before solving: its direction
//! `ξ/|ξ|` is ambiguous on the periodic grid and the odd symbols would make
//! real data complex.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::fields::{
    inverse_dft, lp_norm_gamma, BoundaryField, FieldArray, PhysicalField, SpectralField,
    TangentialGrid, WallGrid,
};
use crate::kernels::{RadialKernel, ResolventParams};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// Normal derivatives of every solution component at one mode and level.
#[derive(Debug, Clone, Copy, Default)]
pub struct ModeValues {
    /// `u_prime[k][j]` is `∂_y^k û′_j`, `k ≤ 2`.
    pub u_prime: [[Complex64; 2]; 3],
    /// `∂_y^k û_d`, `k ≤ 4`.
    pub u_d: [Complex64; 5],
    /// `∂_y^k π̂`, `k ≤ 2`.
    pub pressure: [Complex64; 3],
}

/// The closed-form solution restricted to a single tangential mode.
#[derive(Debug, Clone, Copy)]
pub struct ModeSolution {
    kernel: RadialKernel,
    tdim: usize,
    s: f64,
    direction: [f64; 2],
    along: Complex64,
    across: [Complex64; 2],
}

impl ModeSolution {
    pub fn new(params: &ResolventParams, xi: &[f64], phi_hat: &[Complex64]) -> Result<Self> {
        let tdim = params.tdim();
        if xi.len() != tdim || phi_hat.len() != tdim {
            return Err(invalid(format!("mode solution needs {tdim}-vectors for ξ and φ̂")));
        }
        let s = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut direction = [0.0; 2];
        let mut along = ZERO;
        if s > 0.0 {
            for a in 0..tdim {
                direction[a] = xi[a] / s;
                along += direction[a] * phi_hat[a];
            }
        }
        let mut across = [ZERO; 2];
        for a in 0..tdim {
            across[a] = phi_hat[a] - along * direction[a];
        }
        Ok(Self { kernel: RadialKernel::new(params, s), tdim, s, direction, along, across })
    }

    pub fn kernel(&self) -> &RadialKernel {
        &self.kernel
    }

    /// `(û′, û_d)` only.
    pub fn velocity(&self, y: f64) -> ([Complex64; 2], Complex64) {
        let k = &self.kernel;
        let mut m0 = [ZERO; 2];
        let m3 = k.dy_m0_series(y, &mut m0);
        let m4 = m3 * k.robin_inv();
        let mut u = [ZERO; 2];
        for a in 0..self.tdim {
            u[a] = -m0[1] * self.along * self.direction[a] + m4 * self.across[a];
        }
        (u, I * self.s * self.along * m0[0])
    }

    pub fn eval(&self, y: f64) -> ModeValues {
        let k = &self.kernel;
        let mut m0 = [ZERO; 5];
        let m3 = k.dy_m0_series(y, &mut m0);
        let m4 = m3 * k.robin_inv();
        let q = k.q();
        let mut out = ModeValues::default();
        let mut q_pow = Complex64::new(1.0, 0.0);
        for order in 0..3 {
            let normal = -m0[order + 1] * self.along;
            for a in 0..self.tdim {
                out.u_prime[order][a] = normal * self.direction[a] + q_pow * m4 * self.across[a];
            }
            q_pow *= -q;
        }
        let ud = I * self.s * self.along;
        for order in 0..5 {
            out.u_d[order] = ud * m0[order];
        }
        if self.s > 0.0 {
            let base = -I * self.along * k.pressure_profile(y);
            let mut s_pow = 1.0;
            for order in 0..3 {
                out.pressure[order] = base * s_pow;
                s_pow *= -self.s;
            }
        }
        out
    }
}

/// Spectral solution fields, all on the same grids.
#[derive(Debug, Clone)]
pub struct SpectralSolution {
    pub u_prime: SpectralField,
    pub u_d: SpectralField,
    pub pressure: SpectralField,
    pub dy_u_prime: SpectralField,
    pub dy_u_d: SpectralField,
    pub dy_pressure: SpectralField,
    pub dy2_u_prime: SpectralField,
    pub dy2_u_d: SpectralField,
}

/// Velocity, pressure, traces and analytic normal derivatives of one solve.
#[derive(Debug, Clone)]
pub struct SolutionBundle {
    pub params: ResolventParams,
    /// Boundary data actually used (Nyquist content removed), spectral.
    pub phi_hat: SpectralField,
    pub u_prime: PhysicalField,
    pub u_d: PhysicalField,
    pub pressure: PhysicalField,
    pub trace_u_prime: BoundaryField,
    pub dy_u_prime: PhysicalField,
    pub dy_u_d: PhysicalField,
    pub dy_pressure: PhysicalField,
    pub spectral: SpectralSolution,
}

impl SolutionBundle {
    pub fn tgrid(&self) -> &TangentialGrid {
        self.u_prime.tgrid()
    }

    pub fn wgrid(&self) -> &WallGrid {
        self.u_prime.wgrid()
    }

    /// Velocity `(u′, u_d)` as one `d`-component physical field.
    pub fn velocity(&self) -> PhysicalField {
        PhysicalField(FieldArray::stack(&[&self.u_prime, &self.u_d]).expect("same grids"))
    }
}

fn check_inputs(params: &ResolventParams, tgrid: &TangentialGrid, phi: &BoundaryField) -> Result<()> {
    if tgrid.tdim != params.tdim() {
        return Err(invalid(format!(
            "tangential grid has dimension {}, but d − 1 = {}",
            tgrid.tdim,
            params.tdim()
        )));
    }
    if phi.components() != params.tdim() {
        return Err(Error::ShapeMismatch(format!(
            "boundary data has {} components, expected d − 1 = {}",
            phi.components(),
            params.tdim()
        )));
    }
    if phi.tgrid() != tgrid {
        return Err(Error::ShapeMismatch("boundary data lives on a different tangential grid".into()));
    }
    Ok(())
}

/// Spectral boundary data with the Nyquist modes zeroed.
pub fn filtered_phi_hat(phi: &BoundaryField) -> SpectralField {
    let mut hat = phi.spectral();
    let tg = *hat.tgrid();
    let c = hat.components();
    for point in 0..tg.points() {
        if tg.is_nyquist(point) {
            for j in 0..c {
                hat.set(point, 0, j, ZERO);
            }
        }
    }
    hat
}

fn phi_at(phi_hat: &SpectralField, point: usize) -> [Complex64; 2] {
    let mut v = [ZERO; 2];
    for (j, slot) in v.iter_mut().enumerate().take(phi_hat.components()) {
        *slot = phi_hat.get(point, 0, j);
    }
    v
}

/// Applies `per_node(mode, level, y, out)` on every (mode, level) pair in
/// parallel and returns the `width`-strided buffer.
fn assemble(
    tgrid: &TangentialGrid,
    wgrid: &WallGrid,
    width: usize,
    per_mode: impl Fn(usize, &[f64], &mut [Complex64]) + Sync,
) -> Vec<Complex64> {
    let levels = wgrid.len();
    let mut buf = vec![ZERO; tgrid.points() * levels * width];
    buf.par_chunks_mut(levels * width).enumerate().for_each(|(point, chunk)| {
        per_mode(point, wgrid.levels(), chunk);
    });
    buf
}

fn split(tgrid: &TangentialGrid, wgrid: &WallGrid, buf: &[Complex64], width: usize, range: std::ops::Range<usize>) -> SpectralField {
    let c = range.len();
    let mut values = Vec::with_capacity(buf.len() / width * c);
    for node in buf.chunks_exact(width) {
        values.extend_from_slice(&node[range.clone()]);
    }
    SpectralField(FieldArray::from_values(*tgrid, wgrid.clone(), c, values).expect("consistent shape"))
}

/// Solves the boundary-driven resolvent problem for tangential data `φ`.
pub fn solve_boundary_driven(
    params: &ResolventParams,
    tgrid: &TangentialGrid,
    wgrid: &WallGrid,
    phi: &BoundaryField,
) -> Result<SolutionBundle> {
    check_inputs(params, tgrid, phi)?;
    let phi_hat = filtered_phi_hat(phi);
    let t = params.tdim();
    // node layout: u′, ∂u′, ∂²u′, u_d, ∂u_d, ∂²u_d, π, ∂π
    let width = 3 * t + 5;
    let buf = assemble(tgrid, wgrid, width, |point, levels, chunk| {
        let phi = phi_at(&phi_hat, point);
        if phi[..t].iter().all(|v| *v == ZERO) {
            return;
        }
        let xi = tgrid.xi(point);
        let mode = ModeSolution::new(params, &xi[..t], &phi[..t]).expect("validated shapes");
        for (l, &y) in levels.iter().enumerate() {
            let v = mode.eval(y);
            let node = &mut chunk[l * width..(l + 1) * width];
            for order in 0..3 {
                node[order * t..(order + 1) * t].copy_from_slice(&v.u_prime[order][..t]);
            }
            node[3 * t..3 * t + 3].copy_from_slice(&v.u_d[..3]);
            node[3 * t + 3] = v.pressure[0];
            node[3 * t + 4] = v.pressure[1];
        }
    });
    let o = 3 * t;
    let spectral = SpectralSolution {
        u_prime: split(tgrid, wgrid, &buf, width, 0..t),
        dy_u_prime: split(tgrid, wgrid, &buf, width, t..2 * t),
        dy2_u_prime: split(tgrid, wgrid, &buf, width, 2 * t..3 * t),
        u_d: split(tgrid, wgrid, &buf, width, o..o + 1),
        dy_u_d: split(tgrid, wgrid, &buf, width, o + 1..o + 2),
        dy2_u_d: split(tgrid, wgrid, &buf, width, o + 2..o + 3),
        pressure: split(tgrid, wgrid, &buf, width, o + 3..o + 4),
        dy_pressure: split(tgrid, wgrid, &buf, width, o + 4..o + 5),
    };
    drop(buf);
    let u_prime = inverse_dft(&spectral.u_prime)?;
    let trace_u_prime = BoundaryField::trace_of(&u_prime)?;
    Ok(SolutionBundle {
        params: *params,
        phi_hat,
        trace_u_prime,
        u_d: inverse_dft(&spectral.u_d)?,
        pressure: inverse_dft(&spectral.pressure)?,
        dy_u_prime: inverse_dft(&spectral.dy_u_prime)?,
        dy_u_d: inverse_dft(&spectral.dy_u_d)?,
        dy_pressure: inverse_dft(&spectral.dy_pressure)?,
        u_prime,
        spectral,
    })
}

/// Physical velocity `(u′, u_d)` only; the light-weight path used by parameter sweeps.
pub fn solve_velocity(
    params: &ResolventParams,
    tgrid: &TangentialGrid,
    wgrid: &WallGrid,
    phi_hat: &SpectralField,
) -> Result<PhysicalField> {
    let t = params.tdim();
    if phi_hat.components() != t || phi_hat.tgrid() != tgrid || tgrid.tdim != t {
        return Err(Error::ShapeMismatch("boundary data does not match the problem".into()));
    }
    let width = t + 1;
    let buf = assemble(tgrid, wgrid, width, |point, levels, chunk| {
        let phi = phi_at(phi_hat, point);
        if tgrid.is_nyquist(point) || phi[..t].iter().all(|v| *v == ZERO) {
            return;
        }
        let xi = tgrid.xi(point);
        let mode = ModeSolution::new(params, &xi[..t], &phi[..t]).expect("validated shapes");
        for (l, &y) in levels.iter().enumerate() {
            let (u, ud) = mode.velocity(y);
            let node = &mut chunk[l * width..(l + 1) * width];
            node[..t].copy_from_slice(&u[..t]);
            node[t] = ud;
        }
    });
    let spec = SpectralField(FieldArray::from_values(*tgrid, wgrid.clone(), width, buf)?);
    inverse_dft(&spec)
}

/// Scale used to make residuals relative: `max_ξ |φ̂(ξ)|`.
fn phi_scale(phi_hat: &SpectralField) -> f64 {
    let c = phi_hat.components();
    (0..phi_hat.tgrid().points())
        .map(|p| (0..c).map(|j| phi_hat.get(p, 0, j).norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max)
}

fn relative(value: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        value / scale
    } else {
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InteriorResidual {
    /// `max |(λ + |ξ|² − ∂_y²)û + (iξ, ∂_y)π̂| / max |φ̂|`
    pub momentum_max: f64,
    /// root-mean-square over all (mode, level) pairs, relative to the rms of `|φ̂|`
    pub momentum_l2: f64,
    /// `max |iξ·û′ + ∂_y û_d| / max |φ̂|`
    pub divergence_max: f64,
}

pub fn residual_interior(bundle: &SolutionBundle) -> InteriorResidual {
    let sp = &bundle.spectral;
    let tg = *bundle.tgrid();
    let t = bundle.params.tdim();
    let lambda = bundle.params.lambda;
    let levels = bundle.wgrid().len();
    let (mut mom_max, mut mom_sq, mut div_max) = (0.0f64, 0.0f64, 0.0f64);
    for point in 0..tg.points() {
        let xi = tg.xi(point);
        let s2: f64 = xi[..t].iter().map(|v| v * v).sum();
        for l in 0..levels {
            let mut sq = 0.0;
            let mut div = sp.dy_u_d.get(point, l, 0);
            for a in 0..t {
                let u = sp.u_prime.get(point, l, a);
                let r = (lambda + s2) * u - sp.dy2_u_prime.get(point, l, a) + I * xi[a] * sp.pressure.get(point, l, 0);
                sq += r.norm_sqr();
                div += I * xi[a] * u;
            }
            let r = (lambda + s2) * sp.u_d.get(point, l, 0) - sp.dy2_u_d.get(point, l, 0) + sp.dy_pressure.get(point, l, 0);
            sq += r.norm_sqr();
            mom_max = mom_max.max(sq.sqrt());
            mom_sq += sq;
            div_max = div_max.max(div.norm());
        }
    }
    let scale = phi_scale(&bundle.phi_hat);
    let phi_sq: f64 = (0..tg.points())
        .map(|p| (0..t).map(|j| bundle.phi_hat.get(p, 0, j).norm_sqr()).sum::<f64>())
        .sum();
    let rms_phi = (phi_sq / tg.points() as f64).sqrt();
    let rms_res = (mom_sq / (tg.points() * levels) as f64).sqrt();
    InteriorResidual {
        momentum_max: relative(mom_max, scale),
        momentum_l2: relative(rms_res, rms_phi),
        divergence_max: relative(div_max, scale),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryResidual {
    /// `max_ξ |(λ + α)û′ − ∂_y û′ − φ̂|` at `y = 0`, relative to `max |φ̂|`
    pub dynamic_max: f64,
    /// `‖(λ + α)u′ − ∂_y u′ − φ‖_{L²(Γ)} / ‖φ‖_{L²(Γ)}`
    pub dynamic_l2: f64,
    /// `max_ξ |û_d(ξ, 0)|` relative to `max |φ̂|`
    pub trace_u_d_max: f64,
    /// `‖u_d(·, 0)‖_{L²(Γ)} / ‖φ‖_{L²(Γ)}`
    pub trace_u_d_l2: f64,
}

pub fn residual_boundary(bundle: &SolutionBundle, phi: &BoundaryField) -> Result<BoundaryResidual> {
    let phi_hat = filtered_phi_hat(phi);
    if phi_hat.tgrid() != bundle.tgrid() || phi_hat.components() != bundle.params.tdim() {
        return Err(Error::ShapeMismatch("boundary data does not match the bundle".into()));
    }
    let sp = &bundle.spectral;
    let tg = *bundle.tgrid();
    let t = bundle.params.tdim();
    let robin = bundle.params.lambda + bundle.params.alpha;
    let mut res = SpectralField::zeros(tg, WallGrid::trace(), t);
    let mut ud = SpectralField::zeros(tg, WallGrid::trace(), 1);
    let (mut dyn_max, mut ud_max) = (0.0f64, 0.0f64);
    for point in 0..tg.points() {
        let mut sq = 0.0;
        for a in 0..t {
            let r = robin * sp.u_prime.get(point, 0, a) - sp.dy_u_prime.get(point, 0, a) - phi_hat.get(point, 0, a);
            res.set(point, 0, a, r);
            sq += r.norm_sqr();
        }
        dyn_max = dyn_max.max(sq.sqrt());
        let v = sp.u_d.get(point, 0, 0);
        ud.set(point, 0, 0, v);
        ud_max = ud_max.max(v.norm());
    }
    let scale = phi_scale(&phi_hat);
    let phi_l2 = lp_norm_gamma(&BoundaryField::from_spectral(&phi_hat)?, 2.0)?;
    Ok(BoundaryResidual {
        dynamic_max: relative(dyn_max, scale),
        dynamic_l2: relative(lp_norm_gamma(&BoundaryField::from_spectral(&res)?, 2.0)?, phi_l2),
        trace_u_d_max: relative(ud_max, scale),
        trace_u_d_l2: relative(lp_norm_gamma(&BoundaryField::from_spectral(&ud)?, 2.0)?, phi_l2),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiharmonicResidual {
    /// `max |(λ + s² − ∂²)(s² − ∂²)û_d|`, each point relative to the sum of its term magnitudes
    pub interior_max: f64,
    /// `max_ξ |(λ + α − ∂_y)∂_y û_d + iξ·φ̂|` at `y = 0`, relative to `max |ξ||φ̂|`
    pub boundary_max: f64,
}

pub fn biharmonic_check(bundle: &SolutionBundle) -> BiharmonicResidual {
    let sp = &bundle.spectral;
    let tg = *bundle.tgrid();
    let params = bundle.params;
    let t = params.tdim();
    let lambda = params.lambda;
    let levels = bundle.wgrid().levels();
    let per_point: Vec<(f64, f64, f64)> = (0..tg.points())
        .into_par_iter()
        .map(|point| {
            let phi = phi_at(&bundle.phi_hat, point);
            let xi = tg.xi(point);
            let s2: f64 = xi[..t].iter().map(|v| v * v).sum();
            let mode = ModeSolution::new(&params, &xi[..t], &phi[..t]).expect("validated shapes");
            let mut worst = 0.0f64;
            for (l, &y) in levels.iter().enumerate() {
                let higher = mode.eval(y);
                let u = sp.u_d.get(point, l, 0);
                let d2 = sp.dy2_u_d.get(point, l, 0);
                let d4 = higher.u_d[4];
                let terms = [(lambda + s2) * s2 * u, -(lambda + 2.0 * s2) * d2, d4];
                let scale: f64 = terms.iter().map(|v| v.norm()).sum();
                let r: Complex64 = terms.iter().sum();
                if scale > 0.0 {
                    worst = worst.max(r.norm() / scale);
                }
            }
            let div_phi: Complex64 = (0..t).map(|a| I * xi[a] * phi[a]).sum();
            let row = (lambda + params.alpha) * sp.dy_u_d.get(point, 0, 0) - sp.dy2_u_d.get(point, 0, 0) + div_phi;
            let data = s2.sqrt() * (0..t).map(|a| phi[a].norm_sqr()).sum::<f64>().sqrt();
            (worst, row.norm(), data)
        })
        .collect();
    let interior_max = per_point.iter().map(|v| v.0).fold(0.0, f64::max);
    let row_max = per_point.iter().map(|v| v.1).fold(0.0, f64::max);
    let data_max = per_point.iter().map(|v| v.2).fold(0.0, f64::max);
    BiharmonicResidual { interior_max, boundary_max: relative(row_max, data_max) }
}

/// Maximum relative deviation of the stored analytic `∂_y` fields from
/// Richardson-extrapolated central differences of the closed forms.
///
/// Each mode uses the step `h = relative_step / max(|q|, 1)`; levels with
/// `y < 2h` are skipped.
pub fn normal_derivative_fd_deviation(bundle: &SolutionBundle, relative_step: f64) -> f64 {
    let sp = &bundle.spectral;
    let tg = *bundle.tgrid();
    let params = bundle.params;
    let t = params.tdim();
    let levels = bundle.wgrid().levels();
    let mut num = [0.0f64; 3];
    let mut den = [0.0f64; 3];
    for point in 0..tg.points() {
        let phi = phi_at(&bundle.phi_hat, point);
        let xi = tg.xi(point);
        let mode = ModeSolution::new(&params, &xi[..t], &phi[..t]).expect("validated shapes");
        let h = relative_step / mode.kernel().q().norm().max(1.0);
        for (l, &y) in levels.iter().enumerate().filter(|(_, &y)| y >= 2.0 * h) {
            let central = |step: f64| {
                let (p, m) = (mode.eval(y + step), mode.eval(y - step));
                let mut up = [ZERO; 2];
                for a in 0..t {
                    up[a] = (p.u_prime[0][a] - m.u_prime[0][a]) / (2.0 * step);
                }
                (up, (p.u_d[0] - m.u_d[0]) / (2.0 * step), (p.pressure[0] - m.pressure[0]) / (2.0 * step))
            };
            let (c1, c2) = (central(h), central(0.5 * h));
            let rich = |a: Complex64, b: Complex64| (4.0 * b - a) / 3.0;
            for a in 0..t {
                let exact = sp.dy_u_prime.get(point, l, a);
                num[0] = num[0].max((exact - rich(c1.0[a], c2.0[a])).norm());
                den[0] = den[0].max(exact.norm());
            }
            let exact = sp.dy_u_d.get(point, l, 0);
            num[1] = num[1].max((exact - rich(c1.1, c2.1)).norm());
            den[1] = den[1].max(exact.norm());
            let exact = sp.dy_pressure.get(point, l, 0);
            num[2] = num[2].max((exact - rich(c1.2, c2.2)).norm());
            den[2] = den[2].max(exact.norm());
        }
    }
    (0..3).map(|i| relative(num[i], den[i])).fold(0.0, f64::max)
}

/// A smooth, band-limited, divergence-free field with zero normal trace:
/// `ψ̂′ = b̂(ξ) g′(y)`, `ψ̂_d = −iξ·b̂(ξ) g(y)` with `g(y) = y e^{−κy}`.
#[derive(Debug, Clone)]
pub struct SolenoidalTestField {
    tgrid: TangentialGrid,
    coefficients: SpectralField,
    decay: f64,
}

impl SolenoidalTestField {
    /// `coefficients` holds `b̂` with `tdim` components on the trace level.
    pub fn new(coefficients: SpectralField, decay: f64) -> Result<Self> {
        if !(decay > 0.0) {
            return Err(invalid("test field decay rate must be positive"));
        }
        if coefficients.components() != coefficients.tgrid().tdim || coefficients.levels() != 1 {
            return Err(Error::ShapeMismatch("test field coefficients need tdim components on one level".into()));
        }
        Ok(Self { tgrid: *coefficients.tgrid(), coefficients, decay })
    }

    /// Value and `∂_y` of all `d` components at spectral point `point`.
    pub fn mode(&self, point: usize, y: f64) -> ([Complex64; 3], [Complex64; 3]) {
        let t = self.tgrid.tdim;
        let k = self.decay;
        let e = (-k * y).exp();
        let (g, dg, d2g) = (y * e, (1.0 - k * y) * e, (k * k * y - 2.0 * k) * e);
        let xi = self.tgrid.xi(point);
        let mut value = [ZERO; 3];
        let mut dy = [ZERO; 3];
        let mut xi_b = ZERO;
        for a in 0..t {
            let b = self.coefficients.get(point, 0, a);
            value[a] = b * dg;
            dy[a] = b * d2g;
            xi_b += xi[a] * b;
        }
        value[t] = -I * xi_b * g;
        dy[t] = -I * xi_b * dg;
        (value, dy)
    }

    pub fn to_physical(&self, wgrid: &WallGrid) -> Result<PhysicalField> {
        let t = self.tgrid.tdim;
        let mut spec = SpectralField::zeros(self.tgrid, wgrid.clone(), t + 1);
        for point in 0..self.tgrid.points() {
            for (l, &y) in wgrid.levels().iter().enumerate() {
                let (v, _) = self.mode(point, y);
                for j in 0..=t {
                    spec.set(point, l, j, v[j]);
                }
            }
        }
        inverse_dft(&spec)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakFormReport {
    pub defect: Complex64,
    /// Largest magnitude among the four integrals of the identity.
    pub largest_term: f64,
    pub relative: f64,
}

/// Evaluates `λ∫u·ψ̄ + (λ+α)∫_Γ u·ψ̄ + ∫2D(u):D(ψ̄) − ∫_Γ φ·ψ̄` by Parseval in the
/// tangential variables and the trapezoid rule on the bundle's wall grid.
pub fn weak_form_check(bundle: &SolutionBundle, test: &SolenoidalTestField) -> Result<WeakFormReport> {
    let tg = *bundle.tgrid();
    if test.tgrid != tg {
        return Err(Error::ShapeMismatch("test field lives on a different tangential grid".into()));
    }
    let sp = &bundle.spectral;
    let params = bundle.params;
    let t = params.tdim();
    let d = t + 1;
    let lambda = params.lambda;
    let levels = bundle.wgrid().levels();
    let weights = bundle.wgrid().trapezoid_weights();
    let parseval = tg.cell_weight() / tg.points() as f64;

    let mut mass = ZERO;
    let mut strain = ZERO;
    let mut boundary = ZERO;
    let mut data = ZERO;
    for point in 0..tg.points() {
        let xi = tg.xi(point);
        for (l, &y) in levels.iter().enumerate() {
            let (psi, dpsi) = test.mode(point, y);
            let mut u = [ZERO; 3];
            let mut du = [ZERO; 3];
            for a in 0..t {
                u[a] = sp.u_prime.get(point, l, a);
                du[a] = sp.dy_u_prime.get(point, l, a);
            }
            u[t] = sp.u_d.get(point, l, 0);
            du[t] = sp.dy_u_d.get(point, l, 0);
            // grad[i][j] = ∂_i v_j with i = d − 1 the normal direction
            let grad = |v: &[Complex64; 3], dv: &[Complex64; 3]| {
                let mut g = [[ZERO; 3]; 3];
                for j in 0..d {
                    for a in 0..t {
                        g[a][j] = I * xi[a] * v[j];
                    }
                    g[t][j] = dv[j];
                }
                g
            };
            let (gu, gpsi) = (grad(&u, &du), grad(&psi, &dpsi));
            let mut local_mass = ZERO;
            let mut local_strain = ZERO;
            for i in 0..d {
                local_mass += u[i] * psi[i].conj();
                for j in 0..d {
                    let du_ij = 0.5 * (gu[i][j] + gu[j][i]);
                    let dpsi_ij = 0.5 * (gpsi[i][j] + gpsi[j][i]);
                    local_strain += 2.0 * du_ij * dpsi_ij.conj();
                }
            }
            mass += weights[l] * local_mass;
            strain += weights[l] * local_strain;
            if l == 0 {
                for a in 0..t {
                    boundary += u[a] * psi[a].conj();
                    data += bundle.phi_hat.get(point, 0, a) * psi[a].conj();
                }
            }
        }
    }
    let terms = [lambda * mass * parseval, (lambda + params.alpha) * boundary * parseval, strain * parseval, data * parseval];
    let defect = terms[0] + terms[1] + terms[2] - terms[3];
    let largest_term = terms.iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(WeakFormReport { defect, largest_term, relative: relative(defect.norm(), largest_term) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fields::TangentialGrid;
    use std::f64::consts::PI;

    fn setup() -> (ResolventParams, TangentialGrid, WallGrid) {
        let params = ResolventParams::new(Complex64::from_polar(3.0, 0.8), 0.5, 2).unwrap();
        let tg = TangentialGrid::new(1, 16, 2.0 * PI).unwrap();
        let wg = WallGrid::geometric(12.0, 48, 0.01).unwrap();
        (params, tg, wg)
    }

    #[test]
    fn zero_data_gives_zero_bundle() {
        let (params, tg, wg) = setup();
        let phi = BoundaryField::from_fn(tg, 1, |_, _| {});
        let b = solve_boundary_driven(&params, &tg, &wg, &phi).unwrap();
        assert_eq!(b.u_prime.max_abs(), 0.0);
        assert_eq!(b.u_d.max_abs(), 0.0);
        assert_eq!(b.pressure.max_abs(), 0.0);
        let r = residual_interior(&b);
        assert_eq!(r.momentum_max, 0.0);
        let bc = residual_boundary(&b, &phi).unwrap();
        assert_eq!(bc.dynamic_max, 0.0);
        assert_eq!(biharmonic_check(&b).interior_max, 0.0);
    }

    #[test]
    fn rejects_mismatched_inputs() {
        let (params, tg, wg) = setup();
        let phi = BoundaryField::from_fn(tg, 2, |_, _| {});
        assert!(matches!(solve_boundary_driven(&params, &tg, &wg, &phi), Err(Error::ShapeMismatch(_))));
        let p3 = ResolventParams::new(Complex64::new(1.0, 0.0), 0.0, 3).unwrap();
        let phi = BoundaryField::from_fn(tg, 1, |_, _| {});
        assert!(solve_boundary_driven(&p3, &tg, &wg, &phi).is_err());
    }

    #[test]
    fn single_harmonic_matches_kernel() {
        let (params, tg, wg) = setup();
        let amp = Complex64::new(0.3, -1.1);
        let phi = BoundaryField::from_fn(tg, 1, |x, out| out[0] = amp * Complex64::new(0.0, 2.0 * x[0]).exp());
        let b = solve_boundary_driven(&params, &tg, &wg, &phi).unwrap();
        let k2 = tg.mode_index(2);
        for (l, &y) in wg.levels().iter().enumerate() {
            let m0 = crate::kernels::m0(&params, crate::kernels::KernelPoint { s: 2.0, y });
            let expected = Complex64::new(0.0, 2.0) * m0 * amp * 16.0;
            assert!((b.spectral.u_d.get(k2, l, 0) - expected).norm() < 1e-13 * (1.0 + expected.norm()));
            for point in (0..16).filter(|&p| p != k2) {
                assert!(b.spectral.u_d.get(point, l, 0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn xi_zero_mode_uses_continuous_extension() {
        let (params, tg, wg) = setup();
        let phi = BoundaryField::from_fn(tg, 1, |_, out| out[0] = Complex64::new(2.0, 0.0));
        let b = solve_boundary_driven(&params, &tg, &wg, &phi).unwrap();
        let bc = residual_boundary(&b, &phi).unwrap();
        assert!(bc.dynamic_max < 1e-14);
        assert_eq!(b.pressure.max_abs(), 0.0);
        assert_eq!(b.u_d.max_abs(), 0.0);
    }

    #[test]
    fn weak_form_vanishes_for_zero_data() {
        let (params, tg, wg) = setup();
        let phi = BoundaryField::from_fn(tg, 1, |_, _| {});
        let b = solve_boundary_driven(&params, &tg, &wg, &phi).unwrap();
        let mut coeff = SpectralField::zeros(tg, WallGrid::trace(), 1);
        coeff.set(1, 0, 0, Complex64::new(1.0, 0.0));
        let test = SolenoidalTestField::new(coeff, 1.0).unwrap();
        let r = weak_form_check(&b, &test).unwrap();
        assert_eq!(r.defect, ZERO);
    }
}

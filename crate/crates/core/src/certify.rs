//! Numerical certification of multiplier bounds and the elementary inequalities
//! behind them.
//!
//! A symbol is sampled on a radial grid `s ∈ S`, a wall grid `y ∈ Y` and a set
//! of sector points `λ = r e^{iθ}`. For condition (M*) the reported quantity is
//!
//! ```text
//! sup (1 + y) s^k |∂_s^k m(s, y)| e^{δ s y}
//! ```
//!
//! and for condition (M) it is `sup s^k |∂_s^k m(s)|`. First derivatives are
//! analytic; second derivatives are Richardson-extrapolated central differences
//! of the analytic first derivative. Each certificate is recomputed on grids
//! with every `s` and `y` interval halved and the relative change is reported.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::kernels::{RadialKernel, ResolventParams, SectorSpec};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Logarithmically spaced samples, optionally with `0` prepended.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAxis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    pub include_zero: bool,
}

impl LogAxis {
    pub fn new(lo: f64, hi: f64, count: usize, include_zero: bool) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && hi.is_finite()) || count == 0 || (count == 1 && hi != lo) {
            return Err(invalid(format!("log axis needs 0 < lo ≤ hi and count ≥ 1 (lo = {lo}, hi = {hi}, count = {count})")));
        }
        Ok(Self { lo, hi, count, include_zero })
    }

    pub fn points(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.count + 1);
        if self.include_zero {
            out.push(0.0);
        }
        if self.count == 1 {
            out.push(self.lo);
            return out;
        }
        let (a, b) = (self.lo.ln(), self.hi.ln());
        let m = (self.count - 1) as f64;
        for j in 0..self.count {
            out.push(if j + 1 == self.count { self.hi } else { (a + (b - a) * j as f64 / m).exp() });
        }
        out
    }

    /// Same range with every interval halved; contains the original points.
    pub fn refined(&self) -> Self {
        Self { count: 2 * self.count - 1, ..*self }
    }

    pub fn len(&self) -> usize {
        self.count + usize::from(self.include_zero)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Sample points `λ = r e^{iθ}` strictly inside the sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSampleGrid {
    pub sector: SectorSpec,
    pub moduli: LogAxis,
    /// Number of equally spaced angles in `[−θ_max, θ_max]`.
    pub angle_count: usize,
    /// `θ_max = π − ε − margin`.
    pub margin: f64,
}

impl SectorSampleGrid {
    pub fn new(sector: SectorSpec, moduli: LogAxis, angle_count: usize, margin: f64) -> Result<Self> {
        if moduli.include_zero {
            return Err(invalid("sector moduli must be positive"));
        }
        if angle_count == 0 {
            return Err(invalid("sector grid needs at least one angle"));
        }
        if !(margin > 0.0) || sector.max_angle() - margin <= 0.0 {
            return Err(invalid(format!("angular margin {margin} must be positive and smaller than π − ε")));
        }
        Ok(Self { sector, moduli, angle_count, margin })
    }

    /// `|λ| ∈ logspace(ω, 10⁴, 25)`, five angles, margin `π/90`.
    pub fn default_for(sector: SectorSpec) -> Result<Self> {
        Self::new(sector, LogAxis::new(sector.omega, 1e4_f64.max(sector.omega), 25, false)?, 5, PI / 90.0)
    }

    pub fn max_angle(&self) -> f64 {
        self.sector.max_angle() - self.margin
    }

    pub fn angles(&self) -> Vec<f64> {
        let t = self.max_angle();
        if self.angle_count == 1 {
            return vec![0.0];
        }
        let m = (self.angle_count - 1) as f64;
        (0..self.angle_count).map(|j| -t + 2.0 * t * j as f64 / m).collect()
    }

    /// `(modulus, angle)` pairs, modulus slowest.
    pub fn samples(&self) -> Vec<(f64, f64)> {
        let angles = self.angles();
        self.moduli.points().into_iter().flat_map(|r| angles.iter().map(move |&a| (r, a))).collect()
    }

    pub fn len(&self) -> usize {
        self.moduli.len() * self.angle_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Everything a certificate is evaluated on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CertificationGrids {
    pub sector: SectorSampleGrid,
    pub s: LogAxis,
    pub y: LogAxis,
    pub alpha: f64,
    pub dim: usize,
    /// `(modulus, angle)` used by symbols that are certified at fixed `λ`.
    pub fixed_lambda: (f64, f64),
}

impl CertificationGrids {
    pub fn new(sector: SectorSampleGrid, s: LogAxis, y: LogAxis, alpha: f64, dim: usize, fixed_lambda: (f64, f64)) -> Result<Self> {
        let grids = Self { sector, s, y, alpha, dim, fixed_lambda };
        ResolventParams::new(Complex64::from_polar(fixed_lambda.0, fixed_lambda.1), alpha, dim)?;
        if !grids.sector.sector.contains(Complex64::from_polar(fixed_lambda.0, fixed_lambda.1)) {
            return Err(invalid("the fixed certification λ must lie in the sector"));
        }
        if grids.sector.moduli.lo < grids.sector.sector.omega {
            return Err(invalid("certification moduli must satisfy |λ| ≥ ω"));
        }
        Ok(grids)
    }

    /// `s ∈ logspace(10⁻³, 10³, 200) ∪ {0}`, `y ∈ logspace(10⁻³, 10², 200) ∪ {0}`
    /// and the default sector grid; about 5·10⁶ points.
    pub fn default_for(sector: SectorSpec, alpha: f64, dim: usize) -> Result<Self> {
        Self::new(
            SectorSampleGrid::default_for(sector)?,
            LogAxis::new(1e-3, 1e3, 200, true)?,
            LogAxis::new(1e-3, 1e2, 200, true)?,
            alpha,
            dim,
            (1.0_f64.max(sector.omega), 0.0),
        )
    }

    /// Radial and wall grids doubled; sector samples unchanged.
    pub fn refined(&self) -> Self {
        Self { s: self.s.refined(), y: self.y.refined(), ..*self }
    }

    pub fn point_count(&self) -> usize {
        self.sector.len() * self.s.len() * self.y.len()
    }

    fn params(&self, modulus: f64, angle: f64) -> ResolventParams {
        ResolventParams::new(Complex64::from_polar(modulus, angle), self.alpha, self.dim).expect("validated sector sample")
    }
}

/// Symbols of condition (M*), functions of `(s, y)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MStarSymbol {
    M1,
    M2,
    M3,
    /// `s ∂_y m0`
    SDyM0,
    /// `s m4`
    SM4,
    /// `s² m0`
    S2M0,
}

impl MStarSymbol {
    pub const ALL: [Self; 6] = [Self::M1, Self::M2, Self::M3, Self::SDyM0, Self::SM4, Self::S2M0];

    pub fn id(&self) -> &'static str {
        match self {
            Self::M1 => "m1",
            Self::M2 => "m2",
            Self::M3 => "m3",
            Self::SDyM0 => "s_dy_m0",
            Self::SM4 => "s_m4",
            Self::S2M0 => "s2_m0",
        }
    }

    /// Symbols whose bound is claimed uniformly in `|λ| ≥ ω`.
    pub fn uniform_in_lambda(&self) -> bool {
        matches!(self, Self::M1 | Self::M2 | Self::M3)
    }

    /// Value and `∂_s` at `(s, y)`.
    pub fn eval(&self, k: &RadialKernel, y: f64) -> (Complex64, Complex64) {
        let s = k.s();
        let lambda = k.lambda();
        let m1 = || (k.m1(y), lambda * (k.m0(y) + s * k.ds_m0(y)));
        let m2 = || {
            let (_, dm1) = m1();
            let ds_d_inv = -k.d_inv() * k.d_inv() * (1.0 + s / k.q());
            (k.m2(y), -dm1 - lambda * (ds_d_inv * k.m3(y) + k.d_inv() * k.ds_m3(y)))
        };
        match self {
            Self::M1 => m1(),
            Self::M2 => m2(),
            Self::M3 => (k.m3(y), k.ds_m3(y)),
            Self::SDyM0 => {
                let (v, dv) = m2();
                (s * v / lambda, (v + s * dv) / lambda)
            }
            Self::SM4 => (s * k.m4(y), k.m4(y) + s * k.ds_m4(y)),
            Self::S2M0 => {
                let m0 = k.m0(y);
                (s * s * m0, 2.0 * s * m0 + s * s * k.ds_m0(y))
            }
        }
    }
}

impl std::str::FromStr for MStarSymbol {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.id() == s)
            .ok_or_else(|| invalid(format!("unknown (M*) symbol '{s}'")))
    }
}

/// Symbols of condition (M), functions of `s` only.
///
/// `LambdaRobin` is the radial factor of `λ(Id − ξξᵀ/|ξ|²)/(λ + α + q)`; the
/// projector is homogeneous of degree zero and smooth off the origin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MSymbol {
    /// `λ/(λ + α + q)`
    LambdaRobin,
    /// `λ/(α + λ + s + q)`
    LambdaD,
    /// `s/(λ + α + q)`
    SRobin,
    /// `√λ (q + s)/(α + λ + q + s)`
    SqrtLambdaP,
    One,
}

impl MSymbol {
    pub const ALL: [Self; 5] = [Self::LambdaRobin, Self::LambdaD, Self::SRobin, Self::SqrtLambdaP, Self::One];

    pub fn id(&self) -> &'static str {
        match self {
            Self::LambdaRobin => "lambda_robin",
            Self::LambdaD => "lambda_d",
            Self::SRobin => "s_robin",
            Self::SqrtLambdaP => "sqrt_lambda_p",
            Self::One => "one",
        }
    }

    pub fn eval(&self, k: &RadialKernel) -> (Complex64, Complex64) {
        let s = k.s();
        let lambda = k.lambda();
        let dq = s / k.q();
        match self {
            Self::LambdaRobin => {
                let r = k.robin_inv();
                (lambda * r, -lambda * dq * r * r)
            }
            Self::LambdaD => {
                let d = k.d_inv();
                (lambda * d, -lambda * (1.0 + dq) * d * d)
            }
            Self::SRobin => {
                let r = k.robin_inv();
                (s * r, r - s * dq * r * r)
            }
            Self::SqrtLambdaP => {
                let root = lambda.sqrt();
                let p = k.p_factor();
                (root * p, root * p * (lambda + k.alpha()) * k.d_inv() / k.q())
            }
            Self::One => (ONE, ZERO),
        }
    }
}

impl std::str::FromStr for MSymbol {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|v| v.id() == s)
            .ok_or_else(|| invalid(format!("unknown (M) symbol '{s}'")))
    }
}

/// Any certifiable symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Symbol {
    MStar { symbol: MStarSymbol },
    M { symbol: MSymbol },
    /// `m · m*`
    Product { m: MSymbol, mstar: MStarSymbol },
    /// `e^{δ̃ s y} m*`
    Reweighted { mstar: MStarSymbol, delta_tilde: f64 },
}

impl Symbol {
    pub fn id(&self) -> String {
        match self {
            Self::MStar { symbol } => symbol.id().into(),
            Self::M { symbol } => symbol.id().into(),
            Self::Product { m, mstar } => format!("{}*{}", m.id(), mstar.id()),
            Self::Reweighted { mstar, delta_tilde } => format!("exp({delta_tilde}sy)*{}", mstar.id()),
        }
    }

    fn has_wall_weight(&self) -> bool {
        !matches!(self, Self::M { .. })
    }

    fn uniform_in_lambda(&self) -> bool {
        match self {
            Self::MStar { symbol } | Self::Product { mstar: symbol, .. } | Self::Reweighted { mstar: symbol, .. } => {
                symbol.uniform_in_lambda()
            }
            Self::M { .. } => true,
        }
    }

    pub fn eval(&self, k: &RadialKernel, y: f64) -> (Complex64, Complex64) {
        match self {
            Self::MStar { symbol } => symbol.eval(k, y),
            Self::M { symbol } => symbol.eval(k),
            Self::Product { m, mstar } => {
                let (a, da) = m.eval(k);
                let (b, db) = mstar.eval(k, y);
                (a * b, da * b + a * db)
            }
            Self::Reweighted { mstar, delta_tilde } => {
                let (b, db) = mstar.eval(k, y);
                let rate = delta_tilde * k.s() * y;
                (scaled_exp(rate, b), scaled_exp(rate, delta_tilde * y * b + db))
            }
        }
    }
}

/// `e^{rate}·z` without forming the possibly overflowing factor.
fn scaled_exp(rate: f64, z: Complex64) -> Complex64 {
    if z == ZERO {
        return ZERO;
    }
    Complex64::from_polar((rate + z.norm().ln()).exp(), z.arg())
}

/// Where the empirical supremum was attained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Location {
    pub s: f64,
    pub y: f64,
    pub lambda_modulus: f64,
    pub lambda_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierCertificate {
    pub symbol: Symbol,
    pub symbol_id: String,
    /// `"M*"` or `"M"`.
    pub condition: String,
    pub k: usize,
    pub delta: f64,
    /// `true` when swept over every sector sample, `false` when evaluated at `grids.fixed_lambda`.
    pub uniform_in_lambda: bool,
    pub grids: CertificationGrids,
    pub points: usize,
    pub empirical_sup: f64,
    pub argmax: Location,
    pub refined_sup: f64,
    pub refinement_drift: f64,
    /// Points where the difference step `max(s, 1)·10⁻⁴` did not fit inside `s > 0`.
    pub step_breakdowns: usize,
}

impl MultiplierCertificate {
    pub fn is_finite(&self) -> bool {
        self.empirical_sup.is_finite() && self.refined_sup.is_finite()
    }
}

/// Difference step for the radial variable.
pub fn radial_step(s: f64) -> f64 {
    s.max(1.0) * 1e-4
}

#[derive(Debug, Clone, Copy)]
struct Sup {
    value: f64,
    at: Location,
    breakdowns: usize,
}

impl Sup {
    fn empty() -> Self {
        Self { value: 0.0, at: Location { s: 0.0, y: 0.0, lambda_modulus: 0.0, lambda_angle: 0.0 }, breakdowns: 0 }
    }

    fn offer(&mut self, value: f64, at: Location) {
        // NaN poisons the supremum on purpose
        if value > self.value || value.is_nan() && !self.value.is_nan() {
            self.value = value;
            self.at = at;
        }
    }

    fn merge(mut self, other: Sup) -> Sup {
        self.breakdowns += other.breakdowns;
        self.offer(other.value, other.at);
        self
    }
}

fn richardson(f: impl Fn(f64) -> Complex64, h: f64) -> Complex64 {
    let central = |step: f64| (f(step) - f(-step)) / (2.0 * step);
    (4.0 * central(0.5 * h) - central(h)) / 3.0
}

/// Sup over one `λ` for every requested order at once.
fn sup_at_lambda(
    symbol: &Symbol,
    orders: &[usize],
    delta: f64,
    params: &ResolventParams,
    (modulus, angle): (f64, f64),
    s_points: &[f64],
    y_points: &[f64],
) -> Vec<Sup> {
    let wall = symbol.has_wall_weight();
    let ys: &[f64] = if wall { y_points } else { &[0.0] };
    let need_second = orders.contains(&2);
    let mut sups = vec![Sup::empty(); orders.len()];
    for &s in s_points {
        let kernel = RadialKernel::new(params, s);
        let h = radial_step(s);
        let step_ok = s - h > 0.0;
        let shifted: Vec<RadialKernel> = if need_second && step_ok {
            [h, -h, 0.5 * h, -0.5 * h].iter().map(|d| RadialKernel::new(params, s + d)).collect()
        } else {
            Vec::new()
        };
        for &y in ys {
            let (value, first) = symbol.eval(&kernel, y);
            let rate = if wall { delta * s * y } else { 0.0 };
            let at = Location { s, y, lambda_modulus: modulus, lambda_angle: angle };
            for (slot, &k) in sups.iter_mut().zip(orders) {
                let derivative = match k {
                    0 => value.norm(),
                    _ if s == 0.0 => 0.0,
                    1 => s * first.norm(),
                    _ => {
                        if !step_ok {
                            slot.breakdowns += 1;
                            continue;
                        }
                        let d1 = |i: usize| symbol.eval(&shifted[i], y).1;
                        let coarse = (d1(0) - d1(1)) / (2.0 * h);
                        let fine = (d1(2) - d1(3)) / h;
                        s * s * ((4.0 * fine - coarse) / 3.0).norm()
                    }
                };
                // combined in log form: deep in the wall the weight overflows while the symbol underflows
                let weighted = if derivative == 0.0 { 0.0 } else { (1.0 + y) * (rate + derivative.ln()).exp() };
                slot.offer(weighted, at);
            }
        }
    }
    sups
}

fn sweep(symbol: &Symbol, orders: &[usize], delta: f64, grids: &CertificationGrids) -> (Vec<Sup>, usize) {
    let s_points = grids.s.points();
    let y_points = grids.y.points();
    let lambdas = if symbol.uniform_in_lambda() { grids.sector.samples() } else { vec![grids.fixed_lambda] };
    let ys = if symbol.has_wall_weight() { y_points.len() } else { 1 };
    let points = lambdas.len() * s_points.len() * ys;
    let per_lambda: Vec<Vec<Sup>> = lambdas
        .par_iter()
        .map(|&(r, a)| sup_at_lambda(symbol, orders, delta, &grids.params(r, a), (r, a), &s_points, &y_points))
        .collect();
    let mut total = vec![Sup::empty(); orders.len()];
    for sups in per_lambda {
        for (t, s) in total.iter_mut().zip(sups) {
            *t = t.merge(s);
        }
    }
    (total, points)
}

fn check_orders(orders: &[usize], dim: usize) -> Result<()> {
    let cap = if dim == 2 { 1 } else { 2 };
    match orders.iter().find(|&&k| k > cap) {
        Some(k) => Err(invalid(format!("derivative order {k} exceeds {cap}, the largest order needed in dimension {dim}"))),
        None => Ok(()),
    }
}

/// Certifies `symbol` for each order in `orders` with one pass per grid.
pub fn certify_orders(symbol: Symbol, orders: &[usize], delta: f64, grids: &CertificationGrids) -> Result<Vec<MultiplierCertificate>> {
    check_orders(orders, grids.dim)?;
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(invalid(format!("weight rate δ must be nonnegative, got {delta}")));
    }
    let delta = if symbol.has_wall_weight() { delta } else { 0.0 };
    let (coarse, points) = sweep(&symbol, orders, delta, grids);
    let refined_grids = grids.refined();
    let (fine, _) = sweep(&symbol, orders, delta, &refined_grids);
    Ok(orders
        .iter()
        .zip(coarse.into_iter().zip(fine))
        .map(|(&k, (c, f))| MultiplierCertificate {
            symbol,
            symbol_id: symbol.id(),
            condition: if symbol.has_wall_weight() { "M*" } else { "M" }.into(),
            k,
            delta,
            uniform_in_lambda: symbol.uniform_in_lambda(),
            grids: *grids,
            points,
            empirical_sup: c.value,
            argmax: c.at,
            refined_sup: f.value,
            refinement_drift: relative_change(c.value, f.value),
            step_breakdowns: c.breakdowns,
        })
        .collect())
}

fn relative_change(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (b - a).abs() / a.abs().max(b.abs())
    }
}

pub fn certify_mstar(symbol: MStarSymbol, k: usize, delta: f64, grids: &CertificationGrids) -> Result<MultiplierCertificate> {
    Ok(certify_orders(Symbol::MStar { symbol }, &[k], delta, grids)?.remove(0))
}

pub fn certify_m(symbol: MSymbol, k: usize, grids: &CertificationGrids) -> Result<MultiplierCertificate> {
    Ok(certify_orders(Symbol::M { symbol }, &[k], 0.0, grids)?.remove(0))
}

/// The product `m m*` and the reweighted `e^{δ̃ s y} m*`, certified on the
/// grids of the (M*) certificate with rates `δ` and `δ − δ̃` respectively.
pub fn check_product_lemma(
    cert_m: &MultiplierCertificate,
    cert_mstar: &MultiplierCertificate,
    delta_tilde: f64,
) -> Result<(MultiplierCertificate, MultiplierCertificate)> {
    let (Symbol::M { symbol: m }, Symbol::MStar { symbol: mstar }) = (cert_m.symbol, cert_mstar.symbol) else {
        return Err(invalid("product lemma needs an (M) certificate and an (M*) certificate"));
    };
    if !(delta_tilde >= 0.0 && delta_tilde < cert_mstar.delta) {
        return Err(invalid(format!("δ̃ = {delta_tilde} must lie in [0, δ) with δ = {}", cert_mstar.delta)));
    }
    let k = cert_mstar.k;
    let grids = &cert_mstar.grids;
    let product = certify_orders(Symbol::Product { m, mstar }, &[k], cert_mstar.delta, grids)?.remove(0);
    let reweighted = certify_orders(Symbol::Reweighted { mstar, delta_tilde }, &[k], cert_mstar.delta - delta_tilde, grids)?.remove(0);
    Ok((product, reweighted))
}

/// Largest relative disagreement between analytic `∂_s` and a Richardson
/// difference of the values, over every symbol, sector sample, and a strided
/// subset of the radial and wall grids. The reference scale at each point is
/// `max(|∂_s m|, |m|/s)`; points where the symbol underflows are skipped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DerivativeAgreement {
    pub max_relative: f64,
    pub worst_symbol: &'static str,
    pub at: Location,
    pub compared: usize,
}

pub fn check_derivatives(grids: &CertificationGrids, stride: usize) -> DerivativeAgreement {
    let stride = stride.max(1);
    let s_points: Vec<f64> = grids.s.points().into_iter().filter(|&s| s > 0.0).step_by(stride).collect();
    let y_points: Vec<f64> = grids.y.points().into_iter().step_by(stride).collect();
    let symbols: Vec<Symbol> = MStarSymbol::ALL
        .iter()
        .map(|&symbol| Symbol::MStar { symbol })
        .chain(MSymbol::ALL.iter().map(|&symbol| Symbol::M { symbol }))
        .collect();
    let per_lambda: Vec<DerivativeAgreement> = grids
        .sector
        .samples()
        .par_iter()
        .map(|&(r, a)| {
            let params = grids.params(r, a);
            let mut best = DerivativeAgreement {
                max_relative: 0.0,
                worst_symbol: "",
                at: Location { s: 0.0, y: 0.0, lambda_modulus: r, lambda_angle: a },
                compared: 0,
            };
            for &s in &s_points {
                let h = radial_step(s);
                let kernel = RadialKernel::new(&params, s);
                let shifted: Vec<RadialKernel> =
                    [h, -h, 0.5 * h, -0.5 * h].iter().map(|d| RadialKernel::new(&params, s + d)).collect();
                for sym in &symbols {
                    let ys: &[f64] = if sym.has_wall_weight() { &y_points } else { &[0.0] };
                    for &y in ys {
                        let (value, analytic) = sym.eval(&kernel, y);
                        let scale = analytic.norm().max(value.norm() / s);
                        if !(scale > 1e-250) || !scale.is_finite() {
                            continue;
                        }
                        let v = |i: usize| sym.eval(&shifted[i], y).0;
                        let coarse = (v(0) - v(1)) / (2.0 * h);
                        let fine = (v(2) - v(3)) / h;
                        let fd = (4.0 * fine - coarse) / 3.0;
                        let rel = (fd - analytic).norm() / scale;
                        best.compared += 1;
                        if rel > best.max_relative || rel.is_nan() {
                            best.max_relative = rel;
                            best.worst_symbol = match sym {
                                Symbol::MStar { symbol } => symbol.id(),
                                Symbol::M { symbol } => symbol.id(),
                                _ => "",
                            };
                            best.at = Location { s, y, lambda_modulus: r, lambda_angle: a };
                        }
                    }
                }
            }
            best
        })
        .collect();
    per_lambda.into_iter().fold(
        DerivativeAgreement { max_relative: 0.0, worst_symbol: "", at: Location { s: 0.0, y: 0.0, lambda_modulus: 0.0, lambda_angle: 0.0 }, compared: 0 },
        |mut acc, d| {
            acc.compared += d.compared;
            if d.max_relative > acc.max_relative || d.max_relative.is_nan() {
                acc.max_relative = d.max_relative;
                acc.worst_symbol = d.worst_symbol;
                acc.at = d.at;
            }
            acc
        },
    )
}

/// Outcome of a pointwise inequality over a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub slack: f64,
    pub points: usize,
    pub violations: usize,
    /// Largest `lhs − rhs` relative to `rhs`, and where it occurred.
    pub worst_excess: f64,
    pub worst_at: Option<Location>,
}

impl InequalityReport {
    fn new(name: &str, slack: f64) -> Self {
        Self { name: name.into(), slack, points: 0, violations: 0, worst_excess: f64::NEG_INFINITY, worst_at: None }
    }

    /// Records `lhs ≤ rhs` up to `slack·max(|rhs|, 1)`.
    fn record(&mut self, lhs: f64, rhs: f64, at: Location) {
        self.points += 1;
        let excess = (lhs - rhs) / rhs.abs().max(1.0);
        if excess > self.slack || excess.is_nan() {
            self.violations += 1;
        }
        if excess > self.worst_excess || excess.is_nan() {
            self.worst_excess = excess;
            self.worst_at = Some(at);
        }
    }

    fn merge(&mut self, other: InequalityReport) {
        self.points += other.points;
        self.violations += other.violations;
        if other.worst_excess > self.worst_excess || other.worst_excess.is_nan() {
            self.worst_excess = other.worst_excess;
            self.worst_at = other.worst_at;
        }
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RealPartReport {
    /// `s ≤ Re q`
    pub re_q_dominates_s: InequalityReport,
    /// `√|λ| ≤ |q + s|`
    pub sqrt_lambda_bound: InequalityReport,
    /// `min Re q / (s + √ω)` over the grid
    pub empirical_c: f64,
    pub empirical_c_at: Location,
}

/// Checks the real-part bounds on every sector sample and radial grid point.
pub fn check_real_part(grids: &CertificationGrids) -> RealPartReport {
    let s_points = grids.s.points();
    let root_omega = grids.sector.sector.omega.sqrt();
    let parts: Vec<(InequalityReport, InequalityReport, f64, Location)> = grids
        .sector
        .samples()
        .par_iter()
        .map(|&(r, a)| {
            let params = grids.params(r, a);
            let mut re = InequalityReport::new("s <= Re q", 1e-12);
            let mut root = InequalityReport::new("sqrt|lambda| <= |q + s|", 1e-12);
            let (mut c, mut c_at) = (f64::INFINITY, Location { s: 0.0, y: 0.0, lambda_modulus: r, lambda_angle: a });
            for &s in &s_points {
                let q = RadialKernel::new(&params, s).q();
                let at = Location { s, y: 0.0, lambda_modulus: r, lambda_angle: a };
                re.record(s, q.re, at);
                root.record(r.sqrt(), (q + s).norm(), at);
                let ratio = q.re / (s + root_omega);
                if ratio < c {
                    c = ratio;
                    c_at = at;
                }
            }
            (re, root, c, c_at)
        })
        .collect();
    let mut out = RealPartReport {
        re_q_dominates_s: InequalityReport::new("s <= Re q", 1e-12),
        sqrt_lambda_bound: InequalityReport::new("sqrt|lambda| <= |q + s|", 1e-12),
        empirical_c: f64::INFINITY,
        empirical_c_at: Location { s: 0.0, y: 0.0, lambda_modulus: 0.0, lambda_angle: 0.0 },
    };
    for (re, root, c, at) in parts {
        out.re_q_dominates_s.merge(re);
        out.sqrt_lambda_bound.merge(root);
        if c < out.empirical_c {
            out.empirical_c = c;
            out.empirical_c_at = at;
        }
    }
    out
}

/// Empirical `c` for several sector openings, all other grid data fixed.
pub fn real_part_trend(grids: &CertificationGrids, epsilons: &[f64]) -> Result<Vec<(f64, f64)>> {
    epsilons
        .iter()
        .map(|&eps| {
            let sector = SectorSpec::new(eps, grids.sector.sector.omega)?;
            let sg = SectorSampleGrid::new(sector, grids.sector.moduli, grids.sector.angle_count, grids.sector.margin)?;
            let g = CertificationGrids { sector: sg, ..*grids };
            Ok((eps, check_real_part(&g).empirical_c))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EBoundsReport {
    /// `|E| ≤ √|λ| y e^{−sy}`
    pub linear_bound: InequalityReport,
    /// Largest `c̃` with `|E| ≤ 2 e^{−c̃ s y}` on the grid.
    pub empirical_c_tilde: f64,
    pub c_tilde_at: Location,
}

/// Checks both magnitude bounds on `E = e^{−yq} − e^{−ys}` over the full grid.
pub fn check_e_bounds(grids: &CertificationGrids) -> EBoundsReport {
    let s_points = grids.s.points();
    let y_points = grids.y.points();
    let parts: Vec<(InequalityReport, f64, Location)> = grids
        .sector
        .samples()
        .par_iter()
        .map(|&(r, a)| {
            let params = grids.params(r, a);
            let root = r.sqrt();
            let mut lin = InequalityReport::new("|E| <= sqrt|lambda| y exp(-sy)", 1e-9);
            let (mut c, mut c_at) = (f64::INFINITY, Location { s: 0.0, y: 0.0, lambda_modulus: r, lambda_angle: a });
            for &s in &s_points {
                let kernel = RadialKernel::new(&params, s);
                for &y in &y_points {
                    let e = kernel.big_e(y).norm();
                    let at = Location { s, y, lambda_modulus: r, lambda_angle: a };
                    lin.record(e, root * y * (-s * y).exp(), at);
                    if s * y > 0.0 && e > 0.0 {
                        let ct = (2.0 / e).ln() / (s * y);
                        if ct < c {
                            c = ct;
                            c_at = at;
                        }
                    }
                }
            }
            (lin, c, c_at)
        })
        .collect();
    let mut out = EBoundsReport {
        linear_bound: InequalityReport::new("|E| <= sqrt|lambda| y exp(-sy)", 1e-9),
        empirical_c_tilde: f64::INFINITY,
        c_tilde_at: Location { s: 0.0, y: 0.0, lambda_modulus: 0.0, lambda_angle: 0.0 },
    };
    for (lin, c, at) in parts {
        out.linear_bound.merge(lin);
        if c < out.empirical_c_tilde {
            out.empirical_c_tilde = c;
            out.c_tilde_at = at;
        }
    }
    out
}

/// Identity `m2 = −m1 − λ/(α + λ + s + q)·m3` and `m2 = λ ∂_y m0` against a
/// Richardson difference in `y`, at `count` deterministic sector samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct M2IdentityReport {
    pub points: usize,
    pub algebraic_max: f64,
    pub fd_max: f64,
}

pub fn check_m2_identity(sector: &SectorSpec, alpha: f64, count: usize, seed: u64) -> Result<M2IdentityReport> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let (mut alg, mut fd, mut points) = (0.0f64, 0.0f64, 0);
    let theta_max = sector.max_angle() - PI / 90.0;
    for _ in 0..count {
        let modulus = sector.omega * 10f64.powf(rng.gen_range(0.0..4.0));
        let angle = rng.gen_range(-theta_max..=theta_max);
        let s = 10f64.powf(rng.gen_range(-2.0..2.0));
        let y = 10f64.powf(rng.gen_range(-2.0..1.0)) / s.max(1.0);
        let params = ResolventParams::new(Complex64::from_polar(modulus, angle), alpha, 2)?;
        let k = RadialKernel::new(&params, s);
        let m2 = k.m2(y);
        let identity = -k.m1(y) - params.lambda * k.d_inv() * k.m3(y);
        let scale = m2.norm().max(k.m1(y).norm()).max((params.lambda * k.d_inv() * k.m3(y)).norm());
        if scale == 0.0 {
            continue;
        }
        alg = alg.max((m2 - identity).norm() / scale);
        let h = 1e-3 * y.min(1.0 / k.q().norm());
        let dy = richardson(|d| k.m0(y + d), h);
        fd = fd.max((m2 - params.lambda * dy).norm() / m2.norm().max((params.lambda * k.m0(y)).norm() / y));
        points += 1;
    }
    Ok(M2IdentityReport { points, algebraic_max: alg, fd_max: fd })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grids() -> CertificationGrids {
        let sector = SectorSpec::new(PI / 6.0, 1.0).unwrap();
        let sg = SectorSampleGrid::new(sector, LogAxis::new(1.0, 1e4, 5, false).unwrap(), 5, PI / 90.0).unwrap();
        CertificationGrids::new(
            sg,
            LogAxis::new(1e-3, 1e3, 25, true).unwrap(),
            LogAxis::new(1e-3, 1e2, 25, true).unwrap(),
            0.0,
            3,
            (1.0, 0.0),
        )
        .unwrap()
    }

    #[test]
    fn log_axis_refinement_nests() {
        let a = LogAxis::new(1e-3, 1e3, 7, true).unwrap();
        let p = a.points();
        let r = a.refined().points();
        assert_eq!(p.len(), 8);
        assert_eq!(r.len(), 14);
        for (j, v) in p.iter().enumerate().skip(1) {
            assert!((r[2 * j - 1] - v).abs() <= 1e-12 * v);
        }
        assert_eq!(*p.last().unwrap(), 1e3);
    }

    #[test]
    fn default_grids_have_five_million_points() {
        let g = CertificationGrids::default_for(SectorSpec::new(PI / 6.0, 1.0).unwrap(), 0.0, 3).unwrap();
        assert_eq!(g.point_count(), 125 * 201 * 201);
        let angles = g.sector.angles();
        assert!((angles[4] - (PI - PI / 6.0 - PI / 90.0)).abs() < 1e-15);
        assert_eq!(angles[2], 0.0);
    }

    #[test]
    fn m_symbol_at_origin() {
        let params = ResolventParams::new(ONE, 0.0, 2).unwrap();
        let k = RadialKernel::new(&params, 0.0);
        assert!((MSymbol::LambdaD.eval(&k).0 - 0.5).norm() < 1e-15);
    }

    #[test]
    fn m1_vanishes_at_zero_frequency() {
        let g = small_grids();
        let params = g.params(1.0, 0.3);
        let k = RadialKernel::new(&params, 0.0);
        assert_eq!(MStarSymbol::M1.eval(&k, 0.7).0, ZERO);
    }

    #[test]
    fn analytic_first_derivatives_match_differences() {
        let g = small_grids();
        let d = check_derivatives(&g, 2);
        assert!(d.max_relative < 1e-6, "{d:?}");
        assert!(d.compared > 1000);
    }

    #[test]
    fn identity_multiplier_product_reproduces_input() {
        let g = small_grids();
        let m = certify_m(MSymbol::One, 0, &g).unwrap();
        let ms = certify_mstar(MStarSymbol::M3, 1, 0.05, &g).unwrap();
        let (p, w) = check_product_lemma(&m, &ms, 0.025).unwrap();
        assert_eq!(p.empirical_sup, ms.empirical_sup);
        assert!(w.is_finite());
        assert!(check_product_lemma(&m, &ms, 0.05).is_err());
    }

    #[test]
    fn sqrt_bound_holds_and_real_part_constant_positive() {
        let g = small_grids();
        let r = check_real_part(&g);
        assert!(r.sqrt_lambda_bound.passed());
        assert!(r.empirical_c > 0.0);
    }

    #[test]
    fn m2_identity_small_sample() {
        let sector = SectorSpec::new(PI / 6.0, 1.0).unwrap();
        let r = check_m2_identity(&sector, 0.5, 200, 7).unwrap();
        assert!(r.algebraic_max < 1e-12, "{r:?}");
        assert!(r.fd_max < 1e-6, "{r:?}");
    }
}

//! Grids, field containers, tangential DFTs and `Lᵖ`/`W^{1,p}` quadrature.
//!
//! Values are stored point-major: index `(point · levels + level) · components + component`,
//! where `point` is the row-major tangential multi-index (axis 0 slowest).
//! Spectral fields use the same layout with modes in FFT order
//! `0, 1, …, n/2 − 1, −n/2, …, −1`; mode `k` has frequency `2πk/L`.
//!
//! The forward transform is the unnormalized sum `Σ_x u(x) e^{-iξ·x}` and the
//! inverse divides by `n^{tdim}`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::ops::{Deref, DerefMut};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Periodic grid on the tangential torus `[0, L)^{tdim}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TangentialGrid {
    pub tdim: usize,
    pub n: usize,
    pub box_length: f64,
}

impl TangentialGrid {
    pub fn new(tdim: usize, n: usize, box_length: f64) -> Result<Self> {
        if tdim != 1 && tdim != 2 {
            return Err(invalid(format!("tangential dimension must be 1 or 2, got {tdim}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(invalid(format!("points per axis must be a power of two ≥ 8, got {n}")));
        }
        if !(box_length > 0.0 && box_length.is_finite()) {
            return Err(invalid(format!("box length must be positive, got {box_length}")));
        }
        Ok(Self { tdim, n, box_length })
    }

    /// Total number of tangential points (or modes).
    pub fn points(&self) -> usize {
        self.n.pow(self.tdim as u32)
    }

    /// Signed mode number of FFT-ordered index `i`.
    pub fn mode_number(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Index of signed mode number `k` in FFT order.
    pub fn mode_index(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    fn axis_indices(&self, flat: usize) -> [usize; 2] {
        match self.tdim {
            1 => [flat, 0],
            _ => [flat / self.n, flat % self.n],
        }
    }

    /// Frequency vector of spectral point `flat`; only the first `tdim` entries are used.
    pub fn xi(&self, flat: usize) -> [f64; 2] {
        let idx = self.axis_indices(flat);
        let scale = 2.0 * PI / self.box_length;
        let mut out = [0.0; 2];
        for a in 0..self.tdim {
            out[a] = scale * self.mode_number(idx[a]) as f64;
        }
        out
    }

    /// Signed mode numbers of spectral point `flat`.
    pub fn modes(&self, flat: usize) -> [i64; 2] {
        let idx = self.axis_indices(flat);
        let mut out = [0; 2];
        for a in 0..self.tdim {
            out[a] = self.mode_number(idx[a]);
        }
        out
    }

    /// Whether any axis of spectral point `flat` sits at the Nyquist mode `−n/2`.
    pub fn is_nyquist(&self, flat: usize) -> bool {
        let idx = self.axis_indices(flat);
        idx[..self.tdim].iter().any(|&i| i == self.n / 2)
    }

    /// Physical coordinates of grid point `flat`.
    pub fn coordinate(&self, flat: usize) -> [f64; 2] {
        let idx = self.axis_indices(flat);
        let h = self.box_length / self.n as f64;
        let mut out = [0.0; 2];
        for a in 0..self.tdim {
            out[a] = h * idx[a] as f64;
        }
        out
    }

    /// Quadrature weight of one tangential cell, `(L/n)^{tdim}`.
    pub fn cell_weight(&self) -> f64 {
        (self.box_length / self.n as f64).powi(self.tdim as i32)
    }

    /// The same torus sampled with twice as many points per axis.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n, ..*self }
    }
}

/// Wall-normal sample levels `0 = y₀ < y₁ < … < y_M`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallGrid {
    levels: Vec<f64>,
    /// Stretching rate `β` when the grid is `y_j = Y(e^{βj/M} − 1)/(e^β − 1)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stretch: Option<f64>,
}

impl WallGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self> {
        if levels.first() != Some(&0.0) {
            return Err(invalid("wall grid must start at the trace level y = 0"));
        }
        if levels.iter().any(|y| !y.is_finite()) || levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("wall levels must be finite and strictly increasing"));
        }
        Ok(Self { levels, stretch: None })
    }

    /// The single trace level `y = 0`.
    pub fn trace() -> Self {
        Self { levels: vec![0.0], stretch: None }
    }

    /// `M` intervals on `[0, y_max]` with exponential stretching rate `β`
    /// (`β = 0` is uniform). Doubling `M` at fixed `β` nests the grids.
    pub fn stretched(y_max: f64, intervals: usize, stretch: f64) -> Result<Self> {
        if !(y_max > 0.0 && y_max.is_finite()) || intervals == 0 || !stretch.is_finite() || stretch < 0.0 {
            return Err(invalid("stretched wall grid needs y_max > 0, M ≥ 1 and β ≥ 0"));
        }
        let m = intervals as f64;
        let levels = (0..=intervals)
            .map(|j| {
                let t = j as f64 / m;
                if stretch < 1e-12 {
                    y_max * t
                } else {
                    y_max * (stretch * t).exp_m1() / stretch.exp_m1()
                }
            })
            .collect();
        let mut grid = Self::new(levels)?;
        grid.stretch = Some(stretch);
        Ok(grid)
    }

    /// Geometric grading `y_j = Y(r^j − 1)/(r^M − 1)` with `r` chosen so that
    /// `y₁ = first_fraction · Y`.
    pub fn geometric(y_max: f64, intervals: usize, first_fraction: f64) -> Result<Self> {
        if !(first_fraction > 0.0 && first_fraction <= 1.0) {
            return Err(invalid(format!("first_fraction must lie in (0, 1], got {first_fraction}")));
        }
        let m = intervals as f64;
        if intervals == 0 || first_fraction >= 1.0 / m {
            return Self::stretched(y_max, intervals.max(1), 0.0);
        }
        // y₁/Y = (e^{β/M} − 1)/(e^β − 1) decreases monotonically in β
        let ratio = |beta: f64| (beta / m).exp_m1() / beta.exp_m1();
        let (mut lo, mut hi) = (1e-9, 1.0);
        while ratio(hi) > first_fraction {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if ratio(mid) > first_fraction {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Self::stretched(y_max, intervals, 0.5 * (lo + hi))
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn y_max(&self) -> f64 {
        *self.levels.last().unwrap()
    }

    pub fn stretch(&self) -> Option<f64> {
        self.stretch
    }

    /// Composite trapezoid weights; a single level gets weight 0.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let n = self.levels.len();
        let mut w = vec![0.0; n];
        for j in 0..n.saturating_sub(1) {
            let h = self.levels[j + 1] - self.levels[j];
            w[j] += 0.5 * h;
            w[j + 1] += 0.5 * h;
        }
        w
    }

    /// Grid with every interval halved (nested).
    pub fn refined(&self) -> Self {
        if let Some(beta) = self.stretch {
            if let Ok(g) = Self::stretched(self.y_max(), 2 * (self.len() - 1), beta) {
                return g;
            }
        }
        let mut levels = Vec::with_capacity(2 * self.len());
        for w in self.levels.windows(2) {
            levels.push(w[0]);
            levels.push(0.5 * (w[0] + w[1]));
        }
        levels.push(self.y_max());
        Self { levels, stretch: None }
    }
}

/// Complex samples on a tangential grid × wall grid with `components` values per node.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldArray {
    tgrid: TangentialGrid,
    wgrid: WallGrid,
    components: usize,
    values: Vec<Complex64>,
}

impl FieldArray {
    pub fn zeros(tgrid: TangentialGrid, wgrid: WallGrid, components: usize) -> Self {
        let len = tgrid.points() * wgrid.len() * components;
        Self { tgrid, wgrid, components, values: vec![ZERO; len] }
    }

    pub fn from_values(
        tgrid: TangentialGrid,
        wgrid: WallGrid,
        components: usize,
        values: Vec<Complex64>,
    ) -> Result<Self> {
        let expected = tgrid.points() * wgrid.len() * components;
        if components == 0 || values.len() != expected {
            return Err(Error::ShapeMismatch(format!(
                "expected {expected} values for {} points × {} levels × {components} components, got {}",
                tgrid.points(),
                wgrid.len(),
                values.len()
            )));
        }
        Ok(Self { tgrid, wgrid, components, values })
    }

    pub fn tgrid(&self) -> &TangentialGrid {
        &self.tgrid
    }

    pub fn wgrid(&self) -> &WallGrid {
        &self.wgrid
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn levels(&self) -> usize {
        self.wgrid.len()
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    #[inline]
    pub fn index(&self, point: usize, level: usize, component: usize) -> usize {
        (point * self.wgrid.len() + level) * self.components + component
    }

    #[inline]
    pub fn get(&self, point: usize, level: usize, component: usize) -> Complex64 {
        self.values[self.index(point, level, component)]
    }

    #[inline]
    pub fn set(&mut self, point: usize, level: usize, component: usize, value: Complex64) {
        let i = self.index(point, level, component);
        self.values[i] = value;
    }

    /// Values of one tangential point, `levels × components`.
    pub fn point_slice(&self, point: usize) -> &[Complex64] {
        let stride = self.wgrid.len() * self.components;
        &self.values[point * stride..(point + 1) * stride]
    }

    fn same_shape(&self, other: &Self) -> bool {
        self.tgrid == other.tgrid && self.wgrid == other.wgrid && self.components == other.components
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.tgrid != other.tgrid || self.wgrid != other.wgrid {
            return Err(Error::ShapeMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    /// Component-wise concatenation of fields on the same grids.
    pub fn stack(parts: &[&FieldArray]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::ShapeMismatch("nothing to stack".into()))?;
        for p in parts {
            first.check_same_grid(p)?;
        }
        let components: usize = parts.iter().map(|p| p.components).sum();
        let nodes = first.tgrid.points() * first.wgrid.len();
        let mut values = Vec::with_capacity(nodes * components);
        for node in 0..nodes {
            for p in parts {
                values.extend_from_slice(&p.values[node * p.components..(node + 1) * p.components]);
            }
        }
        Ok(Self { tgrid: first.tgrid, wgrid: first.wgrid.clone(), components, values })
    }

    /// Restriction to one wall level.
    pub fn level(&self, level: usize) -> Result<Self> {
        if level >= self.levels() {
            return Err(Error::ShapeMismatch(format!("level {level} out of range")));
        }
        let wgrid = if level == 0 { WallGrid::trace() } else { WallGrid { levels: vec![self.wgrid.levels[level]], stretch: None } };
        let mut values = Vec::with_capacity(self.tgrid.points() * self.components);
        for point in 0..self.tgrid.points() {
            let start = self.index(point, level, 0);
            values.extend_from_slice(&self.values[start..start + self.components]);
        }
        Ok(Self { tgrid: self.tgrid, wgrid, components: self.components, values })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= factor);
        out
    }

    /// `a·self + b·other`.
    pub fn combine(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        if !self.same_shape(other) {
            return Err(Error::ShapeMismatch("cannot combine fields of different shapes".into()));
        }
        let mut out = self.clone();
        out.values.iter_mut().zip(&other.values).for_each(|(x, y)| *x = a * *x + b * *y);
        Ok(out)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn max_imag(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }
}

/// A field sampled in physical space.
#[derive(Debug, Clone, PartialEq)]
pub struct PhysicalField(pub FieldArray);

/// A field in tangential-Fourier space.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField(pub FieldArray);

macro_rules! deref_field {
    ($t:ty) => {
        impl Deref for $t {
            type Target = FieldArray;
            fn deref(&self) -> &FieldArray {
                &self.0
            }
        }
        impl DerefMut for $t {
            fn deref_mut(&mut self) -> &mut FieldArray {
                &mut self.0
            }
        }
    };
}
deref_field!(PhysicalField);
deref_field!(SpectralField);

impl PhysicalField {
    pub fn zeros(tgrid: TangentialGrid, wgrid: WallGrid, components: usize) -> Self {
        Self(FieldArray::zeros(tgrid, wgrid, components))
    }

    /// Samples `f(x, y, out)` at every node; `x` has `tdim` meaningful entries.
    pub fn from_fn(
        tgrid: TangentialGrid,
        wgrid: WallGrid,
        components: usize,
        mut f: impl FnMut([f64; 2], f64, &mut [Complex64]),
    ) -> Self {
        let mut field = FieldArray::zeros(tgrid, wgrid, components);
        let levels = field.wgrid.levels.clone();
        for point in 0..tgrid.points() {
            let x = tgrid.coordinate(point);
            for (l, &y) in levels.iter().enumerate() {
                let start = field.index(point, l, 0);
                f(x, y, &mut field.values[start..start + components]);
            }
        }
        Self(field)
    }
}

impl SpectralField {
    pub fn zeros(tgrid: TangentialGrid, wgrid: WallGrid, components: usize) -> Self {
        Self(FieldArray::zeros(tgrid, wgrid, components))
    }

    /// Multiplies by `iξ_axis`. The Nyquist mode is dropped because its
    /// derivative has no real-valued representative.
    pub fn tangential_derivative(&self, axis: usize) -> Result<Self> {
        let tg = *self.tgrid();
        if axis >= tg.tdim {
            return Err(invalid(format!("axis {axis} out of range for tdim {}", tg.tdim)));
        }
        let mut out = self.clone();
        let stride = self.levels() * self.components();
        for point in 0..tg.points() {
            let factor = if tg.is_nyquist(point) { ZERO } else { Complex64::new(0.0, tg.xi(point)[axis]) };
            out.values_mut()[point * stride..(point + 1) * stride].iter_mut().for_each(|v| *v *= factor);
        }
        Ok(out)
    }

    pub fn stack(parts: &[&SpectralField]) -> Result<Self> {
        let inner: Vec<&FieldArray> = parts.iter().map(|p| &p.0).collect();
        Ok(Self(FieldArray::stack(&inner)?))
    }
}

/// Tangential data on `Γ` (the trace level `y = 0`), `d − 1` components.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryField(PhysicalField);

impl BoundaryField {
    pub fn new(field: PhysicalField) -> Result<Self> {
        if field.wgrid().levels() != [0.0] {
            return Err(Error::ShapeMismatch("boundary field must have the single level y = 0".into()));
        }
        Ok(Self(field))
    }

    pub fn from_fn(tgrid: TangentialGrid, components: usize, mut f: impl FnMut([f64; 2], &mut [Complex64])) -> Self {
        Self(PhysicalField::from_fn(tgrid, WallGrid::trace(), components, |x, _, out| f(x, out)))
    }

    /// Trace of an interior field.
    pub fn trace_of(field: &PhysicalField) -> Result<Self> {
        Self::new(PhysicalField(field.level(0)?))
    }

    pub fn from_spectral(field: &SpectralField) -> Result<Self> {
        Self::new(inverse_dft(field)?)
    }

    pub fn field(&self) -> &PhysicalField {
        &self.0
    }

    pub fn spectral(&self) -> SpectralField {
        forward_dft(&self.0).expect("boundary field shape is valid by construction")
    }
}

impl Deref for BoundaryField {
    type Target = FieldArray;
    fn deref(&self) -> &FieldArray {
        &self.0 .0
    }
}

fn transform(field: &FieldArray, direction: FftDirection) -> Result<FieldArray> {
    let tg = field.tgrid;
    let n = tg.n;
    let npts = tg.points();
    let lanes = field.levels() * field.components;
    if field.values.len() != npts * lanes {
        return Err(Error::ShapeMismatch("field storage does not match its grids".into()));
    }
    let fft: Arc<dyn Fft<f64>> = FftPlanner::new().plan_fft(n, direction);

    // gather each (level, component) lane into a contiguous tangential block
    let mut blocks: Vec<Vec<Complex64>> =
        (0..lanes).map(|lane| (0..npts).map(|p| field.values[p * lanes + lane]).collect()).collect();
    blocks.par_iter_mut().for_each(|block| {
        let mut scratch = vec![ZERO; fft.get_inplace_scratch_len()];
        // axis tdim−1 is contiguous
        fft.process_with_scratch(block, &mut scratch);
        if tg.tdim == 2 {
            let mut column = vec![ZERO; n];
            for j in 0..n {
                for i in 0..n {
                    column[i] = block[i * n + j];
                }
                fft.process_with_scratch(&mut column, &mut scratch);
                for i in 0..n {
                    block[i * n + j] = column[i];
                }
            }
        }
    });

    let scale = match direction {
        FftDirection::Forward => 1.0,
        FftDirection::Inverse => 1.0 / npts as f64,
    };
    let mut values = vec![ZERO; field.values.len()];
    for (lane, block) in blocks.iter().enumerate() {
        for (p, v) in block.iter().enumerate() {
            values[p * lanes + lane] = *v * scale;
        }
    }
    Ok(FieldArray { tgrid: tg, wgrid: field.wgrid.clone(), components: field.components, values })
}

pub fn forward_dft(field: &PhysicalField) -> Result<SpectralField> {
    transform(field, FftDirection::Forward).map(SpectralField)
}

pub fn inverse_dft(field: &SpectralField) -> Result<PhysicalField> {
    transform(field, FftDirection::Inverse).map(PhysicalField)
}

fn check_p(p: f64) -> Result<()> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(invalid(format!("exponent p must lie in (1, ∞), got {p}")));
    }
    Ok(())
}

/// `(∫_Ω |F|^p)^{1/p}` where `|F|` is the Euclidean norm over all components of
/// all given fields at a node. Uniform tangential weights, trapezoid in `y`.
pub fn lp_norm_omega_stack(fields: &[&PhysicalField], p: f64) -> Result<f64> {
    check_p(p)?;
    let first = fields.first().ok_or_else(|| Error::ShapeMismatch("no fields given".into()))?;
    for f in fields {
        first.check_same_grid(f)?;
    }
    let weights = first.wgrid().trapezoid_weights();
    let levels = weights.len();
    let cell = first.tgrid().cell_weight();
    // the trapezoid needs at least two levels; a single level is a Γ integral
    let weights = if levels == 1 { vec![1.0] } else { weights };
    let per_point: Vec<f64> = (0..first.tgrid().points())
        .into_par_iter()
        .map(|point| {
            let mut acc = 0.0;
            for (l, w) in weights.iter().enumerate() {
                let mut sq = 0.0;
                for f in fields {
                    let start = f.index(point, l, 0);
                    sq += f.values()[start..start + f.components()].iter().map(|v| v.norm_sqr()).sum::<f64>();
                }
                acc += w * sq.powf(0.5 * p);
            }
            acc
        })
        .collect();
    // fixed summation order regardless of scheduling
    let total: f64 = per_point.iter().sum::<f64>() * cell;
    Ok(total.powf(1.0 / p))
}

pub fn lp_norm_omega(field: &PhysicalField, p: f64) -> Result<f64> {
    if field.levels() < 2 {
        return Err(Error::ShapeMismatch("Ω norms need at least two wall levels".into()));
    }
    lp_norm_omega_stack(&[field], p)
}

pub fn lp_norm_gamma(field: &BoundaryField, p: f64) -> Result<f64> {
    lp_norm_omega_stack(&[field.field()], p)
}

/// `Lᵖ(Γ)` norm of the `y = 0` trace of an interior field.
pub fn lp_norm_trace(field: &PhysicalField, p: f64) -> Result<f64> {
    lp_norm_gamma(&BoundaryField::trace_of(field)?, p)
}

/// `L²(Ω)` norm computed on the spectral side through Parseval.
pub fn spectral_l2_norm_omega(field: &SpectralField) -> f64 {
    let tg = field.tgrid();
    let weights = field.wgrid().trapezoid_weights();
    let mut total = 0.0;
    for point in 0..tg.points() {
        for (l, w) in weights.iter().enumerate() {
            let start = field.index(point, l, 0);
            total += w * field.values()[start..start + field.components()].iter().map(|v| v.norm_sqr()).sum::<f64>();
        }
    }
    (total * tg.cell_weight() / tg.points() as f64).sqrt()
}

/// `W^{1,p}(Ω)` norm `(‖u‖ₚᵖ + ‖∇u‖ₚᵖ)^{1/p}` with `|∇u|` the pointwise Frobenius norm.
///
/// Tangential derivatives are spectral; `dy` must hold the normal derivative
/// samples of the same field (typically analytic).
pub fn sobolev_w1p_norm(field: &SpectralField, dy: &SpectralField, p: f64) -> Result<f64> {
    check_p(p)?;
    if !field.same_shape(dy) {
        return Err(Error::ShapeMismatch("normal derivative must match the field's shape".into()));
    }
    let value = inverse_dft(field)?;
    let mut grads = vec![inverse_dft(dy)?];
    for axis in 0..field.tgrid().tdim {
        grads.push(inverse_dft(&field.tangential_derivative(axis)?)?);
    }
    let refs: Vec<&PhysicalField> = grads.iter().collect();
    let u = lp_norm_omega(&value, p)?;
    let g = lp_norm_omega_stack(&refs, p)?;
    Ok((u.powf(p) + g.powf(p)).powf(1.0 / p))
}

/// JSON header accompanying a raw field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DumpHeader {
    pub convention: String,
    pub domain: String,
    pub tdim: usize,
    pub n: usize,
    pub box_length: f64,
    pub levels: Vec<f64>,
    pub components: usize,
    pub index_order: Vec<String>,
    pub value_layout: String,
}

pub const DFT_CONVENTION: &str = "forward: sum_x u(x) exp(-i xi.x), unnormalized; inverse: 1/n^tdim";

/// Writes `<stem>.json` (header) and `<stem>.bin` (little-endian f64 pairs).
pub fn write_dump(stem: &Path, field: &FieldArray, domain: &str) -> Result<()> {
    let header = DumpHeader {
        convention: DFT_CONVENTION.into(),
        domain: domain.into(),
        tdim: field.tgrid.tdim,
        n: field.tgrid.n,
        box_length: field.tgrid.box_length,
        levels: field.wgrid.levels.clone(),
        components: field.components,
        index_order: vec!["point".into(), "level".into(), "component".into()],
        value_layout: "f64 little-endian, interleaved (re, im)".into(),
    };
    let json = crate::report::to_json_string(&header)?;
    std::fs::write(stem.with_extension("json"), json)?;
    let mut out = BufWriter::new(File::create(stem.with_extension("bin"))?);
    for v in &field.values {
        out.write_all(&v.re.to_le_bytes())?;
        out.write_all(&v.im.to_le_bytes())?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_dump(stem: &Path) -> Result<(DumpHeader, FieldArray)> {
    let header: DumpHeader = serde_json::from_str(&std::fs::read_to_string(stem.with_extension("json"))?)?;
    let tgrid = TangentialGrid::new(header.tdim, header.n, header.box_length)?;
    let wgrid = WallGrid::new(header.levels.clone())?;
    let mut bytes = Vec::new();
    BufReader::new(File::open(stem.with_extension("bin"))?).read_to_end(&mut bytes)?;
    if bytes.len() % 16 != 0 {
        return Err(Error::Format(format!("binary payload of {} bytes is not a whole number of complex values", bytes.len())));
    }
    let values = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().unwrap());
            let im = f64::from_le_bytes(c[8..].try_into().unwrap());
            Complex64::new(re, im)
        })
        .collect();
    let field = FieldArray::from_values(tgrid, wgrid, header.components, values)?;
    Ok((header, field))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid1(n: usize) -> TangentialGrid {
        TangentialGrid::new(1, n, 2.0 * PI).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(TangentialGrid::new(1, 6, 1.0).is_err());
        assert!(TangentialGrid::new(1, 4, 1.0).is_err());
        assert!(TangentialGrid::new(3, 8, 1.0).is_err());
        assert!(TangentialGrid::new(2, 8, -1.0).is_err());
        assert!(WallGrid::new(vec![0.1, 0.2]).is_err());
        assert!(WallGrid::new(vec![0.0, 0.2, 0.2]).is_err());
        let g = grid1(8);
        assert_eq!((0..8).map(|i| g.mode_number(i)).collect::<Vec<_>>(), vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert!(g.is_nyquist(4));
        assert_eq!(g.mode_index(-1), 7);
    }

    #[test]
    fn geometric_grid_first_step() {
        let g = WallGrid::geometric(10.0, 192, 0.001).unwrap();
        assert_eq!(g.len(), 193);
        assert!((g.levels()[1] - 0.01).abs() < 1e-9);
        assert!((g.y_max() - 10.0).abs() < 1e-12);
        let r = g.refined();
        assert_eq!(r.len(), 385);
        for (j, y) in g.levels().iter().enumerate() {
            assert!((r.levels()[2 * j] - y).abs() < 1e-12 * (1.0 + y));
        }
    }

    #[test]
    fn dft_of_constant_and_harmonic() {
        let tg = grid1(16);
        let ones = PhysicalField::from_fn(tg, WallGrid::trace(), 1, |_, _, out| out[0] = Complex64::new(1.0, 0.0));
        let spec = forward_dft(&ones).unwrap();
        assert!((spec.get(0, 0, 0) - 16.0).norm() < 1e-12);
        assert!((1..16).all(|k| spec.get(k, 0, 0).norm() < 1e-12));

        let wave = PhysicalField::from_fn(tg, WallGrid::trace(), 1, |x, _, out| {
            out[0] = Complex64::new(0.0, x[0]).exp();
        });
        let spec = forward_dft(&wave).unwrap();
        assert!((spec.get(1, 0, 0) - 16.0).norm() < 1e-12);
        assert!((0..16).filter(|&k| k != 1).all(|k| spec.get(k, 0, 0).norm() < 1e-12));

        let tg2 = TangentialGrid::new(2, 8, 2.0 * PI).unwrap();
        let wave = PhysicalField::from_fn(tg2, WallGrid::trace(), 1, |x, _, out| {
            out[0] = Complex64::new(0.0, x[0] - 2.0 * x[1]).exp();
        });
        let spec = forward_dft(&wave).unwrap();
        let idx = tg2.mode_index(1) * 8 + tg2.mode_index(-2);
        assert!((spec.get(idx, 0, 0) - 64.0).norm() < 1e-12);
        assert_eq!(tg2.modes(idx), [1, -2]);
    }

    #[test]
    fn norms_of_constants() {
        let tg = grid1(16);
        let one = BoundaryField::from_fn(tg, 1, |_, out| out[0] = Complex64::new(1.0, 0.0));
        assert!((lp_norm_gamma(&one, 2.0).unwrap() - (2.0 * PI).sqrt()).abs() < 1e-14);
        let zero = BoundaryField::from_fn(tg, 1, |_, _| {});
        assert_eq!(lp_norm_gamma(&zero, 3.0).unwrap(), 0.0);
        assert!(lp_norm_gamma(&one, 1.0).is_err());
    }

    #[test]
    fn dump_round_trip() {
        let tg = TangentialGrid::new(2, 8, 3.0).unwrap();
        let wg = WallGrid::geometric(2.0, 5, 0.05).unwrap();
        let f = PhysicalField::from_fn(tg, wg, 2, |x, y, out| {
            out[0] = Complex64::new(x[0] * y, -x[1]);
            out[1] = Complex64::new(1.0 / 3.0, y.sin());
        });
        let dir = std::env::temp_dir().join(format!("hs-dump-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let stem = dir.join("u");
        write_dump(&stem, &f, "physical").unwrap();
        let (header, back) = read_dump(&stem).unwrap();
        assert_eq!(header.domain, "physical");
        assert_eq!(back.values(), f.values());
        let bytes = std::fs::read(stem.with_extension("bin")).unwrap();
        assert_eq!(bytes.len(), f.values().len() * 16);
        assert_eq!(&bytes[16..24], &f.get(0, 0, 1).re.to_le_bytes());
        std::fs::remove_dir_all(&dir).ok();
    }
}

//! Closed-form radial symbols of the half-space solution.
//!
//! Everything here is a function of the radial frequency `s = |ξ|`, the wall
//! distance `y = x_d`, and the resolvent data `(λ, α)`. The two exponentials
//! `e^{-yq}` (with `q = √(λ + s²)`) and `e^{-ys}` nearly cancel whenever
//! `y·|q − s|` is small, so their difference is always formed as
//! `e^{-ys}·expm1(−yλ/(q + s))`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// `e^z − 1` without cancellation for small `|z|`.
pub fn expm1_c(z: Complex64) -> Complex64 {
    let (x, y) = (z.re, z.im);
    let half = (0.5 * y).sin();
    let re = x.exp_m1() * y.cos() - 2.0 * half * half;
    let im = x.exp() * y.sin();
    Complex64::new(re, im)
}

/// Sector `Σ_ε = {|arg λ| < π − ε}` together with the lower bound `ω` for `|λ|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub epsilon: f64,
    pub omega: f64,
}

impl SectorSpec {
    pub fn new(epsilon: f64, omega: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon < PI) {
            return Err(invalid(format!("sector epsilon must lie in (0, π), got {epsilon}")));
        }
        if !(omega > 0.0 && omega.is_finite()) {
            return Err(invalid(format!("sector omega must be positive, got {omega}")));
        }
        Ok(Self { epsilon, omega })
    }

    /// Largest admissible `|arg λ|`, exclusive.
    pub fn max_angle(&self) -> f64 {
        PI - self.epsilon
    }

    pub fn contains(&self, lambda: Complex64) -> bool {
        lambda.norm() > 0.0 && lambda.arg().abs() < self.max_angle()
    }
}

/// Resolvent point `λ`, boundary coefficient `α` and space dimension `d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResolventParams {
    pub lambda: Complex64,
    pub alpha: f64,
    pub dim: usize,
}

impl ResolventParams {
    /// Validates `α ≥ 0`, `d ∈ {2, 3}`, and that `λ` is nonzero and off the
    /// closed negative real axis.
    pub fn new(lambda: Complex64, alpha: f64, dim: usize) -> Result<Self> {
        if !(lambda.re.is_finite() && lambda.im.is_finite()) || lambda.norm() == 0.0 {
            return Err(invalid(format!("lambda must be finite and nonzero, got {lambda}")));
        }
        if lambda.im == 0.0 && lambda.re < 0.0 {
            return Err(invalid("lambda must not lie on the negative real axis"));
        }
        if !(alpha >= 0.0 && alpha.is_finite()) {
            return Err(invalid(format!("alpha must be a finite nonnegative number, got {alpha}")));
        }
        if dim != 2 && dim != 3 {
            return Err(invalid(format!("dimension must be 2 or 3, got {dim}")));
        }
        Ok(Self { lambda, alpha, dim })
    }

    pub fn from_polar(modulus: f64, angle: f64, alpha: f64, dim: usize) -> Result<Self> {
        if !(modulus > 0.0 && modulus.is_finite()) {
            return Err(invalid(format!("lambda modulus must be positive, got {modulus}")));
        }
        Self::new(Complex64::from_polar(modulus, angle), alpha, dim)
    }

    /// Like [`ResolventParams::new`] but additionally requires `λ ∈ Σ_ε`.
    pub fn in_sector(lambda: Complex64, alpha: f64, dim: usize, sector: &SectorSpec) -> Result<Self> {
        let params = Self::new(lambda, alpha, dim)?;
        if !sector.contains(lambda) {
            return Err(invalid(format!(
                "lambda = {lambda} lies outside the sector |arg λ| < π − {}",
                sector.epsilon
            )));
        }
        Ok(params)
    }

    /// Number of tangential directions, `d − 1`.
    pub fn tdim(&self) -> usize {
        self.dim - 1
    }
}

/// A radial frequency / wall distance pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub s: f64,
    pub y: f64,
}

impl KernelPoint {
    pub fn new(s: f64, y: f64) -> Result<Self> {
        if !(s >= 0.0 && y >= 0.0 && s.is_finite() && y.is_finite()) {
            return Err(invalid(format!("kernel point needs s, y ≥ 0, got s = {s}, y = {y}")));
        }
        Ok(Self { s, y })
    }
}

/// Principal square root of `λ + s²`.
pub fn sqrt_shifted(params: &ResolventParams, s: f64) -> Complex64 {
    (params.lambda + s * s).sqrt()
}

/// All `y`-independent factors of the symbols at one radial frequency.
///
/// Built once per tangential mode; the per-level methods are then a handful
/// of complex exponentials each.
#[derive(Debug, Clone, Copy)]
pub struct RadialKernel {
    lambda: Complex64,
    alpha: f64,
    s: f64,
    q: Complex64,
    q_plus_s: Complex64,
    /// `q − s = λ/(q + s)`
    q_minus_s: Complex64,
    /// `1/(α + λ + q + s)`
    d_inv: Complex64,
    /// `(q + s)/(α + λ + q + s)`
    p_factor: Complex64,
    /// `1/(λ + α + q)`
    robin_inv: Complex64,
}

impl RadialKernel {
    pub fn new(params: &ResolventParams, s: f64) -> Self {
        let lambda = params.lambda;
        let alpha = params.alpha;
        let q = sqrt_shifted(params, s);
        let q_plus_s = q + s;
        let d_inv = (lambda + alpha + q_plus_s).inv();
        Self {
            lambda,
            alpha,
            s,
            q,
            q_plus_s,
            q_minus_s: lambda / q_plus_s,
            d_inv,
            p_factor: q_plus_s * d_inv,
            robin_inv: (lambda + alpha + q).inv(),
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn q(&self) -> Complex64 {
        self.q
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `(q + s)/(α + λ + q + s)`, the pressure amplitude.
    pub fn p_factor(&self) -> Complex64 {
        self.p_factor
    }

    /// `1/(α + λ + s + q)`.
    pub fn d_inv(&self) -> Complex64 {
        self.d_inv
    }

    /// `1/(λ + α + q)`.
    pub fn robin_inv(&self) -> Complex64 {
        self.robin_inv
    }

    /// `e^{-yq} − e^{-ys}`.
    pub fn big_e(&self, y: f64) -> Complex64 {
        let z = -y * self.q_minus_s;
        if z.re <= 0.0 || z.norm() <= 1.0 {
            (-y * self.s).exp() * expm1_c(z)
        } else {
            // |e^z| > 1 here, so the direct difference has no cancellation and
            // the factored form could overflow times underflow.
            (-y * self.q).exp() - (-y * self.s).exp()
        }
    }

    pub fn m0(&self, y: f64) -> Complex64 {
        self.p_factor * self.big_e(y) / self.lambda
    }

    pub fn m1(&self, y: f64) -> Complex64 {
        self.lambda * self.s * self.m0(y)
    }

    pub fn m2(&self, y: f64) -> Complex64 {
        self.lambda * self.dy_m0(y)
    }

    pub fn m3(&self, y: f64) -> Complex64 {
        (-y * self.q).exp()
    }

    pub fn m4(&self, y: f64) -> Complex64 {
        self.m3(y) * self.robin_inv
    }

    pub fn dy_m0(&self, y: f64) -> Complex64 {
        -self.s * self.m0(y) - self.m3(y) * self.d_inv
    }

    /// `∂_y^k m0`, via `∂^{j+1} m0 = −s ∂^j m0 − (−q)^j m3/(α + λ + s + q)`.
    pub fn dy_m0_order(&self, k: usize, y: f64) -> Complex64 {
        let m3 = self.m3(y);
        let mut value = self.m0(y);
        let mut q_pow = Complex64::new(1.0, 0.0);
        for _ in 0..k {
            value = -self.s * value - q_pow * m3 * self.d_inv;
            q_pow *= -self.q;
        }
        value
    }

    /// Fills `out[k] = ∂_y^k m0` for `k < out.len()` and returns `m3(y)`.
    pub fn dy_m0_series(&self, y: f64, out: &mut [Complex64]) -> Complex64 {
        let m3 = self.m3(y);
        let mut value = self.m0(y);
        let mut q_pow = Complex64::new(1.0, 0.0);
        for slot in out.iter_mut() {
            *slot = value;
            value = -self.s * value - q_pow * m3 * self.d_inv;
            q_pow *= -self.q;
        }
        m3
    }

    /// `∂_s m0`.
    pub fn ds_m0(&self, y: f64) -> Complex64 {
        let e_over_lambda = self.big_e(y) / self.lambda;
        let dp = self.p_factor * (self.lambda + self.alpha) * self.d_inv / self.q;
        let de_over_lambda = -y * e_over_lambda + y * self.m3(y) / (self.q * self.q_plus_s);
        dp * e_over_lambda + self.p_factor * de_over_lambda
    }

    pub fn ds_m3(&self, y: f64) -> Complex64 {
        -(self.s * y / self.q) * self.m3(y)
    }

    /// `∂_s m4`.
    pub fn ds_m4(&self, y: f64) -> Complex64 {
        let dq = self.s / self.q;
        self.ds_m3(y) * self.robin_inv - self.m3(y) * dq * self.robin_inv * self.robin_inv
    }

    /// `∂_s (s·E)` with `E = e^{-yq} − e^{-ys}`.
    pub fn ds_s_big_e(&self, y: f64) -> Complex64 {
        let sy = self.s * y;
        (1.0 - sy) * self.big_e(y) + self.lambda * sy / (self.q_plus_s * self.q) * self.m3(y)
    }

    /// Radial pressure profile `P·e^{-ys}`.
    pub fn pressure_profile(&self, y: f64) -> Complex64 {
        self.p_factor * (-y * self.s).exp()
    }
}

pub fn big_e(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).big_e(point.y)
}

pub fn m0(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).m0(point.y)
}

pub fn m1(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).m1(point.y)
}

pub fn m3(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).m3(point.y)
}

pub fn m4(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).m4(point.y)
}

pub fn dy_m0(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).dy_m0(point.y)
}

pub fn ds_m3(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).ds_m3(point.y)
}

pub fn ds_s_big_e(params: &ResolventParams, point: KernelPoint) -> Complex64 {
    RadialKernel::new(params, point.s).ds_s_big_e(point.y)
}

fn check_xi(params: &ResolventParams, xi: &[f64], y: f64) -> Result<f64> {
    if xi.len() != params.tdim() {
        return Err(invalid(format!(
            "frequency vector has length {}, expected {}",
            xi.len(),
            params.tdim()
        )));
    }
    if !(y >= 0.0) || xi.iter().any(|v| !v.is_finite()) {
        return Err(invalid("frequency must be finite and y nonnegative"));
    }
    Ok(xi.iter().map(|v| v * v).sum::<f64>().sqrt())
}

/// Tangential velocity symbol, row-major `(d−1)×(d−1)`:
/// `−∂_y m0·ξξᵀ/|ξ|² + m4·(Id − ξξᵀ/|ξ|²)`, equal to `m4·Id` at `ξ = 0`.
pub fn u_prime_symbol(params: &ResolventParams, xi: &[f64], y: f64) -> Result<Vec<Complex64>> {
    let s = check_xi(params, xi, y)?;
    let n = params.tdim();
    let k = RadialKernel::new(params, s);
    let m4 = k.m4(y);
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    if s == 0.0 {
        for i in 0..n {
            out[i * n + i] = m4;
        }
        return Ok(out);
    }
    let normal = -k.dy_m0(y);
    for i in 0..n {
        for j in 0..n {
            let proj = xi[i] * xi[j] / (s * s);
            let id = if i == j { 1.0 } else { 0.0 };
            out[i * n + j] = normal * proj + m4 * (id - proj);
        }
    }
    Ok(out)
}

/// Normal velocity symbol `iξ·m0`, a row vector acting on `φ̂`.
pub fn u_d_symbol(params: &ResolventParams, xi: &[f64], y: f64) -> Result<Vec<Complex64>> {
    let s = check_xi(params, xi, y)?;
    if s == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); xi.len()]);
    }
    let m0 = m0(params, KernelPoint { s, y });
    Ok(xi.iter().map(|&x| I * x * m0).collect())
}

/// Pressure symbol in the reduced form `−i(ξ/|ξ|)·P·e^{-ys}`; zero at `ξ = 0`.
pub fn pressure_symbol(params: &ResolventParams, xi: &[f64], y: f64) -> Result<Vec<Complex64>> {
    let s = check_xi(params, xi, y)?;
    if s == 0.0 {
        return Ok(vec![Complex64::new(0.0, 0.0); xi.len()]);
    }
    let profile = RadialKernel::new(params, s).pressure_profile(y);
    Ok(xi.iter().map(|&x| -I * (x / s) * profile).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    fn params(lambda: Complex64, alpha: f64) -> ResolventParams {
        ResolventParams::new(lambda, alpha, 2).unwrap()
    }

    #[test]
    fn rejects_invalid_params() {
        assert!(ResolventParams::new(c(1.0, 0.0), -1.0, 2).is_err());
        assert!(ResolventParams::new(c(0.0, 0.0), 0.0, 2).is_err());
        assert!(ResolventParams::new(c(-1.0, 0.0), 0.0, 2).is_err());
        assert!(ResolventParams::new(c(1.0, 0.0), 0.0, 4).is_err());
        assert!(SectorSpec::new(0.0, 1.0).is_err());
        assert!(SectorSpec::new(0.5, 0.0).is_err());
        let sector = SectorSpec::new(PI / 6.0, 1.0).unwrap();
        assert!(ResolventParams::in_sector(Complex64::from_polar(2.0, 2.7), 0.0, 2, &sector).is_err());
        assert!(ResolventParams::in_sector(Complex64::from_polar(2.0, 2.6), 0.0, 2, &sector).is_ok());
    }

    #[test]
    fn expm1_small_and_large() {
        let z = c(1e-12, -3e-12);
        assert!(rel(expm1_c(z), z + z * z / 2.0) < 1e-15);
        let z = c(0.7, -2.1);
        assert!(rel(expm1_c(z), z.exp() - 1.0) < 1e-14);
    }

    #[test]
    fn sqrt_shifted_examples() {
        assert_eq!(sqrt_shifted(&params(c(1.0, 0.0), 0.0), 0.0), c(1.0, 0.0));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!(rel(sqrt_shifted(&params(c(0.0, 1.0), 0.0), 0.0), c(h, h)) < 1e-15);
        assert!(rel(sqrt_shifted(&params(c(3.0, 0.0), 0.0), 1.0), c(2.0, 0.0)) < 1e-15);
        // 60-digit reference; note Re q = 0.5 < s here
        assert!(rel(sqrt_shifted(&params(c(-1.0, 0.5), 0.0), 1.0), c(0.5, 0.5)) < 1e-15);
    }

    #[test]
    fn big_e_reference_values() {
        let p = params(c(1.0, 0.0), 0.0);
        assert_eq!(big_e(&p, KernelPoint { s: 0.7, y: 0.0 }), c(0.0, 0.0));
        let v = big_e(&p, KernelPoint { s: 1.0, y: 1.0 });
        assert!(rel(v, c(-0.124_762_706_737_228_11, 0.0)) < 1e-14);

        let p = params(c(1e-6, 1e-6), 0.0);
        let v = big_e(&p, KernelPoint { s: 1.0, y: 1.0 });
        let reference = c(-1.839_397_205_856_138_5e-7, -1.839_395_366_461_078_6e-7);
        assert!(rel(v, reference) < 1e-12, "{v} vs {reference}");

        let p = params(Complex64::from_polar(1e-10, 2.0), 0.0);
        let v = big_e(&p, KernelPoint { s: 10.0, y: 0.5 });
        let reference = c(7.009_938_321_212_805_3e-15, -1.531_699_467_090_972e-14);
        assert!(rel(v, reference) < 1e-12, "{v} vs {reference}");
    }

    #[test]
    fn m_kernels_reference_values() {
        let p = params(c(1.0, 0.0), 0.0);
        let pt = KernelPoint { s: 1.0, y: 1.0 };
        assert!(rel(m0(&p, pt), c(-0.088_220_555_973_082_556, 0.0)) < 1e-14);
        assert!(rel(dy_m0(&p, pt), c(0.017_013_313_077_230_237, 0.0)) < 1e-13);

        let p = params(Complex64::from_polar(10.0, 3.0 * PI / 4.0), 1.0);
        let v = m0(&p, KernelPoint { s: 0.5, y: 2.0 });
        assert!(rel(v, c(0.008_721_499_300_483_200_2, -0.002_781_851_453_411_125_4)) < 1e-13);

        let p = params(c(1.0, 0.0), 0.5);
        let v = m4(&p, KernelPoint { s: 2.0, y: 0.3 });
        assert!(rel(v, c(0.136_852_153_321_883_86, 0.0)) < 1e-14);

        let p = params(Complex64::from_polar(3.0, 2.0), 2.0);
        let v = dy_m0(&p, KernelPoint { s: 0.7, y: 0.4 });
        assert!(rel(v, c(0.010_173_202_925_960_265, 0.100_228_283_047_630_9)) < 1e-13);

        let p = params(Complex64::from_polar(2.0, PI / 2.0), 0.0);
        let pt = KernelPoint { s: 1.0, y: 1.0 };
        assert!(rel(ds_m3(&p, pt), c(-0.042_923_921_997_846_263, 0.182_443_097_687_628_6)) < 1e-13);
        assert!(rel(ds_s_big_e(&p, pt), c(0.155_104_042_827_084_78, -0.015_883_407_071_890_773)) < 1e-13);
    }

    #[test]
    fn trivial_boundary_values() {
        let p = params(Complex64::from_polar(4.0, 1.1), 0.3);
        for s in [0.0, 0.5, 3.0] {
            let k = RadialKernel::new(&p, s);
            assert_eq!(k.m0(0.0), c(0.0, 0.0));
            assert_eq!(k.m3(0.0), c(1.0, 0.0));
            assert_eq!(k.ds_s_big_e(0.0), c(0.0, 0.0));
        }
        let k = RadialKernel::new(&p, 0.0);
        assert_eq!(k.m1(1.3), c(0.0, 0.0));
        assert_eq!(k.ds_m3(1.3), c(0.0, 0.0));

        let p = params(c(1.0, 0.0), 0.0);
        assert!(rel(m4(&p, KernelPoint { s: 0.0, y: 0.0 }), c(0.5, 0.0)) < 1e-15);
        assert!(rel(dy_m0(&p, KernelPoint { s: 0.0, y: 0.0 }), c(-0.5, 0.0)) < 1e-15);
    }

    #[test]
    fn boundary_ode_of_m0() {
        // (λ + α − ∂_y)∂_y m0 = −1 at y = 0, second derivative by central FD of dy_m0
        for (lam, alpha, s) in [
            (Complex64::from_polar(10.0, 3.0 * PI / 4.0), 1.0, 0.5),
            (c(1.0, 0.0), 0.0, 1.0),
            (Complex64::from_polar(300.0, -2.0), 5.0, 7.0),
        ] {
            let k = RadialKernel::new(&params(lam, alpha), s);
            let h = 1e-4 / (k.q().norm() + s).max(1.0);
            // one-sided second-order FD because m0 lives on y ≥ 0
            let d2_fd = (-3.0 * k.dy_m0(0.0) + 4.0 * k.dy_m0(h) - k.dy_m0(2.0 * h)) / (2.0 * h);
            let lhs = (lam + alpha) * k.dy_m0(0.0) - d2_fd;
            assert!((lhs + 1.0).norm() < 1e-6, "{lhs}");
            let lhs_exact = (lam + alpha) * k.dy_m0(0.0) - k.dy_m0_order(2, 0.0);
            assert!((lhs_exact + 1.0).norm() < 1e-12, "{lhs_exact}");
        }
    }

    #[test]
    fn pressure_reference_and_reduction() {
        let p = params(c(1.0, 0.0), 0.0);
        let v = pressure_symbol(&p, &[1.0], 0.0).unwrap()[0];
        let expected = -I * (2f64.sqrt() + 1.0) / (2.0 + 2f64.sqrt());
        assert!(rel(v, expected) < 1e-15);
        assert!(rel(v, c(0.0, -0.707_106_781_186_547_52)) < 1e-15);

        // direct application of (λ + s² − ∂_y²)∂_y to m0, 60-digit reference
        let p = params(Complex64::from_polar(5.0, 2.2), 0.5);
        let v = pressure_symbol(&p, &[1.5], 0.8).unwrap()[0];
        assert!(rel(v, c(-0.145_118_323_297_546_26, -0.092_831_711_987_835_266)) < 1e-13);

        let far = pressure_symbol(&params(c(1.0, 0.0), 0.0), &[1.0], 10.0).unwrap()[0];
        assert!(rel(far, v_at(0.0) * (-10f64).exp()) < 1e-14);
        fn v_at(y: f64) -> Complex64 {
            pressure_symbol(&params(c(1.0, 0.0), 0.0), &[1.0], y).unwrap()[0]
        }
        assert_eq!(pressure_symbol(&p, &[0.0], 0.3).unwrap()[0], c(0.0, 0.0));
    }

    #[test]
    fn pressure_reduction_matches_fd_operator() {
        // (λ + s² − ∂²)∂ m0 by central differences of the analytic ∂_y m0
        let p = params(Complex64::from_polar(7.0, -1.9), 2.0);
        let s = 1.3;
        let k = RadialKernel::new(&p, s);
        let h = 1e-3;
        for y in [0.2, 0.9, 2.5] {
            let d = |t: f64| k.dy_m0(t);
            let d3 = (d(y + h) - 2.0 * d(y) + d(y - h)) / (h * h);
            let d3_fine = (d(y + h / 2.0) - 2.0 * d(y) + d(y - h / 2.0)) / (h * h / 4.0);
            let d3 = (4.0 * d3_fine - d3) / 3.0;
            let op = (p.lambda + s * s) * d(y) - d3;
            let direct = -op * I / s;
            let reduced = pressure_symbol(&p, &[s], y).unwrap()[0];
            assert!(rel(reduced, direct) < 1e-7, "y = {y}: {reduced} vs {direct}");
        }
    }

    #[test]
    fn analytic_derivatives_match_richardson() {
        let richardson = |f: &dyn Fn(f64) -> Complex64, x: f64, h: f64| {
            let d1 = (f(x + h) - f(x - h)) / (2.0 * h);
            let d2 = (f(x + h / 2.0) - f(x - h / 2.0)) / h;
            (4.0 * d2 - d1) / 3.0
        };
        for (lam, alpha) in [(c(1.0, 0.0), 0.0), (Complex64::from_polar(2.0, PI / 2.0), 0.5), (Complex64::from_polar(50.0, -2.5), 3.0)] {
            let p = params(lam, alpha);
            for (s, y) in [(1.0, 1.0), (0.3, 2.0), (4.0, 0.2)] {
                let h = 1e-5;
                let k = RadialKernel::new(&p, s);
                let fd = richardson(&|t| k.m0(t), y, h);
                assert!(rel(k.dy_m0(y), fd) < 1e-6);
                let hs = s.max(1.0) * 1e-4;
                let fd = richardson(&|t| RadialKernel::new(&p, t).m3(y), s, hs);
                assert!(rel(k.ds_m3(y), fd) < 1e-6);
                let fd = richardson(&|t| t * RadialKernel::new(&p, t).big_e(y), s, hs);
                assert!(rel(k.ds_s_big_e(y), fd) < 1e-6);
                let fd = richardson(&|t| RadialKernel::new(&p, t).m0(y), s, hs);
                assert!(rel(k.ds_m0(y), fd) < 1e-6);
                let fd = richardson(&|t| RadialKernel::new(&p, t).m4(y), s, hs);
                assert!(rel(k.ds_m4(y), fd) < 1e-6);
            }
        }
    }

    #[test]
    fn symbol_shapes_and_extensions() {
        let p2 = params(c(1.0, 0.0), 0.0);
        let at_zero = u_prime_symbol(&p2, &[0.0], 0.7).unwrap();
        assert_eq!(at_zero, vec![m4(&p2, KernelPoint { s: 0.0, y: 0.7 })]);
        // the two coefficient functions coincide at s = 0
        let k0 = RadialKernel::new(&p2, 0.0);
        assert!(rel(-k0.dy_m0(0.7), k0.m4(0.7)) < 1e-14);

        let p3 = ResolventParams::new(c(1.0, 0.0), 0.0, 3).unwrap();
        let u = u_prime_symbol(&p3, &[1.0, 0.0], 1.0).unwrap();
        let pt = KernelPoint { s: 1.0, y: 1.0 };
        assert!(rel(u[0], -dy_m0(&p3, pt)) < 1e-15);
        assert!(rel(u[3], m4(&p3, pt)) < 1e-15);
        assert_eq!(u[1], c(0.0, 0.0));
        let u = u_prime_symbol(&p3, &[0.3, -1.7], 0.4).unwrap();
        assert_eq!(u[1], u[2]);
        assert!(u_prime_symbol(&p3, &[1.0], 0.4).is_err());

        assert_eq!(u_d_symbol(&p2, &[0.0], 1.0).unwrap(), vec![c(0.0, 0.0)]);
        assert_eq!(u_d_symbol(&p2, &[2.0], 0.0).unwrap(), vec![c(0.0, 0.0)]);
        let ud = u_d_symbol(&p2, &[1.0], 1.0).unwrap()[0];
        assert!(rel(ud, I * m0(&p2, pt)) < 1e-15);
    }
}

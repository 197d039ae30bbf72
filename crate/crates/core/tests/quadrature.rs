use std::f64::consts::PI;

use halfspace_stokes::fields::{lp_norm_gamma, lp_norm_omega, BoundaryField, PhysicalField, TangentialGrid, WallGrid};
use halfspace_stokes::Complex64;

const SIGMA: f64 = 0.6;

fn bump(x: f64) -> f64 {
    (-(x - PI).powi(2) / (SIGMA * SIGMA)).exp()
}

/// `∫_R exp(-p (x-π)²/σ²) dx`.
fn bump_integral(p: f64) -> f64 {
    SIGMA * (PI / p).sqrt()
}

/// `∫_0^∞ exp(-p y²) dy`.
fn wall_integral(p: f64) -> f64 {
    0.5 * (PI / p).sqrt()
}

#[test]
fn omega_norm_of_gaussian_matches_closed_form() {
    for tdim in [1, 2] {
        let tg = TangentialGrid::new(tdim, 64, 2.0 * PI).unwrap();
        let wg = WallGrid::stretched(8.0, 400, 0.0).unwrap();
        let field = PhysicalField::from_fn(tg, wg, 1, |x, y, out| {
            let across = if tdim == 2 { bump(x[1]) } else { 1.0 };
            out[0] = Complex64::new(bump(x[0]) * across * (-y * y).exp(), 0.0);
        });
        for p in [2.0, 3.0, 4.0] {
            let exact = (bump_integral(p).powi(tdim as i32) * wall_integral(p)).powf(1.0 / p);
            let computed = lp_norm_omega(&field, p).unwrap();
            assert!((computed - exact).abs() <= 1e-6 * exact, "tdim {tdim}, p {p}: {computed} vs {exact}");
        }
    }
}

#[test]
fn gamma_norm_of_gaussian_matches_closed_form() {
    for tdim in [1, 2] {
        let tg = TangentialGrid::new(tdim, 64, 2.0 * PI).unwrap();
        let field = BoundaryField::from_fn(tg, 2, |x, out| {
            let across = if tdim == 2 { bump(x[1]) } else { 1.0 };
            out[0] = Complex64::new(bump(x[0]) * across, 0.0);
            out[1] = Complex64::new(0.0, 0.0);
        });
        for p in [2.0, 4.0] {
            let exact = bump_integral(p).powi(tdim as i32).powf(1.0 / p);
            let computed = lp_norm_gamma(&field, p).unwrap();
            assert!((computed - exact).abs() <= 1e-6 * exact, "tdim {tdim}, p {p}: {computed} vs {exact}");
        }
    }
}

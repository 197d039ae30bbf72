use std::f64::consts::PI;

use halfspace_stokes::fields::{
    forward_dft, inverse_dft, lp_norm_gamma, lp_norm_omega, spectral_l2_norm_omega, BoundaryField, PhysicalField,
    TangentialGrid, WallGrid,
};
use halfspace_stokes::kernels::{RadialKernel, ResolventParams, SectorSpec};
use halfspace_stokes::solver::{residual_interior, solve_boundary_driven, solve_velocity, filtered_phi_hat};
use halfspace_stokes::sweep::{BandLimitedSampler, SweepGrids};
use halfspace_stokes::Complex64;
use proptest::prelude::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `λ` in `Σ_{π/6}` with `|λ| ∈ [10^-1, 10^4]`, two degrees away from the edge.
fn sector_lambda() -> impl Strategy<Value = Complex64> {
    let max = PI - PI / 6.0 - PI / 90.0;
    (-1.0f64..4.0, -max..max).prop_map(|(e, a)| Complex64::from_polar(10f64.powf(e), a))
}

fn field_values(len: usize) -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
}

fn relative_gap(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let den = a.iter().chain(b).map(|v| v.norm()).fold(0.0, f64::max);
    if den > 0.0 {
        num / den
    } else {
        num
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn dft_round_trip(values in field_values(8 * 8 * 3 * 2), two_d in any::<bool>()) {
        let (tdim, n) = if two_d { (2, 8) } else { (1, 64) };
        let tg = TangentialGrid::new(tdim, n, 3.0).unwrap();
        let wg = WallGrid::new(vec![0.0, 0.5, 1.5]).unwrap();
        let mut it = values.iter().cycle();
        let field = PhysicalField::from_fn(tg, wg, 2, |_, _, out| {
            for v in out.iter_mut() {
                let (re, im) = *it.next().unwrap();
                *v = c(re, im);
            }
        });
        let back = inverse_dft(&forward_dft(&field).unwrap()).unwrap();
        prop_assert!(relative_gap(field.values(), back.values()) < 1e-13);
    }

    #[test]
    fn parseval(values in field_values(16 * 16 * 2), p_levels in 2usize..5) {
        let tg = TangentialGrid::new(2, 16, 2.0 * PI).unwrap();
        let wg = WallGrid::stretched(2.0, p_levels, 0.0).unwrap();
        let mut it = values.iter().cycle();
        let field = PhysicalField::from_fn(tg, wg, 2, |_, _, out| {
            for v in out.iter_mut() {
                let (re, im) = *it.next().unwrap();
                *v = c(re, im);
            }
        });
        let physical = lp_norm_omega(&field, 2.0).unwrap();
        let spectral = spectral_l2_norm_omega(&forward_dft(&field).unwrap());
        prop_assert!((physical - spectral).abs() <= 1e-12 * physical);
    }

    #[test]
    fn sqrt_lambda_bounded_by_q_plus_s(lambda in sector_lambda(), log_s in -3.0f64..3.0) {
        let params = ResolventParams::new(lambda, 0.0, 2).unwrap();
        let k = RadialKernel::new(&params, 10f64.powf(log_s));
        prop_assert!(k.q().re > 0.0);
        prop_assert!(lambda.norm().sqrt() <= (k.q() + k.s()).norm() * (1.0 + 1e-12));
    }

    #[test]
    fn m2_algebraic_identity(lambda in sector_lambda(), alpha in 0.0f64..100.0, log_s in -2.0f64..2.0, log_y in -2.0f64..1.0) {
        let params = ResolventParams::new(lambda, alpha, 2).unwrap();
        let k = RadialKernel::new(&params, 10f64.powf(log_s));
        let y = 10f64.powf(log_y);
        let rhs = -k.m1(y) - lambda * k.d_inv() * k.m3(y);
        let lhs = k.m2(y);
        let scale = k.m1(y).norm() + (lambda * k.d_inv() * k.m3(y)).norm();
        prop_assert!((lhs - rhs).norm() <= 1e-12 * scale.max(f64::MIN_POSITIVE));
    }

    #[test]
    fn solve_is_linear(seed_a in 0u64..1000, seed_b in 0u64..1000, a in (-2.0f64..2.0, -2.0f64..2.0), b in (-2.0f64..2.0, -2.0f64..2.0), lambda in sector_lambda()) {
        let params = ResolventParams::new(lambda, 0.5, 2).unwrap();
        let tg = TangentialGrid::new(1, 16, 2.0 * PI).unwrap();
        let wg = WallGrid::geometric(6.0, 24, 0.01).unwrap();
        let phi1 = BandLimitedSampler::new(seed_a, 4).unwrap().sample(&tg, 1).unwrap();
        let phi2 = BandLimitedSampler::new(seed_b, 4).unwrap().sample(&tg, 1).unwrap();
        let (a, b) = (c(a.0, a.1), c(b.0, b.1));
        let combined = BoundaryField::new(PhysicalField(phi1.field().0.combine(a, &phi2.field().0, b).unwrap())).unwrap();
        let u1 = solve_boundary_driven(&params, &tg, &wg, &phi1).unwrap();
        let u2 = solve_boundary_driven(&params, &tg, &wg, &phi2).unwrap();
        let u = solve_boundary_driven(&params, &tg, &wg, &combined).unwrap();
        for (x, x1, x2) in [(&u.u_prime, &u1.u_prime, &u2.u_prime), (&u.u_d, &u1.u_d, &u2.u_d), (&u.pressure, &u1.pressure, &u2.pressure)] {
            let expected = x1.0.combine(a, &x2.0, b).unwrap();
            prop_assert!(relative_gap(x.values(), expected.values()) < 1e-12);
        }
    }

    #[test]
    fn norms_scale_with_data(seed in 0u64..1000, scale in (-3.0f64..3.0, -3.0f64..3.0), two_d in any::<bool>()) {
        let tdim = if two_d { 2 } else { 1 };
        let params = ResolventParams::from_polar(50.0, 1.0, 0.0, tdim + 1).unwrap();
        let grids = SweepGrids::new(16, 2.0 * PI, 24);
        let tg = grids.tangential(tdim).unwrap();
        let wg = grids.wall_for(params.lambda).unwrap();
        let phi = BandLimitedSampler::new(seed, 4).unwrap().sample(&tg, tdim).unwrap();
        let factor = c(scale.0, scale.1);
        let scaled = BoundaryField::new(PhysicalField(phi.field().0.scaled(factor))).unwrap();
        let u = solve_velocity(&params, &tg, &wg, &filtered_phi_hat(&phi)).unwrap();
        let v = solve_velocity(&params, &tg, &wg, &filtered_phi_hat(&scaled)).unwrap();
        for p in [2.0, 4.0] {
            let (nu, nv) = (lp_norm_omega(&u, p).unwrap(), lp_norm_omega(&v, p).unwrap());
            prop_assert!((nv - factor.norm() * nu).abs() <= 1e-12 * nv.max(1e-300));
            let (gu, gv) = (lp_norm_gamma(&phi, p).unwrap(), lp_norm_gamma(&scaled, p).unwrap());
            prop_assert!((gv - factor.norm() * gu).abs() <= 1e-12 * gv.max(1e-300));
        }
    }

    #[test]
    fn solutions_are_divergence_free(lambda in sector_lambda(), alpha in 0.0f64..10.0, seed in 0u64..1000) {
        let sector = SectorSpec::new(PI / 6.0, 0.1).unwrap();
        let params = ResolventParams::in_sector(lambda, alpha, 3, &sector).unwrap();
        let tg = TangentialGrid::new(2, 8, 2.0 * PI).unwrap();
        let wg = WallGrid::geometric(4.0, 12, 0.02).unwrap();
        let phi = BandLimitedSampler::new(seed, 2).unwrap().sample(&tg, 2).unwrap();
        let bundle = solve_boundary_driven(&params, &tg, &wg, &phi).unwrap();
        let r = residual_interior(&bundle);
        prop_assert!(r.divergence_max <= 1e-10);
        prop_assert!(r.momentum_max <= 1e-10);
    }
}

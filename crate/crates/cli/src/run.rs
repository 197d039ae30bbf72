//! The five subcommands. Each returns its results and the list of checks.

use std::fs;
use std::path::Path;

use halfspace_stokes::certify::{
    certify_orders, check_derivatives, check_e_bounds, check_m2_identity, check_product_lemma, check_real_part,
    real_part_trend, CertificationGrids, InequalityReport, Location, MSymbol, MStarSymbol, MultiplierCertificate,
    Symbol,
};
use halfspace_stokes::fields::{write_dump, BoundaryField};
use halfspace_stokes::oracle::{compare_mode, convergence, OdeOracleConfig};
use halfspace_stokes::report::fmt_f64;
use halfspace_stokes::solver::{
    biharmonic_check, normal_derivative_fd_deviation, residual_boundary, residual_interior, solve_boundary_driven,
    weak_form_check, SolenoidalTestField, SolutionBundle,
};
use halfspace_stokes::sweep::{
    alpha_uniformity, decay_csv, gradient_estimate, resolvent_decay, second_order_proxy, BandLimitedSampler,
    DecayConfig, PhiSource, RatioReport, SweepGrids,
};
use halfspace_stokes::Result;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;

/// One pass/fail comparison of a measured value against bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub lower: Option<f64>,
    pub upper: Option<f64>,
    pub passed: bool,
    pub location: Option<Value>,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, lower: Option<f64>, upper: Option<f64>) -> Self {
        let passed = value.is_finite() && lower.map_or(true, |l| value >= l) && upper.map_or(true, |u| value <= u);
        Self { name: name.into(), value, lower, upper, passed, location: None }
    }

    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Self::new(name, value, None, Some(limit))
    }

    pub fn at(mut self, location: impl Serialize) -> Self {
        self.location = serde_json::to_value(location).ok();
        self
    }
}

/// Results of a subcommand.
#[derive(Debug, Default)]
pub struct Outcome {
    pub results: serde_json::Map<String, Value>,
    pub checks: Vec<Check>,
}

impl Outcome {
    fn put(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.into(), serde_json::to_value(value).unwrap_or(Value::Null));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CertifyCheck {
    All,
    RealPart,
    EBounds,
    M2Identity,
    Mstar,
    M,
    Product,
    Derivatives,
}

fn sampler(cfg: &RunConfig, offset: u64) -> Result<BandLimitedSampler> {
    BandLimitedSampler::new(cfg.seed.wrapping_add(offset), cfg.max_mode)
}

fn solve_default(cfg: &RunConfig, grids: &SweepGrids) -> Result<(BoundaryField, SolutionBundle)> {
    let t = cfg.params.tdim();
    let tgrid = grids.tangential(t)?;
    let phi = sampler(cfg, 0)?.sample(&tgrid, t)?;
    let bundle = solve_boundary_driven(&cfg.params, &tgrid, &grids.wall_for(cfg.params.lambda)?, &phi)?;
    Ok((phi, bundle))
}

fn identity_checks(cfg: &RunConfig, bundle: &SolutionBundle, phi: &BoundaryField, out: &mut Outcome) -> Result<()> {
    let tol = &cfg.tol;
    let interior = residual_interior(bundle);
    let boundary = residual_boundary(bundle, phi)?;
    let biharmonic = biharmonic_check(bundle);
    out.checks.push(Check::at_most("interior.momentum_max", interior.momentum_max, tol.interior));
    out.checks.push(Check::at_most("interior.divergence_max", interior.divergence_max, tol.interior));
    out.checks.push(Check::at_most("boundary.dynamic_max", boundary.dynamic_max, tol.boundary));
    out.checks.push(Check::at_most("boundary.trace_u_d_max", boundary.trace_u_d_max, tol.boundary));
    out.checks.push(Check::at_most("biharmonic.interior_max", biharmonic.interior_max, tol.biharmonic));
    out.checks.push(Check::at_most("biharmonic.boundary_max", biharmonic.boundary_max, tol.biharmonic_boundary));
    out.put("interior_residual", interior);
    out.put("boundary_residual", boundary);
    out.put("biharmonic_residual", biharmonic);
    if cfg.params.lambda.im == 0.0 {
        let fields = [&bundle.u_prime, &bundle.u_d, &bundle.pressure];
        let scale = fields.iter().map(|f| f.max_abs()).fold(0.0, f64::max);
        let imag = fields.iter().map(|f| f.max_imag()).fold(0.0, f64::max);
        let rel = if scale > 0.0 { imag / scale } else { imag };
        out.checks.push(Check::at_most("reality.max_imag", rel, tol.reality));
        out.put("max_imag_relative", rel);
    }
    out.put("wall_levels", bundle.wgrid().levels().len());
    out.put("wall_y_max", bundle.wgrid().y_max());
    Ok(())
}

pub fn solve(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (phi, bundle) = solve_default(cfg, &cfg.grids)?;
    let fields = dir.join("fields");
    fs::create_dir_all(&fields)?;
    write_dump(&fields.join("phi"), &phi, "physical boundary")?;
    write_dump(&fields.join("u_prime"), &bundle.u_prime, "physical")?;
    write_dump(&fields.join("u_d"), &bundle.u_d, "physical")?;
    write_dump(&fields.join("pressure"), &bundle.pressure, "physical")?;
    write_dump(&fields.join("phi_hat"), &bundle.phi_hat, "spectral boundary")?;
    out.put("fields", ["phi", "u_prime", "u_d", "pressure", "phi_hat"]);
    identity_checks(cfg, &bundle, &phi, &mut out)?;
    Ok(out)
}

pub fn verify(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let (phi, bundle) = solve_default(cfg, &cfg.grids)?;
    identity_checks(cfg, &bundle, &phi, &mut out)?;
    let fd = normal_derivative_fd_deviation(&bundle, cfg.verify.fd_step);
    out.checks.push(Check::at_most("normal_derivative.fd_deviation", fd, cfg.tol.normal_derivative));
    out.put("normal_derivative_fd_deviation", fd);

    let t = cfg.params.tdim();
    let test = SolenoidalTestField::new(sampler(cfg, 1)?.spectral(bundle.tgrid(), t)?, cfg.verify.test_decay)?;
    let mut wgrid = bundle.wgrid().clone();
    let mut levels = vec![weak_form_check(&bundle, &test)?];
    for _ in 0..cfg.verify.weak_form_refinements {
        wgrid = wgrid.refined();
        let fine = solve_boundary_driven(&cfg.params, bundle.tgrid(), &wgrid, &phi)?;
        levels.push(weak_form_check(&fine, &test)?);
    }
    let last = levels[levels.len() - 1];
    let ratios: Vec<f64> = levels.windows(2).map(|w| w[0].defect.norm() / w[1].defect.norm()).collect();
    out.checks.push(Check::at_most("weak_form.relative_defect", last.relative, cfg.tol.weak_form));
    out.put(
        "weak_form",
        json!({
            "wall_intervals": wgrid.len() - 1,
            "report": last,
            "refinement_levels": levels,
            "defect_ratios": ratios,
        }),
    );
    Ok(out)
}

pub fn oracle(cfg: &RunConfig) -> Result<Outcome> {
    let mut out = Outcome::default();
    let o = &cfg.oracle;
    let mut modes = Vec::new();
    for &s in &o.s {
        let mut xi = vec![0.0; cfg.params.tdim()];
        xi[0] = s;
        let y = match o.truncation {
            Some(y) => y,
            None => OdeOracleConfig::adequate(&cfg.params, s, o.steps)?.truncation_length,
        };
        let ode = OdeOracleConfig::new(y, o.steps, o.bc)?;
        let at = json!({ "s": s });
        if o.convergence {
            let rec = convergence(&cfg.params, &xi, &ode)?;
            out.checks.push(Check::at_most(format!("oracle.deviation s={s}"), rec.coarse.deviation(), cfg.tol.oracle).at(&at));
            out.checks.push(
                Check::new(format!("oracle.order_ratio s={s}"), rec.ratio, Some(4.0 * (1.0 - cfg.tol.order)), Some(4.0 * (1.0 + cfg.tol.order)))
                    .at(&at),
            );
            modes.push(json!({ "s": s, "comparison": rec.coarse, "convergence": rec }));
        } else {
            let cmp = compare_mode(&cfg.params, &xi, &ode)?;
            out.checks.push(Check::at_most(format!("oracle.deviation s={s}"), cmp.deviation(), cfg.tol.oracle).at(&at));
            modes.push(json!({ "s": s, "comparison": cmp }));
        }
    }
    out.put("modes", modes);
    Ok(out)
}

fn location_json(at: &Location) -> Value {
    serde_json::to_value(at).unwrap_or(Value::Null)
}

fn inequality_check(report: &InequalityReport) -> Check {
    let mut c = Check::at_most(format!("violations: {}", report.name), report.violations as f64, 0.0);
    if !report.passed() {
        c.location = report.worst_at.as_ref().map(location_json);
    }
    c
}

fn certificate_checks(cert: &MultiplierCertificate, drift: f64, out: &mut Outcome) {
    let name = format!("{} {} k={}", cert.condition, cert.symbol_id, cert.k);
    let mut finite = Check::new(format!("finite sup: {name}"), cert.empirical_sup, Some(0.0), None);
    finite.passed = cert.is_finite();
    out.checks.push(finite.at(cert.argmax));
    out.checks.push(Check::at_most(format!("refinement drift: {name}"), cert.refinement_drift, drift).at(cert.argmax));
}

fn certificate_row(c: &MultiplierCertificate) -> String {
    let cells = [
        c.symbol_id.clone(),
        c.condition.clone(),
        c.k.to_string(),
        fmt_f64(c.delta),
        c.uniform_in_lambda.to_string(),
        c.points.to_string(),
        fmt_f64(c.empirical_sup),
        fmt_f64(c.refined_sup),
        fmt_f64(c.refinement_drift),
        fmt_f64(c.argmax.s),
        fmt_f64(c.argmax.y),
        fmt_f64(c.argmax.lambda_modulus),
        fmt_f64(c.argmax.lambda_angle),
    ];
    cells.join(",")
}

fn inequality_row(r: &InequalityReport) -> String {
    let at = r.worst_at.unwrap_or(Location { s: f64::NAN, y: f64::NAN, lambda_modulus: f64::NAN, lambda_angle: f64::NAN });
    let cells = [
        format!("\"{}\"", r.name),
        fmt_f64(r.slack),
        r.points.to_string(),
        r.violations.to_string(),
        fmt_f64(r.worst_excess),
        fmt_f64(at.s),
        fmt_f64(at.y),
        fmt_f64(at.lambda_modulus),
        fmt_f64(at.lambda_angle),
    ];
    cells.join(",")
}

pub fn certify(cfg: &RunConfig, dir: &Path, which: CertifyCheck) -> Result<Outcome> {
    let mut out = Outcome::default();
    let c = &cfg.certify;
    let base = CertificationGrids::default_for(cfg.sector, cfg.params.alpha, cfg.params.dim)?;
    let grids = CertificationGrids::new(base.sector, base.s, base.y, base.alpha, base.dim, c.fixed_lambda)?;
    out.put("grids", json!({ "grids": grids, "points": grids.point_count() }));
    let wants = |k: CertifyCheck| which == CertifyCheck::All || which == k;
    let mut inequalities: Vec<InequalityReport> = Vec::new();
    let mut certificates: Vec<MultiplierCertificate> = Vec::new();

    if wants(CertifyCheck::RealPart) {
        let report = check_real_part(&grids);
        out.checks.push(inequality_check(&report.re_q_dominates_s));
        out.checks.push(inequality_check(&report.sqrt_lambda_bound));
        let trend = real_part_trend(&grids, &c.trend_epsilons)?;
        out.put("real_part", &report);
        out.put("real_part_trend", trend.iter().map(|(e, c)| json!({ "epsilon": e, "empirical_c": c })).collect::<Vec<_>>());
        inequalities.push(report.re_q_dominates_s);
        inequalities.push(report.sqrt_lambda_bound);
    }
    if wants(CertifyCheck::EBounds) {
        let report = check_e_bounds(&grids);
        out.checks.push(inequality_check(&report.linear_bound));
        out.put("e_bounds", &report);
        inequalities.push(report.linear_bound);
    }
    if wants(CertifyCheck::M2Identity) {
        let report = check_m2_identity(&cfg.sector, cfg.params.alpha, c.m2_points, cfg.seed)?;
        out.checks.push(Check::at_most("m2 identity: algebraic", report.algebraic_max, cfg.tol.m2_algebraic));
        out.checks.push(Check::at_most("m2 identity: difference quotient", report.fd_max, cfg.tol.m2_fd));
        out.put("m2_identity", report);
    }
    if wants(CertifyCheck::Derivatives) {
        let report = check_derivatives(&grids, c.derivative_stride);
        out.checks.push(Check::at_most("analytic d/ds agreement", report.max_relative, cfg.tol.derivative).at(report.at));
        out.put("derivative_agreement", report);
    }
    let mstar_needed = wants(CertifyCheck::Mstar) || wants(CertifyCheck::Product);
    let m_needed = wants(CertifyCheck::M) || wants(CertifyCheck::Product);
    let mut mstar_certs = Vec::new();
    if mstar_needed {
        for symbol in MStarSymbol::ALL {
            mstar_certs.extend(certify_orders(Symbol::MStar { symbol }, &c.orders, c.delta, &grids)?);
        }
    }
    let mut m_certs = Vec::new();
    if m_needed {
        for symbol in MSymbol::ALL {
            m_certs.extend(certify_orders(Symbol::M { symbol }, &c.orders, 0.0, &grids)?);
        }
    }
    if wants(CertifyCheck::Mstar) {
        for cert in &mstar_certs {
            certificate_checks(cert, cfg.tol.refinement_drift, &mut out);
        }
        certificates.extend(mstar_certs.iter().cloned());
    }
    if wants(CertifyCheck::M) {
        for cert in &m_certs {
            certificate_checks(cert, cfg.tol.refinement_drift, &mut out);
        }
        certificates.extend(m_certs.iter().cloned());
    }
    if wants(CertifyCheck::Product) {
        let k = *c.orders.iter().max().unwrap_or(&0);
        let pick = |id: &str| certificates_for(&mstar_certs, id, k);
        for mstar in [pick("m3"), pick("s_m4")].into_iter().flatten() {
            for (i, m) in m_certs.iter().filter(|m| m.k == k).enumerate() {
                let (product, reweighted) = check_product_lemma(m, mstar, c.delta_tilde)?;
                certificate_checks(&product, cfg.tol.refinement_drift, &mut out);
                certificates.push(product);
                if i == 0 {
                    certificate_checks(&reweighted, cfg.tol.refinement_drift, &mut out);
                    certificates.push(reweighted);
                }
            }
        }
    }
    out.put("certificates", &certificates);
    out.put("inequalities", &inequalities);

    let tables = dir.join("tables");
    fs::create_dir_all(&tables)?;
    if !certificates.is_empty() {
        let mut csv = String::from("symbol,condition,k,delta,uniform_in_lambda,points,empirical_sup,refined_sup,refinement_drift,argmax_s,argmax_y,argmax_lambda_modulus,argmax_lambda_angle\n");
        for cert in &certificates {
            csv.push_str(&certificate_row(cert));
            csv.push('\n');
        }
        fs::write(tables.join("certificates.csv"), csv)?;
    }
    if !inequalities.is_empty() {
        let mut csv = String::from("inequality,slack,points,violations,worst_excess,worst_s,worst_y,worst_lambda_modulus,worst_lambda_angle\n");
        for r in &inequalities {
            csv.push_str(&inequality_row(r));
            csv.push('\n');
        }
        fs::write(tables.join("inequalities.csv"), csv)?;
    }
    Ok(out)
}

fn certificates_for<'a>(certs: &'a [MultiplierCertificate], id: &str, k: usize) -> Option<&'a MultiplierCertificate> {
    certs.iter().find(|c| c.symbol_id == id && c.k == k)
}

fn ratio_rows(report: &RatioReport, csv: &mut String) {
    for s in &report.samples {
        let opt = |v: Option<f64>| v.map_or_else(|| "nan".to_string(), fmt_f64);
        let cells = [
            format!("\"{}\"", report.name),
            fmt_f64(report.p),
            s.seed.to_string(),
            fmt_f64(s.numerator),
            fmt_f64(s.phi_norm),
            opt(s.ratio),
            opt(s.refined_ratio),
        ];
        csv.push_str(&cells.join(","));
        csv.push('\n');
    }
}

fn ratio_checks(report: &RatioReport, cfg: &RunConfig, out: &mut Outcome) {
    let name = format!("{} p={}", report.name.split(' ').next().unwrap_or(""), report.p);
    out.checks.push(Check::at_most(format!("ratio spread: {name}"), report.spread, cfg.tol.ratio_spread));
    if let Some(shift) = report.refinement_shift {
        out.checks.push(Check::at_most(format!("ratio refinement: {name}"), shift, cfg.tol.ratio_refinement));
    }
}

pub fn sweep(cfg: &RunConfig, dir: &Path) -> Result<Outcome> {
    let mut out = Outcome::default();
    let sw = &cfg.sweep;
    let t = cfg.params.tdim();
    let tables = dir.join("tables");
    fs::create_dir_all(&tables)?;
    out.put("phi_seed", cfg.seed);

    if sw.experiments.decay {
        let dc = DecayConfig {
            dim: cfg.params.dim,
            ps: sw.ps.clone(),
            moduli: sw.moduli,
            angles: sw.angles.clone(),
            alphas: sw.alphas.clone(),
            grids: cfg.grids,
            check_refinement: sw.refinement,
        };
        dc.validate(cfg.sector.omega)?;
        let phi = sampler(cfg, 0)?.sample(&cfg.grids.tangential(t)?, t)?;
        let reports = resolvent_decay(&dc, &phi)?;
        for r in &reports {
            let at = json!({ "p": r.p, "angle": r.angle, "alpha": r.alpha });
            out.checks.push(
                Check::new(format!("decay slope p={} angle={} alpha={}", r.p, r.angle, r.alpha), r.fitted_slope, Some(cfg.tol.slope_min), Some(cfg.tol.slope_max))
                    .at(&at),
            );
            if let Some(shift) = r.refinement_shift {
                out.checks.push(
                    Check::at_most(format!("wall resolution p={} angle={} alpha={}", r.p, r.angle, r.alpha), shift, cfg.tol.under_resolved)
                        .at(&at),
                );
            }
            if r.angle != 0.0 {
                if let Some(base) = reports.iter().find(|b| b.angle == 0.0 && b.p == r.p && b.alpha == r.alpha) {
                    let ratio = r.decay_constant / base.decay_constant;
                    let lim = cfg.tol.angle_constant;
                    out.checks.push(
                        Check::new(format!("angle constant ratio p={} angle={} alpha={}", r.p, r.angle, r.alpha), ratio, Some(1.0 / lim), Some(lim))
                            .at(&at),
                    );
                }
            }
        }
        let uniformity = alpha_uniformity(&reports);
        let mut csv = String::from("p,angle,alpha,decay_constant,fitted_slope\n");
        for u in &uniformity {
            out.checks.push(
                Check::at_most(format!("alpha spread p={} angle={}", u.p, u.angle), u.spread, cfg.tol.alpha_spread)
                    .at(json!({ "p": u.p, "angle": u.angle })),
            );
            for i in 0..u.alphas.len() {
                let cells = [u.p, u.angle, u.alphas[i], u.constants[i], u.slopes[i]];
                csv.push_str(&cells.iter().map(|v| fmt_f64(*v)).collect::<Vec<_>>().join(","));
                csv.push('\n');
            }
        }
        fs::write(tables.join("decay.csv"), decay_csv(&reports))?;
        fs::write(tables.join("alpha_uniformity.csv"), csv)?;
        out.put("decay", &reports);
        out.put("alpha_uniformity", &uniformity);
    }

    if sw.experiments.gradient || sw.experiments.proxy {
        let phis: Vec<PhiSource> =
            (0..sw.ratio_samples as u64).map(|i| sampler(cfg, i).map(PhiSource::Sampler)).collect::<Result<_>>()?;
        let grids = cfg.grids;
        let mut csv = String::from("experiment,p,seed,numerator,phi_norm,ratio,refined_ratio\n");
        let mut reports = Vec::new();
        for &p in &sw.ps {
            if sw.experiments.gradient {
                let r = gradient_estimate(&sw.ratio_params, p, &grids, &phis, true)?;
                ratio_checks(&r, cfg, &mut out);
                ratio_rows(&r, &mut csv);
                reports.push(r);
            }
            if sw.experiments.proxy {
                let r = second_order_proxy(&sw.ratio_params, p, &grids, &phis, true)?;
                ratio_checks(&r, cfg, &mut out);
                ratio_rows(&r, &mut csv);
                reports.push(r);
            }
        }
        fs::write(tables.join("ratios.csv"), csv)?;
        out.put("ratios", &reports);
    }
    Ok(out)
}

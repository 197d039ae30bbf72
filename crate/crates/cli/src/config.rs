//! Flat `key = value` configuration with dotted keys.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Lists are comma-separated. Every key has a default, and unknown keys are
//! rejected. `auto` values are resolved against the problem before the run.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use halfspace_stokes::certify::LogAxis;
use halfspace_stokes::kernels::{ResolventParams, SectorSpec};
use halfspace_stokes::oracle::DecayBc;
use halfspace_stokes::sweep::SweepGrids;
use num_complex::Complex64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<halfspace_stokes::Error> for ConfigError {
    fn from(e: halfspace_stokes::Error) -> Self {
        Self(e.to_string())
    }
}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

/// `(key, default, description)`
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem.lambda_modulus", "1", "|λ|"),
    ("problem.lambda_angle", "0", "arg λ in radians"),
    ("problem.alpha", "0", "boundary coefficient α ≥ 0"),
    ("problem.dim", "2", "space dimension d ∈ {2, 3}"),
    ("problem.epsilon", "0.5235987755982988", "sector half-opening defect ε"),
    ("problem.omega", "1", "lower bound ω for |λ| in sweeps and certification"),
    ("grid.n", "auto", "tangential points per direction; auto = 32 (128/64 for sweep with d = 2/3)"),
    ("grid.box_length", "6.283185307179586", "tangential period"),
    ("grid.wall_intervals", "192", "wall intervals M"),
    ("grid.decay_lengths", "10", "Y = decay_lengths / min(Re √λ, 1)"),
    ("grid.first_fraction", "0.01", "first wall spacing as a fraction of Y"),
    ("grid.layer_fraction", "0.02", "first wall spacing cap in units of 1/Re √λ"),
    ("phi.max_mode", "auto", "largest |k| of the band-limited data; auto = n/4"),
    ("seed", "2024", "seed of the band-limited data sampler"),
    ("workers", "auto", "worker threads; auto = available cores"),
    ("tol.interior", "1e-10", "momentum and divergence residuals"),
    ("tol.boundary", "1e-10", "dynamic boundary identity and u_d trace"),
    ("tol.biharmonic", "1e-9", "fourth-order identity for u_d"),
    ("tol.biharmonic_boundary", "1e-9", "boundary row of the fourth-order system"),
    ("tol.normal_derivative", "1e-6", "analytic ∂_y against Richardson differences"),
    ("tol.weak_form", "1e-4", "relative weak-form defect"),
    ("tol.reality", "1e-11", "imaginary part of physical fields for real λ"),
    ("tol.oracle", "1e-4", "kernel against finite-difference oracle"),
    ("tol.order", "0.3", "allowed relative distance of the N/2N deviation ratio from 4"),
    ("tol.refinement_drift", "0.05", "certificate drift under grid doubling"),
    ("tol.derivative", "1e-6", "analytic ∂_s against Richardson differences"),
    ("tol.m2_algebraic", "1e-12", "algebraic m2 identity"),
    ("tol.m2_fd", "1e-6", "m2 against λ times a difference quotient of m0"),
    ("tol.slope_min", "-1.05", "lower end of the decay slope band"),
    ("tol.slope_max", "-0.95", "upper end of the decay slope band"),
    ("tol.alpha_spread", "2", "max/min decay constant over α"),
    ("tol.angle_constant", "3", "decay constants at θ ≠ 0 relative to θ = 0"),
    ("tol.under_resolved", "0.01", "norm change under wall refinement"),
    ("tol.ratio_spread", "10", "max/min ratio over data samples"),
    ("tol.ratio_refinement", "0.01", "ratio change under refinement"),
    ("verify.weak_form_refinements", "3", "nested halvings of the wall grid for the weak-form quadrature"),
    ("verify.test_decay", "1", "decay rate κ of the test field y e^{-κy}"),
    ("verify.fd_step", "1e-3", "relative step of the ∂_y difference check"),
    ("oracle.steps", "4096", "finite-difference steps N"),
    ("oracle.s", "0.25,1,4", "radial frequencies |ξ| to compare"),
    ("oracle.bc", "asymptotic", "far-field condition: asymptotic or dirichlet_pair"),
    ("oracle.truncation", "auto", "truncation length Y; auto = adequate for each mode"),
    ("oracle.convergence", "true", "also solve with 2N steps and report the order"),
    ("certify.delta", "0.05", "wall weight rate δ"),
    ("certify.delta_tilde", "0.025", "reweighting rate δ̃ < δ of the product check"),
    ("certify.orders", "auto", "derivative orders k; auto = 0 up to ⌊(d − 1)/2⌋ + 1"),
    ("certify.fixed_lambda_modulus", "1", "|λ| for the fixed-λ certificates"),
    ("certify.fixed_lambda_angle", "0", "arg λ for the fixed-λ certificates"),
    ("certify.m2_points", "10000", "sector samples of the m2 identity"),
    ("certify.derivative_stride", "7", "grid stride of the ∂_s agreement check"),
    ("certify.trend_epsilons", "1.0471975511965976,0.5235987755982988,0.2617993877991494", "ε values of the Re q trend"),
    ("sweep.experiments", "decay,gradient,proxy", "subset of decay, gradient, proxy"),
    ("sweep.ps", "2,4", "exponents p"),
    ("sweep.moduli_min", "100", "smallest |λ|"),
    ("sweep.moduli_max", "1000000", "largest |λ|"),
    ("sweep.moduli_count", "13", "number of log-spaced moduli"),
    ("sweep.angles", "auto", "arg λ values; auto = 0 and ±(π − ε − π/90)"),
    ("sweep.alphas", "0,1,10,100", "α values of the uniformity check"),
    ("sweep.refinement", "true", "re-solve extreme moduli on a refined wall grid"),
    ("sweep.ratio_lambda_modulus", "4", "|λ| of the gradient and proxy ratios"),
    ("sweep.ratio_lambda_angle", "0", "arg λ of the gradient and proxy ratios"),
    ("sweep.ratio_samples", "8", "number of random data samples of the ratios"),
];

/// Key-value store holding a value for every known key.
#[derive(Debug, Clone, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl Default for RawConfig {
    fn default() -> Self {
        Self { values: KEYS.iter().map(|(k, v, _)| (k.to_string(), v.to_string())).collect() }
    }
}

impl RawConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.trim().to_string();
                Ok(())
            }
            None => err(format!("unknown configuration key `{key}`")),
        }
    }

    /// Applies every assignment of a configuration file.
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return err(format!("line {}: expected `key = value`, got `{line}`", i + 1));
            };
            self.set(key.trim(), value).map_err(|e| ConfigError(format!("line {}: {e}", i + 1)))?;
        }
        Ok(())
    }

    /// Applies a `KEY=VALUE` override.
    pub fn apply_override(&mut self, assignment: &str) -> Result<(), ConfigError> {
        match assignment.split_once('=') {
            Some((k, v)) => self.set(k.trim(), v),
            None => err(format!("override `{assignment}` is not of the form KEY=VALUE")),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).expect("known key")
    }

    pub fn values(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn is_auto(&self, key: &str) -> bool {
        self.get(key) == "auto"
    }

    fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let raw = self.get(key);
        match raw.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(v),
            _ => err(format!("`{key}` must be a finite number, got `{raw}`")),
        }
    }

    fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let raw = self.get(key);
        raw.parse().or_else(|_| err(format!("`{key}` must be a nonnegative integer, got `{raw}`")))
    }

    fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let raw = self.get(key);
        raw.parse().or_else(|_| err(format!("`{key}` must be a nonnegative integer, got `{raw}`")))
    }

    fn bool(&self, key: &str) -> Result<bool, ConfigError> {
        match self.get(key) {
            "true" | "yes" | "1" => Ok(true),
            "false" | "no" | "0" => Ok(false),
            raw => err(format!("`{key}` must be true or false, got `{raw}`")),
        }
    }

    fn f64_list(&self, key: &str) -> Result<Vec<f64>, ConfigError> {
        let raw = self.get(key);
        let list: Vec<f64> = raw
            .split(',')
            .map(|t| t.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<_>>()
            .ok_or_else(|| ConfigError(format!("`{key}` must be a comma-separated list of numbers, got `{raw}`")))?;
        Ok(list)
    }

    fn usize_list(&self, key: &str) -> Result<Vec<usize>, ConfigError> {
        let raw = self.get(key);
        raw.split(',')
            .map(|t| t.trim().parse::<usize>().ok())
            .collect::<Option<_>>()
            .ok_or_else(|| ConfigError(format!("`{key}` must be a comma-separated list of integers, got `{raw}`")))
    }

    fn str_list(&self, key: &str) -> Vec<String> {
        self.get(key).split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Oracle,
    Certify,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Solve => "solve",
            Self::Verify => "verify",
            Self::Oracle => "oracle",
            Self::Certify => "certify",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub interior: f64,
    pub boundary: f64,
    pub biharmonic: f64,
    pub biharmonic_boundary: f64,
    pub normal_derivative: f64,
    pub weak_form: f64,
    pub reality: f64,
    pub oracle: f64,
    pub order: f64,
    pub refinement_drift: f64,
    pub derivative: f64,
    pub m2_algebraic: f64,
    pub m2_fd: f64,
    pub slope_min: f64,
    pub slope_max: f64,
    pub alpha_spread: f64,
    pub angle_constant: f64,
    pub under_resolved: f64,
    pub ratio_spread: f64,
    pub ratio_refinement: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyOptions {
    pub weak_form_refinements: usize,
    pub test_decay: f64,
    pub fd_step: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleOptions {
    pub steps: usize,
    pub s: Vec<f64>,
    pub bc: DecayBc,
    pub truncation: Option<f64>,
    pub convergence: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub delta: f64,
    pub delta_tilde: f64,
    pub orders: Vec<usize>,
    pub fixed_lambda: (f64, f64),
    pub m2_points: usize,
    pub derivative_stride: usize,
    pub trend_epsilons: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Experiments {
    pub decay: bool,
    pub gradient: bool,
    pub proxy: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOptions {
    pub experiments: Experiments,
    pub ps: Vec<f64>,
    pub moduli: LogAxis,
    pub angles: Vec<f64>,
    pub alphas: Vec<f64>,
    pub refinement: bool,
    pub ratio_params: ResolventParams,
    pub ratio_samples: usize,
}

/// Fully validated run configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Every key with `auto` replaced by its resolved value.
    pub resolved: RawConfig,
    pub sector: SectorSpec,
    pub params: ResolventParams,
    pub grids: SweepGrids,
    pub max_mode: usize,
    pub seed: u64,
    pub workers: Option<usize>,
    pub tol: Tolerances,
    pub verify: VerifyOptions,
    pub oracle: OracleOptions,
    pub certify: CertifyOptions,
    pub sweep: SweepOptions,
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 {
        Ok(v)
    } else {
        err(format!("`{key}` must be positive, got {v}"))
    }
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| format!("{v:?}")).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Resolves `auto` values and checks every precondition the run relies on.
    pub fn resolve(command: Command, raw: &RawConfig) -> Result<Self, ConfigError> {
        let mut resolved = raw.clone();
        let sector = SectorSpec::new(raw.f64("problem.epsilon")?, raw.f64("problem.omega")?)?;
        let dim = raw.usize("problem.dim")?;
        let alpha = raw.f64("problem.alpha")?;
        if alpha < 0.0 {
            return err(format!("invariant α ≥ 0 violated: problem.alpha = {alpha}"));
        }
        let modulus = positive("problem.lambda_modulus", raw.f64("problem.lambda_modulus")?)?;
        let lambda = Complex64::from_polar(modulus, raw.f64("problem.lambda_angle")?);
        let params = ResolventParams::in_sector(lambda, alpha, dim, &sector)?;

        let n = if raw.is_auto("grid.n") {
            match (command, dim) {
                (Command::Sweep, 2) => 128,
                (Command::Sweep, _) => 64,
                _ => 32,
            }
        } else {
            raw.usize("grid.n")?
        };
        if n < 4 || n % 2 != 0 {
            return err(format!("`grid.n` must be even and at least 4, got {n}"));
        }
        resolved.set("grid.n", &n.to_string())?;
        let grids = SweepGrids {
            n,
            box_length: positive("grid.box_length", raw.f64("grid.box_length")?)?,
            intervals: raw.usize("grid.wall_intervals")?,
            decay_lengths: positive("grid.decay_lengths", raw.f64("grid.decay_lengths")?)?,
            first_fraction: positive("grid.first_fraction", raw.f64("grid.first_fraction")?)?,
            layer_fraction: positive("grid.layer_fraction", raw.f64("grid.layer_fraction")?)?,
        };
        if grids.intervals < 2 {
            return err("`grid.wall_intervals` must be at least 2");
        }
        let max_mode = if raw.is_auto("phi.max_mode") { n / 4 } else { raw.usize("phi.max_mode")? };
        if max_mode == 0 || 2 * max_mode >= n {
            return err(format!("`phi.max_mode` must satisfy 0 < 2·max_mode < grid.n = {n}, got {max_mode}"));
        }
        resolved.set("phi.max_mode", &max_mode.to_string())?;
        let seed = raw.u64("seed")?;
        let workers = if raw.is_auto("workers") {
            None
        } else {
            match raw.usize("workers")? {
                0 => return err("`workers` must be at least 1"),
                w => Some(w),
            }
        };

        let tol = Tolerances {
            interior: positive("tol.interior", raw.f64("tol.interior")?)?,
            boundary: positive("tol.boundary", raw.f64("tol.boundary")?)?,
            biharmonic: positive("tol.biharmonic", raw.f64("tol.biharmonic")?)?,
            biharmonic_boundary: positive("tol.biharmonic_boundary", raw.f64("tol.biharmonic_boundary")?)?,
            normal_derivative: positive("tol.normal_derivative", raw.f64("tol.normal_derivative")?)?,
            weak_form: positive("tol.weak_form", raw.f64("tol.weak_form")?)?,
            reality: positive("tol.reality", raw.f64("tol.reality")?)?,
            oracle: positive("tol.oracle", raw.f64("tol.oracle")?)?,
            order: positive("tol.order", raw.f64("tol.order")?)?,
            refinement_drift: positive("tol.refinement_drift", raw.f64("tol.refinement_drift")?)?,
            derivative: positive("tol.derivative", raw.f64("tol.derivative")?)?,
            m2_algebraic: positive("tol.m2_algebraic", raw.f64("tol.m2_algebraic")?)?,
            m2_fd: positive("tol.m2_fd", raw.f64("tol.m2_fd")?)?,
            slope_min: raw.f64("tol.slope_min")?,
            slope_max: raw.f64("tol.slope_max")?,
            alpha_spread: positive("tol.alpha_spread", raw.f64("tol.alpha_spread")?)?,
            angle_constant: positive("tol.angle_constant", raw.f64("tol.angle_constant")?)?,
            under_resolved: positive("tol.under_resolved", raw.f64("tol.under_resolved")?)?,
            ratio_spread: positive("tol.ratio_spread", raw.f64("tol.ratio_spread")?)?,
            ratio_refinement: positive("tol.ratio_refinement", raw.f64("tol.ratio_refinement")?)?,
        };
        if tol.slope_min > tol.slope_max {
            return err("`tol.slope_min` must not exceed `tol.slope_max`");
        }

        let verify = VerifyOptions {
            weak_form_refinements: raw.usize("verify.weak_form_refinements")?,
            test_decay: positive("verify.test_decay", raw.f64("verify.test_decay")?)?,
            fd_step: positive("verify.fd_step", raw.f64("verify.fd_step")?)?,
        };
        if verify.weak_form_refinements > 4 {
            return err("`verify.weak_form_refinements` must be at most 4");
        }

        let oracle_s = raw.f64_list("oracle.s")?;
        if let Some(&bad) = oracle_s.iter().find(|&&s| s <= 0.0) {
            return err(format!("`oracle.s` entries must be positive (ξ = 0 has no u_d), got {bad}"));
        }
        let oracle = OracleOptions {
            steps: raw.usize("oracle.steps")?,
            s: oracle_s,
            bc: raw.get("oracle.bc").parse()?,
            truncation: if raw.is_auto("oracle.truncation") {
                None
            } else {
                Some(positive("oracle.truncation", raw.f64("oracle.truncation")?)?)
            },
            convergence: raw.bool("oracle.convergence")?,
        };
        if oracle.steps < 64 {
            return err(format!("`oracle.steps` must be at least 64, got {}", oracle.steps));
        }

        let certify = CertifyOptions {
            delta: raw.f64("certify.delta")?,
            delta_tilde: raw.f64("certify.delta_tilde")?,
            orders: if raw.is_auto("certify.orders") {
                (0..=if dim == 2 { 1 } else { 2 }).collect()
            } else {
                raw.usize_list("certify.orders")?
            },
            fixed_lambda: (
                positive("certify.fixed_lambda_modulus", raw.f64("certify.fixed_lambda_modulus")?)?,
                raw.f64("certify.fixed_lambda_angle")?,
            ),
            m2_points: raw.usize("certify.m2_points")?,
            derivative_stride: raw.usize("certify.derivative_stride")?.max(1),
            trend_epsilons: raw.f64_list("certify.trend_epsilons")?,
        };
        if !(certify.delta >= 0.0) {
            return err(format!("`certify.delta` must be nonnegative, got {}", certify.delta));
        }
        if !(certify.delta_tilde >= 0.0 && certify.delta_tilde < certify.delta) {
            return err("`certify.delta_tilde` must lie in [0, certify.delta)");
        }
        let max_order = if dim == 2 { 1 } else { 2 };
        if let Some(&k) = certify.orders.iter().find(|&&k| k > max_order) {
            return err(format!("`certify.orders` entry {k} exceeds ⌊(d − 1)/2⌋ + 1 = {max_order}"));
        }
        resolved.set("certify.orders", &certify.orders.iter().map(usize::to_string).collect::<Vec<_>>().join(","))?;
        let fixed = Complex64::from_polar(certify.fixed_lambda.0, certify.fixed_lambda.1);
        ResolventParams::in_sector(fixed, alpha, dim, &sector)?;
        for &eps in &certify.trend_epsilons {
            SectorSpec::new(eps, sector.omega)?;
        }

        let mut experiments = Experiments { decay: false, gradient: false, proxy: false };
        for name in raw.str_list("sweep.experiments") {
            match name.as_str() {
                "decay" => experiments.decay = true,
                "gradient" => experiments.gradient = true,
                "proxy" => experiments.proxy = true,
                other => return err(format!("unknown sweep experiment `{other}`; expected decay, gradient or proxy")),
            }
        }
        let ps = raw.f64_list("sweep.ps")?;
        if let Some(&p) = ps.iter().find(|&&p| p < 1.0) {
            return err(format!("`sweep.ps` entries must satisfy p ≥ 1, got {p}"));
        }
        let moduli = LogAxis::new(
            positive("sweep.moduli_min", raw.f64("sweep.moduli_min")?)?,
            positive("sweep.moduli_max", raw.f64("sweep.moduli_max")?)?,
            raw.usize("sweep.moduli_count")?,
            false,
        )?;
        let angles = if raw.is_auto("sweep.angles") {
            let a = PI - sector.epsilon - PI / 90.0;
            vec![-a, 0.0, a]
        } else {
            raw.f64_list("sweep.angles")?
        };
        resolved.set("sweep.angles", &join(&angles))?;
        if let Some(&a) = angles.iter().find(|&&a| a.abs() >= sector.max_angle()) {
            return err(format!("sweep angle {a} lies outside the sector |arg λ| < π − ε"));
        }
        let alphas = raw.f64_list("sweep.alphas")?;
        if let Some(&a) = alphas.iter().find(|&&a| a < 0.0) {
            return err(format!("invariant α ≥ 0 violated: sweep.alphas contains {a}"));
        }
        let ratio_lambda = Complex64::from_polar(
            positive("sweep.ratio_lambda_modulus", raw.f64("sweep.ratio_lambda_modulus")?)?,
            raw.f64("sweep.ratio_lambda_angle")?,
        );
        let sweep = SweepOptions {
            experiments,
            ps,
            moduli,
            angles,
            alphas,
            refinement: raw.bool("sweep.refinement")?,
            ratio_params: ResolventParams::in_sector(ratio_lambda, alpha, dim, &sector)?,
            ratio_samples: raw.usize("sweep.ratio_samples")?,
        };
        if experiments.decay {
            if moduli.len() < 8 {
                return err(format!("decay fits need at least 8 moduli, got sweep.moduli_count = {}", moduli.len()));
            }
            if moduli.lo < sector.omega {
                return err(format!("decay moduli must satisfy |λ| ≥ ω = {}", sector.omega));
            }
            if sweep.ps.is_empty() || sweep.angles.is_empty() || sweep.alphas.is_empty() {
                return err("the decay sweep needs at least one p, angle and α");
            }
        }
        if (experiments.gradient || experiments.proxy) && sweep.ratio_samples == 0 {
            return err("`sweep.ratio_samples` must be at least 1");
        }

        Ok(Self {
            command,
            resolved,
            sector,
            params,
            grids,
            max_mode,
            seed,
            workers,
            tol,
            verify,
            oracle,
            certify,
            sweep,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut raw = RawConfig::default();
        raw.apply_text("# header\nproblem.alpha = 2.5  # trailing\n\ngrid.n=16\n").unwrap();
        raw.apply_override("problem.dim=3").unwrap();
        assert_eq!(raw.get("problem.alpha"), "2.5");
        let cfg = RunConfig::resolve(Command::Solve, &raw).unwrap();
        assert_eq!(cfg.params.dim, 3);
        assert_eq!(cfg.grids.n, 16);
        assert_eq!(cfg.max_mode, 4);
    }

    #[test]
    fn rejects_unknown_keys_and_malformed_lines() {
        let mut raw = RawConfig::default();
        assert!(raw.apply_text("problem.beta = 1").unwrap_err().0.contains("unknown"));
        assert!(raw.apply_text("no equals sign").unwrap_err().0.contains("line 1"));
        assert!(raw.apply_override("grid.n").is_err());
    }

    #[test]
    fn negative_alpha_names_the_invariant() {
        let mut raw = RawConfig::default();
        raw.set("problem.alpha", "-1").unwrap();
        let e = RunConfig::resolve(Command::Solve, &raw).unwrap_err();
        assert!(e.0.contains("α ≥ 0"), "{e}");
    }

    #[test]
    fn lambda_outside_sector_is_rejected() {
        let mut raw = RawConfig::default();
        raw.set("problem.lambda_angle", "3.0").unwrap();
        assert!(RunConfig::resolve(Command::Solve, &raw).is_err());
    }

    #[test]
    fn auto_values_are_resolved() {
        let cfg = RunConfig::resolve(Command::Sweep, &RawConfig::default()).unwrap();
        assert_eq!(cfg.grids.n, 128);
        assert_eq!(cfg.resolved.get("grid.n"), "128");
        assert_eq!(cfg.sweep.angles.len(), 3);
        assert_eq!(cfg.resolved.get("phi.max_mode"), "32");
        assert_eq!(cfg.resolved.get("certify.orders"), "0,1");
    }
}

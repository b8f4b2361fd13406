//! Scenario drivers.
//!
//! Every driver sweeps one size parameter, records a measured series and
//! judges it with a [`Judgement`]. The judgement travels inside the run's
//! `params`, so a verdict can be recomputed from the emitted record alone.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::arith::{
    gauss_sum_closed, gauss_sum_direct, kadec_gap, pair_collision_moment, predicted_exponent, rep_count_r,
    rep_count_r_table, rep_count_uv, triple_collision_moment, GaussSumParams,
};
use crate::error::{Error, Result};
use crate::quadrature::{
    circle_maximal_grid, fit_exponent, gram_entry, point_time_norm, smooth_size, space_norm, spacetime_norm_auto,
    CircleWindow, PowerFit, SphereQuadrature, TimeGrid,
};
use crate::specfun::{normalized_zonal, szego_amplitudes, szego_profile, zonal_kernel, zonal_l2_norm_sq, ZonalBasis};
use crate::spectral::{
    apply_multiplier, half_wave_frequency, rational_phase, schrodinger_evolve, schrodinger_phase, sobolev_weight,
    sphere_eigenvalue, wave_packet, Bump, CircleField, Field, PacketShape, ZonalField,
};

/// Free-form experiment parameters, echoed into every run.
pub type Params = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl Verdict {
    /// Fail beats inconclusive beats pass.
    pub fn combine(verdicts: impl IntoIterator<Item = Verdict>) -> Verdict {
        verdicts.into_iter().fold(Verdict::Pass, |acc, v| match (acc, v) {
            (Verdict::Fail, _) | (_, Verdict::Fail) => Verdict::Fail,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::Pass,
        })
    }
}

/// What a series is compared against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// `|slope - predicted| ≤ tolerance`.
    SlopeWithin,
    /// `slope ≤ predicted + tolerance`.
    SlopeAtMost,
    /// `slope ≥ predicted - tolerance`.
    SlopeAtLeast,
    /// `min y ≥ predicted - tolerance`.
    MinValueAtLeast,
    /// `max y ≤ predicted + tolerance`.
    MaxValueAtMost,
    /// `last y < predicted + tolerance`.
    LastValueBelow,
    /// `last y ≥ predicted - tolerance`.
    LastValueAtLeast,
    /// `max y / min y ≤ predicted + tolerance`.
    SpreadAtMost,
}

impl Criterion {
    fn is_slope(self) -> bool {
        matches!(self, Criterion::SlopeWithin | Criterion::SlopeAtMost | Criterion::SlopeAtLeast)
    }
}

/// Smallest series length for a slope verdict.
pub const MIN_SLOPE_POINTS: usize = 5;

/// Goodness of fit required before a growth exponent is trusted.
pub const R2_GATE: f64 = 0.98;

/// A criterion with its threshold and the gates that guard it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Judgement {
    pub criterion: Criterion,
    pub predicted: f64,
    pub tolerance: f64,
    pub min_points: usize,
    pub r2_min: Option<f64>,
}

impl Judgement {
    /// Two-sided slope test; the `r²` gate applies to nonzero exponents.
    pub fn slope_within(predicted: f64, tolerance: f64) -> Self {
        let r2_min = (predicted != 0.0).then_some(R2_GATE);
        Self { criterion: Criterion::SlopeWithin, predicted, tolerance, min_points: MIN_SLOPE_POINTS, r2_min }
    }

    /// Upper bound on the slope. A noisy fit cannot hide growth above the
    /// bound, so there is no `r²` gate.
    pub fn slope_at_most(predicted: f64, tolerance: f64) -> Self {
        Self { criterion: Criterion::SlopeAtMost, predicted, tolerance, min_points: MIN_SLOPE_POINTS, r2_min: None }
    }

    /// Lower bound on the slope. Pre-asymptotic curvature lowers `r²` without
    /// inflating the fitted growth, so there is no `r²` gate either.
    pub fn slope_at_least(predicted: f64, tolerance: f64) -> Self {
        Self { criterion: Criterion::SlopeAtLeast, predicted, tolerance, min_points: MIN_SLOPE_POINTS, r2_min: None }
    }

    /// Pointwise test on the measured values.
    pub fn value(criterion: Criterion, bound: f64) -> Self {
        Self { criterion, predicted: bound, tolerance: 0.0, min_points: 1, r2_min: None }
    }

    /// Fit (when one is possible) and verdict for a series.
    pub fn judge(&self, series: &[(f64, f64)]) -> (Option<PowerFit>, Verdict) {
        let fit = fit_exponent(series).ok();
        if series.len() < self.min_points || series.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
            return (fit, Verdict::Inconclusive);
        }
        let (p, tol) = (self.predicted, self.tolerance);
        let ys = series.iter().map(|s| s.1);
        let ok = match self.criterion {
            c if c.is_slope() => {
                let Some(fit) = fit else {
                    return (None, Verdict::Inconclusive);
                };
                if self.r2_min.is_some_and(|r| fit.r2 < r) {
                    return (Some(fit), Verdict::Inconclusive);
                }
                match c {
                    Criterion::SlopeWithin => (fit.slope - p).abs() <= tol,
                    Criterion::SlopeAtMost => fit.slope <= p + tol,
                    _ => fit.slope >= p - tol,
                }
            }
            Criterion::MinValueAtLeast => ys.fold(f64::INFINITY, f64::min) >= p - tol,
            Criterion::MaxValueAtMost => ys.fold(f64::NEG_INFINITY, f64::max) <= p + tol,
            Criterion::LastValueBelow => series.last().is_some_and(|s| s.1 < p + tol),
            Criterion::LastValueAtLeast => series.last().is_some_and(|s| s.1 >= p - tol),
            Criterion::SpreadAtMost => {
                let lo = ys.clone().fold(f64::INFINITY, f64::min);
                let hi = ys.fold(f64::NEG_INFINITY, f64::max);
                lo > 0.0 && hi / lo <= p + tol
            }
            _ => unreachable!(),
        };
        (fit, if ok { Verdict::Pass } else { Verdict::Fail })
    }
}

/// One measured series with its fit and verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRun {
    pub experiment: String,
    pub params: Params,
    pub series: Vec<(f64, f64)>,
    pub slope: Option<f64>,
    pub r2: Option<f64>,
    pub predicted: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
}

impl ScalingRun {
    pub fn judged(experiment: impl Into<String>, mut params: Params, series: Vec<(f64, f64)>, j: Judgement) -> Self {
        let (fit, verdict) = j.judge(&series);
        params.insert("judgement".into(), serde_json::to_value(j).expect("plain data"));
        Self {
            experiment: experiment.into(),
            params,
            series,
            slope: fit.map(|f| f.slope),
            r2: fit.map(|f| f.r2),
            predicted: j.predicted,
            tolerance: j.tolerance,
            verdict,
        }
    }

    pub fn judgement(&self) -> Result<Judgement> {
        let v = self.params.get("judgement").ok_or_else(|| Error::Config("run carries no judgement".into()))?;
        serde_json::from_value(v.clone()).map_err(|e| Error::Config(e.to_string()))
    }

    /// Verdict recomputed from the stored series and judgement.
    pub fn recheck(&self) -> Result<Verdict> {
        Ok(self.judgement()?.judge(&self.series).1)
    }
}

/// Distribution of random coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientLaw {
    /// `e^{iφ}` with `φ` uniform on `[0, 2π)`.
    UnitPhase,
    /// Standard complex Gaussian, `E|a|² = 1`.
    Gaussian,
    /// All coefficients equal to one.
    Ones,
}

/// Reproducible family of coefficient vectors: trial `i` draws from the
/// ChaCha8 stream `i` of the seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialEnsemble {
    pub law: CoefficientLaw,
    pub trials: usize,
    pub seed: u64,
}

impl TrialEnsemble {
    pub fn coefficients(&self, trial: usize, len: usize) -> Vec<Complex64> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        (0..len)
            .map(|_| match self.law {
                CoefficientLaw::UnitPhase => Complex64::from_polar(1.0, TAU * rng.random::<f64>()),
                CoefficientLaw::Gaussian => {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re, im) / 2f64.sqrt()
                }
                CoefficientLaw::Ones => Complex64::new(1.0, 0.0),
            })
            .collect()
    }
}

fn to_params<C: Serialize>(cfg: &C) -> Params {
    match serde_json::to_value(cfg).expect("plain data") {
        Value::Object(m) => m,
        _ => unreachable!("configs are structs"),
    }
}

fn with(mut params: Params, extra: impl IntoIterator<Item = (&'static str, Value)>) -> Params {
    for (k, v) in extra {
        params.insert(k.into(), v);
    }
    params
}

/// Parses a configuration, filling unspecified keys with defaults.
pub fn parse_config<C: DeserializeOwned>(params: &Params) -> Result<C> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| Error::Config(e.to_string()))
}

fn check_sizes(name: &str, values: &[usize]) -> Result<()> {
    if values.is_empty() || values.contains(&0) {
        return Err(Error::Config(format!("`{name}` must be a non-empty list of positive sizes")));
    }
    Ok(())
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(Error::Config("`trials` must be positive".into()));
    }
    Ok(())
}

fn pairs(series: &[(f64, f64)]) -> Value {
    json!(series.iter().map(|&(x, y)| [x, y]).collect::<Vec<_>>())
}

// ---------------------------------------------------------------------------
// L⁴ on the circle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ZygmundConfig {
    pub k_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub law: CoefficientLaw,
}

impl Default for ZygmundConfig {
    fn default() -> Self {
        Self { k_values: vec![16, 32, 64, 128, 256], trials: 64, seed: 0, law: CoefficientLaw::UnitPhase }
    }
}

/// `max_trials ‖e^{itΔ} f‖_{L⁴(T×T)} / ‖f‖_{L²}` for `f = Σ_{|k|≤K} a_k e^{ikθ}`.
pub fn exp_zygmund_s1(cfg: &ZygmundConfig) -> Result<Vec<ScalingRun>> {
    check_sizes("k_values", &cfg.k_values)?;
    check_trials(cfg.trials)?;
    let ens = TrialEnsemble { law: cfg.law, trials: cfg.trials, seed: cfg.seed };
    let unimodular = cfg.law != CoefficientLaw::Gaussian;
    let mut series = Vec::new();
    let mut ones = Vec::new();
    let mut defect: f64 = 0.0;
    for &k in &cfg.k_values {
        let width = 2 * k + 1;
        let ratio = |coeffs: Vec<Complex64>| -> Result<f64> {
            let f = CircleField::two_sided(coeffs)?;
            Ok(spacetime_norm_auto(&f, 4)?.value / f.l2_norm())
        };
        let mut best: f64 = 0.0;
        for trial in 0..cfg.trials {
            let r = ratio(ens.coefficients(trial, width))?;
            if unimodular {
                defect = defect.max((r.powi(4) - (2.0 - 1.0 / width as f64)).abs());
            }
            best = best.max(r);
        }
        series.push((k as f64, best));
        ones.push((k as f64, ratio(vec![Complex64::new(1.0, 0.0); width])?));
    }
    let params = with(
        to_params(cfg),
        [("ones_series", pairs(&ones)), ("identity_defect", if unimodular { json!(defect) } else { Value::Null })],
    );
    Ok(vec![ScalingRun::judged("exp_zygmund_s1", params, series, Judgement::slope_within(0.0, 0.05))])
}

// ---------------------------------------------------------------------------
// Pointwise L⁴ in time on S²

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PointwiseL4Config {
    pub n: usize,
    pub k_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub alpha: f64,
    pub theta_samples: usize,
}

impl Default for PointwiseL4Config {
    fn default() -> Self {
        Self { n: 2, k_values: vec![16, 32, 64, 128, 256], trials: 16, seed: 0, alpha: 0.05, theta_samples: 16 }
    }
}

/// `max_{trials, θ} ‖e^{itΔ} f(θ)‖_{L⁴_t} / (Σ (1+λ_k)^α |a_k Z̃_k(θ)|²)^{1/2}`.
pub fn exp_pointwise_l4(cfg: &PointwiseL4Config) -> Result<Vec<ScalingRun>> {
    check_sizes("k_values", &cfg.k_values)?;
    check_trials(cfg.trials)?;
    if cfg.theta_samples == 0 || !(cfg.alpha > 0.0) {
        return Err(Error::Config("need theta_samples > 0 and alpha > 0".into()));
    }
    let ens = TrialEnsemble { law: CoefficientLaw::UnitPhase, trials: cfg.trials, seed: cfg.seed };
    let thetas: Vec<f64> = (0..cfg.theta_samples).map(|i| PI * (i as f64 + 0.5) / cfg.theta_samples as f64).collect();
    let mut series = Vec::new();
    let mut moment_check: f64 = 0.0;
    for &k in &cfg.k_values {
        let basis = ZonalBasis::new(cfg.n, k)?;
        let weights: Vec<f64> =
            (0..=k).map(|j| (1.0 + sphere_eigenvalue(cfg.n, j as u64) as f64).powf(cfg.alpha)).collect();
        let mut best: f64 = 0.0;
        for trial in 0..cfg.trials {
            let f = ZonalField::new(cfg.n, ens.coefficients(trial, k + 1))?;
            for &theta in &thetas {
                let z = basis.values(theta.cos());
                let rhs: f64 =
                    f.coeffs().iter().zip(&z).zip(&weights).map(|((a, zk), w)| w * (a * zk).norm_sqr()).sum();
                let lhs = point_time_norm(&f, theta, 4)?;
                best = best.max(lhs / rhs.sqrt());
            }
            if trial == 0 && k == cfg.k_values[0] {
                let b: Vec<Complex64> =
                    f.coeffs().iter().zip(basis.values(thetas[0].cos())).map(|(a, z)| a * z).collect();
                let freqs: Vec<u64> = (0..=k as u64).map(|j| sphere_eigenvalue(cfg.n, j)).collect();
                let exact = TAU * pair_collision_moment(&b, &freqs);
                let fft = point_time_norm(&f, thetas[0], 4)?.powi(4);
                moment_check = ((fft - exact) / exact).abs();
            }
        }
        series.push((k as f64, best));
    }
    let params = with(to_params(cfg), [("moment_check", json!(moment_check))]);
    Ok(vec![ScalingRun::judged("exp_pointwise_l4", params, series, Judgement::slope_at_most(0.0, 0.05))])
}

// ---------------------------------------------------------------------------
// Riesz bounds for the half-wave frequencies

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RieszGramConfig {
    pub k_values: Vec<usize>,
}

impl Default for RieszGramConfig {
    fn default() -> Self {
        Self { k_values: vec![16, 64, 256] }
    }
}

/// Frequencies lie within `δ = 1/8` of `k + 1/2`; the classical perturbation
/// bounds for the system are `(cos πδ - sin πδ)²` and
/// `(2 - cos πδ + sin πδ)²`.
pub fn riesz_bounds(delta: f64) -> (f64, f64) {
    let (s, c) = (PI * delta).sin_cos();
    ((c - s).powi(2), (2.0 - c + s).powi(2))
}

/// Gram matrix `(1/2π) ∫_T e^{it(μ_j - μ_k)} dt`, `μ_k = √(k(k+1))`, `1 ≤ j, k ≤ K`.
pub fn half_wave_gram(k: usize) -> DMatrix<Complex64> {
    let mu: Vec<f64> = (1..=k as u64).map(half_wave_frequency).collect();
    DMatrix::from_fn(k, k, |i, j| if i == j { Complex64::new(1.0, 0.0) } else { gram_entry(mu[i] - mu[j]) })
}

/// Ascending eigenvalues of the Hermitian Gram matrix.
pub fn gram_spectrum(k: usize) -> Vec<f64> {
    let mut ev: Vec<f64> = half_wave_gram(k).symmetric_eigen().eigenvalues.iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn exp_riesz_gram(cfg: &RieszGramConfig) -> Result<Vec<ScalingRun>> {
    check_sizes("k_values", &cfg.k_values)?;
    let (a_bound, b_bound) = riesz_bounds(0.125);
    let max_gap = (1..=cfg.k_values.iter().copied().max().unwrap_or(1) as u64)
        .map(kadec_gap)
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    let mut diag_defect: f64 = 0.0;
    for &k in &cfg.k_values {
        let g = half_wave_gram(k);
        diag_defect = diag_defect.max((0..k).map(|i| (g[(i, i)] - 1.0).norm()).fold(0.0, f64::max));
        let ev = gram_spectrum(k);
        lower.push((k as f64, ev[0]));
        upper.push((k as f64, ev[k - 1]));
    }
    let params = with(to_params(cfg), [("diag_defect", json!(diag_defect)), ("max_gap", json!(max_gap))]);
    Ok(vec![
        ScalingRun::judged(
            "exp_riesz_gram/lower",
            params.clone(),
            lower,
            Judgement::value(Criterion::MinValueAtLeast, 0.25),
        ),
        ScalingRun::judged("exp_riesz_gram/upper", with(params, [("lower_bound", json!(a_bound))]), upper, {
            Judgement::value(Criterion::MaxValueAtMost, b_bound)
        }),
    ])
}

// ---------------------------------------------------------------------------
// Wave-packet scaling

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavePacketConfig {
    pub n: usize,
    pub p: u32,
    pub alpha: f64,
    /// `h = 2^{-e}` for each `e`.
    pub h_exponents: Vec<u32>,
    pub bump: Bump,
}

impl Default for WavePacketConfig {
    fn default() -> Self {
        Self { n: 3, p: 4, alpha: 0.0, h_exponents: vec![4, 5, 6, 7, 8], bump: Bump::default() }
    }
}

/// `‖e^{itΔ} f_h‖_{L^p(T×S^n)} / ‖f_h‖_{W^{α,p}}` and `‖(1-Δ)^{α/2} f_h‖_∞`
/// against `1/h` for the semiclassical packet `f_h`.
pub fn exp_wave_packet_scaling(cfg: &WavePacketConfig) -> Result<Vec<ScalingRun>> {
    if cfg.h_exponents.is_empty() || cfg.p < 2 || cfg.p % 2 == 1 {
        return Err(Error::Config("need h_exponents and an even p >= 2".into()));
    }
    let mut ratio = Vec::new();
    let mut sup = Vec::new();
    let mut alignment = Vec::new();
    let mut certified = true;
    for &e in &cfg.h_exponents {
        let h = 0.5f64.powi(e as i32);
        let shape = PacketShape { bump: cfg.bump, ..PacketShape::new(cfg.n, h, cfg.alpha)? };
        let f = wave_packet(&shape)?;
        let g = apply_multiplier(&f, &sobolev_weight(cfg.n, cfg.alpha))?;
        let quad = SphereQuadrature::for_degree(cfg.n, cfg.p as usize * f.band_limit() + cfg.n)?;
        let num = spacetime_norm_auto(&f, cfg.p)?;
        let den = space_norm(&g, cfg.p as f64, &quad)?;
        certified &= num.certified && den.certified;
        let linf = space_norm(&g, f64::INFINITY, &quad)?;
        ratio.push((1.0 / h, num.value / den.value));
        sup.push((1.0 / h, linf.value + linf.error_bound));
        let lam_max = sphere_eigenvalue(cfg.n, f.band_limit() as u64) as f64;
        alignment.push((1.0 / h, PI / (3.0 * h * h * lam_max)));
    }
    let params = with(
        to_params(cfg),
        [
            ("bump_profile", json!(cfg.bump.profile_id())),
            ("certified", json!(certified)),
            ("phase_alignment_c", pairs(&alignment)),
        ],
    );
    let sigma = predicted_exponent(cfg.n as u32, cfg.p as f64) - cfg.alpha;
    Ok(vec![
        ScalingRun::judged(
            "exp_wave_packet_scaling/ratio",
            params.clone(),
            ratio,
            Judgement::slope_at_least(sigma, 0.1),
        ),
        ScalingRun::judged(
            "exp_wave_packet_scaling/sup",
            params,
            sup,
            Judgement::slope_at_most(cfg.n as f64 / 2.0 - cfg.alpha, 0.1),
        ),
    ])
}

// ---------------------------------------------------------------------------
// Kernel series

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelBoundConfig {
    pub n_values: Vec<usize>,
    pub epsilon: f64,
    pub k_values: Vec<usize>,
    pub cauchy_threshold: f64,
}

impl Default for KernelBoundConfig {
    fn default() -> Self {
        Self {
            n_values: vec![2, 3],
            epsilon: 0.25,
            k_values: vec![10, 30, 100, 300, 1000, 3000, 10000],
            cauchy_threshold: 1e-6,
        }
    }
}

/// Summand `‖Z_k‖² (1 + k(k+n-1))^{-(n/2 + 2ε)}` of the kernel series.
pub fn kernel_summand(n: usize, k: usize, epsilon: f64) -> Result<f64> {
    let lam = sphere_eigenvalue(n, k as u64) as f64;
    Ok(zonal_l2_norm_sq(n, k)? * (1.0 + lam).powf(-(n as f64 / 2.0 + 2.0 * epsilon)))
}

/// Partial sums `S(K) = Σ_{k ≤ K}` of the kernel series for every `K` listed.
pub fn kernel_partial_sums(n: usize, epsilon: f64, ks: &[usize]) -> Result<Vec<f64>> {
    let top = ks.iter().copied().max().unwrap_or(0);
    let mut acc = 0.0;
    let mut all = Vec::with_capacity(top + 1);
    for k in 0..=top {
        acc += kernel_summand(n, k, epsilon)?;
        all.push(acc);
    }
    Ok(ks.iter().map(|&k| all[k]).collect())
}

/// Increment decay and Cauchy stabilization at `ε > 0`, plus the `ε = 0`
/// control whose increments stay above the threshold.
pub fn exp_kernel_bound(cfg: &KernelBoundConfig) -> Result<Vec<ScalingRun>> {
    check_sizes("k_values", &cfg.k_values)?;
    if !(cfg.epsilon > 0.0) {
        return Err(Error::Config("epsilon must be positive".into()));
    }
    let mut runs = Vec::new();
    for &n in &cfg.n_values {
        let increments = |eps: f64| -> Result<Vec<(f64, f64)>> {
            cfg.k_values.iter().map(|&k| Ok((k as f64, kernel_summand(n, k, eps)?))).collect()
        };
        let main = increments(cfg.epsilon)?;
        let control = increments(0.0)?;
        let sums = kernel_partial_sums(n, cfg.epsilon, &cfg.k_values)?;
        let control_sums = kernel_partial_sums(n, 0.0, &cfg.k_values)?;
        let params = with(
            to_params(cfg),
            [("n", json!(n)), ("partial_sums", json!(sums)), ("control_partial_sums", json!(control_sums))],
        );
        runs.push(ScalingRun::judged(
            format!("exp_kernel_bound/decay_n{n}"),
            params.clone(),
            main.clone(),
            Judgement::slope_within(-1.0 - 4.0 * cfg.epsilon, 0.1),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_kernel_bound/cauchy_n{n}"),
            params.clone(),
            main,
            Judgement::value(Criterion::LastValueBelow, cfg.cauchy_threshold),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_kernel_bound/control_n{n}"),
            params,
            control,
            Judgement::value(Criterion::LastValueAtLeast, cfg.cauchy_threshold),
        ));
    }
    Ok(runs)
}

// ---------------------------------------------------------------------------
// L⁶ on the circle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrichartzL6Config {
    pub n: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    pub law: CoefficientLaw,
}

impl Default for StrichartzL6Config {
    fn default() -> Self {
        Self { n: 2, n_values: vec![16, 32, 64, 128, 256], trials: 32, seed: 0, law: CoefficientLaw::UnitPhase }
    }
}

/// `max_trials ‖Σ_{k<N} a_k e^{-itk(k+n-1)} e^{ikθ}‖_{L⁶(T×T)} / ‖a‖_{ℓ²}`.
pub fn exp_strichartz_l6(cfg: &StrichartzL6Config) -> Result<Vec<ScalingRun>> {
    check_sizes("n_values", &cfg.n_values)?;
    check_trials(cfg.trials)?;
    let ens = TrialEnsemble { law: cfg.law, trials: cfg.trials, seed: cfg.seed };
    let ratio = |a: Vec<Complex64>| -> Result<(f64, CircleField)> {
        let f = CircleField::one_sided(cfg.n, a)?;
        Ok((spacetime_norm_auto(&f, 6)?.value / f.coefficient_norm(), f))
    };
    let mut series = Vec::new();
    let mut ones = Vec::new();
    for &n in &cfg.n_values {
        let mut best: f64 = 0.0;
        for trial in 0..cfg.trials {
            best = best.max(ratio(ens.coefficients(trial, n))?.0);
        }
        series.push((n as f64, best));
        ones.push((n as f64, ratio(vec![Complex64::new(1.0, 0.0); n])?.0));
    }
    let m = cfg.n as u64 - 1;
    let mut moment_check: f64 = 0.0;
    for a in [vec![Complex64::new(1.0, 0.0); 16], ens.coefficients(0, 16)] {
        let (r, f) = ratio(a.clone())?;
        let fft = (r * f.coefficient_norm()).powi(6);
        let exact = TAU * TAU * triple_collision_moment(&a, m);
        moment_check = moment_check.max(((fft - exact) / exact).abs());
    }
    let params = with(to_params(cfg), [("ones_series", pairs(&ones)), ("moment_check", json!(moment_check))]);
    Ok(vec![ScalingRun::judged("exp_strichartz_l6", params, series, Judgement::slope_at_most(0.0, 0.1))])
}

// ---------------------------------------------------------------------------
// Maximal function on the circle

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MaximalS1Config {
    pub n: usize,
    pub n_values: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Time samples per unit of Bernstein degree.
    pub oversample: f64,
    /// Colatitude samples per mode.
    pub theta_factor: usize,
}

impl Default for MaximalS1Config {
    fn default() -> Self {
        Self { n: 2, n_values: vec![64, 128, 256, 512, 1024], trials: 4, seed: 0, oversample: 4.0, theta_factor: 2 }
    }
}

/// Sampled `‖sup_t |u(t, ·)|‖_{L⁶(T)}` (lower and certified upper values) for
/// `u = Σ_{k<N} a_k e^{-itk(k+n-1)} e^{ikθ}`.
pub fn circle_maximal_l6(f: &CircleField, oversample: f64, m_theta: usize) -> Result<(f64, f64)> {
    if !(oversample > 0.0) {
        return Err(Error::Config("oversample must be positive".into()));
    }
    let window = CircleWindow::new(f, m_theta.is_multiple_of(2));
    let m = smooth_size((oversample * window.half_span()).ceil().max(1.0) as usize);
    let bounds = circle_maximal_grid(f, TimeGrid::new(m)?, m_theta);
    let norm = |vals: &mut dyn Iterator<Item = f64>| {
        (TAU / m_theta as f64 * vals.map(|v| v.powi(6)).sum::<f64>()).powf(1.0 / 6.0)
    };
    Ok((norm(&mut bounds.iter().map(|b| b.lower)), norm(&mut bounds.iter().map(|b| b.upper))))
}

pub fn exp_maximal_s1(cfg: &MaximalS1Config) -> Result<Vec<ScalingRun>> {
    check_sizes("n_values", &cfg.n_values)?;
    check_trials(cfg.trials)?;
    if cfg.theta_factor == 0 {
        return Err(Error::Config("theta_factor must be positive".into()));
    }
    let ens = TrialEnsemble { law: CoefficientLaw::UnitPhase, trials: cfg.trials, seed: cfg.seed };
    let mut random = Vec::new();
    let mut random_upper = Vec::new();
    let mut gauss = Vec::new();
    let mut gauss_upper = Vec::new();
    for &n in &cfg.n_values {
        let m_theta = smooth_size(cfg.theta_factor * n).next_multiple_of(2);
        let mut best = (0.0f64, 0.0f64);
        for trial in 0..cfg.trials {
            let f = CircleField::one_sided(cfg.n, ens.coefficients(trial, n))?;
            let (lo, hi) = circle_maximal_l6(&f, cfg.oversample, m_theta)?;
            let norm = f.coefficient_norm();
            best = (best.0.max(lo / norm), best.1.max(hi / norm));
        }
        random.push((n as f64, best.0));
        random_upper.push((n as f64, best.1));
        let f = CircleField::one_sided(cfg.n, vec![Complex64::new(1.0, 0.0); n])?;
        let (lo, hi) = circle_maximal_l6(&f, cfg.oversample, m_theta)?;
        gauss.push((n as f64, lo / f.coefficient_norm()));
        gauss_upper.push((n as f64, hi / f.coefficient_norm()));
    }
    let params = to_params(cfg);
    Ok(vec![
        ScalingRun::judged(
            "exp_maximal_s1/random",
            with(params.clone(), [("upper_series", pairs(&random_upper))]),
            random,
            Judgement::slope_at_most(1.0 / 3.0, 0.1),
        ),
        ScalingRun::judged(
            "exp_maximal_s1/gauss",
            with(params, [("upper_series", pairs(&gauss_upper))]),
            gauss,
            Judgement::slope_within(0.25, 0.05),
        ),
    ])
}

// ---------------------------------------------------------------------------
// Maximal-function blowup on S^n

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlowupConfig {
    pub n_values: Vec<usize>,
    pub n_list: Vec<usize>,
    pub epsilon: f64,
    pub samples_per_interval: usize,
    /// Sobolev order for the coefficient-norm growth check.
    pub sobolev_s: f64,
}

impl Default for BlowupConfig {
    fn default() -> Self {
        Self {
            n_values: vec![2, 3],
            n_list: vec![64, 128, 256, 512, 1024],
            epsilon: 0.3,
            samples_per_interval: 16,
            sobolev_s: 0.25,
        }
    }
}

/// One interval `(2πp/q + π/16N, 2πp/q + π/8N)` of the blowup set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlowupInterval {
    pub p: u64,
    pub q: u64,
    pub lo: f64,
    pub hi: f64,
}

/// Intervals of `E_N`: odd `q ∈ [√N, 2√N]`, even `p` with
/// `2ε < 2πp/q < π - 2ε`, sorted by left endpoint.
pub fn blowup_intervals(big_n: usize, epsilon: f64) -> Vec<BlowupInterval> {
    let nf = big_n as f64;
    let q_lo = (nf.sqrt().ceil() as u64).max(1);
    let q_hi = (2.0 * nf.sqrt()).floor() as u64;
    let mut out = Vec::new();
    for q in (q_lo..=q_hi).filter(|q| q % 2 == 1) {
        for p in (0..q).step_by(2) {
            let theta = TAU * p as f64 / q as f64;
            if 2.0 * epsilon < theta && theta < PI - 2.0 * epsilon {
                out.push(BlowupInterval { p, q, lo: theta + PI / (16.0 * nf), hi: theta + PI / (8.0 * nf) });
            }
        }
    }
    out.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    out
}

/// Measure (in `dθ`) of the union and whether distinct fractions give
/// disjoint intervals.
pub fn interval_union(intervals: &[BlowupInterval]) -> (f64, bool) {
    let mut measure = 0.0;
    let mut disjoint_or_identical = true;
    let mut end = f64::NEG_INFINITY;
    let mut last: Option<&BlowupInterval> = None;
    for iv in intervals {
        if let Some(prev) = last {
            let same = prev.p * iv.q == iv.p * prev.q;
            if !same && iv.lo < end {
                disjoint_or_identical = false;
            }
        }
        if iv.hi > end {
            measure += iv.hi - iv.lo.max(end);
            end = iv.hi;
        }
        last = Some(iv);
    }
    (measure, disjoint_or_identical)
}

/// `min |e^{i(2π/q)Δ} f_N(θ)|` over the sample points of `E_N`, for
/// `f_N = Σ_{k<N} Z̃_k / c_k`.
pub fn blowup_minimum(
    n: usize,
    big_n: usize,
    intervals: &[BlowupInterval],
    samples: usize,
    amps: &[f64],
) -> Result<f64> {
    let basis = ZonalBasis::new(n, big_n - 1)?;
    let lam: Vec<u64> = (0..big_n as u64).map(|k| sphere_eigenvalue(n, k)).collect();
    let mut vals = vec![0.0; big_n];
    let mut best = f64::INFINITY;
    for iv in intervals {
        let phases: Vec<Complex64> = lam.iter().zip(amps).map(|(&l, c)| rational_phase(l, 1, iv.q) / *c).collect();
        for i in 0..samples {
            let theta = iv.lo + (iv.hi - iv.lo) * (i as f64 + 0.5) / samples as f64;
            basis.values_into(theta.cos(), &mut vals);
            let u: Complex64 = phases.iter().zip(&vals).map(|(ph, z)| ph * z).sum();
            best = best.min(u.norm());
        }
    }
    Ok(best)
}

pub fn exp_maximal_blowup(cfg: &BlowupConfig) -> Result<Vec<ScalingRun>> {
    check_sizes("n_list", &cfg.n_list)?;
    if cfg.samples_per_interval == 0 || !(cfg.epsilon > 0.0 && cfg.epsilon < PI / 4.0) {
        return Err(Error::Config("need samples_per_interval > 0 and 0 < epsilon < pi/4".into()));
    }
    let top = cfg.n_list.iter().copied().max().unwrap_or(1).max(64);
    let mu_min = interval_union(&blowup_intervals(64, cfg.epsilon)).0 / 2.0;
    let mut runs = Vec::new();
    for &n in &cfg.n_values {
        let amps = szego_amplitudes(n, top - 1)?;
        let mut minima = Vec::new();
        let mut measures = Vec::new();
        let mut sobolev = Vec::new();
        let mut disjoint = true;
        let mut gauss_defect: f64 = 0.0;
        let mut counts = Vec::new();
        for &big_n in &cfg.n_list {
            let ivs = blowup_intervals(big_n, cfg.epsilon);
            let (measure, ok) = interval_union(&ivs);
            disjoint &= ok;
            for iv in &ivs {
                let s = gauss_sum_direct(iv.q, n as i64 - 1 - iv.p as i64)?;
                gauss_defect = gauss_defect.max((s.norm() - (iv.q as f64).sqrt()).abs());
            }
            counts.push(json!([big_n, ivs.len()]));
            let m = if ivs.is_empty() { 0.0 } else { blowup_minimum(n, big_n, &ivs, cfg.samples_per_interval, &amps)? };
            minima.push((big_n as f64, m));
            measures.push((big_n as f64, measure));
            let hs: f64 = (0..big_n)
                .map(|k| (1.0 + sphere_eigenvalue(n, k as u64) as f64).powf(cfg.sobolev_s) / (amps[k] * amps[k]))
                .sum();
            sobolev.push((big_n as f64, hs.sqrt()));
        }
        let regime = if n % 8 == 3 || n % 8 == 7 { "cosine_linear_in_eta" } else { "cosine_bounded_below" };
        let params = with(
            to_params(cfg),
            [
                ("n", json!(n)),
                ("cosine_regime", json!(regime)),
                ("disjoint_or_identical", json!(disjoint)),
                ("gauss_magnitude_defect", json!(gauss_defect)),
                ("interval_counts", json!(counts)),
                ("mu_min", json!(mu_min)),
            ],
        );
        runs.push(ScalingRun::judged(
            format!("exp_maximal_blowup/minimum_n{n}"),
            params.clone(),
            minima,
            Judgement::slope_at_least(0.75, 0.05),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_maximal_blowup/measure_n{n}"),
            params.clone(),
            measures,
            Judgement::value(Criterion::MinValueAtLeast, mu_min),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_maximal_blowup/sobolev_n{n}"),
            params,
            sobolev,
            Judgement::slope_at_most(0.5 + cfg.sobolev_s, 0.05),
        ));
    }
    Ok(runs)
}

// ---------------------------------------------------------------------------
// Modulated-cosine asymptotic

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SzegoFitConfig {
    pub n_values: Vec<usize>,
    pub k_values: Vec<usize>,
    /// Grid points per unit of degree, so the grid resolves the oscillation.
    pub points_per_degree: usize,
    /// Grid covers `[c / k_min, π - c / k_min]`.
    pub edge_constant: f64,
}

impl Default for SzegoFitConfig {
    fn default() -> Self {
        Self {
            n_values: vec![2, 3],
            k_values: vec![32, 64, 128, 256, 512, 1024],
            points_per_degree: 8,
            edge_constant: 1.0,
        }
    }
}

/// Scaled remainder `max_θ |Z̃_k/c_k - g_k| k (sin θ)^{(n+1)/2}`, the raw
/// remainder `|Z̃_k - c_k g_k|` at the equator, and the spread of `c_k`.
pub fn exp_szego_fit(cfg: &SzegoFitConfig) -> Result<Vec<ScalingRun>> {
    check_sizes("k_values", &cfg.k_values)?;
    let k_min = cfg.k_values.iter().copied().min().unwrap_or(1) as f64;
    let edge = cfg.edge_constant / k_min;
    if cfg.points_per_degree == 0 || !(edge > 0.0 && edge < PI / 2.0) {
        return Err(Error::Config("need points_per_degree > 0 and 0 < c/k_min < pi/2".into()));
    }
    let top = cfg.k_values.iter().copied().max().unwrap_or(1);
    let mut runs = Vec::new();
    for &n in &cfg.n_values {
        let amps = szego_amplitudes(n, top)?;
        let mut scaled = Vec::new();
        let mut equator = Vec::new();
        let mut band = Vec::new();
        for &k in &cfg.k_values {
            let c = amps[k];
            let m = cfg.points_per_degree * k + 1;
            let worst = (0..m)
                .map(|i| edge + (PI - 2.0 * edge) * i as f64 / (m - 1) as f64)
                .map(|t| {
                    let err = (normalized_zonal(n, k, t)? / c - szego_profile(n, k, t)).abs();
                    Ok(err * k as f64 * t.sin().powf((n as f64 + 1.0) / 2.0))
                })
                .collect::<Result<Vec<f64>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            scaled.push((k as f64, worst));
            let t = PI / 2.0;
            equator.push((k as f64, (normalized_zonal(n, k, t)? - c * szego_profile(n, k, t)).abs()));
            band.push((k as f64, c));
        }
        let params = with(to_params(cfg), [("n", json!(n))]);
        runs.push(ScalingRun::judged(
            format!("exp_szego_fit/scaled_n{n}"),
            params.clone(),
            scaled,
            Judgement::slope_at_most(0.0, 0.05),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_szego_fit/equator_n{n}"),
            params.clone(),
            equator,
            Judgement::slope_within(-1.0, 0.15),
        ));
        runs.push(ScalingRun::judged(
            format!("exp_szego_fit/band_n{n}"),
            params,
            band,
            Judgement::value(Criterion::SpreadAtMost, 2.0),
        ));
    }
    Ok(runs)
}

// ---------------------------------------------------------------------------
// Exactness checks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaussSumCheckConfig {
    pub q_max: u64,
    pub n_values: Vec<u64>,
}

impl Default for GaussSumCheckConfig {
    fn default() -> Self {
        Self { q_max: 999, n_values: vec![2, 3, 4, 5] }
    }
}

/// Closed form against the direct sum for odd `q ≤ q_max`, even `p ≤ 2q`;
/// one point per `q` holding the worst discrepancy.
pub fn check_gauss_sums(cfg: &GaussSumCheckConfig) -> Result<Vec<ScalingRun>> {
    let mut closed = Vec::new();
    let mut magnitude = Vec::new();
    for q in (3..=cfg.q_max).step_by(2) {
        let mut worst: f64 = 0.0;
        let mut worst_mag: f64 = 0.0;
        for &n in &cfg.n_values {
            for p in (0..=2 * q).step_by(2) {
                let params = GaussSumParams::new(q, p, n)?;
                let direct = gauss_sum_direct(q, params.linear_coefficient())?;
                worst = worst.max((gauss_sum_closed(params)? - direct).norm());
                worst_mag = worst_mag.max((direct.norm() - (q as f64).sqrt()).abs());
            }
        }
        closed.push((q as f64, worst));
        magnitude.push((q as f64, worst_mag));
    }
    let params = to_params(cfg);
    Ok(vec![
        ScalingRun::judged("check_gauss_sums/closed_form", params.clone(), closed, {
            Judgement::value(Criterion::MaxValueAtMost, 1e-10)
        }),
        ScalingRun::judged("check_gauss_sums/magnitude", params, magnitude, {
            Judgement::value(Criterion::MaxValueAtMost, 1e-10)
        }),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KadecCheckConfig {
    pub k_max: u64,
}

impl Default for KadecCheckConfig {
    fn default() -> Self {
        Self { k_max: 1_000_000 }
    }
}

/// Largest gap per decade `(10^{d-1}, 10^d]`, with monotonicity over every `k`.
pub fn check_kadec_gap(cfg: &KadecCheckConfig) -> Result<Vec<ScalingRun>> {
    let mut decades = Vec::new();
    let mut decreasing = true;
    let mut prev = f64::INFINITY;
    let mut lo = 1u64;
    while lo <= cfg.k_max {
        let hi = (lo * 10).min(cfg.k_max + 1);
        let mut worst: f64 = 0.0;
        for k in lo..hi {
            let g = kadec_gap(k)?;
            decreasing &= g < prev;
            prev = g;
            worst = worst.max(g);
        }
        decades.push(((hi - 1) as f64, worst));
        lo = hi;
    }
    let params = with(to_params(cfg), [("strictly_decreasing", json!(decreasing)), ("gap_at_1", json!(kadec_gap(1)?))]);
    Ok(vec![ScalingRun::judged("check_kadec_gap", params, decades, Judgement::value(Criterion::MaxValueAtMost, 0.125))])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RepCountCheckConfig {
    pub s_max: u64,
    pub shift_triples: usize,
    pub seed: u64,
}

impl Default for RepCountCheckConfig {
    fn default() -> Self {
        Self { s_max: 10_000, shift_triples: 1000, seed: 0 }
    }
}

/// Mismatch counts: `r(s)` against pair enumeration and odd-square
/// representations of `4s + 2`, bucketed by `s`, and the shift identity
/// `r^{(m)}_{u,v} = r^{(0)}_{u, v - mu}` on random triples.
pub fn check_rep_counts(cfg: &RepCountCheckConfig) -> Result<Vec<ScalingRun>> {
    let table = rep_count_r_table(cfg.s_max);
    let bucket = (cfg.s_max / 10).max(1);
    let mut mismatches: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    for s in 0..=cfg.s_max {
        let direct = rep_count_r(s);
        let target = 4 * s + 2;
        let mut odd = 0u64;
        let mut a = 1u64;
        while a * a < target {
            let rest = target - a * a;
            let b = rest.isqrt();
            if b * b == rest && b % 2 == 1 {
                odd += 1;
            }
            a += 2;
        }
        let e = mismatches.entry(s / bucket).or_insert((0.0, 0.0));
        e.0 += (direct != table[s as usize] as u64) as u8 as f64;
        e.1 += (direct != odd) as u8 as f64;
    }
    let key = |b: &u64| ((b + 1) * bucket).min(cfg.s_max + 1) as f64;
    let table_series: Vec<(f64, f64)> = mismatches.iter().map(|(b, v)| (key(b), v.0)).collect();
    let odd_series: Vec<(f64, f64)> = mismatches.iter().map(|(b, v)| (key(b), v.1)).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut shift_fail = 0.0;
    let mut nonzero = 0usize;
    for _ in 0..cfg.shift_triples {
        let m = rng.random_range(0..20u64);
        let (j, k, l) = (rng.random_range(0..25u64), rng.random_range(0..25u64), rng.random_range(0..25u64));
        let u = j + k + l;
        let v = j * (j + m) + k * (k + m) + l * (l + m) + rng.random_range(0..3u64);
        let lhs = rep_count_uv(m, u, v);
        let rhs = rep_count_uv(0, u, v - m * u);
        nonzero += (lhs > 0) as usize;
        shift_fail += (lhs != rhs) as u8 as f64;
    }
    let params = to_params(cfg);
    let exact = Judgement::value(Criterion::MaxValueAtMost, 0.0);
    Ok(vec![
        ScalingRun::judged("check_rep_counts/enumeration", params.clone(), table_series, exact),
        ScalingRun::judged("check_rep_counts/odd_squares", params.clone(), odd_series, exact),
        ScalingRun::judged(
            "check_rep_counts/shift",
            with(params, [("nonzero_triples", json!(nonzero))]),
            vec![(cfg.shift_triples as f64, shift_fail)],
            exact,
        ),
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureCheckConfig {
    pub n_values: Vec<usize>,
    pub k_max: usize,
}

impl Default for QuadratureCheckConfig {
    fn default() -> Self {
        Self { n_values: vec![2, 3], k_max: 256 }
    }
}

/// Worst `|∫ Z̃_j Z̃_k dμ - δ_jk|` per `k`, and the reproducing identity
/// `∫ Z_k(x₀, ·)² dμ = κ_n Z_k(x₀, x₀)` in relative error.
pub fn check_quadrature(cfg: &QuadratureCheckConfig) -> Result<Vec<ScalingRun>> {
    let mut runs = Vec::new();
    for &n in &cfg.n_values {
        let quad = SphereQuadrature::for_degree(n, 2 * cfg.k_max)?;
        let basis = ZonalBasis::new(n, cfg.k_max)?;
        let rows: Vec<Vec<f64>> = quad.nodes().iter().map(|&u| basis.values(u)).collect();
        let scale = crate::specfun::sphere_area(n - 1);
        let mut ortho = Vec::new();
        let mut repro = Vec::new();
        for k in 0..=cfg.k_max {
            let mut worst: f64 = 0.0;
            for j in 0..=k {
                let s: f64 = rows.iter().zip(quad.weights()).map(|(r, w)| w * r[j] * r[k]).sum::<f64>() * scale;
                worst = worst.max((s - if j == k { 1.0 } else { 0.0 }).abs());
            }
            ortho.push(((k + 1) as f64, worst));
            let norm_sq = zonal_l2_norm_sq(n, k)?;
            let kappa = crate::specfun::reproducing_constant(n);
            let integral: f64 = quad
                .nodes()
                .iter()
                .zip(quad.weights())
                .map(|(&u, w)| w * zonal_kernel(n, k, u.acos()).map(|z| z * z).unwrap_or(f64::NAN))
                .sum::<f64>()
                * scale;
            repro.push(((k + 1) as f64, ((integral - kappa * zonal_kernel(n, k, 0.0)?) / norm_sq).abs()));
        }
        let params = with(to_params(cfg), [("n", json!(n)), ("nodes", json!(quad.nodes().len()))]);
        runs.push(ScalingRun::judged(
            format!("check_quadrature/orthonormality_n{n}"),
            params.clone(),
            ortho,
            Judgement::value(Criterion::MaxValueAtMost, 1e-10),
        ));
        runs.push(ScalingRun::judged(
            format!("check_quadrature/reproducing_n{n}"),
            params,
            repro,
            Judgement::value(Criterion::MaxValueAtMost, 1e-10),
        ));
    }
    Ok(runs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IsometryCheckConfig {
    pub fields: usize,
    pub seed: u64,
    pub max_band: usize,
}

impl Default for IsometryCheckConfig {
    fn default() -> Self {
        Self { fields: 100, seed: 0, max_band: 64 }
    }
}

/// `|‖e^{itΔ} f‖₂ / ‖f‖₂ - 1|` with both norms from quadrature, for random
/// zonal fields and times; `t = 2π` must act as the identity on symbols.
pub fn check_isometry(cfg: &IsometryCheckConfig) -> Result<Vec<ScalingRun>> {
    if cfg.fields == 0 || cfg.max_band == 0 {
        return Err(Error::Config("need fields > 0 and max_band > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut series = Vec::new();
    for i in 0..cfg.fields {
        let n = rng.random_range(2..=4usize);
        let k = rng.random_range(1..=cfg.max_band);
        let t = rng.random_range(-10.0..10.0);
        let ens = TrialEnsemble { law: CoefficientLaw::Gaussian, trials: 1, seed: rng.random() };
        let f = ZonalField::new(n, ens.coefficients(0, k + 1))?;
        let quad = SphereQuadrature::for_degree(n, 2 * k + n)?;
        let before = space_norm(&f, 2.0, &quad)?.value;
        let after = space_norm(&schrodinger_evolve(&f, t), 2.0, &quad)?.value;
        series.push(((i + 1) as f64, (after / before - 1.0).abs()));
    }
    let periodic = (0..=100_000u64).all(|lam| schrodinger_phase(lam, TAU) == Complex64::new(1.0, 0.0));
    let params = with(to_params(cfg), [("period_identity_exact", json!(periodic))]);
    let mut run =
        ScalingRun::judged("check_isometry", params, series, Judgement::value(Criterion::MaxValueAtMost, 1e-12));
    if !periodic {
        run.verdict = Verdict::Fail;
    }
    Ok(vec![run])
}

// ---------------------------------------------------------------------------
// Registry

/// A named driver with its default configuration.
#[derive(Clone, Copy)]
pub struct ExperimentEntry {
    pub id: &'static str,
    pub claim: &'static str,
    /// Whether the configuration has a `seed` key.
    pub randomized: bool,
    run: fn(&Params) -> Result<Vec<ScalingRun>>,
    defaults: fn() -> Params,
}

impl ExperimentEntry {
    pub fn run(&self, params: &Params) -> Result<Vec<ScalingRun>> {
        (self.run)(params)
    }

    pub fn default_params(&self) -> Params {
        (self.defaults)()
    }
}

impl std::fmt::Debug for ExperimentEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExperimentEntry").field("id", &self.id).field("claim", &self.claim).finish()
    }
}

macro_rules! entry {
    ($id:literal, $claim:literal, $randomized:literal, $cfg:ty, $driver:path) => {
        ExperimentEntry {
            id: $id,
            claim: $claim,
            randomized: $randomized,
            run: |p| $driver(&parse_config::<$cfg>(p)?),
            defaults: || to_params(&<$cfg>::default()),
        }
    };
}

/// Every driver, in suite order.
pub fn registry() -> Vec<ExperimentEntry> {
    vec![
        entry!(
            "check_gauss_sums",
            "closed-form quadratic Gauss sums agree with direct summation; |s| = sqrt(q)",
            false,
            GaussSumCheckConfig,
            check_gauss_sums
        ),
        entry!(
            "check_kadec_gap",
            "sqrt(k(k+1)) stays within 1/8 of k + 1/2 and the gap decreases",
            false,
            KadecCheckConfig,
            check_kadec_gap
        ),
        entry!(
            "check_rep_counts",
            "representation counts: enumeration, odd squares of 4s+2, and the shift identity",
            true,
            RepCountCheckConfig,
            check_rep_counts
        ),
        entry!(
            "check_quadrature",
            "Gauss-Gegenbauer rules integrate zonal products exactly",
            false,
            QuadratureCheckConfig,
            check_quadrature
        ),
        entry!(
            "check_isometry",
            "the Schrodinger flow is an L2 isometry and 2pi-periodic",
            true,
            IsometryCheckConfig,
            check_isometry
        ),
        entry!(
            "exp_zygmund_s1",
            "L4 space-time norm on the circle is bounded by the L2 norm",
            true,
            ZygmundConfig,
            exp_zygmund_s1
        ),
        entry!(
            "exp_pointwise_l4",
            "pointwise L4-in-time bound on S2 with any positive smoothing",
            true,
            PointwiseL4Config,
            exp_pointwise_l4
        ),
        entry!(
            "exp_riesz_gram",
            "half-wave exponentials form a Riesz sequence (Kadec gap 1/8)",
            false,
            RieszGramConfig,
            exp_riesz_gram
        ),
        entry!(
            "exp_wave_packet_scaling",
            "semiclassical wave packets force the necessary regularity",
            false,
            WavePacketConfig,
            exp_wave_packet_scaling
        ),
        entry!(
            "exp_kernel_bound",
            "the smoothed kernel series converges for positive epsilon only",
            false,
            KernelBoundConfig,
            exp_kernel_bound
        ),
        entry!(
            "exp_strichartz_l6",
            "L6 space-time bound for model sums with N^eps loss",
            true,
            StrichartzL6Config,
            exp_strichartz_l6
        ),
        entry!(
            "exp_maximal_s1",
            "L6 maximal bound on the circle with N^(1/3+eps) loss",
            true,
            MaximalS1Config,
            exp_maximal_s1
        ),
        entry!(
            "exp_maximal_blowup",
            "zonal maximal function reaches N^(3/4) on a set of fixed measure",
            false,
            BlowupConfig,
            exp_maximal_blowup
        ),
        entry!(
            "exp_szego_fit",
            "modulated-cosine asymptotic of zonal harmonics with O(1/k) remainder",
            false,
            SzegoFitConfig,
            exp_szego_fit
        ),
    ]
}

pub fn find(id: &str) -> Result<ExperimentEntry> {
    registry().into_iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownExperiment(id.into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(slope: f64) -> Vec<(f64, f64)> {
        (4..10).map(|i| (2f64.powi(i), 3.0 * 2f64.powi(i).powf(slope))).collect()
    }

    #[test]
    fn slope_criteria() {
        let (fit, v) = Judgement::slope_within(0.5, 0.05).judge(&line(0.52));
        assert!((fit.unwrap().slope - 0.52).abs() < 1e-12);
        assert_eq!(v, Verdict::Pass);
        assert_eq!(Judgement::slope_within(0.5, 0.05).judge(&line(0.6)).1, Verdict::Fail);
        assert_eq!(Judgement::slope_at_most(0.0, 0.1).judge(&line(0.05)).1, Verdict::Pass);
        assert_eq!(Judgement::slope_at_least(0.25, 0.1).judge(&line(0.1)).1, Verdict::Fail);
        assert_eq!(Judgement::slope_at_least(0.25, 0.1).judge(&line(0.2)).1, Verdict::Pass);
    }

    #[test]
    fn gates() {
        assert_eq!(Judgement::slope_within(0.5, 0.1).judge(&line(0.5)[..4]).1, Verdict::Inconclusive);
        let noisy: Vec<(f64, f64)> =
            line(0.5).into_iter().enumerate().map(|(i, (x, y))| (x, y * if i % 2 == 0 { 3.0 } else { 0.3 })).collect();
        assert_eq!(Judgement::slope_within(0.5, 0.1).judge(&noisy).1, Verdict::Inconclusive);
        // One-sided bounds are judged on the fitted slope alone.
        assert_ne!(Judgement::slope_at_least(0.5, 0.1).judge(&noisy).1, Verdict::Inconclusive);
        let mut inf = line(0.0);
        inf[2].1 = f64::INFINITY;
        assert_eq!(Judgement::slope_at_most(0.0, 0.1).judge(&inf).1, Verdict::Inconclusive);
    }

    #[test]
    fn value_criteria() {
        let s = vec![(1.0, 0.3), (2.0, 0.4), (3.0, 0.5)];
        assert_eq!(Judgement::value(Criterion::MinValueAtLeast, 0.25).judge(&s).1, Verdict::Pass);
        assert_eq!(Judgement::value(Criterion::MaxValueAtMost, 0.45).judge(&s).1, Verdict::Fail);
        assert_eq!(Judgement::value(Criterion::LastValueBelow, 0.6).judge(&s).1, Verdict::Pass);
        assert_eq!(Judgement::value(Criterion::LastValueAtLeast, 0.6).judge(&s).1, Verdict::Fail);
        assert_eq!(Judgement::value(Criterion::SpreadAtMost, 2.0).judge(&s).1, Verdict::Pass);
        assert_eq!(Judgement::value(Criterion::SpreadAtMost, 1.5).judge(&s).1, Verdict::Fail);
    }

    #[test]
    fn combine_verdicts() {
        use Verdict::*;
        assert_eq!(Verdict::combine([Pass, Pass]), Pass);
        assert_eq!(Verdict::combine([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::combine([Inconclusive, Fail, Pass]), Fail);
        assert_eq!(Verdict::combine([]), Pass);
    }

    #[test]
    fn ensemble_is_reproducible_and_stream_separated() {
        let e = TrialEnsemble { law: CoefficientLaw::UnitPhase, trials: 4, seed: 7 };
        assert_eq!(e.coefficients(2, 16), e.coefficients(2, 16));
        assert_ne!(e.coefficients(1, 16), e.coefficients(2, 16));
        assert!(e.coefficients(0, 64).iter().all(|a| (a.norm() - 1.0).abs() < 1e-15));
        let g = TrialEnsemble { law: CoefficientLaw::Gaussian, ..e };
        let mean_sq = g.coefficients(0, 20000).iter().map(|a| a.norm_sqr()).sum::<f64>() / 20000.0;
        assert!((mean_sq - 1.0).abs() < 0.05);
    }

    #[test]
    fn run_round_trips_and_rechecks() {
        let run = ScalingRun::judged("t", Params::new(), line(0.3), Judgement::slope_at_most(0.25, 0.1));
        let text = serde_json::to_string(&run).unwrap();
        let back: ScalingRun = serde_json::from_str(&text).unwrap();
        assert_eq!(back, run);
        assert_eq!(back.recheck().unwrap(), run.verdict);
    }

    #[test]
    fn config_rejects_unknown_keys() {
        let mut p = Params::new();
        p.insert("k_values".into(), json!([4, 8]));
        let cfg: ZygmundConfig = parse_config(&p).unwrap();
        assert_eq!(cfg.k_values, vec![4, 8]);
        assert_eq!(cfg.trials, 64);
        p.insert("bogus".into(), json!(1));
        assert!(matches!(parse_config::<ZygmundConfig>(&p), Err(Error::Config(_))));
    }

    #[test]
    fn registry_ids_are_unique() {
        let reg = registry();
        let mut ids: Vec<_> = reg.iter().map(|e| e.id).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), reg.len());
        assert!(find("exp_riesz_gram").is_ok());
        assert!(matches!(find("nope"), Err(Error::UnknownExperiment(_))));
        for e in &reg {
            assert_eq!(e.randomized, e.default_params().contains_key("seed"), "{}", e.id);
        }
    }

    #[test]
    fn riesz_bound_values() {
        let (a, b) = riesz_bounds(0.125);
        assert!((a - (1.0 - (PI / 4.0).sin())).abs() < 1e-15);
        assert!(a > 0.25 && b < 2.2);
        assert_eq!(riesz_bounds(0.0), (1.0, 1.0));
    }

    #[test]
    fn blowup_interval_count_at_64() {
        // q ∈ {9, 11, 13, 15}; admissible even p: {2}, {2, 4}, {2, 4}, {2, 4, 6}.
        let ivs = blowup_intervals(64, 0.3);
        assert_eq!(ivs.len(), 8);
        let (measure, ok) = interval_union(&ivs);
        assert!(ok);
        assert!((measure - 8.0 * PI / (16.0 * 64.0)).abs() < 1e-15);
    }
}

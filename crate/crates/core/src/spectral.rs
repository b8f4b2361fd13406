//! Band-limited fields and diagonal spectral operators.
//!
//! A [`ZonalField`] on `S^n` stores coefficients in the orthonormal zonal
//! basis, so its `L²` norm is the `ℓ²` norm of the coefficients. A
//! [`CircleField`] stores exponential coefficients on a contiguous range of
//! signed frequencies, and carries the dimension parameter `n` that fixes the
//! eigenvalue `|k|(|k|+n-1)` used by the Schrödinger flow.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{sphere_area, zonal_l2_norm_sq, ZonalBasis};

/// Laplace eigenvalue `k(k+n-1)` of the degree-`k` eigenspace on `S^n`.
pub fn sphere_eigenvalue(n: usize, k: u64) -> u64 {
    k * (k + n as u64 - 1)
}

/// `e^{-iλt}` with the integer part of `t / 2π` removed before scaling, so
/// `t = 2π` yields exactly one.
pub fn schrodinger_phase(lambda: u64, t: f64) -> Complex64 {
    let turns = t / TAU;
    let rem = turns - turns.floor();
    let x = lambda as f64 * rem;
    let x = x - x.floor();
    if x == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, -TAU * x)
}

/// `e^{-2πi λ p / q}` with the residue `λ p mod q` formed in integers.
pub fn rational_phase(lambda: u64, p: i64, q: u64) -> Complex64 {
    let q = q as i128;
    let r = (lambda as i128 * p as i128).rem_euclid(q);
    if r == 0 {
        return Complex64::new(1.0, 0.0);
    }
    Complex64::from_polar(1.0, -TAU * r as f64 / q as f64)
}

/// Common interface of the two field representations.
pub trait Field: Clone + Send + Sync {
    /// Signed degrees `(k, a_k)` of every stored coefficient, in storage order.
    fn modes(&self) -> Vec<(i64, Complex64)>;

    /// Schrödinger eigenvalue attached to degree `k`.
    fn eigenvalue(&self, k: i64) -> u64;

    /// Applies `a_k ↦ g(k, a_k)` to every stored coefficient.
    fn try_map_modes<G>(&self, g: G) -> Result<Self>
    where
        G: FnMut(i64, Complex64) -> Result<Complex64>;

    fn map_modes<G>(&self, mut g: G) -> Self
    where
        G: FnMut(i64, Complex64) -> Complex64,
    {
        self.try_map_modes(|k, a| Ok(g(k, a))).expect("infallible map")
    }

    /// `ℓ²` norm of the coefficient vector.
    fn coefficient_norm(&self) -> f64 {
        self.modes().iter().map(|(_, a)| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `L²` norm on the underlying space.
    fn l2_norm(&self) -> f64;
}

/// Zonal band-limited function `Σ_{k ≤ K} a_k Z̃_k` on `S^n`, `n ≥ 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZonalField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl ZonalField {
    pub fn new(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        if n < 2 {
            return domain(format!("zonal fields live on S^n with n >= 2, got n = {n}"));
        }
        if coeffs.is_empty() {
            return domain("a zonal field needs at least the degree-0 coefficient");
        }
        Ok(Self { n, coeffs })
    }

    pub fn zeros(n: usize, band_limit: usize) -> Result<Self> {
        Self::new(n, vec![Complex64::new(0.0, 0.0); band_limit + 1])
    }

    /// `a Z̃_k` inside a field of band limit `band_limit`.
    pub fn single_mode(n: usize, band_limit: usize, k: usize, a: Complex64) -> Result<Self> {
        let mut f = Self::zeros(n, band_limit)?;
        if k > band_limit {
            return Err(Error::Index { degree: k as i64, band_limit: band_limit as i64 });
        }
        f.coeffs[k] = a;
        Ok(f)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Band limit `K`.
    pub fn band_limit(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Degrees with a nonzero coefficient.
    pub fn active_degrees(&self) -> Vec<usize> {
        (0..self.coeffs.len()).filter(|&k| self.coeffs[k] != Complex64::new(0.0, 0.0)).collect()
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        let basis = ZonalBasis::new(self.n, self.band_limit()).expect("n checked at construction");
        self.evaluate_with(&basis, theta)
    }

    /// Evaluation with a prebuilt basis of degree at least `K`.
    pub fn evaluate_with(&self, basis: &ZonalBasis, theta: f64) -> Complex64 {
        self.evaluate_at_u(basis, theta.cos())
    }

    /// Evaluation at `u = cos θ`.
    pub fn evaluate_at_u(&self, basis: &ZonalBasis, u: f64) -> Complex64 {
        let values = basis.values(u);
        self.coeffs.iter().zip(&values).map(|(a, z)| a * z).sum()
    }

    /// Evaluation on a list of colatitudes; output order follows the input.
    pub fn evaluate_many(&self, thetas: &[f64]) -> Vec<Complex64> {
        let basis = ZonalBasis::new(self.n, self.band_limit()).expect("n checked at construction");
        thetas.par_iter().map(|&theta| self.evaluate_with(&basis, theta)).collect()
    }
}

impl Field for ZonalField {
    fn modes(&self) -> Vec<(i64, Complex64)> {
        self.coeffs.iter().enumerate().map(|(k, &a)| (k as i64, a)).collect()
    }

    fn eigenvalue(&self, k: i64) -> u64 {
        sphere_eigenvalue(self.n, k.unsigned_abs())
    }

    fn try_map_modes<G>(&self, mut g: G) -> Result<Self>
    where
        G: FnMut(i64, Complex64) -> Result<Complex64>,
    {
        let coeffs = self.coeffs.iter().enumerate().map(|(k, &a)| g(k as i64, a)).collect::<Result<_>>()?;
        Ok(Self { n: self.n, coeffs })
    }

    fn l2_norm(&self) -> f64 {
        self.coefficient_norm()
    }
}

/// Trigonometric polynomial `Σ_{k=k_min}^{k_max} a_k e^{ikθ}` on the circle.
///
/// The Schrödinger eigenvalue of mode `k` is `|k|(|k|+n-1)`: `n = 1` is the
/// flow on `S^1`, larger `n` gives the one-sided model sums of higher spheres.
#[derive(Debug, Clone, PartialEq)]
pub struct CircleField {
    n: usize,
    k_min: i64,
    coeffs: Vec<Complex64>,
}

impl CircleField {
    /// Coefficients for `k = k_min, k_min + 1, …`.
    pub fn new(n: usize, k_min: i64, coeffs: Vec<Complex64>) -> Result<Self> {
        if n < 1 {
            return domain("the eigenvalue parameter n must be at least 1");
        }
        if coeffs.is_empty() {
            return domain("a circle field needs at least one coefficient");
        }
        Ok(Self { n, k_min, coeffs })
    }

    /// Two-sided field on `[-K, K]` with eigenvalue `k²`.
    pub fn two_sided(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len().is_multiple_of(2) {
            return domain("two-sided coefficient vectors have odd length 2K+1");
        }
        let k = (coeffs.len() / 2) as i64;
        Self::new(1, -k, coeffs)
    }

    /// One-sided model sum `Σ_{k<N} a_k e^{ikθ}` with eigenvalue `k(k+n-1)`.
    pub fn one_sided(n: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        Self::new(n, 0, coeffs)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_min(&self) -> i64 {
        self.k_min
    }

    pub fn k_max(&self) -> i64 {
        self.k_min + self.coeffs.len() as i64 - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Option<Complex64> {
        if k < self.k_min || k > self.k_max() {
            return None;
        }
        Some(self.coeffs[(k - self.k_min) as usize])
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        self.modes().iter().map(|&(k, a)| a * Complex64::from_polar(1.0, k as f64 * theta)).sum()
    }

    pub fn evaluate_many(&self, thetas: &[f64]) -> Vec<Complex64> {
        thetas.par_iter().map(|&theta| self.evaluate(theta)).collect()
    }

    /// Values at `θ_j = 2πj/m` by folding the coefficients modulo `m` and one
    /// inverse FFT; exact for every `m ≥ 1`.
    pub fn evaluate_uniform(&self, m: usize) -> Vec<Complex64> {
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        for (k, a) in self.modes() {
            buf[k.rem_euclid(m as i64) as usize] += a;
        }
        FftPlanner::new().plan_fft_inverse(m).process(&mut buf);
        buf
    }
}

impl Field for CircleField {
    fn modes(&self) -> Vec<(i64, Complex64)> {
        self.coeffs.iter().enumerate().map(|(i, &a)| (self.k_min + i as i64, a)).collect()
    }

    fn eigenvalue(&self, k: i64) -> u64 {
        sphere_eigenvalue(self.n, k.unsigned_abs())
    }

    fn try_map_modes<G>(&self, mut g: G) -> Result<Self>
    where
        G: FnMut(i64, Complex64) -> Result<Complex64>,
    {
        let coeffs =
            self.coeffs.iter().enumerate().map(|(i, &a)| g(self.k_min + i as i64, a)).collect::<Result<_>>()?;
        Ok(Self { n: self.n, k_min: self.k_min, coeffs })
    }

    /// `‖f‖²_{L²(T)} = 2π Σ |a_k|²` with unnormalized `dθ`.
    fn l2_norm(&self) -> f64 {
        (TAU).sqrt() * self.coefficient_norm()
    }
}

/// Keeps only the degree-`k` component.
pub fn project(f: &ZonalField, k: usize) -> Result<ZonalField> {
    if k > f.band_limit() {
        return Err(Error::Index { degree: k as i64, band_limit: f.band_limit() as i64 });
    }
    Ok(f.map_modes(|j, a| if j as usize == k { a } else { Complex64::new(0.0, 0.0) }))
}

/// `a_k ↦ e^{-itλ_k} a_k`.
pub fn schrodinger_evolve<F: Field>(f: &F, t: f64) -> F {
    let probe = f.clone();
    f.map_modes(|k, a| a * schrodinger_phase(probe.eigenvalue(k), t))
}

/// Evolution to the rational time `t = 2πp/q` with integer phase reduction.
pub fn schrodinger_evolve_rational<F: Field>(f: &F, p: i64, q: u64) -> Result<F> {
    if q == 0 {
        return domain("rational time needs a positive denominator");
    }
    let probe = f.clone();
    Ok(f.map_modes(|k, a| a * rational_phase(probe.eigenvalue(k), p, q)))
}

/// Half-wave frequency `√(k(k+1))` on `S²`.
pub fn half_wave_frequency(k: u64) -> f64 {
    ((k * (k + 1)) as f64).sqrt()
}

/// `a_k ↦ e^{it√(k(k+1))} a_k` on `S²`.
pub fn half_wave_evolve(f: &ZonalField, t: f64) -> Result<ZonalField> {
    if f.n() != 2 {
        return domain(format!("the half-wave flow is implemented on S^2 only, got n = {}", f.n()));
    }
    Ok(f.map_modes(|k, a| a * Complex64::from_polar(1.0, t * half_wave_frequency(k as u64))))
}

type Symbol = dyn Fn(i64) -> Option<Complex64> + Send + Sync;

/// Spectral symbol `k ↦ m(k)`; `None` marks an undefined degree.
#[derive(Clone)]
pub struct Multiplier {
    label: String,
    symbol: Arc<Symbol>,
}

impl fmt::Debug for Multiplier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Multiplier").field("label", &self.label).finish()
    }
}

impl Multiplier {
    pub fn new<S>(label: impl Into<String>, symbol: S) -> Self
    where
        S: Fn(i64) -> Option<Complex64> + Send + Sync + 'static,
    {
        Self { label: label.into(), symbol: Arc::new(symbol) }
    }

    pub fn identity() -> Self {
        Self::new("identity", |_| Some(Complex64::new(1.0, 0.0)))
    }

    /// Symbol defined only on the listed degrees.
    pub fn table(label: impl Into<String>, values: BTreeMap<i64, Complex64>) -> Self {
        Self::new(label, move |k| values.get(&k).copied())
    }

    /// Schrödinger propagator symbol `e^{-itk(k+n-1)}`.
    pub fn schrodinger(n: usize, t: f64) -> Self {
        Self::new(format!("schrodinger(n={n}, t={t})"), move |k| {
            Some(schrodinger_phase(sphere_eigenvalue(n, k.unsigned_abs()), t))
        })
    }

    /// `φ(h √(k(k+n-1)))`.
    pub fn semiclassical_cutoff(n: usize, h: f64, bump: Bump) -> Self {
        Self::new(format!("cutoff(n={n}, h={h}, {})", bump.profile_id()), move |k| {
            let lam = sphere_eigenvalue(n, k.unsigned_abs()) as f64;
            Some(Complex64::new(bump.eval(h * lam.sqrt()), 0.0))
        })
    }

    /// Pointwise product `m₁ m₂`, defined where both factors are.
    pub fn product(&self, other: &Multiplier) -> Self {
        let (a, b) = (self.symbol.clone(), other.symbol.clone());
        Self { label: format!("{} * {}", self.label, other.label), symbol: Arc::new(move |k| Some(a(k)? * b(k)?)) }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, k: i64) -> Result<Complex64> {
        (self.symbol)(k).ok_or_else(|| Error::MissingSymbol { label: self.label.clone(), degree: k })
    }
}

/// Bessel-potential weight `(1 + k(k+n-1))^{s/2}`.
pub fn sobolev_weight(n: usize, s: f64) -> Multiplier {
    Multiplier::new(format!("sobolev(n={n}, s={s})"), move |k| {
        let lam = sphere_eigenvalue(n, k.unsigned_abs()) as f64;
        Some(Complex64::new((1.0 + lam).powf(s / 2.0), 0.0))
    })
}

/// `a_k ↦ m(k) a_k`; fails on the first degree where `m` is undefined.
pub fn apply_multiplier<F: Field>(f: &F, m: &Multiplier) -> Result<F> {
    f.try_map_modes(|k, a| Ok(m.eval(k)? * a))
}

/// Smooth nonnegative bump `exp(1 - 1/(1-s²))`, `s = (2r - lo - hi)/(hi - lo)`,
/// supported in `(lo, hi)` with peak value 1 at the midpoint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bump {
    pub lo: f64,
    pub hi: f64,
}

impl Default for Bump {
    fn default() -> Self {
        Self { lo: 0.5, hi: 1.0 }
    }
}

impl Bump {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return domain(format!("bump support must satisfy 0 < lo < hi, got ({lo}, {hi})"));
        }
        Ok(Self { lo, hi })
    }

    pub fn profile_id(&self) -> String {
        format!("exp-bump[{}, {}]", self.lo, self.hi)
    }

    pub fn eval(&self, r: f64) -> f64 {
        let s = (2.0 * r - self.lo - self.hi) / (self.hi - self.lo);
        if s.abs() >= 1.0 {
            return 0.0;
        }
        (1.0 - 1.0 / (1.0 - s * s)).exp()
    }
}

/// Semiclassical wave packet at the pole, pre-evolved backwards by `h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketShape {
    pub n: usize,
    pub h: f64,
    pub alpha: f64,
    pub bump: Bump,
}

impl PacketShape {
    pub fn new(n: usize, h: f64, alpha: f64) -> Result<Self> {
        if n < 2 {
            return domain("wave packets are built on S^n with n >= 2");
        }
        if !(h > 0.0 && h <= 1.0) {
            return domain(format!("semiclassical parameter must lie in (0, 1], got {h}"));
        }
        Ok(Self { n, h, alpha, bump: Bump::default() })
    }

    /// Degrees `k` with `h √(k(k+n-1))` inside the bump support.
    pub fn active_degrees(&self) -> Vec<usize> {
        let upper = (self.bump.hi / self.h).ceil() as usize + 1;
        (1..=upper)
            .filter(|&k| self.bump.eval(self.h * (sphere_eigenvalue(self.n, k as u64) as f64).sqrt()) > 0.0)
            .collect()
    }
}

/// Coefficients `(1+λ_k)^{-α/2} e^{ihλ_k} φ(h√λ_k) ‖Z_k‖₂` of the kernel
/// `(1-Δ)^{-α/2} e^{-ihΔ} φ(h√-Δ)(x₀, ·)` in the orthonormal zonal basis.
pub fn wave_packet(shape: &PacketShape) -> Result<ZonalField> {
    let active = shape.active_degrees();
    let Some(&top) = active.last() else {
        return Err(Error::EmptySupport { h: shape.h });
    };
    let mut coeffs = vec![Complex64::new(0.0, 0.0); top + 1];
    for k in active {
        let lam = sphere_eigenvalue(shape.n, k as u64);
        let amp = (1.0 + lam as f64).powf(-shape.alpha / 2.0)
            * shape.bump.eval(shape.h * (lam as f64).sqrt())
            * zonal_l2_norm_sq(shape.n, k)?.sqrt();
        coeffs[k] = amp * schrodinger_phase(lam, -shape.h);
    }
    ZonalField::new(shape.n, coeffs)
}

/// Value of the constant mode `Z̃_0 = |S^n|^{-1/2}`.
pub fn constant_mode_value(n: usize) -> f64 {
    sphere_area(n).sqrt().recip()
}

/// Colatitudes `θ_j = π (j + 1/2) / m`.
pub fn midpoint_colatitudes(m: usize) -> Vec<f64> {
    (0..m).map(|j| PI * (j as f64 + 0.5) / m as f64).collect()
}

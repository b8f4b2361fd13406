//! Exactness-certified integration on `S^n` and over the time circle.
//!
//! Spatial integrals of zonal functions reduce to `∫_{-1}^{1} F(u) (1-u²)^{(n-2)/2} du`
//! and are done with Gauss–Gegenbauer rules. Time integrals of `|u(t)|^p` for
//! even `p` are trigonometric polynomials, integrated exactly by the
//! equispaced trapezoid rule, which is one FFT per spatial sample.

use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::specfun::{sphere_area, sphere_lambda, ZonalBasis};
use crate::spectral::{half_wave_frequency, CircleField, Field, ZonalField};

/// Relative tolerance of the moment self-test run at construction.
pub const EXACTNESS_TOL: f64 = 1e-12;

/// Gauss rule for the weight `(1-u²)^{(n-2)/2}` on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereQuadrature {
    n: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness_degree: usize,
}

impl SphereQuadrature {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    /// `Σ_j w_j F(u_j)`.
    pub fn integrate_weight<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&u, &w)| w * g(u)).sum()
    }

    /// `∫_{S^n} F(cos θ) dμ = |S^{n-1}| Σ_j w_j F(u_j)`.
    pub fn integrate_sphere<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        sphere_area(self.n - 1) * self.integrate_weight(g)
    }

    /// Smallest rule integrating polynomials of degree `degree` exactly.
    pub fn for_degree(n: usize, degree: usize) -> Result<Self> {
        build_sphere_quadrature(n, degree / 2 + 1)
    }
}

/// `∫_{-1}^{1} (1-u²)^{λ-1/2} du`, stepped in `λ` by one from `1/2` or `1`.
fn weight_mass(lambda: f64) -> f64 {
    let (mut l, mut mass) = if (lambda * 2.0).round() as i64 % 2 == 1 { (0.5, 2.0) } else { (1.0, PI / 2.0) };
    while l + 0.5 < lambda {
        mass *= (l + 0.5) / (l + 1.0);
        l += 1.0;
    }
    mass
}

/// Even moments `∫ u^{2i} (1-u²)^{λ-1/2} du`, `i = 0..=imax`.
fn even_moments(lambda: f64, imax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(imax + 1);
    let mut mu = weight_mass(lambda);
    for i in 0..=imax {
        out.push(mu);
        mu *= (i as f64 + 0.5) / (i as f64 + lambda + 1.0);
    }
    out
}

/// Off-diagonal Jacobi entry `b_j` of the orthonormal Gegenbauer recurrence.
fn jacobi_offdiag(lambda: f64, j: usize) -> f64 {
    let j = j as f64;
    (j * (j + 2.0 * lambda - 1.0) / (4.0 * (j + lambda) * (j + lambda - 1.0))).sqrt()
}

/// Orthonormal `p_m(u)` and `p_m'(u)`, plus `Σ_{i<m} p_i(u)²`.
fn orthonormal_eval(b: &[f64], p0: f64, m: usize, u: f64) -> (f64, f64, f64) {
    let (mut p_prev, mut p) = (0.0, p0);
    let (mut d_prev, mut d) = (0.0, 0.0);
    let mut sumsq = 0.0;
    for j in 0..m {
        sumsq += p * p;
        let p_next = (u * p - b[j] * p_prev) / b[j + 1];
        let d_next = (p + u * d - b[j] * d_prev) / b[j + 1];
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d, sumsq)
}

fn newton_nodes(lambda: f64, b: &[f64], p0: f64, m: usize) -> Option<Vec<f64>> {
    let mut nodes = Vec::with_capacity(m);
    for j in 1..=m.div_ceil(2) {
        let theta = (j as f64 + lambda / 2.0 - 0.5) * PI / (m as f64 + lambda);
        let mut u = theta.cos();
        if m % 2 == 1 && j == m.div_ceil(2) {
            u = 0.0;
        } else {
            let mut converged = false;
            for _ in 0..100 {
                let (p, d, _) = orthonormal_eval(b, p0, m, u);
                let step = p / d;
                u -= step;
                if step.abs() <= 1e-16 * u.abs().max(1e-3) {
                    converged = true;
                    break;
                }
            }
            if !converged || !u.is_finite() {
                return None;
            }
            let (p, d, _) = orthonormal_eval(b, p0, m, u);
            u -= p / d;
        }
        nodes.push(u);
    }
    let half = nodes.clone();
    for &u in half.iter().rev().skip(m % 2) {
        nodes.push(-u);
    }
    let ok = nodes.windows(2).all(|w| w[0] > w[1]) && nodes.iter().all(|u| u.abs() < 1.0);
    ok.then_some(nodes)
}

fn golub_welsch_nodes(b: &[f64], m: usize) -> Vec<f64> {
    let mut jm = DMatrix::<f64>::zeros(m, m);
    for j in 1..m {
        jm[(j, j - 1)] = b[j];
        jm[(j - 1, j)] = b[j];
    }
    let mut nodes: Vec<f64> = jm.symmetric_eigenvalues().iter().copied().collect();
    nodes.sort_by(|a, b| b.partial_cmp(a).expect("finite eigenvalues"));
    let half: Vec<f64> = (0..m / 2).map(|i| 0.5 * (nodes[i] - nodes[m - 1 - i])).collect();
    let mut sym = half.clone();
    if m % 2 == 1 {
        sym.push(0.0);
    }
    sym.extend(half.iter().rev().map(|u| -u));
    sym
}

/// Unevaluated sum `hi + lo` with `|lo| ≤ ulp(hi)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };

    fn from(x: f64) -> Self {
        Dd { hi: x, lo: 0.0 }
    }

    fn quick(a: f64, b: f64) -> Self {
        let s = a + b;
        Dd { hi: s, lo: b - (s - a) }
    }

    fn add(self, o: Dd) -> Dd {
        let s = self.hi + o.hi;
        let bb = s - self.hi;
        let e = (self.hi - (s - bb)) + (o.hi - bb);
        Dd::quick(s, e + self.lo + o.lo)
    }

    fn neg(self) -> Dd {
        Dd { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Dd) -> Dd {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Dd::quick(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div(self, o: Dd) -> Dd {
        let q1 = self.hi / o.hi;
        let r = self.add(o.mul(Dd::from(q1)).neg());
        let q2 = r.hi / o.hi;
        let r = r.add(o.mul(Dd::from(q2)).neg());
        let q3 = r.hi / o.hi;
        Dd::quick(q1, q2).add(Dd::from(q3))
    }

    fn sqrt(self) -> Dd {
        let s = self.hi.sqrt();
        let r = self.add(Dd::from(s).mul(Dd::from(s)).neg());
        Dd::quick(s, r.hi / (2.0 * s))
    }
}

/// Orthonormal Gegenbauer recurrence carried in double-double precision.
struct DdRecurrence {
    m: usize,
    p0: Dd,
    b: Vec<Dd>,
    inv_b: Vec<Dd>,
}

impl DdRecurrence {
    fn new(lambda: f64, m: usize) -> Self {
        let two_l = Dd::from(2.0 * lambda);
        let l = Dd::from(lambda);
        let b: Vec<Dd> = (0..=m)
            .map(|j| {
                if j == 0 {
                    return Dd::ZERO;
                }
                let jd = Dd::from(j as f64);
                let num = jd.mul(jd.add(two_l).add(Dd::from(-1.0)));
                let den = Dd::from(4.0).mul(jd.add(l)).mul(jd.add(l).add(Dd::from(-1.0)));
                num.div(den).sqrt()
            })
            .collect();
        let inv_b = b.iter().map(|&x| if x.hi == 0.0 { Dd::ZERO } else { Dd::from(1.0).div(x) }).collect();
        Self { m, p0: Dd::from(1.0).div(dd_weight_mass(lambda).sqrt()), b, inv_b }
    }

    /// `(p_m(u), p_m'(u), Σ_{i<m} p_i(u)²)`.
    fn eval(&self, u: Dd) -> (Dd, Dd, Dd) {
        let (mut p_prev, mut p) = (Dd::ZERO, self.p0);
        let (mut d_prev, mut d) = (Dd::ZERO, Dd::ZERO);
        let mut sumsq = Dd::ZERO;
        for j in 0..self.m {
            sumsq = sumsq.add(p.mul(p));
            let p_next = u.mul(p).add(self.b[j].mul(p_prev).neg()).mul(self.inv_b[j + 1]);
            let d_next = p.add(u.mul(d)).add(self.b[j].mul(d_prev).neg()).mul(self.inv_b[j + 1]);
            p_prev = p;
            p = p_next;
            d_prev = d;
            d = d_next;
        }
        (p, d, sumsq)
    }

    /// Polished node and its Christoffel weight.
    fn refine(&self, u: f64) -> (f64, f64) {
        let mut x = Dd::from(u);
        if u != 0.0 {
            for _ in 0..2 {
                let (p, d, _) = self.eval(x);
                x = x.add(p.div(d).neg());
            }
        }
        let (_, _, sumsq) = self.eval(x);
        (x.hi, Dd::from(1.0).div(sumsq).hi)
    }
}

/// [`weight_mass`] in double-double precision.
fn dd_weight_mass(lambda: f64) -> Dd {
    const PI_DD: Dd = Dd { hi: std::f64::consts::PI, lo: 1.2246467991473532e-16 };
    let (mut l, mut mass) =
        if (lambda * 2.0).round() as i64 % 2 == 1 { (0.5, Dd::from(2.0)) } else { (1.0, PI_DD.mul(Dd::from(0.5))) };
    while l + 0.5 < lambda {
        mass = mass.mul(Dd::from(l + 0.5)).div(Dd::from(l + 1.0));
        l += 1.0;
    }
    mass
}

/// Gauss–Gegenbauer rule with `m` nodes for the weight `(1-u²)^{(n-2)/2}`.
///
/// Nodes come from Newton iteration on the orthonormal recurrence started at
/// the asymptotic zero locations, with a tridiagonal eigensolve as fallback,
/// and are then polished in double-double arithmetic; weights are Christoffel
/// numbers `1 / Σ_{i<m} p_i(u_j)²` at the polished node. All moments up to
/// degree `2m-1` are checked before the rule is returned.
pub fn build_sphere_quadrature(n: usize, m: usize) -> Result<SphereQuadrature> {
    if n < 2 {
        return domain(format!("sphere quadrature needs n >= 2, got {n}"));
    }
    if m == 0 {
        return domain("a quadrature rule needs at least one node");
    }
    let lambda = sphere_lambda(n);
    let b: Vec<f64> = (0..=m).map(|j| if j == 0 { 0.0 } else { jacobi_offdiag(lambda, j) }).collect();
    let p0 = weight_mass(lambda).sqrt().recip();
    let rough = newton_nodes(lambda, &b, p0, m).unwrap_or_else(|| golub_welsch_nodes(&b, m));
    let recurrence = DdRecurrence::new(lambda, m);
    let half: Vec<(f64, f64)> = rough[..m / 2].iter().map(|&u| recurrence.refine(u)).collect();
    let mut nodes: Vec<f64> = half.iter().map(|h| h.0).collect();
    let mut weights: Vec<f64> = half.iter().map(|h| h.1).collect();
    if m % 2 == 1 {
        let (u, w) = recurrence.refine(0.0);
        nodes.push(u);
        weights.push(w);
    }
    nodes.extend(half.iter().rev().map(|h| -h.0));
    weights.extend(half.iter().rev().map(|h| h.1));
    let quad = SphereQuadrature { n, nodes, weights, exactness_degree: 2 * m - 1 };
    quad.self_test()?;
    Ok(quad)
}

impl SphereQuadrature {
    /// Verifies all monomial moments up to the exactness degree.
    pub fn self_test(&self) -> Result<()> {
        let d = self.exactness_degree;
        let moments = even_moments(sphere_lambda(self.n), d / 2);
        let mut powers: Vec<f64> = self.weights.clone();
        for deg in 0..=d {
            let sum = compensated_sum(&powers);
            let abs: f64 = powers.iter().map(|v| v.abs()).sum();
            let (err, scale) = if deg % 2 == 0 {
                let mu = moments[deg / 2];
                ((sum - mu).abs(), mu)
            } else {
                (sum.abs(), abs)
            };
            if err > EXACTNESS_TOL * scale {
                return Err(Error::Quadrature(format!(
                    "moment of degree {deg} off by {err:e} (scale {scale:e}) for n = {}, m = {}",
                    self.n,
                    self.nodes.len()
                )));
            }
            for (p, u) in powers.iter_mut().zip(&self.nodes) {
                *p *= u;
            }
        }
        Ok(())
    }
}

/// Neumaier-compensated sum.
fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Result of a norm computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    pub certified: bool,
    pub error_bound: f64,
}

impl NormReport {
    pub fn certified(value: f64) -> Self {
        Self { value, certified: true, error_bound: 0.0 }
    }

    pub fn estimated(value: f64, error_bound: f64) -> Self {
        Self { value, certified: false, error_bound: error_bound.abs() }
    }
}

/// Smallest `2^a 3^b 5^c ≥ min`.
pub fn smooth_size(min: usize) -> usize {
    let mut m = min.max(1);
    loop {
        let mut r = m;
        for f in [2, 3, 5] {
            while r.is_multiple_of(f) {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Integer frequencies rewritten as `base + step ν_k`, `0 ≤ ν_k ≤ span`.
///
/// `|u(t)|` then has period `2π / step`, and sampling one period suffices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyLayout {
    pub base: u64,
    pub step: u64,
    pub reduced: Vec<u64>,
}

impl FrequencyLayout {
    pub fn new(freqs: &[u64]) -> Self {
        let base = freqs.iter().copied().min().unwrap_or(0);
        let step = freqs.iter().fold(0u64, |g, &f| gcd(g, f - base)).max(1);
        let reduced = freqs.iter().map(|&f| (f - base) / step).collect();
        Self { base, step, reduced }
    }

    /// Largest reduced frequency.
    pub fn span(&self) -> u64 {
        self.reduced.iter().copied().max().unwrap_or(0)
    }

    /// Bernstein degree of the centered sum, `span / 2`.
    pub fn half_span(&self) -> f64 {
        self.span() as f64 / 2.0
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `M` equispaced samples `s_j = 2πj/M` of one period of the reduced time
/// variable `s = step · t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TimeGrid {
    m: usize,
}

impl TimeGrid {
    pub fn new(m: usize) -> Result<Self> {
        if m == 0 {
            return domain("a time grid needs at least one sample");
        }
        Ok(Self { m })
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Smallest FFT-friendly grid that integrates `|u|^p` exactly, i.e. with
    /// `M > (p/2) · span`.
    pub fn certified(p: u32, layout: &FrequencyLayout) -> Self {
        let need = (p as u64 / 2) * layout.span() + 1;
        Self { m: smooth_size(need as usize) }
    }

    /// Whether the grid integrates `|u|^p` exactly for this layout.
    pub fn is_exact(&self, p: u32, layout: &FrequencyLayout) -> bool {
        self.m as u64 > (p as u64 / 2) * layout.span()
    }
}

/// `e^{-2πi r/M}` through two tables of size about `√M`.
struct SplitRoots {
    m: u64,
    block: u64,
    hi: Vec<Complex64>,
    lo: Vec<Complex64>,
}

impl SplitRoots {
    fn new(m: usize) -> Self {
        let m = m as u64;
        let block = ((m as f64).sqrt().ceil() as u64).max(1);
        let cis = |r: u64| Complex64::from_polar(1.0, -TAU * r as f64 / m as f64);
        let hi = (0..=m / block).map(|i| cis(i * block)).collect();
        let lo = (0..block).map(cis).collect();
        Self { m, block, hi, lo }
    }

    fn at(&self, r: u64) -> Complex64 {
        let r = r % self.m;
        self.hi[(r / self.block) as usize] * self.lo[(r % self.block) as usize]
    }
}

fn active_modes<F: Field>(f: &F) -> (Vec<i64>, Vec<Complex64>, FrequencyLayout) {
    let (ks, amps): (Vec<i64>, Vec<Complex64>) = f.modes().into_iter().filter(|(_, a)| a.norm_sqr() > 0.0).unzip();
    let freqs: Vec<u64> = ks.iter().map(|&k| f.eigenvalue(k)).collect();
    (ks, amps, FrequencyLayout::new(&freqs))
}

/// One time series: samples of `Σ b_k e^{-i s ν_k}` at `s_j = 2πj/M`.
struct TimeSampler {
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl TimeSampler {
    fn new(fft: Arc<dyn Fft<f64>>) -> Self {
        let m = fft.len();
        let scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        Self { fft, buf: vec![Complex64::new(0.0, 0.0); m], scratch }
    }

    fn sample(&mut self, reduced: &[u64], b: impl Iterator<Item = Complex64>) -> &[Complex64] {
        let m = self.buf.len() as u64;
        self.buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (&nu, bk) in reduced.iter().zip(b) {
            self.buf[(nu % m) as usize] += bk;
        }
        self.fft.process_with_scratch(&mut self.buf, &mut self.scratch);
        &self.buf
    }
}

fn pow_abs(z: Complex64, p: u32) -> f64 {
    let s = z.norm_sqr();
    if p.is_multiple_of(2) {
        s.powi(p as i32 / 2)
    } else {
        s.powf(p as f64 / 2.0)
    }
}

/// `(2π/M) Σ_j |Σ_k b_k e^{-i s_j ν_k}|^p` for every row of coefficients.
fn time_integrals(rows: &[Vec<Complex64>], reduced: &[u64], p: u32, grid: TimeGrid) -> Vec<f64> {
    let fft = FftPlanner::new().plan_fft_forward(grid.len());
    let dt = TAU / grid.len() as f64;
    rows.par_iter()
        .map_init(
            || TimeSampler::new(fft.clone()),
            |s, row| dt * s.sample(reduced, row.iter().copied()).iter().map(|&z| pow_abs(z, p)).sum::<f64>(),
        )
        .collect()
}

/// Per-node coefficient rows `b_k(u_j) = a_k Z̃_k(u_j)` of the active modes.
fn zonal_rows(f: &ZonalField, ks: &[i64], amps: &[Complex64], nodes: &[f64]) -> Vec<Vec<Complex64>> {
    let basis = ZonalBasis::new(f.n(), f.band_limit()).expect("valid field");
    nodes
        .par_iter()
        .map_init(
            || vec![0.0; f.band_limit() + 1],
            |vals, &u| {
                basis.values_into(u, vals);
                ks.iter().zip(amps).map(|(&k, &a)| a * vals[k as usize]).collect()
            },
        )
        .collect()
}

fn check_even(p: u32) -> Result<()> {
    if p == 0 || p % 2 == 1 {
        return domain(format!("certified norms need an even exponent, got {p}"));
    }
    Ok(())
}

/// Which sampling of `(0, π)` the `L^∞` and fractional paths use.
pub const SUP_OVERSAMPLE: usize = 16;

/// `‖f‖_{L^p(S^n)}`.
///
/// Even `p` uses the quadrature and is certified when its exactness degree is
/// at least `pK + n`. `p = ∞` takes the maximum over `ρK + 1` equispaced
/// colatitudes and bounds the gap to the supremum by Bernstein's inequality.
/// Other `p` use midpoint sums at two resolutions and report their difference.
pub fn space_norm(f: &ZonalField, p: f64, quad: &SphereQuadrature) -> Result<NormReport> {
    if quad.n() != f.n() {
        return domain("quadrature and field live on different spheres");
    }
    let k = f.band_limit();
    if p.is_infinite() {
        let g = SUP_OVERSAMPLE * k.max(1) + 1;
        let thetas: Vec<f64> = (0..g).map(|i| PI * i as f64 / (g - 1) as f64).collect();
        let lower = f.evaluate_many(&thetas).iter().map(|z| z.norm()).fold(0.0, f64::max);
        let gap = PI / (2.0 * (g - 1) as f64) * k as f64;
        let upper = lower / (1.0 - gap);
        return Ok(NormReport::estimated(lower, upper - lower));
    }
    if !(p >= 1.0) {
        return domain(format!("norm exponent must be at least 1, got {p}"));
    }
    if p.fract() == 0.0 && (p as u32).is_multiple_of(2) {
        let pi = p as u32;
        let vals = f.evaluate_many(&quad.nodes().iter().map(|u| u.acos()).collect::<Vec<_>>());
        let total: f64 = vals.iter().zip(quad.weights()).map(|(z, w)| w * pow_abs(*z, pi)).sum();
        let value = (sphere_area(f.n() - 1) * total).powf(1.0 / p);
        if quad.exactness_degree() >= pi as usize * k + f.n() {
            return Ok(NormReport::certified(value));
        }
        let finer = build_sphere_quadrature(f.n(), 2 * quad.nodes().len())?;
        let refined = space_norm(f, p, &finer)?.value;
        return Ok(NormReport::estimated(refined, refined - value));
    }
    let coarse = riemann_space_norm(f, p, SUP_OVERSAMPLE * (k + 1));
    let fine = riemann_space_norm(f, p, 2 * SUP_OVERSAMPLE * (k + 1));
    Ok(NormReport::estimated(fine, fine - coarse))
}

fn riemann_space_norm(f: &ZonalField, p: f64, g: usize) -> f64 {
    let thetas: Vec<f64> = (0..g).map(|i| PI * (i as f64 + 0.5) / g as f64).collect();
    let vals = f.evaluate_many(&thetas);
    let h = PI / g as f64;
    let s: f64 = thetas.iter().zip(&vals).map(|(t, z)| z.norm().powf(p) * t.sin().powi(f.n() as i32 - 1)).sum();
    (sphere_area(f.n() - 1) * h * s).powf(1.0 / p)
}

/// Fields whose Schrödinger evolution has a certified space-time norm.
pub trait SpaceTime: Field {
    /// Smallest number of time samples that integrates `|u|^p` exactly.
    fn exact_time_samples(&self, p: u32) -> usize;

    /// `∫_T ∫ |e^{itΔ} f|^p` on the given time grid with the smallest exact
    /// spatial resolution.
    fn spacetime_integral(&self, p: u32, grid: TimeGrid) -> Result<f64>;
}

impl SpaceTime for ZonalField {
    fn exact_time_samples(&self, p: u32) -> usize {
        let (_, _, layout) = active_modes(self);
        ((p as u64 / 2) * layout.span() + 1) as usize
    }

    fn spacetime_integral(&self, p: u32, grid: TimeGrid) -> Result<f64> {
        let quad = SphereQuadrature::for_degree(self.n(), p as usize * self.band_limit() + self.n())?;
        Ok(zonal_spacetime_integral(self, p, grid, &quad))
    }
}

impl SpaceTime for CircleField {
    fn exact_time_samples(&self, p: u32) -> usize {
        CircleWindow::new(self, true).exact_samples(p)
    }

    fn spacetime_integral(&self, p: u32, grid: TimeGrid) -> Result<f64> {
        let width = (self.k_max() - self.k_min()) as usize;
        let m_theta = smooth_size((p as usize / 2) * width + 1);
        Ok(circle_spacetime_integral(self, p, grid, m_theta))
    }
}

/// `∫_T ∫_{S^n} |e^{itΔ} f|^p dμ dt` with the given spatial rule.
pub fn zonal_spacetime_integral(f: &ZonalField, p: u32, grid: TimeGrid, quad: &SphereQuadrature) -> f64 {
    let (ks, amps, layout) = active_modes(f);
    if ks.is_empty() {
        return 0.0;
    }
    let rows = zonal_rows(f, &ks, &amps, quad.nodes());
    let per_node = time_integrals(&rows, &layout.reduced, p, grid);
    sphere_area(f.n() - 1) * per_node.iter().zip(quad.weights()).map(|(v, w)| v * w).sum::<f64>()
}

/// Time window `[0, 2π/W)` that carries every value of a circle field's
/// evolution, with the frequencies written as `base + offset_k`.
///
/// `W` is the gcd of the offsets when that exceeds one. Otherwise `W = 2`
/// whenever `offset_k ≡ k (mod 2)` for all modes, because then
/// `u(t + π, θ) = c · u(t, θ - π)` with `|c| = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircleWindow {
    pub base: u64,
    pub window: u64,
    pub offsets: Vec<u64>,
    pub shifted: bool,
}

impl CircleWindow {
    pub fn new(f: &CircleField, allow_shift: bool) -> Self {
        let (ks, _, layout) = active_modes(f);
        let offsets: Vec<u64> = layout.reduced.iter().map(|&v| v * layout.step).collect();
        let parity = offsets.iter().zip(&ks).all(|(&o, &k)| (o as i64 - k).rem_euclid(2) == 0);
        let (window, shifted) = if layout.step > 1 {
            (layout.step, false)
        } else if allow_shift && parity && !offsets.is_empty() {
            (2, true)
        } else {
            (1, false)
        };
        Self { base: layout.base, window, offsets, shifted }
    }

    pub fn span(&self) -> u64 {
        self.offsets.iter().copied().max().unwrap_or(0)
    }

    /// Smallest `M` with `M W > (p/2) · span`, which makes the trapezoid rule
    /// on the window exact for `|u|^p` integrated over `θ`.
    pub fn exact_samples(&self, p: u32) -> usize {
        ((p as u64 / 2) * self.span() / self.window + 1) as usize
    }

    /// Bernstein degree of the centered sum in the window variable `W t`.
    pub fn half_span(&self) -> f64 {
        self.span() as f64 / (2.0 * self.window as f64)
    }
}

/// Rows of the `(t, θ)` grid processed per parallel task.
const ROW_CHUNK: usize = 64;

/// `∫_T ∫_T |e^{itΔ} f|^p dθ dt` on an `M × M_θ` tensor grid.
///
/// Each time row is one inverse FFT over `θ` of the lattice coefficients
/// `a_k e^{-i t offset_k}`, with the phases read from exact integer residues.
/// The `M` rows cover one [`CircleWindow`].
pub fn circle_spacetime_integral(f: &CircleField, p: u32, grid: TimeGrid, m_theta: usize) -> f64 {
    let window = CircleWindow::new(f, true);
    let partial = circle_row_sweep(
        f,
        &window,
        grid,
        m_theta,
        || 0.0,
        |acc, row| *acc += row.iter().map(|&z| pow_abs(z, p)).sum::<f64>(),
    );
    let rows: f64 = partial.iter().sum();
    rows * (TAU / grid.len() as f64) * (TAU / m_theta as f64)
}

/// Folds every time row of the sampled field into one accumulator per chunk
/// of rows, returned in time order.
fn circle_row_sweep<A, I, V>(
    f: &CircleField,
    window: &CircleWindow,
    grid: TimeGrid,
    m_theta: usize,
    init: I,
    visit: V,
) -> Vec<A>
where
    A: Send,
    I: Fn() -> A + Sync,
    V: Fn(&mut A, &[Complex64]) + Sync,
{
    let (ks, amps, _) = active_modes(f);
    let modulus = grid.len() as u64 * window.window;
    let roots = SplitRoots::new(modulus as usize);
    let ifft = FftPlanner::new().plan_fft_inverse(m_theta);
    let slots: Vec<usize> = ks.iter().map(|k| k.rem_euclid(m_theta as i64) as usize).collect();
    let chunks: Vec<usize> = (0..grid.len()).step_by(ROW_CHUNK).collect();
    chunks
        .par_iter()
        .map_init(
            || {
                let scratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];
                (vec![Complex64::new(0.0, 0.0); m_theta], scratch)
            },
            |(buf, scratch), &start| {
                let end = (start + ROW_CHUNK).min(grid.len());
                let mut acc = init();
                for j in start..end {
                    buf.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
                    for ((&off, &a), &slot) in window.offsets.iter().zip(&amps).zip(&slots) {
                        let r = ((off % modulus) as u128 * j as u128 % modulus as u128) as u64;
                        buf[slot] += a * roots.at(r);
                    }
                    ifft.process_with_scratch(buf, scratch);
                    visit(&mut acc, buf);
                }
                acc
            },
        )
        .collect()
}

/// `‖e^{itΔ} f‖_{L^p(T × space)}` for even `p`.
///
/// Certified when the grid has at least [`SpaceTime::exact_time_samples`]
/// samples; otherwise the value on the doubled grid is returned together with
/// the change from `M` to `2M`.
pub fn spacetime_norm<F: SpaceTime>(f: &F, p: u32, grid: TimeGrid) -> Result<NormReport> {
    check_even(p)?;
    let coarse = f.spacetime_integral(p, grid)?;
    let coarse = coarse.powf(1.0 / p as f64);
    if grid.len() >= f.exact_time_samples(p) {
        return Ok(NormReport::certified(coarse));
    }
    let fine = f.spacetime_integral(p, TimeGrid::new(2 * grid.len())?)?;
    let fine = fine.powf(1.0 / p as f64);
    Ok(NormReport::estimated(fine, fine - coarse))
}

/// Certified `‖e^{itΔ} f‖_{L^p(T × space)}` on the smallest exact grids.
pub fn spacetime_norm_auto<F: SpaceTime>(f: &F, p: u32) -> Result<NormReport> {
    check_even(p)?;
    spacetime_norm(f, p, TimeGrid::new(smooth_size(f.exact_time_samples(p)))?)
}

/// Time evolution used by [`mixed_norm_x_then_t`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Propagator {
    /// `e^{itΔ}`, integer frequencies `k(k+n-1)`.
    Schrodinger,
    /// `e^{it√-Δ}` on `S²`, frequencies `√(k(k+1))`.
    HalfWave,
}

/// Gram entry `(1/2π) ∫_0^{2π} e^{itδ} dt = (e^{2πiδ} - 1)/(2πiδ)`.
pub fn gram_entry(delta: f64) -> Complex64 {
    if delta == 0.0 {
        return Complex64::new(1.0, 0.0);
    }
    let z = Complex64::new(0.0, TAU * delta);
    (z.exp() - 1.0) / z
}

/// `‖ θ ↦ ‖u(·, θ)‖_{L^{p_t}(T)} ‖_{L^{p_x}(S^n)}`.
///
/// The inner norm is exact: Parseval for `p_t = 2` (the Gram quadratic form
/// for the half-wave frequencies), the trapezoid rule otherwise. The outer
/// integral is certified when its integrand is a polynomial of degree at most
/// the quadrature's exactness, i.e. `p_t = 2` or `p_t = p_x`.
pub fn mixed_norm_x_then_t(
    f: &ZonalField,
    p_x: u32,
    p_t: u32,
    propagator: Propagator,
    grid: TimeGrid,
    quad: &SphereQuadrature,
) -> Result<NormReport> {
    check_even(p_x)?;
    check_even(p_t)?;
    if quad.n() != f.n() {
        return domain("quadrature and field live on different spheres");
    }
    if propagator == Propagator::HalfWave && (f.n() != 2 || p_t != 2) {
        return domain("half-wave mixed norms are available on S^2 with p_t = 2");
    }
    let (ks, amps, layout) = active_modes(f);
    if ks.is_empty() {
        return Ok(NormReport::certified(0.0));
    }
    let rows = zonal_rows(f, &ks, &amps, quad.nodes());
    let (inner_p, inner_exact): (Vec<f64>, bool) = match (propagator, p_t) {
        (Propagator::Schrodinger, 2) => {
            (rows.iter().map(|r| TAU * r.iter().map(|b| b.norm_sqr()).sum::<f64>()).collect(), true)
        }
        (Propagator::Schrodinger, _) => {
            (time_integrals(&rows, &layout.reduced, p_t, grid), grid.is_exact(p_t, &layout))
        }
        (Propagator::HalfWave, _) => {
            let mu: Vec<f64> = ks.iter().map(|&k| half_wave_frequency(k as u64)).collect();
            let gram: Vec<Vec<Complex64>> = mu.iter().map(|a| mu.iter().map(|b| gram_entry(a - b)).collect()).collect();
            let vals = rows
                .par_iter()
                .map(|r| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (j, bj) in r.iter().enumerate() {
                        for (k, bk) in r.iter().enumerate() {
                            acc += bj * bk.conj() * gram[j][k];
                        }
                    }
                    TAU * acc.re
                })
                .collect();
            (vals, true)
        }
    };
    let outer: f64 =
        inner_p.iter().zip(quad.weights()).map(|(v, w)| w * v.max(0.0).powf(p_x as f64 / p_t as f64)).sum::<f64>()
            * sphere_area(f.n() - 1);
    let value = outer.powf(1.0 / p_x as f64);
    let polynomial = p_t == 2 || p_t == p_x;
    let degree_ok = quad.exactness_degree() >= p_x as usize * f.band_limit() + f.n();
    if inner_exact && polynomial && degree_ok {
        return Ok(NormReport::certified(value));
    }
    let finer = build_sphere_quadrature(f.n(), 2 * quad.nodes().len())?;
    let refined_grid = if inner_exact { grid } else { TimeGrid::new(2 * grid.len())? };
    let refined = mixed_norm_x_then_t(f, p_x, p_t, propagator, refined_grid, &finer)?;
    Ok(NormReport::estimated(refined.value, refined.value - value))
}

/// Two-sided bound on `sup_t |e^{itΔ} f(θ)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalBound {
    pub lower: f64,
    /// `+∞` when the grid is too coarse for the Bernstein certificate.
    pub upper: f64,
    pub samples: usize,
}

impl MaximalBound {
    fn from_samples(lower: f64, half_span: f64, samples: usize) -> Self {
        let gap = PI * half_span / samples as f64;
        let upper = if gap < 1.0 { lower / (1.0 - gap) } else { f64::INFINITY };
        Self { lower, upper, samples }
    }
}

/// Coefficients `b_k` with `e^{itΔ} f(θ) = Σ_k b_k e^{-itλ_k}`.
pub trait PointSeries: Field {
    fn point_coefficients(&self, theta: f64) -> Vec<(i64, Complex64)>;
}

impl PointSeries for ZonalField {
    fn point_coefficients(&self, theta: f64) -> Vec<(i64, Complex64)> {
        let basis = ZonalBasis::new(self.n(), self.band_limit()).expect("valid field");
        let vals = basis.values(theta.cos());
        self.modes().into_iter().map(|(k, a)| (k, a * vals[k as usize])).collect()
    }
}

impl PointSeries for CircleField {
    fn point_coefficients(&self, theta: f64) -> Vec<(i64, Complex64)> {
        self.modes().into_iter().map(|(k, a)| (k, a * Complex64::from_polar(1.0, k as f64 * theta))).collect()
    }
}

/// `sup_{0≤t<2π} |e^{itΔ} f(θ)|` from `M ≥ ρ Λ` samples of the reduced time
/// period, where `Λ` is the Bernstein degree of the centered sum.
///
/// `lower` is the sampled maximum; `upper = lower / (1 - πΛ/M)`, which is at
/// most `lower / (1 - π/ρ)`.
pub fn maximal_function<F: PointSeries>(f: &F, theta: f64, oversample: f64) -> Result<MaximalBound> {
    if !(oversample > PI) {
        return Err(Error::Oversample(oversample));
    }
    let terms: Vec<(i64, Complex64)> =
        f.point_coefficients(theta).into_iter().filter(|(_, b)| b.norm_sqr() > 0.0).collect();
    if terms.is_empty() {
        return Ok(MaximalBound { lower: 0.0, upper: 0.0, samples: 1 });
    }
    let freqs: Vec<u64> = terms.iter().map(|&(k, _)| f.eigenvalue(k)).collect();
    let layout = FrequencyLayout::new(&freqs);
    let m = smooth_size((oversample * layout.half_span()).ceil().max(1.0) as usize);
    let rows = [terms.iter().map(|&(_, b)| b).collect::<Vec<_>>()];
    let fft = FftPlanner::new().plan_fft_forward(m);
    let mut sampler = TimeSampler::new(fft);
    let lower = sampler.sample(&layout.reduced, rows[0].iter().copied()).iter().map(|z| z.norm()).fold(0.0, f64::max);
    Ok(MaximalBound::from_samples(lower, layout.half_span(), m))
}

/// `max_{(p,q)} |e^{itΔ} f(θ)|` at the rational times `t = 2πp/q`; a lower
/// bound for the maximal function that needs no time grid.
pub fn maximal_lower_at_times<F: PointSeries>(f: &F, theta: f64, times: &[(i64, u64)]) -> Result<f64> {
    let terms = f.point_coefficients(theta);
    let mut best: f64 = 0.0;
    for &(p, q) in times {
        if q == 0 {
            return domain("rational time needs a positive denominator");
        }
        let v: Complex64 = terms.iter().map(|&(k, b)| b * crate::spectral::rational_phase(f.eigenvalue(k), p, q)).sum();
        best = best.max(v.norm());
    }
    Ok(best)
}

/// `‖t ↦ e^{itΔ} f(θ)‖_{L^p(T)}` for even `p`, exact by the trapezoid rule.
pub fn point_time_norm<F: PointSeries>(f: &F, theta: f64, p: u32) -> Result<f64> {
    check_even(p)?;
    let terms: Vec<(i64, Complex64)> =
        f.point_coefficients(theta).into_iter().filter(|(_, b)| b.norm_sqr() > 0.0).collect();
    if terms.is_empty() {
        return Ok(0.0);
    }
    let freqs: Vec<u64> = terms.iter().map(|&(k, _)| f.eigenvalue(k)).collect();
    let layout = FrequencyLayout::new(&freqs);
    let grid = TimeGrid::certified(p, &layout);
    let rows = vec![terms.iter().map(|&(_, b)| b).collect::<Vec<_>>()];
    Ok(time_integrals(&rows, &layout.reduced, p, grid)[0].powf(1.0 / p as f64))
}

/// Sampled maximal function of a circle field on `θ_j = 2πj/M_θ` from `M`
/// samples of its [`CircleWindow`].
///
/// With a half-period window (even `M_θ` only) the second half of the period
/// is read off the first through `θ ↦ θ - π`.
pub fn circle_maximal_grid(f: &CircleField, grid: TimeGrid, m_theta: usize) -> Vec<MaximalBound> {
    let window = CircleWindow::new(f, m_theta.is_multiple_of(2));
    let chunks = circle_row_sweep(
        f,
        &window,
        grid,
        m_theta,
        || vec![0.0f64; m_theta],
        |acc, row| {
            for (b, z) in acc.iter_mut().zip(row) {
                *b = b.max(z.norm_sqr());
            }
        },
    );
    let mut best = vec![0.0f64; m_theta];
    for chunk in &chunks {
        for (b, v) in best.iter_mut().zip(chunk) {
            *b = b.max(v.sqrt());
        }
    }
    if window.shifted {
        let half = m_theta / 2;
        best = (0..m_theta).map(|i| best[i].max(best[(i + half) % m_theta])).collect();
    }
    best.into_iter().map(|lower| MaximalBound::from_samples(lower, window.half_span(), grid.len())).collect()
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fits `y ≈ e^{intercept} x^{slope}`.
pub fn fit_exponent(series: &[(f64, f64)]) -> Result<PowerFit> {
    if series.len() < 3 {
        return Err(Error::DegenerateFit(format!("need at least 3 points, got {}", series.len())));
    }
    if let Some(&(x, y)) = series.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0)) {
        return Err(Error::DegenerateFit(format!("non-positive point ({x}, {y})")));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all parameters are equal".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_res <= 1e-28 * ss_tot.max(1.0) {
        1.0
    } else if ss_tot == 0.0 {
        0.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(PowerFit { slope, intercept, r2 })
}

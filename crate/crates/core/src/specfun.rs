//! Gegenbauer polynomials and zonal spherical harmonics on `S^n`.
//!
//! Zonal harmonics are normalised against the true surface measure
//! `dμ = |S^{n-1}| (sin θ)^{n-1} dθ`, so that `∫ Z_k(θ)² dμ = |S^n| Z_k(0)`.
//! The reproducing constant `κ_n` is therefore `|S^n|`.

use std::f64::consts::PI;

use crate::error::{domain, Result};

/// Surface area of the unit sphere `S^m ⊂ R^{m+1}`.
pub fn sphere_area(m: usize) -> f64 {
    // |S^m| = 2π/(m-1) |S^{m-2}|
    let (mut area, mut dim) = if m.is_multiple_of(2) { (2.0, 0) } else { (2.0 * PI, 1) };
    while dim < m {
        dim += 2;
        area *= 2.0 * PI / (dim as f64 - 1.0);
    }
    area
}

/// Reproducing constant of the zonal kernel under the surface measure.
pub fn reproducing_constant(n: usize) -> f64 {
    sphere_area(n)
}

/// Gegenbauer index attached to `S^n`.
pub fn sphere_lambda(n: usize) -> f64 {
    (n as f64 - 1.0) / 2.0
}

fn check_sphere(n: usize) -> Result<()> {
    if n < 2 {
        return domain(format!("zonal harmonics need n >= 2, got n = {n}"));
    }
    Ok(())
}

/// Index and degree of a Gegenbauer polynomial `C_k^λ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GegenbauerParams {
    lambda: f64,
    degree: usize,
}

impl GegenbauerParams {
    pub fn new(lambda: f64, degree: usize) -> Result<Self> {
        if !(lambda > 0.0) || !lambda.is_finite() {
            return domain(format!("Gegenbauer index must be positive, got {lambda}"));
        }
        Ok(Self { lambda, degree })
    }

    /// `λ = (n-1)/2` for the sphere `S^n`.
    pub fn for_sphere(n: usize, degree: usize) -> Result<Self> {
        check_sphere(n)?;
        Self::new(sphere_lambda(n), degree)
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn degree(&self) -> usize {
        self.degree
    }
}

/// `C_k^λ(u)` by the forward three-term recurrence
/// `(k+1) C_{k+1} = 2(k+λ) u C_k - (k+2λ-1) C_{k-1}`.
pub fn gegenbauer_eval(params: GegenbauerParams, u: f64) -> Result<f64> {
    if !(u.abs() <= 1.0) {
        return domain(format!("Gegenbauer argument must lie in [-1, 1], got {u}"));
    }
    let lambda = params.lambda;
    let k = params.degree;
    let mut prev = 1.0;
    if k == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 * lambda * u;
    for j in 1..k {
        let jf = j as f64;
        let next = (2.0 * (jf + lambda) * u * cur - (jf + 2.0 * lambda - 1.0) * prev) / (jf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// Writes `C_0^λ(u), …, C_{kmax}^λ(u)` into `out` (length `kmax + 1`).
pub fn gegenbauer_all_into(lambda: f64, u: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = 1.0;
    if out.len() == 1 {
        return;
    }
    out[1] = 2.0 * lambda * u;
    for j in 1..out.len() - 1 {
        let jf = j as f64;
        out[j + 1] = (2.0 * (jf + lambda) * u * out[j] - (jf + 2.0 * lambda - 1.0) * out[j - 1]) / (jf + 1.0);
    }
}

/// `C_k^λ(1) = binom(k + 2λ - 1, k)`, accumulated as a product.
pub fn gegenbauer_at_one(lambda: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, j| acc * (j as f64 + 2.0 * lambda - 1.0) / j as f64)
}

/// Zonal kernel `Z_k(θ) = ((k+λ)/λ) C_k^λ(cos θ)`, `λ = (n-1)/2`.
pub fn zonal_kernel(n: usize, k: usize, theta: f64) -> Result<f64> {
    let params = GegenbauerParams::for_sphere(n, k)?;
    let lambda = params.lambda();
    let c = gegenbauer_eval(params, theta.cos().clamp(-1.0, 1.0))?;
    Ok((k as f64 + lambda) / lambda * c)
}

/// `‖Z_k(x₀, ·)‖²_{L²(S^n)}`, equal to `κ_n · Z_k(x₀, x₀)` by the reproducing
/// property.
pub fn zonal_l2_norm_sq(n: usize, k: usize) -> Result<f64> {
    check_sphere(n)?;
    let lambda = sphere_lambda(n);
    Ok(reproducing_constant(n) * (k as f64 + lambda) / lambda * gegenbauer_at_one(lambda, k))
}

/// Orthonormal zonal basis `Z̃_k = Z_k / ‖Z_k‖₂` up to a fixed degree.
///
/// The per-degree scale factors are computed once, so evaluating the whole
/// basis at a colatitude costs a single recurrence sweep.
#[derive(Debug, Clone)]
pub struct ZonalBasis {
    n: usize,
    lambda: f64,
    scale: Vec<f64>,
}

impl ZonalBasis {
    pub fn new(n: usize, max_degree: usize) -> Result<Self> {
        check_sphere(n)?;
        let lambda = sphere_lambda(n);
        let kappa = reproducing_constant(n);
        let mut at_one = 1.0;
        let scale = (0..=max_degree)
            .map(|k| {
                if k > 0 {
                    at_one *= (k as f64 + 2.0 * lambda - 1.0) / k as f64;
                }
                ((k as f64 + lambda) / (lambda * kappa * at_one)).sqrt()
            })
            .collect();
        Ok(Self { n, lambda, scale })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> usize {
        self.scale.len() - 1
    }

    /// Values `Z̃_0(u), …, Z̃_K(u)` at `u = cos θ`.
    pub fn values_into(&self, u: f64, out: &mut [f64]) {
        debug_assert_eq!(out.len(), self.scale.len());
        gegenbauer_all_into(self.lambda, u, out);
        for (v, s) in out.iter_mut().zip(&self.scale) {
            *v *= s;
        }
    }

    pub fn values(&self, u: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.scale.len()];
        self.values_into(u, &mut out);
        out
    }
}

/// `Z̃_k(θ)` for a single degree.
pub fn normalized_zonal(n: usize, k: usize, theta: f64) -> Result<f64> {
    Ok(zonal_kernel(n, k, theta)? / zonal_l2_norm_sq(n, k)?.sqrt())
}

/// Large-degree approximation of `Z̃_k(θ)` away from the poles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SzegoApprox {
    /// `c_k (sin θ)^{-(n-1)/2} cos((k + (n-1)/2) θ - (n-1)π/4)`.
    pub main_term: f64,
    /// `A / (k (sin θ)^{(n+1)/2})`.
    pub error_bound: f64,
    pub c_k: f64,
}

/// Argument of the modulated cosine, `(k + λ) θ - λ π / 2`.
pub fn szego_phase(n: usize, k: usize, theta: f64) -> f64 {
    let lambda = sphere_lambda(n);
    (k as f64 + lambda) * theta - lambda * PI / 2.0
}

/// Modulated cosine without the amplitude `c_k`.
pub fn szego_profile(n: usize, k: usize, theta: f64) -> f64 {
    let s = theta.sin();
    s.powf(-sphere_lambda(n)) * szego_phase(n, k, theta).cos()
}

/// Points in the least-squares window `[π/4, 3π/4]` used to fit `c_k`.
pub const SZEGO_FIT_POINTS: usize = 8192;

/// Fitted amplitudes `c_0, …, c_kmax`.
///
/// `c_k` minimises `Σ_i (Z̃_k(θ_i) - c g_k(θ_i))²` over a midpoint grid on
/// `[π/4, 3π/4]`, with `g_k` the modulated cosine. `c_0 := 1`.
pub fn szego_amplitudes(n: usize, kmax: usize) -> Result<Vec<f64>> {
    let basis = ZonalBasis::new(n, kmax)?;
    let lambda = sphere_lambda(n);
    let mut cross = vec![0.0; kmax + 1];
    let mut gram = vec![0.0; kmax + 1];
    let mut values = vec![0.0; kmax + 1];
    let width = PI / 2.0;
    for i in 0..SZEGO_FIT_POINTS {
        let theta = PI / 4.0 + width * (i as f64 + 0.5) / SZEGO_FIT_POINTS as f64;
        basis.values_into(theta.cos(), &mut values);
        let envelope = theta.sin().powf(-lambda);
        for k in 1..=kmax {
            let g = envelope * szego_phase(n, k, theta).cos();
            cross[k] += values[k] * g;
            gram[k] += g * g;
        }
    }
    let mut amps: Vec<f64> = cross.iter().zip(&gram).map(|(c, g)| c / g).collect();
    amps[0] = 1.0;
    Ok(amps)
}

pub fn szego_amplitude(n: usize, k: usize) -> Result<f64> {
    Ok(szego_amplitudes(n, k)?[k])
}

/// Remainder constant `A` in the bound `A / (k (sin θ)^{(n+1)/2})`.
///
/// Pinned from the observed maximum of `|Z̃_k - main| k (sin θ)^{(n+1)/2}`
/// over `1 ≤ k ≤ 1024` and `θ ∈ [1/k, π - 1/k]`, with a 25% margin. For
/// `n = 3` the modulated cosine is exact and the constant only absorbs
/// rounding; the last slot covers `5 ≤ n ≤ 8`.
pub fn szego_remainder_constant(n: usize) -> f64 {
    match n {
        2 => SZEGO_REMAINDER[0],
        3 => SZEGO_REMAINDER[1],
        4 => SZEGO_REMAINDER[2],
        _ => SZEGO_REMAINDER[3],
    }
}

const SZEGO_REMAINDER: [f64; 4] = [0.0497, 1.1e-10, 0.0841, 0.811];

/// Band `[c_lo, c_hi]` containing every fitted `c_k` with `1 ≤ k ≤ 4096`;
/// the last slot covers `5 ≤ n ≤ 8`.
pub fn szego_amplitude_band(n: usize) -> (f64, f64) {
    match n {
        2 => SZEGO_BAND[0],
        3 => SZEGO_BAND[1],
        4 => SZEGO_BAND[2],
        _ => SZEGO_BAND[3],
    }
}

const SZEGO_BAND: [(f64, f64); 4] = [(0.313, 0.320), (0.22507, 0.22509), (0.1769, 0.1856), (0.109, 0.193)];

/// Modulated-cosine approximation of `Z̃_k(θ)` with its remainder bound.
pub fn szego_zonal_approx(n: usize, k: usize, theta: f64) -> Result<SzegoApprox> {
    check_sphere(n)?;
    if k == 0 {
        return domain("the modulated-cosine asymptotic needs k >= 1");
    }
    if !(theta > 0.0 && theta < PI) {
        return domain(format!("colatitude must lie strictly inside (0, pi), got {theta}"));
    }
    let c_k = szego_amplitude(n, k)?;
    let s = theta.sin();
    Ok(SzegoApprox {
        main_term: c_k * szego_profile(n, k, theta),
        error_bound: szego_remainder_constant(n) / (k as f64 * s.powf((n as f64 + 1.0) / 2.0)),
        c_k,
    })
}

//! Number-theoretic kit: representation counts, quadratic Gauss sums,
//! modular inverses and the frequency gaps of `√(k(k+1))`.

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{domain, Result};

/// Largest `l ≥ 0` with `l(l+1) ≤ x`.
fn triangular_root(x: u64) -> u64 {
    let mut l = (((4 * x + 1) as f64).sqrt() as u64).saturating_sub(1) / 2;
    while (l + 1) * (l + 2) <= x {
        l += 1;
    }
    while l * (l + 1) > x {
        l -= 1;
    }
    l
}

/// `r(s) = #{(k, l) ∈ N²: k(k+1) + l(l+1) = s}` by enumeration over `k`.
pub fn rep_count_r(s: u64) -> u64 {
    let mut count = 0;
    let mut k = 0u64;
    while k * (k + 1) <= s {
        let rest = s - k * (k + 1);
        let l = triangular_root(rest);
        if l * (l + 1) == rest {
            count += 1;
        }
        k += 1;
    }
    count
}

/// `r(0), …, r(smax)` in one sweep over all admissible pairs.
pub fn rep_count_r_table(smax: u64) -> Vec<u32> {
    let mut table = vec![0u32; smax as usize + 1];
    let mut k = 0u64;
    while k * (k + 1) <= smax {
        let base = k * (k + 1);
        let mut l = 0u64;
        while base + l * (l + 1) <= smax {
            table[(base + l * (l + 1)) as usize] += 1;
            l += 1;
        }
        k += 1;
    }
    table
}

/// `r^{(m)}_{u,v} = #{(j,k,l) ∈ N³: j+k+l = u, j(j+m)+k(k+m)+l(l+m) = v}`.
pub fn rep_count_uv(m: u64, u: u64, v: u64) -> u64 {
    let mut count = 0;
    for j in 0..=u {
        for k in 0..=(u - j) {
            let l = u - j - k;
            if j * (j + m) + k * (k + m) + l * (l + m) == v {
                count += 1;
            }
        }
    }
    count
}

/// Counts of `(j+k+l, j(j+m)+k(k+m)+l(l+m))` over `0 ≤ j, k, l < n`.
pub fn rep_count_uv_table(m: u64, n: u64) -> HashMap<(u64, u64), u64> {
    let mut table = HashMap::new();
    for j in 0..n {
        for k in 0..n {
            for l in 0..n {
                *table.entry((j + k + l, j * (j + m) + k * (k + m) + l * (l + m))).or_insert(0) += 1;
            }
        }
    }
    table
}

/// `Σ_{u,v} |Σ_{j+k+l=u, Σ j(j+m)=v} a_j a_k a_l|²` over ordered triples.
///
/// This is the Plancherel form of `‖Σ a_k e^{-itk(k+m)} e^{ikθ}‖⁶_{L⁶(T²)}`
/// divided by `(2π)²`.
pub fn triple_collision_moment(a: &[Complex64], m: u64) -> f64 {
    let n = a.len() as u64;
    let mut cells: HashMap<(u64, u64), Complex64> = HashMap::new();
    for j in 0..n {
        for k in 0..n {
            let ajk = a[j as usize] * a[k as usize];
            for l in 0..n {
                let key = (j + k + l, j * (j + m) + k * (k + m) + l * (l + m));
                *cells.entry(key).or_insert(Complex64::new(0.0, 0.0)) += ajk * a[l as usize];
            }
        }
    }
    let mut values: Vec<_> = cells.into_iter().collect();
    values.sort_unstable_by_key(|(key, _)| *key);
    values.iter().map(|(_, c)| c.norm_sqr()).sum()
}

/// `Σ_s |Σ_{λ_k + λ_l = s} b_k b_l|²` for integer frequencies `λ`.
///
/// `2π` times this is `‖Σ b_k e^{-itλ_k}‖⁴_{L⁴(T)}`.
pub fn pair_collision_moment(b: &[Complex64], freqs: &[u64]) -> f64 {
    assert_eq!(b.len(), freqs.len());
    let mut cells: HashMap<u64, Complex64> = HashMap::new();
    for (bk, fk) in b.iter().zip(freqs) {
        for (bl, fl) in b.iter().zip(freqs) {
            *cells.entry(fk + fl).or_insert(Complex64::new(0.0, 0.0)) += bk * bl;
        }
    }
    let mut values: Vec<_> = cells.into_iter().collect();
    values.sort_unstable_by_key(|(key, _)| *key);
    values.iter().map(|(_, c)| c.norm_sqr()).sum()
}

/// Table of `e^{-2πi j/q}`, `0 ≤ j < q`.
#[derive(Debug, Clone)]
pub struct RootsOfUnity {
    q: u64,
    table: Vec<Complex64>,
}

impl RootsOfUnity {
    pub fn new(q: u64) -> Result<Self> {
        if q == 0 {
            return domain("modulus must be positive");
        }
        let table = (0..q).map(|j| Complex64::from_polar(1.0, -2.0 * PI * j as f64 / q as f64)).collect();
        Ok(Self { q, table })
    }

    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// `e^{-2πi j/q}` for any integer `j`.
    pub fn at(&self, j: i128) -> Complex64 {
        self.table[j.rem_euclid(self.q as i128) as usize]
    }

    /// `Σ_{k=0}^{q-1} e^{-2πi (k² + c k)/q}` with phases reduced mod `q` exactly.
    pub fn gauss_sum(&self, c: i64) -> Complex64 {
        let q = self.q as i128;
        let c = (c as i128).rem_euclid(q);
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..q {
            acc += self.table[((k * k + c * k) % q) as usize];
        }
        acc
    }
}

/// Direct `O(q)` evaluation of `Σ_{k=0}^{q-1} e^{-2πi (k² + c k)/q}`.
pub fn gauss_sum_direct(q: u64, c: i64) -> Result<Complex64> {
    Ok(RootsOfUnity::new(q)?.gauss_sum(c))
}

/// Parameters of the Gauss sum at the construction point `θ = 2πp/q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GaussSumParams {
    pub q: u64,
    pub p: u64,
    pub n: u64,
}

impl GaussSumParams {
    pub fn new(q: u64, p: u64, n: u64) -> Result<Self> {
        if q.is_multiple_of(2) {
            return domain(format!("Gauss sum modulus must be odd, got {q}"));
        }
        if p % 2 == 1 {
            return domain(format!("construction index p must be even, got {p}"));
        }
        if n == 0 {
            return domain("dimension must be at least 1");
        }
        Ok(Self { q, p, n })
    }

    /// Linear coefficient `n - 1 - p` of the quadratic phase.
    pub fn linear_coefficient(&self) -> i64 {
        self.n as i64 - 1 - self.p as i64
    }
}

/// Least nonnegative `r` with `4r ≡ 1 (mod q)`.
pub fn mod_inverse_of_4(q: u64) -> Result<u64> {
    if q.is_multiple_of(2) {
        return domain(format!("4 is not invertible modulo the even number {q}"));
    }
    let half = q.div_ceil(2) as u128;
    Ok(((half * half) % q as u128) as u64)
}

/// `ω_q = 1` for `q ≡ 1 (mod 4)`, `-i` for `q ≡ 3 (mod 4)`.
pub fn gauss_sum_unit(q: u64) -> Complex64 {
    if q % 4 == 1 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(0.0, -1.0)
    }
}

/// Closed form `ω_q √q e^{2πi r (n-1-p)²/q}` with `4r ≡ 1 (mod q)`.
pub fn gauss_sum_closed(params: GaussSumParams) -> Result<Complex64> {
    let q = params.q;
    let r = mod_inverse_of_4(q)? as u128;
    let c = params.linear_coefficient().unsigned_abs() as u128 % q as u128;
    let residue = (r * c % q as u128) * c % q as u128;
    let phase = Complex64::from_polar(1.0, 2.0 * PI * residue as f64 / q as f64);
    Ok(gauss_sum_unit(q) * (q as f64).sqrt() * phase)
}

/// `|√(k(k+1)) - k - 1/2|` through the cancellation-free form
/// `(1/4) / (√(k(k+1)) + k + 1/2)`.
pub fn kadec_gap(k: u64) -> Result<f64> {
    if k == 0 {
        return domain("the gap is defined for k >= 1; the constant mode is handled separately");
    }
    let kf = k as f64;
    Ok(0.25 / ((kf * (kf + 1.0)).sqrt() + kf + 0.5))
}

/// Necessary regularity `max{0, n(1/2 - 1/p) - 2/p}` for the space-time
/// `L^p` bound; `p = f64::INFINITY` is allowed.
pub fn predicted_exponent(n: u32, p: f64) -> f64 {
    let inv = if p.is_infinite() { 0.0 } else { 1.0 / p };
    (n as f64 * (0.5 - inv) - 2.0 * inv).max(0.0)
}

//! Independent reference computations for the numerical kernels.

use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use num_bigint::BigInt;
use num_rational::BigRational;
use zonalflow::arith::{pair_collision_moment, triple_collision_moment};
use zonalflow::experiments::{gram_spectrum, half_wave_gram, riesz_bounds};
use zonalflow::quadrature::{
    maximal_function, mixed_norm_x_then_t, point_time_norm, space_norm, spacetime_norm_auto, Propagator,
    SphereQuadrature, TimeGrid,
};
use zonalflow::specfun::{gegenbauer_eval, normalized_zonal, sphere_area, zonal_kernel, GegenbauerParams};
use zonalflow::spectral::{schrodinger_evolve, sphere_eigenvalue, CircleField, Field, ZonalField};
use zonalflow::Complex64;

fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &BigRational) -> f64 {
    // Scale to keep 60 significant bits before the integer conversion.
    let scale = BigInt::from(1u64 << 60);
    let q = (r.numer() * &scale) / r.denom();
    q.to_string().parse::<f64>().unwrap() / (1u64 << 60) as f64
}

/// `C_k^λ(x) = Σ_m (-1)^m (λ)_{k-m} / (m! (k-2m)!) (2x)^{k-2m}` in exact arithmetic.
fn gegenbauer_explicit(lambda: &BigRational, k: usize, x: &BigRational) -> BigRational {
    let mut total = rat(0, 1);
    for m in 0..=k / 2 {
        let mut poch = rat(1, 1);
        for i in 0..k - m {
            poch *= lambda + rat(i as i64, 1);
        }
        let mut denom = BigInt::from(1);
        for i in 1..=m {
            denom *= i;
        }
        for i in 1..=(k - 2 * m) {
            denom *= i;
        }
        let mut power = rat(1, 1);
        for _ in 0..k - 2 * m {
            power *= rat(2, 1) * x;
        }
        let term = poch * power / BigRational::from_integer(denom);
        if m % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

#[test]
fn gegenbauer_matches_exact_rational_sum() {
    let x = rat(3, 10);
    for (num, den) in [(1, 2), (1, 1), (3, 2), (2, 1)] {
        let lambda = rat(num, den);
        for k in 0..=30 {
            let exact = to_f64(&gegenbauer_explicit(&lambda, k, &x));
            let params = GegenbauerParams::new(num as f64 / den as f64, k).unwrap();
            let got = gegenbauer_eval(params, 0.3).unwrap();
            assert!((got - exact).abs() <= 1e-12 * exact.abs().max(1.0), "λ={num}/{den} k={k}: {got} vs {exact}");
        }
    }
}

#[test]
fn zonal_kernel_on_s2_is_scaled_legendre() {
    // Bonnet recurrence for P_k, independent of the Gegenbauer code path.
    for &theta in &[0.1, 0.7, 1.3, 2.9] {
        let x = f64::cos(theta);
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=40usize {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
            let z = zonal_kernel(2, k, theta).unwrap();
            assert_relative_eq!(z, (2 * k + 1) as f64 * p1, max_relative = 1e-11, epsilon = 1e-11);
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton on the
/// three-term recurrence.
fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    (0..m)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=m {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `∫_{S^n} g dμ` for band-limited zonal integrands. Odd `n` uses the
/// midpoint rule in `θ` (the integrand is then a cosine polynomial); even
/// `n` uses Gauss–Legendre in `u = cos θ` (the weight is then a polynomial).
fn reference_sphere(n: usize, points: usize, g: impl Fn(f64) -> f64) -> f64 {
    let area = sphere_area(n - 1);
    if n % 2 == 1 {
        let h = PI / points as f64;
        area * h
            * (0..points)
                .map(|i| {
                    let t = h * (i as f64 + 0.5);
                    g(t) * t.sin().powi(n as i32 - 1)
                })
                .sum::<f64>()
    } else {
        area * gauss_legendre(points)
            .into_iter()
            .map(|(u, w)| w * g(u.acos()) * (1.0 - u * u).powi((n as i32 - 2) / 2))
            .sum::<f64>()
    }
}

fn sample_field(n: usize, k: usize) -> ZonalField {
    let coeffs = (0..=k).map(|j| Complex64::from_polar(1.0 / (1.0 + j as f64), 1.7 * j as f64)).collect();
    ZonalField::new(n, coeffs).unwrap()
}

#[test]
fn orthonormality_against_reference_rule() {
    for n in [2usize, 3, 4] {
        for (j, k) in [(0, 0), (3, 3), (3, 5), (10, 10), (7, 12)] {
            let s =
                reference_sphere(n, 400, |t| normalized_zonal(n, j, t).unwrap() * normalized_zonal(n, k, t).unwrap());
            let expect = if j == k { 1.0 } else { 0.0 };
            assert!((s - expect).abs() < 1e-12, "n={n} ({j},{k}): {s}");
        }
    }
}

#[test]
fn space_norms_against_reference_rule() {
    for n in [2usize, 3, 5] {
        let f = sample_field(n, 9);
        let quad = SphereQuadrature::for_degree(n, 4 * 9 + n).unwrap();
        for p in [2u32, 4, 6] {
            let report = space_norm(&f, p as f64, &quad).unwrap();
            let direct = reference_sphere(n, 500, |t| f.evaluate(t).norm().powi(p as i32)).powf(1.0 / p as f64);
            assert!(report.certified || p == 6);
            assert_relative_eq!(report.value, direct, max_relative = 1e-12);
        }
        let sup = space_norm(&f, f64::INFINITY, &quad).unwrap();
        let fine = (0..=20000).map(|i| f.evaluate(PI * i as f64 / 20000.0).norm()).fold(0.0, f64::max);
        assert!(sup.value <= fine + 1e-12 && fine <= sup.value + sup.error_bound + 1e-12);
    }
}

/// `∫_0^{2π} ∫_{S^n} |e^{itΔ} f|^p dμ dt` with `M` equispaced times on the
/// full period and the reference rule in `θ`.
fn brute_spacetime(f: &ZonalField, p: i32, times: usize, points: usize) -> f64 {
    (0..times)
        .map(|j| {
            let g = schrodinger_evolve(f, TAU * j as f64 / times as f64);
            reference_sphere(f.n(), points, |t| g.evaluate(t).norm().powi(p))
        })
        .sum::<f64>()
        * TAU
        / times as f64
}

#[test]
fn zonal_spacetime_norm_against_brute_force() {
    for n in [2usize, 3] {
        let f = sample_field(n, 5);
        let top = sphere_eigenvalue(n, 5) as usize;
        for p in [4u32, 6] {
            let fast = spacetime_norm_auto(&f, p).unwrap();
            assert!(fast.certified);
            let direct = brute_spacetime(&f, p as i32, p as usize * top / 2 + 7, 200).powf(1.0 / p as f64);
            assert_relative_eq!(fast.value, direct, max_relative = 1e-11);
        }
    }
}

#[test]
fn circle_norms_against_collision_moments() {
    let a: Vec<Complex64> = (0..12).map(|j| Complex64::from_polar(1.0 + 0.05 * j as f64, 0.9 * j as f64)).collect();
    for n in [1usize, 2, 3] {
        let f = CircleField::one_sided(n, a.clone()).unwrap();
        let l6 = spacetime_norm_auto(&f, 6).unwrap().value.powi(6);
        let exact = TAU * TAU * triple_collision_moment(&a, n as u64 - 1);
        assert_relative_eq!(l6, exact, max_relative = 1e-11);
    }
    let two = CircleField::two_sided(a[..11].to_vec()).unwrap();
    let l4 = spacetime_norm_auto(&two, 4).unwrap().value.powi(4);
    // ‖u‖⁴ = (2π)² Σ_{(k, s)} |Σ_{j+l=k, j²+l²=s} a_j a_l|².
    let mut cells = std::collections::BTreeMap::new();
    for (j, aj) in two.modes() {
        for (l, al) in two.modes() {
            *cells.entry((j + l, j * j + l * l)).or_insert(Complex64::new(0.0, 0.0)) += aj * al;
        }
    }
    let exact = TAU * TAU * cells.values().map(|c| c.norm_sqr()).sum::<f64>();
    assert_relative_eq!(l4, exact, max_relative = 1e-11);
}

#[test]
fn pointwise_time_norm_against_pair_moment() {
    let f = sample_field(2, 14);
    for &theta in &[0.4, 1.2, 2.5] {
        let b: Vec<Complex64> =
            f.coeffs().iter().enumerate().map(|(k, a)| a * normalized_zonal(2, k, theta).unwrap()).collect();
        let freqs: Vec<u64> = (0..15).map(|k| sphere_eigenvalue(2, k)).collect();
        let exact = TAU * pair_collision_moment(&b, &freqs);
        assert_relative_eq!(point_time_norm(&f, theta, 4).unwrap().powi(4), exact, max_relative = 1e-12);
    }
}

#[test]
fn mixed_norm_with_parseval_inner() {
    let f = sample_field(2, 6);
    let quad = SphereQuadrature::for_degree(2, 4 * 6 + 2).unwrap();
    let got = mixed_norm_x_then_t(&f, 4, 2, Propagator::Schrodinger, TimeGrid::new(8).unwrap(), &quad).unwrap();
    assert!(got.certified);
    let direct = reference_sphere(2, 300, |t| {
        let inner: f64 =
            f.coeffs().iter().enumerate().map(|(k, a)| (a * normalized_zonal(2, k, t).unwrap()).norm_sqr()).sum();
        (TAU * inner).powi(2)
    })
    .powf(0.25);
    assert_relative_eq!(got.value, direct, max_relative = 1e-12);
}

#[test]
fn maximal_bounds_bracket_dense_sampling() {
    let f = sample_field(3, 6);
    for &theta in &[0.3, 1.1, 2.0] {
        let b = maximal_function(&f, theta, 8.0).unwrap();
        let dense = (0..200_000)
            .map(|j| schrodinger_evolve(&f, TAU * j as f64 / 200_000.0).evaluate(theta).norm())
            .fold(0.0, f64::max);
        assert!(b.lower <= dense * (1.0 + 1e-12), "{} > {}", b.lower, dense);
        assert!(dense <= b.upper * (1.0 + 1e-12));
        assert!(b.upper / b.lower <= 1.0 / (1.0 - PI / 8.0) + 1e-12);
    }
    let single = ZonalField::single_mode(2, 5, 4, Complex64::new(0.0, 2.0)).unwrap();
    let b = maximal_function(&single, 0.8, 4.0).unwrap();
    assert_relative_eq!(b.lower, single.evaluate(0.8).norm(), max_relative = 1e-14);
    assert_eq!(b.lower, b.upper);
}

/// Cyclic Jacobi eigenvalues of a real symmetric matrix.
#[allow(clippy::needless_range_loop)]
fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i][j] * a[i][j])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let t = if tau == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Extreme eigenvalues of the K = 16 half-wave Gram matrix, from the Jacobi solver.
const GRAM16_MIN: f64 = 0.9611337582824202;
const GRAM16_MAX: f64 = 1.081914018837169;

#[test]
fn riesz_gram_k16_pinned_by_jacobi() {
    let k = 16;
    let g = half_wave_gram(k);
    // Hermitian H = A + iB has the real symmetric block form [[A, -B], [B, A]],
    // whose spectrum is that of H with every eigenvalue doubled.
    let block: Vec<Vec<f64>> = (0..2 * k)
        .map(|i| {
            (0..2 * k)
                .map(|j| {
                    let z = g[(i % k, j % k)];
                    match (i < k, j < k) {
                        (true, true) | (false, false) => z.re,
                        (true, false) => -z.im,
                        (false, true) => z.im,
                    }
                })
                .collect()
        })
        .collect();
    let doubled = jacobi_eigenvalues(block);
    let reference: Vec<f64> = doubled.chunks(2).map(|c| 0.5 * (c[0] + c[1])).collect();
    for c in doubled.chunks(2) {
        assert!((c[0] - c[1]).abs() < 1e-10);
    }
    let got = gram_spectrum(k);
    for (a, b) in got.iter().zip(&reference) {
        assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }
    // Diagonal entries are exactly one; the trace fixes the eigenvalue sum.
    assert!((0..k).all(|i| g[(i, i)] == Complex64::new(1.0, 0.0)));
    assert_relative_eq!(reference.iter().sum::<f64>(), k as f64, max_relative = 1e-12);
    assert!((reference[0] - GRAM16_MIN).abs() < 1e-12 && (reference[k - 1] - GRAM16_MAX).abs() < 1e-12);
    let (a_bound, b_bound) = riesz_bounds(0.125);
    assert!(reference[0] >= a_bound && reference[k - 1] <= b_bound);
}

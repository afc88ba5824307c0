#![allow(dead_code)]

use ivexpand::{bs_call_price, Exact, Quote};
use num_bigint::BigInt;
use num_traits::{One, Zero};

pub fn priced(spot: f64, strike: f64, maturity: f64, sigma: f64) -> Quote {
    let q = Quote::new(spot, strike, maturity).unwrap();
    q.with_price(bs_call_price(&q, sigma)).unwrap()
}

pub fn q(n: i64, d: i64) -> Exact {
    Exact::new(BigInt::from(n), BigInt::from(d))
}

/// `u` with `erf(u) = y`, by Newton's method on the reference `erf`.
pub fn erf_inverse_newton(y: f64) -> f64 {
    let mut u = 0.5;
    for _ in 0..100 {
        let f = libm::erf(u) - y;
        let df = 2.0 / std::f64::consts::PI.sqrt() * (-u * u).exp();
        let step = f / df;
        u -= step;
        if step.abs() < 1e-17 {
            break;
        }
    }
    u
}

/// `σ` with `erf(σ√T/(2√2)) = C/S`, the at-the-money price inverted directly.
pub fn atm_vol_newton(ratio: f64, maturity: f64) -> f64 {
    2.0 * 2f64.sqrt() * erf_inverse_newton(ratio) / maturity.sqrt()
}

/// Odd power series `Σ c[k] y^{2k+1}` multiplied out, truncated to `n` terms.
fn odd_mul(a: &[Exact], b: &[Exact], n: usize) -> Vec<Exact> {
    // product of two odd series is even: index k holds y^{2k+2}
    let mut out = vec![Exact::zero(); n];
    for (i, ai) in a.iter().enumerate() {
        for (j, bj) in b.iter().enumerate() {
            if i + j < n {
                out[i + j] += ai * bj;
            }
        }
    }
    out
}

/// Coefficients `η_k` obtained by reverting `√π/2·erf(z) = Σ (−1)^n z^{2n+1}/(n!(2n+1))`
/// through fixed-point iteration on truncated rational power series.
///
/// With `y = √π/2·erf(z)` and `z = Σ c_k y^{2k+1}`, `η_k = (2k+1)·c_k`.
pub fn eta_by_reversion(n: usize) -> Vec<Exact> {
    // f(z) = Σ f_n z^{2n+1}
    let mut fact = Exact::one();
    let f: Vec<Exact> = (0..n)
        .map(|k| {
            if k > 0 {
                fact = &fact * Exact::from_integer(BigInt::from(k));
            }
            let sign = if k % 2 == 0 {
                Exact::one()
            } else {
                -Exact::one()
            };
            sign / (&fact * Exact::from_integer(BigInt::from(2 * k + 1)))
        })
        .collect();
    // z ← y − Σ_{m≥1} f_m z^{2m+1}; each pass fixes one more coefficient
    let mut z = vec![Exact::zero(); n];
    z[0] = Exact::one();
    for _ in 0..n {
        let z2 = odd_mul(&z, &z, n); // even series, index k ↔ y^{2k+2}
        let mut power = z.clone(); // odd series z^{2m+1}
        let mut next = vec![Exact::zero(); n];
        next[0] = Exact::one();
        for fm in f.iter().skip(1) {
            // power ← power · z²  (odd · even = odd, index shift by one)
            let mut shifted = vec![Exact::zero(); n];
            for (i, pi) in power.iter().enumerate() {
                for (j, zj) in z2.iter().enumerate() {
                    if i + j + 1 < n {
                        shifted[i + j + 1] += pi * zj;
                    }
                }
            }
            power = shifted;
            for k in 0..n {
                next[k] -= fm * &power[k];
            }
        }
        z = next;
    }
    z.iter()
        .enumerate()
        .map(|(k, c)| c * Exact::from_integer(BigInt::from(2 * k + 1)))
        .collect()
}

/// The six coefficients `[λ, λ²L, λ², λ³L², λ³L, λ³]` of the third-order
/// solution, written out from the closed form.
pub fn third_order_coefficients<T>(beta: T, gamma: T, alpha1: T) -> [T; 6]
where
    T: Clone
        + One
        + std::ops::Neg<Output = T>
        + std::ops::Add<Output = T>
        + std::ops::Sub<Output = T>
        + std::ops::Mul<Output = T>,
{
    let two = T::one() + T::one();
    let b = beta;
    let g = gamma;
    [
        T::one(),
        -b.clone(),
        g.clone(),
        b.clone() * b.clone(),
        b.clone() * b.clone() - two * b.clone() * g.clone(),
        g.clone() * g.clone() - b * g - alpha1,
    ]
}

/// Grid cells of the third-order solution in the order of [`third_order_coefficients`].
pub const THIRD_ORDER_CELLS: [(u32, u32); 6] = [(1, 0), (2, 1), (2, 0), (3, 2), (3, 1), (3, 0)];

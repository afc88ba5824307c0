//! Coefficient families of the forward expansions and of the inverse error
//! function.
//!
//! All families are built in exact rational arithmetic. Evaluation at a
//! floating-point `z` converts `z` to its exact rational value, evaluates
//! exactly, and rounds once, so alternating sums such as `b_k` lose nothing to
//! cancellation.

use std::fmt;

use num_bigint::BigInt;
use num_integer::binomial;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// A polynomial in one variable with exact rational coefficients, lowest
/// degree first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polynomial(Vec<BigRational>);

impl Polynomial {
    pub fn new(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.len() > 1 && coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(BigRational::zero());
        }
        Polynomial(coeffs)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len() - 1
    }

    pub fn derivative(&self) -> Polynomial {
        let d = self
            .0
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, c)| c * BigRational::from_integer(BigInt::from(i)))
            .collect();
        Polynomial::new(d)
    }

    pub fn scaled(&self, by: &BigRational) -> Polynomial {
        Polynomial::new(self.0.iter().map(|c| c * by).collect())
    }

    /// Horner evaluation in exact arithmetic.
    pub fn eval_exact(&self, z: &BigRational) -> BigRational {
        self.0
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * z + c)
    }

    /// Evaluates at `z`, exactly when `T` is exact and with a single rounding
    /// otherwise.
    pub fn eval<T: Scalar>(&self, z: &T) -> T {
        match z.to_ratio() {
            Some(r) => T::ratio(&self.eval_exact(&r)),
            None => self
                .0
                .iter()
                .rev()
                .fold(T::zero(), |acc, c| acc * z.clone() + T::ratio(c)),
        }
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, c) in self.0.iter().enumerate() {
            if c.is_zero() && !(first && i == self.degree()) {
                continue;
            }
            let mag = c.abs();
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else if c.is_negative() {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            first = false;
            match i {
                0 => write!(f, "{mag}")?,
                _ => {
                    if !mag.is_one() {
                        write!(f, "{mag}*")?;
                    }
                    if i == 1 {
                        write!(f, "z")?;
                    } else {
                        write!(f, "z^{i}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

fn factorial(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, l| acc * BigInt::from(l))
}

/// `(2j+1)!! = ∏_{l=1}^{j} (2l+1)`, the empty product being 1.
///
/// Defined for `j ≥ -1`; `(2k-1)!!` is `odd_double_factorial(k - 1)`.
pub fn odd_double_factorial(j: i64) -> Result<BigInt> {
    if j < -1 {
        return Err(Error::InvalidArgument(format!(
            "(2j+1)!! is undefined for j = {j}"
        )));
    }
    Ok((1..=j.max(0)).fold(BigInt::one(), |acc, l| acc * BigInt::from(2 * l + 1)))
}

fn dfact(j: i64) -> BigRational {
    BigRational::from_integer(odd_double_factorial(j).expect("index checked by caller"))
}

/// `f_k(z) = Σ_{j=0}^{k} z^j / (j! (2j+1)!!)`.
pub fn f_poly(k: usize) -> Polynomial {
    Polynomial::new(
        (0..=k as i64)
            .map(|j| {
                BigRational::new(
                    BigInt::one(),
                    factorial(j as u64) * odd_double_factorial(j).unwrap(),
                )
            })
            .collect(),
    )
}

/// `g_k(z) = Σ_{j=0}^{k} z^j / (j! (2j-1)!!)`.
pub fn g_poly(k: usize) -> Polynomial {
    Polynomial::new(
        (0..=k as i64)
            .map(|j| {
                BigRational::new(
                    BigInt::one(),
                    factorial(j as u64) * odd_double_factorial(j - 1).unwrap(),
                )
            })
            .collect(),
    )
}

/// `a_k(z) = (2k+1)!! f_k(z)`.
pub fn a_poly(k: usize) -> Polynomial {
    f_poly(k).scaled(&dfact(k as i64))
}

/// `b_k(z) = (2k+1)!! Σ_{j=0}^{k} (-1)^j C(k,j) z^j / (2j+1)!!`.
pub fn b_poly(k: usize) -> Polynomial {
    let lead = dfact(k as i64);
    Polynomial::new(
        (0..=k)
            .map(|j| {
                let sign = if j % 2 == 0 { 1 } else { -1 };
                let c = BigRational::from_integer(binomial(BigInt::from(k), BigInt::from(j)));
                &lead * c * int(sign) / dfact(j as i64)
            })
            .collect(),
    )
}

/// `c_k(z) = (2k-1)!! g_k(z)`.
pub fn c_poly(k: usize) -> Polynomial {
    g_poly(k).scaled(&dfact(k as i64 - 1))
}

pub fn a_coeff<T: Scalar>(k: usize, z: &T) -> T {
    a_poly(k).eval(z)
}

pub fn b_coeff<T: Scalar>(k: usize, z: &T) -> T {
    b_poly(k).eval(z)
}

pub fn c_coeff<T: Scalar>(k: usize, z: &T) -> T {
    c_poly(k).eval(z)
}

/// `η_0 .. η_{n-1}` of the inverse error function series
/// `erf⁻¹(y) = Σ η_k/(2k+1) (√π y/2)^{2k+1}`, from
/// `η_k = Σ_{j=0}^{k-1} η_j η_{k-1-j} / ((j+1)(2j+1))`.
pub fn eta_sequence(n_terms: usize) -> Vec<BigRational> {
    let mut eta: Vec<BigRational> = Vec::with_capacity(n_terms);
    for k in 0..n_terms {
        if k == 0 {
            eta.push(BigRational::one());
            continue;
        }
        let next = (0..k).fold(BigRational::zero(), |acc, j| {
            let den = int(((j + 1) * (2 * j + 1)) as i64);
            acc + &eta[j] * &eta[k - 1 - j] / den
        });
        eta.push(next);
    }
    eta
}

/// Partial sum of the inverse error function series with `n_terms` terms.
///
/// The `η` recurrence has only positive terms, so it is run in `T` directly.
pub fn erf_inv_series<T: Real>(y: T, n_terms: usize) -> T {
    let u = T::PI().sqrt() * T::lit(0.5) * y;
    let u2 = u * u;
    let mut eta: Vec<T> = Vec::with_capacity(n_terms);
    let mut power = u;
    let mut sum = T::zero();
    for k in 0..n_terms {
        let next = if k == 0 {
            T::one()
        } else {
            (0..k).fold(T::zero(), |acc, j| {
                acc + eta[j] * eta[k - 1 - j] / T::int(((j + 1) * (2 * j + 1)) as i64)
            })
        };
        eta.push(next);
        sum = sum + next * power / T::int(2 * k as i64 + 1);
        power = power * u2;
    }
    sum
}

/// Which coefficient family a table holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum CoefficientKind {
    A,
    B,
    C,
    Eta,
}

impl CoefficientKind {
    /// Symbolic form of the `k`-th member; `η_k` is a constant.
    pub fn polynomial(self, k: usize) -> Polynomial {
        match self {
            CoefficientKind::A => a_poly(k),
            CoefficientKind::B => b_poly(k),
            CoefficientKind::C => c_poly(k),
            CoefficientKind::Eta => Polynomial::new(vec![eta_sequence(k + 1).pop().unwrap()]),
        }
    }
}

/// Values of one family for `k = 0..=order` at a fixed argument.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTable<T> {
    pub kind: CoefficientKind,
    pub order: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> CoefficientTable<T> {
    /// Evaluates the family at `z` (ignored for `η`).
    pub fn build(kind: CoefficientKind, order: usize, z: &T) -> Self {
        let values = match kind {
            CoefficientKind::Eta => eta_sequence(order + 1).iter().map(T::ratio).collect(),
            _ => (0..=order).map(|k| kind.polynomial(k).eval(z)).collect(),
        };
        Self {
            kind,
            order,
            values,
        }
    }
}

//! Truncated series in `λ` with polynomial-in-`ln λ` coefficients.
//!
//! A [`LogPowerSeries`] stores `Σ c[i,j] λ^i ln^j λ` and drops every term with
//! `i` above its truncation order. `ln λ` is treated as an independent
//! generator, so products raise both exponents and the grading is by `i`
//! alone; within one `λ`-power any number of log powers may appear.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Real, Scalar};

/// `Σ coeffs[(i, j)] · λ^i · ln^j(λ)`, truncated above `λ^order`.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPowerSeries<T> {
    order: u32,
    coeffs: BTreeMap<(u32, u32), T>,
}

impl<T: Scalar> LogPowerSeries<T> {
    pub fn zero(order: u32) -> Self {
        LogPowerSeries {
            order,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(c: T, order: u32) -> Self {
        Self::monomial(c, 0, 0, order)
    }

    pub fn one(order: u32) -> Self {
        Self::constant(T::one(), order)
    }

    /// `c · λ^i · ln^j λ`, or zero if `i` exceeds the order.
    pub fn monomial(c: T, i: u32, j: u32, order: u32) -> Self {
        let mut s = Self::zero(order);
        s.add_term(i, j, c);
        s
    }

    /// Builds a series from `(i, j, c)` triples; repeated keys are summed.
    pub fn from_terms(order: u32, terms: impl IntoIterator<Item = (u32, u32, T)>) -> Self {
        let mut s = Self::zero(order);
        for (i, j, c) in terms {
            s.add_term(i, j, c);
        }
        s
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// Coefficient of `λ^i ln^j λ`.
    pub fn coeff(&self, i: u32, j: u32) -> T {
        self.coeffs.get(&(i, j)).cloned().unwrap_or_else(T::zero)
    }

    /// Nonzero terms ordered by `(i, j)`.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, &T)> {
        self.coeffs.iter().map(|(&(i, j), c)| (i, j, c))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Highest power of `ln λ` present.
    pub fn max_log_power(&self) -> Option<u32> {
        self.coeffs.keys().map(|&(_, j)| j).max()
    }

    pub fn add_term(&mut self, i: u32, j: u32, c: T) {
        if i > self.order || c == T::zero() {
            return;
        }
        let slot = self.coeffs.entry((i, j)).or_insert_with(T::zero);
        *slot = slot.clone() + c;
        if *slot == T::zero() {
            self.coeffs.remove(&(i, j));
        }
    }

    /// Copy truncated (or extended) to a new order.
    pub fn with_order(&self, order: u32) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(&(i, _), _)| i <= order)
            .map(|(k, c)| (*k, c.clone()))
            .collect();
        LogPowerSeries { order, coeffs }
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(&T) -> U) -> LogPowerSeries<U> {
        LogPowerSeries::from_terms(self.order, self.terms().map(|(i, j, c)| (i, j, f(c))))
    }

    pub fn neg(&self) -> Self {
        self.map(|c| -c.clone())
    }

    pub fn scale(&self, k: &T) -> Self {
        self.map(|c| c.clone() * k.clone())
    }

    /// Sum, truncated at the smaller order.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.with_order(self.order.min(other.order));
        for (i, j, c) in other.terms() {
            out.add_term(i, j, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product, truncated at the smaller order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut out = Self::zero(order);
        for (i1, j1, c1) in self.terms() {
            for (i2, j2, c2) in other.terms() {
                if i1 + i2 <= order {
                    out.add_term(i1 + i2, j1 + j2, c1.clone() * c2.clone());
                }
            }
        }
        out
    }

    /// Multiplies by `λ^i ln^j λ`.
    pub fn shift(&self, i: u32, j: u32) -> Self {
        LogPowerSeries::from_terms(
            self.order,
            self.terms().map(|(a, b, c)| (a + i, b + j, c.clone())),
        )
    }

    /// Part of degree `≥ 1` in `λ`, failing on `(0, j ≥ 1)` terms.
    fn split_constant(&self, op: &str) -> Result<(T, Self)> {
        if let Some((i, j, _)) = self.terms().find(|&(i, j, _)| i == 0 && j > 0) {
            return Err(Error::NotInvertible(format!(
                "{op}: term λ^{i} ln^{j} λ has grade zero"
            )));
        }
        let c0 = self.coeff(0, 0);
        let mut rest = self.clone();
        rest.coeffs.remove(&(0, 0));
        Ok((c0, rest))
    }

    /// `Σ_{n=0}^{order} w_n · rest^n` where `rest` has no grade-zero part.
    fn compose(rest: &Self, weights: impl Fn(u32) -> T) -> Self {
        let mut out = Self::constant(weights(0), rest.order);
        let mut power = Self::one(rest.order);
        for n in 1..=rest.order {
            power = power.mul(rest);
            if power.is_empty() {
                break;
            }
            out = out.add(&power.scale(&weights(n)));
        }
        out
    }

    /// Multiplicative inverse; needs a nonzero constant and no other grade-zero term.
    pub fn recip(&self) -> Result<Self> {
        let (c0, rest) = self.split_constant("recip")?;
        if c0 == T::zero() {
            return Err(Error::NotInvertible("recip: zero constant term".into()));
        }
        let inv = T::one() / c0;
        let r = rest.scale(&inv);
        // 1/(c0 (1 + r)) = (1/c0) Σ (-r)^n
        let geometric = Self::compose(&r, |n| if n % 2 == 0 { T::one() } else { -T::one() });
        Ok(geometric.scale(&inv))
    }

    /// `ln(1 + u)` for `u` without grade-zero part.
    pub fn log1p(&self) -> Result<Self> {
        let (c0, rest) = self.split_constant("log1p")?;
        if c0 != T::zero() {
            return Err(Error::NotInvertible("log1p: nonzero constant term".into()));
        }
        Ok(Self::compose(&rest, |n| {
            if n == 0 {
                T::zero()
            } else if n % 2 == 1 {
                T::one() / T::int(n as i64)
            } else {
                -T::one() / T::int(n as i64)
            }
        }))
    }

    /// `exp(u)` for `u` without grade-zero part.
    pub fn exp(&self) -> Result<Self> {
        let (c0, rest) = self.split_constant("exp")?;
        if c0 != T::zero() {
            return Err(Error::NotInvertible("exp: nonzero constant term".into()));
        }
        let mut factorials = vec![T::one()];
        for n in 1..=self.order {
            let last = factorials[n as usize - 1].clone();
            factorials.push(last * T::int(n as i64));
        }
        Ok(Self::compose(&rest, |n| {
            T::one() / factorials[n as usize].clone()
        }))
    }
}

impl<T: Real> LogPowerSeries<T> {
    /// Numerical value at `λ ∈ (0, 1)`, Horner in `λ` for each log power.
    pub fn eval(&self, lambda: T) -> Result<T> {
        if !(lambda > T::zero() && lambda < T::one()) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in (0, 1), got {lambda}"
            )));
        }
        let l = lambda.ln();
        let max_j = self.max_log_power().unwrap_or(0);
        let mut total = T::zero();
        for j in (0..=max_j).rev() {
            let mut horner = T::zero();
            for i in (0..=self.order).rev() {
                horner = horner * lambda + self.coeff(i, j);
            }
            total = total * l + horner;
        }
        Ok(total)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for LogPowerSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "0 + O(λ^{})", self.order + 1);
        }
        for (n, (i, j, c)) in self.terms().enumerate() {
            if n > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({c})")?;
            match i {
                0 => {}
                1 => f.write_str("·λ")?,
                _ => write!(f, "·λ^{i}")?,
            }
            match j {
                0 => {}
                1 => f.write_str("·ln(λ)")?,
                _ => write!(f, "·ln(λ)^{j}")?,
            }
        }
        write!(f, " + O(λ^{})", self.order + 1)
    }
}

fn same_order<T: Scalar>(a: &LogPowerSeries<T>, b: &LogPowerSeries<T>) -> Result<()> {
    if a.order() == b.order() {
        Ok(())
    } else {
        Err(Error::OrderMismatch(a.order(), b.order()))
    }
}

pub fn series_mul<T: Scalar>(
    a: &LogPowerSeries<T>,
    b: &LogPowerSeries<T>,
) -> Result<LogPowerSeries<T>> {
    same_order(a, b)?;
    Ok(a.mul(b))
}

pub fn series_recip<T: Scalar>(a: &LogPowerSeries<T>) -> Result<LogPowerSeries<T>> {
    a.recip()
}

pub fn series_log1p<T: Scalar>(u: &LogPowerSeries<T>) -> Result<LogPowerSeries<T>> {
    u.log1p()
}

pub fn series_exp<T: Scalar>(u: &LogPowerSeries<T>) -> Result<LogPowerSeries<T>> {
    u.exp()
}

pub fn eval_series<T: Real>(s: &LogPowerSeries<T>, lambda: T) -> Result<T> {
    s.eval(lambda)
}

/// Dominance order on the grid `{(i, j) : 0 ≤ j < i}`:
/// `λ ≻ λ² ln λ ≻ λ² ≻ λ³ ln² λ ≻ …`, numbered from 1.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TermOrdering;

impl TermOrdering {
    /// `π(i, j) = i(i+1)/2 − j`.
    pub fn position(i: u32, j: u32) -> Option<u64> {
        if j >= i {
            return None;
        }
        let i = i as u64;
        Some(i * (i + 1) / 2 - j as u64)
    }

    /// Inverse of [`TermOrdering::position`].
    pub fn term(position: u64) -> Option<(u32, u32)> {
        if position == 0 {
            return None;
        }
        let mut i = ((2.0 * position as f64).sqrt() as u64).max(1);
        while i * (i + 1) / 2 < position {
            i += 1;
        }
        while i > 1 && (i - 1) * i / 2 >= position {
            i -= 1;
        }
        Some((i as u32, (i * (i + 1) / 2 - position) as u32))
    }

    /// Grid terms with `i ≤ max_i` in dominance order.
    pub fn iter(max_i: u32) -> impl Iterator<Item = (u32, u32)> {
        (1..=max_i).flat_map(|i| (0..i).rev().map(move |j| (i, j)))
    }
}

/// Solves `v^β e^{-1/v} Σ α_k v^k = e^γ e^{-1/λ}` for `v` as a series in
/// `λ` and `ln λ` through `λ^order`.
///
/// `alphas[0]` must be one; entries beyond `alphas[order - 2]` cannot reach
/// the retained orders and are ignored. Each grade of `u = v/λ` is fixed by
/// cancelling the same grade of `λ` times the residual
/// `β ln v − 1/v + ln(Σ α_k v^k) − γ + 1/λ`.
pub fn solve_inversion<T: Scalar>(
    beta: &T,
    gamma: &T,
    alphas: &[T],
    order: u32,
) -> Result<LogPowerSeries<T>> {
    if order == 0 {
        return Err(Error::InvalidArgument(
            "truncation order must be at least 1".into(),
        ));
    }
    if *beta < T::zero() {
        return Err(Error::InvalidArgument("beta must be non-negative".into()));
    }
    match alphas.first() {
        Some(a0) if *a0 == T::one() => {}
        _ => {
            return Err(Error::InvalidArgument(
                "alphas must start with alpha_0 = 1".into(),
            ));
        }
    }
    let m = order - 1;
    let one = LogPowerSeries::one(m);
    let mut u = one.clone();
    for level in 1..=m {
        let residual = scaled_residual(&u, beta, gamma, alphas)?;
        for j in (0..=level).rev() {
            let r = residual.coeff(level, j);
            u.add_term(level, j, -r);
        }
    }
    Ok(u.with_order(order).shift(1, 0))
}

/// `λ · residual` for `v = λ u`, at the order of `u`.
fn scaled_residual<T: Scalar>(
    u: &LogPowerSeries<T>,
    beta: &T,
    gamma: &T,
    alphas: &[T],
) -> Result<LogPowerSeries<T>> {
    let m = u.order();
    let one = LogPowerSeries::one(m);
    let mut out = one.sub(&u.recip()?);
    out = out.add(&LogPowerSeries::monomial(beta.clone(), 1, 1, m));
    out = out.add(&u.sub(&one).log1p()?.shift(1, 0).scale(beta));
    out = out.add(&LogPowerSeries::monomial(-gamma.clone(), 1, 0, m));

    // Σ_{k≥1} α_k (λu)^k
    let lambda_u = u.shift(1, 0);
    let mut tail = LogPowerSeries::zero(m);
    let mut power = one;
    for alpha in alphas.iter().skip(1).take(m as usize) {
        power = power.mul(&lambda_u);
        tail = tail.add(&power.scale(alpha));
    }
    Ok(out.add(&tail.log1p()?.shift(1, 0)))
}

/// Scalar residual `β ln v − 1/v + ln(Σ α_k v^k) − γ + 1/λ`.
pub fn master_residual<T: Real>(v: T, lambda: T, beta: T, gamma: T, alphas: &[T]) -> T {
    let mut poly = T::zero();
    for a in alphas.iter().rev() {
        poly = poly * v + *a;
    }
    beta * v.ln() - v.recip() + poly.ln() - gamma + lambda.recip()
}

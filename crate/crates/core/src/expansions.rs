//! Forward asymptotic series for the time value and the covered call.
//!
//! Each series is evaluated to a caller-chosen order `N`. The `*_eval`
//! variants also report the magnitude of the last retained term, a heuristic
//! error estimate for an asymptotic (divergent) series.

use serde::{Deserialize, Serialize};

use crate::black_scholes::{
    atm_call_closed_form, atm_covered_call_closed_form, covered_call_ratio,
};
use crate::coefficients::{a_coeff, b_coeff, c_coeff, odd_double_factorial};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Limit in which a forward series is an asymptotic statement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpansionRegime {
    /// `θ → 0`, `x ≠ 0` fixed.
    ShortMaturity,
    /// `|x| → ∞`, `θ` fixed.
    LargeStrike,
    /// `θ → ∞`, `x` fixed.
    LargeMaturity,
    /// `x = 0`, `θ → 0`.
    AtmSmall,
    /// `x = 0`, `θ → ∞`.
    AtmLarge,
}

impl ExpansionRegime {
    pub const ALL: [ExpansionRegime; 5] = [
        ExpansionRegime::ShortMaturity,
        ExpansionRegime::LargeStrike,
        ExpansionRegime::LargeMaturity,
        ExpansionRegime::AtmSmall,
        ExpansionRegime::AtmLarge,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExpansionRegime::ShortMaturity => "short_maturity",
            ExpansionRegime::LargeStrike => "large_strike",
            ExpansionRegime::LargeMaturity => "large_maturity",
            ExpansionRegime::AtmSmall => "atm_small",
            ExpansionRegime::AtmLarge => "atm_large",
        }
    }

    pub fn requires_nonzero_x(self) -> bool {
        matches!(
            self,
            ExpansionRegime::ShortMaturity | ExpansionRegime::LargeStrike
        )
    }

    /// Whether the series approximates `TV/S` (otherwise `CC/S`).
    pub fn is_time_value(self) -> bool {
        matches!(
            self,
            ExpansionRegime::ShortMaturity
                | ExpansionRegime::LargeStrike
                | ExpansionRegime::AtmSmall
        )
    }

    /// The variable the series is expanded in: `2θ²/x²`, `8/θ²` or `θ²/8`.
    pub fn small_parameter<T: Real>(self, x: T, theta: T) -> T {
        let t2 = theta * theta;
        match self {
            ExpansionRegime::ShortMaturity | ExpansionRegime::LargeStrike => {
                T::lit(2.0) * t2 / (x * x)
            }
            ExpansionRegime::LargeMaturity | ExpansionRegime::AtmLarge => T::lit(8.0) / t2,
            ExpansionRegime::AtmSmall => t2 / T::lit(8.0),
        }
    }

    /// Evaluates the regime's series at order `n`.
    pub fn series<T: Real>(self, x: T, theta: T, n: usize) -> Result<SeriesEval<T>> {
        match self {
            ExpansionRegime::ShortMaturity => tv_series_small_theta_eval(x, theta, n),
            ExpansionRegime::LargeStrike => tv_series_large_strike_eval(x, theta, n),
            ExpansionRegime::LargeMaturity => cc_series_large_theta_eval(x, theta, n),
            ExpansionRegime::AtmSmall => atm_tv_series_eval(theta, n),
            ExpansionRegime::AtmLarge => atm_cc_series_eval(theta, n),
        }
    }

    /// The quantity the series approximates, computed without the series.
    ///
    /// `TV/S` comes from the integral representation for the two wing
    /// regimes, from the Black-Scholes formula otherwise.
    pub fn exact<T: Real>(self, x: T, theta: T) -> T {
        match self {
            ExpansionRegime::ShortMaturity | ExpansionRegime::LargeStrike => {
                let tv = crate::black_scholes::tv_integral(x, theta);
                tv * (T::lit(0.5) * x).exp() / (T::lit(2.0) * T::PI()).sqrt()
            }
            ExpansionRegime::LargeMaturity => covered_call_ratio(x, theta),
            ExpansionRegime::AtmSmall => atm_call_closed_form(theta),
            ExpansionRegime::AtmLarge => atm_covered_call_closed_form(theta),
        }
    }

    /// Size of the truncation remainder at order `n`, up to a constant.
    ///
    /// The remainder orders are stated for the normalised series (the bare sum
    /// times its `v^β e^{-1/v}` factor); they are multiplied here by the same
    /// prefactor the series carries, so the scale is commensurate with
    /// `|series - exact|` in units of `TV/S` or `CC/S`.
    pub fn remainder_scale<T: Real>(self, x: T, theta: T, n: usize) -> T {
        let n = n as i32;
        let t2 = theta * theta;
        let gauss = (-x * x / (T::lit(2.0) * t2)).exp();
        let sqrt_pi = T::PI().sqrt();
        let sqrt_2pi = (T::lit(2.0) * T::PI()).sqrt();
        match self {
            ExpansionRegime::ShortMaturity => {
                x.abs() * (T::lit(0.5) * x).exp() / (T::lit(4.0) * sqrt_pi)
                    * theta.powi(2 * n + 5)
                    * gauss
            }
            ExpansionRegime::LargeStrike => {
                theta * (T::lit(0.5) * x).exp() / (T::lit(2.0) * sqrt_2pi)
                    * x.abs().powi(-2 * n - 4)
                    * gauss
            }
            ExpansionRegime::LargeMaturity => {
                (T::lit(0.5) * x).exp() / sqrt_pi
                    * theta.powi(-2 * n - 3)
                    * (-t2 / T::lit(8.0)).exp()
            }
            ExpansionRegime::AtmSmall => theta.powi(2 * n + 3) / sqrt_2pi,
            ExpansionRegime::AtmLarge => {
                theta.powi(-2 * n - 3) * (-t2 / T::lit(8.0)).exp() / sqrt_pi
            }
        }
    }
}

impl std::fmt::Display for ExpansionRegime {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ExpansionRegime {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let r = match s {
            "short" | "short_maturity" | "short-maturity" => ExpansionRegime::ShortMaturity,
            "large-k" | "large_strike" | "large-strike" => ExpansionRegime::LargeStrike,
            "large-t" | "large_maturity" | "large-maturity" => ExpansionRegime::LargeMaturity,
            "atm-small" | "atm_small" => ExpansionRegime::AtmSmall,
            "atm-large" | "atm_large" => ExpansionRegime::AtmLarge,
            other => {
                return Err(Error::InvalidArgument(format!("unknown regime '{other}'")));
            }
        };
        Ok(r)
    }
}

/// A truncated series value and the magnitude of its last retained term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesEval<T> {
    pub value: T,
    pub last_term: T,
}

/// `prefactor · Σ_{k=0}^{n} (-1)^k/2^k · coeff(k) · step^k`.
fn alternating_sum<T: Real>(
    prefactor: T,
    step: T,
    n: usize,
    coeff: impl Fn(usize) -> T,
) -> SeriesEval<T> {
    let mut sum = T::zero();
    let mut last = T::zero();
    let mut power = T::one();
    let ratio = -step * T::lit(0.5);
    for k in 0..=n {
        let term = coeff(k) * power;
        sum = sum + term;
        last = term;
        power = power * ratio;
    }
    SeriesEval {
        value: prefactor * sum,
        last_term: (prefactor * last).abs(),
    }
}

fn require_positive<T: Real>(theta: T) -> Result<()> {
    if theta > T::zero() && theta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "total volatility must be positive, got {theta}"
        )))
    }
}

fn require_nonzero<T: Real>(x: T) -> Result<()> {
    if x == T::zero() || !x.is_finite() {
        Err(Error::RouteToAtm)
    } else {
        Ok(())
    }
}

/// `TV/S` for `θ → 0` at fixed `x ≠ 0`:
/// `(|x|e^{x/2}/(4√π)) v^{3/2} e^{-1/v} Σ (-1)^k/2^k a_k(x²/8) v^k`, `v = 2θ²/x²`.
pub fn tv_series_small_theta<T: Real>(x: T, theta: T, n: usize) -> Result<T> {
    tv_series_small_theta_eval(x, theta, n).map(|s| s.value)
}

pub fn tv_series_small_theta_eval<T: Real>(x: T, theta: T, n: usize) -> Result<SeriesEval<T>> {
    require_nonzero(x)?;
    require_positive(theta)?;
    let v = T::lit(2.0) * theta * theta / (x * x);
    let z = x * x / T::lit(8.0);
    let prefactor = x.abs() * (T::lit(0.5) * x).exp() / (T::lit(4.0) * T::PI().sqrt())
        * v.powf(T::lit(1.5))
        * (-T::one() / v).exp();
    Ok(alternating_sum(prefactor, v, n, |k| a_coeff(k, &z)))
}

/// `TV/S` for `|x| → ∞` at fixed `θ`:
/// `(θe^{x/2}/(2√(2π))) e^{-θ²/8} v e^{-1/v} Σ (-1)^k/2^k b_k(θ²/4) v^k`, `v = 2θ²/x²`.
///
/// The integral representation gives this with the `e^{-θ²/8}` factor and
/// `v^k` grading; the remainder is then `O(x^{-2N-4} e^{-x²/(2θ²)})`.
pub fn tv_series_large_strike<T: Real>(x: T, theta: T, n: usize) -> Result<T> {
    tv_series_large_strike_eval(x, theta, n).map(|s| s.value)
}

pub fn tv_series_large_strike_eval<T: Real>(x: T, theta: T, n: usize) -> Result<SeriesEval<T>> {
    require_nonzero(x)?;
    require_positive(theta)?;
    let t2 = theta * theta;
    let v = T::lit(2.0) * t2 / (x * x);
    let z = t2 / T::lit(4.0);
    let prefactor = theta * (T::lit(0.5) * x).exp()
        / (T::lit(2.0) * (T::lit(2.0) * T::PI()).sqrt())
        * (-t2 / T::lit(8.0)).exp()
        * v
        * (-T::one() / v).exp();
    Ok(alternating_sum(prefactor, v, n, |k| b_coeff(k, &z)))
}

/// `CC/S` for `θ → ∞` at fixed `x`:
/// `(e^{x/2}/√π) w^{1/2} e^{-1/w} Σ (-1)^k/2^k c_k(x²/8) w^k`, `w = 8/θ²`.
pub fn cc_series_large_theta<T: Real>(x: T, theta: T, n: usize) -> Result<T> {
    cc_series_large_theta_eval(x, theta, n).map(|s| s.value)
}

pub fn cc_series_large_theta_eval<T: Real>(x: T, theta: T, n: usize) -> Result<SeriesEval<T>> {
    require_positive(theta)?;
    if !x.is_finite() {
        return Err(Error::InvalidArgument(
            "log-moneyness must be finite".into(),
        ));
    }
    let w = T::lit(8.0) / (theta * theta);
    let z = x * x / T::lit(8.0);
    // Same operation order as the at-the-money series, so x = 0 agrees bitwise.
    let prefactor = w.sqrt() * (-T::one() / w).exp() / T::PI().sqrt() * (T::lit(0.5) * x).exp();
    Ok(alternating_sum(prefactor, w, n, |k| c_coeff(k, &z)))
}

/// At-the-money `C/S` for `θ → 0`:
/// `(θ/√(2π)) Σ (-1)^k/2^k · (θ²/4)^k / ((2k+1) k!)`.
pub fn atm_tv_series<T: Real>(theta: T, n: usize) -> Result<T> {
    atm_tv_series_eval(theta, n).map(|s| s.value)
}

pub fn atm_tv_series_eval<T: Real>(theta: T, n: usize) -> Result<SeriesEval<T>> {
    require_positive(theta)?;
    let prefactor = theta / (T::lit(2.0) * T::PI()).sqrt();
    let mut factorial = T::one();
    let coeffs: Vec<T> = (0..=n)
        .map(|k| {
            if k > 0 {
                factorial = factorial * T::int(k as i64);
            }
            T::one() / (T::int(2 * k as i64 + 1) * factorial)
        })
        .collect();
    Ok(alternating_sum(
        prefactor,
        theta * theta / T::lit(4.0),
        n,
        |k| coeffs[k],
    ))
}

/// At-the-money `CC/S` for `θ → ∞`:
/// `(1/√π) w^{1/2} e^{-θ²/8} Σ (-1)^k/2^k (2k-1)!! w^k`, `w = 8/θ²`.
pub fn atm_cc_series<T: Real>(theta: T, n: usize) -> Result<T> {
    atm_cc_series_eval(theta, n).map(|s| s.value)
}

pub fn atm_cc_series_eval<T: Real>(theta: T, n: usize) -> Result<SeriesEval<T>> {
    require_positive(theta)?;
    let w = T::lit(8.0) / (theta * theta);
    let prefactor = w.sqrt() * (-T::one() / w).exp() / T::PI().sqrt();
    Ok(alternating_sum(prefactor, w, n, |k| {
        T::ratio(&odd_double_factorial(k as i64 - 1).unwrap().into())
    }))
}

/// Order in `0..=max_order` with the smallest absolute error against the
/// regime's exact value, with that error.
pub fn optimal_truncation<T: Real>(
    regime: ExpansionRegime,
    x: T,
    theta: T,
    max_order: usize,
) -> Result<(usize, T)> {
    let exact = regime.exact(x, theta);
    let mut best = (0, T::infinity());
    for n in 0..=max_order {
        let err = (regime.series(x, theta, n)?.value - exact).abs();
        if err < best.1 {
            best = (n, err);
        }
    }
    Ok(best)
}

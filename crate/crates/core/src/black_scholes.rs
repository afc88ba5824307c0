//! Zero-rate Black-Scholes pricing of European calls.
//!
//! Everything here works on the spot-normalised quantities
//! `x = ln(K/S)` and `θ = σ√T`. The time value is always evaluated as the
//! price of the out-of-the-money option (call for `K ≥ S`, put for `K < S`)
//! and the covered call as `S·N(-d+) + K·N(d-)`, so neither quantity is formed
//! by subtracting two nearly equal numbers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;
use crate::scalar::Real;

/// Spot, strike, maturity and (optionally) an observed call price.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarketQuote<T> {
    spot: T,
    strike: T,
    maturity: T,
    call_price: Option<T>,
}

impl<T: Real> MarketQuote<T> {
    /// A quote without a price, for forward pricing.
    pub fn new(spot: T, strike: T, maturity: T) -> Result<Self> {
        if !(spot > T::zero() && spot.is_finite()) {
            return Err(Error::InvalidQuote(format!(
                "spot must be positive, got {spot}"
            )));
        }
        if !(strike > T::zero() && strike.is_finite()) {
            return Err(Error::InvalidQuote(format!(
                "strike must be positive, got {strike}"
            )));
        }
        if !(maturity >= T::zero() && maturity.is_finite()) {
            return Err(Error::InvalidQuote(format!(
                "maturity must be non-negative, got {maturity}"
            )));
        }
        Ok(Self {
            spot,
            strike,
            maturity,
            call_price: None,
        })
    }

    /// A quote carrying an observed call price inside `[(S-K)_+, S]`.
    pub fn priced(spot: T, strike: T, maturity: T, call_price: T) -> Result<Self> {
        Self::new(spot, strike, maturity)?.with_price(call_price)
    }

    pub fn with_price(self, call_price: T) -> Result<Self> {
        let lower = self.intrinsic();
        if !(call_price >= lower && call_price <= self.spot) {
            return Err(Error::OutsideBand {
                price: call_price.to_f64().unwrap_or(f64::NAN),
                lower: lower.to_f64().unwrap_or(f64::NAN),
                upper: self.spot.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self {
            call_price: Some(call_price),
            ..self
        })
    }

    pub fn spot(&self) -> T {
        self.spot
    }

    pub fn strike(&self) -> T {
        self.strike
    }

    pub fn maturity(&self) -> T {
        self.maturity
    }

    pub fn call_price(&self) -> Option<T> {
        self.call_price
    }

    /// `x = ln(K/S)`.
    pub fn log_moneyness(&self) -> T {
        (self.strike / self.spot).ln()
    }

    /// `(S-K)_+`.
    pub fn intrinsic(&self) -> T {
        (self.spot - self.strike).max(T::zero())
    }

    pub(crate) fn require_price(&self) -> Result<T> {
        self.call_price
            .ok_or_else(|| Error::InvalidArgument("quote has no call price".into()))
    }

    /// Requires the observed price to lie strictly inside the no-arbitrage band.
    pub fn require_interior_price(&self) -> Result<T> {
        let c = self.require_price()?;
        let lower = self.intrinsic();
        if c > lower && c < self.spot {
            Ok(c)
        } else {
            Err(Error::OutsideBand {
                price: c.to_f64().unwrap_or(f64::NAN),
                lower: lower.to_f64().unwrap_or(f64::NAN),
                upper: self.spot.to_f64().unwrap_or(f64::NAN),
            })
        }
    }

    /// Observed `TV/S = (C - (S-K)_+)/S`.
    pub fn time_value_ratio(&self) -> Result<T> {
        let c = self.require_price()?;
        Ok((c - self.intrinsic()) / self.spot)
    }

    /// Observed `CC/S = (S - C)/S`.
    pub fn covered_call_ratio(&self) -> Result<T> {
        let c = self.require_price()?;
        Ok((self.spot - c) / self.spot)
    }

    /// `θ = σ√T` for a given volatility.
    pub fn total_vol(&self, sigma: T) -> T {
        sigma * self.maturity.sqrt()
    }
}

/// Log-moneyness and total volatility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moneyness<T> {
    pub x: T,
    pub theta: T,
}

impl<T: Real> Moneyness<T> {
    pub fn new(x: T, theta: T) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "log-moneyness must be finite, got {x}"
            )));
        }
        if !(theta >= T::zero()) {
            return Err(Error::InvalidArgument(format!(
                "total volatility must be non-negative, got {theta}"
            )));
        }
        Ok(Self { x, theta })
    }

    pub fn of(quote: &MarketQuote<T>, sigma: T) -> Self {
        Self {
            x: quote.log_moneyness(),
            theta: quote.total_vol(sigma),
        }
    }

    /// `(d+, d-)`.
    pub fn d(&self) -> (T, T) {
        let half = T::lit(0.5);
        let d_plus = -self.x / self.theta + half * self.theta;
        (d_plus, d_plus - self.theta)
    }
}

/// Standard normal cumulative distribution function, `N(u) = erfc(-u/√2)/2`.
pub fn std_normal_cdf<T: Real>(u: T) -> T {
    T::lit(0.5) * (-u * T::FRAC_1_SQRT_2()).erfc()
}

/// Standard normal density.
pub fn std_normal_pdf<T: Real>(u: T) -> T {
    let inv_sqrt_2pi = T::FRAC_1_SQRT_2() * T::FRAC_2_SQRT_PI() * T::lit(0.5);
    inv_sqrt_2pi * (-T::lit(0.5) * u * u).exp()
}

/// `TV/S` as a function of `(x, θ)`.
pub fn time_value_ratio<T: Real>(x: T, theta: T) -> T {
    if !(theta >= T::zero()) {
        return T::nan();
    }
    if theta == T::zero() {
        return T::zero();
    }
    if theta.is_infinite() {
        return T::one().min(x.exp());
    }
    // e^{-x/2}·TV/S is even in x, so an in-the-money strike reduces to the
    // mirrored out-of-the-money call.
    if x < T::zero() {
        return x.exp() * otm_call_ratio(-x, theta);
    }
    otm_call_ratio(x, theta)
}

/// `C/S` for `x ≥ 0`.
///
/// Deep out of the money `N(d+)` and `e^x N(d-)` agree to many digits. There
/// the difference is taken in Mills-ratio form,
/// `φ(d+)·∫₀^∞ e^{-at - t²/2}(1 - e^{-θt}) dt` with `a = -d+`, whose integrand
/// is positive.
fn otm_call_ratio<T: Real>(x: T, theta: T) -> T {
    let (d_plus, d_minus) = Moneyness { x, theta }.d();
    let first = std_normal_cdf(d_plus);
    let direct = first - x.exp() * std_normal_cdf(d_minus);
    let a = -d_plus;
    if a < T::one() || direct * T::lit(8.0) > first {
        return direct.max(T::zero());
    }
    let integrand = |t: T| (-a * t - T::lit(0.5) * t * t).exp() * -(-theta * t).exp_m1();
    let upper = (T::lit(60.0) / a).min(T::lit(13.0));
    let (mills, _) = quadrature::integrate(integrand, T::zero(), upper, T::zero(), T::lit(1e-15));
    std_normal_pdf(d_plus) * mills
}

/// `CC/S = 1 - C/S` as a function of `(x, θ)`.
pub fn covered_call_ratio<T: Real>(x: T, theta: T) -> T {
    if !(theta >= T::zero()) {
        return T::nan();
    }
    if theta == T::zero() {
        return T::one().min(x.exp());
    }
    if theta.is_infinite() {
        return T::zero();
    }
    let (d_plus, d_minus) = Moneyness { x, theta }.d();
    std_normal_cdf(-d_plus) + x.exp() * std_normal_cdf(d_minus)
}

/// `C/S` as a function of `(x, θ)`.
pub fn call_ratio<T: Real>(x: T, theta: T) -> T {
    (T::one() - x.exp()).max(T::zero()) + time_value_ratio(x, theta)
}

/// `BS(S, K, T, σ) = S·N(d+) - K·N(d-)`; intrinsic value when `σ√T = 0`.
pub fn bs_call_price<T: Real>(quote: &MarketQuote<T>, sigma: T) -> T {
    let m = Moneyness::of(quote, sigma);
    quote.intrinsic() + quote.spot * time_value_ratio(m.x, m.theta)
}

/// `TV = BS - (S-K)_+`.
pub fn time_value<T: Real>(quote: &MarketQuote<T>, sigma: T) -> T {
    let m = Moneyness::of(quote, sigma);
    quote.spot * time_value_ratio(m.x, m.theta)
}

/// `CC = S - BS`.
pub fn covered_call<T: Real>(quote: &MarketQuote<T>, sigma: T) -> T {
    let m = Moneyness::of(quote, sigma);
    quote.spot * covered_call_ratio(m.x, m.theta)
}

/// `∂BS/∂σ = S√T·φ(d+)`.
pub fn vega<T: Real>(quote: &MarketQuote<T>, sigma: T) -> T {
    let sqrt_t = quote.maturity.sqrt();
    let m = Moneyness::of(quote, sigma);
    if m.theta == T::zero() {
        return if m.x == T::zero() {
            quote.spot * sqrt_t * std_normal_pdf(T::zero())
        } else {
            T::zero()
        };
    }
    let (d_plus, _) = m.d();
    quote.spot * sqrt_t * std_normal_pdf(d_plus)
}

/// At the money `C/S = erf(θ/(2√2))`.
pub fn atm_call_closed_form<T: Real>(theta: T) -> T {
    (theta * T::FRAC_1_SQRT_2() * T::lit(0.5)).erf()
}

/// At the money `CC/S = erfc(θ/(2√2))`.
pub fn atm_covered_call_closed_form<T: Real>(theta: T) -> T {
    (theta * T::FRAC_1_SQRT_2() * T::lit(0.5)).erfc()
}

/// `∫₀^θ exp(-x²/(2ξ²) - ξ²/8) dξ`, which equals `√(2π)·e^{-x/2}·TV/S`.
///
/// When `x²/(2θ²) ≥ 1` the integrand is concentrated near `ξ = θ`; the
/// substitution `ξ = θ/√(1+w)` factors out `exp(-x²/(2θ²) - θ²/8)` and leaves
/// a smooth, exponentially decaying integrand on `w ≥ 0`. Otherwise the
/// integral is taken directly over `[0, θ]`, where the essential singularity at
/// zero is flat to all orders.
pub fn tv_integral<T: Real>(x: T, theta: T) -> T {
    if !(theta > T::zero()) {
        return T::zero();
    }
    let half = T::lit(0.5);
    let eighth = T::lit(0.125);
    let rel_tol = T::lit(1e-14);
    let a = half * x * x / (theta * theta);
    let c = eighth * theta * theta;
    if a < T::one() {
        let f = |xi: T| {
            if xi == T::zero() {
                T::zero()
            } else {
                (-half * x * x / (xi * xi) - eighth * xi * xi).exp()
            }
        };
        let (v, _) = quadrature::integrate(f, T::zero(), theta, T::zero(), rel_tol);
        return v;
    }
    let g = |w: T| {
        let z = T::one() + w;
        (-a * w + c * w / z).exp() / (z * z.sqrt())
    };
    // e^{-a w + c} bounds the integrand; past `upper` it is below e^{-60}.
    let upper = (T::lit(60.0) + c) / a;
    let (j, _) = quadrature::integrate(g, T::zero(), upper, T::zero(), rel_tol);
    half * theta * (-a - c).exp() * j
}

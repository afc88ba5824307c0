//! Expansion-free implied volatility: bracket, then bisection-guarded Newton
//! on the call price.

use crate::black_scholes::{bs_call_price, vega, MarketQuote};
use crate::error::{Error, Result};
use crate::scalar::Real;

const START: f64 = 0.5;
const MAX_EXPANSIONS: usize = 200;
const MAX_ITERATIONS: usize = 2000;

/// Volatilities with sign-separated price errors `f_lo ≤ 0 ≤ f_hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketState<T> {
    pub lo: T,
    pub hi: T,
    pub f_lo: T,
    pub f_hi: T,
}

impl<T: Real> BracketState<T> {
    /// Grows geometrically from `σ = 0.5` until the price error changes sign.
    pub fn expand(f: impl Fn(T) -> T) -> Result<Self> {
        let two = T::lit(2.0);
        let start = T::lit(START);
        let f_start = f(start);
        let mut state = BracketState {
            lo: start,
            hi: start,
            f_lo: f_start,
            f_hi: f_start,
        };
        if f_start <= T::zero() {
            for _ in 0..MAX_EXPANSIONS {
                if state.f_hi >= T::zero() {
                    return Ok(state);
                }
                state.lo = state.hi;
                state.f_lo = state.f_hi;
                state.hi = state.hi * two;
                state.f_hi = f(state.hi);
            }
            if state.f_hi >= T::zero() {
                return Ok(state);
            }
        } else {
            for _ in 0..MAX_EXPANSIONS {
                if state.f_lo <= T::zero() {
                    return Ok(state);
                }
                state.hi = state.lo;
                state.f_hi = state.f_lo;
                state.lo = state.lo / two;
                state.f_lo = f(state.lo);
            }
            if state.f_lo <= T::zero() {
                return Ok(state);
            }
        }
        Err(Error::NonConvergence {
            iterations: MAX_EXPANSIONS,
            last: state.hi.to_f64().unwrap_or(f64::NAN),
        })
    }

    pub fn width(&self) -> T {
        self.hi - self.lo
    }

    /// Replaces the endpoint on the same side of the root as `sigma`.
    pub fn update(&mut self, sigma: T, f: T) {
        if f <= T::zero() {
            self.lo = sigma;
            self.f_lo = f;
        } else {
            self.hi = sigma;
            self.f_hi = f;
        }
    }

    fn midpoint(&self) -> T {
        if self.lo > T::zero() && self.hi > T::lit(4.0) * self.lo {
            (self.lo * self.hi).sqrt()
        } else {
            T::lit(0.5) * (self.lo + self.hi)
        }
    }

    /// The endpoint with the smaller price error.
    pub fn best(&self) -> (T, T) {
        if self.f_hi.abs() < self.f_lo.abs() {
            (self.hi, self.f_hi)
        } else {
            (self.lo, self.f_lo)
        }
    }
}

/// The unique `σ` with `BS(σ)` equal to the quote's price.
///
/// Iterates until the bracket cannot shrink further in double precision, so
/// the answer is as accurate as the price function allows; the repriced
/// error is then checked against `tol`.
pub fn implied_vol_exact<T: Real>(quote: &MarketQuote<T>, tol: T) -> Result<T> {
    let target = quote.require_interior_price()?;
    if !(quote.maturity() > T::zero()) {
        return Err(Error::InvalidQuote(
            "maturity must be positive to imply a volatility".into(),
        ));
    }
    let f = |sigma: T| bs_call_price(quote, sigma) - target;
    let mut bracket = BracketState::expand(f)?;
    let eps = T::epsilon();
    let mut sigma = bracket.best().0;
    let mut last_width = bracket.width();
    for _ in 0..MAX_ITERATIONS {
        if bracket.f_lo == T::zero() {
            sigma = bracket.lo;
            break;
        }
        if bracket.f_hi == T::zero() {
            sigma = bracket.hi;
            break;
        }
        if bracket.width() <= T::lit(2.0) * eps * bracket.hi {
            sigma = bracket.best().0;
            break;
        }
        let (x0, f0) = bracket.best();
        let slope = vega(quote, x0);
        let newton = x0 - f0 / slope;
        let mut next = if newton > bracket.lo && newton < bracket.hi && newton.is_finite() {
            newton
        } else {
            bracket.midpoint()
        };
        // Fall back to bisection when Newton fails to halve the bracket.
        if bracket.width() > T::lit(0.5) * last_width {
            next = bracket.midpoint();
        }
        if next <= bracket.lo || next >= bracket.hi {
            sigma = bracket.best().0;
            break;
        }
        last_width = bracket.width();
        let fx = f(next);
        bracket.update(next, fx);
        sigma = next;
        if fx == T::zero() {
            break;
        }
    }
    let (best, f_best) = bracket.best();
    if f(sigma).abs() > f_best.abs() {
        sigma = best;
    }
    if f(sigma).abs() > tol {
        return Err(Error::NonConvergence {
            iterations: MAX_ITERATIONS,
            last: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    Ok(sigma)
}

/// `implied_vol_exact` with the default tolerance `1e-12·S`.
pub fn implied_vol_exact_default<T: Real>(quote: &MarketQuote<T>) -> Result<T> {
    implied_vol_exact(
        quote,
        T::lit(crate::inversion::PRICE_TOLERANCE) * quote.spot(),
    )
}

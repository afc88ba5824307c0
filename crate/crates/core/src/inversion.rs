//! Implied volatility from the asymptotic inversion formulas, with optional
//! Newton polishing against the exact Black-Scholes price.

use serde::Serialize;

use crate::black_scholes::{covered_call_ratio, time_value_ratio, vega, MarketQuote};
use crate::coefficients::{a_coeff, b_coeff, c_coeff, erf_inv_series};
use crate::error::{Error, Result};
use crate::expansions::ExpansionRegime;
use crate::scalar::Real;
use crate::transseries::{solve_inversion, LogPowerSeries};

/// Order at which [`invert_fifth_order`] and the regime formulas are exact.
pub const DEFAULT_ORDER: u32 = 3;
/// Terms of the at-the-money inverse series used when none are requested.
pub const DEFAULT_ATM_TERMS: usize = 25;
/// `|x|` below which a quote is treated as at the money.
pub const ATM_THRESHOLD: f64 = 1e-8;
/// Relative price tolerance of the refinement, in units of spot.
pub const PRICE_TOLERANCE: f64 = 1e-12;

const FIXED_POINT_TOL: f64 = 1e-12;
const FIXED_POINT_ITERATIONS: usize = 50;
const NEWTON_ITERATIONS: usize = 100;

/// `λ = -1/ln r` for a price ratio `r ∈ (0, 1)`.
pub fn lambda_of_ratio<T: Real>(r: T) -> Result<T> {
    if r > T::zero() && r < T::one() {
        Ok(-r.ln().recip())
    } else {
        Err(Error::RatioOutsideBand(r.to_f64().unwrap_or(f64::NAN)))
    }
}

fn require_small_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda < T::one() {
        Ok(())
    } else {
        Err(Error::OutsideRegime {
            lambda: lambda.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// Closed-form solution of the master equation through `λ³`:
/// `v = λ − βλ²L + γλ² + β²λ³L² + (β² − 2βγ)λ³L + (γ² − βγ − α₁)λ³`, `L = ln λ`.
pub fn invert_fifth_order<T: Real>(lambda: T, beta: T, gamma: T, alpha1: T) -> Result<T> {
    require_small_lambda(lambda)?;
    let l = lambda.ln();
    let l2 = lambda * lambda;
    let l3 = l2 * lambda;
    Ok(lambda - beta * l2 * l
        + gamma * l2
        + beta * beta * l3 * l * l
        + (beta * beta - T::lit(2.0) * beta * gamma) * l3 * l
        + (gamma * gamma - beta * gamma - alpha1) * l3)
}

/// How the solution `v` of the master equation maps to total variance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceScale {
    /// `θ² = (x²/2)·v`.
    HalfSquareMoneyness,
    /// `θ² = 8/v`.
    EightOver,
}

/// The `(β, γ, α_k, λ)` of the master equation for one regime.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeParams<T> {
    pub beta: T,
    pub gamma: T,
    /// `α_0 = 1, α_1, …`.
    pub alphas: Vec<T>,
    pub lambda: T,
    pub scale: VarianceScale,
    pub x: T,
}

fn alternating_alphas<T: Real>(count: usize, coeff: impl Fn(usize) -> T) -> Vec<T> {
    let mut sign = T::one();
    (0..count)
        .map(|k| {
            let a = sign * coeff(k);
            sign = sign * T::lit(-0.5);
            a
        })
        .collect()
}

fn alpha_count(order: u32) -> usize {
    order.max(2) as usize - 1
}

impl<T: Real> RegimeParams<T> {
    /// `θ → 0`: `β = 3/2`, `γ = ln(4√π e^{-x/2}/|x|)`, `α_k = (−1)^k/2^k a_k(x²/8)`.
    pub fn short_expiry(x: T, lambda: T, order: u32) -> Result<Self> {
        if x == T::zero() {
            return Err(Error::RouteToAtm);
        }
        let z = x * x / T::lit(8.0);
        Ok(Self {
            beta: T::lit(1.5),
            gamma: (T::lit(4.0) * T::PI().sqrt() * (-T::lit(0.5) * x).exp() / x.abs()).ln(),
            alphas: alternating_alphas(alpha_count(order), |k| a_coeff(k, &z)),
            lambda,
            scale: VarianceScale::HalfSquareMoneyness,
            x,
        })
    }

    /// `θ → ∞`: `β = 1/2`, `γ = ln(√π e^{-x/2})`, `α_k = (−1)^k/2^k c_k(x²/8)`.
    pub fn large_expiry(x: T, lambda: T, order: u32) -> Self {
        let z = x * x / T::lit(8.0);
        Self {
            beta: T::lit(0.5),
            gamma: (T::PI().sqrt() * (-T::lit(0.5) * x).exp()).ln(),
            alphas: alternating_alphas(alpha_count(order), |k| c_coeff(k, &z)),
            lambda,
            scale: VarianceScale::EightOver,
            x,
        }
    }

    /// `|x| → ∞` at total volatility `θ`: `β = 1`,
    /// `γ = ln(2√(2π) e^{-x/2}/θ) + θ²/8`, `α_k = (−1)^k/2^k b_k(θ²/4)`.
    pub fn large_strike(x: T, theta: T, lambda: T, order: u32) -> Result<Self> {
        if x == T::zero() {
            return Err(Error::RouteToAtm);
        }
        let t2 = theta * theta;
        let z = t2 / T::lit(4.0);
        let two_sqrt_2pi = T::lit(2.0) * (T::lit(2.0) * T::PI()).sqrt();
        Ok(Self {
            beta: T::one(),
            gamma: (two_sqrt_2pi * (-T::lit(0.5) * x).exp() / theta).ln() + t2 / T::lit(8.0),
            alphas: alternating_alphas(alpha_count(order), |k| b_coeff(k, &z)),
            lambda,
            scale: VarianceScale::HalfSquareMoneyness,
            x,
        })
    }

    pub fn alpha1(&self) -> T {
        self.alphas.get(1).copied().unwrap_or_else(T::zero)
    }

    /// The series `v(λ)` through `λ^order`.
    pub fn series(&self, order: u32) -> Result<LogPowerSeries<T>> {
        solve_inversion(&self.beta, &self.gamma, &self.alphas, order)
    }

    /// `v(λ)` truncated at `λ^order`.
    pub fn v(&self, order: u32) -> Result<T> {
        require_small_lambda(self.lambda)?;
        if order == DEFAULT_ORDER {
            return invert_fifth_order(self.lambda, self.beta, self.gamma, self.alpha1());
        }
        self.series(order)?.eval(self.lambda)
    }

    /// Total variance `θ²` at truncation order `order`.
    ///
    /// For `θ² = 8/v` the reciprocal is expanded as a series rather than taken
    /// numerically, which gives the large-expiry formula in its printed form
    /// `(8/λ)[1 + βλL − γλ − β²λ²L + (βγ + α₁)λ²]` at order three.
    pub fn theta_sq(&self, order: u32) -> Result<T> {
        require_small_lambda(self.lambda)?;
        match self.scale {
            VarianceScale::HalfSquareMoneyness => {
                Ok(self.x * self.x * T::lit(0.5) * self.v(order)?)
            }
            VarianceScale::EightOver => {
                let u = if order == DEFAULT_ORDER {
                    closed_form_inner(self.beta, self.gamma, self.alpha1())
                } else {
                    let v = self.series(order)?;
                    // v/λ: drop one power of λ.
                    LogPowerSeries::from_terms(order - 1, v.terms().map(|(i, j, c)| (i - 1, j, *c)))
                };
                let recip = u.recip()?;
                Ok(T::lit(8.0) / self.lambda * recip.eval(self.lambda)?)
            }
        }
    }
}

/// `v/λ` through `λ²` from the closed form.
fn closed_form_inner<T: Real>(beta: T, gamma: T, alpha1: T) -> LogPowerSeries<T> {
    LogPowerSeries::from_terms(
        2,
        [
            (0, 0, T::one()),
            (1, 1, -beta),
            (1, 0, gamma),
            (2, 2, beta * beta),
            (2, 1, beta * beta - T::lit(2.0) * beta * gamma),
            (2, 0, gamma * gamma - beta * gamma - alpha1),
        ],
    )
}

/// Implied volatility with diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VolSolution<T> {
    pub sigma: T,
    pub theta_sq: T,
    /// Expansion used for the seed; `None` for the exact solver or the fallback seed.
    pub regime: Option<ExpansionRegime>,
    /// The small parameter of the seed's regime, when one was computed.
    pub lambda: Option<T>,
    pub order_used: u32,
    pub refined: bool,
    /// `BS(σ) − observed price`.
    pub residual: T,
    pub iterations: usize,
    /// Volatility before refinement.
    pub seed_sigma: T,
}

impl<T: Real> VolSolution<T> {
    fn seed(
        quote: &MarketQuote<T>,
        theta_sq: T,
        regime: Option<ExpansionRegime>,
        lambda: Option<T>,
        order_used: u32,
    ) -> Result<Self> {
        let target = quote.require_price()?;
        let maturity = require_maturity(quote)?;
        if !(theta_sq > T::zero() && theta_sq.is_finite()) {
            return Err(Error::OutsideRegime {
                lambda: lambda.and_then(|l| l.to_f64()).unwrap_or(f64::NAN),
            });
        }
        let sigma = (theta_sq / maturity).sqrt();
        Ok(Self {
            sigma,
            theta_sq,
            regime,
            lambda,
            order_used,
            refined: false,
            residual: crate::black_scholes::bs_call_price(quote, sigma) - target,
            iterations: 0,
            seed_sigma: sigma,
        })
    }

    /// Relative error of the seed against a reference volatility.
    pub fn seed_rel_error(&self, reference: T) -> T {
        ((self.seed_sigma - reference) / reference).abs()
    }
}

fn require_maturity<T: Real>(quote: &MarketQuote<T>) -> Result<T> {
    let t = quote.maturity();
    if t > T::zero() {
        Ok(t)
    } else {
        Err(Error::InvalidQuote(
            "maturity must be positive to imply a volatility".into(),
        ))
    }
}

fn tv_lambda<T: Real>(quote: &MarketQuote<T>) -> Result<T> {
    quote.require_interior_price()?;
    lambda_of_ratio(quote.time_value_ratio()?)
}

fn cc_lambda<T: Real>(quote: &MarketQuote<T>) -> Result<T> {
    quote.require_interior_price()?;
    lambda_of_ratio(quote.covered_call_ratio()?)
}

/// Short-expiry seed: `θ² = (x²/2)·v(λ)` with `λ = −1/ln(TV/S)`.
pub fn implied_vol_short_expiry<T: Real>(quote: &MarketQuote<T>) -> Result<VolSolution<T>> {
    implied_vol_short_expiry_order(quote, DEFAULT_ORDER)
}

pub fn implied_vol_short_expiry_order<T: Real>(
    quote: &MarketQuote<T>,
    order: u32,
) -> Result<VolSolution<T>> {
    let x = quote.log_moneyness();
    if x == T::zero() {
        return Err(Error::RouteToAtm);
    }
    let lambda = tv_lambda(quote)?;
    let params = RegimeParams::short_expiry(x, lambda, order)?;
    let theta_sq = params.theta_sq(order)?;
    VolSolution::seed(
        quote,
        theta_sq,
        Some(ExpansionRegime::ShortMaturity),
        Some(lambda),
        order,
    )
}

/// Large-expiry seed: `σ²T = (8/λ)[1 + ½λL − γλ − ¼λ²L + (γ/2 + α₁)λ²]`
/// with `λ = −1/ln(CC/S)`.
pub fn implied_vol_large_expiry<T: Real>(quote: &MarketQuote<T>) -> Result<VolSolution<T>> {
    implied_vol_large_expiry_order(quote, DEFAULT_ORDER)
}

pub fn implied_vol_large_expiry_order<T: Real>(
    quote: &MarketQuote<T>,
    order: u32,
) -> Result<VolSolution<T>> {
    let lambda = cc_lambda(quote)?;
    let params = RegimeParams::large_expiry(quote.log_moneyness(), lambda, order);
    let theta_sq = params.theta_sq(order)?;
    VolSolution::seed(
        quote,
        theta_sq,
        Some(ExpansionRegime::LargeMaturity),
        Some(lambda),
        order,
    )
}

/// Large-strike seed. The regime's `γ` and `α_k` depend on `θ`, so
/// `θ² = (x²/2)·v(λ; θ)` is iterated to a fixed point starting from
/// `theta_seed`.
pub fn implied_vol_large_strike<T: Real>(
    quote: &MarketQuote<T>,
    theta_seed: T,
) -> Result<VolSolution<T>> {
    implied_vol_large_strike_order(quote, theta_seed, DEFAULT_ORDER)
}

pub fn implied_vol_large_strike_order<T: Real>(
    quote: &MarketQuote<T>,
    theta_seed: T,
    order: u32,
) -> Result<VolSolution<T>> {
    let x = quote.log_moneyness();
    if x == T::zero() {
        return Err(Error::RouteToAtm);
    }
    let lambda = tv_lambda(quote)?;
    require_small_lambda(lambda)?;
    let tol = T::lit(FIXED_POINT_TOL);
    let mut theta = theta_seed;
    for _ in 0..FIXED_POINT_ITERATIONS {
        if !(theta > T::zero() && theta.is_finite()) {
            break;
        }
        let theta_sq = RegimeParams::large_strike(x, theta, lambda, order)?.theta_sq(order)?;
        if !(theta_sq > T::zero()) {
            break;
        }
        let next = theta_sq.sqrt();
        if (next - theta).abs() <= tol * theta {
            return VolSolution::seed(
                quote,
                next * next,
                Some(ExpansionRegime::LargeStrike),
                Some(lambda),
                order,
            );
        }
        theta = next;
    }
    Err(Error::NonConvergence {
        iterations: FIXED_POINT_ITERATIONS,
        last: theta.to_f64().unwrap_or(f64::NAN),
    })
}

/// At-the-money power series in `C/S`:
/// `σ = √(2π/T)·(C/S)·Σ π^k η_k/(4^k(2k+1))·(C/S)^{2k}`.
pub fn implied_vol_atm<T: Real>(quote: &MarketQuote<T>, n_terms: usize) -> Result<VolSolution<T>> {
    if n_terms == 0 {
        return Err(Error::InvalidArgument(
            "at least one series term is required".into(),
        ));
    }
    let (s, k) = (quote.spot(), quote.strike());
    if (k - s).abs() > T::lit(1e-12) * s {
        return Err(Error::RouteToWings);
    }
    quote.require_interior_price()?;
    let r = quote.require_price()? / s;
    let maturity = require_maturity(quote)?;
    let theta = T::lit(2.0) * T::SQRT_2() * erf_inv_series(r, n_terms);
    let lambda = lambda_of_ratio(r).ok();
    let mut sol = VolSolution::seed(
        quote,
        theta * theta,
        Some(ExpansionRegime::AtmSmall),
        lambda,
        n_terms as u32,
    )?;
    sol.sigma = theta / maturity.sqrt();
    sol.seed_sigma = sol.sigma;
    Ok(sol)
}

/// Which price the refinement matches in log space.
enum Side<T> {
    /// `ln TV(σ) − ln TV*`.
    TimeValue(T),
    /// `ln CC* − ln CC(σ)`.
    CoveredCall(T),
}

impl<T: Real> Side<T> {
    /// `h(σ)` and `h'(σ)`, both increasing in `σ`.
    fn eval(&self, quote: &MarketQuote<T>, sigma: T) -> (T, T) {
        let x = quote.log_moneyness();
        let theta = quote.total_vol(sigma);
        let s = quote.spot();
        let dv = vega(quote, sigma);
        match *self {
            Side::TimeValue(target) => {
                let tv = s * time_value_ratio(x, theta);
                (tv.ln() - target.ln(), dv / tv)
            }
            Side::CoveredCall(target) => {
                let cc = s * covered_call_ratio(x, theta);
                (target.ln() - cc.ln(), dv / cc)
            }
        }
    }
}

/// Safeguarded Newton iteration on the log of the smaller of `TV` and `CC`.
///
/// A bracket `[lo, hi]` around the root is narrowed at every step; a Newton
/// step that leaves it is replaced by bisection, or by doubling while no
/// upper bound is known. Iteration stops once `σ` stops moving at double
/// precision; the final price residual must be within `tol`.
pub fn newton_refine<T: Real>(
    quote: &MarketQuote<T>,
    sigma_seed: T,
    tol: T,
) -> Result<VolSolution<T>> {
    let target = quote.require_interior_price()?;
    require_maturity(quote)?;
    if !(sigma_seed > T::zero() && sigma_seed.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "seed volatility must be positive, got {sigma_seed}"
        )));
    }
    let tv_star = target - quote.intrinsic();
    let cc_star = quote.spot() - target;
    let side = if tv_star <= cc_star {
        Side::TimeValue(tv_star)
    } else {
        Side::CoveredCall(cc_star)
    };

    let eps = T::epsilon();
    let step_tol = T::lit(4.0) * eps;
    let mut lo = T::zero();
    let mut hi = T::infinity();
    let mut sigma = sigma_seed;
    let mut iterations = 0;
    loop {
        let (h, dh) = side.eval(quote, sigma);
        if h.is_nan() {
            return Err(Error::NonConvergence {
                iterations,
                last: sigma.to_f64().unwrap_or(f64::NAN),
            });
        }
        if h.abs() <= step_tol {
            break;
        }
        if h < T::zero() {
            lo = lo.max(sigma);
        } else {
            hi = hi.min(sigma);
        }
        if hi.is_finite() && hi - lo <= step_tol * hi {
            break;
        }
        if iterations >= NEWTON_ITERATIONS {
            return Err(Error::NonConvergence {
                iterations,
                last: sigma.to_f64().unwrap_or(f64::NAN),
            });
        }
        let mut next = sigma - h / dh;
        if !(next > lo && next < hi) || !next.is_finite() {
            next = if hi.is_finite() {
                if lo > T::zero() && hi > T::lit(4.0) * lo {
                    (lo * hi).sqrt()
                } else {
                    T::lit(0.5) * (lo + hi)
                }
            } else {
                T::lit(2.0) * sigma.max(lo)
            };
        }
        iterations += 1;
        let moved = (next - sigma).abs();
        sigma = next;
        if moved <= step_tol * sigma {
            break;
        }
    }

    let residual = crate::black_scholes::bs_call_price(quote, sigma) - target;
    if residual.abs() > tol {
        return Err(Error::NonConvergence {
            iterations,
            last: sigma.to_f64().unwrap_or(f64::NAN),
        });
    }
    let maturity = quote.maturity();
    Ok(VolSolution {
        sigma,
        theta_sq: sigma * sigma * maturity,
        regime: None,
        lambda: None,
        order_used: 0,
        refined: true,
        residual,
        iterations,
        seed_sigma: sigma_seed,
    })
}

/// Default refinement tolerance for a quote: `1e-12·S`.
pub fn default_tolerance<T: Real>(quote: &MarketQuote<T>) -> T {
    T::lit(PRICE_TOLERANCE) * quote.spot()
}

fn refine<T: Real>(quote: &MarketQuote<T>, seed: VolSolution<T>, tol: T) -> Result<VolSolution<T>> {
    let refined = newton_refine(quote, seed.sigma, tol)?;
    Ok(VolSolution {
        regime: seed.regime,
        lambda: seed.lambda,
        order_used: seed.order_used,
        ..refined
    })
}

/// `|x|·θ` from which the large-strike form replaces the short-expiry one
/// within the time-value family, `θ` being the short-expiry seed.
pub const LARGE_STRIKE_SWITCH: f64 = 4.0;
/// Highest truncation order tried when the order is chosen automatically.
pub const MAX_AUTO_ORDER: u32 = 8;

/// Evaluates `seed` at orders `2..=MAX_AUTO_ORDER` and keeps the order whose
/// last increment in `θ` is smallest, the usual stopping rule for an
/// asymptotic series.
fn smallest_increment<T: Real>(
    seed: impl Fn(u32) -> Result<VolSolution<T>>,
) -> Result<VolSolution<T>> {
    let mut best: Option<(T, VolSolution<T>)> = None;
    let mut previous = seed(2).ok();
    for order in 3..=MAX_AUTO_ORDER {
        let current = match seed(order) {
            Ok(s) => s,
            Err(_) => {
                previous = None;
                continue;
            }
        };
        if let Some(prev) = &previous {
            let step = (current.theta_sq.sqrt() - prev.theta_sq.sqrt()).abs();
            if best.as_ref().is_none_or(|(b, _)| step < *b) {
                best = Some((step, current.clone()));
            }
        }
        previous = Some(current);
    }
    match best {
        Some((_, s)) => Ok(s),
        None => seed(DEFAULT_ORDER),
    }
}

/// Expansion seed chosen by comparing `λ` of the time value and of the
/// covered call, without refinement.
///
/// With `order = None` the truncation order is chosen per quote by
/// [`MAX_AUTO_ORDER`]-bounded smallest-increment truncation. When the chosen
/// expansion yields no positive variance, a crude seed is used instead.
pub fn auto_seed<T: Real>(quote: &MarketQuote<T>, order: Option<u32>) -> Result<VolSolution<T>> {
    quote.require_interior_price()?;
    require_maturity(quote)?;
    let x = quote.log_moneyness();
    if x.abs() <= T::lit(ATM_THRESHOLD) {
        // Within the threshold the strike is snapped to spot for the series.
        let price = quote.require_price()?;
        let atm = MarketQuote::priced(quote.spot(), quote.spot(), quote.maturity(), price)?;
        let terms = order.map_or(DEFAULT_ATM_TERMS, |n| n as usize);
        let mut seed = implied_vol_atm(&atm, terms)?;
        seed.residual = crate::black_scholes::bs_call_price(quote, seed.sigma) - price;
        return Ok(seed);
    }
    let lambda_tv = tv_lambda(quote).unwrap_or(T::infinity());
    let lambda_cc = cc_lambda(quote).unwrap_or(T::infinity());
    let lambda = lambda_tv.min(lambda_cc);
    if lambda >= T::one() {
        return fallback_seed(quote, lambda);
    }
    let family = |m: u32| -> Result<VolSolution<T>> {
        if lambda_cc < lambda_tv {
            implied_vol_large_expiry_order(quote, m)
        } else {
            let short = implied_vol_short_expiry_order(quote, m)?;
            let theta = short.theta_sq.sqrt();
            if x.abs() * theta >= T::lit(LARGE_STRIKE_SWITCH) {
                implied_vol_large_strike_order(quote, theta, m).or(Ok(short))
            } else {
                Ok(short)
            }
        }
    };
    let seed = match order {
        Some(m) => family(m),
        None => smallest_increment(family),
    };
    seed.or_else(|_| fallback_seed(quote, lambda))
}

/// Seed for quotes where neither ratio is below `e^{-1}`: total volatility
/// matched to the at-the-money scale `√(2π)·TV/S`, floored by `√(2|x|)`.
fn fallback_seed<T: Real>(quote: &MarketQuote<T>, lambda: T) -> Result<VolSolution<T>> {
    let x = quote.log_moneyness();
    let tv = quote.time_value_ratio()?;
    let theta = ((T::lit(2.0) * T::PI()).sqrt() * tv).max((T::lit(2.0) * x.abs()).sqrt());
    VolSolution::seed(
        quote,
        theta * theta,
        None,
        lambda.is_finite().then_some(lambda),
        0,
    )
}

/// Dispatches on `λ` and always refines; `seed_sigma` keeps the expansion value.
pub fn implied_vol_auto<T: Real>(quote: &MarketQuote<T>) -> Result<VolSolution<T>> {
    let seed = auto_seed(quote, None)?;
    refine(quote, seed, default_tolerance(quote))
}

/// Which method [`implied_vol`] uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RegimeChoice {
    #[default]
    Auto,
    Short,
    LargeT,
    LargeK,
    Atm,
    Exact,
}

impl std::str::FromStr for RegimeChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "auto" => RegimeChoice::Auto,
            "short" => RegimeChoice::Short,
            "large-t" => RegimeChoice::LargeT,
            "large-k" => RegimeChoice::LargeK,
            "atm" => RegimeChoice::Atm,
            "exact" => RegimeChoice::Exact,
            other => return Err(Error::InvalidArgument(format!("unknown regime '{other}'"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpliedOptions<T> {
    pub regime: RegimeChoice,
    /// Truncation order `M` (series terms for the at-the-money path).
    pub order: Option<u32>,
    pub refine: bool,
    /// Price tolerance; `1e-12·S` when absent.
    pub tol: Option<T>,
}

impl<T> Default for ImpliedOptions<T> {
    fn default() -> Self {
        Self {
            regime: RegimeChoice::Auto,
            order: None,
            refine: true,
            tol: None,
        }
    }
}

/// Implied volatility by the requested method.
pub fn implied_vol<T: Real>(
    quote: &MarketQuote<T>,
    opts: &ImpliedOptions<T>,
) -> Result<VolSolution<T>> {
    if let Some(0) = opts.order {
        return Err(Error::InvalidArgument("order must be at least 1".into()));
    }
    let tol = opts.tol.unwrap_or_else(|| default_tolerance(quote));
    let order = opts.order.unwrap_or(DEFAULT_ORDER);
    let seed = match opts.regime {
        RegimeChoice::Exact => {
            let sigma = crate::oracle::implied_vol_exact(quote, tol)?;
            let target = quote.require_price()?;
            return Ok(VolSolution {
                sigma,
                theta_sq: sigma * sigma * quote.maturity(),
                regime: None,
                lambda: None,
                order_used: 0,
                refined: true,
                residual: crate::black_scholes::bs_call_price(quote, sigma) - target,
                iterations: 0,
                seed_sigma: sigma,
            });
        }
        RegimeChoice::Auto => auto_seed(quote, opts.order)?,
        RegimeChoice::Short => implied_vol_short_expiry_order(quote, order)?,
        RegimeChoice::LargeT => implied_vol_large_expiry_order(quote, order)?,
        RegimeChoice::LargeK => {
            let short = implied_vol_short_expiry_order(quote, order)?;
            implied_vol_large_strike_order(quote, short.theta_sq.sqrt(), order)?
        }
        RegimeChoice::Atm => {
            let terms = opts.order.map_or(DEFAULT_ATM_TERMS, |n| n as usize);
            implied_vol_atm(quote, terms)?
        }
    };
    if opts.refine {
        refine(quote, seed, tol)
    } else {
        Ok(seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::black_scholes::bs_call_price;

    fn priced(s: f64, k: f64, t: f64, sigma: f64) -> MarketQuote<f64> {
        let q = MarketQuote::new(s, k, t).unwrap();
        q.with_price(bs_call_price(&q, sigma)).unwrap()
    }

    #[test]
    fn lambda_examples() {
        assert!((lambda_of_ratio((-1.0f64).exp()).unwrap() - 1.0).abs() < 1e-15);
        assert!((lambda_of_ratio((-10.0f64).exp()).unwrap() - 0.1).abs() < 1e-15);
        assert!(lambda_of_ratio(1.0f64).is_err());
        assert!(lambda_of_ratio(0.0f64).is_err());
    }

    #[test]
    fn fifth_order_formula() {
        assert_eq!(invert_fifth_order(0.05, 0.0, 0.0, 0.0).unwrap(), 0.05);
        let (l, b, g, a): (f64, f64, f64, f64) = (0.05, 1.5, 1.0, -2.0);
        let ll = l.ln();
        let want = l - b * l * l * ll
            + g * l * l
            + b * b * l.powi(3) * ll * ll
            + (b * b - 2.0 * b * g) * l.powi(3) * ll
            + (g * g - b * g - a) * l.powi(3);
        assert!((invert_fifth_order(l, b, g, a).unwrap() - want).abs() < 1e-16);
        assert!(invert_fifth_order(1.0, b, g, a).is_err());
    }

    #[test]
    fn short_expiry_parameters() {
        let p = RegimeParams::short_expiry(0.5f64, 0.1, 3).unwrap();
        let want = (4.0 * std::f64::consts::PI.sqrt() * (-0.25f64).exp() / 0.5).ln();
        assert!((p.gamma - want).abs() < 1e-15);
        assert!((p.alpha1() - (-1.5 - 0.25 / 16.0)).abs() < 1e-15);
        let q = RegimeParams::large_expiry(0.5f64, 0.1, 3);
        assert!((q.alpha1() - (-0.5 - 0.25 / 16.0)).abs() < 1e-15);
        let w = RegimeParams::large_strike(4.0f64, 0.5, 0.1, 3).unwrap();
        assert!((w.alpha1() - (-1.5 + 0.25 / 8.0)).abs() < 1e-15);
    }

    #[test]
    fn large_expiry_is_reciprocal_of_third_order_series() {
        let (x, lambda) = (0.3f64, 0.08f64);
        let p = RegimeParams::large_expiry(x, lambda, 3);
        let l = lambda.ln();
        let (g, a1) = (p.gamma, p.alpha1());
        let printed = 8.0 / lambda
            * (1.0 + 0.5 * lambda * l - g * lambda - 0.25 * lambda * lambda * l
                + (g / 2.0 + a1) * lambda * lambda);
        assert!((p.theta_sq(3).unwrap() - printed).abs() < 1e-12 * printed);
        // The engine at order three gives the same bracket.
        let engine = {
            let v = p.series(3).unwrap();
            let u = LogPowerSeries::from_terms(2, v.terms().map(|(i, j, c)| (i - 1, j, *c)));
            8.0 / lambda * u.recip().unwrap().eval(lambda).unwrap()
        };
        assert!((engine - printed).abs() < 1e-12 * printed);
    }

    #[test]
    fn short_expiry_round_trip() {
        let q = priced(1.0, 0.5f64.exp(), 0.05, 0.2);
        let s = implied_vol_short_expiry(&q).unwrap();
        assert!((s.sigma - 0.2).abs() < 2e-3, "{}", s.sigma);
        assert_eq!(s.regime, Some(ExpansionRegime::ShortMaturity));
        let atm = priced(1.0, 1.0, 0.05, 0.2);
        assert_eq!(implied_vol_short_expiry(&atm), Err(Error::RouteToAtm));
    }

    #[test]
    fn refine_from_far_seed() {
        let q = priced(100.0, 110.0, 0.25, 0.2);
        let s = newton_refine(&q, 2.0, 1e-10).unwrap();
        assert!((s.sigma - 0.2).abs() < 1e-13);
        let again = newton_refine(&q, s.sigma, 1e-10).unwrap();
        assert!((again.sigma - s.sigma).abs() <= 1e-15);
        assert_eq!(again.iterations, 0);
    }

    #[test]
    fn refine_rejects_band_edges() {
        let q = MarketQuote::priced(100.0, 80.0, 1.0, 20.0).unwrap();
        assert!(matches!(
            newton_refine(&q, 0.2, 1e-10),
            Err(Error::OutsideBand { .. })
        ));
    }

    #[test]
    fn atm_requires_atm() {
        let q = priced(100.0, 110.0, 1.0, 0.2);
        assert_eq!(implied_vol_atm(&q, 10), Err(Error::RouteToWings));
        let q = priced(100.0, 100.0, 1.0, 0.2);
        let s = implied_vol_atm(&q, 25).unwrap();
        assert!((s.sigma - 0.2).abs() < 1e-12);
    }

    #[test]
    fn regime_choice_parses() {
        assert_eq!(
            "large-k".parse::<RegimeChoice>().unwrap(),
            RegimeChoice::LargeK
        );
        assert!("bogus".parse::<RegimeChoice>().is_err());
    }
}

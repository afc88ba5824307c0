//! Implied lognormal volatility from asymptotic expansions of the
//! Black-Scholes price.
//!
//! The crate is generic over the scalar type: pricing and inversion accept any
//! [`Real`] (`f32`, `f64`), while the coefficient families and the
//! log-power-series solver also run over exact rationals. The aliases below
//! fix the common choices.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod black_scholes;
pub mod coefficients;
pub mod error;
pub mod expansions;
pub mod inversion;
pub mod oracle;
pub mod quadrature;
pub mod scalar;
pub mod transseries;

pub use black_scholes::{
    atm_call_closed_form, atm_covered_call_closed_form, bs_call_price, covered_call,
    covered_call_ratio, std_normal_cdf, time_value, time_value_ratio, tv_integral, vega,
    MarketQuote, Moneyness,
};
pub use coefficients::{
    a_coeff, b_coeff, c_coeff, eta_sequence, odd_double_factorial, CoefficientKind,
    CoefficientTable, Polynomial,
};
pub use error::{Error, Result};
pub use expansions::{ExpansionRegime, SeriesEval};
pub use inversion::{
    implied_vol, implied_vol_atm, implied_vol_auto, implied_vol_large_expiry,
    implied_vol_large_strike, implied_vol_short_expiry, invert_fifth_order, lambda_of_ratio,
    newton_refine, ImpliedOptions, RegimeChoice, RegimeParams, VolSolution,
};
pub use oracle::{implied_vol_exact, implied_vol_exact_default, BracketState};
pub use scalar::{Real, Scalar};
pub use transseries::{solve_inversion, LogPowerSeries, TermOrdering};

/// Exact rational scalar.
pub type Exact = num_rational::BigRational;
pub type Quote = MarketQuote<f64>;
pub type Series = LogPowerSeries<f64>;
pub type ExactSeries = LogPowerSeries<Exact>;
pub type Solution = VolSolution<f64>;
pub type Params = RegimeParams<f64>;

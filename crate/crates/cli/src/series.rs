//! Series-versus-exact rows shared by `forward` and `table`.

use ivexpand::inversion::LARGE_STRIKE_SWITCH;
use ivexpand::ExpansionRegime;

use crate::output::Cell;

/// Rows whose expansion variable exceeds this are flagged.
pub const SMALL_PARAMETER_LIMIT: f64 = 0.5;

pub const OUTSIDE_REGIME: &str = "outside regime";

/// One series evaluation against the exact value.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesRow {
    pub small_parameter: f64,
    /// `-1/ln(exact)` when the exact ratio lies in `(0, 1)`.
    pub lambda: Option<f64>,
    pub series: Option<f64>,
    pub last_term: Option<f64>,
    pub exact: f64,
    pub remainder_scale: f64,
    pub status: String,
}

impl SeriesRow {
    pub fn evaluate(regime: ExpansionRegime, x: f64, theta: f64, order: usize) -> Self {
        let small_parameter = regime.small_parameter(x, theta);
        let exact = regime.exact(x, theta);
        let lambda = (exact > 0.0 && exact < 1.0).then(|| -1.0 / exact.ln());
        let remainder_scale = regime.remainder_scale(x, theta, order);
        let (series, last_term, status) = match regime.series(x, theta, order) {
            Ok(s) => {
                // the at-the-money series are plain power series, so only their
                // expansion variable matters
                let atm = matches!(
                    regime,
                    ExpansionRegime::AtmSmall | ExpansionRegime::AtmLarge
                );
                let inside = small_parameter <= SMALL_PARAMETER_LIMIT
                    && (atm || lambda.is_some_and(|l| l < 1.0));
                let status = if inside { "ok" } else { OUTSIDE_REGIME };
                (Some(s.value), Some(s.last_term), status.to_string())
            }
            Err(e) => (None, None, e.to_string()),
        };
        Self {
            small_parameter,
            lambda,
            series,
            last_term,
            exact,
            remainder_scale,
            status,
        }
    }

    pub fn abs_error(&self) -> Option<f64> {
        self.series.map(|s| (s - self.exact).abs())
    }

    pub fn rel_error(&self) -> Option<f64> {
        self.abs_error().map(|e| e / self.exact.abs())
    }

    /// Error in units of the remainder order.
    pub fn normalized_remainder(&self) -> Option<f64> {
        self.abs_error().map(|e| e / self.remainder_scale)
    }

    pub fn cells(&self) -> [Cell; 4] {
        [
            Cell::opt(self.series),
            Cell::Num(self.exact),
            Cell::opt(self.abs_error()),
            Cell::opt(self.last_term),
        ]
    }
}

/// The expansion with the smallest expansion variable at `(x, θ)`.
pub fn natural_regime(x: f64, theta: f64) -> ExpansionRegime {
    if x == 0.0 {
        if theta * theta <= 8.0 {
            ExpansionRegime::AtmSmall
        } else {
            ExpansionRegime::AtmLarge
        }
    } else if ExpansionRegime::ShortMaturity.small_parameter(x, theta)
        <= ExpansionRegime::LargeMaturity.small_parameter(x, theta)
    {
        if x.abs() * theta >= LARGE_STRIKE_SWITCH {
            ExpansionRegime::LargeStrike
        } else {
            ExpansionRegime::ShortMaturity
        }
    } else {
        ExpansionRegime::LargeMaturity
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn picks_regimes() {
        assert_eq!(natural_regime(0.0, 0.5), ExpansionRegime::AtmSmall);
        assert_eq!(natural_regime(0.0, 5.0), ExpansionRegime::AtmLarge);
        assert_eq!(natural_regime(0.5, 0.1), ExpansionRegime::ShortMaturity);
        assert_eq!(natural_regime(8.0, 0.6), ExpansionRegime::LargeStrike);
        assert_eq!(natural_regime(0.3, 8.0), ExpansionRegime::LargeMaturity);
    }

    #[test]
    fn flags_rows_outside_regime() {
        let ok = SeriesRow::evaluate(ExpansionRegime::ShortMaturity, 0.5, 0.05, 2);
        assert_eq!(ok.status, "ok");
        let far = SeriesRow::evaluate(ExpansionRegime::ShortMaturity, 0.5, 2.0, 2);
        assert_eq!(far.status, OUTSIDE_REGIME);
        let atm = SeriesRow::evaluate(ExpansionRegime::ShortMaturity, 0.0, 0.1, 2);
        assert!(atm.series.is_none() && atm.status != "ok");
    }
}

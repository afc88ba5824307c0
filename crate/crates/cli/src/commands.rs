//! Subcommand bodies. Each returns the table to print and whether any row
//! failed on market data.

use std::path::PathBuf;
use std::str::FromStr;

use clap::Args;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use ivexpand::inversion::DEFAULT_ORDER;
use ivexpand::{
    bs_call_price, eta_sequence, solve_inversion, CoefficientKind, CoefficientTable, Exact,
    ExpansionRegime, ImpliedOptions, Quote, RegimeChoice, TermOrdering, VolSolution,
};

use crate::error::CliError;
use crate::grid::Axis;
use crate::output::{Cell, Table};
use crate::quotes;
use crate::series::{natural_regime, SeriesRow};

pub const MAX_COEFF_ORDER: usize = 30;

/// A table plus the number of rows that hit a domain error.
pub struct Outcome {
    pub table: Table,
    pub failures: usize,
    /// Print a lone row as an object rather than a one-element array.
    pub single: bool,
}

#[derive(Debug, Args)]
pub struct ImpliedArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub spot: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub strike: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub maturity: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub price: Option<f64>,
    /// CSV (header spot,strike,maturity,price) or JSON array; `-` reads stdin.
    #[arg(long, conflicts_with_all = ["spot", "strike", "maturity", "price"])]
    pub quotes: Option<PathBuf>,
    /// auto | short | large-t | large-k | atm | exact
    #[arg(long, default_value = "auto", value_parser = parse_choice)]
    pub regime: RegimeChoice,
    /// Truncation order of the inversion (number of terms for atm).
    #[arg(long)]
    pub order: Option<u32>,
    /// Report the expansion seed without Newton refinement.
    #[arg(long)]
    pub no_refine: bool,
    /// Absolute price tolerance of the refinement (default 1e-12·spot).
    #[arg(long)]
    pub tol: Option<f64>,
}

fn parse_choice(s: &str) -> Result<RegimeChoice, String> {
    RegimeChoice::from_str(s).map_err(|e| e.to_string())
}

fn parse_regime(s: &str) -> Result<ExpansionRegime, String> {
    ExpansionRegime::from_str(s).map_err(|e| e.to_string())
}

const SOLUTION_COLUMNS: [&str; 10] = [
    "sigma",
    "theta_sq",
    "regime",
    "lambda",
    "order_used",
    "seed_sigma",
    "iterations",
    "residual",
    "refined",
    "status",
];

fn solution_cells(result: &Result<VolSolution<f64>, String>) -> Vec<Cell> {
    match result {
        Ok(s) => vec![
            Cell::Num(s.sigma),
            Cell::Num(s.theta_sq),
            s.regime.map_or(Cell::Null, |r| Cell::text(r.name())),
            Cell::opt(s.lambda),
            Cell::Int(s.order_used as i64),
            Cell::Num(s.seed_sigma),
            Cell::Int(s.iterations as i64),
            Cell::Num(s.residual),
            Cell::Bool(s.refined),
            Cell::text("ok"),
        ],
        Err(e) => {
            let mut cells = vec![Cell::Null; SOLUTION_COLUMNS.len() - 1];
            cells.push(Cell::text(e.clone()));
            cells
        }
    }
}

pub fn implied(args: &ImpliedArgs, verbose: bool) -> Result<Outcome, CliError> {
    if args.order == Some(0) {
        return Err(CliError::Usage("--order must be at least 1".into()));
    }
    let opts = ImpliedOptions {
        regime: args.regime,
        order: args.order,
        refine: !args.no_refine,
        tol: args.tol,
    };
    let Some(path) = &args.quotes else {
        let (Some(spot), Some(strike), Some(maturity), Some(price)) =
            (args.spot, args.strike, args.maturity, args.price)
        else {
            return Err(CliError::Usage(
                "give --spot, --strike, --maturity and --price, or --quotes FILE".into(),
            ));
        };
        let quote = Quote::priced(spot, strike, maturity, price)?;
        let solution = ivexpand::implied_vol(&quote, &opts)?;
        let mut table = Table::new(SOLUTION_COLUMNS[..9].to_vec());
        let mut cells = solution_cells(&Ok(solution));
        cells.pop();
        table.push(cells);
        return Ok(Outcome {
            table,
            failures: 0,
            single: true,
        });
    };

    let entries = quotes::load(path)?;
    let mut columns = vec!["line", "spot", "strike", "maturity", "price"];
    columns.extend(SOLUTION_COLUMNS);
    let mut table = Table::new(columns);
    let mut failures = 0;
    for entry in entries {
        let result = match &entry.quote {
            Ok(q) => ivexpand::implied_vol(q, &opts).map_err(|e| match e {
                e if e.is_domain() => e.to_string(),
                e => format!("usage: {e}"),
            }),
            Err(e) => Err(e.clone()),
        };
        if let Err(e) = &result {
            failures += 1;
            eprintln!("line {}: {e}", entry.line);
        } else if verbose {
            eprintln!("line {}: ok", entry.line);
        }
        let mut row = vec![Cell::Int(entry.line as i64)];
        match entry.fields {
            Some(f) => row.extend(f.map(Cell::Num)),
            None => row.extend([Cell::Null, Cell::Null, Cell::Null, Cell::Null]),
        }
        row.extend(solution_cells(&result));
        table.push(row);
    }
    Ok(Outcome {
        table,
        failures,
        single: false,
    })
}

#[derive(Debug, Args)]
pub struct ForwardArgs {
    #[arg(long, default_value_t = 1.0)]
    pub spot: f64,
    /// Comma-separated strikes.
    #[arg(long, value_delimiter = ',', required = true)]
    pub strike: Vec<f64>,
    /// Comma-separated maturities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub maturity: Vec<f64>,
    /// Comma-separated volatilities.
    #[arg(long, value_delimiter = ',', required = true)]
    pub sigma: Vec<f64>,
    /// short | large-k | large-t | atm-small | atm-large; by default the
    /// expansion with the smallest expansion variable.
    #[arg(long, value_parser = parse_regime)]
    pub regime: Option<ExpansionRegime>,
    #[arg(long, default_value_t = DEFAULT_ORDER as usize)]
    pub order: usize,
}

pub const FORWARD_COLUMNS: [&str; 15] = [
    "spot",
    "strike",
    "maturity",
    "sigma",
    "price",
    "x",
    "theta",
    "regime",
    "order",
    "series_value",
    "exact_value",
    "abs_error",
    "last_term",
    "lambda",
    "status",
];

/// Prices each `(K, T, σ)` exactly and evaluates the forward series beside it.
pub fn forward(args: &ForwardArgs) -> Result<Outcome, CliError> {
    let mut table = Table::new(FORWARD_COLUMNS.to_vec());
    let mut failures = 0;
    for &strike in &args.strike {
        for &maturity in &args.maturity {
            for &sigma in &args.sigma {
                if !(sigma > 0.0 && sigma.is_finite()) {
                    return Err(CliError::Usage(format!(
                        "--sigma must be positive, got {sigma}"
                    )));
                }
                let quote = Quote::new(args.spot, strike, maturity)?;
                let price = bs_call_price(&quote, sigma);
                let x = quote.log_moneyness();
                let theta = quote.total_vol(sigma);
                let regime = args.regime.unwrap_or_else(|| natural_regime(x, theta));
                let row = SeriesRow::evaluate(regime, x, theta, args.order);
                if row.series.is_none() {
                    failures += 1;
                    eprintln!("K={strike} T={maturity} σ={sigma}: {}", row.status);
                }
                let mut cells = vec![
                    Cell::Num(args.spot),
                    Cell::Num(strike),
                    Cell::Num(maturity),
                    Cell::Num(sigma),
                    Cell::Num(price),
                    Cell::Num(x),
                    Cell::Num(theta),
                    Cell::text(regime.name()),
                    Cell::Int(args.order as i64),
                ];
                cells.extend(row.cells());
                cells.push(Cell::opt(row.lambda));
                cells.push(Cell::text(row.status.clone()));
                table.push(cells);
            }
        }
    }
    Ok(Outcome {
        table,
        failures,
        single: false,
    })
}

#[derive(Debug, Args)]
pub struct TableArgs {
    /// short | large-k | large-t | atm-small | atm-large
    #[arg(long, value_parser = parse_regime)]
    pub regime: ExpansionRegime,
    /// Log-moneyness: VALUE or MIN:MAX:COUNT[:linear|geometric] (default 0 at the money).
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<Axis>,
    /// Total volatility: VALUE or MIN:MAX:COUNT[:linear|geometric].
    #[arg(long)]
    pub theta: Axis,
    /// Comma-separated truncation orders.
    #[arg(long, value_delimiter = ',', default_value = "0,1,2,3")]
    pub orders: Vec<usize>,
}

pub const TABLE_COLUMNS: [&str; 13] = [
    "regime",
    "x",
    "theta",
    "order",
    "small_parameter",
    "lambda",
    "series_value",
    "exact_value",
    "abs_error",
    "rel_error",
    "normalized_remainder",
    "last_term",
    "status",
];

/// Rows are computed in parallel and emitted in grid order.
pub fn table(args: &TableArgs) -> Result<Outcome, CliError> {
    let xs = match (args.x, args.regime.requires_nonzero_x()) {
        (Some(axis), _) => axis.values(),
        (None, false) => vec![0.0],
        (None, true) => {
            return Err(CliError::Usage(format!(
                "--x is required for the {} regime",
                args.regime
            )));
        }
    };
    let thetas = args.theta.values();
    if let Some(t) = thetas.iter().find(|t| **t <= 0.0) {
        return Err(CliError::Usage(format!("theta must be positive, got {t}")));
    }
    if args.orders.is_empty() {
        return Err(CliError::Usage(
            "--orders must list at least one order".into(),
        ));
    }
    let points: Vec<(f64, f64, usize)> = xs
        .iter()
        .flat_map(|&x| {
            thetas
                .iter()
                .flat_map(move |&t| args.orders.iter().map(move |&n| (x, t, n)))
        })
        .collect();
    let regime = args.regime;
    let rows: Vec<Vec<Cell>> = points
        .par_iter()
        .map(|&(x, theta, n)| {
            let row = SeriesRow::evaluate(regime, x, theta, n);
            vec![
                Cell::text(regime.name()),
                Cell::Num(x),
                Cell::Num(theta),
                Cell::Int(n as i64),
                Cell::Num(row.small_parameter),
                Cell::opt(row.lambda),
                Cell::opt(row.series),
                Cell::Num(row.exact),
                Cell::opt(row.abs_error()),
                Cell::opt(row.rel_error()),
                Cell::opt(row.normalized_remainder()),
                Cell::opt(row.last_term),
                Cell::text(row.status),
            ]
        })
        .collect();
    let mut table = Table::new(TABLE_COLUMNS.to_vec());
    table.rows = rows;
    Ok(Outcome {
        table,
        failures: 0,
        single: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Family {
    A,
    B,
    C,
    Eta,
    Inversion,
}

#[derive(Debug, Args)]
pub struct CoeffsArgs {
    #[arg(long, value_enum)]
    pub family: Family,
    /// Highest index k for a, b, c; number of terms for eta; truncation order M for inversion.
    #[arg(long)]
    pub order: usize,
    /// Argument of a_k, b_k, c_k as an exact rational (`p/q` or a decimal).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub z: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub beta: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub gamma: Option<BigRational>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_rational)]
    pub alpha1: Option<BigRational>,
    /// Further coefficients α_2, α_3, … of the power series.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, value_parser = parse_rational)]
    pub alphas: Vec<BigRational>,
}

/// `p/q`, an integer, or a decimal with optional exponent, read exactly.
pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim();
    if s.contains('/') {
        return BigRational::from_str(s).map_err(|e| format!("bad rational '{s}': {e}"));
    }
    let bad = || format!("bad number '{s}'");
    let (mantissa, exponent) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "-" || digits == "+" {
        return Err(bad());
    }
    let n = BigInt::from_str(&digits).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

fn rational_cells(v: &Exact) -> [Cell; 2] {
    let text = if v.denom() == &BigInt::from(1) {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    };
    [Cell::Text(text), Cell::opt(v.to_f64())]
}

pub fn coeffs(args: &CoeffsArgs) -> Result<Outcome, CliError> {
    if args.order > MAX_COEFF_ORDER {
        return Err(CliError::Usage(format!(
            "--order must not exceed {MAX_COEFF_ORDER}"
        )));
    }
    let kind = match args.family {
        Family::A => Some(CoefficientKind::A),
        Family::B => Some(CoefficientKind::B),
        Family::C => Some(CoefficientKind::C),
        Family::Eta | Family::Inversion => None,
    };
    if let Some(kind) = kind {
        let z = args
            .z
            .clone()
            .ok_or_else(|| CliError::Usage("--z is required for families a, b, c".into()))?;
        let t = CoefficientTable::build(kind, args.order, &z);
        let mut table = Table::new(vec!["k", "value", "decimal"]);
        for (k, v) in t.values.iter().enumerate() {
            let mut row = vec![Cell::Int(k as i64)];
            row.extend(rational_cells(v));
            table.push(row);
        }
        return Ok(Outcome {
            table,
            failures: 0,
            single: false,
        });
    }
    if args.family == Family::Eta {
        let mut table = Table::new(vec!["k", "value", "decimal"]);
        for (k, v) in eta_sequence(args.order).iter().enumerate() {
            let mut row = vec![Cell::Int(k as i64)];
            row.extend(rational_cells(v));
            table.push(row);
        }
        return Ok(Outcome {
            table,
            failures: 0,
            single: false,
        });
    }

    let need = |v: &Option<BigRational>, flag: &str| {
        v.clone().ok_or_else(|| {
            CliError::Usage(format!("--{flag} is required for the inversion family"))
        })
    };
    let beta = need(&args.beta, "beta")?;
    let gamma = need(&args.gamma, "gamma")?;
    let alpha1 = need(&args.alpha1, "alpha1")?;
    if args.order == 0 {
        return Err(CliError::Usage(
            "--order must be at least 1 for the inversion family".into(),
        ));
    }
    let mut alphas = vec![BigRational::from_integer(BigInt::from(1)), alpha1];
    alphas.extend(args.alphas.iter().cloned());
    let v = solve_inversion(&beta, &gamma, &alphas, args.order as u32)?;
    let mut table = Table::new(vec!["i", "j", "position", "value", "decimal"]);
    for i in 1..=args.order as u32 {
        for j in (0..i).rev() {
            let c = v.coeff(i, j);
            let pos = TermOrdering::position(i, j).map_or(Cell::Null, |p| Cell::Int(p as i64));
            let mut row = vec![Cell::Int(i as i64), Cell::Int(j as i64), pos];
            row.extend(rational_cells(&c));
            table.push(row);
        }
    }
    Ok(Outcome {
        table,
        failures: 0,
        single: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("7/6").unwrap(), r(7, 6));
        assert_eq!(parse_rational("0.1").unwrap(), r(1, 10));
        assert_eq!(parse_rational("-1.25e-2").unwrap(), r(-1, 80));
        assert_eq!(parse_rational("3e2").unwrap(), r(300, 1));
        assert_eq!(parse_rational(".5").unwrap(), r(1, 2));
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }
}

//! Quote files: CSV with a `spot,strike,maturity,price` header, or a JSON
//! array of objects with those keys. Extra columns are ignored, so the output
//! of `forward` can be read back directly.

use std::io::Read;
use std::path::Path;

use ivexpand::Quote;
use serde::Deserialize;

use crate::error::CliError;

const REQUIRED: [&str; 4] = ["spot", "strike", "maturity", "price"];

#[derive(Debug, Clone, Copy, Deserialize)]
struct QuoteRow {
    spot: f64,
    strike: f64,
    maturity: f64,
    price: f64,
}

/// One input row: where it came from and either the quote or why it was rejected.
#[derive(Debug, Clone)]
pub struct Entry {
    /// CSV line number, or 1-based array index for JSON.
    pub line: u64,
    pub fields: Option<[f64; 4]>,
    pub quote: Result<Quote, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Csv,
    Json,
}

/// Reads `path`, or stdin for `-`.
pub fn load(path: &Path) -> Result<Vec<Entry>, CliError> {
    let (text, kind) = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        let kind = if s.trim_start().starts_with('[') {
            Kind::Json
        } else {
            Kind::Csv
        };
        (s, kind)
    } else {
        let s = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
        let json = path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"));
        (s, if json { Kind::Json } else { Kind::Csv })
    };
    match kind {
        Kind::Csv => parse_csv(&text),
        Kind::Json => parse_json(&text),
    }
}

fn entry(line: u64, row: QuoteRow) -> Entry {
    Entry {
        line,
        fields: Some([row.spot, row.strike, row.maturity, row.price]),
        quote: Quote::priced(row.spot, row.strike, row.maturity, row.price)
            .map_err(|e| e.to_string()),
    }
}

pub fn parse_csv(text: &str) -> Result<Vec<Entry>, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers()?.clone();
    if let Some(missing) = REQUIRED.iter().find(|c| !headers.iter().any(|h| h == **c)) {
        return Err(CliError::Usage(format!(
            "quote file header must contain spot,strike,maturity,price (missing '{missing}')"
        )));
    }
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line());
        match record.deserialize::<QuoteRow>(Some(&headers)) {
            Ok(row) => out.push(entry(line, row)),
            Err(e) => out.push(Entry {
                line,
                fields: None,
                quote: Err(format!("unreadable row: {e}")),
            }),
        }
    }
    Ok(out)
}

pub fn parse_json(text: &str) -> Result<Vec<Entry>, CliError> {
    let values: Vec<serde_json::Value> = serde_json::from_str(text)?;
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let line = i as u64 + 1;
            match serde_json::from_value::<QuoteRow>(v) {
                Ok(row) => entry(line, row),
                Err(e) => Entry {
                    line,
                    fields: None,
                    quote: Err(format!("unreadable entry: {e}")),
                },
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_rows_keep_line_numbers() {
        let text = "spot,strike,maturity,price,extra\n100,110,0.25,1.2,x\n100,110,0.25,-1,y\n";
        let rows = parse_csv(text).unwrap();
        assert_eq!(rows.len(), 2);
        assert!(rows[0].quote.is_ok());
        assert_eq!(rows[1].line, 3);
        assert!(rows[1].quote.as_ref().unwrap_err().contains("no-arbitrage"));
    }

    #[test]
    fn csv_header_is_required() {
        assert!(matches!(parse_csv("1,2,3,4\n"), Err(CliError::Usage(_))));
    }

    #[test]
    fn json_entries() {
        let rows =
            parse_json(r#"[{"spot":1,"strike":1,"maturity":1,"price":0.3},{"spot":1}]"#).unwrap();
        assert!(rows[0].quote.is_ok());
        assert_eq!(rows[1].line, 2);
        assert!(rows[1].quote.is_err());
    }
}

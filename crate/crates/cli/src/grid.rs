//! Grid axes for `table`.

use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// A single value, or `min:max:count[:linear|geometric]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    Fixed(f64),
    Grid {
        min: f64,
        max: f64,
        count: usize,
        spacing: Spacing,
    },
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Axis::Fixed(v) => vec![v],
            Axis::Grid {
                min,
                max,
                count,
                spacing,
            } => (0..count)
                .map(|i| {
                    let t = i as f64 / (count - 1) as f64;
                    match spacing {
                        Spacing::Linear => min + (max - min) * t,
                        Spacing::Geometric => min * (max / min).powf(t),
                    }
                })
                .collect(),
        }
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |p: &str| {
            p.parse::<f64>()
                .map_err(|e| format!("bad number '{p}': {e}"))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                if !v.is_finite() {
                    return Err(format!("axis value must be finite, got {v}"));
                }
                Ok(Axis::Fixed(v))
            }
            [min, max, count] | [min, max, count, _] => {
                let (min, max) = (num(min)?, num(max)?);
                let count: usize = count
                    .parse()
                    .map_err(|e| format!("bad count '{count}': {e}"))?;
                let spacing = match parts.get(3).copied() {
                    None | Some("linear") | Some("lin") => Spacing::Linear,
                    Some("geometric") | Some("geo") => Spacing::Geometric,
                    Some(other) => return Err(format!("unknown spacing '{other}'")),
                };
                if count < 2 {
                    return Err("grid count must be at least 2".into());
                }
                if !(min.is_finite() && max.is_finite()) {
                    return Err("grid endpoints must be finite".into());
                }
                if spacing == Spacing::Geometric && !(min > 0.0 && max > 0.0) {
                    return Err("geometric spacing requires positive endpoints".into());
                }
                Ok(Axis::Grid {
                    min,
                    max,
                    count,
                    spacing,
                })
            }
            _ => Err(format!(
                "expected VALUE or MIN:MAX:COUNT[:SPACING], got '{s}'"
            )),
        }
    }
}

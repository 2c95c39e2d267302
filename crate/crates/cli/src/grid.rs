//! Frequency and position grids given as `value` or `min:max:count[:log]`.

use std::str::FromStr;

#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub count: usize,
    pub log: bool,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                let t = i as f64 / last;
                if i == 0 {
                    self.min
                } else if i + 1 == self.count {
                    self.max
                } else if self.log {
                    (self.min.ln() + t * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + t * (self.max - self.min)
                }
            })
            .collect()
    }
}

fn number(s: &str, what: &str) -> Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("{what} `{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("{what} `{s}` is not finite"));
    }
    Ok(v)
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let spec = match parts.as_slice() {
            [v] => {
                let v = number(v, "value")?;
                GridSpec { min: v, max: v, count: 1, log: false }
            }
            [lo, hi, n] | [lo, hi, n, _] => {
                let log = match parts.get(3) {
                    None => false,
                    Some(&"log") => true,
                    Some(&"lin") => false,
                    Some(other) => return Err(format!("grid scale must be `log` or `lin`, got `{other}`")),
                };
                let count: usize =
                    n.trim().parse().map_err(|_| format!("grid count `{n}` is not a non-negative integer"))?;
                GridSpec { min: number(lo, "grid min")?, max: number(hi, "grid max")?, count, log }
            }
            _ => return Err(format!("expected `value` or `min:max:count[:log]`, got `{s}`")),
        };
        if spec.count == 0 {
            return Err("grid count must be at least 1".into());
        }
        if spec.count > 1 && !(spec.max > spec.min) {
            return Err(format!("grid max {} must exceed min {}", spec.max, spec.min));
        }
        if spec.log && !(spec.min > 0.0) {
            return Err("log grid needs a positive min".into());
        }
        Ok(spec)
    }
}

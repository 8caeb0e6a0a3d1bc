use crate::failure::Failure;
use serde::Deserialize;
use std::collections::BTreeMap;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Quantity {
    Phase,
    Dynphase,
    Spread,
    Xi,
    Tstar,
}

pub const ALL_QUANTITIES: [Quantity; 5] =
    [Quantity::Phase, Quantity::Dynphase, Quantity::Spread, Quantity::Xi, Quantity::Tstar];

/// Inclusive grid `min..=max` with `steps` points.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
pub struct Range(pub f64, pub f64, pub usize);

impl Range {
    pub fn points(&self) -> Vec<f64> {
        let Range(lo, hi, n) = *self;
        (0..n).map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
    }

    fn validate(&self, field: &str) -> Result<(), Failure> {
        let Range(lo, hi, n) = *self;
        if n < 2 {
            return Err(Failure::Usage(format!("{field}: steps must be at least 2, got {n}")));
        }
        if !(lo.is_finite() && hi.is_finite()) || lo < 0.0 || hi < lo {
            return Err(Failure::Usage(format!("{field}: need 0 <= min <= max, got [{lo}, {hi}]")));
        }
        Ok(())
    }
}

impl std::str::FromStr for Range {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [lo, hi, n] = parts[..] else {
            return Err(format!("expected MIN:MAX:STEPS, got {s:?}"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
        let steps = n.trim().parse::<usize>().map_err(|e| format!("{n:?}: {e}"))?;
        Ok(Range(num(lo)?, num(hi)?, steps))
    }
}

/// Settings shared by all commands; every field may be overridden by a flag.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub h_range: Option<Range>,
    pub gamma_range: Option<Range>,
    #[serde(rename = "J", default = "unit")]
    pub j: f64,
    pub h: Option<f64>,
    pub gamma: Option<f64>,
    #[serde(default = "all_quantities")]
    pub quantities: Vec<Quantity>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub output_path: Option<String>,
    pub eps: Option<f64>,
    pub threads: Option<usize>,
}

fn unit() -> f64 {
    1.0
}

fn all_quantities() -> Vec<Quantity> {
    ALL_QUANTITIES.to_vec()
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            h_range: None,
            gamma_range: None,
            j: 1.0,
            h: None,
            gamma: None,
            quantities: all_quantities(),
            tolerances: BTreeMap::new(),
            output_path: None,
            eps: None,
            threads: None,
        }
    }
}

impl ScanConfig {
    pub fn load(path: &Path) -> Result<Self, Failure> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            Failure::Usage(m) => Failure::Usage(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn parse(text: &str) -> Result<Self, Failure> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Failure::Usage(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), Failure> {
        if let Some(r) = &self.h_range {
            r.validate("h_range")?;
        }
        if let Some(r) = &self.gamma_range {
            r.validate("gamma_range")?;
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Failure::Usage(format!("J: must be positive, got {}", self.j)));
        }
        for (name, v) in &self.tolerances {
            if !(v.is_finite() && *v > 0.0) {
                return Err(Failure::Usage(format!("tolerances.{name}: must be positive, got {v}")));
            }
        }
        if let Some(e) = self.eps {
            if !(e > 0.0 && e < 1.0) {
                return Err(Failure::Usage(format!("eps: must lie in (0, 1), got {e}")));
            }
        }
        if self.threads == Some(0) {
            return Err(Failure::Usage("threads: must be at least 1".into()));
        }
        Ok(())
    }

    pub fn tolerance(&self, name: &str, default: f64) -> f64 {
        self.tolerances.get(name).copied().unwrap_or(default)
    }

    pub fn wants(&self, q: Quantity) -> bool {
        self.quantities.contains(&q)
    }
}

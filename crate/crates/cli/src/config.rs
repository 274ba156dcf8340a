//! Run configuration: one JSON file per invocation.

use std::path::Path;

use floquet::asymptotics::{AsymptoticQuantity, SamplePlan};
use floquet::contour::Rect;
use floquet::operator::{OperatorConfig, PeriodicOperator};
use floquet::{Complex64, Tolerances};
use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegionSpec {
    /// Rectangle; grid commands sample `nre × nim` points including the corners.
    Rect {
        re: [f64; 2],
        im: [f64; 2],
        #[serde(default)]
        nre: usize,
        #[serde(default)]
        nim: usize,
    },
    /// `nr × ntheta` points in `r_min ≤ |λ| ≤ r_max`.
    Annulus {
        r_min: f64,
        r_max: f64,
        #[serde(default)]
        nr: usize,
        #[serde(default)]
        ntheta: usize,
    },
    /// Real interval with `n` samples.
    Interval {
        lo: f64,
        hi: f64,
        n: usize,
    },
    Points {
        points: Vec<[f64; 2]>,
    },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VandermondeConfig {
    pub nodes: Vec<[f64; 2]>,
    pub sizes: Vec<usize>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub command: Option<String>,
    /// Inline operator description.
    #[serde(default)]
    pub operator: Option<OperatorConfig>,
    /// Path to an operator description, relative to the config file.
    #[serde(default)]
    pub operator_path: Option<String>,
    #[serde(default)]
    pub region: Option<RegionSpec>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub truncation: Option<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// `|ζ|` radius of the monodromy circle.
    #[serde(default)]
    pub radius: Option<f64>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub quantities: Option<Vec<AsymptoticQuantity>>,
    #[serde(default)]
    pub plan: Option<SamplePlan>,
    #[serde(default)]
    pub vandermonde: Option<VandermondeConfig>,
    /// `|λ|` bound for the oracle comparison.
    #[serde(default = "default_oracle_radius")]
    pub oracle_radius: f64,
}

fn default_delta() -> f64 {
    0.5
}

fn default_steps() -> usize {
    720
}

fn default_oracle_radius() -> f64 {
    500.0
}

/// A problem with the configuration, reported with exit status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

impl RunConfig {
    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| config_error(format!("config: {e}")))?;
        cfg.tolerances
            .validate()
            .map_err(|e| config_error(format!("tolerances: {e}")))?;
        if !(cfg.delta > 0.0 && cfg.delta.is_finite()) {
            return Err(config_error("delta must be positive"));
        }
        if cfg.operator.is_some() && cfg.operator_path.is_some() {
            return Err(config_error(
                "give either operator or operator_path, not both",
            ));
        }
        Ok(cfg)
    }

    pub fn operator_config(&self, base: &Path) -> anyhow::Result<OperatorConfig> {
        if let Some(op) = &self.operator {
            return Ok(op.clone());
        }
        let Some(rel) = &self.operator_path else {
            return Err(config_error("this command needs an operator"));
        };
        let path = base.join(rel);
        let text = std::fs::read_to_string(&path)
            .map_err(|e| config_error(format!("reading {}: {e}", path.display())))?;
        OperatorConfig::from_json(&text).map_err(|e| config_error(e.to_string()))
    }

    pub fn build_operator(
        &self,
        base: &Path,
    ) -> anyhow::Result<(OperatorConfig, PeriodicOperator)> {
        let oc = self.operator_config(base)?;
        let op = oc.build().map_err(|e| config_error(e.to_string()))?;
        Ok((oc, op))
    }

    fn region(&self) -> anyhow::Result<&RegionSpec> {
        self.region
            .as_ref()
            .ok_or_else(|| config_error("this command needs a region"))
    }

    pub fn rect(&self) -> anyhow::Result<Rect> {
        match self.region()? {
            RegionSpec::Rect { re, im, .. } => {
                Rect::new(re[0], re[1], im[0], im[1]).map_err(|e| config_error(e.to_string()))
            }
            _ => Err(config_error("this command needs a rect region")),
        }
    }

    pub fn interval(&self) -> anyhow::Result<(f64, f64, usize)> {
        match self.region()? {
            RegionSpec::Interval { lo, hi, n } if lo < hi && *n >= 2 => Ok((*lo, *hi, *n)),
            RegionSpec::Interval { .. } => Err(config_error("interval needs lo < hi and n ≥ 2")),
            _ => Err(config_error("this command needs an interval region")),
        }
    }

    /// Sample points of the region, in a fixed order.
    pub fn points(&self) -> anyhow::Result<Vec<Complex64>> {
        let lin = |a: f64, b: f64, n: usize, i: usize| {
            if n == 1 {
                0.5 * (a + b)
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        };
        let pts = match self.region()? {
            RegionSpec::Rect { re, im, nre, nim } => {
                if !(re[0] <= re[1] && im[0] <= im[1]) {
                    return Err(config_error("rect bounds must be ordered"));
                }
                let mut out = Vec::with_capacity(nre * nim);
                for j in 0..*nim {
                    for i in 0..*nre {
                        out.push(Complex64::new(
                            lin(re[0], re[1], *nre, i),
                            lin(im[0], im[1], *nim, j),
                        ));
                    }
                }
                out
            }
            RegionSpec::Annulus {
                r_min,
                r_max,
                nr,
                ntheta,
            } => {
                if !(0.0 <= *r_min && r_min <= r_max) {
                    return Err(config_error("annulus needs 0 ≤ r_min ≤ r_max"));
                }
                let mut out = Vec::with_capacity(nr * ntheta);
                for i in 0..*nr {
                    let r = lin(*r_min, *r_max, *nr, i);
                    for k in 0..*ntheta {
                        let t = 2.0 * std::f64::consts::PI * k as f64 / *ntheta as f64;
                        out.push(Complex64::from_polar(r, t));
                    }
                }
                out
            }
            RegionSpec::Interval { lo, hi, n } => (0..*n)
                .map(|i| Complex64::new(lin(*lo, *hi, *n, i), 0.0))
                .collect(),
            RegionSpec::Points { points } => {
                points.iter().map(|p| Complex64::new(p[0], p[1])).collect()
            }
        };
        if pts.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(config_error("region contains non-finite points"));
        }
        Ok(pts)
    }
}

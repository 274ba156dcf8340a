//! JSON operator description.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{build_operator, FormTag, PeriodicOperator, RawOperator, TrigPolynomial};
use crate::error::{FloquetError, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub m: i64,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientConfig {
    pub k: usize,
    pub harmonics: Vec<HarmonicConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorConfig {
    pub order: usize,
    pub period: f64,
    pub coefficients: Vec<CoefficientConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub form: Option<String>,
}

fn parse_form(s: &str) -> Result<FormTag> {
    match s {
        "general" => Ok(FormTag::General),
        "symmetric" | "symmetric_real" => Ok(FormTag::SymmetricReal),
        "constant" => Ok(FormTag::Constant),
        "unperturbed" => Ok(FormTag::Unperturbed),
        other => Err(FloquetError::InvalidOperator(format!(
            "unknown form '{other}'"
        ))),
    }
}

fn form_name(f: FormTag) -> &'static str {
    match f {
        FormTag::General => "general",
        FormTag::SymmetricReal => "symmetric",
        FormTag::Constant => "constant",
        FormTag::Unperturbed => "unperturbed",
    }
}

impl OperatorConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| FloquetError::InvalidOperator(format!("operator config: {e}")))
    }

    pub fn to_raw(&self) -> Result<RawOperator> {
        let form = self.form.as_deref().map(parse_form).transpose()?;
        let coefficients = self
            .coefficients
            .iter()
            .map(|c| {
                let terms = c
                    .harmonics
                    .iter()
                    .map(|h| (h.m, Complex64::new(h.re, h.im)));
                TrigPolynomial::new(self.period, terms).map(|p| (c.k, p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(RawOperator {
            order: self.order,
            period: self.period,
            coefficients,
            form,
        })
    }

    pub fn build(&self) -> Result<PeriodicOperator> {
        build_operator(&self.to_raw()?)
    }

    pub fn from_operator(op: &PeriodicOperator) -> Self {
        let coefficients = op
            .coefficients()
            .iter()
            .enumerate()
            .map(|(k, p)| CoefficientConfig {
                k,
                harmonics: p
                    .terms()
                    .iter()
                    .map(|(&m, c)| HarmonicConfig {
                        m,
                        re: c.re,
                        im: c.im,
                    })
                    .collect(),
            })
            .collect();
        Self {
            order: op.order(),
            period: op.period(),
            coefficients,
            form: Some(form_name(op.form()).to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_hill_config() {
        let text = r#"{ "order": 2, "period": 1.0,
            "coefficients": [ { "k": 0, "harmonics": [ {"m": 1, "re": 0.5, "im": 0.0}, {"m": -1, "re": 0.5} ] } ],
            "form": "symmetric" }"#;
        let cfg = OperatorConfig::from_json(text).unwrap();
        let op = cfg.build().unwrap();
        assert_eq!(op.form(), FormTag::SymmetricReal);
        assert!((op.coefficients()[0].eval(0.0).re - 1.0).abs() < 1e-15);
        let back = OperatorConfig::from_operator(&op);
        assert_eq!(back.build().unwrap(), op);
    }

    #[test]
    fn rejects_unknown_form_and_fields() {
        let text = r#"{ "order": 2, "period": 1.0, "coefficients": [ {"k": 0, "harmonics": []} ], "form": "weird" }"#;
        assert!(OperatorConfig::from_json(text).unwrap().build().is_err());
        let text = r#"{ "order": 2, "period": 1.0, "coefficients": [], "extra": 1 }"#;
        assert!(OperatorConfig::from_json(text).is_err());
    }

    #[test]
    fn declared_form_is_validated() {
        let text = r#"{ "order": 2, "period": 1.0,
            "coefficients": [ { "k": 0, "harmonics": [ {"m": 1, "re": 0.5} ] } ], "form": "constant" }"#;
        assert!(OperatorConfig::from_json(text).unwrap().build().is_err());
    }
}

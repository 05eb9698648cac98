use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{json, CliError};
use crate::error::Error;
use crate::spectral::{builtin, RationalPsd, SpectrumGrid, MIN_GRID_LEN};

/// A spectrum as given on the command line or in a JSON file.
///
/// ```json
/// {"type": "rational", "num": [1, -0.5], "den": [1]}
/// {"type": "samples", "values": [1.0, 1.0, ...]}
/// {"type": "expression", "builtin": "paper_f1"}
/// ```
///
/// Polynomial coefficients are ascending powers of `z`; the spectrum is
/// `|num(z)|^2 / |den(z)|^2` on the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum SpectrumSpec {
    Rational { num: Vec<f64>, den: Vec<f64> },
    Samples { values: Vec<f64> },
    Expression { builtin: String },
}

impl SpectrumSpec {
    pub fn builtin(name: &str) -> Result<Self, CliError> {
        if !builtin::NAMES.contains(&name) {
            return Err(CliError::parse(
                "builtin",
                format!("unknown spectrum {name:?}; expected one of {:?}", builtin::NAMES),
            ));
        }
        Ok(SpectrumSpec::Expression {
            builtin: name.to_owned(),
        })
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let spec: SpectrumSpec =
            serde_json::from_str(text).map_err(|e| CliError::parse("spectrum", e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_json(&text).map_err(|e| match e {
            CliError::Parse { field, message } => CliError::Parse {
                field,
                message: format!("{}: {message}", path.display()),
            },
            other => other,
        })
    }

    /// Structural checks that do not depend on the grid size.
    pub fn validate(&self) -> Result<(), CliError> {
        match self {
            SpectrumSpec::Rational { num, den } => {
                RationalPsd::new(num.clone(), den.clone()).map_err(|e| match e {
                    Error::ZeroNumerator => CliError::parse("num", e.to_string()),
                    Error::DenominatorZeroOnCircle { .. } => CliError::parse("den", e.to_string()),
                    _ if num.iter().any(|c| !c.is_finite()) || num.is_empty() => {
                        CliError::parse("num", e.to_string())
                    }
                    _ => CliError::parse("den", e.to_string()),
                })?;
            }
            SpectrumSpec::Samples { values } => {
                if values.len() < MIN_GRID_LEN || !values.len().is_power_of_two() {
                    return Err(CliError::parse(
                        "values",
                        format!("length {} is not a power of two >= {MIN_GRID_LEN}", values.len()),
                    ));
                }
                if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0 && v.is_finite())) {
                    return Err(CliError::parse(
                        format!("values[{i}]"),
                        format!("sample {v} is not a finite positive number"),
                    ));
                }
            }
            SpectrumSpec::Expression { builtin: name } => {
                Self::builtin(name)?;
            }
        }
        Ok(())
    }

    /// Grid length fixed by the spec itself, if any.
    pub fn native_len(&self) -> Option<usize> {
        match self {
            SpectrumSpec::Samples { values } => Some(values.len()),
            _ => None,
        }
    }

    /// Samples the spectrum on `n` points.
    pub fn resolve(&self, n: usize) -> Result<SpectrumGrid, CliError> {
        let psd = match self {
            SpectrumSpec::Samples { values } => {
                if values.len() != n {
                    return Err(CliError::parse(
                        "values",
                        format!("length {} does not match grid size {n}", values.len()),
                    ));
                }
                return SpectrumGrid::new(values.clone()).map_err(|e| CliError::parse("values", e.to_string()));
            }
            SpectrumSpec::Rational { num, den } => {
                RationalPsd::new(num.clone(), den.clone()).map_err(|e| CliError::parse("den", e.to_string()))?
            }
            SpectrumSpec::Expression { builtin: name } => {
                builtin::by_name(name).map_err(|e| CliError::parse("builtin", e.to_string()))?
            }
        };
        psd.sample(n).map_err(|e| CliError::Numeric {
            context: "num".into(),
            source: e,
        })
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn digest(&self) -> String {
        let bytes = json::to_vec(self);
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_each_variant() {
        let r = SpectrumSpec::from_json(r#"{"type":"rational","num":[1,-0.5],"den":[1]}"#).unwrap();
        assert_eq!(
            r,
            SpectrumSpec::Rational {
                num: vec![1.0, -0.5],
                den: vec![1.0]
            }
        );
        let e = SpectrumSpec::from_json(r#"{"type":"expression","builtin":"paper_f3"}"#).unwrap();
        assert_eq!(e.resolve(64).unwrap(), builtin::f3().sample(64).unwrap());
        let ones = format!(r#"{{"type":"samples","values":{:?}}}"#, vec![1.0; 16]);
        assert_eq!(SpectrumSpec::from_json(&ones).unwrap().native_len(), Some(16));
    }

    #[test]
    fn errors_name_the_field() {
        let field = |text: &str| match SpectrumSpec::from_json(text) {
            Err(CliError::Parse { field, .. }) => field,
            other => panic!("{other:?}"),
        };
        assert_eq!(field(r#"{"type":"rational","num":[0],"den":[1]}"#), "num");
        assert_eq!(field(r#"{"type":"rational","num":[1],"den":[1,1]}"#), "den");
        assert_eq!(field(r#"{"type":"samples","values":[1,2,3]}"#), "values");
        let mut v = vec![1.0; 16];
        v[5] = -1.0;
        assert_eq!(field(&format!(r#"{{"type":"samples","values":{v:?}}}"#)), "values[5]");
        assert_eq!(field(r#"{"type":"expression","builtin":"nope"}"#), "builtin");
        let msg = match SpectrumSpec::from_json(r#"{"type":"rational","num":[1]}"#) {
            Err(e) => e.to_string(),
            Ok(_) => unreachable!(),
        };
        assert!(msg.contains("den"), "{msg}");
    }

    #[test]
    fn digest_is_stable_and_distinguishes() {
        let a = SpectrumSpec::builtin("paper_f1").unwrap();
        let b = SpectrumSpec::builtin("paper_f2").unwrap();
        assert_eq!(a.digest(), a.clone().digest());
        assert_ne!(a.digest(), b.digest());
        assert_eq!(a.digest().len(), 64);
    }
}

//! Model specification files.
//!
//! ```text
//! {
//!   "dimension": 2,
//!   "family": { "type": "logistic", "params": { "alpha": 2.0 } },
//!   "margins": { "sigma": [1.0, 2.0], "xi": [0.1, 0.0] }
//! }
//! ```
//!
//! `generator` is accepted in place of `family`. Types: `complete_dep`,
//! `asy_indep` (`p`), `logistic` (`alpha`), `husler_reiss` and `t_gaussian`
//! (`sigma`, optional `mu`), `empirical` (`path` to a CSV of S rows,
//! resolved against the spec file's directory).

use std::fs;
use std::path::{Path, PathBuf};

use mgpx::parametric::{family_generator, Family, GaussParams, LogisticParams};
use mgpx::{MarginParams, MgpModel, RngStream, SGenerator, TailFunctions};
use serde::{Deserialize, Serialize};

use crate::error::CliError;
use crate::io::read_matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    CompleteDep,
    AsyIndep,
    Logistic,
    HuslerReiss,
    TGaussian,
    Empirical,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySpec {
    #[serde(rename = "type")]
    pub kind: FamilyKind,
    #[serde(default)]
    pub params: Params,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginsSpec {
    pub sigma: Vec<f64>,
    pub xi: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub dimension: usize,
    #[serde(alias = "generator")]
    pub family: FamilySpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margins: Option<MarginsSpec>,
}

fn field(location: &str, message: impl Into<String>) -> CliError {
    CliError::Spec {
        location: location.to_string(),
        message: message.into(),
    }
}

impl ModelSpec {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Spec {
            location: format!("line {}, column {}", e.line(), e.column()),
            message: e.to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("spec serializes")
    }

    /// Structural checks that do not need the library.
    pub fn validate(&self) -> Result<(), CliError> {
        let d = self.dimension;
        if d == 0 {
            return Err(field("dimension", "must be at least 1"));
        }
        let p = &self.family.params;
        let allowed: &[&str] = match self.family.kind {
            FamilyKind::CompleteDep => &[],
            FamilyKind::AsyIndep => &["p"],
            FamilyKind::Logistic => &["alpha"],
            FamilyKind::HuslerReiss | FamilyKind::TGaussian => &["mu", "sigma"],
            FamilyKind::Empirical => &["path"],
        };
        let present = [
            ("alpha", p.alpha.is_some()),
            ("p", p.p.is_some()),
            ("mu", p.mu.is_some()),
            ("sigma", p.sigma.is_some()),
            ("path", p.path.is_some()),
        ];
        for (name, set) in present {
            if set && !allowed.contains(&name) {
                return Err(field(
                    &format!("family.params.{name}"),
                    format!("not a parameter of {:?}", self.family.kind),
                ));
            }
        }
        match self.family.kind {
            FamilyKind::Logistic => {
                let a = p.alpha.ok_or_else(|| field("family.params.alpha", "required"))?;
                if !(a > 1.0 && a.is_finite()) {
                    return Err(field("family.params.alpha", "must be a finite number above 1"));
                }
            }
            FamilyKind::AsyIndep => {
                if let Some(w) = &p.p {
                    if w.len() != d {
                        return Err(field("family.params.p", format!("expected {d} weights")));
                    }
                }
            }
            FamilyKind::HuslerReiss | FamilyKind::TGaussian => {
                let s = p.sigma.as_ref().ok_or_else(|| field("family.params.sigma", "required"))?;
                if s.len() != d || s.iter().any(|r| r.len() != d) {
                    return Err(field("family.params.sigma", format!("must be a {d}x{d} matrix")));
                }
                if let Some(mu) = &p.mu {
                    if mu.len() != d {
                        return Err(field("family.params.mu", format!("expected {d} entries")));
                    }
                }
            }
            FamilyKind::Empirical => {
                p.path.as_ref().ok_or_else(|| field("family.params.path", "required"))?;
            }
            FamilyKind::CompleteDep => {}
        }
        if let Some(m) = &self.margins {
            if m.sigma.len() != d {
                return Err(field("margins.sigma", format!("expected {d} entries")));
            }
            if m.xi.len() != d {
                return Err(field("margins.xi", format!("expected {d} entries")));
            }
        }
        Ok(())
    }
}

/// A validated spec with its library objects.
#[derive(Debug, Clone)]
pub struct Built {
    pub spec: ModelSpec,
    /// `None` for empirical generators.
    pub family: Option<Family>,
    pub model: MgpModel,
}

impl Built {
    pub fn dim(&self) -> usize {
        self.spec.dimension
    }

    pub fn generator(&self) -> &SGenerator {
        self.model.generator()
    }

    /// Closed-form tail functions where the family has them, otherwise a
    /// D-norm over `n` draws.
    pub fn tail_functions(&self, n: usize, seed: u64) -> Result<TailFunctions, CliError> {
        Ok(match &self.family {
            Some(f) => f.tail_functions(n, seed)?,
            None => TailFunctions::from_generator(self.generator(), n, &mut RngStream::new(seed, 0))?,
        })
    }
}

pub fn load(path: &Path) -> Result<Built, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    let spec = ModelSpec::parse(&text)?;
    build(spec, path.parent().unwrap_or(Path::new(".")))
}

pub fn build(spec: ModelSpec, base: &Path) -> Result<Built, CliError> {
    spec.validate()?;
    let d = spec.dimension;
    let p = &spec.family.params;
    let at = |loc: &'static str| move |e: mgpx::Error| field(loc, e.to_string());
    let family = match spec.family.kind {
        FamilyKind::CompleteDep => Some(Family::CompleteDep { dim: d }),
        FamilyKind::AsyIndep => Some(Family::AsyIndep {
            p: p.p.clone().unwrap_or_else(|| vec![1.0 / d as f64; d]),
        }),
        FamilyKind::Logistic => Some(Family::Logistic(
            LogisticParams::new(p.alpha.expect("validated"), d).map_err(at("family.params.alpha"))?,
        )),
        FamilyKind::HuslerReiss | FamilyKind::TGaussian => {
            let g = GaussParams::new(
                p.mu.clone().unwrap_or_else(|| vec![0.0; d]),
                p.sigma.clone().expect("validated"),
            )
            .map_err(at("family.params.sigma"))?;
            Some(if spec.family.kind == FamilyKind::HuslerReiss {
                Family::HuslerReiss(g)
            } else {
                Family::TGaussian(g)
            })
        }
        FamilyKind::Empirical => None,
    };
    let generator = match &family {
        Some(f) => family_generator(f).map_err(at("family.params"))?,
        None => {
            let rel = p.path.as_ref().expect("validated");
            let path = if rel.is_absolute() { rel.clone() } else { base.join(rel) };
            let rows = read_matrix(&path, d)?;
            SGenerator::empirical(rows).map_err(at("family.params.path"))?
        }
    };
    let margins = match &spec.margins {
        Some(m) => MarginParams::new(m.sigma.clone(), m.xi.clone()).map_err(at("margins"))?,
        None => MarginParams::standard(d),
    };
    let model = MgpModel::new(margins, generator).map_err(at("margins"))?;
    Ok(Built { spec, family, model })
}

#[cfg(test)]
mod tests {
    use super::*;

    const LOGISTIC: &str = r#"{"dimension": 2, "family": {"type": "logistic", "params": {"alpha": 2.0}},
        "margins": {"sigma": [1.0, 2.0], "xi": [0.1, 0.0]}}"#;

    #[test]
    fn round_trip_is_structural_identity() {
        let s = ModelSpec::parse(LOGISTIC).unwrap();
        let again = ModelSpec::parse(&s.to_json()).unwrap();
        assert_eq!(s, again);
        let g = ModelSpec::parse(r#"{"dimension": 3, "generator": {"type": "complete_dep"}}"#).unwrap();
        assert_eq!(g, ModelSpec::parse(&g.to_json()).unwrap());
    }

    #[test]
    fn syntax_errors_carry_a_line() {
        let e = ModelSpec::parse("{\n\"dimension\": 2,\n\"family\": }").unwrap_err();
        match e {
            CliError::Spec { location, .. } => assert!(location.starts_with("line 3"), "{location}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn validation_names_the_field() {
        let cases = [
            (r#"{"dimension": 2, "family": {"type": "logistic", "params": {"alpha": 0.5}}}"#, "family.params.alpha"),
            (r#"{"dimension": 2, "family": {"type": "logistic"}}"#, "family.params.alpha"),
            (r#"{"dimension": 2, "family": {"type": "husler_reiss", "params": {"sigma": [[1.0]]}}}"#, "family.params.sigma"),
            (r#"{"dimension": 2, "family": {"type": "complete_dep", "params": {"alpha": 2.0}}}"#, "family.params.alpha"),
            (r#"{"dimension": 2, "family": {"type": "complete_dep"}, "margins": {"sigma": [1.0], "xi": [0.0, 0.0]}}"#, "margins.sigma"),
            (r#"{"dimension": 2, "family": {"type": "complete_dep"}, "margins": {"sigma": [1.0, -1.0], "xi": [0.0, 0.0]}}"#, "margins"),
        ];
        for (text, loc) in cases {
            let e = ModelSpec::parse(text).and_then(|s| build(s, Path::new("."))).unwrap_err();
            match e {
                CliError::Spec { location, .. } => assert_eq!(location, loc, "{text}"),
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(ModelSpec::parse(r#"{"dimension": 2, "family": {"type": "complete_dep"}, "extra": 1}"#).is_err());
        assert!(ModelSpec::parse(r#"{"dimension": 2, "family": {"type": "gumbel"}}"#).is_err());
    }

    #[test]
    fn builds_every_family() {
        let texts = [
            r#"{"dimension": 2, "family": {"type": "complete_dep"}}"#,
            r#"{"dimension": 2, "family": {"type": "asy_indep", "params": {"p": [0.3, 0.7]}}}"#,
            LOGISTIC,
            r#"{"dimension": 2, "family": {"type": "husler_reiss", "params": {"sigma": [[1.0, 0.5], [0.5, 1.0]]}}}"#,
            r#"{"dimension": 2, "family": {"type": "t_gaussian", "params": {"mu": [0.0, 1.0], "sigma": [[1.0, 0.2], [0.2, 1.0]]}}}"#,
        ];
        for t in texts {
            let b = build(ModelSpec::parse(t).unwrap(), Path::new(".")).unwrap();
            assert_eq!(b.dim(), 2);
        }
    }
}

//! Model-instance configuration files.
//!
//! A config is plain TOML with one `[model]` section, forcing sections
//! `[d]` and `[s0]`, and numbered species sections:
//!
//! ```toml
//! [model]
//! omega = 6.283185307179586
//!
//! [d]
//! kind = "constant"
//! value = 1.0
//!
//! [s0]
//! kind = "sinusoid"
//! offset = 2.0
//! sin = 1.0
//!
//! [species.1]
//! response = "michaelis_menten"
//! b = 10.0
//! k = 1.0
//! tau = 0.1
//! ```
//!
//! Periodic kinds are `constant` (`value`), `sinusoid` (`offset`, optional
//! `sin`, `cos`, `freq`; the frequency defaults to the base harmonic
//! 2 pi / omega) and `grid` (`samples`, read as uniform values over one
//! period). Response kinds are `michaelis_menten` (`b`, `k`), `linear`
//! (`b`) and `table` (`breakpoints` as `[x, p]` pairs).

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::model::{ChemostatModel, Species};
use crate::periodic::PeriodicFn;
use crate::response::ResponseFn;
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    d: RawPeriodic,
    s0: RawPeriodic,
    #[serde(default)]
    species: BTreeMap<String, RawSpecies>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    omega: f64,
    /// Optional declared count, cross-checked against the species sections.
    n: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPeriodic {
    kind: String,
    value: Option<f64>,
    offset: Option<f64>,
    sin: Option<f64>,
    cos: Option<f64>,
    freq: Option<f64>,
    samples: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpecies {
    response: String,
    b: Option<f64>,
    k: Option<f64>,
    breakpoints: Option<Vec<[f64; 2]>>,
    tau: f64,
}

fn require(field: Option<f64>, section: &str, name: &str) -> Result<f64> {
    field.ok_or_else(|| Error::Config(format!("[{section}] is missing `{name}`")))
}

fn build_periodic(raw: &RawPeriodic, omega: f64, section: &str) -> Result<PeriodicFn> {
    match raw.kind.as_str() {
        "constant" => PeriodicFn::constant(omega, require(raw.value, section, "value")?),
        "sinusoid" => {
            let offset = require(raw.offset, section, "offset")?;
            let sin = raw.sin.unwrap_or(0.0);
            let cos = raw.cos.unwrap_or(0.0);
            match raw.freq {
                Some(freq) => PeriodicFn::sinusoid(omega, offset, sin, cos, freq),
                None => PeriodicFn::base_sinusoid(omega, offset, sin, cos),
            }
        }
        "grid" => {
            let samples = raw.samples.clone().ok_or_else(|| {
                Error::Config(format!("[{section}] with kind = \"grid\" needs `samples`"))
            })?;
            PeriodicFn::from_samples(omega, samples)
        }
        other => Err(Error::Config(format!(
            "[{section}] has unknown kind \"{other}\" (expected constant, sinusoid or grid)"
        ))),
    }
}

fn build_species(raw: &RawSpecies, key: &str) -> Result<Species> {
    let section = format!("species.{key}");
    let response = match raw.response.as_str() {
        "michaelis_menten" => ResponseFn::michaelis_menten(
            require(raw.b, &section, "b")?,
            require(raw.k, &section, "k")?,
        )?,
        "linear" => ResponseFn::linear(require(raw.b, &section, "b")?)?,
        "table" => {
            let pts = raw.breakpoints.clone().ok_or_else(|| {
                Error::Config(format!("[{section}] with response = \"table\" needs `breakpoints`"))
            })?;
            ResponseFn::table(pts.into_iter().map(|[x, p]| (x, p)).collect())?
        }
        other => {
            return Err(Error::Config(format!(
                "[{section}] has unknown response \"{other}\" \
                 (expected michaelis_menten, linear or table)"
            )))
        }
    };
    Species::new(response, raw.tau)
}

/// Parse a config from TOML text into a validated model.
pub fn parse_model(text: &str) -> Result<ChemostatModel> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim_end().replace('\n', " ")))?;
    let omega = raw.model.omega;

    // Species sections must be numbered 1..=n with no gaps; the map key is
    // a string, so sort numerically rather than lexically.
    let mut numbered: Vec<(usize, &RawSpecies)> = Vec::with_capacity(raw.species.len());
    for (key, sp) in &raw.species {
        let idx: usize = key.parse().map_err(|_| {
            Error::Config(format!("species section [species.{key}] is not numbered"))
        })?;
        numbered.push((idx, sp));
    }
    numbered.sort_by_key(|(idx, _)| *idx);
    for (pos, (idx, _)) in numbered.iter().enumerate() {
        if *idx != pos + 1 {
            return Err(Error::Config(format!(
                "species sections must be numbered 1..={} without gaps, found [species.{idx}]",
                numbered.len()
            )));
        }
    }
    if let Some(n) = raw.model.n {
        if n != numbered.len() {
            return Err(Error::Config(format!(
                "[model] declares n = {n} but {} species sections are present",
                numbered.len()
            )));
        }
    }

    let d = build_periodic(&raw.d, omega, "d")?;
    let s0 = build_periodic(&raw.s0, omega, "s0")?;
    let species = numbered
        .iter()
        .map(|(idx, sp)| build_species(sp, &idx.to_string()))
        .collect::<Result<Vec<_>>>()?;
    ChemostatModel::new(omega, d, s0, species)
}

/// Read and parse a config file.
pub fn load_model(path: &Path) -> Result<ChemostatModel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_model(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
[model]
omega = 6.283185307179586

[d]
kind = "constant"
value = 1.0

[s0]
kind = "sinusoid"
offset = 2.0
sin = 1.0

[species.1]
response = "michaelis_menten"
b = 10.0
k = 1.0
tau = 0.1

[species.2]
response = "linear"
b = 0.5
tau = 1.0
"#;

    #[test]
    fn example_config_round_trips() {
        let model = parse_model(EXAMPLE).unwrap();
        assert_eq!(model.n(), 2);
        assert!((model.omega - std::f64::consts::TAU).abs() < 1e-15);
        assert_eq!(model.d.as_constant(), Some(1.0));
        let (lo, hi) = model.s0_bounds();
        assert!((lo - 1.0).abs() < 1e-9 && (hi - 3.0).abs() < 1e-9);
        assert!((model.species[0].response.eval(1.0) - 5.0).abs() < 1e-12);
        assert!((model.species[1].tau - 1.0).abs() < 1e-15);
    }

    #[test]
    fn species_numbering_must_be_contiguous() {
        let text = EXAMPLE.replace("[species.2]", "[species.3]");
        let err = parse_model(&text).unwrap_err();
        assert!(
            err.to_string().contains("numbered 1..=2"),
            "unexpected message: {err}"
        );
    }

    #[test]
    fn declared_count_is_cross_checked() {
        let text = EXAMPLE.replace("omega = 6.283185307179586", "omega = 6.283185307179586\nn = 3");
        let err = parse_model(&text).unwrap_err();
        assert!(err.to_string().contains("n = 3"), "unexpected message: {err}");
    }

    #[test]
    fn malformed_toml_reports_the_location() {
        let err = parse_model("[model\nomega = 1.0").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 1"), "no location in: {msg}");
    }

    #[test]
    fn missing_fields_name_the_section() {
        let text = EXAMPLE.replace("value = 1.0\n", "");
        let err = parse_model(&text).unwrap_err();
        assert!(err.to_string().contains("[d]"), "unexpected message: {err}");

        let text = EXAMPLE.replace("k = 1.0\n", "");
        let err = parse_model(&text).unwrap_err();
        assert!(
            err.to_string().contains("[species.1]"),
            "unexpected message: {err}"
        );
    }

    #[test]
    fn unknown_kinds_are_rejected() {
        let text = EXAMPLE.replace("\"constant\"", "\"ramp\"");
        assert!(parse_model(&text).is_err());
        let text = EXAMPLE.replace("\"michaelis_menten\"", "\"hill\"");
        assert!(parse_model(&text).is_err());
    }

    #[test]
    fn grid_forcing_is_accepted() {
        let text = r#"
[model]
omega = 6.283185307179586

[d]
kind = "grid"
samples = [1.0, 1.2, 1.0, 0.8, 1.0, 1.2, 1.0, 0.8]

[s0]
kind = "constant"
value = 2.0

[species.1]
response = "table"
breakpoints = [[0.0, 0.0], [1.0, 2.0], [4.0, 3.0]]
tau = 0.5
"#;
        let model = parse_model(text).unwrap();
        let (d_lo, d_hi) = model.d_bounds();
        assert!(d_lo > 0.7 && d_hi < 1.3);
        assert_eq!(model.species[0].response.eval(1.0), 2.0);
    }

    #[test]
    fn model_without_species_is_allowed() {
        let text = r#"
[model]
omega = 6.283185307179586

[d]
kind = "constant"
value = 1.0

[s0]
kind = "sinusoid"
offset = 2.0
sin = 1.0
"#;
        let model = parse_model(text).unwrap();
        assert_eq!(model.n(), 0);
    }
}

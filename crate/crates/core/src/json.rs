//! JSON schema for measures and laws.
//!
//! ```json
//! {"kind":"atomic","atoms":[{"x":[1.0,0.0],"w":2.0}]}
//! {"kind":"stable","eta":1.2,"sigma":[{"u":[1.0],"w":0.5}]}
//! {"kind":"polar","sigma":[...],"radial":{"kind":"powerlaw","index":1.2,"cutoffs":[0.0,null]}}
//! {"kind":"polar","sigma":[...],"radial":{"kind":"table","r":[...],"density":[...]}}
//! {"kind":"tempered","p":1.0,"alpha":0.5,"rosinski":{...}}
//! {"kind":"sum","parts":[{...},{...}]}
//! ```
//!
//! A `null` upper cutoff stands for `+∞`. A law file is
//! `{"measure": {...}, "shift": [...]}` with the shift defaulting to zero.

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{LevyError, Result};
use crate::geometry::{Direction, SphericalMeasure};
use crate::measure::{Atom, ID0Law, LevyMeasure, MeasureRepr, RadialProfile, RosinskiMeasure};
use crate::specfun::TemperingParams;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomJson {
    x: Vec<f64>,
    w: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SigmaAtomJson {
    u: Vec<f64>,
    w: f64,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum RadialJson {
    Powerlaw { index: f64, cutoffs: [Option<f64>; 2] },
    Table { r: Vec<f64>, density: Vec<f64> },
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum MeasureJson {
    Atomic {
        atoms: Vec<AtomJson>,
        #[serde(skip_serializing_if = "Option::is_none")]
        dim: Option<usize>,
    },
    Stable {
        eta: f64,
        sigma: Vec<SigmaAtomJson>,
    },
    Polar {
        sigma: Vec<SigmaAtomJson>,
        radial: RadialJson,
    },
    Tempered {
        p: f64,
        alpha: f64,
        rosinski: Box<MeasureJson>,
    },
    Sum {
        parts: Vec<MeasureJson>,
    },
}

#[derive(Debug, Clone, Serialize)]
struct LawJson {
    measure: MeasureJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    shift: Option<Vec<f64>>,
}

fn sigma_from(atoms: &[SigmaAtomJson]) -> Result<SphericalMeasure> {
    SphericalMeasure::new(
        atoms
            .iter()
            .map(|a| Ok((Direction::new(a.u.clone())?, a.w)))
            .collect::<Result<Vec<_>>>()?,
    )
}

fn sigma_to(sigma: &SphericalMeasure) -> Vec<SigmaAtomJson> {
    sigma
        .atoms()
        .iter()
        .map(|(u, w)| SigmaAtomJson {
            u: u.as_slice().to_vec(),
            w: *w,
        })
        .collect()
}

fn join(path: &str, field: &str) -> String {
    if path.is_empty() {
        field.to_string()
    } else if field.starts_with('[') {
        format!("{path}{field}")
    } else {
        format!("{path}.{field}")
    }
}

fn parse_error(path: &str, message: impl Into<String>) -> LevyError {
    LevyError::Parse {
        path: if path.is_empty() { ".".into() } else { path.into() },
        message: message.into(),
    }
}

/// Deserialize `v` into `T`, reporting the failing field relative to `path`.
fn from_value<T: serde::de::DeserializeOwned>(v: &Value, path: &str) -> Result<T> {
    serde_path_to_error::deserialize(v.clone()).map_err(|e| {
        let inner = e.path().to_string();
        let full = if inner == "." { path.to_string() } else { join(path, &inner) };
        parse_error(&full, e.inner().to_string())
    })
}

fn kind_of<'a>(v: &'a Value, path: &str) -> Result<&'a str> {
    match v.get("kind") {
        Some(Value::String(k)) => Ok(k),
        Some(_) => Err(parse_error(&join(path, "kind"), "expected a string")),
        None => Err(parse_error(path, "missing field `kind`")),
    }
}

// Per-kind payloads; the `kind` tag is dispatched by hand so that nested
// errors keep their full JSON path.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtomicIn {
    #[allow(dead_code)]
    kind: String,
    atoms: Vec<AtomJson>,
    #[serde(default)]
    dim: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StableIn {
    #[allow(dead_code)]
    kind: String,
    eta: f64,
    sigma: Vec<SigmaAtomJson>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PolarIn {
    #[allow(dead_code)]
    kind: String,
    sigma: Vec<SigmaAtomJson>,
    radial: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PowerlawIn {
    #[allow(dead_code)]
    kind: String,
    index: f64,
    cutoffs: [Option<f64>; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TableIn {
    #[allow(dead_code)]
    kind: String,
    r: Vec<f64>,
    density: Vec<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TemperedIn {
    #[allow(dead_code)]
    kind: String,
    p: f64,
    alpha: f64,
    rosinski: Value,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SumIn {
    #[allow(dead_code)]
    kind: String,
    parts: Vec<Value>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LawIn {
    measure: Value,
    #[serde(default)]
    shift: Option<Vec<f64>>,
}

/// Attach the JSON location to validation errors.
fn at<T>(path: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        LevyError::Parse { .. } => e,
        other => parse_error(path, other.to_string()),
    })
}

fn measure_from(v: &Value, path: &str) -> Result<LevyMeasure> {
    if !v.is_object() {
        return Err(parse_error(path, "expected a measure object"));
    }
    match kind_of(v, path)? {
        "atomic" => {
            let j: AtomicIn = from_value(v, path)?;
            at(
                path,
                LevyMeasure::atomic(j.atoms.into_iter().map(|a| Atom::new(a.x, a.w)).collect(), j.dim),
            )
        }
        "stable" => {
            let j: StableIn = from_value(v, path)?;
            at(path, sigma_from(&j.sigma).and_then(|s| LevyMeasure::stable(j.eta, s)))
        }
        "polar" => {
            let j: PolarIn = from_value(v, path)?;
            let rpath = join(path, "radial");
            let radial = match kind_of(&j.radial, &rpath)? {
                "powerlaw" => {
                    let r: PowerlawIn = from_value(&j.radial, &rpath)?;
                    RadialProfile::PowerLaw {
                        index: r.index,
                        lo: r.cutoffs[0].unwrap_or(0.0),
                        hi: r.cutoffs[1].unwrap_or(f64::INFINITY),
                    }
                }
                "table" => {
                    let r: TableIn = from_value(&j.radial, &rpath)?;
                    RadialProfile::Table { r: r.r, density: r.density }
                }
                other => {
                    return Err(parse_error(
                        &join(&rpath, "kind"),
                        format!("unknown radial kind `{other}`, expected `powerlaw` or `table`"),
                    ))
                }
            };
            at(path, sigma_from(&j.sigma).and_then(|s| LevyMeasure::polar(s, radial)))
        }
        "tempered" => {
            let j: TemperedIn = from_value(v, path)?;
            let inner = join(path, "rosinski");
            let r = measure_from(&j.rosinski, &inner)?;
            let r = at(&inner, RosinskiMeasure::new(r))?;
            at(path, TemperingParams::new(j.p, j.alpha).and_then(|params| LevyMeasure::tempered(params, r)))
        }
        "sum" => {
            let j: SumIn = from_value(v, path)?;
            let parts = j
                .parts
                .iter()
                .enumerate()
                .map(|(k, p)| measure_from(p, &join(path, &format!("parts[{k}]"))))
                .collect::<Result<Vec<_>>>()?;
            at(path, LevyMeasure::sum(parts))
        }
        other => Err(parse_error(
            &join(path, "kind"),
            format!("unknown measure kind `{other}`, expected one of atomic, stable, polar, tempered, sum"),
        )),
    }
}

fn measure_to(m: &LevyMeasure) -> MeasureJson {
    match m.repr() {
        MeasureRepr::Atomic { atoms } => MeasureJson::Atomic {
            atoms: atoms.iter().map(|a| AtomJson { x: a.x.clone(), w: a.w }).collect(),
            dim: if atoms.is_empty() { Some(m.dim()) } else { None },
        },
        MeasureRepr::Stable { eta, sigma } => MeasureJson::Stable {
            eta: *eta,
            sigma: sigma_to(sigma),
        },
        MeasureRepr::Polar { sigma, radial } => MeasureJson::Polar {
            sigma: sigma_to(sigma),
            radial: match radial {
                RadialProfile::PowerLaw { index, lo, hi } => RadialJson::Powerlaw {
                    index: *index,
                    cutoffs: [Some(*lo), if hi.is_finite() { Some(*hi) } else { None }],
                },
                RadialProfile::Table { r, density } => RadialJson::Table {
                    r: r.clone(),
                    density: density.clone(),
                },
            },
        },
        MeasureRepr::Tempered { params, rosinski } => MeasureJson::Tempered {
            p: params.p,
            alpha: params.alpha,
            rosinski: Box::new(measure_to(rosinski.as_measure())),
        },
        MeasureRepr::Sum { parts } => MeasureJson::Sum {
            parts: parts.iter().map(measure_to).collect(),
        },
    }
}

fn parse_value(text: &str) -> Result<Value> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| parse_error(&e.path().to_string(), e.inner().to_string()))
}

/// Parse a measure specification.
pub fn measure_from_json(text: &str) -> Result<LevyMeasure> {
    measure_from(&parse_value(text)?, "")
}

/// Serialize a measure specification (pretty-printed).
pub fn measure_to_json(m: &LevyMeasure) -> String {
    serde_json::to_string_pretty(&measure_to(m)).expect("measure serialization cannot fail")
}

/// Parse a law file `{"measure": ..., "shift": [...]}`.
pub fn law_from_json(text: &str) -> Result<ID0Law> {
    let j: LawIn = from_value(&parse_value(text)?, "")?;
    let measure = measure_from(&j.measure, "measure")?;
    let shift = j.shift.unwrap_or_else(|| vec![0.0; measure.dim()]);
    at("shift", ID0Law::new(measure, shift))
}

pub fn law_to_json(law: &ID0Law) -> String {
    let j = LawJson {
        measure: measure_to(&law.measure),
        shift: Some(law.shift.clone()),
    };
    serde_json::to_string_pretty(&j).expect("law serialization cannot fail")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips() {
        let specs = [
            r#"{"kind":"atomic","atoms":[{"x":[1.0,0.0],"w":2.0},{"x":[0.0,-3.0],"w":0.5}]}"#,
            r#"{"kind":"stable","eta":1.2,"sigma":[{"u":[1.0],"w":0.5},{"u":[-1.0],"w":0.25}]}"#,
            r#"{"kind":"polar","sigma":[{"u":[1.0,1.0],"w":1.0}],"radial":{"kind":"powerlaw","index":0.5,"cutoffs":[0.0,null]}}"#,
            r#"{"kind":"polar","sigma":[{"u":[1.0],"w":1.0}],"radial":{"kind":"table","r":[0.5,1.0,2.0],"density":[4.0,1.0,0.1]}}"#,
            r#"{"kind":"tempered","p":1.0,"alpha":0.8,"rosinski":{"kind":"atomic","atoms":[{"x":[1.0],"w":1.0}]}}"#,
            r#"{"kind":"sum","parts":[{"kind":"stable","eta":0.5,"sigma":[{"u":[1.0],"w":1.0}]},{"kind":"atomic","atoms":[{"x":[2.0],"w":1.0}]}]}"#,
            r#"{"kind":"atomic","atoms":[],"dim":2}"#,
        ];
        for s in specs {
            let m = measure_from_json(s).unwrap();
            let back = measure_from_json(&measure_to_json(&m)).unwrap();
            assert_eq!(m, back, "{s}");
        }
    }

    #[test]
    fn errors_carry_paths() {
        let e = measure_from_json(r#"{"kind":"stable","eta":"x","sigma":[]}"#).unwrap_err();
        assert!(matches!(&e, LevyError::Parse { path, .. } if path == "eta"), "{e}");
        let e = measure_from_json(r#"{"kind":"atomic","atoms":[{"x":[1.0],"w":1.0},{"x":[1.0],"q":1.0}]}"#).unwrap_err();
        assert!(matches!(&e, LevyError::Parse { path, .. } if path.starts_with("atoms[1]")), "{e}");
        let e = measure_from_json(r#"{"kind":"tempered","p":1.0,"alpha":0.5,"rosinski":{"kind":"atomic","atoms":[{"x":[0.0],"w":1.0}]}}"#).unwrap_err();
        assert!(matches!(&e, LevyError::Parse { path, .. } if path == "rosinski"), "{e}");
        let e = measure_from_json(r#"{"kind":"stable","eta":2.5,"sigma":[{"u":[1.0],"w":1.0}]}"#).unwrap_err();
        assert!(e.to_string().contains("eta"));
    }

    #[test]
    fn law_shift_defaults_to_zero() {
        let law = law_from_json(r#"{"measure":{"kind":"atomic","atoms":[{"x":[1.0,2.0],"w":1.0}]}}"#).unwrap();
        assert_eq!(law.shift, vec![0.0, 0.0]);
        assert!(law_from_json(r#"{"measure":{"kind":"atomic","atoms":[{"x":[1.0,2.0],"w":1.0}]},"shift":[1.0]}"#).is_err());
        let again = law_from_json(&law_to_json(&law)).unwrap();
        assert_eq!(again, law);
    }
}

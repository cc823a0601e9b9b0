//! Field specifications on the command line: `sine:k=4`, `bump:center=0.5,width=0.2`, `file:PATH`.

use std::collections::BTreeMap;
use std::path::Path;

use halfspace_spectral::experiments::{Member, Profile};
use halfspace_spectral::io::{load, StoredField};
use halfspace_spectral::{restrict, Bc, Error, GridSpec, HalfField, Operator, Result};

fn params(body: &str) -> Result<BTreeMap<String, f64>> {
    let mut out = BTreeMap::new();
    for part in body.split(',').filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("field parameter `{part}` is not key=value")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|e| Error::Config(format!("field parameter `{k}`: {e}")))?;
        out.insert(k.trim().to_owned(), v);
    }
    Ok(out)
}

fn take(map: &mut BTreeMap<String, f64>, key: &str, default: Option<f64>) -> Result<f64> {
    match map.remove(key).or(default) {
        Some(v) => Ok(v),
        None => Err(Error::Config(format!("field needs `{key}=`"))),
    }
}

/// Parse a builtin member; `None` for `file:` specs.
pub fn parse_member(spec: &str) -> Result<Option<Member>> {
    let (name, body) = spec.split_once(':').unwrap_or((spec, ""));
    if name == "file" {
        return Ok(None);
    }
    let mut p = params(body)?;
    let profile = match name {
        "zero" => Profile::Zero,
        "sine" => Profile::Sine { k: take(&mut p, "k", None)? },
        "cosine" => Profile::Cosine { k: take(&mut p, "k", None)? },
        "counterexample" => Profile::Counterexample,
        "bump" => Profile::InteriorBump {
            center: take(&mut p, "center", Some(0.5))?,
            width: take(&mut p, "width", Some(0.25))?,
            amplitude: take(&mut p, "amplitude", Some(1.0))?,
        },
        other => {
            return Err(Error::Config(format!(
                "unknown field `{other}` (sine, cosine, bump, counterexample, zero, file)"
            )))
        }
    };
    let tangential_scale = take(&mut p, "tangential", Some(1.0))?;
    if let Some(extra) = p.keys().next() {
        return Err(Error::Config(format!("unexpected field parameter `{extra}`")));
    }
    Ok(Some(Member { profile, tangential_scale }))
}

/// Sample a builtin field on `grid` or read a stored one, tagged for `op`.
pub fn resolve(spec: &str, grid: &GridSpec, op: Operator) -> Result<HalfField> {
    match parse_member(spec)? {
        Some(m) => m.sample(*grid, op.bc()),
        None => {
            let path = &spec["file:".len()..];
            let hf = match load(Path::new(path))? {
                StoredField::Half(h) => h,
                StoredField::Full(f) => restrict(&f, Bc::None)?,
            };
            if hf.bc() != Bc::None && hf.bc() != op.bc() {
                return Err(Error::TagMismatch { expected: op.bc(), found: hf.bc() });
            }
            Ok(hf.retagged(op.bc()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_specs() {
        let m = parse_member("sine:k=4").unwrap().unwrap();
        assert_eq!(m.profile, Profile::Sine { k: 4.0 });
        let b = parse_member("bump:center=0.3,width=0.1").unwrap().unwrap();
        assert_eq!(b.profile, Profile::InteriorBump { center: 0.3, width: 0.1, amplitude: 1.0 });
        assert!(parse_member("file:/tmp/x").unwrap().is_none());
        assert!(parse_member("sine").is_err());
        assert!(parse_member("sine:k=4,q=1").is_err());
        assert!(parse_member("wave:k=1").is_err());
    }
}

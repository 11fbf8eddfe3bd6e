//! Resolution of `builtin:` names and JSON files into core objects.

use std::path::Path;

use wrank::certificate::{
    diagonal_spanning_set, ghz_power_decomposition_capped, seven_product_spanning_set,
    w2_seven_term, w2_seven_term_printed, SpanCertificate,
};
use wrank::json::{self, AnyDecomposition, AnyTensor};
use wrank::tensor::tensor_power_capped;
use wrank::{ghz_state, w_state, Bipartition, Error, Exact, ProductPair, Result, SizeCap};

pub const SIZE_CAP_VAR: &str = "WRANK_SIZE_CAP";

pub fn size_cap() -> Result<SizeCap> {
    match std::env::var(SIZE_CAP_VAR) {
        Ok(v) => v
            .trim()
            .parse()
            .map(SizeCap)
            .map_err(|_| Error::input(SIZE_CAP_VAR, format!("expected an entry count, got `{v}`"))),
        Err(_) => Ok(SizeCap::default()),
    }
}

/// Reads `path`, runs `parse`, and prefixes any input error with the flag and file.
fn from_file<T>(flag: &str, path: &str, parse: impl FnOnce(&str) -> Result<T>) -> Result<T> {
    let text = std::fs::read_to_string(Path::new(path))
        .map_err(|e| Error::input(flag, format!("cannot read `{path}`: {e}")))?;
    parse(&text).map_err(|e| match e {
        Error::Input { field, message } => Error::input(format!("{flag} {path}: {field}"), message),
        Error::Json(e) => Error::input(flag, format!("`{path}` is not valid JSON: {e}")),
        other => other,
    })
}

/// `w`, `ghz`, `w^N`, `ghz^N`, or `w2` as shorthand for `w^2`.
fn builtin_power(name: &str) -> Option<(&'static str, u32)> {
    let (base, n) = match name.split_once('^') {
        Some((b, n)) => (b, n.parse().ok()?),
        None if name == "w2" => ("w", 2),
        None => (name, 1),
    };
    match base {
        "w" => Some(("w", n)),
        "ghz" => Some(("ghz", n)),
        _ => None,
    }
}

pub fn power_state(kind: &str, n: u32) -> Result<wrank::ExactTensor> {
    if n == 0 {
        return Err(Error::input("--power", "must be at least 1"));
    }
    let base = if kind == "w" { w_state() } else { ghz_state() };
    tensor_power_capped(&base, n, size_cap()?)
}

pub fn tensor(flag: &str, src: &str) -> Result<AnyTensor> {
    match src.strip_prefix("builtin:") {
        Some(name) => {
            let (kind, n) = builtin_power(name).ok_or_else(|| {
                Error::input(flag, format!("unknown builtin `{name}`; expected w, ghz, w^N or ghz^N"))
            })?;
            Ok(AnyTensor::Exact(power_state(kind, n)?))
        }
        None => from_file(flag, src, json::tensor_from_json),
    }
}

pub fn exact_tensor(flag: &str, src: &str) -> Result<wrank::ExactTensor> {
    tensor(flag, src)?
        .into_exact()
        .map_err(|_| Error::input(flag, "an exact-mode tensor is required here"))
}

pub fn decomposition(flag: &str, src: &str) -> Result<AnyDecomposition> {
    match src.strip_prefix("builtin:") {
        Some("w2-seven") => Ok(AnyDecomposition::Exact(w2_seven_term())),
        Some("w2-seven-printed") => Ok(AnyDecomposition::Exact(w2_seven_term_printed())),
        Some(name) => match builtin_power(name) {
            Some(("ghz", n)) if n > 0 => Ok(AnyDecomposition::Exact(ghz_power_decomposition_capped(
                n,
                size_cap()?,
            )?)),
            _ => Err(Error::input(
                flag,
                format!("unknown builtin `{name}`; expected w2-seven, w2-seven-printed or ghz^N"),
            )),
        },
        None => from_file(flag, src, json::decomposition_from_json),
    }
}

pub fn spanning(flag: &str, src: &str) -> Result<Vec<ProductPair<Exact>>> {
    match src.strip_prefix("builtin:") {
        Some("w2-seven") => Ok(seven_product_spanning_set()),
        Some(name) => {
            let d = name
                .strip_prefix("diagonal-")
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&d| d > 0)
                .ok_or_else(|| {
                    Error::input(flag, format!("unknown builtin `{name}`; expected w2-seven or diagonal-D"))
                })?;
            Ok(diagonal_spanning_set(d))
        }
        None => from_file(flag, src, json::spanning_set_from_json),
    }
}

pub fn certificate(flag: &str, path: &str) -> Result<(SpanCertificate, Bipartition)> {
    from_file(flag, path, json::certificate_from_json)
}

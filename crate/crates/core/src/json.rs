//! JSON file formats for tensors, decompositions, spanning sets and certificates.
//!
//! Scalars are written as `{"re": "p/q", "im": "r/s"}` in exact mode and as
//! decimal strings in float mode. Tensor entries are sparse and sorted by
//! index, so equal tensors serialize to identical bytes.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::certificate::SpanCertificate;
use crate::decomposition::{Decomposition, ProductPair, ProductState, Term};
use crate::error::{Error, Result};
use crate::scalar::{Exact, Scalar, ScalarMode};
use crate::tensor::{Bipartition, ExactTensor, FloatTensor, Party, Tensor};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarJson {
    pub re: String,
    pub im: String,
}

impl ScalarJson {
    pub fn from_scalar<S: Scalar>(v: &S) -> Self {
        let (re, im) = v.to_parts();
        ScalarJson { re, im }
    }

    fn parse<S: Scalar>(&self, field: &str) -> Result<S> {
        S::from_parts(&self.re, &self.im).map_err(|e| match e {
            Error::Input { message, .. } => Error::input(field, message),
            other => other,
        })
    }
}


fn is_exact(m: &ScalarMode) -> bool {
    *m == ScalarMode::Exact
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    idx: [usize; 3],
    re: String,
    im: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TensorJson {
    shape: [usize; 3],
    #[serde(default)]
    mode: ScalarMode,
    entries: Vec<EntryJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermJson {
    weight: ScalarJson,
    factors: [Vec<ScalarJson>; 3],
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DecompositionJson {
    shape: [usize; 3],
    #[serde(default, skip_serializing_if = "is_exact")]
    mode: ScalarMode,
    terms: Vec<TermJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PairJson {
    left: Vec<ScalarJson>,
    right: Vec<ScalarJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpanningJson {
    dims: [usize; 2],
    pairs: Vec<PairJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateJson {
    traced: String,
    verdict: bool,
    support: Vec<Vec<ScalarJson>>,
    spanning: SpanningJson,
    coordinates: Vec<Vec<ScalarJson>>,
    unreachable: Vec<usize>,
    spanning_rank: usize,
}

/// Parses JSON, reporting the path of the offending field on failure.
fn parse<T: DeserializeOwned>(text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::input(
            if path == "." { "<document>".to_string() } else { path },
            e.into_inner().to_string(),
        )
    })
}

fn scalars<S: Scalar>(v: &[ScalarJson], field: &str) -> Result<Vec<S>> {
    v.iter()
        .enumerate()
        .map(|(i, x)| x.parse(&format!("{field}[{i}]")))
        .collect()
}

fn to_scalars<S: Scalar>(v: &[S]) -> Vec<ScalarJson> {
    v.iter().map(ScalarJson::from_scalar).collect()
}

/// A tensor read from a file, in whichever mode the file declares.
#[derive(Clone, Debug, PartialEq)]
pub enum AnyTensor {
    Exact(ExactTensor),
    Float(FloatTensor),
}

impl AnyTensor {
    pub fn to_float(&self) -> FloatTensor {
        match self {
            AnyTensor::Exact(t) => t.to_float(),
            AnyTensor::Float(t) => t.clone(),
        }
    }

    pub fn into_exact(self) -> Result<ExactTensor> {
        match self {
            AnyTensor::Exact(t) => Ok(t),
            AnyTensor::Float(_) => Err(Error::input("mode", "an exact tensor is required")),
        }
    }

    pub fn shape(&self) -> [usize; 3] {
        match self {
            AnyTensor::Exact(t) => t.shape(),
            AnyTensor::Float(t) => t.shape(),
        }
    }
}

pub fn tensor_to_json<S: Scalar>(t: &Tensor<S>) -> String {
    let doc = TensorJson {
        shape: t.shape(),
        mode: S::MODE,
        entries: t
            .nonzero()
            .map(|(idx, v)| {
                let (re, im) = v.to_parts();
                EntryJson { idx, re, im }
            })
            .collect(),
    };
    serde_json::to_string(&doc).expect("serializable")
}

fn build_tensor<S: Scalar>(doc: &TensorJson) -> Result<Tensor<S>> {
    let mut t = Tensor::<S>::zeros(doc.shape).map_err(|e| match e {
        Error::Input { message, .. } => Error::input("shape", message),
        other => other,
    })?;
    let mut seen = std::collections::HashSet::new();
    for (k, e) in doc.entries.iter().enumerate() {
        let field = format!("entries[{k}].idx");
        if e.idx.iter().zip(doc.shape).any(|(&i, d)| i >= d) {
            return Err(Error::input(field, format!("{:?} is outside shape {:?}", e.idx, doc.shape)));
        }
        if !seen.insert(e.idx) {
            return Err(Error::input(field, format!("duplicate index {:?}", e.idx)));
        }
        let v = S::from_parts(&e.re, &e.im).map_err(|err| match err {
            Error::Input { message, .. } => Error::input(format!("entries[{k}]"), message),
            other => other,
        })?;
        t.set(e.idx, v);
    }
    Ok(t)
}

pub fn tensor_from_json(text: &str) -> Result<AnyTensor> {
    let doc: TensorJson = parse(text)?;
    Ok(match doc.mode {
        ScalarMode::Exact => AnyTensor::Exact(build_tensor(&doc)?),
        ScalarMode::Float => AnyTensor::Float(build_tensor(&doc)?),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyDecomposition {
    Exact(Decomposition<Exact>),
    Float(Decomposition<num_complex::Complex64>),
}

impl AnyDecomposition {
    pub fn to_float(&self) -> Decomposition<num_complex::Complex64> {
        match self {
            AnyDecomposition::Exact(d) => d.to_float(),
            AnyDecomposition::Float(d) => d.clone(),
        }
    }
}

pub fn decomposition_to_json<S: Scalar>(d: &Decomposition<S>) -> String {
    serde_json::to_string(&decomposition_doc(d)).expect("serializable")
}

/// JSON value form, for embedding in larger reports.
pub fn decomposition_to_value<S: Scalar>(d: &Decomposition<S>) -> serde_json::Value {
    serde_json::to_value(decomposition_doc(d)).expect("serializable")
}

fn decomposition_doc<S: Scalar>(d: &Decomposition<S>) -> DecompositionJson {
    DecompositionJson {
        shape: d.shape(),
        mode: S::MODE,
        terms: d
            .terms()
            .iter()
            .map(|t| TermJson {
                weight: ScalarJson::from_scalar(&t.weight),
                factors: t.state.factors().clone().map(|f| to_scalars(&f)),
            })
            .collect(),
    }
}

fn build_decomposition<S: Scalar>(doc: &DecompositionJson) -> Result<Decomposition<S>> {
    let mut terms = Vec::with_capacity(doc.terms.len());
    for (k, t) in doc.terms.iter().enumerate() {
        let weight = t.weight.parse(&format!("terms[{k}].weight"))?;
        let mut factors: [Vec<S>; 3] = Default::default();
        for (p, f) in t.factors.iter().enumerate() {
            let field = format!("terms[{k}].factors[{p}]");
            if f.len() != doc.shape[p] {
                return Err(Error::input(
                    field,
                    format!("length {} does not match shape {:?}", f.len(), doc.shape),
                ));
            }
            factors[p] = scalars(f, &field)?;
        }
        let state = ProductState::new(factors).map_err(|e| match e {
            Error::Input { field, message } => Error::input(format!("terms[{k}].{field}"), message),
            other => other,
        })?;
        terms.push(Term { weight, state });
    }
    Decomposition::new(doc.shape, terms)
}

pub fn decomposition_from_json(text: &str) -> Result<AnyDecomposition> {
    let doc: DecompositionJson = parse(text)?;
    Ok(match doc.mode {
        ScalarMode::Exact => AnyDecomposition::Exact(build_decomposition(&doc)?),
        ScalarMode::Float => AnyDecomposition::Float(build_decomposition(&doc)?),
    })
}

fn spanning_doc(pairs: &[ProductPair<Exact>]) -> SpanningJson {
    SpanningJson {
        dims: pairs.first().map_or([0, 0], ProductPair::dims),
        pairs: pairs
            .iter()
            .map(|p| PairJson {
                left: to_scalars(&p.left),
                right: to_scalars(&p.right),
            })
            .collect(),
    }
}

fn build_spanning(doc: &SpanningJson, prefix: &str) -> Result<Vec<ProductPair<Exact>>> {
    doc.pairs
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let field = format!("{prefix}pairs[{k}]");
            if [p.left.len(), p.right.len()] != doc.dims {
                return Err(Error::input(
                    field,
                    format!("dimensions {:?} differ from dims {:?}", [p.left.len(), p.right.len()], doc.dims),
                ));
            }
            let left = scalars(&p.left, &format!("{field}.left"))?;
            let right = scalars(&p.right, &format!("{field}.right"))?;
            ProductPair::new(left, right).map_err(|e| Error::input(field, e.to_string()))
        })
        .collect()
}

/// `{"dims":[dL,dR],"pairs":[{"left":[..],"right":[..]},...]}`
pub fn spanning_set_to_json(pairs: &[ProductPair<Exact>]) -> String {
    serde_json::to_string(&spanning_doc(pairs)).expect("serializable")
}

pub fn spanning_set_from_json(text: &str) -> Result<Vec<ProductPair<Exact>>> {
    let doc: SpanningJson = parse(text)?;
    build_spanning(&doc, "")
}

pub fn certificate_to_json(cert: &SpanCertificate, traced: Bipartition) -> String {
    let doc = CertificateJson {
        traced: traced.separated.to_string(),
        verdict: cert.verdict(),
        support: cert.support.iter().map(|v| to_scalars(v)).collect(),
        spanning: spanning_doc(&cert.spanning),
        coordinates: cert.coordinates.iter().map(|v| to_scalars(v)).collect(),
        unreachable: cert.unreachable.clone(),
        spanning_rank: cert.spanning_rank,
    };
    serde_json::to_string(&doc).expect("serializable")
}

/// Reads a certificate back. The stored verdict must agree with the stored
/// unreachable list; the coordinates themselves are re-checked by the consumer.
pub fn certificate_from_json(text: &str) -> Result<(SpanCertificate, Bipartition)> {
    let doc: CertificateJson = parse(text)?;
    let traced: Party = doc
        .traced
        .parse()
        .map_err(|_| Error::input("traced", format!("expected A, B or C, got `{}`", doc.traced)))?;
    if doc.verdict != doc.unreachable.is_empty() {
        return Err(Error::input("verdict", "disagrees with `unreachable`"));
    }
    let support = doc
        .support
        .iter()
        .enumerate()
        .map(|(j, v)| scalars(v, &format!("support[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let coordinates = doc
        .coordinates
        .iter()
        .enumerate()
        .map(|(j, v)| scalars(v, &format!("coordinates[{j}]")))
        .collect::<Result<Vec<_>>>()?;
    let cert = SpanCertificate {
        support,
        spanning: build_spanning(&doc.spanning, "spanning.")?,
        coordinates,
        unreachable: doc.unreachable,
        spanning_rank: doc.spanning_rank,
    };
    Ok((cert, Bipartition::new(traced)))
}

//! Span certificates: upper bounds on tensor rank from product spanning sets.
//!
//! The rank of a tripartite state equals the least number of two-party product
//! states whose span contains the support of the state's reduced operator on
//! the other two parties, i.e. the span of its slices along the traced party.
//! A certificate records such a spanning set together with exact coordinates,
//! and can be expanded into an explicit decomposition of the state.

use num_traits::{One, Zero};

use crate::decomposition::{Decomposition, ProductPair, ProductState, Term};
use crate::error::{Error, Result};
use crate::matrix::{exact_matrix_rank, rref, Matrix};
use crate::scalar::{frac, int, Exact};
use crate::tensor::{tensor_power_capped, Bipartition, ExactTensor, SizeCap};

/// Reduced-echelon basis of the span of the slices along `traced`.
///
/// Rows come out ordered by pivot column and have a unit at their pivot.
pub fn support_basis(t: &ExactTensor, traced: Bipartition) -> Vec<Vec<Exact>> {
    let slices = t.slice_states(traced);
    let cols = slices.first().map_or(0, Vec::len);
    let mut m = Matrix::from_rows(&slices, cols);
    let rank = rref(&mut m).len();
    m.rows().take(rank).map(<[Exact]>::to_vec).collect()
}

fn pivot(v: &[Exact]) -> usize {
    v.iter().position(|x| !x.is_zero()).expect("nonzero basis row")
}

/// Computational basis vector `|i⟩` of dimension `d`.
pub fn basis_vector(d: usize, i: usize) -> Vec<Exact> {
    (0..d).map(|k| if k == i { Exact::one() } else { Exact::zero() }).collect()
}

fn combo(d: usize, coeffs: &[(usize, i64)]) -> Vec<Exact> {
    let mut v = vec![Exact::zero(); d];
    for &(i, c) in coeffs {
        v[i] = int(c);
    }
    v
}

/// `Ψ1 = |0⟩+|1⟩+|2⟩`, `Ψ2 = |0⟩+|1⟩−|2⟩`, `Ψ3 = |1⟩+|2⟩`, `Ψ4 = |1⟩−|2⟩` on four levels.
pub fn psi(k: usize) -> Vec<Exact> {
    match k {
        1 => combo(4, &[(0, 1), (1, 1), (2, 1)]),
        2 => combo(4, &[(0, 1), (1, 1), (2, -1)]),
        3 => combo(4, &[(1, 1), (2, 1)]),
        4 => combo(4, &[(1, 1), (2, -1)]),
        _ => panic!("psi index must be 1..=4"),
    }
}

/// Seven two-party products whose span contains the B–C support of `W^{⊗2}`:
/// `|0⟩|0⟩, |0⟩|3⟩, |3⟩|0⟩, Ψ1Ψ1, Ψ2Ψ2, Ψ3Ψ3, Ψ4Ψ4`.
pub fn seven_product_spanning_set() -> Vec<ProductPair<Exact>> {
    let e = |i| basis_vector(4, i);
    let pair = |l, r| ProductPair::new(l, r).expect("nonzero");
    vec![
        pair(e(0), e(0)),
        pair(e(0), e(3)),
        pair(e(3), e(0)),
        pair(psi(1), psi(1)),
        pair(psi(2), psi(2)),
        pair(psi(3), psi(3)),
        pair(psi(4), psi(4)),
    ]
}

/// `{|x⟩|x⟩ : x < d}`.
pub fn diagonal_spanning_set(d: usize) -> Vec<ProductPair<Exact>> {
    (0..d)
        .map(|x| ProductPair::new(basis_vector(d, x), basis_vector(d, x)).expect("nonzero"))
        .collect()
}

/// Evidence that a set of product pairs spans a given support.
#[derive(Clone, Debug, PartialEq)]
pub struct SpanCertificate {
    pub support: Vec<Vec<Exact>>,
    pub spanning: Vec<ProductPair<Exact>>,
    /// `coordinates[j][k]`: weight of `spanning[k]` in `support[j]`. Rows of
    /// unreachable support vectors are zero.
    pub coordinates: Vec<Vec<Exact>>,
    /// Support vectors outside the span.
    pub unreachable: Vec<usize>,
    /// Dimension of the span of the spanning set.
    pub spanning_rank: usize,
}

impl SpanCertificate {
    pub fn verdict(&self) -> bool {
        self.unreachable.is_empty()
    }

    /// Recomputes `coordinates · spanning` and compares with the support.
    pub fn reverify(&self) -> bool {
        if !self.verdict() || self.coordinates.len() != self.support.len() {
            return false;
        }
        let vectors: Vec<Vec<Exact>> = self.spanning.iter().map(ProductPair::to_vector).collect();
        self.support.iter().zip(&self.coordinates).all(|(s, coords)| {
            if coords.len() != vectors.len() {
                return false;
            }
            let mut acc = vec![Exact::zero(); s.len()];
            for (c, v) in coords.iter().zip(&vectors) {
                if c.is_zero() || v.len() != s.len() {
                    continue;
                }
                for (a, x) in acc.iter_mut().zip(v) {
                    *a = a.clone() + c * x;
                }
            }
            &acc == s
        })
    }
}

/// Solves `Σ_k x_k · spanning[k] = s` exactly for every support vector `s`.
///
/// Free variables are set to zero, so a dependent spanning set yields the
/// solution supported on the lowest-index pivots.
pub fn check_span_containment(
    spanning: &[ProductPair<Exact>],
    support: &[Vec<Exact>],
) -> Result<SpanCertificate> {
    let dims = spanning
        .first()
        .map(ProductPair::dims)
        .ok_or_else(|| Error::input("spanning", "empty spanning set"))?;
    if let Some(k) = spanning.iter().position(|p| p.dims() != dims) {
        return Err(Error::input(
            format!("spanning[{k}]"),
            format!("dimensions {:?} differ from {:?}", spanning[k].dims(), dims),
        ));
    }
    let dim = dims[0] * dims[1];
    if let Some(j) = support.iter().position(|s| s.len() != dim) {
        return Err(Error::input(
            format!("support[{j}]"),
            format!("length {} does not match spanning dimension {dim}", support[j].len()),
        ));
    }

    let k = spanning.len();
    let vectors: Vec<Vec<Exact>> = spanning.iter().map(ProductPair::to_vector).collect();
    // Augmented system [P | S] with one column per spanning and support vector.
    let width = k + support.len();
    let mut data = Vec::with_capacity(dim * width);
    for i in 0..dim {
        data.extend(vectors.iter().map(|v| v[i].clone()));
        data.extend(support.iter().map(|s| s[i].clone()));
    }
    let mut m = Matrix::from_vec(dim, width, data);
    let pivots = rref(&mut m);
    let basic: Vec<(usize, usize)> = pivots
        .iter()
        .enumerate()
        .filter(|(_, &c)| c < k)
        .map(|(r, &c)| (r, c))
        .collect();
    let spanning_rank = basic.len();

    let mut coordinates = Vec::with_capacity(support.len());
    let mut unreachable = Vec::new();
    for j in 0..support.len() {
        let col = k + j;
        let consistent = (spanning_rank..dim).all(|r| m.get(r, col).is_zero());
        let mut x = vec![Exact::zero(); k];
        if consistent {
            for &(r, c) in &basic {
                x[c] = m.get(r, col).clone();
            }
        } else {
            unreachable.push(j);
        }
        coordinates.push(x);
    }

    Ok(SpanCertificate {
        support: support.to_vec(),
        spanning: spanning.to_vec(),
        coordinates,
        unreachable,
        spanning_rank,
    })
}

/// Expands a positive certificate for `(t, traced)` into a decomposition of `t`.
///
/// Each spanning pair acquires the vector on the traced party collecting its
/// coordinate in every slice. Pairs that no slice uses are dropped, so the
/// term count never exceeds the spanning-set size.
pub fn decomposition_from_certificate(
    t: &ExactTensor,
    traced: Bipartition,
    cert: &SpanCertificate,
) -> Result<Decomposition<Exact>> {
    if !cert.verdict() {
        return Err(Error::Contract(format!(
            "certificate is negative: support vectors {:?} are not spanned",
            cert.unreachable
        )));
    }
    if support_basis(t, traced) != cert.support {
        return Err(Error::Contract(
            "certificate support does not match the tensor's support along the traced party"
                .into(),
        ));
    }
    let shape = t.shape();
    let sep = traced.separated.index();
    let [p, q] = traced.separated.others().map(|x| x.index());
    if let Some(pair) = cert.spanning.iter().find(|pp| pp.dims() != [shape[p], shape[q]]) {
        return Err(Error::input(
            "spanning",
            format!("pair dimensions {:?} do not match {:?}", pair.dims(), [shape[p], shape[q]]),
        ));
    }

    let pivots: Vec<usize> = cert.support.iter().map(|s| pivot(s)).collect();
    let k = cert.spanning.len();
    let slices = t.slice_states(traced);
    // traced_vectors[k][a]: coordinate of spanning[k] in slice a.
    let mut traced_vectors = vec![vec![Exact::zero(); shape[sep]]; k];
    for (a, slice) in slices.iter().enumerate() {
        for (j, &pc) in pivots.iter().enumerate() {
            let w = &slice[pc];
            if w.is_zero() {
                continue;
            }
            for (kk, c) in cert.coordinates[j].iter().enumerate() {
                if !c.is_zero() {
                    let slot = &mut traced_vectors[kk][a];
                    *slot = slot.clone() + w * c;
                }
            }
        }
    }

    let terms = cert
        .spanning
        .iter()
        .zip(traced_vectors)
        .filter(|(_, v)| v.iter().any(|x| !x.is_zero()))
        .map(|(pair, v)| {
            let mut factors: [Vec<Exact>; 3] = Default::default();
            factors[sep] = v;
            factors[p] = pair.left.clone();
            factors[q] = pair.right.clone();
            Ok(Term {
                weight: Exact::one(),
                state: ProductState::new(factors)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Decomposition::new(shape, terms)
}

/// `GHZ^{⊗n} = Σ_x |x⟩|x⟩|x⟩` over all `2^n` digits.
pub fn ghz_power_decomposition(n: u32) -> Result<Decomposition<Exact>> {
    ghz_power_decomposition_capped(n, SizeCap::default())
}

pub fn ghz_power_decomposition_capped(n: u32, cap: SizeCap) -> Result<Decomposition<Exact>> {
    if n == 0 {
        return Err(Error::input("power", "copy count must be at least 1"));
    }
    let requested = 8u128.checked_pow(n).unwrap_or(u128::MAX);
    cap.check(requested)?;
    let d = 1usize << n;
    let factors = (0..d)
        .map(|x| {
            let e = basis_vector(d, x);
            [e.clone(), e.clone(), e]
        })
        .collect();
    Decomposition::from_factors([d, d, d], factors)
}

/// Seven-term decomposition of `W^{⊗2}` (party order A, B, C), as produced by
/// expanding the seven-product certificate along party A.
pub fn w2_seven_term() -> Decomposition<Exact> {
    let w2 = tensor_power_capped(&crate::tensor::w_state(), 2, SizeCap::default()).expect("fits");
    let traced = Bipartition::new(crate::tensor::Party::A);
    let cert = check_span_containment(&seven_product_spanning_set(), &support_basis(&w2, traced))
        .expect("consistent shapes");
    decomposition_from_certificate(&w2, traced, &cert).expect("positive certificate")
}

/// The seven-term expansion exactly as typeset in the original derivation,
/// read left to right: slot 0 and slot 1 are the displayed pair, slot 2 the
/// trailing factor. Combine with [`Decomposition::permute_parties`] to test
/// other party readings. It does not sum to `W^{⊗2}` under any reading.
pub fn w2_seven_term_printed() -> Decomposition<Exact> {
    let e = |i| basis_vector(4, i);
    let half = |coeffs: &[(usize, i64)]| -> Vec<Exact> {
        combo(4, coeffs).into_iter().map(|x| x * frac(1, 2)).collect()
    };
    let factors = vec![
        [e(3), e(0), e(0)],
        [e(0), e(3), e(0)],
        [e(0), e(0), combo(4, &[(3, 1), (2, -1)])],
        [psi(1), psi(1), half(&[(0, 1), (1, -1), (2, -1)])],
        [psi(2), psi(2), half(&[(1, 1), (0, -1), (2, -1)])],
        [psi(3), psi(3), half(&[(1, 1), (2, 1)])],
        [psi(4), psi(4), half(&[(2, 1), (1, -1)])],
    ];
    Decomposition::from_factors([4, 4, 4], factors).expect("well-formed")
}

/// Rank of the span of a set of product pairs.
pub fn spanning_dimension(spanning: &[ProductPair<Exact>]) -> usize {
    let Some(first) = spanning.first() else {
        return 0;
    };
    let [l, r] = first.dims();
    let rows: Vec<Vec<Exact>> = spanning.iter().map(ProductPair::to_vector).collect();
    exact_matrix_rank(&Matrix::from_rows(&rows, l * r))
}

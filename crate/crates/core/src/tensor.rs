//! Dense tripartite tensors, the W and GHZ states, and their Schmidt ranks.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::matrix::{exact_matrix_rank, numerical_rank, Matrix};
use crate::scalar::{Exact, Scalar};

/// Default cap on the number of entries in a constructed tensor.
pub const DEFAULT_SIZE_CAP: usize = 1 << 24;

/// Upper limit on dense entry counts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SizeCap(pub usize);

impl Default for SizeCap {
    fn default() -> Self {
        SizeCap(DEFAULT_SIZE_CAP)
    }
}

impl SizeCap {
    pub fn check(self, requested: u128) -> Result<()> {
        if requested > self.0 as u128 {
            Err(Error::SizeCap {
                requested,
                cap: self.0,
            })
        } else {
            Ok(())
        }
    }
}

/// A party of the tripartite system.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Party {
    A,
    B,
    C,
}

impl Party {
    pub const ALL: [Party; 3] = [Party::A, Party::B, Party::C];

    pub fn index(self) -> usize {
        self as usize
    }

    /// The other two parties, in A, B, C order.
    pub fn others(self) -> [Party; 2] {
        match self {
            Party::A => [Party::B, Party::C],
            Party::B => [Party::A, Party::C],
            Party::C => [Party::A, Party::B],
        }
    }
}

impl std::str::FromStr for Party {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "A" | "a" => Ok(Party::A),
            "B" | "b" => Ok(Party::B),
            "C" | "c" => Ok(Party::C),
            other => Err(Error::input("party", format!("expected A, B or C, got `{other}`"))),
        }
    }
}

impl std::fmt::Display for Party {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{self:?}")
    }
}

/// A cut separating one party from the other two.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Bipartition {
    pub separated: Party,
}

impl Bipartition {
    pub const ALL: [Bipartition; 3] = [
        Bipartition { separated: Party::A },
        Bipartition { separated: Party::B },
        Bipartition { separated: Party::C },
    ];

    pub fn new(separated: Party) -> Self {
        Bipartition { separated }
    }
}

impl From<Party> for Bipartition {
    fn from(p: Party) -> Self {
        Bipartition::new(p)
    }
}

/// Regrouping of per-copy local indices into one party digit.
///
/// For `copies` copies of a `base`-dimensional local space, the local index
/// is the base-`base` number whose digits are the copy indices, copy 1 most
/// significant. With `base = 2, copies = 2`: 0↔00, 1↔01, 2↔10, 3↔11.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DigitEncoding {
    pub base: usize,
    pub copies: u32,
}

impl DigitEncoding {
    pub fn binary(copies: u32) -> Self {
        DigitEncoding { base: 2, copies }
    }

    pub fn dim(&self) -> usize {
        self.base.pow(self.copies)
    }

    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        assert!(index < self.dim(), "index out of range");
        let mut out = vec![0; self.copies as usize];
        for slot in out.iter_mut().rev() {
            *slot = index % self.base;
            index /= self.base;
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        assert_eq!(digits.len(), self.copies as usize, "digit count");
        digits.iter().fold(0, |acc, &d| {
            assert!(d < self.base, "digit out of range");
            acc * self.base + d
        })
    }
}

/// Dense tensor in `H_A ⊗ H_B ⊗ H_C`, stored with C fastest.
#[derive(Clone, Debug, PartialEq)]
pub struct Tensor<S> {
    shape: [usize; 3],
    entries: Vec<S>,
}

pub type ExactTensor = Tensor<Exact>;
pub type FloatTensor = Tensor<Complex64>;

impl<S: Scalar> Tensor<S> {
    pub fn zeros(shape: [usize; 3]) -> Result<Self> {
        Self::zeros_capped(shape, SizeCap::default())
    }

    pub fn zeros_capped(shape: [usize; 3], cap: SizeCap) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::input("shape", "dimensions must be positive"));
        }
        cap.check(shape.iter().map(|&d| d as u128).product())?;
        Ok(Tensor {
            shape,
            entries: vec![S::zero(); shape.iter().product()],
        })
    }

    pub fn from_entries(shape: [usize; 3], entries: Vec<S>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::input("shape", "dimensions must be positive"));
        }
        if entries.len() != shape.iter().product::<usize>() {
            return Err(Error::input(
                "entries",
                format!("expected {} entries, got {}", shape.iter().product::<usize>(), entries.len()),
            ));
        }
        Ok(Tensor { shape, entries })
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[S] {
        &self.entries
    }

    fn offset(&self, [a, b, c]: [usize; 3]) -> usize {
        assert!(
            a < self.shape[0] && b < self.shape[1] && c < self.shape[2],
            "index {:?} out of bounds for shape {:?}",
            [a, b, c],
            self.shape
        );
        (a * self.shape[1] + b) * self.shape[2] + c
    }

    pub fn get(&self, idx: [usize; 3]) -> &S {
        &self.entries[self.offset(idx)]
    }

    pub fn set(&mut self, idx: [usize; 3], value: S) {
        let o = self.offset(idx);
        self.entries[o] = value;
    }

    pub fn index_of(&self, offset: usize) -> [usize; 3] {
        let c = offset % self.shape[2];
        let ab = offset / self.shape[2];
        [ab / self.shape[1], ab % self.shape[1], c]
    }

    /// Nonzero entries in increasing (a, b, c) order.
    pub fn nonzero(&self) -> impl Iterator<Item = ([usize; 3], &S)> {
        self.entries
            .iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(o, v)| (self.index_of(o), v))
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    pub fn to_float(&self) -> FloatTensor {
        Tensor {
            shape: self.shape,
            entries: self.entries.iter().map(Scalar::to_complex64).collect(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|v| v.to_complex64().norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Outer product `x ⊗ y ⊗ z`.
    pub fn product(x: &[S], y: &[S], z: &[S]) -> Result<Self> {
        let mut t = Self::zeros([x.len(), y.len(), z.len()])?;
        for (a, xa) in x.iter().enumerate() {
            if xa.is_zero() {
                continue;
            }
            for (b, yb) in y.iter().enumerate() {
                if yb.is_zero() {
                    continue;
                }
                let xy = xa.clone() * yb.clone();
                for (c, zc) in z.iter().enumerate() {
                    if !zc.is_zero() {
                        t.set([a, b, c], xy.clone() * zc.clone());
                    }
                }
            }
        }
        Ok(t)
    }

    /// Kronecker product with copy `self` most significant in every party digit.
    pub fn kron(&self, other: &Self, cap: SizeCap) -> Result<Self> {
        let shape = [
            self.shape[0] * other.shape[0],
            self.shape[1] * other.shape[1],
            self.shape[2] * other.shape[2],
        ];
        let mut out = Self::zeros_capped(shape, cap)?;
        let rhs: Vec<_> = other.nonzero().collect();
        for ([a, b, c], x) in self.nonzero() {
            for &([p, q, r], y) in &rhs {
                let idx = [
                    a * other.shape[0] + p,
                    b * other.shape[1] + q,
                    c * other.shape[2] + r,
                ];
                out.set(idx, x.clone() * y.clone());
            }
        }
        Ok(out)
    }

    /// Matricization: rows indexed by the separated party, columns by the
    /// joint index of the other two (first of them most significant).
    pub fn unfold(&self, cut: Bipartition) -> Matrix<S> {
        let sep = cut.separated.index();
        let [p, q] = cut.separated.others().map(Party::index);
        let (rows, inner) = (self.shape[sep], self.shape[q]);
        let cols = self.shape[p] * inner;
        let mut data = vec![S::zero(); rows * cols];
        for (o, v) in self.entries.iter().enumerate() {
            if v.is_zero() {
                continue;
            }
            let idx = self.index_of(o);
            data[idx[sep] * cols + idx[p] * inner + idx[q]] = v.clone();
        }
        Matrix::from_vec(rows, cols, data)
    }

    /// For each basis index of the separated party, the vector held by the
    /// other two parties.
    pub fn slice_states(&self, cut: Bipartition) -> Vec<Vec<S>> {
        self.unfold(cut).rows().map(<[S]>::to_vec).collect()
    }

    /// Inverse of [`Tensor::slice_states`]: `Σ_i |i⟩_sep ⊗ slice_i`.
    pub fn from_slices(slices: &[Vec<S>], cut: Bipartition, shape: [usize; 3]) -> Result<Self> {
        let sep = cut.separated.index();
        let [p, q] = cut.separated.others().map(Party::index);
        if slices.len() != shape[sep] {
            return Err(Error::input("slices", "slice count does not match shape"));
        }
        let mut t = Self::zeros(shape)?;
        for (i, s) in slices.iter().enumerate() {
            if s.len() != shape[p] * shape[q] {
                return Err(Error::input("slices", "slice length does not match shape"));
            }
            for (j, v) in s.iter().enumerate() {
                if v.is_zero() {
                    continue;
                }
                let mut idx = [0; 3];
                idx[sep] = i;
                idx[p] = j / shape[q];
                idx[q] = j % shape[q];
                t.set(idx, v.clone());
            }
        }
        Ok(t)
    }

    /// Applies one local operator per party: `(M_A ⊗ M_B ⊗ M_C) |t⟩`.
    pub fn apply_local(&self, ops: [&Matrix<S>; 3]) -> Result<Self> {
        for (k, m) in ops.iter().enumerate() {
            if m.ncols() != self.shape[k] {
                return Err(Error::input(
                    format!("operator[{k}]"),
                    format!("expects dimension {}, tensor has {}", m.ncols(), self.shape[k]),
                ));
            }
        }
        let shape = [ops[0].nrows(), ops[1].nrows(), ops[2].nrows()];
        let mut out = Self::zeros(shape)?;
        for ([a, b, c], v) in self.nonzero() {
            for x in 0..shape[0] {
                let fa = ops[0].get(x, a);
                if fa.is_zero() {
                    continue;
                }
                let va = fa.clone() * v.clone();
                for y in 0..shape[1] {
                    let fb = ops[1].get(y, b);
                    if fb.is_zero() {
                        continue;
                    }
                    let vab = va.clone() * fb.clone();
                    for z in 0..shape[2] {
                        let fc = ops[2].get(z, c);
                        if !fc.is_zero() {
                            let o = out.offset([x, y, z]);
                            out.entries[o] = out.entries[o].clone() + vab.clone() * fc.clone();
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

impl std::ops::Sub for &Tensor<Exact> {
    type Output = Tensor<Exact>;

    fn sub(self, rhs: Self) -> Tensor<Exact> {
        assert_eq!(self.shape, rhs.shape, "shape mismatch");
        Tensor {
            shape: self.shape,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(x, y)| x - y)
                .collect(),
        }
    }
}

impl Tensor<Exact> {
    /// Exact squared Frobenius norm.
    pub fn norm_sqr(&self) -> BigRational {
        self.entries.iter().map(crate::scalar::norm_sqr).sum()
    }
}

/// Unnormalized `|100⟩ + |010⟩ + |001⟩`.
pub fn w_state() -> ExactTensor {
    let mut t = Tensor::zeros([2, 2, 2]).expect("fits");
    for idx in [[1, 0, 0], [0, 1, 0], [0, 0, 1]] {
        t.set(idx, Exact::one());
    }
    t
}

/// Unnormalized `|000⟩ + |111⟩`.
pub fn ghz_state() -> ExactTensor {
    let mut t = Tensor::zeros([2, 2, 2]).expect("fits");
    t.set([0, 0, 0], Exact::one());
    t.set([1, 1, 1], Exact::one());
    t
}

/// `t^{⊗n}` with each party's copy indices regrouped by [`DigitEncoding`].
pub fn tensor_power(t: &ExactTensor, n: u32) -> Result<ExactTensor> {
    tensor_power_capped(t, n, SizeCap::default())
}

pub fn tensor_power_capped(t: &ExactTensor, n: u32, cap: SizeCap) -> Result<ExactTensor> {
    if n == 0 {
        return Err(Error::input("power", "copy count must be at least 1"));
    }
    let requested = t
        .shape
        .iter()
        .try_fold(1u128, |acc, &d| acc.checked_mul((d as u128).checked_pow(n)?))
        .unwrap_or(u128::MAX);
    cap.check(requested)?;
    let mut out = t.clone();
    for _ in 1..n {
        out = out.kron(t, cap)?;
    }
    Ok(out)
}

/// Rank of the unfolding across `cut`, computed exactly.
pub fn schmidt_rank(t: &ExactTensor, cut: Bipartition) -> usize {
    exact_matrix_rank(&t.unfold(cut))
}

/// Floating-point Schmidt rank; for diagnostics only.
pub fn numerical_schmidt_rank(t: &FloatTensor, cut: Bipartition) -> usize {
    numerical_rank(&t.unfold(cut))
}

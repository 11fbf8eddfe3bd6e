//! Product states and weighted sums of them.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::tensor::{Party, Tensor};

/// `|x⟩_A |y⟩_B |z⟩_C` with no zero factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductState<S> {
    factors: [Vec<S>; 3],
}

impl<S: Scalar> ProductState<S> {
    pub fn new(factors: [Vec<S>; 3]) -> Result<Self> {
        for (k, f) in factors.iter().enumerate() {
            if f.is_empty() || f.iter().all(Zero::is_zero) {
                return Err(Error::input(format!("factors[{k}]"), "zero local vector"));
            }
        }
        Ok(ProductState { factors })
    }

    pub fn factors(&self) -> &[Vec<S>; 3] {
        &self.factors
    }

    pub fn factor(&self, p: Party) -> &[S] {
        &self.factors[p.index()]
    }

    pub fn shape(&self) -> [usize; 3] {
        [
            self.factors[0].len(),
            self.factors[1].len(),
            self.factors[2].len(),
        ]
    }

    pub fn to_tensor(&self) -> Result<Tensor<S>> {
        Tensor::product(&self.factors[0], &self.factors[1], &self.factors[2])
    }
}

/// Two-party product `|x⟩|y⟩`, the building block of span certificates.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductPair<S> {
    pub left: Vec<S>,
    pub right: Vec<S>,
}

impl<S: Scalar> ProductPair<S> {
    pub fn new(left: Vec<S>, right: Vec<S>) -> Result<Self> {
        if left.iter().all(Zero::is_zero) || right.iter().all(Zero::is_zero) {
            return Err(Error::input("pair", "zero local vector"));
        }
        Ok(ProductPair { left, right })
    }

    pub fn dims(&self) -> [usize; 2] {
        [self.left.len(), self.right.len()]
    }

    /// Kronecker vector, left index most significant.
    pub fn to_vector(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(self.left.len() * self.right.len());
        for x in &self.left {
            for y in &self.right {
                out.push(x.clone() * y.clone());
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Term<S> {
    pub weight: S,
    pub state: ProductState<S>,
}

/// `Σ_k w_k |x_k⟩|y_k⟩|z_k⟩` for a target of fixed shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition<S> {
    shape: [usize; 3],
    terms: Vec<Term<S>>,
}

impl<S: Scalar> Decomposition<S> {
    pub fn new(shape: [usize; 3], terms: Vec<Term<S>>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::input("terms", "a decomposition needs at least one term"));
        }
        for (k, t) in terms.iter().enumerate() {
            if t.state.shape() != shape {
                return Err(Error::input(
                    format!("terms[{k}].factors"),
                    format!("shape {:?} does not match {:?}", t.state.shape(), shape),
                ));
            }
        }
        Ok(Decomposition { shape, terms })
    }

    /// Unit-weight terms from factor triples.
    pub fn from_factors(shape: [usize; 3], factors: Vec<[Vec<S>; 3]>) -> Result<Self> {
        let terms = factors
            .into_iter()
            .map(|f| {
                Ok(Term {
                    weight: S::one(),
                    state: ProductState::new(f)?,
                })
            })
            .collect::<Result<_>>()?;
        Self::new(shape, terms)
    }

    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn terms(&self) -> &[Term<S>] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The tensor the decomposition sums to.
    pub fn reconstruct(&self) -> Result<Tensor<S>> {
        let mut acc = Tensor::<S>::zeros(self.shape)?.entries().to_vec();
        let [_, db, dc] = self.shape;
        for t in &self.terms {
            let [x, y, z] = t.state.factors();
            for (a, xa) in x.iter().enumerate() {
                if xa.is_zero() {
                    continue;
                }
                let wx = t.weight.clone() * xa.clone();
                for (b, yb) in y.iter().enumerate() {
                    if yb.is_zero() {
                        continue;
                    }
                    let wxy = wx.clone() * yb.clone();
                    for (c, zc) in z.iter().enumerate() {
                        if !zc.is_zero() {
                            let o = (a * db + b) * dc + c;
                            acc[o] = acc[o].clone() + wxy.clone() * zc.clone();
                        }
                    }
                }
            }
        }
        Tensor::from_entries(self.shape, acc)
    }

    /// Reassigns factor slots to parties: party `p` receives slot `slots[p]`.
    pub fn permute_parties(&self, slots: [usize; 3]) -> Result<Self> {
        let mut seen = [false; 3];
        for &s in &slots {
            if s > 2 || std::mem::replace(&mut seen[s], true) {
                return Err(Error::input("slots", "not a permutation of 0, 1, 2"));
            }
        }
        let shape = slots.map(|s| self.shape[s]);
        let terms = self
            .terms
            .iter()
            .map(|t| Term {
                weight: t.weight.clone(),
                state: ProductState {
                    factors: slots.map(|s| t.state.factors[s].clone()),
                },
            })
            .collect();
        Ok(Decomposition { shape, terms })
    }

    pub fn to_float(&self) -> Decomposition<num_complex::Complex64> {
        Decomposition {
            shape: self.shape,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    weight: t.weight.to_complex64(),
                    state: ProductState {
                        factors: t
                            .state
                            .factors
                            .clone()
                            .map(|f| f.iter().map(Scalar::to_complex64).collect()),
                    },
                })
                .collect(),
        }
    }
}

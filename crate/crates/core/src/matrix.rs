//! Small dense matrices with exact rank and reduced echelon form.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_complex::{Complex, Complex64};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::scalar::{Exact, Scalar};

/// Row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Clone> Matrix<T> {
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    /// Builds a matrix from equal-length rows. An empty list gives a 0×`cols` matrix.
    pub fn from_rows(rows: &[Vec<T>], cols: usize) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix {
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.cols + j]
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[T]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn transpose(&self) -> Self {
        let mut data = Vec::with_capacity(self.data.len());
        for j in 0..self.cols {
            for i in 0..self.rows {
                data.push(self.get(i, j).clone());
            }
        }
        Matrix {
            rows: self.cols,
            cols: self.rows,
            data,
        }
    }

    pub fn map<U: Clone>(&self, f: impl Fn(&T) -> U) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(d: usize) -> Self {
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            m.data[i * d + i] = T::one();
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.get(k, j);
                    if !b.is_zero() {
                        let slot = &mut out.data[i * other.cols + j];
                        *slot = slot.clone() + a.clone() * b.clone();
                    }
                }
            }
        }
        out
    }
}

/// Rank over the complex rationals.
///
/// Rows are scaled to Gaussian integers and reduced with Bareiss' fraction-free
/// elimination; the pivot is the lowest-index row with a nonzero entry in the
/// leftmost remaining column.
pub fn exact_matrix_rank(m: &Matrix<Exact>) -> usize {
    // Zero columns do not change the rank.
    let live: Vec<usize> = (0..m.ncols())
        .filter(|&j| (0..m.nrows()).any(|i| !m.get(i, j).is_zero()))
        .collect();
    let pruned: Vec<Vec<Exact>> = m
        .rows()
        .map(|r| live.iter().map(|&j| r[j].clone()).collect())
        .collect();
    let m = Matrix::from_rows(&pruned, live.len());
    let m = if m.nrows() > m.ncols() { m.transpose() } else { m };
    let rows: Vec<Vec<Complex<BigInt>>> = m.rows().map(gaussian_integer_row).collect();
    if rows.iter().all(|r| r.iter().all(|z| z.im.is_zero())) {
        let real = rows
            .into_iter()
            .map(|r| r.into_iter().map(|z| z.re).collect())
            .collect();
        bareiss_rank(real, m.ncols())
    } else {
        bareiss_rank(rows, m.ncols())
    }
}

/// Multiplies a row by the lcm of its denominators.
fn gaussian_integer_row(row: &[Exact]) -> Vec<Complex<BigInt>> {
    let lcm = row.iter().fold(BigInt::one(), |acc, z| {
        acc.lcm(z.re.denom()).lcm(z.im.denom())
    });
    row.iter()
        .map(|z| {
            let scale = |q: &BigRational| q.numer() * (&lcm / q.denom());
            Complex::new(scale(&z.re), scale(&z.im))
        })
        .collect()
}

fn bareiss_rank<T>(mut rows: Vec<Vec<T>>, cols: usize) -> usize
where
    T: Clone + Zero + One + std::ops::Sub<Output = T> + std::ops::Div<Output = T>,
    for<'a> &'a T: std::ops::Mul<&'a T, Output = T>,
{
    let n = rows.len();
    let mut prev = T::one();
    let mut rank = 0;
    for col in 0..cols {
        if rank == n {
            break;
        }
        let Some(p) = (rank..n).find(|&i| !rows[i][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let (head, tail) = rows.split_at_mut(rank + 1);
        let pivot_row = &head[rank];
        let pivot = pivot_row[col].clone();
        for row in tail.iter_mut() {
            let lead = row[col].clone();
            for j in col + 1..cols {
                let keep = &pivot * &row[j];
                let cross = if lead.is_zero() || pivot_row[j].is_zero() {
                    T::zero()
                } else {
                    &lead * &pivot_row[j]
                };
                row[j] = if keep.is_zero() && cross.is_zero() {
                    T::zero()
                } else {
                    (keep - cross) / prev.clone()
                };
            }
            row[col] = T::zero();
        }
        prev = pivot;
        rank += 1;
    }
    rank
}

/// Reduced row echelon form over the exact field, in place.
///
/// Pivot columns are taken left to right and within a column the lowest-index
/// remaining row wins. Returns the pivot columns; rows past their count are zero.
pub fn rref(m: &mut Matrix<Exact>) -> Vec<usize> {
    let (rows, cols) = (m.rows, m.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m.get(i, col).is_zero()) else {
            continue;
        };
        if p != r {
            for j in 0..cols {
                m.data.swap(p * cols + j, r * cols + j);
            }
        }
        let inv = Exact::one() / m.get(r, col).clone();
        for j in col..cols {
            let v = &mut m.data[r * cols + j];
            if !v.is_zero() {
                *v = v.clone() * inv.clone();
            }
        }
        for i in 0..rows {
            if i == r {
                continue;
            }
            let f = m.get(i, col).clone();
            if f.is_zero() {
                continue;
            }
            for j in col..cols {
                let src = m.get(r, j).clone();
                if !src.is_zero() {
                    let v = &mut m.data[i * cols + j];
                    *v = v.clone() - f.clone() * src;
                }
            }
        }
        pivots.push(col);
        r += 1;
    }
    pivots
}

/// Numerical rank by column-pivoted QR with cutoff `1e-9 · (largest column norm)`.
///
/// Diagnostics only; never feeds a certificate.
pub fn numerical_rank(m: &Matrix<Complex64>) -> usize {
    const RELATIVE_CUTOFF: f64 = 1e-9;
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let dm = DMatrix::from_row_slice(m.nrows(), m.ncols(), &m.data);
    let largest = dm
        .column_iter()
        .map(|c| c.norm())
        .fold(0.0_f64, f64::max);
    if largest == 0.0 {
        return 0;
    }
    let r = dm.col_piv_qr().r();
    let k = r.nrows().min(r.ncols());
    (0..k)
        .filter(|&i| r[(i, i)].norm() > RELATIVE_CUTOFF * largest)
        .count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{frac, int};

    fn exact(rows: &[&[i64]]) -> Matrix<Exact> {
        let cols = rows.first().map_or(0, |r| r.len());
        let v: Vec<Vec<Exact>> = rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect();
        Matrix::from_rows(&v, cols)
    }

    #[test]
    fn rank_basics() {
        assert_eq!(exact_matrix_rank(&Matrix::zeros(3, 5)), 0);
        for d in 1..6 {
            assert_eq!(exact_matrix_rank(&Matrix::identity(d)), d);
        }
        assert_eq!(exact_matrix_rank(&exact(&[&[0, 1, 1, 0], &[1, 0, 0, 0]])), 2);
        assert_eq!(exact_matrix_rank(&exact(&[&[1, 2], &[2, 4], &[3, 6]])), 1);
        assert_eq!(exact_matrix_rank(&Matrix::from_rows(&[], 4)), 0);
    }

    #[test]
    fn rank_with_fractions_and_imaginary_parts() {
        let i = Complex::new(BigRational::zero(), BigRational::one());
        // [[1, i], [i, -1]] has rank 1; [[1/2, i], [i, 1/3]] is full rank.
        let m = Matrix::from_rows(&[vec![int(1), i.clone()], vec![i.clone(), int(-1)]], 2);
        assert_eq!(exact_matrix_rank(&m), 1);
        let m = Matrix::from_rows(&[vec![frac(1, 2), i.clone()], vec![i, frac(1, 3)]], 2);
        assert_eq!(exact_matrix_rank(&m), 2);
    }

    #[test]
    fn rref_is_canonical() {
        let mut m = exact(&[&[0, 2, 4], &[1, 1, 1], &[1, 2, 3]]);
        let piv = rref(&mut m);
        assert_eq!(piv, vec![0, 1]);
        assert_eq!(m, exact(&[&[1, 0, -1], &[0, 1, 2], &[0, 0, 0]]));
    }

    #[test]
    fn numerical_rank_threshold() {
        let m = Matrix::from_vec(
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0 + 1e-12, 0.0),
            ],
        );
        assert_eq!(numerical_rank(&m), 1);
        let m = m.map(|z| z * Complex64::new(0.0, 1.0));
        assert_eq!(numerical_rank(&m), 1);
        assert_eq!(numerical_rank(&Matrix::<Complex64>::identity(4)), 4);
    }
}

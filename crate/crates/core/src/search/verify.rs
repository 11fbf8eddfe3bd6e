use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::decomposition::Decomposition;
use crate::error::{Error, Result};
use crate::scalar::{norm_sqr, Exact, Scalar};
use crate::tensor::{ExactTensor, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerifyMode {
    Exact,
    Approx,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerificationResult {
    pub mode: VerifyMode,
    /// Exact mode: the difference is identically zero. Approx mode: the
    /// residual is within tolerance.
    pub passed: bool,
    /// Frobenius norm of `reconstruction − target`; informational in exact mode.
    pub residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    /// Number of entries where the two sides differ (exact mode).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatched_entries: Option<usize>,
    /// Entry with the largest difference, lowest index first on ties.
    pub worst_index: Option<[usize; 3]>,
    /// The difference at `worst_index`, as `{re, im}` text.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub worst_difference: Option<crate::json::ScalarJson>,
}

fn check_shapes(target: [usize; 3], d: [usize; 3]) -> Result<()> {
    if target != d {
        return Err(Error::input(
            "shape",
            format!("decomposition shape {d:?} does not match target {target:?}"),
        ));
    }
    Ok(())
}

/// Exact entrywise comparison; no tolerance involved.
pub fn verify_exact(t: &ExactTensor, d: &Decomposition<Exact>) -> Result<VerificationResult> {
    check_shapes(t.shape(), d.shape())?;
    let diff = &d.reconstruct()? - t;
    let mut worst: Option<(usize, BigRational)> = None;
    let mut mismatched = 0;
    let mut total = BigRational::zero();
    for (o, v) in diff.entries().iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        mismatched += 1;
        let n = norm_sqr(v);
        total += &n;
        if worst.as_ref().is_none_or(|(_, w)| n > *w) {
            worst = Some((o, n));
        }
    }
    let worst_index = worst.map(|(o, _)| diff.index_of(o));
    Ok(VerificationResult {
        mode: VerifyMode::Exact,
        passed: mismatched == 0,
        residual: num_traits::ToPrimitive::to_f64(&total).unwrap_or(f64::INFINITY).sqrt(),
        tolerance: None,
        mismatched_entries: Some(mismatched),
        worst_index,
        worst_difference: worst_index.map(|i| crate::json::ScalarJson::from_scalar(diff.get(i))),
    })
}

/// Frobenius residual in double precision, compared against `tol`.
pub fn verify_approx<S: Scalar, D: Scalar>(
    t: &Tensor<S>,
    d: &Decomposition<D>,
    tol: f64,
) -> Result<VerificationResult> {
    check_shapes(t.shape(), d.shape())?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::input("tol", "tolerance must be positive"));
    }
    let recon = d.to_float().reconstruct()?;
    let target = t.to_float();
    let mut worst: Option<(usize, f64)> = None;
    let mut total = 0.0;
    for (o, (x, y)) in recon.entries().iter().zip(target.entries()).enumerate() {
        let n = (x - y).norm_sqr();
        total += n;
        if n > 0.0 && worst.is_none_or(|(_, w)| n > w) {
            worst = Some((o, n));
        }
    }
    let residual = total.sqrt();
    let worst_index = worst.map(|(o, _)| target.index_of(o));
    Ok(VerificationResult {
        mode: VerifyMode::Approx,
        passed: residual <= tol,
        residual,
        tolerance: Some(tol),
        mismatched_entries: None,
        worst_index,
        worst_difference: worst_index.map(|i| {
            crate::json::ScalarJson::from_scalar(&(recon.get(i) - target.get(i)))
        }),
    })
}

pub fn verify_decomposition(
    t: &ExactTensor,
    d: &Decomposition<Exact>,
    mode: VerifyMode,
    tol: f64,
) -> Result<VerificationResult> {
    match mode {
        VerifyMode::Exact => verify_exact(t, d),
        VerifyMode::Approx => verify_approx(t, d, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certificate::{basis_vector, w2_seven_term, w2_seven_term_printed};
    use crate::tensor::{tensor_power, w_state};

    fn w_three_terms() -> Decomposition<Exact> {
        let e = |i| basis_vector(2, i);
        Decomposition::from_factors(
            [2, 2, 2],
            vec![[e(0), e(0), e(1)], [e(0), e(1), e(0)], [e(1), e(0), e(0)]],
        )
        .unwrap()
    }

    #[test]
    fn w_basis_sum_is_exact() {
        let r = verify_exact(&w_state(), &w_three_terms()).unwrap();
        assert!(r.passed);
        assert_eq!(r.mismatched_entries, Some(0));
        assert_eq!(r.worst_index, None);
        let r = verify_approx(&w_state(), &w_three_terms(), 1e-12).unwrap();
        assert!(r.passed && r.residual == 0.0);
    }

    #[test]
    fn seven_terms_exact_and_printed_not() {
        let w2 = tensor_power(&w_state(), 2).unwrap();
        assert!(verify_exact(&w2, &w2_seven_term()).unwrap().passed);
        let r = verify_exact(&w2, &w2_seven_term_printed()).unwrap();
        assert!(!r.passed);
        let worst = r.worst_difference.unwrap();
        assert!(worst.re == "2" || worst.re == "-2", "{worst:?}");
    }

    #[test]
    fn shape_mismatch() {
        let w2 = tensor_power(&w_state(), 2).unwrap();
        assert!(matches!(verify_exact(&w2, &w_three_terms()), Err(Error::Input { .. })));
        assert!(verify_approx(&w_state(), &w_three_terms(), 0.0).is_err());
    }
}

//! Lower and upper bounds on tensor rank, with provenance.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::certificate::{
    check_span_containment, decomposition_from_certificate, diagonal_spanning_set,
    seven_product_spanning_set, support_basis, SpanCertificate,
};
use crate::decomposition::ProductPair;
use crate::error::{Error, Result};
use crate::matrix::{exact_matrix_rank, Matrix};
use crate::scalar::{int, Exact};
use crate::tensor::{
    ghz_state, schmidt_rank, tensor_power, w_state, Bipartition, ExactTensor, Party,
};

/// `2^(n+1) − 1`, the lower bound on the rank of `W^{⊗n}`.
pub fn w_power_lower_bound(n: u32) -> BigUint {
    (BigUint::one() << (n + 1)) - 1u32
}

/// `7^(n/2)` for even `n` and `3·7^((n−1)/2)` for odd `n`.
pub fn w_power_upper_bound(n: u32) -> BigUint {
    let seven = BigUint::from(7u32);
    if n.is_multiple_of(2) {
        seven.pow(n / 2)
    } else {
        BigUint::from(3u32) * seven.pow((n - 1) / 2)
    }
}

/// Largest Schmidt rank over the three cuts.
pub fn flattening_lower_bound(t: &ExactTensor) -> usize {
    Bipartition::ALL
        .iter()
        .map(|&cut| schmidt_rank(t, cut))
        .max()
        .unwrap_or(0)
}

/// Flattening bound of `base^{⊗n}`: unfoldings of a tensor power are
/// Kronecker powers of the base unfoldings, and matrix rank is multiplicative
/// under Kronecker products.
pub fn power_flattening_lower_bound(base: &ExactTensor, n: u32) -> BigUint {
    Bipartition::ALL
        .iter()
        .map(|&cut| BigUint::from(schmidt_rank(base, cut)).pow(n))
        .max()
        .unwrap_or_default()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub n: u32,
    pub trials: u64,
    pub seed: u64,
    pub expected_rank: usize,
    /// Coefficient vectors `(α_0, …, α_{2^n−2})` whose perturbed state fell short of full rank.
    pub failures: Vec<Vec<i64>>,
    pub verdict: bool,
}

/// `φ_i` as a `2^n × 2^n` matrix (rows B, columns C): the Kronecker product
/// over copies of `|00⟩` (bit 0) or `|01⟩+|10⟩` (bit 1), copy 1 from the most
/// significant bit of `i`.
pub fn lemma2_phi(n: u32, i: usize) -> Matrix<Exact> {
    let zero_zero = Matrix::from_vec(2, 2, vec![int(1), int(0), int(0), int(0)]);
    let swap = Matrix::from_vec(2, 2, vec![int(0), int(1), int(1), int(0)]);
    let mut out = Matrix::from_vec(1, 1, vec![int(1)]);
    for copy in (0..n).rev() {
        let block = if (i >> copy) & 1 == 1 { &swap } else { &zero_zero };
        out = kron(&out, block);
    }
    out
}

fn kron(x: &Matrix<Exact>, y: &Matrix<Exact>) -> Matrix<Exact> {
    let (r, c) = (x.nrows() * y.nrows(), x.ncols() * y.ncols());
    let mut data = vec![Exact::zero(); r * c];
    for i in 0..x.nrows() {
        for j in 0..x.ncols() {
            let a = x.get(i, j);
            if a.is_zero() {
                continue;
            }
            for k in 0..y.nrows() {
                for l in 0..y.ncols() {
                    let b = y.get(k, l);
                    if !b.is_zero() {
                        data[(i * y.nrows() + k) * c + j * y.ncols() + l] = a * b;
                    }
                }
            }
        }
    }
    Matrix::from_vec(r, c, data)
}

/// Matrix of `φ_{2^n−1} + Σ_{i<2^n−1} α_i φ_i`.
pub fn lemma2_perturbed(n: u32, alphas: &[i64]) -> Matrix<Exact> {
    let top = (1usize << n) - 1;
    assert_eq!(alphas.len(), top, "one coefficient per lower φ_i");
    let d = 1usize << n;
    let mut acc = lemma2_phi(n, top).rows().flatten().cloned().collect::<Vec<_>>();
    for (i, &alpha) in alphas.iter().enumerate() {
        if alpha == 0 {
            continue;
        }
        let phi = lemma2_phi(n, i);
        for (slot, v) in acc.iter_mut().zip(phi.rows().flatten()) {
            if !v.is_zero() {
                *slot = slot.clone() + v * int(alpha);
            }
        }
    }
    Matrix::from_vec(d, d, acc)
}

/// Range of the integer coefficients drawn per trial.
pub const WITNESS_COEFF_RANGE: std::ops::RangeInclusive<i64> = -9..=9;

/// Spot-checks that `φ_{2^n−1} + Σ α_i φ_i` has full Schmidt rank `2^n` for
/// random integer `α`. Trial `k` draws from a generator seeded with `seed + k`,
/// so the report does not depend on scheduling.
pub fn lemma2_witness_check(n: u32, trials: u64, seed: u64) -> Result<WitnessReport> {
    if n == 0 {
        return Err(Error::input("n", "copy count must be at least 1"));
    }
    if n > 12 {
        return Err(Error::SizeCap {
            requested: 1u128 << (2 * n),
            cap: 1 << 24,
        });
    }
    let expected_rank = 1usize << n;
    let failures: Vec<Vec<i64>> = (0..trials)
        .into_par_iter()
        .filter_map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial));
            let alphas: Vec<i64> = (0..expected_rank - 1)
                .map(|_| rng.random_range(WITNESS_COEFF_RANGE))
                .collect();
            let rank = exact_matrix_rank(&lemma2_perturbed(n, &alphas));
            (rank != expected_rank).then_some(alphas)
        })
        .collect();
    Ok(WitnessReport {
        n,
        trials,
        seed,
        expected_rank,
        verdict: failures.is_empty(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Lemma2ClosedForm,
    TheoremAClosedForm,
    Flattening,
    SpanCertificate(String),
}

impl std::fmt::Display for Provenance {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Provenance::Lemma2ClosedForm => f.write_str("lemma2-closed-form"),
            Provenance::TheoremAClosedForm => f.write_str("theorem-a-closed-form"),
            Provenance::Flattening => f.write_str("flattening"),
            Provenance::SpanCertificate(id) => write!(f, "span-certificate:{id}"),
        }
    }
}

impl Serialize for Provenance {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

fn as_string<S: Serializer>(v: &BigUint, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

fn opt_as_string<S: Serializer>(
    v: &Option<BigUint>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(v) => s.collect_str(v),
        None => s.serialize_none(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Bound {
    #[serde(serialize_with = "as_string")]
    pub value: BigUint,
    pub provenance: Provenance,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub state: String,
    pub lower: Vec<Bound>,
    pub upper: Vec<Bound>,
    #[serde(serialize_with = "opt_as_string")]
    pub resolved_rank: Option<BigUint>,
}

impl BoundReport {
    fn assemble(state: String, lower: Vec<Bound>, upper: Vec<Bound>) -> Result<Self> {
        let lo = lower.iter().map(|b| &b.value).max().cloned();
        let hi = upper.iter().map(|b| &b.value).min().cloned();
        if let (Some(lo), Some(hi)) = (&lo, &hi) {
            if lo > hi {
                return Err(Error::Contract(format!(
                    "bounds for {state} are inconsistent: lower {lo} exceeds upper {hi}"
                )));
            }
        }
        let resolved_rank = match (lo, hi) {
            (Some(lo), Some(hi)) if lo == hi => Some(lo),
            _ => None,
        };
        Ok(BoundReport {
            state,
            lower,
            upper,
            resolved_rank,
        })
    }

    pub fn max_lower(&self) -> Option<&BigUint> {
        self.lower.iter().map(|b| &b.value).max()
    }

    pub fn min_upper(&self) -> Option<&BigUint> {
        self.upper.iter().map(|b| &b.value).min()
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("state: {}\n", self.state);
        for b in &self.lower {
            out += &format!("  lower {:>8}  ({})\n", b.value, b.provenance);
        }
        for b in &self.upper {
            out += &format!("  upper {:>8}  ({})\n", b.value, b.provenance);
        }
        match &self.resolved_rank {
            Some(r) => out += &format!("  rank  {r:>8}  (resolved)"),
            None => out += "  rank  unresolved",
        }
        out
    }
}

/// A certificate supplied for a tensor, with the party it was built against.
#[derive(Clone, Debug)]
pub struct SuppliedCertificate {
    pub id: String,
    pub traced: Bipartition,
    pub certificate: SpanCertificate,
}

#[derive(Clone, Debug)]
pub enum BoundSpec {
    WPower(u32),
    GhzPower(u32),
    Tensor {
        label: String,
        tensor: ExactTensor,
        certificates: Vec<SuppliedCertificate>,
    },
}

/// Tensors above this many entries get their flattening bound from the base
/// state instead of an explicit unfolding.
const EXPLICIT_FLATTENING_LIMIT: usize = 1 << 15;

fn certificate_bound(t: &ExactTensor, supplied: &SuppliedCertificate) -> Result<Bound> {
    let reject = |why: String| {
        Error::input(
            format!("certificate `{}`", supplied.id),
            format!("rejected: {why}"),
        )
    };
    let cert = &supplied.certificate;
    if !cert.verdict() {
        return Err(reject(format!(
            "negative verdict, unreachable support vectors {:?}",
            cert.unreachable
        )));
    }
    if !cert.reverify() {
        return Err(reject("coordinates do not reproduce the support basis".into()));
    }
    let d = decomposition_from_certificate(t, supplied.traced, cert).map_err(|e| reject(e.to_string()))?;
    if &d.reconstruct()? != t {
        return Err(reject("expanded decomposition does not sum to the tensor".into()));
    }
    Ok(Bound {
        value: BigUint::from(d.len()),
        provenance: Provenance::SpanCertificate(supplied.id.clone()),
    })
}

fn built_in_certificate(
    id: &str,
    t: &ExactTensor,
    spanning: Vec<ProductPair<Exact>>,
) -> Result<Bound> {
    let traced = Bipartition::new(Party::A);
    let certificate = check_span_containment(&spanning, &support_basis(t, traced))?;
    certificate_bound(
        t,
        &SuppliedCertificate {
            id: id.to_string(),
            traced,
            certificate,
        },
    )
}

/// Collects every bound that applies to `spec` and resolves the rank when
/// the best lower and upper bounds meet. Only closed forms, exact unfoldings
/// and exactly re-verified certificates enter the report.
pub fn bound_report(spec: &BoundSpec) -> Result<BoundReport> {
    match spec {
        BoundSpec::WPower(n) => {
            let n = *n;
            if n == 0 {
                return Err(Error::input("power", "copy count must be at least 1"));
            }
            let lower = vec![
                Bound {
                    value: w_power_lower_bound(n),
                    provenance: Provenance::Lemma2ClosedForm,
                },
                Bound {
                    value: power_flattening_lower_bound(&w_state(), n),
                    provenance: Provenance::Flattening,
                },
            ];
            let mut upper = vec![Bound {
                value: w_power_upper_bound(n),
                provenance: Provenance::TheoremAClosedForm,
            }];
            match n {
                1 => {
                    let e = |i| crate::certificate::basis_vector(2, i);
                    let basis = vec![
                        ProductPair::new(e(0), e(0))?,
                        ProductPair::new(e(0), e(1))?,
                        ProductPair::new(e(1), e(0))?,
                    ];
                    upper.push(built_in_certificate("w-basis", &w_state(), basis)?);
                }
                2 => {
                    let w2 = tensor_power(&w_state(), 2)?;
                    upper.push(built_in_certificate("w2-seven", &w2, seven_product_spanning_set())?);
                }
                _ => {}
            }
            BoundReport::assemble(format!("w-power-{n}"), lower, upper)
        }
        BoundSpec::GhzPower(n) => {
            let n = *n;
            if n == 0 {
                return Err(Error::input("power", "copy count must be at least 1"));
            }
            let t = tensor_power(&ghz_state(), n)?;
            let flattening = if t.len() <= EXPLICIT_FLATTENING_LIMIT {
                BigUint::from(flattening_lower_bound(&t))
            } else {
                power_flattening_lower_bound(&ghz_state(), n)
            };
            let lower = vec![Bound {
                value: flattening,
                provenance: Provenance::Flattening,
            }];
            let upper = vec![built_in_certificate(
                &format!("ghz-diagonal-{n}"),
                &t,
                diagonal_spanning_set(1 << n),
            )?];
            BoundReport::assemble(format!("ghz-power-{n}"), lower, upper)
        }
        BoundSpec::Tensor {
            label,
            tensor,
            certificates,
        } => {
            if tensor.is_zero() {
                return Err(Error::input("tensor", "the zero tensor has rank 0; nothing to bound"));
            }
            let lower = vec![Bound {
                value: BigUint::from(flattening_lower_bound(tensor)),
                provenance: Provenance::Flattening,
            }];
            let upper = certificates
                .iter()
                .map(|c| certificate_bound(tensor, c))
                .collect::<Result<Vec<_>>>()?;
            BoundReport::assemble(label.clone(), lower, upper)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn closed_forms() {
        assert_eq!(w_power_lower_bound(1), big(3));
        assert_eq!(w_power_lower_bound(2), big(7));
        assert_eq!(w_power_lower_bound(3), big(15));
        assert_eq!(w_power_upper_bound(1), big(3));
        assert_eq!(w_power_upper_bound(2), big(7));
        assert_eq!(w_power_upper_bound(3), big(21));
    }

    #[test]
    fn flattening_examples() {
        assert_eq!(flattening_lower_bound(&w_state()), 2);
        assert_eq!(flattening_lower_bound(&tensor_power(&w_state(), 2).unwrap()), 4);
        for n in 1..=4 {
            let g = tensor_power(&ghz_state(), n).unwrap();
            assert_eq!(flattening_lower_bound(&g), 1 << n);
            assert_eq!(power_flattening_lower_bound(&ghz_state(), n), big(1 << n));
        }
    }

    #[test]
    fn phi_endpoints() {
        // φ_0 = |0…0⟩ and φ_{2^n−1} = (|01⟩+|10⟩)^{⊗n}, i.e. the bit-flip permutation.
        let n = 3;
        let d = 1 << n;
        let p0 = lemma2_phi(n, 0);
        assert!(p0.get(0, 0).is_one());
        assert_eq!(p0.rows().flatten().filter(|v| !v.is_zero()).count(), 1);
        let top = lemma2_phi(n, d - 1);
        for b in 0..d {
            for c in 0..d {
                assert_eq!(top.get(b, c).is_one(), c == (d - 1) ^ b);
            }
        }
    }

    #[test]
    fn phi_are_the_a_slices_of_w_powers() {
        // Slice of W^{⊗n} at A-digit a holds φ_i with i = a XOR (2^n − 1).
        for n in 1..=3u32 {
            let w = tensor_power(&w_state(), n).unwrap();
            let d = 1usize << n;
            let slices = w.slice_states(Party::A.into());
            for (a, s) in slices.iter().enumerate() {
                let phi: Vec<Exact> = lemma2_phi(n, a ^ (d - 1)).rows().flatten().cloned().collect();
                assert_eq!(s, &phi);
            }
        }
    }

    #[test]
    fn witness_small_cases() {
        let r = lemma2_witness_check(1, 10, 7).unwrap();
        assert!(r.verdict);
        for alpha in -9..=9 {
            assert_eq!(exact_matrix_rank(&lemma2_perturbed(1, &[alpha])), 2);
        }
        let r = lemma2_witness_check(2, 200, 1).unwrap();
        assert!(r.verdict && r.failures.is_empty());
        assert_eq!(r.expected_rank, 4);
        assert!(lemma2_witness_check(4, 100, 42).unwrap().verdict);
    }

    #[test]
    fn witness_is_schedule_independent() {
        let a = lemma2_witness_check(3, 40, 5).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| lemma2_witness_check(3, 40, 5).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn reports() {
        let r = bound_report(&BoundSpec::WPower(2)).unwrap();
        assert_eq!(r.resolved_rank, Some(big(7)));
        assert!(r
            .upper
            .iter()
            .any(|b| b.provenance == Provenance::SpanCertificate("w2-seven".into()) && b.value == big(7)));
        let r = bound_report(&BoundSpec::WPower(3)).unwrap();
        assert_eq!(r.max_lower(), Some(&big(15)));
        assert_eq!(r.min_upper(), Some(&big(21)));
        assert_eq!(r.resolved_rank, None);
        assert_eq!(bound_report(&BoundSpec::WPower(1)).unwrap().resolved_rank, Some(big(3)));
        for n in 1..=4 {
            let r = bound_report(&BoundSpec::GhzPower(n)).unwrap();
            assert_eq!(r.resolved_rank, Some(big(1 << n)));
        }
        let json = serde_json::to_string(&bound_report(&BoundSpec::WPower(2)).unwrap()).unwrap();
        assert!(json.contains("\"lemma2-closed-form\""));
        assert!(json.contains("\"span-certificate:w2-seven\""));
        assert!(json.contains("\"resolved_rank\":\"7\""));
    }

    #[test]
    fn tampered_certificate_is_rejected() {
        let w2 = tensor_power(&w_state(), 2).unwrap();
        let traced = Bipartition::new(Party::A);
        let mut certificate =
            check_span_containment(&seven_product_spanning_set(), &support_basis(&w2, traced)).unwrap();
        certificate.coordinates[0][0] = int(5);
        let spec = BoundSpec::Tensor {
            label: "w2".into(),
            tensor: w2,
            certificates: vec![SuppliedCertificate {
                id: "tampered".into(),
                traced,
                certificate,
            }],
        };
        let err = bound_report(&spec).unwrap_err();
        assert!(err.to_string().contains("tampered"), "{err}");
    }

    #[test]
    fn sequences_are_ordered() {
        for n in 1..=10 {
            let (lo, hi) = (w_power_lower_bound(n), w_power_upper_bound(n));
            assert!(lo <= hi);
            assert_eq!(lo == hi, n <= 2);
            assert!(w_power_lower_bound(n + 1) > lo);
            assert!(w_power_upper_bound(n + 1) > hi);
        }
        for m in 1..10 {
            for n in 1..=(10 - m) {
                assert!(w_power_upper_bound(m + n) <= w_power_upper_bound(m) * w_power_upper_bound(n));
            }
        }
    }
}

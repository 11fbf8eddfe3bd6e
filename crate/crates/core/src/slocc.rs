//! Exact predicates for GHZ↔W conversion rates.
//!
//! The threshold `½·log₂7` never appears as a number: `m/(n+1) ≥ ½·log₂7` is
//! decided as `4^m ≥ 7^(n+1)` in big integers, and likewise for the converse
//! direction.

use num_bigint::BigUint;
use num_traits::One;
use serde::Serialize;

use crate::bounds::w_power_upper_bound;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateKind {
    /// `4^m ≥ 7^(n+1)` suffices for `GHZ^{⊗m} → W^{⊗n}`.
    TheoremBSufficient,
    /// `W^{⊗m} → GHZ^{⊗n}` requires `4^n ≤ 7^(m+1)`.
    TheoremCNecessary,
    /// `GHZ^{⊗m}` reaches any state of rank at most `2^m`.
    RankComparison,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = ">=")]
    Ge,
    #[serde(rename = "<=")]
    Le,
}

impl Relation {
    pub fn holds(self, lhs: &BigUint, rhs: &BigUint) -> bool {
        match self {
            Relation::Ge => lhs >= rhs,
            Relation::Le => lhs <= rhs,
        }
    }
}

fn as_string<S: serde::Serializer>(v: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.to_string())
}

/// One predicate evaluation with the integers it compared.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateVerdict {
    pub kind: RateKind,
    /// GHZ copies for conversions from GHZ, W copies for conversions from W.
    pub m: u32,
    /// Copies of the target state, when the target is a power of W or GHZ.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<u32>,
    /// Human-readable form of the compared quantities, e.g. `4^3` and `7^3`.
    pub lhs_expr: String,
    pub rhs_expr: String,
    #[serde(serialize_with = "as_string")]
    pub lhs: BigUint,
    pub relation: Relation,
    #[serde(serialize_with = "as_string")]
    pub rhs: BigUint,
    pub verdict: bool,
    pub label: &'static str,
}

impl RateVerdict {
    fn new(
        kind: RateKind,
        m: u32,
        n: Option<u32>,
        (lhs_expr, lhs): (String, BigUint),
        relation: Relation,
        (rhs_expr, rhs): (String, BigUint),
    ) -> Self {
        let verdict = relation.holds(&lhs, &rhs);
        let label = match (kind, verdict) {
            (RateKind::TheoremBSufficient, true) => "feasible",
            (RateKind::TheoremBSufficient, false) => "inconclusive",
            (RateKind::TheoremCNecessary, true) => "not-excluded",
            (RateKind::TheoremCNecessary, false) => "excluded",
            (RateKind::RankComparison, true) => "feasible",
            (RateKind::RankComparison, false) => "inconclusive",
        };
        RateVerdict {
            kind,
            m,
            n,
            lhs_expr,
            rhs_expr,
            lhs,
            relation,
            rhs,
            verdict,
            label,
        }
    }

    /// Recomputes the verdict from the stored comparison alone.
    pub fn recheck(&self) -> bool {
        self.relation.holds(&self.lhs, &self.rhs)
    }
}

fn power(base: u32, exp: u32) -> (String, BigUint) {
    (format!("{base}^{exp}"), BigUint::from(base).pow(exp))
}

/// `GHZ^{⊗m} → W^{⊗n}` is feasible when `4^m ≥ 7^(n+1)`.
pub fn theorem_b_sufficient(m: u32, n: u32) -> RateVerdict {
    RateVerdict::new(
        RateKind::TheoremBSufficient,
        m,
        Some(n),
        power(4, m),
        Relation::Ge,
        power(7, n + 1),
    )
}

/// `W^{⊗m} → GHZ^{⊗n}` is only possible when `4^n ≤ 7^(m+1)`. A true verdict
/// means "not excluded", never "feasible".
pub fn theorem_c_necessary(m: u32, n: u32) -> RateVerdict {
    RateVerdict::new(
        RateKind::TheoremCNecessary,
        m,
        Some(n),
        power(4, n),
        Relation::Le,
        power(7, m + 1),
    )
}

/// `GHZ^{⊗m}` converts to a target whose rank is at most `target_rank_upper_bound`
/// whenever `2^m` is at least that bound.
pub fn ghz_feasible_by_rank(m: u32, target_rank_upper_bound: &BigUint) -> RateVerdict {
    RateVerdict::new(
        RateKind::RankComparison,
        m,
        None,
        power(2, m),
        Relation::Ge,
        (target_rank_upper_bound.to_string(), target_rank_upper_bound.clone()),
    )
}

fn rank_comparison_for_w_power(m: u32, n: u32) -> RateVerdict {
    let bound = w_power_upper_bound(n);
    let mut v = ghz_feasible_by_rank(m, &bound);
    v.n = Some(n);
    v.rhs_expr = format!("rk-ub(W^{n})");
    v
}

/// All three predicates for `1 ≤ m ≤ max_m`, `1 ≤ n ≤ max_n`, row-major in `(m, n)`.
pub fn rate_table(max_m: u32, max_n: u32) -> Vec<RateVerdict> {
    let mut out = Vec::with_capacity(3 * max_m as usize * max_n as usize);
    for m in 1..=max_m {
        for n in 1..=max_n {
            out.push(theorem_b_sufficient(m, n));
            out.push(theorem_c_necessary(m, n));
            out.push(rank_comparison_for_w_power(m, n));
        }
    }
    out
}

/// Smallest `m` reaching `W^{⊗n}` from `GHZ^{⊗m}`: by rank comparison against
/// the closed-form upper bound, and by the sufficient rate condition.
pub fn minimal_m_for_w_power(n: u32) -> (u32, u32) {
    let bound = w_power_upper_bound(n);
    let mut rank_based = 0u32;
    let mut reach = BigUint::one();
    while reach < bound {
        reach <<= 1u32;
        rank_based += 1;
    }
    let target = BigUint::from(7u32).pow(n + 1);
    let mut theorem_b = 1u32;
    let mut four = BigUint::from(4u32);
    while four < target {
        four <<= 2u32;
        theorem_b += 1;
    }
    (rank_based, theorem_b)
}

/// Aligned text rendering of a rate table.
pub fn render_table(rows: &[RateVerdict]) -> String {
    let mut lines = vec![format!(
        "{:<22} {:>3} {:>3}  {:<16} {:<3} {:<24} {:<7} {}",
        "predicate", "m", "n", "lhs", "", "rhs", "verdict", "label"
    )];
    for r in rows {
        let kind = match r.kind {
            RateKind::TheoremBSufficient => "theorem-b-sufficient",
            RateKind::TheoremCNecessary => "theorem-c-necessary",
            RateKind::RankComparison => "rank-comparison",
        };
        let rel = match r.relation {
            Relation::Ge => ">=",
            Relation::Le => "<=",
        };
        let n = r.n.map_or("-".to_string(), |n| n.to_string());
        lines.push(format!(
            "{:<22} {:>3} {:>3}  {:<16} {:<3} {:<24} {:<7} {}",
            kind,
            r.m,
            n,
            format!("{}={}", r.lhs_expr, r.lhs),
            rel,
            if r.rhs_expr == r.rhs.to_string() {
                r.rhs_expr.clone()
            } else {
                format!("{}={}", r.rhs_expr, r.rhs)
            },
            r.verdict,
            r.label
        ));
    }
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    #[test]
    fn theorem_b_examples() {
        let v = theorem_b_sufficient(3, 2);
        assert!(!v.verdict);
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (big(64), big(343)));
        assert!(theorem_b_sufficient(5, 2).verdict);
        let v = theorem_b_sufficient(8, 4);
        assert!(v.verdict);
        assert_eq!((v.lhs, v.rhs), (big(65536), big(16807)));
    }

    #[test]
    fn theorem_c_examples() {
        let v = theorem_c_necessary(2, 2);
        assert!(v.verdict);
        assert_eq!((v.lhs.clone(), v.rhs.clone()), (big(16), big(343)));
        for m in 1..20 {
            assert!(theorem_c_necessary(m, 1).verdict);
        }
        // 4^3 = 64 > 7^2 = 49: one W copy cannot yield three GHZ copies.
        let v = theorem_c_necessary(1, 3);
        assert!(!v.verdict);
        assert_eq!(v.label, "excluded");
    }

    #[test]
    fn rank_comparison_examples() {
        assert!(ghz_feasible_by_rank(3, &big(7)).verdict);
        assert!(!ghz_feasible_by_rank(2, &big(7)).verdict);
        for m in 1..10 {
            assert!(ghz_feasible_by_rank(m, &big(1)).verdict);
        }
    }

    #[test]
    fn table_contents() {
        let t = rate_table(3, 2);
        assert_eq!(t.len(), 18);
        let row = |kind, m, n| t.iter().find(|r| r.kind == kind && r.m == m && r.n == Some(n)).unwrap();
        assert!(!row(RateKind::TheoremBSufficient, 3, 2).verdict);
        assert!(row(RateKind::RankComparison, 3, 2).verdict);
        let t = rate_table(1, 1);
        assert!(!t[0].verdict);
        assert_eq!((t[0].lhs.clone(), t[0].rhs.clone()), (big(4), big(49)));
        assert!(!t[2].verdict);
        assert_eq!((t[2].lhs.clone(), t[2].rhs.clone()), (big(2), big(3)));
        assert!(rate_table(5, 2).iter().any(|r| r.kind == RateKind::TheoremBSufficient
            && r.m == 5
            && r.n == Some(2)
            && r.verdict));
        assert!(render_table(&rate_table(2, 2)).lines().count() == 13);
    }

    #[test]
    fn minimal_copies() {
        assert_eq!(minimal_m_for_w_power(2), (3, 5));
        assert_eq!(minimal_m_for_w_power(1).0, 2);
    }

    #[test]
    fn monotone_and_consistent() {
        for n in 1..=12 {
            let flips = (1..=40)
                .map(|m| theorem_b_sufficient(m, n).verdict)
                .collect::<Vec<_>>()
                .windows(2)
                .filter(|w| w[0] != w[1])
                .count();
            assert_eq!(flips, 1);
            for m in 1..=40 {
                if theorem_b_sufficient(m, n).verdict {
                    assert!(ghz_feasible_by_rank(m, &w_power_upper_bound(n)).verdict);
                }
            }
        }
        for m in 1..=12 {
            let v: Vec<bool> = (1..=40).map(|n| theorem_c_necessary(m, n).verdict).collect();
            assert!(v[0]);
            assert_eq!(v.windows(2).filter(|w| w[0] != w[1]).count(), 1);
        }
    }

    #[test]
    fn agrees_with_float_log_comparison() {
        let half_log = 0.5 * 7f64.log2();
        for m in 1..=30u32 {
            for n in 1..=30u32 {
                let b = m as f64 / (n + 1) as f64;
                if (b - half_log).abs() > 1e-9 {
                    assert_eq!(theorem_b_sufficient(m, n).verdict, b >= half_log);
                }
                let c = n as f64 / (m + 1) as f64;
                if (c - half_log).abs() > 1e-9 {
                    assert_eq!(theorem_c_necessary(m, n).verdict, c <= half_log);
                }
                assert_eq!(theorem_b_sufficient(m, n).recheck(), theorem_b_sufficient(m, n).verdict);
            }
        }
    }
}

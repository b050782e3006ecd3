//! Closed-form scattering amplitudes and the combinatorial factors behind
//! them.
//!
//! Counting factors are exact `u128` integers and only converted to floats in
//! the final expressions.

use serde::{Deserialize, Serialize};

use crate::amplitude::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIParams {
    pub n1: u32,
    pub n2: u32,
    pub n3: u32,
    pub sa: Complex,
    pub sb: Complex,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIIParams {
    pub n: u32,
    pub epsilon: f64,
    pub sa: Complex,
    pub sb: Complex,
}

/// Exact binomial coefficient; zero when `k > n`. Panics on `u128` overflow.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) is divisible by (i + 1) at every step
        acc = acc.checked_mul(u128::from(n - i)).expect("binomial overflow") / u128::from(i + 1);
    }
    acc
}

/// `C(n, k)` with the convention `C(n, -1) = 0`.
fn binomial_signed(n: i64, k: i64) -> u128 {
    if n < 0 || k < 0 {
        0
    } else {
        binomial(n as u64, k as u64)
    }
}

/// `sqrt(n1 n2 (n3 + 1)) |S_A + S_B|`
pub fn a_type1_boson(p: &TypeIParams) -> f64 {
    (f64::from(p.n1) * f64::from(p.n2) * f64::from(p.n3 + 1)).sqrt() * (p.sa + p.sb).norm()
}

/// Regime of the piecewise fermionic type-I amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FermionCase {
    /// `n3 >= n1` and `n3 >= n2`
    FullSuppression,
    /// `n1 > n3 >= n2`
    PhiOnly,
    /// `n2 > n3 >= n1`
    PsiOnly,
    /// `n1 > n2 > n3`
    PhiLeads,
    /// `n2 > n1 > n3`
    PsiLeads,
    /// `n1 = n2 > n3`: not covered by any printed inequality. Evaluated with
    /// the expression shared by `PhiLeads` and `PsiLeads`, which coincide here.
    Balanced,
}

impl FermionCase {
    pub fn classify(n1: u32, n2: u32, n3: u32) -> Self {
        if n3 >= n1 && n3 >= n2 {
            FermionCase::FullSuppression
        } else if n1 > n3 && n3 >= n2 {
            FermionCase::PhiOnly
        } else if n2 > n3 && n3 >= n1 {
            FermionCase::PsiOnly
        } else if n1 > n2 && n2 > n3 {
            FermionCase::PhiLeads
        } else if n2 > n1 && n1 > n3 {
            FermionCase::PsiLeads
        } else {
            FermionCase::Balanced
        }
    }

    /// 1-based position in the printed five-case list; `None` for `Balanced`.
    pub fn number(self) -> Option<u8> {
        match self {
            FermionCase::FullSuppression => Some(1),
            FermionCase::PhiOnly => Some(2),
            FermionCase::PsiOnly => Some(3),
            FermionCase::PhiLeads => Some(4),
            FermionCase::PsiLeads => Some(5),
            FermionCase::Balanced => None,
        }
    }

    /// Cases whose printed cross term is under suspicion.
    pub fn has_cross_term(self) -> bool {
        matches!(
            self,
            FermionCase::PhiLeads | FermionCase::PsiLeads | FermionCase::Balanced
        )
    }
}

/// Piecewise fermionic type-I amplitude, evaluated exactly as printed,
/// including the `2(n2 - n3)` / `2(n1 - n3)` cross-term prefactors.
pub fn a_type1_fermion(p: &TypeIParams) -> f64 {
    let (n1, n2, n3) = (f64::from(p.n1), f64::from(p.n2), f64::from(p.n3));
    let cross = (p.sa * p.sb.conj() + p.sa.conj() * p.sb).re;
    let printed = |prefactor: f64| {
        ((n1 - n3) * n2 * p.sa.norm_sqr() + (n2 - n3) * n1 * p.sb.norm_sqr() + prefactor * cross)
            .max(0.0)
            .sqrt()
    };
    match FermionCase::classify(p.n1, p.n2, p.n3) {
        FermionCase::FullSuppression => 0.0,
        FermionCase::PhiOnly => ((n1 - n3) * n2).sqrt() * p.sa.norm(),
        FermionCase::PsiOnly => ((n2 - n3) * n1).sqrt() * p.sb.norm(),
        FermionCase::PhiLeads | FermionCase::Balanced => printed(2.0 * (n2 - n3)),
        FermionCase::PsiLeads => printed(2.0 * (n1 - n3)),
    }
}

/// Fermionic type-I amplitude obtained by counting unblocked paths under the
/// shared q-label convention (phi holds `q = 1..n1`, psi `1..n2`, v `1..n3`).
///
/// Process A is open for `(n1 - n3)+ * n2` label pairs, process B for
/// `(n2 - n3)+ * n1`. The `(min(n1, n2) - n3)+` pairs with equal labels on
/// both particles reach the same final state through both processes with
/// opposite fermionic signs, each contributing `|S_A - S_B|^2` instead of
/// `|S_A|^2 + |S_B|^2`.
pub fn a_type1_fermion_counted(p: &TypeIParams) -> f64 {
    let excess = |a: u32| f64::from(a.saturating_sub(p.n3));
    let a_open = excess(p.n1) * f64::from(p.n2);
    let b_open = excess(p.n2) * f64::from(p.n1);
    let shared = excess(p.n1.min(p.n2));
    let cross = (p.sa * p.sb.conj() + p.sa.conj() * p.sb).re;
    (a_open * p.sa.norm_sqr() + b_open * p.sb.norm_sqr() - shared * cross)
        .max(0.0)
        .sqrt()
}

/// Final-state enhancement factor `epsilon (n - 2) + 1`.
pub fn enhancement_factor(n: u32, epsilon: f64) -> f64 {
    epsilon * (f64::from(n) - 2.0) + 1.0
}

/// `sqrt(((1-e)/2) n * ((1-e)/2)(n-1) * (e(n-2)+1)) |S_A + S_B|`
pub fn a_type2(p: &TypeIIParams) -> f64 {
    let half = (1.0 - p.epsilon) / 2.0;
    let n = f64::from(p.n);
    (half * n * half * (n - 1.0) * enhancement_factor(p.n, p.epsilon)).sqrt() * (p.sa + p.sb).norm()
}

/// Counting factors for the Fock-state input `(n1, n2, n3)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeICombinatorics {
    pub n: u32,
    /// Distinct terms of the symmetrized input, `C(n, n1) C(n - n1, n2)`.
    pub terms: u128,
    /// Terms produced by one process, `N C(n1,1) C(n2,1)`.
    pub scattered_terms: u128,
    /// Physically distinct final terms, `C(n,1) C(n-1, n1-1) C(n-n1, n2-1)`.
    pub distinct_final_terms: u128,
    /// Amplitude per final term per process, `(N2 / N3) / sqrt(N)`.
    pub c_ib: f64,
}

pub fn type1_combinatorics(n1: u32, n2: u32, n3: u32) -> TypeICombinatorics {
    let n = n1 + n2 + n3;
    let (n, n1, n2) = (i64::from(n), i64::from(n1), i64::from(n2));
    let terms = binomial_signed(n, n1) * binomial_signed(n - n1, n2);
    let scattered_terms = terms * binomial_signed(n1, 1) * binomial_signed(n2, 1);
    let distinct_final_terms = binomial_signed(n, 1) * binomial_signed(n - 1, n1 - 1) * binomial_signed(n - n1, n2 - 1);
    let c_ib = if distinct_final_terms == 0 {
        0.0
    } else {
        (scattered_terms as f64 / distinct_final_terms as f64) / (terms as f64).sqrt()
    };
    TypeICombinatorics {
        n: n as u32,
        terms,
        scattered_terms,
        distinct_final_terms,
        c_ib,
    }
}

/// Counting factors of one `(m, k)` group of the type-II expansion.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TypeIIGroup {
    pub n: u32,
    pub m: u32,
    pub k: u32,
    /// `C(n, m) C(n - m, k)`
    pub n_mk: u128,
    /// `((1-e)/2)^(n/2) eta^((n-m-k)/2)` with `eta = 2e / (1-e)`
    pub c0_mk: f64,
    /// `m k N_mk`
    pub n2_prime: u128,
    /// `C(n,1) C(n-1, m-1) C(n-m, k-1)`
    pub n3_prime: u128,
    /// Per-term amplitude as printed: `c0_mk * 2 (n - m - k + 1)`.
    pub c_prime_printed: f64,
    /// Per-term amplitude from the counting ratio: `c0_mk * N2' / N3'`;
    /// `None` when the group cannot scatter (`m = 0` or `k = 0`).
    pub c_prime_ratio: Option<f64>,
}

pub fn eta(epsilon: f64) -> f64 {
    2.0 * epsilon / (1.0 - epsilon)
}

pub fn type2_group(n: u32, m: u32, k: u32, epsilon: f64) -> TypeIIGroup {
    assert!(m + k <= n, "group ({m},{k}) exceeds n = {n}");
    let (ni, mi, ki) = (i64::from(n), i64::from(m), i64::from(k));
    let n_mk = binomial_signed(ni, mi) * binomial_signed(ni - mi, ki);
    let v_count = n - m - k;
    let c0_mk = ((1.0 - epsilon) / 2.0).powf(f64::from(n) / 2.0) * eta(epsilon).powf(f64::from(v_count) / 2.0);
    let n2_prime = u128::from(m) * u128::from(k) * n_mk;
    let n3_prime = binomial_signed(ni, 1) * binomial_signed(ni - 1, mi - 1) * binomial_signed(ni - mi, ki - 1);
    let c_prime_ratio = (n3_prime > 0).then(|| c0_mk * n2_prime as f64 / n3_prime as f64);
    TypeIIGroup {
        n,
        m,
        k,
        n_mk,
        c0_mk,
        n2_prime,
        n3_prime,
        c_prime_printed: c0_mk * 2.0 * f64::from(v_count + 1),
        c_prime_ratio,
    }
}

/// All `(m, k)` groups with `m + k <= n`, in lexicographic order.
pub fn type2_groups(n: u32, epsilon: f64) -> Vec<TypeIIGroup> {
    (0..=n)
        .flat_map(|m| (0..=n - m).map(move |k| type2_group(n, m, k, epsilon)))
        .collect()
}

/// Scattered norm rebuilt from per-group amplitudes,
/// `sqrt(sum_{m>=1,k>=1} N3' (c' |S_A + S_B|)^2)`, using either the printed
/// `c'` or the counting ratio.
pub fn a_type2_from_groups(p: &TypeIIParams, printed: bool) -> f64 {
    let total: f64 = type2_groups(p.n, p.epsilon)
        .iter()
        .filter(|g| g.m >= 1 && g.k >= 1)
        .map(|g| {
            let c = if printed {
                g.c_prime_printed
            } else {
                g.c_prime_ratio.unwrap_or(0.0)
            };
            g.n3_prime as f64 * c * c
        })
        .sum();
    total.sqrt() * (p.sa + p.sb).norm()
}

//! Occupation-number (second-quantized) oracle.
//!
//! States are sparse maps from occupation vectors to amplitudes; the
//! scattering vertex is built from ladder operators with bosonic `sqrt(n)`
//! factors and fermionic sign strings. Slot keys are ordered by mode rank
//! (`phi < psi < v < u`) and then `q`; a fermionic occupation vector
//! `{k1 < k2 < ...}` stands for `c†_{k1} c†_{k2} ... |0>`.

use std::collections::BTreeMap;
use std::fmt;

use crate::amplitude::{AmplitudeForm, Complex};
use crate::fock::{ManyBodyState, Mode, Statistics};

pub use crate::fock::SingleParticleState as SlotKey;

/// Occupation numbers per slot key; zero entries are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Occupation(BTreeMap<SlotKey, u32>);

impl Occupation {
    pub fn get(&self, key: &SlotKey) -> u32 {
        self.0.get(key).copied().unwrap_or(0)
    }

    pub fn total(&self) -> u32 {
        self.0.values().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&SlotKey, &u32)> {
        self.0.iter()
    }

    /// Occupied keys strictly below `key` (the Jordan-Wigner string length).
    fn occupied_below(&self, key: &SlotKey) -> u32 {
        self.0.range(..key).map(|(_, n)| *n).sum()
    }

    fn with_delta(&self, key: SlotKey, delta: i32) -> Occupation {
        let mut out = self.clone();
        let n = out.get(&key) as i32 + delta;
        debug_assert!(n >= 0);
        if n == 0 {
            out.0.remove(&key);
        } else {
            out.0.insert(key, n as u32);
        }
        out
    }

    /// Multinomial weight `n! / prod_k n_k!`.
    /// `a_key` on this vector: the resulting vector and its factor.
    fn lowered(&self, key: SlotKey, statistics: Statistics) -> Option<(Occupation, f64)> {
        let n = self.get(&key);
        if n == 0 {
            return None;
        }
        let factor = match statistics {
            Statistics::Boson => f64::from(n).sqrt(),
            Statistics::Fermion => jordan_wigner_sign(self, &key),
        };
        Some((self.with_delta(key, -1), factor))
    }

    /// `a†_key` on this vector; fermions vanish on an occupied key.
    fn raised(&self, key: SlotKey, statistics: Statistics) -> Option<(Occupation, f64)> {
        let n = self.get(&key);
        let factor = match statistics {
            Statistics::Boson => f64::from(n + 1).sqrt(),
            Statistics::Fermion if n > 0 => return None,
            Statistics::Fermion => jordan_wigner_sign(self, &key),
        };
        Some((self.with_delta(key, 1), factor))
    }

    fn multinomial(&self) -> f64 {
        let mut weight = 1.0;
        let mut running = 0u32;
        for &count in self.0.values() {
            for i in 1..=count {
                running += 1;
                weight *= f64::from(running) / f64::from(i);
            }
        }
        weight
    }
}

impl FromIterator<(SlotKey, u32)> for Occupation {
    fn from_iter<I: IntoIterator<Item = (SlotKey, u32)>>(iter: I) -> Self {
        let mut map = BTreeMap::new();
        for (k, n) in iter {
            if n > 0 {
                *map.entry(k).or_insert(0) += n;
            }
        }
        Occupation(map)
    }
}

/// Renders `{phi:2, psi:1, v:1, u:0}` for unlabelled keys and
/// `{phi(1), psi(1), v(1)}` (occupied keys only) for labelled ones.
impl fmt::Display for Occupation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let labelled = self.0.keys().any(|k| k.q.is_some());
        let parts: Vec<String> = if labelled {
            self.0
                .iter()
                .flat_map(|(k, n)| std::iter::repeat_n(k.to_string(), *n as usize))
                .collect()
        } else {
            Mode::ALL
                .iter()
                .map(|&m| format!("{m}:{}", self.get(&SlotKey::boson(m))))
                .collect()
        };
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationState {
    statistics: Statistics,
    terms: BTreeMap<Occupation, AmplitudeForm>,
}

impl OccupationState {
    pub fn zero(statistics: Statistics) -> Self {
        Self {
            statistics,
            terms: BTreeMap::new(),
        }
    }

    /// Sums coefficients of repeated occupations and drops exact zeros.
    /// Fermionic occupations above one are discarded.
    pub fn from_terms<I>(statistics: Statistics, terms: I) -> Self
    where
        I: IntoIterator<Item = (Occupation, AmplitudeForm)>,
    {
        let mut map: BTreeMap<Occupation, AmplitudeForm> = BTreeMap::new();
        for (occ, c) in terms {
            if statistics == Statistics::Fermion && occ.0.values().any(|&n| n > 1) {
                continue;
            }
            *map.entry(occ).or_default() += c;
        }
        map.retain(|_, c| !c.is_zero());
        Self { statistics, terms: map }
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Occupation, &AmplitudeForm)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, occ: &Occupation) -> AmplitudeForm {
        self.terms.get(occ).copied().unwrap_or_default()
    }

    pub fn norm(&self, sa: Complex, sb: Complex) -> f64 {
        self.terms
            .values()
            .map(|c| c.eval(sa, sb).norm_sqr())
            .fold(0.0, |acc, x| acc + x)
            .sqrt()
    }

    /// `<self|other>`; occupation vectors are orthonormal.
    pub fn inner(&self, other: &OccupationState, sa: Complex, sb: Complex) -> Complex {
        self.terms
            .iter()
            .filter_map(|(o, c)| other.terms.get(o).map(|d| c.eval(sa, sb).conj() * d.eval(sa, sb)))
            .sum()
    }

    pub fn scale(&self, factor: impl Into<Complex>) -> Self {
        let f = factor.into();
        Self::from_terms(self.statistics, self.terms.iter().map(|(o, c)| (o.clone(), c.scale(f))))
    }

    pub fn add(&self, other: &OccupationState) -> Self {
        Self::from_terms(
            self.statistics,
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|(o, c)| (o.clone(), *c)),
        )
    }

    /// Applies `a_key` (bosons: `sqrt(n)` factor; fermions: sign string).
    pub fn annihilate(&self, key: SlotKey) -> Self {
        self.map_terms(|occ| occ.lowered(key, self.statistics))
    }

    /// Applies `a†_key` (bosons: `sqrt(n+1)`; fermions: zero on an occupied
    /// key, otherwise the sign string).
    pub fn create(&self, key: SlotKey) -> Self {
        self.map_terms(|occ| occ.raised(key, self.statistics))
    }

    fn map_terms(&self, mut op: impl FnMut(&Occupation) -> Option<(Occupation, f64)>) -> Self {
        Self::from_terms(
            self.statistics,
            self.terms
                .iter()
                .filter_map(|(occ, c)| op(occ).map(|(o, f)| (o, *c * f)))
                .collect::<Vec<_>>(),
        )
    }
}

fn jordan_wigner_sign(occ: &Occupation, key: &SlotKey) -> f64 {
    if occ.occupied_below(key).is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Occupation-basis image of a first-quantized state.
///
/// Bosons: each occupation vector receives `sum_t c_t / sqrt(M)` over its
/// product terms, with `M` the multinomial count of distinct arrangements,
/// i.e. the overlap with the normalized Fock state. For a symmetric state this
/// is `c * sqrt(M)`. Fermions: each sign-canonical Slater key maps to the
/// occupation vector of its slots with the same coefficient.
pub fn from_first_quantized(state: &ManyBodyState) -> OccupationState {
    let statistics = state.statistics();
    let terms: Vec<(Occupation, AmplitudeForm)> = state
        .terms()
        .map(|(term, c)| {
            let occ: Occupation = term.slots().iter().map(|&s| (s, 1)).collect();
            let coeff = match statistics {
                Statistics::Boson => *c * (1.0 / occ.multinomial().sqrt()),
                Statistics::Fermion => *c,
            };
            (occ, coeff)
        })
        .collect();
    OccupationState::from_terms(statistics, terms)
}

/// Applies the pair-scattering vertex at concrete `(S_A, S_B)`; the result
/// carries constant coefficients.
///
/// Bosons: `(S_A + S_B) a†_v a†_u a_psi a_phi`. Fermions:
/// `sum_{q,q'} [S_A c†_{v,q} c†_{u,q'} + S_B c†_{u,q} c†_{v,q'}] c_{psi,q'} c_{phi,q}`.
pub fn apply_fwm_operator(state: &OccupationState, sa: Complex, sb: Complex) -> OccupationState {
    let concrete = OccupationState::from_terms(
        state.statistics,
        state
            .terms
            .iter()
            .map(|(o, c)| (o.clone(), AmplitudeForm::constant(c.eval(sa, sb)))),
    );
    match state.statistics {
        Statistics::Boson => {
            let key = SlotKey::boson;
            concrete
                .annihilate(key(Mode::Phi))
                .annihilate(key(Mode::Psi))
                .create(key(Mode::U))
                .create(key(Mode::V))
                .scale(sa + sb)
        }
        Statistics::Fermion => {
            let fermion = Statistics::Fermion;
            let mut acc: BTreeMap<Occupation, AmplitudeForm> = BTreeMap::new();
            for (occ, c) in &concrete.terms {
                let keys: Vec<SlotKey> = occ.0.keys().copied().collect();
                for phi in keys.iter().filter(|k| k.mode == Mode::Phi) {
                    let Some((after_phi, f1)) = occ.lowered(*phi, fermion) else {
                        continue;
                    };
                    for psi in keys.iter().filter(|k| k.mode == Mode::Psi) {
                        let Some((removed, f2)) = after_phi.lowered(*psi, fermion) else {
                            continue;
                        };
                        let (q, q_prime) = (phi.q, psi.q);
                        let channels = [
                            (
                                SlotKey {
                                    mode: Mode::U,
                                    q: q_prime,
                                },
                                SlotKey { mode: Mode::V, q },
                                sa,
                            ),
                            (
                                SlotKey {
                                    mode: Mode::V,
                                    q: q_prime,
                                },
                                SlotKey { mode: Mode::U, q },
                                sb,
                            ),
                        ];
                        for (first, second, s) in channels {
                            let Some((o1, f3)) = removed.raised(first, fermion) else {
                                continue;
                            };
                            let Some((o2, f4)) = o1.raised(second, fermion) else {
                                continue;
                            };
                            *acc.entry(o2).or_default() += *c * (s * (f1 * f2 * f3 * f4));
                        }
                    }
                }
            }
            OccupationState::from_terms(fermion, acc)
        }
    }
}

pub fn oracle_scattered_norm(state: &OccupationState, sa: Complex, sb: Complex) -> f64 {
    apply_fwm_operator(state, sa, sb).norm(Complex::ZERO, Complex::ZERO)
}

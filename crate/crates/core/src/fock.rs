//! First-quantized many-particle states.
//!
//! Bosonic states are stored fully expanded: every ordered slot list is its own
//! basis element. Fermionic states are stored in the Slater-determinant basis:
//! each key is the sorted slot list (ordered by mode rank, then q) and stands
//! for the normalized antisymmetrization of that list; the sign needed to sort
//! a slot list is folded into its coefficient. [`ManyBodyState::expand`]
//! recovers the explicit `n!`-term first-quantized expansion.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amplitude::{AmplitudeForm, Complex};
use crate::error::StateError;
use crate::permutation::{distinct_permutations, signed_permutations, sorting_sign};

/// The four single-particle modes. Input modes are `Phi` and `Psi`, output
/// modes `V` and `U`. The derived order (`Phi < Psi < V < U`) is the global
/// mode rank used for every fermionic sign convention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Phi,
    Psi,
    V,
    U,
}

impl Mode {
    pub const ALL: [Mode; 4] = [Mode::Phi, Mode::Psi, Mode::V, Mode::U];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Phi => "phi",
            Mode::Psi => "psi",
            Mode::V => "v",
            Mode::U => "u",
        }
    }

    pub fn rank(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = StateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "phi" => Ok(Mode::Phi),
            "psi" => Ok(Mode::Psi),
            "v" => Ok(Mode::V),
            "u" => Ok(Mode::U),
            _ => Err(StateError::ParseTerm(s.to_string())),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistics {
    Boson,
    Fermion,
}

impl fmt::Display for Statistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistics::Boson => "boson",
            Statistics::Fermion => "fermion",
        })
    }
}

impl FromStr for Statistics {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" => Ok(Statistics::Boson),
            "fermion" | "fermions" => Ok(Statistics::Fermion),
            _ => Err(format!("unknown statistics {s:?} (expected boson or fermion)")),
        }
    }
}

/// A mode plus the optional auxiliary quantum number `q`.
///
/// Ordering is by mode rank first, then `q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SingleParticleState {
    pub mode: Mode,
    pub q: Option<u32>,
}

impl SingleParticleState {
    pub fn boson(mode: Mode) -> Self {
        Self { mode, q: None }
    }

    pub fn fermion(mode: Mode, q: u32) -> Self {
        Self { mode, q: Some(q) }
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        Self { mode, ..self }
    }
}

impl fmt::Display for SingleParticleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.q {
            Some(q) => write!(f, "{}({q})", self.mode),
            None => write!(f, "{}", self.mode),
        }
    }
}

impl FromStr for SingleParticleState {
    type Err = StateError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || StateError::ParseTerm(s.to_string());
        match s.split_once('(') {
            None => Ok(Self::boson(s.parse().map_err(|_| err())?)),
            Some((mode, rest)) => {
                let q: u32 = rest
                    .strip_suffix(')')
                    .ok_or_else(err)?
                    .trim()
                    .parse()
                    .map_err(|_| err())?;
                if q == 0 {
                    return Err(err());
                }
                Ok(Self::fermion(mode.trim().parse().map_err(|_| err())?, q))
            }
        }
    }
}

/// Ordered list of single-particle states, one per particle slot.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProductTerm {
    slots: Vec<SingleParticleState>,
}

impl ProductTerm {
    /// Builds a term, checking that it is non-empty and that `q` is either on
    /// every slot or on none.
    pub fn new(slots: Vec<SingleParticleState>) -> Result<Self, StateError> {
        if slots.is_empty() {
            return Err(StateError::EmptyTerm);
        }
        let labelled = slots[0].q.is_some();
        if let Some(bad) = slots.iter().position(|s| s.q.is_some() != labelled) {
            return Err(StateError::LabelConvention(bad));
        }
        Ok(Self { slots })
    }

    pub fn bosons(modes: &[Mode]) -> Result<Self, StateError> {
        Self::new(modes.iter().map(|&m| SingleParticleState::boson(m)).collect())
    }

    pub fn fermions(states: &[(Mode, u32)]) -> Result<Self, StateError> {
        Self::new(
            states
                .iter()
                .map(|&(m, q)| SingleParticleState::fermion(m, q))
                .collect(),
        )
    }

    pub fn slots(&self) -> &[SingleParticleState] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn statistics(&self) -> Statistics {
        if self.slots[0].q.is_some() {
            Statistics::Fermion
        } else {
            Statistics::Boson
        }
    }

    /// Per-mode occupation counts, ignoring q.
    pub fn counts(&self) -> SectorSpec {
        let mut sector = SectorSpec::default();
        for s in &self.slots {
            *sector.count_mut(s.mode) += 1;
        }
        sector
    }

    /// Whether all single-particle states are distinct.
    pub fn is_pauli_allowed(&self) -> bool {
        sorting_sign(&self.slots).is_some()
    }

    /// Sorted copy of the term with the parity of the sorting permutation, or
    /// `None` when a single-particle state repeats.
    pub fn canonicalize(&self) -> Option<(ProductTerm, i8)> {
        let sign = sorting_sign(&self.slots)?;
        let mut slots = self.slots.clone();
        slots.sort();
        Some((ProductTerm { slots }, sign))
    }

    /// Term whose slot `k` holds this term's slot `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> ProductTerm {
        ProductTerm {
            slots: perm.iter().map(|&p| self.slots[p]).collect(),
        }
    }

    pub(crate) fn with_slots_replaced(&self, replacements: &[(usize, SingleParticleState)]) -> ProductTerm {
        let mut slots = self.slots.clone();
        for &(i, s) in replacements {
            slots[i] = s;
        }
        ProductTerm { slots }
    }

    /// Drops every q label.
    pub fn unlabelled(&self) -> ProductTerm {
        ProductTerm {
            slots: self.slots.iter().map(|s| SingleParticleState::boson(s.mode)).collect(),
        }
    }

    /// Assigns `q` to every slot that lacks a label.
    pub fn labelled_with(&self, q: u32) -> ProductTerm {
        ProductTerm {
            slots: self
                .slots
                .iter()
                .map(|s| SingleParticleState {
                    q: s.q.or(Some(q)),
                    ..*s
                })
                .collect(),
        }
    }
}

impl fmt::Display for ProductTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.slots.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{s}")?;
        }
        Ok(())
    }
}

impl FromStr for ProductTerm {
    type Err = StateError;
    /// Parses `"phi(1) psi(2) v(1)"` or `"v v u"`; `|`, `>` and commas are
    /// accepted as separators.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let cleaned: String = s
            .chars()
            .map(|c| if matches!(c, '|' | '>' | ',' | '⟩') { ' ' } else { c })
            .collect();
        let mut slots = Vec::new();
        let mut tokens = cleaned.split_whitespace().peekable();
        while let Some(tok) = tokens.next() {
            let mut tok = tok.to_string();
            // allow "phi (1)"
            if !tok.contains('(') && tokens.peek().is_some_and(|t| t.starts_with('(')) {
                tok.push_str(tokens.next().unwrap());
            }
            slots.push(
                tok.parse::<SingleParticleState>()
                    .map_err(|_| StateError::ParseTerm(s.to_string()))?,
            );
        }
        ProductTerm::new(slots).map_err(|e| match e {
            StateError::EmptyTerm => StateError::ParseTerm(s.to_string()),
            other => other,
        })
    }
}

impl Serialize for ProductTerm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ProductTerm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

/// Occupancy signature `(n_phi, n_psi, n_v, n_u)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SectorSpec {
    pub phi: usize,
    pub psi: usize,
    pub v: usize,
    pub u: usize,
}

impl SectorSpec {
    pub fn new(phi: usize, psi: usize, v: usize, u: usize) -> Self {
        Self { phi, psi, v, u }
    }

    pub fn total(&self) -> usize {
        self.phi + self.psi + self.v + self.u
    }

    pub fn count(&self, mode: Mode) -> usize {
        match mode {
            Mode::Phi => self.phi,
            Mode::Psi => self.psi,
            Mode::V => self.v,
            Mode::U => self.u,
        }
    }

    fn count_mut(&mut self, mode: Mode) -> &mut usize {
        match mode {
            Mode::Phi => &mut self.phi,
            Mode::Psi => &mut self.psi,
            Mode::V => &mut self.v,
            Mode::U => &mut self.u,
        }
    }
}

impl fmt::Display for SectorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{},{})", self.phi, self.psi, self.v, self.u)
    }
}

/// Sparse superposition of product terms with symbolic coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct ManyBodyState {
    statistics: Statistics,
    n: usize,
    terms: BTreeMap<ProductTerm, AmplitudeForm>,
}

impl ManyBodyState {
    pub fn zero(statistics: Statistics, n: usize) -> Self {
        Self {
            statistics,
            n,
            terms: BTreeMap::new(),
        }
    }

    /// Collects terms into a state. Repeated terms are summed; fermionic terms
    /// are sign-canonicalized first and rejected when they repeat a
    /// single-particle state. Exactly-zero coefficients are dropped.
    pub fn from_terms<I>(statistics: Statistics, n: usize, terms: I) -> Result<Self, StateError>
    where
        I: IntoIterator<Item = (ProductTerm, AmplitudeForm)>,
    {
        let mut state = Self::zero(statistics, n);
        for (term, coeff) in terms {
            state.accumulate(term, coeff)?;
        }
        state.prune();
        Ok(state)
    }

    fn accumulate(&mut self, term: ProductTerm, coeff: AmplitudeForm) -> Result<(), StateError> {
        if term.len() != self.n {
            return Err(StateError::ParticleCountMismatch {
                left: self.n,
                right: term.len(),
            });
        }
        if term.statistics() != self.statistics {
            return Err(StateError::StatisticsMismatch {
                expected: self.statistics,
                found: term.statistics(),
            });
        }
        let (key, coeff) = match self.statistics {
            Statistics::Boson => (term, coeff),
            Statistics::Fermion => {
                let (key, sign) = term
                    .canonicalize()
                    .ok_or_else(|| StateError::PauliViolation(term.to_string()))?;
                (key, coeff * f64::from(sign))
            }
        };
        *self.terms.entry(key).or_default() += coeff;
        Ok(())
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| !c.is_zero());
    }

    pub fn statistics(&self) -> Statistics {
        self.statistics
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of stored basis elements.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&ProductTerm, &AmplitudeForm)> {
        self.terms.iter()
    }

    /// Coefficient of `term`; for fermions the term is canonicalized and the
    /// sorting sign applied, so any slot ordering may be queried.
    pub fn coefficient(&self, term: &ProductTerm) -> AmplitudeForm {
        match self.statistics {
            Statistics::Boson => self.terms.get(term).copied().unwrap_or_default(),
            Statistics::Fermion => match term.canonicalize() {
                Some((key, sign)) => self.terms.get(&key).copied().unwrap_or_default() * f64::from(sign),
                None => AmplitudeForm::ZERO,
            },
        }
    }

    pub fn is_constant(&self) -> bool {
        self.terms.values().all(AmplitudeForm::is_constant)
    }

    pub fn scale(&self, factor: impl Into<Complex>) -> Self {
        let f = factor.into();
        let terms = self.terms.iter().map(|(t, c)| (t.clone(), c.scale(f))).collect();
        let mut out = Self { terms, ..self.clone() };
        out.prune();
        out
    }

    pub fn add(&self, other: &ManyBodyState) -> Result<Self, StateError> {
        check_compatible(self, other)?;
        let mut out = self.clone();
        for (t, c) in &other.terms {
            *out.terms.entry(t.clone()).or_default() += *c;
        }
        out.prune();
        Ok(out)
    }

    /// Explicit first-quantized expansion. Bosonic states are returned as
    /// stored; each fermionic Slater key expands into `n!` signed terms with
    /// weight `1/sqrt(n!)`.
    pub fn expand(&self) -> Vec<(ProductTerm, AmplitudeForm)> {
        match self.statistics {
            Statistics::Boson => self.terms.iter().map(|(t, c)| (t.clone(), *c)).collect(),
            Statistics::Fermion => {
                let perms = signed_permutations(self.n);
                let weight = 1.0 / (perms.len() as f64).sqrt();
                let mut out = Vec::with_capacity(self.terms.len() * perms.len());
                for (key, coeff) in &self.terms {
                    for (perm, sign) in &perms {
                        out.push((key.permuted(perm), *coeff * (weight * f64::from(*sign))));
                    }
                }
                out.sort_by(|a, b| a.0.cmp(&b.0));
                out
            }
        }
    }

    /// Relabels particle slots: slot `k` of every term receives old slot
    /// `perm[k]`.
    pub fn permute_slots(&self, perm: &[usize]) -> Result<Self, StateError> {
        let mut seen = vec![false; self.n];
        if perm.len() != self.n
            || !perm
                .iter()
                .all(|&p| p < self.n && !std::mem::replace(&mut seen[p], true))
        {
            return Err(StateError::InvalidPermutation {
                n: self.n,
                got: perm.len(),
            });
        }
        Self::from_terms(
            self.statistics,
            self.n,
            self.terms.iter().map(|(t, c)| (t.permuted(perm), *c)),
        )
    }
}

fn check_compatible(a: &ManyBodyState, b: &ManyBodyState) -> Result<(), StateError> {
    if a.statistics != b.statistics {
        return Err(StateError::StatisticsMismatch {
            expected: a.statistics,
            found: b.statistics,
        });
    }
    if a.n != b.n {
        return Err(StateError::ParticleCountMismatch { left: a.n, right: b.n });
    }
    Ok(())
}

/// Normalized equal-weight sum over the distinct slot arrangements of a
/// bosonic term.
pub fn symmetrize(term: &ProductTerm) -> Result<ManyBodyState, StateError> {
    if term.statistics() != Statistics::Boson {
        return Err(StateError::StatisticsMismatch {
            expected: Statistics::Boson,
            found: term.statistics(),
        });
    }
    let arrangements = distinct_permutations(term.slots());
    let weight = AmplitudeForm::constant(1.0 / (arrangements.len() as f64).sqrt());
    ManyBodyState::from_terms(
        Statistics::Boson,
        term.len(),
        arrangements.into_iter().map(|slots| (ProductTerm { slots }, weight)),
    )
}

/// Normalized Slater determinant of a fermionic term: one stored key whose
/// coefficient is the sign of the permutation that sorts `term`.
pub fn antisymmetrize(term: &ProductTerm) -> Result<ManyBodyState, StateError> {
    if term.statistics() != Statistics::Fermion {
        return Err(StateError::StatisticsMismatch {
            expected: Statistics::Fermion,
            found: term.statistics(),
        });
    }
    ManyBodyState::from_terms(
        Statistics::Fermion,
        term.len(),
        [(term.clone(), AmplitudeForm::constant(1.0))],
    )
}

/// Fock-state input: `n1` particles in phi, `n2` in psi, `n3` in v.
///
/// Fermions receive q-labels from one shared label space: phi holds
/// `q = 1..=n1`, psi `q = 1..=n2` and v `q = 1..=n3`.
pub fn type_i_initial(n1: usize, n2: usize, n3: usize, statistics: Statistics) -> Result<ManyBodyState, StateError> {
    if n1 == 0 || n2 == 0 {
        return Err(StateError::InvalidCounts(format!(
            "need at least one particle in each input mode, got n1={n1}, n2={n2}"
        )));
    }
    let blocks = [(Mode::Phi, n1), (Mode::Psi, n2), (Mode::V, n3)];
    match statistics {
        Statistics::Boson => {
            let modes: Vec<Mode> = blocks.iter().flat_map(|&(m, c)| std::iter::repeat_n(m, c)).collect();
            symmetrize(&ProductTerm::bosons(&modes)?)
        }
        Statistics::Fermion => {
            let states: Vec<(Mode, u32)> = blocks
                .iter()
                .flat_map(|&(m, c)| (1..=c as u32).map(move |q| (m, q)))
                .collect();
            antisymmetrize(&ProductTerm::fermions(&states)?)
        }
    }
}

/// Single-particle amplitudes `(phi, psi, v)` of the type-II superposition.
pub fn type_ii_weights(epsilon: f64) -> [f64; 3] {
    let input = ((1.0 - epsilon) / 2.0).sqrt();
    [input, input, epsilon.sqrt()]
}

/// Coherent-superposition input: every particle in
/// `sqrt((1-e)/2) |phi> + sqrt((1-e)/2) |psi> + sqrt(e) |v>`.
///
/// Bosons expand the `n`-fold product into its `3^n` ordered terms. Fermions
/// use the reduced representative in which particle `i` carries `q = i` in
/// every mode; distinct labels keep the antisymmetrized copies orthogonal, so
/// each product term becomes one Slater key of the same weight.
pub fn type_ii_initial(n: usize, epsilon: f64, statistics: Statistics) -> Result<ManyBodyState, StateError> {
    if n < 2 {
        return Err(StateError::InvalidCounts(format!("type II needs n >= 2, got {n}")));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return Err(StateError::InvalidEpsilon(epsilon));
    }
    let weights = type_ii_weights(epsilon);
    let modes = [Mode::Phi, Mode::Psi, Mode::V];
    let total = 3usize.pow(n as u32);
    let mut terms = Vec::with_capacity(total);
    for index in 0..total {
        let mut digits = index;
        let mut coeff = 1.0;
        let mut slots = Vec::with_capacity(n);
        for particle in 0..n {
            let choice = digits % 3;
            digits /= 3;
            coeff *= weights[choice];
            slots.push(SingleParticleState {
                mode: modes[choice],
                q: (statistics == Statistics::Fermion).then_some(particle as u32 + 1),
            });
        }
        if coeff != 0.0 {
            terms.push((ProductTerm { slots }, AmplitudeForm::constant(coeff)));
        }
    }
    ManyBodyState::from_terms(statistics, n, terms)
}

/// `<bra|ket>` at concrete `(S_A, S_B)`; stored basis elements are orthonormal.
pub fn inner_product(
    bra: &ManyBodyState,
    ket: &ManyBodyState,
    sa: Complex,
    sb: Complex,
) -> Result<Complex, StateError> {
    check_compatible(bra, ket)?;
    let (small, large, conj_small) = if bra.len() <= ket.len() {
        (bra, ket, true)
    } else {
        (ket, bra, false)
    };
    Ok(small
        .terms
        .iter()
        .filter_map(|(t, c)| large.terms.get(t).map(|d| (c.eval(sa, sb), d.eval(sa, sb))))
        .map(|(x, y)| if conj_small { x.conj() * y } else { y.conj() * x })
        .sum())
}

/// `sqrt(<s|s>)` at concrete `(S_A, S_B)`.
pub fn norm(state: &ManyBodyState, sa: Complex, sb: Complex) -> f64 {
    state
        .terms
        .values()
        .map(|c| c.eval(sa, sb).norm_sqr())
        .fold(0.0, |acc, x| acc + x)
        .sqrt()
}

/// Keeps the terms whose per-mode counts equal `sector`.
pub fn project_sector(state: &ManyBodyState, sector: SectorSpec) -> ManyBodyState {
    ManyBodyState {
        terms: state
            .terms
            .iter()
            .filter(|(t, _)| t.counts() == sector)
            .map(|(t, c)| (t.clone(), *c))
            .collect(),
        ..state.clone()
    }
}

/// Sectors present in `state`, in ascending order.
pub fn sectors(state: &ManyBodyState) -> Vec<SectorSpec> {
    let mut out: Vec<SectorSpec> = state.terms.keys().map(ProductTerm::counts).collect();
    out.sort();
    out.dedup();
    out
}

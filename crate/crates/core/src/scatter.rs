//! First-order pair scattering in the first-quantized picture.
//!
//! One event replaces a (phi, psi) pair of particle slots by (v, u). Process A
//! sends the phi-slot particle to v and the psi-slot particle to u; process B
//! swaps the two destinations. Each (ordered pair, process) is recorded as a
//! separate path, and the grouped final state is the sum of all paths.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::amplitude::{format_complex, AmplitudeForm, Complex};
use crate::error::StateError;
use crate::fock::{self, ManyBodyState, Mode, ProductTerm, SectorSpec, Statistics};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Process {
    A,
    B,
}

impl Process {
    /// Destination modes of the (phi-slot, psi-slot) particles.
    pub fn destinations(self) -> (Mode, Mode) {
        match self {
            Process::A => (Mode::V, Mode::U),
            Process::B => (Mode::U, Mode::V),
        }
    }
}

impl fmt::Display for Process {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Process::A => "A",
            Process::B => "B",
        })
    }
}

/// One scattering path. Slots are 1-based particle labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub source_term: ProductTerm,
    pub process: Process,
    pub phi_slot: usize,
    pub psi_slot: usize,
    /// Fermionic reordering sign picked up when canonicalizing the
    /// destination; always +1 for bosons.
    pub sign: i8,
    pub contribution: AmplitudeForm,
    pub destination_term: ProductTerm,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScatterResult {
    /// Unnormalized scattered state.
    pub final_state: ManyBodyState,
    pub paths: Vec<PathRecord>,
    /// Fermionic paths dropped because a destination state was occupied.
    pub blocked: usize,
}

impl ScatterResult {
    /// Destinations fed by more than one path, with their path counts.
    pub fn interfering_destinations(&self) -> BTreeMap<ProductTerm, usize> {
        let mut counts: BTreeMap<ProductTerm, usize> = BTreeMap::new();
        for p in &self.paths {
            *counts.entry(p.destination_term.clone()).or_default() += 1;
        }
        counts.retain(|_, c| *c > 1);
        counts
    }
}

fn enumerate_pairs(term: &ProductTerm) -> impl Iterator<Item = (usize, usize)> + '_ {
    let slots = term.slots();
    slots
        .iter()
        .enumerate()
        .filter(|(_, s)| s.mode == Mode::Phi)
        .flat_map(move |(i, _)| {
            slots
                .iter()
                .enumerate()
                .filter(|(_, s)| s.mode == Mode::Psi)
                .map(move |(j, _)| (i, j))
        })
}

fn raw_destination(term: &ProductTerm, i: usize, j: usize, process: Process) -> ProductTerm {
    let (to_i, to_j) = process.destinations();
    let slots = term.slots();
    term.with_slots_replaced(&[(i, slots[i].with_mode(to_i)), (j, slots[j].with_mode(to_j))])
}

fn process_form(process: Process, coeff: Complex) -> AmplitudeForm {
    match process {
        Process::A => AmplitudeForm::along_a(coeff),
        Process::B => AmplitudeForm::along_b(coeff),
    }
}

/// Applies one pair-scattering event to every term of `state`.
///
/// The input coefficients must be constant (no `S_A`/`S_B` dependence). For
/// fermions q is conserved per particle and a path whose destination repeats
/// a single-particle state is dropped.
pub fn apply_first_order(state: &ManyBodyState) -> Result<ScatterResult, StateError> {
    let mut paths = Vec::new();
    let mut blocked = 0;
    for (term, coeff) in state.terms() {
        if !coeff.is_constant() {
            return Err(StateError::NonConstantCoefficients(term.to_string()));
        }
        for (i, j) in enumerate_pairs(term) {
            for process in [Process::A, Process::B] {
                let raw = raw_destination(term, i, j, process);
                let (destination, sign) = match state.statistics() {
                    Statistics::Boson => (raw, 1),
                    Statistics::Fermion => match raw.canonicalize() {
                        Some(canonical) => canonical,
                        None => {
                            blocked += 1;
                            continue;
                        }
                    },
                };
                paths.push(PathRecord {
                    source_term: term.clone(),
                    process,
                    phi_slot: i + 1,
                    psi_slot: j + 1,
                    sign,
                    contribution: process_form(process, coeff.c0 * f64::from(sign)),
                    destination_term: destination,
                });
            }
        }
    }
    let final_state = ManyBodyState::from_terms(
        state.statistics(),
        state.n(),
        paths.iter().map(|p| (p.destination_term.clone(), p.contribution)),
    )?;
    Ok(ScatterResult {
        final_state,
        paths,
        blocked,
    })
}

/// `sqrt(<f|f>)` of the scattered state at `(S_A, S_B)`.
pub fn scattered_norm(state: &ManyBodyState, sa: Complex, sb: Complex) -> Result<f64, StateError> {
    Ok(fock::norm(&apply_first_order(state)?.final_state, sa, sb))
}

/// Norm of the part of the scattered state lying in `sector`.
pub fn sector_amplitude(
    state: &ManyBodyState,
    sector: SectorSpec,
    sa: Complex,
    sb: Complex,
) -> Result<f64, StateError> {
    let scattered = apply_first_order(state)?.final_state;
    Ok(fock::norm(&fock::project_sector(&scattered, sector), sa, sb))
}

fn sort_paths(paths: &mut [PathRecord]) {
    paths.sort_by(|a, b| {
        (a.source_term.to_string(), a.process, a.phi_slot, a.psi_slot).cmp(&(
            b.source_term.to_string(),
            b.process,
            b.phi_slot,
            b.psi_slot,
        ))
    });
}

/// Paths of [`apply_first_order`] ending in `destination`, deterministically
/// ordered by (source rendering, process, slots). Fermionic destinations may
/// be given in any slot order.
pub fn path_report(state: &ManyBodyState, destination: &ProductTerm) -> Result<Vec<PathRecord>, StateError> {
    let target = match state.statistics() {
        Statistics::Boson => destination.clone(),
        Statistics::Fermion => match destination.canonicalize() {
            Some((t, _)) => t,
            None => return Ok(Vec::new()),
        },
    };
    let mut paths: Vec<PathRecord> = apply_first_order(state)?
        .paths
        .into_iter()
        .filter(|p| p.destination_term == target)
        .collect();
    sort_paths(&mut paths);
    Ok(paths)
}

/// Paths into `destination` computed on the explicit first-quantized
/// expansion of `state`, without applying exclusion. For a fermionic state
/// this exposes how paths into a doubly occupied destination cancel.
pub fn expanded_path_report(state: &ManyBodyState, destination: &ProductTerm) -> Vec<PathRecord> {
    let mut paths = Vec::new();
    for (term, coeff) in state.expand() {
        for (i, j) in enumerate_pairs(&term) {
            for process in [Process::A, Process::B] {
                let raw = raw_destination(&term, i, j, process);
                if &raw == destination {
                    paths.push(PathRecord {
                        source_term: term.clone(),
                        process,
                        phi_slot: i + 1,
                        psi_slot: j + 1,
                        sign: 1,
                        contribution: process_form(process, coeff.c0),
                        destination_term: raw,
                    });
                }
            }
        }
    }
    sort_paths(&mut paths);
    paths
}

/// Sum of the path contributions.
pub fn total_contribution(paths: &[PathRecord]) -> AmplitudeForm {
    paths.iter().fold(AmplitudeForm::ZERO, |acc, p| acc + p.contribution)
}

/// Aligned text table: source | process | slots | sign | contribution.
pub fn render_path_table(paths: &[PathRecord]) -> String {
    let header = ["source", "process", "slots", "sign", "contribution"];
    let rows: Vec<[String; 5]> = paths
        .iter()
        .map(|p| {
            [
                p.source_term.to_string(),
                p.process.to_string(),
                format!("({},{})", p.phi_slot, p.psi_slot),
                if p.sign > 0 { "+".into() } else { "-".into() },
                p.contribution.to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: [&str; 5]| {
        let padded: Vec<String> = cells.iter().zip(widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = vec![line(header)];
    out.push(widths.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    for row in &rows {
        out.push(line([&row[0], &row[1], &row[2], &row[3], &row[4]]));
    }
    out.join("\n") + "\n"
}

/// One-line summary of a grouped amplitude at concrete values.
pub fn describe_total(total: &AmplitudeForm, sa: Complex, sb: Complex) -> String {
    format!("total = {total} = {}", format_complex(total.eval(sa, sb)))
}

use mixbench::closed_form::{self, TypeIIParams, TypeIParams};
use mixbench::fock::{self, ManyBodyState, Mode, ProductTerm, Statistics};
use mixbench::oracle;
use mixbench::scatter;
use mixbench::Complex;
use proptest::prelude::*;

const TOL: f64 = 1e-10;

fn c(re: f64, im: f64) -> Complex {
    Complex::new(re, im)
}

fn amplitude_pairs() -> [(Complex, Complex); 4] {
    [
        (c(1.0, 0.0), c(1.0, 0.0)),
        (c(1.0, 0.0), c(-1.0, 0.0)),
        (c(0.3, 0.1), c(0.2, 0.0)),
        (c(-0.7, 0.4), c(0.1, -0.9)),
    ]
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * 1f64.max(a.abs()).max(b.abs())
}

/// Dense reference on the explicit n-fold tensor product of a single-particle
/// space with `4 * labels` states (mode-major). It builds its own states from
/// occupation lists and applies the two-body operator slot pair by slot pair.
mod dense {
    use super::*;
    use std::collections::HashMap;

    pub struct Space {
        pub n: usize,
        pub labels: usize,
    }

    impl Space {
        fn dim(&self) -> usize {
            4 * self.labels
        }

        fn index(&self, mode: usize, label: usize) -> usize {
            mode * self.labels + label
        }

        fn decode(&self, mut idx: usize) -> Vec<usize> {
            let mut out = vec![0; self.n];
            for slot in (0..self.n).rev() {
                out[slot] = idx % self.dim();
                idx /= self.dim();
            }
            out
        }

        fn encode(&self, states: &[usize]) -> usize {
            states.iter().fold(0, |acc, &s| acc * self.dim() + s)
        }

        fn len(&self) -> usize {
            self.dim().pow(self.n as u32)
        }
    }

    fn permutations(n: usize) -> Vec<Vec<usize>> {
        if n == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(n - 1) {
            for pos in 0..n {
                let mut q = p.clone();
                q.insert(pos, n - 1);
                out.push(q);
            }
        }
        out
    }

    fn parity(p: &[usize]) -> f64 {
        let mut inv = 0;
        for i in 0..p.len() {
            for j in i + 1..p.len() {
                if p[i] > p[j] {
                    inv += 1;
                }
            }
        }
        if inv % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// (Anti)symmetrized and normalized version of a product vector.
    pub fn project(space: &Space, product: &[Complex], fermion: bool) -> Vec<Complex> {
        let mut out = vec![Complex::new(0.0, 0.0); space.len()];
        let perms = permutations(space.n);
        for (idx, &amp) in product.iter().enumerate() {
            if amp == Complex::new(0.0, 0.0) {
                continue;
            }
            let states = space.decode(idx);
            for p in &perms {
                let moved: Vec<usize> = p.iter().map(|&k| states[k]).collect();
                let sign = if fermion { parity(p) } else { 1.0 };
                out[space.encode(&moved)] += amp * sign;
            }
        }
        let norm = out.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            for z in &mut out {
                *z /= norm;
            }
        }
        out
    }

    pub fn basis_product(space: &Space, states: &[usize]) -> Vec<Complex> {
        let mut v = vec![Complex::new(0.0, 0.0); space.len()];
        v[space.encode(states)] = Complex::new(1.0, 0.0);
        v
    }

    pub fn scattered_norm(space: &Space, state: &[Complex], sa: Complex, sb: Complex) -> f64 {
        let (phi, psi, v, u) = (0, 1, 2, 3);
        let mut out: HashMap<usize, Complex> = HashMap::new();
        for (idx, &amp) in state.iter().enumerate() {
            if amp == Complex::new(0.0, 0.0) {
                continue;
            }
            let states = space.decode(idx);
            for i in 0..space.n {
                for j in 0..space.n {
                    let (mi, li) = (states[i] / space.labels, states[i] % space.labels);
                    let (mj, lj) = (states[j] / space.labels, states[j] % space.labels);
                    if i == j || mi != phi || mj != psi {
                        continue;
                    }
                    for (to_i, to_j, s) in [(v, u, sa), (u, v, sb)] {
                        let mut next = states.clone();
                        next[i] = space.index(to_i, li);
                        next[j] = space.index(to_j, lj);
                        *out.entry(space.encode(&next)).or_default() += amp * s;
                    }
                }
            }
        }
        out.values().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Type-I counts with fermions labelled 0..count within each mode.
    pub fn type1(n1: usize, n2: usize, n3: usize, fermion: bool) -> (Space, Vec<Complex>) {
        let labels = if fermion { n1.max(n2).max(n3).max(1) } else { 1 };
        let space = Space {
            n: n1 + n2 + n3,
            labels,
        };
        let mut states = Vec::new();
        for (mode, count) in [(0, n1), (1, n2), (2, n3)] {
            for k in 0..count {
                states.push(space.index(mode, if fermion { k } else { 0 }));
            }
        }
        let v = project(&space, &basis_product(&space, &states), fermion);
        (space, v)
    }

    /// Type-II coherent input: bosons share one label, fermion slot i uses label i.
    pub fn type2(n: usize, eps: f64, fermion: bool) -> (Space, Vec<Complex>) {
        let labels = if fermion { n } else { 1 };
        let space = Space { n, labels };
        let w = [((1.0 - eps) / 2.0).sqrt(), ((1.0 - eps) / 2.0).sqrt(), eps.sqrt()];
        let mut product = vec![Complex::new(0.0, 0.0); space.len()];
        for idx in 0..3usize.pow(n as u32) {
            let mut rest = idx;
            let mut states = Vec::with_capacity(n);
            let mut amp = 1.0;
            for slot in 0..n {
                let mode = rest % 3;
                rest /= 3;
                amp *= w[mode];
                states.push(space.index(mode, if fermion { slot } else { 0 }));
            }
            product[space.encode(&states)] += Complex::new(amp, 0.0);
        }
        let v = if fermion {
            project(&space, &product, true)
        } else {
            product
        };
        (space, v)
    }
}

fn engine_norms(state: &ManyBodyState, sa: Complex, sb: Complex) -> (f64, f64) {
    let firstq = scatter::scattered_norm(state, sa, sb).unwrap();
    let occ = oracle::from_first_quantized(state);
    (firstq, oracle::oracle_scattered_norm(&occ, sa, sb))
}

#[test]
fn dense_reference_matches_type1_engines() {
    for n in 2..=4usize {
        for n1 in 1..n {
            for n2 in 1..=n - n1 {
                let n3 = n - n1 - n2;
                for statistics in [Statistics::Boson, Statistics::Fermion] {
                    let fermion = statistics == Statistics::Fermion;
                    let (space, dense_state) = dense::type1(n1, n2, n3, fermion);
                    let state = fock::type_i_initial(n1, n2, n3, statistics).unwrap();
                    for (sa, sb) in amplitude_pairs() {
                        let reference = dense::scattered_norm(&space, &dense_state, sa, sb);
                        let (firstq, oracle) = engine_norms(&state, sa, sb);
                        assert!(
                            close(reference, firstq),
                            "{statistics} ({n1},{n2},{n3}): dense {reference} firstq {firstq}"
                        );
                        assert!(
                            close(reference, oracle),
                            "{statistics} ({n1},{n2},{n3}): dense {reference} oracle {oracle}"
                        );
                        let counted = closed_form::a_type1_fermion_counted(&TypeIParams {
                            n1: n1 as u32,
                            n2: n2 as u32,
                            n3: n3 as u32,
                            sa,
                            sb,
                        });
                        if fermion {
                            assert!(close(reference, counted), "counted formula at ({n1},{n2},{n3})");
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn dense_reference_matches_type2_engines() {
    for n in 2..=4usize {
        for eps in [0.0, 0.2, 0.5] {
            for statistics in [Statistics::Boson, Statistics::Fermion] {
                let (space, dense_state) = dense::type2(n, eps, statistics == Statistics::Fermion);
                let state = fock::type_ii_initial(n, eps, statistics).unwrap();
                for (sa, sb) in amplitude_pairs() {
                    let reference = dense::scattered_norm(&space, &dense_state, sa, sb);
                    let (firstq, oracle) = engine_norms(&state, sa, sb);
                    let closed = closed_form::a_type2(&TypeIIParams {
                        n: n as u32,
                        epsilon: eps,
                        sa,
                        sb,
                    });
                    assert!(
                        close(reference, firstq),
                        "{statistics} n={n} eps={eps}: {reference} vs {firstq}"
                    );
                    assert!(
                        close(reference, oracle),
                        "{statistics} n={n} eps={eps}: {reference} vs {oracle}"
                    );
                    assert!(
                        close(reference, closed),
                        "{statistics} n={n} eps={eps}: {reference} vs {closed}"
                    );
                }
            }
        }
    }
}

#[test]
fn boson_type1_grid_agrees_on_all_engines() {
    for n in 2..=6u32 {
        for n1 in 1..n {
            for n2 in 1..=n - n1 {
                let n3 = n - n1 - n2;
                let state = fock::type_i_initial(n1 as usize, n2 as usize, n3 as usize, Statistics::Boson).unwrap();
                for (sa, sb) in amplitude_pairs() {
                    let (firstq, oracle) = engine_norms(&state, sa, sb);
                    let closed = closed_form::a_type1_boson(&TypeIParams { n1, n2, n3, sa, sb });
                    assert!(
                        close(firstq, oracle) && close(firstq, closed),
                        "({n1},{n2},{n3}) {firstq} {oracle} {closed}"
                    );
                }
            }
        }
    }
}

#[test]
fn fermion_engines_agree_and_suppression_is_exact() {
    for n in 2..=6u32 {
        for n1 in 1..n {
            for n2 in 1..=n - n1 {
                let n3 = n - n1 - n2;
                let state = fock::type_i_initial(n1 as usize, n2 as usize, n3 as usize, Statistics::Fermion).unwrap();
                for (sa, sb) in amplitude_pairs() {
                    let (firstq, oracle) = engine_norms(&state, sa, sb);
                    assert!(close(firstq, oracle), "({n1},{n2},{n3}) {firstq} {oracle}");
                    if n3 >= n1.max(n2) {
                        assert_eq!(firstq, 0.0);
                        assert_eq!(oracle, 0.0);
                    }
                }
            }
        }
    }
}

#[test]
fn fermion_scattering_respects_exclusion_and_conserves_number() {
    for (n1, n2, n3) in [(2, 1, 0), (2, 2, 1), (3, 2, 1), (1, 3, 1)] {
        let state = fock::type_i_initial(n1, n2, n3, Statistics::Fermion).unwrap();
        let result = scatter::apply_first_order(&state).unwrap();
        for (term, _) in result.final_state.terms() {
            assert!(term.is_pauli_allowed(), "{term}");
            assert_eq!(term.len(), n1 + n2 + n3);
        }
        for p in &result.paths {
            assert!(p.destination_term.is_pauli_allowed());
        }
    }
}

#[test]
fn scattering_is_linear_in_the_input_state() {
    let a = fock::type_i_initial(2, 1, 1, Statistics::Boson).unwrap();
    let b = fock::type_ii_initial(4, 0.3, Statistics::Boson).unwrap();
    let (x, y) = (c(0.4, -1.2), c(2.0, 0.5));
    let combined = a.scale(x).add(&b.scale(y)).unwrap();
    let lhs = scatter::apply_first_order(&combined).unwrap().final_state;
    let rhs = scatter::apply_first_order(&a)
        .unwrap()
        .final_state
        .scale(x)
        .add(&scatter::apply_first_order(&b).unwrap().final_state.scale(y))
        .unwrap();
    for (sa, sb) in amplitude_pairs() {
        let diff = lhs.add(&rhs.scale(-1.0)).unwrap();
        assert!(fock::norm(&diff, sa, sb) < 1e-12);
    }
}

#[test]
fn scattered_norm_is_invariant_under_slot_relabelling() {
    let boson = fock::type_ii_initial(4, 0.2, Statistics::Boson).unwrap();
    let fermion = fock::type_i_initial(2, 2, 1, Statistics::Fermion).unwrap();
    for perm in [[1, 0, 2, 3], [3, 2, 1, 0], [2, 0, 3, 1]] {
        for (sa, sb) in amplitude_pairs() {
            let permuted = boson.permute_slots(&perm).unwrap();
            assert!(close(
                scatter::scattered_norm(&boson, sa, sb).unwrap(),
                scatter::scattered_norm(&permuted, sa, sb).unwrap()
            ));
        }
    }
    let perm5 = [4, 2, 0, 1, 3];
    let permuted = fermion.permute_slots(&perm5).unwrap();
    for (sa, sb) in amplitude_pairs() {
        assert!(close(
            scatter::scattered_norm(&fermion, sa, sb).unwrap(),
            scatter::scattered_norm(&permuted, sa, sb).unwrap()
        ));
    }
}

#[test]
fn sector_amplitudes_recompose_the_norm() {
    let state = fock::type_ii_initial(4, 0.25, Statistics::Boson).unwrap();
    let (sa, sb) = (c(0.3, 0.1), c(0.2, 0.0));
    let result = scatter::apply_first_order(&state).unwrap();
    let total: f64 = fock::sectors(&result.final_state)
        .into_iter()
        .map(|s| scatter::sector_amplitude(&state, s, sa, sb).unwrap().powi(2))
        .sum();
    assert!(close(total.sqrt(), scatter::scattered_norm(&state, sa, sb).unwrap()));
}

#[test]
fn worked_boson_destination_has_four_paths() {
    let state = fock::type_i_initial(1, 1, 1, Statistics::Boson).unwrap();
    let dest = ProductTerm::bosons(&[Mode::V, Mode::V, Mode::U]).unwrap();
    let paths = scatter::path_report(&state, &dest).unwrap();
    assert_eq!(paths.len(), 4);
    let total = scatter::total_contribution(&paths);
    let expected = 2.0 / 6f64.sqrt();
    assert!((total.ca - expected).norm() < 1e-12 && (total.cb - expected).norm() < 1e-12);
    assert_eq!(total.c0, c(0.0, 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn engines_agree_on_random_amplitudes(
        n1 in 1usize..4, n2 in 1usize..4, n3 in 0usize..3,
        ar in -2.0f64..2.0, ai in -2.0f64..2.0, br in -2.0f64..2.0, bi in -2.0f64..2.0,
        fermion in any::<bool>(),
    ) {
        let statistics = if fermion { Statistics::Fermion } else { Statistics::Boson };
        let state = fock::type_i_initial(n1, n2, n3, statistics).unwrap();
        let (sa, sb) = (c(ar, ai), c(br, bi));
        let (firstq, oracle) = engine_norms(&state, sa, sb);
        prop_assert!(close(firstq, oracle));
        if fermion {
            let counted = closed_form::a_type1_fermion_counted(&TypeIParams { n1: n1 as u32, n2: n2 as u32, n3: n3 as u32, sa, sb });
            prop_assert!(close(firstq, counted));
        } else {
            let closed = closed_form::a_type1_boson(&TypeIParams { n1: n1 as u32, n2: n2 as u32, n3: n3 as u32, sa, sb });
            prop_assert!(close(firstq, closed));
        }
    }
}

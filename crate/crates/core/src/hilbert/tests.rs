use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::lattice::{LadderGeometry, PhysicalParams};

fn spec(n_rungs: usize, detuning_ratio: f64) -> HamiltonianSpec {
    let params = PhysicalParams::with_detuning_ratio(detuning_ratio);
    let geom = LadderGeometry::from_blockade_ratio(n_rungs, 2.173, 2.0, &params).unwrap();
    HamiltonianSpec::new(geom, params)
}

/// Kronecker-product construction of H: the oracle for the bitmask kernels.
fn kron_hamiltonian(spec: &HamiltonianSpec) -> DMatrix<f64> {
    let n = spec.n_atoms();
    let sx = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let occ = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]);
    let id = DMatrix::<f64>::identity(2, 2);
    // Atom n-1 is the leftmost factor so that atom j ↔ bit j.
    let embed = |ops: &[(usize, &DMatrix<f64>)]| {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for site in (0..n).rev() {
            let f = ops
                .iter()
                .find(|(j, _)| *j == site)
                .map(|(_, o)| *o)
                .unwrap_or(&id);
            m = m.kronecker(f);
        }
        m
    };
    let dim = 1 << n;
    let mut h = DMatrix::<f64>::zeros(dim, dim);
    for j in 0..n {
        h += embed(&[(j, &sx)]) * (spec.params.rabi / 2.0);
        h -= embed(&[(j, &occ)]) * (spec.params.detuning + spec.local_detunings[j]);
        for k in (j + 1)..n {
            let r = spec.geometry.distance(j, k);
            h += embed(&[(j, &occ), (k, &occ)]) * (spec.params.c6 / r.powi(6));
        }
    }
    h
}

fn dense_apply(m: &DMatrix<f64>, psi: &StateVector) -> Vec<C64> {
    let dim = psi.dim();
    (0..dim)
        .map(|r| {
            (0..dim)
                .map(|c| psi.amplitudes()[c] * m[(r, c)])
                .sum::<C64>()
        })
        .collect()
}

#[test]
fn all_ground_has_zero_diagonal() {
    let d = diagonal_energies(&spec(2, 2.5)).unwrap();
    assert_eq!(d[0], 0.0);
}

#[test]
fn single_excitation_diagonal() {
    let s = spec(2, 2.5).with_local_detuning(3, 1.75);
    let d = diagonal_energies(&s).unwrap();
    for j in 0..4 {
        assert_relative_eq!(d[1 << j], -(s.params.detuning + s.local_detunings[j]));
    }
}

#[test]
fn doubly_excited_rung_diagonal() {
    let params =
        PhysicalParams::new(4.0 * std::f64::consts::PI, 3.0, crate::lattice::DEFAULT_C6).unwrap();
    let geom = LadderGeometry::new(1, 4.0, 2.0).unwrap();
    let d = diagonal_energies(&HamiltonianSpec::new(geom, params)).unwrap();
    assert_relative_eq!(d[3], -6.0 + params.c6 / 8f64.powi(6), max_relative = 1e-14);
}

#[test]
fn single_atom_dense_matrix_is_rabi_term() {
    // One "rung" of one atom does not exist, so build the two-level case from a
    // one-rung ladder restricted to the bottom atom ground state.
    let params = PhysicalParams::new(2.0, 0.0, 1.0).unwrap();
    let geom = LadderGeometry::new(1, 1.0, 1e3).unwrap();
    let m = dense_matrix(&HamiltonianSpec::new(geom, params)).unwrap();
    // The 2×2 block acting on atom 0 with atom 1 in |g⟩.
    assert_relative_eq!(m[(0, 0)], 0.0);
    assert_relative_eq!(m[(0, 1)], 1.0);
    assert_relative_eq!(m[(1, 0)], 1.0);
    assert_relative_eq!(m[(1, 1)], 0.0);
}

#[test]
fn rabi_term_on_all_ground() {
    let s = spec(3, 0.0);
    let basis = s.full_basis().unwrap();
    let psi = StateVector::basis_state(basis, 0).unwrap();
    let out = apply_hamiltonian(&s, &psi).unwrap();
    for (i, a) in out.amplitudes().iter().enumerate() {
        let expected = if i.count_ones() == 1 {
            s.params.rabi / 2.0
        } else {
            0.0
        };
        assert_relative_eq!(a.re, expected, epsilon = 1e-14);
        assert_eq!(a.im, 0.0);
    }
}

#[test]
fn matvec_matches_kronecker_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for n_rungs in 1..=4 {
        let mut s = spec(n_rungs, 2.5);
        for (j, d) in s.local_detunings.iter_mut().enumerate() {
            *d = 0.3 * j as f64;
        }
        let oracle = kron_hamiltonian(&s);
        let dense = dense_matrix(&s).unwrap();
        let diff = (&oracle - &dense).abs().max();
        assert!(diff <= 1e-9 * oracle.abs().max(), "dense differs by {diff}");

        let psi = StateVector::random(s.full_basis().unwrap(), &mut rng);
        let got = apply_hamiltonian(&s, &psi).unwrap();
        let want = dense_apply(&oracle, &psi);
        let scale = oracle.abs().max();
        for (g, w) in got.amplitudes().iter().zip(&want) {
            assert!((g - w).norm() <= 1e-12 * scale, "{g} vs {w}");
        }
    }
}

#[test]
fn dense_trace_equals_diagonal_sum() {
    let s = spec(3, 1.7);
    let d = diagonal_energies(&s).unwrap();
    let m = dense_matrix(&s).unwrap();
    assert_relative_eq!(m.trace(), d.iter().sum::<f64>(), max_relative = 1e-12);
}

#[test]
fn dense_matrix_symmetric_with_real_spectrum() {
    let m = dense_matrix(&spec(2, 2.0)).unwrap();
    assert_eq!(m, m.transpose());
    let eig = m.symmetric_eigen();
    assert!(eig.eigenvalues.iter().all(|e| e.is_finite()));
}

#[test]
fn off_diagonal_structure() {
    let s = spec(2, 2.0);
    let m = dense_matrix(&s).unwrap();
    for r in 0..16usize {
        for c in 0..16usize {
            if r == c {
                continue;
            }
            if (r ^ c).count_ones() == 1 {
                assert_eq!(m[(r, c)], s.params.rabi / 2.0);
            } else {
                assert_eq!(m[(r, c)], 0.0);
            }
        }
    }
}

#[test]
fn blockaded_pair_exceeds_rabi() {
    let s = spec(3, 0.0);
    let d = diagonal_energies(&s).unwrap();
    let rb = crate::lattice::blockade_radius(&s.params);
    for j in 0..6 {
        for k in (j + 1)..6 {
            if s.geometry.distance(j, k) < rb {
                assert!(d[(1 << j) | (1 << k)] > s.params.rabi);
            }
        }
    }
}

#[test]
fn dense_over_capacity() {
    let s = spec(7, 2.0);
    assert!(matches!(
        dense_matrix(&s),
        Err(crate::Error::Capacity { .. })
    ));
}

#[test]
fn dimension_mismatch_rejected() {
    let s = spec(2, 2.0);
    let other = Arc::new(Basis::full(6, 26).unwrap());
    let psi = StateVector::basis_state(other, 0).unwrap();
    assert!(apply_hamiltonian(&s, &psi).is_err());
}

#[test]
fn occupancies_of_basis_state() {
    let basis = Arc::new(Basis::full(6, 26).unwrap());
    let psi = StateVector::basis_state(basis, (1 << 2) | (1 << 5)).unwrap();
    let n = occupancy_expectations(&psi).unwrap();
    assert_eq!(n, vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
}

#[test]
fn occupancies_of_uniform_superposition() {
    let basis = Arc::new(Basis::full(5, 26).unwrap());
    let amp = C64::new((1.0f64 / 32.0).sqrt(), 0.0);
    let psi = StateVector::from_amplitudes(basis, vec![amp; 32]).unwrap();
    for v in occupancy_expectations(&psi).unwrap() {
        assert_relative_eq!(v, 0.5, epsilon = 1e-14);
    }
}

#[test]
fn occupancies_match_density_matrix_diagonal() {
    // Oracle: ⟨n_j⟩ = Tr(ρ n_j) with ρ = |ψ⟩⟨ψ| built explicitly.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 4;
    let basis = Arc::new(Basis::full(n, 26).unwrap());
    let psi = StateVector::random(basis, &mut rng);
    let a = psi.amplitudes();
    let rho = DMatrix::from_fn(16, 16, |r, c| a[r] * a[c].conj());
    let got = occupancy_expectations(&psi).unwrap();
    for j in 0..n {
        let mut tr = 0.0;
        for s in 0..16usize {
            if s >> j & 1 == 1 {
                tr += rho[(s, s)].re;
            }
        }
        assert_relative_eq!(got[j], tr, epsilon = 1e-13);
    }
}

#[test]
fn occupancies_reject_unnormalized() {
    let basis = Arc::new(Basis::full(2, 26).unwrap());
    let psi = StateVector::from_amplitudes(basis, vec![C64::new(1.0, 0.0); 4]).unwrap();
    assert!(matches!(
        occupancy_expectations(&psi),
        Err(crate::Error::Normalization { .. })
    ));
}

#[test]
fn blockade_basis_matches_full_in_low_energy_sector() {
    // On the blockade subspace, the restricted matvec equals the full matvec
    // projected back onto the subspace.
    let s = spec(3, 2.5);
    let rb = crate::lattice::blockade_radius(&s.params);
    let restricted = Arc::new(Basis::blockade(&s.geometry, rb, 26).unwrap());
    let h_r = Hamiltonian::new(&s, restricted.clone()).unwrap();
    let h_f = Hamiltonian::full(&s).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let psi = StateVector::random(restricted.clone(), &mut rng);
    let full_out = h_f.apply(&psi.to_full().unwrap()).unwrap();
    let r_out = h_r.apply(&psi).unwrap();
    for i in 0..restricted.dim() {
        let m = restricted.mask(i) as usize;
        assert!((r_out.amplitudes()[i] - full_out.amplitudes()[m]).norm() < 1e-10);
    }
}

mod props {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn hermitian_on_random_pairs(seed in any::<u64>(), n_rungs in 1usize..5, ratio in -1.0f64..4.0) {
            let s = spec(n_rungs, ratio);
            let basis = s.full_basis().unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let phi = StateVector::random(basis.clone(), &mut rng);
            let psi = StateVector::random(basis, &mut rng);
            let h = Hamiltonian::full(&s).unwrap();
            let a = phi.inner(&h.apply(&psi).unwrap()).unwrap();
            let b = psi.inner(&h.apply(&phi).unwrap()).unwrap().conj();
            prop_assert!((a - b).norm() < 1e-10 * (1.0 + a.norm()));
        }
    }
}

use std::sync::Arc;

use approx::assert_relative_eq;
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::hilbert::{occupancy_expectations, Basis, Hamiltonian, HamiltonianSpec, StateVector};
use crate::lattice::{LadderGeometry, PhysicalParams};
use crate::propagate::{
    central_excitation_fields, evolve_observed, prepare_product_state, uniform_times, InitialState,
    KrylovConfig,
};

fn geom(n: usize) -> LadderGeometry {
    LadderGeometry::new(n, 4.0, 2.0).unwrap()
}

fn basis(n_atoms: usize) -> Arc<Basis> {
    Arc::new(Basis::full(n_atoms, 26).unwrap())
}

#[test]
fn field_of_staggered_product_states() {
    let g = geom(2);
    let b = basis(4);
    let s = prepare_product_state(b.clone(), &g, &[1, 1]).unwrap();
    assert_eq!(field_expectations(&s, &g).unwrap().mean, vec![1.0, 1.0]);

    // |rg⟩|rg⟩: top atoms of both rungs.
    let s = StateVector::basis_state(b.clone(), 0b0101).unwrap();
    assert_eq!(field_expectations(&s, &g).unwrap().mean, vec![1.0, -1.0]);

    let s = StateVector::basis_state(b, 0).unwrap();
    let f = field_expectations(&s, &g).unwrap();
    assert_eq!(f.mean, vec![0.0, 0.0]);
    assert_eq!(f.p_zero, vec![1.0, 1.0]);
}

#[test]
fn doubly_excited_rung_counts_as_rr() {
    let g = geom(2);
    let s = StateVector::basis_state(basis(4), 0b0011).unwrap();
    let f = field_expectations(&s, &g).unwrap();
    assert_eq!(f.p_rr, vec![1.0, 0.0]);
    assert_eq!(f.mean, vec![0.0, 0.0]);
}

#[test]
fn field_matches_occupancy_formula_and_closes() {
    let g = geom(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let psi = StateVector::random(basis(6), &mut rng);
    let f = field_expectations(&psi, &g).unwrap();
    let n = occupancy_expectations(&psi).unwrap();
    for j in 0..3 {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        assert_relative_eq!(f.mean[j], (n[2 * j] - n[2 * j + 1]) * sign, epsilon = 1e-13);
        let total = f.p_minus[j] + f.p_zero[j] + f.p_plus[j] + f.p_rr[j];
        assert!((total - 1.0).abs() < 1e-9);
    }
}

#[test]
fn field_rejects_unnormalized() {
    let g = geom(1);
    let s = StateVector::from_amplitudes(basis(2), vec![C64::new(2.0, 0.0); 4]).unwrap();
    assert!(field_expectations(&s, &g).is_err());
}

#[test]
fn gauss_law_examples() {
    assert_eq!(
        charges_from_field(&[0.0, -1.0, -1.0, 0.0]).unwrap(),
        vec![-1.0, 0.0, 1.0]
    );
    assert_eq!(charges_from_field(&[0.4; 5]).unwrap(), vec![0.0; 4]);
    assert!(charges_from_field(&[1.0]).is_err());
}

#[test]
fn charges_of_expectations_are_linear() {
    // Oracle: ⟨Q⟩ computed directly as Σ_s |ψ_s|² (E_{i+1}(s) − E_i(s)).
    let g = geom(3);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let psi = StateVector::random(basis(6), &mut rng);
    let q = charges_from_field(&field_expectations(&psi, &g).unwrap().mean).unwrap();
    let mut oracle = [0.0; 2];
    for (s, a) in psi.amplitudes().iter().enumerate() {
        let e: Vec<f64> = (0..3)
            .map(|r| rung_field(s as u64, r).unwrap_or(0) as f64)
            .collect();
        for i in 0..2 {
            oracle[i] += a.norm_sqr() * (e[i + 1] - e[i]);
        }
    }
    for i in 0..2 {
        assert_relative_eq!(q[i], oracle[i], epsilon = 1e-13);
    }
}

#[test]
fn entropy_needs_odd_rungs() {
    let g = geom(2);
    let s = StateVector::basis_state(basis(4), 0).unwrap();
    assert!(matches!(
        half_chain_entropy(&s, &g),
        Err(crate::Error::BipartitionUndefined(2))
    ));
}

#[test]
fn product_state_has_zero_entropy() {
    let g = geom(5);
    let s = prepare_product_state(basis(10), &g, &[1, 0, -1, 1, 0]).unwrap();
    assert!(half_chain_entropy(&s, &g).unwrap().abs() < 1e-10);
}

#[test]
fn bell_pair_across_cut_has_ln2() {
    // Kept block of 3 rungs = atoms 0, 1; entangle atom 1 with atom 3.
    let g = geom(3);
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let mut amps = vec![C64::new(0.0, 0.0); 64];
    amps[0] = h;
    amps[(1 << 1) | (1 << 3)] = h;
    let s = StateVector::from_amplitudes(basis(6), amps).unwrap();
    assert_relative_eq!(
        half_chain_entropy(&s, &g).unwrap(),
        std::f64::consts::LN_2,
        epsilon = 1e-12
    );
}

/// Explicit ρ_A = Tr_B |ψ⟩⟨ψ| followed by a Hermitian eigensolve.
fn partial_trace_entropy(psi: &StateVector, kept: usize) -> f64 {
    let n = psi.n_atoms();
    let da = 1usize << kept;
    let db = 1usize << (n - kept);
    let a = psi.amplitudes();
    let mut rho = DMatrix::<C64>::zeros(da, da);
    for i in 0..da {
        for j in 0..da {
            let mut acc = C64::new(0.0, 0.0);
            for b in 0..db {
                acc += a[i | (b << kept)] * a[j | (b << kept)].conj();
            }
            rho[(i, j)] = acc;
        }
    }
    rho.symmetric_eigen()
        .eigenvalues
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|p| -p * p.ln())
        .sum()
}

#[test]
fn entropy_matches_partial_trace_oracle() {
    let g = geom(3);
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let psi = StateVector::random(basis(6), &mut rng);
        let s = half_chain_entropy(&psi, &g).unwrap();
        assert!((s - partial_trace_entropy(&psi, 2)).abs() < 1e-10);
        assert!(s <= max_half_chain_entropy(&g).unwrap() + 1e-12);
    }
}

#[test]
fn entropy_phase_and_relabeling_invariance() {
    let g = geom(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let psi = StateVector::random(basis(6), &mut rng);
    let s0 = half_chain_entropy(&psi, &g).unwrap();

    let phase = C64::from_polar(1.0, 0.731);
    let rotated: Vec<C64> = psi.amplitudes().iter().map(|z| z * phase).collect();
    let psi_phase = StateVector::from_amplitudes(psi.basis().clone(), rotated).unwrap();
    assert!((half_chain_entropy(&psi_phase, &g).unwrap() - s0).abs() < 1e-12);

    // Swap atoms 2 and 5, both on the traced side.
    let mut swapped = vec![C64::new(0.0, 0.0); 64];
    for (s, a) in psi.amplitudes().iter().enumerate() {
        let b2 = (s >> 2) & 1;
        let b5 = (s >> 5) & 1;
        let t = (s & !(1 << 2) & !(1 << 5)) | (b2 << 5) | (b5 << 2);
        swapped[t] = *a;
    }
    let psi_swap = StateVector::from_amplitudes(psi.basis().clone(), swapped).unwrap();
    assert!((half_chain_entropy(&psi_swap, &g).unwrap() - s0).abs() < 1e-12);
}

#[test]
fn single_rung_has_empty_kept_block() {
    let g = geom(1);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let psi = StateVector::random(basis(2), &mut rng);
    assert_eq!(half_chain_entropy(&psi, &g).unwrap(), 0.0);
}

fn quench(n: usize, ratio: f64) -> (HamiltonianSpec, StateVector) {
    let params = PhysicalParams::with_detuning_ratio(ratio);
    let g = LadderGeometry::from_blockade_ratio(n, 2.173, 2.0, &params).unwrap();
    let spec = HamiltonianSpec::new(g.clone(), params);
    let psi = prepare_product_state(
        spec.full_basis().unwrap(),
        &g,
        &central_excitation_fields(n),
    )
    .unwrap();
    (spec, psi)
}

#[test]
fn entropy_trace_zero_window() {
    let (spec, psi) = quench(3, 2.0);
    let h = Hamiltonian::full(&spec).unwrap();
    let tr = entropy_trace(&h, &spec.geometry, &psi, 0.0, 10, KrylovConfig::default()).unwrap();
    assert_eq!(tr.times, vec![0.0]);
    assert!(tr.entropy[0].abs() < 1e-10);
}

#[test]
fn entropy_trace_respects_bounds() {
    let (spec, psi) = quench(5, 2.0);
    let h = Hamiltonian::full(&spec).unwrap();
    let tr = entropy_trace(&h, &spec.geometry, &psi, 0.6, 13, KrylovConfig::default()).unwrap();
    let bound = max_half_chain_entropy(&spec.geometry).unwrap();
    assert_eq!(tr.times.len(), 13);
    assert!(tr.entropy.iter().all(|&s| s >= -1e-12 && s <= bound));
    assert!(tr.max() > 0.0);
}

#[test]
fn field_evolution_is_reflection_symmetric() {
    let (spec, psi) = quench(5, 2.5);
    let h = Hamiltonian::full(&spec).unwrap();
    let g = spec.geometry.clone();
    let times = uniform_times(0.8, 9);
    let (traj, _) = evolve_observed(&h, &psi, &times, KrylovConfig::default(), |_, s| {
        field_expectations(s, &g)
    })
    .unwrap();
    for f in &traj.snapshots {
        for j in 0..5 {
            assert!((f.mean[j] - f.mean[4 - j]).abs() < 1e-6);
        }
    }
    assert_eq!(traj.snapshots[0].mean, vec![0.0, 0.0, -1.0, 0.0, 0.0]);
}

#[test]
fn sweep_single_point_matches_trace() {
    let (spec, _) = quench(3, 2.0);
    let settings = SweepSettings {
        window: 0.4,
        n_samples: 9,
        krylov: KrylovConfig::default(),
        basis: Default::default(),
        initial: InitialState::Product,
    };
    let pd = max_entropy_sweep(&spec, &[2.0], &[2.173], &settings, &|_, _| {}).unwrap();
    let trace = point_trace(&spec, 2.0, 2.173, &settings).unwrap();
    assert_eq!(pd.values, vec![vec![trace.max()]]);

    let zero = SweepSettings {
        window: 0.0,
        ..settings.clone()
    };
    let pd0 = max_entropy_sweep(&spec, &[2.0, 3.0], &[2.173], &zero, &|_, _| {}).unwrap();
    assert!(pd0.points().all(|(_, _, v)| v.abs() < 1e-10));

    assert!(max_entropy_sweep(&spec, &[], &[2.0], &settings, &|_, _| {}).is_err());
    assert!(max_entropy_sweep(&spec, &[3.0, 2.0], &[2.0], &settings, &|_, _| {}).is_err());
}

//! Randomised invariants.

use lgt_krylov_core::analysis::{best_median_curve, extrapolate_requirement, fit, FitKind, SweepPoint};
use lgt_krylov_core::krylov::{assemble_hankel, compute_moments, MomentVector};
use lgt_krylov_core::model::{
    build_pauli_hamiltonian, embed_gauss_state, exact_ground_energy, neel_reference, ExactOptions, GaugedHamiltonian, ModelParams,
};
use lgt_krylov_core::noise::{allocate_shots, sample_perturbation, standard_normal};
use lgt_krylov_core::pauli::{decompose_dense, decompose_sparse, PauliString, PauliTerm};
use lgt_krylov_core::resources::{closed_form_sums, direct_sums, step_cost, CostOptions};
use lgt_krylov_core::solvers::{qse, Status};
use nalgebra::SymmetricEigen;
use proptest::prelude::*;

fn even_sites(max: usize) -> impl Strategy<Value = usize> {
    (1..=max / 2).prop_map(|h| 2 * h)
}

fn moments(n: usize, mu: f64, x: f64, k_max: usize) -> (MomentVector, f64) {
    let p = ModelParams::new(n, mu, x).unwrap();
    let h = GaugedHamiltonian::new(&p).unwrap();
    let g = exact_ground_energy(&p, &ExactOptions::default()).unwrap();
    (compute_moments(&h, &neel_reference(n).unwrap(), k_max, n as f64).unwrap(), g.energy)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn qse_is_variational_and_monotone(n in even_sites(6), mu in 0.1f64..3.0, x in 0.1f64..3.0) {
        let (mv, e0) = moments(n, mu, x, 14);
        let mut prev = f64::INFINITY;
        for d in 1..=7 {
            let r = qse(&mv, d).unwrap();
            if r.status != Status::Ok {
                break;
            }
            let tol = 1e-9 * e0.abs().max(1.0);
            prop_assert!(r.energy >= e0 - tol, "D={} below ground: {} < {}", d, r.energy, e0);
            prop_assert!(r.energy <= prev + tol, "D={} rose: {} > {}", d, r.energy, prev);
            prev = r.energy;
        }
    }

    #[test]
    fn noiseless_overlap_is_positive(n in even_sites(8), mu in -2.0f64..2.0, x in 0.0f64..4.0) {
        let (mv, _) = moments(n, mu, x, 16);
        for d in 1..=8 {
            let s = assemble_hankel(&mv, d).unwrap().s;
            let norm = s.abs().max();
            let min = SymmetricEigen::new(s).eigenvalues.min();
            prop_assert!(min >= -1e-9 * norm);
        }
    }

    #[test]
    fn hankel_entries_are_moments(values in prop::collection::vec(-5.0f64..5.0, 12), d in 1usize..=5) {
        let mv = MomentVector::new(values.clone(), 1.0);
        let pair = assemble_hankel(&mv, d).unwrap();
        for i in 0..d {
            for j in 0..d {
                prop_assert_eq!(pair.s[(i, j)], values[i + j]);
                prop_assert_eq!(pair.h[(i, j)], values[i + j + 1]);
            }
        }
    }

    #[test]
    fn fit_slope_ignores_shifts(
        chi in -3.0f64..-0.1,
        lambda in -5.0f64..5.0,
        shift in -50.0f64..50.0,
        wiggle in prop::collection::vec(-0.3f64..0.3, 6),
    ) {
        let make = |s: f64| -> Vec<SweepPoint> {
            wiggle.iter().enumerate().map(|(i, w)| {
                let x = i as f64 + 1.0;
                SweepPoint::new(4, x + s, 10f64.powf(chi * x + lambda + w))
            }).collect()
        };
        let a = fit(&make(0.0), FitKind::LogLinear).unwrap();
        let b = fit(&make(shift), FitKind::LogLinear).unwrap();
        prop_assert!((a.chi - b.chi).abs() <= 1e-12 * a.chi.abs().max(1.0) * (1.0 + shift.abs()));
        prop_assert!((b.lambda - (a.lambda - a.chi * shift)).abs() <= 1e-9 * (1.0 + shift.abs()));
    }

    #[test]
    fn exact_law_crossing_is_recovered(chi in -2.0f64..-0.05, lambda in -3.0f64..3.0, target_exp in 1.0f64..8.0) {
        let pts: Vec<SweepPoint> = (1..=6).map(|i| SweepPoint::new(4, i as f64, 10f64.powf(chi * i as f64 + lambda))).collect();
        let f = fit(&pts, FitKind::LogLinear).unwrap();
        let target = 10f64.powf(-target_exp);
        let want = (-target_exp - lambda) / chi;
        let got = extrapolate_requirement(&f, target).unwrap().value;
        prop_assert!((got - want).abs() <= 1e-9 * want.abs().max(1.0));

        let pts: Vec<SweepPoint> = (0..6).map(|i| {
            let calls = 10f64.powi(3 + i);
            SweepPoint::new(4, calls, 10f64.powf(chi * calls.log10() + lambda))
        }).collect();
        let f = fit(&pts, FitKind::LogLog).unwrap();
        let got = extrapolate_requirement(&f, target).unwrap().value;
        let want = 10f64.powf((-target_exp - lambda) / chi);
        prop_assert!((got / want - 1.0).abs() <= 1e-9);
    }

    #[test]
    fn best_curve_picks_the_minimum(errs in prop::collection::vec(1e-6f64..1.0, 1..8), budget in 1e3f64..1e9) {
        let pts: Vec<SweepPoint> = errs.iter().enumerate().map(|(d, &e)| {
            let mut p = SweepPoint::new(6, budget, e);
            p.dim = Some(d + 1);
            p
        }).collect();
        let best = best_median_curve(&pts);
        prop_assert_eq!(best.len(), 1);
        let min = errs.iter().copied().fold(f64::INFINITY, f64::min);
        let first = errs.iter().position(|&e| e == min).unwrap() + 1;
        prop_assert_eq!(best[0].frac_error, min);
        prop_assert_eq!(best[0].dim, Some(first));
    }

    #[test]
    fn closed_forms_equal_direct_sums(m in 0u32..=30, alpha in -1000i64..1000, beta in -1000i64..1000) {
        prop_assert_eq!(closed_form_sums(m, alpha, beta), direct_sums(m, alpha, beta));
    }

    #[test]
    fn allocation_spends_the_budget(d in 1usize..=5, exp in 2.0f64..14.0, x in 0.1f64..3.0) {
        let (mv, _) = moments(4, 1.5, x, 22);
        let budget = 10f64.powf(exp);
        let a = allocate_shots(&mv, d, budget).unwrap();
        prop_assert!((a.calls() / budget - 1.0).abs() < 1e-12);
        prop_assert!(a.shots.iter().all(|&m| m >= 0.0));
        // equal relative width on every moment
        let rel: Vec<f64> = (1..=a.max_order()).filter(|&k| a.sigma[k] > 0.0).map(|k| a.sigma[k] / mv.values[k].abs()).collect();
        for r in &rel {
            prop_assert!((r / rel[0] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn noise_is_reproducible(seed in any::<u64>(), instance in any::<u64>(), k in 0u64..64) {
        let a = standard_normal(seed, instance, k);
        prop_assert_eq!(a.to_bits(), standard_normal(seed, instance, k).to_bits());
        prop_assert!(a != standard_normal(seed, instance.wrapping_add(1), k));
    }

    #[test]
    fn sampling_does_not_depend_on_order(instances in prop::collection::vec(0u64..1000, 1..6)) {
        let (mv, _) = moments(4, 1.5, 0.5, 14);
        let a = allocate_shots(&mv, 3, 1e6).unwrap();
        let forward: Vec<_> = instances.iter().map(|&i| sample_perturbation(&a, 9, i)).collect();
        let backward: Vec<_> = instances.iter().rev().map(|&i| sample_perturbation(&a, 9, i)).collect();
        for (f, b) in forward.iter().zip(backward.iter().rev()) {
            prop_assert_eq!(f, b);
        }
    }

    #[test]
    fn pauli_text_round_trip(n in 1usize..20, x in any::<u64>(), z in any::<u64>(), coeff in -1e6f64..1e6) {
        let mask = (1u64 << n) - 1;
        let t = PauliTerm { coeff, pauli: PauliString::from_masks(x & mask, z & mask, n) };
        let back = PauliTerm::parse(&t.to_string()).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn sparse_and_dense_decompositions_agree(
        n in 1usize..=4,
        raw in prop::collection::vec((0u64..16, 0u64..16, -2.0f64..2.0), 0..12),
    ) {
        let dim = 1u64 << n;
        let mut entries = Vec::new();
        for (r, c, v) in raw {
            let (r, c) = (r % dim, c % dim);
            entries.push((r, c, v));
            if r != c {
                entries.push((c, r, v));
            }
        }
        let mut dense = vec![0.0; (dim * dim) as usize];
        for &(r, c, v) in &entries {
            dense[(r * dim + c) as usize] += v;
        }
        let mut a = decompose_sparse(n, &entries, 1e-12).unwrap();
        let mut b = decompose_dense(n, &dense, 1e-12).unwrap();
        a.sort_by(|p, q| p.pauli.cmp(&q.pauli));
        b.sort_by(|p, q| p.pauli.cmp(&q.pauli));
        prop_assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            prop_assert_eq!(&p.pauli, &q.pauli);
            prop_assert!((p.coeff - q.coeff).abs() < 1e-12);
        }
        // rebuild the matrix from the terms
        let mut rebuilt = vec![0.0; (dim * dim) as usize];
        for t in &a {
            for col in 0..dim {
                let (k, row) = t.pauli.apply_basis(col).unwrap();
                let phase = match k { 0 => 1.0, 2 => -1.0, _ => 0.0 };
                rebuilt[(row * dim + col) as usize] += phase * t.coeff;
            }
        }
        for (u, v) in rebuilt.iter().zip(&dense) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn explicit_form_reproduces_the_sector(n in even_sites(6), mu in -3.0f64..3.0, x in -3.0f64..3.0) {
        let p = ModelParams::new(n, mu, x).unwrap();
        let ham = build_pauli_hamiltonian(&p).unwrap();
        let (basis, sector) = GaugedHamiltonian::new(&p).unwrap().sector_matrix();
        let states: Vec<u64> = basis.iter().map(|&s| embed_gauss_state(n, p.link_qubits(), s).unwrap()).collect();
        let proj = ham.project(&states).unwrap();
        prop_assert!(proj.leakage < 1e-12);
        prop_assert!((&proj.matrix - &sector).abs().max() < 1e-12);
    }

    #[test]
    fn step_cost_grows_with_sites(n in 4usize..2000, m in 2u32..10) {
        let opts = CostOptions::default();
        let a = step_cost(n, m, &opts).unwrap();
        let b = step_cost(n + 1, m, &opts).unwrap();
        prop_assert!(b.t_gates >= a.t_gates && b.cnot_gates >= a.cnot_gates);
    }
}

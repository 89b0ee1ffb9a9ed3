use proptest::prelude::*;
use std::f64::consts::PI;

use qrecur::bounds::{self, max_admissible_epsilon, thm1_bound, thm2_bounds};
use qrecur::evolution::EvolutionKernel;
use qrecur::geometry::metric_space::{metric_recurrence_oracle, random_instance, SpaceFamily};
use qrecur::geometry::torus::{torus_distance, torus_from_state_reduced, torus_phase_on, wrap_angle};
use qrecur::linalg::{frobenius, hermiticity_defect, trace};
use qrecur::metrics::{bures_distance, energy_stats, fidelity, fvg_check, hs_distance};
use qrecur::states::{random_density, random_pure, DensityMatrix, Hamiltonian};
use qrecur::truncation::truncate;

fn spectrum(gaps: &[f64]) -> Hamiltonian {
    let mut e = vec![0.0];
    for g in gaps {
        e.push(e.last().unwrap() + g);
    }
    Hamiltonian::from_energies(e).unwrap()
}

fn state(n: usize, seed: u64, pure: bool) -> DensityMatrix {
    if pure {
        random_pure(n, seed).unwrap()
    } else {
        random_density(n, seed).unwrap()
    }
}

fn purity(rho: &DensityMatrix) -> f64 {
    rho.entries().iter().map(|z| z.norm_sqr()).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generated_states_are_densities(n in 1usize..6, seed: u64, pure: bool) {
        let rho = state(n, seed, pure);
        prop_assert!((trace(rho.entries()).re - 1.0).abs() < 1e-12);
        prop_assert!(hermiticity_defect(rho.entries()) < 1e-12);
        for ev in rho.eigenvalues().unwrap() {
            prop_assert!(ev > -1e-10);
        }
        if pure {
            prop_assert!((purity(&rho) - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_preserves_unitary_invariants(
        gaps in prop::collection::vec(0.05f64..3.0, 1..5),
        seed: u64,
        t in -100.0f64..100.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, false);
        let k = EvolutionKernel::new(&h, &rho).unwrap();
        let rt = k.evolve(t);
        prop_assert!((trace(rt.entries()).re - 1.0).abs() < 1e-12);
        prop_assert!((purity(&rt) - purity(&rho)).abs() < 1e-12);
        for (a, b) in rt.populations().iter().zip(rho.populations()) {
            prop_assert!((a - b).abs() < 1e-15);
        }
        let mut ev_t = rt.eigenvalues().unwrap();
        let mut ev_0 = rho.eigenvalues().unwrap();
        ev_t.sort_by(f64::total_cmp);
        ev_0.sort_by(f64::total_cmp);
        for (a, b) in ev_t.iter().zip(&ev_0) {
            prop_assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_a_flow(
        gaps in prop::collection::vec(0.05f64..3.0, 1..4),
        seed: u64,
        s in -20.0f64..20.0,
        t in -20.0f64..20.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, false);
        let k = EvolutionKernel::new(&h, &rho).unwrap();
        let two_steps = EvolutionKernel::new(&h, &k.evolve(s)).unwrap().evolve(t);
        prop_assert!(hs_distance(&two_steps, &k.evolve(s + t)).unwrap() < 1e-12);
    }

    #[test]
    fn short_time_displacement_is_bounded_by_max_frequency(
        gaps in prop::collection::vec(0.05f64..3.0, 1..5),
        seed: u64,
        t in 0.0f64..2.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, false);
        let k = EvolutionKernel::new(&h, &rho).unwrap();
        let d = hs_distance(&rho, &k.evolve(t)).unwrap();
        prop_assert!(d <= t * k.max_frequency() * frobenius(rho.entries()) + 1e-14);
    }

    #[test]
    fn energy_shift_changes_nothing(
        gaps in prop::collection::vec(0.05f64..3.0, 1..4),
        seed: u64,
        lambda in -100.0f64..100.0,
        t in 0.0f64..50.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, false);
        let a = EvolutionKernel::new(&h, &rho).unwrap().evolve(t);
        let b = EvolutionKernel::new(&h.shifted(lambda), &rho).unwrap().evolve(t);
        prop_assert!(hs_distance(&a, &b).unwrap() < 1e-10);
        let (sa, sb) = (energy_stats(&h, &rho).unwrap(), energy_stats(&h.shifted(lambda), &rho).unwrap());
        prop_assert!((sa.uncertainty - sb.uncertainty).abs() < 1e-9);
    }

    #[test]
    fn fidelity_is_symmetric_and_bounded(n in 1usize..5, s1: u64, s2: u64, pure: bool) {
        let a = state(n, s1, pure);
        let b = state(n, s2, false);
        let f = fidelity(&a, &b).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&f));
        prop_assert!((f - fidelity(&b, &a).unwrap()).abs() < 1e-9);
        prop_assert!((fidelity(&a, &a).unwrap() - 1.0).abs() < 1e-9);
        let d = bures_distance(&a, &b).unwrap();
        prop_assert!(d <= 2f64.sqrt() + 1e-12);
        prop_assert!(bures_distance(&a, &a).unwrap() < 1e-9);
    }

    #[test]
    fn fuchs_van_de_graaf(n in 2usize..5, s1: u64, s2: u64, pure: bool) {
        let c = fvg_check(&state(n, s1, pure), &state(n, s2, false)).unwrap();
        prop_assert!(c.lower_ok && c.upper_ok, "{:?}", c);
    }

    #[test]
    fn bures_triangle_inequality(n in 2usize..4, s1: u64, s2: u64, s3: u64) {
        let (a, b, c) = (state(n, s1, false), state(n, s2, false), state(n, s3, false));
        let ab = bures_distance(&a, &b).unwrap();
        let bc = bures_distance(&b, &c).unwrap();
        let ac = bures_distance(&a, &c).unwrap();
        prop_assert!(ac <= ab + bc + 1e-9);
    }

    #[test]
    fn energy_bracket_is_ordered_and_monotone(
        gaps in prop::collection::vec(0.05f64..3.0, 1..5),
        seed: u64,
        u in 0.05f64..0.9,
        v in 0.05f64..0.9,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, false);
        let emax = max_admissible_epsilon(&rho);
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let a = thm2_bounds(&h, &rho, lo * emax).unwrap();
        let b = thm2_bounds(&h, &rho, hi * emax).unwrap();
        prop_assert!(a.lower_mt <= a.upper_thm2);
        prop_assert!(a.lower_mt <= b.lower_mt + 1e-15);
        prop_assert!(a.upper_thm2 >= b.upper_thm2 * (1.0 - 1e-12));
        // AM-GM: Π√p_k ≤ n^{-n/2}
        prop_assert!(a.upper_thm2 <= a.upper_thm2_simplified * (1.0 + 1e-12));
    }

    #[test]
    fn stroboscopic_bound_grows_with_the_level(n in 1usize..6, u in 0.01f64..0.99, v in 0.01f64..0.99) {
        let (lo, hi) = if u < v { (u, v) } else { (v, u) };
        let a = thm1_bound(n, lo).unwrap();
        let b = thm1_bound(n, hi).unwrap();
        prop_assert!(a.log_jmax <= b.log_jmax + 1e-12);
        prop_assert!(a.jmax >= 1.0);
    }

    #[test]
    fn threshold_mapping_round_trips(f in 0.001f64..0.999) {
        let e = bounds::energy_epsilon_from_threshold(f);
        prop_assert!((bounds::threshold_from_energy_epsilon(e) - f).abs() < 1e-12);
    }

    #[test]
    fn truncation_is_monotone(n in 2usize..7, seed: u64) {
        let rho = state(n, seed, false);
        let mut last = (f64::INFINITY, 0.0);
        for k in 1..=n {
            let t = truncate(&rho, k).unwrap();
            prop_assert!(t.delta_n <= last.0 + 1e-15);
            prop_assert!(t.p_n >= last.1 - 1e-15);
            prop_assert!((trace(t.sigma_tilde.entries()).re - 1.0).abs() < 1e-12);
            last = (t.delta_n, t.p_n);
        }
        prop_assert_eq!(last.0, 0.0);
    }

    #[test]
    fn truncation_error_norm_is_constant_in_time(
        gaps in prop::collection::vec(0.05f64..3.0, 5..6),
        seed: u64,
        t in 0.0f64..200.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(6, seed, false);
        let tr = truncate(&rho, 3).unwrap();
        let inv = qrecur::truncation::delta_time_invariance_for(&h, &rho, &tr, &[t]).unwrap();
        prop_assert!(inv.max_drift < 1e-12);
        prop_assert!((inv.max_deviation - inv.cross_hs2).abs() < 1e-12);
    }

    #[test]
    fn bures_never_exceeds_torus_distance(
        gaps in prop::collection::vec(0.05f64..3.0, 1..5),
        seed: u64,
        pure: bool,
        t in 0.0f64..500.0,
    ) {
        let h = spectrum(&gaps);
        let rho = state(h.dim(), seed, pure);
        let (torus, levels) = torus_from_state_reduced(&rho).unwrap();
        let lambda = energy_stats(&h, &rho).unwrap().mean;
        let d_torus = torus_distance(&torus, &torus_phase_on(&h, &levels, lambda, t)).unwrap();
        let d_bures = bures_distance(&rho, &EvolutionKernel::new(&h, &rho).unwrap().evolve(t)).unwrap();
        prop_assert!(d_bures <= d_torus + 1e-9, "bures {} torus {}", d_bures, d_torus);
        prop_assert!(d_torus <= PI + 1e-12);
    }

    #[test]
    fn wrapped_angles_are_principal(x in -1e4f64..1e4) {
        let w = wrap_angle(x);
        prop_assert!(w > -PI && w <= PI);
        let k = ((x - w) / (2.0 * PI)).round();
        prop_assert!((x - w - 2.0 * PI * k).abs() < 1e-9);
    }

    #[test]
    fn metric_recurrence_bound_holds(seed: u64, family in 0usize..3) {
        let fam = [SpaceFamily::Cycle, SpaceFamily::Circle, SpaceFamily::Ultrametric][family];
        let (space, perm, p, r) = random_instance(fam, seed).unwrap();
        let o = metric_recurrence_oracle(&space, &perm, p, r).unwrap();
        prop_assert!(o.ok, "{:?}", o);
        prop_assert!(o.n_r <= o.orbit_length);
    }
}

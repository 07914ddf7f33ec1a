// SPDX-License-Identifier: Apache-2.0

mod common;

use std::f64::consts::PI;

use common::*;
use ionlattice::compiler::{beta_complex, beta_from_sequence, compile_sequence, cycle_factor, Segment, Sign};
use ionlattice::dynamics::{evolve_sequence, Evolver, SpinState};
use ionlattice::filter::{fit_filter, refit_at, BudgetMode, FilterConstraint, FitOptions, FourierFilter};
use ionlattice::gradient::{phase_tags, semi_linear_gradient, GradientProfile};
use ionlattice::lattice::{classify_bonds, target_couplings, BondClass, LatticeTarget};
use ionlattice::ms::{ms_couplings, normal_modes, BeatNote, TrapConfig};
use ionlattice::scalar::max_modulus;
use ionlattice::spin_chain::{power_law_couplings, xy_hamiltonian, Basis, ChainSpec, CouplingMatrix, SpinOperatorSet};
use nalgebra::{Complex, DVector};
use proptest::prelude::*;

fn chain(n: usize, alpha: f64) -> CouplingMatrix<f64> {
    power_law_couplings(&ChainSpec::new(n, 1.0, alpha).unwrap())
}

/// Random filter with `sum |a| <= 1` and `W <= 1/(2i)`.
fn arb_filter() -> impl Strategy<Value = FourierFilter<f64>> {
    (1usize..6)
        .prop_flat_map(|i| {
            let w_max = (0.5f64).min(1.0 / (2.0 * i as f64));
            (0.01..w_max, prop::collection::vec(-1.0f64..1.0, i + 1), 0.1f64..1.0)
        })
        .prop_map(|(w, raw, total)| {
            let s: f64 = raw.iter().map(|a| a.abs()).sum();
            let a = raw.iter().map(|a| a * total / s.max(1e-12)).collect();
            FourierFilter::new(w, a).unwrap()
        })
}

/// Random strictly increasing integer profile.
fn arb_profile(max_n: usize) -> impl Strategy<Value = GradientProfile<f64>> {
    prop::collection::vec(1i64..4, 1..max_n).prop_map(|steps| {
        let mut m = vec![1i64];
        for s in steps {
            m.push(m.last().unwrap() + s);
        }
        GradientProfile::from_multiples(&m, 200.0).unwrap()
    })
}

fn arb_lattice() -> impl Strategy<Value = (usize, usize)> {
    (2usize..=10).prop_flat_map(|mc| (1usize..=mc, Just(mc)))
}

fn state_in(basis: Basis, seed: &[f64]) -> SpinState<f64> {
    let dim = basis.dim();
    let amps = DVector::from_fn(dim, |k, _| {
        let a = seed[k % seed.len()] + 0.1 * k as f64;
        Complex::new(a.sin(), (1.7 * a).cos())
    });
    SpinState::from_amplitudes(basis, amps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_sz(n in 2usize..=6, alpha in 0.0f64..2.9) {
        let c = chain(n, alpha);
        let ops = SpinOperatorSet::<f64>::new(n).unwrap();
        let h = ops.xy_hamiltonian(&c);
        prop_assert!(max_modulus(&(&h - h.adjoint())) < 1e-14);
        let sz = ops.total_sz();
        prop_assert!(max_modulus(&(&h * &sz - &sz * &h)) < 1e-13);
        let real = xy_hamiltonian(&c, &Basis::full(n).unwrap()).unwrap();
        prop_assert!((&real - real.transpose()).amax() == 0.0);
        prop_assert!(h.iter().zip(real.iter()).all(|(z, r)| (z.re - r).abs() < 1e-14 && z.im == 0.0));
    }

    #[test]
    fn power_law_decreases_with_distance(n in 3usize..=12, alpha in 0.01f64..2.99) {
        let c = chain(n, alpha);
        for d in 1..n - 1 {
            prop_assert!(c.get(0, d) > c.get(0, d + 1));
            prop_assert!((c.get(0, d) - c.get(n - 1 - d, n - 1)).abs() < 1e-15);
        }
    }

    #[test]
    fn lattice_bonds_partition_the_chain((mr, mc) in arb_lattice()) {
        let n = mr * mc;
        let lat = LatticeTarget::square(mr, mc, 1.0).unwrap();
        let cls = classify_bonds(n, &lat).unwrap();
        prop_assert_eq!(cls.bonds().len(), n * (n - 1) / 2);
        prop_assert_eq!(cls.class_a().count(), lat.bond_count());
        let b = cls.bonds().iter().filter(|b| b.class == BondClass::B).count();
        prop_assert_eq!(b + lat.bond_count(), n * (n - 1) / 2);
        prop_assert_eq!(cls.toroidal().count(), mr - 1);
        let t = target_couplings(n, &lat).unwrap();
        prop_assert_eq!(t.bonds().filter(|b| b.2 != 0.0).count(), lat.bond_count());
    }

    #[test]
    fn semi_linear_phase_tags((mr, mc) in arb_lattice()) {
        let n = mr * mc;
        let lat = LatticeTarget::square(mr, mc, 1.0).unwrap();
        let profile = semi_linear_gradient(n, &lat, 200.0, PI / 200.0).unwrap();
        prop_assert!(profile.is_strictly_increasing());
        let tags = phase_tags(&profile).unwrap();
        let cls = classify_bonds(n, &lat).unwrap();
        let odd = mc % 2 == 1;
        for bond in cls.bonds() {
            let k = tags.multiple(bond.i, bond.j);
            if bond.toroidal {
                prop_assert_eq!(k, if odd { 3 } else { 2 });
            } else if bond.distance == 1 {
                prop_assert_eq!(k, 1);
            } else if bond.distance == mc {
                prop_assert_eq!(k, if odd { mc as i64 + 2 } else { mc as i64 + 1 });
            }
        }
    }

    #[test]
    fn filter_is_even_in_phase(f in arb_filter(), phi in -40.0f64..40.0) {
        prop_assert!((f.eval(phi) - f.eval(-phi)).abs() < 1e-14);
        prop_assert!((f.eval(phi) - series(f.w(), f.coeffs(), phi)).abs() < 1e-13);
    }

    #[test]
    fn fit_is_invariant_under_phase_sign(betas in prop::collection::vec(-0.9f64..0.9, 2..4)) {
        let odd: Vec<i64> = (0..betas.len() as i64).map(|k| 2 * k + 1).collect();
        let pos: Vec<_> = odd.iter().zip(&betas).map(|(&k, &b)| FilterConstraint::new(k, b).unwrap()).collect();
        let neg: Vec<_> = odd.iter().zip(&betas).map(|(&k, &b)| FilterConstraint::new(-k, b).unwrap()).collect();
        let opts = FitOptions::default();
        let a = fit_filter(&pos, &opts).unwrap();
        let b = fit_filter(&neg, &opts).unwrap();
        prop_assert!(a.filter.budget() <= 1.0 + 1e-12);
        prop_assert!((a.residual - b.residual).abs() < 1e-12);
        prop_assert_eq!(a.filter.order(), b.filter.order());
        prop_assert!((a.filter.w() - b.filter.w()).abs() < 1e-15);
        for (x, y) in a.filter.coeffs().iter().zip(b.filter.coeffs()) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn compiled_sequence_reproduces_filter(f in arb_filter(), profile in arb_profile(8), t in 0.005f64..0.2) {
        let seq = compile_sequence(&f, &profile, t).unwrap();
        let tags = phase_tags(&profile).unwrap();
        for (i, j, k) in tags.iter() {
            if k % 2 != 0 {
                let beta = beta_from_sequence(&seq, profile.omega_ij(i, j)).unwrap();
                prop_assert!((beta - f.eval_multiple(k)).abs() < 1e-9);
                let z = cycle_factor(&seq, profile.omega_ij(i, j));
                prop_assert!((z.re - beta).abs() < 1e-9 && z.im.abs() < 1e-9);
            } else {
                prop_assert!(cycle_factor(&seq, profile.omega_ij(i, j)).norm() < 1e-9);
            }
        }
        for b in 0..2 {
            prop_assert!((seq.interaction_time(b) - t * f.budget()).abs() < 1e-12 * t);
            prop_assert!(seq.interaction_time(b) <= t * (1.0 + 1e-12));
        }
        prop_assert_eq!(seq.block_duration(), t);
        prop_assert!(seq.segments().iter().all(|x| x.duration() >= 0.0));
        for b in 0..2 {
            prop_assert!((seq.gradient_time(b) - profile.tau_tot()).abs() < 1e-12 * profile.tau_tot());
        }

        let doubled = compile_sequence(&f, &profile, 2.0 * t).unwrap();
        for (a, b) in seq.segments().iter().zip(doubled.segments()) {
            match (a, b) {
                (Segment::Interaction { sign: s1, duration: d1 }, Segment::Interaction { sign: s2, duration: d2 }) => {
                    prop_assert_eq!(s1, s2);
                    prop_assert!((2.0 * d1 - d2).abs() < 1e-12);
                }
                (Segment::Gradient { duration: d1 }, Segment::Gradient { duration: d2 }) => {
                    prop_assert!((d1 - d2).abs() < 1e-15);
                }
                _ => prop_assert!(false, "segment kinds differ"),
            }
        }
    }

    #[test]
    fn both_blocks_combine_with_total_phase(f in arb_filter(), profile in arb_profile(6), omega in 1.0f64..5000.0) {
        let seq = compile_sequence(&f, &profile, 0.03).unwrap();
        let phi_tot = omega * profile.tau_tot();
        let one = Complex::new(1.0, 0.0);
        let expected = beta_complex(&seq, omega) * 0.5 * (one - Complex::from_polar(1.0, phi_tot));
        prop_assert!((cycle_factor(&seq, omega) - expected).norm() < 1e-12);
    }

    #[test]
    fn cycles_conserve_norm_and_sz(f in arb_filter(), profile in arb_profile(6), seed in prop::collection::vec(-3.0f64..3.0, 4)) {
        let n = profile.n();
        let c = chain(n, 0.2);
        let seq = compile_sequence(&f, &profile, 0.05).unwrap();
        let psi = state_in(Basis::full(n).unwrap(), &seed);
        let tr = evolve_sequence(&psi, &seq, &c, &profile, 5).unwrap();
        for (norm, sz) in tr.norm.iter().zip(&tr.total_sz) {
            prop_assert!((norm - 1.0).abs() < 1e-10);
            prop_assert!((sz - tr.total_sz[0]).abs() < 1e-10);
        }
    }

    #[test]
    fn interaction_reversal_is_identity(n in 2usize..=7, t in 0.0f64..20.0, seed in prop::collection::vec(-3.0f64..3.0, 4)) {
        let profile = GradientProfile::from_multiples(&(1..=n as i64).collect::<Vec<_>>(), 200.0).unwrap();
        let ev = Evolver::new(&chain(n, 0.5), &profile, Basis::full(n).unwrap()).unwrap();
        let psi = state_in(Basis::full(n).unwrap(), &seed);
        let mut phi = psi.amplitudes().clone();
        ev.apply_interaction(&mut phi, Sign::Plus, t);
        ev.apply_interaction(&mut phi, Sign::Minus, t);
        let back = SpinState::from_amplitudes(psi.basis().clone(), phi).unwrap();
        prop_assert!(1.0 - psi.fidelity(&back).unwrap() < 1e-10);
    }

    #[test]
    fn ms_couplings_are_mirror_symmetric_and_additive(n in 2usize..=6, d1 in 20e3f64..80e3, d2 in 5e3f64..30e3) {
        let tp = 2.0 * PI;
        let modes = normal_modes(&TrapConfig::new(n, tp * 1.7e6, tp * 5e6).unwrap()).unwrap();
        let a = BeatNote::new(modes.com_frequency() + tp * d1, tp * 18e3, 0);
        let b = BeatNote::new(modes.com_frequency() - tp * d2, tp * 10e3, 0);
        let ja = ms_couplings(&modes, &[a]).unwrap();
        let jb = ms_couplings(&modes, &[b]).unwrap();
        let both = ms_couplings(&modes, &[a, b]).unwrap();
        let scale = ja.max_abs().max(jb.max_abs());
        let com_only = ms_couplings(&modes.restricted(&[0]).unwrap(), &[a]).unwrap();
        let first = com_only.get(0, 1);
        for i in 0..n {
            prop_assert_eq!(both.get(i, i), 0.0);
        }
        for (i, j, v) in both.bonds() {
            prop_assert!((com_only.get(i, j) - first).abs() < 1e-9 * first.abs());
            prop_assert!((v - ja.get(i, j) - jb.get(i, j)).abs() < 1e-9 * scale);
            prop_assert!((ja.get(i, j) - ja.get(n - 1 - j, n - 1 - i)).abs() < 1e-9 * scale);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn sector_matches_full_space(f in arb_filter(), profile in arb_profile(9), k in 1usize..=2) {
        let n = profile.n();
        prop_assume!(k < n);
        let c = chain(n, 0.2);
        let seq = compile_sequence(&f, &profile, 0.05).unwrap();
        let up: Vec<usize> = (0..k).map(|s| (2 * s) % n).collect();
        let sector = SpinState::product(Basis::sector(n, k).unwrap(), &up).unwrap();
        let full = SpinState::product(Basis::full(n).unwrap(), &up).unwrap();
        let ts = evolve_sequence(&sector, &seq, &c, &profile, 4).unwrap();
        let tf = evolve_sequence(&full, &seq, &c, &profile, 4).unwrap();
        for (a, b) in ts.return_probability.iter().zip(&tf.return_probability) {
            prop_assert!((a - b).abs() < 1e-10);
        }
        for (a, b) in ts.sz.iter().zip(&tf.sz) {
            for (x, y) in a.iter().zip(b) {
                prop_assert!((x - y).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn refit_at_tabulated_w_reproduces_rows() {
    let rows =
        [((2, 3), ROW_SIX), ((3, 3), ROW_NINE), ((4, 4), ROW_16), ((5, 5), ROW_25), ((6, 6), ROW_36), ((7, 7), ROW_49)];
    for ((mr, mc), (w, a)) in rows {
        let cons = Setup::new(mr, mc).constraints();
        let fit = refit_at(&cons, w, a.len() - 1, BudgetMode::Rescale).unwrap();
        let s: f64 = a.iter().map(|x| x.abs()).sum();
        let worst = fit
            .filter
            .coeffs()
            .iter()
            .zip(a)
            .map(|(x, y)| (x / fit.filter.budget() - y / s).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 1e-2, "{mr}x{mc}: worst normalized coefficient difference {worst:.3e}");
    }
}

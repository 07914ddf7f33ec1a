// SPDX-License-Identifier: Apache-2.0

//! Transverse modes of a linear ion chain and the Molmer-Sorensen couplings
//! produced by off-resonant beat-notes near those modes.
//!
//! Positions are in units of the Coulomb length; frequencies in rad/s.

mod couplings;
mod modes;

pub use couplings::{
    fit_alpha, ms_couplings, ms_couplings_with_floor, optimize_minus_tones, sign_flip_pair, BeatNote, MinusToneFit,
    SearchOptions, SignFlipReport, DEFAULT_RESONANCE_FLOOR,
};
pub use modes::{equilibrium_positions, normal_modes, LambDicke, NormalModes, TrapConfig};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::spin_chain::{power_law_couplings, ChainSpec, CouplingMatrix};
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    const TP: f64 = 2.0 * PI;

    fn six_ion_trap() -> NormalModes<f64> {
        normal_modes(&TrapConfig::new(6, TP * 1.7e6, TP * 5e6).unwrap()).unwrap()
    }

    fn plus(m: &NormalModes<f64>) -> BeatNote<f64> {
        BeatNote::new(m.com_frequency() + TP * 55e3, TP * 18e3, 0)
    }

    fn minus(m: &NormalModes<f64>) -> [BeatNote<f64>; 2] {
        [
            BeatNote::new(m.com_frequency() - TP * 45e3, TP * 15e3, 0),
            BeatNote::new(m.tilt_frequency().unwrap() - TP * 12.3e3, TP * 4.1e3, 1),
        ]
    }

    #[test]
    fn two_ions_match_potential_minimum() {
        // V(u) = u^2 + 1/(2u) for the symmetric pair at +-u; golden-section search
        let v = |u: f64| u * u + 1.0 / (2.0 * u);
        let (mut a, mut b) = (0.1, 3.0);
        let g = (5f64.sqrt() - 1.0) / 2.0;
        for _ in 0..200 {
            let c = b - g * (b - a);
            let d = a + g * (b - a);
            if v(c) < v(d) {
                b = d;
            } else {
                a = c;
            }
        }
        let u = equilibrium_positions::<f64>(2).unwrap();
        assert_relative_eq!(u[1], 0.5 * (a + b), epsilon = 1e-8);
        assert_relative_eq!(u[1], 0.5f64.powf(2.0 / 3.0), epsilon = 1e-12);
        assert_eq!(u[0], -u[1]);
    }

    #[test]
    fn three_ions_are_symmetric() {
        let u = equilibrium_positions::<f64>(3).unwrap();
        assert_eq!(u[1], 0.0);
        assert_relative_eq!(u[2], 1.25f64.powf(1.0 / 3.0), epsilon = 1e-12);
    }

    #[test]
    fn six_ion_mode_spectrum() {
        let m = six_ion_trap();
        assert_eq!(m.frequencies.len(), 6);
        assert_relative_eq!(m.com_frequency(), TP * 5e6, max_relative = 1e-12);
        let wz = TP * 1.7e6;
        let tilt = ((TP * 5e6).powi(2) - wz * wz).sqrt();
        assert_relative_eq!(m.tilt_frequency().unwrap(), tilt, max_relative = 1e-12);
        let btb = m.vectors.transpose() * &m.vectors;
        assert!((btb - nalgebra::DMatrix::identity(6, 6)).amax() < 1e-10);
        for i in 0..6 {
            assert!((m.vectors[(i, 0)] - 1.0 / 6f64.sqrt()).abs() < 1e-10);
        }
        for w in m.frequencies.windows(2) {
            assert!(w[0] > w[1]);
        }
    }

    #[test]
    fn zigzag_instability_detected() {
        let r = normal_modes(&TrapConfig::new(10, TP * 1.7e6, TP * 2e6).unwrap());
        assert!(matches!(r, Err(Error::Unstable { .. })));
    }

    #[test]
    fn plus_profile_nearest_neighbour_and_range() {
        let m = six_ion_trap();
        let j = ms_couplings(&m, &[plus(&m)]).unwrap();
        let j12 = j.get(0, 1) / TP;
        assert!((j12 - 520.0).abs() < 52.0, "J_12 = 2pi x {j12} Hz");
        let (_, alpha) = fit_alpha(&j).unwrap();
        assert!((0.1..=0.3).contains(&alpha), "alpha = {alpha}");
    }

    #[test]
    fn far_detuning_vanishes() {
        let m = six_ion_trap();
        let near = ms_couplings(&m, &[plus(&m)]).unwrap().max_abs();
        let far = ms_couplings(&m, &[BeatNote::new(m.com_frequency() * 1e3, TP * 18e3, 0)]).unwrap().max_abs();
        assert!(far < near * 1e-6);
    }

    #[test]
    fn com_only_is_uniform() {
        let m = six_ion_trap().restricted(&[0]).unwrap();
        let j = ms_couplings(&m, &[plus(&m)]).unwrap();
        let first = j.get(0, 1);
        for (_, _, v) in j.bonds() {
            assert_relative_eq!(v, first, max_relative = 1e-12);
        }
        assert_relative_eq!(fit_alpha(&j).unwrap().1, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn tones_add() {
        let m = six_ion_trap();
        let [a, b] = minus(&m);
        let joint = ms_couplings(&m, &[a, b]).unwrap();
        let sum = &ms_couplings(&m, &[a]).unwrap() + &ms_couplings(&m, &[b]).unwrap();
        assert_eq!(joint, sum);
        for i in 0..6 {
            assert_eq!(joint.get(i, i), 0.0);
        }
    }

    #[test]
    fn resonance_guard() {
        let m = six_ion_trap();
        let r = ms_couplings(&m, &[BeatNote::new(m.com_frequency() + 10.0, TP * 18e3, 0)]);
        assert!(matches!(r, Err(Error::Resonance { mode: 0, .. })));
    }

    #[test]
    fn mirrored_com_tone_without_tilt() {
        let m = six_ion_trap().restricted(&[0]).unwrap();
        let delta = TP * 55e3;
        let w = m.com_frequency();
        let p = BeatNote::new(w + delta, TP * 18e3, 0);
        let q = BeatNote::new(w - delta, TP * 18e3, 0);
        let r = sign_flip_pair(&m, &p, &[q]).unwrap();
        // exact form: |J+ + J-| / J+ = 2 delta / (2 omega - delta), zero to leading order in delta / omega
        assert_relative_eq!(r.max_relative, 2.0 * delta / (2.0 * w - delta), max_relative = 1e-9);
        assert!(r.max_relative < 1.2e-2);
    }

    #[test]
    fn detuning_order_enforced() {
        let m = six_ion_trap();
        let [a, b] = minus(&m);
        assert!(matches!(sign_flip_pair(&m, &a, &[a, b]), Err(Error::DetuningOrder(_))));
        let wide = BeatNote::new(m.tilt_frequency().unwrap() - TP * 60e3, TP * 4.1e3, 1);
        assert!(matches!(sign_flip_pair(&m, &plus(&m), &[a, wide]), Err(Error::DetuningOrder(_))));
    }

    #[test]
    fn lowering_tilt_detuning_degrades_mismatch() {
        let m = six_ion_trap();
        let p = plus(&m);
        let [a, b] = minus(&m);
        let base = sign_flip_pair(&m, &p, &[a, b]).unwrap().max_relative;
        let tilt = m.tilt_frequency().unwrap();
        let shifted = BeatNote::new(tilt - TP * 12.3e3 * 0.8, b.eta_omega, 1);
        let lower = sign_flip_pair(&m, &p, &[a, shifted]).unwrap().max_relative;
        assert!(lower > base, "{lower} vs {base}");
    }

    #[test]
    fn coordinate_search_improves() {
        let m = six_ion_trap();
        let p = plus(&m);
        let start = minus(&m);
        let base = sign_flip_pair(&m, &p, &start).unwrap().max_relative;
        let fit = optimize_minus_tones(&m, &p, &start, &SearchOptions::default()).unwrap();
        assert!(fit.report.max_relative < base);
        assert!(sign_flip_pair(&m, &p, &fit.tones).is_ok());
    }

    #[test]
    fn alpha_fit_on_exact_power_law() {
        let j = power_law_couplings(&ChainSpec::new(8, 2.5, 0.7).unwrap());
        let (j0, alpha) = fit_alpha(&j).unwrap();
        assert_relative_eq!(alpha, 0.7, epsilon = 1e-9);
        assert_relative_eq!(j0, 2.5, epsilon = 1e-9);
        let uniform = CouplingMatrix::from_upper_fn(5, |_, _| 1.0);
        assert_eq!(fit_alpha(&uniform).unwrap().1, 0.0);
        let mut bad = power_law_couplings(&ChainSpec::new(4, 1.0, 0.5).unwrap()).values().clone();
        bad[(0, 3)] = -1.0;
        bad[(3, 0)] = -1.0;
        let bad = CouplingMatrix::from_matrix(bad).unwrap();
        assert!(matches!(fit_alpha(&bad), Err(Error::NonPositiveCoupling { i: 0, j: 3, .. })));
    }

    #[test]
    fn lamb_dicke_parametrization() {
        let trap = TrapConfig::new(2, TP * 1.7e6, TP * 5e6)
            .unwrap()
            .with_lamb_dicke(LambDicke { mass: 171.0 * 1.660_539e-27, delta_k: 2.0 * TP / 355e-9 })
            .unwrap();
        let m = normal_modes(&trap).unwrap();
        let eta = m.eta(0).unwrap();
        assert!(eta > 0.01 && eta < 0.2, "eta = {eta}");
        let l = m.length_scale.unwrap();
        assert!(l > 1e-6 && l < 1e-5, "length = {l}");
        let tone = BeatNote::from_rabi(&m, m.com_frequency() + 1e5, 1e6, 0).unwrap();
        assert_relative_eq!(tone.eta_omega, eta * 1e6, max_relative = 1e-15);
    }
}

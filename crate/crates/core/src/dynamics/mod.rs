// SPDX-License-Identifier: Apache-2.0

//! Exact evolution of compiled cycles and of ideal target Hamiltonians.

mod defect;
mod noise;
mod propagator;
mod state;

use nalgebra::DMatrix;

use crate::compiler::PulseSequence;
use crate::error::{Error, Result};
use crate::gradient::GradientProfile;
use crate::scalar::Real;
use crate::spin_chain::{xy_hamiltonian, CouplingMatrix};

pub use defect::{cycle_defect, extract_sector_hamiltonian, ideal_cycle_unitary, spectral_norm};
pub use noise::{inject_phase_noise, noise_rms_samples, noise_sweep, NoisePoint};
pub use propagator::{EigenPropagator, Evolver};
pub use state::SpinState;

/// `J_0 T` above which evolution still runs but the trace carries a warning.
pub const AHT_BUDGET: f64 = 0.1;

/// Observables sampled along an evolution.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicsTrace<T: Real> {
    pub times: Vec<T>,
    /// Cycle index of stroboscopic samples; `None` for continuous evolution.
    pub cycles: Vec<Option<usize>>,
    /// `|<psi_0|psi(t)>|^2`.
    pub return_probability: Vec<T>,
    /// `<S_z_i>` per sample and site.
    pub sz: Vec<Vec<T>>,
    /// `<S_z_i S_z_j>` per sample.
    pub szsz: Vec<DMatrix<T>>,
    pub norm: Vec<T>,
    pub total_sz: Vec<T>,
    pub warnings: Vec<String>,
}

impl<T: Real> DynamicsTrace<T> {
    fn new() -> Self {
        Self {
            times: Vec::new(),
            cycles: Vec::new(),
            return_probability: Vec::new(),
            sz: Vec::new(),
            szsz: Vec::new(),
            norm: Vec::new(),
            total_sz: Vec::new(),
            warnings: Vec::new(),
        }
    }

    fn record(&mut self, initial: &SpinState<T>, state: &SpinState<T>, t: T, cycle: Option<usize>) -> Result<()> {
        let (sz, szsz) = state.sz_moments();
        self.times.push(t);
        self.cycles.push(cycle);
        self.return_probability.push(initial.fidelity(state)?);
        self.total_sz.push(sz.iter().fold(T::zero(), |a, &b| a + b));
        self.sz.push(sz);
        self.szsz.push(szsz);
        self.norm.push(state.norm());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_sites(&self) -> usize {
        self.sz.first().map_or(0, Vec::len)
    }

    /// Connected correlator `<S_z_i S_z_j> - <S_z_i><S_z_j>` at every sample.
    pub fn correlator(&self, i: usize, j: usize) -> Vec<T> {
        self.sz.iter().zip(&self.szsz).map(|(s, ss)| ss[(i, j)] - s[i] * s[j]).collect()
    }

    /// Largest `|a_k - b_k|` between two equally long series.
    pub fn max_deviation(a: &[T], b: &[T]) -> T {
        a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
    }
}

/// See [`DynamicsTrace::correlator`].
pub fn correlator<T: Real>(trace: &DynamicsTrace<T>, i: usize, j: usize) -> Vec<T> {
    trace.correlator(i, j)
}

fn aht_warning<T: Real>(chain: &CouplingMatrix<T>, seq: &PulseSequence<T>) -> Option<String> {
    let jt = chain.max_abs() * seq.block_duration();
    (jt.as_f64() > AHT_BUDGET)
        .then(|| format!("J_0 T = {:.4} exceeds {AHT_BUDGET}; zeroth-order averaging is unreliable", jt.as_f64()))
}

/// Stroboscopic evolution through `n_cycles` cycles, sampled at `t = n T_cyc`.
pub fn evolve_sequence<T: Real>(
    state: &SpinState<T>,
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
    n_cycles: usize,
) -> Result<DynamicsTrace<T>> {
    quench_run(state, seq, seq, n_cycles, chain, profile, n_cycles)
}

/// Runs `before` for cycles 1..=switch_cycle and `after` for the rest,
/// swapping only at a cycle boundary.
pub fn quench_run<T: Real>(
    state: &SpinState<T>,
    before: &PulseSequence<T>,
    after: &PulseSequence<T>,
    switch_cycle: usize,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
    n_cycles: usize,
) -> Result<DynamicsTrace<T>> {
    let (a, b) = (before.cycle_duration(), after.cycle_duration());
    if (a - b).abs() > T::tolerance(1e-12) * a.abs().max(b.abs()) {
        return Err(Error::MismatchedCycles(a.as_f64(), b.as_f64()));
    }
    let evolver = Evolver::new(chain, profile, state.basis().clone())?;
    let mut trace = DynamicsTrace::new();
    trace.warnings.extend(aht_warning(chain, before));
    if !std::ptr::eq(before, after) {
        trace.warnings.extend(aht_warning(chain, after));
        trace.warnings.dedup();
    }
    let mut psi = state.clone();
    trace.record(state, &psi, T::zero(), Some(0))?;
    for c in 1..=n_cycles {
        let seq = if c <= switch_cycle { before } else { after };
        evolver.apply_cycle(&mut psi, seq)?;
        trace.record(state, &psi, T::from_usize_lossy(c) * a, Some(c))?;
    }
    Ok(trace)
}

/// Continuous evolution under the XY Hamiltonian of a fixed coupling matrix.
#[derive(Debug, Clone)]
pub struct TargetEvolver<T: Real> {
    basis: crate::spin_chain::Basis,
    prop: EigenPropagator<T>,
}

impl<T: Real> TargetEvolver<T> {
    pub fn new(target: &CouplingMatrix<T>, basis: crate::spin_chain::Basis) -> Result<Self> {
        let h = xy_hamiltonian(target, &basis)?;
        Ok(Self { basis, prop: EigenPropagator::new(h) })
    }

    /// `e^{-i H t} |state>`.
    pub fn propagate(&self, state: &SpinState<T>, t: T) -> Result<SpinState<T>> {
        if state.basis() != &self.basis {
            return Err(Error::DimensionMismatch {
                what: "state vs evolver basis",
                left: state.basis().dim(),
                right: self.basis.dim(),
            });
        }
        let mut out = state.clone();
        self.prop.apply(out.amplitudes_mut(), t);
        Ok(out)
    }
}

/// Ideal-target evolution sampled at `times`.
pub fn evolve_target<T: Real>(
    state: &SpinState<T>,
    target: &CouplingMatrix<T>,
    times: &[T],
) -> Result<DynamicsTrace<T>> {
    let ev = TargetEvolver::new(target, state.basis().clone())?;
    let mut trace = DynamicsTrace::new();
    for &t in times {
        let psi = ev.propagate(state, t)?;
        trace.record(state, &psi, t, None)?;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_sequence;
    use crate::filter::FourierFilter;
    use crate::spin_chain::Basis;
    use approx::assert_relative_eq;

    fn pair(j: f64) -> CouplingMatrix<f64> {
        CouplingMatrix::from_upper_fn(2, |_, _| j)
    }

    #[test]
    fn two_ion_flip_flop_is_cos_squared() {
        let j = 0.8;
        let psi = SpinState::product(Basis::full(2).unwrap(), &[0]).unwrap();
        let times: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
        let tr = evolve_target(&psi, &pair(j), &times).unwrap();
        for (t, p) in times.iter().zip(&tr.return_probability) {
            assert_relative_eq!(*p, (j * t).cos().powi(2), epsilon = 1e-12);
        }
    }

    #[test]
    fn zero_couplings_freeze_the_state() {
        let psi = SpinState::product(Basis::full(3).unwrap(), &[1]).unwrap();
        let tr = evolve_target(&psi, &CouplingMatrix::zeros(3), &[0.0, 1.0, 5.0]).unwrap();
        assert!(tr.return_probability.iter().all(|&p: &f64| (p - 1.0).abs() < 1e-15));
    }

    #[test]
    fn two_pulse_scheme_returns_on_even_phase_and_follows_on_odd() {
        let j = 1.0;
        let t_block = 0.05;
        let psi = SpinState::product(Basis::full(2).unwrap(), &[0]).unwrap();
        let f = FourierFilter::constant(1.0).unwrap();
        let w0 = 200.0;

        let even = GradientProfile::from_multiples(&[1, 3], w0).unwrap();
        let seq = compile_sequence(&f, &even, t_block).unwrap();
        let tr = evolve_sequence(&psi, &seq, &pair(j), &even, 30).unwrap();
        for p in &tr.return_probability {
            assert_relative_eq!(*p, 1.0, epsilon = 1e-10);
        }

        let odd = GradientProfile::from_multiples(&[1, 2], w0).unwrap();
        let seq = compile_sequence(&f, &odd, t_block).unwrap();
        let tr = evolve_sequence(&psi, &seq, &pair(j), &odd, 30).unwrap();
        for (t, p) in tr.times.iter().zip(&tr.return_probability) {
            assert_relative_eq!(*p, (j * t).cos().powi(2), epsilon = 1e-10);
        }
    }

    #[test]
    fn product_state_has_no_connected_correlations() {
        let psi = SpinState::product(Basis::full(4).unwrap(), &[0, 2]).unwrap();
        let tr = evolve_target(&psi, &CouplingMatrix::zeros(4), &[0.0]).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(tr.correlator(i, j)[0], 0.0);
            }
        }
    }

    #[test]
    fn mismatched_cycles_rejected() {
        let p = GradientProfile::from_multiples(&[1, 2], 200.0).unwrap();
        let f = FourierFilter::constant(1.0).unwrap();
        let a = compile_sequence(&f, &p, 0.05).unwrap();
        let b = compile_sequence(&f, &p, 0.06).unwrap();
        let psi = SpinState::product(Basis::full(2).unwrap(), &[0]).unwrap();
        assert!(matches!(quench_run(&psi, &a, &b, 1, &pair(1.0), &p, 2), Err(Error::MismatchedCycles(..))));
    }

    #[test]
    fn large_block_warns() {
        let p = GradientProfile::from_multiples(&[1, 2], 200.0).unwrap();
        let seq = compile_sequence(&FourierFilter::constant(1.0).unwrap(), &p, 0.5).unwrap();
        let psi = SpinState::product(Basis::full(2).unwrap(), &[0]).unwrap();
        let tr = evolve_sequence(&psi, &seq, &pair(1.0), &p, 1).unwrap();
        assert_eq!(tr.warnings.len(), 1);
        let zero = evolve_sequence(&psi, &seq, &pair(1.0), &p, 0).unwrap();
        assert_eq!(zero.len(), 1);
        assert_eq!(zero.return_probability[0], 1.0);
    }
}

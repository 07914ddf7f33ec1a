// SPDX-License-Identifier: Apache-2.0

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};

use super::state::SpinState;
use crate::compiler::{PulseSequence, Segment, Sign};
use crate::error::{Error, Result};
use crate::gradient::GradientProfile;
use crate::scalar::{cis_neg, Real};
use crate::spin_chain::{field_diagonal, xy_hamiltonian, Basis, CouplingMatrix};

/// `e^{-i H t}` for a fixed real symmetric `H`, from one eigendecomposition.
#[derive(Debug, Clone)]
pub struct EigenPropagator<T: Real> {
    vectors: DMatrix<T>,
    values: DVector<T>,
}

impl<T: Real> EigenPropagator<T> {
    pub fn new(h: DMatrix<T>) -> Self {
        let eig = SymmetricEigen::new(h);
        Self { vectors: eig.eigenvectors, values: eig.eigenvalues }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn eigenvalues(&self) -> &DVector<T> {
        &self.values
    }

    /// Applies `e^{-i H t}` in place; negative `t` runs the evolution backwards.
    pub fn apply(&self, amps: &mut DVector<Complex<T>>, t: T) {
        let re = amps.map(|z| z.re);
        let im = amps.map(|z| z.im);
        let yr = self.vectors.tr_mul(&re);
        let yi = self.vectors.tr_mul(&im);
        let mut zr = DVector::zeros(self.dim());
        let mut zi = DVector::zeros(self.dim());
        for k in 0..self.dim() {
            let p = cis_neg(self.values[k] * t);
            zr[k] = p.re * yr[k] - p.im * yi[k];
            zi[k] = p.re * yi[k] + p.im * yr[k];
        }
        let outr = &self.vectors * zr;
        let outi = &self.vectors * zi;
        for k in 0..amps.len() {
            amps[k] = Complex::new(outr[k], outi[k]);
        }
    }

    /// Dense `e^{-i H t}`.
    pub fn matrix(&self, t: T) -> DMatrix<Complex<T>> {
        let v = self.vectors.map(|x| Complex::new(x, T::zero()));
        let d = DMatrix::from_diagonal(&self.values.map(|e| cis_neg(e * t)));
        &v * d * v.adjoint()
    }
}

/// Exact piecewise evolution under `+-H_int` and the gradient field, with
/// the interaction eigendecomposition built once.
#[derive(Debug, Clone)]
pub struct Evolver<T: Real> {
    basis: Basis,
    interaction: EigenPropagator<T>,
    field: DVector<T>,
}

impl<T: Real> Evolver<T> {
    pub fn new(chain: &CouplingMatrix<T>, profile: &GradientProfile<T>, basis: Basis) -> Result<Self> {
        if profile.n() != chain.n() {
            return Err(Error::DimensionMismatch {
                what: "gradient profile vs chain",
                left: profile.n(),
                right: chain.n(),
            });
        }
        let h = xy_hamiltonian(chain, &basis)?;
        let field = field_diagonal(&basis, profile.omegas())?;
        Ok(Self { basis, interaction: EigenPropagator::new(h), field })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    /// Diagonal of the gradient Hamiltonian.
    pub fn field(&self) -> &DVector<T> {
        &self.field
    }

    pub fn interaction(&self) -> &EigenPropagator<T> {
        &self.interaction
    }

    fn check(&self, state: &SpinState<T>) -> Result<()> {
        if state.basis() != &self.basis {
            return Err(Error::DimensionMismatch {
                what: "state vs evolver basis",
                left: state.basis().dim(),
                right: self.basis.dim(),
            });
        }
        Ok(())
    }

    pub fn apply_gradient(&self, amps: &mut DVector<Complex<T>>, duration: T) {
        for (z, &e) in amps.iter_mut().zip(self.field.iter()) {
            *z *= cis_neg(e * duration);
        }
    }

    pub fn apply_interaction(&self, amps: &mut DVector<Complex<T>>, sign: Sign, duration: T) {
        self.interaction.apply(amps, sign.value::<T>() * duration);
    }

    pub fn apply_segment(&self, amps: &mut DVector<Complex<T>>, segment: &Segment<T>) {
        match *segment {
            Segment::Gradient { duration } => self.apply_gradient(amps, duration),
            Segment::Interaction { sign, duration } => self.apply_interaction(amps, sign, duration),
        }
    }

    /// Advances `state` through one full cycle of `seq`.
    pub fn apply_cycle(&self, state: &mut SpinState<T>, seq: &PulseSequence<T>) -> Result<()> {
        self.check(state)?;
        let amps = state.amplitudes_mut();
        for s in seq.segments() {
            self.apply_segment(amps, s);
        }
        Ok(())
    }

    /// Dense one-cycle propagator.
    pub fn cycle_unitary(&self, seq: &PulseSequence<T>) -> DMatrix<Complex<T>> {
        let dim = self.basis.dim();
        let mut u = DMatrix::from_element(dim, dim, Complex::new(T::zero(), T::zero()));
        for c in 0..dim {
            let mut col = DVector::from_element(dim, Complex::new(T::zero(), T::zero()));
            col[c] = Complex::new(T::one(), T::zero());
            for s in seq.segments() {
                self.apply_segment(&mut col, s);
            }
            u.set_column(c, &col);
        }
        u
    }
}

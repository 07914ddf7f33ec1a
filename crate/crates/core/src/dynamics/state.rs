// SPDX-License-Identifier: Apache-2.0

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin_chain::{is_up, Basis};

/// Normalized amplitude vector over a computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState<T: Real> {
    basis: Basis,
    amps: DVector<Complex<T>>,
}

impl<T: Real> SpinState<T> {
    /// The basis state with bit pattern `bits` (bit i set means ion i up).
    pub fn from_bits(basis: Basis, bits: u64) -> Result<Self> {
        let idx = basis
            .index_of(bits)
            .ok_or_else(|| Error::InvalidChain(format!("bit pattern {bits:#b} is not in the basis")))?;
        let mut amps = DVector::from_element(basis.dim(), Complex::new(T::zero(), T::zero()));
        amps[idx] = Complex::new(T::one(), T::zero());
        Ok(Self { basis, amps })
    }

    /// Ions listed in `up_sites` (0-based) up, the rest down.
    pub fn product(basis: Basis, up_sites: &[usize]) -> Result<Self> {
        let n = basis.n_spins();
        let mut bits = 0u64;
        for &s in up_sites {
            if s >= n {
                return Err(Error::InvalidChain(format!("site {s} outside a {n}-ion chain")));
            }
            bits |= 1 << s;
        }
        Self::from_bits(basis, bits)
    }

    /// Normalizes `amps`; the zero vector is rejected.
    pub fn from_amplitudes(basis: Basis, amps: DVector<Complex<T>>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::DimensionMismatch { what: "amplitudes vs basis", left: amps.len(), right: basis.dim() });
        }
        let norm = norm(&amps);
        if !(norm > T::zero()) {
            return Err(Error::Numeric("state vector has zero norm".into()));
        }
        Ok(Self { basis, amps: amps.unscale(norm) })
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn amplitudes(&self) -> &DVector<Complex<T>> {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut DVector<Complex<T>> {
        &mut self.amps
    }

    pub fn norm(&self) -> T {
        norm(&self.amps)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        if self.basis != other.basis {
            return Err(Error::Numeric("states live in different bases".into()));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &Self) -> Result<T> {
        let z = self.inner(other)?;
        Ok(z.re * z.re + z.im * z.im)
    }

    /// Basis-state probabilities.
    pub fn probabilities(&self) -> DVector<T> {
        self.amps.map(|z| z.re * z.re + z.im * z.im)
    }

    /// `<S_z_i>` for every site and `<S_z_i S_z_j>` for every pair.
    pub fn sz_moments(&self) -> (Vec<T>, DMatrix<T>) {
        let n = self.basis.n_spins();
        let half = T::lit(0.5);
        let mut sz = vec![T::zero(); n];
        let mut szsz = DMatrix::zeros(n, n);
        let mut s = vec![T::zero(); n];
        for (a, p) in self.probabilities().iter().enumerate() {
            if *p == T::zero() {
                continue;
            }
            let bits = self.basis.state(a);
            for (i, v) in s.iter_mut().enumerate() {
                *v = if is_up(bits, i) { half } else { -half };
                sz[i] += *p * *v;
            }
            for i in 0..n {
                for j in 0..n {
                    szsz[(i, j)] += *p * s[i] * s[j];
                }
            }
        }
        (sz, szsz)
    }

    /// The same state expressed in another basis of the same chain; fails if
    /// it has weight outside the target basis.
    pub fn to_basis(&self, target: &Basis) -> Result<Self> {
        if target.n_spins() != self.basis.n_spins() {
            return Err(Error::DimensionMismatch {
                what: "basis spins",
                left: target.n_spins(),
                right: self.basis.n_spins(),
            });
        }
        let mut amps = DVector::from_element(target.dim(), Complex::new(T::zero(), T::zero()));
        for (a, z) in self.amps.iter().enumerate() {
            let bits = self.basis.state(a);
            match target.index_of(bits) {
                Some(b) => amps[b] = *z,
                None if z.re == T::zero() && z.im == T::zero() => {}
                None => return Err(Error::Numeric("state has weight outside the target basis".into())),
            }
        }
        Ok(Self { basis: target.clone(), amps })
    }
}

pub(crate) fn norm<T: Real>(v: &DVector<Complex<T>>) -> T {
    v.iter().fold(T::zero(), |acc, z| acc + z.re * z.re + z.im * z.im).sqrt()
}

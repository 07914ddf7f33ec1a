// SPDX-License-Identifier: Apache-2.0

use nalgebra::{Complex, DMatrix, DVector};

use super::basis::{is_up, Basis};
use super::CouplingMatrix;
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest chain for which explicit per-site operator matrices are built.
pub const MAX_OPERATOR_SPINS: usize = 8;

/// Explicit single-site spin operators on the full 2^n space.
///
/// Site `i` acts on bit `i` of the basis index. Dense and memory hungry; the
/// simulator itself works from diagonals and bit flips, and this set exists
/// for cross-checks and small exploratory calculations.
#[derive(Debug, Clone)]
pub struct SpinOperatorSet<T: Real> {
    n: usize,
    pub sx: Vec<DMatrix<Complex<T>>>,
    pub sy: Vec<DMatrix<Complex<T>>>,
    pub sz: Vec<DMatrix<Complex<T>>>,
    pub sp: Vec<DMatrix<Complex<T>>>,
    pub sm: Vec<DMatrix<Complex<T>>>,
}

impl<T: Real> SpinOperatorSet<T> {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidChain("operator set needs at least one spin".into()));
        }
        if n > MAX_OPERATOR_SPINS {
            return Err(Error::TooLarge { dim: 1 << n, max: 1 << MAX_OPERATOR_SPINS });
        }
        let zero = Complex::new(T::zero(), T::zero());
        let one = Complex::new(T::one(), T::zero());
        let half = T::lit(0.5);
        let put = |op: [[Complex<T>; 2]; 2], site: usize| {
            let dim = 1usize << n;
            let mut m = DMatrix::from_element(dim, dim, zero);
            let mask = 1usize << site;
            for col in 0..dim {
                let cb = (col >> site) & 1;
                for (rb, op_row) in op.iter().enumerate() {
                    let v = op_row[cb];
                    if v != zero {
                        let row = (col & !mask) | (rb << site);
                        m[(row, col)] = v;
                    }
                }
            }
            m
        };
        // local basis order (down, up); S+ maps down to up
        let sz = [[Complex::new(-half, T::zero()), zero], [zero, Complex::new(half, T::zero())]];
        let sp = [[zero, zero], [one, zero]];
        let sm = [[zero, one], [zero, zero]];
        let sx = [[zero, Complex::new(half, T::zero())], [Complex::new(half, T::zero()), zero]];
        let sy = [[zero, Complex::new(T::zero(), half)], [Complex::new(T::zero(), -half), zero]];
        Ok(Self {
            n,
            sx: (0..n).map(|i| put(sx, i)).collect(),
            sy: (0..n).map(|i| put(sy, i)).collect(),
            sz: (0..n).map(|i| put(sz, i)).collect(),
            sp: (0..n).map(|i| put(sp, i)).collect(),
            sm: (0..n).map(|i| put(sm, i)).collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn total_sz(&self) -> DMatrix<Complex<T>> {
        let mut acc = DMatrix::zeros(self.dim(), self.dim());
        for s in &self.sz {
            acc += s;
        }
        acc
    }

    /// The XY Hamiltonian assembled from operator products.
    pub fn xy_hamiltonian(&self, couplings: &CouplingMatrix<T>) -> DMatrix<Complex<T>> {
        let mut h = DMatrix::zeros(self.dim(), self.dim());
        for (i, j, v) in couplings.bonds() {
            let term = &self.sp[i] * &self.sm[j] + &self.sm[i] * &self.sp[j];
            h += term * Complex::new(v, T::zero());
        }
        h
    }
}

fn sz_value<T: Real>(bits: u64, site: usize) -> T {
    if is_up(bits, site) {
        T::lit(0.5)
    } else {
        T::lit(-0.5)
    }
}

/// Diagonal of `S_z` for one site.
pub fn sz_diagonal<T: Real>(basis: &Basis, site: usize) -> DVector<T> {
    DVector::from_fn(basis.dim(), |a, _| sz_value(basis.state(a), site))
}

pub fn total_sz_diagonal<T: Real>(basis: &Basis) -> DVector<T> {
    let n = basis.n_spins();
    DVector::from_fn(basis.dim(), |a, _| {
        let s = basis.state(a);
        (0..n).fold(T::zero(), |acc, i| acc + sz_value::<T>(s, i))
    })
}

/// Diagonal of `sum_i omegas[i] S_z_i`.
pub fn field_diagonal<T: Real>(basis: &Basis, omegas: &[T]) -> Result<DVector<T>> {
    let n = basis.n_spins();
    if omegas.len() != n {
        return Err(Error::DimensionMismatch { what: "field values vs spins", left: omegas.len(), right: n });
    }
    Ok(DVector::from_fn(basis.dim(), |a, _| {
        let s = basis.state(a);
        omegas.iter().enumerate().fold(T::zero(), |acc, (i, &w)| acc + w * sz_value::<T>(s, i))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::max_modulus;

    fn comm(a: &DMatrix<Complex<f64>>, b: &DMatrix<Complex<f64>>) -> f64 {
        max_modulus(&(a * b - b * a))
    }

    #[test]
    fn site_operators_satisfy_spin_algebra() {
        let ops = SpinOperatorSet::<f64>::new(3).unwrap();
        let id = DMatrix::<Complex<f64>>::identity(8, 8);
        let i = Complex::new(0.0, 1.0);
        for s in 0..3 {
            let anti = &ops.sp[s] * &ops.sm[s] + &ops.sm[s] * &ops.sp[s];
            assert!(max_modulus(&(anti - &id)) < 1e-15);
            let c = &ops.sx[s] * &ops.sy[s] - &ops.sy[s] * &ops.sx[s];
            assert!(max_modulus(&(c - &ops.sz[s] * i)) < 1e-15);
            let sp = &ops.sx[s] + &ops.sy[s] * i;
            assert!(max_modulus(&(sp - &ops.sp[s])) < 1e-15);
            for t in 0..3 {
                assert!(comm(&ops.sz[s], &ops.sz[t]) < 1e-15);
                if s != t {
                    assert!(comm(&ops.sp[s], &ops.sm[t]) < 1e-15);
                }
            }
        }
    }

    #[test]
    fn diagonals_agree_with_operators() {
        let ops = SpinOperatorSet::<f64>::new(3).unwrap();
        let basis = Basis::full(3).unwrap();
        let omegas = [1.0, 2.5, -0.75];
        let field = field_diagonal(&basis, &omegas).unwrap();
        let total = total_sz_diagonal::<f64>(&basis);
        let tsz = ops.total_sz();
        for a in 0..8 {
            let mut f = 0.0;
            for (s, w) in omegas.iter().enumerate() {
                assert_eq!(ops.sz[s][(a, a)].re, sz_diagonal::<f64>(&basis, s)[a]);
                f += w * ops.sz[s][(a, a)].re;
            }
            assert!((f - field[a]).abs() < 1e-15);
            assert_eq!(tsz[(a, a)].re, total[a]);
        }
    }

    #[test]
    fn operator_set_size_limit() {
        assert!(SpinOperatorSet::<f64>::new(MAX_OPERATOR_SPINS + 1).is_err());
    }
}

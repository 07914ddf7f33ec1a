// SPDX-License-Identifier: Apache-2.0

//! The native chain: power-law couplings and the XY flip-flop Hamiltonian.
//!
//! Spin operators are S = sigma/2 with S+ = |up><down|, so a single flip-flop
//! bond J between two ions has sector eigenvalues +-J and the excitation
//! oscillates as cos^2(J t).

mod basis;
mod operators;

use core::ops::Add;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::scalar::Real;

pub use basis::{is_up, Basis, MAX_DENSE_DIM, MAX_DENSE_SPINS};
pub use operators::{field_diagonal, sz_diagonal, total_sz_diagonal, SpinOperatorSet, MAX_OPERATOR_SPINS};

/// Native chain parameters: `J_ij = j0 / |i-j|^alpha`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainSpec<T> {
    n_ions: usize,
    j0: T,
    alpha: T,
}

impl<T: Real> ChainSpec<T> {
    pub fn new(n_ions: usize, j0: T, alpha: T) -> Result<Self> {
        if n_ions < 2 {
            return Err(Error::InvalidChain(format!("n_ions must be at least 2, got {n_ions}")));
        }
        if !(j0 > T::zero()) || !j0.is_finite() {
            return Err(Error::InvalidChain(format!("j0 must be positive, got {}", j0.as_f64())));
        }
        if !(alpha >= T::zero() && alpha < T::lit(3.0)) {
            return Err(Error::InvalidChain(format!("alpha must lie in [0, 3), got {}", alpha.as_f64())));
        }
        Ok(Self { n_ions, j0, alpha })
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn j0(&self) -> T {
        self.j0
    }

    pub fn alpha(&self) -> T {
        self.alpha
    }

    /// Native coupling at chain distance `d`.
    pub fn coupling_at(&self, d: usize) -> T {
        self.j0 / T::from_usize_lossy(d).powf(self.alpha)
    }
}

/// Symmetric real coupling matrix with zero diagonal, in rad/s.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix<T: Real> {
    values: DMatrix<T>,
}

impl<T: Real> CouplingMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        Self { values: DMatrix::zeros(n, n) }
    }

    /// Builds the matrix from `f(i, j)` evaluated on the upper triangle (0-based, i < j).
    pub fn from_upper_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut values = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Self { values }
    }

    /// Accepts a dense matrix that is symmetric with zero diagonal up to
    /// rounding; the result is exactly symmetric.
    pub fn from_matrix(values: DMatrix<T>) -> Result<Self> {
        let (r, c) = values.shape();
        if r != c {
            return Err(Error::DimensionMismatch { what: "coupling matrix rows/cols", left: r, right: c });
        }
        let scale = values.amax().max(T::one());
        let tol = T::tolerance(1e-12) * scale;
        for i in 0..r {
            if values[(i, i)].abs() > tol {
                return Err(Error::InvalidChain(format!("coupling diagonal ({i},{i}) is nonzero")));
            }
            for j in i + 1..r {
                if (values[(i, j)] - values[(j, i)]).abs() > tol {
                    return Err(Error::InvalidChain(format!("coupling matrix not symmetric at ({i},{j})")));
                }
            }
        }
        Ok(Self::from_upper_fn(r, |i, j| (values[(i, j)] + values[(j, i)]) * T::lit(0.5)))
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.values[(i, j)]
    }

    pub fn values(&self) -> &DMatrix<T> {
        &self.values
    }

    /// Upper-triangle bonds `(i, j, J_ij)` with i < j, row-major.
    pub fn bonds(&self) -> impl Iterator<Item = (usize, usize, T)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.values[(i, j)])))
    }

    pub fn max_abs(&self) -> T {
        self.values.amax()
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { values: &self.values * s }
    }

    /// `J / max|J|`; the zero matrix is returned unchanged.
    pub fn normalized(&self) -> Self {
        let m = self.max_abs();
        if m == T::zero() {
            self.clone()
        } else {
            self.scaled(T::one() / m)
        }
    }

    /// Relabels ions: entry (perm[i], perm[j]) of the result is entry (i, j) of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch { what: "permutation length", left: perm.len(), right: n });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidChain("permutation is not a bijection".into()));
            }
        }
        let mut values = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                values[(perm[i], perm[j])] = self.values[(i, j)];
            }
        }
        Ok(Self { values })
    }
}

impl<T: Real> Add for &CouplingMatrix<T> {
    type Output = CouplingMatrix<T>;

    fn add(self, rhs: Self) -> CouplingMatrix<T> {
        assert_eq!(self.n(), rhs.n(), "coupling matrices of different size");
        CouplingMatrix { values: &self.values + &rhs.values }
    }
}

pub fn power_law_couplings<T: Real>(spec: &ChainSpec<T>) -> CouplingMatrix<T> {
    CouplingMatrix::from_upper_fn(spec.n_ions(), |i, j| spec.coupling_at(j - i))
}

/// `sum_{i<j} J_ij (S+_i S-_j + S-_i S+_j)` on `basis`.
///
/// The operator is real symmetric in the computational basis; each flip-flop
/// term swaps the bits of ions i and j with amplitude J_ij.
pub fn xy_hamiltonian<T: Real>(couplings: &CouplingMatrix<T>, basis: &Basis) -> Result<DMatrix<T>> {
    let n = couplings.n();
    if basis.n_spins() != n {
        return Err(Error::DimensionMismatch { what: "basis spins vs couplings", left: basis.n_spins(), right: n });
    }
    let dim = basis.dim();
    let bonds: Vec<_> = couplings.bonds().filter(|&(_, _, v)| v != T::zero()).collect();
    let mut h = DMatrix::zeros(dim, dim);
    for a in 0..dim {
        let s = basis.state(a);
        for &(i, j, v) in &bonds {
            if is_up(s, i) != is_up(s, j) {
                let flipped = s ^ ((1u64 << i) | (1u64 << j));
                let b = basis.index_of(flipped).expect("flip-flop preserves the excitation sector");
                h[(b, a)] += v;
            }
        }
    }
    Ok(h)
}

// SPDX-License-Identifier: Apache-2.0

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::scalar::Real;

const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;
const HBAR: f64 = 1.054_571_817e-34;

/// Ion mass and the effective wave-vector difference of the Raman beams,
/// for converting Rabi frequencies into sideband strengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambDicke<T> {
    /// kg
    pub mass: T,
    /// 1/m
    pub delta_k: T,
}

/// Linear Paul-trap chain. Frequencies in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapConfig<T> {
    n_ions: usize,
    omega_axial: T,
    omega_x: T,
    lamb_dicke: Option<LambDicke<T>>,
}

impl<T: Real> TrapConfig<T> {
    pub fn new(n_ions: usize, omega_axial: T, omega_x: T) -> Result<Self> {
        if n_ions == 0 {
            return Err(Error::InvalidTrap("n_ions must be positive".into()));
        }
        if !(omega_axial > T::zero()) || !(omega_x > T::zero()) {
            return Err(Error::InvalidTrap("trap frequencies must be positive".into()));
        }
        Ok(Self { n_ions, omega_axial, omega_x, lamb_dicke: None })
    }

    pub fn with_lamb_dicke(mut self, ld: LambDicke<T>) -> Result<Self> {
        if !(ld.mass > T::zero()) || !(ld.delta_k > T::zero()) {
            return Err(Error::InvalidTrap("mass and delta_k must be positive".into()));
        }
        self.lamb_dicke = Some(ld);
        Ok(self)
    }

    pub fn n_ions(&self) -> usize {
        self.n_ions
    }

    pub fn omega_axial(&self) -> T {
        self.omega_axial
    }

    pub fn omega_x(&self) -> T {
        self.omega_x
    }

    pub fn lamb_dicke(&self) -> Option<LambDicke<T>> {
        self.lamb_dicke
    }

    /// Coulomb length `(e^2 / (4 pi eps0 M omega_ax^2))^(1/3)` in metres.
    pub fn length_scale(&self) -> Option<T> {
        self.lamb_dicke.map(|ld| {
            let k = T::lit(ELEMENTARY_CHARGE * ELEMENTARY_CHARGE / (4.0 * std::f64::consts::PI * VACUUM_PERMITTIVITY));
            (k / (ld.mass * self.omega_axial * self.omega_axial)).powf(T::lit(1.0 / 3.0))
        })
    }
}

/// Transverse normal modes of the chain.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalModes<T: Real> {
    /// Equilibrium positions in units of the Coulomb length, ascending.
    pub positions: Vec<T>,
    /// Mode frequencies, descending; index 0 is the COM mode, 1 the tilt mode.
    pub frequencies: Vec<T>,
    /// Column `m` holds `b_{i,m}`.
    pub vectors: DMatrix<T>,
    pub length_scale: Option<T>,
    lamb_dicke: Option<LambDicke<T>>,
}

impl<T: Real> NormalModes<T> {
    pub fn n_ions(&self) -> usize {
        self.positions.len()
    }

    pub fn com_frequency(&self) -> T {
        self.frequencies[0]
    }

    pub fn tilt_frequency(&self) -> Option<T> {
        self.frequencies.get(1).copied()
    }

    /// Equilibrium positions in metres, if the ion mass is known.
    pub fn positions_m(&self) -> Option<Vec<T>> {
        self.length_scale.map(|l| self.positions.iter().map(|&u| u * l).collect())
    }

    /// Lamb-Dicke factor `Delta k sqrt(hbar / (2 M omega_m))` of mode `m`.
    pub fn eta(&self, m: usize) -> Option<T> {
        self.lamb_dicke.map(|ld| ld.delta_k * (T::lit(HBAR) / (T::lit(2.0) * ld.mass * self.frequencies[m])).sqrt())
    }

    /// Only the listed modes, in the given order.
    pub fn restricted(&self, modes: &[usize]) -> Result<Self> {
        let n = self.frequencies.len();
        if let Some(&bad) = modes.iter().find(|&&m| m >= n) {
            return Err(Error::InvalidTrap(format!("mode {bad} does not exist in a {n}-ion chain")));
        }
        let vectors = DMatrix::from_fn(self.n_ions(), modes.len(), |i, k| self.vectors[(i, modes[k])]);
        Ok(Self {
            positions: self.positions.clone(),
            frequencies: modes.iter().map(|&m| self.frequencies[m]).collect(),
            vectors,
            length_scale: self.length_scale,
            lamb_dicke: self.lamb_dicke,
        })
    }
}

/// Force on each ion in dimensionless units: `u_i - sum_{j != i} sign(u_i - u_j) / (u_i - u_j)^2`.
fn residual<T: Real>(u: &DVector<T>) -> DVector<T> {
    let n = u.len();
    DVector::from_fn(n, |i, _| {
        let mut f = u[i];
        for j in 0..n {
            if j != i {
                let d = u[i] - u[j];
                f -= d.signum() / (d * d);
            }
        }
        f
    })
}

fn jacobian<T: Real>(u: &DVector<T>) -> DMatrix<T> {
    let n = u.len();
    let mut jac = DMatrix::zeros(n, n);
    for i in 0..n {
        jac[(i, i)] = T::one();
        for j in 0..n {
            if j != i {
                let c = T::lit(2.0) / (u[i] - u[j]).abs().powi(3);
                jac[(i, i)] += c;
                jac[(i, j)] = -c;
            }
        }
    }
    jac
}

/// Dimensionless equilibrium positions by damped Newton iteration.
pub fn equilibrium_positions<T: Real>(n: usize) -> Result<Vec<T>> {
    if n == 1 {
        return Ok(vec![T::zero()]);
    }
    let spacing = T::lit(2.0) / T::from_usize_lossy(n).powf(T::lit(0.56));
    let centre = T::from_usize_lossy(n - 1) * T::lit(0.5);
    let mut u = DVector::from_fn(n, |i, _| (T::from_usize_lossy(i) - centre) * spacing);
    let tol = T::tolerance(1e-13);
    let mut r = residual(&u);
    for _ in 0..200 {
        if r.amax() < tol {
            let mut out: Vec<T> = u.iter().copied().collect();
            // exact reflection symmetry of the solution
            for i in 0..n / 2 {
                let m = (out[n - 1 - i] - out[i]) * T::lit(0.5);
                out[i] = -m;
                out[n - 1 - i] = m;
            }
            if n % 2 == 1 {
                out[n / 2] = T::zero();
            }
            return Ok(out);
        }
        let step = jacobian(&u)
            .lu()
            .solve(&r)
            .ok_or_else(|| Error::Numeric("singular Jacobian in equilibrium solve".into()))?;
        let norm0 = r.norm();
        let mut lambda = T::one();
        loop {
            let trial = &u - &step * lambda;
            let ordered = trial.as_slice().windows(2).all(|w| w[1] > w[0]);
            if ordered {
                let rt = residual(&trial);
                if rt.norm() < norm0 || lambda < T::lit(1e-6) {
                    u = trial;
                    r = rt;
                    break;
                }
            }
            lambda *= T::lit(0.5);
            if lambda < T::lit(1e-12) {
                return Err(Error::Numeric("equilibrium line search failed".into()));
            }
        }
    }
    Err(Error::Numeric(format!("equilibrium solve did not converge (residual {})", r.amax().as_f64())))
}

/// Transverse modes from the linear-chain Hessian
/// `K_ii = omega_x^2 - omega_ax^2 sum_j 1/|u_i-u_j|^3`, `K_ij = omega_ax^2 / |u_i-u_j|^3`.
pub fn normal_modes<T: Real>(trap: &TrapConfig<T>) -> Result<NormalModes<T>> {
    let n = trap.n_ions();
    let u = equilibrium_positions::<T>(n)?;
    let wz2 = trap.omega_axial() * trap.omega_axial();
    let wx2 = trap.omega_x() * trap.omega_x();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = wx2;
        for j in 0..n {
            if j != i {
                let c = wz2 / (u[i] - u[j]).abs().powi(3);
                k[(i, i)] -= c;
                k[(i, j)] = c;
            }
        }
    }
    let eig = SymmetricEigen::new(k);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).expect("finite eigenvalues"));
    let mut frequencies = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (m, &src) in order.iter().enumerate() {
        let w2 = eig.eigenvalues[src];
        if !(w2 > T::zero()) {
            return Err(Error::Unstable { mode: m, omega_sq: w2.as_f64() });
        }
        frequencies.push(w2.sqrt());
        let mut col = eig.eigenvectors.column(src).clone_owned();
        // sign convention: largest component positive, first on ties
        let mut pivot = 0;
        for i in 1..n {
            if col[i].abs() > col[pivot].abs() * (T::one() + T::tolerance(1e-9)) {
                pivot = i;
            }
        }
        if col[pivot] < T::zero() {
            col.neg_mut();
        }
        vectors.set_column(m, &col);
    }
    Ok(NormalModes {
        positions: u,
        frequencies,
        vectors,
        length_scale: trap.length_scale(),
        lamb_dicke: trap.lamb_dicke(),
    })
}

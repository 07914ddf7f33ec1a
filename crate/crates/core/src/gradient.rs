// SPDX-License-Identifier: Apache-2.0

//! Semi-linear gradient profiles and the phase tags they imprint on bonds.
//!
//! Phases are kept as exact integer multiples of pi: with `omega0 * tau_tot = pi`
//! and every ion frequency an integer multiple of `omega0`, bond (i, j)
//! accumulates `(omega_j - omega_i) tau_tot = k pi`.

use crate::error::{Error, Result};
use crate::lattice::LatticeTarget;
use crate::scalar::Real;

/// Smallest `omega0 / J0` for which gradient pulses count as instantaneous.
pub const MIN_GRADIENT_RATIO: f64 = 100.0;

#[derive(Debug, Clone, PartialEq)]
pub struct GradientProfile<T> {
    omegas: Vec<T>,
    omega0: T,
    tau_tot: T,
}

impl<T: Real> GradientProfile<T> {
    /// Requires `omega0 * tau_tot = pi` and non-decreasing frequencies.
    pub fn new(omegas: Vec<T>, omega0: T, tau_tot: T) -> Result<Self> {
        if omegas.len() < 2 {
            return Err(Error::InvalidProfile("profile needs at least two ions".into()));
        }
        if !(omega0 > T::zero()) || !(tau_tot > T::zero()) {
            return Err(Error::InvalidProfile("omega0 and tau_tot must be positive".into()));
        }
        let quantum = omega0 * tau_tot;
        if (quantum - T::pi()).abs() > T::tolerance(1e-12) * T::pi() {
            return Err(Error::InvalidProfile(format!("omega0 * tau_tot must equal pi, got {}", quantum.as_f64())));
        }
        if omegas.iter().any(|w| !w.is_finite()) {
            return Err(Error::InvalidProfile("non-finite gradient frequency".into()));
        }
        if omegas.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidProfile("gradient frequencies must not decrease along the chain".into()));
        }
        Ok(Self { omegas, omega0, tau_tot })
    }

    /// Profile `omega_i = multiples[i] * omega0` with `tau_tot = pi / omega0`.
    pub fn from_multiples(multiples: &[i64], omega0: T) -> Result<Self> {
        let omegas = multiples.iter().map(|&k| T::from_i64_lossy(k) * omega0).collect();
        Self::new(omegas, omega0, T::pi() / omega0)
    }

    pub fn n(&self) -> usize {
        self.omegas.len()
    }

    pub fn omegas(&self) -> &[T] {
        &self.omegas
    }

    pub fn omega0(&self) -> T {
        self.omega0
    }

    pub fn tau_tot(&self) -> T {
        self.tau_tot
    }

    /// Frequency difference `omega_j - omega_i`.
    pub fn omega_ij(&self, i: usize, j: usize) -> T {
        self.omegas[j] - self.omegas[i]
    }

    pub fn is_strictly_increasing(&self) -> bool {
        self.omegas.windows(2).all(|w| w[1] > w[0])
    }

    /// Whether the gradient is fast enough relative to the native coupling.
    pub fn is_fast_relative_to(&self, j0: T) -> bool {
        self.omega0 >= T::lit(MIN_GRADIENT_RATIO) * j0
    }
}

/// Semi-linear profile: constant slope `omega0` with a 3*omega0 (odd m) or
/// 2*omega0 (even m) step between ions km and km+1, and `omega_1 = omega0`.
pub fn semi_linear_gradient<T: Real>(
    n: usize,
    target: &LatticeTarget<T>,
    omega0: T,
    tau_tot: T,
) -> Result<GradientProfile<T>> {
    if n != target.n_sites() {
        return Err(Error::DimensionMismatch { what: "ions vs lattice rows*cols", left: n, right: target.n_sites() });
    }
    GradientProfile::new(
        semi_linear_multiples(target.m_rows(), target.m_cols())
            .into_iter()
            .map(|k| T::from_i64_lossy(k) * omega0)
            .collect(),
        omega0,
        tau_tot,
    )
}

/// `omega_i / omega0` of the semi-linear profile.
pub fn semi_linear_multiples(m_rows: usize, m_cols: usize) -> Vec<i64> {
    let jump = if m_cols % 2 == 1 { 3 } else { 2 };
    let mut out = Vec::with_capacity(m_rows * m_cols);
    let mut w = 1i64;
    for i in 0..m_rows * m_cols {
        if i > 0 {
            w += if i % m_cols == 0 { jump } else { 1 };
        }
        out.push(w);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

/// Bond phases `phi_ij / pi` for all i < j.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PhaseTagTable {
    n: usize,
    multiples: Vec<i64>,
}

impl PhaseTagTable {
    fn idx(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        assert!(i != j && j < self.n, "bond ({i},{j}) outside a {}-ion table", self.n);
        i * (2 * self.n - i - 1) / 2 + (j - i - 1)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `phi_ij / pi`.
    pub fn multiple(&self, i: usize, j: usize) -> i64 {
        self.multiples[self.idx(i, j)]
    }

    pub fn phase<T: Real>(&self, i: usize, j: usize) -> T {
        T::from_i64_lossy(self.multiple(i, j)) * T::pi()
    }

    pub fn parity(&self, i: usize, j: usize) -> Parity {
        if self.multiple(i, j).rem_euclid(2) == 1 {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    /// `(i, j, phi_ij / pi)` for every bond, row-major.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, i64)> + '_ {
        let n = self.n;
        (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j, self.multiple(i, j))))
    }

    /// Distinct odd multiples, ascending.
    pub fn distinct_odd(&self) -> Vec<i64> {
        let mut v: Vec<i64> = self.multiples.iter().copied().filter(|k| k.rem_euclid(2) == 1).collect();
        v.sort_unstable();
        v.dedup();
        v
    }
}

pub fn phase_tags<T: Real>(profile: &GradientProfile<T>) -> Result<PhaseTagTable> {
    let n = profile.n();
    let mut multiples = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let ratio = profile.omega_ij(i, j) * profile.tau_tot() / T::pi();
            let k = ratio.round();
            if (ratio - k).abs() > T::tolerance(1e-9) * ratio.abs().max(T::one()) {
                return Err(Error::NonIntegerPhase { i, j, ratio: ratio.as_f64() });
            }
            multiples.push(k.to_i64().expect("phase multiple fits in i64"));
        }
    }
    Ok(PhaseTagTable { n, multiples })
}

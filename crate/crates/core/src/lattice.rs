// SPDX-License-Identifier: Apache-2.0

//! Rectangular m' x m targets laid over the chain.
//!
//! Ions are labeled row-major: ion i (1-based) sits at row ceil(i/m), column
//! ((i-1) mod m) + 1, so chain distance 1 is a horizontal bond and distance m
//! a vertical one. The row-end bonds (km, km+1), k = 1..m'-1, are toroidal:
//! adjacent in the chain but not in the lattice. For 3x3 this gives (3,4) and
//! (6,7); some descriptions of the 9-ion layout list (3,4) and (5,6) instead,
//! which would make (6,7) a lattice bond across a row end.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin_chain::CouplingMatrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeTarget<T> {
    m_rows: usize,
    m_cols: usize,
    jh: T,
    jv: T,
}

impl<T: Real> LatticeTarget<T> {
    pub fn new(m_rows: usize, m_cols: usize, jh: T, jv: T) -> Result<Self> {
        if m_rows == 0 || m_cols < 2 {
            return Err(Error::InvalidLattice(format!(
                "lattice needs at least 1 row and 2 columns, got {m_rows}x{m_cols}"
            )));
        }
        if m_rows > m_cols {
            return Err(Error::InvalidLattice(format!("rows ({m_rows}) must not exceed columns ({m_cols})")));
        }
        if !(jh >= T::zero()) || !(jv >= T::zero()) {
            return Err(Error::InvalidLattice("bond strengths must be non-negative".into()));
        }
        Ok(Self { m_rows, m_cols, jh, jv })
    }

    pub fn square(m_rows: usize, m_cols: usize, j: T) -> Result<Self> {
        Self::new(m_rows, m_cols, j, j)
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    pub fn m_cols(&self) -> usize {
        self.m_cols
    }

    pub fn jh(&self) -> T {
        self.jh
    }

    pub fn jv(&self) -> T {
        self.jv
    }

    pub fn n_sites(&self) -> usize {
        self.m_rows * self.m_cols
    }

    pub fn is_square(&self) -> bool {
        self.jh == self.jv
    }

    /// Number of lattice bonds, m'(m-1) + (m'-1)m.
    pub fn bond_count(&self) -> usize {
        self.m_rows * (self.m_cols - 1) + (self.m_rows - 1) * self.m_cols
    }

    pub fn with_strengths(&self, jh: T, jv: T) -> Result<Self> {
        Self::new(self.m_rows, self.m_cols, jh, jv)
    }

    fn check(&self, n: usize) -> Result<()> {
        if n != self.n_sites() {
            return Err(Error::DimensionMismatch { what: "ions vs lattice rows*cols", left: n, right: self.n_sites() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondClass {
    /// Present in the target lattice.
    A,
    /// Absent from the target lattice and to be filtered out.
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondKind {
    Horizontal,
    Vertical,
    Toroidal,
    Other,
}

/// One chain bond, 0-based indices with `i < j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BondInfo {
    pub i: usize,
    pub j: usize,
    pub distance: usize,
    pub class: BondClass,
    pub toroidal: bool,
}

impl BondInfo {
    pub fn kind(&self, m_cols: usize) -> BondKind {
        match (self.class, self.toroidal) {
            (_, true) => BondKind::Toroidal,
            (BondClass::A, false) if self.distance == 1 => BondKind::Horizontal,
            (BondClass::A, false) if self.distance == m_cols => BondKind::Vertical,
            _ => BondKind::Other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BondClassification {
    n: usize,
    m_rows: usize,
    m_cols: usize,
    bonds: Vec<BondInfo>,
}

impl BondClassification {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m_rows(&self) -> usize {
        self.m_rows
    }

    pub fn m_cols(&self) -> usize {
        self.m_cols
    }

    /// All C(n,2) bonds, row-major over (i, j).
    pub fn bonds(&self) -> &[BondInfo] {
        &self.bonds
    }

    pub fn get(&self, i: usize, j: usize) -> Option<&BondInfo> {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        if i == j || j >= self.n {
            return None;
        }
        // row-major upper-triangle offset
        let idx = i * (2 * self.n - i - 1) / 2 + (j - i - 1);
        self.bonds.get(idx)
    }

    pub fn class_a(&self) -> impl Iterator<Item = &BondInfo> {
        self.bonds.iter().filter(|b| b.class == BondClass::A)
    }

    pub fn toroidal(&self) -> impl Iterator<Item = &BondInfo> {
        self.bonds.iter().filter(|b| b.toroidal)
    }
}

pub fn classify_bonds<T: Real>(n: usize, target: &LatticeTarget<T>) -> Result<BondClassification> {
    target.check(n)?;
    let m = target.m_cols();
    let mut bonds = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in i + 1..n {
            let distance = j - i;
            // 1-based i is a multiple of m
            let toroidal = distance == 1 && (i + 1) % m == 0;
            let class = if (distance == 1 && !toroidal) || distance == m { BondClass::A } else { BondClass::B };
            bonds.push(BondInfo { i, j, distance, class, toroidal });
        }
    }
    Ok(BondClassification { n, m_rows: target.m_rows(), m_cols: m, bonds })
}

/// `jh` on horizontal bonds, `jv` on vertical bonds, zero elsewhere.
pub fn target_couplings<T: Real>(n: usize, target: &LatticeTarget<T>) -> Result<CouplingMatrix<T>> {
    let classes = classify_bonds(n, target)?;
    let m = target.m_cols();
    Ok(CouplingMatrix::from_upper_fn(n, |i, j| match classes.get(i, j).map(|b| b.kind(m)) {
        Some(BondKind::Horizontal) => target.jh(),
        Some(BondKind::Vertical) => target.jv(),
        _ => T::zero(),
    }))
}

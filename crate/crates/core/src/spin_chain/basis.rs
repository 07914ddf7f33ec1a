// SPDX-License-Identifier: Apache-2.0

use crate::error::{Error, Result};

/// Largest chain simulated in the full 2^n space.
pub const MAX_DENSE_SPINS: usize = 12;
/// Largest dense state-space dimension (full space or excitation sector).
pub const MAX_DENSE_DIM: usize = 1 << MAX_DENSE_SPINS;

/// Computational basis of n spins, either the full 2^n space or the sector
/// with a fixed number of up spins.
///
/// Basis states are bit patterns: bit `i` set means ion `i` (0-based) is up.
/// Sector states are stored in ascending numeric order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Basis {
    Full { n: usize },
    Sector { n: usize, excitations: usize, states: Vec<u64> },
}

impl Basis {
    pub fn full(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidChain("basis needs at least one spin".into()));
        }
        if n > MAX_DENSE_SPINS {
            return Err(Error::TooLarge {
                dim: 1usize.checked_shl(n as u32).unwrap_or(usize::MAX),
                max: MAX_DENSE_DIM,
            });
        }
        Ok(Basis::Full { n })
    }

    /// Sector with exactly `excitations` up spins, C(n, k)-dimensional.
    pub fn sector(n: usize, excitations: usize) -> Result<Self> {
        if n == 0 || n > 63 {
            return Err(Error::InvalidChain(format!("sector basis needs 1..=63 spins, got {n}")));
        }
        if excitations > n {
            return Err(Error::InvalidChain(format!("{excitations} excitations do not fit in {n} spins")));
        }
        let dim = binomial(n, excitations);
        if dim > MAX_DENSE_DIM {
            return Err(Error::TooLarge { dim, max: MAX_DENSE_DIM });
        }
        let mut states = Vec::with_capacity(dim);
        // Gosper's hack enumerates k-subsets in increasing order.
        if excitations == 0 {
            states.push(0);
        } else {
            let mut s: u64 = (1u64 << excitations) - 1;
            let limit = 1u64 << n;
            while s < limit {
                states.push(s);
                let c = s & s.wrapping_neg();
                let r = s + c;
                s = (((r ^ s) >> 2) / c) | r;
            }
        }
        Ok(Basis::Sector { n, excitations, states })
    }

    pub fn n_spins(&self) -> usize {
        match self {
            Basis::Full { n } | Basis::Sector { n, .. } => *n,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Basis::Full { n } => 1 << n,
            Basis::Sector { states, .. } => states.len(),
        }
    }

    /// Bit pattern of basis state `index`.
    pub fn state(&self, index: usize) -> u64 {
        match self {
            Basis::Full { .. } => index as u64,
            Basis::Sector { states, .. } => states[index],
        }
    }

    /// Position of a bit pattern in this basis, if it belongs to it.
    pub fn index_of(&self, bits: u64) -> Option<usize> {
        match self {
            Basis::Full { n } => ((bits >> n) == 0).then_some(bits as usize),
            Basis::Sector { states, .. } => states.binary_search(&bits).ok(),
        }
    }

    pub fn is_sector(&self) -> bool {
        matches!(self, Basis::Sector { .. })
    }
}

#[inline]
pub fn is_up(bits: u64, site: usize) -> bool {
    (bits >> site) & 1 == 1
}

pub(crate) fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).unwrap_or(usize::MAX)
}

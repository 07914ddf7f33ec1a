// SPDX-License-Identifier: Apache-2.0

use nalgebra::{Complex, DMatrix};

use super::propagator::{EigenPropagator, Evolver};
use crate::compiler::{effective_couplings, PulseSequence};
use crate::error::{Error, Result};
use crate::gradient::{phase_tags, GradientProfile};
use crate::scalar::{cis, cis_neg, modulus, Real};
use crate::spin_chain::{xy_hamiltonian, Basis, CouplingMatrix};

/// Largest singular value.
pub fn spectral_norm<T: Real>(m: &DMatrix<Complex<T>>) -> T {
    m.clone().singular_values().max()
}

fn total_gradient_time<T: Real>(seq: &PulseSequence<T>) -> T {
    seq.gradient_time(0) + seq.gradient_time(1)
}

/// `e^{-i H_ext tau_cycle} e^{-i H' T_cyc}` with `H'` built from the analytic
/// effective couplings.
pub fn ideal_cycle_unitary<T: Real>(
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
    basis: &Basis,
) -> Result<DMatrix<Complex<T>>> {
    let eff = effective_couplings(seq, chain, &phase_tags(profile)?)?;
    let h = xy_hamiltonian(&eff, basis)?;
    let mut u = EigenPropagator::new(h).matrix(seq.cycle_duration());
    let field = crate::spin_chain::field_diagonal(basis, profile.omegas())?;
    let tg = total_gradient_time(seq);
    for (r, &e) in field.iter().enumerate() {
        let p = cis_neg(e * tg);
        for c in 0..u.ncols() {
            u[(r, c)] *= p;
        }
    }
    Ok(u)
}

/// Spectral-norm distance between the exact one-cycle propagator and the
/// zeroth-order ideal one.
pub fn cycle_defect<T: Real>(
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
    basis: &Basis,
) -> Result<T> {
    let exact = Evolver::new(chain, profile, basis.clone())?.cycle_unitary(seq);
    let ideal = ideal_cycle_unitary(seq, chain, profile, basis)?;
    Ok(spectral_norm(&(exact - ideal)))
}

/// Generator of one exact cycle in the single-excitation sector with the net
/// gradient rotation removed: `H = i log(G^-1 U) / T_cyc`. Off-diagonal
/// entries are the effective hopping amplitudes to all orders.
pub fn extract_sector_hamiltonian<T: Real>(
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
) -> Result<DMatrix<Complex<T>>> {
    let basis = Basis::sector(chain.n(), 1)?;
    let ev = Evolver::new(chain, profile, basis)?;
    let mut u = ev.cycle_unitary(seq);
    let tg = total_gradient_time(seq);
    for (r, &e) in ev.field().iter().enumerate() {
        let p = cis(e * tg);
        for c in 0..u.ncols() {
            u[(r, c)] *= p;
        }
    }
    let (q, t) = u.schur().unpack();
    let dim = t.nrows();
    let mut off = T::zero();
    for r in 0..dim {
        for c in r + 1..dim {
            off = off.max(modulus(t[(r, c)]));
        }
    }
    if off > T::tolerance(1e-8) {
        return Err(Error::Numeric(format!("cycle propagator is not normal (Schur residue {})", off.as_f64())));
    }
    let tc = seq.cycle_duration();
    // log(lambda) = ln|lambda| + i arg(lambda);  H = i log(lambda) / T_cyc
    let d = DMatrix::from_fn(dim, dim, |r, c| {
        if r != c {
            return Complex::new(T::zero(), T::zero());
        }
        let z = t[(r, r)];
        let arg = z.im.atan2(z.re);
        let lnr = modulus(z).ln();
        Complex::new(-arg / tc, lnr / tc)
    });
    Ok(&q * d * q.adjoint())
}

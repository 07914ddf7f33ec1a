// SPDX-License-Identifier: Apache-2.0

//! Compilation of a filter into a two-block pulse cycle, and the cycle's
//! zeroth-order effective couplings.
//!
//! A block holds `l = 2i + 1` gradient pulses, each followed by an interaction
//! pulse. Gradient pulses last `W tau_tot` except the central one, which takes
//! the remainder `tau_tot - 2i W tau_tot`. Interaction slot `k` (1-based) is
//!
//! * `k <= i`: sign of `a_k`, duration `T |a_k| / 2`,
//! * `i < k < l`: the mirror of slot `l - k`, opposite sign, same duration,
//! * `k = l`: sign of `-a_0`, duration `T |a_0|`.
//!
//! The second block repeats the first with every interaction sign flipped.
//! For an odd total phase this makes `(1/T) sum_k s_k t_k e^{i Phi_k}` equal
//! to `F(phi)`, where `Phi_k` is the gradient phase accumulated before slot k.

use nalgebra::{Complex, DMatrix};

use crate::error::{Error, Result};
use crate::filter::FourierFilter;
use crate::gradient::{phase_tags, GradientProfile, PhaseTagTable};
use crate::scalar::{cis, Real};
use crate::spin_chain::CouplingMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign of `x`, with zero mapped to `Plus`.
    pub fn of<T: Real>(x: T) -> Self {
        if x < T::zero() {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }

    pub fn value<T: Real>(self) -> T {
        match self {
            Sign::Plus => T::one(),
            Sign::Minus => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Segment<T> {
    /// Free evolution under the gradient field for `duration` seconds.
    Gradient { duration: T },
    /// Evolution under `sign * H_int` for `duration` seconds.
    Interaction { sign: Sign, duration: T },
}

impl<T: Real> Segment<T> {
    pub fn duration(&self) -> T {
        match *self {
            Segment::Gradient { duration } | Segment::Interaction { duration, .. } => duration,
        }
    }
}

/// One full cycle (two blocks) of alternating gradient and interaction pulses.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseSequence<T> {
    segments: Vec<Segment<T>>,
    block_duration: T,
    l: usize,
}

impl<T: Real> PulseSequence<T> {
    /// Checks the structural invariants: alternation starting with a gradient
    /// pulse, an odd number `l` of pulse pairs per block, mirrored slots with
    /// equal durations and opposite signs, the second block's interaction
    /// signs flipped, and interaction time per block at most `block_duration`.
    pub fn from_segments(segments: Vec<Segment<T>>, block_duration: T) -> Result<Self> {
        let bad = |m: &str| Err(Error::MalformedSequence(m.to_string()));
        if !(block_duration > T::zero()) || !block_duration.is_finite() {
            return bad("block duration must be positive");
        }
        if segments.is_empty() || !segments.len().is_multiple_of(4) {
            return bad("a cycle needs 4l segments");
        }
        let l = segments.len() / 4;
        if l.is_multiple_of(2) {
            return bad("pulse pairs per block must be odd");
        }
        for (k, s) in segments.iter().enumerate() {
            let is_gradient = matches!(s, Segment::Gradient { .. });
            if is_gradient != (k % 2 == 0) {
                return bad("segments must alternate gradient / interaction, starting with gradient");
            }
            let d = s.duration();
            if !(d >= T::zero()) || !d.is_finite() {
                return bad("segment durations must be finite and non-negative");
            }
        }
        let seq = Self { segments, block_duration, l };
        let inter = |b: usize| -> Vec<(Sign, T)> {
            seq.block(b)
                .iter()
                .filter_map(|s| match *s {
                    Segment::Interaction { sign, duration } => Some((sign, duration)),
                    Segment::Gradient { .. } => None,
                })
                .collect()
        };
        let (b1, b2) = (inter(0), inter(1));
        for (x, y) in b1.iter().zip(&b2) {
            if y.0 != x.0.flip() || y.1 != x.1 {
                return bad("second block must repeat the first with interaction signs flipped");
            }
        }
        for j in 1..l {
            let (a, b) = (b1[j - 1], b1[l - j - 1]);
            if a.1 != b.1 || (a.1 > T::zero() && a.0 == b.0) {
                return bad("mirrored interaction slots must have equal durations and opposite signs");
            }
        }
        let total = b1.iter().fold(T::zero(), |acc, x| acc + x.1);
        if total > block_duration * (T::one() + T::tolerance(1e-12)) {
            return bad("interaction time exceeds the block duration");
        }
        Ok(seq)
    }

    pub fn segments(&self) -> &[Segment<T>] {
        &self.segments
    }

    /// Segments of block 0 or 1.
    pub fn block(&self, b: usize) -> &[Segment<T>] {
        assert!(b < 2, "a cycle has two blocks");
        let len = 2 * self.l;
        &self.segments[b * len..(b + 1) * len]
    }

    /// Pulse pairs per block.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn block_duration(&self) -> T {
        self.block_duration
    }

    pub fn cycle_duration(&self) -> T {
        self.block_duration * T::lit(2.0)
    }

    pub fn gradient_time(&self, b: usize) -> T {
        self.block(b)
            .iter()
            .filter(|s| matches!(s, Segment::Gradient { .. }))
            .fold(T::zero(), |acc, s| acc + s.duration())
    }

    pub fn interaction_time(&self, b: usize) -> T {
        self.block(b)
            .iter()
            .filter(|s| matches!(s, Segment::Interaction { .. }))
            .fold(T::zero(), |acc, s| acc + s.duration())
    }

    /// The same cycle with every gradient duration replaced by `f(index, duration)`,
    /// where `index` counts gradient pulses from the start of the cycle.
    pub fn map_gradients(&self, mut f: impl FnMut(usize, T) -> T) -> Result<Self> {
        let mut g = 0;
        let segments = self
            .segments
            .iter()
            .map(|s| match *s {
                Segment::Gradient { duration } => {
                    let d = f(g, duration);
                    g += 1;
                    Segment::Gradient { duration: d }
                }
                other => other,
            })
            .collect();
        Self::from_segments(segments, self.block_duration)
    }
}

pub fn pulse_count<T>(seq: &PulseSequence<T>) -> usize {
    seq.segments.len()
}

/// Builds the cycle for `filter` and checks that it reproduces the filter at
/// every odd phase tag of `profile` (and at pi).
pub fn compile_sequence<T: Real>(
    filter: &FourierFilter<T>,
    profile: &GradientProfile<T>,
    block_t: T,
) -> Result<PulseSequence<T>> {
    if !(block_t > T::zero()) {
        return Err(Error::MalformedSequence("block duration must be positive".into()));
    }
    if filter.budget() > T::one() + T::tolerance(1e-9) {
        return Err(Error::InvalidFilter(format!("sum |a_j| = {} exceeds the block", filter.budget().as_f64())));
    }
    let a = filter.coeffs();
    let i = filter.order();
    let l = 2 * i + 1;
    let tau_tot = profile.tau_tot();
    let tau = filter.w() * tau_tot;
    let mut tau_prime = tau_tot - T::from_usize_lossy(2 * i) * tau;
    if tau_prime < T::zero() {
        if tau_prime < -T::tolerance(1e-12) * tau_tot {
            return Err(Error::NegativeCentralPulse { w: filter.w().as_f64(), l, tau_prime: tau_prime.as_f64() });
        }
        tau_prime = T::zero();
    }
    let half = T::lit(0.5);
    let mut block = Vec::with_capacity(2 * l);
    for k in 1..=l {
        let g = if k == i + 1 { tau_prime } else { tau };
        block.push(Segment::Gradient { duration: g });
        let (sign, duration) = if k <= i {
            (Sign::of(a[k]), block_t * a[k].abs() * half)
        } else if k < l {
            let j = l - k;
            (Sign::of(a[j]).flip(), block_t * a[j].abs() * half)
        } else {
            (Sign::of(a[0]).flip(), block_t * a[0].abs())
        };
        block.push(Segment::Interaction { sign, duration });
    }
    let second: Vec<_> = block
        .iter()
        .map(|s| match *s {
            Segment::Interaction { sign, duration } => Segment::Interaction { sign: sign.flip(), duration },
            g => g,
        })
        .collect();
    block.extend(second);
    let seq = PulseSequence::from_segments(block, block_t)?;

    let tags = phase_tags(profile)?;
    let mut phases = tags.distinct_odd();
    if !phases.contains(&1) {
        phases.insert(0, 1);
    }
    let tol = T::tolerance(1e-6);
    for k in phases {
        let omega = T::from_i64_lossy(k) * T::pi() / tau_tot;
        let beta = beta_from_sequence(&seq, omega)?;
        let expected = filter.eval_multiple(k);
        if (beta - expected).abs() > tol {
            return Err(Error::SelfVerification { phase: k, beta: beta.as_f64(), expected: expected.as_f64() });
        }
    }
    Ok(seq)
}

fn phase_sum<T: Real>(segments: &[Segment<T>], omega: T) -> Complex<T> {
    let mut phi = T::zero();
    let mut acc = Complex::new(T::zero(), T::zero());
    for s in segments {
        match *s {
            Segment::Gradient { duration } => phi += omega * duration,
            Segment::Interaction { sign, duration } => acc += cis(phi) * (sign.value::<T>() * duration),
        }
    }
    acc
}

/// Complex block-1 rescale factor `(1/T) sum_k s_k t_k e^{i Phi_k}` for a bond
/// with frequency difference `omega_ij`.
pub fn beta_complex<T: Real>(seq: &PulseSequence<T>, omega_ij: T) -> Complex<T> {
    phase_sum(seq.block(0), omega_ij) / seq.block_duration()
}

/// Real rescale factor of a bond; for odd total phases the imaginary part
/// must vanish.
pub fn beta_from_sequence<T: Real>(seq: &PulseSequence<T>, omega_ij: T) -> Result<T> {
    let z = beta_complex(seq, omega_ij);
    let ratio = omega_ij * seq.gradient_time(0) / T::pi();
    let k = ratio.round();
    let odd = (ratio - k).abs() <= T::tolerance(1e-6) && (k * T::lit(0.5)).fract() != T::zero();
    if odd && z.im.abs() > T::tolerance(1e-9) {
        return Err(Error::MalformedSequence(format!(
            "imaginary rescale residue {} at phase {}pi",
            z.im.as_f64(),
            k.as_f64()
        )));
    }
    Ok(z.re)
}

/// Whole-cycle first-order factor `(1/T_cyc) sum_k s_k t_k e^{i Phi_k}` over
/// both blocks; `J'_ij = J_ij * factor`.
pub fn cycle_factor<T: Real>(seq: &PulseSequence<T>, omega_ij: T) -> Complex<T> {
    phase_sum(seq.segments(), omega_ij) / seq.cycle_duration()
}

/// Effective couplings from the phase tags: `beta_ij J_ij` on odd tags and
/// exactly zero on even ones.
pub fn effective_couplings<T: Real>(
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    tags: &PhaseTagTable,
) -> Result<CouplingMatrix<T>> {
    if chain.n() != tags.n() {
        return Err(Error::DimensionMismatch { what: "chain vs phase tags", left: chain.n(), right: tags.n() });
    }
    let tau_tot = seq.gradient_time(0);
    let mut err = None;
    let out = CouplingMatrix::from_upper_fn(chain.n(), |i, j| {
        let k = tags.multiple(i, j);
        if k.rem_euclid(2) == 0 {
            return T::zero();
        }
        let omega = T::from_i64_lossy(k) * T::pi() / tau_tot;
        match beta_from_sequence(seq, omega) {
            Ok(b) => b * chain.get(i, j),
            Err(e) => {
                err.get_or_insert(e);
                T::zero()
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// First-order average couplings of an arbitrary cycle, using the actual
/// frequency differences of `profile`. Complex in general; real and equal to
/// [`effective_couplings`] for an unperturbed compiled cycle.
pub fn average_couplings<T: Real>(
    seq: &PulseSequence<T>,
    chain: &CouplingMatrix<T>,
    profile: &GradientProfile<T>,
) -> Result<DMatrix<Complex<T>>> {
    let n = chain.n();
    if profile.n() != n {
        return Err(Error::DimensionMismatch { what: "chain vs gradient profile", left: n, right: profile.n() });
    }
    let mut out = DMatrix::from_element(n, n, Complex::new(T::zero(), T::zero()));
    for (i, j, v) in chain.bonds() {
        let z = cycle_factor(seq, profile.omega_ij(i, j)) * v;
        out[(i, j)] = z;
        out[(j, i)] = z.conj();
    }
    Ok(out)
}

fn check_target<T: Real>(n: usize, target: &CouplingMatrix<T>) -> Result<T> {
    if n != target.n() {
        return Err(Error::DimensionMismatch { what: "engineered vs target", left: n, right: target.n() });
    }
    let denom = target.bonds().fold(T::zero(), |acc, (_, _, v)| acc + v.abs());
    if denom == T::zero() {
        return Err(Error::ZeroTarget);
    }
    Ok(denom)
}

/// `sqrt(sum (J'_ij - J_target_ij)^2) / sum |J_target_ij|` over i < j.
pub fn rms_error<T: Real>(engineered: &CouplingMatrix<T>, target: &CouplingMatrix<T>) -> Result<T> {
    let denom = check_target(engineered.n(), target)?;
    let num =
        engineered.bonds().zip(target.bonds()).fold(T::zero(), |acc, ((_, _, a), (_, _, b))| acc + (a - b) * (a - b));
    Ok(num.sqrt() / denom)
}

/// [`rms_error`] with complex engineered couplings, using the modulus of the difference.
pub fn rms_error_complex<T: Real>(engineered: &DMatrix<Complex<T>>, target: &CouplingMatrix<T>) -> Result<T> {
    let denom = check_target(engineered.nrows(), target)?;
    let num = target.bonds().fold(T::zero(), |acc, (i, j, b)| {
        let d = engineered[(i, j)] - Complex::new(b, T::zero());
        acc + d.re * d.re + d.im * d.im
    });
    Ok(num.sqrt() / denom)
}

/// [`rms_error`] after scaling both matrices to unit maximum.
pub fn normalized_rms_error<T: Real>(engineered: &CouplingMatrix<T>, target: &CouplingMatrix<T>) -> Result<T> {
    rms_error(&engineered.normalized(), &target.normalized())
}

/// `target` rescaled so its largest bond equals the largest engineered bond.
pub fn scaled_reference<T: Real>(engineered: &CouplingMatrix<T>, target: &CouplingMatrix<T>) -> CouplingMatrix<T> {
    target.normalized().scaled(engineered.max_abs())
}

// SPDX-License-Identifier: Apache-2.0

use super::modes::NormalModes;
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin_chain::CouplingMatrix;
use crate::stats::linear_fit;

/// Smallest allowed `|mu - omega_m|`, 2 pi x 100 Hz.
pub const DEFAULT_RESONANCE_FLOOR: f64 = 2.0 * std::f64::consts::PI * 100.0;

/// One Raman beat-note: detuning `mu` and sideband strength `eta_omega`
/// quoted for mode `reference_mode` (0 = COM, 1 = tilt). Other modes scale
/// as `(eta_m Omega)^2 = eta_omega^2 omega_ref / omega_m`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatNote<T> {
    pub mu: T,
    pub eta_omega: T,
    pub reference_mode: usize,
}

impl<T: Real> BeatNote<T> {
    pub fn new(mu: T, eta_omega: T, reference_mode: usize) -> Self {
        Self { mu, eta_omega, reference_mode }
    }

    /// From a bare Rabi frequency, using the modes' Lamb-Dicke factors.
    pub fn from_rabi(modes: &NormalModes<T>, mu: T, rabi: T, reference_mode: usize) -> Result<Self> {
        let eta = modes
            .eta(reference_mode)
            .ok_or_else(|| Error::InvalidTrap("Lamb-Dicke data (mass, delta_k) not configured".into()))?;
        Ok(Self::new(mu, eta * rabi, reference_mode))
    }
}

/// `J_ij = sum_tones sum_m (eta_m Omega)^2 b_im b_jm omega_m / (mu^2 - omega_m^2)`.
pub fn ms_couplings<T: Real>(modes: &NormalModes<T>, tones: &[BeatNote<T>]) -> Result<CouplingMatrix<T>> {
    ms_couplings_with_floor(modes, tones, T::lit(DEFAULT_RESONANCE_FLOOR))
}

pub fn ms_couplings_with_floor<T: Real>(
    modes: &NormalModes<T>,
    tones: &[BeatNote<T>],
    floor: T,
) -> Result<CouplingMatrix<T>> {
    let n = modes.n_ions();
    let mut acc = CouplingMatrix::zeros(n);
    for tone in tones {
        acc = &acc + &single_tone(modes, tone, floor)?;
    }
    Ok(acc)
}

fn single_tone<T: Real>(modes: &NormalModes<T>, tone: &BeatNote<T>, floor: T) -> Result<CouplingMatrix<T>> {
    let nm = modes.frequencies.len();
    if tone.reference_mode >= nm {
        return Err(Error::InvalidTrap(format!(
            "tone references mode {} but only {nm} modes are present",
            tone.reference_mode
        )));
    }
    let w_ref = modes.frequencies[tone.reference_mode];
    let mut coeff = Vec::with_capacity(nm);
    for (m, &w) in modes.frequencies.iter().enumerate() {
        if (tone.mu - w).abs() <= floor {
            return Err(Error::Resonance { mu: tone.mu.as_f64(), mode: m, floor: floor.as_f64() });
        }
        coeff.push(tone.eta_omega * tone.eta_omega * w_ref / (tone.mu * tone.mu - w * w));
    }
    Ok(CouplingMatrix::from_upper_fn(modes.n_ions(), |i, j| {
        coeff.iter().enumerate().fold(T::zero(), |s, (m, &c)| s + c * modes.vectors[(i, m)] * modes.vectors[(j, m)])
    }))
}

/// Mismatch between the `+H_int` profile and the negated `-H_int` profile.
#[derive(Debug, Clone, PartialEq)]
pub struct SignFlipReport<T: Real> {
    pub j_plus: CouplingMatrix<T>,
    pub j_minus: CouplingMatrix<T>,
    /// `|J_plus + J_minus|` per bond.
    pub delta_j: CouplingMatrix<T>,
    pub max_delta: T,
    /// `max delta_j / max |J_plus|`.
    pub max_relative: T,
}

fn check_order<T: Real>(modes: &NormalModes<T>, plus: &BeatNote<T>, minus: &[BeatNote<T>]) -> Result<()> {
    let com = modes.com_frequency();
    if !(plus.mu > com) {
        return Err(Error::DetuningOrder("plus tone must be blue of the COM mode".into()));
    }
    match minus {
        [first] | [first, _] if !(first.mu < com) => {
            Err(Error::DetuningOrder("first minus tone must be red of the COM mode".into()))
        }
        [_] => Ok(()),
        [first, second] => {
            let tilt = modes
                .tilt_frequency()
                .ok_or_else(|| Error::DetuningOrder("second minus tone needs a tilt mode".into()))?;
            if !(second.mu < tilt) {
                return Err(Error::DetuningOrder("second minus tone must be red of the tilt mode".into()));
            }
            if !(tilt - second.mu < com - first.mu) {
                return Err(Error::DetuningOrder("tilt detuning must be smaller than the COM detuning".into()));
            }
            Ok(())
        }
        _ => Err(Error::DetuningOrder(format!("expected one or two minus tones, got {}", minus.len()))),
    }
}

pub fn sign_flip_pair<T: Real>(
    modes: &NormalModes<T>,
    plus: &BeatNote<T>,
    minus: &[BeatNote<T>],
) -> Result<SignFlipReport<T>> {
    check_order(modes, plus, minus)?;
    let j_plus = ms_couplings(modes, std::slice::from_ref(plus))?;
    let j_minus = ms_couplings(modes, minus)?;
    let delta_j = CouplingMatrix::from_upper_fn(modes.n_ions(), |i, j| (j_plus.get(i, j) + j_minus.get(i, j)).abs());
    let max_delta = delta_j.max_abs();
    let scale = j_plus.max_abs();
    let max_relative = if scale > T::zero() { max_delta / scale } else { T::zero() };
    Ok(SignFlipReport { j_plus, j_minus, delta_j, max_delta, max_relative })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Initial step as a fraction of each parameter.
    pub initial_step: f64,
    /// Stop once every step falls below this fraction of its parameter.
    pub min_step: f64,
    pub max_evaluations: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { initial_step: 0.2, min_step: 1e-7, max_evaluations: 200_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinusToneFit<T: Real> {
    /// COM tone then tilt tone.
    pub tones: [BeatNote<T>; 2],
    pub report: SignFlipReport<T>,
    pub evaluations: usize,
}

/// Coordinate search over the COM detuning, tilt detuning and both sideband
/// strengths of the two minus tones, minimizing `max_relative`. Steps shrink
/// by half whenever no coordinate move improves.
pub fn optimize_minus_tones<T: Real>(
    modes: &NormalModes<T>,
    plus: &BeatNote<T>,
    start: &[BeatNote<T>; 2],
    opts: &SearchOptions,
) -> Result<MinusToneFit<T>> {
    let com = modes.com_frequency();
    let tilt =
        modes.tilt_frequency().ok_or_else(|| Error::DetuningOrder("minus-tone search needs a tilt mode".into()))?;
    let tones_of = |p: &[T; 4]| {
        [
            BeatNote::new(com - p[0], p[2], start[0].reference_mode),
            BeatNote::new(tilt - p[1], p[3], start[1].reference_mode),
        ]
    };
    let cost = |p: &[T; 4]| -> Option<T> {
        if p.iter().any(|&x| !(x > T::zero())) {
            return None;
        }
        sign_flip_pair(modes, plus, &tones_of(p)).ok().map(|r| r.max_relative)
    };
    let mut p = [com - start[0].mu, tilt - start[1].mu, start[0].eta_omega, start[1].eta_omega];
    let mut best = cost(&p).ok_or_else(|| Error::DetuningOrder("starting minus tones are invalid".into()))?;
    let mut step: [T; 4] = p.map(|x| x * T::lit(opts.initial_step));
    let mut evaluations = 1;
    let min = T::lit(opts.min_step);
    while evaluations < opts.max_evaluations && (0..4).any(|k| step[k] > min * p[k]) {
        let mut improved = false;
        for k in 0..4 {
            for dir in [T::one(), -T::one()] {
                let mut trial = p;
                trial[k] += dir * step[k];
                evaluations += 1;
                if let Some(c) = cost(&trial) {
                    if c < best {
                        best = c;
                        p = trial;
                        improved = true;
                        break;
                    }
                }
            }
        }
        if !improved {
            step = step.map(|s| s * T::lit(0.5));
        }
    }
    let tones = tones_of(&p);
    let report = sign_flip_pair(modes, plus, &tones)?;
    Ok(MinusToneFit { tones, report, evaluations })
}

/// Fits `J_ij = j0 / |i-j|^alpha` by least squares of `ln J` against `ln d`,
/// after averaging bonds of equal distance. Returns `(j0, alpha)`.
pub fn fit_alpha<T: Real>(couplings: &CouplingMatrix<T>) -> Result<(T, T)> {
    let n = couplings.n();
    if n < 2 {
        return Err(Error::Numeric("fit needs at least two ions".into()));
    }
    if let Some((i, j, v)) = couplings.bonds().find(|b| !(b.2 > T::zero())) {
        return Err(Error::NonPositiveCoupling { i, j, value: v.as_f64() });
    }
    let mut xs = Vec::with_capacity(n - 1);
    let mut ys = Vec::with_capacity(n - 1);
    for d in 1..n {
        let (sum, count) = (0..n - d).fold((T::zero(), 0usize), |(s, c), i| (s + couplings.get(i, i + d), c + 1));
        xs.push(T::from_usize_lossy(d).ln());
        ys.push((sum / T::from_usize_lossy(count)).ln());
    }
    if n == 2 {
        return Ok((couplings.get(0, 1), T::zero()));
    }
    let fit = linear_fit(&xs, &ys)?;
    Ok((fit.intercept.exp(), -fit.slope))
}

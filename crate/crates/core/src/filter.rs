// SPDX-License-Identifier: Apache-2.0

//! Cosine-series filters `F(phi) = a_0 + sum_k a_k cos(k W phi)` and their
//! synthesis from per-phase rescale targets.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gradient::PhaseTagTable;
use crate::lattice::{BondClassification, BondKind};
use crate::scalar::Real;
use crate::spin_chain::{power_law_couplings, ChainSpec, CouplingMatrix};

/// Target value `beta_target` for `F` at phase `phase_multiple * pi` (odd).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterConstraint<T> {
    phase_multiple: i64,
    beta_target: T,
}

impl<T: Real> FilterConstraint<T> {
    pub fn new(phase_multiple: i64, beta_target: T) -> Result<Self> {
        if phase_multiple.rem_euclid(2) != 1 {
            return Err(Error::InvalidFilter(format!(
                "constraint phases must be odd multiples of pi, got {phase_multiple}"
            )));
        }
        if !(beta_target.abs() <= T::one()) {
            return Err(Error::InvalidFilter(format!("constraint target {} outside [-1, 1]", beta_target.as_f64())));
        }
        Ok(Self { phase_multiple, beta_target })
    }

    pub fn phase_multiple(&self) -> i64 {
        self.phase_multiple
    }

    pub fn phase(&self) -> T {
        T::from_i64_lossy(self.phase_multiple) * T::pi()
    }

    pub fn beta_target(&self) -> T {
        self.beta_target
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FourierFilter<T> {
    w: T,
    coeffs: Vec<T>,
}

impl<T: Real> FourierFilter<T> {
    /// `coeffs = [a_0, a_1, ..., a_i]`, `0 < w <= 1/2`.
    pub fn new(w: T, coeffs: Vec<T>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidFilter("filter needs at least a_0".into()));
        }
        if !(w > T::zero() && w <= T::lit(0.5)) {
            return Err(Error::InvalidFilter(format!("W must lie in (0, 0.5], got {}", w.as_f64())));
        }
        if coeffs.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidFilter("non-finite filter coefficient".into()));
        }
        Ok(Self { w, coeffs })
    }

    pub fn constant(a0: T) -> Result<Self> {
        Self::new(T::lit(0.5), vec![a0])
    }

    pub fn w(&self) -> T {
        self.w
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Highest harmonic `i`.
    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// `sum_j |a_j|`, the fraction of the block spent under interaction.
    pub fn budget(&self) -> T {
        self.coeffs.iter().fold(T::zero(), |acc, a| acc + a.abs())
    }

    pub fn eval(&self, phase: T) -> T {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .fold(self.coeffs[0], |acc, (k, &a)| acc + a * (T::from_usize_lossy(k) * self.w * phase).cos())
    }

    pub fn eval_multiple(&self, phase_multiple: i64) -> T {
        self.eval(T::from_i64_lossy(phase_multiple) * T::pi())
    }

    pub fn scaled(&self, s: T) -> Self {
        Self { w: self.w, coeffs: self.coeffs.iter().map(|&a| a * s).collect() }
    }

    /// Largest `|F(phi_k) - beta_k|` over `constraints`.
    pub fn max_residual(&self, constraints: &[FilterConstraint<T>]) -> T {
        constraints.iter().fold(T::zero(), |acc, c| acc.max((self.eval(c.phase()) - c.beta_target()).abs()))
    }
}

pub fn eval_filter<T: Real>(f: &FourierFilter<T>, phase: T) -> T {
    f.eval(phase)
}

/// Constraints that turn `chain` into `target`: each odd-tagged bond asks for
/// `beta = target_ij / chain_ij` at its phase.
///
/// Bonds with even tags cancel on their own, so they must have zero target.
pub fn constraints_for_target<T: Real>(
    tags: &PhaseTagTable,
    chain: &CouplingMatrix<T>,
    target: &CouplingMatrix<T>,
) -> Result<Vec<FilterConstraint<T>>> {
    let n = tags.n();
    for (what, m) in [("chain couplings vs tags", chain.n()), ("target couplings vs tags", target.n())] {
        if m != n {
            return Err(Error::DimensionMismatch { what, left: m, right: n });
        }
    }
    let tol = T::tolerance(1e-9);
    let mut by_phase: BTreeMap<i64, T> = BTreeMap::new();
    for (i, j, k) in tags.iter() {
        let t = target.get(i, j);
        if k.rem_euclid(2) == 0 {
            if t != T::zero() {
                return Err(Error::InvalidFilter(format!(
                    "bond ({},{}) has target {} but an even phase tag {k}",
                    i + 1,
                    j + 1,
                    t.as_f64()
                )));
            }
            continue;
        }
        let c = chain.get(i, j);
        let beta = if t == T::zero() {
            T::zero()
        } else if c == T::zero() {
            return Err(Error::InvalidFilter(format!("bond ({},{}) has target but no native coupling", i + 1, j + 1)));
        } else {
            t / c
        };
        let key = k.abs();
        match by_phase.get(&key) {
            Some(&prev) if (prev - beta).abs() > tol * prev.abs().max(T::one()) => {
                return Err(Error::ConflictingConstraint { phase: key, first: prev.as_f64(), second: beta.as_f64() });
            }
            Some(_) => {}
            None => {
                by_phase.insert(key, beta);
            }
        }
    }
    by_phase.into_iter().map(|(k, b)| FilterConstraint::new(k, b)).collect()
}

/// Constraints for a square lattice target: vertical bonds at `global_scale`,
/// horizontal bonds at `global_scale / m^alpha`, everything odd otherwise at 0.
pub fn build_constraints<T: Real>(
    tags: &PhaseTagTable,
    classification: &BondClassification,
    chain: &ChainSpec<T>,
    global_scale: T,
) -> Result<Vec<FilterConstraint<T>>> {
    build_weighted_constraints(tags, classification, chain, global_scale, T::one(), T::one())
}

/// As [`build_constraints`] with horizontal and vertical bonds weighted
/// separately; zero vertical weight gives decoupled rows.
pub fn build_weighted_constraints<T: Real>(
    tags: &PhaseTagTable,
    classification: &BondClassification,
    chain: &ChainSpec<T>,
    global_scale: T,
    horizontal: T,
    vertical: T,
) -> Result<Vec<FilterConstraint<T>>> {
    let (target, native) = lattice_target_for_chain(classification, chain, global_scale, horizontal, vertical)?;
    constraints_for_target(tags, &native, &target)
}

/// Target matrix whose bonds have strength `scale * J0 / m^alpha` times the
/// direction weight, alongside the chain's native power-law matrix.
pub fn lattice_target_for_chain<T: Real>(
    classification: &BondClassification,
    chain: &ChainSpec<T>,
    global_scale: T,
    horizontal: T,
    vertical: T,
) -> Result<(CouplingMatrix<T>, CouplingMatrix<T>)> {
    let n = classification.n();
    if chain.n_ions() != n {
        return Err(Error::DimensionMismatch { what: "chain ions vs classification", left: chain.n_ions(), right: n });
    }
    let m = classification.m_cols();
    let unit = global_scale * chain.coupling_at(m);
    let target = CouplingMatrix::from_upper_fn(n, |i, j| match classification.get(i, j).map(|b| b.kind(m)) {
        Some(BondKind::Horizontal) => unit * horizontal,
        Some(BondKind::Vertical) => unit * vertical,
        _ => T::zero(),
    });
    Ok((target, power_law_couplings(chain)))
}

/// How [`fit_filter`] treats candidates whose `sum |a_j|` exceeds one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BudgetMode {
    /// Scale the whole filter down by `1 / sum |a_j|`. The engineered lattice
    /// keeps its shape and loses overall strength.
    #[default]
    Rescale,
    /// Discard any candidate with `sum |a_j| > 1`.
    Strict,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Largest number of coefficients `a_0..a_i` tried.
    pub max_terms: usize,
    pub tol: f64,
    pub w_step: f64,
    pub budget: BudgetMode,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self { max_terms: 20, tol: 1e-6, w_step: 1e-3, budget: BudgetMode::Rescale }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterFit<T> {
    pub filter: FourierFilter<T>,
    /// Factor by which every constraint target was scaled (1 unless rescaled).
    pub gain: T,
    /// Largest `|F(phi_k) - gain * beta_k|`.
    pub residual: T,
    /// `sum |a_j|` before any rescale.
    pub raw_budget: T,
}

/// Least-squares coefficients for a fixed `W` and order, min-norm when the
/// system is underdetermined. Returns the coefficients and the max residual.
pub fn solve_at<T: Real>(constraints: &[FilterConstraint<T>], w: T, order: usize) -> (Vec<T>, T) {
    let k = constraints.len();
    let a = DMatrix::from_fn(k, order + 1, |r, c| {
        if c == 0 {
            T::one()
        } else {
            (T::from_usize_lossy(c) * w * constraints[r].phase()).cos()
        }
    });
    let b = DVector::from_fn(k, |r, _| constraints[r].beta_target());
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * T::default_epsilon() * T::from_usize_lossy(k.max(order + 1)) * T::lit(10.0);
    let x = svd.solve(&b, cutoff).expect("SVD computed with both factors");
    let r = (&a * &x - &b).amax();
    (x.iter().copied().collect(), r)
}

/// Least-squares refit at a fixed `W`, applying the budget rule.
pub fn refit_at<T: Real>(
    constraints: &[FilterConstraint<T>],
    w: T,
    order: usize,
    budget: BudgetMode,
) -> Result<FilterFit<T>> {
    if constraints.is_empty() {
        return Err(Error::InvalidFilter("no constraints to fit".into()));
    }
    let (coeffs, _) = solve_at(constraints, w, order);
    finish(constraints, w, coeffs, budget)
        .ok_or(Error::InvalidFilter(format!("coefficients at W = {} exceed the pulse budget", w.as_f64())))
}

fn finish<T: Real>(
    constraints: &[FilterConstraint<T>],
    w: T,
    coeffs: Vec<T>,
    budget: BudgetMode,
) -> Option<FilterFit<T>> {
    let raw = FourierFilter { w, coeffs };
    let raw_budget = raw.budget();
    if !raw_budget.is_finite() {
        return None;
    }
    let gain = if raw_budget > T::one() {
        match budget {
            BudgetMode::Strict if raw_budget > T::one() + T::tolerance(1e-9) => return None,
            BudgetMode::Strict => T::one(),
            BudgetMode::Rescale => T::one() / raw_budget,
        }
    } else {
        T::one()
    };
    let filter = raw.scaled(gain);
    let residual =
        constraints.iter().fold(T::zero(), |acc, c| acc.max((filter.eval(c.phase()) - gain * c.beta_target()).abs()));
    Some(FilterFit { filter, gain, residual, raw_budget })
}

/// Searches term counts and a `W` grid for the shortest filter meeting the
/// constraints.
///
/// For each order `i` (0, 1, ...) every grid point `W = k * w_step` with
/// `W <= min(1/2, 1/(2i))` is solved by least squares, and candidates with
/// residual within `tol` are kept. The first order with any candidate wins;
/// among its candidates the one with the largest gain, then the largest `W`,
/// is returned. Order 0 uses `W = 1/2`.
pub fn fit_filter<T: Real>(constraints: &[FilterConstraint<T>], opts: &FitOptions) -> Result<FilterFit<T>> {
    if constraints.is_empty() {
        return Err(Error::InvalidFilter("no constraints to fit".into()));
    }
    if opts.max_terms < constraints.len() {
        return Err(Error::InvalidFilter(format!(
            "max_terms ({}) is smaller than the number of constraints ({})",
            opts.max_terms,
            constraints.len()
        )));
    }
    if !(opts.w_step > 0.0 && opts.w_step <= 0.5) || !(opts.tol > 0.0) {
        return Err(Error::InvalidFilter("w_step must lie in (0, 0.5] and tol must be positive".into()));
    }
    let tol = T::lit(opts.tol);
    let mut best_residual = f64::INFINITY;
    for order in 0..opts.max_terms {
        let w_max = if order == 0 { 0.5 } else { (1.0 / (2.0 * order as f64)).min(0.5) };
        let steps = ((w_max / opts.w_step) * (1.0 + 1e-12)).floor() as usize;
        let grid: Vec<f64> = if order == 0 { vec![0.5] } else { (1..=steps).map(|k| k as f64 * opts.w_step).collect() };
        let results: Vec<(f64, Option<FilterFit<T>>)> = grid
            .par_iter()
            .map(|&w| {
                let (coeffs, r) = solve_at(constraints, T::lit(w), order);
                let fit = if r <= tol { finish(constraints, T::lit(w), coeffs, opts.budget) } else { None };
                (r.as_f64(), fit)
            })
            .collect();
        let mut chosen: Option<FilterFit<T>> = None;
        for (r, fit) in results {
            best_residual = best_residual.min(r);
            let Some(fit) = fit else { continue };
            let better = match &chosen {
                None => true,
                Some(c) => fit.gain > c.gain || (fit.gain == c.gain && fit.filter.w() > c.filter.w()),
            };
            if better {
                chosen = Some(fit);
            }
        }
        if let Some(fit) = chosen {
            return Ok(fit);
        }
    }
    Err(Error::FitFailure { max_terms: opts.max_terms, tol: opts.tol, best_residual })
}

// SPDX-License-Identifier: Apache-2.0

//! Run configuration, read from a TOML file.
//!
//! Couplings and times are in units of J_0 (the nearest-neighbour chain
//! coupling) unless a field name ends in `_hz`.

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    pub chain: ChainSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    #[serde(default)]
    pub gradient: GradientSection,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub schedule: ScheduleSection,
    #[serde(default)]
    pub simulate: SimulateSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quench: Option<QuenchSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ms: Option<MsSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSection {
    pub n: usize,
    pub alpha: f64,
    /// J_0 / 2pi, only used to convert durations to seconds.
    #[serde(default = "default_j0_hz")]
    pub j0_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeSection {
    pub rows: usize,
    pub cols: usize,
    #[serde(default = "one")]
    pub horizontal: f64,
    #[serde(default = "one")]
    pub vertical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GradientSection {
    #[serde(default = "default_omega0")]
    pub omega0_over_j0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Budget {
    Rescale,
    Strict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default = "default_max_terms")]
    pub max_terms: usize,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_scale")]
    pub global_scale: f64,
    #[serde(default = "default_w_step")]
    pub w_step: f64,
    #[serde(default = "default_budget")]
    pub budget: Budget,
    /// Explicit filter; skips the fit when both are given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSection {
    #[serde(default = "default_j0t")]
    pub j0t: f64,
    #[serde(default = "default_cycles")]
    pub n_cycles: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BasisKind {
    Sector,
    Full,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateSection {
    /// 1-based sites initially up.
    #[serde(default = "default_initial")]
    pub initial_up: Vec<usize>,
    #[serde(default = "default_basis")]
    pub basis: BasisKind,
    /// 1-based site pairs for connected S_z correlators.
    #[serde(default)]
    pub correlators: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuenchSection {
    pub switch_cycle: usize,
    #[serde(default = "one")]
    pub before_horizontal: f64,
    #[serde(default)]
    pub before_vertical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSection {
    pub sigmas: Vec<f64>,
    #[serde(default = "default_seeds")]
    pub seeds: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToneSection {
    /// 0 is the COM mode, 1 the tilt mode.
    pub mode: usize,
    /// Beat note minus the reference mode frequency, signed.
    pub detuning_hz: f64,
    pub eta_omega_hz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsSection {
    pub axial_hz: f64,
    pub transverse_hz: f64,
    pub plus: Vec<ToneSection>,
    #[serde(default)]
    pub minus: Vec<ToneSection>,
    #[serde(default)]
    pub optimize: bool,
}

fn one() -> f64 {
    1.0
}
fn default_j0_hz() -> f64 {
    520.0
}
fn default_omega0() -> f64 {
    200.0
}
fn default_max_terms() -> usize {
    20
}
fn default_tol() -> f64 {
    1e-6
}
fn default_scale() -> f64 {
    0.7
}
fn default_w_step() -> f64 {
    1e-3
}
fn default_budget() -> Budget {
    Budget::Rescale
}
fn default_j0t() -> f64 {
    0.02
}
fn default_cycles() -> usize {
    50
}
fn default_initial() -> Vec<usize> {
    vec![1]
}
fn default_basis() -> BasisKind {
    BasisKind::Sector
}
fn default_seeds() -> usize {
    100
}

impl Default for GradientSection {
    fn default() -> Self {
        Self { omega0_over_j0: default_omega0() }
    }
}

impl Default for FilterSection {
    fn default() -> Self {
        Self {
            max_terms: default_max_terms(),
            tol: default_tol(),
            global_scale: default_scale(),
            w_step: default_w_step(),
            budget: default_budget(),
            w: None,
            coeffs: None,
        }
    }
}

impl Default for ScheduleSection {
    fn default() -> Self {
        Self { j0t: default_j0t(), n_cycles: default_cycles() }
    }
}

impl Default for SimulateSection {
    fn default() -> Self {
        Self { initial_up: default_initial(), basis: default_basis(), correlators: Vec::new() }
    }
}

fn bad(field: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {msg}"))
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration, defaults included.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let n = self.chain.n;
        if n < 2 {
            return Err(bad("chain.n", "needs at least two ions"));
        }
        if !(0.0..3.0).contains(&self.chain.alpha) {
            return Err(bad("chain.alpha", format!("{} is outside [0, 3)", self.chain.alpha)));
        }
        if !(self.chain.j0_hz > 0.0) {
            return Err(bad("chain.j0_hz", "must be positive"));
        }
        if let Some(l) = &self.lattice {
            if l.rows * l.cols != n {
                return Err(CliError::Config(format!(
                    "chain.n = {n} but lattice.rows * lattice.cols = {} * {} = {}",
                    l.rows,
                    l.cols,
                    l.rows * l.cols
                )));
            }
        }
        if !(self.gradient.omega0_over_j0 > 0.0) {
            return Err(bad("gradient.omega0_over_j0", "must be positive"));
        }
        let f = &self.filter;
        if !(f.global_scale > 0.0 && f.global_scale <= 1.0) {
            return Err(bad("filter.global_scale", "must lie in (0, 1]"));
        }
        if f.w.is_some() != f.coeffs.is_some() {
            return Err(bad("filter.w / filter.coeffs", "give both or neither"));
        }
        if !(self.schedule.j0t > 0.0) {
            return Err(bad("schedule.j0t", "must be positive"));
        }
        let s = &self.simulate;
        if let Some(&site) = s.initial_up.iter().find(|&&i| i == 0 || i > n) {
            return Err(bad("simulate.initial_up", format!("site {site} is outside 1..={n}")));
        }
        if let Some(p) = s.correlators.iter().find(|p| p[0] == 0 || p[1] == 0 || p[0] > n || p[1] > n) {
            return Err(bad("simulate.correlators", format!("pair {p:?} is outside 1..={n}")));
        }
        if let Some(noise) = &self.noise {
            if noise.sigmas.is_empty() || noise.sigmas.iter().any(|&x| !(x >= 0.0)) {
                return Err(bad("noise.sigmas", "needs non-negative values"));
            }
            if noise.seeds == 0 {
                return Err(bad("noise.seeds", "must be positive"));
            }
        }
        if let Some(ms) = &self.ms {
            if ms.plus.is_empty() {
                return Err(bad("ms.plus", "needs at least one tone"));
            }
            if !(ms.minus.is_empty() || ms.minus.len() == 2) {
                return Err(bad("ms.minus", "needs a COM tone and a tilt tone, or nothing"));
            }
            if ms.optimize && ms.minus.len() != 2 {
                return Err(bad("ms.optimize", "needs two minus tones to start from"));
            }
            if let Some(t) = ms.plus.iter().chain(&ms.minus).find(|t| t.mode >= n) {
                return Err(bad("ms tone mode", format!("mode {} does not exist for {n} ions", t.mode)));
            }
        }
        Ok(())
    }

    pub fn lattice(&self) -> Result<&LatticeSection, CliError> {
        self.lattice.as_ref().ok_or_else(|| bad("lattice", "section is required for this command"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[chain]\nn = 6\nalpha = 0.2\n[lattice]\nrows = 2\ncols = 3\n";

    #[test]
    fn defaults_fill_in() {
        let c = RunConfig::from_toml(MINIMAL).unwrap();
        assert_eq!(c.gradient.omega0_over_j0, 200.0);
        assert_eq!(c.filter.global_scale, 0.7);
        assert_eq!(c.schedule.j0t, 0.02);
        assert_eq!(c.simulate.initial_up, vec![1]);
        let again = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn size_mismatch_names_both_fields() {
        let e = RunConfig::from_toml(&MINIMAL.replace("n = 6", "n = 7")).unwrap_err().to_string();
        assert!(e.contains("chain.n") && e.contains("lattice.rows * lattice.cols"), "{e}");
    }

    #[test]
    fn unknown_fields_are_rejected() {
        assert!(RunConfig::from_toml(&format!("{MINIMAL}bogus = 1\n")).is_err());
    }
}

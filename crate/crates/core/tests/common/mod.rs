// SPDX-License-Identifier: Apache-2.0
#![allow(dead_code)]

use std::f64::consts::PI;

use ionlattice::compiler::{compile_sequence, PulseSequence};
use ionlattice::filter::{build_constraints, fit_filter, FilterConstraint, FitOptions, FourierFilter};
use ionlattice::gradient::{phase_tags, semi_linear_gradient, GradientProfile};
use ionlattice::lattice::{classify_bonds, target_couplings, LatticeTarget};
use ionlattice::spin_chain::{power_law_couplings, ChainSpec, CouplingMatrix};

pub const OMEGA0_OVER_J0: f64 = 200.0;
pub const ALPHA: f64 = 0.2;
pub const SCALE: f64 = 0.7;

pub const ROW_SIX: (f64, &[f64]) = (0.142, &[0.385, 0.0436, 0.114, 0.457]);
/// Nine-ion row with W = 0.100; the value listed alongside it is 0.099.
pub const ROW_NINE: (f64, &[f64]) = (0.100, &[0.241, 0.204, -0.094, 0.126, 0.334]);
pub const ROW_NINE_LISTED_W: f64 = 0.099;

pub const ROW_16: (f64, &[f64]) = (0.0833337, &[0.204912, 0.230988, -0.0486727, -0.039712, 0.204859, 0.270857]);
pub const ROW_25: (f64, &[f64]) = (
    0.0499969,
    &[0.120175, 0.162846, 0.0136359, -0.047381, 0.0381538, 0.169724, 0.191738, 0.0673324, -0.0810888, -0.107924],
);
pub const ROW_36: (f64, &[f64]) = (
    0.0384582,
    &[
        0.0912132, 0.145688, 0.0598559, -0.0179331, -0.0376196, 0.011602, 0.0940426, 0.150076, 0.137711, 0.0605449,
        -0.034126, -0.0884624, -0.0711247,
    ],
);
pub const ROW_49: (f64, &[f64]) = (
    0.026316,
    &[
        0.062292, 0.104796, 0.055799, 0.003215, -0.025686, -0.016130, 0.026047, 0.077484, 0.109961, 0.105051, 0.063949,
        0.006843, -0.037818, -0.048081, -0.020459, 0.028583, 0.070986, 0.082330, 0.054488,
    ],
);

pub fn filter(row: (f64, &[f64])) -> FourierFilter<f64> {
    FourierFilter::new(row.0, row.1.to_vec()).unwrap()
}

/// Direct summation of the cosine series, independent of the library.
pub fn series(w: f64, a: &[f64], phi: f64) -> f64 {
    a.iter().enumerate().map(|(k, c)| c * (k as f64 * w * phi).cos()).sum()
}

/// Everything needed to run an m' x m experiment with J0 = 1.
pub struct Setup {
    pub n: usize,
    pub lattice: LatticeTarget<f64>,
    pub spec: ChainSpec<f64>,
    pub chain: CouplingMatrix<f64>,
    pub profile: GradientProfile<f64>,
    pub target: CouplingMatrix<f64>,
}

impl Setup {
    pub fn new(mr: usize, mc: usize) -> Self {
        let n = mr * mc;
        let lattice = LatticeTarget::square(mr, mc, 1.0).unwrap();
        let spec = ChainSpec::new(n, 1.0, ALPHA).unwrap();
        let omega0 = OMEGA0_OVER_J0;
        let profile = semi_linear_gradient(n, &lattice, omega0, PI / omega0).unwrap();
        Self {
            n,
            chain: power_law_couplings(&spec),
            target: target_couplings(n, &lattice).unwrap(),
            lattice,
            spec,
            profile,
        }
    }

    pub fn constraints(&self) -> Vec<FilterConstraint<f64>> {
        let tags = phase_tags(&self.profile).unwrap();
        let cls = classify_bonds(self.n, &self.lattice).unwrap();
        build_constraints(&tags, &cls, &self.spec, SCALE).unwrap()
    }

    pub fn fitted(&self) -> FourierFilter<f64> {
        fit_filter(&self.constraints(), &FitOptions::default()).unwrap().filter
    }

    pub fn compile(&self, f: &FourierFilter<f64>, j0t: f64) -> PulseSequence<f64> {
        compile_sequence(f, &self.profile, j0t).unwrap()
    }
}

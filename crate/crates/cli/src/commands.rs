// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use ionlattice::compiler::{
    compile_sequence, effective_couplings, normalized_rms_error, pulse_count, scaled_reference, Segment,
};
use ionlattice::dynamics::{evolve_target, noise_sweep, quench_run, DynamicsTrace, SpinState, TargetEvolver};
use ionlattice::filter::{build_weighted_constraints, fit_filter, BudgetMode, FilterConstraint, FitOptions};
use ionlattice::gradient::{phase_tags, semi_linear_gradient, PhaseTagTable};
use ionlattice::lattice::{classify_bonds, target_couplings};
use ionlattice::ms::{
    fit_alpha, ms_couplings, normal_modes, optimize_minus_tones, sign_flip_pair, BeatNote, SearchOptions,
};
use ionlattice::spin_chain::{power_law_couplings, Basis};
use ionlattice::stats::log_log_fit;
use ionlattice::{
    ChainSpec, CouplingMatrix, FourierFilter, GradientProfile, LatticeTarget, NormalModes, PulseSequence, TrapConfig,
};
use toml::{Table, Value};

use crate::config::{BasisKind, Budget, RunConfig, ToneSection};
use crate::output::{num, OutputDir};
use crate::CliError;

const TWO_PI: f64 = 2.0 * PI;

struct Fitted {
    filter: FourierFilter,
    gain: f64,
    residual: f64,
    fitted: bool,
}

/// Everything derived from the chain, lattice, gradient and filter sections.
struct Pipeline {
    chain: CouplingMatrix,
    lattice: LatticeTarget,
    profile: GradientProfile,
    tags: PhaseTagTable,
    target: CouplingMatrix,
    fit: Fitted,
    seq: PulseSequence,
    engineered: CouplingMatrix,
}

impl Pipeline {
    fn new(cfg: &RunConfig) -> Result<Self, CliError> {
        let l = cfg.lattice()?;
        Self::with_weights(cfg, l.horizontal, l.vertical)
    }

    fn with_weights(cfg: &RunConfig, horizontal: f64, vertical: f64) -> Result<Self, CliError> {
        let l = cfg.lattice()?;
        let n = cfg.chain.n;
        let spec = ChainSpec::new(n, 1.0, cfg.chain.alpha)?;
        let chain = power_law_couplings(&spec);
        let lattice = LatticeTarget::new(l.rows, l.cols, horizontal, vertical)?;
        let omega0 = cfg.gradient.omega0_over_j0;
        let profile = semi_linear_gradient(n, &lattice, omega0, PI / omega0)?;
        let tags = phase_tags(&profile)?;
        let target = target_couplings(n, &lattice)?;
        let cls = classify_bonds(n, &lattice)?;
        let constraints =
            build_weighted_constraints(&tags, &cls, &spec, cfg.filter.global_scale, horizontal, vertical)?;
        let fit = fitted_filter(cfg, &constraints)?;
        let seq = compile_sequence(&fit.filter, &profile, cfg.schedule.j0t)?;
        let engineered = effective_couplings(&seq, &chain, &tags)?;
        Ok(Self { chain, lattice, profile, tags, target, fit, seq, engineered })
    }

    fn reference(&self) -> CouplingMatrix {
        scaled_reference(&self.engineered, &self.target)
    }
}

fn fitted_filter(cfg: &RunConfig, constraints: &[FilterConstraint<f64>]) -> Result<Fitted, CliError> {
    let f = &cfg.filter;
    if let (Some(w), Some(a)) = (f.w, &f.coeffs) {
        let filter = FourierFilter::new(w, a.clone())?;
        let residual = filter.max_residual(constraints);
        return Ok(Fitted { filter, gain: 1.0, residual, fitted: false });
    }
    let budget = match f.budget {
        Budget::Rescale => BudgetMode::Rescale,
        Budget::Strict => BudgetMode::Strict,
    };
    let opts = FitOptions { max_terms: f.max_terms, tol: f.tol, w_step: f.w_step, budget };
    let fit = fit_filter(constraints, &opts)?;
    Ok(Fitted { filter: fit.filter, gain: fit.gain, residual: fit.residual, fitted: true })
}

fn floats(xs: impl IntoIterator<Item = f64>) -> Value {
    Value::Array(xs.into_iter().map(Value::Float).collect())
}

fn table(pairs: Vec<(&str, Value)>) -> Table {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn int(x: usize) -> Value {
    Value::Integer(x as i64)
}

pub fn compile(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let p = Pipeline::new(cfg)?;
    let f = &p.fit.filter;
    let report = table(vec![
        ("w", Value::Float(f.w())),
        ("coeffs", floats(f.coeffs().iter().copied())),
        ("terms", int(f.coeffs().len())),
        ("budget", Value::Float(f.budget())),
        ("gain", Value::Float(p.fit.gain)),
        ("max_residual", Value::Float(p.fit.residual)),
        ("fitted", Value::Boolean(p.fit.fitted)),
        ("segments_per_cycle", int(pulse_count(&p.seq))),
    ]);
    out.toml("filter.toml", &report)?;

    let to_s = 1.0 / (TWO_PI * cfg.chain.j0_hz);
    let rows: Vec<Vec<String>> = p
        .seq
        .segments()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            let (kind, sign) = match s {
                Segment::Gradient { .. } => ("gradient", "0"),
                Segment::Interaction { sign, .. } => {
                    ("interaction", if sign.value::<f64>() > 0.0 { "+1" } else { "-1" })
                }
            };
            let block = k / (2 * p.seq.l());
            vec![
                k.to_string(),
                block.to_string(),
                kind.into(),
                sign.into(),
                num(s.duration()),
                num(s.duration() * to_s),
            ]
        })
        .collect();
    let cols = ["index", "block", "kind", "sign", "duration_j0", "duration_s"].map(String::from);
    out.csv("schedule.csv", &cols, &rows)?;
    Ok(format!(
        "filter with {} terms at W = {:.6}; {} segments per cycle",
        f.coeffs().len(),
        f.w(),
        pulse_count(&p.seq)
    ))
}

pub fn couplings(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let p = Pipeline::new(cfg)?;
    let rms = normalized_rms_error(&p.engineered, &p.target)?;
    let odd = p.tags.iter().filter(|b| b.2 % 2 != 0).count();
    out.matrix("engineered.csv", &p.engineered)?;
    out.matrix("target.csv", &p.target)?;
    out.matrix("normalized.csv", &p.engineered.normalized())?;
    out.matrix("native.csv", &p.chain)?;
    let report = table(vec![
        ("rms_error", Value::Float(rms)),
        ("max_engineered", Value::Float(p.engineered.max_abs())),
        ("odd_bonds", int(odd)),
        ("even_bonds", int(p.tags.iter().count() - odd)),
    ]);
    out.toml("couplings_report.toml", &report)?;
    Ok(format!("RMS error {:.3}% against the {}x{} target", 100.0 * rms, p.lattice.m_rows(), p.lattice.m_cols()))
}

fn initial_state(cfg: &RunConfig) -> Result<SpinState<f64>, CliError> {
    let n = cfg.chain.n;
    let up: Vec<usize> = cfg.simulate.initial_up.iter().map(|s| s - 1).collect();
    let basis = match cfg.simulate.basis {
        BasisKind::Sector => Basis::sector(n, up.len())?,
        BasisKind::Full => Basis::full(n)?,
    };
    Ok(SpinState::product(basis, &up)?)
}

/// Observables at each stroboscopic sample.
struct Samples {
    times: Vec<f64>,
    return_probability: Vec<f64>,
    sz: Vec<Vec<f64>>,
    correlators: Vec<Vec<f64>>,
    norm: Vec<f64>,
}

impl Samples {
    fn from_trace(cfg: &RunConfig, tr: &DynamicsTrace<f64>) -> Self {
        Self {
            times: tr.times.clone(),
            return_probability: tr.return_probability.clone(),
            sz: tr.sz.clone(),
            correlators: cfg.simulate.correlators.iter().map(|p| tr.correlator(p[0] - 1, p[1] - 1)).collect(),
            norm: tr.norm.clone(),
        }
    }

    fn from_states(
        cfg: &RunConfig,
        initial: &SpinState<f64>,
        states: &[(f64, SpinState<f64>)],
    ) -> Result<Self, CliError> {
        let pairs = &cfg.simulate.correlators;
        let mut out = Self {
            times: Vec::new(),
            return_probability: Vec::new(),
            sz: Vec::new(),
            correlators: vec![Vec::new(); pairs.len()],
            norm: Vec::new(),
        };
        for (t, psi) in states {
            let (sz, szsz) = psi.sz_moments();
            out.times.push(*t);
            out.return_probability.push(initial.fidelity(psi)?);
            for (c, p) in out.correlators.iter_mut().zip(pairs) {
                let (i, j) = (p[0] - 1, p[1] - 1);
                c.push(szsz[(i, j)] - sz[i] * sz[j]);
            }
            out.sz.push(sz);
            out.norm.push(psi.norm());
        }
        Ok(out)
    }

    fn len(&self) -> usize {
        self.times.len()
    }

    fn write(&self, cfg: &RunConfig, out: &mut OutputDir, name: &str) -> Result<(), CliError> {
        let mut cols: Vec<String> = vec!["time_j0".into(), "cycle".into(), "return_probability".into()];
        cols.extend(cfg.simulate.correlators.iter().map(|p| format!("c_{}_{}", p[0], p[1])));
        cols.extend((1..=cfg.chain.n).map(|i| format!("sz_{i}")));
        let rows: Vec<Vec<String>> = (0..self.len())
            .map(|k| {
                let mut r = vec![num(self.times[k]), k.to_string(), num(self.return_probability[k])];
                r.extend(self.correlators.iter().map(|c| num(c[k])));
                r.extend(self.sz[k].iter().map(|&v| num(v)));
                r
            })
            .collect();
        out.csv(name, &cols, &rows)
    }
}

fn write_run(
    cfg: &RunConfig,
    out: &mut OutputDir,
    engineered: &DynamicsTrace<f64>,
    ideal: &Samples,
) -> Result<String, CliError> {
    let eng = Samples::from_trace(cfg, engineered);
    eng.write(cfg, out, "trace.csv")?;
    ideal.write(cfg, out, "ideal_trace.csv")?;
    let dev = DynamicsTrace::max_deviation(&eng.return_probability, &ideal.return_probability);
    let corr_dev = eng
        .correlators
        .iter()
        .zip(&ideal.correlators)
        .fold(0.0f64, |a, (x, y)| a.max(DynamicsTrace::max_deviation(x, y)));
    let drift = eng.norm.iter().fold(0.0f64, |a, x| a.max((x - 1.0).abs()));
    let report = table(vec![
        ("cycles", int(eng.len() - 1)),
        ("max_return_probability_deviation", Value::Float(dev)),
        ("max_correlator_deviation", Value::Float(corr_dev)),
        ("max_norm_drift", Value::Float(drift)),
        ("warnings", Value::Array(engineered.warnings.iter().cloned().map(Value::String).collect())),
    ]);
    out.toml("simulate_report.toml", &report)?;
    Ok(format!("{} cycles; max |dP| against the ideal lattice {:.3e}", eng.len() - 1, dev))
}

pub fn simulate(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    if cfg.quench.is_some() {
        return quench(cfg, out);
    }
    let p = Pipeline::new(cfg)?;
    let psi = initial_state(cfg)?;
    let n_cycles = cfg.schedule.n_cycles;
    let engineered = quench_run(&psi, &p.seq, &p.seq, n_cycles, &p.chain, &p.profile, n_cycles)?;
    let ideal = evolve_target(&psi, &p.reference(), &engineered.times)?;
    write_run(cfg, out, &engineered, &Samples::from_trace(cfg, &ideal))
}

/// Runs the `vertical`-weighted filter up to the switch cycle and the full
/// lattice filter afterwards; the ideal trace switches Hamiltonians at the
/// same time.
pub fn quench(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let q =
        cfg.quench.as_ref().ok_or_else(|| CliError::Config("quench: section is required for this command".into()))?;
    let after = Pipeline::new(cfg)?;
    let before = Pipeline::with_weights(cfg, q.before_horizontal, q.before_vertical)?;
    let psi = initial_state(cfg)?;
    let n_cycles = cfg.schedule.n_cycles;
    let switch = q.switch_cycle.min(n_cycles);
    let engineered = quench_run(&psi, &before.seq, &after.seq, switch, &after.chain, &after.profile, n_cycles)?;

    let t_cyc = after.seq.cycle_duration();
    let pre = TargetEvolver::new(&before.reference(), psi.basis().clone())?;
    let post = TargetEvolver::new(&after.reference(), psi.basis().clone())?;
    let at_switch = pre.propagate(&psi, switch as f64 * t_cyc)?;
    let mut states = Vec::with_capacity(n_cycles + 1);
    for c in 0..=n_cycles {
        let t = c as f64 * t_cyc;
        let phi = if c <= switch {
            pre.propagate(&psi, t)?
        } else {
            post.propagate(&at_switch, (c - switch) as f64 * t_cyc)?
        };
        states.push((t, phi));
    }
    write_run(cfg, out, &engineered, &Samples::from_states(cfg, &psi, &states)?)
}

pub fn sweep_noise(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let noise =
        cfg.noise.as_ref().ok_or_else(|| CliError::Config("noise: section is required for this command".into()))?;
    let p = Pipeline::new(cfg)?;
    let seeds: Vec<u64> = (0..noise.seeds as u64).map(|k| cfg.seed.wrapping_add(k)).collect();
    let pts = noise_sweep(&p.seq, &p.chain, &p.profile, &p.reference(), &noise.sigmas, &seeds)?;
    let rows: Vec<Vec<String>> = pts.iter().map(|q| vec![num(q.sigma), num(q.mean), num(q.std_dev)]).collect();
    out.csv("noise.csv", &["sigma", "mean_rms", "std_rms"].map(String::from), &rows)?;
    let usable: Vec<_> = pts.iter().filter(|q| q.sigma > 0.0 && q.mean > 0.0).collect();
    let mut report = table(vec![("seeds", int(seeds.len()))]);
    let mut summary = format!("{} noise levels over {} seeds", pts.len(), seeds.len());
    if usable.len() >= 2 {
        let xs: Vec<f64> = usable.iter().map(|q| q.sigma).collect();
        let ys: Vec<f64> = usable.iter().map(|q| q.mean).collect();
        let slope = log_log_fit(&xs, &ys)?.slope;
        report.insert("log_log_slope".into(), Value::Float(slope));
        summary.push_str(&format!("; log-log slope {slope:.3}"));
    }
    out.toml("noise_report.toml", &report)?;
    Ok(summary)
}

fn tone(modes: &NormalModes, t: &ToneSection) -> BeatNote<f64> {
    BeatNote::new(modes.frequencies[t.mode] + TWO_PI * t.detuning_hz, TWO_PI * t.eta_omega_hz, t.mode)
}

fn tone_table(modes: &NormalModes, t: &BeatNote<f64>) -> Value {
    Value::Table(table(vec![
        ("mode", int(t.reference_mode)),
        ("detuning_hz", Value::Float((t.mu - modes.frequencies[t.reference_mode]) / TWO_PI)),
        ("eta_omega_hz", Value::Float(t.eta_omega / TWO_PI)),
    ]))
}

fn nearest_neighbour_mean(j: &CouplingMatrix) -> f64 {
    let n = j.n();
    (0..n - 1).map(|i| j.get(i, i + 1)).sum::<f64>() / (n - 1) as f64
}

pub fn ms(cfg: &RunConfig, out: &mut OutputDir) -> Result<String, CliError> {
    let ms = cfg.ms.as_ref().ok_or_else(|| CliError::Config("ms: section is required for this command".into()))?;
    let n = cfg.chain.n;
    let trap = TrapConfig::new(n, TWO_PI * ms.axial_hz, TWO_PI * ms.transverse_hz)?;
    let modes = normal_modes(&trap)?;

    let mut cols = vec!["mode".to_string(), "frequency_hz".to_string()];
    cols.extend((1..=n).map(|i| format!("b_{i}")));
    let rows: Vec<Vec<String>> = (0..n)
        .map(|m| {
            let mut r = vec![m.to_string(), num(modes.frequencies[m] / TWO_PI)];
            r.extend((0..n).map(|i| num(modes.vectors[(i, m)])));
            r
        })
        .collect();
    out.csv("modes.csv", &cols, &rows)?;

    let plus: Vec<BeatNote<f64>> = ms.plus.iter().map(|t| tone(&modes, t)).collect();
    let j_plus = ms_couplings(&modes, &plus)?;
    out.matrix("j_plus_hz.csv", &j_plus.scaled(1.0 / TWO_PI))?;
    let nn = nearest_neighbour_mean(&j_plus) / TWO_PI;
    let mut report = table(vec![
        ("com_frequency_hz", Value::Float(modes.com_frequency() / TWO_PI)),
        ("nearest_neighbour_mean_hz", Value::Float(nn)),
    ]);
    let mut summary = format!("nearest-neighbour J = 2pi x {nn:.1} Hz");
    match fit_alpha(&j_plus) {
        Ok((j0, alpha)) => {
            report.insert("fit_j0_hz".into(), Value::Float(j0 / TWO_PI));
            report.insert("fit_alpha".into(), Value::Float(alpha));
            summary.push_str(&format!(", alpha = {alpha:.3}"));
        }
        Err(e) => {
            report.insert("fit_alpha_error".into(), Value::String(e.to_string()));
        }
    }

    if ms.minus.len() == 2 {
        let minus = [tone(&modes, &ms.minus[0]), tone(&modes, &ms.minus[1])];
        let rep = sign_flip_pair(&modes, plus.first().expect("validated"), &minus)?;
        out.matrix("j_minus_hz.csv", &rep.j_minus.scaled(1.0 / TWO_PI))?;
        out.matrix("delta_j_hz.csv", &rep.delta_j.scaled(1.0 / TWO_PI))?;
        report.insert("max_delta_j_hz".into(), Value::Float(rep.max_delta / TWO_PI));
        report.insert("max_relative_delta_j".into(), Value::Float(rep.max_relative));
        summary.push_str(&format!(", max relative DeltaJ = {:.2}%", 100.0 * rep.max_relative));
        if ms.optimize {
            let fit = optimize_minus_tones(&modes, &plus[0], &minus, &SearchOptions::default())?;
            let opt = table(vec![
                ("max_relative_delta_j", Value::Float(fit.report.max_relative)),
                ("evaluations", int(fit.evaluations)),
                ("minus", Value::Array(fit.tones.iter().map(|t| tone_table(&modes, t)).collect())),
            ]);
            report.insert("optimized".into(), Value::Table(opt));
            summary.push_str(&format!(" ({:.2}% after search)", 100.0 * fit.report.max_relative));
        }
    }
    out.toml("ms_report.toml", &report)?;
    Ok(summary)
}

//! Monte Carlo scenario sweeps over the experiment axes, with CSV output.
//!
//! Every (sweep value, realization) pair draws its channel from the same
//! realization-keyed stream, so all sweep values see common random channels
//! and results do not depend on scheduling or the worker count.

mod config;
mod output;

pub use config::{load_config, parse_config, render_config, KEYS};
pub use output::{emit_csv, emit_trace_csv, write_csv, write_trace_csv};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::channel::{ChannelRealization, Grouping};
use crate::error::{Error, Result};
use crate::numerics::{dft, ComplexMat, C64};
use crate::optimizer::{
    algorithm2, allocate_power, cnr_from_cfr, rate_from_cfr, sa_init, scheme_amplitude_one, scheme_random_phase,
    waterfill, DesignSolution, LinkModel, ReflectCoeffs, ScaSettings,
};
use crate::protocol::{discounted_rate, ls_estimate, ls_estimate_combined, make_zc_pilot, simulate_training};
use crate::rng::{stream, Purpose};
use crate::system::SystemConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    /// Direct-link SNR `gamma_d` in dB.
    Snr,
    /// Element count `M`, grown along `m_y` with `m_x` fixed.
    Elements,
    Alpha,
    /// `K / M`; the group tile is chosen from the array shape.
    GroupingRatio,
    CoherenceTime,
    /// Values are SA sweep counts for the initializer, 0 meaning a random start.
    ConvergenceTrace,
}

impl SweepAxis {
    const NAMES: [(&'static str, SweepAxis); 6] = [
        ("snr", SweepAxis::Snr),
        ("elements", SweepAxis::Elements),
        ("alpha", SweepAxis::Alpha),
        ("grouping_ratio", SweepAxis::GroupingRatio),
        ("coherence_time", SweepAxis::CoherenceTime),
        ("convergence_trace", SweepAxis::ConvergenceTrace),
    ];
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::NAMES
            .iter()
            .find(|(name, _)| *name == s)
            .map(|(_, axis)| *axis)
            .ok_or_else(|| Error::config("sweep_axis", format!("unknown axis `{s}`")))
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = Self::NAMES
            .iter()
            .find(|(_, a)| a == self)
            .map(|(n, _)| *n)
            .unwrap_or("?");
        f.write_str(name)
    }
}

/// Transmission schemes; the declaration order is the row order in output.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scheme {
    /// Alternating power/reflection design from an SA start.
    Iterative,
    /// The iterative design with every coefficient forced to unit amplitude.
    AmplitudeOne,
    /// SA (channel power maximization) coefficients with water-filling.
    CpmInit,
    /// Uniform random phases with water-filling on the combined link.
    RandomPhase,
    /// Direct link only.
    NoIrs,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Iterative,
        Scheme::AmplitudeOne,
        Scheme::CpmInit,
        Scheme::RandomPhase,
        Scheme::NoIrs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Iterative => "iterative",
            Scheme::AmplitudeOne => "amplitude_one",
            Scheme::CpmInit => "cpm_init",
            Scheme::RandomPhase => "random_phase",
            Scheme::NoIrs => "no_irs",
        }
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("schemes", format!("unknown scheme `{s}`")))
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CsiMode {
    /// Design and evaluation on the true channel, no training overhead.
    Perfect,
    /// Design on LS estimates, rate realized on the true channel after overhead.
    Estimated,
}

impl FromStr for CsiMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "perfect" => Ok(CsiMode::Perfect),
            "estimated" => Ok(CsiMode::Estimated),
            _ => Err(Error::config("csi_mode", format!("unknown mode `{s}`"))),
        }
    }
}

impl fmt::Display for CsiMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Estimated => "estimated",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub id: String,
    pub sweep: Option<Sweep>,
    pub schemes: Vec<Scheme>,
    pub csi_mode: CsiMode,
    pub n_realizations: usize,
    pub base: SystemConfig,
    pub settings: ScaSettings,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            id: "default".into(),
            sweep: None,
            schemes: Scheme::ALL.to_vec(),
            csi_mode: CsiMode::Perfect,
            n_realizations: 100,
            base: SystemConfig::default(),
            settings: ScaSettings::default(),
        }
    }
}

/// Group tile `(B_x, B_y)` with `B_x B_y = 1 / ratio` that divides the array,
/// preferring the squarest tile and then the smaller `B_x`.
pub fn tile_for_ratio(m_x: usize, m_y: usize, ratio: f64) -> Result<(usize, usize)> {
    let err = |reason: String| Error::config("sweep_values", reason);
    if !(ratio > 0.0 && ratio <= 1.0) {
        return Err(err(format!("grouping ratio {ratio} outside (0, 1]")));
    }
    let b = (1.0 / ratio).round();
    if (b * ratio - 1.0).abs() > 1e-9 {
        return Err(err(format!("grouping ratio {ratio} is not 1/B for an integer B")));
    }
    let b = b as usize;
    (1..=m_x)
        .filter(|&bx| m_x.is_multiple_of(bx) && b.is_multiple_of(bx) && m_y.is_multiple_of(b / bx))
        .map(|bx| (bx, b / bx))
        .min_by_key(|&(bx, by)| (bx.abs_diff(by), bx))
        .ok_or_else(|| err(format!("no {b}-element tile divides the {m_x}x{m_y} array")))
}

fn as_count(key: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
        Ok(v as usize)
    } else {
        Err(Error::config(key, format!("{v} is not a non-negative integer")))
    }
}

impl Scenario {
    /// System configuration at one sweep value.
    pub fn config_for(&self, value: f64) -> Result<SystemConfig> {
        let mut cfg = self.base.clone();
        let Some(sweep) = &self.sweep else {
            return Ok(cfg);
        };
        match sweep.axis {
            SweepAxis::Snr => cfg.snr_db = value,
            SweepAxis::Elements => {
                let m = as_count("sweep_values", value)?;
                if m == 0 || m % cfg.m_x != 0 {
                    return Err(Error::config(
                        "sweep_values",
                        format!("element count {m} is not a positive multiple of m_x = {}", cfg.m_x),
                    ));
                }
                cfg.m_y = m / cfg.m_x;
            }
            SweepAxis::Alpha => cfg.alpha = value,
            SweepAxis::GroupingRatio => {
                let (bx, by) = tile_for_ratio(cfg.m_x, cfg.m_y, value)?;
                cfg.b_x = bx;
                cfg.b_y = by;
            }
            SweepAxis::CoherenceTime => cfg.coherence_time = value,
            SweepAxis::ConvergenceTrace => {
                as_count("sweep_values", value)?;
            }
        }
        Ok(cfg)
    }

    /// Checks the scenario and every configuration its sweep implies.
    pub fn validate(&self) -> Result<()> {
        if self.n_realizations == 0 {
            return Err(Error::config("n_realizations", "must be at least 1"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "list is empty"));
        }
        self.settings.validate()?;
        let values = match &self.sweep {
            Some(s) if s.values.is_empty() => return Err(Error::config("sweep_values", "list is empty")),
            Some(s) => s.values.clone(),
            None => vec![f64::NAN],
        };
        for v in values {
            if self.sweep.is_some() && !v.is_finite() {
                return Err(Error::config("sweep_values", format!("{v} is not finite")));
            }
            let cfg = self.config_for(v)?;
            cfg.validate()?;
            if self.csi_mode == CsiMode::Estimated {
                let training = (cfg.groups() + 1) as f64 + cfg.tau_d;
                if training >= cfg.coherence_time {
                    return Err(Error::config(
                        "coherence_time",
                        format!(
                            "{} symbols leave no data time after {training} symbols of training and delay",
                            cfg.coherence_time
                        ),
                    ));
                }
            }
        }
        Ok(())
    }

    fn sweep_values(&self) -> Result<&[f64]> {
        self.sweep
            .as_ref()
            .map(|s| s.values.as_slice())
            .ok_or_else(|| Error::MissingKey("sweep_axis".into()))
    }
}

/// One scheme's outcome on one realization at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub scenario_id: String,
    pub realization_index: usize,
    pub seed: u64,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub csi_mode: CsiMode,
    pub rate_bps_hz: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `||h_d + V' phibar||^2` on the true channel.
    pub channel_power: f64,
    /// Per-subcarrier squared error of the estimated effective CFR used by the
    /// design; absent without training.
    pub mse_empirical: Option<f64>,
}

/// One point of an alternating-design rate trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub scenario_id: String,
    pub realization_index: usize,
    pub seed: u64,
    pub sweep_value: f64,
    /// `random` or `sa<I>`.
    pub init: String,
    pub iteration: usize,
    pub rate_bps_hz: f64,
}

/// Everything a scheme needs about one realization.
struct Instance {
    cfg: SystemConfig,
    h_d: Vec<C64>,
    vp: ComplexMat,
    /// Model the design runs on: the truth or the LS estimates.
    design: LinkModel,
    truth: LinkModel,
    realization: u64,
}

impl Instance {
    fn new(sc: &Scenario, cfg: SystemConfig, realization: usize) -> Result<Self> {
        let r = realization as u64;
        let real = ChannelRealization::generate(&cfg, &mut stream(cfg.seed, r, Purpose::Channel));
        let g = Grouping::from_config(&cfg)?;
        let vp = real.grouped(&g);
        let h_d = real.h_d.into_vec();
        let truth = LinkModel::new(&h_d, &vp);
        let design = match sc.csi_mode {
            CsiMode::Perfect => truth.clone(),
            CsiMode::Estimated => {
                let pilot = make_zc_pilot(cfg.n, cfg.pilot_power(), cfg.zc_root);
                let mut rng = stream(cfg.seed, r, Purpose::TrainingNoise);
                let received = simulate_training(&h_d, &vp, &pilot, cfg.sigma2, &mut rng);
                let est = ls_estimate(&received, &pilot, cfg.l, cfg.l0())?;
                LinkModel::new(&est.h_d_hat, &est.vp_hat)
            }
        };
        Ok(Self {
            cfg,
            h_d,
            vp,
            design,
            truth,
            realization: r,
        })
    }

    fn sa_start(&self, sweeps: usize) -> ReflectCoeffs {
        let mut rng = stream(self.cfg.seed, self.realization, Purpose::SaInit);
        sa_init(self.design.h_d(), self.design.vp(), sweeps, &mut rng)
    }

    fn random_start(&self) -> ReflectCoeffs {
        let mut rng = stream(self.cfg.seed, self.realization, Purpose::RandomPhase);
        scheme_random_phase(self.design.groups(), &mut rng)
    }

    /// Per-subcarrier squared error of the design model's CFR at `phibar`.
    fn cfr_error(&self, phibar: &[C64]) -> f64 {
        let a = self.design.cfr(phibar);
        let b = self.truth.cfr(phibar);
        a.iter().zip(&b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>() / a.len() as f64
    }
}

fn row(sc: &Scenario, inst: &Instance, value: f64, scheme: Scheme) -> ResultRow {
    ResultRow {
        scenario_id: sc.id.clone(),
        realization_index: inst.realization as usize,
        seed: inst.cfg.seed,
        sweep_value: value,
        scheme,
        csi_mode: sc.csi_mode,
        rate_bps_hz: 0.0,
        iterations: 0,
        converged: true,
        channel_power: 0.0,
        mse_empirical: None,
    }
}

/// Rate of a design `(p, phibar)` on the true channel: plain under perfect
/// CSI, overhead-discounted with `K + 1` training symbols otherwise.
fn evaluate(sc: &Scenario, inst: &Instance, p: &[f64], phibar: &[C64]) -> Result<f64> {
    let cfr = inst.truth.cfr(phibar);
    match sc.csi_mode {
        CsiMode::Perfect => Ok(rate_from_cfr(&cfr, p, &inst.cfg)),
        CsiMode::Estimated => discounted_rate(&cfr, p, &inst.cfg, inst.vp.cols() + 1),
    }
}

fn design_row(sc: &Scenario, inst: &Instance, value: f64, scheme: Scheme, sol: &DesignSolution) -> Result<ResultRow> {
    let phibar = sol.phibar.as_slice();
    let mut out = row(sc, inst, value, scheme);
    out.rate_bps_hz = evaluate(sc, inst, &sol.power.p, phibar)?;
    out.iterations = sol.iterations;
    out.converged = sol.converged;
    out.channel_power = inst.truth.channel_power(phibar);
    if sc.csi_mode == CsiMode::Estimated {
        out.mse_empirical = Some(inst.cfr_error(phibar));
    }
    Ok(out)
}

fn run_point(sc: &Scenario, value: f64, realization: usize) -> Result<Vec<ResultRow>> {
    let inst = Instance::new(sc, sc.config_for(value)?, realization)?;
    let cfg = &inst.cfg;
    let wants = |s: Scheme| sc.schemes.contains(&s);
    let mut rows = Vec::with_capacity(sc.schemes.len());

    let needs_sa = wants(Scheme::Iterative) || wants(Scheme::AmplitudeOne) || wants(Scheme::CpmInit);
    let start = needs_sa.then(|| inst.sa_start(cfg.i_sa));
    let iterative = if wants(Scheme::Iterative) || wants(Scheme::AmplitudeOne) {
        Some(algorithm2(
            &inst.design,
            cfg,
            start.as_ref().expect("SA start"),
            &sc.settings,
        )?)
    } else {
        None
    };

    for &scheme in &Scheme::ALL {
        if !wants(scheme) {
            continue;
        }
        let r = match scheme {
            Scheme::Iterative => design_row(sc, &inst, value, scheme, iterative.as_ref().expect("design"))?,
            Scheme::AmplitudeOne => {
                let sol = scheme_amplitude_one(iterative.as_ref().expect("design"), &inst.design, cfg)?;
                design_row(sc, &inst, value, scheme, &sol)?
            }
            Scheme::CpmInit => {
                let phibar = start.clone().expect("SA start");
                let power = allocate_power(&inst.design, phibar.as_slice(), cfg)?;
                let sol = DesignSolution {
                    power,
                    phibar,
                    objective_trace: vec![0.0],
                    converged: true,
                    iterations: 0,
                };
                design_row(sc, &inst, value, scheme, &sol)?
            }
            Scheme::RandomPhase => random_phase_row(sc, &inst, value)?,
            Scheme::NoIrs => {
                let cfr = dft(&inst.h_d).into_vec();
                let power = waterfill(&cnr_from_cfr(&cfr, cfg.noise_floor()), cfg.power())?;
                let mut r = row(sc, &inst, value, scheme);
                r.rate_bps_hz = match sc.csi_mode {
                    CsiMode::Perfect => rate_from_cfr(&cfr, &power.p, cfg),
                    CsiMode::Estimated => discounted_rate(&cfr, &power.p, cfg, 0)?,
                };
                r.channel_power = crate::numerics::norm_sqr(&inst.h_d);
                r
            }
        };
        rows.push(r);
    }
    Ok(rows)
}

/// Random phases with water-filling. Under estimated CSI only the combined
/// link is trained, with a single pilot symbol.
fn random_phase_row(sc: &Scenario, inst: &Instance, value: f64) -> Result<ResultRow> {
    let cfg = &inst.cfg;
    let phibar = inst.random_start();
    let phi = phibar.as_slice();
    let true_cfr = inst.truth.cfr(phi);
    let mut r = row(sc, inst, value, Scheme::RandomPhase);
    r.channel_power = inst.truth.channel_power(phi);
    match sc.csi_mode {
        CsiMode::Perfect => {
            let power = waterfill(&cnr_from_cfr(&true_cfr, cfg.noise_floor()), cfg.power())?;
            r.rate_bps_hz = rate_from_cfr(&true_cfr, &power.p, cfg);
        }
        CsiMode::Estimated => {
            let pilot = make_zc_pilot(cfg.n, cfg.pilot_power(), cfg.zc_root);
            let combined: Vec<C64> = {
                let refl = inst.vp.mul_vec(phi);
                inst.h_d.iter().zip(&refl).map(|(a, b)| a + b).collect()
            };
            let mut rng = stream(cfg.seed, inst.realization, Purpose::CombinedTraining);
            let none = ComplexMat::zeros(cfg.n, 0);
            let received = simulate_training(&combined, &none, &pilot, cfg.sigma2, &mut rng);
            let est = ls_estimate_combined(&received[0], &pilot, cfg.l.max(cfg.l0()))?;
            let est_cfr = dft(&est).into_vec();
            let power = waterfill(&cnr_from_cfr(&est_cfr, cfg.noise_floor()), cfg.power())?;
            r.rate_bps_hz = discounted_rate(&true_cfr, &power.p, cfg, 1)?;
            let err: f64 = est_cfr.iter().zip(&true_cfr).map(|(a, b)| (a - b).norm_sqr()).sum();
            r.mse_empirical = Some(err / cfg.n as f64);
        }
    }
    Ok(r)
}

fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.realization_index.cmp(&b.realization_index))
            .then(a.scheme.cmp(&b.scheme))
    });
}

/// Runs every (sweep value, realization) pair in parallel on the current
/// rayon pool and returns rows sorted by (sweep value, realization, scheme).
pub fn run_scenario(sc: &Scenario) -> Result<Vec<ResultRow>> {
    sc.validate()?;
    let values = sc.sweep_values()?;
    if sc.sweep.as_ref().map(|s| s.axis) == Some(SweepAxis::ConvergenceTrace) {
        return Err(Error::config(
            "sweep_axis",
            "convergence_trace produces per-iteration traces, use the trace runner",
        ));
    }
    let jobs: Vec<(f64, usize)> = values
        .iter()
        .flat_map(|&v| (0..sc.n_realizations).map(move |r| (v, r)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(v, r)| run_point(sc, v, r))
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<ResultRow> = chunks.into_iter().flatten().collect();
    sort_rows(&mut rows);
    Ok(rows)
}

/// Per-iteration rate of the alternating design. For the convergence-trace
/// axis each sweep value selects the start (`0`: random phases, `I > 0`: SA
/// with `I` sweeps); for other axes the SA start from the configuration is used.
pub fn run_trace(sc: &Scenario) -> Result<Vec<TraceRow>> {
    sc.validate()?;
    let values = sc.sweep_values()?;
    let axis = sc.sweep.as_ref().map(|s| s.axis);
    let jobs: Vec<(f64, usize)> = values
        .iter()
        .flat_map(|&v| (0..sc.n_realizations).map(move |r| (v, r)))
        .collect();
    let chunks = jobs
        .par_iter()
        .map(|&(v, r)| -> Result<Vec<TraceRow>> {
            let inst = Instance::new(sc, sc.config_for(v)?, r)?;
            let (init, start) = match axis {
                Some(SweepAxis::ConvergenceTrace) if v == 0.0 => ("random".to_string(), inst.random_start()),
                Some(SweepAxis::ConvergenceTrace) => {
                    let sweeps = v as usize;
                    (format!("sa{sweeps}"), inst.sa_start(sweeps))
                }
                _ => (format!("sa{}", inst.cfg.i_sa), inst.sa_start(inst.cfg.i_sa)),
            };
            let sol = algorithm2(&inst.design, &inst.cfg, &start, &sc.settings)?;
            Ok(sol
                .objective_trace
                .iter()
                .enumerate()
                .map(|(iteration, &rate)| TraceRow {
                    scenario_id: sc.id.clone(),
                    realization_index: r,
                    seed: inst.cfg.seed,
                    sweep_value: v,
                    init: init.clone(),
                    iteration,
                    rate_bps_hz: rate,
                })
                .collect())
        })
        .collect::<Result<Vec<_>>>()?;
    let mut rows: Vec<TraceRow> = chunks.into_iter().flatten().collect();
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then(a.realization_index.cmp(&b.realization_index))
            .then(a.iteration.cmp(&b.iteration))
    });
    Ok(rows)
}

#[cfg(test)]
mod tests;

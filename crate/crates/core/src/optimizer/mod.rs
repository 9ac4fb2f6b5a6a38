//! Joint transmit-power and reflection-coefficient design.
//!
//! Power is allocated by water-filling on the effective CFR; reflection
//! coefficients are refined by successive convex approximation (a
//! minorize-maximize loop over a concave surrogate) and the two are
//! alternated until the rate settles. Successive alignment of the
//! coefficients to maximize the effective channel power provides the
//! starting point.

mod alternating;
mod sa;
mod sca;
mod waterfill;

pub use alternating::{algorithm2, allocate_power, scheme_amplitude_one, scheme_random_phase};
pub use sa::{sa_init, sa_sweep, sa_update};
pub use sca::{affine_lower_bound, algorithm1, sca_subproblem, InnerOutcome, Surrogate};
pub use waterfill::{cnr_from_cfr, waterfill};

use crate::error::{Error, Result};
use crate::numerics::{dft, norm_sqr, ComplexMat, C64};
use crate::system::SystemConfig;

/// Slack on `|phibar_k| <= 1` for values produced by floating-point projection.
pub const MODULUS_SLACK: f64 = 1e-12;

/// Per-subcarrier transmit powers and the water level `1/c_u`.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p: Vec<f64>,
    pub water_level: f64,
}

impl PowerAllocation {
    pub fn total(&self) -> f64 {
        self.p.iter().sum()
    }
}

/// Group reflection coefficients, each inside the closed unit disc.
#[derive(Debug, Clone, PartialEq)]
pub struct ReflectCoeffs(Vec<C64>);

impl ReflectCoeffs {
    pub fn new(phibar: Vec<C64>) -> Result<Self> {
        for (k, z) in phibar.iter().enumerate() {
            if !z.is_finite() || z.norm() > 1.0 + MODULUS_SLACK {
                return Err(Error::config(
                    "phibar",
                    format!("coefficient {k} has modulus {} > 1", z.norm()),
                ));
            }
        }
        Ok(Self(phibar))
    }

    pub fn zeros(k: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); k])
    }

    /// Radial projection of arbitrary coefficients onto the unit disc.
    pub fn projected(phibar: Vec<C64>) -> Self {
        Self(phibar.into_iter().map(project_unit_disc).collect())
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.0
    }
}

pub(crate) fn project_unit_disc(z: C64) -> C64 {
    let r = z.norm();
    if r > 1.0 {
        z / r
    } else {
        z
    }
}

/// Stopping rules and step control for the SCA and alternating loops.
///
/// The projected-gradient step starts at `pg_step0` divided by the local
/// curvature of the surrogate at the expansion point and is then adapted by
/// backtracking with factor `pg_backtrack`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaSettings {
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_inner: usize,
    pub max_outer: usize,
    pub pg_step0: f64,
    pub pg_backtrack: f64,
    pub pg_tol: f64,
}

impl Default for ScaSettings {
    fn default() -> Self {
        Self {
            inner_tol: 1e-6,
            outer_tol: 1e-5,
            max_inner: 200,
            max_outer: 300,
            pg_step0: 1.0,
            pg_backtrack: 0.5,
            pg_tol: 1e-8,
        }
    }
}

impl ScaSettings {
    pub fn validate(&self) -> Result<()> {
        for (key, v) in [
            ("inner_tol", self.inner_tol),
            ("outer_tol", self.outer_tol),
            ("pg_step0", self.pg_step0),
            ("pg_tol", self.pg_tol),
        ] {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if self.max_inner == 0 {
            return Err(Error::config("max_inner", "must be at least 1"));
        }
        if self.max_outer == 0 {
            return Err(Error::config("max_outer", "must be at least 1"));
        }
        if !(self.pg_backtrack > 0.0 && self.pg_backtrack < 1.0) {
            return Err(Error::config("pg_backtrack", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

/// Output of the alternating design.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignSolution {
    pub power: PowerAllocation,
    pub phibar: ReflectCoeffs,
    /// Rate (bps/Hz) after the initial water-filling and after every outer iteration.
    pub objective_trace: Vec<f64>,
    pub converged: bool,
    pub iterations: usize,
}

impl DesignSolution {
    pub fn rate(&self) -> f64 {
        *self.objective_trace.last().expect("trace holds the initial rate")
    }
}

/// Time- and frequency-domain views of `(h_d, V')`, shared by all design steps.
#[derive(Debug, Clone)]
pub struct LinkModel {
    h_d: Vec<C64>,
    vp: ComplexMat,
    direct_cfr: Vec<C64>,
    reflect_cfr: ComplexMat,
}

impl LinkModel {
    pub fn new(h_d: &[C64], vp: &ComplexMat) -> Self {
        assert_eq!(h_d.len(), vp.rows(), "h_d and V' row counts differ");
        Self {
            h_d: h_d.to_vec(),
            vp: vp.clone(),
            direct_cfr: dft(h_d).into_vec(),
            reflect_cfr: vp.dft_columns(),
        }
    }

    pub fn subcarriers(&self) -> usize {
        self.h_d.len()
    }

    pub fn groups(&self) -> usize {
        self.vp.cols()
    }

    pub fn h_d(&self) -> &[C64] {
        &self.h_d
    }

    pub fn vp(&self) -> &ComplexMat {
        &self.vp
    }

    pub fn direct_cfr(&self) -> &[C64] {
        &self.direct_cfr
    }

    /// `F_N V'`.
    pub fn reflect_cfr(&self) -> &ComplexMat {
        &self.reflect_cfr
    }

    /// `F_N (h_d + V' phibar)`.
    pub fn cfr(&self, phibar: &[C64]) -> Vec<C64> {
        let mut v = self.reflect_cfr.mul_vec(phibar);
        v.iter_mut().zip(&self.direct_cfr).for_each(|(a, b)| *a += b);
        v
    }

    /// Sum over subcarriers of `log2(1 + |v_n|^2 p_n / (Gamma sigma2))`.
    pub fn log_sum(&self, p: &[f64], phibar: &[C64], noise_floor: f64) -> f64 {
        log_sum(&self.cfr(phibar), p, noise_floor)
    }

    pub fn channel_power(&self, phibar: &[C64]) -> f64 {
        channel_power(phibar, &self.h_d, &self.vp)
    }
}

pub fn log_sum(cfr: &[C64], p: &[f64], noise_floor: f64) -> f64 {
    assert_eq!(cfr.len(), p.len());
    cfr.iter()
        .zip(p)
        .map(|(v, &pn)| (1.0 + v.norm_sqr() * pn / noise_floor).log2())
        .sum()
}

/// Achievable rate in bps/Hz for a given CFR, before any training overhead.
pub fn rate_from_cfr(cfr: &[C64], p: &[f64], cfg: &SystemConfig) -> f64 {
    log_sum(cfr, p, cfg.noise_floor()) / (cfg.n + cfg.n_cp) as f64
}

/// Achievable rate with grouped reflection, `(1/(N+N_CP)) sum_n log2(1 + |v_n|^2 p_n / (Gamma sigma2))`.
pub fn rate(p: &[f64], phibar: &[C64], h_d: &[C64], vp: &ComplexMat, cfg: &SystemConfig) -> f64 {
    let cfr = crate::channel::effective_cfr(h_d, vp, phibar);
    rate_from_cfr(&cfr, p, cfg)
}

/// Effective channel power `||h_d + V' phibar||^2`.
pub fn channel_power(phibar: &[C64], h_d: &[C64], vp: &ComplexMat) -> f64 {
    let refl = vp.mul_vec(phibar);
    let total: Vec<C64> = h_d.iter().zip(&refl).map(|(a, b)| a + b).collect();
    norm_sqr(&total)
}

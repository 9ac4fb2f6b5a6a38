use std::f64::consts::TAU;

use rand::Rng;

use crate::error::Result;
use crate::numerics::C64;
use crate::system::SystemConfig;

use super::sca::algorithm1;
use super::waterfill::{cnr_from_cfr, waterfill};
use super::{log_sum, DesignSolution, LinkModel, PowerAllocation, ReflectCoeffs, ScaSettings};

/// Water-filling of the full power budget on the CFR produced by `phibar`.
pub fn allocate_power(model: &LinkModel, phibar: &[C64], cfg: &SystemConfig) -> Result<PowerAllocation> {
    waterfill(&cnr_from_cfr(&model.cfr(phibar), cfg.noise_floor()), cfg.power())
}

fn rate_of(model: &LinkModel, power: &PowerAllocation, phibar: &[C64], cfg: &SystemConfig) -> f64 {
    log_sum(&model.cfr(phibar), &power.p, cfg.noise_floor()) / (cfg.n + cfg.n_cp) as f64
}

/// Alternates water-filling for fixed coefficients with the SCA coefficient
/// update for fixed powers until the rate's relative change falls below
/// `outer_tol`. The rate trace starts with the water-filled `init`.
pub fn algorithm2(
    model: &LinkModel,
    cfg: &SystemConfig,
    init: &ReflectCoeffs,
    settings: &ScaSettings,
) -> Result<DesignSolution> {
    let mut phibar = init.as_slice().to_vec();
    let mut power = allocate_power(model, &phibar, cfg)?;
    let mut rate = rate_of(model, &power, &phibar, cfg);
    let mut trace = vec![rate];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < settings.max_outer {
        iterations += 1;
        let inner = algorithm1(&phibar, &power.p, model, cfg.noise_floor(), settings);
        let next_phibar = inner.phibar.into_vec();
        let next_power = allocate_power(model, &next_phibar, cfg)?;
        let next_rate = rate_of(model, &next_power, &next_phibar, cfg);
        if next_rate < rate {
            trace.push(rate);
            converged = true;
            break;
        }
        let rel = (next_rate - rate) / rate.abs().max(f64::MIN_POSITIVE);
        phibar = next_phibar;
        power = next_power;
        rate = next_rate;
        trace.push(rate);
        if rel <= settings.outer_tol {
            converged = true;
            break;
        }
    }

    Ok(DesignSolution {
        power,
        phibar: ReflectCoeffs(phibar),
        objective_trace: trace,
        converged,
        iterations,
    })
}

/// I.i.d. uniform phases with unit amplitude.
pub fn scheme_random_phase<R: Rng + ?Sized>(k: usize, rng: &mut R) -> ReflectCoeffs {
    ReflectCoeffs(
        (0..k)
            .map(|_| C64::from_polar(1.0, rng.random_range(0.0..TAU)))
            .collect(),
    )
}

/// Forces every coefficient of `sol` to unit amplitude (zero becomes phase 0)
/// and re-runs water-filling. The trace holds only the resulting rate.
pub fn scheme_amplitude_one(sol: &DesignSolution, model: &LinkModel, cfg: &SystemConfig) -> Result<DesignSolution> {
    let phibar: Vec<C64> = sol
        .phibar
        .as_slice()
        .iter()
        .map(|z| {
            let r = z.norm();
            if r == 0.0 {
                C64::new(1.0, 0.0)
            } else {
                z / r
            }
        })
        .collect();
    let power = allocate_power(model, &phibar, cfg)?;
    let rate = rate_of(model, &power, &phibar, cfg);
    Ok(DesignSolution {
        power,
        phibar: ReflectCoeffs(phibar),
        objective_trace: vec![rate],
        converged: sol.converged,
        iterations: sol.iterations,
    })
}

use crate::error::{Error, Result};
use crate::numerics::C64;

use super::PowerAllocation;

/// Effective channel-to-noise ratios `|v_n|^2 / (Gamma sigma2)`.
pub fn cnr_from_cfr(cfr: &[C64], noise_floor: f64) -> Vec<f64> {
    cfr.iter().map(|v| v.norm_sqr() / noise_floor).collect()
}

/// Water-filling over parallel subcarriers: `p_n = (1/c_u - 1/c_n)^+` with the
/// level chosen so that the powers sum to `total`.
///
/// The active set is found exactly by sorting the inverse CNRs; subcarriers
/// with zero CNR never receive power.
pub fn waterfill(cnr: &[f64], total: f64) -> Result<PowerAllocation> {
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::config("power", format!("total power {total} must be positive")));
    }
    if let Some(bad) = cnr.iter().find(|c| !(c.is_finite() && **c >= 0.0)) {
        return Err(Error::config(
            "cnr",
            format!("{bad} is not a finite non-negative ratio"),
        ));
    }
    let mut inv: Vec<f64> = cnr.iter().filter(|&&c| c > 0.0).map(|c| 1.0 / c).collect();
    if inv.is_empty() {
        return Err(Error::NoUsableSubcarrier);
    }
    inv.sort_by(|a, b| a.total_cmp(b));

    // The active set is a prefix of the sorted inverse CNRs; grow it while
    // the resulting level stays above the next inverse CNR.
    let mut prefix = 0.0;
    let mut level = f64::NAN;
    for (m, &x) in inv.iter().enumerate() {
        let candidate = (total + prefix + x) / (m + 1) as f64;
        if m > 0 && candidate <= x {
            break;
        }
        prefix += x;
        level = candidate;
    }

    let p = cnr
        .iter()
        .map(|&c| if c > 0.0 { (level - 1.0 / c).max(0.0) } else { 0.0 })
        .collect();
    Ok(PowerAllocation { p, water_level: level })
}

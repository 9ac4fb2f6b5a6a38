use crate::error::{Error, Result};

/// Angle of arrival of the LoS ray at the IRS, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aoa {
    pub elevation: f64,
    pub azimuth: f64,
}

/// Every scenario parameter of one simulated link.
///
/// Powers and ratios are linear. The data power `P` and training power `P_t`
/// are derived from the reference SNR `gamma_d = P / (N sigma2)` and the
/// pilot-to-data power ratio, see [`SystemConfig::power`] and
/// [`SystemConfig::pilot_power`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// Subcarriers.
    pub n: usize,
    /// Cyclic prefix length in samples.
    pub n_cp: usize,
    /// Direct-link taps.
    pub l: usize,
    /// BS-IRS taps.
    pub l1: usize,
    /// IRS-user taps.
    pub l2: usize,
    pub m_x: usize,
    pub m_y: usize,
    /// Group tile size along `m_x`.
    pub b_x: usize,
    /// Group tile size along `m_y`.
    pub b_y: usize,
    /// LoS-to-NLoS power ratio of the BS-IRS link.
    pub zeta_bi: f64,
    /// LoS-to-NLoS power ratio of the IRS-user link.
    pub zeta_iu: f64,
    /// Reflected (per element) to direct link power ratio.
    pub alpha: f64,
    /// SNR gap.
    pub gamma: f64,
    /// Per-subcarrier noise variance.
    pub sigma2: f64,
    /// Direct-link reference SNR in dB.
    pub snr_db: f64,
    /// Training power over data power, `P_t / P`.
    pub pilot_power_ratio: f64,
    /// Coherence time in OFDM symbols.
    pub coherence_time: f64,
    /// Processing and feedback delay in OFDM symbols.
    pub tau_d: f64,
    /// IRS-user LoS arrival angles; drawn per realization when `None`.
    pub user_aoa: Option<Aoa>,
    /// BS-IRS LoS arrival angles; drawn per realization when `None`.
    pub bs_aoa: Option<Aoa>,
    /// Element spacing in meters.
    pub spacing: f64,
    /// Carrier wavelength in meters.
    pub wavelength: f64,
    pub seed: u64,
    /// Zadoff-Chu root index.
    pub zc_root: usize,
    /// Successive-alignment sweeps used by the initializer.
    pub i_sa: usize,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            n: 64,
            n_cp: 16,
            l: 16,
            l1: 4,
            l2: 13,
            m_x: 5,
            m_y: 4,
            b_x: 1,
            b_y: 1,
            zeta_bi: db_to_linear(3.0),
            zeta_iu: db_to_linear(-20.0),
            alpha: 0.1,
            gamma: db_to_linear(8.8),
            sigma2: 1.0,
            snr_db: 5.0,
            pilot_power_ratio: 20.0,
            coherence_time: 900.0,
            tau_d: 0.0,
            user_aoa: None,
            bs_aoa: None,
            spacing: 0.01,
            wavelength: 0.0857,
            seed: 1,
            zc_root: 1,
            i_sa: 10,
        }
    }
}

impl SystemConfig {
    pub fn m(&self) -> usize {
        self.m_x * self.m_y
    }

    /// Taps of the composite reflected channel, `L1 + L2 - 1`.
    pub fn l0(&self) -> usize {
        self.l1 + self.l2 - 1
    }

    pub fn group_size(&self) -> usize {
        self.b_x * self.b_y
    }

    pub fn groups(&self) -> usize {
        self.m() / self.group_size()
    }

    /// Total data power `P = gamma_d * N * sigma2` (direct-link power is 1).
    pub fn power(&self) -> f64 {
        db_to_linear(self.snr_db) * self.n as f64 * self.sigma2
    }

    /// Power of one training OFDM symbol.
    pub fn pilot_power(&self) -> f64 {
        self.pilot_power_ratio * self.power()
    }

    /// `Gamma * sigma2`, the denominator inside every log term.
    pub fn noise_floor(&self) -> f64 {
        self.gamma * self.sigma2
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("n", self.n),
            ("l", self.l),
            ("l1", self.l1),
            ("l2", self.l2),
            ("m_x", self.m_x),
            ("m_y", self.m_y),
            ("b_x", self.b_x),
            ("b_y", self.b_y),
            ("zc_root", self.zc_root),
            ("i_sa", self.i_sa),
        ];
        for (key, v) in positive {
            if v == 0 {
                return Err(Error::config(key, "must be at least 1"));
            }
        }
        let l0 = self.l0();
        if self.l > l0 {
            return Err(Error::config(
                "l",
                format!("direct taps {} exceed reflected taps L1+L2-1 = {l0}", self.l),
            ));
        }
        if self.n_cp < self.l.max(l0) {
            return Err(Error::config(
                "n_cp",
                format!("{} is shorter than max(L, L1+L2-1) = {}", self.n_cp, self.l.max(l0)),
            ));
        }
        if self.n < self.l.max(l0) {
            return Err(Error::config("n", "fewer subcarriers than channel taps"));
        }
        if !self.m_x.is_multiple_of(self.b_x) {
            return Err(Error::config(
                "b_x",
                format!("{} does not divide m_x = {}", self.b_x, self.m_x),
            ));
        }
        if !self.m_y.is_multiple_of(self.b_y) {
            return Err(Error::config(
                "b_y",
                format!("{} does not divide m_y = {}", self.b_y, self.m_y),
            ));
        }
        let strictly_positive = [
            ("zeta_bi", self.zeta_bi),
            ("zeta_iu", self.zeta_iu),
            ("sigma2", self.sigma2),
            ("pilot_power_ratio", self.pilot_power_ratio),
            ("coherence_time", self.coherence_time),
            ("spacing", self.spacing),
            ("wavelength", self.wavelength),
        ];
        for (key, v) in strictly_positive {
            if v.is_nan() || v <= 0.0 {
                return Err(Error::config(key, format!("{v} must be positive")));
            }
        }
        if !self.alpha.is_finite() || self.alpha < 0.0 {
            return Err(Error::config("alpha", "must be finite and non-negative"));
        }
        if !self.tau_d.is_finite() || self.tau_d < 0.0 {
            return Err(Error::config("tau_d", "must be finite and non-negative"));
        }
        if !self.snr_db.is_finite() {
            return Err(Error::config("snr_db", "must be finite"));
        }
        if self.gamma.is_nan() || self.gamma < 1.0 || !self.gamma.is_finite() {
            return Err(Error::config("gamma", "SNR gap must be at least 1 (0 dB)"));
        }
        if gcd(self.zc_root, self.n) != 1 {
            return Err(Error::config(
                "zc_root",
                format!("{} is not coprime with n = {}", self.zc_root, self.n),
            ));
        }
        for (key, aoa) in [("psi_e", self.user_aoa), ("psi_e_bs", self.bs_aoa)] {
            if let Some(a) = aoa {
                if !a.elevation.is_finite() || !a.azimuth.is_finite() {
                    return Err(Error::config(key, "angles must be finite"));
                }
            }
        }
        Ok(())
    }
}

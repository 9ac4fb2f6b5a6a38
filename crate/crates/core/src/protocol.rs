//! Training, estimation and rate accounting of the transmission protocol.
//!
//! Each coherence block starts with `K + 1` pilot OFDM symbols: one with
//! every IRS element off and one per group with only that group on. The
//! receiver forms LS estimates of the direct CIR and of each group's
//! composite reflected CIR, the design runs on those estimates, and data is
//! sent for the remainder of the block.

use std::f64::consts::PI;

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{cscg, dft, idft, ComplexMat, ComplexVec, C64};
use crate::optimizer::log_sum;
use crate::system::SystemConfig;

/// Smallest pilot magnitude still treated as invertible.
const PILOT_FLOOR: f64 = 1e-12;

/// Frequency-domain pilot symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct PilotSignal {
    pub x_p: Vec<C64>,
    /// `|x_p[n]|^2`, i.e. `P_t / N`.
    pub per_tone_power: f64,
}

/// Zadoff-Chu pilot with root `root` and symbol power `p_t`.
pub fn make_zc_pilot(n: usize, p_t: f64, root: usize) -> PilotSignal {
    let amp = (p_t / n as f64).sqrt();
    let modulus = 2 * n as u128;
    let x_p = (0..n as u128)
        .map(|i| {
            let q = if n.is_multiple_of(2) { i * i } else { i * (i + 1) };
            // Reduce the exponent mod 2N before scaling to keep the phase exact.
            let e = (root as u128 % modulus) * (q % modulus) % modulus;
            C64::from_polar(amp, -PI * e as f64 / n as f64)
        })
        .collect();
    PilotSignal {
        x_p,
        per_tone_power: p_t / n as f64,
    }
}

/// LS estimates with the taps beyond `L` (direct) and `L0` (reflected) zeroed.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelEstimate {
    pub h_d_hat: ComplexVec,
    pub vp_hat: ComplexMat,
}

impl ChannelEstimate {
    pub fn groups(&self) -> usize {
        self.vp_hat.cols()
    }
}

fn noisy<R: Rng + ?Sized>(clean: &[C64], sigma2: f64, rng: &mut R) -> Vec<C64> {
    if sigma2 == 0.0 {
        return clean.to_vec();
    }
    clean.iter().map(|s| s + cscg(rng, sigma2)).collect()
}

fn modulate(pilot: &PilotSignal, cir: &[C64]) -> Vec<C64> {
    pilot.x_p.iter().zip(dft(cir).iter()).map(|(x, h)| x * h).collect()
}

/// Received training symbols `s_0, ..., s_K`: `s_0 = X_p F h_d + n_0` with all
/// groups off and `s_k = X_p F (h_d + nu'_k) + n_k` with only group `k` on.
pub fn simulate_training<R: Rng + ?Sized>(
    h_d: &[C64],
    vp: &ComplexMat,
    pilot: &PilotSignal,
    sigma2: f64,
    rng: &mut R,
) -> Vec<Vec<C64>> {
    clean_training(h_d, vp, pilot)
        .iter()
        .map(|s| noisy(s, sigma2, rng))
        .collect()
}

fn clean_training(h_d: &[C64], vp: &ComplexMat, pilot: &PilotSignal) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(vp.cols() + 1);
    out.push(modulate(pilot, h_d));
    for col in vp.columns() {
        let cir: Vec<C64> = h_d.iter().zip(col).map(|(a, b)| a + b).collect();
        out.push(modulate(pilot, &cir));
    }
    out
}

fn check_pilot(pilot: &PilotSignal) -> Result<()> {
    for (index, x) in pilot.x_p.iter().enumerate() {
        if x.norm().is_nan() || x.norm() < PILOT_FLOOR {
            return Err(Error::PilotNotInvertible {
                index,
                magnitude: x.norm(),
            });
        }
    }
    Ok(())
}

/// `(1/N) F^H X_p^{-1} s`, the untruncated time-domain LS estimate.
fn deconvolve(s: &[C64], pilot: &PilotSignal) -> Vec<C64> {
    let eq: Vec<C64> = s.iter().zip(&pilot.x_p).map(|(a, x)| a / x).collect();
    idft(&eq).into_vec()
}

fn truncate(mut x: Vec<C64>, taps: usize) -> Vec<C64> {
    x.iter_mut().skip(taps).for_each(|t| *t = C64::new(0.0, 0.0));
    x
}

/// LS estimates from the `K + 1` received training symbols.
pub fn ls_estimate(received: &[Vec<C64>], pilot: &PilotSignal, l: usize, l0: usize) -> Result<ChannelEstimate> {
    if l > l0 {
        return Err(Error::Truncation { l, l0 });
    }
    let n = pilot.x_p.len();
    if l0 > n {
        return Err(Error::Dimension(format!("L0={l0} exceeds N={n}")));
    }
    let Some((first, rest)) = received.split_first() else {
        return Err(Error::Dimension("no training symbols".into()));
    };
    if let Some(bad) = received.iter().find(|s| s.len() != n) {
        return Err(Error::Dimension(format!(
            "training symbol of length {} for N={n}",
            bad.len()
        )));
    }
    check_pilot(pilot)?;

    let h_d_hat = truncate(deconvolve(first, pilot), l);
    let columns: Vec<Vec<C64>> = rest
        .iter()
        .map(|s| {
            let combined = deconvolve(s, pilot);
            let diff = combined.iter().zip(&h_d_hat).map(|(a, b)| a - b).collect();
            truncate(diff, l0)
        })
        .collect();
    Ok(ChannelEstimate {
        h_d_hat: ComplexVec::new(h_d_hat)?,
        vp_hat: ComplexMat::from_columns(n, &columns)?,
    })
}

/// LS estimate of a single combined CIR from one pilot symbol, truncated to `taps`.
pub fn ls_estimate_combined(received: &[C64], pilot: &PilotSignal, taps: usize) -> Result<ComplexVec> {
    if received.len() != pilot.x_p.len() {
        return Err(Error::Dimension(format!(
            "training symbol of length {} for N={}",
            received.len(),
            pilot.x_p.len()
        )));
    }
    check_pilot(pilot)?;
    ComplexVec::new(truncate(deconvolve(received, pilot), taps))
}

/// Upper bound `sigma2 ((K+1) L + K L0) / P_t` on the estimation MSE.
pub fn mse_bound(cfg: &SystemConfig, k: usize) -> f64 {
    cfg.sigma2 * ((k + 1) * cfg.l + k * cfg.l0()) as f64 / cfg.pilot_power()
}

/// Monte Carlo estimate of the per-subcarrier MSE of the estimated effective
/// CFR, `(1/N) E||F_N (h_d + V' phibar - h_d_hat - V'_hat phibar)||^2`, over
/// `draws` independent training-noise realizations.
pub fn empirical_mse<R: Rng + ?Sized>(
    h_d: &[C64],
    vp: &ComplexMat,
    phibar: &[C64],
    pilot: &PilotSignal,
    cfg: &SystemConfig,
    draws: usize,
    rng: &mut R,
) -> Result<f64> {
    if draws < 1 {
        return Err(Error::InvalidDraws);
    }
    let clean = clean_training(h_d, vp, pilot);
    let truth: Vec<C64> = {
        let refl = vp.mul_vec(phibar);
        h_d.iter().zip(&refl).map(|(a, b)| a + b).collect()
    };
    let n = h_d.len() as f64;
    let mut acc = 0.0;
    for _ in 0..draws {
        let received: Vec<Vec<C64>> = clean.iter().map(|s| noisy(s, cfg.sigma2, rng)).collect();
        let est = ls_estimate(&received, pilot, cfg.l, cfg.l0())?;
        let refl = est.vp_hat.mul_vec(phibar);
        let err: Vec<C64> = truth
            .iter()
            .zip(est.h_d_hat.iter())
            .zip(&refl)
            .map(|((t, h), r)| t - h - r)
            .collect();
        acc += dft(&err).norm_sqr() / n;
    }
    Ok(acc / draws as f64)
}

/// Fraction of the coherence block left for data, `1 - (T_p + tau_D) / T_c`.
pub fn overhead_factor(cfg: &SystemConfig, training_symbols: usize) -> Result<f64> {
    let overhead = training_symbols as f64 + cfg.tau_d;
    if overhead >= cfg.coherence_time {
        return Err(Error::NoDataTime {
            overhead,
            coherence: cfg.coherence_time,
        });
    }
    Ok(1.0 - overhead / cfg.coherence_time)
}

/// Rate on `cfr` discounted by `training_symbols` symbols of overhead.
pub fn discounted_rate(cfr: &[C64], p: &[f64], cfg: &SystemConfig, training_symbols: usize) -> Result<f64> {
    let factor = overhead_factor(cfg, training_symbols)?;
    Ok(factor * log_sum(cfr, p, cfg.noise_floor()) / (cfg.n + cfg.n_cp) as f64)
}

/// Rate promised by the estimates, with `T_p = K + 1`.
pub fn protocol_rate(p: &[f64], phibar: &[C64], est: &ChannelEstimate, cfg: &SystemConfig) -> Result<f64> {
    let cfr = crate::channel::effective_cfr(&est.h_d_hat, &est.vp_hat, phibar);
    discounted_rate(&cfr, p, cfg, est.groups() + 1)
}

/// Rate actually delivered on the true channel `(h_d, V')` by a design made
/// from `K`-group estimates, with `T_p = K + 1`.
pub fn realized_rate(p: &[f64], phibar: &[C64], h_d: &[C64], vp: &ComplexMat, cfg: &SystemConfig) -> Result<f64> {
    let cfr = crate::channel::effective_cfr(h_d, vp, phibar);
    discounted_rate(&cfr, p, cfg, vp.cols() + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::Grouping;
    use crate::ChannelRealization;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(seed: u64, cfg: &SystemConfig) -> (Vec<C64>, ComplexMat, PilotSignal) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let real = ChannelRealization::generate(cfg, &mut rng);
        let g = Grouping::from_config(cfg).unwrap();
        let pilot = make_zc_pilot(cfg.n, cfg.pilot_power(), cfg.zc_root);
        let vp = real.grouped(&g);
        (real.h_d.into_vec(), vp, pilot)
    }

    #[test]
    fn zc_has_constant_modulus_and_ideal_autocorrelation() {
        let p = make_zc_pilot(4, 4.0, 1);
        assert!(p.x_p.iter().all(|x| (x.norm() - 1.0).abs() < 1e-15));

        let cfg = SystemConfig::default();
        let p_t = cfg.pilot_power();
        let p = make_zc_pilot(64, p_t, 1);
        assert!((p.per_tone_power - 20.0 * cfg.power() / 64.0).abs() < 1e-12);
        for lag in 1..64 {
            let acc: C64 = (0..64).map(|i| p.x_p[i] * p.x_p[(i + lag) % 64].conj()).sum();
            assert!(acc.norm() <= 1e-9 * p_t, "lag {lag}: {}", acc.norm());
        }
        let odd = make_zc_pilot(63, 63.0, 5);
        for lag in 1..63 {
            let acc: C64 = (0..63).map(|i| odd.x_p[i] * odd.x_p[(i + lag) % 63].conj()).sum();
            assert!(acc.norm() <= 1e-9 * 63.0);
        }
    }

    #[test]
    fn noiseless_training_and_exact_recovery() {
        let cfg = SystemConfig::default();
        let (h_d, vp, pilot) = setup(1, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let s = simulate_training(&h_d, &vp, &pilot, 0.0, &mut rng);
        assert_eq!(s.len(), vp.cols() + 1);
        let expect = modulate(&pilot, vp.col(0));
        for ((a, b), e) in s[1].iter().zip(&s[0]).zip(&expect) {
            assert!((a - b - e).norm() < 1e-12);
        }
        let est = ls_estimate(&s, &pilot, cfg.l, cfg.l0()).unwrap();
        for (a, b) in est.h_d_hat.iter().zip(&h_d) {
            assert!((a - b).norm() < 1e-10);
        }
        for k in 0..vp.cols() {
            for (a, b) in est.vp_hat.col(k).iter().zip(vp.col(k)) {
                assert!((a - b).norm() < 1e-10);
            }
        }

        let zero = vec![C64::new(0.0, 0.0); cfg.n];
        let s = simulate_training(&zero, &ComplexMat::zeros(cfg.n, 2), &pilot, 0.0, &mut rng);
        assert!(s.iter().all(|x| x.iter().all(|z| z.norm() == 0.0)));
    }

    #[test]
    fn identical_symbols_give_zero_reflection_estimate() {
        let pilot = make_zc_pilot(16, 16.0, 1);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h: Vec<C64> = (0..16)
            .map(|t| {
                if t < 4 {
                    cscg(&mut rng, 0.25)
                } else {
                    C64::new(0.0, 0.0)
                }
            })
            .collect();
        let s0 = modulate(&pilot, &h);
        let est = ls_estimate(&[s0.clone(), s0.clone(), s0], &pilot, 4, 6).unwrap();
        assert!(est.vp_hat.columns().all(|c| c.iter().all(|z| z.norm() < 1e-14)));
    }

    #[test]
    fn training_noise_has_the_requested_variance() {
        let cfg = SystemConfig::default();
        let (h_d, _, pilot) = setup(4, &cfg);
        let clean = modulate(&pilot, &h_d);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let draws = 10_000;
        let mut acc = vec![0.0; cfg.n];
        for _ in 0..draws {
            let s = simulate_training(&h_d, &ComplexMat::zeros(cfg.n, 0), &pilot, 0.1, &mut rng);
            for (a, (x, c)) in acc.iter_mut().zip(s[0].iter().zip(&clean)) {
                *a += (x - c).norm_sqr();
            }
        }
        for a in acc {
            let var = a / draws as f64;
            assert!((0.097..=0.103).contains(&var), "{var}");
        }
    }

    #[test]
    fn estimate_errors() {
        let pilot = make_zc_pilot(8, 8.0, 1);
        let s = vec![vec![C64::new(1.0, 0.0); 8]];
        assert!(matches!(ls_estimate(&s, &pilot, 5, 4), Err(Error::Truncation { .. })));
        let mut bad = pilot.clone();
        bad.x_p[3] = C64::new(1e-13, 0.0);
        assert!(matches!(
            ls_estimate(&s, &bad, 2, 4),
            Err(Error::PilotNotInvertible { index: 3, .. })
        ));
    }

    /// Complex least squares via the normal equations and Gaussian elimination.
    fn normal_equations_ls(a: &[Vec<C64>], s: &[C64]) -> Vec<C64> {
        let cols = a[0].len();
        let mut m = vec![vec![C64::new(0.0, 0.0); cols + 1]; cols];
        for i in 0..cols {
            for j in 0..cols {
                m[i][j] = a.iter().map(|row| row[i].conj() * row[j]).sum();
            }
            m[i][cols] = a.iter().zip(s).map(|(row, y)| row[i].conj() * y).sum();
        }
        for c in 0..cols {
            let piv = (c..cols)
                .max_by(|&x, &y| m[x][c].norm().total_cmp(&m[y][c].norm()))
                .unwrap();
            m.swap(c, piv);
            for r in 0..cols {
                if r != c {
                    let f = m[r][c] / m[c][c];
                    for j in c..=cols {
                        let v = m[c][j];
                        m[r][j] -= f * v;
                    }
                }
            }
        }
        (0..cols).map(|i| m[i][cols] / m[i][i]).collect()
    }

    #[test]
    fn direct_estimate_matches_least_squares_oracle() {
        let cfg = SystemConfig::default();
        let (h_d, vp, pilot) = setup(6, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = simulate_training(&h_d, &vp, &pilot, 1.0, &mut rng);
        let est = ls_estimate(&s, &pilot, cfg.l, cfg.l0()).unwrap();
        let n = cfg.n;
        let a: Vec<Vec<C64>> = (0..n)
            .map(|row| {
                (0..cfg.l)
                    .map(|t| pilot.x_p[row] * C64::from_polar(1.0, -2.0 * PI * (row * t) as f64 / n as f64))
                    .collect()
            })
            .collect();
        let oracle = normal_equations_ls(&a, &s[0]);
        for t in 0..cfg.l {
            assert!((est.h_d_hat[t] - oracle[t]).norm() < 1e-10);
        }
        assert!(est.h_d_hat.iter().skip(cfg.l).all(|z| *z == C64::new(0.0, 0.0)));
    }

    #[test]
    fn direct_estimate_is_unbiased() {
        let cfg = SystemConfig {
            snr_db: -10.0,
            ..SystemConfig::default()
        };
        let (h_d, _, pilot) = setup(8, &cfg);
        let none = ComplexMat::zeros(cfg.n, 0);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let draws = 2000;
        let mut mean = vec![C64::new(0.0, 0.0); cfg.l];
        for _ in 0..draws {
            let s = simulate_training(&h_d, &none, &pilot, cfg.sigma2, &mut rng);
            let est = ls_estimate(&s, &pilot, cfg.l, cfg.l0()).unwrap();
            for (m, e) in mean.iter_mut().zip(est.h_d_hat.iter()) {
                *m += e / draws as f64;
            }
        }
        // Per-tap error variance sigma2 / P_t split evenly over real and imaginary parts.
        let se = (cfg.sigma2 / cfg.pilot_power() / 2.0 / draws as f64).sqrt();
        for (m, h) in mean.iter().zip(&h_d) {
            assert!((m.re - h.re).abs() <= 3.0 * se + 1e-15);
            assert!((m.im - h.im).abs() <= 3.0 * se + 1e-15);
        }
    }

    #[test]
    fn mse_bound_examples() {
        let cfg = SystemConfig::default();
        assert!((mse_bound(&cfg, 0) - cfg.sigma2 * cfg.l as f64 / cfg.pilot_power()).abs() < 1e-18);
        let custom = SystemConfig {
            sigma2: 0.1,
            snr_db: 0.0,
            ..SystemConfig::default()
        };
        assert!((custom.pilot_power() - 128.0).abs() < 1e-12);
        assert!((mse_bound(&custom, 4) - 0.1125).abs() < 1e-12);
        let doubled = SystemConfig {
            pilot_power_ratio: 40.0,
            ..custom.clone()
        };
        assert!((mse_bound(&doubled, 4) - mse_bound(&custom, 4) / 2.0).abs() < 1e-15);
    }

    /// Exact MSE of the combined estimate: the direct-link error enters with
    /// weight `|1 - sum phibar|^2` over `L` taps and each group's error with
    /// weight `|phibar_k|^2` over `L0` taps.
    fn analytic_mse(cfg: &SystemConfig, phibar: &[C64]) -> f64 {
        let s: C64 = phibar.iter().sum();
        let direct = (C64::new(1.0, 0.0) - s).norm_sqr() * cfg.l as f64;
        let refl: f64 = phibar.iter().map(|z| z.norm_sqr()).sum::<f64>() * cfg.l0() as f64;
        cfg.sigma2 * (direct + refl) / cfg.pilot_power()
    }

    #[test]
    fn empirical_mse_matches_analytic_value() {
        let cfg = SystemConfig {
            b_x: 5,
            b_y: 2,
            ..SystemConfig::default()
        };
        let (h_d, vp, pilot) = setup(10, &cfg);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let zero = vec![C64::new(0.0, 0.0); vp.cols()];
        let mse0 = empirical_mse(&h_d, &vp, &zero, &pilot, &cfg, 2000, &mut rng).unwrap();
        let target = cfg.sigma2 * cfg.l as f64 / cfg.pilot_power();
        assert!((mse0 / target - 1.0).abs() < 0.1, "{mse0} vs {target}");

        let phibar = vec![C64::from_polar(1.0, 0.4), C64::from_polar(1.0, 2.9)];
        let mse = empirical_mse(&h_d, &vp, &phibar, &pilot, &cfg, 2000, &mut rng).unwrap();
        let exact = analytic_mse(&cfg, &phibar);
        assert!((mse / exact - 1.0).abs() < 0.1, "{mse} vs {exact}");

        let quiet = SystemConfig {
            sigma2: 0.0,
            ..cfg.clone()
        };
        assert!(empirical_mse(&h_d, &vp, &phibar, &pilot, &quiet, 3, &mut rng).unwrap() < 1e-25);
        assert!(matches!(
            empirical_mse(&h_d, &vp, &phibar, &pilot, &cfg, 0, &mut rng),
            Err(Error::InvalidDraws)
        ));
    }

    #[test]
    fn overhead_accounting() {
        let cfg = SystemConfig {
            coherence_time: 100.0,
            tau_d: 0.0,
            ..SystemConfig::default()
        };
        assert!((overhead_factor(&cfg, 10).unwrap() - 0.9).abs() < 1e-15);
        assert!(matches!(overhead_factor(&cfg, 100), Err(Error::NoDataTime { .. })));
        for k in 1..50 {
            assert!(overhead_factor(&cfg, k + 1).unwrap() < overhead_factor(&cfg, k).unwrap());
        }

        let (h_d, vp, _) = setup(12, &cfg);
        let k = vp.cols();
        let est = ChannelEstimate {
            h_d_hat: ComplexVec::new(h_d.clone()).unwrap(),
            vp_hat: vp.clone(),
        };
        let phibar = vec![C64::new(1.0, 0.0); k];
        let p = vec![cfg.power() / cfg.n as f64; cfg.n];
        assert_eq!(protocol_rate(&vec![0.0; cfg.n], &phibar, &est, &cfg).unwrap(), 0.0);
        let a = protocol_rate(&p, &phibar, &est, &cfg).unwrap();
        let b = realized_rate(&p, &phibar, &h_d, &vp, &cfg).unwrap();
        assert_eq!(a, b);

        let long = SystemConfig {
            coherence_time: 1e15,
            ..cfg.clone()
        };
        let ideal = crate::optimizer::rate(&p, &phibar, &h_d, &vp, &long);
        assert!((protocol_rate(&p, &phibar, &est, &long).unwrap() - ideal).abs() < 1e-9);

        let off = vec![C64::new(0.0, 0.0); k];
        let direct = log_sum(&dft(&h_d), &p, cfg.noise_floor()) / (cfg.n + cfg.n_cp) as f64;
        let factor = 1.0 - (k + 1) as f64 / 100.0;
        assert!((realized_rate(&p, &off, &h_d, &vp, &cfg).unwrap() - factor * direct).abs() < 1e-12);
    }
}

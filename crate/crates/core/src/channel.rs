//! Random channel realizations, IRS element grouping and effective CFRs.
//!
//! Elements are indexed row-major over the `m_x x m_y` grid, i.e. element
//! `(m_x, m_y)` (1-based) has index `(m_x - 1) * M_y + (m_y - 1)`, which is
//! also its column in the composite channel matrix `V`.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{cscg, dft, linear_convolve, ComplexMat, ComplexVec, C64};
use crate::system::{Aoa, SystemConfig};

/// Partition of the IRS into `K` equal rectangular tiles of `b_x x b_y` elements.
#[derive(Debug, Clone, PartialEq)]
pub struct Grouping {
    m_x: usize,
    m_y: usize,
    b_x: usize,
    b_y: usize,
    /// Group of each element (grid order).
    assignment: Vec<usize>,
    /// Element indices relabeled so each group is contiguous: group `k` owns
    /// `order[k*B .. (k+1)*B]`.
    order: Vec<usize>,
}

impl Grouping {
    pub fn new(m_x: usize, m_y: usize, b_x: usize, b_y: usize) -> Result<Self> {
        if m_x == 0 || m_y == 0 || b_x == 0 || b_y == 0 {
            return Err(Error::config("b_x", "grid and tile dimensions must be positive"));
        }
        if !m_x.is_multiple_of(b_x) {
            return Err(Error::config("b_x", format!("{b_x} does not divide m_x = {m_x}")));
        }
        if !m_y.is_multiple_of(b_y) {
            return Err(Error::config("b_y", format!("{b_y} does not divide m_y = {m_y}")));
        }
        let tiles_y = m_y / b_y;
        let mut assignment = Vec::with_capacity(m_x * m_y);
        for ix in 0..m_x {
            for iy in 0..m_y {
                assignment.push((ix / b_x) * tiles_y + iy / b_y);
            }
        }
        let k = (m_x / b_x) * tiles_y;
        let mut order = Vec::with_capacity(m_x * m_y);
        for group in 0..k {
            order.extend(
                assignment
                    .iter()
                    .enumerate()
                    .filter(|&(_, &g)| g == group)
                    .map(|(m, _)| m),
            );
        }
        Ok(Self {
            m_x,
            m_y,
            b_x,
            b_y,
            assignment,
            order,
        })
    }

    pub fn from_config(cfg: &SystemConfig) -> Result<Self> {
        Self::new(cfg.m_x, cfg.m_y, cfg.b_x, cfg.b_y)
    }

    /// Every element in its own group.
    pub fn identity(m_x: usize, m_y: usize) -> Self {
        Self::new(m_x, m_y, 1, 1).expect("1x1 tiles always divide the grid")
    }

    pub fn elements(&self) -> usize {
        self.m_x * self.m_y
    }

    pub fn groups(&self) -> usize {
        self.elements() / self.group_size()
    }

    pub fn group_size(&self) -> usize {
        self.b_x * self.b_y
    }

    pub fn tile(&self) -> (usize, usize) {
        (self.b_x, self.b_y)
    }

    pub fn group_of(&self, element: usize) -> usize {
        self.assignment[element]
    }

    /// Grid indices of the elements in group `k`.
    pub fn members(&self, k: usize) -> &[usize] {
        let b = self.group_size();
        &self.order[k * b..(k + 1) * b]
    }

    /// Contiguous relabeling: position `i` holds the grid index of the
    /// `i`-th element when groups are laid out back to back.
    pub fn element_order(&self) -> &[usize] {
        &self.order
    }

    /// Per-element coefficients `phi` from group coefficients `phibar`
    /// (`phibar ⊗ 1_B` in the contiguous labeling).
    pub fn expand(&self, phibar: &[C64]) -> Vec<C64> {
        assert_eq!(phibar.len(), self.groups());
        self.assignment.iter().map(|&g| phibar[g]).collect()
    }
}

/// Phase offset of the LoS path at element `(m_x, m_y)` (1-based) relative to
/// element `(1, 1)`.
pub fn los_phase_offset(aoa: Aoa, spacing: f64, wavelength: f64, m_x: usize, m_y: usize) -> f64 {
    let dx = (m_x as f64 - 1.0) * spacing * aoa.elevation.sin() * aoa.azimuth.sin();
    let dy = (m_y as f64 - 1.0) * spacing * aoa.elevation.cos();
    2.0 * PI / wavelength * (dx + dy)
}

/// One draw of every channel in the link.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// Zero-padded direct CIR (support: first `L` taps).
    pub h_d: ComplexVec,
    /// `N x M` zero-padded composite reflected CIRs (support: first `L0` taps).
    pub v: ComplexMat,
    /// Realized `||h_d||^2`.
    pub p_d_realized: f64,
    pub user_aoa: Aoa,
    pub bs_aoa: Aoa,
}

fn draw_aoa<R: Rng + ?Sized>(rng: &mut R) -> Aoa {
    Aoa {
        elevation: rng.random_range(0.0..=FRAC_PI_2),
        azimuth: rng.random_range(0.0..=FRAC_PI_2),
    }
}

impl ChannelRealization {
    /// Draws a realization; unspecified arrival angles are drawn first, then
    /// the direct link, then the reflected links element by element.
    pub fn generate<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Self {
        let user_aoa = cfg.user_aoa.unwrap_or_else(|| draw_aoa(rng));
        let bs_aoa = cfg.bs_aoa.unwrap_or_else(|| draw_aoa(rng));
        let h_d = gen_direct_channel(cfg, rng);
        let v = gen_reflected_channels(cfg, user_aoa, bs_aoa, rng);
        let p_d_realized = h_d.norm_sqr();
        Self {
            h_d,
            v,
            p_d_realized,
            user_aoa,
            bs_aoa,
        }
    }

    /// `V' = V` grouped by `g`.
    pub fn grouped(&self, g: &Grouping) -> ComplexMat {
        group_composite(&self.v, g)
    }
}

/// Rayleigh direct link with a uniform power delay profile over `L` taps and
/// unit ensemble power.
pub fn gen_direct_channel<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> ComplexVec {
    let var = 1.0 / cfg.l as f64;
    let mut h = ComplexVec::zeros(cfg.n);
    for tap in h.iter_mut().take(cfg.l) {
        *tap = cscg(rng, var);
    }
    h
}

/// Unit-power LoS + NLoS link: tap 0 carries the LoS ray with the given
/// phase, remaining taps are i.i.d. CSCG sharing the NLoS power.
fn los_nlos_link<R: Rng + ?Sized>(taps: usize, zeta: f64, los_phase: f64, rng: &mut R) -> Vec<C64> {
    let los_power = if taps == 1 || zeta.is_infinite() {
        1.0
    } else {
        zeta / (1.0 + zeta)
    };
    let nlos_var = if taps > 1 {
        (1.0 - los_power) / (taps - 1) as f64
    } else {
        0.0
    };
    let mut h = Vec::with_capacity(taps);
    h.push(C64::from_polar(los_power.sqrt(), -los_phase));
    for _ in 1..taps {
        h.push(cscg(rng, nlos_var));
    }
    h
}

/// Composite per-element channels `nu_m = h_m * g_m`, zero-padded to `N` and
/// scaled so that `E||nu_m||^2 = alpha`.
pub fn gen_reflected_channels<R: Rng + ?Sized>(
    cfg: &SystemConfig,
    user_aoa: Aoa,
    bs_aoa: Aoa,
    rng: &mut R,
) -> ComplexMat {
    // E||h_m * g_m||^2 = E||h_m||^2 E||g_m||^2 = 1 for independent unit-power links.
    let scale = cfg.alpha.sqrt();
    let mut v = ComplexMat::zeros(cfg.n, cfg.m());
    for ix in 1..=cfg.m_x {
        for iy in 1..=cfg.m_y {
            let bs_phase = los_phase_offset(bs_aoa, cfg.spacing, cfg.wavelength, ix, iy);
            let user_phase = los_phase_offset(user_aoa, cfg.spacing, cfg.wavelength, ix, iy);
            let h = los_nlos_link(cfg.l1, cfg.zeta_bi, bs_phase, rng);
            let g = los_nlos_link(cfg.l2, cfg.zeta_iu, user_phase, rng);
            let nu = linear_convolve(&h, &g);
            let col = v.col_mut((ix - 1) * cfg.m_y + (iy - 1));
            for (dst, src) in col.iter_mut().zip(nu.iter()) {
                *dst = src * scale;
            }
        }
    }
    v
}

/// Sums the columns of `V` belonging to each group.
pub fn group_composite(v: &ComplexMat, g: &Grouping) -> ComplexMat {
    assert_eq!(v.cols(), g.elements(), "grouping does not match the element count");
    let mut out = ComplexMat::zeros(v.rows(), g.groups());
    for (m, col) in v.columns().enumerate() {
        let dst = out.col_mut(g.group_of(m));
        for (d, s) in dst.iter_mut().zip(col) {
            *d += s;
        }
    }
    out
}

/// CFR `F_N (h_d + V' phibar)`.
pub fn effective_cfr(h_d: &[C64], vp: &ComplexMat, phibar: &[C64]) -> ComplexVec {
    assert_eq!(h_d.len(), vp.rows(), "h_d and V' row counts differ");
    let reflected = vp.mul_vec(phibar);
    let cir: Vec<C64> = h_d.iter().zip(&reflected).map(|(a, b)| a + b).collect();
    dft(&cir)
}

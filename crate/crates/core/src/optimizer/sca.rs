//! SCA refinement of the reflection coefficients for a fixed power allocation.
//!
//! Around an expansion point with CFR `v~`, each `|v_n|^2 = a_n^2 + b_n^2` is
//! replaced by its tangent plane
//! `f_n = a~^2 + b~^2 + 2 a~ (a - a~) + 2 b~ (b - b~) = 2 Re(conj(v~_n) v_n) - |v~_n|^2`,
//! which is affine in `phibar` and never exceeds `|v_n|^2`. Since the rate is
//! increasing in the channel gain, the auxiliary `y_n` can be eliminated and
//! the convex subproblem becomes maximizing the concave
//! `h(phibar) = sum_n log2(1 + p_n f_n(phibar) / (Gamma sigma2))`
//! over the product of unit discs, solved here by projected gradient ascent.

use std::f64::consts::LN_2;

use crate::numerics::C64;

use super::{project_unit_disc, LinkModel, ReflectCoeffs, ScaSettings};

/// Smallest admissible log argument `1 + p_n f_n / (Gamma sigma2)`.
const LOG_GUARD: f64 = 1e-12;

/// Tangent-plane minorant of `a^2 + b^2` at `(a_t, b_t)`.
pub fn affine_lower_bound(a_t: f64, b_t: f64, a: f64, b: f64) -> f64 {
    a_t * a_t + b_t * b_t + 2.0 * a_t * (a - a_t) + 2.0 * b_t * (b - b_t)
}

/// Concave SCA surrogate `h` for one expansion point. Only subcarriers with
/// positive power contribute and are kept.
#[derive(Debug, Clone)]
pub struct Surrogate {
    groups: usize,
    /// `p_n / (Gamma sigma2)` per kept subcarrier.
    weight: Vec<f64>,
    /// `2 Re(conj(v~_n) c_n) - |v~_n|^2`, the part of `f_n` not depending on `phibar`.
    offset: Vec<f64>,
    /// `conj(v~_n) [F V']_{n,k}`, row-major over kept subcarriers.
    coef: Vec<C64>,
}

impl Surrogate {
    pub fn new(model: &LinkModel, p: &[f64], noise_floor: f64, expansion: &[C64]) -> Self {
        let groups = model.groups();
        let v_tilde = model.cfr(expansion);
        let w = model.reflect_cfr();
        let mut weight = Vec::new();
        let mut offset = Vec::new();
        let mut coef = Vec::new();
        for (n, (&pn, vt)) in p.iter().zip(&v_tilde).enumerate() {
            if pn <= 0.0 {
                continue;
            }
            let u = vt.conj();
            weight.push(pn / noise_floor);
            offset.push(2.0 * (u * model.direct_cfr()[n]).re - vt.norm_sqr());
            coef.extend((0..groups).map(|k| u * w.get(n, k)));
        }
        Self {
            groups,
            weight,
            offset,
            coef,
        }
    }

    /// Tangent-plane values `f_n(phibar)` on the kept subcarriers.
    pub fn affine(&self, phibar: &[C64]) -> Vec<f64> {
        debug_assert_eq!(phibar.len(), self.groups);
        self.offset
            .iter()
            .zip(self.coef.chunks_exact(self.groups.max(1)))
            .map(|(&off, row)| {
                let lin: C64 = row.iter().zip(phibar).map(|(a, x)| a * x).sum();
                off + 2.0 * lin.re
            })
            .collect()
    }

    /// `h(phibar)`, or `None` where some log argument falls below the guard.
    pub fn value(&self, phibar: &[C64]) -> Option<f64> {
        let f = self.affine(phibar);
        let mut total = 0.0;
        for (&w, fn_) in self.weight.iter().zip(f) {
            let arg = 1.0 + w * fn_;
            if arg.is_nan() || arg <= LOG_GUARD {
                return None;
            }
            total += arg.log2();
        }
        Some(total)
    }

    /// Gradient over the `2K` real coordinates, packed as
    /// `d/dRe(phibar_k) + j d/dIm(phibar_k)`.
    pub fn gradient(&self, phibar: &[C64]) -> Vec<C64> {
        self.value_and_gradient(phibar)
            .map(|(_, g)| g)
            .unwrap_or_else(|| vec![C64::new(f64::NAN, f64::NAN); self.groups])
    }

    pub fn value_and_gradient(&self, phibar: &[C64]) -> Option<(f64, Vec<C64>)> {
        let f = self.affine(phibar);
        let mut total = 0.0;
        let mut grad = vec![C64::new(0.0, 0.0); self.groups];
        for ((&w, fn_), row) in self
            .weight
            .iter()
            .zip(f)
            .zip(self.coef.chunks_exact(self.groups.max(1)))
        {
            let arg = 1.0 + w * fn_;
            if arg.is_nan() || arg <= LOG_GUARD {
                return None;
            }
            total += arg.log2();
            let beta = 2.0 * w / (arg * LN_2);
            for (g, a) in grad.iter_mut().zip(row) {
                *g += a.conj() * beta;
            }
        }
        Some((total, grad))
    }

    /// Upper estimate of the Hessian norm of `h` at `phibar` (sum of the
    /// rank-one curvature terms).
    pub fn curvature(&self, phibar: &[C64]) -> f64 {
        let f = self.affine(phibar);
        self.weight
            .iter()
            .zip(f)
            .zip(self.coef.chunks_exact(self.groups.max(1)))
            .map(|((&w, fn_), row)| {
                let arg = (1.0 + w * fn_).max(LOG_GUARD);
                let grad_sq: f64 = 4.0 * row.iter().map(|a| a.norm_sqr()).sum::<f64>();
                (w / arg).powi(2) * grad_sq / LN_2
            })
            .sum()
    }
}

/// Result of an inner solver: the best iterate plus its objective history.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerOutcome {
    pub phibar: ReflectCoeffs,
    /// Objective at the start point and after every accepted iteration.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn real_dot(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.re * y.re + x.im * y.im).sum()
}

/// Maximizes the surrogate expanded at `phi_tilde` over `|phibar_k| <= 1` by
/// projected gradient ascent with backtracking. Every accepted step strictly
/// increases `h`, so the output never scores below the start point.
pub fn sca_subproblem(
    phi_tilde: &[C64],
    p: &[f64],
    model: &LinkModel,
    noise_floor: f64,
    settings: &ScaSettings,
) -> InnerOutcome {
    let mut x: Vec<C64> = phi_tilde.iter().copied().map(project_unit_disc).collect();
    let surrogate = Surrogate::new(model, p, noise_floor, &x);
    let (mut hx, mut g) = surrogate
        .value_and_gradient(&x)
        .expect("the expansion point always has f_n = |v_n|^2 >= 0");
    let mut trace = vec![hx];
    let curvature = surrogate.curvature(&x);
    let mut t = if curvature > 0.0 {
        settings.pg_step0 / curvature
    } else {
        settings.pg_step0
    };

    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_inner {
        let pg_norm = x
            .iter()
            .zip(&g)
            .map(|(xi, gi)| (project_unit_disc(xi + gi) - xi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if pg_norm <= settings.pg_tol {
            converged = true;
            break;
        }

        let mut accepted = None;
        while t > f64::MIN_POSITIVE {
            let y: Vec<C64> = x
                .iter()
                .zip(&g)
                .map(|(xi, gi)| project_unit_disc(xi + gi * t))
                .collect();
            let d: Vec<C64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
            let d_sq: f64 = d.iter().map(|z| z.norm_sqr()).sum();
            if d_sq == 0.0 {
                break;
            }
            if let Some((hy, gy)) = surrogate.value_and_gradient(&y) {
                if hy >= hx + real_dot(&g, &d) - d_sq / (2.0 * t) && hy > hx {
                    accepted = Some((y, hy, gy));
                    break;
                }
            }
            t *= settings.pg_backtrack;
        }
        let Some((y, hy, gy)) = accepted else {
            // No ascent step exists at machine precision: stationary.
            converged = true;
            break;
        };

        iterations += 1;
        let rel = (hy - hx) / hx.abs().max(f64::MIN_POSITIVE);
        x = y;
        hx = hy;
        g = gy;
        trace.push(hx);
        t /= settings.pg_backtrack;
        if rel <= settings.inner_tol {
            converged = true;
            break;
        }
    }

    InnerOutcome {
        phibar: ReflectCoeffs(x),
        trace,
        iterations,
        converged,
    }
}

/// Minorize-maximize loop on the true per-power objective
/// `sum_n log2(1 + |v_n|^2 p_n / (Gamma sigma2))`: re-expand the surrogate
/// at each new iterate until the objective's relative gain drops below
/// `inner_tol`. The objective never decreases.
pub fn algorithm1(
    phi_tilde: &[C64],
    p: &[f64],
    model: &LinkModel,
    noise_floor: f64,
    settings: &ScaSettings,
) -> InnerOutcome {
    let mut x: Vec<C64> = phi_tilde.iter().copied().map(project_unit_disc).collect();
    let mut obj = model.log_sum(p, &x, noise_floor);
    let mut trace = vec![obj];
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_inner {
        iterations += 1;
        let step = sca_subproblem(&x, p, model, noise_floor, settings);
        let candidate = step.phibar.into_vec();
        let new_obj = model.log_sum(p, &candidate, noise_floor);
        if new_obj <= obj {
            // Surrogate made no progress (or only rounding noise); keep the incumbent.
            trace.push(obj);
            converged = true;
            break;
        }
        let rel = (new_obj - obj) / obj.abs().max(f64::MIN_POSITIVE);
        x = candidate;
        obj = new_obj;
        trace.push(obj);
        if rel <= settings.inner_tol {
            converged = true;
            break;
        }
    }
    InnerOutcome {
        phibar: ReflectCoeffs(x),
        trace,
        iterations,
        converged,
    }
}

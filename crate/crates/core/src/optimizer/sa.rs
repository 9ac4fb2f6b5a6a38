use std::f64::consts::TAU;

use rand::Rng;

use crate::numerics::{inner, ComplexMat, C64};

use super::ReflectCoeffs;

fn align(z: C64) -> C64 {
    // Zero inner product: every phase is optimal, pick 0.
    if z.norm() == 0.0 {
        C64::new(1.0, 0.0)
    } else {
        z.conj() / z.norm()
    }
}

/// Closed-form unit-modulus update of coefficient `i` with all others fixed:
/// the phase that co-phases `nu'_i` with `h_d + sum_{k != i} nu'_k phibar_k`.
pub fn sa_update(h_d: &[C64], vp: &ComplexMat, phibar: &[C64], i: usize) -> C64 {
    let mut rest = h_d.to_vec();
    for (k, col) in vp.columns().enumerate() {
        if k == i {
            continue;
        }
        for (r, &a) in rest.iter_mut().zip(col) {
            *r += a * phibar[k];
        }
    }
    align(inner(&rest, vp.col(i)))
}

/// One successive-alignment pass over all coefficients in index order.
pub fn sa_sweep(h_d: &[C64], vp: &ComplexMat, phibar: &mut [C64]) {
    let mut total = h_d.to_vec();
    for (col, &phi) in vp.columns().zip(phibar.iter()) {
        for (t, &a) in total.iter_mut().zip(col) {
            *t += a * phi;
        }
    }
    for (i, col) in vp.columns().enumerate() {
        for (t, &a) in total.iter_mut().zip(col) {
            *t -= a * phibar[i];
        }
        phibar[i] = align(inner(&total, col));
        for (t, &a) in total.iter_mut().zip(col) {
            *t += a * phibar[i];
        }
    }
}

/// Successive alignment from random unit-modulus phases, `sweeps` passes.
pub fn sa_init<R: Rng + ?Sized>(h_d: &[C64], vp: &ComplexMat, sweeps: usize, rng: &mut R) -> ReflectCoeffs {
    let mut phibar: Vec<C64> = (0..vp.cols())
        .map(|_| C64::from_polar(1.0, rng.random_range(0.0..TAU)))
        .collect();
    for _ in 0..sweeps {
        sa_sweep(h_d, vp, &mut phibar);
    }
    ReflectCoeffs(phibar)
}

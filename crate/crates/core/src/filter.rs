//! Butterworth band-pass design (bilinear transform, second-order sections)
//! and zero-phase forward-backward filtering.
//!
//! The design pipeline mirrors the textbook route: analog low-pass prototype
//! poles, low-pass-to-band-pass transformation with prewarped edge
//! frequencies, bilinear mapping to the z-plane, and a gain chosen so the
//! response is exactly unity at the (warped) band center.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

/// One biquad: `b` over `a`, with `a[0]` normalized to 1.
#[derive(Debug, Clone, Copy)]
pub struct Sos {
    pub b: [f64; 3],
    pub a: [f64; 3],
}

/// Design an order-`order` Butterworth band-pass (2*order poles) for the
/// passband `[lo_hz, hi_hz]` at sample rate `fs`.
pub fn butter_bandpass(order: usize, lo_hz: f64, hi_hz: f64, fs: f64) -> Result<Vec<Sos>> {
    if !(1..=8).contains(&order) {
        return Err(Error::InvalidBand(format!("order {order} outside 1..=8")));
    }
    if !(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < fs / 2.0) {
        return Err(Error::InvalidBand(format!(
            "need 0 < lo ({lo_hz}) < hi ({hi_hz}) < fs/2 ({})",
            fs / 2.0
        )));
    }

    let fs2 = 2.0 * fs;
    let warp = |f: f64| fs2 * (std::f64::consts::PI * f / fs).tan();
    let wl = warp(lo_hz);
    let wh = warp(hi_hz);
    let bw = wh - wl;
    let w0 = (wl * wh).sqrt();

    let bilinear = |s: Complex64| (Complex64::new(fs2, 0.0) + s) / (Complex64::new(fs2, 0.0) - s);

    // Denominators only; every section shares the band-pass zeros at z = +/-1.
    let mut sections: Vec<Sos> = Vec::with_capacity(order);
    let push_conj_pair = |zp: Complex64, sections: &mut Vec<Sos>| {
        sections.push(Sos {
            b: [1.0, 0.0, -1.0],
            a: [1.0, -2.0 * zp.re, zp.norm_sqr()],
        });
    };

    for k in 0..order.div_ceil(2) {
        let phi = std::f64::consts::PI * (2 * k + 1) as f64 / (2 * order) as f64;
        let proto = Complex64::new(-phi.sin(), phi.cos());
        let real_proto = proto.im.abs() < 1e-12;

        let c = proto * (bw / 2.0);
        let d = (c * c - Complex64::new(w0 * w0, 0.0)).sqrt();
        let q1 = c + d;
        let q2 = c - d;

        if real_proto {
            // One prototype pole -> one section holding both band-pass poles.
            let z1 = bilinear(q1);
            let z2 = bilinear(q2);
            if z1.im.abs() > 1e-12 {
                // complex conjugate pair (narrow-band case)
                push_conj_pair(z1, &mut sections);
            } else {
                sections.push(Sos {
                    b: [1.0, 0.0, -1.0],
                    a: [1.0, -(z1.re + z2.re), z1.re * z2.re],
                });
            }
        } else {
            // The conjugate prototype contributes the mirrored poles, so each
            // of q1, q2 pairs with its own conjugate.
            push_conj_pair(bilinear(q1), &mut sections);
            push_conj_pair(bilinear(q2), &mut sections);
        }
    }

    // Normalize to unit gain at the digital image of the analog center w0.
    let wc = 2.0 * (w0 / fs2).atan();
    let zc = Complex64::new(0.0, wc).exp();
    let mut h = Complex64::new(1.0, 0.0);
    for s in &sections {
        let num = Complex64::new(s.b[0], 0.0) * zc * zc
            + Complex64::new(s.b[1], 0.0) * zc
            + Complex64::new(s.b[2], 0.0);
        let den = zc * zc + Complex64::new(s.a[1], 0.0) * zc + Complex64::new(s.a[2], 0.0);
        h *= num / den;
    }
    let k_section = (1.0 / h.norm()).powf(1.0 / sections.len() as f64);
    for s in &mut sections {
        s.b[0] *= k_section;
        s.b[2] *= k_section;
    }

    Ok(sections)
}

/// Run the cascade over `x` (direct form II transposed) with initial state
/// `zi` per section. State is consumed and returned for inspection.
fn sosfilt(sos: &[Sos], zi: &mut [[f64; 2]], x: &[f64]) -> Vec<f64> {
    let mut y = x.to_vec();
    for (s, z) in sos.iter().zip(zi.iter_mut()) {
        let (b0, b1, b2) = (s.b[0], s.b[1], s.b[2]);
        let (a1, a2) = (s.a[1], s.a[2]);
        let (mut z1, mut z2) = (z[0], z[1]);
        for v in y.iter_mut() {
            let xn = *v;
            let yn = b0 * xn + z1;
            z1 = b1 * xn - a1 * yn + z2;
            z2 = b2 * xn - a2 * yn;
            *v = yn;
        }
        *z = [z1, z2];
    }
    y
}

/// Per-section steady-state response to a unit step, cascaded so that each
/// section sees the DC gain of the ones before it. Scaling this state by the
/// first input sample suppresses the start-up transient.
fn step_state(sos: &[Sos], x0: f64) -> Vec<[f64; 2]> {
    let mut zi = Vec::with_capacity(sos.len());
    let mut scale = x0;
    for s in sos {
        let denom = 1.0 + s.a[1] + s.a[2];
        let y_inf = if denom.abs() > 1e-300 {
            (s.b[0] + s.b[1] + s.b[2]) / denom
        } else {
            0.0
        };
        zi.push([
            (s.b[1] + s.b[2] - (s.a[1] + s.a[2]) * y_inf) * scale,
            (s.b[2] - s.a[2] * y_inf) * scale,
        ]);
        scale *= y_inf;
    }
    zi
}

/// Zero-phase filtering: odd-reflection padding, forward pass, backward pass.
pub fn sosfiltfilt(sos: &[Sos], x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n < 2 || sos.is_empty() {
        return x.to_vec();
    }
    let padlen = (3 * (2 * sos.len() + 1)).min(n - 1);

    let mut ext = Vec::with_capacity(n + 2 * padlen);
    for i in (1..=padlen).rev() {
        ext.push(2.0 * x[0] - x[i]);
    }
    ext.extend_from_slice(x);
    for i in 1..=padlen {
        ext.push(2.0 * x[n - 1] - x[n - 1 - i]);
    }

    let mut zi = step_state(sos, ext[0]);
    let fwd = sosfilt(sos, &mut zi, &ext);

    let rev: Vec<f64> = fwd.into_iter().rev().collect();
    let mut zi = step_state(sos, rev[0]);
    let back = sosfilt(sos, &mut zi, &rev);

    back.into_iter().rev().skip(padlen).take(n).collect()
}

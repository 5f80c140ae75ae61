//! Bessel functions of the first kind of integer order.
//!
//! All orders `J_0..=J_n` at one argument come out of a single Miller backward
//! recurrence normalised with `J_0 + 2 Σ J_{2k} = 1`. The backward direction is
//! stable for every order, including the super-exponentially small tail past
//! `n ≈ x` that the prolate eigensolver lives on.

/// Values above this are rescaled during the backward sweep.
const RESCALE_AT: f64 = 1e250;

/// `J_n(x)` for a single integer order.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    bessel_j_orders(n, x)[n as usize]
}

/// `[J_0(x), J_1(x), ..., J_nmax(x)]`.
pub fn bessel_j_orders(nmax: u32, x: f64) -> Vec<f64> {
    let len = nmax as usize + 1;
    if x == 0.0 {
        let mut out = vec![0.0; len];
        out[0] = 1.0;
        return out;
    }
    let ax = x.abs();
    let mut out = miller(nmax, ax);
    if x < 0.0 {
        // J_n(-x) = (-1)^n J_n(x)
        for (n, v) in out.iter_mut().enumerate() {
            if n % 2 == 1 {
                *v = -*v;
            }
        }
    }
    out
}

/// `J_1(x) / x`, continuous through the origin where it equals `1/2`.
pub fn j1_over_x(x: f64) -> f64 {
    let ax = x.abs();
    if ax < 1e-6 {
        // 1/2 - x²/16 + x⁴/384
        let x2 = ax * ax;
        return 0.5 - x2 / 16.0 + x2 * x2 / 384.0;
    }
    bessel_j(1, ax) / ax
}

fn start_order(nmax: u32, x: f64) -> usize {
    let top = (nmax as f64).max(x.ceil());
    let m = top + 30.0 + (60.0 * top).sqrt();
    // even starting index keeps the normalisation sum aligned
    let m = m.ceil() as usize;
    m + (m % 2)
}

fn miller(nmax: u32, x: f64) -> Vec<f64> {
    let len = nmax as usize + 1;
    let start = start_order(nmax, x);
    let mut out = vec![0.0; len];

    let mut j_next = 0.0; // J_{k+1}
    let mut j_cur = 1e-300; // J_k, arbitrary seed
    let mut even_sum = 0.0; // Σ over even k ≥ 2 of J_k
    if start < len {
        out[start] = j_cur;
    }
    for k in (1..=start).rev() {
        let j_prev = (2.0 * k as f64 / x) * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        let idx = k - 1;
        if idx < len {
            out[idx] = j_cur;
        }
        if idx % 2 == 0 && idx > 0 {
            even_sum += j_cur;
        }
        if j_cur.abs() > RESCALE_AT {
            let s = 1.0 / RESCALE_AT;
            j_cur *= s;
            j_next *= s;
            even_sum *= s;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }
    let norm = j_cur + 2.0 * even_sum;
    for v in out.iter_mut() {
        *v /= norm;
    }
    out
}

//! Shared numerical kernels: adaptive Gauss–Kronrod quadrature and bracketed
//! root finding. Kept dependency-free so the geometry layer stays pure.

use crate::error::{Error, Result};

/// Gauss 7 / Kronrod 15 abscissae on [0, 1] side (symmetric about 0).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_17,
    0.207_784_955_007_898_27,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_41,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

/// Gauss-7 weights, matching the odd Kronrod abscissae (indices 1, 3, 5, 7).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_94,
    0.417_959_183_673_469_4,
];

/// One Gauss–Kronrod 7-15 panel; returns (kronrod value, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kronrod = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        // centre node (x = 0) enters once; the Gauss-7 nodes are the
        // odd-indexed Kronrod nodes, centre included
        let s = if x == 0.0 {
            f(mid)
        } else {
            f(mid + half * x) + f(mid - half * x)
        };
        kronrod += wk * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    let kv = kronrod * half;
    let gv = gauss * half;
    (kv, (kv - gv).abs())
}

/// Adaptive quadrature of `f` over [a, b] to relative tolerance `rel_tol`
/// (with a small absolute floor for integrals near zero).
pub fn adaptive_quadrature<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let abs_floor = 1e-300;
    // interval worklist: (a, b, value, err)
    let (v0, e0) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v0, e0)];
    for _ in 0..2000 {
        let total: f64 = intervals.iter().map(|i| i.2).sum();
        let err: f64 = intervals.iter().map(|i| i.3).sum();
        if err <= rel_tol * total.abs() + abs_floor {
            return Ok(total);
        }
        // split the interval with the largest error estimate
        let (worst, _) = intervals
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty interval list");
        let (ia, ib, _, _) = intervals.swap_remove(worst);
        let im = 0.5 * (ia + ib);
        if im <= ia || im >= ib {
            // interval at floating-point resolution; accept its estimate
            let (v, e) = gk15(&f, ia, ib);
            intervals.push((ia, ib, v, e.min(abs_floor)));
            continue;
        }
        let (vl, el) = gk15(&f, ia, im);
        let (vr, er) = gk15(&f, im, ib);
        intervals.push((ia, im, vl, el));
        intervals.push((im, ib, vr, er));
    }
    Err(Error::Quadrature(format!(
        "no convergence to rel_tol = {rel_tol:.1e} on [{a}, {b}] after 2000 refinements"
    )))
}

/// Find the root of a continuous function on [lo, hi] with f(lo) and f(hi) of
/// opposite sign, by the Illinois variant of regula falsi. Converges to a
/// bracket of width `xtol`.
pub fn bracket_root<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, xtol: f64) -> Result<f64> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.signum() == fb.signum() {
        return Err(Error::Domain(format!(
            "root not bracketed on [{lo}, {hi}]: f(lo) = {fa:.3e}, f(hi) = {fb:.3e}"
        )));
    }
    let mut side = 0i8;
    for _ in 0..200 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        // keep the secant point strictly inside; fall back to bisection
        if !(c > a.min(b) && c < a.max(b)) {
            c = 0.5 * (a + b);
        }
        let fc = f(c);
        if fc == 0.0 || (b - a).abs() <= xtol {
            return Ok(c);
        }
        if fc.signum() == fb.signum() {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
    }
    Ok(0.5 * (a + b))
}

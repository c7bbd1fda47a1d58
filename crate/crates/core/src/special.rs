//! Special functions: sphere measures and exponentially scaled Riccati forms
//! of the modified spherical Bessel functions.
//!
//! Conventions: `k_0(x) = e^{-x}/x` and `i_0(x) = sinh(x)/x`, so that the
//! Riccati forms `x i_l(x)` and `x k_l(x)` have Wronskian `-1` for every `l`.

use statrs::function::gamma::{gamma, ln_gamma};

/// Surface measure of the unit sphere in `R^d`, `2 π^{d/2} / Γ(d/2)`.
pub fn sphere_surface(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    2.0 * std::f64::consts::PI.powf(h) / gamma(h)
}

/// `x i_l(x) e^{-x}`.
pub fn riccati_i_scaled(l: u32, x: f64) -> f64 {
    debug_assert!(x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let lf = l as f64;
    if x < 30.0_f64.max(lf * lf) {
        // power series x^{l+1} Σ (x²/2)^k / (k! (2l+2k+1)!!), all terms positive
        let mut term = 1.0;
        let mut sum = 1.0;
        let half_x2 = 0.5 * x * x;
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= half_x2 / (k * (2.0 * lf + 2.0 * k + 1.0));
            sum += term;
            if term < 1e-17 * sum {
                break;
            }
        }
        // ln (2l+1)!! = ln Γ(2l+2) - l ln 2 - ln Γ(l+1)
        let ln_dfact = ln_gamma(2.0 * lf + 2.0) - lf * std::f64::consts::LN_2 - ln_gamma(lf + 1.0);
        ((lf + 1.0) * x.ln() - x - ln_dfact).exp() * sum
    } else {
        let inv = 1.0 / (2.0 * x);
        let mut grow = 0.0;
        let mut decay = 0.0;
        let mut coeff = 1.0;
        let mut pow = 1.0;
        for j in 0..=l {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            grow += sign * coeff * pow;
            decay += coeff * pow;
            let jf = j as f64;
            coeff *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
            pow *= inv;
        }
        let parity = if l % 2 == 0 { 1.0 } else { -1.0 };
        0.5 * (grow - parity * (-2.0 * x).exp() * decay)
    }
}

/// `x k_l(x) e^{x}` = Σ_{j=0}^{l} (l+j)! / (j! (l−j)!) (2x)^{−j}.
pub fn riccati_k_scaled(l: u32, x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let lf = l as f64;
    let inv = 1.0 / (2.0 * x);
    let mut sum = 0.0;
    let mut coeff = 1.0;
    let mut pow = 1.0;
    for j in 0..=l {
        sum += coeff * pow;
        let jf = j as f64;
        coeff *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
        pow *= inv;
    }
    sum
}

/// Derivative of [`riccati_k_scaled`]'s unscaled counterpart, rescaled by
/// `e^{x}`: returns `e^{x} d/dx [x k_l(x)]`.
pub fn riccati_k_scaled_derivative(l: u32, x: f64) -> f64 {
    let lf = l as f64;
    let inv = 1.0 / (2.0 * x);
    let mut poly = 0.0;
    let mut dpoly = 0.0;
    let mut coeff = 1.0;
    let mut pow = 1.0;
    for j in 0..=l {
        let jf = j as f64;
        poly += coeff * pow;
        dpoly -= jf * coeff * pow / x;
        coeff *= (lf + jf + 1.0) * (lf - jf) / (jf + 1.0);
        pow *= inv;
    }
    dpoly - poly
}

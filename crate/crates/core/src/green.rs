//! Partial-wave kernels of the free resolvent `(h₀ − E)^{-1}`, `h₀ = −½Δ`.
//!
//! Kernels act on the reduced radial function `u(r) = r^{(d−1)/2} ψ(r)` with
//! the flat measure `dr`. For sector `ℓ` the kernel is the Green function of
//! `−½u″ + ℓ(ℓ+1)/(2r²) u − E u`, so its `r`-derivative jumps by `−2` across
//! the diagonal.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::potentials::Potential;
use crate::quadrature::{integrate_breaks, Tolerance};
use crate::special::{riccati_i_scaled, riccati_k_scaled};

/// Dimension, angular sector and spectral parameter `E ≤ 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorSpec {
    pub dimension: u32,
    pub ell: u32,
    pub energy: f64,
}

impl SectorSpec {
    pub fn new(dimension: u32, ell: u32, energy: f64) -> Result<Self> {
        let s = Self {
            dimension,
            ell,
            energy,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn s_wave(energy: f64) -> Self {
        Self {
            dimension: 3,
            ell: 0,
            energy,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(invalid("dimension", format!("must be >= 3, got {}", self.dimension)));
        }
        if !(self.energy <= 0.0) || !self.energy.is_finite() {
            return Err(invalid("energy", format!("must be finite and <= 0, got {}", self.energy)));
        }
        if self.dimension > 3 && (self.energy < 0.0 || self.ell > 0) {
            return Err(Error::UnsupportedSector(format!(
                "d = {} supports only l = 0 at E = 0 (got l = {}, E = {})",
                self.dimension, self.ell, self.energy
            )));
        }
        Ok(())
    }

    /// Decay rate `q = √(−2E)`.
    pub fn q(&self) -> f64 {
        (-2.0 * self.energy).sqrt()
    }
}

/// Free sector Green function `g_E^ℓ(r, r′)`.
pub fn radial_green(s: &SectorSpec, r: f64, r2: f64) -> Result<f64> {
    s.validate()?;
    if !(r > 0.0 && r2 > 0.0) {
        return Err(invalid("r", format!("radii must be > 0, got ({r}, {r2})")));
    }
    Ok(green_unchecked(s, r, r2))
}

pub(crate) fn green_unchecked(s: &SectorSpec, r: f64, r2: f64) -> f64 {
    let (lo, hi) = if r <= r2 { (r, r2) } else { (r2, r) };
    let l = s.ell;
    if s.dimension > 3 {
        let d = s.dimension as f64;
        return 2.0 / (d - 2.0) * hi.powf(2.0 - d) * (r * r2).powf(0.5 * (d - 1.0));
    }
    if s.energy == 0.0 {
        let lf = l as f64;
        return 2.0 / (2.0 * lf + 1.0) * lo * (lo / hi).powi(l as i32);
    }
    let q = s.q();
    let (x_lo, x_hi) = (q * lo, q * hi);
    2.0 / q * riccati_i_scaled(l, x_lo) * riccati_k_scaled(l, x_hi) * (-(x_hi - x_lo)).exp()
}

/// Birman–Schwinger sector kernel `|V(r)|^{1/2} g_E^ℓ(r, r′) |V(r′)|^{1/2}`.
pub fn bs_kernel(p: &Potential, s: &SectorSpec, r: f64, r2: f64) -> Result<f64> {
    if p.dimension != s.dimension {
        return Err(invalid(
            "dimension",
            format!("potential is {}-dimensional but the sector is {}-dimensional", p.dimension, s.dimension),
        ));
    }
    let g = radial_green(s, r, r2)?;
    let w = p.sqrt_abs(r) * p.sqrt_abs(r2);
    Ok(if w == 0.0 { 0.0 } else { w * g })
}

fn power_integral(e: f64, a: f64, b: f64) -> f64 {
    if (e + 1.0).abs() < 1e-14 {
        (b / a).ln()
    } else {
        (b.powf(e + 1.0) - a.powf(e + 1.0)) / (e + 1.0)
    }
}

/// `∫₀^R g_E^ℓ(r, r′) dr′`, used for the Nyström diagonal correction.
pub(crate) fn row_integral(s: &SectorSpec, r: f64, r_max: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    let l = s.ell as f64;
    if s.dimension > 3 {
        let d = s.dimension as f64;
        let h = 0.5 * (d - 1.0);
        let c = 2.0 / (d - 2.0);
        let inner = r.powf(2.0 - d + h) * r.powf(h + 1.0) / (h + 1.0);
        let outer = r.powf(h) * power_integral(2.0 - d + h, r, r_max);
        return c * (inner + outer);
    }
    if s.energy == 0.0 {
        let c = 2.0 / (2.0 * l + 1.0);
        let inner = r * r / (l + 2.0);
        let outer = r.powf(l + 1.0) * power_integral(-l, r, r_max);
        return c * (inner + outer);
    }
    let q = s.q();
    if s.ell == 0 {
        // (2/q²)[1 − e^{−qr} − sinh(qr) e^{−qR}]
        let tail = 0.5 * ((-q * (r_max - r)).exp() - (-q * (r_max + r)).exp());
        return 2.0 / (q * q) * (-(-q * r).exp_m1() - tail);
    }
    let f = |t: f64| green_unchecked(s, r, t);
    let width = (1.0 / q).min(r_max);
    let mut pts = vec![0.0];
    for k in [-8.0, -1.0, 0.0, 1.0, 8.0] {
        let t = r + k * width;
        if t > 0.0 && t < r_max {
            pts.push(t);
        }
    }
    pts.push(r_max);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    integrate_breaks(f, &pts, Tolerance::relative(1e-13).with_abs(1e-300)).unwrap_or(f64::NAN)
}

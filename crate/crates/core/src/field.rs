//! Scalar constants of the dipole-approximated field coupling: cutoff norms,
//! the effective mass, the dispersion function `D₊(s)`, the `Λ`-norm
//! aggregate and the vacuum shift `g`.
//!
//! The cutoff `φ̂(k) = χ(|k|)` is radial and `ω(k) = |k|`. Norms are written in
//! radial form, `‖φ̂ ω^{−s}‖² = S_{d−1} ∫ χ(r)² r^{d−1−2s} dr`, and the spectral
//! density is `ρ(u) = χ(√u)² u^{(d−2)/2}`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{invalid, require_positive, Error, Result};
use crate::quadrature::{integrate_breaks, integrate_half_line, integrate_to_infinity, GaussLegendre, Tolerance};
use crate::special::sphere_surface;

const INNER_TOL: f64 = 1e-12;
const HOLDER_EXPONENTS: [f64; 3] = [0.25, 0.5, 0.75];

/// Radial cutoff profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CutoffKind {
    /// `χ(r) = r^power e^{−r²/(2 scale²)}`.
    PowerGaussian { power: f64, scale: f64 },
    /// Piecewise-linear through `(r, value)`; zero beyond the last node.
    Tabulated { r: Vec<f64>, values: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    #[serde(flatten)]
    pub kind: CutoffKind,
    pub dimension: u32,
}

impl Cutoff {
    pub fn new(kind: CutoffKind, dimension: u32) -> Result<Self> {
        let c = Self { kind, dimension };
        c.validate()?;
        Ok(c)
    }

    pub fn power_gaussian(power: f64, scale: f64) -> Result<Self> {
        Self::new(CutoffKind::PowerGaussian { power, scale }, 3)
    }

    pub fn tabulated(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(CutoffKind::Tabulated { r, values }, 3)
    }

    pub fn with_dimension(mut self, dimension: u32) -> Result<Self> {
        self.dimension = dimension;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        match &self.kind {
            CutoffKind::PowerGaussian { power, scale } => {
                if !(*power >= 0.0 && power.is_finite()) {
                    return Err(invalid("power", format!("must be finite and >= 0, got {power}")));
                }
                require_positive("scale", *scale)?;
            }
            CutoffKind::Tabulated { r, values } => {
                if r.len() < 2 || r.len() != values.len() {
                    return Err(invalid(
                        "tabulated",
                        format!("need >= 2 matching (r, value) pairs, got {} and {}", r.len(), values.len()),
                    ));
                }
                if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().chain(values).any(|x| !x.is_finite()) {
                    return Err(invalid("tabulated", "grid must be finite, nonnegative and strictly increasing"));
                }
            }
        }
        Ok(())
    }

    pub fn chi(&self, r: f64) -> f64 {
        match &self.kind {
            CutoffKind::PowerGaussian { power, scale } => {
                let g = (-0.5 * (r / scale).powi(2)).exp();
                if *power == 0.0 {
                    g
                } else {
                    r.powf(*power) * g
                }
            }
            CutoffKind::Tabulated { r: x, values: y } => {
                let n = x.len();
                if r > x[n - 1] {
                    0.0
                } else if r <= x[0] {
                    y[0]
                } else {
                    let i = x.partition_point(|&xi| xi <= r).clamp(1, n - 1) - 1;
                    let t = (r - x[i]) / (x[i + 1] - x[i]);
                    y[i] + t * (y[i + 1] - y[i])
                }
            }
        }
    }

    /// `ρ(u) = χ(√u)² u^{(d−2)/2}`.
    pub fn density(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        let c = self.chi(u.sqrt());
        c * c * u.powf(0.5 * (self.dimension as f64 - 2.0))
    }

    /// Characteristic momentum: `Λ`, or the last tabulated node.
    pub fn scale(&self) -> f64 {
        match &self.kind {
            CutoffKind::PowerGaussian { scale, .. } => *scale,
            CutoffKind::Tabulated { r, .. } => *r.last().expect("validated grid"),
        }
    }

    fn support(&self) -> Option<f64> {
        match &self.kind {
            CutoffKind::PowerGaussian { .. } => None,
            CutoffKind::Tabulated { r, .. } => r.last().copied(),
        }
    }

    /// Order `β` of `χ(r) ~ r^β` at the origin (`∞` if `χ` vanishes near 0).
    fn origin_order(&self) -> f64 {
        match &self.kind {
            CutoffKind::PowerGaussian { power, .. } => *power,
            CutoffKind::Tabulated { r, values } => {
                if values[0] != 0.0 {
                    0.0
                } else if r[0] > 0.0 || values[1] == 0.0 {
                    f64::INFINITY
                } else {
                    1.0
                }
            }
        }
    }

    fn is_zero(&self) -> bool {
        matches!(&self.kind, CutoffKind::Tabulated { values, .. } if values.iter().all(|v| *v == 0.0))
    }

    /// Radial break points (kinks and natural scales).
    fn radial_points(&self) -> Vec<f64> {
        match &self.kind {
            CutoffKind::PowerGaussian { scale, .. } => [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0].iter().map(|k| k * scale).collect(),
            CutoffKind::Tabulated { r, .. } => {
                let mut pts = vec![0.0];
                pts.extend(r.iter().copied().filter(|x| *x > 0.0));
                pts
            }
        }
    }

    /// `∫₀^∞ f(r) dr` over the cutoff's natural panels.
    fn radial_integral<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        let pts = self.radial_points();
        match self.support() {
            Some(_) => integrate_breaks(f, &pts, tol),
            None => integrate_half_line(f, &pts, self.scale(), tol),
        }
    }
}

fn coupling_factor(d: u32) -> f64 {
    (d as f64 - 1.0) / d as f64
}

/// `‖φ̂ ω^{−s}‖ = (S_{d−1} ∫ χ² r^{d−1−2s} dr)^{1/2}`.
pub fn cutoff_norm(c: &Cutoff, s: f64) -> Result<f64> {
    c.validate()?;
    if c.is_zero() {
        return Ok(0.0);
    }
    let a = c.dimension as f64 - 1.0 - 2.0 * s;
    if 2.0 * c.origin_order() + a <= -1.0 {
        return Err(Error::Divergent(format!(
            "‖φ̂/ω^{s}‖: χ² r^{a} is not integrable at the origin (χ ~ r^{})",
            c.origin_order()
        )));
    }
    let surface = sphere_surface(c.dimension);
    let integral = match &c.kind {
        CutoffKind::PowerGaussian { power, scale } => {
            // ∫ r^b e^{−r²/Λ²} dr = Λ^{b+1} Γ((b+1)/2) / 2
            let b = 2.0 * power + a;
            0.5 * scale.powf(b + 1.0) * gamma(0.5 * (b + 1.0))
        }
        CutoffKind::Tabulated { .. } => c.radial_integral(
            |r| if r == 0.0 { 0.0 } else { c.chi(r).powi(2) * r.powf(a) },
            Tolerance::relative(INNER_TOL),
        )?,
    };
    Ok((surface * integral).sqrt())
}

/// One condition of the cutoff validation report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Condition {
    pub id: String,
    pub statement: String,
    pub passed: bool,
    pub value: Option<f64>,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutoffReport {
    pub conditions: Vec<Condition>,
}

impl CutoffReport {
    pub fn all_passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed)
    }

    pub fn get(&self, id: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.id == id)
    }
}

fn norm_condition(c: &Cutoff, id: &str, statement: &str, s: f64) -> Condition {
    match cutoff_norm(c, s) {
        Ok(v) => Condition {
            id: id.into(),
            statement: statement.into(),
            passed: v.is_finite(),
            value: Some(v),
            note: String::new(),
        },
        Err(e) => Condition {
            id: id.into(),
            statement: statement.into(),
            passed: false,
            value: None,
            note: e.to_string(),
        },
    }
}

/// `sup_{h ∈ (0,1]} sup_s |ρ(s+h) − ρ(s)| / h^β` restricted to dyadic `h`,
/// returned per `h = 2^{−k}`, `k = 0..=40`.
fn holder_profile(c: &Cutoff, beta: f64) -> Vec<f64> {
    let s_max = match c.support() {
        Some(r) => 1.5 * r * r,
        None => 100.0 * c.scale().powi(2),
    };
    let grid: Vec<f64> = (0..=2000).map(|i| s_max * i as f64 / 2000.0).collect();
    let kinks: Vec<f64> = match &c.kind {
        CutoffKind::Tabulated { r, .. } => r.iter().map(|x| x * x).collect(),
        CutoffKind::PowerGaussian { .. } => vec![0.0],
    };
    (0..=40)
        .map(|k| {
            let h = 0.5f64.powi(k);
            let probes = grid.iter().copied().chain(kinks.iter().flat_map(|q| [q - 0.5 * h, q - h, *q]));
            probes
                .filter(|s| *s >= 0.0)
                .map(|s| (c.density(s + h) - c.density(s)).abs() / h.powf(beta))
                .fold(0.0, f64::max)
        })
        .collect()
}

/// Largest sampled Hölder exponent for which the dyadic difference quotients
/// stay bounded as `h → 0`.
pub fn holder_exponent(c: &Cutoff) -> Option<f64> {
    HOLDER_EXPONENTS.iter().rev().copied().find(|&beta| {
        let prof = holder_profile(c, beta);
        let coarse = prof[..=20].iter().copied().fold(0.0, f64::max);
        let fine = prof[20..].iter().copied().fold(0.0, f64::max);
        fine <= 4.0 * coarse + 1e-300
    })
}

/// Checks the regularity and integrability conditions on the cutoff.
pub fn validate_cutoff(c: &Cutoff) -> CutoffReport {
    let d = c.dimension as f64;
    let mut conditions = vec![
        norm_condition(c, "ir_inv_omega", "‖φ̂/ω‖ < ∞", 1.0),
        norm_condition(c, "uv_sqrt_omega", "‖√ω φ̂‖ < ∞", -0.5),
        norm_condition(c, "ir_inv_omega_3_2", "‖φ̂/ω^{3/2}‖ < ∞", 1.5),
    ];

    let beta = holder_exponent(c);
    conditions.push(Condition {
        id: "holder_density".into(),
        statement: "ρ(s) = χ(√s)² s^{(d−2)/2} is Hölder continuous".into(),
        passed: beta.is_some(),
        value: beta,
        note: match beta {
            Some(b) => format!("difference quotients bounded for exponent {b}"),
            None => format!("difference quotients unbounded for every exponent in {HOLDER_EXPONENTS:?}"),
        },
    });

    let half = 0.5 * (d - 1.0);
    let mut sup = 0.0_f64;
    let mut probes: Vec<f64> = (0..=4000).map(|i| c.scale() * 10f64.powf(-6.0 + 8.0 * i as f64 / 4000.0)).collect();
    if let CutoffKind::Tabulated { r, .. } = &c.kind {
        probes.extend(r.iter().copied());
    }
    if let CutoffKind::PowerGaussian { power, scale } = &c.kind {
        probes.push(scale * (power + half).sqrt());
    }
    for r in probes {
        sup = sup.max(c.chi(r).abs() * r.powf(half));
    }
    conditions.push(Condition {
        id: "sup_omega_power".into(),
        statement: "‖φ̂ ω^{(d−1)/2}‖_∞ < ∞".into(),
        passed: sup.is_finite(),
        value: Some(sup),
        note: "maximum over a logarithmic grid".into(),
    });

    let (nonvanishing, note) = match &c.kind {
        CutoffKind::PowerGaussian { .. } => (true, String::new()),
        CutoffKind::Tabulated { r, values } => {
            if let Some(i) = values.iter().enumerate().position(|(i, v)| *v == 0.0 && r[i] > 0.0) {
                (false, format!("χ vanishes at the node r = {}", r[i]))
            } else {
                (false, format!("χ vanishes beyond the last node r = {}", r[r.len() - 1]))
            }
        }
    };
    conditions.push(Condition {
        id: "nonvanishing".into(),
        statement: "χ(r) ≠ 0 for r ≠ 0".into(),
        passed: nonvanishing,
        value: None,
        note,
    });
    conditions.push(norm_condition(c, "ir_inv_omega_5_2", "‖φ̂/ω^{5/2}‖ < ∞", 2.5));
    CutoffReport { conditions }
}

/// `m + α² (d−1)/d ‖φ̂/ω‖²`.
pub fn effective_mass(m: f64, alpha: f64, c: &Cutoff) -> Result<f64> {
    require_positive("m", m)?;
    let n = cutoff_norm(c, 1.0)?;
    Ok(m + alpha * alpha * coupling_factor(c.dimension) * n * n)
}

/// Break points of `ρ` in the `u = r²` variable.
fn density_points(c: &Cutoff) -> Vec<f64> {
    match &c.kind {
        CutoffKind::PowerGaussian { scale, .. } => {
            [0.0625, 0.25, 1.0, 4.0, 16.0, 64.0].iter().map(|k| k * scale * scale).collect()
        }
        CutoffKind::Tabulated { r, .. } => r.iter().map(|x| x * x).filter(|u| *u > 0.0).collect(),
    }
}

/// `PV ∫₀^∞ ρ(u)/(s − u) du`.
///
/// On `[0, 2s]` the subtracted integrand `(ρ(u) − ρ(s))/(s − u)` is bounded and
/// the subtracted term `ρ(s) PV∫₀^{2s} du/(s − u) = ρ(s) ln(s/s)` vanishes.
pub fn principal_value(c: &Cutoff, s: f64) -> Result<f64> {
    c.validate()?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(invalid("s", format!("must be finite and >= 0, got {s}")));
    }
    if s == 0.0 {
        // −∫ ρ(u)/u du = −(2/S) ‖φ̂/ω‖²
        let n = cutoff_norm(c, 1.0)?;
        return Ok(-2.0 * n * n / sphere_surface(c.dimension));
    }
    let tol = Tolerance::relative(INNER_TOL).with_abs(1e-300);
    let rho_s = c.density(s);
    let inner = |hi: f64| -> Vec<f64> {
        let mut pts: Vec<f64> = density_points(c).into_iter().filter(|u| *u < hi).collect();
        pts.insert(0, 0.0);
        pts.push(hi);
        pts
    };
    let mut near: Vec<f64> = inner(2.0 * s);
    near.push(s);
    near.sort_by(f64::total_cmp);
    near.dedup();
    let head = integrate_breaks(
        |u| if u == s { 0.0 } else { (c.density(u) - rho_s) / (s - u) },
        &near,
        tol,
    )?;
    let far_pts: Vec<f64> = std::iter::once(2.0 * s)
        .chain(density_points(c).into_iter().filter(|u| *u > 2.0 * s))
        .collect();
    let tail_fn = |u: f64| c.density(u) / (s - u);
    let tail = match c.support() {
        Some(r) if r * r <= 2.0 * s => 0.0,
        Some(_) => integrate_breaks(tail_fn, &far_pts, tol)?,
        None => {
            let last = *far_pts.last().expect("non-empty");
            let body = if far_pts.len() > 1 { integrate_breaks(tail_fn, &far_pts, tol)? } else { 0.0 };
            body + integrate_to_infinity(tail_fn, last, c.scale().powi(2), tol)?
        }
    };
    Ok(head + tail)
}

/// `D₊(s) = m − α² (d−1)/d (S_{d−1}/2) [PV∫ρ(u)/(s − u) du − iπρ(s)]`.
pub fn dplus(c: &Cutoff, m: f64, alpha: f64, s: f64) -> Result<Complex64> {
    require_positive("m", m)?;
    if alpha == 0.0 {
        return Ok(Complex64::new(m, 0.0));
    }
    let pref = alpha * alpha * coupling_factor(c.dimension) * 0.5 * sphere_surface(c.dimension);
    let pv = principal_value(c, s)?;
    Ok(Complex64::new(m - pref * pv, pref * PI * c.density(s)))
}

/// `Im D₊(s)` from `∫ρ(u) η/((s−u)² + η²) du → πρ(s)`, extrapolated to
/// `η → 0` by Neville's scheme on `η = η₀ 2^{−k}`.
pub fn im_dplus_lorentzian(c: &Cutoff, m: f64, alpha: f64, s: f64) -> Result<f64> {
    require_positive("m", m)?;
    require_positive("s", s)?;
    let pref = alpha * alpha * coupling_factor(c.dimension) * 0.5 * sphere_surface(c.dimension);
    if pref == 0.0 {
        return Ok(0.0);
    }
    let eta0 = 0.05 * s.min(c.scale().powi(2));
    let levels = 7;
    let mut etas = Vec::with_capacity(levels);
    let mut vals = Vec::with_capacity(levels);
    let tol = Tolerance::relative(1e-13).with_abs(1e-300);
    for k in 0..levels {
        let eta = eta0 * 0.5f64.powi(k as i32);
        let mut pts: Vec<f64> = density_points(c);
        pts.push(0.0);
        for w in [1.0, 4.0, 16.0, 64.0] {
            pts.push(s - w * eta);
            pts.push(s + w * eta);
        }
        pts.push(s);
        pts.retain(|u| *u >= 0.0);
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        let f = |u: f64| c.density(u) * eta / ((s - u).powi(2) + eta * eta);
        let last = *pts.last().expect("non-empty");
        let body = integrate_breaks(f, &pts, tol)?;
        let tail = match c.support() {
            Some(_) => 0.0,
            None => integrate_to_infinity(f, last, c.scale().powi(2), tol)?,
        };
        etas.push(eta);
        vals.push(body + tail);
    }
    // Neville extrapolation of the polynomial in η to η = 0
    let mut p = vals;
    for j in 1..levels {
        for i in (j..levels).rev() {
            p[i] = (etas[i - j] * p[i] - etas[i] * p[i - 1]) / (etas[i - j] - etas[i]);
        }
    }
    Ok(pref * p[levels - 1])
}

/// Minimum of `|D₊(s)|` over a logarithmic grid `s ∈ [10⁻⁶, 10⁶]`, with the
/// minimizing `s`.
pub fn dplus_infimum(c: &Cutoff, m: f64, alpha: f64) -> Result<(f64, f64)> {
    let grid: Vec<f64> = (0..=120).map(|i| 10f64.powf(-6.0 + 0.1 * i as f64)).collect();
    let vals: Vec<(f64, f64)> = grid
        .par_iter()
        .map(|&s| dplus(c, m, alpha, s).map(|z| (s, z.norm())))
        .collect::<Result<_>>()?;
    let at0 = (0.0, dplus(c, m, alpha, 0.0)?.norm());
    Ok(vals.into_iter().chain([at0]).fold((f64::NAN, f64::INFINITY), |acc, v| if v.1 < acc.1 { v } else { acc }))
}

/// `Φ = (d−1) S_{d−1} ∫ χ(r)² r^{d−1} / (r³ |D₊(r²)|²) dr`.
pub fn lambda_aggregate(c: &Cutoff, m: f64, alpha: f64) -> Result<f64> {
    require_positive("m", m)?;
    let d = c.dimension as f64;
    let n32 = cutoff_norm(c, 1.5)?;
    if c.is_zero() {
        return Ok(0.0);
    }
    if alpha == 0.0 {
        return Ok((d - 1.0) * n32 * n32 / (m * m));
    }
    let (s_min, inf) = dplus_infimum(c, m, alpha)?;
    if !(inf > 1e-12 * m) {
        return Err(Error::Domain(format!("|D₊| vanishes numerically near s = {s_min} ({inf:e})")));
    }
    let surface = sphere_surface(c.dimension);
    let integral = c.radial_integral(
        |r| {
            if r == 0.0 {
                return 0.0;
            }
            let chi = c.chi(r);
            if chi == 0.0 {
                return 0.0;
            }
            let z = dplus(c, m, alpha, r * r).expect("validated inputs");
            chi * chi * r.powf(d - 4.0) / z.norm_sqr()
        },
        Tolerance::relative(1e-9),
    )?;
    Ok((d - 1.0) * surface * integral)
}

/// `(‖φ̂/√(t²+ω²)‖², ‖φ̂/(t²+ω²)‖²)` by adaptive quadrature.
fn resolvent_norms(c: &Cutoff, t: f64) -> Result<(f64, f64)> {
    let d = c.dimension as f64;
    let surface = sphere_surface(c.dimension);
    let tol = Tolerance::relative(INNER_TOL).with_abs(1e-300);
    let w = |r: f64| c.chi(r).powi(2) * r.powf(d - 1.0);
    let n1 = c.radial_integral(|r| w(r) / (t * t + r * r), tol)?;
    let n2 = c.radial_integral(|r| w(r) / (t * t + r * r).powi(2), tol)?;
    Ok((surface * n1, surface * n2))
}

fn shift_integrand(m: f64, a2c: f64, t: f64, n1: f64, n2: f64) -> f64 {
    t * t * a2c * n2 / (m + a2c * n1)
}

/// Vacuum shift `g = (d/2π) ∫ t² α² c_d ‖φ̂/(t²+ω²)‖² / (m + α² c_d
/// ‖φ̂/√(t²+ω²)‖²) dt` by nested adaptive quadrature; the tail `t > T` is
/// mapped by `t = T/x`.
pub fn energy_shift_g(m: f64, alpha: f64, c: &Cutoff) -> Result<f64> {
    require_positive("m", m)?;
    c.validate()?;
    let a2c = alpha * alpha * coupling_factor(c.dimension);
    if a2c == 0.0 || c.is_zero() {
        return Ok(0.0);
    }
    let f = |t: f64| -> f64 {
        match resolvent_norms(c, t) {
            Ok((n1, n2)) => shift_integrand(m, a2c, t, n1, n2),
            Err(_) => f64::NAN,
        }
    };
    let big_t = 4.0 * c.scale();
    let tol = Tolerance::relative(1e-10);
    let pts: Vec<f64> = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0].iter().map(|k| k * c.scale()).collect();
    let head = integrate_breaks(f, &pts, tol).map_err(|e| tail_error("head", e))?;
    let tail = integrate_breaks(
        |x: f64| if x == 0.0 { 0.0 } else { f(big_t / x) * big_t / (x * x) },
        &[0.0, 0.5, 1.0],
        tol,
    )
    .map_err(|e| tail_error(&format!("tail (head = {head:e})"), e))?;
    Ok(c.dimension as f64 / PI * (head + tail))
}

fn tail_error(part: &str, e: Error) -> Error {
    Error::NotConverged {
        what: "vacuum shift outer integral",
        detail: format!("{part}: {e}"),
    }
}

/// Same integral on a fixed tensor grid: composite Gauss–Legendre in
/// `y ↦ Λ y/(1−y)` for both `t` and `r`.
pub fn energy_shift_g_tensor(m: f64, alpha: f64, c: &Cutoff, panels: usize, order: usize) -> Result<f64> {
    require_positive("m", m)?;
    c.validate()?;
    let a2c = alpha * alpha * coupling_factor(c.dimension);
    if a2c == 0.0 || c.is_zero() {
        return Ok(0.0);
    }
    let d = c.dimension as f64;
    let lam = c.scale();
    let rule = GaussLegendre::new(order);
    let mapped: Vec<(f64, f64)> = (0..panels)
        .flat_map(|k| {
            let (a, b) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            rule.panel(a, b).collect::<Vec<_>>()
        })
        .map(|(y, w)| (lam * y / (1.0 - y), w * lam / (1.0 - y).powi(2)))
        .collect();
    let radial: Vec<(f64, f64)> = mapped
        .iter()
        .map(|&(r, w)| (r, w * c.chi(r).powi(2) * r.powf(d - 1.0)))
        .filter(|(_, w)| *w != 0.0)
        .collect();
    let surface = sphere_surface(c.dimension);
    let values: Vec<f64> = mapped
        .par_iter()
        .map(|&(t, wt)| {
            let (mut n1, mut n2) = (0.0, 0.0);
            for &(r, w) in &radial {
                let den = t * t + r * r;
                n1 += w / den;
                n2 += w / (den * den);
            }
            wt * shift_integrand(m, a2c, t, surface * n1, surface * n2)
        })
        .collect();
    Ok(d / PI * values.iter().sum::<f64>())
}

/// Scalar field constants at `(m, α)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldConstants {
    pub m_eff: f64,
    pub g: f64,
    pub phi: f64,
    pub norm_inv_omega: f64,
    pub norm_inv_omega_3_2: f64,
    /// `None` when `‖φ̂/ω^{5/2}‖` diverges.
    pub norm_inv_omega_5_2: Option<f64>,
    pub norm_sqrt_omega: f64,
}

pub fn field_constants(c: &Cutoff, m: f64, alpha: f64) -> Result<FieldConstants> {
    Ok(FieldConstants {
        m_eff: effective_mass(m, alpha, c)?,
        g: energy_shift_g(m, alpha, c)?,
        phi: lambda_aggregate(c, m, alpha)?,
        norm_inv_omega: cutoff_norm(c, 1.0)?,
        norm_inv_omega_3_2: cutoff_norm(c, 1.5)?,
        norm_inv_omega_5_2: cutoff_norm(c, 2.5).ok(),
        norm_sqrt_omega: cutoff_norm(c, -0.5)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn pg() -> Cutoff {
        Cutoff::power_gaussian(2.0, 1.0).unwrap()
    }

    #[test]
    fn closed_form_norms() {
        let sqrt_pi = PI.sqrt();
        assert_relative_eq!(cutoff_norm(&pg(), 1.0).unwrap().powi(2), 1.5 * PI * sqrt_pi, max_relative = 1e-13);
        assert_relative_eq!(cutoff_norm(&pg(), 1.0).unwrap(), 2.890_067_8, max_relative = 1e-7);
        assert_relative_eq!(cutoff_norm(&pg(), 0.0).unwrap().powi(2), 4.0 * PI * 15.0 / 16.0 * sqrt_pi, max_relative = 1e-13);
        let zero = Cutoff::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(cutoff_norm(&zero, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn tabulated_norm_matches_closed_form() {
        let r: Vec<f64> = (0..=4000).map(|i| 12.0 * i as f64 / 4000.0).collect();
        let v: Vec<f64> = r.iter().map(|x| pg().chi(*x)).collect();
        let tab = Cutoff::tabulated(r, v).unwrap();
        // linear interpolation makes χ ~ r at the origin, so ‖φ̂/ω^{5/2}‖ diverges
        assert!(cutoff_norm(&tab, 2.5).is_err());
        for s in [0.0, 1.0, 1.5] {
            assert_relative_eq!(cutoff_norm(&tab, s).unwrap(), cutoff_norm(&pg(), s).unwrap(), max_relative = 1e-5);
        }
    }

    #[test]
    fn divergent_norms() {
        let flat = Cutoff::power_gaussian(0.0, 1.0).unwrap();
        assert!(matches!(cutoff_norm(&flat, 1.5), Err(Error::Divergent(_))));
        assert!(cutoff_norm(&flat, 1.0).is_ok());
        assert!(matches!(cutoff_norm(&pg(), 3.5), Err(Error::Divergent(_))));
    }

    #[test]
    fn validation_reports() {
        let rep = validate_cutoff(&pg());
        assert!(rep.all_passed(), "{rep:#?}");
        assert_eq!(rep.get("holder_density").unwrap().value, Some(0.75));

        let rep = validate_cutoff(&Cutoff::power_gaussian(0.0, 1.0).unwrap());
        assert!(!rep.get("ir_inv_omega_3_2").unwrap().passed);
        assert!(rep.get("ir_inv_omega").unwrap().passed);
        assert!(rep.get("holder_density").unwrap().passed);

        let sharp = Cutoff::tabulated(vec![0.0, 1.0], vec![1.0, 1.0]).unwrap();
        let rep = validate_cutoff(&sharp);
        assert!(!rep.get("holder_density").unwrap().passed);
        assert!(!rep.get("nonvanishing").unwrap().passed);
    }

    #[test]
    fn effective_mass_values() {
        assert_eq!(effective_mass(1.3, 0.0, &pg()).unwrap(), 1.3);
        assert_relative_eq!(effective_mass(1.0, 1.0, &pg()).unwrap(), 1.0 + PI.powf(1.5), max_relative = 1e-13);
        assert_eq!(effective_mass(1.0, -0.7, &pg()).unwrap(), effective_mass(1.0, 0.7, &pg()).unwrap());
    }

    #[test]
    fn dplus_limits() {
        let d0 = dplus(&pg(), 1.0, 1.0, 0.0).unwrap();
        assert_eq!(d0.im, 0.0);
        assert_relative_eq!(d0.re, 1.0 + PI.powf(1.5), max_relative = 1e-12);
        // the general branch is continuous at the origin
        let small = dplus(&pg(), 1.0, 1.0, 1e-10).unwrap();
        assert!((small.re - d0.re).abs() < 1e-6, "{small}");
        // Re D₊(s) − m ≈ −α² c_d (S/2) ∫ρ / s for large s, with ∫ρ = Γ(7/2)
        let far = dplus(&pg(), 1.0, 1.0, 1e4).unwrap();
        let lead = (2.0 / 3.0) * 2.0 * PI * gamma(3.5) / 1e4;
        assert!((far.re - (1.0 - lead)).abs() < 1e-6 && far.im.abs() < 1e-12, "{far}");
        let weak = dplus(&pg(), 1.0, 0.2, 1e4).unwrap();
        assert!((weak.re - 1.0).abs() < 1e-4);
        assert_eq!(dplus(&pg(), 2.0, 0.0, 3.0).unwrap(), Complex64::new(2.0, 0.0));
    }

    #[test]
    fn principal_value_against_excision() {
        // direct quadrature with a symmetric window (s − δ, s + δ) removed
        let c = pg();
        for s in [0.3, 1.0, 2.5, 7.0] {
            let pv = principal_value(&c, s).unwrap();
            let tol = Tolerance::relative(1e-11);
            let f = |u: f64| c.density(u) / (s - u);
            let delta = 1e-6 * s;
            let mut left = vec![0.0];
            let mut right = Vec::new();
            for k in (0..=6).rev() {
                let w = s * 10f64.powi(-k);
                left.push(s - w.min(0.9 * s).max(delta));
                right.push(s + w.max(delta));
            }
            left.dedup();
            let l = integrate_breaks(f, &left, tol).unwrap();
            let r = integrate_breaks(f, &right, tol).unwrap()
                + integrate_to_infinity(f, *right.last().unwrap(), 1.0, tol).unwrap();
            // the window contributes −2δρ′(s) + O(δ³)
            let h = 1e-5;
            let drho = (c.density(s + h) - c.density(s - h)) / (2.0 * h);
            let reference = l + r - 2.0 * delta * drho;
            assert!((pv - reference).abs() < 1e-8 * (1.0 + pv.abs()), "s = {s}: {pv} vs {reference}");
        }
    }

    #[test]
    fn imaginary_part_two_ways() {
        for s in [0.1, 1.0, 3.0] {
            let closed = dplus(&pg(), 1.0, 1.0, s).unwrap().im;
            let lorentz = im_dplus_lorentzian(&pg(), 1.0, 1.0, s).unwrap();
            assert!(closed > 0.0);
            assert!((closed - lorentz).abs() < 1e-5 * closed.max(1e-300), "s = {s}: {closed} vs {lorentz}");
        }
    }

    #[test]
    fn dplus_bounded_away_from_zero() {
        let (_, inf) = dplus_infimum(&pg(), 1.0, 1.0).unwrap();
        assert!(inf > 0.1, "{inf}");
    }

    #[test]
    fn lambda_aggregate_bounds() {
        let n32 = cutoff_norm(&pg(), 1.5).unwrap();
        assert_relative_eq!(lambda_aggregate(&pg(), 2.0, 0.0).unwrap(), 2.0 * n32 * n32 / 4.0, max_relative = 1e-14);
        let phi = lambda_aggregate(&pg(), 1.0, 1.0).unwrap();
        let (_, inf) = dplus_infimum(&pg(), 1.0, 1.0).unwrap();
        assert!(phi > 0.0 && phi <= 2.0 * n32 * n32 / (inf * inf));
        let zero = Cutoff::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).unwrap();
        assert_eq!(lambda_aggregate(&zero, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn vacuum_shift_two_schemes() {
        assert_eq!(energy_shift_g(1.0, 0.0, &pg()).unwrap(), 0.0);
        let nested = energy_shift_g(1.0, 1.0, &pg()).unwrap();
        let tensor = energy_shift_g_tensor(1.0, 1.0, &pg(), 64, 16).unwrap();
        assert!(nested > 0.0);
        assert!((nested - tensor).abs() < 1e-6 * nested, "{nested} vs {tensor}");
        assert_eq!(energy_shift_g(1.0, -0.5, &pg()).unwrap(), energy_shift_g(1.0, 0.5, &pg()).unwrap());
    }
}

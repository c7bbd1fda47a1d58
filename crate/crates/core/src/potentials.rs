//! Radial external potentials `V ≤ 0`, their norms and the κ-scaling map
//! `V_κ(x) = V(x/κ)/κ²`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, require_positive, Error, Result};
use crate::quadrature::{integrate_breaks, integrate_half_line, Tolerance};
use crate::special::sphere_surface;

const NORM_TOL: f64 = 1e-10;

/// Shape of the unscaled potential profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PotentialKind {
    /// `−depth` on `r < radius`, zero outside.
    SquareWell { depth: f64, radius: f64 },
    /// `−depth · e^{−r/range}`.
    Exponential { depth: f64, range: f64 },
    /// `−depth · e^{−r²/(2 width²)}`.
    Gaussian { depth: f64, width: f64 },
    /// Monotone piecewise-cubic interpolation of `(r, value)` samples; zero
    /// beyond the last node.
    Tabulated { r: Vec<f64>, values: Vec<f64> },
}

impl PotentialKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            PotentialKind::SquareWell { depth, radius } => {
                require_positive("depth", *depth)?;
                require_positive("radius", *radius)?;
            }
            PotentialKind::Exponential { depth, range } => {
                require_positive("depth", *depth)?;
                require_positive("range", *range)?;
            }
            PotentialKind::Gaussian { depth, width } => {
                require_positive("depth", *depth)?;
                require_positive("width", *width)?;
            }
            PotentialKind::Tabulated { r, values } => {
                if r.len() < 2 || r.len() != values.len() {
                    return Err(invalid(
                        "tabulated",
                        format!("need >= 2 matching (r, value) pairs, got {} and {}", r.len(), values.len()),
                    ));
                }
                if r[0] < 0.0 || r.windows(2).any(|w| !(w[1] > w[0])) || r.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("tabulated", "grid must be finite, nonnegative and strictly increasing"));
                }
                if let Some(v) = values.iter().find(|v| !v.is_finite() || **v > 0.0) {
                    return Err(invalid("tabulated", format!("values must be finite and <= 0, got {v}")));
                }
            }
        }
        Ok(())
    }

    fn eval(&self, r: f64) -> f64 {
        match self {
            PotentialKind::SquareWell { depth, radius } => {
                if r < *radius {
                    -depth
                } else {
                    0.0
                }
            }
            PotentialKind::Exponential { depth, range } => -depth * (-r / range).exp(),
            PotentialKind::Gaussian { depth, width } => -depth * (-0.5 * (r / width).powi(2)).exp(),
            PotentialKind::Tabulated { r: grid, values } => pchip(grid, values, r).min(0.0),
        }
    }
}

/// Fritsch–Carlson monotone cubic Hermite interpolation; zero outside the grid
/// on the right, constant continuation on the left.
fn pchip(x: &[f64], y: &[f64], t: f64) -> f64 {
    let n = x.len();
    if t > x[n - 1] {
        return 0.0;
    }
    if t <= x[0] {
        return y[0];
    }
    let i = match x.partition_point(|&xi| xi <= t) {
        0 => 0,
        k => (k - 1).min(n - 2),
    };
    let secant = |k: usize| (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
    let slope = |k: usize| -> f64 {
        if k == 0 {
            return secant(0);
        }
        if k == n - 1 {
            return secant(n - 2);
        }
        let (d0, d1) = (secant(k - 1), secant(k));
        if d0 * d1 <= 0.0 {
            0.0
        } else {
            let (h0, h1) = (x[k] - x[k - 1], x[k + 1] - x[k]);
            let w1 = 2.0 * h1 + h0;
            let w2 = h1 + 2.0 * h0;
            (w1 + w2) / (w1 / d0 + w2 / d1)
        }
    };
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let (m0, m1) = (slope(i), slope(i + 1));
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    h00 * y[i] + h10 * h * m0 + h01 * y[i + 1] + h11 * h * m1
}

/// A radial potential in dimension `d` with scale κ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Potential {
    #[serde(flatten)]
    pub kind: PotentialKind,
    pub dimension: u32,
    #[serde(default = "unit_scale")]
    pub scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl Potential {
    pub fn new(kind: PotentialKind, dimension: u32) -> Result<Self> {
        let p = Self {
            kind,
            dimension,
            scale: 1.0,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn square_well(depth: f64, radius: f64) -> Result<Self> {
        Self::new(PotentialKind::SquareWell { depth, radius }, 3)
    }

    pub fn exponential(depth: f64, range: f64) -> Result<Self> {
        Self::new(PotentialKind::Exponential { depth, range }, 3)
    }

    pub fn gaussian(depth: f64, width: f64) -> Result<Self> {
        Self::new(PotentialKind::Gaussian { depth, width }, 3)
    }

    pub fn tabulated(r: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        Self::new(PotentialKind::Tabulated { r, values }, 3)
    }

    /// The identically vanishing potential (a square well of depth zero).
    pub fn zero(dimension: u32) -> Self {
        Self {
            kind: PotentialKind::SquareWell {
                depth: 0.0,
                radius: 1.0,
            },
            dimension,
            scale: 1.0,
        }
    }

    pub fn with_dimension(mut self, dimension: u32) -> Result<Self> {
        self.dimension = dimension;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dimension < 3 {
            return Err(invalid("dimension", format!("must be >= 3, got {}", self.dimension)));
        }
        require_positive("scale", self.scale)?;
        if self.is_zero() {
            return Ok(());
        }
        self.kind.validate()
    }

    fn is_zero(&self) -> bool {
        matches!(self.kind, PotentialKind::SquareWell { depth, .. } if depth == 0.0)
    }

    /// `V_κ(r) = V(r/κ)/κ²`, with tabulated data extrapolated as zero beyond
    /// the last node.
    pub fn eval(&self, r: f64) -> f64 {
        debug_assert!(r >= 0.0);
        let k = self.scale;
        self.kind.eval(r / k) / (k * k)
    }

    /// `|V_κ(r)|^{1/2}`.
    pub fn sqrt_abs(&self, r: f64) -> f64 {
        (-self.eval(r)).max(0.0).sqrt()
    }

    /// Composes the current scale with `kappa`.
    pub fn scaled(&self, kappa: f64) -> Result<Self> {
        require_positive("kappa", kappa)?;
        Ok(Self {
            scale: self.scale * kappa,
            ..self.clone()
        })
    }

    /// Characteristic length of the scaled profile (radius, range, width or
    /// last tabulated node).
    pub fn range_parameter(&self) -> f64 {
        let base = match &self.kind {
            PotentialKind::SquareWell { radius, .. } => *radius,
            PotentialKind::Exponential { range, .. } => *range,
            PotentialKind::Gaussian { width, .. } => *width,
            PotentialKind::Tabulated { r, .. } => *r.last().expect("validated grid"),
        };
        base * self.scale
    }

    /// Radius beyond which the scaled potential vanishes identically.
    pub fn support_radius(&self) -> Option<f64> {
        match &self.kind {
            PotentialKind::SquareWell { .. } | PotentialKind::Tabulated { .. } => Some(self.range_parameter()),
            _ => None,
        }
    }

    /// Points where the profile has a kink or jump (scaled).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            PotentialKind::SquareWell { radius, .. } => vec![radius * self.scale],
            PotentialKind::Tabulated { r, .. } => r.iter().filter(|x| **x > 0.0).map(|x| x * self.scale).collect(),
            _ => Vec::new(),
        }
    }

    /// Largest value of `|V_κ|`.
    pub fn max_depth(&self) -> f64 {
        let base = match &self.kind {
            PotentialKind::SquareWell { depth, .. }
            | PotentialKind::Exponential { depth, .. }
            | PotentialKind::Gaussian { depth, .. } => *depth,
            PotentialKind::Tabulated { values, .. } => values.iter().fold(0.0_f64, |m, v| m.max(-v)),
        };
        base / (self.scale * self.scale)
    }

    /// Integrates `f(r)` against the potential's natural panel layout on
    /// `[0, ∞)`.
    pub(crate) fn integrate_radial<F: Fn(f64) -> f64>(&self, f: F, tol: Tolerance) -> Result<f64> {
        let a = self.range_parameter();
        match self.support_radius() {
            Some(_) => {
                let mut pts = vec![0.0];
                pts.extend(self.breakpoints());
                integrate_breaks(f, &pts, tol)
            }
            None => integrate_half_line(f, &[0.0, a, 4.0 * a, 16.0 * a], 4.0 * a, tol),
        }
    }

    /// `(∫ |V_κ(x)|^q dx)^{1/q}` over `R^d`.
    pub fn lp_norm(&self, q: f64) -> Result<f64> {
        if !(q.is_finite() && q > 1.0) {
            return Err(invalid("q", format!("must be > 1, got {q}")));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        if let PotentialKind::Tabulated { values, .. } = &self.kind {
            let tail = *values.last().expect("validated grid");
            if tail != 0.0 {
                return Err(Error::Divergent(format!(
                    "tabulated potential ends at {tail} instead of 0; the L^{q} tail is not controlled"
                )));
            }
        }
        let d = self.dimension as f64;
        let integral = self.integrate_radial(|r| (-self.eval(r)).powf(q) * r.powf(d - 1.0), Tolerance::relative(NORM_TOL))?;
        Ok((sphere_surface(self.dimension) * integral).powf(1.0 / q))
    }

    /// `∬ |V(x) V(y)| / |x − y|² dx dy` in `d = 3`, with the angular integrals
    /// done analytically: `8π² ∬ |V(r)||V(s)| r s ln|(r+s)/(r−s)| dr ds`.
    pub fn rollnik_norm(&self) -> Result<f64> {
        if self.dimension != 3 {
            return Err(Error::UnsupportedDimension(self.dimension));
        }
        if self.is_zero() {
            return Ok(0.0);
        }
        let a = self.range_parameter();
        let mut pts = vec![0.0];
        pts.extend(self.breakpoints());
        let support = self.support_radius();
        let inner = |r: f64| -> f64 {
            let vr = -self.eval(r);
            if vr == 0.0 {
                return 0.0;
            }
            let f = |s: f64| -self.eval(s) * s * ((r + s) / (r - s)).abs().ln();
            let mut p: Vec<f64> = pts.iter().copied().chain(std::iter::once(r)).collect();
            p.sort_by(f64::total_cmp);
            p.dedup();
            let tol = Tolerance::relative(1e-11);
            let v = match support {
                Some(_) => integrate_breaks(f, &p, tol),
                None => {
                    let last = p.last().copied().unwrap_or(0.0).max(16.0 * a);
                    p.push(last);
                    p.dedup();
                    integrate_half_line(f, &p, 4.0 * a, tol)
                }
            };
            vr * r * v.unwrap_or(f64::NAN)
        };
        let outer = self.integrate_radial(inner, Tolerance::relative(1e-9))?;
        Ok(8.0 * std::f64::consts::PI.powi(2) * outer)
    }

    /// Lieb's constant `D_V = √2 π Γ(d/2−1)/Γ(d/2+1) (Γ(d)/Γ(d/2))^{2/d} ‖V‖²_{d/2}`.
    pub fn lieb_bound(&self) -> Result<f64> {
        let norm = self.lp_norm(self.dimension as f64 / 2.0)?;
        Ok(lieb_constant(self.dimension) * norm * norm)
    }
}

/// The dimension-dependent prefactor of [`Potential::lieb_bound`].
pub fn lieb_constant(d: u32) -> f64 {
    let h = d as f64 / 2.0;
    std::f64::consts::SQRT_2 * std::f64::consts::PI * gamma(h - 1.0) / gamma(h + 1.0)
        * (gamma(d as f64) / gamma(h)).powf(2.0 / d as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn catalog() -> Vec<Potential> {
        vec![
            Potential::square_well(1.0, 1.0).unwrap(),
            Potential::exponential(1.0, 1.0).unwrap(),
            Potential::gaussian(1.0, 1.0).unwrap(),
            Potential::tabulated(vec![0.0, 0.5, 1.0, 1.5, 2.0], vec![-1.0, -0.8, -0.4, -0.1, 0.0]).unwrap(),
        ]
    }

    #[test]
    fn square_well_values() {
        let p = Potential::square_well(1.0, 1.0).unwrap();
        assert_eq!(p.eval(0.5), -1.0);
        assert_eq!(p.eval(2.0), 0.0);
        let p2 = p.scaled(2.0).unwrap();
        assert_eq!(p2.eval(1.5), -0.25);
        assert_eq!(p2.eval(1.0), -0.25);
        assert_eq!(p.scaled(1.0).unwrap(), p);
    }

    #[test]
    fn scaling_composes() {
        for p in catalog() {
            let a = p.scaled(2.0).unwrap().scaled(3.0).unwrap();
            let b = p.scaled(6.0).unwrap();
            for i in 0..50 {
                let r = 0.17 * i as f64;
                assert_relative_eq!(a.eval(r), b.eval(r), max_relative = 1e-15);
            }
        }
        assert!(Potential::square_well(1.0, 1.0).unwrap().scaled(0.0).is_err());
        assert!(Potential::square_well(1.0, 1.0).unwrap().scaled(-1.0).is_err());
    }

    #[test]
    fn invalid_parameters() {
        assert!(Potential::square_well(-1.0, 1.0).is_err());
        assert!(Potential::exponential(1.0, 0.0).is_err());
        assert!(Potential::tabulated(vec![0.0, 1.0], vec![-1.0, 0.5]).is_err());
        assert!(Potential::tabulated(vec![0.0, 0.0], vec![-1.0, 0.0]).is_err());
        assert!(Potential::square_well(1.0, 1.0).unwrap().with_dimension(2).is_err());
    }

    #[test]
    fn nonpositive_everywhere() {
        for p in catalog() {
            for i in 0..400 {
                assert!(p.eval(0.013 * i as f64) <= 0.0);
            }
        }
    }

    #[test]
    fn tabulated_interpolation_is_monotone_and_exact_at_nodes() {
        let p = &catalog()[3];
        if let PotentialKind::Tabulated { r, values } = &p.kind {
            for (x, v) in r.iter().zip(values) {
                assert_relative_eq!(p.eval(*x), *v, epsilon = 1e-15);
            }
        }
        let mut prev = p.eval(0.0);
        for i in 1..=200 {
            let v = p.eval(0.01 * i as f64);
            assert!(v >= prev - 1e-15, "monotone data must interpolate monotonically");
            prev = v;
        }
        assert_eq!(p.eval(2.5), 0.0);
    }

    #[test]
    fn lp_norms() {
        let sw = Potential::square_well(1.0, 1.0).unwrap();
        let vol = 4.0 * PI / 3.0;
        assert_relative_eq!(sw.lp_norm(1.5).unwrap(), vol.powf(2.0 / 3.0), max_relative = 1e-10);
        let sw2 = Potential::square_well(2.0, 1.0).unwrap();
        assert_relative_eq!(sw2.lp_norm(1.5).unwrap(), 2.0 * vol.powf(2.0 / 3.0), max_relative = 1e-10);
        // ∫ e^{−3r/2} 4π r² dr = 4π Γ(3) (2/3)³
        let ex = Potential::exponential(1.0, 1.0).unwrap();
        let exact = (4.0 * PI * 2.0 * (2.0_f64 / 3.0).powi(3)).powf(2.0 / 3.0);
        assert_relative_eq!(ex.lp_norm(1.5).unwrap(), exact, max_relative = 1e-10);
        assert_eq!(Potential::zero(3).lp_norm(1.5).unwrap(), 0.0);
        assert!(sw.lp_norm(1.0).is_err());
    }

    #[test]
    fn lp_norm_is_homogeneous() {
        for c in [0.3, 2.0, 7.5] {
            let a = Potential::gaussian(c, 1.3).unwrap().lp_norm(1.5).unwrap();
            let b = Potential::gaussian(1.0, 1.3).unwrap().lp_norm(1.5).unwrap();
            assert_relative_eq!(a, c * b, max_relative = 1e-10);
        }
    }

    #[test]
    fn critical_lp_norm_is_scale_invariant() {
        for p in catalog() {
            let base = p.lp_norm(1.5).unwrap();
            for k in [0.5, 2.0, 10.0] {
                let scaled = p.scaled(k).unwrap().lp_norm(1.5).unwrap();
                assert_relative_eq!(scaled, base, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn tabulated_with_nonzero_tail_diverges() {
        let p = Potential::tabulated(vec![0.0, 1.0], vec![-1.0, -0.5]).unwrap();
        assert!(matches!(p.lp_norm(1.5), Err(Error::Divergent(_))));
    }

    #[test]
    fn lieb_constant_in_three_dimensions() {
        let expected = std::f64::consts::SQRT_2 * PI.powf(2.0 / 3.0) * 4.0_f64.powf(5.0 / 3.0) / 3.0;
        assert!((lieb_constant(3) - expected).abs() < 1e-12);
        let sw = Potential::square_well(1.0, 1.0).unwrap();
        let norm = sw.lp_norm(1.5).unwrap();
        assert_relative_eq!(sw.lieb_bound().unwrap(), expected * norm * norm, max_relative = 1e-12);
        assert_relative_eq!(sw.lieb_bound().unwrap(), 68.8195, max_relative = 1e-5);
        assert_eq!(Potential::zero(3).lieb_bound().unwrap(), 0.0);
    }

    #[test]
    fn rollnik_square_well() {
        // frozen from a 4·10⁶-sample Monte Carlo estimate in the unit ball
        // (39.51) and a 20-digit nested quadrature (39.47841760435743 = 4π²)
        let sw = Potential::square_well(1.0, 1.0).unwrap();
        let got = sw.rollnik_norm().unwrap();
        assert_relative_eq!(got, 39.478_417_604_357_43, max_relative = 1e-7);
        assert_eq!(Potential::zero(3).rollnik_norm().unwrap(), 0.0);
        assert!(matches!(
            Potential::zero(4).rollnik_norm(),
            Err(Error::UnsupportedDimension(4))
        ));
    }

    #[test]
    fn rollnik_is_scale_invariant_in_three_dimensions() {
        let p = Potential::exponential(1.0, 1.0).unwrap();
        let base = p.rollnik_norm().unwrap();
        let scaled = p.scaled(2.0).unwrap().rollnik_norm().unwrap();
        assert!(base > 0.0);
        assert_relative_eq!(scaled, base, max_relative = 1e-6);
    }
}

//! Binding phase diagram: critical masses, coupling thresholds, mass bounds,
//! point classification and the κ-scaling design search.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::field::{cutoff_norm, Cutoff};
use crate::green::SectorSpec;
use crate::potentials::Potential;
use crate::spectra::{top_norm, MeshPolicy, SpectralResult};

/// A mass `1/‖K_E‖` with its propagated discretization error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassEstimate {
    pub value: f64,
    pub error: f64,
}

fn mass_from(res: &SpectralResult, what: &'static str) -> Result<MassEstimate> {
    if !res.converged {
        return Err(Error::NotConverged {
            what,
            detail: format!(
                "top eigenvalue per level {:?} on {:?} nodes",
                res.level_values, res.node_counts
            ),
        });
    }
    if !(res.lambda_max > 0.0) {
        return Err(Error::Domain(format!("{what}: ‖K‖ = 0, the potential never binds")));
    }
    let lam = res.lambda_max;
    Ok(MassEstimate {
        value: 1.0 / lam,
        error: res.error_estimate / (lam * lam),
    })
}

/// `m_c = 1/‖K_0‖` (the s-wave sector carries the norm).
pub fn critical_mass(p: &Potential, mesh: &MeshPolicy) -> Result<MassEstimate> {
    let s = SectorSpec::new(p.dimension, 0, 0.0)?;
    mass_from(&top_norm(p, &s, mesh)?, "critical mass")
}

/// `m_ε = 1/‖K_{−ε}‖`.
pub fn m_epsilon(p: &Potential, eps: f64, mesh: &MeshPolicy) -> Result<MassEstimate> {
    require_positive("eps", eps)?;
    let s = SectorSpec::new(p.dimension, 0, -eps)?;
    mass_from(&top_norm(p, &s, mesh)?, "m_eps")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    NoGroundState,
    GroundState,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoGroundState => "no-ground-state",
            Verdict::GroundState => "ground-state",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// `(m_−(α), m_+(α))`, each clamped at zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBounds {
    pub m_minus: f64,
    pub m_plus: f64,
    pub minus_clamped: bool,
    /// Set when `m_+ ≤ 0`: a ground state exists for every `m > 0`.
    pub plus_clamped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub mesh: MeshPolicy,
    pub eps: f64,
    pub m_c_error: f64,
    pub m_eps_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseDiagnosis {
    pub m: f64,
    pub alpha: f64,
    pub verdict: Verdict,
    pub m_c: f64,
    pub m_eps: f64,
    /// Undefined when `m ≥ m_c` (binding already at zero coupling).
    pub alpha0: Option<f64>,
    pub alpha_eps: Option<f64>,
    pub m_minus: f64,
    pub m_plus: f64,
    /// A `GroundState` verdict holds for the κ-scaled potential at large κ
    /// only; nothing is claimed at κ = 1.
    pub requires_kappa_scaling: bool,
    pub provenance: Provenance,
}

/// Critical values shared by all points of a phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSetup {
    pub m_c: MassEstimate,
    pub m_eps: MassEstimate,
    pub eps: f64,
    /// `(d−1)/d ‖φ̂/ω‖²`.
    pub coupling: f64,
    pub mesh: MeshPolicy,
}

impl PhaseSetup {
    pub fn new(p: &Potential, c: &Cutoff, eps: f64, mesh: &MeshPolicy) -> Result<Self> {
        if p.dimension != c.dimension {
            return Err(invalid(
                "dimension",
                format!("potential is {}-dimensional, cutoff {}-dimensional", p.dimension, c.dimension),
            ));
        }
        let n = cutoff_norm(c, 1.0)?;
        let d = c.dimension as f64;
        let coupling = (d - 1.0) / d * n * n;
        if !(coupling > 0.0) {
            return Err(invalid("cutoff", "‖φ̂/ω‖ vanishes; coupling thresholds are undefined"));
        }
        Ok(Self {
            m_c: critical_mass(p, mesh)?,
            m_eps: m_epsilon(p, eps, mesh)?,
            eps,
            coupling,
            mesh: mesh.clone(),
        })
    }

    fn check_mass(&self, m: f64) -> Result<()> {
        require_positive("m", m)?;
        if m >= self.m_c.value {
            return Err(Error::AlreadyBinding { m, m_c: self.m_c.value });
        }
        Ok(())
    }

    /// `α₀ = √((m_c − m)/((d−1)/d ‖φ̂/ω‖²))`.
    pub fn alpha0(&self, m: f64) -> Result<f64> {
        self.check_mass(m)?;
        Ok(((self.m_c.value - m) / self.coupling).sqrt())
    }

    /// `α_ε = √((m_ε − m)/((d−1)/d ‖φ̂/ω‖²))`.
    pub fn alpha_eps(&self, m: f64) -> Result<f64> {
        self.check_mass(m)?;
        Ok(((self.m_eps.value - m) / self.coupling).sqrt())
    }

    pub fn mass_bounds(&self, alpha: f64) -> MassBounds {
        let shift = alpha * alpha * self.coupling;
        let minus = self.m_c.value - shift;
        let plus = self.m_eps.value - shift;
        MassBounds {
            m_minus: minus.max(0.0),
            m_plus: plus.max(0.0),
            minus_clamped: minus <= 0.0,
            plus_clamped: plus <= 0.0,
        }
    }

    fn provenance(&self) -> Provenance {
        Provenance {
            mesh: self.mesh.clone(),
            eps: self.eps,
            m_c_error: self.m_c.error,
            m_eps_error: self.m_eps.error,
        }
    }

    /// Classifies `(m, α)` for `m < m_c` by the coupling thresholds.
    pub fn classify(&self, m: f64, alpha: f64) -> Result<PhaseDiagnosis> {
        let a0 = self.alpha0(m)?;
        let ae = self.alpha_eps(m)?;
        let verdict = if alpha.abs() < a0 {
            Verdict::NoGroundState
        } else if alpha.abs() > ae {
            Verdict::GroundState
        } else {
            Verdict::Undetermined
        };
        Ok(self.diagnosis(m, alpha, verdict, Some(a0), Some(ae)))
    }

    /// Classifies any `m > 0`: thresholds below `m_c`, mass bounds above
    /// (where `m_eff ≥ m ≥ m_c` already rules out the no-binding side).
    pub fn classify_point(&self, m: f64, alpha: f64) -> Result<PhaseDiagnosis> {
        require_positive("m", m)?;
        if m < self.m_c.value {
            return self.classify(m, alpha);
        }
        let b = self.mass_bounds(alpha);
        let verdict = if m > b.m_plus { Verdict::GroundState } else { Verdict::Undetermined };
        Ok(self.diagnosis(m, alpha, verdict, None, None))
    }

    fn diagnosis(&self, m: f64, alpha: f64, verdict: Verdict, a0: Option<f64>, ae: Option<f64>) -> PhaseDiagnosis {
        let b = self.mass_bounds(alpha);
        PhaseDiagnosis {
            m,
            alpha,
            verdict,
            m_c: self.m_c.value,
            m_eps: self.m_eps.value,
            alpha0: a0,
            alpha_eps: ae,
            m_minus: b.m_minus,
            m_plus: b.m_plus,
            requires_kappa_scaling: verdict == Verdict::GroundState,
            provenance: self.provenance(),
        }
    }

    /// Row-major sweep over `masses × alphas`; parallel, order-preserving.
    pub fn sweep(&self, masses: &[f64], alphas: &[f64]) -> Result<Vec<PhaseDiagnosis>> {
        let points: Vec<(f64, f64)> = masses.iter().flat_map(|&m| alphas.iter().map(move |&a| (m, a))).collect();
        points.par_iter().map(|&(m, a)| self.classify_point(m, a)).collect()
    }
}

pub fn alpha0(p: &Potential, c: &Cutoff, m: f64, mesh: &MeshPolicy) -> Result<f64> {
    let n = cutoff_norm(c, 1.0)?;
    let d = c.dimension as f64;
    let m_c = critical_mass(p, mesh)?.value;
    if m >= m_c {
        return Err(Error::AlreadyBinding { m, m_c });
    }
    require_positive("m", m)?;
    Ok(((m_c - m) / ((d - 1.0) / d * n * n)).sqrt())
}

pub fn alpha_eps(p: &Potential, c: &Cutoff, m: f64, eps: f64, mesh: &MeshPolicy) -> Result<f64> {
    PhaseSetup::new(p, c, eps, mesh)?.alpha_eps(m)
}

pub fn mass_bounds(p: &Potential, c: &Cutoff, alpha: f64, eps: f64, mesh: &MeshPolicy) -> Result<MassBounds> {
    Ok(PhaseSetup::new(p, c, eps, mesh)?.mass_bounds(alpha))
}

pub fn classify(p: &Potential, c: &Cutoff, m: f64, alpha: f64, eps: f64, mesh: &MeshPolicy) -> Result<PhaseDiagnosis> {
    PhaseSetup::new(p, c, eps, mesh)?.classify(m, alpha)
}

/// `ρ(κ) = κ³ − κ/(ξκ − 1)` on `ξκ > 1`.
pub fn rho_kappa(kappa: f64, xi: f64) -> Result<f64> {
    require_positive("xi", xi)?;
    if !(xi * kappa > 1.0) {
        return Err(Error::Domain(format!("rho_kappa needs ξκ > 1, got ξκ = {}", xi * kappa)));
    }
    Ok(kappa.powi(3) - kappa / (xi * kappa - 1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DesignParams {
    /// Target gap `α₊ − α₋ < δ`.
    pub delta: f64,
    /// Proof constant `D` in `ξ = 2ε/(3 m_ε D)`.
    #[serde(rename = "D")]
    pub d_const: f64,
    /// Proof constant `ε_var` in the right-hand side of the κ condition.
    pub eps_var: f64,
    /// Search range for `ε`.
    pub eps_min: f64,
    pub eps_max: f64,
    pub kappa_max: f64,
}

impl Default for DesignParams {
    fn default() -> Self {
        Self {
            delta: 0.05,
            d_const: 1.0,
            eps_var: 1.0,
            eps_min: 1e-9,
            eps_max: 1e2,
            kappa_max: 1e15,
        }
    }
}

impl DesignParams {
    pub fn validate(&self) -> Result<()> {
        require_positive("delta", self.delta)?;
        require_positive("D", self.d_const)?;
        require_positive("eps_var", self.eps_var)?;
        require_positive("eps_min", self.eps_min)?;
        if !(self.eps_max > self.eps_min) {
            return Err(invalid("eps_max", "must exceed eps_min"));
        }
        require_positive("kappa_max", self.kappa_max)?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub kappa: f64,
    pub eps: f64,
    pub alpha_minus: f64,
    pub alpha_plus: f64,
    pub xi: f64,
    pub rhs: f64,
    pub rho: f64,
    pub m_c: f64,
    pub m_eps: f64,
}

/// Picks `ε` with `0 < α_ε − α₀ ≤ δ/2`, then the smallest `κ > 1/ξ` with
/// `ρ(κ) > RHS`.
pub fn design_potential(p: &Potential, c: &Cutoff, m: f64, params: &DesignParams, mesh: &MeshPolicy) -> Result<Design> {
    params.validate()?;
    require_positive("m", m)?;
    let n1 = cutoff_norm(c, 1.0)?;
    let n52 = cutoff_norm(c, 2.5)?;
    let d = c.dimension as f64;
    let coupling = (d - 1.0) / d * n1 * n1;
    let m_c = critical_mass(p, mesh)?.value;
    if m >= m_c {
        return Err(Error::AlreadyBinding { m, m_c });
    }
    let a0 = ((m_c - m) / coupling).sqrt();
    let gap = |eps: f64| -> Result<(f64, f64)> {
        let me = m_epsilon(p, eps, mesh)?.value;
        Ok((((me - m) / coupling).sqrt() - a0, me))
    };

    let target = 0.5 * params.delta;
    let (mut lo, mut hi) = (params.eps_min.ln(), params.eps_max.ln());
    let (g_lo, me_lo) = gap(params.eps_min)?;
    if g_lo > target {
        return Err(Error::NotConverged {
            what: "design eps search",
            detail: format!("gap {g_lo} at eps = {} already exceeds δ/2 = {target}", params.eps_min),
        });
    }
    let (g_hi, me_hi) = gap(params.eps_max)?;
    let (eps, m_eps) = if g_hi <= target {
        (params.eps_max, me_hi)
    } else {
        let mut best = (params.eps_min, me_lo);
        while hi - lo > 1e-3 {
            let mid = 0.5 * (lo + hi);
            let (g, me) = gap(mid.exp())?;
            if g <= target {
                lo = mid;
                best = (mid.exp(), me);
            } else {
                hi = mid;
            }
        }
        best
    };
    let alpha_plus = ((m_eps - m) / coupling).sqrt();
    if !(alpha_plus > a0) {
        return Err(Error::Domain(format!("α_ε = {alpha_plus} does not exceed α₀ = {a0} at ε = {eps}")));
    }

    let xi = 2.0 * eps / (3.0 * m_eps * params.d_const);
    let rhs = params.eps_var * n52 * n52 / (2.0 * m.sqrt() * n1);
    let kappa = smallest_kappa(xi, rhs, params.kappa_max)?;
    Ok(Design {
        kappa,
        eps,
        alpha_minus: a0,
        alpha_plus,
        xi,
        rhs,
        rho: rho_kappa(kappa, xi)?,
        m_c,
        m_eps,
    })
}

/// Geometric scan from `1.01/ξ` by factor 2, then bisection to relative `1e−10`.
fn smallest_kappa(xi: f64, rhs: f64, kappa_max: f64) -> Result<f64> {
    let pole = 1.0 / xi;
    let mut lo = pole;
    let mut hi = 1.01 * pole;
    while rho_kappa(hi, xi)? <= rhs {
        lo = hi;
        hi *= 2.0;
        if hi > kappa_max {
            return Err(Error::NotConverged {
                what: "kappa search",
                detail: format!("ρ({lo:e}) = {:e} still <= RHS = {rhs:e} (ξ = {xi:e})", rho_kappa(lo, xi)?),
            });
        }
    }
    while hi - lo > 1e-10 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= pole || rho_kappa(mid, xi)? <= rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn setup() -> PhaseSetup {
        PhaseSetup::new(
            &Potential::square_well(1.0, 1.0).unwrap(),
            &Cutoff::power_gaussian(2.0, 1.0).unwrap(),
            0.1,
            &MeshPolicy::default(),
        )
        .unwrap()
    }

    #[test]
    fn critical_masses() {
        let mesh = MeshPolicy::default();
        let sw = Potential::square_well(1.0, 1.0).unwrap();
        let mc = critical_mass(&sw, &mesh).unwrap();
        assert!((mc.value - PI * PI / 8.0).abs() < 1e-6);
        assert!(mc.error < 1e-6);
        let j01 = 2.404_825_557_695_773;
        let ex = Potential::exponential(1.0, 1.0).unwrap();
        assert!((critical_mass(&ex, &mesh).unwrap().value - j01 * j01 / 8.0).abs() < 1e-5);
        let scaled = critical_mass(&sw.scaled(2.0).unwrap(), &mesh).unwrap().value;
        assert!((scaled - mc.value).abs() < 1e-6);
        assert!(critical_mass(&Potential::zero(3), &mesh).is_err());
    }

    #[test]
    fn m_epsilon_limits() {
        let mesh = MeshPolicy::default();
        let sw = Potential::square_well(1.0, 1.0).unwrap();
        let mc = critical_mass(&sw, &mesh).unwrap().value;
        // m_ε − m_c = O(√ε): 1.4e-3 at ε = 1e-6, ten times less at 1e-8
        let d6 = m_epsilon(&sw, 1e-6, &mesh).unwrap().value - mc;
        let d8 = m_epsilon(&sw, 1e-8, &mesh).unwrap().value - mc;
        assert!(d8 > 0.0 && d8 < 1e-3);
        assert_relative_eq!(d6 / d8, 10.0, max_relative = 1e-2);
        assert!(m_epsilon(&sw, 0.1, &mesh).unwrap().value > mc);
        assert!(m_epsilon(&sw, 1e4, &mesh).unwrap().value > 1e3 * mc);
        assert!(m_epsilon(&sw, 0.0, &mesh).is_err());
    }

    #[test]
    fn alpha0_example() {
        let s = setup();
        let expect = ((PI * PI / 8.0 - 1.0) / PI.powf(1.5)).sqrt();
        assert!((s.alpha0(1.0).unwrap() - expect).abs() < 1e-6);
        assert!((s.alpha0(1.0).unwrap() - 0.204_87).abs() < 1e-4);
        assert!(s.alpha0(s.m_c.value * (1.0 - 1e-12)).unwrap() < 1e-5);
        assert!(matches!(s.alpha0(1.3), Err(Error::AlreadyBinding { .. })));
        assert!(s.alpha_eps(1.0).unwrap() > s.alpha0(1.0).unwrap());
    }

    #[test]
    fn classification_examples() {
        let s = setup();
        assert_eq!(s.classify(1.0, 0.1).unwrap().verdict, Verdict::NoGroundState);
        assert_eq!(s.classify(1.0, 0.0).unwrap().verdict, Verdict::NoGroundState);
        let mid = 0.5 * (s.alpha0(1.0).unwrap() + s.alpha_eps(1.0).unwrap());
        assert_eq!(s.classify(1.0, mid).unwrap().verdict, Verdict::Undetermined);
        let big = s.classify(1.0, 2.0 * s.alpha_eps(1.0).unwrap()).unwrap();
        assert_eq!(big.verdict, Verdict::GroundState);
        assert!(big.requires_kappa_scaling);
        assert_eq!(s.classify(1.0, -0.1).unwrap().verdict, Verdict::NoGroundState);
    }

    #[test]
    fn mass_bounds_examples() {
        let s = setup();
        let b = s.mass_bounds(0.0);
        assert_eq!((b.m_minus, b.m_plus), (s.m_c.value, s.m_eps.value));
        let a = (1.01 * s.m_eps.value / s.coupling).sqrt();
        let b = s.mass_bounds(a);
        assert!(b.plus_clamped && b.minus_clamped);
        assert_eq!(s.classify_point(0.01, a).unwrap().verdict, Verdict::GroundState);
        assert!(s.mass_bounds(0.3).m_minus < s.mass_bounds(0.3).m_plus);
    }

    #[test]
    fn rho_kappa_values() {
        let xi = 0.5;
        assert_relative_eq!(rho_kappa(2.0 / xi, xi).unwrap(), (2.0 / xi).powi(3) - 2.0 / xi);
        assert!(rho_kappa(1.0 / xi * (1.0 + 1e-12), xi).unwrap() < -1e6);
        assert!(rho_kappa(1.0, xi).is_err());
        assert!(rho_kappa(1e6, xi).unwrap() > 1e17);
    }

    #[test]
    fn design_search() {
        let p = Potential::square_well(1.0, 1.0).unwrap();
        let c = Cutoff::power_gaussian(2.0, 1.0).unwrap();
        let params = DesignParams::default();
        let mesh = MeshPolicy::default();
        let d = design_potential(&p, &c, 1.0, &params, &mesh).unwrap();
        let gap = d.alpha_plus - d.alpha_minus;
        assert!(gap > 0.0 && gap < params.delta, "{d:?}");
        assert!(d.xi * d.kappa > 1.0);
        assert!(rho_kappa(d.kappa, d.xi).unwrap() > d.rhs);
        // smallest such κ, up to the bisection tolerance
        assert!(rho_kappa(d.kappa * (1.0 - 1e-9), d.xi).unwrap() <= d.rhs);
        assert_eq!(design_potential(&p, &c, 1.0, &params, &mesh).unwrap(), d);

        let doubled = DesignParams {
            d_const: 2.0,
            eps_var: 2.0,
            ..params
        };
        let d2 = design_potential(&p, &c, 1.0, &doubled, &mesh).unwrap();
        assert_relative_eq!(d2.xi, 0.5 * d.xi, max_relative = 1e-12);
        assert_relative_eq!(d2.rhs, 2.0 * d.rhs, max_relative = 1e-12);
        assert!(d2.kappa >= d.kappa);
    }
}

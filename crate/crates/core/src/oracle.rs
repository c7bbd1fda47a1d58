//! Shooting oracle for `H_p(m) = −(1/2m)Δ + V` in `d = 3`, independent of the
//! integral-operator machinery.
//!
//! The radial equation `u″ = [ℓ(ℓ+1)/r² + 2m(V − ε)] u` is integrated outward
//! from the Frobenius start `u ~ r^{ℓ+1}` with an adaptive Dormand–Prince
//! 5(4) pair. By Sturm oscillation the number of zeros of the regular solution
//! on `(0, ∞)` equals the number of sector eigenvalues below `ε`. Beyond the
//! potential's reach the solution is a combination of the free regular and
//! decaying solutions, so one extra zero in the tail is decided from the sign
//! of the growing coefficient.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, require_positive, Error, Result};
use crate::potentials::Potential;
use crate::special::{riccati_k_scaled, riccati_k_scaled_derivative};

const RESCALE_AT: f64 = 1e100;
const MAX_STEPS: usize = 2_000_000;
/// Relative energy offset used to flag samples sitting on an eigenvalue.
pub const BORDERLINE_REL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OracleOptions {
    /// Per-step relative tolerance.
    pub rtol: f64,
    /// Start radius, in units of the potential's range parameter.
    pub r0: f64,
    /// `2m|V(R)|R²` below which the potential is treated as absent.
    pub tail_cut: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-10,
            r0: 1e-8,
            tail_cut: 1e-14,
        }
    }
}

/// Oracle verdict for one sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub ell: u32,
    /// Number of negative eigenvalues in the sector.
    pub count: usize,
    /// Ground energy of the full operator (attained in the s-wave), if bound.
    pub ground_energy: Option<f64>,
    /// Normalized Wronskian mismatch of inward and outward solutions at the
    /// ground energy.
    pub residual: Option<f64>,
}

/// Eigenvalue count below (or at) a given energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorCensus {
    pub ell: u32,
    pub count: usize,
    /// An eigenvalue lies within `1e−9` (relative) of the energy.
    pub borderline: bool,
}

struct Radial<'a> {
    p: &'a Potential,
    two_m: f64,
    eps: f64,
    cent: f64,
    rtol: f64,
}

struct State {
    r: f64,
    y: [f64; 2],
    sign: f64,
    zeros: usize,
}

// Dormand–Prince 5(4)
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

impl Radial<'_> {
    fn q(&self, r: f64) -> f64 {
        self.cent / (r * r) + self.two_m * (self.p.eval(r) - self.eps)
    }

    fn deriv(&self, r: f64, y: [f64; 2]) -> [f64; 2] {
        [y[1], self.q(r) * y[0]]
    }

    /// Largest step keeping the local phase (or growth exponent) small.
    fn step_cap(&self, r: f64) -> f64 {
        let local = self.q(r).abs().max(self.two_m * self.p.eval(r).abs());
        let cap = if local > 0.0 { 0.2 / local.sqrt() } else { f64::INFINITY };
        cap.min(0.5 * r)
    }

    /// Integrates from `st.r` to `to` (either direction), counting sign
    /// changes of `u` and rescaling on growth.
    fn propagate(&self, st: &mut State, to: f64) -> Result<()> {
        let dir = (to - st.r).signum();
        let mut h = dir * self.step_cap(st.r).min((to - st.r).abs());
        let mut steps = 0;
        while (to - st.r) * dir > 0.0 {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::Solver(format!("step limit reached at r = {}", st.r)));
            }
            let cap = self.step_cap(st.r);
            if h.abs() > cap {
                h = dir * cap;
            }
            let last = (to - st.r).abs() <= h.abs() * (1.0 + 1e-12);
            if last {
                h = to - st.r;
            }
            let mut k = [[0.0; 2]; 7];
            k[0] = self.deriv(st.r, st.y);
            for s in 1..7 {
                let mut y = st.y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    y[0] += h * A[s][j] * kj[0];
                    y[1] += h * A[s][j] * kj[1];
                }
                k[s] = self.deriv(st.r + C[s] * h, y);
            }
            let mut y_new = st.y;
            let mut err = [0.0; 2];
            // fifth-order weights are the last stage row (first-same-as-last)
            for (s, ks) in k.iter().enumerate() {
                if s < 6 {
                    y_new[0] += h * A[6][s] * ks[0];
                    y_new[1] += h * A[6][s] * ks[1];
                }
                err[0] += h * E[s] * ks[0];
                err[1] += h * E[s] * ks[1];
            }
            let r_scale = st.r.abs().max((st.r + h).abs());
            let size = (st.y[0].abs() + r_scale * st.y[1].abs()).max(y_new[0].abs() + r_scale * y_new[1].abs());
            let ratio = (err[0].abs() + r_scale * err[1].abs()) / (self.rtol * size + f64::MIN_POSITIVE);
            if !ratio.is_finite() {
                return Err(Error::Solver(format!("non-finite state at r = {}", st.r)));
            }
            if ratio <= 1.0 {
                st.r = if last { to } else { st.r + h };
                st.y = y_new;
                if st.y[0] != 0.0 {
                    let s = st.y[0].signum();
                    if s != st.sign {
                        st.zeros += 1;
                        st.sign = s;
                    }
                }
                let big = st.y[0].abs().max(r_scale * st.y[1].abs());
                if big > RESCALE_AT {
                    st.y[0] /= RESCALE_AT;
                    st.y[1] /= RESCALE_AT;
                }
            }
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.2)).clamp(0.2, 5.0) };
            h *= factor;
            if h.abs() < 1e-14 * st.r.abs().max(1e-300) {
                return Err(Error::Solver(format!("step size underflow at r = {}", st.r)));
            }
        }
        Ok(())
    }
}

fn check(p: &Potential, m: f64, opts: &OracleOptions) -> Result<()> {
    p.validate()?;
    if p.dimension != 3 {
        return Err(Error::UnsupportedDimension(p.dimension));
    }
    require_positive("m", m)?;
    require_positive("rtol", opts.rtol)?;
    require_positive("r0", opts.r0)?;
    Ok(())
}

/// Radius beyond which `V` no longer influences the count.
fn far_radius(p: &Potential, m: f64, opts: &OracleOptions) -> f64 {
    if let Some(r) = p.support_radius() {
        return r;
    }
    let a = p.range_parameter();
    let mut r = a;
    while 2.0 * m * p.eval(r).abs() * r * r > opts.tail_cut && r < 1e4 * a {
        r += a;
    }
    r
}

/// Breakpoints of `V` inside `(lo, hi)`, in increasing order, followed by `hi`.
fn stops(p: &Potential, lo: f64, hi: f64) -> Vec<f64> {
    let mut out: Vec<f64> = p.breakpoints().into_iter().filter(|b| *b > lo && *b < hi).collect();
    out.sort_by(f64::total_cmp);
    out.push(hi);
    out
}

fn outward(rad: &Radial, ell: u32, r0: f64, to: f64) -> Result<State> {
    // u = r^{ℓ+1} normalized by r0^ℓ
    let mut st = State {
        r: r0,
        y: [r0, (ell + 1) as f64],
        sign: 1.0,
        zeros: 0,
    };
    for stop in stops(rad.p, r0, to) {
        rad.propagate(&mut st, stop)?;
    }
    Ok(st)
}

/// Zeros of the regular solution at energy `eps ≤ 0` on `(0, ∞)`, i.e. the
/// number of sector eigenvalues strictly below `eps`.
pub fn count_below_with(p: &Potential, m: f64, ell: u32, eps: f64, opts: &OracleOptions) -> Result<usize> {
    check(p, m, opts)?;
    if !(eps <= 0.0) {
        return Err(invalid("eps", format!("must be <= 0, got {eps}")));
    }
    let lf = ell as f64;
    let rad = Radial {
        p,
        two_m: 2.0 * m,
        eps,
        cent: lf * (lf + 1.0),
        rtol: opts.rtol,
    };
    let r_far = far_radius(p, m, opts);
    let st = outward(&rad, ell, opts.r0 * p.range_parameter(), r_far)?;
    let (u, du) = (st.y[0], st.y[1]);
    // sign of the coefficient that dominates as r → ∞
    let growing = if eps == 0.0 {
        // u = A r^{ℓ+1} + B r^{−ℓ}: r u′ + ℓ u = (2ℓ+1) A r^{ℓ+1}
        r_far * du + lf * u
    } else {
        // u = a x i_ℓ(x) + b x k_ℓ(x), x = κ r; sign(a) from W[u, x k_ℓ]
        let kappa = (2.0 * m * -eps).sqrt();
        let x = kappa * r_far;
        du * riccati_k_scaled(ell, x) - kappa * u * riccati_k_scaled_derivative(ell, x)
    };
    let extra = usize::from(growing != 0.0 && u != 0.0 && growing.signum() != u.signum());
    Ok(st.zeros + extra)
}

/// Number of negative-energy eigenvalues in sector `ℓ`.
pub fn count_bound_states(p: &Potential, m: f64, ell: u32) -> Result<usize> {
    count_below_with(p, m, ell, 0.0, &OracleOptions::default())
}

/// Number of sector eigenvalues `≤ eps`, with a borderline flag when an
/// eigenvalue sits within `1e−9` (relative) of `eps`.
pub fn sector_census(p: &Potential, m: f64, ell: u32, eps: f64, opts: &OracleOptions) -> Result<SectorCensus> {
    let (lo, hi) = if eps == 0.0 {
        (-BORDERLINE_REL * p.max_depth(), 0.0)
    } else {
        (eps * (1.0 + BORDERLINE_REL), eps * (1.0 - BORDERLINE_REL))
    };
    let below = count_below_with(p, m, ell, lo, opts)?;
    let above = count_below_with(p, m, ell, hi, opts)?;
    Ok(SectorCensus {
        ell,
        count: above,
        borderline: below != above,
    })
}

/// `Σ_ℓ (2ℓ+1) #{eigenvalues ≤ eps in sector ℓ}` with per-sector detail; the
/// sum stops at the first empty sector (counts decrease in `ℓ`).
pub fn census_total(p: &Potential, m: f64, eps: f64, opts: &OracleOptions) -> Result<(usize, Vec<SectorCensus>)> {
    let mut sectors = Vec::new();
    for ell in 0.. {
        let c = sector_census(p, m, ell, eps, opts)?;
        sectors.push(c);
        if c.count == 0 && !c.borderline {
            break;
        }
        if ell > 400 {
            return Err(Error::Solver("sector census did not terminate".into()));
        }
    }
    let total = sectors.iter().map(|c| (2 * c.ell as usize + 1) * c.count).sum();
    Ok((total, sectors))
}

/// Ground energy and matching residual, or `None` when `H_p(m)` has no
/// negative eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundState {
    pub energy: f64,
    pub residual: f64,
}

pub fn ground_energy(p: &Potential, m: f64) -> Result<Option<GroundState>> {
    ground_energy_with(p, m, &OracleOptions::default())
}

pub fn ground_energy_with(p: &Potential, m: f64, opts: &OracleOptions) -> Result<Option<GroundState>> {
    if count_below_with(p, m, 0, 0.0, opts)? == 0 {
        return Ok(None);
    }
    // H ≥ min V, so no eigenvalue lies below −depth
    let mut lo = -p.max_depth();
    let mut hi = 0.0;
    if count_below_with(p, m, 0, lo, opts)? != 0 {
        return Err(Error::Solver("ground state below the potential minimum".into()));
    }
    while hi - lo > 1e-13 * p.max_depth() {
        let mid = 0.5 * (lo + hi);
        if count_below_with(p, m, 0, mid, opts)? == 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let energy = 0.5 * (lo + hi);
    let residual = matching_residual(p, m, energy, opts)?;
    Ok(Some(GroundState { energy, residual }))
}

/// Normalized Wronskian of the regular (outward) and decaying (inward)
/// s-wave solutions at an interior matching radius.
pub fn matching_residual(p: &Potential, m: f64, eps: f64, opts: &OracleOptions) -> Result<f64> {
    check(p, m, opts)?;
    if !(eps < 0.0) {
        return Err(invalid("eps", format!("must be < 0, got {eps}")));
    }
    let rad = Radial {
        p,
        two_m: 2.0 * m,
        eps,
        cent: 0.0,
        rtol: opts.rtol,
    };
    let r_far = far_radius(p, m, opts);
    let r_match = 0.5 * p.range_parameter().min(r_far);
    let out = outward(&rad, 0, opts.r0 * p.range_parameter(), r_match)?;
    let kappa = (2.0 * m * -eps).sqrt();
    let mut inw = State {
        r: r_far,
        y: [1.0, -kappa],
        sign: 1.0,
        zeros: 0,
    };
    let mut marks: Vec<f64> = stops(p, r_match, r_far);
    marks.pop();
    marks.reverse();
    marks.push(r_match);
    for stop in marks {
        rad.propagate(&mut inw, stop)?;
    }
    let (uo, duo) = (out.y[0], out.y[1]);
    let (ui, dui) = (inw.y[0], inw.y[1]);
    let w = uo * dui - duo * ui;
    Ok(w.abs() / ((uo * dui).abs() + (duo * ui).abs()))
}

/// Oracle verdict for sector `ℓ` including the ground energy.
pub fn oracle(p: &Potential, m: f64, ell: u32) -> Result<OracleResult> {
    let count = count_bound_states(p, m, ell)?;
    let ground = ground_energy(p, m)?;
    Ok(OracleResult {
        ell,
        count,
        ground_energy: ground.map(|g| g.energy),
        residual: ground.map(|g| g.residual),
    })
}

//! Invariant suite behind `nobind verify`, run on the configured potential
//! and cutoff.

use nobind::field::{effective_mass, energy_shift_g, validate_cutoff, Cutoff};
use nobind::green::{radial_green, SectorSpec};
use nobind::oracle::{census_total, count_below_with};
use nobind::phase::{critical_mass, PhaseSetup, Verdict};
use nobind::spectra::{top_norm, MeshPolicy, SectorTower};
use nobind::Potential;

use crate::config::RunConfig;
use crate::output::Table;

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = nobind::Result<(bool, String)>;

struct Ctx<'a> {
    cfg: &'a RunConfig,
    p: Potential,
    c: Cutoff,
}

impl Ctx<'_> {
    fn mesh(&self) -> &MeshPolicy {
        &self.cfg.mesh
    }

    fn norm(&self, p: &Potential, ell: u32, e: f64) -> nobind::Result<f64> {
        Ok(top_norm(p, &SectorSpec::new(p.dimension, ell, e)?, self.mesh())?.lambda_max)
    }
}

fn sci(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.6e}")).collect::<Vec<_>>().join(" ")
}

fn green_symmetry(x: &Ctx) -> Outcome {
    let pts = [1e-3, 0.1, 0.7, 1.0, 2.5, 9.0];
    let mut worst = 0.0_f64;
    let mut nonneg = true;
    for ell in 0..4 {
        for e in [0.0, -1.0] {
            let s = SectorSpec::new(x.p.dimension, ell, e)?;
            for &r in &pts {
                for &r2 in &pts {
                    let a = radial_green(&s, r, r2)?;
                    let b = radial_green(&s, r2, r)?;
                    nonneg &= a >= 0.0;
                    if a != 0.0 {
                        worst = worst.max((a - b).abs() / a.abs());
                    }
                }
            }
        }
    }
    Ok((nonneg && worst <= 1e-13, format!("max asymmetry {worst:.2e}, nonnegative {nonneg}")))
}

fn kernel_positive(x: &Ctx) -> Outcome {
    let res = top_norm(&x.p, &SectorSpec::new(x.p.dimension, 0, -0.5)?, x.mesh())?;
    let ok = res.min_eigenvalue >= -1e-10 * res.lambda_max;
    Ok((ok, format!("min eigenvalue {:.3e}, top {:.6e}", res.min_eigenvalue, res.lambda_max)))
}

fn sector_decay(x: &Ctx) -> Outcome {
    let tops = (0..5).map(|l| x.norm(&x.p, l, 0.0)).collect::<nobind::Result<Vec<_>>>()?;
    let ok = tops.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("top by l: {}", sci(&tops))))
}

fn energy_monotone(x: &Ctx) -> Outcome {
    let es = [0.0, -0.1, -1.0, -10.0];
    let norms = es.iter().map(|&e| x.norm(&x.p, 0, e)).collect::<nobind::Result<Vec<_>>>()?;
    let ok = norms.windows(2).all(|w| w[1] < w[0]);
    Ok((ok, format!("norms at E = {es:?}: {}", sci(&norms))))
}

fn scale_invariance(x: &Ctx) -> Outcome {
    let a = x.norm(&x.p, 0, 0.0)?;
    let mut worst = 0.0_f64;
    for kappa in [0.5, 2.0] {
        worst = worst.max((x.norm(&x.p.scaled(kappa)?, 0, 0.0)? - a).abs() / a);
    }
    Ok((worst < 1e-6, format!("max relative change of ‖K_0‖ under scaling {worst:.2e}")))
}

fn refinement(x: &Ctx) -> Outcome {
    let s = SectorSpec::new(x.p.dimension, 0, 0.0)?;
    let base = top_norm(&x.p, &s, x.mesh())?;
    let finer = MeshPolicy {
        panels: 2 * x.mesh().panels,
        ..x.mesh().clone()
    };
    let fine = top_norm(&x.p, &s, &finer)?;
    let moved = (fine.lambda_max - base.lambda_max).abs();
    let bound = base.error_estimate.max(1e-12 * base.lambda_max);
    Ok((moved <= bound, format!("moved {moved:.2e}, estimate {bound:.2e}")))
}

fn lieb(x: &Ctx) -> Outcome {
    let k0 = x.norm(&x.p, 0, 0.0)?;
    let bound = x.p.lieb_bound()?;
    Ok((k0 <= bound, format!("‖K_0‖ = {k0:.6e} ≤ {bound:.6e}")))
}

fn bs_matches_oracle(x: &Ctx) -> Outcome {
    let mc = critical_mass(&x.p, x.mesh())?.value;
    let masses: Vec<f64> = [0.5, 1.5, 4.0, 10.0, 25.0].iter().map(|f| f * mc).collect();
    let (mut agree, mut skipped, mut bad) = (0, 0, Vec::new());
    for e in [-0.1, -1.0] {
        let tower = SectorTower::build(&x.p, e, 1.0 / masses[masses.len() - 1], x.mesh())?;
        for &m in &masses {
            let bs = tower.count(1.0 / m);
            let (total, sectors) = census_total(&x.p, m, e / m, &x.cfg.oracle)?;
            if bs.borderline || sectors.iter().any(|c| c.borderline) {
                skipped += 1;
            } else if bs.total == total {
                agree += 1;
            } else {
                bad.push(format!("m={m:.6} E={e}: {} vs {total}", bs.total));
            }
        }
    }
    Ok((bad.is_empty(), format!("{agree} agree, {skipped} borderline skipped; {}", bad.join("; "))))
}

fn critical_mass_threshold(x: &Ctx) -> Outcome {
    let mc = critical_mass(&x.p, x.mesh())?.value;
    let below = count_below_with(&x.p, mc * (1.0 - 1e-3), 0, 0.0, &x.cfg.oracle)?;
    let above = count_below_with(&x.p, mc * (1.0 + 1e-3), 0, 0.0, &x.cfg.oracle)?;
    Ok((below == 0 && above == 1, format!("s-wave states at m_c(1∓1e-3): {below}, {above}")))
}

fn oracle_monotone(x: &Ctx) -> Outcome {
    let mc = critical_mass(&x.p, x.mesh())?.value;
    let mut counts = Vec::new();
    for f in [0.5, 1.0, 2.0, 5.0, 12.0, 30.0] {
        let mut row = Vec::new();
        for ell in 0..3 {
            row.push(count_below_with(&x.p, f * mc, ell, 0.0, &x.cfg.oracle)?);
        }
        counts.push(row);
    }
    let ok = counts.windows(2).all(|w| w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
    Ok((ok, format!("counts (l = 0..2) for m/m_c = 0.5..30: {counts:?}")))
}

fn phase_setup(x: &Ctx) -> nobind::Result<PhaseSetup> {
    PhaseSetup::new(&x.p, &x.c, x.cfg.params.eps, x.mesh())
}

fn thresholds(x: &Ctx) -> Outcome {
    let s = phase_setup(x)?;
    let mc = s.m_c.value;
    let mut ok = s.m_eps.value > mc;
    let mut prev: Option<(f64, f64)> = None;
    for i in 1..10 {
        let m = mc * i as f64 / 10.0;
        let (a0, ae) = (s.alpha0(m)?, s.alpha_eps(m)?);
        ok &= a0 > 0.0 && ae > a0;
        if let Some((p0, pe)) = prev {
            ok &= a0 < p0 && ae < pe;
        }
        prev = Some((a0, ae));
    }
    let a0 = s.alpha0(mc / 2.0)?;
    Ok((ok, format!("m_c = {mc:.8}, m_eps = {:.8}, alpha0(m_c/2) = {a0:.6}", s.m_eps.value)))
}

fn verdicts(x: &Ctx) -> Outcome {
    let s = phase_setup(x)?;
    let mc = s.m_c.value;
    let mut ok = true;
    let mut n = 0;
    for i in 1..8 {
        let m = mc * i as f64 / 8.0;
        let a0 = s.alpha0(m)?;
        for j in 0..=10 {
            let alpha = 2.0 * a0 * j as f64 / 10.0 + 1e-3;
            let plus = s.classify(m, alpha)?;
            let minus = s.classify(m, -alpha)?;
            let b = s.mass_bounds(alpha);
            ok &= plus.verdict == minus.verdict;
            ok &= (m < b.m_minus) == (alpha.abs() < a0);
            ok &= (plus.verdict == Verdict::NoGroundState) == (alpha.abs() < a0);
            ok &= b.m_minus <= b.m_plus;
            n += 1;
        }
    }
    Ok((ok, format!("{n} points checked")))
}

fn mass_renormalization(x: &Ctx) -> Outcome {
    let m = x.cfg.params.m;
    let one = effective_mass(m, 1.0, &x.c)?;
    let mut worst = 0.0_f64;
    for alpha in [-1.5, -0.3, 0.0, 0.2, 0.7, 2.0] {
        let got = effective_mass(m, alpha, &x.c)?;
        worst = worst.max((got - m - alpha * alpha * (one - m)).abs() / one);
    }
    Ok((one >= m && worst < 1e-12, format!("m_eff(1) = {one:.10}, quadratic defect {worst:.2e}")))
}

fn vacuum_shift(x: &Ctx) -> Outcome {
    let m = x.cfg.params.m;
    let a = x.cfg.params.alpha.abs().max(0.05);
    let lo = energy_shift_g(m, 0.5 * a, &x.c)?;
    let hi = energy_shift_g(m, -a, &x.c)?;
    let zero = energy_shift_g(m, 0.0, &x.c)?;
    Ok((zero == 0.0 && lo > 0.0 && lo < hi, format!("g(0) = {zero}, g({:.3}) = {lo:.10}, g({a:.3}) = {hi:.10}", 0.5 * a)))
}

fn cutoff_conditions(x: &Ctx) -> Outcome {
    let report = validate_cutoff(&x.c);
    let failed: Vec<&str> = report.conditions.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
    Ok((failed.is_empty(), format!("{} conditions, failed: {failed:?}", report.conditions.len())))
}

const SUITE: &[(&str, fn(&Ctx) -> Outcome)] = &[
    ("green_symmetric_nonnegative", green_symmetry),
    ("kernel_positive", kernel_positive),
    ("sector_norms_decay", sector_decay),
    ("norm_monotone_in_energy", energy_monotone),
    ("norm_scale_invariant", scale_invariance),
    ("refinement_within_estimate", refinement),
    ("lieb_bound", lieb),
    ("bs_count_matches_oracle", bs_matches_oracle),
    ("critical_mass_is_binding_threshold", critical_mass_threshold),
    ("oracle_count_monotone_in_mass", oracle_monotone),
    ("coupling_thresholds_ordered", thresholds),
    ("verdict_even_and_consistent", verdicts),
    ("effective_mass_quadratic", mass_renormalization),
    ("vacuum_shift_monotone", vacuum_shift),
    ("cutoff_conditions", cutoff_conditions),
];

/// Runs every property; an error inside a property counts as a failure.
pub fn run_suite(cfg: &RunConfig) -> Vec<PropertyCheck> {
    let (p, c) = match (cfg.potential(), cfg.cutoff()) {
        (Ok(p), Ok(c)) => (p, c),
        (Err(e), _) | (_, Err(e)) => {
            return vec![PropertyCheck {
                name: "config",
                passed: false,
                detail: e.to_string(),
            }]
        }
    };
    let ctx = Ctx { cfg, p, c };
    SUITE
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = f(&ctx).unwrap_or_else(|e| (false, format!("error: {e}")));
            PropertyCheck { name, passed, detail }
        })
        .collect()
}

pub fn table(report: &[PropertyCheck]) -> Table {
    let mut t = Table::new(&["property", "status", "detail"]);
    for c in report {
        t.push(vec![c.name.into(), (if c.passed { "pass" } else { "fail" }).into(), c.detail.clone().into()]);
    }
    t
}

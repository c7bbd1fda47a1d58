//! Subcommand bodies: each turns a validated config into a table.

use nobind::field::{dplus_infimum, field_constants, validate_cutoff};
use nobind::oracle::sector_census;
use nobind::phase::{critical_mass, design_potential, m_epsilon, PhaseSetup};
use nobind::spectra::bs_count_total;

use crate::config::RunConfig;
use crate::output::{Cell, Table};
use crate::{verify, CliError, Command, EXIT_OK, EXIT_VERIFY_FAILED};

/// Runs one subcommand; returns the table and the exit status it implies.
pub fn dispatch(cmd: Command, cfg: &RunConfig) -> Result<(Table, i32), CliError> {
    let table = match cmd {
        Command::CriticalMass => critical_masses(cfg)?,
        Command::PhaseDiagram => phase_diagram(cfg)?,
        Command::Count => count(cfg)?,
        Command::FieldConstants => constants(cfg)?,
        Command::Design => design(cfg)?,
        Command::Verify => {
            let report = verify::run_suite(cfg);
            let code = if report.iter().all(|c| c.passed) { EXIT_OK } else { EXIT_VERIFY_FAILED };
            return Ok((verify::table(&report).with_provenance(cfg), code));
        }
    };
    Ok((table.with_provenance(cfg), EXIT_OK))
}

pub fn critical_masses(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.potential()?;
    let mc = critical_mass(&p, &cfg.mesh)?;
    let me = m_epsilon(&p, cfg.params.eps, &cfg.mesh)?;
    let mut t = Table::new(&["m_c", "m_c_error", "m_eps", "m_eps_error"]);
    t.push(vec![mc.value.into(), mc.error.into(), me.value.into(), me.error.into()]);
    Ok(t)
}

pub fn phase_diagram(cfg: &RunConfig) -> Result<Table, CliError> {
    let setup = PhaseSetup::new(&cfg.potential()?, &cfg.cutoff()?, cfg.params.eps, &cfg.mesh)?;
    let rows = setup.sweep(&cfg.grid.masses.values(), &cfg.grid.alphas.values())?;
    let mut t = Table::new(&[
        "m",
        "alpha",
        "verdict",
        "m_c",
        "m_eps",
        "alpha0",
        "alpha_eps",
        "m_minus",
        "m_plus",
        "requires_kappa_scaling",
    ]);
    for d in rows {
        t.push(vec![
            d.m.into(),
            d.alpha.into(),
            d.verdict.as_str().into(),
            d.m_c.into(),
            d.m_eps.into(),
            d.alpha0.into(),
            d.alpha_eps.into(),
            d.m_minus.into(),
            d.m_plus.into(),
            d.requires_kappa_scaling.into(),
        ]);
    }
    Ok(t)
}

/// Per-sector counts of `H_p(m)` eigenvalues `≤ E/m`: Birman–Schwinger
/// (eigenvalues of `K_E` at least `1/m`) beside the shooting oracle.
pub fn count(cfg: &RunConfig) -> Result<Table, CliError> {
    let p = cfg.potential()?;
    let (m, e) = (cfg.params.m, cfg.params.energy);
    let bs = bs_count_total(&p, m, e, &cfg.mesh)?;
    let mut t = Table::new(&[
        "ell",
        "multiplicity",
        "bs_count",
        "oracle_count",
        "agree",
        "borderline",
        "bs_top",
        "m",
        "E",
        "upper_bound_only",
    ]);
    let mut oracle_total = 0;
    let mut borderline_any = bs.borderline;
    let mut ell = 0u32;
    loop {
        let sector = bs.sectors.iter().find(|s| s.ell == ell);
        let oc = sector_census(&p, m, ell, e / m, &cfg.oracle)?;
        if sector.is_none() && oc.count == 0 && !oc.borderline {
            break;
        }
        let mult = 2 * ell as usize + 1;
        let bs_count = sector.map_or(0, |s| s.count);
        let borderline = oc.borderline || sector.is_some_and(|s| s.borderline);
        borderline_any |= borderline;
        oracle_total += mult * oc.count;
        t.push(vec![
            ell.into(),
            mult.into(),
            bs_count.into(),
            oc.count.into(),
            (bs_count == oc.count).into(),
            borderline.into(),
            sector.map(|s| s.top).into(),
            m.into(),
            e.into(),
            bs.upper_bound_only.into(),
        ]);
        ell += 1;
    }
    t.push(vec![
        "total".into(),
        Cell::Empty,
        bs.total.into(),
        oracle_total.into(),
        (bs.total == oracle_total).into(),
        borderline_any.into(),
        Cell::Empty,
        m.into(),
        e.into(),
        bs.upper_bound_only.into(),
    ]);
    Ok(t)
}

pub fn constants(cfg: &RunConfig) -> Result<Table, CliError> {
    let c = cfg.cutoff()?;
    let (m, alpha) = (cfg.params.m, cfg.params.alpha);
    let fc = field_constants(&c, m, alpha)?;
    let (s_min, inf) = dplus_infimum(&c, m, alpha)?;
    let mut t = Table::new(&["kind", "name", "value", "passed", "note"]);
    let mut constant = |name: &str, v: Option<f64>, note: &str| {
        t.push(vec!["constant".into(), name.into(), v.into(), Cell::Empty, note.into()]);
    };
    constant("m_eff", Some(fc.m_eff), "");
    constant("g", Some(fc.g), "");
    constant("phi", Some(fc.phi), "");
    constant("norm_inv_omega", Some(fc.norm_inv_omega), "");
    constant("norm_inv_omega_3_2", Some(fc.norm_inv_omega_3_2), "");
    constant("norm_inv_omega_5_2", fc.norm_inv_omega_5_2, if fc.norm_inv_omega_5_2.is_none() { "divergent" } else { "" });
    constant("norm_sqrt_omega", Some(fc.norm_sqrt_omega), "");
    constant("dplus_inf", Some(inf), "");
    constant("dplus_argmin", Some(s_min), "");
    for cond in validate_cutoff(&c).conditions {
        t.push(vec![
            "condition".into(),
            cond.id.into(),
            cond.value.into(),
            cond.passed.into(),
            cond.statement.into(),
        ]);
    }
    Ok(t)
}

pub fn design(cfg: &RunConfig) -> Result<Table, CliError> {
    let d = design_potential(&cfg.potential()?, &cfg.cutoff()?, cfg.params.m, &cfg.design, &cfg.mesh)?;
    let mut t = Table::new(&[
        "m",
        "delta",
        "kappa",
        "design_eps",
        "alpha_minus",
        "alpha_plus",
        "xi",
        "rhs",
        "rho",
        "m_c",
        "m_eps",
    ]);
    t.push(vec![
        cfg.params.m.into(),
        cfg.design.delta.into(),
        d.kappa.into(),
        d.eps.into(),
        d.alpha_minus.into(),
        d.alpha_plus.into(),
        d.xi.into(),
        d.rhs.into(),
        d.rho.into(),
        d.m_c.into(),
        d.m_eps.into(),
    ]);
    Ok(t)
}

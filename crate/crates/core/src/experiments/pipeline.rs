//! Command pipelines behind the CLI.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use num_rational::Rational64;
use serde_json::{json, Value};

use super::campaign::{refinement_levels, rh_campaign, localization_campaign, LocalizationSetup, RhSetup};
use super::exponents::fractional_exponents;
use super::report::{report_emit, write_summary, CertificateEntry, Check, Records, Summary};
use super::rh::interior_rh;
use super::scan::{solvability_scan, ScanSetup};
use crate::config::{Command, RunConfig};
use crate::ellipticity::{p_ellipticity_range, Exponent, MatrixField};
use crate::error::{Error, Result};
use crate::functionals::{boundary_lp_norm, ntmax};
use crate::geometry::{certify, dyadic_scales, point::dist, DiscreteDomain, DomainPreset};
use crate::solver::{assemble, BoundaryData, DataFamily, DriftField, EllipticSystem, SolutionField};

/// Tolerance of the constant-data identities.
pub const IDENTITY_TOL: f64 = 1e-10;

#[derive(Debug)]
pub struct RunOutput {
    pub summary: Summary,
    pub files: Vec<PathBuf>,
    /// Human readable result lines.
    pub lines: Vec<String>,
    pub error: Option<Error>,
}

impl Error {
    /// CLI exit status: 1 for a violated invariant, 2 for configuration or
    /// domain errors, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invariant(_) => 1,
            Error::Config(_) | Error::Domain(_) | Error::Json(_) => 2,
            _ => 3,
        }
    }
}

impl RunOutput {
    pub fn exit_code(&self) -> i32 {
        self.error.as_ref().map_or(0, Error::exit_code)
    }
}

struct Ctx {
    summary: Summary,
    records: Records,
    files: Vec<PathBuf>,
    lines: Vec<String>,
    dir: PathBuf,
}

impl Ctx {
    fn file(&mut self, name: &str) -> Result<PathBuf> {
        std::fs::create_dir_all(&self.dir)?;
        let p = self.dir.join(name);
        self.files.push(p.clone());
        Ok(p)
    }
}

/// Runs `config` and writes its reports into `dir`. A summary is written
/// even when the run fails, with the error recorded in it.
pub fn run(config: &RunConfig, dir: &Path) -> RunOutput {
    let resolved = config.resolve();
    let value = match &resolved {
        Ok(c) => c.to_value(),
        Err(_) => config.to_value(),
    };
    let mut ctx = Ctx {
        summary: Summary::new(config.command.name(), value),
        records: Records::default(),
        files: Vec::new(),
        lines: Vec::new(),
        dir: dir.to_path_buf(),
    };
    let result = resolved.and_then(|c| dispatch(&c, &mut ctx));
    let error = result.err();
    if let Some(e) = &error {
        ctx.summary.errors.push(e.to_string());
    }
    let written = if ctx.records.is_empty() {
        write_summary(&ctx.summary, dir).map(|p| vec![p])
    } else {
        report_emit(&ctx.records, &ctx.summary, dir)
    };
    let error = match written {
        Ok(paths) => {
            for p in paths {
                if !ctx.files.contains(&p) {
                    ctx.files.push(p);
                }
            }
            error
        }
        Err(e) => error.or(Some(e)),
    };
    RunOutput {
        summary: ctx.summary,
        files: ctx.files,
        lines: ctx.lines,
        error,
    }
}

fn dispatch(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    match c.command {
        Command::Ellipticity => run_ellipticity(c, ctx),
        Command::Certify => run_certify(c, ctx),
        Command::Solve => run_solve(c, ctx).map(|_| ()),
        Command::Ntmax => run_ntmax(c, ctx),
        Command::Rh => run_rh(c, ctx),
        Command::Localize => run_localize(c, ctx),
        Command::Extrapolate => run_extrapolate(c, ctx),
    }
}

fn domain_of(c: &RunConfig) -> &DomainPreset {
    c.domain.as_ref().expect("resolved")
}

fn levels_of(c: &RunConfig) -> Vec<f64> {
    refinement_levels(c.h.expect("resolved"), c.refinements.expect("resolved"))
}

fn run_ellipticity(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let dim = c.dim.expect("resolved");
    let field = MatrixField::from_preset(&c.matrix, dim)?;
    let report = p_ellipticity_range(&field, dim)?;
    ctx.summary.operator = Some(field.label().to_string());
    ctx.summary.assert(Check::new(
        "mu_one_iff_real",
        (report.mu == 1.0) == field.is_real(),
        format!("mu = {}, real = {}", report.mu, field.is_real()),
    ))?;
    if let (Exponent::Finite(lo), Exponent::Finite(hi)) = (report.p_lower, report.p_upper) {
        let s = 1.0 / lo + 1.0 / hi;
        ctx.summary.assert(Check::new(
            "conjugate_interval",
            (s - 1.0).abs() < 1e-12,
            format!("1/p_lower + 1/p_upper = {s}"),
        ))?;
    }
    let path = ctx.file("lambda.csv")?;
    let mut w = csv::Writer::from_path(&path)?;
    w.write_record(["p", "lambda_p"])?;
    for (p, l) in &report.lambda_samples {
        w.write_record([p.to_string(), l.to_string()])?;
    }
    w.flush()?;
    ctx.lines.push(format!("mu = {:.7}", report.mu));
    ctx.lines.push(format!("p0 = {}", fmt_exponent(report.p_upper)));
    ctx.lines.push(format!("endpoint = {}", fmt_exponent(report.endpoint)));
    ctx.summary.results = serde_json::to_value(&report)?;
    Ok(())
}

fn fmt_exponent(e: Exponent) -> String {
    match e {
        Exponent::Finite(v) => format!("{v:.4}"),
        Exponent::Infinite => "inf".into(),
    }
}

fn run_certify(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let h = c.h.expect("resolved");
    let domain = DiscreteDomain::build(domain_of(c), h)?;
    ctx.summary.domain = Some(domain.preset().name().to_string());
    let total = domain.total_face_weight();
    let exact = domain.boundary().measure();
    ctx.summary.assert(Check::new(
        "surface_measure",
        (total - exact).abs() <= h * exact,
        format!("sum of face weights {total}, polygonal measure {exact}"),
    ))?;
    let cert = certify(&domain, &dyadic_scales(&domain));
    let path = ctx.file("boundary.csv")?;
    domain.write_boundary_csv(&path)?;
    ctx.lines.push(format!("passed = {}", cert.passed));
    ctx.lines.push(format!("adr_constant = {:.6}", cert.adr_constant));
    ctx.lines.push(format!(
        "corkscrew c = {:.4} (interior), {:.4} (exterior)",
        cert.interior_corkscrew_c, cert.exterior_corkscrew_c
    ));
    ctx.summary.results = json!({
        "cells": domain.cells().len(),
        "faces": domain.faces().len(),
        "surface_measure": total,
        "certificate": cert,
    });
    ctx.summary.certificates.push(CertificateEntry {
        domain: domain.preset().name().to_string(),
        h,
        certificate: cert,
    });
    Ok(())
}

fn build_system(c: &RunConfig) -> Result<(DiscreteDomain, EllipticSystem)> {
    let domain = DiscreteDomain::build(domain_of(c), c.h.expect("resolved"))?;
    let field = MatrixField::from_preset(&c.matrix, domain.dim())?;
    let drift = DriftField::build(&domain, &c.drift)?;
    let system = assemble(&field, &drift, &domain)?;
    Ok((domain, system))
}

fn constant_value(family: &DataFamily) -> Option<Complex64> {
    match family {
        DataFamily::Constant { re, im } => Some(Complex64::new(*re, *im)),
        _ => None,
    }
}

fn run_solve(c: &RunConfig, ctx: &mut Ctx) -> Result<(DiscreteDomain, EllipticSystem, BoundaryData, SolutionField)> {
    let (domain, system) = build_system(c)?;
    ctx.summary.operator = Some(system.field().label().to_string());
    ctx.summary.domain = Some(domain.preset().name().to_string());
    let report = system.coercivity_margin()?;
    let family = c.data.clone().expect("resolved");
    let data = BoundaryData::new(&domain, &family)?;
    let u = system.solve_dirichlet(&domain, &data)?;
    if let Some(k) = constant_value(&family) {
        let err = u.nodal.iter().map(|v| (v - k).norm()).fold(0.0, f64::max);
        ctx.summary.assert(Check::new(
            "constant_data",
            err <= IDENTITY_TOL,
            format!("max |u − {k}| = {err:e}"),
        ))?;
    }
    if data.is_identically_zero() {
        let m = u.nodal.iter().map(|v| v.norm()).fold(0.0, f64::max);
        ctx.summary
            .assert(Check::new("zero_data", m == 0.0, format!("max |u| = {m:e}")))?;
    }
    let path = ctx.file("solution.csv")?;
    u.write_csv(&path)?;
    let path = ctx.file("solution.json")?;
    u.write_header(&path, &system, &domain)?;
    let max = u.nodal.iter().map(|v| v.norm()).fold(0.0, f64::max);
    ctx.lines.push(format!("margin = {:.6e}", report.margin));
    ctx.lines.push(format!("residual = {:.3e}", u.residual));
    ctx.lines.push(format!("max |u| = {max:.12}"));
    ctx.summary.results = json!({
        "data": family,
        "coercivity": report,
        "residual": u.residual,
        "stats": u.stats,
        "max_abs": max,
        "nodes": u.nodal.len(),
    });
    Ok((domain, system, data, u))
}

fn run_ntmax(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let (domain, _, data, u) = run_solve(c, ctx)?;
    let p = c.p.expect("resolved");
    let nt = ntmax(&domain, &u.cell_values, p, c.a)?;
    let family = c.data.clone().expect("resolved");
    if let Some(k) = constant_value(&family) {
        let err = nt
            .values
            .iter()
            .flatten()
            .map(|v| (v - k.norm()).abs())
            .fold(0.0, f64::max);
        ctx.summary
            .assert(Check::new("constant_ntmax", err <= IDENTITY_TOL, format!("max |Ñ − |c|| = {err:e}")))?;
    }
    let path = ctx.file("nt.csv")?;
    nt.write_csv(&path)?;
    let path = ctx.file("nt.json")?;
    nt.write_metadata(&path)?;
    let g: Vec<f64> = data.face_values().iter().map(|z| z.norm()).collect();
    let norm_nt = nt.lp_norm(&domain, p)?;
    let norm_f = boundary_lp_norm(&domain, &g, p)?;
    ctx.lines.push(format!("|N|_p = {norm_nt:.9}"));
    ctx.lines.push(format!("|f|_p = {norm_f:.9}"));
    if let Value::Object(m) = &mut ctx.summary.results {
        m.insert(
            "ntmax".into(),
            json!({ "p": p, "a": c.a, "lp_norm": norm_nt, "data_norm": norm_f, "missing": nt.missing }),
        );
    }
    Ok(())
}

fn run_rh(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let mut setup = RhSetup::for_domain(
        domain_of(c),
        levels_of(c),
        vec![c.matrix.clone()],
        vec![c.drift.clone()],
        c.q.expect("resolved"),
        c.p_grid.clone().expect("resolved"),
        c.seed,
    )?;
    if let Some(d) = &c.data {
        setup.interior_data = d.clone();
    }
    let outcome = rh_campaign(&setup)?;
    let (domain, system) = {
        let mut coarse = c.clone();
        coarse.h = Some(setup.levels[0]);
        build_system(&coarse)?
    };
    ctx.summary.operator = Some(system.field().label().to_string());
    ctx.summary.domain = Some(domain.preset().name().to_string());
    let one = BoundaryData::new(&domain, &DataFamily::constant(1.0))?;
    let u = system.solve_dirichlet(&domain, &one)?;
    let mut worst: f64 = 0.0;
    let x = {
        let mut p = [0.0; 3];
        p[..setup.interior_center.len()].copy_from_slice(&setup.interior_center);
        p
    };
    for &p in &setup.ps {
        let [rh, _] = interior_rh(&domain, &u, &x, setup.interior_radius, setup.q, p, 0)?;
        worst = worst.max((rh.ratio.unwrap_or(f64::NAN) - 1.0).abs());
    }
    ctx.summary.assert(Check::new(
        "constant_ratio_one",
        worst <= IDENTITY_TOL,
        format!("max |ratio − 1| = {worst:e} for u ≡ 1"),
    ))?;
    let stable = outcome.stability.iter().filter(|s| s.stable).count();
    ctx.lines.push(format!("records = {}", outcome.records.len()));
    ctx.lines.push(format!("stable = {stable}/{}", outcome.stability.len()));
    for s in &outcome.stability {
        ctx.lines.push(format!(
            "{:?} p={} spread={}",
            s.kind,
            s.p,
            s.spread.map_or("-".into(), |v| format!("{v:.4}"))
        ));
    }
    ctx.summary.results = json!({ "setup": setup, "stability": outcome.stability });
    ctx.records.rh = outcome.records;
    Ok(())
}

fn run_localize(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let preset = domain_of(c).clone();
    let h = c.h.expect("resolved");
    let mut setup = LocalizationSetup::standard();
    if preset != setup.domain {
        let domain = DiscreteDomain::build(&preset, h)?;
        let dim = domain.dim();
        let centroid = domain.centroid();
        let q = domain.boundary().closest_point(&centroid);
        let mut mirror = [0.0; 3];
        for k in 0..3 {
            mirror[k] = 2.0 * centroid[k] - q[k];
        }
        let far = domain.boundary().closest_point(&mirror);
        setup.center = q[..dim].to_vec();
        setup.data = DataFamily::Atom {
            center: far[..dim].to_vec(),
            radius: dist(&q, &far) / 9.0,
        };
    }
    setup.domain = preset;
    setup.h = h;
    setup.matrix = c.matrix.clone();
    setup.drift = c.drift.clone();
    setup.ds = c.d.clone().expect("resolved");
    setup.p = c.p.expect("resolved");
    setup.q = c.q.expect("resolved");
    setup.a = c.a;
    setup.m = c.m;
    if let Some(d) = &c.data {
        setup.data = d.clone();
    }
    ctx.summary.domain = Some(setup.domain.name().to_string());
    ctx.summary.operator = Some(MatrixField::from_preset(&setup.matrix, setup.domain.dim())?.label().to_string());
    let outcome = localization_campaign(&setup)?;
    for r in &outcome.records {
        ctx.lines.push(format!(
            "d = {} m = {} ratio = {}",
            r.d,
            r.m,
            r.ratio.map_or("-".into(), |v| format!("{v:.6}"))
        ));
    }
    ctx.lines.push(format!(
        "spread = {}",
        outcome.spread.map_or("-".into(), |v| format!("{v:.4}"))
    ));
    ctx.summary.results = json!({ "setup": setup, "spread": outcome.spread, "stable": outcome.stable });
    ctx.records.localization = outcome.records;
    Ok(())
}

fn run_extrapolate(c: &RunConfig, ctx: &mut Ctx) -> Result<()> {
    let setup = ScanSetup {
        domain: domain_of(c).clone(),
        levels: levels_of(c),
        matrix: c.matrix.clone(),
        drift: c.drift.clone(),
        ps: c.p_grid.clone().expect("resolved"),
        a: c.a,
        seed: c.seed,
    };
    let dim = setup.domain.dim();
    let coarse = DiscreteDomain::build(&setup.domain, setup.levels[0])?;
    let cert = certify(&coarse, &dyadic_scales(&coarse));
    ctx.summary.certificates.push(CertificateEntry {
        domain: setup.domain.name().to_string(),
        h: setup.levels[0],
        certificate: cert,
    });
    let field = MatrixField::from_preset(&setup.matrix, dim)?;
    ctx.summary.operator = Some(field.label().to_string());
    ctx.summary.domain = Some(setup.domain.name().to_string());
    let outcome = solvability_scan(&setup)?;
    ctx.summary.checks.push(Check::new(
        "constant_datum_ratio",
        outcome.records.iter().all(|r| (r.constant_ratio - 1.0).abs() <= 1e-9),
        "‖Ñ(1)‖_p / ‖1‖_p = 1 at every level and exponent",
    ));
    let mut books = Vec::new();
    for n in 3..=dim.max(3) as i64 {
        books.push(fractional_exponents(Rational64::from_integer(2), n)?);
    }
    ctx.summary.checks.push(Check::new(
        "exponent_identity",
        true,
        "p = rs/2 equals s(n−1)/(n−2) exactly",
    ));
    let endpoint = p_ellipticity_range(&field, dim)?.endpoint;
    for v in &outcome.verdicts {
        ctx.lines.push(format!(
            "p = {} {} growth = [{}]",
            v.p,
            serde_json::to_value(v.verdict)?.as_str().unwrap_or_default(),
            v.growth.iter().map(|g| format!("{g:.4}")).collect::<Vec<_>>().join(", ")
        ));
    }
    for g in &outcome.gaps {
        ctx.lines.push(format!("gap at h = {}: {}", g.h, g.reason));
    }
    ctx.summary.results = json!({
        "predicted_endpoint": endpoint,
        "estimate_note": "estimated constants are lower bounds over a finite data family",
        "exponents": books,
    });
    ctx.summary.verdicts = outcome.verdicts.clone();
    ctx.records.scan = outcome.records;
    ctx.records.verdicts = outcome.verdicts;
    ctx.records.gaps = outcome.gaps;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        assert_eq!(Error::Invariant("x".into()).exit_code(), 1);
        assert_eq!(Error::Config("x".into()).exit_code(), 2);
        assert_eq!(Error::Domain("x".into()).exit_code(), 2);
        assert_eq!(Error::computation("x", vec![]).exit_code(), 3);
        assert_eq!(Error::Refused("x".into()).exit_code(), 3);
    }

    #[test]
    fn failed_run_still_writes_summary() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = RunConfig::new(Command::Solve);
        c.h = Some(0.5);
        let out = run(&c, dir.path());
        assert_eq!(out.exit_code(), 2);
        let text = std::fs::read_to_string(dir.path().join("summary.json")).unwrap();
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["errors"].as_array().unwrap().len(), 1);
    }
}

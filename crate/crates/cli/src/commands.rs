use crate::config::{Experiment, GreenSpec, Potential};
use crate::output::{num, write_csv, write_json, write_text};
use crate::svg;
use holozeros::bounds::*;
use holozeros::geometry::*;
use holozeros::greenfd::*;
use holozeros::holofunc::stokes_curves;
use holozeros::measure::RieszMeasure;
use holozeros::zerocount::{count_in_region, locate_zeros, CountResult};
use holozeros::{Error, Point, Result};
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

pub struct Outcome {
    pub exit: u8,
    pub summary: String,
}

/// Exit code for an error raised after the config was accepted.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Io(_) | Error::InvalidDomain(_) | Error::InvalidWeight(_) | Error::Parameter(_) => 64,
        Error::NonConvergence(_) | Error::ZeroOnContour { .. } | Error::ToleranceNotMet { .. } | Error::Pole { .. } => 2,
        Error::TripleTie { .. }
        | Error::Tangency { .. }
        | Error::NotSubharmonic(_)
        | Error::BoundaryCharge { .. }
        | Error::InsufficientData { .. }
        | Error::InvalidRegion(_)
        | Error::DegenerateGeometry { .. }
        | Error::GeometryTooCoarse(_) => 3,
    }
}

/// Variant name of an error, for machine-readable diagnostics.
pub fn error_kind(e: &Error) -> String {
    let d = format!("{e:?}");
    d.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
}

#[derive(Serialize)]
pub struct Diagnostic {
    /// Grid entry the error belongs to, if any.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_value: Option<f64>,
    pub kind: String,
    pub message: String,
    pub exit_code: u8,
}

impl Diagnostic {
    pub fn new(grid_value: Option<f64>, e: &Error) -> Self {
        Diagnostic { grid_value, kind: error_kind(e), message: e.to_string(), exit_code: exit_code(e) }
    }
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    errors: &'a [Diagnostic],
}

pub fn write_diagnostics(ex: &Experiment, command: &str, errors: &[Diagnostic]) -> Result<()> {
    write_json(&ex.out_dir.join("diagnostics.json"), &ex.hash, command, &Diagnostics { errors })
}

fn prepare(ex: &Experiment) -> Result<()> {
    std::fs::create_dir_all(&ex.out_dir).map_err(|e| Error::Io(format!("{}: {e}", ex.out_dir.display())))
}

#[derive(Serialize)]
struct CountRow {
    h: f64,
    #[serde(flatten)]
    result: Option<CountResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Serialize)]
struct CountReport {
    rows: Vec<CountRow>,
}

pub fn count(ex: &Experiment) -> Result<Outcome> {
    let dom = ex.domain_file()?.domain.build()?;
    let hs = ex.h_grid()?;
    prepare(ex)?;
    let u = ex.family.model();
    let results: Vec<Result<CountResult>> = hs.par_iter().map(|&h| count_in_region(u, &dom, h)).collect();

    let mut rows = Vec::new();
    let mut table = Vec::new();
    let mut errors = Vec::new();
    for (&h, r) in hs.iter().zip(results) {
        match r {
            Ok(c) => {
                table.push(vec![num(h), c.count.to_string(), num(c.residual), c.subdivisions.to_string(), c.perturbations.to_string(), String::new()]);
                rows.push(CountRow { h, result: Some(c), error: None });
            }
            Err(e) => {
                table.push(vec![num(h), String::new(), String::new(), String::new(), String::new(), e.to_string()]);
                rows.push(CountRow { h, result: None, error: Some(e.to_string()) });
                errors.push(Diagnostic::new(Some(h), &e));
            }
        }
    }
    write_csv(&ex.out_dir.join("count.csv"), &ex.hash, &["h", "count", "residual", "subdivisions", "perturbations", "error"], &table)?;
    write_json(&ex.out_dir.join("count.json"), &ex.hash, "count", &CountReport { rows })?;

    if ex.config.output.plot && errors.is_empty() {
        let zeros: Vec<_> = hs.par_iter().map(|&h| locate_zeros(u, &dom, h)).collect::<Result<_>>()?;
        for (k, (h, z)) in hs.iter().zip(&zeros).enumerate() {
            write_text(&ex.out_dir.join(format!("zeros_{k}.svg")), &svg::zeros_plot(dom.vertices(), z, &format!("zeros at h = {h}")))?;
        }
    }
    if let Some(worst) = errors.iter().map(|d| d.exit_code).max() {
        write_diagnostics(ex, "count", &errors)?;
        return Ok(Outcome { exit: worst, summary: format!("{} of {} grid entries failed; see diagnostics.json", errors.len(), hs.len()) });
    }
    let counts: Vec<String> = table.iter().map(|r| format!("h={} n={}", r[0], r[1])).collect();
    Ok(Outcome { exit: 0, summary: counts.join(", ") })
}

#[derive(Serialize)]
struct CertifiedRow {
    h: f64,
    minimal_c2: f64,
    #[serde(flatten)]
    certificate: CountCertificate,
}

#[derive(Serialize)]
struct CertifyReport {
    c2: f64,
    c2_fitted: bool,
    all_satisfied: bool,
    tie_curves: usize,
    certificates: Vec<CertifiedRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    scaling: Option<ScalingStudy>,
}

pub fn certify(ex: &Experiment) -> Result<Outcome> {
    let s = ex.family.sum()?;
    let df = ex.domain_file()?;
    let dom = df.domain.build()?;
    let hs = ex.h_grid()?;
    let geo = &ex.config.geometry;
    let weight = match df.weight.as_ref().or(geo.weight.as_ref()) {
        Some(w) => w.build(&dom)?,
        None => BoundaryWeight::constant(&dom, geo.r)?,
    };
    prepare(ex)?;
    // also the check that at most two phases tie and tie curves cross the boundary transversally
    let curves = stokes_curves(s, &dom, geo.resolution)?;
    let rw = smooth_weight(&weight, &dom)?;
    let band = BoundaryBand::new(&dom, rw.extended(), geo.band_factor)?;
    let net = distribute_boundary_points(&dom, &rw)?;
    let setup = BudgetSetup { c1: geo.c1, c2: geo.c2.unwrap_or(1.0), form: geo.budget_form() };
    let psi_measure = RieszMeasure::exp_sum_psi(&curves);

    let certs: Vec<CountCertificate> = hs
        .par_iter()
        .map(|&h| {
            let (m, samples) = match geo.potential {
                Potential::Phi => {
                    let phi = |z: Point| s.phi(z, h);
                    (RieszMeasure::exp_sum_phi(s, h), sample_epsilons(s, &phi, &net.points, h)?)
                }
                Potential::Psi => {
                    let psi = |z: Point| s.psi_max(z).0;
                    (psi_measure.clone(), sample_epsilons(s, &psi, &net.points, h)?)
                }
            };
            holozeros::bounds::certify(s, &m, CertifyGeometry { region: &dom, band: &band, net: &net }, &samples, h, &setup)
        })
        .collect::<Result<_>>()?;

    let (c2, fitted) = match geo.c2 {
        Some(c) => (c, false),
        None => (fit_c2(&certs), true),
    };
    let certs: Vec<CountCertificate> = certs.iter().map(|c| c.with_c2(c2)).collect();
    let all = c2.is_finite() && certs.iter().all(|c| c.satisfied);
    let scaling = if geo.epsilons.is_empty() { None } else { Some(sqrt_epsilon_scaling(s, &dom, hs[0], &geo.epsilons, &setup)?) };

    let table: Vec<Vec<String>> = hs
        .iter()
        .zip(&certs)
        .map(|(h, c)| {
            vec![num(*h), c.actual.to_string(), num(c.prediction), num(c.discrepancy), num(c.budget), c.satisfied.to_string(), num(c.minimal_c2()), num(c.count_residual)]
        })
        .collect();
    write_csv(
        &ex.out_dir.join("certify.csv"),
        &ex.hash,
        &["h", "actual", "prediction", "discrepancy", "budget", "satisfied", "minimal_c2", "count_residual"],
        &table,
    )?;
    let rows = hs.iter().zip(certs).map(|(&h, c)| CertifiedRow { h, minimal_c2: c.minimal_c2(), certificate: c }).collect();
    let report = CertifyReport { c2, c2_fitted: fitted, all_satisfied: all, tie_curves: curves.len(), certificates: rows, scaling };
    write_json(&ex.out_dir.join("certificates.json"), &ex.hash, "certify", &report)?;

    let how = if fitted { "fitted" } else { "configured" };
    let satisfied = report.certificates.iter().filter(|r| r.certificate.satisfied).count();
    Ok(Outcome { exit: if all { 0 } else { 1 }, summary: format!("{satisfied} of {} certificates satisfied with {how} C2 = {c2}", hs.len()) })
}

pub fn sector(ex: &Experiment) -> Result<Outcome> {
    let spec = ex.config.sector.as_ref().ok_or_else(|| Error::Parse("`sector` table is required".into()))?;
    let rs = ex.r_grid()?;
    prepare(ex)?;
    let g = spec.profile.build(spec.theta, spec.vartheta)?;
    let exp = sector_experiment(&g, spec.rho, ex.family.model(), (spec.theta, spec.vartheta), rs)?;
    let table: Vec<Vec<String>> =
        exp.rows.iter().map(|r| vec![num(r.r), r.count.to_string(), num(r.prediction), num(r.normalized_residual)]).collect();
    write_csv(&ex.out_dir.join("sector.csv"), &ex.hash, &["R", "count", "prediction", "normalized_residual"], &table)?;
    write_json(&ex.out_dir.join("sector.json"), &ex.hash, "sector", &exp)?;
    if ex.config.output.plot {
        let pts: Vec<(f64, f64)> = exp.rows.iter().map(|r| (r.r, r.normalized_residual.abs())).collect();
        write_text(&ex.out_dir.join("sector_residual.svg"), &svg::loglog_plot(&pts, "R", "|n(R) - prediction| / R^rho", "sector residual"))?;
    }
    let counts: Vec<String> = exp.rows.iter().map(|r| r.count.to_string()).collect();
    Ok(Outcome { exit: 0, summary: format!("counts {}; residual decays: {}", counts.join(","), exp.decays) })
}

#[derive(Serialize)]
struct Metric {
    name: &'static str,
    value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    limit: Option<f64>,
    pass: bool,
}

#[derive(Serialize)]
struct GreenReport<'a> {
    benchmark: &'a GreenSpec,
    interior_nodes: usize,
    metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decay: Option<DecayReport>,
}

pub fn green(ex: &Experiment) -> Result<Outcome> {
    let spec = ex.config.green.as_ref().ok_or_else(|| Error::Parse("`green` table is required".into()))?;
    prepare(ex)?;
    let (metrics, decay, grid, sample) = match spec {
        GreenSpec::Disk { spacing, tolerance } => {
            let (err, g, s) = disk_benchmark_sample(*spacing)?;
            (vec![Metric { name: "max_relative_error", value: err, limit: Some(*tolerance), pass: err <= *tolerance }], None, g, s)
        }
        GreenSpec::Strip { width, length, spacing, tolerance } => {
            let (rate, rep, g, s) = strip_decay_sample(*width, *length, *spacing)?;
            let rel = (rate - PI / width).abs() / (PI / width);
            let metrics = vec![
                Metric { name: "decay_rate", value: rate, limit: None, pass: true },
                Metric { name: "relative_rate_error", value: rel, limit: Some(*tolerance), pass: rel <= *tolerance },
                Metric { name: "log_correlation", value: rep.correlation, limit: Some(-0.9), pass: rep.passes() },
            ];
            (metrics, Some(rep), g, s)
        }
        GreenSpec::Domain { spacing, source } => {
            let dom = ex.domain_file()?.domain.build()?;
            let g = GridRegion::from_domain(&dom, *spacing)?;
            let src = g.nearest_node(Point::new(source[0], source[1]));
            let r = ex.config.geometry.r;
            let c3 = fit_c3(&g, &|_| r, &[src])?;
            let s = solve_green(&g, src)?;
            (vec![Metric { name: "c3", value: c3.global, limit: None, pass: true }], None, g, s)
        }
    };
    let table: Vec<Vec<String>> = metrics
        .iter()
        .map(|m| vec![m.name.to_string(), num(m.value), m.limit.map(num).unwrap_or_default(), m.pass.to_string()])
        .collect();
    write_csv(&ex.out_dir.join("green.csv"), &ex.hash, &["metric", "value", "limit", "pass"], &table)?;
    if ex.config.output.plot {
        write_text(&ex.out_dir.join("green_heatmap.svg"), &svg::heatmap(&grid, &sample.values, "-G"))?;
    }
    let pass = metrics.iter().all(|m| m.pass);
    let summary = metrics.iter().map(|m| format!("{} = {}", m.name, m.value)).collect::<Vec<_>>().join(", ");
    write_json(&ex.out_dir.join("green.json"), &ex.hash, "green", &GreenReport { benchmark: spec, interior_nodes: grid.interior_count(), metrics, decay })?;
    Ok(Outcome { exit: if pass { 0 } else { 1 }, summary })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes_follow_the_contract() {
        assert_eq!(exit_code(&Error::Parse("x".into())), 64);
        assert_eq!(exit_code(&Error::ZeroOnContour { at: Point::new(0.0, 0.0), retries: 8 }), 2);
        assert_eq!(exit_code(&Error::NonConvergence("x".into())), 2);
        assert_eq!(exit_code(&Error::TripleTie { at: Point::new(0.0, 0.0) }), 3);
        assert_eq!(exit_code(&Error::BoundaryCharge { angle: 0.0, mass: 1.0 }), 3);
        assert_eq!(exit_code(&Error::InsufficientData { got: 1, need: 20 }), 3);
    }

    #[test]
    fn error_kinds_are_variant_names() {
        assert_eq!(error_kind(&Error::TripleTie { at: Point::new(0.0, 0.0) }), "TripleTie");
        assert_eq!(error_kind(&Error::Parse("a b".into())), "Parse");
    }
}

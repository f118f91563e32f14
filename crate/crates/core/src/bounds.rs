//! Remainder budgets for Weyl-type zero counts, count certificates, and the
//! experiments on exponential sums and sector zero counts.

use crate::error::{Error, Result};
use crate::geometry::{distribute_boundary_points, smooth_weight, BoundaryBand, BoundaryNet, BoundaryWeight, PlanarDomain, Point};
use crate::holofunc::{stokes_curves, ExponentialSum, HolomorphicModel};
use crate::measure::{
    growth_profile_bound, disk_mass, homogeneous_measure, line_mass_in_region, log_kernel_integral, mass_over_region, mass_via_green_formula, sector_weyl_mass,
    Density, GrowthProfile, KinkOptions, PhiField, PsiField, RieszMeasure, SampledFunction,
};
use crate::zerocount::count_in_region;
use rayon::prelude::*;
use serde::Serialize;
use std::f64::consts::PI;

/// Lower-bound defect `epsilon_j = max(0, phi(z_j) - h ln|u(z_j)|)` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpsilonSample {
    pub point: Point,
    pub phi_value: f64,
    pub log_u: f64,
    /// `+inf` at a zero of `u`.
    pub epsilon: f64,
}

impl EpsilonSample {
    pub fn is_zero_of_u(&self) -> bool {
        self.epsilon.is_infinite()
    }
}

pub fn sample_epsilons<U: HolomorphicModel + ?Sized>(u: &U, phi: &(dyn Fn(Point) -> f64 + Sync), points: &[Point], h: f64) -> Result<Vec<EpsilonSample>> {
    crate::holofunc::check_h(h)?;
    points
        .par_iter()
        .map(|&z| {
            let phi_value = phi(z);
            let log_u = u.log_abs(z, h)?;
            let epsilon = if log_u == f64::NEG_INFINITY { f64::INFINITY } else { (phi_value - log_u).max(0.0) };
            Ok(EpsilonSample { point: z, phi_value, log_u, epsilon })
        })
        .collect()
}

/// Which remainder estimate to assemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum BudgetForm {
    /// Band mass, defects and logarithmic-kernel integrals around each sample point.
    LogIntegral,
    /// Band mass and defects only; valid at averaged points or under Lebesgue comparability.
    Averaged,
    /// Log terms replaced by the growth-profile bound with `t = rtil^exponent`.
    GrowthProfile { rho0: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BudgetSetup {
    pub c1: f64,
    pub c2: f64,
    pub form: BudgetForm,
}

impl Default for BudgetSetup {
    fn default() -> Self {
        BudgetSetup { c1: 1.0, c2: 1.0, form: BudgetForm::LogIntegral }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Budget {
    pub band_mass: f64,
    pub epsilon_sum: f64,
    pub log_sum: f64,
    pub log_terms: Vec<f64>,
    pub c2: f64,
    pub h: f64,
    /// `(c2/h)(band_mass + epsilon_sum + log_sum)`; `+inf` when a term diverges.
    pub total: f64,
    pub divergent: bool,
}

impl Budget {
    /// The bracket `band_mass + epsilon_sum + log_sum`, independent of `c2` and `h`.
    pub fn bracket(&self) -> f64 {
        self.band_mass + self.epsilon_sum + self.log_sum
    }

    pub fn with_c2(&self, c2: f64) -> Budget {
        Budget { c2, total: c2 / self.h * self.bracket(), ..self.clone() }
    }
}

/// `mu(region)`, by the flux of `grad Phi` when the measure is `Delta Phi` of an exponential
/// sum, by area quadrature otherwise.
pub fn riesz_mass(m: &RieszMeasure, region: &PlanarDomain) -> Result<f64> {
    match (&m.density, m.lines.is_empty() && m.atoms.is_empty()) {
        (Density::ExpSumLaplacian { sum, h }, true) => Ok(mass_via_green_formula(&PhiField { sum, h: *h }, region)),
        _ => mass_over_region(m, region),
    }
}

/// `mu` of the union of disks `D(x, r(x))`, `x` on the boundary.
pub fn band_mass(m: &RieszMeasure, band: &BoundaryBand) -> Result<f64> {
    let outer = riesz_mass(m, &band.outer_domain()?)?;
    let inner = riesz_mass(m, &band.inner_domain()?)?;
    Ok((outer - inner).max(0.0))
}

fn log_term(m: &RieszMeasure, z: Point, r: f64, setup: &BudgetSetup) -> Result<f64> {
    let rtil = r / (4.0 * setup.c1);
    match setup.form {
        BudgetForm::Averaged => Ok(0.0),
        BudgetForm::LogIntegral => log_kernel_integral(m, z, rtil, r),
        BudgetForm::GrowthProfile { rho0, exponent } => {
            let t = rtil.powf(exponent);
            let p = GrowthProfile::sample(m, z, 0.5 * t, rtil, 16, rho0)?;
            // the kernel is taken at scale r, the profile bound at scale rtil
            Ok(growth_profile_bound(&p, t, rtil)? + (4.0 * setup.c1).ln().abs() * p.w_at(rtil)?)
        }
    }
}

/// Remainder budget at the points of `net` with the defects `samples` (aligned with `net`).
pub fn remainder_budget(m: &RieszMeasure, band: &BoundaryBand, net: &BoundaryNet, samples: &[EpsilonSample], h: f64, setup: &BudgetSetup) -> Result<Budget> {
    remainder_budget_with_band_mass(m, band_mass(m, band)?, net, samples, h, setup)
}

pub fn remainder_budget_with_band_mass(m: &RieszMeasure, band_mass: f64, net: &BoundaryNet, samples: &[EpsilonSample], h: f64, setup: &BudgetSetup) -> Result<Budget> {
    crate::holofunc::check_h(h)?;
    if samples.len() != net.len() {
        return Err(Error::Parameter(format!("{} defect samples for {} net points", samples.len(), net.len())));
    }
    let log_terms: Vec<f64> = (0..net.len()).into_par_iter().map(|j| log_term(m, net.points[j], net.radii[j], setup)).collect::<Result<_>>()?;
    let epsilon_sum: f64 = samples.iter().map(|s| s.epsilon).sum();
    let log_sum: f64 = log_terms.iter().sum();
    let bracket = band_mass + epsilon_sum + log_sum;
    let divergent = !bracket.is_finite();
    Ok(Budget { band_mass, epsilon_sum, log_sum, log_terms, c2: setup.c2, h, total: setup.c2 / h * bracket, divergent })
}

/// Points `z~_j` near each `z_j^0` minimizing the logarithmic-kernel integral.
#[derive(Debug, Clone, Serialize)]
pub struct PointSelection {
    /// Selected points with the radii of the original net.
    pub net: BoundaryNet,
    pub minimized: Vec<f64>,
    /// Mean of the integral over the candidate grid in each disk.
    pub means: Vec<f64>,
    pub band_mass: f64,
    /// `sum minimized / band_mass`.
    pub k_fit: f64,
}

impl PointSelection {
    pub fn minimized_sum(&self) -> f64 {
        self.minimized.iter().sum()
    }

    pub fn mean_sum(&self) -> f64 {
        self.means.iter().filter(|m| m.is_finite()).sum()
    }
}

pub fn select_averaged_points(m: &RieszMeasure, net: &BoundaryNet, band: &BoundaryBand, c1: f64, grid: usize) -> Result<PointSelection> {
    if grid < 3 {
        return Err(Error::Parameter(format!("candidate grid {grid} must be at least 3")));
    }
    let picks: Vec<(Point, f64, f64)> = (0..net.len())
        .into_par_iter()
        .map(|j| {
            let (z0, r) = (net.points[j], net.radii[j]);
            let rho = r / (2.0 * c1);
            let mut best = (z0, f64::INFINITY);
            let mut sum = 0.0;
            let mut finite = 0usize;
            for a in 0..grid {
                for b in 0..grid {
                    let off = Point::new(-1.0 + 2.0 * a as f64 / (grid - 1) as f64, -1.0 + 2.0 * b as f64 / (grid - 1) as f64) * rho;
                    if off.norm() >= rho {
                        continue;
                    }
                    let v = log_kernel_integral(m, z0 + off, r / (4.0 * c1), r)?;
                    if v < best.1 {
                        best = (z0 + off, v);
                    }
                    if v.is_finite() {
                        sum += v;
                        finite += 1;
                    }
                }
            }
            Ok((best.0, best.1, if finite > 0 { sum / finite as f64 } else { f64::INFINITY }))
        })
        .collect::<Result<_>>()?;
    let band_mass = band_mass(m, band)?;
    let minimized: Vec<f64> = picks.iter().map(|p| p.1).collect();
    let total: f64 = minimized.iter().sum();
    let k_fit = if band_mass > 0.0 { total / band_mass } else if total == 0.0 { 0.0 } else { f64::INFINITY };
    Ok(PointSelection {
        net: BoundaryNet { points: picks.iter().map(|p| p.0).collect(), arclengths: net.arclengths.clone(), radii: net.radii.clone() },
        minimized,
        means: picks.iter().map(|p| p.2).collect(),
        band_mass,
        k_fit,
    })
}

/// Comparability of `mu` with Lebesgue measure on the disks `D(z_j, r_j/(4c))`, measured by
/// `mu(D(z, f R)) / (f^2 mu(D(z, R)))` for `f` in 1/8, 1/4, 1/2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LebesgueReport {
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Disks carrying no mass at all.
    pub empty_disks: usize,
}

impl LebesgueReport {
    pub fn comparable(&self, bound: f64) -> bool {
        self.empty_disks == 0 && self.max_ratio <= bound && self.min_ratio >= 1.0 / bound
    }
}

pub fn lebesgue_comparability(m: &RieszMeasure, net: &BoundaryNet, c: f64) -> LebesgueReport {
    let per: Vec<Option<(f64, f64)>> = (0..net.len())
        .into_par_iter()
        .map(|j| {
            let big = net.radii[j] / (4.0 * c);
            let total = disk_mass(m, net.points[j], big);
            if total <= 0.0 {
                return None;
            }
            let ratios: Vec<f64> = [0.125, 0.25, 0.5].iter().map(|f| disk_mass(m, net.points[j], f * big) / (f * f * total)).collect();
            Some((ratios.iter().copied().fold(f64::INFINITY, f64::min), ratios.iter().copied().fold(0.0, f64::max)))
        })
        .collect();
    let mut rep = LebesgueReport { min_ratio: f64::INFINITY, max_ratio: 0.0, empty_disks: 0 };
    for p in per {
        match p {
            Some((lo, hi)) => {
                rep.min_ratio = rep.min_ratio.min(lo);
                rep.max_ratio = rep.max_ratio.max(hi);
            }
            None => rep.empty_disks += 1,
        }
    }
    rep
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CountCertificate {
    pub actual: i64,
    pub prediction: f64,
    pub discrepancy: f64,
    pub budget: f64,
    pub satisfied: bool,
    pub components: Budget,
    pub form: BudgetForm,
    pub count_residual: f64,
}

impl CountCertificate {
    pub fn new(actual: i64, prediction: f64, components: Budget, form: BudgetForm, count_residual: f64) -> Self {
        let discrepancy = (actual as f64 - prediction).abs();
        let budget = components.total;
        CountCertificate { actual, prediction, discrepancy, budget, satisfied: discrepancy <= budget, components, form, count_residual }
    }

    /// Re-derives `satisfied` from the stored components.
    pub fn is_consistent(&self) -> bool {
        let b = self.components.c2 / self.components.h * self.components.bracket();
        let close = (b - self.budget).abs() <= 1e-12 * b.abs().max(1.0) || (b.is_infinite() && self.budget.is_infinite());
        close && self.satisfied == (self.discrepancy <= self.budget) && self.discrepancy == (self.actual as f64 - self.prediction).abs()
    }

    /// The smallest `c2` for which this certificate holds.
    pub fn minimal_c2(&self) -> f64 {
        let b = self.components.bracket();
        if self.discrepancy == 0.0 {
            0.0
        } else if b > 0.0 {
            self.discrepancy * self.components.h / b
        } else {
            f64::INFINITY
        }
    }

    pub fn with_c2(&self, c2: f64) -> CountCertificate {
        CountCertificate::new(self.actual, self.prediction, self.components.with_c2(c2), self.form, self.count_residual)
    }
}

/// Geometry shared by a certification run.
#[derive(Debug, Clone, Copy)]
pub struct CertifyGeometry<'a> {
    pub region: &'a PlanarDomain,
    pub band: &'a BoundaryBand,
    pub net: &'a BoundaryNet,
}

/// Exact zero count against `mu(region)/(2 pi h)` with the selected remainder budget.
pub fn certify<U: HolomorphicModel + ?Sized>(
    u: &U,
    m: &RieszMeasure,
    geo: CertifyGeometry<'_>,
    samples: &[EpsilonSample],
    h: f64,
    setup: &BudgetSetup,
) -> Result<CountCertificate> {
    let count = count_in_region(u, geo.region, h)?;
    let prediction = riesz_mass(m, geo.region)? / (2.0 * PI * h);
    let budget = remainder_budget(m, geo.band, geo.net, samples, h, setup)?;
    Ok(CountCertificate::new(count.count, prediction, budget, setup.form, count.residual))
}

/// Smallest `c2` satisfying every certificate, rounded up by a relative `1e-12` so that the
/// recomputed budgets still cover the discrepancies in floating point.
pub fn fit_c2(certs: &[CountCertificate]) -> f64 {
    certs.iter().map(CountCertificate::minimal_c2).fold(0.0, f64::max) * (1.0 + 1e-12)
}

/// Spearman rank correlation (average ranks on ties).
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    fn ranks(v: &[f64]) -> Vec<f64> {
        let mut idx: Vec<usize> = (0..v.len()).collect();
        idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
        let mut r = vec![0.0; v.len()];
        let mut i = 0;
        while i < idx.len() {
            let mut j = i;
            while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
                j += 1;
            }
            for k in i..=j {
                r[idx[k]] = (i + j) as f64 / 2.0;
            }
            i = j + 1;
        }
        r
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumRow {
    pub h: f64,
    pub actual: i64,
    /// `(1/2 pi h) int Delta Psi` from the tie-curve line masses.
    pub prediction: f64,
    pub discrepancy: f64,
    /// Outward fluxes of `grad Phi` and `grad Psi` through the region boundary.
    pub phi_flux: f64,
    pub psi_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpSumTable {
    pub rows: Vec<ExpSumRow>,
    pub max_discrepancy: f64,
    pub smallest_h_discrepancy: f64,
    /// Rank correlation of the discrepancy with `1/h`.
    pub spearman: f64,
    /// Strictly increasing discrepancy as `h` decreases, ending above twice the first value plus one.
    pub monotone_growth: bool,
    /// `max |phi_flux - psi_flux| / h`.
    pub flux_k: f64,
}

pub fn exp_sum_experiment(s: &ExponentialSum, region: &PlanarDomain, hs: &[f64], resolution: f64) -> Result<ExpSumTable> {
    if hs.is_empty() {
        return Err(Error::Parameter("empty h grid".into()));
    }
    let curves = stokes_curves(s, region, resolution)?;
    let psi_mass = line_mass_in_region(&RieszMeasure::exp_sum_psi(&curves).lines, region);
    let psi_flux = mass_via_green_formula(&PsiField { sum: s }, region);
    let rows: Vec<ExpSumRow> = hs
        .par_iter()
        .map(|&h| {
            let actual = count_in_region(s, region, h)?.count;
            let prediction = psi_mass / (2.0 * PI * h);
            let phi_flux = mass_via_green_formula(&PhiField { sum: s, h }, region);
            Ok(ExpSumRow { h, actual, prediction, discrepancy: (actual as f64 - prediction).abs(), phi_flux, psi_flux })
        })
        .collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..rows.len()).collect();
    order.sort_by(|&a, &b| rows[b].h.total_cmp(&rows[a].h));
    let disc: Vec<f64> = order.iter().map(|&i| rows[i].discrepancy).collect();
    let inv_h: Vec<f64> = order.iter().map(|&i| 1.0 / rows[i].h).collect();
    let monotone = disc.windows(2).all(|w| w[1] > w[0]) && disc.len() > 1 && disc[disc.len() - 1] > 2.0 * disc[0] + 1.0;
    Ok(ExpSumTable {
        max_discrepancy: disc.iter().copied().fold(0.0, f64::max),
        smallest_h_discrepancy: disc[disc.len() - 1],
        spearman: spearman(&inv_h, &disc),
        monotone_growth: monotone,
        flux_k: rows.iter().map(|r| (r.phi_flux - r.psi_flux).abs() / r.h).fold(0.0, f64::max),
        rows,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorRow {
    pub r: f64,
    pub count: i64,
    pub prediction: f64,
    /// `(count - prediction) / R^rho`.
    pub normalized_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorExperiment {
    pub theta: f64,
    pub vartheta: f64,
    pub rho: f64,
    pub rows: Vec<SectorRow>,
    /// `|residual(R_max)| <= |residual(R_min)| / 2 + tol`.
    pub decays: bool,
    pub counts_monotone: bool,
}

/// Zeros in `1 < |z| < R`, `theta < arg z < vartheta` against the angular Riesz mass over `2 pi`.
pub fn sector_experiment<U: HolomorphicModel + ?Sized>(
    g: &SampledFunction,
    rho: f64,
    u: &U,
    sector: (f64, f64),
    r_grid: &[f64],
) -> Result<SectorExperiment> {
    let (theta, vartheta) = sector;
    if r_grid.is_empty() {
        return Err(Error::Parameter("empty R grid".into()));
    }
    let nu = homogeneous_measure(g, rho, &KinkOptions::default())?;
    let rows: Vec<SectorRow> = r_grid
        .par_iter()
        .map(|&r| {
            let sm = sector_weyl_mass(&nu, g, rho, theta, vartheta, r)?;
            if let Some((angle, mass)) = sm.boundary_charge {
                return Err(Error::BoundaryCharge { angle, mass });
            }
            // chords short against the zero spacing near the outer arc
            let dom = PlanarDomain::truncated_sector(theta, vartheta, 1.0, r, (0.5 / r).min(0.05))?;
            let count = count_in_region(u, &dom, 1.0)?.count;
            let prediction = sm.mass / (2.0 * PI);
            Ok(SectorRow { r, count, prediction, normalized_residual: (count as f64 - prediction) / r.powf(rho) })
        })
        .collect::<Result<_>>()?;
    let first = rows.iter().min_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
    let last = rows.iter().max_by(|a, b| a.r.total_cmp(&b.r)).unwrap();
    let decays = last.normalized_residual.abs() <= 0.5 * first.normalized_residual.abs() + 1e-9;
    let mut sorted = rows.clone();
    sorted.sort_by(|a, b| a.r.total_cmp(&b.r));
    let counts_monotone = sorted.windows(2).all(|w| w[1].count >= w[0].count);
    Ok(SectorExperiment { theta, vartheta, rho, rows, decays, counts_monotone })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingRow {
    pub epsilon: f64,
    pub r: f64,
    pub net_size: usize,
    pub budget: Budget,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingStudy {
    pub h: f64,
    pub rows: Vec<ScalingRow>,
    /// Log-log slope of the budget against `epsilon`.
    pub slope: f64,
}

/// Budget on `region` with constant weight `r = sqrt(epsilon)` and all defects equal to `epsilon`.
pub fn sqrt_epsilon_scaling(s: &ExponentialSum, region: &PlanarDomain, h: f64, epsilons: &[f64], setup: &BudgetSetup) -> Result<ScalingStudy> {
    let m = RieszMeasure::exp_sum_phi(s, h);
    let mut rows = Vec::new();
    for &eps in epsilons {
        let r = eps.sqrt();
        let w = BoundaryWeight::constant(region, r)?;
        let rw = smooth_weight(&w, region)?;
        let net = distribute_boundary_points(region, &rw)?;
        let band = BoundaryBand::new(region, rw.extended(), 1.0)?;
        let samples: Vec<EpsilonSample> = net.points.iter().map(|&z| EpsilonSample { point: z, phi_value: 0.0, log_u: 0.0, epsilon: eps }).collect();
        let budget = remainder_budget(&m, &band, &net, &samples, h, setup)?;
        rows.push(ScalingRow { epsilon: eps, r, net_size: net.len(), budget });
    }
    let x: Vec<f64> = rows.iter().map(|r| r.epsilon).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.budget.total).collect();
    Ok(ScalingStudy { h, slope: loglog_slope(&x, &y), rows })
}

use std::fs;
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, ensure, Context, Result};
use serde::Serialize;
use sphere_rigidity::body::ConvexBody;
use sphere_rigidity::experiments::{
    admissible_t_values, best_fit_ellipse_distance, bp5_residual_2d, bp_residual, contraction_part,
    contraction_spectrum, predicted_slope, radon_curve_build, rigidity_scan, scan_order, BpResidual,
    EllipseFit, Problem,
};
use sphere_rigidity::harmonics::HarmonicCoeffs;
use sphere_rigidity::io::{self, fmt_f64, ArcRecord, BodyRecord};
use sphere_rigidity::ma_solver::{contraction_rate, ma_solve, phi_split_check, MaSolveOptions, MaSolveTrace};
use sphere_rigidity::operators::{funk_multiplier, laplace_multiplier};
use sphere_rigidity::{Error, SphericalGrid};

use crate::{Outcome, Report, RunConfig, VERSION};

const VERIFY_TOL: f64 = 1e-5;
const SLOPE_TOL: f64 = 0.1;
/// m = 2 slopes are compared against this fraction of the m = 4 prediction.
const DEGENERATE_FRACTION: f64 = 0.05;
const RADON_TOL: f64 = 1e-8;

fn outcome(passed: bool) -> Outcome {
    if passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn emit<T: Serialize>(cfg: &RunConfig, passed: bool, result: T, file: Option<&Path>) -> Result<Outcome> {
    let report = Report { version: VERSION, config: cfg, passed, result };
    let text = io::to_json_pretty(&report)?;
    if let Some(path) = file {
        fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?;
    }
    print!("{text}");
    Ok(outcome(passed))
}

/// CSV with '.' decimals, LF endings and a header row.
struct Table {
    writer: csv::Writer<Vec<u8>>,
}

impl Table {
    fn new(header: &[&str]) -> Result<Self> {
        let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        writer.write_record(header)?;
        Ok(Self { writer })
    }

    fn push(&mut self, row: Vec<String>) -> Result<()> {
        self.writer.write_record(&row)?;
        Ok(())
    }

    fn render(self) -> Result<String> {
        Ok(String::from_utf8(self.writer.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
    }
}

fn grid(dim: usize, resolution: usize) -> Result<Arc<SphericalGrid>> {
    Ok(Arc::new(SphericalGrid::new(dim, resolution)?))
}

pub fn verify(cfg: &RunConfig, body_file: &Path) -> Result<Outcome> {
    let record: BodyRecord = io::read_json(body_file)?;
    let problem = cfg.problem.expect("validated");
    let g = grid(record.dim_n, cfg.resolution)?;
    let body = record.to_body(g).with_context(|| format!("loading {}", body_file.display()))?;
    let residual = if body.dim() == 2 && problem == Problem::Bp5 {
        bp5_residual_2d(&body)?
    } else {
        bp_residual(&body, problem)?
    };
    let passed = residual.l2_residual <= cfg.tol.unwrap_or(VERIFY_TOL);
    emit(cfg, passed, residual, cfg.out.as_deref())
}

#[derive(Serialize)]
struct ScanSummary {
    problem: Problem,
    n: usize,
    #[serde(rename = "L")]
    band_limit: usize,
    m: usize,
    k: i64,
    t_values: Vec<f64>,
    residual_values: Vec<f64>,
    pruned_t: Vec<f64>,
    slope: Option<f64>,
    line_slope: Option<f64>,
    predicted: f64,
    passed: bool,
}

pub fn rigidity(cfg: &RunConfig) -> Result<Outcome> {
    ensure!(cfg.dim_n == 3, "rigidity scans are defined for n = 3");
    ensure!(!cfg.degrees.is_empty(), "--degrees must not be empty");
    for m in &cfg.degrees {
        ensure!(*m >= 2 && m % 2 == 0, "degrees must be even and at least 2, got {m}");
    }
    let mut ts = cfg.t_values.clone();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    let g = grid(3, cfg.resolution)?;
    let tol = cfg.tol.unwrap_or(SLOPE_TOL);
    let problems = match cfg.problem {
        Some(p) => vec![p],
        None => vec![Problem::Bp5, Problem::Bp8],
    };
    let mut csv = Table::new(&["problem", "n", "L", "m", "k", "t", "residual_l2", "residual_sup", "status"])?;
    let mut summaries = Vec::new();
    for &m in &cfg.degrees {
        let k = scan_order(m);
        let admissible = admissible_t_values(&g, cfg.band_limit, m, k, &ts);
        let pruned: Vec<f64> = ts.iter().copied().filter(|t| !admissible.contains(t)).collect();
        for p in &problems {
            let predicted = predicted_slope(*p, 3, m)?;
            let base = |t: f64| vec![p.to_string(), "3".into(), cfg.band_limit.to_string(), m.to_string(), k.to_string(), fmt_f64(t)];
            for t in &pruned {
                eprintln!("warning: {p} m={m} t={t} is outside the convexity window; pruned");
                let mut row = base(*t);
                row.extend(["".into(), "".into(), "nonconvex".into()]);
                csv.push(row)?;
            }
            if admissible.is_empty() {
                summaries.push(ScanSummary {
                    problem: *p, n: 3, band_limit: cfg.band_limit, m, k, t_values: vec![], residual_values: vec![],
                    pruned_t: pruned.clone(), slope: None, line_slope: None, predicted, passed: false,
                });
                continue;
            }
            let scan = match rigidity_scan(*p, &g, cfg.band_limit, m, k, &admissible) {
                Ok(s) => s,
                Err(Error::NonConvexScan(bad)) => bail!("support-side convexity failed for m={m}, t={bad:?}"),
                Err(e) => return Err(e.into()),
            };
            for (i, t) in scan.t_values.iter().enumerate() {
                let mut row = base(*t);
                row.extend([fmt_f64(scan.residual_values[i]), fmt_f64(scan.sup_values[i]), "ok".into()]);
                csv.push(row)?;
            }
            let passed = if m == 2 {
                scan.fitted_slope <= DEGENERATE_FRACTION * predicted_slope(*p, 3, 4)?
            } else {
                (scan.slope_ratio() - 1.0).abs() <= tol
            };
            summaries.push(ScanSummary {
                problem: *p, n: 3, band_limit: cfg.band_limit, m, k, t_values: scan.t_values, residual_values: scan.residual_values,
                pruned_t: pruned.clone(), slope: Some(scan.fitted_slope), line_slope: Some(scan.line_slope), predicted, passed,
            });
        }
    }
    let passed = summaries.iter().all(|s| s.passed);
    let json_path = match &cfg.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            fs::write(dir.join("rigidity.csv"), csv.render()?)?;
            Some(dir.join("rigidity.json"))
        }
        None => None,
    };
    emit(cfg, passed, summaries, json_path.as_deref())
}

#[derive(Serialize)]
struct MaReport {
    trace: MaSolveTrace,
    contraction_rate: Option<f64>,
    phi_prime_exact: bool,
    phi_double_prime_ratio: f64,
}

pub fn solve_ma(cfg: &RunConfig, gamma_file: &Path, max_iter: usize) -> Result<Outcome> {
    let gamma: HarmonicCoeffs = io::read_gamma(gamma_file)?;
    let g = grid(gamma.dim(), cfg.resolution)?;
    let opts = MaSolveOptions { max_iter, tol: cfg.tol.unwrap_or(MaSolveOptions::default().tol), ..Default::default() };
    let (trace, passed) = match ma_solve(&g, &gamma, &opts) {
        Ok(t) => {
            let ok = t.converged;
            (t, ok)
        }
        Err(Error::Divergence { trace, .. }) => (*trace, false),
        Err(e) => return Err(e.into()),
    };
    let (phi_prime_exact, ratio) = phi_split_check(&trace, &gamma)?;
    let report = MaReport {
        contraction_rate: contraction_rate(&trace).ok(),
        trace,
        phi_prime_exact,
        phi_double_prime_ratio: ratio,
    };
    emit(cfg, passed, report, cfg.out.as_deref())
}

#[derive(Serialize)]
struct RadonReport {
    arc_coeffs: Vec<f64>,
    product_constant: f64,
    residual: BpResidual,
    ellipse: EllipseFit,
}

pub fn radon(cfg: &RunConfig, arc_file: &Path) -> Result<Outcome> {
    let arc: ArcRecord = io::read_json(arc_file)?;
    let g = grid(2, cfg.resolution)?;
    let body = radon_curve_build(&g, &arc.coeffs)?;
    let residual = bp5_residual_2d(&body)?;
    let projected = sphere_rigidity::experiments::RadonArc::new(&arc.coeffs)?;
    let passed = residual.l2_residual <= cfg.tol.unwrap_or(RADON_TOL);
    if let Some(path) = &cfg.out {
        io::write_json(path, &BodyRecord::from_body(&body))?;
    }
    let report = RadonReport {
        arc_coeffs: projected.coeffs().to_vec(),
        product_constant: projected.product_constant(),
        ellipse: best_fit_ellipse_distance(&body),
        residual,
    };
    emit(cfg, passed, report, None)
}

pub fn multipliers(cfg: &RunConfig) -> Result<Outcome> {
    let problem = cfg.problem.expect("validated");
    let n = cfg.dim_n;
    ensure!(n >= 3, "multiplier tables need n >= 3");
    let full = contraction_spectrum(problem, n, cfg.band_limit)?;
    let part = contraction_part(&full);
    let mut csv = Table::new(&["m", "funk", "laplace", "mu", "contraction_mu"])?;
    for m in 0..=cfg.band_limit {
        let funk = if m % 2 == 0 { fmt_f64(funk_multiplier(m, n)?) } else { "0.0".into() };
        csv.push(vec![
            m.to_string(),
            funk,
            fmt_f64(laplace_multiplier(m, n)),
            fmt_f64(full.multiplier(m)),
            fmt_f64(part.multiplier(m)),
        ])?;
    }
    let (arg, max) = part.max_abs();
    let passed = max < 1.0;
    eprintln!("strong contraction: max |mu_m| over even m >= 4 is {max} at m = {arg} ({})", if passed { "certified" } else { "FAILED" });
    let text = csv.render()?;
    match &cfg.out {
        Some(path) => fs::write(path, &text).with_context(|| format!("writing {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(outcome(passed))
}

fn parse_perturbation(s: &str) -> Result<(usize, i64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    ensure!(parts.len() == 3, "perturbation must be m:k:t, got '{s}'");
    Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
}

pub fn make_body(cfg: &RunConfig, axes: Option<&[f64]>, perturb: &[String]) -> Result<Outcome> {
    let n = cfg.dim_n;
    let g = grid(n, cfg.resolution)?;
    let body = match axes {
        Some(a) => {
            ensure!(perturb.is_empty(), "--axes and --perturb are exclusive");
            ensure!(a.len() == n, "--axes needs {n} values");
            ensure!(a.iter().all(|v| *v > 0.0), "axes must be positive");
            let third = if n == 3 { a[2] } else { 1.0 };
            ConvexBody::ellipsoid_axes(g, cfg.band_limit, [a[0], a[1], third])?
        }
        None => {
            let mut rho = HarmonicCoeffs::constant(n, cfg.band_limit, 1.0);
            for p in perturb {
                let (m, k, t) = parse_perturbation(p)?;
                let i = rho.try_index(m, k)?;
                rho.values_mut()[i] += t;
            }
            ConvexBody::from_radial_coeffs(g, rho)?
        }
    };
    let record = BodyRecord::from_body(&body);
    match &cfg.out {
        Some(path) => io::write_json(path, &record)?,
        None => print!("{}", io::to_json_pretty(&record)?),
    }
    Ok(Outcome::Pass)
}

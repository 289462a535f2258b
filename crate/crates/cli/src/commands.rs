use std::path::PathBuf;
use std::time::Instant;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use pshlab::acceptance::{acceptance_suite, DEFAULT_SEED};
use pshlab::bochner::bochner_residual;
use pshlab::cutoff::{make_cutoff, CutoffKind};
use pshlab::dbar1d::hormander_ratio;
use pshlab::extension::{
    best_extension_constant, coarse_extension_sweep, optimal_extension_margin, parse_candidate, HolomorphicCandidate,
};
use pshlab::fields::{
    default_dim, levi_form_fd, min_levi_eigenvalue, parse_field, parse_omega, CorpusField, ScalarField, Smoothness,
};
use pshlab::forms::{parse_form, FormField01};
use pshlab::geometry::{parse_point, parse_region, CylinderSpec, DomainBox, Point, QuadratureRule};
use pshlab::grid::GridDiscretization;
use pshlab::linalg::{CMatrix, C64};
use pshlab::meanvalue::{classify_psh, ScanOptions};
use pshlab::report::{CheckRecord, Report};
use pshlab::witness::{
    build_psi_s, build_witness_form, coarse_constant_growth, coarse_rhs_bound, lipschitz_estimate,
    reevaluate_certificate, scan_sharp_witness, CmRule, WitnessScanOptions,
};
use pshlab::ComplexPoint;

use crate::output::{csv_bytes, write_atomic, Cell};

pub struct Outcome {
    report: Report,
    /// Primary output: the report itself, or a CSV table.
    csv: Option<Vec<u8>>,
    out: Option<PathBuf>,
    report_path: Option<PathBuf>,
    extra: Vec<(PathBuf, Vec<u8>)>,
}

impl Outcome {
    fn json(report: Report, out: Option<PathBuf>) -> Self {
        Self {
            report,
            csv: None,
            out,
            report_path: None,
            extra: Vec::new(),
        }
    }

    /// Writes the outputs and prints one line per check to stderr; returns
    /// whether every check passed.
    pub fn finish(mut self, config_file: Option<String>) -> Result<bool> {
        if let Value::Object(map) = &mut self.report.config {
            map.insert("config_file".into(), json!(config_file));
        }
        let report_json = self.report.to_json();
        match (&self.csv, &self.out) {
            (Some(csv), Some(path)) => write_atomic(path, csv)?,
            (Some(csv), None) => print!("{}", String::from_utf8_lossy(csv)),
            (None, Some(path)) => write_atomic(path, report_json.as_bytes())?,
            (None, None) => print!("{report_json}"),
        }
        if let Some(path) = &self.report_path {
            write_atomic(path, report_json.as_bytes())?;
        }
        for (path, bytes) in &self.extra {
            write_atomic(path, bytes)?;
        }
        for c in &self.report.checks {
            eprintln!("{} {}", if c.passed { "PASS" } else { "FAIL" }, c.name);
            for b in c.bounds.iter().filter(|b| !b.holds) {
                eprintln!("  {} = {:e}, limit {:e}", b.quantity, b.value, b.limit);
            }
            if let Some(e) = &c.error {
                eprintln!("  {e}");
            }
        }
        Ok(self.report.passed)
    }
}

fn echo<T: Serialize>(args: &T) -> Value {
    serde_json::to_value(args).expect("arguments serialize")
}

fn corpus(func: &str, dim: &mut Option<usize>) -> Result<CorpusField> {
    let n = dim.unwrap_or_else(|| default_dim(func));
    *dim = Some(n);
    Ok(parse_field(func, n)?)
}

fn center_or_origin(center: &mut Option<String>, n: usize) -> Result<ComplexPoint> {
    let z = match center {
        Some(text) => parse_point(text)?,
        None => Point::origin(n),
    };
    if z.dim() != n {
        bail!("parse error in center: expected {n} coordinates, got {}", z.dim());
    }
    *center = Some(serde_json::to_string(&z)?);
    Ok(z)
}

fn matrix_pairs(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|j| (0..m.ncols()).map(|k| [m[(j, k)].re, m[(j, k)].im]).collect())
        .collect()
}

fn timed(report: &mut Report, check: CheckRecord, start: Instant) {
    report.push(check, start.elapsed().as_secs_f64());
}

#[derive(Args, Serialize)]
pub struct LeviArgs {
    /// Corpus field id, e.g. `sq_norm`, `saddle:2`, `log_abs:[[0.5,0]]`.
    #[arg(long)]
    func: String,
    /// Dimension n (default: 2 for fields defined on C² only, else 1).
    #[arg(long)]
    dim: Option<usize>,
    /// JSON array of [re, im] pairs.
    #[arg(long)]
    point: String,
    /// Lower bound form: `zero` or `scalar:<c>`.
    #[arg(long, default_value = "zero")]
    omega: String,
    /// Finite-difference step.
    #[arg(long, default_value_t = 1e-3)]
    h: f64,
    /// Largest accepted entry error, relative to max(max|L|, 1).
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn levi(mut a: LeviArgs) -> Result<Outcome> {
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let z = parse_point(&a.point)?;
    if z.dim() != n {
        bail!("parse error in point: expected {n} coordinates, got {}", z.dim());
    }
    let omega = parse_omega(&a.omega, n)?;
    let mut report = Report::new("levi", echo(&a));
    let start = Instant::now();
    let fd = levi_form_fd(&phi, &z, a.h)?;
    let exact = phi.hessian(&z);
    let mut oracle = CheckRecord::new("closed-form-vs-differences");
    if let Some(m) = &exact {
        let max = |m: &CMatrix| m.iter().map(|c| c.norm()).fold(0.0, f64::max);
        oracle.le("rel_err", max(&(&fd - m)) / max(m).max(1.0), a.tol);
    } else {
        oracle.note("no closed form");
    }
    timed(&mut report, oracle, start);
    let start = Instant::now();
    let eig = min_levi_eigenvalue(&phi, omega.as_ref(), &z)?;
    let mut c = CheckRecord::new("eigenpair");
    c.value("lambda_min", eig.lambda_min).le("residual", eig.residual, 1e-10);
    timed(&mut report, c, start);
    report.data = json!({
        "point": z,
        "closed_form": exact.as_ref().map(matrix_pairs),
        "finite_difference": matrix_pairs(&fd),
        "lambda_min": eig.lambda_min,
        "xi": eig.xi,
        "eigen_residual": eig.residual,
        "smoothness": phi.smoothness_at(&z).label(),
    });
    Ok(Outcome::json(report, a.out))
}

#[derive(Args, Serialize)]
pub struct CheckPshArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    /// `ball:<R>`, `polydisc:<r1>,…` or `box:<h1>,…`, centered at the origin.
    #[arg(long, default_value = "ball:1")]
    region: String,
    #[arg(long, default_value_t = 100)]
    centers: usize,
    /// Cylinders per center.
    #[arg(long, default_value_t = 10)]
    cylinders: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Violation threshold on `mean − φ(z0)`.
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    /// Quadrature nodes per cylinder (default: 4096 for n = 1, 65536 for n = 2).
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn check_psh(mut a: CheckPshArgs) -> Result<Outcome> {
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let region = parse_region(&a.region, n)?;
    let mut opts = ScanOptions::new(n, a.centers, a.cylinders, a.seed);
    opts.tol = a.tol;
    if let Some(b) = a.budget {
        opts.rule = opts.rule.with_budget(b);
    }
    a.budget = Some(opts.rule.budget);
    let mut report = Report::new("check-psh", echo(&a));
    let start = Instant::now();
    let scan = classify_psh(&phi, &region, &opts)?;
    let mut c = CheckRecord::new("sub-mean-value");
    c.value("cylinders", scan.cylinders as f64)
        .value("min_margin", scan.min_margin)
        .value("max_error_estimate", scan.max_error_estimate)
        .value("discarded_candidates", scan.discarded as f64)
        .le("violations", scan.violations.len() as f64, 0.0);
    timed(&mut report, c, start);
    report.data = json!({ "verdict": scan.verdict(), "scan": scan });
    Ok(Outcome::json(report, a.out))
}

#[derive(Args, Serialize)]
pub struct BochnerArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    /// `bump_const[:ξ]`, `bump_zbar2`, `dbar_bump` or `dbar_nu`.
    #[arg(long, default_value = "bump_zbar2")]
    form: String,
    /// Nodes per real axis (default: 256 for n = 1, 24 for n = 2).
    #[arg(long)]
    grid: Option<usize>,
    /// Largest accepted relative residual (default: 1e-3 for n = 1, 5e-3 otherwise).
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn bochner(mut a: BochnerArgs) -> Result<Outcome> {
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let form = parse_form(&a.form, n)?;
    let per_axis = *a.grid.get_or_insert(if n == 1 { 256 } else { 24 });
    let tol = *a.tol.get_or_insert(if n == 1 { 1e-3 } else { 5e-3 });
    let grid = GridDiscretization::around(&form.support(), per_axis)?;
    let mut report = Report::new("bochner", echo(&a));
    let start = Instant::now();
    let r = bochner_residual(form.as_ref(), &phi, &grid)?;
    let mut c = CheckRecord::new("identity");
    c.value("lhs", r.lhs).value("rhs", r.rhs).le("residual", r.residual, tol);
    timed(&mut report, c, start);
    report.data = serde_json::to_value(&r)?;
    Ok(Outcome::json(report, a.out))
}

#[derive(Args, Serialize)]
pub struct WitnessArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, default_value = "zero")]
    omega: String,
    #[arg(long, default_value = "ball:1")]
    region: String,
    /// Largest s; the schedule is 10, 100, … up to it.
    #[arg(long, default_value_t = 1e4)]
    smax: f64,
    /// Integration nodes per real axis (default: 64 for n = 1, 16 for n = 2).
    #[arg(long)]
    grid: Option<usize>,
    /// Levi scan nodes per real axis (default: 21 for n = 1, 7 for n = 2).
    #[arg(long)]
    resolution: Option<usize>,
    /// Tolerance of the pointwise lower-bound check.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Skip the re-evaluation of a certificate on the doubled grid.
    #[arg(long)]
    no_doubling: bool,
    /// CSV of the s-schedule steps.
    #[arg(long)]
    schedule_csv: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn s_schedule(smax: f64) -> Vec<f64> {
    let mut s = Vec::new();
    let mut v = 10.0;
    while v <= smax * (1.0 + 1e-12) {
        s.push(v);
        v *= 10.0;
    }
    if s.is_empty() {
        s.push(smax);
    }
    s
}

pub fn witness(mut a: WitnessArgs) -> Result<Outcome> {
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let omega = parse_omega(&a.omega, n)?;
    let region = parse_region(&a.region, n)?;
    if !(a.smax > 0.0) {
        bail!("parse error in smax: must be positive");
    }
    let mut opts = WitnessScanOptions::default_for(n);
    opts.s_schedule = s_schedule(a.smax);
    opts.grid = *a.grid.get_or_insert(opts.grid);
    opts.resolution = *a.resolution.get_or_insert(opts.resolution);
    opts.tol = a.tol;
    let mut config = echo(&a);
    config["s_schedule"] = json!(opts.s_schedule);
    let mut report = Report::new("witness", config);
    let start = Instant::now();
    let scan = scan_sharp_witness(&phi, omega.as_ref(), &region, &opts)?;
    let mut c = CheckRecord::new("scan");
    c.value("steps", scan.steps.len() as f64);
    let mut doubled = None;
    if let Some(cert) = &scan.certificate {
        c.value("s", cert.s).value("e_log_scale", cert.e_log_scale).lt("e_mantissa", cert.e_mantissa, 0.0);
        if !a.no_doubling {
            let again = reevaluate_certificate(cert, &phi, omega.as_ref(), 2 * cert.grid_per_axis)?;
            c.value("doubled_e_log_scale", again.log_scale)
                .lt("doubled_grid_e_mantissa", again.mantissa, 0.0);
            doubled = Some(again);
        }
    }
    timed(&mut report, c, start);
    let verdict = match (&scan.certificate, scan.verdict.holds()) {
        (Some(_), _) => "certificate",
        (None, true) => "lower-bound-holds",
        (None, false) => "no-certificate-within-schedule",
    };
    let mut extra = Vec::new();
    if let Some(path) = &a.schedule_csv {
        let rows: Vec<Vec<Cell>> = scan
            .steps
            .iter()
            .map(|s| vec![Cell::F(s.s), Cell::F(s.e.mantissa), Cell::F(s.e.log_scale), Cell::B(s.e.is_negative())])
            .collect();
        extra.push((path.clone(), csv_bytes(&["s", "e_mantissa", "e_log_scale", "negative"], &rows)?));
    }
    report.data = json!({ "verdict": verdict, "certificate": scan.certificate, "doubled_grid": doubled, "scan": scan });
    let mut outcome = Outcome::json(report, a.out);
    outcome.extra = extra;
    Ok(outcome)
}

#[derive(Args, Serialize)]
pub struct CoarseChainArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0])]
    m: Vec<f64>,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Rule for C_m: `<c>`, `const:<c>`, `poly:<k>`, `exp:<a>`, `exp_sqrt`.
    #[arg(long, default_value = "1")]
    cm: String,
    #[arg(long, value_delimiter = ',', default_values_t = [0.5, 0.25])]
    eps: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.0625])]
    delta: Vec<f64>,
    /// Center w of the annulus form (default: the origin).
    #[arg(long)]
    center: Option<String>,
    /// Nodes per real axis.
    #[arg(long, default_value_t = 81)]
    grid: usize,
    /// Values of m for the growth table of C′_m.
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 1e2, 1e4, 1e6])]
    growth_m: Vec<f64>,
    #[arg(long, default_value_t = 1e-4)]
    growth_tol: f64,
    /// Radius R of a ball containing the domain.
    #[arg(long, default_value_t = 1.0)]
    domain_radius: f64,
    /// Nodes per real axis for the Lipschitz estimate.
    #[arg(long, default_value_t = 41)]
    lipschitz_grid: usize,
    /// CSV of the bound sweep.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn coarse_chain(mut a: CoarseChainArgs) -> Result<Outcome> {
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let w = center_or_origin(&mut a.center, n)?;
    let rule = CmRule::parse(&a.cm)?;
    let mut report = Report::new("coarse-chain", echo(&a));
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut reports = Vec::new();
    let mut failures = 0usize;
    for &m in &a.m {
        for &eps in &a.eps {
            for &delta in &a.delta {
                let c_m = rule.log_c(m).exp();
                let r = coarse_rhs_bound(&phi, m, a.p, &w, eps, delta, c_m, a.grid)?;
                failures += (!r.holds) as usize;
                rows.push(vec![
                    Cell::F(m),
                    Cell::F(a.p),
                    Cell::F(eps),
                    Cell::F(delta),
                    Cell::F(c_m),
                    Cell::F(r.rhs_integral),
                    Cell::F(r.bound),
                    Cell::F(r.log_rhs_integral),
                    Cell::F(r.log_bound),
                    Cell::F(r.inf_phi),
                    Cell::S(r.inf_source.into()),
                    Cell::F(r.pointwise_excess),
                    Cell::B(r.holds),
                ]);
                reports.push(r);
            }
        }
    }
    let mut c = CheckRecord::new("coarse-bound");
    c.value("tuples", rows.len() as f64).le("failures", failures as f64, 0.0);
    timed(&mut report, c, start);

    let start = Instant::now();
    let mut c = CheckRecord::new("constant-growth");
    let mut growth = None;
    if phi.smoothness() >= Smoothness::C0 {
        let ball = DomainBox::ball(Point::origin(n), a.domain_radius)?;
        let lip = lipschitz_estimate(&phi, &ball, a.lipschitz_grid)?;
        let g = coarse_constant_growth(&rule, &a.growth_m, a.p, n, a.domain_radius, &|e| lip * e, a.growth_tol);
        let last = g.rows.last().map_or(f64::NAN, |r| r.log_c_prime_over_m);
        c.value("lipschitz", lip).lt("log_c_prime_over_m_at_largest_m", last, a.growth_tol);
        growth = Some(g);
    } else {
        c.note("skipped: the modulus of continuity requires a continuous field");
    }
    timed(&mut report, c, start);
    report.data = json!({ "rows": reports, "growth": growth });
    let header = [
        "m", "p", "eps", "delta", "c_m", "rhs_integral", "bound", "log_rhs_integral", "log_bound", "inf_phi",
        "inf_source", "pointwise_excess", "holds",
    ];
    Ok(Outcome {
        report,
        csv: Some(csv_bytes(&header, &rows)?),
        out: a.out,
        report_path: a.report,
        extra: Vec::new(),
    })
}

#[derive(Args, Serialize)]
pub struct ExtendArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    /// Cylinder center z0 (default: the origin).
    #[arg(long)]
    center: Option<String>,
    /// `r=<f>,s=<f>,seed=<u64>`; the seed draws the unitary frame.
    #[arg(long, default_value = "r=0.5,s=0.5,seed=0")]
    cylinder: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// Degree of the polynomial class for the best constant (taken in L²).
    #[arg(long, default_value_t = 8)]
    degree: usize,
    /// `one`, `exp:<a as [re, im] pairs>` or `root:<json>`.
    #[arg(long, default_value = "one")]
    candidate: String,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn quadrature(n: usize, budget: &mut Option<usize>) -> QuadratureRule {
    let mut rule = QuadratureRule::default_for(n);
    if let Some(b) = *budget {
        rule = rule.with_budget(b);
    }
    *budget = Some(rule.budget);
    rule
}

pub fn extend(mut a: ExtendArgs) -> Result<Outcome> {
    let spec = CylinderSpec::parse(&a.cylinder)?;
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let z0 = center_or_origin(&mut a.center, n)?;
    let cyl = spec.build(z0.clone())?;
    let rule = quadrature(n, &mut a.budget);
    let f = parse_candidate(&a.candidate, &z0)?;
    let mut report = Report::new("extend", echo(&a));
    let start = Instant::now();
    let r = optimal_extension_margin(&phi, &cyl, &f, a.p, &rule)?;
    let mut c = CheckRecord::new("jensen-chain");
    c.value("lhs", r.lhs)
        .value("rhs", r.rhs)
        .value("margin", r.margin.unwrap_or(f64::NAN))
        .value("residual2", r.chain.residual2)
        .value("conclusion_margin", r.chain.conclusion_margin)
        .ge("residual1", r.chain.residual1, -1e-10);
    timed(&mut report, c, start);
    let start = Instant::now();
    let best = best_extension_constant(&phi, &cyl, a.degree, &rule)?;
    let mut c = CheckRecord::new("best-constant");
    c.value("value", best.value).value("rhs", best.rhs).value("holds", best.holds as u8 as f64);
    timed(&mut report, c, start);
    report.data = json!({ "extension": r, "best": best });
    Ok(Outcome::json(report, a.out))
}

#[derive(Args, Serialize)]
pub struct CoarseExtendArgs {
    #[arg(long)]
    func: String,
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long)]
    center: Option<String>,
    #[arg(long, default_value = "r=0.5,s=0.5,seed=0")]
    cylinder: String,
    #[arg(long, value_delimiter = ',', default_values_t = [1.0, 2.0, 4.0, 8.0, 16.0])]
    m: Vec<f64>,
    /// Rule for C_m: `<c>`, `const:<c>`, `poly:<k>`, `exp:<a>`, `exp_sqrt`.
    #[arg(long, default_value = "const:1")]
    cm_rule: String,
    #[arg(long, default_value_t = 2.0)]
    p: f64,
    /// `one`, `exp:<a>`, `root:<json>`, or `pluriharmonic:<a>` for
    /// `f_m = exp((m/p) Σ a_j (z − z0)_j)`.
    #[arg(long, default_value = "one")]
    candidate: String,
    #[arg(long)]
    budget: Option<usize>,
    /// CSV of the rows.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON report.
    #[arg(long)]
    report: Option<PathBuf>,
}

pub fn coarse_extend(mut a: CoarseExtendArgs) -> Result<Outcome> {
    let spec = CylinderSpec::parse(&a.cylinder)?;
    let phi = corpus(&a.func, &mut a.dim)?;
    let n = phi.dim();
    let z0 = center_or_origin(&mut a.center, n)?;
    let cyl = spec.build(z0.clone())?;
    let rule = quadrature(n, &mut a.budget);
    let cm = CmRule::parse(&a.cm_rule)?;
    let p = a.p;
    let candidate: Box<dyn Fn(f64) -> pshlab::Result<HolomorphicCandidate>> = match a.candidate.split_once(':') {
        Some(("pluriharmonic", coeffs)) => {
            let coeffs: Vec<C64> = parse_point(coeffs)?.coords().to_vec();
            let z = z0.clone();
            Box::new(move |m| HolomorphicCandidate::pluriharmonic_witness(&z, &coeffs, m, p))
        }
        _ => {
            let f = parse_candidate(&a.candidate, &z0)?;
            Box::new(move |_| Ok(f.clone()))
        }
    };
    let mut report = Report::new("coarse-extend", echo(&a));
    let start = Instant::now();
    let rows = coarse_extension_sweep(&phi, &cyl, &cm, &a.m, p, candidate.as_ref(), &rule)?;
    let mut c = CheckRecord::new("coarse-extension");
    c.value("rows", rows.len() as f64)
        .le("rows_with_b_above_b_tilde", rows.iter().filter(|r| !r.holds).count() as f64, 0.0);
    timed(&mut report, c, start);
    let table: Vec<Vec<Cell>> = rows
        .iter()
        .map(|r| {
            vec![
                Cell::F(r.m),
                Cell::F(r.log_c_m),
                Cell::F(r.b_m),
                Cell::F(r.b_tilde),
                Cell::F(r.mean_phi),
                Cell::B(r.holds),
            ]
        })
        .collect();
    report.data = json!({ "rows": rows, "cylinder_volume": cyl.volume() });
    Ok(Outcome {
        report,
        csv: Some(csv_bytes(&["m", "log_c_m", "b_m", "b_tilde", "mean_phi", "holds"], &table)?),
        out: a.out,
        report_path: a.report,
        extra: Vec::new(),
    })
}

#[derive(Args, Serialize)]
pub struct DbarArgs {
    /// Weight φ (corpus id, n = 1).
    #[arg(long)]
    weight: String,
    /// Strictly subharmonic ψ: corpus id or `psi_s:<s>`.
    #[arg(long, default_value = "sq_norm")]
    psi: String,
    /// Right-hand side: `dbar_bump`, `dbar_nu`, `bump_const`, `bump_zbar2`.
    #[arg(long, default_value = "dbar_bump")]
    rhs: String,
    /// Nodes per real axis.
    #[arg(long, default_value_t = 256)]
    grid: usize,
    /// Degree of the polynomial subspace for the projection.
    #[arg(long, default_value_t = 10)]
    degree: usize,
    #[arg(long, default_value = "ball:1")]
    domain: String,
    /// Radius r of the witness construction used by `psi_s` and `dbar_nu`.
    #[arg(long, default_value_t = 0.5)]
    witness_r: f64,
    /// The estimate check accepts ratio ≤ 1 + tol.
    #[arg(long, default_value_t = 0.02)]
    tol: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn dbar(a: DbarArgs) -> Result<Outcome> {
    let phi = parse_field(&a.weight, 1)?;
    let domain = parse_region(&a.domain, 1)?;
    let z0 = Point::origin(1);
    let psi: Box<dyn ScalarField> = match a.psi.split_once(':') {
        Some(("psi_s", s)) => {
            let s: f64 = s
                .trim()
                .parse()
                .map_err(|e| anyhow::anyhow!("parse error in psi.psi_s: '{s}': {e}"))?;
            Box::new(build_psi_s(&z0, a.witness_r, s)?)
        }
        _ => Box::new(parse_field(&a.psi, 1)?),
    };
    let rhs: Box<dyn FormField01> = if a.rhs == "dbar_nu" {
        let chi = make_cutoff(CutoffKind::Thm21);
        Box::new(build_witness_form(&z0, &[C64::new(1.0, 0.0)], a.witness_r, chi)?.1)
    } else {
        parse_form(&a.rhs, 1)?
    };
    let mut report = Report::new("dbar", echo(&a));
    let start = Instant::now();
    let r = hormander_ratio(&phi, psi.as_ref(), rhs.as_ref(), a.degree, a.grid, &domain)?;
    let mut c = CheckRecord::new("estimate");
    c.value("minimal_norm_sq", r.minimal_norm_sq)
        .value("comparison", r.comparison)
        .value("relative_residual", r.relative_residual)
        .value("orthogonality", r.projection.orthogonality)
        .le("ratio", r.ratio, 1.0 + a.tol);
    timed(&mut report, c, start);
    report.data = serde_json::to_value(&r)?;
    Ok(Outcome::json(report, a.out))
}

#[derive(Args, Serialize)]
pub struct AcceptArgs {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value = "acceptance.json")]
    out: PathBuf,
}

pub fn accept(a: AcceptArgs) -> Result<Outcome> {
    let mut report = acceptance_suite(a.seed);
    if let Value::Object(map) = &mut report.config {
        map.insert("out".into(), json!(a.out));
    }
    for c in &report.checks {
        println!(
            "{} {:<20} {:>8.2} s",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            report.wall_seconds[&c.name]
        );
    }
    Ok(Outcome::json(report, Some(a.out)))
}

use crate::config::{Command, ConfigError, RunConfig};
use crate::json::{fmt_f64, to_json};
use crate::report::{Check, Metadata, Relation, Report};
use lane_emden_spectra::constants::{build_constants, ConstantsError, ConstantsTable};
use lane_emden_spectra::green::{
    grad_checks, robin_identities_check, GradCheckReport, GreenError, OracleSpec, RobinReport,
};
use lane_emden_spectra::radial_lab::{sweep_with, LabError, SweepOptions, SweepReport, SweepSolve};
use lane_emden_spectra::reduction::{
    analyze, ball_center_configuration, Configuration, ReductionError, ReductionReport,
    STATIONARITY_TOL,
};
use serde::Serialize;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};
use thiserror::Error;

/// Environment variable naming the output directory when the config has none.
pub const OUT_DIR_ENV: &str = "LESPEC_OUT_DIR";
pub const DEFAULT_OUT_DIR: &str = "lespec-out";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Constants(#[from] ConstantsError),
    #[error(transparent)]
    Green(#[from] GreenError),
    #[error(transparent)]
    Reduction(#[from] ReductionError),
    #[error(transparent)]
    Lab(#[from] LabError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    /// Module that raised the error.
    pub fn kind(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Constants(_) => "constants",
            RunError::Green(_) => "green",
            RunError::Reduction(_) => "reduction",
            RunError::Lab(_) => "radial_lab",
            RunError::Io { .. } => "io",
        }
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Body<'a> {
            kind: &'a str,
            message: String,
        }
        #[derive(Serialize)]
        struct Wrapper<'a> {
            error: Body<'a>,
        }
        to_json(&Wrapper {
            error: Body {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("error body serializes")
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> RunError + '_ {
    move |source| RunError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Config's `out`, else `$LESPEC_OUT_DIR`, else `lespec-out`.
pub fn output_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub passed: bool,
    pub failed_checks: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl RunOutcome {
    pub fn summary(&self, cmd: Command) -> String {
        let status = if self.passed { "PASS" } else { "FAIL" };
        let mut s = format!("{cmd}: {status}");
        if !self.failed_checks.is_empty() {
            s.push_str(&format!(" (failed: {})", self.failed_checks.join(", ")));
        }
        for f in &self.files {
            s.push_str(&format!("\n  wrote {}", f.display()));
        }
        s
    }
}

struct Output {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Output {
    fn write(&mut self, name: &str, contents: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, contents).map_err(io_err(&path))?;
        self.files.push(path);
        Ok(())
    }

    fn json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<(), RunError> {
        let text = to_json(value).map_err(|e| RunError::Io {
            path: self.dir.join(name),
            source: io::Error::other(e),
        })?;
        self.write(name, text.as_bytes())
    }
}

/// Runs one subcommand and writes its report, data files and a separate
/// metadata file. `passed` is true iff every check passed.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, RunError> {
    cfg.validate()?;
    let started = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let dir = output_dir(cfg);
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let mut out = Output {
        dir: dir.clone(),
        files: Vec::new(),
    };
    let name = cfg.subcommand.name();
    let checks = match cfg.subcommand {
        Command::Constants => {
            let (checks, table) = constants_stage(cfg)?;
            emit(&mut out, name, cfg, checks, table)?
        }
        Command::GreenCheck => {
            let (checks, result) = green_stage(cfg, &cfg.points)?;
            emit(&mut out, name, cfg, checks, result)?
        }
        Command::Reduce => {
            let (checks, result) = reduce_stage(cfg, false)?;
            emit(&mut out, name, cfg, checks, result)?
        }
        Command::RadialLab => {
            let (checks, result) = radial_stage(cfg, Some(&mut out))?;
            emit(&mut out, name, cfg, checks, result)?
        }
        Command::VerifyAll => {
            let summary = verify_all(cfg);
            let checks = summary
                .stages
                .iter()
                .flat_map(|s| {
                    let mut c: Vec<Check> = s
                        .checks
                        .iter()
                        .map(|c| Check {
                            name: format!("{}.{}", s.stage, c.name),
                            ..c.clone()
                        })
                        .collect();
                    if s.error.is_some() {
                        c.push(Check::none(format!("{}.error", s.stage), 1));
                    }
                    c
                })
                .collect();
            emit(&mut out, name, cfg, checks, summary)?
        }
    };
    let failed_checks: Vec<String> = checks
        .iter()
        .filter(|c| !c.passed)
        .map(|c| c.name.clone())
        .collect();
    let passed = failed_checks.is_empty();
    let meta = Metadata {
        tool: "lespec",
        version: env!("CARGO_PKG_VERSION"),
        subcommand: name.to_string(),
        started_unix_seconds: started,
        elapsed_seconds: clock.elapsed().as_secs_f64(),
        passed,
        files: out
            .files
            .iter()
            .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
            .collect(),
    };
    out.json(&format!("{name}.meta.json"), &meta)?;
    Ok(RunOutcome {
        passed,
        failed_checks,
        files: out.files,
    })
}

fn emit<T: Serialize>(
    out: &mut Output,
    name: &str,
    cfg: &RunConfig,
    checks: Vec<Check>,
    result: T,
) -> Result<Vec<Check>, RunError> {
    let report = Report::new(cfg.clone(), checks, result);
    out.json(&format!("{name}.json"), &report)?;
    Ok(report.checks)
}

fn constants_stage(cfg: &RunConfig) -> Result<(Vec<Check>, ConstantsTable), RunError> {
    let t = build_constants(cfg.n)?;
    let worst = t
        .dual_evaluations
        .iter()
        .map(|d| d.relative_difference)
        .fold(0.0, f64::max);
    let checks = vec![
        Check::at_most("dual_evaluation", worst, cfg.tolerances.dual),
        Check::none("nonpositive_constants", usize::from(!t.all_positive())),
    ];
    Ok((checks, t))
}

#[derive(Debug, Clone, Serialize)]
pub struct GreenResult {
    pub oracle: OracleSpec,
    pub order: usize,
    pub robin: Vec<RobinReport>,
    /// Derivative checks at each point paired with a companion point.
    pub derivatives: GradCheckReport,
}

/// A second point for the derivative checks: the reflection of `p` halfway
/// through the center, or a fixed offset when `p` is near the center.
fn companion(p: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    let d: f64 = p
        .iter()
        .zip(center)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    if d > 0.1 * radius {
        p.iter()
            .zip(center)
            .map(|(a, c)| c - 0.5 * (a - c))
            .collect()
    } else {
        let mut q = center.to_vec();
        q[0] += 0.4 * radius;
        q
    }
}

fn green_stage(
    cfg: &RunConfig,
    points: &[Vec<f64>],
) -> Result<(Vec<Check>, GreenResult), RunError> {
    if points.is_empty() {
        return Err(ConfigError::Invalid {
            key: "points".into(),
            message: "green-check needs at least one point".into(),
        }
        .into());
    }
    let oracle = cfg.oracle.build(cfg.n)?;
    let tol = &cfg.tolerances;
    let ball = oracle.domain();
    let mut checks = Vec::new();
    let mut robin = Vec::new();
    for (i, p) in points.iter().enumerate() {
        let rep = robin_identities_check(oracle.as_ref(), p, tol.robin_order)?;
        checks.push(Check::at_most(
            format!("robin[{i}]"),
            rep.max_residual(),
            tol.robin,
        ));
        robin.push(rep);
    }
    let samples: Vec<(Vec<f64>, Vec<f64>)> = points
        .iter()
        .map(|p| (p.clone(), companion(p, &ball.center, ball.radius)))
        .collect();
    let derivatives = grad_checks(oracle.as_ref(), &samples);
    checks.push(Check::at_most(
        "derivatives",
        derivatives.worst(),
        tol.derivatives,
    ));
    Ok((
        checks,
        GreenResult {
            oracle: cfg.oracle.clone(),
            order: tol.robin_order,
            robin,
            derivatives,
        },
    ))
}

/// Interior sample points used when a run names none: the center, a point
/// on the first axis and an off-axis point, in unit-ball coordinates.
pub fn default_points(n: usize, oracle: &OracleSpec) -> Vec<Vec<f64>> {
    let mixed = [0.1, -0.4, 0.25, 0.05, -0.1];
    let unit = vec![
        vec![0.0; n],
        (0..n).map(|k| if k == 0 { 0.3 } else { 0.0 }).collect(),
        mixed[..n].to_vec(),
    ];
    match oracle {
        OracleSpec::UnitBall {} => unit,
        OracleSpec::ScaledBall { center, radius } => unit
            .into_iter()
            .map(|p| p.iter().zip(center).map(|(x, c)| c + radius * x).collect())
            .collect(),
    }
}

fn reduce_stage(
    cfg: &RunConfig,
    ball_center: bool,
) -> Result<(Vec<Check>, ReductionReport), RunError> {
    let oracle = cfg.oracle.build(cfg.n)?;
    let table = build_constants(cfg.n)?;
    let conf = if ball_center || cfg.lambdas.is_empty() {
        ball_center_configuration(oracle.as_ref(), &table)
    } else {
        Configuration::new(cfg.n, cfg.lambdas.clone(), cfg.points.clone())
    };
    let rep = analyze(&conf, oracle.as_ref(), &table, None)?;
    let tol = &cfg.tolerances;
    let mat = &rep.matrices;
    let checks = vec![
        Check::at_most("stationarity", mat.stationarity, STATIONARITY_TOL),
        Check::at_most("q_asymmetry", mat.q_asymmetry, tol.matrix_symmetry),
        Check::at_most(
            "a2_path_difference",
            mat.a2_path_difference,
            tol.matrix_symmetry * mat.A2.frobenius().max(1.0),
        ),
        Check::new(
            "m1_min_eigenvalue",
            rep.m1_min_eigenvalue,
            Relation::Above,
            0.0,
        ),
        Check::new(
            "m2_min_eigenvalue",
            rep.m2_min_eigenvalue,
            Relation::AtLeast,
            -tol.m2_floor * mat.M2.frobenius(),
        ),
    ];
    Ok((checks, rep))
}

fn sweep_options(cfg: &RunConfig) -> SweepOptions {
    let mut opts = SweepOptions::new(cfg.n, cfg.epsilons.clone());
    opts.core_count = cfg.core_count;
    opts.outer_count = cfg.outer_count;
    opts.levels = cfg.levels;
    opts
}

fn csv_bytes(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory CSV write");
    for row in rows {
        w.write_record(&row).expect("in-memory CSV write");
    }
    w.into_inner().expect("in-memory CSV flush")
}

/// Nodal solution and the three band eigenvectors on the finest mesh.
fn profile_csv(s: &SweepSolve) -> Vec<u8> {
    let sol = &s.finest;
    let column = |v: Option<&Vec<f64>>, i: usize| {
        v.and_then(|v| v.get(i))
            .map(|x| fmt_f64(*x))
            .unwrap_or_default()
    };
    let (b1, b2, b3) = (
        s.l0.eigenvectors.first(),
        s.l1.eigenvectors.first(),
        s.l0.eigenvectors.get(1),
    );
    csv_bytes(
        &["r", "u", "band1", "band2", "band3"],
        sol.mesh.nodes.iter().enumerate().map(|(i, r)| {
            vec![
                fmt_f64(*r),
                fmt_f64(sol.u[i]),
                column(b1, i),
                column(b2, i),
                column(b3, i),
            ]
        }),
    )
}

fn sweep_csv(report: &SweepReport) -> Vec<u8> {
    csv_bytes(
        &[
            "epsilon",
            "lambda_hat",
            "mu1",
            "mu_l1",
            "mu_last",
            "mu_l2",
            "morse_count",
        ],
        report.points.iter().map(|p| {
            vec![
                fmt_f64(p.epsilon),
                fmt_f64(p.lambda_hat),
                fmt_f64(p.mu.mu1),
                fmt_f64(p.mu.mu_l1),
                fmt_f64(p.mu.mu_last),
                fmt_f64(p.mu.mu_l2),
                p.morse_count.to_string(),
            ]
        }),
    )
}

fn radial_stage(
    cfg: &RunConfig,
    mut out: Option<&mut Output>,
) -> Result<(Vec<Check>, SweepReport), RunError> {
    let table = build_constants(cfg.n)?;
    let mut write_error = None;
    let report = sweep_with(&sweep_options(cfg), &table, |s| {
        if let (Some(out), None) = (out.as_deref_mut(), &write_error) {
            let name = format!("radial-lab-eps-{}.csv", s.point.epsilon);
            if let Err(e) = out.write(&name, &profile_csv(s)) {
                write_error = Some(e);
            }
        }
    })?;
    if let Some(e) = write_error {
        return Err(e);
    }
    if let Some(out) = out {
        out.write("radial-lab-sweep.csv", &sweep_csv(&report))?;
    }
    Ok((radial_checks(cfg, &report), report))
}

fn radial_checks(cfg: &RunConfig, report: &SweepReport) -> Vec<Check> {
    let tol = &cfg.tolerances;
    let pts = &report.points;
    let mut checks = vec![
        Check::none("failed_epsilons", report.errors.len()),
        Check::none(
            "band_ordering",
            pts.iter().filter(|p| !p.ordering_ok).count(),
        ),
    ];
    if let Some(idx) = report.predicted.morse_index {
        checks.push(Check::none(
            "morse_count_vs_reduction",
            pts.iter().filter(|p| p.morse_count != idx).count(),
        ));
    }
    if let Some(a) = &report.first_band {
        checks.push(Check::at_most(
            "first_band.intercept",
            a.intercept.relative_deviation,
            tol.first_band_intercept,
        ));
        checks.push(Check::at_most(
            "first_band.slope",
            a.slope.relative_deviation,
            tol.first_band_slope,
        ));
    }
    if let Some(b) = &report.middle_band {
        // for n = 3 the deviation sits below eigenvalue accuracy; only its sign is checked
        if cfg.n >= 4 {
            checks.push(Check::at_most(
                "middle_band.limit",
                b.target.relative_deviation,
                tol.middle_band,
            ));
        }
        checks.push(Check::none(
            "middle_band.nonpositive",
            b.s.iter().filter(|&&s| !(s > 0.0)).count(),
        ));
    }
    if let Some(c) = &report.last_band {
        checks.push(Check::at_most(
            "last_band.slope",
            c.slope.relative_deviation,
            tol.last_band_slope,
        ));
    }
    checks
}

#[derive(Debug, Clone, Serialize)]
pub struct StageSummary {
    pub stage: &'static str,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub stages: Vec<StageSummary>,
}

fn stage<T>(name: &'static str, r: Result<(Vec<Check>, T), RunError>) -> StageSummary {
    match r {
        Ok((checks, _)) => StageSummary {
            stage: name,
            passed: checks.iter().all(|c| c.passed),
            checks,
            error: None,
        },
        Err(e) => StageSummary {
            stage: name,
            passed: false,
            checks: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

/// constants, green-check, reduce (one bubble at the ball center) and
/// radial-lab in sequence; a failing stage does not stop the later ones.
fn verify_all(cfg: &RunConfig) -> VerifySummary {
    let points = if cfg.points.is_empty() {
        default_points(cfg.n, &cfg.oracle)
    } else {
        cfg.points.clone()
    };
    // the radial lab is posed on the unit ball whatever the oracle
    let mut unit = cfg.clone();
    unit.oracle = OracleSpec::UnitBall {};
    VerifySummary {
        stages: vec![
            stage("constants", constants_stage(cfg)),
            stage("green-check", green_stage(cfg, &points)),
            stage("reduce", reduce_stage(cfg, true)),
            stage("radial-lab", radial_stage(&unit, None)),
        ],
    }
}

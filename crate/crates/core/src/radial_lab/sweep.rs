use super::checks::{
    eigenfunction_profiles, outer_limits_check, solution_decay, OuterReport, ProfileReport,
};
use super::mesh::RadialMesh;
use super::sector::{assemble_bands, sector_eigen, AssembledBands};
use super::solve::{
    continuation_guess, default_core_width, lambda0, solve_default, solve_radial, RadialSolution,
};
use super::LabError;
use crate::bubbles::ProblemParams;
use crate::constants::ConstantsTable;
use crate::green::{gamma_n, UnitBallOracle};
use crate::numerics::{fit_affine, AffineFit};
use crate::reduction::{analyze, ball_center_configuration};
use serde::{Deserialize, Serialize};

/// Default ε list of the n = 4 sweep.
pub const DEFAULT_EPSILONS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];
/// Default cap of the decay diagnostic.
pub const DEFAULT_DECAY_CAP: f64 = 2.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    pub n: usize,
    pub epsilons: Vec<f64>,
    pub core_count: usize,
    pub outer_count: usize,
    /// Nested mesh levels `1, 2, 4, …` combined by Richardson extrapolation.
    pub levels: usize,
    pub decay_cap: f64,
}

impl SweepOptions {
    pub fn new(n: usize, epsilons: Vec<f64>) -> Self {
        SweepOptions {
            n,
            epsilons,
            core_count: 400,
            outer_count: 400,
            levels: 3,
            decay_cap: DEFAULT_DECAY_CAP,
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        if self.epsilons.is_empty() {
            return Err(LabError::Sweep("epsilons is empty".into()));
        }
        if self.epsilons.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(LabError::Sweep(
                "epsilons must be strictly decreasing".into(),
            ));
        }
        if !(1..=4).contains(&self.levels) {
            return Err(LabError::Sweep(format!(
                "levels must lie in 1..=4, got {}",
                self.levels
            )));
        }
        Ok(())
    }
}

/// Lowest values of each tracked sector eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandValues {
    pub mu1: f64,
    pub mu_l1: f64,
    pub mu_last: f64,
    pub mu_l2: f64,
}

impl BandValues {
    fn of(b: &AssembledBands) -> Self {
        BandValues {
            mu1: b.mu1(),
            mu_l1: b.mu_l1(),
            mu_last: b.mu_last(),
            mu_l2: b.l2_ground,
        }
    }

    fn map2(a: &Self, b: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        BandValues {
            mu1: f(a.mu1, b.mu1),
            mu_l1: f(a.mu_l1, b.mu_l1),
            mu_last: f(a.mu_last, b.mu_last),
            mu_l2: f(a.mu_l2, b.mu_l2),
        }
    }
}

/// Repeated Richardson elimination of `h², h⁴, …` over levels refined by 2.
pub fn richardson(levels: &[f64]) -> f64 {
    let mut row = levels.to_vec();
    let mut factor = 4.0;
    while row.len() > 1 {
        row = row
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        factor *= 4.0;
    }
    row[0]
}

fn richardson_bands(levels: &[BandValues]) -> BandValues {
    let pick = |f: fn(&BandValues) -> f64| richardson(&levels.iter().map(f).collect::<Vec<_>>());
    BandValues {
        mu1: pick(|b| b.mu1),
        mu_l1: pick(|b| b.mu_l1),
        mu_last: pick(|b| b.mu_last),
        mu_l2: pick(|b| b.mu_l2),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub epsilon: f64,
    pub lambda_hat: f64,
    pub amplitude_hat: f64,
    pub newton_residual: f64,
    pub decreasing_beyond_core: bool,
    /// Extrapolated band values.
    pub mu: BandValues,
    /// Raw values per mesh level, coarsest first.
    pub levels: Vec<BandValues>,
    /// Largest change between the two finest levels.
    pub refinement_change: BandValues,
    pub morse_count: usize,
    pub ordering_ok: bool,
    pub anomalies: Vec<String>,
    pub decay_c: f64,
    pub profiles: ProfileReport,
    pub outer: OuterReport,
}

/// Result of a single ε together with the finest solution.
#[derive(Debug, Clone)]
pub struct SweepSolve {
    pub point: SweepPoint,
    pub finest: RadialSolution,
    pub bands: AssembledBands,
    pub l0: super::SectorSpectrum,
    pub l1: super::SectorSpectrum,
}

/// One measured quantity against its predicted value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LawComparison {
    pub measured: f64,
    pub predicted: f64,
    pub relative_deviation: f64,
}

impl LawComparison {
    pub fn new(measured: f64, predicted: f64) -> Self {
        LawComparison {
            measured,
            predicted,
            relative_deviation: (measured - predicted).abs() / predicted.abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstBandLaw {
    pub fit: AffineFit,
    pub intercept: LawComparison,
    pub slope: LawComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiddleBandLaw {
    /// `s(ε) = (1 - μ_{l=1})/ε^{n/(n-2)}` per sweep point.
    pub s: Vec<f64>,
    /// Affine extrapolation to ε = 0 from the two smallest ε.
    pub extrapolated: f64,
    /// Spread of the last three `s` values.
    pub uncertainty: f64,
    /// Against `c0 ρ²` with `ρ²` from the matrix pipeline.
    pub pipeline: LawComparison,
    /// Against `c0 (n-2) γ_n λ0ⁿ`.
    pub target: LawComparison,
    pub positive: bool,
    pub decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LastBandLaw {
    pub fit: AffineFit,
    pub slope: LawComparison,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Predicted {
    pub lambda0: f64,
    pub rho1: f64,
    pub rho2: f64,
    pub rho3: f64,
    pub morse_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub options: SweepOptions,
    pub epsilons: Vec<f64>,
    pub points: Vec<SweepPoint>,
    pub predicted: Predicted,
    /// Law (a); needs two points.
    pub first_band: Option<FirstBandLaw>,
    /// Law (b); needs two points.
    pub middle_band: Option<MiddleBandLaw>,
    /// Law (c); needs two points.
    pub last_band: Option<LastBandLaw>,
    /// Failures for ε values that could not be processed.
    pub errors: Vec<(f64, String)>,
}

fn solve_levels(
    params: &ProblemParams,
    table: &ConstantsTable,
    opts: &SweepOptions,
    prev: Option<&RadialSolution>,
) -> Result<SweepSolve, LabError> {
    let n = params.n;
    let coarse = RadialMesh::graded(
        default_core_width(params, table),
        opts.core_count,
        opts.outer_count,
    )?;
    let mut sol = match prev {
        Some(p) => solve_radial(params, &coarse, &continuation_guess(p, params, &coarse))?,
        None => solve_default(params, &coarse, table)?,
    };
    let mut levels = Vec::with_capacity(opts.levels);
    let mut last = None;
    for k in 0..opts.levels {
        if k > 0 {
            let mesh = coarse.refined(1 << k)?;
            let g: Vec<f64> = mesh.nodes.iter().map(|&r| sol.at(r)).collect();
            sol = solve_radial(params, &mesh, &g)?;
        }
        let l0 = sector_eigen(&sol, 0, 2)?;
        let l1 = sector_eigen(&sol, 1, 1)?;
        let l2 = sector_eigen(&sol, 2, 1)?;
        let bands = assemble_bands(n, &l0, &l1, &l2)?;
        levels.push(BandValues::of(&bands));
        last = Some((l0, l1, bands));
    }
    let (l0, l1, bands) = last.expect("at least one level");
    let mu = richardson_bands(&levels);
    let refinement_change = if levels.len() > 1 {
        BandValues::map2(
            &levels[levels.len() - 1],
            &levels[levels.len() - 2],
            |a, b| (a - b).abs(),
        )
    } else {
        BandValues::map2(&levels[0], &levels[0], |_, _| f64::NAN)
    };
    let point = SweepPoint {
        epsilon: params.epsilon,
        lambda_hat: sol.lambda_hat,
        amplitude_hat: sol.amplitude_hat,
        newton_residual: sol.newton_residual,
        decreasing_beyond_core: sol.decreasing_beyond_core,
        mu,
        levels,
        refinement_change,
        morse_count: bands.morse_count,
        ordering_ok: bands.ordering_ok,
        anomalies: bands.anomalies.clone(),
        decay_c: solution_decay(&sol, opts.decay_cap).c_estimate,
        profiles: eigenfunction_profiles(&sol, &l0, &l1),
        outer: outer_limits_check(&sol, &l0, &l1, table),
    };
    Ok(SweepSolve {
        point,
        finest: sol,
        bands,
        l0,
        l1,
    })
}

/// Solves a single ε on the option's mesh policy, from the projected bubble
/// or by continuation from `prev`.
pub fn sweep_point(
    opts: &SweepOptions,
    table: &ConstantsTable,
    epsilon: f64,
    prev: Option<&RadialSolution>,
) -> Result<SweepSolve, LabError> {
    let params = ProblemParams::new(opts.n, epsilon).map_err(|e| LabError::Sweep(e.to_string()))?;
    solve_levels(&params, table, opts, prev)
}

/// Matrix-pipeline data for one bubble at the center of the unit ball.
pub fn predicted(table: &ConstantsTable) -> Result<Predicted, LabError> {
    let oracle = UnitBallOracle::new(table.n);
    let cfg = ball_center_configuration(&oracle, table);
    let rep = analyze(&cfg, &oracle, table, None).map_err(|e| LabError::Sweep(e.to_string()))?;
    Ok(Predicted {
        lambda0: cfg.lambdas[0],
        rho1: rep.spectra.rho1.values[0],
        rho2: rep.spectra.rho2.values[0],
        rho3: rep.spectra.rho3.values[0],
        morse_index: rep.morse.exact,
    })
}

/// Runs the sweep with continuation in the order given; a failed ε is
/// recorded and the next one restarts from the projected bubble.
pub fn sweep(opts: &SweepOptions, table: &ConstantsTable) -> Result<SweepReport, LabError> {
    sweep_with(opts, table, |_| {})
}

/// [`sweep`], handing every solved ε to `visit` before its solution is
/// dropped.
pub fn sweep_with<F: FnMut(&SweepSolve)>(
    opts: &SweepOptions,
    table: &ConstantsTable,
    mut visit: F,
) -> Result<SweepReport, LabError> {
    opts.validate()?;
    if table.n != opts.n {
        return Err(LabError::Sweep(format!(
            "table is for n = {}, options for n = {}",
            table.n, opts.n
        )));
    }
    let pred = predicted(table)?;
    let mut points = Vec::new();
    let mut errors = Vec::new();
    let mut prev: Option<RadialSolution> = None;
    for &eps in &opts.epsilons {
        match sweep_point(opts, table, eps, prev.as_ref()) {
            Ok(s) => {
                visit(&s);
                points.push(s.point);
                prev = Some(s.finest);
            }
            Err(e) => {
                errors.push((eps, e.to_string()));
                prev = None;
            }
        }
    }
    let laws = laws(opts.n, table, &pred, &points);
    Ok(SweepReport {
        options: opts.clone(),
        epsilons: opts.epsilons.clone(),
        points,
        predicted: pred,
        first_band: laws.0,
        middle_band: laws.1,
        last_band: laws.2,
        errors,
    })
}

type Laws = (
    Option<FirstBandLaw>,
    Option<MiddleBandLaw>,
    Option<LastBandLaw>,
);

/// Laws (a), (b), (c) from measured sweep points.
pub fn laws(n: usize, table: &ConstantsTable, pred: &Predicted, points: &[SweepPoint]) -> Laws {
    if points.len() < 2 {
        return (None, None, None);
    }
    let nf = n as f64;
    let a: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.mu.mu1)).collect();
    let first = fit_affine(&a).ok().map(|fit| FirstBandLaw {
        intercept: LawComparison::new(fit.intercept, 1.0 / table.p),
        slope: LawComparison::new(fit.slope, crate::constants::b1(table, pred.rho1)),
        fit,
    });

    let s: Vec<f64> = points
        .iter()
        .map(|p| (1.0 - p.mu.mu_l1) / p.epsilon.powf(nf / (nf - 2.0)))
        .collect();
    let k = points.len();
    let (e1, e2) = (points[k - 2].epsilon, points[k - 1].epsilon);
    let extrapolated = s[k - 1] - (s[k - 1] - s[k - 2]) / (e2 - e1) * e2;
    let tail = &s[k.saturating_sub(3)..];
    let uncertainty = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let target = table.c0_spec * (nf - 2.0) * gamma_n(n) * lambda0(table).powf(nf);
    let middle = Some(MiddleBandLaw {
        pipeline: LawComparison::new(extrapolated, table.c0_spec * pred.rho2),
        target: LawComparison::new(extrapolated, target),
        positive: s.iter().all(|v| *v > 0.0),
        decreasing: s.windows(2).all(|w| w[1] < w[0]),
        s,
        extrapolated,
        uncertainty,
    });

    let c: Vec<(f64, f64)> = points.iter().map(|p| (p.epsilon, p.mu.mu_last)).collect();
    let last = fit_affine(&c).ok().map(|fit| LastBandLaw {
        slope: LawComparison::new(fit.slope, table.c1_spec * pred.rho3),
        fit,
    });
    (first, middle, last)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_removes_quadratic_and_quartic_terms() {
        let f = |h: f64| 2.0 + 3.0 * h * h - 5.0 * h.powi(4);
        let v = [f(0.1), f(0.05), f(0.025)];
        assert!((richardson(&v) - 2.0).abs() < 1e-13);
        assert_eq!(richardson(&[1.5]), 1.5);
    }

    #[test]
    fn options_validation() {
        assert!(SweepOptions::new(4, vec![0.1, 0.05]).validate().is_ok());
        assert!(SweepOptions::new(4, vec![0.05, 0.1]).validate().is_err());
        assert!(SweepOptions::new(4, vec![]).validate().is_err());
    }
}

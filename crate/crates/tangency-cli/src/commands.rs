//! Subcommand implementations.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use tangency_core::dist::{
    involutivity_defect, lie_bracket, noninvolutivity_certificate, tangency_check,
    DistributionField, DEFECT_TOL,
};
use tangency_core::geom::{BoxDomain, CantorScaffold, DeepPoint};
use tangency_core::lusin::{GradientDatum, LusinFunction};
use tangency_core::phase::{classify, figure_grid, Q};
use tangency_core::rng::substream;
use tangency_core::seminorm::{
    box_dimension_estimate, fractional_seminorm, holder_estimate, superdensity_profile,
    FieldSampler, SampleDomain,
};
use tangency_core::stokes::{
    circulation, curl_flux, escape_scan_exact, escape_scan_sampling, locality_witness,
    stokes_residual, EscapeContext, OneForm, RectangleProbe,
};

use crate::config::RunConfig;
use crate::error::{CliError, Result};
use crate::io::{csv_document, emit, fmt_f64, json_document};
use crate::spec::{
    datum_for, load_distribution, parse_domain, parse_levels, LusinFile, ScaffoldFile, ScheduleSpec,
};

/// Flags shared by every scaffold-backed command.
#[derive(Debug, Args, Clone, Default)]
pub struct ScaffoldArgs {
    /// Scaffold document to load.
    #[arg(long)]
    pub scaffold: Option<PathBuf>,
    /// Gap-schedule regime: sobolev | dimension | extremal | gapless.
    #[arg(long)]
    pub regime: Option<String>,
    /// Base dimension k.
    #[arg(long)]
    pub k: Option<usize>,
    /// Branching exponent: each cube splits into 2^B children per axis.
    #[arg(long = "B")]
    pub b: Option<u32>,
    /// Base mesh (root-cube spacing).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Regime parameter: s for sobolev, d for dimension.
    #[arg(long)]
    pub param: Option<f64>,
    /// Construction depth.
    #[arg(long)]
    pub depth: Option<usize>,
    /// Per-axis intervals, e.g. `0:1,0:1` (defaults to the unit cube).
    #[arg(long)]
    pub domain: Option<String>,
}

impl ScaffoldArgs {
    pub fn resolve(&self, cfg: &RunConfig) -> Result<CantorScaffold> {
        if let Some(path) = self
            .scaffold
            .clone()
            .or(cfg.scaffold.clone().map(PathBuf::from))
        {
            let file = ScaffoldFile::load(&path)?;
            return file.build();
        }
        let regime = self
            .regime
            .clone()
            .or(cfg.regime.clone())
            .ok_or_else(|| CliError::schema("missing --regime (or --scaffold)"))?;
        let k = self
            .k
            .or(cfg.k)
            .ok_or_else(|| CliError::schema("missing --k"))?;
        let b = self
            .b
            .or(cfg.b)
            .ok_or_else(|| CliError::schema("missing --B"))?;
        let delta = self
            .delta
            .or(cfg.delta)
            .ok_or_else(|| CliError::schema("missing --delta"))?;
        let param = self.param.or(cfg.param).unwrap_or(0.0);
        let depth = self
            .depth
            .or(cfg.depth)
            .ok_or_else(|| CliError::schema("missing --depth"))?;
        let spec = ScheduleSpec {
            regime,
            k,
            b,
            delta,
            param,
        };
        let schedule = spec.build()?;
        let domain = match self.domain.clone().or(cfg.domain.clone()) {
            Some(text) => parse_domain(&text, k)?,
            None => BoxDomain::unit(k),
        };
        Ok(CantorScaffold::build(domain, schedule, depth)?)
    }

    pub fn depth_or(&self, cfg: &RunConfig, fallback: usize) -> usize {
        self.depth.or(cfg.depth).unwrap_or(fallback)
    }
}

fn out_path(flag: &Option<PathBuf>, cfg: &RunConfig) -> Option<PathBuf> {
    flag.clone().or(cfg.out.clone().map(PathBuf::from))
}

// ---------------------------------------------------------------- build

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Scaffold document destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl BuildArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "build")?;
        let sc = self.scaffold.resolve(&cfg)?;
        let file = ScaffoldFile::from_scaffold(&sc);
        // Closed-form measure table on stdout.
        let rows: Vec<Vec<String>> = sc
            .level_table()
            .into_iter()
            .map(|(l, r, m)| vec![l.to_string(), fmt_f64(r), fmt_f64(m)])
            .collect();
        emit(None, &csv_document(&["level", "r", "measure"], &rows))?;
        if let Some(path) = out_path(&self.out, &cfg) {
            emit(Some(&path), &json_document(&file)?)?;
        }
        Ok(())
    }
}

// ----------------------------------------------------------------- eval

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Builtin name or matrix-field JSON path.
    #[arg(long)]
    pub distribution: Option<String>,
    /// Sup-norm budget for the construction.
    #[arg(long)]
    pub eta: Option<f64>,
    /// CSV of input points (k coordinate columns).
    #[arg(long)]
    pub points: Option<PathBuf>,
    /// Exported graph document to import and cross-check.
    #[arg(long)]
    pub lusin: Option<PathBuf>,
    /// Export the coefficient tree (enumerable builds only).
    #[arg(long)]
    pub export: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub struct GraphSetup {
    pub scaffold: CantorScaffold,
    pub datum: GradientDatum,
    pub field: DistributionField,
    pub distribution: String,
    pub depth: usize,
    pub eta: f64,
}

impl GraphSetup {
    pub fn function(&self) -> Result<LusinFunction<'_>> {
        Ok(LusinFunction::build(
            &self.datum,
            &self.scaffold,
            self.depth,
            self.eta,
        )?)
    }
}

pub fn resolve_graph(
    scaffold_args: &ScaffoldArgs,
    distribution: &Option<String>,
    eta: &Option<f64>,
    cfg: &RunConfig,
) -> Result<GraphSetup> {
    let sc = scaffold_args.resolve(cfg)?;
    let name = distribution
        .clone()
        .or(cfg.distribution.clone())
        .unwrap_or_else(|| "heisenberg".to_string());
    let field = load_distribution(&name)?;
    let datum = datum_for(&field, &sc)?;
    let depth = scaffold_args.depth_or(cfg, sc.depth()).min(sc.depth());
    let eta = eta.or(cfg.eta).unwrap_or(1.0);
    Ok(GraphSetup {
        scaffold: sc,
        datum,
        field,
        distribution: name,
        depth,
        eta,
    })
}

fn read_points(path: &Path, k: usize) -> Result<Vec<Vec<f64>>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::schema(format!("reading {path:?}: {e}")))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.trim().is_empty() {
            continue; // header row is mandatory
        }
        let fields: Vec<&str> = line.trim_end_matches('\r').split(',').collect();
        if fields.len() < k {
            return Err(CliError::schema(format!(
                "point row {i} has fewer than {k} columns"
            )));
        }
        let mut point = Vec::with_capacity(k);
        for f in fields.iter().take(k) {
            point.push(
                f.trim()
                    .parse::<f64>()
                    .map_err(|e| CliError::schema(format!("row {i}: {e}")))?,
            );
        }
        out.push(point);
    }
    Ok(out)
}

impl EvalArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "eval")?;
        let setup = resolve_graph(&self.scaffold, &self.distribution, &self.eta, &cfg)?;
        let u = setup.function()?;
        if let Some(path) = self.lusin.clone().or(cfg.lusin.clone().map(PathBuf::from)) {
            let file: LusinFile = crate::io::read_json(&path)?;
            file.verify_against(&u, 64)?;
        }
        if let Some(path) = self
            .export
            .clone()
            .or(cfg.export.clone().map(PathBuf::from))
        {
            let file = LusinFile::export(&u, &setup.distribution, 200_000)?;
            emit(Some(&path), &json_document(&file)?)?;
        }
        let points_path = self
            .points
            .clone()
            .or(cfg.points.clone().map(PathBuf::from));
        if let Some(points_path) = points_path {
            let k = setup.scaffold.k();
            let rows_in = read_points(&points_path, k)?;
            let m = setup.datum.rows();
            let mut header: Vec<String> = (1..=k).map(|a| format!("x{a}")).collect();
            header.extend((1..=m).map(|i| format!("u{i}")));
            for i in 1..=m {
                for j in 1..=k {
                    header.push(format!("du{i}_{j}"));
                }
            }
            let header_refs: Vec<&str> = header.iter().map(|s| s.as_str()).collect();
            let mut rows = Vec::with_capacity(rows_in.len());
            for x in &rows_in {
                let d = u.eval_global(x);
                let mut row: Vec<String> = x.iter().map(|v| fmt_f64(*v)).collect();
                row.extend(d.value.iter().map(|v| fmt_f64(*v)));
                row.extend(d.grad.data.iter().map(|v| fmt_f64(*v)));
                rows.push(row);
            }
            emit(
                out_path(&self.out, &cfg).as_deref(),
                &csv_document(&header_refs, &rows),
            )?;
        }
        Ok(())
    }
}

// ------------------------------------------------------------ residuals

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl ResidualArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "residuals")?;
        let setup = resolve_graph(&self.scaffold, &self.distribution, &self.eta, &cfg)?;
        let u = setup.function()?;
        let samples = self.samples.or(cfg.samples).unwrap_or(500);
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        let c = u.residual_constant();
        let mut rows = Vec::new();
        for level in 1..=u.depth() {
            let mut rng = substream(seed, &[0xCE5, level as u64]);
            let mut sup: f64 = 0.0;
            for _ in 0..samples {
                let cube = setup.scaffold.random_cube(level, &mut rng);
                let p = setup.scaffold.random_point_in_cube(&cube, 0.98, &mut rng);
                sup = sup.max(u.residual_deep(&p));
            }
            rows.push(vec![
                level.to_string(),
                fmt_f64(setup.scaffold.side(level)),
                fmt_f64(sup),
                fmt_f64(c * setup.scaffold.side(level)),
                samples.to_string(),
            ]);
        }
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(&["level", "r", "sup_residual", "bound", "samples"], &rows),
        )
    }
}

// --------------------------------------------------------------- verify

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub distribution: Option<String>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Tangency tolerance as a multiple of C r_N.
    #[arg(long)]
    pub tol_factor: Option<f64>,
    /// Exit nonzero when the pass rate drops below one.
    #[arg(long)]
    pub check: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct VerifyReport {
    distribution: String,
    depth: usize,
    samples: usize,
    tol: f64,
    pass_rate: f64,
    max_gap: f64,
}

impl VerifyArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "verify")?;
        let setup = resolve_graph(&self.scaffold, &self.distribution, &self.eta, &cfg)?;
        let u = setup.function()?;
        let samples = self.samples.or(cfg.samples).unwrap_or(1000);
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        let factor = self.tol_factor.or(cfg.tol_factor).unwrap_or(2.0);
        let tol = factor * u.residual_constant() * setup.scaffold.side(u.depth());
        let mut rng = substream(seed, &[0xFE51]);
        let mut pass = 0usize;
        let mut max_gap: f64 = 0.0;
        for _ in 0..samples {
            let cube = setup.scaffold.random_cube(u.depth(), &mut rng);
            let center = DeepPoint::at_center(cube);
            let outcome = tangency_check(&u, &setup.field, &center, tol)?;
            if outcome.tangent {
                pass += 1;
            }
            max_gap = max_gap.max(outcome.gap);
        }
        let report = VerifyReport {
            distribution: setup.distribution.clone(),
            depth: u.depth(),
            samples,
            tol,
            pass_rate: pass as f64 / samples as f64,
            max_gap,
        };
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &json_document(&report)?,
        )?;
        if (self.check || cfg.check.unwrap_or(false)) && pass != samples {
            return Err(CliError::Check(format!(
                "tangency pass rate {} < 1",
                report.pass_rate
            )));
        }
        Ok(())
    }
}

// ------------------------------------------------------------- seminorm

#[derive(Debug, Args)]
pub struct SeminormArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Field to measure: `halfjump` (reference benchmark) or
    /// `indicator` (level union of the scaffold).
    #[arg(long)]
    pub function: Option<String>,
    #[arg(long)]
    pub level: Option<usize>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub budget: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Switch to a multiscale Hölder scan at this exponent and emit the
    /// per-scale sup table instead of a seminorm estimate.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Scales for the Hölder scan, e.g. `0.1,0.05,0.025`.
    #[arg(long)]
    pub scales: Option<String>,
    /// Pairs per scale for the Hölder scan.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SeminormArgs {
    fn run_holder(&self, cfg: &RunConfig, function: &str, alpha: f64, seed: u64) -> Result<()> {
        let scales_text = self
            .scales
            .clone()
            .or(cfg.scales.clone())
            .ok_or_else(|| CliError::schema("holder scan needs --scales"))?;
        let scales: std::result::Result<Vec<f64>, _> = scales_text
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect();
        let scales = scales.map_err(|e| CliError::schema(format!("{e}")))?;
        let pairs = self.pairs.or(cfg.pairs).unwrap_or(10_000);
        let scan = match function {
            "halfjump" => {
                let f = FieldSampler::indicator(
                    SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0])?),
                    |x: &[f64]| x[0] < 0.5,
                );
                holder_estimate(
                    tangency_core::seminorm::field_pair_source(&f),
                    alpha,
                    &scales,
                    pairs,
                    seed,
                )?
            }
            "du" => {
                // Gradient field of the graph built over the scaffold.
                let setup =
                    resolve_graph(&self.scaffold, &cfg.distribution.clone(), &cfg.eta, cfg)?;
                let u = setup.function()?;
                holder_estimate(|rng, t| u.grad_pair(t, rng), alpha, &scales, pairs, seed)?
            }
            other => {
                return Err(CliError::schema(format!(
                    "unknown holder function '{other}'"
                )))
            }
        };
        let rows: Vec<Vec<String>> = scan
            .rows
            .iter()
            .map(|r| vec![fmt_f64(r.scale), fmt_f64(r.sup), r.pairs.to_string()])
            .collect();
        emit(
            out_path(&self.out, cfg).as_deref(),
            &csv_document(&["scale", "sup_ratio", "pairs"], &rows),
        )?;
        if let Some(slope) = scan.slope {
            eprintln!("holder log-log slope: {slope}");
        }
        Ok(())
    }

    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "seminorm")?;
        let function = self
            .function
            .clone()
            .or(cfg.function.clone())
            .unwrap_or_else(|| "halfjump".to_string());
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        if let Some(alpha) = self.alpha.or(cfg.alpha) {
            return self.run_holder(&cfg, &function, alpha, seed);
        }
        let s = self
            .s
            .or(cfg.s)
            .ok_or_else(|| CliError::schema("missing --s"))?;
        let p = self.p.or(cfg.p).unwrap_or(1.0);
        let budget = self.budget.or(cfg.budget).unwrap_or(1_000_000);
        let (quantity, est) = match function.as_str() {
            "halfjump" => {
                let f = FieldSampler::indicator(
                    SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0])?),
                    |x: &[f64]| x[0] < 0.5,
                )
                .with_hyperplane_hint(0, 0.5);
                (
                    "halfjump".to_string(),
                    fractional_seminorm(&f, s, p, budget, seed)?,
                )
            }
            "indicator" => {
                let sc = self.scaffold.resolve(&cfg)?;
                let level = self.level.or(cfg.level).unwrap_or(sc.depth());
                let f = FieldSampler::scaffold_indicator(&sc, level);
                (
                    format!("indicator-level-{level}"),
                    fractional_seminorm(&f, s, p, budget, seed)?,
                )
            }
            other => {
                return Err(CliError::schema(format!(
                    "unknown seminorm function '{other}'"
                )))
            }
        };
        let rows = vec![vec![
            quantity,
            fmt_f64(s),
            fmt_f64(p),
            fmt_f64(est.value),
            fmt_f64(est.stderr),
            fmt_f64(est.power),
            fmt_f64(est.power_stderr),
            est.budget.to_string(),
            est.seed.to_string(),
            est.truncated.to_string(),
        ]];
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(
                &[
                    "quantity",
                    "s",
                    "p",
                    "value",
                    "stderr",
                    "power",
                    "power_stderr",
                    "budget",
                    "seed",
                    "truncated",
                ],
                &rows,
            ),
        )
    }
}

// ------------------------------------------------------------ dimension

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Level range for the fit, e.g. `2..8`.
    #[arg(long)]
    pub levels: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl DimensionArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "dimension")?;
        let sc = self.scaffold.resolve(&cfg)?;
        let levels = parse_levels(
            &self
                .levels
                .clone()
                .or(cfg.levels.clone())
                .unwrap_or_else(|| "2..8".into()),
        )?;
        let fitted = box_dimension_estimate(&sc, &levels)?;
        let theory = sc.schedule().theoretical_dimension().ok();
        let rows = vec![vec![
            format!("{}..{}", levels.first().unwrap(), levels.last().unwrap()),
            fmt_f64(fitted),
            theory.map(fmt_f64).unwrap_or_default(),
        ]];
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(
                &["levels", "fitted_dimension", "theoretical_dimension"],
                &rows,
            ),
        )
    }
}

// --------------------------------------------------------- superdensity

#[derive(Debug, Args)]
pub struct SuperdensityArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Set level (defaults to the scaffold depth).
    #[arg(long)]
    pub level: Option<usize>,
    /// Density exponent parameter b (0 <= b < s).
    #[arg(long)]
    pub density_exponent: Option<f64>,
    #[arg(long)]
    pub s: Option<f64>,
    /// Radii as schedule levels, e.g. `1..6` uses r_1..r_6.
    #[arg(long)]
    pub radii_levels: Option<String>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl SuperdensityArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "superdensity")?;
        let sc = self.scaffold.resolve(&cfg)?;
        let level = self.level.or(cfg.level).unwrap_or(sc.depth());
        let s = self
            .s
            .or(cfg.s)
            .ok_or_else(|| CliError::schema("missing --s"))?;
        let b = self
            .density_exponent
            .or(cfg.density_exponent)
            .ok_or_else(|| CliError::schema("missing --density-exponent"))?;
        let samples = self.samples.or(cfg.samples).unwrap_or(100_000);
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        let level_list = parse_levels(
            &self
                .radii_levels
                .clone()
                .or(cfg.radii.clone())
                .unwrap_or_else(|| format!("1..{}", level.min(6))),
        )?;
        let radii: Vec<f64> = level_list.iter().map(|l| sc.side(*l)).collect();
        // Probe point: a deterministic deep cube center.
        let mut rng = substream(seed, &[0xCE17]);
        let center = DeepPoint::at_center(sc.random_cube(level, &mut rng));
        let rows_data = superdensity_profile(&sc, level, &center, &radii, b, s, samples, seed)?;
        let rows: Vec<Vec<String>> = rows_data
            .iter()
            .map(|r| {
                vec![
                    fmt_f64(r.r),
                    fmt_f64(r.ratio),
                    fmt_f64(r.stderr),
                    fmt_f64(r.complement_fraction),
                ]
            })
            .collect();
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(&["r", "ratio", "stderr", "complement_fraction"], &rows),
        )
    }
}

// ---------------------------------------------------------------- stokes

#[derive(Debug, Args)]
pub struct StokesArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Named form: heisenberg-m | x1dx2 | gradient | sincos.
    #[arg(long)]
    pub form: Option<String>,
    /// Rectangle center `x,y`.
    #[arg(long)]
    pub center: Option<String>,
    /// Half-sides `a,b`.
    #[arg(long)]
    pub half: Option<String>,
    /// Rotation angle in radians.
    #[arg(long)]
    pub angle: Option<f64>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn named_form(name: &str) -> Result<OneForm> {
    Ok(match name {
        "heisenberg-m" => OneForm::heisenberg_pair(),
        "x1dx2" => OneForm::new("x1dx2", |z| [0.0, z[0]]).with_curl(|_| 1.0),
        "gradient" => {
            // d(x1^2 x2): circulates to zero, curl is zero.
            OneForm::new("gradient", |z| [2.0 * z[0] * z[1], z[0] * z[0]]).with_curl(|_| 0.0)
        }
        "sincos" => OneForm::new("sincos", |z| [z[0].sin() * z[1].cos(), 0.0])
            .with_curl(|z| z[0].sin() * z[1].sin()),
        other => return Err(CliError::schema(format!("unknown one-form '{other}'"))),
    })
}

fn parse_pair(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(CliError::schema("expected two comma-separated numbers"));
    }
    Ok([
        parts[0]
            .trim()
            .parse()
            .map_err(|e| CliError::schema(format!("{e}")))?,
        parts[1]
            .trim()
            .parse()
            .map_err(|e| CliError::schema(format!("{e}")))?,
    ])
}

impl StokesArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "stokes")?;
        let name = self
            .form
            .clone()
            .or(cfg.function.clone())
            .unwrap_or_else(|| "heisenberg-m".into());
        let form = named_form(&name)?;
        let center = parse_pair(&self.center.clone().unwrap_or_else(|| "0.5,0.5".into()))?;
        let half = parse_pair(&self.half.clone().unwrap_or_else(|| "0.5,0.5".into()))?;
        let angle = self.angle.unwrap_or(0.0);
        let order = self.order.or(cfg.order).unwrap_or(8);
        let probe = RectangleProbe::from_angle(center, angle, half, order)?;
        let circ = circulation(&form, &probe);
        let flux = curl_flux(&form, &probe)?;
        let residual = stokes_residual(&form, &probe)?;
        let rows = vec![vec![
            name,
            fmt_f64(circ),
            fmt_f64(flux),
            fmt_f64(residual),
            order.to_string(),
        ]];
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(&["form", "circulation", "flux", "residual", "order"], &rows),
        )
    }
}

// ---------------------------------------------------------------- escape

#[derive(Debug, Args)]
pub struct EscapeArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Set level (defaults to the scaffold depth).
    #[arg(long)]
    pub level: Option<usize>,
    /// Radii as schedule levels, e.g. `1..6`.
    #[arg(long)]
    pub radii_levels: Option<String>,
    /// Candidate center offsets per axis per radius.
    #[arg(long)]
    pub offsets: Option<usize>,
    /// `exact` (scaffold interval arithmetic) or `sampling`.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl EscapeArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "escape")?;
        let sc = self.scaffold.resolve(&cfg)?;
        if sc.k() != 1 {
            return Err(CliError::schema(
                "escape scans need a k = 1 scaffold (product set)",
            ));
        }
        let level = self.level.or(cfg.level).unwrap_or(sc.depth());
        let level_list = parse_levels(
            &self
                .radii_levels
                .clone()
                .or(cfg.radii.clone())
                .unwrap_or_else(|| "1..6".into()),
        )?;
        let radii: Vec<f64> = level_list.iter().map(|l| sc.side(*l)).collect();
        let offsets = self.offsets.or(cfg.offsets).unwrap_or(32);
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        let mode = self
            .mode
            .clone()
            .or(cfg.mode.clone())
            .unwrap_or_else(|| "exact".into());
        let mut rng = substream(seed, &[0xE5CA]);
        let anchor_level = level.min(sc.depth());
        let ax = DeepPoint::at_center(sc.random_cube(anchor_level, &mut rng));
        let ay = DeepPoint::at_center(sc.random_cube(anchor_level, &mut rng));
        let scan = match mode.as_str() {
            "exact" => escape_scan_exact(&sc, &sc, level, &ax, &ay, &radii, offsets)?,
            "sampling" => {
                let points = self.samples.or(cfg.samples).unwrap_or(10_000);
                let gx = sc.global(&ax)[0];
                let gy = sc.global(&ay)[0];
                let set = |z: &[f64; 2]| {
                    sc.membership(&[z[0]], level).unwrap_or(false)
                        && sc.membership(&[z[1]], level).unwrap_or(false)
                };
                escape_scan_sampling(&set, [gx, gy], [1.0, 0.0], &radii, points)?
            }
            other => return Err(CliError::schema(format!("unknown escape mode '{other}'"))),
        };
        let mut rows = Vec::new();
        for (i, row) in scan.rows.iter().enumerate() {
            let so_far: Vec<_> = scan.rows[..=i].to_vec();
            let partial = if so_far.iter().filter(|r| r.measure > 0.0).count() >= 2 {
                let xs: Vec<f64> = so_far
                    .iter()
                    .filter(|r| r.measure > 0.0)
                    .map(|r| r.r.ln())
                    .collect();
                let ys: Vec<f64> = so_far
                    .iter()
                    .filter(|r| r.measure > 0.0)
                    .map(|r| r.measure.ln())
                    .collect();
                tangency_core::fit::linear_fit(&xs, &ys)
                    .ok()
                    .map(|(m, _)| m)
            } else {
                None
            };
            rows.push(vec![
                fmt_f64(row.r),
                fmt_f64(row.measure),
                fmt_f64(row.offset[0]),
                fmt_f64(row.offset[1]),
                partial.map(fmt_f64).unwrap_or_default(),
            ]);
        }
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &csv_document(
                &[
                    "r",
                    "escape_measure",
                    "offset_x",
                    "offset_y",
                    "exponent_fit_so_far",
                ],
                &rows,
            ),
        )?;
        if let Some(expn) = scan.exponent {
            eprintln!("escape exponent over {} radii: {expn}", scan.rows.len());
        }
        Ok(())
    }
}

// --------------------------------------------------------------- witness

#[derive(Debug, Args)]
pub struct WitnessArgs {
    #[command(flatten)]
    pub scaffold: ScaffoldArgs,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub radii_levels: Option<String>,
    #[arg(long)]
    pub offsets: Option<usize>,
    #[arg(long)]
    pub order: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct WitnessRecord {
    r: f64,
    circulation: f64,
    du_loop_quadrature: f64,
    flux: f64,
    escape: Option<f64>,
    ratio: f64,
    offset: [f64; 2],
}

impl WitnessArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "witness")?;
        let sc = self.scaffold.resolve(&cfg)?;
        if sc.k() != 2 {
            return Err(CliError::schema("witness runs on a k = 2 scaffold"));
        }
        let spec = ScaffoldFile::from_scaffold(&sc);
        if spec.schedule.regime != "sobolev" && spec.schedule.regime != "extremal" {
            return Err(CliError::schema(
                "witness needs a sobolev or extremal schedule (per-axis product structure)",
            ));
        }
        let field = DistributionField::heisenberg();
        let datum = datum_for(&field, &sc)?;
        let depth = self.scaffold.depth_or(&cfg, sc.depth()).min(sc.depth());
        let eta = self.eta.or(cfg.eta).unwrap_or(1.0);
        let u = LusinFunction::build(&datum, &sc, depth, eta)?;
        let m = OneForm::heisenberg_pair();
        // Per-axis view of the product structure: a k = 1 scaffold with the
        // same mesh, branching and gap widths, two levels deeper so deep
        // windows still see gaps.
        let axis_sched = tangency_core::geom::make_schedule(
            &spec.schedule.regime,
            1,
            spec.schedule.b,
            spec.schedule.delta,
            spec.schedule.param,
        )?;
        let axis_depth = (depth + 2).min(40);
        let ax_dom = BoxDomain::new(vec![spec.domain[0][0]], vec![spec.domain[0][1]])?;
        let ay_dom = BoxDomain::new(vec![spec.domain[1][0]], vec![spec.domain[1][1]])?;
        let sx = CantorScaffold::build(ax_dom, axis_sched.clone(), axis_depth)?;
        let sy = CantorScaffold::build(ay_dom, axis_sched, axis_depth)?;
        let seed = self.seed.or(cfg.seed).unwrap_or(0);
        let mut rng = substream(seed, &[0x317]);
        let cube = sc.random_cube(depth, &mut rng);
        let center = DeepPoint::at_center(cube.clone());
        let axis_anchor = |axis: usize, s1: &CantorScaffold| -> DeepPoint {
            let mut path = tangency_core::geom::CubePath::new_root(vec![cube.root[axis]]);
            for lev in 1..=cube.level() {
                path.push(&[cube.digit(lev, axis)]);
            }
            let _ = s1;
            DeepPoint::at_center(path)
        };
        let ax = axis_anchor(0, &sx);
        let ay = axis_anchor(1, &sy);
        let offsets = self.offsets.or(cfg.offsets).unwrap_or(32);
        let ctx = EscapeContext {
            sx: &sx,
            sy: &sy,
            level: axis_depth,
            ax: &ax,
            ay: &ay,
            offsets,
        };
        let level_list = parse_levels(
            &self
                .radii_levels
                .clone()
                .or(cfg.radii.clone())
                .unwrap_or_else(|| format!("1..{depth}")),
        )?;
        let radii: Vec<f64> = level_list.iter().map(|l| sc.side(*l)).collect();
        let order = self.order.or(cfg.order).unwrap_or(8);
        let rows = locality_witness(&m, Some(&u), Some(&ctx), &center, &radii, order)?;
        let records: Vec<WitnessRecord> = rows
            .iter()
            .map(|r| WitnessRecord {
                r: r.r,
                circulation: r.circulation,
                du_loop_quadrature: r.du_loop_quadrature,
                flux: r.flux,
                escape: r.escape,
                ratio: r.ratio,
                offset: r.offset,
            })
            .collect();
        emit(
            out_path(&self.out, &cfg).as_deref(),
            &json_document(&records)?,
        )
    }
}

// ----------------------------------------------------------------- phase

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Integrability exponent: a number >= 1 or `inf`.
    #[arg(long)]
    pub q: Option<String>,
    /// Grid resolution for figure mode.
    #[arg(long)]
    pub resolution: Option<usize>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct PhaseReport {
    s: f64,
    alpha: f64,
    q: String,
    tau: f64,
    label: String,
}

impl PhaseArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "phase")?;
        let q = Q::parse(
            &self
                .q
                .clone()
                .or(cfg.q.clone())
                .unwrap_or_else(|| "inf".into()),
        )?;
        let s = self.s.or(cfg.s);
        let alpha = self.alpha.or(cfg.alpha);
        match (s, alpha) {
            (Some(s), Some(alpha)) => {
                let point = classify(s, alpha, q)?;
                let report = PhaseReport {
                    s,
                    alpha,
                    q: q.label(),
                    tau: point.tau,
                    label: point.label.as_str().to_string(),
                };
                emit(
                    out_path(&self.out, &cfg).as_deref(),
                    &json_document(&report)?,
                )
            }
            _ => {
                let resolution = self.resolution.or(cfg.resolution).unwrap_or(128);
                let grid = figure_grid(q, resolution)?;
                let rows: Vec<Vec<String>> = grid
                    .iter()
                    .map(|c| {
                        vec![
                            fmt_f64(c.s),
                            fmt_f64(c.alpha),
                            fmt_f64(c.tau),
                            c.label.as_str().to_string(),
                        ]
                    })
                    .collect();
                emit(
                    out_path(&self.out, &cfg).as_deref(),
                    &csv_document(&["s", "alpha", "tau", "label"], &rows),
                )
            }
        }
    }
}

// ----------------------------------------------------------------- check

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Worker threads for the invariant bundle.
    #[arg(long)]
    pub jobs: Option<usize>,
}

type CheckFn = fn() -> std::result::Result<(), String>;

fn check_schedule_closed_forms() -> std::result::Result<(), String> {
    let sched = tangency_core::geom::make_schedule("sobolev", 2, 10, 0.01, 0.25)
        .map_err(|e| e.to_string())?;
    let r = sched.side_lengths(8).map_err(|e| e.to_string())?;
    let mut prev = 0.01;
    for (i, item) in r.iter().enumerate().skip(1) {
        let rec = prev / 1024.0 - sched.rho(i);
        if (item - rec).abs() > 1e-12 * 0.01 {
            return Err(format!("recursion drift at level {i}"));
        }
        prev = *item;
    }
    Ok(())
}

fn check_measure_identity() -> std::result::Result<(), String> {
    let sched = tangency_core::geom::make_schedule("dimension", 2, 1, 0.1, 1.0)
        .map_err(|e| e.to_string())?;
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 6).map_err(|e| e.to_string())?;
    for level in 0..6 {
        let lhs = sc.measure(level) - sc.measure(level + 1);
        let bk = (2f64).powi((sc.b() * 2) as i32 * level as i32);
        let rhs = sc.card_roots() as f64
            * bk
            * (sc.side(level).powi(2) - 4.0 * sc.side(level + 1).powi(2));
        if (lhs - rhs).abs() > 1e-12 * lhs.max(1e-300) {
            return Err(format!("level-difference identity drift at level {level}"));
        }
    }
    Ok(())
}

fn check_lattice_count() -> std::result::Result<(), String> {
    let sched =
        tangency_core::geom::make_schedule("gapless", 2, 1, 0.3, 0.0).map_err(|e| e.to_string())?;
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 1).map_err(|e| e.to_string())?;
    if sc.card_roots() != 9 {
        return Err(format!("0.3-mesh root count {} != 9", sc.card_roots()));
    }
    Ok(())
}

fn check_bracket_and_defect() -> std::result::Result<(), String> {
    let v = DistributionField::heisenberg();
    let pair = v.spanning_pair(1, 2).map_err(|e| e.to_string())?;
    let b = lie_bracket(&pair, &[0.3, -0.2, 0.9]);
    if (b[2] + 4.0).abs() > 1e-10 || b[0].abs() > 1e-12 || b[1].abs() > 1e-12 {
        return Err(format!("bracket {:?} != -4 e3", b));
    }
    let d = involutivity_defect(&v, &[0.0; 3], 1, 2, 1).map_err(|e| e.to_string())?;
    if d != 4.0 {
        return Err(format!("defect {d} != 4"));
    }
    if noninvolutivity_certificate(&v, &[0.0; 3], DEFECT_TOL).is_none() {
        return Err("certificate missing".into());
    }
    Ok(())
}

fn check_stokes_exactness() -> std::result::Result<(), String> {
    let g = OneForm::new("x1dx2", |z| [0.0, z[0]]).with_curl(|_| 1.0);
    let mut rng = substream(7, &[0xC4EC]);
    use rand::Rng;
    for _ in 0..5 {
        let angle = rng.gen_range(0.0..std::f64::consts::PI);
        let probe = RectangleProbe::from_angle(
            [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)],
            angle,
            [rng.gen_range(0.3..1.0), rng.gen_range(0.3..1.0)],
            8,
        )
        .map_err(|e| e.to_string())?;
        let res = stokes_residual(&g, &probe).map_err(|e| e.to_string())?;
        if res > 1e-10 {
            return Err(format!("residual {res}"));
        }
    }
    Ok(())
}

fn check_phase_probes() -> std::result::Result<(), String> {
    use tangency_core::phase::PhaseLabel::*;
    let cases = [
        (0.25, 0.6, Q::Inf, Frobenius),
        (0.25, 0.4, Q::Inf, Counterexample),
        (0.6, 0.1, Q::Finite(2.0), Frobenius),
        (0.1, 0.95, Q::Finite(1.0), Frobenius),
        (0.1, 0.85, Q::Finite(1.0), Counterexample),
        (0.5, 0.4, Q::Inf, Frobenius),
    ];
    for (s, a, q, want) in cases {
        let got = classify(s, a, q).map_err(|e| e.to_string())?.label;
        if got != want {
            return Err(format!("({s},{a}) classified {:?}", got));
        }
    }
    Ok(())
}

fn check_box_dimension() -> std::result::Result<(), String> {
    let sched = tangency_core::geom::make_schedule("dimension", 2, 1, 0.1, 1.0)
        .map_err(|e| e.to_string())?;
    let sc = CantorScaffold::build(BoxDomain::unit(2), sched, 8).map_err(|e| e.to_string())?;
    let levels: Vec<usize> = (2..=8).collect();
    let slope = box_dimension_estimate(&sc, &levels).map_err(|e| e.to_string())?;
    if (slope - 1.0).abs() > 0.05 {
        return Err(format!("fitted dimension {slope}"));
    }
    Ok(())
}

fn check_seminorm_benchmark() -> std::result::Result<(), String> {
    let f = FieldSampler::indicator(
        SampleDomain::Box(BoxDomain::new(vec![0.0], vec![1.0]).map_err(|e| e.to_string())?),
        |x: &[f64]| x[0] < 0.5,
    )
    .with_hyperplane_hint(0, 0.5);
    let est = fractional_seminorm(&f, 0.5, 1.0, 200_000, 42).map_err(|e| e.to_string())?;
    let exact = 8.0 * (2f64.sqrt() - 1.0);
    if (est.value - exact).abs() > 3.0 * est.stderr {
        return Err(format!("{} +- {} vs {exact}", est.value, est.stderr));
    }
    Ok(())
}

fn check_tangency_smoke() -> std::result::Result<(), String> {
    let sched = tangency_core::geom::make_schedule("dimension", 2, 1, 1e-3, 1.0)
        .map_err(|e| e.to_string())?;
    let dom = BoxDomain::new(vec![0.0, 0.0], vec![2e-3, 2e-3]).map_err(|e| e.to_string())?;
    let sc = CantorScaffold::build(dom, sched, 5).map_err(|e| e.to_string())?;
    let datum = GradientDatum::heisenberg(3e-3);
    let u = LusinFunction::build(&datum, &sc, 5, 1.0).map_err(|e| e.to_string())?;
    let field = DistributionField::heisenberg();
    let tol = 2.0 * u.residual_constant() * sc.side(5);
    let mut rng = substream(3, &[0x7a]);
    for _ in 0..200 {
        let center = DeepPoint::at_center(sc.random_cube(5, &mut rng));
        let out = tangency_check(&u, &field, &center, tol).map_err(|e| e.to_string())?;
        if !out.tangent {
            return Err(format!("tangency gap {}", out.gap));
        }
    }
    Ok(())
}

fn check_holder_reference() -> std::result::Result<(), String> {
    let lin = FieldSampler::function(
        SampleDomain::Box(BoxDomain::new(vec![-1.0], vec![1.0]).map_err(|e| e.to_string())?),
        |x: &[f64]| 2.0 * x[0],
    );
    let scales: Vec<f64> = (0..5).map(|i| 0.2 * 0.5f64.powi(i)).collect();
    let scan = holder_estimate(
        tangency_core::seminorm::field_pair_source(&lin),
        1.0,
        &scales,
        1000,
        5,
    )
    .map_err(|e| e.to_string())?;
    let slope = scan.slope.ok_or("no slope")?;
    if slope.abs() > 1e-6 {
        return Err(format!("linear holder slope {slope}"));
    }
    Ok(())
}

fn check_grid_determinism() -> std::result::Result<(), String> {
    let a = figure_grid(Q::Inf, 64).map_err(|e| e.to_string())?;
    let b = figure_grid(Q::Inf, 64).map_err(|e| e.to_string())?;
    for (x, y) in a.iter().zip(&b) {
        if x.s != y.s || x.alpha != y.alpha || x.label != y.label {
            return Err("grid not reproducible".into());
        }
    }
    Ok(())
}

impl CheckArgs {
    pub fn run(&self) -> Result<()> {
        let cfg = RunConfig::load(self.config.as_deref(), "check")?;
        let jobs = self.jobs.or(cfg.jobs).unwrap_or(1).max(1);
        let bundle: Vec<(&str, CheckFn)> = vec![
            ("schedule-closed-forms", check_schedule_closed_forms),
            ("measure-identity", check_measure_identity),
            ("lattice-count", check_lattice_count),
            ("bracket-and-defect", check_bracket_and_defect),
            ("stokes-exactness", check_stokes_exactness),
            ("phase-probes", check_phase_probes),
            ("box-dimension", check_box_dimension),
            ("seminorm-benchmark", check_seminorm_benchmark),
            ("tangency", check_tangency_smoke),
            ("holder-reference", check_holder_reference),
            ("grid-determinism", check_grid_determinism),
        ];
        let results: Vec<(usize, std::result::Result<(), String>)> = if jobs == 1 {
            bundle
                .iter()
                .enumerate()
                .map(|(i, (_, f))| (i, f()))
                .collect()
        } else {
            let mut results = Vec::new();
            std::thread::scope(|scope| {
                let mut handles = Vec::new();
                for chunk in bundle.chunks(bundle.len().div_ceil(jobs)) {
                    let offset = handles.iter().map(|(_, n): &(_, usize)| n).sum::<usize>();
                    let chunk: Vec<CheckFn> = chunk.iter().map(|(_, f)| *f).collect();
                    let len = chunk.len();
                    let handle = scope.spawn(move || {
                        chunk
                            .into_iter()
                            .enumerate()
                            .map(|(i, f)| (offset + i, f()))
                            .collect::<Vec<_>>()
                    });
                    handles.push((handle, len));
                }
                for (handle, _) in handles {
                    results.extend(handle.join().expect("check worker panicked"));
                }
            });
            results.sort_by_key(|(i, _)| *i);
            results
        };
        let mut failures = 0usize;
        for (i, outcome) in &results {
            let name = bundle[*i].0;
            match outcome {
                Ok(()) => println!("check {name}: ok"),
                Err(msg) => {
                    println!("check {name}: FAIL ({msg})");
                    failures += 1;
                }
            }
        }
        if failures > 0 {
            return Err(CliError::Check(format!(
                "{failures} invariant check(s) failed"
            )));
        }
        Ok(())
    }
}

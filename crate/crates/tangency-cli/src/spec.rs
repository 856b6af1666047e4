//! On-disk formats: scaffold documents, distribution specs, graph exports,
//! and the flag/config plumbing shared by the subcommands.

use std::path::Path;

use serde::{Deserialize, Serialize};
use tangency_core::dist::{DistributionField, Monomial, PolyEntry};
use tangency_core::geom::{make_schedule, BoxDomain, CantorScaffold, CubePath};
use tangency_core::lusin::{GradientDatum, LusinFunction};

use crate::error::{CliError, Result};
use crate::io::read_json;

/// Schedule parameters as serialized in scaffold documents.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleSpec {
    pub regime: String,
    pub k: usize,
    #[serde(rename = "B")]
    pub b: u32,
    pub delta: f64,
    #[serde(default)]
    pub param: f64,
}

impl ScheduleSpec {
    pub fn build(&self) -> Result<tangency_core::geom::RhoSchedule> {
        Ok(make_schedule(
            &self.regime,
            self.k,
            self.b,
            self.delta,
            self.param,
        )?)
    }
}

/// Scaffold document: schedule, domain, depth, and the derived tables.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScaffoldFile {
    pub schedule: ScheduleSpec,
    /// Per-axis `[lo, hi]` intervals.
    pub domain: Vec<[f64; 2]>,
    pub depth: usize,
    pub card_l1: u64,
    pub r: Vec<f64>,
    pub measure: Vec<f64>,
}

impl ScaffoldFile {
    pub fn from_scaffold(sc: &CantorScaffold) -> Self {
        let dom = sc.domain();
        ScaffoldFile {
            schedule: ScheduleSpec {
                regime: sc.schedule().regime().name().to_string(),
                k: sc.k(),
                b: sc.b(),
                delta: sc.schedule().delta(),
                param: sc.schedule().param().unwrap_or(0.0),
            },
            domain: (0..sc.k()).map(|a| [dom.lo()[a], dom.hi()[a]]).collect(),
            depth: sc.depth(),
            card_l1: sc.card_roots(),
            r: sc.sides().to_vec(),
            measure: (0..=sc.depth()).map(|l| sc.measure(l)).collect(),
        }
    }

    pub fn build(&self) -> Result<CantorScaffold> {
        let schedule = self.schedule.build()?;
        let lo = self.domain.iter().map(|iv| iv[0]).collect();
        let hi = self.domain.iter().map(|iv| iv[1]).collect();
        let domain = BoxDomain::new(lo, hi)?;
        let sc = CantorScaffold::build(domain, schedule, self.depth)?;
        if sc.card_roots() != self.card_l1 {
            return Err(CliError::schema(
                "scaffold file card_l1 does not match its parameters",
            ));
        }
        Ok(sc)
    }

    pub fn load(path: &Path) -> Result<Self> {
        read_json(path)
    }
}

/// Polynomial matrix-field document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyFieldFile {
    pub n: usize,
    pub k: usize,
    pub entries: Vec<PolyEntrySpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyEntrySpec {
    pub p: usize,
    pub a: usize,
    pub monomials: Vec<MonomialSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialSpec {
    pub coeff: f64,
    pub exponents: Vec<u32>,
}

impl PolyFieldFile {
    pub fn build(&self) -> Result<DistributionField> {
        let entries = self
            .entries
            .iter()
            .map(|e| PolyEntry {
                p: e.p,
                a: e.a,
                monomials: e
                    .monomials
                    .iter()
                    .map(|m| Monomial {
                        coeff: m.coeff,
                        exponents: m.exponents.clone(),
                    })
                    .collect(),
            })
            .collect();
        Ok(DistributionField::polynomial(self.n, self.k, entries)?)
    }
}

/// Resolve a distribution argument: a builtin name or a JSON file path.
pub fn load_distribution(name: &str) -> Result<DistributionField> {
    match name {
        "heisenberg" => Ok(DistributionField::heisenberg()),
        path if path.ends_with(".json") => {
            let file: PolyFieldFile = read_json(Path::new(path))?;
            file.build()
        }
        other => Err(CliError::schema(format!(
            "unknown distribution '{other}' (use 'heisenberg' or a .json matrix-field spec)"
        ))),
    }
}

/// Gradient datum matching a distribution on a scaffold's domain: the graph
/// tangency datum `F(x, u) = M((x, u))`.
pub fn datum_for(field: &DistributionField, sc: &CantorScaffold) -> Result<GradientDatum> {
    if field.k() != sc.k() {
        return Err(CliError::schema(
            "distribution base dimension does not match scaffold",
        ));
    }
    match field.kind() {
        tangency_core::dist::FieldKind::Builtin("heisenberg") => {
            let hi = sc.domain().hi();
            let lo = sc.domain().lo();
            let corner: f64 = (0..sc.k())
                .map(|a| hi[a].abs().max(lo[a].abs()).powi(2))
                .sum::<f64>()
                .sqrt();
            Ok(GradientDatum::heisenberg(corner))
        }
        _ => {
            // Generic graph datum: sample the recorded bounds.
            let f = field.clone();
            let rows = field.n() - field.k();
            let cols = field.k();
            let eval = move |x: &[f64], u: &[f64]| {
                let mut z = x.to_vec();
                z.extend_from_slice(u);
                f.matrix(&z)
            };
            let mut rng = tangency_core::rng::substream(0xF1E1D, &[]);
            let probe = GradientDatum::from_fn(rows, cols, eval, 0.0, 0.0);
            let (m1, m2) = probe.spot_check(sc.domain().lo(), sc.domain().hi(), 4096, &mut rng);
            let f2 = field.clone();
            let eval2 = move |x: &[f64], u: &[f64]| {
                let mut z = x.to_vec();
                z.extend_from_slice(u);
                f2.matrix(&z)
            };
            Ok(GradientDatum::from_fn(
                rows,
                cols,
                eval2,
                m1 * 1.05,
                m2 * 1.5,
            ))
        }
    }
}

/// Exported layered-graph document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LusinFile {
    pub scaffold_ref: ScaffoldFile,
    pub distribution: String,
    pub depth: usize,
    pub eta: f64,
    pub cutoff_constants: CutoffConstants,
    pub levels: Vec<LusinCube>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CutoffConstants {
    pub c1: f64,
    pub c2: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LusinCube {
    /// Root index, then one row-major child index per level.
    pub cube_path: Vec<u64>,
    /// Row-major coefficient matrix.
    pub a: Vec<f64>,
}

impl LusinFile {
    pub fn export(u: &LusinFunction<'_>, distribution: &str, max_cubes: usize) -> Result<Self> {
        let sc = u.scaffold();
        let mut levels = Vec::new();
        for level in 1..=u.depth() {
            let mut failed = false;
            sc.for_each_cube(level, |path| {
                if levels.len() > max_cubes {
                    failed = true;
                    return;
                }
                let (root, children) = sc.path_indices(path);
                let mut cube_path = vec![root];
                cube_path.extend(children);
                let a = u.coefficient(path).expect("path within depth");
                levels.push(LusinCube { cube_path, a: a.data.clone() });
            })
            .map_err(|_| {
                CliError::runtime(
                    "cube family too large to enumerate for export; rebuild from parameters instead",
                )
            })?;
            if failed {
                return Err(CliError::runtime(
                    "export exceeds the cube budget; rebuild from parameters instead",
                ));
            }
        }
        Ok(LusinFile {
            scaffold_ref: ScaffoldFile::from_scaffold(sc),
            distribution: distribution.to_string(),
            depth: u.depth(),
            eta: u.eta(),
            cutoff_constants: CutoffConstants {
                c1: tangency_core::cutoff::C1,
                c2: tangency_core::cutoff::C2,
            },
            levels,
        })
    }

    /// Cross-check stored coefficients against a freshly rebuilt function.
    pub fn verify_against(&self, u: &LusinFunction<'_>, limit: usize) -> Result<()> {
        let sc = u.scaffold();
        for cube in self.levels.iter().take(limit) {
            let path: CubePath = sc.path_from_indices(cube.cube_path[0], &cube.cube_path[1..])?;
            let a = u.coefficient(&path)?;
            let drift = a
                .data
                .iter()
                .zip(&cube.a)
                .map(|(x, y)| (x - y).abs())
                .fold(0.0f64, f64::max);
            if drift > 1e-12 {
                return Err(CliError::runtime(format!(
                    "imported coefficients disagree with rebuild (drift {drift})"
                )));
            }
        }
        Ok(())
    }
}

/// Parse a domain flag like `0:1,0:1`.
pub fn parse_domain(text: &str, k: usize) -> Result<BoxDomain> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in text.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| CliError::schema("domain intervals use lo:hi"))?;
        lo.push(
            a.trim()
                .parse::<f64>()
                .map_err(|e| CliError::schema(format!("{e}")))?,
        );
        hi.push(
            b.trim()
                .parse::<f64>()
                .map_err(|e| CliError::schema(format!("{e}")))?,
        );
    }
    if lo.len() != k {
        return Err(CliError::schema(format!(
            "domain has {} axes, expected {k}",
            lo.len()
        )));
    }
    Ok(BoxDomain::new(lo, hi)?)
}

/// Parse `1..6` (inclusive level range) or a comma list of values.
pub fn parse_levels(text: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = text.split_once("..") {
        let lo: usize = a
            .trim()
            .parse()
            .map_err(|e| CliError::schema(format!("{e}")))?;
        let hi: usize = b
            .trim()
            .parse()
            .map_err(|e| CliError::schema(format!("{e}")))?;
        if hi < lo {
            return Err(CliError::schema("empty level range"));
        }
        Ok((lo..=hi).collect())
    } else {
        text.split(',')
            .map(|v| {
                v.trim()
                    .parse::<usize>()
                    .map_err(|e| CliError::schema(format!("{e}")))
            })
            .collect()
    }
}

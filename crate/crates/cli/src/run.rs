use std::fs;
use std::path::{Path, PathBuf};

use littlewood_lab::bridge::{littlewood_scan, roundtrip, tau, TargetPair, BRIDGE_CONSTANT};
use littlewood_lab::estimators::{
    box_dim_estimate, cantor_endpoints, geometric_schedule, hausdorff_note, top_entropy_estimate,
    transversal_bad_scan, unit_grid, CircleRotation, DoublingMap, PointCloud,
};
use littlewood_lab::expr::parse_real;
use littlewood_lab::flow::{littlewood_cone, orbit_trace_cone, ConeGrid, FlowSpec};
use littlewood_lab::forms::{cubic_norm_form, forms_min_scan, FormsMatrix};
use littlewood_lab::lattice::{DiagParam, LatticeBasis, MatrixFile, Mode};
use littlewood_lab::rigidity::{
    eig_lemma_trials, entropy_formula, exceptional_scan, find_shear_time, kappa, EntropyData,
    ShearSearch, ShearState,
};
use littlewood_lab::{LabError, Result};
use serde_json::{json, Value};

use crate::args::*;

/// Bundled displacement matrix for `shear demo`.
pub const BUNDLED_G: &str = include_str!("../data/g.json");

/// What a command produced.
pub struct Outcome {
    /// Main data file body.
    pub data: String,
    /// Short machine-readable summary, echoed into the manifest.
    pub summary: Value,
    /// `lambda = exp(min positive t_i - t_j)` of the flow direction involved, if any.
    pub lambda: Option<f64>,
    /// Additional files requested by flags.
    pub extra: Vec<(PathBuf, String)>,
}

impl Outcome {
    fn new(data: String, summary: Value) -> Self {
        Outcome {
            data,
            summary,
            lambda: None,
            extra: Vec::new(),
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(v)? + "\n")
}

fn read_json(path: &Path) -> Result<Value> {
    let text =
        fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_grid_rows(s: &str) -> Result<Vec<Vec<f64>>> {
    s.split(';')
        .map(|row| {
            row.split(',')
                .map(|x| parse_real(x.trim()).map(|r| r.to_f64()))
                .collect::<Result<Vec<_>>>()
        })
        .collect()
}

fn littlewood_lambda() -> Option<f64> {
    FlowSpec::new(DiagParam::from_rs(1.0, 1.0)).expansion_rate()
}

pub fn dispatch(cmd: &Command, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Littlewood(LittlewoodCmd::Scan { u, v, n }) => {
            let pair = TargetPair::parse(u, v)?;
            let scan = littlewood_scan(&pair, *n)?;
            let summary = json!({ "min_product": scan.min_product, "argmin": scan.argmin, "records": scan.records.len() });
            Ok(Outcome {
                lambda: littlewood_lambda(),
                ..Outcome::new(scan.to_csv(), summary)
            })
        }
        Command::Littlewood(LittlewoodCmd::Roundtrip {
            u,
            v,
            eps,
            extent,
            step,
            r_max,
        }) => {
            let pair = TargetPair::parse(u, v)?;
            let grid = ConeGrid::new(*step, vec![*extent, *extent])?;
            let rt = roundtrip(&pair, *eps, &grid, *r_max)?;
            let summary = json!({
                "excursions": rt.excursions.len(),
                "returns": rt.returns.len(),
                "violations_to_witness": rt.violations_to_witness,
                "violations_to_orbit": rt.violations_to_orbit,
            });
            Ok(Outcome {
                lambda: littlewood_lambda(),
                ..Outcome::new(to_json(&rt)?, summary)
            })
        }
        Command::Orbit(OrbitCmd::Trace {
            basis,
            u,
            v,
            dirs,
            rho,
            extent,
            step,
        }) => {
            let x0 = match (basis, u, v) {
                (Some(path), _, _) => LatticeBasis::from_json(&read_json(path)?)?,
                (None, Some(u), Some(v)) => tau(&TargetPair::parse(u, v)?),
                _ => return Err(LabError::Config("give --basis or both --u and --v".into())),
            };
            let dirs = match dirs {
                Some(s) => parse_grid_rows(s)?
                    .into_iter()
                    .map(DiagParam::new)
                    .collect::<Result<Vec<_>>>()?,
                None if x0.dim() == 3 => littlewood_cone(),
                None => return Err(LabError::Config("--dirs is required unless k = 3".into())),
            };
            let grid = ConeGrid::new(*step, vec![*extent; dirs.len()])?;
            let trace = orbit_trace_cone(&x0, &dirs, &grid, *rho)?;
            let center = DiagParam::combination(&dirs, &vec![1.0; dirs.len()])?;
            let summary = json!({
                "samples": trace.samples.len(),
                "min_delta": trace.min_delta(),
                "all_in_k_rho": trace.all_in_k_rho(),
            });
            Ok(Outcome {
                lambda: FlowSpec::new(center).expansion_rate(),
                ..Outcome::new(trace.to_csv(), summary)
            })
        }
        Command::Forms(FormsCmd::Scan { m, cubic, n }) => {
            let forms = if *cubic {
                cubic_norm_form()
            } else {
                let path = m
                    .as_ref()
                    .ok_or_else(|| LabError::Config("give --m or --cubic".into()))?;
                FormsMatrix::new(MatrixFile::from_json(&read_json(path)?)?.float_matrix()?)?
            };
            let scan = forms_min_scan(&forms, *n)?;
            let summary = json!({ "min": scan.min, "argmin": scan.argmin });
            Ok(Outcome::new(to_json(&scan)?, summary))
        }
        Command::Shear(ShearCmd::Demo { g, r, rho }) => shear_demo(g.as_deref(), *r, *rho),
        Command::Exceptional(ExceptionalCmd::Scan { k, entry_bound }) => {
            let scan = exceptional_scan(*k, *entry_bound)?;
            let summary = json!({ "checked": scan.checked, "hits": scan.hits.len() });
            Ok(Outcome::new(to_json(&scan)?, summary))
        }
        Command::Eig(EigCmd::Lemma {
            lambda,
            trials,
            radius,
        }) => {
            let res = eig_lemma_trials(lambda, *trials, *radius, seed)?;
            let summary =
                json!({ "passed": res.passed, "trials": res.trials, "max_shift": res.max_shift });
            Ok(Outcome::new(to_json(&res)?, summary))
        }
        Command::Dim(DimCmd::Estimate {
            points,
            set,
            size,
            eps0,
            ratio,
            scales,
        }) => {
            let cloud = match (points, set, size) {
                (Some(path), _, _) => read_points(path)?,
                (None, Some(CloudKind::Cantor), Some(level)) => {
                    if *level > 20 {
                        return Err(LabError::Budget("Cantor level above 20".into()));
                    }
                    PointCloud::from_scalars(&cantor_endpoints(*level as u32))?
                }
                (None, Some(CloudKind::Grid), Some(m)) => PointCloud::from_scalars(&unit_grid(*m))?,
                _ => {
                    return Err(LabError::Config(
                        "give --points or --set with --size".into(),
                    ))
                }
            };
            let est = box_dim_estimate(&cloud, &geometric_schedule(*eps0, *ratio, *scales))?;
            let note = hausdorff_note(est.slope);
            let summary = json!({
                "points": cloud.len(),
                "slope": est.slope,
                "warning": est.warning,
                "hausdorff_upper": note.upper,
                "note": note.note,
            });
            Ok(Outcome::new(est.to_csv(), summary))
        }
        Command::Dim(DimCmd::ScanBad {
            rho,
            t,
            grid,
            survivors,
        }) => {
            let scan = transversal_bad_scan(*rho, *t, *grid)?;
            let data = match &scan.estimate {
                Some(est) => est.to_csv(),
                None => String::from("epsilon,count\n"),
            };
            let summary = json!({
                "grid_points": grid * grid,
                "survivors": scan.survivors.len(),
                "slope": scan.estimate.as_ref().map(|e| e.slope),
                "note": if scan.estimate.is_none() { "no survivors; slope undefined" } else { "" },
            });
            let mut out = Outcome {
                lambda: littlewood_lambda(),
                ..Outcome::new(data, summary)
            };
            if let Some(path) = survivors {
                out.extra.push((path.clone(), scan.to_csv()));
            }
            Ok(out)
        }
        Command::Entropy(EntropyCmd::Estimate {
            map,
            alpha,
            points,
            n,
            eps,
        }) => {
            if *points == 0 || *points > 1 << 16 {
                return Err(LabError::Contract("--points must be in 1..=65536".into()));
            }
            let seed = PointCloud::from_scalars(
                &(0..*points)
                    .map(|i| i as f64 / *points as f64)
                    .collect::<Vec<_>>(),
            )?;
            let eps = parse_real(eps)?.to_f64();
            let est = match map {
                MapKind::Doubling => top_entropy_estimate(&DoublingMap, &seed, *n, eps)?,
                MapKind::Rotation => top_entropy_estimate(
                    &CircleRotation(parse_real(alpha)?.to_f64()),
                    &seed,
                    *n,
                    eps,
                )?,
            };
            let summary = json!({ "rate": est.rate, "slope": est.slope });
            Ok(Outcome::new(est.to_csv(), summary))
        }
        Command::Entropy(EntropyCmd::Formula { s, t }) => {
            let data = EntropyData::new(parse_grid_rows(s)?, DiagParam::new(t.clone())?)?;
            let h = entropy_formula(&data);
            let h_neg = entropy_formula(&data.with_t(data.t().neg())?);
            let body = json!({ "entropy": h, "entropy_reversed": h_neg, "symmetric": data.is_symmetric() });
            Ok(Outcome::new(to_json(&body)?, body))
        }
    }
}

fn read_points(path: &Path) -> Result<PointCloud> {
    let text =
        fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter(|l| {
            l.chars()
                .next()
                .is_some_and(|c| c.is_ascii_digit() || c == '-' || c == '.')
        })
        .map(|l| {
            l.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<f64>()
                        .map_err(|_| LabError::Parse(format!("bad number `{x}`")))
                })
                .collect()
        })
        .collect::<Result<_>>()?;
    PointCloud::new(&rows)
}

fn shear_demo(path: Option<&Path>, r: f64, rho: f64) -> Result<Outcome> {
    let file = match path {
        Some(p) => MatrixFile::from_json(&read_json(p)?)?,
        None => MatrixFile::from_json(&serde_json::from_str(BUNDLED_G)?)?,
    };
    let g = ShearState::from_matrix(&file.float_matrix()?)?;
    let closed = g.shear(&r);
    let direct = g.shear_direct(&r);
    let max_diff = closed.max_diff(&direct);
    let exact_identical = if file.mode == Mode::Exact {
        let ge = ShearState::from_exact_rows(&file.exact_rows()?)?;
        let re = num_rational::BigRational::from_float(r)
            .ok_or_else(|| LabError::Domain("r must be finite".into()))?;
        Some(ge.shear(&re) == ge.shear_direct(&re))
    } else {
        None
    };
    let shear_time = match find_shear_time(&g, &ShearSearch { rho, delta: None }) {
        Ok(t) => serde_json::to_value(t)?,
        Err(LabError::NoShear) => json!(null),
        Err(e) => return Err(e),
    };
    let body = json!({
        "r": r,
        "closed_form": closed.to_rows(),
        "direct": direct.to_rows(),
        "max_diff": max_diff,
        "exact_identical": exact_identical,
        "kappa": kappa(&g),
        "shear_time": shear_time,
    });
    let summary = json!({ "max_diff": max_diff, "exact_identical": exact_identical });
    Ok(Outcome::new(to_json(&body)?, summary))
}

pub fn bridge_constant() -> f64 {
    BRIDGE_CONSTANT
}

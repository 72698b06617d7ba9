use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use eds_core::eds::{build_model, PassStats, VerificationReport};
use eds_core::geometry::TriangulationExport;
use eds_core::metrics::{CdrClass, LogCdrStats};
use eds_core::sysid::Evaluation;
use serde::Serialize;

use crate::artifacts::*;
use crate::error::{CliError, CliResult};
use crate::ReportArgs;

const HISTOGRAM_BINS: usize = 20;

#[derive(Serialize)]
struct Curation {
    psi: SerInf,
    representative_count: usize,
    auxiliary_count: usize,
    violations: usize,
    duplicates: usize,
    per_pass: Vec<PassStats>,
    verification: VerificationReport,
}

/// `f64` that writes infinity as `"inf"`.
#[derive(Serialize)]
struct SerInf(#[serde(with = "eds_core::eds::extended_f64")] f64);

#[derive(Serialize)]
struct MetricsSection {
    source: String,
    subset: SubsetSource,
    subset_size: usize,
    regions: usize,
    stats: LogCdrStats,
    sigma_hat: f64,
    imbalance_score: f64,
    class_counts: BTreeMap<CdrClass, usize>,
}

#[derive(Serialize)]
struct Histogram {
    lo: f64,
    hi: f64,
    count: usize,
}

#[derive(Serialize)]
struct Errors {
    /// Auxiliary-point errors against the representative model, in
    /// standardized label units.
    count: usize,
    max: f64,
    mean: f64,
    histogram: Vec<Histogram>,
}

#[derive(Serialize)]
struct EvaluationSection {
    term_names: Vec<String>,
    coefficients_raw: Vec<Vec<f64>>,
    evaluation: Evaluation,
    evaluation_raw: Evaluation,
    converged: bool,
    rollout_diverged_at: Option<usize>,
}

#[derive(Serialize)]
struct Report {
    format_version: u32,
    run_dir: PathBuf,
    dataset: DatasetSummary,
    curation: Curation,
    /// Keyed by artifact file name.
    metrics: BTreeMap<String, MetricsSection>,
    errors: Errors,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<EvaluationSection>,
    tables: Vec<String>,
}

fn fmt(v: f64) -> String {
    v.to_string()
}

fn metrics_files(dir: &Path) -> CliResult<Vec<(String, PathBuf)>> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default().to_string();
        if name.starts_with("metrics") && name.ends_with(".json") {
            out.push((name, path));
        }
    }
    out.sort();
    Ok(out)
}

/// The recorded input path as given, else relative to the run directory,
/// else its file name inside the run directory.
fn locate_input(dir: &Path, recorded: &Path) -> PathBuf {
    let candidates = [
        Some(recorded.to_path_buf()),
        Some(dir.join(recorded)),
        recorded.file_name().map(|f| dir.join(f)),
    ];
    candidates
        .into_iter()
        .flatten()
        .find(|p| p.is_file())
        .unwrap_or_else(|| recorded.to_path_buf())
}

fn histogram(errors: &[f64]) -> Vec<Histogram> {
    let max = errors.iter().copied().fold(0.0_f64, f64::max);
    let width = if max > 0.0 { max / HISTOGRAM_BINS as f64 } else { 1.0 };
    let mut counts = vec![0usize; HISTOGRAM_BINS];
    for &e in errors {
        let b = ((e / width) as usize).min(HISTOGRAM_BINS - 1);
        counts[b] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| Histogram {
            lo: i as f64 * width,
            hi: (i + 1) as f64 * width,
            count,
        })
        .collect()
}

pub fn run(a: &ReportArgs) -> CliResult<()> {
    let dir = &a.run_dir;
    if !dir.is_dir() {
        return Err(CliError::io(dir, "run directory not found"));
    }
    let missing: Vec<&str> = [EDS_RESULT, METRICS]
        .into_iter()
        .filter(|f| !dir.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(CliError::io(
            dir,
            format!("missing artifact(s): {}", missing.join(", ")),
        ));
    }
    let eds: EdsArtifact = read_json(&dir.join(EDS_RESULT))?;
    let input = locate_input(dir, &eds.input.path);
    let raw = load_dataset(&input)?;
    eds.input.check(&input, &raw)?;
    let params = &eds.standardization;
    let data = params.apply(&raw);
    let model = build_model(&data, &eds.result.representative_ids).map_err(CliError::invalid)?;
    let mut tables = Vec::new();

    // tessellation edges in raw feature units, keyed by dataset row
    let export = TriangulationExport::from(model.triangulation());
    let n = raw.feature_dim();
    let mut header: Vec<String> = vec!["row_a".into(), "row_b".into()];
    for end in ["a", "b"] {
        header.extend((0..n).map(|k| format!("{end}_x{k}")));
    }
    let rows: Vec<Vec<String>> = export
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (ru, rv) = (eds.result.representative_ids[u], eds.result.representative_ids[v]);
            let mut row = vec![ru.to_string(), rv.to_string()];
            row.extend(raw.x(ru).iter().chain(raw.x(rv)).map(|&c| fmt(c)));
            row
        })
        .collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(&dir.join("tessellation_edges.csv"), &header, &rows)?;
    tables.push("tessellation_edges.csv".to_string());

    let mut metrics = BTreeMap::new();
    let mut scatter = Vec::new();
    for (name, path) in metrics_files(dir)? {
        let m: MetricsArtifact = read_json(&path)?;
        for r in &m.report.regions {
            let c = &r.cdr;
            scatter.push(vec![
                name.clone(),
                c.simplex_id.to_string(),
                fmt(c.rho),
                fmt(c.rho.ln()),
                c.gc.map(fmt).unwrap_or_default(),
                c.gs.map(fmt).unwrap_or_default(),
                c.count.to_string(),
                r.class
                    .map(|k| serde_json::to_value(k).expect("enum serializes"))
                    .and_then(|v| v.as_str().map(str::to_string))
                    .unwrap_or_default(),
            ]);
        }
        metrics.insert(
            name,
            MetricsSection {
                source: m.report.source.clone(),
                subset: m.subset,
                subset_size: m.subset_size,
                regions: m.report.regions.len(),
                stats: m.report.stats,
                sigma_hat: m.report.stats.sigma_hat(),
                imbalance_score: m.report.imbalance_score,
                class_counts: m.report.class_counts,
            },
        );
    }
    write_table(
        &dir.join("cdr_scatter.csv"),
        &["artifact", "simplex_id", "rho", "log_rho", "gc", "gs", "count", "class"],
        &scatter,
    )?;
    tables.push("cdr_scatter.csv".to_string());

    let mut errors = Vec::with_capacity(eds.result.auxiliary_ids.len());
    for &i in &eds.result.auxiliary_ids {
        if let Some(e) = model.point_error(data.x(i), data.y(i)).map_err(CliError::invalid)? {
            errors.push(e);
        }
    }
    let hist = histogram(&errors);
    let rows: Vec<Vec<String>> = hist
        .iter()
        .map(|h| vec![fmt(h.lo), fmt(h.hi), h.count.to_string()])
        .collect();
    write_table(&dir.join("error_histogram.csv"), &["lo", "hi", "count"], &rows)?;
    tables.push("error_histogram.csv".to_string());
    let error_section = Errors {
        count: errors.len(),
        max: errors.iter().copied().fold(0.0, f64::max),
        mean: if errors.is_empty() {
            0.0
        } else {
            errors.iter().sum::<f64>() / errors.len() as f64
        },
        histogram: hist,
    };

    let sindy_path = dir.join(SINDY);
    let evaluation = if sindy_path.is_file() {
        let s: SindyArtifact = read_json(&sindy_path)?;
        if let Some(r) = s.rollout.as_ref().filter(|r| !r.trajectory.is_empty()) {
            let dim = r.x0.len();
            let mut header = vec!["step".to_string(), "t".to_string()];
            header.extend((0..dim).map(|k| format!("x{k}")));
            let header: Vec<&str> = header.iter().map(String::as_str).collect();
            let rows: Vec<Vec<String>> = r
                .trajectory
                .iter()
                .enumerate()
                .map(|(k, state)| {
                    let mut row = vec![k.to_string(), fmt(k as f64 * r.dt)];
                    row.extend(state.iter().map(|&v| fmt(v)));
                    row
                })
                .collect();
            write_table(&dir.join("rollout.csv"), &header, &rows)?;
            tables.push("rollout.csv".to_string());
        }
        Some(EvaluationSection {
            term_names: s.term_names,
            coefficients_raw: s.model_raw.coefficients,
            evaluation: s.evaluation,
            evaluation_raw: s.evaluation_raw,
            converged: s.converged,
            rollout_diverged_at: s.rollout.and_then(|r| r.diverged_at),
        })
    } else {
        None
    };

    let r = &eds.result;
    let report = Report {
        format_version: eds_core::FORMAT_VERSION,
        run_dir: dir.clone(),
        dataset: eds.input,
        curation: Curation {
            psi: SerInf(r.config.psi),
            representative_count: r.representative_ids.len(),
            auxiliary_count: r.auxiliary_ids.len(),
            violations: r.violations,
            duplicates: r.duplicates,
            per_pass: r.per_pass.clone(),
            verification: eds.verification,
        },
        metrics,
        errors: error_section,
        evaluation,
        tables,
    };
    write_json(&dir.join(REPORT), &report)?;
    println!("wrote {}", dir.join(REPORT).display());
    Ok(())
}

use std::path::Path;

use eds_core::datagen::{GeneratorSpec, LorenzParams, RectangleParams, StandardizationParams};
use eds_core::dataset::{sidecar_path, DatasetMeta};
use eds_core::eds::random_minor_subset;
use eds_core::lim::HessianOracle;
use eds_core::metrics::{empirical_cdrs, MetricsReport};
use eds_core::pipeline::{analytic_report, model_from_subset};

use crate::artifacts::*;
use crate::error::{CliError, CliResult};
use crate::{Command, Generator, MetricsArgs};

enum OracleChoice {
    Analytic(Generator),
    Empirical,
}

fn parse_oracle(s: &str) -> CliResult<OracleChoice> {
    use clap::ValueEnum;
    if s == "empirical" {
        return Ok(OracleChoice::Empirical);
    }
    let name = s.strip_prefix("analytic:").ok_or_else(|| {
        CliError::invalid(format!("--oracle must be `empirical` or `analytic:<generator>`, got {s:?}"))
    })?;
    Generator::from_str(name, false)
        .map(OracleChoice::Analytic)
        .map_err(|_| CliError::invalid(format!("unknown generator {name:?}")))
}

/// Generator settings for the oracle: the dataset's sidecar when it names
/// the same generator, otherwise defaults.
fn generator_spec(input: &Path, g: Generator, rows: usize) -> GeneratorSpec {
    let side = sidecar_path(input);
    if let Ok(meta) = DatasetMeta::load(&side) {
        if meta.generator == g.to_string() {
            if let Ok(spec) = serde_json::from_value(meta.params) {
                return spec;
            }
        }
        log::warn!("{} does not describe a {g} dataset; using defaults", side.display());
    }
    match g {
        Generator::Motivation => GeneratorSpec::Motivation { n_samples: rows },
        Generator::MotivationNoisy => GeneratorSpec::MotivationNoisy {
            n_samples: rows,
            noise_std: 0.0,
        },
        Generator::Lorenz => GeneratorSpec::Lorenz(LorenzParams::default()),
        Generator::Rectangles => GeneratorSpec::Rectangles {
            n_samples: rows,
            params: RectangleParams::default(),
        },
    }
}

pub fn run(cmd: &Command, a: &MetricsArgs) -> CliResult<()> {
    let oracle = parse_oracle(&a.oracle)?;
    let raw = load_dataset(&a.input)?;
    let (data, params, ids, source): (_, StandardizationParams, Vec<usize>, SubsetSource) =
        match (&a.subset, a.random_size) {
            (Some(path), _) => {
                let eds: EdsArtifact = read_json(path)?;
                eds.input.check(&a.input, &raw)?;
                let data = eds.standardization.apply(&raw);
                let source = SubsetSource::Representative {
                    result: path.clone(),
                };
                (data, eds.standardization, eds.result.representative_ids, source)
            }
            (None, Some(size)) => {
                let (data, params) = standardized(&a.input, &raw)?;
                let ids = random_minor_subset(raw.len(), size, a.random_seed)
                    .map_err(CliError::invalid)?;
                (data, params, ids, SubsetSource::Random { seed: a.random_seed })
            }
            (None, None) => {
                let (data, params) = standardized(&a.input, &raw)?;
                (data, params, (0..raw.len()).collect(), SubsetSource::All)
            }
        };
    let model = model_from_subset(&data, &ids).map_err(CliError::invalid)?;

    let report = match oracle {
        OracleChoice::Analytic(g) => {
            let spec = generator_spec(&a.input, g, raw.len());
            let oracle: HessianOracle = spec.oracle(Some(&params));
            analytic_report(&model, &oracle, a.probes, a.z, &a.oracle)
        }
        OracleChoice::Empirical => {
            let mut inside = vec![false; data.len()];
            for &i in &ids {
                inside[i] = true;
            }
            let held_out = (0..data.len())
                .filter(|&i| !inside[i])
                .map(|i| (data.x(i), data.y(i)));
            let (cdrs, skipped) = empirical_cdrs(&model, held_out).map_err(CliError::invalid)?;
            MetricsReport::from_regions("empirical", cdrs, a.z, skipped)
        }
    }
    .map_err(CliError::invalid)?;

    let artifact = MetricsArtifact {
        format_version: eds_core::FORMAT_VERSION,
        run_config: cmd.clone(),
        subset: source,
        subset_size: ids.len(),
        report,
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_json(&a.out, &artifact)?;
    let s = &artifact.report.stats;
    println!(
        "regions {}, mu_hat {:.4}, sigma_hat {:.4}, imbalance {:.4}",
        artifact.report.regions.len(),
        s.mu_hat,
        s.sigma_hat(),
        artifact.report.imbalance_score
    );
    Ok(())
}

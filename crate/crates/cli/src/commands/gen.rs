use std::path::PathBuf;

use eds_core::datagen::{GeneratorSpec, LorenzParams, RectangleParams, StandardizationParams};
use eds_core::dataset::{sidecar_path, DatasetMeta};

use crate::artifacts::{ensure_dir, save_dataset};
use crate::error::{CliError, CliResult};
use crate::{Command, GenArgs, Generator};

const DEFAULT_SAMPLES: usize = 5000;
const DEFAULT_NOISE_STD: f64 = 0.01;

fn spec_for(a: &GenArgs) -> CliResult<GeneratorSpec> {
    use Generator::*;
    let flags: [(&str, bool, &[Generator]); 7] = [
        ("n", a.n.is_some(), &[Motivation, MotivationNoisy, Rectangles]),
        ("noise-std", a.noise_std.is_some(), &[MotivationNoisy]),
        ("n-inits", a.n_inits.is_some(), &[Lorenz]),
        ("horizon", a.horizon.is_some(), &[Lorenz]),
        ("dt", a.dt.is_some(), &[Lorenz]),
        ("image-size", a.image_size.is_some(), &[Rectangles]),
        ("centroid", a.centroid, &[Rectangles]),
    ];
    for (flag, set, allowed) in flags {
        if set && !allowed.contains(&a.generator) {
            return Err(CliError::invalid(format!(
                "--{flag} does not apply to {}",
                a.generator
            )));
        }
    }
    let n = a.n.unwrap_or(DEFAULT_SAMPLES);
    if n == 0 {
        return Err(CliError::invalid("--n must be at least 1"));
    }
    Ok(match a.generator {
        Motivation => GeneratorSpec::Motivation { n_samples: n },
        MotivationNoisy => GeneratorSpec::MotivationNoisy {
            n_samples: n,
            noise_std: a.noise_std.unwrap_or(DEFAULT_NOISE_STD),
        },
        Lorenz => {
            let d = LorenzParams::default();
            GeneratorSpec::Lorenz(LorenzParams {
                n_inits: a.n_inits.unwrap_or(d.n_inits),
                horizon: a.horizon.unwrap_or(d.horizon),
                dt: a.dt.unwrap_or(d.dt),
                ..d
            })
        }
        Rectangles => GeneratorSpec::Rectangles {
            n_samples: n,
            params: RectangleParams {
                image_size: a.image_size.unwrap_or(RectangleParams::default().image_size),
                centroid: a.centroid,
            },
        },
    })
}

pub fn run(cmd: &Command, a: &GenArgs) -> CliResult<()> {
    let spec = spec_for(a)?;
    let data = spec.generate(a.seed).map_err(CliError::invalid)?;
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", spec.name())));
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    save_dataset(&out, &data)?;
    let meta = DatasetMeta {
        format_version: eds_core::FORMAT_VERSION,
        generator: spec.name().into(),
        seed: a.seed,
        params: serde_json::to_value(&spec).expect("spec serializes"),
        rows: data.len(),
        feature_dim: data.feature_dim(),
        label_dim: data.label_dim(),
        standardization: StandardizationParams::fit(&data).ok(),
        run: Some(serde_json::to_value(cmd).expect("config serializes")),
    };
    let side = sidecar_path(&out);
    meta.save(&side).map_err(|e| CliError::dataset(&side, e))?;
    println!("wrote {} rows to {}", data.len(), out.display());
    Ok(())
}

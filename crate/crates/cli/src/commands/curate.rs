use eds_core::eds::{run_eds, verify_representativeness, EdsConfig};

use crate::artifacts::*;
use crate::error::{CliError, CliResult};
use crate::{Command, EdsArgs};

pub fn run(cmd: &Command, a: &EdsArgs) -> CliResult<()> {
    let raw = load_dataset(&a.input)?;
    let (data, standardization) = standardized(&a.input, &raw)?;
    let config = EdsConfig {
        psi: a.psi,
        batch_size: a.batch,
        z: a.z,
        seed: a.seed,
        max_passes: a.max_passes,
        routing: a.routing.into(),
    };
    let result = run_eds(&data, &config).map_err(CliError::invalid)?;
    let verification = verify_representativeness(&data, &result).map_err(CliError::invalid)?;
    if result.violations > 0 {
        log::warn!(
            "{} auxiliary points exceed psi; see `violations` in the result",
            result.violations
        );
    }

    ensure_dir(&a.out_dir)?;
    let subset = |ids: &[usize]| raw.subset(ids).expect("ids come from this dataset");
    save_dataset(
        &a.out_dir.join(REPRESENTATIVE_CSV),
        &subset(&result.representative_ids),
    )?;
    save_dataset(&a.out_dir.join(AUXILIARY_CSV), &subset(&result.auxiliary_ids))?;
    let artifact = EdsArtifact {
        format_version: eds_core::FORMAT_VERSION,
        run_config: cmd.clone(),
        input: DatasetSummary::new(&a.input, &raw),
        standardization,
        result,
        verification,
    };
    write_json(&a.out_dir.join(EDS_RESULT), &artifact)?;
    println!(
        "representative {} / {}, violations {}",
        artifact.result.representative_ids.len(),
        raw.len(),
        artifact.result.violations
    );
    Ok(())
}

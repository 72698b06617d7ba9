use eds_core::datagen::StandardizationParams;
use eds_core::sysid::{evaluate, lasso_fit, rollout, LassoConfig, PolyLibrary, SysidError};

use crate::artifacts::*;
use crate::error::{CliError, CliResult};
use crate::{Command, SindyArgs};

pub fn run(cmd: &Command, a: &SindyArgs) -> CliResult<()> {
    let train = load_dataset(&a.train)?;
    let test = load_dataset(&a.test)?;
    let n = train.feature_dim();
    if train.label_dim() != n {
        return Err(CliError::invalid(format!(
            "{}: {n} features but {} labels; dynamics need one derivative per state",
            a.train.display(),
            train.label_dim()
        )));
    }
    if (test.feature_dim(), test.label_dim()) != (n, n) {
        return Err(CliError::invalid(format!(
            "{} has {} features and {} labels, training set has {n} and {n}",
            a.test.display(),
            test.feature_dim(),
            test.label_dim()
        )));
    }
    let params = match &a.standardize_on {
        Some(path) => {
            let source = load_dataset(path)?;
            if (source.feature_dim(), source.label_dim()) != (n, n) {
                return Err(CliError::invalid(format!(
                    "{} does not match the training dimensions",
                    path.display()
                )));
            }
            StandardizationParams::fit(&source)
                .map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?
        }
        None => standardized(&a.train, &train)?.1,
    };

    let library = PolyLibrary::new(n, a.degree);
    let config = LassoConfig {
        alpha: a.alpha,
        tol: a.tol,
        max_iter: a.max_iter,
    };
    let model = lasso_fit(&library, &params.apply(&train), &config).map_err(CliError::invalid)?;
    let model_raw = model.to_raw(&params);
    let evaluation = evaluate(&model, &params.apply(&test)).map_err(CliError::invalid)?;
    let evaluation_raw = evaluate(&model_raw, &test).map_err(CliError::invalid)?;

    let rollout = if a.rollout_steps > 0 && !test.is_empty() {
        let x0 = test.x(0).to_vec();
        let (trajectory, diverged_at) = match rollout(&model_raw, &x0, a.dt, a.rollout_steps) {
            Ok(t) => (t, None),
            Err(SysidError::NonFiniteState { step }) => (Vec::new(), Some(step)),
            Err(e) => return Err(CliError::invalid(e)),
        };
        Some(RolloutArtifact {
            x0,
            dt: a.dt,
            steps: a.rollout_steps,
            diverged_at,
            trajectory,
        })
    } else {
        None
    };

    let vars: Vec<String> = (0..n).map(|i| format!("x{i}")).collect();
    let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
    let artifact = SindyArtifact {
        format_version: eds_core::FORMAT_VERSION,
        run_config: cmd.clone(),
        train: DatasetSummary::new(&a.train, &train),
        test: DatasetSummary::new(&a.test, &test),
        standardization: params,
        term_names: library.term_names(&vars),
        converged: model.fit.converged(),
        model,
        model_raw,
        evaluation,
        evaluation_raw,
        rollout,
    };
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        ensure_dir(dir)?;
    }
    write_json(&a.out, &artifact)?;
    println!(
        "rmse {:.6}, max error {:.6} (standardized)",
        evaluation.rmse, evaluation.max_error
    );
    Ok(())
}

mod curate;
mod gen;
mod metrics;
mod report;
mod sindy;

use crate::error::CliResult;
use crate::Command;

pub fn run(cmd: &Command) -> CliResult<()> {
    match cmd {
        Command::Gen(a) => gen::run(cmd, a),
        Command::Eds(a) => curate::run(cmd, a),
        Command::Metrics(a) => metrics::run(cmd, a),
        Command::Sindy(a) => sindy::run(cmd, a),
        Command::Report(a) => report::run(a),
    }
}

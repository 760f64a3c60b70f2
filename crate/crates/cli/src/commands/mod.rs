//! One function per subcommand.

mod attack;
mod generate;
mod measure;
mod pipeline;
mod prune;
mod search;

pub use attack::attack;
pub use generate::generate;
pub use measure::measure;
pub use pipeline::pipeline;
pub use prune::prune;
pub use search::search;

use crate::CliError;

/// Turns the first failed trial into an error, keeping the rest.
fn first_error<T>(results: Vec<(Result<T, CliError>, f64)>) -> Result<Vec<(T, f64)>, CliError> {
    results.into_iter().map(|(r, ms)| r.map(|v| (v, ms))).collect()
}

use sqlab_core::Graph;

use crate::output::write_text;
use crate::{CliError, Context};

pub fn generate(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.generate, "generate")?;
    let seed = cfg.seed.unwrap_or_else(|| ctx.config.trial_seed(0));
    let g = Graph::gnp(cfg.n, cfg.p, seed).map_err(|e| CliError::Config(e.to_string()))?;
    let path = ctx.out.join(&cfg.file);
    write_text(&path, &g.to_text())?;
    println!("{}: {} vertices, {} edges", path.display(), g.n(), g.edge_count());
    Ok(())
}

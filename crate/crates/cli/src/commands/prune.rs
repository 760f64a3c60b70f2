use serde::Serialize;
use sqlab_core::blowup::{build_chain_random, forward_triangle_deficits, prune_to_gtilde, PruneReport, PruneSchedule};

use super::first_error;
use crate::output::{write_csv, write_json};
use crate::{CliError, Context};

#[derive(Serialize)]
struct Row {
    trial: usize,
    seed: u64,
    pair: usize,
    edges_before: usize,
    removed: usize,
    fraction: f64,
    ln_budget: f64,
    exceeds_budget: bool,
    idempotent: bool,
    postcondition_ok: bool,
    ms: f64,
}

pub fn prune(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.prune, "prune")?;
    let err = |e: sqlab_core::blowup::ChainError| CliError::Config(e.to_string());
    let eps0 = cfg.epsilon_0.unwrap_or(cfg.epsilon / 3.0);
    let schedule = PruneSchedule::new(cfg.k, cfg.n0, cfg.p0, cfg.alpha, eps0, cfg.eps_cor_ratio).map_err(err)?;
    let results = ctx.run_trials(|_, seed| -> Result<(PruneReport, bool, bool), CliError> {
        let chain = build_chain_random(cfg.k, cfg.n0, cfg.p0, seed).map_err(err)?;
        let (pruned, report) = prune_to_gtilde(&chain, cfg.epsilon, &schedule).map_err(err)?;
        let (_, again) = prune_to_gtilde(&pruned, cfg.epsilon, &schedule).map_err(err)?;
        let post = forward_triangle_deficits(&pruned, cfg.epsilon).iter().all(|&d| d == 0);
        Ok((report, again.total_removed == 0, post))
    });
    let results = first_error(results)?;
    let mut rows = Vec::new();
    let mut worst: f64 = 0.0;
    for (i, ((report, idempotent, post), ms)) in results.into_iter().enumerate() {
        worst = worst.max(report.max_fraction);
        let mut pairs = report.pairs;
        pairs.sort_by_key(|p| p.pair);
        for p in pairs {
            rows.push(Row {
                trial: i,
                seed: ctx.config.trial_seed(i),
                pair: p.pair,
                edges_before: p.edges_before,
                removed: p.removed,
                fraction: p.fraction,
                ln_budget: p.ln_budget,
                exceeds_budget: p.exceeds_budget,
                idempotent,
                postcondition_ok: post,
                ms,
            });
        }
    }
    write_csv(&ctx.out.join("prune.csv"), &rows)?;
    write_json(&ctx.out.join("prune_schedule.json"), &schedule)?;
    println!("{} row(s), largest per-pair removal fraction {worst:.4}", rows.len());
    if rows.iter().any(|r| !r.idempotent || !r.postcondition_ok) {
        return Err(CliError::Bar("pruning was not idempotent or left deficient edges".into()));
    }
    if let Some(bar) = cfg.max_fraction_bar {
        if worst > bar {
            return Err(CliError::Bar(format!("largest removal fraction {worst:.4} exceeds {bar}")));
        }
    }
    Ok(())
}

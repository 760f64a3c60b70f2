use serde::Serialize;
use sqlab_core::adversary::{apply, AttackReport};
use sqlab_core::rng::derive_seed;

use super::first_error;
use crate::output::{write_csv, write_json, write_text};
use crate::{CliError, Context};

#[derive(Serialize)]
struct Row {
    trial: usize,
    seed: u64,
    n: usize,
    adversary: String,
    edges_before: usize,
    edges_after: usize,
    edges_removed: usize,
    min_degree_before: usize,
    min_degree_after: usize,
    max_deleted_fraction: f64,
    ms: f64,
}

#[derive(Serialize)]
struct Entry {
    trial: usize,
    seed: u64,
    report: AttackReport,
}

pub fn attack(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.attack, "attack")?;
    let results = ctx.run_trials(|_, seed| {
        let g = cfg.graph.build(derive_seed(seed, 0), &ctx.config.base_dir)?;
        let spec = cfg.adversary.with_seed(derive_seed(seed, cfg.adversary.seed().unwrap_or(0)));
        apply(&g, &spec).map_err(|e| CliError::Config(e.to_string()))
    });
    let results = first_error(results)?;
    let single = results.len() == 1;
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for (i, (attack, ms)) in results.into_iter().enumerate() {
        let seed = ctx.config.trial_seed(i);
        let name = if single { "attacked.txt".to_string() } else { format!("attacked_{i:04}.txt") };
        write_text(&ctx.out.join(name), &attack.graph.to_text())?;
        let r = &attack.report;
        rows.push(Row {
            trial: i,
            seed,
            n: r.n,
            adversary: r.adversary.clone(),
            edges_before: r.edges_before,
            edges_after: r.edges_after,
            edges_removed: r.edges_removed,
            min_degree_before: r.min_degree_before,
            min_degree_after: r.min_degree_after,
            max_deleted_fraction: r.max_deleted_fraction,
            ms,
        });
        entries.push(Entry {
            trial: i,
            seed,
            report: attack.report,
        });
    }
    write_csv(&ctx.out.join("attack.csv"), &rows)?;
    write_json(&ctx.out.join("attack_report.json"), &entries)?;
    let removed: usize = rows.iter().map(|r| r.edges_removed).sum();
    println!("{} trial(s), {removed} edges removed in total", rows.len());
    Ok(())
}

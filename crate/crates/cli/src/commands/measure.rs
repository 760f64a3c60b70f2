use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;
use sqlab_core::blowup::{
    build_chain_random, count_square_paths_between, prune_to_gtilde, ChainPartition, PruneSchedule,
};
use sqlab_core::embedder::classify_good_edges;
use sqlab_core::rng::{derive_seed, seeded_rng};
use sqlab_core::EdgeState;

use super::first_error;
use crate::config::MeasureConfig;
use crate::output::{histogram, histogram_svg, integer_histogram, scatter_svg, write_csv, write_text};
use crate::{CliError, Context};

fn chain_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

pub fn measure(ctx: &Context) -> Result<(), CliError> {
    match ctx.config.section(&ctx.config.measure, "measure")? {
        MeasureConfig::Expansion {
            k,
            n0,
            p0,
            epsilon,
            prune,
            alpha,
            epsilon_0,
            eps_cor_ratio,
            samples,
            bar,
            trial_bar,
        } => {
            let schedule = PruneSchedule::new(*k, *n0, *p0, *alpha, epsilon_0.unwrap_or(epsilon / 3.0), *eps_cor_ratio).map_err(chain_err)?;
            expansion(ctx, *k, *n0, *p0, prune.then_some((*epsilon, &schedule)), *samples, *bar, *trial_bar)
        }
        MeasureConfig::Triangles {
            graph,
            edge_samples,
            sigmas,
            bar,
        } => triangles(ctx, graph, *edge_samples, *sigmas, *bar),
        MeasureConfig::PathCounts { k, n0, p0, pairs } => path_counts(ctx, *k, *n0, *p0, *pairs),
    }
}

#[derive(Serialize)]
struct ExpansionRow {
    trial: usize,
    seed: u64,
    k: usize,
    n0: usize,
    p0: f64,
    pruned: bool,
    removed: usize,
    samples: usize,
    min_fraction: f64,
    mean_fraction: f64,
    max_fraction: f64,
    meets_bar: Option<bool>,
    ms: f64,
}

#[derive(Serialize)]
struct FractionRow {
    trial: usize,
    index: usize,
    fraction: f64,
}

#[allow(clippy::too_many_arguments)]
fn expansion(
    ctx: &Context,
    k: usize,
    n0: usize,
    p0: f64,
    prune: Option<(f64, &PruneSchedule)>,
    samples: usize,
    bar: Option<f64>,
    trial_bar: Option<f64>,
) -> Result<(), CliError> {
    let results = ctx.run_trials(|_, seed| -> Result<(usize, Vec<f64>), CliError> {
        let mut chain = build_chain_random(k, n0, p0, seed).map_err(chain_err)?;
        let mut removed = 0;
        if let Some((eps, schedule)) = prune {
            let (pruned, report) = prune_to_gtilde(&chain, eps, schedule).map_err(chain_err)?;
            chain = pruned;
            removed = report.total_removed;
        }
        let good = classify_good_edges(&chain, bar.unwrap_or(0.52), samples, derive_seed(seed, 1)).map_err(chain_err)?;
        Ok((removed, good.fractions))
    });
    let results = first_error(results)?;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    let mut fraction_rows = Vec::new();
    for (i, ((removed, fractions), ms)) in results.into_iter().enumerate() {
        let min = fractions.iter().copied().fold(f64::INFINITY, f64::min);
        let max = fractions.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = fractions.iter().sum::<f64>() / fractions.len().max(1) as f64;
        rows.push(ExpansionRow {
            trial: i,
            seed: ctx.config.trial_seed(i),
            k,
            n0,
            p0,
            pruned: prune.is_some(),
            removed,
            samples: fractions.len(),
            min_fraction: if fractions.is_empty() { 0.0 } else { min },
            mean_fraction: mean,
            max_fraction: if fractions.is_empty() { 0.0 } else { max },
            meets_bar: bar.map(|b| !fractions.is_empty() && min >= b),
            ms,
        });
        fraction_rows.extend(fractions.iter().enumerate().map(|(index, &fraction)| FractionRow { trial: i, index, fraction }));
        all.extend(fractions);
    }
    let bins = histogram(&all, 0.0, 1.0, 20);
    write_csv(&ctx.out.join("expansion.csv"), &rows)?;
    write_csv(&ctx.out.join("expansion_fractions.csv"), &fraction_rows)?;
    write_csv(&ctx.out.join("expansion_hist.csv"), &bins)?;
    write_text(
        &ctx.out.join("expansion_hist.svg"),
        &histogram_svg(&bins, &format!("Expansion fractions, k = {k}, n0 = {n0}, p0 = {p0}"), "fraction of last-pair edges reached"),
    )?;
    let meeting = rows.iter().filter(|r| r.meets_bar == Some(true)).count();
    println!("{} trial(s), {meeting} meeting the bar", rows.len());
    if let (Some(b), Some(tb)) = (bar, trial_bar) {
        let rate = meeting as f64 / rows.len() as f64;
        if rate < tb {
            return Err(CliError::Bar(format!("{rate:.3} of trials have minimum fraction >= {b}, need {tb}")));
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct TriangleRow {
    trial: usize,
    seed: u64,
    n: usize,
    p: f64,
    samples: usize,
    expected: f64,
    band_lo: f64,
    band_hi: f64,
    within: usize,
    fraction_within: f64,
    min: usize,
    max: usize,
    meets_bar: Option<bool>,
    ms: f64,
}

fn triangles(ctx: &Context, spec: &crate::config::GraphSpec, edge_samples: usize, sigmas: f64, bar: Option<f64>) -> Result<(), CliError> {
    let results = ctx.run_trials(|_, seed| -> Result<(usize, f64, Vec<usize>), CliError> {
        let g = spec.build(derive_seed(seed, 0), &ctx.config.base_dir)?;
        let n = g.n();
        let p = spec
            .p()
            .unwrap_or_else(|| if n < 2 { 0.0 } else { 2.0 * g.edge_count() as f64 / (n * (n - 1)) as f64 });
        let edges: Vec<_> = g.edges().collect();
        let picked: Vec<_> = edges.choose_multiple(&mut seeded_rng(derive_seed(seed, 1)), edge_samples).copied().collect();
        let counts = picked.iter().map(|&(u, v)| g.common_neighbor_count(u, v)).collect();
        Ok((n, p, counts))
    });
    let results = first_error(results)?;
    let mut rows = Vec::new();
    let mut all = Vec::new();
    for (i, ((n, p, counts), ms)) in results.into_iter().enumerate() {
        let expected = n as f64 * p * p;
        let half = sigmas * expected.sqrt();
        let within = counts.iter().filter(|&&c| (c as f64 - expected).abs() <= half).count();
        let fraction_within = if counts.is_empty() { 0.0 } else { within as f64 / counts.len() as f64 };
        rows.push(TriangleRow {
            trial: i,
            seed: ctx.config.trial_seed(i),
            n,
            p,
            samples: counts.len(),
            expected,
            band_lo: expected - half,
            band_hi: expected + half,
            within,
            fraction_within,
            min: counts.iter().copied().min().unwrap_or(0),
            max: counts.iter().copied().max().unwrap_or(0),
            meets_bar: bar.map(|b| fraction_within >= b),
            ms,
        });
        all.extend(counts);
    }
    let bins = integer_histogram(&all);
    write_csv(&ctx.out.join("triangles.csv"), &rows)?;
    write_csv(&ctx.out.join("triangle_hist.csv"), &bins)?;
    write_text(&ctx.out.join("triangle_hist.svg"), &histogram_svg(&bins, "Triangles per sampled edge", "triangles"))?;
    println!("{} trial(s)", rows.len());
    if rows.iter().any(|r| r.meets_bar == Some(false)) {
        return Err(CliError::Bar("triangle concentration below the bar".into()));
    }
    Ok(())
}

/// `2 n0^(L-3) p0^(2L-3)` for square paths on `L` edges.
pub fn path_count_bound(length: usize, n0: usize, p0: f64) -> f64 {
    2.0 * (n0 as f64).powi(length as i32 - 3) * p0.powi(2 * length as i32 - 3)
}

#[derive(Serialize)]
struct CountRow {
    trial: usize,
    seed: u64,
    k: usize,
    n0: usize,
    p0: f64,
    pairs: usize,
    max_count: u128,
    mean_count: f64,
    /// Bound with the path length `k − 1` (edges of the path).
    bound_path_length: f64,
    /// Bound with the class count `k` plugged in literally.
    bound_class_count: f64,
    within_path_bound: bool,
    ms: f64,
}

fn sample_pairs(chain: &ChainPartition, pairs: usize, seed: u64) -> Vec<(EdgeState, EdgeState)> {
    let first = chain.pair_edges(0);
    let last = chain.pair_edges(chain.k() - 2);
    if first.is_empty() || last.is_empty() {
        return Vec::new();
    }
    let mut rng = seeded_rng(seed);
    (0..pairs)
        .map(|_| {
            let (a, b) = first[rng.gen_range(0..first.len())];
            let (c, d) = last[rng.gen_range(0..last.len())];
            (EdgeState { first: a, second: b }, EdgeState { first: c, second: d })
        })
        .collect()
}

fn path_counts(ctx: &Context, k: usize, n0: usize, p0: f64, pairs: usize) -> Result<(), CliError> {
    let results = ctx.run_trials(|_, seed| -> Result<Vec<u128>, CliError> {
        let chain = build_chain_random(k, n0, p0, seed).map_err(chain_err)?;
        sample_pairs(&chain, pairs, derive_seed(seed, 1))
            .into_iter()
            .map(|(e1, e2)| count_square_paths_between(&chain, e1, e2).map_err(chain_err))
            .collect()
    });
    let results = first_error(results)?;
    let bound_path_length = path_count_bound(k - 1, n0, p0);
    let bound_class_count = path_count_bound(k, n0, p0);
    let mut rows = Vec::new();
    for (i, (counts, ms)) in results.into_iter().enumerate() {
        let max_count = counts.iter().copied().max().unwrap_or(0);
        rows.push(CountRow {
            trial: i,
            seed: ctx.config.trial_seed(i),
            k,
            n0,
            p0,
            pairs: counts.len(),
            max_count,
            mean_count: counts.iter().map(|&c| c as f64).sum::<f64>() / counts.len().max(1) as f64,
            bound_path_length,
            bound_class_count,
            within_path_bound: (max_count as f64) <= bound_path_length,
            ms,
        });
    }
    write_csv(&ctx.out.join("path_counts.csv"), &rows)?;
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.trial as f64, r.max_count as f64)).collect();
    write_text(
        &ctx.out.join("path_counts.svg"),
        &scatter_svg(
            &points,
            Some((bound_path_length, "2 n0^(k-4) p0^(2k-5)")),
            &format!("Maximum square-path count, k = {k}, n0 = {n0}, p0 = {p0}"),
            "trial",
            "max count over sampled end-edge pairs",
        ),
    )?;
    let within = rows.iter().filter(|r| r.within_path_bound).count();
    println!("{} trial(s), {within} within the bound {bound_path_length:.1}", rows.len());
    Ok(())
}

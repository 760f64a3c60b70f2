use serde::Serialize;
use sqlab_core::embedder::{run_pipeline, Mode, PipelineOutcome};
use sqlab_core::rng::derive_seed;
use sqlab_core::square_walk::{is_square_cycle, is_square_path};
use sqlab_core::{Graph, Vertex};

use crate::config::attack_graph;
use crate::output::{ensure_dir, write_csv, write_json};
use crate::{CliError, Context};

#[derive(Serialize, Default)]
struct Row {
    trial: usize,
    seed: u64,
    n: usize,
    mode: String,
    adversary: String,
    min_degree: usize,
    r: usize,
    reduced_min_degree: usize,
    reduced_spanning: bool,
    windows: usize,
    stop: String,
    closing: String,
    truncated: usize,
    length: usize,
    ratio: f64,
    valid: bool,
    success: bool,
    error: String,
    ms: f64,
}

fn label<T: Serialize>(v: &T) -> String {
    serde_json::to_value(v)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// Re-validates the embedded object from the serialized trace.
fn certified(g: &Graph, trace_json: &serde_json::Value) -> bool {
    let result = &trace_json["result"];
    let Ok(seq) = serde_json::from_value::<Vec<Vertex>>(result["vertices"].clone()) else {
        return false;
    };
    match result["kind"].as_str() {
        Some("cycle") => is_square_cycle(g, &seq),
        Some("path") => is_square_path(g, &seq),
        _ => false,
    }
}

pub fn pipeline(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.pipeline, "pipeline")?;
    cfg.params.validate().map_err(|e| CliError::Config(e.to_string()))?;
    let probe = cfg.graph.build(derive_seed(ctx.config.trial_seed(0), 0), &ctx.config.base_dir)?;
    let mode = Mode::for_density(probe.n(), cfg.params.gamma, cfg.params.reference_p);
    if ctx.config.mode.is_some_and(|m| m != mode) {
        return Err(CliError::Config(format!(
            "requested mode {} but n = {}, gamma = {}, p = {} give {}",
            ctx.config.mode.map(Mode::label).unwrap_or_default(),
            probe.n(),
            cfg.params.gamma,
            cfg.params.reference_p,
            mode.label()
        )));
    }
    drop(probe);
    let traces = ctx.out.join("traces");
    if cfg.write_traces {
        ensure_dir(&traces)?;
    }
    let results = ctx.run_trials(|_, seed| -> Result<(Graph, String, Result<PipelineOutcome, String>), CliError> {
        let host = cfg.graph.build(derive_seed(seed, 0), &ctx.config.base_dir)?;
        let (g, adversary) = attack_graph(host, cfg.adversary.as_ref(), seed)?;
        let outcome = run_pipeline(&g, &cfg.params, derive_seed(seed, 2)).map_err(|e| e.to_string());
        Ok((g, adversary, outcome))
    });
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (i, (res, ms)) in results.into_iter().enumerate() {
        let (g, adversary, outcome) = res?;
        let mut row = Row {
            trial: i,
            seed: ctx.config.trial_seed(i),
            n: g.n(),
            mode: mode.label().into(),
            adversary,
            min_degree: g.min_degree(),
            ms,
            ..Row::default()
        };
        match outcome {
            Ok(o) => {
                let json = serde_json::to_value(&o.trace).expect("plain data");
                if cfg.write_traces {
                    write_json(&traces.join(format!("trace_{i:04}.json")), &json)?;
                }
                row.r = o.r;
                row.reduced_min_degree = o.reduced_min_degree;
                row.reduced_spanning = o.reduced_spanning;
                row.windows = o.trace.windows.len();
                row.stop = label(&o.trace.stop_reason);
                row.closing = label(&o.trace.closing);
                row.truncated = o.trace.truncated;
                row.length = o.length;
                row.ratio = o.ratio;
                row.valid = certified(&g, &json);
                row.success = o.success && row.valid;
            }
            Err(e) => {
                eprintln!("trial {i}: rejected: {e}");
                failures.push(format!("trial {i}: {e}"));
                row.error = e;
            }
        }
        rows.push(row);
    }
    write_csv(&ctx.out.join("pipeline.csv"), &rows)?;
    let successes = rows.iter().filter(|r| r.success).count();
    let rate = successes as f64 / rows.len() as f64;
    println!("{successes}/{} trial(s) produced a valid square cycle on >= (1 - nu) n vertices", rows.len());
    if let Some(first) = failures.first() {
        return Err(CliError::Bar(format!("{} trial(s) rejected, first: {first}", failures.len())));
    }
    if let Some(bar) = cfg.success_bar {
        if rate < bar {
            return Err(CliError::Bar(format!("success rate {rate:.3} below {bar}")));
        }
    }
    Ok(())
}

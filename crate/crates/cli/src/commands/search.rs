use serde::Serialize;
use sqlab_core::rng::derive_seed;
use sqlab_core::square_walk::{
    greedy_square_path, has_square_hamilton_cycle, is_square_cycle, is_square_path, longest_square_path_exact, HamiltonVerdict,
};
use sqlab_core::{Graph, Vertex};

use super::first_error;
use crate::config::{attack_graph, SearchMethod};
use crate::output::{write_csv, write_json};
use crate::{CliError, Context};

#[derive(Serialize)]
struct Row {
    trial: usize,
    seed: u64,
    n: usize,
    p: Option<f64>,
    adversary: String,
    method: &'static str,
    length: usize,
    valid: bool,
    verdict: &'static str,
    ms: f64,
}

#[derive(Serialize)]
struct Certificate {
    trial: usize,
    path: Vec<Vertex>,
    cycle: Option<Vec<Vertex>>,
}

struct Found {
    n: usize,
    adversary: String,
    path: Vec<Vertex>,
    cycle: Option<Vec<Vertex>>,
    verdict: &'static str,
    graph: Graph,
}

/// Re-checks a certificate from its serialized form.
fn certified(g: &Graph, cert: &Certificate) -> bool {
    let text = serde_json::to_string(cert).expect("plain data");
    let back: serde_json::Value = serde_json::from_str(&text).expect("just written");
    let seq = |v: &serde_json::Value| -> Option<Vec<Vertex>> { serde_json::from_value(v.clone()).ok() };
    let path_ok = seq(&back["path"]).is_some_and(|p| is_square_path(g, &p));
    let cycle_ok = match &back["cycle"] {
        serde_json::Value::Null => true,
        c => seq(c).is_some_and(|c| is_square_cycle(g, &c)),
    };
    path_ok && cycle_ok
}

pub fn search(ctx: &Context) -> Result<(), CliError> {
    let cfg = ctx.config.section(&ctx.config.search, "search")?;
    let results = ctx.run_trials(|_, seed| {
        let host = cfg.graph.build(derive_seed(seed, 0), &ctx.config.base_dir)?;
        let (g, adversary) = attack_graph(host, cfg.adversary.as_ref(), seed)?;
        let (path, cycle, verdict) = match cfg.method {
            SearchMethod::Exact => {
                let p = longest_square_path_exact(&g, cfg.node_budget);
                let h = has_square_hamilton_cycle(&g, cfg.node_budget);
                let cycle = match &h.verdict {
                    HamiltonVerdict::Found(c) => Some(c.vertices().to_vec()),
                    _ => None,
                };
                (p.path.into_vec(), cycle, h.verdict.label())
            }
            SearchMethod::Greedy => (greedy_square_path(&g, derive_seed(seed, 3), cfg.lookahead).into_vec(), None, "n/a"),
        };
        Ok(Found {
            n: g.n(),
            adversary,
            path,
            cycle,
            verdict,
            graph: g,
        })
    });
    let results = first_error(results)?;
    let mut rows = Vec::new();
    let mut certs = Vec::new();
    for (i, (f, ms)) in results.into_iter().enumerate() {
        let cert = Certificate {
            trial: i,
            path: f.path,
            cycle: f.cycle,
        };
        rows.push(Row {
            trial: i,
            seed: ctx.config.trial_seed(i),
            n: f.n,
            p: cfg.graph.p(),
            adversary: f.adversary,
            method: cfg.method.label(),
            length: cert.path.len(),
            valid: certified(&f.graph, &cert),
            verdict: f.verdict,
            ms,
        });
        certs.push(cert);
    }
    write_csv(&ctx.out.join("search.csv"), &rows)?;
    write_json(&ctx.out.join("search_certificates.json"), &certs)?;
    let invalid = rows.iter().filter(|r| !r.valid).count();
    println!("{} trial(s), {invalid} invalid certificate(s)", rows.len());
    if invalid > 0 {
        return Err(CliError::Bar(format!("{invalid} certificate(s) failed re-validation")));
    }
    Ok(())
}

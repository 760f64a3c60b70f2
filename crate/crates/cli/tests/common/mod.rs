//! Shared helpers for the integration targets: a brute-force square-path
//! oracle that shares no code with the library search, and a thin wrapper
//! around the compiled binary.

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sqlab_core::{Graph, Vertex};

/// Vertex count of a longest square path, by plain enumeration of every
/// square path (no bounds, no ordering heuristics).
pub fn oracle_longest_square_path(g: &Graph) -> usize {
    let n = g.n();
    if n == 0 {
        return 0;
    }
    let mut best = 1;
    let mut used = vec![false; n];
    let mut seq = Vec::with_capacity(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && g.has_edge(u, v) {
                used[u] = true;
                used[v] = true;
                seq.push(u);
                seq.push(v);
                extend_all(g, &mut seq, &mut used, &mut best);
                seq.clear();
                used[u] = false;
                used[v] = false;
            }
        }
    }
    best
}

fn extend_all(g: &Graph, seq: &mut Vec<Vertex>, used: &mut [bool], best: &mut usize) {
    *best = (*best).max(seq.len());
    let (a, b) = (seq[seq.len() - 2], seq[seq.len() - 1]);
    for w in 0..g.n() {
        if !used[w] && g.has_edge(a, w) && g.has_edge(b, w) {
            used[w] = true;
            seq.push(w);
            extend_all(g, seq, used, best);
            seq.pop();
            used[w] = false;
        }
    }
}

/// Whether some cyclic ordering of all vertices is a square cycle, by
/// enumerating square paths from vertex 0 and checking the wrap-around.
pub fn oracle_has_square_hamilton_cycle(g: &Graph) -> bool {
    let n = g.n();
    if n < 5 {
        return false;
    }
    let mut used = vec![false; n];
    used[0] = true;
    let mut seq = vec![0];
    (1..n).any(|v| {
        if !g.has_edge(0, v) {
            return false;
        }
        used[v] = true;
        seq.push(v);
        let found = close_hamilton(g, &mut seq, &mut used);
        seq.pop();
        used[v] = false;
        found
    })
}

fn close_hamilton(g: &Graph, seq: &mut Vec<Vertex>, used: &mut [bool]) -> bool {
    let n = g.n();
    if seq.len() == n {
        let (y, z) = (seq[n - 2], seq[n - 1]);
        return g.has_edge(z, seq[0]) && g.has_edge(y, seq[0]) && g.has_edge(z, seq[1]);
    }
    let (a, b) = (seq[seq.len() - 2], seq[seq.len() - 1]);
    for w in 0..n {
        if !used[w] && g.has_edge(a, w) && g.has_edge(b, w) {
            used[w] = true;
            seq.push(w);
            if close_hamilton(g, seq, used) {
                return true;
            }
            seq.pop();
            used[w] = false;
        }
    }
    false
}

pub fn sqlab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sqlab"))
}

/// Writes `config` to `dir/config.json` and runs `sqlab <cmd>` with output in
/// `dir/out`.
pub fn run(dir: &Path, cmd: &str, config: &serde_json::Value) -> (Output, PathBuf) {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out = dir.join("out");
    let output = sqlab()
        .arg(cmd)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .expect("binary runs");
    (output, out)
}

/// CSV text with the trailing wall-time column removed from every line.
pub fn strip_ms(csv_text: &str) -> String {
    let header = csv_text.lines().next().unwrap_or_default();
    assert!(header.ends_with(",ms"), "ms is not the last column: {header}");
    let mut out = String::new();
    for line in csv_text.lines() {
        let cut = line.rfind(',').map_or(line, |i| &line[..i]);
        out.push_str(cut);
        out.push('\n');
    }
    out
}

pub fn read_csv(path: &Path) -> Vec<std::collections::HashMap<String, String>> {
    let mut r = csv::Reader::from_path(path).unwrap();
    let headers = r.headers().unwrap().clone();
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            headers.iter().zip(rec.iter()).map(|(h, v)| (h.to_string(), v.to_string())).collect()
        })
        .collect()
}

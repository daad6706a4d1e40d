//! Plain-text edge-list format for [`SpaGraph`].
//!
//! ```text
//! spa v1 <variant> <A1> <A2> <d> <p> <n> <seed>
//! <i> <c_1> ... <c_d>        (n lines, i = 1..=n)
//! <j> <i>                    (one line per edge, j > i)
//! ```
//!
//! Floats use Rust's shortest round-trip formatting, so positions reload
//! bit-exactly and the output does not depend on locale.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::generator::{Edge, GraphError, SpaGraph, SpaParams};
use crate::geometry::{MetricConfig, Norm};

#[derive(Debug, Error)]
pub enum EdgeListError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn parse_err(line: usize, message: impl Into<String>) -> EdgeListError {
    EdgeListError::Parse { line, message: message.into() }
}

pub fn write_edge_list<W: Write>(graph: &SpaGraph, mut out: W) -> io::Result<()> {
    let p = graph.params();
    writeln!(
        out,
        "spa v1 {} {} {} {} {} {} {}",
        p.variant,
        p.a1,
        p.a2,
        p.metric.dim(),
        p.metric.norm(),
        p.n,
        p.seed
    )?;
    let mut line = String::new();
    for i in 1..=graph.n() {
        line.clear();
        line.push_str(&i.to_string());
        for c in graph.position(i) {
            line.push(' ');
            line.push_str(&c.to_string());
        }
        writeln!(out, "{line}")?;
    }
    for e in graph.edges() {
        writeln!(out, "{} {}", e.from, e.to)?;
    }
    out.flush()
}

pub fn read_edge_list<R: BufRead>(input: R) -> Result<SpaGraph, EdgeListError> {
    let mut lines = input.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 9 || fields[0] != "spa" || fields[1] != "v1" {
        return Err(parse_err(1, format!("bad header `{header}`")));
    }
    let num = |k: usize, name: &str| -> Result<f64, EdgeListError> {
        fields[k].parse().map_err(|_| parse_err(1, format!("bad {name} `{}`", fields[k])))
    };
    let int = |k: usize, name: &str| -> Result<u64, EdgeListError> {
        fields[k].parse().map_err(|_| parse_err(1, format!("bad {name} `{}`", fields[k])))
    };
    let variant = fields[2].parse()?;
    let a1 = num(3, "A1")?;
    let a2 = num(4, "A2")?;
    let dim = int(5, "dimension")? as usize;
    let norm: Norm = fields[6].parse().map_err(|e| parse_err(1, format!("{e}")))?;
    let n = int(7, "vertex count")? as usize;
    let seed = int(8, "seed")?;
    let metric = MetricConfig::new(dim, norm).map_err(GraphError::from)?;
    let params = SpaParams { a1, a2, n, metric, variant, seed };
    params.validate()?;

    let mut positions = Vec::with_capacity(n * dim);
    for expected in 1..=n {
        let (no, line) = lines.next().ok_or_else(|| parse_err(expected + 1, "missing position line"))?;
        let line = line?;
        let mut parts = line.split_whitespace();
        let id: usize = parts
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| parse_err(no, "missing vertex id"))?;
        if id != expected {
            return Err(parse_err(no, format!("expected vertex {expected}, found {id}")));
        }
        let before = positions.len();
        for part in parts {
            let c: f64 = part.parse().map_err(|_| parse_err(no, format!("bad coordinate `{part}`")))?;
            positions.push(c);
        }
        if positions.len() - before != dim {
            return Err(parse_err(no, format!("expected {dim} coordinates")));
        }
    }

    let mut edges = Vec::new();
    for (no, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace().map(str::parse::<usize>);
        match (parts.next(), parts.next(), parts.next()) {
            (Some(Ok(from)), Some(Ok(to)), None) => edges.push(Edge { from, to }),
            _ => return Err(parse_err(no, format!("bad edge line `{line}`"))),
        }
    }
    Ok(SpaGraph::from_parts(params, positions, edges)?)
}

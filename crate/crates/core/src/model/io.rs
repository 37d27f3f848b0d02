//! Plain-text instance format.
//!
//! ```text
//! levyglass-instance v1 n=<N> m=<m> alpha=<alpha> beta=<beta>
//! <i> <j> <w>
//! ...
//! ```
//!
//! Sites are 1-based with `i <= j`; numbers are shortest round-trip decimals.

use std::fmt::Write as _;

use super::{Edge, ModelInstance};
use crate::error::{Error, Result};

pub const INSTANCE_MAGIC: &str = "levyglass-instance v1";

pub fn write_instance(inst: &ModelInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{INSTANCE_MAGIC} n={} m={} alpha={} beta={}",
        inst.n_sites(),
        inst.norm_size(),
        inst.alpha(),
        inst.beta()
    );
    for e in inst.edges() {
        let _ = writeln!(out, "{} {} {}", e.i + 1, e.j + 1, e.w);
    }
    out
}

fn parse_err<T>(line: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, message: message.into() })
}

pub fn parse_instance(text: &str) -> Result<ModelInstance> {
    let mut lines = text.lines().enumerate();
    let Some((_, header)) = lines.next() else {
        return parse_err(1, "empty input");
    };
    let Some(fields) = header.strip_prefix(INSTANCE_MAGIC) else {
        return parse_err(1, format!("expected header starting with '{INSTANCE_MAGIC}'"));
    };
    let (mut n, mut m, mut alpha, mut beta) = (None, None, None, None);
    for field in fields.split_whitespace() {
        let Some((key, value)) = field.split_once('=') else {
            return parse_err(1, format!("malformed header field '{field}'"));
        };
        let bad = || Error::Parse { line: 1, message: format!("bad value for {key}: '{value}'") };
        match key {
            "n" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
            "m" => m = Some(value.parse::<usize>().map_err(|_| bad())?),
            "alpha" => alpha = Some(value.parse::<f64>().map_err(|_| bad())?),
            "beta" => beta = Some(value.parse::<f64>().map_err(|_| bad())?),
            _ => return parse_err(1, format!("unknown header key '{key}'")),
        }
    }
    let (Some(n), Some(m), Some(alpha), Some(beta)) = (n, m, alpha, beta) else {
        return parse_err(1, "header must define n, m, alpha and beta");
    };

    let mut edges = Vec::new();
    for (k, line) in lines {
        let lineno = k + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let parts: Vec<&str> = trimmed.split_whitespace().collect();
        if parts.len() != 3 {
            return parse_err(lineno, format!("expected 'i j w', got '{trimmed}'"));
        }
        let site = |s: &str| -> Result<u32> {
            match s.parse::<u32>() {
                Ok(v) if v >= 1 && (v as usize) <= n => Ok(v - 1),
                _ => parse_err(lineno, format!("site '{s}' outside 1..={n}")),
            }
        };
        let i = site(parts[0])?;
        let j = site(parts[1])?;
        if i > j {
            return parse_err(lineno, format!("edge ({}, {}) not in i <= j order", i + 1, j + 1));
        }
        let w = parts[2]
            .parse::<f64>()
            .map_err(|_| Error::Parse { line: lineno, message: format!("bad weight '{}'", parts[2]) })?;
        edges.push(Edge { i, j, w });
    }
    ModelInstance::new(n, edges, m, alpha, beta)
}

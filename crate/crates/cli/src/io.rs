//! Loading inputs and emitting outputs with the config digest attached.

use crate::config::Config;
use anyhow::{anyhow, Context, Result};
use disclab_core::graph::{coloring_from_json, graph_from_json, parse_coloring, parse_graph};
use disclab_core::rational::{self, Rational};
use disclab_core::{Coloring, Graph, TwoFactor};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// JSON input, unwrapping the output envelope of this tool when present.
fn as_json(text: &str) -> Option<Result<Value>> {
    if !text.trim_start().starts_with('{') {
        return None;
    }
    Some(serde_json::from_str::<Value>(text).map_err(Into::into).map(|v| match v.get("result") {
        Some(r) if v.get("config_digest").is_some() => r.clone(),
        _ => v,
    }))
}

pub fn load_graph(path: &Path) -> Result<Graph> {
    let text = read(path)?;
    let g = match as_json(&text) {
        Some(v) => graph_from_json(&v?),
        None => parse_graph(&text),
    };
    g.with_context(|| format!("in {}", path.display()))
}

pub fn load_coloring(path: &Path) -> Result<Coloring> {
    let text = read(path)?;
    let c = match as_json(&text) {
        Some(v) => coloring_from_json(&v?),
        None => parse_coloring(&text),
    };
    c.with_context(|| format!("in {}", path.display()))
}

/// `{"n", "cycles"}` JSON, or a graph file whose graph is 2-regular.
pub fn load_two_factor(path: &Path) -> Result<TwoFactor> {
    let text = read(path)?;
    let f = match as_json(&text) {
        Some(v) => TwoFactor::from_json(&v?),
        None => parse_graph(&text).and_then(|g| TwoFactor::from_graph(&g)),
    };
    f.with_context(|| format!("in {}", path.display()))
}

pub fn parse_q(s: &str) -> Result<Rational> {
    rational::parse(s).ok_or_else(|| anyhow!("not a rational: {s}"))
}

/// `a/b` as a pair of positive integers.
pub fn parse_ratio(s: &str) -> Result<(u64, u64)> {
    let r = parse_q(s)?;
    let num = r.numer().try_into().map_err(|_| anyhow!("{s}: numerator out of range"))?;
    let den = r.denom().try_into().map_err(|_| anyhow!("{s}: denominator out of range"))?;
    Ok((num, den))
}

/// `5`, `2..6` (inclusive), `100..1000:100` (step) or `2,4,8`.
pub fn parse_list(s: &str) -> Result<Vec<u64>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    if let Some((a, rest)) = s.split_once("..") {
        let (b, step) = match rest.split_once(':') {
            Some((b, st)) => (b, st.trim().parse::<u64>()?),
            None => (rest, 1),
        };
        if step == 0 {
            return Err(anyhow!("range step must be positive"));
        }
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        return Ok((a..=b).step_by(step as usize).collect());
    }
    s.split(',').map(|t| t.trim().parse::<u64>().map_err(|_| anyhow!("not an integer: {t}"))).collect()
}

pub struct Ctx {
    pub cfg: Config,
    pub seed: u64,
    pub json: bool,
    pub digest: String,
}

impl Ctx {
    pub fn new(cfg: Config, seed: Option<u64>, json: bool) -> Self {
        let seed = seed.unwrap_or(cfg.seed);
        let json = json || cfg.format == crate::config::Format::Json;
        let digest = cfg.digest();
        Ctx { cfg, seed, json, digest }
    }

    pub fn header_comment(&self) -> String {
        format!("# disc config={} seed={}", self.digest, self.seed)
    }

    /// Writes `text` to `out` or stdout.
    pub fn write(&self, out: Option<&PathBuf>, text: &str) -> Result<()> {
        match out {
            Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                let mut so = std::io::stdout().lock();
                so.write_all(text.as_bytes())?;
                Ok(())
            }
        }
    }

    /// JSON envelope, or `key: value` lines.
    pub fn render(&self, command: &str, result: &Value) -> String {
        if self.json {
            let env = json!({ "command": command, "config_digest": self.digest, "seed": self.seed, "result": result });
            let mut s = serde_json::to_string_pretty(&env).expect("serializable");
            s.push('\n');
            s
        } else {
            let mut s = format!("command: {command}\nconfig_digest: {}\nseed: {}\n", self.digest, self.seed);
            if let Value::Object(m) = result {
                for (k, v) in m {
                    let vs = match v {
                        Value::String(x) => x.clone(),
                        other => other.to_string(),
                    };
                    s.push_str(&format!("{k}: {vs}\n"));
                }
            } else {
                s.push_str(&format!("result: {result}\n"));
            }
            s
        }
    }

    pub fn emit(&self, out: Option<&PathBuf>, command: &str, result: &Value) -> Result<()> {
        self.write(out, &self.render(command, result))
    }
}

pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(ctx: &Ctx, header: &[&str]) -> Self {
        Csv { text: format!("{}\n{}\n", ctx.header_comment(), header.join(",")) }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        let line: Vec<String> = cells.iter().map(|c| escape(c.as_ref())).collect();
        self.text.push_str(&line.join(","));
        self.text.push('\n');
    }

    pub fn finish(self) -> String {
        self.text
    }
}

fn escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lists() {
        assert_eq!(parse_list("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert_eq!(parse_list("100..400:100").unwrap(), vec![100, 200, 300, 400]);
        assert_eq!(parse_list("3, 5").unwrap(), vec![3, 5]);
        assert!(parse_list("").unwrap().is_empty());
        assert!(parse_list("1..4:0").is_err());
    }

    #[test]
    fn ratios() {
        assert_eq!(parse_ratio("2/6").unwrap(), (1, 3));
        assert!(parse_ratio("-1/2").is_err());
    }

    #[test]
    fn csv_escapes() {
        assert_eq!(escape("a,b"), "\"a,b\"");
        assert_eq!(escape("x"), "x");
    }
}

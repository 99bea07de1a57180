//! Experiment specs: a `[experiment]` section naming the kind, a `[grid]` of
//! parameter lists and an optional `[assert]` section; grammar in the README.

use crate::commands::{complete_bipartite_coloring, embed_with};
use crate::config::digest_bytes;
use crate::io::{parse_list, parse_q, parse_ratio, Csv, Ctx};
use crate::{EmbedStrategy, ExperimentArgs};
use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use disclab_core::factors::solve_rho_lambda;
use disclab_core::graph::{write_coloring, write_graph};
use disclab_core::oracle::oracle_max_disc;
use disclab_core::rational::{self, q, qu, Rational};
use disclab_core::{discrepancy, random_coloring, random_regular_graph, seed, star_clique_path_guest, Coloring, Embedding, Graph};
use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde_json::json;
use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Kind {
    Lambda,
    Dominance,
    TightnessStar,
    TightnessRegular,
    DiscVsD,
}

impl Kind {
    fn parse(s: &str) -> Option<Kind> {
        Some(match s {
            "lambda" => Kind::Lambda,
            "dominance" => Kind::Dominance,
            "tightness-star" => Kind::TightnessStar,
            "tightness-regular" => Kind::TightnessRegular,
            "disc-vs-d" => Kind::DiscVsD,
            _ => return None,
        })
    }

    fn grid_keys(self) -> &'static [&'static str] {
        match self {
            Kind::Lambda => &["k"],
            Kind::Dominance => &["n", "seeds", "p", "guest_p", "strategies", "eps"],
            Kind::TightnessStar => &["n", "k", "eps", "seeds", "p", "strategy"],
            Kind::TightnessRegular => &["n", "d", "seeds", "samples"],
            Kind::DiscVsD => &["n", "d", "seeds", "p", "strategies", "eps"],
        }
    }

    fn header(self) -> &'static [&'static str] {
        match self {
            Kind::Lambda => &["cell", "k", "rho", "lambda", "interval"],
            Kind::Dominance => &["cell", "n", "seed", "input_digest", "e_f", "oracle", "best_strategy", "best_discrepancy", "strategies", "recounts_ok"],
            Kind::TightnessStar => &[
                "cell", "n", "k", "eps", "seed", "input_digest", "strategy", "e_f", "discrepancy", "star_red", "star_blue", "clique_red",
                "clique_blue", "path_red", "path_blue", "recount_ok",
            ],
            Kind::TightnessRegular => &["cell", "n", "d", "seed", "samples", "best_discrepancy", "sqrt_d_n", "ratio"],
            Kind::DiscVsD => &["cell", "n", "d", "seed", "input_digest", "strategy", "e_f", "discrepancy", "recount_ok"],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Assertion {
    RecountEqual,
    DriverLeOracle,
    LambdaLeBound,
    Expect { k: u64, rho: Rational, lambda: Rational },
    RatioLe(Rational),
}

#[derive(Clone, Debug)]
pub struct Spec {
    pub kind: Kind,
    pub name: String,
    pub grid: BTreeMap<String, String>,
    pub asserts: Vec<(usize, Assertion)>,
}

fn err<T>(line: usize, msg: impl std::fmt::Display) -> Result<T> {
    Err(anyhow!("spec line {line}: {msg}"))
}

impl Spec {
    pub fn parse(text: &str) -> Result<Spec> {
        let mut section = String::new();
        let mut kind = None;
        let mut name = String::new();
        let mut grid = BTreeMap::new();
        let mut raw_asserts = Vec::new();
        let mut grid_lines = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            if let Some(sec) = s.strip_prefix('[').and_then(|r| r.strip_suffix(']')) {
                match sec.trim() {
                    "experiment" | "grid" | "assert" => section = sec.trim().to_string(),
                    other => return err(line, format!("unknown section [{other}]")),
                }
                continue;
            }
            match section.as_str() {
                "experiment" => {
                    let (k, v) = s.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| anyhow!("spec line {line}: expected key = value"))?;
                    match k {
                        "kind" => kind = Some(Kind::parse(v).ok_or_else(|| anyhow!("spec line {line}: unknown kind {v}"))?),
                        "name" => name = v.to_string(),
                        _ => return err(line, format!("unknown experiment key {k}")),
                    }
                }
                "grid" => {
                    let (k, v) = s.split_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| anyhow!("spec line {line}: expected key = value"))?;
                    if grid.insert(k.to_string(), v.to_string()).is_some() {
                        return err(line, format!("duplicate grid key {k}"));
                    }
                    grid_lines.insert(k.to_string(), line);
                }
                "assert" => raw_asserts.push((line, s.to_string())),
                _ => return err(line, "content before any section"),
            }
        }
        let kind = kind.ok_or_else(|| anyhow!("spec: [experiment] kind is required"))?;
        for (k, line) in &grid_lines {
            if !kind.grid_keys().contains(&k.as_str()) {
                return err(*line, format!("grid key {k} not used by this kind (expected one of {})", kind.grid_keys().join(", ")));
            }
        }
        let mut asserts = Vec::new();
        for (line, s) in raw_asserts {
            let a = parse_assertion(&s).map_err(|e| anyhow!("spec line {line}: {e}"))?;
            let ok = match (&a, kind) {
                (Assertion::RecountEqual, k) => k != Kind::Lambda && k != Kind::TightnessRegular,
                (Assertion::DriverLeOracle, Kind::Dominance) => true,
                (Assertion::LambdaLeBound | Assertion::Expect { .. }, Kind::Lambda) => true,
                (Assertion::RatioLe(_), Kind::TightnessRegular) => true,
                _ => false,
            };
            if !ok {
                return err(line, format!("assertion not available for this kind: {s}"));
            }
            asserts.push((line, a));
        }
        // validate grid values eagerly so errors carry a line number
        let spec = Spec { kind, name, grid, asserts };
        for (k, line) in &grid_lines {
            spec.check_value(k).map_err(|e| anyhow!("spec line {line}: {k}: {e}"))?;
        }
        Ok(spec)
    }

    fn check_value(&self, key: &str) -> Result<()> {
        match key {
            "p" | "guest_p" | "eps" => {
                parse_ratio(&self.grid[key])?;
            }
            "strategies" | "strategy" => {
                self.strategies(key)?;
            }
            _ => {
                parse_list(&self.grid[key])?;
            }
        }
        Ok(())
    }

    fn list(&self, key: &str, default: &[u64]) -> Result<Vec<u64>> {
        match self.grid.get(key) {
            Some(v) => parse_list(v),
            None => Ok(default.to_vec()),
        }
    }

    fn seeds(&self) -> Result<u64> {
        let v = self.list("seeds", &[1])?;
        match v.as_slice() {
            [s] => Ok(*s),
            [] => Ok(0),
            _ => bail!("seeds is a count"),
        }
    }

    fn ratio(&self, key: &str, default: &str) -> Result<String> {
        let s = self.grid.get(key).map(String::as_str).unwrap_or(default);
        parse_ratio(s)?;
        Ok(s.to_string())
    }

    fn strategies(&self, key: &str) -> Result<Vec<EmbedStrategy>> {
        let Some(v) = self.grid.get(key) else {
            return Ok(vec![EmbedStrategy::Random, EmbedStrategy::Cut, EmbedStrategy::Auto]);
        };
        v.split(',')
            .map(|s| s.trim())
            .filter(|s| !s.is_empty())
            .map(|s| EmbedStrategy::from_str(s, true).map_err(|_| anyhow!("unknown strategy {s}")))
            .collect()
    }
}

fn parse_assertion(s: &str) -> Result<Assertion> {
    let mut words = s.split_whitespace();
    let head = words.next().unwrap_or("");
    Ok(match head {
        "recount_equal" => Assertion::RecountEqual,
        "driver_le_oracle" => Assertion::DriverLeOracle,
        "lambda_le_bound" => Assertion::LambdaLeBound,
        "expect" => {
            let mut kv = BTreeMap::new();
            for w in words {
                let (k, v) = w.split_once('=').ok_or_else(|| anyhow!("expect takes k=.. rho=.. lambda=.."))?;
                kv.insert(k, v);
            }
            let get = |k: &str| kv.get(k).copied().ok_or_else(|| anyhow!("expect is missing {k}="));
            Assertion::Expect { k: get("k")?.parse()?, rho: parse_q(get("rho")?)?, lambda: parse_q(get("lambda")?)? }
        }
        h if h.starts_with("ratio_le") => {
            let v = s.split_once('=').map(|(_, v)| v.trim()).ok_or_else(|| anyhow!("ratio_le = a/b"))?;
            Assertion::RatioLe(parse_q(v)?)
        }
        _ => bail!("unknown assertion {s}"),
    })
}

/// One output row plus the facts assertions inspect.
#[derive(Clone, Debug, Default)]
struct Row {
    cells: Vec<String>,
    recount_ok: bool,
    le_oracle: bool,
    lambda_ok: bool,
    k: u64,
    rho: Option<Rational>,
    lambda: Option<Rational>,
    /// `(disc, d, n)` for the tightness ratio.
    ratio: Option<(usize, usize, usize)>,
    wall_ms: u128,
}

fn digest(f: &Graph, c: &Coloring) -> String {
    let mut bytes = write_graph(f).into_bytes();
    bytes.extend(write_coloring(c).bytes());
    digest_bytes(&bytes)[..16].to_string()
}

fn strategy_name(s: EmbedStrategy) -> String {
    s.to_possible_value().expect("named").get_name().to_string()
}

struct Cell {
    index: usize,
    params: Vec<u64>,
    seed: u64,
}

fn cells(dims: &[Vec<u64>], base: u64) -> Vec<Cell> {
    let mut out = vec![Vec::new()];
    for d in dims {
        out = out.into_iter().flat_map(|p: Vec<u64>| d.iter().map(move |&x| [p.clone(), vec![x]].concat())).collect();
    }
    out.into_iter().enumerate().map(|(index, params)| Cell { index, params, seed: seed::mix(base, index as u64) }).collect()
}

fn run_cell(ctx: &Ctx, spec: &Spec, cell: &Cell) -> Result<Row> {
    let t0 = Instant::now();
    let idx = cell.index.to_string();
    let s = cell.seed;
    let mut row = match spec.kind {
        Kind::Lambda => {
            let r = solve_rho_lambda(cell.params[0] as usize)?;
            let bound = q(r.k as i64 - 1, 3);
            Row {
                cells: vec![idx, r.k.to_string(), rational::fmt(&r.rho), rational::fmt(&r.lambda), r.interval.to_string()],
                lambda_ok: r.lambda <= bound,
                k: r.k as u64,
                rho: Some(r.rho),
                lambda: Some(r.lambda),
                ..Row::default()
            }
        }
        Kind::Dominance => {
            let n = cell.params[0] as usize;
            let (pn, pd) = parse_ratio(&spec.ratio("p", "1/2")?)?;
            let (gn, gd) = parse_ratio(&spec.ratio("guest_p", "1/2")?)?;
            let eps = spec.ratio("eps", "1/10")?;
            let c = random_coloring(n, pn, pd, seed::mix(s, 1))?;
            let f = random_coloring(n, gn, gd, seed::mix(s, 2))?.red().clone();
            let o = oracle_max_disc(&f, &c)?;
            let mut parts = Vec::new();
            let (mut best, mut best_name) = (0usize, String::from("none"));
            let (mut recount_ok, mut le) = (true, true);
            for st in spec.strategies("strategies")? {
                let name = strategy_name(st);
                match embed_with(ctx, &f, &c, st, &eps, seed::mix(s, 3)) {
                    Ok((e, r, _)) => {
                        recount_ok &= discrepancy(&c, &f, &e)? == r;
                        le &= r.discrepancy <= o.report.discrepancy;
                        if r.discrepancy > best || best_name == "none" {
                            best = r.discrepancy;
                            best_name = name.clone();
                        }
                        parts.push(format!("{name}={}", r.discrepancy));
                    }
                    Err(_) => parts.push(format!("{name}=n/a")),
                }
            }
            Row {
                cells: vec![
                    idx,
                    n.to_string(),
                    s.to_string(),
                    digest(&f, &c),
                    f.edge_count().to_string(),
                    o.report.discrepancy.to_string(),
                    best_name,
                    best.to_string(),
                    parts.join(";"),
                    recount_ok.to_string(),
                ],
                recount_ok,
                le_oracle: le,
                ..Row::default()
            }
        }
        Kind::TightnessStar => {
            let (n, k) = (cell.params[0] as usize, cell.params[1] as usize);
            let eps_s = spec.ratio("eps", "1/2")?;
            let (en, ed) = parse_ratio(&eps_s)?;
            let (pn, pd) = parse_ratio(&spec.ratio("p", "1/2")?)?;
            let st = match spec.grid.get("strategy") {
                Some(_) => *spec.strategies("strategy")?.first().ok_or_else(|| anyhow!("empty strategy"))?,
                None => EmbedStrategy::Auto,
            };
            let f = star_clique_path_guest(n, en, ed, k)?;
            let c = random_coloring(n, pn, pd, seed::mix(s, 1))?;
            let (e, r, _) = embed_with(ctx, &f, &c, st, &eps_s, seed::mix(s, 3))?;
            let leaves = (ed - en) as usize * n / ed as usize;
            let c0 = leaves + 1;
            let component = |u: usize| if u < c0 { 0 } else if u < c0 + k { 1 } else { 2 };
            let mut counts = [[0usize; 2]; 3];
            for (u, v) in f.edges() {
                let red = c.is_red(e.image(u), e.image(v));
                counts[component(u)][usize::from(!red)] += 1;
            }
            let recount_ok = discrepancy(&c, &f, &e)? == r;
            let mut cells = vec![idx, n.to_string(), k.to_string(), eps_s, s.to_string(), digest(&f, &c), strategy_name(st)];
            cells.extend([f.edge_count(), r.discrepancy].iter().map(|x| x.to_string()));
            cells.extend(counts.iter().flat_map(|c| c.iter().map(|x| x.to_string())));
            cells.push(recount_ok.to_string());
            Row { cells, recount_ok, ..Row::default() }
        }
        Kind::TightnessRegular => {
            let (n, d) = (cell.params[0] as usize, cell.params[1] as usize);
            let samples = spec.list("samples", &[ctx.cfg.trials as u64])?.first().copied().unwrap_or(0) as usize;
            let c = complete_bipartite_coloring(n);
            let f = random_regular_graph(n, d, seed::mix(s, 2))?;
            let mut rng = seed::rng(seed::mix(s, 3));
            let mut map: Vec<usize> = (0..n).collect();
            let mut best = 0usize;
            for _ in 0..samples {
                map.shuffle(&mut rng);
                best = best.max(discrepancy(&c, &f, &Embedding::from_map(map.clone())?)?.discrepancy);
            }
            let sdn = (d as f64).sqrt() * n as f64;
            Row {
                cells: vec![idx, n.to_string(), d.to_string(), s.to_string(), samples.to_string(), best.to_string(), format!("{sdn:.4}"), format!("{:.6}", best as f64 / sdn)],
                ratio: Some((best, d, n)),
                ..Row::default()
            }
        }
        Kind::DiscVsD => {
            let (n, d, st_idx) = (cell.params[0] as usize, cell.params[1] as usize, cell.params[2] as usize);
            let st = spec.strategies("strategies")?[st_idx];
            let (pn, pd) = parse_ratio(&spec.ratio("p", "1/2")?)?;
            let eps = spec.ratio("eps", "1/10")?;
            let c = random_coloring(n, pn, pd, seed::mix(s, 1))?;
            let f = random_regular_graph(n, d, seed::mix(s, 2))?;
            let (e, r, _) = embed_with(ctx, &f, &c, st, &eps, seed::mix(s, 3))?;
            let recount_ok = discrepancy(&c, &f, &e)? == r;
            Row {
                cells: vec![
                    idx,
                    n.to_string(),
                    d.to_string(),
                    s.to_string(),
                    digest(&f, &c),
                    strategy_name(st),
                    f.edge_count().to_string(),
                    r.discrepancy.to_string(),
                    recount_ok.to_string(),
                ],
                recount_ok,
                ..Row::default()
            }
        }
    };
    row.wall_ms = t0.elapsed().as_millis();
    Ok(row)
}

fn grid_dims(spec: &Spec) -> Result<Vec<Vec<u64>>> {
    let seeds: Vec<u64> = (0..spec.seeds()?).collect();
    Ok(match spec.kind {
        Kind::Lambda => vec![spec.list("k", &[2, 3, 4, 5, 6])?],
        Kind::Dominance => vec![spec.list("n", &[8])?, seeds],
        Kind::TightnessStar => vec![spec.list("n", &[40])?, spec.list("k", &[3])?, seeds],
        Kind::TightnessRegular => vec![spec.list("n", &[40])?, spec.list("d", &[2, 4, 8])?, seeds],
        Kind::DiscVsD => {
            let strategies = (0..spec.strategies("strategies")?.len() as u64).collect();
            vec![spec.list("n", &[40])?, spec.list("d", &[2, 4, 8])?, strategies, seeds]
        }
    })
}

fn failures(spec: &Spec, rows: &[Row]) -> Vec<String> {
    let mut out = Vec::new();
    for (line, a) in &spec.asserts {
        match a {
            Assertion::Expect { k, rho, lambda } => match rows.iter().find(|r| r.k == *k) {
                None => out.push(format!("line {line}: expect k={k}: no such row")),
                Some(r) => {
                    if r.rho.as_ref() != Some(rho) || r.lambda.as_ref() != Some(lambda) {
                        out.push(format!(
                            "line {line}: expect k={k}: got rho={} lambda={}",
                            r.rho.as_ref().map(rational::fmt).unwrap_or_default(),
                            r.lambda.as_ref().map(rational::fmt).unwrap_or_default()
                        ));
                    }
                }
            },
            _ => {
                for (i, r) in rows.iter().enumerate() {
                    let ok = match a {
                        Assertion::RecountEqual => r.recount_ok,
                        Assertion::DriverLeOracle => r.le_oracle,
                        Assertion::LambdaLeBound => r.lambda_ok,
                        Assertion::RatioLe(c) => {
                            let (disc, d, n) = r.ratio.expect("tightness row");
                            qu(disc * disc) <= c * c * qu(d * n * n)
                        }
                        Assertion::Expect { .. } => unreachable!(),
                    };
                    if !ok {
                        let name = match a {
                            Assertion::RecountEqual => "recount_equal".to_string(),
                            Assertion::DriverLeOracle => "driver_le_oracle".to_string(),
                            Assertion::LambdaLeBound => "lambda_le_bound".to_string(),
                            Assertion::RatioLe(c) => format!("ratio_le {}", rational::fmt(c)),
                            Assertion::Expect { .. } => unreachable!(),
                        };
                        out.push(format!("line {line}: {name} failed at cell {i}"));
                    }
                }
            }
        }
    }
    out
}

pub fn run(ctx: &Ctx, a: ExperimentArgs) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&a.spec).with_context(|| format!("reading {}", a.spec.display()))?;
    let spec = Spec::parse(&text).with_context(|| format!("in {}", a.spec.display()))?;
    let spec_digest = digest_bytes(text.as_bytes());
    let cells = cells(&grid_dims(&spec)?, ctx.seed);
    let rows: Vec<Row> = cells.par_iter().map(|c| run_cell(ctx, &spec, c)).collect::<Result<Vec<_>>>()?;
    let fails = failures(&spec, &rows);

    let mut header: Vec<&str> = spec.kind.header().to_vec();
    if a.timing {
        header.push("wall_ms");
    }
    let with_time = |r: &Row| {
        let mut c = r.cells.clone();
        if a.timing {
            c.push(r.wall_ms.to_string());
        }
        c
    };
    if ctx.json {
        let recs: Vec<serde_json::Value> = rows
            .iter()
            .map(|r| serde_json::Value::Object(header.iter().zip(with_time(r)).map(|(h, c)| (h.to_string(), json!(c))).collect()))
            .collect();
        let v = json!({ "name": spec.name, "spec_digest": spec_digest, "rows": recs, "failures": fails });
        ctx.emit(a.out.as_ref(), "experiment", &v)?;
    } else {
        let mut csv = Csv::new(ctx, &header);
        for r in &rows {
            csv.row(&with_time(r));
        }
        let mut text = csv.finish();
        text.insert_str(text.find('\n').expect("comment line"), &format!(" spec={spec_digest}"));
        ctx.write(a.out.as_ref(), &text)?;
    }
    if fails.is_empty() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("{}", json!({ "failures": fails }));
        Ok(ExitCode::FAILURE)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_full_spec() {
        let s = Spec::parse("# demo\n[experiment]\nkind = lambda\nname = t\n[grid]\nk = 2..4\n[assert]\nlambda_le_bound\nexpect k=2 rho=1/3 lambda=1/3\n").unwrap();
        assert_eq!(s.kind, Kind::Lambda);
        assert_eq!(s.asserts.len(), 2);
        assert_eq!(grid_dims(&s).unwrap(), vec![vec![2, 3, 4]]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = Spec::parse("[experiment]\nkind = lambda\n[grid]\nd = 3\n").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        let e = Spec::parse("[experiment]\nkind = nope\n").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
        let e = Spec::parse("[experiment]\nkind = lambda\n[assert]\ndriver_le_oracle\n").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
        let e = Spec::parse("[experiment]\nkind = dominance\n[grid]\np = x\n").unwrap_err().to_string();
        assert!(e.contains("line 4"), "{e}");
    }

    #[test]
    fn cell_product_order() {
        let c = cells(&[vec![1, 2], vec![7, 8, 9]], 5);
        let p: Vec<Vec<u64>> = c.iter().map(|c| c.params.clone()).collect();
        assert_eq!(p, vec![vec![1, 7], vec![1, 8], vec![1, 9], vec![2, 7], vec![2, 8], vec![2, 9]]);
        assert!(cells(&[vec![], vec![1]], 0).is_empty());
    }
}

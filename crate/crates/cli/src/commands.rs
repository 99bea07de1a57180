//! Handlers for the single-shot subcommands.

use crate::io::{load_coloring, load_graph, load_two_factor, parse_list, parse_q, parse_ratio, Csv, Ctx};
use crate::{
    BisectArgs, BisectMode, ColoringKind, EmbedArgs, EmbedStrategy, FactorArgs, GbisMode, GenCmd, GraphKind, HypergeomArgs,
    LambdaArgs, OracleCmd, PSide, TwoFactorArgs, VerifyCmd,
};
use anyhow::{anyhow, bail, Context, Result};
use clap::ValueEnum;
use disclab_core::bisect::{
    disc_pm, disc_pm_heuristic, exhaustive_extremal_bisection, extremal_bisection, local_search_bisection, Bisection, Direction,
    DISC_PM_EXACT_MAX_N,
};
use disclab_core::cutembed::{cut_embed, greedy_expectation_embed};
use disclab_core::factors::{kk_factor_driver, solve_rho_lambda, two_factor_driver};
use disclab_core::graph::{
    bipartite_with_side, circulant_regular, coloring_to_json, graph_to_json, write_coloring, write_graph,
};
use disclab_core::oracle::{oracle_best_factor, oracle_max_disc, FactorKind};
use disclab_core::probkit::{
    check_anticoncentration, check_binomial_half, check_coupling_sweep, check_tails, grid_points, mc_random_matching,
    mc_sqrt_deviation, BoundCheck, PChoice,
};
use disclab_core::rational::{self, qu};
use disclab_core::seed;
use disclab_core::switchembed::{
    biased_host_bisection, certify_guest_independent, certify_guest_regular_with, certify_host, embed_bounded_degree,
    embed_regular, greedy_switch_embed, main_switch_embed, single_pair_switch_embed,
};
use disclab_core::{
    bipartite_construction, discrepancy, random_coloring, random_regular_graph, star_clique_path_guest, two_cliques_coloring,
    Bitset, Color, Coloring, DiscrepancyReport, Embedding, Graph, TwoFactor,
};
use num_traits::Signed;
use rand::seq::SliceRandom;
use serde_json::{json, Value};
use std::process::ExitCode;

fn need<T>(v: Option<T>, flag: &str) -> Result<T> {
    v.ok_or_else(|| anyhow!("--{flag} is required here"))
}

pub fn complete_bipartite_coloring(n: usize) -> Coloring {
    let mut red = Graph::new(n);
    for u in 0..n / 2 {
        for v in n / 2..n {
            red.add_edge(u, v);
        }
    }
    Coloring::from_red(red)
}

pub fn gen(ctx: &Ctx, cmd: GenCmd) -> Result<()> {
    match cmd {
        GenCmd::Graph(a) => {
            let n = a.n;
            let g = match a.kind {
                GraphKind::Cycle => Graph::cycle(n),
                GraphKind::Path => Graph::path(n),
                GraphKind::Matching => Graph::matching(n),
                GraphKind::Complete => Graph::complete(n),
                GraphKind::Cliques => Graph::disjoint_cliques(n, need(a.k, "k")?),
                GraphKind::Regular => random_regular_graph(n, need(a.d, "d")?, ctx.seed)?,
                GraphKind::Circulant => circulant_regular(n, need(a.d, "d")?),
                GraphKind::Random => {
                    let (pn, pd) = parse_ratio(&a.p)?;
                    random_coloring(n, pn, pd, ctx.seed)?.red().clone()
                }
                GraphKind::Star => {
                    let (en, ed) = parse_ratio(&a.eps)?;
                    star_clique_path_guest(n, en, ed, need(a.k, "k")?)?
                }
            };
            if ctx.json {
                ctx.emit(a.out.as_ref(), "gen graph", &graph_to_json(&g))
            } else {
                ctx.write(a.out.as_ref(), &format!("{}\n{}", ctx.header_comment(), write_graph(&g)))
            }
        }
        GenCmd::Coloring(a) => {
            let c = match a.kind {
                ColoringKind::Bipartite => {
                    let (rn, rd) = parse_ratio(&a.rho)?;
                    bipartite_construction(need(a.n, "n")?, rn, rd)?
                }
                ColoringKind::Side => {
                    let n = need(a.n, "n")?;
                    let x = need(a.x, "x")?;
                    if x > n {
                        bail!("--x {x} exceeds --n {n}");
                    }
                    bipartite_with_side(n, x)
                }
                ColoringKind::TwoCliques => two_cliques_coloring(need(a.m, "m")?, !a.blue_cliques)?,
                ColoringKind::CompleteBipartite => complete_bipartite_coloring(need(a.n, "n")?),
                ColoringKind::Random => {
                    let (pn, pd) = parse_ratio(&a.p)?;
                    random_coloring(need(a.n, "n")?, pn, pd, ctx.seed)?
                }
                ColoringKind::Red => Coloring::all(need(a.n, "n")?, true),
                ColoringKind::Blue => Coloring::all(need(a.n, "n")?, false),
            };
            if ctx.json {
                ctx.emit(a.out.as_ref(), "gen coloring", &coloring_to_json(&c))
            } else {
                ctx.write(a.out.as_ref(), &format!("{}\n{}", ctx.header_comment(), write_coloring(&c)))
            }
        }
        GenCmd::Twofactor(a) => {
            let lengths: Vec<usize> = parse_list(&a.lengths)?.into_iter().map(|x| x as usize).collect();
            let f = TwoFactor::from_lengths(&lengths)?;
            if ctx.json {
                ctx.emit(a.out.as_ref(), "gen twofactor", &f.to_json())
            } else {
                ctx.write(a.out.as_ref(), &format!("{}\n", serde_json::to_string(&f.to_json())?))
            }
        }
    }
}

fn report_json(r: &DiscrepancyReport) -> Value {
    serde_json::to_value(r).expect("serializable")
}

fn best_uniform(f: &Graph, c: &Coloring, samples: usize, seed: u64) -> Result<(Embedding, DiscrepancyReport)> {
    if samples == 0 {
        bail!("--sample must be positive");
    }
    let mut rng = seed::rng(seed);
    let mut map: Vec<usize> = (0..f.n()).collect();
    let mut best: Option<(Embedding, DiscrepancyReport)> = None;
    for _ in 0..samples {
        map.shuffle(&mut rng);
        let e = Embedding::from_map(map.clone())?;
        let r = discrepancy(c, f, &e)?;
        if best.as_ref().map_or(true, |(_, b)| r.discrepancy > b.discrepancy) {
            best = Some((e, r));
        }
    }
    Ok(best.expect("samples > 0"))
}

fn read_host_bisection(a: &EmbedArgs, c: &Coloring) -> Result<Bisection> {
    let path = need(a.gbis_file.as_ref(), "gbis-file")?;
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut xs = Vec::new();
    for tok in text.split_whitespace().filter(|t| !t.starts_with('#')) {
        let v: usize = tok.parse().map_err(|_| anyhow!("{}: not a vertex: {tok}", path.display()))?;
        if v >= c.n() {
            bail!("{}: vertex {v} out of range", path.display());
        }
        xs.push(v);
    }
    Ok(Bisection::from_side(c.red(), Bitset::from_iter(c.n(), xs))?)
}

/// Runs one embedding strategy; shared with the experiment harness.
pub fn embed_with(ctx: &Ctx, f: &Graph, c: &Coloring, strategy: EmbedStrategy, eps: &str, seed: u64) -> Result<(Embedding, DiscrepancyReport, Value)> {
    let params = ctx.cfg.switch_params();
    let eps = parse_q(eps)?;
    Ok(match strategy {
        EmbedStrategy::Random => {
            let mut best: Option<(Embedding, DiscrepancyReport, Value)> = None;
            for target in [Color::Red, Color::Blue] {
                let r = greedy_expectation_embed(f, c, target)?;
                if best.as_ref().map_or(true, |b| r.report.discrepancy > b.1.discrepancy) {
                    let detail = json!({ "target": target, "guarantee": rational::fmt(&r.guarantee), "target_count": r.target_count });
                    best = Some((r.embedding, r.report, detail));
                }
            }
            best.expect("two targets")
        }
        EmbedStrategy::Cut => {
            let gb = biased_host_bisection(c, &params, seed)?;
            cut_with(ctx, f, c, &gb, seed)?
        }
        EmbedStrategy::Auto => {
            let r = if f.regular_degree().is_some() {
                embed_regular(f, c, &eps, &params, seed)?
            } else {
                embed_bounded_degree(f, c, &eps, &params, seed)?
            };
            (r.embedding.clone(), r.report, serde_json::to_value(&r)?)
        }
        EmbedStrategy::Switch => {
            let hc = certify_host(c, &params.beta, seed::mix(seed, 100)).map_err(|h| anyhow!("host certificate: {h}"))?;
            let gc = if f.regular_degree().is_some() {
                certify_guest_regular_with(f, seed::mix(seed, 102), params.certificate_retries)?
            } else {
                certify_guest_independent(f, &f.greedy_independent_set())?
            };
            let r = main_switch_embed(f, &gc, c, &hc, &params, seed::mix(seed, 103))?;
            (r.embedding.clone(), r.report, serde_json::to_value(&r)?)
        }
        EmbedStrategy::SinglePair => {
            let r = single_pair_switch_embed(f, c, &eps, &params.delta)?;
            (r.embedding.clone(), r.report, serde_json::to_value(&r)?)
        }
        EmbedStrategy::GreedySwitch => {
            let hc = certify_host(c, &params.beta, seed::mix(seed, 100)).map_err(|h| anyhow!("host certificate: {h}"))?;
            let r = greedy_switch_embed(f, c, &hc, &params.delta)?;
            (r.embedding.clone(), r.report, serde_json::to_value(&r)?)
        }
    })
}

fn cut_with(ctx: &Ctx, f: &Graph, c: &Coloring, gb: &Bisection, seed: u64) -> Result<(Embedding, DiscrepancyReport, Value)> {
    let n = f.n();
    let mut best: Option<(Embedding, DiscrepancyReport, Value)> = None;
    for (i, dir) in [Direction::Max, Direction::Min].into_iter().enumerate() {
        let fb = extremal_bisection(f, dir, ctx.cfg.exhaustive_bisection_max, ctx.cfg.budget, seed::mix(seed, 10 + i as u64))?;
        let r = cut_embed(f, &fb, c, gb, seed)?;
        if best.as_ref().map_or(true, |b| r.report.discrepancy > b.1.discrepancy) {
            let x = gb.u_side.count();
            let dev_g = qu(gb.cut_size) - qu(x * (n - x)) / qu(2);
            let gamma_ok = dev_g.abs() >= &ctx.cfg.gamma * qu(n * n);
            let mut detail = serde_json::to_value(&r)?;
            detail["guest_direction"] = json!(if dir == Direction::Max { "max" } else { "min" });
            detail["host_gap_at_least_gamma_n2"] = json!(gamma_ok);
            best = Some((r.embedding.clone(), r.report, detail));
        }
    }
    Ok(best.expect("two directions"))
}

pub fn embed(ctx: &Ctx, a: EmbedArgs) -> Result<()> {
    let f = load_graph(&a.guest)?;
    let c = load_coloring(&a.coloring)?;
    if f.n() != c.n() {
        bail!("guest has {} vertices, coloring {}", f.n(), c.n());
    }
    let (e, r, detail) = match (a.strategy, a.sample, a.gbis) {
        (EmbedStrategy::Random, Some(s), _) => {
            let (e, r) = best_uniform(&f, &c, s, ctx.seed)?;
            (e, r, json!({ "samples": s }))
        }
        (EmbedStrategy::Cut, _, GbisMode::File) => {
            let gb = read_host_bisection(&a, &c)?;
            cut_with(ctx, &f, &c, &gb, ctx.seed)?
        }
        (s, _, _) => embed_with(ctx, &f, &c, s, &a.eps, ctx.seed)?,
    };
    let recount = discrepancy(&c, &f, &e)?;
    let out = json!({
        "strategy": a.strategy.to_possible_value().expect("named").get_name(),
        "discrepancy": r.discrepancy,
        "report": report_json(&r),
        "recount_ok": recount == r,
        "embedding": e.map(),
        "detail": detail,
    });
    ctx.emit(a.out.as_ref(), "embed", &out)
}

pub fn bisect(ctx: &Ctx, a: BisectArgs) -> Result<()> {
    let f = load_graph(&a.input)?;
    let dir: Direction = a.direction.parse()?;
    let b = match a.mode {
        BisectMode::Exact => exhaustive_extremal_bisection(&f, dir)?,
        BisectMode::Search => local_search_bisection(&f, dir, a.budget.unwrap_or(ctx.cfg.budget), ctx.seed)?,
    };
    let mut out = json!({
        "mode": if a.mode == BisectMode::Exact { "exact" } else { "search" },
        "u_side": b.u_side.to_vec(),
        "cut_size": b.cut_size,
        "deviation": rational::fmt(&b.deviation),
    });
    if a.disc {
        let d = if f.n() <= DISC_PM_EXACT_MAX_N { disc_pm(&f) } else { disc_pm_heuristic(&f, ctx.cfg.trials, ctx.seed) };
        out["disc_plus"] = json!(rational::fmt(&d.disc_plus));
        out["disc_minus"] = json!(rational::fmt(&d.disc_minus));
        out["disc_exact"] = json!(d.exact);
    }
    ctx.emit(a.out.as_ref(), "bisect", &out)
}

pub fn lambda(ctx: &Ctx, a: LambdaArgs) -> Result<()> {
    let ks = match (&a.k, a.max) {
        (Some(k), None) => parse_list(k)?,
        (None, Some(m)) => (2..=m).collect(),
        (None, None) => (2..=6).collect(),
        (Some(_), Some(_)) => bail!("give --k or --max, not both"),
    };
    let rows = ks.iter().map(|&k| solve_rho_lambda(k as usize)).collect::<disclab_core::Result<Vec<_>>>()?;
    if a.csv {
        let mut csv = Csv::new(ctx, &["k", "rho", "lambda", "interval"]);
        for r in &rows {
            csv.row(&[r.k.to_string(), rational::fmt(&r.rho), rational::fmt(&r.lambda), r.interval.to_string()]);
        }
        return ctx.write(a.out.as_ref(), &csv.finish());
    }
    if ctx.json {
        return ctx.emit(a.out.as_ref(), "lambda", &json!({ "rows": rows }));
    }
    let mut s = format!("{}\n", ctx.header_comment());
    s.push_str(&format!("{:>5} {:>14} {:>14}\n", "k", "rho", "lambda"));
    for r in &rows {
        s.push_str(&format!("{:>5} {:>14} {:>14}\n", r.k, rational::fmt(&r.rho), rational::fmt(&r.lambda)));
    }
    ctx.write(a.out.as_ref(), &s)
}

pub fn factor(ctx: &Ctx, a: FactorArgs) -> Result<()> {
    let c = load_coloring(&a.coloring)?;
    let run = kk_factor_driver(&c, a.k, &parse_q(&a.eps)?, ctx.seed)?;
    ctx.emit(a.out.as_ref(), "factor", &serde_json::to_value(&run)?)
}

pub fn twofactor(ctx: &Ctx, a: TwoFactorArgs) -> Result<()> {
    let f = load_two_factor(&a.guest)?;
    let c = load_coloring(&a.coloring)?;
    let run = two_factor_driver(&c, &f, &parse_q(&a.eps)?, ctx.seed)?;
    let recount = discrepancy(&c, &f.graph(), &run.embedding)?;
    let mut out = serde_json::to_value(&run)?;
    out["recount_ok"] = json!(recount == run.report);
    ctx.emit(a.out.as_ref(), "twofactor", &out)
}

fn check_json(b: &BoundCheck) -> Value {
    serde_json::to_value(b).expect("serializable")
}

fn status(holds: bool) -> ExitCode {
    if holds {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn hypergeom(ctx: &Ctx, a: &HypergeomArgs, name: &str, check: fn(&[disclab_core::probkit::HypergeomSpec]) -> disclab_core::Result<BoundCheck>) -> Result<ExitCode> {
    let eta = parse_q(&a.eta)?;
    let ks = parse_list(&a.k)?;
    let choice = if a.p == PSide::Half { PChoice::Half } else { PChoice::Eta };
    let points = grid_points(&eta, &ks, choice)?;
    let total = check(&points)?;
    if a.csv {
        let mut csv = Csv::new(ctx, &["n", "k", "p_count", "holds", "points", "min_margin", "min_margin_f64", "t", "label"]);
        for p in &points {
            let r = check(std::slice::from_ref(p))?;
            let (m, mf, t, l) = match &r.witness {
                Some(w) => (rational::fmt(&w.margin), format!("{:.6}", rational::to_f64(&w.margin)), w.t.map(|t| t.to_string()).unwrap_or_default(), w.label.clone()),
                None => Default::default(),
            };
            csv.row(&[p.n.to_string(), p.k.to_string(), p.p_count.to_string(), r.holds.to_string(), r.points_checked.to_string(), m, mf, t, l]);
        }
        ctx.write(a.out.as_ref(), &csv.finish())?;
    } else {
        ctx.emit(a.out.as_ref(), name, &check_json(&total))?;
    }
    Ok(status(total.holds))
}

pub fn verify(ctx: &Ctx, v: VerifyCmd) -> Result<ExitCode> {
    match v {
        VerifyCmd::Anticoncentration(a) => hypergeom(ctx, &a, "verify anticoncentration", check_anticoncentration),
        VerifyCmd::Tails(a) => hypergeom(ctx, &a, "verify tails", check_tails),
        VerifyCmd::Coupling { n_max, out } => {
            let r = check_coupling_sweep(n_max)?;
            ctx.emit(out.as_ref(), "verify coupling", &check_json(&r))?;
            Ok(status(r.holds))
        }
        VerifyCmd::Binomial { n_max, out } => {
            let r = check_binomial_half(n_max);
            ctx.emit(out.as_ref(), "verify binomial", &check_json(&r))?;
            Ok(status(r.holds))
        }
        VerifyCmd::Matching { n, p, k, eta, trials, out } => {
            let r = mc_random_matching(n, p, k, &parse_q(&eta)?, trials, ctx.seed)?;
            ctx.emit(out.as_ref(), "verify matching", &serde_json::to_value(&r)?)?;
            Ok(status(r.holds))
        }
        VerifyCmd::Sqrtdev { n, p, q, a, b, eta, trials, csv, out } => {
            let r = mc_sqrt_deviation(n, p, q, a, b, &parse_q(&eta)?, trials, ctx.seed)?;
            let holds = r.rho_lower > 0.0;
            if csv {
                let mut t = Csv::new(ctx, &["rho", "tail"]);
                for (rho, tail) in &r.curve {
                    t.row(&[format!("{rho:.2}"), format!("{tail:.6}")]);
                }
                ctx.write(out.as_ref(), &t.finish())?;
            } else {
                let v = json!({
                    "trials": r.trials,
                    "rho_hat": r.rho_hat,
                    "rho_lower": r.rho_lower,
                    "holds": holds,
                    "curve": r.curve,
                    "histogram": r.histogram,
                });
                ctx.emit(out.as_ref(), "verify sqrtdev", &v)?;
            }
            Ok(status(holds))
        }
    }
}

pub fn oracle(ctx: &Ctx, o: OracleCmd) -> Result<()> {
    match o {
        OracleCmd::Maxdisc { guest, coloring, out } => {
            let f = load_graph(&guest)?;
            let c = load_coloring(&coloring)?;
            if f.n() > ctx.cfg.oracle_max_n {
                bail!("n = {} exceeds oracle_max_n = {}", f.n(), ctx.cfg.oracle_max_n);
            }
            let r = oracle_max_disc(&f, &c)?;
            let v = json!({
                "discrepancy": r.report.discrepancy,
                "report": report_json(&r.report),
                "embedding": r.embedding.map(),
                "nodes": r.nodes,
            });
            ctx.emit(out.as_ref(), "oracle maxdisc", &v)
        }
        OracleCmd::Factor { k, guest, coloring, out } => {
            let c = load_coloring(&coloring)?;
            let kind = match (k, guest) {
                (Some(k), None) => FactorKind::Kk(k),
                (None, Some(g)) => FactorKind::Shape(load_two_factor(&g)?),
                _ => bail!("give exactly one of --k and --guest"),
            };
            let r = oracle_best_factor(&c, &kind)?;
            ctx.emit(out.as_ref(), "oracle factor", &serde_json::to_value(&r)?)
        }
    }
}

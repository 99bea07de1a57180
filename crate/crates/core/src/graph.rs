//! Graphs, colorings of `K_n`, embeddings and discrepancy evaluation.

use crate::bitset::Bitset;
use crate::error::{param, Error, Result};
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

/// Simple undirected graph on `0..n` stored as adjacency bitsets.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Graph {
    n: usize,
    adj: Vec<Bitset>,
    edge_count: usize,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Graph { n, adj: vec![Bitset::new(n); n], edge_count: 0 }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Graph::new(n);
        for u in 0..n {
            for v in u + 1..n {
                g.add_edge(u, v);
            }
        }
        g
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Graph::new(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::Parameter(format!("edge ({u},{v}) out of range for n={n}")));
            }
            if u == v {
                return Err(Error::Parameter(format!("self-loop at {u}")));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn cycle(n: usize) -> Self {
        let mut g = Graph::new(n);
        if n >= 3 {
            for i in 0..n {
                g.add_edge(i, (i + 1) % n);
            }
        } else if n == 2 {
            g.add_edge(0, 1);
        }
        g
    }

    pub fn path(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in 1..n {
            g.add_edge(i - 1, i);
        }
        g
    }

    /// Perfect matching `{2i, 2i+1}`.
    pub fn matching(n: usize) -> Self {
        let mut g = Graph::new(n);
        for i in (0..n.saturating_sub(1)).step_by(2) {
            g.add_edge(i, i + 1);
        }
        g
    }

    /// Disjoint cliques of size `k` on consecutive vertex blocks.
    pub fn disjoint_cliques(n: usize, k: usize) -> Self {
        let mut g = Graph::new(n);
        if k == 0 {
            return g;
        }
        for b in (0..n).step_by(k) {
            let end = (b + k).min(n);
            for u in b..end {
                for v in u + 1..end {
                    g.add_edge(u, v);
                }
            }
        }
        g
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Inserts `uv`; returns false when already present.
    pub fn add_edge(&mut self, u: usize, v: usize) -> bool {
        assert!(u != v && u < self.n && v < self.n);
        if self.adj[u].contains(v) {
            return false;
        }
        self.adj[u].insert(v);
        self.adj[v].insert(u);
        self.edge_count += 1;
        true
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        if !self.has_edge(u, v) {
            return false;
        }
        self.adj[u].remove(v);
        self.adj[v].remove(u);
        self.edge_count -= 1;
        true
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &Bitset {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].count()
    }

    pub fn degrees(&self) -> Vec<usize> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    /// Lowest-index vertex of maximum degree.
    pub fn max_degree_vertex(&self) -> Option<usize> {
        let mut best: Option<(usize, usize)> = None;
        for v in 0..self.n {
            let d = self.degree(v);
            if best.map_or(true, |(_, bd)| d > bd) {
                best = Some((v, d));
            }
        }
        best.map(|b| b.0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    pub fn has_isolated_vertex(&self) -> bool {
        (0..self.n).any(|v| self.adj[v].is_empty())
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| self.adj[u].iter().filter(move |&v| v > u).map(move |v| (u, v)))
    }

    pub fn complement(&self) -> Graph {
        let mut adj = Vec::with_capacity(self.n);
        for v in 0..self.n {
            let mut b = self.adj[v].complement();
            b.remove(v);
            adj.push(b);
        }
        let total = self.n * self.n.saturating_sub(1) / 2;
        Graph { n: self.n, adj, edge_count: total - self.edge_count }
    }

    /// Edges inside `s`.
    pub fn edges_within(&self, s: &Bitset) -> usize {
        s.iter().map(|v| self.adj[v].intersection_count(s)).sum::<usize>() / 2
    }

    /// Edges with one end in `s` and the other in `t` (`s`, `t` disjoint).
    pub fn edges_between(&self, s: &Bitset, t: &Bitset) -> usize {
        s.iter().map(|v| self.adj[v].intersection_count(t)).sum()
    }

    /// Number of neighbors of `v` inside `s`.
    #[inline]
    pub fn degree_into(&self, v: usize, s: &Bitset) -> usize {
        self.adj[v].intersection_count(s)
    }

    /// Subgraph induced on `verts`, relabelled `0..verts.len()` in the given order.
    pub fn induced(&self, verts: &[usize]) -> Graph {
        let mut g = Graph::new(verts.len());
        for (i, &a) in verts.iter().enumerate() {
            for (j, &b) in verts.iter().enumerate().skip(i + 1) {
                if self.has_edge(a, b) {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// Image of this graph under `map` (vertex `v` goes to `map[v]`).
    pub fn relabel(&self, map: &[usize]) -> Graph {
        let mut g = Graph::new(self.n);
        for (u, v) in self.edges() {
            g.add_edge(map[u], map[v]);
        }
        g
    }

    /// Greedy maximal independent set scanning vertices in index order.
    pub fn greedy_independent_set(&self) -> Bitset {
        let mut set = Bitset::new(self.n);
        let mut blocked = Bitset::new(self.n);
        for v in 0..self.n {
            if !blocked.contains(v) {
                set.insert(v);
                blocked.insert(v);
                blocked.union_with(&self.adj[v]);
            }
        }
        set
    }

    pub fn is_independent(&self, s: &Bitset) -> bool {
        s.iter().all(|v| self.adj[v].intersection_count(s) == 0)
    }

    /// Connected components, each listed in increasing vertex order.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut stack = vec![s];
            while let Some(u) = stack.pop() {
                for w in self.adj[u].iter() {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        stack.push(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// Edge color: red is `+1`, blue is `-1`.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Blue,
}

impl Color {
    pub fn other(self) -> Color {
        match self {
            Color::Red => Color::Blue,
            Color::Blue => Color::Red,
        }
    }

    pub fn is_red(self) -> bool {
        self == Color::Red
    }
}

impl std::str::FromStr for Color {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red" => Ok(Color::Red),
            "blue" => Ok(Color::Blue),
            _ => Err(Error::Parameter(format!("color must be red|blue, got {s}"))),
        }
    }
}

/// A red/blue coloring of `E(K_n)`. Only red edges are stored.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Coloring {
    red: Graph,
}

impl Coloring {
    pub fn from_red(red: Graph) -> Self {
        Coloring { red }
    }

    pub fn all(n: usize, red: bool) -> Self {
        Coloring { red: if red { Graph::complete(n) } else { Graph::new(n) } }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.red.n()
    }

    #[inline]
    pub fn red(&self) -> &Graph {
        &self.red
    }

    pub fn blue(&self) -> Graph {
        self.red.complement()
    }

    /// Graph of edges of the given color (`true` = red).
    pub fn color_graph(&self, red: bool) -> Graph {
        if red {
            self.red.clone()
        } else {
            self.blue()
        }
    }

    #[inline]
    pub fn is_red(&self, u: usize, v: usize) -> bool {
        self.red.has_edge(u, v)
    }

    pub fn graph_of(&self, c: Color) -> Graph {
        self.color_graph(c.is_red())
    }

    pub fn count_of(&self, c: Color) -> usize {
        if c.is_red() {
            self.red_count()
        } else {
            self.blue_count()
        }
    }

    pub fn red_count(&self) -> usize {
        self.red.edge_count()
    }

    pub fn blue_count(&self) -> usize {
        let n = self.n();
        n * n.saturating_sub(1) / 2 - self.red_count()
    }

    pub fn swapped(&self) -> Coloring {
        Coloring { red: self.red.complement() }
    }

    /// Coloring induced on `verts`, relabelled in the given order.
    pub fn induced(&self, verts: &[usize]) -> Coloring {
        Coloring { red: self.red.induced(verts) }
    }
}

/// Bijection from guest vertices to host vertices.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Embedding {
    map: Vec<usize>,
    #[serde(skip)]
    inverse: Vec<usize>,
}

impl Embedding {
    pub fn identity(n: usize) -> Self {
        Embedding { map: (0..n).collect(), inverse: (0..n).collect() }
    }

    pub fn from_map(map: Vec<usize>) -> Result<Self> {
        let n = map.len();
        let mut inverse = vec![usize::MAX; n];
        for (g, &h) in map.iter().enumerate() {
            if h >= n {
                return Err(Error::InvalidEmbedding(format!("image {h} of {g} out of range")));
            }
            if inverse[h] != usize::MAX {
                return Err(Error::InvalidEmbedding(format!("host vertex {h} hit twice")));
            }
            inverse[h] = g;
        }
        Ok(Embedding { map, inverse })
    }

    pub fn from_inverse(inverse: Vec<usize>) -> Result<Self> {
        let e = Embedding::from_map(inverse)?;
        Ok(Embedding { map: e.inverse, inverse: e.map })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.map.len()
    }

    #[inline]
    pub fn image(&self, v: usize) -> usize {
        self.map[v]
    }

    #[inline]
    pub fn preimage(&self, h: usize) -> usize {
        self.inverse[h]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn inverse(&self) -> &[usize] {
        &self.inverse
    }

    /// Embedding that swaps the images of guest vertices `a` and `b`.
    pub fn swapped(&self, a: usize, b: usize) -> Embedding {
        let mut map = self.map.clone();
        map.swap(a, b);
        Embedding::from_map(map).expect("swap keeps bijection")
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub struct DiscrepancyReport {
    pub mono_plus: usize,
    pub mono_minus: usize,
    pub discrepancy: usize,
    pub e_f: usize,
}

impl DiscrepancyReport {
    pub fn from_counts(red: usize, e_f: usize) -> Self {
        let blue = e_f - red;
        DiscrepancyReport { mono_plus: red, mono_minus: blue, discrepancy: red.abs_diff(blue), e_f }
    }

    pub fn count_of(&self, c: Color) -> usize {
        if c.is_red() {
            self.mono_plus
        } else {
            self.mono_minus
        }
    }

    /// Count of the majority color.
    pub fn majority(&self) -> usize {
        self.mono_plus.max(self.mono_minus)
    }
}

/// Red/blue counts of the image of `guest` under `emb`.
pub fn discrepancy(coloring: &Coloring, guest: &Graph, emb: &Embedding) -> Result<DiscrepancyReport> {
    if guest.n() != coloring.n() {
        return Err(Error::Dimension(format!("guest has {} vertices, coloring {}", guest.n(), coloring.n())));
    }
    if emb.n() != guest.n() {
        return Err(Error::InvalidEmbedding(format!("map length {} != n {}", emb.n(), guest.n())));
    }
    Ok(discrepancy_unchecked(coloring, guest, emb))
}

pub(crate) fn discrepancy_unchecked(coloring: &Coloring, guest: &Graph, emb: &Embedding) -> DiscrepancyReport {
    let red = guest.edges().filter(|&(u, v)| coloring.is_red(emb.image(u), emb.image(v))).count();
    DiscrepancyReport::from_counts(red, guest.edge_count())
}

/// `X = {0..⌊ρn⌋-1}`; every edge touching `X` is red, edges inside `Y` are blue.
pub fn bipartite_construction(n: usize, rho_num: u64, rho_den: u64) -> Result<Coloring> {
    if rho_den == 0 || rho_num > rho_den {
        return param(format!("ratio {rho_num}/{rho_den} outside [0,1]"));
    }
    let x = (rho_num as u128 * n as u128 / rho_den as u128) as usize;
    Ok(bipartite_with_side(n, x))
}

/// Bipartite construction with an explicit red side `{0..x-1}`.
pub fn bipartite_with_side(n: usize, x: usize) -> Coloring {
    let mut red = Graph::new(n);
    for u in 0..x {
        for v in u + 1..n {
            red.add_edge(u, v);
        }
    }
    Coloring::from_red(red)
}

/// Two disjoint `K_m` on `{0..m-1}` and `{m..2m-1}`, red when `red_cliques`.
pub fn two_cliques_coloring(m: usize, red_cliques: bool) -> Result<Coloring> {
    if m == 0 {
        return param("two_cliques_coloring needs m >= 1");
    }
    let red = Graph::disjoint_cliques(2 * m, m);
    let c = Coloring::from_red(red);
    Ok(if red_cliques { c } else { c.swapped() })
}

/// Each pair independently red with probability `p_num/p_den`.
pub fn random_coloring(n: usize, p_num: u64, p_den: u64, seed: u64) -> Result<Coloring> {
    if p_den == 0 || p_num > p_den {
        return param(format!("probability {p_num}/{p_den} outside [0,1]"));
    }
    let mut rng = seed::rng(seed);
    let mut red = Graph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_range(0..p_den) < p_num {
                red.add_edge(u, v);
            }
        }
    }
    Ok(Coloring::from_red(red))
}

const PAIRING_RESTARTS: usize = 1000;

/// Simple `d`-regular graph via the pairing model with restart; falls back to
/// random edge switches from a circulant graph after repeated collisions.
pub fn random_regular_graph(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if d >= n.max(1) && !(n == 0 && d == 0) || (n * d) % 2 == 1 {
        return Err(Error::Infeasible(format!("no simple {d}-regular graph on {n} vertices")));
    }
    let mut rng = seed::rng(seed);
    let mut points: Vec<usize> = (0..n * d).map(|i| i / d.max(1)).collect();
    'restart: for _ in 0..PAIRING_RESTARTS {
        points.shuffle(&mut rng);
        let mut g = Graph::new(n);
        for pair in points.chunks(2) {
            let (u, v) = (pair[0], pair[1]);
            if u == v || !g.add_edge(u, v) {
                continue 'restart;
            }
        }
        return Ok(g);
    }
    Ok(switch_randomize(circulant_regular(n, d), 10 * n * d, &mut rng))
}

/// Deterministic `d`-regular graph: `i ~ i±1..i±⌊d/2⌋`, plus `i ~ i+n/2` for odd `d`.
pub fn circulant_regular(n: usize, d: usize) -> Graph {
    let mut g = Graph::new(n);
    for i in 0..n {
        for s in 1..=d / 2 {
            g.add_edge(i, (i + s) % n);
        }
        if d % 2 == 1 {
            g.add_edge(i, (i + n / 2) % n);
        }
    }
    g
}

/// Degree-preserving double edge switches.
fn switch_randomize(mut g: Graph, steps: usize, rng: &mut seed::Rng) -> Graph {
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    if edges.len() < 2 {
        return g;
    }
    for _ in 0..steps {
        let i = rng.gen_range(0..edges.len());
        let j = rng.gen_range(0..edges.len());
        if i == j {
            continue;
        }
        let (a, b) = edges[i];
        let (c, e) = if rng.gen_bool(0.5) { edges[j] } else { (edges[j].1, edges[j].0) };
        if a == c || a == e || b == c || b == e || g.has_edge(a, c) || g.has_edge(b, e) {
            continue;
        }
        g.remove_edge(a, b);
        g.remove_edge(c, e);
        g.add_edge(a, c);
        g.add_edge(b, e);
        edges[i] = (a, c);
        edges[j] = (b, e);
    }
    g
}

/// Star with `⌊(1-ε)n⌋` leaves (center 0), then `K_k`, then a path on the rest.
pub fn star_clique_path_guest(n: usize, eps_num: u64, eps_den: u64, k: usize) -> Result<Graph> {
    if eps_den == 0 || eps_num > eps_den || eps_num == 0 {
        return param(format!("epsilon {eps_num}/{eps_den} outside (0,1]"));
    }
    let leaves = ((eps_den - eps_num) as u128 * n as u128 / eps_den as u128) as usize;
    if leaves == 0 {
        return param("star has no leaves");
    }
    if k == 1 {
        return param("clique of size 1 is an isolated vertex");
    }
    let used = leaves + 1 + k;
    if used > n {
        return param(format!("star ({}) + clique ({k}) exceed n={n}", leaves + 1));
    }
    let rest = n - used;
    if rest == 1 {
        return param("path part would be an isolated vertex");
    }
    let mut g = Graph::new(n);
    for l in 1..=leaves {
        g.add_edge(0, l);
    }
    let c0 = leaves + 1;
    for u in c0..c0 + k {
        for v in u + 1..c0 + k {
            g.add_edge(u, v);
        }
    }
    for v in used + 1..n {
        g.add_edge(v - 1, v);
    }
    Ok(g)
}

// ---------------------------------------------------------------- file I/O

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(Error::Parse { line, msg: msg.into() })
}

fn parse_edge_file(text: &str, keyword: &str) -> Result<Graph> {
    let mut g: Option<Graph> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks[0] {
            k if k == keyword => {
                if g.is_some() {
                    return parse_err(line, "duplicate header");
                }
                if toks.len() != 2 {
                    return parse_err(line, format!("expected `{keyword} <n>`"));
                }
                let n: usize = toks[1].parse().or_else(|_| parse_err(line, "bad vertex count"))?;
                g = Some(Graph::new(n));
            }
            "e" => {
                let Some(gr) = g.as_mut() else {
                    return parse_err(line, format!("edge before `{keyword}` header"));
                };
                if toks.len() != 3 {
                    return parse_err(line, "expected `e <u> <v>`");
                }
                let u: usize = toks[1].parse().or_else(|_| parse_err(line, "bad vertex"))?;
                let v: usize = toks[2].parse().or_else(|_| parse_err(line, "bad vertex"))?;
                if u == v {
                    return parse_err(line, format!("self-loop at {u}"));
                }
                if u >= gr.n() || v >= gr.n() {
                    return parse_err(line, format!("vertex out of range for n={}", gr.n()));
                }
                if u > v {
                    return parse_err(line, "edges must be written with u < v");
                }
                if !gr.add_edge(u, v) {
                    return parse_err(line, format!("duplicate edge {u} {v}"));
                }
            }
            other => return parse_err(line, format!("unknown directive `{other}`")),
        }
    }
    g.ok_or(Error::Parse { line: 0, msg: format!("missing `{keyword}` header") })
}

fn write_edge_file(g: &Graph, keyword: &str) -> String {
    let mut s = format!("{keyword} {}\n", g.n());
    for (u, v) in g.edges() {
        s.push_str(&format!("e {u} {v}\n"));
    }
    s
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    parse_edge_file(text, "graph")
}

pub fn write_graph(g: &Graph) -> String {
    write_edge_file(g, "graph")
}

pub fn parse_coloring(text: &str) -> Result<Coloring> {
    parse_edge_file(text, "coloring").map(Coloring::from_red)
}

pub fn write_coloring(c: &Coloring) -> String {
    write_edge_file(c.red(), "coloring")
}

pub fn graph_to_json(g: &Graph) -> serde_json::Value {
    let edges: Vec<[usize; 2]> = g.edges().map(|(u, v)| [u, v]).collect();
    serde_json::json!({ "n": g.n(), "edges": edges })
}

pub fn coloring_to_json(c: &Coloring) -> serde_json::Value {
    let edges: Vec<[usize; 2]> = c.red().edges().map(|(u, v)| [u, v]).collect();
    serde_json::json!({ "n": c.n(), "red_edges": edges })
}

fn json_edges(v: &serde_json::Value, key: &str) -> Result<Graph> {
    let bad = |m: &str| Error::Parse { line: 0, msg: m.to_string() };
    let n = v.get("n").and_then(|x| x.as_u64()).ok_or_else(|| bad("missing n"))? as usize;
    let arr = v.get(key).and_then(|x| x.as_array()).ok_or_else(|| bad("missing edge list"))?;
    let mut g = Graph::new(n);
    for (i, e) in arr.iter().enumerate() {
        let pair = e.as_array().filter(|p| p.len() == 2).ok_or_else(|| bad("edge must be [u,v]"))?;
        let u = pair[0].as_u64().ok_or_else(|| bad("bad vertex"))? as usize;
        let w = pair[1].as_u64().ok_or_else(|| bad("bad vertex"))? as usize;
        if u == w || u >= n || w >= n || !g.add_edge(u, w) {
            return Err(Error::Parse { line: i + 1, msg: format!("invalid edge [{u},{w}]") });
        }
    }
    Ok(g)
}

pub fn graph_from_json(v: &serde_json::Value) -> Result<Graph> {
    json_edges(v, "edges")
}

pub fn coloring_from_json(v: &serde_json::Value) -> Result<Coloring> {
    json_edges(v, "red_edges").map(Coloring::from_red)
}

//! Extremal `K_k`-factors and 2-factors: the `λ_k` equation, optimal factors
//! in the two extremal colorings, the unavoidable family `F_m`, and drivers
//! assembling high-discrepancy factors in arbitrary colorings.

use crate::bitset::Bitset;
use crate::cutembed::greedy_expectation_embed;
use crate::error::{param, Error, Result};
use crate::graph::{bipartite_with_side, discrepancy, two_cliques_coloring, Color, Coloring, DiscrepancyReport, Embedding, Graph};
use crate::rational::{q, qi, qu, Rational};
use num_traits::{Signed, ToPrimitive};
use serde::Serialize;

fn c2(x: usize) -> usize {
    x * x.saturating_sub(1) / 2
}

/// One row of the `λ_k` table.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RhoLambda {
    pub k: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub rho: Rational,
    #[serde(with = "crate::rational::serde_q")]
    pub lambda: Rational,
    /// `⌊kρ⌋`.
    pub interval: usize,
}

/// Sides `f(ρ) = (k-1)(1-ρ)/2` and `g(ρ)` (best red count per vertex) of the `λ_k` equation.
pub fn rho_sides(k: usize, rho: &Rational) -> (Rational, Rational) {
    let kq = qu(k);
    let j = (rho * &kq).floor();
    let km1 = qu(k - 1);
    let f = &km1 * (qi(1) - rho) / qi(2);
    let g = &km1 / qi(2) - (&kq - &j - qi(1)) / qi(2) * (&j / &kq + qi(1) - qi(2) * rho);
    (f, g)
}

/// Unique `ρ_k ∈ [0,1]` balancing the red and blue optima, and `λ_k = (k-1)(1-ρ_k)/2`.
pub fn solve_rho_lambda(k: usize) -> Result<RhoLambda> {
    if k < 2 {
        return param("k must be at least 2");
    }
    let kq = qu(k);
    let mut found = Vec::new();
    for i in 0..k {
        let num = qu((k - i - 1) * (i + k));
        let den = &kq * qu(k - 1 + 2 * (k - i - 1));
        let rho = num / den;
        if rho >= qu(i) / &kq && rho < qu(i + 1) / &kq {
            found.push((i, rho));
        }
    }
    if found.len() != 1 {
        return Err(Error::Certificate(format!("{} admissible intervals for k = {k}", found.len())));
    }
    let (interval, rho) = found.pop().expect("one");
    let lambda = qu(k - 1) * (qi(1) - &rho) / qi(2);
    let (f, g) = rho_sides(k, &rho);
    if f != g || lambda > qu(k - 1) / qi(3) {
        return Err(Error::Certificate(format!("lambda postcondition failed for k = {k}")));
    }
    Ok(RhoLambda { k, rho, lambda, interval })
}

/// A partition of the vertices into `k`-sets with its color counts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KkFactor {
    pub k: usize,
    pub blocks: Vec<Vec<usize>>,
    pub red_count: usize,
    pub blue_count: usize,
    /// The extremal block profile needed rounding because `ρn` is not an integer.
    pub adjusted_profile: bool,
}

impl KkFactor {
    /// Validates the partition and counts colors.
    pub fn from_blocks(coloring: &Coloring, k: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        let n = coloring.n();
        if k == 0 || n % k != 0 {
            return param(format!("k = {k} does not divide n = {n}"));
        }
        let mut seen = vec![false; n];
        for b in &blocks {
            if b.len() != k {
                return Err(Error::InvalidEmbedding(format!("block of size {} in a K_{k}-factor", b.len())));
            }
            for &v in b {
                if v >= n || seen[v] {
                    return Err(Error::InvalidEmbedding(format!("vertex {v} repeated or out of range")));
                }
                seen[v] = true;
            }
        }
        if blocks.len() * k != n {
            return Err(Error::InvalidEmbedding("blocks do not cover every vertex".into()));
        }
        let red: usize = blocks.iter().map(|b| block_red(coloring, b)).sum();
        let total = blocks.len() * c2(k);
        Ok(KkFactor { k, blocks, red_count: red, blue_count: total - red, adjusted_profile: false })
    }

    pub fn count_of(&self, c: Color) -> usize {
        match c {
            Color::Red => self.red_count,
            Color::Blue => self.blue_count,
        }
    }

    /// Majority color and its count (red on ties).
    pub fn best(&self) -> (Color, usize) {
        if self.blue_count > self.red_count {
            (Color::Blue, self.blue_count)
        } else {
            (Color::Red, self.red_count)
        }
    }
}

fn block_red(coloring: &Coloring, b: &[usize]) -> usize {
    let mut r = 0;
    for (i, &u) in b.iter().enumerate() {
        for &v in &b[i + 1..] {
            if coloring.is_red(u, v) {
                r += 1;
            }
        }
    }
    r
}

/// Best count of `color` over all `K_k`-factors of the bipartite construction with `|X| = x`.
pub fn kk_bipartite_optimum(n: usize, k: usize, x: usize, color: Color) -> usize {
    let b = n / k;
    match color {
        Color::Blue => {
            let y = n - x;
            (y / k) * c2(k) + c2(y % k)
        }
        Color::Red => {
            let j = x / b;
            let hi = x - j * b;
            let lo = b - hi;
            let red = |i: usize| c2(k) - c2(k.saturating_sub(i));
            lo * red(j) + if hi > 0 { hi * red(j + 1) } else { 0 }
        }
    }
}

/// `g(ρ)·n`, the red optimum when `ρn` is an integer.
pub fn kk_bipartite_red_formula(n: usize, k: usize, rho: &Rational) -> Rational {
    rho_sides(k, rho).1 * qu(n)
}

fn rho_parts(rho: &Rational) -> Result<(u64, u64)> {
    if rho.is_negative() || rho > &qi(1) {
        return param("ratio outside [0,1]");
    }
    match (rho.numer().to_u64(), rho.denom().to_u64()) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => param("ratio too large"),
    }
}

/// Extremal factor of `color` in `bipartite_construction(n, ρ)`.
pub fn opt_kk_factor_bipartite(n: usize, k: usize, rho: &Rational, color: Color) -> Result<KkFactor> {
    if k == 0 || n % k != 0 {
        return param(format!("k = {k} does not divide n = {n}"));
    }
    let (num, den) = rho_parts(rho)?;
    let x = (num as u128 * n as u128 / den as u128) as usize;
    let coloring = bipartite_with_side(n, x);
    let b = n / k;
    let xs: Vec<usize> = (0..x).collect();
    let ys: Vec<usize> = (x..n).collect();
    // sizes of the X-share of each block
    let shares: Vec<usize> = match color {
        Color::Blue => {
            let (qf, r) = ((n - x) / k, (n - x) % k);
            (0..b).map(|i| if i < qf { 0 } else if i == qf { k - r } else { k }).collect()
        }
        Color::Red => {
            let j = x / b;
            let hi = x - j * b;
            (0..b).map(|i| if i < hi { j + 1 } else { j }).collect()
        }
    };
    let (mut xi, mut yi) = (0, 0);
    let mut blocks = Vec::with_capacity(b);
    for s in shares {
        let mut blk = xs[xi..xi + s].to_vec();
        blk.extend_from_slice(&ys[yi..yi + k - s]);
        xi += s;
        yi += k - s;
        blocks.push(blk);
    }
    let mut f = KkFactor::from_blocks(&coloring, k, blocks)?;
    debug_assert_eq!(f.count_of(color), kk_bipartite_optimum(n, k, x, color));
    f.adjusted_profile = qu(x) != rho * qu(n);
    Ok(f)
}

/// Extremal factor of `color` in `two_cliques_coloring(m, red)`.
pub fn kk_factor_two_cliques(m: usize, k: usize, color: Color) -> Result<KkFactor> {
    if k == 0 || m % k != 0 {
        return param(format!("k = {k} does not divide m = {m}"));
    }
    let coloring = two_cliques_coloring(m, true)?;
    let blocks = two_cliques_blocks(m, k, color);
    KkFactor::from_blocks(&coloring, k, blocks)
}

fn two_cliques_blocks(m: usize, k: usize, color: Color) -> Vec<Vec<usize>> {
    let nb = 2 * m / k;
    match color {
        Color::Red => (0..nb).map(|i| (i * k..(i + 1) * k).collect()).collect(),
        Color::Blue => {
            let (hi, lo) = (k.div_ceil(2), k / 2);
            let (mut a, mut b) = (0, m);
            (0..nb)
                .map(|i| {
                    let (na, nbv) = if i % 2 == 0 { (hi, lo) } else { (lo, hi) };
                    let mut blk: Vec<usize> = (a..a + na).collect();
                    blk.extend(b..b + nbv);
                    a += na;
                    b += nbv;
                    blk
                })
                .collect()
        }
    }
}

/// The four colorings of `K_{2m}` forming the unavoidable family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum FmVariant {
    /// Blue `K_m` on `S`, every other pair red.
    D,
    /// Red `K_m` on `S`, every other pair blue.
    DBar,
    /// Red cliques on `S` and `T`, blue between them.
    C,
    /// Blue cliques on `S` and `T`, red between them.
    CBar,
}

impl FmVariant {
    /// Colors inside `S`, inside `T`, and between.
    pub fn pattern(self) -> (Color, Color, Color) {
        use Color::*;
        match self {
            FmVariant::D => (Blue, Red, Red),
            FmVariant::DBar => (Red, Blue, Blue),
            FmVariant::C => (Red, Red, Blue),
            FmVariant::CBar => (Blue, Blue, Red),
        }
    }

    fn from_pattern(s: Color, t: Color, cross: Color) -> Option<Self> {
        [FmVariant::D, FmVariant::DBar, FmVariant::C, FmVariant::CBar].into_iter().find(|v| v.pattern() == (s, t, cross))
    }

    pub fn is_two_cliques(self) -> bool {
        matches!(self, FmVariant::C | FmVariant::CBar)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FmWitness {
    pub m: usize,
    pub variant: FmVariant,
    /// `(S, T)`; for `D` and `D̄`, `S` is the clique whose color differs from the rest.
    pub part_split: (Vec<usize>, Vec<usize>),
}

impl FmWitness {
    pub fn vertices(&self) -> Vec<usize> {
        let mut v = self.part_split.0.clone();
        v.extend_from_slice(&self.part_split.1);
        v
    }

    /// Checks every pair against the variant's pattern.
    pub fn verify(&self, coloring: &Coloring) -> Result<()> {
        let (s, t) = &self.part_split;
        let (cs, ct, cx) = self.variant.pattern();
        let n = coloring.n();
        let mut seen = vec![false; n];
        if s.len() != self.m || t.len() != self.m {
            return Err(Error::Certificate("parts must have m vertices each".into()));
        }
        for &v in s.iter().chain(t) {
            if v >= n || seen[v] {
                return Err(Error::Certificate(format!("vertex {v} repeated or out of range")));
            }
            seen[v] = true;
        }
        let col = |u: usize, v: usize| if coloring.is_red(u, v) { Color::Red } else { Color::Blue };
        for (side, c) in [(s, cs), (t, ct)] {
            for (i, &u) in side.iter().enumerate() {
                for &v in &side[i + 1..] {
                    if col(u, v) != c {
                        return Err(Error::Certificate(format!("pair {u},{v} breaks the {:?} pattern", self.variant)));
                    }
                }
            }
        }
        for &u in s {
            for &v in t {
                if col(u, v) != cx {
                    return Err(Error::Certificate(format!("cross pair {u},{v} breaks the {:?} pattern", self.variant)));
                }
            }
        }
        Ok(())
    }
}

/// Search limits for [`find_unavoidable_in`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FmSearch {
    /// Monochromatic cliques of `clique_multiple·m` vertices are extracted first.
    pub clique_multiple: usize,
    /// Bitset intersections allowed before giving up.
    pub probe_budget: u64,
}

impl Default for FmSearch {
    fn default() -> Self {
        FmSearch { clique_multiple: 4, probe_budget: 1_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FmOutcome {
    Found(FmWitness),
    /// `sparse` has fewer than `ε·C(n,2)` edges.
    Imbalanced { sparse: Color, count: usize },
    NotFound { probes: u64 },
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn tick(&mut self) -> bool {
        self.used += 1;
        self.used <= self.limit
    }
}

/// Element of `F_m` inside `coloring`, or the reason none was produced.
pub fn find_unavoidable(coloring: &Coloring, m: usize, eps: &Rational) -> Result<FmOutcome> {
    let all = Bitset::full(coloring.n());
    let blue = coloring.blue();
    find_unavoidable_in(coloring, &blue, &all, m, eps, &FmSearch::default())
}

/// As [`find_unavoidable`], restricted to the vertices in `avail`; `blue` is the blue graph of `coloring`.
pub fn find_unavoidable_in(coloring: &Coloring, blue: &Graph, avail: &Bitset, m: usize, eps: &Rational, search: &FmSearch) -> Result<FmOutcome> {
    if m == 0 {
        return param("m must be at least 1");
    }
    let red = coloring.red();
    let a = avail.count();
    let pairs = c2(a);
    let red_in = red.edges_within(avail);
    let thr = eps * qu(pairs);
    if qu(red_in) < thr {
        return Ok(FmOutcome::Imbalanced { sparse: Color::Red, count: red_in });
    }
    if qu(pairs - red_in) < thr {
        return Ok(FmOutcome::Imbalanced { sparse: Color::Blue, count: pairs - red_in });
    }
    if a < 2 * m {
        return Ok(FmOutcome::NotFound { probes: 0 });
    }
    let mut budget = Budget { used: 0, limit: search.probe_budget };
    let graphs = [red, blue];
    let mut sizes = vec![search.clique_multiple.max(1) * m, 2 * m, m];
    sizes.dedup();
    for size in sizes {
        let cliques = extract_cliques(&graphs, avail, size);
        for i in 0..cliques.len() {
            for j in i + 1..cliques.len() {
                if let Some(w) = pair_witness(&graphs, &cliques[i], &cliques[j], m, &mut budget) {
                    w.verify(coloring)?;
                    return Ok(FmOutcome::Found(w));
                }
                if budget.used > budget.limit {
                    return Ok(FmOutcome::NotFound { probes: budget.used });
                }
            }
        }
    }
    for v in [FmVariant::C, FmVariant::CBar, FmVariant::D, FmVariant::DBar] {
        if let Some(w) = direct_search(&graphs, avail, m, v, &mut budget) {
            w.verify(coloring)?;
            return Ok(FmOutcome::Found(w));
        }
        if budget.used > budget.limit {
            break;
        }
    }
    Ok(FmOutcome::NotFound { probes: budget.used })
}

fn graph_for<'a>(graphs: &[&'a Graph; 2], c: Color) -> &'a Graph {
    if c.is_red() {
        graphs[0]
    } else {
        graphs[1]
    }
}

fn greedy_clique(g: &Graph, pool: &Bitset, target: usize) -> Vec<usize> {
    let mut cand = pool.clone();
    let mut clique = Vec::new();
    while clique.len() < target && !cand.is_empty() {
        let v = cand.iter().max_by_key(|&v| (g.neighbors(v).intersection_count(&cand), std::cmp::Reverse(v))).expect("nonempty");
        clique.push(v);
        cand.intersect_with(g.neighbors(v));
    }
    clique
}

fn extract_cliques(graphs: &[&Graph; 2], avail: &Bitset, size: usize) -> Vec<(Color, Vec<usize>)> {
    let mut pool = avail.clone();
    let mut out = Vec::new();
    loop {
        let r = greedy_clique(graphs[0], &pool, size);
        let b = greedy_clique(graphs[1], &pool, size);
        let pick = if r.len() == size {
            (Color::Red, r)
        } else if b.len() == size {
            (Color::Blue, b)
        } else {
            break;
        };
        for &v in &pick.1 {
            pool.remove(v);
        }
        out.push(pick);
    }
    out
}

/// `m` rows of `rows` and `m` columns of `cols` with every cross pair in `g`.
fn biclique(g: &Graph, rows: &[usize], cols: &Bitset, m: usize, budget: &mut Budget) -> Option<(Vec<usize>, Vec<usize>)> {
    fn rec(g: &Graph, rows: &[usize], start: usize, common: &Bitset, m: usize, chosen: &mut Vec<usize>, budget: &mut Budget) -> Option<Vec<usize>> {
        if chosen.len() == m {
            return Some(common.iter().take(m).collect());
        }
        for i in start..rows.len() {
            if rows.len() - i < m - chosen.len() {
                break;
            }
            if !budget.tick() {
                return None;
            }
            let next = common.and(g.neighbors(rows[i]));
            if next.count() >= m {
                chosen.push(rows[i]);
                if let Some(c) = rec(g, rows, i + 1, &next, m, chosen, budget) {
                    return Some(c);
                }
                chosen.pop();
            }
        }
        None
    }
    let mut chosen = Vec::new();
    let cols_found = rec(g, rows, 0, cols, m, &mut chosen, budget)?;
    Some((chosen, cols_found))
}

fn pair_witness(graphs: &[&Graph; 2], a: &(Color, Vec<usize>), b: &(Color, Vec<usize>), m: usize, budget: &mut Budget) -> Option<FmWitness> {
    let n = graphs[0].n();
    let cols = Bitset::from_iter(n, b.1.iter().copied());
    for cross in [Color::Red, Color::Blue] {
        if a.0 == b.0 && b.0 == cross {
            continue;
        }
        let g = graph_for(graphs, cross);
        if let Some((ra, rb)) = biclique(g, &a.1, &cols, m, budget) {
            // S carries the clique color that differs from the cross color
            let (s, t, cs, ct) = if a.0 != b.0 && a.0 == cross { (rb, ra, b.0, a.0) } else { (ra, rb, a.0, b.0) };
            let variant = FmVariant::from_pattern(cs, ct, cross)?;
            return Some(FmWitness { m, variant, part_split: (s, t) });
        }
    }
    None
}

fn find_clique(g: &Graph, cand: &Bitset, size: usize, budget: &mut Budget) -> Option<Vec<usize>> {
    fn rec(g: &Graph, cand: &Bitset, size: usize, cur: &mut Vec<usize>, budget: &mut Budget) -> bool {
        if cur.len() == size {
            return true;
        }
        if cur.len() + cand.count() < size {
            return false;
        }
        let mut rest = cand.clone();
        for v in cand.iter() {
            if cur.len() + rest.count() < size || !budget.tick() {
                return false;
            }
            rest.remove(v);
            let next = rest.and(g.neighbors(v));
            cur.push(v);
            if rec(g, &next, size, cur, budget) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::new();
    rec(g, cand, size, &mut cur, budget).then_some(cur)
}

/// Backtracking over `S` with the admissible `T`-candidates maintained alongside.
fn direct_search(graphs: &[&Graph; 2], avail: &Bitset, m: usize, variant: FmVariant, budget: &mut Budget) -> Option<FmWitness> {
    let (cs, ct, cx) = variant.pattern();
    let (gs, gt, gx) = (graph_for(graphs, cs), graph_for(graphs, ct), graph_for(graphs, cx));
    #[allow(clippy::too_many_arguments)]
    fn rec(
        gs: &Graph,
        gt: &Graph,
        gx: &Graph,
        cand_s: &Bitset,
        cand_t: &Bitset,
        m: usize,
        s: &mut Vec<usize>,
        budget: &mut Budget,
    ) -> Option<Vec<usize>> {
        if s.len() == m {
            return find_clique(gt, cand_t, m, budget);
        }
        let mut rest = cand_s.clone();
        for v in cand_s.iter() {
            if s.len() + rest.count() < m || !budget.tick() {
                return None;
            }
            rest.remove(v);
            let mut nt = cand_t.and(gx.neighbors(v));
            nt.remove(v);
            if nt.count() < m {
                continue;
            }
            let ns = rest.and(gs.neighbors(v));
            s.push(v);
            if let Some(t) = rec(gs, gt, gx, &ns, &nt, m, s, budget) {
                return Some(t);
            }
            s.pop();
        }
        None
    }
    let mut s = Vec::new();
    let t = rec(gs, gt, gx, avail, avail, m, &mut s, budget)?;
    Some(FmWitness { m, variant, part_split: (s, t) })
}

/// Pairwise-swap hill climbing on the count of `color`.
pub fn improve_factor(coloring: &Coloring, factor: &KkFactor, color: Color, max_passes: usize) -> Result<KkFactor> {
    let g = coloring.graph_of(color);
    let mut blocks = factor.blocks.clone();
    let deg_into = |v: usize, b: &[usize], skip: usize| b.iter().filter(|&&w| w != skip && w != v && g.has_edge(v, w)).count() as i64;
    for _ in 0..max_passes {
        let mut improved = false;
        for i in 0..blocks.len() {
            for j in i + 1..blocks.len() {
                for a in 0..blocks[i].len() {
                    for b in 0..blocks[j].len() {
                        let (u, v) = (blocks[i][a], blocks[j][b]);
                        let gain = deg_into(v, &blocks[i], u) + deg_into(u, &blocks[j], v) - deg_into(u, &blocks[i], u) - deg_into(v, &blocks[j], v);
                        if gain > 0 {
                            blocks[i][a] = v;
                            blocks[j][b] = u;
                            improved = true;
                        }
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    KkFactor::from_blocks(coloring, factor.k, blocks)
}

/// How the extraction loop ended.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum StopReason {
    /// The leftover set is nearly monochromatic; `sparse` is its rare color.
    Imbalanced { sparse: Color },
    NotFound,
    TooSmall,
}

/// Blocks removed by the extraction loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Extraction {
    pub witnesses: Vec<FmWitness>,
    pub leftover: Vec<usize>,
    pub stop: StopReason,
}

/// Repeatedly removes `F_m` elements; `keep(w)` returns the vertices of `w` to remove.
fn extract(coloring: &Coloring, m: usize, eps: &Rational, search: &FmSearch, mut keep: impl FnMut(&FmWitness) -> Vec<usize>) -> Result<(Vec<(FmWitness, Vec<usize>)>, Vec<usize>, StopReason)> {
    let n = coloring.n();
    let blue = coloring.blue();
    let mut avail = Bitset::full(n);
    let mut out = Vec::new();
    let stop = loop {
        if avail.count() < 2 * m {
            break StopReason::TooSmall;
        }
        match find_unavoidable_in(coloring, &blue, &avail, m, eps, search)? {
            FmOutcome::Found(w) => {
                let used = keep(&w);
                for &v in &used {
                    avail.remove(v);
                }
                out.push((w, used));
            }
            FmOutcome::Imbalanced { sparse, .. } => break StopReason::Imbalanced { sparse },
            FmOutcome::NotFound { .. } => break StopReason::NotFound,
        }
    };
    Ok((out, avail.to_vec(), stop))
}

fn majority_color(coloring: &Coloring, verts: &[usize]) -> Color {
    let s = Bitset::from_iter(coloring.n(), verts.iter().copied());
    let red = coloring.red().edges_within(&s);
    if 2 * red >= c2(verts.len()) {
        Color::Red
    } else {
        Color::Blue
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KkFactorRun {
    pub factor: KkFactor,
    pub color: Color,
    pub count: usize,
    pub strategy: String,
    /// Vertices of the bipartite building block and its `X`-side size.
    pub block_size: usize,
    pub j_blocks: usize,
    pub red_clique_blocks: usize,
    pub blue_clique_blocks: usize,
    pub leftover: usize,
    pub stop: StopReason,
    #[serde(with = "crate::rational::serde_q_opt")]
    pub alpha: Option<Rational>,
    /// Color the case analysis selects.
    pub case_color: Option<Color>,
    #[serde(with = "crate::rational::serde_q")]
    pub target: Rational,
    /// Set when the extraction ended on an imbalanced leftover.
    pub target_met: Option<bool>,
}

struct KkBlock {
    variant: FmVariant,
    /// For bipartite blocks: `X`-side then `Y`-side vertices; for clique blocks: `S` then `T`.
    verts: Vec<usize>,
}

fn kk_assemble(coloring: &Coloring, k: usize, m: usize, x_size: usize, blocks: &[KkBlock], leftover: &[usize], col: Color) -> Result<KkFactor> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for b in blocks {
        let local: Vec<Vec<usize>> = if b.variant.is_two_cliques() {
            let clique_color = b.variant.pattern().0;
            let want = if clique_color == col { Color::Red } else { Color::Blue };
            two_cliques_blocks(m, k, want)
        } else {
            let want = if b.variant == FmVariant::D { col } else { col.other() };
            opt_kk_factor_bipartite(m, k, &q(x_size as i64, m as i64), want)?.blocks
        };
        out.extend(local.into_iter().map(|blk| blk.into_iter().map(|v| b.verts[v]).collect()));
    }
    if !leftover.is_empty() {
        let sub = coloring.induced(leftover);
        let guest = Graph::disjoint_cliques(leftover.len(), k);
        let e = greedy_expectation_embed(&guest, &sub, col)?.embedding;
        for c in 0..leftover.len() / k {
            out.push((0..k).map(|t| leftover[e.image(c * k + t)]).collect());
        }
    }
    KkFactor::from_blocks(coloring, k, out)
}

/// `K_k`-factor with many edges of one color.
pub fn kk_factor_driver(coloring: &Coloring, k: usize, eps: &Rational, _seed: u64) -> Result<KkFactorRun> {
    let n = coloring.n();
    if k < 2 || n % k != 0 {
        return param(format!("k = {k} must be at least 2 and divide n = {n}"));
    }
    if !eps.is_positive() {
        return param("eps must be positive");
    }
    let rl = solve_rho_lambda(k)?;
    let den = rl.rho.denom().to_usize().expect("small");
    let m = k * den;
    let x_size = (&rl.rho * qu(m)).to_integer().to_usize().expect("integral");
    let (found, leftover_v, stop) = extract(coloring, m, eps, &FmSearch::default(), |w| {
        if w.variant.is_two_cliques() {
            w.vertices()
        } else {
            let mut v = w.part_split.1[..x_size].to_vec();
            v.extend_from_slice(&w.part_split.0[..m - x_size]);
            v
        }
    })?;
    let blocks: Vec<KkBlock> = found.into_iter().map(|(w, verts)| KkBlock { variant: w.variant, verts }).collect();
    let leftover = leftover_v;
    let j_blocks = blocks.iter().filter(|b| !b.variant.is_two_cliques()).count();
    let red_cl = blocks.iter().filter(|b| b.variant == FmVariant::C).count();
    let blue_cl = blocks.iter().filter(|b| b.variant == FmVariant::CBar).count();
    let major = match &stop {
        StopReason::Imbalanced { sparse } => sparse.other(),
        _ => majority_color(coloring, &leftover),
    };
    let minor_cl = if major.is_red() { blue_cl } else { red_cl };
    let mass = 2 * m * (red_cl + blue_cl) + leftover.len();
    let alpha = (mass > 0).then(|| q((2 * m * minor_cl) as i64, mass as i64));
    let case_color = alpha.as_ref().map(|a| if a > &q(2, 3) { major.other() } else { major });

    let mut cands: Vec<(KkFactor, Color, String)> = Vec::new();
    for col in [Color::Red, Color::Blue] {
        cands.push((kk_assemble(coloring, k, m, x_size, &blocks, &leftover, col)?, col, "assembly".into()));
        let all: Vec<usize> = (0..n).collect();
        cands.push((kk_assemble(coloring, k, m, x_size, &[], &all, col)?, col, "expectation".into()));
    }
    let mut best: Option<(KkFactor, Color, String)> = None;
    for (f, col, name) in cands {
        let polished = improve_factor(coloring, &f, col, 20)?;
        let better = best.as_ref().map_or(true, |b| polished.count_of(col) > b.0.count_of(b.1));
        if better {
            best = Some((polished, col, name));
        }
    }
    let (factor, color, strategy) = best.expect("candidates");
    let count = factor.count_of(color);
    let target = (&rl.lambda - eps * qu(k)) * qu(n);
    let target_met = matches!(stop, StopReason::Imbalanced { .. }).then(|| qu(count) >= target);
    Ok(KkFactorRun {
        factor,
        color,
        count,
        strategy,
        block_size: m,
        j_blocks,
        red_clique_blocks: red_cl,
        blue_clique_blocks: blue_cl,
        leftover: leftover.len(),
        stop,
        alpha,
        case_color,
        target,
        target_met,
    })
}

/// Vertex-disjoint cycles of length at least 3 covering `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwoFactor {
    n: usize,
    cycles: Vec<Vec<usize>>,
}

impl TwoFactor {
    pub fn new(cycles: Vec<Vec<usize>>) -> Result<Self> {
        let n: usize = cycles.iter().map(Vec::len).sum();
        let mut seen = vec![false; n];
        for c in &cycles {
            if c.len() < 3 {
                return param(format!("cycle of length {} (need at least 3)", c.len()));
            }
            for &v in c {
                if v >= n || seen[v] {
                    return param(format!("vertex {v} repeated or out of range 0..{n}"));
                }
                seen[v] = true;
            }
        }
        Ok(TwoFactor { n, cycles })
    }

    /// Cycles of the given lengths on consecutive vertices.
    pub fn from_lengths(lengths: &[usize]) -> Result<Self> {
        let mut start = 0;
        let cycles = lengths
            .iter()
            .map(|&l| {
                let c = (start..start + l).collect();
                start += l;
                c
            })
            .collect();
        TwoFactor::new(cycles)
    }

    /// Cycle decomposition of a 2-regular graph.
    pub fn from_graph(g: &Graph) -> Result<Self> {
        if g.regular_degree() != Some(2) {
            return param("graph is not 2-regular");
        }
        let mut seen = vec![false; g.n()];
        let mut cycles = Vec::new();
        for s in 0..g.n() {
            if seen[s] {
                continue;
            }
            let mut cyc = vec![s];
            seen[s] = true;
            let (mut prev, mut cur) = (s, g.neighbors(s).first().expect("degree 2"));
            while cur != s {
                seen[cur] = true;
                cyc.push(cur);
                let next = g.neighbors(cur).iter().find(|&w| w != prev).expect("degree 2");
                prev = cur;
                cur = next;
            }
            cycles.push(cyc);
        }
        TwoFactor::new(cycles)
    }

    /// One 2-factor per multiset of cycle lengths summing to `n`.
    pub fn shapes(n: usize) -> Vec<TwoFactor> {
        fn rec(rem: usize, max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if rem == 0 {
                out.push(cur.clone());
                return;
            }
            for l in (3..=max.min(rem)).rev() {
                cur.push(l);
                rec(rem - l, l, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        if n >= 3 {
            rec(n, n, &mut Vec::new(), &mut out);
        }
        out.into_iter().map(|ls| TwoFactor::from_lengths(&ls).expect("valid")).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn cycles(&self) -> &[Vec<usize>] {
        &self.cycles
    }

    pub fn graph(&self) -> Graph {
        let mut g = Graph::new(self.n);
        for c in &self.cycles {
            for i in 0..c.len() {
                g.add_edge(c[i], c[(i + 1) % c.len()]);
            }
        }
        g
    }

    /// Vertices with each cycle listed consecutively in its cyclic order.
    pub fn order(&self) -> Vec<usize> {
        self.cycles.iter().flatten().copied().collect()
    }

    pub fn odd_cycles(&self) -> usize {
        self.cycles.iter().filter(|c| c.len() % 2 == 1).count()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({ "n": self.n, "cycles": self.cycles })
    }

    pub fn from_json(v: &serde_json::Value) -> Result<Self> {
        let cycles: Vec<Vec<usize>> = serde_json::from_value(v.get("cycles").cloned().unwrap_or(serde_json::Value::Null))
            .map_err(|e| Error::Parse { line: 0, msg: format!("cycles: {e}") })?;
        let f = TwoFactor::new(cycles)?;
        if let Some(n) = v.get("n").and_then(|x| x.as_u64()) {
            if n as usize != f.n {
                return Err(Error::Dimension(format!("declared n = {n}, cycles cover {}", f.n)));
            }
        }
        Ok(f)
    }
}

/// Parts `U_0, U_1, ...` of consecutive cycle-order vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CyclePartition {
    pub k: usize,
    /// `parts[0]` is the remainder `U_0` with fewer than `k` vertices.
    pub parts: Vec<Vec<usize>>,
    pub part_edges: Vec<usize>,
    pub part_paths: Vec<usize>,
}

/// Consecutive `k`-slices of the cycle order, each inducing cycles plus at most two paths.
pub fn cycle_partition(f: &TwoFactor, k: usize) -> Result<CyclePartition> {
    if k < 3 {
        return param("cycle partition needs k >= 3");
    }
    let order = f.order();
    let full = f.n() / k;
    let mut parts = vec![order[full * k..].to_vec()];
    parts.extend((0..full).map(|i| order[i * k..(i + 1) * k].to_vec()));
    let g = f.graph();
    let mut part_edges = Vec::new();
    let mut part_paths = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        let h = g.induced(p);
        let paths = h.components().iter().filter(|c| c.iter().any(|&v| h.degree(v) < 2)).count();
        if h.max_degree() > 2 || paths > 2 || (i > 0 && h.edge_count() + 2 < k) {
            return Err(Error::Certificate(format!("part {i} violates the cycle-partition structure")));
        }
        part_edges.push(h.edge_count());
        part_paths.push(paths);
    }
    Ok(CyclePartition { k, parts, part_edges, part_paths })
}

/// Cycles and paths induced by a consecutive run of the cycle order.
fn segment_pieces(f: &TwoFactor, seg: &[usize], cycle_of: &[usize]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let (mut cycles, mut paths) = (Vec::new(), Vec::new());
    let mut i = 0;
    while i < seg.len() {
        let c = cycle_of[seg[i]];
        let mut j = i;
        while j < seg.len() && cycle_of[seg[j]] == c {
            j += 1;
        }
        let piece = seg[i..j].to_vec();
        if piece.len() == f.cycles[c].len() {
            cycles.push(piece);
        } else {
            paths.push(piece);
        }
        i = j;
    }
    (cycles, paths)
}

/// Closes the paths of a segment into cycles, splicing short paths into an existing cycle.
fn close_segment(f: &TwoFactor, seg: &[usize], cycle_of: &[usize]) -> Vec<Vec<usize>> {
    let (mut cycles, paths) = segment_pieces(f, seg, cycle_of);
    let joined: Vec<usize> = paths.into_iter().flatten().collect();
    if joined.len() >= 3 {
        cycles.push(joined);
    } else if !joined.is_empty() {
        match cycles.last_mut() {
            Some(c) => c.extend(joined),
            None => unreachable!("segments of at least 3 vertices"),
        }
    }
    cycles
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoFactorEmbedding {
    pub embedding: Embedding,
    pub color: Color,
    pub count: usize,
    /// Lower bound the construction guarantees for `count`.
    pub bound: usize,
}

fn count_color(coloring: &Coloring, g: &Graph, e: &Embedding, c: Color) -> usize {
    g.edges().filter(|&(u, v)| coloring.is_red(e.image(u), e.image(v)) == c.is_red()).count()
}

/// Embeds a 2-factor on `3k` vertices into `bipartite_construction(3k, 1/3)`.
///
/// The host has red side `X = {0..k-1}` and a blue clique on the other `2k`
/// vertices. Red: an independent `k`-set goes to `X`, giving exactly `2k` red
/// edges. Blue: the first `2k` cycle-order vertices go to the blue clique,
/// giving at least `2k-1` blue edges.
pub fn embed_2factor_bipartite(f: &TwoFactor, color: Color) -> Result<TwoFactorEmbedding> {
    let n = f.n();
    if n == 0 || n % 3 != 0 {
        return Err(Error::Dimension(format!("2-factor has {n} vertices, need 3k")));
    }
    let k = n / 3;
    let host = bipartite_with_side(n, k);
    let g = f.graph();
    let mut map = vec![usize::MAX; n];
    let bound = match color {
        Color::Blue => {
            let order = f.order();
            for (i, &v) in order[..2 * k].iter().enumerate() {
                map[v] = k + i;
            }
            for (i, &v) in order[2 * k..].iter().enumerate() {
                map[v] = i;
            }
            2 * k - 1
        }
        Color::Red => {
            // alternate colors along each cycle; class 0 has at least n/3 vertices
            let mut class0: Vec<usize> = f.cycles.iter().flat_map(|c| c.iter().step_by(2).take(c.len() / 2).copied()).collect();
            class0.truncate(k);
            let mut inx = vec![false; n];
            for (i, &v) in class0.iter().enumerate() {
                map[v] = i;
                inx[v] = true;
            }
            let mut next = k;
            for v in f.order() {
                if !inx[v] {
                    map[v] = next;
                    next += 1;
                }
            }
            2 * k
        }
    };
    let embedding = Embedding::from_map(map)?;
    let count = count_color(&host, &g, &embedding, color);
    if count < bound {
        return Err(Error::Certificate(format!("{color:?} count {count} below {bound}")));
    }
    Ok(TwoFactorEmbedding { embedding, color, count, bound })
}

/// Embeds a 2-factor on `4k` vertices into `two_cliques_coloring(2k, red)`.
///
/// Red: consecutive layout, at least `4k-2` red edges. Blue: one edge is dropped
/// from each odd cycle and the resulting bipartite graph is split evenly across
/// the two cliques, giving `4k - #odd ≥ ⌈8k/3⌉` blue edges.
pub fn embed_2factor_two_cliques(f: &TwoFactor, color: Color) -> Result<TwoFactorEmbedding> {
    let n = f.n();
    if n == 0 || n % 4 != 0 {
        return Err(Error::Dimension(format!("2-factor has {n} vertices, need 4k")));
    }
    let k = n / 4;
    let host = two_cliques_coloring(2 * k, true)?;
    let g = f.graph();
    let mut map = vec![usize::MAX; n];
    let bound = match color {
        Color::Red => {
            for (i, v) in f.order().into_iter().enumerate() {
                map[v] = i;
            }
            4 * k - 2
        }
        Color::Blue => {
            let (mut a, mut b) = (0, 2 * k);
            let mut odd_seen = 0;
            for c in &f.cycles {
                // after dropping the closing edge an odd cycle is a path with one extra vertex on its start side
                let flip = c.len() % 2 == 1 && {
                    odd_seen += 1;
                    odd_seen % 2 == 0
                };
                for (i, &v) in c.iter().enumerate() {
                    if (i % 2 == 0) != flip {
                        map[v] = a;
                        a += 1;
                    } else {
                        map[v] = b;
                        b += 1;
                    }
                }
            }
            assert!(a == 2 * k && b == 4 * k, "balanced 2-coloring exists for an even number of odd cycles");
            (8 * k).div_ceil(3)
        }
    };
    let embedding = Embedding::from_map(map)?;
    let count = count_color(&host, &g, &embedding, color);
    if count < bound {
        return Err(Error::Certificate(format!("{color:?} count {count} below {bound}")));
    }
    Ok(TwoFactorEmbedding { embedding, color, count, bound })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoFactorRun {
    pub embedding: Embedding,
    pub report: DiscrepancyReport,
    pub color: Color,
    pub count: usize,
    pub strategy: String,
    pub k: usize,
    pub j_blocks: usize,
    pub clique_blocks: usize,
    pub leftover: usize,
    /// `|E(F) Δ E(F')|` for the modified factor whose parts each induce a 2-factor.
    pub modifications: usize,
    pub stop: StopReason,
    #[serde(with = "crate::rational::serde_q")]
    pub target: Rational,
    pub target_met: Option<bool>,
}

/// Pairwise-swap hill climbing on the count of `color` for a guest embedding.
pub fn improve_embedding(coloring: &Coloring, guest: &Graph, emb: &Embedding, color: Color, max_passes: usize) -> Result<Embedding> {
    let n = guest.n();
    let mut map = emb.map().to_vec();
    let hit = |a: usize, b: usize| (coloring.is_red(a, b) == color.is_red()) as i64;
    let nbrs: Vec<Vec<usize>> = (0..n).map(|v| guest.neighbors(v).to_vec()).collect();
    for _ in 0..max_passes {
        let mut improved = false;
        for u in 0..n {
            for v in u + 1..n {
                let (hu, hv) = (map[u], map[v]);
                let mut gain = 0;
                for &w in &nbrs[u] {
                    if w != v {
                        gain += hit(hv, map[w]) - hit(hu, map[w]);
                    }
                }
                for &w in &nbrs[v] {
                    if w != u {
                        gain += hit(hu, map[w]) - hit(hv, map[w]);
                    }
                }
                if gain > 0 {
                    map.swap(u, v);
                    improved = true;
                }
            }
        }
        if !improved {
            break;
        }
    }
    Embedding::from_map(map)
}

/// Embedding of `f` with many edges of one color.
pub fn two_factor_driver(coloring: &Coloring, f: &TwoFactor, eps: &Rational, _seed: u64) -> Result<TwoFactorRun> {
    let n = coloring.n();
    if f.n() != n {
        return Err(Error::Dimension(format!("2-factor has {} vertices, coloring {n}", f.n())));
    }
    if !eps.is_positive() {
        return param("eps must be positive");
    }
    let k = (qi(6) / eps).ceil().to_integer().to_usize().unwrap_or(usize::MAX).max(3);
    let guest = f.graph();
    let mut cycle_of = vec![0; n];
    for (i, c) in f.cycles.iter().enumerate() {
        for &v in c {
            cycle_of[v] = i;
        }
    }
    let order = f.order();
    let full = n / k;
    let u0 = n - full * k;
    // guest parts of exactly k vertices available to blocks; a short remainder joins the last part
    let mut seg_bounds: Vec<(usize, usize)> = (0..full).map(|i| (i * k, (i + 1) * k)).collect();
    let tail_merged = u0 > 0 && u0 < 3 && full > 0;
    if tail_merged {
        seg_bounds.last_mut().expect("full > 0").1 = n;
    } else if u0 > 0 {
        seg_bounds.push((full * k, n));
    }
    let usable_parts = if tail_merged { full - 1 } else { full };

    let (found, _, stop) = if k > n {
        (Vec::new(), Vec::new(), StopReason::TooSmall)
    } else {
        extract(coloring, 2 * k, &q(1, 3), &FmSearch::default(), |w| {
            if w.variant.is_two_cliques() {
                w.vertices()
            } else {
                let mut v = w.part_split.1[..k].to_vec();
                v.extend_from_slice(&w.part_split.0[..2 * k]);
                v
            }
        })?
    };
    let mut blocks: Vec<(FmVariant, Vec<usize>)> = found.into_iter().map(|(w, v)| (w.variant, v)).collect();
    let need = |b: &[(FmVariant, Vec<usize>)]| b.iter().map(|(v, _)| if v.is_two_cliques() { 4 } else { 3 }).sum::<usize>();
    while need(&blocks) > usable_parts {
        blocks.pop();
    }
    let used_parts = need(&blocks);

    let mut fp_cycles: Vec<Vec<usize>> = Vec::new();
    let mut part_cycles: Vec<Vec<Vec<usize>>> = Vec::new();
    for &(a, b) in &seg_bounds {
        let cyc = close_segment(f, &order[a..b], &cycle_of);
        fp_cycles.extend(cyc.iter().cloned());
        part_cycles.push(cyc);
    }
    let f_prime = TwoFactor::new(fp_cycles)?.graph();
    let modifications = guest.edges().filter(|&(u, v)| !f_prime.has_edge(u, v)).count() + f_prime.edges().filter(|&(u, v)| !guest.has_edge(u, v)).count();

    let mut host_used = vec![false; n];
    for (_, verts) in &blocks {
        for &v in verts {
            host_used[v] = true;
        }
    }
    let host_left: Vec<usize> = (0..n).filter(|&v| !host_used[v]).collect();
    let guest_left: Vec<usize> = part_cycles[used_parts..].iter().flatten().flatten().copied().collect();
    debug_assert_eq!(host_left.len(), guest_left.len());

    let mut cands: Vec<(Embedding, Color, String)> = Vec::new();
    for col in [Color::Red, Color::Blue] {
        let mut map = vec![usize::MAX; n];
        let mut p = 0;
        for (variant, verts) in &blocks {
            let np = if variant.is_two_cliques() { 4 } else { 3 };
            let local_cycles: Vec<Vec<usize>> = part_cycles[p..p + np].iter().flatten().cloned().collect();
            p += np;
            let gverts: Vec<usize> = local_cycles.iter().flatten().copied().collect();
            let mut idx = vec![usize::MAX; n];
            for (i, &v) in gverts.iter().enumerate() {
                idx[v] = i;
            }
            let local = TwoFactor::new(local_cycles.iter().map(|c| c.iter().map(|&v| idx[v]).collect()).collect())?;
            let emb = if variant.is_two_cliques() {
                let want = if variant.pattern().0 == col { Color::Red } else { Color::Blue };
                embed_2factor_two_cliques(&local, want)?
            } else {
                let want = if *variant == FmVariant::D { col } else { col.other() };
                embed_2factor_bipartite(&local, want)?
            };
            for (i, &gv) in gverts.iter().enumerate() {
                map[gv] = verts[emb.embedding.image(i)];
            }
        }
        if !guest_left.is_empty() {
            let sub_g = f_prime.induced(&guest_left);
            let sub_c = coloring.induced(&host_left);
            let e = greedy_expectation_embed(&sub_g, &sub_c, col)?.embedding;
            for (i, &gv) in guest_left.iter().enumerate() {
                map[gv] = host_left[e.image(i)];
            }
        }
        cands.push((Embedding::from_map(map)?, col, "assembly".into()));
        cands.push((greedy_expectation_embed(&guest, coloring, col)?.embedding, col, "expectation".into()));
    }
    let mut best: Option<(Embedding, Color, String, usize)> = None;
    for (e, col, name) in cands {
        let e = improve_embedding(coloring, &guest, &e, col, 10)?;
        let c = count_color(coloring, &guest, &e, col);
        if best.as_ref().map_or(true, |b| c > b.3) {
            best = Some((e, col, name, c));
        }
    }
    let (embedding, color, strategy, count) = best.expect("candidates");
    let report = discrepancy(coloring, &guest, &embedding)?;
    let target = (q(2, 3) - eps) * qu(n);
    let target_met = matches!(stop, StopReason::Imbalanced { .. }).then(|| qu(count) >= target);
    let j_blocks = blocks.iter().filter(|b| !b.0.is_two_cliques()).count();
    Ok(TwoFactorRun {
        embedding,
        report,
        color,
        count,
        strategy,
        k,
        j_blocks,
        clique_blocks: blocks.len() - j_blocks,
        leftover: host_left.len(),
        modifications,
        stop,
        target,
        target_met,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bipartite_construction, random_coloring};

    #[test]
    fn lambda_table() {
        let want = [(2, (1, 3), (1, 3)), (3, (1, 3), (2, 3)), (4, (5, 14), (27, 28)), (5, (9, 25), (32, 25)), (6, (4, 11), (35, 22))];
        for (k, r, l) in want {
            let s = solve_rho_lambda(k).unwrap();
            assert_eq!(s.rho, q(r.0, r.1), "k={k}");
            assert_eq!(s.lambda, q(l.0, l.1), "k={k}");
        }
        assert!(solve_rho_lambda(1).is_err());
    }

    #[test]
    fn bipartite_factor_examples() {
        let r = opt_kk_factor_bipartite(6, 3, &q(1, 3), Color::Red).unwrap();
        assert_eq!(r.red_count, 4);
        assert!(r.blocks.iter().all(|b| b.iter().filter(|&&v| v < 2).count() == 1));
        let b = opt_kk_factor_bipartite(6, 3, &q(1, 3), Color::Blue).unwrap();
        assert_eq!(b.blue_count, 3);
        for (n, k) in [(6, 2), (12, 4), (9, 3)] {
            assert_eq!(opt_kk_factor_bipartite(n, k, &qi(0), Color::Red).unwrap().red_count, 0);
            assert_eq!(opt_kk_factor_bipartite(n, k, &qi(0), Color::Blue).unwrap().blue_count, n / k * c2(k));
        }
        assert!(opt_kk_factor_bipartite(7, 3, &q(1, 3), Color::Red).is_err());
        assert_eq!(kk_bipartite_red_formula(6, 3, &q(1, 3)), qi(4));
    }

    #[test]
    fn two_cliques_examples() {
        let r = kk_factor_two_cliques(2, 2, Color::Red).unwrap();
        let b = kk_factor_two_cliques(2, 2, Color::Blue).unwrap();
        assert_eq!((r.red_count, b.blue_count), (2, 2));
        let r = kk_factor_two_cliques(3, 3, Color::Red).unwrap();
        let b = kk_factor_two_cliques(3, 3, Color::Blue).unwrap();
        assert_eq!((r.red_count, b.blue_count), (6, 4));
        assert_eq!(r.blocks, vec![vec![0, 1, 2], vec![3, 4, 5]]);
        assert!(kk_factor_two_cliques(4, 3, Color::Red).is_err());
    }

    #[test]
    fn unavoidable_trivial_cases() {
        for m in 2..=4 {
            let c = two_cliques_coloring(m, true).unwrap();
            match find_unavoidable(&c, m, &q(1, 100)).unwrap() {
                FmOutcome::Found(w) => {
                    assert_eq!(w.variant, FmVariant::C);
                    let mut v = w.vertices();
                    v.sort();
                    assert_eq!(v, (0..2 * m).collect::<Vec<_>>());
                }
                o => panic!("{o:?}"),
            }
            let d = bipartite_construction(2 * m, 1, 2).unwrap();
            match find_unavoidable(&d, m, &q(1, 100)).unwrap() {
                FmOutcome::Found(w) => assert!(matches!(w.variant, FmVariant::D | FmVariant::DBar)),
                o => panic!("{o:?}"),
            }
        }
        let all = Coloring::all(10, true);
        assert_eq!(find_unavoidable(&all, 2, &q(1, 4)).unwrap(), FmOutcome::Imbalanced { sparse: Color::Blue, count: 0 });
    }

    #[test]
    fn unavoidable_random() {
        for s in 0..5 {
            let c = random_coloring(200, 1, 2, s).unwrap();
            match find_unavoidable(&c, 2, &q(1, 4)).unwrap() {
                FmOutcome::Found(w) => w.verify(&c).unwrap(),
                o => panic!("{o:?}"),
            }
        }
    }

    #[test]
    fn cycle_partition_examples() {
        let c9 = TwoFactor::from_lengths(&[9]).unwrap();
        let p = cycle_partition(&c9, 3).unwrap();
        assert_eq!(p.parts.len(), 4);
        assert!(p.parts[0].is_empty());
        assert_eq!(&p.part_edges[1..], &[2, 2, 2]);
        let tri = TwoFactor::from_lengths(&[3, 3, 3]).unwrap();
        assert_eq!(&cycle_partition(&tri, 3).unwrap().part_edges[1..], &[3, 3, 3]);
        let mix = TwoFactor::from_lengths(&[5, 4]).unwrap();
        let p = cycle_partition(&mix, 4).unwrap();
        assert_eq!(p.parts[0].len(), 1);
        assert!(p.part_edges[1..].iter().all(|&e| e >= 2));
        assert!(cycle_partition(&mix, 2).is_err());
    }

    #[test]
    fn two_factor_lemma_examples() {
        let c6 = TwoFactor::from_lengths(&[6]).unwrap();
        assert_eq!(embed_2factor_bipartite(&c6, Color::Red).unwrap().count, 4);
        assert!(embed_2factor_bipartite(&c6, Color::Blue).unwrap().count >= 3);
        let tt = TwoFactor::from_lengths(&[3, 3]).unwrap();
        assert_eq!(embed_2factor_bipartite(&tt, Color::Red).unwrap().count, 4);
        assert!(embed_2factor_bipartite(&tt, Color::Blue).unwrap().count >= 3);
        let c3 = TwoFactor::from_lengths(&[3]).unwrap();
        assert_eq!(embed_2factor_bipartite(&c3, Color::Red).unwrap().count, 2);
        assert!(embed_2factor_bipartite(&c3, Color::Blue).unwrap().count >= 1);
        let c8 = TwoFactor::from_lengths(&[8]).unwrap();
        assert!(embed_2factor_two_cliques(&c8, Color::Red).unwrap().count >= 6);
        assert_eq!(embed_2factor_two_cliques(&c8, Color::Blue).unwrap().count, 8);
        let t4 = TwoFactor::from_lengths(&[3, 3, 3, 3]).unwrap();
        assert_eq!(embed_2factor_two_cliques(&t4, Color::Blue).unwrap().count, 8);
        let c4 = TwoFactor::from_lengths(&[4]).unwrap();
        assert!(embed_2factor_two_cliques(&c4, Color::Red).unwrap().count >= 2);
        assert_eq!(embed_2factor_two_cliques(&c4, Color::Blue).unwrap().count, 4);
        assert!(embed_2factor_two_cliques(&c6, Color::Blue).is_err());
    }

    #[test]
    fn shapes_and_graph_roundtrip() {
        assert_eq!(TwoFactor::shapes(6).len(), 2);
        assert_eq!(TwoFactor::shapes(9).len(), 4);
        for f in TwoFactor::shapes(10) {
            let g = TwoFactor::from_graph(&f.graph()).unwrap();
            assert_eq!(g.graph(), f.graph());
        }
        let j = TwoFactor::from_lengths(&[3, 4]).unwrap().to_json();
        assert_eq!(TwoFactor::from_json(&j).unwrap().n(), 7);
    }

    #[test]
    fn drivers_on_monochromatic() {
        let all = Coloring::all(12, true);
        let r = kk_factor_driver(&all, 3, &q(1, 10), 0).unwrap();
        assert_eq!(r.count, 12);
        let f = TwoFactor::from_lengths(&[5, 7]).unwrap();
        let t = two_factor_driver(&all, &f, &q(1, 2), 0).unwrap();
        assert_eq!(t.count, 12);
    }

    #[test]
    fn kk_driver_on_extremal_coloring() {
        // k = 2: ρ = 1/3, blocks of 6 vertices
        let n = 60;
        let c = bipartite_construction(n, 1, 3).unwrap();
        let r = kk_factor_driver(&c, 2, &q(1, 100), 0).unwrap();
        let opt = kk_bipartite_optimum(n, 2, 20, Color::Red).max(kk_bipartite_optimum(n, 2, 20, Color::Blue));
        assert!(r.count <= opt);
        assert!(qu(r.count) >= q(1, 3) * qu(n) - qi(2));
    }

    #[test]
    fn two_factor_driver_on_extremal_coloring() {
        let n = 150;
        let c = bipartite_construction(n, 1, 3).unwrap();
        let f = TwoFactor::from_lengths(&[n]).unwrap();
        let r = two_factor_driver(&c, &f, &q(1, 2), 0).unwrap();
        assert!(r.count <= 2 * n / 3);
        assert!(qu(r.count) >= (q(2, 3) - q(1, 2)) * qu(n));
    }
}

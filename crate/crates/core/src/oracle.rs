//! Exhaustive ground truth at small `n`: maximum-discrepancy embeddings and
//! best monochromatic factors.

use crate::error::{param, Error, Result};
use crate::factors::{KkFactor, TwoFactor};
use crate::graph::{discrepancy_unchecked, Color, Coloring, DiscrepancyReport, Embedding, Graph};
use serde::Serialize;

pub const ORACLE_MAX_N: usize = 11;
/// Leaf estimate `n!/|orbit(0)|` allowed above ten vertices.
pub const ORACLE_LEAF_LIMIT: u64 = 4_000_000;
pub const FACTOR_KK_MAX_N: usize = 12;
pub const FACTOR_SHAPE_MAX_N: usize = 9;

/// Guest vertices that some automorphism maps `v` to.
pub fn automorphism_orbit(g: &Graph, v: usize) -> Vec<usize> {
    let n = g.n();
    let deg = g.degrees();
    let adj: Vec<u32> = (0..n).map(|u| g.neighbors(u).iter().fold(0u32, |m, w| m | 1 << w)).collect();
    let order: Vec<usize> = std::iter::once(v).chain((0..n).filter(|&w| w != v)).collect();
    // extends a partial automorphism along `order`
    fn extend(adj: &[u32], deg: &[usize], order: &[usize], img: &mut [usize], i: usize, used: u32) -> bool {
        if i == order.len() {
            return true;
        }
        let u = order[i];
        for h in 0..adj.len() {
            if used >> h & 1 == 1 || deg[h] != deg[u] {
                continue;
            }
            if order[..i].iter().all(|&w| (adj[u] >> w & 1) == (adj[h] >> img[w] & 1)) {
                img[u] = h;
                if extend(adj, deg, order, img, i + 1, used | 1 << h) {
                    return true;
                }
            }
        }
        false
    }
    (0..n)
        .filter(|&u| {
            let mut img = vec![0; n];
            img[v] = u;
            deg[u] == deg[v] && extend(&adj, &deg, &order, &mut img, 1, 1 << u)
        })
        .collect()
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Objective {
    Disc,
    Count(bool),
}

struct Search {
    n: usize,
    e: usize,
    /// Earlier neighbours of each guest vertex.
    back: Vec<Vec<usize>>,
    red: Vec<u32>,
    orbit0: u32,
    obj: Objective,
    map: Vec<usize>,
    best: Option<(i64, Vec<usize>)>,
    nodes: u64,
}

impl Search {
    fn value(&self, r: usize, b: usize) -> i64 {
        match self.obj {
            Objective::Disc => (r as i64 - b as i64).abs(),
            Objective::Count(true) => r as i64,
            Objective::Count(false) => b as i64,
        }
    }

    fn bound(&self, r: usize, b: usize, rem: usize) -> i64 {
        match self.obj {
            Objective::Disc => ((r + rem) as i64 - b as i64).max((b + rem) as i64 - r as i64),
            Objective::Count(true) => (r + rem) as i64,
            Objective::Count(false) => (b + rem) as i64,
        }
    }

    fn run(&mut self, v: usize, used: u32, r: usize, b: usize) {
        self.nodes += 1;
        if v == self.n {
            let val = self.value(r, b);
            if self.best.as_ref().map_or(true, |(bv, _)| val > *bv) {
                self.best = Some((val, self.map.clone()));
            }
            return;
        }
        let decided = r + b;
        if let Some((bv, _)) = &self.best {
            if self.bound(r, b, self.e - decided) <= *bv {
                return;
            }
        }
        for h in 0..self.n {
            if used >> h & 1 == 1 {
                continue;
            }
            if v > 0 && self.orbit0 >> v & 1 == 1 && h < self.map[0] {
                continue;
            }
            let mut dr = 0;
            for &w in &self.back[v] {
                dr += (self.red[h] >> self.map[w] & 1) as usize;
            }
            let db = self.back[v].len() - dr;
            self.map[v] = h;
            self.run(v + 1, used | 1 << h, r + dr, b + db);
        }
    }
}

fn search(f: &Graph, coloring: &Coloring, obj: Objective) -> (Vec<usize>, u64) {
    let n = f.n();
    let orbit = automorphism_orbit(f, 0);
    let mut s = Search {
        n,
        e: f.edge_count(),
        back: (0..n).map(|v| f.neighbors(v).iter().filter(|&w| w < v).collect()).collect(),
        red: (0..n).map(|h| coloring.red().neighbors(h).iter().fold(0u32, |m, w| m | 1 << w)).collect(),
        orbit0: orbit.iter().fold(0u32, |m, &w| m | 1 << w),
        obj,
        map: vec![0; n],
        best: None,
        nodes: 0,
    };
    if n > 0 {
        s.run(0, 0, 0, 0);
    }
    let best = s.best.map(|b| b.1).unwrap_or_default();
    (best, s.nodes)
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

fn check_oracle_capacity(f: &Graph, coloring: &Coloring) -> Result<()> {
    let n = f.n();
    if n != coloring.n() {
        return Err(Error::Dimension(format!("guest has {n} vertices, coloring {}", coloring.n())));
    }
    if n > ORACLE_MAX_N {
        return Err(Error::Capacity(format!("oracle supports n <= {ORACLE_MAX_N}")));
    }
    if n > 10 {
        let orbit = automorphism_orbit(f, 0).len() as u64;
        if factorial(n) / orbit > ORACLE_LEAF_LIMIT {
            return Err(Error::Capacity(format!("n = {n} needs a larger guest automorphism orbit")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleMaxDisc {
    pub embedding: Embedding,
    pub report: DiscrepancyReport,
    pub nodes: u64,
}

/// Exact maximum discrepancy over all bijections; ties go to the lexicographically smallest map.
pub fn oracle_max_disc(f: &Graph, coloring: &Coloring) -> Result<OracleMaxDisc> {
    check_oracle_capacity(f, coloring)?;
    let (map, nodes) = search(f, coloring, Objective::Disc);
    let embedding = Embedding::from_map(map)?;
    let report = discrepancy_unchecked(coloring, f, &embedding);
    Ok(OracleMaxDisc { embedding, report, nodes })
}

/// Exact maximum number of `color` edges over all bijections, with the lexicographically smallest maximiser.
pub fn oracle_max_color(f: &Graph, coloring: &Coloring, color: Color) -> Result<(Embedding, usize)> {
    check_oracle_capacity(f, coloring)?;
    let (map, _) = search(f, coloring, Objective::Count(color.is_red()));
    let e = Embedding::from_map(map)?;
    let c = discrepancy_unchecked(coloring, f, &e).count_of(color);
    Ok((e, c))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FactorKind {
    Kk(usize),
    Shape(TwoFactor),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum FactorWitness {
    Kk(KkFactor),
    Shape(Embedding),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleFactor {
    pub best_red: usize,
    pub best_blue: usize,
    pub red_witness: FactorWitness,
    pub blue_witness: FactorWitness,
}

impl OracleFactor {
    pub fn best(&self) -> usize {
        self.best_red.max(self.best_blue)
    }
}

/// Calls `visit` on every `K_k`-factor, blocks listed with their smallest vertex first.
pub fn for_each_kk_factor(n: usize, k: usize, mut visit: impl FnMut(&[Vec<usize>])) {
    fn rec(k: usize, free: &[usize], blocks: &mut Vec<Vec<usize>>, visit: &mut dyn FnMut(&[Vec<usize>])) {
        let Some((&first, rest)) = free.split_first() else {
            visit(blocks);
            return;
        };
        let mut pick = vec![first];
        choose(k, rest, 0, &mut pick, blocks, visit);
    }
    fn choose(k: usize, rest: &[usize], start: usize, pick: &mut Vec<usize>, blocks: &mut Vec<Vec<usize>>, visit: &mut dyn FnMut(&[Vec<usize>])) {
        if pick.len() == k {
            let remaining: Vec<usize> = rest.iter().copied().filter(|v| !pick.contains(v)).collect();
            blocks.push(pick.clone());
            rec(k, &remaining, blocks, visit);
            blocks.pop();
            return;
        }
        for i in start..rest.len() {
            pick.push(rest[i]);
            choose(k, rest, i + 1, pick, blocks, visit);
            pick.pop();
        }
    }
    if k == 0 || n % k != 0 {
        return;
    }
    let free: Vec<usize> = (0..n).collect();
    rec(k, &free, &mut Vec::new(), &mut visit);
}

/// Exact best red and best blue counts over all factors of the given kind.
pub fn oracle_best_factor(coloring: &Coloring, kind: &FactorKind) -> Result<OracleFactor> {
    let n = coloring.n();
    match kind {
        FactorKind::Kk(k) => {
            let k = *k;
            if !(2..=4).contains(&k) || n > FACTOR_KK_MAX_N {
                return Err(Error::Capacity(format!("K_k-factor oracle supports k in 2..=4 and n <= {FACTOR_KK_MAX_N}")));
            }
            if n % k != 0 {
                return param(format!("k = {k} does not divide n = {n}"));
            }
            let mut best: [Option<(usize, Vec<Vec<usize>>)>; 2] = [None, None];
            let red: Vec<u32> = (0..n).map(|h| coloring.red().neighbors(h).iter().fold(0u32, |m, w| m | 1 << w)).collect();
            for_each_kk_factor(n, k, |blocks| {
                let mut r = 0;
                for b in blocks {
                    for (i, &u) in b.iter().enumerate() {
                        for &v in &b[i + 1..] {
                            r += (red[u] >> v & 1) as usize;
                        }
                    }
                }
                let bl = blocks.len() * k * (k - 1) / 2 - r;
                for (slot, val) in best.iter_mut().zip([r, bl]) {
                    if slot.as_ref().map_or(true, |s| val > s.0) {
                        *slot = Some((val, blocks.to_vec()));
                    }
                }
            });
            let [r, b] = best;
            let (r, b) = (r.expect("n > 0"), b.expect("n > 0"));
            Ok(OracleFactor {
                best_red: r.0,
                best_blue: b.0,
                red_witness: FactorWitness::Kk(KkFactor::from_blocks(coloring, k, r.1)?),
                blue_witness: FactorWitness::Kk(KkFactor::from_blocks(coloring, k, b.1)?),
            })
        }
        FactorKind::Shape(f) => {
            if f.n() != n {
                return Err(Error::Dimension(format!("2-factor has {} vertices, coloring {n}", f.n())));
            }
            if n > FACTOR_SHAPE_MAX_N {
                return Err(Error::Capacity(format!("2-factor oracle supports n <= {FACTOR_SHAPE_MAX_N}")));
            }
            let g = f.graph();
            let (er, r) = oracle_max_color(&g, coloring, Color::Red)?;
            let (eb, b) = oracle_max_color(&g, coloring, Color::Blue)?;
            Ok(OracleFactor { best_red: r, best_blue: b, red_witness: FactorWitness::Shape(er), blue_witness: FactorWitness::Shape(eb) })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bipartite_construction, random_coloring, two_cliques_coloring};

    fn brute_max_disc(f: &Graph, c: &Coloring) -> (usize, Vec<usize>) {
        let n = f.n();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best: Option<(usize, Vec<usize>)> = None;
        loop {
            let e = Embedding::from_map(perm.clone()).unwrap();
            let d = discrepancy_unchecked(c, f, &e).discrepancy;
            if best.as_ref().map_or(true, |b| d > b.0) {
                best = Some((d, perm.clone()));
            }
            // next lexicographic permutation
            let Some(i) = (0..n.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else { break };
            let j = (i + 1..n).rev().find(|&j| perm[j] > perm[i]).unwrap();
            perm.swap(i, j);
            perm[i + 1..].reverse();
        }
        best.unwrap()
    }

    #[test]
    fn examples() {
        let c = Coloring::all(4, true);
        assert_eq!(oracle_max_disc(&Graph::cycle(4), &c).unwrap().report.discrepancy, 4);
        let b = bipartite_construction(6, 1, 3).unwrap();
        let r = oracle_max_disc(&Graph::cycle(6), &b).unwrap();
        assert_eq!((r.report.discrepancy, r.report.mono_plus, r.report.mono_minus), (2, 4, 2));
        let f = Graph::from_edges(7, &[(0, 1), (1, 2), (2, 3), (4, 5), (0, 6)]).unwrap();
        let c = Coloring::from_red(f.clone());
        assert_eq!(oracle_max_disc(&f, &c).unwrap().report.discrepancy, 5);
    }

    #[test]
    fn matches_plain_enumeration() {
        for s in 0..6 {
            let c = random_coloring(7, 1, 2, s).unwrap();
            let f = if s % 2 == 0 { Graph::cycle(7) } else { Graph::from_edges(7, &[(0, 1), (0, 2), (3, 4), (5, 6), (2, 5)]).unwrap() };
            let (d, map) = brute_max_disc(&f, &c);
            let r = oracle_max_disc(&f, &c).unwrap();
            assert_eq!(r.report.discrepancy, d);
            assert_eq!(r.embedding.map(), &map[..]);
        }
    }

    #[test]
    fn orbits() {
        assert_eq!(automorphism_orbit(&Graph::cycle(6), 0).len(), 6);
        let p = Graph::path(5);
        assert_eq!(automorphism_orbit(&p, 0), vec![0, 4]);
        assert_eq!(automorphism_orbit(&p, 2), vec![2]);
    }

    #[test]
    fn factor_examples() {
        let b = bipartite_construction(6, 1, 3).unwrap();
        let r = oracle_best_factor(&b, &FactorKind::Kk(3)).unwrap();
        assert_eq!((r.best_red, r.best_blue), (4, 3));
        let mut count = 0;
        for_each_kk_factor(6, 3, |_| count += 1);
        assert_eq!(count, 10);
        let t = two_cliques_coloring(2, true).unwrap();
        let r = oracle_best_factor(&t, &FactorKind::Kk(2)).unwrap();
        assert_eq!((r.best_red, r.best_blue), (2, 2));
        let c6 = TwoFactor::from_lengths(&[6]).unwrap();
        let r = oracle_best_factor(&b, &FactorKind::Shape(c6)).unwrap();
        assert!(r.best_red <= 4 && r.best_blue <= 4);
        assert!(oracle_best_factor(&b, &FactorKind::Kk(5)).is_err());
        assert!(oracle_best_factor(&Coloring::all(10, true), &FactorKind::Kk(3)).is_err());
    }

    #[test]
    fn capacity() {
        assert!(oracle_max_disc(&Graph::path(12), &Coloring::all(12, true)).is_err());
        assert!(oracle_max_disc(&Graph::path(11), &Coloring::all(11, true)).is_err());
        assert!(oracle_max_disc(&Graph::cycle(11), &Coloring::all(11, true)).is_ok());
    }
}

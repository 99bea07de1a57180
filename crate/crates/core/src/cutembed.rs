//! Embeddings whose color bias is guaranteed by exact conditional expectation.

use crate::bisect::Bisection;
use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::graph::{discrepancy_unchecked, Color, Coloring, DiscrepancyReport, Embedding, Graph};
use crate::rational::{choose2, q, qi, qu, Rational};
use num_bigint::BigInt;
use serde::Serialize;

/// Derandomizes a uniformly random part-respecting bijection: guest vertices
/// of group `j` go to host vertices of group `j`. The objective is the number
/// of guest edges landing on `target` edges.
pub(crate) struct PartDerandomizer<'a> {
    guest: &'a Graph,
    target: &'a Graph,
    guest_group: Vec<usize>,
    placed: Vec<Option<usize>>,
    placed_hosts: Bitset,
    free: Vec<Bitset>,
    unplaced: Vec<Bitset>,
}

impl<'a> PartDerandomizer<'a> {
    /// `guest_parts[j]` and `host_parts[j]` must have equal sizes and each
    /// family must partition `0..n`.
    pub fn new(guest: &'a Graph, target: &'a Graph, guest_parts: &[Bitset], host_parts: &[Bitset]) -> Self {
        let n = guest.n();
        let mut guest_group = vec![0; n];
        for (j, p) in guest_parts.iter().enumerate() {
            debug_assert_eq!(p.count(), host_parts[j].count());
            for v in p.iter() {
                guest_group[v] = j;
            }
        }
        PartDerandomizer {
            guest,
            target,
            guest_group,
            placed: vec![None; n],
            placed_hosts: Bitset::new(n),
            free: host_parts.to_vec(),
            unplaced: guest_parts.to_vec(),
        }
    }

    pub fn place(&mut self, v: usize, h: usize) {
        let g = self.guest_group[v];
        debug_assert!(self.unplaced[g].contains(v) && self.free[g].contains(h));
        self.placed[v] = Some(h);
        self.placed_hosts.insert(h);
        self.unplaced[g].remove(v);
        self.free[g].remove(h);
    }

    /// Exact conditional expectation of the target count given the placements so far.
    pub fn expectation(&self) -> Rational {
        let groups = self.free.len();
        let mut fixed = 0i64;
        let mut acc = qi(0);
        // placed-placed and placed-unplaced
        for (a, b) in self.guest.edges() {
            match (self.placed[a], self.placed[b]) {
                (Some(x), Some(y)) => fixed += self.target.has_edge(x, y) as i64,
                (Some(x), None) | (None, Some(x)) => {
                    let w = if self.placed[a].is_none() { a } else { b };
                    let fj = &self.free[self.guest_group[w]];
                    acc += q(self.target.degree_into(x, fj) as i64, fj.count() as i64);
                }
                (None, None) => {}
            }
        }
        for i in 0..groups {
            for j in i..groups {
                let ef = if i == j {
                    self.guest.edges_within(&self.unplaced[i])
                } else {
                    self.guest.edges_between(&self.unplaced[i], &self.unplaced[j])
                };
                if ef == 0 {
                    continue;
                }
                let (et, den) = if i == j {
                    (self.target.edges_within(&self.free[i]), choose2(self.free[i].count()))
                } else {
                    (self.target.edges_between(&self.free[i], &self.free[j]), (self.free[i].count() * self.free[j].count()) as u64)
                };
                acc += Rational::new(BigInt::from(ef as u64 * et as u64), BigInt::from(den));
            }
        }
        acc + qi(fixed)
    }

    /// Host in `v`'s part maximizing the conditional expectation after placing
    /// `v` there; lowest index on ties.
    pub fn best_host(&self, v: usize) -> usize {
        let g = self.guest_group[v];
        let groups = self.free.len();
        let r: Vec<i128> = (0..groups)
            .map(|j| self.free[j].count() as i128 - (j == g) as i128)
            .collect();
        let s: Vec<i128> = r.iter().map(|&x| if x >= 2 { x * (x - 1) } else { 1 }).collect();
        let scale: i128 = s.iter().product();
        let mut unplaced_after = self.unplaced.clone();
        unplaced_after[g].remove(v);
        let nb = self.guest.neighbors(v);
        let placed_nbrs: Vec<usize> = nb.iter().filter_map(|w| self.placed[w]).collect();
        let deg_v: Vec<i128> = (0..groups).map(|j| nb.intersection_count(&unplaced_after[j]) as i128).collect();
        // weight on each placed host: its guest's unplaced neighbors in part g
        let mut weight = vec![0i128; self.guest.n()];
        for a in 0..self.guest.n() {
            if let Some(x) = self.placed[a] {
                weight[x] = self.guest.neighbors(a).intersection_count(&unplaced_after[g]) as i128;
            }
        }
        let ef: Vec<i128> = (0..groups)
            .map(|j| {
                if j == g {
                    self.guest.edges_within(&unplaced_after[g]) as i128
                } else {
                    self.guest.edges_between(&unplaced_after[g], &unplaced_after[j]) as i128
                }
            })
            .collect();
        let mut best: Option<(i128, usize)> = None;
        for h in self.free[g].iter() {
            let tn = self.target.neighbors(h);
            let mut score = placed_nbrs.iter().filter(|&&x| tn.contains(x)).count() as i128 * scale;
            for j in 0..groups {
                if r[j] == 0 {
                    continue;
                }
                let t_hj = tn.intersection_count(&self.free[j]) as i128;
                score += deg_v[j] * t_hj * (scale / r[j]);
                if ef[j] > 0 {
                    let den = if j == g { r[g] * (r[g] - 1) / 2 } else { r[g] * r[j] };
                    score -= ef[j] * t_hj * (scale / den);
                }
            }
            if r[g] > 0 {
                let lost: i128 = tn.iter().filter(|&x| self.placed_hosts.contains(x)).map(|x| weight[x]).sum();
                score -= lost * (scale / r[g]);
            }
            if best.map_or(true, |(b, _)| score > b) {
                best = Some((score, h));
            }
        }
        best.expect("free host available").1
    }

    /// Places the remaining vertices in decreasing-degree order.
    pub fn run(mut self) -> Embedding {
        let n = self.guest.n();
        let mut order: Vec<usize> = (0..n).filter(|&v| self.placed[v].is_none()).collect();
        order.sort_by_key(|&v| (std::cmp::Reverse(self.guest.degree(v)), v));
        for v in order {
            let h = self.best_host(v);
            self.place(v, h);
        }
        Embedding::from_map(self.placed.into_iter().map(|x| x.expect("all placed")).collect()).expect("bijection")
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExpectationEmbedding {
    pub embedding: Embedding,
    pub report: DiscrepancyReport,
    pub target: Color,
    pub target_count: usize,
    /// `p·e(F)` with `p` the target-color density.
    #[serde(with = "crate::rational::serde_q")]
    pub guarantee: Rational,
}

fn check_sizes(f: &Graph, coloring: &Coloring) -> Result<()> {
    if f.n() != coloring.n() {
        return Err(Error::Dimension(format!("guest has {} vertices, coloring {}", f.n(), coloring.n())));
    }
    Ok(())
}

/// Embedding with at least `⌈p·e(F)⌉` edges of `target`.
pub fn greedy_expectation_embed(f: &Graph, coloring: &Coloring, target: Color) -> Result<ExpectationEmbedding> {
    check_sizes(f, coloring)?;
    let n = f.n();
    let tg = coloring.graph_of(target);
    let all = [Bitset::full(n)];
    let d = PartDerandomizer::new(f, &tg, &all, &all);
    let guarantee = if n < 2 {
        qi(0)
    } else {
        Rational::new(BigInt::from(tg.edge_count() as u64 * f.edge_count() as u64), BigInt::from(choose2(n)))
    };
    let embedding = d.run();
    let report = discrepancy_unchecked(coloring, f, &embedding);
    Ok(ExpectationEmbedding { target_count: report.count_of(target), embedding, report, target, guarantee })
}

#[derive(Clone, Debug, Serialize)]
pub struct CutEmbedding {
    pub embedding: Embedding,
    pub report: DiscrepancyReport,
    /// Color whose count the chosen orientation maximizes.
    pub target: Color,
    pub achieved: usize,
    /// Exact expectation of the target count over part-respecting bijections.
    #[serde(with = "crate::rational::serde_q")]
    pub expectation_bound: Rational,
    /// `true` when `U` was sent to `Y` and `V` to `X`.
    pub crossed: bool,
    /// Odd `n`: the guest vertex of `V` and host vertex of `Y` paired first.
    pub pinned: Option<(usize, usize)>,
    /// Whether `γ·t >= 10 e(F)/n` holds for the given bisections.
    pub lemma_precondition: bool,
}

/// Part-respecting embedding `U→X, V→Y` (or crossed) derandomized to meet the
/// exact expectation `e(U)d_X + e(V)d_Y + e(U,V)d_{X,Y}` of the chosen color.
/// All four orientation/color combinations are tried and the one with the
/// largest `|count - e/2|` is returned.
pub fn cut_embed(f: &Graph, f_bis: &Bisection, coloring: &Coloring, g_bis: &Bisection, _seed: u64) -> Result<CutEmbedding> {
    check_sizes(f, coloring)?;
    let n = f.n();
    if n < 4 {
        return Err(Error::Parameter(format!("cut_embed needs n >= 4, got {n}")));
    }
    f_bis.validate(f)?;
    g_bis.validate(coloring.red())?;
    let u = f_bis.u_side.clone();
    let v = f_bis.v_side();
    let x = g_bis.u_side.clone();
    let y = g_bis.v_side();
    let dev_f = f_bis.deviation.clone();
    let dev_g = qi(g_bis.cut_size as i64) - q((x.count() * y.count()) as i64, 2);
    let abs = |r: &Rational| if r < &qi(0) { -r.clone() } else { r.clone() };
    let lemma_precondition = abs(&dev_g) * abs(&dev_f) * qu(n) >= qu(10 * f.edge_count() * n * n);

    let mut best: Option<CutEmbedding> = None;
    for target in [Color::Red, Color::Blue] {
        let tg = coloring.graph_of(target);
        // odd n: pin a low-degree vertex of V to the best vertex of Y
        let mut pinned = None;
        let (mut vv, mut yy) = (v.clone(), y.clone());
        if n % 2 == 1 {
            let pv = v.iter().min_by_key(|&w| (f.degree(w), w)).expect("V nonempty");
            vv.remove(pv);
            let mut best_y: Option<(Rational, usize)> = None;
            for cand in y.iter() {
                let mut d = PartDerandomizer::new(f, &tg, &[u.clone(), v.clone()], &[x.clone(), y.clone()]);
                d.place(pv, cand);
                let e = d.expectation();
                if best_y.as_ref().map_or(true, |(b, _)| &e > b) {
                    best_y = Some((e, cand));
                }
            }
            let py = best_y.expect("Y nonempty").1;
            yy.remove(py);
            pinned = Some((pv, py));
        }
        for crossed in [false, true] {
            let (hu, hv) = if crossed { (&yy, &x) } else { (&x, &yy) };
            let mut gparts = vec![u.clone(), vv.clone()];
            let mut hparts = vec![hu.clone(), hv.clone()];
            if let Some((pv, py)) = pinned {
                gparts.push(Bitset::from_iter(n, [pv]));
                hparts.push(Bitset::from_iter(n, [py]));
            }
            let mut d = PartDerandomizer::new(f, &tg, &gparts, &hparts);
            if let Some((pv, py)) = pinned {
                d.place(pv, py);
            }
            let bound = d.expectation();
            let embedding = d.run();
            let report = discrepancy_unchecked(coloring, f, &embedding);
            let cand = CutEmbedding {
                achieved: report.count_of(target),
                embedding,
                report,
                target,
                expectation_bound: bound,
                crossed,
                pinned,
                lemma_precondition,
            };
            if best.as_ref().map_or(true, |b| cand.report.discrepancy > b.report.discrepancy) {
                best = Some(cand);
            }
        }
    }
    Ok(best.expect("four candidates"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bisect::{exhaustive_extremal_bisection, Direction};
    use crate::graph::bipartite_construction;

    #[test]
    fn all_red_and_all_blue() {
        let f = Graph::cycle(7);
        let r = greedy_expectation_embed(&f, &Coloring::all(7, true), Color::Red).unwrap();
        assert_eq!(r.target_count, 7);
        let b = greedy_expectation_embed(&f, &Coloring::all(7, false), Color::Red).unwrap();
        assert_eq!(b.guarantee, qi(0));
    }

    #[test]
    fn single_red_edge_k4() {
        let c = Coloring::from_red(Graph::from_edges(4, &[(1, 3)]).unwrap());
        let r = greedy_expectation_embed(&Graph::matching(4), &c, Color::Red).unwrap();
        assert_eq!(r.guarantee, q(1, 3));
        assert_eq!(r.target_count, 1);
    }

    #[test]
    fn expectation_matches_direct_formula() {
        let f = Graph::cycle(6);
        let c = bipartite_construction(6, 1, 3).unwrap();
        let tg = c.red().clone();
        let all = [Bitset::full(6)];
        let d = PartDerandomizer::new(&f, &tg, &all, &all);
        assert_eq!(d.expectation(), q(9 * 6, 15));
    }

    #[test]
    fn cut_embed_examples() {
        let c = bipartite_construction(6, 1, 2).unwrap();
        let gb = Bisection::from_side(c.red(), Bitset::from_iter(6, [0, 1, 2])).unwrap();
        let c6 = Graph::cycle(6);
        let fb = Bisection::from_side(&c6, Bitset::from_iter(6, [0, 2, 4])).unwrap();
        let r = cut_embed(&c6, &fb, &c, &gb, 0).unwrap();
        assert_eq!((r.report.mono_plus, r.report.discrepancy), (6, 6));
        assert!(qu(r.achieved) >= r.expectation_bound);

        let tri = Graph::disjoint_cliques(6, 3);
        let fb = Bisection::from_side(&tri, Bitset::from_iter(6, [0, 1, 2])).unwrap();
        let r = cut_embed(&tri, &fb, &c, &gb, 0).unwrap();
        assert_eq!(r.report.discrepancy, 0);
        assert_eq!(r.expectation_bound, qi(3));

        let all = Coloring::all(7, true);
        let g = Graph::path(7);
        let fb = exhaustive_extremal_bisection(&g, Direction::Max).unwrap();
        let gb = exhaustive_extremal_bisection(all.red(), Direction::Max).unwrap();
        let r = cut_embed(&g, &fb, &all, &gb, 0).unwrap();
        assert_eq!(r.report.mono_plus, 6);
    }

    #[test]
    fn cut_embed_rejects_small() {
        let c = Coloring::all(3, true);
        let g = Graph::path(3);
        let b = Bisection::from_side(&g, Bitset::from_iter(3, [1])).unwrap();
        let gb = Bisection::from_side(c.red(), Bitset::from_iter(3, [1])).unwrap();
        assert!(cut_embed(&g, &b, &c, &gb, 0).is_err());
    }
}

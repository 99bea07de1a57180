//! Bisections with biased cut size and the `disc±` subset discrepancies.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rational::{choose2, q, qi, Rational};
use crate::seed;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::Serialize;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Max,
    Min,
}

impl std::str::FromStr for Direction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max" => Ok(Direction::Max),
            "min" => Ok(Direction::Min),
            _ => Err(Error::Parameter(format!("direction must be max|min, got {s}"))),
        }
    }
}

/// Partition `U ∪ V` with `|U| = ⌊n/2⌋`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Bisection {
    pub u_side: Bitset,
    pub cut_size: usize,
    #[serde(with = "crate::rational::serde_q")]
    pub deviation: Rational,
}

impl Bisection {
    pub fn from_side(f: &Graph, u_side: Bitset) -> Result<Self> {
        if u_side.len() != f.n() {
            return Err(Error::Dimension(format!("side width {} != n {}", u_side.len(), f.n())));
        }
        if u_side.count() != f.n() / 2 {
            return Err(Error::Parameter(format!("|U| = {} but n/2 floor is {}", u_side.count(), f.n() / 2)));
        }
        let cut_size = f.edges_between(&u_side, &u_side.complement());
        let deviation = qi(cut_size as i64) - q(f.edge_count() as i64, 2);
        Ok(Bisection { u_side, cut_size, deviation })
    }

    pub fn v_side(&self) -> Bitset {
        self.u_side.complement()
    }

    /// Checks the stored cut against `f`.
    pub fn validate(&self, f: &Graph) -> Result<()> {
        let fresh = Bisection::from_side(f, self.u_side.clone())?;
        if fresh != *self {
            return Err(Error::Parameter("stored cut does not match graph".into()));
        }
        Ok(())
    }
}

pub const EXHAUSTIVE_BISECTION_MAX_N: usize = 30;

fn better(dir: Direction, cand: usize, best: usize) -> bool {
    match dir {
        Direction::Max => cand > best,
        Direction::Min => cand < best,
    }
}

/// Optimal bisection over all `⌊n/2⌋`-subsets; ties go to the lexicographically
/// smallest sorted vertex list.
pub fn exhaustive_extremal_bisection(f: &Graph, dir: Direction) -> Result<Bisection> {
    let n = f.n();
    if n > EXHAUSTIVE_BISECTION_MAX_N {
        return Err(Error::Capacity(format!("exhaustive bisection supports n <= {EXHAUSTIVE_BISECTION_MAX_N}, got {n}")));
    }
    let adj: Vec<u64> = (0..n).map(|v| f.neighbors(v).iter().fold(0u64, |m, w| m | 1 << w)).collect();
    let full: u64 = if n == 64 { !0 } else { (1u64 << n) - 1 };
    let k = n / 2;
    let mut idx: Vec<usize> = (0..k).collect();
    let mut best: Option<(usize, u64)> = None;
    loop {
        let mask = idx.iter().fold(0u64, |m, &i| m | 1 << i);
        let out = full & !mask;
        let cut: usize = idx.iter().map(|&u| (adj[u] & out).count_ones() as usize).sum();
        if best.map_or(true, |(b, _)| better(dir, cut, b)) {
            best = Some((cut, mask));
        }
        // next combination in lexicographic order
        let mut i = k;
        loop {
            if i == 0 {
                let (_, mask) = best.expect("at least one subset");
                return Bisection::from_side(f, Bitset::from_iter(n, (0..n).filter(|&v| mask >> v & 1 == 1)));
            }
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
        }
    }
}

/// Swap-based hill climbing with seeded random restarts. One budget step is
/// one restart or one accepted swap.
pub fn local_search_bisection(f: &Graph, dir: Direction, budget: usize, seed: u64) -> Result<Bisection> {
    if budget == 0 {
        return Err(Error::Parameter("budget must be >= 1".into()));
    }
    let n = f.n();
    let mut rng = seed::rng(seed);
    let sign: i64 = if dir == Direction::Max { 1 } else { -1 };
    let mut steps = 0usize;
    let mut best: Option<(usize, Bitset)> = None;
    let mut order: Vec<usize> = (0..n).collect();
    while steps < budget {
        steps += 1;
        order.shuffle(&mut rng);
        let mut in_u = vec![false; n];
        for &v in &order[..n / 2] {
            in_u[v] = true;
        }
        // d_u[v] = neighbors of v in U
        let mut d_u: Vec<i64> = (0..n).map(|v| f.neighbors(v).iter().filter(|&w| in_u[w]).count() as i64).collect();
        let deg: Vec<i64> = (0..n).map(|v| f.degree(v) as i64).collect();
        loop {
            let mut improved = false;
            'scan: for u in 0..n {
                if !in_u[u] {
                    continue;
                }
                for v in 0..n {
                    if in_u[v] {
                        continue;
                    }
                    let uv = f.has_edge(u, v) as i64;
                    let gain = (2 * d_u[u] - deg[u]) + (deg[v] - 2 * d_u[v]) + 2 * uv;
                    if sign * gain > 0 {
                        in_u[u] = false;
                        in_u[v] = true;
                        for w in f.neighbors(u).iter() {
                            d_u[w] -= 1;
                        }
                        for w in f.neighbors(v).iter() {
                            d_u[w] += 1;
                        }
                        steps += 1;
                        improved = true;
                        if steps >= budget {
                            break 'scan;
                        }
                        continue 'scan;
                    }
                }
            }
            if !improved || steps >= budget {
                break;
            }
        }
        let side = Bitset::from_iter(n, (0..n).filter(|&v| in_u[v]));
        let cut = f.edges_between(&side, &side.complement());
        if best.as_ref().map_or(true, |(b, _)| better(dir, cut, *b)) {
            best = Some((cut, side));
        }
    }
    Bisection::from_side(f, best.expect("budget >= 1").1)
}

/// Extremal bisection: exhaustive when `n <= exhaustive_max`, local search otherwise.
pub fn extremal_bisection(f: &Graph, dir: Direction, exhaustive_max: usize, budget: usize, seed: u64) -> Result<Bisection> {
    if f.n() <= exhaustive_max.min(EXHAUSTIVE_BISECTION_MAX_N) {
        exhaustive_extremal_bisection(f, dir)
    } else {
        local_search_bisection(f, dir, budget, seed)
    }
}

/// `disc⁺` and `disc⁻` with witnesses.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct DiscPM {
    #[serde(with = "crate::rational::serde_q")]
    pub disc_plus: Rational,
    #[serde(with = "crate::rational::serde_q")]
    pub disc_minus: Rational,
    pub witness_plus: Bitset,
    pub witness_minus: Bitset,
    pub exact: bool,
}

pub const DISC_PM_EXACT_MAX_N: usize = 24;

/// `disc(U) = e(U) - p·C(|U|,2)` with `p = e(F)/C(n,2)`.
pub fn disc_value(f: &Graph, u: &Bitset) -> Rational {
    let n = f.n();
    if n < 2 {
        return qi(0);
    }
    let scaled = scaled_disc(choose2(n) as i64, f.edge_count() as i64, f.edges_within(u) as i64, u.count());
    Rational::new(scaled.into(), (choose2(n) as i64).into())
}

#[inline]
fn scaled_disc(pairs: i64, e: i64, e_u: i64, size: usize) -> i64 {
    pairs * e_u - e * choose2(size) as i64
}

/// Exact by Gray-code enumeration for `n <= 24`; sampled local search beyond.
pub fn disc_pm(f: &Graph) -> DiscPM {
    let n = f.n();
    if n <= DISC_PM_EXACT_MAX_N {
        disc_pm_exact(f)
    } else {
        disc_pm_heuristic(f, 64, 0x5eed)
    }
}

fn disc_pm_exact(f: &Graph) -> DiscPM {
    let n = f.n();
    let pairs = choose2(n).max(1) as i64;
    let e = f.edge_count() as i64;
    let adj: Vec<u32> = (0..n).map(|v| f.neighbors(v).iter().fold(0u32, |m, w| m | 1 << w)).collect();
    let (mut best_p, mut best_m) = ((0i64, 0u32), (0i64, 0u32));
    let mut set = 0u32;
    let mut e_u = 0i64;
    for i in 1u64..(1u64 << n) {
        let v = i.trailing_zeros() as usize;
        let bit = 1u32 << v;
        if set & bit == 0 {
            e_u += (adj[v] & set).count_ones() as i64;
            set |= bit;
        } else {
            set &= !bit;
            e_u -= (adj[v] & set).count_ones() as i64;
        }
        let s = scaled_disc(pairs, e, e_u, set.count_ones() as usize);
        if s > best_p.0 || (s == best_p.0 && s > 0 && set < best_p.1) {
            best_p = (s, set);
        }
        if -s > best_m.0 || (-s == best_m.0 && s < 0 && set < best_m.1) {
            best_m = (-s, set);
        }
    }
    let to_set = |m: u32| Bitset::from_iter(n, (0..n).filter(|&v| m >> v & 1 == 1));
    DiscPM {
        disc_plus: Rational::new(best_p.0.into(), pairs.into()),
        disc_minus: Rational::new(best_m.0.into(), pairs.into()),
        witness_plus: to_set(best_p.1),
        witness_minus: to_set(best_m.1),
        exact: true,
    }
}

/// Random starts plus single-vertex toggle hill climbing for both signs.
pub fn disc_pm_heuristic(f: &Graph, restarts: usize, seed: u64) -> DiscPM {
    let n = f.n();
    let pairs = choose2(n).max(1) as i64;
    let e = f.edge_count() as i64;
    let mut rng = seed::rng(seed);
    let mut best = [(0i64, Bitset::new(n)), (0i64, Bitset::new(n))];
    for r in 0..restarts {
        for (slot, sign) in [(0usize, 1i64), (1, -1)] {
            let mut inset: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
            let _ = r;
            let mut d_in: Vec<i64> = (0..n).map(|v| f.neighbors(v).iter().filter(|&w| inset[w]).count() as i64).collect();
            let mut size = inset.iter().filter(|&&b| b).count() as i64;
            loop {
                let mut improved = false;
                for v in 0..n {
                    // change of C(n,2)·disc when toggling v
                    let delta = if inset[v] {
                        -pairs * d_in[v] + e * (size - 1)
                    } else {
                        pairs * d_in[v] - e * size
                    };
                    if sign * delta > 0 {
                        let add = !inset[v];
                        inset[v] = add;
                        size += if add { 1 } else { -1 };
                        for w in f.neighbors(v).iter() {
                            d_in[w] += if add { 1 } else { -1 };
                        }
                        improved = true;
                    }
                }
                if !improved {
                    break;
                }
            }
            let set = Bitset::from_iter(n, (0..n).filter(|&v| inset[v]));
            let val = sign * scaled_disc(pairs, e, f.edges_within(&set) as i64, set.count());
            if val > best[slot].0 {
                best[slot] = (val, set);
            }
        }
    }
    let [(p, wp), (m, wm)] = best;
    DiscPM {
        disc_plus: Rational::new(p.into(), pairs.into()),
        disc_minus: Rational::new(m.into(), pairs.into()),
        witness_plus: wp,
        witness_minus: wm,
        exact: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exhaustive_small() {
        assert_eq!(exhaustive_extremal_bisection(&Graph::cycle(4), Direction::Max).unwrap().cut_size, 4);
        assert_eq!(exhaustive_extremal_bisection(&Graph::complete(4), Direction::Max).unwrap().cut_size, 4);
        assert_eq!(exhaustive_extremal_bisection(&Graph::complete(4), Direction::Min).unwrap().cut_size, 4);
        let p3 = exhaustive_extremal_bisection(&Graph::path(3), Direction::Max).unwrap();
        assert_eq!((p3.u_side.to_vec(), p3.cut_size), (vec![1], 2));
        assert_eq!(p3.deviation, qi(1));
        assert!(exhaustive_extremal_bisection(&Graph::new(31), Direction::Max).is_err());
    }

    #[test]
    fn local_search_small() {
        for s in 0..10 {
            assert_eq!(local_search_bisection(&Graph::cycle(4), Direction::Max, 4, s).unwrap().cut_size, 4);
            assert_eq!(local_search_bisection(&Graph::complete(4), Direction::Max, 1, s).unwrap().cut_size, 4);
        }
        assert!(local_search_bisection(&Graph::cycle(4), Direction::Max, 0, 0).is_err());
    }

    #[test]
    fn disc_pm_examples() {
        let k4 = disc_pm(&Graph::complete(4));
        assert_eq!((k4.disc_plus.clone(), k4.disc_minus.clone()), (qi(0), qi(0)));
        let c5 = disc_pm(&Graph::cycle(5));
        assert_eq!(c5.disc_plus, q(1, 2));
        assert_eq!(c5.disc_minus, q(1, 2));
        assert_eq!(disc_value(&Graph::cycle(5), &c5.witness_plus), q(1, 2));
        assert_eq!(disc_value(&Graph::cycle(5), &c5.witness_minus), q(-1, 2));
        let e4 = disc_pm(&Graph::new(4));
        assert_eq!((e4.disc_plus, e4.disc_minus), (qi(0), qi(0)));
    }

    #[test]
    fn heuristic_matches_exact_on_small() {
        let g = crate::graph::random_coloring(14, 1, 2, 3).unwrap().red().clone();
        let ex = disc_pm(&g);
        let he = disc_pm_heuristic(&g, 64, 1);
        assert!(he.disc_plus <= ex.disc_plus && he.disc_minus <= ex.disc_minus);
        assert_eq!(disc_value(&g, &he.witness_plus), he.disc_plus);
    }
}

//! Switching embedders: guest/host pair certificates, the pair-switching
//! embedder, the single-pair and greedy switch embedders, and the drivers for
//! bounded-degree and regular guests.

use crate::bisect::{extremal_bisection, Bisection, Direction};
use crate::bitset::Bitset;
use crate::cutembed::{cut_embed, greedy_expectation_embed};
use crate::error::{Error, Result};
use crate::graph::{discrepancy_unchecked, Color, Coloring, DiscrepancyReport, Embedding, Graph};
use crate::rational::{choose2, fmt, q, qi, qu, Rational};
use crate::seed;
use num_bigint::{BigInt, BigUint};
use num_traits::Signed;
use rand::seq::SliceRandom;
use serde::Serialize;
use std::fmt::Display;

/// Tunable constants of the switching arguments.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SwitchParams {
    #[serde(with = "crate::rational::serde_q")]
    pub beta: Rational,
    #[serde(with = "crate::rational::serde_q")]
    pub delta: Rational,
    #[serde(with = "crate::rational::serde_q")]
    pub rho: Rational,
    pub trials: usize,
    pub bisection_budget: usize,
    pub exhaustive_bisection_max: usize,
    pub certificate_retries: usize,
}

impl Default for SwitchParams {
    fn default() -> Self {
        SwitchParams {
            beta: q(1, 1000),
            delta: q(1, 20),
            rho: q(1, 100),
            trials: 64,
            bisection_budget: 400,
            exhaustive_bisection_max: 20,
            certificate_retries: 16,
        }
    }
}

/// `Σ √d_i`, kept as the exact list with certified bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqrtSum {
    pub terms: Vec<usize>,
}

const SQRT_BITS: u32 = 40;

/// Lower and upper rational bounds on `√r` with error `2^-40`.
pub fn sqrt_bounds(r: &Rational) -> (Rational, Rational) {
    assert!(!r.is_negative());
    let (a, b) = (r.numer().to_biguint().unwrap(), r.denom().to_biguint().unwrap());
    let scaled = a * &b << (2 * SQRT_BITS);
    let s = scaled.sqrt();
    let den = BigInt::from(b) << SQRT_BITS;
    let lo = Rational::new(BigInt::from(s.clone()), den.clone());
    let exact = &s * &s == ((r.numer().to_biguint().unwrap() * r.denom().to_biguint().unwrap()) << (2 * SQRT_BITS));
    let hi = if exact { lo.clone() } else { Rational::new(BigInt::from(s + BigUint::from(1u8)), den) };
    (lo, hi)
}

impl SqrtSum {
    pub fn value(&self) -> f64 {
        self.terms.iter().map(|&d| (d as f64).sqrt()).sum()
    }

    /// Exact `t²` when all terms are equal.
    pub fn square_exact(&self) -> Option<Rational> {
        let first = *self.terms.first()?;
        self.terms.iter().all(|&d| d == first).then(|| qu(self.terms.len() * self.terms.len() * first))
    }

    pub fn bounds(&self) -> (Rational, Rational) {
        let mut lo = qi(0);
        let mut hi = qi(0);
        for &d in &self.terms {
            let (l, h) = sqrt_bounds(&qu(d));
            lo += l;
            hi += h;
        }
        (lo, hi)
    }

    /// Lower bound on `c·t` for `c >= 0`, given `c` as `√c2`.
    pub fn scaled_lower(&self, c2: &Rational) -> Rational {
        let (cl, _) = sqrt_bounds(c2);
        self.bounds().0 * cl
    }

    /// Decides `a >= -k·√c2·t` (with `k >= 0`), exactly when possible.
    fn at_least_neg(&self, a: &Rational, k: &Rational, c2: &Rational) -> bool {
        if !a.is_negative() {
            return true;
        }
        if let Some(t2) = self.square_exact() {
            return a * a <= k * k * c2 * t2;
        }
        let (_, th) = self.bounds();
        let (_, ch) = sqrt_bounds(c2);
        -a <= k * ch * th
    }
}

// ------------------------------------------------------------ certificates

/// Guest vertex pairs inside the `U` side of a bisection.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GuestCertificate {
    pub u_side: Bitset,
    pub pairs: Vec<(usize, usize)>,
    pub d_values: Vec<usize>,
    pub u_independent: bool,
}

impl GuestCertificate {
    pub fn value_t(&self) -> SqrtSum {
        SqrtSum { terms: self.d_values.clone() }
    }

    /// Re-checks every defining condition against `f`.
    pub fn verify(&self, f: &Graph) -> Result<()> {
        let n = f.n();
        let bad = |m: String| Err(Error::Certificate(format!("guest: {m}")));
        if self.u_side.len() != n || self.u_side.count() != n / 2 {
            return bad(format!("|U| = {} (need {})", self.u_side.count(), n / 2));
        }
        if self.pairs.len() != self.d_values.len() {
            return bad("pairs and d_values differ in length".into());
        }
        if 20 * self.pairs.len() > n {
            return bad(format!("{} pairs exceed 0.05n", self.pairs.len()));
        }
        let v = self.u_side.complement();
        let mut seen = Bitset::new(n);
        if self.u_independent && !f.is_independent(&self.u_side) {
            return bad("U is not independent".into());
        }
        for (i, (&(a, b), &d)) in self.pairs.iter().zip(&self.d_values).enumerate() {
            for w in [a, b] {
                if w >= n || !self.u_side.contains(w) || seen.contains(w) {
                    return bad(format!("pair {i}: vertex {w} not a fresh U vertex"));
                }
                seen.insert(w);
            }
            if d == 0 {
                return bad(format!("pair {i}: d_i = 0"));
            }
            let na = f.neighbors(a).and(&v);
            let nb = f.neighbors(b).and(&v);
            let vi = na.difference_count(&nb);
            let vpi = nb.difference_count(&na);
            if 100 * vi < d {
                return bad(format!("pair {i}: |V_i| = {vi} < 0.01·{d}"));
            }
            if 3 * vi > 2 * v.count() || 3 * vpi > 2 * v.count() {
                return bad(format!("pair {i}: one-sided difference exceeds 2|V|/3"));
            }
            if !self.u_independent {
                let diff = na.count() as i64 - nb.count() as i64;
                if diff * diff > 400 * d as i64 {
                    return bad(format!("pair {i}: degree gap {diff} exceeds 20·sqrt({d})"));
                }
            }
        }
        Ok(())
    }
}

/// Host vertex pairs inside the `X` side of a bisection of `K_n`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HostCertificate {
    pub x_side: Bitset,
    pub pairs: Vec<(usize, usize)>,
    #[serde(with = "crate::rational::serde_q")]
    pub beta: Rational,
}

pub fn host_pair_target(n: usize) -> usize {
    n.div_ceil(20)
}

impl HostCertificate {
    pub fn verify(&self, coloring: &Coloring) -> Result<()> {
        let n = coloring.n();
        let bad = |m: String| Err(Error::Certificate(format!("host: {m}")));
        if self.x_side.len() != n || self.x_side.count() != n / 2 {
            return bad(format!("|X| = {} (need {})", self.x_side.count(), n / 2));
        }
        if self.pairs.len() != host_pair_target(n) {
            return bad(format!("{} pairs, need {}", self.pairs.len(), host_pair_target(n)));
        }
        let y = self.x_side.complement();
        let ysz = y.count();
        let red = coloring.red();
        let mut seen = Bitset::new(n);
        for (i, &(a, b)) in self.pairs.iter().enumerate() {
            for w in [a, b] {
                if w >= n || !self.x_side.contains(w) || seen.contains(w) {
                    return bad(format!("pair {i}: vertex {w} not a fresh X vertex"));
                }
                seen.insert(w);
            }
            let na = red.neighbors(a).and(&y);
            let nb = red.neighbors(b).and(&y);
            let (da, db) = (na.count(), nb.count());
            if qu(da.abs_diff(db)) > &self.beta * qu(n) {
                return bad(format!("pair {i}: degree gap {} > beta·n", da.abs_diff(db)));
            }
            let sym = na.symmetric_difference_count(&nb);
            if 50 * sym < ysz || 50 * sym > 49 * ysz {
                return bad(format!("pair {i}: symmetric difference {sym} outside [0.02,0.98]·|Y|"));
            }
            for d in [da, db] {
                if 10 * d < ysz || 10 * d > 9 * ysz {
                    return bad(format!("pair {i}: Y-degree {d} outside [0.1,0.9]·|Y|"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HostFailure {
    pub reason: String,
    pub high: usize,
    pub low: usize,
    pub medium: usize,
    pub pairs_found: usize,
    pub pairs_needed: usize,
}

impl Display for HostFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{} (high {}, low {}, medium {}, pairs {}/{})",
            self.reason, self.high, self.low, self.medium, self.pairs_found, self.pairs_needed
        )
    }
}

impl From<HostFailure> for Error {
    fn from(h: HostFailure) -> Error {
        Error::Certificate(h.to_string())
    }
}

const HOST_PARTITIONS: usize = 8;

/// Random balanced partition (`|X| = ⌊n/2⌋`): shuffle and split.
fn random_bisection_side(n: usize, rng: &mut seed::Rng) -> Bitset {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    Bitset::from_iter(n, order[..n / 2].iter().copied())
}

/// Host pairs with close `Y`-degrees and a balanced symmetric difference.
pub fn certify_host(coloring: &Coloring, beta: &Rational, seed: u64) -> std::result::Result<HostCertificate, HostFailure> {
    let n = coloring.n();
    let need = host_pair_target(n);
    if n < 40 {
        return Err(HostFailure {
            reason: format!("n = {n} < 40"),
            high: 0,
            low: 0,
            medium: 0,
            pairs_found: 0,
            pairs_needed: need,
        });
    }
    if !beta.is_positive() {
        return Err(HostFailure { reason: "beta must be positive".into(), high: 0, low: 0, medium: 0, pairs_found: 0, pairs_needed: need });
    }
    let red = coloring.red();
    let mut rng = seed::rng(seed);
    // candidate partitions ordered by worst per-vertex imbalance |d_X - d_Y|
    let mut parts: Vec<(usize, Bitset)> = (0..HOST_PARTITIONS)
        .map(|_| {
            let x = random_bisection_side(n, &mut rng);
            let imb = (0..n)
                .map(|v| {
                    let dx = red.degree_into(v, &x);
                    dx.abs_diff(red.degree(v) - dx)
                })
                .max()
                .unwrap_or(0);
            (imb, x)
        })
        .collect();
    parts.sort_by_key(|p| p.0);
    let mut last_failure = None;
    for (_, x) in parts {
        match host_pairs_on(coloring, &x, beta) {
            Ok(c) => return Ok(c),
            Err(f) => last_failure = Some(f),
        }
    }
    Err(last_failure.expect("at least one partition"))
}

fn host_pairs_on(coloring: &Coloring, x: &Bitset, beta: &Rational) -> std::result::Result<HostCertificate, HostFailure> {
    let n = coloring.n();
    let need = host_pair_target(n);
    let red = coloring.red();
    let y = x.complement();
    let ysz = y.count();
    let ny: Vec<Bitset> = (0..n).map(|v| red.neighbors(v).and(&y)).collect();
    let (mut high, mut low) = (0, 0);
    let mut med: Vec<usize> = Vec::new();
    for v in x.iter() {
        let d = ny[v].count();
        if 10 * d > 9 * ysz {
            high += 1;
        } else if 10 * d < ysz {
            low += 1;
        } else {
            med.push(v);
        }
    }
    // bucket index ⌊d_Y / (βn)⌋
    let width = beta * qu(n);
    let mut buckets: std::collections::BTreeMap<BigInt, Vec<usize>> = Default::default();
    for &v in &med {
        let k = (qu(ny[v].count()) / &width).floor().to_integer();
        buckets.entry(k).or_default().push(v);
    }
    let mut pairs = Vec::new();
    'outer: for (_, bucket) in buckets {
        let mut used = vec![false; bucket.len()];
        for i in 0..bucket.len() {
            if used[i] {
                continue;
            }
            for j in i + 1..bucket.len() {
                if used[j] {
                    continue;
                }
                let (a, b) = (bucket[i], bucket[j]);
                let sym = ny[a].symmetric_difference_count(&ny[b]);
                let gap = ny[a].count().abs_diff(ny[b].count());
                if 50 * sym >= ysz && 50 * sym <= 49 * ysz && qu(gap) <= width {
                    used[i] = true;
                    used[j] = true;
                    pairs.push((a, b));
                    if pairs.len() == need {
                        break 'outer;
                    }
                    break;
                }
            }
        }
    }
    let fail = |reason: &str, found: usize| HostFailure {
        reason: reason.to_string(),
        high,
        low,
        medium: med.len(),
        pairs_found: found,
        pairs_needed: need,
    };
    if pairs.len() < need {
        let reason = if med.is_empty() {
            "no vertex with Y-degree in [0.1,0.9]|Y|"
        } else {
            "symmetric-difference window starved within degree buckets"
        };
        return Err(fail(reason, pairs.len()));
    }
    let cert = HostCertificate { x_side: x.clone(), pairs, beta: beta.clone() };
    cert.verify(coloring).map_err(|e| fail(&e.to_string(), need))?;
    Ok(cert)
}

/// Guest pairs for a `d`-regular graph, `d <= n/2`.
pub fn certify_guest_regular(f: &Graph, seed: u64) -> Result<GuestCertificate> {
    certify_guest_regular_with(f, seed, SwitchParams::default().certificate_retries)
}

pub fn certify_guest_regular_with(f: &Graph, seed: u64, retries: usize) -> Result<GuestCertificate> {
    let n = f.n();
    let d = f.regular_degree().ok_or_else(|| Error::Precondition("guest is not regular".into()))?;
    let need = n / 100;
    if need == 0 {
        return Err(Error::Precondition(format!("n = {n} too small: 0.01n < 1")));
    }
    if 2 * d > n || d == 0 {
        return Err(Error::Precondition(format!("degree {d} outside [1, n/2]")));
    }
    let mut best_found = 0;
    for attempt in 0..retries.max(1) {
        let mut rng = seed::rng(seed::mix(seed, attempt as u64));
        let u = random_bisection_side(n, &mut rng);
        let v = u.complement();
        let nv: Vec<Bitset> = (0..n).map(|w| f.neighbors(w).and(&v)).collect();
        let star: Vec<usize> = u
            .iter()
            .filter(|&w| {
                let dev = 2 * nv[w].count() as i64 - d as i64;
                dev * dev <= 400 * d as i64
            })
            .collect();
        let mut used = vec![false; star.len()];
        let mut pairs = Vec::new();
        'outer: for i in 0..star.len() {
            if used[i] {
                continue;
            }
            for j in i + 1..star.len() {
                if used[j] {
                    continue;
                }
                let (a, b) = (star[i], star[j]);
                for (p, r) in [(a, b), (b, a)] {
                    let vi = nv[p].difference_count(&nv[r]);
                    let vpi = nv[r].difference_count(&nv[p]);
                    if 100 * vi >= d && 3 * vi <= 2 * v.count() && 3 * vpi <= 2 * v.count() {
                        used[i] = true;
                        used[j] = true;
                        pairs.push((p, r));
                        if pairs.len() == need {
                            break 'outer;
                        }
                        continue 'outer;
                    }
                }
            }
        }
        best_found = best_found.max(pairs.len());
        if pairs.len() == need {
            let cert = GuestCertificate { u_side: u, d_values: vec![d; need], pairs, u_independent: false };
            if cert.verify(f).is_ok() {
                return Ok(cert);
            }
        }
    }
    Err(Error::Certificate(format!("guest: found at most {best_found} of {need} pairs after {retries} partitions")))
}

/// Guest pairs when an independent set covers half the vertices.
pub fn certify_guest_independent(f: &Graph, indep: &Bitset) -> Result<GuestCertificate> {
    let n = f.n();
    if indep.len() != n || !f.is_independent(indep) {
        return Err(Error::Precondition("set is not independent".into()));
    }
    if indep.count() < n / 2 {
        return Err(Error::Precondition(format!("independent set has {} < n/2 vertices", indep.count())));
    }
    if f.has_isolated_vertex() {
        return Err(Error::Precondition("guest has an isolated vertex".into()));
    }
    let u = Bitset::from_iter(n, indep.iter().take(n / 2));
    let us = u.to_vec();
    let mut used = vec![false; us.len()];
    let mut pairs = Vec::new();
    for i in 0..us.len() {
        if used[i] {
            continue;
        }
        for j in i + 1..us.len() {
            if used[j] {
                continue;
            }
            let (a, b) = (us[i], us[j]);
            let pick = if f.neighbors(a).difference_count(f.neighbors(b)) > 0 {
                Some((a, b))
            } else if f.neighbors(b).difference_count(f.neighbors(a)) > 0 {
                Some((b, a))
            } else {
                None
            };
            if let Some(p) = pick {
                used[i] = true;
                used[j] = true;
                pairs.push(p);
                break;
            }
        }
    }
    let want = n / 20;
    if pairs.len() < want {
        let v = u.complement();
        let (w, deg) = v.iter().map(|w| (w, f.degree(w))).max_by_key(|&(w, d)| (d, std::cmp::Reverse(w))).unwrap_or((0, 0));
        return Err(Error::Certificate(format!(
            "guest: only {} of {want} switching pairs; vertex {w} has degree {deg} (0.4n = {})",
            pairs.len(),
            fmt(&q(2 * n as i64, 5))
        )));
    }
    if 3 * f.max_degree() > 2 * n.div_ceil(2) {
        return Err(Error::Precondition(format!("max degree {} exceeds 2/3 of ceil(n/2)", f.max_degree())));
    }
    pairs.truncate(want);
    let cert = GuestCertificate { u_side: u, d_values: vec![1; pairs.len()], pairs, u_independent: true };
    cert.verify(f)?;
    Ok(cert)
}

// ---------------------------------------------------------------- results

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Strategy {
    Expectation,
    CutEmbed,
    MainSwitch,
    SinglePair,
    GreedySwitch,
}

impl Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Strategy::Expectation => "expectation",
            Strategy::CutEmbed => "cut-embed",
            Strategy::MainSwitch => "main-switch",
            Strategy::SinglePair => "single-pair",
            Strategy::GreedySwitch => "greedy-switch",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SwitchResult {
    pub embedding: Embedding,
    pub report: DiscrepancyReport,
    pub strategy: Strategy,
    pub case_taken: String,
    /// Bound the strategy claims for its target quantity, when it has one.
    #[serde(with = "crate::rational::serde_q_opt")]
    pub certificate_value: Option<Rational>,
    /// `count(F_1) - count(F_2)` for switching strategies.
    pub switch_gap: Option<i64>,
    /// Whether the switching identity was confirmed by recount.
    pub identity_holds: Option<bool>,
    pub notes: Vec<String>,
}

impl SwitchResult {
    fn plain(embedding: Embedding, report: DiscrepancyReport, strategy: Strategy, case: &str, bound: Option<Rational>) -> Self {
        SwitchResult {
            embedding,
            report,
            strategy,
            case_taken: case.to_string(),
            certificate_value: bound,
            switch_gap: None,
            identity_holds: None,
            notes: Vec::new(),
        }
    }

    /// Recounts the report from scratch.
    pub fn recount_matches(&self, f: &Graph, coloring: &Coloring) -> bool {
        discrepancy_unchecked(coloring, f, &self.embedding) == self.report
    }
}

fn check_dims(f: &Graph, coloring: &Coloring) -> Result<()> {
    if f.n() != coloring.n() {
        return Err(Error::Dimension(format!("guest has {} vertices, coloring {}", f.n(), coloring.n())));
    }
    Ok(())
}

/// Completes a partial guest→host map by pairing leftover guests and hosts in index order.
fn complete_map(partial: &[Option<usize>]) -> Embedding {
    let n = partial.len();
    let mut used = vec![false; n];
    for h in partial.iter().flatten() {
        used[*h] = true;
    }
    let mut free = (0..n).filter(|&h| !used[h]);
    let map = partial.iter().map(|p| p.unwrap_or_else(|| free.next().expect("free host"))).collect();
    Embedding::from_map(map).expect("bijection")
}

fn better(a: &DiscrepancyReport, b: &DiscrepancyReport) -> bool {
    a.discrepancy > b.discrepancy
}

// ------------------------------------------------------ pair-switching lemma

/// Pair-switching embedder for a guest-good `F` and host-good coloring.
pub fn main_switch_embed(
    f: &Graph,
    gc: &GuestCertificate,
    coloring: &Coloring,
    hc: &HostCertificate,
    params: &SwitchParams,
    seed: u64,
) -> Result<SwitchResult> {
    check_dims(f, coloring)?;
    gc.verify(f)?;
    hc.verify(coloring)?;
    let n = f.n();
    let m = gc.pairs.len();
    if m > hc.pairs.len() {
        return Err(Error::Certificate(format!("{m} guest pairs but only {} host pairs", hc.pairs.len())));
    }
    let red = coloring.red();
    let u = &gc.u_side;
    let v = u.complement();
    let x = &hc.x_side;
    let y = x.complement();
    // orient so |V_i| >= |V'_i| and |Y_i| >= |Y'_i|
    let mut gp = Vec::with_capacity(m);
    for &(a, b) in &gc.pairs {
        let na = f.neighbors(a).and(&v);
        let nb = f.neighbors(b).and(&v);
        let (vi, vpi) = (na.minus(&nb), nb.minus(&na));
        gp.push(if vi.count() >= vpi.count() { (a, b, vi, vpi) } else { (b, a, vpi, vi) });
    }
    let mut hp = Vec::with_capacity(m);
    for &(a, b) in &hc.pairs[..m] {
        let na = red.neighbors(a).and(&y);
        let nb = red.neighbors(b).and(&y);
        let (yi, ypi) = (na.minus(&nb), nb.minus(&na));
        hp.push(if yi.count() >= ypi.count() { (a, b, yi, ypi) } else { (b, a, ypi, yi) });
    }
    let vlist = v.to_vec();
    let ylist = y.to_vec();
    let rho2_over_100 = &params.rho * &params.rho / qi(100);
    let sample_g = |t: u64| -> Vec<usize> {
        let mut rng = seed::rng(seed::mix(seed, t));
        let mut ys = ylist.clone();
        ys.shuffle(&mut rng);
        ys
    };
    let d_values = |g: &[usize]| -> Vec<i64> {
        let mut img = vec![usize::MAX; n];
        for (k, &w) in vlist.iter().enumerate() {
            img[w] = g[k];
        }
        gp.iter()
            .zip(&hp)
            .map(|((_, _, vi, vpi), (_, _, yi, ypi))| {
                let cnt = |s: &Bitset, t: &Bitset| s.iter().filter(|&w| t.contains(img[w])).count() as i64;
                cnt(vi, yi) - cnt(vi, ypi) - cnt(vpi, yi) + cnt(vpi, ypi)
            })
            .collect()
    };
    let is_good = |d: i64, di: usize| d > 0 && qi(d * d) >= &rho2_over_100 * qu(di);
    let mut best: Option<(i64, Vec<usize>, Vec<i64>)> = None;
    for t in 0..params.trials.max(1) {
        let g = sample_g(t as u64);
        let ds = d_values(&g);
        let z: i64 = ds.iter().zip(&gc.d_values).filter(|(&d, &di)| is_good(d, di)).map(|(d, _)| d).sum();
        if best.as_ref().map_or(true, |b| z > b.0) {
            best = Some((z, g, ds));
        }
    }
    let (z, g, ds) = best.expect("trials >= 1");
    let good: Vec<bool> = ds.iter().zip(&gc.d_values).map(|(&d, &di)| is_good(d, di)).collect();

    // h_1 sends the pairs onto the host pairs, other U onto other X in order
    let mut h1: Vec<Option<usize>> = vec![None; n];
    let mut xused = Bitset::new(n);
    for ((a, b, _, _), (xa, xb, _, _)) in gp.iter().zip(&hp) {
        h1[*a] = Some(*xa);
        h1[*b] = Some(*xb);
        xused.insert(*xa);
        xused.insert(*xb);
    }
    let mut xfree = x.minus(&xused).to_vec().into_iter();
    for w in u.iter() {
        if h1[w].is_none() {
            h1[w] = xfree.next();
        }
    }
    let mut h2 = h1.clone();
    for (i, (a, b, _, _)) in gp.iter().enumerate() {
        if good[i] {
            h2.swap(*a, *b);
        }
    }
    let u_edges: Vec<(usize, usize)> = f.edges().filter(|&(a, b)| u.contains(a) && u.contains(b)).collect();
    let hcount = |h: &[Option<usize>]| u_edges.iter().filter(|&&(a, b)| red.has_edge(h[a].unwrap(), h[b].unwrap())).count() as i64;
    let h_gap = hcount(&h1) - hcount(&h2);
    let build = |h: &[Option<usize>], gimg: &[usize]| -> Embedding {
        let mut map = h.to_vec();
        for (k, &w) in vlist.iter().enumerate() {
            map[w] = Some(gimg[k]);
        }
        Embedding::from_map(map.into_iter().map(|o| o.unwrap()).collect()).expect("bijection")
    };
    let f1 = build(&h1, &g);
    let f2 = build(&h2, &g);
    let r1 = discrepancy_unchecked(coloring, f, &f1);
    let r2 = discrepancy_unchecked(coloring, f, &f2);
    let gap = r1.mono_plus as i64 - r2.mono_plus as i64;
    let identity = gap == h_gap + z;
    if !identity {
        return Err(Error::Infeasible(format!("switching identity failed: {gap} != {h_gap} + {z}")));
    }
    let t = gc.value_t();
    let mut notes = Vec::new();
    let z_short = match t.square_exact() {
        Some(t2) => qi(z * z) < qi(9) * &params.beta * t2,
        None => qi(z) < qi(3) * t.scaled_lower(&params.beta),
    };
    if z_short {
        notes.push("Z below 3·sqrt(beta)·t at this n".into());
    }
    let case1 = t.at_least_neg(&qi(h_gap), &qi(2), &params.beta);
    let mut cands = vec![(f1, r1), (f2, r2)];
    if !case1 {
        for tt in 0..params.trials.max(1) {
            let g2 = sample_g((params.trials + tt) as u64);
            for h in [&h1, &h2] {
                let e = build(h, &g2);
                let r = discrepancy_unchecked(coloring, f, &e);
                cands.push((e, r));
            }
        }
    }
    let mut best_i = 0;
    for i in 1..cands.len() {
        if better(&cands[i].1, &cands[best_i].1) {
            best_i = i;
        }
    }
    let (emb, rep) = cands.swap_remove(best_i);
    Ok(SwitchResult {
        embedding: emb,
        report: rep,
        strategy: Strategy::MainSwitch,
        case_taken: if case1 { "case1".into() } else { "case2".into() },
        certificate_value: Some(&params.beta * t.bounds().0),
        switch_gap: Some(gap),
        identity_holds: Some(identity),
        notes,
    })
}

// -------------------------------------------------------- single-pair switch

fn density_in_window(coloring: &Coloring) -> bool {
    let pairs = choose2(coloring.n()) as u128;
    let red = coloring.red_count() as u128;
    100 * red >= 49 * pairs && 100 * red <= 51 * pairs
}

/// Swap the images of one high-degree guest vertex and a partner.
pub fn single_pair_switch_embed(f: &Graph, coloring: &Coloring, eps: &Rational, delta: &Rational) -> Result<SwitchResult> {
    check_dims(f, coloring)?;
    let n = f.n();
    let nq = qu(n);
    let dmax = f.max_degree();
    if qu(dmax) < delta * &nq {
        return Err(Error::Precondition(format!("max degree {dmax} below delta·n")));
    }
    if qu(dmax) > (qi(1) - eps) * &nq {
        return Err(Error::Precondition(format!("max degree {dmax} above (1-eps)n")));
    }
    let u0 = f.max_degree_vertex().ok_or_else(|| Error::Precondition("empty guest".into()))?;
    let (u1, sym) = (0..n)
        .filter(|&w| w != u0)
        .map(|w| (w, f.neighbors(u0).symmetric_difference_count(f.neighbors(w))))
        .max_by_key(|&(w, s)| (s, std::cmp::Reverse(w)))
        .ok_or_else(|| Error::Precondition("guest has one vertex".into()))?;
    if qu(2 * sym) < eps * &nq {
        return Err(Error::Infeasible(format!("no partner for vertex {u0}: best symmetric difference {sym} < eps·n/2")));
    }
    let side = |a: usize, b: usize| {
        let mut s = f.neighbors(a).minus(f.neighbors(b));
        s.remove(b);
        s
    };
    let (mut u, mut up) = (u0, u1);
    if side(u, up).count() < side(up, u).count() {
        std::mem::swap(&mut u, &mut up);
    }
    let (vs, vps) = (side(u, up), side(up, u));

    let red = coloring.red();
    let hside = |a: usize, b: usize| {
        let mut s = red.neighbors(a).minus(red.neighbors(b));
        s.remove(b);
        s
    };
    // window measured on X = N(x)\(N(x') ∪ {x'}) so the pair itself never counts
    let window = |a: usize, b: usize| {
        let ab = hside(a, b).count();
        let ba = hside(b, a).count();
        100 * ab > n && 100 * ab < 99 * n && 100 * ba < 99 * n
    };
    // choose N (priority X, neutral, X') then N' (priority X', neutral, X)
    let assign = |xa: usize, xb: usize| {
        let (hx, hxp) = (hside(xa, xb), hside(xb, xa));
        let mut neutral = Bitset::full(n).minus(&hx).minus(&hxp);
        neutral.remove(xa);
        neutral.remove(xb);
        let mut taken = Bitset::new(n);
        let mut pick = |k: usize, order: [&Bitset; 3]| -> Vec<usize> {
            let mut out = Vec::with_capacity(k);
            for s in order {
                for h in s.iter() {
                    if out.len() == k {
                        break;
                    }
                    if !taken.contains(h) {
                        taken.insert(h);
                        out.push(h);
                    }
                }
            }
            out
        };
        let nn = pick(vs.count(), [&hx, &neutral, &hxp]);
        let nnp = pick(vps.count(), [&hxp, &neutral, &hx]);
        let cnt = |s: &[usize], t: &Bitset| s.iter().filter(|&&h| t.contains(h)).count() as i64;
        let gap = cnt(&nn, &hx) + cnt(&nnp, &hxp) - cnt(&nn, &hxp) - cnt(&nnp, &hx);
        (gap, nn, nnp)
    };
    let xmax = red.max_degree_vertex().expect("n >= 2");
    let mut best: Option<(i64, usize, usize, Vec<usize>, Vec<usize>)> = None;
    let consider = |a: usize, best: &mut Option<(i64, usize, usize, Vec<usize>, Vec<usize>)>| {
        for b in 0..n {
            if b == a || !window(a, b) {
                continue;
            }
            let (xa, xb) = if hside(a, b).count() >= hside(b, a).count() { (a, b) } else { (b, a) };
            let (gap, nn, nnp) = assign(xa, xb);
            if best.as_ref().map_or(true, |bb| gap.abs() > bb.0.abs()) {
                *best = Some((gap, xa, xb, nn, nnp));
            }
        }
    };
    consider(xmax, &mut best);
    if best.is_none() {
        for a in 0..n {
            consider(a, &mut best);
        }
    }
    let Some((pred, x, xp, nn, nnp)) = best else {
        if !density_in_window(coloring) {
            return Err(Error::Precondition(
                "red density outside [0.49, 0.51] and no host pair found; use the random-embedding path".into(),
            ));
        }
        return Err(Error::Infeasible("no host pair with 0.01n < |N(x)\\N(x')| and both sides < 0.99n".into()));
    };
    let mut partial = vec![None; n];
    partial[u] = Some(x);
    partial[up] = Some(xp);
    for (w, h) in vs.iter().zip(&nn) {
        partial[w] = Some(*h);
    }
    for (w, h) in vps.iter().zip(&nnp) {
        partial[w] = Some(*h);
    }
    let phi1 = complete_map(&partial);
    let phi2 = phi1.swapped(u, up);
    let r1 = discrepancy_unchecked(coloring, f, &phi1);
    let r2 = discrepancy_unchecked(coloring, f, &phi2);
    let gap = r1.mono_plus as i64 - r2.mono_plus as i64;
    let mut notes = Vec::new();
    if !density_in_window(coloring) {
        notes.push("red density outside [0.49, 0.51]".into());
    }
    if qu(5 * gap.unsigned_abs() as usize) < eps * &nq {
        notes.push("switch gap below eps·n/5 at this n".into());
    }
    let (emb, rep) = if better(&r2, &r1) { (phi2, r2) } else { (phi1, r1) };
    Ok(SwitchResult {
        embedding: emb,
        report: rep,
        strategy: Strategy::SinglePair,
        case_taken: "high-degree".into(),
        certificate_value: Some(qi(pred.abs())),
        switch_gap: Some(gap),
        identity_holds: Some(gap == pred),
        notes,
    })
}

// ------------------------------------------------------- greedy switch

/// Per-pair data for the greedy switching embedder.
#[derive(Clone, Debug, Serialize)]
pub struct GreedyPair {
    pub u: usize,
    pub u_prime: usize,
    pub x: usize,
    pub x_prime: usize,
    pub v_size: usize,
    pub d: i64,
}

/// Switch embedder for low-maximum-degree guests driven by a greedy placement.
pub fn greedy_switch_embed(f: &Graph, coloring: &Coloring, hc: &HostCertificate, delta: &Rational) -> Result<SwitchResult> {
    greedy_switch_embed_detailed(f, coloring, hc, delta).map(|r| r.0)
}

pub fn greedy_switch_embed_detailed(
    f: &Graph,
    coloring: &Coloring,
    hc: &HostCertificate,
    delta: &Rational,
) -> Result<(SwitchResult, Vec<GreedyPair>)> {
    check_dims(f, coloring)?;
    hc.verify(coloring)?;
    let n = f.n();
    let nq = qu(n);
    if qu(f.max_degree()) > delta * &nq {
        return Err(Error::Precondition(format!("max degree {} above delta·n", f.max_degree())));
    }
    let a_set = f.greedy_independent_set();
    let asz = a_set.count();
    if 2 * asz > n {
        return Err(Error::Precondition(format!("independent set of size {asz} > n/2; use the independent-set certificate")));
    }
    let b_set = Bitset::from_iter(n, (0..n).filter(|&w| !a_set.contains(w) && 5 * f.degree_into(w, &a_set) <= asz));
    let alist = a_set.to_vec();
    let mut used_a = Bitset::new(n);
    let mut covered = Bitset::new(n);
    let mut pairs: Vec<(usize, usize, Bitset, Bitset, Bitset)> = Vec::new();
    let mut mass = 0usize;
    let max_pairs = hc.pairs.len();
    let mut notes = Vec::new();
    while qu(mass) < delta * &nq {
        if pairs.len() == max_pairs {
            notes.push(format!("host pairs exhausted at mass {mass} < delta·n"));
            break;
        }
        let mut best: Option<(usize, usize, usize)> = None;
        for &a in &alist {
            if used_a.contains(a) {
                continue;
            }
            let na = f.neighbors(a).minus(&covered);
            for &b in &alist {
                if b == a || used_a.contains(b) {
                    continue;
                }
                let nb = f.neighbors(b).minus(&covered);
                let vi = na.minus(&nb);
                let wi = na.or(&nb);
                let vb = vi.intersection_count(&b_set);
                let wb = wi.intersection_count(&b_set);
                if 3 * vb >= wb && 5 * asz * wb >= n && vi.count() > 0 && best.map_or(true, |(s, _, _)| vi.count() > s) {
                    best = Some((vi.count(), a, b));
                }
            }
        }
        let Some((_, a, b)) = best else {
            if pairs.is_empty() {
                return Err(Error::Infeasible(format!(
                    "switching-pair extraction stalled: mass {mass}, |A'| = {}, |B'| = {}",
                    asz - used_a.count(),
                    b_set.minus(&covered).count()
                )));
            }
            notes.push(format!("pair extraction stalled at mass {mass} < delta·n"));
            break;
        };
        let na = f.neighbors(a).minus(&covered);
        let nb = f.neighbors(b).minus(&covered);
        let (vi, vpi, wi) = (na.minus(&nb), nb.minus(&na), na.or(&nb));
        used_a.insert(a);
        used_a.insert(b);
        covered.union_with(&wi);
        mass += vi.count();
        pairs.push((a, b, vi, vpi, wi));
    }
    if qu(covered.count()) > qi(10) * delta * &nq {
        notes.push("sum of |W_i| exceeds 10·delta·n".into());
    }
    let red = coloring.red();
    let hosts: Vec<(usize, usize)> = hc.pairs[..pairs.len()]
        .iter()
        .map(|&(a, b)| {
            if red.neighbors(a).difference_count(red.neighbors(b)) >= red.neighbors(b).difference_count(red.neighbors(a)) {
                (a, b)
            } else {
                (b, a)
            }
        })
        .collect();
    let mut reserved = Bitset::new(n);
    for &(a, b) in &hosts {
        reserved.insert(a);
        reserved.insert(b);
    }
    let mut img: Vec<Option<usize>> = vec![None; n];
    let mut taken = reserved.clone();
    let take_from = |region: &Bitset, k: &Bitset, img: &mut Vec<Option<usize>>, taken: &mut Bitset| -> Result<()> {
        let mut avail = region.minus(taken).to_vec().into_iter();
        for w in k.iter() {
            let h = avail.next().ok_or_else(|| Error::Infeasible("placement region capacity exhausted".into()))?;
            img[w] = Some(h);
            taken.insert(h);
        }
        Ok(())
    };
    let dval = |i: usize, img: &Vec<Option<usize>>| -> i64 {
        let (a, b, ..) = &pairs[i];
        let (x, xp) = hosts[i];
        let score = |w: usize, sign: i64| -> i64 {
            match img[w] {
                Some(h) => sign * (red.has_edge(x, h) as i64 - red.has_edge(xp, h) as i64),
                None => 0,
            }
        };
        f.neighbors(*a).iter().map(|w| score(w, 1)).sum::<i64>() + f.neighbors(*b).iter().map(|w| score(w, -1)).sum::<i64>()
    };
    for i in 0..pairs.len() {
        let (_, _, vi, vpi, wi) = pairs[i].clone();
        let (x, xp) = hosts[i];
        let s = dval(i, &img);
        let sym = red.neighbors(x).or(red.neighbors(xp)).minus(&red.neighbors(x).and(red.neighbors(xp)));
        let calm = sym.complement();
        if 2 * s <= -(vi.count() as i64) {
            take_from(&calm, &vi, &mut img, &mut taken)?;
        } else {
            take_from(&red.neighbors(x).minus(red.neighbors(xp)), &vi, &mut img, &mut taken)?;
        }
        take_from(&calm, &vpi, &mut img, &mut taken)?;
        let rest = wi.minus(&vi).minus(&vpi);
        take_from(&Bitset::full(n), &rest, &mut img, &mut taken)?;
    }
    let ds: Vec<i64> = (0..pairs.len()).map(|i| dval(i, &img)).collect();
    let all_half = ds.iter().zip(&pairs).all(|(d, p)| 2 * d.unsigned_abs() as usize >= p.2.count());
    if !all_half {
        notes.push("some |D_i| below |V_i|/2".into());
    }
    let in_i: Vec<bool> = ds.iter().zip(&pairs).map(|(d, p)| 2 * *d >= p.2.count() as i64).collect();
    let sum_i: i64 = ds.iter().zip(&in_i).filter(|p| *p.1).map(|p| p.0).sum();
    let sum_j: i64 = ds.iter().zip(&in_i).filter(|p| !*p.1).map(|p| p.0).sum();
    let use_i = sum_i.abs() >= sum_j.abs();
    let predicted = if use_i { sum_i } else { sum_j };
    let mut partial = img.clone();
    for (i, &(x, xp)) in hosts.iter().enumerate() {
        partial[pairs[i].0] = Some(x);
        partial[pairs[i].1] = Some(xp);
    }
    let f1 = complete_map(&partial);
    let mut f2 = f1.clone();
    for i in 0..pairs.len() {
        if in_i[i] == use_i {
            f2 = f2.swapped(pairs[i].0, pairs[i].1);
        }
    }
    let r1 = discrepancy_unchecked(coloring, f, &f1);
    let r2 = discrepancy_unchecked(coloring, f, &f2);
    let gap = r1.mono_plus as i64 - r2.mono_plus as i64;
    if 4 * predicted.unsigned_abs() < mass as u64 {
        notes.push("switch gap below 0.25·sum |V_i|".into());
    }
    let detail = pairs
        .iter()
        .zip(&hosts)
        .zip(&ds)
        .map(|(((a, b, vi, ..), &(x, xp)), &d)| GreedyPair { u: *a, u_prime: *b, x, x_prime: xp, v_size: vi.count(), d })
        .collect();
    let (emb, rep) = if better(&r2, &r1) { (f2, r2) } else { (f1, r1) };
    Ok((
        SwitchResult {
            embedding: emb,
            report: rep,
            strategy: Strategy::GreedySwitch,
            case_taken: "low-degree".into(),
            certificate_value: Some(q(mass as i64, 4)),
            switch_gap: Some(gap),
            identity_holds: Some(gap == predicted),
            notes,
        },
        detail,
    ))
}

// ---------------------------------------------------------------- drivers

fn host_bias(coloring: &Coloring, b: &Bisection) -> Rational {
    let n = coloring.n();
    (qi(b.cut_size as i64) - q(((n / 2) * (n - n / 2)) as i64, 2)).abs()
}

/// Host bisection with the largest `|e_G(X,Y) - |X||Y|/2|` found.
pub fn biased_host_bisection(coloring: &Coloring, params: &SwitchParams, seed: u64) -> Result<Bisection> {
    let mut best: Option<Bisection> = None;
    for (k, dir) in [Direction::Max, Direction::Min].into_iter().enumerate() {
        let b = extremal_bisection(coloring.red(), dir, params.exhaustive_bisection_max, params.bisection_budget, seed::mix(seed, k as u64))?;
        if best.as_ref().map_or(true, |bb| host_bias(coloring, &b) > host_bias(coloring, bb)) {
            best = Some(b);
        }
    }
    Ok(best.expect("two directions"))
}

fn cut_branch(f: &Graph, coloring: &Coloring, params: &SwitchParams, seed: u64) -> Result<SwitchResult> {
    let gb = biased_host_bisection(coloring, params, seed)?;
    let mut best: Option<SwitchResult> = None;
    for (k, dir) in [Direction::Max, Direction::Min].into_iter().enumerate() {
        let fb = extremal_bisection(f, dir, params.exhaustive_bisection_max, params.bisection_budget, seed::mix(seed, 10 + k as u64))?;
        let r = cut_embed(f, &fb, coloring, &gb, seed)?;
        let res = SwitchResult::plain(r.embedding, r.report, Strategy::CutEmbed, "biased-bisection", Some(r.expectation_bound));
        if best.as_ref().map_or(true, |b| better(&res.report, &b.report)) {
            best = Some(res);
        }
    }
    Ok(best.expect("two directions"))
}

fn expectation_branch(f: &Graph, coloring: &Coloring) -> Result<SwitchResult> {
    let target = if coloring.red_count() >= coloring.blue_count() { Color::Red } else { Color::Blue };
    let r = greedy_expectation_embed(f, coloring, target)?;
    Ok(SwitchResult::plain(r.embedding, r.report, Strategy::Expectation, "majority-color", Some(r.guarantee)))
}

/// Collects branch outcomes and keeps the largest discrepancy.
struct BestOf {
    best: Option<SwitchResult>,
    notes: Vec<String>,
}

impl BestOf {
    fn new() -> Self {
        BestOf { best: None, notes: Vec::new() }
    }

    fn offer(&mut self, label: &str, r: Result<SwitchResult>) {
        match r {
            Ok(r) => {
                self.notes.push(format!("{label}: discrepancy {}", r.report.discrepancy));
                if self.best.as_ref().map_or(true, |b| better(&r.report, &b.report)) {
                    self.best = Some(r);
                }
            }
            Err(e) => self.notes.push(format!("{label}: {e}")),
        }
    }

    fn finish(self) -> Result<SwitchResult> {
        let mut r = self.best.ok_or_else(|| Error::Infeasible(self.notes.join("; ")))?;
        r.notes.extend(self.notes);
        Ok(r)
    }
}

fn check_eps(eps: &Rational) -> Result<()> {
    if !eps.is_positive() || eps > &qi(1) {
        return Err(Error::Parameter(format!("eps = {} outside (0,1]", fmt(eps))));
    }
    Ok(())
}

/// Driver for guests with maximum degree at most `(1-ε)n`.
pub fn embed_bounded_degree(f: &Graph, coloring: &Coloring, eps: &Rational, params: &SwitchParams, seed: u64) -> Result<SwitchResult> {
    check_dims(f, coloring)?;
    check_eps(eps)?;
    if f.has_isolated_vertex() {
        return Err(Error::Precondition("guest has an isolated vertex".into()));
    }
    let n = f.n();
    if qu(f.max_degree()) > (qi(1) - eps) * qu(n) {
        return Err(Error::Precondition(format!("max degree {} above (1-eps)n", f.max_degree())));
    }
    let mut acc = BestOf::new();
    acc.offer("expectation", expectation_branch(f, coloring));
    if qu(f.max_degree()) >= &params.delta * qu(n) {
        acc.offer("single-pair", single_pair_switch_embed(f, coloring, eps, &params.delta));
    }
    if n >= 4 {
        acc.offer("cut-embed", cut_branch(f, coloring, params, seed));
    }
    match certify_host(coloring, &params.beta, seed::mix(seed, 100)) {
        Ok(hc) => {
            let mis = f.greedy_independent_set();
            if mis.count() >= n / 2 {
                let r = certify_guest_independent(f, &mis).and_then(|gc| main_switch_embed(f, &gc, coloring, &hc, params, seed::mix(seed, 101)));
                acc.offer("main-switch", r);
            } else {
                acc.offer("greedy-switch", greedy_switch_embed(f, coloring, &hc, &params.delta));
            }
        }
        Err(h) => acc.notes.push(format!("host certificate: {h}")),
    }
    acc.finish()
}

/// Driver for `d`-regular guests with `d <= (1-ε)n`.
pub fn embed_regular(f: &Graph, coloring: &Coloring, eps: &Rational, params: &SwitchParams, seed: u64) -> Result<SwitchResult> {
    check_dims(f, coloring)?;
    check_eps(eps)?;
    let n = f.n();
    let d = f.regular_degree().ok_or_else(|| Error::Precondition("guest is not regular".into()))?;
    if qu(d) > (qi(1) - eps) * qu(n) {
        return Err(Error::Precondition(format!("degree {d} above (1-eps)n")));
    }
    if 2 * d > n {
        let fc = f.complement();
        let mut acc = BestOf::new();
        acc.offer("expectation", expectation_branch(f, coloring));
        if fc.edge_count() > 0 {
            let inner = embed_regular(&fc, coloring, &q(1, 2), params, seed);
            let r = inner.map(|r| {
                let report = discrepancy_unchecked(coloring, f, &r.embedding);
                let mut out = SwitchResult::plain(r.embedding, report, r.strategy, "complement", None);
                out.notes.push(format!("complement guest discrepancy {}", r.report.discrepancy));
                out
            });
            acc.offer("complement", r);
        }
        return acc.finish();
    }
    let mut acc = BestOf::new();
    acc.offer("expectation", expectation_branch(f, coloring));
    if n >= 4 {
        acc.offer("cut-embed", cut_branch(f, coloring, params, seed));
    }
    if n >= 100 && d >= 1 {
        match certify_host(coloring, &params.beta, seed::mix(seed, 100)) {
            Ok(hc) => {
                let r = certify_guest_regular_with(f, seed::mix(seed, 102), params.certificate_retries)
                    .and_then(|gc| main_switch_embed(f, &gc, coloring, &hc, params, seed::mix(seed, 103)));
                acc.offer("main-switch", r);
            }
            Err(h) => acc.notes.push(format!("host certificate: {h}")),
        }
    }
    acc.finish()
}


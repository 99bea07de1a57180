//! Exact and Monte-Carlo checks of hypergeometric, coupling, binomial and
//! random-matching inequalities.

use crate::bitset::Bitset;
use crate::error::{Error, Result};
use crate::rational::{binom, q, qi, qu, Rational};
use crate::seed;
use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use serde::Serialize;

/// Population `n`, sample size `k`, marked set size `p_count`, window `eta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HypergeomSpec {
    pub n: u64,
    pub k: u64,
    pub p_count: u64,
    #[serde(with = "crate::rational::serde_q")]
    pub eta: Rational,
}

impl HypergeomSpec {
    pub fn new(n: u64, k: u64, p_count: u64, eta: Rational) -> Result<Self> {
        if p_count > n || k == 0 || k > n {
            return Err(Error::Parameter(format!("need 0 <= |P| <= n and 1 <= k <= n (n={n}, k={k}, |P|={p_count})")));
        }
        Ok(HypergeomSpec { n, k, p_count, eta })
    }

    pub fn p(&self) -> Rational {
        q(self.p_count as i64, self.n as i64)
    }

    /// Checks `η ∈ (0,1/2]`, `k <= (1-η)n` and `η <= p <= 1-η`.
    pub fn validate_window(&self) -> Result<()> {
        let eta = &self.eta;
        if !eta.is_positive() || eta > &q(1, 2) {
            return Err(Error::Parameter("eta must lie in (0, 1/2]".into()));
        }
        if qu(self.k as usize) > (qi(1) - eta) * qu(self.n as usize) {
            return Err(Error::Parameter(format!("k = {} exceeds (1-eta)n for n = {}", self.k, self.n)));
        }
        let p = self.p();
        if &p < eta || p > qi(1) - eta {
            return Err(Error::Parameter(format!("p = {}/{} outside [eta, 1-eta]", self.p_count, self.n)));
        }
        Ok(())
    }

    /// Numerators `C(|P|,t)·C(n-|P|,k-t)` for `t = 0..=k`, and `C(n,k)`.
    pub fn weights(&self) -> (Vec<BigUint>, BigUint) {
        let (n, k, pc) = (self.n, self.k, self.p_count);
        let rest = n - pc;
        let mut a = vec![BigUint::zero(); k as usize + 1];
        let mut c = BigUint::one();
        for t in 0..=k {
            if t > pc {
                break;
            }
            a[t as usize] = c.clone();
            c = c * (pc - t) / (t + 1);
        }
        let mut b = vec![BigUint::zero(); k as usize + 1];
        let mut c = BigUint::one();
        for s in 0..=k {
            if s > rest {
                break;
            }
            b[s as usize] = c.clone();
            c = c * (rest - s) / (s + 1);
        }
        let w = (0..=k as usize).map(|t| &a[t] * &b[k as usize - t]).collect();
        (w, binom(n, k))
    }
}

/// `P[|A ∩ P| = t]` for a uniform `k`-subset `A`.
pub fn hypergeom_pmf(spec: &HypergeomSpec, t: i64) -> Rational {
    if t < 0 || t as u64 > spec.k || t as u64 > spec.p_count || spec.k - t as u64 > spec.n - spec.p_count {
        return qi(0);
    }
    let t = t as u64;
    let num = binom(spec.p_count, t) * binom(spec.n - spec.p_count, spec.k - t);
    Rational::new(BigInt::from(num), BigInt::from(binom(spec.n, spec.k)))
}

/// Point at which a checked inequality is tightest.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub n: u64,
    pub k: u64,
    pub p_count: u64,
    pub t: Option<i64>,
    pub label: String,
    #[serde(with = "crate::rational::serde_q")]
    pub lhs: Rational,
    #[serde(with = "crate::rational::serde_q")]
    pub rhs: Rational,
    /// `lhs/rhs` for ratio checks (squared sides when `squared`), `lhs - rhs` for difference checks.
    #[serde(with = "crate::rational::serde_q")]
    pub margin: Rational,
    pub squared: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub holds: bool,
    pub points_checked: usize,
    pub failures: usize,
    pub witness: Option<Witness>,
    /// Smallest grid `k` from which every larger grid point holds.
    pub k0: Option<u64>,
    pub notes: Vec<String>,
}

struct Tracker {
    checked: usize,
    failures: usize,
    witness: Option<Witness>,
    per_k: Vec<(u64, bool)>,
}

impl Tracker {
    fn new() -> Self {
        Tracker { checked: 0, failures: 0, witness: None, per_k: Vec::new() }
    }

    fn record(&mut self, ok: bool, w: Witness) {
        self.checked += 1;
        if !ok {
            self.failures += 1;
        }
        if self.witness.as_ref().map_or(true, |b| w.margin < b.margin) {
            self.witness = Some(w);
        }
    }

    fn finish(mut self, notes: Vec<String>) -> BoundCheck {
        self.per_k.sort();
        let mut k0 = None;
        for &(k, ok) in self.per_k.iter().rev() {
            if !ok {
                break;
            }
            k0 = Some(k);
        }
        // a k listed twice only counts when all its points hold
        if let Some(kk) = k0 {
            if self.per_k.iter().any(|&(k, ok)| k >= kk && !ok) {
                k0 = self.per_k.iter().filter(|&&(k, ok)| k > kk && !ok).map(|p| p.0).max().and_then(|bad| {
                    self.per_k.iter().map(|p| p.0).filter(|&k| k > bad).min()
                });
            }
        }
        BoundCheck { holds: self.failures == 0, points_checked: self.checked, failures: self.failures, witness: self.witness, k0, notes }
    }
}

/// Which `|P|` a grid point uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PChoice {
    /// `|P| = ⌊n/2⌋`.
    Half,
    /// `|P| = ⌈ηn⌉`.
    Eta,
}

/// Grid with `n = ⌈k/(1-η)⌉` for each `k`.
pub fn grid_points(eta: &Rational, ks: &[u64], choice: PChoice) -> Result<Vec<HypergeomSpec>> {
    ks.iter()
        .map(|&k| {
            let n = (qu(k as usize) / (qi(1) - eta)).ceil().to_integer().to_u64().expect("fits");
            let pc = match choice {
                PChoice::Half => n / 2,
                PChoice::Eta => (eta * qu(n as usize)).ceil().to_integer().to_u64().expect("fits"),
            };
            HypergeomSpec::new(n, k, pc, eta.clone())
        })
        .collect()
}

/// Pointwise lower bound `pmf(t) >= 0.14·sqrt(η/(p(1-p)k))` on the central window.
pub fn check_anticoncentration(points: &[HypergeomSpec]) -> Result<BoundCheck> {
    let mut tr = Tracker::new();
    for spec in points {
        spec.validate_window()?;
        let p = spec.p();
        let pq = &p * (qi(1) - &p);
        let kq = qu(spec.k as usize);
        let mid = &p * &kq;
        let win2 = &pq * qu(spec.k.min(spec.n - spec.k) as usize) / qi(4);
        let rhs2 = q(196, 10000) * &spec.eta / (&pq * &kq);
        let (w, total) = spec.weights();
        let tot = BigInt::from(total);
        let mut all_ok = true;
        let c = mid.floor().to_integer().to_i64().unwrap();
        let inside = |t: i64| {
            let d = qi(t) - &mid;
            d.clone() * d <= win2
        };
        let mut ts = Vec::new();
        let mut t = c;
        while t >= 0 && inside(t) {
            ts.push(t);
            t -= 1;
        }
        let mut t = c + 1;
        while t <= spec.k as i64 && inside(t) {
            ts.push(t);
            t += 1;
        }
        for t in ts {
            let pmf = Rational::new(BigInt::from(w[t as usize].clone()), tot.clone());
            let lhs2 = &pmf * &pmf;
            let ok = lhs2 >= rhs2;
            all_ok &= ok;
            tr.record(
                ok,
                Witness {
                    n: spec.n,
                    k: spec.k,
                    p_count: spec.p_count,
                    t: Some(t),
                    label: "pmf".into(),
                    margin: &lhs2 / &rhs2,
                    lhs: lhs2,
                    rhs: rhs2.clone(),
                    squared: true,
                },
            );
        }
        tr.per_k.push((spec.k, all_ok));
    }
    Ok(tr.finish(vec!["k0 is an empirical estimate over the supplied grid".into()]))
}

/// Smallest integer `t >= pk` with `t - pk >= 0.1·η·sqrt(k)`.
fn upper_threshold(mid: &Rational, gap2: &Rational) -> i64 {
    let mut t = mid.ceil().to_integer().to_i64().unwrap();
    loop {
        let d = qi(t) - mid;
        if &(d.clone() * d) >= gap2 {
            return t;
        }
        t += 1;
    }
}

/// Both tails beyond `pk ± 0.1·η·sqrt(k)` have probability at least `0.04η`.
pub fn check_tails(points: &[HypergeomSpec]) -> Result<BoundCheck> {
    let mut tr = Tracker::new();
    for spec in points {
        spec.validate_window()?;
        let p = spec.p();
        let kq = qu(spec.k as usize);
        let mid = &p * &kq;
        let gap2 = &spec.eta * &spec.eta * &kq / qi(100);
        let rhs = q(4, 100) * &spec.eta;
        let (w, total) = spec.weights();
        let tot = BigInt::from(total);
        let tu = upper_threshold(&mid, &gap2);
        let neg_mid = -mid.clone();
        let tl = -upper_threshold(&neg_mid, &gap2);
        let upper: BigUint = w.iter().skip(tu.max(0) as usize).sum();
        let lower: BigUint = if tl < 0 { BigUint::zero() } else { w.iter().take(tl as usize + 1).sum() };
        let mut all_ok = true;
        for (label, mass, t) in [("upper", upper, tu), ("lower", lower, tl)] {
            let lhs = Rational::new(BigInt::from(mass), tot.clone());
            let ok = lhs >= rhs;
            all_ok &= ok;
            tr.record(
                ok,
                Witness {
                    n: spec.n,
                    k: spec.k,
                    p_count: spec.p_count,
                    t: Some(t),
                    label: label.into(),
                    margin: &lhs / &rhs,
                    lhs,
                    rhs: rhs.clone(),
                    squared: false,
                },
            );
        }
        tr.per_k.push((spec.k, all_ok));
    }
    Ok(tr.finish(vec!["points below the empirical k0 are outside the asymptotic regime".into()]))
}

pub const COUPLING_MAX_N: usize = 24;

/// Exhaustive check over all `k`-subsets `A` of `[n]`:
/// (1) `P[|A∩P| >= |A∩Q|] >= 1/2` when `|P| >= |Q|`;
/// (2) `{|A∩P| >= s}` and `{|A∩Q| <= t}` are positively correlated.
pub fn check_coupling(n: usize, k: usize, p: &Bitset, qs: &Bitset) -> Result<BoundCheck> {
    if n > COUPLING_MAX_N {
        return Err(Error::Capacity(format!("coupling enumeration supports n <= {COUPLING_MAX_N}")));
    }
    if p.len() != n || qs.len() != n {
        return Err(Error::Dimension("P and Q must have width n".into()));
    }
    if p.intersection_count(qs) > 0 {
        return Err(Error::Parameter("P and Q overlap".into()));
    }
    if k > n {
        return Err(Error::Parameter("k > n".into()));
    }
    let pm = p.iter().fold(0u32, |m, v| m | 1 << v);
    let qm = qs.iter().fold(0u32, |m, v| m | 1 << v);
    let mut joint = vec![vec![0u64; k + 1]; k + 1];
    let mut total = 0u64;
    let mut visit = |a: u32| {
        joint[(a & pm).count_ones() as usize][(a & qm).count_ones() as usize] += 1;
        total += 1;
    };
    if k == 0 {
        visit(0);
    } else {
        let mut a: u32 = (1u32 << k) - 1;
        let limit: u64 = 1u64 << n;
        while (a as u64) < limit {
            visit(a);
            let c = a & a.wrapping_neg();
            let r = a.wrapping_add(c);
            if r == 0 {
                break;
            }
            a = (((r ^ a) >> 2) / c) | r;
        }
    }
    let mut tr = Tracker::new();
    let tq = qu(total as usize);
    let frac = |x: u64| qu(x as usize) / &tq;
    if p.count() >= qs.count() {
        let hit: u64 = (0..=k).flat_map(|a| (0..=a).map(move |b| (a, b))).map(|(a, b)| joint[a][b]).sum();
        let lhs = frac(hit);
        let rhs = q(1, 2);
        tr.record(
            lhs >= rhs,
            Witness { n: n as u64, k: k as u64, p_count: p.count() as u64, t: None, label: "P-majority".into(), margin: &lhs - &rhs, lhs, rhs, squared: false },
        );
    }
    for s in 0..=k {
        for t in 0..=k {
            let both: u64 = (s..=k).flat_map(|a| (0..=t).map(move |b| (a, b))).map(|(a, b)| joint[a][b]).sum();
            let ps: u64 = (s..=k).flat_map(|a| (0..=k).map(move |b| (a, b))).map(|(a, b)| joint[a][b]).sum();
            let qt: u64 = (0..=k).flat_map(|a| (0..=t).map(move |b| (a, b))).map(|(a, b)| joint[a][b]).sum();
            let lhs = frac(both);
            let rhs = frac(ps) * frac(qt);
            tr.record(
                lhs >= rhs,
                Witness {
                    n: n as u64,
                    k: k as u64,
                    p_count: p.count() as u64,
                    t: Some(t as i64),
                    label: format!("correlation s={s}"),
                    margin: &lhs - &rhs,
                    lhs,
                    rhs,
                    squared: false,
                },
            );
        }
    }
    Ok(tr.finish(vec![format!("{total} subsets enumerated")]))
}

/// `check_coupling` for every `n <= n_max`, every `k`, and every disjoint pair
/// `P = {0..a}`, `Q = {a..a+b}`; by symmetry only the sizes matter.
pub fn check_coupling_sweep(n_max: usize) -> Result<BoundCheck> {
    let mut tr = Tracker::new();
    let mut subsets = 0u64;
    for n in 1..=n_max {
        for a in 0..=n {
            for b in 0..=n - a {
                let p = Bitset::from_iter(n, 0..a);
                let qs = Bitset::from_iter(n, a..a + b);
                for k in 0..=n {
                    let r = check_coupling(n, k, &p, &qs)?;
                    tr.checked += r.points_checked;
                    tr.failures += r.failures;
                    subsets += binom(n as u64, k as u64).to_u64().expect("fits");
                    if let Some(w) = r.witness {
                        if tr.witness.as_ref().map_or(true, |b| w.margin < b.margin) {
                            tr.witness = Some(w);
                        }
                    }
                }
            }
        }
    }
    Ok(tr.finish(vec![format!("{subsets} subsets enumerated")]))
}

/// `P[Bin(m,1/2) >= m/2] >= 1/2` for every `1 <= m <= n_max`, from exact Pascal rows.
pub fn check_binomial_half(n_max: usize) -> BoundCheck {
    let mut tr = Tracker::new();
    let mut row: Vec<BigUint> = vec![BigUint::one()];
    for m in 1..=n_max {
        let mut next = Vec::with_capacity(m + 1);
        next.push(BigUint::one());
        for j in 1..m {
            next.push(&row[j - 1] + &row[j]);
        }
        next.push(BigUint::one());
        row = next;
        let upper: BigUint = row.iter().enumerate().filter(|(j, _)| 2 * j >= m).map(|(_, c)| c).sum();
        let lhs = Rational::new(BigInt::from(upper), BigInt::one() << m);
        let rhs = q(1, 2);
        tr.record(
            lhs >= rhs,
            Witness { n: m as u64, k: m as u64, p_count: 0, t: None, label: "binomial".into(), margin: &lhs - &rhs, lhs, rhs, squared: false },
        );
    }
    tr.finish(Vec::new())
}

/// Monte-Carlo estimate with a one-sided `3σ` gate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct McCheck {
    pub trials: usize,
    pub successes: usize,
    pub estimate: f64,
    pub sigma: f64,
    pub target: f64,
    /// `estimate + 3σ >= target`: the data does not contradict the bound.
    pub holds: bool,
    /// `estimate - 3σ >= target`.
    pub confidently_above: bool,
}

fn mc_gate(successes: usize, trials: usize, target: f64) -> McCheck {
    let est = successes as f64 / trials as f64;
    let sigma = (est * (1.0 - est) / trials as f64).sqrt();
    McCheck {
        trials,
        successes,
        estimate: est,
        sigma,
        target,
        holds: est + 3.0 * sigma >= target,
        confidently_above: est - 3.0 * sigma >= target,
    }
}

pub const MC_MIN_TRIALS: usize = 10_000;

/// Probability that a uniform `k`-matching has at least `⌊ηk/25⌋` edges
/// between `P = {0..p_count-1}` and its complement.
pub fn mc_random_matching(n: usize, p_count: usize, k: usize, eta: &Rational, trials: usize, seed: u64) -> Result<McCheck> {
    if !eta.is_positive() || eta > &q(1, 2) {
        return Err(Error::Parameter("eta must lie in (0, 1/2]".into()));
    }
    let p = q(p_count as i64, n.max(1) as i64);
    if n == 0 || &p < eta || p > qi(1) - eta {
        return Err(Error::Parameter(format!("|P|/n = {p_count}/{n} outside [eta, 1-eta]")));
    }
    if n < 2 * k || k == 0 {
        return Err(Error::Parameter(format!("need 1 <= k and n >= 2k (n={n}, k={k})")));
    }
    if trials < MC_MIN_TRIALS {
        return Err(Error::Parameter(format!("trials must be >= {MC_MIN_TRIALS}")));
    }
    let need = (eta * qu(k) / qi(25)).floor().to_integer().to_usize().expect("fits");
    let mut rng = seed::rng(seed);
    let mut verts: Vec<usize> = (0..n).collect();
    let mut ok = 0;
    for _ in 0..trials {
        let (head, _) = verts.partial_shuffle(&mut rng, 2 * k);
        let crossing = head.chunks(2).filter(|e| (e[0] < p_count) != (e[1] < p_count)).count();
        if crossing >= need {
            ok += 1;
        }
    }
    Ok(mc_gate(ok, trials, 5.0 / 6.0))
}

/// Empirical `sup{ρ : P[Z >= ρ√a] >= ρ}` for the four-term deviation `Z`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SqrtDeviation {
    pub trials: usize,
    pub rho_hat: f64,
    /// Same supremum with each tail estimate lowered by `3σ`.
    pub rho_lower: f64,
    /// `(ρ, P̂[Z >= ρ√a])` on a fixed grid.
    pub curve: Vec<(f64, f64)>,
    /// Sorted distinct values of `Z` with their counts.
    pub histogram: Vec<(i64, usize)>,
}

/// `P = {0..p_count-1}`, `Q = {p_count..p_count+q_count-1}`; `A`, `B` disjoint uniform of sizes `a`, `b`.
#[allow(clippy::too_many_arguments)]
pub fn mc_sqrt_deviation(n: usize, p_count: usize, q_count: usize, a: usize, b: usize, eta: &Rational, trials: usize, seed: u64) -> Result<SqrtDeviation> {
    if p_count + q_count > n {
        return Err(Error::Parameter("P and Q must be disjoint subsets of [n]".into()));
    }
    if q_count > p_count {
        return Err(Error::Parameter("need |P| >= |Q|".into()));
    }
    let p = q(p_count as i64, n.max(1) as i64);
    if &p < eta || p > qi(1) - eta {
        return Err(Error::Parameter("|P|/n outside [eta, 1-eta]".into()));
    }
    if b > a || qu(a) > (qi(1) - eta) * qu(n) || a + b > n {
        return Err(Error::Parameter("need b <= a <= (1-eta)n and a + b <= n".into()));
    }
    if trials == 0 {
        return Err(Error::Parameter("trials must be positive".into()));
    }
    let mut rng = seed::rng(seed);
    let mut verts: Vec<usize> = (0..n).collect();
    let mut zs = Vec::with_capacity(trials);
    let pq = p_count + q_count;
    for _ in 0..trials {
        let (head, _) = verts.partial_shuffle(&mut rng, a + b);
        let mut z = 0i64;
        for (i, &v) in head.iter().enumerate() {
            let sgn = if i < a { 1 } else { -1 };
            if v < p_count {
                z += sgn;
            } else if v < pq {
                z -= sgn;
            }
        }
        zs.push(z);
    }
    zs.sort_unstable_by(|x, y| y.cmp(x));
    let sa = (a as f64).sqrt();
    let t = trials as f64;
    let (mut rho_hat, mut rho_lower) = (0.0f64, 0.0f64);
    for (j, &z) in zs.iter().enumerate() {
        if z <= 0 {
            break;
        }
        // ties: the tail count at level z includes every sample equal to z
        if j + 1 < zs.len() && zs[j + 1] == z {
            continue;
        }
        let frac = (j + 1) as f64 / t;
        let lo = frac - 3.0 * (frac * (1.0 - frac) / t).sqrt();
        let level = z as f64 / sa;
        rho_hat = rho_hat.max(level.min(frac));
        rho_lower = rho_lower.max(level.min(lo));
    }
    let curve = (1..=50)
        .map(|i| {
            let rho = i as f64 / 50.0;
            let hits = zs.iter().filter(|&&z| z as f64 >= rho * sa).count();
            (rho, hits as f64 / t)
        })
        .collect();
    let mut histogram: Vec<(i64, usize)> = Vec::new();
    for &z in zs.iter().rev() {
        match histogram.last_mut() {
            Some((v, c)) if *v == z => *c += 1,
            _ => histogram.push((z, 1)),
        }
    }
    Ok(SqrtDeviation { trials, rho_hat, rho_lower, curve, histogram })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pmf_examples() {
        let s = HypergeomSpec::new(20, 10, 10, q(1, 2)).unwrap();
        assert_eq!(hypergeom_pmf(&s, 5), q(63504, 184756));
        assert_eq!(hypergeom_pmf(&s, 11), qi(0));
        let full = HypergeomSpec::new(9, 9, 4, q(1, 2)).unwrap();
        assert_eq!(hypergeom_pmf(&full, 4), qi(1));
        let total: Rational = (0..=10).map(|t| hypergeom_pmf(&s, t)).sum();
        assert_eq!(total, qi(1));
        let (w, tot) = s.weights();
        assert_eq!(w.iter().sum::<BigUint>(), tot);
    }

    #[test]
    fn anticoncentration_small_point() {
        let s = HypergeomSpec::new(20, 10, 10, q(1, 2)).unwrap();
        let r = check_anticoncentration(&[s]).unwrap();
        assert!(r.holds);
        let bad = HypergeomSpec::new(20, 15, 10, q(1, 2)).unwrap();
        assert!(check_anticoncentration(&[bad]).is_err());
    }

    #[test]
    fn tails_examples() {
        let s = HypergeomSpec::new(400, 200, 200, q(1, 4)).unwrap();
        let r = check_tails(&[s]).unwrap();
        assert!(r.holds);
        let w = r.witness.unwrap();
        assert!(w.lhs >= q(1, 100));
        // symmetric case: both tails equal
        let s = HypergeomSpec::new(60, 30, 30, q(1, 2)).unwrap();
        let (w, tot) = s.weights();
        let mid = q(15, 1);
        let gap2 = q(1, 4) * qi(30) / qi(100);
        let tu = upper_threshold(&mid, &gap2) as usize;
        let up: BigUint = w.iter().skip(tu).sum();
        let lo: BigUint = w.iter().take(30 - tu + 1).sum();
        assert_eq!(up, lo);
        assert!(tot > up);
    }

    #[test]
    fn coupling_examples() {
        let p = Bitset::from_iter(10, [0, 1, 2]);
        let qs = Bitset::from_iter(10, [3, 4]);
        let r = check_coupling(10, 4, &p, &qs).unwrap();
        assert!(r.holds);
        assert_eq!(r.notes[0], "210 subsets enumerated");
        let eq = check_coupling(8, 3, &Bitset::from_iter(8, [0, 1]), &Bitset::from_iter(8, [2, 3])).unwrap();
        assert!(eq.holds);
        let empty_q = check_coupling(8, 3, &Bitset::from_iter(8, [0, 1]), &Bitset::new(8)).unwrap();
        assert!(empty_q.holds);
        assert_eq!(empty_q.witness.unwrap().margin, qi(0));
        assert!(check_coupling(8, 3, &Bitset::from_iter(8, [0, 1]), &Bitset::from_iter(8, [1])).is_err());
    }

    #[test]
    fn coupling_sweep_small() {
        let r = check_coupling_sweep(6).unwrap();
        assert!(r.holds, "{:?}", r.witness);
        // sum over n of (number of (a, b) pairs) * 2^n
        let expect: u64 = (1..=6u64).map(|n| (n + 1) * (n + 2) / 2 * (1 << n)).sum();
        assert_eq!(r.notes[0], format!("{expect} subsets enumerated"));
    }

    #[test]
    fn binomial_small() {
        let r = check_binomial_half(200);
        assert!(r.holds);
        assert_eq!(r.points_checked, 200);
        assert_eq!(r.witness.unwrap().margin, qi(0));
    }

    #[test]
    fn matching_parameters() {
        assert!(mc_random_matching(100, 100, 10, &q(1, 10), 10_000, 1).is_err());
        // the threshold rounds down to zero edges
        let r = mc_random_matching(100, 50, 1, &q(1, 2), 10_000, 1).unwrap();
        assert_eq!(r.successes, 10_000);
    }

    #[test]
    fn sqrtdev_hypergeometric_limit() {
        let n = 200;
        let r = mc_sqrt_deviation(n, 100, 0, 50, 0, &q(1, 4), 20_000, 3).unwrap();
        let spec = HypergeomSpec::new(200, 50, 100, q(1, 4)).unwrap();
        let (w, tot) = spec.weights();
        let totf = tot.to_f64().unwrap();
        for &(z, count) in &r.histogram {
            let exact = w[z as usize].to_f64().unwrap() / totf;
            let est = count as f64 / r.trials as f64;
            let sd = (exact * (1.0 - exact) / r.trials as f64).sqrt();
            assert!((est - exact).abs() <= 5.0 * sd + 1e-9, "z={z} est={est} exact={exact}");
        }
        assert!(r.rho_hat > 0.0);
    }
}

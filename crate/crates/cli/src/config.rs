//! Line-oriented `key = value` configuration with a stable digest.

use anyhow::{anyhow, bail, Context, Result};
use disclab_core::rational::{self, q, qi, Rational};
use disclab_core::switchembed::SwitchParams;
use sha2::{Digest, Sha256};
use std::path::Path;

pub const CONFIG_ENV: &str = "DISCLAB_CONFIG";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub beta: Rational,
    pub delta: Rational,
    pub rho_switch: Rational,
    pub gamma: Rational,
    pub trials: usize,
    pub budget: usize,
    pub exhaustive_bisection_max: usize,
    pub certificate_retries: usize,
    pub oracle_max_n: usize,
    pub seed: u64,
    pub format: Format,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            beta: q(1, 1000),
            delta: q(1, 20),
            rho_switch: q(1, 100),
            gamma: q(1, 10000),
            trials: 64,
            budget: 400,
            exhaustive_bisection_max: 20,
            certificate_retries: 16,
            oracle_max_n: disclab_core::oracle::ORACLE_MAX_N,
            seed: 0,
            format: Format::Text,
        }
    }
}

fn unit_rational(key: &str, v: &str, line: usize) -> Result<Rational> {
    let r = rational::parse(v).ok_or_else(|| anyhow!("line {line}: {key}: not a rational: {v}"))?;
    if r <= qi(0) || r >= qi(1) {
        bail!("line {line}: {key} = {v} must lie in (0,1)");
    }
    Ok(r)
}

fn int<T: std::str::FromStr>(key: &str, v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| anyhow!("line {line}: {key}: not an integer: {v}"))
}

impl Config {
    pub fn parse(text: &str) -> Result<Config> {
        let mut c = Config::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let s = raw.split('#').next().unwrap_or("").trim();
            if s.is_empty() {
                continue;
            }
            let (k, v) = s.split_once('=').ok_or_else(|| anyhow!("line {line}: expected key = value"))?;
            let (k, v) = (k.trim(), v.trim());
            match k {
                "beta" => c.beta = unit_rational(k, v, line)?,
                "delta" => c.delta = unit_rational(k, v, line)?,
                "rho_switch" => c.rho_switch = unit_rational(k, v, line)?,
                "gamma" => c.gamma = unit_rational(k, v, line)?,
                "trials" => c.trials = int(k, v, line)?,
                "budget" => c.budget = int(k, v, line)?,
                "exhaustive_bisection_max" => c.exhaustive_bisection_max = int(k, v, line)?,
                "certificate_retries" => c.certificate_retries = int(k, v, line)?,
                "oracle_max_n" => c.oracle_max_n = int(k, v, line)?,
                "seed" => c.seed = int(k, v, line)?,
                "format" => {
                    c.format = match v {
                        "text" => Format::Text,
                        "json" => Format::Json,
                        _ => bail!("line {line}: format must be text|json"),
                    }
                }
                _ => bail!("line {line}: unknown key {k}"),
            }
        }
        if c.budget == 0 {
            bail!("budget must be >= 1");
        }
        Ok(c)
    }

    /// Explicit path, else `DISCLAB_CONFIG`, else defaults.
    pub fn load(path: Option<&Path>) -> Result<Config> {
        let env = std::env::var_os(CONFIG_ENV).filter(|p| !p.is_empty());
        let path = path.map(Path::to_path_buf).or_else(|| env.map(Into::into));
        match path {
            Some(p) => {
                let text = std::fs::read_to_string(&p).with_context(|| format!("reading config {}", p.display()))?;
                Config::parse(&text).with_context(|| format!("in config {}", p.display()))
            }
            None => Ok(Config::default()),
        }
    }

    /// Canonical rendering; `parse(render(c)) == c`.
    pub fn render(&self) -> String {
        let fmt = match self.format {
            Format::Text => "text",
            Format::Json => "json",
        };
        format!(
            "beta = {}\ndelta = {}\nrho_switch = {}\ngamma = {}\ntrials = {}\nbudget = {}\nexhaustive_bisection_max = {}\ncertificate_retries = {}\noracle_max_n = {}\nseed = {}\nformat = {}\n",
            rational::fmt(&self.beta),
            rational::fmt(&self.delta),
            rational::fmt(&self.rho_switch),
            rational::fmt(&self.gamma),
            self.trials,
            self.budget,
            self.exhaustive_bisection_max,
            self.certificate_retries,
            self.oracle_max_n,
            self.seed,
            fmt,
        )
    }

    /// SHA-256 of the rendering minus the output format, which never affects results.
    pub fn digest(&self) -> String {
        let mut c = self.clone();
        c.format = Format::Text;
        hex::encode(Sha256::digest(c.render().as_bytes()))
    }

    pub fn switch_params(&self) -> SwitchParams {
        SwitchParams {
            beta: self.beta.clone(),
            delta: self.delta.clone(),
            rho: self.rho_switch.clone(),
            trials: self.trials,
            bisection_budget: self.budget,
            exhaustive_bisection_max: self.exhaustive_bisection_max,
            certificate_retries: self.certificate_retries,
        }
    }
}

pub fn digest_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_documented_constants() {
        let c = Config::default();
        assert_eq!(c.beta, q(1, 1000));
        assert_eq!(c.delta, q(1, 20));
        assert_eq!(c.rho_switch, q(1, 100));
        assert_eq!(c.gamma, q(1, 10000));
    }

    #[test]
    fn render_round_trips() {
        let c = Config::parse("beta = 1/500\nseed = 7 # trailing\nformat = json\n").unwrap();
        assert_eq!(c.beta, q(1, 500));
        assert_eq!(c.seed, 7);
        assert_eq!(Config::parse(&c.render()).unwrap(), c);
    }

    #[test]
    fn digest_ignores_format_only() {
        let a = Config::default();
        let mut b = a.clone();
        b.format = Format::Json;
        assert_eq!(a.digest(), b.digest());
        b.seed = 1;
        assert_ne!(a.digest(), b.digest());
    }

    #[test]
    fn rejects_out_of_range_and_unknown() {
        assert!(Config::parse("beta = 1").is_err());
        assert!(Config::parse("delta = 0").is_err());
        assert!(Config::parse("colour = red").is_err());
        let e = Config::parse("\n\ntrials = x").unwrap_err().to_string();
        assert!(e.contains("line 3"), "{e}");
    }
}

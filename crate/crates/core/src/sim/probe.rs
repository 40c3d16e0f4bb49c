use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_integer::Integer;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A positive rational number, kept in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Rational {
    num: u64,
    den: u64,
}

impl Rational {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if num == 0 || den == 0 {
            return Err(Error::InvalidProbe(format!("frequency ratio {num}/{den} must be positive")));
        }
        let g = num.gcd(&den);
        Ok(Rational { num: num / g, den: den / g })
    }

    pub fn num(&self) -> u64 {
        self.num
    }

    pub fn den(&self) -> u64 {
        self.den
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact conversion of a float with at most six decimals, such as `7877.75`.
    pub fn from_decimal(x: f64) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidProbe(format!("frequency ratio {x} must be positive")));
        }
        let mut den = 1u64;
        for _ in 0..=6 {
            let scaled = x * den as f64;
            let r = scaled.round();
            if (scaled - r).abs() <= 1e-9 * scaled.max(1.0) && r < 9e15 {
                return Rational::new(r as u64, den);
            }
            den *= 10;
        }
        Err(Error::InvalidProbe(format!(
            "frequency ratio {x} is not a terminating decimal; give it as \"p/q\""
        )))
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::InvalidProbe(format!("cannot read frequency ratio {s:?}"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n = n.trim().parse::<u64>().map_err(|_| bad())?;
                let d = d.trim().parse::<u64>().map_err(|_| bad())?;
                Rational::new(n, d)
            }
            None => Rational::from_decimal(s.parse::<f64>().map_err(|_| bad())?),
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(u64),
            Float(f64),
            Text(String),
        }
        let r = match Raw::deserialize(d)? {
            Raw::Int(n) => Rational::new(n, 1),
            Raw::Float(x) => Rational::from_decimal(x),
            Raw::Text(s) => s.parse(),
        };
        r.map_err(serde::de::Error::custom)
    }
}

/// A deceiver's belief about the phase of one target's probe.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseEstimate {
    pub deceiver: usize,
    pub target: usize,
    pub phase: f64,
}

/// Sinusoidal probing: player `i` perturbs with `a sin(ω ω̄_i t + φ_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeConfig {
    pub a: f64,
    pub k: f64,
    pub omega: f64,
    pub omega_bar: Vec<Rational>,
    pub phases: Vec<f64>,
    pub phase_estimates: Vec<PhaseEstimate>,
}

impl ProbeConfig {
    pub fn new(a: f64, k: f64, omega: f64, omega_bar: Vec<Rational>) -> Result<Self> {
        let n = omega_bar.len();
        let p = ProbeConfig { a, k, omega, omega_bar, phases: vec![0.0; n], phase_estimates: vec![] };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidProbe(m));
        if !(self.a > 0.0) || !self.a.is_finite() {
            return bad(format!("amplitude a = {} must be positive", self.a));
        }
        if !(self.k > 0.0) || !self.k.is_finite() {
            return bad(format!("gain k = {} must be positive", self.k));
        }
        if !(self.omega > 0.0) || !self.omega.is_finite() {
            return bad(format!("base frequency omega = {} must be positive", self.omega));
        }
        if self.phases.len() != self.omega_bar.len() {
            return bad(format!(
                "{} phases given for {} players",
                self.phases.len(),
                self.omega_bar.len()
            ));
        }
        for i in 0..self.omega_bar.len() {
            for j in 0..i {
                if self.omega_bar[i] == self.omega_bar[j] {
                    return bad(format!("players {} and {} share a probe frequency", j + 1, i + 1));
                }
            }
        }
        Ok(())
    }

    pub fn players(&self) -> usize {
        self.omega_bar.len()
    }

    /// `ω_i = ω ω̄_i`.
    pub fn frequency(&self, i: usize) -> f64 {
        self.omega * self.omega_bar[i].value()
    }

    /// Phase deceiver `d` uses when replaying the probe of `target`.
    pub fn estimated_phase(&self, deceiver: usize, target: usize) -> f64 {
        self.phase_estimates
            .iter()
            .rev()
            .find(|e| e.deceiver == deceiver && e.target == target)
            .map(|e| e.phase)
            .unwrap_or(self.phases[target])
    }

    /// Smallest positive rational `L` with `L ω̄_i` an integer for every player.
    pub fn period_multiple(&self) -> Rational {
        let lcm_den = self.omega_bar.iter().fold(1u64, |acc, r| acc.lcm(&r.den()));
        let g = self.omega_bar.iter().fold(0u64, |acc, r| acc.gcd(&(r.num() * (lcm_den / r.den()))));
        Rational::new(lcm_den, g).expect("positive by construction")
    }

    /// Common period `T = 2π L / ω` of all probe signals.
    pub fn common_period(&self) -> f64 {
        2.0 * PI * self.period_multiple().value() / self.omega
    }

    /// Copy with every frequency scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> ProbeConfig {
        ProbeConfig { omega: self.omega * factor, ..self.clone() }
    }
}

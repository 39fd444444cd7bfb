//! Edge-step functions and their analytic profiles.
//!
//! An edge-step function `f` maps a step index `s >= 1` to the probability
//! that step `s` adds a new vertex rather than a new edge. The analytic side
//! of the laboratory needs a handful of derived quantities:
//!
//! * the running sum `F(t) = f(1) + ... + f(t)`, which tracks the expected
//!   number of vertices,
//! * the inverse threshold `F_inv(r)`, the first step where the running sum
//!   reaches `r`,
//! * the degree growth product `phi(t) = prod_{s<t} (1 + 1/s - f(s+1)/(2s))`
//!   and its normalised form `xi(t) = phi(t)/t`,
//! * the per-rank growth scale `psi(i) = phi(F_inv(i))`.
//!
//! Sums are compensated and products are accumulated as sums of `ln_1p`
//! terms, so the identities between these quantities hold to near machine
//! precision over desk-scale horizons.

use std::fmt;
use std::io::BufRead;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// Behaviour of a tabulated function past the end of its value list.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TableTail {
    /// Repeat the last tabulated value forever.
    Hold,
    /// Use a fixed probability for every step past the table.
    Fixed(f64),
}

/// A step-indexed vertex probability function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum EdgeStepFunction {
    /// `f(s) = p` for every step.
    Constant { p: f64 },
    /// `f(s) = min(1, c * s^-gamma * ln(e + s)^log_exponent)`.
    ///
    /// With `log_exponent = 0` this is a plain regularly varying decay of
    /// index `-gamma`; a negative `log_exponent` with `gamma = 0` gives a
    /// slowly varying function that still decreases to zero.
    PowerLaw { gamma: f64, c: f64, log_exponent: f64 },
    /// Explicit values for the first steps, then a tail rule.
    ///
    /// Unlike the closed-form kinds, tabulated values may be exactly zero;
    /// such functions can still be generated from, but their running sum may
    /// stall and inverse lookups on it can fail.
    Table { values: Vec<f64>, tail: TableTail },
}

impl EdgeStepFunction {
    /// Constant function with `p` in `(0, 1]`.
    pub fn constant(p: f64) -> Result<Self> {
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::domain(format!("constant probability must lie in (0,1], got {p}")));
        }
        Ok(EdgeStepFunction::Constant { p })
    }

    /// Power law decay of index `-gamma` with prefactor `c` in `(0, 1]` and
    /// an optional logarithmic factor `ln(e + s)^log_exponent`.
    pub fn power_law(gamma: f64, c: f64, log_exponent: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&gamma) {
            return Err(Error::domain(format!("decay index must lie in [0,1), got {gamma}")));
        }
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::domain(format!("prefactor must lie in (0,1], got {c}")));
        }
        if !log_exponent.is_finite() {
            return Err(Error::domain("log exponent must be finite".to_string()));
        }
        Ok(EdgeStepFunction::PowerLaw { gamma, c, log_exponent })
    }

    /// Tabulated function. Every value must lie in `[0, 1]`.
    pub fn table(values: Vec<f64>, tail: TableTail) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("table needs at least one value".to_string()));
        }
        let tail_ok = match tail {
            TableTail::Hold => true,
            TableTail::Fixed(p) => (0.0..=1.0).contains(&p),
        };
        if !tail_ok {
            return Err(Error::domain("table tail probability must lie in [0,1]".to_string()));
        }
        if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::domain(format!("table value {bad} outside [0,1]")));
        }
        Ok(EdgeStepFunction::Table { values, tail })
    }

    /// Reads a table, one probability per line. Blank lines are skipped.
    pub fn table_from_reader(reader: impl BufRead) -> Result<Self> {
        let mut values = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() {
                continue;
            }
            let value: f64 = trimmed
                .parse()
                .map_err(|_| Error::parse(idx + 1, format!("not a probability: {trimmed:?}")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::parse(idx + 1, format!("value {value} outside [0,1]")));
            }
            values.push(value);
        }
        Self::table(values, TableTail::Hold)
    }

    /// Parses a compact spec string: `const:p`, `rv:gamma[,c][,log_exponent]`
    /// or an inline table `values:v1,v2,...`.
    pub fn parse_spec(spec: &str) -> Result<Self> {
        let (kind, rest) = spec
            .split_once(':')
            .ok_or_else(|| Error::config(format!("function spec {spec:?} has no kind prefix")))?;
        let parse_f64 = |field: &str| -> Result<f64> {
            field
                .trim()
                .parse()
                .map_err(|_| Error::config(format!("bad number {field:?} in function spec {spec:?}")))
        };
        match kind {
            "const" => Self::constant(parse_f64(rest)?),
            "rv" => {
                let parts: Vec<&str> = rest.split(',').collect();
                if parts.is_empty() || parts.len() > 3 {
                    return Err(Error::config(format!(
                        "rv spec takes gamma[,c][,log_exponent], got {spec:?}"
                    )));
                }
                let gamma = parse_f64(parts[0])?;
                let c = if parts.len() > 1 { parse_f64(parts[1])? } else { 1.0 };
                let log_exponent = if parts.len() > 2 { parse_f64(parts[2])? } else { 0.0 };
                Self::power_law(gamma, c, log_exponent)
            }
            "values" => {
                let values = rest.split(',').map(parse_f64).collect::<Result<Vec<_>>>()?;
                Self::table(values, TableTail::Hold)
            }
            other => Err(Error::config(format!("unknown function kind {other:?} in {spec:?}"))),
        }
    }

    /// Value of the function at step `s >= 1`.
    pub fn eval(&self, s: u64) -> f64 {
        assert!(s >= 1, "step index starts at 1");
        match self {
            EdgeStepFunction::Constant { p } => *p,
            EdgeStepFunction::PowerLaw { gamma, c, log_exponent } => {
                let s = s as f64;
                let mut value = c * s.powf(-gamma);
                if *log_exponent != 0.0 {
                    value *= (std::f64::consts::E + s).ln().powf(*log_exponent);
                }
                value.min(1.0)
            }
            EdgeStepFunction::Table { values, tail } => {
                let idx = (s - 1) as usize;
                if idx < values.len() {
                    values[idx]
                } else {
                    match tail {
                        TableTail::Hold => *values.last().expect("table is nonempty"),
                        TableTail::Fixed(p) => *p,
                    }
                }
            }
        }
    }

    /// Ratio `f(floor(a * t)) / f(t)`, the finite-scale regular variation
    /// probe. For a decay of index `-gamma` it approaches `a^-gamma`.
    pub fn rv_ratio(&self, a: f64, t: u64) -> Result<f64> {
        if !(a > 0.0) || t == 0 {
            return Err(Error::domain(format!("rv ratio needs a > 0 and t >= 1, got a={a}, t={t}")));
        }
        let scaled = ((a * t as f64).floor() as u64).max(1);
        Ok(self.eval(scaled) / self.eval(t))
    }

    /// Compensated sum of `|f(s) - h(s)|` for `s = 1..=t`.
    pub fn l1_distance(&self, other: &EdgeStepFunction, t: u64) -> f64 {
        let mut sum = KahanSum::default();
        for s in 1..=t {
            sum.add((self.eval(s) - other.eval(s)).abs());
        }
        sum.value()
    }
}

impl fmt::Display for EdgeStepFunction {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EdgeStepFunction::Constant { p } => write!(out, "const:{p}"),
            EdgeStepFunction::PowerLaw { gamma, c, log_exponent } => {
                if *log_exponent == 0.0 {
                    write!(out, "rv:{gamma},{c}")
                } else {
                    write!(out, "rv:{gamma},{c},{log_exponent}")
                }
            }
            EdgeStepFunction::Table { values, tail } => {
                write!(out, "table(len={}, tail={tail:?})", values.len())
            }
        }
    }
}

/// Compensated (Kahan) accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct KahanSum {
    sum: f64,
    carry: f64,
}

impl KahanSum {
    pub(crate) fn add(&mut self, term: f64) {
        let y = term - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }

    pub(crate) fn value(&self) -> f64 {
        self.sum
    }
}

/// Default extension ceiling for profiles that grow on demand.
pub const DEFAULT_EXTENSION_CAP: u64 = 1 << 23;

/// Precomputed analytic quantities of one edge-step function over a horizon.
///
/// The profile is immutable once built, so it can be shared freely across
/// replica workers. All accessors taking a step expect it to lie within the
/// built horizon.
#[derive(Debug, Clone)]
pub struct AnalyticProfile {
    f: EdgeStepFunction,
    /// `cum[s] = F(s)`, with `cum[0] = 0`.
    cum: Vec<f64>,
    /// `log_growth[t] = ln phi(t)` for `t >= 1`; slot 0 is unused.
    log_growth: Vec<f64>,
    /// `log_ratio[t] = ln xi(t)` for `t >= 1`; slot 0 is unused.
    log_ratio: Vec<f64>,
    cum_acc: KahanSum,
    growth_acc: KahanSum,
    ratio_acc: KahanSum,
}

impl AnalyticProfile {
    /// Builds the profile for steps `1..=horizon`.
    pub fn new(f: EdgeStepFunction, horizon: u64) -> Self {
        let mut profile = AnalyticProfile {
            f,
            cum: vec![0.0],
            log_growth: vec![0.0],
            log_ratio: vec![0.0],
            cum_acc: KahanSum::default(),
            growth_acc: KahanSum::default(),
            ratio_acc: KahanSum::default(),
        };
        profile.extend_to(horizon);
        profile
    }

    /// Builds a profile just large enough that the running sum reaches `r`,
    /// doubling the horizon up to `cap` steps.
    pub fn with_cumulative_at_least(f: EdgeStepFunction, r: f64, cap: u64) -> Result<Self> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("running sum target must be >= 0, got {r}")));
        }
        let mut profile = AnalyticProfile::new(f, 0);
        let mut horizon: u64 = 1024;
        loop {
            profile.extend_to(horizon.min(cap));
            if profile.cum[profile.horizon() as usize] >= r {
                return Ok(profile);
            }
            if horizon >= cap {
                return Err(Error::resource(format!(
                    "running sum of {} stays below {r} within the {cap} step extension cap",
                    profile.f
                )));
            }
            horizon = horizon.saturating_mul(2);
        }
    }

    fn extend_to(&mut self, horizon: u64) {
        let from = self.cum.len() as u64; // next step index to ingest
        if horizon < from {
            return;
        }
        self.cum.reserve((horizon + 1 - from) as usize);
        self.log_growth.reserve((horizon + 1 - from) as usize);
        self.log_ratio.reserve((horizon + 1 - from) as usize);
        for t in from..=horizon {
            let value = self.f.eval(t);
            self.cum_acc.add(value);
            self.cum.push(self.cum_acc.value());
            if t >= 2 {
                // Going from phi(t-1) to phi(t) multiplies in the factor for
                // s = t-1, and likewise for xi.
                let s = (t - 1) as f64;
                self.growth_acc.add(((1.0 - value / 2.0) / s).ln_1p());
                self.ratio_acc.add((-value / (2.0 * t as f64)).ln_1p());
            }
            self.log_growth.push(self.growth_acc.value());
            self.log_ratio.push(self.ratio_acc.value());
        }
    }

    pub fn f(&self) -> &EdgeStepFunction {
        &self.f
    }

    /// Largest step the profile was built for.
    pub fn horizon(&self) -> u64 {
        (self.cum.len() - 1) as u64
    }

    pub fn eval(&self, s: u64) -> f64 {
        self.f.eval(s)
    }

    /// Running sum `F(t)`; `F(0) = 0`.
    pub fn cumulative(&self, t: u64) -> f64 {
        self.cum[t as usize]
    }

    /// Expected number of vertices at time `t`: the initial vertex plus one
    /// expected arrival per step from step 2 on.
    pub fn expected_vertex_count(&self, t: u64) -> f64 {
        assert!(t >= 1, "the graph starts at time 1");
        1.0 + self.cumulative(t) - self.eval(1)
    }

    /// First step `s` with `F(s) >= r`.
    ///
    /// Fails with a domain error for negative `r` and with a resource error
    /// when the running sum does not reach `r` within the built horizon.
    pub fn inverse_cumulative(&self, r: f64) -> Result<u64> {
        if !(r >= 0.0) {
            return Err(Error::domain(format!("inverse threshold must be >= 0, got {r}")));
        }
        let idx = self.cum.partition_point(|&v| v < r) as u64;
        if idx > self.horizon() {
            return Err(Error::resource(format!(
                "running sum reaches only {:.6} at the built horizon {}, below {r}",
                self.cum[self.horizon() as usize],
                self.horizon()
            )));
        }
        Ok(idx.max(1))
    }

    /// Degree growth product `phi(t)`, with `phi(1) = 1`.
    pub fn degree_growth(&self, t: u64) -> f64 {
        assert!(t >= 1, "degree growth starts at step 1");
        self.log_growth[t as usize].exp()
    }

    /// Normalised growth `xi(t) = phi(t) / t`, accumulated independently.
    pub fn growth_ratio(&self, t: u64) -> f64 {
        assert!(t >= 1, "growth ratio starts at step 1");
        self.log_ratio[t as usize].exp()
    }

    /// Growth scale attached to vertex rank `i >= 1`: `phi(F_inv(i))`.
    pub fn rank_growth(&self, i: u64) -> Result<f64> {
        if i < 1 {
            return Err(Error::domain("vertex ranks start at 1".to_string()));
        }
        let s = self.inverse_cumulative(i as f64)?;
        Ok(self.degree_growth(s))
    }
}

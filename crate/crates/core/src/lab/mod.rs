//! Experiment drivers: parameter schedules, set generators and empirical
//! probes of the projection and expansion statements.

mod generate;
mod probes;

use std::path::Path;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Element};
use crate::error::{Error, Result};
use crate::format::write_atomic;

pub use generate::{ap, circle_net, draw_random_dset, gen_counterexample, gen_random_dset, Counterexample, Which, NC_CONSTANT};
pub use probes::{
    fibre_profile, measure_projection_profile, probe_babyproj, run_expansion, BabyprojReport, FibreReport, FibreRow,
};

/// `c_1 = s(1 - s/d)/4`.
pub fn choose_c1(s: Rational64, d: u32) -> Result<Rational64> {
    let d = Rational64::from_integer(d as i64);
    if s <= Rational64::zero() || s >= d {
        return Err(Error::RangeError(format!("c1 needs 0 < s < d, got s = {s}, d = {d}")));
    }
    Ok(s * (Rational64::from_integer(1) - s / d) / 4)
}

/// A scale `ρ = δ^exponent` and its nearest representable power of the radix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RhoChoice {
    /// Exact exponent as a fraction `num/den`.
    pub exponent: (i64, i64),
    /// `ρ = radix^-rho_exp`.
    pub rho_exp: u32,
    /// `rho_exp / m - exponent`.
    pub rounding: f64,
    /// `rho_exp` had to be moved into `1..=(m-1)/3`.
    pub clamped: bool,
}

fn ratio_pair(r: Rational64) -> (i64, i64) {
    (*r.numer(), *r.denom())
}

fn round_rho(exponent: Rational64, m: u32) -> Result<RhoChoice> {
    let max = (m.saturating_sub(1)) / 3;
    if max == 0 {
        return Err(Error::RangeError(format!("m = {m} leaves no room for 0 < 3 rho_exp < m")));
    }
    let raw = (exponent * Rational64::from_integer(m as i64)).round().to_i64().unwrap_or(0);
    let rho_exp = raw.clamp(1, max as i64) as u32;
    Ok(RhoChoice {
        exponent: ratio_pair(exponent),
        rho_exp,
        rounding: rho_exp as f64 / m as f64 - exponent.to_f64().unwrap_or(f64::NAN),
        clamped: rho_exp as i64 != raw,
    })
}

/// `ρ = δ^((d-s)/(3(d+s)))`, rounded to a radix power strictly between `δ^(1/3)` and 1.
pub fn choose_rho_expand(s: Rational64, d: u32, m: u32) -> Result<RhoChoice> {
    let dr = Rational64::from_integer(d as i64);
    if s <= Rational64::zero() || s >= dr {
        return Err(Error::RangeError(format!("rho needs 0 < s < d, got s = {s}, d = {d}")));
    }
    round_rho((dr - s) / (Rational64::from_integer(3) * (dr + s)), m)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TvChoice {
    pub rho: RhoChoice,
    /// `c = s(t - σ + ε)/t` as `num/den`.
    pub c: (i64, i64),
    /// `t = σ`: the gain comes from `ε` alone.
    pub degenerate: bool,
}

/// `ρ = δ^((t-σ+ε)/t)` and `c = s(t-σ+ε)/t`.
pub fn choose_rho_tv(s: Rational64, sigma: Rational64, t: Rational64, eps: Rational64, m: u32) -> Result<TvChoice> {
    if s <= Rational64::zero() || s > sigma || sigma > t || eps < Rational64::zero() {
        return Err(Error::RangeError(format!(
            "need 0 < s <= sigma <= t and eps >= 0, got s = {s}, sigma = {sigma}, t = {t}, eps = {eps}"
        )));
    }
    let e = (t - sigma + eps) / t;
    let c = s * e;
    let rho = if e.is_zero() {
        RhoChoice {
            exponent: (0, 1),
            rho_exp: 0,
            rounding: 0.0,
            clamped: false,
        }
    } else {
        let exp = (e * Rational64::from_integer(m as i64)).round().to_i64().unwrap_or(0);
        let rho_exp = exp.clamp(1, m as i64) as u32;
        RhoChoice {
            exponent: ratio_pair(e),
            rho_exp,
            rounding: rho_exp as f64 / m as f64 - e.to_f64().unwrap_or(f64::NAN),
            clamped: rho_exp as i64 != exp,
        }
    };
    Ok(TvChoice {
        rho,
        c: ratio_pair(c),
        degenerate: t == sigma,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationBudget {
    pub n: u32,
    /// `s_0, s_1, ..., s_n`.
    pub trajectory: Vec<f64>,
    /// The theoretical product count, symbolically.
    pub big_n: String,
    /// `log10` of that count.
    pub log10_big_n: f64,
}

const MAX_ITERATIONS: u32 = 1_000_000;

/// Iterate `s_k = s_{k-1} + c_1(s_{k-1})/2` until `s_n >= t`.
pub fn iteration_budget(s: f64, t: f64, d: u32, commutative: bool) -> Result<IterationBudget> {
    let df = d as f64;
    if !(0.0 < s && s < t && t < df) {
        return Err(Error::RangeError(format!("need 0 < s < t < d, got s = {s}, t = {t}, d = {d}")));
    }
    let mut trajectory = vec![s];
    let mut cur = s;
    while cur < t {
        let next = cur + cur * (1.0 - cur / df) / 8.0;
        if next <= cur || trajectory.len() as u32 > MAX_ITERATIONS {
            return Err(Error::RangeError(format!("recursion stalled at s = {cur}")));
        }
        cur = next;
        trajectory.push(cur);
    }
    let n = trajectory.len() as u32 - 1;
    let base = if commutative { 20 } else { 4 * d };
    Ok(IterationBudget {
        n,
        trajectory,
        big_n: format!("20^({base}^{n})"),
        log10_big_n: (base as f64).powi(n as i32) * 20f64.log10(),
    })
}

/// Everything a run needs beyond its inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub s: f64,
    pub sigma: f64,
    pub t: f64,
    pub d: u32,
    pub m: u32,
    pub rho_exp: u32,
    /// `Δ = δ/ρ^3 = radix^-delta_big_exp`.
    pub delta_big_exp: u32,
    pub c1: f64,
    pub c_tv: f64,
    pub n_iters: u32,
    pub big_n: String,
    /// Expansion rounds actually run.
    pub rounds: u32,
    pub n_sum: u32,
    pub n_prod: u32,
    /// Avoidance and non-concentration constant.
    pub c: f64,
    /// Stage length for re-uniformizing.
    pub stage: u32,
    pub seed: u64,
}

impl Schedule {
    /// Defaults for an expansion run on an `s`-dimensional input.
    pub fn expansion(s: Rational64, d: u32, m: u32) -> Result<Self> {
        let c1 = choose_c1(s, d)?;
        let rho = choose_rho_expand(s, d, m)?;
        let sf = s.to_f64().unwrap_or(f64::NAN);
        Ok(Schedule {
            s: sf,
            sigma: sf,
            t: sf,
            d,
            m,
            rho_exp: rho.rho_exp,
            delta_big_exp: m - 3 * rho.rho_exp,
            c1: c1.to_f64().unwrap_or(f64::NAN),
            c_tv: 0.0,
            n_iters: 1,
            big_n: "20^(20^1)".into(),
            rounds: 1,
            n_sum: 2,
            n_prod: 2,
            c: NC_CONSTANT,
            stage: 1,
            seed: 0,
        })
    }
}

/// One CSV row of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub exp_id: String,
    pub algebra: String,
    pub p: Option<u64>,
    pub d: usize,
    pub m: u32,
    /// Input or predicted exponent, as the experiment defines it.
    pub s: Option<f64>,
    pub sigma: Option<f64>,
    pub t: Option<f64>,
    pub op: String,
    pub x_coords: String,
    pub count: u64,
    pub exponent: f64,
    pub seed: Option<u64>,
}

impl ExperimentRecord {
    pub(crate) fn new(exp_id: &str, alg: &Algebra, op: impl Into<String>, x: Option<&Element>, count: usize) -> Self {
        ExperimentRecord {
            exp_id: exp_id.into(),
            algebra: alg.kind().to_string(),
            p: alg.p(),
            d: alg.d(),
            m: alg.m(),
            s: None,
            sigma: None,
            t: None,
            op: op.into(),
            x_coords: x.map(|x| x.to_string()).unwrap_or_default(),
            count: count as u64,
            exponent: crate::dset::covering_exponent(count, alg.m(), alg.radix()),
            seed: None,
        }
    }
}

/// Records as CSV, optionally preceded by one header line.
pub fn records_to_csv(header: Option<&str>, records: &[ExperimentRecord]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    if let Some(h) = header {
        out.extend_from_slice(h.as_bytes());
        out.push(b'\n');
    }
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    if records.is_empty() {
        w.write_record([
            "exp_id", "algebra", "p", "d", "m", "s", "sigma", "t", "op", "x_coords", "count", "exponent", "seed",
        ])
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn write_records_csv(path: &Path, header: Option<&str>, records: &[ExperimentRecord]) -> Result<()> {
    write_atomic(path, &records_to_csv(header, records)?)
}

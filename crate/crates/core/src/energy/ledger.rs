//! Exact sumset-cardinality inequalities on the grid group.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::algebra::{Element, Side};
use crate::budget::Budget;
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::format::write_atomic;
use crate::setops::{difference_set, scalar_image, sumset};

/// Addition-only set expression over a list of input sets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SetExpr {
    Set(usize),
    Sum(Box<SetExpr>, Box<SetExpr>),
    Diff(Box<SetExpr>, Box<SetExpr>),
    /// `{x a : a ∈ expr}`, rounded onto the grid.
    Scale(Element, Box<SetExpr>),
}

impl SetExpr {
    pub fn set(i: usize) -> Self {
        SetExpr::Set(i)
    }

    pub fn sum(self, other: SetExpr) -> Self {
        SetExpr::Sum(Box::new(self), Box::new(other))
    }

    pub fn diff(self, other: SetExpr) -> Self {
        SetExpr::Diff(Box::new(self), Box::new(other))
    }

    pub fn scale(self, x: Element) -> Self {
        SetExpr::Scale(x, Box::new(self))
    }

    pub fn eval(&self, sets: &[DSet], budget: &Budget) -> Result<DSet> {
        match self {
            SetExpr::Set(i) => sets
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::RangeError(format!("no input set {i}"))),
            SetExpr::Sum(x, y) => sumset(&x.eval(sets, budget)?, &y.eval(sets, budget)?, budget),
            SetExpr::Diff(x, y) => difference_set(&x.eval(sets, budget)?, &y.eval(sets, budget)?, budget),
            SetExpr::Scale(c, x) => scalar_image(c, &x.eval(sets, budget)?, Side::Left),
        }
    }
}

impl std::fmt::Display for SetExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SetExpr::Set(i) => write!(f, "S{i}"),
            SetExpr::Sum(x, y) => write!(f, "({x} + {y})"),
            SetExpr::Diff(x, y) => write!(f, "({x} - {y})"),
            SetExpr::Scale(c, x) => write!(f, "[{c}]{x}"),
        }
    }
}

/// An inequality between products of set sizes, each side a product of
/// expression sizes: `Π |lhs_i| * Π |rhs_den_j| <= Π |rhs_num_k|`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Inequality {
    /// `|A| |B - C| <= |A - B| |A - C|`.
    RuzsaTriangle { a: SetExpr, b: SetExpr, c: SetExpr },
    /// `|A + B| <= K |A|` implies `|2B - B| <= K^3 |A|`.
    Plunnecke { a: SetExpr, b: SetExpr },
    /// `|B1 + B2 + B3| <= |A + B1| |A + B2| |A + B3| / |A|^2`.
    SumCover { a: SetExpr, b: [SetExpr; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub instance: String,
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs / lhs`; an instance holds iff `holds`.
    pub slack: f64,
    pub holds: bool,
}

fn size(e: &SetExpr, sets: &[DSet], budget: &Budget) -> Result<u128> {
    Ok(e.eval(sets, budget)?.len() as u128)
}

fn row(instance: String, lhs_num: u128, lhs_den: u128, rhs_num: u128, rhs_den: u128) -> LedgerRow {
    // lhs_num / lhs_den <= rhs_num / rhs_den, decided exactly
    let holds = lhs_num * rhs_den <= rhs_num * lhs_den;
    let lhs = lhs_num as f64 / lhs_den as f64;
    let rhs = rhs_num as f64 / rhs_den as f64;
    LedgerRow {
        instance,
        lhs,
        rhs,
        slack: rhs / lhs,
        holds,
    }
}

/// Evaluate every instance exactly.
pub fn ruzsa_ledger(sets: &[DSet], instances: &[Inequality], budget: &Budget) -> Result<Vec<LedgerRow>> {
    instances
        .iter()
        .map(|inst| {
            Ok(match inst {
                Inequality::RuzsaTriangle { a, b, c } => {
                    let na = size(a, sets, budget)?;
                    let bc = size(&b.clone().diff(c.clone()), sets, budget)?;
                    let ab = size(&a.clone().diff(b.clone()), sets, budget)?;
                    let ac = size(&a.clone().diff(c.clone()), sets, budget)?;
                    row(format!("triangle |{a}||{b} - {c}| <= |{a} - {b}||{a} - {c}|"), na * bc, 1, ab * ac, 1)
                }
                Inequality::Plunnecke { a, b } => {
                    let na = size(a, sets, budget)?;
                    let ab = size(&a.clone().sum(b.clone()), sets, budget)?;
                    let bbb = size(&b.clone().sum(b.clone()).diff(b.clone()), sets, budget)?;
                    row(format!("plunnecke |2{b} - {b}| <= |{a} + {b}|^3 / |{a}|^2"), bbb, 1, ab.pow(3), na * na)
                }
                Inequality::SumCover { a, b } => {
                    let na = size(a, sets, budget)?;
                    let all = size(&b[0].clone().sum(b[1].clone()).sum(b[2].clone()), sets, budget)?;
                    let mut num = 1u128;
                    for bi in b {
                        num *= size(&a.clone().sum(bi.clone()), sets, budget)?;
                    }
                    row(
                        format!("sum cover |{} + {} + {}| <= |{a} + B1||{a} + B2||{a} + B3| / |{a}|^2", b[0], b[1], b[2]),
                        all,
                        1,
                        num,
                        na * na,
                    )
                }
            })
        })
        .collect()
}

/// The chain `|A + y1 A - y2 A| <= |A + A||A + y1 A||A - y2 A| / |A|^2`, with
/// `S0 = A`.
pub fn theorem_chain(a: &DSet, y1: &Element, y2: &Element, budget: &Budget) -> Result<Vec<LedgerRow>> {
    let alg = a.alg();
    let base = SetExpr::set(0);
    let inst = Inequality::SumCover {
        a: base.clone(),
        b: [
            base.clone(),
            base.clone().scale(y1.clone()),
            base.clone().scale(alg.neg(y2)),
        ],
    };
    ruzsa_ledger(std::slice::from_ref(a), &[inst], budget)
}

/// Write rows as CSV with columns `instance,lhs,rhs,slack`.
pub fn write_ledger_csv(path: &Path, header: Option<&str>, rows: &[LedgerRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["instance", "lhs", "rhs", "slack"]).map_err(|e| Error::Io(e.to_string()))?;
    for r in rows {
        w.write_record([r.instance.clone(), r.lhs.to_string(), r.rhs.to_string(), r.slack.to_string()])
            .map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let mut out = Vec::new();
    if let Some(h) = header {
        out.extend_from_slice(h.as_bytes());
        out.push(b'\n');
    }
    out.extend_from_slice(&body);
    write_atomic(path, &out)
}

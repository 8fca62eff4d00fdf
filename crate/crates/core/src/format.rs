//! Text format for point sets.
//!
//! ```text
//! #dlab v1 base=R p=- d=2 m=6 Rexp=0[ poly=c0,...,cd][ <provenance>]
//! -64 0
//! -63 0
//! ```
//!
//! One point per line, `d` (or `2d` for pair sets) canonical integers
//! separated by single spaces, in strictly increasing order, each line
//! newline-terminated. Parsing is strict so that every accepted file
//! serializes back to the identical bytes. `poly=` appears only for p-adic
//! extensions whose defining polynomial is not the default one.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::algebra::{make_algebra, poly, Algebra, AlgebraSpec, Base, Element};
use crate::dset::DSet;
use crate::error::{Error, Result};
use crate::setops::PairSet;

const MAGIC: &str = "#dlab v1";

/// A parsed file: the data and whatever trailed the header fields.
#[derive(Clone, Debug, PartialEq)]
pub struct Document<T> {
    pub data: T,
    pub provenance: Option<String>,
}

fn header(alg: &Algebra, radius_exp: i32, provenance: Option<&str>) -> String {
    let (base, p) = match alg.base() {
        Base::Real => ("R", "-".to_string()),
        Base::Padic { p } => ("Qp", p.to_string()),
    };
    let mut h = format!("{MAGIC} base={base} p={p} d={} m={} Rexp={radius_exp}", alg.d(), alg.m());
    if let (Some(f), Some(p)) = (alg.defining_poly(), alg.p()) {
        if f != poly::smallest_irreducible(p, alg.d()).as_slice() {
            let coeffs: Vec<String> = f.iter().map(|c| c.to_string()).collect();
            h.push_str(&format!(" poly={}", coeffs.join(",")));
        }
    }
    if let Some(prov) = provenance {
        h.push(' ');
        h.push_str(&prov.replace('\n', " "));
    }
    h.push('\n');
    h
}

fn push_coords(out: &mut String, coords: impl Iterator<Item = i64>) {
    let mut first = true;
    for c in coords {
        if !first {
            out.push(' ');
        }
        first = false;
        out.push_str(&c.to_string());
    }
    out.push('\n');
}

pub fn write_dset(a: &DSet, provenance: Option<&str>) -> String {
    let mut out = header(a.alg(), a.radius_exp(), provenance);
    for x in a.points() {
        push_coords(&mut out, x.coords().iter().copied());
    }
    out
}

pub fn write_pairset(g: &PairSet, provenance: Option<&str>) -> String {
    let mut out = header(g.alg(), g.radius_exp(), provenance);
    for (a, b) in g.pairs() {
        push_coords(&mut out, a.coords().iter().chain(b.coords()).copied());
    }
    out
}

/// A canonical decimal integer: no sign on zero, no `+`, no leading zeros.
pub fn parse_int(s: &str) -> Option<i64> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    let canonical = !digits.is_empty()
        && digits.bytes().all(|b| b.is_ascii_digit())
        && (digits == "0" || !digits.starts_with('0'))
        && !(s.starts_with('-') && digits == "0");
    if !canonical {
        return None;
    }
    s.parse().ok()
}

/// One element from a line of `d` space-separated canonical integers.
pub fn parse_element(alg: &Algebra, line: &str) -> Result<Element> {
    let coords = parse_row(line, alg.d(), 1)?;
    alg.element(coords).map_err(|e| Error::parse(1, e.to_string()))
}

fn parse_row(line: &str, width: usize, lineno: usize) -> Result<Vec<i64>> {
    let fields: Vec<&str> = line.split(' ').collect();
    if fields.len() != width {
        return Err(Error::parse(lineno, format!("expected {width} integers, found {}", fields.len())));
    }
    fields
        .into_iter()
        .map(|f| parse_int(f).ok_or_else(|| Error::parse(lineno, format!("not a canonical integer: {f:?}"))))
        .collect()
}

struct Parsed<'a> {
    alg: Algebra,
    radius_exp: i32,
    provenance: Option<String>,
    body: Vec<&'a str>,
}

fn field<'a>(tok: Option<&'a str>, key: &str) -> Result<&'a str> {
    tok.and_then(|t| t.strip_prefix(key))
        .and_then(|t| t.strip_prefix('='))
        .ok_or_else(|| Error::parse(1, format!("expected {key}=...")))
}

fn parse_header(text: &str) -> Result<Parsed<'_>> {
    let body = text
        .strip_suffix('\n')
        .ok_or_else(|| Error::parse(1, "file must end with a newline"))?;
    let mut lines = body.split('\n');
    let head = lines.next().unwrap_or_default();
    let rest = head
        .strip_prefix(MAGIC)
        .and_then(|r| r.strip_prefix(' '))
        .ok_or_else(|| Error::parse(1, format!("header must start with {MAGIC:?}")))?;
    let mut toks = rest.splitn(6, ' ');
    let base = field(toks.next(), "base")?;
    let p = field(toks.next(), "p")?;
    let d = field(toks.next(), "d")?;
    let m = field(toks.next(), "m")?;
    let r = field(toks.next(), "Rexp")?;
    let tail = toks.next();

    let bad = |what: &str| Error::parse(1, format!("bad {what}"));
    let d: usize = parse_int(d).filter(|&v| v > 0).ok_or_else(|| bad("d"))? as usize;
    let m: u32 = parse_int(m).filter(|&v| v > 0 && v <= 64).ok_or_else(|| bad("m"))? as u32;
    let radius_exp: i32 = parse_int(r).filter(|v| v.abs() <= 64).ok_or_else(|| bad("Rexp"))? as i32;

    let (poly, provenance) = match tail {
        Some(t) if t.starts_with("poly=") => {
            let (tok, prov) = match t.split_once(' ') {
                Some((tok, prov)) => (tok, Some(prov)),
                None => (t, None),
            };
            let coeffs: Vec<u64> = tok["poly=".len()..]
                .split(',')
                .map(|c| parse_int(c).filter(|&v| v >= 0).map(|v| v as u64))
                .collect::<Option<_>>()
                .ok_or_else(|| bad("poly"))?;
            (Some(coeffs), prov)
        }
        other => (None, other),
    };
    if provenance == Some("") {
        return Err(Error::parse(1, "trailing space in header"));
    }

    let spec = match base {
        "R" => {
            if p != "-" || poly.is_some() {
                return Err(Error::parse(1, "real base takes p=- and no poly"));
            }
            AlgebraSpec::real(d, m).map_err(|e| Error::parse(1, e.to_string()))?
        }
        "Qp" => {
            let p = parse_int(p).filter(|&v| v > 0).ok_or_else(|| bad("p"))? as u64;
            if poly.is_some() && d == 1 {
                return Err(Error::parse(1, "Qp takes no poly="));
            }
            let mut spec = AlgebraSpec::padic(p, d, m);
            spec.poly = poly;
            spec
        }
        _ => return Err(Error::parse(1, "base must be R or Qp")),
    };
    if base == "Qp" && radius_exp != 0 {
        return Err(Error::parse(1, "p-adic files have Rexp=0"));
    }
    let alg = make_algebra(&spec).map_err(|e| Error::parse(1, e.to_string()))?;
    if let (Some(f), Some(p)) = (&spec.poly, alg.p()) {
        if alg.defining_poly() != Some(f.as_slice()) {
            return Err(Error::parse(1, "poly= coefficients must be reduced mod p"));
        }
        if f.as_slice() == poly::smallest_irreducible(p, d).as_slice() {
            return Err(Error::parse(1, "poly= must be omitted for the default polynomial"));
        }
    }
    Ok(Parsed {
        alg,
        radius_exp,
        provenance: provenance.map(str::to_string),
        body: lines.collect(),
    })
}

fn check_increasing<T: Ord>(rows: &[T], lineno_of: impl Fn(usize) -> usize) -> Result<()> {
    for (i, w) in rows.windows(2).enumerate() {
        if w[0] >= w[1] {
            return Err(Error::parse(lineno_of(i + 1), "points must be strictly increasing"));
        }
    }
    Ok(())
}

pub fn parse_dset(text: &str) -> Result<Document<DSet>> {
    let parsed = parse_header(text)?;
    let d = parsed.alg.d();
    let pts: Vec<Element> = parsed
        .body
        .iter()
        .enumerate()
        .map(|(i, line)| parse_row(line, d, i + 2).map(Element::new))
        .collect::<Result<_>>()?;
    check_increasing(&pts, |i| i + 2)?;
    let set = DSet::new(parsed.alg, parsed.radius_exp, pts).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(Document {
        data: set,
        provenance: parsed.provenance,
    })
}

pub fn parse_pairset(text: &str) -> Result<Document<PairSet>> {
    let parsed = parse_header(text)?;
    let d = parsed.alg.d();
    let pairs: Vec<(Element, Element)> = parsed
        .body
        .iter()
        .enumerate()
        .map(|(i, line)| {
            let row = parse_row(line, 2 * d, i + 2)?;
            Ok((Element::new(row[..d].iter().copied()), Element::new(row[d..].iter().copied())))
        })
        .collect::<Result<_>>()?;
    check_increasing(&pairs, |i| i + 2)?;
    let g = PairSet::new(parsed.alg, parsed.radius_exp, pairs).map_err(|e| Error::parse(0, e.to_string()))?;
    Ok(Document {
        data: g,
        provenance: parsed.provenance,
    })
}

pub fn read_dset(path: &Path) -> Result<Document<DSet>> {
    parse_dset(&fs::read_to_string(path)?)
}

pub fn read_pairset(path: &Path) -> Result<Document<PairSet>> {
    parse_pairset(&fs::read_to_string(path)?)
}

/// Write through a temporary file in the same directory and rename, so a
/// reader never sees a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path
        .file_name()
        .ok_or_else(|| Error::Io(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp-{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(contents)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}

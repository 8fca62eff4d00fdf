use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::Rational64;
use serde::Serialize;

use dlab::budget::Budget;
use dlab::dset::DSet;
use dlab::energy::{self, Inequality, QuintupleSign, SetExpr, Tolerance, TvExponents};
use dlab::format::{parse_element, read_dset, read_pairset, write_atomic, write_dset, write_pairset};
use dlab::lab::{self, Schedule, Which};
use dlab::setops::{self, LinearMap, PairSet};
use dlab::structure;
use dlab::{make_algebra, Algebra, AlgebraKind, AlgebraSpec, Element, Error, Side};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{0}")]
    Lib(#[from] Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(Error::BudgetExceeded { .. }) => 3,
            _ => 2,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

#[derive(Parser, Debug, Serialize)]
#[command(name = "dlab", version, about = "Discretized sum-product and projection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize, PartialEq, Eq)]
enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Serialize)]
struct AlgArgs {
    /// R, C, H, Qp or Qp_ext.
    #[arg(long = "alg")]
    name: String,
    #[arg(long)]
    p: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    m: u32,
    /// Defining polynomial coefficients, constant term first, comma separated.
    #[arg(long)]
    poly: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum GenKind {
    Random,
    Circle,
    Ap,
    Grid,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum WhichArg {
    #[value(name = "1")]
    One,
    #[value(name = "2")]
    Two,
    #[value(name = "2-printed")]
    TwoPrinted,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum SideArg {
    Left,
    Right,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum OpKind {
    Sum,
    Diff,
    Prod,
    Iter,
    Proj,
    Quot,
    Linmap,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum SignArg {
    Printed,
    Symmetric,
}

#[derive(Clone, Copy, Debug, ValueEnum, Serialize)]
enum TolArg {
    Exact,
    Adjacent,
}

#[derive(Subcommand, Debug, Serialize)]
enum Command {
    /// Generate a set.
    Gen {
        #[command(flatten)]
        alg: AlgArgs,
        #[arg(long, value_enum, default_value = "random")]
        kind: GenKind,
        /// Target dimension for random sets.
        #[arg(long)]
        s: Option<f64>,
        /// Length of an arithmetic progression.
        #[arg(long, default_value_t = 16)]
        n: usize,
        /// Progression step in grid units.
        #[arg(long, default_value_t = 1)]
        step: i64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the complex examples `G` and `X`.
    Counterexample {
        #[arg(long, value_enum)]
        which: WhichArg,
        #[arg(long)]
        m: u32,
        /// Pair set path, then direction set path.
        #[arg(long, num_args = 2, value_names = ["G", "X"])]
        out: Vec<PathBuf>,
    },
    /// Print the covering number at scale `radix^-k`.
    Cover {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        k: i64,
    },
    /// Check `(δ, s, C)` non-concentration.
    VerifyNc {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 8.0)]
        c: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pigeonhole a uniform subset.
    Uniformize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        t: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Set operations.
    Op {
        #[arg(value_enum)]
        op: OpKind,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        /// Pair set input for `proj` and `linmap`.
        #[arg(long)]
        g: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "left")]
        side: SideArg,
        #[arg(long, default_value_t = 1)]
        n_sum: u32,
        #[arg(long, default_value_t = 1)]
        n_prod: u32,
        /// Direction for `proj`, coordinates separated by commas.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        #[arg(long, default_value_t = 1)]
        rho_exp: u32,
        /// `L11;L12;L21;L22` for `linmap`, each comma separated.
        #[arg(long, allow_hyphen_values = true)]
        map: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Greedy escape basis.
    Escape {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 0.0)]
        floor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sub-algebra avoidance.
    Avoid {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 8.0)]
        c: f64,
        #[arg(long)]
        strong: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the additive energy `E(A, B)`.
    Energy {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: Option<PathBuf>,
    },
    /// Count quintuples `|a + xb - (c - xd)| <= δ`.
    CountTv {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        rho_exp: u32,
        #[arg(long, value_enum, default_value = "printed")]
        sign: SignArg,
        #[arg(long, value_enum, default_value = "adjacent")]
        tol: TolArg,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        sigma: Option<f64>,
        #[arg(long)]
        t: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Count quadruples `|a1 q + a3 p - (a2 q + a4 p)| <= δ`.
    CountSparse {
        #[arg(long)]
        a: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        p: String,
        #[arg(long, allow_hyphen_values = true)]
        q: String,
        #[arg(long)]
        rho_exp: u32,
        #[arg(long, value_enum, default_value = "adjacent")]
        tol: TolArg,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Balog-Szemerédi-Gowers extraction from a graph.
    Bsg {
        #[arg(long)]
        h: PathBuf,
        /// Defaults to the first projection of `H`.
        #[arg(long)]
        a: Option<PathBuf>,
        /// Defaults to the second projection of `H`.
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sumset inequality ledger as CSV.
    Ledger {
        /// One set for the chain; three sets add triangle and Plünnecke rows.
        #[arg(long = "in", num_args = 1..=3, required = true)]
        input: Vec<PathBuf>,
        #[arg(long, allow_hyphen_values = true)]
        y1: String,
        #[arg(long, allow_hyphen_values = true)]
        y2: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Expansion rounds `n_sum (A^(n_prod) - A^(n_prod)) ∩ B(0, 1)`.
    Expand {
        #[arg(long = "in")]
        input: PathBuf,
        /// Input dimension as a fraction or decimal, e.g. `1` or `3/2`.
        #[arg(long)]
        s: String,
        #[arg(long, default_value_t = 1)]
        rounds: u32,
        #[arg(long, default_value_t = 2)]
        n_sum: u32,
        #[arg(long, default_value_t = 2)]
        n_prod: u32,
        #[arg(long, default_value_t = lab::NC_CONSTANT)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        stage: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: PathBuf,
    },
    /// `max_x N(A + xA)` over `x ∈ X`.
    Babyproj {
        #[arg(long = "A")]
        a: PathBuf,
        #[arg(long = "X")]
        x: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Heaviest `ρ`-fibres of `π_x` on a pair set.
    Fibres {
        #[arg(long)]
        g: PathBuf,
        #[arg(long)]
        x: PathBuf,
        #[arg(long)]
        c1: f64,
        #[arg(long)]
        rho_exp: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// `#dlab-cli <version> config=<json>`, the first line of every output.
fn header(cli: &Cli, budget: &Budget) -> String {
    #[derive(Serialize)]
    struct Resolved<'a> {
        command: &'a Command,
        budget: &'a Budget,
    }
    let config = serde_json::to_string(&Resolved {
        command: &cli.command,
        budget,
    })
    .expect("config serializes");
    format!("#dlab-cli {VERSION} config={config}")
}

fn provenance(cli: &Cli, budget: &Budget) -> String {
    header(cli, budget).trim_start_matches('#').to_string()
}

fn algebra(a: &AlgArgs) -> Result<Algebra> {
    let kind: AlgebraKind = a.name.parse()?;
    let poly = a
        .poly
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|c| c.trim().parse::<u64>().map_err(|_| usage(format!("bad poly coefficient {c:?}"))))
                .collect::<Result<Vec<_>>>()
        })
        .transpose()?;
    Ok(make_algebra(&AlgebraSpec {
        kind,
        p: a.p,
        d: a.d,
        m: a.m,
        poly,
    })?)
}

fn element(alg: &Algebra, s: &str) -> Result<Element> {
    let line = s.split([',', ' ']).filter(|t| !t.is_empty()).collect::<Vec<_>>().join(" ");
    Ok(parse_element(alg, &line)?)
}

fn rational(s: &str) -> Result<Rational64> {
    let bad = || usage(format!("not a rational number: {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let (n, d): (i64, i64) = (n.trim().parse().map_err(|_| bad())?, d.trim().parse().map_err(|_| bad())?);
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rational64::new(n, d));
    }
    let (int, frac) = s.split_once('.').unwrap_or((s, ""));
    if frac.len() > 15 || !frac.bytes().all(|b| b.is_ascii_digit()) {
        return Err(bad());
    }
    let den = 10i64.pow(frac.len() as u32);
    let whole: i64 = int.parse().map_err(|_| bad())?;
    let part: i64 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad())? };
    let sign = if int.starts_with('-') { -1 } else { 1 };
    Ok(Rational64::new(whole * den + sign * part, den))
}

fn dset(path: &Path) -> Result<DSet> {
    Ok(read_dset(path)?.data)
}

fn pairset(path: &Path) -> Result<PairSet> {
    Ok(read_pairset(path)?.data)
}

fn required<'a, T>(v: &'a Option<T>, flag: &str) -> Result<&'a T> {
    v.as_ref().ok_or_else(|| usage(format!("--{flag} is required here")))
}

struct Out<'a> {
    cli: &'a Cli,
    budget: Budget,
}

impl Out<'_> {
    fn set(&self, path: &Path, a: &DSet) -> Result<()> {
        Ok(write_atomic(path, write_dset(a, Some(&provenance(self.cli, &self.budget))).as_bytes())?)
    }

    fn pairs(&self, path: &Path, g: &PairSet) -> Result<()> {
        Ok(write_atomic(path, write_pairset(g, Some(&provenance(self.cli, &self.budget))).as_bytes())?)
    }

    /// Header line then pretty JSON, to `path` or stdout.
    fn json<T: Serialize>(&self, path: Option<&Path>, value: &T) -> Result<()> {
        let body = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
        self.text(path, format!("{}\n{body}\n", header(self.cli, &self.budget)))
    }

    fn records(&self, path: Option<&Path>, records: &[lab::ExperimentRecord]) -> Result<()> {
        let bytes = lab::records_to_csv(Some(&header(self.cli, &self.budget)), records)?;
        self.text(path, String::from_utf8(bytes).expect("csv is utf-8"))
    }

    fn text(&self, path: Option<&Path>, text: String) -> Result<()> {
        match path {
            Some(p) => Ok(write_atomic(p, text.as_bytes())?),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

fn side(s: SideArg) -> Side {
    match s {
        SideArg::Left => Side::Left,
        SideArg::Right => Side::Right,
    }
}

fn tolerance(t: TolArg) -> Tolerance {
    match t {
        TolArg::Exact => Tolerance::Exact,
        TolArg::Adjacent => Tolerance::Adjacent,
    }
}

fn run(cli: &Cli) -> Result<()> {
    let budget = Budget::from_env()?;
    let out = Out { cli, budget };
    match &cli.command {
        Command::Gen {
            alg,
            kind,
            s,
            n,
            step,
            seed,
            out: path,
        } => {
            let alg = algebra(alg)?;
            let a = match kind {
                GenKind::Random => {
                    let s = *required(s, "s")?;
                    lab::gen_random_dset(&alg, s, *seed, &budget)?
                }
                GenKind::Circle => lab::circle_net(&alg)?,
                GenKind::Ap => lab::ap(&alg, *n, *step)?,
                GenKind::Grid => DSet::full_grid(alg, &budget)?,
            };
            out.set(path, &a)
        }
        Command::Counterexample { which, m, out: paths } => {
            let which = match which {
                WhichArg::One => Which::One,
                WhichArg::Two => Which::Two,
                WhichArg::TwoPrinted => Which::TwoAsPrinted,
            };
            let ce = lab::gen_counterexample(which, *m)?;
            out.pairs(&paths[0], &ce.g)?;
            out.set(&paths[1], &ce.x)
        }
        Command::Cover { input, k } => {
            println!("{}", dset(input)?.covering_number(*k)?);
            Ok(())
        }
        Command::VerifyNc { input, s, c, out: path } => out.json(path.as_deref(), &dset(input)?.is_nonconcentrated(*s, *c)?),
        Command::Uniformize { input, t, out: path } => out.set(path, &dset(input)?.uniform_subset(*t)?),
        Command::Op {
            op,
            a,
            b,
            g,
            side: sd,
            n_sum,
            n_prod,
            x,
            rho_exp,
            map,
            out: path,
        } => {
            let load_a = || dset(required(a, "a")?);
            let load_b = || dset(required(b, "b")?);
            match op {
                OpKind::Sum => out.set(path, &setops::sumset(&load_a()?, &load_b()?, &budget)?),
                OpKind::Diff => out.set(path, &setops::difference_set(&load_a()?, &load_b()?, &budget)?),
                OpKind::Prod => out.set(path, &setops::product_set(&load_a()?, &load_b()?, side(*sd), &budget)?),
                OpKind::Iter => out.set(path, &setops::iterated(&load_a()?, *n_sum, *n_prod, &budget)?),
                OpKind::Quot => {
                    let q = setops::quotient_set(&load_a()?, *rho_exp, side(*sd), false, &budget)?;
                    out.set(path, &q.set)
                }
                OpKind::Proj => {
                    let g = pairset(required(g, "g")?)?;
                    let x = element(g.alg(), required(x, "x")?)?;
                    out.set(path, &setops::project(&x, &g)?)
                }
                OpKind::Linmap => {
                    let g = pairset(required(g, "g")?)?;
                    let entries: Vec<Element> = required(map, "map")?
                        .split(';')
                        .map(|e| element(g.alg(), e))
                        .collect::<Result<_>>()?;
                    let [e11, e12, e21, e22]: [Element; 4] =
                        entries.try_into().map_err(|_| usage("--map needs four entries separated by ';'"))?;
                    let l = LinearMap {
                        entries: [[e11, e12], [e21, e22]],
                    };
                    out.pairs(path, &setops::apply_linear_map(&l, &g)?)
                }
            }
        }
        Command::Escape { input, floor, out: path } => {
            out.json(path.as_deref(), &structure::escape_basis(&dset(input)?, *floor)?)
        }
        Command::Avoid {
            input,
            c,
            strong,
            out: path,
        } => {
            let a = dset(input)?;
            if *strong {
                out.json(path.as_deref(), &structure::strongly_avoids(&a, *c)?)
            } else {
                out.json(path.as_deref(), &structure::avoids_subalgebras(&a, *c)?)
            }
        }
        Command::Energy { a, b } => {
            let a = dset(a)?;
            let b = match b {
                Some(p) => dset(p)?,
                None => a.clone(),
            };
            println!("{}", energy::additive_energy(&a, &b, &budget)?);
            Ok(())
        }
        Command::CountTv {
            a,
            x,
            rho_exp,
            sign,
            tol,
            s,
            sigma,
            t,
            eps,
            out: path,
        } => {
            let exponents = match (*s, *sigma, *t) {
                (Some(s), Some(sigma), Some(t)) => Some(TvExponents { s, sigma, t, eps: *eps }),
                (None, None, None) => None,
                _ => return Err(usage("--s, --sigma and --t go together")),
            };
            let sign = match sign {
                SignArg::Printed => QuintupleSign::AsPrinted,
                SignArg::Symmetric => QuintupleSign::Symmetric,
            };
            let r = energy::quintuple_count_tv(&dset(a)?, &dset(x)?, *rho_exp, sign, tolerance(*tol), exponents, &budget)?;
            out.json(path.as_deref(), &r)
        }
        Command::CountSparse {
            a,
            p,
            q,
            rho_exp,
            tol,
            s,
            out: path,
        } => {
            let a = dset(a)?;
            let (p, q) = (element(a.alg(), p)?, element(a.alg(), q)?);
            let r = energy::quadruple_count_sparse(&a, &p, &q, *rho_exp, tolerance(*tol), *s, &budget)?;
            out.json(path.as_deref(), &r)
        }
        Command::Bsg { h, a, b, out: path } => {
            let h = pairset(h)?;
            let a = a.as_deref().map(dset).transpose()?.unwrap_or_else(|| h.first());
            let b = b.as_deref().map(dset).transpose()?.unwrap_or_else(|| h.second());
            out.json(path.as_deref(), &energy::bsg_extract(&h, &a, &b, &budget)?)
        }
        Command::Ledger { input, y1, y2, out: path } => {
            let sets: Vec<DSet> = input.iter().map(|p| dset(p)).collect::<Result<_>>()?;
            let alg = sets[0].alg().clone();
            let mut rows = energy::theorem_chain(&sets[0], &element(&alg, y1)?, &element(&alg, y2)?, &budget)?;
            if sets.len() == 3 {
                let (a, b, c) = (SetExpr::set(0), SetExpr::set(1), SetExpr::set(2));
                let insts = [
                    Inequality::RuzsaTriangle {
                        a: a.clone(),
                        b: b.clone(),
                        c,
                    },
                    Inequality::Plunnecke { a, b },
                ];
                rows.extend(energy::ruzsa_ledger(&sets, &insts, &budget)?);
            }
            Ok(energy::write_ledger_csv(path, Some(&header(cli, &budget)), &rows)?)
        }
        Command::Expand {
            input,
            s,
            rounds,
            n_sum,
            n_prod,
            c,
            stage,
            seed,
            format,
            out: path,
        } => {
            let a = dset(input)?;
            let mut sch = Schedule::expansion(rational(s)?, a.alg().d() as u32, a.m())?;
            sch.rounds = *rounds;
            sch.n_sum = *n_sum;
            sch.n_prod = *n_prod;
            sch.c = *c;
            sch.stage = *stage;
            sch.seed = *seed;
            let recs = lab::run_expansion(&a, &sch, &budget)?;
            match format {
                Format::Csv => out.records(Some(path), &recs),
                Format::Json => out.json(Some(path), &recs),
            }
        }
        Command::Babyproj { a, x, format, out: path } => {
            let rep = lab::probe_babyproj(&dset(a)?, &dset(x)?, &budget)?;
            match format {
                Format::Csv => out.records(path.as_deref(), &rep.records),
                Format::Json => out.json(path.as_deref(), &rep),
            }
        }
        Command::Fibres {
            g,
            x,
            c1,
            rho_exp,
            out: path,
        } => {
            let rep = lab::fibre_profile(&pairset(g)?, &dset(x)?, *c1, *rho_exp, &budget)?;
            out.json(path.as_deref(), &rep)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dlab: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

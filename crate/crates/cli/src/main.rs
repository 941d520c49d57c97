//! `k3tk`: JSON front end for the k3tk library.
//!
//! Every subcommand prints a single JSON document on stdout. Exit status is
//! 0 on success, 2 for bad input and 1 when a computed object fails its own
//! consistency check.

use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use k3tk::constructions::{farey_sweep, triangle_sweep};
use k3tk::moduli::{
    classify_case, classify_non_locally_free, euler_characteristic, exists_mu_stable, exists_semistable,
    exists_stable_primitive, hilb_index, moduli_dim, mu_stable_boundary_corner,
};
use k3tk::qseries::gottsche_coefficients;
use k3tk::*;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Map, Value};

#[derive(Parser)]
#[command(name = "k3tk", version, about = "Mukai vectors, moduli invariants and partition functions on K3 surfaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Surface {
    /// Lattice file or inline JSON `{"rank": n, "gram": [[...]]}`; defaults to Gram [2].
    #[arg(long)]
    surface: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Mukai pairing <x, y>.
    Pair {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// The dual vector (r, -c1, a).
    Dualize {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        v: String,
    },
    /// Tensor by the line bundle N: `--n '[1]'`.
    Translate {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        n: String,
        #[arg(long)]
        v: String,
    },
    /// Reflection in a (-2)-vector u.
    Reflect {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        u: String,
        #[arg(long)]
        v: String,
    },
    /// Apply an isometry word (rightmost generator first).
    Word {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        word: String,
        #[arg(long)]
        v: String,
    },
    /// Existence, dimension, Euler characteristic and classification data.
    Invariants {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        v: String,
    },
    /// Göttsche coefficients χ(Hilb^n) for n < order.
    Gottsche {
        #[arg(long)]
        order: usize,
        /// One coefficient per line instead of JSON.
        #[arg(long)]
        lines: bool,
    },
    /// Virtual Euler characteristic of a possibly non-primitive vector.
    Chivirtual {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        v: String,
    },
    /// PSU(r) partition function Z_r^α, complete below q^order.
    Zseries {
        #[command(flatten)]
        surface: Surface,
        #[arg(long)]
        rank: i64,
        /// Coset representative α as a JSON integer array; defaults to 0.
        #[arg(long)]
        alpha: Option<String>,
        /// Integer or `p/q`.
        #[arg(long)]
        order: String,
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Truncated Siegel–Narain theta function.
    Theta {
        #[command(flatten)]
        surface: Surface,
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        rank: i64,
        #[arg(long)]
        radius: f64,
    },
    /// U(r) partition function, summed directly or through the theta decomposition.
    Zfull {
        #[command(flatten)]
        surface: Surface,
        #[command(flatten)]
        point: Point,
        #[arg(long)]
        rank: i64,
        #[arg(long)]
        radius: f64,
        /// Omit terms with exponent at or above this (integer or `p/q`).
        #[arg(long)]
        cutoff: String,
        #[arg(long, value_enum, default_value_t = FullMethod::Both)]
        method: FullMethod,
    },
    /// Auxiliary construction for v = l(r + ξ) + aω with (ξ²) = 2s.
    Construct {
        #[arg(long)]
        l: i64,
        #[arg(long)]
        r: i64,
        #[arg(long, allow_negative_numbers = true)]
        s: i64,
        #[arg(long, allow_negative_numbers = true)]
        a: i64,
        #[arg(long, default_value_t = 10_000)]
        bound: i64,
    },
    /// Exhaustive check of a lattice-point lemma.
    Verify {
        #[arg(value_enum)]
        lemma: Lemma,
        #[arg(long)]
        bound: i64,
    },
}

#[derive(Args)]
struct Point {
    /// τ as real and imaginary part.
    #[arg(long, num_args = 2, allow_negative_numbers = true, value_names = ["RE", "IM"])]
    tau: Vec<f64>,
    /// Elliptic variable as interleaved (re, im) pairs; defaults to 0.
    #[arg(long, num_args = 1.., allow_negative_numbers = true)]
    x: Option<Vec<f64>>,
    /// Splitting file or inline JSON `{"pl": [[...]], "pr": [[...]]}`;
    /// defaults to the trivial splitting of a definite lattice.
    #[arg(long)]
    splitting: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Direct,
    Hecke,
    Literal,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FullMethod {
    Direct,
    Factorized,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum Lemma {
    Triangle,
    Farey,
}

#[derive(Deserialize)]
struct SplittingRepr {
    pl: Vec<Vec<f64>>,
    pr: Vec<Vec<f64>>,
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_internal() {
            Failure::Internal(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type Outcome<T> = std::result::Result<T, Failure>;

fn input<E: std::fmt::Display>(context: &str) -> impl FnOnce(E) -> Failure + '_ {
    move |e| Failure::Input(format!("{context}: {e}"))
}

/// Parse inline JSON, or read it from the named file.
fn load<T: DeserializeOwned>(arg: &str, what: &str) -> Outcome<T> {
    let trimmed = arg.trim_start();
    let text = if trimmed.starts_with('{') || trimmed.starts_with('[') {
        arg.to_string()
    } else {
        std::fs::read_to_string(Path::new(arg)).map_err(input(what))?
    };
    serde_json::from_str(&text).map_err(input(what))
}

fn surface(s: &Surface) -> Outcome<EvenLattice> {
    match &s.surface {
        Some(arg) => load(arg, "surface"),
        None => Ok(EvenLattice::rank_one(2)?),
    }
}

fn rational(text: &str, what: &str) -> Outcome<Rational64> {
    let parsed = match text.split_once('/') {
        Some((p, q)) => p
            .trim()
            .parse::<i64>()
            .ok()
            .zip(q.trim().parse::<i64>().ok())
            .filter(|(_, q)| *q != 0)
            .map(|(p, q)| Rational64::new(p, q)),
        None => text.trim().parse::<i64>().ok().map(Rational64::from_integer),
    };
    parsed.ok_or_else(|| Failure::Input(format!("{what}: expected an integer or p/q, got {text:?}")))
}

fn big(n: &BigInt) -> Value {
    Value::Number(n.to_string().parse().expect("integers are valid JSON numbers"))
}

fn exact(q: &BigRational) -> Value {
    json!({"num": big(q.numer()), "den": big(q.denom())})
}

fn small(q: Rational64) -> Value {
    json!({"num": q.numer(), "den": q.denom()})
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("library types serialize")
}

fn alpha(arg: &Option<String>, lattice: &EvenLattice) -> Outcome<Vec<i64>> {
    match arg {
        Some(a) => load(a, "alpha"),
        None => Ok(vec![0; lattice.rank()]),
    }
}

fn tau_and_x(point: &Point, lattice: &EvenLattice) -> Outcome<(Complex64, Vec<Complex64>, Splitting)> {
    let tau = Complex64::new(point.tau[0], point.tau[1]);
    let x = match &point.x {
        None => vec![Complex64::default(); lattice.rank()],
        Some(raw) => {
            if raw.len() != 2 * lattice.rank() {
                return Err(Failure::Input(format!(
                    "x needs {} interleaved floats, got {}",
                    2 * lattice.rank(),
                    raw.len()
                )));
            }
            raw.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
        }
    };
    let split = match &point.splitting {
        Some(arg) => {
            let repr: SplittingRepr = load(arg, "splitting")?;
            Splitting::new(repr.pl, repr.pr, lattice)?
        }
        None => Splitting::definite(lattice)?,
    };
    Ok((tau, x, split))
}

fn theta_json(t: &ThetaValue) -> Value {
    json!({"value": complex(t.value), "points": t.points, "tail_bound": t.tail_bound})
}

fn series_json(s: &QSeries) -> Value {
    let terms: Vec<Value> = s
        .terms()
        .map(|(e, c)| json!({"exponent": small(e), "coeff": exact(c)}))
        .collect();
    json!({"terms": terms, "trunc": s.trunc().map(small)})
}

fn invariants(v: &MukaiVector, lattice: &EvenLattice) -> Outcome<Value> {
    if v.r <= 0 {
        return Err(Failure::Input(format!("rank must be positive, got {}", v.r)));
    }
    let sq = square(v, lattice)?;
    let mut out = Map::new();
    out.insert("v".into(), to_value(v));
    out.insert("square".into(), json!(sq));
    out.insert("primitive".into(), json!(v.is_primitive()));
    out.insert("semistable_exists".into(), json!(exists_semistable(v, lattice)?));
    out.insert("chi_virtual".into(), exact(&chi_virtual(v, lattice)?));
    out.insert("case".into(), to_value(&classify_case(v, lattice)?));
    if !v.is_primitive() {
        out.insert("exists".into(), Value::Null);
        return Ok(Value::Object(out));
    }
    let exists = exists_stable_primitive(v, lattice)?;
    out.insert("exists".into(), json!(exists));
    if exists {
        out.insert("dim".into(), json!(moduli_dim(v, lattice)?));
        out.insert("hilb_index".into(), json!(hilb_index(v, lattice)?));
        out.insert("euler".into(), big(&euler_characteristic(v, lattice)?));
        out.insert("mu_stable_exists".into(), json!(exists_mu_stable(v, lattice)?));
        out.insert("mu_stable_corner".into(), json!(mu_stable_boundary_corner(v, lattice)?));
        out.insert("non_locally_free".into(), to_value(&classify_non_locally_free(v, lattice)?));
    }
    Ok(Value::Object(out))
}

/// Output is either a JSON document or plain text lines.
enum Output {
    Json(Value),
    Text(String),
}

fn run(command: Command) -> Outcome<Output> {
    let out = match command {
        Command::Pair { surface: s, x, y } => {
            let l = surface(&s)?;
            let (x, y): (MukaiVector, MukaiVector) = (load(&x, "x")?, load(&y, "y")?);
            json!({"pairing": mukai_pairing(&x, &y, &l)?})
        }
        Command::Dualize { surface: s, v } => {
            let l = surface(&s)?;
            let v: MukaiVector = load(&v, "v")?;
            l.apply(&v.c1)?;
            to_value(&v.dual())
        }
        Command::Translate { surface: s, n, v } => {
            let l = surface(&s)?;
            let n: Vec<i64> = load(&n, "n")?;
            to_value(&apply_translate(&n, &load(&v, "v")?, &l)?)
        }
        Command::Reflect { surface: s, u, v } => {
            let l = surface(&s)?;
            to_value(&apply_reflect(&load(&u, "u")?, &load(&v, "v")?, &l)?)
        }
        Command::Word { surface: s, word, v } => {
            let l = surface(&s)?;
            let elems: Vec<IsometryElem> = load(&word, "word")?;
            let word = IsometryWord::new(elems, &l)?;
            to_value(&apply_word(&word, &load(&v, "v")?, &l)?)
        }
        Command::Invariants { surface: s, v } => {
            let l = surface(&s)?;
            invariants(&load(&v, "v")?, &l)?
        }
        Command::Gottsche { order, lines } => {
            let coeffs = gottsche_coefficients(order);
            if lines {
                let text: String = coeffs.iter().map(|c| format!("{c}\n")).collect();
                return Ok(Output::Text(text));
            }
            json!({"coeffs": coeffs.iter().map(big).collect::<Vec<_>>()})
        }
        Command::Chivirtual { surface: s, v } => {
            let l = surface(&s)?;
            json!({"chi_virtual": exact(&chi_virtual(&load(&v, "v")?, &l)?)})
        }
        Command::Zseries {
            surface: s,
            rank,
            alpha: a,
            order,
            method,
        } => {
            let l = surface(&s)?;
            let a = alpha(&a, &l)?;
            let order = rational(&order, "order")?;
            match method {
                Method::Direct => series_json(&z_psu_direct(rank, &a, order, &l)?),
                Method::Hecke => series_json(&z_psu_hecke(rank, &a, order, &l)?),
                Method::Literal => {
                    let f = z_psu_hecke_literal(rank, &a, order, &l)?;
                    let terms: Vec<Value> = f
                        .coeffs
                        .iter()
                        .map(|(e, c)| json!({"exponent": small(*e), "coeff": complex(*c)}))
                        .collect();
                    json!({"terms": terms, "trunc": small(f.trunc)})
                }
            }
        }
        Command::Theta {
            surface: s,
            point,
            alpha: a,
            rank,
            radius,
        } => {
            let l = surface(&s)?;
            let a = alpha(&a, &l)?;
            let (tau, x, split) = tau_and_x(&point, &l)?;
            theta_json(&theta_siegel_narain(&l, &a, rank, tau, &split, &x, radius)?)
        }
        Command::Zfull {
            surface: s,
            point,
            rank,
            radius,
            cutoff,
            method,
        } => {
            let l = surface(&s)?;
            let (tau, x, split) = tau_and_x(&point, &l)?;
            let trunc = Truncation {
                exponent_cutoff: rational(&cutoff, "cutoff")?,
                radius,
            };
            let mut out = Map::new();
            if method != FullMethod::Factorized {
                let d = z_full_direct(&l, rank, tau, &split, &x, &trunc)?;
                out.insert("direct".into(), theta_json(&d));
            }
            if method != FullMethod::Direct {
                let f = z_full_factorized(&l, rank, tau, &split, &x, &trunc)?;
                out.insert("factorized".into(), theta_json(&f));
            }
            Value::Object(out)
        }
        Command::Construct { l, r, s, a, bound } => to_value(&build_auxiliary(l, r, s, a, bound)?),
        Command::Verify { lemma, bound } => {
            if bound < 1 {
                return Err(Failure::Input(format!("bound must be positive, got {bound}")));
            }
            let (name, report) = match lemma {
                Lemma::Triangle => ("triangle", triangle_sweep(bound)),
                Lemma::Farey => ("farey", farey_sweep(bound)),
            };
            json!({"lemma": name, "bound": bound, "checked": report.checked, "counterexamples": report.counterexamples})
        }
    };
    Ok(Output::Json(out))
}

fn configure_threads() -> Outcome<()> {
    let Ok(raw) = std::env::var("K3TK_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Failure::Input(format!("K3TK_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Internal(e.to_string()))
}

/// Write to stdout; a closed pipe downstream is not an error.
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|()| out.flush());
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit(&format!("{}\n", json!({"error": e.render().to_string().trim_end()})));
            return ExitCode::from(2);
        }
    };
    match configure_threads().and_then(|()| run(cli.command)) {
        Ok(Output::Json(v)) => {
            emit(&format!("{}\n", serde_json::to_string_pretty(&v).expect("values serialize")));
            ExitCode::SUCCESS
        }
        Ok(Output::Text(t)) => {
            emit(&t);
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            emit(&format!("{}\n", json!({"error": msg})));
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            emit(&format!("{}\n", json!({"error": msg, "internal": true})));
            ExitCode::from(1)
        }
    }
}

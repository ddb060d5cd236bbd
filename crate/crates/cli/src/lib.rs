//! `haplitz` command-line front end.
//!
//! Every subcommand accepts `--config file.json`; keys present in the file
//! override the corresponding flags and unknown keys are rejected. Exit codes:
//! 0 success, 1 configuration error, 2 computation failure (complete or
//! partial).

use clap::{Args, Parser, Subcommand, ValueEnum};
use haplitz::compactness::{radial_sweep, GammaOptions, Quantity, SweepGrid, SweepOptions};
use haplitz::hankelness::{find_feasible_a, huw_decompose, Feasibility, DEFAULT_DEGREE_CAP};
use haplitz::mobius::{run_suite, SuiteConfig};
use haplitz::operators::{hankel_trunc, toeplitz_trunc, write_csv};
use haplitz::scalar::CMat;
use haplitz::symbols::spec::SymbolSpec;
use haplitz::symbols::{random_laurent, Support};
use haplitz::wordalg::{certify, parse_word_sum, Env};
use haplitz::Symbol;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::json;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

pub const THREADS_VAR: &str = "HAPLITZ_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or input file.
    Config(String),
    /// The computation failed or some of its parts did.
    Compute(String),
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Compute(m) => write!(f, "computation failed: {m}"),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

fn compute_err(e: impl std::fmt::Display) -> CliError {
    CliError::Compute(e.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Emit {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "haplitz", version, about = "Block Toeplitz and Hankel operator toolkit")]
pub struct Cli {
    /// JSON file whose keys override the flags of the subcommand.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value = "csv")]
    pub emit: Emit,
    /// Write the main output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fourier coefficients of a symbol, optionally a truncated operator dump.
    Fourier(FourierArgs),
    /// Run the operator identity suite on seeded random symbols.
    Verify(VerifyArgs),
    /// Decide whether H_Phi T_Psi is a block Hankel operator.
    Hankelness(HankelnessArgs),
    /// Compactness diagnostics along radial sweeps.
    Diagnose(DiagnoseArgs),
    /// Rewrite an operator word into normal form and certify it numerically.
    Normalize(NormalizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DumpKind {
    Toeplitz,
    Hankel,
}

#[derive(Debug, Args)]
pub struct FourierArgs {
    pub spec: PathBuf,
    /// Degree range `lo:hi`; defaults to the support, or -8:8 when unbounded.
    #[arg(long, allow_hyphen_values = true)]
    pub range: Option<String>,
    #[arg(long, value_enum)]
    pub dump: Option<DumpKind>,
    /// Truncation length for `--dump`.
    #[arg(long = "N", default_value_t = 16)]
    pub len: usize,
    /// Destination of the matrix dump; stdout after the coefficients if absent.
    #[arg(long)]
    pub dump_out: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FourierFile {
    range: Option<String>,
    dump: Option<DumpKind>,
    #[serde(rename = "N", alias = "len")]
    len: Option<usize>,
    dump_out: Option<PathBuf>,
    emit: Option<Emit>,
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 3)]
    pub deg: i64,
    #[arg(long = "N", default_value_t = 64)]
    pub len: usize,
    #[arg(long, default_value_t = 16)]
    pub margin: usize,
    #[arg(long, default_value_t = 20)]
    pub draws: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Evaluation point `re,im`; repeatable. Defaults to 0, 0.5 and 0.3+0.4i.
    #[arg(long = "point", allow_hyphen_values = true)]
    pub points: Vec<String>,
    /// Comma-separated identity names; all when absent.
    #[arg(long)]
    pub names: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyFile {
    seed: Option<u64>,
    n: Option<usize>,
    deg: Option<i64>,
    #[serde(rename = "N", alias = "len")]
    len: Option<usize>,
    margin: Option<usize>,
    draws: Option<usize>,
    tol: Option<f64>,
    points: Option<Vec<[f64; 2]>>,
    names: Option<Vec<String>>,
    emit: Option<Emit>,
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct HankelnessArgs {
    pub phi: PathBuf,
    pub psi: PathBuf,
    /// Entry bound of the search box; `4^n` when absent.
    #[arg(long)]
    pub d: Option<f64>,
    /// Degree cap for symbols without finite support.
    #[arg(long, default_value_t = DEFAULT_DEGREE_CAP)]
    pub cap: usize,
    /// Write the decomposition as JSON here when the verdict is HANKEL.
    #[arg(long)]
    pub decompose: Option<PathBuf>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HankelnessFile {
    d: Option<f64>,
    cap: Option<usize>,
    decompose: Option<PathBuf>,
    emit: Option<Emit>,
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DiagnoseArgs {
    pub phi: PathBuf,
    pub psi: PathBuf,
    /// Ray angles in radians, comma separated.
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    pub rays: String,
    /// `lo:hi:count` or a comma-separated list.
    #[arg(long, default_value = "0.5:0.99:10")]
    pub radii: String,
    /// Quantities, comma separated.
    #[arg(long, default_value = "c1,c2,gamma1,gamma2")]
    pub which: String,
    /// Expected block size; checked against the symbols.
    #[arg(long)]
    pub n: Option<usize>,
    /// Entry bound of the box; `4^n` when absent.
    #[arg(long)]
    pub d: Option<f64>,
    /// Optimizer starts per infimum.
    #[arg(long, default_value_t = 5)]
    pub starts: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON summary with per-ray trends here.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

/// Number list given either as a JSON array or in flag syntax.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NumList {
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum NameList {
    Text(String),
    List(Vec<String>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct DiagnoseFile {
    rays: Option<NumList>,
    radii: Option<NumList>,
    which: Option<NameList>,
    n: Option<usize>,
    d: Option<f64>,
    starts: Option<usize>,
    seed: Option<u64>,
    summary: Option<PathBuf>,
    emit: Option<Emit>,
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct NormalizeArgs {
    /// Operator word, e.g. `T(f) * H(g~) - 2 H(f*) * T(g)`.
    pub word: String,
    /// Bind a name to a symbol file, `name=path`; repeatable. Unbound names
    /// get seeded random Laurent polynomials.
    #[arg(long = "env")]
    pub env: Vec<String>,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long = "N", default_value_t = 64)]
    pub len: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Degree of the random symbols.
    #[arg(long, default_value_t = 3)]
    pub deg: i64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NormalizeFile {
    word: Option<String>,
    env: Option<std::collections::BTreeMap<String, PathBuf>>,
    n: Option<usize>,
    #[serde(rename = "N", alias = "len")]
    len: Option<usize>,
    seed: Option<u64>,
    deg: Option<i64>,
    tol: Option<f64>,
    emit: Option<Emit>,
    out: Option<PathBuf>,
}

/// Output settings shared by all subcommands after config merging.
struct Output {
    emit: Emit,
    out: Option<PathBuf>,
}

macro_rules! set {
    ($dst:expr, $src:expr) => {
        if let Some(v) = $src {
            $dst = v;
        }
    };
}

fn read_config<C: DeserializeOwned>(path: &Option<PathBuf>) -> CliResult<Option<C>> {
    let Some(path) = path else { return Ok(None) };
    let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map(Some)
        .map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn load_symbol(path: &Path) -> CliResult<Symbol> {
    let spec = SymbolSpec::from_path(path).map_err(config_err)?;
    spec.build::<f64>().map_err(|e| config_err(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, body: &str) -> CliResult<()> {
    std::fs::write(path, body).map_err(|e| compute_err(format!("{}: {e}", path.display())))
}

fn parse_point(s: &str) -> CliResult<[f64; 2]> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| config_err(format!("bad point `{s}`")));
    match parts.as_slice() {
        [re] => Ok([num(re)?, 0.0]),
        [re, im] => Ok([num(re)?, num(im)?]),
        _ => Err(config_err(format!("bad point `{s}`, expected `re,im`"))),
    }
}

fn parse_range(s: &str) -> CliResult<(i64, i64)> {
    let bad = || config_err(format!("bad range `{s}`, expected `lo:hi`"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    let lo: i64 = a.trim().parse().map_err(|_| bad())?;
    let hi: i64 = b.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn matrix_json(m: &CMat<f64>) -> serde_json::Value {
    let rows: Vec<Vec<[f64; 2]>> = (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect();
    json!(rows)
}

/// Rows of interleaved real and imaginary parts.
fn matrix_csv(m: &CMat<f64>, s: &mut String) {
    for i in 0..m.nrows() {
        let cells: Vec<String> = (0..m.ncols())
            .flat_map(|j| [m[(i, j)].re.to_string(), m[(i, j)].im.to_string()])
            .collect();
        let _ = writeln!(s, "{}", cells.join(","));
    }
}

struct Step {
    name: &'static str,
    start: Instant,
}

impl Step {
    fn new(name: &'static str) -> Self {
        log::info!("{name}: start");
        Step {
            name,
            start: Instant::now(),
        }
    }
}

impl Drop for Step {
    fn drop(&mut self) {
        log::info!("{}: {:.3}s", self.name, self.start.elapsed().as_secs_f64());
    }
}

fn fourier(args: FourierArgs, cfg: &Option<PathBuf>, o: &mut Output) -> CliResult<(String, i32)> {
    let FourierArgs {
        spec,
        mut range,
        mut dump,
        mut len,
        mut dump_out,
    } = args;
    if let Some(f) = read_config::<FourierFile>(cfg)? {
        range = f.range.or(range);
        dump = f.dump.or(dump);
        dump_out = f.dump_out.or(dump_out);
        set!(len, f.len);
        set!(o.emit, f.emit);
        o.out = f.out.or(o.out.take());
    }
    let sym = load_symbol(&spec)?;
    let (lo, hi) = match range {
        Some(r) => parse_range(&r)?,
        None => match sym.support() {
            Support::Empty => (0, 0),
            Support::Range { lo, hi } => (lo.unwrap_or(-8).max(-64), hi.unwrap_or(8).min(64)),
        },
    };
    let n = sym.n();
    let coeffs = {
        let _t = Step::new("coefficients");
        sym.coeffs_range(lo, hi)
    };
    let mut s = String::new();
    match o.emit {
        Emit::Csv => {
            s.push_str("k,i,j,re,im\n");
            for (k, m) in (lo..=hi).zip(&coeffs) {
                for i in 0..n {
                    for j in 0..n {
                        let _ = writeln!(s, "{k},{i},{j},{:e},{:e}", m[(i, j)].re, m[(i, j)].im);
                    }
                }
            }
        }
        Emit::Json => {
            let terms: Vec<_> = (lo..=hi)
                .zip(&coeffs)
                .map(|(k, m)| {
                    let re: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].re).collect()).collect();
                    let im: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)].im).collect()).collect();
                    json!({"k": k, "re": re, "im": im})
                })
                .collect();
            s = serde_json::to_string_pretty(&json!({"n": n, "terms": terms})).unwrap_or_default();
            s.push('\n');
        }
    }
    if let Some(kind) = dump {
        if len == 0 {
            return Err(config_err("N must be positive"));
        }
        let _t = Step::new("dump");
        let op = match kind {
            DumpKind::Toeplitz => toeplitz_trunc(&sym, len),
            DumpKind::Hankel => hankel_trunc(&sym, len),
        }
        .map_err(compute_err)?;
        let mut buf = Vec::new();
        write_csv(&op, &mut buf).map_err(compute_err)?;
        let text = String::from_utf8_lossy(&buf).into_owned();
        match dump_out {
            Some(p) => write_file(&p, &text)?,
            None => s.push_str(&text),
        }
    }
    Ok((s, 0))
}

fn verify(args: VerifyArgs, cfg: &Option<PathBuf>, o: &mut Output) -> CliResult<(String, i32)> {
    let mut sc = SuiteConfig {
        n: args.n,
        deg: args.deg,
        len: args.len,
        margin: args.margin,
        draws: args.draws,
        seed: args.seed,
        tol: args.tol,
        ..SuiteConfig::default()
    };
    if !args.points.is_empty() {
        sc.points = args.points.iter().map(|p| parse_point(p)).collect::<CliResult<_>>()?;
    }
    if let Some(names) = &args.names {
        sc.names = names.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect();
    }
    if let Some(f) = read_config::<VerifyFile>(cfg)? {
        set!(sc.seed, f.seed);
        set!(sc.n, f.n);
        set!(sc.deg, f.deg);
        set!(sc.len, f.len);
        set!(sc.margin, f.margin);
        set!(sc.draws, f.draws);
        set!(sc.tol, f.tol);
        set!(sc.points, f.points);
        set!(sc.names, f.names);
        set!(o.emit, f.emit);
        o.out = f.out.or(o.out.take());
    }
    if sc.draws == 0 || sc.points.is_empty() {
        return Err(config_err("need at least one draw and one point"));
    }
    let reports = {
        let _t = Step::new("identity suite");
        run_suite::<f64>(&sc).map_err(|e| match e {
            haplitz::Error::Parameter(_) | haplitz::Error::UnknownIdentity(_) | haplitz::Error::OutsideDisk { .. } => {
                config_err(e)
            }
            e => compute_err(e),
        })?
    };
    let failed = reports.iter().filter(|r| !r.pass).count();
    log::info!("{} checks, {failed} failed", reports.len());
    let s = match o.emit {
        Emit::Csv => {
            let mut s = String::from("name,seed,z_re,z_im,N,window,residual,status\n");
            for r in &reports {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{}..{},{:e},{}",
                    r.name,
                    r.seed,
                    r.z[0],
                    r.z[1],
                    r.len,
                    r.window[0],
                    r.window[1],
                    r.residual,
                    if r.pass { "PASS" } else { "FAIL" }
                );
            }
            s
        }
        Emit::Json => {
            let v = json!({"config": sc, "failed": failed, "reports": reports});
            serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"
        }
    };
    Ok((s, if failed > 0 { 2 } else { 0 }))
}

fn symbol_json(s: &Symbol) -> serde_json::Value {
    match SymbolSpec::from_symbol(s) {
        Ok(spec) => serde_json::to_value(spec).unwrap_or(serde_json::Value::Null),
        Err(e) => json!({"error": e.to_string()}),
    }
}

fn hankelness(args: HankelnessArgs, cfg: &Option<PathBuf>, o: &mut Output) -> CliResult<(String, i32)> {
    let HankelnessArgs {
        phi,
        psi,
        mut d,
        mut cap,
        mut decompose,
    } = args;
    if let Some(f) = read_config::<HankelnessFile>(cfg)? {
        d = f.d.or(d);
        decompose = f.decompose.or(decompose);
        set!(cap, f.cap);
        set!(o.emit, f.emit);
        o.out = f.out.or(o.out.take());
    }
    let (phi, psi) = (load_symbol(&phi)?, load_symbol(&psi)?);
    if phi.n() != psi.n() {
        return Err(config_err(format!("block sizes {} and {} differ", phi.n(), psi.n())));
    }
    let d = d.unwrap_or_else(|| 4f64.powi(phi.n() as i32));
    if !(d > 0.0) || cap == 0 {
        return Err(config_err("box bound and degree cap must be positive"));
    }
    let verdict = {
        let _t = Step::new("feasibility");
        find_feasible_a(&phi, &psi, d, cap).map_err(compute_err)?
    };
    let mut s = String::new();
    let mut code = 0;
    match &verdict {
        Feasibility::Feasible {
            a,
            residual_x,
            residual_y,
            tol,
            truncated_mass,
            note,
        } => {
            match o.emit {
                Emit::Csv => {
                    s.push_str("verdict,HANKEL\n");
                    let _ = writeln!(s, "residual_x,{residual_x:e}");
                    let _ = writeln!(s, "residual_y,{residual_y:e}");
                    let _ = writeln!(s, "tol,{tol:e}");
                    let _ = writeln!(s, "truncated_mass,{truncated_mass:e}");
                    if let Some(n) = note {
                        let _ = writeln!(s, "note,{}", csv_field(n));
                    }
                    s.push_str("A\n");
                    matrix_csv(a.matrix(), &mut s);
                }
                Emit::Json => {
                    let v = json!({
                        "verdict": "HANKEL",
                        "a": matrix_json(a.matrix()),
                        "residual_x": residual_x,
                        "residual_y": residual_y,
                        "tol": tol,
                        "truncated_mass": truncated_mass,
                        "note": note,
                    });
                    s = serde_json::to_string_pretty(&v).unwrap_or_default() + "\n";
                }
            }
            if let Some(path) = decompose {
                let _t = Step::new("decomposition");
                match huw_decompose(&phi, &psi, cap) {
                    Ok(h) => {
                        let v = json!({
                            "l": h.l,
                            "d": matrix_json(&h.d),
                            "d_inv": matrix_json(&h.d_inv),
                            "a": matrix_json(&h.a),
                            "cond": h.cond,
                            "reassembly": h.reassembly,
                            "truncated_mass": h.truncated_mass,
                            "u1": symbol_json(&h.u1),
                            "w1": symbol_json(&h.w1),
                            "u2": symbol_json(&h.u2),
                            "w2": symbol_json(&h.w2),
                        });
                        write_file(&path, &(serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"))?;
                    }
                    Err(e) => {
                        log::error!("decomposition failed: {e}");
                        code = 2;
                    }
                }
            }
        }
        Feasibility::Infeasible {
            margin,
            best,
            best_value,
            truncated_mass,
        } => {
            if decompose.is_some() {
                log::warn!("no decomposition for a NOT-HANKEL verdict");
            }
            match o.emit {
                Emit::Csv => {
                    s.push_str("verdict,NOT-HANKEL\n");
                    let _ = writeln!(s, "margin,{margin:e}");
                    let _ = writeln!(s, "best_value,{best_value:e}");
                    let _ = writeln!(s, "truncated_mass,{truncated_mass:e}");
                    s.push_str("best\n");
                    matrix_csv(best, &mut s);
                }
                Emit::Json => {
                    let v = json!({
                        "verdict": "NOT-HANKEL",
                        "margin": margin,
                        "best": matrix_json(best),
                        "best_value": best_value,
                        "truncated_mass": truncated_mass,
                    });
                    s = serde_json::to_string_pretty(&v).unwrap_or_default() + "\n";
                }
            }
        }
    }
    Ok((s, code))
}

fn num_list(v: NumList, parse: fn(&str) -> haplitz::Result<Vec<f64>>) -> CliResult<Vec<f64>> {
    match v {
        NumList::Text(t) => parse(&t).map_err(config_err),
        NumList::List(l) => Ok(l),
    }
}

fn diagnose(args: DiagnoseArgs, cfg: &Option<PathBuf>, o: &mut Output) -> CliResult<(String, i32)> {
    let mut rays = SweepGrid::parse_rays(&args.rays).map_err(config_err)?;
    let mut radii = SweepGrid::parse_radii(&args.radii).map_err(config_err)?;
    let mut which = Quantity::parse_list(&args.which).map_err(config_err)?;
    let (mut n, mut d, mut starts, mut seed, mut summary) = (args.n, args.d, args.starts, args.seed, args.summary);
    if let Some(f) = read_config::<DiagnoseFile>(cfg)? {
        if let Some(v) = f.rays {
            rays = num_list(v, SweepGrid::parse_rays)?;
        }
        if let Some(v) = f.radii {
            radii = num_list(v, SweepGrid::parse_radii)?;
        }
        if let Some(v) = f.which {
            let text = match v {
                NameList::Text(t) => t,
                NameList::List(l) => l.join(","),
            };
            which = Quantity::parse_list(&text).map_err(config_err)?;
        }
        n = f.n.or(n);
        d = f.d.or(d);
        summary = f.summary.or(summary);
        set!(starts, f.starts);
        set!(seed, f.seed);
        set!(o.emit, f.emit);
        o.out = f.out.or(o.out.take());
    }
    let grid = SweepGrid::new(rays, radii).map_err(config_err)?;
    let (phi, psi) = (load_symbol(&args.phi)?, load_symbol(&args.psi)?);
    if phi.n() != psi.n() {
        return Err(config_err(format!("block sizes {} and {} differ", phi.n(), psi.n())));
    }
    if let Some(n) = n {
        if n != phi.n() {
            return Err(config_err(format!("config expects n={n}, symbols have n={}", phi.n())));
        }
    }
    if matches!(d, Some(d) if !(d > 0.0)) || starts == 0 {
        return Err(config_err("box bound and starts must be positive"));
    }
    let opts = SweepOptions {
        gamma: GammaOptions {
            d,
            starts,
            seed,
            ..GammaOptions::default()
        },
    };
    let report = {
        let _t = Step::new("radial sweep");
        radial_sweep(&phi, &psi, &grid, &which, &opts).map_err(compute_err)?
    };
    let failures = report.failures();
    if failures > 0 {
        log::error!("{failures} grid points failed");
    }
    let summary_v = report.summary_json();
    if let Some(p) = &summary {
        write_file(p, &(serde_json::to_string_pretty(&summary_v).unwrap_or_default() + "\n"))?;
    }
    let s = match o.emit {
        Emit::Csv => report.to_csv(),
        Emit::Json => {
            let v = json!({"rows": report.rows, "summary": summary_v});
            serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"
        }
    };
    Ok((s, if failures > 0 { 2 } else { 0 }))
}

fn normalize(args: NormalizeArgs, cfg: &Option<PathBuf>, o: &mut Output) -> CliResult<(String, i32)> {
    let NormalizeArgs {
        mut word,
        env: env_flags,
        mut n,
        mut len,
        mut seed,
        mut deg,
        mut tol,
    } = args;
    let mut bindings = std::collections::BTreeMap::new();
    for b in &env_flags {
        let (name, path) = b
            .split_once('=')
            .ok_or_else(|| config_err(format!("bad binding `{b}`, expected name=path")))?;
        bindings.insert(name.trim().to_string(), PathBuf::from(path.trim()));
    }
    if let Some(f) = read_config::<NormalizeFile>(cfg)? {
        set!(word, f.word);
        if let Some(e) = f.env {
            bindings = e;
        }
        set!(n, f.n);
        set!(len, f.len);
        set!(seed, f.seed);
        set!(deg, f.deg);
        set!(tol, f.tol);
        set!(o.emit, f.emit);
        o.out = f.out.or(o.out.take());
    }
    if n == 0 || deg < 0 || !(tol > 0.0) {
        return Err(config_err("need n >= 1, deg >= 0 and tol > 0"));
    }
    let ws = parse_word_sum(&word).map_err(config_err)?;
    let mut names = Vec::new();
    for (_, w) in &ws.terms {
        for a in w.atoms() {
            a.expr.names(&mut names);
        }
    }
    names.sort();
    names.dedup();
    let mut env: Env<f64> = Env::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for name in &names {
        let sym = match bindings.get(name) {
            Some(p) => load_symbol(p)?,
            None => random_laurent::<f64, _>(&mut rng, n, deg),
        };
        if sym.n() != n {
            return Err(config_err(format!("symbol `{name}` has block size {}, expected {n}", sym.n())));
        }
        env.insert(name.clone(), sym);
    }
    let (normal, residual) = {
        let _t = Step::new("normalize and certify");
        certify(&ws, &env, n, len).map_err(|e| match e {
            haplitz::Error::InsufficientTruncation { .. } | haplitz::Error::SupportOverflow(_) => config_err(e),
            e => compute_err(e),
        })?
    };
    let pass = residual <= tol;
    let s = match o.emit {
        Emit::Csv => {
            let mut s = String::from("field,value\n");
            let _ = writeln!(s, "input,{}", csv_field(&ws.to_string()));
            let _ = writeln!(s, "normal,{}", csv_field(&normal.to_string()));
            let _ = writeln!(s, "terms,{}", normal.len());
            let _ = writeln!(s, "N,{len}");
            let _ = writeln!(s, "residual,{residual:e}");
            let _ = writeln!(s, "status,{}", if pass { "PASS" } else { "FAIL" });
            s
        }
        Emit::Json => {
            let v = json!({
                "input": ws.to_string(),
                "normal": normal.to_string(),
                "terms": normal.len(),
                "N": len,
                "residual": residual,
                "pass": pass,
            });
            serde_json::to_string_pretty(&v).unwrap_or_default() + "\n"
        }
    };
    Ok((s, if pass { 0 } else { 2 }))
}

fn configure_threads() -> CliResult<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let threads: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| config_err(format!("{THREADS_VAR}={v} is not a positive integer")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(threads).build_global().is_err() {
        log::warn!("thread pool already initialised; {THREADS_VAR} ignored");
    }
    Ok(())
}

/// Parses `args` (program name first), runs the subcommand and writes its
/// main output to `--out` or `stdout`. Returns the exit code.
pub fn run_with<I, S>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp_millis()
        .try_init();
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
        }
    };
    let outcome = configure_threads().and_then(|()| {
        let mut o = Output {
            emit: cli.emit,
            out: cli.out.clone(),
        };
        let cfg = &cli.config;
        let (text, code) = match cli.command {
            Command::Fourier(a) => fourier(a, cfg, &mut o),
            Command::Verify(a) => verify(a, cfg, &mut o),
            Command::Hankelness(a) => hankelness(a, cfg, &mut o),
            Command::Diagnose(a) => diagnose(a, cfg, &mut o),
            Command::Normalize(a) => normalize(a, cfg, &mut o),
        }?;
        match &o.out {
            Some(p) => write_file(p, &text)?,
            None => stdout.write_all(text.as_bytes()).map_err(compute_err)?,
        }
        Ok(code)
    });
    match outcome {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            eprintln!("haplitz: {e}");
            e.code()
        }
    }
}

pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    run_with(args, &mut std::io::stdout().lock())
}

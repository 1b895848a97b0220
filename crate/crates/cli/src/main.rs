mod json;

use std::f64::consts::PI;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hecke_core::atlas::{find_tau_zero, render_svg, sample_lambda, trace_degenerate_curve, ZeroSearch};
use hecke_core::classify::{classify_batch, rectangle_obstruction, ClassificationReport};
use hecke_core::hecke::{premodular_zmk, premodular_zn000};
use hecke_core::ode::verify_unitary;
use hecke_core::spectral::{classify_point, monodromy_data, solve_t_from_rs};
use hecke_core::{hecke_z, Complex64 as C, Config, Error, KIndex, LatticeContext};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "hecke", version, about = "Hecke forms, Lamé monodromy and torus classification")]
struct Cli {
    /// Tolerance file with `key = value` lines.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Weierstrass functions.
    Ell {
        #[command(subcommand)]
        op: EllOp,
    },
    /// The Hecke form Z and its premodular relatives.
    Hecke {
        #[command(subcommand)]
        op: HeckeOp,
    },
    /// Zeros of Z over Δ₀ and the degenerate curves.
    Atlas {
        #[command(subcommand)]
        op: AtlasOp,
    },
    /// Spectral parameter from monodromy data.
    Spectral {
        #[command(subcommand)]
        op: SpectralOp,
    },
    /// ODE monodromy of the constrained equation.
    Monodromy {
        #[command(subcommand)]
        op: MonodromyOp,
    },
    /// Even and non-even families for a torus.
    Classify(ClassifyArgs),
    /// Rectangle conditions on m = (m₀,m₁,m₂,m₃).
    Obstruction {
        #[arg(long, value_parser = parse_m, allow_hyphen_values = true)]
        m: [u32; 4],
    },
}

#[derive(Subcommand)]
enum EllOp {
    Eval {
        #[arg(long, value_parser = parse_c, allow_hyphen_values = true)]
        tau: C,
        #[arg(long, value_parser = parse_c, allow_hyphen_values = true)]
        z: C,
        #[arg(long = "fn", value_enum)]
        func: EllFn,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum EllFn {
    Wp,
    Wpp,
    Zeta,
    Sigma,
}

#[derive(Subcommand)]
enum HeckeOp {
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, value_parser = parse_c, allow_hyphen_values = true)]
        tau: C,
        /// `k` for Z^(m_k), or `n000 N` for Z^(N,0,0,0).
        #[arg(long, num_args = 1..=2, value_names = ["K|n000", "N"])]
        premodular: Option<Vec<String>>,
    },
    Zero {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, value_enum, default_value = "f0")]
        domain: Domain,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Domain {
    F0,
}

#[derive(Subcommand)]
enum AtlasOp {
    Sample {
        #[arg(long)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    Curve {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
        i: u8,
        #[arg(long, default_value_t = 40)]
        samples: usize,
    },
}

#[derive(Subcommand)]
enum SpectralOp {
    Solve {
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long, allow_hyphen_values = true)]
        s: f64,
        #[arg(long, value_parser = parse_c, allow_hyphen_values = true)]
        tau: C,
        #[arg(long, value_parser = parse_k)]
        k: KIndex,
    },
}

#[derive(Subcommand)]
enum MonodromyOp {
    Verify {
        #[arg(long = "T", value_parser = parse_c, allow_hyphen_values = true)]
        t: C,
        #[arg(long, value_parser = parse_c, allow_hyphen_values = true)]
        tau: C,
        #[arg(long, value_parser = parse_k)]
        k: KIndex,
    },
}

#[derive(Args)]
struct ClassifyArgs {
    #[arg(long, value_parser = parse_c, allow_hyphen_values = true, required_unless_present = "batch")]
    tau: Option<C>,
    #[arg(long, value_parser = parse_k, required_unless_present = "batch")]
    k: Option<KIndex>,
    /// One `RE,IM,K` per line; `#` starts a comment.
    #[arg(long, conflicts_with_all = ["tau", "k"])]
    batch: Option<PathBuf>,
}

fn parse_c(text: &str) -> Result<C, String> {
    let (a, b) = text.split_once(',').ok_or("expected RE,IM")?;
    let re = a.trim().parse::<f64>().map_err(|e| format!("real part: {e}"))?;
    let im = b.trim().parse::<f64>().map_err(|e| format!("imaginary part: {e}"))?;
    Ok(C::new(re, im))
}

fn parse_k(text: &str) -> Result<KIndex, String> {
    let k: u8 = text.trim().parse().map_err(|_| format!("k must be 1, 2 or 3, got `{text}`"))?;
    KIndex::new(k).map_err(|e| e.to_string())
}

fn parse_m(text: &str) -> Result<[u32; 4], String> {
    let parts = text
        .split(',')
        .map(|p| p.trim().parse::<u32>().map_err(|_| format!("`{p}` is not a nonnegative integer")))
        .collect::<Result<Vec<_>, _>>()?;
    parts.try_into().map_err(|v: Vec<u32>| format!("expected four entries, got {}", v.len()))
}

/// Result of a subcommand: JSON for stdout and whether the answer was left open.
struct Reply {
    body: Value,
    inconclusive: bool,
}

impl From<Value> for Reply {
    fn from(body: Value) -> Self {
        Reply { body, inconclusive: false }
    }
}

type Outcome = Result<Reply, Box<dyn std::error::Error>>;

fn ell(cfg: Config, tau: C, z: C, func: EllFn) -> Outcome {
    let ctx = LatticeContext::with_config(tau, cfg)?;
    let (name, value) = match func {
        EllFn::Wp => ("wp", ctx.wp(z)?),
        EllFn::Wpp => ("wp_prime", ctx.wp_prime(z)?),
        EllFn::Zeta => ("zeta", ctx.zeta_w(z)?),
        EllFn::Sigma => ("sigma", ctx.sigma_w(z)),
    };
    Ok(json!({ "tau": json::cx(tau), "z": json::cx(z), "function": name, "value": json::cx(value) }).into())
}

fn hecke_eval(cfg: Config, r: f64, s: f64, tau: C, premodular: Option<Vec<String>>) -> Outcome {
    let (rc, sc) = (C::new(r, 0.0), C::new(s, 0.0));
    let z = hecke_z(rc, sc, tau)?;
    let mut body = json!({ "r": r, "s": s, "tau": json::cx(tau), "Z": json::cx(z) });
    if let Some(args) = premodular {
        let ctx = LatticeContext::with_config(tau, cfg)?;
        let (label, value) = match args.as_slice() {
            [kind, n] if kind == "n000" => {
                let n: u8 = n.parse().map_err(|_| format!("N must be 1, 2 or 3, got `{n}`"))?;
                (format!("n000:{n}"), premodular_zn000(&ctx, rc, sc, n)?)
            }
            [k] => {
                let k = parse_k(k)?;
                (format!("m{}", k.get()), premodular_zmk(&ctx, rc, sc, k)?)
            }
            _ => return Err("--premodular takes `K` or `n000 N`".into()),
        };
        body["premodular"] = json!({ "kind": label, "value": json::cx(value) });
    }
    Ok(body.into())
}

fn hecke_zero(cfg: Config, r: f64, s: f64) -> Outcome {
    let search = find_tau_zero(r, s, &cfg)?;
    let mut body = json::zero_search(&search);
    body["r"] = json!(r);
    body["s"] = json!(s);
    body["domain"] = json!("F0");
    Ok(Reply { body, inconclusive: matches!(search, ZeroSearch::Inconclusive { .. }) })
}

fn atlas_sample(cfg: Config, grid: usize, out: PathBuf, svg: Option<PathBuf>) -> Outcome {
    let rows = sample_lambda(grid, &cfg);
    let mut csv = String::from("r,s,tau_re,tau_im,residual\n");
    for row in &rows {
        csv.push_str(&format!("{},{},{},{},{:e}\n", row.r, row.s, row.tau.re, row.tau.im, row.residual));
    }
    fs::write(&out, csv)?;
    if let Some(path) = &svg {
        let curves = (1..=3).map(|i| trace_degenerate_curve(i, 60)).collect::<Result<Vec<_>, Error>>()?;
        let y_max = rows.iter().map(|r| r.tau.im).fold(1.2f64, f64::max).min(4.0);
        fs::write(path, render_svg(&rows, &curves, y_max))?;
    }
    Ok(json!({ "rows": rows.len(), "csv": out, "svg": svg }).into())
}

fn atlas_curve(i: u8, samples: usize) -> Outcome {
    let curve = trace_degenerate_curve(i as usize, samples)?;
    let points: Vec<Value> = curve.points.iter().map(|&p| json::cx(p)).collect();
    Ok(json!({ "i": curve.i, "points": points, "excluded_scan_lines": curve.excluded }).into())
}

fn spectral_solve(cfg: Config, r: f64, s: f64, tau: C, k: KIndex) -> Outcome {
    let ctx = LatticeContext::with_config(tau, cfg)?;
    let (rc, sc) = (C::new(r, 0.0), C::new(s, 0.0));
    let (rk, sk) = k.shift(r, s);
    let shifted = hecke_z(C::new(rk, 0.0), C::new(sk, 0.0), tau)?;
    let base = json!({ "r": r, "s": s, "tau": json::cx(tau), "k": k.get(), "shifted_Z": json::cx(shifted) });
    let Some(sol) = solve_t_from_rs(&ctx, k, rc, sc, cfg.zero_tol.max(1e-8))? else {
        let mut body = base;
        body["solvable"] = json!(false);
        return Ok(body.into());
    };
    let data = monodromy_data(&ctx, k, sol.point)?;
    let class = classify_point(&ctx, k, sol.point)?;
    let mut body = base;
    body["solvable"] = json!(true);
    body["T"] = json::cx(sol.point.t);
    body["C"] = json::cx(sol.point.c);
    body["residual"] = json!(sol.residual);
    body["premodular"] = json::cx(premodular_zmk(&ctx, rc, sc, k)?);
    body["monodromy_data"] = json::monodromy_data(&data);
    body["class"] = json::class(&class);
    Ok(body.into())
}

fn monodromy_verify(cfg: Config, t: C, tau: C, k: KIndex) -> Outcome {
    let ctx = LatticeContext::with_config(tau, cfg)?;
    let rep = verify_unitary(&ctx, k, t)?;
    let mut body = json!({
        "T": json::cx(t),
        "tau": json::cx(tau),
        "k": k.get(),
        "class": json::class(&rep.class),
        "unitary": rep.unitary,
    });
    if let Some(m) = &rep.monodromy {
        body["monodromy"] = json::cycles(m);
        if let hecke_core::spectral::MonodromyClass::CompletelyReducible { r, s } = rep.class {
            body["expected_trace1"] = json::cx((s * 2.0 * PI).cos() * 2.0);
            body["expected_trace2"] = json::cx((r * 2.0 * PI).cos() * 2.0);
        }
    }
    Ok(body.into())
}

fn read_batch(path: &PathBuf) -> Result<Vec<(C, KIndex)>, Box<dyn std::error::Error>> {
    let text = fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (tau, k) = line.rsplit_once(',').ok_or_else(|| format!("line {}: expected RE,IM,K", no + 1))?;
        out.push((parse_c(tau).map_err(|e| format!("line {}: {e}", no + 1))?, parse_k(k).map_err(|e| format!("line {}: {e}", no + 1))?));
    }
    Ok(out)
}

fn classify(cfg: Config, args: ClassifyArgs) -> Outcome {
    let inputs = match (&args.batch, args.tau, args.k) {
        (Some(path), _, _) => read_batch(path)?,
        (None, Some(tau), Some(k)) => vec![(tau, k)],
        _ => return Err("--tau and --k are required without --batch".into()),
    };
    let reports = classify_batch(&inputs, &cfg)
        .into_iter()
        .collect::<Result<Vec<ClassificationReport>, Error>>()?;
    let inconclusive = reports.iter().any(|r| r.inconclusive());
    let mut values: Vec<Value> = reports.iter().map(json::report).collect();
    let body = if args.batch.is_some() { Value::Array(values) } else { values.remove(0) };
    Ok(Reply { body, inconclusive })
}

fn run(cli: Cli) -> Outcome {
    let cfg = match &cli.config {
        Some(path) => Config::parse(&fs::read_to_string(path)?)?,
        None => Config::default(),
    };
    match cli.command {
        Command::Ell { op: EllOp::Eval { tau, z, func } } => ell(cfg, tau, z, func),
        Command::Hecke { op: HeckeOp::Eval { r, s, tau, premodular } } => hecke_eval(cfg, r, s, tau, premodular),
        Command::Hecke { op: HeckeOp::Zero { r, s, domain: Domain::F0 } } => hecke_zero(cfg, r, s),
        Command::Atlas { op: AtlasOp::Sample { grid, out, svg } } => atlas_sample(cfg, grid, out, svg),
        Command::Atlas { op: AtlasOp::Curve { i, samples } } => atlas_curve(i, samples),
        Command::Spectral { op: SpectralOp::Solve { r, s, tau, k } } => spectral_solve(cfg, r, s, tau, k),
        Command::Monodromy { op: MonodromyOp::Verify { t, tau, k } } => monodromy_verify(cfg, t, tau, k),
        Command::Classify(args) => classify(cfg, args),
        Command::Obstruction { m } => Ok(json::obstruction(&rectangle_obstruction(m)).into()),
    }
}

fn main() -> ExitCode {
    // Usage errors exit with 1; clap would use 2, which is reserved for inconclusive answers.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(reply) => {
            println!("{}", serde_json::to_string_pretty(&reply.body).expect("JSON values serialize"));
            if reply.inconclusive {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.to_string() }));
            ExitCode::from(1)
        }
    }
}

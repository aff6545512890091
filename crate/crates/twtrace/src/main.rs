//! `twtrace`: twisted traces of singular moduli, their generating Jacobi forms and the
//! checks around them, as JSON (or CSV) on stdout.

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::io::Write;
use std::process::ExitCode;
use twisted_traces::arith::Discriminant;
use twisted_traces::ball::Ctx;
use twisted_traces::cmeval::{
    eval_modfunc, format_polynomial, minimal_polynomial, parse_modfunc, ModFuncExpr,
};
use twisted_traces::jacobi::{
    cross_check, gen_a, gen_b, generating_form, hecke_rows, jacobi_scale, solve_principal_part,
    zagier_g, Solution,
};
use twisted_traces::qforms::{cm_point, heegner_classes, positive_heegner_classes, QuadForm};
use twisted_traces::traces::{
    assemble_lift, cusp_expansions, integer_principal_part, positive_indices, trace, Normalization,
    TwistData,
};
use twisted_traces::weilrep::verify_intertwining;
use twisted_traces::Error;

const WEILREP_TOLERANCE: f64 = 1e-20;

#[derive(Parser)]
#[command(
    name = "twtrace",
    version,
    about = "Twisted traces of CM values on Γ0(N)"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Γ0(N)-classes of Heegner forms of discriminant D with b ≡ beta (mod 2N).
    Classes {
        #[arg(long)]
        level: u64,
        #[arg(long, allow_hyphen_values = true)]
        disc: i64,
        #[arg(long)]
        beta: i64,
    },
    /// Twisted traces t(h, m), one index or all positive indices up to --m-max.
    Trace(TraceArgs),
    /// Runs a named check suite; exits 1 if it fails.
    Verify {
        #[command(subcommand)]
        suite: Suite,
    },
    /// Certified values of a modular function at CM points.
    Eval(EvalArgs),
    /// Weak Jacobi forms.
    Jacobi {
        #[command(subcommand)]
        cmd: JacobiCmd,
    },
}

#[derive(Args)]
struct Twist {
    #[arg(long)]
    level: u64,
    #[arg(long, allow_hyphen_values = true)]
    delta: i64,
    #[arg(long)]
    r: i64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Norm {
    #[value(name = "sqrtDelta")]
    SqrtDelta,
    Raw,
}

#[derive(Args)]
struct TraceArgs {
    /// Modular function, e.g. "J(11z)" or "j(z) + 2*J(3z)".
    #[arg(long, default_value = "J(11z)")]
    f: String,
    #[command(flatten)]
    twist: Twist,
    #[arg(long)]
    h: Option<i64>,
    /// Index as a rational, e.g. 8/44.
    #[arg(long, allow_hyphen_values = true)]
    m: Option<String>,
    #[arg(long)]
    all: bool,
    #[arg(long, default_value = "1")]
    m_max: String,
    #[arg(long, env = "TT_BITS", default_value_t = 64)]
    bits: u32,
    #[arg(long, value_enum, default_value = "sqrtDelta")]
    normalization: Norm,
    #[arg(long)]
    csv: bool,
}

#[derive(Subcommand)]
enum Suite {
    /// Intertwining of the Weil representations through Ψ.
    Weilrep {
        #[command(flatten)]
        twist: Twist,
        #[arg(long, env = "TT_BITS", default_value_t = 128)]
        bits: usize,
    },
    /// Twisted Hecke relation at level one.
    Hecke {
        #[arg(long)]
        delta: i64,
        #[arg(long)]
        m: i64,
        #[arg(long, default_value_t = 20)]
        dmax: i64,
        #[arg(long, env = "TT_BITS", default_value_t = 64)]
        bits: u32,
    },
    /// Coefficients of the generating Jacobi form against directly computed traces.
    JacobiCross {
        #[arg(long, default_value = "J(11z)")]
        f: String,
        #[command(flatten)]
        twist: Twist,
        #[arg(long, default_value_t = 1)]
        qmax: i64,
        #[arg(long, env = "TT_BITS", default_value_t = 64)]
        bits: u32,
    },
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    f: String,
    /// A positive definite form a,b,c.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with_all = ["level", "disc", "beta"])]
    form: Option<Vec<i64>>,
    #[arg(long, requires_all = ["disc", "beta"])]
    level: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    disc: Option<i64>,
    #[arg(long)]
    beta: Option<i64>,
    #[arg(long, env = "TT_BITS", default_value_t = 64)]
    bits: u32,
}

#[derive(Subcommand)]
enum JacobiCmd {
    /// The generators a and b.
    Generators {
        #[arg(long, default_value_t = 3)]
        order: i64,
    },
    /// Form of weight/index with prescribed singular coefficients D=c.
    Solve {
        #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
        weight: i64,
        #[arg(long)]
        index: i64,
        /// Singular coefficient, e.g. -5=1; repeatable.
        #[arg(long = "target", allow_hyphen_values = true)]
        targets: Vec<String>,
        #[arg(long, default_value_t = 2)]
        order: i64,
    },
    /// Coefficients of the weight 3/2 plus-space form g_D.
    Zagier {
        #[arg(long)]
        disc: i64,
        #[arg(long, default_value_t = 20)]
        dmax: i64,
    },
    /// −½ times the generating form of the twisted traces of f.
    Lift {
        #[arg(long, default_value = "J(11z)")]
        f: String,
        #[arg(long)]
        level: u64,
        #[arg(long)]
        delta: i64,
        #[arg(long, default_value_t = 2)]
        order: i64,
    },
}

enum Failure {
    Lib(Error),
    Usage(String),
    Check(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

type Out = Result<Value, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    s.trim()
        .parse::<BigRational>()
        .map_err(|_| usage(format!("not a rational number: {s}")))
}

fn function(s: &str) -> Result<ModFuncExpr, Failure> {
    Ok(parse_modfunc(s)?)
}

fn twist(t: &Twist) -> Result<TwistData, Failure> {
    Ok(TwistData::new(t.level, Discriminant::new(t.delta)?, t.r)?)
}

#[derive(Serialize)]
struct TraceRow {
    h: i64,
    m: String,
    value: String,
    error_bound: String,
}

fn cmd_trace(a: &TraceArgs) -> Result<(Value, Option<String>), Failure> {
    let f = function(&a.f)?;
    let data = twist(&a.twist)?;
    let norm = match a.normalization {
        Norm::SqrtDelta => Normalization::SqrtDelta,
        Norm::Raw => Normalization::Raw,
    };
    let indices = match (a.all, a.h, &a.m) {
        (true, None, None) => positive_indices(&data, &parse_rational(&a.m_max)?),
        (false, Some(h), Some(m)) => {
            let m = parse_rational(m)?;
            if !data.in_support(h, &m) {
                return Err(usage(format!("index {m} is not on the support of h = {h}")));
            }
            vec![(h, m)]
        }
        _ => return Err(usage("give either --h and --m, or --all")),
    };
    let mut rows = Vec::new();
    for (h, m) in indices {
        let t = trace(&f, &data, h, &m, a.bits)?;
        rows.push(TraceRow {
            h,
            m: m.to_string(),
            value: t.render(norm),
            error_bound: format!("{:e}", t.error_bound),
        });
    }
    let csv = a.csv.then(|| {
        let mut s = String::from("h,m,value\n");
        for r in &rows {
            s.push_str(&format!("{},{},{}\n", r.h, r.m, r.value));
        }
        s
    });
    let v = json!({
        "f": f.to_string(),
        "level": data.level,
        "delta": data.delta.value(),
        "r": data.r,
        "normalization": match norm { Normalization::SqrtDelta => "sqrtDelta", Normalization::Raw => "raw" },
        "coefficients": rows,
    });
    Ok((v, csv))
}

fn check(report: Value, pass: bool) -> Out {
    if pass {
        Ok(report)
    } else {
        Err(Failure::Check(report))
    }
}

fn cmd_verify(s: &Suite) -> Out {
    match s {
        Suite::Weilrep { twist: t, bits } => {
            let delta = Discriminant::new(t.delta)?;
            let rep = verify_intertwining(t.level, delta, t.r, *bits)?;
            let pass = rep.max() < WEILREP_TOLERANCE;
            check(
                json!({
                    "suite": "weilrep", "level": t.level, "delta": t.delta, "r": t.r, "bits": bits,
                    "residual_t": format!("{:e}", rep.residual_t),
                    "residual_s": format!("{:e}", rep.residual_s),
                    "tolerance": format!("{WEILREP_TOLERANCE:e}"),
                    "pass": pass,
                }),
                pass,
            )
        }
        Suite::Hecke {
            delta,
            m,
            dmax,
            bits,
        } => {
            let rows = hecke_rows(Discriminant::fundamental(*delta)?, *m, *dmax, *bits)?;
            let pass = rows.iter().all(|r| r.plus_space_holds);
            check(
                json!({ "suite": "hecke", "delta": delta, "m": m, "dmax": dmax, "rows": rows, "pass": pass }),
                pass,
            )
        }
        Suite::JacobiCross {
            f,
            twist: t,
            qmax,
            bits,
        } => {
            let data = twist(t)?;
            let expr = function(f)?;
            let half = lift_form(&expr, &data, qmax + 1)?;
            let phi = jacobi_scale(&half.form, &BigRational::from_integer(BigInt::from(-2)));
            let lift = assemble_lift(
                &expr,
                &data,
                &BigRational::from_integer(BigInt::from(*qmax)),
                *bits,
            )?;
            let checks = cross_check(&phi, &lift)?;
            let pass =
                !checks.is_empty() && checks.iter().all(|c| c.agree) && lift.is_holomorphic();
            check(
                json!({
                    "suite": "jacobi-cross", "f": expr.to_string(), "level": t.level, "delta": t.delta, "r": t.r,
                    "qmax": qmax, "holomorphic": lift.is_holomorphic(), "checks": checks, "pass": pass,
                }),
                pass,
            )
        }
    }
}

fn lift_form(f: &ModFuncExpr, data: &TwistData, order: i64) -> Result<Solution, Failure> {
    let exps = cusp_expansions(f, data.level)?;
    let principal = integer_principal_part(&exps[0])?;
    Ok(generating_form(&principal, data.level, data.delta, order)?)
}

fn cmd_eval(a: &EvalArgs) -> Out {
    let f = function(&a.f)?;
    let forms: Vec<QuadForm> = match (&a.form, a.level, a.disc, a.beta) {
        (Some(v), None, None, None) => {
            let [x, y, z] = v[..] else {
                return Err(usage("--form takes three integers a,b,c"));
            };
            vec![QuadForm::new(x, y, z)]
        }
        (None, Some(n), Some(d), Some(b)) => {
            if !f.has_level(n) {
                return Err(usage(format!("{f} is not of level {n}")));
            }
            positive_heegner_classes(n, d, b)?
                .into_iter()
                .map(|c| c.form)
                .collect()
        }
        _ => return Err(usage("give either --form or --level, --disc and --beta")),
    };
    let mut values = Vec::new();
    let mut points = Vec::new();
    for q in &forms {
        let tau = cm_point(q)?;
        let v = eval_modfunc(&f, &tau, a.bits)?;
        let ctx = Ctx::new(a.bits as usize + 64);
        points.push(json!({
            "form": [q.a, q.b, q.c],
            "tau": tau.to_string(),
            "re": ctx.format(v.re.mid()),
            "im": ctx.format(v.im.mid()),
            "error_bound": format!("{:e}", v.error_bound()),
        }));
        values.push(v);
    }
    let mut out = json!({ "f": f.to_string(), "bits": a.bits, "points": points });
    if a.form.is_none() {
        let prec = values
            .iter()
            .map(|v| v.re.mag().log2().max(0.0) as usize)
            .sum::<usize>()
            + a.bits as usize
            + 64;
        let ctx = Ctx::new(prec);
        let poly = minimal_polynomial(&values, &ctx)?;
        out["minimal_polynomial"] = json!(format_polynomial(&poly));
        out["coefficients"] = json!(poly.iter().map(|c| c.to_string()).collect::<Vec<_>>());
    }
    Ok(out)
}

fn solution_json(s: &Solution) -> Value {
    json!({
        "form": s.form,
        "pole_order": s.pole_order,
        "unknowns": s.unknowns,
        "constraints": s.constraints,
        "rank": s.rank,
        "kernel_dim": s.kernel_dim,
    })
}

fn cmd_jacobi(c: &JacobiCmd) -> Out {
    match c {
        JacobiCmd::Generators { order } => {
            if *order < 1 {
                return Err(usage("order must be at least 1"));
            }
            Ok(json!({ "a": gen_a(*order), "b": gen_b(*order) }))
        }
        JacobiCmd::Solve {
            weight,
            index,
            targets,
            order,
        } => {
            let mut map = BTreeMap::new();
            for t in targets {
                let (d, c) = t
                    .split_once('=')
                    .ok_or_else(|| usage(format!("target {t} is not D=c")))?;
                let d: i64 = d
                    .trim()
                    .parse()
                    .map_err(|_| usage(format!("bad discriminant in {t}")))?;
                map.insert(d, parse_rational(c)?);
            }
            Ok(solution_json(&solve_principal_part(
                *weight, *index, &map, *order,
            )?))
        }
        JacobiCmd::Zagier { disc, dmax } => {
            let g = zagier_g(*disc, *dmax)?;
            let rows: Vec<Value> = g
                .iter()
                .map(|(d, c)| json!({ "d": d, "c": c.to_string() }))
                .collect();
            Ok(json!({ "disc": disc, "dmax": dmax, "coefficients": rows }))
        }
        JacobiCmd::Lift {
            f,
            level,
            delta,
            order,
        } => {
            let expr = function(f)?;
            let d = Discriminant::new(*delta)?;
            let exps = cusp_expansions(&expr, *level)?;
            let principal = integer_principal_part(&exps[0])?;
            Ok(solution_json(&generating_form(
                &principal, *level, d, *order,
            )?))
        }
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn write_out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn emit(v: &Value) {
    write_out(&(serde_json::to_string_pretty(v).expect("serializable") + "\n"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Classes { level, disc, beta } => heegner_classes(*level, *disc, *beta)
            .map_err(Failure::from)
            .and_then(|c| serde_json::to_value(c).map_err(|e| usage(e.to_string()))),
        Command::Trace(a) => match cmd_trace(a) {
            Ok((_, Some(csv))) => {
                write_out(&csv);
                return ExitCode::SUCCESS;
            }
            Ok((v, None)) => Ok(v),
            Err(e) => Err(e),
        },
        Command::Verify { suite } => cmd_verify(suite),
        Command::Eval(a) => cmd_eval(a),
        Command::Jacobi { cmd } => cmd_jacobi(cmd),
    };
    match result {
        Ok(v) => {
            emit(&v);
            ExitCode::SUCCESS
        }
        Err(Failure::Check(v)) => {
            emit(&v);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::InvalidInput(_) | Error::Parse { .. } => 2,
                Error::Precision { .. } => 3,
                _ => 1,
            })
        }
    }
}

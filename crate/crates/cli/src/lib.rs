//! `signrev` command-line driver.
//!
//! Exit codes: 0 when every check passed (or output was produced), 1 when an
//! identity or audit check failed, 2 for usage and parameter errors.

use std::io::{BufRead, Write};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use signrev_core::arith::{parse_rational, IndexVector, Rational};
use signrev_core::configspace::{self, ConfigurationJson};
use signrev_core::identity::{
    check_reduction_eq2_to_eq1, check_reduction_eq3_to_eq2, lhs_eq3_expr, rhs_eq3_expr, verify_random_sides,
    verify_symbolic_sides, IdentityInstance, Modes, ParamMode, RandomSettings, SideExpr, VerifyReport, XyMode,
};
use signrev_core::involution::{audit, fixed_point_report, verify_enumerative, AuditReport};
use signrev_core::{ConfigParams, Configuration, EnumOptions, Exec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "signrev", version, about = "Exact checks of a multinomial binomial-sum identity")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check the identity symbolically, at random points, or by enumeration.
    Verify(Opts),
    /// Stream configurations, or validate configurations read with --input.
    Enumerate(Opts),
    /// Count configurations from the closed form.
    Count(Opts),
    /// Run the full involution audit.
    Audit(Opts),
    /// Enumerate fixed points and compare their weight sum with the right side.
    FixedPoints(Opts),
    /// Check the specialization chain for a scalar n.
    Reduce(Opts),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Symbolic,
    Random,
    Enumerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Jsonl,
}

#[derive(Debug, Args)]
pub struct Opts {
    /// Comma-separated nonnegative integers; m is its length.
    #[arg(long, value_parser = parse_n)]
    pub n: Option<IndexVector>,
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<i64>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<i64>,
    /// Keep alpha and beta symbolic.
    #[arg(long)]
    pub symbolic_ab: bool,
    /// Keep x and y symbolic (the default).
    #[arg(long, conflicts_with_all = ["x", "y"])]
    pub symbolic_xy: bool,
    /// Comma-separated rationals `p` or `p/q`.
    #[arg(long, value_parser = parse_rationals, requires = "y", allow_hyphen_values = true)]
    pub x: Option<Rationals>,
    #[arg(long, value_parser = parse_rationals, requires = "x", allow_hyphen_values = true)]
    pub y: Option<Rationals>,
    /// Restrict to one k vector.
    #[arg(long, value_parser = parse_n)]
    pub k: Option<IndexVector>,
    #[arg(long, value_enum, default_value = "symbolic")]
    pub mode: Mode,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub range: u64,
    #[arg(long, default_value_t = configspace::DEFAULT_CAP)]
    pub max_configs: u64,
    /// Output format; defaults to jsonl for enumerate, text for count, json
    /// otherwise.
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Accept alpha = 0 for the combinatorial subcommands.
    #[arg(long)]
    pub allow_zero_alpha: bool,
    /// Run without worker threads.
    #[arg(long)]
    pub sequential: bool,
    /// Drop the right-side summand with this index (lexicographic k order)
    /// before verifying; a negative control for verify.
    #[arg(long)]
    pub drop_rhs_term: Option<usize>,
    /// JSONL file of configurations to validate (`-` for stdin); enumerate only.
    #[arg(long)]
    pub input: Option<String>,
}

fn parse_n(s: &str) -> Result<IndexVector, String> {
    let entries = s
        .split(',')
        .map(|t| {
            let v: i64 = t.trim().parse().map_err(|_| format!("not an integer: {t:?}"))?;
            if v < 0 {
                Err(format!("entries must be nonnegative, got {v}"))
            } else {
                Ok(v)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(IndexVector::new(entries))
}

/// A comma-separated list of rationals given as one flag value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rationals(pub Vec<Rational>);

fn parse_rationals(s: &str) -> Result<Rationals, String> {
    s.split(',')
        .map(|t| parse_rational(t).map_err(|e| e.to_string()))
        .collect::<Result<_, _>>()
        .map(Rationals)
}

/// A parameter or input problem; reported on stderr with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type Outcome = Result<i32, UsageError>;

impl Opts {
    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::Parallel
        }
    }

    fn enum_options(&self) -> EnumOptions {
        EnumOptions {
            cap: self.max_configs,
            exec: self.exec(),
        }
    }

    fn n(&self) -> Result<&IndexVector, UsageError> {
        self.n.as_ref().ok_or_else(|| UsageError("--n is required".into()))
    }

    fn param_mode(&self, value: Option<i64>, name: &str) -> Result<ParamMode, UsageError> {
        match (value, self.symbolic_ab) {
            (Some(_), true) => Err(UsageError(format!("--{name} conflicts with --symbolic-ab"))),
            (Some(v), false) => Ok(ParamMode::Concrete(v.into())),
            (None, true) => Ok(ParamMode::Symbolic),
            (None, false) => Err(UsageError(format!("--{name} is required unless --symbolic-ab is given"))),
        }
    }

    fn modes(&self) -> Result<Modes, UsageError> {
        let xy = match (&self.x, &self.y) {
            (Some(x), Some(y)) => XyMode::Concrete { x: x.0.clone(), y: y.0.clone() },
            _ => XyMode::Symbolic,
        };
        Ok(Modes {
            alpha: self.param_mode(self.alpha, "alpha")?,
            beta: self.param_mode(self.beta, "beta")?,
            xy,
        })
    }

    fn config_params(&self) -> Result<ConfigParams, UsageError> {
        if self.symbolic_ab {
            return Err(UsageError("this subcommand needs concrete --alpha and --beta".into()));
        }
        let n = self.n()?.clone();
        let alpha = self.alpha.ok_or_else(|| UsageError("--alpha is required".into()))?;
        let beta = self.beta.ok_or_else(|| UsageError("--beta is required".into()))?;
        let p = if self.allow_zero_alpha {
            ConfigParams::new_permissive(n, alpha, beta)?
        } else {
            ConfigParams::new(n, alpha, beta)?
        };
        Ok(p)
    }

    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }
}

fn status(ok: bool) -> i32 {
    if ok {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    }
}

fn emit_json(out: &mut dyn Write, v: &Value, format: Format) -> std::io::Result<()> {
    match format {
        Format::Jsonl => writeln!(out, "{}", serde_json::to_string(v).expect("json")),
        _ => writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json")),
    }
}

fn emit_report(out: &mut dyn Write, r: &VerifyReport, format: Format) -> std::io::Result<()> {
    match format {
        Format::Text => {
            writeln!(out, "equal: {}", r.equal)?;
            writeln!(out, "mode: {}", r.mode.as_str())?;
            writeln!(out, "difference: {}", r.difference)?;
            if let Some(t) = r.trials {
                writeln!(out, "trials: {t}")?;
            }
            if let Some(w) = &r.witness {
                let parts: Vec<String> = w
                    .iter()
                    .map(|(v, q)| format!("{v}={}", signrev_core::arith::format_rational(q)))
                    .collect();
                writeln!(out, "witness: {}", parts.join(" "))?;
            }
            Ok(())
        }
        f => emit_json(out, &r.to_json(), f),
    }
}

fn identity_sides(o: &Opts) -> Result<(IdentityInstance, SideExpr, SideExpr), UsageError> {
    let inst = IdentityInstance::new(o.n()?.clone(), o.modes()?)?;
    let lhs = lhs_eq3_expr(&inst);
    let mut rhs = rhs_eq3_expr(&inst);
    if let Some(i) = o.drop_rhs_term {
        if i >= rhs.summands.len() {
            return Err(UsageError(format!(
                "--drop-rhs-term {i} out of range (the right side has {} terms)",
                rhs.summands.len()
            )));
        }
        rhs = rhs.without_summand(i);
    }
    Ok((inst, lhs, rhs))
}

fn cmd_verify(o: &Opts, out: &mut dyn Write) -> Outcome {
    let report = match o.mode {
        Mode::Symbolic => {
            let (_, lhs, rhs) = identity_sides(o)?;
            verify_symbolic_sides(&lhs, &rhs, o.exec())
        }
        Mode::Random => {
            let (inst, lhs, rhs) = identity_sides(o)?;
            let settings = RandomSettings {
                trials: o.trials,
                seed: o.seed,
                range: o.range,
            };
            let vars = inst.modes().free_variables(inst.m());
            verify_random_sides(&lhs, &rhs, &vars, &settings, o.exec())?
        }
        Mode::Enumerate => {
            if o.x.is_some() || o.drop_rhs_term.is_some() {
                return Err(UsageError("enumerate mode takes neither --x/--y nor --drop-rhs-term".into()));
            }
            verify_enumerative(&o.config_params()?, &o.enum_options())?
        }
    };
    emit_report(out, &report, o.format(Format::Json))?;
    Ok(status(report.equal))
}

fn config_text(c: &Configuration) -> String {
    (1..=c.letters().len())
        .map(|p| {
            let cell = format!("{}:{}", c.letter(p), c.mark(p));
            if c.circled().contains(&p) {
                format!("({cell})")
            } else {
                cell
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

fn emit_configs<I: Iterator<Item = Configuration>>(out: &mut dyn Write, configs: I, format: Format) -> std::io::Result<()> {
    match format {
        Format::Jsonl => {
            for c in configs {
                writeln!(out, "{}", serde_json::to_string(&c.to_json()).expect("json"))?;
            }
        }
        Format::Json => {
            let all: Vec<ConfigurationJson> = configs.map(|c| c.to_json()).collect();
            writeln!(out, "{}", serde_json::to_string(&all).expect("json"))?;
        }
        Format::Text => {
            for c in configs {
                writeln!(out, "{}", config_text(&c))?;
            }
        }
    }
    Ok(())
}

fn read_configs(path: &str) -> Result<Vec<Configuration>, UsageError> {
    let reader: Box<dyn BufRead> = if path == "-" {
        Box::new(std::io::BufReader::new(std::io::stdin()))
    } else {
        Box::new(std::io::BufReader::new(std::fs::File::open(path).map_err(|e| UsageError(format!("{path}: {e}")))?))
    };
    let mut configs = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let c = Configuration::from_json_str(&line).map_err(|e| UsageError(format!("line {}: {e}", i + 1)))?;
        configs.push(c);
    }
    Ok(configs)
}

fn cmd_enumerate(o: &Opts, out: &mut dyn Write) -> Outcome {
    let format = o.format(Format::Jsonl);
    if let Some(path) = &o.input {
        if o.n.is_some() {
            return Err(UsageError("--input and --n are mutually exclusive".into()));
        }
        let configs = read_configs(path)?;
        emit_configs(out, configs.into_iter(), format)?;
        return Ok(EXIT_OK);
    }
    let p = o.config_params()?;
    if let Some(k) = &o.k {
        p.check_k(k)?;
    }
    let it = configspace::enumerate(&p, o.k.as_ref(), o.max_configs)?;
    emit_configs(out, it, format)?;
    Ok(EXIT_OK)
}

fn cmd_count(o: &Opts, out: &mut dyn Write) -> Outcome {
    let p = o.config_params()?;
    let c = configspace::count(&p, o.k.as_ref())?;
    match o.format(Format::Text) {
        Format::Text => writeln!(out, "{c}")?,
        f => emit_json(out, &json!({ "count": c.to_string() }), f)?,
    }
    Ok(EXIT_OK)
}

fn audit_text(r: &AuditReport, out: &mut dyn Write) -> std::io::Result<()> {
    let i = &r.instance;
    writeln!(out, "instance: n={:?} alpha={} beta={}", i.n, i.alpha, i.beta)?;
    let c = &r.checks;
    for (name, ok) in [
        ("involutive", c.involutive),
        ("sign_reversal", c.sign_reversal),
        ("weight_preserved", c.weight_preserved),
        ("fixed_characterization", c.fixed_characterization),
        ("sums_match", c.sums_match),
    ] {
        writeln!(out, "{name}: {}", if ok { "pass" } else { "FAIL" })?;
    }
    let t = &r.totals;
    writeln!(out, "configurations: {}  fixed_points: {}  pairs: {}", t.configurations, t.fixed_points, t.pairs)?;
    writeln!(out, "lhs: {}", r.sums.lhs)?;
    writeln!(out, "rhs: {}", r.sums.rhs)?;
    writeln!(out, "signed_total: {}", r.sums.signed_total)?;
    writeln!(out, "fixed_sum: {}", r.sums.fixed_sum)?;
    if let Some(ce) = &r.counterexample {
        writeln!(out, "counterexample: {}", serde_json::to_string(ce).expect("json"))?;
    }
    Ok(())
}

fn cmd_audit(o: &Opts, out: &mut dyn Write) -> Outcome {
    let r = audit(&o.config_params()?, &o.enum_options())?;
    match o.format(Format::Json) {
        Format::Text => audit_text(&r, out)?,
        f => emit_json(out, &serde_json::to_value(&r)?, f)?,
    }
    Ok(status(r.passed()))
}

fn cmd_fixed_points(o: &Opts, out: &mut dyn Write) -> Outcome {
    let r = fixed_point_report(&o.config_params()?, &o.enum_options())?;
    match o.format(Format::Json) {
        Format::Text => {
            writeln!(out, "fixed_points: {} (closed form {})", r.fixed_points, r.closed_form_count)?;
            writeln!(out, "fixed_sum: {}", r.fixed_sum)?;
            writeln!(out, "rhs: {}", r.rhs)?;
            writeln!(out, "equal: {}", r.equal)?;
        }
        f => emit_json(out, &serde_json::to_value(&r)?, f)?,
    }
    Ok(status(r.equal))
}

fn cmd_reduce(o: &Opts, out: &mut dyn Write) -> Outcome {
    let n = o.n()?;
    if n.len() != 1 {
        return Err(UsageError("reduce takes a scalar --n".into()));
    }
    let n = u32::try_from(n[0]).map_err(|_| UsageError("--n is too large".into()))?;
    let modes = Modes {
        alpha: o.alpha.map_or(ParamMode::Symbolic, |a| ParamMode::Concrete(a.into())),
        beta: o.beta.map_or(ParamMode::Symbolic, |b| ParamMode::Concrete(b.into())),
        xy: match (&o.x, &o.y) {
            (Some(x), Some(y)) => XyMode::Concrete { x: x.0.clone(), y: y.0.clone() },
            _ => XyMode::Symbolic,
        },
    };
    let three_two = check_reduction_eq3_to_eq2(n, &modes)?;
    let two_one = check_reduction_eq2_to_eq1(n);
    match o.format(Format::Json) {
        Format::Text => {
            writeln!(out, "eq3_to_eq2: {}", three_two.equal)?;
            writeln!(out, "eq2_to_eq1: {}", two_one.equal)?;
        }
        f => emit_json(
            out,
            &json!({ "n": n, "eq3_to_eq2": three_two.to_json(), "eq2_to_eq1": two_one.to_json() }),
            f,
        )?,
    }
    Ok(status(three_two.equal && two_one.equal))
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    EXIT_OK
                }
                _ => {
                    let msg = e.to_string();
                    let first = msg.lines().next().unwrap_or("invalid arguments");
                    let _ = writeln!(err, "{first}");
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match &cli.command {
        Command::Verify(o) => cmd_verify(o, out),
        Command::Enumerate(o) => cmd_enumerate(o, out),
        Command::Count(o) => cmd_count(o, out),
        Command::Audit(o) => cmd_audit(o, out),
        Command::FixedPoints(o) => cmd_fixed_points(o, out),
        Command::Reduce(o) => cmd_reduce(o, out),
    };
    match result {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
    }
}

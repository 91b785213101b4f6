//! The `slh` command-line tool.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::check::{
    bcc_mismatch, check_relative_security, check_sct, check_step_ni, check_unwinding,
    check_wl_preservation, Bounds, StateSpace, Verdict,
};
use crate::fixtures::fixture;
use crate::flow::{flow_track, pretty_acom};
use crate::harden::{harden, HardenVariant, Protection, DEFAULT_FLAG};
use crate::ideal::{IdealConfig, IdealKind};
use crate::ifc::{wt_cct, wt_ifc};
use crate::label::{Label, LabelSpec, Labeling};
use crate::lang::{parse_com, pretty_com, used_vars, Com};
use crate::machine::{feasible, run, settle, Machine, OutcomeKind, Settled};
use crate::seq::{seq_run, SeqKind};
use crate::speculative::SpecConfig;
use crate::state::{parse_dirs, parse_state, render_dirs, render_state, ArrayState, Dir, Obs, ScalarState};

const DEFAULT_MAX_DIRS: usize = 8;
const DEFAULT_FUEL: usize = 200;

#[derive(Parser, Debug)]
#[command(name = "slh", version, about = "Speculative load hardening toolkit for a small while language")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value = "text", global = true)]
    format: Format,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum System {
    Ifc,
    Cct,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Sem {
    Seq,
    Spec,
    IdealFislh,
    IdealFvslh,
    IdealFs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PropertyArg {
    Sct,
    Relsec,
    Bcc,
    Ni,
    Unwind,
    Wl,
    Equality,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check that a program parses.
    Parse { program: PathBuf },
    /// Pretty-print a program.
    Print { program: PathBuf },
    /// Type-check a program against a labeling.
    Typecheck {
        #[arg(long, value_enum, default_value = "ifc")]
        system: System,
        #[arg(long)]
        labels: Option<PathBuf>,
        program: PathBuf,
    },
    /// Print the flow-sensitive label annotations of a program.
    Analyze {
        #[arg(long)]
        labels: Option<PathBuf>,
        program: PathBuf,
    },
    /// Apply a hardening transformation.
    Harden {
        #[arg(long)]
        variant: String,
        /// Leave stores unmasked (selective index masking only).
        #[arg(long)]
        no_store_mask: bool,
        #[arg(long, default_value = DEFAULT_FLAG)]
        flag_var: String,
        #[arg(long)]
        labels: Option<PathBuf>,
        program: PathBuf,
    },
    /// Execute a program.
    Run {
        #[arg(long, value_enum, default_value = "spec")]
        sem: Sem,
        #[arg(long)]
        state: Option<PathBuf>,
        /// Directives, e.g. "force load a3 0 step".
        #[arg(long, default_value = "")]
        dirs: String,
        #[arg(long)]
        fuel: Option<usize>,
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Start with the misspeculation flag set.
        #[arg(long)]
        misspeculating: bool,
        /// Choose each directive at the prompt.
        #[arg(long)]
        interactive: bool,
        program: PathBuf,
    },
    /// Check a security property or lemma instance.
    Check {
        #[arg(long, value_enum)]
        property: PropertyArg,
        #[arg(long, default_value = "none")]
        variant: String,
        #[arg(long)]
        no_store_mask: bool,
        #[arg(long, default_value = DEFAULT_FLAG)]
        flag_var: String,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        space: Option<PathBuf>,
        #[arg(long)]
        state: Option<PathBuf>,
        #[arg(long)]
        state2: Option<PathBuf>,
        #[arg(long, default_value = "")]
        dirs: String,
        #[arg(long)]
        misspeculating: bool,
        #[arg(long)]
        max_dirs: Option<usize>,
        #[arg(long)]
        fuel: Option<usize>,
        program: PathBuf,
    },
    /// Replay the documented result for a reference listing.
    Repro {
        #[arg(long)]
        listing: usize,
    },
}

/// Outcome of a subcommand before printing.
struct Report {
    code: i32,
    text: String,
    json: Value,
}

impl Report {
    fn ok(text: String, json: Value) -> Self {
        Report { code: 0, text, json }
    }
}

type Res<T> = Result<T, String>;

struct Io<'a> {
    input: &'a mut dyn BufRead,
    out: &'a mut dyn Write,
}

/// Runs the tool with process stdio and returns the exit code.
pub fn run_cli<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let stderr = io::stderr();
    let mut err = stderr.lock();
    run_cli_with(argv, &mut input, &mut out, &mut err)
}

/// Runs the tool against the given streams; `input` feeds `-` program
/// arguments and interactive prompts.
pub fn run_cli_with<I, T>(
    argv: I,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 { write!(out, "{rendered}") } else { write!(err, "{rendered}") };
            return code;
        }
    };
    let format = cli.format;
    let mut io = Io { input, out };
    match dispatch(cli.cmd, &mut io) {
        Ok(r) => {
            let _ = match format {
                Format::Text => write!(io.out, "{}", r.text),
                Format::Json => writeln!(io.out, "{}", r.json),
            };
            r.code
        }
        Err(msg) => {
            let _ = match format {
                Format::Text => writeln!(err, "error: {msg}"),
                Format::Json => writeln!(io.out, "{}", json!({ "error": msg })),
            };
            2
        }
    }
}

fn env_or(value: Option<usize>, var: &str, default: usize) -> Res<usize> {
    if let Some(v) = value {
        return Ok(v);
    }
    match std::env::var(var) {
        Ok(s) => s.trim().parse().map_err(|_| format!("{var} must be a natural number, got `{s}`")),
        Err(_) => Ok(default),
    }
}

fn read_text(path: &Path, io: &mut Io<'_>) -> Res<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        io.input.read_to_string(&mut s).map_err(|e| format!("stdin: {e}"))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))
    }
}

fn load_program(path: &Path, io: &mut Io<'_>) -> Res<Com> {
    let text = read_text(path, io)?;
    parse_com(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_state(path: Option<&PathBuf>, io: &mut Io<'_>) -> Res<(ScalarState, ArrayState)> {
    match path {
        None => Ok((ScalarState::new(), ArrayState::new())),
        Some(p) => parse_state(&read_text(p, io)?).map_err(|e| format!("{}: {e}", p.display())),
    }
}

fn load_space(path: Option<&PathBuf>, io: &mut Io<'_>) -> Res<StateSpace> {
    match path {
        None => Ok(StateSpace::default()),
        Some(p) => StateSpace::parse(&read_text(p, io)?).map_err(|e| format!("{}: {e}", p.display())),
    }
}

/// A labeling file resolved against every array name in sight; without a
/// file everything is secret.
fn load_labels(path: Option<&PathBuf>, arrays: &BTreeSet<String>, io: &mut Io<'_>) -> Res<Labeling> {
    match path {
        None => Ok(Labeling::all_secret()),
        Some(p) => {
            let spec = LabelSpec::parse(&read_text(p, io)?).map_err(|e| format!("{}: {e}", p.display()))?;
            Ok(spec.resolve(arrays))
        }
    }
}

fn protection(variant: &str, no_store_mask: bool) -> Res<Protection> {
    let p: Protection = variant.parse()?;
    Ok(match p {
        Protection::Static(HardenVariant::Sislh { .. }) if no_store_mask => {
            Protection::Static(HardenVariant::Sislh { mask_stores: false })
        }
        p => p,
    })
}

fn ideal_kind(p: Protection) -> Res<IdealKind> {
    match p {
        Protection::Static(HardenVariant::Fislh) => Ok(IdealKind::Fislh),
        Protection::Static(HardenVariant::Fvslh) => Ok(IdealKind::Fvslh),
        Protection::FlowSensitive => Ok(IdealKind::Fs),
        p => Err(format!("no ideal semantics for variant `{p}`; use fislh, fvslh or fsfvslh")),
    }
}

fn ideal_config(kind: IdealKind, c: &Com, l: &Labeling, s: (ScalarState, ArrayState), flag: bool) -> IdealConfig {
    match kind {
        IdealKind::Fs => {
            let (a, _) = flow_track(c, l, Label::Public);
            IdealConfig::flow_sensitive(a, l.clone(), Label::Public, s.0, s.1, flag)
        }
        k => IdealConfig::of_com(k, c, l, s.0, s.1, flag),
    }
}

/// Public scalars and arrays among the names `c` mentions.
fn public_names(l: &Labeling, c: &Com) -> (Vec<String>, Vec<String>) {
    let pv = used_vars(c).into_iter().filter(|x| l.var(x).is_public()).collect();
    let pa = c.arrays().into_iter().filter(|a| l.arr(a).is_public()).collect();
    (pv, pa)
}

fn state_json(rho: &ScalarState, mu: &ArrayState) -> Value {
    let scalars: serde_json::Map<String, Value> = rho.support().map(|(x, v)| (x.to_string(), json!(v))).collect();
    let arrays: serde_json::Map<String, Value> = mu.iter().map(|(a, v)| (a.to_string(), json!(v))).collect();
    json!({ "scalars": scalars, "arrays": arrays })
}

fn trace_json(t: &[Obs]) -> Value {
    json!(t.iter().map(Obs::to_string).collect::<Vec<_>>())
}

fn verdict_report(v: &Verdict) -> Report {
    match v {
        Verdict::Holds { bounds, pairs } => Report::ok(
            format!("{v}\n"),
            json!({ "verdict": "holds", "pairs": pairs, "max_dirs": bounds.max_dirs, "fuel": bounds.fuel }),
        ),
        Verdict::Violated(w) => Report {
            code: 1,
            text: format!(
                "{v}\nstate 1:\n{}state 2:\n{}",
                render_state(&w.s1.0, &w.s1.1),
                render_state(&w.s2.0, &w.s2.1)
            ),
            json: json!({
                "verdict": "violated",
                "diverges_at": w.diverges_at,
                "dirs": render_dirs(&w.dirs),
                "trace1": trace_json(&w.trace1),
                "trace2": trace_json(&w.trace2),
                "state1": state_json(&w.s1.0, &w.s1.1),
                "state2": state_json(&w.s2.0, &w.s2.1),
            }),
        },
    }
}

fn bool_report(holds: bool, what: &str, detail: Option<String>) -> Report {
    let word = if holds { "holds" } else { "violated" };
    let mut text = format!("{what}: {word}\n");
    if let Some(d) = &detail {
        text.push_str(&format!("{d}\n"));
    }
    Report { code: i32::from(!holds), text, json: json!({ "verdict": word, "property": what, "detail": detail }) }
}

fn dispatch(cmd: Cmd, io: &mut Io<'_>) -> Res<Report> {
    match cmd {
        Cmd::Parse { program } => {
            let c = load_program(&program, io)?;
            let vars: Vec<String> = used_vars(&c).into_iter().collect();
            let arrays: Vec<String> = c.arrays().into_iter().collect();
            Ok(Report::ok(
                format!("ok: {} commands, scalars [{}], arrays [{}]\n", c.size(), vars.join(", "), arrays.join(", ")),
                json!({ "ok": true, "size": c.size(), "scalars": vars, "arrays": arrays }),
            ))
        }
        Cmd::Print { program } => {
            let c = load_program(&program, io)?;
            let text = pretty_com(&c);
            Ok(Report::ok(format!("{text}\n"), json!({ "program": text })))
        }
        Cmd::Typecheck { system, labels, program } => {
            let c = load_program(&program, io)?;
            let l = load_labels(labels.as_ref(), &c.arrays(), io)?;
            let ok = match system {
                System::Ifc => wt_ifc(&l, Label::Public, &c),
                System::Cct => wt_cct(&l, &c),
            };
            let sys = if system == System::Ifc { "ifc" } else { "cct" };
            let word = if ok { "well-typed" } else { "ill-typed" };
            Ok(Report {
                code: i32::from(!ok),
                text: format!("{word} ({sys})\n"),
                json: json!({ "system": sys, "well_typed": ok }),
            })
        }
        Cmd::Analyze { labels, program } => {
            let c = load_program(&program, io)?;
            let l = load_labels(labels.as_ref(), &c.arrays(), io)?;
            let (a, fin) = flow_track(&c, &l, Label::Public);
            let (pv, pa) = public_names(&fin, &c);
            let text = pretty_acom(&a);
            Ok(Report::ok(
                format!("{text}\n# final public: {}\n", pv.iter().chain(&pa).cloned().collect::<Vec<_>>().join(", ")),
                json!({ "annotated": text, "public_vars": pv, "public_arrays": pa }),
            ))
        }
        Cmd::Harden { variant, no_store_mask, flag_var, labels, program } => {
            let c = load_program(&program, io)?;
            let l = load_labels(labels.as_ref(), &c.arrays(), io)?;
            let p = protection(&variant, no_store_mask)?;
            let h = p.apply(&c, &l, &flag_var).map_err(|e| e.to_string())?;
            let text = pretty_com(&h);
            Ok(Report::ok(format!("{text}\n"), json!({ "variant": p.to_string(), "program": text })))
        }
        Cmd::Run { sem, state, dirs, fuel, labels, misspeculating, interactive, program } => {
            let c = load_program(&program, io)?;
            let s = load_state(state.as_ref(), io)?;
            let mut arrays = c.arrays();
            arrays.extend(s.1.names().map(String::from));
            let l = load_labels(labels.as_ref(), &arrays, io)?;
            let dirs = parse_dirs(&dirs).map_err(|e| e.to_string())?;
            let fuel = env_or(fuel, "SLH_FUEL", DEFAULT_FUEL)?;
            run_cmd(sem, c, s, l, &dirs, fuel, misspeculating, interactive, io)
        }
        Cmd::Check {
            property,
            variant,
            no_store_mask,
            flag_var,
            labels,
            space,
            state,
            state2,
            dirs,
            misspeculating,
            max_dirs,
            fuel,
            program,
        } => {
            let c = load_program(&program, io)?;
            let space = load_space(space.as_ref(), io)?;
            let s1 = load_state(state.as_ref(), io)?;
            let s2 = match &state2 {
                Some(_) => load_state(state2.as_ref(), io)?,
                None => s1.clone(),
            };
            let mut arrays = c.arrays();
            arrays.extend(space.arrays.keys().cloned());
            arrays.extend(s1.1.names().map(String::from));
            let l = load_labels(labels.as_ref(), &arrays, io)?;
            let p = protection(&variant, no_store_mask)?;
            let bounds = Bounds {
                max_dirs: env_or(max_dirs, "SLH_MAX_DIRS", DEFAULT_MAX_DIRS)?,
                fuel: env_or(fuel, "SLH_FUEL", DEFAULT_FUEL)?,
            };
            let dirs = parse_dirs(&dirs).map_err(|e| e.to_string())?;
            let cx = CheckArgs { c, l, p, space, s1, s2, dirs, flag: misspeculating, bounds, flag_var };
            check_cmd(property, cx)
        }
        Cmd::Repro { listing } => {
            let f = fixture(listing).ok_or_else(|| format!("no listing {listing}; listings are 1 to 6"))?;
            let (e, v) = f.repro();
            let v = v.map_err(|e| e.to_string())?;
            let mut r = verdict_report(&v);
            r.text = format!(
                "listing {} ({}): {} with {}\nexpected: {}\n{}",
                f.id,
                f.title,
                e.property,
                e.protection,
                if e.holds { "holds" } else { "violated" },
                r.text
            );
            if let Value::Object(m) = &mut r.json {
                m.insert("listing".into(), json!(f.id));
                m.insert("property".into(), json!(e.property.to_string()));
                m.insert("variant".into(), json!(e.protection.to_string()));
                m.insert("expected".into(), json!(if e.holds { "holds" } else { "violated" }));
            }
            Ok(r)
        }
    }
}

struct CheckArgs {
    c: Com,
    l: Labeling,
    p: Protection,
    space: StateSpace,
    s1: (ScalarState, ArrayState),
    s2: (ScalarState, ArrayState),
    dirs: Vec<Dir>,
    flag: bool,
    bounds: Bounds,
    flag_var: String,
}

fn check_cmd(property: PropertyArg, a: CheckArgs) -> Res<Report> {
    let first_dir = a.dirs.first().cloned().unwrap_or(Dir::Step);
    match property {
        PropertyArg::Sct => {
            let h = a.p.apply(&a.c, &a.l, &a.flag_var).map_err(|e| e.to_string())?;
            Ok(verdict_report(&check_sct(&h, &a.l, &a.space, a.bounds)))
        }
        PropertyArg::Relsec => {
            let v = check_relative_security(a.p, &a.c, &a.l, &a.space, a.bounds, &a.flag_var)
                .map_err(|e| e.to_string())?;
            Ok(verdict_report(&v))
        }
        PropertyArg::Bcc => {
            let kind = ideal_kind(a.p)?;
            let m = bcc_mismatch(kind, &a.c, &a.l, &a.s1, a.flag, &a.dirs, a.bounds.fuel, &a.flag_var)
                .map_err(|e| e.to_string())?;
            Ok(bool_report(m.is_none(), "bcc", m))
        }
        PropertyArg::Ni => {
            let kind = ideal_kind(a.p)?;
            let c1 = ideal_config(kind, &a.c, &a.l, a.s1, a.flag);
            let c2 = ideal_config(kind, &a.c, &a.l, a.s2, a.flag);
            let ok = check_step_ni(&c1, &c2, &first_dir).map_err(|e| e.to_string())?;
            Ok(bool_report(ok, "ni", None))
        }
        PropertyArg::Unwind => {
            let kind = ideal_kind(a.p)?;
            let v = check_unwinding(kind, &a.c, &a.l, &a.s1, &a.s2, a.bounds).map_err(|e| e.to_string())?;
            Ok(verdict_report(&v))
        }
        PropertyArg::Wl => {
            let (acom, fin) = flow_track(&a.c, &a.l, Label::Public);
            let cfg = IdealConfig::flow_sensitive(acom, a.l.clone(), Label::Public, a.s1.0, a.s1.1, a.flag);
            let ok = check_wl_preservation(&cfg, &fin, &first_dir).map_err(|e| e.to_string())?;
            Ok(bool_report(ok, "wl", None))
        }
        PropertyArg::Equality => {
            let h = |v, l: &Labeling| harden(v, &a.c, l, &a.flag_var).map_err(|e| e.to_string());
            let secret = Labeling::all_secret();
            let mut rows = Vec::new();
            if wt_cct(&a.l, &a.c) {
                let sislh = HardenVariant::Sislh { mask_stores: true };
                rows.push(("fislh = sislh", h(HardenVariant::Fislh, &a.l)? == h(sislh, &a.l)?));
            }
            let uslh = h(HardenVariant::Uslh, &secret)?;
            rows.push(("fislh = uslh (all secret)", h(HardenVariant::Fislh, &secret)? == uslh));
            rows.push(("fvslh = uslh (all secret)", h(HardenVariant::Fvslh, &secret)? == uslh));
            let all = rows.iter().all(|(_, eq)| *eq);
            let text: String = rows
                .iter()
                .map(|(name, eq)| format!("{name}: {}\n", if *eq { "equal" } else { "different" }))
                .collect();
            let obj: serde_json::Map<String, Value> = rows.iter().map(|(n, eq)| (n.to_string(), json!(eq))).collect();
            Ok(Report { code: i32::from(!all), text, json: json!({ "equalities": obj, "all_equal": all }) })
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn run_cmd(
    sem: Sem,
    c: Com,
    s: (ScalarState, ArrayState),
    l: Labeling,
    dirs: &[Dir],
    fuel: usize,
    misspeculating: bool,
    interactive: bool,
    io: &mut Io<'_>,
) -> Res<Report> {
    if sem == Sem::Seq {
        if interactive || !dirs.is_empty() {
            return Err("the sequential semantics takes no directives".into());
        }
        let o = seq_run(&c, &s.0, &s.1, fuel);
        let kind = match o.kind {
            SeqKind::Terminated => OutcomeKind::Terminated,
            SeqKind::Stuck => OutcomeKind::Stuck,
            SeqKind::FuelExhausted => OutcomeKind::FuelExhausted,
        };
        return Ok(run_report(kind, o.steps, &o.trace, &o.rho, &o.mu, None, &o.com.to_string()));
    }
    let kind = match sem {
        Sem::IdealFislh => Some(IdealKind::Fislh),
        Sem::IdealFvslh => Some(IdealKind::Fvslh),
        Sem::IdealFs => Some(IdealKind::Fs),
        _ => None,
    };
    match kind {
        None => {
            let cfg = SpecConfig { com: c, rho: s.0, mu: s.1, flag: misspeculating };
            let show = |m: &SpecConfig| format!("{}\n{}flag: {}\n", pretty_com(&m.com), render_state(&m.rho, &m.mu), m.flag);
            drive(cfg, dirs, fuel, interactive, io, &show, |m| (&m.rho, &m.mu, m.flag, m.com.to_string()))
        }
        Some(k) => {
            let cfg = ideal_config(k, &c, &l, s, misspeculating);
            let show = |m: &IdealConfig| {
                format!("{}\n{}flag: {}, pc: {}\n", pretty_acom(&m.com), render_state(&m.rho, &m.mu), m.flag, m.pc)
            };
            drive(cfg, dirs, fuel, interactive, io, &show, |m| (&m.rho, &m.mu, m.flag, m.com.erase().to_string()))
        }
    }
}

type View<'a> = (&'a ScalarState, &'a ArrayState, bool, String);

fn drive<M: Machine>(
    cfg: M,
    dirs: &[Dir],
    fuel: usize,
    interactive: bool,
    io: &mut Io<'_>,
    show: &dyn Fn(&M) -> String,
    view: impl for<'a> Fn(&'a M) -> View<'a>,
) -> Res<Report> {
    let (kind, m, trace, steps) = if interactive {
        let (m, trace, kind, steps) = interact(cfg, fuel, show, io.input, io.out).map_err(|e| e.to_string())?;
        (kind, m, trace, steps)
    } else {
        let o = run(cfg, dirs, fuel);
        (o.kind, o.config, o.trace, o.steps)
    };
    let (rho, mu, flag, com) = view(&m);
    Ok(run_report(kind, steps, &trace, rho, mu, Some(flag), &com))
}

fn run_report(
    kind: OutcomeKind,
    steps: usize,
    trace: &[Obs],
    rho: &ScalarState,
    mu: &ArrayState,
    flag: Option<bool>,
    com: &str,
) -> Report {
    let mut text = format!("outcome: {kind}\nsteps: {steps}\ntrace:\n");
    for o in trace {
        text.push_str(&format!("  {o}\n"));
    }
    text.push_str("state:\n");
    for line in render_state(rho, mu).lines() {
        text.push_str(&format!("  {line}\n"));
    }
    if let Some(f) = flag {
        text.push_str(&format!("flag: {f}\n"));
    }
    if kind != OutcomeKind::Terminated {
        text.push_str(&format!("remaining: {com}\n"));
    }
    Report::ok(
        text,
        json!({
            "outcome": kind.to_string(),
            "steps": steps,
            "trace": trace_json(trace),
            "state": state_json(rho, mu),
            "flag": flag,
            "remaining": com,
        }),
    )
}

/// Prompts for a directive whenever the machine waits for one. Answers are
/// an option number or a directive such as `load a 0`; end of input stops
/// the run.
fn interact<M: Machine>(
    mut m: M,
    mut fuel: usize,
    show: &dyn Fn(&M) -> String,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
) -> io::Result<(M, Vec<Obs>, OutcomeKind, usize)> {
    let mut trace = Vec::new();
    let start = fuel;
    loop {
        let b = match settle(m, &mut fuel) {
            Settled::Final(m) => return Ok((m, trace, OutcomeKind::Terminated, start - fuel)),
            Settled::OutOfFuel(m) => return Ok((m, trace, OutcomeKind::FuelExhausted, start - fuel)),
            Settled::Blocked(b) => b,
        };
        if fuel == 0 {
            return Ok((b, trace, OutcomeKind::FuelExhausted, start - fuel));
        }
        let mut options = feasible(&b);
        if options.is_empty() {
            return Ok((b, trace, OutcomeKind::Stuck, start - fuel));
        }
        write!(out, "{}", show(&b))?;
        for (k, (d, _, _)) in options.iter().enumerate() {
            writeln!(out, "  [{k}] {d}")?;
        }
        let pick = loop {
            write!(out, "> ")?;
            out.flush()?;
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Ok((b, trace, OutcomeKind::DirectivesExhausted, start - fuel));
            }
            let line = line.trim();
            let by_index = line.parse::<usize>().ok().filter(|k| *k < options.len());
            let by_name = line.parse::<Dir>().ok().and_then(|d| options.iter().position(|(o, _, _)| *o == d));
            match by_index.or(by_name) {
                Some(k) => break k,
                None => writeln!(out, "not one of the listed directives: `{line}`")?,
            }
        };
        let (_, next, o) = options.swap_remove(pick);
        writeln!(out, "observed: {o}")?;
        trace.push(o);
        fuel -= 1;
        m = next;
    }
}

//! Command-line surface. `run` never touches the process environment beyond
//! `OAGKIT_BOUND` and input files, so it is callable from tests.

use std::fmt::Write as _;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::catalogue;
use crate::classify::{classify_frr, classify_main, classify_pair, verdict_json};
use crate::formula::{self, Env};
use crate::group::{skeleton, Elem, GroupSpec};
use crate::pair::PairSpec;
use crate::par::Exec;
use crate::pseudo::{hahn_pseudo_limit, is_pseudo_cauchy, is_pseudo_limit, lift_mod_m, Limit, PseudoSequence};
use crate::typedef::{best_approx, scheme, Approx, Target};
use crate::valuation::DEFAULT_BOUND;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DOMAIN: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "oagkit", version, about = "Exact computations in presented ordered abelian groups")]
struct Cli {
    /// Wrap the result in a run report with an input digest.
    #[arg(long, global = true)]
    json: bool,
    /// Include the full reason tree and timing.
    #[arg(long, global = true)]
    trace: bool,
    /// Search bound for semi-decisions.
    #[arg(long, global = true, env = "OAGKIT_BOUND")]
    bound: Option<u64>,
    #[command(subcommand)]
    cmd: Cmd,
}

/// Inputs are file paths or inline JSON.
#[derive(Debug, Subcommand)]
enum Cmd {
    Skeleton { group: String },
    /// The value set `Γ_m`.
    Spine { m: u64, group: String },
    /// `val^m` of an element.
    Val { m: u64, group: String, elem: String },
    /// Sign, valuations and the bullet predicates of an element.
    Preds {
        group: String,
        elem: String,
        #[arg(long, default_value_t = 2)]
        m: u64,
        #[arg(long, default_value_t = 0)]
        k: i64,
    },
    Classify { group: String },
    ClassifyFrr { group: String },
    PairClassify { pair: String },
    CheckM { group: String },
    CheckUr { group: String },
    /// Pseudo-Cauchy report and a pseudo-limit of a sequence.
    Pseudo {
        group: String,
        sequence: String,
        #[arg(long)]
        limit: Option<String>,
    },
    Lift { group: String, sequence: String },
    BestApprox {
        pair: String,
        elem: String,
        #[arg(long, default_value_t = 1)]
        n: i64,
        #[arg(long, default_value_t = 0)]
        m: u64,
    },
    Scheme { pair: String, elem: String, target: String },
    /// Evaluate a formula; `--env` maps variable names to elements.
    Eval {
        group: String,
        formula: String,
        #[arg(long, default_value = "{}")]
        env: String,
    },
    Corpus,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

enum Fail {
    Usage(String),
    Domain(String),
}

impl<E: std::error::Error> From<E> for Fail {
    fn from(e: E) -> Fail {
        Fail::Domain(e.to_string())
    }
}

struct Inputs {
    raw: Vec<String>,
}

impl Inputs {
    fn value(&mut self, arg: &str) -> Result<Value, Fail> {
        let t = arg.trim_start();
        let text = if t.starts_with('{') || t.starts_with('[') || t.starts_with('"') || t.parse::<f64>().is_ok() {
            arg.to_string()
        } else {
            std::fs::read_to_string(arg).map_err(|e| Fail::Usage(format!("{arg}: {e}")))?
        };
        let v = serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{arg}: {e}")))?;
        self.raw.push(text);
        Ok(v)
    }

    fn group(&mut self, arg: &str) -> Result<GroupSpec, Fail> {
        Ok(GroupSpec::from_json(&self.value(arg)?)?)
    }

    fn pair(&mut self, arg: &str) -> Result<PairSpec, Fail> {
        Ok(PairSpec::from_json(&self.value(arg)?)?)
    }

    fn elem(&mut self, g: &GroupSpec, arg: &str) -> Result<Elem, Fail> {
        let e = g.parse_elem(&self.value(arg)?)?;
        g.contains(&e)?;
        Ok(e)
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        for r in &self.raw {
            h.update(r.as_bytes());
            h.update([0]);
        }
        h.finalize().iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
    }
}

struct Done {
    code: i32,
    value: Value,
    table: Option<String>,
}

impl Done {
    fn ok(value: Value) -> Done {
        Done { code: 0, value, table: None }
    }
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            return if code == 0 { Output { code, stdout: text, stderr: String::new() } } else { Output { code, stdout: String::new(), stderr: text } };
        }
    };
    let start = Instant::now();
    let mut inputs = Inputs { raw: Vec::new() };
    let command = format!("{:?}", cli.cmd).split([' ', '{']).next().unwrap_or_default().to_lowercase();
    let res = dispatch(&cli, &mut inputs);
    let elapsed = start.elapsed();
    let mut stderr = String::new();
    if cli.trace {
        let _ = writeln!(stderr, "elapsed: {:.3} ms", elapsed.as_secs_f64() * 1e3);
    }
    match res {
        Err(Fail::Usage(msg)) => Output { code: EXIT_USAGE, stdout: String::new(), stderr: stderr + &format!("usage: {msg}\n") },
        Err(Fail::Domain(msg)) => {
            let v = json!({ "error": msg });
            Output { code: EXIT_DOMAIN, stdout: format!("{v}\n"), stderr: stderr + &format!("error: {msg}\n") }
        }
        Ok(done) => {
            let stdout = if cli.json {
                let report = json!({ "command": command, "inputs_digest": inputs.digest(), "output": done.value });
                format!("{}\n", serde_json::to_string_pretty(&report).expect("json"))
            } else if let Some(t) = done.table {
                t
            } else {
                format!("{}\n", done.value)
            };
            Output { code: done.code, stdout, stderr }
        }
    }
}

fn dispatch(cli: &Cli, inp: &mut Inputs) -> Result<Done, Fail> {
    let bound = cli.bound.unwrap_or(DEFAULT_BOUND);
    let verdict = |v: crate::verdict::Verdict| Done { code: v.status.exit_code(), value: verdict_json(&v, cli.trace), table: None };
    Ok(match &cli.cmd {
        Cmd::Skeleton { group } => Done::ok(skeleton(&inp.group(group)?)),
        Cmd::Spine { m, group } => Done::ok(inp.group(group)?.spine_m(*m)?.to_json()),
        Cmd::Val { m, group, elem } => {
            let g = inp.group(group)?;
            let e = inp.elem(&g, elem)?;
            Done::ok(g.val_m(&e, *m).to_json())
        }
        Cmd::Preds { group, elem, m, k } => {
            let g = inp.group(group)?;
            let e = inp.elem(&g, elem)?;
            Done::ok(json!({
                "sign": g.sign(&e),
                "val": g.nat_val(&e).to_json(),
                "val_m": g.val_m(&e, *m).to_json(),
                "m": m,
                "k": k,
                "cong_bullet": g.pred_cong_bullet(&e, *m, *k),
                "eq_bullet": g.pred_eq_bullet(&e, *k)?,
            }))
        }
        Cmd::Classify { group } => verdict(classify_main(&inp.group(group)?, bound)),
        Cmd::ClassifyFrr { group } => verdict(classify_frr(&inp.group(group)?)?),
        Cmd::PairClassify { pair } => verdict(classify_pair(&inp.pair(pair)?)),
        Cmd::CheckM { group } => {
            let c = inp.group(group)?.check_m(bound);
            Done { code: c.exit_code(), value: serde_json::to_value(&c).expect("json"), table: None }
        }
        Cmd::CheckUr { group } => {
            let c = inp.group(group)?.check_ur()?;
            Done { code: c.exit_code(), value: serde_json::to_value(&c).expect("json"), table: None }
        }
        Cmd::Pseudo { group, sequence, limit } => {
            let g = inp.group(group)?;
            let s = PseudoSequence::from_json(&g, &inp.value(sequence)?)?;
            let report = is_pseudo_cauchy(&g, &s)?;
            let lim = match hahn_pseudo_limit(&g, &s)? {
                Limit::Elem(e) => json!({ "elem": g.elem_to_json(&e) }),
                Limit::NotRepresentable(why) => json!({ "not_representable": why }),
            };
            let mut v = json!({ "cauchy": report, "limit": lim });
            if let Some(l) = limit {
                let a = inp.elem(&g, l)?;
                v["is_limit"] = json!(is_pseudo_limit(&g, &s, &a)?);
            }
            Done::ok(v)
        }
        Cmd::Lift { group, sequence } => {
            let g = inp.group(group)?;
            let s = PseudoSequence::from_json(&g, &inp.value(sequence)?)?;
            Done::ok(lift_mod_m(&g, &s)?.to_json(&g))
        }
        Cmd::BestApprox { pair, elem, n, m } => {
            let p = inp.pair(pair)?;
            let a = inp.elem(&p.h, elem)?;
            Done::ok(match best_approx(&p, &a, *n, *m)? {
                Approx::Best(b) => json!({ "best": { "n": b.n, "m": b.m, "a_mn": p.g.elem_to_json(&b.a_mn), "beta": b.beta.to_json() } }),
                Approx::NoMaximum(c) => json!({ "no_maximum": c.to_json(&p.g) }),
            })
        }
        Cmd::Scheme { pair, elem, target } => {
            let p = inp.pair(pair)?;
            let a = inp.elem(&p.h, elem)?;
            let t = Target::from_json(&inp.value(target)?).map_err(Fail::Usage)?;
            Done::ok(scheme(&p, &a, t)?.to_json(&p))
        }
        Cmd::Eval { group, formula, env } => {
            let g = inp.group(group)?;
            let f = formula::parse(formula)?;
            inp.raw.push(formula.clone());
            let Value::Object(map) = inp.value(env)? else {
                return Err(Fail::Usage("--env must be a JSON object".into()));
            };
            let mut bound_vars = Env::new();
            for (k, v) in map {
                let e = g.parse_elem(&v)?;
                g.contains(&e)?;
                bound_vars.insert(k, e);
            }
            Done::ok(json!({ "formula": f.to_string(), "value": formula::eval(&g, &f, &bound_vars)? }))
        }
        Cmd::Corpus => {
            let results = catalogue::corpus(Exec::default());
            let failed = results.iter().filter(|r| !r.pass).count();
            let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
            let mut table = String::new();
            for r in &results {
                let _ = writeln!(table, "{}  {:width$}  {}", if r.pass { "PASS" } else { "FAIL" }, r.name, r.detail);
            }
            let _ = writeln!(table, "{} passed, {failed} failed", results.len() - failed);
            Done { code: i32::from(failed > 0), value: serde_json::to_value(&results).expect("json"), table: Some(table) }
        }
    })
}

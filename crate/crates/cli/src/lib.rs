//! Command-line front end for `dpsod`. [`run`] does all the work and returns
//! the exit code with the text to print, so it can be tested in process.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dpsod::catalog::{entries, enumerate_degenerations, lookup};
use dpsod::engine::{compare_and_solve, CompareError, ScriptSource};
use dpsod::instance::parse_instance;
use dpsod::ktheory::kawamata_gate;
use dpsod::quiver::{builtin, parse_quiver, path_basis};
use dpsod::shipped::script_text;
use dpsod::{defect, parse_script, replay_with_imports, Basis, BlowupGeometry, DivisorClass, FactStore, ReplayScript};
use serde::Serialize;
use serde_json::json;

/// Exit codes.
pub const OK: i32 = 0;
pub const VERIFICATION_FAILED: i32 = 1;
pub const INPUT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "dpsod", version, about = "Exact computations for nodal del Pezzo threefolds")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Seed for drawing hypersurfaces from their linear systems.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    /// Print only the result, no audit log.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Defect of a nodal hypersurface given as a `.hyp` file.
    Defect { instance: PathBuf },
    /// Replay a `.sod` script (a path, or the name of a bundled script).
    Replay { script: String },
    /// Replay two scripts on the same blow-up and identify their heads.
    Compare {
        left: String,
        right: String,
        /// Degree to replay at; defaults to the right script's.
        #[arg(value_name = "d=N")]
        degree: Option<String>,
    },
    /// Intersection number of three divisor classes, e.g. `(H-E)^3`.
    Intersect {
        #[arg(value_name = "d=N")]
        degree: String,
        expr: String,
    },
    /// Path-algebra report for a built-in quiver or a quiver file.
    Quiver { quiver: String },
    /// Classification entries, all or one degree.
    Catalog {
        d: Option<i64>,
        #[arg(long)]
        variant: Option<String>,
    },
    /// Whether a nodal del Pezzo threefold has a Kawamata decomposition.
    Gate {
        #[arg(value_name = "d=N")]
        degree: String,
        #[arg(value_name = "nodes=K")]
        nodes: String,
    },
    /// Node partitions between the curve and the quadric for d = 5.
    Degenerations {
        #[arg(value_name = "d=N")]
        degree: String,
        #[arg(value_name = "nodes=K")]
        nodes: String,
    },
}

/// Exit code and the text for stdout and stderr.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Output {
            code: OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn fail(code: i32, stderr: impl Into<String>) -> Self {
        Output {
            code,
            stdout: String::new(),
            stderr: stderr.into(),
        }
    }
}

type Res = Result<Output, Output>;

fn input(e: impl std::fmt::Display) -> Output {
    Output::fail(INPUT_ERROR, format!("error: {e}\n"))
}

fn emit<T: Serialize>(g: &Global, value: &T, text: impl FnOnce() -> String) -> Output {
    if g.json {
        Output::ok(serde_json::to_string_pretty(value).expect("reports serialize") + "\n")
    } else {
        Output::ok(text())
    }
}

fn key_value(arg: &str, key: &str) -> Result<i64, Output> {
    arg.strip_prefix(key)
        .and_then(|r| r.strip_prefix('='))
        .and_then(|v| v.parse().ok())
        .ok_or_else(|| input(format!("expected {key}=<integer>, got `{arg}`")))
}

/// Parses arguments (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { INPUT_ERROR } else { OK };
            let text = e.render().to_string();
            return if code == OK {
                Output::ok(text)
            } else {
                Output::fail(code, text)
            };
        }
    };
    dispatch(&cli).unwrap_or_else(|e| e)
}

fn dispatch(cli: &Cli) -> Res {
    let g = &cli.global;
    match &cli.command {
        Command::Defect { instance } => cmd_defect(g, instance),
        Command::Replay { script } => cmd_replay(g, script),
        Command::Compare { left, right, degree } => cmd_compare(g, left, right, degree.as_deref()),
        Command::Intersect { degree, expr } => cmd_intersect(g, key_value(degree, "d")?, expr),
        Command::Quiver { quiver } => cmd_quiver(g, quiver),
        Command::Catalog { d, variant } => cmd_catalog(g, *d, variant.as_deref()),
        Command::Gate { degree, nodes } => cmd_gate(g, key_value(degree, "d")?, key_value(nodes, "nodes")?),
        Command::Degenerations { degree, nodes } => {
            cmd_degenerations(g, key_value(degree, "d")?, key_value(nodes, "nodes")?)
        }
    }
}

fn cmd_defect(g: &Global, path: &Path) -> Res {
    let text = fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let inst = parse_instance(&text).map_err(input)?;
    let x = inst.realize(g.seed).map_err(input)?;
    let r = defect(&x).map_err(input)?;
    let report = json!({
        "mu": r.mu,
        "l_degree": r.l_degree,
        "h0_l": r.h0_l,
        "eval_rank": r.eval_rank,
        "delta": r.delta,
        "maximal_defect": r.is_maximal(),
    });
    Ok(emit(g, &report, || {
        format!(
            "nodes (mu):      {}\nL-degree:        {}\nh0(L):           {}\nevaluation rank: {}\ndefect (delta):  {}\nmaximal defect:  {}\n",
            r.mu,
            r.l_degree,
            r.h0_l,
            r.eval_rank,
            r.delta,
            if r.is_maximal() { "yes" } else { "no" }
        )
    }))
}

/// Resolves scripts from disk relative to a base directory, then from the
/// bundled set.
struct FileSource {
    dir: PathBuf,
}

impl FileSource {
    fn read(&self, name: &str) -> Result<String, String> {
        let on_disk = self.dir.join(name);
        if on_disk.is_file() {
            return fs::read_to_string(&on_disk).map_err(|e| format!("{}: {e}", on_disk.display()));
        }
        let base = Path::new(name).file_name().and_then(|f| f.to_str()).unwrap_or(name);
        script_text(base)
            .map(String::from)
            .ok_or_else(|| format!("{name}: no such file or bundled script"))
    }
}

impl ScriptSource for FileSource {
    fn load(&self, name: &str) -> Result<ReplayScript, String> {
        let text = self.read(name)?;
        parse_script(&text).map_err(|e| format!("{name}: {e}"))
    }
}

fn load_script(arg: &str) -> Result<(String, ReplayScript, FileSource), Output> {
    let path = Path::new(arg);
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let src = FileSource { dir: dir.clone() };
    let name = path.file_name().and_then(|f| f.to_str()).unwrap_or(arg).to_string();
    let text = if path.is_file() {
        fs::read_to_string(path).map_err(|e| input(format!("{arg}: {e}")))?
    } else {
        src.read(&name).map_err(input)?
    };
    let script = parse_script(&text).map_err(|e| input(format!("{arg}: {e}")))?;
    Ok((name, script, src))
}

fn replay_error(e: dpsod::ReplayError) -> Output {
    let code = if e.is_verification_failure() {
        VERIFICATION_FAILED
    } else {
        INPUT_ERROR
    };
    Output::fail(code, format!("replay failed: {e}\n"))
}

fn hd_form(d: &dpsod::Decomposition) -> Option<String> {
    BlowupGeometry::new(d.ambient.degree())
        .ok()
        .filter(BlowupGeometry::has_hd_relations)
        .and_then(|_| d.rewritten(Basis::HD).ok())
        .map(|x| x.to_string())
}

fn cmd_replay(g: &Global, arg: &str) -> Res {
    let (name, script, src) = load_script(arg)?;
    let mut store = FactStore::new(script.degree);
    let (dec, log) = replay_with_imports(&name, &script, &mut store, &src).map_err(replay_error)?;
    let hd = hd_form(&dec);
    let report = json!({
        "script": name,
        "degree": script.degree,
        "final": dec.to_string(),
        "final_hd": hd,
        "facts": store.len(),
        "audit": log,
    });
    Ok(emit(g, &report, || {
        let mut s = String::new();
        if !g.quiet {
            s.push_str(&format!("{log}\n\n"));
        }
        s.push_str(&format!("verified: {name} on Y_{}\nfinal: {dec}\n", script.degree));
        if let Some(hd) = &hd {
            s.push_str(&format!("final in {{h,D}}: {hd}\n"));
        }
        s
    }))
}

fn cmd_compare(g: &Global, left: &str, right: &str, degree: Option<&str>) -> Res {
    let (ln, ls, lsrc) = load_script(left)?;
    let (rn, rs, rsrc) = load_script(right)?;
    let d = match degree {
        Some(arg) => key_value(arg, "d")?,
        None => rs.degree,
    };
    let mut store = FactStore::new(d);
    let (l, llog) = replay_with_imports(&ln, &ls.with_degree(d), &mut store, &lsrc).map_err(replay_error)?;
    let (r, rlog) = replay_with_imports(&rn, &rs.with_degree(d), &mut store, &rsrc).map_err(replay_error)?;
    let eq = compare_and_solve(&l, &r, d).map_err(|e| match e {
        CompareError::TailMismatch { .. } => Output::fail(VERIFICATION_FAILED, format!("comparison failed: {e}\n")),
        other => input(other),
    })?;
    let report = json!({ "equivalence": eq, "left": l.to_string(), "right": r.to_string(), "audit": [llog, rlog] });
    Ok(emit(g, &report, || {
        let mut s = String::new();
        if !g.quiet {
            s.push_str(&format!("{llog}\n\n{rlog}\n\n"));
        }
        s.push_str(&format!("common tail: {}\n{}\n", eq.tail.join(", "), eq.statement));
        s
    }))
}

/// `(H-E)^3`, `H*E^2`, `K^3`, `(D-2h)*h*h`: a product of three classes.
fn parse_product(expr: &str, geom: &BlowupGeometry) -> Result<Vec<DivisorClass>, String> {
    let mut factors = Vec::new();
    let mut depth = 0;
    let mut start = 0;
    let chars: Vec<char> = expr.chars().filter(|c| !c.is_whitespace()).collect();
    let mut pieces = Vec::new();
    for (i, c) in chars.iter().enumerate() {
        match c {
            '(' => depth += 1,
            ')' => depth -= 1,
            '*' | '.' if depth == 0 => {
                pieces.push(chars[start..i].iter().collect::<String>());
                start = i + 1;
            }
            _ => {}
        }
    }
    pieces.push(chars[start..].iter().collect());
    for p in pieces {
        let (base, exp) = match p.rfind('^') {
            Some(k) if !p[k..].contains(')') => (
                p[..k].to_string(),
                p[k + 1..]
                    .parse::<usize>()
                    .map_err(|_| format!("bad exponent in `{p}`"))?,
            ),
            _ => (p.clone(), 1),
        };
        let inner = base
            .strip_prefix('(')
            .and_then(|b| b.strip_suffix(')'))
            .unwrap_or(&base);
        let class = if inner == "K" {
            geom.canonical()
        } else {
            let c: DivisorClass = inner.parse().map_err(|e| format!("`{inner}`: {e}"))?;
            geom.to_he(c).map_err(|e| e.to_string())?
        };
        factors.extend(std::iter::repeat_n(class, exp));
    }
    if factors.len() != 3 {
        return Err(format!("`{expr}` is a product of {} classes, need 3", factors.len()));
    }
    Ok(factors)
}

fn cmd_intersect(g: &Global, d: i64, expr: &str) -> Res {
    let geom = BlowupGeometry::new(d).map_err(input)?;
    let f = parse_product(expr, &geom).map_err(input)?;
    let value = geom.triple(f[0], f[1], f[2]).map_err(input)?;
    Ok(emit(g, &json!({ "d": d, "expr": expr, "value": value }), || {
        format!("{value}\n")
    }))
}

fn cmd_quiver(g: &Global, arg: &str) -> Res {
    let q = match builtin(arg) {
        Ok(q) => q,
        Err(_) => {
            let text = fs::read_to_string(arg)
                .map_err(|e| input(format!("{arg}: not a built-in quiver and unreadable ({e})")))?;
            parse_quiver(&text).map_err(input)?
        }
    };
    let r = path_basis(&q).map_err(input)?;
    Ok(emit(g, &r, || {
        let mut s = format!(
            "quiver: {}\ndimension: {}\nK0 rank: {}\n",
            r.quiver, r.dimension, r.k0_rank
        );
        if !r.basis.is_empty() {
            s.push_str(&format!("basis: {}\n", r.basis.join(", ")));
        }
        if let Some(c) = &r.cartan {
            s.push_str("cartan:\n");
            for row in c {
                let row: Vec<String> = row.iter().map(u64::to_string).collect();
                s.push_str(&format!("  [{}]\n", row.join(", ")));
            }
        }
        if let Some(cycle) = &r.repeatable_cycle {
            s.push_str(&format!("repeatable cycle: {cycle}\n"));
        }
        s
    }))
}

fn cmd_catalog(g: &Global, d: Option<i64>, variant: Option<&str>) -> Res {
    let list = match d {
        Some(d) => vec![lookup(d, variant).map_err(input)?],
        None => entries(),
    };
    Ok(emit(g, &list, || {
        let mut s = String::new();
        for e in &list {
            let name = e.variant.clone().unwrap_or(format!("V{}", e.d));
            s.push_str(&format!("{name}: {}\n", e.ambient));
            if let (Some(w), Some((a, b)), Some(c)) = (&e.w_fibration, e.curve_bidegree, &e.curve) {
                s.push_str(&format!("  W: {w}; curve of bidegree ({a},{b}): {c}\n"));
            }
            if let (Some(n), Some(sing)) = (e.max_nodes, &e.singularities) {
                s.push_str(&format!("  singularities: {sing}, at most {n} node(s)\n"));
            }
            s.push_str(&format!("  A_V: {}\n", e.a_v_shape));
        }
        s
    }))
}

fn cmd_gate(g: &Global, d: i64, nodes: i64) -> Res {
    let nodes = u32::try_from(nodes).map_err(|_| input("nodes must be nonnegative"))?;
    let v = kawamata_gate(d, nodes).map_err(input)?;
    Ok(emit(g, &v, || {
        let mut s = format!("d = {d}, {nodes} node(s): {}\n", v.statement);
        for (i, r) in v.reasons.iter().enumerate() {
            s.push_str(&format!("  {}. {r}\n", i + 1));
        }
        s
    }))
}

fn cmd_degenerations(g: &Global, d: i64, nodes: i64) -> Res {
    let nodes = u32::try_from(nodes).map_err(|_| input("nodes must be nonnegative"))?;
    let list = enumerate_degenerations(d, nodes).map_err(input)?;
    Ok(emit(g, &list, || {
        list.iter()
            .map(|p| {
                format!(
                    "nodes on C: {}, on Q: {}  (A_C: {}, A_Q: {})\n",
                    p.nodes_c, p.nodes_q, p.a_c, p.a_q
                )
            })
            .collect()
    }))
}

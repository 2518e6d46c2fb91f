//! Command-line front end. `run_command` is the whole program apart from
//! printing and exiting, so it can be tested in-process.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::covering::{verify_certificate, Certificate};
use crate::decomp::{build_block_tree, classify_symmetry, find_atoms, AtomKind, Center};
use crate::ivmatch::{parse_instance, solve_iv_matching, Incidence};
use crate::meta::{regular_cover_check, MetaError, MetaOptions};
use crate::multigraph::{parse_graph, serialize_graph, Multigraph};
use crate::oracle::{enumerate_quotients_of_order, oracle_regular_cover, OracleError};
use crate::perm::{automorphism_group, subgroup_class_counts, DEFAULT_BUDGET};
use crate::planar::{is_3_connected, map_automorphisms, planar_embed};
use crate::reduction::{catalog_base, reduction_series};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

pub const BUDGET_ENV: &str = "REGCOVER_BUDGET";

#[derive(Debug, Clone, PartialEq)]
pub struct CommandResult {
    pub code: i32,
    pub report: String,
    pub json: Option<Value>,
}

impl CommandResult {
    fn new(code: i32, report: String, json: Value) -> Self {
        CommandResult { code, report, json: Some(json) }
    }

    fn error(msg: impl std::fmt::Display) -> Self {
        CommandResult { code: EXIT_ERROR, report: format!("error: {msg}"), json: Some(json!({ "error": msg.to_string() })) }
    }

    /// Text to print: JSON when requested, otherwise the report.
    pub fn output(&self, as_json: bool) -> String {
        match (&self.json, as_json) {
            (Some(v), true) => serde_json::to_string_pretty(v).expect("json value serialises"),
            _ => self.report.clone(),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "regcover", version, about = "Decide whether a graph G regularly covers a graph H")]
pub struct Cli {
    /// Print machine-readable JSON instead of the report.
    #[arg(long, global = true)]
    pub json: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    pub jobs: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct CheckArgs {
    pub g: PathBuf,
    pub h: PathBuf,
    /// Write the certificate of a positive answer here.
    #[arg(long)]
    pub certificate: Option<PathBuf>,
    /// Also run the exhaustive search and compare verdicts.
    #[arg(long)]
    pub oracle_verify: bool,
    /// Search budget; REGCOVER_BUDGET overrides it.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Only try core positions inside this block of H.
    #[arg(long)]
    pub core: Option<usize>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Structural test for planar G, falling back to the oracle otherwise.
    Check(CheckArgs),
    /// Exhaustive test through the subgroups of Aut(G).
    Oracle(CheckArgs),
    /// Check a certificate for G and H.
    VerifyCert { g: PathBuf, h: PathBuf, certificate: PathBuf },
    /// Automorphism group order (and map group for 3-connected planar G).
    Aut {
        g: PathBuf,
        /// Also count conjugacy classes of subgroups per order.
        #[arg(long)]
        classes: bool,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Block tree centre and atoms.
    Atoms { g: PathBuf },
    /// Reduction series and catalog.
    Reduce { g: PathBuf },
    /// Pairwise non-isomorphic quotients of order k.
    Quotients {
        g: PathBuf,
        #[arg(long)]
        k: usize,
        /// Write each quotient to DIR/q<i>.graph instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        budget: Option<usize>,
    },
    /// Solve an IV-Matching instance file.
    Ivmatch {
        file: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
    },
}

/// The budget in effect: the environment wins over the flag.
pub fn effective_budget(flag: Option<usize>) -> Result<usize, String> {
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| format!("{BUDGET_ENV} is not a number: {v}")),
        Err(_) => Ok(flag.unwrap_or(DEFAULT_BUDGET)),
    }
}

fn read_graph(p: &Path) -> Result<Multigraph, String> {
    let text = std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
    parse_graph(&text).map_err(|e| format!("{}: {e}", p.display()))
}

fn graphs(a: &CheckArgs) -> Result<(Multigraph, Multigraph), String> {
    Ok((read_graph(&a.g)?, read_graph(&a.h)?))
}

/// Parse arguments and run; never panics on bad input.
pub fn run_command<I, T>(argv: I) -> (CommandResult, bool)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_YES };
            return (CommandResult { code, report: e.to_string(), json: None }, false);
        }
    };
    if cli.jobs > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs).build_global();
    }
    (run(&cli.command), cli.json)
}

pub fn run(cmd: &Command) -> CommandResult {
    let res = match cmd {
        Command::Check(a) => check(a, false),
        Command::Oracle(a) => check(a, true),
        Command::VerifyCert { g, h, certificate } => verify(g, h, certificate),
        Command::Aut { g, classes, budget } => aut(g, *classes, *budget),
        Command::Atoms { g } => atoms(g),
        Command::Reduce { g } => reduce(g),
        Command::Quotients { g, k, out, budget } => quotients(g, *k, out.as_deref(), *budget),
        Command::Ivmatch { file, budget } => ivmatch(file, *budget),
    };
    res.unwrap_or_else(CommandResult::error)
}

enum Verdict {
    Yes(Certificate),
    No,
}

fn run_oracle(g: &Multigraph, h: &Multigraph, budget: usize) -> Result<Verdict, String> {
    match oracle_regular_cover(g, h, budget) {
        Ok(Some(c)) => Ok(Verdict::Yes(c)),
        Ok(None) => Ok(Verdict::No),
        Err(OracleError::TooLarge(b)) => Err(format!("oracle exceeds the budget of {b}")),
        Err(e) => Err(e.to_string()),
    }
}

fn check(a: &CheckArgs, oracle_only: bool) -> Result<CommandResult, String> {
    let (g, h) = graphs(a)?;
    let budget = effective_budget(a.budget)?;
    let mut info = json!({});
    let (verdict, path) = if oracle_only {
        (run_oracle(&g, &h, budget)?, "oracle")
    } else {
        let opts = MetaOptions { budget, core: a.core, ..Default::default() };
        match regular_cover_check(&g, &h, &opts) {
            Ok(out) => {
                info["stats"] = serde_json::to_value(&out.stats).map_err(|e| e.to_string())?;
                (out.certificate.map_or(Verdict::No, Verdict::Yes), "meta")
            }
            Err(MetaError::NonPlanarInput) => (run_oracle(&g, &h, budget)?, "oracle"),
            Err(MetaError::Disconnected) => (Verdict::No, "meta"),
            Err(e) => return Err(e.to_string()),
        }
    };
    let mut report = String::new();
    let code = match &verdict {
        Verdict::Yes(c) => {
            verify_certificate(&g, &h, c).map_err(|e| format!("certificate failed verification: {e}"))?;
            report.push_str(&format!("yes: G regularly covers H (k = {}, via {path})\n", c.k));
            if let Some(p) = &a.certificate {
                std::fs::write(p, c.to_json()).map_err(|e| format!("{}: {e}", p.display()))?;
                report.push_str(&format!("certificate written to {}\n", p.display()));
            }
            info["k"] = json!(c.k);
            EXIT_YES
        }
        Verdict::No => {
            report.push_str(&format!("no: G does not regularly cover H (via {path})\n"));
            EXIT_NO
        }
    };
    info["answer"] = json!(code == EXIT_YES);
    info["path"] = json!(path);
    if a.oracle_verify && path != "oracle" {
        let o = run_oracle(&g, &h, budget)?;
        let agree = matches!(o, Verdict::Yes(_)) == (code == EXIT_YES);
        info["oracle_agrees"] = json!(agree);
        report.push_str(if agree { "oracle agrees\n" } else { "ORACLE DISAGREES\n" });
        if !agree {
            return Ok(CommandResult::new(EXIT_ERROR, report, info));
        }
    }
    Ok(CommandResult::new(code, report, info))
}

fn verify(g: &Path, h: &Path, cert: &Path) -> Result<CommandResult, String> {
    let (g, h) = (read_graph(g)?, read_graph(h)?);
    let text = std::fs::read_to_string(cert).map_err(|e| format!("{}: {e}", cert.display()))?;
    let c = Certificate::from_json(&text).map_err(|e| format!("{}: {e}", cert.display()))?;
    Ok(match verify_certificate(&g, &h, &c) {
        Ok(()) => CommandResult::new(EXIT_YES, format!("valid certificate (k = {})\n", c.k), json!({ "valid": true, "k": c.k })),
        Err(e) => CommandResult::new(EXIT_NO, format!("invalid certificate: {e}\n"), json!({ "valid": false, "reason": e.to_string() })),
    })
}

fn aut(g: &Path, classes: bool, budget: Option<usize>) -> Result<CommandResult, String> {
    let g = read_graph(g)?;
    let budget = effective_budget(budget)?;
    let grp = automorphism_group(&g, budget).map_err(|e| e.to_string())?;
    let mut report = format!("|Aut(G)| = {}\n", grp.order());
    let mut info = json!({ "order": grp.order() });
    if is_3_connected(&g) {
        if let Ok(rs) = planar_embed(&g) {
            let m = map_automorphisms(&g, &rs);
            report.push_str(&format!("map automorphisms: {}\n", m.order()));
            info["map_order"] = json!(m.order());
        }
    }
    if classes {
        let counts = subgroup_class_counts(&grp, budget).map_err(|e| e.to_string())?;
        report.push_str("subgroup classes (order: count):");
        for (o, c) in &counts {
            report.push_str(&format!(" {o}:{c}"));
        }
        report.push('\n');
        info["classes"] = json!(counts);
    }
    Ok(CommandResult::new(EXIT_YES, report, info))
}

fn kind_name(k: AtomKind) -> &'static str {
    match k {
        AtomKind::Block => "block",
        AtomKind::Proper => "proper",
        AtomKind::Dipole => "dipole",
    }
}

fn atoms(g: &Path) -> Result<CommandResult, String> {
    let g = read_graph(g)?;
    if !g.is_connected() {
        return Err("graph is disconnected".into());
    }
    let t = build_block_tree(&g);
    let center = t.center();
    let mut report = match center {
        Center::Block(b) => format!("central block {b} ({} vertices)\n", t.blocks[b].vertices.len()),
        Center::Vertex(v) => format!("central articulation {}\n", g.vertex_id(v)),
    };
    let ids = |vs: &[usize]| vs.iter().map(|&v| g.vertex_id(v).to_string()).collect::<Vec<_>>();
    let mut list = Vec::new();
    if matches!(center, Center::Block(_)) {
        for a in find_atoms(&g, center) {
            let sym = if a.kind == AtomKind::Block { None } else { Some(classify_symmetry(&g, &a, g.max_edge_color() + 1)) };
            report.push_str(&format!(
                "{} atom: boundary {:?}, interior {:?}, {} edges{}\n",
                kind_name(a.kind),
                ids(&a.boundary),
                ids(&a.interior),
                a.edges.len(),
                sym.map(|s| format!(", {s:?}").to_lowercase()).unwrap_or_default()
            ));
            list.push(json!({
                "kind": kind_name(a.kind),
                "boundary": ids(&a.boundary),
                "interior": ids(&a.interior),
                "edges": a.edges.iter().map(|&e| g.edge(e).id.clone()).collect::<Vec<_>>(),
                "symmetry": sym,
            }));
        }
    }
    Ok(CommandResult::new(EXIT_YES, report, json!({ "center": center, "atoms": list })))
}

fn reduce(g: &Path) -> Result<CommandResult, String> {
    let g = read_graph(g)?;
    let s = reduction_series(&g, catalog_base(&[&g])).map_err(|e| e.to_string())?;
    let mut report = String::new();
    let mut levels = Vec::new();
    for (i, x) in s.graphs.iter().enumerate() {
        report.push_str(&format!("G{i}: {} vertices, {} edges\n", x.num_vertices(), x.num_edges()));
        levels.push(json!({ "vertices": x.num_vertices(), "edges": x.num_edges() }));
    }
    report.push_str(&format!("catalog: {} entries\n", s.catalog.len()));
    for e in &s.catalog.entries {
        let c = &e.code;
        report.push_str(&format!(
            "  colour {}: {} atom, {:?}, level {}, vhat {}, ehat {}\n",
            c.color,
            kind_name(c.kind),
            c.symmetry,
            c.level,
            c.vhat,
            c.ehat
        ));
    }
    report.push_str(&format!("top graph:\n{}", serialize_graph(s.top())));
    let codes: Vec<_> = s.catalog.entries.iter().map(|e| &e.code).collect();
    Ok(CommandResult::new(
        EXIT_YES,
        report,
        json!({ "levels": levels, "catalog": codes, "top": serialize_graph(s.top()) }),
    ))
}

fn quotients(g: &Path, k: usize, out: Option<&Path>, budget: Option<usize>) -> Result<CommandResult, String> {
    let g = read_graph(g)?;
    let budget = effective_budget(budget)?;
    let qs = enumerate_quotients_of_order(&g, k, budget).map_err(|e| e.to_string())?;
    let mut report = format!("{} quotient classes of order {k}\n", qs.len());
    let mut files = Vec::new();
    for (i, q) in qs.iter().enumerate() {
        let text = serialize_graph(q);
        match out {
            Some(dir) => {
                std::fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
                let p = dir.join(format!("q{i}.graph"));
                std::fs::write(&p, &text).map_err(|e| format!("{}: {e}", p.display()))?;
                files.push(p.display().to_string());
            }
            None => report.push_str(&format!("# quotient {i}\n{text}")),
        }
    }
    let graphs: Vec<String> = qs.iter().map(serialize_graph).collect();
    Ok(CommandResult::new(EXIT_YES, report, json!({ "k": k, "count": qs.len(), "graphs": graphs, "files": files })))
}

fn ivmatch(file: &Path, budget: Option<usize>) -> Result<CommandResult, String> {
    let text = std::fs::read_to_string(file).map_err(|e| format!("{}: {e}", file.display()))?;
    let inst = parse_instance(&text).map_err(|e| format!("{}: {e}", file.display()))?;
    let budget = effective_budget(budget)? as u64;
    match solve_iv_matching(&inst, budget).map_err(|e| e.to_string())? {
        Some(sol) => {
            let mut report = String::from("feasible\n");
            let name = |v: (usize, usize)| format!("{}[{}]", inst.clusters[v.0].id, v.1);
            let mut edges = Vec::new();
            for &(x, y, k) in &sol.edges {
                let kind = if k == Incidence::Half { "half" } else { "loop" };
                report.push_str(&format!("  {} - {} {kind}\n", name(x), name(y)));
                edges.push(json!([name(x), name(y), kind]));
            }
            Ok(CommandResult::new(EXIT_YES, report, json!({ "feasible": true, "edges": edges })))
        }
        None => Ok(CommandResult::new(EXIT_NO, "infeasible\n".into(), json!({ "feasible": false }))),
    }
}

//! The `opetope` command-line workbench. All subcommand logic lives here so
//! integration tests can drive it without spawning a process; `main` is a
//! thin wrapper.
//!
//! Exit codes: 0 success, 1 validation failure, 2 usage or parse error.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use opetopes::axioms::{
    check_boundary, check_opetopic, check_pasting_diagram, AxiomReport,
};
use opetopes::calculus::{degen, graft, shift, subst};
use opetopes::codec::{classify_diamond, Codec, OpetopeCode};
use opetopes::construct::{
    boundary, boundary_of_pd, fill, pd_target, source_horn, source_horn_of_pd, Boundary,
    PastingDiagram,
};
use opetopes::document::{self, Document, Payload};
use opetopes::enumerate::{count_table, enumerate_opetopes, oracle_enumerate, SizeBudget};
use opetopes::graph::find_isomorphism;
use opetopes::graph::OpetopicGraph;
use opetopes::normalize::hom;
use opetopes::render::{ascii_tree, dot_ograph, dot_pdgraph};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser)]
#[command(
    name = "opetope",
    about = "Workbench for opetopes and opetopic sets as finite presented categories",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit machine-readable JSON instead of plain text.
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Text)]
    format: OutputFormat,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Text,
    Json,
}

#[derive(Args)]
struct FileArg {
    /// Input document (.ost).
    file: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Check the axioms of a document; exit 0 iff everything passes.
    Validate(FileArg),
    /// List the hom-set between two cells as normal forms.
    Hom {
        #[command(flatten)]
        file: FileArg,
        from: String,
        to: String,
    },
    /// Slice an opetopic set at a cell.
    Slice {
        #[command(flatten)]
        file: FileArg,
        cell: String,
    },
    /// Boundary of an opetope or pasting diagram.
    Boundary(FileArg),
    /// Fill a boundary to an opetope.
    Fill(FileArg),
    /// Source horn of a boundary, opetope, or pasting diagram.
    Horn(FileArg),
    /// Target opetope of a pasting diagram.
    Target(FileArg),
    /// The one-node pasting diagram on an opetope.
    Shift(FileArg),
    /// The degenerate pasting diagram on an opetope.
    Degen(FileArg),
    /// Substitute diagrams into the top cells of a base diagram.
    Subst {
        /// Base pasting diagram.
        base: PathBuf,
        /// Assignments cell=file.ost, one per substituted top cell.
        #[arg(value_parser = parse_assignment)]
        assignments: Vec<(String, PathBuf)>,
    },
    /// Graft diagrams onto the leaves of a base diagram.
    Graft {
        base: PathBuf,
        #[arg(value_parser = parse_assignment)]
        assignments: Vec<(String, PathBuf)>,
    },
    /// Canonical code of an opetope.
    Encode(FileArg),
    /// Decode a code (literal or opetope_code document) to an opetopic set.
    Decode {
        /// A code literal like "{nd(o)()}" or a path to a document.
        code: String,
    },
    /// Classify the diamonds of an opetopic set into the four families.
    Classify(FileArg),
    /// Enumerate opetope codes by degree.
    Enumerate {
        #[arg(long)]
        degree: u32,
        /// Keep only codes with exactly this many nodes.
        #[arg(long)]
        nodes: Option<usize>,
        #[arg(long, default_value_t = 4)]
        max_nodes: usize,
        #[arg(long, default_value_t = 4)]
        max_arity: usize,
        #[arg(long, default_value_t = 64)]
        max_cells: usize,
        /// Print only the count.
        #[arg(long)]
        count: bool,
    },
    /// Brute-force enumeration on a cell skeleton, e.g. --profile 3,3,1.
    OracleEnumerate {
        #[arg(long, value_delimiter = ',')]
        profile: Vec<usize>,
        #[arg(long)]
        count: bool,
    },
    /// Count table per degree and source count, cross-checked.
    Counts {
        #[arg(long)]
        max_degree: u32,
        #[arg(long, default_value_t = 3)]
        max_nodes: usize,
        #[arg(long, default_value_t = 3)]
        max_arity: usize,
        #[arg(long, default_value_t = 24)]
        max_cells: usize,
    },
    /// Find an isomorphism between two opetopic sets.
    Iso { left: PathBuf, right: PathBuf },
    /// Render a document: ASCII tree for diagrams and codes, DOT graphs.
    Render {
        #[command(flatten)]
        file: FileArg,
        /// Emit DOT instead of ASCII.
        #[arg(long)]
        dot: bool,
        /// For opetopic sets: render the source graph at this cell.
        #[arg(long)]
        cell: Option<String>,
    },
    /// Print one of the built-in example documents.
    Fixture {
        /// One of: pt, arr, loop, tri1, tri2, tri3, op3.
        name: String,
    },
}

fn parse_assignment(s: &str) -> Result<(String, PathBuf), String> {
    let (cell, path) = s
        .split_once('=')
        .ok_or_else(|| format!("expected cell=file, got {s:?}"))?;
    Ok((cell.to_string(), PathBuf::from(path)))
}

/// Run with the given arguments; returns the exit code and the output text.
pub fn run(args: &[&str]) -> (i32, String) {
    let cli = match Cli::try_parse_from(std::iter::once(&"opetope").chain(args.iter())) {
        Ok(cli) => cli,
        Err(e) => return (EXIT_USAGE, e.to_string()),
    };
    let mut out = String::new();
    match dispatch(&cli, &mut out) {
        Ok(code) => (code, out),
        Err(e) => {
            let code = match e {
                opetopes::Error::ParseError(_) | opetopes::Error::VersionError(_) => EXIT_USAGE,
                _ => EXIT_INVALID,
            };
            let text = if cli.format == OutputFormat::Json {
                let mut t = serde_json::to_string_pretty(&serde_json::json!({
                    "ok": false,
                    "error": e.to_string(),
                }))
                .unwrap();
                t.push('\n');
                t
            } else {
                format!("error: {e}\n")
            };
            (code, text)
        }
    }
}

fn load(path: &PathBuf) -> opetopes::Result<Document> {
    let text = fs::read_to_string(path)
        .map_err(|e| opetopes::Error::ParseError(format!("{}: {e}", path.display())))?;
    document::parse(&text)
}

fn fuel_override() -> Option<u64> {
    std::env::var("OPETOPE_FUEL_OVERRIDE")
        .ok()
        .and_then(|v| v.parse().ok())
}

fn load_graph(path: &PathBuf) -> opetopes::Result<OpetopicGraph> {
    match load(path)?.payload()? {
        Payload::OpetopicSet(mut g) => {
            g.fuel_override = fuel_override();
            Ok(g)
        }
        Payload::Code(c) => Ok(Codec::new().decode(&c)?.graph),
        _ => Err(opetopes::Error::ParseError(
            "expected an opetopic_set document".into(),
        )),
    }
}

fn load_pd(path: &PathBuf) -> opetopes::Result<PastingDiagram> {
    match load(path)?.payload()? {
        Payload::PastingDiagram(mut p) => {
            p.graph.fuel_override = fuel_override();
            Ok(p)
        }
        _ => Err(opetopes::Error::ParseError(
            "expected a pasting_diagram document".into(),
        )),
    }
}

fn load_boundary(path: &PathBuf) -> opetopes::Result<Boundary> {
    match load(path)?.payload()? {
        Payload::Boundary(mut b) => {
            b.graph.fuel_override = fuel_override();
            Ok(b)
        }
        _ => Err(opetopes::Error::ParseError(
            "expected a boundary document".into(),
        )),
    }
}

fn report_output(report: &AxiomReport, format: OutputFormat, out: &mut String) -> i32 {
    match format {
        OutputFormat::Text => {
            for line in report.lines() {
                let _ = writeln!(out, "{line}");
            }
            let _ = writeln!(
                out,
                "{}",
                if report.all_pass() { "all pass" } else { "INVALID" }
            );
        }
        OutputFormat::Json => {
            let failures: Vec<serde_json::Value> = report
                .failures()
                .map(|(l, w)| serde_json::json!({"axiom": l.to_string(), "witness": w}))
                .collect();
            let v = serde_json::json!({
                "ok": report.all_pass(),
                "structural": report.structural,
                "failures": failures,
            });
            *out = serde_json::to_string_pretty(&v).unwrap();
            out.push('\n');
        }
    }
    if report.all_pass() {
        EXIT_OK
    } else {
        EXIT_INVALID
    }
}

fn emit_document(doc: &Document, out: &mut String) -> i32 {
    out.push_str(&document::serialize(doc));
    EXIT_OK
}

fn lookup_cell(g: &OpetopicGraph, name: &str) -> opetopes::Result<opetopes::CellId> {
    g.cell_by_name(name)
        .ok_or_else(|| opetopes::Error::ParseError(format!("unknown cell {name:?}")))
}

fn dispatch(cli: &Cli, out: &mut String) -> opetopes::Result<i32> {
    let format = cli.format;
    match &cli.command {
        Command::Validate(f) => {
            let report = match load(&f.file)?.payload()? {
                Payload::OpetopicSet(mut g) => {
                    g.fuel_override = fuel_override();
                    check_opetopic(&g)
                }
                Payload::Boundary(mut b) => {
                    b.graph.fuel_override = fuel_override();
                    check_boundary(&b)
                }
                Payload::PastingDiagram(mut p) => {
                    p.graph.fuel_override = fuel_override();
                    check_pasting_diagram(&p)
                }
                Payload::Code(c) => check_opetopic(&Codec::new().decode(&c)?.graph),
                Payload::Morphism(m) => {
                    let mut r = AxiomReport::default();
                    r.structural = opetopes::graph::validate_morphism(&m);
                    r
                }
            };
            Ok(report_output(&report, format, out))
        }
        Command::Hom { file, from, to } => {
            let g = load_graph(&file.file)?;
            let homs = hom(&g, lookup_cell(&g, from)?, lookup_cell(&g, to)?)?;
            match format {
                OutputFormat::Text => {
                    for nf in &homs {
                        let _ = writeln!(out, "{}", nf.render(&g));
                    }
                    let _ = writeln!(out, "{} arrow(s)", homs.len());
                }
                OutputFormat::Json => {
                    let v = serde_json::json!({
                        "count": homs.len(),
                        "arrows": homs.iter().map(|nf| nf.render(&g)).collect::<Vec<_>>(),
                    });
                    *out = serde_json::to_string_pretty(&v).unwrap();
                    out.push('\n');
                }
            }
            Ok(EXIT_OK)
        }
        Command::Slice { file, cell } => {
            let g = load_graph(&file.file)?;
            let (sl, _) = opetopes::construct::slice(&g, lookup_cell(&g, cell)?)?;
            Ok(emit_document(&document::opetopic_set_document(&sl), out))
        }
        Command::Boundary(f) => {
            let b = match load(&f.file)?.payload()? {
                Payload::OpetopicSet(g) => boundary(&g)?,
                Payload::PastingDiagram(p) => boundary_of_pd(&p).0,
                Payload::Code(c) => boundary(&Codec::new().decode(&c)?.graph)?,
                _ => {
                    return Err(opetopes::Error::ParseError(
                        "boundary expects an opetope or pasting diagram".into(),
                    ))
                }
            };
            Ok(emit_document(&document::boundary_document(&b), out))
        }
        Command::Fill(f) => {
            let (g, _) = fill(&load_boundary(&f.file)?)?;
            Ok(emit_document(&document::opetopic_set_document(&g), out))
        }
        Command::Horn(f) => {
            let horn = match load(&f.file)?.payload()? {
                Payload::Boundary(b) => source_horn(&b)?,
                Payload::OpetopicSet(g) => source_horn(&boundary(&g)?)?,
                Payload::PastingDiagram(p) => source_horn_of_pd(&p)?,
                Payload::Code(c) => source_horn(&boundary(&Codec::new().decode(&c)?.graph)?)?,
                _ => {
                    return Err(opetopes::Error::ParseError(
                        "horn expects a boundary, opetope, or pasting diagram".into(),
                    ))
                }
            };
            Ok(emit_document(&document::pasting_diagram_document(&horn), out))
        }
        Command::Target(f) => {
            let (g, _) = pd_target(&load_pd(&f.file)?)?;
            Ok(emit_document(&document::opetopic_set_document(&g), out))
        }
        Command::Shift(f) => {
            let pd = shift(&load_graph(&f.file)?)?;
            Ok(emit_document(&document::pasting_diagram_document(&pd), out))
        }
        Command::Degen(f) => {
            let pd = degen(&load_graph(&f.file)?)?;
            Ok(emit_document(&document::pasting_diagram_document(&pd), out))
        }
        Command::Subst { base, assignments } => {
            let base = load_pd(base)?;
            let mut parts = BTreeMap::new();
            for (cell, path) in assignments {
                parts.insert(lookup_cell(&base.graph, cell)?, load_pd(path)?);
            }
            let outcome = subst(&base, &parts)?;
            Ok(emit_document(
                &document::pasting_diagram_document(&outcome.pd),
                out,
            ))
        }
        Command::Graft { base, assignments } => {
            let base = load_pd(base)?;
            let mut parts = BTreeMap::new();
            for (cell, path) in assignments {
                parts.insert(lookup_cell(&base.graph, cell)?, load_pd(path)?);
            }
            let outcome = graft(&base, &parts)?;
            Ok(emit_document(
                &document::pasting_diagram_document(&outcome.pd),
                out,
            ))
        }
        Command::Encode(f) => {
            let code = Codec::new().encode(&load_graph(&f.file)?)?;
            match format {
                OutputFormat::Text => {
                    let _ = writeln!(out, "{code}");
                }
                OutputFormat::Json => {
                    *out = document::serialize(&document::code_document(&code));
                }
            }
            Ok(EXIT_OK)
        }
        Command::Decode { code } => {
            let code = if code.ends_with(".ost") {
                match load(&PathBuf::from(code))?.payload()? {
                    Payload::Code(c) => c,
                    _ => {
                        return Err(opetopes::Error::ParseError(
                            "decode expects an opetope_code document".into(),
                        ))
                    }
                }
            } else {
                OpetopeCode::parse(code)?
            };
            let d = Codec::new().decode(&code)?;
            Ok(emit_document(&document::opetopic_set_document(&d.graph), out))
        }
        Command::Classify(f) => {
            let g = load_graph(&f.file)?;
            let mut rows = Vec::new();
            for d in g.diamonds() {
                let family = classify_diamond(&g, d)?;
                rows.push((g.cell_name(g.arrow(d.het_inner).dom).to_string(), family));
            }
            rows.sort();
            match format {
                OutputFormat::Text => {
                    for (at, family) in &rows {
                        let _ = writeln!(out, "{at}: {family}");
                    }
                }
                OutputFormat::Json => {
                    let v: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|(at, f)| serde_json::json!({"at": at, "family": f.to_string()}))
                        .collect();
                    *out =
                        serde_json::to_string_pretty(&serde_json::json!({ "diamonds": v })).unwrap();
                    out.push('\n');
                }
            }
            Ok(EXIT_OK)
        }
        Command::Enumerate {
            degree,
            nodes,
            max_nodes,
            max_arity,
            max_cells,
            count,
        } => {
            let mut codec = Codec::new();
            let budget = SizeBudget {
                degree: *degree,
                max_top_cells: nodes.map(|n| n.max(*max_nodes)).unwrap_or(*max_nodes),
                max_arity: *max_arity,
                max_total_cells: *max_cells,
            };
            let mut codes: Vec<OpetopeCode> =
                enumerate_opetopes(&mut codec, &budget)?.into_iter().collect();
            if let Some(k) = nodes {
                codes.retain(|c| {
                    if c.is_point() {
                        *k == 0
                    } else {
                        c.tree().map(|t| t.node_count() == *k).unwrap_or(false)
                    }
                });
            }
            match format {
                OutputFormat::Text => {
                    if *count {
                        let _ = writeln!(out, "{}", codes.len());
                    } else {
                        for c in &codes {
                            let _ = writeln!(out, "{c}");
                        }
                    }
                }
                OutputFormat::Json => {
                    let v = serde_json::json!({
                        "count": codes.len(),
                        "codes": codes.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
                    });
                    *out = serde_json::to_string_pretty(&v).unwrap();
                    out.push('\n');
                }
            }
            Ok(EXIT_OK)
        }
        Command::OracleEnumerate { profile, count } => {
            let graphs = oracle_enumerate(profile)?;
            let mut codec = Codec::new();
            let mut codes: Vec<String> = graphs
                .iter()
                .map(|g| codec.encode(g).map(|c| c.to_string()))
                .collect::<opetopes::Result<_>>()?;
            codes.sort();
            match format {
                OutputFormat::Text => {
                    if *count {
                        let _ = writeln!(out, "{}", codes.len());
                    } else {
                        for c in &codes {
                            let _ = writeln!(out, "{c}");
                        }
                    }
                }
                OutputFormat::Json => {
                    let v = serde_json::json!({"count": codes.len(), "codes": codes});
                    *out = serde_json::to_string_pretty(&v).unwrap();
                    out.push('\n');
                }
            }
            Ok(EXIT_OK)
        }
        Command::Counts {
            max_degree,
            max_nodes,
            max_arity,
            max_cells,
        } => {
            let mut codec = Codec::new();
            let budget = SizeBudget {
                degree: *max_degree,
                max_top_cells: *max_nodes,
                max_arity: *max_arity,
                max_total_cells: *max_cells,
            };
            let rows = count_table(&mut codec, *max_degree, &budget)?;
            match format {
                OutputFormat::Text => {
                    let _ = writeln!(out, "degree  sources  count  oracle  match");
                    for r in &rows {
                        let oracle = r
                            .oracle_count
                            .map(|c| c.to_string())
                            .unwrap_or_else(|| "-".into());
                        let matched = match r.agreed {
                            Some(true) => "yes",
                            Some(false) => "NO",
                            None => "-",
                        };
                        let _ = writeln!(
                            out,
                            "{:<7} {:<8} {:<6} {:<7} {matched}",
                            r.degree, r.top_cells, r.count, oracle
                        );
                    }
                }
                OutputFormat::Json => {
                    let v: Vec<serde_json::Value> = rows
                        .iter()
                        .map(|r| {
                            serde_json::json!({
                                "degree": r.degree,
                                "sources": r.top_cells,
                                "count": r.count,
                                "oracle": r.oracle_count,
                                "match": r.agreed,
                            })
                        })
                        .collect();
                    *out =
                        serde_json::to_string_pretty(&serde_json::json!({ "rows": v })).unwrap();
                    out.push('\n');
                }
            }
            let mismatch = rows.iter().any(|r| r.agreed == Some(false));
            Ok(if mismatch { EXIT_INVALID } else { EXIT_OK })
        }
        Command::Iso { left, right } => {
            let g = load_graph(left)?;
            let h = load_graph(right)?;
            match find_isomorphism(&g, &h)? {
                Some(m) => {
                    match format {
                        OutputFormat::Text => {
                            for c in g.cell_ids() {
                                let _ = writeln!(
                                    out,
                                    "{} -> {}",
                                    g.cell_name(c),
                                    h.cell_name(m.apply(c))
                                );
                            }
                        }
                        OutputFormat::Json => {
                            *out = document::serialize(&document::morphism_document(&m));
                        }
                    }
                    Ok(EXIT_OK)
                }
                None => {
                    match format {
                        OutputFormat::Text => {
                            let _ = writeln!(out, "no isomorphism");
                        }
                        OutputFormat::Json => {
                            *out = serde_json::to_string_pretty(
                                &serde_json::json!({"ok": false, "isomorphism": null}),
                            )
                            .unwrap();
                            out.push('\n');
                        }
                    }
                    Ok(EXIT_INVALID)
                }
            }
        }
        Command::Render { file, dot, cell } => {
            let mut codec = Codec::new();
            match load(&file.file)?.payload()? {
                Payload::PastingDiagram(p) => {
                    if *dot {
                        out.push_str(&dot_pdgraph(&p));
                    } else {
                        let (tree, _) = codec.pd_to_tree(&p)?;
                        out.push_str(&ascii_tree(&tree));
                    }
                }
                Payload::Code(c) => {
                    if c.is_point() {
                        out.push_str("o\n");
                    } else {
                        out.push_str(&ascii_tree(&c.tree()?));
                    }
                }
                Payload::OpetopicSet(g) => {
                    if let Some(cell) = cell {
                        out.push_str(&dot_ograph(&g, lookup_cell(&g, cell)?));
                    } else {
                        let horn = source_horn(&boundary(&g)?)?;
                        if *dot {
                            out.push_str(&dot_pdgraph(&horn));
                        } else {
                            let (tree, _) = codec.pd_to_tree(&horn)?;
                            out.push_str(&ascii_tree(&tree));
                        }
                    }
                }
                _ => {
                    return Err(opetopes::Error::ParseError(
                        "render expects a diagram, code, or opetopic set".into(),
                    ))
                }
            }
            Ok(EXIT_OK)
        }
        Command::Fixture { name } => {
            let doc = builtin_fixture(name).ok_or_else(|| {
                opetopes::Error::ParseError(format!("unknown fixture {name:?}"))
            })?;
            Ok(emit_document(&doc, out))
        }
    }
}

/// The built-in example documents.
pub fn builtin_fixture(name: &str) -> Option<Document> {
    use opetopes::fixtures;
    let g = match name {
        "pt" => fixtures::pt(),
        "arr" => fixtures::arr(),
        "loop" => fixtures::loop_(),
        "tri1" => fixtures::tri(1),
        "tri2" => fixtures::tri(2),
        "tri3" => fixtures::tri(3),
        "op3" => fixtures::op3(),
        _ => return None,
    };
    Some(document::opetopic_set_document(&g))
}

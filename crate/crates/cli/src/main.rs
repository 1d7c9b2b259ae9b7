use std::fmt::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};

use khwall::atlas::{self, AtlasEntry, NeighborPolicy};
use khwall::complex::{homology_with, BigradedGroups, Coefficients};
use khwall::khovanov::{build_ckh_limited, crossing_split_limited, DEFAULT_MAX_STATES};
use khwall::wallcross::{audit_subcategory, finite_type_report, raw_skein, wall_morphism_limited, FiniteTypeReport};
use khwall::{h_expansion, jones_unnormalized, parse_pd, KnotDiagram};

#[derive(Parser, Debug)]
#[command(
    name = "khwall",
    version,
    about = "Khovanov complexes, wall maps and singular-knot cones"
)]
struct Cli {
    #[command(subcommand)]
    verb: Verb,

    /// Output rendering.
    #[arg(long, value_enum, default_value_t = Format::Table, global = true)]
    format: Format,

    /// Knot table used to resolve names (defaults to $KH_TABLE, then the bundled table).
    #[arg(long, global = true)]
    table: Option<PathBuf>,

    /// Refuse cubes with more than this many states.
    #[arg(long, default_value_t = DEFAULT_MAX_STATES, global = true)]
    max_states: u64,
}

#[derive(Subcommand, Debug)]
enum Verb {
    /// Unnormalized Jones polynomial.
    Jones { input: String },
    /// Bigraded Khovanov homology.
    Homology {
        input: String,
        /// Use Z/2 coefficients.
        #[arg(long)]
        z2: bool,
    },
    /// Split the complex at one crossing and check the block shape.
    Split {
        input: String,
        #[arg(long)]
        crossing: usize,
    },
    /// Build the wall map at one crossing and check it is a chain map.
    Wall {
        input: String,
        #[arg(long)]
        crossing: usize,
    },
    /// Homology of the singular complex with the given double points.
    Cone {
        input: String,
        #[arg(long, value_delimiter = ',', required = true)]
        double: Vec<usize>,
    },
    /// Cone acyclicity over every stratum of small table diagrams.
    Audit {
        #[arg(long, default_value_t = 2)]
        max_crossings: usize,
        #[arg(long, default_value_t = 1)]
        codim: usize,
    },
    /// Homology agreement within each knot's diagrams and their Reidemeister neighbors.
    Invariance {
        /// Check every neighbor instead of one per diagram.
        #[arg(long)]
        all_neighbors: bool,
    },
    /// Coefficients of the Jones polynomial at q = e^h.
    Expand {
        input: String,
        #[arg(long, default_value_t = 4)]
        order: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Records,
}

/// Either a rendered report with a check verdict, or an input problem.
struct Output {
    text: String,
    ok: bool,
}

impl Output {
    fn pass(text: String) -> Self {
        Self { text, ok: true }
    }
}

type Record = Vec<(&'static str, String)>;

fn render_records(records: &[Record]) -> String {
    let mut out = String::new();
    for (n, r) in records.iter().enumerate() {
        if n > 0 {
            out.push('\n');
        }
        for (k, v) in r {
            let _ = writeln!(out, "{k}: {v}");
        }
    }
    out
}

fn render_table(records: &[Record]) -> String {
    let Some(first) = records.first() else {
        return String::new();
    };
    let headers: Vec<&str> = first.iter().map(|(k, _)| *k).collect();
    let mut widths: Vec<usize> = headers.iter().map(|h| h.len()).collect();
    for r in records {
        for (w, (_, v)) in widths.iter_mut().zip(r) {
            *w = (*w).max(v.len());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:<w$}")).collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(headers.clone());
    for r in records {
        out += &line(r.iter().map(|(_, v)| v.as_str()).collect());
    }
    out
}

fn render(format: Format, records: &[Record]) -> String {
    match format {
        Format::Table => render_table(records),
        Format::Records => render_records(records),
    }
}

fn table(cli: &Cli) -> anyhow::Result<Vec<AtlasEntry>> {
    let path = cli
        .table
        .clone()
        .or_else(|| std::env::var_os("KH_TABLE").map(PathBuf::from));
    match path {
        Some(p) => Ok(atlas::load_table(&p)?),
        None => Ok(atlas::bundled_table()),
    }
}

/// A PD code, or a name looked up in the table.
fn diagram(cli: &Cli, input: &str) -> anyhow::Result<KnotDiagram> {
    if input.trim_start().starts_with("PD") {
        return Ok(parse_pd(input)?);
    }
    let entries = table(cli)?;
    let entry = atlas::find(&entries, input).ok_or_else(|| anyhow!("no table entry named `{input}`"))?;
    Ok(entry.diagram.clone())
}

fn guard(cli: &Cli, d: &KnotDiagram) -> anyhow::Result<()> {
    let n = d.crossing_count();
    if n >= 64 || 1u64 << n > cli.max_states {
        bail!("{n} crossings exceed the state guard of {}", cli.max_states);
    }
    Ok(())
}

fn homology_records(h: &BigradedGroups, coefficients: Coefficients) -> Vec<Record> {
    h.iter()
        .map(|((i, j), g)| {
            let group = match (coefficients, g.rank) {
                (Coefficients::Z2, 1) => "Z/2".to_string(),
                (Coefficients::Z2, r) => format!("(Z/2)^{r}"),
                (Coefficients::Integers, _) => g.to_string(),
            };
            vec![("i", i.to_string()), ("j", j.to_string()), ("group", group)]
        })
        .collect()
}

fn pass_fail(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

fn report_record(r: &FiniteTypeReport) -> Record {
    vec![
        ("stratum", r.stratum.id()),
        ("codim", r.stratum.codimension().to_string()),
        ("acyclic", r.acyclic.to_string()),
        ("chi_check", pass_fail(r.chi_check)),
    ]
}

fn run(cli: &Cli) -> anyhow::Result<Output> {
    match &cli.verb {
        Verb::Jones { input } => {
            let d = diagram(cli, input)?;
            guard(cli, &d)?;
            let j = jones_unnormalized(&d);
            Ok(Output::pass(match cli.format {
                Format::Table => format!("{j}\n"),
                Format::Records => render_records(&[vec![("pd", d.render_pd()), ("jones", j.to_string())]]),
            }))
        }
        Verb::Homology { input, z2 } => {
            let d = diagram(cli, input)?;
            let c = build_ckh_limited(&d, cli.max_states)?;
            let coefficients = if *z2 { Coefficients::Z2 } else { Coefficients::Integers };
            let h = homology_with(&c, coefficients);
            Ok(Output::pass(render(cli.format, &homology_records(&h, coefficients))))
        }
        Verb::Split { input, crossing } => {
            let d = diagram(cli, input)?;
            let s = crossing_split_limited(&d, *crossing, cli.max_states)?;
            let ok = s.is_upper_triangular();
            let rec = vec![
                ("crossing", crossing.to_string()),
                ("c0_generators", s.c0.total_dim().to_string()),
                ("c1_generators", s.c1.total_dim().to_string()),
                ("lower_left_entries", s.lower_left_entries.to_string()),
                ("upper_triangular", pass_fail(ok)),
            ];
            Ok(Output {
                text: render(cli.format, &[rec]),
                ok,
            })
        }
        Verb::Wall { input, crossing } => {
            let d = diagram(cli, input)?;
            let (ok, detail) = match wall_morphism_limited(&d, *crossing, cli.max_states) {
                Ok(w) => (
                    w.map.verify().is_ok(),
                    format!("{} -> {}", w.source().total_dim(), w.target().total_dim()),
                ),
                Err(khwall::wallcross::WallError::Complex(e)) => (false, e.to_string()),
                Err(e) => return Err(e.into()),
            };
            let rec = vec![
                ("crossing", crossing.to_string()),
                ("generators", detail),
                ("chain_map", pass_fail(ok)),
            ];
            Ok(Output {
                text: render(cli.format, &[rec]),
                ok,
            })
        }
        Verb::Cone { input, double } => {
            let d = diagram(cli, input)?;
            guard(cli, &d)?;
            let s = d.mark_singular(double)?;
            let r = finite_type_report(&s)?;
            let raw = raw_skein(&s);
            let mut text = render(cli.format, &homology_records(&r.cone_homology, Coefficients::Integers));
            if !text.is_empty() {
                text.push('\n');
            }
            text += &render_records(&[vec![
                ("stratum", s.id()),
                ("acyclic", r.acyclic.to_string()),
                ("euler", r.euler.to_string()),
                ("chi_check", pass_fail(r.chi_check)),
                ("skein_difference", raw.to_string()),
                ("skein_check", pass_fail(r.raw_skein_check)),
                ("verdict", r.order_verdict.clone()),
            ]]);
            Ok(Output { text, ok: r.chi_check })
        }
        Verb::Audit { max_crossings, codim } => {
            let diagrams: Vec<KnotDiagram> = table(cli)?.into_iter().map(|e| e.diagram).collect();
            let a = audit_subcategory(&diagrams, *max_crossings, *codim)?;
            let rows: Vec<Record> = a.reports.iter().map(report_record).collect();
            let mut text = render(cli.format, &rows);
            for r in a.discrepancies() {
                text.push('\n');
                text += &render_records(&[vec![
                    ("discrepancy", r.stratum.id()),
                    ("pd", r.stratum.base.render_pd()),
                    ("cone_homology", r.cone_homology.to_string().trim().replace('\n', "; ")),
                ]]);
            }
            text.push('\n');
            text += &render_records(&[vec![
                ("strata", a.reports.len().to_string()),
                ("acyclic", a.acyclic_count().to_string()),
                ("fraction_acyclic", format!("{:.4}", a.fraction_acyclic())),
            ]]);
            let ok = a.reports.iter().all(|r| r.chi_check);
            Ok(Output { text, ok })
        }
        Verb::Invariance { all_neighbors } => {
            let entries = table(cli)?;
            let policy = if *all_neighbors {
                NeighborPolicy::All
            } else {
                NeighborPolicy::One
            };
            let report = atlas::invariance_suite(&entries, policy)?;
            let rows: Vec<Record> = report
                .groups
                .iter()
                .map(|g| {
                    vec![
                        ("knot", g.name.clone()),
                        ("diagrams", g.diagrams.to_string()),
                        ("neighbors", g.neighbors.to_string()),
                        ("consistent", pass_fail(g.consistent())),
                    ]
                })
                .collect();
            Ok(Output {
                text: render(cli.format, &rows),
                ok: report.all_consistent(),
            })
        }
        Verb::Expand { input, order } => {
            let d = diagram(cli, input)?;
            guard(cli, &d)?;
            let cs = h_expansion(&jones_unnormalized(&d), *order)?;
            let rows: Vec<Record> = cs
                .iter()
                .enumerate()
                .map(|(k, c)| vec![("k", k.to_string()), ("coefficient", c.to_string())])
                .collect();
            Ok(Output::pass(render(cli.format, &rows)))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).with_context(|| "invalid input") {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

mod input;
mod report;
mod scenario;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cnp_core::boundary::{
    boundary_defect, check_boundary_relation, opp_components, raag_relations_report, IsometryFamily, RelationMode,
    TruncatedToeplitz,
};
use cnp_core::covariance::{check_axioms, Axiom, Representation};
use cnp_core::kgraph::{check_ck_family, ck_defect_oracle, defect_support, CkFamily, CkLevel, KGraph};
use cnp_core::psys::CompactFamily;
use cnp_core::qlo::{FoundationVerdict, LubResult};
use serde_json::{json, Value};

use input::{at, base_of, read_json};
use report::{code_of, render, CliError, Format, Output};

#[derive(Parser)]
#[command(
    name = "cnp",
    version,
    about = "Checks Nica covariance and Cuntz-Pimsner relations for finite product systems"
)]
struct Cli {
    /// Length bound for checks that range over the monoid.
    #[arg(long, global = true, default_value_t = 4)]
    horizon: usize,
    /// Tolerance for floating-point norm comparisons; exact data is compared exactly.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Quasi-lattice ordered monoids: `n<k>`, `lex`, or a graph file.
    #[command(subcommand)]
    Qlo(QloCmd),
    /// Finite k-graphs.
    Kgraph(KgraphArgs),
    /// Product systems.
    Psys(PsysArgs),
    /// Representations of product systems.
    #[command(subcommand)]
    Rep(RepCmd),
    /// Boundary quotients of right-angled Artin monoids.
    #[command(subcommand)]
    Boundary(BoundaryCmd),
    /// Named worked examples.
    #[command(subcommand)]
    Scenario(scenario::ScenarioCmd),
}

#[derive(Args)]
struct MonoidArg {
    #[arg(long)]
    monoid: String,
}

#[derive(Subcommand)]
enum QloCmd {
    Lub {
        #[command(flatten)]
        m: MonoidArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    Divides {
        #[command(flatten)]
        m: MonoidArg,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    Ball {
        #[command(flatten)]
        m: MonoidArg,
        #[arg(long)]
        radius: usize,
    },
    Foundation {
        #[command(flatten)]
        m: MonoidArg,
        /// Comma-separated elements.
        #[arg(long)]
        set: String,
    },
    Components {
        #[command(flatten)]
        m: MonoidArg,
    },
}

#[derive(Args)]
struct KgraphArgs {
    #[command(subcommand)]
    cmd: KgraphCmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Permutation,
    Boundary,
    Toeplitz,
}

#[derive(Subcommand)]
enum KgraphCmd {
    Info {
        graph: PathBuf,
    },
    Mce {
        graph: PathBuf,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
    /// The paths in Lambda^{<=n}.
    PathsLe {
        graph: PathBuf,
        #[arg(long)]
        n: String,
    },
    Exhaustive {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        set: String,
    },
    ExhaustiveSets {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        /// Degree bound for members; defaults to one edge of each colour.
        #[arg(long)]
        bound: Option<String>,
    },
    /// Relations (CK1)-(CK4) for a family of matrices built from the graph.
    Ck {
        graph: PathBuf,
        #[arg(long, value_enum, default_value_t = FamilyKind::Permutation)]
        family: FamilyKind,
        /// Only check (CK1)-(CK3).
        #[arg(long)]
        toeplitz_only: bool,
        #[arg(long)]
        bound: Option<String>,
    },
    /// The inclusion-exclusion defect of a vertex and a finite set at degree `s`.
    Defect {
        graph: PathBuf,
        #[arg(long)]
        vertex: String,
        #[arg(long)]
        set: String,
        #[arg(long)]
        s: String,
    },
}

#[derive(Args)]
struct PsysArgs {
    #[command(subcommand)]
    cmd: PsysCmd,
}

#[derive(Subcommand)]
enum PsysCmd {
    Info {
        system: PathBuf,
    },
    Ideal {
        system: PathBuf,
        #[arg(long)]
        p: String,
    },
    Augmented {
        system: PathBuf,
        #[arg(long)]
        q: String,
    },
    /// Injectivity of phi~_q at `q`, or on the ball of radius `--horizon`.
    Injective {
        system: PathBuf,
        #[arg(long)]
        q: Option<String>,
    },
    /// Whether a compact family's defect vanishes for large s.
    Vanish {
        system: PathBuf,
        #[arg(long)]
        family: PathBuf,
        /// Elements q to test; defaults to the ball of radius one.
        #[arg(long)]
        qs: Option<String>,
    },
}

#[derive(Subcommand)]
enum RepCmd {
    Check {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        rep: PathBuf,
        /// Comma-separated: T1,T2,T3 (or T),N,CP,Fowler,Katsura.
        #[arg(long, default_value = "T,N")]
        axioms: String,
        /// Families for CP; defaults to singletons and Fowler pairs.
        #[arg(long)]
        families: Vec<PathBuf>,
    },
    /// The Fock representation truncated at `--radius`.
    Fock {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        radius: usize,
    },
}

#[derive(Subcommand)]
enum BoundaryCmd {
    Defect {
        #[arg(long)]
        raag: PathBuf,
        #[arg(long)]
        foundation: String,
        #[arg(long)]
        s: String,
    },
    /// Relations (1)-(4) on a family of isometries, or on the truncated
    /// Toeplitz family of `--raag` with `--radius`.
    Check {
        #[arg(long, conflicts_with_all = ["raag", "radius"])]
        family: Option<PathBuf>,
        #[arg(long, requires = "radius")]
        raag: Option<PathBuf>,
        #[arg(long)]
        radius: Option<usize>,
        #[arg(long, default_value = "1,2,3,4")]
        relations: String,
    },
    /// Certifies the inclusion-exclusion family of a foundation set.
    Relation {
        #[arg(long)]
        raag: PathBuf,
        #[arg(long)]
        foundation: String,
    },
}

struct Ctx {
    horizon: usize,
    tolerance: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Ctx { horizon: cli.horizon, tolerance: cli.tolerance };
    let result = match cli.command {
        Command::Qlo(c) => qlo(c),
        Command::Kgraph(a) => kgraph(a.cmd, &ctx),
        Command::Psys(a) => psys(a.cmd, &ctx),
        Command::Rep(c) => rep(c, &ctx),
        Command::Boundary(c) => boundary(c, &ctx),
        Command::Scenario(c) => scenario::run(c, ctx.horizon),
    };
    match result {
        Ok(out) => {
            println!("{}", render(&out.report, cli.format));
            ExitCode::from(out.code as u8)
        }
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code as u8)
        }
    }
}

fn qlo(cmd: QloCmd) -> Result<Output, CliError> {
    match cmd {
        QloCmd::Lub { m, x, y } => {
            let m = input::monoid(&m.monoid)?;
            let (x, y) = (input::element(&m, &x)?, input::element(&m, &y)?);
            let lub = match m.lub(&x, &y).map_err(CliError::from_core)? {
                LubResult::Finite(r) => json!(m.format(&r)),
                LubResult::Infinity => json!("infinity"),
            };
            Ok(Output::query(json!({"lub": lub})))
        }
        QloCmd::Divides { m, x, y } => {
            let m = input::monoid(&m.monoid)?;
            let (x, y) = (input::element(&m, &x)?, input::element(&m, &y)?);
            let q = m.quotient(&x, &y).map_err(CliError::from_core)?;
            Ok(Output::query(json!({"divides": q.is_some(), "quotient": q.map(|q| m.format(&q))})))
        }
        QloCmd::Ball { m, radius } => {
            let m = input::monoid(&m.monoid)?;
            let ball = m.ball(radius);
            Ok(Output::query(json!({"elements": ball.iter().map(|p| m.format(p)).collect::<Vec<_>>()})))
        }
        QloCmd::Foundation { m, set } => {
            let m = input::monoid(&m.monoid)?;
            let f = input::elements(&m, &set)?;
            let v = match m.is_foundation_set(&f).map_err(CliError::from_core)? {
                FoundationVerdict::True { certificate } => json!({"foundation": true, "certificate": certificate}),
                FoundationVerdict::False { counterexample } => {
                    json!({"foundation": false, "counterexample": m.format(&counterexample)})
                }
                FoundationVerdict::TrueUpToHorizon { horizon } => json!({"foundation": true, "horizon": horizon}),
            };
            Ok(Output::query(v))
        }
        QloCmd::Components { m } => {
            let m = input::monoid(&m.monoid)?;
            let comps = opp_components(&m).map_err(CliError::from_core)?;
            let names: Vec<Vec<&str>> =
                comps.iter().map(|c| c.iter().map(|&i| m.generators()[i].as_str()).collect()).collect();
            Ok(Output::query(json!({"components": names})))
        }
    }
}

fn vertex(g: &KGraph, name: &str) -> Result<usize, CliError> {
    g.vertex_index(name).ok_or_else(|| CliError::input(format!("unknown vertex `{name}`")))
}

fn path_list(g: &KGraph, list: &str) -> Result<Vec<cnp_core::kgraph::Path>, CliError> {
    input::split(list).map(|s| g.parse_path(s).map_err(CliError::from_core)).collect()
}

fn kgraph(cmd: KgraphCmd, ctx: &Ctx) -> Result<Output, CliError> {
    match cmd {
        KgraphCmd::Info { graph } => {
            let g = input::kgraph(&graph)?;
            let mut v = g.to_json();
            v["acyclic"] = json!(g.is_acyclic());
            v["sources"] = json!(g
                .vertices()
                .iter()
                .enumerate()
                .filter(|(i, _)| (0..g.k()).any(|c| !g.edges().iter().any(|e| e.range == *i && e.color == c)))
                .map(|(_, n)| n)
                .collect::<Vec<_>>());
            Ok(Output::query(v))
        }
        KgraphCmd::Mce { graph, mu, nu } => {
            let g = input::kgraph(&graph)?;
            let (mu, nu) = (g.parse_path(&mu).map_err(at(&graph))?, g.parse_path(&nu).map_err(at(&graph))?);
            let set: Vec<String> = g.mce(&mu, &nu).iter().map(|p| g.format_path(p)).collect();
            Ok(Output::query(json!(set)))
        }
        KgraphCmd::PathsLe { graph, n } => {
            let g = input::kgraph(&graph)?;
            let n = input::degree(&g, &n)?;
            Ok(Output::query(json!(g.paths_le(&n).iter().map(|p| g.format_path(p)).collect::<Vec<_>>())))
        }
        KgraphCmd::Exhaustive { graph, vertex: v, set } => {
            let g = input::kgraph(&graph)?;
            let v = vertex(&g, &v)?;
            let f = path_list(&g, &set)?;
            let r = g.is_exhaustive(v, &f).map_err(CliError::from_core)?;
            Ok(Output::query(json!({
                "exhaustive": r.exhaustive,
                "counterexample": r.counterexample.map(|p| g.format_path(&p)),
            })))
        }
        KgraphCmd::ExhaustiveSets { graph, vertex: v, bound } => {
            let g = input::kgraph(&graph)?;
            let v = vertex(&g, &v)?;
            let bound = match bound {
                Some(b) => input::degree(&g, &b)?,
                None => g.default_bound(),
            };
            let sets = g.minimal_exhaustive_sets(v, &bound).map_err(CliError::from_core)?;
            let sets: Vec<Vec<String>> = sets.iter().map(|s| s.iter().map(|p| g.format_path(p)).collect()).collect();
            Ok(Output::query(json!({"bound": bound, "sets": sets})))
        }
        KgraphCmd::Ck { graph, family, toeplitz_only, bound } => {
            let g = input::kgraph(&graph)?;
            let bound = match bound {
                Some(b) => input::degree(&g, &b)?,
                None => vec![2; g.k()],
            };
            let (fam, basis) = match family {
                FamilyKind::Permutation => (CkFamily::permutation(&g).map_err(CliError::from_core)?, None),
                FamilyKind::Boundary => {
                    let (f, b) = CkFamily::boundary_paths(&g).map_err(CliError::from_core)?;
                    (f, Some(b))
                }
                FamilyKind::Toeplitz => (CkFamily::path_space(&g, &bound), None),
            };
            let level = if toeplitz_only { CkLevel::Toeplitz } else { CkLevel::CuntzKrieger };
            let r = check_ck_family(&g, &fam, level, &bound).map_err(CliError::from_core)?;
            let mut v = r.to_json();
            if let Some(b) = basis {
                v["basis"] = json!(b.iter().map(|p| g.format_path(p)).collect::<Vec<_>>());
            }
            Ok(Output::check(v, r.pass()))
        }
        KgraphCmd::Defect { graph, vertex: v, set, s } => {
            let g = input::kgraph(&graph)?;
            let v = vertex(&g, &v)?;
            let f = path_list(&g, &set)?;
            let s = input::degree(&g, &s)?;
            let d = g.ck_defect_symbolic(v, &f, &s).map_err(CliError::from_core)?;
            let oracle = ck_defect_oracle(&g, v, &f, &s).map_err(CliError::from_core)?;
            let exhaustive = g.is_exhaustive(v, &f).map_err(CliError::from_core)?.exhaustive;
            let ps = g.product_system().map_err(CliError::from_core)?;
            let fam = g.ck_family(v, &f).map_err(CliError::from_core)?;
            let qs = ps.monoid().ball(1);
            let large = ps.check_cp_vanishes(&fam, &qs, ctx.horizon).map_err(CliError::from_core)?;
            let report = json!({
                "s": format!("({})", s.iter().map(u32::to_string).collect::<Vec<_>>().join(",")),
                "exhaustive": exhaustive,
                "zero": d.is_zero(),
                "support": defect_support(&g, &s, &d).map_err(CliError::from_core)?,
                "matches_oracle": d == oracle,
                "for_large_s": large.to_json(&ps),
            });
            Ok(Output::check(report, d == oracle && large.vanishes() == exhaustive))
        }
    }
}

fn psys(cmd: PsysCmd, ctx: &Ctx) -> Result<Output, CliError> {
    let core = CliError::from_core;
    match cmd {
        PsysCmd::Info { system } => {
            let ps = input::system(&system)?;
            let m = ps.monoid();
            let mut fibres = Vec::new();
            let points = if m.is_lex() {
                ["(0,0)", "(0,1)", "(1,0)"].iter().map(|s| m.parse(s).unwrap()).collect()
            } else {
                m.ball(ctx.horizon.min(2))
            };
            for p in &points {
                let x = ps.module(p).map_err(core)?;
                fibres.push(json!({"p": m.format(p), "dim": x.dim(), "phi_injective": x.phi_injective()}));
            }
            Ok(Output::query(json!({
                "name": ps.name(),
                "monoid": m.name(),
                "vertices": ps.algebra().vertices(),
                "generated": ps.is_generated(),
                "fibres": fibres,
            })))
        }
        PsysCmd::Ideal { system, p } => {
            let ps = input::system(&system)?;
            let p = input::element(ps.monoid(), &p)?;
            let ideal = ps.ideal_i(&p).map_err(core)?;
            let names: Vec<&String> = ideal.iter().map(|&v| &ps.algebra().vertices()[v]).collect();
            Ok(Output::query(json!({"p": ps.monoid().format(&p), "ideal": names})))
        }
        PsysCmd::Augmented { system, q } => {
            let ps = input::system(&system)?;
            let m = ps.monoid();
            let q = input::element(m, &q)?;
            let aug = ps.augmented_fiber(&q).map_err(core)?;
            let summands: Vec<Value> = aug
                .summands
                .iter()
                .map(|s| {
                    let labels: Vec<&str> = (0..s.basis.len()).map(|i| aug.module.label(s.offset + i)).collect();
                    json!({"p": m.format(&s.p), "rest": m.format(&s.rest), "basis": labels})
                })
                .collect();
            Ok(Output::query(json!({"q": m.format(&q), "dim": aug.dim(), "summands": summands})))
        }
        PsysCmd::Injective { system, q } => {
            let ps = input::system(&system)?;
            let m = ps.monoid();
            let points = match q {
                Some(q) => vec![input::element(m, &q)?],
                None => m.ball(ctx.horizon),
            };
            let mut rows = Vec::new();
            let mut all = true;
            for q in &points {
                let v = ps.phi_tilde_injective(q).map_err(core)?;
                let aug = ps.augmented_fiber(q).map_err(core)?;
                // ||phi~_q(d_v)|| = ||d_v|| = 1 exactly when d_v acts faithfully
                let mut deviation = 0.0f64;
                for w in 0..ps.algebra().len() {
                    let norm = aug.phi_tilde(&ps.algebra().delta(w)).map_err(core)?.norm();
                    deviation = deviation.max((norm - 1.0).abs());
                }
                let ok = v.injective && deviation <= ctx.tolerance;
                all &= ok;
                let kernel: Vec<&String> = v.kernel.iter().map(|&w| &ps.algebra().vertices()[w]).collect();
                rows.push(json!({
                    "q": m.format(q),
                    "phi_tilde_injective": v.injective,
                    "kernel": kernel,
                    "norm_deviation": deviation,
                }));
            }
            Ok(Output::check(json!({"points": rows, "tolerance": ctx.tolerance}), all))
        }
        PsysCmd::Vanish { system, family, qs } => {
            let ps = input::system(&system)?;
            let fam = CompactFamily::from_json(&read_json(&family)?, &ps).map_err(at(&family))?;
            let qs = match qs {
                Some(list) => input::elements(ps.monoid(), &list)?,
                None if ps.monoid().is_lex() => vec![ps.monoid().identity()],
                None => ps.monoid().ball(1),
            };
            let d = ps.check_cp_vanishes(&fam, &qs, ctx.horizon).map_err(core)?;
            let code = if !d.vanishes() {
                report::FAILED
            } else if d.hypothesis_violated.is_some() {
                report::HYPOTHESIS
            } else {
                report::OK
            };
            let mut v = d.to_json(&ps);
            if let Some(s) = &d.hypothesis_violated {
                v["violated_hypothesis"] = json!(format!("phi~_s is not injective at s = {}", ps.monoid().format(s)));
            }
            Ok(Output { report: v, code })
        }
    }
}

fn rep(cmd: RepCmd, ctx: &Ctx) -> Result<Output, CliError> {
    match cmd {
        RepCmd::Check { system, rep, axioms, families } => {
            let ps = input::system(&system)?;
            let r = Representation::from_json(&read_json(&rep)?, ps.clone(), Some(&base_of(&rep))).map_err(at(&rep))?;
            let axioms = Axiom::parse_list(&axioms).map_err(CliError::from_core)?;
            let fams = families
                .iter()
                .map(|f| CompactFamily::from_json(&read_json(f)?, &ps).map_err(at(f)))
                .collect::<Result<Vec<_>, _>>()?;
            let fams = if fams.is_empty() { None } else { Some(fams.as_slice()) };
            let report = check_axioms(&r, &axioms, ctx.horizon, fams).map_err(CliError::from_core)?;
            let code = code_of(report.verdicts.iter().map(|(_, v)| v));
            Ok(Output { report: report.to_json(&ps), code })
        }
        RepCmd::Fock { system, radius } => {
            let ps = input::system(&system)?;
            let r = Representation::fock(ps, radius).map_err(CliError::from_core)?;
            Ok(Output::query(r.to_json()))
        }
    }
}

fn boundary(cmd: BoundaryCmd, ctx: &Ctx) -> Result<Output, CliError> {
    let core = CliError::from_core;
    match cmd {
        BoundaryCmd::Defect { raag, foundation, s } => {
            let m = input::monoid(&raag.to_string_lossy())?;
            let f = input::elements(&m, &foundation)?;
            let s = input::element(&m, &s)?;
            let d = boundary_defect(&m, &f, &s).map_err(core)?;
            let divisors: Vec<String> =
                f.iter().filter(|p| m.divides(p, &s).unwrap_or(false)).map(|p| m.format(p)).collect();
            Ok(Output::query(json!({
                "s": m.format(&s),
                "value": d.value,
                "inclusion_exclusion": d.inclusion_exclusion,
                "divided_by": divisors,
                "foundation": m.is_foundation_set(&f).map_err(core)?.holds(),
            })))
        }
        BoundaryCmd::Check { family, raag, radius, relations } => {
            let fam = match (family, raag, radius) {
                (Some(path), _, _) => {
                    IsometryFamily::from_json(&read_json(&path)?, Some(&base_of(&path))).map_err(at(&path))?
                }
                (None, Some(raag), Some(r)) => {
                    let m = input::monoid(&raag.to_string_lossy())?;
                    TruncatedToeplitz::new(m, r).map_err(core)?.family
                }
                _ => return Err(CliError::input("give --family, or --raag with --radius")),
            };
            let which = input::split(&relations)
                .map(|s| s.parse::<u8>().ok().filter(|n| (1..=4).contains(n)))
                .collect::<Option<Vec<u8>>>()
                .ok_or_else(|| CliError::input(format!("relations must be numbers 1-4, got `{relations}`")))?;
            let r = raag_relations_report(&fam, &which).map_err(core)?;
            let code = code_of(r.relations.iter().map(|(_, v)| v));
            Ok(Output { report: r.to_json(), code })
        }
        BoundaryCmd::Relation { raag, foundation } => {
            let m = input::monoid(&raag.to_string_lossy())?;
            let f = input::elements(&m, &foundation)?;
            let qs = m.ball(1);
            let r = check_boundary_relation(&m, &f, RelationMode::Symbolic { test_qs: &qs, horizon: ctx.horizon })
                .map_err(core)?;
            let code = code_of([&r.verdict]);
            Ok(Output { report: r.to_json(), code })
        }
    }
}

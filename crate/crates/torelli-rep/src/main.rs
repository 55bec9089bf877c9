use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rayon::prelude::*;
use torelli_core::characters::{module_character_as, Algebra};
use torelli_core::decompose::{decompose_character, decompose_module, decompose_space_by_character};
use torelli_core::equivariant_maps::Elem;
use torelli_core::exterior::format_ext;
use torelli_core::freegroup_johnson::{j2_target, j_target, johnson_j, johnson_j2, tau_bounding_pair, BoundingPairDescriptor, FreeGroupEndo};
use torelli_core::rep_spaces::{build, ModuleExpr};
use torelli_core::scalar_linalg::fmt_rational;

use torelli_rep::cases::{self, CaseManifest};
use torelli_rep::chain::Chain;
use torelli_rep::expr::{self, Defs, Env};
use torelli_rep::lie;
use torelli_rep::report::{Report, Status};
use torelli_rep::tables::{self, TableSpec};

#[derive(Parser)]
#[command(name = "torelli-rep", about = "Exact representation-theoretic computations for Torelli-type groups")]
struct Cli {
    /// Directory holding cases/ and tables/ (default: $TORELLI_REP_DATA or the bundled data).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check a table, a case, or everything at one genus.
    Verify {
        #[arg(long, conflicts_with_all = ["case", "all"])]
        table: Option<String>,
        #[arg(long, conflicts_with = "all")]
        case: Option<String>,
        #[arg(long)]
        all: bool,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate a LiE-style command.
    Lie { command: String },
    /// Decompose a constructed space into irreducibles.
    Decompose {
        #[arg(long)]
        space: String,
        #[arg(long)]
        g: usize,
        /// Decompose as an Sp_2g module (spaces built over H only).
        #[arg(long)]
        sp: bool,
        /// Use highest-weight vectors instead of characters.
        #[arg(long)]
        hwv: bool,
        #[arg(long)]
        json: bool,
    },
    /// Apply an operator chain to a vector.
    Apply {
        #[arg(allow_hyphen_values = true)]
        chain: String,
        #[arg(long)]
        to: String,
        #[arg(long)]
        space: String,
        #[arg(long)]
        g: usize,
    },
    /// First Johnson homomorphism of a free-group automorphism.
    #[command(name = "J")]
    J {
        endo: String,
        #[arg(long)]
        g: usize,
    },
    /// Second Johnson homomorphism.
    #[command(name = "J2")]
    J2 {
        endo: String,
        #[arg(long)]
        g: usize,
    },
    /// τ of a bounding pair from its homological data.
    #[command(name = "tau-bp")]
    TauBp {
        #[arg(long)]
        g: usize,
        /// Symplectic pairs as `x,y` vectors in H, e.g. `--pair a1,b1`.
        #[arg(long = "pair")]
        pairs: Vec<String>,
        #[arg(long)]
        class: String,
    },
}

fn data_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os("TORELLI_REP_DATA").map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data"))
}

fn fail(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(2)
}

fn check_g(g: usize) -> Result<(), String> {
    if g < 2 {
        Err("genus must be at least 2".into())
    } else {
        Ok(())
    }
}

fn print_reports(reports: &[Report], json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(reports).expect("reports serialize"));
    } else {
        for r in reports {
            println!("{}", r.line());
        }
    }
}

fn exit_for(reports: &[Report]) -> ExitCode {
    if reports.iter().all(Report::passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn verify(data: PathBuf, table: Option<String>, case: Option<String>, all: bool, g: usize, json: bool) -> ExitCode {
    if let Err(e) = check_g(g) {
        return fail(e);
    }
    let load_tables = || tables::load_tables(&data.join("tables"));
    let load_cases = || cases::load_cases(&data.join("cases"));
    if let Some(id) = table {
        let ts = match load_tables() {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        let t = match tables::find(&ts, &id) {
            Ok(t) => t,
            Err(e) => return fail(e),
        };
        let out = tables::verify_table(t, g);
        if json {
            print_reports(std::slice::from_ref(&out.report), true);
        } else {
            println!("{} ({} rows)", out.report.line(), out.rows);
            for r in &out.relations {
                println!("  {} {}", if r.ok { "ok      " } else { "MISMATCH" }, r.relation);
                let limit = if r.ok { 1 } else { 20 };
                for d in r.detail.iter().take(limit) {
                    println!("      {d}");
                }
            }
        }
        return exit_for(std::slice::from_ref(&out.report));
    }
    if let Some(id) = case {
        let cs = match load_cases() {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        let c = match cases::find(&cs, &id) {
            Ok(c) => c,
            Err(e) => return fail(e),
        };
        let r = run_case(c, g);
        print_reports(std::slice::from_ref(&r), json);
        return exit_for(std::slice::from_ref(&r));
    }
    if !all {
        return fail("one of --table, --case or --all is required");
    }
    let (ts, cs) = match (load_tables(), load_cases()) {
        (Ok(t), Ok(c)) => (t, c),
        (Err(e), _) => return fail(e),
        (_, Err(e)) => return fail(e),
    };
    let mut reports: Vec<Report> = ts.par_iter().map(|t: &TableSpec| tables::verify_table(t, g).report).collect();
    reports.extend(cs.par_iter().map(|c: &CaseManifest| run_case(c, g)).collect::<Vec<_>>());
    print_reports(&reports, json);
    exit_for(&reports)
}

/// A case with a recorded conflict is expected to fail; its report says so.
fn run_case(c: &CaseManifest, g: usize) -> Report {
    let mut r = cases::verify_case(c, g);
    if let Some(note) = &c.conflict {
        if r.status == Status::Fail {
            r.note = Some(format!("known conflict: {note}"));
        }
    }
    r
}

fn decompose(space: &str, g: usize, sp: bool, hwv: bool, json: bool) -> Result<(), String> {
    check_g(g)?;
    let s = build(&ModuleExpr::parse(space).map_err(|e| e.to_string())?, g).map_err(|e| e.to_string())?;
    let d = if sp {
        decompose_character(&module_character_as(&s, Algebra::C)).map_err(|e| e.to_string())?
    } else if hwv {
        decompose_module(&s).map_err(|e| e.to_string())?.0
    } else {
        decompose_space_by_character(&s).map_err(|e| e.to_string())?
    };
    if json {
        let parts: Vec<serde_json::Value> =
            d.ordered().into_iter().map(|(l, m)| serde_json::json!({ "label": l.to_string(), "multiplicity": m })).collect();
        let v = serde_json::json!({ "space": space, "g": g, "dim": s.dim(), "parts": parts });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("dim {} = {}", s.dim(), d.dimension());
        for (l, m) in d.ordered() {
            println!("{m} {l}");
        }
    }
    Ok(())
}

fn apply(chain: &str, to: &str, space: &str, g: usize) -> Result<(), String> {
    check_g(g)?;
    let defs = Defs::new();
    let env = Env::new(g, &defs);
    let s = build(&ModuleExpr::parse(space).map_err(|e| e.to_string())?, g).map_err(|e| e.to_string())?;
    let f = expr::evaluate(to, &env).map_err(|e| e.to_string())?;
    let v = s.embed(&f).map_err(|e| e.to_string())?;
    let ch = Chain::parse(chain).map_err(|e| e.to_string())?;
    let out = ch.apply(Elem::new(s, v), &env).map_err(|e| e.to_string())?;
    match out.as_scalar() {
        Some(c) if out.space.dim() == 1 => println!("{}", fmt_rational(&c)),
        _ => println!("{}", out.space.format_vec(&out.vec)),
    }
    Ok(())
}

fn johnson(endo: &str, g: usize, second: bool) -> Result<(), String> {
    check_g(g)?;
    let f = FreeGroupEndo::parse(endo, g).map_err(|e| e.to_string())?;
    let (v, target) = if second {
        (johnson_j2(&f).map_err(|e| e.to_string())?, j2_target(g).map_err(|e| e.to_string())?)
    } else {
        (johnson_j(&f).map_err(|e| e.to_string())?, j_target(g).map_err(|e| e.to_string())?)
    };
    println!("{}", target.format_vec(&v));
    Ok(())
}

fn h_coords(text: &str, g: usize) -> Result<Vec<i64>, String> {
    let defs = Defs::new();
    let env = Env::new(g, &defs);
    let h = build(&ModuleExpr::FullH, g).map_err(|e| e.to_string())?;
    let v = h.embed(&expr::evaluate(text, &env).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    let mut out = vec![0; 2 * g];
    for (i, c) in v.iter() {
        if !c.is_integer() {
            return Err(format!("'{text}' is not an integral class"));
        }
        out[i] = c.to_integer().try_into().map_err(|_| format!("'{text}' has a huge coefficient"))?;
    }
    Ok(out)
}

fn tau_bp(g: usize, pairs: &[String], class: &str) -> Result<(), String> {
    let mut ps = Vec::new();
    for p in pairs {
        let (x, y) = p.split_once(',').ok_or_else(|| format!("pair '{p}' should be 'x,y'"))?;
        ps.push((h_coords(x, g)?, h_coords(y, g)?));
    }
    let d = BoundingPairDescriptor { g, pairs: ps, class: h_coords(class, g)? };
    let v = tau_bounding_pair(&d).map_err(|e| e.to_string())?;
    println!("{}", format_ext(g, &v));
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let data = data_dir(cli.data);
    let done = |r: Result<(), String>| match r {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    };
    match cli.cmd {
        Cmd::Verify { table, case, all, g, json } => verify(data, table, case, all, g, json),
        Cmd::Lie { command } => match lie::command(&command) {
            Ok(s) => {
                println!("{s}");
                ExitCode::SUCCESS
            }
            Err(e) => fail(e),
        },
        Cmd::Decompose { space, g, sp, hwv, json } => done(decompose(&space, g, sp, hwv, json)),
        Cmd::Apply { chain, to, space, g } => done(apply(&chain, &to, &space, g)),
        Cmd::J { endo, g } => done(johnson(&endo, g, false)),
        Cmd::J2 { endo, g } => done(johnson(&endo, g, true)),
        Cmd::TauBp { g, pairs, class } => done(tau_bp(g, &pairs, &class)),
    }
}

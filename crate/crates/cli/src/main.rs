//! `treehom`: batch front end for the decision procedures, the universal
//! embedding, the triple-u generators and the game engine.
//!
//! Exit codes: 0 decided or constructed, 1 negative decision, 2 usage or
//! input error, 3 size limit exceeded.

use std::fs;
use std::net::{IpAddr, SocketAddr};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use treehom_core::decision::{
    brute_force_tree_hom_oracle, build_witness, compute_level_sets, fixpoint_levels, stalled_component,
    verify_homomorphism, FixpointResult,
};
use treehom_core::game::{
    adversarial_sweep_with_progress, find_equivalent_chain_lengths, solve_game, FamilyGame, GameError, Player,
    SweepLimits,
};
use treehom_core::text::{parse_structure, write_structure};
use treehom_core::tripleu::{gen_family, gen_tripleu, FamilyConfig, FamilyKind, TripleUSpec};
use treehom_core::universal::{embed_universal, verify_universal_embedding};
use treehom_core::{subset_criterion_oracle, ConstraintStructure, Error, NodeId, NodeSubset};

#[derive(Parser)]
#[command(name = "treehom", version, about = "Homomorphisms into tree-like orders, universal embeddings and WMSO+B games")]
struct Cli {
    /// Emit a single JSON document instead of human-readable output.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a structure maps into the chosen target class.
    Check(CheckArgs),
    /// Decide the same question by brute force (small inputs only).
    OracleCheck(CheckArgs),
    /// Build a witness tree and node mapping, and verify it.
    Witness { file: PathBuf },
    /// Embed a semi-linear order into the universal order of words.
    Embed { file: PathBuf },
    /// Generate structures in the text format.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Game engine.
    #[command(subcommand)]
    Game(GameCommand),
    /// Serve the HTTP/JSON game API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: IpAddr,
        /// Minutes before an idle session is dropped.
        #[arg(long, default_value_t = 30)]
        idle_minutes: u64,
    },
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, value_enum)]
    mode: Mode,
    /// Height bound, required for `--mode height`.
    #[arg(long)]
    height: Option<usize>,
    file: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Semilinear,
    OrdinalTree,
    Tree,
    Height,
}

#[derive(Subcommand)]
enum GenCommand {
    /// A single (n,m)-triple-u.
    Tripleu {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
    },
    /// An E or U family.
    Family {
        #[arg(long)]
        kind: FamilyKind,
        /// Strictly increasing chain lengths; the first is the anchor.
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        mult: usize,
    },
}

#[derive(Subcommand)]
enum GameCommand {
    /// Solve the k-round game on two small structures.
    Solve {
        #[arg(long)]
        k: usize,
        left: PathBuf,
        right: PathBuf,
    },
    /// Largest class of chain lengths up to `maxlen` equivalent at rank k.
    Chains {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        maxlen: usize,
    },
    /// Play the duplicator strategy against every spoiler line of the sweep.
    Selfplay {
        #[arg(long)]
        k: usize,
        #[arg(long, num_args = 1.., value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 2)]
        mult: usize,
        /// Bound values spoiler tries.
        #[arg(long, value_delimiter = ',')]
        bounds: Option<Vec<usize>>,
    },
}

/// A failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SizeLimitExceeded { .. } => 3,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<GameError> for Failure {
    fn from(e: GameError) -> Self {
        match e {
            GameError::Core(e) => e.into(),
            GameError::EnumerationTooLarge(_) => Failure {
                code: 3,
                message: e.to_string(),
            },
            e => Failure::usage(e.to_string()),
        }
    }
}

/// Result of a command: its output and whether the decision was positive.
struct Outcome {
    positive: bool,
    human: String,
    json: Value,
}

impl Outcome {
    fn yes(human: String, json: Value) -> Self {
        Outcome {
            positive: true,
            human,
            json,
        }
    }
}

fn load(path: &Path) -> Result<ConstraintStructure, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    parse_structure(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn names(s: &ConstraintStructure, set: &NodeSubset) -> Vec<String> {
    set.iter().map(|i| s.label(NodeId(i)).to_string()).collect()
}

fn braces(items: &[String]) -> String {
    format!("{{{}}}", items.join(", "))
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Semilinear => "semilinear",
        Mode::OrdinalTree => "ordinal-tree",
        Mode::Tree => "tree",
        Mode::Height => "height",
    }
}

fn height_arg(a: &CheckArgs) -> Result<Option<usize>, Failure> {
    match (a.mode, a.height) {
        (Mode::Height, None) => Err(Failure::usage("--mode height needs --height")),
        (Mode::Height, h) => Ok(h),
        (_, Some(_)) => Err(Failure::usage("--height only applies to --mode height")),
        (_, None) => Ok(None),
    }
}

fn trace_text(s: &ConstraintStructure, fp: &FixpointResult) -> String {
    let mut out = String::new();
    for (stage, steps) in fp.trace.iter().enumerate() {
        for step in steps {
            out.push_str(&format!(
                "stage {stage}: component {} central {}\n",
                braces(&names(s, &step.component)),
                braces(&names(s, &step.central))
            ));
        }
    }
    out
}

fn trace_json(s: &ConstraintStructure, fp: &FixpointResult) -> Value {
    fp.trace
        .iter()
        .map(|steps| {
            steps
                .iter()
                .map(|st| json!({ "component": names(s, &st.component), "central": names(s, &st.central) }))
                .collect::<Vec<_>>()
        })
        .collect()
}

fn check(a: &CheckArgs) -> Result<Outcome, Failure> {
    let h = height_arg(a)?;
    let s = load(&a.file)?;
    let mode = mode_name(a.mode);
    if let Some(h) = h {
        let levels = compute_level_sets(&s, h)?;
        let covered = levels.covered();
        let mut human = String::new();
        for (i, l) in levels.levels.iter().enumerate() {
            human.push_str(&format!("A_{i}: {}\n", braces(&names(&s, l))));
        }
        let missing = s.all_nodes().difference(&covered);
        let positive = missing.is_empty();
        if positive {
            human.push_str(&format!("yes: maps into a tree of height {h}\n"));
        } else {
            human.push_str(&format!("no: uncovered {}\n", braces(&names(&s, &missing))));
        }
        let levels: Vec<_> = levels.levels.iter().map(|l| names(&s, l)).collect();
        return Ok(Outcome {
            positive,
            human,
            json: json!({ "mode": mode, "height": h, "homomorphism": positive, "levels": levels, "uncovered": names(&s, &missing) }),
        });
    }
    let fp = fixpoint_levels(&s)?;
    let mut human = trace_text(&s, &fp);
    let stalled = stalled_component(&s, &fp).map(|c| names(&s, &c));
    match &stalled {
        None => human.push_str(&format!("yes: maps into {mode} targets\n")),
        Some(c) => human.push_str(&format!("no: stalled component {} has no central point\n", braces(c))),
    }
    Ok(Outcome {
        positive: fp.exhausted,
        human,
        json: json!({
            "mode": mode,
            "homomorphism": fp.exhausted,
            "stages": trace_json(&s, &fp),
            "stalledComponent": stalled,
        }),
    })
}

fn oracle_check(a: &CheckArgs) -> Result<Outcome, Failure> {
    let h = height_arg(a)?;
    let s = load(&a.file)?;
    let (positive, oracle) = match h {
        Some(h) => (brute_force_tree_hom_oracle(&s, h, s.len())?, "tree-search"),
        None => (subset_criterion_oracle(&s)?, "subset-criterion"),
    };
    let mode = mode_name(a.mode);
    let human = if positive {
        format!("yes: maps into {mode} targets ({oracle} oracle)\n")
    } else {
        format!("no: no homomorphism ({oracle} oracle)\n")
    };
    Ok(Outcome {
        positive,
        human,
        json: json!({ "mode": mode, "height": h, "oracle": oracle, "homomorphism": positive }),
    })
}

fn witness(file: &Path) -> Result<Outcome, Failure> {
    let s = load(file)?;
    let (tree, mapping) = match build_witness(&s) {
        Ok(w) => w,
        Err(Error::NoHomomorphism { component }) => {
            let c = names(&s, &component);
            return Ok(Outcome {
                positive: false,
                human: format!("no: stalled component {} has no central point\n", braces(&c)),
                json: json!({ "homomorphism": false, "stalledComponent": c }),
            });
        }
        Err(e) => return Err(e.into()),
    };
    let verified = verify_homomorphism(&s, &tree, &mapping);
    if !verified {
        return Err(Failure {
            code: 1,
            message: "internal error: the witness failed verification".into(),
        });
    }
    let parents: Vec<Option<usize>> = (0..tree.len())
        .map(|t| tree.parent(treehom_core::decision::TreeNodeId(t)).map(|p| p.0))
        .collect();
    let mut human = format!("tree: {} nodes, height {}\n", tree.len(), tree.height());
    for (t, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            human.push_str(&format!("  t{p} -> t{t}\n"));
        }
    }
    human.push_str("mapping:\n");
    let mut map = Vec::new();
    for v in s.nodes() {
        let t = mapping.image(v).0;
        human.push_str(&format!("  {} -> t{t}\n", s.label(v)));
        map.push(json!({ "node": s.label(v), "tree": t }));
    }
    human.push_str("verified\n");
    Ok(Outcome::yes(
        human,
        json!({ "homomorphism": true, "parents": parents, "mapping": map, "verified": verified }),
    ))
}

fn embed(file: &Path) -> Result<Outcome, Failure> {
    let s = load(file)?;
    let e = match embed_universal(&s) {
        Ok(e) => e,
        Err(Error::NotSemilinear(why)) => {
            return Ok(Outcome {
                positive: false,
                human: format!("no: input is not a semi-linear order: {why}\n"),
                json: json!({ "semilinear": false, "reason": why }),
            })
        }
        Err(e) => return Err(e.into()),
    };
    if !verify_universal_embedding(&s, &e) {
        return Err(Failure {
            code: 1,
            message: "internal error: the embedding failed verification".into(),
        });
    }
    let mut human = String::new();
    let mut words = Vec::new();
    for v in s.nodes() {
        human.push_str(&format!("{} -> {}\n", s.label(v), e.phi[v.0]));
        words.push(json!({ "node": s.label(v), "word": e.phi[v.0].to_string() }));
    }
    Ok(Outcome::yes(
        human,
        json!({ "semilinear": true, "words": words, "dyadicDepthBound": e.dyadic_depth_bound, "verified": true }),
    ))
}

fn structure_outcome(s: &ConstraintStructure) -> Result<Outcome, Failure> {
    let json = serde_json::to_value(s).map_err(|e| Failure::usage(e.to_string()))?;
    Ok(Outcome::yes(write_structure(s), json))
}

fn gen(g: &GenCommand) -> Result<Outcome, Failure> {
    match g {
        GenCommand::Tripleu { n, m } => structure_outcome(&gen_tripleu(TripleUSpec { n: *n, m: *m }).structure),
        GenCommand::Family { kind, sizes, mult } => {
            let f = gen_family(&FamilyConfig {
                kind: *kind,
                sizes: sizes.clone(),
                multiplicity: *mult,
            })?;
            structure_outcome(&f.structure)
        }
    }
}

fn player_name(p: Player) -> &'static str {
    match p {
        Player::Spoiler => "spoiler",
        Player::Duplicator => "duplicator",
    }
}

fn game(g: &GameCommand, quiet: bool) -> Result<Outcome, Failure> {
    match g {
        GameCommand::Solve { k, left, right } => {
            let (l, r) = (load(left)?, load(right)?);
            let sol = solve_game(&l, &r, *k)?;
            let w = player_name(sol.winner);
            Ok(Outcome::yes(
                format!("{w} wins the {k}-round game\n"),
                json!({ "k": k, "winner": w }),
            ))
        }
        GameCommand::Chains { k, maxlen } => {
            let v = find_equivalent_chain_lengths(*k, *maxlen)?;
            let list: Vec<String> = v.iter().map(usize::to_string).collect();
            Ok(Outcome::yes(
                format!("rank {k}, lengths up to {maxlen}: {}\n", list.join(" ")),
                json!({ "k": k, "maxlen": maxlen, "lengths": v }),
            ))
        }
        GameCommand::Selfplay { k, sizes, mult, bounds } => {
            let g = FamilyGame::new(*k, sizes, *mult)?;
            if !g.sizes_equivalent()? {
                return Err(Failure::usage(format!(
                    "chain lengths {sizes:?} are not rank-{k} equivalent to {}; see `game chains`",
                    sizes[0]
                )));
            }
            let mut limits = SweepLimits::default();
            if let Some(b) = bounds {
                limits.bounds = b.clone();
            }
            let report = adversarial_sweep_with_progress(&g, &limits, &mut |done, total, r| {
                if !quiet {
                    eprint!("\r{done}/{total} first moves, {} playouts", r.playouts);
                }
            });
            if !quiet {
                eprintln!();
            }
            let mut human = format!(
                "playouts {}, spoiler stuck {}, positions checked {}, duplicator losses {}\n",
                report.playouts, report.spoiler_stuck, report.positions_checked, report.duplicator_losses
            );
            for f in &report.failures {
                human.push_str(&format!("  {}: {}\n", f.moves.join(" ; "), f.reason));
            }
            let json = serde_json::to_value(&report).map_err(|e| Failure::usage(e.to_string()))?;
            Ok(Outcome {
                positive: report.clean(),
                human,
                json,
            })
        }
    }
}

fn serve(port: u16, host: IpAddr, idle_minutes: u64) -> Result<Outcome, Failure> {
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::usage(e.to_string()))?;
    let addr = SocketAddr::new(host, port);
    eprintln!("listening on http://{addr}");
    let config = treehom_server::ServerConfig {
        idle_expiry: Duration::from_secs(idle_minutes * 60),
    };
    rt.block_on(treehom_server::serve(addr, config))
        .map_err(|e| Failure::usage(format!("{addr}: {e}")))?;
    Ok(Outcome::yes(String::new(), Value::Null))
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Check(a) => check(a),
        Command::OracleCheck(a) => oracle_check(a),
        Command::Witness { file } => witness(file),
        Command::Embed { file } => embed(file),
        Command::Gen(g) => gen(g),
        Command::Game(g) => game(g, cli.json),
        Command::Serve {
            port,
            host,
            idle_minutes,
        } => serve(*port, *host, *idle_minutes),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(out) => {
            if cli.json {
                println!("{}", out.json);
            } else {
                print!("{}", out.human);
            }
            ExitCode::from(if out.positive { 0 } else { 1 })
        }
        Err(f) => {
            if cli.json {
                println!("{}", json!({ "error": f.message, "exitCode": f.code }));
            }
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

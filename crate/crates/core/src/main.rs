use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use fortify::arith::{self, parse_rational, Rational};
use fortify::bireg::{biregularize, biregularize_graphical};
use fortify::concat::{
    combinatorial_fortification_check, concatenate, fortification_violation, pointwise_bound_check,
    ConcatenatedGame, SearchMode, Verdict,
};
use fortify::game::{optimal_strategy, DEFAULT_ENUMERATION_CAP, DEFAULT_SIZE_CAP};
use fortify::io::{self, AnyGame, Provenance};
use fortify::kplayer::kplayer_value_capped;
use fortify::multiplayer::{concatenate_multiplayer, multiplayer_proof_check, multiplayer_violation};
use fortify::ordered::{ordered_fortify, FamilyKind};
use fortify::pipeline::{run_pipeline, PipelineConfig, StageStatus};
use fortify::plan::gap_amplification_plan;
use fortify::repetition::repetition_bound_check;
use fortify::spectral::{normalized_adjacency, singular_values, BipartiteExpander};
use fortify::{Error, Game};

#[derive(Parser)]
#[command(name = "fortify", version, about = "Fortify, repeat and verify one-round games")]
struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Enumeration cap; larger instances are refused with exit code 2.
    #[arg(long, global = true, default_value_t = DEFAULT_ENUMERATION_CAP)]
    cap: u128,
    /// Additive slack for floating-point spectral comparisons.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tolerance: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact classical value of a game file (two or k players).
    Value { game: PathBuf },
    /// Biregularize a game.
    Bireg {
        game: PathBuf,
        #[arg(long, value_parser = rational, default_value = "1/4")]
        tau: Rational,
        #[arg(long, value_enum, default_value_t = BiregMode::General)]
        mode: BiregMode,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Concatenate a game with two graphs and write the outer game.
    Concat {
        game: PathBuf,
        left_graph: PathBuf,
        right_graph: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Ordered fortification with a spectral certificate for both lifts.
    OrderedFort {
        #[arg(long)]
        game: PathBuf,
        #[arg(long)]
        left_graph: PathBuf,
        #[arg(long)]
        right_graph: PathBuf,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, value_enum, default_value_t = Family::Full)]
        family: Family,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Fortification check on a concatenation (one graph per player).
    CheckFort {
        game: PathBuf,
        #[arg(required = true, num_args = 2..)]
        graphs: Vec<PathBuf>,
        #[command(flatten)]
        params: EpsDelta,
        #[arg(long, value_enum, default_value_t = CheckMode::Exact)]
        mode: CheckMode,
        /// Random restarts in ascent mode.
        #[arg(long, default_value_t = 64)]
        restarts: u64,
    },
    /// Singular spectrum and λ of a graph file.
    Spectral {
        graph: PathBuf,
        /// Exit 1 when λ exceeds this target.
        #[arg(long)]
        target: Option<f64>,
    },
    /// Parallel repetition bound on a concatenation.
    Repeat {
        game: PathBuf,
        left_graph: PathBuf,
        right_graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[command(flatten)]
        params: EpsDelta,
        /// Also check every single-step decomposition.
        #[arg(long)]
        steps: bool,
    },
    /// Gap-amplification parameters.
    Plan {
        /// Inner alphabet size |A|·|B|.
        #[arg(long)]
        sigma: u64,
        #[arg(long, value_parser = rational)]
        tau: Rational,
        #[arg(long, value_parser = rational)]
        beta: Rational,
    },
    /// Biregularize, fortify, certify and repeat, writing every artifact.
    Pipeline(PipelineArgs),
}

#[derive(Args)]
struct EpsDelta {
    #[arg(long, value_parser = rational, default_value = "0")]
    epsilon: Rational,
    #[arg(long, value_parser = rational, default_value = "0")]
    delta: Rational,
}

#[derive(Args)]
struct PipelineArgs {
    game: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_parser = rational, default_value = "1/4")]
    tau: Rational,
    #[arg(long, value_parser = rational)]
    epsilon: Rational,
    #[arg(long, value_parser = rational)]
    delta: Rational,
    #[arg(long)]
    ordered: bool,
    #[arg(long)]
    l: Option<usize>,
    #[arg(long, value_enum, default_value_t = Family::Full)]
    family: Family,
    #[arg(long)]
    quantum_target: bool,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, default_value_t = 64)]
    attempts: u64,
    #[arg(long)]
    left_graph: Option<PathBuf>,
    #[arg(long)]
    right_graph: Option<PathBuf>,
    #[arg(long)]
    no_certify: bool,
    /// Rounds for the repetition check; 0 skips it.
    #[arg(long, default_value_t = 2)]
    repeat: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum BiregMode {
    Graphical,
    General,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    Full,
    Pairwise,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> FamilyKind {
        match f {
            Family::Full => FamilyKind::Full,
            Family::Pairwise => FamilyKind::Pairwise,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CheckMode {
    Exact,
    Ascent,
    Combinatorial,
    Pointwise,
    /// k-player only: the excess bound 2λk.
    Proof,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

enum Outcome {
    Pass,
    Fail,
}

fn emit(text: &str, output: Option<&Path>) -> fortify::Result<()> {
    match output {
        Some(p) => Ok(std::fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_two(path: &Path) -> fortify::Result<Game> {
    Ok(io::read_game(path)?.0)
}

fn load_concat(game: &Path, left: &Path, right: &Path) -> fortify::Result<ConcatenatedGame> {
    let g = load_two(game)?;
    let m = BipartiteExpander::certify(io::read_graph(left)?)?;
    let p = BipartiteExpander::certify(io::read_graph(right)?)?;
    concatenate(&m, &g, &p)
}

fn verdict(ok: bool) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run(cli: Cli) -> fortify::Result<Outcome> {
    let cap = cli.cap;
    let tol = cli.tolerance;
    match cli.command {
        Command::Value { game } => {
            match io::read_any_game(&game)?.0 {
                AnyGame::Two(g) => {
                    let w = optimal_strategy(&g, cap)?;
                    println!("value: {}", arith::show(&w.value));
                    println!("value_float: {:.12}", arith::to_f64(&w.value));
                    println!("alice: {:?}", w.alice);
                    println!("bob: {:?}", w.bob);
                }
                AnyGame::Many(g) => {
                    let v = kplayer_value_capped(&g, cap)?;
                    println!("players: {}", g.players());
                    println!("value: {}", arith::show(&v));
                    println!("value_float: {:.12}", arith::to_f64(&v));
                }
            }
            Ok(Outcome::Pass)
        }
        Command::Bireg {
            game,
            tau,
            mode,
            output,
        } => {
            let g = load_two(&game)?;
            let mut prov = Provenance::new();
            let out = match mode {
                BiregMode::Graphical => {
                    let b = biregularize_graphical(&g)?;
                    prov.insert("mode".into(), "graphical".into());
                    prov.insert("units".into(), b.units.to_string());
                    b.game
                }
                BiregMode::General => {
                    let b = biregularize(&g, &tau, cap)?;
                    prov.insert("mode".into(), "general".into());
                    prov.insert("tau".into(), arith::show(&tau));
                    prov.insert("q".into(), b.q.to_string());
                    prov.insert("null_mass".into(), arith::show(&b.null_mass));
                    prov.insert("x_bound".into(), arith::show(&b.x_bound));
                    prov.insert("y_bound".into(), arith::show(&b.y_bound));
                    b.result.game
                }
            };
            prov.insert("source_sha256".into(), fortify::pipeline::sha256_hex(&std::fs::read(&game)?));
            emit(&io::game_to_json(&out, &prov), output.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::Concat {
            game,
            left_graph,
            right_graph,
            output,
        } => {
            let cg = load_concat(&game, &left_graph, &right_graph)?;
            let mut prov = Provenance::new();
            prov.insert("left_lambda".into(), format!("{:.12e}", cg.left_lambda().unwrap_or(f64::NAN)));
            prov.insert("right_lambda".into(), format!("{:.12e}", cg.right_lambda().unwrap_or(f64::NAN)));
            let outer = cg.outer_game_capped(DEFAULT_SIZE_CAP.max(cap))?;
            emit(&io::game_to_json(&outer, &prov), output.as_deref())?;
            Ok(Outcome::Pass)
        }
        Command::OrderedFort {
            game,
            left_graph,
            right_graph,
            l,
            family,
            output,
        } => {
            let g = load_two(&game)?;
            let m = BipartiteExpander::certify(io::read_graph(&left_graph)?)?;
            let p = BipartiteExpander::certify(io::read_graph(&right_graph)?)?;
            let of = ordered_fortify(&g, &m, &p, l, family.into(), cap)?;
            let mut ok = true;
            for (side, base, tilde) in [("left", &m, &of.left_tilde), ("right", &p, &of.right_tilde)] {
                let d = base.degree();
                let bound = if d >= 2 {
                    base.lambda().max(1.0 / ((d - 1) as f64).sqrt())
                } else {
                    f64::INFINITY
                };
                let pass = tilde.lambda() <= bound + tol;
                ok &= pass;
                eprintln!(
                    "{side}: lambda={:.12} lambda_tilde={:.12} bound={:.12} {}",
                    base.lambda(),
                    tilde.lambda(),
                    bound,
                    if pass { "Pass" } else { "Fail" }
                );
            }
            eprintln!("l: {}", of.l);
            let outer = of.game.outer_game_capped(DEFAULT_SIZE_CAP.max(cap))?;
            let mut prov = Provenance::new();
            prov.insert("l".into(), of.l.to_string());
            prov.insert("left_tilde_lambda".into(), format!("{:.12e}", of.left_tilde.lambda()));
            prov.insert("right_tilde_lambda".into(), format!("{:.12e}", of.right_tilde.lambda()));
            emit(&io::game_to_json(&outer, &prov), output.as_deref())?;
            Ok(verdict(ok))
        }
        Command::CheckFort {
            game,
            graphs,
            params,
            mode,
            restarts,
        } => {
            let graphs = graphs
                .iter()
                .map(|p| BipartiteExpander::certify(io::read_graph(p)?))
                .collect::<fortify::Result<Vec<_>>>()?;
            match io::read_any_game(&game)?.0 {
                AnyGame::Two(g) => {
                    if graphs.len() != 2 {
                        return Err(Error::Parameter("a two-player game needs exactly two graphs".into()));
                    }
                    let cg = concatenate(&graphs[0], &g, &graphs[1])?;
                    let (e, d) = (&params.epsilon, &params.delta);
                    match mode {
                        CheckMode::Exact | CheckMode::Ascent | CheckMode::Combinatorial => {
                            let r = match mode {
                                CheckMode::Exact => fortification_violation(&cg, e, d, SearchMode::Exact, cap)?,
                                CheckMode::Ascent => fortification_violation(
                                    &cg,
                                    e,
                                    d,
                                    SearchMode::Ascent {
                                        restarts,
                                        seed: cli.seed,
                                    },
                                    cap,
                                )?,
                                _ => combinatorial_fortification_check(&cg, e, d, cap)?,
                            };
                            println!("{r}");
                            Ok(verdict(r.verdict != Verdict::Violated))
                        }
                        CheckMode::Pointwise => {
                            let r = pointwise_bound_check(&cg, cap)?;
                            println!("{r}");
                            let margin = r.worst_margin - fortify::spectral::SPECTRAL_SLACK + tol;
                            Ok(verdict(margin >= 0.0))
                        }
                        CheckMode::Proof => Err(Error::Parameter("proof mode needs a k-player game".into())),
                    }
                }
                AnyGame::Many(g) => {
                    let cg = concatenate_multiplayer(&graphs, &g)?;
                    match mode {
                        CheckMode::Exact => {
                            let r = multiplayer_violation(&cg, &params.epsilon, &params.delta, cap)?;
                            println!("{r}");
                            Ok(verdict(r.verdict != Verdict::Violated))
                        }
                        CheckMode::Proof => {
                            let r = multiplayer_proof_check(&cg, cap)?;
                            println!("{r}");
                            Ok(verdict(arith::to_f64(&r.max_excess) <= r.proof_bound + tol))
                        }
                        _ => Err(Error::Parameter("k-player games support --mode exact or proof".into())),
                    }
                }
            }
        }
        Command::Spectral { graph, target } => {
            let g = io::read_graph(&graph)?;
            let sv = singular_values(&normalized_adjacency(&g)?);
            let e = BipartiteExpander::certify(g)?;
            println!("left_size: {}", e.graph().left_size());
            println!("right_size: {}", e.graph().right_size());
            match e.graph().right_regular_degree() {
                Some(d) => println!("right_degree: {d}"),
                None => println!("right_degree: irregular"),
            }
            println!("balanced: {}", e.balanced());
            println!("lambda: {:.12}", e.lambda());
            let cells: Vec<String> = sv.iter().map(|s| format!("{s:.12}")).collect();
            println!("spectrum: [{}]", cells.join(", "));
            Ok(match target {
                Some(t) => {
                    let ok = e.lambda() <= t + tol;
                    println!("target: {t:.12} {}", if ok { "Pass" } else { "Fail" });
                    verdict(ok)
                }
                None => Outcome::Pass,
            })
        }
        Command::Repeat {
            game,
            left_graph,
            right_graph,
            m,
            params,
            steps,
        } => {
            let cg = load_concat(&game, &left_graph, &right_graph)?;
            let r = repetition_bound_check(&cg, m, &params.epsilon, &params.delta, steps, cap)?;
            println!("{r}");
            Ok(verdict(r.passed()))
        }
        Command::Plan { sigma, tau, beta } => {
            let p = gap_amplification_plan(sigma, &tau, &beta)?;
            println!("{p}");
            Ok(verdict(p.satisfies_invariants()))
        }
        Command::Pipeline(a) => {
            let g = load_two(&a.game)?;
            let mut cfg = PipelineConfig::new(a.tau, a.epsilon, a.delta);
            cfg.ordered = a.ordered;
            cfg.l = a.l;
            cfg.family = a.family.into();
            cfg.quantum_target = a.quantum_target;
            cfg.degree = a.degree;
            cfg.max_attempts = a.attempts;
            cfg.left_graph = a.left_graph.as_deref().map(io::read_graph).transpose()?;
            cfg.right_graph = a.right_graph.as_deref().map(io::read_graph).transpose()?;
            cfg.certify = !a.no_certify;
            cfg.repeat = (a.repeat > 0).then_some(a.repeat);
            cfg.seed = cli.seed;
            cfg.cap = cap;
            cfg.source_sha256 = Some(fortify::pipeline::sha256_hex(&std::fs::read(&a.game)?));
            let out = run_pipeline(&g, &cfg)?;
            out.write_to(&a.out)?;
            print!("{}", out.manifest());
            for (name, s) in [("certification", &out.certification), ("repetition", &out.repetition)] {
                if let StageStatus::Skipped(why) = s {
                    eprintln!("{name} skipped: {why}");
                }
            }
            Ok(verdict(out.passed()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

//! End-to-end run: biregularize, pick expanders, concatenate (or
//! ordered-fortify), certify, then check parallel repetition.
//!
//! Every artifact is produced in memory and written in one go, together with
//! a manifest listing parameters, seeds and SHA-256 hashes. Nothing depends
//! on the clock, so equal inputs give byte-identical output directories.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::arith::{self, Rational};
use crate::bireg::{biregularize, biregularize_graphical};
use crate::concat::{concatenate, fortification_violation, ConcatenatedGame, SearchMode, Verdict};
use crate::error::{Error, Result};
use crate::game::{classical_value_capped, is_biregular, Game};
use crate::io::{self, Provenance};
use crate::ordered::{ordered_fortify, FamilyKind};
use crate::plan::{classical_lambda_target, quantum_lambda_target};
use crate::repetition::repetition_bound_check;
use crate::spectral::{random_biregular_expander, BipartiteExpander, BipartiteGraph, SPECTRAL_SLACK};

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub tau: Rational,
    pub epsilon: Rational,
    pub delta: Rational,
    /// Use ordered fortification instead of plain concatenation.
    pub ordered: bool,
    pub l: Option<usize>,
    pub family: FamilyKind,
    /// Require `λ ≤ ε²δ/56` instead of `λ ≤ (ε/2)√(δ/2)`.
    pub quantum_target: bool,
    /// Fixed expander degree; otherwise the smallest degree that meets the target.
    pub degree: Option<usize>,
    pub max_attempts: u64,
    /// Caller-supplied graphs, accepted only if they meet the target.
    pub left_graph: Option<BipartiteGraph>,
    pub right_graph: Option<BipartiteGraph>,
    pub certify: bool,
    /// Rounds for the repetition check; `None` skips it.
    pub repeat: Option<usize>,
    pub seed: u64,
    pub cap: u128,
    /// SHA-256 of the input file as read from disk, recorded in the manifest.
    pub source_sha256: Option<String>,
}

impl PipelineConfig {
    pub fn new(tau: Rational, epsilon: Rational, delta: Rational) -> PipelineConfig {
        PipelineConfig {
            tau,
            epsilon,
            delta,
            ordered: false,
            l: None,
            family: FamilyKind::Full,
            quantum_target: false,
            degree: None,
            max_attempts: 64,
            left_graph: None,
            right_graph: None,
            certify: true,
            repeat: Some(2),
            seed: 0,
            cap: crate::game::DEFAULT_ENUMERATION_CAP,
            source_sha256: None,
        }
    }

    pub fn lambda_target(&self) -> f64 {
        if self.quantum_target {
            quantum_lambda_target(&self.epsilon, &self.delta)
        } else {
            classical_lambda_target(&self.epsilon, &self.delta)
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

impl Artifact {
    pub fn sha256(&self) -> String {
        sha256_hex(self.contents.as_bytes())
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Result of an optional check stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StageStatus {
    Passed,
    Failed,
    Skipped(String),
}

#[derive(Clone, Debug)]
pub struct PipelineOutcome {
    /// Written in this order; the manifest is last.
    pub artifacts: Vec<Artifact>,
    pub certification: StageStatus,
    pub repetition: StageStatus,
    /// True when every graph is complete, i.e. no sparse expander met the target.
    pub complete_graphs_only: bool,
}

impl PipelineOutcome {
    pub fn passed(&self) -> bool {
        self.certification != StageStatus::Failed && self.repetition != StageStatus::Failed
    }

    pub fn manifest(&self) -> &str {
        &self.artifacts.last().expect("manifest is always written").contents
    }

    pub fn write_to(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        for a in &self.artifacts {
            std::fs::write(dir.join(&a.name), &a.contents)?;
        }
        Ok(())
    }
}

struct Manifest {
    text: String,
}

impl Manifest {
    fn stage(&mut self, name: &str, claim: &str) {
        let _ = writeln!(self.text, "\n[stage {name}]");
        let _ = writeln!(self.text, "claim: {claim}");
    }
    fn line(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}: {value}");
    }
    fn output(&mut self, a: &Artifact) {
        let _ = writeln!(self.text, "output: {} sha256={}", a.name, a.sha256());
    }
}

fn value_line(g: &Game, cap: u128) -> Result<String> {
    match classical_value_capped(g, cap) {
        Ok(v) => Ok(arith::show(&v)),
        Err(e) if e.is_size_error() => Ok(format!("skipped ({e})")),
        Err(e) => Err(e),
    }
}

fn choose_expander(
    n: usize,
    supplied: Option<&BipartiteGraph>,
    cfg: &PipelineConfig,
    target: f64,
    seed: u64,
) -> Result<BipartiteExpander> {
    if let Some(g) = supplied {
        let e = BipartiteExpander::certify(g.clone())?;
        if e.graph().right_size() != n {
            return Err(Error::Shape(format!(
                "supplied graph has {} right vertices, game side has {n}",
                e.graph().right_size()
            )));
        }
        if e.lambda() > target + SPECTRAL_SLACK {
            return Err(Error::TargetUnreachable {
                best: e.lambda(),
                target,
                attempts: 1,
            });
        }
        return Ok(e);
    }
    if let Some(d) = cfg.degree {
        return random_biregular_expander(n, d, target, seed, cfg.max_attempts);
    }
    for d in 2..n {
        match random_biregular_expander(n, d, target, seed, cfg.max_attempts) {
            Ok(e) => return Ok(e),
            Err(Error::TargetUnreachable { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    random_biregular_expander(n, n, target, seed, cfg.max_attempts)
}

fn is_complete(g: &BipartiteGraph) -> bool {
    g.right_regular_degree() == Some(g.left_size()) && !g.has_multi_edges()
}

/// Runs every stage on `input`. Stage errors carry the stage name; checks
/// that exceed the cap are recorded as skipped rather than approximated.
pub fn run_pipeline(input: &Game, cfg: &PipelineConfig) -> Result<PipelineOutcome> {
    let zero = Rational::from_integer(0.into());
    if cfg.epsilon <= zero || cfg.delta <= zero {
        return Err(Error::Parameter("ε and δ must be positive".into()));
    }
    let cap = cfg.cap;
    let target = cfg.lambda_target();
    let mut artifacts = Vec::new();
    let mut mf = Manifest { text: String::from("fortify pipeline manifest\n") };
    mf.line("seed", cfg.seed);
    mf.line("cap", cap);
    mf.line("tau", arith::show(&cfg.tau));
    mf.line("epsilon", arith::show(&cfg.epsilon));
    mf.line("delta", arith::show(&cfg.delta));
    mf.line("construction", if cfg.ordered { "ordered" } else { "concatenation" });
    mf.line(
        "lambda_target",
        format!(
            "{target:.12e} ({})",
            if cfg.quantum_target {
                "quantum: eps^2*delta/56"
            } else {
                "classical: (eps/2)*sqrt(delta/2)"
            }
        ),
    );
    mf.line("spectral_slack", SPECTRAL_SLACK);

    let input_art = Artifact {
        name: "00_input.json".into(),
        contents: io::game_to_json(input, &Provenance::new()),
    };
    mf.stage("input", "canonical re-serialization of the input game");
    if let Some(h) = &cfg.source_sha256 {
        mf.line("source_sha256", h);
    }
    mf.output(&input_art);
    mf.line("value", value_line(input, cap)?);
    artifacts.push(input_art);

    // biregularize
    let stage = "biregularize";
    mf.stage(stage, "val(G) <= val(G_bireg) <= val(G) + tau; exact for graphical games");
    let inner = if is_biregular(input) {
        mf.line("status", "skipped (input already has uniform marginals)");
        input.clone()
    } else {
        match biregularize_graphical(input) {
            Ok(b) => {
                mf.line("status", "graphical construction");
                mf.line("units", b.units);
                b.game
            }
            Err(Error::NotGraphical(_)) => {
                let b = biregularize(input, &cfg.tau, cap).map_err(|e| e.in_stage(stage))?;
                mf.line("status", "general construction");
                mf.line("q", b.q);
                mf.line("null_mass", arith::show(&b.null_mass));
                mf.line("x_bound", arith::show(&b.x_bound));
                mf.line("y_bound", arith::show(&b.y_bound));
                b.result.game
            }
            Err(e) => return Err(e.in_stage(stage)),
        }
    };
    let mut prov = Provenance::new();
    prov.insert("stage".into(), stage.into());
    prov.insert("tau".into(), arith::show(&cfg.tau));
    let bireg_art = Artifact {
        name: "01_biregular.json".into(),
        contents: io::game_to_json(&inner, &prov),
    };
    mf.output(&bireg_art);
    mf.line("value", value_line(&inner, cap)?);
    artifacts.push(bireg_art);

    // expanders
    let stage = "expanders";
    mf.stage(stage, "balanced biregular graphs with certified second singular value <= lambda_target");
    let seeds = [cfg.seed.wrapping_mul(2), cfg.seed.wrapping_mul(2).wrapping_add(1)];
    let m = choose_expander(inner.x_size(), cfg.left_graph.as_ref(), cfg, target, seeds[0])
        .map_err(|e| e.in_stage(stage))?;
    let p = choose_expander(inner.y_size(), cfg.right_graph.as_ref(), cfg, target, seeds[1])
        .map_err(|e| e.in_stage(stage))?;
    let complete_graphs_only = is_complete(m.graph()) && is_complete(p.graph());
    for (name, e, s) in [("02_left_graph.json", &m, seeds[0]), ("03_right_graph.json", &p, seeds[1])] {
        let a = Artifact {
            name: name.into(),
            contents: io::graph_to_json(e.graph()),
        };
        mf.output(&a);
        mf.line("  degree", e.degree());
        mf.line("  lambda", format!("{:.12e}", e.lambda()));
        mf.line("  seed", s);
        artifacts.push(a);
    }
    if complete_graphs_only {
        mf.line("note", "no sparse graph met the target at this size; complete graphs (lambda = 0) were used");
    }

    // concatenate or ordered-fortify
    let stage = if cfg.ordered { "ordered_fortify" } else { "concatenate" };
    let cg: ConcatenatedGame = if cfg.ordered {
        mf.stage(stage, "G_OF is the concatenation of the tilde lifts around the disjoint union; val(G_OF) = val(G)");
        let of = ordered_fortify(&inner, &m, &p, cfg.l, cfg.family, cap).map_err(|e| e.in_stage(stage))?;
        mf.line("l", of.l);
        mf.line("family", format!("{:?}", cfg.family));
        mf.line("left_tilde_lambda", format!("{:.12e}", of.left_tilde.lambda()));
        mf.line("right_tilde_lambda", format!("{:.12e}", of.right_tilde.lambda()));
        of.game
    } else {
        mf.stage(stage, "val(M o G o P) = val(G)");
        concatenate(&m, &inner, &p).map_err(|e| e.in_stage(stage))?
    };
    let (ao, bo) = cg.outer_alphabet();
    mf.line("outer_questions", format!("{}x{}", cg.outer_x_size(), cg.outer_y_size()));
    mf.line("outer_alphabet", format!("{ao}x{bo}"));
    match cg.outer_game_capped(crate::game::DEFAULT_SIZE_CAP) {
        Ok(outer) => {
            let mut prov = Provenance::new();
            prov.insert("stage".into(), stage.into());
            let a = Artifact {
                name: "04_outer.json".into(),
                contents: io::game_to_json(&outer, &prov),
            };
            mf.output(&a);
            mf.line("value", value_line(&outer, cap)?);
            artifacts.push(a);
        }
        Err(e) if e.is_size_error() => mf.line("output", format!("skipped ({e})")),
        Err(e) => return Err(e.in_stage(stage)),
    }

    // certify
    let stage = "certify";
    mf.stage(stage, "weak (eps, delta) fortification: sup val(f,g) - (val(G)+eps)*E f g <= delta over vertex pairs");
    let certification = if !cfg.certify {
        mf.line("status", "not requested");
        StageStatus::Skipped("not requested".into())
    } else {
        match fortification_violation(&cg, &cfg.epsilon, &cfg.delta, SearchMode::Exact, cap) {
            Ok(r) => {
                let a = Artifact {
                    name: "05_certificate.txt".into(),
                    contents: format!("{r}\n"),
                };
                mf.output(&a);
                mf.line("verdict", format!("{:?}", r.verdict));
                artifacts.push(a);
                if r.verdict == Verdict::Violated {
                    StageStatus::Failed
                } else {
                    StageStatus::Passed
                }
            }
            Err(e) if e.is_size_error() => {
                mf.line("status", format!("skipped ({e})"));
                StageStatus::Skipped(e.to_string())
            }
            Err(e) => return Err(e.in_stage(stage)),
        }
    };

    // repetition
    let stage = "repetition";
    mf.stage(stage, "val(G'^m) <= (val(G)+eps)^m + delta*(m-1)*|Sigma_G|^(m-1)");
    let repetition = match cfg.repeat {
        None => {
            mf.line("status", "not requested");
            StageStatus::Skipped("not requested".into())
        }
        Some(rounds) => match repetition_bound_check(&cg, rounds, &cfg.epsilon, &cfg.delta, true, cap) {
            Ok(r) => {
                let a = Artifact {
                    name: "06_repetition.txt".into(),
                    contents: format!("{r}\n"),
                };
                mf.output(&a);
                mf.line("m", rounds);
                mf.line("hypothesis", &r.hypothesis);
                mf.line("verdict", if r.passed() { "Pass" } else { "Fail" });
                artifacts.push(a);
                if !r.consistent() {
                    StageStatus::Failed
                } else if r.passed() {
                    StageStatus::Passed
                } else {
                    StageStatus::Skipped(format!("hypothesis {}", r.hypothesis))
                }
            }
            Err(e) if e.is_size_error() => {
                mf.line("status", format!("skipped ({e})"));
                StageStatus::Skipped(e.to_string())
            }
            Err(e) => return Err(e.in_stage(stage)),
        },
    };

    mf.stage("summary", "all asserted inequalities");
    mf.line("certification", format!("{certification:?}"));
    mf.line("repetition", format!("{repetition:?}"));
    artifacts.push(Artifact {
        name: "manifest.txt".into(),
        contents: mf.text,
    });
    Ok(PipelineOutcome {
        artifacts,
        certification,
        repetition,
        complete_graphs_only,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;
    use crate::library::{always_win, chsh};

    fn cfg() -> PipelineConfig {
        let mut c = PipelineConfig::new(rat(1, 4), rat(1, 2), rat(1, 2));
        c.seed = 3;
        c
    }

    #[test]
    fn trivial_game_keeps_value_one() {
        let out = run_pipeline(&always_win(1, 1, 1, 1), &cfg()).unwrap();
        assert!(out.passed());
        let values: Vec<&str> = out
            .manifest()
            .lines()
            .filter_map(|l| l.strip_prefix("value: "))
            .collect();
        assert_eq!(values, ["1", "1", "1"]);
    }

    #[test]
    fn chsh_certifies_and_repeats() {
        let out = run_pipeline(&chsh(), &cfg()).unwrap();
        assert_eq!(out.certification, StageStatus::Passed);
        assert_eq!(out.repetition, StageStatus::Passed);
        assert!(out.complete_graphs_only);
    }

    #[test]
    fn quantum_target_uses_complete_graphs() {
        let mut c = cfg();
        c.quantum_target = true;
        assert!((c.lambda_target() - 1.0 / 448.0).abs() < 1e-15);
        let out = run_pipeline(&chsh(), &c).unwrap();
        assert!(out.complete_graphs_only);
        assert!(out.manifest().contains("complete graphs"));
    }

    #[test]
    fn runs_are_byte_identical() {
        let a = run_pipeline(&chsh(), &cfg()).unwrap();
        let b = run_pipeline(&chsh(), &cfg()).unwrap();
        assert_eq!(a.artifacts, b.artifacts);
    }

    #[test]
    fn supplied_graph_above_target_is_a_stage_error() {
        let mut c = cfg();
        c.left_graph = Some(crate::spectral::perfect_matching(2).unwrap());
        let err = run_pipeline(&chsh(), &c).unwrap_err();
        assert!(err.to_string().starts_with("expanders:"), "{err}");
    }
}

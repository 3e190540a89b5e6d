use std::fs;
use std::io::Write;
use std::path::{Path as FsPath, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde_json::{json, Map, Value};

use tanglecheck_core::formula::{parse, subformula_closure, Formula};
use tanglecheck_core::frame::{Frame, RawFrame};
use tanglecheck_core::logic::{
    check_logic_on_frame, countermodel_search, run_suite, soundness_suite, AxiomSchema, LogicId, SearchConfig,
    SearchOutcome, SuiteConfig,
};
use tanglecheck_core::pathspace::{
    build_limit_assignment, cantor_preconditions, enumerate_paths, verify_lim_pmorphism,
};
use tanglecheck_core::semantics::{valid_on_frame, valuation_names, Model, ValidityMode, Verdict};
use tanglecheck_core::story::{Moment, RawStory, Story};

const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "tanglecheck", version, about = "Model checking for dynamic tangled derivative logics")]
struct Cli {
    /// Seed for randomized subcommands.
    #[arg(long, global = true, env = "TANGLE_SEED", default_value_t = 0)]
    seed: u64,

    /// Close the relation of input frames transitively instead of rejecting it.
    #[arg(long, global = true)]
    close_transitively: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exhaustive,
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a formula and print its normal form.
    Parse {
        #[arg(long)]
        formula: String,
    },
    /// Compute the truth set of a formula on a frame file with valuation.
    Check {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        formula: String,
        /// Fail unless the formula holds at this world.
        #[arg(long)]
        world: Option<String>,
    },
    /// Decide frame validity over valuations of the formula's variables.
    Validity {
        #[arg(long)]
        frame: PathBuf,
        #[arg(long)]
        formula: String,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: Mode,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
    /// Soundness suite of a logic on random frames of its class, or on one frame.
    Axioms {
        #[arg(long)]
        logic: String,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        /// Check the logic's schemas on this frame instead of random frames.
        #[arg(long)]
        frame: Option<PathBuf>,
        /// Additional schemas to include (for negative controls).
        #[arg(long = "extra-schema")]
        extra: Vec<String>,
    },
    /// Search the logic's frame class for a countermodel.
    Search {
        #[arg(long)]
        logic: String,
        #[arg(long)]
        formula: String,
        #[arg(long, default_value_t = 4)]
        max_worlds: usize,
        /// Random frames tried above the exhaustive bound.
        #[arg(long, default_value_t = 2000)]
        random_trials: usize,
    },
    /// Validate a story file.
    StoryValidate {
        #[arg(long)]
        story: PathBuf,
    },
    /// Report the logic classes a story belongs to.
    StoryClass {
        #[arg(long)]
        story: PathBuf,
    },
    /// Reflexive duplication of a frame or story.
    Oplus {
        #[arg(long, conflicts_with = "story", required_unless_present = "story")]
        frame: Option<PathBuf>,
        #[arg(long)]
        story: Option<PathBuf>,
    },
    /// Check that the limit map from paths to a story is a dynamic p-morphism.
    PathspaceVerify {
        #[arg(long, conflicts_with = "frame", required_unless_present = "frame")]
        story: Option<PathBuf>,
        /// A single moment given as a frame file; its function is ignored.
        #[arg(long, requires = "root")]
        frame: Option<PathBuf>,
        #[arg(long)]
        root: Option<String>,
        #[arg(long, default_value_t = 6)]
        resolution: usize,
        /// Apply reflexive duplication first.
        #[arg(long)]
        oplus: bool,
        /// Write the enumerated eventually constant paths, one per line.
        #[arg(long)]
        dump_paths: Option<PathBuf>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Parse { .. } => "parse",
            Command::Check { .. } => "check",
            Command::Validity { .. } => "validity",
            Command::Axioms { .. } => "axioms",
            Command::Search { .. } => "search",
            Command::StoryValidate { .. } => "story-validate",
            Command::StoryClass { .. } => "story-class",
            Command::Oplus { .. } => "oplus",
            Command::PathspaceVerify { .. } => "pathspace-verify",
        }
    }
}

/// Exit status with the report body.
struct Outcome {
    failed: bool,
    body: Map<String, Value>,
}

fn ok(body: Value) -> Outcome {
    Outcome {
        failed: false,
        body: into_map(body),
    }
}

fn fail_if(failed: bool, body: Value) -> Outcome {
    Outcome {
        failed,
        body: into_map(body),
    }
}

fn into_map(v: Value) -> Map<String, Value> {
    match v {
        Value::Object(m) => m,
        other => Map::from_iter([("result".to_string(), other)]),
    }
}

fn read_json<T: DeserializeOwned>(path: &FsPath) -> Result<T, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
}

fn parse_formula(text: &str) -> Result<Formula, String> {
    parse(text).map_err(|e| format!("formula: {e}"))
}

fn load_model(path: &FsPath, close: bool) -> Result<Model, String> {
    let raw: RawFrame = read_json(path)?;
    Model::from_raw(&raw, close).map_err(|e| format!("{}: {e}", path.display()))
}

fn load_story(path: &FsPath, close: bool) -> Result<Result<Story, Value>, String> {
    let raw: RawStory = read_json(path)?;
    match Story::from_raw(&raw, close) {
        Ok(s) => Ok(Ok(s)),
        Err(e) => match e.condition() {
            Some(c) => Ok(Err(json!({ "valid": false, "condition": c.to_string(), "error": e.to_string() }))),
            None => Err(format!("{}: {e}", path.display())),
        },
    }
}

fn logic(name: &str) -> Result<LogicId, String> {
    name.parse().map_err(|e: tanglecheck_core::logic::LogicError| e.to_string())
}

fn story_summary(story: &Story) -> Value {
    json!({
        "valid": true,
        "duration": story.duration(),
        "worlds": story.frame().len(),
        "immersive": story.is_immersive(),
        "class": story.class(),
    })
}

fn run(cli: &Cli) -> Result<Outcome, String> {
    let close = cli.close_transitively;
    match &cli.command {
        Command::Parse { formula } => {
            let f = parse_formula(formula)?;
            Ok(ok(json!({
                "formula": f.to_string(),
                "size": f.size(),
                "next_depth": f.next_depth(),
                "vars": f.vars(),
                "closure_size": subformula_closure(&f).len(),
            })))
        }
        Command::Check { frame, formula, world } => {
            let model = load_model(frame, close)?;
            let f = parse_formula(formula)?;
            let truth = model.truth_set(&f);
            let mut body = json!({
                "formula": f.to_string(),
                "truth_set": model.frame.set_names(&truth),
            });
            let mut failed = false;
            if let Some(w) = world {
                let idx = model.frame.world(w).ok_or_else(|| format!("unknown world {w:?}"))?;
                let holds = truth.contains(idx);
                body["world"] = json!(w);
                body["holds"] = json!(holds);
                failed = !holds;
            }
            Ok(fail_if(failed, body))
        }
        Command::Validity { frame, formula, mode, samples } => {
            let model = load_model(frame, close)?;
            let f = parse_formula(formula)?;
            let mode = match mode {
                Mode::Exhaustive => ValidityMode::Exhaustive,
                Mode::Sampled => ValidityMode::Sampled { samples: *samples, seed: cli.seed },
            };
            match valid_on_frame(&model.frame, &f, mode).map_err(|e| e.to_string())? {
                Verdict::Valid => Ok(ok(json!({ "formula": f.to_string(), "valid": true }))),
                Verdict::Countermodel { valuation, world } => {
                    let mut raw = model.frame.to_raw();
                    raw.valuation = Some(valuation_names(&model.frame, &valuation));
                    Ok(fail_if(
                        true,
                        json!({
                            "formula": f.to_string(),
                            "valid": false,
                            "world": model.frame.name(world),
                            "countermodel": raw,
                        }),
                    ))
                }
            }
        }
        Command::Axioms { logic: name, trials, max_worlds, frame, extra } => {
            let l = logic(name)?;
            if *trials == 0 {
                return Err("--trials must be at least 1".into());
            }
            let mut config = SuiteConfig::new(*trials, cli.seed);
            config.max_worlds = *max_worlds;
            let report = match frame {
                Some(path) => {
                    let model = load_model(path, close)?;
                    check_logic_on_frame(l, &model.frame, &config)
                }
                None if extra.is_empty() => soundness_suite(l, &config),
                None => {
                    let mut schemas = l.schemas();
                    for s in extra {
                        schemas.push(s.parse::<AxiomSchema>().map_err(|e| e.to_string())?);
                    }
                    let label = format!("{}+{}", l.name(), extra.join("+"));
                    run_suite(&label, &schemas, &l.frame_class(), &config)
                }
            };
            let failed = !report.passed();
            Ok(fail_if(failed, serde_json::to_value(report).expect("serializable")))
        }
        Command::Search { logic: name, formula, max_worlds, random_trials } => {
            let l = logic(name)?;
            let f = parse_formula(formula)?;
            let mut config = SearchConfig::new(*max_worlds, cli.seed);
            config.random_trials = *random_trials;
            let head = json!({ "logic": l.name(), "formula": f.to_string(), "max_worlds": max_worlds });
            match countermodel_search(&f, l, &config) {
                SearchOutcome::Countermodel(c) => {
                    let mut body = into_map(head);
                    body.insert("verdict".into(), json!("countermodel"));
                    body.insert("world".into(), json!(c.frame.name(c.world)));
                    body.insert("countermodel".into(), serde_json::to_value(c.to_raw()).expect("serializable"));
                    Ok(Outcome { failed: true, body })
                }
                SearchOutcome::NoneWithinBounds { exhaustive_worlds, random_trials } => {
                    let mut body = into_map(head);
                    body.insert("verdict".into(), json!("none-within-bounds"));
                    body.insert("exhaustive_worlds".into(), json!(exhaustive_worlds));
                    body.insert("random_trials".into(), json!(random_trials));
                    Ok(Outcome { failed: false, body })
                }
            }
        }
        Command::StoryValidate { story } => Ok(match load_story(story, close)? {
            Ok(s) => ok(story_summary(&s)),
            Err(body) => fail_if(true, body),
        }),
        Command::StoryClass { story } => Ok(match load_story(story, close)? {
            Ok(s) => ok(json!({ "class": s.class(), "immersive": s.is_immersive() })),
            Err(body) => fail_if(true, body),
        }),
        Command::Oplus { frame, story } => {
            if let Some(path) = frame {
                let model = load_model(path, close)?;
                let (dup, projection) = model.frame.duplicate_reflexive();
                let valuation = model
                    .valuation
                    .iter()
                    .map(|(k, s)| {
                        let lifted = dup.worlds().filter(|&x| s.contains(projection[x]));
                        (k.clone(), tanglecheck_core::WorldSet::from_worlds(dup.len(), lifted))
                    })
                    .collect();
                let lifted = Model::new(dup, valuation);
                let proj: Map<String, Value> = lifted
                    .frame
                    .worlds()
                    .map(|x| (lifted.frame.name(x).to_string(), json!(model.frame.name(projection[x]))))
                    .collect();
                Ok(ok(json!({ "frame": lifted.to_raw(), "projection": proj })))
            } else {
                let path = story.as_ref().expect("clap enforces one input");
                match load_story(path, close)? {
                    Ok(s) => Ok(ok(json!({ "story": s.duplicate_reflexive().to_raw() }))),
                    Err(body) => Ok(fail_if(true, body)),
                }
            }
        }
        Command::PathspaceVerify { story, frame, root, resolution, oplus, dump_paths } => {
            let story = match (story, frame) {
                (Some(path), _) => match load_story(path, close)? {
                    Ok(s) => s,
                    Err(body) => return Ok(fail_if(true, body)),
                },
                (None, Some(path)) => {
                    let model = load_model(path, close)?;
                    let root_name = root.as_deref().expect("clap requires --root");
                    let r = model.frame.world(root_name).ok_or_else(|| format!("unknown root {root_name:?}"))?;
                    let names = model.frame.names().to_vec();
                    let pairs = model.frame.pairs();
                    let bare = Frame::from_indices(names, &pairs, (0..model.frame.len()).collect(), false)
                        .map_err(|e| e.to_string())?;
                    let moment = Moment::new(bare, r, model.valuation.clone()).map_err(|e| format!("{}: {e}", path.display()))?;
                    Story::single_level(moment)
                }
                (None, None) => unreachable!("clap requires an input"),
            };
            let story = if *oplus { story.duplicate_reflexive() } else { story };
            let assignment = build_limit_assignment(&story);
            let report = verify_lim_pmorphism(&story, &assignment, *resolution).map_err(|e| e.to_string())?;
            if let Some(out) = dump_paths {
                let lines: Vec<String> = enumerate_paths(story.frame(), *resolution)
                    .iter()
                    .map(|p| p.display(story.frame()).to_string())
                    .collect();
                fs::write(out, lines.join("\n") + "\n").map_err(|e| format!("{}: {e}", out.display()))?;
            }
            let failed = !report.passed();
            Ok(fail_if(
                failed,
                json!({
                    "ranks": story.frame().worlds().map(|w| (story.frame().name(w).to_string(), json!(assignment.rank(w)))).collect::<Map<_, _>>(),
                    "preconditions": cantor_preconditions(story.frame(), *resolution),
                    "report": report,
                }),
            ))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let _ = e.print();
            let report = json!({
                "schema_version": SCHEMA_VERSION,
                "command": Value::Null,
                "status": "error",
                "error": e.kind().to_string(),
            });
            emit(&report);
            return ExitCode::from(2);
        }
    };
    let command = cli.command.name();
    let mut report = Map::new();
    report.insert("schema_version".into(), json!(SCHEMA_VERSION));
    report.insert("command".into(), json!(command));
    report.insert("seed".into(), json!(cli.seed));
    let code = match run(&cli) {
        Ok(outcome) => {
            report.insert("status".into(), json!(if outcome.failed { "fail" } else { "ok" }));
            report.extend(outcome.body);
            if outcome.failed {
                1
            } else {
                0
            }
        }
        Err(msg) => {
            eprintln!("error: {msg}");
            report.insert("status".into(), json!("error"));
            report.insert("error".into(), json!(msg));
            2
        }
    };
    emit(&Value::Object(report));
    ExitCode::from(code)
}

fn emit(report: &Value) {
    let text = serde_json::to_string_pretty(report).expect("serializable");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

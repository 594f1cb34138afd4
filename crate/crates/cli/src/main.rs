use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use fipsynth_core::arena::{arena_to_file, build, export_dot, Limits};
use fipsynth_core::fip::VisibilityMode;
use fipsynth_core::io::{game_to_json, ConditionFile, GameFile, StrategyFile, TwoTapeFile};
use fipsynth_core::knowledge::{coalition_label, Knowledge};
use fipsynth_core::normalize::normalize;
use fipsynth_core::oracle::{report, DEFAULT_H_DEPTH};
use fipsynth_core::solve::{extract_strategy, solve, Strategy, Winner};
use fipsynth_core::twotape::{fip_to_2dfa, is_indist_relation, relation_equivalent, TwoTapeDfa};
use fipsynth_core::{Error, FipGame};

/// Exit codes. They are part of the interface.
const WIN: u8 = 0;
const LOSE: u8 = 1;
const IO: u8 = 2;
const LIMITS: u8 = 3;

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Core { path: PathBuf, source: Error },
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    fn code(&self) -> u8 {
        let e = match self {
            CliError::Io { .. } => return IO,
            CliError::Core { source, .. } | CliError::Run(source) => source,
        };
        match e {
            Error::Schema(_) | Error::UnknownLetter(_) | Error::AlphabetMismatch(_) | Error::DepthExceeded(..) => IO,
            Error::LimitExceeded { .. } | Error::TooLarge(_) => LIMITS,
            _ => LOSE,
        }
    }
}

type Result<T> = std::result::Result<T, CliError>;

#[derive(Parser)]
#[command(name = "fipsynth", version, about = "Strategy synthesis for games with finite-state information protocols")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Visibility {
    /// Every pair of player-0 observation states.
    AllPairs,
    /// Only jointly reachable pairs.
    Reachable,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Dot,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Check a game file; exit 1 with the violations if it is invalid.
    Validate {
        game: PathBuf,
        #[arg(long, value_enum, default_value = "all-pairs")]
        strict_visibility: Visibility,
    },
    /// Print the normalized game as JSON.
    Normalize { game: PathBuf },
    /// Print the knowledge configuration reached by a history.
    Inspect {
        game: PathBuf,
        /// Moves of the game, separated by spaces or commas.
        #[arg(long, default_value = "")]
        history: String,
    },
    /// Dump the game arena.
    Arena {
        game: PathBuf,
        #[arg(long, value_enum, default_value = "dot")]
        format: Format,
        #[arg(long, env = "FIPSYNTH_MAX_NODES")]
        max_nodes: Option<usize>,
    },
    /// Decide the game and write a winning strategy.
    Synth {
        game: PathBuf,
        /// Strategy output; standard output when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the arena as DOT.
        #[arg(long)]
        dot: Option<PathBuf>,
        #[arg(long, env = "FIPSYNTH_MAX_NODES")]
        max_nodes: Option<usize>,
        /// A JSON file holding a condition block that replaces the game's.
        #[arg(long)]
        condition_override: Option<PathBuf>,
    },
    /// Build the two-tape automaton of player 0's indistinguishability.
    #[command(name = "to-2dfa")]
    To2dfa {
        game: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Compare against another two-tape automaton; exit 1 with a witness if they differ.
        #[arg(long)]
        compare: Option<PathBuf>,
    },
    /// Check that a two-tape automaton defines an indistinguishability relation.
    #[command(name = "check-2dfa")]
    Check2dfa { relation: PathBuf },
    /// Recompute the construction by brute force and print a JSON report.
    Oracle {
        game: PathBuf,
        #[arg(long, default_value_t = DEFAULT_H_DEPTH)]
        depth: usize,
        /// Also play this strategy against every environment choice.
        #[arg(long)]
        verify: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Core { path: path.into(), source: Error::Schema(e.to_string()) })
}

fn game_file(path: &Path) -> Result<GameFile> {
    GameFile::parse(&read(path)?).map_err(|source| CliError::Core { path: path.into(), source })
}

fn load(path: &Path) -> Result<FipGame> {
    let f = game_file(path)?;
    let built = f.to_game().map_err(|source| CliError::Core { path: path.into(), source })?;
    built.map_err(|v| {
        let msg = v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        CliError::Core { path: path.into(), source: Error::InvalidGame(msg) }
    })
}

fn load_relation(path: &Path) -> Result<TwoTapeDfa> {
    let f: TwoTapeFile = json(path)?;
    TwoTapeDfa::from_file(&f).map_err(|source| CliError::Core { path: path.into(), source })
}

fn limits(max_nodes: Option<usize>) -> Limits {
    let mut l = Limits::default();
    if let Some(n) = max_nodes {
        l.max_nodes = n;
    }
    l
}

fn pretty<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializes")
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn validate(path: &Path, vis: Visibility) -> Result<u8> {
    let mode = match vis {
        Visibility::AllPairs => VisibilityMode::AllPairs,
        Visibility::Reachable => VisibilityMode::Reachable,
    };
    let f = game_file(path)?;
    match f.to_game_with(mode).map_err(|source| CliError::Core { path: path.into(), source })? {
        Ok(g) => {
            println!(
                "valid: {} players, {} moves, {} observations, {} colors",
                g.num_players,
                g.moves.len(),
                g.observations.len(),
                g.colors.len()
            );
            Ok(WIN)
        }
        Err(violations) => {
            println!("invalid: {} violation(s)", violations.len());
            for v in violations {
                println!("  {v}");
            }
            Ok(LOSE)
        }
    }
}

fn inspect(path: &Path, history: &str) -> Result<u8> {
    let g = load(path)?;
    let t = history
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|s| !s.is_empty())
        .map(|s| g.moves.lookup(s))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let n = normalize(&g)?;
    println!(
        "{} profile letters, {} folded states, feasibility sink {}",
        n.base.moves.len(),
        n.base.coloring.base.num_states(),
        n.base.coloring.base.state_names[n.sink as usize]
    );
    let image = n.image(&t)?;
    let names: Vec<&str> = image.iter().map(|&d| n.profile_name(d)).collect();
    println!("history: [{}]", names.join(" "));
    let mut k = Knowledge::new(&n);
    let p = k.run(&image)?;
    for j in k.coalitions_desc() {
        println!("{}:", coalition_label(j));
        for line in k.render(p.get(j)).lines() {
            println!("  {line}");
        }
    }
    Ok(WIN)
}

fn arena(path: &Path, format: Format, max_nodes: Option<usize>) -> Result<u8> {
    let g = load(path)?;
    let n = normalize(&g)?;
    let built = build(&n, limits(max_nodes))?;
    match format {
        Format::Dot => print!("{}", export_dot(&built.arena)),
        Format::Json => println!("{}", pretty(&arena_to_file(&built.arena))),
    }
    Ok(WIN)
}

fn synth(
    path: &Path,
    out: Option<&Path>,
    dot: Option<&Path>,
    max_nodes: Option<usize>,
    condition: Option<&Path>,
) -> Result<u8> {
    let g = match condition {
        None => load(path)?,
        Some(c) => {
            let mut f = game_file(path)?;
            f.condition = json::<ConditionFile>(c)?;
            let game = f.to_game().map_err(|source| CliError::Core { path: c.into(), source })?;
            game.map_err(|v| CliError::Core {
                path: c.into(),
                source: Error::InvalidGame(v.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")),
            })?
        }
    };
    let n = normalize(&g)?;
    let mut built = build(&n, limits(max_nodes)).map_err(|e| {
        if let Error::LimitExceeded { nodes, configs, values } = &e {
            eprintln!("limit reached: {nodes} nodes, {configs} configurations, {values} values");
        }
        CliError::Run(e)
    })?;
    if let Some(d) = dot {
        write(d, &export_dot(&built.arena))?;
    }
    let r = solve(&built.arena, &g.condition);
    eprintln!("arena: {} nodes, {} configurations", built.arena.len(), built.config_count());
    match r.winner {
        Winner::PlayerLoses => {
            eprintln!("player 0 loses");
            Ok(LOSE)
        }
        Winner::PlayerWins => {
            let s = extract_strategy(&n, &mut built, &r)?;
            eprintln!("player 0 wins with a {}-state strategy", s.machine.base.num_states());
            emit(out, &pretty(&s.to_file()))?;
            Ok(WIN)
        }
    }
}

fn to_2dfa(path: &Path, out: Option<&Path>, compare: Option<&Path>) -> Result<u8> {
    let g = load(path)?;
    let r = fip_to_2dfa(&g)?;
    emit(out, &pretty(&r.to_file()))?;
    let Some(other) = compare else { return Ok(WIN) };
    let o = load_relation(other)?;
    match relation_equivalent(&r, &o)? {
        None => {
            eprintln!("equivalent to {}", other.display());
            Ok(WIN)
        }
        Some((u, v)) => {
            let w = |t: &[usize]| t.iter().map(|&c| g.moves.name(c)).collect::<Vec<_>>().join(" ");
            eprintln!("differs from {} on ([{}], [{}])", other.display(), w(&u), w(&v));
            Ok(LOSE)
        }
    }
}

fn check_2dfa(path: &Path) -> Result<u8> {
    let r = load_relation(path)?;
    let d = is_indist_relation(&r, r.act.is_some())?;
    if d.is_valid() {
        println!("valid indistinguishability relation ({} states)", r.num_states());
        Ok(WIN)
    } else {
        println!("invalid: {} fails", d.axiom());
        println!("witness: {}", d.render(&r.moves));
        Ok(LOSE)
    }
}

fn oracle(path: &Path, depth: usize, verify: Option<&Path>) -> Result<u8> {
    let g = load(path)?;
    let strategy = match verify {
        None => None,
        Some(p) => {
            let f: StrategyFile = json(p)?;
            Some(Strategy::from_file(&f).map_err(|source| CliError::Core { path: p.into(), source })?)
        }
    };
    let rep = report(&g, depth, strategy.as_ref())?;
    println!("{}", pretty(&rep));
    for c in rep.checks.iter().filter(|c| !c.passed) {
        eprintln!("FAIL {}: {}", c.identity, c.detail);
        if let Some(w) = &c.witness {
            eprintln!("  counterexample: {w}");
        }
    }
    Ok(if rep.passed { WIN } else { LOSE })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Validate { game, strict_visibility } => validate(&game, strict_visibility),
        Command::Normalize { game } => {
            let n = normalize(&load(&game)?)?;
            println!("{}", game_to_json(&n.base));
            Ok(WIN)
        }
        Command::Inspect { game, history } => inspect(&game, &history),
        Command::Arena { game, format, max_nodes } => arena(&game, format, max_nodes),
        Command::Synth { game, out, dot, max_nodes, condition_override } => {
            synth(&game, out.as_deref(), dot.as_deref(), max_nodes, condition_override.as_deref())
        }
        Command::To2dfa { game, out, compare } => to_2dfa(&game, out.as_deref(), compare.as_deref()),
        Command::Check2dfa { relation } => check_2dfa(&relation),
        Command::Oracle { game, depth, verify } => oracle(&game, depth, verify.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { IO } else { WIN });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use cnrep::builder::{certify, represent, Caps, RepState};
use cnrep::diff::{check_difference_axioms, cn_failure, CheckConfig, DiffTable};
use cnrep::lattice::{is_cn_space, spectrum};
use cnrep::{fixtures, json as formats, Error};

/// Finite completely normal lattices and their cone representations.
#[derive(Parser)]
#[command(name = "cnrep", version)]
struct Cli {
    /// Seed for sampled checks and random fixtures.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Resource limits, e.g. `faces=20000,hyperplanes=64,elements=1048576`.
    #[arg(long, global = true, default_value = "")]
    caps: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Distributivity, complete normality and the difference axioms.
    Analyze { lattice: PathBuf },
    /// Prime spectrum with its specialization order.
    Spectrum { lattice: PathBuf },
    /// Faces, lattice sizes and join-irreducibles of an arrangement.
    Arrangement { arrangement: PathBuf },
    /// Runs the builder and writes the state file.
    Represent {
        lattice: PathBuf,
        #[arg(long, default_value_t = 9)]
        rounds: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Checks a state file.
    Certify { state: PathBuf },
    /// Prints a fixture lattice: `dj <n>`, `chain <n>`, `boolean <n>`, `grid <m> <n>`, `kite`, `n5`, `random-cn <max>`.
    Fixtures { name: String, args: Vec<usize> },
}

/// Failures split by exit status: 1 for a failed verification, 2 for bad input.
enum Failure {
    Verification(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::PostconditionFailed(_) | Error::NotAHomomorphism(_) => Failure::Verification(e.to_string()),
            _ => Failure::Input(e.to_string()),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn caps(cli: &Cli) -> Result<Caps, Failure> {
    Ok(cli.caps.parse::<Caps>()?)
}

fn analyze(cli: &Cli, path: &Path) -> Result<Value, Failure> {
    let caps = caps(cli)?;
    let l = match formats::parse_lattice(&read_json(path)?, caps.elements) {
        Ok(inp) => inp.lattice,
        Err(e @ Error::NotDistributive { .. }) => return Ok(json!({ "distributive": false, "detail": e.to_string() })),
        Err(e) => return Err(e.into()),
    };
    let cfg = CheckConfig { seed: cli.seed, ..CheckConfig::default() };
    let axioms = check_difference_axioms(&DiffTable::pseudo(Arc::new(l.clone())), &cfg);
    let witness = cn_failure(&l).map(|(x, y)| json!([l.name(x), l.name(y)]));
    Ok(json!({
        "distributive": true,
        "elements": l.len(),
        "join_irreducibles": l.ji_labels(),
        "completely_normal": witness.is_none(),
        "witness": witness,
        "difference_axioms": axioms,
    }))
}

fn spectrum_cmd(cli: &Cli, path: &Path) -> Result<Value, Failure> {
    let l = formats::parse_lattice(&read_json(path)?, caps(cli)?.elements)?.lattice;
    let s = spectrum(&l);
    let n = s.points.len();
    let spec: Vec<(usize, usize)> = (0..n).flat_map(|p| (0..n).map(move |q| (p, q))).filter(|&(p, q)| p != q && s.specializes(p, q)).collect();
    Ok(json!({
        "points": s.points,
        "specializations": spec,
        "completely_normal": is_cn_space(&s),
        "dot": s.to_dot("spectrum"),
    }))
}

fn arrangement_cmd(cli: &Cli, path: &Path) -> Result<Value, Failure> {
    let a = formats::parse_arrangement(&read_json(path)?, caps(cli)?.faces)?;
    let sizes = a.op_lattice(false).ok().map(|op| op.lattice.len());
    let jirr: Vec<Value> = (0..a.face_count())
        .map(|i| json!({ "face": a.render(i), "nabla_rank": a.nabla(&a.star(i)).1 }))
        .collect();
    Ok(json!({
        "hyperplanes": a.hyperplanes(),
        "faces": (0..a.face_count()).map(|i| a.render(i)).collect::<Vec<_>>(),
        "face_count": a.face_count(),
        "op_size": sizes,
        "op_minus_size": sizes.map(|s| s - 1),
        "join_irreducibles": jirr,
    }))
}

fn represent_cmd(cli: &Cli, path: &Path, rounds: usize, out: Option<&Path>) -> Result<Value, Failure> {
    let caps = caps(cli)?;
    let inp = formats::parse_lattice(&read_json(path)?, caps.elements)?;
    let st = represent(&inp.lattice, inp.generators, rounds, caps)?;
    let state = st.to_json();
    if let Some(out) = out {
        let text = serde_json::to_string_pretty(&state).expect("state serializes");
        fs::write(out, text + "\n").map_err(|e| Failure::Input(format!("{}: {e}", out.display())))?;
    }
    let cert = certify(&st);
    if cert.failed() {
        return Err(Failure::Verification(serde_json::to_string(&cert).expect("report serializes")));
    }
    Ok(json!({
        "round": st.round,
        "hyperplanes": st.hom.arr.len(),
        "faces": st.hom.arr.face_count(),
        "stopped": st.stopped,
        "certificate": cert,
        "state": if out.is_some() { Value::Null } else { state },
    }))
}

fn certify_cmd(path: &Path) -> Result<Value, Failure> {
    let st = RepState::from_json(&read_json(path)?)?;
    let cert = certify(&st);
    if cert.failed() {
        return Err(Failure::Verification(serde_json::to_string(&cert).expect("report serializes")));
    }
    Ok(json!({ "complete": cert.passed(), "certificate": cert }))
}

fn fixtures_cmd(cli: &Cli, name: &str, args: &[usize]) -> Result<Value, Failure> {
    let arg = |i: usize| args.get(i).copied().ok_or_else(|| Failure::Input(format!("fixture {name} needs {} argument(s)", i + 1)));
    let l = match name {
        "dj" => fixtures::dj(arg(0)?, fixtures::DEFAULT_DJ_BOUND)?,
        "chain" => fixtures::chain(arg(0)?.max(1)),
        "boolean" => fixtures::boolean(arg(0)?),
        "grid" => fixtures::grid(arg(0)?.max(1), arg(1)?.max(1)),
        "kite" | "n5" => {
            let (labels, covers) = if name == "kite" { fixtures::kite_hasse() } else { fixtures::n5_hasse() };
            return Ok(json!({ "labels": labels, "covers": covers }));
        }
        "random-cn" => match arg(0)? {
            // The smallest sample is the three-element chain.
            max if max < 3 => return Err(Failure::Input(format!("random-cn needs at least 3 elements, got {max}"))),
            max => fixtures::random_cn(&mut ChaCha8Rng::seed_from_u64(cli.seed), max),
        },
        other => return Err(Failure::Input(format!("unknown fixture {other}"))),
    };
    Ok(formats::lattice_to_json(&l))
}

fn run(cli: &Cli) -> Result<Value, Failure> {
    match &cli.command {
        Command::Analyze { lattice } => analyze(cli, lattice),
        Command::Spectrum { lattice } => spectrum_cmd(cli, lattice),
        Command::Arrangement { arrangement } => arrangement_cmd(cli, arrangement),
        Command::Represent { lattice, rounds, out } => represent_cmd(cli, lattice, *rounds, out.as_deref()),
        Command::Certify { state } => certify_cmd(state),
        Command::Fixtures { name, args } => fixtures_cmd(cli, name, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(v) => {
            // A closed pipe downstream is not an error of ours.
            let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&v).expect("output serializes"));
            ExitCode::SUCCESS
        }
        Err(Failure::Verification(msg)) => {
            eprintln!("verification failed: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

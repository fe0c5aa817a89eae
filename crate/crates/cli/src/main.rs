//! `gbs` — command-line front end for the GBS decision procedures.
//!
//! Exit codes: 0 positive decision (or plain success), 1 negative decision,
//! 2 error. All numeric arguments are arbitrary-precision integers; all
//! randomness is seed-parameterised.

use std::fs;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use gbs_core::covering::CoveringGraph;
use gbs_core::iso::iso_normal_forms;
use gbs_core::modular::{image_generator_cyclic, modular_image, primitive_base};
use gbs_core::moves::{moves_to_jsonl, random_deform};
use gbs_core::normalform::normal_form_of_cover;
use gbs_core::{comm, covering, GbsGraph, Int};

#[derive(Parser)]
#[command(
    name = "gbs",
    version,
    about = "Decision procedures for Generalised Baumslag-Solitar groups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide commensurability of BS(m1,n1) and BS(m2,n2).
    Comm(CommArgs),
    /// Decide isomorphism of two finite-index subgroups given as covers.
    Iso(IsoArgs),
    /// Normalise a cover of the G^d_{1,n} bouquet to its normal form.
    Normalize(NormalizeArgs),
    /// Print the canonical modular-homomorphism image of a graph.
    Modular(GraphFileArgs),
    /// Apply seeded random legal moves; prints the move log as JSON lines.
    Deform(DeformArgs),
    /// Lift a cover to its labelled GBS graph (prints graph JSON).
    Lift(LiftArgs),
    /// Print the rank-k cover of the 2-petal bouquet (cover JSON).
    Gammak(GammakArgs),
    /// Describe the standard finite-index subgroup H_{m,n} of BS(m,n).
    Hmn(HmnArgs),
    /// Validate a graph file, listing any violations.
    Validate(GraphFileArgs),
}

fn parse_int(s: &str) -> Result<Int, String> {
    s.parse::<Int>()
        .map_err(|_| format!("{s:?} is not an integer"))
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct CommArgs {
    #[arg(value_parser = parse_int)]
    m1: Int,
    #[arg(value_parser = parse_int)]
    n1: Int,
    #[arg(value_parser = parse_int)]
    m2: Int,
    #[arg(value_parser = parse_int)]
    n2: Int,
    /// Emit and validate a certificate chain for positive verdicts.
    #[arg(long)]
    witness: bool,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct IsoArgs {
    cover1: String,
    cover2: String,
    #[arg(long, value_parser = parse_int)]
    n1: Int,
    #[arg(long, value_parser = parse_int)]
    n2: Int,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct NormalizeArgs {
    cover: String,
    #[arg(long, value_parser = parse_int)]
    n: Int,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct GraphFileArgs {
    graph: String,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct DeformArgs {
    graph: String,
    #[arg(long)]
    steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Restrict to moves whose result stays reduced.
    #[arg(long)]
    keep_reduced: bool,
    /// Write the final graph JSON to this path.
    #[arg(long)]
    out: Option<String>,
    /// Print one JSON object instead of a move-log stream.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct LiftArgs {
    cover: String,
    #[arg(long, value_parser = parse_int)]
    p: Int,
    #[arg(long, value_parser = parse_int)]
    q: Int,
}

#[derive(Args)]
struct GammakArgs {
    k: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct HmnArgs {
    #[arg(value_parser = parse_int)]
    m: Int,
    #[arg(value_parser = parse_int)]
    n: Int,
    #[arg(long)]
    json: bool,
}

enum Outcome {
    Positive,
    Negative,
}

impl Outcome {
    fn code(self) -> ExitCode {
        match self {
            Outcome::Positive => ExitCode::from(0),
            Outcome::Negative => ExitCode::from(1),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(outcome) => outcome.code(),
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<Outcome, String> {
    match command {
        Command::Comm(args) => run_comm(args),
        Command::Iso(args) => run_iso(args),
        Command::Normalize(args) => run_normalize(args),
        Command::Modular(args) => run_modular(args),
        Command::Deform(args) => run_deform(args),
        Command::Lift(args) => run_lift(args),
        Command::Gammak(args) => run_gammak(args),
        Command::Hmn(args) => run_hmn(args),
        Command::Validate(args) => run_validate(args),
    }
}

fn read_graph(path: &str) -> Result<GbsGraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    GbsGraph::from_json(&text).map_err(|e| format!("{path}: {e}"))
}

fn read_cover(path: &str) -> Result<CoveringGraph, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{path}: {e}"))?;
    CoveringGraph::from_json(&text).map_err(|e| format!("{path}: {e}"))
}

fn run_comm(args: CommArgs) -> Result<Outcome, String> {
    let mut verdict =
        comm::commensurable(&args.m1, &args.n1, &args.m2, &args.n2).map_err(|e| e.to_string())?;
    if args.witness && verdict.commensurable {
        let cert =
            comm::witness(&args.m1, &args.n1, &args.m2, &args.n2).map_err(|e| e.to_string())?;
        comm::validate_certificate(&cert, &args.m1, &args.n1, &args.m2, &args.n2)
            .map_err(|e| format!("emitted certificate failed validation: {e}"))?;
        verdict.witness = Some(cert);
    }
    if args.json {
        println!(
            "{}",
            serde_json::to_string(&verdict).expect("verdict serializes")
        );
    } else {
        let word = if verdict.commensurable {
            "commensurable"
        } else {
            "not commensurable"
        };
        println!("{word} ({:?})", verdict.case);
        if let Some(cert) = &verdict.witness {
            if cert.steps.is_empty() {
                println!("  (identical groups after normalisation)");
            }
            for step in &cert.steps {
                println!("  {}", describe_step(step));
            }
        }
    }
    Ok(if verdict.commensurable {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}

fn describe_step(step: &comm::CertStep) -> String {
    use comm::CertStep::*;
    match step {
        StandardSubgroup { m, n, d, p, q } => {
            format!("StandardSubgroup: BS({m},{n}) contains G^{d}_{{{p},{q}}} with index {d}")
        }
        Index2Cycle { m, n } => {
            format!("Index2Cycle: BS({m},{n}) contains the two-vertex cycle subgroup of index 2")
        }
        GammaKEmbedding { k, n, index } => {
            format!("GammaKEmbedding: G^{k}_{{1,{n}}} embeds in G^2_{{1,{n}}} with index {index}")
        }
        CommonSolvable { base, exponent } => {
            format!("CommonSolvable: BS(1,{base}^{exponent}) has finite index in both groups")
        }
        FreeTimesZ { rank } => {
            format!("FreeTimesZ: both groups contain a finite-index F_{rank} x Z")
        }
    }
}

#[derive(Serialize)]
struct IsoReport {
    isomorphic: bool,
    nf1: String,
    nf2: String,
    shift: Option<u64>,
}

fn run_iso(args: IsoArgs) -> Result<Outcome, String> {
    let c1 = read_cover(&args.cover1)?;
    let c2 = read_cover(&args.cover2)?;
    let b1 = primitive_base(&args.n1).map_err(|e| e.to_string())?;
    let b2 = primitive_base(&args.n2).map_err(|e| e.to_string())?;
    let f1 = normal_form_of_cover(&c1, &args.n1).map_err(|e| e.to_string())?;
    let f2 = normal_form_of_cover(&c2, &args.n2).map_err(|e| e.to_string())?;
    let cert = if b1.base == b2.base {
        iso_normal_forms(&f1, &f2)
    } else {
        None
    };
    let report = IsoReport {
        isomorphic: cert.is_some(),
        nf1: f1.to_string(),
        nf2: f2.to_string(),
        shift: cert.as_ref().map(|c| c.shift),
    };
    if args.json {
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else if let Some(c) = &cert {
        println!(
            "isomorphic (shift C={}): {} ~ {}",
            c.shift, report.nf1, report.nf2
        );
    } else {
        println!("not isomorphic: {} vs {}", report.nf1, report.nf2);
    }
    Ok(if report.isomorphic {
        Outcome::Positive
    } else {
        Outcome::Negative
    })
}

#[derive(Serialize)]
struct NormalFormReport {
    r: String,
    l: u64,
    m: u64,
    p: Vec<u64>,
    rendered: String,
}

fn run_normalize(args: NormalizeArgs) -> Result<Outcome, String> {
    let cover = read_cover(&args.cover)?;
    let form = normal_form_of_cover(&cover, &args.n).map_err(|e| e.to_string())?;
    if args.json {
        let report = NormalFormReport {
            r: form.base().to_string(),
            l: form.level(),
            m: form.modulus(),
            p: form.residues().to_vec(),
            rendered: form.to_string(),
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        println!("{form}");
    }
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct ModularReport {
    cyclic: bool,
    generator: Option<String>,
    negative: bool,
    primes: Vec<String>,
    basis: Vec<Vec<String>>,
}

fn run_modular(args: GraphFileArgs) -> Result<Outcome, String> {
    let g = read_graph(&args.graph)?;
    let img = modular_image(&g);
    let generator = image_generator_cyclic(&img);
    if args.json {
        let report = ModularReport {
            cyclic: generator.is_some(),
            generator: generator.as_ref().map(|q| q.to_string()),
            negative: img.negative,
            primes: img.primes.iter().map(|p| p.to_string()).collect(),
            basis: img
                .basis
                .iter()
                .map(|row| row.iter().map(|c| c.to_string()).collect())
                .collect(),
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else if let Some(q) = generator {
        println!("gen = {q}");
    } else {
        println!("{img}");
    }
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct DeformReport {
    steps_applied: usize,
    moves: Vec<gbs_core::Move>,
    graph: serde_json::Value,
}

fn run_deform(args: DeformArgs) -> Result<Outcome, String> {
    let g = read_graph(&args.graph)?;
    if args.keep_reduced && !g.is_reduced() {
        return Err("--keep-reduced requires a reduced starting graph".into());
    }
    let (result, log) = random_deform(&g, args.steps, args.seed, args.keep_reduced);
    let graph_json = result.to_json();
    if args.json {
        let report = DeformReport {
            steps_applied: log.len(),
            moves: log,
            graph: serde_json::from_str(&graph_json).expect("canonical graph JSON"),
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        let text = moves_to_jsonl(&log);
        if !text.is_empty() {
            println!("{text}");
        }
        eprintln!(
            "applied {} of {} steps; betti = {}",
            log.len(),
            args.steps,
            result.betti_number()
        );
    }
    if let Some(path) = &args.out {
        fs::write(path, &graph_json).map_err(|e| format!("{path}: {e}"))?;
    }
    Ok(Outcome::Positive)
}

fn run_lift(args: LiftArgs) -> Result<Outcome, String> {
    let zero = Int::from(0);
    if args.p == zero || args.q == zero {
        return Err("labels must be nonzero".into());
    }
    let cover = read_cover(&args.cover)?;
    println!(
        "{}",
        covering::lift_labels(&cover, &args.p, &args.q).to_json()
    );
    Ok(Outcome::Positive)
}

fn run_gammak(args: GammakArgs) -> Result<Outcome, String> {
    let cover = covering::gamma_k(args.k).map_err(|e| e.to_string())?;
    println!("{}", cover.to_json());
    Ok(Outcome::Positive)
}

#[derive(Serialize)]
struct HmnReport {
    index: usize,
    d: usize,
    p: String,
    q: String,
}

fn run_hmn(args: HmnArgs) -> Result<Outcome, String> {
    let (index, desc) = covering::standard_subgroup(&args.m, &args.n).map_err(|e| e.to_string())?;
    if args.json {
        let report = HmnReport {
            index,
            d: desc.d,
            p: desc.p.to_string(),
            q: desc.q.to_string(),
        };
        println!(
            "{}",
            serde_json::to_string(&report).expect("report serializes")
        );
    } else {
        println!(
            "H_{{{},{}}} has index {index} in BS({},{}) and is isomorphic to {desc}",
            args.m, args.n, args.m, args.n
        );
    }
    Ok(Outcome::Positive)
}

fn run_validate(args: GraphFileArgs) -> Result<Outcome, String> {
    let text = fs::read_to_string(&args.graph).map_err(|e| format!("{}: {e}", args.graph))?;
    match GbsGraph::from_json(&text) {
        Ok(g) => {
            if args.json {
                println!(
                    "{}",
                    serde_json::json!({
                        "valid": true,
                        "vertices": g.vertex_count(),
                        "edges": g.edge_count(),
                        "reduced": g.is_reduced(),
                        "betti": g.betti_number(),
                    })
                );
            } else {
                println!(
                    "valid: {} vertices, {} edges, betti {}, {}",
                    g.vertex_count(),
                    g.edge_count(),
                    g.betti_number(),
                    if g.is_reduced() {
                        "reduced"
                    } else {
                        "not reduced"
                    }
                );
            }
            Ok(Outcome::Positive)
        }
        Err(gbs_core::graph::GraphError::Invalid(violations)) => {
            if args.json {
                let msgs: Vec<String> = violations.iter().map(|v| v.to_string()).collect();
                println!(
                    "{}",
                    serde_json::json!({ "valid": false, "violations": msgs })
                );
            } else {
                for v in &violations {
                    println!("violation: {v}");
                }
            }
            Ok(Outcome::Negative)
        }
        Err(e) => Err(format!("{}: {e}", args.graph)),
    }
}

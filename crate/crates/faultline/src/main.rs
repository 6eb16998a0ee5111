use clap::Parser;
use faultline::gen::{gen_omv, gen_random, GraphClass};
use faultline::graph::Digraph;
use faultline::script::{bench, parse_script, run, Mode, RunConfig, RunError, Script};
use std::path::PathBuf;
use std::process::ExitCode;

/// Batch driver for the decremental strong-connectivity toolkit: runs a
/// deletion/query script against a graph, optionally cross-checking every
/// step with brute-force oracles, or generates benchmark instances.
#[derive(Parser)]
#[command(name = "faultline", version, disable_help_subcommand = true)]
struct Args {
    /// Graph file: first line "n m", then m lines "u v" (1-based).
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Script file: one command per line (del/q-conn/q-nscc/...).
    #[arg(long)]
    script: Option<PathBuf>,
    /// Execution mode.
    #[arg(long, default_value = "joint")]
    mode: String,
    /// Seed for all randomized choices.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Cross-check every step against the brute-force oracles.
    #[arg(long)]
    verify: bool,
    /// Append the work-counter dump after the query output.
    #[arg(long)]
    stats: bool,
    /// Shuffle the split order with the seed instead of ascending ids.
    #[arg(long)]
    shuffle_order: bool,
    /// Benchmark: comma-separated modes to time on the same input.
    #[arg(long, value_delimiter = ',')]
    bench: Option<Vec<String>>,
    /// Generate an instance instead of running: "random" or "omv".
    #[arg(long)]
    gen: Option<String>,
    #[arg(long, default_value_t = 16)]
    gen_n: usize,
    #[arg(long, default_value_t = 48)]
    gen_m: u64,
    /// digraph | strongly-connected | reducible-flowgraph
    #[arg(long, default_value = "digraph")]
    gen_class: String,
    #[arg(long, default_value_t = 4)]
    gen_n1: usize,
    #[arg(long, default_value_t = 4)]
    gen_n2: usize,
    #[arg(long, default_value_t = 4)]
    gen_n3: usize,
    #[arg(long, default_value_t = 0.5)]
    gen_density: f64,
    /// Output file for generated graphs (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output file for the generated script (omv generator).
    #[arg(long)]
    script_out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match real_main(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(code)
        }
    }
}

fn real_main(args: Args) -> Result<(), (u8, String)> {
    if let Some(kind) = &args.gen {
        return generate(&args, kind);
    }
    let graph_path = args.graph.as_ref().ok_or((1u8, "--graph is required".to_string()))?;
    let script_path = args.script.as_ref().ok_or((1u8, "--script is required".to_string()))?;
    let graph_text = std::fs::read_to_string(graph_path)
        .map_err(|e| (1u8, format!("{}: {e}", graph_path.display())))?;
    let script_text = std::fs::read_to_string(script_path)
        .map_err(|e| (1u8, format!("{}: {e}", script_path.display())))?;
    let g = Digraph::parse(&graph_text).map_err(|e| (2u8, e.to_string()))?;
    let script: Script = parse_script(&script_text, g.n()).map_err(err_of)?;
    let mode: Mode = args.mode.parse().map_err(|e: String| (1u8, e))?;

    if let Some(modes) = &args.bench {
        let modes: Vec<Mode> = modes
            .iter()
            .map(|m| m.parse())
            .collect::<Result<_, String>>()
            .map_err(|e| (1u8, e))?;
        print!("{}", bench(&g, &script, &modes, args.seed));
        return Ok(());
    }

    let cfg = RunConfig {
        mode,
        seed: args.seed,
        verify: args.verify,
        stats: args.stats,
        shuffle_order: args.shuffle_order,
    };
    let outcome = run(&g, &script, &cfg).map_err(err_of)?;
    print!("{}", outcome.output);
    if let Some(stats) = &outcome.stats {
        print!("{stats}");
    }
    let failures: Vec<_> = outcome.verify_reports.iter().filter(|r| !r.pass).collect();
    if !failures.is_empty() {
        for r in failures {
            eprintln!("{}", r.render());
        }
        return Err((3, "oracle verification failed".into()));
    }
    Ok(())
}

fn err_of(e: RunError) -> (u8, String) {
    (e.exit_code() as u8, e.to_string())
}

fn generate(args: &Args, kind: &str) -> Result<(), (u8, String)> {
    let (graph_text, script_text) = match kind {
        "random" => {
            let class: GraphClass = args.gen_class.parse().map_err(|e: String| (1u8, e))?;
            let g = gen_random(args.gen_n, args.gen_m, args.seed, class)
                .map_err(|e| (1u8, e))?;
            (g.to_text(), None)
        }
        "omv" => {
            let (g, script) =
                gen_omv(args.gen_n1, args.gen_n2, args.gen_n3, args.gen_density, args.seed)
                    .map_err(|e| (1u8, e))?;
            (g.to_text(), Some(script))
        }
        other => return Err((1, format!("unknown generator {other:?}"))),
    };
    match &args.out {
        Some(p) => std::fs::write(p, graph_text).map_err(|e| (1u8, e.to_string()))?,
        None => print!("{graph_text}"),
    }
    if let Some(script) = script_text {
        match &args.script_out {
            Some(p) => std::fs::write(p, script).map_err(|e| (1u8, e.to_string()))?,
            None => print!("{script}"),
        }
    }
    Ok(())
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use dncfr::cfr::exploitability;
use dncfr::dncfr::{clone_from_tabular, network_average_strategy, CloneHyperparams, DoubleNeuralConfig};
use dncfr::error::ExperimentError;
use dncfr::experiment::{compare, load_checkpoint, load_trace, run, Expectation, RunManifest};
use dncfr::game::{enumerate_game, GameSpec, GameTree};
use dncfr::neural::{encode_infoset, write_network};
use dncfr::sampling::{MccfrConfig, SamplingScheme};

#[derive(Parser)]
#[command(name = "dncfr", version, about = "CFR, sampled CFR and double-neural CFR on small poker games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a manifest and write its trace and checkpoints.
    Run {
        manifest: PathBuf,
        /// Output directory; overrides `output=` in the manifest.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Align traces by iteration and touched-node budget.
    Compare {
        /// Trace files or run directories.
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        /// Expected ordering such as `rs<=os` or `k3<=2*kmax`, by trace label.
        #[arg(long = "expect")]
        expectations: Vec<String>,
        /// Exit with status 3 when an expectation is violated.
        #[arg(long)]
        strict: bool,
    },
    /// Count the states and infosets of a game.
    Enumerate {
        /// A game config file or a short name such as `ocp3` or `nllh5`.
        gamespec: String,
        /// Also list every infoset with its actions.
        #[arg(long)]
        infosets: bool,
    },
    /// Clone a tabular checkpoint into a regret network and an average-strategy network.
    Clone {
        checkpoint: PathBuf,
        #[arg(long, short, default_value = "clone")]
        output: PathBuf,
        /// lstm, gru or rnn, optionally with an `-attention` suffix.
        #[arg(long, default_value = "lstm-attention")]
        arch: String,
        #[arg(long, default_value_t = 16)]
        embed: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { manifest, output } => cmd_run(&manifest, output),
        Command::Compare { traces, expectations, strict } => cmd_compare(&traces, &expectations, strict),
        Command::Enumerate { gamespec, infosets } => cmd_enumerate(&gamespec, infosets),
        Command::Clone { checkpoint, output, arch, embed, seed } => cmd_clone(&checkpoint, &output, &arch, embed, seed),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {}", e);
            ExitCode::FAILURE
        }
    }
}

fn read(path: &Path) -> Result<String, ExperimentError> {
    fs::read_to_string(path).map_err(|e| std::io::Error::new(e.kind(), format!("{}: {}", path.display(), e)).into())
}

fn cmd_run(path: &Path, output: Option<PathBuf>) -> Result<ExitCode, ExperimentError> {
    let manifest: RunManifest = read(path)?.parse()?;
    let output = output
        .or_else(|| manifest.output.clone())
        .ok_or(ExperimentError::Config(dncfr::error::ConfigError::Missing("output")))?;
    let outcome = run(&manifest, &output)?;
    for row in &outcome.rows {
        println!("{:>8} touched={:>14} exploitability={:.6e}", row.iteration, row.touched_nodes, row.exploitability);
    }
    println!("wrote {}", output.display());
    Ok(ExitCode::SUCCESS)
}

fn cmd_compare(paths: &[PathBuf], expectations: &[String], strict: bool) -> Result<ExitCode, ExperimentError> {
    let traces = paths.iter().map(|p| load_trace(p)).collect::<Result<Vec<_>, _>>()?;
    let expectations = expectations.iter().map(|e| e.parse::<Expectation>()).collect::<Result<Vec<_>, _>>()?;
    let table = compare(&traces, &expectations)?;
    print!("{}", table);
    if strict && table.violations() > 0 {
        eprintln!("{} expectation(s) violated", table.violations());
        return Ok(ExitCode::from(3));
    }
    Ok(ExitCode::SUCCESS)
}

fn parse_game(spec: &str) -> Result<GameSpec, ExperimentError> {
    let path = Path::new(spec);
    if path.is_file() {
        Ok(read(path)?.parse()?)
    } else {
        Ok(GameSpec::from_short_name(spec)?)
    }
}

fn cmd_enumerate(spec: &str, list: bool) -> Result<ExitCode, ExperimentError> {
    let spec = parse_game(spec)?;
    let counts = enumerate_game(&spec)?;
    println!("game            {}", spec);
    println!("states          {}", counts.states);
    println!("decision nodes  {}", counts.decision_nodes);
    println!("chance nodes    {}", counts.chance_nodes);
    println!("terminals       {}", counts.terminals);
    println!("infosets        {}", counts.infosets);
    if list {
        let tree = GameTree::from_spec(spec)?;
        let pairs: usize = tree.infosets().iter().map(|i| i.actions.len()).sum();
        println!("infoset-actions {}", pairs);
        println!("max actions     {}", tree.max_actions());
        for info in tree.infosets() {
            let actions: Vec<String> = info.actions.iter().map(|a| a.to_string()).collect();
            println!("{}  {}", info.key, actions.join(" "));
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_clone(path: &Path, output: &Path, arch: &str, embed: usize, seed: u64) -> Result<ExitCode, ExperimentError> {
    let (tree, ckpt) = load_checkpoint(path)?;
    let mut config = DoubleNeuralConfig::new(MccfrConfig {
        scheme: SamplingScheme::robust_max(),
        batch: 1,
        plus: false,
        seed,
    });
    config.arch = arch.parse()?;
    config.embed = embed;
    let shape = config.shape(&tree);
    let report = clone_from_tabular::<f64>(&tree, &ckpt, shape, &CloneHyperparams::default(), seed)?;
    let features: Vec<_> = tree.infosets().iter().map(|i| encode_infoset(&i.key, tree.spec())).collect();
    let neural = network_average_strategy(&tree, &report.asn, &features);
    let tabular = ckpt.sums.average_strategy();
    fs::create_dir_all(output)?;
    write_network(&report.rsn, fs::File::create(output.join("rsn.net"))?)?;
    write_network(&report.asn, fs::File::create(output.join("asn.net"))?)?;
    println!("game                      {} (checkpoint iteration {})", tree.spec(), ckpt.iteration);
    println!("rsn mse                   {:.6e}", report.rsn_mse);
    println!("asn mse                   {:.6e}", report.asn_mse);
    println!("tabular exploitability    {:.6e}", exploitability(&tree, &tabular));
    println!("network exploitability    {:.6e}", exploitability(&tree, &neural));
    println!("max strategy deviation    {:.6e}", neural.max_deviation(&tabular));
    println!("wrote {}", output.display());
    Ok(ExitCode::SUCCESS)
}

//! Command-line surface. `dispatch` maps argument vectors to exit codes:
//! 0 on success, 1 on usage errors, 2 on data or format errors, with
//! one-line diagnostics on stderr.

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::bayes_net::{Dataset, NetError};
use crate::discovery::{
    blcd_search_report, exhaustive_search_report, DiscoveryError, MbEstimate, SearchReport, YArc,
};
use crate::equivalence::{enumerate_dags, EquivalenceError};
use crate::experiment::{
    fixture_net, generate_dataset, run_convergence_experiment, ExperimentConfig, ExperimentError,
};
use crate::graph::{node_set, GraphError};
use crate::io::{load_dataset, save_dataset, FormatError, NetFile};
use crate::scoring::{bde_log_score, ScoreError, ScoreParams};

const USAGE: &str = "\
usage: ystruct <command> [options]

commands:
  enumerate --nodes N [--list]
      count (and optionally list) all labeled DAGs on N nodes, N <= 5
  dsep --graph FILE --a NODE --b NODE [--cond N1,N2,...]
      decide d-separation in the graph of a network JSON file
  score --graph FILE --data FILE [--ess E]
      BDe log score of the graph on a CSV dataset
  discover --data FILE [--ess E] [--threshold T] [--exhaustive | --blcd]
           [--full-posteriors]
      search the dataset for Y-structure causal arcs (JSON report on stdout)
  gen --fixture NAME --seed S --m M --out FILE
      [--net-out FILE] [--arity K] [--tol T]
      sample a dataset from a named fixture or a network JSON file
  simulate --config FILE [--seed S] [--json-out FILE]
      run the convergence study described by a JSON config

fixtures: y_net, near_y_net, latent_confounder_net, epys_latent_net,
          independent_net, or a path to a network JSON file";

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }
}

macro_rules! data_error_from {
    ($($ty:ty),+) => {
        $(impl From<$ty> for CliError {
            fn from(e: $ty) -> Self {
                CliError::Data(e.to_string())
            }
        })+
    };
}

data_error_from!(
    FormatError,
    GraphError,
    NetError,
    ScoreError,
    DiscoveryError,
    EquivalenceError
);

impl From<ExperimentError> for CliError {
    fn from(e: ExperimentError) -> Self {
        CliError::Data(e.to_string())
    }
}

/// Runs one invocation; `args` excludes the program name.
pub fn dispatch(args: &[String]) -> i32 {
    let result = match args.first().map(String::as_str) {
        None => Err(CliError::Usage("missing command".into())),
        Some("help") | Some("--help") | Some("-h") => {
            println!("{USAGE}");
            Ok(())
        }
        Some("enumerate") => cmd_enumerate(&args[1..]),
        Some("dsep") => cmd_dsep(&args[1..]),
        Some("score") => cmd_score(&args[1..]),
        Some("discover") => cmd_discover(&args[1..]),
        Some("gen") => cmd_gen(&args[1..]),
        Some("simulate") => cmd_simulate(&args[1..]),
        Some(other) => Err(CliError::Usage(format!("unknown command `{other}`"))),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            if matches!(e, CliError::Usage(_)) {
                eprintln!("{USAGE}");
            }
            e.code()
        }
    }
}

/// Minimal flag cursor: `--name value` pairs plus bare switches.
struct Flags {
    pairs: Vec<(String, Option<String>)>,
}

impl Flags {
    fn parse(args: &[String], switches: &[&str]) -> Result<Flags, CliError> {
        let mut pairs = Vec::new();
        let mut i = 0;
        while i < args.len() {
            let arg = &args[i];
            let name = arg
                .strip_prefix("--")
                .ok_or_else(|| CliError::Usage(format!("unexpected argument `{arg}`")))?;
            if switches.contains(&name) {
                pairs.push((name.to_string(), None));
                i += 1;
            } else {
                let value = args
                    .get(i + 1)
                    .ok_or_else(|| CliError::Usage(format!("flag --{name} needs a value")))?;
                pairs.push((name.to_string(), Some(value.clone())));
                i += 2;
            }
        }
        Ok(Flags { pairs })
    }

    fn take(&mut self, name: &str) -> Option<String> {
        let pos = self.pairs.iter().position(|(n, _)| n == name)?;
        self.pairs.remove(pos).1
    }

    fn has(&mut self, name: &str) -> bool {
        match self
            .pairs
            .iter()
            .position(|(n, v)| n == name && v.is_none())
        {
            Some(pos) => {
                self.pairs.remove(pos);
                true
            }
            None => false,
        }
    }

    fn required(&mut self, name: &str) -> Result<String, CliError> {
        self.take(name)
            .ok_or_else(|| CliError::Usage(format!("missing required flag --{name}")))
    }

    fn finish(self) -> Result<(), CliError> {
        match self.pairs.first() {
            Some((name, _)) => Err(CliError::Usage(format!("unknown flag --{name}"))),
            None => Ok(()),
        }
    }
}

fn parse_number<T: std::str::FromStr>(name: &str, value: &str) -> Result<T, CliError> {
    value
        .parse()
        .map_err(|_| CliError::Usage(format!("flag --{name}: cannot parse `{value}`")))
}

fn cmd_enumerate(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &["list"])?;
    let n: usize = parse_number("nodes", &flags.required("nodes")?)?;
    let list = flags.has("list");
    flags.finish()?;
    let names: Vec<String> = (0..n.min(26))
        .map(|i| ((b'A' + i as u8) as char).to_string())
        .collect();
    let enumeration = enumerate_dags(&names)?;
    println!("{}", enumeration.len());
    if list {
        for (i, dag) in enumeration.enumerate() {
            println!("{i}\t{dag}");
        }
    }
    Ok(())
}

fn cmd_dsep(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &[])?;
    let graph = flags.required("graph")?;
    let a = flags.required("a")?;
    let b = flags.required("b")?;
    let cond = flags.take("cond").unwrap_or_default();
    flags.finish()?;
    let dag = NetFile::load(Path::new(&graph))?.to_dag()?;
    let cond = node_set(cond.split(',').filter(|s| !s.is_empty()).map(str::trim));
    let separated = dag.d_separated(&a, &b, &cond)?;
    println!(
        "{}",
        if separated {
            "d-separated"
        } else {
            "d-connected"
        }
    );
    Ok(())
}

/// Lifts each dataset column that the network declares to the declared
/// arity; values beyond it are an arity mismatch.
fn apply_declared_arities(data: Dataset, file: &NetFile) -> Result<Dataset, CliError> {
    let mut vars: Vec<(String, usize)> = data.vars().to_vec();
    for decl in &file.variables {
        if let Some(slot) = vars.iter().position(|(n, _)| *n == decl.name) {
            if vars[slot].1 > decl.arity {
                return Err(CliError::Data(format!(
                    "arity mismatch for `{}`: data holds codes up to {}, network declares {}",
                    decl.name,
                    vars[slot].1 - 1,
                    decl.arity
                )));
            }
            vars[slot].1 = decl.arity;
        }
    }
    let rows: Vec<Vec<u8>> = (0..data.n_rows())
        .map(|r| (0..data.n_vars()).map(|c| data.value(r, c)).collect())
        .collect();
    Ok(Dataset::new(vars, rows)?)
}

fn cmd_score(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &[])?;
    let graph = flags.required("graph")?;
    let data_path = flags.required("data")?;
    let ess: f64 = parse_number("ess", &flags.take("ess").unwrap_or_else(|| "1.0".into()))?;
    flags.finish()?;
    let file = NetFile::load(Path::new(&graph))?;
    let dag = file.to_dag()?;
    let data = apply_declared_arities(load_dataset(Path::new(&data_path))?, &file)?;
    let params = ScoreParams::new(ess)?;
    let score = bde_log_score(&dag, &data, &params)?;
    println!("{score}");
    Ok(())
}

/// `discover` output; the per-tetrad 543-vectors appear only behind
/// `--full-posteriors`.
#[derive(Serialize)]
struct DiscoverOutput {
    method: &'static str,
    threshold: f64,
    params: ScoreParams,
    note: &'static str,
    arcs: Vec<YArc>,
    markov_blankets: Vec<MbEstimate>,
    tetrads: Vec<TetradOutput>,
}

#[derive(Serialize)]
struct TetradOutput {
    tetrad: Vec<String>,
    y_arcs: Vec<YArc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    posteriors: Option<Vec<f64>>,
}

fn discover_output(report: SearchReport, full: bool) -> DiscoverOutput {
    DiscoverOutput {
        method: report.method,
        threshold: report.threshold,
        params: report.params,
        note: report.note,
        arcs: report.arcs,
        markov_blankets: report.blankets,
        tetrads: report
            .tetrads
            .into_iter()
            .map(|t| TetradOutput {
                tetrad: t.tetrad,
                y_arcs: t.y_arcs,
                posteriors: full.then_some(t.posteriors),
            })
            .collect(),
    }
}

fn cmd_discover(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &["exhaustive", "blcd", "full-posteriors"])?;
    let data_path = flags.required("data")?;
    let ess: f64 = parse_number("ess", &flags.take("ess").unwrap_or_else(|| "1.0".into()))?;
    let threshold: f64 = parse_number(
        "threshold",
        &flags.take("threshold").unwrap_or_else(|| "0.5".into()),
    )?;
    let exhaustive = flags.has("exhaustive");
    let blcd = flags.has("blcd");
    let full = flags.has("full-posteriors");
    flags.finish()?;
    if exhaustive && blcd {
        return Err(CliError::Usage(
            "--exhaustive and --blcd are mutually exclusive".into(),
        ));
    }
    let data = load_dataset(Path::new(&data_path))?;
    let params = ScoreParams::new(ess)?;
    let report = if exhaustive {
        exhaustive_search_report(&data, &params, threshold)?
    } else {
        blcd_search_report(&data, &params, threshold)?
    };
    let output = discover_output(report, full);
    println!(
        "{}",
        serde_json::to_string_pretty(&output).map_err(FormatError::from)?
    );
    Ok(())
}

fn cmd_gen(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &[])?;
    let fixture_name = flags.required("fixture")?;
    let seed: u64 = parse_number("seed", &flags.required("seed")?)?;
    let m: usize = parse_number("m", &flags.required("m")?)?;
    let out = flags.required("out")?;
    let net_out = flags.take("net-out");
    let arity: usize = parse_number("arity", &flags.take("arity").unwrap_or_else(|| "2".into()))?;
    let tol: f64 = parse_number("tol", &flags.take("tol").unwrap_or_else(|| "0.02".into()))?;
    flags.finish()?;
    let fixture = fixture_net(&fixture_name, arity)?;
    let (net, data) = generate_dataset(&fixture, seed, m, tol, 5_000)?;
    save_dataset(&data, Path::new(&out))?;
    if let Some(path) = net_out {
        NetFile::from_net(&net).save(Path::new(&path))?;
    }
    Ok(())
}

fn cmd_simulate(args: &[String]) -> Result<(), CliError> {
    let mut flags = Flags::parse(args, &[])?;
    let config_path = flags.required("config")?;
    let seed_override = flags.take("seed");
    let json_out: Option<PathBuf> = flags.take("json-out").map(PathBuf::from);
    flags.finish()?;
    let text = std::fs::read_to_string(&config_path).map_err(FormatError::from)?;
    let mut config: ExperimentConfig =
        serde_json::from_str(&text).map_err(|e| CliError::Data(format!("config: {e}")))?;
    if let Some(seed) = seed_override {
        config.master_seed = parse_number("seed", &seed)?;
    }
    let report = run_convergence_experiment(&config)?;
    print!("{}", report.render_table());
    if let Some(path) = json_out {
        let mut text = serde_json::to_string_pretty(&report).map_err(FormatError::from)?;
        text.push('\n');
        std::fs::write(path, text).map_err(FormatError::from)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        let owned: Vec<String> = args.iter().map(|s| s.to_string()).collect();
        dispatch(&owned)
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&[]), 1);
        assert_eq!(run(&["frobnicate"]), 1);
        assert_eq!(run(&["enumerate"]), 1);
        assert_eq!(run(&["enumerate", "--nodes"]), 1);
        assert_eq!(run(&["enumerate", "--nodes", "four"]), 1);
        assert_eq!(run(&["enumerate", "--nodes", "4", "--bogus", "1"]), 1);
        assert_eq!(
            run(&["discover", "--data", "x.csv", "--exhaustive", "--blcd"]),
            1
        );
    }

    #[test]
    fn data_errors_exit_two() {
        assert_eq!(run(&["enumerate", "--nodes", "9"]), 2);
        assert_eq!(
            run(&[
                "dsep",
                "--graph",
                "/no/such/file.json",
                "--a",
                "A",
                "--b",
                "B"
            ]),
            2
        );
        assert_eq!(run(&["simulate", "--config", "/no/such/config.json"]), 2);
    }

    #[test]
    fn help_succeeds() {
        assert_eq!(run(&["help"]), 0);
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fockcc::combinatorics::IndexSet;
use fockcc::expparam::{forward_map, inverse_map, master_polynomial};
use fockcc::fd_algebra::{normal_order, Word};
use fockcc::homotopy::{cc_degree_with_sets, variety_degree, SolveMethod, TrackerConfig};
use fockcc::truncation::{analyze, census, chart_ideal_generators, reduced_chart_generators, LevelSet};
use fockcc::FockError;
use serde_json::{json, Value};

mod tables;

#[derive(Parser)]
#[command(name = "fockcc", version, about = "Truncation varieties, exponential coordinates and CC degrees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Output file. Defaults to stdout, or to a file in $FOCKCC_OUTPUT_DIR when set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Worker threads for path tracking and censuses.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "txt",
        }
    }
}

#[derive(Args, Clone)]
struct Grid {
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    /// Level set such as "1,0;1,1;0,1".
    #[arg(long)]
    sigma: String,
}

impl Grid {
    fn level_set(&self) -> Result<LevelSet, FockError> {
        let s: LevelSet = self.sigma.parse()?;
        s.validate(self.d, self.n)?;
        Ok(s)
    }
}

#[derive(Args, Clone)]
struct Tracker {
    /// Loops without new solutions before monodromy stops.
    #[arg(long)]
    stall_limit: Option<usize>,
    /// Largest Bezout number solved by total degree under --method auto.
    #[arg(long)]
    total_degree_limit: Option<u128>,
    #[arg(long)]
    max_loops: Option<usize>,
    #[arg(long)]
    residual_tol: Option<f64>,
}

impl Tracker {
    fn config(&self) -> Result<TrackerConfig, FockError> {
        let mut cfg = TrackerConfig::default();
        if let Some(v) = self.stall_limit {
            cfg.stall_limit = v;
        }
        if let Some(v) = self.total_degree_limit {
            cfg.total_degree_limit = v;
        }
        if let Some(v) = self.max_loops {
            cfg.max_loops = v;
        }
        if let Some(v) = self.residual_tol {
            cfg.residual_tol = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Normal form of a word such as "a1 a2' a3".
    NormalOrder { word: String },
    /// Master polynomial for d.
    Master {
        #[arg(long)]
        d: usize,
    },
    /// Exponential coordinates psi_J(t), or the inverse map with --inverse.
    Param {
        #[command(flatten)]
        grid: Grid,
        #[arg(long)]
        inverse: bool,
    },
    /// Dimension, linearity, graph hypothesis and family of a level set.
    Analyze {
        #[command(flatten)]
        grid: Grid,
        /// Also count chart generators by degree.
        #[arg(long)]
        generators: bool,
    },
    /// Counts over all proper nonempty level sets.
    Census {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// Chart ideal generators.
    Ideal {
        #[command(flatten)]
        grid: Grid,
        /// Interreduce generators that are single coordinates.
        #[arg(long)]
        reduced: bool,
    },
    /// CC solutions and their count for one or more Hamiltonian seeds.
    CcSolve {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1, conflicts_with = "seeds")]
        seed: u64,
        /// Comma separated Hamiltonian seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "auto")]
        method: SolveMethod,
        #[command(flatten)]
        tracker: Tracker,
    },
    /// Numerical degree of the truncation variety.
    Vdegree {
        #[command(flatten)]
        grid: Grid,
        #[arg(long, default_value_t = 1, conflicts_with = "seeds")]
        seed: u64,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long, default_value = "auto")]
        method: SolveMethod,
        #[command(flatten)]
        tracker: Tracker,
    },
    /// Recomputes the small table cells and census numbers.
    VerifyTables {
        /// Also run the minutes-long cells.
        #[arg(long)]
        full: bool,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3")]
        seeds: Vec<u64>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::NormalOrder { .. } => "normal-order",
            Command::Master { .. } => "master",
            Command::Param { .. } => "param",
            Command::Analyze { .. } => "analyze",
            Command::Census { .. } => "census",
            Command::Ideal { .. } => "ideal",
            Command::CcSolve { .. } => "cc-solve",
            Command::Vdegree { .. } => "vdegree",
            Command::VerifyTables { .. } => "verify-tables",
        }
    }
}

pub struct Output {
    json: Value,
    text: String,
    csv: Option<String>,
    ok: bool,
}

impl Output {
    fn new(json: Value, text: String) -> Self {
        Output { json, text, csv: None, ok: true }
    }

    fn render(&self, format: Format) -> String {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).expect("json values serialize") + "\n",
            Format::Text => self.text.clone(),
            Format::Csv => self.csv.clone().unwrap_or_else(|| flat_csv(&self.json)),
        }
    }
}

/// Header and one row from the scalar top-level fields.
fn flat_csv(v: &Value) -> String {
    let Value::Object(m) = v else {
        return format!("value\n{v}\n");
    };
    let scalars: Vec<(&String, &Value)> = m.iter().filter(|(_, x)| !x.is_object() && !x.is_array()).collect();
    let head: Vec<&str> = scalars.iter().map(|(k, _)| k.as_str()).collect();
    let row: Vec<String> = scalars
        .iter()
        .map(|(_, x)| match x {
            Value::String(s) => format!("\"{s}\""),
            other => other.to_string(),
        })
        .collect();
    format!("{}\n{}\n", head.join(","), row.join(","))
}

fn seed_list(seed: u64, seeds: &[u64]) -> Vec<u64> {
    if seeds.is_empty() {
        vec![seed]
    } else {
        seeds.to_vec()
    }
}

fn manifest(command: &str, seeds: &[u64], cfg: &TrackerConfig, method: SolveMethod) -> Value {
    json!({
        "command": command,
        "version": env!("CARGO_PKG_VERSION"),
        "seeds": seeds,
        "method": method.to_string(),
        "config": cfg,
    })
}

fn run(command: &Command) -> Result<Output, FockError> {
    match command {
        Command::NormalOrder { word } => {
            let w: Word = word.parse()?;
            let nf = normal_order(&w);
            let terms: Vec<Value> =
                nf.to_words().iter().map(|(c, w)| json!({"coefficient": c.to_string(), "word": w.to_string()})).collect();
            Ok(Output::new(json!({"word": w.to_string(), "normal_form": nf.to_string(), "terms": terms}), format!("{nf}\n")))
        }
        Command::Master { d } => {
            let p = master_polynomial(*d)?;
            let text = format!("{} terms\n{p}\n", p.num_terms());
            Ok(Output::new(json!({"d": d, "terms": p.num_terms(), "polynomial": p.to_string(), "expanded": p.to_json()}), text))
        }
        Command::Param { grid, inverse } => {
            let sigma = grid.level_set()?;
            let map = if *inverse { inverse_map(grid.d, grid.n)? } else { forward_map(grid.d, grid.n, &sigma)? };
            let mut text = String::new();
            for (r, p) in map.coords.iter().enumerate() {
                text.push_str(&format!("{}: {p}\n", IndexSet::from_rank(r)));
            }
            let json = json!({"d": grid.d, "n": grid.n, "sigma": sigma.to_string(), "inverse": inverse, "coordinates": map.to_json()});
            Ok(Output::new(json, text))
        }
        Command::Analyze { grid, generators } => {
            let r = analyze(&grid.level_set()?, grid.d, grid.n, *generators)?;
            let mut text = format!(
                "sigma {}\ndimension {}\nfamily {}\nlinear {}\ngraph hypothesis {}\n",
                r.sigma, r.dimension, r.family, r.is_linear, r.graph_hypothesis
            );
            for (deg, count) in &r.generator_degrees {
                text.push_str(&format!("generators of degree {deg}: {count}\n"));
            }
            Ok(Output::new(serde_json::to_value(&r).expect("report serializes"), text))
        }
        Command::Census { d, n } => {
            if d > n || d * n + n - d * d > 20 {
                return Err(FockError::Capacity(format!("census enumerates 2^|G| level sets; d={d}, n={n} is too large")));
            }
            let c = census(*d, *n);
            let text = format!("level sets {}\nlinear {}\nhypothesis {}\n", c.level_sets, c.linear, c.hypothesis);
            Ok(Output::new(serde_json::to_value(&c).expect("census serializes"), text))
        }
        Command::Ideal { grid, reduced } => {
            let sigma = grid.level_set()?;
            let gens = if *reduced {
                reduced_chart_generators(&sigma, grid.d, grid.n)?
            } else {
                chart_ideal_generators(&sigma, grid.d, grid.n)?
            };
            let mut text = String::new();
            let mut list = Vec::new();
            for (j, g) in &gens {
                text.push_str(&format!("{j}: {g}\n"));
                list.push(json!({"index": j.to_string(), "degree": g.degree(), "generator": g.to_string()}));
            }
            let json = json!({"d": grid.d, "n": grid.n, "sigma": sigma.to_string(), "reduced": reduced, "generators": list});
            Ok(Output::new(json, text))
        }
        Command::CcSolve { grid, seed, seeds, method, tracker } => {
            let sigma = grid.level_set()?;
            let cfg = tracker.config()?;
            let seeds = seed_list(*seed, seeds);
            let (report, sets) = cc_degree_with_sets(grid.d, grid.n, &sigma, &cfg, &seeds, *method)?;
            let mut text = format!("sigma {} dimension {} method {}\n", report.sigma, report.dimension, report.method);
            for r in &report.runs {
                text.push_str(&format!("seed {}: {} solutions, {} real ({:.2} s)\n", r.seed, r.count, r.real, r.seconds));
            }
            text.push_str(&match report.ccdeg {
                Some(c) => format!("ccdeg {c}\n"),
                None => "ccdeg inconclusive: seeds disagree\n".to_string(),
            });
            let json = json!({
                "manifest": manifest("cc-solve", &seeds, &cfg, *method),
                "report": report,
                "solutions": sets.iter().map(|s| s.to_json()).collect::<Vec<_>>(),
            });
            let ok = report.ccdeg.is_some();
            Ok(Output { json, text, csv: Some(sets[0].to_csv()), ok })
        }
        Command::Vdegree { grid, seed, seeds, method, tracker } => {
            let sigma = grid.level_set()?;
            let cfg = tracker.config()?;
            let seeds = seed_list(*seed, seeds);
            let mut reports = Vec::new();
            let mut text = String::new();
            for &s in &seeds {
                let r = variety_degree(grid.d, grid.n, &sigma, &cfg, s, *method)?;
                text.push_str(&format!("seed {}: degree {} ({}, {} paths, {:.2} s)\n", s, r.degree, r.method, r.paths, r.seconds));
                reports.push(r);
            }
            let ok = reports.iter().all(|r| r.degree == reports[0].degree);
            let json = json!({"manifest": manifest("vdegree", &seeds, &cfg, *method), "degree": ok.then_some(reports[0].degree), "runs": reports});
            let csv = std::iter::once("seed,degree,method,paths".to_string())
                .chain(reports.iter().map(|r| format!("{},{},{},{}", r.seed, r.degree, r.method, r.paths)))
                .collect::<Vec<_>>()
                .join("\n")
                + "\n";
            Ok(Output { json, text, csv: Some(csv), ok })
        }
        Command::VerifyTables { full, seeds } => Ok(tables::verify(*full, seeds)),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let out = match run(&cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let body = out.render(cli.format);
    let path = cli.output.clone().or_else(|| {
        std::env::var_os("FOCKCC_OUTPUT_DIR")
            .map(|dir| PathBuf::from(dir).join(format!("{}.{}", cli.command.name(), cli.format.extension())))
    });
    match path {
        Some(p) => {
            if let Err(e) = std::fs::write(&p, body) {
                eprintln!("error: cannot write {}: {e}", p.display());
                return ExitCode::from(2);
            }
            eprintln!("wrote {}", p.display());
        }
        None => print!("{body}"),
    }
    if out.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

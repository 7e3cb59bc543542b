use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use antsel::harness::{
    evaluate_case, evaluation_seed, frames_for_bits, generate_dataset, model_seed, parse_results_csv,
    report, run_grid, training_seed, CaseSpec, GridConfig, HarnessConfig,
};
use antsel::learners::{train_selector, Algorithm, Dataset, SelectorModel};

#[derive(Parser)]
#[command(name = "antsel", version, about = "Transmit antenna selection benchmark")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config; omitted sections take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Comma-separated algorithm names, e.g. CNN,RFOREST.
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Use the shrunk smoke grid.
    #[arg(long)]
    smoke: bool,
}

impl Common {
    fn load(&self) -> anyhow::Result<HarnessConfig> {
        let mut cfg = match &self.config {
            Some(p) => HarnessConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => HarnessConfig::default(),
        };
        if self.smoke {
            let smoke = HarnessConfig::smoke().grid;
            cfg.grid = GridConfig { master_seed: cfg.grid.master_seed, ..smoke };
        }
        if let Some(s) = self.seed {
            cfg.grid.master_seed = s;
        }
        if let Some(a) = &self.algorithms {
            cfg.grid.algorithms = a.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labelled training set.
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 20_000)]
        frames: usize,
        #[arg(long, default_value_t = 16)]
        adc_bits: u32,
    },
    /// Train selectors and save them as JSON.
    Train {
        #[command(flatten)]
        common: Common,
        /// Dataset written by gen-data; generated on the fly if omitted.
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long, default_value_t = 20_000)]
        frames: usize,
        #[arg(long, default_value_t = 16)]
        adc_bits: u32,
    },
    /// Evaluate saved models at one resolution and SNR.
    Evaluate {
        #[command(flatten)]
        common: Common,
        /// Model files written by train.
        #[arg(long, required = true, num_args = 1..)]
        model: Vec<PathBuf>,
        #[arg(long, default_value_t = 16)]
        adc_bits: u32,
        #[arg(long, default_value_t = 10.0)]
        snr_db: f64,
        /// Training size recorded in the results.
        #[arg(long, default_value_t = 0)]
        train_frames: usize,
    },
    /// Run the benchmark grid and write the results.
    Grid {
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite series files from a results CSV.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
    },
}

fn write_dataset(ds: &Dataset, path: &Path) -> anyhow::Result<()> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    ds.write_to(std::io::BufWriter::new(f))?;
    Ok(())
}

fn main() -> anyhow::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match cli.command {
        Command::GenData { common, frames, adc_bits } => {
            let cfg = common.load()?;
            fs::create_dir_all(&common.out)?;
            let ds = generate_dataset(&cfg, Some(adc_bits), frames, training_seed(cfg.grid.master_seed))?;
            let path = common.out.join(format!("dataset_{adc_bits}bit_{frames}.bin"));
            write_dataset(&ds, &path)?;
            log::info!("wrote {} rows to {}", ds.len(), path.display());
        }
        Command::Train { common, dataset, frames, adc_bits } => {
            let cfg = common.load()?;
            fs::create_dir_all(&common.out)?;
            let ds = match &dataset {
                Some(p) => {
                    let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                    Dataset::read_from(std::io::BufReader::new(f))?
                }
                None => generate_dataset(&cfg, Some(adc_bits), frames, training_seed(cfg.grid.master_seed))?,
            };
            for &alg in &cfg.grid.algorithms {
                let seed = model_seed(cfg.grid.master_seed, alg);
                let model = train_selector(alg, &ds, &cfg.train, cfg.mode, cfg.features, seed)?;
                let path = common.out.join(format!("model_{alg}_{adc_bits}bit_{}.json", ds.len()));
                fs::write(&path, model.to_json()?)?;
                log::info!("wrote {}", path.display());
            }
        }
        Command::Evaluate { common, model, adc_bits, snr_db, train_frames } => {
            let cfg = common.load()?;
            let frames = frames_for_bits(&cfg, cfg.grid.eval_bits);
            let mut results = Vec::new();
            for path in &model {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                let m = SelectorModel::from_json(&text)?;
                let case = CaseSpec {
                    adc_bits,
                    snr_db,
                    train_frames,
                    algorithm: m.algorithm(),
                    seed: evaluation_seed(cfg.grid.master_seed),
                };
                let r = evaluate_case(&cfg, &case, &m, frames)?;
                log::info!("{}: ber {:.3e}, selection accuracy {:.3}", case.algorithm, r.ber, r.selection_accuracy);
                results.push(r);
            }
            for p in report(&results, &common.out)? {
                log::info!("wrote {}", p.display());
            }
        }
        Command::Grid { common } => {
            let cfg = common.load()?;
            fs::create_dir_all(&common.out)?;
            fs::write(common.out.join("config.json"), cfg.to_json()?)?;
            log::info!("running {} cases", cfg.grid.case_count());
            let outcome = run_grid(&cfg)?;
            if !outcome.failures.is_empty() {
                let lines: String =
                    outcome.failures.iter().map(|f| format!("{:?}: {}\n", f.case, f.error)).collect();
                fs::write(common.out.join("failures.txt"), lines)?;
            }
            for p in report(&outcome.results, &common.out)? {
                log::info!("wrote {}", p.display());
            }
            if !outcome.failures.is_empty() {
                bail!("{} cases failed, see failures.txt", outcome.failures.len());
            }
        }
        Command::Report { common, input } => {
            let text = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let mut results = parse_results_csv(&text)?;
            if let Some(keep) = &common.algorithms {
                results.retain(|r| keep.contains(&r.case.algorithm));
            }
            for p in report(&results, &common.out)? {
                log::info!("wrote {}", p.display());
            }
        }
    }
    Ok(())
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use alps::benchmarks::{inconel_bounds, rfpca_train, stainless_bounds, synthetic_emissivity_dataset, RfPcaModel, TrainOptions};
use alps::harness::{load_summary, plot_convergence, run_campaign, run_sweep, CampaignConfig, Optimizer, SweepGrid};
use alps::{Error, Result, RngSeed};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "alps", version, about = "Inverse design with a random-forest surrogate, plus baselines")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run repeated trials of one optimizer on one benchmark.
    Run(CampaignArgs),
    /// Run the ALPS campaign over a grid of batch and pool sizes.
    Sweep {
        #[command(flatten)]
        campaign: CampaignArgs,
        #[arg(long, value_delimiter = ',', default_values_t = [1usize, 5, 10, 20])]
        n_batch: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [300usize, 600, 1200])]
        n_s: Vec<usize>,
    },
    /// Fit an RF-PCA forward model from an emissivity dataset.
    TrainModel(TrainArgs),
    /// Draw convergence curves from one or more summary.json files.
    Plot {
        #[arg(required = true)]
        summaries: Vec<PathBuf>,
        #[arg(long, default_value = "convergence.svg")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct CampaignArgs {
    /// TOML campaign file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    benchmark: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core.
    #[arg(long)]
    parallelism: Option<usize>,
}

impl CampaignArgs {
    fn resolve(&self) -> Result<CampaignConfig> {
        let mut cfg = match &self.config {
            Some(path) => CampaignConfig::load(path)?,
            None => CampaignConfig::default(),
        };
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.trials {
            cfg.trials = v;
        }
        if let Some(v) = self.budget {
            cfg.budget = v;
        }
        if let Some(v) = &self.optimizer {
            cfg.optimizer = v.parse::<Optimizer>()?;
        }
        if let Some(v) = &self.benchmark {
            cfg.benchmark.name = v.clone();
        }
        if let Some(v) = &self.out {
            cfg.out = Some(v.clone());
        }
        if let Some(v) = self.parallelism {
            cfg.parallelism = v;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Material {
    Inconel,
    Stainless,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset CSV: `power_w,speed_mm_s,spacing_um,e_0,...`.
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    /// Train on this many rows of the built-in analytic dataset instead.
    #[arg(long)]
    synthetic: Option<usize>,
    #[arg(long, default_value_t = 822)]
    wavelengths: usize,
    /// Parameter box of the model; the data's range when omitted.
    #[arg(long, value_enum)]
    material: Option<Material>,
    #[arg(long, default_value_t = 10)]
    pca_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "model.json")]
    out: PathBuf,
}

fn train(args: &TrainArgs) -> Result<()> {
    let options = TrainOptions {
        pca_k: args.pca_k,
        bounds: args.material.map(|m| match m {
            Material::Inconel => inconel_bounds(),
            Material::Stainless => stainless_bounds(),
        }),
        seed: RngSeed(args.seed),
        ..Default::default()
    };
    let (model, report) = match (&args.data, args.synthetic) {
        (Some(path), _) => rfpca_train(path, &options)?,
        (None, Some(n)) => {
            let data = synthetic_emissivity_dataset(n, args.wavelengths, RngSeed(args.seed).child("dataset", 0));
            RfPcaModel::train(&data, &options)?
        }
        (None, None) => return Err(Error::Config("pass --data or --synthetic".into())),
    };
    model.save(&args.out)?;
    println!(
        "trained on {} rows ({} held out), {} PCA components",
        report.n_train, report.n_test, report.pca_components
    );
    println!("train RMSE {:.5}", report.train_rmse);
    if let Some(t) = report.test_rmse {
        println!("test RMSE  {t:.5}");
    }
    println!("model written to {}", args.out.display());
    Ok(())
}

fn print_final(label: &str, f: &alps::harness::FinalStats) {
    println!("{label}: final error mean {:.5} std {:.5} min {:.5} max {:.5}", f.mean, f.std, f.min, f.max);
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = args.resolve()?;
            let r = run_campaign(&cfg)?;
            print_final(&format!("{} on {}", cfg.label(), cfg.benchmark.name), &r.summary.final_stats);
            if let Some(out) = &cfg.out {
                println!("artifacts in {}", out.display());
            }
        }
        Command::Sweep { campaign, n_batch, n_s } => {
            let cfg = campaign.resolve()?;
            let cells = run_sweep(&cfg, &SweepGrid { n_batch, n_s })?;
            println!("n_batch  n_s   mean      std");
            for c in &cells {
                let f = &c.summary.final_stats;
                println!("{:>7}  {:>4}  {:.5}  {:.5}", c.n_batch, c.n_s, f.mean, f.std);
            }
        }
        Command::TrainModel(args) => train(&args)?,
        Command::Plot { summaries, out } => {
            let loaded = summaries.iter().map(|p| load_summary(p)).collect::<Result<Vec<_>>>()?;
            plot_convergence(&loaded, &out)?;
            println!("wrote {}", Path::new(&out).display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

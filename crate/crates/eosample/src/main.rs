#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use eosample::config::{RunConfig, ScenarioSource, ScenarioSpecFile, BUNDLED};
use eosample::pipeline::{self, curve_file_name, CURVES_DIR};
use eosample::timefmt::parse_instant;
use eosample::CliError;

#[derive(Parser)]
#[command(name = "eosample", version, about = "Score satellite constellations by how faithfully they sample storm statistics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic nature run and write it as an .nrg grid.
    Generate {
        /// Scenario spec JSON; omitted keys take defaults.
        #[arg(long)]
        spec: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect storm clusters in a grid and write clusters.csv.
    Detect {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 220.0)]
        threshold_k: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the ground tracks of one configuration.
    Track {
        #[arg(long, default_value = BUNDLED)]
        manifest: String,
        #[arg(long)]
        config_id: u32,
        /// Window start and orbit epoch, e.g. 2005-07-15T00:00:00Z.
        #[arg(long)]
        start: String,
        /// Exclusive window end.
        #[arg(long)]
        end: String,
        #[arg(long, default_value_t = 30.0)]
        cadence_min: f64,
        #[arg(long, default_value_t = 700.0)]
        altitude_km: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the full pipeline and write clusters, observations, ranking and curves.
    Evaluate(EvaluateArgs),
    /// Rank a results.csv and write ranking.csv.
    Rank {
        #[arg(long)]
        results: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute one configuration's density curves from a run directory.
    Curves {
        #[arg(long)]
        run_dir: PathBuf,
        #[arg(long)]
        config_id: u32,
        /// Defaults to <run-dir>/curves/config_<id>.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct EvaluateArgs {
    /// Run config JSON; flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Grid file to use instead of a synthetic scenario.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Seed of the synthetic scenario.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threshold_k: Option<f64>,
    #[arg(long)]
    cadence_min: Option<f64>,
    #[arg(long)]
    tolerance_min: Option<f64>,
    #[arg(long)]
    swath_km: Option<f64>,
    #[arg(long)]
    altitude_km: Option<f64>,
    #[arg(long)]
    n_points: Option<usize>,
    #[arg(long)]
    min_observed: Option<usize>,
    #[arg(long)]
    lower_percentile: Option<f64>,
    #[arg(long)]
    upper_percentile: Option<f64>,
    #[arg(long)]
    reflect: Option<bool>,
    #[arg(long)]
    attribute: Option<String>,
    /// "bundled" or a constellation manifest JSON.
    #[arg(long)]
    manifest: Option<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl EvaluateArgs {
    fn resolve(self) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = self.scenario {
            cfg.scenario = ScenarioSource::Path(p);
        }
        if let Some(seed) = self.seed {
            match &mut cfg.scenario {
                ScenarioSource::Synthetic(spec) => spec.seed = seed,
                ScenarioSource::Path(_) => return Err(CliError::Usage("--seed applies only to synthetic scenarios".into())),
            }
        }
        macro_rules! set {
            ($($field:ident).+ <- $flag:expr) => {
                if let Some(v) = $flag {
                    cfg.$($field).+ = v;
                }
            };
        }
        set!(threshold_k <- self.threshold_k);
        set!(cadence_min <- self.cadence_min);
        set!(tolerance_min <- self.tolerance_min);
        set!(swath_km <- self.swath_km);
        set!(altitude_km <- self.altitude_km);
        set!(kde.n_points <- self.n_points);
        set!(kde.min_observed <- self.min_observed);
        set!(kde.lower_percentile <- self.lower_percentile);
        set!(kde.upper_percentile <- self.upper_percentile);
        set!(kde.reflect <- self.reflect);
        set!(kde.attribute <- self.attribute);
        set!(manifest <- self.manifest);
        set!(out_dir <- self.out_dir);
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Generate { spec, seed, out } => {
            let mut spec = match spec {
                Some(p) => {
                    let text = std::fs::read_to_string(&p).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?;
                    ScenarioSpecFile::from_json(&text)?
                }
                None => ScenarioSpecFile::default(),
            };
            if let Some(s) = seed {
                spec.seed = s;
            }
            let grid = pipeline::cmd_generate(&spec, &out)?;
            let (rows, cols) = grid.shape();
            eprintln!("wrote {} ({} steps, {rows}x{cols} cells)", out.display(), grid.timestamps().len());
        }
        Command::Detect { scenario, threshold_k, out } => {
            let clusters = pipeline::cmd_detect(&scenario, threshold_k, &out)?;
            eprintln!("wrote {} ({} clusters)", out.display(), clusters.len());
        }
        Command::Track { manifest, config_id, start, end, cadence_min, altitude_km, out } => {
            let window = (parse_instant(&start).map_err(CliError::Usage)?, parse_instant(&end).map_err(CliError::Usage)?);
            if window.1 <= window.0 {
                return Err(CliError::Usage("--end must be after --start".into()));
            }
            let cadence = cadence_min * 60.0;
            if !(cadence >= 1.0) || cadence.fract() != 0.0 {
                return Err(CliError::Usage("--cadence-min must be a positive whole number of seconds".into()));
            }
            let n = pipeline::cmd_track(&manifest, config_id, window, cadence as i64, altitude_km, &out)?;
            eprintln!("wrote {} ({n} satellites)", out.display());
        }
        Command::Evaluate(args) => {
            let cfg = args.resolve()?;
            let report = pipeline::cmd_evaluate(&cfg)?;
            for r in &report.ranking {
                let kl = r.result.kl_divergence.map(|k| format!("{k:.4}")).unwrap_or_else(|| "-".into());
                println!("{:>3}  {:>8}  {}", r.rank, kl, r.result.name);
            }
            eprintln!("{} clusters; outputs in {}", report.n_clusters, report.out_dir.display());
        }
        Command::Rank { results, out } => {
            let ranked = pipeline::cmd_rank(&results, &out)?;
            eprintln!("wrote {} ({} rows)", out.display(), ranked.len());
        }
        Command::Curves { run_dir, config_id, out } => {
            let out = out.unwrap_or_else(|| run_dir.join(CURVES_DIR).join(curve_file_name(config_id)));
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).map_err(|e| CliError::Data(format!("{}: {e}", parent.display())))?;
            }
            pipeline::cmd_curves(&run_dir, config_id, &out)?;
            eprintln!("wrote {}", out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

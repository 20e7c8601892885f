use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use onebit_rof::config::{lin_to_db, SystemConfig};
use onebit_rof::estimators::{Blmmse, UnfoldedParams};
use onebit_rof::experiments::{
    dither_point, evaluate, evaluate_blmmse, m1_reference_training, optimum, read_sweep_csv, run_dither_sweep, run_snr_sweep,
    snr_point, write_svg, write_sweep_csv, Estimator, OperatingPoint, Scenario, SweepResult,
};
use onebit_rof::model::ForwardOperator;
use onebit_rof::selftest::run_selftest;
use onebit_rof::training::{train, write_train_log};
use onebit_rof::{Error, Result};

#[derive(Parser)]
#[command(name = "onebit-rof", version, about = "Channel estimation over a 1-bit radio-over-fiber fronthaul")]
struct Cli {
    /// TOML configuration; defaults apply to missing keys.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,
    /// Reduced training budget.
    #[arg(long, global = true)]
    fast: bool,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Also write an SVG chart next to each sweep table.
    #[arg(long, global = true)]
    emit_plot: bool,
    /// Include wall-clock seconds in training logs (makes them non-reproducible).
    #[arg(long, global = true)]
    wall_time: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelArg {
    M1,
    M2,
    M3,
}

#[derive(Subcommand)]
enum Command {
    /// NMSE against Es/Ed on Model 1 (writes the dither-sweep table).
    SweepDither,
    /// NMSE against Es/N0 for one scenario, or `all`.
    SweepSnr {
        #[arg(long)]
        scenario: String,
        /// Es/Ed to use instead of the DNN optimum of the dither-sweep table.
        #[arg(long)]
        ratio_db: Option<f64>,
    },
    /// Train one network; writes a checkpoint and a training log.
    Train {
        #[arg(long, value_enum, default_value = "m1")]
        model: ModelArg,
        /// Es/Ed in dB (default: from the config powers).
        #[arg(long)]
        ratio_db: Option<f64>,
        /// Es/N0 in dB for Models 2 and 3 (default: from the config powers).
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Test a checkpoint and the baseline at one operating point.
    Evaluate {
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, value_enum, default_value = "m1")]
        model: ModelArg,
        #[arg(long)]
        ratio_db: Option<f64>,
        #[arg(long)]
        snr_db: Option<f64>,
    },
    /// Bussgang LMMSE over the dither grid: predicted and empirical NMSE.
    Blmmse,
    /// Oracle and invariant checks.
    Selftest,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_table(out: &Path, name: &str, rows: &[SweepResult], plot: Option<(&str, &str)>) -> Result<()> {
    let path = out.join(name);
    let mut w = create(&path)?;
    write_sweep_csv(&mut w, rows)?;
    w.flush()?;
    eprintln!("wrote {}", path.display());
    if let Some((title, x_label)) = plot {
        let svg = path.with_extension("svg");
        let mut w = create(&svg)?;
        write_svg(&mut w, rows, title, x_label)?;
        w.flush()?;
        eprintln!("wrote {}", svg.display());
    }
    Ok(())
}

/// The dither-sweep table named in the config; relative paths are looked up
/// in the output directory first.
fn dither_table(cfg: &SystemConfig, out: &Path) -> Result<Vec<SweepResult>> {
    let name = Path::new(&cfg.experiments.dither_sweep_csv);
    let path = if name.is_relative() && out.join(name).exists() {
        out.join(name)
    } else {
        name.to_path_buf()
    };
    let file = File::open(&path).map_err(|e| Error::Config {
        key: "experiments.dither_sweep_csv".into(),
        msg: format!("cannot read {}: {e} (run sweep-dither first or pass --ratio-db)", path.display()),
    })?;
    read_sweep_csv(BufReader::new(file))
}

fn config_ratio_db(cfg: &SystemConfig) -> f64 {
    cfg.system.es_dbw - cfg.system.ed_dbw
}

fn config_snr_db(cfg: &SystemConfig) -> f64 {
    cfg.system.es_dbw - cfg.system.n0_dbw
}

fn point_for(
    cfg: &SystemConfig,
    op: &ForwardOperator,
    model: ModelArg,
    ratio_db: Option<f64>,
    snr_db: Option<f64>,
) -> Result<OperatingPoint> {
    let ratio = ratio_db.unwrap_or_else(|| config_ratio_db(cfg));
    let snr = snr_db.unwrap_or_else(|| config_snr_db(cfg));
    match model {
        ModelArg::M1 => dither_point(cfg, op, ratio),
        ModelArg::M2 => {
            let mut p = snr_point(cfg, op, Scenario::TrainM1TestM2, snr, ratio)?;
            p.train = p.test.clone();
            Ok(p)
        }
        ModelArg::M3 => snr_point(cfg, op, Scenario::TrainM3TestM3, snr, ratio),
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => SystemConfig::load(p)?,
        None => SystemConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if cli.fast {
        cfg = cfg.fast();
    }
    cfg.validate()?;
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Config {
                key: "--threads".into(),
                msg: "must be at least 1".into(),
            });
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let out = cli.out.as_path();
    fs::create_dir_all(out)?;
    let plot = cli.emit_plot;

    match cli.command {
        Command::SweepDither => {
            let sweep = run_dither_sweep(&cfg)?;
            write_table(
                out,
                &cfg.experiments.dither_sweep_csv,
                &sweep.rows,
                plot.then_some(("NMSE vs Es/Ed (Model 1)", "Es/Ed [dB]")),
            )?;
            eprintln!(
                "optimal Es/Ed: DNN {:.2} dB, BLMMSE {:.2} dB",
                sweep.best_dnn_db, sweep.best_blmmse_db
            );
        }
        Command::SweepSnr { scenario, ratio_db } => {
            let scenarios: Vec<Scenario> = if scenario.eq_ignore_ascii_case("all") {
                Scenario::ALL.to_vec()
            } else {
                vec![scenario.parse().map_err(|e: Error| Error::Config {
                    key: "--scenario".into(),
                    msg: e.to_string(),
                })?]
            };
            let ratio = match ratio_db {
                Some(r) => r,
                None => optimum(&dither_table(&cfg, out)?, Estimator::Dnn).ok_or_else(|| Error::Config {
                    key: "experiments.dither_sweep_csv".into(),
                    msg: "table has no rows".into(),
                })?,
            };
            eprintln!("Es/Ed = {ratio:.4} dB");
            let m1 = if scenarios.iter().any(|s| *s != Scenario::TrainM3TestM3) {
                Some(m1_reference_training(&cfg, ratio)?.params)
            } else {
                None
            };
            for sc in scenarios {
                let rows = run_snr_sweep(&cfg, sc, ratio, m1.as_ref())?;
                let title = format!("NMSE vs Es/N0 ({sc})");
                write_table(out, &sc.csv_name(), &rows, plot.then_some((title.as_str(), "Es/N0 [dB]")))?;
            }
        }
        Command::Train {
            model,
            ratio_db,
            snr_db,
        } => {
            let op = ForwardOperator::from_config(&cfg)?;
            let point = point_for(&cfg, &op, model, ratio_db, snr_db)?;
            let trained = train(&cfg, &point.train, &[4])?;
            let ckpt = out.join("checkpoint.txt");
            let mut w = create(&ckpt)?;
            trained.params.write_checkpoint(&mut w, &cfg.hash())?;
            w.flush()?;
            let log = out.join("train_log.csv");
            let mut w = create(&log)?;
            write_train_log(&mut w, &trained.log, cli.wall_time)?;
            w.flush()?;
            if let (Some(first), Some(last)) = (trained.log.first(), trained.log.last()) {
                eprintln!("loss {:.4} -> {:.4} over {} epochs", first.loss, last.loss, trained.log.len());
            }
            eprintln!("wrote {} and {}", ckpt.display(), log.display());
        }
        Command::Evaluate {
            checkpoint,
            model,
            ratio_db,
            snr_db,
        } => {
            let (params, hash) = UnfoldedParams::read_checkpoint(BufReader::new(File::open(&checkpoint)?))?;
            if params.layers() != cfg.estimator.layers {
                return Err(Error::Config {
                    key: "estimator.layers".into(),
                    msg: format!("checkpoint has {} layers, config {}", params.layers(), cfg.estimator.layers),
                });
            }
            if hash != cfg.hash() {
                eprintln!("note: checkpoint config hash {hash} differs from {}", cfg.hash());
            }
            let op = ForwardOperator::from_config(&cfg)?;
            let point = point_for(&cfg, &op, model, ratio_db, snr_db)?;
            let ev = evaluate(&cfg, &point, &params, &[5]);
            let row = SweepResult {
                sweep_db: point.sweep_db,
                nmse_dnn_db: ev.dnn.db(),
                nmse_blmmse_db: ev.blmmse.db(),
                n_test: ev.dnn.count,
                seed: cfg.seed,
                config_hash: cfg.hash(),
            };
            eprintln!("NMSE: DNN {:.3} dB, BLMMSE {:.3} dB", row.nmse_dnn_db, row.nmse_blmmse_db);
            write_table(out, "evaluation.csv", &[row], None)?;
        }
        Command::Blmmse => {
            let op = ForwardOperator::from_config(&cfg)?;
            let path = out.join("blmmse_sweep.csv");
            let mut w = create(&path)?;
            writeln!(w, "sweep_db,nmse_predicted_db,nmse_empirical_db,n_test,seed,config_hash")?;
            for ratio in cfg.experiments.dither_grid.values() {
                let point = dither_point(&cfg, &op, ratio)?;
                let bl: &Blmmse = &point.blmmse;
                let acc = evaluate_blmmse(&cfg, &point, &[6]);
                let energy = (cfg.system.s * cfg.system.u) as f64;
                writeln!(
                    w,
                    "{},{:.6},{:.6},{},{},{}",
                    ratio,
                    lin_to_db(bl.predicted_mse() / energy),
                    acc.db(),
                    acc.count,
                    cfg.seed,
                    cfg.hash()
                )?;
            }
            w.flush()?;
            eprintln!("wrote {}", path.display());
        }
        Command::Selftest => {
            let checks = run_selftest(&cfg)?;
            let mut failed = 0;
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
                failed += !c.passed as usize;
            }
            if failed > 0 {
                return Err(Error::Parameter(format!("{failed} self-test check(s) failed")));
            }
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
            if e.is_config() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

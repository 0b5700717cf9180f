use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use npfk::experiment::{
    convert_dataset, emit_report, run_experiment, EmitOptions, ExperimentConfig, Method,
};
use npfk::npfree::DEFAULT_HISTORY_WINDOW;
use npfk::{load_dataset, LstmHyperparams};

#[derive(Parser, Debug)]
#[command(
    name = "npfk",
    version,
    about = "Compare NP-Free RMSE series and z-normalization as k-means front-ends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// UCR-style text file: one series per line, class label first.
    #[arg(long)]
    input: PathBuf,
    /// Keep only records with this class label.
    #[arg(long)]
    class_label: Option<i64>,
    /// RMSE history window for the adaptive threshold.
    #[arg(long, default_value_t = DEFAULT_HISTORY_WINDOW)]
    w: usize,
    /// Worker threads (0 = all cores).
    #[arg(long, env = "NPFK_THREADS", default_value_t = 0)]
    threads: usize,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Convert every series with one method and write the results.
    Convert {
        #[command(flatten)]
        common: Common,
        /// Representation to produce: `npfree` or `znorm`.
        #[arg(long, value_parser = parse_method)]
        method: Method,
    },
    /// Run both pipelines over a k sweep and write report.csv.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Comma-separated cluster counts.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "13,14,15,17,19,20,21,22,26,28,29,33"
        )]
        k_list: Vec<usize>,
        /// Seed for drawing the shared initial centroid indices.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Leave the timing columns of report.csv empty.
        #[arg(long)]
        omit_timing: bool,
    },
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: npfk::Error| e.to_string())
}

fn run(cli: Cli) -> npfk::Result<()> {
    match cli.command {
        Command::Convert { common, method } => {
            let dataset = load_dataset(&common.input, common.class_label)?;
            let files = convert_dataset(
                &dataset,
                method,
                LstmHyperparams::default(),
                common.w,
                common.threads,
                &common.out,
            )?;
            println!(
                "converted {} series with {method}; wrote {} files to {}",
                dataset.len(),
                files.len(),
                common.out.display()
            );
        }
        Command::Bench {
            common,
            k_list,
            seed,
            plot,
            omit_timing,
        } => {
            let cfg = ExperimentConfig {
                class_filter: common.class_label,
                k_list,
                seed,
                w: common.w,
                threads: common.threads,
                ..ExperimentConfig::new(&common.input, &common.out)
            };
            let report = run_experiment(&cfg)?;
            emit_report(
                &report,
                &cfg.output_dir,
                EmitOptions {
                    include_timing: !omit_timing,
                    details: true,
                    plot,
                },
            )?;
            println!(
                "{} series x {} points, {} threads",
                report.dataset.len(),
                report.dataset.series_length,
                report.threads
            );
            println!("{:>4}  {:>10}  {:>10}", "k", "npfree", "znorm");
            for npf in report.runs.iter().filter(|r| r.method == Method::NpFree) {
                let z = report
                    .run(Method::ZNorm, npf.k)
                    .map_or(f64::NAN, |r| r.silhouette.overall);
                println!(
                    "{:>4}  {:>10.4}  {:>10.4}",
                    npf.k, npf.silhouette.overall, z
                );
            }
            println!(
                "preprocessing per series: npfree {:.6}s (sd {:.6}), znorm {:.6}s (sd {:.6})",
                report.npfree.timing.mean_s,
                report.npfree.timing.std_s,
                report.znorm.timing.mean_s,
                report.znorm.timing.std_s
            );
            println!(
                "report written to {}",
                cfg.output_dir.join("report.csv").display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments");
            eprintln!("{first}");
            return ExitCode::FAILURE;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

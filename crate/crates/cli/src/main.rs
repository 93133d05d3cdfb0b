use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use texclass::dataset::load_dataset;
use texclass::features::{extract_table, FeatureConfig, FeatureTable};
use texclass::pipeline::{
    classify_once, filter_correlations, read_confusion, read_results_dir, relevance_report,
    run_experiment, with_workers, ExperimentConfig, Stage, CONFUSION_DIR,
};
use texclass::synthetic::{generate, write_png_dataset, SyntheticSpec};
use texclass::{Error, Result, SourceSelection};

#[derive(Parser)]
#[command(
    name = "texclass",
    version,
    about = "Texture feature extraction and classification experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Extract the 520 features of every image and write them to a CSV cache.
    Extract {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 64)]
        levels: u16,
        /// Worker threads; 0 or absent uses every core.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the case sweep described by a `key = value` config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
    },
    /// Summarize a results directory.
    Report {
        kind: ReportKind,
        #[arg(long)]
        results: PathBuf,
        /// Stage whose mean success is correlated with source inclusion.
        #[arg(long, default_value = "raw")]
        stage: String,
        /// Only this case (confusion report).
        #[arg(long)]
        case: Option<u8>,
    },
    /// One permutation of one case over a feature cache; prints the success ratio.
    Classify {
        #[arg(long)]
        cache: PathBuf,
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=31))]
        case: u8,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value = "raw")]
        stage: String,
        /// Optional experiment config supplying PCA and GA parameters.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Write the procedural texture set as PNG files.
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 40)]
        per_class: usize,
        #[arg(long, default_value_t = 64)]
        side: usize,
        #[arg(long, default_value_t = 2024)]
        seed: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportKind {
    Correlations,
    Relevance,
    Confusion,
}

fn extract(dataset: PathBuf, out: PathBuf, levels: u16, workers: Option<usize>) -> Result<()> {
    let config = FeatureConfig {
        levels,
        ..FeatureConfig::default()
    };
    config
        .validate()
        .map_err(|e| Error::Config(e.to_string()))?;
    let samples = load_dataset(&dataset)?;
    let table = match workers {
        Some(n) => with_workers(n, || extract_table(&samples, &config))?,
        None => extract_table(&samples, &config)?,
    };
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    table.write_csv(&out)?;
    println!(
        "extracted {} samples x {} features -> {}",
        table.len(),
        table.names.len(),
        out.display()
    );
    Ok(())
}

fn experiment(config: PathBuf) -> Result<()> {
    let cfg = ExperimentConfig::from_file(&config)?;
    let results = run_experiment(&cfg)?;
    println!("case  mu0     mu_pca  mu_ga   nf0  nf_ga");
    let cell = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{:.2}", 100.0 * v));
    for r in &results {
        println!(
            "{:>4}  {:<6}  {:<6}  {:<6}  {:<3}  {}",
            r.case,
            cell(r.raw.as_ref().map(|s| s.mean)),
            cell(r.pca.as_ref().map(|s| s.mean)),
            cell(r.ga.as_ref().map(|s| s.mean)),
            r.nf0,
            r.nf_ga.map_or("-".to_string(), |v| format!("{v:.1}")),
        );
    }
    println!("results written to {}", cfg.output.display());
    Ok(())
}

fn report(kind: ReportKind, results: PathBuf, stage: &str, case: Option<u8>) -> Result<()> {
    match kind {
        ReportKind::Correlations => {
            let stage: Stage = stage.parse()?;
            let res = read_results_dir(&results)?;
            println!("source,coefficient");
            for c in filter_correlations(&res, stage)? {
                let v = c
                    .coefficient
                    .map_or("undefined".to_string(), |v| format!("{:.4}", v));
                println!("{},{}", c.source, v);
            }
        }
        ReportKind::Relevance => {
            let res = read_results_dir(&results)?;
            let rep = relevance_report(&res);
            if rep.is_empty() {
                return Err(Error::Data(
                    "no case in these results ran the ga stage".into(),
                ));
            }
            println!("rank,group,frequency,name");
            for (i, e) in rep.iter().enumerate() {
                println!("{},{},{:.4},{}", i + 1, e.group, e.frequency, e.label);
            }
        }
        ReportKind::Confusion => {
            let dir = results.join(CONFUSION_DIR);
            let mut files: Vec<PathBuf> = std::fs::read_dir(&dir)
                .map_err(|e| Error::Io {
                    path: dir.clone(),
                    source: e,
                })?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|x| x == "csv"))
                .collect();
            files.sort();
            if let Some(c) = case {
                let name = texclass::pipeline::confusion_file_name(c);
                files.retain(|p| p.file_name().is_some_and(|n| n == name.as_str()));
                if files.is_empty() {
                    return Err(Error::Data(format!("no confusion matrix for case {c}")));
                }
            }
            for path in files {
                let cm = read_confusion(&path)?;
                println!(
                    "# {}",
                    path.file_stem().unwrap_or_default().to_string_lossy()
                );
                let width = cm.classes.iter().map(String::len).max().unwrap_or(0).max(8);
                print!("{:width$}", "");
                for c in &cm.classes {
                    print!(" {c:>width$}");
                }
                println!();
                for (c, row) in cm.classes.iter().zip(&cm.counts) {
                    print!("{c:width$}");
                    for v in row {
                        print!(" {:>width$.2}", v);
                    }
                    println!();
                }
                println!("accuracy {:.2}%", 100.0 * cm.trace() / cm.total());
            }
        }
    }
    Ok(())
}

fn classify(
    cache: PathBuf,
    case: u8,
    seed: u64,
    stage: &str,
    config: Option<PathBuf>,
) -> Result<()> {
    let stage: Stage = stage.parse()?;
    let cfg = match config {
        Some(p) => ExperimentConfig::from_file(&p)?,
        None => ExperimentConfig::default(),
    };
    let table = FeatureTable::read_csv(&cache)?;
    let selection = SourceSelection::from_case(case).map_err(|e| Error::Config(e.to_string()))?;
    let success = classify_once(&table, selection, seed, stage, &cfg)?;
    println!("{success}");
    Ok(())
}

fn synth(out: PathBuf, per_class: usize, side: usize, seed: u64) -> Result<()> {
    let spec = SyntheticSpec {
        images_per_class: per_class,
        side,
        seed,
        ..SyntheticSpec::default()
    };
    let samples = generate(&spec).map_err(|e| Error::Config(e.to_string()))?;
    write_png_dataset(&out, &samples)?;
    println!("wrote {} images to {}", samples.len(), out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Extract {
            dataset,
            out,
            levels,
            workers,
        } => extract(dataset, out, levels, workers),
        Command::Experiment { config } => experiment(config),
        Command::Report {
            kind,
            results,
            stage,
            case,
        } => report(kind, results, &stage, case),
        Command::Classify {
            cache,
            case,
            seed,
            stage,
            config,
        } => classify(cache, case, seed, &stage, config),
        Command::Synth {
            out,
            per_class,
            side,
            seed,
        } => synth(out, per_class, side, seed),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

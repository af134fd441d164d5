use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use maskspeech::corpus::{load_manifest, Manifest};
use maskspeech::features::FeatureKind;
use maskspeech::pipeline::{
    cmd_eval, cmd_extract, cmd_fuse, cmd_render, cmd_score, cmd_synth, cmd_train, PipelineConfig, WorkDir,
};
use maskspeech::{Error, Result};

/// Mask / no-mask speech classification pipeline.
#[derive(Parser)]
#[command(name = "maskspeech", version)]
struct Cli {
    /// TOML config; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Manifest to use instead of the configured one.
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    /// Output directory: the corpus for `synth`, the panels for `render`,
    /// the work dir otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic corpus.
    Synth {
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Extract features for every manifest entry.
    Extract {
        /// One of lfcc, mfcc, ifcc, cqcc; every configured system if omitted.
        #[arg(long)]
        feature: Option<FeatureKind>,
    },
    /// Train the per-class GMMs on the train partition.
    Train {
        #[arg(long)]
        feature: Option<FeatureKind>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Score dev and test utterances.
    Score {
        #[arg(long)]
        feature: Option<FeatureKind>,
    },
    /// Learn score fusion on dev and apply it to test.
    Fuse,
    /// Print the UAR table.
    Eval,
    /// Spectrogram and pyknogram of one WAV file.
    Render {
        #[arg(long)]
        input: PathBuf,
    },
}

fn kinds(cfg: &PipelineConfig, feature: Option<FeatureKind>) -> Vec<FeatureKind> {
    feature.map_or_else(|| cfg.systems.clone(), |k| vec![k])
}

fn manifest(cfg: &PipelineConfig) -> Result<Manifest> {
    load_manifest(&cfg.manifest_path())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(m) = cli.manifest {
        cfg.paths.manifest = Some(m);
    }
    let out = cli.out.as_deref();
    if let (Some(o), false) = (out, matches!(cli.command, Command::Synth { .. } | Command::Render { .. })) {
        cfg.paths.work_dir = o.to_path_buf();
    }
    let work = WorkDir::new(&cfg.paths.work_dir);

    match cli.command {
        Command::Synth { seed } => {
            if let Some(s) = seed {
                cfg.corpus.seed = s;
            }
            cfg.validate()?;
            let dir = out.unwrap_or(&cfg.paths.corpus_dir).to_path_buf();
            let m = cmd_synth(&cfg, &dir)?;
            println!("wrote {} segments to {}", m.len(), dir.display());
        }
        Command::Extract { feature } => {
            let m = manifest(&cfg)?;
            for kind in kinds(&cfg, feature) {
                let s = cmd_extract(&cfg, &m, kind, &work)?;
                println!("{kind}: {} written, {} up to date", s.written, s.skipped);
            }
        }
        Command::Train { feature, seed } => {
            if let Some(s) = seed {
                cfg.gmm.seed = s;
            }
            cfg.validate()?;
            let m = manifest(&cfg)?;
            for kind in kinds(&cfg, feature) {
                cmd_train(&cfg, &m, kind, &work)?;
                println!("{kind}: {}", work.model_path(kind).display());
            }
        }
        Command::Score { feature } => {
            let m = manifest(&cfg)?;
            for kind in kinds(&cfg, feature) {
                for (part, n) in cmd_score(&cfg, &m, kind, &work)? {
                    println!("{kind} {part}: {n} scored");
                }
            }
        }
        Command::Fuse => {
            let model = cmd_fuse(&cfg, &manifest(&cfg)?, &work)?;
            println!("bias {}", model.bias);
            for (s, w) in model.systems.iter().zip(&model.weights) {
                println!("{s} {w}");
            }
        }
        Command::Eval => print!("{}", cmd_eval(&cfg, &manifest(&cfg)?, &work)?),
        Command::Render { input } => {
            let dir = out.unwrap_or(Path::new("."));
            for p in cmd_render(&cfg, &input, dir)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_byte(&e))
        }
    }
}

fn exit_byte(e: &Error) -> u8 {
    u8::try_from(e.exit_code()).unwrap_or(2)
}

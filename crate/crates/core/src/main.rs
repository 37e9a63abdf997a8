use std::fs;
use std::io::Read;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{ensure, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use tracing_subscriber::EnvFilter;

use painter_core::assessment::{assess_state, parse_transcript, run_transcript};
use painter_core::dialogue::{DialogueConfig, DialogueEngine, DialogueScript};
use painter_core::persona::{AdjectiveTable, Categorization, StyleMap, DEFAULT_DOMINANCE_BAND};
use painter_core::render::{render_portrait, MatteMask, RasterImage};
use painter_core::sentiment::{Lexicon, ScoringConfig};
use painter_core::service::{content_hash, router, AppState, ServiceConfig};

#[derive(Parser)]
#[command(
    name = "painter",
    version,
    about = "Empathic interview and painterly portrait tool"
)]
struct Cli {
    #[command(flatten)]
    tuning: Tuning,
    #[command(subcommand)]
    command: Command,
}

/// Data files and thresholds shared by every subcommand.
#[derive(Args)]
struct Tuning {
    /// Sentiment lexicon (TSV); defaults to the bundled starter lexicon.
    #[arg(long, global = true, env = "PAINTER_LEXICON")]
    lexicon: Option<PathBuf>,
    /// Interview script (TOML).
    #[arg(long, global = true, env = "PAINTER_SCRIPT")]
    script: Option<PathBuf>,
    /// Personality → style map (TOML).
    #[arg(long, global = true, env = "PAINTER_STYLES")]
    styles: Option<PathBuf>,
    /// AB5C adjective table (TOML).
    #[arg(long, global = true, env = "PAINTER_ADJECTIVES")]
    adjectives: Option<PathBuf>,
    #[arg(long, global = true, env = "PAINTER_ACCEPT_THRESHOLD")]
    accept_threshold: Option<f64>,
    #[arg(long, global = true, env = "PAINTER_NEUTRAL_BAND")]
    neutral_band: Option<f64>,
    #[arg(long, global = true, env = "PAINTER_DOMINANCE_BAND", default_value_t = DEFAULT_DOMINANCE_BAND)]
    dominance_band: f64,
    #[arg(long, global = true, env = "PAINTER_REASK_LIMIT")]
    reask_limit: Option<u32>,
    #[arg(long, global = true, env = "PAINTER_MAX_TURNS")]
    max_turns: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "PAINTER_PORT", default_value_t = 8080)]
        port: u16,
        #[arg(long, env = "PAINTER_BIND", default_value = "127.0.0.1")]
        bind: std::net::IpAddr,
        #[arg(long, env = "PAINTER_DATA_DIR", default_value = "painter-data")]
        data_dir: PathBuf,
        #[arg(long, env = "PAINTER_WORKERS", default_value_t = 2)]
        workers: usize,
        #[arg(long, env = "PAINTER_MAX_UPLOAD_BYTES", default_value_t = 10 * 1024 * 1024)]
        max_upload_bytes: usize,
    },
    /// Score a transcript offline and print the profile and cell as JSON.
    Assess {
        /// One sitter utterance per line; `-` reads stdin.
        #[arg(long)]
        transcript: PathBuf,
        /// Also print the full session transcript as JSON lines.
        #[arg(long)]
        show_dialogue: bool,
    },
    /// Render a portrait offline.
    Paint {
        #[arg(long)]
        image: PathBuf,
        /// AB5C cell label such as `E+A+`, or `neutral`.
        #[arg(long)]
        cell: Categorization,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Grayscale PNG matte to use instead of the heuristic one.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Directory for the three phase outputs.
        #[arg(long)]
        phases_dir: Option<PathBuf>,
    },
    /// Check a style map for load errors and indistinct entries.
    LintStyles {
        #[arg(long)]
        map: PathBuf,
    },
}

impl Tuning {
    fn engine(&self) -> Result<DialogueEngine> {
        let lexicon = match &self.lexicon {
            Some(p) => {
                let f = fs::File::open(p).with_context(|| format!("opening {}", p.display()))?;
                Lexicon::load(std::io::BufReader::new(f))
                    .with_context(|| format!("loading {}", p.display()))?
            }
            None => Lexicon::starter(),
        };
        let script = match &self.script {
            Some(p) => {
                DialogueScript::from_path(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => DialogueScript::builtin(),
        };
        let mut config = DialogueConfig::default();
        if let Some(v) = self.accept_threshold {
            config.accept_threshold = v;
        }
        if let Some(v) = self.reask_limit {
            config.reask_limit = v;
        }
        if let Some(v) = self.max_turns {
            config.max_turns = v;
        }
        config.scoring = ScoringConfig {
            neutral_band: self.neutral_band.unwrap_or(config.scoring.neutral_band),
            ..config.scoring
        };
        Ok(DialogueEngine::new(script, config, Arc::new(lexicon))?)
    }

    fn styles(&self) -> Result<StyleMap> {
        Ok(match &self.styles {
            Some(p) => {
                StyleMap::from_path(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => StyleMap::builtin(),
        })
    }

    fn adjectives(&self) -> Result<AdjectiveTable> {
        Ok(match &self.adjectives {
            Some(p) => {
                AdjectiveTable::from_path(p).with_context(|| format!("loading {}", p.display()))?
            }
            None => AdjectiveTable::builtin(),
        })
    }
}

fn read_input(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s)?;
        Ok(s)
    } else {
        fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")),
        )
        .with_writer(std::io::stderr)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let tuning = &cli.tuning;
    ensure!(
        (0.0..1.0).contains(&tuning.dominance_band),
        "dominance band {} outside [0, 1)",
        tuning.dominance_band
    );
    match &cli.command {
        Command::Serve {
            port,
            bind,
            data_dir,
            workers,
            max_upload_bytes,
        } => {
            let config = ServiceConfig {
                data_dir: data_dir.clone(),
                workers: *workers,
                max_upload_bytes: *max_upload_bytes,
                dominance_band: tuning.dominance_band,
            };
            let (engine, styles, adjectives) =
                (tuning.engine()?, tuning.styles()?, tuning.adjectives()?);
            let addr = SocketAddr::new(*bind, *port);
            tokio::runtime::Runtime::new()?.block_on(async move {
                let state = AppState::new(config, engine, styles, adjectives)?;
                let listener = tokio::net::TcpListener::bind(addr).await?;
                tracing::info!(%addr, data_dir = %data_dir.display(), "listening");
                axum::serve(listener, router(state))
                    .with_graceful_shutdown(async {
                        let _ = tokio::signal::ctrl_c().await;
                    })
                    .await?;
                anyhow::Ok(())
            })?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Assess {
            transcript,
            show_dialogue,
        } => {
            let engine = tuning.engine()?;
            let utterances = parse_transcript(&read_input(transcript)?)?;
            let state = run_transcript(&engine, &utterances)?;
            let a = assess_state(
                &engine,
                &state,
                tuning.dominance_band,
                &tuning.adjectives()?,
            )?;
            if *show_dialogue {
                eprint!("{}", state.transcript_jsonl());
            }
            println!("{}", serde_json::to_string_pretty(&a)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Paint {
            image,
            cell,
            seed,
            out,
            mask,
            phases_dir,
        } => {
            let styles = tuning.styles()?;
            let style = styles.style_for(cell);
            let img =
                RasterImage::open(image).with_context(|| format!("reading {}", image.display()))?;
            let mask = match mask {
                Some(p) => Some(MatteMask::from_image(
                    &RasterImage::open(p).with_context(|| format!("reading {}", p.display()))?,
                )),
                None => None,
            };
            let render = render_portrait(&img, style, *seed, mask.as_ref())?;
            let png = render.final_image().encode_png()?;
            fs::write(out, &png).with_context(|| format!("writing {}", out.display()))?;
            if let Some(dir) = phases_dir {
                fs::create_dir_all(dir)?;
                let stem = out
                    .file_stem()
                    .and_then(|s| s.to_str())
                    .unwrap_or("portrait");
                for (i, phase) in render.phase_outputs().into_iter().enumerate() {
                    phase.save_png(&dir.join(format!("{stem}.phase{}.png", i + 1)))?;
                }
            }
            let summary = json!({
                "out": out,
                "sha256": content_hash(&png),
                "cell": cell,
                "style": style.name,
                "seed": seed,
                "strokes": render.strokes.strokes.len(),
            });
            println!("{}", serde_json::to_string_pretty(&summary)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::LintStyles { map } => {
            let report = StyleMap::lint(&read_input(map)?);
            for e in &report.errors {
                println!("error: {e}");
            }
            for (a, b) in &report.indistinct {
                println!("indistinct: {a} and {b} share palette and stroke settings");
            }
            if report.is_clean() {
                println!("ok: {} cells", report.cells);
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::FAILURE)
            }
        }
    }
}

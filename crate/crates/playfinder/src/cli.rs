//! Command-line interface mirroring the HTTP endpoints.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use playfinder_core::cache::embed;
use playfinder_core::eval::{self, build_suite, inject_paraphrases, load_pairs, save_pairs, SuiteConfig};
use playfinder_core::lm::{TOKEN_VAR, URL_VAR};
use playfinder_core::media::{DEFAULT_MAX_LINKS, DEFAULT_TEMPLATE};
use playfinder_core::schema::SchemaName;
use playfinder_core::store::{generate_synthetic, write_ndjson};

use crate::config::{AppError, DataSource, Settings};
use crate::service::{router, AppState};

#[derive(Debug, Parser)]
#[command(name = "playfinder", version, about = "Natural-language search over football plays")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Directory of *.schema.json files [default: bundled schemas]
    #[arg(long, global = true)]
    pub schemas: Option<PathBuf>,
    /// Newline-delimited JSON play records
    #[arg(long, global = true, conflicts_with = "synthetic")]
    pub data: Option<PathBuf>,
    /// Generate this many synthetic plays instead of reading --data
    #[arg(long, global = true)]
    pub synthetic: Option<usize>,
    /// Seed for synthetic plays and generated suites
    #[arg(long, global = true, default_value_t = 7)]
    pub seed: u64,
    /// Player and team directory JSON [default: bundled directory]
    #[arg(long, global = true)]
    pub directory: Option<PathBuf>,
    /// Grammar lexicon JSON [default: bundled lexicon]
    #[arg(long, global = true)]
    pub lexicon: Option<PathBuf>,
    /// Language model backend: grammar, remote, or an endpoint URL
    #[arg(long, global = true, default_value = "grammar")]
    pub lm: String,
    /// Minimum cosine similarity for a cache hit
    #[arg(long, global = true, default_value_t = 0.90)]
    pub cache_threshold: f64,
    /// Persist the semantic cache to this JSON file
    #[arg(long, global = true)]
    pub cache_file: Option<PathBuf>,
    /// Media asset URL template with a {play_id} placeholder
    #[arg(long, global = true, default_value = DEFAULT_TEMPLATE)]
    pub mam_url_template: String,
    /// Maximum media links per answer
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_LINKS)]
    pub max_links: usize,
    /// Print pipeline traces to stderr
    #[arg(long, global = true)]
    pub trace: bool,
}

impl Common {
    pub fn settings(&self) -> Settings {
        let data = match (&self.data, self.synthetic) {
            (Some(path), _) => DataSource::File(path.clone()),
            (None, Some(plays)) => DataSource::Synthetic { seed: self.seed, plays },
            (None, None) => DataSource::None,
        };
        Settings {
            schemas: self.schemas.clone(),
            directory: self.directory.clone(),
            lexicon: self.lexicon.clone(),
            data,
            lm: self.lm.clone(),
            cache_threshold: self.cache_threshold,
            cache_file: self.cache_file.clone(),
            mam_url_template: self.mam_url_template.clone(),
            max_links: self.max_links,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP service
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
    },
    /// Answer one prompt and print the response as JSON
    Query {
        #[arg(long)]
        prompt: String,
        #[arg(long, default_value = "cli")]
        session: String,
    },
    /// Score a QA suite, generating one when --qa is absent
    Eval {
        /// QA file: a JSON array of pairs
        #[arg(long)]
        qa: Option<PathBuf>,
        /// Write the JSON report here
        #[arg(long)]
        report: Option<PathBuf>,
        /// Pairs to generate when no --qa is given
        #[arg(long, default_value_t = 100)]
        size: usize,
        /// Fraction of pairs reworded outside the lexicon
        #[arg(long, default_value_t = 0.0)]
        paraphrase: f64,
        /// Save the generated suite here
        #[arg(long)]
        write_qa: Option<PathBuf>,
    },
    /// Validate play data and print per-schema row counts
    Ingest,
    /// Write synthetic plays as newline-delimited JSON
    Gen {
        #[arg(long, default_value_t = 5000)]
        plays: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the hex bytes of a text's cache embedding
    Embed {
        #[arg(long)]
        text: String,
    },
}

fn print_json(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("value serializes"));
}

pub fn run(cli: Cli) -> Result<(), AppError> {
    let settings = cli.common.settings();
    match cli.command {
        Command::Serve { port, host } => serve(settings, &host, port),
        Command::Query { prompt, session } => {
            let pipeline = settings.ready_pipeline()?;
            let response = pipeline.handle(&session, &prompt);
            settings.persist_cache(&pipeline, &response)?;
            if cli.common.trace {
                eprintln!("{}", serde_json::to_string_pretty(&response.trace).expect("trace serializes"));
            }
            print_json(&response);
            Ok(())
        }
        Command::Eval {
            qa,
            report,
            size,
            paraphrase,
            write_qa,
        } => {
            let pipeline = settings.ready_pipeline()?;
            let mut pairs = match &qa {
                Some(path) => load_pairs(path)?,
                None => {
                    let config = SuiteConfig {
                        size,
                        seed: cli.common.seed,
                        ..SuiteConfig::default()
                    };
                    let store = pipeline.store().expect("ready pipeline has a store");
                    build_suite(&config, &store, pipeline.directory())?
                }
            };
            if paraphrase > 0.0 {
                inject_paraphrases(&mut pairs, paraphrase, cli.common.seed);
            }
            if let Some(path) = &write_qa {
                save_pairs(path, &pairs)?;
            }
            let result = eval::run(&pipeline, &pairs)?;
            print!("{}", result.render_table());
            if let Some(path) = &report {
                std::fs::write(path, result.to_json() + "\n").map_err(|e| AppError::io(path, e))?;
            }
            Ok(())
        }
        Command::Ingest => {
            let pipeline = settings.build_pipeline()?;
            let store = settings
                .load_store(pipeline.registry().clone(), pipeline.directory())?
                .ok_or_else(|| AppError::Usage("nothing to ingest: pass --data FILE or --synthetic N".into()))?;
            let rows: serde_json::Map<String, serde_json::Value> = SchemaName::ALL
                .iter()
                .map(|s| (s.as_str().to_string(), store.rows(*s).into()))
                .collect();
            print_json(&serde_json::json!({ "plays": store.len(), "rows": rows }));
            Ok(())
        }
        Command::Gen { plays, out } => {
            let directory = settings.load_directory()?;
            let records = generate_synthetic(cli.common.seed, plays, &directory);
            let file = File::create(&out).map_err(|e| AppError::io(&out, e))?;
            let mut w = BufWriter::new(file);
            write_ndjson(&mut w, &records)
                .and_then(|_| w.flush())
                .map_err(|e| AppError::io(&out, e))?;
            Ok(())
        }
        Command::Embed { text } => {
            let e = embed(&text)?;
            let hex: String = e.to_bytes().iter().map(|b| format!("{b:02x}")).collect();
            println!("{hex}");
            Ok(())
        }
    }
}

fn serve(settings: Settings, host: &str, port: u16) -> Result<(), AppError> {
    let pipeline = Arc::new(settings.build_pipeline()?);
    if settings.lm != "grammar" {
        tracing::info!("language model endpoint from {URL_VAR}, token from {TOKEN_VAR}");
    }
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| AppError::Usage(format!("bad listen address: {e}")))?;
    let runtime = tokio::runtime::Runtime::new().map_err(|e| AppError::io("tokio runtime", e))?;
    let state = AppState {
        pipeline: pipeline.clone(),
        settings: Arc::new(settings.clone()),
    };
    runtime.block_on(async move {
        let listener = tokio::net::TcpListener::bind(addr)
            .await
            .map_err(|e| AppError::io(addr.to_string(), e))?;
        tracing::info!("listening on {}", listener.local_addr().map_err(|e| AppError::io("listener", e))?);
        // Plays load after the socket is up so health checks can report progress.
        let loader = tokio::task::spawn_blocking(move || {
            match settings.load_store(pipeline.registry().clone(), pipeline.directory()) {
                Ok(Some(store)) => {
                    tracing::info!(plays = store.len(), "store ready");
                    pipeline.set_store(Arc::new(store));
                }
                Ok(None) => tracing::warn!("no play data configured; serving without a store"),
                Err(e) => tracing::error!("loading plays failed: {e}"),
            }
        });
        let server = axum::serve(listener, router(state)).with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        });
        let served = server.await.map_err(|e| AppError::io("server", e));
        loader.abort();
        served
    })
}

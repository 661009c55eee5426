//! Startup settings shared by the server and the command-line tools.

use std::fs::File;
use std::io::BufReader;
use std::path::PathBuf;
use std::sync::Arc;

use playfinder_core::bundled;
use playfinder_core::cache::{CacheError, SemanticCache, DEFAULT_CAPACITY, DEFAULT_THRESHOLD};
use playfinder_core::directory::{Directory, DirectoryError};
use playfinder_core::eval::EvalError;
use playfinder_core::lm::{GrammarBackend, Lexicon, LexiconError, LmBackend, LmError, RemoteBackend, RemoteConfig};
use playfinder_core::media::{MediaConfig, DEFAULT_MAX_LINKS, DEFAULT_TEMPLATE};
use playfinder_core::pipeline::{Pipeline, PipelineResponse, Stage};
use playfinder_core::schema::{SchemaError, SchemaRegistry};
use playfinder_core::store::{generate_synthetic, read_ndjson, IngestError, PlayStore};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum AppError {
    #[error(transparent)]
    Schema(#[from] SchemaError),
    #[error(transparent)]
    Directory(#[from] DirectoryError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error(transparent)]
    Lm(#[from] LmError),
    #[error(transparent)]
    Ingest(#[from] IngestError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into().display().to_string(),
            source,
        }
    }
}

/// Where plays come from.
#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    /// No plays; the service reports itself not ready.
    None,
    File(PathBuf),
    Synthetic { seed: u64, plays: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub schemas: Option<PathBuf>,
    pub directory: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub data: DataSource,
    /// `grammar`, `remote` (endpoint from the environment) or an endpoint URL.
    pub lm: String,
    pub cache_threshold: f64,
    pub cache_file: Option<PathBuf>,
    pub mam_url_template: String,
    pub max_links: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            schemas: None,
            directory: None,
            lexicon: None,
            data: DataSource::None,
            lm: "grammar".into(),
            cache_threshold: DEFAULT_THRESHOLD,
            cache_file: None,
            mam_url_template: DEFAULT_TEMPLATE.into(),
            max_links: DEFAULT_MAX_LINKS,
        }
    }
}

impl Settings {
    pub fn registry(&self) -> Result<SchemaRegistry, AppError> {
        Ok(match &self.schemas {
            Some(dir) => SchemaRegistry::load(dir)?,
            None => bundled::registry(),
        })
    }

    pub fn load_directory(&self) -> Result<Directory, AppError> {
        Ok(match &self.directory {
            Some(path) => Directory::load(path)?,
            None => bundled::directory(),
        })
    }

    pub fn load_lexicon(&self) -> Result<Lexicon, AppError> {
        Ok(match &self.lexicon {
            Some(path) => Lexicon::load(path)?,
            None => bundled::lexicon(),
        })
    }

    fn backend(
        &self,
        registry: &Arc<SchemaRegistry>,
        directory: &Arc<Directory>,
        lexicon: &Arc<Lexicon>,
    ) -> Result<Arc<dyn LmBackend>, AppError> {
        Ok(match self.lm.as_str() {
            "grammar" => Arc::new(GrammarBackend::new(registry.clone(), directory.clone(), lexicon.clone())?),
            "remote" => Arc::new(RemoteBackend::new(RemoteConfig::from_env()?)?),
            url if url.starts_with("http://") || url.starts_with("https://") => {
                let mut cfg = RemoteConfig::from_env().unwrap_or_else(|_| RemoteConfig::new(url));
                cfg.url = url.to_string();
                Arc::new(RemoteBackend::new(cfg)?)
            }
            other => {
                return Err(AppError::Usage(format!(
                    "unknown --lm '{other}': expected 'grammar', 'remote' or an http(s) URL"
                )))
            }
        })
    }

    fn cache(&self) -> Result<SemanticCache, AppError> {
        if !(0.0..=1.0).contains(&self.cache_threshold) {
            return Err(AppError::Usage(format!(
                "--cache-threshold must lie in [0, 1], got {}",
                self.cache_threshold
            )));
        }
        Ok(match &self.cache_file {
            Some(path) if path.exists() => SemanticCache::load(path, self.cache_threshold, DEFAULT_CAPACITY)?,
            _ => SemanticCache::new(self.cache_threshold, DEFAULT_CAPACITY),
        })
    }

    /// Everything except the play store, which may load later.
    pub fn build_pipeline(&self) -> Result<Pipeline, AppError> {
        let registry = Arc::new(self.registry()?);
        let directory = Arc::new(self.load_directory()?);
        let lexicon = Arc::new(self.load_lexicon()?);
        let backend = self.backend(&registry, &directory, &lexicon)?;
        Ok(Pipeline::new(registry, directory, lexicon, backend)
            .with_cache(Arc::new(self.cache()?))
            .with_media(MediaConfig {
                template: self.mam_url_template.clone(),
                max_links: self.max_links,
            }))
    }

    /// Reads or generates the plays; `None` when no source is configured.
    pub fn load_store(&self, registry: Arc<SchemaRegistry>, directory: &Directory) -> Result<Option<PlayStore>, AppError> {
        let plays = match &self.data {
            DataSource::None => return Ok(None),
            DataSource::File(path) => {
                let file = File::open(path).map_err(|e| AppError::io(path, e))?;
                read_ndjson(BufReader::new(file))?
            }
            DataSource::Synthetic { seed, plays } => generate_synthetic(*seed, *plays, directory),
        };
        Ok(Some(PlayStore::ingest(plays, registry)?))
    }

    /// Builds the pipeline and loads its store, failing if there are no plays.
    pub fn ready_pipeline(&self) -> Result<Pipeline, AppError> {
        let pipeline = self.build_pipeline()?;
        let store = self
            .load_store(pipeline.registry().clone(), pipeline.directory())?
            .ok_or_else(|| AppError::Usage("no play data: pass --data FILE or --synthetic N".into()))?;
        pipeline.set_store(Arc::new(store));
        Ok(pipeline)
    }

    /// Saves the cache when a response added to it.
    pub fn persist_cache(&self, pipeline: &Pipeline, response: &PipelineResponse) -> Result<(), AppError> {
        match &self.cache_file {
            Some(path) if response.trace.has(Stage::CacheInsert) => Ok(pipeline.cache().save(path)?),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_use_bundled_assets() {
        let p = Settings::default().build_pipeline().unwrap();
        assert!(!p.store_ready());
        assert_eq!(p.backend().name(), "grammar");
    }

    #[test]
    fn unknown_backend_is_a_usage_error() {
        let s = Settings {
            lm: "oracle".into(),
            ..Settings::default()
        };
        assert!(matches!(s.build_pipeline(), Err(AppError::Usage(_))));
    }

    #[test]
    fn threshold_out_of_range() {
        let s = Settings {
            cache_threshold: 1.5,
            ..Settings::default()
        };
        assert!(matches!(s.build_pipeline(), Err(AppError::Usage(_))));
    }

    #[test]
    fn ready_pipeline_needs_data() {
        assert!(Settings::default().ready_pipeline().is_err());
        let s = Settings {
            data: DataSource::Synthetic { seed: 1, plays: 50 },
            ..Settings::default()
        };
        assert_eq!(s.ready_pipeline().unwrap().store().unwrap().len(), 50);
    }
}

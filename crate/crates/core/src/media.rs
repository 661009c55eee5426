//! Media-asset links for matched plays, built from a URL template.

use serde::{Deserialize, Serialize};

pub const DEFAULT_TEMPLATE: &str = "https://mam.example/asset/{play_id}";
pub const DEFAULT_MAX_LINKS: usize = 50;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MediaLink {
    pub play_id: String,
    pub url: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MediaLinks {
    pub links: Vec<MediaLink>,
    pub truncated: bool,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MediaConfig {
    pub template: String,
    pub max_links: usize,
}

impl Default for MediaConfig {
    fn default() -> Self {
        Self {
            template: DEFAULT_TEMPLATE.into(),
            max_links: DEFAULT_MAX_LINKS,
        }
    }
}

impl MediaConfig {
    /// Substitutes each id for `{play_id}`; a template without the
    /// placeholder gets the id appended.
    pub fn url(&self, play_id: &str) -> String {
        if self.template.contains("{play_id}") {
            self.template.replace("{play_id}", play_id)
        } else {
            format!("{}{play_id}", self.template)
        }
    }

    /// One link per distinct id, in order, capped at `max_links`.
    pub fn links(&self, play_ids: &[String]) -> MediaLinks {
        let mut seen = std::collections::HashSet::new();
        let unique: Vec<&String> = play_ids.iter().filter(|id| seen.insert(id.as_str())).collect();
        let links = unique
            .iter()
            .take(self.max_links)
            .map(|id| MediaLink {
                play_id: id.to_string(),
                url: self.url(id),
            })
            .collect();
        MediaLinks {
            links,
            truncated: unique.len() > self.max_links,
            total: unique.len(),
        }
    }
}

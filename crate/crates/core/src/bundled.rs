//! Schemas, directory and lexicon shipped with the workspace, compiled in
//! so tests and the CLI work without any files on disk.

use std::sync::Arc;

use crate::directory::Directory;
use crate::lm::{GrammarBackend, Lexicon};
use crate::schema::{parse_schema, SchemaRegistry};

pub const SCHEMAS: [(&str, &str); 5] = [
    ("defense.schema.json", include_str!("../../../schemas/defense.schema.json")),
    ("passing.schema.json", include_str!("../../../schemas/passing.schema.json")),
    ("rushing.schema.json", include_str!("../../../schemas/rushing.schema.json")),
    ("team_defense.schema.json", include_str!("../../../schemas/team_defense.schema.json")),
    ("team_offense.schema.json", include_str!("../../../schemas/team_offense.schema.json")),
];
pub const DIRECTORY: &str = include_str!("../../../data/directory.json");
pub const LEXICON: &str = include_str!("../../../data/lexicon.json");

pub fn registry() -> SchemaRegistry {
    let schemas = SCHEMAS
        .iter()
        .map(|(file, text)| parse_schema(file, text).expect("bundled schema is valid"))
        .collect();
    SchemaRegistry::new(schemas).expect("bundled schemas are distinct")
}

pub fn directory() -> Directory {
    Directory::from_json(DIRECTORY).expect("bundled directory is valid")
}

pub fn lexicon() -> Lexicon {
    Lexicon::from_json(LEXICON).expect("bundled lexicon is valid")
}

pub fn grammar_backend() -> GrammarBackend {
    GrammarBackend::new(Arc::new(registry()), Arc::new(directory()), Arc::new(lexicon()))
        .expect("bundled lexicon matches bundled schemas")
}

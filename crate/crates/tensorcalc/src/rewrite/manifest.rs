//! Rule manifest shipped with the crate.

use serde::Deserialize;

#[derive(Clone, Debug, Deserialize)]
pub struct ManifestRule {
    pub name: String,
    pub pattern: String,
    pub template: String,
    #[serde(default)]
    pub args: Vec<usize>,
    pub exact: bool,
}

#[derive(Deserialize)]
struct File {
    rule: Vec<ManifestRule>,
}

const SOURCE: &str = include_str!("../../rules/ruleset.toml");

pub fn manifest() -> Vec<ManifestRule> {
    toml::from_str::<File>(SOURCE).expect("bundled rule manifest parses").rule
}

use super::load_with;
use crate::error::IoError;
use crate::model::Case;

macro_rules! bundle {
    ($name:literal: $($file:literal),* $(,)?) => {
        ($name, &[$(($file, include_str!(concat!("../../data/", $name, "/", $file)))),*])
    };
}

type Files = &'static [(&'static str, &'static str)];

/// Cases compiled into the library. `northeast` is the six-zone system and
/// is too large for the reference solver; the others are small test cases.
static BUNDLED: &[(&str, Files)] = &[
    bundle!("northeast": "case.toml", "network.toml", "electricity_price.csv"),
    bundle!("northeast-mini": "case.toml", "network.toml", "catalog.toml", "electricity_price.csv"),
    bundle!("shared-fleet": "case.toml", "network.toml", "catalog.toml", "electricity_price.csv"),
    bundle!("carbon-switch": "case.toml", "network.toml", "catalog.toml", "electricity_price.csv"),
    bundle!("smr-toy": "case.toml", "network.toml", "catalog.toml"),
    bundle!("pipeline-pair": "case.toml", "network.toml", "catalog.toml", "electricity_price.csv"),
];

pub fn bundled_names() -> Vec<&'static str> {
    BUNDLED.iter().map(|b| b.0).collect()
}

pub fn load_bundled(name: &str) -> Result<Case, IoError> {
    let (_, files) = BUNDLED.iter().find(|b| b.0 == name).ok_or_else(|| IoError::UnknownCase(name.into()))?;
    let read = |file: &str| {
        files
            .iter()
            .find(|f| f.0 == file)
            .map(|f| f.1.to_string())
            .ok_or_else(|| IoError::io(format!("{name}/{file}"), std::io::ErrorKind::NotFound.into()))
    };
    load_with(&read)
}

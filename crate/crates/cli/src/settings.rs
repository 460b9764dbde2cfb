use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use stackdet_core::FilterConfig;

use crate::args::GlobalArgs;

/// Invalid or missing configuration; exits with status 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

pub fn config_error(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

const KNOWN_KEYS: &[&str] = &[
    "log-level",
    "jobs",
    "seed",
    "re",
    "tau",
    "k",
    "corpus",
    "output",
    "detector",
    "order",
    "feature-mode",
    "buckets",
    "lambda",
    "epochs",
    "lr",
    "batch-size",
    "plain",
    "split",
    "model",
    "external",
    "external-arg",
    "input",
    "training-free",
    "eval-split",
    "base",
    "world",
    "dim",
    "delta",
    "n",
    "alpha",
    "alpha-s",
    "alpha-h",
    "rho",
    "sequences",
    "trials",
    "runs",
    "bootstrap",
    "scoring",
    "summary",
    "human",
    "machine",
    "repeats",
    "n-human",
    "n-machine",
    "inject",
];

/// Command-line values layered over an optional TOML file.
#[derive(Debug, Default)]
pub struct Settings {
    table: toml::Table,
    origin: Option<PathBuf>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> anyhow::Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_error(format!("cannot read config file {}: {e}", path.display())))?;
        let table: toml::Table = text
            .parse()
            .map_err(|e| config_error(format!("invalid config file {}: {e}", path.display())))?;
        if let Some(bad) = table.keys().find(|k| !KNOWN_KEYS.contains(&k.as_str())) {
            return Err(config_error(format!("unknown key `{bad}` in {}", path.display())));
        }
        Ok(Settings {
            table,
            origin: Some(path.to_path_buf()),
        })
    }

    /// The flag value if given, otherwise the config value.
    pub fn get<T: DeserializeOwned>(&self, cli: Option<T>, key: &str) -> anyhow::Result<Option<T>> {
        if cli.is_some() {
            return Ok(cli);
        }
        match self.table.get(key) {
            None => Ok(None),
            Some(v) => v.clone().try_into().map(Some).map_err(|e| {
                let origin = self.origin.as_deref().map(Path::display);
                config_error(format!(
                    "config key `{key}` in {}: {e}",
                    origin.expect("loaded from a file")
                ))
            }),
        }
    }

    pub fn or<T: DeserializeOwned>(&self, cli: Option<T>, key: &str, default: T) -> anyhow::Result<T> {
        Ok(self.get(cli, key)?.unwrap_or(default))
    }

    pub fn require<T: DeserializeOwned>(&self, cli: Option<T>, key: &str) -> anyhow::Result<T> {
        self.get(cli, key)?
            .ok_or_else(|| config_error(format!("missing required --{key} (flag or config key `{key}`)")))
    }

    /// A boolean flag that is on if set on the command line or in the file.
    pub fn flag(&self, cli: bool, key: &str) -> anyhow::Result<bool> {
        Ok(cli || self.get::<bool>(None, key)?.unwrap_or(false))
    }

    pub fn filter(&self, g: &GlobalArgs) -> anyhow::Result<FilterConfig> {
        let d = FilterConfig::default();
        let cfg = FilterConfig {
            r_e: self.or(g.r_e, "re", d.r_e)?,
            tau: self.or(g.tau, "tau", d.tau)?,
            k: self.or(g.k, "k", d.k)?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn seed(&self, g: &GlobalArgs) -> anyhow::Result<u64> {
        self.or(g.seed, "seed", 0)
    }
}

/// Opens `path` for writing, with `-` meaning stdout.
pub fn open_output(path: &Path) -> anyhow::Result<Box<dyn Write>> {
    if path == Path::new("-") {
        return Ok(Box::new(BufWriter::new(io::stdout().lock())));
    }
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    Ok(Box::new(BufWriter::new(File::create(path)?)))
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> anyhow::Result<()> {
    let mut out = open_output(path)?;
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

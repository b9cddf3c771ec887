use std::fmt::Display;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use reb_core::kv::KeyValues;

/// Why a command stopped, mapped to the exit code.
#[derive(Debug)]
pub enum Failure {
    Clap(String),
    Usage(String),
    Data(anyhow::Error),
}

impl Failure {
    pub fn code(&self) -> u8 {
        match self {
            Failure::Clap(_) | Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
        }
    }

    pub fn message(&self) -> String {
        match self {
            Failure::Clap(m) => m.clone(),
            Failure::Usage(m) => format!("error: {m}\n\nFor more information, try '--help'.\n"),
            Failure::Data(e) => format!("error: {e:#}\n"),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Data(e)
    }
}

impl From<reb_core::Error> for Failure {
    fn from(e: reb_core::Error) -> Self {
        Failure::Data(e.into())
    }
}

pub fn usage(msg: impl Display) -> Failure {
    Failure::Usage(msg.to_string())
}

/// Flag values with the config file as fallback.
pub struct Settings {
    kv: KeyValues,
    seed: Option<u64>,
}

impl Settings {
    pub fn load(config: Option<&Path>, seed: Option<u64>) -> Result<Self, Failure> {
        let kv = match config {
            None => KeyValues::default(),
            Some(p) => {
                if !p.exists() {
                    return Err(usage(format!("--config: {} does not exist", p.display())));
                }
                KeyValues::read_file(p).map_err(|e| usage(format!("--config: {e}")))?
            }
        };
        Ok(Self { kv, seed })
    }

    pub fn key_values(&self) -> &KeyValues {
        &self.kv
    }

    pub fn seed(&self) -> Result<Option<u64>, Failure> {
        self.get(self.seed, "seed")
    }

    /// `flag` if given, else the config entry for `name`.
    pub fn get<T: FromStr>(&self, flag: Option<T>, name: &str) -> Result<Option<T>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.kv
            .get(&key(name))
            .map_err(|e| usage(format!("--{name}: {e}")))
    }

    pub fn list<T: FromStr>(&self, flag: Option<Vec<T>>, name: &str) -> Result<Option<Vec<T>>, Failure> {
        if flag.is_some() {
            return Ok(flag);
        }
        self.kv
            .get_list(&key(name))
            .map_err(|e| usage(format!("--{name}: {e}")))
    }

    pub fn or<T: FromStr>(&self, flag: Option<T>, name: &str, default: T) -> Result<T, Failure> {
        Ok(self.get(flag, name)?.unwrap_or(default))
    }

    pub fn required<T: FromStr>(&self, flag: Option<T>, name: &str) -> Result<T, Failure> {
        self.get(flag, name)?
            .ok_or_else(|| usage(format!("missing required flag --{name}")))
    }

    /// A required path that must already exist.
    pub fn input(&self, flag: Option<PathBuf>, name: &str) -> Result<PathBuf, Failure> {
        let p = self.required(flag, name)?;
        check_exists(p, name)
    }

    pub fn optional_input(&self, flag: Option<PathBuf>, name: &str) -> Result<Option<PathBuf>, Failure> {
        self.get(flag, name)?.map(|p| check_exists(p, name)).transpose()
    }
}

fn check_exists(p: PathBuf, name: &str) -> Result<PathBuf, Failure> {
    if p.exists() {
        Ok(p)
    } else {
        Err(usage(format!("--{name}: {} does not exist", p.display())))
    }
}

fn key(flag: &str) -> String {
    flag.replace('-', "_")
}

/// `N` or `HxW`.
pub fn parse_size(s: &str) -> Result<(usize, usize), Failure> {
    let bad = || usage(format!("--map-size: expected N or HxW, got {s:?}"));
    let parse = |v: &str| v.trim().parse::<usize>().ok().filter(|&n| n > 0);
    match s.split_once(['x', 'X']) {
        Some((h, w)) => Ok((parse(h).ok_or_else(bad)?, parse(w).ok_or_else(bad)?)),
        None => parse(s).map(|n| (n, n)).ok_or_else(bad),
    }
}

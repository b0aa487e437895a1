//! Command-line flags named after configuration keys, layered over an
//! optional key=value file.

use std::marker::PhantomData;
use std::path::PathBuf;

use chartcn::config::{KeyValues, DATASET_KEYS, KNOWN_KEYS};
use clap::{Arg, ArgMatches, Args, Command, FromArgMatches};

pub trait KeySet {
    fn keys() -> Vec<&'static str>;
}

/// Every configuration key.
#[derive(Debug, Clone)]
pub struct AllKeys;

impl KeySet for AllKeys {
    fn keys() -> Vec<&'static str> {
        KNOWN_KEYS.iter().flat_map(|g| g.iter().copied()).collect()
    }
}

/// Only the dataset-description keys.
#[derive(Debug, Clone)]
pub struct DatasetKeys;

impl KeySet for DatasetKeys {
    fn keys() -> Vec<&'static str> {
        DATASET_KEYS.to_vec()
    }
}

#[derive(Debug, Clone)]
pub struct Overrides<K> {
    pub config: Option<PathBuf>,
    pub values: Vec<(&'static str, String)>,
    keys: PhantomData<K>,
}

impl<K: KeySet> Overrides<K> {
    /// The config file (if any) with flag values applied on top.
    pub fn resolve(&self) -> chartcn::Result<KeyValues> {
        let mut kv = match &self.config {
            Some(path) => KeyValues::load(path)?,
            None => KeyValues::new(),
        };
        for (key, value) in &self.values {
            kv.set(key, value.clone())?;
        }
        Ok(kv)
    }
}

impl<K: KeySet> FromArgMatches for Overrides<K> {
    fn from_arg_matches(m: &ArgMatches) -> Result<Self, clap::Error> {
        let mut values = Vec::new();
        for key in K::keys() {
            if let Some(v) = m.get_one::<String>(key) {
                values.push((key, v.clone()));
            }
        }
        Ok(Overrides {
            config: m.get_one::<PathBuf>("config").cloned(),
            values,
            keys: PhantomData,
        })
    }

    fn update_from_arg_matches(&mut self, m: &ArgMatches) -> Result<(), clap::Error> {
        *self = Self::from_arg_matches(m)?;
        Ok(())
    }
}

impl<K: KeySet> Args for Overrides<K> {
    fn augment_args(cmd: Command) -> Command {
        let mut cmd = cmd.arg(
            Arg::new("config")
                .long("config")
                .value_name("FILE")
                .value_parser(clap::value_parser!(PathBuf))
                .help("key = value configuration file"),
        );
        for key in K::keys() {
            cmd = cmd.arg(
                Arg::new(key)
                    .long(key)
                    .value_name("VALUE")
                    .help_heading("Configuration overrides"),
            );
        }
        cmd
    }

    fn augment_args_for_update(cmd: Command) -> Command {
        Self::augment_args(cmd)
    }
}

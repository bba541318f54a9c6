//! Flat `key = value` configuration files.
//!
//! One assignment per line; blank lines and `#` comments are ignored. List
//! values are comma separated, ranges are written `lo,hi`.

use crate::error::{Error, Result};
use crate::evaluation::{ExperimentConfig, ScoreSpec};
use crate::model::MpnType;
use crate::synthesis::SynthesisConfig;

/// Parses the assignments of a config file, in file order.
pub fn parse(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: i as u64 + 1,
                column: 1,
                message: format!("expected `key = value`, found `{line}`"),
            });
        };
        out.push((key.trim().to_ascii_lowercase().replace('-', "_"), value.trim().to_string()));
    }
    Ok(out)
}

/// Parses a `key=value` command-line override.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    parse(s)?
        .pop()
        .ok_or_else(|| Error::config("set", format!("expected key=value, found `{s}`")))
}

fn number<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::config(field, format!("cannot parse `{v}`")))
}

fn list<T: std::str::FromStr>(field: &'static str, v: &str) -> Result<Vec<T>> {
    v.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| number(field, s))
        .collect()
}

fn range(field: &'static str, v: &str) -> Result<(f64, f64)> {
    match list::<f64>(field, v)?.as_slice() {
        &[lo, hi] => Ok((lo, hi)),
        _ => Err(Error::config(field, format!("expected `lo,hi`, found `{v}`"))),
    }
}

fn flag(field: &'static str, v: &str) -> Result<bool> {
    match v.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::config(field, format!("expected a boolean, found `{v}`"))),
    }
}

fn mpn(field: &'static str, v: &str) -> Result<MpnType> {
    v.parse()
        .map_err(|_| Error::config(field, format!("unknown MPN type `{v}`")))
}

fn unknown(key: &str) -> Error {
    Error::config("config", format!("unknown key `{key}`"))
}

pub fn apply_synthesis(config: &mut SynthesisConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "n" => config.n = number("n", value)?,
        "max_parents" => config.max_parents = number("max_parents", value)?,
        "mpn_type" => config.mpn_type = mpn("mpn_type", value)?,
        "epsilon" => config.epsilon = number("epsilon", value)?,
        "theta_pos_range" => config.theta_pos_range = range("theta_pos_range", value)?,
        "theta_neg_range" => config.theta_neg_range = range("theta_neg_range", value)?,
        "root_marginal_range" => config.root_marginal_range = range("root_marginal_range", value)?,
        "forbid_transitive_edges" => {
            config.forbid_transitive_edges = flag("forbid_transitive_edges", value)?
        }
        "require_faithful" => config.require_faithful = flag("require_faithful", value)?,
        "seed" => config.seed = number("seed", value)?,
        _ => return Err(unknown(key)),
    }
    Ok(())
}

pub fn apply_experiment(config: &mut ExperimentConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "mpn_types" => {
            config.mpn_types = value
                .split(',')
                .map(|s| mpn("mpn_types", s))
                .collect::<Result<_>>()?
        }
        "epsilons" => config.epsilons = list("epsilons", value)?,
        "sample_sizes" => config.sample_sizes = list("sample_sizes", value)?,
        "topologies" => config.topologies = number("topologies", value)?,
        "resamples_per_topology" => {
            config.resamples_per_topology = number("resamples_per_topology", value)?
        }
        "n" => config.n = number("n", value)?,
        "k" | "max_parents" => config.k = number("k", value)?,
        "scores" => {
            config.scores = value
                .split(',')
                .map(str::parse::<ScoreSpec>)
                .collect::<Result<_>>()?
        }
        "random_epsilon_draws" => config.random_epsilon_draws = number("random_epsilon_draws", value)?,
        "random_epsilon_range" => config.random_epsilon_range = range("random_epsilon_range", value)?,
        "pseudocount" => config.pseudocount = number("pseudocount", value)?,
        "alpha_threshold" => config.alpha_threshold = number("alpha_threshold", value)?,
        "forbid_transitive_edges" => {
            config.forbid_transitive_edges = flag("forbid_transitive_edges", value)?
        }
        "require_faithful" => config.require_faithful = flag("require_faithful", value)?,
        "theta_pos_range" => config.theta_pos_range = Some(range("theta_pos_range", value)?),
        "theta_neg_range" => config.theta_neg_range = Some(range("theta_neg_range", value)?),
        "root_marginal_range" => {
            config.root_marginal_range = Some(range("root_marginal_range", value)?)
        }
        "seed" => config.seed = number("seed", value)?,
        _ => return Err(unknown(key)),
    }
    Ok(())
}

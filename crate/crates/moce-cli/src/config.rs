//! Flat `key = value` study configuration files.
//!
//! Each line holds one `key = value` pair; `#` starts a comment and blank
//! lines are skipped. The `group` key repeats, once per group test, as
//! `group = size,overlap`. Every other key appears at most once. Unknown
//! keys are rejected by name.

use moce::expand::DEFAULT_SIZING_CONSTANT;

use crate::error::{CliError, Result};
use crate::sim::{ErrorLaw, GroupSpec, SimConfig};

fn parse_value<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T> {
    value.parse().map_err(|_| {
        CliError::Input(format!("line {line}: cannot parse {value:?} as a value for `{key}`"))
    })
}

fn parse_bool(key: &str, value: &str, line: usize) -> Result<bool> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(CliError::Input(format!(
            "line {line}: `{key}` must be true or false, got {value:?}"
        ))),
    }
}

fn parse_group(value: &str, line: usize) -> Result<GroupSpec> {
    let Some((size, overlap)) = value.split_once(',') else {
        return Err(CliError::Input(format!(
            "line {line}: `group` takes `size,overlap`, got {value:?}"
        )));
    };
    Ok(GroupSpec {
        size: parse_value("group", size.trim(), line)?,
        overlap: parse_value("group", overlap.trim(), line)?,
    })
}

/// Parse and validate a study configuration.
pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let mut n = None;
    let mut p = None;
    let mut a = None;
    let mut alpha = None;
    let mut replicates = None;
    let mut seed = None;
    let mut sizing_constant = None;
    let mut error_law = None;
    let mut true_sigma = None;
    let mut oracle = None;
    let mut groups = Vec::new();

    fn set<T>(slot: &mut Option<T>, value: T, key: &str, line: usize) -> Result<()> {
        if slot.is_some() {
            return Err(CliError::Input(format!("line {line}: duplicate key `{key}`")));
        }
        *slot = Some(value);
        Ok(())
    }

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(CliError::Input(format!("line {line}: expected `key = value`")));
        };
        let (key, value) = (key.trim(), value.trim());
        match key {
            "n" => set(&mut n, parse_value(key, value, line)?, key, line)?,
            "p" => set(&mut p, parse_value(key, value, line)?, key, line)?,
            "a" => set(&mut a, parse_value(key, value, line)?, key, line)?,
            "alpha" => set(&mut alpha, parse_value(key, value, line)?, key, line)?,
            "replicates" => set(&mut replicates, parse_value(key, value, line)?, key, line)?,
            "seed" => set(&mut seed, parse_value(key, value, line)?, key, line)?,
            "sizing_constant" => {
                set(&mut sizing_constant, parse_value(key, value, line)?, key, line)?
            }
            "error_law" => {
                let law = match value {
                    "gaussian" => ErrorLaw::Gaussian,
                    "t5" => ErrorLaw::T5,
                    _ => {
                        return Err(CliError::Input(format!(
                            "line {line}: `error_law` must be gaussian or t5, got {value:?}"
                        )))
                    }
                };
                set(&mut error_law, law, key, line)?
            }
            "true_sigma" => set(&mut true_sigma, parse_bool(key, value, line)?, key, line)?,
            "oracle" => set(&mut oracle, parse_bool(key, value, line)?, key, line)?,
            "group" => groups.push(parse_group(value, line)?),
            _ => return Err(CliError::Input(format!("line {line}: unknown config key `{key}`"))),
        }
    }

    let require = |slot: Option<usize>, key: &str| {
        slot.ok_or_else(|| CliError::Input(format!("missing required config key `{key}`")))
    };
    let cfg = SimConfig {
        n: require(n, "n")?,
        p: require(p, "p")?,
        a: require(a, "a")?,
        alpha: alpha.unwrap_or(0.0),
        replicates: require(replicates, "replicates")?,
        seed: seed.ok_or_else(|| CliError::Input("missing required config key `seed`".into()))?,
        sizing_constant: sizing_constant.unwrap_or(DEFAULT_SIZING_CONSTANT),
        error_law: error_law.unwrap_or(ErrorLaw::Gaussian),
        true_sigma: true_sigma.unwrap_or(false),
        oracle: oracle.unwrap_or(true),
        groups,
    };
    cfg.validate()?;
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_a_full_configuration() {
        let text = "\
# study layout
n = 200
p = 200
a = 3            # planted support
alpha = 0.3
replicates = 50
seed = 7
sizing_constant = 6
error_law = t5
true_sigma = true
oracle = false
group = 5,0
group = 5,2
";
        let cfg = parse_sim_config(text).unwrap();
        assert_eq!((cfg.n, cfg.p, cfg.a, cfg.replicates, cfg.seed), (200, 200, 3, 50, 7));
        assert_eq!(cfg.alpha, 0.3);
        assert_eq!(cfg.sizing_constant, 6.0);
        assert_eq!(cfg.error_law, ErrorLaw::T5);
        assert!(cfg.true_sigma);
        assert!(!cfg.oracle);
        assert_eq!(cfg.groups, vec![GroupSpec { size: 5, overlap: 0 }, GroupSpec {
            size: 5,
            overlap: 2
        }]);
    }

    #[test]
    fn rejects_unknown_keys_by_name() {
        let err = parse_sim_config("n = 20\np = 30\na = 2\nreplicates = 1\nseed = 1\nfoo = 3\n")
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("unknown config key `foo`"), "{msg}");
        assert!(msg.contains("line 6"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn rejects_duplicates_and_missing_keys() {
        let err = parse_sim_config("n = 20\nn = 30\n").unwrap_err();
        assert!(err.to_string().contains("duplicate key `n`"));
        let err = parse_sim_config("n = 20\np = 30\na = 2\nseed = 1\n").unwrap_err();
        assert!(err.to_string().contains("missing required config key `replicates`"));
    }

    #[test]
    fn defaults_fill_optional_keys() {
        let cfg = parse_sim_config("n = 20\np = 30\na = 2\nreplicates = 1\nseed = 1\n").unwrap();
        assert_eq!(cfg.alpha, 0.0);
        assert_eq!(cfg.sizing_constant, DEFAULT_SIZING_CONSTANT);
        assert_eq!(cfg.error_law, ErrorLaw::Gaussian);
        assert!(!cfg.true_sigma);
        assert!(cfg.oracle);
        assert!(cfg.groups.is_empty());
    }
}

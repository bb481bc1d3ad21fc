use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::CliError;

/// `key = value` lines; `#` starts a comment. Keys are long option names,
/// with `-` and `_` treated alike.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    entries: BTreeMap<String, (usize, String)>,
}

fn normalize(key: &str) -> String {
    key.trim().replace('_', "-")
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Config { line: i + 1, message: format!("expected key = value, got {line:?}") });
            };
            let key = normalize(k);
            if key.is_empty() {
                return Err(CliError::Config { line: i + 1, message: "empty key".into() });
            }
            entries.insert(key, (i + 1, v.trim().to_string()));
        }
        Ok(Self { entries })
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(_, v)| v.as_str())
    }

    /// Flag value if given, else the config entry, else `None`.
    pub fn pick<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.entries.get(key) {
            None => Ok(None),
            Some((line, v)) => v.parse().map(Some).map_err(|e| CliError::Config {
                line: *line,
                message: format!("{key}: {e}"),
            }),
        }
    }

    pub fn get<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

/// `a,b,c` or `start:end:step` (end inclusive, up to rounding).
pub fn parse_grid(text: &str) -> Result<Vec<f64>, CliError> {
    let bad = |m: String| CliError::Usage(format!("grid {text:?}: {m}"));
    let values = if text.contains(':') {
        let parts: Vec<f64> = text
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<_, _>>()?;
        let [lo, hi, step] = parts[..] else {
            return Err(bad("expected start:end:step".into()));
        };
        if !(step > 0.0) || !(hi >= lo) {
            return Err(bad("need step > 0 and end >= start".into()));
        }
        let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| lo + i as f64 * step).collect()
    } else {
        text.split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| bad(e.to_string())))
            .collect::<Result<Vec<_>, _>>()?
    };
    if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite and nonempty".into()));
    }
    Ok(values)
}

/// `lo..hi` (inclusive) or a single integer.
pub fn parse_range(text: &str) -> Result<Vec<usize>, CliError> {
    let bad = |m: &str| CliError::Usage(format!("range {text:?}: {m}"));
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (a, b.trim_start_matches('=')),
        None => (text, text),
    };
    let lo: usize = lo.trim().parse().map_err(|_| bad("bad lower end"))?;
    let hi: usize = hi.trim().parse().map_err(|_| bad("bad upper end"))?;
    if hi < lo {
        return Err(bad("empty range"));
    }
    Ok((lo..=hi).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let cfg = ConfigFile::parse("# defaults\nseed = 7\nheat_cut=14 # trailing\n").unwrap();
        assert_eq!(cfg.get(None, "seed", 42u64).unwrap(), 7);
        assert_eq!(cfg.get(Some(9u64), "seed", 42).unwrap(), 9);
        assert_eq!(cfg.get(None, "heat-cut", 12.0).unwrap(), 14.0);
        assert_eq!(cfg.get(None, "trials", 5usize).unwrap(), 5);
    }

    #[test]
    fn bad_lines_report_line_numbers() {
        match ConfigFile::parse("seed = 1\n\nnonsense\n") {
            Err(CliError::Config { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        let cfg = ConfigFile::parse("a = 1\nseed = x\n").unwrap();
        match cfg.get(None, "seed", 0u64) {
            Err(CliError::Config { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("1,2,4,8").unwrap(), vec![1.0, 2.0, 4.0, 8.0]);
        assert_eq!(parse_grid("0:40:1").unwrap().len(), 41);
        assert_eq!(parse_grid("0:1:0.1").unwrap().len(), 11);
        assert!(parse_grid("0:1").is_err());
        assert!(parse_grid("3:1:1").is_err());
        assert!(parse_grid("a,b").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("3..20").unwrap().len(), 18);
        assert_eq!(parse_range("3..=5").unwrap(), vec![3, 4, 5]);
        assert_eq!(parse_range("7").unwrap(), vec![7]);
        assert!(parse_range("5..3").is_err());
    }
}

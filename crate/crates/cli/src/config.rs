use std::path::{Path, PathBuf};

use qsslab_core::protocol::{EvalMode, SchemeParams};
use qsslab_core::{Error, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

/// Merged settings from the config file and command-line flags.
///
/// Every field is optional so that flags can override file values one by
/// one; defaults are applied when the settings are resolved.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n: Option<usize>,
    pub k: Option<usize>,
    pub kprime: Option<usize>,
    pub s: Option<usize>,
    pub t: Option<usize>,
    pub strict: Option<bool>,
    pub m_range: Option<String>,
    pub dense_max: Option<usize>,
    pub coalition: Option<String>,
    pub mode: Option<String>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub samples: Option<usize>,
    pub secret: Option<PathBuf>,
    pub script: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    /// Reads a JSON object or `key = value` lines. Keys may use `-` or `_`.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let raw: Map<String, Value> = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Usage(format!("config JSON: {e}")))?
        } else {
            let mut map = Map::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (key, value) = line.split_once('=').ok_or_else(|| {
                    Error::Usage(format!("config line {}: expected key = value", i + 1))
                })?;
                map.insert(key.trim().to_string(), scalar(value.trim()));
            }
            map
        };
        let normalized: Map<String, Value> =
            raw.into_iter().map(|(k, v)| (k.replace('-', "_"), v)).collect();
        serde_json::from_value(Value::Object(normalized))
            .map_err(|e| Error::Usage(format!("config: {e}")))
    }

    /// Fields set in `other` win.
    pub fn overlay(self, other: RunConfig) -> RunConfig {
        RunConfig {
            n: other.n.or(self.n),
            k: other.k.or(self.k),
            kprime: other.kprime.or(self.kprime),
            s: other.s.or(self.s),
            t: other.t.or(self.t),
            strict: other.strict.or(self.strict),
            m_range: other.m_range.or(self.m_range),
            dense_max: other.dense_max.or(self.dense_max),
            coalition: other.coalition.or(self.coalition),
            mode: other.mode.or(self.mode),
            seed: other.seed.or(self.seed),
            tolerance: other.tolerance.or(self.tolerance),
            samples: other.samples.or(self.samples),
            secret: other.secret.or(self.secret),
            script: other.script.or(self.script),
            out: other.out.or(self.out),
        }
    }

    pub fn tolerance_or(&self, default: f64) -> Result<f64> {
        match self.tolerance {
            None => Ok(default),
            Some(t) if t > 0.0 && t.is_finite() => Ok(t),
            Some(t) => Err(Error::Usage(format!("tolerance must be positive, got {t}"))),
        }
    }

    pub fn seed_or_default(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn mode(&self) -> Result<EvalMode> {
        match self.mode.as_deref().unwrap_or("exact") {
            "exact" => Ok(EvalMode::Exact),
            "sampled" => match self.seed {
                Some(seed) => Ok(EvalMode::Sampled { seed }),
                None => Err(Error::Usage("--mode sampled needs --seed".into())),
            },
            other => Err(Error::Usage(format!("unknown mode {other:?}; use exact or sampled"))),
        }
    }

    /// `A..B` or `A..=B`, both inclusive.
    pub fn m_range(&self) -> Result<(usize, usize)> {
        let text = self.m_range.as_deref().unwrap_or("2..64");
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Usage(format!("bad m range {text:?}; expected A..B")))
        };
        let (a, b) = text
            .split_once("..")
            .ok_or_else(|| Error::Usage(format!("bad m range {text:?}; expected A..B")))?;
        let b = b.strip_prefix('=').unwrap_or(b);
        Ok((parse(a)?, parse(b)?))
    }

    /// Strict mode unless `s` is given without `--strict`. In relaxed mode
    /// `t` defaults to three ancilla rows per Toffoli in `toffolis`.
    pub fn params(&self, toffolis: usize) -> Result<SchemeParams> {
        let n = self.n.unwrap_or(2);
        let strict = self.strict.unwrap_or(self.s.is_none() && self.t.is_none());
        if strict {
            if self.s.is_some() || self.t.is_some() {
                return Err(Error::Usage(
                    "strict mode takes --k and --kprime; --s/--t select relaxed mode".into(),
                ));
            }
            let k = self.k.unwrap_or(1);
            return SchemeParams::strict(n, k, self.kprime.unwrap_or(k));
        }
        if self.k.is_some() || self.kprime.is_some() {
            return Err(Error::Usage("--k/--kprime need strict mode".into()));
        }
        let t = self.t.unwrap_or(3 * toffolis);
        if !t.is_multiple_of(3) {
            return Err(Error::Usage(format!("t must be a multiple of 3, got {t}")));
        }
        SchemeParams::relaxed(n, self.s.unwrap_or(1), t / 3)
    }
}

fn scalar(text: &str) -> Value {
    let unquoted = text.trim_matches('"');
    if unquoted.len() != text.len() {
        return Value::String(unquoted.to_string());
    }
    serde_json::from_str::<Value>(text)
        .ok()
        .filter(|v| v.is_number() || v.is_boolean())
        .unwrap_or_else(|| Value::String(text.to_string()))
}

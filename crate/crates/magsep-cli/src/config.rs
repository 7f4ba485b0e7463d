//! Flat key-value run configuration with a lossless text round trip.
//!
//! Format: three sections, one `key = value` per line.
//!
//! ```text
//! [system]
//! entry = case1.a
//!
//! [params]
//! a = 1
//! b = 0.5
//!
//! [run]
//! seed = 12648430
//! points = 100
//! rel_tol = 1e-12
//! abs_tol = 1e-12
//! t_end = 100
//! ```

use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub entry: String,
    pub params: BTreeMap<String, f64>,
    pub seed: u64,
    pub points: usize,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_end: f64,
    pub output: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            entry: String::new(),
            params: BTreeMap::new(),
            seed: magsep::sample::DEFAULT_SEED,
            points: 100,
            rel_tol: 1.0e-12,
            abs_tol: 1.0e-12,
            t_end: 100.0,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("[system]\n");
        out.push_str(&format!("entry = {}\n", self.entry));
        out.push_str("\n[params]\n");
        for (k, v) in &self.params {
            // f64 Display prints the shortest representation that parses
            // back to the same bits, so the round trip is lossless
            out.push_str(&format!("{k} = {v}\n"));
        }
        out.push_str("\n[run]\n");
        out.push_str(&format!("seed = {}\n", self.seed));
        out.push_str(&format!("points = {}\n", self.points));
        out.push_str(&format!("rel_tol = {}\n", self.rel_tol));
        out.push_str(&format!("abs_tol = {}\n", self.abs_tol));
        out.push_str(&format!("t_end = {}\n", self.t_end));
        if let Some(o) = &self.output {
            out.push_str(&format!("output = {o}\n"));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self, String> {
        let mut cfg = RunConfig::default();
        let mut section = String::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                match name {
                    "system" | "params" | "run" => section = name.to_string(),
                    other => return Err(format!("line {}: unknown section [{other}]", lineno + 1)),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| format!("line {}: expected key = value", lineno + 1))?;
            match (section.as_str(), key) {
                ("system", "entry") => cfg.entry = value.to_string(),
                ("params", k) => {
                    let v: f64 = value
                        .parse()
                        .map_err(|_| format!("line {}: bad number {value:?}", lineno + 1))?;
                    cfg.params.insert(k.to_string(), v);
                }
                ("run", "seed") => cfg.seed = parse(value, lineno)?,
                ("run", "points") => cfg.points = parse(value, lineno)?,
                ("run", "rel_tol") => cfg.rel_tol = parse(value, lineno)?,
                ("run", "abs_tol") => cfg.abs_tol = parse(value, lineno)?,
                ("run", "t_end") => cfg.t_end = parse(value, lineno)?,
                ("run", "output") => cfg.output = Some(value.to_string()),
                (sec, k) => {
                    return Err(format!("line {}: unknown key {k:?} in [{sec}]", lineno + 1))
                }
            }
        }
        if cfg.entry.is_empty() {
            return Err("missing entry (section [system], key entry)".into());
        }
        Ok(cfg)
    }
}

fn parse<T: std::str::FromStr>(value: &str, lineno: usize) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("line {}: bad value {value:?}", lineno + 1))
}

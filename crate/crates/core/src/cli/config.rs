//! Run configuration files.
//!
//! The format is INI style with three sections:
//!
//! ```text
//! [gasket]
//! levels = 2,3
//! rule = sequence          # constant | sequence | explicit | random
//! sequence = 2,3           # or sequence_file = levels.txt
//! tail = repeat            # or a fixed level
//!
//! [measure]
//! q = uniform              # or one row per level: q.2 = 1/3,1/3,1/3
//! boundary = 1/2,0,0
//!
//! [run]
//! seed = 42
//! ```
//!
//! Constant rules use `level = ν`. Explicit rules use `map_file` (lines
//! `word<TAB>level`) plus `fallback = ν` for unlisted words. Random rules use
//! `rho = 2:1/2,3:1/2` and `label_seed`. Relative file paths are resolved
//! against the directory of the configuration file.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{GasketError, Result};
use crate::measures::{fraction_text, BoundaryVector};
use crate::numerics::{parse_rational, ExactRational};
use crate::rsg::{LevelDistribution, RandomLabels};
use crate::words::{
    parse_explicit_map, parse_level_sequence, LabelKind, LabelRule, LevelSequence, LevelSet,
    SequenceTail, WeightSystem, Word, DEFAULT_MAX_LEVEL,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SequenceSource {
    Inline(Vec<u32>),
    File { path: String, terms: Vec<u32> },
}

impl SequenceSource {
    pub fn terms(&self) -> &[u32] {
        match self {
            SequenceSource::Inline(t) => t,
            SequenceSource::File { terms, .. } => terms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RuleSpec {
    Constant(u32),
    Sequence {
        source: SequenceSource,
        tail: SequenceTail,
    },
    Explicit {
        map_file: String,
        table: BTreeMap<Word, u32>,
        fallback: u32,
    },
    Random {
        rho: Vec<(u32, ExactRational)>,
        label_seed: u64,
    },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum WeightSpec {
    Uniform,
    Rows(BTreeMap<u32, Vec<ExactRational>>),
}

/// Defaults for subcommand parameters; command-line flags take precedence.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunSection {
    pub values: BTreeMap<String, u64>,
}

const RUN_KEYS: &[&str] = &[
    "seed",
    "depth",
    "max_depth",
    "paths",
    "blocks",
    "block_len",
    "trials",
    "l0",
    "l1",
    "k",
    "horizon",
];

impl RunSection {
    pub fn get(&self, key: &str) -> Option<u64> {
        self.values.get(key).copied()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub levels: Vec<u32>,
    pub max_level: u32,
    pub rule: RuleSpec,
    pub q: WeightSpec,
    pub boundary: Option<BoundaryVector>,
    pub run: RunSection,
}

fn parse_err(line: usize, message: impl Into<String>) -> GasketError {
    GasketError::Parse {
        line,
        message: message.into(),
    }
}

fn parse_list<T>(line: usize, text: &str, item: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| item(s.trim()).map_err(|e| parse_err(line, e.to_string())))
        .collect()
}

fn parse_u32(s: &str) -> Result<u32> {
    s.parse()
        .map_err(|_| GasketError::validation(format!("expected a nonnegative integer, got {s:?}")))
}

fn parse_u64(s: &str) -> Result<u64> {
    s.parse()
        .map_err(|_| GasketError::validation(format!("expected a nonnegative integer, got {s:?}")))
}

fn read_file(base: &Path, path: &str) -> Result<String> {
    let full = base.join(path);
    fs::read_to_string(&full).map_err(|source| GasketError::Io { path: full, source })
}

/// Parses a boundary triple `a,b,c`.
pub fn parse_boundary(text: &str) -> Result<BoundaryVector> {
    let vals: Vec<ExactRational> = text
        .split(',')
        .map(|s| parse_rational(s.trim()))
        .collect::<Result<_>>()?;
    let [a, b, c]: [ExactRational; 3] = vals
        .try_into()
        .map_err(|_| GasketError::validation(format!("boundary {text:?} needs three values")))?;
    Ok(BoundaryVector::new([a, b, c]))
}

struct Entry {
    line: usize,
    value: String,
}

type Sections = BTreeMap<String, BTreeMap<String, Entry>>;

fn split_sections(text: &str) -> Result<Sections> {
    let mut sections: Sections = BTreeMap::new();
    let mut current: Option<String> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.split(['#', ';']).next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
            let name = name.trim().to_string();
            if !["gasket", "measure", "run"].contains(&name.as_str()) {
                return Err(parse_err(line_no, format!("unknown section [{name}]")));
            }
            sections.entry(name.clone()).or_default();
            current = Some(name);
            continue;
        }
        let section = current
            .as_ref()
            .ok_or_else(|| parse_err(line_no, "key outside of any section"))?;
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| parse_err(line_no, "expected key = value"))?;
        let key = key.trim().to_string();
        let map = sections.get_mut(section).expect("section exists");
        if map.contains_key(&key) {
            return Err(parse_err(
                line_no,
                format!("duplicate key {key:?} in [{section}]"),
            ));
        }
        map.insert(
            key,
            Entry {
                line: line_no,
                value: value.trim().to_string(),
            },
        );
    }
    Ok(sections)
}

/// Parses and validates a configuration. `base` resolves relative paths.
pub fn parse_config(text: &str, base: &Path) -> Result<RunConfig> {
    let mut sections = split_sections(text)?;
    let mut gasket = sections
        .remove("gasket")
        .ok_or_else(|| parse_err(0, "missing [gasket] section"))?;
    let mut measure = sections.remove("measure").unwrap_or_default();
    let run_map = sections.remove("run").unwrap_or_default();

    let mut take = |key: &str| gasket.remove(key);
    let levels_entry = take("levels").ok_or_else(|| parse_err(0, "[gasket] needs levels"))?;
    let levels = parse_list(levels_entry.line, &levels_entry.value, parse_u32)?;
    let max_level = match take("max_level") {
        Some(e) => parse_u32(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?,
        None => DEFAULT_MAX_LEVEL,
    };
    let rule_entry = take("rule").ok_or_else(|| parse_err(0, "[gasket] needs rule"))?;
    let need = |e: Option<Entry>, key: &str| {
        e.ok_or_else(|| {
            parse_err(
                rule_entry.line,
                format!("rule {} needs {key}", rule_entry.value),
            )
        })
    };
    let rule = match rule_entry.value.as_str() {
        "constant" => {
            let e = need(take("level"), "level")?;
            RuleSpec::Constant(
                parse_u32(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?,
            )
        }
        "sequence" => {
            let source = match (take("sequence"), take("sequence_file")) {
                (Some(e), None) => SequenceSource::Inline(parse_list(e.line, &e.value, parse_u32)?),
                (None, Some(e)) => {
                    let text = read_file(base, &e.value)?;
                    SequenceSource::File {
                        terms: parse_level_sequence(&text)?,
                        path: e.value,
                    }
                }
                (Some(e), Some(_)) => {
                    return Err(parse_err(
                        e.line,
                        "give either sequence or sequence_file, not both",
                    ))
                }
                (None, None) => {
                    return Err(parse_err(
                        rule_entry.line,
                        "rule sequence needs sequence or sequence_file",
                    ))
                }
            };
            let tail = match take("tail") {
                None => SequenceTail::Repeat,
                Some(e) if e.value == "repeat" => SequenceTail::Repeat,
                Some(e) => SequenceTail::Constant(
                    parse_u32(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?,
                ),
            };
            RuleSpec::Sequence { source, tail }
        }
        "explicit" => {
            let file = need(take("map_file"), "map_file")?;
            let fb = need(take("fallback"), "fallback")?;
            let table = parse_explicit_map(&read_file(base, &file.value)?)?;
            RuleSpec::Explicit {
                map_file: file.value,
                table,
                fallback: parse_u32(&fb.value)
                    .map_err(|err| parse_err(fb.line, err.to_string()))?,
            }
        }
        "random" => {
            let e = need(take("rho"), "rho")?;
            let rho = parse_list(e.line, &e.value, |item| {
                let (nu, p) = item.split_once(':').ok_or_else(|| {
                    GasketError::validation(format!("expected level:prob, got {item:?}"))
                })?;
                Ok((parse_u32(nu.trim())?, parse_rational(p.trim())?))
            })?;
            let label_seed = match take("label_seed") {
                Some(e) => parse_u64(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?,
                None => 0,
            };
            RuleSpec::Random { rho, label_seed }
        }
        other => {
            return Err(parse_err(
                rule_entry.line,
                format!("unknown rule {other:?} (expected constant, sequence, explicit or random)"),
            ))
        }
    };
    if let Some((key, e)) = gasket.into_iter().next() {
        return Err(parse_err(
            e.line,
            format!("unexpected key {key:?} for this rule"),
        ));
    }

    let q = match measure.remove("q") {
        Some(e) if e.value == "uniform" => WeightSpec::Uniform,
        Some(e) => {
            return Err(parse_err(
                e.line,
                "q must be uniform; give explicit rows as q.<level>",
            ))
        }
        None => {
            let mut rows = BTreeMap::new();
            let keys: Vec<String> = measure
                .keys()
                .filter(|k| k.starts_with("q."))
                .cloned()
                .collect();
            for key in keys {
                let e = measure.remove(&key).expect("listed key");
                let nu = parse_u32(&key[2..]).map_err(|err| parse_err(e.line, err.to_string()))?;
                rows.insert(nu, parse_list(e.line, &e.value, parse_rational)?);
            }
            if rows.is_empty() {
                WeightSpec::Uniform
            } else {
                WeightSpec::Rows(rows)
            }
        }
    };
    let boundary = match measure.remove("boundary") {
        Some(e) => {
            Some(parse_boundary(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?)
        }
        None => None,
    };
    if let Some((key, e)) = measure.into_iter().next() {
        return Err(parse_err(
            e.line,
            format!("unknown key {key:?} in [measure]"),
        ));
    }

    let mut run = RunSection::default();
    for (key, e) in run_map {
        if !RUN_KEYS.contains(&key.as_str()) {
            return Err(parse_err(e.line, format!("unknown key {key:?} in [run]")));
        }
        let v = parse_u64(&e.value).map_err(|err| parse_err(e.line, err.to_string()))?;
        run.values.insert(key, v);
    }

    let config = RunConfig {
        levels,
        max_level,
        rule,
        q,
        boundary,
        run,
    };
    config.label_rule()?;
    config.weights()?;
    Ok(config)
}

/// Reads and parses a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|source| GasketError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = path.parent().map(PathBuf::from).unwrap_or_default();
    parse_config(&text, &base)
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

fn rational_text(x: &ExactRational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        fraction_text(x)
    }
}

impl RunConfig {
    pub fn level_set(&self) -> Result<LevelSet> {
        LevelSet::with_max(self.levels.iter().copied(), self.max_level)
    }

    pub fn label_rule(&self) -> Result<LabelRule> {
        let levels = self.level_set()?;
        match &self.rule {
            RuleSpec::Constant(nu) => LabelRule::new(levels, LabelKind::Constant(*nu)),
            RuleSpec::Sequence { source, tail } => LabelRule::sequence(
                levels,
                LevelSequence {
                    terms: source.terms().to_vec(),
                    tail: tail.clone(),
                },
            ),
            RuleSpec::Explicit {
                table, fallback, ..
            } => {
                let base = LabelRule::new(levels, LabelKind::Constant(*fallback))?;
                LabelRule::explicit(table.clone(), base)
            }
            RuleSpec::Random { rho, label_seed } => {
                let dist = self.level_distribution_from(rho)?;
                LabelRule::random(RandomLabels::new(dist, *label_seed))
            }
        }
    }

    fn level_distribution_from(&self, rho: &[(u32, ExactRational)]) -> Result<LevelDistribution> {
        let dist = LevelDistribution::new(rho.iter().cloned())?;
        if *dist.levels() != self.level_set()? {
            return Err(GasketError::validation(
                "the support of rho must equal levels",
            ));
        }
        Ok(dist)
    }

    /// `ρ` of a random rule.
    pub fn level_distribution(&self) -> Result<LevelDistribution> {
        match &self.rule {
            RuleSpec::Random { rho, .. } => self.level_distribution_from(rho),
            _ => Err(GasketError::validation(
                "this command needs rule = random with rho",
            )),
        }
    }

    pub fn weights(&self) -> Result<WeightSystem> {
        let levels = self.level_set()?;
        let q = match &self.q {
            WeightSpec::Uniform => WeightSystem::uniform(&levels),
            WeightSpec::Rows(rows) => {
                if let Some(nu) = rows.keys().find(|nu| !levels.contains(**nu)) {
                    return Err(GasketError::validation(format!(
                        "weights given for level {nu} outside T"
                    )));
                }
                WeightSystem::from_levels(rows.clone())?
            }
        };
        q.validate(&levels)?;
        Ok(q)
    }

    /// Writes the configuration back in the file format.
    pub fn serialize(&self) -> String {
        let mut s = String::from("[gasket]\n");
        let _ = writeln!(s, "levels = {}", join(&self.levels));
        if self.max_level != DEFAULT_MAX_LEVEL {
            let _ = writeln!(s, "max_level = {}", self.max_level);
        }
        match &self.rule {
            RuleSpec::Constant(nu) => {
                let _ = writeln!(s, "rule = constant\nlevel = {nu}");
            }
            RuleSpec::Sequence { source, tail } => {
                s.push_str("rule = sequence\n");
                match source {
                    SequenceSource::Inline(t) => {
                        let _ = writeln!(s, "sequence = {}", join(t));
                    }
                    SequenceSource::File { path, .. } => {
                        let _ = writeln!(s, "sequence_file = {path}");
                    }
                }
                match tail {
                    SequenceTail::Repeat => s.push_str("tail = repeat\n"),
                    SequenceTail::Constant(nu) => {
                        let _ = writeln!(s, "tail = {nu}");
                    }
                }
            }
            RuleSpec::Explicit {
                map_file, fallback, ..
            } => {
                let _ = writeln!(
                    s,
                    "rule = explicit\nmap_file = {map_file}\nfallback = {fallback}"
                );
            }
            RuleSpec::Random { rho, label_seed } => {
                let parts: Vec<String> = rho
                    .iter()
                    .map(|(nu, p)| format!("{nu}:{}", rational_text(p)))
                    .collect();
                let _ = writeln!(
                    s,
                    "rule = random\nrho = {}\nlabel_seed = {label_seed}",
                    parts.join(",")
                );
            }
        }
        s.push_str("\n[measure]\n");
        match &self.q {
            WeightSpec::Uniform => s.push_str("q = uniform\n"),
            WeightSpec::Rows(rows) => {
                for (nu, row) in rows {
                    let texts: Vec<String> = row.iter().map(rational_text).collect();
                    let _ = writeln!(s, "q.{nu} = {}", texts.join(","));
                }
            }
        }
        if let Some(x) = &self.boundary {
            let texts: Vec<String> = x.values().iter().map(rational_text).collect();
            let _ = writeln!(s, "boundary = {}", texts.join(","));
        }
        if !self.run.values.is_empty() {
            s.push_str("\n[run]\n");
            for (k, v) in &self.run.values {
                let _ = writeln!(s, "{k} = {v}");
            }
        }
        s
    }
}

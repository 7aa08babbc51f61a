use std::collections::HashMap;
use std::fmt::Write as _;
use std::hash::Hash;

use crate::error::{Error, Result};

use super::property::{BigramKey, EdgeProperty};

/// Occurrence counts for one property value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Counts {
    pub created: u64,
    /// Occurrences on an edge belonging to the correct analysis.
    pub correct: u64,
}

impl Counts {
    pub fn merge(&mut self, other: Counts) {
        self.created += other.created;
        self.correct += other.correct;
    }
}

/// Counts per property value for one criterion. Merging adds counts, so
/// tables from disjoint corpus shards combine in any order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CountTable<K: Hash + Eq> {
    entries: HashMap<K, Counts>,
}

impl<K: Hash + Eq> Default for CountTable<K> {
    fn default() -> Self {
        CountTable {
            entries: HashMap::new(),
        }
    }
}

impl<K: Hash + Eq + Clone + Ord> CountTable<K> {
    pub fn get(&self, key: &K) -> Option<Counts> {
        self.entries.get(key).copied()
    }

    pub fn record(&mut self, key: &K, correct: bool) {
        if let Some(c) = self.entries.get_mut(key) {
            c.created += 1;
            c.correct += correct as u64;
        } else {
            self.entries.insert(
                key.clone(),
                Counts {
                    created: 1,
                    correct: correct as u64,
                },
            );
        }
    }

    pub fn add(&mut self, key: K, counts: Counts) {
        self.entries.entry(key).or_default().merge(counts);
    }

    pub fn merge(&mut self, other: &CountTable<K>) {
        for (k, c) in &other.entries {
            self.add(k.clone(), *c);
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in key order.
    pub fn sorted(&self) -> Vec<(&K, Counts)> {
        let mut v: Vec<(&K, Counts)> = self.entries.iter().map(|(k, c)| (k, *c)).collect();
        v.sort_by(|a, b| a.0.cmp(b.0));
        v
    }
}

/// Smoothing and threshold parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PruneParams {
    /// Added to the correct count.
    pub smoothing_a: f64,
    /// Added to the created count.
    pub smoothing_b: f64,
    /// Lower bound on every estimate.
    pub score_floor: f64,
    /// Threshold fraction after the lexical pass.
    pub fraction_phase1: f64,
    /// Threshold fraction after the phrasal pass.
    pub fraction_phase2: f64,
}

impl Default for PruneParams {
    fn default() -> Self {
        PruneParams {
            smoothing_a: 0.5,
            smoothing_b: 1.0,
            score_floor: 1e-6,
            fraction_phase1: 1.0 / 20.0,
            fraction_phase2: 1.0 / 150.0,
        }
    }
}

impl PruneParams {
    pub fn validate(&self) -> Result<()> {
        let p = self;
        if !(p.smoothing_b > 0.0 && p.smoothing_a >= 0.0 && p.smoothing_a <= p.smoothing_b) {
            return Err(Error::Config(format!(
                "smoothing needs 0 <= a <= b and b > 0, got a={} b={}",
                p.smoothing_a, p.smoothing_b
            )));
        }
        if !(p.score_floor > 0.0 && p.score_floor <= 1.0) {
            return Err(Error::Config(format!(
                "score floor {} outside (0, 1]",
                p.score_floor
            )));
        }
        for f in [p.fraction_phase1, p.fraction_phase2] {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("fraction {f} outside (0, 1)")));
            }
        }
        Ok(())
    }
}

/// Trained pruning statistics: one count table per criterion.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct PruneModel {
    pub params: PruneParams,
    pub left: CountTable<BigramKey>,
    pub right: CountTable<BigramKey>,
    pub unigram: CountTable<String>,
    /// Utterances whose observations went into the tables.
    pub utterances: u64,
}

const HEADER: &str = "gspec-prune-model 1";

impl PruneModel {
    pub fn new(params: PruneParams) -> Self {
        PruneModel {
            params,
            ..PruneModel::default()
        }
    }

    pub fn counts(&self, property: &EdgeProperty) -> Option<Counts> {
        match property {
            EdgeProperty::LeftBigram(k) => self.left.get(k),
            EdgeProperty::RightBigram(k) => self.right.get(k),
            EdgeProperty::Unigram(k) => self.unigram.get(k),
        }
    }

    /// Smoothed probability that an edge with `property` is correct.
    pub fn estimate(&self, property: &EdgeProperty) -> f64 {
        self.estimate_counts(self.counts(property))
    }

    pub(crate) fn estimate_counts(&self, counts: Option<Counts>) -> f64 {
        let p = &self.params;
        let c = counts.unwrap_or_default();
        let raw = (c.correct as f64 + p.smoothing_a) / (c.created as f64 + p.smoothing_b);
        raw.max(p.score_floor)
    }

    pub fn merge(&mut self, other: &PruneModel) {
        self.left.merge(&other.left);
        self.right.merge(&other.right);
        self.unigram.merge(&other.unigram);
        self.utterances += other.utterances;
    }

    pub fn to_text(&self) -> String {
        let p = &self.params;
        let mut out = String::new();
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(out, "smoothing_a {}", p.smoothing_a);
        let _ = writeln!(out, "smoothing_b {}", p.smoothing_b);
        let _ = writeln!(out, "score_floor {}", p.score_floor);
        let _ = writeln!(out, "fraction_phase1 {}", p.fraction_phase1);
        let _ = writeln!(out, "fraction_phase2 {}", p.fraction_phase2);
        let _ = writeln!(out, "utterances {}", self.utterances);
        for (name, table) in [("LEFT", &self.left), ("RIGHT", &self.right)] {
            let _ = writeln!(out, "[{name}] {}", table.len());
            for (k, c) in table.sorted() {
                let _ = writeln!(out, "{k} {} {}", c.created, c.correct);
            }
        }
        let _ = writeln!(out, "[UNIGRAM] {}", self.unigram.len());
        for (k, c) in self.unigram.sorted() {
            let _ = writeln!(out, "{k} {} {}", c.created, c.correct);
        }
        out
    }

    pub fn parse(text: &str) -> Result<PruneModel> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, message: String| Error::syntax(line + 1, 1, message);
        match lines.next() {
            Some((_, l)) if l.trim() == HEADER => {}
            Some((i, l)) => return Err(err(i, format!("expected `{HEADER}`, found `{l}`"))),
            None => return Err(err(0, "empty model file".into())),
        }
        let mut model = PruneModel::default();
        let mut section: Option<&str> = None;
        for (i, line) in lines {
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('[') {
                let Some((name, _)) = rest.split_once(']') else {
                    return Err(err(i, format!("bad section header `{line}`")));
                };
                section = Some(match name {
                    "LEFT" => "LEFT",
                    "RIGHT" => "RIGHT",
                    "UNIGRAM" => "UNIGRAM",
                    other => return Err(err(i, format!("unknown section `{other}`"))),
                });
                continue;
            }
            let Some(section) = section else {
                let (name, value) = line
                    .split_once(' ')
                    .ok_or_else(|| err(i, format!("expected `name value`, found `{line}`")))?;
                let value = value.trim();
                if name == "utterances" {
                    model.utterances = value
                        .parse()
                        .map_err(|_| err(i, format!("invalid count `{value}`")))?;
                    continue;
                }
                let v: f64 = value
                    .parse()
                    .map_err(|_| err(i, format!("invalid number `{value}`")))?;
                let p = &mut model.params;
                match name {
                    "smoothing_a" => p.smoothing_a = v,
                    "smoothing_b" => p.smoothing_b = v,
                    "score_floor" => p.score_floor = v,
                    "fraction_phase1" => p.fraction_phase1 = v,
                    "fraction_phase2" => p.fraction_phase2 = v,
                    other => return Err(err(i, format!("unknown parameter `{other}`"))),
                }
                continue;
            };
            // counts are the last two fields; the key is everything before
            let mut parts = line.rsplitn(3, ' ');
            let correct = parts.next();
            let created = parts.next();
            let key = parts.next();
            let (Some(key), Some(created), Some(correct)) = (key, created, correct) else {
                return Err(err(
                    i,
                    format!("expected `key created correct`, found `{line}`"),
                ));
            };
            let counts = Counts {
                created: created
                    .parse()
                    .map_err(|_| err(i, format!("invalid count `{created}`")))?,
                correct: correct
                    .parse()
                    .map_err(|_| err(i, format!("invalid count `{correct}`")))?,
            };
            if counts.correct > counts.created {
                return Err(err(i, "correct count exceeds created count".into()));
            }
            let key = key.trim_end();
            match section {
                "UNIGRAM" => model.unigram.add(key.to_string(), counts),
                s => {
                    let k: BigramKey = key.parse().map_err(|m| err(i, m))?;
                    if s == "LEFT" {
                        model.left.add(k, counts)
                    } else {
                        model.right.add(k, counts)
                    }
                }
            }
        }
        model.params.validate()?;
        Ok(model)
    }
}

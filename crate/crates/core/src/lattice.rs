//! Word lattices: DAGs of word hypotheses between numbered vertices.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WordEdge {
    pub from: usize,
    pub to: usize,
    pub word: String,
    /// Recognizer confidence in (0, 1].
    pub conf: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lattice {
    pub id: String,
    pub n_vertices: usize,
    pub edges: Vec<WordEdge>,
}

impl Lattice {
    /// Builds and validates a lattice.
    pub fn new(id: impl Into<String>, n_vertices: usize, edges: Vec<WordEdge>) -> Result<Self> {
        let lattice = Lattice {
            id: id.into(),
            n_vertices,
            edges,
        };
        lattice.validate()?;
        Ok(lattice)
    }

    /// A linear lattice over whitespace-separated words, all with confidence 1.
    pub fn from_text(id: impl Into<String>, text: &str) -> Result<Self> {
        let words: Vec<&str> = text.split_whitespace().collect();
        if words.is_empty() {
            return Err(Error::EmptyLattice);
        }
        let edges = words
            .iter()
            .enumerate()
            .map(|(i, w)| WordEdge {
                from: i,
                to: i + 1,
                word: w.to_string(),
                conf: 1.0,
            })
            .collect();
        Lattice::new(id, words.len() + 1, edges)
    }

    pub fn source(&self) -> usize {
        0
    }

    pub fn sink(&self) -> usize {
        self.n_vertices - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_vertices < 2 || self.edges.is_empty() {
            return Err(Error::EmptyLattice);
        }
        let bad = |message: String| Error::InvalidLattice {
            id: self.id.clone(),
            message,
        };
        for e in &self.edges {
            if e.from >= e.to {
                return Err(bad(format!("edge {}->{} is not forward", e.from, e.to)));
            }
            if e.to >= self.n_vertices {
                return Err(bad(format!(
                    "edge {}->{} leaves the vertex range",
                    e.from, e.to
                )));
            }
            if !(e.conf > 0.0 && e.conf <= 1.0) {
                return Err(bad(format!("confidence {} outside (0, 1]", e.conf)));
            }
            if e.word.trim().is_empty() || e.word.contains(char::is_whitespace) {
                return Err(bad(format!("invalid word `{}`", e.word)));
            }
        }
        let n = self.n_vertices;
        let mut fwd = vec![false; n];
        fwd[0] = true;
        let mut bwd = vec![false; n];
        bwd[n - 1] = true;
        let mut sorted: Vec<&WordEdge> = self.edges.iter().collect();
        sorted.sort_by_key(|e| e.from);
        for e in &sorted {
            if fwd[e.from] {
                fwd[e.to] = true;
            }
        }
        for e in sorted.iter().rev() {
            if bwd[e.to] {
                bwd[e.from] = true;
            }
        }
        if let Some(v) = (0..n).find(|&v| !(fwd[v] && bwd[v])) {
            return Err(bad(format!("vertex {v} is not on a source-to-sink path")));
        }
        Ok(())
    }

    /// Finds a source-to-sink path spelling `tokens`, returning the vertex
    /// reached after each token (length `tokens.len() + 1`).
    pub fn align(&self, tokens: &[&str]) -> Option<Vec<usize>> {
        let mut out = vec![self.source()];
        if self.align_from(self.source(), tokens, &mut out) {
            Some(out)
        } else {
            None
        }
    }

    fn align_from(&self, v: usize, tokens: &[&str], out: &mut Vec<usize>) -> bool {
        let Some((first, rest)) = tokens.split_first() else {
            return v == self.sink();
        };
        let mut next: Vec<usize> = self
            .edges
            .iter()
            .filter(|e| e.from == v && e.word == *first)
            .map(|e| e.to)
            .collect();
        next.sort_unstable();
        next.dedup();
        for to in next {
            out.push(to);
            if self.align_from(to, rest, out) {
                return true;
            }
            out.pop();
        }
        false
    }
}

/// Reads a lattice file: one JSON object per non-blank line.
pub fn parse_lattice_file(text: &str) -> Result<Vec<Lattice>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let lattice: Lattice = serde_json::from_str(line).map_err(|source| Error::Json {
            line: i + 1,
            source,
        })?;
        lattice.validate()?;
        out.push(lattice);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(from: usize, to: usize, word: &str, conf: f64) -> WordEdge {
        WordEdge {
            from,
            to,
            word: word.into(),
            conf,
        }
    }

    #[test]
    fn text_lattice_is_linear() {
        let l = Lattice::from_text("t", "show the  flight").unwrap();
        assert_eq!(l.n_vertices, 4);
        assert!(l.edges.iter().all(|e| e.conf == 1.0 && e.to == e.from + 1));
        assert_eq!(l.align(&["show", "the", "flight"]), Some(vec![0, 1, 2, 3]));
        assert_eq!(l.align(&["show", "the"]), None);
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            Lattice::from_text("t", "  "),
            Err(Error::EmptyLattice)
        ));
        assert!(matches!(
            Lattice::new("t", 1, vec![]),
            Err(Error::EmptyLattice)
        ));
    }

    #[test]
    fn invariants_checked() {
        assert!(Lattice::new("t", 3, vec![edge(1, 0, "a", 1.0)]).is_err());
        assert!(Lattice::new("t", 2, vec![edge(0, 1, "a", 0.0)]).is_err());
        // vertex 2 dangles
        assert!(Lattice::new(
            "t",
            4,
            vec![
                edge(0, 1, "a", 1.0),
                edge(1, 3, "b", 1.0),
                edge(1, 2, "c", 1.0)
            ]
        )
        .is_err());
    }

    #[test]
    fn alignment_picks_matching_branch() {
        let l = Lattice::new(
            "t",
            3,
            vec![
                edge(0, 1, "a", 0.9),
                edge(0, 1, "b", 0.1),
                edge(1, 2, "c", 1.0),
            ],
        )
        .unwrap();
        assert_eq!(l.align(&["b", "c"]), Some(vec![0, 1, 2]));
    }

    #[test]
    fn jsonl_round_trip() {
        let l = Lattice::new("x", 3, vec![edge(0, 1, "a", 0.5), edge(1, 2, "b", 1.0)]).unwrap();
        let line = serde_json::to_string(&l).unwrap();
        assert!(line.contains("\"n_vertices\":3"));
        assert_eq!(
            parse_lattice_file(&format!("{line}\n\n{line}\n")).unwrap(),
            vec![l.clone(), l]
        );
        assert!(matches!(
            parse_lattice_file("{"),
            Err(Error::Json { line: 1, .. })
        ));
    }
}

//! Branching-space export as Graphviz DOT or JSON.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::alphabet::Corpus;
use crate::error::{Error, Result};
use crate::generator::{BranchSpace, EdgeKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WordFlag {
    /// One of the training words.
    InputWord,
    /// A proper prefix of a training word.
    PartialInputWord,
    /// Anything else.
    Pseudoword,
}

impl WordFlag {
    pub fn classify(word: &[usize], corpus: &Corpus) -> Self {
        if corpus.contains(word) {
            WordFlag::InputWord
        } else if corpus.starting_with(word).next().is_some() {
            WordFlag::PartialInputWord
        } else {
            WordFlag::Pseudoword
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            WordFlag::InputWord => "input-word",
            WordFlag::PartialInputWord => "partial-input-word",
            WordFlag::Pseudoword => "pseudoword",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportNode {
    pub id: usize,
    pub word: String,
    /// Number of sounds in the word.
    pub length: usize,
    pub energy: f64,
    pub depth_down: usize,
    pub row: usize,
    pub flag: WordFlag,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExportEdgeKind {
    Right,
    Down,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExportEdge {
    pub from: usize,
    pub to: usize,
    pub kind: ExportEdgeKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchExport {
    pub prefix: String,
    pub nodes: Vec<ExportNode>,
    pub edges: Vec<ExportEdge>,
}

impl BranchExport {
    /// Renders `space` with flags computed against `corpus`. The corpus
    /// alphabet must be the model alphabet.
    pub fn new(space: &BranchSpace, corpus: &Corpus) -> Self {
        let alphabet = &corpus.alphabet;
        let nodes = space
            .nodes
            .iter()
            .enumerate()
            .map(|(id, n)| ExportNode {
                id,
                word: alphabet.render(&n.word),
                length: n.word.len(),
                energy: n.energy,
                depth_down: n.depth_down,
                row: n.row,
                flag: WordFlag::classify(&n.word, corpus),
            })
            .collect();
        let edges = space
            .edges()
            .into_iter()
            .map(|(from, to, kind)| ExportEdge {
                from,
                to,
                kind: match kind {
                    EdgeKind::Right => ExportEdgeKind::Right,
                    EdgeKind::Down => ExportEdgeKind::Down,
                },
            })
            .collect();
        BranchExport {
            prefix: alphabet.render(&space.prefix),
            nodes,
            edges,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Graphviz source. Columns hold words of equal length; right edges run
    /// left to right, down edges stay inside a column. Input words are drawn
    /// with a double border and filled.
    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph branching_space {{");
        let _ = writeln!(out, "  rankdir=LR;");
        let _ = writeln!(out, "  node [shape=box, fontname=\"monospace\"];");
        let _ = writeln!(out, "  // prefix: {}", escape(&self.prefix));
        for n in &self.nodes {
            let style = match n.flag {
                WordFlag::InputWord => ", peripheries=2, style=filled, fillcolor=\"gray80\"",
                WordFlag::PartialInputWord => ", style=filled, fillcolor=\"gray95\"",
                WordFlag::Pseudoword => "",
            };
            let _ = writeln!(
                out,
                "  n{} [label=\"{}\\n{}\", flag=\"{}\", energy=\"{}\"{}];",
                n.id,
                escape(&n.word),
                format_energy(n.energy),
                n.flag.as_str(),
                n.energy,
                style
            );
        }
        let mut columns: Vec<(usize, Vec<usize>)> = Vec::new();
        for n in &self.nodes {
            let len = n.length;
            match columns.iter_mut().find(|(l, _)| *l == len) {
                Some((_, ids)) => ids.push(n.id),
                None => columns.push((len, vec![n.id])),
            }
        }
        for (_, ids) in &mut columns {
            // Lower energy first within a column.
            ids.sort_by(|&a, &b| self.nodes[a].energy.total_cmp(&self.nodes[b].energy).then(a.cmp(&b)));
            let members: Vec<String> = ids.iter().map(|id| format!("n{id}")).collect();
            let _ = writeln!(out, "  {{ rank=same; {}; }}", members.join("; "));
        }
        for e in &self.edges {
            let attrs = match e.kind {
                ExportEdgeKind::Right => "kind=right",
                ExportEdgeKind::Down => "kind=down, style=dashed",
            };
            let _ = writeln!(out, "  n{} -> n{} [{attrs}];", e.from, e.to);
        }
        out.push_str("}\n");
        out
    }

    /// Reads back the node ids and edges of a graph written by
    /// [`BranchExport::to_dot`]. Words and energies are not recovered.
    pub fn parse_dot_edges(text: &str) -> Result<(Vec<usize>, Vec<ExportEdge>)> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for line in text.lines().map(str::trim) {
            if let Some((lhs, attrs)) = line.split_once(" [") {
                if let Some((from, to)) = lhs.split_once(" -> ") {
                    let kind = if attrs.contains("kind=down") {
                        ExportEdgeKind::Down
                    } else if attrs.contains("kind=right") {
                        ExportEdgeKind::Right
                    } else {
                        return Err(Error::InvalidConfig(format!("edge without kind: {line}")));
                    };
                    edges.push(ExportEdge {
                        from: node_id(from)?,
                        to: node_id(to)?,
                        kind,
                    });
                } else if lhs.starts_with('n') && lhs != "node" {
                    nodes.push(node_id(lhs)?);
                }
            }
        }
        Ok((nodes, edges))
    }
}

fn node_id(token: &str) -> Result<usize> {
    token
        .trim()
        .strip_prefix('n')
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::InvalidConfig(format!("bad node id {token:?}")))
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn format_energy(e: f64) -> String {
    format!("{e:.2}")
}

/// Whether the edges over `nodes` form a directed acyclic graph.
pub fn is_dag(nodes: &[usize], edges: &[ExportEdge]) -> bool {
    let index: HashMap<usize, usize> = nodes.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut indegree = vec![0usize; nodes.len()];
    let mut adjacency = vec![Vec::new(); nodes.len()];
    for e in edges {
        let (Some(&a), Some(&b)) = (index.get(&e.from), index.get(&e.to)) else {
            return false;
        };
        adjacency[a].push(b);
        indegree[b] += 1;
    }
    let mut ready: Vec<usize> = (0..nodes.len()).filter(|&i| indegree[i] == 0).collect();
    let mut seen = 0;
    while let Some(i) = ready.pop() {
        seen += 1;
        for &j in &adjacency[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.push(j);
            }
        }
    }
    seen == nodes.len()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpora;
    use crate::generator::enumerate_branch_space;
    use crate::trainer::{train, TrainConfig};

    #[test]
    fn flags() {
        let c = corpora::latin();
        let a = &c.alphabet;
        assert_eq!(WordFlag::classify(&a.tokenize("servus").unwrap(), &c), WordFlag::InputWord);
        assert_eq!(WordFlag::classify(&a.tokenize("serv").unwrap(), &c), WordFlag::PartialInputWord);
        assert_eq!(WordFlag::classify(&a.tokenize("sevrus").unwrap(), &c), WordFlag::Pseudoword);
    }

    #[test]
    fn both_formats_parse_back_as_dags() {
        let c = corpora::latin();
        let m = train(&c, &TrainConfig::default()).unwrap();
        let prefix = c.alphabet.tokenize("s").unwrap();
        let space = enumerate_branch_space(&m, &prefix, 6, 8);
        let export = BranchExport::new(&space, &c);

        let back = BranchExport::from_json(&export.to_json().unwrap()).unwrap();
        assert_eq!(back, export);
        let ids: Vec<usize> = back.nodes.iter().map(|n| n.id).collect();
        assert!(is_dag(&ids, &back.edges));

        let (dot_nodes, dot_edges) = BranchExport::parse_dot_edges(&export.to_dot()).unwrap();
        assert_eq!(dot_nodes, ids);
        assert_eq!(dot_edges, export.edges);
        assert!(is_dag(&dot_nodes, &dot_edges));
    }

    #[test]
    fn cycle_is_not_a_dag() {
        let edges = vec![
            ExportEdge { from: 0, to: 1, kind: ExportEdgeKind::Right },
            ExportEdge { from: 1, to: 0, kind: ExportEdgeKind::Down },
        ];
        assert!(!is_dag(&[0, 1], &edges));
        assert!(!is_dag(&[0], &edges));
    }
}

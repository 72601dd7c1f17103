//! Edge-list text format and the JSON class-label sidecar.
//!
//! ```text
//! n m
//! u v
//! ...
//! ```
//! Indices are 0-based and whitespace separated; edges are undirected and
//! must not repeat. Blank lines and lines starting with `#` are skipped.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Partition};

pub fn parse_edge_list(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().ok_or_else(|| Error::Parse("missing `n m` header".into()))?;
    let (n, m) = parse_pair(header)?;
    let mut edges = Vec::with_capacity(m);
    for line in lines {
        edges.push(parse_pair(line)?);
    }
    if edges.len() != m {
        return Err(Error::Parse(format!(
            "header announces {m} edges but {} were listed",
            edges.len()
        )));
    }
    Graph::from_edges(n, edges)
}

fn parse_pair(line: &str) -> Result<(usize, usize)> {
    let mut it = line.split_whitespace();
    let mut next = || -> Result<usize> {
        it.next()
            .ok_or_else(|| Error::Parse(format!("expected two integers in `{line}`")))?
            .parse()
            .map_err(|_| Error::Parse(format!("bad integer in `{line}`")))
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(Error::Parse(format!("trailing tokens in `{line}`")));
    }
    Ok((a, b))
}

pub fn write_edge_list(g: &Graph) -> String {
    let mut out = format!("{} {}\n", g.n(), g.edge_count());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

/// `{"classes": [[...], [...]]}`
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct ClassFile {
    pub classes: Vec<Vec<usize>>,
}

impl ClassFile {
    pub fn from_partition(p: &Partition) -> Self {
        ClassFile { classes: p.to_lists() }
    }

    pub fn from_graph_labels(g: &Graph) -> Option<Self> {
        let classes = g.label_classes()?;
        Some(ClassFile {
            classes: classes.iter().map(|c| c.to_vec()).collect(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("class file serializes")
    }

    pub fn to_partition(&self, host_n: usize) -> Result<Partition> {
        Partition::from_lists(host_n, &self.classes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_simple() {
        let g = parse_edge_list("# triangle\n3 3\n0 1\n1 2\n0 2\n").unwrap();
        assert_eq!(g, Graph::complete(3));
    }

    #[test]
    fn parse_errors() {
        assert!(parse_edge_list("").is_err());
        assert!(parse_edge_list("3 2\n0 1\n").is_err());
        assert!(parse_edge_list("3 1\n0 x\n").is_err());
        assert!(parse_edge_list("3 2\n0 1\n1 0\n").is_err());
        assert!(parse_edge_list("3 1\n0 1 2\n").is_err());
    }

    #[test]
    fn class_file_json() {
        let c = ClassFile::parse(r#"{"classes": [[0,1],[2]]}"#).unwrap();
        assert_eq!(c.classes, vec![vec![0, 1], vec![2]]);
        assert!(c.to_partition(2).is_err());
        assert_eq!(c.to_partition(3).unwrap().len(), 2);
    }

    proptest! {
        #[test]
        fn edge_list_round_trip(n in 1usize..30, bits in proptest::collection::vec(any::<bool>(), 435)) {
            let mut edges = Vec::new();
            let mut k = 0;
            for u in 0..n {
                for v in (u + 1)..n {
                    if bits[k % bits.len()] { edges.push((u, v)); }
                    k += 1;
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            prop_assert_eq!(parse_edge_list(&write_edge_list(&g)).unwrap(), g);
        }
    }
}

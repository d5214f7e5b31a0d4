//! Finite graphs with named edges, and edge paths on them.
//!
//! Edge paths reuse [`Letter`]: the generator index is the edge index and
//! the inverse flag means the edge is crossed backwards.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::words::{free_reduce, Basis, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TopGraph {
    vertex_count: usize,
    base: usize,
    names: Vec<String>,
    ends: Vec<(usize, usize)>,
}

impl TopGraph {
    /// Edge names must be distinct, nonempty, and neither `1` nor start with `-`.
    pub fn new(vertex_count: usize, base: usize, edges: Vec<(String, usize, usize)>) -> Result<TopGraph> {
        if base >= vertex_count {
            return Err(Error::InvalidArgument(format!("base {base} out of range")));
        }
        let mut names = Vec::with_capacity(edges.len());
        let mut ends = Vec::with_capacity(edges.len());
        for (name, s, t) in edges {
            if name.is_empty() || name == "1" || name.starts_with('-') || name.contains(char::is_whitespace) {
                return Err(Error::InvalidArgument(format!("invalid edge name {name:?}")));
            }
            if names.contains(&name) {
                return Err(Error::InvalidArgument(format!("duplicate edge name {name:?}")));
            }
            if s >= vertex_count || t >= vertex_count {
                return Err(Error::InvalidArgument(format!("edge {name} has an endpoint out of range")));
            }
            names.push(name);
            ends.push((s, t));
        }
        let g = TopGraph {
            vertex_count,
            base,
            names,
            ends,
        };
        if !g.is_connected() {
            return Err(Error::Disconnected);
        }
        Ok(g)
    }

    /// One vertex, edges `e1, ..., eN`.
    pub fn rose(rank: usize) -> TopGraph {
        TopGraph {
            vertex_count: 1,
            base: 0,
            names: (1..=rank).map(|k| format!("e{k}")).collect(),
            ends: vec![(0, 0); rank],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn edge_count(&self) -> usize {
        self.names.len()
    }

    pub fn name(&self, edge: usize) -> &str {
        &self.names[edge]
    }

    pub fn edge_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn ends(&self, edge: usize) -> (usize, usize) {
        self.ends[edge]
    }

    /// Rank of the fundamental group.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count
    }

    pub fn is_rose(&self) -> bool {
        self.vertex_count == 1
    }

    pub fn origin(&self, l: Letter) -> usize {
        let (s, t) = self.ends[l.generator()];
        if l.is_inverse() {
            t
        } else {
            s
        }
    }

    pub fn terminus(&self, l: Letter) -> usize {
        self.origin(l.inverse())
    }

    /// End vertex of `path` from `start`, if consecutive edges are incident.
    pub fn walk(&self, start: usize, path: &[Letter]) -> Option<usize> {
        path.iter().try_fold(start, |v, &l| {
            (l.generator() < self.edge_count() && self.origin(l) == v).then(|| self.terminus(l))
        })
    }

    fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(s, t) in &self.ends {
                for (a, b) in [(s, t), (t, s)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        count += 1;
                        queue.push_back(b);
                    }
                }
            }
        }
        count == self.vertex_count
    }

    /// Chord index of each edge (`None` for spanning-tree edges), using a
    /// BFS tree from the base.
    fn chords(&self) -> Vec<Option<usize>> {
        let mut tree = vec![false; self.edge_count()];
        let mut seen = vec![false; self.vertex_count];
        let mut queue = VecDeque::from([self.base]);
        seen[self.base] = true;
        while let Some(v) = queue.pop_front() {
            for (e, &(s, t)) in self.ends.iter().enumerate() {
                for (a, b) in [(s, t), (t, s)] {
                    if a == v && !seen[b] {
                        seen[b] = true;
                        tree[e] = true;
                        queue.push_back(b);
                    }
                }
            }
        }
        let mut next = 0;
        tree.iter()
            .map(|&in_tree| {
                (!in_tree).then(|| {
                    next += 1;
                    next - 1
                })
            })
            .collect()
    }

    /// Coordinates of based loops in the free basis given by the chords of
    /// a spanning tree. The loops must be closed at the base.
    pub fn chord_words(&self, loops: &[Vec<Letter>]) -> Result<Vec<Word>> {
        let basis = Basis::new(self.rank().max(1))?;
        let chords = self.chords();
        loops
            .iter()
            .map(|p| {
                if self.walk(self.base, p) != Some(self.base) {
                    return Err(Error::InvalidMarking("loop is not closed at the base".into()));
                }
                Ok(Word::new(
                    p.iter()
                        .filter_map(|l| chords[l.generator()].map(|c| Letter::new(c, l.is_inverse()))),
                    basis,
                ))
            })
            .collect()
    }

    pub fn parse_path(&self, text: &str) -> Result<Vec<Letter>> {
        let text = text.trim();
        if text == "1" {
            return Ok(Vec::new());
        }
        text.split_whitespace()
            .map(|tok| {
                let (inverse, name) = match tok.strip_prefix('-') {
                    Some(n) => (true, n),
                    None => (false, tok),
                };
                self.edge_index(name)
                    .map(|e| Letter::new(e, inverse))
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown edge {name:?}")))
            })
            .collect()
    }

    pub fn format_path(&self, path: &[Letter]) -> String {
        if path.is_empty() {
            return "1".into();
        }
        path.iter()
            .map(|l| {
                let sign = if l.is_inverse() { "-" } else { "" };
                format!("{sign}{}", self.names[l.generator()])
            })
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Free reduction of an edge path.
    pub fn reduce_path(path: impl IntoIterator<Item = Letter>) -> Vec<Letter> {
        free_reduce(path)
    }
}

impl fmt::Display for TopGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices {}", self.vertex_count)?;
        writeln!(f, "base {}", self.base)?;
        for (name, (s, t)) in self.names.iter().zip(&self.ends) {
            writeln!(f, "edge {name} {s} {t}")?;
        }
        Ok(())
    }
}

/// Inverse path: reversed, every edge flipped.
pub fn invert_path(path: &[Letter]) -> Vec<Letter> {
    path.iter().rev().map(|l| l.inverse()).collect()
}

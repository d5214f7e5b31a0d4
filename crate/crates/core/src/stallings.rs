//! Stallings subgroup graphs.
//!
//! A [`CoreGraph`] is the folded graph of a finitely generated subgroup,
//! labelled by basis letters and kept in a canonical vertex numbering (BFS
//! from the base, exploring `a, A, b, B, ...` in order). Two graphs are equal
//! exactly when they describe the same based subgroup.
//!
//! File format, one item per line (`#` starts a comment):
//!
//! ```text
//! rank 2
//! vertices 2
//! base 0
//! edge a 0 0
//! edge a 1 1
//! edge b 0 1
//! bridge B        # only for based graphs
//! ```

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::text;
use crate::words::{Basis, Endomorphism, Letter, Word};

/// A directed edge labelled by the generator with index `label`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub label: usize,
    pub source: usize,
    pub target: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Index {
    Finite(usize),
    Infinite,
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => f.write_str("infinite"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PowerBound {
    Bounded(usize),
    Unbounded,
}

impl fmt::Display for PowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PowerBound::Bounded(n) => write!(f, "{n}"),
            PowerBound::Unbounded => f.write_str("unbounded"),
        }
    }
}

/// Union-find folding of a labelled graph. Vertex 0 is the base and always
/// survives as its class representative.
struct Folder {
    parent: Vec<usize>,
    /// `adj[v][slot]`: neighbour reached by reading the letter in `slot`.
    adj: Vec<Vec<Option<usize>>>,
    pending: Vec<(usize, usize)>,
    slots: usize,
}

impl Folder {
    fn new(basis: Basis) -> Folder {
        let mut f = Folder {
            parent: Vec::new(),
            adj: Vec::new(),
            pending: Vec::new(),
            slots: 2 * basis.rank(),
        };
        f.add_vertex();
        f
    }

    fn from_graph(g: &CoreGraph) -> Folder {
        let mut f = Folder::new(g.basis);
        for _ in 1..g.vertex_count {
            f.add_vertex();
        }
        // Put the base at 0.
        let relabel = |v: usize| {
            if v == g.base {
                0
            } else if v == 0 {
                g.base
            } else {
                v
            }
        };
        for e in &g.edges {
            f.add_edge(relabel(e.source), Letter::new(e.label, false), relabel(e.target));
        }
        f
    }

    fn add_vertex(&mut self) -> usize {
        self.parent.push(self.parent.len());
        self.adj.push(vec![None; self.slots]);
        self.parent.len() - 1
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn link(&mut self, s: usize, letter: Letter, d: usize) {
        match self.adj[s][letter.slot()] {
            None => self.adj[s][letter.slot()] = Some(d),
            Some(t) => {
                let t = self.find(t);
                if t != d {
                    self.pending.push((t, d));
                }
            }
        }
    }

    fn add_edge(&mut self, src: usize, letter: Letter, dst: usize) {
        let (s, d) = (self.find(src), self.find(dst));
        self.link(s, letter, d);
        let (s, d) = (self.find(src), self.find(dst));
        self.link(d, letter.inverse(), s);
        self.settle();
    }

    fn settle(&mut self) {
        while let Some((a, b)) = self.pending.pop() {
            let (a, b) = (self.find(a), self.find(b));
            if a == b {
                continue;
            }
            let (keep, gone) = if a < b { (a, b) } else { (b, a) };
            self.parent[gone] = keep;
            let moved = std::mem::take(&mut self.adj[gone]);
            for (slot, t) in moved.into_iter().enumerate() {
                if let Some(t) = t {
                    let t = self.find(t);
                    let keep = self.find(keep);
                    self.link(keep, Letter::from_slot(slot), t);
                }
            }
        }
    }

    /// Adds a fresh path spelling `letters` from `start`; returns its end.
    fn add_path(&mut self, start: usize, letters: &[Letter]) -> usize {
        let mut cur = self.find(start);
        for &l in letters {
            let next = self.add_vertex();
            self.add_edge(cur, l, next);
            cur = self.find(next);
        }
        self.find(cur)
    }

    fn add_loop(&mut self, letters: &[Letter]) {
        if letters.is_empty() {
            return;
        }
        let mut cur = 0;
        for (i, &l) in letters.iter().enumerate() {
            let next = if i + 1 == letters.len() { 0 } else { self.add_vertex() };
            self.add_edge(cur, l, next);
            cur = next;
        }
    }

    fn finish(mut self, basis: Basis, base: usize) -> CoreGraph {
        let base = self.find(base);
        let n = self.parent.len();
        let mut edges = Vec::new();
        for v in 0..n {
            if self.find(v) != v {
                continue;
            }
            for g in 0..basis.rank() {
                if let Some(t) = self.adj[v][2 * g] {
                    let t = self.find(t);
                    edges.push(Edge {
                        label: g,
                        source: v,
                        target: t,
                    });
                }
            }
        }
        CoreGraph::canonical(basis, n, base, &edges)
    }
}

/// A folded, connected, labelled graph with a base vertex.
#[derive(Clone, Debug)]
pub struct CoreGraph {
    basis: Basis,
    vertex_count: usize,
    base: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<Option<usize>>>,
    inc: Vec<Vec<Option<usize>>>,
}

impl PartialEq for CoreGraph {
    fn eq(&self, other: &Self) -> bool {
        self.basis == other.basis
            && self.vertex_count == other.vertex_count
            && self.base == other.base
            && self.edges == other.edges
    }
}

impl Eq for CoreGraph {}

/// Folds the wedge of loops spelling `generators` at a base vertex.
pub fn fold(generators: &[Word], basis: Basis) -> CoreGraph {
    let mut folder = Folder::new(basis);
    for g in generators {
        assert_eq!(g.basis(), basis, "generator over a different basis");
        folder.add_loop(g.letters());
    }
    folder.finish(basis, 0)
}

impl CoreGraph {
    /// Renumbers vertices by BFS from `base` and drops anything unreachable.
    fn canonical(basis: Basis, vertex_count: usize, base: usize, edges: &[Edge]) -> CoreGraph {
        let rank = basis.rank();
        let mut out = vec![vec![None; rank]; vertex_count];
        let mut inc = vec![vec![None; rank]; vertex_count];
        for e in edges {
            out[e.source][e.label] = Some(e.target);
            inc[e.target][e.label] = Some(e.source);
        }
        let mut order = vec![usize::MAX; vertex_count];
        let mut queue = VecDeque::from([base]);
        order[base] = 0;
        let mut next = 1;
        while let Some(v) = queue.pop_front() {
            for g in 0..rank {
                for t in [out[v][g], inc[v][g]].into_iter().flatten() {
                    if order[t] == usize::MAX {
                        order[t] = next;
                        next += 1;
                        queue.push_back(t);
                    }
                }
            }
        }
        let mut renamed: Vec<Edge> = edges
            .iter()
            .filter(|e| order[e.source] != usize::MAX)
            .map(|e| Edge {
                label: e.label,
                source: order[e.source],
                target: order[e.target],
            })
            .collect();
        renamed.sort_by_key(|e| (e.label, e.source, e.target));
        renamed.dedup();
        CoreGraph::from_canonical(basis, next, 0, renamed)
    }

    fn from_canonical(basis: Basis, vertex_count: usize, base: usize, edges: Vec<Edge>) -> CoreGraph {
        let rank = basis.rank();
        let mut out = vec![vec![None; rank]; vertex_count];
        let mut inc = vec![vec![None; rank]; vertex_count];
        for e in &edges {
            out[e.source][e.label] = Some(e.target);
            inc[e.target][e.label] = Some(e.source);
        }
        CoreGraph {
            basis,
            vertex_count,
            base,
            edges,
            out,
            inc,
        }
    }

    /// Validates a graph read from outside: folded, connected, core away
    /// from the base. The result is renumbered canonically.
    pub fn from_edges(basis: Basis, vertex_count: usize, base: usize, edges: &[Edge]) -> Result<CoreGraph> {
        if base >= vertex_count {
            return Err(Error::InvalidArgument(format!("base {base} out of range")));
        }
        let rank = basis.rank();
        let mut out = vec![vec![None; rank]; vertex_count];
        let mut inc = vec![vec![None; rank]; vertex_count];
        for e in edges {
            if e.source >= vertex_count || e.target >= vertex_count || e.label >= rank {
                return Err(Error::InvalidArgument(format!("edge {e:?} out of range")));
            }
            if out[e.source][e.label].replace(e.target).is_some() {
                return Err(Error::NotFolded(e.source));
            }
            if inc[e.target][e.label].replace(e.source).is_some() {
                return Err(Error::NotFolded(e.target));
            }
        }
        let g = CoreGraph::canonical(basis, vertex_count, base, edges);
        if g.vertex_count != vertex_count {
            return Err(Error::Disconnected);
        }
        if let Some(v) = (0..g.vertex_count).find(|&v| v != g.base && g.degree(v) < 2) {
            return Err(Error::NotCore(v, g.degree(v)));
        }
        Ok(g)
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Loops count twice.
    pub fn degree(&self, v: usize) -> usize {
        self.out[v].iter().flatten().count() + self.inc[v].iter().flatten().count()
    }

    pub fn step(&self, v: usize, letter: Letter) -> Option<usize> {
        let g = letter.generator();
        if g >= self.basis.rank() {
            return None;
        }
        if letter.is_inverse() {
            self.inc[v][g]
        } else {
            self.out[v][g]
        }
    }

    /// End vertex of the path spelling `letters` from `v`, if it exists.
    pub fn read_from(&self, v: usize, letters: &[Letter]) -> Option<usize> {
        letters.iter().try_fold(v, |cur, &l| self.step(cur, l))
    }

    /// Membership in the subgroup: `w` spells a closed path at the base.
    pub fn contains(&self, w: &Word) -> bool {
        self.read_from(self.base, w.letters()) == Some(self.base)
    }

    /// Finite exactly when every vertex has one incoming and one outgoing
    /// edge per letter; then the index is the number of vertices.
    pub fn index(&self) -> Index {
        let regular = (0..self.vertex_count)
            .all(|v| self.out[v].iter().all(Option::is_some) && self.inc[v].iter().all(Option::is_some));
        if regular {
            Index::Finite(self.vertex_count)
        } else {
            Index::Infinite
        }
    }

    /// True when `p` spells a path starting at some vertex.
    pub fn reads(&self, p: &Word) -> bool {
        (0..self.vertex_count).any(|v| self.read_from(v, p.letters()).is_some())
    }

    /// Attaches a path spelling `tail` at the base, folds, and splits the
    /// result into the core and the bridge to the new base point.
    pub fn with_basepoint(&self, tail: &Word) -> BasedGraph {
        let mut folder = Folder::from_graph(self);
        let end = folder.add_path(0, tail.letters());
        let combined = folder.finish(self.basis, end);
        split_bridge(combined)
    }

    /// Exact largest `k` such that `z^k` (reduced) spells a path somewhere.
    ///
    /// With `z = c·y·c⁻¹`, `y` cyclically reduced, reading `y` is a partial
    /// function on vertices; `z^k` is readable iff a chain of `k` steps runs
    /// between two vertices where `c⁻¹` is readable. A cycle through such a
    /// vertex makes the bound infinite.
    pub fn power_bound(&self, z: &Word) -> PowerBound {
        let (y, c) = z.cyclic_reduce();
        if y.is_empty() {
            return PowerBound::Bounded(0);
        }
        let c_inv = c.inverse();
        let ok: Vec<bool> = (0..self.vertex_count)
            .map(|v| self.read_from(v, c_inv.letters()).is_some())
            .collect();
        let mut best = 0;
        for start in (0..self.vertex_count).filter(|&v| ok[v]) {
            let mut seen = vec![usize::MAX; self.vertex_count];
            let mut chain = vec![start];
            seen[start] = 0;
            let mut cur = start;
            while let Some(next) = self.read_from(cur, y.letters()) {
                if seen[next] != usize::MAX {
                    if chain[seen[next]..].iter().any(|&v| ok[v]) {
                        return PowerBound::Unbounded;
                    }
                    break;
                }
                seen[next] = chain.len();
                chain.push(next);
                if ok[next] {
                    best = best.max(chain.len() - 1);
                }
                cur = next;
            }
        }
        PowerBound::Bounded(best)
    }

    /// Upper bound for `z`-runs in cyclically reduced forms of the coset
    /// elements `tail⁻¹·h`, `h` in the subgroup.
    ///
    /// A run in a cyclic word either sits inside one linear subword or
    /// wraps, splitting into a suffix run and a prefix run. For a
    /// single-letter `z` that gives `2·M`; a longer `z` may also split one
    /// copy across the wrap, giving `2·M + 1`.
    pub fn coset_power_bound(&self, tail: &Word, z: &Word) -> PowerBound {
        let based = self.with_basepoint(tail);
        match based.combined().power_bound(z) {
            PowerBound::Unbounded => PowerBound::Unbounded,
            PowerBound::Bounded(m) => {
                let (y, _) = z.cyclic_reduce();
                PowerBound::Bounded(if y.len() <= 1 { 2 * m } else { 2 * m + 1 })
            }
        }
    }

    /// The graph with `v` as base, renumbered.
    fn rebased_at(&self, v: usize) -> CoreGraph {
        CoreGraph::canonical(self.basis, self.vertex_count, v, &self.edges)
    }

    pub fn parse(text: &str) -> Result<CoreGraph> {
        let (g, bridge) = parse_graph_file(text)?;
        match bridge {
            None => Ok(g),
            Some(_) => Err(Error::parse(0, "unexpected bridge line in core graph file")),
        }
    }

    fn write_body(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "rank {}", self.basis.rank())?;
        writeln!(f, "vertices {}", self.vertex_count)?;
        writeln!(f, "base {}", self.base)?;
        for e in &self.edges {
            writeln!(f, "edge {} {} {}", Letter::new(e.label, false).to_char(), e.source, e.target)?;
        }
        Ok(())
    }
}

impl fmt::Display for CoreGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_body(f)
    }
}

/// Prunes hanging vertices of `combined` (based at the external point) to
/// find the core, then reads off the bridge.
fn split_bridge(combined: CoreGraph) -> BasedGraph {
    let n = combined.vertex_count;
    let mut degree: Vec<usize> = (0..n).map(|v| combined.degree(v)).collect();
    let mut alive = vec![true; n];
    let mut stack: Vec<usize> = (0..n).filter(|&v| degree[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for e in combined.edges.iter().filter(|e| e.source == v || e.target == v) {
            let other = if e.source == v { e.target } else { e.source };
            if alive[other] && other != v {
                degree[other] -= 1;
                if degree[other] <= 1 {
                    stack.push(other);
                }
            }
        }
    }
    // BFS from the base point; the first surviving vertex reached is where
    // the bridge meets the core. A tree keeps only its far end.
    let mut parent: Vec<Option<(usize, Letter)>> = vec![None; n];
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([combined.base]);
    seen[combined.base] = true;
    let mut attach = None;
    let mut last = combined.base;
    while let Some(v) = queue.pop_front() {
        last = v;
        if alive[v] {
            attach = Some(v);
            break;
        }
        for l in combined.basis.letters() {
            if let Some(t) = combined.step(v, l) {
                if !seen[t] {
                    seen[t] = true;
                    parent[t] = Some((v, l));
                    queue.push_back(t);
                }
            }
        }
    }
    let attach = attach.unwrap_or(last);
    if !alive.iter().any(|&a| a) {
        alive[attach] = true;
    }
    // Path from the base point to `attach`, reversed, is the bridge.
    let mut to_base = Vec::new();
    let mut v = attach;
    while let Some((p, l)) = parent[v] {
        to_base.push(l.inverse());
        v = p;
    }
    let bridge = Word::new(to_base, combined.basis);
    let kept: Vec<usize> = (0..n).filter(|&v| alive[v]).collect();
    let mut index = vec![usize::MAX; n];
    for (i, &v) in kept.iter().enumerate() {
        index[v] = i;
    }
    let edges: Vec<Edge> = combined
        .edges
        .iter()
        .filter(|e| alive[e.source] && alive[e.target])
        .map(|e| Edge {
            label: e.label,
            source: index[e.source],
            target: index[e.target],
        })
        .collect();
    let core = CoreGraph::canonical(combined.basis, kept.len(), index[attach], &edges);
    BasedGraph { core, bridge, combined }
}

/// A core graph together with a bridge to an external base point.
#[derive(Clone, Debug)]
pub struct BasedGraph {
    core: CoreGraph,
    bridge: Word,
    combined: CoreGraph,
}

impl PartialEq for BasedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.core == other.core && self.bridge == other.bridge
    }
}

impl Eq for BasedGraph {}

impl BasedGraph {
    /// `core`'s base is the attachment vertex; `bridge` is spelled from it
    /// to the external point and must leave the core immediately.
    pub fn new(core: CoreGraph, bridge: Word) -> Result<BasedGraph> {
        let mut folder = Folder::from_graph(&core);
        let end = folder.add_path(0, bridge.letters());
        let combined = folder.finish(core.basis, end);
        if combined.vertex_count != core.vertex_count + bridge.len() {
            return Err(Error::InvalidBridge(bridge.to_string()));
        }
        let split = split_bridge(combined);
        if split.core != core || split.bridge != bridge {
            return Err(Error::InvalidBridge(bridge.to_string()));
        }
        Ok(split)
    }

    /// The core; its base is the vertex where the bridge attaches.
    pub fn core(&self) -> &CoreGraph {
        &self.core
    }

    pub fn bridge(&self) -> &Word {
        &self.bridge
    }

    /// Core and bridge as one folded graph based at the external point.
    pub fn combined(&self) -> &CoreGraph {
        &self.combined
    }

    pub fn index(&self) -> Index {
        self.core.index()
    }

    pub fn reads(&self, p: &Word) -> bool {
        self.combined.reads(p)
    }

    pub fn parse(text: &str) -> Result<BasedGraph> {
        let (core, bridge) = parse_graph_file(text)?;
        let basis = core.basis();
        BasedGraph::new(core, bridge.unwrap_or_else(|| Word::identity(basis)))
    }
}

impl fmt::Display for BasedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.core.write_body(f)?;
        writeln!(f, "bridge {}", self.bridge)
    }
}

/// Parses a graph file; the second component is the `bridge` word if present.
pub fn parse_graph_file(text: &str) -> Result<(CoreGraph, Option<Word>)> {
    let mut rank = None;
    let mut vertices = None;
    let mut base = None;
    let mut edges = Vec::new();
    let mut bridge_text: Option<(usize, String)> = None;
    for line in text::lines(text) {
        match line.tokens[0] {
            "rank" => rank = Some(text::number::<usize>(line.number, line.tokens.get(1), "rank")?),
            "vertices" => vertices = Some(text::number::<usize>(line.number, line.tokens.get(1), "vertex count")?),
            "base" => base = Some(text::number::<usize>(line.number, line.tokens.get(1), "base")?),
            "edge" => {
                let label = line
                    .tokens
                    .get(1)
                    .and_then(|t| {
                        let mut cs = t.chars();
                        match (cs.next(), cs.next()) {
                            (Some(c), None) if c.is_ascii_lowercase() => Some((c as u8 - b'a') as usize),
                            _ => None,
                        }
                    })
                    .ok_or_else(|| Error::parse(line.number, "edge label must be a lowercase letter"))?;
                let source = text::number(line.number, line.tokens.get(2), "edge source")?;
                let target = text::number(line.number, line.tokens.get(3), "edge target")?;
                edges.push((line.number, Edge { label, source, target }));
            }
            "bridge" => bridge_text = Some((line.number, line.rest.to_string())),
            other => return Err(Error::parse(line.number, format!("unknown keyword {other:?}"))),
        }
    }
    let rank = rank.ok_or_else(|| Error::parse(0, "missing rank line"))?;
    let basis = Basis::new(rank)?;
    let vertices = vertices.ok_or_else(|| Error::parse(0, "missing vertices line"))?;
    let base = base.ok_or_else(|| Error::parse(0, "missing base line"))?;
    if let Some(&(n, e)) = edges.iter().find(|(_, e)| e.label >= rank) {
        return Err(Error::parse(n, format!("label of {e:?} outside rank")));
    }
    let edges: Vec<Edge> = edges.into_iter().map(|(_, e)| e).collect();
    let graph = CoreGraph::from_edges(basis, vertices, base, &edges)?;
    let bridge = match bridge_text {
        None => None,
        Some((n, t)) => Some(Word::parse(&t, basis).map_err(|e| Error::parse(n, e.to_string()))?),
    };
    Ok((graph, bridge))
}

/// Inverts an automorphism by folding the wedge of its image loops while
/// tracking, on every edge, the preimage it contributes.
///
/// Edge values change by gauge moves at non-base vertices, which preserve
/// the value of every loop at the base. When the fold ends at the rose, the
/// value on the edge labelled `x_k` is the preimage of `x_k`.
pub fn invert(phi: &Endomorphism) -> Result<Endomorphism> {
    #[derive(Clone)]
    struct Valued {
        label: usize,
        source: usize,
        target: usize,
        value: Word,
    }
    let basis = phi.basis();
    let mut edges: Vec<Valued> = Vec::new();
    let mut vertex_count = 1;
    for (i, image) in phi.images().iter().enumerate() {
        if image.is_empty() {
            return Err(Error::NotInvertible);
        }
        let mut cur = 0;
        for (j, &l) in image.letters().iter().enumerate() {
            let next = if j + 1 == image.len() {
                0
            } else {
                vertex_count += 1;
                vertex_count - 1
            };
            let mut value = if j == 0 {
                Word::letter(Letter::new(i, false), basis)
            } else {
                Word::identity(basis)
            };
            let (source, target) = if l.is_inverse() {
                value = value.inverse();
                (next, cur)
            } else {
                (cur, next)
            };
            edges.push(Valued {
                label: l.generator(),
                source,
                target,
                value,
            });
            cur = next;
        }
    }

    let gauge = |edges: &mut Vec<Valued>, v: usize, c: &Word| {
        let c_inv = c.inverse();
        for e in edges.iter_mut() {
            if e.source == v {
                e.value = c_inv.mul(&e.value);
            }
            if e.target == v {
                e.value = e.value.mul(c);
            }
        }
    };
    let merge = |edges: &mut Vec<Valued>, from: usize, into: usize| {
        for e in edges.iter_mut() {
            if e.source == from {
                e.source = into;
            }
            if e.target == from {
                e.target = into;
            }
        }
    };

    loop {
        let mut found = None;
        'search: for i in 0..edges.len() {
            for j in i + 1..edges.len() {
                let (a, b) = (&edges[i], &edges[j]);
                if a.label == b.label && (a.source == b.source || a.target == b.target) {
                    found = Some((i, j));
                    break 'search;
                }
            }
        }
        let Some((i, j)) = found else { break };
        let (e1, e2) = (edges[i].clone(), edges[j].clone());
        if e1.source == e2.source && e1.target == e2.target {
            if e1.value != e2.value {
                return Err(Error::NotInvertible);
            }
            edges.remove(j);
            continue;
        }
        if e1.source == e2.source {
            // Identify the targets.
            if e2.target != 0 {
                let c = e2.value.inverse().mul(&e1.value);
                gauge(&mut edges, e2.target, &c);
                merge(&mut edges, e2.target, e1.target);
            } else {
                let c = e1.value.inverse().mul(&e2.value);
                gauge(&mut edges, e1.target, &c);
                merge(&mut edges, e1.target, e2.target);
            }
        } else {
            // Same target: identify the sources.
            if e2.source != 0 {
                let c = e2.value.mul(&e1.value.inverse());
                gauge(&mut edges, e2.source, &c);
                merge(&mut edges, e2.source, e1.source);
            } else {
                let c = e1.value.mul(&e2.value.inverse());
                gauge(&mut edges, e1.source, &c);
                merge(&mut edges, e1.source, e2.source);
            }
        }
    }

    if edges.len() != basis.rank() || edges.iter().any(|e| e.source != 0 || e.target != 0) {
        return Err(Error::NotInvertible);
    }
    let mut images = vec![Word::identity(basis); basis.rank()];
    for e in edges {
        images[e.label] = e.value;
    }
    Endomorphism::new(images)
}

/// Folds the subgroup in the coordinates of the basis `{phi(x_k)}`:
/// the generators become `phi⁻¹(h)`.
pub fn rebase(generators: &[Word], phi: &Endomorphism) -> Result<CoreGraph> {
    let inverse = invert(phi)?;
    let images: Vec<Word> = generators.iter().map(|h| inverse.apply(h)).collect();
    Ok(fold(&images, phi.basis()))
}

impl CoreGraph {
    /// The same subgroup graph re-rooted at `v` (a conjugate subgroup).
    pub fn conjugate_at(&self, v: usize) -> CoreGraph {
        self.rebased_at(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, b2()).unwrap()
    }

    fn fold_text(gens: &[&str]) -> CoreGraph {
        fold(&gens.iter().map(|g| w(g)).collect::<Vec<_>>(), b2())
    }

    fn edge(label: usize, source: usize, target: usize) -> Edge {
        Edge { label, source, target }
    }

    #[test]
    fn fold_examples() {
        let g = fold_text(&["a", "baB"]);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[edge(0, 0, 0), edge(0, 1, 1), edge(1, 0, 1)]);

        let rose = fold_text(&["a", "b"]);
        assert_eq!(rose.vertex_count(), 1);
        assert_eq!(rose.edges(), &[edge(0, 0, 0), edge(1, 0, 0)]);

        let sq = fold_text(&["aa"]);
        assert_eq!(sq.vertex_count(), 2);
        assert_eq!(sq.edges(), &[edge(0, 0, 1), edge(0, 1, 0)]);

        let trivial = fold(&[], b2());
        assert_eq!(trivial.vertex_count(), 1);
        assert!(trivial.edges().is_empty());
    }

    #[test]
    fn fold_is_order_independent() {
        assert_eq!(fold_text(&["a", "baB", "abAB"]), fold_text(&["abAB", "baB", "a"]));
    }

    #[test]
    fn contains_examples() {
        let g = fold_text(&["a", "baB"]);
        assert!(g.contains(&w("baBa")));
        assert!(!g.contains(&w("ab")));
        assert!(g.contains(&w("1")));
    }

    #[test]
    fn index_examples() {
        assert_eq!(fold_text(&["a", "bb", "baB"]).index(), Index::Finite(2));
        assert_eq!(fold_text(&["a", "baB"]).index(), Index::Infinite);
        assert_eq!(fold_text(&["a", "b"]).index(), Index::Finite(1));
    }

    #[test]
    fn reads_examples() {
        let g = fold_text(&["a", "baB"]);
        assert!(g.reads(&w("aba")));
        assert!(!g.reads(&w("abaab")));
        assert!(g.reads(&w("b")));
        assert!(g.reads(&w("B")));
    }

    #[test]
    fn with_basepoint_examples() {
        let g = fold_text(&["a", "baB"]);
        let based = g.with_basepoint(&w("B"));
        assert_eq!(based.bridge().to_string(), "B");
        assert_eq!(based.core(), &g);
        assert!(!based.reads(&w("abaab")));
        assert!(based.reads(&w("aba")));
        assert!(based.reads(based.bridge()));

        let based = g.with_basepoint(&w("1"));
        assert!(based.bridge().is_empty());
        assert_eq!(based.combined(), &g);
        assert!(g.with_basepoint(&w("a")).bridge().is_empty());
    }

    #[test]
    fn hair_at_base_becomes_bridge() {
        let g = fold_text(&["baB"]);
        assert_eq!(g.vertex_count(), 2);
        let based = g.with_basepoint(&w("1"));
        assert_eq!(based.bridge().to_string(), "B");
        assert_eq!(based.core().vertex_count(), 1);
        assert!(g.with_basepoint(&w("b")).bridge().is_empty());
    }

    #[test]
    fn trivial_subgroup_bridge_is_tail() {
        let based = fold(&[], b2()).with_basepoint(&w("abA"));
        assert_eq!(based.core().vertex_count(), 1);
        assert_eq!(based.bridge().len(), 3);
        assert!(based.reads(&w("abA")));
        assert!(!based.reads(&w("aa")));
    }

    #[test]
    fn power_bound_examples() {
        let g = fold_text(&["a", "baB"]);
        assert_eq!(g.power_bound(&w("b")), PowerBound::Bounded(1));
        assert_eq!(g.power_bound(&w("a")), PowerBound::Unbounded);
        assert_eq!(fold_text(&["a", "b"]).power_bound(&w("a")), PowerBound::Unbounded);
        assert_eq!(g.power_bound(&w("ab")), PowerBound::Bounded(1));
        assert_eq!(g.power_bound(&w("bb")), PowerBound::Bounded(0));
        // b a^k B is readable for every k.
        assert_eq!(g.power_bound(&w("baB")), PowerBound::Unbounded);
        assert_eq!(fold_text(&["bab"]).power_bound(&w("baB")), PowerBound::Bounded(0));
        assert_eq!(fold_text(&["bab"]).power_bound(&w("bab")), PowerBound::Unbounded);
    }

    #[test]
    fn coset_power_bound_examples() {
        let g = fold_text(&["a", "baB"]);
        assert_eq!(g.coset_power_bound(&w("1"), &w("b")), PowerBound::Bounded(2));
        // Bridge b into the core: b b readable, so the linear bound is 2.
        assert_eq!(g.with_basepoint(&w("B")).combined().power_bound(&w("b")), PowerBound::Bounded(2));
        assert_eq!(g.coset_power_bound(&w("B"), &w("b")), PowerBound::Bounded(4));
        let h = fold_text(&["a"]);
        assert_eq!(h.coset_power_bound(&w("1"), &w("b")), PowerBound::Bounded(0));
    }

    #[test]
    fn invert_fibonacci() {
        let f = Endomorphism::parse(&["ab", "a"]).unwrap();
        let inv = invert(&f).unwrap();
        assert_eq!(inv, Endomorphism::parse(&["b", "Ba"]).unwrap());
        assert!(inv.compose(&f).is_identity());
        assert!(f.compose(&inv).is_identity());
        let f5 = f.power(5);
        assert!(invert(&f5).unwrap().compose(&f5).is_identity());
    }

    #[test]
    fn invert_rejects_non_automorphisms() {
        for images in [["a", "a"], ["ab", "ba"], ["aa", "b"], ["a", "1"]] {
            let phi = Endomorphism::parse(&images).unwrap();
            assert_eq!(invert(&phi), Err(Error::NotInvertible), "{images:?}");
        }
    }

    #[test]
    fn rebase_examples() {
        let id = Endomorphism::identity(b2());
        let gens = vec![w("a"), w("baB")];
        assert_eq!(rebase(&gens, &id).unwrap(), fold(&gens, b2()));

        let phi = Endomorphism::parse(&["ab", "a"]).unwrap();
        assert_eq!(rebase(&[w("ab")], &phi).unwrap(), fold_text(&["a"]));

        let swap = Endomorphism::parse(&["b", "a"]).unwrap();
        assert_eq!(rebase(&[w("a")], &swap).unwrap(), fold_text(&["b"]));

        let bad = Endomorphism::parse(&["a", "a"]).unwrap();
        assert_eq!(rebase(&[w("a")], &bad), Err(Error::NotInvertible));
    }

    #[test]
    fn graph_file_round_trip() {
        let g = fold_text(&["a", "baB"]);
        let text = g.to_string();
        assert_eq!(text, "rank 2\nvertices 2\nbase 0\nedge a 0 0\nedge a 1 1\nedge b 0 1\n");
        assert_eq!(CoreGraph::parse(&text).unwrap(), g);

        let based = g.with_basepoint(&w("B"));
        let text = based.to_string();
        assert!(text.ends_with("bridge B\n"));
        assert_eq!(BasedGraph::parse(&text).unwrap(), based);
    }

    #[test]
    fn graph_file_errors() {
        let unfolded = "rank 2\nvertices 2\nbase 0\nedge a 0 1\nedge a 0 0\nedge a 1 1\n";
        assert!(matches!(CoreGraph::parse(unfolded), Err(Error::NotFolded(_))));
        let hanging = "rank 2\nvertices 3\nbase 0\nedge a 0 0\nedge b 0 1\nedge a 1 2\n";
        assert!(matches!(CoreGraph::parse(hanging), Err(Error::NotCore(..))));
        let comments = "# a comment\nrank 1\nvertices 1 # trailing\nbase 0\nedge a 0 0\n";
        assert_eq!(CoreGraph::parse(comments).unwrap().index(), Index::Finite(1));
        // The bridge may not run back into the core.
        let bad_bridge = "rank 2\nvertices 1\nbase 0\nedge a 0 0\nbridge ab\n";
        assert!(matches!(BasedGraph::parse(bad_bridge), Err(Error::InvalidBridge(_))));
    }
}

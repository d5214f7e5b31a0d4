//! Graph self-maps and their iteration.
//!
//! A [`GraphMap`] sends every edge of a [`TopGraph`] to a nonempty reduced
//! edge path. On the rose whose edges are the basis letters a map is the
//! same thing as an endomorphism, and most of the operations here (escape
//! powers, the element `z`) need that case.
//!
//! Map file format, rose case:
//!
//! ```text
//! rank 2
//! image x1 = ab
//! image x2 = a
//! ```
//!
//! General graphs list `vertices`, `base` and `edge <name> <src> <dst>`
//! lines, then `image <name> = <signed edge sequence>`.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::graph::TopGraph;
use crate::stallings::{fold, BasedGraph, Index};
use crate::text;
use crate::words::{reduced_words_up_to, Basis, CyclicWord, Endomorphism, Letter, Word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    graph: TopGraph,
    vertex_images: Vec<usize>,
    images: Vec<Vec<Letter>>,
}

/// Escape powers against a list of targets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EscapeReport {
    /// `per_target[e][t]`: least `m` with `f^n(e)` unreadable in target `t`
    /// for every `n` in `m..=m + window`.
    pub per_target: Vec<Vec<usize>>,
    /// Maximum over targets, per edge.
    pub per_edge: Vec<usize>,
    pub m: usize,
    pub window: usize,
}

/// Appends `x`, cancelling against the end; returns true on cancellation.
fn push_reduced(out: &mut Vec<Letter>, x: Letter) -> bool {
    if out.last() == Some(&x.inverse()) {
        out.pop();
        true
    } else {
        out.push(x);
        false
    }
}

impl GraphMap {
    pub fn new(graph: TopGraph, images: Vec<Vec<Letter>>) -> Result<GraphMap> {
        if images.len() != graph.edge_count() {
            return Err(Error::InvalidMap(format!(
                "{} images for {} edges",
                images.len(),
                graph.edge_count()
            )));
        }
        let mut vertex_images: Vec<Option<usize>> = vec![None; graph.vertex_count()];
        for (e, img) in images.iter().enumerate() {
            let name = graph.name(e);
            let (Some(&first), Some(&last)) = (img.first(), img.last()) else {
                return Err(Error::InvalidMap(format!("image of {name} is empty")));
            };
            if !crate::words::is_reduced(img) {
                return Err(Error::InvalidMap(format!("image of {name} is not reduced")));
            }
            let start = graph.origin(first);
            if graph.walk(start, img).is_none() {
                return Err(Error::InvalidMap(format!("image of {name} is not an edge path")));
            }
            let (s, t) = graph.ends(e);
            for (v, w) in [(s, start), (t, graph.terminus(last))] {
                match vertex_images[v] {
                    Some(x) if x != w => {
                        return Err(Error::InvalidMap(format!("image of {name} breaks incidence at vertex {v}")))
                    }
                    _ => vertex_images[v] = Some(w),
                }
            }
        }
        let vertex_images = vertex_images
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::InvalidMap("isolated vertex".into()))?;
        Ok(GraphMap {
            graph,
            vertex_images,
            images,
        })
    }

    /// The map of the rose with edges `e_k = x_k` induced by `phi`.
    pub fn from_endomorphism(phi: &Endomorphism) -> Result<GraphMap> {
        GraphMap::new(
            TopGraph::rose(phi.basis().rank()),
            phi.images().iter().map(|w| w.letters().to_vec()).collect(),
        )
    }

    pub fn graph(&self) -> &TopGraph {
        &self.graph
    }

    pub fn images(&self) -> &[Vec<Letter>] {
        &self.images
    }

    pub fn vertex_image(&self, v: usize) -> usize {
        self.vertex_images[v]
    }

    /// The induced endomorphism, for rose maps.
    pub fn to_endomorphism(&self) -> Result<Endomorphism> {
        if !self.graph.is_rose() {
            return Err(Error::NotRose);
        }
        let basis = Basis::new(self.graph.edge_count())?;
        Endomorphism::new(
            self.images
                .iter()
                .map(|p| Word::new(p.iter().copied(), basis))
                .collect(),
        )
    }

    fn basis(&self) -> Result<Basis> {
        if !self.graph.is_rose() {
            return Err(Error::NotRose);
        }
        Basis::new(self.graph.edge_count())
    }

    /// Image of a path, reduced; the flag records any cancellation.
    pub fn apply_path(&self, path: &[Letter]) -> (Vec<Letter>, bool) {
        let mut out = Vec::new();
        let mut cancelled = false;
        for &l in path {
            let img = &self.images[l.generator()];
            if l.is_inverse() {
                for &x in img.iter().rev() {
                    cancelled |= push_reduced(&mut out, x.inverse());
                }
            } else {
                for &x in img {
                    cancelled |= push_reduced(&mut out, x);
                }
            }
        }
        (out, cancelled)
    }

    /// `f^n(e)` by repeated substitution, and whether any stage cancelled.
    pub fn iterate_edge(&self, e: usize, n: usize) -> (Vec<Letter>, bool) {
        self.iterate_path(&[Letter::new(e, false)], n)
    }

    pub fn iterate_path(&self, path: &[Letter], n: usize) -> (Vec<Letter>, bool) {
        let mut cur = path.to_vec();
        let mut cancelled = false;
        for _ in 0..n {
            let (next, c) = self.apply_path(&cur);
            cur = next;
            cancelled |= c;
        }
        (cur, cancelled)
    }

    /// `f^n`.
    pub fn power(&self, n: usize) -> GraphMap {
        let images = (0..self.graph.edge_count()).map(|e| self.iterate_edge(e, n).0).collect();
        GraphMap::new(self.graph.clone(), images).expect("iterates of a graph map are graph maps")
    }

    /// No edge iterate up to `n_max` cancels.
    pub fn is_train_track_up_to(&self, n_max: usize) -> bool {
        (0..self.graph.edge_count()).all(|e| {
            let mut cur = vec![Letter::new(e, false)];
            for _ in 0..n_max {
                let (next, cancelled) = self.apply_path(&cur);
                if cancelled {
                    return false;
                }
                cur = next;
            }
            true
        })
    }

    /// Images generate the whole group (for rose maps). A surjective
    /// endomorphism of a free group of finite rank is an automorphism.
    pub fn is_automorphism(&self) -> Result<bool> {
        let phi = self.to_endomorphism()?;
        Ok(fold(phi.images(), phi.basis()).index() == Index::Finite(1))
    }

    /// Least `p ≤ limit` such that every `f^p(e)` crosses every edge.
    pub fn crossing_power(&self, limit: usize) -> Result<usize> {
        let n = self.graph.edge_count();
        let mut iterates: Vec<Vec<Letter>> = (0..n).map(|e| vec![Letter::new(e, false)]).collect();
        for p in 1..=limit {
            iterates = iterates.iter().map(|path| self.apply_path(path).0).collect();
            let crosses_all = iterates.iter().all(|path| {
                let mut seen = vec![false; n];
                path.iter().for_each(|l| seen[l.generator()] = true);
                seen.into_iter().all(|s| s)
            });
            if crosses_all {
                return Ok(p);
            }
        }
        Err(Error::NoCrossingPower(limit))
    }

    /// Escape powers of every edge against every target.
    ///
    /// Targets of finite index are refused: a finite cover reads every path.
    pub fn escape_power(&self, targets: &[BasedGraph], window: usize, depth: usize) -> Result<EscapeReport> {
        let basis = self.basis()?;
        if let Some(i) = targets.iter().position(|t| t.index() != Index::Infinite) {
            return Err(Error::FiniteIndex(i));
        }
        let edges = self.graph.edge_count();
        let mut per_target = vec![vec![0; targets.len()]; edges];
        for (e, row) in per_target.iter_mut().enumerate() {
            let mut readable: Vec<Vec<bool>> = Vec::with_capacity(depth + window + 1);
            let mut cur = vec![Letter::new(e, false)];
            for n in 0..=depth + window {
                if n > 0 {
                    cur = self.apply_path(&cur).0;
                }
                let word = Word::new(cur.iter().copied(), basis);
                readable.push(targets.iter().map(|t| t.reads(&word)).collect());
            }
            for (t, slot) in row.iter_mut().enumerate() {
                *slot = (0..=depth)
                    .find(|&m| (m..=m + window).all(|n| !readable[n][t]))
                    .ok_or(Error::DepthExhausted(depth))?;
            }
        }
        let per_edge: Vec<usize> = per_target.iter().map(|r| r.iter().copied().max().unwrap_or(0)).collect();
        let m = per_edge.iter().copied().max().unwrap_or(0);
        Ok(EscapeReport {
            per_target,
            per_edge,
            m,
            window,
        })
    }

    /// Least `n ≤ limit` with `f^m(e)` or its inverse a subword of
    /// `f^n(seed)`; returns `(f^n(seed), n)`. The result is primitive when
    /// `f` is an automorphism.
    pub fn build_z(&self, seed: Letter, edge: usize, m: usize, limit: usize) -> Result<(Word, usize)> {
        let basis = self.basis()?;
        basis.check(seed)?;
        let target = Word::new(self.iterate_edge(edge, m).0, basis);
        let target_inv = target.inverse();
        let mut cur = vec![seed];
        for n in 0..=limit {
            if n > 0 {
                cur = self.apply_path(&cur).0;
            }
            let z = Word::new(cur.iter().copied(), basis);
            if z.contains(&target) || z.contains(&target_inv) {
                return Ok((z, n));
            }
        }
        Err(Error::DepthExhausted(limit))
    }

    /// Smallest `L'` such that every factor of length at most `l` occurring
    /// in `f^depth(e)` occurs in every window of length `L'` of it.
    pub fn quasiperiodicity_profile(&self, e: usize, l: usize, depth: usize) -> Result<usize> {
        if l == 0 {
            return Ok(0);
        }
        let s = self.iterate_edge(e, depth).0;
        if s.len() <= l {
            return Err(Error::InsufficientDepth);
        }
        let profile = window_profile(&s, l);
        if profile >= s.len() {
            return Err(Error::InsufficientDepth);
        }
        Ok(profile)
    }

    /// A conjugacy class of length at most `max_len` that may lie in a
    /// proper free factor and is fixed up to inversion by some `f^p` with
    /// `p ≤ max_period`, if one exists.
    ///
    /// Classes in a proper free factor have a Whitehead graph that is
    /// disconnected or has a cut vertex; only those classes are tested.
    pub fn periodic_class(&self, max_len: usize, max_period: usize) -> Result<Option<(CyclicWord, usize)>> {
        let phi = self.to_endomorphism()?;
        let basis = phi.basis();
        for w in reduced_words_up_to(basis, max_len) {
            if w.is_empty() || !w.is_cyclically_reduced() {
                continue;
            }
            let c = w.cyclic_reduce().0;
            if !whitehead_separable(&c) {
                continue;
            }
            let c_inv = c.inverse();
            let mut cur = w.clone();
            for p in 1..=max_period {
                cur = phi.apply(&cur);
                let image = cur.cyclic_reduce().0;
                if image.same_cycle(&c) || image.same_cycle(&c_inv) {
                    return Ok(Some((c, p)));
                }
            }
        }
        Ok(None)
    }

    pub fn parse(text_in: &str) -> Result<GraphMap> {
        let mut rank = None;
        let mut vertices = None;
        let mut base = None;
        let mut edges: Vec<(String, usize, usize)> = Vec::new();
        let mut image_lines: Vec<(usize, String, String)> = Vec::new();
        for line in text::lines(text_in) {
            match line.tokens[0] {
                "rank" => rank = Some(text::number::<usize>(line.number, line.tokens.get(1), "rank")?),
                "vertices" => vertices = Some(text::number::<usize>(line.number, line.tokens.get(1), "vertex count")?),
                "base" => base = Some(text::number::<usize>(line.number, line.tokens.get(1), "base")?),
                "edge" => {
                    if line.tokens.len() != 4 {
                        return Err(Error::parse(line.number, "expected `edge <name> <src> <dst>`"));
                    }
                    let s = text::number(line.number, line.tokens.get(2), "edge source")?;
                    let t = text::number(line.number, line.tokens.get(3), "edge target")?;
                    edges.push((line.tokens[1].to_string(), s, t));
                }
                "image" => {
                    let (lhs, rhs) = text::assignment(&line)?;
                    image_lines.push((line.number, lhs.to_string(), rhs.to_string()));
                }
                other => return Err(Error::parse(line.number, format!("unknown keyword {other:?}"))),
            }
        }
        if edges.is_empty() {
            let rank = rank.ok_or_else(|| Error::parse(0, "missing rank line"))?;
            let basis = Basis::new(rank)?;
            let mut images = vec![None; rank];
            for (n, lhs, rhs) in image_lines {
                let k = text::generator_name(n, &lhs)?;
                if k >= rank {
                    return Err(Error::parse(n, "image of a letter outside the rank"));
                }
                images[k] = Some(Word::parse(&rhs, basis).map_err(|e| Error::parse(n, e.to_string()))?);
            }
            let images = images
                .into_iter()
                .enumerate()
                .map(|(k, w)| w.ok_or_else(|| Error::InvalidMap(format!("no image for {}", basis.letter_name(k)))))
                .collect::<Result<Vec<_>>>()?;
            return GraphMap::from_endomorphism(&Endomorphism::new(images)?);
        }
        let vertices = vertices.ok_or_else(|| Error::parse(0, "missing vertices line"))?;
        let base = base.ok_or_else(|| Error::parse(0, "missing base line"))?;
        let graph = TopGraph::new(vertices, base, edges)?;
        let mut images = vec![None; graph.edge_count()];
        for (n, lhs, rhs) in image_lines {
            let e = graph
                .edge_index(&lhs)
                .ok_or_else(|| Error::parse(n, format!("unknown edge {lhs:?}")))?;
            images[e] = Some(graph.parse_path(&rhs).map_err(|err| Error::parse(n, err.to_string()))?);
        }
        let images = images
            .into_iter()
            .enumerate()
            .map(|(e, p)| p.ok_or_else(|| Error::InvalidMap(format!("no image for edge {}", graph.name(e)))))
            .collect::<Result<Vec<_>>>()?;
        GraphMap::new(graph, images)
    }
}

impl fmt::Display for GraphMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.graph == TopGraph::rose(self.graph.edge_count()) {
            let phi = self.to_endomorphism().map_err(|_| fmt::Error)?;
            writeln!(f, "rank {}", phi.basis().rank())?;
            for (k, w) in phi.images().iter().enumerate() {
                writeln!(f, "image {} = {}", phi.basis().letter_name(k), w)?;
            }
            return Ok(());
        }
        write!(f, "{}", self.graph)?;
        for (e, img) in self.images.iter().enumerate() {
            writeln!(f, "image {} = {}", self.graph.name(e), self.graph.format_path(img))?;
        }
        Ok(())
    }
}

/// Whitehead graph of a cyclic word: a vertex per letter, and an edge
/// `x -- y⁻¹` for each cyclically consecutive pair `x y`. True when the graph
/// is disconnected or has a cut vertex.
fn whitehead_separable(c: &CyclicWord) -> bool {
    let n = 2 * c.basis().rank();
    let mut adj = vec![Vec::new(); n];
    for i in 0..c.len() {
        let (x, y) = (c.at(i).slot(), c.at(i + 1).inverse().slot());
        adj[x].push(y);
        adj[y].push(x);
    }
    let connected_without = |skip: Option<usize>| {
        let start = (0..n).find(|&v| Some(v) != skip).expect("rank is positive");
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &t in &adj[v] {
                if !seen[t] && Some(t) != skip {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        (0..n).filter(|&v| Some(v) != skip).all(|v| seen[v])
    };
    !connected_without(None) || (n > 2 && (0..n).any(|v| !connected_without(Some(v))))
}

/// Smallest `L' ≥ l` such that every window of `s` of length `L'` contains
/// every factor of length at most `l` that occurs in `s`.
fn window_profile(s: &[Letter], l: usize) -> usize {
    let n = s.len();
    let mut positions: HashMap<&[Letter], Vec<usize>> = HashMap::new();
    for len in 1..=l.min(n) {
        for p in 0..=n - len {
            positions.entry(&s[p..p + len]).or_default().push(p);
        }
    }
    let mut best = l;
    for (v, ps) in positions {
        let len = v.len();
        // Windows starting at 0, right after each occurrence, and at the end.
        best = best.max(ps[0] + len);
        for pair in ps.windows(2) {
            best = best.max(pair[1] - pair[0] - 1 + len);
        }
        best = best.max(n - ps[ps.len() - 1]);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stallings::fold;

    fn fib() -> GraphMap {
        GraphMap::from_endomorphism(&Endomorphism::parse(&["ab", "a"]).unwrap()).unwrap()
    }

    fn b2() -> Basis {
        Basis::new(2).unwrap()
    }

    fn word(p: &[Letter]) -> String {
        Word::new(p.iter().copied(), b2()).to_string()
    }

    fn w(s: &str) -> Word {
        Word::parse(s, b2()).unwrap()
    }

    #[test]
    fn iterate_examples() {
        let f = fib();
        let (p, c) = f.iterate_edge(0, 2);
        assert_eq!((word(&p), c), ("aba".into(), false));
        assert_eq!(word(&f.iterate_edge(0, 3).0), "abaab");
        assert_eq!(word(&f.iterate_edge(1, 0).0), "b");
        // Semigroup law.
        let (p5, _) = f.iterate_edge(0, 5);
        let (p2, _) = f.iterate_edge(0, 2);
        assert_eq!(f.iterate_path(&p2, 3).0, p5);
    }

    #[test]
    fn train_track_examples() {
        assert!(fib().is_train_track_up_to(12));
        let id = GraphMap::from_endomorphism(&Endomorphism::identity(b2())).unwrap();
        assert!(id.is_train_track_up_to(5));
        // f(b·a) = bA·ab cancels.
        let bad = GraphMap::from_endomorphism(&Endomorphism::parse(&["ab", "bA"]).unwrap()).unwrap();
        assert!(!bad.is_train_track_up_to(3));
    }

    #[test]
    fn automorphism_examples() {
        assert!(fib().is_automorphism().unwrap());
        for images in [["a", "a"], ["ab", "ba"]] {
            let f = GraphMap::from_endomorphism(&Endomorphism::parse(&images).unwrap()).unwrap();
            assert!(!f.is_automorphism().unwrap());
        }
    }

    #[test]
    fn crossing_power_examples() {
        assert_eq!(fib().crossing_power(10), Ok(2));
        let id = GraphMap::from_endomorphism(&Endomorphism::identity(b2())).unwrap();
        assert_eq!(id.crossing_power(10), Err(Error::NoCrossingPower(10)));
        let full = GraphMap::from_endomorphism(&Endomorphism::parse(&["ab", "ba"]).unwrap()).unwrap();
        assert_eq!(full.crossing_power(10), Ok(1));
    }

    #[test]
    fn escape_power_examples() {
        let target = fold(&[w("a"), w("baB")], b2()).with_basepoint(&w("1"));
        let report = fib().escape_power(&[target], 5, 20).unwrap();
        assert_eq!(report.per_edge, vec![3, 4]);
        assert_eq!(report.m, 4);

        let rose = fold(&[w("a"), w("b")], b2()).with_basepoint(&w("1"));
        assert_eq!(fib().escape_power(&[rose], 5, 20), Err(Error::FiniteIndex(0)));
    }

    #[test]
    fn build_z_examples() {
        let f = fib();
        let a = Letter::new(0, false);
        let (z, n) = f.build_z(a, 0, 3, 10).unwrap();
        assert_eq!((z.to_string(), n), ("abaab".into(), 3));
        let (z, n) = f.build_z(a, 0, 0, 10).unwrap();
        assert_eq!((z.to_string(), n), ("a".into(), 0));
        let (z, n) = f.build_z(Letter::new(1, false), 0, 3, 10).unwrap();
        assert_eq!((z.to_string(), n), ("abaab".into(), 4));
        assert_eq!(f.build_z(Letter::new(1, false), 0, 5, 3), Err(Error::DepthExhausted(3)));
    }

    // Checks every window directly.
    fn brute_profile(s: &[Letter], l: usize) -> usize {
        let factors: Vec<&[Letter]> = (1..=l.min(s.len()))
            .flat_map(|len| s.windows(len))
            .collect();
        (l..=s.len())
            .find(|&lp| {
                s.windows(lp)
                    .all(|win| factors.iter().all(|f| win.windows(f.len()).any(|x| x == *f)))
            })
            .unwrap()
    }

    #[test]
    fn quasiperiodicity_examples() {
        let f = fib();
        assert_eq!(f.quasiperiodicity_profile(0, 1, 10), Ok(3));
        assert_eq!(f.quasiperiodicity_profile(0, 0, 10), Ok(0));
        assert_eq!(f.quasiperiodicity_profile(0, 1, 0), Err(Error::InsufficientDepth));
        assert_eq!(f.quasiperiodicity_profile(0, 3, 2), Err(Error::InsufficientDepth));
        let s = f.iterate_edge(0, 9).0;
        for l in 1..=4 {
            assert_eq!(window_profile(&s, l), brute_profile(&s, l), "L = {l}");
        }
    }

    #[test]
    fn periodic_classes() {
        assert_eq!(fib().periodic_class(4, 6).unwrap(), None);
        let swap = GraphMap::from_endomorphism(&Endomorphism::parse(&["b", "a"]).unwrap()).unwrap();
        let (c, p) = swap.periodic_class(2, 3).unwrap().unwrap();
        assert_eq!((c.to_string(), p), ("a".into(), 2));
        // The commutator class is fixed by every automorphism of F2 but its
        // Whitehead graph is a 4-cycle.
        assert!(!whitehead_separable(&CyclicWord::parse("abAB", b2()).unwrap()));
        assert!(whitehead_separable(&CyclicWord::parse("ab", b2()).unwrap()));
        assert!(whitehead_separable(&CyclicWord::parse("aab", b2()).unwrap()));
    }

    #[test]
    fn map_validation_and_files() {
        let f = fib();
        assert_eq!(f.to_string(), "rank 2\nimage x1 = ab\nimage x2 = a\n");
        assert_eq!(GraphMap::parse(&f.to_string()).unwrap(), f);

        let g = TopGraph::new(2, 0, vec![("p".into(), 0, 1), ("q".into(), 1, 0), ("s".into(), 0, 0)]).unwrap();
        let text = format!("{g}image p = s p\nimage q = q s\nimage s = p q\n");
        let m = GraphMap::parse(&text).unwrap();
        assert_eq!(m.vertex_image(1), 1);
        assert_eq!(GraphMap::parse(&m.to_string()).unwrap(), m);
        assert_eq!(m.to_endomorphism(), Err(Error::NotRose));

        let broken = text.replace("image q = q s", "image q = s q");
        assert!(matches!(GraphMap::parse(&broken), Err(Error::InvalidMap(_))));
        let empty = Endomorphism::parse(&["1", "a"]).unwrap();
        assert!(matches!(GraphMap::from_endomorphism(&empty), Err(Error::InvalidMap(_))));
    }
}

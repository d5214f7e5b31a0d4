use std::fmt;

use rand::Rng;

use crate::dynamics::GraphMap;
use crate::error::{Error, Result};
use crate::sample;
use crate::stallings::{fold, invert, Index, PowerBound};
use crate::text;
use crate::words::{Basis, CyclicWord, Endomorphism, Letter, Word};

/// A coset `g·H` given by its tail `g` and generators of `H`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CosetSpec {
    pub tail: Word,
    pub generators: Vec<Word>,
}

impl CosetSpec {
    pub fn new(tail: Word, generators: Vec<Word>) -> CosetSpec {
        CosetSpec { tail, generators }
    }

    /// `tail` is a word; `generators` is a comma-separated list.
    pub fn parse(tail: &str, generators: &str, basis: Basis) -> Result<CosetSpec> {
        let tail = Word::parse(tail, basis)?;
        let generators = generators
            .split(',')
            .map(str::trim)
            .filter(|g| !g.is_empty())
            .map(|g| Word::parse(g, basis))
            .collect::<Result<_>>()?;
        Ok(CosetSpec { tail, generators })
    }

    /// One coset per line, `tail ; g1, g2, ...`; `#` starts a comment.
    pub fn parse_list(text_in: &str, basis: Basis) -> Result<Vec<CosetSpec>> {
        text::lines(text_in)
            .map(|line| {
                let content = text_in
                    .lines()
                    .nth(line.number - 1)
                    .and_then(|raw| raw.split('#').next())
                    .unwrap_or("");
                let (tail, gens) = content
                    .split_once(';')
                    .ok_or_else(|| Error::parse(line.number, "expected `tail ; generators`"))?;
                CosetSpec::parse(tail.trim(), gens, basis).map_err(|e| Error::parse(line.number, e.to_string()))
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CertificateLimits {
    pub crossing_limit: usize,
    pub window: usize,
    pub escape_depth: usize,
    pub z_limit: usize,
}

impl Default for CertificateLimits {
    fn default() -> Self {
        CertificateLimits {
            crossing_limit: 10,
            window: 5,
            escape_depth: 20,
            z_limit: 40,
        }
    }
}

/// Per-coset bounds: `linear` for paths in the based graph, `bound` for
/// cyclically reduced coset elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CosetBound {
    pub linear: usize,
    pub bound: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    /// The train-track automorphism `f` the certificate was built from.
    pub map: Endomorphism,
    pub crossing_power: usize,
    pub window: usize,
    /// Escape power per edge.
    pub escape: Vec<usize>,
    pub escape_m: usize,
    /// `n` with `z = f^n(x1)`.
    pub z_power: usize,
    pub cosets: Vec<CosetBound>,
}

/// `z` is the image of a basis letter under `phi`, so it belongs to the
/// basis `{phi(x_k)}`; every cyclically reduced coset element, written in
/// that basis, has runs of `z^{±1}` of length at most `m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PropertyWCertificate {
    pub z: Word,
    pub phi: Endomorphism,
    pub m: usize,
    pub provenance: Provenance,
}

impl PropertyWCertificate {
    /// The basis letter `x_k` with `phi(x_k) = z`.
    pub fn z_letter(&self) -> Option<Letter> {
        self.phi
            .images()
            .iter()
            .position(|w| *w == self.z)
            .map(|k| Letter::new(k, false))
    }

    pub fn parse(text_in: &str) -> Result<PropertyWCertificate> {
        let mut phi_lines: Vec<(usize, usize, String)> = Vec::new();
        let mut z_text = None;
        let mut m = None;
        for line in text::lines(text_in) {
            match line.tokens[0] {
                "z" => z_text = Some((line.number, line.rest.to_string())),
                "M" => m = Some(text::number::<usize>(line.number, line.tokens.get(1), "bound M")?),
                "phi" => {
                    let (lhs, rhs) = text::assignment(&line)?;
                    phi_lines.push((line.number, text::generator_name(line.number, lhs)?, rhs.to_string()));
                }
                other => return Err(Error::parse(line.number, format!("unknown keyword {other:?}"))),
            }
        }
        let basis = Basis::new(phi_lines.len())?;
        let phi = images_from_lines(basis, phi_lines, "phi")?;
        let (zn, zt) = z_text.ok_or_else(|| Error::parse(0, "missing z line"))?;
        let z = Word::parse(&zt, basis).map_err(|e| Error::parse(zn, e.to_string()))?;
        let m = m.ok_or_else(|| Error::parse(0, "missing M line"))?;

        let mut map_lines = Vec::new();
        let mut crossing_power = None;
        let mut window = None;
        let mut escape = None;
        let mut escape_m = None;
        let mut z_power = None;
        let mut cosets = Vec::new();
        for (n, body) in text::comments(text_in) {
            let tokens: Vec<&str> = body.split_whitespace().collect();
            let num = |k: usize, what: &str| text::number::<usize>(n, tokens.get(k), what);
            match tokens.first().copied() {
                Some("map") => {
                    let rest = body["map".len()..].trim();
                    let (lhs, rhs) = rest.split_once('=').ok_or_else(|| Error::parse(n, "expected `=`"))?;
                    map_lines.push((n, text::generator_name(n, lhs.trim())?, rhs.trim().to_string()));
                }
                Some("crossing_power") => crossing_power = Some(num(1, "crossing power")?),
                Some("window") => window = Some(num(1, "window")?),
                Some("escape") => {
                    escape = Some((1..tokens.len()).map(|k| num(k, "escape power")).collect::<Result<Vec<_>>>()?)
                }
                Some("escape_m") => escape_m = Some(num(1, "escape power")?),
                Some("z_power") => z_power = Some(num(1, "power of f")?),
                Some("coset") => {
                    if tokens.get(2) != Some(&"linear") || tokens.get(4) != Some(&"bound") {
                        return Err(Error::parse(n, "expected `coset <k> linear <n> bound <n>`"));
                    }
                    let k = num(1, "coset number")?;
                    if k != cosets.len() + 1 {
                        return Err(Error::parse(n, "coset lines out of order"));
                    }
                    cosets.push(CosetBound {
                        linear: num(3, "linear bound")?,
                        bound: num(5, "bound")?,
                    });
                }
                _ => {}
            }
        }
        let missing = |what: &str| Error::parse(0, format!("missing provenance comment `{what}`"));
        let provenance = Provenance {
            map: images_from_lines(basis, map_lines, "map")?,
            crossing_power: crossing_power.ok_or_else(|| missing("crossing_power"))?,
            window: window.ok_or_else(|| missing("window"))?,
            escape: escape.ok_or_else(|| missing("escape"))?,
            escape_m: escape_m.ok_or_else(|| missing("escape_m"))?,
            z_power: z_power.ok_or_else(|| missing("z_power"))?,
            cosets,
        };
        Ok(PropertyWCertificate { z, phi, m, provenance })
    }
}

fn images_from_lines(basis: Basis, lines: Vec<(usize, usize, String)>, what: &str) -> Result<Endomorphism> {
    let mut images = vec![None; basis.rank()];
    for (n, k, rhs) in lines {
        if k >= basis.rank() {
            return Err(Error::parse(n, format!("{what} image outside the rank")));
        }
        images[k] = Some(Word::parse(&rhs, basis).map_err(|e| Error::parse(n, e.to_string()))?);
    }
    let images = images
        .into_iter()
        .enumerate()
        .map(|(k, w)| w.ok_or_else(|| Error::parse(0, format!("missing {what} image of {}", basis.letter_name(k)))))
        .collect::<Result<Vec<_>>>()?;
    Endomorphism::new(images)
}

impl fmt::Display for PropertyWCertificate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let p = &self.provenance;
        let basis = p.map.basis();
        for (k, w) in p.map.images().iter().enumerate() {
            writeln!(f, "# map {} = {}", basis.letter_name(k), w)?;
        }
        writeln!(f, "# crossing_power {}", p.crossing_power)?;
        writeln!(f, "# window {}", p.window)?;
        let escape: Vec<String> = p.escape.iter().map(usize::to_string).collect();
        writeln!(f, "# escape {}", escape.join(" "))?;
        writeln!(f, "# escape_m {}", p.escape_m)?;
        writeln!(f, "# z_power {}", p.z_power)?;
        for (k, c) in p.cosets.iter().enumerate() {
            writeln!(f, "# coset {} linear {} bound {}", k + 1, c.linear, c.bound)?;
        }
        writeln!(f, "z {}", self.z)?;
        for (k, w) in self.phi.images().iter().enumerate() {
            writeln!(f, "phi {} = {}", self.phi.basis().letter_name(k), w)?;
        }
        writeln!(f, "M {}", self.m)
    }
}

/// Builds a certificate from a train-track automorphism `f` of the rose.
///
/// Every subgroup must have infinite index. Escape powers are taken for
/// `f` against the based graphs of the cosets; `z = f^n(x1)` contains the
/// escaping segment of `x1`, and `phi = f^n`. Each coset is then refolded in
/// the basis `{phi(x_k)}` and its `x1`-runs bounded exactly.
pub fn propw_certificate(
    cosets: &[CosetSpec],
    f: &GraphMap,
    limits: CertificateLimits,
) -> Result<PropertyWCertificate> {
    let map = f.to_endomorphism()?;
    let basis = map.basis();
    for c in cosets {
        if let Some(w) = std::iter::once(&c.tail).chain(&c.generators).find(|w| w.basis() != basis) {
            return Err(Error::BasisMismatch(basis.rank(), w.basis().rank()));
        }
    }
    let graphs: Vec<_> = cosets.iter().map(|c| fold(&c.generators, basis)).collect();
    if let Some(i) = graphs.iter().position(|g| g.index() != Index::Infinite) {
        return Err(Error::FiniteIndex(i));
    }
    if !f.is_automorphism()? {
        return Err(Error::NotAutomorphism);
    }
    let crossing_power = f.crossing_power(limits.crossing_limit)?;
    let targets: Vec<_> = graphs
        .iter()
        .zip(cosets)
        .map(|(g, c)| g.with_basepoint(&c.tail.inverse()))
        .collect();
    let escape = f.escape_power(&targets, limits.window, limits.escape_depth)?;
    let seed = Letter::new(0, false);
    let (z, z_power) = f.build_z(seed, 0, escape.m, limits.z_limit)?;
    let phi = map.power(z_power);
    let phi_inv = invert(&phi)?;
    let z_b = Word::letter(seed, basis);
    let mut bounds = Vec::with_capacity(cosets.len());
    for (i, c) in cosets.iter().enumerate() {
        let gens: Vec<Word> = c.generators.iter().map(|h| phi_inv.apply(h)).collect();
        let graph = fold(&gens, basis);
        let tail = phi_inv.apply(&c.tail).inverse();
        let linear = graph.with_basepoint(&tail).combined().power_bound(&z_b);
        let cyclic = graph.coset_power_bound(&tail, &z_b);
        match (linear, cyclic) {
            (PowerBound::Bounded(linear), PowerBound::Bounded(bound)) => bounds.push(CosetBound { linear, bound }),
            _ => return Err(Error::Unbounded(i)),
        }
    }
    let m = bounds.iter().map(|b| b.bound).max().unwrap_or(0);
    Ok(PropertyWCertificate {
        z,
        phi,
        m,
        provenance: Provenance {
            map,
            crossing_power,
            window: limits.window,
            escape: escape.per_edge,
            escape_m: escape.m,
            z_power,
            cosets: bounds,
        },
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub coset: usize,
    /// The sampled subgroup element, in the original basis.
    pub h: Word,
    /// `[[g·h]]` in the certificate basis.
    pub element: CyclicWord,
    pub run: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PropertyWReport {
    /// Samples kept per coset.
    pub checked: Vec<usize>,
    /// Longest `z`-run seen per coset.
    pub max_run: Vec<usize>,
    pub violations: Vec<Violation>,
}

impl PropertyWReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Samples `h` in each `H_i` as random products of its generators, keeps
/// those whose `[[g_i h]]` has length at most `max_len` in the certificate
/// basis, and checks their `z`-runs against `M`.
pub fn check_property_w(
    cosets: &[CosetSpec],
    cert: &PropertyWCertificate,
    samples: usize,
    max_len: usize,
    seed: u64,
) -> Result<PropertyWReport> {
    let z = cert
        .z_letter()
        .ok_or_else(|| Error::InvalidArgument("z is not an image of a basis letter under phi".into()))?;
    let basis = cert.phi.basis();
    let z_cyclic = CyclicWord::new([z], basis);
    let phi_inv = invert(&cert.phi)?;
    let mut rng = sample::rng(seed);
    let mut report = PropertyWReport::default();
    for (i, c) in cosets.iter().enumerate() {
        let gens_b: Vec<Word> = c.generators.iter().map(|h| phi_inv.apply(h)).collect();
        let tail_b = phi_inv.apply(&c.tail);
        let shortest = gens_b.iter().map(Word::len).filter(|&n| n > 0).min();
        let max_factors = shortest.map_or(0, |s| max_len / s + 2);
        let (mut kept, mut attempts, mut max_run) = (0, 0, 0);
        while kept < samples && attempts < 100 * samples.max(1) {
            attempts += 1;
            let factors = if c.generators.is_empty() { 0 } else { rng.gen_range(0..=max_factors) };
            let mut h = Word::identity(basis);
            let mut h_b = Word::identity(basis);
            for _ in 0..factors {
                let k = rng.gen_range(0..c.generators.len());
                if rng.gen() {
                    h = h.mul(&c.generators[k]);
                    h_b = h_b.mul(&gens_b[k]);
                } else {
                    h = h.mul(&c.generators[k].inverse());
                    h_b = h_b.mul(&gens_b[k].inverse());
                }
            }
            let element = tail_b.mul(&h_b).cyclic_reduce().0;
            if element.len() > max_len {
                continue;
            }
            kept += 1;
            let run = element.max_power_run(&z_cyclic);
            max_run = max_run.max(run);
            if run > cert.m {
                report.violations.push(Violation {
                    coset: i,
                    h,
                    element,
                    run,
                });
            }
        }
        report.checked.push(kept);
        report.max_run.push(max_run);
    }
    Ok(report)
}

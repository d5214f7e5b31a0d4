use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use freerig::dynamics::GraphMap;
use freerig::metric::{decimal, spectra_agree};
use freerig::rigidity::{
    check_property_w, convergence_csv, convergence_row, propw_certificate, rigidity_distinguisher,
    CertificateLimits, CosetSpec, Distinction, PropertyWCertificate, WitnessFamily,
};
use freerig::stallings::{parse_graph_file, rebase};
use freerig::words::{reduced_words_up_to, Basis, Letter};
use freerig::{fold, BasedGraph, CoreGraph, MarkedMetricGraph, Rational, Word};

#[derive(Parser)]
#[command(name = "freerig", version, about = "Exact computations in free groups")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Seed for sampled reports.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for independent rows.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Write CSV output to this file instead of stdout.
    #[arg(long, global = true)]
    csv: Option<PathBuf>,
}

/// Rank of the free group; inferred from the words when omitted.
#[derive(Args, Clone, Copy)]
struct Rank {
    #[arg(short = 'r', long = "rank")]
    rank: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Freely reduce a word.
    Reduce {
        word: String,
        #[command(flatten)]
        rank: Rank,
    },
    /// Cyclic reduction and the conjugator.
    Cyclic {
        word: String,
        #[command(flatten)]
        rank: Rank,
    },
    /// Occurrences of `v` and `v⁻¹` in the cyclic word `g`.
    Count {
        g: String,
        v: String,
        #[command(flatten)]
        rank: Rank,
    },
    /// Fold a comma-separated generator list into its core graph.
    Fold {
        generators: String,
        /// Attach a bridge for the coset with this tail.
        #[arg(long)]
        tail: Option<String>,
        #[command(flatten)]
        rank: Rank,
    },
    /// Index of the subgroup of a graph file.
    Index { graph: PathBuf },
    /// Whether a word lies in the subgroup of a graph file.
    Member { graph: PathBuf, word: String },
    /// Whether a word spells a path somewhere in a graph file.
    Reads { graph: PathBuf, word: String },
    /// Fold `phi⁻¹(H)`, the subgroup in the basis `{phi(x_k)}`.
    Rebase {
        generators: String,
        #[arg(long)]
        map: PathBuf,
    },
    /// Largest run of `z` readable in a graph file, or in a coset with `-w`.
    Powbound {
        graph: PathBuf,
        #[arg(short = 'z')]
        z: String,
        /// Coset tail.
        #[arg(short = 'w')]
        tail: Option<String>,
    },
    /// Translation length of a word in a tree.
    Length {
        word: String,
        #[arg(long)]
        tree: String,
    },
    /// Compare two trees on all cyclically reduced words of length at most `-L`.
    Spectra {
        #[arg(long, num_args = 1, required = true)]
        tree: Vec<String>,
        #[arg(short = 'L', default_value_t = 4)]
        max_len: usize,
    },
    /// Iterate a graph map on an edge path (a word for rose maps).
    Iterate {
        path: String,
        #[arg(long)]
        map: PathBuf,
        #[arg(short = 'i', default_value = "1")]
        i: String,
    },
    /// Escape powers of every edge against the based graphs of a coset file.
    Escape {
        cosets: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(short = 'L', long, default_value_t = 5)]
        window: usize,
        #[arg(long, default_value_t = 20)]
        depth: usize,
    },
    /// The word `z = f^n(x1)` containing `f^m(x1)`.
    Buildz {
        #[arg(long)]
        map: PathBuf,
        /// Escape power `m`.
        #[arg(short = 'i')]
        m: usize,
        #[arg(long, default_value_t = 40)]
        limit: usize,
    },
    /// Property 𝒲 certificate for the cosets of a coset file.
    Certify {
        cosets: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(short = 'L', long, default_value_t = 5)]
        window: usize,
    },
    /// Sample coset elements and check them against a certificate.
    Checkw {
        cosets: PathBuf,
        certificate: PathBuf,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long, default_value_t = 40)]
        max_len: usize,
    },
    /// Witness words `w_i` for `u` in the normal closure of `r`.
    Witness {
        #[arg(short = 'u')]
        u: String,
        #[arg(short = 'r')]
        relator: String,
        #[arg(short = 'i', default_value = "1")]
        i: String,
        /// Coset tail `g`; prints `[[g·w_i]]`.
        #[arg(short = 'w')]
        tail: Option<String>,
        #[arg(long)]
        rank: Option<usize>,
    },
    /// CSV of `d_i`, `λ_i` and `gap_i` per tree.
    Converge {
        #[arg(short = 'u')]
        u: String,
        #[arg(short = 'r')]
        relator: String,
        #[arg(short = 'L', default_value_t = 1)]
        window: usize,
        /// Index or inclusive range `a..b`.
        #[arg(short = 'i', default_value = "1..10")]
        i: String,
        #[arg(long, required = true)]
        tree: Vec<String>,
        #[arg(short = 'w')]
        tail: Option<String>,
    },
    /// An element of the normal closure of `r` with different lengths in two trees.
    Distinguish {
        #[arg(short = 'r')]
        relator: String,
        #[arg(long, num_args = 1, required = true)]
        tree: Vec<String>,
        #[arg(short = 'i', default_value_t = 50)]
        i_max: usize,
        #[arg(short = 'L', default_value_t = 4)]
        u_len: usize,
    },
}

enum Failure {
    Domain(freerig::Error),
    Io(PathBuf, std::io::Error),
    Violations(usize),
}

impl From<freerig::Error> for Failure {
    fn from(e: freerig::Error) -> Self {
        Failure::Domain(e)
    }
}

impl Failure {
    fn code(&self) -> &'static str {
        match self {
            Failure::Domain(e) => e.code(),
            Failure::Io(..) => "io",
            Failure::Violations(_) => "violations",
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Domain(e) => e.to_string(),
            Failure::Io(p, e) => format!("{}: {e}", p.display()),
            Failure::Violations(n) => format!("{n} sampled elements exceed the certified bound"),
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(path.to_path_buf(), e))
}

fn basis_for(rank: Option<usize>, texts: &[&str]) -> Result<Basis, Failure> {
    if let Some(rank) = rank {
        return Ok(Basis::new(rank)?);
    }
    let inferred = Basis::for_text(&texts.concat())?;
    Ok(Basis::new(inferred.rank().max(2))?)
}

impl Global {
    fn emit_csv(&self, csv: String) -> Outcome {
        match &self.csv {
            Some(path) => {
                std::fs::write(path, &csv).map_err(|e| Failure::Io(path.clone(), e))?;
                Ok(format!("# wrote {}\n", path.display()))
            }
            None => Ok(csv),
        }
    }
}

fn word(text: &str, basis: Basis) -> Result<Word, Failure> {
    Ok(Word::parse(text, basis)?)
}

fn word_list(text: &str, basis: Basis) -> Result<Vec<Word>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| word(t, basis))
        .collect()
}

fn tree(spec: &str) -> Result<MarkedMetricGraph, Failure> {
    if spec.starts_with("rose:") {
        return Ok(MarkedMetricGraph::parse_rose_spec(spec)?);
    }
    Ok(MarkedMetricGraph::parse(&read(Path::new(spec))?)?)
}

fn graph_map(path: &Path) -> Result<GraphMap, Failure> {
    Ok(GraphMap::parse(&read(path)?)?)
}

/// The combined graph of a graph file: the core, or core plus bridge.
fn graph_file(path: &Path) -> Result<(CoreGraph, Option<BasedGraph>), Failure> {
    let (core, bridge) = parse_graph_file(&read(path)?)?;
    let based = bridge.map(|b| BasedGraph::new(core.clone(), b)).transpose()?;
    Ok((core, based))
}

fn cosets(path: &Path, basis: Basis) -> Result<Vec<CosetSpec>, Failure> {
    Ok(CosetSpec::parse_list(&read(path)?, basis)?)
}

/// `7` or the inclusive range `1..200`.
fn indices(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Domain(freerig::Error::InvalidArgument(format!("invalid index or range {text:?}")));
    let parse = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    let (lo, hi) = match text.split_once("..") {
        Some((a, b)) => (parse(a)?, parse(b)?),
        None => {
            let i = parse(text)?;
            (i, i)
        }
    };
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok((lo..=hi).collect())
}

fn two_trees(specs: &[String]) -> Result<(MarkedMetricGraph, MarkedMetricGraph), Failure> {
    match specs {
        [a, b] => Ok((tree(a)?, tree(b)?)),
        _ => Err(Failure::Domain(freerig::Error::InvalidArgument(
            "exactly two --tree values are required".into(),
        ))),
    }
}

fn run(cli: Cli) -> Outcome {
    let g = &cli.global;
    let mut out = String::new();
    match &cli.command {
        Command::Reduce { word: w, rank } => {
            let basis = basis_for(rank.rank, &[w])?;
            writeln!(out, "{}", word(w, basis)?).unwrap();
        }
        Command::Cyclic { word: w, rank } => {
            let basis = basis_for(rank.rank, &[w])?;
            let (c, conj) = word(w, basis)?.cyclic_reduce();
            writeln!(out, "{}\nconjugator {conj}", c.to_word()).unwrap();
        }
        Command::Count { g: gw, v, rank } => {
            let basis = basis_for(rank.rank, &[gw, v])?;
            let c = word(gw, basis)?.cyclic_reduce().0;
            writeln!(out, "{}", c.count_occurrences(&word(v, basis)?)?).unwrap();
        }
        Command::Fold { generators, tail, rank } => {
            let basis = basis_for(rank.rank, &[generators, tail.as_deref().unwrap_or("")])?;
            let graph = fold(&word_list(generators, basis)?, basis);
            match tail {
                Some(t) => write!(out, "{}", graph.with_basepoint(&word(t, basis)?)).unwrap(),
                None => write!(out, "{graph}").unwrap(),
            }
        }
        Command::Index { graph } => {
            let (core, _) = graph_file(graph)?;
            writeln!(out, "{}", core.index()).unwrap();
        }
        Command::Member { graph, word: w } => {
            let (core, based) = graph_file(graph)?;
            let graph = based.as_ref().map_or(&core, |b| b.combined());
            writeln!(out, "{}", graph.contains(&word(w, core.basis())?)).unwrap();
        }
        Command::Reads { graph, word: w } => {
            let (core, based) = graph_file(graph)?;
            let p = word(w, core.basis())?;
            let reads = based.as_ref().map_or_else(|| core.reads(&p), |b| b.reads(&p));
            writeln!(out, "{reads}").unwrap();
        }
        Command::Rebase { generators, map } => {
            let phi = graph_map(map)?.to_endomorphism()?;
            let gens = word_list(generators, phi.basis())?;
            write!(out, "{}", rebase(&gens, &phi)?).unwrap();
        }
        Command::Powbound { graph, z, tail } => {
            let (core, based) = graph_file(graph)?;
            let z = word(z, core.basis())?;
            let bound = match tail {
                Some(t) => core.coset_power_bound(&word(t, core.basis())?, &z),
                None => based.as_ref().map_or(&core, |b| b.combined()).power_bound(&z),
            };
            writeln!(out, "{bound}").unwrap();
        }
        Command::Length { word: w, tree: t } => {
            let t = tree(t)?;
            let len = t.translation_length(&word(w, t.basis())?);
            writeln!(out, "{len} {}", decimal(&len)).unwrap();
        }
        Command::Spectra { tree: specs, max_len } => {
            let (t1, t2) = two_trees(specs)?;
            if t1.basis() != t2.basis() {
                return Err(freerig::Error::BasisMismatch(t1.basis().rank(), t2.basis().rank()).into());
            }
            let sigma: Vec<Word> = reduced_words_up_to(t1.basis(), *max_len)
                .into_iter()
                .filter(|w| !w.is_empty() && w.is_cyclically_reduced())
                .collect();
            if spectra_agree(&t1, &t2, &sigma, &Rational::from_integer(0.into())) {
                writeln!(out, "agree {}", sigma.len()).unwrap();
            } else {
                let w = sigma
                    .iter()
                    .find(|w| t1.translation_length(w) != t2.translation_length(w))
                    .expect("spectra differ somewhere");
                writeln!(out, "differ {w} {} {}", t1.translation_length(w), t2.translation_length(w)).unwrap();
            }
        }
        Command::Iterate { path, map, i } => {
            let f = graph_map(map)?;
            let letters = match f.graph().parse_path(path) {
                Ok(p) => p,
                Err(e) => match f.to_endomorphism() {
                    Ok(phi) => word(path, phi.basis())?.letters().to_vec(),
                    Err(_) => return Err(e.into()),
                },
            };
            let rose_words = f.to_endomorphism().ok().map(|phi| phi.basis());
            for n in indices(i)? {
                let (image, cancelled) = f.iterate_path(&letters, n);
                let shown = match rose_words {
                    Some(b) => Word::new(image, b).to_string(),
                    None => f.graph().format_path(&image),
                };
                let note = if cancelled { " cancelled" } else { "" };
                writeln!(out, "{n} {shown}{note}").unwrap();
            }
        }
        Command::Escape { cosets: path, map, window, depth } => {
            let f = graph_map(map)?;
            let phi = f.to_endomorphism()?;
            let specs = cosets(path, phi.basis())?;
            let targets: Vec<BasedGraph> = specs
                .iter()
                .map(|c| fold(&c.generators, phi.basis()).with_basepoint(&c.tail.inverse()))
                .collect();
            let report = f.escape_power(&targets, *window, *depth)?;
            for (e, m) in report.per_edge.iter().enumerate() {
                let per: Vec<String> = report.per_target[e].iter().map(usize::to_string).collect();
                writeln!(out, "edge {} {m} targets {}", f.graph().name(e), per.join(" ")).unwrap();
            }
            writeln!(out, "m {}\nwindow {}", report.m, report.window).unwrap();
        }
        Command::Buildz { map, m, limit } => {
            let f = graph_map(map)?;
            let (z, n) = f.build_z(Letter::new(0, false), 0, *m, *limit)?;
            writeln!(out, "z {z}\nn {n}").unwrap();
        }
        Command::Certify { cosets: path, map, window } => {
            let f = graph_map(map)?;
            let phi = f.to_endomorphism()?;
            let specs = cosets(path, phi.basis())?;
            let limits = CertificateLimits { window: *window, ..CertificateLimits::default() };
            write!(out, "{}", propw_certificate(&specs, &f, limits)?).unwrap();
        }
        Command::Checkw { cosets: path, certificate, samples, max_len } => {
            let cert = PropertyWCertificate::parse(&read(certificate)?)?;
            let specs = cosets(path, cert.phi.basis())?;
            let report = check_property_w(&specs, &cert, *samples, *max_len, g.seed)?;
            writeln!(out, "# seed {}", g.seed).unwrap();
            writeln!(out, "M {}", cert.m).unwrap();
            for (k, (n, run)) in report.checked.iter().zip(&report.max_run).enumerate() {
                writeln!(out, "coset {} checked {n} max_run {run}", k + 1).unwrap();
            }
            for v in &report.violations {
                writeln!(out, "violation coset {} h {} element {} run {}", v.coset + 1, v.h, v.element.to_word(), v.run)
                    .unwrap();
            }
            writeln!(out, "violations {}", report.violations.len()).unwrap();
            if !report.passed() {
                print!("{out}");
                return Err(Failure::Violations(report.violations.len()));
            }
        }
        Command::Witness { u, relator, i, tail, rank } => {
            let basis = basis_for(*rank, &[u, relator, tail.as_deref().unwrap_or("")])?;
            let family = witness_family(basis, u, relator, tail.as_deref())?;
            let c: Vec<String> = family.connectors().iter().map(Word::to_string).collect();
            writeln!(out, "connectors {}", c.join(" ")).unwrap();
            for n in indices(i)? {
                writeln!(out, "{n} {}", family.witness(n)?.to_word()).unwrap();
            }
        }
        Command::Converge { u, relator, window, i, tree: specs, tail } => {
            let trees = specs.iter().map(|s| tree(s)).collect::<Result<Vec<_>, _>>()?;
            let basis = trees[0].basis();
            let family = witness_family(basis, u, relator, tail.as_deref())?;
            let is = indices(i)?;
            let compute = || {
                is.par_iter()
                    .map(|&n| convergence_row(&family, *window, n, &trees))
                    .collect::<Result<Vec<_>, _>>()
            };
            let rows = match g.jobs {
                Some(k) => rayon::ThreadPoolBuilder::new()
                    .num_threads(k)
                    .build()
                    .map_err(|e| freerig::Error::InvalidArgument(e.to_string()))?
                    .install(compute)?,
                None => compute()?,
            };
            writeln!(out, "# seed {}", g.seed).unwrap();
            out.push_str(&g.emit_csv(convergence_csv(&rows))?);
        }
        Command::Distinguish { relator, tree: specs, i_max, u_len } => {
            let (t1, t2) = two_trees(specs)?;
            let r = word(relator, t1.basis())?;
            writeln!(out, "# seed {}", g.seed).unwrap();
            match rigidity_distinguisher(&t1, &t2, &r, *i_max, *u_len)? {
                Distinction::Found { family, i, witness, lengths } => {
                    writeln!(out, "u {}\ni {i}\nwitness {}", family.u().to_word(), witness.to_word()).unwrap();
                    writeln!(out, "lengths {} {}", lengths.0, lengths.1).unwrap();
                }
                Distinction::AgreeUpTo { u_search_length, i_max } => {
                    writeln!(out, "agree u_len {u_search_length} i_max {i_max}").unwrap();
                }
            }
        }
    }
    Ok(out)
}

fn witness_family(basis: Basis, u: &str, r: &str, tail: Option<&str>) -> Result<WitnessFamily, Failure> {
    let (u, r) = (word(u, basis)?, word(r, basis)?);
    Ok(match tail {
        Some(t) => WitnessFamily::find_for_coset(&word(t, basis)?, &u, &r)?,
        None => WitnessFamily::find(&u, &r)?,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{out}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("error: {}", f.code());
            eprintln!("{}", f.message());
            ExitCode::from(1)
        }
    }
}

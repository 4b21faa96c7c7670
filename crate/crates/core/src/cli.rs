//! The `colred` command line. Every run writes its artifacts to
//! `<out>/<hash>/`, where `hash` is a digest of the parsed configuration, so
//! identical invocations land in (and reproduce) the same directory.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::algos::{self, ReductionProgram};
use crate::bounds::{self, families, IndSetFamily, Mode};
use crate::chromatic::{self, Colorability};
use crate::graph::{self, Adjacency, ColoredGraph};
use crate::nbhd::{self, BuildLimits, Family, NbhdGraph, Pair};
use crate::sim;
use crate::view::Delivery;

#[derive(Parser, Debug, Serialize)]
#[command(name = "colred", version, about = "Color reduction experiments: simulation, neighborhood graphs, lower-bound refuters")]
pub struct Cli {
    /// Directory that receives one subdirectory per run.
    #[arg(long, global = true, default_value = "runs")]
    pub out: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug, Serialize)]
pub enum Command {
    /// Run a color reduction program on a generated or loaded tree.
    #[command(alias = "simulate")]
    Color(ColorArgs),
    /// Build a neighborhood graph and report its size.
    Build(HostArgs),
    /// Bound or compute the chromatic number of a neighborhood graph.
    Chi(ChiArgs),
    /// Construct a vertex outside every given color class.
    Refute(RefuteArgs),
    /// Build and verify one of the homomorphisms h_r, f_r.
    VerifyHom(HomArgs),
    /// Evaluate the round lower bound for C·Δ^(1+η) colors.
    Bound(BoundArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum Algo {
    /// One Linial round.
    Linial,
    /// Linial rounds until the palette stops shrinking.
    LinialFull,
    /// One Kuhn-Wattenhofer round.
    Kw,
    /// Linial to its fixpoint, then Kuhn-Wattenhofer rounds down to Δ+1.
    Delta1,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum KindArg {
    Set,
    Multiset,
}

impl From<KindArg> for Delivery {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Set => Delivery::Set,
            KindArg::Multiset => Delivery::Multiset,
        }
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ColorArgs {
    #[arg(long, value_enum)]
    pub algo: Algo,
    /// Size of the initial palette.
    #[arg(long)]
    pub m: u64,
    #[arg(long)]
    pub delta: usize,
    /// Nodes of the generated tree.
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Load the instance from a graph JSON file instead of generating one.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "set")]
    pub kind: KindArg,
    /// Also write the per-round message trace.
    #[arg(long)]
    pub trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum FamilyArg {
    Nh1,
    Nsl,
    Nt,
    Ntilde,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct HostArgs {
    #[arg(long, value_enum)]
    pub family: FamilyArg,
    /// Level (ignored for nh1).
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long)]
    pub m: u32,
    /// Δ for nh1 and nsl, D for nt and ntilde.
    #[arg(long)]
    pub d: usize,
    /// Member collections of nh1 vertices.
    #[arg(long, value_enum, default_value = "multiset")]
    pub variant: KindArg,
    /// Largest vertex count any level may reach.
    #[arg(long, default_value_t = 2_000_000)]
    pub cap: usize,
}

impl HostArgs {
    fn limits(&self) -> BuildLimits {
        BuildLimits { max_vertices: self.cap }
    }

    fn build(&self) -> Result<NbhdGraph, CliError> {
        let l = self.limits();
        Ok(match self.family {
            FamilyArg::Nh1 => nbhd::build_nh1(self.m, self.d, self.variant.into(), l)?,
            FamilyArg::Nsl => nbhd::build_nsl(self.r, self.m, self.d, l)?,
            FamilyArg::Nt => nbhd::build_nt(self.r, self.m, self.d, l)?,
            FamilyArg::Ntilde => nbhd::build_ntilde(self.r, self.m, self.d, l)?,
        })
    }

    /// The graph one level below the host, which is all a refuter needs.
    fn base(&self) -> Result<NbhdGraph, CliError> {
        let l = self.limits();
        Ok(match self.family {
            FamilyArg::Nh1 => nbhd::level_zero(Family::Nh1, self.m, self.d, self.variant.into()),
            FamilyArg::Nt if self.r >= 1 => nbhd::build_nt(self.r - 1, self.m, self.d, l)?,
            _ => return Err(CliError::Usage("refuters take --family nh1 or --family nt with --r >= 1".into())),
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ChiArgs {
    #[command(flatten)]
    pub host: HostArgs,
    /// Search-node expansions for the exact solver.
    #[arg(long, default_value_t = 5_000_000)]
    pub budget: u64,
    /// Decide k-colorability instead of bracketing χ.
    #[arg(long)]
    pub k: Option<usize>,
    /// Also write graph.col and its index sidecar.
    #[arg(long)]
    pub export: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct RefuteArgs {
    #[command(flatten)]
    pub host: HostArgs,
    /// JSON list of classes; each vertex is a host vertex id or {"center", "members"}.
    #[arg(long, conflicts_with = "random")]
    pub classes: Option<PathBuf>,
    /// Generate this many random classes instead.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Treat the classes as d-defective (nh1 only).
    #[arg(long)]
    pub defect: Option<usize>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
pub enum HomWhich {
    H,
    F,
}

#[derive(Args, Debug, Serialize)]
pub struct HomArgs {
    #[arg(long, value_enum)]
    pub which: HomWhich,
    #[arg(long)]
    pub r: u32,
    #[arg(long)]
    pub m: u32,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 2_000_000)]
    pub cap: usize,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundArgs {
    #[arg(long)]
    pub delta: f64,
    #[arg(long = "C", default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eta: f64,
}

#[derive(Debug)]
pub enum CliError {
    /// Flags that parse but make no sense together.
    Usage(String),
    /// The requested computation failed.
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(s) => write!(f, "usage error: {s}"),
            CliError::Domain(s) => write!(f, "error: {s}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Domain(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Domain(format!("json: {e}"))
    }
}

impl From<nbhd::NbhdError> for CliError {
    fn from(e: nbhd::NbhdError) -> Self {
        CliError::Domain(e.to_string())
    }
}

impl From<bounds::BoundError> for CliError {
    fn from(e: bounds::BoundError) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// Outcome of a subcommand: the run directory and a one-line summary.
pub struct Outcome {
    pub dir: PathBuf,
    pub summary: Value,
}

/// Parses `args` (including the program name) and runs; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(out) => {
            // a closed pipe on stdout is not a failure of the run
            let mut stdout = std::io::stdout().lock();
            let _ = writeln!(stdout, "{}", out.summary);
            let _ = writeln!(stdout, "artifacts: {}", out.dir.display());
            0
        }
        Err(e) => {
            eprintln!("{e}");
            e.code()
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let config = serde_json::to_value(&cli.command)?;
    let dir = run_dir(&cli.out, &config);
    fs::create_dir_all(&dir)?;
    write_json(&dir.join("config.json"), &config)?;
    let summary = match &cli.command {
        Command::Color(a) => color(a, &dir)?,
        Command::Build(a) => build(a, &dir)?,
        Command::Chi(a) => chi(a, &dir)?,
        Command::Refute(a) => refute(a, &dir)?,
        Command::VerifyHom(a) => verify_hom(a, &dir)?,
        Command::Bound(a) => bound(a, &dir)?,
    };
    Ok(Outcome { dir, summary })
}

/// `<out>/<first 16 hex digits of sha256(config)>`.
pub fn run_dir(out: &Path, config: &Value) -> PathBuf {
    let digest = Sha256::digest(config.to_string().as_bytes());
    out.join(hex::encode(&digest[..8]))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

fn program(a: &ColorArgs) -> Result<ReductionProgram, CliError> {
    let made = match a.algo {
        Algo::Linial => algos::linial_step_program(a.m, a.delta),
        Algo::LinialFull => algos::linial_full_program(a.m, a.delta),
        Algo::Kw => algos::kw_step_program(a.m, a.delta),
        Algo::Delta1 => algos::delta_plus_one_program(a.m, a.delta),
    };
    made.map_err(|e| CliError::Usage(e.to_string()))
}

fn color(a: &ColorArgs, dir: &Path) -> Result<Value, CliError> {
    let prog = program(a)?;
    let g: ColoredGraph = match &a.input {
        Some(path) => serde_json::from_slice(&fs::read(path)?)?,
        None => {
            let m = u32::try_from(a.m).map_err(|_| CliError::Usage("generated trees need m < 2^32".into()))?;
            graph::random_colored_tree(a.n, a.delta, m, a.seed).map_err(|e| CliError::Usage(e.to_string()))?
        }
    };
    if g.m() as u64 != a.m || g.delta_cap() > a.delta {
        return Err(CliError::Usage(format!(
            "instance has m = {} and delta = {}, flags say {} and {}",
            g.m(),
            g.delta_cap(),
            a.m,
            a.delta
        )));
    }
    let (phi, trace) = sim::run(&g, &prog, a.kind.into()).map_err(|e| CliError::Domain(e.to_string()))?;
    let proper = graph::validate_proper(&g, &phi).map_err(|e| CliError::Domain(e.to_string()))?;
    write_json(&dir.join("graph.json"), &g)?;
    write_json(&dir.join("assignment.json"), &phi)?;
    let mut csv = String::from("round,stage,palette\n");
    csv.push_str(&format!("0,input,{}\n", a.m));
    for (i, (stage, palette)) in prog.stages.iter().zip(prog.palettes().into_iter().skip(1)).enumerate() {
        let name = match stage {
            algos::Stage::Linial(_) => "linial",
            algos::Stage::Kw { .. } => "kw",
        };
        csv.push_str(&format!("{},{name},{palette}\n", i + 1));
    }
    fs::write(dir.join("rounds.csv"), csv)?;
    if a.trace {
        fs::write(dir.join("trace.jsonl"), trace.to_json_lines())?;
    }
    if !proper {
        return Err(CliError::Domain("output coloring is not proper".into()));
    }
    Ok(json!({
        "algo": prog.label,
        "rounds": prog.stages.len(),
        "palette": phi.palette,
        "colors_used": phi.distinct_colors(),
        "proper": proper,
    }))
}

fn stats(g: &NbhdGraph) -> Value {
    json!({
        "family": g.family(),
        "level": g.level(),
        "m": g.m(),
        "bound": g.bound(),
        "vertices": g.node_count(),
        "edges": g.edge_count(),
        "max_degree": g.max_degree(),
        "clique_lower_bound": chromatic::greedy_clique(g).len(),
    })
}

fn build(a: &HostArgs, dir: &Path) -> Result<Value, CliError> {
    let g = a.build()?;
    let s = stats(&g);
    write_json(&dir.join("graph.json"), &g.to_json())?;
    write_json(&dir.join("stats.json"), &s)?;
    Ok(s)
}

fn chi(a: &ChiArgs, dir: &Path) -> Result<Value, CliError> {
    let g = a.host.build()?;
    if a.export {
        chromatic::export_dimacs(&g, &dir.join("graph.col"))?;
    }
    let out = match a.k {
        Some(0) => return Err(CliError::Usage("--k must be at least 1".into())),
        Some(k) => {
            let answer = chromatic::is_k_colorable(&g, k, a.budget);
            let verdict = match &answer {
                Colorability::Yes(_) => "yes",
                Colorability::No => "no",
                Colorability::Unknown => "unknown",
            };
            let witness = match answer {
                Colorability::Yes(w) => Some(w),
                _ => None,
            };
            json!({ "k": k, "colorable": verdict, "witness": witness })
        }
        None => {
            let r = chromatic::chi_exact(&g, a.budget);
            eprintln!("solver time: {} ms", r.elapsed_ms);
            serde_json::to_value(r)?
        }
    };
    write_json(&dir.join("chi.json"), &out)?;
    let mut summary = stats(&g);
    for key in ["k", "colorable", "lower", "upper", "exact"] {
        if let Some(v) = out.get(key) {
            summary[key] = v.clone();
        }
    }
    Ok(summary)
}

/// A vertex in a classes file: an id of the explicit host, or a pair over the level below.
#[derive(Deserialize)]
#[serde(untagged)]
enum VertexRef {
    Id(usize),
    Pair(Pair),
}

fn refute(a: &RefuteArgs, dir: &Path) -> Result<Value, CliError> {
    let base = Arc::new(a.host.base()?);
    let bound = a.host.d;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mode = match a.defect {
        Some(d) if a.host.family == FamilyArg::Nh1 => Mode::Defective(d),
        Some(_) => return Err(CliError::Usage("--defect applies to nh1 only".into())),
        None => Mode::Proper,
    };
    let classes: Vec<Vec<Pair>> = match (&a.classes, a.random) {
        (Some(path), _) => {
            let raw: Vec<Vec<VertexRef>> = serde_json::from_slice(&fs::read(path)?)?;
            let explicit = if raw.iter().flatten().any(|v| matches!(v, VertexRef::Id(_))) {
                Some(a.host.build()?)
            } else {
                None
            };
            raw.into_iter()
                .map(|class| {
                    class
                        .into_iter()
                        .map(|v| match v {
                            VertexRef::Pair(p) => Ok(Pair::new(p.center, p.members)),
                            VertexRef::Id(i) => explicit
                                .as_ref()
                                .and_then(|g| g.part(i))
                                .cloned()
                                .ok_or_else(|| CliError::Usage(format!("vertex id {i} out of range"))),
                        })
                        .collect()
                })
                .collect::<Result<_, _>>()?
        }
        (None, Some(c)) => match mode {
            Mode::Defective(d) => families::random_defective_classes(&base, bound, d, c, 20 * base.node_count(), &mut rng),
            Mode::Proper => families::random_implicit_classes(&base, bound, c, 2, 50 * base.node_count(), &mut rng),
        },
        (None, None) => return Err(CliError::Usage("give --classes FILE or --random C".into())),
    };
    let fam = IndSetFamily::new(base, bound, classes, mode)?;
    let result = match (mode, a.host.family) {
        (Mode::Defective(_), _) => bounds::uncovered_node_defective(&fam)?,
        (Mode::Proper, FamilyArg::Nh1) => bounds::uncovered_node_nh1(&fam)?,
        (Mode::Proper, _) => bounds::refute_nt(&fam)?,
    };
    let out = result.to_json();
    write_json(&dir.join("refutation.json"), &out)?;
    Ok(json!({
        "vertex": result.view.to_string(),
        "classes": fam.classes().len(),
        "witnesses": result.transcript.witnesses,
        "unique_source_checks": result.transcript.unique_source_checks,
    }))
}

fn verify_hom(a: &HomArgs, dir: &Path) -> Result<Value, CliError> {
    let l = BuildLimits { max_vertices: a.cap };
    let made = match a.which {
        HomWhich::H => nbhd::hom_h(a.r, a.m, a.d, l),
        HomWhich::F => nbhd::hom_f(a.r, a.m, a.d, l),
    };
    let mut map = match made {
        Ok(map) => map,
        Err(nbhd::NbhdError::HomFailed { name, missing, broken }) => {
            let report = json!({ "name": name, "verified": false, "missing": missing, "broken_edges": broken });
            write_json(&dir.join("report.json"), &report)?;
            return Err(CliError::Domain(format!("{name}: {missing} missing images, {broken} broken edges")));
        }
        Err(e) => return Err(e.into()),
    };
    let report = nbhd::verify_homomorphism(&mut map);
    let out = json!({
        "name": map.name,
        "verified": map.verified(),
        "domain_vertices": map.domain.node_count(),
        "domain_edges": map.domain.edge_count(),
        "codomain_vertices": map.codomain.node_count(),
        "report": report,
    });
    write_json(&dir.join("report.json"), &out)?;
    Ok(out)
}

fn bound(a: &BoundArgs, dir: &Path) -> Result<Value, CliError> {
    let r = bounds::lower_bound_rounds(a.delta, a.c, a.eta).map_err(|e| CliError::Usage(e.to_string()))?;
    write_json(&dir.join("bound.json"), &r)?;
    Ok(json!({ "r": r.rounds, "D": r.d_real, "threshold_implied": r.threshold_implied }))
}

//! The `ums` command line: argument parsing, file I/O and the report.
//!
//! A report is a list of `key value...` lines. On failure the first line is
//! the error, starting with its name. Exit codes: 0 on success, 1 when a
//! check or construction fails, 2 on usage errors.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::amalgam::{amalgamate, double_with_swap, orbit_amalgam, AmalgamError, AmalgamSpec};
use crate::builder::{
    build_tower, extend_on_demand, extend_space, injectivity_audit, BuilderError, TowerConfig,
};
use crate::fixedpoint::{
    fixed_set, fixed_set_level, migration_map, property_star_check, FixedPointError,
    IsometrySystem, Part,
};
use crate::formats::{
    read_glue, read_graph, read_kmap, read_perm, read_prov, read_seq, read_ums, write_kmap,
    write_perm, write_prov, write_ums, FormatError, KmapFile, PermFile,
};
use crate::homogeneity::{
    avoidance_extension, back_and_forth, distance_trace, nice_violation, uniqueness_witness,
    HomogeneityError, Outcome,
};
use crate::katetov::{
    enumerate_katetov, feasible_interval, katetov_extend, min_saturation_witness, KatetovError,
};
use crate::ratmetric::{
    find_isometry, graph_to_metric, FiniteMetricSpace, MetricError, PartialIsometry, Rational,
};
use crate::tentacular::{
    condition_c_check, eps_good_inline, euclid_spread, extract_inline_subsequence, fa_family,
    min_pairwise_distance, nonempty_subsets, PointSequence, TentacularError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandResult {
    pub exit_code: i32,
    pub report: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Error)]
pub enum ShellError {
    #[error("{0}")]
    Usage(String),
    #[error("IoError {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("Stuck step {0} point {1}")]
    Stuck(usize, usize),
    #[error("AuditFailed {0}")]
    AuditFailed(usize),
    #[error("WitnessMismatch {0}")]
    WitnessMismatch(usize),
    #[error("NotUniqueness {0} {1}")]
    NotUniqueness(usize, usize),
    #[error("NotInline {r} {slack}")]
    NotInline { r: usize, slack: Rational },
    #[error("AvoidanceFailed {0}")]
    AvoidanceFailed(usize),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Metric(#[from] MetricError),
    #[error(transparent)]
    Katetov(#[from] KatetovError),
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error(transparent)]
    Builder(#[from] BuilderError),
    #[error(transparent)]
    Homogeneity(#[from] HomogeneityError),
    #[error(transparent)]
    FixedPoint(#[from] FixedPointError),
    #[error(transparent)]
    Tentacular(#[from] TentacularError),
}

#[derive(Parser, Debug)]
#[command(
    name = "ums",
    version,
    about = "Exact finite metric spaces and Katetov extensions"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Check a UMS file for the metric axioms.
    Validate { ums: PathBuf },
    /// Check, extend or enumerate Katetov maps.
    #[command(subcommand)]
    Katetov(KatetovCmd),
    /// Build, audit or extend the one-point extension tower.
    #[command(subcommand)]
    Tower(TowerCmd),
    /// Extend a partial isometry of a space to cover target points.
    Bnf {
        ums: PathBuf,
        /// Pairs `source:image`.
        #[arg(long, value_delimiter = ',', value_parser = parse_pair)]
        map: Vec<(usize, usize)>,
        #[arg(long, value_delimiter = ',')]
        targets: Vec<usize>,
    },
    /// Free amalgam of two spaces over a glue map.
    Amalgam {
        left: PathBuf,
        right: PathBuf,
        glue: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Two copies of a space glued along a subset, with the swap.
    Double {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        glued: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
        /// Where to write the swap as a perm file.
        #[arg(long)]
        perm_out: Option<PathBuf>,
    },
    /// Extend a space by a truncated orbit of one-point extensions.
    Orbit {
        ums: PathBuf,
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        kmap: PathBuf,
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build or check an isometry level with a prescribed fixed set.
    #[command(subcommand)]
    Fixset(FixsetCmd),
    /// Inline tests on a point sequence.
    Inline {
        seq: PathBuf,
        #[arg(long, default_value = "0")]
        eps: Rational,
        /// Also test condition (c) and extract an inline subsequence.
        #[arg(long)]
        delta: Option<Rational>,
    },
    /// Write the spread-out space with a base point and `n - 1` others.
    Spread {
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pairwise distances of the extensions `f_A` over a spread.
    Fa {
        spread: PathBuf,
        /// Subsets as `1,2;3`; all nonempty subsets when omitted.
        #[arg(long)]
        subsets: Option<String>,
    },
    /// Encode graphs as metric spaces and test isomorphism.
    #[command(subcommand)]
    Graph(GraphCmd),
    /// Distance trace of a point on a subset.
    Trace {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
        #[arg(long)]
        point: usize,
    },
    /// Check whether a subset is a set of uniqueness.
    Unique {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
    },
    /// Check whether a map satisfies both Katetov inequalities strictly.
    Nice {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        values: Vec<Rational>,
    },
    /// Build the migration map of a point under an isometry.
    Migrate {
        ums: PathBuf,
        #[arg(long)]
        perm: PathBuf,
        #[arg(long)]
        z: usize,
        #[arg(long, value_delimiter = ',')]
        points: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<Rational>,
    },
    /// Extend a map to a net so that its realization avoids the net.
    Avoid {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        targets: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<Rational>,
        #[arg(long, value_delimiter = ',')]
        net: Vec<usize>,
        #[arg(long)]
        m: Rational,
        #[arg(long)]
        eps: Rational,
        /// Where to write the space with the realized point.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum KatetovCmd {
    /// Check a KMAP file against its space.
    Check {
        kmap: PathBuf,
        /// Overrides the space named in the file.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Also report a small saturation witness at this tolerance.
        #[arg(long)]
        eps: Option<Rational>,
    },
    /// Katetov extension of a partial assignment.
    Extend {
        ums: PathBuf,
        #[arg(long, value_delimiter = ',')]
        points: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<Rational>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List the grid-supported Katetov maps.
    Enumerate {
        ums: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
    },
}

#[derive(Args, Debug)]
struct GridArgs {
    #[arg(long, value_delimiter = ',', default_value = "1/2,1,3/2,2,5/2,3")]
    grid: Vec<Rational>,
    #[arg(long, default_value_t = 3)]
    support: usize,
}

#[derive(Subcommand, Debug)]
enum TowerCmd {
    /// Build the truncated tower over a seed space.
    Build {
        seed: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2)]
        depth: usize,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        /// Top level as UMS; the sidecar goes next to it with extension `prov`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that every small grid map over a pool of points has a witness.
    Audit {
        ums: PathBuf,
        #[arg(long)]
        prov: Option<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "1/2,1,3/2,2,5/2,3")]
        grid: Vec<Rational>,
        #[arg(long, default_value_t = 2)]
        support: usize,
        #[arg(long, default_value = "0")]
        eps: Rational,
        /// Number of leading points to draw supports from.
        #[arg(long)]
        pool: Option<usize>,
    },
    /// Realize one more assignment over a level.
    Extend {
        ums: PathBuf,
        #[arg(long)]
        prov: PathBuf,
        #[arg(long)]
        level: usize,
        #[arg(long, value_delimiter = ',')]
        points: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        values: Vec<Rational>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum FixsetCmd {
    /// One level of the fixed-set construction.
    Build {
        ums: PathBuf,
        #[arg(long)]
        perm: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 2)]
        horizon: usize,
        /// Cyclic offsets `|q| <= excluded` are left out of the property (*) check.
        #[arg(long, default_value_t = 1)]
        excluded: u64,
        #[arg(long, default_value_t = 5000)]
        budget: usize,
        /// Output space; the isometry goes next to it with extension `perm`.
        #[arg(long)]
        out: PathBuf,
    },
    /// Check isometry, fixed set and property (*).
    Check {
        ums: PathBuf,
        #[arg(long)]
        perm: PathBuf,
        #[arg(long, default_value_t = 1)]
        excluded: u64,
        #[arg(long, default_value = "0")]
        eps: Rational,
    },
}

#[derive(Subcommand, Debug)]
enum GraphCmd {
    /// Graph distance as a UMS file.
    Encode {
        graph: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Find an isomorphism through the distance encoding.
    Iso { a: PathBuf, b: PathBuf },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected `a:b`, got `{s}`"))?;
    Ok((
        a.trim().parse().map_err(|_| format!("bad index `{a}`"))?,
        b.trim().parse().map_err(|_| format!("bad index `{b}`"))?,
    ))
}

fn parse_subsets(s: &str) -> Result<Vec<Vec<usize>>, ShellError> {
    s.split(';')
        .map(|part| {
            part.split(',')
                .map(|t| {
                    t.trim()
                        .parse()
                        .map_err(|_| ShellError::Usage(format!("bad index `{t}`")))
                })
                .collect()
        })
        .collect()
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

#[derive(Default)]
struct Ctx {
    report: Vec<String>,
    artifacts: Vec<PathBuf>,
}

impl Ctx {
    fn line(&mut self, s: impl Into<String>) {
        self.report.push(s.into());
    }

    fn write(&mut self, path: &Path, contents: &str) -> Result<(), ShellError> {
        fs::write(path, contents).map_err(|e| io_err(path, e))?;
        self.artifacts.push(path.to_path_buf());
        Ok(())
    }
}

fn io_err(path: &Path, e: std::io::Error) -> ShellError {
    ShellError::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, ShellError> {
    fs::read_to_string(path).map_err(|e| io_err(path, e))
}

fn load_ums(path: &Path) -> Result<FiniteMetricSpace, ShellError> {
    Ok(read_ums(&read(path)?)?)
}

/// A path named inside another file: relative paths are taken from that
/// file's directory when they exist there.
fn resolve(named: &str, from: &Path) -> PathBuf {
    let p = PathBuf::from(named);
    if p.is_relative() {
        if let Some(dir) = from.parent() {
            let candidate = dir.join(&p);
            if candidate.exists() {
                return candidate;
            }
        }
    }
    p
}

fn load_perm(path: &Path, n: usize) -> Result<PermFile, ShellError> {
    Ok(read_perm(&read(path)?, Some(n))?)
}

fn load_system(ums: &Path, perm: &Path) -> Result<IsometrySystem, ShellError> {
    let space = load_ums(ums)?;
    let p = load_perm(perm, space.n())?;
    Ok(IsometrySystem::new(space, p.phi, p.base)?)
}

fn with_extension(path: &Path, ext: &str) -> PathBuf {
    path.with_extension(ext)
}

/// Runs one command. `argv[0]` is the program name.
pub fn run<I, T>(argv: I) -> CommandResult
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            return CommandResult {
                exit_code: code,
                report: e.to_string().lines().map(str::to_string).collect(),
                artifacts: Vec::new(),
            };
        }
    };
    let mut ctx = Ctx::default();
    let res = dispatch(cli.cmd, &mut ctx);
    match res {
        Ok(()) => {
            ctx.report.insert(0, "ok".into());
            CommandResult {
                exit_code: 0,
                report: ctx.report,
                artifacts: ctx.artifacts,
            }
        }
        Err(e) => {
            let code = if matches!(e, ShellError::Usage(_)) {
                2
            } else {
                1
            };
            ctx.report.insert(0, e.to_string());
            CommandResult {
                exit_code: code,
                report: ctx.report,
                artifacts: ctx.artifacts,
            }
        }
    }
}

fn dispatch(cmd: Cmd, ctx: &mut Ctx) -> Result<(), ShellError> {
    match cmd {
        Cmd::Validate { ums } => {
            let s = load_ums(&ums)?;
            ctx.line(format!("n {}", s.n()));
            ctx.line(format!("diameter {}", s.diameter()));
        }
        Cmd::Katetov(k) => katetov_cmd(k, ctx)?,
        Cmd::Tower(t) => tower_cmd(t, ctx)?,
        Cmd::Bnf { ums, map, targets } => {
            let s = load_ums(&ums)?;
            let trace = back_and_forth(&s, &PartialIsometry::new(map), &targets)?;
            for (i, st) in trace.steps.iter().enumerate() {
                ctx.line(format!("step {i} {} -> {}", st.source, st.target));
            }
            ctx.line(format!(
                "map {}",
                join(
                    &trace
                        .map
                        .pairs()
                        .iter()
                        .map(|(a, b)| format!("{a}:{b}"))
                        .collect::<Vec<_>>()
                )
            ));
            if let Outcome::Stuck {
                step,
                source,
                forced,
            } = trace.outcome
            {
                let f: Vec<String> = forced.iter().map(|(p, v)| format!("{p}={v}")).collect();
                ctx.line(format!("forced {}", join(&f)));
                return Err(ShellError::Stuck(step, source));
            }
        }
        Cmd::Amalgam {
            left,
            right,
            glue,
            out,
        } => {
            let spec = AmalgamSpec {
                left: load_ums(&left)?,
                right: load_ums(&right)?,
                glue: PartialIsometry::new(read_glue(&read(&glue)?)?),
            };
            let a = amalgamate(&spec)?;
            ctx.line(format!("n {}", a.space.n()));
            ctx.line(format!("right-map {}", join(&a.right_map)));
            ctx.write(&out, &write_ums(&a.space))?;
        }
        Cmd::Double {
            ums,
            glued,
            out,
            perm_out,
        } => {
            let s = load_ums(&ums)?;
            let d = double_with_swap(&s, &glued)?;
            ctx.line(format!("n {}", d.space.n()));
            ctx.line(format!("second-copy {}", join(&d.second_copy)));
            ctx.write(&out, &write_ums(&d.space))?;
            if let Some(p) = perm_out {
                ctx.write(
                    &p,
                    &write_perm(&PermFile {
                        phi: d.swap,
                        base: glued,
                    }),
                )?;
            }
        }
        Cmd::Orbit {
            ums,
            perm,
            kmap,
            horizon,
            out,
        } => {
            let s = load_ums(&ums)?;
            let p = load_perm(&perm, s.n())?;
            let f = read_kmap(&read(&kmap)?)?.to_map(&s)?;
            let o = orbit_amalgam(&s, &p.phi, &f, horizon)?;
            ctx.line(format!("n {}", o.space.n()));
            ctx.line(format!("y {}", join(&o.y)));
            for (i, x) in &o.collisions {
                ctx.line(format!("collision {i} {x}"));
            }
            ctx.write(&out, &write_ums(&o.space))?;
        }
        Cmd::Fixset(f) => fixset_cmd(f, ctx)?,
        Cmd::Inline { seq, eps, delta } => {
            let file = read_seq(&read(&seq)?)?;
            let space = load_ums(&resolve(&file.space, &seq))?;
            let ps = PointSequence::new(space, file.order)?;
            let r = eps_good_inline(&ps, eps);
            if let Some(d) = delta {
                let c = condition_c_check(&ps, d);
                ctx.line(format!(
                    "condition-c {} {}",
                    c.holds,
                    c.n.map_or("none".to_string(), |n| n.to_string())
                ));
                let ex = extract_inline_subsequence(&ps, d)?;
                ctx.line(format!("extracted {}", join(&ex.seq.order)));
                ctx.line(format!("extracted-eps {} passes {}", ex.eps, ex.passes));
            }
            if let (Some(w), Some(slack)) = (r.worst_r, r.worst_slack) {
                ctx.line(format!("worst {w} slack {slack}"));
                if !r.holds {
                    return Err(ShellError::NotInline { r: w, slack });
                }
            }
        }
        Cmd::Spread { n, out } => {
            let s = euclid_spread(n)?;
            ctx.line(format!("n {}", s.n()));
            ctx.write(&out, &write_ums(&s))?;
        }
        Cmd::Fa { spread, subsets } => {
            let s = load_ums(&spread)?;
            let subsets = match subsets {
                Some(t) => parse_subsets(&t)?,
                None => nonempty_subsets(s.n()),
            };
            let fam = fa_family(&s, &subsets)?;
            ctx.line(format!("maps {}", fam.len()));
            if let Some((d, a, b)) = min_pairwise_distance(&fam) {
                ctx.line(format!(
                    "min-distance {d} {} | {}",
                    join(&subsets[a]),
                    join(&subsets[b])
                ));
            }
        }
        Cmd::Graph(GraphCmd::Encode { graph, out }) => {
            let g = read_graph(&read(&graph)?)?;
            let s = graph_to_metric(&g)?;
            ctx.line(format!("n {}", s.n()));
            ctx.write(&out, &write_ums(&s))?;
        }
        Cmd::Graph(GraphCmd::Iso { a, b }) => {
            let ga = graph_to_metric(&read_graph(&read(&a)?)?)?;
            let gb = graph_to_metric(&read_graph(&read(&b)?)?)?;
            let m = find_isometry(&ga, &gb)?;
            ctx.line(format!(
                "map {}",
                join(&m.pairs().iter().map(|p| p.1).collect::<Vec<_>>())
            ));
        }
        Cmd::Trace { ums, subset, point } => {
            let s = load_ums(&ums)?;
            let t = distance_trace(&s, &subset, point)?;
            ctx.line(format!("trace {}", join(t.values())));
        }
        Cmd::Unique { ums, subset } => {
            let s = load_ums(&ums)?;
            if let Some(&bad) = subset.iter().find(|&&i| i >= s.n()) {
                return Err(MetricError::IndexOutOfRange(bad).into());
            }
            if let Some((x, y)) = uniqueness_witness(&s, &subset) {
                return Err(ShellError::NotUniqueness(x, y));
            }
        }
        Cmd::Nice { ums, values } => {
            let s = load_ums(&ums)?;
            let f = crate::katetov::katetov_check(&s, values)?;
            if let Some((i, j)) = nice_violation(&s, f.values()) {
                return Err(HomogeneityError::NotNice(i, j).into());
            }
        }
        Cmd::Migrate {
            ums,
            perm,
            z,
            points,
            values,
        } => {
            let sys = load_system(&ums, &perm)?;
            let m = migration_map(&sys, z, &points, &values)?;
            ctx.line(format!("rho {}", m.rho));
            ctx.line(format!("domain {}", join(&m.domain)));
            ctx.line(format!("values {}", join(&m.values)));
            let parts: Vec<&str> = m
                .parts
                .iter()
                .map(|p| match p {
                    Part::A => "A",
                    Part::B => "B",
                    Part::C => "C",
                })
                .collect();
            ctx.line(format!("parts {}", parts.join(" ")));
        }
        Cmd::Avoid {
            ums,
            targets,
            values,
            net,
            m,
            eps,
            out,
        } => {
            let mut s = load_ums(&ums)?;
            let av = avoidance_extension(&s, &targets, &values, &net, m, eps)?;
            ctx.line(format!("points {}", join(&av.points)));
            ctx.line(format!("values {}", join(&av.values)));
            ctx.line(format!("margin {}", av.margin()));
            let c = extend_space(&mut s, &av.points, &av.values)?;
            av.verify(&s, c).map_err(ShellError::AvoidanceFailed)?;
            ctx.line(format!("realized {c}"));
            if let Some(out) = out {
                ctx.write(&out, &write_ums(&s))?;
            }
        }
    }
    Ok(())
}

fn katetov_cmd(cmd: KatetovCmd, ctx: &mut Ctx) -> Result<(), ShellError> {
    match cmd {
        KatetovCmd::Check { kmap, space, eps } => {
            let file = read_kmap(&read(&kmap)?)?;
            let sp = space.unwrap_or_else(|| resolve(&file.space, &kmap));
            let s = load_ums(&sp)?;
            let f = file.to_map(&s)?;
            ctx.line(format!("values {}", join(f.values())));
            if let Some(sup) = f.support() {
                ctx.line(format!("support {}", join(sup)));
            }
            if let Some(e) = eps {
                let w = min_saturation_witness(&s, &f, e)?;
                ctx.line(format!(
                    "witness {} radius {} optimal {}",
                    join(&w.subset),
                    w.radius,
                    w.optimal
                ));
            }
        }
        KatetovCmd::Extend {
            ums,
            points,
            values,
            out,
        } => {
            let s = load_ums(&ums)?;
            let f = katetov_extend(&s, &points, &values)?;
            for x in s.points().filter(|x| !points.contains(x)) {
                let iv = feasible_interval(&s, &points, &values, x)?;
                ctx.line(format!("interval {x} {} {}", iv.lower, iv.upper));
            }
            ctx.line(format!("values {}", join(f.values())));
            if let Some(out) = out {
                let name = ums.display().to_string();
                ctx.write(&out, &write_kmap(&KmapFile::from_map(&name, &f)))?;
            }
        }
        KatetovCmd::Enumerate { ums, grid } => {
            let s = load_ums(&ums)?;
            let maps = enumerate_katetov(&s, &grid.grid, grid.support);
            ctx.line(format!("maps {}", maps.len()));
            for f in &maps {
                ctx.line(format!(
                    "map support {} values {}",
                    join(f.support().unwrap_or(&[])),
                    join(f.values())
                ));
            }
        }
    }
    Ok(())
}

fn tower_cmd(cmd: TowerCmd, ctx: &mut Ctx) -> Result<(), ShellError> {
    match cmd {
        TowerCmd::Build {
            seed,
            grid,
            depth,
            budget,
            out,
        } => {
            let s = load_ums(&seed)?;
            let cfg = TowerConfig {
                grid: grid.grid,
                max_support: grid.support,
                depth,
                max_points: budget,
            };
            let t = build_tower(&s, &cfg)?;
            ctx.line(format!("n {}", t.space.n()));
            ctx.line(format!("levels {}", join(&t.level_ends)));
            ctx.line(format!("complete-depth {}", t.complete_depth()));
            let out = out.unwrap_or_else(|| {
                let stem = seed
                    .file_stem()
                    .map_or("seed".into(), |s| s.to_string_lossy().into_owned());
                seed.with_file_name(format!("{stem}.tower.ums"))
            });
            ctx.write(&out, &write_ums(&t.space))?;
            ctx.write(&with_extension(&out, "prov"), &write_prov(&t))?;
            t.budget_status(budget)?;
        }
        TowerCmd::Audit {
            ums,
            prov,
            grid,
            support,
            eps,
            pool,
        } => {
            let s = load_ums(&ums)?;
            let default_pool = match &prov {
                Some(p) => {
                    let t = read_prov(s.clone(), &read(p)?)?;
                    t.check_witnesses().map_err(ShellError::WitnessMismatch)?;
                    ctx.line("witnesses ok");
                    t.level_ends[t.complete_depth().saturating_sub(1)]
                }
                None => s.n(),
            };
            let pool = pool.unwrap_or(default_pool);
            let r = injectivity_audit(&s, pool, &grid, support, eps);
            ctx.line(format!("pool {pool}"));
            ctx.line(format!("checked {}", r.checked));
            ctx.line(format!("failures {}", r.failures.len()));
            for (sup, vals) in r.failures.iter().take(10) {
                ctx.line(format!(
                    "missing support {} values {}",
                    join(sup),
                    join(vals)
                ));
            }
            if !r.is_clean() {
                return Err(ShellError::AuditFailed(r.failures.len()));
            }
        }
        TowerCmd::Extend {
            ums,
            prov,
            level,
            points,
            values,
            out,
        } => {
            let s = load_ums(&ums)?;
            let mut t = read_prov(s, &read(&prov)?)?;
            let z = extend_on_demand(&mut t, level, &points, &values)?;
            ctx.line(format!("added {z}"));
            ctx.write(&out, &write_ums(&t.space))?;
            ctx.write(&with_extension(&out, "prov"), &write_prov(&t))?;
        }
    }
    Ok(())
}

fn fixset_cmd(cmd: FixsetCmd, ctx: &mut Ctx) -> Result<(), ShellError> {
    match cmd {
        FixsetCmd::Build {
            ums,
            perm,
            grid,
            horizon,
            excluded,
            budget,
            out,
        } => {
            let sys = load_system(&ums, &perm)?;
            let lvl = fixed_set_level(&sys, &grid.grid, grid.support, horizon, excluded, budget)?;
            let next = &lvl.system;
            ctx.line(format!("n {}", next.space.n()));
            ctx.line(format!("maps {}", lvl.maps));
            ctx.line(format!("fixed {}", join(&fixed_set(next))));
            ctx.line(format!("wrap-defect {}", lvl.wrap_defect));
            ctx.line(format!("star-slack {}", lvl.star_slack));
            ctx.line(format!(
                "star {} checked {}",
                lvl.star.passed, lvl.star.checked
            ));
            ctx.write(&out, &write_ums(&next.space))?;
            ctx.write(
                &with_extension(&out, "perm"),
                &write_perm(&PermFile {
                    phi: next.phi.clone(),
                    base: next.base.clone(),
                }),
            )?;
        }
        FixsetCmd::Check {
            ums,
            perm,
            excluded,
            eps,
        } => {
            let sys = load_system(&ums, &perm)?;
            ctx.line(format!("fixed {}", join(&fixed_set(&sys))));
            let r = property_star_check(&sys, excluded, eps)?;
            ctx.line(format!("checked {}", r.checked));
            if let Some(s) = r.worst_slack {
                ctx.line(format!("worst-slack {s}"));
            }
            if let Some((a, b, p)) = r.worst {
                ctx.line(format!("worst {a} {b} {p}"));
            }
            if !r.passed {
                return Err(FixedPointError::PropertyStarFails(
                    r.worst_slack.unwrap_or(Rational::ZERO),
                )
                .into());
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_in(dir: &Path, args: &[&str]) -> CommandResult {
        let argv = std::iter::once("ums".to_string()).chain(args.iter().map(|a| {
            if a.ends_with(".ums")
                || a.ends_with(".graph")
                || a.ends_with(".kmap")
                || a.ends_with(".perm")
                || a.ends_with(".seq")
                || a.ends_with(".glue")
                || a.ends_with(".prov")
            {
                dir.join(a).display().to_string()
            } else {
                a.to_string()
            }
        }));
        run(argv)
    }

    fn put(dir: &Path, name: &str, text: &str) {
        fs::write(dir.join(name), text).unwrap();
    }

    #[test]
    fn validate_reports_triangle_violation() {
        let d = tempfile::tempdir().unwrap();
        put(
            d.path(),
            "bad.ums",
            "ums v1\nn 3\nd 0 1 1\nd 0 2 3\nd 1 2 1\nend\n",
        );
        let r = run_in(d.path(), &["validate", "bad.ums"]);
        assert_eq!(r.exit_code, 1);
        assert_eq!(r.report[0], "TriangleViolation 0 1 2");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["ums", "frobnicate"]).exit_code, 2);
        assert_eq!(
            run(["ums", "tower", "build", "--depth", "x", "s.ums"]).exit_code,
            2
        );
        assert_eq!(run(["ums", "spread"]).exit_code, 2);
    }

    #[test]
    fn tower_build_writes_three_points() {
        let d = tempfile::tempdir().unwrap();
        put(d.path(), "seed1.ums", "ums v1\nn 1\nend\n");
        let r = run_in(
            d.path(),
            &[
                "tower",
                "build",
                "--depth",
                "1",
                "--grid",
                "1,2",
                "--support",
                "1",
                "seed1.ums",
            ],
        );
        assert_eq!(r.exit_code, 0, "{:?}", r.report);
        let top = load_ums(&r.artifacts[0]).unwrap();
        assert_eq!(top.n(), 3);
        assert!(r.artifacts[1].extension().unwrap() == "prov");
    }

    #[test]
    fn graph_iso_not_found() {
        let d = tempfile::tempdir().unwrap();
        put(
            d.path(),
            "c4.graph",
            "graph v1\nn 4\ne 0 1\ne 1 2\ne 2 3\ne 0 3\nend\n",
        );
        put(
            d.path(),
            "p4.graph",
            "graph v1\nn 4\ne 0 1\ne 1 2\ne 2 3\nend\n",
        );
        let r = run_in(d.path(), &["graph", "iso", "c4.graph", "p4.graph"]);
        assert_eq!(r.exit_code, 1);
        assert_eq!(r.report[0], "NotFound");
        let r = run_in(d.path(), &["graph", "iso", "c4.graph", "c4.graph"]);
        assert_eq!(r.exit_code, 0);
    }

    #[test]
    fn missing_file_is_an_io_error() {
        let r = run(["ums", "validate", "/nonexistent/x.ums"]);
        assert_eq!(r.exit_code, 1);
        assert!(r.report[0].starts_with("IoError"));
    }
}

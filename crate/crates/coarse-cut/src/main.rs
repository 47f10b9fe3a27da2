use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context as _, Result};
use clap::{Parser, Subcommand, ValueEnum};
use coarse_cut::cache::Cache;
use coarse_cut::config::{parse_rational, ConfigFile, ExperimentSpec, QmSpecFile};
use coarse_cut::experiments::{self, annulus_product, dl_for, registry, Context, Verdict};
use coarse_cut::format::{read_cgw, read_cvs, write_cgw, write_cvs};
use coarse_cut_core::generators::{dl_window, grid_window, tree_window, wreath_ball, BaseGroup, WreathBallSpec};
use coarse_cut_core::group::FiniteGroup;
use coarse_cut_core::invariants::{
    cheeger, cut, poincare_l1, CheegerMode, CutMode, InvariantReport, MetricMeasureSet, PoincareMode, Witness,
    DEFAULT_NODE_BUDGET,
};
use coarse_cut_core::quasimedian::{
    metric_checks, pc_build, pc_checks, pc_iso_check, projection_check, qm_ball, structure_checks,
};
use coarse_cut_core::separation::{
    geodesic_path, scan_for_cut, separation_witness, Partition, PersistentFamily, SeparationInstance,
};
use coarse_cut_core::{GraphWindow, Rational, VertexId, VertexSet};

/// Exit code for usage, I/O and input errors.
const EXIT_ERROR: u8 = 3;

#[derive(Parser)]
#[command(name = "coarse-cut", version, about = "Coarse separation invariants of graph windows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a window and write it in cgw format.
    Generate {
        #[command(subcommand)]
        kind: Generate,
        /// Output file; stdout when absent.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
        /// Also store the window in the cache and print its hash.
        #[arg(long, global = true)]
        cache: bool,
    },
    /// Compute a Cheeger constant, cut or Poincare constant.
    Invariant {
        kind: InvariantKind,
        #[arg(long)]
        graph: PathBuf,
        /// Vertex set file; the whole window when absent.
        #[arg(long)]
        set: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long, default_value = "1/2", value_parser = rational)]
        delta: Rational,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long, value_enum, default_value_t = Mode::Exact)]
        mode: Mode,
        /// Node budget of the exact cut search.
        #[arg(long, default_value_t = DEFAULT_NODE_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the witness set here.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Count the far k-coarse components left by a thickened separator.
    Separate {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        separator: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long = "L", default_value_t = 0)]
        thickening: u32,
        #[arg(long = "D", default_value_t = 1)]
        depth: u32,
    },
    /// Slide a persistent family along a path across a separator.
    Scan {
        #[arg(long, value_enum)]
        family: Family,
        /// `auto` for a geodesic from --from to --to, otherwise a file of ids.
        #[arg(long, default_value = "auto")]
        path: String,
        #[arg(long, value_parser = rational)]
        delta: Option<Rational>,
        #[arg(long)]
        separator: PathBuf,
        #[arg(long, default_value_t = 1)]
        r: u32,
        #[arg(long)]
        from: Option<VertexId>,
        #[arg(long)]
        to: Option<VertexId>,
        /// Window for the balls family.
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Levels below the basepoint (tree-annulus, dl).
        #[arg(long, default_value_t = 4)]
        depth: u32,
        #[arg(long, default_value_t = 3)]
        valence: u32,
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        q: u32,
    },
    /// Quasi-median balls of graph products.
    Qm {
        action: QmAction,
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, default_value_t = 2)]
        radius: u32,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 5)]
        max_geodesic: u32,
    },
    /// Registered experiments.
    Experiment {
        action: ExperimentAction,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Experiment to run with default parameters when no config is given.
        #[arg(long)]
        name: Option<String>,
        #[arg(long, default_value = "results")]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum Generate {
    Tree {
        #[arg(long, default_value_t = 3)]
        valence: u32,
        #[arg(long, allow_hyphen_values = true)]
        b_min: i64,
        #[arg(long, allow_hyphen_values = true, default_value_t = 0)]
        b_max: i64,
        #[arg(long, default_value_t = 0)]
        depth_below: u32,
    },
    /// Product of two trees, basepoint one level under the top.
    Product {
        #[arg(long, default_value_t = 3)]
        valence: u32,
        #[arg(long)]
        depth: u32,
    },
    Dl {
        #[arg(long, default_value_t = 2)]
        p: u32,
        #[arg(long, default_value_t = 2)]
        q: u32,
        #[arg(long)]
        band: u32,
        #[arg(long)]
        depth: u32,
    },
    Grid {
        #[arg(long, default_value_t = 2)]
        n: u32,
        #[arg(long)]
        halfwidth: u32,
    },
    Wreath {
        #[arg(long, default_value_t = 2)]
        lamp_order: u32,
        /// `Z` or `Z/n`.
        #[arg(long, default_value = "Z")]
        base: String,
        #[arg(long)]
        radius: u32,
    },
    /// Read the generator from a TOML file with `kind` and parameter keys.
    Config { file: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum InvariantKind {
    Cheeger,
    Cut,
    Poincare,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Exact,
    Heuristic,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum Family {
    TreeAnnulus,
    Dl,
    Balls,
}

#[derive(Clone, Copy, ValueEnum)]
enum QmAction {
    Build,
    Hyperplanes,
    Pc,
    IsoCheck,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentAction {
    Run,
    List,
    Report,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn load_graph(path: &Path) -> Result<GraphWindow> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_cgw(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_set(path: &Path, w: &GraphWindow) -> Result<VertexSet> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    read_cvs(&text, Some(w)).with_context(|| format!("parsing {}", path.display()))
}

fn base_group(s: &str) -> Result<BaseGroup> {
    if s == "Z" {
        return Ok(BaseGroup::integers());
    }
    let n: u32 = s
        .strip_prefix("Z/")
        .and_then(|n| n.parse().ok())
        .ok_or_else(|| anyhow!("base must be Z or Z/n, got {s}"))?;
    Ok(BaseGroup::Finite(FiniteGroup::cyclic_pm1(n)))
}

fn generate(kind: &Generate) -> Result<GraphWindow> {
    Ok(match kind {
        Generate::Tree {
            valence,
            b_min,
            b_max,
            depth_below,
        } => tree_window(*valence, *b_min, *b_max, *depth_below)?.graph().clone(),
        Generate::Product { valence, depth } => annulus_product(*valence, *depth)?.graph().clone(),
        Generate::Dl { p, q, band, depth } => dl_window(*p, *q, *band, *depth)?.graph().clone(),
        Generate::Grid { n, halfwidth } => grid_window(*n, *halfwidth)?,
        Generate::Wreath {
            lamp_order,
            base,
            radius,
        } => wreath_ball(&WreathBallSpec {
            lamp: FiniteGroup::cyclic_pm1(*lamp_order),
            base: base_group(base)?,
            radius: *radius,
        })?
        .graph()
        .clone(),
        Generate::Config { file } => {
            let table: toml::Table = toml::from_str(&fs::read_to_string(file)?)?;
            let int = |k: &str| -> Result<i64> {
                table
                    .get(k)
                    .and_then(toml::Value::as_integer)
                    .ok_or_else(|| anyhow!("generator config needs integer `{k}`"))
            };
            let uint = |k: &str| -> Result<u32> { Ok(u32::try_from(int(k)?)?) };
            let kind = table
                .get("kind")
                .and_then(toml::Value::as_str)
                .ok_or_else(|| anyhow!("generator config needs `kind`"))?;
            let sub = match kind {
                "tree" => Generate::Tree {
                    valence: uint("valence")?,
                    b_min: int("b_min")?,
                    b_max: int("b_max")?,
                    depth_below: uint("depth_below")?,
                },
                "product" => Generate::Product {
                    valence: uint("valence")?,
                    depth: uint("depth")?,
                },
                "dl" => Generate::Dl {
                    p: uint("p")?,
                    q: uint("q")?,
                    band: uint("band")?,
                    depth: uint("depth")?,
                },
                "grid" => Generate::Grid {
                    n: uint("n")?,
                    halfwidth: uint("halfwidth")?,
                },
                "wreath" => Generate::Wreath {
                    lamp_order: uint("lamp_order")?,
                    base: table.get("base").and_then(toml::Value::as_str).unwrap_or("Z").to_string(),
                    radius: uint("radius")?,
                },
                other => bail!("unknown generator kind `{other}`"),
            };
            return generate(&sub);
        }
    })
}

fn describe(rep: &InvariantReport, size: usize, runtime_ms: u128) -> String {
    let witness_size = match &rep.witness {
        Witness::Set(s) => s.len().to_string(),
        Witness::Function(f) => f.len().to_string(),
        Witness::None => String::new(),
    };
    let params = format!(
        "r={};delta={};k={}",
        rep.params.r.map_or_else(String::new, |v| v.to_string()),
        rep.params.delta.map_or_else(String::new, |v| v.to_string()),
        rep.params.k.map_or_else(String::new, |v| v.to_string())
    );
    let kind = format!("{:?}", rep.kind).to_lowercase();
    let exact = rep.exact.map_or_else(String::new, |v| v.to_string());
    let mut text = format!(
        "kind: {kind}\nset size: {size}\nparams: {params}\nmethod: {:?}\nlower: {}\nexact: {}\nupper: {}\ntrusted: {}\n",
        rep.method,
        rep.lower,
        if exact.is_empty() { "-" } else { &exact },
        rep.upper,
        rep.trusted
    );
    if let Some(b) = rep.cheeger_lower {
        text.push_str(&format!("cheeger lower bound: {b}\n"));
    }
    if let Some(t) = rep.two_level {
        text.push_str(&format!("two-level value: {t}\n"));
    }
    if let Some(s) = rep.sampled_min {
        text.push_str(&format!("sampled minimum: {s:.6}\n"));
    }
    text.push_str("kind,params,lower,exact,upper,witness_size,method,runtime_ms\n");
    text.push_str(&format!(
        "{kind},{params},{},{exact},{},{witness_size},{:?},{runtime_ms}\n",
        rep.lower, rep.upper, rep.method
    ));
    text
}

fn path_from(spec: &str, from: Option<VertexId>, to: Option<VertexId>, w: &GraphWindow) -> Result<Vec<VertexId>> {
    if spec == "auto" {
        let (Some(a), Some(b)) = (from, to) else {
            bail!("--path auto needs --from and --to");
        };
        return Ok(geodesic_path(w, a, b)?);
    }
    let text = fs::read_to_string(spec).with_context(|| format!("reading path file {spec}"))?;
    text.split_whitespace()
        .map(|t| t.parse::<VertexId>().map_err(|_| anyhow!("bad vertex id `{t}` in {spec}")))
        .collect()
}

fn scan(fam: &PersistentFamily<'_>, args: &ScanArgs) -> Result<Verdict> {
    let w = fam.window();
    let sep = load_set(&args.separator, w)?;
    let path = path_from(&args.path, args.from, args.to, w)?;
    let part = Partition::k_components(w, sep, fam.k)?;
    let cert = scan_for_cut(fam, &path, &part, args.delta, args.r)?;
    println!("family: {} (alpha {})", fam.name, fam.alpha);
    println!("index s: {} (centre {})", cert.s, cert.centre);
    println!("delta: {}", cert.delta);
    println!("part {}: {} -> {} points", cert.part, cert.before, cert.after);
    println!("|A| = {}, |A ∩ S| = {}", cert.set.len(), cert.cut.len());
    println!("ratio system: {}", cert.ratio_system);
    println!("all parts within delta|A|: {}", cert.parts_within);
    println!("cut certified: {}", cert.cut_certified);
    print!("{}", write_cvs(&cert.cut));
    Ok(if cert.cut_certified && cert.parts_within {
        Verdict::Pass
    } else {
        Verdict::Fail
    })
}

struct ScanArgs {
    path: String,
    delta: Option<Rational>,
    separator: PathBuf,
    r: u32,
    from: Option<VertexId>,
    to: Option<VertexId>,
}

fn qm(action: QmAction, spec: &Path, radius: u32, out: Option<&Path>, max_geodesic: u32) -> Result<Verdict> {
    let file = QmSpecFile::parse(&fs::read_to_string(spec).with_context(|| format!("reading {}", spec.display()))?)?;
    match action {
        QmAction::Build => {
            let w = qm_ball(&file.product()?, radius)?;
            eprintln!(
                "{} vertices, {} cliques, {} hyperplanes, complete: {}",
                w.graph().len(),
                w.cliques().len(),
                w.hyperplanes().len(),
                w.is_complete()
            );
            emit(out, &write_cgw(w.graph()))?;
            Ok(Verdict::Pass)
        }
        QmAction::Hyperplanes => {
            let w = qm_ball(&file.product()?, radius)?;
            let mut text = String::from("id,vertex,coset,edges,cliques,partial\n");
            for (j, h) in w.hyperplanes().iter().enumerate() {
                let coset: Vec<String> = h.coset.syllables().iter().map(|(u, r)| format!("{u}^{r}")).collect();
                text.push_str(&format!(
                    "{j},{},{},{},{},{}\n",
                    h.vertex,
                    coset.join(" "),
                    h.edges.len(),
                    h.cliques.len(),
                    h.partial
                ));
            }
            emit(out, &text)?;
            let s = structure_checks(&w, max_geodesic)?;
            let m = metric_checks(&w, max_geodesic)?;
            eprintln!("{s:?}\n{m:?}");
            Ok(if s.passes() && m.passes() { Verdict::Pass } else { Verdict::Fail })
        }
        QmAction::Pc => {
            let w = qm_ball(&file.product()?, radius)?;
            let pc = pc_build(&w)?;
            let rep = pc_checks(&pc, &w)?;
            eprintln!("{rep:?}");
            emit(out, &write_cgw(pc.graph()))?;
            Ok(if rep.passes() { Verdict::Pass } else { Verdict::Fail })
        }
        QmAction::IsoCheck => {
            let pw = file.partial_wreath(radius)?;
            let iso = pc_iso_check(&pw)?;
            let (proj, _, _) = projection_check(&pw)?;
            let text = format!(
                "{iso:?}\niso passes: {}\n{proj:?}\nprojection is a contraction: {}\nprojection is an isomorphism: {}\n",
                iso.passes(),
                proj.is_contraction(),
                proj.is_isomorphism()
            );
            emit(out, &text)?;
            Ok(if iso.passes() { Verdict::Pass } else { Verdict::Fail })
        }
    }
}

fn experiment(action: ExperimentAction, config: Option<&Path>, name: Option<&str>, out: &Path) -> Result<Verdict> {
    match action {
        ExperimentAction::List => {
            for e in registry() {
                println!("{:<20} {}", e.name, e.about);
            }
            Ok(Verdict::Pass)
        }
        ExperimentAction::Run => {
            let specs = match (config, name) {
                (Some(path), _) => ConfigFile::load(path)?.experiment,
                (None, Some(n)) => vec![ExperimentSpec::named(n)],
                (None, None) => bail!("experiment run needs --config or --name"),
            };
            if specs.is_empty() {
                bail!("config lists no experiments");
            }
            let mut verdicts = Vec::new();
            for spec in &specs {
                let ctx = Context::new(Some(Cache::from_env()));
                let rec = experiments::run(spec, &ctx)?;
                let dir = spec.out.as_ref().map_or_else(|| out.to_path_buf(), |o| out.join(o));
                experiments::write_outputs(&rec, &dir)?;
                print!("{}", experiments::verdict_text(&rec));
                verdicts.push(rec.verdict);
            }
            Ok(Verdict::combine(verdicts))
        }
        ExperimentAction::Report => {
            let results = experiments::report(out)?;
            for (name, v) in &results {
                println!("{v} {name}");
            }
            Ok(Verdict::combine(results.into_iter().map(|(_, v)| v)))
        }
    }
}

fn run(cli: Cli) -> Result<Verdict> {
    match cli.command {
        Command::Generate { kind, out, cache } => {
            let w = generate(&kind)?;
            if cache {
                let hash = Cache::from_env().store(&w)?;
                eprintln!("cached as {hash}");
            }
            emit(out.as_deref(), &write_cgw(&w))?;
            Ok(Verdict::Pass)
        }
        Command::Invariant {
            kind,
            graph,
            set,
            r,
            delta,
            k,
            mode,
            budget,
            seed,
            witness,
        } => {
            let w = load_graph(&graph)?;
            let a = match &set {
                Some(p) => load_set(p, &w)?,
                None => w.all_vertices(),
            };
            let start = Instant::now();
            let rep = match kind {
                InvariantKind::Cheeger => cheeger(
                    &w,
                    &a,
                    r,
                    if mode == Mode::Heuristic { CheegerMode::Heuristic } else { CheegerMode::default() },
                )?,
                InvariantKind::Cut => cut(
                    &w,
                    &a,
                    r,
                    delta,
                    if mode == Mode::Heuristic {
                        CutMode::Heuristic
                    } else {
                        CutMode::BranchAndBound { node_budget: budget }
                    },
                )?,
                InvariantKind::Poincare => {
                    let ms = MetricMeasureSet::from_window(&w, &a)?;
                    let pm = if mode == Mode::Sampled {
                        PoincareMode::Sampled { starts: 16, seed }
                    } else {
                        PoincareMode::Enumerate
                    };
                    poincare_l1(&ms, k, pm)?
                }
            };
            print!("{}", describe(&rep, a.len(), start.elapsed().as_millis()));
            if let (Some(path), Some(s)) = (&witness, rep.witness_set()) {
                fs::write(path, write_cvs(s))?;
            }
            Ok(if rep.exact.is_some() { Verdict::Pass } else { Verdict::Inconclusive })
        }
        Command::Separate {
            graph,
            separator,
            k,
            thickening,
            depth,
        } => {
            let w = load_graph(&graph)?;
            let sep = load_set(&separator, &w)?;
            let v = separation_witness(&SeparationInstance {
                window: &w,
                separator: sep,
                k,
                thickening,
                depth,
            })?;
            println!("components: {}", v.components.len());
            for (i, c) in v.components.iter().enumerate() {
                let far = if v.qualifying.contains(&i) { " (reaches D)" } else { "" };
                println!("  {i}: {} vertices{far}", c.len());
            }
            println!("separates: {}\ntrusted: {}", v.separates, v.trusted);
            Ok(match (v.separates, v.trusted) {
                (true, true) => Verdict::Pass,
                (true, false) => Verdict::Inconclusive,
                (false, _) => Verdict::Fail,
            })
        }
        Command::Scan {
            family,
            path,
            delta,
            separator,
            r,
            from,
            to,
            graph,
            depth,
            valence,
            p,
            q,
        } => {
            let args = ScanArgs {
                path,
                delta,
                separator,
                r,
                from,
                to,
            };
            match family {
                Family::Balls => {
                    let g = load_graph(&graph.ok_or_else(|| anyhow!("--family balls needs --graph"))?)?;
                    let fam = PersistentFamily::balls(&g);
                    scan(&fam, &args)
                }
                Family::TreeAnnulus => {
                    let tp = annulus_product(valence, depth)?;
                    let fam = PersistentFamily::tree_annuli(&tp);
                    scan(&fam, &args)
                }
                Family::Dl => {
                    let dw = dl_for(p, q, depth)?;
                    let fam = PersistentFamily::dl_sets(&dw);
                    scan(&fam, &args)
                }
            }
        }
        Command::Qm {
            action,
            spec,
            radius,
            out,
            max_geodesic,
        } => qm(action, &spec, radius, out.as_deref(), max_geodesic),
        Command::Experiment {
            action,
            config,
            name,
            out,
        } => experiment(action, config.as_deref(), name.as_deref(), &out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}

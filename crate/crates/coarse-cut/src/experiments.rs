//! Experiment registry and runner.
//!
//! Every experiment turns an [`ExperimentSpec`] into a table of exact values
//! and a list of assertions. The runner writes `<slug>.csv`, `<slug>.svg`
//! (drawn from the CSV alone), `<slug>.verdict.txt` and `<slug>.timing.csv`.
//! Only the timing file depends on the machine.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use coarse_cut_core::generators::{
    dl_persistent, dl_window, grid_window, tree_annulus, tree_window, BaseGroup, DlWindow, TreeProduct,
};
use coarse_cut_core::graph::{ball, sphere};
use coarse_cut_core::group::FiniteGroup;
use coarse_cut_core::invariants::{cut, poincare_l1, CutMode, MetricMeasureSet, PoincareMode};
use coarse_cut_core::quasimedian::{
    metric_checks, pc_build, pc_checks, pc_iso_check, projection_check, qm_ball, structure_checks,
    GraphProductSpec, PartialWreathSpec,
};
use coarse_cut_core::separation::{geodesic_path, persistence_check, scan_for_cut, Partition, PersistentFamily};
use coarse_cut_core::{GraphWindow, Rational, VertexId, VertexSet};

use crate::cache::Cache;
use crate::config::ExperimentSpec;
use crate::report::{Plot, Table};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Inconclusive,
    Fail,
}

impl Verdict {
    /// 0 pass, 1 fail, 2 inconclusive.
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::Inconclusive => 2,
        }
    }

    pub fn combine(items: impl IntoIterator<Item = Verdict>) -> Verdict {
        let mut worst = Verdict::Pass;
        for v in items {
            worst = worst.max(v);
        }
        worst
    }

    fn of(ok: bool) -> Verdict {
        if ok {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "PASS",
            Verdict::Fail => "FAIL",
            Verdict::Inconclusive => "INCONCLUSIVE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assertion {
    pub name: String,
    pub verdict: Verdict,
    pub detail: String,
}

impl Assertion {
    fn new(name: impl Into<String>, verdict: Verdict, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            verdict,
            detail: detail.into(),
        }
    }
}

/// Which columns of the table get plotted.
#[derive(Debug, Clone, Copy)]
pub struct PlotSpec {
    pub title: &'static str,
    pub x: &'static str,
    pub ys: &'static [&'static str],
    pub log_y: bool,
}

pub struct Outcome {
    pub table: Table,
    pub assertions: Vec<Assertion>,
}

/// Shared state of one run: the window cache and the timing log.
pub struct Context {
    pub cache: Option<Cache>,
    build_lock: Mutex<()>,
    timings: Mutex<Vec<(String, Duration, bool)>>,
}

impl Context {
    pub fn new(cache: Option<Cache>) -> Self {
        Self {
            cache,
            build_lock: Mutex::new(()),
            timings: Mutex::new(Vec::new()),
        }
    }

    /// A plain window through the cache, built at most once at a time.
    pub fn window(&self, key: &str, build: impl FnOnce() -> Result<GraphWindow, Error>) -> Result<GraphWindow, Error> {
        let start = Instant::now();
        let (w, hit) = match &self.cache {
            Some(cache) => {
                let _guard = self.build_lock.lock().expect("build lock");
                cache.window(key, build)?
            }
            None => (build()?, false),
        };
        self.log(format!("window {key}"), start.elapsed(), hit);
        Ok(w)
    }

    fn log(&self, what: String, took: Duration, hit: bool) {
        self.timings.lock().expect("timing log").push((what, took, hit));
    }

    fn timed<T>(&self, what: impl Into<String>, f: impl FnOnce() -> T) -> T {
        let start = Instant::now();
        let out = f();
        self.log(what.into(), start.elapsed(), false);
        out
    }

    pub fn timings(&self) -> Vec<(String, Duration, bool)> {
        self.timings.lock().expect("timing log").clone()
    }
}

type Runner = fn(&ExperimentSpec, &Context) -> Result<Outcome, Error>;

pub struct Experiment {
    pub name: &'static str,
    pub about: &'static str,
    pub plot: PlotSpec,
    run: Runner,
}

pub fn registry() -> &'static [Experiment] {
    &REGISTRY
}

pub fn lookup(name: &str) -> Result<&'static Experiment, Error> {
    REGISTRY
        .iter()
        .find(|e| e.name == name || e.name.strip_prefix("exp:") == Some(name))
        .ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

static REGISTRY: [Experiment; 8] = [
    Experiment {
        name: "exp:tree-annulus",
        about: "annuli A_x(k) in T3 x T3: sphere share (k+1)2^k, containment in B(x,4k), 1/8-persistence",
        plot: PlotSpec {
            title: "tree annuli",
            x: "k",
            ys: &["size", "sphere_share"],
            log_y: true,
        },
        run: tree_annulus_exp,
    },
    Experiment {
        name: "exp:dl-vset",
        about: "V-sets of DL(p,q): sizes (r+1)2^r and 1/4-persistence",
        plot: PlotSpec {
            title: "DL V-sets",
            x: "r",
            ys: &["size", "predicted"],
            log_y: true,
        },
        run: dl_vset_exp,
    },
    Experiment {
        name: "exp:tree-cut",
        about: "exact cut^delta_1 of tree annuli against the Cheeger lower bound",
        plot: PlotSpec {
            title: "cut of tree annuli",
            x: "k",
            ys: &["upper", "cheeger_lower"],
            log_y: false,
        },
        run: tree_cut_exp,
    },
    Experiment {
        name: "exp:tree-poincare",
        about: "two-level L1-Poincare value of tree annuli against 3/(4(k+2))",
        plot: PlotSpec {
            title: "Poincare constant of tree annuli",
            x: "k",
            ys: &["two_level", "bound"],
            log_y: false,
        },
        run: tree_poincare_exp,
    },
    Experiment {
        name: "exp:grid-scan",
        about: "path scan of Z^2 balls across a vertical line",
        plot: PlotSpec {
            title: "scan across a line in Z^2",
            x: "r",
            ys: &["cut_size"],
            log_y: false,
        },
        run: grid_scan_exp,
    },
    Experiment {
        name: "exp:grid-cut",
        about: "exact cut of balls in Z^n against r^(n-1)",
        plot: PlotSpec {
            title: "cut of balls in Z^n",
            x: "r",
            ys: &["cut", "ratio"],
            log_y: false,
        },
        run: grid_cut_exp,
    },
    Experiment {
        name: "exp:qm-structure",
        about: "quasi-median, coherence and pointed-clique checks on graph-product balls",
        plot: PlotSpec {
            title: "quasi-median balls",
            x: "radius",
            ys: &["vertices", "pc_vertices"],
            log_y: true,
        },
        run: qm_structure_exp,
    },
    Experiment {
        name: "exp:partial-wreath",
        about: "partial wreath products: pointed-clique isomorphism and projection to the wreath product",
        plot: PlotSpec {
            title: "partial wreath balls",
            x: "radius",
            ys: &["vertices", "edges"],
            log_y: false,
        },
        run: partial_wreath_exp,
    },
];

/// Runs `f` over `items` on scoped threads; results keep the input order.
fn par_map<T: Sync, R: Send>(items: &[T], f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let f = &f;
    std::thread::scope(|s| {
        let handles: Vec<_> = items.iter().map(|x| s.spawn(move || f(x))).collect();
        handles.into_iter().map(|h| h.join().expect("datapoint panicked")).collect()
    })
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

/// `T_v x T_v` with the basepoint one level under the top, `depth` levels
/// of room below it.
pub fn annulus_product(valence: u32, depth: u32) -> Result<TreeProduct, Error> {
    let t = tree_window(valence, -(i64::from(depth) + 1), 0, 1)?;
    Ok(TreeProduct::new(t.clone(), t)?)
}

fn tree_annulus_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let valence = spec.uint("generator", "valence", 3)?;
    let ks = spec.uints("invariant", "k", &[1, 2, 3, 4])?;
    let pmax = spec.uint("invariant", "persistence_max", 4)?;
    let alpha = spec.rational("invariant", "alpha", Rational::new(1, 8))?;
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let tp = ctx.timed("tree product", || annulus_product(valence, kmax.max(pmax) + 1))?;
    let g = tp.graph();
    let x = tp.basepoint();
    let probes = ball(g, x, 1)?.value.into_vec();
    let q = i64::from(valence - 1);

    let mut table = Table::new(&["k", "size", "sphere_share", "predicted", "in_ball_4k", "worst_ratio"]);
    let mut shares_ok = true;
    let mut contained = true;
    let mut persistent = Verdict::Pass;
    let mut worst_overall: Option<Rational> = None;
    for &k in &ks {
        let a = ctx.timed(format!("annulus k={k}"), || tree_annulus(&tp, x, k))?;
        let share = a.intersection_len(&sphere(g, x, k)?.value);
        let predicted = (i64::from(k) + 1) * q.pow(k);
        let inside = a.is_subset(&ball(g, x, 4 * k)?.value);
        shares_ok &= share as i64 == predicted;
        contained &= inside;
        let ratio = if (1..=pmax).contains(&k) {
            let fam = PersistentFamily::tree_annuli(&tp);
            let rep = ctx.timed(format!("persistence k={k}"), || persistence_check(&fam, &[k], &probes))?;
            if !rep.passes() || rep.worst_ratio.is_none_or(|r| r < alpha) {
                persistent = Verdict::Fail;
            }
            worst_overall = match (worst_overall, rep.worst_ratio) {
                (Some(a), Some(b)) => Some(a.min(b)),
                (a, b) => a.or(b),
            };
            rep.worst_ratio
        } else {
            None
        };
        table.push(vec![
            k.to_string(),
            a.len().to_string(),
            share.to_string(),
            predicted.to_string(),
            inside.to_string(),
            opt(ratio),
        ]);
    }
    Ok(Outcome {
        table,
        assertions: vec![
            Assertion::new("sphere share is (k+1)(v-1)^k", Verdict::of(shares_ok), ""),
            Assertion::new("A_x(k) inside B(x,4k)", Verdict::of(contained), ""),
            Assertion::new(
                format!("persistence ratio >= {alpha}"),
                persistent,
                format!("worst ratio {}", opt(worst_overall)),
            ),
        ],
    })
}

/// A DL window deep enough for `V`-sets of radius `r` at neighbours of the
/// basepoint.
pub fn dl_for(p: u32, q: u32, r: u32) -> Result<DlWindow, Error> {
    Ok(dl_window(p, q, r + 1, r + 1)?)
}

fn dl_vset_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let p = spec.uint("generator", "p", 2)?;
    let q = spec.uint("generator", "q", 2)?;
    let rs = spec.uints("invariant", "r", &[1, 2, 3, 4, 5, 6])?;
    let pmax = spec.uint("invariant", "persistence_max", 4)?;
    let alpha = spec.rational("invariant", "alpha", Rational::new(1, 4))?;
    let rmax = rs.iter().copied().max().unwrap_or(1);
    let sizes_window = ctx.timed("dl window (sizes)", || dl_window(p, q, rmax, rmax))?;
    let persist_window = ctx.timed("dl window (persistence)", || dl_for(p, q, pmax))?;
    let probes = ball(persist_window.graph(), persist_window.graph().basepoint(), 1)?.value.into_vec();

    let mut table = Table::new(&["r", "size", "predicted", "worst_ratio"]);
    let mut sizes_ok = true;
    let mut persistent = Verdict::Pass;
    for &r in &rs {
        let x = sizes_window.graph().basepoint();
        let a = dl_persistent(&sizes_window, x, r)?;
        // |V(r)| = sum_j p^j q^(r-j)
        let predicted: i64 = (0..=r).map(|j| i64::from(p).pow(j) * i64::from(q).pow(r - j)).sum();
        sizes_ok &= a.len() as i64 == predicted;
        let ratio = if (1..=pmax).contains(&r) {
            let fam = PersistentFamily::dl_sets(&persist_window);
            let rep = ctx.timed(format!("persistence r={r}"), || persistence_check(&fam, &[r], &probes))?;
            if !rep.passes() || rep.worst_ratio.is_none_or(|w| w < alpha) {
                persistent = Verdict::Fail;
            }
            rep.worst_ratio
        } else {
            None
        };
        table.push(vec![r.to_string(), a.len().to_string(), predicted.to_string(), opt(ratio)]);
    }
    Ok(Outcome {
        table,
        assertions: vec![
            Assertion::new("|A(r)| = sum_j p^j q^(r-j)", Verdict::of(sizes_ok), ""),
            Assertion::new(format!("persistence ratio >= {alpha}"), persistent, ""),
        ],
    })
}

fn tree_cut_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let valence = spec.uint("generator", "valence", 3)?;
    let ks = spec.uints("invariant", "k", &[1, 2])?;
    let r = spec.uint("invariant", "r", 1)?;
    let delta = spec.rational("invariant", "delta", Rational::new(15, 16))?;
    let budget = spec.int("invariant", "budget", coarse_cut_core::invariants::DEFAULT_NODE_BUDGET as i64)?;
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let tp = annulus_product(valence, kmax)?;
    let x = tp.basepoint();
    let mode = CutMode::BranchAndBound {
        node_budget: budget.max(1) as u64,
    };
    let reports = par_map(&ks, |&k| {
        ctx.timed(format!("cut k={k}"), || -> Result<_, Error> {
            let a = tree_annulus(&tp, x, k)?;
            Ok((a.len(), cut(tp.graph(), &a, r, delta, mode)?))
        })
    });
    let mut table = Table::new(&["k", "size", "lower", "exact", "upper", "cheeger_lower", "witness_size", "nodes"]);
    let mut values = Vec::new();
    let mut above = Verdict::Pass;
    for (&k, rep) in ks.iter().zip(reports) {
        let (size, rep) = rep?;
        let lower_bound = rep.cheeger_lower.unwrap_or_default();
        if rep.lower < lower_bound && rep.exact.is_some() {
            above = Verdict::Fail;
        }
        if rep.exact.is_none() && above == Verdict::Pass {
            above = Verdict::Inconclusive;
        }
        values.push(rep.exact);
        table.push(vec![
            k.to_string(),
            size.to_string(),
            rep.lower.to_string(),
            opt(rep.exact),
            rep.upper.to_string(),
            lower_bound.to_string(),
            opt(rep.witness_set().map(VertexSet::len)),
            rep.nodes.to_string(),
        ]);
    }
    let increasing = if values.iter().any(Option::is_none) {
        Verdict::Inconclusive
    } else {
        Verdict::of(values.windows(2).all(|w| w[0] < w[1]))
    };
    let shown: Vec<String> = values.iter().map(|v| opt(*v)).collect();
    Ok(Outcome {
        table,
        assertions: vec![
            Assertion::new("cut strictly increasing in k", increasing, format!("values [{}]", shown.join(", "))),
            Assertion::new("cut >= lambda h_r |A|", above, ""),
        ],
    })
}

fn tree_poincare_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let valence = spec.uint("generator", "valence", 3)?;
    let ks = spec.uints("invariant", "k", &[2])?;
    let scale = spec.uint("invariant", "scale", 1)?;
    let kmax = ks.iter().copied().max().unwrap_or(1);
    let tp = annulus_product(valence, kmax)?;
    let x = tp.basepoint();
    let mut table = Table::new(&["k", "size", "two_level", "exact", "bound"]);
    let mut ok = true;
    for &k in &ks {
        let a = tree_annulus(&tp, x, k)?;
        let ms = MetricMeasureSet::from_window(tp.graph(), &a)?;
        let rep = ctx.timed(format!("poincare k={k}"), || poincare_l1(&ms, scale, PoincareMode::Enumerate))?;
        let two = rep.two_level.expect("enumeration reports the two-level value");
        let bound = Rational::new(3, 4 * (i64::from(k) + 2));
        ok &= two >= bound;
        table.push(vec![
            k.to_string(),
            a.len().to_string(),
            two.to_string(),
            opt(rep.exact),
            bound.to_string(),
        ]);
    }
    Ok(Outcome {
        table,
        assertions: vec![Assertion::new("two-level h^1 >= 3/(4(k+2))", Verdict::of(ok), "")],
    })
}

/// Ball family in `Z^2`, the line `x = 0`, and a geodesic from `(-r-1, 0)`
/// to `(r+1, 0)`.
pub fn grid_scan(g: &GraphWindow, r: u32, delta: Option<Rational>) -> Result<coarse_cut_core::separation::ScanCertificate, Error> {
    let idx = g.label_index();
    let line: VertexSet = g.vertices().filter(|&v| g.label(v)[0] == 0).collect();
    let part = Partition::k_components(g, line, 1)?;
    let fam = PersistentFamily::balls(g);
    let reach = i64::from(r) + 1;
    let at = |x: i64| -> Result<VertexId, Error> {
        idx.get(&[x, 0][..])
            .copied()
            .ok_or_else(|| Error::Config(format!("({x}, 0) is outside the grid")))
    };
    let path = geodesic_path(g, at(-reach)?, at(reach)?)?;
    Ok(scan_for_cut(&fam, &path, &part, delta, r)?)
}

fn grid_scan_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let half = spec.uint("generator", "halfwidth", 12)?;
    let rs = spec.uints("invariant", "r", &[2, 3, 4, 5])?;
    let delta = match spec.invariant.get("delta") {
        Some(_) => Some(spec.rational("invariant", "delta", Rational::new(1, 2))?),
        None => None,
    };
    let g = ctx.window(&format!("grid n=2 halfwidth={half}"), || Ok(grid_window(2, half)?))?;
    let certs = par_map(&rs, |&r| ctx.timed(format!("scan r={r}"), || grid_scan(&g, r, delta)));
    let mut table = Table::new(&["r", "s", "centre_x", "set_size", "cut_size", "certified", "parts_within"]);
    let mut ok = true;
    for (&r, cert) in rs.iter().zip(certs) {
        let cert = cert?;
        ok &= cert.cut_certified && cert.parts_within && cert.ratio_system && cert.cut.len() >= r as usize;
        table.push(vec![
            r.to_string(),
            cert.s.to_string(),
            g.label(cert.centre)[0].to_string(),
            cert.set.len().to_string(),
            cert.cut.len().to_string(),
            cert.cut_certified.to_string(),
            cert.parts_within.to_string(),
        ]);
    }
    Ok(Outcome {
        table,
        assertions: vec![Assertion::new("certified cut meets the line in >= r points", Verdict::of(ok), "")],
    })
}

fn grid_cut_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let n = spec.uint("generator", "n", 2)?;
    let rs = spec.uints("invariant", "r", &[1, 2, 3])?;
    let delta = spec.rational("invariant", "delta", Rational::new(1, 2))?;
    let budget = spec.int("invariant", "budget", coarse_cut_core::invariants::DEFAULT_NODE_BUDGET as i64)?;
    let rmax = rs.iter().copied().max().unwrap_or(1);
    let g = ctx.window(&format!("grid n={n} halfwidth={}", rmax + 1), || Ok(grid_window(n, rmax + 1)?))?;
    let mode = CutMode::BranchAndBound {
        node_budget: budget.max(1) as u64,
    };
    let reports = par_map(&rs, |&r| {
        ctx.timed(format!("cut r={r}"), || -> Result<_, Error> {
            let b = ball(&g, g.basepoint(), r)?.value;
            Ok((b.len(), cut(&g, &b, 1, delta, mode)?))
        })
    });
    let mut table = Table::new(&["n", "r", "size", "cut", "upper", "ratio"]);
    let mut previous: Option<Rational> = None;
    let mut monotone = Verdict::Pass;
    for (&r, rep) in rs.iter().zip(reports) {
        let (size, rep) = rep?;
        let scale = Rational::from_integer(i64::from(r).pow(n - 1));
        match (previous, rep.exact) {
            (_, None) => monotone = monotone.max(Verdict::Inconclusive),
            (Some(p), Some(v)) if v < p => monotone = Verdict::Fail,
            _ => {}
        }
        previous = rep.exact.or(previous);
        table.push(vec![
            n.to_string(),
            r.to_string(),
            size.to_string(),
            opt(rep.exact),
            rep.upper.to_string(),
            opt(rep.exact.map(|v| v / scale)),
        ]);
    }
    Ok(Outcome {
        table,
        assertions: vec![Assertion::new("cut of balls non-decreasing in r", monotone, "")],
    })
}

/// The three quasi-median fixtures: `K_3` with `Z/3`, an edge with `Z/2`
/// and the path `P_3` with `Z/2`.
pub fn qm_fixtures() -> Vec<(&'static str, GraphProductSpec)> {
    vec![
        (
            "k3-z3",
            GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(3), &[(0, 1), (1, 2), (0, 2)]).expect("fixture"),
        ),
        (
            "edge-z2",
            GraphProductSpec::uniform(2, FiniteGroup::cyclic_pm1(2), &[(0, 1)]).expect("fixture"),
        ),
        (
            "p3-z2",
            GraphProductSpec::uniform(3, FiniteGroup::cyclic_pm1(2), &[(0, 1), (1, 2)]).expect("fixture"),
        ),
    ]
}

fn qm_structure_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let radius = spec.uint("generator", "radius", 3)?;
    let max_len = spec.uint("invariant", "max_geodesic", 5)?;
    let mut table = Table::new(&[
        "fixture",
        "radius",
        "vertices",
        "hyperplanes",
        "partial_hyperplanes",
        "pc_vertices",
        "trusted_pairs",
        "bulkheads",
        "structure_ok",
        "metric_ok",
        "pc_ok",
    ]);
    let mut assertions = Vec::new();
    for (name, gp) in qm_fixtures() {
        let w = ctx.timed(format!("qm ball {name}"), || qm_ball(&gp, radius))?;
        let s = ctx.timed(format!("structure {name}"), || structure_checks(&w, max_len))?;
        let m = ctx.timed(format!("metric {name}"), || metric_checks(&w, max_len))?;
        let pc = pc_build(&w)?;
        let p = ctx.timed(format!("pc {name}"), || pc_checks(&pc, &w))?;
        table.push(vec![
            name.to_string(),
            radius.to_string(),
            s.vertices.to_string(),
            s.hyperplanes.to_string(),
            s.partial_hyperplanes.to_string(),
            p.pc_vertices.to_string(),
            p.trusted_pairs.to_string(),
            p.bulkheads.to_string(),
            s.passes().to_string(),
            m.passes().to_string(),
            p.passes().to_string(),
        ]);
        assertions.push(Assertion::new(format!("{name}: quasi-median structure"), Verdict::of(s.passes()), format!("{s:?}")));
        assertions.push(Assertion::new(format!("{name}: coherent metrics"), Verdict::of(m.passes()), format!("{m:?}")));
        assertions.push(Assertion::new(format!("{name}: pointed cliques"), Verdict::of(p.passes()), format!("{p:?}")));
    }
    Ok(Outcome { table, assertions })
}

fn partial_wreath_exp(spec: &ExperimentSpec, ctx: &Context) -> Result<Outcome, Error> {
    let radius = spec.uint("generator", "radius", 3)?;
    let lamp = spec.uint("generator", "lamp_order", 2)?;
    let finite_base = spec.uint("generator", "finite_base", 3)?;
    let mut table = Table::new(&["case", "radius", "vertices", "edges", "passes"]);
    let line = PartialWreathSpec::cayley(FiniteGroup::cyclic_pm1(lamp), BaseGroup::integers(), radius);
    let iso = ctx.timed("pc iso check", || pc_iso_check(&line))?;
    table.push(vec![
        "pc-iso Z".into(),
        radius.to_string(),
        iso.cayley_vertices.to_string(),
        iso.cayley_edges.to_string(),
        iso.passes().to_string(),
    ]);
    let complete = PartialWreathSpec::cayley(
        FiniteGroup::cyclic_pm1(lamp),
        BaseGroup::Finite(FiniteGroup::cyclic_pm1(finite_base)),
        radius,
    );
    let (proj, partial, _) = ctx.timed("projection check", || projection_check(&complete))?;
    table.push(vec![
        format!("projection Z/{finite_base}"),
        radius.to_string(),
        proj.partial_vertices.to_string(),
        partial.graph().edge_count().to_string(),
        proj.is_isomorphism().to_string(),
    ]);
    Ok(Outcome {
        table,
        assertions: vec![
            Assertion::new("pointed cliques match the Cayley ball over Z", Verdict::of(iso.passes()), format!("{iso:?}")),
            Assertion::new(
                format!("complete Gamma over Z/{finite_base} gives the wreath ball"),
                Verdict::of(proj.is_isomorphism()),
                format!("{proj:?}"),
            ),
        ],
    })
}

/// Result of one run.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub name: String,
    pub spec_hash: String,
    pub seed: u64,
    pub table: Table,
    pub assertions: Vec<Assertion>,
    pub verdict: Verdict,
    pub timings: Vec<(String, Duration, bool)>,
    pub environment: String,
}

fn slug(name: &str) -> &str {
    name.strip_prefix("exp:").unwrap_or(name)
}

fn environment() -> String {
    format!(
        "{} {} {}",
        env!("CARGO_PKG_VERSION"),
        std::env::consts::OS,
        std::env::consts::ARCH
    )
}

/// Runs one experiment. Exhausted budgets and untrusted queries end the run
/// as inconclusive, never as a failure.
pub fn run(spec: &ExperimentSpec, ctx: &Context) -> Result<RunRecord, Error> {
    let exp = lookup(&spec.name)?;
    let outcome = match (exp.run)(spec, ctx) {
        Ok(o) => o,
        Err(Error::Core(
            e @ (coarse_cut_core::Error::BudgetExceeded(_)
            | coarse_cut_core::Error::CapExceeded { .. }
            | coarse_cut_core::Error::Untrusted(_)),
        )) => Outcome {
            table: Table::new(&["error"]),
            assertions: vec![Assertion::new("run completed", Verdict::Inconclusive, e.to_string())],
        },
        Err(e) => return Err(e),
    };
    let verdict = Verdict::combine(outcome.assertions.iter().map(|a| a.verdict));
    Ok(RunRecord {
        name: exp.name.to_string(),
        spec_hash: spec.hash(),
        seed: spec.seed,
        table: outcome.table,
        assertions: outcome.assertions,
        verdict,
        timings: ctx.timings(),
        environment: environment(),
    })
}

pub fn verdict_text(rec: &RunRecord) -> String {
    let mut out = format!(
        "experiment {}\nspec {}\nseed {}\nverdict {}\n",
        rec.name, rec.spec_hash, rec.seed, rec.verdict
    );
    for a in &rec.assertions {
        out.push_str(&format!("{} {}", a.verdict, a.name));
        if !a.detail.is_empty() {
            out.push_str(&format!(" ({})", a.detail));
        }
        out.push('\n');
    }
    out
}

/// Writes the CSV, SVG, verdict and timing files of a run into `dir`.
pub fn write_outputs(rec: &RunRecord, dir: &Path) -> Result<(), Error> {
    fs::create_dir_all(dir)?;
    let exp = lookup(&rec.name)?;
    let base = slug(&rec.name);
    let csv = rec.table.to_csv();
    fs::write(dir.join(format!("{base}.csv")), &csv)?;
    fs::write(dir.join(format!("{base}.svg")), svg_from_csv(exp, &csv)?)?;
    fs::write(dir.join(format!("{base}.verdict.txt")), verdict_text(rec))?;
    let mut timing = Table::new(&["step", "millis", "cache_hit"]);
    for (what, took, hit) in &rec.timings {
        timing.push(vec![what.clone(), took.as_millis().to_string(), hit.to_string()]);
    }
    let mut env = Table::new(&["environment"]);
    env.push(vec![rec.environment.clone()]);
    fs::write(dir.join(format!("{base}.timing.csv")), timing.to_csv() + &env.to_csv())?;
    Ok(())
}

pub fn svg_from_csv(exp: &Experiment, csv: &str) -> Result<String, Error> {
    let table = Table::from_csv(csv)?;
    if table.column(exp.plot.x).is_none() {
        // an inconclusive run leaves no data columns
        return Ok(Plot::from_table(&Table::new(&[exp.plot.x]), exp.plot.title, exp.plot.x, &[], false)?.render());
    }
    Ok(Plot::from_table(&table, exp.plot.title, exp.plot.x, exp.plot.ys, exp.plot.log_y)?.render())
}

/// Regenerates every SVG in `dir` from its CSV and collects the recorded
/// verdicts.
pub fn report(dir: &Path) -> Result<Vec<(String, Verdict)>, Error> {
    let mut out = Vec::new();
    let mut entries: Vec<_> = fs::read_dir(dir)?.collect::<Result<_, _>>()?;
    entries.sort_by_key(|e| e.file_name());
    for entry in entries {
        let name = entry.file_name().to_string_lossy().into_owned();
        let Some(base) = name.strip_suffix(".verdict.txt") else { continue };
        let text = fs::read_to_string(entry.path())?;
        let verdict = match text.lines().find_map(|l| l.strip_prefix("verdict ")) {
            Some("PASS") => Verdict::Pass,
            Some("FAIL") => Verdict::Fail,
            _ => Verdict::Inconclusive,
        };
        if let Ok(exp) = lookup(base) {
            let csv = fs::read_to_string(dir.join(format!("{base}.csv")))?;
            fs::write(dir.join(format!("{base}.svg")), svg_from_csv(exp, &csv)?)?;
        }
        out.push((base.to_string(), verdict));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_names_are_refused() {
        assert!(matches!(lookup("exp:nope"), Err(Error::UnknownExperiment(_))));
        assert_eq!(lookup("dl-vset").unwrap().name, "exp:dl-vset");
    }

    #[test]
    fn verdicts_combine() {
        use Verdict::*;
        assert_eq!(Verdict::combine([Pass, Pass]), Pass);
        assert_eq!(Verdict::combine([Pass, Inconclusive]), Inconclusive);
        assert_eq!(Verdict::combine([Inconclusive, Fail]), Fail);
        assert_eq!(Fail.exit_code(), 1);
        assert_eq!(Inconclusive.exit_code(), 2);
    }

    #[test]
    fn par_map_keeps_order() {
        assert_eq!(par_map(&[3, 1, 2], |x| x * 10), [30, 10, 20]);
    }
}

//! Exact maximum t-intersecting families of circles, as maximum cliques of
//! the agreement graph, and complete enumeration of maximum families.
//!
//! The clique solver is a bit-parallel branch and bound with greedy colouring
//! bounds. Vertices are renumbered by descending degree (ties by index) so
//! that colouring and branching follow that order.

use std::fmt;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{CircleGeometry, GeometryKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SearchBudget {
    pub node_limit: u64,
    pub time_limit: Duration,
    /// A size known to be attainable; the search only looks for larger cliques.
    pub lower_bound: Option<usize>,
}

impl Default for SearchBudget {
    fn default() -> Self {
        SearchBudget {
            node_limit: 100_000_000,
            time_limit: Duration::from_secs(15 * 60),
            lower_bound: None,
        }
    }
}

impl SearchBudget {
    pub fn nodes(node_limit: u64) -> SearchBudget {
        SearchBudget {
            node_limit,
            ..SearchBudget::default()
        }
    }
}

/// Undirected graph with packed adjacency rows.
#[derive(Clone, Debug)]
pub struct Graph {
    n: usize,
    words: usize,
    adj: Vec<u64>,
}

impl Graph {
    pub fn new(n: usize) -> Graph {
        let words = n.div_ceil(64).max(1);
        Graph {
            n,
            words,
            adj: vec![0; n * words],
        }
    }

    /// Graph on `0..n` with an edge wherever `edge(a, b)` holds, for `a < b`.
    pub fn from_fn<F: Fn(usize, usize) -> bool + Sync>(n: usize, edge: F) -> Graph {
        let words = n.div_ceil(64).max(1);
        let rows: Vec<Vec<u64>> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut row = vec![0u64; words];
                for b in 0..n {
                    if a != b && edge(a.min(b), a.max(b)) {
                        row[b / 64] |= 1 << (b % 64);
                    }
                }
                row
            })
            .collect();
        Graph {
            n,
            words,
            adj: rows.concat(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        self.adj[a * self.words + b / 64] |= 1 << (b % 64);
        self.adj[b * self.words + a / 64] |= 1 << (a % 64);
    }

    #[inline]
    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a * self.words + b / 64] >> (b % 64) & 1 == 1
    }

    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.adj[v * self.words..(v + 1) * self.words]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.has_edge(v, u)).collect()
    }

    pub fn complement(&self) -> Graph {
        Graph::from_fn(self.n, |a, b| !self.has_edge(a, b))
    }

    pub fn is_clique(&self, vs: &[usize]) -> bool {
        vs.iter()
            .enumerate()
            .all(|(i, &a)| vs[i + 1..].iter().all(|&b| a != b && self.has_edge(a, b)))
    }

    /// Induced subgraph on `verts`, local vertex `i` being `verts[i]`.
    fn induced(&self, verts: &[usize]) -> Graph {
        Graph::from_fn(verts.len(), |a, b| self.has_edge(verts[a], verts[b]))
    }

    /// `verts` sorted by descending degree within the induced subgraph, ties by index.
    fn degree_order(&self, verts: &[usize]) -> Vec<usize> {
        let sub = self.induced(verts);
        let mut local: Vec<usize> = (0..verts.len()).collect();
        local.sort_by_key(|&i| (std::cmp::Reverse(sub.degree(i)), verts[i]));
        local.iter().map(|&i| verts[i]).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CliqueResult {
    pub clique: Vec<usize>,
    pub optimal: bool,
    pub nodes: u64,
}

impl CliqueResult {
    pub fn size(&self) -> usize {
        self.clique.len()
    }
}

struct Limits {
    nodes: AtomicU64,
    node_limit: u64,
    deadline: Instant,
    abort: AtomicBool,
}

impl Limits {
    fn new(b: &SearchBudget) -> Limits {
        Limits {
            nodes: AtomicU64::new(0),
            node_limit: b.node_limit,
            deadline: Instant::now() + b.time_limit,
            abort: AtomicBool::new(false),
        }
    }

    #[inline]
    fn tick(&self) -> bool {
        if self.abort.load(Ordering::Relaxed) {
            return false;
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed);
        if n >= self.node_limit || (n.is_multiple_of(4096) && Instant::now() >= self.deadline) {
            self.abort.store(true, Ordering::Relaxed);
            return false;
        }
        true
    }

    fn aborted(&self) -> bool {
        self.abort.load(Ordering::Relaxed)
    }
}

enum Goal<'a> {
    /// Find a clique larger than the shared incumbent size.
    Max(&'a AtomicUsize, &'a Mutex<Vec<usize>>),
    /// Stop at the first clique of exactly this size.
    First(usize, &'a Mutex<Option<Vec<usize>>>),
    /// Collect every clique of exactly this size.
    All(usize, &'a Mutex<Vec<Vec<usize>>>, &'a AtomicBool),
}

/// Local search state over a renumbered graph.
struct Solver<'a> {
    g: &'a Graph,
    limits: &'a Limits,
    goal: Goal<'a>,
}

#[inline]
fn is_empty(p: &[u64]) -> bool {
    p.iter().all(|&w| w == 0)
}

#[inline]
fn first_bit(p: &[u64]) -> Option<usize> {
    p.iter()
        .enumerate()
        .find(|(_, &w)| w != 0)
        .map(|(i, w)| i * 64 + w.trailing_zeros() as usize)
}

impl Solver<'_> {
    /// Minimum colour worth branching on given the current clique size.
    fn kmin(&self, depth: usize) -> usize {
        let need = match &self.goal {
            Goal::Max(best, _) => best.load(Ordering::Relaxed) + 1,
            Goal::First(k, _) | Goal::All(k, _, _) => *k,
        };
        need.saturating_sub(depth).max(1)
    }

    fn done(&self) -> bool {
        match &self.goal {
            Goal::First(_, found) => found.lock().unwrap().is_some(),
            _ => false,
        }
    }

    /// Greedy sequential colouring; returns branch vertices with colour ≥ kmin, in colour order.
    fn color(&self, p: &[u64], kmin: usize) -> (Vec<usize>, Vec<usize>) {
        let mut u = p.to_vec();
        let mut order = Vec::new();
        let mut colors = Vec::new();
        let mut k = 0;
        let mut q = vec![0u64; p.len()];
        while !is_empty(&u) {
            k += 1;
            q.copy_from_slice(&u);
            while let Some(v) = first_bit(&q) {
                u[v / 64] &= !(1 << (v % 64));
                q[v / 64] &= !(1 << (v % 64));
                for (w, a) in q.iter_mut().zip(self.g.row(v)) {
                    *w &= !a;
                }
                if k >= kmin {
                    order.push(v);
                    colors.push(k);
                }
            }
        }
        (order, colors)
    }

    fn reached(&self, c: &[usize], p: &[u64]) {
        match &self.goal {
            Goal::Max(best, clique) => {
                if c.len() > best.load(Ordering::Relaxed) {
                    let mut w = clique.lock().unwrap();
                    if c.len() > w.len() {
                        *w = c.to_vec();
                        best.store(c.len(), Ordering::Relaxed);
                    }
                }
            }
            Goal::First(k, found) => {
                if c.len() == *k {
                    let mut f = found.lock().unwrap();
                    if f.is_none() {
                        *f = Some(c.to_vec());
                    }
                }
            }
            Goal::All(k, all, larger) => {
                if c.len() == *k {
                    if !is_empty(p) {
                        larger.store(true, Ordering::Relaxed);
                    }
                    all.lock().unwrap().push(c.to_vec());
                }
            }
        }
    }

    fn expand(&self, c: &mut Vec<usize>, mut p: Vec<u64>) {
        if !self.limits.tick() || self.done() {
            return;
        }
        if let Goal::First(k, _) | Goal::All(k, _, _) = self.goal {
            if c.len() == k {
                self.reached(c, &p);
                return;
            }
        }
        let (order, colors) = self.color(&p, self.kmin(c.len()));
        for i in (0..order.len()).rev() {
            if colors[i] < self.kmin(c.len()) || self.limits.aborted() || self.done() {
                return;
            }
            let v = order[i];
            let np: Vec<u64> = p.iter().zip(self.g.row(v)).map(|(a, b)| a & b).collect();
            c.push(v);
            if is_empty(&np) {
                self.reached(c, &np);
            } else {
                self.expand(c, np);
            }
            c.pop();
            p[v / 64] &= !(1 << (v % 64));
        }
    }

    /// Top level, branches run in parallel; `c` is the fixed prefix.
    fn run(&self, c: Vec<usize>, p: Vec<u64>) {
        if let Goal::First(k, _) | Goal::All(k, _, _) = self.goal {
            if c.len() == k {
                self.reached(&c, &p);
                return;
            }
        }
        if is_empty(&p) {
            self.reached(&c, &p);
            return;
        }
        let (order, colors) = self.color(&p, self.kmin(c.len()));
        let branches: Vec<(usize, Vec<u64>)> = (0..order.len())
            .map(|i| {
                let mut pi = p.clone();
                for &later in &order[i + 1..] {
                    pi[later / 64] &= !(1 << (later % 64));
                }
                let v = order[i];
                let np = pi.iter().zip(self.g.row(v)).map(|(a, b)| a & b).collect();
                (i, np)
            })
            .collect();
        let body = |(i, np): &(usize, Vec<u64>)| {
            if colors[*i] < self.kmin(c.len()) || self.limits.aborted() || self.done() {
                return;
            }
            let mut cc = c.clone();
            cc.push(order[*i]);
            if is_empty(np) {
                self.reached(&cc, np);
            } else {
                self.expand(&mut cc, np.clone());
            }
        };
        match self.goal {
            // sequential so that the first clique found is the same on every run
            Goal::First(..) => branches.iter().rev().for_each(body),
            _ => branches.par_iter().rev().for_each(body),
        }
    }
}

/// Renumbered problem over a vertex subset, with an optional fixed vertex.
struct Prepared {
    local: Graph,
    verts: Vec<usize>,
}

impl Prepared {
    fn new(g: &Graph, verts: &[usize]) -> Prepared {
        let verts = g.degree_order(verts);
        Prepared {
            local: g.induced(&verts),
            verts,
        }
    }

    fn full_set(&self) -> Vec<u64> {
        let mut p = vec![0u64; self.local.words];
        for v in 0..self.local.n {
            p[v / 64] |= 1 << (v % 64);
        }
        p
    }

    fn lift(&self, c: &[usize]) -> Vec<usize> {
        let mut out: Vec<usize> = c.iter().map(|&v| self.verts[v]).collect();
        out.sort_unstable();
        out
    }
}

/// Maximum clique. With `root`, only cliques containing that vertex are
/// searched (valid for vertex-transitive graphs). `seed` is an optional known
/// clique used as the initial incumbent.
pub fn max_clique(g: &Graph, root: Option<usize>, seed: Option<&[usize]>, budget: &SearchBudget) -> CliqueResult {
    let mut incumbent: Vec<usize> = seed.map(<[usize]>::to_vec).unwrap_or_default();
    incumbent.sort_unstable();
    debug_assert!(g.is_clique(&incumbent));
    let floor = budget.lower_bound.unwrap_or(0).max(incumbent.len());
    let (prefix, verts) = match root {
        Some(r) => (vec![r], g.neighbors(r)),
        None => (vec![], (0..g.n).collect()),
    };
    let prep = Prepared::new(g, &verts);
    let limits = Limits::new(budget);
    let best = AtomicUsize::new(floor.saturating_sub(prefix.len()));
    let found = Mutex::new(Vec::new());
    let solver = Solver {
        g: &prep.local,
        limits: &limits,
        goal: Goal::Max(&best, &found),
    };
    solver.run(vec![], prep.full_set());
    let aborted = limits.aborted();
    let improved = found.into_inner().unwrap();
    let mut nodes = limits.nodes.load(Ordering::Relaxed);
    let clique = if improved.len() + prefix.len() > incumbent.len() {
        let k = improved.len();
        // the parallel search may find any clique of the best size; pick the
        // first one in branching order so the witness is reproducible
        let witness = if aborted {
            improved
        } else {
            let limits = Limits::new(&SearchBudget::default());
            let first = Mutex::new(None);
            Solver {
                g: &prep.local,
                limits: &limits,
                goal: Goal::First(k, &first),
            }
            .run(vec![], prep.full_set());
            nodes += limits.nodes.load(Ordering::Relaxed);
            first.into_inner().unwrap().unwrap_or(improved)
        };
        let mut c = prep.lift(&witness);
        c.extend(&prefix);
        c.sort_unstable();
        c
    } else {
        incumbent
    };
    CliqueResult {
        clique,
        optimal: !aborted,
        nodes,
    }
}

/// Every clique of exactly `size` vertices, sorted. Fails with
/// `BudgetExceeded` on budget exhaustion and `BadArguments` if some clique of
/// that size extends to a larger one.
pub fn enumerate_cliques(g: &Graph, size: usize, budget: &SearchBudget) -> Result<Vec<Vec<usize>>> {
    let verts: Vec<usize> = (0..g.n).collect();
    let prep = Prepared::new(g, &verts);
    let limits = Limits::new(budget);
    let all = Mutex::new(Vec::new());
    let larger = AtomicBool::new(false);
    Solver {
        g: &prep.local,
        limits: &limits,
        goal: Goal::All(size, &all, &larger),
    }
    .run(vec![], prep.full_set());
    if limits.aborted() {
        return Err(Error::BudgetExceeded);
    }
    if larger.load(Ordering::Relaxed) {
        return Err(Error::BadArguments(format!("cliques larger than {size} exist")));
    }
    let mut out: Vec<Vec<usize>> = all.into_inner().unwrap().iter().map(|c| prep.lift(c)).collect();
    out.sort();
    Ok(out)
}

/// Graph on circles with an edge when two circles share at least `t` points.
pub fn agreement_graph(g: &CircleGeometry, t: usize) -> Graph {
    Graph::from_fn(g.num_circles(), |a, b| g.meet(a, b) >= t)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FamilyLabel {
    Pencil(usize),
    Nucleus(usize),
    Other,
}

impl fmt::Display for FamilyLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyLabel::Pencil(p) => write!(f, "pencil({p})"),
            FamilyLabel::Nucleus(n) => write!(f, "nucleus({n})"),
            FamilyLabel::Other => write!(f, "other"),
        }
    }
}

impl Serialize for FamilyLabel {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyWitness {
    pub circles: Vec<usize>,
    pub size: usize,
    pub optimal: bool,
    pub label: FamilyLabel,
}

/// Circles through every point of `pts`.
pub fn pencil(g: &CircleGeometry, pts: &[usize]) -> Vec<usize> {
    (0..g.num_circles())
        .filter(|&c| pts.iter().all(|&p| g.circle_bits()[c].contains(p)))
        .collect()
}

/// Circles through a point, one number for every point of these geometries.
pub fn circles_per_point(g: &CircleGeometry) -> usize {
    g.num_circles() * g.circle(0).len() / g.num_points()
}

/// Initial incumbent: a pencil for t = 1, the circles through two
/// non-parallel points for t = 2.
fn seed(g: &CircleGeometry, t: usize, root: Option<usize>) -> Vec<usize> {
    let c0 = root.map(|r| g.circle(r).to_vec()).unwrap_or_default();
    let p = c0.first().copied().unwrap_or(0);
    match t {
        1 => pencil(g, &[p]),
        2 => {
            let q = c0
                .get(1)
                .copied()
                .or_else(|| (0..g.num_points()).find(|&x| x != p && !g.are_parallel(p, x)));
            match q {
                Some(q) => pencil(g, &[p, q]),
                None => vec![],
            }
        }
        _ => vec![],
    }
}

/// Largest family of circles pairwise sharing at least `t` points.
pub fn max_t_intersecting(g: &CircleGeometry, t: usize, budget: &SearchBudget) -> Result<FamilyWitness> {
    if t == 0 {
        return Err(Error::BadArguments("t must be positive".to_string()));
    }
    let graph = agreement_graph(g, t);
    let root = (g.is_circle_transitive() && g.num_circles() > 0).then_some(0);
    let seed = seed(g, t, root);
    let seed = graph.is_clique(&seed).then_some(seed);
    let r = max_clique(&graph, root, seed.as_deref(), budget);
    Ok(FamilyWitness {
        label: classify_family(g, &r.clique),
        size: r.clique.len(),
        optimal: r.optimal,
        circles: r.clique,
    })
}

/// All intersecting families of `known_size` circles (cliques of the
/// intersection graph, i.e. cocliques of the disjointness graph), labelled.
pub fn enumerate_maximum_intersecting(
    g: &CircleGeometry,
    known_size: usize,
    budget: &SearchBudget,
) -> Result<Vec<FamilyWitness>> {
    let graph = agreement_graph(g, 1);
    let families = enumerate_cliques(&graph, known_size, budget)?;
    Ok(families
        .into_iter()
        .map(|circles| FamilyWitness {
            label: classify_family(g, &circles),
            size: circles.len(),
            optimal: true,
            circles,
        })
        .collect())
}

/// Pencil if every circle passes through a common point and the family has
/// pencil size; nucleus family for even-order Laguerre planes when all
/// circles share a nucleus and there are q² of them.
pub fn classify_family(g: &CircleGeometry, f: &[usize]) -> FamilyLabel {
    if f.is_empty() {
        return FamilyLabel::Other;
    }
    if f.len() == circles_per_point(g) {
        let mut common = g.circle_bits()[f[0]].clone();
        for &c in &f[1..] {
            common.intersect_with(&g.circle_bits()[c]);
        }
        if let Some(p) = common.first() {
            return FamilyLabel::Pencil(p);
        }
    }
    let q = g.order();
    if g.kind() == GeometryKind::Laguerre && q.is_multiple_of(2) && f.len() == q * q {
        if let Some(nuc) = g.nucleus_map() {
            let n = nuc[f[0]];
            if f.iter().all(|&c| nuc[c] == n) {
                return FamilyLabel::Nucleus(n);
            }
        }
    }
    FamilyLabel::Other
}

/// Recheck against raw circle sets: every two members share at least `t` points.
pub fn is_t_intersecting(g: &CircleGeometry, f: &[usize], t: usize) -> bool {
    f.iter().enumerate().all(|(i, &a)| {
        f[i + 1..].iter().all(|&b| {
            let (x, y) = (g.circle(a), g.circle(b));
            x.iter().filter(|p| y.binary_search(p).is_ok()).count() >= t
        })
    })
}

/// Serialized search result.
#[derive(Clone, Debug, Serialize)]
pub struct SearchDoc {
    pub geometry: String,
    pub t: usize,
    pub size: usize,
    pub optimal: bool,
    pub witnesses: Vec<WitnessDoc>,
}

#[derive(Clone, Debug, Serialize)]
pub struct WitnessDoc {
    pub circles: Vec<usize>,
    pub label: FamilyLabel,
}

impl SearchDoc {
    pub fn new(geometry: String, t: usize, witnesses: &[FamilyWitness]) -> SearchDoc {
        SearchDoc {
            geometry,
            t,
            size: witnesses.first().map_or(0, |w| w.size),
            optimal: witnesses.iter().all(|w| w.optimal),
            witnesses: witnesses
                .iter()
                .map(|w| WitnessDoc {
                    circles: w.circles.clone(),
                    label: w.label,
                })
                .collect(),
        }
    }
}

/// One row of a reproduced size table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TableRow {
    pub q: usize,
    pub size: usize,
    pub bound: String,
    pub runtime_ms: Option<u128>,
}

/// CSV with columns `q,size,bound,runtime_ms`; runtime left empty when absent.
pub fn table_csv(rows: &[TableRow]) -> String {
    let mut s = String::from("q,size,bound,runtime_ms\n");
    for r in rows {
        let rt = r.runtime_ms.map(|x| x.to_string()).unwrap_or_default();
        s.push_str(&format!("{},{},{},{}\n", r.q, r.size, r.bound, rt));
    }
    s
}

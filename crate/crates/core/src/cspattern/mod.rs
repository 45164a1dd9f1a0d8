//! Correlative sparsity: csp graph, chordal extension by minimum-degree
//! elimination, maximal cliques and the assignment of constraints to
//! cliques.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::popmodel::PopInstance;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SparsityError {
    #[error("{which} uses variables {vars:?} that lie in no single clique")]
    Unassignable { which: String, vars: Vec<usize> },
    #[error("clique structure is inconsistent: {0}")]
    Inconsistent(String),
}

/// Cliques I_j with the inequality (J_j) and equality (W_j) constraints
/// assigned to them. All indices are 0-based.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CliqueStructure {
    pub cliques: Vec<Vec<usize>>,
    pub ineq: Vec<Vec<usize>>,
    pub eq: Vec<Vec<usize>>,
}

impl CliqueStructure {
    /// One clique holding everything.
    pub fn single(pop: &PopInstance) -> Self {
        CliqueStructure {
            cliques: vec![(0..pop.n).collect()],
            ineq: vec![(0..pop.m()).collect()],
            eq: vec![(0..pop.l()).collect()],
        }
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    /// Largest clique size (u^max in the benchmark tables).
    pub fn max_clique(&self) -> usize {
        self.cliques.iter().map(|c| c.len()).max().unwrap_or(0)
    }

    /// Checks coverage, containment and the partition properties.
    pub fn validate(&self, pop: &PopInstance) -> Result<(), SparsityError> {
        let bad = |s: String| Err(SparsityError::Inconsistent(s));
        if self.ineq.len() != self.cliques.len() || self.eq.len() != self.cliques.len() {
            return bad("assignment lists differ in length from the clique list".into());
        }
        let mut covered = vec![false; pop.n];
        for c in &self.cliques {
            for w in c.windows(2) {
                if w[0] >= w[1] {
                    return bad(format!("clique {:?} is not strictly increasing", c));
                }
            }
            for &v in c {
                if v >= pop.n {
                    return bad(format!("variable index {} out of range", v + 1));
                }
                covered[v] = true;
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return bad(format!("variable x{} is in no clique", v + 1));
        }
        for (kind, lists, polys) in [("g", &self.ineq, &pop.g), ("h", &self.eq, &pop.h)] {
            let mut seen = vec![0usize; polys.len()];
            for (j, list) in lists.iter().enumerate() {
                for &i in list {
                    if i >= polys.len() {
                        return bad(format!("{}{} does not exist", kind, i + 1));
                    }
                    seen[i] += 1;
                    let vars = polys[i].variables();
                    if !vars.iter().all(|v| self.cliques[j].binary_search(v).is_ok()) {
                        return bad(format!("{}{} is not supported on clique {}", kind, i + 1, j + 1));
                    }
                }
            }
            if let Some(i) = seen.iter().position(|&c| c != 1) {
                return bad(format!("{}{} is assigned {} times", kind, i + 1, seen[i]));
            }
        }
        Ok(())
    }

    /// Cliques whose constraints do not bound every clique variable through
    /// terms c − Σ_{j∈S} w_j x_j² (one ball row, or per-variable bounds
    /// whose sum is a ball); such cliques lack the ball assumption.
    pub fn cliques_without_ball(&self, pop: &PopInstance) -> Vec<usize> {
        (0..self.cliques.len())
            .filter(|&j| {
                let mut covered: Vec<usize> = self.ineq[j]
                    .iter()
                    .map(|&i| &pop.g[i])
                    .filter(|g| {
                        g.constant_term() > 0.0
                            && g.degree() == 2
                            && g.terms().all(|(m, c)| {
                                m.is_constant() || (m.support().len() == 1 && m.degree() == 2 && c < 0.0)
                            })
                    })
                    .flat_map(|g| g.variables())
                    .collect();
                covered.sort_unstable();
                covered.dedup();
                covered != self.cliques[j]
            })
            .collect()
    }

    /// Text listing of clique sizes and assignment counts.
    pub fn report(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "cliques p={} u_max={}", self.len(), self.max_clique());
        for j in 0..self.len() {
            let _ = writeln!(
                s,
                "I{} size={} J={} W={}",
                j + 1,
                self.cliques[j].len(),
                self.ineq[j].len(),
                self.eq[j].len()
            );
        }
        s
    }
}

/// Undirected graph on 0..n as sorted adjacency sets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CspGraph {
    pub adj: Vec<BTreeSet<usize>>,
}

impl CspGraph {
    pub fn new(n: usize) -> Self {
        CspGraph { adj: vec![BTreeSet::new(); n] }
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn add_edge(&mut self, a: usize, b: usize) {
        if a != b {
            self.adj[a].insert(b);
            self.adj[b].insert(a);
        }
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    fn add_clique(&mut self, vars: &[usize]) {
        for (i, &a) in vars.iter().enumerate() {
            for &b in &vars[i + 1..] {
                self.add_edge(a, b);
            }
        }
    }

    /// Checks that `order` is a perfect elimination ordering.
    pub fn is_perfect_elimination(&self, order: &[usize]) -> bool {
        let mut pos = vec![0; self.n()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        for &v in order {
            let later: Vec<usize> = self.adj[v].iter().copied().filter(|&w| pos[w] > pos[v]).collect();
            for (i, &a) in later.iter().enumerate() {
                for &b in &later[i + 1..] {
                    if !self.has_edge(a, b) {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Edge {i, j} when x_i x_j share a monomial of f or a single constraint.
pub fn csp_graph(pop: &PopInstance) -> CspGraph {
    let mut g = CspGraph::new(pop.n);
    for (m, _) in pop.f.terms() {
        let vars: Vec<usize> = m.support().iter().map(|&(j, _)| j).collect();
        g.add_clique(&vars);
    }
    for p in pop.g.iter().chain(&pop.h) {
        g.add_clique(&p.variables());
    }
    g
}

/// Result of [`chordal_cliques`].
#[derive(Clone, Debug)]
pub struct ChordalExtension {
    /// Maximal cliques, each sorted, in a running-intersection order.
    pub cliques: Vec<Vec<usize>>,
    /// Elimination order used (a perfect elimination ordering of `filled`).
    pub order: Vec<usize>,
    pub filled: CspGraph,
}

/// Greedy minimum-degree elimination (ties to the smallest vertex), maximal
/// cliques of the resulting chordal graph, ordered so that every clique
/// meets the union of its predecessors inside a single earlier clique.
pub fn chordal_cliques(graph: &CspGraph) -> ChordalExtension {
    let n = graph.n();
    let mut work = graph.clone();
    let mut filled = graph.clone();
    let mut alive = vec![true; n];
    let mut order = Vec::with_capacity(n);
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&v| alive[v])
            .min_by_key(|&v| (work.adj[v].len(), v))
            .expect("vertex left");
        let nbrs: Vec<usize> = work.adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                work.add_edge(a, b);
                filled.add_edge(a, b);
            }
        }
        for &a in &nbrs {
            work.adj[a].remove(&v);
        }
        work.adj[v].clear();
        alive[v] = false;
        order.push(v);
        let mut c = nbrs;
        c.push(v);
        c.sort_unstable();
        candidates.push(c);
    }
    // keep maximal candidates; later candidates can only be subsets of earlier ones
    let mut maximal: Vec<Vec<usize>> = Vec::new();
    for c in candidates {
        if !maximal.iter().any(|m| is_subset(&c, m)) {
            maximal.push(c);
        }
    }
    let cliques = rip_order(maximal);
    ChordalExtension { cliques, order, filled }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

fn intersect(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

/// Builds a clique tree (reverse elimination order is running-intersection)
/// and re-emits it as a traversal rooted at the clique holding the smallest
/// vertex, visiting the frontier clique with the smallest minimum vertex
/// first. Any parent-before-child order of a clique tree keeps the
/// running-intersection property.
fn rip_order(elim: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let p = elim.len();
    if p <= 1 {
        return elim;
    }
    let rev: Vec<Vec<usize>> = elim.into_iter().rev().collect();
    let mut edges = vec![Vec::new(); p];
    let mut union: Vec<usize> = rev[0].clone();
    for j in 1..p {
        let sep = intersect(&rev[j], &{
            let mut u = union.clone();
            u.sort_unstable();
            u
        });
        let parent = (0..j).find(|&i| is_subset(&sep, &rev[i])).unwrap_or(0);
        edges[j].push(parent);
        edges[parent].push(j);
        union.extend_from_slice(&rev[j]);
        union.sort_unstable();
        union.dedup();
    }
    let root = (0..p).min_by_key(|&j| (rev[j][0], j)).unwrap();
    let mut visited = vec![false; p];
    let mut out = Vec::with_capacity(p);
    let mut frontier = vec![root];
    visited[root] = true;
    while !frontier.is_empty() {
        let (fi, &next) = frontier.iter().enumerate().min_by_key(|(_, &j)| (rev[j][0], j)).unwrap();
        frontier.swap_remove(fi);
        out.push(rev[next].clone());
        for &nb in &edges[next] {
            if !visited[nb] {
                visited[nb] = true;
                frontier.push(nb);
            }
        }
    }
    out
}

/// Checks the running-intersection property of a clique sequence.
pub fn has_running_intersection(cliques: &[Vec<usize>]) -> bool {
    let mut union: Vec<usize> = Vec::new();
    for (j, c) in cliques.iter().enumerate() {
        if j > 0 {
            let sep = intersect(c, &union);
            if !cliques[..j].iter().any(|prev| is_subset(&sep, prev)) {
                return false;
            }
        }
        union.extend_from_slice(c);
        union.sort_unstable();
        union.dedup();
    }
    true
}

/// Sends each constraint to the first clique containing its variables.
pub fn assign_constraints(pop: &PopInstance, cliques: &[Vec<usize>]) -> Result<CliqueStructure, SparsityError> {
    let p = cliques.len();
    let mut ineq = vec![Vec::new(); p];
    let mut eq = vec![Vec::new(); p];
    for (kind, polys, out) in [("g", &pop.g, &mut ineq), ("h", &pop.h, &mut eq)] {
        for (i, q) in polys.iter().enumerate() {
            let vars = q.variables();
            let j = cliques
                .iter()
                .position(|c| is_subset(&vars, c))
                .ok_or_else(|| SparsityError::Unassignable { which: format!("{}{}", kind, i + 1), vars: vars.clone() })?;
            out[j].push(i);
        }
    }
    Ok(CliqueStructure { cliques: cliques.to_vec(), ineq, eq })
}

/// Full pipeline: graph, chordal extension, assignment. Returns the
/// structure already attached to the POP when present.
pub fn clique_structure(pop: &PopInstance) -> Result<CliqueStructure, SparsityError> {
    if let Some(cs) = &pop.cliques {
        cs.validate(pop)?;
        return Ok(cs.clone());
    }
    let ext = chordal_cliques(&csp_graph(pop));
    assign_constraints(pop, &ext.cliques)
}

//! Causal diagrams over categorical variables.
//!
//! A [`CausalDiagram`] is an immutable DAG whose nodes carry a state count.
//! Graphical queries (d-separation, the back-door and front-door criteria)
//! run on node indices internally and accept node names at the public surface.

use std::collections::{HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub name: String,
    pub states: usize,
}

/// Wire form of a diagram: `{"nodes":[{"name":"Z","states":4}],"edges":[["Z","X"]]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DiagramSpec {
    nodes: Vec<Node>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "DiagramSpec", into = "DiagramSpec")]
pub struct CausalDiagram {
    nodes: Vec<Node>,
    index: HashMap<String, usize>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl TryFrom<DiagramSpec> for CausalDiagram {
    type Error = Error;

    fn try_from(spec: DiagramSpec) -> Result<Self> {
        let nodes: Vec<(&str, usize)> = spec.nodes.iter().map(|n| (n.name.as_str(), n.states)).collect();
        let edges: Vec<(&str, &str)> = spec.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        CausalDiagram::new(&nodes, &edges)
    }
}

impl From<CausalDiagram> for DiagramSpec {
    fn from(g: CausalDiagram) -> Self {
        let edges = g.edges().map(|(p, c)| (g.nodes[p].name.clone(), g.nodes[c].name.clone())).collect();
        DiagramSpec { nodes: g.nodes, edges }
    }
}

impl CausalDiagram {
    /// Builds and validates a diagram. Parent lists keep the order in which edges are given.
    pub fn new(nodes: &[(&str, usize)], edges: &[(&str, &str)]) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        let mut list = Vec::with_capacity(nodes.len());
        for (i, &(name, states)) in nodes.iter().enumerate() {
            if states == 0 {
                return Err(Error::ZeroStates(name.to_string()));
            }
            if index.insert(name.to_string(), i).is_some() {
                return Err(Error::DuplicateNode(name.to_string()));
            }
            list.push(Node { name: name.to_string(), states });
        }
        let n = list.len();
        let mut parents = vec![Vec::new(); n];
        let mut children = vec![Vec::new(); n];
        for &(p, c) in edges {
            let pi = *index.get(p).ok_or_else(|| Error::UnknownNode(p.to_string()))?;
            let ci = *index.get(c).ok_or_else(|| Error::UnknownNode(c.to_string()))?;
            if pi == ci {
                return Err(Error::Cycle(p.to_string()));
            }
            if !parents[ci].contains(&pi) {
                parents[ci].push(pi);
                children[pi].push(ci);
            }
        }

        // Kahn's algorithm; ties broken by declaration order.
        let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
        let mut ready: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(v) = ready.pop_front() {
            topo.push(v);
            let mut next: Vec<usize> = Vec::new();
            for &c in &children[v] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    next.push(c);
                }
            }
            next.sort_unstable();
            ready.extend(next);
        }
        if topo.len() != n {
            let stuck = (0..n).find(|&v| indeg[v] > 0).expect("cycle leaves a node with indegree");
            return Err(Error::Cycle(list[stuck].name.clone()));
        }

        Ok(Self { nodes: list, index, parents, children, topo })
    }

    pub fn from_json(s: &str) -> std::result::Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diagram serializes")
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn name(&self, i: usize) -> &str {
        &self.nodes[i].name
    }

    pub fn states(&self, i: usize) -> usize {
        self.nodes[i].states
    }

    pub fn index_of(&self, name: &str) -> Result<usize> {
        self.index.get(name).copied().ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, names: &[S]) -> Result<Vec<usize>> {
        names.iter().map(|n| self.index_of(n.as_ref())).collect()
    }

    pub fn states_of(&self, name: &str) -> Result<usize> {
        Ok(self.nodes[self.index_of(name)?].states)
    }

    pub fn parents(&self, i: usize) -> &[usize] {
        &self.parents[i]
    }

    pub fn children(&self, i: usize) -> &[usize] {
        &self.children[i]
    }

    pub fn parent_names(&self, name: &str) -> Result<Vec<&str>> {
        let i = self.index_of(name)?;
        Ok(self.parents[i].iter().map(|&p| self.name(p)).collect())
    }

    /// Cached topological order (parents always precede children).
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.parents.iter().enumerate().flat_map(|(c, ps)| ps.iter().map(move |&p| (p, c)))
    }

    pub fn has_edge(&self, parent: usize, child: usize) -> bool {
        self.parents[child].contains(&parent)
    }

    /// Descendants of `v`, including `v` itself.
    pub fn descendants(&self, v: usize) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend(self.children[u].iter().copied());
            }
        }
        seen
    }

    /// Ancestors of every node in `set`, including the set itself.
    pub fn ancestors(&self, set: &[usize]) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = set.to_vec();
        while let Some(u) = stack.pop() {
            if !seen[u] {
                seen[u] = true;
                stack.extend(self.parents[u].iter().copied());
            }
        }
        seen
    }

    /// True iff every path between `a` and `b` is blocked by `c`.
    pub fn d_separated<S: AsRef<str>>(&self, a: &[S], b: &[S], c: &[S]) -> Result<bool> {
        let (a, b, c) = (self.indices_of(a)?, self.indices_of(b)?, self.indices_of(c)?);
        self.check_disjoint(&[&a, &b, &c])?;
        Ok(self.d_separated_idx(&a, &b, &c))
    }

    pub fn d_separated_idx(&self, a: &[usize], b: &[usize], c: &[usize]) -> bool {
        let reach = self.reachable(a, c, false);
        !b.iter().any(|&v| reach[v])
    }

    /// Z satisfies the back-door criterion relative to (x, y).
    pub fn satisfies_backdoor<S: AsRef<str>>(&self, z: &[S], x: &str, y: &str) -> Result<bool> {
        let (z, x, y) = (self.indices_of(z)?, self.index_of(x)?, self.index_of(y)?);
        self.check_disjoint(&[&z, &[x], &[y]])?;
        Ok(self.satisfies_backdoor_idx(&z, x, y))
    }

    pub fn satisfies_backdoor_idx(&self, z: &[usize], x: usize, y: usize) -> bool {
        let desc = self.descendants(x);
        if z.iter().any(|&v| desc[v]) {
            return false;
        }
        !self.backdoor_reachable(&[x], z)[y]
    }

    /// Z satisfies the front-door criterion relative to (x, y).
    pub fn satisfies_frontdoor<S: AsRef<str>>(&self, z: &[S], x: &str, y: &str) -> Result<bool> {
        let (z, x, y) = (self.indices_of(z)?, self.index_of(x)?, self.index_of(y)?);
        self.check_disjoint(&[&z, &[x], &[y]])?;
        Ok(self.satisfies_frontdoor_idx(&z, x, y))
    }

    pub fn satisfies_frontdoor_idx(&self, z: &[usize], x: usize, y: usize) -> bool {
        // Directed paths x -> y must all pass through z.
        let mut blocked = vec![false; self.len()];
        for &v in z {
            blocked[v] = true;
        }
        let mut seen = vec![false; self.len()];
        let mut stack = vec![x];
        while let Some(u) = stack.pop() {
            if seen[u] || blocked[u] {
                continue;
            }
            seen[u] = true;
            if u == y {
                return false;
            }
            stack.extend(self.children[u].iter().copied());
        }
        // No open back-door path from x into z.
        let from_x = self.backdoor_reachable(&[x], &[]);
        if z.iter().any(|&v| from_x[v]) {
            return false;
        }
        // Back-door paths from the set z to y are blocked by x. A path that
        // re-enters z is covered by its tail from the last z node, so only
        // paths touching z at their start count.
        !self.backdoor_reachable(z, &[x])[y]
    }

    /// Nodes reachable from `starts` along an active path that begins with an
    /// arrow into one of them and never passes through any of them again, given `cond`.
    fn backdoor_reachable(&self, starts: &[usize], cond: &[usize]) -> Vec<bool> {
        self.reachable(starts, cond, true)
    }

    /// Bayes-ball reachability. `Up` means the ball arrived from a child,
    /// `Down` from a parent. With `backdoor` set the ball leaves the sources
    /// only through their parents and may not pass through a source again.
    fn reachable(&self, sources: &[usize], cond: &[usize], backdoor: bool) -> Vec<bool> {
        const UP: usize = 0;
        const DOWN: usize = 1;
        let n = self.len();
        let mut in_cond = vec![false; n];
        for &v in cond {
            in_cond[v] = true;
        }
        let anc = self.ancestors(cond);
        let mut visited = vec![[false; 2]; n];
        let mut reach = vec![false; n];
        let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
        let mut is_source = vec![false; n];
        for &s in sources {
            is_source[s] = backdoor;
            if backdoor {
                reach[s] = true;
                queue.extend(self.parents[s].iter().map(|&p| (p, UP)));
            } else {
                queue.push_back((s, UP));
            }
        }
        while let Some((v, dir)) = queue.pop_front() {
            if is_source[v] || visited[v][dir] {
                continue;
            }
            visited[v][dir] = true;
            if !in_cond[v] {
                reach[v] = true;
            }
            if dir == UP && !in_cond[v] {
                queue.extend(self.parents[v].iter().map(|&p| (p, UP)));
                queue.extend(self.children[v].iter().map(|&c| (c, DOWN)));
            } else if dir == DOWN {
                if !in_cond[v] {
                    queue.extend(self.children[v].iter().map(|&c| (c, DOWN)));
                }
                if anc[v] {
                    queue.extend(self.parents[v].iter().map(|&p| (p, UP)));
                }
            }
        }
        reach
    }

    fn check_disjoint(&self, sets: &[&[usize]]) -> Result<()> {
        let mut owner = vec![usize::MAX; self.len()];
        for (k, set) in sets.iter().enumerate() {
            for &v in set.iter() {
                if owner[v] != usize::MAX && owner[v] != k {
                    return Err(Error::Overlap(self.name(v).to_string()));
                }
                owner[v] = k;
            }
        }
        Ok(())
    }

    /// Mixed-radix size of the joint state space of `nodes`.
    pub fn cardinality(&self, nodes: &[usize]) -> usize {
        nodes.iter().map(|&v| self.states(v)).product()
    }
}

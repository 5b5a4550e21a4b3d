//! Boruvka-style hierarchical affinity clustering and the tokenizations built
//! on its dendrogram.
//!
//! Every round, each cluster that still has an outgoing edge picks its
//! cheapest one (ties broken by edge index) and all chains of picked edges
//! collapse into a single parent cluster. Leaves sit at level 0 and a parent
//! created in round `r` sits at level `r`. A cluster that does not merge in a
//! round keeps its tree node, so [`HacTree::level_partition`] carries it down
//! unchanged.

mod pe;

pub use pe::{hierarchical_pe, hierarchical_pe_table};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, UnionFind};
use crate::tokenize::{Token, Tokenization};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HacNode {
    pub level: usize,
    pub members: Vec<usize>,
    pub children: Vec<usize>,
}

/// Dendrogram of a HAC run. Tree nodes `0..n` are the leaves, tree node `v`
/// holding graph node `v`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HacTree {
    pub depth: usize,
    pub nodes: Vec<HacNode>,
    pub root: usize,
    pub leaf_order: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Euclidean,
    NegCosine,
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Metric> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "neg_cosine" | "neg-cosine" => Ok(Metric::NegCosine),
            other => Err(Error::InvalidParameter(format!("unknown metric {other:?}"))),
        }
    }
}

/// Per-edge cost from endpoint features: Euclidean distance or one minus
/// cosine similarity. A zero vector has cosine similarity 0 with anything.
pub fn edge_costs_from_features(g: &Graph, metric: Metric) -> Result<Vec<f64>> {
    let f = g.features().ok_or(Error::MissingFeatures)?;
    Ok(g.edges()
        .iter()
        .map(|&(u, v)| {
            let (a, b) = (&f[u], &f[v]);
            match metric {
                Metric::Euclidean => a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt(),
                Metric::NegCosine => {
                    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
                    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
                    if na == 0.0 || nb == 0.0 {
                        1.0
                    } else {
                        1.0 - dot / (na * nb)
                    }
                }
            }
        })
        .collect())
}

fn check_costs(g: &Graph, cost: &[f64]) -> Result<()> {
    if cost.len() != g.edge_count() {
        return Err(Error::DimensionMismatch {
            expected: g.edge_count(),
            got: cost.len(),
        });
    }
    if cost.iter().any(|c| !c.is_finite()) {
        return Err(Error::InvalidParameter("edge costs must be finite".into()));
    }
    Ok(())
}

fn merged_node(nodes: &[HacNode], level: usize, mut children: Vec<usize>) -> HacNode {
    children.sort_by_key(|&c| nodes[c].members[0]);
    let mut members: Vec<usize> = children.iter().flat_map(|&c| nodes[c].members.iter().copied()).collect();
    members.sort_unstable();
    HacNode {
        level,
        members,
        children,
    }
}

/// Runs Boruvka rounds until every connected component is a single cluster.
/// Components of a disconnected graph are joined under a synthetic root one
/// level above the last round.
pub fn build_hac(g: &Graph, cost: &[f64]) -> Result<HacTree> {
    let n = g.n();
    if n == 0 {
        return Err(Error::InvalidGraph("HAC needs at least one node".into()));
    }
    check_costs(g, cost)?;
    let mut nodes: Vec<HacNode> = (0..n)
        .map(|v| HacNode {
            level: 0,
            members: vec![v],
            children: Vec::new(),
        })
        .collect();
    let mut cluster_of: Vec<usize> = (0..n).collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut finished: Vec<usize> = Vec::new();
    let mut round = 0;

    while !active.is_empty() {
        let mut best: Vec<Option<usize>> = vec![None; nodes.len()];
        for (idx, &(u, v)) in g.edges().iter().enumerate() {
            let (cu, cv) = (cluster_of[u], cluster_of[v]);
            if cu == cv {
                continue;
            }
            for c in [cu, cv] {
                let better = match best[c] {
                    None => true,
                    Some(b) => (cost[idx], idx) < (cost[b], b),
                };
                if better {
                    best[c] = Some(idx);
                }
            }
        }
        let (stuck, moving): (Vec<usize>, Vec<usize>) = active.iter().partition(|&&c| best[c].is_none());
        finished.extend(stuck);
        if moving.is_empty() {
            break;
        }
        round += 1;

        let mut uf = UnionFind::new(nodes.len());
        for &c in &moving {
            let (u, v) = g.edge(best[c].expect("moving clusters picked an edge"));
            uf.union(cluster_of[u], cluster_of[v]);
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut group_of = std::collections::HashMap::new();
        for &c in &moving {
            let r = uf.find(c);
            let gi = *group_of.entry(r).or_insert_with(|| {
                groups.push(Vec::new());
                groups.len() - 1
            });
            groups[gi].push(c);
        }
        groups.sort_by_key(|grp| grp.iter().map(|&c| nodes[c].members[0]).min());

        active.clear();
        for grp in groups {
            let parent = merged_node(&nodes, round, grp);
            let id = nodes.len();
            for &v in &parent.members {
                cluster_of[v] = id;
            }
            nodes.push(parent);
            active.push(id);
        }
    }

    let root = if finished.len() == 1 {
        finished[0]
    } else {
        let level = finished.iter().map(|&c| nodes[c].level).max().unwrap_or(0) + 1;
        let synthetic = merged_node(&nodes, level, finished);
        nodes.push(synthetic);
        nodes.len() - 1
    };
    let mut tree = HacTree {
        depth: nodes[root].level,
        nodes,
        root,
        leaf_order: Vec::new(),
    };
    tree.leaf_order = tree.leaves_under(root);
    Ok(tree)
}

/// HAC on feature-derived edge costs.
pub fn build_hac_from_features(g: &Graph, metric: Metric) -> Result<HacTree> {
    build_hac(g, &edge_costs_from_features(g, metric)?)
}

impl HacTree {
    pub fn n(&self) -> usize {
        self.nodes[self.root].members.len()
    }

    fn leaves_under(&self, top: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![top];
        while let Some(t) = stack.pop() {
            let node = &self.nodes[t];
            if node.children.is_empty() {
                out.push(node.members[0]);
            } else {
                stack.extend(node.children.iter().rev());
            }
        }
        out
    }

    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut parent = vec![None; self.nodes.len()];
        for (p, node) in self.nodes.iter().enumerate() {
            for &c in &node.children {
                parent[c] = Some(p);
            }
        }
        parent
    }

    /// Tree nodes on the path from the root down to leaf `v`.
    pub fn path_to_leaf(&self, v: usize) -> Vec<usize> {
        let parent = self.parents();
        let mut path = vec![v];
        while let Some(p) = parent[*path.last().expect("path is non-empty")] {
            path.push(p);
        }
        path.reverse();
        path
    }

    /// The clustering in effect at `level`: for each leaf, its highest
    /// ancestor whose level is at most `level`. Clusters are listed in leaf
    /// order.
    pub fn level_partition(&self, level: usize) -> Vec<usize> {
        let parent = self.parents();
        let mut out: Vec<usize> = Vec::new();
        for &v in &self.leaf_order {
            let mut t = v;
            while let Some(p) = parent[t] {
                if self.nodes[p].level > level {
                    break;
                }
                t = p;
            }
            if out.last() != Some(&t) {
                out.push(t);
            }
        }
        out
    }

    /// For each graph node, the index of its cluster within
    /// `level_partition(level)`.
    pub fn level_assignment(&self, level: usize) -> (usize, Vec<usize>) {
        let part = self.level_partition(level);
        let mut of = vec![0; self.n()];
        for (i, &t) in part.iter().enumerate() {
            for &v in &self.nodes[t].members {
                of[v] = i;
            }
        }
        (part.len(), of)
    }

    /// Member sets of every level partition, sorted, from level 0 up to
    /// `depth`.
    pub fn canonical_levels(&self, up_to: usize) -> Vec<Vec<Vec<usize>>> {
        (0..=up_to)
            .map(|l| {
                let mut sets: Vec<Vec<usize>> = self
                    .level_partition(l)
                    .into_iter()
                    .map(|t| self.nodes[t].members.clone())
                    .collect();
                sets.sort();
                sets
            })
            .collect()
    }

    /// Structural checks: leaves, partition of children, level ordering,
    /// leaf order.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(format!("malformed HAC tree: {m}")));
        let n = self.n();
        if self.nodes.len() < n {
            return bad("fewer tree nodes than leaves");
        }
        for v in 0..n {
            let leaf = &self.nodes[v];
            if leaf.level != 0 || leaf.members != [v] || !leaf.children.is_empty() {
                return bad("tree nodes 0..n must be the singleton leaves");
            }
        }
        for node in &self.nodes[n..] {
            if node.children.len() < 2 {
                return bad("internal node with fewer than two children");
            }
            let mut m: Vec<usize> = Vec::new();
            for &c in &node.children {
                if c >= self.nodes.len() || self.nodes[c].level >= node.level {
                    return bad("child level not below parent");
                }
                m.extend(&self.nodes[c].members);
            }
            m.sort_unstable();
            if m != node.members {
                return bad("children do not partition the parent");
            }
        }
        if self.nodes[self.root].level != self.depth {
            return bad("depth differs from root level");
        }
        if self.leaf_order != self.leaves_under(self.root) {
            return bad("leaf order is not the recursive child order");
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("tree serialization is infallible")
    }

    pub fn from_json(s: &str) -> Result<HacTree> {
        let t: HacTree = serde_json::from_str(s)?;
        t.validate()?;
        Ok(t)
    }
}

/// One sequence per graph node: the clusters on its root-to-leaf path, root
/// first.
pub fn dfs_tokenize(tree: &HacTree, g: &Graph) -> Tokenization {
    let parent = tree.parents();
    let sequences = (0..g.n())
        .map(|v| {
            let mut path = vec![v];
            while let Some(p) = parent[*path.last().expect("path is non-empty")] {
                path.push(p);
            }
            path.iter()
                .rev()
                .map(|&t| Token::subgraph(tree.nodes[t].members.clone()))
                .collect()
        })
        .collect();
    Tokenization::new(g, "hac_dfs", serde_json::json!({ "depth": tree.depth }), sequences)
}

/// One sequence per tree level, coarsest first; each lists that level's
/// clusters in leaf order. The last sequence is every node as a singleton.
pub fn bfs_tokenize(tree: &HacTree, g: &Graph) -> Tokenization {
    let sequences = (0..=tree.depth)
        .rev()
        .map(|l| {
            tree.level_partition(l)
                .into_iter()
                .map(|t| Token::subgraph(tree.nodes[t].members.clone()))
                .collect()
        })
        .collect();
    Tokenization::new(g, "hac_bfs", serde_json::json!({ "depth": tree.depth }), sequences)
}

/// Minimum spanning forest by Kruskal over `(cost, edge index)`. Returns the
/// chosen edge indices in increasing index order.
pub fn minimum_spanning_forest(g: &Graph, cost: &[f64]) -> Result<Vec<usize>> {
    check_costs(g, cost)?;
    let mut order: Vec<usize> = (0..g.edge_count()).collect();
    order.sort_by(|&a, &b| cost[a].total_cmp(&cost[b]).then(a.cmp(&b)));
    let mut uf = UnionFind::new(g.n());
    let mut keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| {
            let (u, v) = g.edge(i);
            uf.union(u, v)
        })
        .collect();
    keep.sort_unstable();
    Ok(keep)
}

/// Whether HAC on `g` and HAC on its minimum spanning forest give the same
/// clustering at every level. Ties are resolved by edge index in both runs,
/// which acts as an index-ordered perturbation of equal costs.
pub fn hac_on_mst_equivalence(g: &Graph, cost: &[f64]) -> Result<bool> {
    let keep = minimum_spanning_forest(g, cost)?;
    let mst = Graph::new(g.n(), keep.iter().map(|&i| g.edge(i)).collect())?;
    let mst_cost: Vec<f64> = keep.iter().map(|&i| cost[i]).collect();
    let full = build_hac(g, cost)?;
    let reduced = build_hac(&mst, &mst_cost)?;
    let top = full.depth.max(reduced.depth);
    Ok(full.canonical_levels(top) == reduced.canonical_levels(top))
}

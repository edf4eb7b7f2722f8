//! Mutation graph over the sampled neighborhood and connectivity statistics
//! of the surviving induced subgraph.
//!
//! Nodes are the implemented program (empty edit set) plus sampled mutants;
//! an edge joins two nodes whose edit sets differ by exactly one edit. A
//! fragmented surviving subgraph means small syntactic steps tend to break
//! the suite; a large connected basin means the tests are locally permissive.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::mutagen::Mutant;

/// Reserved node id for the implemented (unmutated) program.
pub const IMPL_NODE: &str = "impl";

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("unknown node id `{0}`")]
    UnknownNode(String),
    #[error("duplicate node id `{0}`")]
    DuplicateNode(String),
}

#[derive(Debug, Clone)]
pub struct MutationGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
}

/// Connectivity summary of a (sub)graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentStats {
    pub component_count: usize,
    pub largest_component_size: usize,
    /// Descending.
    pub component_sizes: Vec<usize>,
    /// Size of the component containing the impl node, when present.
    pub impl_component: Option<usize>,
}

struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    fn new(n: usize) -> Self {
        DisjointSet {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, x: usize) -> usize {
        if self.parent[x] != x {
            self.parent[x] = self.find(self.parent[x]);
        }
        self.parent[x]
    }

    fn union(&mut self, a: usize, b: usize) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.size[ra] += self.size[rb];
        self.parent[rb] = ra;
    }
}

type EditKey = (String, usize, usize, String);

fn edit_set(mutant: &Mutant) -> BTreeSet<EditKey> {
    mutant
        .mutations
        .iter()
        .map(|m| {
            (
                m.unit_path.clone(),
                m.span.start,
                m.span.end,
                m.replacement_fragment.clone(),
            )
        })
        .collect()
}

/// Two edit sets are one mutation step apart iff their symmetric difference
/// has size 1, i.e. the smaller is contained in the larger and the sizes
/// differ by exactly one.
fn one_step_apart(a: &BTreeSet<EditKey>, b: &BTreeSet<EditKey>) -> bool {
    let (small, large) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    large.len() == small.len() + 1 && small.is_subset(large)
}

/// Build the graph over the sampled mutants, optionally including the impl
/// node (whose edit set is empty, so it neighbors every order-1 mutant).
pub fn build_graph(mutants: &[Mutant], include_impl: bool) -> Result<MutationGraph, GraphError> {
    let mut nodes: Vec<(String, BTreeSet<EditKey>)> = Vec::new();
    if include_impl {
        nodes.push((IMPL_NODE.to_string(), BTreeSet::new()));
    }
    for m in mutants {
        nodes.push((m.id.clone(), edit_set(m)));
    }
    nodes.sort_by(|a, b| a.0.cmp(&b.0));

    let mut index = HashMap::with_capacity(nodes.len());
    for (i, (id, _)) in nodes.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(GraphError::DuplicateNode(id.clone()));
        }
    }

    let mut adjacency = vec![Vec::new(); nodes.len()];
    for i in 0..nodes.len() {
        for j in (i + 1)..nodes.len() {
            if one_step_apart(&nodes[i].1, &nodes[j].1) {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }

    Ok(MutationGraph {
        nodes: nodes.into_iter().map(|(id, _)| id).collect(),
        index,
        adjacency,
    })
}

impl MutationGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn contains(&self, id: &str) -> bool {
        self.index.contains_key(id)
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn neighbors(&self, id: &str) -> Option<Vec<&str>> {
        let &i = self.index.get(id)?;
        Some(
            self.adjacency[i]
                .iter()
                .map(|&j| self.nodes[j].as_str())
                .collect(),
        )
    }

    /// Node-induced subgraph on `survivor_ids`. The impl node, when present
    /// in the graph, is always kept: the implemented program passes the
    /// suite by definition.
    pub fn induced_subgraph(&self, survivor_ids: &BTreeSet<String>) -> Result<MutationGraph, GraphError> {
        for id in survivor_ids {
            if !self.index.contains_key(id) {
                return Err(GraphError::UnknownNode(id.clone()));
            }
        }
        let keep: Vec<usize> = self
            .nodes
            .iter()
            .enumerate()
            .filter(|(_, id)| survivor_ids.contains(*id) || id.as_str() == IMPL_NODE)
            .map(|(i, _)| i)
            .collect();
        let mut remap = HashMap::with_capacity(keep.len());
        for (new_i, &old_i) in keep.iter().enumerate() {
            remap.insert(old_i, new_i);
        }
        let nodes: Vec<String> = keep.iter().map(|&i| self.nodes[i].clone()).collect();
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let adjacency = keep
            .iter()
            .map(|&old_i| {
                self.adjacency[old_i]
                    .iter()
                    .filter_map(|n| remap.get(n).copied())
                    .collect()
            })
            .collect();
        Ok(MutationGraph {
            nodes,
            index,
            adjacency,
        })
    }

    /// Connected components via disjoint-set union; deterministic regardless
    /// of node input order.
    pub fn component_stats(&self) -> ComponentStats {
        let n = self.nodes.len();
        let mut dsu = DisjointSet::new(n);
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors {
                dsu.union(i, j);
            }
        }
        let mut size_by_root: HashMap<usize, usize> = HashMap::new();
        for i in 0..n {
            *size_by_root.entry(dsu.find(i)).or_insert(0) += 1;
        }
        let mut component_sizes: Vec<usize> = size_by_root.values().copied().collect();
        component_sizes.sort_unstable_by(|a, b| b.cmp(a));
        let impl_component = self
            .index
            .get(IMPL_NODE)
            .map(|&i| size_by_root[&dsu.find(i)]);
        ComponentStats {
            component_count: component_sizes.len(),
            largest_component_size: component_sizes.first().copied().unwrap_or(0),
            component_sizes,
            impl_component,
        }
    }

    /// Plain adjacency-list text: one `a b` edge per line (a < b), then one
    /// bare line per isolated node.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors {
                if i < j {
                    out.push_str(&format!("{} {}\n", self.nodes[i], self.nodes[j]));
                }
            }
        }
        for (i, id) in self.nodes.iter().enumerate() {
            if self.adjacency[i].is_empty() {
                out.push_str(id);
                out.push('\n');
            }
        }
        out
    }
}

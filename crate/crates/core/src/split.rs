//! Decomposition of object models along many-to-many bridges.
//!
//! A many-to-many association can only be mapped to its own association
//! table, so when it is also a bridge of the class graph the two sides can
//! be synthesized independently.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::MappingCandidate;
use crate::metrics::MetricVector;
use crate::model::ObjectModel;
use crate::synth::{legal_domain, Domain, PinSet, SynthesisError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOrigin {
    Inheritance { child: String },
    Association { name: String, many_to_many: bool },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphEdge {
    pub a: usize,
    pub b: usize,
    pub origin: EdgeOrigin,
}

/// Undirected view of a model: classes as nodes, inheritance and
/// association links as edges.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ModelGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<GraphEdge>,
}

impl ModelGraph {
    pub fn with_nodes<S: Into<String>>(nodes: impl IntoIterator<Item = S>) -> Self {
        Self {
            nodes: nodes.into_iter().map(Into::into).collect(),
            edges: Vec::new(),
        }
    }

    pub fn add_edge(&mut self, a: usize, b: usize, origin: EdgeOrigin) {
        assert!(
            a < self.nodes.len() && b < self.nodes.len(),
            "edge endpoint out of range"
        );
        self.edges.push(GraphEdge { a, b, origin });
    }

    /// Requires a valid model.
    pub fn from_model(model: &ObjectModel) -> Self {
        let mut g = Self::with_nodes(model.classes.iter().map(|c| c.name.clone()));
        let index = |name: &str| model.class_index(name).expect("valid model");
        for (i, c) in model.classes.iter().enumerate() {
            if let Some(p) = &c.parent {
                g.add_edge(
                    i,
                    index(p),
                    EdgeOrigin::Inheritance {
                        child: c.name.clone(),
                    },
                );
            }
        }
        for a in &model.associations {
            g.add_edge(
                index(&a.src),
                index(&a.dst),
                EdgeOrigin::Association {
                    name: a.name.clone(),
                    many_to_many: a.is_many_to_many(),
                },
            );
        }
        g
    }

    /// Distinct node pairs `(min, max)` with at least one edge, self-loops excluded.
    fn simple_pairs(&self) -> BTreeSet<(usize, usize)> {
        self.edges
            .iter()
            .filter(|e| e.a != e.b)
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect()
    }
}

/// Bridges of the simple graph obtained by collapsing parallel edges, as
/// sorted `(min, max)` node pairs.
///
/// One depth-first pass per connected component computes discovery times and
/// low-links; tree edge `(u, v)` is a bridge iff `low[v] > disc[u]`.
pub fn find_bridges(g: &ModelGraph) -> Vec<(usize, usize)> {
    let n = g.nodes.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (a, b) in g.simple_pairs() {
        adj[a].push(b);
        adj[b].push(a);
    }

    const UNSEEN: usize = usize::MAX;
    let mut disc = vec![UNSEEN; n];
    let mut low = vec![0; n];
    let mut timer = 0;
    let mut bridges = Vec::new();

    for root in 0..n {
        if disc[root] != UNSEEN {
            continue;
        }
        // (node, parent, next neighbour position)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, UNSEEN, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (u, parent, ref mut next)) = stack.last_mut() {
            if let Some(&v) = adj[u].get(*next) {
                *next += 1;
                if v == parent {
                    continue;
                }
                if disc[v] == UNSEEN {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, u, 0));
                } else {
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if parent != UNSEEN {
                    low[parent] = low[parent].min(low[u]);
                    if low[u] > disc[parent] {
                        bridges.push((parent.min(u), parent.max(u)));
                    }
                }
            }
        }
    }
    bridges.sort_unstable();
    bridges
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitResult {
    pub components: Vec<ObjectModel>,
    /// Names of the removed many-to-many associations, declaration order.
    pub removed_bridges: Vec<String>,
    pub component_of: IndexMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct SplitJson {
    pub components: Vec<String>,
    pub removed_bridges: Vec<String>,
    pub component_of: IndexMap<String, usize>,
}

impl SplitResult {
    pub fn to_json_value(&self) -> SplitJson {
        SplitJson {
            components: self.components.iter().map(|c| c.name.clone()).collect(),
            removed_bridges: self.removed_bridges.clone(),
            component_of: self.component_of.clone(),
        }
    }
}

/// Removes every bridge made only of many-to-many associations and returns
/// the connected components as sub-models.
///
/// Components are ordered by their earliest-declared class and named
/// `<model>_<that class>`. Each keeps its classes, their attributes, the
/// associations internal to it and the custom datatypes it uses.
pub fn split(model: &ObjectModel) -> SplitResult {
    let g = ModelGraph::from_model(model);
    let bridges: BTreeSet<(usize, usize)> = find_bridges(&g).into_iter().collect();

    let mut removed = BTreeSet::new();
    for pair in &bridges {
        let parallel: Vec<&GraphEdge> = g
            .edges
            .iter()
            .filter(|e| (e.a.min(e.b), e.a.max(e.b)) == *pair)
            .collect();
        let all_mn = parallel.iter().all(|e| {
            matches!(
                e.origin,
                EdgeOrigin::Association {
                    many_to_many: true,
                    ..
                }
            )
        });
        if all_mn {
            for e in parallel {
                if let EdgeOrigin::Association { name, .. } = &e.origin {
                    removed.insert(name.clone());
                }
            }
        }
    }

    // Union-find over the edges that stay.
    let n = model.classes.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while parent[r] != r {
            r = parent[r];
        }
        let mut x = x;
        while parent[x] != r {
            let next = parent[x];
            parent[x] = r;
            x = next;
        }
        r
    }
    for e in &g.edges {
        if let EdgeOrigin::Association { name, .. } = &e.origin {
            if removed.contains(name) {
                continue;
            }
        }
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }

    let mut component_ids: IndexMap<usize, usize> = IndexMap::new();
    let mut component_of = IndexMap::new();
    for (i, c) in model.classes.iter().enumerate() {
        let root = find(&mut parent, i);
        let next = component_ids.len();
        let id = *component_ids.entry(root).or_insert(next);
        component_of.insert(c.name.clone(), id);
    }

    let mut components: Vec<ObjectModel> = Vec::new();
    for id in 0..component_ids.len() {
        let classes: Vec<_> = model
            .classes
            .iter()
            .filter(|c| component_of[&c.name] == id)
            .cloned()
            .collect();
        let associations: Vec<_> = model
            .associations
            .iter()
            .filter(|a| !removed.contains(&a.name) && component_of[&a.src] == id)
            .cloned()
            .collect();
        let used: BTreeSet<&str> = classes
            .iter()
            .flat_map(|c| c.attr_set.iter().map(|a| a.dtype.as_str()))
            .collect();
        let datatypes = model
            .datatypes
            .iter()
            .filter(|t| used.contains(t.as_str()))
            .cloned()
            .collect();
        components.push(ObjectModel {
            name: format!("{}_{}", model.name, classes[0].name),
            classes,
            associations,
            datatypes,
        });
    }

    let removed_bridges = model
        .associations
        .iter()
        .filter(|a| removed.contains(&a.name))
        .map(|a| a.name.clone())
        .collect();
    SplitResult {
        components,
        removed_bridges,
        component_of,
    }
}

/// Distributes a whole-model pin set over the components of `split`.
///
/// Pins on removed bridges are only checked for legality, since a bridge
/// has a single possible strategy.
pub fn component_pins(
    model: &ObjectModel,
    split: &SplitResult,
    pins: &PinSet,
) -> Result<Vec<PinSet>, SynthesisError> {
    let mut out = vec![PinSet::default(); split.components.len()];
    for (name, s) in &pins.classes {
        legal_domain(model, name)?;
        out[split.component_of[name]]
            .classes
            .insert(name.clone(), *s);
    }
    for (name, s) in &pins.presets {
        legal_domain(model, name)?;
        out[split.component_of[name]]
            .presets
            .insert(name.clone(), *s);
    }
    for (name, s) in &pins.assocs {
        let Domain::Association(domain) = legal_domain(model, name)? else {
            return Err(SynthesisError::UnknownEntity(name.clone()));
        };
        if split.removed_bridges.contains(name) {
            if !domain.contains(s) {
                return Err(SynthesisError::IllegalPin {
                    entity: name.clone(),
                    strategy: s.to_string(),
                });
            }
            continue;
        }
        let src = &model.association(name).expect("checked above").src;
        out[split.component_of[src]].assocs.insert(name.clone(), *s);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ComposeError {
    #[error("expected {expected} component selections, got {got}")]
    ComponentCount { expected: usize, got: usize },
    #[error("bridge `{0}` is not an association of the split model")]
    UnknownBridge(String),
}

/// The candidate chosen for one component.
#[derive(Debug, Clone, Copy)]
pub struct Selection<'a> {
    pub candidate: &'a MappingCandidate,
    pub vector: &'a MetricVector,
}

/// Metrics of the whole-model mapping assembled from one selection per
/// component.
///
/// Vectors add componentwise. Every removed bridge becomes an association
/// table whose two references are constrained when their end resolves to a
/// single table, so RIM grows by 0 to 2 per bridge.
pub fn compose(
    model: &ObjectModel,
    split: &SplitResult,
    selections: &[Selection<'_>],
) -> Result<MetricVector, ComposeError> {
    if selections.len() != split.components.len() {
        return Err(ComposeError::ComponentCount {
            expected: split.components.len(),
            got: selections.len(),
        });
    }
    let mut out = MetricVector::default();
    for s in selections {
        let v = s.vector;
        out.tati += v.tati;
        out.nct += v.nct;
        out.ncrf += v.ncrf;
        out.anv += v.anv;
        out.nic += v.nic;
        out.rim += v.rim;
        out.per_class
            .extend(v.per_class.iter().map(|(k, m)| (k.clone(), *m)));
    }
    for name in &split.removed_bridges {
        let assoc = model
            .association(name)
            .ok_or_else(|| ComposeError::UnknownBridge(name.clone()))?;
        for end in [&assoc.src, &assoc.dst] {
            let comp = *split
                .component_of
                .get(end)
                .ok_or_else(|| ComposeError::UnknownBridge(name.clone()))?;
            let sub = &split.components[comp];
            if selections[comp].candidate.end_tables(sub, end).len() == 1 {
                out.rim += 1;
            }
        }
    }
    Ok(out)
}

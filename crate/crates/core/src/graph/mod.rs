//! In-memory knowledge graph.
//!
//! Nodes carry label, definition, scoped synonyms, deprecation state and
//! pending (provisional) changes. Edges are `(subject, predicate, object)`
//! triples; endpoints may reference nodes that are not in the graph.

mod json;
mod obo;

use std::borrow::Borrow;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::Bound;

use thiserror::Error;

pub use json::{load, save};
pub use obo::load_obo;

use crate::model::{is_bare_word, is_curie, NodeRef, SynonymScope};

/// A node identifier. Always a well-formed CURIE.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(value: impl Into<String>) -> Result<Self, String> {
        let value = value.into();
        if is_curie(&value) {
            Ok(NodeId(value))
        } else {
            Err(format!("'{value}' is not a well-formed CURIE"))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    // lower bound for range scans; never stored
    fn min() -> Self {
        NodeId(String::new())
    }
}

impl Borrow<str> for NodeId {
    fn borrow(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NodeKind {
    #[default]
    Class,
    Property,
    Individual,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Synonym {
    pub value: String,
    pub scope: SynonymScope,
}

impl Synonym {
    pub fn new(value: impl Into<String>, scope: SynonymScope) -> Self {
        Synonym {
            value: value.into(),
            scope,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub id: NodeId,
    pub label: Option<String>,
    pub definition: Option<String>,
    /// Insertion order; no duplicate `(value, scope)` pairs.
    pub synonyms: Vec<Synonym>,
    pub deprecated: bool,
    /// Only set on deprecated nodes.
    pub replaced_by: Option<NodeId>,
    pub kind: NodeKind,
    /// JSON-serialized changes stored provisionally on this node.
    pub pending: Vec<String>,
}

impl Node {
    pub fn new(id: NodeId) -> Self {
        Node {
            id,
            label: None,
            definition: None,
            synonyms: Vec::new(),
            deprecated: false,
            replaced_by: None,
            kind: NodeKind::Class,
            pending: Vec::new(),
        }
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn has_synonym(&self, value: &str, scope: SynonymScope) -> bool {
        self.synonyms
            .iter()
            .any(|s| s.value == value && s.scope == scope)
    }

    /// Field-wise equality with synonyms compared as multisets.
    pub fn content_eq(&self, other: &Node) -> bool {
        if self.synonyms.len() != other.synonyms.len() {
            return false;
        }
        fn sorted(n: &Node) -> Vec<&Synonym> {
            let mut s: Vec<&Synonym> = n.synonyms.iter().collect();
            s.sort();
            s
        }
        self.id == other.id
            && self.label == other.label
            && self.definition == other.definition
            && self.deprecated == other.deprecated
            && self.replaced_by == other.replaced_by
            && self.kind == other.kind
            && self.pending == other.pending
            && sorted(self) == sorted(other)
    }
}

/// A directed, labeled edge. The predicate is either a CURIE or a bare
/// relation name such as `part_of`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub subject: NodeId,
    pub predicate: String,
    pub object: NodeId,
}

impl Edge {
    pub fn new(subject: NodeId, predicate: impl Into<String>, object: NodeId) -> Result<Self, String> {
        let predicate = predicate.into();
        if !is_curie(&predicate) && !is_bare_word(&predicate) {
            return Err(format!(
                "predicate '{predicate}' is neither a CURIE nor a bare relation name"
            ));
        }
        Ok(Edge {
            subject,
            predicate,
            object,
        })
    }

    /// The predicate as a reference: CURIE or bare-word label.
    pub fn predicate_ref(&self) -> NodeRef {
        if is_curie(&self.predicate) {
            NodeRef::Curie(self.predicate.clone())
        } else {
            NodeRef::Label(self.predicate.clone())
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({} {} {})", self.subject, self.predicate, self.object)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("edge {0} already exists")]
    DuplicateEdge(Edge),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ResolveError {
    #[error("no node matches {0}")]
    NotFound(NodeRef),
    #[error("{reference} is ambiguous: {}", candidates.iter().map(NodeId::as_str).collect::<Vec<_>>().join(", "))]
    Ambiguous {
        reference: NodeRef,
        candidates: Vec<NodeId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LoadError {
    #[error("format error at {path}: {message}")]
    Format { path: String, message: String },
    #[error("duplicate node id {0}")]
    DuplicateNodeId(String),
}

impl LoadError {
    pub(crate) fn format(path: impl Into<String>, message: impl Into<String>) -> Self {
        LoadError::Format {
            path: path.into(),
            message: message.into(),
        }
    }
}

/// The graph. Mutations go through methods that keep the label index and
/// the reverse edge index in step with nodes and edges.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeSet<Edge>,
    // (object, subject, predicate)
    incoming: BTreeSet<(NodeId, NodeId, String)>,
    label_index: HashMap<String, BTreeSet<NodeId>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.values()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = &NodeId> + '_ {
        self.nodes.keys()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn contains_node(&self, id: &str) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn contains_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    pub fn ids_with_label(&self, label: &str) -> impl Iterator<Item = &NodeId> + '_ {
        self.label_index.get(label).into_iter().flatten()
    }

    pub fn insert_node(&mut self, node: Node) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNodeId(node.id));
        }
        if let Some(label) = &node.label {
            self.index_label(label.clone(), node.id.clone());
        }
        self.nodes.insert(node.id.clone(), node);
        Ok(())
    }

    /// Removes a node together with every edge that has it as subject or
    /// object. Returns the node and the removed edges.
    pub fn remove_node(&mut self, id: &str) -> Option<(Node, Vec<Edge>)> {
        let node = self.nodes.remove(id)?;
        if let Some(label) = &node.label {
            self.unindex_label(label, &node.id);
        }
        let mut incident: Vec<Edge> = self.edges_from(id).cloned().collect();
        incident.extend(self.edges_to(id).filter(|e| e.subject.as_str() != id));
        for edge in &incident {
            self.remove_edge(edge);
        }
        Some((node, incident))
    }

    /// Mutates a node in place. Label changes are re-indexed afterwards; the
    /// closure must not change the id.
    pub fn update_node<R>(&mut self, id: &str, f: impl FnOnce(&mut Node) -> R) -> Option<R> {
        let node = self.nodes.get_mut(id)?;
        let old_label = node.label.clone();
        let result = f(node);
        debug_assert_eq!(node.id.as_str(), id, "update_node must not change the id");
        if node.label != old_label {
            let new_label = node.label.clone();
            let id = node.id.clone();
            if let Some(old) = &old_label {
                self.unindex_label(old, &id);
            }
            if let Some(new) = new_label {
                self.index_label(new, id);
            }
        }
        Some(result)
    }

    pub fn add_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        if self.edges.contains(&edge) {
            return Err(GraphError::DuplicateEdge(edge));
        }
        self.incoming.insert((
            edge.object.clone(),
            edge.subject.clone(),
            edge.predicate.clone(),
        ));
        self.edges.insert(edge);
        Ok(())
    }

    pub fn remove_edge(&mut self, edge: &Edge) -> bool {
        if self.edges.remove(edge) {
            self.incoming.remove(&(
                edge.object.clone(),
                edge.subject.clone(),
                edge.predicate.clone(),
            ));
            true
        } else {
            false
        }
    }

    /// Edges whose subject is `subject`, ordered by (predicate, object).
    pub fn edges_from<'a>(&'a self, subject: &'a str) -> impl Iterator<Item = &'a Edge> + 'a {
        let lower = Edge {
            subject: NodeId(subject.to_string()),
            predicate: String::new(),
            object: NodeId::min(),
        };
        self.edges
            .range((Bound::Included(lower), Bound::Unbounded))
            .take_while(move |e| e.subject.as_str() == subject)
    }

    /// Edges whose object is `object`.
    pub fn edges_to<'a>(&'a self, object: &'a str) -> impl Iterator<Item = Edge> + 'a {
        let lower = (NodeId(object.to_string()), NodeId::min(), String::new());
        self.incoming
            .range((Bound::Included(lower), Bound::Unbounded))
            .take_while(move |(o, _, _)| o.as_str() == object)
            .map(|(o, s, p)| Edge {
                subject: s.clone(),
                predicate: p.clone(),
                object: o.clone(),
            })
    }

    /// Resolves a reference to a node id. CURIEs must name an existing node.
    /// Labels must match exactly one node label (case-sensitive); a label
    /// that matches no node but is itself the id of an existing node
    /// resolves to that node.
    pub fn resolve(&self, reference: &NodeRef) -> Result<NodeId, ResolveError> {
        match reference {
            NodeRef::Curie(c) => self
                .nodes
                .get_key_value(c.as_str())
                .map(|(k, _)| k.clone())
                .ok_or_else(|| ResolveError::NotFound(reference.clone())),
            NodeRef::Label(label) => {
                let candidates: Vec<NodeId> = self.ids_with_label(label).cloned().collect();
                match candidates.len() {
                    1 => Ok(candidates.into_iter().next().unwrap()),
                    0 => self
                        .nodes
                        .get_key_value(label.as_str())
                        .map(|(k, _)| k.clone())
                        .ok_or_else(|| ResolveError::NotFound(reference.clone())),
                    _ => Err(ResolveError::Ambiguous {
                        reference: reference.clone(),
                        candidates,
                    }),
                }
            }
        }
    }

    /// Checks internal consistency: label index, reverse edge index and node
    /// invariants. Used by tests after mutations.
    pub fn audit(&self) -> Result<(), String> {
        let mut expected: HashMap<String, BTreeSet<NodeId>> = HashMap::new();
        for (id, node) in &self.nodes {
            if id != &node.id {
                return Err(format!("node stored under {id} has id {}", node.id));
            }
            if let Some(label) = &node.label {
                expected.entry(label.clone()).or_default().insert(id.clone());
            }
            if node.replaced_by.is_some() && !node.deprecated {
                return Err(format!("{id} has replaced_by but is not deprecated"));
            }
            let unique: BTreeSet<&Synonym> = node.synonyms.iter().collect();
            if unique.len() != node.synonyms.len() {
                return Err(format!("{id} has duplicate synonyms"));
            }
        }
        if expected != self.label_index {
            return Err("label index out of step with node labels".to_string());
        }
        let reverse: BTreeSet<(NodeId, NodeId, String)> = self
            .edges
            .iter()
            .map(|e| (e.object.clone(), e.subject.clone(), e.predicate.clone()))
            .collect();
        if reverse != self.incoming {
            return Err("reverse edge index out of step with edges".to_string());
        }
        Ok(())
    }

    /// Warnings that do not make the graph invalid: dangling edge endpoints
    /// and edges pointing at deprecated nodes.
    pub fn lint(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for edge in &self.edges {
            for end in [&edge.subject, &edge.object] {
                match self.nodes.get(end) {
                    None => warnings.push(format!("edge {edge} references missing node {end}")),
                    Some(n) if n.deprecated && end == &edge.object => {
                        warnings.push(format!("edge {edge} points at deprecated node {end}"))
                    }
                    _ => {}
                }
            }
        }
        warnings
    }

    fn index_label(&mut self, label: String, id: NodeId) {
        self.label_index.entry(label).or_default().insert(id);
    }

    fn unindex_label(&mut self, label: &str, id: &NodeId) {
        if let Some(ids) = self.label_index.get_mut(label) {
            ids.remove(id);
            if ids.is_empty() {
                self.label_index.remove(label);
            }
        }
    }
}

/// Graph equality: node maps equal field-wise (synonyms as multisets,
/// pending lists in order) and edge sets equal.
pub fn graph_equal(a: &Graph, b: &Graph) -> bool {
    a.nodes.len() == b.nodes.len()
        && a.edges == b.edges
        && a
            .nodes
            .iter()
            .zip(&b.nodes)
            .all(|((ia, na), (ib, nb))| ia == ib && na.content_eq(nb))
}

impl PartialEq for Graph {
    fn eq(&self, other: &Self) -> bool {
        graph_equal(self, other)
    }
}

impl Eq for Graph {}

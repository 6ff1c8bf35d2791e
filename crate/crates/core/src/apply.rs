//! Executing change sets against a graph.
//!
//! Each change is atomic: every precondition is checked before the graph is
//! touched, so a failed change leaves the graph as it was. Change sets are
//! applied strictly in order and later changes see earlier mutations.
//!
//! In provisional mode nothing is executed; the serialized change is
//! appended to the pending list of the node it is about, to be applied
//! later by [`apply_pending`].

use serde::Serialize;
use thiserror::Error;

use crate::cnl::render_command;
use crate::graph::{Edge, Graph, Node, NodeId, ResolveError, Synonym};
use crate::model::{is_bare_word, is_curie, validate, Change, ChangeKind, ChangeSet, NodeRef, SynonymScope};
use crate::serialization::{change_from_json, change_to_json};

/// Scope given to a new synonym when the change does not name one.
pub const DEFAULT_SYNONYM_SCOPE: SynonymScope = SynonymScope::Related;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OnError {
    #[default]
    Halt,
    SkipAndReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApplyOptions {
    /// Store changes as pending instead of executing them.
    pub provisional: bool,
    /// Prefix for ids minted by `create '<label>'`.
    pub auto_id_prefix: String,
    /// Zero-padded width of the minted counter; at least 1.
    pub auto_id_width: usize,
    pub on_error: OnError,
    /// Let CURIEs in edge endpoints and replacements name nodes that are not
    /// in the graph. Label references always need a matching node.
    pub allow_unresolved_curie_targets: bool,
}

impl Default for ApplyOptions {
    fn default() -> Self {
        ApplyOptions {
            provisional: false,
            auto_id_prefix: "KGCL".to_string(),
            auto_id_width: 7,
            on_error: OnError::Halt,
            allow_unresolved_curie_targets: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ApplyError {
    #[error("invalid change: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error(transparent)]
    Resolve(#[from] ResolveError),
    #[error("{field} mismatch: change expects '{expected}', node has {}", found.as_ref().map(|f| format!("'{f}'")).unwrap_or_else(|| "none".to_string()))]
    Mismatch {
        field: &'static str,
        expected: String,
        found: Option<String>,
    },
    #[error("{0} already exists")]
    AlreadyExists(String),
    #[error("{0} does not exist")]
    MissingTarget(String),
    #[error("expected exactly one edge from {subject} to {object}, found {count}")]
    AmbiguousEdge {
        subject: String,
        object: String,
        count: usize,
    },
    #[error("{node} has {count} synonyms with value '{value}'")]
    AmbiguousSynonym {
        node: String,
        value: String,
        count: usize,
    },
    #[error("{0}")]
    NoProvisionalTarget(String),
    #[error("unreadable pending change: {0}")]
    BadPayload(String),
}

impl ApplyError {
    pub fn code(&self) -> &'static str {
        match self {
            ApplyError::Invalid(_) => "invalid",
            ApplyError::Resolve(ResolveError::NotFound(_)) => "not_found",
            ApplyError::Resolve(ResolveError::Ambiguous { .. }) => "ambiguous",
            ApplyError::Mismatch { .. } => "mismatch",
            ApplyError::AlreadyExists(_) => "already_exists",
            ApplyError::MissingTarget(_) => "missing_target",
            ApplyError::AmbiguousEdge { .. } => "ambiguous_edge",
            ApplyError::AmbiguousSynonym { .. } => "ambiguous_synonym",
            ApplyError::NoProvisionalTarget(_) => "no_provisional_target",
            ApplyError::BadPayload(_) => "bad_payload",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ApplyStatus {
    Applied,
    StoredProvisional,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResolvedRef {
    pub reference: String,
    pub id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ApplyEntry {
    pub index: usize,
    pub change_type: &'static str,
    pub command: String,
    pub status: ApplyStatus,
    pub message: String,
    pub resolved: Vec<ResolvedRef>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error_code: Option<&'static str>,
    #[serde(skip)]
    pub error: Option<ApplyError>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ApplyReport {
    pub entries: Vec<ApplyEntry>,
    /// Index of the change that stopped a halting run.
    pub halted_at: Option<usize>,
}

impl ApplyReport {
    pub fn count(&self, status: ApplyStatus) -> usize {
        self.entries.iter().filter(|e| e.status == status).count()
    }

    pub fn has_failures(&self) -> bool {
        self.count(ApplyStatus::Failed) > 0
    }

    pub fn statuses(&self) -> Vec<ApplyStatus> {
        self.entries.iter().map(|e| e.status).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }
}

/// Working state for one change: reference resolution plus the trail of
/// what each reference resolved to.
struct Context<'a> {
    graph: &'a Graph,
    opts: &'a ApplyOptions,
    resolved: Vec<ResolvedRef>,
}

impl Context<'_> {
    fn note(&mut self, reference: &NodeRef, id: &str) {
        self.resolved.push(ResolvedRef {
            reference: reference.to_string(),
            id: id.to_string(),
        });
    }

    /// A node that must exist.
    fn node(&mut self, reference: &NodeRef) -> Result<NodeId, ApplyError> {
        let id = self.graph.resolve(reference)?;
        self.note(reference, id.as_str());
        Ok(id)
    }

    /// An edge endpoint or replacement target; CURIEs may dangle when the
    /// options allow it.
    fn endpoint(&mut self, reference: &NodeRef) -> Result<NodeId, ApplyError> {
        let id = match reference {
            NodeRef::Curie(c) if self.opts.allow_unresolved_curie_targets => {
                NodeId::new(c.as_str()).map_err(|m| ApplyError::Invalid(vec![m]))?
            }
            _ => self.graph.resolve(reference)?,
        };
        self.note(reference, id.as_str());
        Ok(id)
    }

    /// A relation. CURIEs and bare relation words are used as they are;
    /// other labels must name a node.
    fn predicate(&mut self, reference: &NodeRef) -> Result<String, ApplyError> {
        let p = match reference {
            NodeRef::Curie(c) => c.clone(),
            NodeRef::Label(l) if is_bare_word(l) => l.clone(),
            NodeRef::Label(_) => self.graph.resolve(reference)?.to_string(),
        };
        self.note(reference, &p);
        Ok(p)
    }
}

fn edge(subject: &NodeId, predicate: &str, object: &NodeId) -> Edge {
    Edge {
        subject: subject.clone(),
        predicate: predicate.to_string(),
        object: object.clone(),
    }
}

fn mint_id(graph: &Graph, opts: &ApplyOptions) -> Result<NodeId, ApplyError> {
    if opts.auto_id_width == 0 {
        return Err(ApplyError::Invalid(vec!["auto_id_width must be at least 1".into()]));
    }
    let width = opts.auto_id_width;
    for n in 1u64.. {
        let candidate = format!("{}:{n:0width$}", opts.auto_id_prefix);
        if !is_curie(&candidate) {
            return Err(ApplyError::Invalid(vec![format!(
                "auto id prefix '{}' does not form a CURIE",
                opts.auto_id_prefix
            )]));
        }
        if !graph.contains_node(&candidate) {
            return Ok(NodeId::new(candidate).expect("checked shape"));
        }
    }
    unreachable!()
}

/// Deferred mutation computed from a read-only pass, so every check runs
/// before anything is changed.
enum Plan {
    Update(NodeId, Box<dyn FnOnce(&mut Node)>),
    Remove(NodeId),
    Insert(Node),
    Edges { remove: Option<Edge>, add: Option<Edge> },
}

fn plan(ctx: &mut Context, kind: &ChangeKind) -> Result<(Plan, String), ApplyError> {
    let graph = ctx.graph;
    let node_of = |id: &NodeId| graph.node(id.as_str()).expect("resolved ids exist");
    Ok(match kind {
        ChangeKind::NodeRename {
            about_node,
            old_value,
            new_value,
        } => {
            let id = ctx.node(about_node)?;
            let current = &node_of(&id).label;
            if let Some(old) = old_value {
                if current.as_ref() != Some(old) {
                    return Err(ApplyError::Mismatch {
                        field: "label",
                        expected: old.clone(),
                        found: current.clone(),
                    });
                }
            }
            let new = new_value.clone();
            let msg = format!("{id} renamed to '{new}'");
            (Plan::Update(id, Box::new(move |n| n.label = Some(new))), msg)
        }
        ChangeKind::NodeObsoletion {
            about_node,
            replacement,
        } => {
            let id = ctx.node(about_node)?;
            let replacement = replacement.as_ref().map(|r| ctx.endpoint(r)).transpose()?;
            if replacement.as_ref() == Some(&id) {
                return Err(ApplyError::Invalid(vec![format!("{id} cannot replace itself")]));
            }
            let msg = match &replacement {
                Some(r) => format!("{id} obsoleted, replaced by {r}"),
                None => format!("{id} obsoleted"),
            };
            (
                Plan::Update(
                    id,
                    Box::new(move |n| {
                        n.deprecated = true;
                        if replacement.is_some() {
                            n.replaced_by = replacement;
                        }
                    }),
                ),
                msg,
            )
        }
        ChangeKind::NodeDeletion { about_node } => {
            let id = ctx.node(about_node)?;
            let msg = format!("{id} deleted");
            (Plan::Remove(id), msg)
        }
        ChangeKind::ClassCreation {
            about_node,
            new_value,
        } => {
            let id = match about_node {
                Some(r @ NodeRef::Curie(c)) => {
                    if graph.contains_node(c) {
                        return Err(ApplyError::AlreadyExists(format!("node {c}")));
                    }
                    let id = NodeId::new(c.as_str()).map_err(|m| ApplyError::Invalid(vec![m]))?;
                    ctx.note(r, c);
                    id
                }
                Some(NodeRef::Label(_)) => {
                    return Err(ApplyError::Invalid(vec!["class id must be a CURIE".into()]))
                }
                None => mint_id(graph, ctx.opts)?,
            };
            let mut node = Node::new(id.clone());
            node.label = new_value.clone();
            (Plan::Insert(node), format!("created {id}"))
        }
        ChangeKind::SynonymReplacement {
            about_node,
            old_value,
            new_value,
        } => {
            let id = ctx.node(about_node)?;
            let node = node_of(&id);
            let matches: Vec<usize> = node
                .synonyms
                .iter()
                .enumerate()
                .filter(|(_, s)| &s.value == old_value)
                .map(|(i, _)| i)
                .collect();
            let position = match matches.as_slice() {
                [one] => *one,
                [] => return Err(ApplyError::MissingTarget(format!("synonym '{old_value}' on {id}"))),
                many => {
                    return Err(ApplyError::AmbiguousSynonym {
                        node: id.to_string(),
                        value: old_value.clone(),
                        count: many.len(),
                    })
                }
            };
            let scope = node.synonyms[position].scope;
            if node.has_synonym(new_value, scope) {
                return Err(ApplyError::AlreadyExists(format!(
                    "{scope} synonym '{new_value}' on {id}"
                )));
            }
            let new = new_value.clone();
            let msg = format!("{id}: synonym '{old_value}' replaced by '{new}' ({scope})");
            (
                Plan::Update(id, Box::new(move |n| n.synonyms[position].value = new)),
                msg,
            )
        }
        ChangeKind::NewTextDefinition {
            about_node,
            new_value,
        } => {
            let id = ctx.node(about_node)?;
            if node_of(&id).definition.is_some() {
                return Err(ApplyError::AlreadyExists(format!("definition of {id}")));
            }
            let new = new_value.clone();
            let msg = format!("{id}: definition added");
            (Plan::Update(id, Box::new(move |n| n.definition = Some(new))), msg)
        }
        ChangeKind::RemoveTextDefinition { about_node } => {
            let id = ctx.node(about_node)?;
            if node_of(&id).definition.is_none() {
                return Err(ApplyError::MissingTarget(format!("definition of {id}")));
            }
            let msg = format!("{id}: definition removed");
            (Plan::Update(id, Box::new(|n| n.definition = None)), msg)
        }
        ChangeKind::NodeTextDefinitionChange {
            about_node,
            old_value,
            new_value,
        } => {
            let id = ctx.node(about_node)?;
            let current = &node_of(&id).definition;
            if current.is_none() {
                return Err(ApplyError::MissingTarget(format!("definition of {id}")));
            }
            if let Some(old) = old_value {
                if current.as_ref() != Some(old) {
                    return Err(ApplyError::Mismatch {
                        field: "definition",
                        expected: old.clone(),
                        found: current.clone(),
                    });
                }
            }
            let new = new_value.clone();
            let msg = format!("{id}: definition changed");
            (Plan::Update(id, Box::new(move |n| n.definition = Some(new))), msg)
        }
        ChangeKind::NewSynonym {
            about_node,
            new_value,
            scope,
        } => {
            let id = ctx.node(about_node)?;
            let effective = scope.unwrap_or(DEFAULT_SYNONYM_SCOPE);
            if node_of(&id).has_synonym(new_value, effective) {
                return Err(ApplyError::AlreadyExists(format!(
                    "{effective} synonym '{new_value}' on {id}"
                )));
            }
            let mut msg = format!("{id}: {effective} synonym '{new_value}' added");
            if scope.is_none() {
                msg.push_str(&format!(" (scope defaulted to {DEFAULT_SYNONYM_SCOPE})"));
            }
            let synonym = Synonym::new(new_value.clone(), effective);
            (Plan::Update(id, Box::new(move |n| n.synonyms.push(synonym))), msg)
        }
        ChangeKind::RemoveSynonym {
            about_node,
            old_value,
        } => {
            let id = ctx.node(about_node)?;
            if !node_of(&id).synonyms.iter().any(|s| &s.value == old_value) {
                return Err(ApplyError::MissingTarget(format!("synonym '{old_value}' on {id}")));
            }
            let old = old_value.clone();
            let msg = format!("{id}: synonym '{old}' removed");
            (
                Plan::Update(id, Box::new(move |n| n.synonyms.retain(|s| s.value != old))),
                msg,
            )
        }
        ChangeKind::EdgeCreation {
            subject,
            predicate,
            object,
        } => {
            let s = ctx.endpoint(subject)?;
            let p = ctx.predicate(predicate)?;
            let o = ctx.endpoint(object)?;
            let e = edge(&s, &p, &o);
            if graph.contains_edge(&e) {
                return Err(ApplyError::AlreadyExists(format!("edge {e}")));
            }
            let msg = format!("edge {e} created");
            (Plan::Edges { remove: None, add: Some(e) }, msg)
        }
        ChangeKind::EdgeDeletion {
            subject,
            predicate,
            object,
        } => {
            let s = ctx.endpoint(subject)?;
            let p = ctx.predicate(predicate)?;
            let o = ctx.endpoint(object)?;
            let e = edge(&s, &p, &o);
            if !graph.contains_edge(&e) {
                return Err(ApplyError::MissingTarget(format!("edge {e}")));
            }
            let msg = format!("edge {e} deleted");
            (Plan::Edges { remove: Some(e), add: None }, msg)
        }
        ChangeKind::NodeMove {
            about_node,
            old_value,
            new_value,
            predicate,
        } => {
            let child = ctx.endpoint(about_node)?;
            let old_parent = ctx.endpoint(old_value)?;
            let new_parent = ctx.endpoint(new_value)?;
            let p = match predicate {
                Some(p) => {
                    let p = ctx.predicate(p)?;
                    if !graph.contains_edge(&edge(&child, &p, &old_parent)) {
                        return Err(ApplyError::MissingTarget(format!(
                            "edge {}",
                            edge(&child, &p, &old_parent)
                        )));
                    }
                    p
                }
                None => {
                    let candidates: Vec<&Edge> = graph
                        .edges_from(child.as_str())
                        .filter(|e| e.object == old_parent)
                        .collect();
                    match candidates.as_slice() {
                        [one] => one.predicate.clone(),
                        other => {
                            return Err(ApplyError::AmbiguousEdge {
                                subject: child.to_string(),
                                object: old_parent.to_string(),
                                count: other.len(),
                            })
                        }
                    }
                }
            };
            let added = edge(&child, &p, &new_parent);
            if graph.contains_edge(&added) {
                return Err(ApplyError::AlreadyExists(format!("edge {added}")));
            }
            let msg = format!("{child} moved from {old_parent} to {new_parent} ({p})");
            (
                Plan::Edges {
                    remove: Some(edge(&child, &p, &old_parent)),
                    add: Some(added),
                },
                msg,
            )
        }
        ChangeKind::PredicateChange {
            subject,
            object,
            old_value,
            new_value,
        } => {
            let s = ctx.endpoint(subject)?;
            let o = ctx.endpoint(object)?;
            let old = ctx.predicate(old_value)?;
            let new = ctx.predicate(new_value)?;
            let removed = edge(&s, &old, &o);
            let added = edge(&s, &new, &o);
            if !graph.contains_edge(&removed) {
                return Err(ApplyError::MissingTarget(format!("edge {removed}")));
            }
            if graph.contains_edge(&added) {
                return Err(ApplyError::AlreadyExists(format!("edge {added}")));
            }
            let msg = format!("edge {removed} now {added}");
            (
                Plan::Edges {
                    remove: Some(removed),
                    add: Some(added),
                },
                msg,
            )
        }
    })
}

fn execute(graph: &mut Graph, plan: Plan) {
    match plan {
        Plan::Update(id, f) => {
            graph.update_node(id.as_str(), f).expect("planned node exists");
        }
        Plan::Remove(id) => {
            graph.remove_node(id.as_str()).expect("planned node exists");
        }
        Plan::Insert(node) => graph.insert_node(node).expect("planned id is free"),
        Plan::Edges { remove, add } => {
            if let Some(e) = remove {
                graph.remove_edge(&e);
            }
            if let Some(e) = add {
                graph.add_edge(e).expect("planned edge is new");
            }
        }
    }
}

fn store_provisional(ctx: &mut Context, change: &Change) -> Result<(Plan, String), ApplyError> {
    let focus = match (&change.kind, change.kind.focus()) {
        (ChangeKind::ClassCreation { .. }, _) | (_, None) => {
            return Err(ApplyError::NoProvisionalTarget(
                "a class creation has no existing node to hold a pending change".into(),
            ))
        }
        (_, Some(focus)) => focus,
    };
    let id = ctx.node(focus)?;
    let payload = change_to_json(change);
    let msg = format!("stored as pending on {id}");
    Ok((Plan::Update(id, Box::new(move |n| n.pending.push(payload))), msg))
}

/// Applies (or, in provisional mode, stores) one change. The graph is only
/// modified when the returned entry is not `Failed`.
pub fn apply_change(graph: &mut Graph, change: &Change, opts: &ApplyOptions) -> ApplyEntry {
    let command = render_command(change).unwrap_or_else(|_| change.type_name().to_string());
    let mut entry = ApplyEntry {
        index: 0,
        change_type: change.type_name(),
        command,
        status: ApplyStatus::Failed,
        message: String::new(),
        resolved: Vec::new(),
        error_code: None,
        error: None,
    };
    let violations = validate(change);
    let outcome = if violations.is_empty() {
        let mut ctx = Context {
            graph,
            opts,
            resolved: Vec::new(),
        };
        let planned = if opts.provisional {
            store_provisional(&mut ctx, change)
        } else {
            plan(&mut ctx, &change.kind)
        };
        entry.resolved = ctx.resolved;
        planned
    } else {
        Err(ApplyError::Invalid(violations))
    };
    match outcome {
        Ok((p, message)) => {
            execute(graph, p);
            entry.status = if opts.provisional {
                ApplyStatus::StoredProvisional
            } else {
                ApplyStatus::Applied
            };
            entry.message = message;
        }
        Err(e) => {
            entry.message = e.to_string();
            entry.error_code = Some(e.code());
            entry.error = Some(e);
        }
    }
    entry
}

/// Applies changes in order. Under [`OnError::Halt`] the run stops at the
/// first failure; earlier changes stay applied.
pub fn apply_changeset(graph: &mut Graph, changes: &ChangeSet, opts: &ApplyOptions) -> ApplyReport {
    let mut report = ApplyReport::default();
    for (index, change) in changes.iter().enumerate() {
        let mut entry = apply_change(graph, change, opts);
        entry.index = index;
        let failed = entry.status == ApplyStatus::Failed;
        report.entries.push(entry);
        if failed && opts.on_error == OnError::Halt {
            report.halted_at = Some(index);
            break;
        }
    }
    report
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PendingSelector {
    #[default]
    All,
}

/// Applies every pending change in (node id, list position) order.
/// Successful ones are dropped from the pending lists; failed ones stay
/// where they were and are reported.
pub fn apply_pending(graph: &mut Graph, selector: PendingSelector) -> ApplyReport {
    let PendingSelector::All = selector;
    let holders: Vec<NodeId> = graph
        .nodes()
        .filter(|n| !n.pending.is_empty())
        .map(|n| n.id.clone())
        .collect();
    let mut queue = Vec::new();
    for id in holders {
        let payloads = graph
            .update_node(id.as_str(), |n| std::mem::take(&mut n.pending))
            .unwrap_or_default();
        queue.extend(payloads.into_iter().map(|p| (id.clone(), p)));
    }

    let opts = ApplyOptions {
        on_error: OnError::SkipAndReport,
        ..ApplyOptions::default()
    };
    let mut report = ApplyReport::default();
    let mut kept: Vec<(NodeId, String)> = Vec::new();
    for (index, (holder, payload)) in queue.into_iter().enumerate() {
        let mut entry = match change_from_json(&payload) {
            Ok(change) => apply_change(graph, &change, &opts),
            Err(e) => {
                let e = ApplyError::BadPayload(e.to_string());
                ApplyEntry {
                    index,
                    change_type: "?",
                    command: payload.clone(),
                    status: ApplyStatus::Failed,
                    message: e.to_string(),
                    resolved: Vec::new(),
                    error_code: Some(e.code()),
                    error: Some(e),
                }
            }
        };
        entry.index = index;
        if entry.status == ApplyStatus::Failed {
            entry.message = format!("pending on {holder}: {}", entry.message);
            kept.push((holder, payload));
        }
        report.entries.push(entry);
    }
    for (holder, payload) in kept {
        graph.update_node(holder.as_str(), |n| n.pending.push(payload));
    }
    report
}

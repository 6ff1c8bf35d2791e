//! Change taxonomy and data model.
//!
//! Every change is a [`Change`]: an optional [`ChangeId`] plus a
//! [`ChangeKind`] carrying the type-specific fields. Kinds are grouped into
//! node changes and edge changes by [`ChangeKind::group`].

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

/// Returns true when `s` has the shape `prefix:local`.
///
/// The prefix is `[A-Za-z_][A-Za-z0-9_.-]*` and the local part is
/// `[A-Za-z0-9_.-]+`.
pub fn is_curie(s: &str) -> bool {
    let Some((prefix, local)) = s.split_once(':') else {
        return false;
    };
    let mut chars = prefix.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    let local_char = |c: char| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-');
    head_ok && chars.all(local_char) && !local.is_empty() && local.chars().all(local_char)
}

/// Returns true when `s` is a bare relation word such as `part_of`.
pub fn is_bare_word(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChangeId(String);

impl ChangeId {
    pub fn new(value: impl Into<String>) -> Result<Self, String> {
        let value = value.into();
        if value.is_empty() {
            return Err("change id must not be empty".to_string());
        }
        Ok(ChangeId(value))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ChangeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A node designator: either a CURIE or a label that must be resolved
/// against a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeRef {
    Curie(String),
    Label(String),
}

impl NodeRef {
    pub fn curie(value: impl Into<String>) -> Self {
        NodeRef::Curie(value.into())
    }

    pub fn label(value: impl Into<String>) -> Self {
        NodeRef::Label(value.into())
    }

    pub fn value(&self) -> &str {
        match self {
            NodeRef::Curie(v) | NodeRef::Label(v) => v,
        }
    }

    pub fn is_curie(&self) -> bool {
        matches!(self, NodeRef::Curie(_))
    }

    fn violations(&self, field: &str, out: &mut Vec<String>) {
        match self {
            NodeRef::Curie(v) if !is_curie(v) => {
                out.push(format!("{field}: '{v}' is not a well-formed CURIE"))
            }
            NodeRef::Label(v) if v.is_empty() => out.push(format!("{field}: empty label")),
            _ => {}
        }
    }
}

impl fmt::Display for NodeRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeRef::Curie(v) => f.write_str(v),
            NodeRef::Label(v) => write!(f, "'{v}'"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SynonymScope {
    Exact,
    Narrow,
    Broad,
    Related,
}

impl SynonymScope {
    pub const ALL: [SynonymScope; 4] = [
        SynonymScope::Exact,
        SynonymScope::Narrow,
        SynonymScope::Broad,
        SynonymScope::Related,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            SynonymScope::Exact => "exact",
            SynonymScope::Narrow => "narrow",
            SynonymScope::Broad => "broad",
            SynonymScope::Related => "related",
        }
    }
}

impl fmt::Display for SynonymScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SynonymScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(SynonymScope::Exact),
            "narrow" => Ok(SynonymScope::Narrow),
            "broad" => Ok(SynonymScope::Broad),
            "related" => Ok(SynonymScope::Related),
            other => Err(format!("unknown synonym scope '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChangeGroup {
    NodeChange,
    EdgeChange,
}

/// The fourteen concrete change types.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ChangeKind {
    NodeRename {
        about_node: NodeRef,
        old_value: Option<String>,
        new_value: String,
    },
    NodeObsoletion {
        about_node: NodeRef,
        replacement: Option<NodeRef>,
    },
    NodeDeletion {
        about_node: NodeRef,
    },
    /// `about_node` is the explicit id of the new class; `new_value` its label.
    /// At least one of the two must be present.
    ClassCreation {
        about_node: Option<NodeRef>,
        new_value: Option<String>,
    },
    SynonymReplacement {
        about_node: NodeRef,
        old_value: String,
        new_value: String,
    },
    NewTextDefinition {
        about_node: NodeRef,
        new_value: String,
    },
    RemoveTextDefinition {
        about_node: NodeRef,
    },
    NodeTextDefinitionChange {
        about_node: NodeRef,
        old_value: Option<String>,
        new_value: String,
    },
    NewSynonym {
        about_node: NodeRef,
        new_value: String,
        scope: Option<SynonymScope>,
    },
    RemoveSynonym {
        about_node: NodeRef,
        old_value: String,
    },
    EdgeCreation {
        subject: NodeRef,
        predicate: NodeRef,
        object: NodeRef,
    },
    EdgeDeletion {
        subject: NodeRef,
        predicate: NodeRef,
        object: NodeRef,
    },
    /// Re-parents `about_node` from `old_value` to `new_value`.
    NodeMove {
        about_node: NodeRef,
        old_value: NodeRef,
        new_value: NodeRef,
        predicate: Option<NodeRef>,
    },
    PredicateChange {
        subject: NodeRef,
        object: NodeRef,
        old_value: NodeRef,
        new_value: NodeRef,
    },
}

impl ChangeKind {
    pub const TYPE_NAMES: [&'static str; 14] = [
        "NodeRename",
        "NodeObsoletion",
        "NodeDeletion",
        "ClassCreation",
        "SynonymReplacement",
        "NewTextDefinition",
        "RemoveTextDefinition",
        "NodeTextDefinitionChange",
        "NewSynonym",
        "RemoveSynonym",
        "EdgeCreation",
        "EdgeDeletion",
        "NodeMove",
        "PredicateChange",
    ];

    pub fn type_name(&self) -> &'static str {
        match self {
            ChangeKind::NodeRename { .. } => "NodeRename",
            ChangeKind::NodeObsoletion { .. } => "NodeObsoletion",
            ChangeKind::NodeDeletion { .. } => "NodeDeletion",
            ChangeKind::ClassCreation { .. } => "ClassCreation",
            ChangeKind::SynonymReplacement { .. } => "SynonymReplacement",
            ChangeKind::NewTextDefinition { .. } => "NewTextDefinition",
            ChangeKind::RemoveTextDefinition { .. } => "RemoveTextDefinition",
            ChangeKind::NodeTextDefinitionChange { .. } => "NodeTextDefinitionChange",
            ChangeKind::NewSynonym { .. } => "NewSynonym",
            ChangeKind::RemoveSynonym { .. } => "RemoveSynonym",
            ChangeKind::EdgeCreation { .. } => "EdgeCreation",
            ChangeKind::EdgeDeletion { .. } => "EdgeDeletion",
            ChangeKind::NodeMove { .. } => "NodeMove",
            ChangeKind::PredicateChange { .. } => "PredicateChange",
        }
    }

    pub fn group(&self) -> ChangeGroup {
        match self {
            ChangeKind::EdgeCreation { .. }
            | ChangeKind::EdgeDeletion { .. }
            | ChangeKind::NodeMove { .. }
            | ChangeKind::PredicateChange { .. } => ChangeGroup::EdgeChange,
            _ => ChangeGroup::NodeChange,
        }
    }

    /// The node a change is primarily about: `about_node` for node changes and
    /// moves, `subject` for the other edge changes.
    pub fn focus(&self) -> Option<&NodeRef> {
        match self {
            ChangeKind::NodeRename { about_node, .. }
            | ChangeKind::NodeObsoletion { about_node, .. }
            | ChangeKind::NodeDeletion { about_node }
            | ChangeKind::SynonymReplacement { about_node, .. }
            | ChangeKind::NewTextDefinition { about_node, .. }
            | ChangeKind::RemoveTextDefinition { about_node }
            | ChangeKind::NodeTextDefinitionChange { about_node, .. }
            | ChangeKind::NewSynonym { about_node, .. }
            | ChangeKind::RemoveSynonym { about_node, .. }
            | ChangeKind::NodeMove { about_node, .. } => Some(about_node),
            ChangeKind::ClassCreation { about_node, .. } => about_node.as_ref(),
            ChangeKind::EdgeCreation { subject, .. }
            | ChangeKind::EdgeDeletion { subject, .. }
            | ChangeKind::PredicateChange { subject, .. } => Some(subject),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Change {
    pub id: Option<ChangeId>,
    pub kind: ChangeKind,
}

impl Change {
    pub fn new(kind: ChangeKind) -> Self {
        Change { id: None, kind }
    }

    pub fn with_id(mut self, id: ChangeId) -> Self {
        self.id = Some(id);
        self
    }

    pub fn type_name(&self) -> &'static str {
        self.kind.type_name()
    }

    /// Equality ignoring the change id.
    pub fn same_kind(&self, other: &Change) -> bool {
        self.kind == other.kind
    }
}

impl From<ChangeKind> for Change {
    fn from(kind: ChangeKind) -> Self {
        Change::new(kind)
    }
}

/// Broad category of a change. Total over all variants.
pub fn classify(change: &Change) -> ChangeGroup {
    change.kind.group()
}

/// Checks the per-variant invariants; an empty result means the change is
/// well formed.
pub fn validate(change: &Change) -> Vec<String> {
    let mut out = Vec::new();
    if let Some(id) = &change.id {
        if id.as_str().is_empty() {
            out.push("id: empty".to_string());
        }
    }
    let text = |field: &str, v: &str, out: &mut Vec<String>| {
        if v.is_empty() {
            out.push(format!("{field}: empty string"));
        }
    };
    match &change.kind {
        ChangeKind::NodeRename {
            about_node,
            old_value,
            new_value,
        }
        | ChangeKind::NodeTextDefinitionChange {
            about_node,
            old_value,
            new_value,
        } => {
            about_node.violations("about_node", &mut out);
            if let Some(old) = old_value {
                text("old_value", old, &mut out);
            }
            text("new_value", new_value, &mut out);
        }
        ChangeKind::NodeObsoletion {
            about_node,
            replacement,
        } => {
            about_node.violations("about_node", &mut out);
            if let Some(r) = replacement {
                r.violations("replacement", &mut out);
            }
        }
        ChangeKind::NodeDeletion { about_node } | ChangeKind::RemoveTextDefinition { about_node } => {
            about_node.violations("about_node", &mut out)
        }
        ChangeKind::ClassCreation {
            about_node,
            new_value,
        } => {
            match about_node {
                Some(NodeRef::Label(_)) => {
                    out.push("about_node: a created class needs a CURIE, not a label".to_string())
                }
                Some(r) => r.violations("about_node", &mut out),
                None => {}
            }
            match new_value {
                Some(v) => text("new_value", v, &mut out),
                None if about_node.is_none() => {
                    out.push("class creation needs an id or a label".to_string())
                }
                None => {}
            }
        }
        ChangeKind::SynonymReplacement {
            about_node,
            old_value,
            new_value,
        } => {
            about_node.violations("about_node", &mut out);
            text("old_value", old_value, &mut out);
            text("new_value", new_value, &mut out);
            if old_value == new_value {
                out.push("old_value and new_value must differ".to_string());
            }
        }
        ChangeKind::NewTextDefinition {
            about_node,
            new_value,
        }
        | ChangeKind::NewSynonym {
            about_node,
            new_value,
            ..
        } => {
            about_node.violations("about_node", &mut out);
            text("new_value", new_value, &mut out);
        }
        ChangeKind::RemoveSynonym {
            about_node,
            old_value,
        } => {
            about_node.violations("about_node", &mut out);
            text("old_value", old_value, &mut out);
        }
        ChangeKind::EdgeCreation {
            subject,
            predicate,
            object,
        }
        | ChangeKind::EdgeDeletion {
            subject,
            predicate,
            object,
        } => {
            subject.violations("subject", &mut out);
            predicate.violations("predicate", &mut out);
            object.violations("object", &mut out);
        }
        ChangeKind::NodeMove {
            about_node,
            old_value,
            new_value,
            predicate,
        } => {
            about_node.violations("about_node", &mut out);
            old_value.violations("old_value", &mut out);
            new_value.violations("new_value", &mut out);
            if let Some(p) = predicate {
                p.violations("predicate", &mut out);
            }
            if old_value == new_value {
                out.push("old_value and new_value must differ".to_string());
            }
        }
        ChangeKind::PredicateChange {
            subject,
            object,
            old_value,
            new_value,
        } => {
            subject.violations("subject", &mut out);
            object.violations("object", &mut out);
            old_value.violations("old_value", &mut out);
            new_value.violations("new_value", &mut out);
            if old_value == new_value {
                out.push("old_value and new_value must differ".to_string());
            }
        }
    }
    out
}

/// An ordered list of changes. Order is significant: changes are applied
/// sequentially.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    pub changes: Vec<Change>,
}

impl ChangeSet {
    pub fn new(changes: Vec<Change>) -> Self {
        ChangeSet { changes }
    }

    pub fn len(&self) -> usize {
        self.changes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.changes.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Change> {
        self.changes.iter()
    }

    /// Ids that occur more than once.
    pub fn duplicate_ids(&self) -> Vec<&ChangeId> {
        let mut seen = HashSet::new();
        let mut dups = Vec::new();
        for id in self.changes.iter().filter_map(|c| c.id.as_ref()) {
            if !seen.insert(id) && !dups.contains(&id) {
                dups.push(id);
            }
        }
        dups
    }

    /// Equality ignoring change ids.
    pub fn same_kinds(&self, other: &ChangeSet) -> bool {
        self.len() == other.len()
            && self
                .changes
                .iter()
                .zip(&other.changes)
                .all(|(a, b)| a.same_kind(b))
    }
}

impl From<Vec<Change>> for ChangeSet {
    fn from(changes: Vec<Change>) -> Self {
        ChangeSet { changes }
    }
}

impl IntoIterator for ChangeSet {
    type Item = Change;
    type IntoIter = std::vec::IntoIter<Change>;

    fn into_iter(self) -> Self::IntoIter {
        self.changes.into_iter()
    }
}

impl<'a> IntoIterator for &'a ChangeSet {
    type Item = &'a Change;
    type IntoIter = std::slice::Iter<'a, Change>;

    fn into_iter(self) -> Self::IntoIter {
        self.changes.iter()
    }
}

impl FromIterator<Change> for ChangeSet {
    fn from_iter<I: IntoIterator<Item = Change>>(iter: I) -> Self {
        ChangeSet {
            changes: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rename() -> Change {
        ChangeKind::NodeRename {
            about_node: NodeRef::curie("ENVO:01000575"),
            old_value: Some("wax".into()),
            new_value: "oil".into(),
        }
        .into()
    }

    #[test]
    fn curie_shape() {
        assert!(is_curie("UBERON:0002398"));
        assert!(is_curie("EX:1234"));
        assert!(is_curie("_x.y-z:a.b_c-1"));
        assert!(!is_curie("no-colon"));
        assert!(!is_curie("1EX:1"));
        assert!(!is_curie("EX:"));
        assert!(!is_curie(":1"));
        assert!(!is_curie("http://purl.obolibrary.org/obo/X_1"));
        assert!(!is_curie("EX:a b"));
    }

    #[test]
    fn classify_matches_table_grouping() {
        assert_eq!(classify(&rename()), ChangeGroup::NodeChange);
        let edge = Change::new(ChangeKind::EdgeCreation {
            subject: NodeRef::label("hepatocyte"),
            predicate: NodeRef::label("part_of"),
            object: NodeRef::label("liver"),
        });
        assert_eq!(classify(&edge), ChangeGroup::EdgeChange);
        let mv = Change::new(ChangeKind::NodeMove {
            about_node: NodeRef::curie("E:5"),
            old_value: NodeRef::curie("C:3"),
            new_value: NodeRef::curie("B:2"),
            predicate: None,
        });
        assert_eq!(classify(&mv), ChangeGroup::EdgeChange);
        let def = Change::new(ChangeKind::RemoveTextDefinition {
            about_node: NodeRef::label("liver"),
        });
        assert_eq!(classify(&def), ChangeGroup::NodeChange);
    }

    #[test]
    fn validate_accepts_well_formed_rename() {
        assert!(validate(&rename()).is_empty());
    }

    #[test]
    fn validate_rejects_identical_predicates() {
        let c = Change::new(ChangeKind::PredicateChange {
            subject: NodeRef::label("stomach"),
            object: NodeRef::label("digestive system"),
            old_value: NodeRef::label("is_a"),
            new_value: NodeRef::label("is_a"),
        });
        assert_eq!(validate(&c).len(), 1);
    }

    #[test]
    fn validate_rejects_bad_curie() {
        let c = Change::new(ChangeKind::NodeDeletion {
            about_node: NodeRef::curie("no-colon"),
        });
        assert_eq!(validate(&c).len(), 1);
    }

    #[test]
    fn validate_class_creation_needs_id_or_label() {
        let c = Change::new(ChangeKind::ClassCreation {
            about_node: None,
            new_value: None,
        });
        assert_eq!(validate(&c).len(), 1);
        let c = Change::new(ChangeKind::ClassCreation {
            about_node: Some(NodeRef::curie("X:1")),
            new_value: None,
        });
        assert!(validate(&c).is_empty());
    }

    #[test]
    fn duplicate_ids_are_reported() {
        let id = ChangeId::new("c1").unwrap();
        let cs = ChangeSet::new(vec![
            rename().with_id(id.clone()),
            rename().with_id(id.clone()),
            rename(),
        ]);
        assert_eq!(cs.duplicate_ids(), vec![&id]);
        assert!(ChangeId::new("").is_err());
    }
}

use std::fmt::Write;

use thiserror::Error;

use crate::model::{is_bare_word, Change, ChangeKind, ChangeSet, NodeRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot render {change_type}: {reason}")]
pub struct UnrenderableChange {
    pub change_type: &'static str,
    pub reason: String,
}

fn quote(out: &mut String, value: &str) {
    out.push('\'');
    for c in value.chars() {
        if matches!(c, '\'' | '\\') {
            out.push('\\');
        }
        out.push(c);
    }
    out.push('\'');
}

fn reference(out: &mut String, r: &NodeRef) {
    match r {
        NodeRef::Curie(c) => out.push_str(c),
        NodeRef::Label(l) => quote(out, l),
    }
}

/// Pieces of a command: keywords, references and quoted strings.
enum Part<'a> {
    Kw(&'a str),
    Ref(&'a NodeRef),
    /// Relation slot of edge commands: bare relation names stay bare.
    Pred(&'a NodeRef),
    Text(&'a str),
}

use Part::{Kw, Pred, Ref, Text};

/// Renders a change as its canonical command. Values containing line breaks
/// have no single-line form and are rejected.
pub fn render_command(change: &Change) -> Result<String, UnrenderableChange> {
    let fail = |reason: &str| UnrenderableChange {
        change_type: change.type_name(),
        reason: reason.to_string(),
    };
    let parts: Vec<Part> = match &change.kind {
        ChangeKind::NodeRename {
            about_node,
            old_value: Some(old),
            new_value,
        } => vec![Kw("rename"), Ref(about_node), Kw("from"), Text(old), Kw("to"), Text(new_value)],
        ChangeKind::NodeRename {
            about_node,
            old_value: None,
            new_value,
        } => vec![Kw("rename"), Ref(about_node), Kw("to"), Text(new_value)],
        ChangeKind::NodeObsoletion {
            about_node,
            replacement,
        } => {
            let mut p = vec![Kw("obsolete"), Ref(about_node)];
            if let Some(r) = replacement {
                p.extend([Kw("with replacement"), Ref(r)]);
            }
            p
        }
        ChangeKind::NodeDeletion { about_node } => vec![Kw("delete node"), Ref(about_node)],
        ChangeKind::ClassCreation {
            about_node,
            new_value,
        } => match (about_node, new_value) {
            (Some(NodeRef::Label(_)), _) => return Err(fail("class id must be a CURIE")),
            (Some(id), Some(label)) => vec![Kw("create node"), Ref(id), Text(label)],
            (Some(id), None) => vec![Kw("create node"), Ref(id)],
            (None, Some(label)) => vec![Kw("create"), Text(label)],
            (None, None) => return Err(fail("neither an id nor a label is present")),
        },
        ChangeKind::SynonymReplacement {
            about_node,
            old_value,
            new_value,
        } => vec![
            Kw("replace synonym"),
            Text(old_value),
            Kw("with"),
            Text(new_value),
            Kw("for"),
            Ref(about_node),
        ],
        ChangeKind::NewTextDefinition {
            about_node,
            new_value,
        } => vec![Kw("add definition"), Text(new_value), Kw("to"), Ref(about_node)],
        ChangeKind::RemoveTextDefinition { about_node } => {
            vec![Kw("remove definition for"), Ref(about_node)]
        }
        ChangeKind::NodeTextDefinitionChange {
            about_node,
            old_value,
            new_value,
        } => {
            let mut p = vec![Kw("change definition of"), Ref(about_node)];
            if let Some(old) = old_value {
                p.extend([Kw("from"), Text(old)]);
            }
            p.extend([Kw("to"), Text(new_value)]);
            p
        }
        ChangeKind::NewSynonym {
            about_node,
            new_value,
            scope,
        } => {
            let mut p = vec![Kw("create")];
            if let Some(scope) = scope {
                p.push(Kw(scope.as_str()));
            }
            p.extend([Kw("synonym"), Text(new_value), Kw("for"), Ref(about_node)]);
            p
        }
        ChangeKind::RemoveSynonym {
            about_node,
            old_value,
        } => vec![Kw("remove synonym"), Text(old_value), Kw("for"), Ref(about_node)],
        ChangeKind::EdgeCreation {
            subject,
            predicate,
            object,
        } => vec![Kw("create edge"), Ref(subject), Pred(predicate), Ref(object)],
        ChangeKind::EdgeDeletion {
            subject,
            predicate,
            object,
        } => vec![Kw("delete edge"), Ref(subject), Pred(predicate), Ref(object)],
        ChangeKind::NodeMove {
            about_node,
            old_value,
            new_value,
            predicate,
        } => {
            let mut p = vec![
                Kw("move"),
                Ref(about_node),
                Kw("from"),
                Ref(old_value),
                Kw("to"),
                Ref(new_value),
            ];
            if let Some(pred) = predicate {
                p.extend([Kw("with predicate"), Pred(pred)]);
            }
            p
        }
        ChangeKind::PredicateChange {
            subject,
            object,
            old_value,
            new_value,
        } => vec![
            Kw("change relationship between"),
            Ref(subject),
            Kw("and"),
            Ref(object),
            Kw("from"),
            Ref(old_value),
            Kw("to"),
            Ref(new_value),
        ],
    };

    let mut out = String::new();
    for (i, part) in parts.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let text = match part {
            Kw(k) => {
                out.push_str(k);
                continue;
            }
            Ref(r) | Pred(r) => r.value(),
            Text(t) => t,
        };
        if text.contains(['\n', '\r']) {
            return Err(fail("value contains a line break"));
        }
        match part {
            Pred(NodeRef::Label(l)) if is_bare_word(l) => out.push_str(l),
            Ref(r) | Pred(r) => reference(&mut out, r),
            _ => quote(&mut out, text),
        }
    }
    Ok(out)
}

/// One canonical command per line, each terminated by a newline.
pub fn render_document(changes: &ChangeSet) -> Result<String, UnrenderableChange> {
    let mut out = String::new();
    for change in changes {
        let line = render_command(change)?;
        let _ = writeln!(out, "{line}");
    }
    Ok(out)
}

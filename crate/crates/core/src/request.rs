//! Change requests embedded in issue text, and human readable proposal
//! titles for them.
//!
//! A request block starts at the trigger line `Hey ontobot! apply:` (any
//! markdown heading level) and is followed by a bulleted list of CNL
//! commands. Only the first block in a document is read.

use crate::cnl::{parse_command, render_command, ParseError, UnrenderableChange};
use crate::graph::Graph;
use crate::model::{Change, ChangeKind, ChangeSet, NodeRef};

pub const TRIGGER: &str = "Hey ontobot! apply:";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExtractionResult {
    pub changes: ChangeSet,
    /// 1-based line number and command text (bullet removed).
    pub command_lines: Vec<(usize, String)>,
    /// Spans refer to positions in the original text.
    pub errors: Vec<(usize, ParseError)>,
    pub trigger_found: bool,
}

fn is_trigger(line: &str) -> bool {
    line.trim().trim_start_matches('#').trim() == TRIGGER
}

/// Splits `- cmd` / `* cmd` into the prefix length in characters and the
/// command.
fn bullet(line: &str) -> Option<(usize, &str)> {
    let body = line.trim_start();
    let command = body.strip_prefix("- ").or_else(|| body.strip_prefix("* "))?;
    let prefix = line.len() - command.len();
    Some((line[..prefix].chars().count(), command))
}

pub fn extract(text: &str) -> ExtractionResult {
    let mut result = ExtractionResult::default();
    let mut lines = text.lines().enumerate();
    if !lines.by_ref().any(|(_, l)| is_trigger(l)) {
        return result;
    }
    result.trigger_found = true;
    let mut changes = Vec::new();
    for (index, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let Some((offset, command)) = bullet(line) else {
            break;
        };
        let number = index + 1;
        result.command_lines.push((number, command.to_string()));
        match parse_command(command) {
            Ok(change) => changes.push(change),
            Err(mut e) => {
                e.span.line = number;
                e.span.column += offset;
                result.errors.push((number, e));
            }
        }
    }
    result.changes = ChangeSet::new(changes);
    result
}

fn concept(reference: &NodeRef, resolver: Option<&Graph>) -> String {
    match reference {
        NodeRef::Curie(c) => resolver
            .and_then(|g| g.node(c))
            .and_then(|n| n.label.clone())
            .unwrap_or_else(|| c.clone()),
        NodeRef::Label(l) => l.clone(),
    }
}

/// A one-line title in the style of the BioPortal issue templates. Synonym
/// creation and removal, obsoletion and renaming have their own templates;
/// everything else is `Proposal: <command>`.
pub fn render_title(change: &Change, resolver: Option<&Graph>) -> String {
    let c = |r: &NodeRef| concept(r, resolver);
    match &change.kind {
        ChangeKind::NewSynonym {
            about_node,
            new_value,
            ..
        } => format!("Proposal: add synonym '{new_value}' for {}", c(about_node)),
        ChangeKind::RemoveSynonym {
            about_node,
            old_value,
        } => format!("Proposal: remove synonym '{old_value}' for {}", c(about_node)),
        ChangeKind::NodeObsoletion {
            about_node,
            replacement,
        } => match replacement {
            Some(r) => format!("Proposal: obsolete {} with replacement {}", c(about_node), c(r)),
            None => format!("Proposal: obsolete {}", c(about_node)),
        },
        ChangeKind::NodeRename {
            about_node,
            old_value,
            new_value,
        } => match old_value {
            Some(old) => format!("Proposal: rename {} from '{old}' to '{new_value}'", c(about_node)),
            None => format!("Proposal: rename {} to '{new_value}'", c(about_node)),
        },
        _ => match render_command(change) {
            Ok(cnl) => format!("Proposal: {cnl}"),
            Err(_) => format!("Proposal: {}", change.type_name()),
        },
    }
}

/// The trigger line followed by one bullet per change.
pub fn render_request_body(changes: &ChangeSet) -> Result<String, UnrenderableChange> {
    let mut out = format!("{TRIGGER}\n");
    for change in changes {
        out.push_str("- ");
        out.push_str(&render_command(change)?);
        out.push('\n');
    }
    Ok(out)
}

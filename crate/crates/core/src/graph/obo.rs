//! Minimal OBO flat-file reader.
//!
//! Reads `[Term]` stanzas only, and within them the tags `id`, `name`,
//! `def`, `synonym`, `is_a`, `relationship`, `is_obsolete` and
//! `replaced_by`. Everything else is skipped.

use super::{Edge, Graph, LoadError, Node, NodeId, Synonym};
use crate::model::SynonymScope;

struct Stanza {
    line: usize,
    node: Option<Node>,
    edges: Vec<(usize, String, String)>,
}

pub fn load_obo(text: &str) -> Result<Graph, LoadError> {
    let mut graph = Graph::new();
    let mut current: Option<Stanza> = None;

    for (index, raw) in text.lines().enumerate() {
        let lineno = index + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('!') {
            continue;
        }
        if line.starts_with('[') {
            if let Some(stanza) = current.take() {
                finish(&mut graph, stanza)?;
            }
            if line == "[Term]" {
                current = Some(Stanza {
                    line: lineno,
                    node: None,
                    edges: Vec::new(),
                });
            }
            continue;
        }
        let Some(stanza) = current.as_mut() else {
            // header tags or a stanza type we skip
            continue;
        };
        let Some((tag, value)) = line.split_once(':') else {
            return Err(err(lineno, format!("expected `tag: value`, found `{line}`")));
        };
        let value = value.trim();
        match tag.trim() {
            "id" => {
                let id = NodeId::new(unquoted(value)).map_err(|m| err(lineno, m))?;
                if stanza.node.is_some() {
                    return Err(err(lineno, "second id in stanza"));
                }
                stanza.node = Some(Node::new(id));
            }
            "name" => node_mut(stanza, lineno)?.label = Some(unquoted(value)),
            "def" => {
                let (text, _) = quoted(value).ok_or_else(|| err(lineno, "def needs a quoted string"))?;
                node_mut(stanza, lineno)?.definition = Some(text);
            }
            "synonym" => {
                let (text, rest) =
                    quoted(value).ok_or_else(|| err(lineno, "synonym needs a quoted string"))?;
                let scope = match rest.split_whitespace().next() {
                    Some("EXACT") => SynonymScope::Exact,
                    Some("NARROW") => SynonymScope::Narrow,
                    Some("BROAD") => SynonymScope::Broad,
                    Some("RELATED") => SynonymScope::Related,
                    other => {
                        return Err(err(lineno, format!("unknown synonym scope {other:?}")))
                    }
                };
                let node = node_mut(stanza, lineno)?;
                if !node.has_synonym(&text, scope) {
                    node.synonyms.push(Synonym::new(text, scope));
                }
            }
            "is_a" => {
                let target = first_token(value).ok_or_else(|| err(lineno, "is_a needs a target"))?;
                stanza.edges.push((lineno, "is_a".to_string(), target.to_string()));
            }
            "relationship" => {
                let mut parts = unquoted(value);
                parts.truncate(parts.find('{').unwrap_or(parts.len()));
                let mut tokens = parts.split_whitespace();
                match (tokens.next(), tokens.next()) {
                    (Some(rel), Some(target)) => {
                        stanza.edges.push((lineno, rel.to_string(), target.to_string()))
                    }
                    _ => return Err(err(lineno, "relationship needs a relation and a target")),
                }
            }
            "is_obsolete" => node_mut(stanza, lineno)?.deprecated = first_token(value) == Some("true"),
            "replaced_by" => {
                let target = first_token(value).ok_or_else(|| err(lineno, "replaced_by needs a target"))?;
                let target = NodeId::new(target).map_err(|m| err(lineno, m))?;
                node_mut(stanza, lineno)?.replaced_by = Some(target);
            }
            _ => {}
        }
    }
    if let Some(stanza) = current.take() {
        finish(&mut graph, stanza)?;
    }
    Ok(graph)
}

fn err(line: usize, message: impl Into<String>) -> LoadError {
    LoadError::format(format!("line {line}"), message)
}

fn node_mut(stanza: &mut Stanza, line: usize) -> Result<&mut Node, LoadError> {
    stanza
        .node
        .as_mut()
        .ok_or_else(|| err(line, "tag before the stanza id"))
}

fn finish(graph: &mut Graph, stanza: Stanza) -> Result<(), LoadError> {
    let Some(mut node) = stanza.node else {
        return Err(err(stanza.line, "[Term] stanza without id"));
    };
    if node.replaced_by.is_some() {
        node.deprecated = true;
    }
    let subject = node.id.clone();
    if graph.contains_node(subject.as_str()) {
        return Err(LoadError::DuplicateNodeId(subject.to_string()));
    }
    graph.insert_node(node).expect("checked above");
    for (line, predicate, target) in stanza.edges {
        let object = NodeId::new(target).map_err(|m| err(line, m))?;
        let edge = Edge::new(subject.clone(), predicate, object).map_err(|m| err(line, m))?;
        // repeated is_a lines are harmless
        let _ = graph.add_edge(edge);
    }
    Ok(())
}

/// Strips a trailing `! comment`, honouring `\` escapes.
fn unquoted(value: &str) -> String {
    let mut out = String::new();
    let mut chars = value.chars();
    while let Some(c) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some('n') => out.push('\n'),
                Some('t') => out.push('\t'),
                Some(other) => out.push(other),
                None => out.push('\\'),
            },
            '!' => break,
            _ => out.push(c),
        }
    }
    out.trim_end().to_string()
}

fn first_token(value: &str) -> Option<&str> {
    value.split_whitespace().next().filter(|t| !t.starts_with('!'))
}

/// Reads a leading double-quoted string; returns its content and the rest of
/// the line.
fn quoted(value: &str) -> Option<(String, &str)> {
    let body = value.strip_prefix('"')?;
    let mut out = String::new();
    let mut chars = body.char_indices();
    while let Some((i, c)) = chars.next() {
        match c {
            '\\' => match chars.next() {
                Some((_, 'n')) => out.push('\n'),
                Some((_, 't')) => out.push('\t'),
                Some((_, other)) => out.push(other),
                None => return None,
            },
            '"' => return Some((out, &body[i + 1..])),
            _ => out.push(c),
        }
    }
    None
}

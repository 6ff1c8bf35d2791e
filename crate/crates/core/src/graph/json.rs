//! Graph-JSON reading and writing (an OBO-graphs style subset).

use serde::{Deserialize, Serialize};

use super::{Edge, Graph, GraphError, LoadError, Node, NodeId, NodeKind, Synonym};
use crate::model::SynonymScope;

const REPLACED_BY: &str = "term_replaced_by";
const PENDING: &str = "pending_change";

#[derive(Debug, Default, Serialize, Deserialize)]
struct RawDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    graphs: Option<Vec<RawDocument>>,
    #[serde(default)]
    nodes: Vec<RawNode>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawNode {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lbl: Option<String>,
    #[serde(rename = "type", default, skip_serializing_if = "Option::is_none")]
    kind: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<RawMeta>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
struct RawMeta {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    definition: Option<RawValue>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    synonyms: Vec<RawPropertyValue>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    deprecated: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    basic_property_values: Vec<RawPropertyValue>,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawValue {
    val: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPropertyValue {
    pred: String,
    val: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawEdge {
    sub: String,
    pred: String,
    obj: String,
}

fn scope_from_pred(pred: &str) -> Option<SynonymScope> {
    // accept full oboInOwl IRIs as well as the short names
    let short = pred.rsplit(['#', ':']).next().unwrap_or(pred);
    match short {
        "hasExactSynonym" => Some(SynonymScope::Exact),
        "hasNarrowSynonym" => Some(SynonymScope::Narrow),
        "hasBroadSynonym" => Some(SynonymScope::Broad),
        "hasRelatedSynonym" => Some(SynonymScope::Related),
        _ => None,
    }
}

fn pred_from_scope(scope: SynonymScope) -> &'static str {
    match scope {
        SynonymScope::Exact => "hasExactSynonym",
        SynonymScope::Narrow => "hasNarrowSynonym",
        SynonymScope::Broad => "hasBroadSynonym",
        SynonymScope::Related => "hasRelatedSynonym",
    }
}

fn is_replaced_by(pred: &str) -> bool {
    pred == REPLACED_BY || pred == "IAO:0100001" || pred.ends_with("/IAO_0100001")
}

/// Loads a graph-JSON document.
///
/// Both the flat `{"nodes": [...], "edges": [...]}` layout and the
/// `{"graphs": [...]}` wrapper are accepted; wrapped graphs are merged.
pub fn load(bytes: &[u8]) -> Result<Graph, LoadError> {
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let doc: RawDocument = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        LoadError::format(path, e.into_inner().to_string())
    })?;

    let mut graph = Graph::new();
    let mut parts = vec![(String::new(), doc)];
    while let Some((prefix, mut doc)) = parts.pop() {
        if let Some(graphs) = doc.graphs.take() {
            for (i, g) in graphs.into_iter().enumerate().rev() {
                parts.push((format!("{prefix}graphs[{i}]."), g));
            }
        }
        for (i, raw) in doc.nodes.into_iter().enumerate() {
            let node = convert_node(raw, &format!("{prefix}nodes[{i}]"))?;
            graph.insert_node(node).map_err(|e| match e {
                GraphError::DuplicateNodeId(id) => LoadError::DuplicateNodeId(id.to_string()),
                other => LoadError::format(format!("{prefix}nodes[{i}]"), other.to_string()),
            })?;
        }
        for (i, raw) in doc.edges.into_iter().enumerate() {
            let path = format!("{prefix}edges[{i}]");
            let sub = NodeId::new(raw.sub).map_err(|m| LoadError::format(format!("{path}.sub"), m))?;
            let obj = NodeId::new(raw.obj).map_err(|m| LoadError::format(format!("{path}.obj"), m))?;
            let edge = Edge::new(sub, raw.pred, obj)
                .map_err(|m| LoadError::format(format!("{path}.pred"), m))?;
            graph
                .add_edge(edge)
                .map_err(|e| LoadError::format(path, e.to_string()))?;
        }
    }
    Ok(graph)
}

fn convert_node(raw: RawNode, path: &str) -> Result<Node, LoadError> {
    let id = NodeId::new(raw.id).map_err(|m| LoadError::format(format!("{path}.id"), m))?;
    let mut node = Node::new(id);
    node.label = raw.lbl;
    node.kind = match raw.kind.as_deref() {
        None | Some("CLASS") => NodeKind::Class,
        Some("PROPERTY") => NodeKind::Property,
        Some("INDIVIDUAL") => NodeKind::Individual,
        Some(other) => {
            return Err(LoadError::format(
                format!("{path}.type"),
                format!("unknown node type '{other}'"),
            ))
        }
    };
    let Some(meta) = raw.meta else {
        return Ok(node);
    };
    node.definition = meta.definition.map(|d| d.val);
    node.deprecated = meta.deprecated.unwrap_or(false);
    for (i, syn) in meta.synonyms.into_iter().enumerate() {
        let spath = format!("{path}.meta.synonyms[{i}]");
        let scope = scope_from_pred(&syn.pred).ok_or_else(|| {
            LoadError::format(format!("{spath}.pred"), format!("unknown synonym predicate '{}'", syn.pred))
        })?;
        if syn.val.is_empty() {
            return Err(LoadError::format(format!("{spath}.val"), "empty synonym"));
        }
        if node.has_synonym(&syn.val, scope) {
            return Err(LoadError::format(spath, "duplicate synonym"));
        }
        node.synonyms.push(Synonym::new(syn.val, scope));
    }
    for (i, pv) in meta.basic_property_values.into_iter().enumerate() {
        let ppath = format!("{path}.meta.basicPropertyValues[{i}]");
        if is_replaced_by(&pv.pred) {
            if node.replaced_by.is_some() {
                return Err(LoadError::format(ppath, "more than one replacement"));
            }
            let target =
                NodeId::new(pv.val).map_err(|m| LoadError::format(format!("{ppath}.val"), m))?;
            node.replaced_by = Some(target);
            // a replacement implies deprecation
            node.deprecated = true;
        } else if pv.pred == PENDING {
            node.pending.push(pv.val);
        }
    }
    Ok(node)
}

/// Writes a graph as graph-JSON. Output is deterministic: nodes sorted by
/// id, edges by (subject, predicate, object), synonyms and pending changes
/// in stored order.
pub fn save(graph: &Graph) -> Vec<u8> {
    let nodes = graph.nodes().map(raw_node).collect();
    let edges = graph
        .edges()
        .map(|e| RawEdge {
            sub: e.subject.to_string(),
            pred: e.predicate.clone(),
            obj: e.object.to_string(),
        })
        .collect();
    let doc = RawDocument {
        graphs: None,
        nodes,
        edges,
    };
    let mut out = serde_json::to_vec_pretty(&doc).expect("graph documents always serialize");
    out.push(b'\n');
    out
}

fn raw_node(node: &Node) -> RawNode {
    let mut meta = RawMeta {
        definition: node.definition.clone().map(|val| RawValue { val }),
        synonyms: node
            .synonyms
            .iter()
            .map(|s| RawPropertyValue {
                pred: pred_from_scope(s.scope).to_string(),
                val: s.value.clone(),
            })
            .collect(),
        deprecated: node.deprecated.then_some(true),
        basic_property_values: Vec::new(),
    };
    if let Some(r) = &node.replaced_by {
        meta.basic_property_values.push(RawPropertyValue {
            pred: REPLACED_BY.to_string(),
            val: r.to_string(),
        });
    }
    meta.basic_property_values
        .extend(node.pending.iter().map(|p| RawPropertyValue {
            pred: PENDING.to_string(),
            val: p.clone(),
        }));
    let empty = meta.definition.is_none()
        && meta.synonyms.is_empty()
        && meta.deprecated.is_none()
        && meta.basic_property_values.is_empty();
    RawNode {
        id: node.id.to_string(),
        lbl: node.label.clone(),
        kind: Some(
            match node.kind {
                NodeKind::Class => "CLASS",
                NodeKind::Property => "PROPERTY",
                NodeKind::Individual => "INDIVIDUAL",
            }
            .to_string(),
        ),
        meta: (!empty).then_some(meta),
    }
}

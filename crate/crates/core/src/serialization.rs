//! JSON, YAML and TSV forms of change sets.
//!
//! All three share one flat record shape:
//!
//! ```yaml
//! - type: NodeRename
//!   about_node: ENVO:01000575
//!   old_value: wax
//!   new_value: oil
//! ```
//!
//! Node references are written as bare CURIEs, or as `'label'` wrapped in
//! single quotes. Absent fields are omitted (JSON, YAML) or left empty (TSV).

use std::collections::HashSet;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cnl::{self, UnrenderableChange};
use crate::model::{is_curie, Change, ChangeId, ChangeKind, ChangeSet, NodeRef, SynonymScope};

pub const TSV_HEADER: [&str; 10] = [
    "id",
    "type",
    "about_node",
    "old_value",
    "new_value",
    "subject",
    "predicate",
    "object",
    "replacement",
    "scope",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SerializationError {
    #[error("record {index}: unknown change type '{name}'")]
    UnknownChangeType { index: usize, name: String },
    #[error("record {index}: missing field '{field}'")]
    MissingField { index: usize, field: &'static str },
    #[error("record {index}: field '{field}' does not apply to {change_type}")]
    UnexpectedField {
        index: usize,
        field: &'static str,
        change_type: &'static str,
    },
    #[error("record {index}: invalid {field}: {message}")]
    InvalidValue {
        index: usize,
        field: &'static str,
        message: String,
    },
    #[error("duplicate change id '{0}'")]
    DuplicateId(String),
    #[error("record {index}: {field} contains a tab or line break, which TSV cannot hold")]
    TabularUnrepresentable { index: usize, field: &'static str },
    #[error("bad TSV header: {found}")]
    BadHeader { found: String },
    #[error("JSON: {0}")]
    Json(String),
    #[error("YAML: {0}")]
    Yaml(String),
    #[error("TSV: {0}")]
    Tsv(String),
    #[error(transparent)]
    Unrenderable(#[from] UnrenderableChange),
}

/// One change as a flat record.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChangeRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(rename = "type")]
    pub change_type: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub about_node: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub old_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub new_value: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subject: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicate: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replacement: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scope: Option<String>,
}

fn encode_ref(r: &NodeRef) -> String {
    match r {
        NodeRef::Curie(c) => c.clone(),
        NodeRef::Label(l) => format!("'{l}'"),
    }
}

fn decode_ref(s: &str) -> Option<NodeRef> {
    if s.len() >= 2 && s.starts_with('\'') && s.ends_with('\'') {
        Some(NodeRef::Label(s[1..s.len() - 1].to_string()))
    } else if is_curie(s) {
        Some(NodeRef::Curie(s.to_string()))
    } else if s.is_empty() {
        None
    } else {
        Some(NodeRef::Label(s.to_string()))
    }
}

impl From<&Change> for ChangeRecord {
    fn from(change: &Change) -> Self {
        let mut r = ChangeRecord {
            id: change.id.as_ref().map(|i| i.as_str().to_string()),
            change_type: change.type_name().to_string(),
            ..Default::default()
        };
        let re = |x: &NodeRef| Some(encode_ref(x));
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
                r.about_node = re(about_node);
                r.old_value = old_value.clone();
                r.new_value = Some(new_value.clone());
            }
            ChangeKind::NodeObsoletion {
                about_node,
                replacement,
            } => {
                r.about_node = re(about_node);
                r.replacement = replacement.as_ref().map(encode_ref);
            }
            ChangeKind::NodeDeletion { about_node } | ChangeKind::RemoveTextDefinition { about_node } => {
                r.about_node = re(about_node)
            }
            ChangeKind::ClassCreation {
                about_node,
                new_value,
            } => {
                r.about_node = about_node.as_ref().map(encode_ref);
                r.new_value = new_value.clone();
            }
            ChangeKind::SynonymReplacement {
                about_node,
                old_value,
                new_value,
            } => {
                r.about_node = re(about_node);
                r.old_value = Some(old_value.clone());
                r.new_value = Some(new_value.clone());
            }
            ChangeKind::NewTextDefinition {
                about_node,
                new_value,
            } => {
                r.about_node = re(about_node);
                r.new_value = Some(new_value.clone());
            }
            ChangeKind::NewSynonym {
                about_node,
                new_value,
                scope,
            } => {
                r.about_node = re(about_node);
                r.new_value = Some(new_value.clone());
                r.scope = scope.map(|s| s.as_str().to_string());
            }
            ChangeKind::RemoveSynonym {
                about_node,
                old_value,
            } => {
                r.about_node = re(about_node);
                r.old_value = Some(old_value.clone());
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
                r.subject = re(subject);
                r.predicate = re(predicate);
                r.object = re(object);
            }
            ChangeKind::NodeMove {
                about_node,
                old_value,
                new_value,
                predicate,
            } => {
                r.about_node = re(about_node);
                r.old_value = re(old_value);
                r.new_value = re(new_value);
                r.predicate = predicate.as_ref().map(encode_ref);
            }
            ChangeKind::PredicateChange {
                subject,
                object,
                old_value,
                new_value,
            } => {
                r.subject = re(subject);
                r.object = re(object);
                r.old_value = re(old_value);
                r.new_value = re(new_value);
            }
        }
        r
    }
}

/// Field access that records which fields were consumed, so leftovers can be
/// reported as not applicable to the change type.
struct Fields {
    index: usize,
    record: ChangeRecord,
    change_type: &'static str,
}

impl Fields {
    fn take(&mut self, field: &'static str) -> Option<String> {
        let slot = match field {
            "about_node" => &mut self.record.about_node,
            "old_value" => &mut self.record.old_value,
            "new_value" => &mut self.record.new_value,
            "subject" => &mut self.record.subject,
            "predicate" => &mut self.record.predicate,
            "object" => &mut self.record.object,
            "replacement" => &mut self.record.replacement,
            "scope" => &mut self.record.scope,
            _ => unreachable!("unknown record field {field}"),
        };
        slot.take()
    }

    fn text(&mut self, field: &'static str) -> Result<String, SerializationError> {
        self.take(field).ok_or(SerializationError::MissingField {
            index: self.index,
            field,
        })
    }

    fn opt_ref(&mut self, field: &'static str) -> Result<Option<NodeRef>, SerializationError> {
        match self.take(field) {
            None => Ok(None),
            Some(s) => decode_ref(&s).map(Some).ok_or(SerializationError::InvalidValue {
                index: self.index,
                field,
                message: "empty node reference".to_string(),
            }),
        }
    }

    fn reference(&mut self, field: &'static str) -> Result<NodeRef, SerializationError> {
        self.opt_ref(field)?.ok_or(SerializationError::MissingField {
            index: self.index,
            field,
        })
    }

    fn finish(self) -> Result<(), SerializationError> {
        let r = &self.record;
        let leftovers = [
            ("about_node", &r.about_node),
            ("old_value", &r.old_value),
            ("new_value", &r.new_value),
            ("subject", &r.subject),
            ("predicate", &r.predicate),
            ("object", &r.object),
            ("replacement", &r.replacement),
            ("scope", &r.scope),
        ];
        match leftovers.into_iter().find(|(_, v)| v.is_some()) {
            Some((field, _)) => Err(SerializationError::UnexpectedField {
                index: self.index,
                field,
                change_type: self.change_type,
            }),
            None => Ok(()),
        }
    }
}

impl ChangeRecord {
    /// Converts a record into a change. `index` is only used in errors.
    /// `NodeObsolescence` is accepted as an alias of `NodeObsoletion`.
    pub fn into_change(self, index: usize) -> Result<Change, SerializationError> {
        let name = match self.change_type.as_str() {
            "NodeObsolescence" => "NodeObsoletion",
            other => ChangeKind::TYPE_NAMES
                .into_iter()
                .find(|n| *n == other)
                .ok_or_else(|| SerializationError::UnknownChangeType {
                    index,
                    name: other.to_string(),
                })?,
        };
        let id = match &self.id {
            None => None,
            Some(id) => Some(ChangeId::new(id.clone()).map_err(|message| {
                SerializationError::InvalidValue {
                    index,
                    field: "id",
                    message,
                }
            })?),
        };
        let mut f = Fields {
            index,
            record: self,
            change_type: name,
        };
        let kind = match name {
            "NodeRename" => ChangeKind::NodeRename {
                about_node: f.reference("about_node")?,
                old_value: f.take("old_value"),
                new_value: f.text("new_value")?,
            },
            "NodeObsoletion" => ChangeKind::NodeObsoletion {
                about_node: f.reference("about_node")?,
                replacement: f.opt_ref("replacement")?,
            },
            "NodeDeletion" => ChangeKind::NodeDeletion {
                about_node: f.reference("about_node")?,
            },
            "ClassCreation" => ChangeKind::ClassCreation {
                about_node: f.opt_ref("about_node")?,
                new_value: f.take("new_value"),
            },
            "SynonymReplacement" => ChangeKind::SynonymReplacement {
                about_node: f.reference("about_node")?,
                old_value: f.text("old_value")?,
                new_value: f.text("new_value")?,
            },
            "NewTextDefinition" => ChangeKind::NewTextDefinition {
                about_node: f.reference("about_node")?,
                new_value: f.text("new_value")?,
            },
            "RemoveTextDefinition" => ChangeKind::RemoveTextDefinition {
                about_node: f.reference("about_node")?,
            },
            "NodeTextDefinitionChange" => ChangeKind::NodeTextDefinitionChange {
                about_node: f.reference("about_node")?,
                old_value: f.take("old_value"),
                new_value: f.text("new_value")?,
            },
            "NewSynonym" => {
                let about_node = f.reference("about_node")?;
                let new_value = f.text("new_value")?;
                let scope = match f.take("scope") {
                    None => None,
                    Some(s) => Some(SynonymScope::from_str(&s).map_err(|message| {
                        SerializationError::InvalidValue {
                            index,
                            field: "scope",
                            message,
                        }
                    })?),
                };
                ChangeKind::NewSynonym {
                    about_node,
                    new_value,
                    scope,
                }
            }
            "RemoveSynonym" => ChangeKind::RemoveSynonym {
                about_node: f.reference("about_node")?,
                old_value: f.text("old_value")?,
            },
            "EdgeCreation" => ChangeKind::EdgeCreation {
                subject: f.reference("subject")?,
                predicate: f.reference("predicate")?,
                object: f.reference("object")?,
            },
            "EdgeDeletion" => ChangeKind::EdgeDeletion {
                subject: f.reference("subject")?,
                predicate: f.reference("predicate")?,
                object: f.reference("object")?,
            },
            "NodeMove" => ChangeKind::NodeMove {
                about_node: f.reference("about_node")?,
                old_value: f.reference("old_value")?,
                new_value: f.reference("new_value")?,
                predicate: f.opt_ref("predicate")?,
            },
            "PredicateChange" => ChangeKind::PredicateChange {
                subject: f.reference("subject")?,
                object: f.reference("object")?,
                old_value: f.reference("old_value")?,
                new_value: f.reference("new_value")?,
            },
            _ => unreachable!("name comes from TYPE_NAMES"),
        };
        f.finish()?;
        Ok(Change { id, kind })
    }
}

fn records(cs: &ChangeSet) -> Vec<ChangeRecord> {
    cs.iter().map(ChangeRecord::from).collect()
}

fn from_records(records: Vec<ChangeRecord>) -> Result<ChangeSet, SerializationError> {
    let changes = records
        .into_iter()
        .enumerate()
        .map(|(i, r)| r.into_change(i))
        .collect::<Result<Vec<_>, _>>()?;
    let mut seen = HashSet::new();
    for id in changes.iter().filter_map(|c| c.id.as_ref()) {
        if !seen.insert(id) {
            return Err(SerializationError::DuplicateId(id.to_string()));
        }
    }
    Ok(ChangeSet::new(changes))
}

/// Compact JSON array of records.
pub fn to_json(cs: &ChangeSet) -> Vec<u8> {
    serde_json::to_vec(&records(cs)).expect("records always serialize")
}

/// Accepts an array of records or a single record object.
pub fn from_json(bytes: &[u8]) -> Result<ChangeSet, SerializationError> {
    let json = |e: serde_json::Error| SerializationError::Json(e.to_string());
    let value: serde_json::Value = serde_json::from_slice(bytes).map_err(json)?;
    let records = if value.is_object() {
        vec![serde_json::from_value(value).map_err(json)?]
    } else {
        serde_json::from_value(value).map_err(json)?
    };
    from_records(records)
}

pub fn to_yaml(cs: &ChangeSet) -> Vec<u8> {
    serde_yaml::to_string(&records(cs))
        .expect("records always serialize")
        .into_bytes()
}

/// Accepts a sequence of records or a single record mapping. An empty
/// document is an empty change set.
pub fn from_yaml(bytes: &[u8]) -> Result<ChangeSet, SerializationError> {
    let yaml = |e: serde_yaml::Error| SerializationError::Yaml(e.to_string());
    let value: serde_yaml::Value = serde_yaml::from_slice(bytes).map_err(yaml)?;
    let records = match value {
        serde_yaml::Value::Null => Vec::new(),
        v @ serde_yaml::Value::Mapping(_) => vec![serde_yaml::from_value(v).map_err(yaml)?],
        v => serde_yaml::from_value(v).map_err(yaml)?,
    };
    from_records(records)
}

fn tsv_cells(r: &ChangeRecord) -> [(&'static str, &str); 10] {
    fn s(o: &Option<String>) -> &str {
        o.as_deref().unwrap_or("")
    }
    [
        ("id", s(&r.id)),
        ("type", r.change_type.as_str()),
        ("about_node", s(&r.about_node)),
        ("old_value", s(&r.old_value)),
        ("new_value", s(&r.new_value)),
        ("subject", s(&r.subject)),
        ("predicate", s(&r.predicate)),
        ("object", s(&r.object)),
        ("replacement", s(&r.replacement)),
        ("scope", s(&r.scope)),
    ]
}

/// Tab-separated rows under a fixed header. Values containing tabs or line
/// breaks cannot be represented.
pub fn to_tsv(cs: &ChangeSet) -> Result<Vec<u8>, SerializationError> {
    let mut writer = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .quote_style(csv::QuoteStyle::Never)
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let tsv = |e: csv::Error| SerializationError::Tsv(e.to_string());
    writer.write_record(TSV_HEADER).map_err(tsv)?;
    for (index, record) in records(cs).iter().enumerate() {
        let cells = tsv_cells(record);
        if let Some((field, _)) = cells
            .iter()
            .find(|(_, v)| v.contains(['\t', '\n', '\r']))
        {
            return Err(SerializationError::TabularUnrepresentable { index, field });
        }
        writer.write_record(cells.map(|(_, v)| v)).map_err(tsv)?;
    }
    writer
        .into_inner()
        .map_err(|e| SerializationError::Tsv(e.to_string()))
}

pub fn from_tsv(bytes: &[u8]) -> Result<ChangeSet, SerializationError> {
    let tsv = |e: csv::Error| SerializationError::Tsv(e.to_string());
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .quoting(false)
        .has_headers(true)
        .from_reader(bytes);
    let header = reader.headers().map_err(tsv)?.clone();
    if header.iter().ne(TSV_HEADER) {
        return Err(SerializationError::BadHeader {
            found: header.iter().collect::<Vec<_>>().join("\\t"),
        });
    }
    let cell = |s: &str| (!s.is_empty()).then(|| s.to_string());
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(tsv)?;
        out.push(ChangeRecord {
            id: cell(&row[0]),
            change_type: row[1].to_string(),
            about_node: cell(&row[2]),
            old_value: cell(&row[3]),
            new_value: cell(&row[4]),
            subject: cell(&row[5]),
            predicate: cell(&row[6]),
            object: cell(&row[7]),
            replacement: cell(&row[8]),
            scope: cell(&row[9]),
        });
    }
    from_records(out)
}

/// Serialized form of a single change, as stored in pending lists.
pub fn change_to_json(change: &Change) -> String {
    serde_json::to_string(&ChangeRecord::from(change)).expect("records always serialize")
}

pub fn change_from_json(text: &str) -> Result<Change, SerializationError> {
    let record: ChangeRecord =
        serde_json::from_str(text).map_err(|e| SerializationError::Json(e.to_string()))?;
    record.into_change(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Cnl,
    Json,
    Yaml,
    Tsv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cnl" | "kgcl" => Ok(Format::Cnl),
            "json" => Ok(Format::Json),
            "yaml" | "yml" => Ok(Format::Yaml),
            "tsv" => Ok(Format::Tsv),
            other => Err(format!("unknown format '{other}'")),
        }
    }
}

/// Writes a change set in any of the four forms. CNL output is one command
/// per line.
pub fn write_changes(cs: &ChangeSet, format: Format) -> Result<Vec<u8>, SerializationError> {
    Ok(match format {
        Format::Cnl => cnl::render_document(cs)?.into_bytes(),
        Format::Json => to_json(cs),
        Format::Yaml => to_yaml(cs),
        Format::Tsv => to_tsv(cs)?,
    })
}

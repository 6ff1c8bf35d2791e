//! Shared generators and the atomic-fact oracle for integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use kgcl::apply::{apply_change, ApplyOptions, ApplyStatus};
use kgcl::graph::{Edge, Graph, Node, NodeId, Synonym};
use kgcl::model::{validate, Change, ChangeId, ChangeKind, ChangeSet, NodeRef, SynonymScope};
use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

const WORDS: &[&str] = &[
    "heart", "liver", "lung", "bone", "cell", "tissue", "organ", "wing", "fin", "eye", "duct",
    "gland", "nerve", "vessel", "muscle", "skin",
];
const PREDICATES: &[&str] = &["is_a", "part_of", "has_part", "BFO:0000050", "RO:0002202"];
const PREFIXES: &[&str] = &["T", "GO", "UBERON"];

fn word(rng: &mut impl Rng) -> String {
    let n = rng.random_range(1..=2);
    (0..n)
        .map(|_| *WORDS.choose(rng).unwrap())
        .collect::<Vec<_>>()
        .join(" ")
}

fn scope(rng: &mut impl Rng) -> SynonymScope {
    *SynonymScope::ALL.choose(rng).unwrap()
}

fn predicate_ref(rng: &mut impl Rng) -> NodeRef {
    let p = *PREDICATES.choose(rng).unwrap();
    if p.contains(':') {
        NodeRef::curie(p)
    } else {
        NodeRef::label(p)
    }
}

/// Classes only, no pending lists. Labels repeat, so some label
/// references are ambiguous.
pub fn random_graph(rng: &mut impl Rng, max_nodes: usize) -> Graph {
    let mut g = Graph::new();
    let n = rng.random_range(0..=max_nodes);
    let ids: Vec<NodeId> = (1..=n)
        .map(|i| NodeId::new(format!("{}:{i:04}", PREFIXES.choose(rng).unwrap())).unwrap())
        .collect();
    for id in &ids {
        let mut node = Node::new(id.clone());
        if rng.random_bool(0.9) {
            node.label = Some(word(rng));
        }
        if rng.random_bool(0.5) {
            node.definition = Some(format!("a {} of the {}", word(rng), word(rng)));
        }
        for _ in 0..rng.random_range(0..=3) {
            let s = Synonym::new(word(rng), scope(rng));
            if !node.has_synonym(&s.value, s.scope) {
                node.synonyms.push(s);
            }
        }
        if rng.random_bool(0.1) {
            node.deprecated = true;
            if rng.random_bool(0.5) {
                node.replaced_by = ids.choose(rng).filter(|r| *r != id).cloned();
            }
        }
        g.insert_node(node).unwrap();
    }
    if !ids.is_empty() {
        for _ in 0..rng.random_range(0..=2 * n) {
            let s = ids.choose(rng).unwrap().clone();
            let o = if rng.random_bool(0.05) {
                NodeId::new(format!("EXT:{}", rng.random_range(0..5))).unwrap()
            } else {
                ids.choose(rng).unwrap().clone()
            };
            let p = PREDICATES.choose(rng).unwrap();
            let _ = g.add_edge(Edge::new(s, *p, o).unwrap());
        }
    }
    g
}

/// A reference to `id`: usually the CURIE, sometimes the label when the
/// label is unique.
fn node_ref(rng: &mut impl Rng, g: &Graph, id: &NodeId) -> NodeRef {
    if let Some(label) = g.node(id.as_str()).and_then(|n| n.label.as_ref()) {
        if rng.random_bool(0.3) && g.ids_with_label(label).count() == 1 {
            return NodeRef::label(label.clone());
        }
    }
    NodeRef::curie(id.as_str())
}

fn some_id(rng: &mut impl Rng, g: &Graph) -> NodeId {
    let ids: Vec<&NodeId> = g.node_ids().collect();
    match ids.choose(rng) {
        Some(id) if rng.random_bool(0.95) => (*id).clone(),
        _ => NodeId::new(format!("T:9{}", rng.random_range(0..100))).unwrap(),
    }
}

/// A plausible change against `g`; it may or may not apply.
pub fn random_change_for(rng: &mut impl Rng, g: &Graph) -> Change {
    let id = some_id(rng, g);
    let about = node_ref(rng, g, &id);
    let node = g.node(id.as_str());
    let existing_synonym = node
        .and_then(|n| n.synonyms.choose(rng))
        .map(|s| s.value.clone())
        .unwrap_or_else(|| word(rng));
    let edges: Vec<&Edge> = g.edges().collect();
    let edge = edges.choose(rng).copied().cloned();
    let endpoint = |rng: &mut _, id: &NodeId| node_ref(rng, g, id);

    let kind = match rng.random_range(0..14) {
        0 => ChangeKind::NodeRename {
            about_node: about,
            old_value: node.and_then(|n| n.label.clone()).filter(|_| rng.random_bool(0.5)),
            new_value: word(rng),
        },
        1 => ChangeKind::NodeObsoletion {
            about_node: about,
            replacement: rng
                .random_bool(0.5)
                .then(|| NodeRef::curie(some_id(rng, g).as_str())),
        },
        2 => ChangeKind::NodeDeletion { about_node: about },
        3 => ChangeKind::ClassCreation {
            about_node: rng
                .random_bool(0.5)
                .then(|| NodeRef::curie(format!("N:{}", rng.random_range(0..50)))),
            new_value: Some(word(rng)),
        },
        4 => ChangeKind::SynonymReplacement {
            about_node: about,
            old_value: existing_synonym,
            new_value: word(rng),
        },
        5 => ChangeKind::NewTextDefinition {
            about_node: about,
            new_value: format!("the {}", word(rng)),
        },
        6 => ChangeKind::RemoveTextDefinition { about_node: about },
        7 => ChangeKind::NodeTextDefinitionChange {
            about_node: about,
            old_value: node.and_then(|n| n.definition.clone()).filter(|_| rng.random_bool(0.5)),
            new_value: format!("the {}", word(rng)),
        },
        8 => ChangeKind::NewSynonym {
            about_node: about,
            new_value: word(rng),
            scope: rng.random_bool(0.8).then(|| scope(rng)),
        },
        9 => ChangeKind::RemoveSynonym {
            about_node: about,
            old_value: existing_synonym,
        },
        10 => {
            let o = some_id(rng, g);
            ChangeKind::EdgeCreation {
                subject: about,
                predicate: predicate_ref(rng),
                object: endpoint(rng, &o),
            }
        }
        11 => match edge {
            Some(e) => ChangeKind::EdgeDeletion {
                subject: endpoint(rng, &e.subject),
                predicate: e.predicate_ref(),
                object: endpoint(rng, &e.object),
            },
            None => ChangeKind::NodeDeletion { about_node: about },
        },
        12 => match edge {
            Some(e) => {
                let to = some_id(rng, g);
                ChangeKind::NodeMove {
                    about_node: endpoint(rng, &e.subject),
                    old_value: endpoint(rng, &e.object),
                    new_value: endpoint(rng, &to),
                    predicate: rng.random_bool(0.5).then(|| e.predicate_ref()),
                }
            }
            None => ChangeKind::RemoveTextDefinition { about_node: about },
        },
        _ => match edge {
            Some(e) => ChangeKind::PredicateChange {
                subject: endpoint(rng, &e.subject),
                object: endpoint(rng, &e.object),
                old_value: e.predicate_ref(),
                new_value: predicate_ref(rng),
            },
            None => ChangeKind::NewSynonym {
                about_node: about,
                new_value: word(rng),
                scope: None,
            },
        },
    };
    Change::new(kind)
}

/// Up to `max_len` changes, each applicable at its position. Returns the
/// changes and the graph they produce.
pub fn random_applicable_changes(rng: &mut impl Rng, g: &Graph, max_len: usize) -> (ChangeSet, Graph) {
    let target = rng.random_range(0..=max_len);
    let mut current = g.clone();
    let mut changes = Vec::new();
    let opts = ApplyOptions::default();
    let mut attempts = 0;
    while changes.len() < target && attempts < target * 30 {
        attempts += 1;
        let change = random_change_for(rng, &current);
        if apply_change(&mut current, &change, &opts).status == ApplyStatus::Applied {
            changes.push(change);
        }
    }
    (ChangeSet::new(changes), current)
}

const ALPHABET: &[char] = &[
    'a', 'b', 'z', 'Q', '0', '7', ' ', ' ', '\'', '\\', '"', ':', '#', '-', '_', '.', 'é', '中', '→',
];

/// Arbitrary text, never empty. Tabs and line breaks appear only when
/// asked for.
pub fn text(rng: &mut impl Rng, awkward: bool) -> String {
    let len = rng.random_range(1..12);
    let mut s: String = (0..len).map(|_| *ALPHABET.choose(rng).unwrap()).collect();
    if awkward && rng.random_bool(0.1) {
        let at = s.char_indices().map(|(i, _)| i).collect::<Vec<_>>();
        let i = *at.choose(rng).unwrap();
        s.insert(i, *['\t', '\n', '\r'].choose(rng).unwrap());
    }
    s
}

fn curie(rng: &mut impl Rng) -> String {
    let prefix = ["EX", "UBERON", "go", "a_b.c"].choose(rng).unwrap();
    let local = ["1", "0002398", "x.y", "A-1", "_"].choose(rng).unwrap();
    format!("{prefix}:{local}")
}

fn any_ref(rng: &mut impl Rng, awkward: bool) -> NodeRef {
    match rng.random_range(0..3) {
        0 => NodeRef::curie(curie(rng)),
        1 => NodeRef::label(*WORDS.choose(rng).unwrap()),
        _ => NodeRef::label(text(rng, awkward)),
    }
}

/// A valid change that need not relate to any graph.
pub fn random_change(rng: &mut impl Rng, awkward: bool) -> Change {
    loop {
        let r = |rng: &mut _| any_ref(rng, awkward);
        let t = |rng: &mut _| text(rng, awkward);
        let kind = match rng.random_range(0..14) {
            0 => ChangeKind::NodeRename {
                about_node: r(rng),
                old_value: rng.random_bool(0.5).then(|| t(rng)),
                new_value: t(rng),
            },
            1 => ChangeKind::NodeObsoletion {
                about_node: r(rng),
                replacement: rng.random_bool(0.5).then(|| r(rng)),
            },
            2 => ChangeKind::NodeDeletion { about_node: r(rng) },
            3 => {
                let id = rng.random_bool(0.5).then(|| NodeRef::curie(curie(rng)));
                let label = (id.is_none() || rng.random_bool(0.5)).then(|| t(rng));
                ChangeKind::ClassCreation {
                    about_node: id,
                    new_value: label,
                }
            }
            4 => ChangeKind::SynonymReplacement {
                about_node: r(rng),
                old_value: t(rng),
                new_value: t(rng),
            },
            5 => ChangeKind::NewTextDefinition {
                about_node: r(rng),
                new_value: t(rng),
            },
            6 => ChangeKind::RemoveTextDefinition { about_node: r(rng) },
            7 => ChangeKind::NodeTextDefinitionChange {
                about_node: r(rng),
                old_value: rng.random_bool(0.5).then(|| t(rng)),
                new_value: t(rng),
            },
            8 => ChangeKind::NewSynonym {
                about_node: r(rng),
                new_value: t(rng),
                scope: rng.random_bool(0.7).then(|| scope(rng)),
            },
            9 => ChangeKind::RemoveSynonym {
                about_node: r(rng),
                old_value: t(rng),
            },
            10 => ChangeKind::EdgeCreation {
                subject: r(rng),
                predicate: r(rng),
                object: r(rng),
            },
            11 => ChangeKind::EdgeDeletion {
                subject: r(rng),
                predicate: r(rng),
                object: r(rng),
            },
            12 => ChangeKind::NodeMove {
                about_node: r(rng),
                old_value: r(rng),
                new_value: r(rng),
                predicate: rng.random_bool(0.5).then(|| r(rng)),
            },
            _ => ChangeKind::PredicateChange {
                subject: r(rng),
                object: r(rng),
                old_value: r(rng),
                new_value: r(rng),
            },
        };
        let change = Change::new(kind);
        if validate(&change).is_empty() {
            return change;
        }
    }
}

/// Up to `max_len` valid changes; about half carry ids, all distinct.
pub fn random_change_set(rng: &mut impl Rng, max_len: usize, awkward: bool) -> ChangeSet {
    let n = rng.random_range(0..=max_len);
    (0..n)
        .map(|i| {
            let c = random_change(rng, awkward);
            if rng.random_bool(0.5) {
                c.with_id(ChangeId::new(format!("chg-{i}")).unwrap())
            } else {
                c
            }
        })
        .collect()
}

pub fn without_ids(cs: &ChangeSet) -> ChangeSet {
    cs.iter().map(|c| Change::new(c.kind.clone())).collect()
}

/// Atomic assertions a graph is made of.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Fact {
    Node(String),
    Label(String, String),
    Definition(String, String),
    Synonym(String, String, SynonymScope),
    Deprecated(String),
    ReplacedBy(String, String),
    Edge(String, String, String),
}

impl Fact {
    fn about(&self) -> &str {
        match self {
            Fact::Node(n)
            | Fact::Label(n, _)
            | Fact::Definition(n, _)
            | Fact::Synonym(n, _, _)
            | Fact::Deprecated(n)
            | Fact::ReplacedBy(n, _) => n,
            Fact::Edge(s, _, _) => s,
        }
    }
}

pub fn facts(g: &Graph) -> BTreeSet<Fact> {
    let mut out = BTreeSet::new();
    for n in g.nodes() {
        let id = n.id.to_string();
        out.insert(Fact::Node(id.clone()));
        if let Some(l) = &n.label {
            out.insert(Fact::Label(id.clone(), l.clone()));
        }
        if let Some(d) = &n.definition {
            out.insert(Fact::Definition(id.clone(), d.clone()));
        }
        for s in &n.synonyms {
            out.insert(Fact::Synonym(id.clone(), s.value.clone(), s.scope));
        }
        if n.deprecated {
            out.insert(Fact::Deprecated(id.clone()));
        }
        if let Some(r) = &n.replaced_by {
            out.insert(Fact::ReplacedBy(id.clone(), r.to_string()));
        }
    }
    for e in g.edges() {
        out.insert(Fact::Edge(
            e.subject.to_string(),
            e.predicate.clone(),
            e.object.to_string(),
        ));
    }
    out
}

/// Facts removed and facts added going from `left` to `right`.
pub fn fact_diff(left: &BTreeSet<Fact>, right: &BTreeSet<Fact>) -> (BTreeSet<Fact>, BTreeSet<Fact>) {
    (
        left.difference(right).cloned().collect(),
        right.difference(left).cloned().collect(),
    )
}

/// Plays a change set (with CURIE node references, as diff emits) over a
/// fact set. Independent of the apply engine.
pub fn replay(start: &BTreeSet<Fact>, changes: &ChangeSet) -> Result<BTreeSet<Fact>, String> {
    let mut f = start.clone();
    let v = |r: &NodeRef| r.value().to_string();
    for change in changes {
        match &change.kind {
            ChangeKind::NodeRename {
                about_node,
                new_value,
                ..
            } => {
                let id = v(about_node);
                f.retain(|x| !matches!(x, Fact::Label(n, _) if *n == id));
                f.insert(Fact::Label(id, new_value.clone()));
            }
            ChangeKind::NodeObsoletion {
                about_node,
                replacement,
            } => {
                let id = v(about_node);
                f.insert(Fact::Deprecated(id.clone()));
                if let Some(r) = replacement {
                    f.retain(|x| !matches!(x, Fact::ReplacedBy(n, _) if *n == id));
                    f.insert(Fact::ReplacedBy(id, v(r)));
                }
            }
            ChangeKind::NodeDeletion { about_node } => {
                let id = v(about_node);
                f.retain(|x| match x {
                    Fact::Edge(s, _, o) => *s != id && *o != id,
                    other => other.about() != id,
                });
            }
            ChangeKind::ClassCreation {
                about_node,
                new_value,
            } => {
                let id = v(about_node.as_ref().ok_or("creation without id")?);
                f.insert(Fact::Node(id.clone()));
                if let Some(l) = new_value {
                    f.insert(Fact::Label(id, l.clone()));
                }
            }
            ChangeKind::SynonymReplacement {
                about_node,
                old_value,
                new_value,
            } => {
                let id = v(about_node);
                let old: Vec<Fact> = f
                    .iter()
                    .filter(|x| matches!(x, Fact::Synonym(n, s, _) if *n == id && s == old_value))
                    .cloned()
                    .collect();
                let [Fact::Synonym(_, _, scope)] = old.as_slice() else {
                    return Err(format!("replaced synonym {old_value} is not unique"));
                };
                f.remove(&old[0]);
                f.insert(Fact::Synonym(id, new_value.clone(), *scope));
            }
            ChangeKind::NewTextDefinition {
                about_node,
                new_value,
            }
            | ChangeKind::NodeTextDefinitionChange {
                about_node,
                new_value,
                ..
            } => {
                let id = v(about_node);
                f.retain(|x| !matches!(x, Fact::Definition(n, _) if *n == id));
                f.insert(Fact::Definition(id, new_value.clone()));
            }
            ChangeKind::RemoveTextDefinition { about_node } => {
                let id = v(about_node);
                f.retain(|x| !matches!(x, Fact::Definition(n, _) if *n == id));
            }
            ChangeKind::NewSynonym {
                about_node,
                new_value,
                scope,
            } => {
                let scope = scope.ok_or("diff output names every scope")?;
                f.insert(Fact::Synonym(v(about_node), new_value.clone(), scope));
            }
            ChangeKind::RemoveSynonym {
                about_node,
                old_value,
            } => {
                let id = v(about_node);
                f.retain(|x| !matches!(x, Fact::Synonym(n, s, _) if *n == id && s == old_value));
            }
            ChangeKind::EdgeCreation {
                subject,
                predicate,
                object,
            } => {
                f.insert(Fact::Edge(v(subject), v(predicate), v(object)));
            }
            ChangeKind::EdgeDeletion {
                subject,
                predicate,
                object,
            } => {
                f.remove(&Fact::Edge(v(subject), v(predicate), v(object)));
            }
            ChangeKind::NodeMove {
                about_node,
                old_value,
                new_value,
                predicate,
            } => {
                let (s, o1, o2) = (v(about_node), v(old_value), v(new_value));
                let p = match predicate {
                    Some(p) => v(p),
                    None => {
                        let found: Vec<&String> = f
                            .iter()
                            .filter_map(|x| match x {
                                Fact::Edge(a, p, b) if *a == s && *b == o1 => Some(p),
                                _ => None,
                            })
                            .collect();
                        match found.as_slice() {
                            [p] => (*p).clone(),
                            _ => return Err(format!("move of {s} from {o1} is ambiguous")),
                        }
                    }
                };
                f.remove(&Fact::Edge(s.clone(), p.clone(), o1));
                f.insert(Fact::Edge(s, p, o2));
            }
            ChangeKind::PredicateChange {
                subject,
                object,
                old_value,
                new_value,
            } => {
                f.remove(&Fact::Edge(v(subject), v(old_value), v(object)));
                f.insert(Fact::Edge(v(subject), v(new_value), v(object)));
            }
        }
    }
    Ok(f)
}

/// Residual raw edge changes that the coalescing rules could still merge.
pub fn mergeable_pairs(changes: &ChangeSet) -> Vec<String> {
    let mut deleted = Vec::new();
    let mut created = Vec::new();
    for c in changes {
        match &c.kind {
            ChangeKind::EdgeDeletion {
                subject,
                predicate,
                object,
            } => deleted.push((subject.value(), predicate.value(), object.value())),
            ChangeKind::EdgeCreation {
                subject,
                predicate,
                object,
            } => created.push((subject.value(), predicate.value(), object.value())),
            _ => {}
        }
    }
    let mut out = Vec::new();
    let unique = |d: &(&str, &str, &str), key: fn(&(&str, &str, &str)) -> (String, String)| {
        let k = key(d);
        let ds = deleted.iter().filter(|x| key(x) == k).count();
        let cs: Vec<_> = created.iter().filter(|x| key(x) == k).collect();
        ds == 1 && cs.len() == 1
    };
    for d in &deleted {
        if unique(d, |e| (e.0.to_string(), e.2.to_string())) {
            out.push(format!("predicate change on {d:?}"));
        }
        if unique(d, |e| (e.0.to_string(), e.1.to_string())) {
            out.push(format!("move on {d:?}"));
        }
    }
    out
}

/// Whether any field of any change holds a tab or line break.
pub fn has_tab_or_newline(cs: &ChangeSet) -> bool {
    let records: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_slice(&kgcl::serialization::to_json(cs)).unwrap();
    records
        .iter()
        .flat_map(|r| r.values())
        .filter_map(|v| v.as_str())
        .any(|s| s.contains(['\t', '\n', '\r']))
}

//! Computing the change set that turns one graph into another.
//!
//! Nodes are matched by id. The node phase compares each id present in
//! either graph; the edge phase compares the remaining edge sets and then
//! coalesces deletion/creation pairs into higher level changes:
//!
//! * same subject and object, different predicate: `PredicateChange`
//! * same subject and predicate, different object: `NodeMove`
//! * one synonym swapped for another in the same scope: `SynonymReplacement`
//!
//! A pair is only coalesced when it is the unique candidate on both sides.
//! The two edge rules are repeated until neither finds anything new.
//!
//! Output order: node changes by node id, then by a fixed per-type order
//! that keeps every change applicable; edge changes after all node changes,
//! by subject and predicate of the edge they remove or add, then coalesced
//! changes, deletions and creations in that order, then object.
//!
//! Some differences have no change type and are not reported: a label
//! removed outright, a node kind change, a node becoming un-deprecated or
//! losing its replacement, and pending change lists.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::graph::{Edge, Graph, Node, NodeId};
use crate::model::{Change, ChangeKind, ChangeSet, NodeRef, SynonymScope};
use crate::par;
use crate::serialization::{write_changes, Format, SerializationError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DiffOptions {
    pub coalesce_moves: bool,
    pub coalesce_predicate_changes: bool,
    pub coalesce_synonym_replacements: bool,
}

impl Default for DiffOptions {
    fn default() -> Self {
        DiffOptions {
            coalesce_moves: true,
            coalesce_predicate_changes: true,
            coalesce_synonym_replacements: true,
        }
    }
}

impl DiffOptions {
    pub fn raw() -> Self {
        DiffOptions {
            coalesce_moves: false,
            coalesce_predicate_changes: false,
            coalesce_synonym_replacements: false,
        }
    }
}

/// Diffs with the parallel engine when the `parallel` feature is enabled,
/// sequentially otherwise. Both produce identical output.
pub fn diff(left: &Graph, right: &Graph, opts: &DiffOptions) -> ChangeSet {
    run(left, right, opts, cfg!(feature = "parallel"))
}

pub fn diff_sequential(left: &Graph, right: &Graph, opts: &DiffOptions) -> ChangeSet {
    run(left, right, opts, false)
}

#[cfg(feature = "parallel")]
pub fn diff_parallel(left: &Graph, right: &Graph, opts: &DiffOptions) -> ChangeSet {
    run(left, right, opts, true)
}

pub fn format_diff(changes: &ChangeSet, format: Format) -> Result<Vec<u8>, SerializationError> {
    write_changes(changes, format)
}

fn curie(id: &NodeId) -> NodeRef {
    NodeRef::curie(id.as_str())
}

fn run(left: &Graph, right: &Graph, opts: &DiffOptions, parallel: bool) -> ChangeSet {
    let ids: Vec<&NodeId> = left
        .node_ids()
        .chain(right.node_ids())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let per_node = par::map(parallel, &ids, |id| {
        node_changes(left.node(id.as_str()), right.node(id.as_str()), opts)
    });

    let deleted: HashSet<&str> = ids
        .iter()
        .filter(|id| !right.contains_node(id.as_str()))
        .map(|id| id.as_str())
        .collect();
    let touches_deleted =
        |e: &Edge| deleted.contains(e.subject.as_str()) || deleted.contains(e.object.as_str());
    let left_edges: Vec<&Edge> = left.edges().collect();
    let right_edges: Vec<&Edge> = right.edges().collect();
    let removed = par::filter(parallel, &left_edges, |e| {
        !touches_deleted(e) && !right.contains_edge(e)
    });
    let added = par::filter(parallel, &right_edges, |e| {
        !left.contains_edge(e) || touches_deleted(e)
    });

    let mut changes: Vec<Change> = per_node.into_iter().flatten().map(Change::new).collect();
    changes.extend(edge_changes(left, right, removed, added, opts).into_iter().map(Change::new));
    ChangeSet::new(changes)
}

fn node_changes(left: Option<&Node>, right: Option<&Node>, opts: &DiffOptions) -> Vec<ChangeKind> {
    match (left, right) {
        (Some(l), None) => vec![ChangeKind::NodeDeletion { about_node: curie(&l.id) }],
        (None, Some(r)) => created(r),
        (Some(l), Some(r)) => modified(l, r, opts),
        (None, None) => Vec::new(),
    }
}

fn created(r: &Node) -> Vec<ChangeKind> {
    let about = || curie(&r.id);
    let mut out = vec![ChangeKind::ClassCreation {
        about_node: Some(about()),
        new_value: r.label.clone(),
    }];
    let synonyms: BTreeSet<(&str, SynonymScope)> =
        r.synonyms.iter().map(|s| (s.value.as_str(), s.scope)).collect();
    for (value, scope) in synonyms {
        out.push(ChangeKind::NewSynonym {
            about_node: about(),
            new_value: value.to_string(),
            scope: Some(scope),
        });
    }
    if let Some(d) = &r.definition {
        out.push(ChangeKind::NewTextDefinition {
            about_node: about(),
            new_value: d.clone(),
        });
    }
    if r.deprecated {
        out.push(ChangeKind::NodeObsoletion {
            about_node: about(),
            replacement: r.replaced_by.as_ref().map(curie),
        });
    }
    out
}

fn modified(l: &Node, r: &Node, opts: &DiffOptions) -> Vec<ChangeKind> {
    let about = || curie(&l.id);
    let mut out = Vec::new();

    if l.label != r.label {
        if let Some(new) = &r.label {
            out.push(ChangeKind::NodeRename {
                about_node: about(),
                old_value: l.label.clone(),
                new_value: new.clone(),
            });
        }
    }

    synonym_changes(l, r, opts, &mut out);

    match (&l.definition, &r.definition) {
        (Some(_), None) => out.push(ChangeKind::RemoveTextDefinition { about_node: about() }),
        (None, Some(d)) => out.push(ChangeKind::NewTextDefinition {
            about_node: about(),
            new_value: d.clone(),
        }),
        (Some(a), Some(b)) if a != b => out.push(ChangeKind::NodeTextDefinitionChange {
            about_node: about(),
            old_value: Some(a.clone()),
            new_value: b.clone(),
        }),
        _ => {}
    }

    let newly_deprecated = r.deprecated && !l.deprecated;
    let new_replacement = r.deprecated && r.replaced_by.is_some() && r.replaced_by != l.replaced_by;
    if newly_deprecated || new_replacement {
        out.push(ChangeKind::NodeObsoletion {
            about_node: about(),
            replacement: r.replaced_by.as_ref().map(curie),
        });
    }
    out
}

/// Removing a synonym removes every scope of that value, so values that
/// are removed in one scope but kept in another are removed and re-added.
fn synonym_changes(l: &Node, r: &Node, opts: &DiffOptions, out: &mut Vec<ChangeKind>) {
    let about = || curie(&l.id);
    let ls: BTreeSet<(&str, SynonymScope)> =
        l.synonyms.iter().map(|s| (s.value.as_str(), s.scope)).collect();
    let rs: BTreeSet<(&str, SynonymScope)> =
        r.synonyms.iter().map(|s| (s.value.as_str(), s.scope)).collect();
    let mut removed: BTreeSet<(&str, SynonymScope)> = ls.difference(&rs).copied().collect();
    let mut added: BTreeSet<(&str, SynonymScope)> = rs.difference(&ls).copied().collect();

    let mut replacements = Vec::new();
    if opts.coalesce_synonym_replacements {
        for scope in SynonymScope::ALL {
            let rem: Vec<&str> = removed.iter().filter(|s| s.1 == scope).map(|s| s.0).collect();
            let add: Vec<&str> = added.iter().filter(|s| s.1 == scope).map(|s| s.0).collect();
            if let ([old], [new]) = (rem.as_slice(), add.as_slice()) {
                if ls.iter().filter(|s| s.0 == *old).count() == 1 {
                    replacements.push((*old, *new, scope));
                }
            }
        }
        for (old, new, scope) in &replacements {
            removed.remove(&(*old, *scope));
            added.remove(&(*new, *scope));
        }
    }

    let removed_values: BTreeSet<&str> = removed.iter().map(|s| s.0).collect();
    for value in &removed_values {
        out.push(ChangeKind::RemoveSynonym {
            about_node: about(),
            old_value: value.to_string(),
        });
    }
    for (old, new, _) in replacements {
        out.push(ChangeKind::SynonymReplacement {
            about_node: about(),
            old_value: old.to_string(),
            new_value: new.to_string(),
        });
    }
    let readded = ls
        .intersection(&rs)
        .filter(|s| removed_values.contains(s.0))
        .copied();
    let additions: BTreeSet<(&str, SynonymScope)> = added.into_iter().chain(readded).collect();
    for (value, scope) in additions {
        out.push(ChangeKind::NewSynonym {
            about_node: about(),
            new_value: value.to_string(),
            scope: Some(scope),
        });
    }
}

/// Pairs of (removed, added) edges that are the only members of their
/// group on each side.
fn unique_pairs<'a, K: Ord>(
    removed: &BTreeSet<&'a Edge>,
    added: &BTreeSet<&'a Edge>,
    key: impl Fn(&'a Edge) -> K,
) -> Vec<(&'a Edge, &'a Edge)> {
    let mut groups: BTreeMap<K, (Vec<&'a Edge>, Vec<&'a Edge>)> = BTreeMap::new();
    for e in removed {
        groups.entry(key(e)).or_default().0.push(e);
    }
    for e in added {
        groups.entry(key(e)).or_default().1.push(e);
    }
    groups
        .into_values()
        .filter_map(|(d, a)| match (d.as_slice(), a.as_slice()) {
            ([d], [a]) => Some((*d, *a)),
            _ => None,
        })
        .collect()
}

fn edge_changes<'a>(
    left: &Graph,
    right: &Graph,
    removed: Vec<&'a Edge>,
    added: Vec<&'a Edge>,
    opts: &DiffOptions,
) -> Vec<ChangeKind> {
    let mut removed: BTreeSet<&Edge> = removed.into_iter().collect();
    let mut added: BTreeSet<&Edge> = added.into_iter().collect();
    // (sort key, tie-break rank, change)
    let mut out: Vec<(&Edge, u8, ChangeKind)> = Vec::new();

    loop {
        let mut progress = false;
        if opts.coalesce_predicate_changes {
            for (d, a) in unique_pairs(&removed, &added, |e| (&e.subject, &e.object)) {
                removed.remove(d);
                added.remove(a);
                progress = true;
                out.push((
                    d,
                    0,
                    ChangeKind::PredicateChange {
                        subject: curie(&d.subject),
                        object: curie(&d.object),
                        old_value: d.predicate_ref(),
                        new_value: a.predicate_ref(),
                    },
                ));
            }
        }
        if opts.coalesce_moves {
            for (d, a) in unique_pairs(&removed, &added, |e| (&e.subject, &e.predicate)) {
                removed.remove(d);
                added.remove(a);
                progress = true;
                let parallel_edges = |g: &Graph| {
                    g.edges_from(d.subject.as_str())
                        .filter(|e| e.object == d.object)
                        .count()
                };
                // the predicate can be left for apply to infer only when it
                // is unambiguous at every point in the change set
                let inferable = parallel_edges(left) == 1 && parallel_edges(right) == 0;
                out.push((
                    d,
                    0,
                    ChangeKind::NodeMove {
                        about_node: curie(&d.subject),
                        old_value: curie(&d.object),
                        new_value: curie(&a.object),
                        predicate: (!inferable).then(|| d.predicate_ref()),
                    },
                ));
            }
        }
        if !progress {
            break;
        }
    }

    for d in removed {
        out.push((
            d,
            1,
            ChangeKind::EdgeDeletion {
                subject: curie(&d.subject),
                predicate: d.predicate_ref(),
                object: curie(&d.object),
            },
        ));
    }
    for a in added {
        out.push((
            a,
            2,
            ChangeKind::EdgeCreation {
                subject: curie(&a.subject),
                predicate: a.predicate_ref(),
                object: curie(&a.object),
            },
        ));
    }
    out.sort_by(|(a, ra, _), (b, rb, _)| {
        (&a.subject, &a.predicate, ra, &a.object).cmp(&(&b.subject, &b.predicate, rb, &b.object))
    });
    out.into_iter().map(|(_, _, c)| c).collect()
}

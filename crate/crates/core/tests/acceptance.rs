//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{fact_diff, facts, random_applicable_changes, random_change_for, random_change_set, random_graph, replay, rng};
use kgcl::apply::{apply_change, apply_changeset, apply_pending, ApplyOptions, ApplyStatus, PendingSelector};
use kgcl::cnl::{parse_command, render_command};
use kgcl::diff::{diff, DiffOptions};
use kgcl::graph::{graph_equal, load, load_obo, save, Edge, Graph, Node, NodeId};
use kgcl::model::{Change, ChangeKind, ChangeSet, NodeRef, SynonymScope};
use kgcl::request::{extract, render_title};
use kgcl::serialization::{from_json, from_tsv, from_yaml, to_json, to_tsv, to_yaml, SerializationError};

const CATALOGUE_BUDGET: Duration = Duration::from_secs(1);
const MOVE_BUDGET: Duration = Duration::from_secs(1);
const SOUNDNESS_BUDGET: Duration = Duration::from_secs(60);
const SCALE_BUDGET: Duration = Duration::from_secs(10);

const SOUNDNESS_TRIALS: u64 = 1000;
const PROVISIONAL_TRIALS: usize = 200;
const SERIALIZATION_TRIALS: u64 = 500;

const SCALE_NODES: usize = 100_000;
const SCALE_EDGES_PER_NODE: usize = 3;
const SCALE_CHANGES: usize = 1000;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn read(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap()
}

type Outcome = Result<String, String>;

fn check(ok: bool, what: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what())
    }
}

fn within(elapsed: Duration, budget: Duration) -> Result<(), String> {
    check(elapsed < budget, || format!("took {elapsed:.2?}, budget {budget:?}"))
}

fn command_catalogue() -> Outcome {
    let start = Instant::now();
    let cases = [
        ("rename UBERON:0002398 from 'hand' to 'manus'", "NodeRename"),
        ("obsolete 'trachea'", "NodeObsoletion"),
        ("obsolete 'UBERON:0003126'", "NodeObsoletion"),
        ("delete node 'heart'", "NodeDeletion"),
        ("create 'digestive system'", "ClassCreation"),
        ("replace synonym 'intestine' with 'gut' for 'alimentary canal'", "SynonymReplacement"),
        ("add definition 'A muscular organ that pumps blood through the body' to 'heart'", "NewTextDefinition"),
        ("remove definition for 'liver'", "RemoveTextDefinition"),
        ("change definition of 'kidney' to 'An organ that filters blood to produce urine'", "NodeTextDefinitionChange"),
        ("create exact synonym 'thigh bone' for 'femur'", "NewSynonym"),
        ("remove synonym 'arm bone' for 'humerus'", "RemoveSynonym"),
        ("create edge 'hepatocyte' part_of 'liver'", "EdgeCreation"),
        ("delete edge 'hepatocyte' part_of 'lung'", "EdgeDeletion"),
        ("change relationship between 'stomach' and 'digestive system' from 'is_a' to 'part_of'", "PredicateChange"),
        ("rename ENVO:01000575 from 'wax' to 'oil'", "NodeRename"),
        ("obsolete EX:1234 with replacement EX:5678", "NodeObsoletion"),
    ];
    for (text, expected) in cases {
        let change = parse_command(text).map_err(|e| format!("{text}: {e}"))?;
        check(change.type_name() == expected, || {
            format!("{text}: parsed as {}", change.type_name())
        })?;
        let rendered = render_command(&change).map_err(|e| e.to_string())?;
        check(rendered == text, || format!("{text}: rendered as {rendered}"))?;
    }
    let rename = parse_command(cases[0].0).unwrap();
    check(
        rename.kind
            == ChangeKind::NodeRename {
                about_node: NodeRef::curie("UBERON:0002398"),
                old_value: Some("hand".into()),
                new_value: "manus".into(),
            },
        || format!("{rename:?}"),
    )?;
    within(start.elapsed(), CATALOGUE_BUDGET)?;
    Ok(format!("{} commands round-trip exactly in {:.2?}", cases.len(), start.elapsed()))
}

fn move_duality() -> Outcome {
    let start = Instant::now();
    let o1 = load(read("move_left.json").as_bytes()).map_err(|e| e.to_string())?;
    let o2 = load(read("move_right.json").as_bytes()).map_err(|e| e.to_string())?;

    let coalesced = diff(&o1, &o2, &DiffOptions::default());
    let expected_move = ChangeSet::new(vec![Change::new(ChangeKind::NodeMove {
        about_node: NodeRef::curie("E:5"),
        old_value: NodeRef::curie("C:3"),
        new_value: NodeRef::curie("B:2"),
        predicate: None,
    })]);
    check(coalesced == expected_move, || format!("coalesced diff was {coalesced:?}"))?;

    let raw_opts = DiffOptions {
        coalesce_moves: false,
        ..Default::default()
    };
    let raw = diff(&o1, &o2, &raw_opts);
    let edge = |o: &str| (NodeRef::curie("E:5"), NodeRef::label("is_a"), NodeRef::curie(o));
    let (s, p, o) = edge("C:3");
    let (s2, p2, o2r) = edge("B:2");
    let expected_raw = ChangeSet::new(vec![
        Change::new(ChangeKind::EdgeDeletion {
            subject: s,
            predicate: p,
            object: o,
        }),
        Change::new(ChangeKind::EdgeCreation {
            subject: s2,
            predicate: p2,
            object: o2r,
        }),
    ]);
    check(raw == expected_raw, || format!("raw diff was {raw:?}"))?;

    for cs in [&coalesced, &raw] {
        let mut g = o1.clone();
        let report = apply_changeset(&mut g, cs, &ApplyOptions::default());
        check(!report.has_failures(), || report.to_json())?;
        check(graph_equal(&g, &o2), || "applied diff differs from the right graph".into())?;
    }
    within(start.elapsed(), MOVE_BUDGET)?;
    Ok(format!("1 NodeMove coalesced, 1 deletion + 1 creation raw, both reproduce the right graph in {:.2?}", start.elapsed()))
}

/// Criteria 3 and 4 share their trials.
fn soundness_and_oracle() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut unsound = Vec::new();
    let mut discrepancies = Vec::new();
    let mut total_changes = 0;
    for seed in 0..SOUNDNESS_TRIALS {
        let mut r = rng(seed);
        let left = random_graph(&mut r, 50);
        let (cs, right) = random_applicable_changes(&mut r, &left, 20);
        total_changes += cs.len();
        let d = diff(&left, &right, &DiffOptions::default());
        let mut applied = left.clone();
        let report = apply_changeset(&mut applied, &d, &ApplyOptions::default());
        if report.has_failures() || !graph_equal(&applied, &right) {
            unsound.push(seed);
        }
        let (l, rf) = (facts(&left), facts(&right));
        match replay(&l, &d) {
            Ok(f) if fact_diff(&l, &f) == fact_diff(&l, &rf) => {}
            _ => discrepancies.push(seed),
        }
    }
    let elapsed = start.elapsed();
    let soundness = if !unsound.is_empty() {
        Err(format!("{} unsound trials, first seeds {:?}", unsound.len(), &unsound[..unsound.len().min(5)]))
    } else {
        within(elapsed, SOUNDNESS_BUDGET).map(|_| {
            format!("{SOUNDNESS_TRIALS} trials ({total_changes} changes) sound in {elapsed:.2?}")
        })
    };
    let oracle = if discrepancies.is_empty() {
        Ok(format!("{SOUNDNESS_TRIALS} trials agree with the atomic-fact oracle"))
    } else {
        Err(format!("{} discrepancies, first seeds {:?}", discrepancies.len(), &discrepancies[..discrepancies.len().min(5)]))
    };
    (soundness, oracle)
}

fn provisional() -> Outcome {
    let mut checked = 0;
    let mut seed = 0u64;
    let staged_opts = ApplyOptions {
        provisional: true,
        ..Default::default()
    };
    while checked < PROVISIONAL_TRIALS {
        seed += 1;
        check(seed < 100_000, || "could not generate enough applicable changes".into())?;
        let mut r = rng(seed);
        let g = random_graph(&mut r, 30);
        let change = random_change_for(&mut r, &g);
        let mut direct = g.clone();
        if apply_change(&mut direct, &change, &ApplyOptions::default()).status != ApplyStatus::Applied {
            continue;
        }
        let mut staged = g.clone();
        let stored = apply_change(&mut staged, &change, &staged_opts);
        if stored.status != ApplyStatus::StoredProvisional {
            // a creation, or an edge change whose subject is not in the graph
            continue;
        }
        let report = apply_pending(&mut staged, PendingSelector::All);
        check(!report.has_failures() && graph_equal(&staged, &direct), || {
            format!("seed {seed}: pending apply differs for {:?}", change.kind)
        })?;
        checked += 1;
    }
    Ok(format!("{checked} changes: provisional then pending equals direct"))
}

fn issue_to_synonym() -> Outcome {
    const VALUE: &str = " ZMYM2-related neurodevelopmental disorder with multiple anomalies";
    let expected = ChangeKind::NewSynonym {
        about_node: NodeRef::curie("MONDO:0859190"),
        new_value: VALUE.into(),
        scope: Some(SynonymScope::Exact),
    };
    for body in ["synonym_issue.md", "synonym_issue_comment.md"] {
        let r = extract(&read(body));
        check(r.trigger_found && r.errors.is_empty(), || format!("{body}: {r:?}"))?;
        let kinds: Vec<&ChangeKind> = r.changes.iter().map(|c| &c.kind).collect();
        check(kinds == vec![&expected], || format!("{body}: extracted {kinds:?}"))?;
    }

    let change = extract(&read("synonym_issue.md")).changes.changes.remove(0);
    let mut graph = load_obo(&read("synonym_before.obo")).map_err(|e| e.to_string())?;
    let entry = apply_change(&mut graph, &change, &ApplyOptions::default());
    check(entry.status == ApplyStatus::Applied, || entry.message.clone())?;
    let after = load_obo(&read("synonym_after.obo")).map_err(|e| e.to_string())?;
    check(graph_equal(&graph, &after), || "applied graph differs from the expected OBO".into())?;

    let saved: serde_json::Value = serde_json::from_slice(&save(&graph)).unwrap();
    let synonym = &saved["nodes"][0]["meta"]["synonyms"][0];
    let diff_line = read("synonym_after.obo")
        .lines()
        .find(|l| l.starts_with("synonym:"))
        .unwrap()
        .to_string();
    let quoted = diff_line.split('"').nth(1).unwrap();
    check(synonym["val"] == quoted && synonym["pred"] == "hasExactSynonym", || {
        format!("serialized synonym {synonym}")
    })?;

    let title = render_title(&change, Some(&graph));
    let want = format!(
        "Proposal: add synonym '{VALUE}' for neurodevelopmental-craniofacial syndrome with variable renal and cardiac abnormalities"
    );
    check(title == want, || format!("title was {title}"))?;
    check(
        render_title(&change, None) == format!("Proposal: add synonym '{VALUE}' for MONDO:0859190"),
        || "title without resolver".into(),
    )?;
    Ok("leading space preserved through extract, apply, save and title".into())
}

fn serialization() -> Outcome {
    let mut tsv_refused = 0;
    for seed in 0..SERIALIZATION_TRIALS {
        let cs = random_change_set(&mut rng(seed), 12, true);
        let via_json = from_json(&to_json(&cs)).map_err(|e| format!("seed {seed}: {e}"))?;
        let via_yaml = from_yaml(&to_yaml(&cs)).map_err(|e| format!("seed {seed}: {e}"))?;
        check(via_json == cs && via_yaml == cs, || format!("seed {seed}: JSON/YAML disagree"))?;
        let awkward = common::has_tab_or_newline(&cs);
        match to_tsv(&cs) {
            Ok(bytes) => {
                check(!awkward, || format!("seed {seed}: tab or newline written to TSV"))?;
                let back = from_tsv(&bytes).map_err(|e| format!("seed {seed}: {e}"))?;
                check(back == cs, || format!("seed {seed}: TSV disagrees"))?;
            }
            Err(SerializationError::TabularUnrepresentable { .. }) => {
                check(awkward, || format!("seed {seed}: TSV refused a plain change set"))?;
                tsv_refused += 1;
            }
            Err(e) => return Err(format!("seed {seed}: {e}")),
        }
    }
    Ok(format!(
        "{SERIALIZATION_TRIALS} change sets agree; TSV refused {tsv_refused} with tabs or line breaks"
    ))
}

fn scale_id(i: usize) -> NodeId {
    NodeId::new(format!("S:{i:06}")).unwrap()
}

const SCALE_PREDICATES: [&str; SCALE_EDGES_PER_NODE] = ["is_a", "part_of", "BFO:0000050"];

/// Node `i` has edges `(i, p_k, (i + 7k + 1) mod n)`.
fn scale_graph() -> Graph {
    let mut g = Graph::new();
    for i in 0..SCALE_NODES {
        g.insert_node(Node::new(scale_id(i)).with_label(format!("node {i}"))).unwrap();
    }
    for i in 0..SCALE_NODES {
        for (k, p) in SCALE_PREDICATES.iter().enumerate() {
            let o = (i + 7 * k + 1) % SCALE_NODES;
            g.add_edge(Edge::new(scale_id(i), *p, scale_id(o)).unwrap()).unwrap();
        }
    }
    g
}

/// One change on every 100th node; the neighbours they touch are never
/// themselves changed, so the changes cannot interact.
fn scale_changes() -> ChangeSet {
    let c = |i: usize| NodeRef::curie(scale_id(i).as_str());
    (0..SCALE_CHANGES)
        .map(|j| {
            let i = j * (SCALE_NODES / SCALE_CHANGES);
            let kind = match j % 10 {
                0 => ChangeKind::NodeRename {
                    about_node: c(i),
                    old_value: Some(format!("node {i}")),
                    new_value: format!("renamed {i}"),
                },
                1 => ChangeKind::NewSynonym {
                    about_node: c(i),
                    new_value: format!("alias {i}"),
                    scope: Some(SynonymScope::Exact),
                },
                2 => ChangeKind::NewTextDefinition {
                    about_node: c(i),
                    new_value: format!("definition of {i}"),
                },
                3 => ChangeKind::NodeObsoletion {
                    about_node: c(i),
                    replacement: None,
                },
                4 => ChangeKind::NodeObsoletion {
                    about_node: c(i),
                    replacement: Some(c(i + 1)),
                },
                5 => ChangeKind::NodeDeletion { about_node: c(i) },
                6 => ChangeKind::ClassCreation {
                    about_node: Some(NodeRef::curie(format!("NEW:{j:04}"))),
                    new_value: Some(format!("new {j}")),
                },
                7 => ChangeKind::NodeMove {
                    about_node: c(i),
                    old_value: c(i + 1),
                    new_value: c(i + 50),
                    predicate: None,
                },
                8 => ChangeKind::PredicateChange {
                    subject: c(i),
                    object: c(i + 8),
                    old_value: NodeRef::label("part_of"),
                    new_value: NodeRef::curie("RO:0002202"),
                },
                _ => ChangeKind::EdgeCreation {
                    subject: c(i),
                    predicate: NodeRef::curie("RO:0002131"),
                    object: c(i + 3),
                },
            };
            Change::new(kind)
        })
        .collect()
}

fn scale() -> Outcome {
    let left = scale_graph();
    let injected = scale_changes();
    let mut right = left.clone();
    let report = apply_changeset(&mut right, &injected, &ApplyOptions::default());
    check(!report.has_failures(), || "injected changes did not apply".into())?;
    check(left.edge_count() == SCALE_NODES * SCALE_EDGES_PER_NODE, || "edge count".into())?;

    let start = Instant::now();
    let found = diff(&left, &right, &DiffOptions::default());
    let elapsed = start.elapsed();

    let mut want: Vec<String> = injected.iter().map(|c| render_command(c).unwrap()).collect();
    let mut got: Vec<String> = found.iter().map(|c| render_command(c).unwrap()).collect();
    want.sort();
    got.sort();
    if got != want {
        let missing: Vec<_> = want.iter().filter(|w| !got.contains(w)).take(3).collect();
        let extra: Vec<_> = got.iter().filter(|g| !want.contains(g)).take(3).collect();
        return Err(format!("{} reported vs {} injected; missing {missing:?}; extra {extra:?}", got.len(), want.len()));
    }
    within(elapsed, SCALE_BUDGET)?;
    Ok(format!(
        "{} nodes / {} edges, {} changes recovered exactly in {elapsed:.2?}",
        left.node_count(),
        left.edge_count(),
        found.len()
    ))
}

fn main() -> ExitCode {
    let (soundness, oracle) = soundness_and_oracle();
    let results: Vec<(u8, &str, Option<Outcome>)> = vec![
        (1, "command catalogue parses and round-trips", Some(command_catalogue())),
        (2, "move diff/apply duality", Some(move_duality())),
        (3, "diff soundness over random trials", Some(soundness)),
        (4, "atomic-fact oracle equivalence", Some(oracle)),
        (5, "provisional mode equals direct apply", Some(provisional())),
        (6, "issue text to applied synonym", Some(issue_to_synonym())),
        (7, "JSON/YAML/TSV round trips", Some(serialization())),
        (8, "100k-node diff scale test", Some(scale())),
        (9, "release changelog reproduction (needs the GO release archive)", None),
    ];
    let mut failed = 0;
    for (n, name, outcome) in results {
        match outcome {
            Some(Ok(detail)) => println!("criterion {n}: PASS  {name}: {detail}"),
            Some(Err(detail)) => {
                failed += 1;
                println!("criterion {n}: FAIL  {name}: {detail}");
            }
            None => println!("criterion {n}: N/A   {name}: not attempted"),
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

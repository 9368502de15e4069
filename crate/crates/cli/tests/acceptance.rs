//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Frozen values were produced once by the brute-force oracle and are
//! checked against both the oracle and the optimized pipeline.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use ormspace::split::EdgeOrigin;
use ormspace::tradeoff::dominates;
use ormspace::validator::{check_assertions, oracle_enumerate, oracle_metrics, OracleError};
use ormspace::{
    cluster, emit_sql, enumerate, find_bridges, metric_vector, pareto, parse_model, radar, split,
    ClassStrategy, MappingCandidate, ModelGraph, ObjectModel, PinSet, SynthesisError,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MIXED_DDL: &str = "\
CREATE TABLE T_Person (
    personID INTEGER PRIMARY KEY,
    name VARCHAR(255),
    salary DOUBLE PRECISION,
    DType VARCHAR(64)
);

CREATE TABLE T_Student (
    studentID INTEGER PRIMARY KEY,
    name VARCHAR(255),
    university VARCHAR(255)
);

CREATE TABLE T_Manager (
    managerID INTEGER PRIMARY KEY,
    name VARCHAR(255),
    salary DOUBLE PRECISION,
    bonus DOUBLE PRECISION
);

CREATE TABLE T_Clerk (
    clerkID INTEGER PRIMARY KEY,
    desk VARCHAR(255),
    FOREIGN KEY (clerkID) REFERENCES T_Person (personID)
);
";

/// (TATI, NCT, NCRF, ANV, NIC, RIM)
const MIXED_VECTOR: [u64; 6] = [11, 6, 8, 1, 7, 1];
const SHARED_VECTOR: [u64; 6] = [8, 6, 5, 10, 16, 1];
const SHARED_FK_COUNT: usize = 1;

const PERSON_CANDIDATES: usize = 81;
const PERSON_CLASSES: usize = 49;
const CUSTOMER_ORDER_CANDIDATES: usize = 6;
const CUSTOMER_ORDER_CLASSES: usize = 6;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn models() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

fn load(name: &str) -> ObjectModel {
    parse_model(&fs::read_to_string(models().join(name)).unwrap()).unwrap()
}

fn pins(name: &str) -> PinSet {
    PinSet::from_json(&fs::read_to_string(models().join(name)).unwrap()).unwrap()
}

fn only(model: &ObjectModel, pins: &PinSet) -> Result<MappingCandidate, String> {
    let mut r = enumerate(model, pins).map_err(|e| e.to_string())?;
    ensure!(
        r.candidates.len() == 1,
        "expected one candidate, got {}",
        r.candidates.len()
    );
    Ok(r.candidates.remove(0))
}

fn stored(c: &MappingCandidate, table: &str) -> BTreeSet<String> {
    c.t_associate
        .get(table)
        .map(|v| v.iter().cloned().collect())
        .unwrap_or_default()
}

fn names(xs: &[&str]) -> BTreeSet<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn golden_mixed() -> Check {
    let start = Instant::now();
    let m = load("person.om");
    let c = only(&m, &pins("person-mixed.pins.json"))?;
    let elapsed = start.elapsed();
    ensure!(c.tables.len() == 4, "{} tables", c.tables.len());
    ensure!(
        stored(&c, "T_Person") == names(&["Person", "Employee"]),
        "T_Person stores {:?}",
        stored(&c, "T_Person")
    );
    ensure!(
        c.table("T_Person").unwrap().field("DType").is_some(),
        "T_Person lacks DType"
    );
    ensure!(
        c.foreign_keys.len() == 1,
        "{} foreign keys",
        c.foreign_keys.len()
    );
    let fk = &c.foreign_keys[0];
    ensure!(
        fk.from_table == "T_Clerk" && fk.to_table == "T_Person",
        "foreign key {fk:?}"
    );
    ensure!(
        !c.foreign_keys
            .iter()
            .any(|f| f.from_table == "T_Student" || f.from_table == "T_Manager"),
        "union tables carry constraints"
    );
    ensure!(
        emit_sql(&c) == MIXED_DDL,
        "DDL differs from the golden text"
    );

    // The command line path reproduces the same bytes.
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("mixed.jsonl");
    let bin = env!("CARGO_BIN_EXE_ormspace");
    let synth = Command::new(bin)
        .args(["synthesize", models().join("person.om").to_str().unwrap()])
        .args([
            "--pins",
            models().join("person-mixed.pins.json").to_str().unwrap(),
        ])
        .args(["--jsonl", stream.to_str().unwrap()])
        .output()
        .unwrap();
    ensure!(synth.status.success(), "synthesize failed");
    let sql = Command::new(bin)
        .args(["emit-sql", stream.to_str().unwrap()])
        .output()
        .unwrap();
    ensure!(
        sql.stdout == MIXED_DDL.as_bytes(),
        "emit-sql output differs from the golden text"
    );
    ensure!(elapsed < Duration::from_secs(1), "took {elapsed:?}");
    Ok(format!(
        "4 tables, 1 FK T_Clerk -> T_Person, golden DDL, {elapsed:.1?}"
    ))
}

fn shared_table_constraint() -> Check {
    let m = load("person.om");
    let c = only(&m, &pins("person-shared.pins.json"))?;
    let expected = names(&["Person", "Student", "Employee", "Clerk"]);
    ensure!(
        stored(&c, "T_Person") == expected,
        "T_Person stores {:?}",
        stored(&c, "T_Person")
    );
    ensure!(!c.foreign_keys.is_empty(), "no foreign key synthesized");
    ensure!(
        c.foreign_keys.len() == SHARED_FK_COUNT,
        "{} foreign keys",
        c.foreign_keys.len()
    );
    ensure!(
        c.foreign_keys
            .iter()
            .any(|f| f.from_table == "T_Manager" && f.to_table == "T_Person"),
        "joined class has no constraint"
    );
    Ok(format!(
        "{} FK from the joined T_Manager",
        c.foreign_keys.len()
    ))
}

fn metric_direction() -> Check {
    let m = load("person.om");
    let a = only(&m, &pins("person-mixed.pins.json"))?;
    let b = only(&m, &pins("person-shared.pins.json"))?;
    let (va, vb) = (metric_vector(&m, &a), metric_vector(&m, &b));
    ensure!(
        va == oracle_metrics(&m, &a) && vb == oracle_metrics(&m, &b),
        "oracle metrics disagree"
    );
    ensure!(
        va.aggregates() == MIXED_VECTOR,
        "mixed vector {:?}",
        va.aggregates()
    );
    ensure!(
        vb.aggregates() == SHARED_VECTOR,
        "shared vector {:?}",
        vb.aggregates()
    );
    ensure!(vb.anv > va.anv, "ANV");
    ensure!(va.ncrf > vb.ncrf, "NCRF");
    ensure!(va.tati > vb.tati, "TATI");
    Ok(format!(
        "ANV {} > {}, NCRF {} > {}, TATI {} > {}",
        vb.anv, va.anv, va.ncrf, vb.ncrf, va.tati, vb.tati
    ))
}

fn splitting() -> Check {
    let m = load("ecommerce.om");
    let links = m.classes.iter().filter(|c| c.parent.is_some()).count();
    ensure!(
        m.classes.len() == 15 && m.associations.len() == 9 && links == 7,
        "model shape {} classes, {} associations, {links} links",
        m.classes.len(),
        m.associations.len()
    );
    let start = Instant::now();
    let s = split(&m);
    let elapsed = start.elapsed();
    ensure!(s.components.len() == 3, "{} components", s.components.len());
    let removed: BTreeSet<String> = s.removed_bridges.iter().cloned().collect();
    ensure!(
        removed == names(&["ProductAsset", "ItemProduct"]),
        "removed {removed:?}"
    );
    ensure!(elapsed < Duration::from_millis(100), "took {elapsed:?}");
    Ok(format!(
        "3 components, bridges ProductAsset and ItemProduct, {elapsed:.1?}"
    ))
}

fn oracle_equivalence() -> Check {
    let start = Instant::now();
    let mut candidates = 0;
    for seed in 0..200 {
        let m = common::random_model(seed);
        let fast = enumerate(&m, &PinSet::default());
        let slow = oracle_enumerate(&m, &PinSet::default());
        let (fast, slow) = match (fast, slow) {
            (Ok(f), Ok(s)) => (f, s),
            (
                Err(SynthesisError::EmptySpace { .. }),
                Err(OracleError::Synthesis(SynthesisError::EmptySpace { .. })),
            ) => continue,
            _ => return Err(format!("seed {seed}: outcomes differ")),
        };
        ensure!(
            fast.candidates == slow.candidates,
            "seed {seed}: candidate lists differ"
        );
        for (i, c) in fast.candidates.iter().enumerate() {
            ensure!(
                metric_vector(&m, c) == oracle_metrics(&m, c),
                "seed {seed}, candidate {i}: metrics differ"
            );
            ensure!(
                check_assertions(c, &m).pass,
                "seed {seed}, candidate {i}: assertions fail"
            );
        }
        candidates += fast.candidates.len();
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(60), "took {elapsed:?}");
    Ok(format!(
        "200 models, {candidates} candidates, {elapsed:.1?}"
    ))
}

fn frozen_counts() -> Check {
    let mut detail = Vec::new();
    for (file, cands, classes) in [
        ("person.om", PERSON_CANDIDATES, PERSON_CLASSES),
        (
            "customer-order.om",
            CUSTOMER_ORDER_CANDIDATES,
            CUSTOMER_ORDER_CLASSES,
        ),
    ] {
        let m = load(file);
        let start = Instant::now();
        let r = enumerate(&m, &PinSet::default()).map_err(|e| e.to_string())?;
        let eq = cluster(&m, &r.candidates);
        let report = pareto(eq.clone());
        let _svg = radar(&report);
        for &i in &report.front {
            let _ = emit_sql(&report.classes[i].representative);
        }
        let elapsed = start.elapsed();
        let oracle = oracle_enumerate(&m, &PinSet::default()).map_err(|e| e.to_string())?;
        ensure!(
            oracle.candidates.len() == cands,
            "{file}: oracle counts {}",
            oracle.candidates.len()
        );
        ensure!(
            r.candidates.len() == cands,
            "{file}: {} candidates",
            r.candidates.len()
        );
        ensure!(
            cluster(&m, &oracle.candidates).len() == classes,
            "{file}: oracle class count"
        );
        ensure!(
            eq.len() == classes,
            "{file}: {} equivalence classes",
            eq.len()
        );
        ensure!(
            elapsed < Duration::from_secs(10),
            "{file}: pipeline took {elapsed:?}"
        );
        detail.push(format!("{file} {cands}/{classes} in {elapsed:.1?}"));
    }
    Ok(detail.join(", "))
}

fn report_files(dir: &Path) -> Vec<(PathBuf, Vec<u8>)> {
    let mut out = Vec::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.push((
                    p.strip_prefix(dir).unwrap().to_path_buf(),
                    fs::read(&p).unwrap(),
                ));
            }
        }
    }
    out.sort();
    out
}

fn determinism() -> Check {
    let bin = env!("CARGO_BIN_EXE_ormspace");
    let tmp = tempfile::tempdir().unwrap();
    let mut files = 0;
    for (file, extra) in [
        ("person.om", &[][..]),
        ("customer-order.om", &[][..]),
        ("ecommerce.om", &["--split"][..]),
    ] {
        let mut runs = Vec::new();
        for (k, parallel) in [(0, false), (1, false), (2, true)] {
            let out = tmp.path().join(format!("{file}-{k}"));
            let mut cmd = Command::new(bin);
            cmd.args([
                "report",
                models().join(file).to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]);
            cmd.args(extra);
            if parallel {
                cmd.arg("--parallel");
            }
            let o = cmd.output().unwrap();
            ensure!(
                o.status.success(),
                "{file}: report failed: {}",
                String::from_utf8_lossy(&o.stderr)
            );
            runs.push((o.stdout, report_files(&out)));
        }
        ensure!(runs[0] == runs[1], "{file}: two serial runs differ");
        ensure!(runs[0] == runs[2], "{file}: parallel run differs");
        let kinds: BTreeSet<String> = runs[0]
            .1
            .iter()
            .filter_map(|(p, _)| p.extension().map(|e| e.to_string_lossy().into_owned()))
            .collect();
        ensure!(
            kinds.is_superset(&names(&["json", "jsonl", "sql", "svg"])),
            "{file}: missing artifact kinds {kinds:?}"
        );
        files += runs[0].1.len();
    }
    Ok(format!(
        "{files} artifacts byte-identical across serial, repeated and parallel runs"
    ))
}

fn components(n: usize, pairs: &BTreeSet<(usize, usize)>, skip: Option<(usize, usize)>) -> usize {
    let mut seen = vec![false; n];
    let mut count = 0;
    for s in 0..n {
        if seen[s] {
            continue;
        }
        count += 1;
        seen[s] = true;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &(a, b) in pairs {
                if Some((a, b)) == skip {
                    continue;
                }
                let v = if a == u {
                    b
                } else if b == u {
                    a
                } else {
                    continue;
                };
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    count
}

fn properties() -> Check {
    let mut spaces = 0;
    for seed in 0..200 {
        let m = common::random_model(seed);
        let Ok(r) = enumerate(&m, &PinSet::default()) else {
            continue;
        };
        spaces += 1;
        let classes = cluster(&m, &r.candidates);
        let members: usize = classes.iter().map(|c| c.member_count).sum();
        ensure!(
            members == r.candidates.len(),
            "seed {seed}: clustering is not a partition"
        );
        let report = pareto(classes);
        ensure!(!report.front.is_empty(), "seed {seed}: empty front");
        let aggs: Vec<[u64; 6]> = report
            .classes
            .iter()
            .map(|c| c.vector.aggregates())
            .collect();
        let naive: Vec<usize> = (0..aggs.len())
            .filter(|&i| {
                !(0..aggs.len()).any(|j| {
                    (0..6).all(|k| aggs[j][k] <= aggs[i][k])
                        && (0..6).any(|k| aggs[j][k] < aggs[i][k])
                })
            })
            .collect();
        ensure!(
            report.front == naive,
            "seed {seed}: front differs from the quadratic check"
        );
        ensure!(
            report
                .front
                .iter()
                .all(|&i| !aggs.iter().any(|o| dominates(o, &aggs[i]))),
            "seed {seed}: dominated class on the front"
        );
        for a in 0..aggs.len() {
            for b in 0..aggs.len() {
                let raw = aggs[a].iter().zip(&aggs[b]).map(|(x, y)| x <= y);
                let scaled = report.normalized[a]
                    .iter()
                    .zip(&report.normalized[b])
                    .map(|(x, y)| x <= y);
                ensure!(
                    raw.eq(scaled),
                    "seed {seed}: normalization reorders a metric"
                );
            }
        }

        let mut bare = m.clone();
        bare.associations.clear();
        if let Ok(rb) = enumerate(&bare, &PinSet::default()) {
            for c in &rb.candidates {
                let union_only = c.assignment.classes.values().all(|s| {
                    matches!(
                        s,
                        ClassStrategy::OwnTable
                            | ClassStrategy::UnionSubclass
                            | ClassStrategy::Distribute
                    )
                });
                if union_only {
                    ensure!(
                        metric_vector(&bare, c).rim == 0,
                        "seed {seed}: union-only candidate has constraints"
                    );
                }
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let graphs = 2000;
    for g_no in 0..graphs {
        let n = rng.gen_range(1..=12);
        let mut g = ModelGraph::with_nodes((0..n).map(|i| format!("N{i}")));
        for k in 0..rng.gen_range(0..=2 * n) {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            g.add_edge(
                a,
                b,
                EdgeOrigin::Association {
                    name: format!("E{k}"),
                    many_to_many: true,
                },
            );
        }
        let pairs: BTreeSet<(usize, usize)> = g
            .edges
            .iter()
            .filter(|e| e.a != e.b)
            .map(|e| (e.a.min(e.b), e.a.max(e.b)))
            .collect();
        let base = components(n, &pairs, None);
        let expected: Vec<(usize, usize)> = pairs
            .iter()
            .copied()
            .filter(|&p| components(n, &pairs, Some(p)) > base)
            .collect();
        ensure!(
            find_bridges(&g) == expected,
            "graph {g_no}: bridges differ from remove-and-test"
        );
    }
    Ok(format!("{spaces} design spaces, {graphs} graphs"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("golden mixed mapping of the person model", golden_mixed),
        (
            "shared-table mapping gains a constraint",
            shared_table_constraint,
        ),
        (
            "metric direction between the two person mappings",
            metric_direction,
        ),
        ("ecommerce splits into three components", splitting),
        (
            "synthesizer agrees with the oracle on 200 random models",
            oracle_equivalence,
        ),
        (
            "frozen candidate and class counts, pipeline time",
            frozen_counts,
        ),
        ("byte-identical reports", determinism),
        ("property suite", properties),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panicked".to_string()))
        });
        match outcome {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}

//! Independent checks on mapping candidates.
//!
//! Nothing here calls into the schema builder or the metrics module. The
//! assertions and the [`oracle`] recompute everything from the candidate's
//! relations (`tAssociate`, `fAssociate`, foreign keys) and the model.

pub mod oracle;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::mapping::{FieldKind, MappingCandidate};
use crate::model::ObjectModel;

pub use oracle::{oracle_enumerate, oracle_metrics, OracleError, ORACLE_MAX_CLASSES};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<String>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct AssertionReport {
    /// Keys `A1` to `A5`, always all present.
    pub per_assertion: BTreeMap<String, Vec<Violation>>,
    pub pass: bool,
}

impl AssertionReport {
    pub fn violations(&self) -> impl Iterator<Item = (&str, &Violation)> {
        self.per_assertion
            .iter()
            .flat_map(|(k, vs)| vs.iter().map(move |v| (k.as_str(), v)))
    }
}

fn violation(
    table: Option<&str>,
    class: Option<&str>,
    field: Option<&str>,
    message: String,
) -> Violation {
    Violation {
        table: table.map(str::to_string),
        class: class.map(str::to_string),
        field: field.map(str::to_string),
        message,
    }
}

/// Ancestors of `class`, nearest first. Stops on unknown names and cycles.
pub(crate) fn lineage(model: &ObjectModel, class: &str) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let mut cur = model.class(class).and_then(|c| c.parent.clone());
    while let Some(p) = cur {
        if out.contains(&p) || p == class {
            break;
        }
        cur = model.class(&p).and_then(|c| c.parent.clone());
        out.push(p);
    }
    out
}

/// Tables reachable from the tables listing `class` in `tAssociate` by
/// following foreign keys declared on a primary key.
pub(crate) fn store_of(cand: &MappingCandidate, class: &str) -> BTreeSet<String> {
    let mut store: BTreeSet<String> = cand
        .t_associate
        .iter()
        .filter(|(_, cs)| cs.iter().any(|c| c == class))
        .map(|(t, _)| t.clone())
        .collect();
    loop {
        let next: Vec<String> = cand
            .foreign_keys
            .iter()
            .filter(|fk| store.contains(&fk.from_table))
            .filter(|fk| {
                cand.tables
                    .iter()
                    .any(|t| t.name == fk.from_table && t.primary_key == fk.from_field)
            })
            .map(|fk| fk.to_table.clone())
            .filter(|t| !store.contains(t))
            .collect();
        if next.is_empty() {
            return store;
        }
        store.extend(next);
    }
}

/// Evaluates the five structural assertions on one candidate:
///
/// - A1: no abstract class is associated with a table.
/// - A2: every attribute field materializes an attribute of a class in the
///   table's closure, i.e. of a concrete class reading the table or one of
///   its ancestors. Other fields are keys, references or the discriminator.
/// - A3: every concrete class is stored somewhere.
/// - A4: every non-id attribute a concrete class owns or inherits is
///   materialized in a table the class reads.
/// - A5: every foreign key targets an existing primary key.
pub fn check_assertions(cand: &MappingCandidate, model: &ObjectModel) -> AssertionReport {
    let mut per: BTreeMap<String, Vec<Violation>> = ["A1", "A2", "A3", "A4", "A5"]
        .iter()
        .map(|k| (k.to_string(), Vec::new()))
        .collect();

    for (table, classes) in &cand.t_associate {
        for c in classes {
            let bad = match model.class(c) {
                Some(cls) => cls
                    .is_abstract
                    .then(|| format!("abstract class {c} is stored in {table}")),
                None => Some(format!("unknown class {c} is stored in {table}")),
            };
            if let Some(msg) = bad {
                per.get_mut("A1")
                    .unwrap()
                    .push(violation(Some(table), Some(c), None, msg));
            }
        }
    }

    let concrete: Vec<&str> = model
        .classes
        .iter()
        .filter(|c| !c.is_abstract)
        .map(|c| c.name.as_str())
        .collect();
    let stores: BTreeMap<&str, BTreeSet<String>> =
        concrete.iter().map(|&c| (c, store_of(cand, c))).collect();

    for table in &cand.tables {
        let mut closure: BTreeSet<String> = BTreeSet::new();
        for (&c, store) in &stores {
            if store.contains(&table.name) {
                closure.insert(c.to_string());
                closure.extend(lineage(model, c));
            }
        }
        for f in &table.fields {
            if f.kind != FieldKind::AttributeField {
                continue;
            }
            let fa = cand
                .f_associate
                .iter()
                .find(|fa| fa.table == table.name && fa.field == f.name);
            let Some(fa) = fa else {
                per.get_mut("A2").unwrap().push(violation(
                    Some(&table.name),
                    None,
                    Some(&f.name),
                    "attribute field without fAssociate entry".to_string(),
                ));
                continue;
            };
            let declared = model
                .class(&fa.class)
                .is_some_and(|c| c.attr_set.iter().any(|a| a.name == fa.attr));
            if !declared || !closure.contains(&fa.class) {
                per.get_mut("A2").unwrap().push(violation(
                    Some(&table.name),
                    Some(&fa.class),
                    Some(&f.name),
                    format!(
                        "{}.{} is outside the closure of {}",
                        fa.class, fa.attr, table.name
                    ),
                ));
            }
        }
    }

    for &c in &concrete {
        if !cand
            .t_associate
            .values()
            .any(|cs| cs.iter().any(|x| x == c))
        {
            per.get_mut("A3").unwrap().push(violation(
                None,
                Some(c),
                None,
                format!("concrete class {c} is not stored"),
            ));
        }
    }

    for &c in &concrete {
        let store = &stores[c];
        let mut owners = vec![c.to_string()];
        owners.extend(lineage(model, c));
        for owner in &owners {
            let Some(cls) = model.class(owner) else {
                continue;
            };
            for a in cls.attr_set.iter().filter(|a| a.name != cls.id) {
                let present = cand
                    .f_associate
                    .iter()
                    .any(|fa| store.contains(&fa.table) && fa.class == *owner && fa.attr == a.name);
                if !present {
                    per.get_mut("A4").unwrap().push(violation(
                        None,
                        Some(c),
                        None,
                        format!("{owner}.{} is not readable for {c}", a.name),
                    ));
                }
            }
        }
    }

    for fk in &cand.foreign_keys {
        let from_ok = cand
            .tables
            .iter()
            .any(|t| t.name == fk.from_table && t.fields.iter().any(|f| f.name == fk.from_field));
        let to_ok = cand
            .tables
            .iter()
            .any(|t| t.name == fk.to_table && t.primary_key == fk.to_field);
        if !from_ok || !to_ok {
            per.get_mut("A5").unwrap().push(violation(
                Some(&fk.from_table),
                None,
                Some(&fk.from_field),
                format!(
                    "foreign key to {} ({}) has no matching primary key",
                    fk.to_table, fk.to_field
                ),
            ));
        }
    }

    let pass = per.values().all(Vec::is_empty);
    AssertionReport {
        per_assertion: per,
        pass,
    }
}

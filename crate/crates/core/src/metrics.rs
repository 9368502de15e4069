//! Quality metrics of a mapping candidate.
//!
//! All metrics are structural and depend only on `tAssociate`, `fAssociate`
//! and the foreign keys, never on table or field names. For a concrete
//! class `c`, `store(c)` is its host table followed by the chain of tables
//! reached through joined-subclass keys.
//!
//! | metric | per class `c` |
//! |--------|---------------|
//! | TATI | distinct tables in `store(d)` over concrete `d` in `c`'s subtree |
//! | NCT  | `|store(c)|`, concrete classes only |
//! | NCRF | fields materializing a non-id attribute declared by `c` |
//! | ANV  | attribute fields in `store(c)` owned by neither `c` nor an ancestor |
//! | NIC  | other classes with attributes materialized in `store(c)` |
//! | RIM  | schema level: number of foreign keys |

use std::collections::{BTreeSet, HashMap};

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::mapping::{FieldKind, MappingCandidate};
use crate::model::{ObjectModel, UnknownEntity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub tati: u64,
    pub nct: u64,
    pub ncrf: u64,
    pub anv: u64,
    pub nic: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MetricVector {
    pub tati: u64,
    pub nct: u64,
    pub ncrf: u64,
    pub anv: u64,
    pub nic: u64,
    pub rim: u64,
    pub per_class: IndexMap<String, ClassMetrics>,
}

pub const METRIC_NAMES: [&str; 6] = ["TATI", "NCT", "NCRF", "ANV", "NIC", "RIM"];

impl MetricVector {
    /// The six schema-level aggregates in (TATI, NCT, NCRF, ANV, NIC, RIM) order.
    pub fn aggregates(&self) -> [u64; 6] {
        [self.tati, self.nct, self.ncrf, self.anv, self.nic, self.rim]
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("metric vector serializes")
    }
}

/// Lookup structure over one candidate.
struct Layout<'a> {
    model: &'a ObjectModel,
    cand: &'a MappingCandidate,
    host: HashMap<&'a str, &'a str>,
    joined_to: HashMap<&'a str, &'a str>,
}

impl<'a> Layout<'a> {
    fn new(model: &'a ObjectModel, cand: &'a MappingCandidate) -> Self {
        let mut host = HashMap::new();
        for (table, classes) in &cand.t_associate {
            for c in classes {
                host.insert(c.as_str(), table.as_str());
            }
        }
        let mut joined_to = HashMap::new();
        for fk in &cand.foreign_keys {
            let from_key = cand
                .table(&fk.from_table)
                .and_then(|t| t.field(&fk.from_field))
                .is_some_and(|f| f.kind == FieldKind::KeyField);
            if from_key {
                joined_to.insert(fk.from_table.as_str(), fk.to_table.as_str());
            }
        }
        Self {
            model,
            cand,
            host,
            joined_to,
        }
    }

    fn store(&self, class: &str) -> Vec<&'a str> {
        let mut out = Vec::new();
        let mut cur = self.host.get(class).copied();
        while let Some(t) = cur {
            if out.contains(&t) {
                break;
            }
            out.push(t);
            cur = self.joined_to.get(t).copied();
        }
        out
    }

    fn check(&self, class: &str) -> Result<(), UnknownEntity> {
        self.model
            .class(class)
            .map(|_| ())
            .ok_or_else(|| UnknownEntity(class.to_string()))
    }

    fn subtree_concrete(&self, class: &str) -> Vec<&'a str> {
        self.model
            .classes
            .iter()
            .filter(|d| !d.is_abstract)
            .filter(|d| {
                d.name == class
                    || self
                        .model
                        .hierarchy_of(&d.name)
                        .unwrap_or_default()
                        .iter()
                        .any(|a| a == class)
            })
            .map(|d| d.name.as_str())
            .collect()
    }

    /// Owner class of every attribute field in `table`.
    fn attribute_owners(&self, table: &str) -> impl Iterator<Item = &'a str> + '_ {
        self.cand
            .table(table)
            .into_iter()
            .flat_map(|t| t.fields.iter())
            .filter(|f| f.kind == FieldKind::AttributeField)
            .filter_map(|f| f.source.as_ref().map(|s| s.class.as_str()))
    }

    fn ncrf(&self, class: &str) -> u64 {
        let Some(c) = self.model.class(class) else {
            return 0;
        };
        let own: BTreeSet<&str> = c.non_id_attributes().map(|a| a.name.as_str()).collect();
        self.cand
            .f_associate
            .iter()
            .filter(|fa| fa.class == class && own.contains(fa.attr.as_str()))
            .count() as u64
    }

    fn tati(&self, class: &str) -> u64 {
        let tables: BTreeSet<&str> = self
            .subtree_concrete(class)
            .into_iter()
            .flat_map(|d| self.store(d))
            .collect();
        tables.len() as u64
    }

    fn class_metrics(&self, class: &str) -> ClassMetrics {
        let c = self.model.class(class).expect("class exists");
        let mut m = ClassMetrics {
            tati: self.tati(class),
            ncrf: self.ncrf(class),
            ..Default::default()
        };
        if c.is_abstract {
            return m;
        }
        let store = self.store(class);
        let mut lineage: BTreeSet<String> = self
            .model
            .hierarchy_of(class)
            .unwrap_or_default()
            .into_iter()
            .collect();
        lineage.insert(class.to_string());
        let mut others = BTreeSet::new();
        m.nct = store.len() as u64;
        for t in &store {
            for owner in self.attribute_owners(t) {
                if !lineage.contains(owner) {
                    m.anv += 1;
                }
                if owner != class {
                    others.insert(owner);
                }
            }
        }
        m.nic = others.len() as u64;
        m
    }
}

/// NCRF of one class: the number of relational fields that materialize one
/// of its own non-id attributes.
pub fn ncrf(
    model: &ObjectModel,
    cand: &MappingCandidate,
    class: &str,
) -> Result<u64, UnknownEntity> {
    let layout = Layout::new(model, cand);
    layout.check(class)?;
    Ok(layout.ncrf(class))
}

/// TATI of one class: tables touched by a polymorphic query over it.
pub fn tati(
    model: &ObjectModel,
    cand: &MappingCandidate,
    class: &str,
) -> Result<u64, UnknownEntity> {
    let layout = Layout::new(model, cand);
    layout.check(class)?;
    Ok(layout.tati(class))
}

pub fn class_metrics(
    model: &ObjectModel,
    cand: &MappingCandidate,
    class: &str,
) -> Result<ClassMetrics, UnknownEntity> {
    let layout = Layout::new(model, cand);
    layout.check(class)?;
    Ok(layout.class_metrics(class))
}

pub fn metric_vector(model: &ObjectModel, cand: &MappingCandidate) -> MetricVector {
    let layout = Layout::new(model, cand);
    let mut v = MetricVector {
        rim: cand.foreign_keys.len() as u64,
        ..Default::default()
    };
    for c in &model.classes {
        let m = layout.class_metrics(&c.name);
        v.tati += m.tati;
        v.nct += m.nct;
        v.ncrf += m.ncrf;
        v.anv += m.anv;
        v.nic += m.nic;
        v.per_class.insert(c.name.clone(), m);
    }
    v
}

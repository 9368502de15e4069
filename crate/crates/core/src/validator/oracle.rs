//! Brute-force reference implementation of enumeration and metrics.
//!
//! Written for obviousness, not speed: every assignment of the full strategy
//! product is built from scratch by name lookups, nothing is cached and
//! nothing is pruned. Test suites compare the optimized code against it.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use indexmap::IndexMap;
use thiserror::Error;

use crate::mapping::{
    AssociationStrategy, AttrRef, ClassStrategy, Field, FieldAssociation, FieldKind, ForeignKey,
    MappingCandidate, StrategyAssignment, Table,
};
use crate::metrics::{ClassMetrics, MetricVector};
use crate::model::{Association, Class, Multiplicity, ObjectModel};
use crate::synth::{PinSet, Preset, SynthesisError, SynthesisResult};

use super::{lineage, store_of};

pub const ORACLE_MAX_CLASSES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("oracle is limited to {ORACLE_MAX_CLASSES} classes, model has {0}")]
    TooLarge(usize),
    #[error(transparent)]
    Synthesis(#[from] SynthesisError),
}

fn class_options(c: &Class) -> Vec<ClassStrategy> {
    use ClassStrategy::*;
    if c.parent.is_none() && !c.is_abstract {
        vec![OwnTable]
    } else if c.parent.is_none() {
        vec![Distribute]
    } else if !c.is_abstract {
        vec![MergeUp, JoinedSubclass, UnionSubclass]
    } else {
        vec![MergeUp, Distribute]
    }
}

fn assoc_options(a: &Association) -> Vec<AssociationStrategy> {
    use AssociationStrategy::*;
    match (a.src_multiplicity, a.dst_multiplicity) {
        (Multiplicity::Many, Multiplicity::Many) => vec![OwnAssociationTable],
        (Multiplicity::One, Multiplicity::One) => vec![
            OwnAssociationTable,
            ForeignKeyEmbedding,
            MergeIntoSingleTable,
        ],
        _ => vec![OwnAssociationTable, ForeignKeyEmbedding],
    }
}

fn pin_class(
    options: &mut BTreeMap<String, Vec<ClassStrategy>>,
    pinned: &mut BTreeSet<String>,
    model: &ObjectModel,
    name: &str,
    s: ClassStrategy,
) -> Result<(), SynthesisError> {
    let c = model
        .class(name)
        .ok_or_else(|| SynthesisError::UnknownEntity(name.to_string()))?;
    if !class_options(c).contains(&s) {
        return Err(SynthesisError::IllegalPin {
            entity: name.to_string(),
            strategy: s.to_string(),
        });
    }
    if pinned.contains(name) && options[name] != [s] {
        return Err(SynthesisError::PinConflict(name.to_string()));
    }
    options.insert(name.to_string(), vec![s]);
    pinned.insert(name.to_string());
    Ok(())
}

/// Every feasible candidate of the pinned space, in the same order as
/// [`crate::synth::enumerate`]: assignments counted like an odometer over
/// classes (declaration order) then associations, last entity fastest.
pub fn oracle_enumerate(
    model: &ObjectModel,
    pins: &PinSet,
) -> Result<SynthesisResult, OracleError> {
    let start = Instant::now();
    if model.classes.len() > ORACLE_MAX_CLASSES {
        return Err(OracleError::TooLarge(model.classes.len()));
    }
    let diags = crate::model::validate_model(model);
    if !diags.is_empty() {
        return Err(SynthesisError::InvalidModel(diags).into());
    }

    let mut class_opts: BTreeMap<String, Vec<ClassStrategy>> = model
        .classes
        .iter()
        .map(|c| (c.name.clone(), class_options(c)))
        .collect();
    let mut assoc_opts: BTreeMap<String, Vec<AssociationStrategy>> = model
        .associations
        .iter()
        .map(|a| (a.name.clone(), assoc_options(a)))
        .collect();
    let mut pinned: BTreeSet<String> = BTreeSet::new();
    for (root, preset) in &pins.presets {
        let r = model
            .class(root)
            .ok_or_else(|| SynthesisError::UnknownEntity(root.clone()))?;
        if r.parent.is_some() {
            return Err(SynthesisError::NotARoot(root.clone()).into());
        }
        for c in &model.classes {
            if !lineage(model, &c.name).contains(root) {
                continue;
            }
            let s = match (preset, c.is_abstract) {
                (Preset::SR, _) => ClassStrategy::MergeUp,
                (Preset::CCR, false) => ClassStrategy::UnionSubclass,
                (Preset::CCR, true) => ClassStrategy::Distribute,
                (Preset::CR, false) => ClassStrategy::JoinedSubclass,
                (Preset::CR, true) => ClassStrategy::MergeUp,
            };
            pin_class(&mut class_opts, &mut pinned, model, &c.name, s)?;
        }
    }
    for (name, s) in &pins.classes {
        pin_class(&mut class_opts, &mut pinned, model, name, *s)?;
    }
    for (name, s) in &pins.assocs {
        let a = model
            .association(name)
            .ok_or_else(|| SynthesisError::UnknownEntity(name.clone()))?;
        if !assoc_options(a).contains(s) {
            return Err(SynthesisError::IllegalPin {
                entity: name.clone(),
                strategy: s.to_string(),
            }
            .into());
        }
        assoc_opts.insert(name.clone(), vec![*s]);
    }

    // Odometer over option indices.
    let mut sizes: Vec<usize> = model
        .classes
        .iter()
        .map(|c| class_opts[&c.name].len())
        .collect();
    sizes.extend(model.associations.iter().map(|a| assoc_opts[&a.name].len()));
    let total: u64 = sizes.iter().map(|&s| s as u64).product();
    let mut digits = vec![0usize; sizes.len()];
    let mut candidates = Vec::new();
    for _ in 0..total {
        let mut assignment = StrategyAssignment::default();
        for (i, c) in model.classes.iter().enumerate() {
            assignment
                .classes
                .insert(c.name.clone(), class_opts[&c.name][digits[i]]);
        }
        for (j, a) in model.associations.iter().enumerate() {
            let i = model.classes.len() + j;
            assignment
                .assocs
                .insert(a.name.clone(), assoc_opts[&a.name][digits[i]]);
        }
        if let Some(cand) = build_literally(model, &assignment) {
            candidates.push(cand);
        }
        for i in (0..digits.len()).rev() {
            digits[i] += 1;
            if digits[i] < sizes[i] {
                break;
            }
            digits[i] = 0;
        }
    }

    if candidates.is_empty() {
        return Err(SynthesisError::EmptySpace { total }.into());
    }
    let pruned = total - candidates.len() as u64;
    Ok(SynthesisResult {
        model: model.name.clone(),
        candidates,
        total_assignments: total,
        pruned,
        elapsed: start.elapsed(),
    })
}

fn column_type(dtype: &str) -> String {
    match dtype {
        "Integer" => "INTEGER",
        "Real" => "DOUBLE PRECISION",
        "Bool" => "BOOLEAN",
        "String" => "VARCHAR(255)",
        _ => "VARCHAR(255)",
    }
    .to_string()
}

fn snake(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::new();
    for i in 0..chars.len() {
        let c = chars[i];
        if i > 0 && c.is_uppercase() {
            let prev = chars[i - 1];
            let next_is_lower = i + 1 < chars.len() && chars[i + 1].is_lowercase();
            if prev.is_lowercase()
                || prev.is_ascii_digit()
                || (prev.is_uppercase() && next_is_lower)
            {
                out.push('_');
            }
        }
        for l in c.to_lowercase() {
            out.push(l);
        }
    }
    out
}

struct OTable {
    founder: String,
    name: String,
    fields: Vec<Field>,
    pk: String,
    stored: Vec<String>,
}

fn taken(t: &OTable, name: &str) -> bool {
    name == "DType" || t.fields.iter().any(|f| f.name == name)
}

fn pick_name(t: &OTable, first: String, second: String) -> String {
    if !taken(t, &first) {
        return first;
    }
    if !taken(t, &second) {
        return second;
    }
    let mut k = 2;
    loop {
        let n = format!("{second}_{k}");
        if !taken(t, &n) {
            return n;
        }
        k += 1;
    }
}

fn non_id(c: &Class) -> Vec<(String, String)> {
    c.attr_set
        .iter()
        .filter(|a| a.name != c.id)
        .map(|a| (a.name.clone(), a.dtype.clone()))
        .collect()
}

fn id_type(c: &Class) -> String {
    let dtype = c
        .attr_set
        .iter()
        .find(|a| a.name == c.id)
        .map(|a| a.dtype.clone())
        .unwrap_or_else(|| "Integer".to_string());
    column_type(&dtype)
}

fn decl_pos(model: &ObjectModel, class: &str) -> usize {
    model
        .classes
        .iter()
        .position(|c| c.name == class)
        .expect("known class")
}

fn in_subtree(model: &ObjectModel, d: &str, c: &str) -> bool {
    d == c || lineage(model, d).iter().any(|a| a == c)
}

/// Concrete classes at or under `c`, declaration order.
fn concrete_under(model: &ObjectModel, c: &str) -> Vec<String> {
    model
        .classes
        .iter()
        .filter(|d| !d.is_abstract && in_subtree(model, &d.name, c))
        .map(|d| d.name.clone())
        .collect()
}

fn host_of(model: &ObjectModel, a: &StrategyAssignment, c: &str) -> Result<Option<String>, ()> {
    let parent = model.class(c).and_then(|x| x.parent.clone());
    match a.classes[c] {
        ClassStrategy::Distribute => Ok(None),
        ClassStrategy::OwnTable | ClassStrategy::UnionSubclass => Ok(Some(c.to_string())),
        ClassStrategy::MergeUp => {
            let p = parent.ok_or(())?;
            match host_of(model, a, &p)? {
                Some(h) => Ok(Some(h)),
                None => Err(()),
            }
        }
        ClassStrategy::JoinedSubclass => {
            let p = parent.ok_or(())?;
            match host_of(model, a, &p)? {
                Some(_) => Ok(Some(c.to_string())),
                None => Err(()),
            }
        }
    }
}

/// Founders of the tables class `c` reads.
fn chain(
    model: &ObjectModel,
    a: &StrategyAssignment,
    host: &BTreeMap<String, Option<String>>,
    c: &str,
) -> Vec<String> {
    let mut out = Vec::new();
    let mut t = host[c].clone();
    while let Some(f) = t {
        out.push(f.clone());
        t = if a.classes[&f] == ClassStrategy::JoinedSubclass {
            let p = model
                .class(&f)
                .and_then(|x| x.parent.clone())
                .expect("joined class has a parent");
            host[&p].clone()
        } else {
            None
        };
    }
    out
}

fn ends_to_tables(
    model: &ObjectModel,
    host: &BTreeMap<String, Option<String>>,
    c: &str,
) -> Vec<String> {
    if let Some(h) = &host[c] {
        return vec![h.clone()];
    }
    let mut hs: Vec<String> = Vec::new();
    for d in concrete_under(model, c) {
        if let Some(h) = &host[&d] {
            if !hs.contains(h) {
                hs.push(h.clone());
            }
        }
    }
    hs.sort_by_key(|h| decl_pos(model, h));
    hs
}

/// One assignment built step by step; `None` when it is infeasible.
fn build_literally(model: &ObjectModel, a: &StrategyAssignment) -> Option<MappingCandidate> {
    let mut host: BTreeMap<String, Option<String>> = BTreeMap::new();
    for c in &model.classes {
        host.insert(c.name.clone(), host_of(model, a, &c.name).ok()?);
    }

    for c in &model.classes {
        if c.is_abstract && a.classes[&c.name] == ClassStrategy::MergeUp {
            let h = host[&c.name].clone();
            let read = concrete_under(model, &c.name).iter().any(|d| {
                h.as_ref()
                    .is_some_and(|h| chain(model, a, &host, d).contains(h))
            });
            if !read {
                return None;
            }
        }
    }

    let mut tables: Vec<OTable> = Vec::new();
    for c in &model.classes {
        let s = a.classes[&c.name];
        if s == ClassStrategy::OwnTable
            || s == ClassStrategy::JoinedSubclass
            || s == ClassStrategy::UnionSubclass
        {
            let mut t = OTable {
                founder: c.name.clone(),
                name: format!("T_{}", c.name),
                fields: vec![],
                pk: String::new(),
                stored: vec![],
            };
            let key = pick_name(&t, c.id.clone(), format!("{}_{}", c.name, c.id));
            t.fields.push(Field {
                name: key.clone(),
                kind: FieldKind::KeyField,
                source: None,
                sql_type: id_type(c),
            });
            t.pk = key;
            tables.push(t);
        }
    }

    for c in &model.classes {
        let Some(h) = host[&c.name].clone() else {
            continue;
        };
        let t = tables
            .iter_mut()
            .find(|t| t.founder == h)
            .expect("host table");
        let mut owners: Vec<String> = Vec::new();
        if a.classes[&c.name] == ClassStrategy::UnionSubclass {
            let mut up = lineage(model, &c.name);
            up.reverse();
            owners.extend(up);
        }
        owners.push(c.name.clone());
        for owner in owners {
            let oc = model.class(&owner).expect("known class");
            for (attr, dtype) in non_id(oc) {
                let name = pick_name(t, attr.clone(), format!("{owner}_{attr}"));
                t.fields.push(Field {
                    name,
                    kind: FieldKind::AttributeField,
                    source: Some(AttrRef {
                        class: owner.clone(),
                        attr,
                    }),
                    sql_type: column_type(&dtype),
                });
            }
        }
        if !c.is_abstract {
            t.stored.push(c.name.clone());
        }
    }

    let joined: Vec<String> = model
        .classes
        .iter()
        .filter(|c| a.classes[&c.name] == ClassStrategy::JoinedSubclass)
        .map(|c| c.name.clone())
        .collect();

    for assoc in &model.associations {
        if a.assocs[&assoc.name] != AssociationStrategy::MergeIntoSingleTable {
            continue;
        }
        let dedicated = |c: &str,
                         tables: &Vec<OTable>,
                         host: &BTreeMap<String, Option<String>>|
         -> bool {
            let cls = model.class(c).expect("known class");
            let founded = matches!(
                a.classes[c],
                ClassStrategy::OwnTable | ClassStrategy::UnionSubclass
            );
            let alone = tables
                .iter()
                .any(|t| t.founder == c && t.stored == [c.to_string()]);
            let joined_into = joined.iter().any(|j| {
                let p = model
                    .class(j)
                    .and_then(|x| x.parent.clone())
                    .expect("joined class has a parent");
                host[&p].as_deref() == Some(c)
            });
            !cls.is_abstract && host[c].as_deref() == Some(c) && founded && alone && !joined_into
        };
        if assoc.src == assoc.dst
            || !dedicated(&assoc.src, &tables, &host)
            || !dedicated(&assoc.dst, &tables, &host)
        {
            return None;
        }
        let pos = tables
            .iter()
            .position(|t| t.founder == assoc.dst)
            .expect("dst table");
        let gone = tables.remove(pos);
        let t = tables
            .iter_mut()
            .find(|t| t.founder == assoc.src)
            .expect("src table");
        for f in gone.fields {
            let (qualifier, plain) = match &f.source {
                Some(s) => (s.class.clone(), s.attr.clone()),
                None => (assoc.dst.clone(), f.name.clone()),
            };
            let name = pick_name(t, plain.clone(), format!("{qualifier}_{plain}"));
            t.fields.push(Field { name, ..f });
        }
        t.stored.push(assoc.dst.clone());
        t.stored.sort_by_key(|c| decl_pos(model, c));
        for h in host.values_mut() {
            if h.as_deref() == Some(assoc.dst.as_str()) {
                *h = Some(assoc.src.clone());
            }
        }
    }

    for t in tables.iter_mut() {
        if t.stored.len() >= 2 {
            t.fields.push(Field {
                name: "DType".to_string(),
                kind: FieldKind::DiscriminatorField,
                source: None,
                sql_type: "VARCHAR(64)".to_string(),
            });
        }
    }

    let table_by_founder = |tables: &Vec<OTable>, f: &str| -> (String, String, String) {
        let t = tables
            .iter()
            .find(|t| t.founder == f)
            .expect("table exists");
        let pk_type = t
            .fields
            .iter()
            .find(|x| x.name == t.pk)
            .map(|x| x.sql_type.clone())
            .unwrap_or_default();
        (t.name.clone(), t.pk.clone(), pk_type)
    };

    let mut fks: Vec<ForeignKey> = Vec::new();
    for j in &joined {
        let p = model
            .class(j)
            .and_then(|x| x.parent.clone())
            .expect("joined class has a parent");
        let target = host[&p].clone().expect("joined parent is hosted");
        let (from_table, from_field, _) = table_by_founder(&tables, j);
        let (to_table, to_field, _) = table_by_founder(&tables, &target);
        fks.push(ForeignKey {
            from_table,
            from_field,
            to_table,
            to_field,
        });
    }

    let mut link_tables: Vec<OTable> = Vec::new();
    for assoc in &model.associations {
        match a.assocs[&assoc.name] {
            AssociationStrategy::MergeIntoSingleTable => {}
            AssociationStrategy::OwnAssociationTable => {
                let mut t = OTable {
                    founder: String::new(),
                    name: format!("T_{}", assoc.name),
                    fields: vec![],
                    pk: format!("{}_id", snake(&assoc.name)),
                    stored: vec![],
                };
                t.fields.push(Field {
                    name: t.pk.clone(),
                    kind: FieldKind::KeyField,
                    source: None,
                    sql_type: "INTEGER".to_string(),
                });
                for (end, role) in [(&assoc.src, "src"), (&assoc.dst, "dst")] {
                    let name = pick_name(&t, format!("{}_ref", snake(end)), format!("{role}_ref"));
                    let targets = ends_to_tables(model, &host, end);
                    if targets.len() == 1 {
                        let (to_table, to_field, pk_type) = table_by_founder(&tables, &targets[0]);
                        t.fields.push(Field {
                            name: name.clone(),
                            kind: FieldKind::ForeignKeyField,
                            source: None,
                            sql_type: pk_type,
                        });
                        fks.push(ForeignKey {
                            from_table: t.name.clone(),
                            from_field: name,
                            to_table,
                            to_field,
                        });
                    } else {
                        t.fields.push(Field {
                            name,
                            kind: FieldKind::ReferenceField,
                            source: None,
                            sql_type: id_type(model.class(end).expect("known class")),
                        });
                    }
                }
                link_tables.push(t);
            }
            AssociationStrategy::ForeignKeyEmbedding => {
                let (site_end, target_end) = if assoc.src_multiplicity == Multiplicity::Many
                    && assoc.dst_multiplicity == Multiplicity::One
                {
                    (&assoc.src, &assoc.dst)
                } else {
                    (&assoc.dst, &assoc.src)
                };
                let targets = ends_to_tables(model, &host, target_end);
                if targets.len() != 1 {
                    return None;
                }
                let (to_table, to_field, pk_type) = table_by_founder(&tables, &targets[0]);
                let mut sites: Vec<String> = Vec::new();
                for d in concrete_under(model, site_end) {
                    if let Some(h) = &host[&d] {
                        if !sites.contains(h) {
                            sites.push(h.clone());
                        }
                    }
                }
                sites.sort_by_key(|s| decl_pos(model, s));
                if sites.is_empty() {
                    return None;
                }
                for s in sites {
                    let t = tables
                        .iter_mut()
                        .find(|t| t.founder == s)
                        .expect("site table");
                    let name = pick_name(
                        t,
                        format!("{}_ref", snake(target_end)),
                        format!("{}_ref", snake(&assoc.name)),
                    );
                    t.fields.push(Field {
                        name: name.clone(),
                        kind: FieldKind::ForeignKeyField,
                        source: None,
                        sql_type: pk_type.clone(),
                    });
                    fks.push(ForeignKey {
                        from_table: t.name.clone(),
                        from_field: name,
                        to_table: to_table.clone(),
                        to_field: to_field.clone(),
                    });
                }
            }
        }
    }

    let mut out = MappingCandidate {
        assignment: a.clone(),
        tables: vec![],
        foreign_keys: fks,
        t_associate: IndexMap::new(),
        f_associate: vec![],
    };
    for t in tables.into_iter().chain(link_tables) {
        out.t_associate.insert(t.name.clone(), t.stored.clone());
        for f in &t.fields {
            if let Some(src) = &f.source {
                out.f_associate.push(FieldAssociation {
                    table: t.name.clone(),
                    field: f.name.clone(),
                    class: src.class.clone(),
                    attr: src.attr.clone(),
                });
            }
        }
        out.tables.push(Table {
            has_discriminator: t
                .fields
                .iter()
                .any(|f| f.kind == FieldKind::DiscriminatorField),
            name: t.name,
            fields: t.fields,
            primary_key: t.pk,
        });
    }
    Some(out)
}

/// All six metrics recomputed as set expressions over the candidate's
/// relations.
pub fn oracle_metrics(model: &ObjectModel, cand: &MappingCandidate) -> MetricVector {
    let mut v = MetricVector {
        rim: cand.foreign_keys.len() as u64,
        ..Default::default()
    };
    for c in &model.classes {
        let mut m = ClassMetrics::default();

        let mut touched: BTreeSet<String> = BTreeSet::new();
        for d in concrete_under(model, &c.name) {
            touched.extend(store_of(cand, &d));
        }
        m.tati = touched.len() as u64;

        let own: BTreeSet<&str> = c
            .attr_set
            .iter()
            .map(|a| a.name.as_str())
            .filter(|a| *a != c.id)
            .collect();
        m.ncrf = cand
            .f_associate
            .iter()
            .filter(|fa| fa.class == c.name && own.contains(fa.attr.as_str()))
            .count() as u64;

        if !c.is_abstract {
            let store = store_of(cand, &c.name);
            m.nct = store.len() as u64;
            let mut family: BTreeSet<String> = lineage(model, &c.name).into_iter().collect();
            family.insert(c.name.clone());
            let in_store: Vec<&FieldAssociation> = cand
                .f_associate
                .iter()
                .filter(|fa| store.contains(&fa.table))
                .collect();
            m.anv = in_store
                .iter()
                .filter(|fa| !family.contains(&fa.class))
                .count() as u64;
            let others: BTreeSet<&str> = in_store
                .iter()
                .map(|fa| fa.class.as_str())
                .filter(|x| *x != c.name)
                .collect();
            m.nic = others.len() as u64;
        }

        v.tati += m.tati;
        v.nct += m.nct;
        v.ncrf += m.ncrf;
        v.anv += m.anv;
        v.nic += m.nic;
        v.per_class.insert(c.name.clone(), m);
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;
    use crate::metrics::metric_vector;
    use crate::synth::enumerate;

    fn load(text: &str) -> ObjectModel {
        parse_model(text).unwrap()
    }

    #[test]
    fn single_class() {
        let m = load("model m; class C { attrs: k: Integer, a: String, b: Real; id: k; }");
        let r = oracle_enumerate(&m, &PinSet::default()).unwrap();
        assert_eq!(r.candidates.len(), 1);
        assert_eq!(
            oracle_metrics(&m, &r.candidates[0]).aggregates(),
            [1, 1, 2, 0, 0, 0]
        );
    }

    #[test]
    fn agrees_on_customer_order() {
        let m = load(include_str!("../../../../models/customer-order.om"));
        let fast = enumerate(&m, &PinSet::default()).unwrap();
        let slow = oracle_enumerate(&m, &PinSet::default()).unwrap();
        assert_eq!(fast.candidates, slow.candidates);
        assert_eq!(fast.total_assignments, slow.total_assignments);
        assert_eq!(slow.candidates.len(), 6);
    }

    #[test]
    fn agrees_on_person() {
        let m = load(include_str!("../../../../models/person.om"));
        let fast = enumerate(&m, &PinSet::default()).unwrap();
        let slow = oracle_enumerate(&m, &PinSet::default()).unwrap();
        assert_eq!(fast.candidates, slow.candidates);
        for c in &slow.candidates {
            assert_eq!(oracle_metrics(&m, c), metric_vector(&m, c));
        }
    }

    #[test]
    fn pinned_person() {
        let m = load(include_str!("../../../../models/person.om"));
        let pins =
            PinSet::from_json(include_str!("../../../../models/person-mixed.pins.json")).unwrap();
        let r = oracle_enumerate(&m, &pins).unwrap();
        assert_eq!(r.candidates.len(), 1);
        assert_eq!(r.candidates, enumerate(&m, &pins).unwrap().candidates);
    }

    #[test]
    fn guard() {
        let mut src = String::from("model m;");
        for i in 0..9 {
            src.push_str(&format!(" class C{i} {{ attrs: k: Integer; id: k; }}"));
        }
        let m = load(&src);
        assert_eq!(
            oracle_enumerate(&m, &PinSet::default()).unwrap_err(),
            OracleError::TooLarge(9)
        );
    }

    #[test]
    fn pin_errors_match() {
        let m = load(include_str!("../../../../models/person.om"));
        let mut pins = PinSet::default();
        pins.classes.insert("Person".into(), ClassStrategy::MergeUp);
        assert!(matches!(
            oracle_enumerate(&m, &pins),
            Err(OracleError::Synthesis(SynthesisError::IllegalPin { .. }))
        ));
        assert!(matches!(
            enumerate(&m, &pins),
            Err(SynthesisError::IllegalPin { .. })
        ));
    }
}

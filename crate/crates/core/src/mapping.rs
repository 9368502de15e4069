//! Mapping strategies and deterministic schema construction.
//!
//! A [`StrategyAssignment`] picks one [`ClassStrategy`] per class and one
//! [`AssociationStrategy`] per association. [`build_schema`] turns it into a
//! [`MappingCandidate`] or reports why the combination cannot be realized.
//!
//! Construction, in order:
//!
//! 1. Hosts. `OwnTable`, `JoinedSubclass` and `UnionSubclass` classes found a
//!    table `T_<class>`; `MergeUp` classes live in their parent's host;
//!    `Distribute` classes have no host.
//! 2. Class tables, ordered by founding class. Each starts with a key field
//!    named after the founder's id attribute. Every hosted class then adds
//!    its non-id attributes to its host, in class declaration order; a
//!    `UnionSubclass` founder first receives copies of every inherited
//!    non-id attribute, root ancestor first.
//! 3. `MergeIntoSingleTable` associations fold the destination's table into
//!    the source's table.
//! 4. Every class table storing two or more concrete classes gains `DType`.
//! 5. Associations in declaration order: association tables `T_<assoc>`
//!    (appended after the class tables) or embedded `<end>_ref` fields.
//! 6. Foreign keys: joined-subclass keys first (class order), then
//!    association references (association order).
//!
//! Field name clashes fall back to `<Class>_<attr>`, then to a numeric
//! suffix. `DType` is reserved for the discriminator.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Cardinality, Multiplicity, ObjectModel};

pub const DISCRIMINATOR: &str = "DType";
pub const DISCRIMINATOR_SQL_TYPE: &str = "VARCHAR(64)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassStrategy {
    /// Root classes only; a root's joined and union variants coincide.
    OwnTable,
    /// Store in the parent's host table (single-table inheritance).
    MergeUp,
    /// Own table with own attributes, keyed by a foreign key to the parent's host.
    JoinedSubclass,
    /// Own table with own and all inherited attributes, no foreign key.
    UnionSubclass,
    /// Abstract classes only: no table; attributes reach concrete descendants.
    Distribute,
}

impl ClassStrategy {
    pub const ALL: [ClassStrategy; 5] = [
        ClassStrategy::OwnTable,
        ClassStrategy::MergeUp,
        ClassStrategy::JoinedSubclass,
        ClassStrategy::UnionSubclass,
        ClassStrategy::Distribute,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClassStrategy::OwnTable => "OwnTable",
            ClassStrategy::MergeUp => "MergeUp",
            ClassStrategy::JoinedSubclass => "JoinedSubclass",
            ClassStrategy::UnionSubclass => "UnionSubclass",
            ClassStrategy::Distribute => "Distribute",
        }
    }

    fn founds_table(self) -> bool {
        matches!(
            self,
            ClassStrategy::OwnTable | ClassStrategy::JoinedSubclass | ClassStrategy::UnionSubclass
        )
    }
}

impl fmt::Display for ClassStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssociationStrategy {
    OwnAssociationTable,
    ForeignKeyEmbedding,
    MergeIntoSingleTable,
}

impl AssociationStrategy {
    pub const ALL: [AssociationStrategy; 3] = [
        AssociationStrategy::OwnAssociationTable,
        AssociationStrategy::ForeignKeyEmbedding,
        AssociationStrategy::MergeIntoSingleTable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AssociationStrategy::OwnAssociationTable => "OwnAssociationTable",
            AssociationStrategy::ForeignKeyEmbedding => "ForeignKeyEmbedding",
            AssociationStrategy::MergeIntoSingleTable => "MergeIntoSingleTable",
        }
    }
}

impl fmt::Display for AssociationStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Strategies a class may take, in enumeration order.
pub fn class_domain(is_root: bool, is_abstract: bool) -> &'static [ClassStrategy] {
    use ClassStrategy::*;
    match (is_root, is_abstract) {
        (true, false) => &[OwnTable],
        (true, true) => &[Distribute],
        (false, false) => &[MergeUp, JoinedSubclass, UnionSubclass],
        (false, true) => &[MergeUp, Distribute],
    }
}

/// Strategies an association may take, in enumeration order.
pub fn association_domain(cardinality: Cardinality) -> &'static [AssociationStrategy] {
    use AssociationStrategy::*;
    match cardinality {
        Cardinality::ManyToMany => &[OwnAssociationTable],
        Cardinality::OneToMany => &[OwnAssociationTable, ForeignKeyEmbedding],
        Cardinality::OneToOne => &[
            OwnAssociationTable,
            ForeignKeyEmbedding,
            MergeIntoSingleTable,
        ],
    }
}

/// One point of the design space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct StrategyAssignment {
    pub classes: IndexMap<String, ClassStrategy>,
    pub assocs: IndexMap<String, AssociationStrategy>,
}

impl StrategyAssignment {
    /// Strategy indices ordered by entity name: classes first, then
    /// associations. Comparing two encodings lexicographically gives the
    /// canonical order used for representative selection.
    pub fn canonical_encoding(&self) -> Vec<u8> {
        let mut classes: Vec<_> = self.classes.iter().collect();
        classes.sort_by(|a, b| a.0.cmp(b.0));
        let mut assocs: Vec<_> = self.assocs.iter().collect();
        assocs.sort_by(|a, b| a.0.cmp(b.0));
        classes
            .into_iter()
            .map(|(_, s)| *s as u8)
            .chain(assocs.into_iter().map(|(_, s)| *s as u8))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    AttributeField,
    KeyField,
    ForeignKeyField,
    DiscriminatorField,
    /// Reference to an association end spread over several tables; carries
    /// no database-level constraint.
    ReferenceField,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AttrRef {
    pub class: String,
    pub attr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Field {
    pub name: String,
    pub kind: FieldKind,
    pub source: Option<AttrRef>,
    pub sql_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Table {
    pub name: String,
    pub fields: Vec<Field>,
    #[serde(rename = "pk")]
    pub primary_key: String,
    #[serde(rename = "discriminator")]
    pub has_discriminator: bool,
}

impl Table {
    pub fn field(&self, name: &str) -> Option<&Field> {
        self.fields.iter().find(|f| f.name == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ForeignKey {
    pub from_table: String,
    pub from_field: String,
    pub to_table: String,
    pub to_field: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldAssociation {
    pub table: String,
    pub field: String,
    pub class: String,
    pub attr: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct MappingCandidate {
    pub assignment: StrategyAssignment,
    pub tables: Vec<Table>,
    pub foreign_keys: Vec<ForeignKey>,
    /// Table name to the concrete classes whose instances it stores.
    pub t_associate: IndexMap<String, Vec<String>>,
    /// Attribute fields and the class attributes they materialize.
    pub f_associate: Vec<FieldAssociation>,
}

impl MappingCandidate {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// The table holding instances of concrete class `class`.
    pub fn host_table(&self, class: &str) -> Option<&str> {
        self.t_associate
            .iter()
            .find(|(_, classes)| classes.iter().any(|c| c == class))
            .map(|(t, _)| t.as_str())
    }

    /// Tables an association end resolves to: the class's host, or for an
    /// unhosted abstract class the distinct hosts of its concrete
    /// descendants in table order.
    pub fn end_tables(&self, model: &ObjectModel, class: &str) -> Vec<String> {
        // Walk MergeUp links to the class that decides the host.
        let mut decider = class.to_string();
        while self.assignment.classes.get(&decider) == Some(&ClassStrategy::MergeUp) {
            match model.class(&decider).and_then(|c| c.parent.clone()) {
                Some(p) => decider = p,
                None => break,
            }
        }
        if self.assignment.classes.get(&decider) != Some(&ClassStrategy::Distribute) {
            return self
                .host_table(&decider)
                .map(|t| vec![t.to_string()])
                .unwrap_or_default();
        }
        let subtree: Vec<&str> = model
            .classes
            .iter()
            .filter(|c| {
                !c.is_abstract
                    && (c.name == class
                        || model
                            .hierarchy_of(&c.name)
                            .unwrap_or_default()
                            .iter()
                            .any(|a| a == class))
            })
            .map(|c| c.name.as_str())
            .collect();
        self.tables
            .iter()
            .filter(|t| {
                self.t_associate
                    .get(&t.name)
                    .is_some_and(|cs| cs.iter().any(|c| subtree.contains(&c.as_str())))
            })
            .map(|t| t.name.clone())
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("candidate serializes")
    }
}

/// Why an assignment cannot be realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum InfeasibleRule {
    /// The assignment misses an entity or names one the model lacks.
    #[serde(rename = "assignment-not-total")]
    NotTotal,
    #[serde(rename = "illegal-strategy")]
    IllegalStrategy,
    #[serde(rename = "MergeUp-parent-unhosted")]
    MergeUpParentUnhosted,
    #[serde(rename = "Joined-no-hosted-ancestor")]
    JoinedNoHostedAncestor,
    /// An abstract class merged into a table none of its concrete
    /// descendants read.
    #[serde(rename = "abstract-merge-unread")]
    AbstractMergeUnread,
    #[serde(rename = "merge-host-not-dedicated")]
    MergeHostNotDedicated,
    #[serde(rename = "embed-target-not-single-host")]
    EmbedTargetNotSingleHost,
    #[serde(rename = "embed-no-site")]
    EmbedNoSite,
}

impl InfeasibleRule {
    pub fn as_str(self) -> &'static str {
        match self {
            InfeasibleRule::NotTotal => "assignment-not-total",
            InfeasibleRule::IllegalStrategy => "illegal-strategy",
            InfeasibleRule::MergeUpParentUnhosted => "MergeUp-parent-unhosted",
            InfeasibleRule::JoinedNoHostedAncestor => "Joined-no-hosted-ancestor",
            InfeasibleRule::AbstractMergeUnread => "abstract-merge-unread",
            InfeasibleRule::MergeHostNotDedicated => "merge-host-not-dedicated",
            InfeasibleRule::EmbedTargetNotSingleHost => "embed-target-not-single-host",
            InfeasibleRule::EmbedNoSite => "embed-no-site",
        }
    }
}

/// Infeasibility witness: the violated rule and the entity that violates it.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("infeasible ({}): {entity}", rule.as_str())]
pub struct Infeasible {
    pub rule: InfeasibleRule,
    pub entity: String,
}

impl Infeasible {
    fn new(rule: InfeasibleRule, entity: &str) -> Self {
        Self {
            rule,
            entity: entity.to_string(),
        }
    }
}

pub fn sql_type(dtype: &str) -> &'static str {
    match dtype {
        "Integer" => "INTEGER",
        "Real" => "DOUBLE PRECISION",
        "Bool" => "BOOLEAN",
        _ => "VARCHAR(255)",
    }
}

/// `PreferredCustomer` -> `preferred_customer`.
pub fn snake_case(name: &str) -> String {
    let chars: Vec<char> = name.chars().collect();
    let mut out = String::with_capacity(name.len() + 4);
    for (i, &c) in chars.iter().enumerate() {
        if c.is_uppercase() && i > 0 {
            let prev = chars[i - 1];
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_lowercase());
            if prev.is_lowercase() || prev.is_ascii_digit() || (prev.is_uppercase() && next_lower) {
                out.push('_');
            }
        }
        out.extend(c.to_lowercase());
    }
    out
}

/// Precomputed structure of a valid model, shared across many assignments.
#[derive(Debug)]
pub(crate) struct ModelIndex<'m> {
    pub model: &'m ObjectModel,
    pub by_name: HashMap<&'m str, usize>,
    pub assoc_by_name: HashMap<&'m str, usize>,
    pub parent: Vec<Option<usize>>,
    /// Nearest first.
    pub ancestors: Vec<Vec<usize>>,
    /// Concrete classes in the subtree rooted at each class, self included,
    /// in declaration order.
    pub concrete_subtree: Vec<Vec<usize>>,
    pub assoc_ends: Vec<(usize, usize)>,
}

impl<'m> ModelIndex<'m> {
    /// Requires a model that passes `validate_model`.
    pub fn new(model: &'m ObjectModel) -> Self {
        let by_name: HashMap<&str, usize> = model
            .classes
            .iter()
            .enumerate()
            .map(|(i, c)| (c.name.as_str(), i))
            .collect();
        let parent: Vec<Option<usize>> = model
            .classes
            .iter()
            .map(|c| c.parent.as_deref().map(|p| by_name[p]))
            .collect();
        let ancestors: Vec<Vec<usize>> = (0..model.classes.len())
            .map(|i| {
                let mut chain = Vec::new();
                let mut cur = parent[i];
                while let Some(p) = cur {
                    chain.push(p);
                    cur = parent[p];
                }
                chain
            })
            .collect();
        let concrete_subtree = (0..model.classes.len())
            .map(|i| {
                (0..model.classes.len())
                    .filter(|&d| {
                        !model.classes[d].is_abstract && (d == i || ancestors[d].contains(&i))
                    })
                    .collect()
            })
            .collect();
        let assoc_by_name = model
            .associations
            .iter()
            .enumerate()
            .map(|(i, a)| (a.name.as_str(), i))
            .collect();
        let assoc_ends = model
            .associations
            .iter()
            .map(|a| (by_name[a.src.as_str()], by_name[a.dst.as_str()]))
            .collect();
        Self {
            model,
            by_name,
            assoc_by_name,
            parent,
            ancestors,
            concrete_subtree,
            assoc_ends,
        }
    }

    pub fn class_domain(&self, class: usize) -> &'static [ClassStrategy] {
        class_domain(
            self.parent[class].is_none(),
            self.model.classes[class].is_abstract,
        )
    }

    pub fn assoc_domain(&self, assoc: usize) -> &'static [AssociationStrategy] {
        association_domain(self.model.associations[assoc].cardinality())
    }

    /// Converts a name-keyed assignment into per-index vectors.
    pub fn dense(
        &self,
        a: &StrategyAssignment,
    ) -> Result<(Vec<ClassStrategy>, Vec<AssociationStrategy>), Infeasible> {
        let model = self.model;
        if let Some(extra) = a
            .classes
            .keys()
            .find(|k| !self.by_name.contains_key(k.as_str()))
        {
            return Err(Infeasible::new(InfeasibleRule::NotTotal, extra));
        }
        if let Some(extra) = a
            .assocs
            .keys()
            .find(|k| !self.assoc_by_name.contains_key(k.as_str()))
        {
            return Err(Infeasible::new(InfeasibleRule::NotTotal, extra));
        }
        let classes = model
            .classes
            .iter()
            .map(|c| {
                a.classes
                    .get(&c.name)
                    .copied()
                    .ok_or_else(|| Infeasible::new(InfeasibleRule::NotTotal, &c.name))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let assocs = model
            .associations
            .iter()
            .map(|x| {
                a.assocs
                    .get(&x.name)
                    .copied()
                    .ok_or_else(|| Infeasible::new(InfeasibleRule::NotTotal, &x.name))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok((classes, assocs))
    }

    pub fn sparse(
        &self,
        classes: &[ClassStrategy],
        assocs: &[AssociationStrategy],
    ) -> StrategyAssignment {
        StrategyAssignment {
            classes: self
                .model
                .classes
                .iter()
                .zip(classes)
                .map(|(c, s)| (c.name.clone(), *s))
                .collect(),
            assocs: self
                .model
                .associations
                .iter()
                .zip(assocs)
                .map(|(x, s)| (x.name.clone(), *s))
                .collect(),
        }
    }
}

/// Host of every class, as the index of the class that founded its table.
pub(crate) fn hosts(
    idx: &ModelIndex<'_>,
    strategies: &[ClassStrategy],
) -> Result<Vec<Option<usize>>, Infeasible> {
    let classes = &idx.model.classes;
    for (i, s) in strategies.iter().enumerate() {
        if !idx.class_domain(i).contains(s) {
            return Err(Infeasible::new(
                InfeasibleRule::IllegalStrategy,
                &classes[i].name,
            ));
        }
    }

    // Parents first: a class's host only depends on its ancestors.
    let mut order: Vec<usize> = (0..classes.len()).collect();
    order.sort_by_key(|&i| (idx.ancestors[i].len(), i));
    let mut host: Vec<Option<usize>> = vec![None; classes.len()];
    for &c in &order {
        host[c] = match strategies[c] {
            ClassStrategy::Distribute => None,
            ClassStrategy::MergeUp => match idx.parent[c].and_then(|p| host[p]) {
                Some(h) => Some(h),
                None => {
                    return Err(Infeasible::new(
                        InfeasibleRule::MergeUpParentUnhosted,
                        &classes[c].name,
                    ))
                }
            },
            ClassStrategy::JoinedSubclass => {
                if idx.parent[c].and_then(|p| host[p]).is_none() {
                    return Err(Infeasible::new(
                        InfeasibleRule::JoinedNoHostedAncestor,
                        &classes[c].name,
                    ));
                }
                Some(c)
            }
            ClassStrategy::OwnTable | ClassStrategy::UnionSubclass => Some(c),
        };
    }

    for c in 0..classes.len() {
        if classes[c].is_abstract && strategies[c] == ClassStrategy::MergeUp {
            let h = host[c];
            let read = idx.concrete_subtree[c].iter().any(|&d| {
                store_chain(idx, strategies, &host, d).contains(&h.expect("merged class is hosted"))
            });
            if !read {
                return Err(Infeasible::new(
                    InfeasibleRule::AbstractMergeUnread,
                    &classes[c].name,
                ));
            }
        }
    }
    Ok(host)
}

/// Tables (by founder) that hold the state of concrete class `class`: its
/// host followed by the joined-ancestor chain.
pub(crate) fn store_chain(
    idx: &ModelIndex<'_>,
    strategies: &[ClassStrategy],
    host: &[Option<usize>],
    class: usize,
) -> Vec<usize> {
    let mut chain = Vec::new();
    let mut table = host[class];
    while let Some(t) = table {
        chain.push(t);
        table = if strategies[t] == ClassStrategy::JoinedSubclass {
            idx.parent[t].and_then(|p| host[p])
        } else {
            None
        };
    }
    chain
}

/// Maps each class to the name of its host table, or `None` for
/// `Distribute` classes.
pub fn resolve_hosts(
    model: &ObjectModel,
    assignment: &StrategyAssignment,
) -> Result<IndexMap<String, Option<String>>, Infeasible> {
    let idx = ModelIndex::new(model);
    let (classes, _) = idx.dense(assignment)?;
    let host = hosts(&idx, &classes)?;
    Ok(model
        .classes
        .iter()
        .zip(host)
        .map(|(c, h)| {
            (
                c.name.clone(),
                h.map(|f| format!("T_{}", model.classes[f].name)),
            )
        })
        .collect())
}

pub fn build_schema(
    model: &ObjectModel,
    assignment: &StrategyAssignment,
) -> Result<MappingCandidate, Infeasible> {
    let idx = ModelIndex::new(model);
    let (classes, assocs) = idx.dense(assignment)?;
    build(&idx, &classes, &assocs)
}

struct TableDraft {
    name: String,
    fields: Vec<Field>,
    primary_key: String,
    /// Concrete classes stored here, declaration order.
    stored: Vec<usize>,
}

impl TableDraft {
    fn has(&self, name: &str) -> bool {
        name == DISCRIMINATOR || self.fields.iter().any(|f| f.name == name)
    }

    /// First free name among `preferred`, else the last one with a numeric suffix.
    fn free_name(&self, preferred: &[String]) -> String {
        if let Some(n) = preferred.iter().find(|n| !self.has(n)) {
            return n.clone();
        }
        let base = preferred.last().expect("at least one preferred name");
        (2..)
            .map(|k| format!("{base}_{k}"))
            .find(|n| !self.has(n))
            .expect("unbounded suffixes")
    }

    fn push_attr(&mut self, class: &str, attr: &str, dtype: &str) {
        let name = self.free_name(&[attr.to_string(), format!("{class}_{attr}")]);
        self.fields.push(Field {
            name,
            kind: FieldKind::AttributeField,
            source: Some(AttrRef {
                class: class.to_string(),
                attr: attr.to_string(),
            }),
            sql_type: sql_type(dtype).to_string(),
        });
    }

    fn pk_type(&self) -> String {
        self.fields
            .iter()
            .find(|f| f.name == self.primary_key)
            .map(|f| f.sql_type.clone())
            .unwrap_or_default()
    }
}

pub(crate) fn build(
    idx: &ModelIndex<'_>,
    strategies: &[ClassStrategy],
    assoc_strategies: &[AssociationStrategy],
) -> Result<MappingCandidate, Infeasible> {
    let model = idx.model;
    let classes = &model.classes;
    let mut host = hosts(idx, strategies)?;
    for (i, s) in assoc_strategies.iter().enumerate() {
        if !idx.assoc_domain(i).contains(s) {
            return Err(Infeasible::new(
                InfeasibleRule::IllegalStrategy,
                &model.associations[i].name,
            ));
        }
    }

    // Class tables, keyed by founder index.
    let mut drafts: Vec<Option<TableDraft>> = (0..classes.len())
        .map(|c| {
            strategies[c].founds_table().then(|| {
                let class = &classes[c];
                let mut draft = TableDraft {
                    name: format!("T_{}", class.name),
                    fields: Vec::new(),
                    primary_key: String::new(),
                    stored: Vec::new(),
                };
                let key =
                    draft.free_name(&[class.id.clone(), format!("{}_{}", class.name, class.id)]);
                let dtype = class
                    .id_attribute()
                    .map(|a| a.dtype.as_str())
                    .unwrap_or("Integer");
                draft.fields.push(Field {
                    name: key.clone(),
                    kind: FieldKind::KeyField,
                    source: None,
                    sql_type: sql_type(dtype).to_string(),
                });
                draft.primary_key = key;
                draft
            })
        })
        .collect();

    for c in 0..classes.len() {
        let Some(h) = host[c] else { continue };
        let draft = drafts[h].as_mut().expect("host table exists");
        if strategies[c] == ClassStrategy::UnionSubclass {
            for &a in idx.ancestors[c].iter().rev() {
                for attr in classes[a].non_id_attributes() {
                    draft.push_attr(&classes[a].name, &attr.name, &attr.dtype);
                }
            }
        }
        for attr in classes[c].non_id_attributes() {
            draft.push_attr(&classes[c].name, &attr.name, &attr.dtype);
        }
        if !classes[c].is_abstract {
            draft.stored.push(c);
        }
    }

    // Joined subclasses, by founder; their target tables can never be merged away.
    let joined: Vec<usize> = (0..classes.len())
        .filter(|&c| strategies[c] == ClassStrategy::JoinedSubclass)
        .collect();

    for (i, assoc) in model.associations.iter().enumerate() {
        if assoc_strategies[i] != AssociationStrategy::MergeIntoSingleTable {
            continue;
        }
        let (a, b) = idx.assoc_ends[i];
        let dedicated = |c: usize, drafts: &[Option<TableDraft>], host: &[Option<usize>]| {
            !classes[c].is_abstract
                && host[c] == Some(c)
                && matches!(
                    strategies[c],
                    ClassStrategy::OwnTable | ClassStrategy::UnionSubclass
                )
                && drafts[c].as_ref().is_some_and(|d| d.stored == [c])
                && !joined
                    .iter()
                    .any(|&j| idx.parent[j].and_then(|p| host[p]) == Some(c))
        };
        if a == b || !dedicated(a, &drafts, &host) || !dedicated(b, &drafts, &host) {
            return Err(Infeasible::new(
                InfeasibleRule::MergeHostNotDedicated,
                &assoc.name,
            ));
        }
        let absorbed = drafts[b].take().expect("dedicated table exists");
        let target = drafts[a].as_mut().expect("dedicated table exists");
        for field in absorbed.fields {
            let qualifier = match &field.source {
                Some(src) => src.class.clone(),
                None => classes[b].name.clone(),
            };
            let plain = field
                .source
                .as_ref()
                .map(|s| s.attr.clone())
                .unwrap_or(field.name.clone());
            let name = target.free_name(&[plain.clone(), format!("{qualifier}_{plain}")]);
            target.fields.push(Field { name, ..field });
        }
        target.stored.push(b);
        target.stored.sort_unstable();
        for h in host.iter_mut() {
            if *h == Some(b) {
                *h = Some(a);
            }
        }
    }

    for draft in drafts.iter_mut().flatten() {
        if draft.stored.len() > 1 {
            draft.fields.push(Field {
                name: DISCRIMINATOR.to_string(),
                kind: FieldKind::DiscriminatorField,
                source: None,
                sql_type: DISCRIMINATOR_SQL_TYPE.to_string(),
            });
        }
    }

    let mut foreign_keys = Vec::new();
    for &j in &joined {
        let target = idx.parent[j]
            .and_then(|p| host[p])
            .expect("checked in hosts");
        let from = drafts[j].as_ref().expect("joined table exists");
        let to = drafts[target].as_ref().expect("target table exists");
        foreign_keys.push(ForeignKey {
            from_table: from.name.clone(),
            from_field: from.primary_key.clone(),
            to_table: to.name.clone(),
            to_field: to.primary_key.clone(),
        });
    }

    let end_tables = |class: usize, host: &[Option<usize>]| -> Vec<usize> {
        match host[class] {
            Some(h) => vec![h],
            None => {
                let mut ts: Vec<usize> = idx.concrete_subtree[class]
                    .iter()
                    .filter_map(|&d| host[d])
                    .collect();
                ts.sort_unstable();
                ts.dedup();
                ts
            }
        }
    };

    let mut assoc_tables = Vec::new();
    for (i, assoc) in model.associations.iter().enumerate() {
        let (src, dst) = idx.assoc_ends[i];
        match assoc_strategies[i] {
            AssociationStrategy::MergeIntoSingleTable => {}
            AssociationStrategy::OwnAssociationTable => {
                let mut draft = TableDraft {
                    name: format!("T_{}", assoc.name),
                    fields: Vec::new(),
                    primary_key: String::new(),
                    stored: Vec::new(),
                };
                let key = format!("{}_id", snake_case(&assoc.name));
                draft.fields.push(Field {
                    name: key.clone(),
                    kind: FieldKind::KeyField,
                    source: None,
                    sql_type: sql_type("Integer").to_string(),
                });
                draft.primary_key = key;
                for (end, role) in [(src, "src"), (dst, "dst")] {
                    let name = draft.free_name(&[
                        format!("{}_ref", snake_case(&classes[end].name)),
                        format!("{role}_ref"),
                    ]);
                    let targets = end_tables(end, &host);
                    if let [t] = targets[..] {
                        let to = drafts[t].as_ref().expect("end table exists");
                        draft.fields.push(Field {
                            name: name.clone(),
                            kind: FieldKind::ForeignKeyField,
                            source: None,
                            sql_type: to.pk_type(),
                        });
                        foreign_keys.push(ForeignKey {
                            from_table: draft.name.clone(),
                            from_field: name,
                            to_table: to.name.clone(),
                            to_field: to.primary_key.clone(),
                        });
                    } else {
                        let dtype = classes[end]
                            .id_attribute()
                            .map(|a| a.dtype.as_str())
                            .unwrap_or("Integer");
                        draft.fields.push(Field {
                            name,
                            kind: FieldKind::ReferenceField,
                            source: None,
                            sql_type: sql_type(dtype).to_string(),
                        });
                    }
                }
                assoc_tables.push(draft);
            }
            AssociationStrategy::ForeignKeyEmbedding => {
                let (site_end, target_end) = match (assoc.src_multiplicity, assoc.dst_multiplicity)
                {
                    (Multiplicity::Many, Multiplicity::One) => (src, dst),
                    _ => (dst, src),
                };
                let target = match end_tables(target_end, &host)[..] {
                    [t] => t,
                    _ => {
                        return Err(Infeasible::new(
                            InfeasibleRule::EmbedTargetNotSingleHost,
                            &assoc.name,
                        ))
                    }
                };
                let mut sites: Vec<usize> = idx.concrete_subtree[site_end]
                    .iter()
                    .filter_map(|&d| host[d])
                    .collect();
                sites.sort_unstable();
                sites.dedup();
                if sites.is_empty() {
                    return Err(Infeasible::new(InfeasibleRule::EmbedNoSite, &assoc.name));
                }
                let (to_table, to_field, pk_type) = {
                    let to = drafts[target].as_ref().expect("target table exists");
                    (to.name.clone(), to.primary_key.clone(), to.pk_type())
                };
                for s in sites {
                    let draft = drafts[s].as_mut().expect("site table exists");
                    let name = draft.free_name(&[
                        format!("{}_ref", snake_case(&classes[target_end].name)),
                        format!("{}_ref", snake_case(&assoc.name)),
                    ]);
                    draft.fields.push(Field {
                        name: name.clone(),
                        kind: FieldKind::ForeignKeyField,
                        source: None,
                        sql_type: pk_type.clone(),
                    });
                    foreign_keys.push(ForeignKey {
                        from_table: draft.name.clone(),
                        from_field: name,
                        to_table: to_table.clone(),
                        to_field: to_field.clone(),
                    });
                }
            }
        }
    }

    let mut tables = Vec::new();
    let mut t_associate = IndexMap::new();
    let mut f_associate = Vec::new();
    for draft in drafts.into_iter().flatten().chain(assoc_tables) {
        t_associate.insert(
            draft.name.clone(),
            draft
                .stored
                .iter()
                .map(|&c| classes[c].name.clone())
                .collect(),
        );
        for f in &draft.fields {
            if let Some(src) = &f.source {
                f_associate.push(FieldAssociation {
                    table: draft.name.clone(),
                    field: f.name.clone(),
                    class: src.class.clone(),
                    attr: src.attr.clone(),
                });
            }
        }
        tables.push(Table {
            has_discriminator: draft
                .fields
                .iter()
                .any(|f| f.kind == FieldKind::DiscriminatorField),
            name: draft.name,
            fields: draft.fields,
            primary_key: draft.primary_key,
        });
    }

    Ok(MappingCandidate {
        assignment: idx.sparse(strategies, assoc_strategies),
        tables,
        foreign_keys,
        t_associate,
        f_associate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse_model;

    fn person() -> ObjectModel {
        parse_model(include_str!("../../../models/person.om")).unwrap()
    }

    fn customer_order() -> ObjectModel {
        parse_model(include_str!("../../../models/customer-order.om")).unwrap()
    }

    pub(crate) fn assign(
        classes: &[(&str, ClassStrategy)],
        assocs: &[(&str, AssociationStrategy)],
    ) -> StrategyAssignment {
        StrategyAssignment {
            classes: classes.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
            assocs: assocs.iter().map(|(n, s)| (n.to_string(), *s)).collect(),
        }
    }

    use AssociationStrategy::*;
    use ClassStrategy::*;

    fn mixed() -> StrategyAssignment {
        assign(
            &[
                ("Person", OwnTable),
                ("Student", UnionSubclass),
                ("Employee", MergeUp),
                ("Manager", UnionSubclass),
                ("Clerk", JoinedSubclass),
            ],
            &[],
        )
    }

    fn shared() -> StrategyAssignment {
        assign(
            &[
                ("Person", OwnTable),
                ("Student", MergeUp),
                ("Employee", MergeUp),
                ("Manager", JoinedSubclass),
                ("Clerk", MergeUp),
            ],
            &[],
        )
    }

    #[test]
    fn mixed_hosts() {
        let hosts = resolve_hosts(&person(), &mixed()).unwrap();
        let expect = [
            ("Person", "T_Person"),
            ("Student", "T_Student"),
            ("Employee", "T_Person"),
            ("Manager", "T_Manager"),
            ("Clerk", "T_Clerk"),
        ];
        for (c, t) in expect {
            assert_eq!(hosts[c].as_deref(), Some(t), "{c}");
        }
    }

    #[test]
    fn single_class_hosts_itself() {
        let m = parse_model("model m; class C { attrs: k: Integer, a: String; id: k; }").unwrap();
        let hosts = resolve_hosts(&m, &assign(&[("C", OwnTable)], &[])).unwrap();
        assert_eq!(hosts["C"].as_deref(), Some("T_C"));
    }

    #[test]
    fn merge_under_distributed_parent_is_infeasible() {
        let m = parse_model(
            "model m; class A abstract { attrs: k: Integer; id: k; } class B extends A { attrs: k: Integer; id: k; }",
        )
        .unwrap();
        let err =
            resolve_hosts(&m, &assign(&[("A", Distribute), ("B", MergeUp)], &[])).unwrap_err();
        assert_eq!(err.rule, InfeasibleRule::MergeUpParentUnhosted);
        assert_eq!(err.entity, "B");
        assert_eq!(err.rule.as_str(), "MergeUp-parent-unhosted");
        let err = resolve_hosts(
            &m,
            &assign(&[("A", Distribute), ("B", JoinedSubclass)], &[]),
        )
        .unwrap_err();
        assert_eq!(err.rule, InfeasibleRule::JoinedNoHostedAncestor);
        assert!(
            resolve_hosts(&m, &assign(&[("A", Distribute), ("B", UnionSubclass)], &[])).is_ok()
        );
    }

    #[test]
    fn illegal_and_partial_assignments() {
        let m = person();
        let mut a = mixed();
        a.classes.insert("Person".into(), MergeUp);
        assert_eq!(
            build_schema(&m, &a).unwrap_err().rule,
            InfeasibleRule::IllegalStrategy
        );
        let mut a = mixed();
        a.classes.shift_remove("Clerk");
        assert_eq!(
            build_schema(&m, &a).unwrap_err().rule,
            InfeasibleRule::NotTotal
        );
    }

    #[test]
    fn mixed_schema_shape() {
        let cand = build_schema(&person(), &mixed()).unwrap();
        let names: Vec<_> = cand.tables.iter().map(|t| t.name.as_str()).collect();
        assert_eq!(names, ["T_Person", "T_Student", "T_Manager", "T_Clerk"]);
        assert_eq!(cand.t_associate["T_Person"], ["Person", "Employee"]);
        let person = cand.table("T_Person").unwrap();
        assert!(person.has_discriminator);
        let fields: Vec<_> = person.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(fields, ["personID", "name", "salary", "DType"]);
        assert_eq!(
            cand.foreign_keys,
            vec![ForeignKey {
                from_table: "T_Clerk".into(),
                from_field: "clerkID".into(),
                to_table: "T_Person".into(),
                to_field: "personID".into(),
            }]
        );
        let manager: Vec<_> = cand
            .table("T_Manager")
            .unwrap()
            .fields
            .iter()
            .map(|f| f.name.as_str())
            .collect();
        assert_eq!(manager, ["managerID", "name", "salary", "bonus"]);
        let copy = &cand.table("T_Student").unwrap().fields[1];
        assert_eq!(
            copy.source,
            Some(AttrRef {
                class: "Person".into(),
                attr: "name".into()
            })
        );
    }

    #[test]
    fn shared_schema_shape() {
        let cand = build_schema(&person(), &shared()).unwrap();
        assert_eq!(cand.tables.len(), 2);
        assert_eq!(
            cand.t_associate["T_Person"],
            ["Person", "Student", "Employee", "Clerk"]
        );
        assert_eq!(cand.foreign_keys.len(), 1);
        assert_eq!(cand.foreign_keys[0].from_table, "T_Manager");
        assert_eq!(cand.foreign_keys[0].to_table, "T_Person");
    }

    #[test]
    fn embedding_goes_into_the_many_end() {
        let m = customer_order();
        for pc in [MergeUp, JoinedSubclass, UnionSubclass] {
            let a = assign(
                &[
                    ("Customer", OwnTable),
                    ("Order", OwnTable),
                    ("PreferredCustomer", pc),
                ],
                &[("CustomerOrder", ForeignKeyEmbedding)],
            );
            let cand = build_schema(&m, &a).unwrap();
            let order = cand.table("T_Order").unwrap();
            let fk = order.field("customer_ref").unwrap();
            assert_eq!(fk.kind, FieldKind::ForeignKeyField);
            assert_eq!(fk.sql_type, "INTEGER");
            let embedded: Vec<_> = cand
                .foreign_keys
                .iter()
                .filter(|f| f.from_field == "customer_ref")
                .collect();
            assert_eq!(embedded.len(), 1);
            assert_eq!(embedded[0].from_table, "T_Order");
            assert_eq!(embedded[0].to_table, "T_Customer");
            assert!(cand
                .tables
                .iter()
                .filter(|t| t.name != "T_Order")
                .all(|t| t.field("customer_ref").is_none()));
        }
    }

    #[test]
    fn association_table_references_both_ends() {
        let m = customer_order();
        let a = assign(
            &[
                ("Customer", OwnTable),
                ("Order", OwnTable),
                ("PreferredCustomer", MergeUp),
            ],
            &[("CustomerOrder", OwnAssociationTable)],
        );
        let cand = build_schema(&m, &a).unwrap();
        let t = cand.tables.last().unwrap();
        assert_eq!(t.name, "T_CustomerOrder");
        let fields: Vec<_> = t.fields.iter().map(|f| (f.name.as_str(), f.kind)).collect();
        assert_eq!(
            fields,
            [
                ("customer_order_id", FieldKind::KeyField),
                ("customer_ref", FieldKind::ForeignKeyField),
                ("order_ref", FieldKind::ForeignKeyField)
            ]
        );
        assert_eq!(cand.foreign_keys.len(), 2);
        assert!(cand.t_associate["T_CustomerOrder"].is_empty());
    }

    #[test]
    fn polymorphic_end_gets_unconstrained_reference() {
        let m = parse_model(
            "model m;
             class Asset abstract { attrs: k: Integer, url: String; id: k; }
             class Image extends Asset { attrs: k: Integer, w: Integer; id: k; }
             class Video extends Asset { attrs: k: Integer, s: Integer; id: k; }
             class Product { attrs: k: Integer; id: k; }
             assoc Shows { src: Product one; dst: Asset many; }",
        )
        .unwrap();
        let base = [
            ("Asset", Distribute),
            ("Image", UnionSubclass),
            ("Video", UnionSubclass),
            ("Product", OwnTable),
        ];
        let cand = build_schema(&m, &assign(&base, &[("Shows", OwnAssociationTable)])).unwrap();
        let t = cand.table("T_Shows").unwrap();
        assert_eq!(
            t.field("product_ref").unwrap().kind,
            FieldKind::ForeignKeyField
        );
        assert_eq!(
            t.field("asset_ref").unwrap().kind,
            FieldKind::ReferenceField
        );
        assert_eq!(cand.foreign_keys.len(), 1);
        assert_eq!(cand.end_tables(&m, "Asset"), ["T_Image", "T_Video"]);

        // Embedding into the many end reaches every concrete host.
        let cand = build_schema(&m, &assign(&base, &[("Shows", ForeignKeyEmbedding)])).unwrap();
        assert_eq!(cand.foreign_keys.len(), 2);
        assert!(cand
            .table("T_Image")
            .unwrap()
            .field("product_ref")
            .is_some());
        assert!(cand
            .table("T_Video")
            .unwrap()
            .field("product_ref")
            .is_some());

        // Embedding toward a spread-out end cannot name a single target.
        let reversed = parse_model(
            "model m;
             class Asset abstract { attrs: k: Integer; id: k; }
             class Image extends Asset { attrs: k: Integer; id: k; }
             class Video extends Asset { attrs: k: Integer; id: k; }
             class Product { attrs: k: Integer; id: k; }
             assoc Shows { src: Asset one; dst: Product many; }",
        )
        .unwrap();
        let err =
            build_schema(&reversed, &assign(&base, &[("Shows", ForeignKeyEmbedding)])).unwrap_err();
        assert_eq!(err.rule, InfeasibleRule::EmbedTargetNotSingleHost);
    }

    #[test]
    fn one_to_one_merge_unifies_tables() {
        let m = parse_model(
            "model m;
             class User { attrs: userId: Integer, name: String; id: userId; }
             class Profile { attrs: profileId: Integer, name: String, bio: String; id: profileId; }
             assoc Has { src: User one; dst: Profile one; }",
        )
        .unwrap();
        let a = assign(
            &[("User", OwnTable), ("Profile", OwnTable)],
            &[("Has", MergeIntoSingleTable)],
        );
        let cand = build_schema(&m, &a).unwrap();
        assert_eq!(cand.tables.len(), 1);
        let t = &cand.tables[0];
        assert_eq!(t.name, "T_User");
        let names: Vec<_> = t.fields.iter().map(|f| f.name.as_str()).collect();
        assert_eq!(
            names,
            [
                "userId",
                "name",
                "profileId",
                "Profile_name",
                "bio",
                "DType"
            ]
        );
        assert_eq!(cand.t_associate["T_User"], ["User", "Profile"]);
        assert!(cand.foreign_keys.is_empty());

        let a = assign(
            &[("User", OwnTable), ("Profile", OwnTable)],
            &[("Has", ForeignKeyEmbedding)],
        );
        let cand = build_schema(&m, &a).unwrap();
        assert!(cand.table("T_Profile").unwrap().field("user_ref").is_some());
    }

    #[test]
    fn merge_requires_dedicated_hosts() {
        let m = parse_model(
            "model m;
             class User { attrs: userId: Integer; id: userId; }
             class Admin extends User { attrs: adminId: Integer, level: Integer; id: adminId; }
             class Profile { attrs: profileId: Integer; id: profileId; }
             assoc Has { src: User one; dst: Profile one; }",
        )
        .unwrap();
        let classes = |admin| [("User", OwnTable), ("Admin", admin), ("Profile", OwnTable)];
        for admin in [MergeUp, JoinedSubclass] {
            let err = build_schema(
                &m,
                &assign(&classes(admin), &[("Has", MergeIntoSingleTable)]),
            )
            .unwrap_err();
            assert_eq!(err.rule, InfeasibleRule::MergeHostNotDedicated);
        }
        assert!(build_schema(
            &m,
            &assign(&classes(UnionSubclass), &[("Has", MergeIntoSingleTable)])
        )
        .is_ok());
    }

    #[test]
    fn unread_abstract_merge_is_pruned() {
        let m = parse_model(
            "model m;
             class Person { attrs: k: Integer, name: String; id: k; }
             class Employee abstract extends Person { attrs: k: Integer, salary: Real; id: k; }
             class Clerk extends Employee { attrs: k: Integer; id: k; }",
        )
        .unwrap();
        let a = |e, c| assign(&[("Person", OwnTable), ("Employee", e), ("Clerk", c)], &[]);
        let err = build_schema(&m, &a(MergeUp, UnionSubclass)).unwrap_err();
        assert_eq!(err.rule, InfeasibleRule::AbstractMergeUnread);
        let joined = build_schema(&m, &a(MergeUp, JoinedSubclass)).unwrap();
        assert!(joined.table("T_Person").unwrap().field("salary").is_some());
        let union = build_schema(&m, &a(Distribute, UnionSubclass)).unwrap();
        let names: Vec<_> = union
            .table("T_Clerk")
            .unwrap()
            .fields
            .iter()
            .map(|f| f.name.as_str())
            .collect();
        assert_eq!(names, ["k", "name", "salary"]);
    }

    #[test]
    fn reserved_and_clashing_names() {
        let m = parse_model(
            "model m;
             class A { attrs: DType: Integer, x: String; id: DType; }
             class B extends A { attrs: k: Integer, x: String; id: k; }",
        )
        .unwrap();
        let cand = build_schema(&m, &assign(&[("A", OwnTable), ("B", MergeUp)], &[])).unwrap();
        let names: Vec<_> = cand.tables[0]
            .fields
            .iter()
            .map(|f| f.name.as_str())
            .collect();
        assert_eq!(names, ["A_DType", "x", "B_x", "DType"]);
        assert_eq!(cand.tables[0].primary_key, "A_DType");
    }

    #[test]
    fn snake_case_names() {
        assert_eq!(snake_case("PreferredCustomer"), "preferred_customer");
        assert_eq!(snake_case("Customer"), "customer");
        assert_eq!(snake_case("HTTPServer"), "http_server");
        assert_eq!(snake_case("item2Box"), "item2_box");
    }

    #[test]
    fn canonical_encoding_sorts_by_name() {
        let a = assign(
            &[("B", OwnTable), ("A", UnionSubclass)],
            &[("Z", ForeignKeyEmbedding)],
        );
        assert_eq!(
            a.canonical_encoding(),
            vec![
                UnionSubclass as u8,
                OwnTable as u8,
                ForeignKeyEmbedding as u8
            ]
        );
    }

    #[test]
    fn domains() {
        assert_eq!(class_domain(true, false), [OwnTable]);
        assert_eq!(class_domain(true, true), [Distribute]);
        assert_eq!(
            class_domain(false, false),
            [MergeUp, JoinedSubclass, UnionSubclass]
        );
        assert_eq!(class_domain(false, true), [MergeUp, Distribute]);
        assert_eq!(
            association_domain(Cardinality::ManyToMany),
            [OwnAssociationTable]
        );
    }
}

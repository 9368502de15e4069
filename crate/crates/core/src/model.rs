//! Object models: classes with attributes and single inheritance, plus
//! binary associations with ONE/MANY multiplicities.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Datatype names every model understands without a `type` declaration.
pub const BUILTIN_TYPES: [&str; 4] = ["Integer", "Real", "String", "Bool"];

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attribute {
    pub name: String,
    pub dtype: String,
}

impl Attribute {
    pub fn new(name: impl Into<String>, dtype: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            dtype: dtype.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Class {
    pub name: String,
    pub attr_set: Vec<Attribute>,
    /// Name of the identifier attribute; must be a member of `attr_set`.
    pub id: String,
    pub parent: Option<String>,
    pub is_abstract: bool,
}

impl Class {
    pub fn attribute(&self, name: &str) -> Option<&Attribute> {
        self.attr_set.iter().find(|a| a.name == name)
    }

    /// Attributes other than the identifier, in declaration order.
    pub fn non_id_attributes(&self) -> impl Iterator<Item = &Attribute> {
        self.attr_set.iter().filter(move |a| a.name != self.id)
    }

    pub fn id_attribute(&self) -> Option<&Attribute> {
        self.attribute(&self.id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Multiplicity {
    One,
    Many,
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Multiplicity::One => "one",
            Multiplicity::Many => "many",
        })
    }
}

/// Shape of an association, derived from its two multiplicities.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cardinality {
    OneToOne,
    /// Exactly one end is MANY.
    OneToMany,
    ManyToMany,
}

/// A binary association.
///
/// Multiplicities read as "how many instances of this end participate":
/// `src: one, dst: many` means each `dst` instance relates to exactly one
/// `src` instance, while a `src` instance may relate to many `dst`
/// instances. `CustomerOrder { src: Customer one; dst: Order many; }` is the
/// usual one-to-many customer/order link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Association {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub src_multiplicity: Multiplicity,
    pub dst_multiplicity: Multiplicity,
}

impl Association {
    pub fn cardinality(&self) -> Cardinality {
        match (self.src_multiplicity, self.dst_multiplicity) {
            (Multiplicity::One, Multiplicity::One) => Cardinality::OneToOne,
            (Multiplicity::Many, Multiplicity::Many) => Cardinality::ManyToMany,
            _ => Cardinality::OneToMany,
        }
    }

    pub fn is_many_to_many(&self) -> bool {
        self.cardinality() == Cardinality::ManyToMany
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ObjectModel {
    pub name: String,
    pub classes: Vec<Class>,
    pub associations: Vec<Association>,
    /// Custom datatype names declared with `type X;`, in declaration order.
    pub datatypes: Vec<String>,
}

impl ObjectModel {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            ..Default::default()
        }
    }

    pub fn class(&self, name: &str) -> Option<&Class> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn association(&self, name: &str) -> Option<&Association> {
        self.associations.iter().find(|a| a.name == name)
    }

    pub fn is_known_type(&self, dtype: &str) -> bool {
        BUILTIN_TYPES.contains(&dtype) || self.datatypes.iter().any(|t| t == dtype)
    }

    /// Ancestors of `class`, nearest first.
    pub fn hierarchy_of(&self, class: &str) -> Result<Vec<String>, UnknownEntity> {
        let mut current = self
            .class(class)
            .ok_or_else(|| UnknownEntity(class.to_string()))?;
        let mut chain = Vec::new();
        let mut seen = BTreeSet::from([class.to_string()]);
        while let Some(parent) = &current.parent {
            // A cyclic or dangling chain simply stops; validate_model reports it.
            if !seen.insert(parent.clone()) {
                break;
            }
            match self.class(parent) {
                Some(p) => {
                    chain.push(p.name.clone());
                    current = p;
                }
                None => break,
            }
        }
        Ok(chain)
    }

    /// Direct subclasses of `class` in declaration order.
    pub fn children_of<'a>(&'a self, class: &'a str) -> impl Iterator<Item = &'a Class> + 'a {
        self.classes
            .iter()
            .filter(move |c| c.parent.as_deref() == Some(class))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown entity `{0}`")]
pub struct UnknownEntity(pub String);

/// Machine-readable diagnostic codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DiagnosticCode {
    #[serde(rename = "syntax-error")]
    Syntax,
    #[serde(rename = "duplicate-name")]
    DuplicateName,
    #[serde(rename = "duplicate-attribute")]
    DuplicateAttribute,
    #[serde(rename = "unknown-datatype")]
    UnknownDatatype,
    #[serde(rename = "unknown-parent")]
    UnknownParent,
    #[serde(rename = "unknown-class")]
    UnknownClass,
    #[serde(rename = "id-not-in-attrSet")]
    IdNotInAttrSet,
    #[serde(rename = "inheritance-cycle")]
    InheritanceCycle,
}

impl DiagnosticCode {
    pub fn as_str(self) -> &'static str {
        match self {
            DiagnosticCode::Syntax => "syntax-error",
            DiagnosticCode::DuplicateName => "duplicate-name",
            DiagnosticCode::DuplicateAttribute => "duplicate-attribute",
            DiagnosticCode::UnknownDatatype => "unknown-datatype",
            DiagnosticCode::UnknownParent => "unknown-parent",
            DiagnosticCode::UnknownClass => "unknown-class",
            DiagnosticCode::IdNotInAttrSet => "id-not-in-attrSet",
            DiagnosticCode::InheritanceCycle => "inheritance-cycle",
        }
    }
}

impl fmt::Display for DiagnosticCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub code: DiagnosticCode,
    pub message: String,
    /// Slash-separated path to the offending entity, e.g. `class/Order/id`.
    pub entity: String,
    pub line: Option<usize>,
    pub col: Option<usize>,
}

impl Diagnostic {
    pub fn new(
        code: DiagnosticCode,
        entity: impl Into<String>,
        message: impl Into<String>,
    ) -> Self {
        Self {
            code,
            message: message.into(),
            entity: entity.into(),
            line: None,
            col: None,
        }
    }

    pub fn at(mut self, pos: Option<(usize, usize)>) -> Self {
        if let Some((line, col)) = pos {
            self.line = Some(line);
            self.col = Some(col);
        }
        self
    }

    /// One JSON object on a single line.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("diagnostic serializes")
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let (Some(line), Some(col)) = (self.line, self.col) {
            write!(f, "{line}:{col}: ")?;
        }
        write!(f, "{} ({}): {}", self.code, self.entity, self.message)
    }
}

/// Source positions for model entities, keyed by entity path.
pub(crate) type SourceMap = HashMap<String, (usize, usize)>;

/// Checks every structural invariant of `model`.
///
/// The result is empty iff the model is well formed. Diagnostics come out in
/// a fixed order: datatypes, then classes in declaration order, then
/// associations, then inheritance cycles.
pub fn validate_model(model: &ObjectModel) -> Vec<Diagnostic> {
    validate_with_positions(model, &SourceMap::new())
}

pub(crate) fn validate_with_positions(model: &ObjectModel, pos: &SourceMap) -> Vec<Diagnostic> {
    let at = |path: &str| pos.get(path).copied();
    let mut out = Vec::new();

    let mut seen_types = BTreeSet::new();
    for t in &model.datatypes {
        let path = format!("type/{t}");
        if BUILTIN_TYPES.contains(&t.as_str()) || !seen_types.insert(t.as_str()) {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::DuplicateName,
                    &path,
                    format!("datatype `{t}` declared twice"),
                )
                .at(at(&path)),
            );
        }
    }

    let mut seen_classes = BTreeSet::new();
    for class in &model.classes {
        let path = format!("class/{}", class.name);
        if !seen_classes.insert(class.name.as_str()) || model.is_known_type(&class.name) {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::DuplicateName,
                    &path,
                    format!("name `{}` is already declared", class.name),
                )
                .at(at(&path)),
            );
        }
        if let Some(parent) = &class.parent {
            if model.class(parent).is_none() {
                let ppath = format!("{path}/parent");
                out.push(
                    Diagnostic::new(
                        DiagnosticCode::UnknownParent,
                        &ppath,
                        format!("class `{}` extends unknown class `{parent}`", class.name),
                    )
                    .at(at(&ppath).or(at(&path))),
                );
            }
        }
        let mut seen_attrs = BTreeSet::new();
        for attr in &class.attr_set {
            let apath = format!("{path}/{}", attr.name);
            if !seen_attrs.insert(attr.name.as_str()) {
                out.push(
                    Diagnostic::new(
                        DiagnosticCode::DuplicateAttribute,
                        &apath,
                        format!(
                            "attribute `{}` declared twice in `{}`",
                            attr.name, class.name
                        ),
                    )
                    .at(at(&apath)),
                );
            }
            if !model.is_known_type(&attr.dtype) {
                out.push(
                    Diagnostic::new(
                        DiagnosticCode::UnknownDatatype,
                        &apath,
                        format!(
                            "attribute `{}` has unknown type `{}`",
                            attr.name, attr.dtype
                        ),
                    )
                    .at(at(&apath)),
                );
            }
        }
        if class.attribute(&class.id).is_none() {
            let ipath = format!("{path}/id");
            out.push(
                Diagnostic::new(
                    DiagnosticCode::IdNotInAttrSet,
                    &ipath,
                    format!("id `{}` is not an attribute of `{}`", class.id, class.name),
                )
                .at(at(&ipath).or(at(&path))),
            );
        }
    }

    let mut seen_assocs = BTreeSet::new();
    for assoc in &model.associations {
        let path = format!("assoc/{}", assoc.name);
        if !seen_assocs.insert(assoc.name.as_str())
            || model.class(&assoc.name).is_some()
            || model.is_known_type(&assoc.name)
        {
            out.push(
                Diagnostic::new(
                    DiagnosticCode::DuplicateName,
                    &path,
                    format!("name `{}` is already declared", assoc.name),
                )
                .at(at(&path)),
            );
        }
        for (end, class) in [("src", &assoc.src), ("dst", &assoc.dst)] {
            if model.class(class).is_none() {
                let epath = format!("{path}/{end}");
                out.push(
                    Diagnostic::new(
                        DiagnosticCode::UnknownClass,
                        &epath,
                        format!("association end `{class}` is not a declared class"),
                    )
                    .at(at(&epath).or(at(&path))),
                );
            }
        }
    }

    for cycle in inheritance_cycles(model) {
        let path = format!("class/{}", cycle[0]);
        out.push(
            Diagnostic::new(
                DiagnosticCode::InheritanceCycle,
                &path,
                format!("inheritance cycle through {}", cycle.join(" -> ")),
            )
            .at(at(&path)),
        );
    }
    out
}

/// Every distinct parent cycle, each listed from its earliest-declared member.
fn inheritance_cycles(model: &ObjectModel) -> Vec<Vec<String>> {
    let parent_of: HashMap<&str, &str> = model
        .classes
        .iter()
        .filter_map(|c| c.parent.as_deref().map(|p| (c.name.as_str(), p)))
        .collect();
    let order: HashMap<&str, usize> = model
        .classes
        .iter()
        .enumerate()
        .map(|(i, c)| (c.name.as_str(), i))
        .collect();

    let mut reported: BTreeSet<&str> = BTreeSet::new();
    let mut cycles = Vec::new();
    for class in &model.classes {
        let mut path: Vec<&str> = vec![class.name.as_str()];
        let mut cur = class.name.as_str();
        while let Some(&p) = parent_of.get(cur) {
            if let Some(start) = path.iter().position(|&c| c == p) {
                let members = &path[start..];
                if members.iter().all(|m| !reported.contains(m)) {
                    reported.extend(members.iter().copied());
                    let first = members
                        .iter()
                        .enumerate()
                        .min_by_key(|(_, m)| order.get(*m).copied().unwrap_or(usize::MAX))
                        .map(|(i, _)| i)
                        .unwrap_or(0);
                    let mut cycle: Vec<String> = members[first..]
                        .iter()
                        .chain(&members[..first])
                        .map(|s| s.to_string())
                        .collect();
                    cycle.dedup();
                    cycles.push(cycle);
                }
                break;
            }
            if reported.contains(p) {
                break;
            }
            path.push(p);
            cur = p;
        }
    }
    cycles
}

//! Exhaustive enumeration of the mixed-strategy design space.

use std::time::{Duration, Instant};

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapping::{build, AssociationStrategy, ClassStrategy, MappingCandidate, ModelIndex};
use crate::model::{validate_model, Diagnostic, ObjectModel};

/// Hierarchy-wide inheritance presets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    /// Single relation: every subclass merged into the root's table.
    SR,
    /// Concrete class relation: one self-contained table per concrete class.
    CCR,
    /// Class relation: one table per class, joined along the hierarchy.
    CR,
}

/// Entity-level constraints the user imposes on the space.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct PinSet {
    pub classes: IndexMap<String, ClassStrategy>,
    pub assocs: IndexMap<String, AssociationStrategy>,
    /// Preset per hierarchy root.
    pub presets: IndexMap<String, Preset>,
}

impl PinSet {
    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty() && self.assocs.is_empty() && self.presets.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("model is invalid: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    InvalidModel(Vec<Diagnostic>),
    #[error("unknown entity `{0}`")]
    UnknownEntity(String),
    #[error("`{0}` is not a hierarchy root")]
    NotARoot(String),
    #[error("strategy {strategy} is not legal for `{entity}`")]
    IllegalPin { entity: String, strategy: String },
    #[error("conflicting pins for `{0}`")]
    PinConflict(String),
    #[error("every one of the {total} assignments is infeasible")]
    EmptySpace { total: u64 },
}

/// Legal strategies of one entity, in enumeration order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Class(&'static [ClassStrategy]),
    Association(&'static [AssociationStrategy]),
}

impl Domain {
    pub fn len(&self) -> usize {
        match self {
            Domain::Class(d) => d.len(),
            Domain::Association(d) => d.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

pub fn legal_domain(model: &ObjectModel, entity: &str) -> Result<Domain, SynthesisError> {
    if let Some(c) = model.class(entity) {
        return Ok(Domain::Class(crate::mapping::class_domain(
            c.parent.is_none(),
            c.is_abstract,
        )));
    }
    if let Some(a) = model.association(entity) {
        return Ok(Domain::Association(crate::mapping::association_domain(
            a.cardinality(),
        )));
    }
    Err(SynthesisError::UnknownEntity(entity.to_string()))
}

/// Expands a preset into per-class pins for the hierarchy under `root`.
///
/// The root keeps its single legal strategy and is left unpinned. Under CR,
/// abstract subclasses merge up so that joined chains stay connected.
pub fn apply_preset(
    model: &ObjectModel,
    root: &str,
    preset: Preset,
) -> Result<PinSet, SynthesisError> {
    let r = model
        .class(root)
        .ok_or_else(|| SynthesisError::UnknownEntity(root.to_string()))?;
    if r.parent.is_some() {
        return Err(SynthesisError::NotARoot(root.to_string()));
    }
    let mut pins = PinSet::default();
    for c in &model.classes {
        let ancestors = model.hierarchy_of(&c.name).unwrap_or_default();
        if !ancestors.iter().any(|a| a == root) {
            continue;
        }
        let strategy = match (preset, c.is_abstract) {
            (Preset::SR, _) => ClassStrategy::MergeUp,
            (Preset::CCR, false) => ClassStrategy::UnionSubclass,
            (Preset::CCR, true) => ClassStrategy::Distribute,
            (Preset::CR, false) => ClassStrategy::JoinedSubclass,
            (Preset::CR, true) => ClassStrategy::MergeUp,
        };
        pins.classes.insert(c.name.clone(), strategy);
    }
    Ok(pins)
}

/// Pins resolved against a model: one optional fixed strategy per entity.
#[derive(Debug, Clone)]
pub(crate) struct ResolvedPins {
    pub classes: Vec<Option<ClassStrategy>>,
    pub assocs: Vec<Option<AssociationStrategy>>,
}

pub(crate) fn resolve_pins(
    model: &ObjectModel,
    pins: &PinSet,
) -> Result<ResolvedPins, SynthesisError> {
    let mut classes: Vec<Option<ClassStrategy>> = vec![None; model.classes.len()];
    let mut assocs: Vec<Option<AssociationStrategy>> = vec![None; model.associations.len()];

    let fix_class = |name: &str, s: ClassStrategy, classes: &mut Vec<Option<ClassStrategy>>| {
        let i = model
            .class_index(name)
            .ok_or_else(|| SynthesisError::UnknownEntity(name.to_string()))?;
        let c = &model.classes[i];
        if !crate::mapping::class_domain(c.parent.is_none(), c.is_abstract).contains(&s) {
            return Err(SynthesisError::IllegalPin {
                entity: name.to_string(),
                strategy: s.to_string(),
            });
        }
        match classes[i] {
            Some(prev) if prev != s => Err(SynthesisError::PinConflict(name.to_string())),
            _ => {
                classes[i] = Some(s);
                Ok(())
            }
        }
    };

    for (root, preset) in &pins.presets {
        for (name, s) in apply_preset(model, root, *preset)?.classes {
            fix_class(&name, s, &mut classes)?;
        }
    }
    for (name, s) in &pins.classes {
        fix_class(name, *s, &mut classes)?;
    }
    for (name, s) in &pins.assocs {
        let i = model
            .associations
            .iter()
            .position(|a| &a.name == name)
            .ok_or_else(|| SynthesisError::UnknownEntity(name.clone()))?;
        if !crate::mapping::association_domain(model.associations[i].cardinality()).contains(s) {
            return Err(SynthesisError::IllegalPin {
                entity: name.clone(),
                strategy: s.to_string(),
            });
        }
        assocs[i] = Some(*s);
    }
    Ok(ResolvedPins { classes, assocs })
}

#[derive(Debug, Clone)]
pub struct SynthesisResult {
    pub model: String,
    /// Canonical depth-first order.
    pub candidates: Vec<MappingCandidate>,
    /// Size of the pinned strategy product.
    pub total_assignments: u64,
    pub pruned: u64,
    pub elapsed: Duration,
}

/// First line of a candidate stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StreamHeader {
    pub model: ObjectModel,
    pub total_assignments: u64,
    pub pruned: u64,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct EnumerateOptions {
    /// Split the search on the first entity's choices and run the branches
    /// on the rayon pool. Output order is unchanged.
    pub parallel: bool,
}

pub fn enumerate(model: &ObjectModel, pins: &PinSet) -> Result<SynthesisResult, SynthesisError> {
    enumerate_with(model, pins, EnumerateOptions::default())
}

pub fn enumerate_with(
    model: &ObjectModel,
    pins: &PinSet,
    options: EnumerateOptions,
) -> Result<SynthesisResult, SynthesisError> {
    let start = Instant::now();
    let diags = validate_model(model);
    if !diags.is_empty() {
        return Err(SynthesisError::InvalidModel(diags));
    }
    let pins = resolve_pins(model, pins)?;
    let idx = ModelIndex::new(model);
    let search = Search::new(&idx, &pins);
    let total = search.total();

    let (candidates, pruned) = if options.parallel && !search.domains.is_empty() {
        let branches: Vec<(Vec<MappingCandidate>, u64)> = (0..search.domains[0].len())
            .into_par_iter()
            .map(|choice| search.run(Some(choice)))
            .collect();
        let mut all = Vec::new();
        let mut pruned = 0;
        for (cands, p) in branches {
            all.extend(cands);
            pruned += p;
        }
        (all, pruned)
    } else {
        search.run(None)
    };

    if candidates.is_empty() {
        return Err(SynthesisError::EmptySpace { total });
    }
    Ok(SynthesisResult {
        model: model.name.clone(),
        candidates,
        total_assignments: total,
        pruned,
        elapsed: start.elapsed(),
    })
}

#[derive(Clone, Copy)]
enum Choice {
    Class(ClassStrategy),
    Assoc(AssociationStrategy),
}

struct Search<'a, 'm> {
    idx: &'a ModelIndex<'m>,
    /// Classes (declaration order) then associations.
    domains: Vec<Vec<Choice>>,
    n_classes: usize,
    /// For class i, the already-assigned classes it must be checked against.
    pair_checks: Vec<Vec<(usize, usize)>>,
}

impl<'a, 'm> Search<'a, 'm> {
    fn new(idx: &'a ModelIndex<'m>, pins: &ResolvedPins) -> Self {
        let n_classes = idx.model.classes.len();
        let mut domains: Vec<Vec<Choice>> = (0..n_classes)
            .map(|i| match pins.classes[i] {
                Some(s) => vec![Choice::Class(s)],
                None => idx
                    .class_domain(i)
                    .iter()
                    .map(|&s| Choice::Class(s))
                    .collect(),
            })
            .collect();
        domains.extend((0..idx.model.associations.len()).map(|i| {
            match pins.assocs[i] {
                Some(s) => vec![Choice::Assoc(s)],
                None => idx
                    .assoc_domain(i)
                    .iter()
                    .map(|&s| Choice::Assoc(s))
                    .collect(),
            }
        }));
        // (child, parent) pairs become checkable once the later of the two is set.
        let mut pair_checks = vec![Vec::new(); n_classes];
        for child in 0..n_classes {
            if let Some(parent) = idx.parent[child] {
                pair_checks[child.max(parent)].push((child, parent));
            }
        }
        Self {
            idx,
            domains,
            n_classes,
            pair_checks,
        }
    }

    fn total(&self) -> u64 {
        self.domains.iter().map(|d| d.len() as u64).product()
    }

    fn remaining(&self, from: usize) -> u64 {
        self.domains[from..]
            .iter()
            .map(|d| d.len() as u64)
            .product()
    }

    fn run(&self, first: Option<usize>) -> (Vec<MappingCandidate>, u64) {
        let mut state = State {
            classes: Vec::with_capacity(self.n_classes),
            assocs: Vec::new(),
            out: Vec::new(),
            pruned: 0,
        };
        self.descend(0, first, &mut state);
        (state.out, state.pruned)
    }

    fn descend(&self, depth: usize, first: Option<usize>, st: &mut State) {
        if depth == self.domains.len() {
            match build(self.idx, &st.classes, &st.assocs) {
                Ok(c) => st.out.push(c),
                Err(_) => st.pruned += 1,
            }
            return;
        }
        let choices: &[Choice] = match (depth, first) {
            (0, Some(k)) => std::slice::from_ref(&self.domains[0][k]),
            _ => &self.domains[depth],
        };
        for &choice in choices {
            match choice {
                Choice::Class(s) => {
                    st.classes.push(s);
                    if self.prefix_ok(depth, &st.classes) {
                        self.descend(depth + 1, first, st);
                    } else {
                        st.pruned += self.remaining(depth + 1);
                    }
                    st.classes.pop();
                }
                Choice::Assoc(s) => {
                    st.assocs.push(s);
                    self.descend(depth + 1, first, st);
                    st.assocs.pop();
                }
            }
        }
    }

    /// A MergeUp or joined child needs a parent that has a host.
    fn prefix_ok(&self, class: usize, assigned: &[ClassStrategy]) -> bool {
        self.pair_checks[class].iter().all(|&(child, parent)| {
            !(matches!(
                assigned[child],
                ClassStrategy::MergeUp | ClassStrategy::JoinedSubclass
            ) && assigned[parent] == ClassStrategy::Distribute)
        })
    }
}

struct State {
    classes: Vec<ClassStrategy>,
    assocs: Vec<AssociationStrategy>,
    out: Vec<MappingCandidate>,
    pruned: u64,
}

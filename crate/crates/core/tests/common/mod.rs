//! Seeded random object models for fuzz and property tests.

#![allow(dead_code)]

use ormspace::{Association, Attribute, Class, Multiplicity, ObjectModel};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CLASS_STEMS: [&str; 6] = ["Account", "OrderLine", "Tag", "HTTPLink", "Box", "Item"];
const ATTR_NAMES: [&str; 7] = ["name", "value", "code", "note", "DType", "weight", "label"];
const TYPES: [&str; 5] = ["Integer", "String", "Real", "Bool", "Money"];

/// Up to `max_classes` classes and `max_assocs` associations. Valid by
/// construction: parents precede children, names are unique.
pub fn random_model_sized(seed: u64, max_classes: usize, max_assocs: usize) -> ObjectModel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(1..=max_classes);
    let mut classes: Vec<Class> = Vec::new();
    for i in 0..n {
        let name = format!("{}{i}", CLASS_STEMS[rng.gen_range(0..CLASS_STEMS.len())]);
        let parent =
            (i > 0 && rng.gen_bool(0.6)).then(|| classes[rng.gen_range(0..i)].name.clone());
        let id = format!("k{i}");
        let mut attr_set = vec![Attribute {
            name: id.clone(),
            dtype: "Integer".to_string(),
        }];
        for _ in 0..rng.gen_range(0..=3) {
            let a = ATTR_NAMES[rng.gen_range(0..ATTR_NAMES.len())];
            if attr_set.iter().any(|x| x.name == a) {
                continue;
            }
            attr_set.push(Attribute {
                name: a.to_string(),
                dtype: TYPES[rng.gen_range(0..TYPES.len())].to_string(),
            });
        }
        classes.push(Class {
            name,
            attr_set,
            id,
            parent,
            is_abstract: rng.gen_bool(0.3),
        });
    }
    let mut associations = Vec::new();
    for j in 0..rng.gen_range(0..=max_assocs) {
        let mult = |r: &mut ChaCha8Rng| {
            if r.gen_bool(0.5) {
                Multiplicity::One
            } else {
                Multiplicity::Many
            }
        };
        associations.push(Association {
            name: format!("Link{j}"),
            src: classes[rng.gen_range(0..n)].name.clone(),
            dst: classes[rng.gen_range(0..n)].name.clone(),
            src_multiplicity: mult(&mut rng),
            dst_multiplicity: mult(&mut rng),
        });
    }
    ObjectModel {
        name: format!("fuzz{seed}"),
        classes,
        associations,
        datatypes: vec!["Money".to_string()],
    }
}

pub fn random_model(seed: u64) -> ObjectModel {
    random_model_sized(seed, 6, 3)
}

//! Quality-equivalence classes, Pareto selection and radar charts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::mapping::{MappingCandidate, StrategyAssignment};
use crate::metrics::{metric_vector, MetricVector, METRIC_NAMES};
use crate::model::ObjectModel;

/// Candidates sharing one six-metric aggregate vector.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceClass {
    /// Metrics of the representative; the six aggregates are shared by all members.
    pub vector: MetricVector,
    pub representative: MappingCandidate,
    /// Position of the representative in the clustered input.
    pub representative_index: usize,
    pub member_count: usize,
}

/// Groups candidates by aggregate vector, ordered lexicographically by
/// (TATI, NCT, NCRF, ANV, NIC, RIM). The representative of each class is the
/// member with the smallest canonical assignment encoding.
pub fn cluster(model: &ObjectModel, candidates: &[MappingCandidate]) -> Vec<EquivalenceClass> {
    let vectors: Vec<MetricVector> = candidates.iter().map(|c| metric_vector(model, c)).collect();
    cluster_with_vectors(candidates, &vectors)
}

pub fn cluster_with_vectors(
    candidates: &[MappingCandidate],
    vectors: &[MetricVector],
) -> Vec<EquivalenceClass> {
    assert_eq!(candidates.len(), vectors.len(), "one vector per candidate");
    // aggregate vector -> (best encoding, index, count)
    let mut groups: BTreeMap<[u64; 6], (Vec<u8>, usize, usize)> = BTreeMap::new();
    for (i, (cand, v)) in candidates.iter().zip(vectors).enumerate() {
        let enc = cand.assignment.canonical_encoding();
        groups
            .entry(v.aggregates())
            .and_modify(|(best, idx, count)| {
                *count += 1;
                if enc < *best {
                    *best = enc.clone();
                    *idx = i;
                }
            })
            .or_insert((enc, i, 1));
    }
    groups
        .into_values()
        .map(|(_, i, count)| EquivalenceClass {
            vector: vectors[i].clone(),
            representative: candidates[i].clone(),
            representative_index: i,
            member_count: count,
        })
        .collect()
}

/// `a` dominates `b` when it is no worse on every metric and strictly better
/// on at least one (all metrics are minimized).
pub fn dominates(a: &[u64; 6], b: &[u64; 6]) -> bool {
    a.iter().zip(b).all(|(x, y)| x <= y) && a.iter().zip(b).any(|(x, y)| x < y)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParetoReport {
    pub classes: Vec<EquivalenceClass>,
    /// Indices into `classes`, ascending.
    pub front: Vec<usize>,
    /// Per class, the six aggregates divided by the per-metric maximum over
    /// all classes (0 where that maximum is 0).
    pub normalized: Vec<[f64; 6]>,
}

pub fn pareto(classes: Vec<EquivalenceClass>) -> ParetoReport {
    let aggs: Vec<[u64; 6]> = classes.iter().map(|c| c.vector.aggregates()).collect();
    let front = (0..aggs.len())
        .filter(|&i| !aggs.iter().any(|other| dominates(other, &aggs[i])))
        .collect();
    let mut max = [0u64; 6];
    for a in &aggs {
        for k in 0..6 {
            max[k] = max[k].max(a[k]);
        }
    }
    let normalized = aggs
        .iter()
        .map(|a| {
            let mut n = [0.0; 6];
            for k in 0..6 {
                if max[k] > 0 {
                    n[k] = a[k] as f64 / max[k] as f64;
                }
            }
            n
        })
        .collect();
    ParetoReport {
        classes,
        front,
        normalized,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ClassSummary {
    pub vector: MetricVector,
    pub member_count: usize,
    /// Index of the representative in the candidate stream.
    pub representative: usize,
    pub assignment: StrategyAssignment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportJson {
    pub classes: Vec<ClassSummary>,
    pub front: Vec<usize>,
    pub normalized: Vec<[f64; 6]>,
}

impl ParetoReport {
    pub fn to_json_value(&self) -> ReportJson {
        ReportJson {
            classes: self
                .classes
                .iter()
                .map(|c| ClassSummary {
                    vector: c.vector.clone(),
                    member_count: c.member_count,
                    representative: c.representative_index,
                    assignment: c.representative.assignment.clone(),
                })
                .collect(),
            front: self.front.clone(),
            normalized: self.normalized.clone(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("report serializes")
    }
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

const CENTER: f64 = 260.0;
const RADIUS: f64 = 180.0;

fn axis_point(axis: usize, scale: f64) -> (f64, f64) {
    let angle = -std::f64::consts::FRAC_PI_2 + axis as f64 * std::f64::consts::TAU / 6.0;
    (
        CENTER + RADIUS * scale * angle.cos(),
        CENTER + RADIUS * scale * angle.sin(),
    )
}

/// Coordinates rounded to 2 decimals, with `-0.00` folded to `0.00`.
fn coord(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".to_string()
    } else {
        s
    }
}

/// Six-axis radar chart with one closed polygon per Pareto-front class.
pub fn radar(report: &ParetoReport) -> String {
    let height = 560 + 20 * report.front.len();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="520" height="{height}" viewBox="0 0 520 {height}" font-family="sans-serif" font-size="13">"#
    );
    svg.push_str("  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    for ring in 1..=4 {
        let pts: Vec<String> = (0..6)
            .map(|k| {
                let (x, y) = axis_point(k, ring as f64 / 4.0);
                format!("{},{}", coord(x), coord(y))
            })
            .collect();
        let _ = writeln!(
            svg,
            r##"  <polygon points="{}" fill="none" stroke="#cccccc" stroke-width="1"/>"##,
            pts.join(" ")
        );
    }
    for (k, name) in METRIC_NAMES.iter().enumerate() {
        let (x, y) = axis_point(k, 1.0);
        let (lx, ly) = axis_point(k, 1.12);
        let _ = writeln!(
            svg,
            r##"  <line x1="{c}" y1="{c}" x2="{}" y2="{}" stroke="#999999" stroke-width="1"/>"##,
            coord(x),
            coord(y),
            c = coord(CENTER)
        );
        let _ = writeln!(
            svg,
            r#"  <text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{name}</text>"#,
            coord(lx),
            coord(ly)
        );
    }
    for (slot, &class) in report.front.iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        let pts: Vec<String> = report.normalized[class]
            .iter()
            .enumerate()
            .map(|(k, &v)| {
                let (x, y) = axis_point(k, v);
                format!("{},{}", coord(x), coord(y))
            })
            .collect();
        let _ = writeln!(
            svg,
            r#"  <polygon class="front" data-class="{class}" points="{}" fill="{color}" fill-opacity="0.15" stroke="{color}" stroke-width="2"/>"#,
            pts.join(" ")
        );
    }
    for (slot, &class) in report.front.iter().enumerate() {
        let color = PALETTE[slot % PALETTE.len()];
        let y = 540 + 20 * slot;
        let agg = report.classes[class].vector.aggregates();
        let _ = writeln!(
            svg,
            r#"  <rect x="20" y="{}" width="12" height="12" fill="{color}"/>"#,
            y - 10
        );
        let _ = writeln!(
            svg,
            r#"  <text x="40" y="{y}">class {class}: TATI {} NCT {} NCRF {} ANV {} NIC {} RIM {}</text>"#,
            agg[0], agg[1], agg[2], agg[3], agg[4], agg[5]
        );
    }
    svg.push_str("</svg>\n");
    svg
}

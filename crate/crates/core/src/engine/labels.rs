//! Attribution of trace features to the processes that produce them.

use serde::{Deserialize, Serialize};

use super::analytic::visibilities;
use crate::seconds_to_um;
use crate::spectral::SpectralModel;
use crate::stack::{enumerate_merged_paths, FeatureList, Sample, DEFAULT_AMPLITUDE_FLOOR};

/// Contributions weaker than this are dropped.
pub const MIN_VISIBILITY: f64 = 1e-6;
/// A group is cancelling when `|net| < CANCEL_RATIO·Σ|V|`.
pub const CANCEL_RATIO: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "type")]
pub enum ContributionKind {
    Dip { feature: usize },
    Artifact { pair: (usize, usize) },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Contribution {
    pub kind: ContributionKind,
    /// `I0`, `e2`, `a(I0,e1)`, ...
    pub label: String,
    pub position_um: f64,
    /// Signed visibility; positive is a dip.
    pub visibility: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureGroup {
    /// Visibility-weighted mean position, µm.
    pub position_um: f64,
    pub contributions: Vec<Contribution>,
    pub net_visibility: f64,
    pub cancelling: bool,
}

/// Groups every dip and artifact of `sample` by position, merging
/// contributions closer than `τ_a/2`.
pub fn label_trace(sample: &Sample, model: &SpectralModel, max_order: usize) -> (FeatureList, Vec<FeatureGroup>) {
    let features = enumerate_merged_paths(sample, max_order, DEFAULT_AMPLITUDE_FLOOR);
    let vis = visibilities(&features, model);
    let mut items: Vec<Contribution> = Vec::new();
    for (k, (p, &v)) in features.iter().zip(&vis.dips).enumerate() {
        items.push(Contribution {
            kind: ContributionKind::Dip { feature: k },
            label: features.label(k).to_string(),
            position_um: p.delay_um(),
            visibility: v,
        });
    }
    for a in &vis.artifacts {
        let (k, l) = a.source_pair;
        items.push(Contribution {
            kind: ContributionKind::Artifact { pair: (k, l) },
            label: format!("a({},{})", features.label(k), features.label(l)),
            position_um: seconds_to_um(a.position),
            visibility: a.visibility,
        });
    }
    items.retain(|c| c.visibility.abs() >= MIN_VISIBILITY);
    items.sort_by(|a, b| a.position_um.total_cmp(&b.position_um));

    let tolerance = 0.5 * seconds_to_um(model.tau_a());
    let mut groups: Vec<Vec<Contribution>> = Vec::new();
    for c in items {
        match groups.last_mut() {
            Some(g) if c.position_um - g.last().unwrap().position_um <= tolerance => g.push(c),
            _ => groups.push(vec![c]),
        }
    }
    let groups = groups.into_iter().map(summarise).collect();
    (features, groups)
}

fn summarise(contributions: Vec<Contribution>) -> FeatureGroup {
    let net: f64 = contributions.iter().map(|c| c.visibility).sum();
    let total: f64 = contributions.iter().map(|c| c.visibility.abs()).sum();
    let position_um =
        contributions.iter().map(|c| c.visibility.abs() * c.position_um).sum::<f64>() / total;
    FeatureGroup {
        position_um,
        cancelling: contributions.len() >= 2 && net.abs() < CANCEL_RATIO * total,
        net_visibility: net,
        contributions,
    }
}

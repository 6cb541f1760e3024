//! Label-agreement scoring of temporal matches.
//!
//! Given per-frame instance label maps (0 = background), a match pair is
//! correct when source and target pixel carry the same label. Accuracy is
//! the correct fraction per frame pair, averaged over frame pairs that
//! produced at least one match.

use ndarray::Array2;

use crate::correspondence::MatchSet;
use crate::error::{Error, Result};

/// Agreement counts for one matched frame pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairAccuracy {
    pub source: usize,
    pub target: usize,
    pub matched: usize,
    pub agreeing: usize,
}

impl PairAccuracy {
    /// Fraction of agreeing pairs; `None` when nothing matched.
    pub fn fraction(&self) -> Option<f64> {
        (self.matched > 0).then(|| self.agreeing as f64 / self.matched as f64)
    }
}

/// Per-pair agreement counts. `labels[t]` must exist for every frame index
/// referenced by a match set.
pub fn per_pair_accuracy(
    match_sets: &[MatchSet],
    labels: &[Array2<u8>],
) -> Result<Vec<PairAccuracy>> {
    let mut out = Vec::with_capacity(match_sets.len());
    for ms in match_sets {
        let src = labels
            .get(ms.source)
            .ok_or(Error::MissingLabels { frame: ms.source })?;
        let dst = labels
            .get(ms.target)
            .ok_or(Error::MissingLabels { frame: ms.target })?;
        if src.dim() != (ms.height, ms.width) || dst.dim() != (ms.height, ms.width) {
            return Err(Error::dim(format!(
                "label map {:?} does not match match set {}x{}",
                src.dim(),
                ms.height,
                ms.width
            )));
        }
        let mut matched = 0;
        let mut agreeing = 0;
        for y in 0..ms.height {
            for x in 0..ms.width {
                let label = src[[y, x]];
                for m in ms.at(x, y) {
                    matched += 1;
                    if dst[[m.y as usize, m.x as usize]] == label {
                        agreeing += 1;
                    }
                }
            }
        }
        out.push(PairAccuracy { source: ms.source, target: ms.target, matched, agreeing });
    }
    Ok(out)
}

/// Mean per-pair agreement fraction. Pairs with empty match sets
/// contribute nothing; if every pair is empty the accuracy is undefined
/// and an error is returned.
pub fn correspondence_accuracy(match_sets: &[MatchSet], labels: &[Array2<u8>]) -> Result<f64> {
    let per_pair = per_pair_accuracy(match_sets, labels)?;
    let fractions: Vec<f64> = per_pair.iter().filter_map(PairAccuracy::fraction).collect();
    if fractions.is_empty() {
        return Err(Error::NoMatchedPairs);
    }
    Ok(fractions.iter().sum::<f64>() / fractions.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correspondence::{find_matches, PatchConfig};
    use crate::video::synth::{InstanceSpec, RectShape, ShapeKind, SyntheticSpec};
    use crate::video::generate_synthetic_tube;

    fn static_rect_tube() -> crate::video::Tube {
        let spec = SyntheticSpec {
            width: 24,
            height: 20,
            frames: 2,
            instances: vec![InstanceSpec {
                shape: ShapeKind::Rectangle(RectShape { x: 6.0, y: 5.0, w: 9.0, h: 8.0 }),
                velocity: (0.0, 0.0),
                color: Some([200, 40, 40]),
            }],
            noise_sigma: 0.0,
            occluder: None,
            seed: 5,
            background: [210, 210, 210],
        };
        generate_synthetic_tube(&spec).unwrap()
    }

    #[test]
    fn static_noiseless_tube_scores_exactly_one() {
        let tube = static_rect_tube();
        let ms = find_matches(tube.frame(0), tube.frame(1), &PatchConfig::default()).unwrap();
        let labels = vec![
            tube.instance_labels(0).unwrap(),
            tube.instance_labels(1).unwrap(),
        ];
        let acc = correspondence_accuracy(&[ms], &labels).unwrap();
        assert_eq!(acc, 1.0);
    }

    #[test]
    fn empty_match_sets_make_accuracy_undefined() {
        let tube = static_rect_tube();
        let cfg = PatchConfig { distance_threshold: 0.0, ..PatchConfig::default() };
        let ms = find_matches(tube.frame(0), tube.frame(1), &cfg).unwrap();
        let labels = vec![
            tube.instance_labels(0).unwrap(),
            tube.instance_labels(1).unwrap(),
        ];
        assert!(matches!(
            correspondence_accuracy(&[ms], &labels),
            Err(Error::NoMatchedPairs)
        ));
    }

    #[test]
    fn missing_label_map_is_an_error() {
        let tube = static_rect_tube();
        let ms = find_matches(tube.frame(0), tube.frame(1), &PatchConfig::default()).unwrap();
        let labels = vec![tube.instance_labels(0).unwrap()];
        assert!(matches!(
            correspondence_accuracy(&[ms], &labels),
            Err(Error::MissingLabels { frame: 1 })
        ));
    }
}

//! Direct optimization of a mask field against box and color supervision.
//!
//! There is no network here: the per-pixel logits themselves are the
//! parameters, pushed by plain gradient descent on the combined loss. The
//! point is to exercise the losses and their analytic gradients end to
//! end, and to show that boxes plus temporal consistency are enough to
//! recover pixel masks on synthetic tubes.
//!
//! Patch matches and color edges are computed once from the input frames
//! before the first step and reused unchanged; only the mask moves.

use ndarray::Array4;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::correspondence::{compute_tube_matches, ConnectionScheme, MatchSet, PatchConfig};
use crate::error::{Error, Result};
use crate::losses::{
    build_color_edges, pairwise_loss, projection_loss, tk_loss_with_matches, ColorEdge,
    EdgeTopology, LossWeights,
};
use crate::video::{MaskField, Tube};

/// Raw per-pixel parameters; the mask is their elementwise sigmoid.
#[derive(Debug, Clone, PartialEq)]
pub struct LogitField {
    values: Array4<f64>,
}

impl LogitField {
    pub fn new(values: Array4<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidValue {
                path: "<memory>".to_string(),
                reason: format!("non-finite logit {bad}"),
            });
        }
        Ok(LogitField { values })
    }

    pub fn values(&self) -> &Array4<f64> {
        &self.values
    }

    /// Sigmoid of every logit, packaged as a mask field.
    pub fn probabilities(&self) -> Result<MaskField> {
        MaskField::new(self.values.mapv(sigmoid))
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn logit(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Logits whose probabilities sit in a narrow band around 0.5, jittered
/// uniformly so ties in the projection argmax are broken at step one.
pub fn init_logits(tube: &Tube, n_instances: usize, seed: u64) -> Result<LogitField> {
    if n_instances == 0 {
        return Err(Error::invalid_config("need at least one instance".to_string()));
    }
    let (t, h, w) = (tube.n_frames(), tube.height(), tube.width());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = Array4::zeros((n_instances, t, h, w));
    for v in values.iter_mut() {
        let p = 0.5 + rng.gen_range(-0.01..0.01);
        *v = logit(p);
    }
    LogitField::new(values)
}

fn default_steps() -> usize {
    500
}

fn default_learning_rate() -> f64 {
    1.0
}

/// Everything the optimization loop needs besides the tube itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    /// Number of gradient steps.
    pub steps: usize,
    pub learning_rate: f64,
    pub weights: LossWeights,
    pub patch: PatchConfig,
    pub scheme: ConnectionScheme,
    /// Seed for logit initialization.
    pub seed: u64,
    /// Drop the color-pairwise term regardless of its weight.
    pub disable_pair: bool,
    /// Drop the temporal term regardless of its weight.
    pub disable_temp: bool,
    /// Restrict color edges to pairs with an endpoint inside some box.
    pub pair_in_box: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            steps: default_steps(),
            learning_rate: default_learning_rate(),
            weights: LossWeights::default(),
            patch: PatchConfig::default(),
            scheme: ConnectionScheme::Cyclic,
            seed: 0,
            disable_pair: false,
            disable_temp: false,
            pair_in_box: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::invalid_config("steps must be at least 1".to_string()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::invalid_config(format!(
                "learning rate {} must be finite and non-negative",
                self.learning_rate
            )));
        }
        self.weights.validate()?;
        self.patch.validate()
    }

    fn lambda_pair(&self) -> f64 {
        if self.disable_pair {
            0.0
        } else {
            self.weights.lambda_pair
        }
    }

    fn lambda_temp(&self) -> f64 {
        if self.disable_temp {
            0.0
        } else {
            self.weights.lambda_temp
        }
    }
}

/// Loss breakdown recorded once per step, plus once after the last update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub l_proj: f64,
    pub l_pair: f64,
    pub l_temp: f64,
    pub l_seg: f64,
}

/// Final state of a training run together with its loss history.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub logits: LogitField,
    pub masks: MaskField,
    /// One record per step evaluated before its update, then a final record
    /// for the state after the last update; `steps + 1` entries total.
    pub log: Vec<StepRecord>,
}

impl TrainOutcome {
    pub fn initial_l_seg(&self) -> f64 {
        self.log.first().map(|r| r.l_seg).unwrap_or(f64::NAN)
    }

    pub fn final_l_seg(&self) -> f64 {
        self.log.last().map(|r| r.l_seg).unwrap_or(f64::NAN)
    }
}

fn box_filtered_edges(edges: Vec<ColorEdge>, tube: &Tube, t: usize) -> Vec<ColorEdge> {
    let in_any_box = |(x, y): (usize, usize)| {
        tube.gt_boxes()[t]
            .iter()
            .any(|b| b.contains(x as u32, y as u32))
    };
    edges
        .into_iter()
        .filter(|e| in_any_box(e.a) || in_any_box(e.b))
        .collect()
}

fn build_edges(tube: &Tube, config: &TrainConfig) -> Result<Vec<Vec<ColorEdge>>> {
    let topology = EdgeTopology::default();
    (0..tube.n_frames())
        .map(|t| {
            let edges = build_color_edges(tube.frame(t), config.weights.sigma_pixel, &topology)?;
            Ok(if config.pair_in_box {
                box_filtered_edges(edges, tube, t)
            } else {
                edges
            })
        })
        .collect()
}

struct StepEval {
    record: StepRecord,
    grad_mask: Array4<f64>,
}

fn evaluate(
    masks: &MaskField,
    tube: &Tube,
    config: &TrainConfig,
    edges: Option<&Vec<Vec<ColorEdge>>>,
    matches: Option<&Vec<MatchSet>>,
    step: usize,
) -> Result<StepEval> {
    let (l_proj, mut grad) = projection_loss(masks, tube)?;
    let mut l_pair = 0.0;
    if let Some(edges) = edges {
        let (value, term_grad) = pairwise_loss(masks, edges, config.weights.clamp_eps);
        l_pair = value;
        grad.scaled_add(config.lambda_pair(), &term_grad);
    }
    let mut l_temp = 0.0;
    if let Some(matches) = matches {
        let (value, term_grad) = tk_loss_with_matches(masks, matches, config.weights.clamp_eps)?;
        l_temp = value;
        grad.scaled_add(config.lambda_temp(), &term_grad);
    }
    let l_seg = l_proj + config.lambda_pair() * l_pair + config.lambda_temp() * l_temp;
    if !l_seg.is_finite() {
        return Err(Error::Divergence { step, value: l_seg });
    }
    Ok(StepEval {
        record: StepRecord { step, l_proj, l_pair, l_temp, l_seg },
        grad_mask: grad,
    })
}

/// Run gradient descent on per-pixel logits for `config.steps` updates.
///
/// Matches and color edges are frozen from the input frames before the
/// loop. Each record in the log describes the state the gradient was taken
/// at; the trailing record describes the final state and gets no update.
pub fn train(tube: &Tube, n_instances: usize, config: &TrainConfig) -> Result<TrainOutcome> {
    config.validate()?;
    if n_instances == 0 {
        return Err(Error::invalid_config("need at least one instance".to_string()));
    }

    let edges = if config.lambda_pair() > 0.0 {
        Some(build_edges(tube, config)?)
    } else {
        None
    };
    let matches = if config.lambda_temp() > 0.0 {
        Some(compute_tube_matches(tube, &config.patch, config.scheme)?)
    } else {
        None
    };

    let mut logits = init_logits(tube, n_instances, config.seed)?;
    let mut log = Vec::with_capacity(config.steps + 1);
    for step in 0..config.steps {
        let masks = logits.probabilities()?;
        let eval = evaluate(&masks, tube, config, edges.as_ref(), matches.as_ref(), step)?;
        log.push(eval.record);
        // Chain rule through the sigmoid: dL/dz = dL/dm * m * (1 - m).
        ndarray::Zip::from(&mut logits.values)
            .and(&eval.grad_mask)
            .and(masks.values())
            .for_each(|z, &g, &m| {
                *z -= config.learning_rate * g * m * (1.0 - m);
            });
    }
    let masks = logits.probabilities()?;
    let eval = evaluate(&masks, tube, config, edges.as_ref(), matches.as_ref(), config.steps)?;
    log.push(eval.record);
    Ok(TrainOutcome { logits, masks, log })
}

/// Per-instance and mean intersection-over-union of a binarized mask field
/// against ground-truth masks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IouReport {
    pub per_instance: Vec<f64>,
    pub mean: f64,
}

/// Binarize at `threshold` and score each instance over the whole tube.
/// Instances empty in both prediction and ground truth count as 1.0.
pub fn evaluate_iou(masks: &MaskField, tube: &Tube, threshold: f64) -> Result<IouReport> {
    let gt = tube.gt_masks().ok_or_else(|| {
        Error::invalid_config("tube carries no ground-truth masks".to_string())
    })?;
    masks.check_against(tube)?;
    if masks.n_instances() != gt.dim().0 {
        return Err(Error::dim(format!(
            "mask field has {} instances, ground truth has {}",
            masks.n_instances(),
            gt.dim().0
        )));
    }
    let (n, t_len, h, w) = masks.values().dim();
    let mut per_instance = Vec::with_capacity(n);
    for i in 0..n {
        let mut inter = 0u64;
        let mut union = 0u64;
        for t in 0..t_len {
            for y in 0..h {
                for x in 0..w {
                    let p = masks.values()[[i, t, y, x]] >= threshold;
                    let g = gt[[i, t, y, x]];
                    inter += (p && g) as u64;
                    union += (p || g) as u64;
                }
            }
        }
        per_instance.push(if union == 0 { 1.0 } else { inter as f64 / union as f64 });
    }
    let mean = per_instance.iter().sum::<f64>() / n as f64;
    Ok(IouReport { per_instance, mean })
}

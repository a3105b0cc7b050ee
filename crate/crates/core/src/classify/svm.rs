use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{feature_set_of, join, parse_list, FeatureVector, LabeledSample, Standardizer};
use crate::error::{Error, Result};
use crate::kv::{KvReader, KvWriter};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SvmConfig {
    pub learning_rate: f64,
    /// L2 penalty `λ` in `(λ/2)·‖w‖²`.
    pub lambda: f64,
    pub epochs: usize,
    /// Weight each class by `n / (2·n_c)`.
    pub class_weighting: bool,
    pub seed: u64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.01,
            lambda: 0.01,
            epochs: 50,
            class_weighting: true,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SvmModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub standardizer: Standardizer,
}

impl SvmModel {
    /// Raw margin `w·standardize(f) + b`.
    pub fn decision(&self, f: &FeatureVector) -> f64 {
        let z = self.standardizer.apply(f);
        self.bias
            + self
                .weights
                .iter()
                .zip(z.as_slice())
                .map(|(w, x)| w * x)
                .sum::<f64>()
    }

    pub fn predict(&self, f: &FeatureVector) -> bool {
        self.decision(f) > 0.0
    }

    /// A model with fixed weights and an identity standardization.
    pub fn from_parts(weights: Vec<f64>, bias: f64) -> Self {
        let dim = weights.len();
        Self {
            weights,
            bias,
            standardizer: Standardizer {
                means: vec![0.0; dim],
                scales: vec![1.0; dim],
            },
        }
    }

    pub(super) fn write(&self, w: &mut KvWriter) {
        w.put("dim", self.weights.len())
            .put("weights", join(&self.weights))
            .put("bias", self.bias);
        self.standardizer.write(w);
    }

    pub(super) fn read(kv: &mut KvReader) -> Result<Self> {
        let dim: usize = kv.require("dim")?;
        Ok(Self {
            weights: parse_list(&kv.require_str("weights")?.1, dim)?,
            bias: kv.require("bias")?,
            standardizer: Standardizer::read(kv, dim)?,
        })
    }
}

/// Linear SVM by stochastic subgradient descent on the class-weighted hinge
/// loss. The L2 term is applied as an implicit (proximal) shrink after each
/// hinge step, `w ← w / (1 + η·λ)`, which stays stable for any `λ`.
pub fn fit_svm(data: &[LabeledSample], cfg: &SvmConfig) -> Result<SvmModel> {
    let set = feature_set_of(data)?;
    let n_pos = data.iter().filter(|s| s.label).count();
    let n_neg = data.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(Error::Fit("SVM needs samples of both classes".into()));
    }
    if cfg.learning_rate.is_nan() || cfg.learning_rate <= 0.0 || cfg.lambda < 0.0 {
        return Err(Error::Fit("learning rate must be positive and lambda non-negative".into()));
    }
    let n = data.len() as f64;
    let (w_pos, w_neg) = if cfg.class_weighting {
        (n / (2.0 * n_pos as f64), n / (2.0 * n_neg as f64))
    } else {
        (1.0, 1.0)
    };

    let standardizer = Standardizer::fit(data, set);
    let xs: Vec<FeatureVector> = data.iter().map(|s| standardizer.apply(&s.features)).collect();
    let dim = set.dim();
    let mut weights = vec![0.0; dim];
    let mut bias = 0.0;
    let shrink = 1.0 / (1.0 + cfg.learning_rate * cfg.lambda);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    for _ in 0..cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (y, c) = if data[i].label { (1.0, w_pos) } else { (-1.0, w_neg) };
            let x = xs[i].as_slice();
            let margin = y * (bias + weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>());
            if margin < 1.0 {
                let step = cfg.learning_rate * c * y;
                for (w, v) in weights.iter_mut().zip(x) {
                    *w += step * v;
                }
                bias += step;
            }
            for w in weights.iter_mut() {
                *w *= shrink;
            }
        }
    }
    Ok(SvmModel {
        weights,
        bias,
        standardizer,
    })
}

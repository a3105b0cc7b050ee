use std::cmp::Ordering;

use super::{feature_set_of, parse_list, FeatureVector, LabeledSample, Standardizer};
use crate::error::{Error, Result};
use crate::kv::{KvReader, KvWriter};

#[derive(Debug, Clone, PartialEq)]
pub struct KnnModel {
    pub k: usize,
    pub standardizer: Standardizer,
    /// Standardized training points.
    pub samples: Vec<LabeledSample>,
}

impl KnnModel {
    /// Majority vote of the `k` nearest stored samples. Equal distances are
    /// ordered by sample index.
    pub fn predict(&self, f: &FeatureVector) -> bool {
        let z = self.standardizer.apply(f);
        let mut dist: Vec<(f64, usize)> = self
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let d = s
                    .features
                    .as_slice()
                    .iter()
                    .zip(z.as_slice())
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>();
                (d, i)
            })
            .collect();
        let k = self.k.min(dist.len());
        let by_dist_then_index = |a: &(f64, usize), b: &(f64, usize)| {
            a.0.partial_cmp(&b.0).unwrap_or(Ordering::Equal).then(a.1.cmp(&b.1))
        };
        if k < dist.len() {
            dist.select_nth_unstable_by(k - 1, by_dist_then_index);
        }
        let positives = dist[..k].iter().filter(|(_, i)| self.samples[*i].label).count();
        2 * positives > k
    }

    pub(super) fn write(&self, w: &mut KvWriter) {
        w.put("k", self.k).put("dim", self.standardizer.means.len());
        self.standardizer.write(w);
        w.put("samples", self.samples.len());
        for (i, s) in self.samples.iter().enumerate() {
            let mut row = super::join(s.features.as_slice());
            row.push(';');
            row.push(if s.label { '1' } else { '0' });
            w.put(&format!("sample.{i}"), row);
        }
    }

    pub(super) fn read(kv: &mut KvReader) -> Result<Self> {
        let k: usize = kv.require("k")?;
        let dim: usize = kv.require("dim")?;
        let standardizer = Standardizer::read(kv, dim)?;
        let count: usize = kv.require("samples")?;
        let mut samples = Vec::with_capacity(count);
        for i in 0..count {
            let (line, raw) = kv.require_str(&format!("sample.{i}"))?;
            let (values, label) = raw
                .split_once(';')
                .ok_or_else(|| Error::parse(line, "sample must be `features;label`"))?;
            let label = match label.trim() {
                "0" => false,
                "1" => true,
                other => return Err(Error::parse(line, format!("bad label `{other}`"))),
            };
            samples.push(LabeledSample {
                features: FeatureVector::from_slice(&parse_list(values, dim)?),
                label,
            });
        }
        if k == 0 || k.is_multiple_of(2) {
            return Err(Error::parse(0, format!("k must be odd and positive, got {k}")));
        }
        Ok(Self {
            k,
            standardizer,
            samples,
        })
    }
}

pub fn fit_knn(data: &[LabeledSample], k: usize) -> Result<KnnModel> {
    let set = feature_set_of(data)?;
    if k == 0 || k.is_multiple_of(2) {
        return Err(Error::Fit(format!("k must be odd and positive, got {k}")));
    }
    let standardizer = Standardizer::fit(data, set);
    let samples = data
        .iter()
        .map(|s| LabeledSample {
            features: standardizer.apply(&s.features),
            label: s.label,
        })
        .collect();
    Ok(KnnModel {
        k,
        standardizer,
        samples,
    })
}

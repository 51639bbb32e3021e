use std::cmp::Ordering;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub struct RansacSpec<'a, D, M> {
    /// Fits a model to a subset; `None` for degenerate subsets.
    pub fit: &'a dyn Fn(&[&D]) -> Option<M>,
    pub distance: &'a dyn Fn(&M, &D) -> f64,
    pub min_samples: usize,
    pub threshold: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RansacResult<M> {
    pub model: M,
    /// Inlier flags in the caller's data order.
    pub inliers: Vec<bool>,
}

/// Random sample consensus. Samples are drawn from the data in sorted order,
/// so the result does not depend on how the caller ordered the data.
pub fn ransac<D: PartialOrd, M>(data: &[D], spec: &RansacSpec<D, M>) -> Result<RansacResult<M>> {
    let k = spec.min_samples;
    if k == 0 || data.len() < k {
        return Err(Error::InvalidArgument(format!(
            "RANSAC needs at least min_samples = {k} data points, got {}",
            data.len()
        )));
    }
    if !(spec.threshold > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "RANSAC threshold must be positive, got {}",
            spec.threshold
        )));
    }
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data[a].partial_cmp(&data[b]).unwrap_or(Ordering::Equal));
    let sorted: Vec<&D> = order.iter().map(|&i| &data[i]).collect();

    let score = |model: &M| -> (usize, f64) {
        let mut count = 0;
        let mut total = 0.0;
        for d in &sorted {
            let dist = (spec.distance)(model, d);
            if dist <= spec.threshold {
                count += 1;
                total += dist;
            }
        }
        (count, if count > 0 { total / count as f64 } else { f64::INFINITY })
    };

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut best: Option<(M, usize, f64)> = None;
    for _ in 0..spec.max_iterations {
        let subset: Vec<&D> = sample(&mut rng, sorted.len(), k).iter().map(|i| sorted[i]).collect();
        let Some(model) = (spec.fit)(&subset) else {
            continue;
        };
        let (count, mean) = score(&model);
        let better = match &best {
            None => true,
            Some((_, c, m)) => count > *c || (count == *c && mean < *m),
        };
        if better {
            best = Some((model, count, mean));
        }
    }
    let (model, count, _) = best.ok_or(Error::NoConsensus { found: 0, required: k })?;
    if count < k {
        return Err(Error::NoConsensus {
            found: count,
            required: k,
        });
    }
    let inlier_set: Vec<&D> = sorted
        .iter()
        .copied()
        .filter(|d| (spec.distance)(&model, d) <= spec.threshold)
        .collect();
    let model = (spec.fit)(&inlier_set).unwrap_or(model);
    let inliers = data
        .iter()
        .map(|d| (spec.distance)(&model, d) <= spec.threshold)
        .collect();
    Ok(RansacResult { model, inliers })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fit_line(pts: &[&[f64; 2]]) -> Option<(f64, f64)> {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
        let my = pts.iter().map(|p| p[1]).sum::<f64>() / n;
        let sxx: f64 = pts.iter().map(|p| (p[0] - mx).powi(2)).sum();
        if sxx < 1e-12 {
            return None;
        }
        let sxy: f64 = pts.iter().map(|p| (p[0] - mx) * (p[1] - my)).sum();
        let slope = sxy / sxx;
        Some((slope, my - slope * mx))
    }

    fn dist(m: &(f64, f64), p: &[f64; 2]) -> f64 {
        (p[1] - m.0 * p[0] - m.1).abs() / (1.0 + m.0 * m.0).sqrt()
    }

    #[test]
    fn exact_line() {
        let data: Vec<[f64; 2]> = (0..20).map(|i| [i as f64, 0.5 * i as f64 - 1.0]).collect();
        let spec = RansacSpec {
            fit: &fit_line,
            distance: &dist,
            min_samples: 2,
            threshold: 0.01,
            max_iterations: 50,
            seed: 7,
        };
        let r = ransac(&data, &spec).unwrap();
        assert!(r.inliers.iter().all(|&b| b));
        assert!((r.model.0 - 0.5).abs() < 1e-9 && (r.model.1 + 1.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let data = [[0.0, 0.0]];
        let spec = RansacSpec {
            fit: &fit_line,
            distance: &dist,
            min_samples: 2,
            threshold: 0.1,
            max_iterations: 10,
            seed: 0,
        };
        assert!(ransac(&data, &spec).is_err());
    }
}

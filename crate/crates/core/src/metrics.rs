//! Similarity costs between a fixed image and a moving image already
//! resampled onto the fixed grid. Every cost is minimised by a perfect match.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::image::Image;

pub const DEFAULT_BINS: usize = 64;
const GRID_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Metric {
    /// Mean squared difference.
    Ssd,
    /// `1 − NCC`, in `[0, 2]`.
    Ncc,
    /// `2 − (H_f + H_m) / H_fm`, in `[0, 1]`.
    Nmi { bins: usize },
}

impl Metric {
    pub fn cost(&self, fixed: &Image, warped: &Image) -> Result<f64> {
        match *self {
            Metric::Ssd => ssd(fixed, warped),
            Metric::Ncc => ncc(fixed, warped),
            Metric::Nmi { bins } => nmi(fixed, warped, bins),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ssd" => Ok(Metric::Ssd),
            "ncc" => Ok(Metric::Ncc),
            "nmi" => Ok(Metric::Nmi { bins: DEFAULT_BINS }),
            other => Err(Error::InvalidArgument(format!(
                "unknown metric '{other}' (expected ssd, ncc or nmi)"
            ))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Metric::Ssd => f.write_str("ssd"),
            Metric::Ncc => f.write_str("ncc"),
            Metric::Nmi { .. } => f.write_str("nmi"),
        }
    }
}

fn check_grid(fixed: &Image, warped: &Image) -> Result<()> {
    if !fixed.geometry().same_grid(warped.geometry(), GRID_TOL) {
        return Err(Error::GeometryMismatch(format!(
            "moving image is not on the fixed grid (sizes {:?} and {:?})",
            fixed.size(),
            warped.size()
        )));
    }
    Ok(())
}

pub fn ssd(fixed: &Image, warped: &Image) -> Result<f64> {
    check_grid(fixed, warped)?;
    let sum: f64 = fixed
        .data()
        .iter()
        .zip(warped.data())
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok(sum / fixed.len() as f64)
}

pub fn ncc(fixed: &Image, warped: &Image) -> Result<f64> {
    check_grid(fixed, warped)?;
    let n = fixed.len() as f64;
    let mf = fixed.data().iter().sum::<f64>() / n;
    let mm = warped.data().iter().sum::<f64>() / n;
    let (mut sfm, mut sff, mut smm) = (0.0, 0.0, 0.0);
    for (a, b) in fixed.data().iter().zip(warped.data()) {
        let (da, db) = (a - mf, b - mm);
        sfm += da * db;
        sff += da * da;
        smm += db * db;
    }
    if !(sff > 0.0) || !(smm > 0.0) {
        return Err(Error::DegenerateMetric(
            "normalised cross-correlation of a constant image".into(),
        ));
    }
    Ok(1.0 - sfm / (sff * smm).sqrt())
}

fn binned(data: &[f64], bins: usize, which: &str) -> Result<Vec<usize>> {
    let (lo, hi) = data
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    if !(hi > lo) || !(hi - lo).is_finite() {
        return Err(Error::DegenerateMetric(format!(
            "{which} image is constant or non-finite, histogram bins are undefined"
        )));
    }
    let width = (hi - lo) / bins as f64;
    Ok(data
        .iter()
        .map(|&v| (((v - lo) / width) as usize).min(bins - 1))
        .collect())
}

fn entropy(counts: &[usize], total: f64) -> f64 {
    counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total;
            -p * p.ln()
        })
        .sum()
}

pub fn nmi(fixed: &Image, warped: &Image, bins: usize) -> Result<f64> {
    check_grid(fixed, warped)?;
    if bins < 2 {
        return Err(Error::InvalidArgument(format!("NMI needs at least 2 bins, got {bins}")));
    }
    let bf = binned(fixed.data(), bins, "fixed")?;
    let bm = binned(warped.data(), bins, "moving")?;
    let mut joint = vec![0usize; bins * bins];
    let mut hf = vec![0usize; bins];
    let mut hm = vec![0usize; bins];
    for (&a, &b) in bf.iter().zip(&bm) {
        joint[a * bins + b] += 1;
        hf[a] += 1;
        hm[b] += 1;
    }
    let total = fixed.len() as f64;
    let h_joint = entropy(&joint, total);
    Ok(2.0 - (entropy(&hf, total) + entropy(&hm, total)) / h_joint)
}

/// A moving image, a fixed grid and a parametric warp, evaluated as one cost.
pub struct MetricContext<'a> {
    pub fixed: &'a Image,
    pub moving: &'a Image,
    pub transform: Box<dyn Fn(&Image, &[f64]) -> Result<Image> + Send + Sync + 'a>,
    pub metric: Metric,
}

impl MetricContext<'_> {
    pub fn cost(&self, params: &[f64]) -> Result<f64> {
        let warped = (self.transform)(self.moving, params)?;
        self.metric.cost(self.fixed, &warped)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn image(data: Vec<f64>) -> Image {
        let mut im = Image::new(&[data.len() / 2, 2], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        im.set_data(data).unwrap();
        im
    }

    #[test]
    fn self_costs() {
        let a = image(vec![0.0, 1.0, 5.0, 2.0, 9.0, 3.0]);
        assert_eq!(ssd(&a, &a).unwrap(), 0.0);
        assert!(ncc(&a, &a).unwrap().abs() < 1e-15);
        assert!(nmi(&a, &a, 8).unwrap().abs() < 1e-12);
    }

    #[test]
    fn ssd_constant_offset() {
        let a = image(vec![0.0, 1.0, 5.0, 2.0]);
        let b = image(a.data().iter().map(|v| v + 3.0).collect());
        assert_eq!(ssd(&a, &b).unwrap(), 9.0);
    }

    #[test]
    fn ncc_negated() {
        let a = image(vec![-1.0, 2.0, 0.5, -1.5]);
        let b = image(a.data().iter().map(|v| -v).collect());
        assert!((ncc(&a, &b).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs() {
        let a = image(vec![1.0; 4]);
        let b = image(vec![0.0, 1.0, 2.0, 3.0]);
        assert!(matches!(ncc(&a, &b), Err(Error::DegenerateMetric(_))));
        assert!(matches!(nmi(&b, &a, 8), Err(Error::DegenerateMetric(_))));
        let c = Image::new(&[3, 3], &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert!(matches!(ssd(&b, &c), Err(Error::GeometryMismatch(_))));
    }

    #[test]
    fn parse_names() {
        assert_eq!("NCC".parse::<Metric>().unwrap(), Metric::Ncc);
        assert_eq!("nmi".parse::<Metric>().unwrap(), Metric::Nmi { bins: 64 });
        assert!("mse".parse::<Metric>().is_err());
    }
}

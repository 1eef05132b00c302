use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::sphere::{Dimension, Vec3};
use crate::{Error, Result};

use super::RayBatch;

pub const DEFAULT_SPHERE_BANDS: usize = 12;
pub const DEFAULT_SPHERE_SECTORS: usize = 16;

/// Equal-area bins: bands of equal height in `z = cos(colatitude)` split into
/// equal longitude sectors on S^2, equal arcs on S^1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualAreaBins {
    pub dimension: Dimension,
    pub bands: usize,
    pub sectors: usize,
}

impl EqualAreaBins {
    pub fn sphere(bands: usize, sectors: usize) -> Result<Self> {
        if bands == 0 || sectors == 0 {
            return Err(Error::Binning(format!("{bands} bands x {sectors} sectors")));
        }
        Ok(EqualAreaBins { dimension: Dimension::Sphere, bands, sectors })
    }

    /// The default 192-bin layout on S^2.
    pub fn sphere_default() -> Self {
        EqualAreaBins { dimension: Dimension::Sphere, bands: DEFAULT_SPHERE_BANDS, sectors: DEFAULT_SPHERE_SECTORS }
    }

    pub fn circle(arcs: usize) -> Result<Self> {
        if arcs == 0 {
            return Err(Error::Binning("zero arcs".into()));
        }
        Ok(EqualAreaBins { dimension: Dimension::Circle, bands: 1, sectors: arcs })
    }

    pub fn for_dimension(dim: Dimension, count: usize) -> Result<Self> {
        match dim {
            Dimension::Circle => Self::circle(count),
            Dimension::Sphere => {
                if count == DEFAULT_SPHERE_BANDS * DEFAULT_SPHERE_SECTORS {
                    return Ok(Self::sphere_default());
                }
                // bands ≈ sqrt(count / 4/3) keeps bins roughly square near the equator
                let bands = ((count as f64 * 0.75).sqrt().round() as usize).max(1);
                if !count.is_multiple_of(bands) {
                    return Err(Error::Binning(format!("{count} bins do not split into {bands} equal bands")));
                }
                Self::sphere(bands, count / bands)
            }
        }
    }

    pub fn len(&self) -> usize {
        self.bands * self.sectors
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn area(&self) -> f64 {
        self.dimension.volume() / self.len() as f64
    }

    /// `[z_low, z_high]` of a band (S^2 only).
    pub fn z_range(&self, band: usize) -> (f64, f64) {
        let dz = 2.0 / self.bands as f64;
        (1.0 - (band + 1) as f64 * dz, 1.0 - band as f64 * dz)
    }

    /// Longitude (or angle on S^1) range of a sector.
    pub fn phi_range(&self, sector: usize) -> (f64, f64) {
        let d = 2.0 * PI / self.sectors as f64;
        (sector as f64 * d, (sector + 1) as f64 * d)
    }

    pub fn band_sector(&self, k: usize) -> (usize, usize) {
        (k / self.sectors, k % self.sectors)
    }

    pub fn bin_of(&self, y: &Vec3) -> usize {
        let mut phi = y[1].atan2(y[0]);
        if phi < 0.0 {
            phi += 2.0 * PI;
        }
        let sector = ((phi / (2.0 * PI) * self.sectors as f64) as usize).min(self.sectors - 1);
        match self.dimension {
            Dimension::Circle => sector,
            Dimension::Sphere => {
                let z = y[2].clamp(-1.0, 1.0);
                let band = (((1.0 - z) / 2.0 * self.bands as f64) as usize).min(self.bands - 1);
                band * self.sectors + sector
            }
        }
    }

    /// Bin center as (colatitude, longitude); on S^1 `(θ, 0)`.
    pub fn center(&self, k: usize) -> (f64, f64) {
        let (band, sector) = self.band_sector(k);
        let (p0, p1) = self.phi_range(sector);
        match self.dimension {
            Dimension::Circle => (0.5 * (p0 + p1), 0.0),
            Dimension::Sphere => {
                let (z0, z1) = self.z_range(band);
                ((0.5 * (z0 + z1)).acos(), 0.5 * (p0 + p1))
            }
        }
    }
}

/// Far-field histogram of reflected directions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldHistogram {
    pub bins: EqualAreaBins,
    pub counts: Vec<u64>,
    pub total: u64,
    /// Total emitted weight; every ray carries `total_weight / total`.
    pub total_weight: f64,
}

impl FarFieldHistogram {
    pub fn fraction(&self, k: usize) -> f64 {
        self.counts[k] as f64 / self.total as f64
    }

    /// Estimated density of reflected weight per unit area.
    pub fn density(&self, k: usize) -> f64 {
        self.total_weight * self.fraction(k) / self.bins.area()
    }

    /// Binomial standard error of [`Self::density`].
    pub fn stderr(&self, k: usize) -> f64 {
        let p = self.fraction(k);
        self.total_weight * (p * (1.0 - p) / self.total as f64).sqrt() / self.bins.area()
    }

    /// `Σ density · area`, equal to the emitted weight.
    pub fn integrated_density(&self) -> f64 {
        (0..self.bins.len()).map(|k| self.density(k) * self.bins.area()).sum()
    }
}

/// Bin the reflected directions of a batch (total emitted weight 1).
pub fn farfield_density(batch: &RayBatch, bins: &EqualAreaBins) -> Result<FarFieldHistogram> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    if bins.is_empty() || bins.dimension != batch.dimension {
        return Err(Error::Binning(format!("{bins:?} does not fit a batch on S^{}", batch.dimension.n())));
    }
    let n = bins.len();
    let counts = batch
        .rays
        .par_iter()
        .fold(
            || vec![0u64; n],
            |mut acc, ray| {
                acc[bins.bin_of(&ray.direction)] += 1;
                acc
            },
        )
        .reduce(
            || vec![0u64; n],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(FarFieldHistogram { bins: *bins, counts, total: batch.len() as u64, total_weight: 1.0 })
}

/// Per-bin comparison of observed counts with expected bin probabilities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BinComparison {
    /// `(count − N p) / sqrt(N p (1 − p))` per bin.
    pub z_scores: Vec<f64>,
    pub max_abs_z: f64,
    pub chi_square: f64,
    pub degrees_of_freedom: usize,
    pub p_value: f64,
}

impl BinComparison {
    pub fn all_within(&self, sigmas: f64) -> bool {
        self.max_abs_z <= sigmas
    }
}

pub fn compare_bins(hist: &FarFieldHistogram, expected: &[f64]) -> Result<BinComparison> {
    if expected.len() != hist.counts.len() {
        return Err(Error::Binning(format!("{} expected probabilities for {} bins", expected.len(), hist.counts.len())));
    }
    let n = hist.total as f64;
    let mut z_scores = Vec::with_capacity(expected.len());
    let mut chi = 0.0;
    for (&c, &p) in hist.counts.iter().zip(expected) {
        let mean = n * p;
        let sd = (n * p * (1.0 - p)).sqrt();
        let z = if sd > 0.0 {
            (c as f64 - mean) / sd
        } else if c == 0 {
            0.0
        } else {
            f64::INFINITY
        };
        z_scores.push(z);
        chi += if mean > 0.0 { (c as f64 - mean).powi(2) / mean } else if c == 0 { 0.0 } else { f64::INFINITY };
    }
    let dof = expected.len().saturating_sub(1).max(1);
    let p_value = if chi.is_finite() {
        ChiSquared::new(dof as f64).map(|d| 1.0 - d.cdf(chi)).unwrap_or(0.0)
    } else {
        0.0
    };
    let max_abs_z = z_scores.iter().fold(0.0f64, |m, z| m.max(z.abs()));
    Ok(BinComparison { z_scores, max_abs_z, chi_square: chi, degrees_of_freedom: dof, p_value })
}

/// CSV `bin, colatitude, longitude, area, count, density, stderr` (angles in radians).
pub fn histogram_csv(hist: &FarFieldHistogram) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let err = crate::kummer::csv_err;
    w.write_record(["bin", "colatitude", "longitude", "area", "count", "density", "stderr"]).map_err(err)?;
    for k in 0..hist.bins.len() {
        let (c, l) = hist.bins.center(k);
        w.write_record([
            k.to_string(),
            c.to_string(),
            l.to_string(),
            hist.bins.area().to_string(),
            hist.counts[k].to_string(),
            hist.density(k).to_string(),
            hist.stderr(k).to_string(),
        ])
        .map_err(err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bins_cover_the_sphere() {
        let b = EqualAreaBins::sphere_default();
        assert_eq!(b.len(), 192);
        assert!((b.area() * 192.0 - 4.0 * PI).abs() < 1e-12);
        assert_eq!(b.bin_of(&[0.0, 0.0, 1.0]), 0);
        assert_eq!(b.bin_of(&[1e-3, -1e-9, -1.0]), 191);
        let (z0, z1) = b.z_range(11);
        assert!((z0 + 1.0).abs() < 1e-15 && z1 < 0.0);
        for k in 0..b.len() {
            let (t, p) = b.center(k);
            let y = [t.sin() * p.cos(), t.sin() * p.sin(), t.cos()];
            assert_eq!(b.bin_of(&y), k);
        }
        assert!(EqualAreaBins::sphere(0, 3).is_err());
    }

    #[test]
    fn perfect_counts_score_zero() {
        let bins = EqualAreaBins::circle(4).unwrap();
        let hist = FarFieldHistogram { bins, counts: vec![25; 4], total: 100, total_weight: 1.0 };
        let c = compare_bins(&hist, &[0.25; 4]).unwrap();
        assert_eq!(c.max_abs_z, 0.0);
        assert!((c.p_value - 1.0).abs() < 1e-12);
        assert!((hist.integrated_density() - 1.0).abs() < 1e-12);
    }
}

//! Signal-to-interference mathematics over coverage maps: SIR grids,
//! coverage masks, effective (masked-mean) SIR, smooth min/max surrogates,
//! the max-min and weighted-AOI loss functions, and Jain's fairness index.

#![allow(clippy::needless_range_loop)]

use thiserror::Error;

use crate::geometry::Aoi;
use crate::propagation::CoverageMap;
use crate::units::{db_to_linear, linear_to_db};

/// Default denominator floor standing in for thermal noise.
pub const DEFAULT_EPSILON: f64 = 1e-20;

#[derive(Debug, Error)]
pub enum InterferenceError {
    #[error("ABS {abs} has no covered cells under the mask")]
    NoCoverage { abs: usize },
    #[error("ABS {abs} has no covered cells inside AOI window {aoi}")]
    NoCoverageInWindow { abs: usize, aoi: usize },
    #[error("AOI {aoi} lies outside the coverage grid")]
    AoiOutsideGrid { aoi: usize },
    #[error("empty value vector")]
    Empty,
}

/// Per-ABS grid of linear SIR ratios, sharing the coverage map's layout.
#[derive(Debug, Clone)]
pub struct SirMap {
    pub n_abs: usize,
    pub cells_x: usize,
    pub cells_y: usize,
    pub origin: [f64; 2],
    pub cell_size: f64,
    /// Linear ratios, same indexing as [`CoverageMap::gains`].
    pub linear: Vec<f64>,
    pub epsilon: f64,
}

impl SirMap {
    #[inline]
    pub fn idx(&self, abs: usize, ix: usize, iy: usize) -> usize {
        (abs * self.cells_y + iy) * self.cells_x + ix
    }

    #[inline]
    pub fn db(&self, abs: usize, ix: usize, iy: usize) -> f64 {
        linear_to_db(self.linear[self.idx(abs, ix, iy)])
    }

    pub fn cells_per_abs(&self) -> usize {
        self.cells_x * self.cells_y
    }
}

/// Per-ABS binary coverage mask.
#[derive(Debug, Clone)]
pub struct CoverageMask {
    pub n_abs: usize,
    pub cells_x: usize,
    pub cells_y: usize,
    pub ones: Vec<bool>,
}

impl CoverageMask {
    #[inline]
    pub fn idx(&self, abs: usize, ix: usize, iy: usize) -> usize {
        (abs * self.cells_y + iy) * self.cells_x + ix
    }

    pub fn covered_cells(&self, abs: usize) -> usize {
        let per = self.cells_x * self.cells_y;
        self.ones[abs * per..(abs + 1) * per]
            .iter()
            .filter(|m| **m)
            .count()
    }
}

/// Square cell window centered on an AOI, clipped to the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AoiWindow {
    pub center_x: usize,
    pub center_y: usize,
    /// Radius in whole cells (window side is `2 * half_cells` unclipped).
    pub half_cells: usize,
    /// Clipped index ranges, end-exclusive.
    pub x_range: (usize, usize),
    pub y_range: (usize, usize),
    pub clipped: bool,
}

impl AoiWindow {
    pub fn cell_count(&self) -> usize {
        (self.x_range.1 - self.x_range.0) * (self.y_range.1 - self.y_range.0)
    }
}

/// Per-cell SIR: each ABS's RSS over the summed RSS of all others plus the
/// epsilon floor.
pub fn sir_map(coverage: &CoverageMap, p_tx_watts: &[f64], epsilon: f64) -> SirMap {
    assert_eq!(coverage.n_abs, p_tx_watts.len());
    let per = coverage.cells_per_abs();
    let mut total = vec![0.0f64; per];
    for i in 0..coverage.n_abs {
        for c in 0..per {
            total[c] += p_tx_watts[i] * coverage.gains[i * per + c];
        }
    }
    let mut linear = vec![0.0f64; coverage.gains.len()];
    for i in 0..coverage.n_abs {
        for c in 0..per {
            let own = p_tx_watts[i] * coverage.gains[i * per + c];
            linear[i * per + c] = own / (total[c] - own + epsilon);
        }
    }
    SirMap {
        n_abs: coverage.n_abs,
        cells_x: coverage.cells_x,
        cells_y: coverage.cells_y,
        origin: coverage.origin,
        cell_size: coverage.cell_size,
        linear,
        epsilon,
    }
}

/// Indicator of gain strictly above the threshold.
pub fn coverage_mask(coverage: &CoverageMap, threshold: f64) -> CoverageMask {
    CoverageMask {
        n_abs: coverage.n_abs,
        cells_x: coverage.cells_x,
        cells_y: coverage.cells_y,
        ones: coverage.gains.iter().map(|g| *g > threshold).collect(),
    }
}

/// Masked mean of the dB-scale SIR for one ABS over the whole map.
pub fn effective_sir(
    sir: &SirMap,
    mask: &CoverageMask,
    abs: usize,
) -> Result<f64, InterferenceError> {
    let per = sir.cells_per_abs();
    let mut sum = 0.0;
    let mut count = 0usize;
    for c in 0..per {
        if mask.ones[abs * per + c] {
            sum += linear_to_db(sir.linear[abs * per + c]);
            count += 1;
        }
    }
    if count == 0 {
        return Err(InterferenceError::NoCoverage { abs });
    }
    Ok(sum / count as f64)
}

/// Effective SIR of every ABS over the whole map.
pub fn effective_sirs(sir: &SirMap, mask: &CoverageMask) -> Result<Vec<f64>, InterferenceError> {
    (0..sir.n_abs).map(|i| effective_sir(sir, mask, i)).collect()
}

/// Negative log-sum-exp: a smooth lower bound on the minimum,
/// `min(v) - log(n)/beta <= nlse(v) <= min(v)`.
pub fn nlse(values: &[f64], beta: f64) -> Result<f64, InterferenceError> {
    if values.is_empty() {
        return Err(InterferenceError::Empty);
    }
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let sum: f64 = values.iter().map(|v| (-beta * (v - m)).exp()).sum();
    Ok(m - sum.ln() / beta)
}

/// Log-sum-exp: a smooth upper bound on the maximum,
/// `max(v) <= lse(v) <= max(v) + log(n)/beta`.
pub fn lse(values: &[f64], beta: f64) -> Result<f64, InterferenceError> {
    if values.is_empty() {
        return Err(InterferenceError::Empty);
    }
    let m = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = values.iter().map(|v| (beta * (v - m)).exp()).sum();
    Ok(m + sum.ln() / beta)
}

/// Max-min loss: `-nlse(r, beta) - xi * mean(r)`. Minimizing it raises the
/// smooth minimum of the effective SIRs while nudging the average upward.
pub fn loss_maxmin(effective: &[f64], beta: f64, xi: f64) -> Result<f64, InterferenceError> {
    let smooth_min = nlse(effective, beta)?;
    let mean = effective.iter().sum::<f64>() / effective.len() as f64;
    Ok(-smooth_min - xi * mean)
}

/// Square window of `2 * half_cells` cells centered on the AOI's cell,
/// clipped at the grid edges.
pub fn extract_aoi_window(
    sir: &SirMap,
    aoi: &Aoi,
    aoi_index: usize,
) -> Result<AoiWindow, InterferenceError> {
    let fx = (aoi.center[0] - sir.origin[0]) / sir.cell_size;
    let fy = (aoi.center[1] - sir.origin[1]) / sir.cell_size;
    if fx < 0.0 || fy < 0.0 || fx >= sir.cells_x as f64 || fy >= sir.cells_y as f64 {
        return Err(InterferenceError::AoiOutsideGrid { aoi: aoi_index });
    }
    let (cx, cy) = (fx as usize, fy as usize);
    let half = ((aoi.radius / sir.cell_size).round() as usize).max(1);
    let x_lo = cx.saturating_sub(half);
    let y_lo = cy.saturating_sub(half);
    let x_hi = (cx + half).min(sir.cells_x);
    let y_hi = (cy + half).min(sir.cells_y);
    let clipped = half > cx || half > cy || cx + half > sir.cells_x || cy + half > sir.cells_y;
    Ok(AoiWindow {
        center_x: cx,
        center_y: cy,
        half_cells: half,
        x_range: (x_lo, x_hi),
        y_range: (y_lo, y_hi),
        clipped,
    })
}

/// Masked-mean dB SIR of one ABS restricted to a window.
pub fn effective_sir_in_window(
    sir: &SirMap,
    mask: &CoverageMask,
    abs: usize,
    window: &AoiWindow,
    aoi_index: usize,
) -> Result<f64, InterferenceError> {
    let mut sum = 0.0;
    let mut count = 0usize;
    for iy in window.y_range.0..window.y_range.1 {
        for ix in window.x_range.0..window.x_range.1 {
            let idx = sir.idx(abs, ix, iy);
            if mask.ones[idx] {
                sum += linear_to_db(sir.linear[idx]);
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(InterferenceError::NoCoverageInWindow {
            abs,
            aoi: aoi_index,
        });
    }
    Ok(sum / count as f64)
}

/// Temperature softmin weights `exp(-x/T) / sum exp(-x/T)`; shift-invariant
/// and summing to one.
pub fn softmin_weights(values: &[f64], temperature: f64) -> Result<Vec<f64>, InterferenceError> {
    if values.is_empty() {
        return Err(InterferenceError::Empty);
    }
    let m = values.iter().copied().fold(f64::INFINITY, f64::min);
    let exps: Vec<f64> = values
        .iter()
        .map(|v| (-(v - m) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    Ok(exps.into_iter().map(|e| e / sum).collect())
}

/// Everything the weighted-AOI loss computes, kept for metrics, gradients
/// and tests.
#[derive(Debug, Clone)]
pub struct WeightedAoiLoss {
    /// Clipped window of each AOI.
    pub windows: Vec<AoiWindow>,
    /// Per-AOI, per-ABS effective SIR over the AOI window (dB).
    pub window_sirs: Vec<Vec<f64>>,
    /// Per-AOI, per-ABS count of masked cells inside the window.
    pub window_mask_counts: Vec<Vec<usize>>,
    /// Per-AOI smooth maximum `x_m = lse(window_sirs[m], beta)`.
    pub aoi_lse: Vec<f64>,
    /// Softmin priorities over `aoi_lse`.
    pub weights: Vec<f64>,
    /// Weighted loss `-sum w_m x_m`.
    pub weighted: f64,
    /// Unweighted loss `-sum x_m`.
    pub unweighted: f64,
}

impl WeightedAoiLoss {
    /// Index and windowed effective SIR of each AOI's serving ABS (the one
    /// with the highest effective SIR over the window).
    pub fn serving_abs(&self) -> Vec<(usize, f64)> {
        self.window_sirs
            .iter()
            .map(|sirs| {
                let (i, v) = sirs
                    .iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |acc, (i, v)| {
                        if *v > acc.1 {
                            (i, *v)
                        } else {
                            acc
                        }
                    });
                (i, v)
            })
            .collect()
    }
}

/// Weighted-AOI loss: smooth maximum of per-ABS window SIRs per AOI,
/// prioritized by a temperature softmin over the per-AOI values.
pub fn loss_weighted_aoi(
    sir: &SirMap,
    mask: &CoverageMask,
    aois: &[Aoi],
    beta: f64,
    temperature: f64,
) -> Result<WeightedAoiLoss, InterferenceError> {
    if aois.is_empty() {
        return Err(InterferenceError::Empty);
    }
    let mut windows = Vec::with_capacity(aois.len());
    let mut window_sirs = Vec::with_capacity(aois.len());
    let mut window_mask_counts = Vec::with_capacity(aois.len());
    let mut aoi_lse = Vec::with_capacity(aois.len());
    for (m, aoi) in aois.iter().enumerate() {
        let window = extract_aoi_window(sir, aoi, m)?;
        let mut sirs = Vec::with_capacity(sir.n_abs);
        let mut counts = Vec::with_capacity(sir.n_abs);
        for i in 0..sir.n_abs {
            let mut sum = 0.0;
            let mut count = 0usize;
            for iy in window.y_range.0..window.y_range.1 {
                for ix in window.x_range.0..window.x_range.1 {
                    let idx = sir.idx(i, ix, iy);
                    if mask.ones[idx] {
                        sum += linear_to_db(sir.linear[idx]);
                        count += 1;
                    }
                }
            }
            if count == 0 {
                return Err(InterferenceError::NoCoverageInWindow { abs: i, aoi: m });
            }
            sirs.push(sum / count as f64);
            counts.push(count);
        }
        aoi_lse.push(lse(&sirs, beta)?);
        windows.push(window);
        window_sirs.push(sirs);
        window_mask_counts.push(counts);
    }
    let weights = softmin_weights(&aoi_lse, temperature)?;
    let weighted = -weights
        .iter()
        .zip(aoi_lse.iter())
        .map(|(w, x)| w * x)
        .sum::<f64>();
    let unweighted = -aoi_lse.iter().sum::<f64>();
    Ok(WeightedAoiLoss {
        windows,
        window_sirs,
        window_mask_counts,
        aoi_lse,
        weights,
        weighted,
        unweighted,
    })
}

/// Jain's fairness index over dB values, computed on the linear powers:
/// `(sum x)^2 / (n sum x^2)`, in `(0, 1]`.
pub fn jain_fairness(values_db: &[f64]) -> Result<f64, InterferenceError> {
    if values_db.is_empty() {
        return Err(InterferenceError::Empty);
    }
    let linear: Vec<f64> = values_db.iter().map(|v| db_to_linear(*v)).collect();
    let sum: f64 = linear.iter().sum();
    let sum_sq: f64 = linear.iter().map(|x| x * x).sum();
    Ok(sum * sum / (linear.len() as f64 * sum_sq))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn synthetic_map(n_abs: usize, cells: usize, seed: u64) -> CoverageMap {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CoverageMap {
            n_abs,
            cells_x: cells,
            cells_y: cells,
            origin: [0.0, 0.0],
            cell_size: 10.0,
            f_c_hz: 3.5e9,
            gains: (0..n_abs * cells * cells)
                .map(|_| rng.gen_range(1e-12..1e-6))
                .collect(),
            differentiable: true,
        }
    }

    #[test]
    fn sir_symmetric_pair_is_zero_db() {
        let mut map = synthetic_map(2, 2, 1);
        // Identical gains for both transmitters.
        let per = map.cells_per_abs();
        let first: Vec<f64> = map.gains[..per].to_vec();
        map.gains[per..].copy_from_slice(&first);
        let sir = sir_map(&map, &[2.0, 2.0], DEFAULT_EPSILON);
        for c in 0..per {
            assert!((sir.linear[c] - 1.0).abs() < 1e-6);
            assert!(sir.db(0, c % 2, c / 2).abs() < 1e-5);
        }
    }

    #[test]
    fn sir_single_abs_is_power_over_epsilon() {
        let map = synthetic_map(1, 2, 2);
        let sir = sir_map(&map, &[4.0], 1e-20);
        for c in 0..map.cells_per_abs() {
            let expect = 4.0 * map.gains[c] / 1e-20;
            assert!((sir.linear[c] - expect).abs() / expect < 1e-12);
        }
    }

    #[test]
    fn sir_matches_per_cell_loop_oracle() {
        let map = synthetic_map(3, 8, 3);
        let powers = [1.5, 20.0, 7.0];
        let eps = 1e-20;
        let sir = sir_map(&map, &powers, eps);
        let per = map.cells_per_abs();
        for i in 0..3 {
            for c in 0..per {
                let mut interference = eps;
                for j in 0..3 {
                    if j != i {
                        interference += powers[j] * map.gains[j * per + c];
                    }
                }
                let expect = powers[i] * map.gains[i * per + c] / interference;
                let got = sir.linear[i * per + c];
                assert!((got - expect).abs() / expect < 1e-12);
            }
        }
    }

    #[test]
    fn sir_invariant_to_common_power_scale() {
        let map = synthetic_map(3, 6, 4);
        let powers = [1.0, 5.0, 0.5];
        let scaled: Vec<f64> = powers.iter().map(|p| p * 37.0).collect();
        let a = sir_map(&map, &powers, 1e-20);
        let b = sir_map(&map, &scaled, 1e-20 * 37.0);
        for (x, y) in a.linear.iter().zip(b.linear.iter()) {
            assert!((x - y).abs() / x < 1e-12);
        }
    }

    #[test]
    fn mask_threshold_semantics() {
        let map = synthetic_map(2, 3, 5);
        let all = coverage_mask(&map, 0.0);
        assert!(all.ones.iter().all(|m| *m));
        let mut zero_map = map.clone();
        zero_map.gains.iter_mut().for_each(|g| *g = 0.0);
        let none = coverage_mask(&zero_map, 0.0);
        assert!(none.ones.iter().all(|m| !*m));
        // Deterministic under re-application.
        let again = coverage_mask(&map, 0.0);
        assert_eq!(all.ones, again.ones);
    }

    #[test]
    fn effective_sir_masked_mean() {
        // 2x2 grid, one ABS: half the cells at 0 dB are masked out, the
        // other half at 6 dB are kept.
        let six_db = db_to_linear(6.0);
        let sir = SirMap {
            n_abs: 1,
            cells_x: 2,
            cells_y: 2,
            origin: [0.0, 0.0],
            cell_size: 10.0,
            linear: vec![1.0, six_db, 1.0, six_db],
            epsilon: 1e-20,
        };
        let mask = CoverageMask {
            n_abs: 1,
            cells_x: 2,
            cells_y: 2,
            ones: vec![false, true, false, true],
        };
        assert!((effective_sir(&sir, &mask, 0).unwrap() - 6.0).abs() < 1e-12);

        let full = CoverageMask {
            ones: vec![true; 4],
            ..mask.clone()
        };
        let uniform = SirMap {
            linear: vec![db_to_linear(3.0); 4],
            ..sir.clone()
        };
        assert!((effective_sir(&uniform, &full, 0).unwrap() - 3.0).abs() < 1e-12);

        let empty = CoverageMask {
            ones: vec![false; 4],
            ..mask
        };
        assert!(matches!(
            effective_sir(&sir, &empty, 0),
            Err(InterferenceError::NoCoverage { abs: 0 })
        ));
    }

    #[test]
    fn effective_sir_matches_loop_oracle() {
        let map = synthetic_map(2, 5, 7);
        let sir = sir_map(&map, &[3.0, 9.0], 1e-20);
        let mask = coverage_mask(&map, 2e-8);
        for abs in 0..2 {
            let per = 25;
            let mut sum = 0.0;
            let mut n = 0;
            for c in 0..per {
                if map.gains[abs * per + c] > 2e-8 {
                    sum += 10.0 * sir.linear[abs * per + c].log10();
                    n += 1;
                }
            }
            if n > 0 {
                let got = effective_sir(&sir, &mask, abs).unwrap();
                assert!((got - sum / n as f64).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn nlse_and_lse_reference_values() {
        assert_eq!(nlse(&[5.0], 1.0).unwrap(), 5.0);
        assert_eq!(lse(&[5.0], 1.0).unwrap(), 5.0);
        assert!((nlse(&[0.0, 0.0], 1.0).unwrap() + std::f64::consts::LN_2).abs() < 1e-12);
        assert!((lse(&[0.0, 0.0], 1.0).unwrap() - std::f64::consts::LN_2).abs() < 1e-12);
        // Stability at extreme magnitudes.
        assert!(nlse(&[-1e6, 1e6], 1.0).unwrap().is_finite());
        assert!(lse(&[-1e6, 1e6], 1.0).unwrap().is_finite());
    }

    #[test]
    fn smooth_extrema_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let n = rng.gen_range(1..12);
            let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-40.0..40.0)).collect();
            let beta = rng.gen_range(0.2..4.0);
            let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let slack = (n as f64).ln() / beta;
            let a = nlse(&v, beta).unwrap();
            let b = lse(&v, beta).unwrap();
            assert!(a <= lo + 1e-12 && a >= lo - slack - 1e-12);
            assert!(b >= hi - 1e-12 && b <= hi + slack + 1e-12);
        }
    }

    #[test]
    fn maxmin_loss_shape() {
        assert_eq!(loss_maxmin(&[7.0], 1.0, 0.0).unwrap(), -7.0);
        // Raising the minimum with others fixed lowers the loss.
        let base = loss_maxmin(&[-5.0, 2.0, 3.0], 1.0, 0.25).unwrap();
        let better = loss_maxmin(&[-4.0, 2.0, 3.0], 1.0, 0.25).unwrap();
        assert!(better < base);
    }

    #[test]
    fn window_extraction_and_clipping() {
        let sir = SirMap {
            n_abs: 1,
            cells_x: 20,
            cells_y: 20,
            origin: [0.0, 0.0],
            cell_size: 10.0,
            linear: (0..400).map(|k| (k + 1) as f64).collect(),
            epsilon: 1e-20,
        };
        // Center cell (10, 10), radius 5 cells: a 10x10 window.
        let aoi = Aoi::new([105.0, 105.0], 50.0).unwrap();
        let w = extract_aoi_window(&sir, &aoi, 0).unwrap();
        assert_eq!(w.cell_count(), 100);
        assert!(!w.clipped);
        assert_eq!(w.x_range, (5, 15));
        assert_eq!(w.y_range, (5, 15));

        // Near the edge the window clips and says so.
        let corner = Aoi::new([15.0, 15.0], 50.0).unwrap();
        let wc = extract_aoi_window(&sir, &corner, 1).unwrap();
        assert!(wc.clipped);
        assert_eq!(wc.x_range, (0, 6));

        // Direct slicing oracle over the window contents.
        let mask = CoverageMask {
            n_abs: 1,
            cells_x: 20,
            cells_y: 20,
            ones: vec![true; 400],
        };
        let got = effective_sir_in_window(&sir, &mask, 0, &w, 0).unwrap();
        let mut oracle = 0.0;
        for iy in 5..15 {
            for ix in 5..15 {
                oracle += 10.0 * ((iy * 20 + ix + 1) as f64).log10();
            }
        }
        oracle /= 100.0;
        assert!((got - oracle).abs() < 1e-9);

        let outside = Aoi::new([5000.0, 5000.0], 50.0).unwrap();
        assert!(matches!(
            extract_aoi_window(&sir, &outside, 2),
            Err(InterferenceError::AoiOutsideGrid { aoi: 2 })
        ));
    }

    #[test]
    fn softmin_reference_values() {
        let w = softmin_weights(&[4.0, 4.0, 4.0], 25.0).unwrap();
        for v in &w {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
        let w = softmin_weights(&[0.0, 25.0], 25.0).unwrap();
        assert!((w[0] - 0.731059).abs() < 1e-6);
        assert!((w[1] - 0.268941).abs() < 1e-6);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        // Shift invariance.
        let shifted = softmin_weights(&[100.0, 125.0], 25.0).unwrap();
        for (a, b) in w.iter().zip(shifted.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_aoi_loss_composition() {
        let map = synthetic_map(3, 30, 13);
        let sir = sir_map(&map, &[5.0, 5.0, 5.0], DEFAULT_EPSILON);
        let mask = coverage_mask(&map, 0.0);
        let aois = vec![
            Aoi::new([80.0, 90.0], 40.0).unwrap(),
            Aoi::new([220.0, 200.0], 60.0).unwrap(),
        ];
        let out = loss_weighted_aoi(&sir, &mask, &aois, 1.0, 25.0).unwrap();

        // Compose the individual operations independently.
        let mut xs = Vec::new();
        for (m, aoi) in aois.iter().enumerate() {
            let w = extract_aoi_window(&sir, aoi, m).unwrap();
            let sirs: Vec<f64> = (0..3)
                .map(|i| effective_sir_in_window(&sir, &mask, i, &w, m).unwrap())
                .collect();
            xs.push(lse(&sirs, 1.0).unwrap());
        }
        let ws = softmin_weights(&xs, 25.0).unwrap();
        let lw = -ws.iter().zip(xs.iter()).map(|(w, x)| w * x).sum::<f64>();
        let lu = -xs.iter().sum::<f64>();
        assert!((out.weighted - lw).abs() < 1e-12);
        assert!((out.unweighted - lu).abs() < 1e-12);

        // Single AOI: weight one, weighted equals unweighted equals -lse.
        let single = loss_weighted_aoi(&sir, &mask, &aois[..1], 1.0, 25.0).unwrap();
        assert!((single.weighted - single.unweighted).abs() < 1e-12);
        assert!((single.weighted + single.aoi_lse[0]).abs() < 1e-12);
    }

    #[test]
    fn weighted_loss_with_equal_lse_is_negative_mean() {
        // Symmetric construction: both AOIs see identical SIR structure.
        let per = 100;
        let map = CoverageMap {
            n_abs: 2,
            cells_x: 10,
            cells_y: 10,
            origin: [0.0, 0.0],
            cell_size: 10.0,
            f_c_hz: 3.5e9,
            gains: vec![1e-8; 2 * per],
            differentiable: true,
        };
        let sir = sir_map(&map, &[1.0, 1.0], DEFAULT_EPSILON);
        let mask = coverage_mask(&map, 0.0);
        let aois = vec![
            Aoi::new([25.0, 25.0], 20.0).unwrap(),
            Aoi::new([75.0, 75.0], 20.0).unwrap(),
        ];
        let out = loss_weighted_aoi(&sir, &mask, &aois, 1.0, 25.0).unwrap();
        let mean = out.aoi_lse.iter().sum::<f64>() / 2.0;
        assert!((out.weighted + mean).abs() < 1e-12);
        for w in &out.weights {
            assert!((w - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn jain_reference_values() {
        assert!((jain_fairness(&[3.0, 3.0, 3.0]).unwrap() - 1.0).abs() < 1e-12);
        // One unit of power against one zero (in linear): 0.5.
        let one = 0.0; // 0 dB -> 1.0 linear
        let tiny = -300.0; // effectively zero linear power
        assert!((jain_fairness(&[one, tiny]).unwrap() - 0.5).abs() < 1e-6);
        // Reported initial effective SIR column of the reference deployment.
        let initial = [
            -9.595, -0.189, -1.537, -4.213, 4.625, -1.165, 19.760, 25.527, 5.666, 3.248,
        ];
        let fi = jain_fairness(&initial).unwrap();
        assert!((fi - 0.157).abs() < 0.005, "got {fi}");
    }
}

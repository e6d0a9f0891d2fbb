//! Orientation and transmit-power optimization over a fixed deployment:
//! gradient descent on the max-min loss (whole-map fairness) or the
//! weighted-AOI loss (per-area service), with range projection after every
//! step, plateau-driven learning-rate decay and early stopping.
//!
//! Gradients flow analytically from the scalar loss through the SIR grid
//! into the per-cell coverage partials produced by the propagation model.

#![allow(clippy::needless_range_loop)]

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::antenna::{AZIMUTH_BOUND, TILT_MAX, TILT_MIN};
use crate::geometry::{Aoi, Point2, Scene};
use crate::interference::{
    coverage_mask, effective_sirs, loss_maxmin, loss_weighted_aoi, sir_map, softmin_weights,
    InterferenceError, DEFAULT_EPSILON,
};
use crate::optim::{Adam, PlateauTracker, RmsProp};
use crate::propagation::{compute_coverage_map_with_grads, tx_bank, PropagationConfig};
use crate::units::dbm_to_watts;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Default transmit-power ceiling in dBm.
pub const POWER_CEILING_DBM: f64 = 43.0;

#[derive(Debug, Error)]
pub enum OrientError {
    #[error(transparent)]
    Interference(#[from] InterferenceError),
    #[error("loss became non-finite at epoch {epoch}")]
    NonFiniteLoss { epoch: usize, trace: Box<OrientTrace> },
}

/// Per-ABS mechanical azimuth (rad), mechanical tilt (rad) and transmit
/// power (dBm).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientPowerParams {
    pub azimuths: Vec<f64>,
    pub tilts: Vec<f64>,
    pub powers_dbm: Vec<f64>,
}

impl OrientPowerParams {
    /// Standard starting point: panels facing straight down, zero azimuth,
    /// full power.
    pub fn facing_down(n: usize, power_dbm: f64) -> Self {
        Self {
            azimuths: vec![0.0; n],
            tilts: vec![std::f64::consts::FRAC_PI_2; n],
            powers_dbm: vec![power_dbm; n],
        }
    }

    pub fn len(&self) -> usize {
        self.azimuths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.azimuths.is_empty()
    }
}

/// Componentwise projection into the allowed ranges; idempotent.
pub fn clamp_params(params: &mut OrientPowerParams, power_ceiling_dbm: f64) {
    for a in &mut params.azimuths {
        *a = a.clamp(-AZIMUTH_BOUND, AZIMUTH_BOUND);
    }
    for t in &mut params.tilts {
        *t = t.clamp(TILT_MIN, TILT_MAX);
    }
    for p in &mut params.powers_dbm {
        *p = p.min(power_ceiling_dbm);
    }
}

/// Uniform random draw over the allowed parameter ranges (baseline harness).
pub fn uniform_random_params(
    n: usize,
    power_range_dbm: (f64, f64),
    seed: u64,
) -> OrientPowerParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    OrientPowerParams {
        azimuths: (0..n)
            .map(|_| rng.gen_range(-AZIMUTH_BOUND..=AZIMUTH_BOUND))
            .collect(),
        tilts: (0..n).map(|_| rng.gen_range(TILT_MIN..=TILT_MAX)).collect(),
        powers_dbm: (0..n)
            .map(|_| rng.gen_range(power_range_dbm.0..=power_range_dbm.1))
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientMethod {
    /// Raise the smooth minimum of per-ABS effective SIRs plus a scaled
    /// average term.
    MaxMin,
    /// Pure average-SIR objective (the max-min baseline without the smooth
    /// minimum term).
    AvgSir,
    /// Weighted per-AOI smooth-maximum objective.
    WeightedAoi,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    RmsProp,
    Adam,
}

/// Loop settings for one optimization run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientSchedule {
    pub algorithm: Algorithm,
    pub learning_rate: f64,
    /// Learning-rate multiplier applied after `patience` stale epochs.
    pub decay: f64,
    pub patience: usize,
    pub max_epochs: usize,
    /// Stop once the decayed learning rate drops below this floor.
    pub lr_floor: f64,
    pub power_ceiling_dbm: f64,
}

impl OrientSchedule {
    /// Whole-map method defaults: RMSProp at 0.1 for 150 epochs, decay 0.5,
    /// patience 5.
    pub fn maxmin_default() -> Self {
        Self {
            algorithm: Algorithm::RmsProp,
            learning_rate: 0.1,
            decay: 0.5,
            patience: 5,
            max_epochs: 150,
            lr_floor: 1e-4,
            power_ceiling_dbm: POWER_CEILING_DBM,
        }
    }

    /// Weighted-AOI method defaults: same loop at 0.05.
    pub fn weighted_aoi_default() -> Self {
        Self {
            learning_rate: 0.05,
            ..Self::maxmin_default()
        }
    }
}

/// Loss shaping constants shared by both methods.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrientLossConfig {
    /// Temperature of the smooth min/max surrogates.
    pub beta_l: f64,
    /// Scale of the average-SIR term in the max-min loss.
    pub xi: f64,
    /// Softmin temperature over per-AOI objectives.
    pub temperature: f64,
    /// Interference denominator floor.
    pub epsilon: f64,
    /// Coverage-mask threshold; `None` derives the default from the scene.
    pub mask_threshold: Option<f64>,
}

impl Default for OrientLossConfig {
    fn default() -> Self {
        Self {
            beta_l: 1.0,
            xi: 0.25,
            temperature: 25.0,
            epsilon: DEFAULT_EPSILON,
            mask_threshold: None,
        }
    }
}

/// Loss value plus analytic gradients w.r.t. every optimized parameter and,
/// for diagnostics, the fixed positions.
#[derive(Debug, Clone)]
pub struct OrientEval {
    pub loss: f64,
    pub grad_azimuth: Vec<f64>,
    pub grad_tilt: Vec<f64>,
    pub grad_power_dbm: Vec<f64>,
    /// Gradient w.r.t. the hover positions (not stepped by this optimizer).
    pub grad_position: Vec<Point2>,
    /// Whole-map effective SIR per ABS at these parameters (dB).
    pub effective_sirs: Vec<f64>,
}

/// One recorded epoch of the optimization loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientEpoch {
    pub epoch: usize,
    pub loss: f64,
    /// Running minimum of the loss; the returned parameters realize the
    /// final value of this channel.
    pub best_loss: f64,
    pub learning_rate: f64,
    pub min_effective_sir_db: f64,
    pub mean_effective_sir_db: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrientTermination {
    EpochCap,
    LearningRateFloor,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OrientTrace {
    pub epochs: Vec<OrientEpoch>,
    pub termination: OrientTermination,
}

/// Evaluates the chosen loss and its analytic gradients at one parameter
/// point. The coverage map is recomputed through the differentiable path, so
/// the value channel is consistent with the gradients.
pub fn orient_loss_and_grad(
    scene: &Scene,
    positions: &[Point2],
    aois: &[Aoi],
    params: &OrientPowerParams,
    method: OrientMethod,
    prop_cfg: &PropagationConfig,
    loss_cfg: &OrientLossConfig,
) -> Result<OrientEval, OrientError> {
    let n = positions.len();
    let txs = tx_bank(
        scene,
        positions,
        &params.azimuths,
        &params.tilts,
        &params.powers_dbm,
    );
    let (map, grads) = compute_coverage_map_with_grads(scene, &txs, prop_cfg);
    let powers_w: Vec<f64> = params.powers_dbm.iter().map(|p| dbm_to_watts(*p)).collect();
    let sir = sir_map(&map, &powers_w, loss_cfg.epsilon);
    let threshold = loss_cfg
        .mask_threshold
        .unwrap_or_else(|| prop_cfg.default_mask_threshold(scene));
    let mask = coverage_mask(&map, threshold);
    let per = map.cells_per_abs();
    let r_hat = effective_sirs(&sir, &mask)?;

    // Fill dL/dR_db per (abs, cell); only masked cells carry weight.
    let mut a = vec![0.0f64; n * per];
    let mut touched = vec![false; per];
    let loss = match method {
        OrientMethod::MaxMin | OrientMethod::AvgSir => {
            let du: Vec<f64> = match method {
                OrientMethod::MaxMin => {
                    // d(-nlse)/dr_i is the softmin weight of r_i.
                    let w = softmin_weights(&r_hat, 1.0 / loss_cfg.beta_l)?;
                    w.iter().map(|wi| -wi - loss_cfg.xi / n as f64).collect()
                }
                _ => vec![-1.0 / n as f64; n],
            };
            let mut counts = vec![0usize; n];
            for i in 0..n {
                counts[i] = mask.covered_cells(i);
            }
            for i in 0..n {
                let scale = du[i] / counts[i] as f64;
                for c in 0..per {
                    if mask.ones[i * per + c] {
                        a[i * per + c] = scale;
                        touched[c] = true;
                    }
                }
            }
            match method {
                OrientMethod::MaxMin => loss_maxmin(&r_hat, loss_cfg.beta_l, loss_cfg.xi)?,
                _ => -r_hat.iter().sum::<f64>() / n as f64,
            }
        }
        OrientMethod::WeightedAoi => {
            let out = loss_weighted_aoi(&sir, &mask, aois, loss_cfg.beta_l, loss_cfg.temperature)?;
            let weighted_mean: f64 = out
                .weights
                .iter()
                .zip(out.aoi_lse.iter())
                .map(|(w, x)| w * x)
                .sum();
            for (m, window) in out.windows.iter().enumerate() {
                // dL/dx_m differentiates through the softmin priorities.
                let dl_dx = -out.weights[m]
                    * (1.0 + (weighted_mean - out.aoi_lse[m]) / loss_cfg.temperature);
                // dx_m/dr_i is the softmax of the window SIRs.
                let m_max = out.window_sirs[m]
                    .iter()
                    .copied()
                    .fold(f64::NEG_INFINITY, f64::max);
                let exps: Vec<f64> = out.window_sirs[m]
                    .iter()
                    .map(|v| (loss_cfg.beta_l * (v - m_max)).exp())
                    .collect();
                let z: f64 = exps.iter().sum();
                for i in 0..n {
                    let du = dl_dx * exps[i] / z;
                    let scale = du / out.window_mask_counts[m][i] as f64;
                    for iy in window.y_range.0..window.y_range.1 {
                        for ix in window.x_range.0..window.x_range.1 {
                            let idx = (i * map.cells_y + iy) * map.cells_x + ix;
                            let cell = iy * map.cells_x + ix;
                            if mask.ones[idx] {
                                a[idx] += scale;
                                touched[cell] = true;
                            }
                        }
                    }
                }
            }
            out.weighted
        }
    };

    // Backpropagate through the SIR grid into coverage and power partials.
    let ln10 = std::f64::consts::LN_10;
    let mut grad_azimuth = vec![0.0; n];
    let mut grad_tilt = vec![0.0; n];
    let mut grad_power_w = vec![0.0; n];
    let mut grad_position = vec![[0.0, 0.0]; n];
    let mut alpha = vec![0.0f64; n];
    for c in 0..per {
        if !touched[c] {
            continue;
        }
        let mut total = loss_cfg.epsilon;
        for j in 0..n {
            total += powers_w[j] * map.gains[j * per + c];
        }
        // alpha_i = dL/dR_i in linear scale; q collects the shared
        // cross-interference term.
        let mut q = 0.0;
        for i in 0..n {
            let ai = a[i * per + c];
            if ai == 0.0 {
                alpha[i] = 0.0;
                continue;
            }
            let own = powers_w[i] * map.gains[i * per + c];
            let denom = total - own; // includes epsilon
            let r = own / denom;
            let al = ai * 10.0 / (ln10 * r);
            alpha[i] = al;
            q += al * own / (denom * denom);
        }
        for j in 0..n {
            let own = powers_w[j] * map.gains[j * per + c];
            let denom = total - own;
            let dl_ds = alpha[j] / denom + alpha[j] * own / (denom * denom) - q;
            if dl_ds == 0.0 {
                continue;
            }
            let idx = j * per + c;
            let dl_dc = dl_ds * powers_w[j];
            let d = grads.d[idx];
            grad_position[j][0] += dl_dc * d[0];
            grad_position[j][1] += dl_dc * d[1];
            grad_azimuth[j] += dl_dc * d[2];
            grad_tilt[j] += dl_dc * d[3];
            grad_power_w[j] += dl_ds * map.gains[idx];
        }
    }
    let grad_power_dbm: Vec<f64> = grad_power_w
        .iter()
        .zip(powers_w.iter())
        .map(|(g, p)| g * p * ln10 / 10.0)
        .collect();

    Ok(OrientEval {
        loss,
        grad_azimuth,
        grad_tilt,
        grad_power_dbm,
        grad_position,
        effective_sirs: r_hat,
    })
}

enum Stepper {
    RmsProp(RmsProp),
    Adam(Adam),
}

impl Stepper {
    fn step(&mut self, params: &mut [f64], grads: &[f64]) {
        match self {
            Stepper::RmsProp(o) => o.step(params, grads),
            Stepper::Adam(o) => o.step(params, grads),
        }
    }

    fn set_lr(&mut self, lr: f64) {
        match self {
            Stepper::RmsProp(o) => o.learning_rate = lr,
            Stepper::Adam(o) => o.learning_rate = lr,
        }
    }
}

/// Full optimization loop: recompute coverage, SIR and loss each epoch, step
/// the parameters, project into range; decay the learning rate after
/// `patience` stale epochs and stop at the epoch cap or the rate floor.
/// Returns the best-loss parameters seen.
#[allow(clippy::too_many_arguments)]
pub fn optimize_orient_power(
    scene: &Scene,
    positions: &[Point2],
    aois: &[Aoi],
    method: OrientMethod,
    init: &OrientPowerParams,
    schedule: &OrientSchedule,
    prop_cfg: &PropagationConfig,
    loss_cfg: &OrientLossConfig,
) -> Result<(OrientPowerParams, OrientTrace), OrientError> {
    let n = positions.len();
    let mut params = init.clone();
    clamp_params(&mut params, schedule.power_ceiling_dbm);

    let mut trace = OrientTrace {
        epochs: Vec::new(),
        termination: OrientTermination::EpochCap,
    };
    let mut lr = schedule.learning_rate;
    let mut stepper = match schedule.algorithm {
        Algorithm::RmsProp => Stepper::RmsProp(RmsProp::new(lr, 3 * n)),
        Algorithm::Adam => Stepper::Adam(Adam::new(lr, 3 * n)),
    };
    let mut plateau = PlateauTracker::new(schedule.patience.max(1));
    let mut best: Option<(OrientPowerParams, f64)> = None;

    let mut epoch = 0usize;
    loop {
        let eval = orient_loss_and_grad(scene, positions, aois, &params, method, prop_cfg, loss_cfg)?;
        if !eval.loss.is_finite() {
            return Err(OrientError::NonFiniteLoss {
                epoch,
                trace: Box::new(trace),
            });
        }
        let min_sir = eval
            .effective_sirs
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min);
        let mean_sir = eval.effective_sirs.iter().sum::<f64>() / n as f64;
        if best.as_ref().is_none_or(|(_, b)| eval.loss < *b) {
            best = Some((params.clone(), eval.loss));
        }
        trace.epochs.push(OrientEpoch {
            epoch,
            loss: eval.loss,
            best_loss: best.as_ref().expect("just set").1,
            learning_rate: lr,
            min_effective_sir_db: min_sir,
            mean_effective_sir_db: mean_sir,
        });
        if epoch >= schedule.max_epochs {
            trace.termination = OrientTermination::EpochCap;
            break;
        }
        if plateau.observe(eval.loss) {
            lr *= schedule.decay;
            if lr < schedule.lr_floor {
                trace.termination = OrientTermination::LearningRateFloor;
                break;
            }
            stepper.set_lr(lr);
        }

        let mut flat = Vec::with_capacity(3 * n);
        flat.extend_from_slice(&params.azimuths);
        flat.extend_from_slice(&params.tilts);
        flat.extend_from_slice(&params.powers_dbm);
        let mut grads = Vec::with_capacity(3 * n);
        grads.extend_from_slice(&eval.grad_azimuth);
        grads.extend_from_slice(&eval.grad_tilt);
        grads.extend_from_slice(&eval.grad_power_dbm);
        stepper.step(&mut flat, &grads);
        params.azimuths.copy_from_slice(&flat[..n]);
        params.tilts.copy_from_slice(&flat[n..2 * n]);
        params.powers_dbm.copy_from_slice(&flat[2 * n..]);
        clamp_params(&mut params, schedule.power_ceiling_dbm);
        epoch += 1;
    }

    Ok((best.expect("at least one epoch evaluated").0, trace))
}

//! Composite placement loss with analytic gradients, the gradient-descent
//! placement loop that turns iterates into navigation waypoints, and the AOI
//! satisfaction metric.
//!
//! The loss combines four terms over the ABS positions `p_i`:
//! a coverage factor `K` (sum over reference grid points of the distance to
//! the nearest ABS, maximized), a pairwise repulsion penalty below `d_min`,
//! an AOI attraction penalty with a per-AOI weight that fades once ABSs have
//! arrived, and an exponential building-collision penalty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{
    dist2, distance_to_building, distance_to_building_grad, generate_grid, Aoi, Building,
    GeometryError, GridSpec, Point2, Scene,
};
use crate::optim::{Adam, PlateauTracker};

#[derive(Debug, Error)]
pub enum PlacementError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error("loss became non-finite at iteration {iteration}")]
    NonFiniteLoss {
        iteration: usize,
        trace: Box<PlacementTrace>,
    },
    #[error("AOI satisfaction is undefined without AOIs")]
    NoAois,
}

/// Which exponent the attraction penalty's near-field term uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttractionForm {
    /// `exp(-kappa_a * d - r_k)`: the radius acts as a constant attenuation.
    AsPrinted,
    /// `exp(-kappa_a * (d - r_k))`: the radius shifts the exponential knee.
    RadiusOffset,
}

/// Scale factors, steepness constants and loop settings for placement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementHyper {
    /// Scale of the coverage term (subtracted from the loss).
    pub alpha: f64,
    /// Scale of the AOI attraction penalty.
    pub beta: f64,
    /// Scale of the inter-ABS repulsion penalty.
    pub gamma: f64,
    /// Scale of the building collision penalty.
    pub eta: f64,
    /// Steepness of the attraction exponential.
    pub kappa_a: f64,
    /// Steepness of the collision exponential.
    pub kappa_b: f64,
    /// Steepness of the arrival sigmoid inside the AOI weight.
    pub kappa_i: f64,
    /// Minimum separation between ABSs in meters.
    pub d_min: f64,
    /// Minimum allowed distance from blocking buildings in meters; doubles as
    /// the height tolerance when selecting blocking buildings.
    pub c_b: f64,
    /// Reference grid for the coverage term.
    pub grid: GridSpec,
    pub attraction_form: AttractionForm,
    pub learning_rate: f64,
    pub max_iterations: usize,
    /// Iterations without best-loss improvement before stopping.
    pub patience: usize,
}

impl Default for PlacementHyper {
    fn default() -> Self {
        Self {
            alpha: 0.01,
            beta: 1.0,
            gamma: 0.8,
            eta: 1.0,
            kappa_a: 0.02,
            kappa_b: 0.5,
            kappa_i: 0.25,
            d_min: 400.0,
            c_b: 15.0,
            grid: GridSpec {
                points_x: 5,
                points_y: 5,
                margin: 150.0,
            },
            attraction_form: AttractionForm::AsPrinted,
            learning_rate: 2.0,
            max_iterations: 2500,
            patience: 20,
        }
    }
}

/// One recorded optimizer step: the positions after the step and their loss.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementStep {
    pub positions: Vec<Point2>,
    pub loss: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    IterationCap,
    EarlyStopped,
}

/// Full optimization history: every iterate doubles as a navigation waypoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PlacementTrace {
    pub initial_positions: Vec<Point2>,
    pub initial_loss: f64,
    pub steps: Vec<PlacementStep>,
    pub termination: Termination,
    /// Index into `steps` of the best loss; `None` if the initial point won.
    pub best_step: Option<usize>,
}

impl PlacementTrace {
    pub fn best_loss(&self) -> f64 {
        match self.best_step {
            Some(i) => self.steps[i].loss,
            None => self.initial_loss,
        }
    }

    /// Initial position plus every iterate, in flight order, for one ABS.
    pub fn waypoints(&self, abs_index: usize) -> Vec<Point2> {
        let mut w = vec![self.initial_positions[abs_index]];
        w.extend(self.steps.iter().map(|s| s.positions[abs_index]));
        w
    }
}

/// Coverage factor: sum over grid points of the distance to the nearest ABS.
pub fn coverage_factor(positions: &[Point2], grid_points: &[Point2]) -> f64 {
    grid_points
        .iter()
        .map(|g| {
            positions
                .iter()
                .map(|p| dist2(*g, *p))
                .fold(f64::INFINITY, f64::min)
        })
        .sum()
}

/// Repulsion penalty over ordered pairs `i != j`:
/// `sum max(0, d_min - |p_i - p_j|)`.
pub fn repulsion_penalty(positions: &[Point2], d_min: f64) -> f64 {
    let n = positions.len();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                total += (d_min - dist2(positions[i], positions[j])).max(0.0);
            }
        }
    }
    total
}

/// Steepness-controlled sigmoid `1 / (1 + exp(-kappa (z - t)))`, evaluated in
/// the overflow-safe branch form.
pub fn smooth_sigmoid(z: f64, t: f64, kappa: f64) -> f64 {
    let x = kappa * (z - t);
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-AOI weight that decays as ABSs come within two thirds of the radius:
/// `exp(-sum_i sigmoid(|p_i - c|, 2r/3, -kappa_i))`.
pub fn aoi_weight(positions: &[Point2], aoi: &Aoi, kappa_i: f64) -> f64 {
    let t = aoi.service_radius();
    let s: f64 = positions
        .iter()
        .map(|p| smooth_sigmoid(dist2(*p, aoi.center), t, -kappa_i))
        .sum();
    (-s).exp()
}

fn attraction_exponent(d: f64, radius: f64, kappa_a: f64, form: AttractionForm) -> f64 {
    match form {
        AttractionForm::AsPrinted => -kappa_a * d - radius,
        AttractionForm::RadiusOffset => -kappa_a * (d - radius),
    }
}

/// Attraction penalty pulling ABSs toward AOI centers: linear while an AOI is
/// unserved, switching to the exponential near-field term once inside.
pub fn attraction_penalty(
    positions: &[Point2],
    aois: &[Aoi],
    kappa_a: f64,
    kappa_i: f64,
    form: AttractionForm,
) -> f64 {
    let mut total = 0.0;
    for aoi in aois {
        let w = aoi_weight(positions, aoi, kappa_i);
        for p in positions {
            let d = dist2(*p, aoi.center);
            let e = attraction_exponent(d, aoi.radius, kappa_a, form).exp();
            total += w * d - (1.0 - w) * e;
        }
    }
    total
}

/// Collision penalty `sum_i sum_b exp(kappa_b (c_b - d_ib))` over blocking
/// buildings.
pub fn collision_penalty(
    positions: &[Point2],
    blocking: &[Building],
    kappa_b: f64,
    c_b: f64,
) -> f64 {
    let mut total = 0.0;
    for p in positions {
        for b in blocking {
            total += (kappa_b * (c_b - distance_to_building(*p, b))).exp();
        }
    }
    total
}

/// Precomputed static inputs for repeated loss/gradient evaluation.
pub struct PlacementContext {
    pub grid: Vec<Point2>,
    pub blocking: Vec<Building>,
    pub aois: Vec<Aoi>,
    pub hyper: PlacementHyper,
}

impl PlacementContext {
    pub fn new(scene: &Scene, aois: &[Aoi], hyper: &PlacementHyper) -> Result<Self, PlacementError> {
        Ok(Self {
            grid: generate_grid(scene, &hyper.grid)?,
            blocking: scene.blocking_buildings(hyper.c_b),
            aois: aois.to_vec(),
            hyper: hyper.clone(),
        })
    }

    pub fn loss(&self, positions: &[Point2]) -> f64 {
        let h = &self.hyper;
        let k = coverage_factor(positions, &self.grid);
        let pa = attraction_penalty(positions, &self.aois, h.kappa_a, h.kappa_i, h.attraction_form);
        let pu = repulsion_penalty(positions, h.d_min);
        let pb = collision_penalty(positions, &self.blocking, h.kappa_b, h.c_b);
        -h.alpha * k + h.beta * pa + h.gamma * pu + h.eta * pb
    }

    /// Analytic gradient of the loss w.r.t. each position. Distance kinks
    /// (coincident points, max ties) take subgradient zero.
    pub fn gradient(&self, positions: &[Point2]) -> Vec<Point2> {
        let h = &self.hyper;
        let n = positions.len();
        let mut grad = vec![[0.0, 0.0]; n];

        // Coverage: each grid point pushes only its nearest ABS. Exact
        // argmin ties take subgradient zero.
        for g in &self.grid {
            let mut best = 0usize;
            let mut best_d = f64::INFINITY;
            let mut tied = false;
            for (i, p) in positions.iter().enumerate() {
                let d = dist2(*g, *p);
                if d < best_d {
                    best_d = d;
                    best = i;
                    tied = false;
                } else if d == best_d {
                    tied = true;
                }
            }
            if best_d > 0.0 && !tied {
                let p = positions[best];
                let dir = [(p[0] - g[0]) / best_d, (p[1] - g[1]) / best_d];
                grad[best][0] += -h.alpha * dir[0];
                grad[best][1] += -h.alpha * dir[1];
            }
        }

        // Repulsion: both ordered pairs act on p_i.
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let d = dist2(positions[i], positions[j]);
                if d > 0.0 && d < h.d_min {
                    let dir = [
                        (positions[i][0] - positions[j][0]) / d,
                        (positions[i][1] - positions[j][1]) / d,
                    ];
                    grad[i][0] += h.gamma * -2.0 * dir[0];
                    grad[i][1] += h.gamma * -2.0 * dir[1];
                }
            }
        }

        // Attraction: the AOI weight couples every ABS through the arrival
        // sigmoid sum.
        for aoi in &self.aois {
            let t = aoi.service_radius();
            let dists: Vec<f64> = positions.iter().map(|p| dist2(*p, aoi.center)).collect();
            let sigmas: Vec<f64> = dists
                .iter()
                .map(|d| smooth_sigmoid(*d, t, -h.kappa_i))
                .collect();
            let w = (-sigmas.iter().sum::<f64>()).exp();
            let sum_d: f64 = dists.iter().sum();
            let exps: Vec<f64> = dists
                .iter()
                .map(|d| attraction_exponent(*d, aoi.radius, h.kappa_a, h.attraction_form).exp())
                .collect();
            let sum_e: f64 = exps.iter().sum();
            for i in 0..n {
                let d = dists[i];
                if d == 0.0 {
                    continue;
                }
                let dw_dd = w * h.kappa_i * sigmas[i] * (1.0 - sigmas[i]);
                let dpa_dd = dw_dd * (sum_d + sum_e) + w + (1.0 - w) * h.kappa_a * exps[i];
                let dir = [
                    (positions[i][0] - aoi.center[0]) / d,
                    (positions[i][1] - aoi.center[1]) / d,
                ];
                grad[i][0] += h.beta * dpa_dd * dir[0];
                grad[i][1] += h.beta * dpa_dd * dir[1];
            }
        }

        // Collision: exponential wall around each blocking building.
        for (i, p) in positions.iter().enumerate() {
            for b in &self.blocking {
                let d = distance_to_building(*p, b);
                let e = (h.kappa_b * (h.c_b - d)).exp();
                let dd = distance_to_building_grad(*p, b);
                grad[i][0] += h.eta * -h.kappa_b * e * dd[0];
                grad[i][1] += h.eta * -h.kappa_b * e * dd[1];
            }
        }

        grad
    }
}

/// Composite placement loss `-alpha K + beta P_a + gamma P_u + eta P_b`.
pub fn placement_loss(
    positions: &[Point2],
    scene: &Scene,
    aois: &[Aoi],
    hyper: &PlacementHyper,
) -> Result<f64, PlacementError> {
    Ok(PlacementContext::new(scene, aois, hyper)?.loss(positions))
}

/// Analytic gradient of [`placement_loss`] w.r.t. every position.
pub fn placement_gradient(
    positions: &[Point2],
    scene: &Scene,
    aois: &[Aoi],
    hyper: &PlacementHyper,
) -> Result<Vec<Point2>, PlacementError> {
    Ok(PlacementContext::new(scene, aois, hyper)?.gradient(positions))
}

/// Runs Adam on the placement loss from `init_positions`, recording every
/// iterate as a waypoint. Stops at the iteration cap or after `patience`
/// iterations without best-loss improvement; returns the best-loss positions.
pub fn optimize_placement(
    scene: &Scene,
    aois: &[Aoi],
    init_positions: &[Point2],
    hyper: &PlacementHyper,
) -> Result<(Vec<Point2>, PlacementTrace), PlacementError> {
    let ctx = PlacementContext::new(scene, aois, hyper)?;
    let n = init_positions.len();
    let mut positions = init_positions.to_vec();
    let initial_loss = ctx.loss(&positions);

    let mut trace = PlacementTrace {
        initial_positions: init_positions.to_vec(),
        initial_loss,
        steps: Vec::new(),
        termination: Termination::IterationCap,
        best_step: None,
    };
    if !initial_loss.is_finite() {
        return Err(PlacementError::NonFiniteLoss {
            iteration: 0,
            trace: Box::new(trace),
        });
    }

    let mut adam = Adam::new(hyper.learning_rate, 2 * n);
    let mut plateau = PlateauTracker::new(hyper.patience.max(1));
    plateau.observe(initial_loss);
    let mut best = (positions.clone(), initial_loss, None::<usize>);
    let mut flat = vec![0.0; 2 * n];

    for iter in 0..hyper.max_iterations {
        let grad = ctx.gradient(&positions);
        for i in 0..n {
            flat[2 * i] = positions[i][0];
            flat[2 * i + 1] = positions[i][1];
        }
        let flat_grad: Vec<f64> = grad.iter().flat_map(|g| [g[0], g[1]]).collect();
        adam.step(&mut flat, &flat_grad);
        for i in 0..n {
            positions[i] = [flat[2 * i], flat[2 * i + 1]];
        }

        let loss = ctx.loss(&positions);
        trace.steps.push(PlacementStep {
            positions: positions.clone(),
            loss,
        });
        if !loss.is_finite() {
            return Err(PlacementError::NonFiniteLoss {
                iteration: iter + 1,
                trace: Box::new(trace),
            });
        }
        if loss < best.1 {
            best = (positions.clone(), loss, Some(trace.steps.len() - 1));
        }
        if plateau.observe(loss) {
            trace.termination = Termination::EarlyStopped;
            break;
        }
    }

    trace.best_step = best.2;
    Ok((best.0, trace))
}

/// Fraction of AOIs with at least one ABS within two thirds of their radius.
pub fn aoi_satisfaction(positions: &[Point2], aois: &[Aoi]) -> Result<f64, PlacementError> {
    if aois.is_empty() {
        return Err(PlacementError::NoAois);
    }
    let served = aois
        .iter()
        .filter(|aoi| {
            positions
                .iter()
                .any(|p| dist2(*p, aoi.center) <= aoi.service_radius())
        })
        .count();
    Ok(served as f64 / aois.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::semi_random_init;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn empty_scene() -> Scene {
        Scene::new([0.0, 0.0], [1000.0, 1000.0], vec![], 70.0).unwrap()
    }

    fn small_hyper() -> PlacementHyper {
        PlacementHyper {
            grid: GridSpec {
                points_x: 3,
                points_y: 3,
                margin: 100.0,
            },
            ..PlacementHyper::default()
        }
    }

    #[test]
    fn coverage_factor_basics() {
        assert_eq!(coverage_factor(&[[5.0, 5.0]], &[[5.0, 5.0]]), 0.0);
        assert_eq!(
            coverage_factor(&[[0.0, 0.0]], &[[0.0, 0.0], [10.0, 0.0]]),
            10.0
        );
    }

    #[test]
    fn coverage_factor_matches_double_loop_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let positions: Vec<Point2> = (0..3)
            .map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)])
            .collect();
        let grid: Vec<Point2> = (0..4)
            .map(|_| [rng.gen_range(0.0..100.0), rng.gen_range(0.0..100.0)])
            .collect();
        let mut oracle = 0.0;
        for g in &grid {
            let mut min_d = f64::INFINITY;
            for p in &positions {
                let d = ((g[0] - p[0]).powi(2) + (g[1] - p[1]).powi(2)).sqrt();
                if d < min_d {
                    min_d = d;
                }
            }
            oracle += min_d;
        }
        assert!((coverage_factor(&positions, &grid) - oracle).abs() < 1e-12);
    }

    #[test]
    fn repulsion_counts_ordered_pairs() {
        assert_eq!(repulsion_penalty(&[[0.0, 0.0], [500.0, 0.0]], 400.0), 0.0);
        // Both ordered pairs of a 100 m gap contribute 300 each.
        assert_eq!(repulsion_penalty(&[[0.0, 0.0], [100.0, 0.0]], 400.0), 600.0);
        assert_eq!(repulsion_penalty(&[[0.0, 0.0]], 400.0), 0.0);
    }

    #[test]
    fn sigmoid_reference_values() {
        assert_eq!(smooth_sigmoid(3.0, 3.0, 0.7), 0.5);
        // Independent oracle via the tanh half-angle identity.
        let oracle = 0.5 * (1.0 + (0.25f64 * 10.0 / 2.0).tanh());
        assert!((smooth_sigmoid(10.0, 0.0, 0.25) - oracle).abs() < 1e-12);
        assert!((smooth_sigmoid(10.0, 0.0, 0.25) - 0.924142).abs() < 1e-6);
        // Saturation without NaN at extreme steepness.
        assert_eq!(smooth_sigmoid(1.0, 0.0, 1e6), 1.0);
        assert_eq!(smooth_sigmoid(-1.0, 0.0, 1e6), 0.0);
    }

    #[test]
    fn aoi_weight_limits_and_threshold_value() {
        let aoi = Aoi::new([0.0, 0.0], 300.0).unwrap();
        // Far away the arrival terms vanish and the weight tends to one.
        let far = aoi_weight(&[[1.0e7, 0.0]], &aoi, 0.25);
        assert!((far - 1.0).abs() < 1e-9);
        // One ABS exactly at the 2r/3 threshold contributes a 0.5 term.
        let at = aoi_weight(&[[200.0, 0.0]], &aoi, 0.25);
        assert!((at - (-0.5f64).exp()).abs() < 1e-12);
        assert!((at - 0.606531).abs() < 1e-6);
    }

    #[test]
    fn aoi_weight_monotone_as_abs_approaches() {
        let aoi = Aoi::new([0.0, 0.0], 300.0).unwrap();
        let mut prev = f64::INFINITY;
        for step in 0..60 {
            let d = 600.0 - 10.0 * step as f64;
            let w = aoi_weight(&[[d, 0.0]], &aoi, 0.25);
            assert!(w <= prev + 1e-12, "weight increased moving inward at {d}");
            prev = w;
        }
    }

    #[test]
    fn attraction_matches_independent_reimplementation() {
        // Naive oracle written straight from the definition, kept separate
        // from the production code path.
        fn oracle(positions: &[Point2], aois: &[Aoi], ka: f64, ki: f64) -> f64 {
            let mut total = 0.0;
            for aoi in aois {
                let mut s = 0.0;
                for p in positions {
                    let d =
                        ((p[0] - aoi.center[0]).powi(2) + (p[1] - aoi.center[1]).powi(2)).sqrt();
                    s += 1.0 / (1.0 + (ki * (d - 2.0 * aoi.radius / 3.0)).exp());
                }
                let w = (-s).exp();
                for p in positions {
                    let d =
                        ((p[0] - aoi.center[0]).powi(2) + (p[1] - aoi.center[1]).powi(2)).sqrt();
                    total += w * d - (1.0 - w) * (-ka * d - aoi.radius).exp();
                }
            }
            total
        }
        let positions = vec![[120.0, 40.0], [480.0, 310.0]];
        let aois = vec![Aoi::new([300.0, 200.0], 250.0).unwrap()];
        let got = attraction_penalty(&positions, &aois, 0.02, 0.25, AttractionForm::AsPrinted);
        let want = oracle(&positions, &aois, 0.02, 0.25);
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn attraction_form_variants_differ_in_near_field() {
        // The printed exponent makes the radius a constant attenuation; the
        // offset variant shifts the exponential knee to the rim instead.
        let aois = vec![Aoi::new([0.0, 0.0], 250.0).unwrap()];
        let positions = vec![[100.0, 0.0]];
        let printed =
            attraction_penalty(&positions, &aois, 0.02, 0.25, AttractionForm::AsPrinted);
        let offset =
            attraction_penalty(&positions, &aois, 0.02, 0.25, AttractionForm::RadiusOffset);
        let w = aoi_weight(&positions, &aois[0], 0.25);
        let printed_expect = w * 100.0 - (1.0 - w) * (-0.02 * 100.0 - 250.0f64).exp();
        let offset_expect = w * 100.0 - (1.0 - w) * (-0.02 * (100.0 - 250.0f64)).exp();
        assert!((printed - printed_expect).abs() < 1e-9);
        assert!((offset - offset_expect).abs() < 1e-9);
        // The offset form actually bites in the near field.
        assert!((printed - w * 100.0).abs() < 1e-12);
        assert!(offset < printed);
    }

    #[test]
    fn attraction_far_field_is_linear_distance() {
        let aois = vec![Aoi::new([0.0, 0.0], 250.0).unwrap()];
        let d = 50_000.0;
        let pa = attraction_penalty(&[[d, 0.0]], &aois, 0.02, 0.25, AttractionForm::AsPrinted);
        assert!((pa - d).abs() / d < 1e-6);
    }

    #[test]
    fn attraction_gradient_pulls_toward_unserved_aoi() {
        let scene = empty_scene();
        let aois = vec![Aoi::new([500.0, 500.0], 250.0).unwrap()];
        let hyper = PlacementHyper {
            alpha: 0.0,
            gamma: 0.0,
            eta: 0.0,
            ..small_hyper()
        };
        let ctx = PlacementContext::new(&scene, &aois, &hyper).unwrap();
        let g = ctx.gradient(&[[900.0, 500.0]]);
        // Descent direction -g points toward the center.
        assert!(g[0][0] > 0.0, "gradient {g:?}");
    }

    #[test]
    fn collision_penalty_reference_values() {
        let b = Building::new([0.0, 0.0], [100.0, 100.0], 90.0).unwrap();
        // Exactly c_b away: exponent zero.
        let at_cb = collision_penalty(&[[115.0, 50.0]], &[b], 0.5, 15.0);
        assert!((at_cb - 1.0).abs() < 1e-12);
        // Inside the footprint the distance clamps to zero: exp(7.5).
        let inside = collision_penalty(&[[50.0, 50.0]], &[b], 0.5, 15.0);
        assert!((inside - 1808.0424144560632).abs() < 1e-9);
        assert_eq!(collision_penalty(&[[50.0, 50.0]], &[], 0.5, 15.0), 0.0);
    }

    #[test]
    fn loss_is_weighted_sum_of_terms() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let scene = Scene::new(
            [0.0, 0.0],
            [1000.0, 1000.0],
            vec![
                Building::new([200.0, 200.0], [320.0, 330.0], 95.0).unwrap(),
                Building::new([600.0, 100.0], [700.0, 260.0], 80.0).unwrap(),
            ],
            70.0,
        )
        .unwrap();
        let aois = vec![
            Aoi::new([700.0, 700.0], 250.0).unwrap(),
            Aoi::new([250.0, 650.0], 200.0).unwrap(),
        ];
        let hyper = small_hyper();
        let positions: Vec<Point2> = (0..3)
            .map(|_| [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)])
            .collect();

        let ctx = PlacementContext::new(&scene, &aois, &hyper).unwrap();
        let k = coverage_factor(&positions, &ctx.grid);
        let pa = attraction_penalty(
            &positions,
            &aois,
            hyper.kappa_a,
            hyper.kappa_i,
            hyper.attraction_form,
        );
        let pu = repulsion_penalty(&positions, hyper.d_min);
        let pb = collision_penalty(&positions, &ctx.blocking, hyper.kappa_b, hyper.c_b);
        let composed = -hyper.alpha * k + hyper.beta * pa + hyper.gamma * pu + hyper.eta * pb;
        let loss = placement_loss(&positions, &scene, &aois, &hyper).unwrap();
        assert!((loss - composed).abs() < 1e-12);

        let zeroed = PlacementHyper {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
            eta: 0.0,
            ..small_hyper()
        };
        assert_eq!(
            placement_loss(&positions, &scene, &aois, &zeroed).unwrap(),
            0.0
        );
    }

    #[test]
    fn full_loss_matches_independent_reimplementation() {
        // Second implementation written straight from the term definitions,
        // sharing nothing with the production path.
        fn oracle(
            positions: &[Point2],
            grid: &[Point2],
            aois: &[Aoi],
            blocking: &[Building],
            h: &PlacementHyper,
        ) -> f64 {
            let dist = |a: &Point2, b: &Point2| {
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            };
            let mut k = 0.0;
            for g in grid {
                let mut best = f64::INFINITY;
                for p in positions {
                    best = best.min(dist(g, p));
                }
                k += best;
            }
            let mut pu = 0.0;
            for a in positions {
                for b in positions {
                    if a != b {
                        pu += (h.d_min - dist(a, b)).max(0.0);
                    }
                }
            }
            let mut pa = 0.0;
            for aoi in aois {
                let mut s = 0.0;
                for p in positions {
                    let d = dist(p, &aoi.center);
                    s += 1.0 / (1.0 + (h.kappa_i * (d - 2.0 * aoi.radius / 3.0)).exp());
                }
                let w = (-s).exp();
                for p in positions {
                    let d = dist(p, &aoi.center);
                    pa += w * d - (1.0 - w) * (-h.kappa_a * d - aoi.radius).exp();
                }
            }
            let mut pb = 0.0;
            for p in positions {
                for b in blocking {
                    let dx = (b.bbox_min[0] - p[0]).max(p[0] - b.bbox_max[0]).max(0.0);
                    let dy = (b.bbox_min[1] - p[1]).max(p[1] - b.bbox_max[1]).max(0.0);
                    pb += (h.kappa_b * (h.c_b - (dx * dx + dy * dy).sqrt())).exp();
                }
            }
            -h.alpha * k + h.beta * pa + h.gamma * pu + h.eta * pb
        }

        let scene = Scene::new(
            [0.0, 0.0],
            [1000.0, 1000.0],
            vec![
                Building::new([200.0, 200.0], [320.0, 330.0], 95.0).unwrap(),
                Building::new([600.0, 100.0], [700.0, 260.0], 80.0).unwrap(),
            ],
            70.0,
        )
        .unwrap();
        let aois = vec![
            Aoi::new([700.0, 700.0], 250.0).unwrap(),
            Aoi::new([250.0, 650.0], 200.0).unwrap(),
        ];
        let hyper = small_hyper();
        let positions = vec![[130.0, 420.0], [540.0, 180.0], [820.0, 760.0]];
        let ctx = PlacementContext::new(&scene, &aois, &hyper).unwrap();
        let want = oracle(&positions, &ctx.grid, &aois, &ctx.blocking, &hyper);
        let got = placement_loss(&positions, &scene, &aois, &hyper).unwrap();
        assert!((got - want).abs() < 1e-9, "{got} vs {want}");
    }

    #[test]
    fn gradient_matches_central_finite_differences() {
        let scene = Scene::new(
            [0.0, 0.0],
            [1000.0, 1000.0],
            vec![Building::new([400.0, 430.0], [520.0, 560.0], 100.0).unwrap()],
            70.0,
        )
        .unwrap();
        let aois = vec![
            Aoi::new([700.0, 700.0], 250.0).unwrap(),
            Aoi::new([200.0, 600.0], 200.0).unwrap(),
        ];
        let hyper = small_hyper();
        let ctx = PlacementContext::new(&scene, &aois, &hyper).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let step = 1e-3;
        let mut checked = 0;
        while checked < 25 {
            let positions: Vec<Point2> = (0..3)
                .map(|_| [rng.gen_range(0.0..1000.0), rng.gen_range(0.0..1000.0)])
                .collect();
            // Stay clear of footprints where the distance field kinks.
            if positions.iter().any(|p| {
                ctx.blocking
                    .iter()
                    .any(|b| distance_to_building(*p, b) < 1.0)
            }) {
                continue;
            }
            checked += 1;
            let grad = ctx.gradient(&positions);
            for i in 0..positions.len() {
                for axis in 0..2 {
                    let mut hi = positions.clone();
                    let mut lo = positions.clone();
                    hi[i][axis] += step;
                    lo[i][axis] -= step;
                    let fd = (ctx.loss(&hi) - ctx.loss(&lo)) / (2.0 * step);
                    let err = (fd - grad[i][axis]).abs() / fd.abs().max(1.0);
                    assert!(
                        err < 1e-4,
                        "abs {i} axis {axis}: fd {fd} vs {}",
                        grad[i][axis]
                    );
                }
            }
        }
    }

    #[test]
    fn gradient_is_mirror_symmetric() {
        let scene = empty_scene();
        let aois = vec![Aoi::new([500.0, 500.0], 250.0).unwrap()];
        let ctx = PlacementContext::new(&scene, &aois, &small_hyper()).unwrap();
        let g = ctx.gradient(&[[300.0, 500.0], [700.0, 500.0]]);
        assert!((g[0][0] + g[1][0]).abs() < 1e-9, "{g:?}");
        assert!((g[0][1] - g[1][1]).abs() < 1e-9, "{g:?}");
    }

    #[test]
    fn gradient_zero_at_constructed_stationary_point() {
        // One ABS on a lone grid point, no AOIs or buildings: every term is
        // flat or at its kink with subgradient zero.
        let scene = Scene::new([0.0, 0.0], [100.0, 100.0], vec![], 70.0).unwrap();
        let hyper = PlacementHyper {
            grid: GridSpec {
                points_x: 1,
                points_y: 1,
                margin: 0.0,
            },
            ..PlacementHyper::default()
        };
        let ctx = PlacementContext::new(&scene, &[], &hyper).unwrap();
        let g = ctx.gradient(&[[50.0, 50.0]]);
        assert_eq!(g, vec![[0.0, 0.0]]);
    }

    #[test]
    fn loss_is_translation_equivariant() {
        let offset = [137.0, -58.0];
        let make = |shift: Point2| {
            let scene = Scene::new(
                [-500.0 + shift[0], -500.0 + shift[1]],
                [500.0 + shift[0], 500.0 + shift[1]],
                vec![Building::new(
                    [-100.0 + shift[0], -80.0 + shift[1]],
                    [50.0 + shift[0], 40.0 + shift[1]],
                    90.0,
                )
                .unwrap()],
                70.0,
            )
            .unwrap();
            let aois = vec![Aoi::new([200.0 + shift[0], 100.0 + shift[1]], 220.0).unwrap()];
            let positions = vec![
                [-300.0 + shift[0], 150.0 + shift[1]],
                [250.0 + shift[0], -220.0 + shift[1]],
            ];
            placement_loss(&positions, &scene, &aois, &PlacementHyper::default()).unwrap()
        };
        assert!((make([0.0, 0.0]) - make(offset)).abs() < 1e-9);
    }

    #[test]
    fn optimizer_reaches_single_aoi() {
        let scene = empty_scene();
        let aois = vec![Aoi::new([500.0, 500.0], 250.0).unwrap()];
        let hyper = small_hyper();
        let start = [[966.0, 200.0]]; // about 800 m out
        let (final_pos, trace) = optimize_placement(&scene, &aois, &start, &hyper).unwrap();
        let d = dist2(final_pos[0], [500.0, 500.0]);
        assert!(
            d <= aois[0].service_radius(),
            "ended {d} m from center after {} steps",
            trace.steps.len()
        );
        assert_eq!(aoi_satisfaction(&final_pos, &aois).unwrap(), 1.0);
    }

    #[test]
    fn optimizer_zero_iterations_returns_init() {
        let scene = empty_scene();
        let aois = vec![Aoi::new([500.0, 500.0], 250.0).unwrap()];
        let hyper = PlacementHyper {
            max_iterations: 0,
            ..small_hyper()
        };
        let start = vec![[100.0, 100.0]];
        let (final_pos, trace) = optimize_placement(&scene, &aois, &start, &hyper).unwrap();
        assert_eq!(final_pos, start);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn optimizer_is_deterministic_and_best_loss_is_trace_minimum() {
        let scene = empty_scene();
        let aois = vec![
            Aoi::new([300.0, 700.0], 250.0).unwrap(),
            Aoi::new([750.0, 250.0], 200.0).unwrap(),
        ];
        let hyper = PlacementHyper {
            max_iterations: 300,
            ..small_hyper()
        };
        let init = semi_random_init(&scene, &[], 4, 200.0, 3).unwrap();
        let (a, trace_a) = optimize_placement(&scene, &aois, &init, &hyper).unwrap();
        let (b, _) = optimize_placement(&scene, &aois, &init, &hyper).unwrap();
        assert_eq!(a, b);
        let min_loss = trace_a
            .steps
            .iter()
            .map(|s| s.loss)
            .fold(trace_a.initial_loss, f64::min);
        assert_eq!(trace_a.best_loss(), min_loss);
    }

    #[test]
    fn non_finite_loss_aborts_with_diagnostic_trace() {
        let scene = empty_scene();
        let aois = vec![Aoi::new([500.0, 500.0], 250.0).unwrap()];
        let err = optimize_placement(
            &scene,
            &aois,
            &[[f64::INFINITY, 0.0]],
            &small_hyper(),
        )
        .unwrap_err();
        match err {
            PlacementError::NonFiniteLoss { iteration, trace } => {
                assert_eq!(iteration, 0);
                assert_eq!(trace.initial_positions.len(), 1);
            }
            other => panic!("expected NonFiniteLoss, got {other}"),
        }
    }

    #[test]
    fn satisfaction_counts_served_aois() {
        let aois: Vec<Aoi> = (0..5)
            .map(|i| Aoi::new([1000.0 * i as f64, 0.0], 300.0).unwrap())
            .collect();
        let all: Vec<Point2> = aois.iter().map(|a| a.center).collect();
        assert_eq!(aoi_satisfaction(&all, &aois).unwrap(), 1.0);
        assert_eq!(aoi_satisfaction(&[[9000.0, 9000.0]], &aois).unwrap(), 0.0);
        // Three of five centers occupied.
        assert_eq!(aoi_satisfaction(&all[..3], &aois).unwrap(), 0.6);
        // Permuting ABS order changes nothing.
        let mut rev = all.clone();
        rev.reverse();
        assert_eq!(
            aoi_satisfaction(&rev, &aois).unwrap(),
            aoi_satisfaction(&all, &aois).unwrap()
        );
        assert!(matches!(
            aoi_satisfaction(&all, &[]),
            Err(PlacementError::NoAois)
        ));
    }
}

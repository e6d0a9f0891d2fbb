//! Deployment optimization engine for airborne base stations (ABSs).
//!
//! The crate covers the full planning pipeline for a swarm of UAV-mounted
//! transmitters over a 3D urban scene:
//!
//! * [`geometry`] — scene representation, distance/occlusion queries, grid
//!   generation and feasible random initialization;
//! * [`placement`] — composite placement loss with analytic gradients, the
//!   gradient-descent placement loop and the AOI satisfaction metric;
//! * [`propagation`] — differentiable coverage maps (free-space gain times
//!   antenna patterns times smooth occlusion) plus an import path for
//!   externally computed maps;
//! * [`interference`] — SIR maps, coverage masks, effective SIR, smooth
//!   min/max surrogates and the orientation/power loss functions;
//! * [`orient`] — the orientation/power optimization loop (max-min and
//!   weighted-AOI methods);
//! * [`resilience`] — UE mobility, received-power series, signal-drop
//!   detection and the three-phase recovery planner;
//! * [`interop`] — JSON document schemas shared with external simulators.
//!
//! ## Example
//!
//! ```rust
//! use absplan_core::geometry::{semi_random_init, Aoi, Scene};
//! use absplan_core::placement::{aoi_satisfaction, optimize_placement, PlacementHyper};
//!
//! let scene = Scene::new([0.0, 0.0], [1000.0, 1000.0], vec![], 70.0).unwrap();
//! let aois = vec![Aoi::new([650.0, 650.0], 250.0).unwrap()];
//! let hyper = PlacementHyper::default();
//!
//! let init = semi_random_init(&scene, &[], 2, hyper.d_min, 7).unwrap();
//! let (positions, trace) = optimize_placement(&scene, &aois, &init, &hyper).unwrap();
//!
//! assert_eq!(aoi_satisfaction(&positions, &aois).unwrap(), 1.0);
//! assert!(trace.best_loss() <= trace.initial_loss);
//! ```

pub mod antenna;
pub mod dual;
pub mod geometry;
pub mod interference;
pub mod interop;
pub mod optim;
pub mod orient;
pub mod placement;
pub mod propagation;
pub mod resilience;
pub mod units;

pub use geometry::{Aoi, Building, GridSpec, Scene};

//! Polynomial analytic discs, boundary push-forward measures, the disc
//! optimizer, and the gluing and twisting steps used to build new discs
//! from old ones.

mod disc;
mod glue;
mod optimize;
mod sigma;
mod twist;
mod verify;

pub use disc::{eval_disc, feasible, AnalyticDisc, BivariateDisc, Feasibility, MIN_FEASIBILITY_SAMPLES};
pub use glue::{glue, Bump, GluePiece, GlueResult, GluingSpec};
pub use optimize::{gauge_ceiling, optimize_discs, random_feasible_disc, DiscOptResult, OptimizerParams, RestartLog};
pub use sigma::{sigma_f, sigma_unchecked, SigmaMode, DEFAULT_SAMPLES, TRANSITION_TOL};
pub use twist::{choose_theta, radial_twist, ThetaChoice, MIN_THETA_GRID};
pub use verify::{disc_vs_envelope, verify_th21, Th21Params, Th21Report};

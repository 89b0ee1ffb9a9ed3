//! Flat tori, round spheres, tubes and finite metric spaces.

pub mod metric_space;
pub mod sphere;
pub mod torus;

pub use metric_space::{metric_recurrence_oracle, FiniteMetricSpace, MetricInstance, OracleResult};
pub use sphere::{sphere_ball_volume, sphere_volume, tube_volume};
pub use torus::{
    geodesic_speed, injectivity_radius, torus_distance, torus_from_state, torus_from_state_reduced, torus_phase_at,
    torus_volume, wrap_angle, FlatTorus,
};

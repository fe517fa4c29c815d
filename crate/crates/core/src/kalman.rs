//! Constant-velocity Kalman filter over `(u, v, s, r, u', v', s')`: box
//! center, area and aspect ratio, plus per-frame rates for all but the aspect
//! ratio.

use nalgebra::{SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::error::KalmanError;
use crate::model::BoundingBox;

pub const STATE_DIM: usize = 7;
pub const MEASUREMENT_DIM: usize = 4;

pub type StateVector = SVector<f64, STATE_DIM>;
pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;
pub type MeasurementVector = SVector<f64, MEASUREMENT_DIM>;
pub type MeasurementMatrix = SMatrix<f64, MEASUREMENT_DIM, MEASUREMENT_DIM>;
type Observation = SMatrix<f64, MEASUREMENT_DIM, STATE_DIM>;

/// Smallest area a prediction may take, in pixels squared.
pub const AREA_FLOOR: f64 = 1.0;

/// Noise parameters. Measurement noise on the center and area scales with the
/// measured box; everything else is absolute.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KalmanConfig {
    /// Initial variance of `u, v, s, r`.
    pub init_position_var: f64,
    /// Initial variance of `u', v', s'`.
    pub init_velocity_var: f64,
    /// Center measurement std as a fraction of box height.
    pub meas_center_weight: f64,
    /// Area measurement std as a fraction of box area.
    pub meas_area_weight: f64,
    /// Aspect-ratio measurement variance.
    pub meas_aspect_var: f64,
    /// Process variance on `u, v, s, r` per frame.
    pub process_position_var: f64,
    /// Process variance on `u', v'` per frame.
    pub process_velocity_var: f64,
    /// Process variance on `s'` per frame.
    pub process_area_rate_var: f64,
}

impl Default for KalmanConfig {
    fn default() -> Self {
        Self {
            init_position_var: 10.0,
            init_velocity_var: 1.0e4,
            meas_center_weight: 0.05,
            meas_area_weight: 0.1,
            meas_aspect_var: 0.01,
            process_position_var: 1.0,
            process_velocity_var: 0.01,
            process_area_rate_var: 1.0,
        }
    }
}

impl KalmanConfig {
    pub fn validate(&self) -> Result<(), String> {
        let fields = [
            ("init_position_var", self.init_position_var),
            ("init_velocity_var", self.init_velocity_var),
            ("meas_center_weight", self.meas_center_weight),
            ("meas_area_weight", self.meas_area_weight),
            ("meas_aspect_var", self.meas_aspect_var),
            ("process_position_var", self.process_position_var),
            ("process_velocity_var", self.process_velocity_var),
            ("process_area_rate_var", self.process_area_rate_var),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanState {
    pub mean: StateVector,
    pub covariance: StateMatrix,
    /// Set when the last prediction had to lift the area to [`AREA_FLOOR`].
    pub area_clamped: bool,
}

impl KalmanState {
    pub fn to_box(&self) -> Result<BoundingBox, KalmanError> {
        state_to_box(self)
    }
}

/// Measurement vector `(u, v, s, r)` of a box.
pub fn box_to_measurement(b: &BoundingBox) -> MeasurementVector {
    let w = b.width();
    let h = b.height();
    MeasurementVector::new(
        (b.x_min() + b.x_max()) / 2.0,
        (b.y_min() + b.y_max()) / 2.0,
        w * h,
        w / h,
    )
}

pub fn state_to_box(st: &KalmanState) -> Result<BoundingBox, KalmanError> {
    let (u, v, s, r) = (st.mean[0], st.mean[1], st.mean[2], st.mean[3]);
    if !(s > 0.0 && r > 0.0) || !s.is_finite() || !r.is_finite() {
        return Err(KalmanError::DegenerateState { area: s, aspect: r });
    }
    let w = (s * r).sqrt();
    let h = s / w;
    BoundingBox::from_center(u, v, w, h).map_err(|_| KalmanError::DegenerateState { area: s, aspect: r })
}

#[derive(Debug, Clone)]
pub struct KalmanFilter {
    config: KalmanConfig,
    transition: StateMatrix,
    process_noise: StateMatrix,
    observation: Observation,
}

impl Default for KalmanFilter {
    fn default() -> Self {
        Self::new(KalmanConfig::default())
    }
}

impl KalmanFilter {
    pub fn new(config: KalmanConfig) -> Self {
        let mut transition = StateMatrix::identity();
        transition[(0, 4)] = 1.0;
        transition[(1, 5)] = 1.0;
        transition[(2, 6)] = 1.0;

        let q = config.process_position_var;
        let process_noise = StateMatrix::from_diagonal(&StateVector::from_column_slice(&[
            q,
            q,
            q,
            q,
            config.process_velocity_var,
            config.process_velocity_var,
            config.process_area_rate_var,
        ]));

        let mut observation = Observation::zeros();
        for i in 0..MEASUREMENT_DIM {
            observation[(i, i)] = 1.0;
        }

        Self {
            config,
            transition,
            process_noise,
            observation,
        }
    }

    pub fn config(&self) -> &KalmanConfig {
        &self.config
    }

    pub fn transition(&self) -> &StateMatrix {
        &self.transition
    }

    pub fn process_noise(&self) -> &StateMatrix {
        &self.process_noise
    }

    /// Initial covariance shared by every new track.
    pub fn initial_covariance(&self) -> StateMatrix {
        let p = self.config.init_position_var;
        let dv = self.config.init_velocity_var;
        StateMatrix::from_diagonal(&StateVector::from_column_slice(&[p, p, p, p, dv, dv, dv]))
    }

    pub fn measurement_noise(&self, b: &BoundingBox) -> MeasurementMatrix {
        let center_std = self.config.meas_center_weight * b.height();
        let area_std = self.config.meas_area_weight * b.area();
        MeasurementMatrix::from_diagonal(&MeasurementVector::new(
            center_std * center_std,
            center_std * center_std,
            area_std * area_std,
            self.config.meas_aspect_var,
        ))
    }

    pub fn box_to_state(&self, b: &BoundingBox) -> KalmanState {
        let z = box_to_measurement(b);
        let mut mean = StateVector::zeros();
        mean.fixed_rows_mut::<MEASUREMENT_DIM>(0).copy_from(&z);
        KalmanState {
            mean,
            covariance: self.initial_covariance(),
            area_clamped: false,
        }
    }

    /// Advances the state by one frame.
    pub fn predict(&self, st: &KalmanState) -> KalmanState {
        let mut mean = self.transition * st.mean;
        let covariance =
            self.transition * st.covariance * self.transition.transpose() + self.process_noise;
        let area_clamped = mean[2] <= 0.0;
        if area_clamped {
            mean[2] = AREA_FLOOR;
        }
        KalmanState {
            mean,
            covariance,
            area_clamped,
        }
    }

    /// Corrects the state with a measured box.
    pub fn update(&self, st: &KalmanState, measurement: &BoundingBox) -> Result<KalmanState, KalmanError> {
        let h = &self.observation;
        let z = box_to_measurement(measurement);
        let innovation_cov =
            h * st.covariance * h.transpose() + self.measurement_noise(measurement);
        let chol = innovation_cov
            .cholesky()
            .ok_or(KalmanError::SingularInnovation)?;
        // S is symmetric, so K^T = S^-1 H P
        let gain = chol.solve(&(h * st.covariance)).transpose();
        let residual = z - h * st.mean;
        let mean = st.mean + gain * residual;
        let p = (StateMatrix::identity() - gain * h) * st.covariance;
        let covariance = (p + p.transpose()) * 0.5;
        if !covariance.iter().all(|v| v.is_finite()) {
            return Err(KalmanError::SingularInnovation);
        }
        Ok(KalmanState {
            mean,
            covariance,
            area_clamped: false,
        })
    }
}

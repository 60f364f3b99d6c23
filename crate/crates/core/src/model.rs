//! Airframe parameterization, hover-linearized dynamics and control
//! effectiveness for a PNPNPN hexacopter.
//!
//! The state of the full system is `x = [h φ θ ψ v_h p q r]`; the virtual
//! control is `F = [T L M N]` (total thrust and body torques). The degraded
//! system drops the yaw pair `(ψ, r)` and the yaw torque channel.

use nalgebra::{DMatrix, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const ROTOR_COUNT: usize = 6;

/// 4x6 map from rotor lifts to `[T L M N]`.
pub type FullEffectiveness = SMatrix<f64, 4, 6>;
/// 3x6 map from rotor lifts to `[T L M]` (yaw row removed).
pub type ReducedEffectiveness = SMatrix<f64, 3, 6>;

/// Physical constants of the airframe.
///
/// Units: kg, m, s, N, N·m. `torque_ratio` is the (dimensionless) ratio of
/// rotor reactive torque to lift; `yaw_damping` is the aerodynamic yaw
/// damping coefficient in N·m/(rad/s)².
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AirframeParams {
    pub mass_kg: f64,
    pub gravity_mps2: f64,
    pub arm_m: f64,
    pub torque_ratio: f64,
    pub inertia_roll: f64,
    pub inertia_pitch: f64,
    pub inertia_yaw: f64,
    pub max_lift_n: f64,
    #[serde(default = "default_yaw_damping")]
    pub yaw_damping: f64,
}

fn default_yaw_damping() -> f64 {
    0.2
}

impl AirframeParams {
    /// Parameters of the reference prototype airframe used by the built-in
    /// scenarios and the verification suite.
    pub fn prototype() -> Self {
        Self {
            mass_kg: 1.535,
            gravity_mps2: 9.80,
            arm_m: 0.275,
            torque_ratio: 0.1,
            inertia_roll: 0.0411,
            inertia_pitch: 0.0478,
            inertia_yaw: 0.0599,
            max_lift_n: 6.125,
            yaw_damping: default_yaw_damping(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("mass_kg", self.mass_kg),
            ("gravity_mps2", self.gravity_mps2),
            ("arm_m", self.arm_m),
            ("torque_ratio", self.torque_ratio),
            ("inertia_roll", self.inertia_roll),
            ("inertia_pitch", self.inertia_pitch),
            ("inertia_yaw", self.inertia_yaw),
            ("max_lift_n", self.max_lift_n),
            ("yaw_damping", self.yaw_damping),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v <= 0.0 {
                return Err(Error::Config(format!(
                    "airframe parameter {name} must be strictly positive and finite, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Weight of the airframe, `m_a · g`, in newtons.
    pub fn hover_thrust(&self) -> f64 {
        self.mass_kg * self.gravity_mps2
    }
}

/// Per-rotor efficiency factors, each in `[0, 1]`; `0` is total failure.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 6]", into = "[f64; 6]")]
pub struct EfficiencyVector([f64; ROTOR_COUNT]);

impl EfficiencyVector {
    pub fn new(eta: [f64; ROTOR_COUNT]) -> Result<Self> {
        for (i, e) in eta.iter().enumerate() {
            if !(*e >= 0.0 && *e <= 1.0) {
                return Err(Error::Config(format!(
                    "efficiency of rotor {} must lie in [0, 1], got {e}",
                    i + 1
                )));
            }
        }
        Ok(Self(eta))
    }

    /// All rotors healthy.
    pub fn nominal() -> Self {
        Self([1.0; ROTOR_COUNT])
    }

    /// Rotor `rotor` (1-based) failed, all others healthy.
    pub fn single_failure(rotor: usize) -> Self {
        assert!((1..=ROTOR_COUNT).contains(&rotor), "rotor index out of range");
        let mut eta = [1.0; ROTOR_COUNT];
        eta[rotor - 1] = 0.0;
        Self(eta)
    }

    pub fn as_array(&self) -> [f64; ROTOR_COUNT] {
        self.0
    }

    /// Efficiency of rotor `rotor` (1-based).
    pub fn get(&self, rotor: usize) -> f64 {
        self.0[rotor - 1]
    }

    pub fn any_failed(&self) -> bool {
        self.0.contains(&0.0)
    }
}

impl TryFrom<[f64; 6]> for EfficiencyVector {
    type Error = Error;
    fn try_from(v: [f64; 6]) -> Result<Self> {
        Self::new(v)
    }
}

impl From<EfficiencyVector> for [f64; 6] {
    fn from(v: EfficiencyVector) -> Self {
        v.0
    }
}

/// Per-rotor geometry columns for unit efficiency: `[1, roll/d, pitch/d,
/// yaw/kμ]`. Rotors sit at 60° increments with rotor 1 on the +pitch arm and
/// alternating spin directions.
const ROTOR_GEOMETRY: [[f64; 4]; ROTOR_COUNT] = {
    const S: f64 = 0.866025403784438646763723170752936183; // √3/2
    [
        [1.0, 0.0, 1.0, -1.0],
        [1.0, -S, 0.5, 1.0],
        [1.0, -S, -0.5, -1.0],
        [1.0, 0.0, -1.0, 1.0],
        [1.0, S, -0.5, -1.0],
        [1.0, S, 0.5, 1.0],
    ]
};

/// Map from the six rotor lifts to total thrust and the three body torques,
/// with column `i` scaled by the rotor's efficiency.
pub fn build_full_effectiveness(params: &AirframeParams, eta: &EfficiencyVector) -> FullEffectiveness {
    let d = params.arm_m;
    let k_mu = params.torque_ratio;
    let mut h = FullEffectiveness::zeros();
    for (i, geo) in ROTOR_GEOMETRY.iter().enumerate() {
        let e = eta.as_array()[i];
        h[(0, i)] = e * geo[0];
        h[(1, i)] = e * geo[1] * d;
        h[(2, i)] = e * geo[2] * d;
        h[(3, i)] = e * geo[3] * k_mu;
    }
    h
}

/// Thrust/roll/pitch rows of the effectiveness matrix, used when the yaw
/// channel is abandoned.
pub fn build_reduced_effectiveness(params: &AirframeParams, eta: &EfficiencyVector) -> ReducedEffectiveness {
    build_full_effectiveness(params, eta).fixed_rows::<3>(0).into_owned()
}

/// Hover-linearized dynamics `ẋ = Ax + B(F − G)` of the full 8-state system.
#[derive(Clone, Debug)]
pub struct FullLinearSystem {
    pub a: SMatrix<f64, 8, 8>,
    pub b: SMatrix<f64, 8, 4>,
    /// `G = [m_a·g, 0, 0, 0]`; the control offset subtracted from `F`.
    pub gravity_offset: SVector<f64, 4>,
}

/// Degraded 6-state system with the yaw pair `(ψ, r)` removed.
#[derive(Clone, Debug)]
pub struct DegradedLinearSystem {
    pub a: SMatrix<f64, 6, 6>,
    pub b: SMatrix<f64, 6, 3>,
    pub gravity_offset: SVector<f64, 3>,
}

pub fn build_full_system(params: &AirframeParams) -> FullLinearSystem {
    let mut a = SMatrix::<f64, 8, 8>::zeros();
    for i in 0..4 {
        a[(i, i + 4)] = 1.0;
    }
    // B = [0; J_f⁻¹], J_f = diag(−m_a, J_x, J_y, J_z)
    let mut b = SMatrix::<f64, 8, 4>::zeros();
    b[(4, 0)] = -1.0 / params.mass_kg;
    b[(5, 1)] = 1.0 / params.inertia_roll;
    b[(6, 2)] = 1.0 / params.inertia_pitch;
    b[(7, 3)] = 1.0 / params.inertia_yaw;
    let gravity_offset = SVector::<f64, 4>::new(params.hover_thrust(), 0.0, 0.0, 0.0);
    FullLinearSystem { a, b, gravity_offset }
}

pub fn build_degraded_system(params: &AirframeParams) -> DegradedLinearSystem {
    let mut a = SMatrix::<f64, 6, 6>::zeros();
    for i in 0..3 {
        a[(i, i + 3)] = 1.0;
    }
    let mut b = SMatrix::<f64, 6, 3>::zeros();
    b[(3, 0)] = -1.0 / params.mass_kg;
    b[(4, 1)] = 1.0 / params.inertia_roll;
    b[(5, 2)] = 1.0 / params.inertia_pitch;
    let gravity_offset = SVector::<f64, 3>::new(params.hover_thrust(), 0.0, 0.0);
    DegradedLinearSystem { a, b, gravity_offset }
}

impl FullLinearSystem {
    /// Rank of `[B AB … A⁷B]`.
    pub fn controllability_rank(&self) -> usize {
        controllability_rank(
            &DMatrix::from_iterator(8, 8, self.a.iter().copied()),
            &DMatrix::from_iterator(8, 4, self.b.iter().copied()),
        )
    }
}

impl DegradedLinearSystem {
    /// Rank of `[B̄ ĀB̄ … Ā⁵B̄]`.
    pub fn controllability_rank(&self) -> usize {
        controllability_rank(
            &DMatrix::from_iterator(6, 6, self.a.iter().copied()),
            &DMatrix::from_iterator(6, 3, self.b.iter().copied()),
        )
    }
}

fn controllability_rank(a: &DMatrix<f64>, b: &DMatrix<f64>) -> usize {
    let n = a.nrows();
    let m = b.ncols();
    let mut ctrb = DMatrix::zeros(n, n * m);
    let mut block = b.clone();
    for k in 0..n {
        ctrb.view_mut((0, k * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    numerical_rank(&ctrb, 1e-10)
}

/// Rank by row reduction with partial pivoting; pivots smaller than
/// `rel_tol` times the largest absolute entry of the input count as zero.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let mut m = m.clone();
    let max_abs = m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()));
    if max_abs == 0.0 {
        return 0;
    }
    let threshold = rel_tol * max_abs;
    let (rows, cols) = m.shape();
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let (pivot_row, pivot_abs) = (rank..rows)
            .map(|r| (r, m[(r, col)].abs()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if pivot_abs <= threshold {
            continue;
        }
        m.swap_rows(rank, pivot_row);
        for r in rank + 1..rows {
            let factor = m[(r, col)] / m[(rank, col)];
            for c in col..cols {
                m[(r, c)] -= factor * m[(rank, c)];
            }
        }
        rank += 1;
    }
    rank
}

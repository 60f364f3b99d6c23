//! Positive-controllability decisions for the full and degraded systems.
//!
//! With admissible controls confined to an attainable set that need not
//! contain the origin in its interior, row rank of the controllability
//! matrix is not enough: the system is controllable iff additionally no
//! direction `v` (with `Aᵀv = 0`) has `vᵀBu ≤ 0` over the whole set. Since
//! `B = [0; J_f⁻¹]` with `J_f` invertible, this reduces to strict interiority
//! of the origin in the attainable control set, decided here exactly via the
//! zonotope facet margin (or via row slacks for the allocated H-polytope).

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use serde::{Deserialize, Serialize};

use crate::allocation::{self, AllocationMatrix};
use crate::model::{
    build_degraded_system, build_full_effectiveness, build_full_system,
    build_reduced_effectiveness, AirframeParams, EfficiencyVector, ROTOR_COUNT,
};
use crate::sets::{allocation_polytope, attainable_set, Zonotope};
use crate::{Error, Result};

/// Which representation of the degraded attainable set to test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SetKind {
    /// Exact attainable set under all box-constrained lifts (zonotope).
    #[serde(rename = "u0")]
    ExactU0,
    /// Attainable set under pseudo-inverse allocation only (H-polytope).
    #[serde(rename = "ua")]
    AllocatedUa,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ZonotopeFacets,
    HpolySlack,
}

/// Outcome of a positive-controllability test.
///
/// `margin` is in the raw mixed units (N, N·m) of control space;
/// `margin_scaled` rescales the torque axes by `1/d, 1/d, 1/k_μ` so all axes
/// read in newtons. The controllable verdict uses only the sign, which is
/// invariant under such rescaling.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ControllabilityReport {
    pub controllable: bool,
    pub margin: f64,
    pub margin_scaled: f64,
    /// Unit direction minimizing the support, expressed in the velocity
    /// sub-block of the state (inertia-weighted).
    pub witness_direction: Vec<f64>,
    pub rank_ok: bool,
    pub hover_attainable: bool,
    pub full_dimensional: bool,
    pub method: Method,
}

fn unit_weights(dim: usize, params: &AirframeParams) -> Vec<f64> {
    // 1 on thrust, 1/d on roll/pitch, 1/k_μ on yaw
    let mut w = vec![1.0; dim];
    w[1] = 1.0 / params.arm_m;
    w[2] = 1.0 / params.arm_m;
    if dim == 4 {
        w[3] = 1.0 / params.torque_ratio;
    }
    w
}

/// Attainable-set zonotope of the full system for the given efficiencies.
pub fn full_attainable_set(params: &AirframeParams, eta: &EfficiencyVector) -> Zonotope {
    let h = build_full_effectiveness(params, eta);
    attainable_set(
        &DMatrix::from_iterator(4, ROTOR_COUNT, h.iter().copied()),
        params.max_lift_n,
        &DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0, 0.0]),
    )
}

/// Attainable-set zonotope of the degraded system. `hover_thrust` is the
/// thrust offset in `Ḡ` (equal to the weight `m_a·g` in normal hover).
pub fn degraded_attainable_set(
    params: &AirframeParams,
    eta: &EfficiencyVector,
    hover_thrust: f64,
) -> Zonotope {
    let h = build_reduced_effectiveness(params, eta);
    attainable_set(
        &DMatrix::from_iterator(3, ROTOR_COUNT, h.iter().copied()),
        params.max_lift_n,
        &DVector::from_vec(vec![hover_thrust, 0.0, 0.0]),
    )
}

/// Maps a control-space direction to the inertia-weighted state sub-block
/// direction (`w = J_f·n`, normalized).
fn state_witness(n: &DVector<f64>, params: &AirframeParams) -> Vec<f64> {
    let mut w = n.clone();
    if n.len() == 4 {
        w[0] *= -params.mass_kg;
        w[1] *= params.inertia_roll;
        w[2] *= params.inertia_pitch;
        w[3] *= params.inertia_yaw;
    } else {
        w[0] *= -params.mass_kg;
        w[1] *= params.inertia_roll;
        w[2] *= params.inertia_pitch;
    }
    let w = w.normalize();
    w.iter().copied().collect()
}

fn zonotope_report(
    z: &Zonotope,
    params: &AirframeParams,
    rank_ok: bool,
) -> ControllabilityReport {
    let origin = DVector::zeros(z.dim());
    match z.interior_margin(&origin) {
        Ok((margin, normal)) => {
            let scaled = z.rescaled(&unit_weights(z.dim(), params));
            let (margin_scaled, _) = scaled
                .interior_margin(&DVector::zeros(z.dim()))
                .expect("rescaling preserves dimensionality");
            let tol = 1e-9 * z.max_generator_norm();
            let hover_attainable = margin >= -tol;
            ControllabilityReport {
                controllable: margin > tol && rank_ok && hover_attainable,
                margin,
                margin_scaled,
                witness_direction: state_witness(&normal, params),
                rank_ok,
                hover_attainable,
                full_dimensional: true,
                method: Method::ZonotopeFacets,
            }
        }
        Err(Error::DegenerateSet) => ControllabilityReport {
            controllable: false,
            margin: 0.0,
            margin_scaled: 0.0,
            witness_direction: vec![0.0; z.dim()],
            rank_ok,
            hover_attainable: false,
            full_dimensional: false,
            method: Method::ZonotopeFacets,
        },
        Err(e) => unreachable!("unexpected facet error: {e}"),
    }
}

/// Positive-controllability test of the full 8-state system under the exact
/// attainable set.
pub fn check_full(params: &AirframeParams, eta: &EfficiencyVector) -> Result<ControllabilityReport> {
    params.validate()?;
    let rank_ok = build_full_system(params).controllability_rank() == 8;
    let z = full_attainable_set(params, eta);
    Ok(zonotope_report(&z, params, rank_ok))
}

/// Positive-controllability test of the degraded (yaw-free) system.
pub fn check_degraded(
    params: &AirframeParams,
    eta: &EfficiencyVector,
    set_kind: SetKind,
) -> Result<ControllabilityReport> {
    check_degraded_with_thrust(params, eta, set_kind, params.hover_thrust())
}

/// As [`check_degraded`] but with the hover thrust in `Ḡ` as a free
/// parameter, which is what the thrust-threshold search varies.
pub fn check_degraded_with_thrust(
    params: &AirframeParams,
    eta: &EfficiencyVector,
    set_kind: SetKind,
    hover_thrust: f64,
) -> Result<ControllabilityReport> {
    params.validate()?;
    let rank_ok = build_degraded_system(params).controllability_rank() == 6;
    match set_kind {
        SetKind::ExactU0 => {
            let z = degraded_attainable_set(params, eta, hover_thrust);
            Ok(zonotope_report(&z, params, rank_ok))
        }
        SetKind::AllocatedUa => {
            let h = build_reduced_effectiveness(params, eta);
            let p = allocation::pim(&DMatrix::from_iterator(3, ROTOR_COUNT, h.iter().copied()))?;
            let gravity = DVector::from_vec(vec![hover_thrust, 0.0, 0.0]);
            let poly = allocation_polytope(p.matrix(), &gravity, params.max_lift_n);
            let origin = DVector::zeros(3);
            let (margin, witness) = poly.interior_margin_with_witness(&origin);

            let weights = unit_weights(3, params);
            let scaled_rows: Vec<_> = poly
                .rows
                .iter()
                .map(|r| crate::sets::HRow {
                    // axis rescale u' = W u maps normals to W⁻¹ n
                    normal: DVector::from_iterator(
                        3,
                        r.normal.iter().zip(&weights).map(|(v, w)| v / w),
                    ),
                    lower: r.lower,
                    upper: r.upper,
                })
                .collect();
            let margin_scaled =
                crate::sets::HPolytope { rows: scaled_rows }.interior_margin(&origin);

            let tol = 1e-9 * params.max_lift_n;
            let hover_attainable = margin >= -tol;
            Ok(ControllabilityReport {
                controllable: margin > tol && rank_ok && hover_attainable,
                margin,
                margin_scaled,
                witness_direction: state_witness(&witness, params),
                rank_ok,
                hover_attainable,
                full_dimensional: true,
                method: Method::HpolySlack,
            })
        }
    }
}

/// Control-space direction along which the attainable set with rotor
/// `rotor` failed has zero support: the uncontrollable direction. Rotor 2's
/// direction is `[0, −√3/(3d), 1/(3d), 1/(3k_μ)]`; the others follow from the
/// hexagon's symmetry (60° torque-plane rotation per index step, yaw sign
/// flip per step).
pub fn witness_control_direction(params: &AirframeParams, rotor: usize) -> SVector<f64, 4> {
    assert!((1..=ROTOR_COUNT).contains(&rotor));
    let d = params.arm_m;
    let k_mu = params.torque_ratio;
    let base = SVector::<f64, 4>::new(
        0.0,
        -3.0_f64.sqrt() / (3.0 * d),
        1.0 / (3.0 * d),
        1.0 / (3.0 * k_mu),
    );
    let steps = (rotor + 6 - 2) % 6;
    let mut v = base;
    let (sin, cos) = (60.0_f64.to_radians().sin(), 60.0_f64.to_radians().cos());
    for _ in 0..steps {
        let (l, m) = (v[1], v[2]);
        v[1] = cos * l - sin * m;
        v[2] = sin * l + cos * m;
        v[3] = -v[3];
    }
    v.normalize()
}

/// Inertia-weighted witness direction for a rotor-2 failure (the velocity
/// sub-block of the uncontrollable state direction).
pub fn witness_direction_eta2(params: &AirframeParams) -> SVector<f64, 4> {
    let d = params.arm_m;
    let k_mu = params.torque_ratio;
    SVector::<f64, 4>::new(
        0.0,
        -3.0_f64.sqrt() * params.inertia_roll / (3.0 * d),
        params.inertia_pitch / (3.0 * d),
        params.inertia_yaw / (3.0 * k_mu),
    )
    .normalize()
}

/// Support of the single-failure attainable set along the rotor's witness
/// direction; zero (to tolerance) certifies uncontrollability.
pub fn witness_support(params: &AirframeParams, rotor: usize) -> f64 {
    let z = full_attainable_set(params, &EfficiencyVector::single_failure(rotor));
    let n = witness_control_direction(params, rotor);
    z.support(&DVector::from_iterator(4, n.iter().copied())).value
}

/// Inertia-weighted witness direction for any single rotor failure,
/// validated against the support oracle before being returned.
pub fn witness_direction(params: &AirframeParams, rotor: usize) -> Result<SVector<f64, 4>> {
    let support = witness_support(params, rotor);
    if support.abs() > 1e-9 {
        return Err(Error::WitnessInvalid { rotor, support });
    }
    let n = witness_control_direction(params, rotor);
    let jf = SMatrix::<f64, 4, 4>::from_diagonal(&SVector::<f64, 4>::new(
        -params.mass_kg,
        params.inertia_roll,
        params.inertia_pitch,
        params.inertia_yaw,
    ));
    Ok((jf * n).normalize())
}

fn bisect_flip<F: Fn(f64) -> bool>(mut lo: f64, mut hi: f64, verdict: F) -> Result<f64> {
    let (v_lo, v_hi) = (verdict(lo), verdict(hi));
    if v_lo == v_hi {
        return Err(Error::NoFlip { lo, hi });
    }
    for _ in 0..60 {
        if (hi - lo) <= 1e-8 * hi.abs() {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if verdict(mid) == v_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Minimum per-rotor lift limit `K*` above which the degraded system stays
/// controllable under allocated lifts after rotor `rotor` fails. Found by
/// bisection on the controllability verdict; analytically `(5/18)·m_a·g`.
pub fn degraded_lift_threshold(params: &AirframeParams, rotor: usize) -> Result<f64> {
    let eta = EfficiencyVector::single_failure(rotor);
    let mg = params.hover_thrust();
    let verdict = |k: f64| {
        let p = AirframeParams { max_lift_n: k, ..params.clone() };
        check_degraded(&p, &eta, SetKind::AllocatedUa)
            .map(|r| r.controllable)
            .unwrap_or(false)
    };
    bisect_flip(1e-6, 2.0 * mg, verdict)
}

/// Maximum hover thrust `T*` below which the degraded system stays
/// controllable for the given lift limit; analytically `(18/5)·K`.
pub fn degraded_thrust_threshold(params: &AirframeParams, rotor: usize) -> Result<f64> {
    let eta = EfficiencyVector::single_failure(rotor);
    let k = params.max_lift_n;
    let verdict = |t: f64| {
        check_degraded_with_thrust(params, &eta, SetKind::AllocatedUa, t)
            .map(|r| r.controllable)
            .unwrap_or(false)
    };
    bisect_flip(1e-3 * k, 20.0 * k, verdict)
}

/// Which system pair an inclusion test runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SystemPair {
    Full,
    Degraded,
}

/// Samples the allocated attainable set and counts membership violations in
/// the exact one; the allocated set is contained in the exact set, so the
/// expected count is zero.
pub fn inclusion_test(
    params: &AirframeParams,
    eta: &EfficiencyVector,
    pair: SystemPair,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let (h, gravity): (DMatrix<f64>, DVector<f64>) = match pair {
        SystemPair::Full => {
            let h = build_full_effectiveness(params, eta);
            (
                DMatrix::from_iterator(4, ROTOR_COUNT, h.iter().copied()),
                DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0, 0.0]),
            )
        }
        SystemPair::Degraded => {
            let h = build_reduced_effectiveness(params, eta);
            (
                DMatrix::from_iterator(3, ROTOR_COUNT, h.iter().copied()),
                DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]),
            )
        }
    };
    let p = allocation::pim(&h)?;
    count_exclusions(&h, &p, &gravity, params.max_lift_n, samples, seed)
}

/// Inclusion-test core, exposed separately so a deliberately corrupted
/// allocation matrix can be checked as a negative control.
pub fn count_exclusions(
    h: &DMatrix<f64>,
    p: &AllocationMatrix,
    gravity: &DVector<f64>,
    max_lift: f64,
    samples: usize,
    seed: u64,
) -> Result<usize> {
    let exact = attainable_set(h, max_lift, gravity);
    let poly = allocation_polytope(p.matrix(), gravity, max_lift);
    let normals = exact.facet_normals()?;
    let points = poly.sample(&exact, samples, seed)?;
    Ok(points
        .iter()
        .filter(|pt| !exact.contains_with_normals(&normals, pt, 1e-9))
        .count())
}

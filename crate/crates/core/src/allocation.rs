//! Pseudo-inverse control allocation: mapping virtual controls (thrust and
//! torques) back to individual rotor lifts.

use nalgebra::{DMatrix, DVector};

use crate::model::ROTOR_COUNT;
use crate::{Error, Result};

/// Right inverse `P = Hᵀ(HHᵀ)⁻¹` of an effectiveness matrix, 6x4 for the
/// full system or 6x3 for the degraded one. Rows of failed rotors are
/// exactly zero.
#[derive(Clone, Debug)]
pub struct AllocationMatrix {
    matrix: DMatrix<f64>,
}

impl AllocationMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Wraps a matrix without checking the right-inverse invariant. Only for
    /// negative controls in tests.
    #[doc(hidden)]
    pub fn from_matrix_unchecked(matrix: DMatrix<f64>) -> Self {
        Self { matrix }
    }

    /// Number of virtual control channels (4 full, 3 reduced).
    pub fn channels(&self) -> usize {
        self.matrix.ncols()
    }

    /// `f = P·F`. No clamping: saturation is a separate, explicit step so
    /// the unclamped linear allocation stays the one that defines the
    /// allocated attainable set.
    pub fn allocate(&self, virtual_control: &DVector<f64>) -> DVector<f64> {
        assert_eq!(virtual_control.len(), self.channels());
        &self.matrix * virtual_control
    }

    /// Lift distribution that holds the craft against gravity: `P·G`.
    pub fn hover_distribution(&self, gravity: &DVector<f64>) -> DVector<f64> {
        self.allocate(gravity)
    }
}

/// Computes the pseudo-inverse allocation matrix by solving the Gram system
/// `(HHᵀ)X = H` with partial pivoting, then `P = Xᵀ`.
///
/// Errors with [`Error::PimSingular`] when `HHᵀ` is numerically singular
/// (relative determinant below 1e-12), i.e. too many rotors have failed.
pub fn pim(h: &DMatrix<f64>) -> Result<AllocationMatrix> {
    assert_eq!(h.ncols(), ROTOR_COUNT);
    let m = h.nrows();
    assert!(m == 3 || m == 4);
    let gram = h * h.transpose();
    let det = gram.determinant();
    let diag_scale: f64 = (0..m).map(|i| gram[(i, i)]).product();
    if !det.is_finite() || det.abs() <= 1e-12 * diag_scale {
        return Err(Error::PimSingular);
    }
    let lu = gram.lu();
    let x = lu.solve(h).ok_or(Error::PimSingular)?;
    Ok(AllocationMatrix { matrix: x.transpose() })
}

/// Component-wise clamp of a lift vector to `[0, K]`; flags mark clamped
/// entries.
pub fn saturate(f: &DVector<f64>, max_lift: f64) -> (DVector<f64>, [bool; ROTOR_COUNT]) {
    assert_eq!(f.len(), ROTOR_COUNT);
    let mut flags = [false; ROTOR_COUNT];
    let mut clamped = f.clone();
    for i in 0..ROTOR_COUNT {
        if f[i] < 0.0 {
            clamped[i] = 0.0;
            flags[i] = true;
        } else if f[i] > max_lift {
            clamped[i] = max_lift;
            flags[i] = true;
        }
    }
    (clamped, flags)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{
        build_full_effectiveness, build_reduced_effectiveness, AirframeParams, EfficiencyVector,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn full_h(params: &AirframeParams, eta: &EfficiencyVector) -> DMatrix<f64> {
        let h = build_full_effectiveness(params, eta);
        DMatrix::from_iterator(4, 6, h.iter().copied())
    }

    fn reduced_h(params: &AirframeParams, eta: &EfficiencyVector) -> DMatrix<f64> {
        let h = build_reduced_effectiveness(params, eta);
        DMatrix::from_iterator(3, 6, h.iter().copied())
    }

    fn assert_right_inverse(h: &DMatrix<f64>, p: &AllocationMatrix) {
        let prod = h * p.matrix();
        let m = h.nrows();
        for r in 0..m {
            for c in 0..m {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert!(
                    (prod[(r, c)] - expected).abs() <= 1e-10,
                    "HP deviates from identity at ({r},{c}): {}",
                    prod[(r, c)]
                );
            }
        }
    }

    #[test]
    fn reduced_pim_thrust_column_for_failed_rotor_two() {
        let params = AirframeParams::prototype();
        let h = reduced_h(&params, &EfficiencyVector::single_failure(2));
        let p = pim(&h).unwrap();
        let expected = [5.0 / 18.0, 0.0, 5.0 / 18.0, 1.0 / 6.0, 1.0 / 9.0, 1.0 / 6.0];
        for (i, e) in expected.iter().enumerate() {
            assert_relative_eq!(p.matrix()[(i, 0)], *e, epsilon = 1e-10);
        }
        assert_right_inverse(&h, &p);
        // thrust column sums to 1: total hover thrust is preserved
        let sum: f64 = (0..6).map(|i| p.matrix()[(i, 0)]).sum();
        assert_relative_eq!(sum, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn right_inverse_holds_for_random_eta_and_single_failures() {
        let params = AirframeParams::prototype();
        for rotor in 1..=6 {
            let eta = EfficiencyVector::single_failure(rotor);
            let h = reduced_h(&params, &eta);
            let p = pim(&h).unwrap();
            assert_right_inverse(&h, &p);
            // failed rotor's row is exactly zero
            for c in 0..3 {
                assert_eq!(p.matrix()[(rotor - 1, c)], 0.0);
            }
        }
        let h = full_h(&params, &EfficiencyVector::nominal());
        assert_right_inverse(&h, &pim(&h).unwrap());
    }

    #[test]
    fn rank_deficient_effectiveness_is_rejected() {
        let params = AirframeParams::prototype();
        // only rotors 1 and 4 alive: the roll row of H̄ vanishes
        let eta = EfficiencyVector::new([1.0, 0.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let h = reduced_h(&params, &eta);
        assert!(matches!(pim(&h), Err(Error::PimSingular)));
        // all rotors dead
        let h = full_h(&params, &EfficiencyVector::new([0.0; 6]).unwrap());
        assert!(matches!(pim(&h), Err(Error::PimSingular)));
    }

    #[test]
    fn hover_allocation_examples() {
        let params = AirframeParams::prototype();
        let mg = params.hover_thrust();

        // degraded, rotor 2 failed
        let p = pim(&reduced_h(&params, &EfficiencyVector::single_failure(2))).unwrap();
        let f = p.hover_distribution(&DVector::from_vec(vec![mg, 0.0, 0.0]));
        let expected = [5.0 / 18.0, 0.0, 5.0 / 18.0, 1.0 / 6.0, 1.0 / 9.0, 1.0 / 6.0];
        for i in 0..6 {
            assert_relative_eq!(f[i], mg * expected[i], epsilon = 1e-9);
        }
        let max = f.iter().fold(0.0f64, |a, &v| a.max(v));
        assert_relative_eq!(max, 4.1786, epsilon = 1e-3);
        assert!(max < params.max_lift_n);

        // full, all healthy: uniform lifts
        let hm = full_h(&params, &EfficiencyVector::nominal());
        let p = pim(&hm).unwrap();
        let f = p.hover_distribution(&DVector::from_vec(vec![mg, 0.0, 0.0, 0.0]));
        for i in 0..6 {
            assert_relative_eq!(f[i], mg / 6.0, epsilon = 1e-10);
        }
        assert_relative_eq!(f[0], 2.5072, epsilon = 1e-4);
        let back = &hm * &f;
        assert_relative_eq!(back[0], mg, epsilon = 1e-10);

        // zero virtual control allocates zero lifts
        let f = p.allocate(&DVector::zeros(4));
        assert!(f.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn saturate_clamps_and_flags() {
        let k = 6.125;
        let f = DVector::from_vec(vec![1.0, -1.0, k + 2.0, 0.0, k, 3.0]);
        let (clamped, flags) = saturate(&f, k);
        assert_eq!(clamped[0], 1.0);
        assert_eq!(clamped[1], 0.0);
        assert_eq!(clamped[2], k);
        assert_eq!(flags, [false, true, true, false, false, false]);

        let inside = DVector::from_vec(vec![1.0; 6]);
        let (same, flags) = saturate(&inside, k);
        assert_eq!(same, inside);
        assert!(flags.iter().all(|&f| !f));
    }

    proptest! {
        #[test]
        fn right_inverse_for_random_healthy_eta(eta in proptest::array::uniform6(0.05f64..=1.0)) {
            let params = AirframeParams::prototype();
            let eta = EfficiencyVector::new(eta).unwrap();
            let h = full_h(&params, &eta);
            let p = pim(&h).unwrap();
            let prod = &h * p.matrix();
            for r in 0..4 {
                for c in 0..4 {
                    let expected = if r == c { 1.0 } else { 0.0 };
                    prop_assert!((prod[(r, c)] - expected).abs() <= 1e-10);
                }
            }
        }

        #[test]
        fn allocate_is_linear(
            f1 in proptest::array::uniform4(-10.0f64..10.0),
            f2 in proptest::array::uniform4(-10.0f64..10.0),
            a in -5.0f64..5.0,
            b in -5.0f64..5.0,
        ) {
            let params = AirframeParams::prototype();
            let p = pim(&full_h(&params, &EfficiencyVector::nominal())).unwrap();
            let v1 = DVector::from_row_slice(&f1);
            let v2 = DVector::from_row_slice(&f2);
            let lhs = p.allocate(&(&v1 * a + &v2 * b));
            let rhs = p.allocate(&v1) * a + p.allocate(&v2) * b;
            prop_assert!((lhs - rhs).norm() <= 1e-9);
        }
    }
}

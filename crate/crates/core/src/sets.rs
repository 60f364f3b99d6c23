//! Attainable control sets in 3- or 4-dimensional control space.
//!
//! Two representations are used side by side:
//!
//! * [`Zonotope`] — the exact attainable set under all box-constrained lifts,
//!   `{H f − G : f ∈ [0,K]⁶}`. Support functions and facet normals are
//!   closed-form, so interiority of the origin is decided combinatorially
//!   (at most 2·C(6,3) = 40 facet normals in dimension 4).
//! * [`HPolytope`] — the attainable set under a fixed pseudo-inverse
//!   allocation, `{u : P(u+G) ∈ [0,K]⁶}`, kept in H-representation straight
//!   from the rows of `P`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::model::ROTOR_COUNT;
use crate::{Error, Result};

/// The box of admissible rotor lifts, `[0, K]⁶`.
#[derive(Clone, Copy, Debug)]
pub struct LiftBox {
    pub max_lift: f64,
}

impl LiftBox {
    pub fn contains(&self, f: &[f64], tol: f64) -> bool {
        f.iter().all(|&v| v >= -tol && v <= self.max_lift + tol)
    }
}

/// Generator representation of an attainable control set: the image of the
/// lift box under the effectiveness matrix, shifted by the gravity offset.
///
/// Generators use the `[0, 1]` parameterization: the set is
/// `{center + Σ tᵢ·gᵢ : tᵢ ∈ [0, 1]}`. Zero columns of `H` (failed rotors)
/// are dropped; `rotor_of` remembers which rotor each generator came from so
/// support maximizers can be mapped back to lift vectors.
#[derive(Clone, Debug)]
pub struct Zonotope {
    center: DVector<f64>,
    generators: Vec<DVector<f64>>,
    rotor_of: Vec<usize>,
    max_lift: f64,
}

/// Value of a support query together with a lift vector attaining it.
#[derive(Clone, Debug)]
pub struct SupportResult {
    pub value: f64,
    /// A lift vector in the box mapping to the support point. Components of
    /// dropped (failed) rotors are zero.
    pub maximizer: [f64; ROTOR_COUNT],
}

/// Builds the attainable set `{H f − G : f ∈ [0,K]⁶}` as a zonotope.
///
/// `h` is 3x6 or 4x6; `gravity` must match its row count.
pub fn attainable_set(h: &DMatrix<f64>, max_lift: f64, gravity: &DVector<f64>) -> Zonotope {
    assert!(max_lift > 0.0);
    assert_eq!(h.ncols(), ROTOR_COUNT);
    assert_eq!(h.nrows(), gravity.len());
    let mut generators = Vec::new();
    let mut rotor_of = Vec::new();
    for i in 0..ROTOR_COUNT {
        let col = h.column(i) * max_lift;
        if col.norm() > 0.0 {
            generators.push(col.into_owned());
            rotor_of.push(i);
        }
    }
    Zonotope {
        center: -gravity.clone(),
        generators,
        rotor_of,
        max_lift,
    }
}

impl Zonotope {
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn center(&self) -> &DVector<f64> {
        &self.center
    }

    pub fn generators(&self) -> &[DVector<f64>] {
        &self.generators
    }

    pub fn max_generator_norm(&self) -> f64 {
        self.generators
            .iter()
            .fold(0.0_f64, |acc, g| acc.max(g.norm()))
    }

    /// Support function `max{ n·x : x ∈ Z }` in direction `n` (normalized
    /// internally), with a lift vector attaining the maximum.
    pub fn support(&self, direction: &DVector<f64>) -> SupportResult {
        let n = direction.norm();
        assert!(n > 0.0, "support direction must be nonzero");
        let dir = direction / n;
        let mut value = dir.dot(&self.center);
        let mut maximizer = [0.0; ROTOR_COUNT];
        for (g, &rotor) in self.generators.iter().zip(&self.rotor_of) {
            let proj = dir.dot(g);
            if proj > 0.0 {
                value += proj;
                maximizer[rotor] = self.max_lift;
            }
        }
        SupportResult { value, maximizer }
    }

    /// Axis-aligned bounding box as `(lower, upper)`.
    pub fn bounding_box(&self) -> (DVector<f64>, DVector<f64>) {
        let mut lo = self.center.clone();
        let mut hi = self.center.clone();
        for g in &self.generators {
            for j in 0..self.dim() {
                if g[j] > 0.0 {
                    hi[j] += g[j];
                } else {
                    lo[j] += g[j];
                }
            }
        }
        (lo, hi)
    }

    /// Unit normals of all facet-supporting hyperplanes.
    ///
    /// Every (dim−1)-subset of generators with rank dim−1 contributes both
    /// orientations of its normal; parallel duplicates are merged at a
    /// direction-cosine tolerance of 1e-9. Errors with [`Error::DegenerateSet`]
    /// when the generators do not span the ambient space.
    pub fn facet_normals(&self) -> Result<Vec<DVector<f64>>> {
        let dim = self.dim();
        let gen_matrix = DMatrix::from_columns(&self.generators);
        if crate::model::numerical_rank(&gen_matrix, 1e-10) < dim {
            return Err(Error::DegenerateSet);
        }
        let mut normals: Vec<DVector<f64>> = Vec::new();
        let mut push_unique = |n: DVector<f64>| {
            if !normals.iter().any(|e| e.dot(&n) > 1.0 - 1e-9) {
                normals.push(n);
            }
        };
        for subset in combinations(self.generators.len(), dim - 1) {
            let vs: Vec<&DVector<f64>> = subset.iter().map(|&i| &self.generators[i]).collect();
            if let Some(normal) = hyperplane_normal(&vs, dim) {
                push_unique(normal.clone());
                push_unique(-normal);
            }
        }
        Ok(normals)
    }

    /// Membership test against a precomputed facet-normal list.
    pub fn contains_with_normals(&self, normals: &[DVector<f64>], point: &DVector<f64>, tol: f64) -> bool {
        normals
            .iter()
            .all(|n| n.dot(point) <= self.support(n).value + tol)
    }

    /// True iff `point` lies in the set up to `tol` along every facet normal.
    pub fn contains(&self, point: &DVector<f64>, tol: f64) -> Result<bool> {
        let normals = self.facet_normals()?;
        Ok(self.contains_with_normals(&normals, point, tol))
    }

    /// Interiority margin of `point`: the minimum over facet normals of
    /// `support(n) − n·point`. Positive iff `point` is strictly interior.
    /// Also returns the minimizing normal.
    pub fn interior_margin(&self, point: &DVector<f64>) -> Result<(f64, DVector<f64>)> {
        let normals = self.facet_normals()?;
        let mut best: Option<(f64, &DVector<f64>)> = None;
        for n in &normals {
            let slack = self.support(n).value - n.dot(point);
            if best.is_none_or(|(m, _)| slack < m) {
                best = Some((slack, n));
            }
        }
        let (margin, n) = best.expect("nondegenerate zonotope has facets");
        Ok((margin, n.clone()))
    }

    /// The same set with axis `j` rescaled by `weights[j]`; margins change
    /// but interiority verdicts do not.
    pub fn rescaled(&self, weights: &[f64]) -> Zonotope {
        assert_eq!(weights.len(), self.dim());
        let scale = |v: &DVector<f64>| {
            DVector::from_iterator(v.len(), v.iter().zip(weights).map(|(x, w)| x * w))
        };
        Zonotope {
            center: scale(&self.center),
            generators: self.generators.iter().map(scale).collect(),
            rotor_of: self.rotor_of.clone(),
            max_lift: self.max_lift,
        }
    }
}

/// Normal to the span of `dim − 1` vectors in `dim` dimensions via the
/// generalized cross product (cofactor expansion). Returns `None` when the
/// vectors are rank deficient: the cross-product norm² equals the Gram
/// determinant, checked at relative tolerance 1e-10.
fn hyperplane_normal(vs: &[&DVector<f64>], dim: usize) -> Option<DVector<f64>> {
    assert_eq!(vs.len(), dim - 1);
    let mut normal = DVector::zeros(dim);
    for j in 0..dim {
        // minor: rows = vs, with column j removed
        let mut minor = DMatrix::zeros(dim - 1, dim - 1);
        for (r, v) in vs.iter().enumerate() {
            let mut cc = 0;
            for c in 0..dim {
                if c != j {
                    minor[(r, cc)] = v[c];
                    cc += 1;
                }
            }
        }
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        normal[j] = sign * minor.determinant();
    }
    let norm_sq = normal.norm_squared();
    let gram_scale: f64 = vs.iter().map(|v| v.norm_squared()).product();
    if norm_sq <= 1e-10 * gram_scale {
        return None;
    }
    Some(normal.normalize())
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    if k > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        // advance
        let mut i = k;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - k {
                break;
            }
            if i == 0 {
                return out;
            }
        }
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// One double-sided halfspace `lower ≤ normal·x ≤ upper`.
#[derive(Clone, Debug)]
pub struct HRow {
    pub normal: DVector<f64>,
    pub lower: f64,
    pub upper: f64,
}

/// Intersection of double-sided halfspaces.
#[derive(Clone, Debug)]
pub struct HPolytope {
    pub rows: Vec<HRow>,
}

/// Attainable set under allocation `P`: `{u : P(u+G) ∈ [0,K]⁶}`.
///
/// Each nonzero row `pᵢ` of `P` contributes `pᵢ·u ∈ [−pᵢ·G, K − pᵢ·G]`;
/// zero rows (failed rotors) are dropped.
pub fn allocation_polytope(p: &DMatrix<f64>, gravity: &DVector<f64>, max_lift: f64) -> HPolytope {
    assert_eq!(p.nrows(), ROTOR_COUNT);
    assert_eq!(p.ncols(), gravity.len());
    let mut rows = Vec::new();
    for i in 0..ROTOR_COUNT {
        let normal = p.row(i).transpose();
        if normal.norm() == 0.0 {
            continue;
        }
        let offset = normal.dot(gravity);
        rows.push(HRow {
            normal,
            lower: -offset,
            upper: max_lift - offset,
        });
    }
    HPolytope { rows }
}

impl HPolytope {
    pub fn satisfies(&self, point: &DVector<f64>, tol: f64) -> bool {
        self.rows.iter().all(|r| {
            let v = r.normal.dot(point);
            v >= r.lower - tol && v <= r.upper + tol
        })
    }

    /// Normalized slack of `point`: `min_i min(n·x − lo, up − n·x)/‖n‖`.
    /// Positive iff the point is strictly interior.
    pub fn interior_margin(&self, point: &DVector<f64>) -> f64 {
        assert!(!self.rows.is_empty());
        self.rows
            .iter()
            .map(|r| {
                let v = r.normal.dot(point);
                (v - r.lower).min(r.upper - v) / r.normal.norm()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// As [`interior_margin`](Self::interior_margin), plus the binding row's
    /// unit normal oriented so that `max{ dir·u : u ∈ polytope } = −margin`
    /// when the point is the origin of an excluded halfspace.
    pub fn interior_margin_with_witness(&self, point: &DVector<f64>) -> (f64, DVector<f64>) {
        assert!(!self.rows.is_empty());
        let mut margin = f64::INFINITY;
        let mut witness = DVector::zeros(point.len());
        for r in &self.rows {
            let v = r.normal.dot(point);
            let norm = r.normal.norm();
            let lo_slack = (v - r.lower) / norm;
            let up_slack = (r.upper - v) / norm;
            let (slack, dir) = if lo_slack <= up_slack {
                (lo_slack, -&r.normal / norm)
            } else {
                (up_slack, &r.normal / norm)
            };
            if slack < margin {
                margin = slack;
                witness = dir;
            }
        }
        (margin, witness)
    }

    /// Seeded rejection sampling: draw uniformly from the bounding zonotope's
    /// axis-aligned bounding box, keep points satisfying every row. Errors
    /// with [`Error::SamplingExhausted`] after `10⁶ · count` draws.
    pub fn sample(&self, bounding: &Zonotope, count: usize, seed: u64) -> Result<Vec<DVector<f64>>> {
        assert!(!self.rows.is_empty());
        let (lo, hi) = bounding.bounding_box();
        let dim = lo.len();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::with_capacity(count);
        let max_attempts = 1_000_000u64.saturating_mul(count as u64);
        let mut attempts = 0u64;
        while points.len() < count {
            if attempts >= max_attempts {
                return Err(Error::SamplingExhausted {
                    attempts,
                    accepted: points.len(),
                });
            }
            attempts += 1;
            let p = DVector::from_iterator(
                dim,
                (0..dim).map(|j| rng.gen_range(lo[j]..=hi[j])),
            );
            if self.satisfies(&p, 0.0) {
                points.push(p);
            }
        }
        Ok(points)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation;
    use crate::model::{
        build_full_effectiveness, build_full_system, build_reduced_effectiveness, AirframeParams,
        EfficiencyVector,
    };
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn full_set(params: &AirframeParams, eta: &EfficiencyVector) -> Zonotope {
        let h = build_full_effectiveness(params, eta);
        let sys = build_full_system(params);
        attainable_set(
            &DMatrix::from_iterator(4, 6, h.iter().copied()),
            params.max_lift_n,
            &DVector::from_iterator(4, sys.gravity_offset.iter().copied()),
        )
    }

    #[test]
    fn attainable_set_shape() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::nominal());
        assert_eq!(z.dim(), 4);
        assert_eq!(z.generators().len(), 6);
        assert_relative_eq!(z.center()[0], -15.043, epsilon = 1e-12);
        assert_eq!(z.center()[1], 0.0);

        let z2 = full_set(&params, &EfficiencyVector::single_failure(2));
        assert_eq!(z2.generators().len(), 5);

        let hbar = build_reduced_effectiveness(&params, &EfficiencyVector::nominal());
        let zbar = attainable_set(
            &DMatrix::from_iterator(3, 6, hbar.iter().copied()),
            params.max_lift_n,
            &DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]),
        );
        assert_eq!(zbar.dim(), 3);
        assert_eq!(zbar.generators().len(), 6);
    }

    #[test]
    fn support_along_thrust_axis() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::nominal());
        let up = DVector::from_vec(vec![1.0, 0.0, 0.0, 0.0]);
        let s = z.support(&up);
        assert_relative_eq!(s.value, 6.0 * 6.125 - 15.043, epsilon = 1e-9);
        assert!(s.maximizer.iter().all(|&f| f == 6.125));

        let down = -up;
        let s = z.support(&down);
        assert_relative_eq!(s.value, 15.043, epsilon = 1e-9);
        assert!(s.maximizer.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn support_along_eta2_witness_is_zero() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::single_failure(2));
        let d = params.arm_m;
        let k_mu = params.torque_ratio;
        let dir = DVector::from_vec(vec![
            0.0,
            -3.0_f64.sqrt() / (3.0 * d),
            1.0 / (3.0 * d),
            1.0 / (3.0 * k_mu),
        ]);
        let s = z.support(&dir.normalize());
        assert!(s.value.abs() <= 1e-9, "support = {}", s.value);
    }

    #[test]
    fn facet_normal_counts() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::nominal());
        let normals = z.facet_normals().unwrap();
        assert!(normals.len() <= 40); // 2·C(6,3)
        assert!(!normals.is_empty());
        for n in &normals {
            assert_relative_eq!(n.norm(), 1.0, epsilon = 1e-12);
        }

        let hbar = build_reduced_effectiveness(&params, &EfficiencyVector::nominal());
        let zbar = attainable_set(
            &DMatrix::from_iterator(3, 6, hbar.iter().copied()),
            params.max_lift_n,
            &DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]),
        );
        let normals = zbar.facet_normals().unwrap();
        assert!(normals.len() <= 30); // 2·C(6,2)
    }

    #[test]
    fn parallel_generators_are_merged() {
        // two parallel generators in R3
        let mut h = DMatrix::zeros(3, 6);
        h[(0, 0)] = 1.0;
        h[(0, 1)] = 2.0; // parallel to column 0
        h[(1, 2)] = 1.0;
        h[(2, 3)] = 1.0;
        h[(0, 4)] = 1.0;
        h[(1, 4)] = 1.0;
        h[(2, 5)] = -1.0;
        let z = attainable_set(&h, 1.0, &DVector::zeros(3));
        let normals = z.facet_normals().unwrap();
        assert!(normals.len() < 30);
    }

    #[test]
    fn degenerate_set_is_reported() {
        // all generators in the T-L plane of R3
        let mut h = DMatrix::zeros(3, 6);
        for i in 0..6 {
            h[(0, i)] = 1.0;
            h[(1, i)] = i as f64 - 2.5;
        }
        let z = attainable_set(&h, 1.0, &DVector::zeros(3));
        assert!(matches!(z.facet_normals(), Err(Error::DegenerateSet)));
        assert!(matches!(z.contains(&DVector::zeros(3), 1e-9), Err(Error::DegenerateSet)));
    }

    #[test]
    fn membership_basics() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::nominal());
        assert!(z.contains(z.center(), 1e-9).unwrap());
        // hover (origin of control space) is attainable
        assert!(z.contains(&DVector::zeros(4), 1e-9).unwrap());
        // beyond maximum total thrust
        let far = DVector::from_vec(vec![7.0 * params.max_lift_n, 0.0, 0.0, 0.0]);
        assert!(!z.contains(&far, 1e-9).unwrap());
    }

    // Independent cross-check that hover is attainable: find f in the box
    // with H f = G by construction (uniform lifts) and map it through the set
    // definition.
    #[test]
    fn hover_is_attained_by_uniform_lifts() {
        let params = AirframeParams::prototype();
        let h = build_full_effectiveness(&params, &EfficiencyVector::nominal());
        let f = nalgebra::SVector::<f64, 6>::repeat(params.hover_thrust() / 6.0);
        assert!(f.iter().all(|&v| v >= 0.0 && v <= params.max_lift_n));
        let u = h * f - build_full_system(&params).gravity_offset;
        assert!(u.norm() <= 1e-12);
    }

    #[test]
    fn mapped_box_points_are_members() {
        let params = AirframeParams::prototype();
        let hmat = build_full_effectiveness(&params, &EfficiencyVector::nominal());
        let z = full_set(&params, &EfficiencyVector::nominal());
        let normals = z.facet_normals().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..10_000 {
            let f = nalgebra::SVector::<f64, 6>::from_fn(|_, _| rng.gen_range(0.0..=params.max_lift_n));
            let u = hmat * f - build_full_system(&params).gravity_offset;
            let p = DVector::from_iterator(4, u.iter().copied());
            assert!(z.contains_with_normals(&normals, &p, 1e-9));
        }
    }

    #[test]
    fn maximizer_attains_support_value() {
        let params = AirframeParams::prototype();
        let hmat = build_full_effectiveness(&params, &EfficiencyVector::nominal());
        let z = full_set(&params, &EfficiencyVector::nominal());
        for n in z.facet_normals().unwrap() {
            let s = z.support(&n);
            let f = nalgebra::SVector::<f64, 6>::from_row_slice(&s.maximizer);
            let u = hmat * f - build_full_system(&params).gravity_offset;
            let x = DVector::from_iterator(4, u.iter().copied());
            assert_relative_eq!(n.dot(&x), s.value, epsilon = 1e-9);
        }
    }

    #[test]
    fn facet_normals_certify_directional_minimum() {
        let params = AirframeParams::prototype();
        let z = full_set(&params, &EfficiencyVector::nominal());
        let (facet_min, _) = z.interior_margin(&DVector::zeros(4)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sampled_min = f64::INFINITY;
        for _ in 0..10_000 {
            let dir = DVector::from_iterator(4, (0..4).map(|_| rng.gen_range(-1.0..=1.0)));
            if dir.norm() < 1e-6 {
                continue;
            }
            sampled_min = sampled_min.min(z.support(&dir).value);
        }
        assert!(facet_min <= sampled_min + 1e-9);
    }

    #[test]
    fn allocation_polytope_row_count_and_margin() {
        let params = AirframeParams::prototype();
        let g = DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]);

        // reduced allocation with rotor 2 failed: row 2 vanishes
        let hbar = build_reduced_effectiveness(&params, &EfficiencyVector::single_failure(2));
        let pbar = allocation::pim(&DMatrix::from_iterator(3, 6, hbar.iter().copied())).unwrap();
        let poly = allocation_polytope(pbar.matrix(), &g, params.max_lift_n);
        assert_eq!(poly.rows.len(), 5);
        assert!(poly.interior_margin(&DVector::zeros(3)) > 0.0);

        // boundary case: K = (5/18)·m_a·g puts the origin on a facet
        let k_star = 5.0 / 18.0 * params.hover_thrust();
        let poly = allocation_polytope(pbar.matrix(), &g, k_star);
        assert!(poly.interior_margin(&DVector::zeros(3)).abs() <= 1e-9);

        // full allocation, all healthy: 6 rows
        let h = build_full_effectiveness(&params, &EfficiencyVector::nominal());
        let p = allocation::pim(&DMatrix::from_iterator(4, 6, h.iter().copied())).unwrap();
        let g4 = DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0, 0.0]);
        let poly = allocation_polytope(p.matrix(), &g4, params.max_lift_n);
        assert_eq!(poly.rows.len(), 6);
    }

    #[test]
    fn unit_box_vertex_has_zero_margin() {
        let rows = (0..3)
            .map(|j| {
                let mut n = DVector::zeros(3);
                n[j] = 1.0;
                HRow { normal: n, lower: 0.0, upper: 1.0 }
            })
            .collect();
        let poly = HPolytope { rows };
        let vertex = DVector::from_vec(vec![1.0, 1.0, 0.0]);
        assert_eq!(poly.interior_margin(&vertex), 0.0);
    }

    #[test]
    fn sampling_satisfies_rows_and_is_deterministic() {
        let params = AirframeParams::prototype();
        let hbar = build_reduced_effectiveness(&params, &EfficiencyVector::nominal());
        let hd = DMatrix::from_iterator(3, 6, hbar.iter().copied());
        let g = DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]);
        let pbar = allocation::pim(&hd).unwrap();
        let poly = allocation_polytope(pbar.matrix(), &g, params.max_lift_n);
        let z = attainable_set(&hd, params.max_lift_n, &g);

        let pts = poly.sample(&z, 100, 7).unwrap();
        assert_eq!(pts.len(), 100);
        for p in &pts {
            assert!(poly.satisfies(p, 0.0));
        }
        let again = poly.sample(&z, 100, 7).unwrap();
        assert_eq!(pts, again);
    }

    #[test]
    fn empty_interior_polytope_exhausts_sampler() {
        let params = AirframeParams::prototype();
        let hbar = build_reduced_effectiveness(&params, &EfficiencyVector::nominal());
        let hd = DMatrix::from_iterator(3, 6, hbar.iter().copied());
        let g = DVector::from_vec(vec![params.hover_thrust(), 0.0, 0.0]);
        let z = attainable_set(&hd, params.max_lift_n, &g);
        // contradictory row: 1 ≤ T-component ≤ 1 exactly (measure zero)
        let poly = HPolytope {
            rows: vec![HRow {
                normal: DVector::from_vec(vec![1.0, 0.0, 0.0]),
                lower: 1.0,
                upper: 1.0,
            }],
        };
        assert!(matches!(
            poly.sample(&z, 1, 0),
            Err(Error::SamplingExhausted { .. })
        ));
    }

    #[test]
    fn margin_sign_invariant_under_axis_rescaling() {
        let params = AirframeParams::prototype();
        for eta in [EfficiencyVector::nominal(), EfficiencyVector::single_failure(2)] {
            let z = full_set(&params, &eta);
            let weights = [1.0, 1.0 / params.arm_m, 1.0 / params.arm_m, 1.0 / params.torque_ratio];
            let zs = z.rescaled(&weights);
            let (m, _) = z.interior_margin(&DVector::zeros(4)).unwrap();
            let (ms, _) = zs.interior_margin(&DVector::zeros(4)).unwrap();
            let verdict = m > 1e-9 * z.max_generator_norm();
            let verdict_s = ms > 1e-9 * zs.max_generator_norm();
            assert_eq!(verdict, verdict_s);
        }
    }

    proptest! {
        // Positive homogeneity: scaling the direction does not change the
        // (internally normalized) support value.
        #[test]
        fn support_is_scale_invariant(
            dir in proptest::array::uniform4(-1.0f64..1.0),
            alpha in 0.01f64..100.0,
        ) {
            let v = DVector::from_row_slice(&dir);
            prop_assume!(v.norm() > 1e-3);
            let params = AirframeParams::prototype();
            let z = full_set(&params, &EfficiencyVector::nominal());
            let a = z.support(&v).value;
            let b = z.support(&(&v * alpha)).value;
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + a.abs()));
        }
    }
}

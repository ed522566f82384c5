//! One-sided Jacobi SVD for 3×3 real matrices.

use super::{cross3, dot3, norm3, normalize3, scale3, RealMatrix3, SvdResult3, Vec3};

const MAX_SWEEPS: usize = 60;
const ORTHOGONALITY_TOL: f64 = 1e-15;
/// Singular values below this fraction of the largest get completed left
/// vectors instead of normalized columns.
const RANK_TOL: f64 = 1e-13;
const SIGN_TOL: f64 = 1e-12;

/// Singular value decomposition `t = U Σ Vᵀ`.
///
/// Columns of `t·V` are orthogonalized by plane rotations (equivalently,
/// `tᵀt` is diagonalized). Singular values come out descending and the first
/// non-negligible component of every right vector is made nonnegative.
pub fn svd3(t: &RealMatrix3) -> SvdResult3 {
    // Work on columns: cols[j] is column j of t·V.
    let mut cols: [Vec3; 3] = [[0.0; 3]; 3];
    for (j, col) in cols.iter_mut().enumerate() {
        for i in 0..3 {
            col[i] = t.0[i][j];
        }
    }
    let mut v: [Vec3; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let alpha = dot3(&cols[p], &cols[p]);
            let beta = dot3(&cols[q], &cols[q]);
            let gamma = dot3(&cols[p], &cols[q]);
            if gamma == 0.0 || gamma.abs() <= ORTHOGONALITY_TOL * libm::sqrt(alpha * beta) {
                continue;
            }
            rotated = true;
            let zeta = (beta - alpha) / (2.0 * gamma);
            let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
            let tan = sign / (zeta.abs() + libm::sqrt(1.0 + zeta * zeta));
            let cos = 1.0 / libm::sqrt(1.0 + tan * tan);
            let sin = cos * tan;
            rotate(&mut cols, p, q, cos, sin);
            rotate(&mut v, p, q, cos, sin);
        }
        if !rotated {
            break;
        }
    }

    let mut order = [0usize, 1, 2];
    let norms = [norm3(&cols[0]), norm3(&cols[1]), norm3(&cols[2])];
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));

    let singular_values = [norms[order[0]], norms[order[1]], norms[order[2]]];
    let mut right = [v[order[0]], v[order[1]], v[order[2]]];
    let floor = singular_values[0] * RANK_TOL;
    let mut left: [Option<Vec3>; 3] = [None; 3];
    for k in 0..3 {
        if singular_values[k] > floor && singular_values[k] > 0.0 {
            left[k] = Some(scale3(&cols[order[k]], 1.0 / singular_values[k]));
        }
    }
    let mut left = complete_basis(left);

    for k in 0..3 {
        if let Some(&c) = right[k].iter().find(|c| c.abs() > SIGN_TOL) {
            if c < 0.0 {
                right[k] = scale3(&right[k], -1.0);
                left[k] = scale3(&left[k], -1.0);
            }
        }
    }

    SvdResult3 {
        singular_values,
        left_vectors: left,
        right_vectors: right,
    }
}

fn rotate(vs: &mut [Vec3; 3], p: usize, q: usize, cos: f64, sin: f64) {
    for i in 0..3 {
        let (a, b) = (vs[p][i], vs[q][i]);
        vs[p][i] = cos * a - sin * b;
        vs[q][i] = sin * a + cos * b;
    }
}

/// Fills the missing (rank-deficient) left vectors so the set is orthonormal.
/// Known vectors always form a prefix since values are sorted.
fn complete_basis(known: [Option<Vec3>; 3]) -> [Vec3; 3] {
    match known {
        [Some(a), Some(b), Some(c)] => [a, b, c],
        [Some(a), Some(b), None] => {
            let c = normalize3(&cross3(&a, &b), 0.0).unwrap_or_else(|| any_orthogonal(&a));
            [a, b, c]
        }
        [Some(a), None, _] => {
            let b = any_orthogonal(&a);
            [a, b, cross3(&a, &b)]
        }
        _ => [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
    }
}

/// Unit vector orthogonal to the unit vector `a`.
fn any_orthogonal(a: &Vec3) -> Vec3 {
    let axis = (0..3)
        .min_by(|&i, &j| a[i].abs().total_cmp(&a[j].abs()))
        .unwrap_or(0);
    let mut e = [0.0; 3];
    e[axis] = 1.0;
    let proj = dot3(&e, a);
    let raw = [e[0] - proj * a[0], e[1] - proj * a[1], e[2] - proj * a[2]];
    normalize3(&raw, 0.0).expect("axis least aligned with a unit vector")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::tol::EPS_RECON;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn check_invariants(t: &RealMatrix3, s: &SvdResult3) {
        let sv = s.singular_values;
        assert!(sv[0] >= sv[1] && sv[1] >= sv[2] && sv[2] >= 0.0, "{sv:?}");
        assert!(s.reconstruct().max_abs_diff(t) <= EPS_RECON);
        for vs in [&s.left_vectors, &s.right_vectors] {
            for i in 0..3 {
                for j in 0..3 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((dot3(&vs[i], &vs[j]) - want).abs() <= EPS_RECON);
                }
            }
        }
    }

    #[test]
    fn diagonal_with_repeated_values() {
        let s2 = libm::sin(2.0 * core::f64::consts::PI / 8.0);
        let t = RealMatrix3::diag([s2, s2, 1.0]);
        let s = svd3(&t);
        let h = core::f64::consts::FRAC_1_SQRT_2;
        assert!((s.singular_values[0] - 1.0).abs() < 1e-15);
        assert!((s.singular_values[1] - h).abs() < 1e-15);
        assert!((s.singular_values[2] - h).abs() < 1e-15);
        check_invariants(&t, &s);
    }

    #[test]
    fn minus_identity() {
        let t = RealMatrix3::IDENTITY.scale(-1.0);
        let s = svd3(&t);
        assert_eq!(s.singular_values, [1.0, 1.0, 1.0]);
        check_invariants(&t, &s);
        for v in &s.right_vectors {
            assert!(v.iter().find(|c| c.abs() > SIGN_TOL).unwrap() > &0.0);
        }
    }

    #[test]
    fn zero_matrix() {
        let s = svd3(&RealMatrix3::ZERO);
        assert_eq!(s.singular_values, [0.0, 0.0, 0.0]);
        check_invariants(&RealMatrix3::ZERO, &s);
    }

    #[test]
    fn rank_one_and_two() {
        let r1 = RealMatrix3([[1.0, 2.0, 3.0], [2.0, 4.0, 6.0], [-1.0, -2.0, -3.0]]);
        check_invariants(&r1, &svd3(&r1));
        let r2 = RealMatrix3([[1.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 2.0]]);
        let s = svd3(&r2);
        assert!(s.singular_values[2] < 1e-15);
        check_invariants(&r2, &s);
    }

    #[test]
    fn thousand_random_matrices_reconstruct() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5bd);
        for _ in 0..1000 {
            let mut m = [[0.0; 3]; 3];
            m.iter_mut()
                .flatten()
                .for_each(|x| *x = rng.random_range(-1.0..=1.0));
            let t = RealMatrix3(m);
            check_invariants(&t, &svd3(&t));
        }
    }

    proptest! {
        #[test]
        fn frobenius_norm_is_preserved(entries in proptest::array::uniform9(-10.0f64..10.0)) {
            let t = RealMatrix3([
                [entries[0], entries[1], entries[2]],
                [entries[3], entries[4], entries[5]],
                [entries[6], entries[7], entries[8]],
            ]);
            let s = svd3(&t);
            let fro: f64 = entries.iter().map(|x| x * x).sum();
            let sv: f64 = s.singular_values.iter().map(|x| x * x).sum();
            prop_assert!((fro - sv).abs() <= 1e-10 * (1.0 + fro));
            prop_assert!(s.reconstruct().max_abs_diff(&t) <= 1e-9);
        }
    }
}

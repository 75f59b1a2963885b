//! Small dense solvers shared by normal estimation and registration:
//! symmetric Jacobi eigendecomposition and a pivoted linear solve.

use crate::{Mat3, Real, Vec3};

/// Eigendecomposition of a symmetric `N x N` matrix by the cyclic Jacobi
/// method. Returns `(eigenvalues, eigenvectors)` sorted ascending by
/// eigenvalue; eigenvector `k` is column `k`, returned as row `k` of the
/// second array.
pub fn sym_eigen<R: Real, const N: usize>(a: &[[R; N]; N]) -> ([R; N], [[R; N]; N]) {
    let mut a = *a;
    let mut v = [[R::zero(); N]; N];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = R::one();
    }

    // Off-diagonal mass; rotations stop once it is at rounding level
    // relative to the matrix scale.
    let scale = {
        let mut s = R::zero();
        for i in 0..N {
            for j in 0..N {
                s = s.max(a[i][j].abs());
            }
        }
        s.max(R::min_positive_value())
    };
    let tol = scale * R::epsilon() * R::from_usize(8 * N).unwrap();

    for _sweep in 0..32 {
        let mut off = R::zero();
        for i in 0..N {
            for j in (i + 1)..N {
                off += a[i][j] * a[i][j];
            }
        }
        if off.sqrt() <= tol {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() <= scale * R::epsilon() * R::epsilon() {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (R::c(2.0) * a[p][q]);
                let t = {
                    let s = if theta >= R::zero() {
                        R::one()
                    } else {
                        -R::one()
                    };
                    s / (theta.abs() + (theta * theta + R::one()).sqrt())
                };
                let c = R::one() / (t * t + R::one()).sqrt();
                let s = t * c;

                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let vkp = row[p];
                    let vkq = row[q];
                    row[p] = c * vkp - s * vkq;
                    row[q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut vals = [R::zero(); N];
    for i in 0..N {
        vals[i] = a[i][i];
    }

    // Sort ascending, dragging eigenvector columns along.
    let mut order: [usize; N] = [0; N];
    for (i, o) in order.iter_mut().enumerate() {
        *o = i;
    }
    order.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).unwrap());

    let mut sorted_vals = [R::zero(); N];
    let mut sorted_vecs = [[R::zero(); N]; N];
    for (k, &i) in order.iter().enumerate() {
        sorted_vals[k] = vals[i];
        for r in 0..N {
            sorted_vecs[k][r] = v[r][i];
        }
    }
    (sorted_vals, sorted_vecs)
}

/// Eigendecomposition of a symmetric 3x3 matrix, ascending eigenvalues.
pub fn sym_eigen3<R: Real>(a: &Mat3<R>) -> ([R; 3], [Vec3<R>; 3]) {
    let (vals, vecs) = sym_eigen::<R, 3>(&a.m);
    (
        vals,
        [
            Vec3::from_array(vecs[0]),
            Vec3::from_array(vecs[1]),
            Vec3::from_array(vecs[2]),
        ],
    )
}

/// Solve `A x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when a pivot collapses to zero.
pub fn solve<R: Real, const N: usize>(a: &[[R; N]; N], b: &[R; N]) -> Option<[R; N]> {
    let mut m = *a;
    let mut rhs = *b;

    for col in 0..N {
        let mut pivot = col;
        for row in (col + 1)..N {
            if m[row][col].abs() > m[pivot][col].abs() {
                pivot = row;
            }
        }
        if m[pivot][col].abs() == R::zero() {
            return None;
        }
        if pivot != col {
            m.swap(pivot, col);
            rhs.swap(pivot, col);
        }
        for row in (col + 1)..N {
            let f = m[row][col] / m[col][col];
            if f == R::zero() {
                continue;
            }
            for k in col..N {
                let sub = f * m[col][k];
                m[row][k] -= sub;
            }
            let sub = f * rhs[col];
            rhs[row] -= sub;
        }
    }

    let mut x = [R::zero(); N];
    for col in (0..N).rev() {
        let mut acc = rhs[col];
        for k in (col + 1)..N {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Project a near-rotation onto the closest orthonormal matrix with the
/// Newton iteration `R <- (R + R^-T) / 2`. Diverges only for singular
/// input, which callers never produce.
pub fn polar_orthonormalize<R: Real>(m: &Mat3<R>) -> Mat3<R> {
    let mut r = *m;
    for _ in 0..20 {
        let inv_t = match r.inverse() {
            Some(inv) => inv.transpose(),
            None => return *m,
        };
        let next = (r + inv_t) * R::c(0.5);
        let mut delta = R::zero();
        for i in 0..3 {
            for j in 0..3 {
                delta = delta.max((next.m[i][j] - r.m[i][j]).abs());
            }
        }
        r = next;
        if delta < R::epsilon() {
            break;
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jacobi_recovers_known_spectrum() {
        // diag(1, 2, 3) conjugated by a rotation keeps its eigenvalues.
        let c = (0.3f64).cos();
        let s = (0.3f64).sin();
        let q = Mat3::from_rows([c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]);
        let d = Mat3::from_rows([1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]);
        let a = q * d * q.transpose();
        let (vals, vecs) = sym_eigen3(&a);
        assert!((vals[0] - 1.0).abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
        assert!((vals[2] - 3.0).abs() < 1e-12);
        for (k, v) in vecs.iter().enumerate() {
            let av = a * *v;
            assert!((av - *v * vals[k]).norm() < 1e-10);
        }
    }

    #[test]
    fn jacobi_handles_repeated_eigenvalues() {
        let a = Mat3::from_rows([2.0f64, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 5.0]);
        let (vals, _) = sym_eigen3(&a);
        assert!((vals[0] - 2.0).abs() < 1e-14);
        assert!((vals[1] - 2.0).abs() < 1e-14);
        assert!((vals[2] - 5.0).abs() < 1e-14);
    }

    #[test]
    fn solve_matches_hand_inverse() {
        let a = [[4.0f64, 1.0], [1.0, 3.0]];
        let b = [1.0, 2.0];
        let x = solve(&a, &b).unwrap();
        // inverse of [[4,1],[1,3]] is 1/11 [[3,-1],[-1,4]]
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn solve_rejects_singular() {
        let a = [[1.0f64, 2.0], [2.0, 4.0]];
        assert!(solve(&a, &[1.0, 2.0]).is_none());
    }

    #[test]
    fn polar_restores_orthonormality() {
        let c = (0.5f64).cos();
        let s = (0.5f64).sin();
        let mut r = Mat3::from_rows([c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]);
        // Inject drift an optimizer step might leave behind.
        r.m[0][0] += 1e-4;
        r.m[1][2] -= 2e-4;
        let fixed = polar_orthonormalize(&r);
        let should_be_id = fixed.transpose() * fixed;
        let id = Mat3::<f64>::identity();
        for i in 0..3 {
            for j in 0..3 {
                assert!((should_be_id.m[i][j] - id.m[i][j]).abs() < 1e-12);
            }
        }
        assert!((fixed.det() - 1.0).abs() < 1e-12);
    }
}

//! Dense linear-algebra primitives shared by the other modules: convex-hull
//! membership testing, kernel projectors, and the row-space/null-space
//! machinery the QP solver is built on.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::qp::{self, QpProblem, SolveOptions};

/// Outcome of a hull-membership query.
///
/// When `is_member` holds, `certificate` carries convex coefficients `alpha`
/// with `alpha >= 0`, `sum(alpha) = 1` and `||Y*alpha - q|| <= tol`.
/// `distance` is the Euclidean distance from the query to the hull (zero,
/// up to the tolerance, exactly when the query is a member).
#[derive(Debug, Clone)]
pub struct MembershipVerdict {
    pub is_member: bool,
    pub distance: f64,
    pub certificate: Option<DVector<f64>>,
}

pub(crate) fn check_finite_vec(v: &DVector<f64>, what: &'static str) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

pub(crate) fn check_finite_mat(m: &DMatrix<f64>, what: &'static str) -> Result<()> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Test whether `query` lies in the convex hull of `points`.
///
/// Solves the nearest-point problem `min ||Y*alpha - q||^2` over the unit
/// simplex through the QP solver, so membership and the distance diagnostic
/// come from the same computation. Deterministic for fixed inputs.
pub fn hull_membership(
    points: &[DVector<f64>],
    query: &DVector<f64>,
    tol: f64,
) -> Result<MembershipVerdict> {
    if points.is_empty() {
        return Err(Error::EmptyPointSet);
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidProblem(format!(
            "membership tolerance must be positive, got {tol}"
        )));
    }
    let n = query.len();
    check_finite_vec(query, "query")?;
    for p in points {
        if p.len() != n {
            return Err(Error::DimensionMismatch {
                context: "hull point dimension",
                expected: n,
                got: p.len(),
            });
        }
        check_finite_vec(p, "hull point")?;
    }

    let k = points.len();
    let y = DMatrix::from_fn(n, k, |i, j| points[j][i]);

    // min ||Y a - q||^2 = a' (Y'Y) a - 2 q'Y a + q'q  over the simplex.
    let q_mat = 2.0 * y.transpose() * &y;
    let g = -2.0 * y.transpose() * query;
    let e = DMatrix::from_element(1, k, 1.0);
    let d = DVector::from_element(1, 1.0);
    let problem = QpProblem::new(q_mat, g, e, d, true)?.with_constant(query.dot(query));

    // All the mass on the first point is always feasible.
    let mut start = DVector::zeros(k);
    start[0] = 1.0;
    let opts = SolveOptions {
        start: Some(start),
        ..SolveOptions::default()
    };
    let sol = qp::solve_qp(&problem, &opts)?;
    if sol.status != qp::Status::Optimal {
        return Err(Error::NumericalFailure(format!(
            "membership subproblem ended with status {:?}",
            sol.status
        )));
    }

    let distance = sol.objective.max(0.0).sqrt();
    let is_member = distance <= tol;
    Ok(MembershipVerdict {
        is_member,
        distance,
        certificate: is_member.then(|| sol.beta.clone()),
    })
}

/// Orthogonal projector onto the kernel of `a`: `P = I - A'(AA')^-1 A`.
///
/// `a` must have full row rank; the Gram matrix factorization rejects inputs
/// whose smallest Cholesky pivot falls below `1e-12` times the largest.
pub fn kernel_projection(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    check_finite_mat(a, "projection matrix")?;
    let (rows, cols) = a.shape();
    if rows > cols {
        return Err(Error::RankDeficient(
            "more rows than columns, full row rank is impossible",
        ));
    }
    if rows == 0 {
        return Ok(DMatrix::identity(cols, cols));
    }

    let gram = a * a.transpose();
    let chol = cholesky_with_pivot_ratio(&gram, 1e-12)
        .ok_or(Error::RankDeficient("AA' is not invertible within the conditioning threshold"))?;
    // X = (AA')^-1 A, solved column by column against the Cholesky factor.
    let mut x = a.clone();
    for j in 0..cols {
        let mut col = x.column(j).clone_owned();
        chol_solve_in_place(&chol, &mut col);
        x.set_column(j, &col);
    }
    Ok(DMatrix::identity(cols, cols) - a.transpose() * x)
}

/// Cholesky factorization of a symmetric positive-definite matrix with an
/// explicit pivot-ratio guard: returns the lower factor, or `None` when the
/// smallest pivot drops below `rel_tol` times the largest (rank deficiency).
pub(crate) fn cholesky_with_pivot_ratio(m: &DMatrix<f64>, rel_tol: f64) -> Option<DMatrix<f64>> {
    let n = m.nrows();
    debug_assert_eq!(n, m.ncols());
    let mut l = DMatrix::zeros(n, n);
    let mut min_piv = f64::INFINITY;
    let mut max_piv: f64 = 0.0;
    for j in 0..n {
        let mut d = m[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 {
            return None;
        }
        min_piv = min_piv.min(d);
        max_piv = max_piv.max(d);
        let root = d.sqrt();
        l[(j, j)] = root;
        for i in (j + 1)..n {
            let mut s = m[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / root;
        }
    }
    if min_piv < rel_tol * max_piv {
        return None;
    }
    Some(l)
}

/// Solve `L L' x = b` in place given the lower Cholesky factor.
pub(crate) fn chol_solve_in_place(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let n = l.nrows();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in (i + 1)..n {
            s -= l[(k, i)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// An equality system `E x = d` reduced to orthonormal independent rows.
///
/// Redundant rows are eliminated by modified Gram-Schmidt (two passes for
/// stability); `dropped_residual` records the largest right-hand-side
/// residual among eliminated rows, which is nonzero only when the original
/// system is inconsistent.
#[derive(Debug, Clone)]
pub(crate) struct ReducedSystem {
    pub rows: DMatrix<f64>,
    pub rhs: DVector<f64>,
    pub dropped_residual: f64,
}

pub(crate) fn reduce_equalities(
    e: &DMatrix<f64>,
    d: &DVector<f64>,
    rank_tol: f64,
) -> ReducedSystem {
    let k = e.ncols();
    let mut kept: Vec<(DVector<f64>, f64)> = Vec::new();
    let mut dropped_residual: f64 = 0.0;

    for i in 0..e.nrows() {
        let mut v = e.row(i).transpose();
        let mut rhs = d[i];
        let scale = v.norm().max(d[i].abs()).max(1.0);
        for _ in 0..2 {
            for (q, qr) in &kept {
                let c = q.dot(&v);
                v -= c * q;
                rhs -= c * qr;
            }
        }
        let nv = v.norm();
        if nv > rank_tol * scale {
            v /= nv;
            kept.push((v, rhs / nv));
        } else {
            dropped_residual = dropped_residual.max(rhs.abs());
        }
    }

    let rank = kept.len();
    let mut rows = DMatrix::zeros(rank, k);
    let mut rhs = DVector::zeros(rank);
    for (i, (v, r)) in kept.into_iter().enumerate() {
        rows.row_mut(i).copy_from(&v.transpose());
        rhs[i] = r;
    }
    ReducedSystem {
        rows,
        rhs,
        dropped_residual,
    }
}

/// Orthonormal basis of the null space of a matrix given by its orthonormal
/// rows (as produced by [`reduce_equalities`]): returns a `k x (k - rank)`
/// matrix with orthonormal columns spanning `ker`.
pub(crate) fn null_space_basis(rows: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let rank = rows.nrows();
    let want = k.saturating_sub(rank);
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(want);

    let residual = |j: usize, basis: &[DVector<f64>]| -> DVector<f64> {
        let mut v = DVector::zeros(k);
        v[j] = 1.0;
        for _ in 0..2 {
            for r in 0..rank {
                let q = rows.row(r).transpose();
                let c = q.dot(&v);
                v -= c * q;
            }
            for b in basis {
                let c = b.dot(&v);
                v -= c * b;
            }
        }
        v
    };

    while basis.len() < want {
        // Greedy pick of the coordinate direction with the largest residual,
        // lowest index on ties, so the basis is deterministic.
        let mut best_j = 0;
        let mut best_norm = -1.0;
        for j in 0..k {
            let norm = residual(j, &basis).norm();
            if norm > best_norm + 1e-12 {
                best_norm = norm;
                best_j = j;
            }
        }
        let mut v = residual(best_j, &basis);
        let nv = v.norm();
        debug_assert!(nv > 1e-8, "null-space completion lost rank");
        v /= nv;
        basis.push(v);
    }

    let mut z = DMatrix::zeros(k, want);
    for (j, b) in basis.iter().enumerate() {
        z.set_column(j, b);
    }
    z
}

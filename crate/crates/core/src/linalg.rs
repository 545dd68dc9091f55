//! Small fixed-size linear algebra used by the pulse extractors and plane fitting.
//!
//! Everything here is 3x3: cyclic Jacobi for symmetric eigenproblems,
//! Gaussian elimination for solves, and an eigen-based pseudo-inverse
//! fallback for near-singular Gram matrices.

pub type Mat3 = [[f64; 3]; 3];
pub type Vec3 = [f64; 3];

pub fn matvec3(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (i, row) in m.iter().enumerate() {
        out[i] = row[0] * v[0] + row[1] * v[1] + row[2] * v[2];
    }
    out
}

pub fn dot3(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub fn norm3(v: &Vec3) -> f64 {
    dot3(v, v).sqrt()
}

/// Eigen-decomposition of a symmetric 3x3 matrix by cyclic Jacobi rotations.
///
/// Returns eigenvalues in descending order with matching unit eigenvectors
/// (as rows of the returned array). Signs are fixed so the component of
/// largest magnitude in each vector is positive, which keeps downstream
/// projections deterministic.
pub fn sym_eigen3(m: &Mat3) -> (Vec3, [Vec3; 3]) {
    let mut a = *m;
    // v accumulates the rotations; columns are eigenvectors of the working matrix.
    let mut v: Mat3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

    let norm: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let tol = 1e-15 * norm.max(1e-300);

    for _sweep in 0..64 {
        let off = (a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2]).sqrt();
        if off <= tol {
            break;
        }
        for &(p, q) in &[(0usize, 1usize), (0, 2), (1, 2)] {
            if a[p][q].abs() <= tol * 1e-2 {
                continue;
            }
            let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
            let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
            let c = 1.0 / (t * t + 1.0).sqrt();
            let s = t * c;

            let app = a[p][p];
            let aqq = a[q][q];
            let apq = a[p][q];
            a[p][p] = c * c * app - 2.0 * s * c * apq + s * s * aqq;
            a[q][q] = s * s * app + 2.0 * s * c * apq + c * c * aqq;
            a[p][q] = 0.0;
            a[q][p] = 0.0;
            let r = 3 - p - q; // the remaining index
            let arp = a[r][p];
            let arq = a[r][q];
            a[r][p] = c * arp - s * arq;
            a[p][r] = a[r][p];
            a[r][q] = s * arp + c * arq;
            a[q][r] = a[r][q];

            for row in &mut v {
                let vp = row[p];
                let vq = row[q];
                row[p] = c * vp - s * vq;
                row[q] = s * vp + c * vq;
            }
        }
    }

    let mut pairs: Vec<(f64, Vec3)> = (0..3)
        .map(|j| (a[j][j], [v[0][j], v[1][j], v[2][j]]))
        .collect();
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());

    let mut vals = [0.0; 3];
    let mut vecs = [[0.0; 3]; 3];
    for (i, (val, mut vec)) in pairs.into_iter().enumerate() {
        // sign convention: largest-magnitude component positive
        let lead = (0..3).max_by(|&p, &q| vec[p].abs().partial_cmp(&vec[q].abs()).unwrap());
        if let Some(j) = lead {
            if vec[j] < 0.0 {
                vec = [-vec[0], -vec[1], -vec[2]];
            }
        }
        vals[i] = val;
        vecs[i] = vec;
    }
    (vals, vecs)
}

/// Solve `a * x = b` by Gaussian elimination with partial pivoting.
/// Returns `None` when the matrix is singular to working precision.
pub fn solve3(a: &Mat3, b: &Vec3) -> Option<Vec3> {
    let mut m = [
        [a[0][0], a[0][1], a[0][2], b[0]],
        [a[1][0], a[1][1], a[1][2], b[1]],
        [a[2][0], a[2][1], a[2][2], b[2]],
    ];
    let scale: f64 = a
        .iter()
        .flatten()
        .fold(0.0f64, |acc, x| acc.max(x.abs()))
        .max(1e-300);

    for col in 0..3 {
        let pivot_row =
            (col..3).max_by(|&r, &s| m[r][col].abs().partial_cmp(&m[s][col].abs()).unwrap())?;
        if m[pivot_row][col].abs() < 1e-12 * scale {
            return None;
        }
        m.swap(col, pivot_row);
        let (pivot, rest) = m.split_at_mut(col + 1);
        let pivot = &pivot[col];
        for row in rest.iter_mut().take(2 - col) {
            let f = row[col] / pivot[col];
            for (lhs, rhs) in row[col..4].iter_mut().zip(&pivot[col..4]) {
                *lhs -= f * rhs;
            }
        }
    }

    let mut x = [0.0; 3];
    for col in (0..3).rev() {
        let mut acc = m[col][3];
        for k in (col + 1)..3 {
            acc -= m[col][k] * x[k];
        }
        x[col] = acc / m[col][col];
    }
    Some(x)
}

/// Solve a symmetric system via the eigen pseudo-inverse, dropping
/// eigenvalues below `1e-12 * max |lambda|`. Used as the fallback when
/// direct elimination reports a singular Gram matrix.
pub fn pinv_solve_sym3(a: &Mat3, b: &Vec3) -> Vec3 {
    let (vals, vecs) = sym_eigen3(a);
    let cutoff = 1e-12 * vals[0].abs().max(1e-300);
    let mut x = [0.0; 3];
    for i in 0..3 {
        if vals[i].abs() <= cutoff {
            continue;
        }
        let coef = dot3(&vecs[i], b) / vals[i];
        for k in 0..3 {
            x[k] += coef * vecs[i][k];
        }
    }
    x
}

//! Dense eigen-analysis helpers shared by the model builders and checkers.

use nalgebra::{DMatrix, DVector, SymmetricEigen, SVD};
use num_complex::Complex64;
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;

/// Eigenvalues of a real square matrix.
///
/// The matrix is first split into the strongly connected components of its
/// sparsity graph; eigenvalues of a block-triangular permutation are those
/// of its diagonal blocks. Integrator states and decoupled element blocks
/// therefore get their eigenvalues from tiny subproblems, which keeps exact
/// zeros exact.
pub fn eigenvalues(a: &DMatrix<f64>) -> Vec<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "eigenvalues of a non-square matrix");
    if n == 0 {
        return Vec::new();
    }
    let mut g = DiGraph::<(), ()>::with_capacity(n, n * 4);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if i != j && a[(i, j)] != 0.0 {
                g.add_edge(nodes[i], nodes[j], ());
            }
        }
    }
    let mut out = Vec::with_capacity(n);
    for comp in tarjan_scc(&g) {
        let idx: Vec<usize> = comp.iter().map(|v| v.index()).collect();
        if idx.len() == 1 {
            out.push(Complex64::new(a[(idx[0], idx[0])], 0.0));
            continue;
        }
        let block = a.select_rows(&idx).select_columns(&idx);
        out.extend(block.complex_eigenvalues().iter().copied());
    }
    out.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
    out
}

/// Ascending eigenvalues of a real symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut v: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// Real symmetric embedding `[[Re H, -Im H], [Im H, Re H]]` of a Hermitian matrix.
pub fn real_embedding(h: &DMatrix<Complex64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut m = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = h[(i, j)];
            m[(i, j)] = z.re;
            m[(i + n, j + n)] = z.re;
            m[(i, j + n)] = -z.im;
            m[(i + n, j)] = z.im;
        }
    }
    m
}

/// Ascending eigenvalues of a Hermitian matrix via the real embedding.
/// The embedding doubles every eigenvalue; each is returned once.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let m = real_embedding(h);
    let m = (&m + m.transpose()) * 0.5;
    symmetric_eigenvalues(&m).into_iter().step_by(2).collect()
}

pub fn hermitian_min_eigenvalue(h: &DMatrix<Complex64>) -> f64 {
    hermitian_eigenvalues(h).first().copied().unwrap_or(f64::INFINITY)
}

/// `M + M^H`.
pub fn hermitian_part2(m: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    m + m.adjoint()
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Orthonormal basis (columns) of the orthogonal complement of `e`.
///
/// Uses the Householder reflector mapping the first unit vector onto
/// `e/|e|`; its remaining columns span the complement.
pub fn complement_basis(e: &DVector<f64>) -> DMatrix<f64> {
    let n = e.len();
    let e = e / e.norm();
    let mut w = e.clone();
    w[0] -= 1.0;
    let h = if w.norm() < 1e-14 {
        DMatrix::identity(n, n)
    } else {
        let w = &w / w.norm();
        DMatrix::identity(n, n) - 2.0 * &w * w.transpose()
    };
    h.columns(1, n - 1).into_owned()
}

/// Result of splitting off an eigenvalue cluster.
#[derive(Debug, Clone)]
pub struct Eigenprojection {
    pub projector: DMatrix<Complex64>,
    /// Smallest singular value that is not part of the null space
    /// (large means the null space is clean).
    pub gap: f64,
    /// The `m`-th smallest singular value of `A - λI`; zero up to roundoff
    /// for a semisimple eigenvalue of multiplicity `m`.
    pub null_sigma: f64,
    pub defective: bool,
}

/// Spectral projector onto the eigenspace of `lambda` (algebraic
/// multiplicity `m`) built from left and right null vectors of `A - λI`.
///
/// If the geometric multiplicity is below `m` the eigenvalue is defective
/// and no projector exists.
pub fn eigenprojection(a: &DMatrix<f64>, lambda: Complex64, m: usize) -> Eigenprojection {
    let n = a.nrows();
    let shifted = to_complex(a) - DMatrix::<Complex64>::identity(n, n) * lambda;
    let scale = a.norm().max(1.0);
    let svd = SVD::new(shifted, true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[i].total_cmp(&svd.singular_values[j]));
    let null_sigma = svd.singular_values[order[m - 1]];
    let gap = if m < n { svd.singular_values[order[m]] } else { f64::INFINITY };
    let threshold = f64::EPSILON.sqrt() * scale;

    let right = DMatrix::from_fn(n, m, |r, c| v_t[(order[c], r)].conj());
    let left = DMatrix::from_fn(n, m, |r, c| u[(r, order[c])]);
    // Left and right eigenvectors of a Jordan chain are orthogonal, so a
    // near-singular coupling also flags a defective eigenvalue.
    let coupling = left.adjoint() * &right;
    let coupling_min = coupling.singular_values().min();
    let defective = null_sigma > threshold || coupling_min < f64::EPSILON.sqrt();
    let projector = match coupling.try_inverse() {
        Some(inv) if !defective => &right * inv * left.adjoint(),
        _ => DMatrix::zeros(n, n),
    };
    Eigenprojection { projector, gap, null_sigma, defective }
}

/// Groups eigenvalues that agree within `rel_tol * max(1, |λ|)`.
/// Returns (representative, multiplicity) pairs.
pub fn cluster(values: &[Complex64], rel_tol: f64) -> Vec<(Complex64, usize)> {
    let mut groups: Vec<(Complex64, Vec<Complex64>)> = Vec::new();
    for &v in values {
        match groups.iter_mut().find(|(c, _)| (*c - v).norm() <= rel_tol * c.norm().max(1.0)) {
            Some((_, members)) => members.push(v),
            None => groups.push((v, vec![v])),
        }
    }
    groups
        .into_iter()
        .map(|(_, members)| {
            let mean = members.iter().sum::<Complex64>() / members.len() as f64;
            (mean, members.len())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scc_eigenvalues_match_dense() {
        let a = DMatrix::from_row_slice(
            4,
            4,
            &[-1.0, -2.0, 0.5, 0.0, 2.0, -1.0, 0.0, 0.3, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -3.0],
        );
        let got = eigenvalues(&a);
        let mut dense: Vec<Complex64> = a.complex_eigenvalues().iter().copied().collect();
        dense.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        assert_eq!(got.len(), 4);
        for (g, d) in got.iter().zip(&dense) {
            assert!((g - d).norm() < 1e-12, "{g} vs {d}");
        }
        assert!(got.iter().any(|z| *z == Complex64::new(0.0, 0.0)));
    }

    #[test]
    fn hermitian_embedding_dedups() {
        let h = DMatrix::from_row_slice(
            2,
            2,
            &[Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(0.0, -1.0), Complex64::new(2.0, 0.0)],
        );
        let e = hermitian_eigenvalues(&h);
        assert_eq!(e.len(), 2);
        assert!((e[0] - 1.0).abs() < 1e-12 && (e[1] - 3.0).abs() < 1e-12);
    }

    #[test]
    fn complement_is_orthonormal() {
        let mut e = DVector::zeros(6);
        for i in 0..3 {
            e[i] = 1.0;
        }
        let u = complement_basis(&e);
        assert_eq!(u.shape(), (6, 5));
        assert!((u.transpose() * &u - DMatrix::identity(5, 5)).norm() < 1e-12);
        assert!((u.transpose() * e).norm() < 1e-12);
    }

    #[test]
    fn projector_of_diagonalizable() {
        let a = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0]);
        let p = eigenprojection(&a, Complex64::new(0.0, 0.0), 2);
        assert!(!p.defective);
        let p2 = &p.projector * &p.projector;
        assert!((p2 - &p.projector).norm() < 1e-10);
    }

    #[test]
    fn jordan_block_is_defective() {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(eigenprojection(&a, Complex64::new(0.0, 0.0), 2).defective);
    }

    #[test]
    fn clustering() {
        let z = [Complex64::new(0.0, 1.0), Complex64::new(1e-12, 1.0), Complex64::new(-1.0, 0.0)];
        let c = cluster(&z, 1e-6);
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].1, 2);
    }
}

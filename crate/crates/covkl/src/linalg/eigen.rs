//! Symmetric eigendecomposition.
//!
//! Householder tridiagonalization followed by the implicit-shift QL
//! iteration, the classic EISPACK `tred2`/`tql2` pair. Output is sorted in
//! descending eigenvalue order with a deterministic sign convention (first
//! non-negligible component of each eigenvector is positive), so seeded
//! runs are bit-reproducible across executions of the same binary.

use super::{OrthonormalBasis, Spectrum, SymmetricMatrix};
use crate::error::{Error, Result};

const MAX_QL_ITERATIONS: usize = 50;

/// Eigendecomposes a symmetric matrix into a strictly positive spectrum and
/// an orthonormal basis, `S = V diag(lambda) V'`.
///
/// Eigenvalues come out descending. Indefinite inputs are rejected with a
/// [`Error::NotPositiveDefinite`]; callers that only need a basis from a
/// general symmetric matrix use the raw path internally.
pub fn eigendecompose(s: &SymmetricMatrix) -> Result<(Spectrum, OrthonormalBasis)> {
    let (vals, basis) = sym_eigen_raw(s)?;
    let max_eig = vals.first().copied().unwrap_or(0.0);
    let min_eig = vals.last().copied().unwrap_or(0.0);
    if !(min_eig > 0.0) {
        return Err(Error::NotPositiveDefinite { min_eig, max_eig });
    }
    Ok((Spectrum::new(vals)?, basis))
}

/// Raw symmetric eigensolve: eigenvalues of any sign, sorted descending,
/// sign-fixed eigenvectors.
pub(crate) fn sym_eigen_raw(s: &SymmetricMatrix) -> Result<(Vec<f64>, OrthonormalBasis)> {
    let n = s.dim();
    if n == 1 {
        return Ok((vec![s.get(0, 0)], OrthonormalBasis::identity(1)));
    }

    // v is column-major: component r of eigenvector c at v[c*n + r].
    // During the reduction it holds the working copy of the matrix.
    let mut v = vec![0.0; n * n];
    for c in 0..n {
        for r in 0..n {
            v[c * n + r] = s.get(r, c);
        }
    }
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];

    tred2(n, &mut v, &mut d, &mut e);
    if let Err(iters) = tql2(n, &mut v, &mut d, &mut e) {
        let diag = s.diag();
        let mut offdiag_max: f64 = 0.0;
        for i in 0..n {
            for j in 0..i {
                offdiag_max = offdiag_max.max(s.get(i, j).abs());
            }
        }
        return Err(Error::EigenNonConvergence {
            dim: n,
            iterations: iters,
            diag_min: diag.iter().cloned().fold(f64::MAX, f64::min),
            diag_max: diag.iter().cloned().fold(f64::MIN, f64::max),
            offdiag_max,
        });
    }

    // Descending order; stable on ties so the ordering is deterministic.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[b].partial_cmp(&d[a]).expect("eigenvalues are finite"));

    let mut vals = Vec::with_capacity(n);
    let mut cols = vec![0.0; n * n];
    for (dst, &src) in order.iter().enumerate() {
        vals.push(d[src]);
        let col = &v[src * n..(src + 1) * n];
        let amax = col.iter().fold(0.0_f64, |m, &x| m.max(x.abs()));
        let lead = col.iter().find(|&&x| x.abs() > 1e-12 * amax).copied().unwrap_or(1.0);
        let sign = if lead < 0.0 { -1.0 } else { 1.0 };
        for (o, &x) in cols[dst * n..(dst + 1) * n].iter_mut().zip(col) {
            *o = sign * x;
        }
    }

    Ok((vals, OrthonormalBasis::from_raw_unchecked(n, cols)))
}

/// Householder reduction to tridiagonal form (EISPACK tred2).
/// On exit `d` holds the diagonal, `e` the subdiagonal (e[0] = 0), and `v`
/// the accumulated orthogonal transformation.
fn tred2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    // index helper: element (row r, col c) of the column-major buffer
    macro_rules! at {
        ($r:expr, $c:expr) => {
            v[($c) * n + ($r)]
        };
    }

    for j in 0..n {
        d[j] = at!(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for item in d.iter().take(i) {
            scale += item.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = at!(i - 1, j);
                at!(i, j) = 0.0;
                at!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for item in e.iter_mut().take(i) {
                *item = 0.0;
            }

            for j in 0..i {
                let f = d[j];
                at!(j, i) = f;
                let mut g = e[j] + at!(j, j) * f;
                for k in (j + 1)..i {
                    g += at!(k, j) * d[k];
                    e[k] += at!(k, j) * f;
                }
                e[j] = g;
            }
            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                for k in j..i {
                    at!(k, j) -= f * e[k] + g * d[k];
                }
                d[j] = at!(i - 1, j);
                at!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate transformations.
    for i in 0..(n - 1) {
        at!(n - 1, i) = at!(i, i);
        at!(i, i) = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = at!(k, i + 1) / h;
            }
            for j in 0..=i {
                let mut g = 0.0;
                for k in 0..=i {
                    g += at!(k, i + 1) * at!(k, j);
                }
                for k in 0..=i {
                    at!(k, j) -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            at!(k, i + 1) = 0.0;
        }
    }
    for j in 0..n {
        d[j] = at!(n - 1, j);
        at!(n - 1, j) = 0.0;
    }
    at!(n - 1, n - 1) = 1.0;
    e[0] = 0.0;
}

/// Implicit-shift QL iteration on the tridiagonal form (EISPACK tql2).
/// Returns `Err(iterations)` when an eigenvalue fails to converge.
fn tql2(n: usize, v: &mut [f64], d: &mut [f64], e: &mut [f64]) -> std::result::Result<(), usize> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0_f64;
    let mut tst1 = 0.0_f64;
    let eps = 2.0_f64.powi(-52);

    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > MAX_QL_ITERATIONS {
                    return Err(MAX_QL_ITERATIONS);
                }

                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for item in d.iter_mut().take(n).skip(l + 2) {
                    *item -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0_f64;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0_f64;
                let mut s2 = 0.0_f64;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    // rotate eigenvector columns i and i+1
                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    let col_i = &mut lo[i * n..(i + 1) * n];
                    let col_i1 = &mut hi[..n];
                    for (xi, xi1) in col_i.iter_mut().zip(col_i1.iter_mut()) {
                        let h = *xi1;
                        *xi1 = s * *xi + c * h;
                        *xi = c * *xi - s * h;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    let _ = at!(0, 0); // keep the macro used when n == 1 paths change
    Ok(())
}

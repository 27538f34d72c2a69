//! Restarted GMRES for the Newton corrections.

pub(crate) struct GmresOutcome {
    pub x: Vec<f64>,
    pub relative_residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Solves `op(x) = b` (both sides already preconditioned) from `x = 0`.
pub(crate) fn gmres(
    op: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    restart: usize,
    max_iter: usize,
    rtol: f64,
) -> GmresOutcome {
    let n = b.len();
    let b_norm = norm(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return GmresOutcome {
            x,
            relative_residual: 0.0,
            iterations: 0,
        };
    }
    let mut iterations = 0;
    let mut rel = 1.0;
    while iterations < max_iter {
        let ax = op(&x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(a, c)| a - c).collect();
        let beta = norm(&r);
        rel = beta / b_norm;
        if rel <= rtol {
            break;
        }
        let mut basis: Vec<Vec<f64>> = vec![r.iter().map(|v| v / beta).collect()];
        // Hessenberg columns, Givens rotations, rotated rhs.
        let mut hess: Vec<Vec<f64>> = Vec::new();
        let mut cs: Vec<f64> = Vec::new();
        let mut sn: Vec<f64> = Vec::new();
        let mut rhs = vec![beta];
        let mut k = 0;
        while k < restart && iterations < max_iter {
            let mut w = op(&basis[k]);
            let mut col = vec![0.0; k + 2];
            for (j, v) in basis.iter().enumerate() {
                col[j] = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= col[j] * b);
            }
            // one reorthogonalization pass
            for (j, v) in basis.iter().enumerate() {
                let c = dot(&w, v);
                col[j] += c;
                w.iter_mut().zip(v).for_each(|(a, b)| *a -= c * b);
            }
            let wn = norm(&w);
            col[k + 1] = wn;
            for j in 0..k {
                let t = cs[j] * col[j] + sn[j] * col[j + 1];
                col[j + 1] = -sn[j] * col[j] + cs[j] * col[j + 1];
                col[j] = t;
            }
            let denom = col[k].hypot(col[k + 1]);
            let (c, s) = if denom == 0.0 {
                (1.0, 0.0)
            } else {
                (col[k] / denom, col[k + 1] / denom)
            };
            col[k] = denom;
            col[k + 1] = 0.0;
            cs.push(c);
            sn.push(s);
            rhs.push(-s * rhs[k]);
            rhs[k] *= c;
            hess.push(col);
            iterations += 1;
            k += 1;
            rel = rhs[k].abs() / b_norm;
            if rel <= rtol || wn == 0.0 {
                break;
            }
            basis.push(w.iter().map(|v| v / wn).collect());
        }
        // back substitution on the k×k upper triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = rhs[i];
            for j in i + 1..k {
                s -= hess[j][i] * y[j];
            }
            y[i] = s / hess[i][i];
        }
        for (j, yj) in y.iter().enumerate() {
            x.iter_mut().zip(&basis[j]).for_each(|(a, v)| *a += yj * v);
        }
        if rel <= rtol {
            break;
        }
    }
    GmresOutcome {
        x,
        relative_residual: rel,
        iterations,
    }
}

//! Conformal Killing operators: the trace part `K₀` on 1-jets of vector
//! fields, and a collocation count of polynomial conformal Killing fields.

use crate::error::{Error, Result};
use crate::expr::eval_jet;
use crate::expr::Expr;
use crate::jet::Layout;
use crate::metric::{LocalGeometry, MetricField};
use crate::real::Real;
use nalgebra::DMatrix;

/// Singular-value gap required to call a numerical rank.
pub const GAP_RATIO: f64 = 1e6;

/// `η = (1/n) Tr¹(ξ₁ + γ(ξ₀)) = (1/n)(ξ^k_k + Γ^k_{kj} ξ^j)`.
pub fn killing_k<T: Real>(g: &MetricField, xi0: &[Expr], xi1: &[Vec<Expr>], p: &[T]) -> Result<T> {
    let n = g.dim();
    if xi0.len() != n || xi1.len() != n || xi1.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(format!("vector field data must match dimension {n}")));
    }
    let geo = LocalGeometry::at(g, p, 1)?;
    let mut s = T::zero();
    for k in 0..n {
        s = s + eval_jet(&xi1[k][k], p, 0)?.value();
        for j in 0..n {
            s = s + geo.gamma[k][k][j].value() * eval_jet(&xi0[j], p, 0)?.value();
        }
    }
    Ok(s / T::lit(n as f64))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KillingCount {
    pub dimension: usize,
    /// `σ_r / σ_{r+1}` at the detected rank (infinite for an exact zero).
    pub gap_ratio: f64,
}

/// Dimension of the space of polynomial vector fields of degree `<= degree`
/// solving the trace-free part of `L_ξ ω = 0`, from the rank of the
/// collocation matrix at `points`.
pub fn killing_dimension(g: &MetricField, points: &[Vec<f64>], degree: usize) -> Result<KillingCount> {
    let n = g.dim();
    if degree < 1 || degree > crate::jet::MAX_ORDER {
        return Err(Error::Precondition(format!("ansatz degree {degree} outside 1..={}", crate::jet::MAX_ORDER)));
    }
    let basis = Layout::get(n, degree);
    let m = basis.len();
    let cols = n * m;
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for q in points {
        if q.len() != n {
            return Err(Error::Shape(format!("sample point has {} coordinates, expected {n}", q.len())));
        }
        let geo = LocalGeometry::<f64>::at(g, q, 1)?;
        let gv = geo.g_values();
        let gi = geo.ginv_values();
        // monomial values and gradients at q
        let mono: Vec<(f64, Vec<f64>)> = (0..m)
            .map(|t| {
                let e = basis.multi_index(t);
                let val = (0..n).map(|i| q[i].powi(e[i] as i32)).product();
                let grad = (0..n)
                    .map(|c| {
                        if e[c] == 0 {
                            return 0.0;
                        }
                        (0..n)
                            .map(|i| {
                                if i == c {
                                    e[i] as f64 * q[i].powi(e[i] as i32 - 1)
                                } else {
                                    q[i].powi(e[i] as i32)
                                }
                            })
                            .product()
                    })
                    .collect();
                (val, grad)
            })
            .collect();
        // (L_ξ g)_ab for ξ = x^t e_d, as a function of the column (d, t)
        let lie = |a: usize, b: usize, d: usize, t: usize| {
            let (val, grad) = &mono[t];
            val * geo.g[a][b].partial(&[d]) + gv[d][b] * grad[a] + gv[a][d] * grad[b]
        };
        for &(a, b) in &pairs {
            let mut row = vec![0.0; cols];
            for d in 0..n {
                for t in 0..m {
                    let mut tr = 0.0;
                    for c in 0..n {
                        for e in 0..n {
                            tr += gi[c][e] * lie(c, e, d, t);
                        }
                    }
                    row[d * m + t] = lie(a, b, d, t) - gv[a][b] * tr / n as f64;
                }
            }
            rows.push(row);
        }
    }
    if rows.len() < cols {
        return Err(Error::Precondition(format!("{} equations for {cols} unknowns; add sample points", rows.len())));
    }
    let mat = DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]);
    let mut sv: Vec<f64> = mat.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    let top = sv[0];
    let rank = sv.iter().take_while(|&&s| s > top * 1e-9).count();
    let gap_ratio = if rank == sv.len() || rank == 0 {
        f64::INFINITY
    } else if sv[rank] == 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    if gap_ratio < GAP_RATIO {
        return Err(Error::Consistency(format!("ill-conditioned collocation: singular-value gap ratio {gap_ratio:.3e}")));
    }
    Ok(KillingCount { dimension: cols - rank, gap_ratio })
}

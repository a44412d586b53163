use super::{pairs, par_max, Recorder};
use crate::config::Loaded;
use cgt_core::curvature::{christoffel, ricci_scalar, riemann, schouten, weyl_residual};
use cgt_core::{Expr, MetricField, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn run(cfg: &Loaded, rec: &mut Recorder) -> Result<()> {
    let g = &cfg.metric;
    let pts = &cfg.points;
    let spec = &cfg.raw.curvature;
    let n = g.dim();

    let [bianchi] = par_max(pts, |p| {
        let r = riemann(g, p)?;
        let mut m: f64 = 0.0;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    for d in 0..n {
                        let s = r.get(&[a, b, c, d]) + r.get(&[a, c, d, b]) + r.get(&[a, d, b, c]);
                        m = m.max(s.abs());
                    }
                }
            }
        }
        Ok([m])
    })?;
    rec.upper("first_bianchi", "algebraic Bianchi identity R(X,Y)Z + cyclic = 0", bianchi, 1e-9, pts.len());

    if spec.flat {
        let [v] = par_max(pts, |p| {
            let (ric, rho) = ricci_scalar(g, p)?;
            let mut m = christoffel(g, p)?.max_abs().max(riemann(g, p)?.max_abs()).max(ric.max_abs()).max(rho.abs());
            if n >= 3 {
                m = m.max(schouten(g, p)?.max_abs()).max(weyl_residual(g, p)?.max_abs());
            }
            Ok([m])
        })?;
        rec.upper("flat_vanishing", "flat metric: connection, Riemann, Ricci, Schouten and Weyl vanish", v, 1e-10, pts.len());
    }

    if let Some(rho) = spec.scalar_curvature {
        let [v] = par_max(pts, |p| Ok([(ricci_scalar(g, p)?.1 - rho).abs()]))?;
        rec.upper("scalar_curvature", "scalar curvature of a constant-curvature chart", v, 1e-8, pts.len())
            .detail = Some(json!({ "expected": rho }));
    }

    if spec.weyl {
        let [v] = par_max(pts, |p| Ok([weyl_residual(g, p)?.max_abs()]))?;
        rec.upper("weyl_vanishing", "conformally flat metrics have vanishing Weyl tensor", v, 1e-8, pts.len());
    }

    if let Some(fam) = &spec.random_factors {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.raw.seed.wrapping_add(1));
        let c = fam.coefficient;
        let metrics: Vec<MetricField> = (0..fam.count)
            .map(|_| {
                let phi = Expr::polynomial(n, fam.degree, &vec![0.0; n], &mut || rng.gen_range(-c..c));
                MetricField::conformally_flat(g.signature(), phi)
            })
            .collect();
        let items = pairs(metrics.len(), pts.len());
        let [v] = par_max(&items, |&(m, k)| Ok([weyl_residual(&metrics[m], &pts[k])?.max_abs()]))?;
        rec.upper("weyl_random_conformal_factors", "Weyl tensor of e^{2φ}δ vanishes for every factor φ", v, 1e-8, items.len())
            .detail = Some(json!({ "factors": fam.count, "degree": fam.degree }));
    }
    Ok(())
}

use super::{pairs, par_max, Recorder};
use crate::config::Loaded;
use cgt_core::conformal::*;
use cgt_core::killing::killing_dimension;
use cgt_core::{Expr, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

pub fn run(cfg: &Loaded, rec: &mut Recorder) -> Result<()> {
    let g = &cfg.metric;
    let pts = &cfg.points;
    let spec = &cfg.raw.conformal;
    let n = g.dim();

    let mut alphas = cfg.alphas.clone();
    if let Some(fam) = &spec.random_alphas {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.raw.seed.wrapping_add(2));
        let c = fam.coefficient;
        for _ in 0..fam.count {
            alphas.push(Expr::polynomial(n, fam.degree, &vec![0.0; n], &mut || rng.gen_range(-c..c)));
        }
    }
    if !alphas.is_empty() {
        let data: Vec<ConformalData> = alphas.iter().map(|a| ConformalData::new(g.clone(), a.clone(), cfg.raw.c0)).collect();
        let items = pairs(data.len(), pts.len());
        let worst = par_max(&items, |&(a, k)| {
            let (c, p) = (&data[a], &pts[k]);
            let conn = transformed_connection(c, p)?.max_diff(&direct_connection(c, p)?);
            let riem = transformed_riemann(c, p)?.max_diff(&direct_riemann(c, p)?);
            let trace = trace_identity_residual(c, p)?.max_abs();
            let (sch, forms) = if n >= 3 {
                let s = transformed_schouten(c, p)?;
                (s.max_diff(&direct_schouten(c, p)?), s.max_diff(&transformed_schouten_hessian_form(c, p)?))
            } else {
                (0.0, 0.0)
            };
            Ok([conn, riem, sch, forms, trace])
        })?;
        let m = items.len();
        rec.upper("connection_law", "Levi-Civita connection of e^{2α}ω versus direct computation", worst[0], 1e-7, m);
        rec.upper("riemann_law", "Riemann tensor of e^{2α}ω versus direct computation", worst[1], 1e-7, m);
        if n >= 3 {
            rec.upper("schouten_law", "Schouten tensor of e^{2α}ω versus direct computation", worst[2], 1e-7, m);
            rec.upper("schouten_forms_agree", "symmetrized and Hessian forms of the Schouten law", worst[3], 1e-10, m);
        }
        rec.upper("trace_identity", "trace of the connection change equals n dα", worst[4], 1e-7, m);
    }

    if !cfg.conformal_maps.is_empty() {
        let maps = &cfg.conformal_maps;
        let items = pairs(maps.len(), pts.len());
        let [a, b] = par_max(&items, |&(f, k)| {
            let (a, b) = lie_form_residuals(g, &maps[f], &pts[k])?;
            Ok([a, b])
        })?;
        let names: Vec<&str> = maps.iter().map(|m| m.name.as_str()).collect();
        rec.upper("lie_form_metric", "pullback of the unimodular metric density", a, 1e-7, items.len())
            .detail = Some(json!({ "maps": names }));
        rec.upper("lie_form_connection", "pullback of the unimodular connection", b, 1e-7, items.len());
    }

    if let Some(k) = &spec.killing {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.raw.seed.wrapping_add(3));
        let h = cfg.raw.points.half_width;
        let colloc: Vec<Vec<f64>> = (0..k.points).map(|_| (0..n).map(|_| rng.gen_range(-h..h)).collect()).collect();
        let reference = "conformal Killing equation: solution-space dimension from collocation rank";
        match killing_dimension(g, &colloc, k.degree) {
            Ok(count) => {
                let detail = json!({ "dimension": count.dimension, "expected": k.expected, "gap_ratio": count.gap_ratio });
                let off = (count.dimension as f64 - k.expected as f64).abs();
                rec.upper("conformal_killing_dimension", reference, off, 0.0, colloc.len()).detail = Some(detail);
                rec.lower("conformal_killing_gap", "singular-value gap at the detected rank", count.gap_ratio, 1e6, colloc.len());
            }
            Err(e) => {
                rec.upper("conformal_killing_dimension", reference, f64::NAN, 0.0, colloc.len()).detail =
                    Some(json!({ "error": e.to_string() }));
            }
        }
    }
    Ok(())
}

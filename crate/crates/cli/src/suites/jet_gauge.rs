use super::{par_max, Recorder};
use crate::config::{Loaded, MetricSpec};
use cgt_core::jet_gauge::*;
use cgt_core::{Expr, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

fn poly(rng: &mut ChaCha8Rng, n: usize, degree: usize, s: f64) -> Expr {
    Expr::polynomial(n, degree, &vec![0.0; n], &mut || rng.gen_range(-s..s))
}

/// Section with independent, non-holonomic 1- and 2-jet slots of size `s`.
fn random_section(rng: &mut ChaCha8Rng, n: usize, s: f64) -> Result<DiffeoSection> {
    let f = (0..n).map(|i| Expr::x(i) + poly(rng, n, 3, s)).collect();
    let f1 = (0..n)
        .map(|a| (0..n).map(|b| Expr::Num(if a == b { 1.0 } else { 0.0 }) + poly(rng, n, 2, s)).collect())
        .collect();
    let f2 = (0..n).map(|_| (0..n).map(|_| (0..n).map(|_| poly(rng, n, 2, s)).collect()).collect()).collect();
    DiffeoSection::new(f, f1, f2)
}

pub fn run(cfg: &Loaded, rec: &mut Recorder) -> Result<()> {
    let g = &cfg.metric;
    let pts = &cfg.points;
    let spec = &cfg.raw.jet_gauge;
    let c0 = cfg.raw.c0;
    let n = g.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.raw.seed.wrapping_add(4));

    if !cfg.holonomic_maps.is_empty() {
        let secs: Vec<DiffeoSection> = cfg.holonomic_maps.iter().map(DiffeoSection::holonomic).collect();
        let items = super::pairs(secs.len(), pts.len());
        let w = par_max(&items, |&(s, k)| {
            let (s, p) = (&secs[s], &pts[k]);
            let c = spencer_comparison(s, p)?;
            let spencer = [&c.chi0, &c.tau0, &c.chi1, &c.tau1, &c.tau2].iter().fold(c.residual, |m, t| m.max(t.max_abs()));
            let pot = potential_a(s, g, p)?.value.max_abs().max(potential_b(s, g, c0, p)?.value.max_abs());
            let fs = field_strengths(s, g, c0, p)?;
            Ok([spencer, pot, fs.g.max_abs().max(fs.h.max_abs())])
        })?;
        let m = items.len();
        rec.upper("holonomic_spencer_vanishing", "holonomic sections: comparison tensors χ_q, τ_q vanish", w[0], 1e-9, m);
        rec.upper("holonomic_potentials_vanish", "holonomic conformal sections carry no potentials", w[1], 1e-9, m);
        rec.upper("holonomic_field_equations", "field-strength identities (Ĝ, Ĥ) on holonomic conformal sections", w[2], 1e-7, m);
    }

    if spec.random_sections > 0 && !pts.is_empty() {
        let secs = (0..spec.random_sections)
            .map(|_| random_section(&mut rng, n, spec.section_scale))
            .collect::<Result<Vec<_>>>()?;
        let idx: Vec<usize> = (0..secs.len()).collect();
        let w = par_max(&idx, |&s| {
            let p = &pts[s % pts.len()];
            let a = potential_a(&secs[s], g, p)?;
            let b = potential_b(&secs[s], g, c0, p)?;
            let fs = field_strengths(&secs[s], g, c0, p)?;
            Ok([a.residual, b.residual, fs.g.max_abs()])
        })?;
        let m = secs.len();
        rec.upper("potential_a_dual_forms", "electromagnetic potential: trace form versus closed form", w[0], 1e-7, m);
        rec.upper("potential_b_dual_forms", "gravitational potential: trace form versus closed form", w[1], 1e-7, m);
        rec.upper("electromagnetic_identity", "F̂ expressed through 𝒜̂ and τ (Ĝ = 0) on arbitrary sections", w[2], 1e-9, m);
    }

    if spec.affine_kernel {
        if matches!(cfg.raw.metric, MetricSpec::Flat) && c0 == 0.0 {
            let a: Vec<f64> = (0..=n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let alpha = (0..n).fold(Expr::Num(a[n]), |s, i| s + Expr::Num(a[i]) * Expr::x(i));
            let jet = Jet1Field::new(alpha, a[..n].iter().map(|&v| Expr::Num(v)).collect());
            let [v] = par_max(pts, |p| {
                let (ca, cb) = spencer_d1(&jet, g, c0, p)?;
                Ok([ca.max_abs().max(cb.max_abs())])
            })?;
            rec.upper("linearized_kernel_affine", "affine (α, dα) lies in the kernel of the linearized operator", v, 1e-10, pts.len());
        } else {
            rec.note("linearized_kernel_affine skipped: affine data is a kernel element only on flat space with c0 = 0");
        }
    }

    if let Some(wf) = &spec.weak_field {
        let m: Vec<Vec<Expr>> = (0..n).map(|_| (0..n).map(|_| poly(&mut rng, n, 2, 1.0)).collect()).collect();
        let h: Vec<Vec<Vec<Expr>>> =
            (0..n).map(|_| (0..n).map(|_| (0..n).map(|_| poly(&mut rng, n, 2, 1.0)).collect()).collect()).collect();
        let fam = WeakFieldFamily::dilation_special_conformal(g.signature(), &wf.b, m, h);
        let probe: Vec<&Vec<f64>> = pts.iter().take(wf.points).collect();
        let mut ratios = Vec::new();
        let mut off: f64 = 0.0;
        for p in &probe {
            let r = wf.eps.iter().map(|&e| weak_field_check(&fam, g, c0, p.as_slice(), e)).collect::<Result<Vec<_>>>()?;
            for w in r.windows(2) {
                for q in [w[0].0 / w[1].0, w[0].1 / w[1].1] {
                    off = super::worst(off, (q - 4.0).abs());
                    ratios.push(q);
                }
            }
        }
        rec.upper("weak_field_quadratic", "weak-field limit: |F̂ − d𝒜̂| and |dF̂| are O(ε²) (Richardson ratio 4)", off, 0.5, probe.len())
            .detail = Some(json!({ "eps": wf.eps, "ratios": ratios }));
    }
    Ok(())
}

//! One-shot evaluation of a named quantity at a point.

use crate::config::Loaded;
use crate::CliError;
use cgt_core::algebra::{generators, janet_d1};
use cgt_core::anyon::{effective_faraday, monopole_density};
use cgt_core::conformal::{rescale_metric, ConformalData};
use cgt_core::curvature::{christoffel, ricci_scalar, riemann, schouten, weyl_residual};
use cgt_core::jet_gauge::{field_strengths, gauge_metric_nu, potential_a, potential_b, DiffeoSection};
use cgt_core::PointTensor;

pub const QUANTITIES: [&str; 18] = [
    "metric",
    "christoffel",
    "riemann",
    "ricci",
    "ricci_scalar",
    "schouten",
    "weyl",
    "rescaled_metric",
    "potential_A",
    "potential_B",
    "field_strength_F",
    "field_strength_G",
    "field_strength_H",
    "gauge_metric",
    "janet_K",
    "B_eff",
    "monopole_density",
    "w",
];

pub type Labelled = Vec<(String, f64)>;

fn label(name: &str, idx: &[usize]) -> String {
    let ix: Vec<String> = idx.iter().map(|i| i.to_string()).collect();
    format!("{name}[{}]", ix.join(","))
}

fn tensor(name: &str, t: &PointTensor<f64>) -> Labelled {
    let n = t.dim();
    let (up, down) = t.valence();
    let rank = up + down;
    let total = n.pow(rank as u32);
    (0..total)
        .map(|mut k| {
            let mut idx = vec![0; rank];
            for slot in idx.iter_mut().rev() {
                *slot = k % n;
                k /= n;
            }
            (label(name, &idx), t.get(&idx))
        })
        .collect()
}

fn vector(name: &str, v: &[f64]) -> Labelled {
    v.iter().enumerate().map(|(i, x)| (label(name, &[i]), *x)).collect()
}

fn point3(at: &[f64]) -> Result<[f64; 3], CliError> {
    at.try_into().map_err(|_| CliError::Usage(format!("anyon quantities take 3 coordinates, got {}", at.len())))
}

pub fn compute(cfg: &Loaded, what: &str, at: &[f64]) -> Result<Labelled, CliError> {
    let g = &cfg.metric;
    let n = g.dim();
    let anyon_quantity = matches!(what, "B_eff" | "monopole_density" | "w");
    if !anyon_quantity && at.len() != n {
        return Err(CliError::Usage(format!("{what} takes {n} coordinates, got {}", at.len())));
    }
    let section = || cfg.holonomic_maps.first().map_or_else(|| DiffeoSection::identity(n), DiffeoSection::holonomic);
    let c0 = cfg.raw.c0;
    Ok(match what {
        "metric" => tensor(what, &PointTensor::from_matrix(&g.values(at)?, 0, 2)),
        "christoffel" => tensor(what, &christoffel(g, at)?),
        "riemann" => tensor(what, &riemann(g, at)?),
        "ricci" => tensor(what, &ricci_scalar(g, at)?.0),
        "ricci_scalar" => vec![(what.to_string(), ricci_scalar(g, at)?.1)],
        "schouten" => tensor(what, &schouten(g, at)?),
        "weyl" => tensor(what, &weyl_residual(g, at)?),
        "rescaled_metric" => {
            let alpha = cfg.alphas.first().ok_or_else(|| CliError::Usage("rescaled_metric needs conformal.alphas".into()))?;
            tensor(what, &rescale_metric(&ConformalData::new(g.clone(), alpha.clone(), c0), at)?)
        }
        "potential_A" => tensor(what, &potential_a(&section(), g, at)?.value),
        "potential_B" => tensor(what, &potential_b(&section(), g, c0, at)?.value),
        "field_strength_F" => tensor(what, &field_strengths(&section(), g, c0, at)?.f),
        "field_strength_G" => tensor(what, &field_strengths(&section(), g, c0, at)?.g),
        "field_strength_H" => tensor(what, &field_strengths(&section(), g, c0, at)?.h),
        "gauge_metric" => tensor(what, &gauge_metric_nu(&section(), g, at)?),
        "janet_K" => {
            let l = cfg.lagrangians.first().ok_or_else(|| CliError::Usage("janet_K needs algebra.lagrangians".into()))?;
            let gens = generators(n, g.signature())?;
            let k = janet_d1(l, &gens, &cfg.field_config, at)?;
            gens.iter().zip(k).map(|(gen, v)| (format!("{what}[{}]", gen.label), v)).collect()
        }
        "B_eff" | "monopole_density" | "w" => {
            let a = cfg.anyon.as_ref().ok_or_else(|| CliError::Usage(format!("{what} needs an anyon block")))?;
            let r = point3(at)?;
            let u = a.initial.u;
            match what {
                "B_eff" => vector(what, &effective_faraday(&a.field, &u, &r)?.0),
                "w" => vector(what, &a.field.w(&r)?),
                _ => vec![(what.to_string(), monopole_density(&a.field, &u, &r)?)],
            }
        }
        _ => {
            return Err(CliError::Usage(format!("unknown quantity '{what}'; known: {}", QUANTITIES.join(", "))));
        }
    })
}

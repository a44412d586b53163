use super::{pairs, par_max, Recorder};
use crate::config::Loaded;
use cgt_core::algebra::*;
use cgt_core::poly::q_to_f64;
use cgt_core::{parse, Expr, MetricField, Result};
use num_traits::Signed;
use serde_json::json;

pub fn run(cfg: &Loaded, rec: &mut Recorder) -> Result<()> {
    if !cfg.raw.algebra.enabled {
        rec.note("algebra checks disabled in this config");
        return Ok(());
    }
    let n = cfg.raw.dimension;
    let sig = &cfg.raw.signature;
    let gens = generators(n, sig)?;
    let sc = structure_constants(&gens)?;
    let d = gens.len();

    let failing = gens.iter().filter(|g| !g.is_conformal_killing(sig)).count();
    rec.upper("generator_killing_exact", "generators solve the conformal Killing equation (exact rational)", failing as f64, 0.0, d)
        .detail = Some(json!({ "generators": gens.iter().map(|g| g.label.clone()).collect::<Vec<_>>() }));
    rec.upper("bracket_antisymmetry", "structure constants antisymmetric (exact)", if sc.is_antisymmetric() { 0.0 } else { 1.0 }, 0.0, d * d);
    rec.upper("jacobi_exact", "Jacobi identity of the structure constants (exact)", q_to_f64(&sc.jacobi_residual().abs()), 0.0, d * d * d);

    let c = c_constraint(&sc);
    let basis: Vec<Vec<String>> = c.basis.iter().map(|v| v.iter().map(|x| x.to_string()).collect()).collect();
    let detail = json!({ "dimension": c.dimension, "basis": basis });
    let reference = "constants c with c^{μν}_λ c^λ = 0 for all μ, ν (exact rank)";
    match cfg.raw.algebra.expected_c_dimension {
        Some(want) => {
            let off = (c.dimension as f64 - want as f64).abs();
            rec.upper("c_constraint_dimension", reference, off, 0.0, d).detail = Some(detail);
        }
        None => rec.report("c_constraint_dimension", reference, c.dimension as f64, d).detail = Some(detail),
    }
    rec.note(format!("c-constraint solution space has dimension {} for the conformal algebra in n = {n}", c.dimension));

    if !cfg.lagrangians.is_empty() {
        let ks: Vec<Vec<Expr>> = cfg.lagrangians.iter().map(|l| janet_d1_exprs(l, &gens)).collect();
        let items = pairs(ks.len(), cfg.points.len());
        let [v] = par_max(&items, |&(l, k)| {
            let rows = janet_d2(&ks[l], &gens, &sc, &cfg.field_config, &cfg.points[k])?;
            Ok([rows.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()))])
        })?;
        rec.upper("janet_complex", "second Janet operator annihilates the first: D̄₂∘D̄₁ = 0", v, 1e-8, items.len())
            .detail = Some(json!({ "densities": cfg.raw.algebra.lagrangians }));
    }

    rec.upper("div2_oracle", "div₂ of u⊗v equals v div u − u div v + [u, v]", div2_oracle()?, 1e-13, 3);
    rec.upper("zeta_oracle", "ζ on e^{2x1}δ against hand Christoffel symbols", zeta_oracle()?, 1e-13, 3);

    if let Some(v) = &cfg.variational {
        let test = TestFields { alpha: v.test_alpha.clone(), beta: v.test_beta.clone() };
        let sums = v
            .cells
            .iter()
            .map(|&m| adjoint_balance(&v.lagrangian, &v.fields, &v.metric, v.c0, &test, m))
            .collect::<Result<Vec<f64>>>()?;
        let ratios: Vec<f64> = sums.windows(2).map(|w| w[0] / w[1]).collect();
        let off = ratios.iter().fold(0.0f64, |m, r| super::worst(m, (r - 4.0).abs() / 4.0));
        rec.upper("ibp_balance_order", "integration-by-parts balance of (Ŝ, Q̂) converges at O(h²)", off, 0.2, sums.len())
            .detail = Some(json!({ "cells": v.cells, "sums": sums, "ratios": ratios }));
    }
    Ok(())
}

/// Bracket formula for `div₂(u⊗v)` with polynomial `u, v`, evaluated by hand.
fn div2_oracle() -> Result<f64> {
    let ue = [parse("x1*x2 + 1", 2)?, parse("x2^2 - x1", 2)?];
    let ve = [parse("x1 - 3*x2", 2)?, parse("x1^2*x2", 2)?];
    let nf: Vec<Vec<Expr>> = (0..2).map(|i| (0..2).map(|j| ue[i].clone() * ve[j].clone()).collect()).collect();
    let mut worst: f64 = 0.0;
    for p in [[0.3, -0.7], [0.0, 0.5], [-1.2, 0.25]] {
        let (x, y) = (p[0], p[1]);
        let u = [x * y + 1.0, y * y - x];
        let v = [x - 3.0 * y, x * x * y];
        let du = [[y, x], [-1.0, 2.0 * y]];
        let dv = [[1.0, -3.0], [2.0 * x * y, x * x]];
        let (div_u, div_v) = (du[0][0] + du[1][1], dv[0][0] + dv[1][1]);
        let got = div2(&nf, &p)?;
        for j in 0..2 {
            let br: f64 = (0..2).map(|k| u[k] * dv[j][k] - v[k] * du[j][k]).sum();
            worst = worst.max((got[j] - (v[j] * div_u - u[j] * div_v + br)).abs());
        }
    }
    Ok(worst)
}

/// On `e^{2x1}δ`: `Γ¹₁₁ = 1`, `Γ¹₂₂ = −1`, `Γ²₁₂ = 1`, so a unit `B_ij` slot
/// picks out one of these.
fn zeta_oracle() -> Result<f64> {
    let g = MetricField::conformally_flat(&[1, 1], parse("x1", 2)?);
    let p = [0.2, -0.4];
    let mut worst: f64 = 0.0;
    for (slot, want) in [("B11", [1.0, 0.0]), ("B22", [-1.0, 0.0]), ("B12", [0.0, 1.0])] {
        let d = variational_duals(&LagrangianDensity::parse(slot, 2)?, &FieldConfig::new(), &g, 0.0, &p)?;
        for k in 0..2 {
            worst = worst.max((d.zeta[k] - want[k]).abs());
        }
    }
    Ok(worst)
}

//! Run configuration: JSON schema, expression resolution and point sampling.

use crate::CliError;
use cgt_core::algebra::{FieldConfig, LagrangianDensity};
use cgt_core::anyon::{four_velocity, CarrierState, PolarizationField, PolarizationMode};
use cgt_core::diffeo::DiffeoSpec;
use cgt_core::expr::{parse, Expr, Sym};
use cgt_core::MetricField;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::path::Path;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    pub dimension: usize,
    pub signature: Vec<i8>,
    pub metric: MetricSpec,
    /// Sectional curvature of the substrate.
    #[serde(default)]
    pub c0: f64,
    pub seed: u64,
    #[serde(default)]
    pub points: PointSpec,
    /// Overrides keyed `suite.identity`.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub curvature: CurvatureSpec,
    #[serde(default)]
    pub conformal: ConformalSpec,
    #[serde(default)]
    pub jet_gauge: JetGaugeSpec,
    #[serde(default)]
    pub algebra: AlgebraSpec,
    #[serde(default)]
    pub anyon: Option<AnyonSpec>,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MetricSpec {
    Flat,
    RoundSphere { radius: f64 },
    HyperbolicBall,
    SchwarzschildPatch,
    ConformallyFlat { factor: String },
    /// Full rows of `ω_ij`; must be symmetric.
    Components { rows: Vec<Vec<String>> },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointSpec {
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_half_width")]
    pub half_width: f64,
    #[serde(default)]
    pub explicit: Option<Vec<Vec<f64>>>,
}

fn default_count() -> usize {
    20
}

fn default_half_width() -> f64 {
    0.4
}

impl Default for PointSpec {
    fn default() -> Self {
        PointSpec { count: default_count(), half_width: default_half_width(), explicit: None }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactorFamily {
    pub count: usize,
    pub degree: usize,
    #[serde(default = "default_coeff")]
    pub coefficient: f64,
}

fn default_coeff() -> f64 {
    0.5
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurvatureSpec {
    /// Expect every curvature quantity to vanish.
    #[serde(default)]
    pub flat: bool,
    #[serde(default)]
    pub scalar_curvature: Option<f64>,
    /// Check Weyl vanishing on the configured metric.
    #[serde(default)]
    pub weyl: bool,
    /// Weyl vanishing on `e^{2φ}δ` for random polynomial `φ`.
    #[serde(default)]
    pub random_factors: Option<FactorFamily>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConformalSpec {
    #[serde(default)]
    pub alphas: Vec<String>,
    #[serde(default)]
    pub random_alphas: Option<FactorFamily>,
    /// Maps conformal for the configured metric.
    #[serde(default)]
    pub maps: Vec<MapSpec>,
    #[serde(default)]
    pub killing: Option<KillingSpec>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct KillingSpec {
    #[serde(default = "default_degree")]
    pub degree: usize,
    #[serde(default = "default_colloc")]
    pub points: usize,
    pub expected: usize,
}

fn default_degree() -> usize {
    2
}

fn default_colloc() -> usize {
    40
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MapSpec {
    Translation { b: Vec<f64> },
    Dilation { k: f64 },
    Rotation { i: usize, j: usize, theta: f64 },
    SpecialConformal { b: Vec<f64> },
    /// `maps[0] ∘ maps[1] ∘ …`
    Composite { maps: Vec<MapSpec> },
    Custom { name: String, components: Vec<String> },
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JetGaugeSpec {
    /// Holonomic sections of these maps; the maps must be conformal for the metric.
    #[serde(default)]
    pub holonomic_maps: Vec<MapSpec>,
    #[serde(default)]
    pub random_sections: usize,
    #[serde(default = "default_section_scale")]
    pub section_scale: f64,
    #[serde(default)]
    pub weak_field: Option<WeakFieldSpec>,
    /// Check that affine `(α, dα)` lies in the kernel of the linearized operator.
    #[serde(default)]
    pub affine_kernel: bool,
}

fn default_section_scale() -> f64 {
    0.1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeakFieldSpec {
    pub b: Vec<f64>,
    pub eps: Vec<f64>,
    #[serde(default = "default_probe_points")]
    pub points: usize,
}

fn default_probe_points() -> usize {
    3
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSpec {
    #[serde(default)]
    pub enabled: bool,
    #[serde(default)]
    pub lagrangians: Vec<String>,
    /// Slot assignments (`alpha`, `beta1`, `A2`, `B13`, ...); unassigned slots
    /// get seeded random quadratics.
    #[serde(default)]
    pub fields: BTreeMap<String, String>,
    #[serde(default)]
    pub expected_c_dimension: Option<usize>,
    #[serde(default)]
    pub variational: Option<VariationalSpec>,
}

/// Two-dimensional integration-by-parts problem on `e^{2φ}δ` over `[-1, 1]²`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VariationalSpec {
    pub factor: String,
    pub lagrangian: String,
    pub fields: BTreeMap<String, String>,
    pub test_alpha: String,
    pub test_beta: Vec<String>,
    #[serde(default)]
    pub c0: f64,
    pub cells: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnyonSpec {
    pub field: FieldSpec,
    pub initial: InitialSpec,
    pub t_end: f64,
    pub dt: f64,
    #[serde(default = "default_long_steps")]
    pub long_run_steps: usize,
    #[serde(default = "default_richardson")]
    pub richardson_dt: Vec<f64>,
    #[serde(default = "default_richardson_t")]
    pub richardson_t_end: f64,
}

fn default_long_steps() -> usize {
    10_000
}

fn default_richardson() -> Vec<f64> {
    vec![0.4, 0.2, 0.1]
}

fn default_richardson_t() -> f64 {
    4.0
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FieldSpec {
    Showcase,
    Explicit {
        /// `P^{01}, P^{02}, P^{03}, P^{12}, P^{13}, P^{23}` in `x1..x3`.
        p: [String; 6],
        v: [f64; 3],
        #[serde(default)]
        dual: bool,
        m: f64,
        e: f64,
    },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSpec {
    /// Spatial velocity; `u⁰` follows from `ω(u,u) = −1`.
    pub u: [f64; 3],
    pub r: [f64; 3],
}

/// Validated configuration with every expression parsed.
pub struct Loaded {
    pub raw: RunConfig,
    pub sha256: String,
    pub metric: MetricField,
    pub points: Vec<Vec<f64>>,
    pub alphas: Vec<Expr>,
    pub conformal_maps: Vec<DiffeoSpec>,
    pub holonomic_maps: Vec<DiffeoSpec>,
    pub lagrangians: Vec<LagrangianDensity>,
    pub field_config: FieldConfig,
    pub variational: Option<Variational>,
    pub anyon: Option<Anyon>,
}

pub struct Variational {
    pub metric: MetricField,
    pub lagrangian: LagrangianDensity,
    pub fields: FieldConfig,
    pub test_alpha: Expr,
    pub test_beta: Vec<Expr>,
    pub c0: f64,
    pub cells: Vec<usize>,
}

pub struct Anyon {
    pub field: PolarizationField,
    pub initial: CarrierState<f64>,
    pub t_end: f64,
    pub dt: f64,
    pub long_run_steps: usize,
    pub richardson_dt: Vec<f64>,
    pub richardson_t_end: f64,
}

/// Expression parsing with errors located in the config text.
struct Source<'a> {
    name: String,
    text: &'a str,
}

impl Source<'_> {
    fn expr(&self, field: &str, s: &str, dim: usize) -> Result<Expr, CliError> {
        parse(s, dim).map_err(|e| {
            let at = match self.text.find(&format!("\"{s}\"")) {
                Some(off) => {
                    let before = &self.text[..off];
                    let line = before.matches('\n').count() + 1;
                    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 2 + e.pos;
                    format!("{}:{line}:{col}", self.name)
                }
                None => self.name.clone(),
            };
            CliError::Config(format!("{at}: {field}: {e}"))
        })
    }

    fn fields(&self, field: &str, pairs: &BTreeMap<String, String>, dim: usize) -> Result<FieldConfig, CliError> {
        let mut cfg = FieldConfig::new();
        for (slot, text) in pairs {
            let sym = match parse(slot, dim) {
                Ok(Expr::Sym(s)) if s.is_slot() => s,
                _ => return Err(CliError::Config(format!("{}: {field}: '{slot}' is not a field slot", self.name))),
            };
            let e = self.expr(&format!("{field}.{slot}"), text, dim)?;
            cfg.set(sym, e).map_err(|e| CliError::Config(format!("{}: {field}.{slot}: {e}", self.name)))?;
        }
        Ok(cfg)
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Loaded, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), source: e })?;
        Self::from_text(&text, &path.display().to_string())
    }

    pub fn from_text(text: &str, name: &str) -> Result<Loaded, CliError> {
        let raw: RunConfig = serde_json::from_str(text)
            .map_err(|e| bad(format!("{name}: {e}")))?;
        let src = Source { name: name.to_string(), text };
        let sha256 = Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect();
        raw.resolve(&src, sha256)
    }

    fn resolve(self, src: &Source, sha256: String) -> Result<Loaded, CliError> {
        let n = self.dimension;
        if self.schema_version != SCHEMA_VERSION {
            return Err(bad(format!("unsupported schema_version {} (expected {SCHEMA_VERSION})", self.schema_version)));
        }
        if n < 2 || self.signature.len() != n || self.signature.iter().any(|s| s.abs() != 1) {
            return Err(bad(format!("signature must list {n} entries of ±1")));
        }
        let metric = self.metric_field(src)?;
        let points = self.sample_points()?;
        let alphas = self.conformal.alphas.iter().map(|a| src.expr("conformal.alphas", a, n)).collect::<Result<_, _>>()?;
        let maps = |field: &str, specs: &[MapSpec]| -> Result<Vec<DiffeoSpec>, CliError> {
            specs.iter().map(|m| self.map(src, field, m)).collect()
        };
        let conformal_maps = maps("conformal.maps", &self.conformal.maps)?;
        let holonomic_maps = maps("jet_gauge.holonomic_maps", &self.jet_gauge.holonomic_maps)?;
        if let Some(w) = &self.jet_gauge.weak_field {
            if w.b.len() != n || w.eps.len() < 2 {
                return Err(bad("jet_gauge.weak_field needs b of length n and at least two eps values"));
            }
        }
        let lagrangians = self
            .algebra
            .lagrangians
            .iter()
            .map(|t| {
                let e = src.expr("algebra.lagrangians", t, n)?;
                LagrangianDensity::new(e, n).map_err(|e| bad(format!("{}: algebra.lagrangians: {e}", src.name)))
            })
            .collect::<Result<_, _>>()?;
        let field_config = self.full_fields(src)?;
        let variational = self.algebra.variational.as_ref().map(|v| variational(src, v)).transpose()?;
        let anyon = self.anyon.as_ref().map(|a| anyon(src, a)).transpose()?;
        Ok(Loaded {
            raw: self,
            sha256,
            metric,
            points,
            alphas,
            conformal_maps,
            holonomic_maps,
            lagrangians,
            field_config,
            variational,
            anyon,
        })
    }

    fn metric_field(&self, src: &Source) -> Result<MetricField, CliError> {
        let n = self.dimension;
        let sig = &self.signature;
        let riemannian = || {
            if sig.iter().any(|&s| s != 1) {
                Err(bad("this metric kind needs a Riemannian signature"))
            } else {
                Ok(())
            }
        };
        Ok(match &self.metric {
            MetricSpec::Flat => MetricField::flat(sig),
            MetricSpec::RoundSphere { radius } => {
                riemannian()?;
                MetricField::round_sphere(n, *radius)
            }
            MetricSpec::HyperbolicBall => {
                riemannian()?;
                MetricField::hyperbolic_ball(n)
            }
            MetricSpec::SchwarzschildPatch => {
                if n != 4 || sig != &[-1, 1, 1, 1] {
                    return Err(bad("schwarzschild_patch needs dimension 4 and signature [-1, 1, 1, 1]"));
                }
                MetricField::schwarzschild_patch()
            }
            MetricSpec::ConformallyFlat { factor } => MetricField::conformally_flat(sig, src.expr("metric.factor", factor, n)?),
            MetricSpec::Components { rows } => {
                if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                    return Err(bad(format!("metric.rows must be {n}x{n}")));
                }
                let exprs = rows
                    .iter()
                    .map(|r| r.iter().map(|t| src.expr("metric.rows", t, n)).collect::<Result<Vec<_>, _>>())
                    .collect::<Result<Vec<_>, _>>()?;
                MetricField::from_rows(sig, exprs).map_err(|e| bad(format!("metric.rows: {e}")))?
            }
        })
    }

    /// Explicit points, or `count` uniform draws from the centred box.
    pub fn sample_points(&self) -> Result<Vec<Vec<f64>>, CliError> {
        let n = self.dimension;
        if let Some(pts) = &self.points.explicit {
            if pts.iter().any(|p| p.len() != n) {
                return Err(bad(format!("points.explicit entries must have {n} coordinates")));
            }
            return Ok(pts.clone());
        }
        let h = self.points.half_width;
        if !(h > 0.0) {
            return Err(bad("points.half_width must be positive"));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((0..self.points.count).map(|_| (0..n).map(|_| rng.gen_range(-h..h)).collect()).collect())
    }

    fn map(&self, src: &Source, field: &str, m: &MapSpec) -> Result<DiffeoSpec, CliError> {
        let n = self.dimension;
        let sig = &self.signature;
        let len = |v: &[f64]| if v.len() == n { Ok(()) } else { Err(bad(format!("{field}: vector must have {n} entries"))) };
        Ok(match m {
            MapSpec::Translation { b } => {
                len(b)?;
                DiffeoSpec::translation(b)
            }
            MapSpec::Dilation { k } => DiffeoSpec::dilation(n, *k),
            MapSpec::Rotation { i, j, theta } => {
                if i >= &n || j >= &n || i == j {
                    return Err(bad(format!("{field}: rotation plane ({i}, {j}) invalid for n = {n}")));
                }
                DiffeoSpec::rotation(sig, *i, *j, *theta)
            }
            MapSpec::SpecialConformal { b } => {
                len(b)?;
                DiffeoSpec::special_conformal(sig, b)
            }
            MapSpec::Composite { maps } => {
                let mut it = maps.iter().rev();
                let first = it.next().ok_or_else(|| bad(format!("{field}: empty composite")))?;
                it.try_fold(self.map(src, field, first)?, |acc, m| Ok::<_, CliError>(self.map(src, field, m)?.compose(&acc)))?
            }
            MapSpec::Custom { name, components } => {
                if components.len() != n {
                    return Err(bad(format!("{field}: custom map needs {n} components")));
                }
                let map = components.iter().map(|c| src.expr(field, c, n)).collect::<Result<_, _>>()?;
                DiffeoSpec::new(name, map)
            }
        })
    }

    /// Configured slot fields, completing every unassigned slot with a seeded
    /// random quadratic so that any density can be evaluated.
    fn full_fields(&self, src: &Source) -> Result<FieldConfig, CliError> {
        let n = self.dimension;
        let mut cfg = src.fields("algebra.fields", &self.algebra.fields, n)?;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.wrapping_add(0x5107));
        let mut slots = vec![Sym::Alpha];
        for i in 0..n {
            slots.push(Sym::Beta(i));
            slots.push(Sym::A(i));
            slots.extend((0..n).map(|j| Sym::B(i, j)));
        }
        for s in slots {
            let e = Expr::polynomial(n, 2, &vec![0.0; n], &mut || rng.gen_range(-1.0..1.0));
            if cfg.get(s).is_none() {
                cfg.set(s, e).map_err(|e| bad(e.to_string()))?;
            }
        }
        Ok(cfg)
    }
}

fn variational(src: &Source, v: &VariationalSpec) -> Result<Variational, CliError> {
    let factor = src.expr("algebra.variational.factor", &v.factor, 2)?;
    let l = src.expr("algebra.variational.lagrangian", &v.lagrangian, 2)?;
    if v.test_beta.len() != 2 || v.cells.len() < 2 {
        return Err(bad("algebra.variational needs two test_beta components and at least two cell counts"));
    }
    Ok(Variational {
        metric: MetricField::conformally_flat(&[1, 1], factor),
        lagrangian: LagrangianDensity::new(l, 2).map_err(|e| bad(format!("algebra.variational.lagrangian: {e}")))?,
        fields: src.fields("algebra.variational.fields", &v.fields, 2)?,
        test_alpha: src.expr("algebra.variational.test_alpha", &v.test_alpha, 2)?,
        test_beta: v.test_beta.iter().map(|t| src.expr("algebra.variational.test_beta", t, 2)).collect::<Result<_, _>>()?,
        c0: v.c0,
        cells: v.cells.clone(),
    })
}

fn anyon(src: &Source, a: &AnyonSpec) -> Result<Anyon, CliError> {
    let field = match &a.field {
        FieldSpec::Showcase => PolarizationField::showcase(),
        FieldSpec::Explicit { p, v, dual, m, e } => {
            let mut upper: Vec<Expr> = Vec::with_capacity(6);
            for t in p {
                upper.push(src.expr("anyon.field.p", t, 3)?);
            }
            let upper: [Expr; 6] = upper.try_into().expect("six entries");
            let mode = if *dual { PolarizationMode::Dual } else { PolarizationMode::Direct };
            PolarizationField::new(upper, *v, mode, *m, *e).map_err(|e| bad(format!("anyon.field: {e}")))?
        }
    };
    if !(a.dt > 0.0) || !(a.t_end >= 0.0) || a.richardson_dt.len() != 3 {
        return Err(bad("anyon needs dt > 0, t_end >= 0 and three richardson_dt values"));
    }
    let h = &a.richardson_dt;
    if !(h[0] > h[1] && h[1] > h[2] && h[2] > 0.0) || ((h[0] / h[1]) / (h[1] / h[2]) - 1.0).abs() > 1e-9 {
        return Err(bad("anyon.richardson_dt must be a decreasing geometric sequence"));
    }
    if a.initial.u.iter().map(|x| x * x).sum::<f64>() >= 1e12 {
        return Err(bad("anyon.initial.u is too large"));
    }
    Ok(Anyon {
        field,
        initial: CarrierState { t: 0.0, u: four_velocity(a.initial.u), r: a.initial.r },
        t_end: a.t_end,
        dt: a.dt,
        long_run_steps: a.long_run_steps,
        richardson_dt: a.richardson_dt.clone(),
        richardson_t_end: a.richardson_t_end,
    })
}

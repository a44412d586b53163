//! Numerical toolkit for conformal tensor calculus, jet-level gauge
//! potentials, the flat conformal algebra and anyon phenomenology.
//!
//! Everything numeric is generic over [`Real`]; the `*64` aliases below fix
//! the scalar to `f64`, which is what the verification suites use.

pub mod algebra;
pub mod anyon;
pub mod conformal;
pub mod curvature;
pub mod diffeo;
pub mod error;
pub mod expr;
pub mod jet;
pub mod jet_gauge;
pub mod killing;
pub mod metric;
pub mod poly;
pub mod real;
pub mod tensor;

pub use error::{Error, Result};
pub use expr::{differentiate, eval, eval_jet, parse, Expr, Func, Sym};
pub use jet::Jet;
pub use metric::{LocalGeometry, MetricField};
pub use real::Real;
pub use tensor::{trace1, PointTensor, Symmetry};

pub type Jet64 = Jet<f64>;
pub type Tensor64 = PointTensor<f64>;
pub type Geometry64 = LocalGeometry<f64>;

//! Shareable scalar and vector functions of `(x, y)` used as problem data.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::expr::{EvalError, Expr};
use crate::mesh::Point;

type ScalarFn = dyn Fn(f64, f64) -> std::result::Result<f64, EvalError> + Send + Sync;

#[derive(Clone)]
pub struct ScalarFunction {
    f: Arc<ScalarFn>,
    label: Arc<str>,
}

impl ScalarFunction {
    pub fn new(
        label: &str,
        f: impl Fn(f64, f64) -> std::result::Result<f64, EvalError> + Send + Sync + 'static,
    ) -> Self {
        ScalarFunction {
            f: Arc::new(f),
            label: label.into(),
        }
    }

    /// Infallible closure.
    pub fn from_fn(label: &str, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunction::new(label, move |x, y| Ok(f(x, y)))
    }

    pub fn constant(c: f64) -> Self {
        ScalarFunction::new(&format!("{c:?}"), move |_, _| Ok(c))
    }

    pub fn zero() -> Self {
        ScalarFunction::constant(0.0)
    }

    pub fn from_expr(e: Expr) -> Self {
        let label = e.to_string();
        ScalarFunction::new(&label, move |x, y| e.evaluate(x, y))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(ScalarFunction::from_expr(crate::expr::parse(text)?))
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn raw(&self, x: f64, y: f64) -> std::result::Result<f64, EvalError> {
        (self.f)(x, y)
    }

    /// Evaluates, attaching the location to any failure.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        (self.f)(x, y).map_err(|source| Error::Evaluation { x, y, source })
    }

    pub fn eval_at(&self, p: Point) -> Result<f64> {
        self.eval(p[0], p[1])
    }
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarFunction({})", self.label)
    }
}

#[derive(Clone, Debug)]
pub struct VectorFunction {
    components: [ScalarFunction; 2],
}

impl VectorFunction {
    pub fn new(fx: ScalarFunction, fy: ScalarFunction) -> Self {
        VectorFunction { components: [fx, fy] }
    }

    pub fn from_fn(label: &str, f: impl Fn(f64, f64) -> [f64; 2] + Send + Sync + Clone + 'static) -> Self {
        let g = f.clone();
        VectorFunction::new(
            ScalarFunction::from_fn(&format!("{label}.x"), move |x, y| f(x, y)[0]),
            ScalarFunction::from_fn(&format!("{label}.y"), move |x, y| g(x, y)[1]),
        )
    }

    pub fn zero() -> Self {
        VectorFunction::new(ScalarFunction::zero(), ScalarFunction::zero())
    }

    pub fn parse(x: &str, y: &str) -> Result<Self> {
        Ok(VectorFunction::new(
            ScalarFunction::parse(x)?,
            ScalarFunction::parse(y)?,
        ))
    }

    pub fn components(&self) -> &[ScalarFunction; 2] {
        &self.components
    }

    pub fn eval(&self, x: f64, y: f64) -> Result<[f64; 2]> {
        Ok([self.components[0].eval(x, y)?, self.components[1].eval(x, y)?])
    }

    pub fn eval_at(&self, p: Point) -> Result<[f64; 2]> {
        self.eval(p[0], p[1])
    }
}

/// Neumann pressure data on the boundary: either a scalar flux or a vector
/// field whose normal component is the flux.
#[derive(Clone, Debug)]
pub enum BoundaryFlux {
    Scalar(ScalarFunction),
    NormalComponent(VectorFunction),
}

impl BoundaryFlux {
    pub fn zero() -> Self {
        BoundaryFlux::Scalar(ScalarFunction::zero())
    }

    pub fn eval(&self, x: f64, y: f64, normal: Point) -> Result<f64> {
        match self {
            BoundaryFlux::Scalar(g) => g.eval(x, y),
            BoundaryFlux::NormalComponent(v) => {
                let g = v.eval(x, y)?;
                Ok(g[0] * normal[0] + g[1] * normal[1])
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parsed_functions_evaluate() {
        let f = ScalarFunction::parse("2*x+2*y-2").unwrap();
        assert_eq!(f.eval(0.5, 0.5).unwrap(), 0.0);
        let u = VectorFunction::parse("x*(x-1)", "y*(y-1)").unwrap();
        assert_eq!(u.eval(1.0, 0.5).unwrap(), [0.0, -0.25]);
        let g = BoundaryFlux::NormalComponent(VectorFunction::parse("2", "2").unwrap());
        assert_eq!(g.eval(0.0, 0.3, [-1.0, 0.0]).unwrap(), -2.0);
        let bad = ScalarFunction::parse("1/(x-1)").unwrap();
        assert!(matches!(bad.eval(1.0, 0.0), Err(Error::Evaluation { x, .. }) if x == 1.0));
    }
}

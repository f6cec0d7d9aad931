//! Nonlinear least squares over closures, backed by Levenberg–Marquardt
//! with a central-difference Jacobian.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::storage::Owned;
use nalgebra::{DMatrix, DVector, Dyn};

/// Outcome of [`least_squares`].
#[derive(Clone, Debug)]
pub struct FitOutcome {
    pub params: Vec<f64>,
    /// `Σ r_i²` at `params`.
    pub cost: f64,
    pub converged: bool,
    pub evaluations: usize,
}

struct ClosureProblem<F> {
    f: F,
    x: DVector<f64>,
}

impl<F> ClosureProblem<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn eval(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec((self.f)(x.as_slice()))
    }
}

impl<F> LeastSquaresProblem<f64, Dyn, Dyn> for ClosureProblem<F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, x: &DVector<f64>) {
        self.x.copy_from(x);
    }

    fn params(&self) -> DVector<f64> {
        self.x.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = self.eval(&self.x);
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        let r0 = self.eval(&self.x);
        let mut jac = DMatrix::zeros(r0.len(), self.x.len());
        let mut probe = self.x.clone();
        for j in 0..self.x.len() {
            let h = 1e-7 * self.x[j].abs().max(1.0);
            probe[j] = self.x[j] + h;
            let plus = self.eval(&probe);
            probe[j] = self.x[j] - h;
            let minus = self.eval(&probe);
            probe[j] = self.x[j];
            jac.set_column(j, &((plus - minus) / (2.0 * h)));
        }
        jac.iter().all(|v| v.is_finite()).then_some(jac)
    }
}

/// Minimizes `Σ f(x)_i²` starting from `x0`.
pub fn least_squares<F>(x0: &[f64], f: F) -> FitOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let problem = ClosureProblem { f, x: DVector::from_column_slice(x0) };
    let solver = LevenbergMarquardt::new().with_ftol(1e-15).with_xtol(1e-15).with_gtol(1e-15).with_patience(200);
    let (problem, report) = solver.minimize(problem);
    let r = problem.eval(&problem.x);
    FitOutcome {
        params: problem.x.as_slice().to_vec(),
        cost: r.norm_squared(),
        converged: report.termination.was_successful(),
        evaluations: report.number_of_evaluations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fits_an_exponential() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.5 * (-1.3 * x).exp()).collect();
        let out = least_squares(&[1.0, -0.5], |p| xs.iter().zip(&ys).map(|(x, y)| p[0] * (p[1] * x).exp() - y).collect());
        assert!((out.params[0] - 2.5).abs() < 1e-8);
        assert!((out.params[1] + 1.3).abs() < 1e-8);
        assert!(out.cost < 1e-16);
    }

    #[test]
    fn rosenbrock_minimum() {
        let out = least_squares(&[-1.2, 1.0], |p| vec![10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]]);
        assert!((out.params[0] - 1.0).abs() < 1e-6);
        assert!((out.params[1] - 1.0).abs() < 1e-6);
    }
}

use super::codes::SparseVector;
use super::dictionary::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LassoSettings<T> {
    /// Stop once no coordinate moves by more than this in a full sweep.
    pub tolerance: T,
    /// Sweep budget; `None` means `10 * m`.
    pub max_sweeps: Option<usize>,
}

impl<T: Scalar> Default for LassoSettings<T> {
    fn default() -> Self {
        LassoSettings {
            tolerance: T::lit(1e-7),
            max_sweeps: None,
        }
    }
}

/// `½‖x − Dα‖² + λ‖α‖₁` for a dense code.
pub fn lasso_objective<T: Scalar>(dict: &Dictionary<T>, x: &[T], alpha: &[T], lambda: T) -> T {
    let mut r = vec![T::zero(); dict.k()];
    dict.reconstruct_into(alpha, &mut r);
    let sq: T = r.iter().zip(x).map(|(&a, &b)| (b - a) * (b - a)).sum();
    let l1: T = alpha.iter().map(|a| a.abs()).sum();
    T::lit(0.5) * sq + lambda * l1
}

/// Largest violation of the lasso optimality conditions at `alpha`.
///
/// With `g = Dᵀ(x − Dα)`: zero coordinates need `|g_j| ≤ λ` (`g_j ≤ λ`
/// under non-negativity), nonzero ones need `g_j = λ·sign(α_j)`.
pub fn kkt_violation<T: Scalar>(
    dict: &Dictionary<T>,
    x: &[T],
    alpha: &[T],
    lambda: T,
    nonneg: bool,
) -> T {
    let mut recon = vec![T::zero(); dict.k()];
    dict.reconstruct_into(alpha, &mut recon);
    let r: Vec<T> = x.iter().zip(&recon).map(|(&a, &b)| a - b).collect();
    let g = dict.correlate(&r);
    g.iter()
        .zip(alpha)
        .map(|(&g, &a)| {
            if a == T::zero() {
                let excess = if nonneg { g - lambda } else { g.abs() - lambda };
                excess.max(T::zero())
            } else {
                (g - lambda * a.signum()).abs()
            }
        })
        .fold(T::zero(), T::max)
}

/// Lasso solver bound to one dictionary; caches `DᵀD` across signals.
#[derive(Debug, Clone)]
pub struct Encoder<'a, T> {
    dict: &'a Dictionary<T>,
    gram: Vec<T>,
    pub settings: LassoSettings<T>,
}

pub(crate) struct CdOutcome<T> {
    pub converged: bool,
    pub sweeps: usize,
    pub last_change: T,
}

impl<'a, T: Scalar> Encoder<'a, T> {
    pub fn new(dict: &'a Dictionary<T>) -> Self {
        Encoder {
            dict,
            gram: dict.gram(),
            settings: LassoSettings::default(),
        }
    }

    pub fn dictionary(&self) -> &Dictionary<T> {
        self.dict
    }

    /// Minimizes `½‖x − Dα‖² + λ‖α‖₁` (with `α ≥ 0` when `nonneg`).
    pub fn solve(&self, x: &[T], lambda: T, nonneg: bool) -> Result<SparseVector<T>> {
        let mut alpha = vec![T::zero(); self.dict.m()];
        self.solve_dense(x, lambda, nonneg, &mut alpha)?;
        Ok(SparseVector::from_dense(&alpha))
    }

    /// Dense solve from the starting point in `alpha`. Fails only if the
    /// sweep budget runs out without a verifiable optimum.
    pub fn solve_dense(&self, x: &[T], lambda: T, nonneg: bool, alpha: &mut [T]) -> Result<()> {
        self.check_inputs(x, lambda)?;
        let out = self.descend(x, lambda, nonneg, alpha);
        if out.converged {
            return Ok(());
        }
        let mut recon = vec![T::zero(); self.dict.k()];
        self.dict.reconstruct_into(alpha, &mut recon);
        let residual = x
            .iter()
            .zip(&recon)
            .map(|(&a, &b)| (a - b) * (a - b))
            .sum::<T>()
            .sqrt();
        Err(Error::LassoNotConverged {
            sweeps: out.sweeps,
            last_change: out.last_change.as_f64(),
            residual: residual.as_f64(),
            iterate: alpha.iter().map(|v| v.as_f64()).collect(),
        })
    }

    fn check_inputs(&self, x: &[T], lambda: T) -> Result<()> {
        if x.len() != self.dict.k() {
            return Err(Error::DimensionMismatch {
                expected: self.dict.k(),
                actual: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lasso signal".into()));
        }
        if !(lambda > T::zero()) || !lambda.is_finite() {
            return Err(Error::InvalidArgument(
                "lambda must be a finite value > 0".into(),
            ));
        }
        Ok(())
    }

    /// Cyclic coordinate descent, each full sweep followed by a Newton
    /// step restricted to the current sign orthant. Both steps are
    /// non-increasing in the objective, so a warm start never ends worse
    /// than it began.
    pub(crate) fn descend(
        &self,
        x: &[T],
        lambda: T,
        nonneg: bool,
        alpha: &mut [T],
    ) -> CdOutcome<T> {
        let m = self.dict.m();
        let c = self.dict.correlate(x);
        let max_sweeps = self.settings.max_sweeps.unwrap_or(10 * m).max(1);
        let tol = self.settings.tolerance;

        if alpha.iter().all(|&a| a == T::zero()) && c.iter().all(|&v| v.abs() <= lambda) {
            return CdOutcome {
                converged: true,
                sweeps: 0,
                last_change: T::zero(),
            };
        }

        // q = Dᵀx − DᵀDα
        let mut q = c.clone();
        for (j, &a) in alpha.iter().enumerate() {
            if a != T::zero() {
                self.shift(&mut q, j, a);
            }
        }

        let mut sweeps = 0;
        let mut last_change = T::infinity();
        while sweeps < max_sweeps {
            last_change = self.sweep(&mut q, alpha, lambda, nonneg);
            sweeps += 1;
            if last_change <= tol {
                return CdOutcome {
                    converged: true,
                    sweeps,
                    last_change,
                };
            }
            if self.orthant_step(&c, &mut q, lambda, alpha) {
                // exact optimum on this orthant; one more sweep decides
                // whether the support is final
                continue;
            }
        }
        CdOutcome {
            converged: self.certified(&q, lambda, nonneg, alpha),
            sweeps,
            last_change,
        }
    }

    /// `q -= delta * G[:, j]`
    fn shift(&self, q: &mut [T], j: usize, delta: T) {
        let m = self.dict.m();
        let row = &self.gram[j * m..(j + 1) * m];
        for (qi, &g) in q.iter_mut().zip(row) {
            *qi -= delta * g;
        }
    }

    fn sweep(&self, q: &mut [T], alpha: &mut [T], lambda: T, nonneg: bool) -> T {
        let m = self.dict.m();
        let mut max_change = T::zero();
        for j in 0..m {
            let gjj = self.gram[j * m + j];
            if gjj <= T::zero() {
                continue;
            }
            let rho = q[j] + gjj * alpha[j];
            let new = if nonneg {
                ((rho - lambda) / gjj).max(T::zero())
            } else if rho > lambda {
                (rho - lambda) / gjj
            } else if rho < -lambda {
                (rho + lambda) / gjj
            } else {
                T::zero()
            };
            let delta = new - alpha[j];
            if delta != T::zero() {
                self.shift(q, j, delta);
                alpha[j] = new;
                max_change = max_change.max(delta.abs());
            }
        }
        max_change
    }

    /// Moves from `alpha` toward the minimizer of the objective restricted
    /// to the current support and sign pattern, stopping at the first
    /// coordinate that would change sign. Inside one orthant the objective
    /// is a convex quadratic minimized at the target, so it decreases
    /// along the whole segment. Returns true if the target was reached.
    fn orthant_step(&self, c: &[T], q: &mut [T], lambda: T, alpha: &mut [T]) -> bool {
        let m = self.dict.m();
        let mut support: Vec<usize> = (0..m).filter(|&j| alpha[j] != T::zero()).collect();
        let target = loop {
            if support.is_empty() {
                return false;
            }
            let s = support.len();
            if s <= self.dict.k() {
                let mut a = vec![T::zero(); s * s];
                let mut b = vec![T::zero(); s];
                for (p, &i) in support.iter().enumerate() {
                    for (r, &j) in support.iter().enumerate() {
                        a[p * s + r] = self.gram[i * m + j];
                    }
                    b[p] = c[i] - lambda * alpha[i].signum();
                }
                if let Some(t) = cholesky_solve(&mut a, &mut b, s) {
                    break t;
                }
            }
            // dependent support columns: drop one without raising the objective
            match self.drop_dependent(&support, q, alpha) {
                Some(j) => support.retain(|&i| i != j),
                None => return false,
            }
        };
        let mut t = T::one();
        let mut blocking = None;
        for (p, &j) in support.iter().enumerate() {
            let (from, to) = (alpha[j], target[p]);
            if to == T::zero() || to.signum() != from.signum() {
                let tj = from / (from - to);
                if tj < t {
                    t = tj;
                    blocking = Some(j);
                }
            }
        }
        for (p, &j) in support.iter().enumerate() {
            let new = if Some(j) == blocking {
                T::zero()
            } else {
                alpha[j] + t * (target[p] - alpha[j])
            };
            let delta = new - alpha[j];
            if delta != T::zero() {
                self.shift(q, j, delta);
                alpha[j] = new;
            }
        }
        blocking.is_none()
    }

    /// With linearly dependent support columns there is a direction `v`
    /// with `D_S v = 0`: the fit is unchanged along it and the ℓ1 term is
    /// linear, so stepping along `±v` until a coordinate reaches zero never
    /// increases the objective. Returns the zeroed coordinate.
    fn drop_dependent(&self, support: &[usize], q: &mut [T], alpha: &mut [T]) -> Option<usize> {
        let cols: Vec<&[T]> = support.iter().map(|&j| self.dict.atom(j)).collect();
        let mut v = null_vector(&cols, self.dict.k())?;
        let slope: T = support
            .iter()
            .zip(&v)
            .map(|(&j, &vj)| alpha[j].signum() * vj)
            .sum();
        if slope > T::zero() {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        let mut t = T::infinity();
        let mut hit = None;
        for (&j, &vj) in support.iter().zip(&v) {
            if vj != T::zero() && vj.signum() != alpha[j].signum() {
                let tj = -alpha[j] / vj;
                if tj < t {
                    t = tj;
                    hit = Some(j);
                }
            }
        }
        let hit = hit?;
        for (&j, &vj) in support.iter().zip(&v) {
            let new = if j == hit {
                T::zero()
            } else {
                alpha[j] + t * vj
            };
            let delta = new - alpha[j];
            if delta != T::zero() {
                self.shift(q, j, delta);
                alpha[j] = new;
            }
        }
        Some(hit)
    }

    /// Optimality check on the maintained gradient `q = Dᵀ(x − Dα)`.
    fn certified(&self, q: &[T], lambda: T, nonneg: bool, alpha: &[T]) -> bool {
        let slack = T::lit(1e-9) * (T::one() + lambda);
        q.iter().zip(alpha).all(|(&g, &a)| {
            let v = if a == T::zero() {
                if nonneg {
                    g - lambda
                } else {
                    g.abs() - lambda
                }
            } else {
                (g - lambda * a.signum()).abs()
            };
            v <= slack
        })
    }
}

/// A nonzero `v` with `Σ v_p cols[p] = 0`, by Gauss-Jordan elimination
/// with partial pivoting; `None` if the columns are independent.
fn null_vector<T: Scalar>(cols: &[&[T]], k: usize) -> Option<Vec<T>> {
    let s = cols.len();
    // row-major k x s
    let mut a: Vec<T> = (0..k)
        .flat_map(|r| cols.iter().map(move |c| c[r]))
        .collect();
    let scale = a.iter().fold(T::zero(), |acc, v| acc.max(v.abs()));
    let eps = scale * T::lit(1e-10);
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    let mut row = 0;
    let mut free = None;
    for col in 0..s {
        let best = (row..k).max_by(|&x, &y| {
            a[x * s + col]
                .abs()
                .partial_cmp(&a[y * s + col].abs())
                .unwrap()
        });
        match best {
            Some(p) if a[p * s + col].abs() > eps => {
                for j in 0..s {
                    a.swap(row * s + j, p * s + j);
                }
                let piv = a[row * s + col];
                for j in 0..s {
                    a[row * s + j] /= piv;
                }
                for r in 0..k {
                    if r != row {
                        let f = a[r * s + col];
                        if f != T::zero() {
                            for j in 0..s {
                                let v = a[row * s + j];
                                a[r * s + j] -= f * v;
                            }
                        }
                    }
                }
                pivots.push((row, col));
                row += 1;
            }
            _ => {
                free = Some(col);
                break;
            }
        }
    }
    let free = free?;
    let mut v = vec![T::zero(); s];
    v[free] = T::one();
    for (r, c) in pivots {
        v[c] = -a[r * s + free];
    }
    Some(v)
}

/// In-place Cholesky solve of a symmetric positive-definite system.
fn cholesky_solve<T: Scalar>(a: &mut [T], b: &mut [T], n: usize) -> Option<Vec<T>> {
    let scale = (0..n).map(|i| a[i * n + i]).fold(T::zero(), T::max);
    let floor = scale * T::lit(1e-12);
    for j in 0..n {
        let mut d = a[j * n + j];
        for p in 0..j {
            d -= a[j * n + p] * a[j * n + p];
        }
        if !(d > floor) {
            return None;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut v = a[i * n + j];
            for p in 0..j {
                v -= a[i * n + p] * a[j * n + p];
            }
            a[i * n + j] = v / d;
        }
    }
    for i in 0..n {
        let mut v = b[i];
        for p in 0..i {
            v -= a[i * n + p] * b[p];
        }
        b[i] = v / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut v = b[i];
        for p in i + 1..n {
            v -= a[p * n + i] * b[p];
        }
        b[i] = v / a[i * n + i];
    }
    Some(b.to_vec())
}

/// One-off lasso solve against `dict`.
pub fn solve_lasso<T: Scalar>(
    dict: &Dictionary<T>,
    x: &[T],
    lambda: T,
    nonneg: bool,
) -> Result<SparseVector<T>> {
    Encoder::new(dict).solve(x, lambda, nonneg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::Variant;

    #[test]
    fn identity_gives_soft_threshold() {
        let d = Dictionary::<f64>::identity(2, Variant::Sc1, 0.1).unwrap();
        let a = solve_lasso(&d, &[0.5, 0.05], 0.1, false)
            .unwrap()
            .to_dense(2);
        assert!((a[0] - 0.4).abs() < 1e-12 && a[1] == 0.0, "{a:?}");
        let a = solve_lasso(&d, &[-0.5, 0.05], 0.1, false)
            .unwrap()
            .to_dense(2);
        assert!((a[0] + 0.4).abs() < 1e-12);
    }

    #[test]
    fn nonnegative_clips_negative_correlation() {
        let d = Dictionary::<f64>::identity(2, Variant::Sc4, 0.1).unwrap();
        let a = solve_lasso(&d, &[-0.5, 0.05], 0.1, true).unwrap();
        assert!(a.is_empty());
    }

    #[test]
    fn zero_signal_gives_empty_code() {
        let d = Dictionary::from_columns(
            vec![vec![1.0f64, 2.0], vec![0.3, -1.0], vec![0.0, 1.0]],
            Variant::Sc3,
            0.1,
            0.0,
        )
        .unwrap();
        assert!(solve_lasso(&d, &[0.0, 0.0], 0.1, false).unwrap().is_empty());
    }

    #[test]
    fn correlated_columns_pass_kkt() {
        let d = Dictionary::from_columns(
            vec![
                vec![1.0f64, 0.0, 0.0],
                vec![0.999, 0.0447, 0.0],
                vec![0.0, 0.6, 0.8],
            ],
            Variant::Sc3,
            0.05,
            0.0,
        )
        .unwrap();
        let x = [0.9, 0.3, -0.2];
        let a = solve_lasso(&d, &x, 0.05, false).unwrap().to_dense(3);
        assert!(kkt_violation(&d, &x, &a, 0.05, false) < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        let d = Dictionary::<f64>::identity(2, Variant::Sc1, 0.1).unwrap();
        assert!(matches!(
            solve_lasso(&d, &[f64::NAN, 0.0], 0.1, false),
            Err(Error::NonFinite(_))
        ));
        assert!(solve_lasso(&d, &[1.0, 0.0], 0.0, false).is_err());
        assert!(matches!(
            solve_lasso(&d, &[1.0], 0.1, false),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_iterate() {
        // rank-deficient system: polishing cannot certify, tiny budget
        let d = Dictionary::from_columns(
            vec![vec![1.0f64, 0.0], vec![1.0, 1e-3], vec![1.0, -1e-3]],
            Variant::Sc3,
            0.01,
            0.0,
        )
        .unwrap();
        let mut enc = Encoder::new(&d);
        enc.settings.max_sweeps = Some(1);
        enc.settings.tolerance = 0.0;
        let mut alpha = vec![0.0; 3];
        match enc.solve_dense(&[1.0, 0.5], 0.01, false, &mut alpha) {
            Err(Error::LassoNotConverged {
                sweeps, iterate, ..
            }) => {
                assert_eq!(sweeps, 1);
                assert_eq!(iterate.len(), 3);
            }
            Ok(()) => {
                // accepted only with a valid certificate
                assert!(kkt_violation(&d, &[1.0, 0.5], &alpha, 0.01, false) < 1e-6);
            }
            Err(e) => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn works_in_f32() {
        let d = Dictionary::<f32>::identity(3, Variant::Sc1, 0.1).unwrap();
        let a = solve_lasso(&d, &[0.5, -0.3, 0.05], 0.1, false)
            .unwrap()
            .to_dense(3);
        assert!((a[0] - 0.4).abs() < 1e-6 && (a[1] + 0.2).abs() < 1e-6 && a[2] == 0.0);
    }
}

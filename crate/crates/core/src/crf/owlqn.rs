//! Orthant-wise limited-memory quasi-Newton minimization of
//! `f(x) + c1·‖x‖₁` for smooth `f`.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone, PartialEq)]
pub struct OwlqnSettings<T> {
    pub c1: T,
    /// Number of correction pairs kept.
    pub memory: usize,
    pub max_iterations: usize,
    /// Stop when the objective improved by less than this fraction over
    /// the last `period` iterations.
    pub delta: T,
    pub period: usize,
    /// Stop when `‖pseudo-gradient‖ / max(1, ‖x‖)` falls below this.
    pub epsilon: T,
    pub max_linesearch: usize,
}

impl<T: Scalar> Default for OwlqnSettings<T> {
    fn default() -> Self {
        OwlqnSettings {
            c1: T::one(),
            memory: 10,
            max_iterations: 500,
            delta: T::lit(1e-5),
            period: 10,
            epsilon: T::lit(1e-5),
            max_linesearch: 20,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    GradientNorm,
    ObjectiveChange,
    MaxIterations,
    LineSearchFailed,
}

#[derive(Debug, Clone)]
pub struct OwlqnResult<T> {
    pub x: Vec<T>,
    /// Full objective including the ℓ1 term.
    pub value: T,
    pub iterations: usize,
    pub stop: StopReason,
}

fn l1<T: Scalar>(x: &[T]) -> T {
    x.iter().map(|v| v.abs()).sum()
}

/// Minimum-norm subgradient of the composite objective.
pub fn pseudo_gradient<T: Scalar>(x: &[T], g: &[T], c1: T) -> Vec<T> {
    x.iter()
        .zip(g)
        .map(|(&xi, &gi)| {
            let zero = T::zero();
            if xi > zero || (xi == zero && gi + c1 < zero) {
                gi + c1
            } else if xi < zero || gi - c1 > zero {
                gi - c1
            } else {
                zero
            }
        })
        .collect()
}

/// `f` returns the smooth value and gradient at a point.
pub fn minimize<T, F>(x0: Vec<T>, settings: &OwlqnSettings<T>, mut f: F) -> Result<OwlqnResult<T>>
where
    T: Scalar,
    F: FnMut(&[T]) -> Result<(T, Vec<T>)>,
{
    let c1 = settings.c1;
    let gamma = T::lit(1e-4);
    let half = T::lit(0.5);
    let mut x = x0;
    let (fs, mut g) = f(&x)?;
    let mut fx = fs + c1 * l1(&x);
    if !fx.is_finite() {
        return Err(Error::Diverged {
            stage: "crf training",
            step: "iteration",
            index: 0,
        });
    }
    let mut pg = pseudo_gradient(&x, &g, c1);
    let mut history: VecDeque<(Vec<T>, Vec<T>, T)> = VecDeque::with_capacity(settings.memory);
    let mut past = vec![fx];
    let gnorm_small =
        |pg: &[T], x: &[T]| dot(pg, pg).sqrt() <= settings.epsilon * dot(x, x).sqrt().max(T::one());
    if gnorm_small(&pg, &x) {
        return Ok(OwlqnResult {
            x,
            value: fx,
            iterations: 0,
            stop: StopReason::GradientNorm,
        });
    }
    let mut d: Vec<T> = pg.iter().map(|&v| -v).collect();
    let mut step = T::one() / dot(&d, &d).sqrt();

    for k in 1..=settings.max_iterations {
        for (di, &pi) in d.iter_mut().zip(&pg) {
            if *di * pi >= T::zero() {
                *di = T::zero();
            }
        }
        if d.iter().all(|v| v.is_zero()) {
            return Ok(OwlqnResult {
                x,
                value: fx,
                iterations: k - 1,
                stop: StopReason::GradientNorm,
            });
        }
        let orthant: Vec<T> = x
            .iter()
            .zip(&pg)
            .map(|(&xi, &pi)| {
                if !xi.is_zero() {
                    xi.signum()
                } else if pi > T::zero() {
                    -T::one()
                } else if pi < T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            })
            .collect();

        let mut t = step;
        let mut accepted = None;
        for _ in 0..settings.max_linesearch {
            let xn: Vec<T> = x
                .iter()
                .zip(&d)
                .zip(&orthant)
                .map(|((&xi, &di), &o)| {
                    let v = xi + t * di;
                    if v * o <= T::zero() {
                        T::zero()
                    } else {
                        v
                    }
                })
                .collect();
            let (fsn, gn) = f(&xn)?;
            let fxn = fsn + c1 * l1(&xn);
            if !fxn.is_finite() || gn.iter().any(|v| !v.is_finite()) {
                return Err(Error::Diverged {
                    stage: "crf training",
                    step: "iteration",
                    index: k,
                });
            }
            let decrease: T = pg
                .iter()
                .zip(xn.iter().zip(&x))
                .map(|(&p, (&a, &b))| p * (a - b))
                .sum();
            if fxn <= fx + gamma * decrease {
                accepted = Some((xn, gn, fxn));
                break;
            }
            t *= half;
        }
        let Some((xn, gn, fxn)) = accepted else {
            return Ok(OwlqnResult {
                x,
                value: fx,
                iterations: k - 1,
                stop: StopReason::LineSearchFailed,
            });
        };

        let s: Vec<T> = xn.iter().zip(&x).map(|(&a, &b)| a - b).collect();
        let y: Vec<T> = gn.iter().zip(&g).map(|(&a, &b)| a - b).collect();
        x = xn;
        g = gn;
        fx = fxn;
        pg = pseudo_gradient(&x, &g, c1);

        if gnorm_small(&pg, &x) {
            return Ok(OwlqnResult {
                x,
                value: fx,
                iterations: k,
                stop: StopReason::GradientNorm,
            });
        }
        past.push(fx);
        if past.len() > settings.period {
            let old = past[past.len() - 1 - settings.period];
            if (old - fx) / fx.abs().max(T::min_positive_value()) < settings.delta {
                return Ok(OwlqnResult {
                    x,
                    value: fx,
                    iterations: k,
                    stop: StopReason::ObjectiveChange,
                });
            }
        }

        let ys = dot(&y, &s);
        if ys > T::zero() {
            if history.len() == settings.memory {
                history.pop_front();
            }
            history.push_back((s, y, ys));
        }

        // two-loop recursion on the pseudo-gradient
        let mut q = pg.clone();
        let mut alphas = Vec::with_capacity(history.len());
        for (s, y, ys) in history.iter().rev() {
            let a = dot(s, &q) / *ys;
            for (qi, &yi) in q.iter_mut().zip(y) {
                *qi -= a * yi;
            }
            alphas.push(a);
        }
        if let Some((_, y, ys)) = history.back() {
            let scale = *ys / dot(y, y);
            for qi in q.iter_mut() {
                *qi *= scale;
            }
        }
        for ((s, y, ys), a) in history.iter().zip(alphas.iter().rev()) {
            let b = dot(y, &q) / *ys;
            for (qi, &si) in q.iter_mut().zip(s) {
                *qi += (*a - b) * si;
            }
        }
        d = q.into_iter().map(|v| -v).collect();
        step = T::one();
    }
    Ok(OwlqnResult {
        x,
        value: fx,
        iterations: settings.max_iterations,
        stop: StopReason::MaxIterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// ½‖x − b‖² + c1‖x‖₁ has the soft-threshold solution.
    #[test]
    fn separable_quadratic() {
        let b = [3.0f64, -0.4, 0.9, -2.5, 0.0];
        let settings = OwlqnSettings {
            c1: 1.0,
            epsilon: 1e-10,
            delta: 0.0,
            ..Default::default()
        };
        let res = minimize(vec![0.0; 5], &settings, |x| {
            let g: Vec<f64> = x.iter().zip(&b).map(|(a, b)| a - b).collect();
            Ok((0.5 * dot(&g, &g), g))
        })
        .unwrap();
        let want = [2.0, 0.0, 0.0, -1.5, 0.0];
        for (a, w) in res.x.iter().zip(want) {
            assert!((a - w).abs() < 1e-8, "{:?}", res.x);
        }
        assert_eq!(res.x[1], 0.0);
        assert_eq!(res.x[2], 0.0);
    }

    #[test]
    fn coupled_quadratic_matches_coordinate_descent() {
        // ½ xᵀAx − bᵀx + c1‖x‖₁ with A positive definite
        let a = [[4.0f64, 1.0, 0.5], [1.0, 3.0, -0.3], [0.5, -0.3, 2.0]];
        let b = [2.0f64, -3.0, 0.2];
        let c1 = 0.5;
        let grad = |x: &[f64]| -> Vec<f64> {
            (0..3)
                .map(|i| (0..3).map(|j| a[i][j] * x[j]).sum::<f64>() - b[i])
                .collect()
        };
        let settings = OwlqnSettings {
            c1,
            epsilon: 1e-12,
            delta: 0.0,
            ..Default::default()
        };
        let res = minimize(vec![0.0; 3], &settings, |x| {
            let g = grad(x);
            let v = 0.5 * (0..3).map(|i| x[i] * (g[i] + b[i])).sum::<f64>() - dot(&b, x);
            Ok((v, g))
        })
        .unwrap();
        let mut z = [0.0f64; 3];
        for _ in 0..10_000 {
            for i in 0..3 {
                let r: f64 = b[i]
                    - (0..3)
                        .filter(|&j| j != i)
                        .map(|j| a[i][j] * z[j])
                        .sum::<f64>();
                z[i] = r.signum() * (r.abs() - c1).max(0.0) / a[i][i];
            }
        }
        for (x, w) in res.x.iter().zip(z) {
            assert!((x - w).abs() < 1e-7, "{:?} vs {z:?}", res.x);
        }
    }

    #[test]
    fn huge_penalty_keeps_origin() {
        let settings = OwlqnSettings {
            c1: 1e6,
            ..Default::default()
        };
        let res = minimize(vec![0.0f64; 2], &settings, |x| {
            Ok((0.0, vec![x[0] - 5.0, x[1] + 3.0]))
        })
        .unwrap();
        assert_eq!(res.x, [0.0, 0.0]);
        assert_eq!(res.iterations, 0);
    }
}

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::FeatureVector;
use crate::scalar::Scalar;

use super::owlqn::{minimize, OwlqnSettings, StopReason};
use super::{CrfModel, Lattice};

/// Elastic-net training settings.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig<T> {
    pub c1: T,
    pub c2: T,
    pub memory: usize,
    pub max_iterations: usize,
    /// Relative objective change over `period` iterations that stops
    /// training.
    pub tolerance: T,
    pub period: usize,
    pub epsilon: T,
    pub max_linesearch: usize,
    /// Recorded in the model; the optimizer itself is deterministic.
    pub seed: u64,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            c1: T::one(),
            c2: T::lit(0.001),
            memory: 10,
            max_iterations: 500,
            tolerance: T::lit(1e-5),
            period: 10,
            epsilon: T::lit(1e-5),
            max_linesearch: 20,
            seed: 42,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.c1 >= T::zero() && self.c1.is_finite())
            || !(self.c2 >= T::zero() && self.c2.is_finite())
        {
            return bad("c1 and c2 must be finite and non-negative");
        }
        if self.memory == 0 || self.period == 0 || self.max_linesearch == 0 {
            return bad("memory, period and max_linesearch must be positive");
        }
        if !(self.tolerance >= T::zero()) || !(self.epsilon >= T::zero()) {
            return bad("tolerances must be non-negative");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainReport {
    pub iterations: usize,
    pub objective: f64,
    pub stop: StopReason,
    pub active_emissions: usize,
}

/// A sentence with features resolved to ids.
#[derive(Debug, Clone)]
pub(crate) struct Instance<T> {
    positions: Vec<Vec<(usize, T)>>,
    gold: Vec<usize>,
}

/// Penalized objective at the model's current weights.
#[derive(Debug, Clone)]
pub struct Objective<T> {
    /// `Σ (log Z − gold score) + c1‖w‖₁ + (c2/2)‖w‖²`.
    pub value: T,
    /// The same without the ℓ1 term.
    pub smooth: T,
    /// Gradient of `smooth`, laid out like [`CrfModel::params`].
    pub gradient: Vec<T>,
}

const CHUNKS: usize = 16;

fn check_shapes<T, S: AsRef<str>>(xs: &[Vec<FeatureVector<T>>], ys: &[Vec<S>]) -> Result<()> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} feature sequences, {} label sequences",
            xs.len(),
            ys.len()
        )));
    }
    for (i, (x, y)) in xs.iter().zip(ys).enumerate() {
        if x.len() != y.len() {
            return Err(Error::ShapeMismatch(format!(
                "sentence {i}: {} feature vectors, {} labels",
                x.len(),
                y.len()
            )));
        }
    }
    Ok(())
}

fn resolve<T: Scalar, S: AsRef<str>>(
    model: &CrfModel<T>,
    xs: &[Vec<FeatureVector<T>>],
    ys: &[Vec<S>],
) -> Result<Vec<Instance<T>>> {
    xs.iter()
        .zip(ys)
        .map(|(x, y)| {
            let gold = y
                .iter()
                .map(|l| {
                    let l = l.as_ref();
                    model
                        .label_id(l)
                        .ok_or_else(|| Error::UnknownLabel(l.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let positions = x
                .iter()
                .map(|fv| {
                    fv.entries()
                        .iter()
                        .filter_map(|(n, v)| model.feature_id(n).map(|f| (f, *v)))
                        .collect()
                })
                .collect();
            Ok(Instance { positions, gold })
        })
        .collect()
}

fn lattice<T: Scalar>(inst: &Instance<T>, params: &[T], nf: usize, l: usize) -> Lattice<T> {
    let (em, tr) = params.split_at(nf * l);
    let mut emissions = vec![T::zero(); inst.positions.len() * l];
    for (t, feats) in inst.positions.iter().enumerate() {
        let row = &mut emissions[t * l..(t + 1) * l];
        for &(f, v) in feats {
            for (e, &w) in row.iter_mut().zip(&em[f * l..(f + 1) * l]) {
                *e += w * v;
            }
        }
    }
    Lattice::new(inst.positions.len(), l, emissions, tr.to_vec())
}

/// `Σ (log Z − gold score)` and its gradient. Sentences are split into at
/// most [`CHUNKS`] contiguous chunks whose partial sums are added in chunk
/// order, so the result does not depend on the thread count.
fn data_term<T: Scalar>(
    instances: &[Instance<T>],
    params: &[T],
    nf: usize,
    l: usize,
) -> (T, Vec<T>) {
    let chunk = instances.len().div_ceil(CHUNKS).max(1);
    let partials: Vec<(T, Vec<T>)> = instances
        .par_chunks(chunk)
        .map(|part| {
            let mut value = T::zero();
            let mut grad = vec![T::zero(); params.len()];
            for inst in part {
                let lat = lattice(inst, params, nf, l);
                let fb = lat.forward_backward();
                value += fb.log_z - lat.path_score(&inst.gold);
                let marg = lat.node_marginals(&fb);
                let (ge, gt) = grad.split_at_mut(nf * l);
                for (t, feats) in inst.positions.iter().enumerate() {
                    let m = &marg[t * l..(t + 1) * l];
                    let gold = inst.gold[t];
                    for &(f, v) in feats {
                        let row = &mut ge[f * l..(f + 1) * l];
                        for (y, (g, &p)) in row.iter_mut().zip(m).enumerate() {
                            *g += if y == gold { (p - T::one()) * v } else { p * v };
                        }
                    }
                }
                for (g, e) in gt.iter_mut().zip(lat.expected_transitions(&fb)) {
                    *g += e;
                }
                for w in inst.gold.windows(2) {
                    gt[w[0] * l + w[1]] -= T::one();
                }
            }
            (value, grad)
        })
        .collect();
    let mut value = T::zero();
    let mut grad = vec![T::zero(); params.len()];
    for (v, g) in partials {
        value += v;
        for (a, b) in grad.iter_mut().zip(g) {
            *a += b;
        }
    }
    (value, grad)
}

fn smooth_term<T: Scalar>(
    instances: &[Instance<T>],
    params: &[T],
    nf: usize,
    l: usize,
    c2: T,
) -> (T, Vec<T>) {
    let (mut value, mut grad) = data_term(instances, params, nf, l);
    let half = T::lit(0.5);
    for (g, &w) in grad.iter_mut().zip(params) {
        value += half * c2 * w * w;
        *g += c2 * w;
    }
    (value, grad)
}

/// Objective and smooth-part gradient of `model` on a labeled batch, with
/// the model's `c1`/`c2`. Features unknown to the model are ignored.
pub fn neg_log_likelihood_and_gradient<T: Scalar, S: AsRef<str>>(
    model: &CrfModel<T>,
    xs: &[Vec<FeatureVector<T>>],
    ys: &[Vec<S>],
) -> Result<Objective<T>> {
    check_shapes(xs, ys)?;
    let instances = resolve(model, xs, ys)?;
    let params = model.params();
    let (smooth, gradient) = smooth_term(
        &instances,
        &params,
        model.features().len(),
        model.num_labels(),
        model.c2,
    );
    let l1: T = params.iter().map(|w| w.abs()).sum();
    Ok(Objective {
        value: smooth + model.c1 * l1,
        smooth,
        gradient,
    })
}

/// Label inventory (sorted) and feature inventory (first appearance) of a
/// training set.
fn inventory<T: Scalar, S: AsRef<str>>(
    xs: &[Vec<FeatureVector<T>>],
    ys: &[Vec<S>],
) -> (Vec<String>, Vec<String>) {
    let mut labels: Vec<String> = ys
        .iter()
        .flatten()
        .map(|s| s.as_ref().to_string())
        .collect();
    labels.sort();
    labels.dedup();
    let mut seen: HashMap<&str, ()> = HashMap::new();
    let mut features = Vec::new();
    for fv in xs.iter().flatten() {
        for name in fv.names() {
            if seen.insert(name, ()).is_none() {
                features.push(name.to_string());
            }
        }
    }
    (labels, features)
}

/// Fits a CRF by minimizing the elastic-net penalized negative
/// log-likelihood with OWL-QN, starting from zero weights.
pub fn train<T: Scalar, S: AsRef<str>>(
    xs: &[Vec<FeatureVector<T>>],
    ys: &[Vec<S>],
    config: &TrainConfig<T>,
) -> Result<(CrfModel<T>, TrainReport)> {
    config.validate()?;
    check_shapes(xs, ys)?;
    if xs.iter().all(|s| s.is_empty()) {
        return Err(Error::Empty("training set has no tokens".into()));
    }
    for fv in xs.iter().flatten() {
        if fv.entries().iter().any(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite("feature values".into()));
        }
    }
    let (labels, features) = inventory(xs, ys);
    let mut model = CrfModel::zeros(labels, features)?;
    model.c1 = config.c1;
    model.c2 = config.c2;
    let instances = resolve(&model, xs, ys)?;
    let (nf, l) = (model.features().len(), model.num_labels());
    let settings = OwlqnSettings {
        c1: config.c1,
        memory: config.memory,
        max_iterations: config.max_iterations,
        delta: config.tolerance,
        period: config.period,
        epsilon: config.epsilon,
        max_linesearch: config.max_linesearch,
    };
    let result = minimize(model.params(), &settings, |w| {
        Ok(smooth_term(&instances, w, nf, l, config.c2))
    })?;
    model.set_params(&result.x)?;
    let report = TrainReport {
        iterations: result.iterations,
        objective: result.value.as_f64(),
        stop: result.stop,
        active_emissions: model.nonzero_emissions(),
    };
    Ok((model, report))
}

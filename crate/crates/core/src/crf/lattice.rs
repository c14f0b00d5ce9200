use crate::scalar::{log_sum_exp, Scalar};

/// Potentials of one sentence: per-position emission scores and a
/// position-independent transition matrix, both row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice<T> {
    len: usize,
    labels: usize,
    emissions: Vec<T>,
    transitions: Vec<T>,
}

/// Forward-backward tables and the log normalizer.
#[derive(Debug, Clone)]
pub struct ForwardBackward<T> {
    pub alpha: Vec<T>,
    pub beta: Vec<T>,
    pub log_z: T,
}

impl<T: Scalar> Lattice<T> {
    /// `emissions` is `len × labels`, `transitions` is `labels × labels`
    /// indexed `[from * labels + to]`.
    pub fn new(len: usize, labels: usize, emissions: Vec<T>, transitions: Vec<T>) -> Self {
        assert_eq!(emissions.len(), len * labels, "emission table shape");
        assert_eq!(transitions.len(), labels * labels, "transition table shape");
        Lattice {
            len,
            labels,
            emissions,
            transitions,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn labels(&self) -> usize {
        self.labels
    }

    pub fn emission(&self, t: usize, y: usize) -> T {
        self.emissions[t * self.labels + y]
    }

    pub fn emission_mut(&mut self, t: usize, y: usize) -> &mut T {
        &mut self.emissions[t * self.labels + y]
    }

    pub fn transition(&self, from: usize, to: usize) -> T {
        self.transitions[from * self.labels + to]
    }

    pub fn emissions(&self) -> &[T] {
        &self.emissions
    }

    pub fn transitions(&self) -> &[T] {
        &self.transitions
    }

    pub fn path_score(&self, path: &[usize]) -> T {
        let mut s = T::zero();
        for (t, &y) in path.iter().enumerate() {
            s += self.emission(t, y);
            if t > 0 {
                s += self.transition(path[t - 1], y);
            }
        }
        s
    }

    pub fn forward_backward(&self) -> ForwardBackward<T> {
        let (n, l) = (self.len, self.labels);
        let mut alpha = vec![T::zero(); n * l];
        let mut beta = vec![T::zero(); n * l];
        let mut buf = vec![T::zero(); l];
        if n == 0 {
            return ForwardBackward {
                alpha,
                beta,
                log_z: T::zero(),
            };
        }
        alpha[..l].copy_from_slice(&self.emissions[..l]);
        for t in 1..n {
            for y in 0..l {
                for (p, b) in buf.iter_mut().enumerate() {
                    *b = alpha[(t - 1) * l + p] + self.transition(p, y);
                }
                alpha[t * l + y] = log_sum_exp(&buf) + self.emission(t, y);
            }
        }
        for t in (0..n - 1).rev() {
            for y in 0..l {
                for (q, b) in buf.iter_mut().enumerate() {
                    *b = self.transition(y, q) + self.emission(t + 1, q) + beta[(t + 1) * l + q];
                }
                beta[t * l + y] = log_sum_exp(&buf);
            }
        }
        let log_z = log_sum_exp(&alpha[(n - 1) * l..]);
        ForwardBackward { alpha, beta, log_z }
    }

    pub fn log_partition(&self) -> T {
        self.forward_backward().log_z
    }

    /// `P(y_t = y)` as a `len × labels` table.
    pub fn marginals(&self) -> Vec<T> {
        let fb = self.forward_backward();
        self.node_marginals(&fb)
    }

    pub fn node_marginals(&self, fb: &ForwardBackward<T>) -> Vec<T> {
        fb.alpha
            .iter()
            .zip(&fb.beta)
            .map(|(&a, &b)| (a + b - fb.log_z).exp())
            .collect()
    }

    /// `Σ_t P(y_{t-1} = a, y_t = b)` as a `labels × labels` table.
    pub fn expected_transitions(&self, fb: &ForwardBackward<T>) -> Vec<T> {
        let l = self.labels;
        let mut out = vec![T::zero(); l * l];
        for t in 1..self.len {
            for a in 0..l {
                let left = fb.alpha[(t - 1) * l + a] - fb.log_z;
                for b in 0..l {
                    out[a * l + b] +=
                        (left + self.transition(a, b) + self.emission(t, b) + fb.beta[t * l + b])
                            .exp();
                }
            }
        }
        out
    }

    /// Highest-scoring label sequence. Ties go to the lower label index,
    /// both for the final label and at every backpointer.
    pub fn viterbi(&self) -> Vec<usize> {
        let (n, l) = (self.len, self.labels);
        if n == 0 {
            return Vec::new();
        }
        let mut delta = self.emissions[..l].to_vec();
        let mut next = vec![T::zero(); l];
        let mut back = vec![0usize; n * l];
        for t in 1..n {
            for y in 0..l {
                let mut best = 0;
                let mut best_score = delta[0] + self.transition(0, y);
                for (p, &d) in delta.iter().enumerate().skip(1) {
                    let s = d + self.transition(p, y);
                    if s > best_score {
                        best = p;
                        best_score = s;
                    }
                }
                back[t * l + y] = best;
                next[y] = best_score + self.emission(t, y);
            }
            std::mem::swap(&mut delta, &mut next);
        }
        let mut y = 0;
        for (q, &d) in delta.iter().enumerate() {
            if d > delta[y] {
                y = q;
            }
        }
        let mut path = vec![0; n];
        path[n - 1] = y;
        for t in (1..n).rev() {
            y = back[t * l + y];
            path[t - 1] = y;
        }
        path
    }
}

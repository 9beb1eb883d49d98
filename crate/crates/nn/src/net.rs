use rand::Rng;

use crate::error::{check_len, NnError, Result};
use crate::matrix::Matrix2D;
use crate::rng::SeededRng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HiddenActivation {
    /// Subgradient at exactly zero is taken as 0.
    Relu,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OutputActivation {
    Identity,
    /// `lo + (hi - lo) * sigmoid(z)`, kept strictly inside `(lo, hi)`.
    SigmoidScaled { lo: f64, hi: f64 },
}

impl OutputActivation {
    fn validate(&self) -> Result<()> {
        match *self {
            OutputActivation::Identity => Ok(()),
            OutputActivation::SigmoidScaled { lo, hi } => {
                if lo.is_finite() && hi.is_finite() && lo < hi {
                    Ok(())
                } else {
                    Err(NnError::InvalidParameter(format!(
                        "SigmoidScaled requires finite lo < hi, got lo={lo} hi={hi}"
                    )))
                }
            }
        }
    }
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn sigmoid_scaled(z: f64, lo: f64, hi: f64) -> f64 {
    let y = lo + (hi - lo) * sigmoid(z);
    // Saturated sigmoids round onto the bounds; keep the open interval.
    if y >= hi {
        hi.next_down()
    } else if y <= lo {
        lo.next_up()
    } else {
        y
    }
}

/// Multi-layer perceptron with ReLU hidden layers.
///
/// `weights[k]` has shape `layer_sizes[k + 1] x layer_sizes[k]`, and
/// `biases[k]` has length `layer_sizes[k + 1]`.
#[derive(Debug, Clone)]
pub struct DenseNet {
    layer_sizes: Vec<usize>,
    weights: Vec<Matrix2D>,
    biases: Vec<Vec<f64>>,
    hidden_activation: HiddenActivation,
    output_activation: OutputActivation,
    // Bumped on every parameter mutation; ties forward caches to a state.
    generation: u64,
}

impl PartialEq for DenseNet {
    fn eq(&self, other: &Self) -> bool {
        self.layer_sizes == other.layer_sizes
            && self.weights == other.weights
            && self.biases == other.biases
            && self.hidden_activation == other.hidden_activation
            && self.output_activation == other.output_activation
    }
}

/// Intermediate values from a forward pass over a batch of rows.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    generation: u64,
    layer_sizes: Vec<usize>,
    /// Activations entering each layer; `inputs[0]` is the network input.
    inputs: Vec<Matrix2D>,
    /// Pre-activations produced by each layer.
    pre_activations: Vec<Matrix2D>,
}

impl ForwardCache {
    pub fn batch_size(&self) -> usize {
        self.inputs[0].rows()
    }

    pub fn pre_activations(&self) -> &[Matrix2D] {
        &self.pre_activations
    }

    pub fn layer_inputs(&self) -> &[Matrix2D] {
        &self.inputs
    }
}

/// Parameter gradients laid out like the network parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct NetGrads {
    pub weights: Vec<Matrix2D>,
    pub biases: Vec<Vec<f64>>,
}

impl NetGrads {
    pub fn zeros_like(net: &DenseNet) -> Self {
        Self {
            weights: net
                .weights
                .iter()
                .map(|w| Matrix2D::zeros(w.rows(), w.cols()))
                .collect(),
            biases: net.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    /// Gradient tensors in declaration order: W0, b0, W1, b1, ...
    pub fn slices(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.data(), b.as_slice()])
            .collect()
    }

    fn slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.data_mut(), b.as_mut_slice()])
            .collect()
    }

    pub fn scale(&mut self, factor: f64) {
        for s in self.slices_mut() {
            s.iter_mut().for_each(|g| *g *= factor);
        }
    }

    pub fn l2_norm(&self) -> f64 {
        self.slices()
            .iter()
            .flat_map(|s| s.iter())
            .map(|g| g * g)
            .sum::<f64>()
            .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.slices().iter().all(|s| s.iter().all(|g| g.is_finite()))
    }
}

impl DenseNet {
    /// Uniform initialization in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]` for
    /// weights and biases alike.
    pub fn new(
        layer_sizes: &[usize],
        output_activation: OutputActivation,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let mut net = Self::zeros(layer_sizes, output_activation)?;
        for (w, b) in net.weights.iter_mut().zip(net.biases.iter_mut()) {
            let bound = 1.0 / (w.cols() as f64).sqrt();
            for x in w.data_mut() {
                *x = rng.random_range(-bound..=bound);
            }
            for x in b.iter_mut() {
                *x = rng.random_range(-bound..=bound);
            }
        }
        Ok(net)
    }

    pub fn zeros(layer_sizes: &[usize], output_activation: OutputActivation) -> Result<Self> {
        if layer_sizes.len() < 2 {
            return Err(NnError::InvalidParameter(
                "a network needs at least an input and an output layer".into(),
            ));
        }
        if layer_sizes.contains(&0) {
            return Err(NnError::InvalidParameter(format!(
                "layer sizes must be positive, got {layer_sizes:?}"
            )));
        }
        output_activation.validate()?;
        let weights = layer_sizes
            .windows(2)
            .map(|p| Matrix2D::zeros(p[1], p[0]))
            .collect();
        let biases = layer_sizes[1..].iter().map(|&n| vec![0.0; n]).collect();
        Ok(Self {
            layer_sizes: layer_sizes.to_vec(),
            weights,
            biases,
            hidden_activation: HiddenActivation::Relu,
            output_activation,
            generation: 0,
        })
    }

    /// Builds a network from explicit parameters, validating every shape.
    pub fn from_parts(
        weights: Vec<Matrix2D>,
        biases: Vec<Vec<f64>>,
        output_activation: OutputActivation,
    ) -> Result<Self> {
        if weights.is_empty() {
            return Err(NnError::InvalidParameter("no layers".into()));
        }
        check_len("DenseNet::from_parts biases", weights.len(), biases.len())?;
        let mut layer_sizes = vec![weights[0].cols()];
        for (k, (w, b)) in weights.iter().zip(&biases).enumerate() {
            check_len("DenseNet::from_parts fan-in", layer_sizes[k], w.cols())?;
            check_len("DenseNet::from_parts bias", w.rows(), b.len())?;
            layer_sizes.push(w.rows());
        }
        let mut net = Self::zeros(&layer_sizes, output_activation)?;
        net.weights = weights;
        net.biases = biases;
        if !net.is_finite() {
            return Err(NnError::NonFinite("DenseNet::from_parts parameters".into()));
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn input_size(&self) -> usize {
        self.layer_sizes[0]
    }

    pub fn output_size(&self) -> usize {
        *self.layer_sizes.last().expect("nonempty")
    }

    pub fn num_layers(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Matrix2D] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn hidden_activation(&self) -> HiddenActivation {
        self.hidden_activation
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn num_params(&self) -> usize {
        self.param_slices().iter().map(|s| s.len()).sum()
    }

    /// Mutable access to one layer's weights. Invalidates earlier caches.
    pub fn weight_mut(&mut self, layer: usize) -> &mut Matrix2D {
        self.generation += 1;
        &mut self.weights[layer]
    }

    /// Mutable access to one layer's biases. Invalidates earlier caches.
    pub fn bias_mut(&mut self, layer: usize) -> &mut [f64] {
        self.generation += 1;
        &mut self.biases[layer]
    }

    /// Parameter tensors in declaration order: W0, b0, W1, b1, ...
    pub fn param_slices(&self) -> Vec<&[f64]> {
        self.weights
            .iter()
            .zip(&self.biases)
            .flat_map(|(w, b)| [w.data(), b.as_slice()])
            .collect()
    }

    /// Mutable parameter tensors in declaration order. Invalidates caches.
    pub fn param_slices_mut(&mut self) -> Vec<&mut [f64]> {
        self.generation += 1;
        self.weights
            .iter_mut()
            .zip(self.biases.iter_mut())
            .flat_map(|(w, b)| [w.data_mut(), b.as_mut_slice()])
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.param_slices()
            .iter()
            .all(|s| s.iter().all(|x| x.is_finite()))
    }

    /// True when both networks have the same layer sizes and activations.
    pub fn same_topology(&self, other: &DenseNet) -> bool {
        self.layer_sizes == other.layer_sizes
            && self.hidden_activation == other.hidden_activation
            && self.output_activation == other.output_activation
    }

    pub fn forward(&self, input: &[f64]) -> Result<(Vec<f64>, ForwardCache)> {
        check_len("DenseNet::forward input", self.input_size(), input.len())?;
        let x = Matrix2D::from_vec(1, input.len(), input.to_vec())?;
        let (out, cache) = self.forward_batch(&x)?;
        Ok((out.into_vec(), cache))
    }

    /// Forward pass without keeping intermediates.
    pub fn predict(&self, input: &[f64]) -> Result<Vec<f64>> {
        self.forward(input).map(|(out, _)| out)
    }

    /// Forward pass over a batch, one sample per row.
    pub fn forward_batch(&self, input: &Matrix2D) -> Result<(Matrix2D, ForwardCache)> {
        check_len("DenseNet::forward_batch input", self.input_size(), input.cols())?;
        if !input.is_finite() {
            return Err(NnError::NonFinite("DenseNet forward input".into()));
        }
        let last = self.num_layers() - 1;
        let mut inputs = Vec::with_capacity(self.num_layers());
        let mut pre_activations = Vec::with_capacity(self.num_layers());
        let mut current = input.clone();
        for k in 0..self.num_layers() {
            let mut z = Matrix2D::matmul(&current, false, &self.weights[k], true)?;
            z.add_row_vector(&self.biases[k]);
            let mut a = z.clone();
            if k < last {
                a.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
            } else if let OutputActivation::SigmoidScaled { lo, hi } = self.output_activation {
                a.data_mut()
                    .iter_mut()
                    .for_each(|v| *v = sigmoid_scaled(*v, lo, hi));
            }
            inputs.push(current);
            pre_activations.push(z);
            current = a;
        }
        if !current.is_finite() {
            return Err(NnError::NonFinite("DenseNet forward output".into()));
        }
        Ok((
            current,
            ForwardCache {
                generation: self.generation,
                layer_sizes: self.layer_sizes.clone(),
                inputs,
                pre_activations,
            },
        ))
    }

    pub fn backward(&self, cache: &ForwardCache, upstream: &[f64]) -> Result<(NetGrads, Vec<f64>)> {
        if cache.batch_size() != 1 {
            return Err(NnError::DimensionMismatch {
                context: "DenseNet::backward cache batch size",
                expected: 1,
                actual: cache.batch_size(),
            });
        }
        let g = Matrix2D::from_vec(1, upstream.len(), upstream.to_vec())?;
        let (grads, input_grad) = self.backward_batch(cache, &g)?;
        Ok((grads, input_grad.into_vec()))
    }

    /// Back-propagates `upstream` (dLoss/dOutput per row). Parameter
    /// gradients are summed over the batch rows.
    pub fn backward_batch(
        &self,
        cache: &ForwardCache,
        upstream: &Matrix2D,
    ) -> Result<(NetGrads, Matrix2D)> {
        self.backprop(cache, upstream, true)
            .map(|(g, x)| (g.expect("requested"), x))
    }

    /// Input gradient only; skips parameter gradients.
    pub fn input_grad_batch(&self, cache: &ForwardCache, upstream: &Matrix2D) -> Result<Matrix2D> {
        self.backprop(cache, upstream, false).map(|(_, x)| x)
    }

    fn backprop(
        &self,
        cache: &ForwardCache,
        upstream: &Matrix2D,
        want_params: bool,
    ) -> Result<(Option<NetGrads>, Matrix2D)> {
        if cache.layer_sizes != self.layer_sizes {
            return Err(NnError::StaleCache(format!(
                "cache for layers {:?}, network has {:?}",
                cache.layer_sizes, self.layer_sizes
            )));
        }
        if cache.generation != self.generation {
            return Err(NnError::StaleCache(format!(
                "cache generation {}, network generation {}",
                cache.generation, self.generation
            )));
        }
        check_len("DenseNet::backward upstream width", self.output_size(), upstream.cols())?;
        check_len("DenseNet::backward upstream rows", cache.batch_size(), upstream.rows())?;
        if !upstream.is_finite() {
            return Err(NnError::NonFinite("DenseNet backward upstream gradient".into()));
        }

        let last = self.num_layers() - 1;
        let mut delta = upstream.clone();
        if let OutputActivation::SigmoidScaled { lo, hi } = self.output_activation {
            let z = &cache.pre_activations[last];
            for (d, &zv) in delta.data_mut().iter_mut().zip(z.data()) {
                let s = sigmoid(zv);
                *d *= (hi - lo) * s * (1.0 - s);
            }
        }

        let mut grads = want_params.then(|| NetGrads::zeros_like(self));
        for k in (0..=last).rev() {
            if let Some(g) = grads.as_mut() {
                g.weights[k] = Matrix2D::matmul(&delta, true, &cache.inputs[k], false)?;
                g.biases[k] = delta.column_sums();
            }
            let mut prev = Matrix2D::matmul(&delta, false, &self.weights[k], false)?;
            if k > 0 {
                let z = &cache.pre_activations[k - 1];
                for (p, &zv) in prev.data_mut().iter_mut().zip(z.data()) {
                    if zv <= 0.0 {
                        *p = 0.0;
                    }
                }
            }
            delta = prev;
        }
        Ok((grads, delta))
    }
}

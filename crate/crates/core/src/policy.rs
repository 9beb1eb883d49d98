use marl_nn::{
    softmax, softmax_backward, DenseNet, ForwardCache, Matrix2D, NetGrads, OutputActivation,
    SeededRng,
};

use crate::error::{check_dim, MarlError, Result};

/// Movement components are bounded to this interval.
pub const MOVEMENT_BOUNDS: (f64, f64) = (-1.0, 1.0);

/// Deterministic actor `mu(o)`.
///
/// A movement head squashes the network output into the movement bounds. A
/// message head treats the network output as logits and returns their
/// softmax at `comm_temperature`.
#[derive(Debug, Clone, PartialEq)]
pub struct Policy {
    net: DenseNet,
    movement_dim: usize,
    comm_dim: usize,
    comm_temperature: f64,
}

pub struct PolicyCache {
    net: ForwardCache,
    probs: Option<Matrix2D>,
}

impl Policy {
    pub fn new(
        obs_dim: usize,
        movement_dim: usize,
        comm_dim: usize,
        hidden: &[usize],
        comm_temperature: f64,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let out = Self::head(movement_dim, comm_dim)?;
        let mut sizes = vec![obs_dim];
        sizes.extend_from_slice(hidden);
        sizes.push(movement_dim + comm_dim);
        let net = DenseNet::new(&sizes, out, rng)?;
        Self::from_net(net, movement_dim, comm_dim, comm_temperature)
    }

    pub fn from_net(
        net: DenseNet,
        movement_dim: usize,
        comm_dim: usize,
        comm_temperature: f64,
    ) -> Result<Self> {
        let expected = Self::head(movement_dim, comm_dim)?;
        if net.output_activation() != expected {
            return Err(MarlError::VariantMismatch(format!(
                "policy network output {:?} does not suit a head with {movement_dim} movement and {comm_dim} message components",
                net.output_activation()
            )));
        }
        check_dim("policy output width", movement_dim + comm_dim, net.output_size())?;
        if !(comm_temperature > 0.0) {
            return Err(MarlError::InvalidHyperParams(format!(
                "comm_temperature must be positive, got {comm_temperature}"
            )));
        }
        Ok(Self {
            net,
            movement_dim,
            comm_dim,
            comm_temperature,
        })
    }

    fn head(movement_dim: usize, comm_dim: usize) -> Result<OutputActivation> {
        match (movement_dim, comm_dim) {
            (0, 0) => Err(MarlError::Unsupported("agent without action components".into())),
            (_, 0) => Ok(OutputActivation::SigmoidScaled {
                lo: MOVEMENT_BOUNDS.0,
                hi: MOVEMENT_BOUNDS.1,
            }),
            (0, _) => Ok(OutputActivation::Identity),
            _ => Err(MarlError::Unsupported(
                "agents that both move and speak are not supported".into(),
            )),
        }
    }

    pub fn net(&self) -> &DenseNet {
        &self.net
    }

    pub fn net_mut(&mut self) -> &mut DenseNet {
        &mut self.net
    }

    pub fn obs_dim(&self) -> usize {
        self.net.input_size()
    }

    pub fn action_dim(&self) -> usize {
        self.movement_dim + self.comm_dim
    }

    pub fn movement_dim(&self) -> usize {
        self.movement_dim
    }

    pub fn comm_dim(&self) -> usize {
        self.comm_dim
    }

    pub fn comm_temperature(&self) -> f64 {
        self.comm_temperature
    }

    /// Raw network output: squashed movement or message logits.
    pub fn logits(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(self.net.predict(obs)?)
    }

    pub fn act(&self, obs: &[f64]) -> Result<Vec<f64>> {
        let out = self.net.predict(obs)?;
        if self.comm_dim > 0 {
            Ok(softmax(&out, self.comm_temperature)?)
        } else {
            Ok(out)
        }
    }

    pub fn act_batch(&self, obs: &Matrix2D) -> Result<(Matrix2D, PolicyCache)> {
        let (out, net) = self.net.forward_batch(obs)?;
        if self.comm_dim == 0 {
            return Ok((out, PolicyCache { net, probs: None }));
        }
        let mut probs = Matrix2D::zeros(out.rows(), out.cols());
        for r in 0..out.rows() {
            let p = softmax(out.row(r), self.comm_temperature)?;
            probs.row_mut(r).copy_from_slice(&p);
        }
        Ok((
            probs.clone(),
            PolicyCache {
                net,
                probs: Some(probs),
            },
        ))
    }

    /// Parameter gradient of `sum_rows <d_action, mu(o)>`.
    pub fn backward_batch(&self, cache: &PolicyCache, d_action: &Matrix2D) -> Result<NetGrads> {
        let upstream = match &cache.probs {
            None => d_action.clone(),
            Some(probs) => {
                check_dim("policy backward rows", probs.rows(), d_action.rows())?;
                check_dim("policy backward width", probs.cols(), d_action.cols())?;
                let mut g = Matrix2D::zeros(probs.rows(), probs.cols());
                for r in 0..probs.rows() {
                    let row =
                        softmax_backward(probs.row(r), self.comm_temperature, d_action.row(r))?;
                    g.row_mut(r).copy_from_slice(&row);
                }
                g
            }
        };
        Ok(self.net.backward_batch(&cache.net, &upstream)?.0)
    }
}

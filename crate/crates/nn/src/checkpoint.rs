//! Binary network checkpoints.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! magic      4 bytes  "MTD3"
//! version    u32      currently 1
//! n_sizes    u32      number of entries in layer_sizes
//! sizes      u32 x n_sizes
//! out_tag    u32      0 = Identity, 1 = SigmoidScaled
//! out_lo     f64      (0 for Identity)
//! out_hi     f64      (0 for Identity)
//! params     f64 x .. W0 (row-major), b0, W1, b1, ...
//! has_adam   u32      0 or 1
//! [adam]     t u64, beta1 f64, beta2 f64, eps f64, m tensors, v tensors
//! ```

use crate::adam::AdamState;
use crate::error::{NnError, Result};
use crate::net::{DenseNet, OutputActivation};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"MTD3";
pub const CHECKPOINT_VERSION: u32 = 1;

pub fn encode_net(net: &DenseNet, adam: Option<&AdamState>) -> Result<Vec<u8>> {
    let mut out = Vec::with_capacity(64 + 16 * net.num_params());
    out.extend_from_slice(CHECKPOINT_MAGIC);
    put_u32(&mut out, CHECKPOINT_VERSION);
    put_u32(&mut out, net.layer_sizes().len() as u32);
    for &s in net.layer_sizes() {
        put_u32(&mut out, s as u32);
    }
    match net.output_activation() {
        OutputActivation::Identity => {
            put_u32(&mut out, 0);
            put_f64(&mut out, 0.0);
            put_f64(&mut out, 0.0);
        }
        OutputActivation::SigmoidScaled { lo, hi } => {
            put_u32(&mut out, 1);
            put_f64(&mut out, lo);
            put_f64(&mut out, hi);
        }
    }
    for slice in net.param_slices() {
        slice.iter().for_each(|&x| put_f64(&mut out, x));
    }
    match adam {
        None => put_u32(&mut out, 0),
        Some(state) => {
            let lens: Vec<usize> = net.param_slices().iter().map(|s| s.len()).collect();
            let state_lens: Vec<usize> = state.m.iter().map(Vec::len).collect();
            if lens != state_lens || state.v.iter().map(Vec::len).ne(lens.iter().copied()) {
                return Err(NnError::Checkpoint(
                    "Adam state shapes do not mirror the network".into(),
                ));
            }
            put_u32(&mut out, 1);
            out.extend_from_slice(&state.t.to_le_bytes());
            put_f64(&mut out, state.beta1);
            put_f64(&mut out, state.beta2);
            put_f64(&mut out, state.eps);
            for tensor in state.m.iter().chain(&state.v) {
                tensor.iter().for_each(|&x| put_f64(&mut out, x));
            }
        }
    }
    Ok(out)
}

/// Decodes one checkpoint record, returning it and the bytes consumed.
pub fn decode_net(bytes: &[u8]) -> Result<(DenseNet, Option<AdamState>, usize)> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != CHECKPOINT_MAGIC {
        return Err(NnError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CHECKPOINT_VERSION {
        return Err(NnError::Checkpoint(format!("unsupported version {version}")));
    }
    let n_sizes = r.u32()? as usize;
    let sizes = (0..n_sizes)
        .map(|_| r.u32().map(|s| s as usize))
        .collect::<Result<Vec<_>>>()?;
    let tag = r.u32()?;
    let (lo, hi) = (r.f64()?, r.f64()?);
    let activation = match tag {
        0 => OutputActivation::Identity,
        1 => OutputActivation::SigmoidScaled { lo, hi },
        other => return Err(NnError::Checkpoint(format!("unknown output tag {other}"))),
    };
    let mut net = DenseNet::zeros(&sizes, activation)?;
    for slice in net.param_slices_mut() {
        for x in slice.iter_mut() {
            *x = r.f64()?;
        }
    }
    let lens: Vec<usize> = net.param_slices().iter().map(|s| s.len()).collect();
    let adam = match r.u32()? {
        0 => None,
        1 => {
            let t = u64::from_le_bytes(r.take(8)?.try_into().expect("8 bytes"));
            let mut state = AdamState::new(&lens);
            state.t = t;
            state.beta1 = r.f64()?;
            state.beta2 = r.f64()?;
            state.eps = r.f64()?;
            for tensor in state.m.iter_mut().chain(state.v.iter_mut()) {
                for x in tensor.iter_mut() {
                    *x = r.f64()?;
                }
            }
            Some(state)
        }
        other => return Err(NnError::Checkpoint(format!("bad Adam flag {other}"))),
    };
    Ok((net, adam, r.pos))
}

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_f64(out: &mut Vec<u8>, v: f64) {
    out.extend_from_slice(&v.to_le_bytes());
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(NnError::Checkpoint(format!(
                "truncated at byte {} (need {n} more)",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }
}

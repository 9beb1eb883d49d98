use marl_nn::{decode_net, encode_net, AdamState, DenseNet};

use crate::bundle::{AgentBundle, UpdateClock};
use crate::error::{MarlError, Result};
use crate::hyper::Algorithm;
use crate::policy::Policy;

const MAGIC: &[u8; 4] = b"MBDL";
const VERSION: u32 = 1;

fn put_u32(out: &mut Vec<u8>, v: u32) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn put_u64(out: &mut Vec<u8>, v: u64) {
    out.extend_from_slice(&v.to_le_bytes());
}

fn algorithm_tag(a: Algorithm) -> u32 {
    match a {
        Algorithm::Maddpg => 0,
        Algorithm::Matd3 => 1,
        Algorithm::IlTd3 => 2,
    }
}

/// Serializes a bundle with its targets, optimizer state and clock.
pub fn encode_bundle(b: &AgentBundle) -> Result<Vec<u8>> {
    let mut out = MAGIC.to_vec();
    put_u32(&mut out, VERSION);
    put_u32(&mut out, algorithm_tag(b.algorithm));
    put_u32(&mut out, b.index as u32);
    put_u32(&mut out, b.n_agents() as u32);
    for (&o, &a) in b.obs_dims().iter().zip(b.action_dims()) {
        put_u32(&mut out, o as u32);
        put_u32(&mut out, a as u32);
    }
    put_u32(&mut out, b.policy.movement_dim() as u32);
    put_u32(&mut out, b.policy.comm_dim() as u32);
    out.extend_from_slice(&b.policy.comm_temperature().to_le_bytes());
    put_u64(&mut out, b.clock.delay());
    put_u64(&mut out, b.clock.critic_updates());
    put_u64(&mut out, b.clock.policy_updates());
    put_u64(&mut out, b.clock.target_updates());
    put_u32(&mut out, b.critics.len() as u32);
    out.extend(encode_net(b.policy.net(), Some(&b.policy_adam))?);
    out.extend(encode_net(b.target_policy.net(), None)?);
    for ((c, t), adam) in b.critics.iter().zip(&b.target_critics).zip(&b.critic_adams) {
        out.extend(encode_net(c, Some(adam))?);
        out.extend(encode_net(t, None)?);
    }
    Ok(out)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| MarlError::Checkpoint(format!("truncated at byte {}", self.pos)))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn net(&mut self) -> Result<(DenseNet, Option<AdamState>)> {
        let (net, adam, used) = decode_net(&self.bytes[self.pos..])?;
        self.pos += used;
        Ok((net, adam))
    }

    fn trained_net(&mut self) -> Result<(DenseNet, AdamState)> {
        match self.net()? {
            (net, Some(adam)) => Ok((net, adam)),
            _ => Err(MarlError::Checkpoint("optimizer state missing".into())),
        }
    }
}

pub fn decode_bundle(bytes: &[u8]) -> Result<AgentBundle> {
    let mut r = Reader { bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(MarlError::Checkpoint("bad magic".into()));
    }
    let version = r.u32()?;
    if version != VERSION {
        return Err(MarlError::Checkpoint(format!("unsupported version {version}")));
    }
    let algorithm = match r.u32()? {
        0 => Algorithm::Maddpg,
        1 => Algorithm::Matd3,
        2 => Algorithm::IlTd3,
        t => return Err(MarlError::Checkpoint(format!("unknown algorithm tag {t}"))),
    };
    let index = r.u32()? as usize;
    let n_agents = r.u32()? as usize;
    if index >= n_agents {
        return Err(MarlError::Checkpoint(format!("agent {index} of {n_agents}")));
    }
    let mut obs_dims = Vec::with_capacity(n_agents);
    let mut action_dims = Vec::with_capacity(n_agents);
    for _ in 0..n_agents {
        obs_dims.push(r.u32()? as usize);
        action_dims.push(r.u32()? as usize);
    }
    let movement_dim = r.u32()? as usize;
    let comm_dim = r.u32()? as usize;
    let temperature = r.f64()?;
    let clock = UpdateClock::restore(r.u64()?, r.u64()?, r.u64()?, r.u64()?)?;
    let n_critics = r.u32()? as usize;
    let (policy_net, policy_adam) = r.trained_net()?;
    let (target_net, _) = r.net()?;
    let mut critics = Vec::with_capacity(n_critics);
    let mut targets = Vec::with_capacity(n_critics);
    let mut adams = Vec::with_capacity(n_critics);
    for _ in 0..n_critics {
        let (c, a) = r.trained_net()?;
        critics.push(c);
        adams.push(a);
        targets.push(r.net()?.0);
    }
    if r.pos != bytes.len() {
        return Err(MarlError::Checkpoint(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    let policy = Policy::from_net(policy_net, movement_dim, comm_dim, temperature)?;
    let target_policy = Policy::from_net(target_net, movement_dim, comm_dim, temperature)?;
    let mut b = AgentBundle::from_parts(
        index,
        algorithm,
        policy,
        critics,
        obs_dims,
        action_dims,
        clock.delay(),
    )?;
    if !targets.iter().zip(&b.critics).all(|(t, c)| t.same_topology(c))
        || !target_policy.net().same_topology(b.policy.net())
    {
        return Err(MarlError::Checkpoint("target topology differs from online network".into()));
    }
    b.target_policy = target_policy;
    b.target_critics = targets;
    b.policy_adam = policy_adam;
    b.critic_adams = adams;
    b.clock = clock;
    Ok(b)
}

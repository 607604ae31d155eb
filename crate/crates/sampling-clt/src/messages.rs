//! Backward messages: rescaled partial products from the right boundary,
//! `m_0 = v`, `m_{p+1} = T_p m_p`. Message `m_p` summarizes everything below
//! slot `p`, so the conditional law at slot `p` given slot `p+1` is
//! proportional to `K_p[a, ·] ⊙ m_p`.

use transfer_chain::{ChainError, ChainModel, Scaled};

use crate::error::SamplingError;

pub fn backward_messages(chain: &ChainModel) -> Result<Vec<Scaled>, SamplingError> {
    let mut msgs = Vec::with_capacity(chain.len() + 1);
    msgs.push(Scaled::plain(chain.right.clone()));
    for (stage, op) in chain.ops.iter().enumerate() {
        let prev = &msgs[stage];
        let (vec, log_scale) =
            transfer_chain::apply_rescaled(op, &prev.vec, prev.log_scale, stage)
                .map_err(|e: ChainError| SamplingError::from(e))?;
        msgs.push(Scaled { vec, log_scale });
    }
    Ok(msgs)
}

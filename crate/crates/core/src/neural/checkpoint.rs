//! Versioned binary format for network parameters.
//!
//! `DNCFRNET`, version, architecture tag, shape, then every weight as little-endian `f64`
//! regardless of the in-memory scalar.

use std::io::{Read, Write};

use num_traits::Float;

use super::network::{Architecture, CellKind, Network, NetworkShape};
use crate::error::CheckpointError;

const MAGIC: &[u8; 8] = b"DNCFRNET";
const VERSION: u32 = 1;

fn arch_tag(arch: Architecture) -> (u8, u8, u32) {
    match arch {
        Architecture::Recurrent { cell, attention } => {
            let tag = match cell {
                CellKind::Rnn => 0,
                CellKind::Gru => 1,
                CellKind::Lstm => 2,
            };
            (tag, attention as u8, 0)
        }
        Architecture::Fc { max_len } => (3, 0, max_len as u32),
    }
}

pub fn write_network<T: Float>(net: &Network<T>, mut out: impl Write) -> Result<(), CheckpointError> {
    let s = net.shape();
    let (tag, attention, max_len) = arch_tag(s.arch);
    out.write_all(MAGIC)?;
    out.write_all(&VERSION.to_le_bytes())?;
    out.write_all(&[tag, attention])?;
    for v in [max_len, s.input as u32, s.embed as u32, s.hidden.unwrap_or(0) as u32, s.output as u32, net.num_params() as u32] {
        out.write_all(&v.to_le_bytes())?;
    }
    for p in net.params() {
        out.write_all(&p.to_f64().expect("finite weight").to_le_bytes())?;
    }
    Ok(())
}

pub fn read_network<T: Float>(mut input: impl Read) -> Result<Network<T>, CheckpointError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(CheckpointError::BadMagic { expected: "DNCFRNET" });
    }
    let mut u32_buf = [0u8; 4];
    let mut read_u32 = |input: &mut dyn Read| -> std::io::Result<u32> {
        input.read_exact(&mut u32_buf)?;
        Ok(u32::from_le_bytes(u32_buf))
    };
    let version = read_u32(&mut input)?;
    if version != VERSION {
        return Err(CheckpointError::Version(version));
    }
    let mut tags = [0u8; 2];
    input.read_exact(&mut tags)?;
    let max_len = read_u32(&mut input)? as usize;
    let arch = match tags[0] {
        0..=2 => Architecture::Recurrent {
            cell: [CellKind::Rnn, CellKind::Gru, CellKind::Lstm][tags[0] as usize],
            attention: tags[1] != 0,
        },
        3 => Architecture::Fc { max_len },
        t => return Err(CheckpointError::Corrupt(format!("architecture tag {}", t))),
    };
    let input_w = read_u32(&mut input)? as usize;
    let embed = read_u32(&mut input)? as usize;
    let hidden = read_u32(&mut input)? as usize;
    let output = read_u32(&mut input)? as usize;
    let count = read_u32(&mut input)? as usize;
    let mut shape = NetworkShape::new(arch, input_w, embed, output);
    if hidden > 0 {
        shape = shape.with_hidden(hidden);
    }
    if shape.num_params() != count {
        return Err(CheckpointError::Corrupt(format!("{} weights for a shape with {}", count, shape.num_params())));
    }
    let mut params = Vec::with_capacity(count);
    let mut buf = [0u8; 8];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        params.push(T::from(f64::from_le_bytes(buf)).expect("representable"));
    }
    Ok(Network::from_params(shape, params))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn round_trip() {
        for arch in [
            Architecture::LSTM_ATTENTION,
            Architecture::Recurrent { cell: CellKind::Gru, attention: false },
            Architecture::Fc { max_len: 6 },
        ] {
            let shape = NetworkShape::new(arch, 5, 4, 3).with_hidden(2);
            let net = Network::<f64>::init(shape, &mut ChaCha8Rng::seed_from_u64(1));
            let mut bytes = Vec::new();
            write_network(&net, &mut bytes).unwrap();
            assert_eq!(read_network::<f64>(bytes.as_slice()).unwrap(), net);
        }
    }

    #[test]
    fn rejects_other_files() {
        assert!(matches!(read_network::<f64>(&b"DNCFRTAB\x01\0\0\0"[..]), Err(CheckpointError::BadMagic { .. })));
    }
}

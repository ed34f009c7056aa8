//! Versioned binary checkpoints.
//!
//! Layout: magic `SSNC`, u32 version, four u32 layer shapes (input, hidden1,
//! hidden2, actions), u64 parameter count, then the parameters as
//! little-endian f64s.

use std::fs;
use std::path::Path;

use crate::error::{Result, SimError};
use crate::scalar::Scalar;

use super::net::{NetDims, PolicyValueNet};

const MAGIC: &[u8; 4] = b"SSNC";
const VERSION: u32 = 1;

pub fn save<T: Scalar>(net: &PolicyValueNet<T>, path: &Path) -> Result<()> {
    let dims = net.dims();
    let mut bytes = Vec::with_capacity(4 + 4 + 16 + 8 + net.num_params() * 8);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&VERSION.to_le_bytes());
    for dim in [dims.input, dims.hidden1, dims.hidden2, dims.actions] {
        bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    }
    bytes.extend_from_slice(&(net.num_params() as u64).to_le_bytes());
    for &p in net.params() {
        bytes.extend_from_slice(&p.to_real().to_le_bytes());
    }
    fs::write(path, bytes)?;
    Ok(())
}

pub fn load<T: Scalar>(path: &Path) -> Result<PolicyValueNet<T>> {
    let bytes = fs::read(path)?;
    let mut cursor = 0usize;
    let take = |cursor: &mut usize, n: usize| -> Result<&[u8]> {
        let slice = bytes
            .get(*cursor..*cursor + n)
            .ok_or_else(|| SimError::Checkpoint("truncated file".into()))?;
        *cursor += n;
        Ok(slice)
    };

    if take(&mut cursor, 4)? != MAGIC {
        return Err(SimError::Checkpoint("bad magic, not a checkpoint".into()));
    }
    let version = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap());
    if version != VERSION {
        return Err(SimError::Checkpoint(format!(
            "unsupported version {version}, expected {VERSION}"
        )));
    }
    let mut dims = [0u32; 4];
    for d in &mut dims {
        *d = u32::from_le_bytes(take(&mut cursor, 4)?.try_into().unwrap());
    }
    let dims = NetDims {
        input: dims[0] as usize,
        hidden1: dims[1] as usize,
        hidden2: dims[2] as usize,
        actions: dims[3] as usize,
    };
    let count = u64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap()) as usize;
    if count != dims.num_params() {
        return Err(SimError::Checkpoint(format!(
            "parameter count {count} does not match shapes ({} expected)",
            dims.num_params()
        )));
    }
    let mut params = Vec::with_capacity(count);
    for _ in 0..count {
        let v = f64::from_le_bytes(take(&mut cursor, 8)?.try_into().unwrap());
        params.push(T::from_real(v));
    }
    if cursor != bytes.len() {
        return Err(SimError::Checkpoint("trailing bytes".into()));
    }
    PolicyValueNet::from_params(dims, params)
}

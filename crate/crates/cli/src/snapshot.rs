//! State snapshots: a 40-byte header `d: u64, N: u64, L: f64, rho_star: f64,
//! t: f64`, then `a` and the velocity components in row-major lattice order,
//! all little-endian.

use std::io::{Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use dampflow::dynamics::State;
use dampflow::spectral::{Grid, RealField};

pub const HEADER_BYTES: usize = 40;

pub fn write(w: &mut dyn Write, s: &State) -> Result<()> {
    let g = s.grid();
    let mut buf = Vec::with_capacity(HEADER_BYTES + 8 * (s.a().data().len() + s.u().data().len()));
    buf.extend_from_slice(&(g.dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for v in [g.length(), s.rho_star(), s.t()] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in s.a().data().iter().chain(s.u().data()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read(r: &mut dyn Read) -> Result<State> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < HEADER_BYTES {
        bail!("snapshot truncated: {} bytes, header needs {HEADER_BYTES}", bytes.len());
    }
    let word = |i: usize| -> [u8; 8] { bytes[8 * i..8 * i + 8].try_into().expect("8 bytes") };
    let d = u64::from_le_bytes(word(0));
    let n = u64::from_le_bytes(word(1));
    let (length, rho_star, t) = (f64::from_le_bytes(word(2)), f64::from_le_bytes(word(3)), f64::from_le_bytes(word(4)));
    let grid = Grid::new(d as usize, n as usize, length).context("snapshot header")?;
    let p = grid.points();
    let expected = HEADER_BYTES + 8 * (1 + grid.dim()) * p;
    if bytes.len() != expected {
        bail!(
            "snapshot payload mismatch: header d = {d}, N = {n} needs {expected} bytes, file has {}",
            bytes.len()
        );
    }
    let values: Vec<f64> = bytes[HEADER_BYTES..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    let a = RealField::new(grid, 1, values[..p].to_vec())?;
    let u = RealField::new(grid, grid.dim(), values[p..].to_vec())?;
    Ok(State::new(a, u, t, rho_star)?)
}

pub fn save(path: &Path, s: &State) -> Result<()> {
    let mut f = std::fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write(&mut f, s)
}

pub fn load(path: &Path) -> Result<State> {
    let mut f = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read(&mut f).with_context(|| format!("reading snapshot {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> State {
        let grid = Grid::new(2, 8, 3.5).unwrap();
        let a = RealField::from_fn(grid, 1, |_, x| (x[0] * 1.3).sin() / 3.0);
        let u = RealField::from_fn(grid, 2, |c, x| x[1] * 0.1 + c as f64 * 1e-300);
        State::new(a, u, 1.25, 0.7).unwrap()
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let s = sample();
        let mut buf = Vec::new();
        write(&mut buf, &s).unwrap();
        assert_eq!(buf.len(), HEADER_BYTES + 8 * 3 * 64);
        let back = read(&mut buf.as_slice()).unwrap();
        assert_eq!(back, s);
        let bits = |st: &State| st.u().data().iter().map(|v| v.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&back), bits(&s));
    }

    #[test]
    fn header_layout() {
        let mut buf = Vec::new();
        write(&mut buf, &sample()).unwrap();
        assert_eq!(&buf[..8], &2u64.to_le_bytes());
        assert_eq!(&buf[8..16], &8u64.to_le_bytes());
        assert_eq!(&buf[16..24], &3.5f64.to_le_bytes());
        assert_eq!(&buf[32..40], &1.25f64.to_le_bytes());
    }

    #[test]
    fn inconsistent_files_rejected() {
        let mut buf = Vec::new();
        write(&mut buf, &sample()).unwrap();
        assert!(read(&mut &buf[..buf.len() - 8]).is_err());
        assert!(read(&mut &buf[..20]).is_err());
        let mut bad = buf.clone();
        bad[..8].copy_from_slice(&3u64.to_le_bytes());
        assert!(format!("{:#}", read(&mut bad.as_slice()).unwrap_err()).contains("mismatch"));
    }
}

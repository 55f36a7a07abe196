use std::io::Read;
use std::path::Path;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::error::{Result, TurbError};
use crate::field::{ScalarField, SpectralField};
use crate::grid::WaveGrid;
use crate::integrator::{SimState, Snapshot};

const MAGIC: &[u8; 4] = b"TKSC";
const VERSION: u16 = 1;

// CRC-32 (IEEE reflected, polynomial 0xEDB88320)
const fn crc_table() -> [u32; 256] {
    let mut table = [0u32; 256];
    let mut i = 0;
    while i < 256 {
        let mut c = i as u32;
        let mut b = 0;
        while b < 8 {
            c = if c & 1 != 0 {
                0xEDB8_8320 ^ (c >> 1)
            } else {
                c >> 1
            };
            b += 1;
        }
        table[i] = c;
        i += 1;
    }
    table
}

static CRC_TABLE: [u32; 256] = crc_table();

pub fn crc32(data: &[u8]) -> u32 {
    let mut c = 0xFFFF_FFFFu32;
    for &b in data {
        c = CRC_TABLE[((c ^ b as u32) & 0xFF) as usize] ^ (c >> 8);
    }
    c ^ 0xFFFF_FFFF
}

fn push_field(buf: &mut Vec<u8>, f: &SpectralField) {
    for c in 0..f.ncomp() {
        for v in f.comp(c) {
            buf.extend_from_slice(&v.re.to_le_bytes());
            buf.extend_from_slice(&v.im.to_le_bytes());
        }
    }
}

fn encode(
    u: &SpectralField,
    z: &SpectralField,
    nu: f64,
    t: f64,
    step_count: u64,
    rng: Option<&ChaCha12Rng>,
    p: Option<&ScalarField>,
) -> Vec<u8> {
    let grid = u.grid();
    let mut buf = Vec::with_capacity(64 + 32 * grid.len() * u.ncomp());
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.push(grid.dim() as u8);
    buf.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    buf.extend_from_slice(&nu.to_le_bytes());
    buf.extend_from_slice(&t.to_le_bytes());
    buf.extend_from_slice(&step_count.to_le_bytes());
    match rng {
        Some(r) => {
            let mut blob = Vec::with_capacity(56);
            blob.extend_from_slice(&r.get_seed());
            blob.extend_from_slice(&r.get_word_pos().to_le_bytes());
            blob.extend_from_slice(&r.get_stream().to_le_bytes());
            buf.extend_from_slice(&(blob.len() as u32).to_le_bytes());
            buf.extend_from_slice(&blob);
        }
        None => buf.extend_from_slice(&0u32.to_le_bytes()),
    }
    push_field(&mut buf, u);
    push_field(&mut buf, z);
    match p {
        Some(f) => {
            buf.push(1);
            for v in f.coeffs() {
                buf.extend_from_slice(&v.re.to_le_bytes());
                buf.extend_from_slice(&v.im.to_le_bytes());
            }
        }
        None => buf.push(0),
    }
    let crc = crc32(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Decoded {
    nu: f64,
    t: f64,
    step_count: u64,
    rng: Option<ChaCha12Rng>,
    u: SpectralField,
    z: SpectralField,
    p: Option<ScalarField>,
}

struct Reader<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.data.len() {
            return Err(TurbError::BadCheckpoint(format!(
                "truncated: wanted {} bytes at offset {}, file has {}",
                n,
                self.pos,
                self.data.len()
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn decode(data: &[u8]) -> Result<Decoded> {
    if data.len() < 4 + 2 + 1 + 4 + 24 + 4 + 1 + 4 {
        return Err(TurbError::BadCheckpoint("file too short".into()));
    }
    let body = &data[..data.len() - 4];
    let stored = u32::from_le_bytes(data[data.len() - 4..].try_into().unwrap());
    let computed = crc32(body);
    if stored != computed {
        return Err(TurbError::BadCheckpoint(format!(
            "checksum mismatch: stored {stored:#010x}, computed {computed:#010x}"
        )));
    }

    let mut r = Reader { data: body, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(TurbError::BadCheckpoint("bad magic".into()));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(TurbError::BadCheckpoint(format!(
            "unsupported format version {version}"
        )));
    }
    let dim = r.take(1)?[0] as usize;
    let n = r.u32()? as usize;
    let grid = WaveGrid::new(dim, n)?;
    let nu = r.f64()?;
    let t = r.f64()?;
    let step_count = r.u64()?;

    let blob_len = r.u32()? as usize;
    let rng = if blob_len == 0 {
        None
    } else if blob_len == 56 {
        let blob = r.take(56)?;
        let seed: [u8; 32] = blob[..32].try_into().unwrap();
        let word_pos = u128::from_le_bytes(blob[32..48].try_into().unwrap());
        let stream = u64::from_le_bytes(blob[48..56].try_into().unwrap());
        let mut rng = ChaCha12Rng::from_seed(seed);
        rng.set_stream(stream);
        rng.set_word_pos(word_pos);
        Some(rng)
    } else {
        return Err(TurbError::BadCheckpoint(format!(
            "unexpected rng blob length {blob_len}"
        )));
    };

    let ncomp = grid.dim();
    let read_field = |r: &mut Reader| -> Result<SpectralField> {
        let mut comps = Vec::with_capacity(ncomp);
        for _ in 0..ncomp {
            let raw = r.take(16 * grid.len())?;
            let mut comp = Vec::with_capacity(grid.len());
            for chunk in raw.chunks_exact(16) {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                comp.push(Complex64::new(re, im));
            }
            comps.push(comp);
        }
        SpectralField::from_components(grid, comps)
    };
    let u = read_field(&mut r)?;
    let z = read_field(&mut r)?;
    let p = match r.take(1)?[0] {
        0 => None,
        1 => {
            let raw = r.take(16 * grid.len())?;
            let mut coeffs = Vec::with_capacity(grid.len());
            for chunk in raw.chunks_exact(16) {
                let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
                let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
                coeffs.push(Complex64::new(re, im));
            }
            Some(ScalarField::from_coeffs(grid, coeffs)?)
        }
        flag => {
            return Err(TurbError::BadCheckpoint(format!(
                "unexpected pressure flag {flag}"
            )))
        }
    };
    if r.pos != body.len() {
        return Err(TurbError::BadCheckpoint(format!(
            "{} trailing bytes",
            body.len() - r.pos
        )));
    }
    Ok(Decoded {
        nu,
        t,
        step_count,
        rng,
        u,
        z,
        p,
    })
}

pub fn save_checkpoint(path: &Path, state: &SimState, nu: f64) -> Result<()> {
    let bytes = encode(
        &state.u,
        &state.z,
        nu,
        state.t,
        state.step_count,
        Some(&state.rng),
        None,
    );
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Restores a full simulation state; returns the viscosity stored with it.
pub fn load_checkpoint(path: &Path) -> Result<(SimState, f64)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let d = decode(&data)?;
    let rng = d.rng.ok_or_else(|| {
        TurbError::BadCheckpoint("no rng state (this is a snapshot, not a checkpoint)".into())
    })?;
    Ok((
        SimState {
            u: d.u,
            z: d.z,
            t: d.t,
            step_count: d.step_count,
            rng,
        },
        d.nu,
    ))
}

pub fn save_snapshot(path: &Path, snap: &Snapshot, nu: f64) -> Result<()> {
    let bytes = encode(
        &snap.u,
        &snap.z,
        nu,
        snap.t,
        snap.step_count,
        None,
        snap.p.as_ref(),
    );
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Loads a snapshot; the pressure field comes back only if it was saved.
pub fn load_snapshot(path: &Path) -> Result<(Snapshot, f64)> {
    let mut data = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut data)?;
    let d = decode(&data)?;
    Ok((
        Snapshot {
            u: d.u,
            z: d.z,
            t: d.t,
            step_count: d.step_count,
            p: d.p,
        },
        d.nu,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fft::FftEngine;
    use crate::forcing::build_noise_spectrum;
    use crate::integrator::{initial_state, step, SimConfig};

    fn forced_cfg(seed: u64) -> SimConfig {
        SimConfig {
            nu: 0.4,
            n: 8,
            shell: [1, 2],
            epsilon: 0.8,
            drift_scale: 1.0,
            dt: 0.005,
            t_burnin: 0.0,
            t_sample: 0.0,
            snapshot_stride: 1,
            seed,
            cfl_factor: 0.5,
        }
    }

    #[test]
    fn crc_reference_vector() {
        assert_eq!(crc32(b"123456789"), 0xCBF4_3926);
        assert_eq!(crc32(b""), 0);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let cfg = forced_cfg(31);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let mut eng = FftEngine::new(grid);
        let mut st = initial_state(&cfg, &spec, None);
        for _ in 0..37 {
            step(&mut st, &spec, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.tksc");
        save_checkpoint(&path, &st, cfg.nu).unwrap();
        let (loaded, nu) = load_checkpoint(&path).unwrap();
        assert_eq!(nu.to_bits(), cfg.nu.to_bits());
        assert_eq!(loaded.t.to_bits(), st.t.to_bits());
        assert_eq!(loaded.step_count, st.step_count);
        for c in 0..3 {
            for (a, b) in loaded.u.comp(c).iter().zip(st.u.comp(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
            for (a, b) in loaded.z.comp(c).iter().zip(st.z.comp(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
        assert_eq!(loaded.rng, st.rng);
    }

    #[test]
    fn resume_equals_uninterrupted() {
        let cfg = forced_cfg(77);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let mut eng = FftEngine::new(grid);

        // uninterrupted: 60 + 100 steps
        let mut full = initial_state(&cfg, &spec, None);
        for _ in 0..160 {
            step(&mut full, &spec, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng).unwrap();
        }

        // interrupted at 60
        let mut first = initial_state(&cfg, &spec, None);
        for _ in 0..60 {
            step(&mut first, &spec, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mid.tksc");
        save_checkpoint(&path, &first, cfg.nu).unwrap();
        let (mut resumed, nu) = load_checkpoint(&path).unwrap();
        for _ in 0..100 {
            step(&mut resumed, &spec, nu, cfg.dt, cfg.cfl_factor, &mut eng).unwrap();
        }

        assert_eq!(resumed.step_count, full.step_count);
        for c in 0..3 {
            for (a, b) in resumed.u.comp(c).iter().zip(full.u.comp(c)) {
                assert_eq!(a.re.to_bits(), b.re.to_bits());
                assert_eq!(a.im.to_bits(), b.im.to_bits());
            }
        }
    }

    #[test]
    fn truncated_file_is_rejected() {
        let cfg = forced_cfg(5);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let st = initial_state(&cfg, &spec, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.tksc");
        save_checkpoint(&path, &st, cfg.nu).unwrap();
        let full = std::fs::read(&path).unwrap();
        let cut = dir.path().join("cut.tksc");
        std::fs::write(&cut, &full[..full.len() / 2]).unwrap();
        match load_checkpoint(&cut) {
            Err(TurbError::BadCheckpoint(_)) => {}
            other => panic!("expected checkpoint error, got {other:?}"),
        }
    }

    #[test]
    fn corrupted_byte_fails_checksum() {
        let cfg = forced_cfg(6);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let st = initial_state(&cfg, &spec, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.tksc");
        save_checkpoint(&path, &st, cfg.nu).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() / 2;
        bytes[mid] ^= 0x40;
        std::fs::write(&path, &bytes).unwrap();
        match load_checkpoint(&path) {
            Err(TurbError::BadCheckpoint(msg)) => {
                assert!(msg.contains("checksum"), "message: {msg}")
            }
            other => panic!("expected checksum error, got {other:?}"),
        }
    }

    #[test]
    fn bad_magic_and_version_are_rejected() {
        let cfg = forced_cfg(6);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let st = initial_state(&cfg, &spec, None);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("state.tksc");
        save_checkpoint(&path, &st, cfg.nu).unwrap();
        let good = std::fs::read(&path).unwrap();

        let mut wrong_magic = good.clone();
        wrong_magic[0] = b'X';
        let crc = crc32(&wrong_magic[..good.len() - 4]).to_le_bytes();
        let n = wrong_magic.len();
        wrong_magic[n - 4..].copy_from_slice(&crc);
        std::fs::write(&path, &wrong_magic).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(TurbError::BadCheckpoint(_))
        ));

        let mut wrong_version = good.clone();
        wrong_version[4] = 9;
        let crc = crc32(&wrong_version[..good.len() - 4]).to_le_bytes();
        wrong_version[n - 4..].copy_from_slice(&crc);
        std::fs::write(&path, &wrong_version).unwrap();
        assert!(matches!(
            load_checkpoint(&path),
            Err(TurbError::BadCheckpoint(_))
        ));
    }

    #[test]
    fn snapshot_files_have_no_rng_and_keep_pressure_optional() {
        let cfg = forced_cfg(8);
        let grid = WaveGrid::new(3, 8).unwrap();
        let spec = build_noise_spectrum(grid, cfg.shell, cfg.epsilon, cfg.drift_scale).unwrap();
        let mut eng = FftEngine::new(grid);
        let mut st = initial_state(&cfg, &spec, None);
        for _ in 0..10 {
            step(&mut st, &spec, cfg.nu, cfg.dt, cfg.cfl_factor, &mut eng).unwrap();
        }
        let mut snap = Snapshot {
            u: st.u.clone(),
            z: st.z.clone(),
            t: st.t,
            step_count: st.step_count,
            p: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("snap.tksc");
        save_snapshot(&path, &snap, cfg.nu).unwrap();
        let (loaded, _) = load_snapshot(&path).unwrap();
        assert!(loaded.p.is_none());
        assert!(loaded.pressure().is_err());
        assert!((loaded.t - snap.t).abs() == 0.0);
        // a snapshot cannot seed a resumed run
        assert!(matches!(
            load_checkpoint(&path),
            Err(TurbError::BadCheckpoint(_))
        ));

        snap.fill_pressure(&mut eng);
        save_snapshot(&path, &snap, cfg.nu).unwrap();
        let (loaded, _) = load_snapshot(&path).unwrap();
        let want = snap.pressure().unwrap();
        let got = loaded.pressure().unwrap();
        for (a, b) in got.coeffs().iter().zip(want.coeffs()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }
}

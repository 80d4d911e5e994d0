use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crate::smc::Population;
use crate::stats::ParticleSystem;
use crate::{Error, Result};

pub const TRACE_MAGIC: &[u8; 8] = b"TSMCTRC\0";
pub const TRACE_VERSION: u32 = 1;

/// Equally weighted particles (unconstrained) with their cached source
/// log-likelihoods.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub values: Vec<f64>,
    pub source_ll: Vec<f64>,
}

impl Snapshot {
    pub(crate) fn from_population(pop: &Population) -> Self {
        Snapshot {
            values: pop.particles.values().to_vec(),
            source_ll: pop.source_ll(),
        }
    }

    pub fn len(&self) -> usize {
        self.source_ll.len()
    }

    pub fn is_empty(&self) -> bool {
        self.source_ll.is_empty()
    }

    pub fn row(&self, i: usize, dim: usize) -> &[f64] {
        &self.values[i * dim..(i + 1) * dim]
    }
}

/// One stored value of `alpha`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rung {
    pub alpha: f64,
    /// Source-only chain.
    pub chain0: Snapshot,
    /// Target-plus-source chain.
    pub chain1: Snapshot,
    /// `log C_S(alpha)`.
    pub log_c0: f64,
    /// `log C_{T,S}(alpha)`.
    pub log_c1: f64,
    /// Pre-resampling ESS of each chain when this rung was selected (the
    /// particle count at `alpha = 0`).
    pub ess: [f64; 2],
}

/// Output of [`run_tsmc`](super::run_tsmc).
#[derive(Debug, Clone, PartialEq)]
pub struct TsmcTrace {
    pub model: String,
    pub seed: u64,
    pub particles: usize,
    pub dim: usize,
    /// Target temperatures of the first phase, `0 = gamma_0 < ... = 1`.
    pub gamma_ladder: Vec<f64>,
    /// Log evidence of the target data alone.
    pub target_log_evidence: f64,
    /// `alpha_0 = 0 < alpha_1 < ... = 1`.
    pub rungs: Vec<Rung>,
}

impl TsmcTrace {
    pub fn alpha_ladder(&self) -> Vec<f64> {
        self.rungs.iter().map(|r| r.alpha).collect()
    }

    /// `(gamma_t, alpha_t)` over both phases.
    pub fn joint_ladder(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = self.gamma_ladder.iter().map(|&g| (g, 0.0)).collect();
        out.extend(self.rungs.iter().skip(1).map(|r| (1.0, r.alpha)));
        out
    }

    /// Chain-1 particles at a rung, equally weighted.
    pub fn chain1_particles(&self, rung: usize) -> Result<ParticleSystem> {
        ParticleSystem::equally_weighted(self.dim, self.rungs[rung].chain1.values.clone())
    }

    pub fn chain0_particles(&self, rung: usize) -> Result<ParticleSystem> {
        ParticleSystem::equally_weighted(self.dim, self.rungs[rung].chain0.values.clone())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        self.write_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(&mut BufReader::new(file))
    }

    /// Little-endian binary layout: magic, version, header, gamma ladder,
    /// then every rung with both snapshots.
    pub fn write_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        w.write_all(TRACE_MAGIC)?;
        w.write_all(&TRACE_VERSION.to_le_bytes())?;
        put_u64(w, self.model.len() as u64)?;
        w.write_all(self.model.as_bytes())?;
        put_u64(w, self.seed)?;
        put_u64(w, self.particles as u64)?;
        put_u64(w, self.dim as u64)?;
        put_f64(w, self.target_log_evidence)?;
        put_slice(w, &self.gamma_ladder)?;
        put_u64(w, self.rungs.len() as u64)?;
        for r in &self.rungs {
            put_f64(w, r.alpha)?;
            put_f64(w, r.log_c0)?;
            put_f64(w, r.log_c1)?;
            put_f64(w, r.ess[0])?;
            put_f64(w, r.ess[1])?;
            for snap in [&r.chain0, &r.chain1] {
                put_slice(w, &snap.values)?;
                put_slice(w, &snap.source_ll)?;
            }
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let mut magic = [0u8; 8];
        read_exact(r, &mut magic)?;
        if &magic != TRACE_MAGIC {
            return Err(Error::TraceFormat("bad magic".into()));
        }
        let mut v = [0u8; 4];
        read_exact(r, &mut v)?;
        let version = u32::from_le_bytes(v);
        if version != TRACE_VERSION {
            return Err(Error::TraceFormat(format!("unsupported version {version}")));
        }
        let name_len = get_len(r, 1 << 16)?;
        let mut name = vec![0u8; name_len];
        read_exact(r, &mut name)?;
        let model = String::from_utf8(name)
            .map_err(|_| Error::TraceFormat("model name is not UTF-8".into()))?;
        let seed = get_u64(r)?;
        let particles = get_len(r, 1 << 32)?;
        let dim = get_len(r, 1 << 16)?;
        let target_log_evidence = get_f64(r)?;
        let gamma_ladder = get_slice(r, 1 << 24)?;
        let count = get_len(r, 1 << 24)?;
        let mut rungs = Vec::with_capacity(count.min(1 << 12));
        for _ in 0..count {
            let alpha = get_f64(r)?;
            let log_c0 = get_f64(r)?;
            let log_c1 = get_f64(r)?;
            let ess = [get_f64(r)?, get_f64(r)?];
            let mut snaps = Vec::with_capacity(2);
            for _ in 0..2 {
                let values = get_slice(r, particles * dim)?;
                let source_ll = get_slice(r, particles)?;
                if values.len() != particles * dim || source_ll.len() != particles {
                    return Err(Error::TraceFormat(
                        "snapshot size does not match header".into(),
                    ));
                }
                snaps.push(Snapshot { values, source_ll });
            }
            let chain1 = snaps.pop().expect("two snapshots");
            let chain0 = snaps.pop().expect("two snapshots");
            rungs.push(Rung {
                alpha,
                chain0,
                chain1,
                log_c0,
                log_c1,
                ess,
            });
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)
            .map_err(|e| Error::TraceFormat(e.to_string()))?
            != 0
        {
            return Err(Error::TraceFormat("trailing bytes".into()));
        }
        Ok(TsmcTrace {
            model,
            seed,
            particles,
            dim,
            gamma_ladder,
            target_log_evidence,
            rungs,
        })
    }
}

fn put_u64<W: Write>(w: &mut W, v: u64) -> std::io::Result<()> {
    w.write_all(&v.to_le_bytes())
}

fn put_f64<W: Write>(w: &mut W, v: f64) -> std::io::Result<()> {
    w.write_all(&v.to_bits().to_le_bytes())
}

fn put_slice<W: Write>(w: &mut W, v: &[f64]) -> std::io::Result<()> {
    put_u64(w, v.len() as u64)?;
    for x in v {
        put_f64(w, *x)?;
    }
    Ok(())
}

fn read_exact<R: Read>(r: &mut R, buf: &mut [u8]) -> Result<()> {
    r.read_exact(buf)
        .map_err(|e| Error::TraceFormat(format!("truncated file ({e})")))
}

fn get_u64<R: Read>(r: &mut R) -> Result<u64> {
    let mut b = [0u8; 8];
    read_exact(r, &mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn get_f64<R: Read>(r: &mut R) -> Result<f64> {
    Ok(f64::from_bits(get_u64(r)?))
}

fn get_len<R: Read>(r: &mut R, max: u64) -> Result<usize> {
    let n = get_u64(r)?;
    if n > max {
        return Err(Error::TraceFormat(format!(
            "length {n} exceeds limit {max}"
        )));
    }
    Ok(n as usize)
}

fn get_slice<R: Read>(r: &mut R, max: usize) -> Result<Vec<f64>> {
    let n = get_len(r, max as u64)?;
    (0..n).map(|_| get_f64(r)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TsmcTrace {
        let snap = |s: f64| Snapshot {
            values: vec![s, -0.0, f64::MIN_POSITIVE, 1e300, 0.1, 0.2],
            source_ll: vec![-1.5, f64::NEG_INFINITY, -3.25],
        };
        TsmcTrace {
            model: "toy".into(),
            seed: u64::MAX - 3,
            particles: 3,
            dim: 2,
            gamma_ladder: vec![0.0, 0.37, 1.0],
            target_log_evidence: -12.345678901234567,
            rungs: vec![
                Rung {
                    alpha: 0.0,
                    chain0: snap(1.0),
                    chain1: snap(2.0),
                    log_c0: 0.0,
                    log_c1: -12.345678901234567,
                    ess: [4.0, 4.0],
                },
                Rung {
                    alpha: 1.0,
                    chain0: snap(3.0),
                    chain1: snap(4.0),
                    log_c0: -7.0,
                    log_c1: -19.5,
                    ess: [2.0, 1.5],
                },
            ],
        }
    }

    #[test]
    fn binary_roundtrip_is_bit_exact() {
        let t = toy();
        let mut buf = Vec::new();
        t.write_to(&mut buf).unwrap();
        let back = TsmcTrace::read_from(&mut &buf[..]).unwrap();
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(buf, again);
        assert_eq!(back.rungs[1].chain0, t.rungs[1].chain0);
        assert_eq!(back, t);
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let mut buf = Vec::new();
        toy().write_to(&mut buf).unwrap();
        assert!(matches!(
            TsmcTrace::read_from(&mut &buf[..buf.len() - 1]),
            Err(Error::TraceFormat(_))
        ));
        let mut extra = buf.clone();
        extra.push(0);
        assert!(TsmcTrace::read_from(&mut &extra[..]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(TsmcTrace::read_from(&mut &bad[..]).is_err());
    }

    #[test]
    fn joint_ladder_is_monotone_in_both_temperatures() {
        let l = toy().joint_ladder();
        assert_eq!(l, vec![(0.0, 0.0), (0.37, 0.0), (1.0, 0.0), (1.0, 1.0)]);
    }
}

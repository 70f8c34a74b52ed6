//! Exhaustive enumeration of all `2^m` states, keeping the `k` lowest.

use alloc::collections::BinaryHeap;
use alloc::format;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{Bitstring, EnergySample, IsingHamiltonian, Qubo};
use crate::{Error, Result};

pub const DEFAULT_BRUTE_FORCE_CAP: usize = 30;
pub const DEFAULT_CHUNK_BITS: u32 = 14;

/// Runs independent enumeration chunks, possibly in parallel.
///
/// Implementations must return one result per chunk index, in index order.
pub trait ChunkExecutor {
    fn map_chunks(&self, count: usize, task: &(dyn Fn(usize) -> Vec<EnergySample> + Sync)) -> Vec<Vec<EnergySample>>;
}

/// Runs chunks one after another on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl ChunkExecutor for Sequential {
    fn map_chunks(&self, count: usize, task: &(dyn Fn(usize) -> Vec<EnergySample> + Sync)) -> Vec<Vec<EnergySample>> {
        (0..count).map(task).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Candidate {
    energy: f64,
    value: u64,
}

impl Eq for Candidate {}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.energy.total_cmp(&other.energy).then(self.value.cmp(&other.value))
    }
}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Bounded max-heap holding the `k` smallest candidates seen.
struct TopK {
    k: usize,
    heap: BinaryHeap<Candidate>,
}

impl TopK {
    fn new(k: usize) -> Self {
        Self {
            k,
            heap: BinaryHeap::with_capacity(k.min(1 << 20) + 1),
        }
    }

    #[inline]
    fn offer(&mut self, c: Candidate) {
        if self.heap.len() < self.k {
            self.heap.push(c);
        } else if let Some(top) = self.heap.peek() {
            if c < *top {
                self.heap.pop();
                self.heap.push(c);
            }
        }
    }
}

/// Enumerates `start..end` with single-bit-flip energy updates.
fn scan_range(q: &Qubo, m: usize, start: u64, end: u64, k: usize, len: u32) -> Vec<EnergySample> {
    let var = |pos: u32| m - 1 - pos as usize;
    let mut x: Vec<bool> = (0..m).map(|j| (start >> (m - 1 - j)) & 1 == 1).collect();
    // field[j] = a_j + sum_{i != j} b_ij x_i
    let mut field: Vec<f64> = (0..m)
        .map(|j| q.linear[j] + (0..m).filter(|&i| i != j && x[i]).map(|i| q.quad[i * m + j]).sum::<f64>())
        .collect();
    let mut e = q.constant;
    for j in 0..m {
        if x[j] {
            e += q.linear[j];
            for i in 0..j {
                if x[i] {
                    e += q.quad[i * m + j];
                }
            }
        }
    }

    let mut top = TopK::new(k);
    let mut value = start;
    loop {
        top.offer(Candidate { energy: e, value });
        let next = value + 1;
        if next >= end {
            break;
        }
        let mut changed = value ^ next;
        while changed != 0 {
            let pos = changed.trailing_zeros();
            changed &= changed - 1;
            let j = var(pos);
            let row = &q.quad[j * m..(j + 1) * m];
            if x[j] {
                e -= field[j];
                for (f, &b) in field.iter_mut().zip(row) {
                    *f -= b;
                }
            } else {
                e += field[j];
                for (f, &b) in field.iter_mut().zip(row) {
                    *f += b;
                }
            }
            // the diagonal of quad is zero so field[j] itself is unchanged
            x[j] = !x[j];
        }
        value = next;
    }
    top.heap
        .into_vec()
        .into_iter()
        .map(|c| EnergySample {
            bits: Bitstring { len, value: c.value },
            energy: c.energy,
            count: 1,
        })
        .collect()
}

/// Exhaustive low-energy search.
#[derive(Debug, Clone, Copy)]
pub struct BruteForce {
    /// Largest number of variables accepted.
    pub cap: usize,
    /// Chunk size is `2^min(chunk_bits, m)` states.
    pub chunk_bits: u32,
}

impl Default for BruteForce {
    fn default() -> Self {
        Self {
            cap: DEFAULT_BRUTE_FORCE_CAP,
            chunk_bits: DEFAULT_CHUNK_BITS,
        }
    }
}

impl BruteForce {
    /// The `k` lowest-energy states in ascending `(energy, bitstring)` order.
    ///
    /// The chunk layout depends only on `m` and `chunk_bits`, never on how
    /// the executor schedules chunks.
    pub fn run(&self, h: &IsingHamiltonian, k: u64, exec: &dyn ChunkExecutor) -> Result<Vec<EnergySample>> {
        let m = h.num_vars;
        if m == 0 {
            return Err(Error::InvalidInput("Hamiltonian has no variables".into()));
        }
        if m > self.cap || m > Bitstring::MAX_LEN as usize {
            return Err(Error::Infeasible(format!(
                "brute force over 2^{m} states exceeds the cap of 2^{}",
                self.cap
            )));
        }
        let total = 1u64 << m;
        if k == 0 || k > total {
            return Err(Error::InvalidInput(format!("sample count {k} not in 1..={total}")));
        }
        let k = k as usize;
        let chunk_bits = self.chunk_bits.clamp(1, m as u32);
        let chunk = 1u64 << chunk_bits;
        let chunks = (total / chunk) as usize;
        let q = h.to_qubo();
        let len = m as u32;
        let parts = exec.map_chunks(chunks, &|i| {
            let start = i as u64 * chunk;
            scan_range(&q, m, start, start + chunk, k, len)
        });

        let mut merged = TopK::new(k);
        for part in parts {
            for s in part {
                merged.offer(Candidate {
                    energy: s.energy,
                    value: s.bits.value,
                });
            }
        }
        let mut out: Vec<EnergySample> = merged
            .heap
            .into_vec()
            .into_iter()
            .map(|c| EnergySample {
                bits: Bitstring { len, value: c.value },
                energy: h.energy_of_value(c.value),
                count: 1,
            })
            .collect();
        out.sort_by(|a, b| a.energy.total_cmp(&b.energy).then(a.bits.cmp(&b.bits)));
        Ok(out)
    }
}

/// [`BruteForce::run`] with default cap and chunking on the calling thread.
pub fn brute_force_low_energy(h: &IsingHamiltonian, k: u64) -> Result<Vec<EnergySample>> {
    BruteForce::default().run(h, k, &Sequential)
}

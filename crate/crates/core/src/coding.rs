//! Punctured feed-forward convolutional code with a soft-input Viterbi decoder.
//!
//! Bits map to antipodal symbols as `0 → +1`, `1 → −1`. Soft inputs follow
//! the same convention and punctured positions are erasures (`0.0`).

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeConfig {
    /// Generator polynomials; the most significant of the `K` bits taps the current input.
    pub generators: Vec<u32>,
    pub constraint_length: usize,
    /// `puncture[j][t]`: keep output `j` at step `t mod period`.
    pub puncture: Vec<Vec<u8>>,
}

impl Default for CodeConfig {
    fn default() -> Self {
        CodeConfig {
            generators: vec![0o7, 0o5, 0o5],
            constraint_length: 3,
            puncture: vec![vec![1, 1], vec![1, 0], vec![0, 0]],
        }
    }
}

fn parity(x: u32) -> u8 {
    (x.count_ones() & 1) as u8
}

impl CodeConfig {
    /// Parses generators written in octal, e.g. `"7,5,5"`.
    pub fn parse_generators(s: &str) -> Result<Vec<u32>> {
        s.split(',')
            .map(|g| {
                u32::from_str_radix(g.trim(), 8)
                    .map_err(|e| Error::config(format!("generator `{g}`: {e}")))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.constraint_length;
        if !(2..=16).contains(&k) {
            return Err(Error::config(format!("constraint length {k} outside 2..=16")));
        }
        if self.generators.is_empty() || self.generators.iter().any(|&g| g == 0 || g >= 1 << k) {
            return Err(Error::config(format!(
                "generators must be non-zero and fit in {k} bits"
            )));
        }
        if self.puncture.len() != self.generators.len() {
            return Err(Error::config("puncture pattern needs one row per generator"));
        }
        let period = self.period();
        if period == 0 || self.puncture.iter().any(|row| row.len() != period) {
            return Err(Error::config("puncture rows must share a non-zero period"));
        }
        for t in 0..period {
            if self.puncture.iter().all(|row| row[t] == 0) {
                return Err(Error::config(format!("puncture column {t} keeps no bits")));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> usize {
        self.puncture.first().map_or(0, Vec::len)
    }

    fn n_out(&self) -> usize {
        self.generators.len()
    }

    fn kept(&self, t: usize, j: usize) -> bool {
        self.puncture[j][t % self.period()] != 0
    }

    /// Output bits for `(state, input)` and the next state.
    fn branch(&self, state: u32, input: u32) -> (u32, u32) {
        let k = self.constraint_length;
        let reg = (input << (k - 1)) | state;
        let mut out = 0u32;
        for (j, &g) in self.generators.iter().enumerate() {
            out |= (parity(reg & g) as u32) << j;
        }
        (out, reg >> 1)
    }

    /// Rate-`1/n` mother code output, zero-terminated, step-major.
    pub fn encode_mother(&self, bits: &[u8]) -> Vec<u8> {
        let steps = bits.len() + self.constraint_length - 1;
        let mut out = Vec::with_capacity(steps * self.n_out());
        let mut state = 0;
        for t in 0..steps {
            let u = bits.get(t).copied().unwrap_or(0) as u32 & 1;
            let (o, next) = self.branch(state, u);
            for j in 0..self.n_out() {
                out.push(((o >> j) & 1) as u8);
            }
            state = next;
        }
        out
    }

    pub fn punctured_len(&self, n: usize) -> usize {
        let steps = n + self.constraint_length - 1;
        (0..steps)
            .map(|t| (0..self.n_out()).filter(|&j| self.kept(t, j)).count())
            .sum()
    }

    pub fn encode(&self, bits: &[u8]) -> Vec<u8> {
        let mother = self.encode_mother(bits);
        let n = self.n_out();
        mother
            .iter()
            .enumerate()
            .filter(|(i, _)| self.kept(i / n, i % n))
            .map(|(_, &b)| b)
            .collect()
    }

    /// Re-inserts erasures at punctured positions.
    pub fn depuncture(&self, soft: &[f64], n: usize) -> Result<Vec<f64>> {
        let want = self.punctured_len(n);
        if soft.len() != want {
            return Err(Error::dim(format!(
                "{} soft values for a message of {n} bits (expected {want})",
                soft.len()
            )));
        }
        let steps = n + self.constraint_length - 1;
        let mut out = Vec::with_capacity(steps * self.n_out());
        let mut it = soft.iter();
        for t in 0..steps {
            for j in 0..self.n_out() {
                out.push(if self.kept(t, j) { *it.next().expect("length checked") } else { 0.0 });
            }
        }
        Ok(out)
    }

    /// Maximum-likelihood decoding of the mother-code stream (no puncturing).
    pub fn viterbi_mother(&self, soft: &[f64], n: usize) -> Result<Vec<u8>> {
        let k = self.constraint_length;
        let steps = n + k - 1;
        let nout = self.n_out();
        if soft.len() != steps * nout {
            return Err(Error::dim(format!(
                "{} mother-code values for {n} bits (expected {})",
                soft.len(),
                steps * nout
            )));
        }
        let n_states = 1usize << (k - 1);
        let mask = (n_states - 1) as u32;
        let table: Vec<[(u32, u32); 2]> = (0..n_states as u32)
            .map(|s| [self.branch(s, 0), self.branch(s, 1)])
            .collect();
        let mut metric = vec![f64::NEG_INFINITY; n_states];
        metric[0] = 0.0;
        let mut from = vec![0u32; steps * n_states];
        for t in 0..steps {
            let obs = &soft[t * nout..(t + 1) * nout];
            let mut next = vec![f64::NEG_INFINITY; n_states];
            for ns in 0..n_states as u32 {
                let u = ns >> (k - 2);
                // Predecessors differ in their oldest bit; the 0 branch is tried first so ties keep it.
                for b in 0..2u32 {
                    let ps = ((ns << 1) & mask) | b;
                    let m0 = metric[ps as usize];
                    if m0 == f64::NEG_INFINITY {
                        continue;
                    }
                    let (out, dest) = table[ps as usize][u as usize];
                    debug_assert_eq!(dest, ns);
                    let mut m = m0;
                    for (j, &x) in obs.iter().enumerate() {
                        m += if (out >> j) & 1 == 0 { x } else { -x };
                    }
                    if m > next[ns as usize] {
                        next[ns as usize] = m;
                        from[t * n_states + ns as usize] = ps;
                    }
                }
            }
            metric = next;
        }
        let mut bits = vec![0u8; steps];
        let mut s = 0u32;
        for t in (0..steps).rev() {
            bits[t] = (s >> (k - 2)) as u8 & 1;
            s = from[t * n_states + s as usize];
        }
        bits.truncate(n);
        Ok(bits)
    }

    /// Decodes punctured soft values into `n` message bits.
    pub fn viterbi_decode(&self, soft: &[f64], n: usize) -> Result<Vec<u8>> {
        let full = self.depuncture(soft, n)?;
        self.viterbi_mother(&full, n)
    }

    /// Free distance of the mother code, or of the punctured code when
    /// `punctured` is set (minimum over puncturing phases).
    pub fn free_distance(&self, punctured: bool) -> usize {
        let k = self.constraint_length;
        let period = if punctured { self.period() } else { 1 };
        let n_states = 1usize << (k - 1);
        let weight = |t: usize, out: u32| -> usize {
            (0..self.n_out())
                .filter(|&j| (out >> j) & 1 == 1 && (!punctured || self.kept(t, j)))
                .count()
        };
        let mut best = usize::MAX;
        for phase in 0..period {
            let mut dist = vec![usize::MAX; n_states * period];
            let mut heap = BinaryHeap::new();
            let (out, s1) = self.branch(0, 1);
            let w0 = weight(phase, out);
            let node = s1 as usize * period + (phase + 1) % period;
            dist[node] = w0;
            heap.push(Reverse((w0, s1 as usize, (phase + 1) % period)));
            while let Some(Reverse((d, s, ph))) = heap.pop() {
                if d > dist[s * period + ph] || d >= best {
                    continue;
                }
                if s == 0 {
                    best = best.min(d);
                    continue;
                }
                for u in 0..2 {
                    let (out, ns) = self.branch(s as u32, u);
                    let nd = d + weight(ph, out);
                    let nph = (ph + 1) % period;
                    let idx = ns as usize * period + nph;
                    if nd < dist[idx] {
                        dist[idx] = nd;
                        heap.push(Reverse((nd, ns as usize, nph)));
                    }
                }
            }
        }
        best
    }
}

use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::Kind;

/// A block of equal singular values coming from one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Run {
    pub value: f64,
    /// Mode index, or `None` when the value has no single mode (Galerkin path, synthetic data).
    pub mode: Option<usize>,
    pub mult: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SpectrumMeta {
    pub kind: Option<Kind>,
    pub n: usize,
    pub geometry: String,
    pub r: f64,
    pub m0: f64,
    pub strength: Vec<f64>,
    pub cutoff: usize,
}

/// Singular values s_1 ≥ s_2 ≥ … stored as runs; index j is 1-based.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSpectrum {
    runs: Vec<Run>,
    /// ends[i] = number of values in runs[..=i].
    ends: Vec<usize>,
    pub meta: SpectrumMeta,
}

impl SingularSpectrum {
    /// Sorts descending; equal values keep ascending mode order.
    pub fn from_runs(mut runs: Vec<Run>, meta: SpectrumMeta) -> Self {
        runs.retain(|r| r.mult > 0);
        runs.sort_by(|a, b| match b.value.total_cmp(&a.value) {
            Ordering::Equal => a.mode.cmp(&b.mode),
            o => o,
        });
        let mut ends = Vec::with_capacity(runs.len());
        let mut acc = 0;
        for r in &runs {
            acc += r.mult;
            ends.push(acc);
        }
        SingularSpectrum { runs, ends, meta }
    }

    pub fn from_values(values: &[f64], meta: SpectrumMeta) -> Self {
        Self::from_runs(values.iter().map(|&value| Run { value, mode: None, mult: 1 }).collect(), meta)
    }

    pub fn len(&self) -> usize {
        self.ends.last().copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    fn run_index(&self, j: usize) -> Option<usize> {
        if j == 0 || j > self.len() {
            return None;
        }
        Some(self.ends.partition_point(|&e| e < j))
    }

    /// s_j with its run.
    pub fn get(&self, j: usize) -> Option<Run> {
        self.run_index(j).map(|i| self.runs[i])
    }

    pub fn value(&self, j: usize) -> Option<f64> {
        self.get(j).map(|r| r.value)
    }

    /// (j, run) for j in [lo, hi], clipped to the spectrum.
    pub fn window(&self, lo: usize, hi: usize) -> impl Iterator<Item = (usize, Run)> + '_ {
        let hi = hi.min(self.len());
        let start = self.run_index(lo.max(1)).unwrap_or(self.runs.len());
        let mut j = lo.max(1);
        let mut i = start;
        core::iter::from_fn(move || {
            if j > hi || i >= self.runs.len() {
                return None;
            }
            while self.ends[i] < j {
                i += 1;
            }
            let out = (j, self.runs[i]);
            j += 1;
            Some(out)
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Run)> + '_ {
        self.window(1, self.len())
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.iter().map(|(_, r)| r.value).collect()
    }

    pub fn truncate(&mut self, len: usize) {
        let keep = self.ends.partition_point(|&e| e < len);
        if keep < self.runs.len() {
            let before = if keep == 0 { 0 } else { self.ends[keep - 1] };
            self.runs[keep].mult = len - before;
            self.ends[keep] = len;
            self.runs.truncate(keep + 1);
            self.ends.truncate(keep + 1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn sample() -> SingularSpectrum {
        let runs = vec![
            Run { value: 0.5, mode: Some(2), mult: 2 },
            Run { value: 1.0, mode: Some(0), mult: 1 },
            Run { value: 0.5, mode: Some(1), mult: 3 },
            Run { value: 0.1, mode: Some(3), mult: 2 },
        ];
        SingularSpectrum::from_runs(runs, SpectrumMeta::default())
    }

    #[test]
    fn sorted_with_mode_ties() {
        let s = sample();
        assert_eq!(s.len(), 8);
        assert_eq!(s.to_vec(), vec![1.0, 0.5, 0.5, 0.5, 0.5, 0.5, 0.1, 0.1]);
        let modes: Vec<_> = s.iter().map(|(_, r)| r.mode.unwrap()).collect();
        assert_eq!(modes, vec![0, 1, 1, 1, 2, 2, 3, 3]);
        assert_eq!(s.get(4).unwrap().mode, Some(1));
        assert_eq!(s.get(5).unwrap().mode, Some(2));
        assert_eq!(s.value(0), None);
        assert_eq!(s.value(9), None);
    }

    #[test]
    fn windows() {
        let s = sample();
        let w: Vec<_> = s.window(3, 7).map(|(j, r)| (j, r.value)).collect();
        assert_eq!(w, vec![(3, 0.5), (4, 0.5), (5, 0.5), (6, 0.5), (7, 0.1)]);
        assert_eq!(s.window(7, 100).count(), 2);
        assert_eq!(s.window(20, 30).count(), 0);
    }

    #[test]
    fn truncation() {
        let mut s = sample();
        s.truncate(5);
        assert_eq!(s.to_vec(), vec![1.0, 0.5, 0.5, 0.5, 0.5]);
        assert_eq!(s.runs().last().unwrap().mult, 1);
    }
}

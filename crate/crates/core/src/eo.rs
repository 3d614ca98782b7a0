//! Elementary sequences of length g: nondecreasing maps φ with φ(0) = 0 and
//! unit steps, their dimension |φ|, the superspecial-side filter, the depth
//! invariant c(φ) and the maximal sequence φ_max.

use crate::error::{invalid, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ElementarySequence {
    /// values φ(0), φ(1), …, φ(g)
    pub values: Vec<u32>,
}

impl ElementarySequence {
    pub fn new(values: Vec<u32>) -> Result<Self> {
        if values.is_empty() || values[0] != 0 {
            return invalid("elementary sequence must start with 0");
        }
        for w in values.windows(2) {
            if w[1] != w[0] && w[1] != w[0] + 1 {
                return invalid("elementary sequence steps must be 0 or 1");
            }
        }
        Ok(ElementarySequence { values })
    }

    pub fn g(&self) -> usize {
        self.values.len() - 1
    }

    /// |φ| = Σ φ(i): the dimension of the corresponding stratum.
    pub fn dim(&self) -> u64 {
        self.values.iter().map(|&v| v as u64).sum()
    }

    /// c(φ): the least c ≥ 0 with φ(g − c) = 0.
    pub fn depth(&self) -> usize {
        let g = self.g();
        (0..=g).find(|&c| self.values[g - c] == 0).expect("phi(0) = 0")
    }

    /// Superspecial-side condition: φ(g − c) = 0 for all c ≥ ⌊g/2⌋,
    /// i.e. φ vanishes up to index ⌈g/2⌉.
    pub fn is_ss(&self) -> bool {
        let g = self.g();
        let cut = g - g / 2; // = ⌈g/2⌉
        self.values.iter().take(cut + 1).all(|&v| v == 0)
    }
}

/// All 2^g elementary sequences of length g, in step-bitmask order.
pub fn enumerate(g: usize) -> Result<Vec<ElementarySequence>> {
    if g > 20 {
        return invalid(format!("g = {g} exceeds the supported bound 20"));
    }
    let mut out = Vec::with_capacity(1usize << g);
    for mask in 0u32..1 << g {
        let mut values = Vec::with_capacity(g + 1);
        let mut cur = 0u32;
        values.push(0);
        for i in 0..g {
            cur += mask >> i & 1;
            values.push(cur);
        }
        out.push(ElementarySequence { values });
    }
    Ok(out)
}

/// The maximal sequence: φ_max(g − i) = ⌊g/2⌋ − i for 0 ≤ i ≤ ⌊g/2⌋, zero
/// below.
pub fn phi_max(g: usize) -> ElementarySequence {
    let h = g / 2;
    let values = (0..=g).map(|k| (k + h).saturating_sub(g) as u32).collect();
    ElementarySequence { values }
}

pub struct EoReport {
    pub g: usize,
    pub all: Vec<ElementarySequence>,
    pub ss: Vec<ElementarySequence>,
    pub phi_max: ElementarySequence,
}

pub fn eo_sequences(g: usize) -> Result<EoReport> {
    let all = enumerate(g)?;
    let ss = all.iter().filter(|s| s.is_ss()).cloned().collect();
    Ok(EoReport { g, all, ss, phi_max: phi_max(g) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn validity() {
        assert!(ElementarySequence::new(vec![0, 1, 1, 2]).is_ok());
        assert!(ElementarySequence::new(vec![1, 1]).is_err());
        assert!(ElementarySequence::new(vec![0, 2]).is_err());
        assert!(ElementarySequence::new(vec![0, 1, 0]).is_err());
        assert!(ElementarySequence::new(vec![]).is_err());
    }

    #[test]
    fn g1_enumeration() {
        let rep = eo_sequences(1).unwrap();
        let set: HashSet<Vec<u32>> = rep.all.iter().map(|s| s.values.clone()).collect();
        assert_eq!(set, HashSet::from([vec![0, 0], vec![0, 1]]));
        assert_eq!(rep.ss.len(), 1);
        assert_eq!(rep.ss[0].values, vec![0, 0]);
    }

    #[test]
    fn counts_are_powers_of_two() {
        for g in [2usize, 5, 10] {
            let all = enumerate(g).unwrap();
            assert_eq!(all.len(), 1 << g);
            // all distinct and all valid
            let set: HashSet<&Vec<u32>> = all.iter().map(|s| &s.values).collect();
            assert_eq!(set.len(), all.len());
            for s in &all {
                assert!(ElementarySequence::new(s.values.clone()).is_ok());
            }
        }
        assert!(enumerate(21).is_err());
    }

    #[test]
    fn phi_max_g4() {
        let m = phi_max(4);
        assert_eq!(m.values, vec![0, 0, 0, 1, 2]);
        assert_eq!(m.dim(), 3);
        // maximal among ss sequences by dimension
        let rep = eo_sequences(4).unwrap();
        let best = rep.ss.iter().map(|s| s.dim()).max().unwrap();
        assert_eq!(best, m.dim());
        assert!(rep.ss.contains(&m));
    }

    #[test]
    fn phi_max_general() {
        for g in 1..=12 {
            let m = phi_max(g);
            assert!(ElementarySequence::new(m.values.clone()).is_ok());
            assert!(m.is_ss());
            // φ_max(g−i) = ⌊g/2⌋ − i on the top half
            for i in 0..=g / 2 {
                assert_eq!(m.values[g - i], (g / 2 - i) as u32);
            }
            // dimension is the triangular number of ⌊g/2⌋
            let h = (g / 2) as u64;
            assert_eq!(m.dim(), h * (h + 1) / 2);
            // and it dominates every ss sequence pointwise
            for s in eo_sequences(g).unwrap().ss {
                for k in 0..=g {
                    assert!(s.values[k] <= m.values[k]);
                }
            }
        }
    }

    #[test]
    fn depth_examples() {
        let s = ElementarySequence::new(vec![0, 0, 1, 1, 1]).unwrap();
        // values (0,0,1,1,1): φ(4)=1≠0, φ(3)=1, φ(2)=1, φ(1)=0 → c = 3
        assert_eq!(s.depth(), 3);
        let z = ElementarySequence::new(vec![0, 0, 0]).unwrap();
        assert_eq!(z.depth(), 0);
        let m = phi_max(4);
        assert_eq!(m.depth(), 2);
    }
}

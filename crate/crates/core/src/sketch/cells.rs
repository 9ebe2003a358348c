//! Counter storage that starts sparse and densifies once populated.

use rustc_hash::FxHashMap;

use crate::budget::width;

#[derive(Clone, Debug)]
pub(crate) enum Cells {
    Dense(Vec<i64>),
    Sparse(FxHashMap<u32, i64>),
}

impl Cells {
    pub(crate) fn new(len: usize, sparse: bool) -> Self {
        if sparse {
            Cells::Sparse(FxHashMap::default())
        } else {
            Cells::Dense(vec![0; len])
        }
    }

    #[inline]
    pub(crate) fn get(&self, idx: usize) -> i64 {
        match self {
            Cells::Dense(v) => v[idx],
            Cells::Sparse(v) => v.get(&(idx as u32)).copied().unwrap_or(0),
        }
    }

    /// Mutable slot for `idx`, allocating it if absent.
    #[inline]
    pub(crate) fn slot(&mut self, idx: usize, len: usize) -> &mut i64 {
        if let Cells::Sparse(v) = self {
            if v.len() * 4 >= len {
                let mut dense = vec![0; len];
                for (&i, &c) in v.iter() {
                    dense[i as usize] = c;
                }
                *self = Cells::Dense(dense);
            }
        }
        match self {
            Cells::Dense(v) => &mut v[idx],
            Cells::Sparse(v) => v.entry(idx as u32).or_insert(0),
        }
    }

    pub(crate) fn values(&self) -> Box<dyn Iterator<Item = (usize, i64)> + '_> {
        match self {
            Cells::Dense(v) => Box::new(v.iter().copied().enumerate()),
            Cells::Sparse(v) => Box::new(v.iter().map(|(&i, &c)| (i as usize, c))),
        }
    }

    /// Bits for the populated cells at `value_bits` per counter.
    pub(crate) fn bits(&self, len: usize, value_bits: u64) -> u64 {
        match self {
            Cells::Dense(v) => v.len() as u64 * value_bits,
            Cells::Sparse(v) => v.len() as u64 * (value_bits + width(len as u64)),
        }
    }
}

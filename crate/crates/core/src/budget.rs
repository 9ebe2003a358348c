//! Bit-level space accounting.
//!
//! Every sketch reports the bits of its live state through [`SpaceUsage`].
//! A [`BitBudget`] is a named tree of such reports; interior nodes carry the
//! sum of their children. Peaks are tracked by the owning estimator, which
//! samples its live total at checkpoints and after every structural change.

use std::fmt;

/// Live state size in bits.
pub trait SpaceUsage {
    fn bits(&self) -> u64;
}

/// Bits needed to store the unsigned value `v` (at least one).
pub fn width(v: u64) -> u64 {
    (64 - v.leading_zeros() as u64).max(1)
}

/// `ceil(log₂ n)`, at least one.
pub fn id_bits(n: u64) -> u64 {
    width(n.saturating_sub(1))
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct BitBudget {
    pub name: String,
    pub live: u64,
    pub peak: u64,
    pub children: Vec<BitBudget>,
}

impl BitBudget {
    pub fn leaf(name: impl Into<String>, live: u64) -> Self {
        BitBudget { name: name.into(), live, peak: live, children: Vec::new() }
    }

    pub fn node(name: impl Into<String>, children: Vec<BitBudget>) -> Self {
        let live = children.iter().map(|c| c.live).sum();
        let peak = children.iter().map(|c| c.peak).sum::<u64>().max(live);
        BitBudget { name: name.into(), live, peak, children }
    }

    /// Raise the recorded peak to at least `peak`.
    pub fn with_peak(mut self, peak: u64) -> Self {
        self.peak = self.peak.max(peak).max(self.live);
        self
    }

    pub fn find(&self, name: &str) -> Option<&BitBudget> {
        if self.name == name {
            return Some(self);
        }
        self.children.iter().find_map(|c| c.find(name))
    }

    fn write_indented(&self, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
        writeln!(f, "{:indent$}{}: live={} peak={}", "", self.name, self.live, self.peak, indent = depth * 2)?;
        for c in &self.children {
            c.write_indented(f, depth + 1)?;
        }
        Ok(())
    }
}

impl fmt::Display for BitBudget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_indented(f, 0)
    }
}

/// Running maximum of a sampled live total.
#[derive(Clone, Copy, Debug, Default)]
pub struct PeakTracker {
    peak: u64,
}

impl PeakTracker {
    pub fn observe(&mut self, live: u64) {
        self.peak = self.peak.max(live);
    }

    pub fn peak(&self) -> u64 {
        self.peak
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rollup_sums_children() {
        let b = BitBudget::node("root", vec![BitBudget::leaf("a", 10), BitBudget::leaf("b", 5).with_peak(9)]);
        assert_eq!(b.live, 15);
        assert_eq!(b.peak, 19);
        assert_eq!(b.find("b").unwrap().peak, 9);
        assert!(format!("{b}").contains("a: live=10"));
    }

    #[test]
    fn widths() {
        assert_eq!(width(0), 1);
        assert_eq!(width(1), 1);
        assert_eq!(width(255), 8);
        assert_eq!(id_bits(1024), 10);
        assert_eq!(id_bits(1025), 11);
    }
}

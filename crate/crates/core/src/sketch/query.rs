//! Frequency of one item over a window of the stream.

use crate::stream::Cursor;

/// Counts `item` in the next `window` updates. Consumes
/// `min(window, remaining)` positions and returns 0 when fewer than
/// `window` remain. The caller rescales by `m / window`.
pub fn query_frequency(item: u64, window: usize, cursor: &mut Cursor<'_>) -> u64 {
    let short = cursor.remaining() < window;
    let seen = cursor.advance(window);
    if short {
        return 0;
    }
    seen.iter().filter(|&&a| a == item).count() as u64
}

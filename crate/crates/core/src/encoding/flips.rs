//! Single-spin-flip distances between tours under the two mappings.

use crate::error::{Error, Result};
use crate::instances::Tour;

/// Grid of the full permutation encoding of `order` (row = city, column = step).
fn permutation_bits(order: &[usize]) -> Vec<bool> {
    let n = order.len();
    let mut bits = vec![false; n * n];
    for (k, &c) in order.iter().enumerate() {
        bits[c * n + k] = true;
    }
    bits
}

/// Reverses `order[first..=last]`, the classic 2-opt move.
pub fn reverse_segment(order: &[usize], first: usize, last: usize) -> Result<Vec<usize>> {
    if first > last || last >= order.len() {
        return Err(Error::Precondition(format!(
            "segment {first}..={last} invalid for a tour of {} cities",
            order.len()
        )));
    }
    let mut out = order.to_vec();
    out[first..=last].reverse();
    Ok(out)
}

/// Hamming distance between the full-grid permutation encodings of `tour`
/// before and after reversing positions `first..=last`.
pub fn flips_for_2opt_permutation(tour: &Tour, first: usize, last: usize) -> Result<usize> {
    let after = reverse_segment(&tour.order, first, last)?;
    let a = permutation_bits(&tour.order);
    let b = permutation_bits(&after);
    Ok(a.iter().zip(&b).filter(|(x, y)| x != y).count())
}

/// A k-opt move removes k edges and adds k, flipping exactly 2k edge bits.
pub fn flips_for_kopt_edge(k: usize) -> Result<usize> {
    if k < 2 {
        return Err(Error::Precondition(format!("k-opt needs k >= 2, got {k}")));
    }
    Ok(2 * k)
}

/// Worst-case flips to resolve `r` crossings under the permutation mapping:
/// `2 (N - ceil((N - (r - 1)) / (r + 1)))`.
pub fn worst_case_crossing_flips(n: usize, r: usize) -> Result<usize> {
    if r < 1 || n < r + 1 {
        return Err(Error::Precondition(format!("need r >= 1 and N > r, got N={n}, r={r}")));
    }
    let rem = n - (r - 1);
    Ok(2 * (n - rem.div_ceil(r + 1)))
}

/// `4 floor(N / 4)`, the single-crossing worst case for the permutation mapping.
pub fn single_crossing_bound(n: usize) -> usize {
    4 * (n / 4)
}

//! Weighted edit distance, optimal alignment and alignment crossover on
//! words of elementary operations.
//!
//! Insertion and deletion cost 1, replacement costs 2 and a match is free.
//! Symbols match only when kind and both indices are identical.

use rand::Rng;

use super::{BasisWord, ElementaryOp};
use crate::error::{Error, Result};

const INDEL: usize = 1;
const REPLACE: usize = 2;

/// Two gapped sequences of equal length. `None` is a gap; a column never
/// holds two gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Alignment {
    pub columns: Vec<(Option<ElementaryOp>, Option<ElementaryOp>)>,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    pub fn cost(&self) -> usize {
        self.columns
            .iter()
            .map(|col| match col {
                (Some(a), Some(b)) if a == b => 0,
                (Some(_), Some(_)) => REPLACE,
                _ => INDEL,
            })
            .sum()
    }

    /// The first (`side == 0`) or second row with gaps removed.
    pub fn ungapped(&self, side: usize) -> Vec<ElementaryOp> {
        self.columns
            .iter()
            .filter_map(|(a, b)| if side == 0 { *a } else { *b })
            .collect()
    }
}

fn check_same_n(a: &BasisWord, b: &BasisWord) -> Result<()> {
    if a.n() == b.n() {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            expected: a.n(),
            found: b.n(),
        })
    }
}

fn dp_table(a: &[ElementaryOp], b: &[ElementaryOp]) -> Vec<Vec<usize>> {
    let (m, n) = (a.len(), b.len());
    let mut d = vec![vec![0usize; n + 1]; m + 1];
    for (i, row) in d.iter_mut().enumerate() {
        row[0] = i * INDEL;
    }
    for j in 0..=n {
        d[0][j] = j * INDEL;
    }
    for i in 1..=m {
        for j in 1..=n {
            let diag = d[i - 1][j - 1] + if a[i - 1] == b[j - 1] { 0 } else { REPLACE };
            d[i][j] = diag.min(d[i - 1][j] + INDEL).min(d[i][j - 1] + INDEL);
        }
    }
    d
}

/// Wagner-Fischer edit distance between the operation sequences.
pub fn edit_distance(a: &BasisWord, b: &BasisWord) -> Result<usize> {
    check_same_n(a, b)?;
    let (a, b) = (a.ops(), b.ops());
    let mut prev: Vec<usize> = (0..=b.len()).map(|j| j * INDEL).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = (i + 1) * INDEL;
        for (j, y) in b.iter().enumerate() {
            let diag = prev[j] + if x == y { 0 } else { REPLACE };
            cur[j + 1] = diag.min(prev[j + 1] + INDEL).min(cur[j] + INDEL);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[b.len()])
}

/// Optimal alignment from the full DP table. Traceback ties prefer a
/// deletion, then an insertion, then the diagonal move.
pub fn align(a: &BasisWord, b: &BasisWord) -> Result<Alignment> {
    check_same_n(a, b)?;
    let (x, y) = (a.ops(), b.ops());
    let d = dp_table(x, y);
    let (mut i, mut j) = (x.len(), y.len());
    let mut columns = Vec::with_capacity(i + j);
    while i > 0 || j > 0 {
        if i > 0 && d[i][j] == d[i - 1][j] + INDEL {
            columns.push((Some(x[i - 1]), None));
            i -= 1;
        } else if j > 0 && d[i][j] == d[i][j - 1] + INDEL {
            columns.push((None, Some(y[j - 1])));
            j -= 1;
        } else {
            columns.push((Some(x[i - 1]), Some(y[j - 1])));
            i -= 1;
            j -= 1;
        }
    }
    columns.reverse();
    Ok(Alignment { columns })
}

/// Uniform crossover over the aligned parents with an explicit mask: when
/// `take_first()` is true the first child takes the first parent's column
/// entry and the second child the second parent's; otherwise they trade.
/// Gaps are dropped from both children.
pub fn crossover_with_mask<F: FnMut() -> bool>(
    a: &BasisWord,
    b: &BasisWord,
    mut take_first: F,
) -> Result<(BasisWord, BasisWord)> {
    let alignment = align(a, b)?;
    let mut c1 = Vec::with_capacity(alignment.len());
    let mut c2 = Vec::with_capacity(alignment.len());
    for &(x, y) in &alignment.columns {
        let (p, q) = if take_first() { (x, y) } else { (y, x) };
        c1.extend(p);
        c2.extend(q);
    }
    Ok((
        BasisWord::from_ops_unchecked(a.n(), c1),
        BasisWord::from_ops_unchecked(a.n(), c2),
    ))
}

/// Alignment crossover with a fair coin per aligned column.
pub fn crossover<R: Rng + ?Sized>(
    a: &BasisWord,
    b: &BasisWord,
    rng: &mut R,
) -> Result<(BasisWord, BasisWord)> {
    crossover_with_mask(a, b, || rng.random_bool(0.5))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(tokens: &str) -> BasisWord {
        BasisWord::parse_tokens(4, tokens).unwrap()
    }

    fn p1() -> BasisWord {
        w("S:1:2 A:2:1 A:1:2")
    }

    fn p2() -> BasisWord {
        w("A:2:1 S:1:2")
    }

    #[test]
    fn worked_example_distance() {
        assert_eq!(edit_distance(&p1(), &p2()).unwrap(), 3);
        // The printed alignment pairs P1 against A12 S12; that word is also at
        // distance 3.
        assert_eq!(edit_distance(&p1(), &w("A:1:2 S:1:2")).unwrap(), 3);
    }

    #[test]
    fn distance_edge_cases() {
        let word = p1();
        assert_eq!(edit_distance(&word, &word).unwrap(), 0);
        assert_eq!(edit_distance(&w(""), &word).unwrap(), word.len());
        assert_eq!(edit_distance(&w("A:1:2"), &w("A:2:1")).unwrap(), 2);
        let other_n = BasisWord::identity(5);
        assert!(edit_distance(&word, &other_n).is_err());
    }

    #[test]
    fn alignment_of_worked_example() {
        let al = align(&p1(), &p2()).unwrap();
        assert_eq!(al.cost(), 3);
        assert!(al.len() <= p1().len() + p2().len());
        assert_eq!(al.ungapped(0), p1().ops());
        assert_eq!(al.ungapped(1), p2().ops());
        assert!(al.columns.iter().all(|c| c.0.is_some() || c.1.is_some()));
    }

    #[test]
    fn self_alignment_has_no_gaps() {
        let al = align(&p1(), &p1()).unwrap();
        assert_eq!(al.len(), 3);
        assert!(al.columns.iter().all(|(a, b)| a.is_some() && a == b));
    }

    #[test]
    fn crossover_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let (c1, c2) = crossover(&p1(), &p1(), &mut rng).unwrap();
        assert_eq!((c1, c2), (p1(), p1()));
        let (c1, c2) = crossover_with_mask(&p1(), &p2(), || true).unwrap();
        assert_eq!((c1, c2), (p1(), p2()));
        let (c1, c2) = crossover_with_mask(&p1(), &p2(), || false).unwrap();
        assert_eq!((c1, c2), (p2(), p1()));
    }

    fn arb_word(n: usize, max_len: usize) -> impl Strategy<Value = BasisWord> {
        prop::collection::vec((any::<bool>(), 0..n, 1..n), 0..max_len).prop_map(move |raw| {
            let ops = raw
                .into_iter()
                .map(|(swap, i, d)| {
                    let j = (i + d) % n;
                    if swap {
                        ElementaryOp::swap(i, j)
                    } else {
                        ElementaryOp::add(i, j)
                    }
                })
                .collect();
            BasisWord::new(n, ops).unwrap()
        })
    }

    proptest! {
        #[test]
        fn distance_is_a_metric(a in arb_word(3, 12), b in arb_word(3, 12), c in arb_word(3, 12)) {
            let ab = edit_distance(&a, &b).unwrap();
            prop_assert_eq!(ab, edit_distance(&b, &a).unwrap());
            prop_assert_eq!(ab == 0, a == b);
            let bc = edit_distance(&b, &c).unwrap();
            let ac = edit_distance(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc);
        }

        #[test]
        fn alignment_realizes_distance(a in arb_word(3, 12), b in arb_word(3, 12)) {
            let al = align(&a, &b).unwrap();
            prop_assert_eq!(al.cost(), edit_distance(&a, &b).unwrap());
            prop_assert_eq!(al.ungapped(0), a.ops().to_vec());
            prop_assert_eq!(al.ungapped(1), b.ops().to_vec());
        }

        #[test]
        fn crossover_is_geodesic(a in arb_word(3, 12), b in arb_word(3, 12), seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (c1, c2) = crossover(&a, &b, &mut rng).unwrap();
            let ab = edit_distance(&a, &b).unwrap();
            for c in [&c1, &c2] {
                let through = edit_distance(&a, c).unwrap() + edit_distance(c, &b).unwrap();
                prop_assert_eq!(through, ab);
                prop_assert!(c.to_matrix().is_nonsingular());
            }
            prop_assert_eq!(c1.len() + c2.len(), a.len() + b.len());
        }
    }
}

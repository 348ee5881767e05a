//! Nonsingular matrices encoded as variable-length words of elementary row
//! operations.
//!
//! A word `op_1 op_2 ... op_L` denotes the matrix product of its operations,
//! left to right; the empty word is the identity. Every such product is
//! nonsingular, so crossover and mutation on words never leave GL_n(Z2).

mod align;
mod rewrite;

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2::BitMatrix;

pub use align::{align, crossover, crossover_with_mask, edit_distance, Alignment};
pub use rewrite::{
    apply_rule, cancel_pair, find_rule_matches, insert_pair, rewrite_rules, simplify, Rule, RuleMatch,
    Slot, SymbolPattern,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum OpKind {
    /// Type 1: interchange rows `i` and `j`.
    Swap,
    /// Type 2: add row `i` to row `j`.
    Add,
}

/// One elementary operation with 0-based row indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ElementaryOp {
    pub kind: OpKind,
    pub i: usize,
    pub j: usize,
}

impl ElementaryOp {
    pub fn swap(i: usize, j: usize) -> Self {
        Self {
            kind: OpKind::Swap,
            i,
            j,
        }
    }

    pub fn add(i: usize, j: usize) -> Self {
        Self {
            kind: OpKind::Add,
            i,
            j,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.i == self.j || self.i >= n || self.j >= n {
            Err(Error::InvalidIndex {
                n,
                i: self.i,
                j: self.j,
            })
        } else {
            Ok(())
        }
    }

    pub fn to_matrix(&self, n: usize) -> Result<BitMatrix> {
        match self.kind {
            OpKind::Swap => BitMatrix::elementary_swap(n, self.i, self.j),
            OpKind::Add => BitMatrix::elementary_add(n, self.i, self.j),
        }
    }

    /// Left-multiplies `m` by this operation's matrix, in place.
    pub fn apply_left(&self, m: &mut BitMatrix) {
        match self.kind {
            OpKind::Swap => m.swap_rows(self.i, self.j),
            OpKind::Add => m.add_row(self.i, self.j),
        }
    }

    /// True when both operations denote the same matrix. Differs from `==`
    /// only for swaps, where `S^{ij} = S^{ji}`.
    pub fn same_matrix(&self, other: &ElementaryOp) -> bool {
        match (self.kind, other.kind) {
            (OpKind::Swap, OpKind::Swap) => {
                (self.i, self.j) == (other.i, other.j) || (self.i, self.j) == (other.j, other.i)
            }
            _ => self == other,
        }
    }

    /// Uniform over {Swap, Add} x ordered pairs `(i, j)`, `i != j`.
    /// Requires `n >= 2`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 2, "elementary operations need n >= 2");
        let kind = if rng.random_bool(0.5) {
            OpKind::Swap
        } else {
            OpKind::Add
        };
        let i = rng.random_range(0..n);
        let mut j = rng.random_range(0..n - 1);
        if j >= i {
            j += 1;
        }
        Self { kind, i, j }
    }
}

impl fmt::Display for ElementaryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.kind {
            OpKind::Swap => 'S',
            OpKind::Add => 'A',
        };
        write!(f, "{tag}:{}:{}", self.i + 1, self.j + 1)
    }
}

impl FromStr for ElementaryOp {
    type Err = Error;

    /// Parses `S:i:j` or `A:i:j` with 1-based indices.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("malformed elementary operation {s:?}"));
        let mut parts = s.split(':');
        let kind = match parts.next() {
            Some("S") => OpKind::Swap,
            Some("A") => OpKind::Add,
            _ => return Err(bad()),
        };
        let mut index = || -> Result<usize> {
            let v: usize = parts.next().ok_or_else(bad)?.parse().map_err(|_| bad())?;
            v.checked_sub(1).ok_or_else(bad)
        };
        let (i, j) = (index()?, index()?);
        if parts.next().is_some() {
            return Err(bad());
        }
        Ok(Self { kind, i, j })
    }
}

/// A variable-length word of elementary operations over dimension `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisWord {
    n: usize,
    ops: Vec<ElementaryOp>,
}

impl BasisWord {
    pub fn identity(n: usize) -> Self {
        Self { n, ops: Vec::new() }
    }

    pub fn new(n: usize, ops: Vec<ElementaryOp>) -> Result<Self> {
        for op in &ops {
            op.validate(n)?;
        }
        Ok(Self { n, ops })
    }

    pub(crate) fn from_ops_unchecked(n: usize, ops: Vec<ElementaryOp>) -> Self {
        debug_assert!(ops.iter().all(|op| op.validate(n).is_ok()));
        Self { n, ops }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn ops(&self) -> &[ElementaryOp] {
        &self.ops
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn into_ops(self) -> Vec<ElementaryOp> {
        self.ops
    }

    /// Concatenation `self ++ other`.
    pub fn concat(&self, other: &BasisWord) -> Result<BasisWord> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: other.n,
            });
        }
        let mut ops = self.ops.clone();
        ops.extend_from_slice(&other.ops);
        Ok(Self { n: self.n, ops })
    }

    /// The product `op_1 * op_2 * ... * op_L`.
    ///
    /// Built right to left as successive row operations on the identity, so
    /// the cost is `O(L * n / 64)` word operations.
    pub fn to_matrix(&self) -> BitMatrix {
        let mut m = BitMatrix::identity(self.n);
        for op in self.ops.iter().rev() {
            op.apply_left(&mut m);
        }
        m
    }

    /// Random word whose length is a rounded normal draw, clamped to at
    /// least one. Dimensions below two admit no operations and give the
    /// empty word.
    pub fn random<R: Rng + ?Sized>(n: usize, mean_len: f64, std_len: f64, rng: &mut R) -> Self {
        if n < 2 {
            return Self::identity(n);
        }
        let normal = Normal::new(mean_len, std_len).expect("finite length distribution");
        let draw: f64 = normal.sample(rng);
        let len = if draw < 1.0 { 1 } else { draw.round() as usize };
        let ops = (0..len).map(|_| ElementaryOp::random(n, rng)).collect();
        Self { n, ops }
    }

    /// Per-position mutation: with probability `rate` each symbol is, with
    /// equal odds, preceded by a fresh random operation, deleted, or replaced.
    /// A final slot after the last symbol can receive an insertion, so empty
    /// words can grow.
    pub fn mutate<R: Rng + ?Sized>(&self, rate: f64, rng: &mut R) -> BasisWord {
        self.mutate_counted(rate, rng).0
    }

    pub(crate) fn mutate_counted<R: Rng + ?Sized>(
        &self,
        rate: f64,
        rng: &mut R,
    ) -> (BasisWord, usize) {
        if self.n < 2 {
            return (self.clone(), 0);
        }
        let mut events = 0;
        let mut ops = Vec::with_capacity(self.ops.len() + 2);
        for &op in &self.ops {
            if !rng.random_bool(rate) {
                ops.push(op);
                continue;
            }
            events += 1;
            match rng.random_range(0..3) {
                0 => {
                    ops.push(ElementaryOp::random(self.n, rng));
                    ops.push(op);
                }
                1 => {}
                _ => ops.push(ElementaryOp::random(self.n, rng)),
            }
        }
        if rng.random_bool(rate) {
            ops.push(ElementaryOp::random(self.n, rng));
        }
        (Self { n: self.n, ops }, events)
    }

    /// Text form: a header line `n=<dim>` followed by whitespace-separated
    /// `S:i:j` / `A:i:j` tokens.
    pub fn to_text(&self) -> String {
        format!("n={}\n{}\n", self.n, self.token_string())
    }

    /// Tokens only, without the header.
    pub fn token_string(&self) -> String {
        self.ops
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("missing n=<dim> header".into()))?
            .trim();
        let n: usize = header
            .strip_prefix("n=")
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}")))?;
        let body = lines.collect::<Vec<_>>().join(" ");
        Self::parse_tokens(n, &body)
    }

    pub fn parse_tokens(n: usize, tokens: &str) -> Result<Self> {
        let ops = tokens
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<ElementaryOp>>>()?;
        Self::new(n, ops)
    }
}

impl fmt::Display for BasisWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.token_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn w(n: usize, tokens: &str) -> BasisWord {
        BasisWord::parse_tokens(n, tokens).unwrap()
    }

    #[test]
    fn empty_word_is_identity() {
        assert_eq!(BasisWord::identity(4).to_matrix(), BitMatrix::identity(4));
    }

    #[test]
    fn worked_example_product() {
        let p1 = w(4, "S:1:2 A:2:1 A:1:2");
        assert_eq!(p1.to_matrix(), w(4, "A:2:1").to_matrix());
        assert_eq!(p1.to_matrix(), BitMatrix::elementary_add(4, 1, 0).unwrap());
        assert_eq!(
            w(3, "A:1:2").to_matrix(),
            BitMatrix::elementary_add(3, 0, 1).unwrap()
        );
    }

    #[test]
    fn product_matches_explicit_multiplication() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let word = BasisWord::random(9, 12.0, 4.0, &mut rng);
            let explicit = word
                .ops()
                .iter()
                .fold(BitMatrix::identity(9), |acc, op| {
                    acc.mul(&op.to_matrix(9).unwrap()).unwrap()
                });
            assert_eq!(word.to_matrix(), explicit);
            assert!(word.to_matrix().is_nonsingular());
        }
    }

    #[test]
    fn random_word_is_reproducible() {
        let a = BasisWord::random(10, 30.0, 10.0, &mut ChaCha8Rng::seed_from_u64(5));
        let b = BasisWord::random(10, 30.0, 10.0, &mut ChaCha8Rng::seed_from_u64(5));
        assert_eq!(a, b);
        assert!(!a.is_empty());
    }

    #[test]
    fn random_word_length_statistics() {
        // mean 60, sd 20 over 10^4 draws: the sample mean has sd 0.2, so
        // the +-2 window is a ten-sigma band.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let total: usize = (0..10_000)
            .map(|_| BasisWord::random(20, 60.0, 20.0, &mut rng).len())
            .sum();
        let mean = total as f64 / 10_000.0;
        assert!((mean - 60.0).abs() < 2.0, "mean length {mean}");
    }

    #[test]
    fn short_lengths_clamp_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            assert!(BasisWord::random(5, -3.0, 1.0, &mut rng).len() == 1);
        }
    }

    #[test]
    fn random_ops_cover_all_ordered_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..5_000 {
            let op = ElementaryOp::random(4, &mut rng);
            op.validate(4).unwrap();
            seen.insert(op);
        }
        assert_eq!(seen.len(), 2 * 4 * 3);
    }

    #[test]
    fn mutation_without_events_is_identity() {
        let word = w(5, "S:1:2 A:3:4 A:5:1");
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(word.mutate(0.0, &mut rng), word);
    }

    #[test]
    fn mutation_rate_matches_expectation() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let word = BasisWord::random(12, 40.0, 1.0, &mut rng);
        let trials = 4_000;
        let mut events = 0usize;
        let mut positions = 0usize;
        for _ in 0..trials {
            let (m, e) = word.mutate_counted(0.05, &mut rng);
            assert!(m.to_matrix().is_nonsingular());
            events += e;
            positions += word.len();
        }
        let p = 0.05;
        let expected = p * positions as f64;
        let sd = (positions as f64 * p * (1.0 - p)).sqrt();
        assert!(
            (events as f64 - expected).abs() < 4.0 * sd,
            "events {events}, expected {expected}"
        );
    }

    #[test]
    fn empty_word_can_grow() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let grown = (0..200).any(|_| !BasisWord::identity(6).mutate(0.05, &mut rng).is_empty());
        assert!(grown);
    }

    #[test]
    fn text_format_round_trip() {
        let word = w(4, "S:1:2 A:2:1 A:1:2");
        let text = word.to_text();
        assert_eq!(text, "n=4\nS:1:2 A:2:1 A:1:2\n");
        assert_eq!(BasisWord::parse_text(&text).unwrap(), word);
        assert_eq!(BasisWord::parse_text("n=3\n").unwrap(), BasisWord::identity(3));
        assert!(BasisWord::parse_text("S:1:2").is_err());
        assert!(BasisWord::parse_text("n=2\nS:1:3").is_err());
        assert!(BasisWord::parse_text("n=2\nA:1:1").is_err());
        assert!(BasisWord::parse_text("n=2\nA:0:1").is_err());
        assert!(BasisWord::parse_text("n=2\nX:1:2").is_err());
    }
}

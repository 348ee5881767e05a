//! Dense, bit-packed linear algebra over Z2.
//!
//! Addition is XOR and multiplication is AND. Vectors and matrix rows are
//! stored as `u64` blocks so that row operations and inner products run a
//! word at a time. Bits past the logical dimension are always zero.
//!
//! All indices in this module are 0-based. The text formats in [`crate::io`]
//! and [`crate::elemword`] use 1-based indices and convert at the boundary.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WORD_BITS: usize = u64::BITS as usize;

#[inline]
fn words_for(n: usize) -> usize {
    n.div_ceil(WORD_BITS)
}

#[inline]
fn tail_mask(n: usize) -> u64 {
    match n % WORD_BITS {
        0 => u64::MAX,
        r => (1u64 << r) - 1,
    }
}

/// A column vector in Z2^n.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct BitVector {
    n: usize,
    words: Vec<u64>,
}

impl BitVector {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            words: vec![0; words_for(n)],
        }
    }

    pub fn ones(n: usize) -> Self {
        let mut v = Self {
            n,
            words: vec![u64::MAX; words_for(n)],
        };
        v.clear_tail();
        v
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut v = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            if b {
                v.set(i, true);
            }
        }
        v
    }

    /// Builds the vector whose coordinate `i` is bit `i` of `index`.
    /// Used to enumerate the whole cube for `n <= 64`.
    pub fn from_index(n: usize, index: u64) -> Self {
        assert!(n <= WORD_BITS, "from_index supports n <= 64");
        let mut v = Self::zeros(n);
        if n > 0 {
            v.words[0] = index & tail_mask(n);
        }
        v
    }

    /// Parses a string of `0`/`1` characters, first character = coordinate 0.
    pub fn parse(s: &str) -> Result<Self> {
        let mut v = Self::zeros(s.len());
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(i, true),
                other => {
                    return Err(Error::Parse(format!(
                        "unexpected character {other:?} in bit string"
                    )))
                }
            }
        }
        Ok(v)
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut v = Self {
            n,
            words: (0..words_for(n)).map(|_| rng.random::<u64>()).collect(),
        };
        v.clear_tail();
        v
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.n, "index {i} out of range for length {}", self.n);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.n, "index {i} out of range for length {}", self.n);
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            self.words[i / WORD_BITS] |= mask;
        } else {
            self.words[i / WORD_BITS] &= !mask;
        }
    }

    #[inline]
    pub fn flip(&mut self, i: usize) {
        assert!(i < self.n, "index {i} out of range for length {}", self.n);
        self.words[i / WORD_BITS] ^= 1u64 << (i % WORD_BITS);
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Parity of the vector, i.e. the XOR of all coordinates.
    pub fn parity(&self) -> bool {
        self.words.iter().fold(0u32, |acc, w| acc ^ (w.count_ones() & 1)) == 1
    }

    pub fn xor_assign(&mut self, other: &BitVector) {
        assert_eq!(self.n, other.n, "xor of vectors with different lengths");
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= *b;
        }
    }

    pub fn xor(&self, other: &BitVector) -> BitVector {
        let mut out = self.clone();
        out.xor_assign(other);
        out
    }

    /// Inner product over Z2.
    pub fn dot(&self, other: &BitVector) -> bool {
        assert_eq!(self.n, other.n);
        dot_words(&self.words, &other.words)
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.n).map(move |i| self.get(i))
    }

    /// Indices of the 1-coordinates, ascending.
    pub fn ones_iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + t)
                }
            })
        })
    }

    /// Copies `src[from..]` over `self[from..]`; used by one-point crossover.
    pub(crate) fn splice_suffix(&mut self, src: &BitVector, from: usize) {
        assert_eq!(self.n, src.n);
        for i in from..self.n {
            self.set(i, src.get(i));
        }
    }

    fn clear_tail(&mut self) {
        if let Some(last) = self.words.last_mut() {
            *last &= tail_mask(self.n);
        }
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector({self})")
    }
}

impl From<BitVector> for String {
    fn from(v: BitVector) -> Self {
        v.to_string()
    }
}

impl TryFrom<String> for BitVector {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        BitVector::parse(&s)
    }
}

#[inline]
fn dot_words(a: &[u64], b: &[u64]) -> bool {
    a.iter()
        .zip(b)
        .fold(0u32, |acc, (x, y)| acc ^ ((x & y).count_ones() & 1))
        == 1
}

/// A square matrix over Z2 with bit-packed rows.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "MatrixFile", into = "MatrixFile")]
pub struct BitMatrix {
    n: usize,
    stride: usize,
    data: Vec<u64>,
}

/// On-disk shape of a matrix: `{"n": 3, "rows": ["100", "101", "010"]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixFile {
    pub n: usize,
    pub rows: Vec<String>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        let stride = words_for(n);
        Self {
            n,
            stride,
            data: vec![0; n * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds a matrix from `0`/`1` row strings.
    pub fn from_rows<S: AsRef<str>>(rows: &[S]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            let v = BitVector::parse(row.as_ref())?;
            if v.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: v.len(),
                });
            }
            m.row_mut(i).copy_from_slice(v.words());
        }
        Ok(m)
    }

    /// Builds a matrix whose row `i` is `rows[i]`.
    pub fn from_row_vectors(rows: &[BitVector]) -> Result<Self> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: row.len(),
                });
            }
            m.row_mut(i).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Type 1 elementary matrix: the identity with rows `i` and `j` exchanged.
    pub fn elementary_swap(n: usize, i: usize, j: usize) -> Result<Self> {
        check_pair(n, i, j)?;
        let mut m = Self::identity(n);
        m.swap_rows(i, j);
        Ok(m)
    }

    /// Type 2 elementary matrix: the identity with row `i` added to row `j`,
    /// i.e. an extra 1 at entry `(j, i)`.
    pub fn elementary_add(n: usize, i: usize, j: usize) -> Result<Self> {
        check_pair(n, i, j)?;
        let mut m = Self::identity(n);
        m.set(j, i, true);
        Ok(m)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        assert!(i < self.n && j < self.n);
        (self.data[i * self.stride + j / WORD_BITS] >> (j % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, bit: bool) {
        assert!(i < self.n && j < self.n);
        let word = &mut self.data[i * self.stride + j / WORD_BITS];
        let mask = 1u64 << (j % WORD_BITS);
        if bit {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    #[inline]
    fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_vector(&self, i: usize) -> BitVector {
        BitVector {
            n: self.n,
            words: self.row(i).to_vec(),
        }
    }

    pub fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(i * self.stride + w, j * self.stride + w);
        }
    }

    /// `Row_dst <- Row_dst + Row_src`, the in-place left product with the
    /// Type 2 elementary matrix that adds row `src` to row `dst`.
    pub fn add_row(&mut self, src: usize, dst: usize) {
        assert_ne!(src, dst);
        for w in 0..self.stride {
            let s = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= s;
        }
    }

    /// `M v` over Z2.
    pub fn mul_vec(&self, v: &BitVector) -> Result<BitVector> {
        self.check_dim(v.len())?;
        Ok(self.mul_vec_unchecked(v))
    }

    pub(crate) fn mul_vec_unchecked(&self, v: &BitVector) -> BitVector {
        let mut out = BitVector::zeros(self.n);
        for i in 0..self.n {
            if dot_words(self.row(i), &v.words) {
                out.words[i / WORD_BITS] |= 1u64 << (i % WORD_BITS);
            }
        }
        out
    }

    /// `self * rhs`, accumulating rows of `rhs` selected by the bits of each
    /// row of `self`.
    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        self.check_dim(rhs.n)?;
        let mut out = BitMatrix::zeros(self.n);
        for i in 0..self.n {
            let (lhs_row, stride) = (self.row(i), self.stride);
            for (wi, &word) in lhs_row.iter().enumerate() {
                let mut w = word;
                while w != 0 {
                    let k = wi * WORD_BITS + w.trailing_zeros() as usize;
                    w &= w - 1;
                    for c in 0..stride {
                        out.data[i * stride + c] ^= rhs.data[k * stride + c];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Rank over Z2.
    pub fn rank(&self) -> usize {
        let mut a = self.clone();
        let mut rank = 0;
        for col in 0..self.n {
            let Some(p) = (rank..self.n).find(|&r| a.get(r, col)) else {
                continue;
            };
            a.swap_rows(rank, p);
            for r in 0..self.n {
                if r != rank && a.get(r, col) {
                    a.add_row(rank, r);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_nonsingular(&self) -> bool {
        self.rank() == self.n
    }

    /// Gauss-Jordan inverse. Pivots on the lowest-index row holding a 1 in
    /// the pivot column.
    pub fn inverse(&self) -> Result<BitMatrix> {
        let n = self.n;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n).find(|&r| a.get(r, col)).ok_or(Error::Singular)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            for r in 0..n {
                if r != col && a.get(r, col) {
                    a.add_row(col, r);
                    inv.add_row(col, r);
                }
            }
        }
        Ok(inv)
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                if self.get(i, j) {
                    t.set(j, i, true);
                }
            }
        }
        t
    }

    pub fn row_strings(&self) -> Vec<String> {
        (0..self.n).map(|i| self.row_vector(i).to_string()).collect()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found == self.n {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.n,
                found,
            })
        }
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_strings()).finish()
    }
}

impl From<BitMatrix> for MatrixFile {
    fn from(m: BitMatrix) -> Self {
        MatrixFile {
            n: m.n,
            rows: m.row_strings(),
        }
    }
}

impl TryFrom<MatrixFile> for BitMatrix {
    type Error = Error;

    fn try_from(f: MatrixFile) -> Result<Self> {
        if f.rows.len() != f.n {
            return Err(Error::DimensionMismatch {
                expected: f.n,
                found: f.rows.len(),
            });
        }
        BitMatrix::from_rows(&f.rows)
    }
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j || i >= n || j >= n {
        Err(Error::InvalidIndex { n, i, j })
    } else {
        Ok(())
    }
}

/// Maps every vector of `pop` to `T v`, preserving order.
pub fn change_basis(t: &BitMatrix, pop: &[BitVector]) -> Result<Vec<BitVector>> {
    pop.iter().map(|v| t.mul_vec(v)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table2_t() -> BitMatrix {
        BitMatrix::from_rows(&["100", "101", "010"]).unwrap()
    }

    fn v(s: &str) -> BitVector {
        BitVector::parse(s).unwrap()
    }

    #[test]
    fn mat_vec_examples() {
        let t = table2_t();
        assert_eq!(t.mul_vec(&v("111")).unwrap(), v("101"));
        assert_eq!(t.mul_vec(&v("110")).unwrap(), v("111"));
        assert_eq!(BitMatrix::identity(3).mul_vec(&v("010")).unwrap(), v("010"));
        assert!(matches!(
            t.mul_vec(&v("1111")),
            Err(Error::DimensionMismatch { expected: 3, found: 4 })
        ));
    }

    #[test]
    fn mat_mul_examples() {
        let a = table2_t();
        assert_eq!(a.mul(&BitMatrix::identity(3)).unwrap(), a);
        let s = BitMatrix::elementary_swap(4, 0, 1).unwrap();
        assert_eq!(s.mul(&s).unwrap(), BitMatrix::identity(4));
        let add = BitMatrix::elementary_add(4, 1, 0).unwrap();
        assert_eq!(add.mul(&add).unwrap(), BitMatrix::identity(4));
        assert!(a.mul(&BitMatrix::identity(4)).is_err());
    }

    #[test]
    fn inverse_of_table2_matrix() {
        let t = table2_t();
        let inv = t.inverse().unwrap();
        assert_eq!(inv, BitMatrix::from_rows(&["100", "001", "110"]).unwrap());
        assert_eq!(t.mul(&inv).unwrap(), BitMatrix::identity(3));
        assert_eq!(inv.mul(&t).unwrap(), BitMatrix::identity(3));
        assert_eq!(BitMatrix::identity(5).inverse().unwrap(), BitMatrix::identity(5));
        assert!(matches!(BitMatrix::zeros(3).inverse(), Err(Error::Singular)));
    }

    #[test]
    fn nonsingularity() {
        assert!(table2_t().is_nonsingular());
        assert!(BitMatrix::identity(7).is_nonsingular());
        let dup = BitMatrix::from_rows(&["110", "110", "001"]).unwrap();
        assert!(!dup.is_nonsingular());
        assert_eq!(dup.rank(), 2);
    }

    #[test]
    fn elementary_matrices() {
        assert_eq!(
            BitMatrix::elementary_swap(3, 0, 1).unwrap(),
            BitMatrix::from_rows(&["010", "100", "001"]).unwrap()
        );
        assert_eq!(
            BitMatrix::elementary_add(3, 0, 1).unwrap(),
            BitMatrix::from_rows(&["100", "110", "001"]).unwrap()
        );
        assert!(BitMatrix::elementary_add(3, 1, 1).is_err());
        assert!(BitMatrix::elementary_swap(3, 0, 3).is_err());
    }

    #[test]
    fn elementary_add_acts_as_row_operation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let n = 70;
            let m = BitMatrix::from_row_vectors(
                &(0..n).map(|_| BitVector::random(n, &mut rng)).collect::<Vec<_>>(),
            )
            .unwrap();
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i == j {
                continue;
            }
            let prod = BitMatrix::elementary_add(n, i, j).unwrap().mul(&m).unwrap();
            assert_eq!(prod.row_vector(i), m.row_vector(i));
            assert_eq!(prod.row_vector(j), m.row_vector(j).xor(&m.row_vector(i)));
            let mut in_place = m.clone();
            in_place.add_row(i, j);
            assert_eq!(in_place, prod);
        }
    }

    #[test]
    fn change_basis_table2_and_round_trip() {
        let t = table2_t();
        let pop: Vec<_> = ["111", "110", "101", "011", "100", "010", "001", "000"]
            .iter()
            .map(|s| v(s))
            .collect();
        let mapped = change_basis(&t, &pop).unwrap();
        // The rows for 011, 010 and 001 differ from the printed table, which
        // lists 111 twice; these are the values T actually produces.
        let expected: Vec<_> = ["101", "111", "100", "011", "110", "001", "010", "000"]
            .iter()
            .map(|s| v(s))
            .collect();
        assert_eq!(mapped, expected);
        let back = change_basis(&t.inverse().unwrap(), &mapped).unwrap();
        assert_eq!(back, pop);
        assert_eq!(change_basis(&BitMatrix::identity(3), &pop).unwrap(), pop);
    }

    #[test]
    fn vector_basics() {
        let x = v("10110");
        assert_eq!(x.count_ones(), 3);
        assert!(x.parity());
        assert_eq!(x.ones_iter().collect::<Vec<_>>(), vec![0, 2, 3]);
        assert_eq!(BitVector::ones(67).count_ones(), 67);
        assert_eq!(BitVector::from_index(4, 0b0101), v("1010"));
        assert!(BitVector::parse("012").is_err());
    }

    #[test]
    fn matrix_json_format() {
        let t = table2_t();
        let json = serde_json::to_string(&t).unwrap();
        assert_eq!(json, r#"{"n":3,"rows":["100","101","010"]}"#);
        let back: BitMatrix = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(serde_json::from_str::<BitMatrix>(r#"{"n":3,"rows":["10","01"]}"#).is_err());
        assert!(serde_json::from_str::<BitMatrix>(r#"{"n":2,"rows":["10","0a"]}"#).is_err());
    }
}

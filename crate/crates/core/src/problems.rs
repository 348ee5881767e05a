//! Benchmark fitness functions and instance generators.

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::elemword::BasisWord;
use crate::error::{Error, Result};
use crate::gf2::{BitMatrix, BitVector};

/// A deterministic fitness function on `Z2^n`. Higher is better.
pub trait FitnessProblem: Sync {
    fn len(&self) -> usize;

    fn evaluate(&self, v: &BitVector) -> f64;

    /// The optimal fitness, when known.
    fn optimum(&self) -> Option<f64> {
        None
    }
}

impl<P: FitnessProblem + ?Sized> FitnessProblem for &P {
    fn len(&self) -> usize {
        (**self).len()
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        (**self).evaluate(v)
    }

    fn optimum(&self) -> Option<f64> {
        (**self).optimum()
    }
}

/// Number of ones.
pub fn onemax(v: &BitVector) -> f64 {
    v.count_ones() as f64
}

/// `F(v) = sum_i (a_1 ^ ... ^ a_n) ^ a_i`: the popcount when the total
/// parity is even, otherwise the number of zeros.
pub fn parity_f(v: &BitVector) -> f64 {
    let k = v.count_ones();
    if v.parity() {
        (v.len() - k) as f64
    } else {
        k as f64
    }
}

/// The coordinate change `a'_i = sum_j a_j + a_i`, i.e. `I + J` with `J`
/// all ones. Under it `parity_f(v) = onemax(T v)`. Nonsingular (and its own
/// inverse) for even `n`.
pub fn parity_onemax_basis(n: usize) -> BitMatrix {
    let mut t = BitMatrix::zeros(n);
    for i in 0..n {
        for j in 0..n {
            t.set(i, j, i != j);
        }
    }
    t
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OneMax {
    pub n: usize,
}

impl FitnessProblem for OneMax {
    fn len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        onemax(v)
    }

    fn optimum(&self) -> Option<f64> {
        Some(self.n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParityF {
    pub n: usize,
}

impl FitnessProblem for ParityF {
    fn len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        parity_f(v)
    }

    fn optimum(&self) -> Option<f64> {
        Some(self.n as f64)
    }
}

/// Onemax composed with a hidden coordinate change: `f(v) = |T v|`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "VariantOneMaxFile", into = "VariantOneMaxFile")]
pub struct VariantOneMax {
    word: BasisWord,
    matrix: BitMatrix,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct VariantOneMaxFile {
    n: usize,
    word: String,
    rows: Vec<String>,
}

impl VariantOneMax {
    /// Builds `T` as the product of a random word whose length has mean `3n`
    /// and standard deviation `n/2`.
    pub fn generate<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let word = BasisWord::random(n, 3.0 * n as f64, n as f64 / 2.0, rng);
        Ok(Self::from_word(word))
    }

    pub fn from_word(word: BasisWord) -> Self {
        let matrix = word.to_matrix();
        Self { word, matrix }
    }

    /// An instance from an explicit nonsingular matrix, with no origin word.
    pub fn from_matrix(matrix: BitMatrix) -> Result<Self> {
        if !matrix.is_nonsingular() {
            return Err(Error::Singular);
        }
        Ok(Self {
            word: BasisWord::identity(matrix.n()),
            matrix,
        })
    }

    pub fn word(&self) -> &BasisWord {
        &self.word
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    /// The unique optimum `T^{-1} (1, ..., 1)`.
    pub fn optimal_genotype(&self) -> BitVector {
        let inv = self.matrix.inverse().expect("instance matrix is nonsingular");
        inv.mul_vec_unchecked(&BitVector::ones(self.matrix.n()))
    }
}

impl FitnessProblem for VariantOneMax {
    fn len(&self) -> usize {
        self.matrix.n()
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        self.matrix.mul_vec_unchecked(v).count_ones() as f64
    }

    fn optimum(&self) -> Option<f64> {
        Some(self.matrix.n() as f64)
    }
}

impl From<VariantOneMax> for VariantOneMaxFile {
    fn from(p: VariantOneMax) -> Self {
        VariantOneMaxFile {
            n: p.matrix.n(),
            word: p.word.token_string(),
            rows: p.matrix.row_strings(),
        }
    }
}

impl TryFrom<VariantOneMaxFile> for VariantOneMax {
    type Error = Error;

    fn try_from(f: VariantOneMaxFile) -> Result<Self> {
        let word = BasisWord::parse_tokens(f.n, &f.word)?;
        let matrix = BitMatrix::from_rows(&f.rows)?;
        if matrix.n() != f.n {
            return Err(Error::DimensionMismatch {
                expected: f.n,
                found: matrix.n(),
            });
        }
        if !matrix.is_nonsingular() {
            return Err(Error::Singular);
        }
        if !word.is_empty() && word.to_matrix() != matrix {
            return Err(Error::Parse("word and rows denote different matrices".into()));
        }
        Ok(Self { word, matrix })
    }
}

/// NK landscape with random neighbourhoods.
///
/// Gene `i` reads a table of `2^(K+1)` contributions indexed by its own
/// allele (most significant bit) followed by the alleles of its neighbours
/// in ascending gene order. Fitness is the mean contribution, so it lies in
/// `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NkFile", into = "NkFile")]
pub struct NkLandscape {
    n: usize,
    k: usize,
    neighbors: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
}

/// JSON shape; neighbour indices are 1-based.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct NkFile {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "K")]
    k: usize,
    neighbors: Vec<Vec<usize>>,
    tables: Vec<Vec<f64>>,
}

impl NkLandscape {
    pub fn generate<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self> {
        if n == 0 || k >= n {
            return Err(Error::InvalidParameter(format!(
                "NK landscape needs 0 <= K < N, got N={n}, K={k}"
            )));
        }
        let neighbors = (0..n)
            .map(|i| {
                let mut nb: Vec<usize> = index::sample(rng, n - 1, k)
                    .into_iter()
                    .map(|x| if x >= i { x + 1 } else { x })
                    .collect();
                nb.sort_unstable();
                nb
            })
            .collect();
        let width = 1usize << (k + 1);
        let tables = (0..n)
            .map(|_| (0..width).map(|_| rng.random::<f64>()).collect())
            .collect();
        Ok(Self {
            n,
            k,
            neighbors,
            tables,
        })
    }

    /// Builds an instance from explicit parts (0-based neighbour indices).
    pub fn from_parts(n: usize, k: usize, neighbors: Vec<Vec<usize>>, tables: Vec<Vec<f64>>) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if n == 0 || k >= n {
            return bad(format!("NK landscape needs 0 <= K < N, got N={n}, K={k}"));
        }
        if neighbors.len() != n || tables.len() != n {
            return bad("expected one neighbour set and one table per gene".into());
        }
        for (i, (nb, table)) in neighbors.iter().zip(&tables).enumerate() {
            let mut sorted = nb.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != k || sorted.iter().any(|&x| x >= n || x == i) {
                return bad(format!("gene {i}: neighbours must be {k} distinct other genes"));
            }
            if table.len() != 1 << (k + 1) {
                return bad(format!("gene {i}: table must have {} entries", 1 << (k + 1)));
            }
            if table.iter().any(|x| !(0.0..=1.0).contains(x)) {
                return bad(format!("gene {i}: contributions must lie in [0, 1]"));
            }
        }
        let neighbors = neighbors
            .into_iter()
            .map(|mut nb| {
                nb.sort_unstable();
                nb
            })
            .collect();
        Ok(Self {
            n,
            k,
            neighbors,
            tables,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn neighbors(&self) -> &[Vec<usize>] {
        &self.neighbors
    }

    pub fn tables(&self) -> &[Vec<f64>] {
        &self.tables
    }

    fn table_index(&self, gene: usize, v: &BitVector) -> usize {
        self.neighbors[gene]
            .iter()
            .fold(v.get(gene) as usize, |acc, &nb| (acc << 1) | v.get(nb) as usize)
    }
}

impl FitnessProblem for NkLandscape {
    fn len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        assert_eq!(v.len(), self.n, "genotype length");
        let total: f64 = (0..self.n)
            .map(|g| self.tables[g][self.table_index(g, v)])
            .sum();
        total / self.n as f64
    }
}

impl From<NkLandscape> for NkFile {
    fn from(p: NkLandscape) -> Self {
        NkFile {
            n: p.n,
            k: p.k,
            neighbors: p
                .neighbors
                .into_iter()
                .map(|nb| nb.into_iter().map(|x| x + 1).collect())
                .collect(),
            tables: p.tables,
        }
    }
}

impl TryFrom<NkFile> for NkLandscape {
    type Error = Error;

    fn try_from(f: NkFile) -> Result<Self> {
        let neighbors = f
            .neighbors
            .into_iter()
            .map(|nb| {
                nb.into_iter()
                    .map(|x| {
                        x.checked_sub(1)
                            .ok_or_else(|| Error::Parse("neighbour indices are 1-based".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        NkLandscape::from_parts(f.n, f.k, neighbors, f.tables)
    }
}

/// Wraps a closure as a problem; handy for pulled-back or synthetic
/// functions.
pub struct FnProblem<F> {
    n: usize,
    f: F,
    optimum: Option<f64>,
}

impl<F: Fn(&BitVector) -> f64 + Sync> FnProblem<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self {
            n,
            f,
            optimum: None,
        }
    }

    pub fn with_optimum(mut self, optimum: f64) -> Self {
        self.optimum = Some(optimum);
        self
    }
}

impl<F: Fn(&BitVector) -> f64 + Sync> FitnessProblem for FnProblem<F> {
    fn len(&self) -> usize {
        self.n
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        (self.f)(v)
    }

    fn optimum(&self) -> Option<f64> {
        self.optimum
    }
}

/// Any benchmark instance, as stored in instance files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Instance {
    Onemax(OneMax),
    Parity(ParityF),
    VariantOnemax(VariantOneMax),
    Nk(NkLandscape),
}

impl Instance {
    pub fn kind(&self) -> &'static str {
        match self {
            Instance::Onemax(_) => "onemax",
            Instance::Parity(_) => "parity",
            Instance::VariantOnemax(_) => "variant-onemax",
            Instance::Nk(_) => "nk",
        }
    }

    fn as_problem(&self) -> &dyn FitnessProblem {
        match self {
            Instance::Onemax(p) => p,
            Instance::Parity(p) => p,
            Instance::VariantOnemax(p) => p,
            Instance::Nk(p) => p,
        }
    }
}

impl FitnessProblem for Instance {
    fn len(&self) -> usize {
        self.as_problem().len()
    }

    fn evaluate(&self, v: &BitVector) -> f64 {
        self.as_problem().evaluate(v)
    }

    fn optimum(&self) -> Option<f64> {
        self.as_problem().optimum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn v(s: &str) -> BitVector {
        BitVector::parse(s).unwrap()
    }

    #[test]
    fn onemax_values() {
        assert_eq!(onemax(&v("111")), 3.0);
        assert_eq!(onemax(&v("000")), 0.0);
        assert_eq!(onemax(&v("101")), 2.0);
    }

    #[test]
    fn parity_values() {
        assert_eq!(parity_f(&v("1000")), 3.0);
        assert_eq!(parity_f(&v("1100")), 2.0);
        for idx in 0..4 {
            let x = BitVector::from_index(2, idx);
            assert_eq!(parity_f(&x), onemax(&x));
        }
    }

    #[test]
    fn parity_is_onemax_in_the_alternative_basis() {
        for n in [2usize, 4, 6, 8] {
            let t = parity_onemax_basis(n);
            assert!(t.is_nonsingular());
            assert_eq!(t.mul(&t).unwrap(), BitMatrix::identity(n));
            for idx in 0..(1u64 << n) {
                let x = BitVector::from_index(n, idx);
                // direct formula: sum over i of (p xor a_i)
                let p = x.parity();
                let direct = x.iter().filter(|&a| a != p).count() as f64;
                assert_eq!(parity_f(&x), direct);
                assert_eq!(parity_f(&x), onemax(&t.mul_vec(&x).unwrap()));
            }
        }
    }

    #[test]
    fn variant_onemax_generation() {
        let a = VariantOneMax::generate(12, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let b = VariantOneMax::generate(12, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        assert_eq!(a, b);
        assert!(a.matrix().is_nonsingular());
        assert_eq!(a.evaluate(&a.optimal_genotype()), 12.0);
        assert_eq!(a.evaluate(&BitVector::zeros(12)), 0.0);
        assert!(VariantOneMax::generate(0, &mut ChaCha8Rng::seed_from_u64(1)).is_err());
    }

    #[test]
    fn variant_onemax_with_table2_matrix() {
        let t = BitMatrix::from_rows(&["100", "101", "010"]).unwrap();
        let p = VariantOneMax::from_matrix(t).unwrap();
        assert_eq!(p.evaluate(&v("111")), 2.0);
        assert_eq!(p.evaluate(&p.optimal_genotype()), 3.0);
    }

    #[test]
    fn variant_onemax_optimum_is_unique() {
        let p = VariantOneMax::generate(10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let optima: Vec<_> = (0..1u64 << 10)
            .map(|i| BitVector::from_index(10, i))
            .filter(|x| p.evaluate(x) == 10.0)
            .collect();
        assert_eq!(optima, vec![p.optimal_genotype()]);
        for i in (0..1u64 << 10).step_by(7) {
            let x = BitVector::from_index(10, i);
            assert_eq!(p.evaluate(&x), onemax(&p.matrix().mul_vec(&x).unwrap()));
        }
    }

    #[test]
    fn nk_structure_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let nk = NkLandscape::generate(10, 3, &mut rng).unwrap();
        for (i, nb) in nk.neighbors().iter().enumerate() {
            assert_eq!(nb.len(), 3);
            assert!(!nb.contains(&i));
            assert!(nb.windows(2).all(|w| w[0] < w[1]));
        }
        assert!(nk.tables().iter().all(|t| t.len() == 16));
        for i in 0..1u64 << 10 {
            let f = nk.evaluate(&BitVector::from_index(10, i));
            assert!((0.0..=1.0).contains(&f));
        }
        assert!(NkLandscape::generate(5, 5, &mut rng).is_err());
        let again = NkLandscape::generate(10, 3, &mut ChaCha8Rng::seed_from_u64(17)).unwrap();
        assert_eq!(again, nk);
    }

    #[test]
    fn nk_hand_built_values() {
        let nk = NkLandscape::from_parts(2, 0, vec![vec![], vec![]], vec![vec![0.0, 1.0]; 2]).unwrap();
        assert_eq!(nk.evaluate(&v("11")), 1.0);
        assert_eq!(nk.evaluate(&v("10")), 0.5);
    }

    #[test]
    fn nk_table_bit_order() {
        // gene 0 with neighbour 2: index = a_0 * 2 + a_2
        let tables = vec![vec![0.0, 0.25, 0.5, 1.0], vec![0.0; 4], vec![0.0; 4]];
        let nk = NkLandscape::from_parts(3, 1, vec![vec![2], vec![0], vec![1]], tables).unwrap();
        assert_eq!(nk.evaluate(&v("001")) * 3.0, 0.25);
        assert_eq!(nk.evaluate(&v("100")) * 3.0, 0.5);
    }

    #[test]
    fn nk_gene_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let n = 8;
        let nk = NkLandscape::generate(n, 2, &mut rng).unwrap();
        // relabel gene g as perm[g]; keep each gene's neighbour order so the
        // table index is unchanged, then sort and reorder the table entries
        let perm: Vec<usize> = index::sample(&mut rng, n, n).into_iter().collect();
        let mut neighbors = vec![Vec::new(); n];
        let mut tables = vec![Vec::new(); n];
        for g in 0..n {
            let mapped: Vec<usize> = nk.neighbors()[g].iter().map(|&x| perm[x]).collect();
            let mut order: Vec<usize> = (0..mapped.len()).collect();
            order.sort_by_key(|&p| mapped[p]);
            let k = mapped.len();
            let table: Vec<f64> = (0..1usize << (k + 1))
                .map(|new_idx| {
                    // new index bits: own allele then neighbours in sorted order
                    let own = new_idx >> k;
                    let mut old_idx = own;
                    for p in 0..k {
                        let pos_in_new = order.iter().position(|&o| o == p).unwrap();
                        let bit = (new_idx >> (k - 1 - pos_in_new)) & 1;
                        old_idx = (old_idx << 1) | bit;
                    }
                    nk.tables()[g][old_idx]
                })
                .collect();
            neighbors[perm[g]] = mapped;
            tables[perm[g]] = table;
        }
        let permuted = NkLandscape::from_parts(n, 2, neighbors, tables).unwrap();
        for idx in 0..1u64 << n {
            let x = BitVector::from_index(n, idx);
            let mut y = BitVector::zeros(n);
            for g in 0..n {
                y.set(perm[g], x.get(g));
            }
            assert!((nk.evaluate(&x) - permuted.evaluate(&y)).abs() < 1e-12);
        }
    }

    #[test]
    fn instance_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let vo = Instance::VariantOnemax(VariantOneMax::generate(6, &mut rng).unwrap());
        let nk = Instance::Nk(NkLandscape::generate(6, 2, &mut rng).unwrap());
        for inst in [vo, nk, Instance::Onemax(OneMax { n: 4 })] {
            let json = serde_json::to_string(&inst).unwrap();
            let back: Instance = serde_json::from_str(&json).unwrap();
            assert_eq!(back, inst);
        }
        let json = serde_json::to_value(Instance::Nk(
            NkLandscape::from_parts(2, 1, vec![vec![1], vec![0]], vec![vec![0.5; 4]; 2]).unwrap(),
        ))
        .unwrap();
        assert_eq!(json["kind"], "nk");
        assert_eq!(json["N"], 2);
        assert_eq!(json["neighbors"], serde_json::json!([[2], [1]]));
    }

    #[test]
    fn corrupted_instance_files_are_rejected() {
        let bad_rows = r#"{"kind":"variant-onemax","n":2,"word":"","rows":["10","10"]}"#;
        assert!(serde_json::from_str::<Instance>(bad_rows).is_err());
        let mismatch = r#"{"kind":"variant-onemax","n":2,"word":"S:1:2","rows":["10","01"]}"#;
        assert!(serde_json::from_str::<Instance>(mismatch).is_err());
        let nk_self = r#"{"kind":"nk","N":2,"K":1,"neighbors":[[1],[1]],"tables":[[0,0,0,0],[0,0,0,0]]}"#;
        assert!(serde_json::from_str::<Instance>(nk_self).is_err());
    }
}

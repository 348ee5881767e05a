//! Equivalences between words of elementary operations.
//!
//! The catalog holds ten identities: five exchange rules, two compaction
//! rules and three rules relating swaps to row additions. Each rule is a
//! list of equivalent forms over symbolic distinct indices `i, j, k`, and
//! may be applied from any form to any other. Every rewrite leaves the
//! denoted matrix unchanged.
//!
//! Two further identities hold for every elementary matrix over Z2 and are
//! exposed as separate primitives: `X X = I` ([`cancel_pair`],
//! [`insert_pair`]) and `S^{ij} = S^{ji}`, which swap patterns honor by
//! matching either index order.

use super::{BasisWord, ElementaryOp, OpKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slot {
    I,
    J,
    K,
}

impl Slot {
    fn idx(self) -> usize {
        match self {
            Slot::I => 0,
            Slot::J => 1,
            Slot::K => 2,
        }
    }
}

/// One symbol of a rule form, e.g. `A^{ik}` is `{Add, I, K}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolPattern {
    pub kind: OpKind,
    pub from: Slot,
    pub to: Slot,
}

const fn a(from: Slot, to: Slot) -> SymbolPattern {
    SymbolPattern {
        kind: OpKind::Add,
        from,
        to,
    }
}

const fn s(from: Slot, to: Slot) -> SymbolPattern {
    SymbolPattern {
        kind: OpKind::Swap,
        from,
        to,
    }
}

#[derive(Debug)]
pub struct Rule {
    pub name: &'static str,
    pub forms: &'static [&'static [SymbolPattern]],
}

impl Rule {
    /// Whether the rule needs a third index `k`.
    pub fn uses_k(&self) -> bool {
        self.forms
            .iter()
            .flat_map(|f| f.iter())
            .any(|p| p.from == Slot::K || p.to == Slot::K)
    }

    /// Instantiates form `form` with concrete 0-based indices.
    pub fn instantiate(&self, form: usize, i: usize, j: usize, k: usize) -> Vec<ElementaryOp> {
        instantiate(self.forms[form], &[i, j, k])
    }
}

use Slot::{I, J, K};

static RULES: [Rule; 10] = [
    Rule {
        name: "exchange-1",
        forms: &[&[a(I, K), a(J, K)], &[a(J, K), a(I, K)]],
    },
    // Additions sharing a source row commute. The look-alike
    // A^{ij}A^{jk} = A^{ik}A^{ij} does not hold over Z2.
    Rule {
        name: "exchange-2",
        forms: &[&[a(I, J), a(I, K)], &[a(I, K), a(I, J)]],
    },
    Rule {
        name: "exchange-3",
        forms: &[&[s(I, J), a(I, K)], &[a(J, K), s(I, J)]],
    },
    Rule {
        name: "exchange-4",
        forms: &[&[s(I, J), a(K, I)], &[a(K, J), s(I, J)]],
    },
    Rule {
        name: "exchange-5",
        forms: &[
            &[s(I, J), s(J, K)],
            &[s(J, K), s(I, K)],
            &[s(I, K), s(I, J)],
        ],
    },
    Rule {
        name: "compaction-1",
        forms: &[&[a(I, K), a(J, K), a(I, J)], &[a(I, J), a(J, K)]],
    },
    // The trailing symbol must be A^{ji}; with A^{ij} the sides differ.
    Rule {
        name: "compaction-2",
        forms: &[&[a(K, J), a(K, I), a(J, I)], &[a(J, I), a(K, J)]],
    },
    Rule {
        name: "swap-add-1",
        forms: &[&[a(I, J), s(I, J)], &[a(J, I), a(I, J)]],
    },
    Rule {
        name: "swap-add-2",
        forms: &[&[s(I, J)], &[a(I, J), a(J, I), a(I, J)]],
    },
    Rule {
        name: "swap-add-3",
        forms: &[&[a(I, J), a(J, I), a(I, J), a(J, I)], &[a(J, I), a(I, J)]],
    },
];

/// The ten-rule catalog.
pub fn rewrite_rules() -> &'static [Rule] {
    &RULES
}

fn instantiate(form: &[SymbolPattern], binding: &[usize; 3]) -> Vec<ElementaryOp> {
    form.iter()
        .map(|p| ElementaryOp {
            kind: p.kind,
            i: binding[p.from.idx()],
            j: binding[p.to.idx()],
        })
        .collect()
}

fn bind(slot: &mut [Option<usize>; 3], at: Slot, value: usize) -> bool {
    match slot[at.idx()] {
        Some(v) => v == value,
        None => {
            if slot.iter().flatten().any(|&v| v == value) {
                return false;
            }
            slot[at.idx()] = Some(value);
            true
        }
    }
}

fn match_from(
    ops: &[ElementaryOp],
    pattern: &[SymbolPattern],
    binding: [Option<usize>; 3],
) -> Option<[Option<usize>; 3]> {
    let Some((p, rest)) = pattern.split_first() else {
        return Some(binding);
    };
    let op = ops[0];
    if op.kind != p.kind {
        return None;
    }
    let orientations: &[(usize, usize)] = match p.kind {
        OpKind::Add => &[(op.i, op.j)],
        OpKind::Swap => &[(op.i, op.j), (op.j, op.i)],
    };
    orientations.iter().find_map(|&(x, y)| {
        let mut b = binding;
        (bind(&mut b, p.from, x) && bind(&mut b, p.to, y))
            .then(|| match_from(&ops[1..], rest, b))
            .flatten()
    })
}

/// Binds `pattern` against `ops[position..]`. Unbound slots (a `k` that
/// the form never mentions) stay `None`.
fn match_at(
    ops: &[ElementaryOp],
    pattern: &[SymbolPattern],
    position: usize,
) -> Option<[Option<usize>; 3]> {
    let end = position.checked_add(pattern.len())?;
    if end > ops.len() {
        return None;
    }
    match_from(&ops[position..end], pattern, [None; 3])
}

/// Rewrites the occurrence of `rule.forms[from]` at `position` into
/// `rule.forms[to]`.
pub fn apply_rule(
    word: &BasisWord,
    rule: &Rule,
    position: usize,
    from: usize,
    to: usize,
) -> Result<BasisWord> {
    let (Some(src), Some(dst)) = (rule.forms.get(from), rule.forms.get(to)) else {
        return Err(Error::InvalidParameter(format!(
            "rule {} has {} forms",
            rule.name,
            rule.forms.len()
        )));
    };
    let binding =
        match_at(word.ops(), src, position).ok_or(Error::PatternMismatch { position })?;
    let binding = binding.map(|b| b.unwrap_or(usize::MAX));
    let replacement = instantiate(dst, &binding);
    let mut ops = word.ops()[..position].to_vec();
    ops.extend(replacement);
    ops.extend_from_slice(&word.ops()[position + src.len()..]);
    Ok(BasisWord::from_ops_unchecked(word.n(), ops))
}

/// Removes the adjacent pair at `position` when both symbols denote the
/// same elementary matrix (`X X = I`).
pub fn cancel_pair(word: &BasisWord, position: usize) -> Result<BasisWord> {
    let ops = word.ops();
    match (ops.get(position), ops.get(position + 1)) {
        (Some(x), Some(y)) if x.same_matrix(y) => {
            let mut out = ops[..position].to_vec();
            out.extend_from_slice(&ops[position + 2..]);
            Ok(BasisWord::from_ops_unchecked(word.n(), out))
        }
        _ => Err(Error::PatternMismatch { position }),
    }
}

/// Inserts `op op` (the identity) before `position`.
pub fn insert_pair(word: &BasisWord, position: usize, op: ElementaryOp) -> Result<BasisWord> {
    op.validate(word.n())?;
    if position > word.len() {
        return Err(Error::PatternMismatch { position });
    }
    let mut ops = word.ops().to_vec();
    ops.splice(position..position, [op, op]);
    Ok(BasisWord::from_ops_unchecked(word.n(), ops))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RuleMatch {
    pub rule: usize,
    pub from: usize,
    pub to: usize,
    pub position: usize,
}

/// Every applicable `(rule, from-form, to-form, position)` in the word.
pub fn find_rule_matches(word: &BasisWord) -> Vec<RuleMatch> {
    let mut out = Vec::new();
    for (r, rule) in RULES.iter().enumerate() {
        for (from, form) in rule.forms.iter().enumerate() {
            for position in 0..word.len() {
                if match_at(word.ops(), form, position).is_none() {
                    continue;
                }
                out.extend(
                    (0..rule.forms.len())
                        .filter(|&to| to != from)
                        .map(|to| RuleMatch {
                            rule: r,
                            from,
                            to,
                            position,
                        }),
                );
            }
        }
    }
    out
}

/// Greedy length reduction: cancel adjacent inverse pairs, otherwise apply
/// the first length-reducing rule occurrence, for at most `budget` steps.
pub fn simplify(word: &BasisWord, budget: usize) -> BasisWord {
    let mut cur = word.clone();
    for _ in 0..budget {
        let ops = cur.ops();
        if let Some(p) = (0..ops.len().saturating_sub(1)).find(|&p| ops[p].same_matrix(&ops[p + 1]))
        {
            cur = cancel_pair(&cur, p).expect("pair matched");
            continue;
        }
        let shrinking = find_rule_matches(&cur).into_iter().find(|m| {
            let forms = RULES[m.rule].forms;
            forms[m.to].len() < forms[m.from].len()
        });
        match shrinking {
            Some(m) => {
                cur = apply_rule(&cur, &RULES[m.rule], m.position, m.from, m.to)
                    .expect("match was found");
            }
            None => break,
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2::BitMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn w(n: usize, tokens: &str) -> BasisWord {
        BasisWord::parse_tokens(n, tokens).unwrap()
    }

    fn rule(name: &str) -> &'static Rule {
        rewrite_rules().iter().find(|r| r.name == name).unwrap()
    }

    fn distinct_triple(rng: &mut ChaCha8Rng, n: usize) -> (usize, usize, usize) {
        loop {
            let (i, j, k) = (
                rng.random_range(0..n),
                rng.random_range(0..n),
                rng.random_range(0..n),
            );
            if i != j && j != k && i != k {
                return (i, j, k);
            }
        }
    }

    #[test]
    fn catalog_has_ten_rules() {
        assert_eq!(rewrite_rules().len(), 10);
        let with_k = rewrite_rules().iter().filter(|r| r.uses_k()).count();
        assert_eq!(with_k, 7);
    }

    #[test]
    fn every_rule_is_sound_with_context() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for rule in rewrite_rules() {
            for _ in 0..200 {
                let n = rng.random_range(3..=8);
                let (i, j, k) = distinct_triple(&mut rng, n);
                let prefix = BasisWord::random(n, 4.0, 2.0, &mut rng);
                let suffix = BasisWord::random(n, 4.0, 2.0, &mut rng);
                let reference = {
                    let core = BasisWord::new(n, rule.instantiate(0, i, j, k)).unwrap();
                    prefix.concat(&core).unwrap().concat(&suffix).unwrap().to_matrix()
                };
                for form in 1..rule.forms.len() {
                    let core = BasisWord::new(n, rule.instantiate(form, i, j, k)).unwrap();
                    let m = prefix.concat(&core).unwrap().concat(&suffix).unwrap().to_matrix();
                    assert_eq!(m, reference, "rule {} form {form}", rule.name);
                }
            }
        }
    }

    #[test]
    fn near_miss_forms_are_not_identities() {
        let n = 4;
        let (i, j, k) = (0, 1, 2);
        let lhs = w(n, &format!("A:{}:{} A:{}:{}", i + 1, j + 1, j + 1, k + 1));
        let rhs = w(n, &format!("A:{}:{} A:{}:{}", i + 1, k + 1, i + 1, j + 1));
        assert_ne!(lhs.to_matrix(), rhs.to_matrix());
        let lhs = w(n, "A:3:2 A:3:1 A:1:2");
        let rhs = w(n, "A:2:1 A:3:2");
        assert_ne!(lhs.to_matrix(), rhs.to_matrix());
    }

    #[test]
    fn worked_chain_reduces_to_single_add() {
        let p1 = w(4, "S:1:2 A:2:1 A:1:2");
        let step1 = insert_pair(&p1, 3, ElementaryOp::add(1, 0)).unwrap();
        assert_eq!(step1, w(4, "S:1:2 A:2:1 A:1:2 A:2:1 A:2:1"));
        // A^{21} A^{12} A^{21} -> S^{21}, the swap-add-2 rule with i=2, j=1.
        let step2 = apply_rule(&step1, rule("swap-add-2"), 1, 1, 0).unwrap();
        assert_eq!(step2, w(4, "S:1:2 S:2:1 A:2:1"));
        let step3 = cancel_pair(&step2, 0).unwrap();
        assert_eq!(step3, w(4, "A:2:1"));
        for x in [&p1, &step1, &step2, &step3] {
            assert_eq!(x.to_matrix(), p1.to_matrix());
        }
    }

    #[test]
    fn swap_expands_into_three_adds() {
        let out = apply_rule(&w(3, "S:1:2"), rule("swap-add-2"), 0, 0, 1).unwrap();
        assert_eq!(out, w(3, "A:1:2 A:2:1 A:1:2"));
        assert_eq!(out.to_matrix(), w(3, "S:1:2").to_matrix());
    }

    #[test]
    fn exchange_one_reorders_adds() {
        let before = w(5, "A:1:3 A:2:3");
        let out = apply_rule(&before, rule("exchange-1"), 0, 0, 1).unwrap();
        assert_eq!(out, w(5, "A:2:3 A:1:3"));
        assert_eq!(out.to_matrix(), before.to_matrix());
    }

    #[test]
    fn mismatches_are_rejected() {
        let word = w(4, "A:1:2 A:3:4");
        assert!(matches!(
            apply_rule(&word, rule("exchange-1"), 0, 0, 1),
            Err(Error::PatternMismatch { position: 0 })
        ));
        assert!(apply_rule(&word, rule("exchange-1"), 5, 0, 1).is_err());
        assert!(cancel_pair(&word, 0).is_err());
        assert!(insert_pair(&word, 9, ElementaryOp::add(0, 1)).is_err());
    }

    #[test]
    fn row_identities_of_elementary_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let n = rng.random_range(2..=8);
            let rows: Vec<_> = (0..n)
                .map(|_| crate::gf2::BitVector::random(n, &mut rng))
                .collect();
            let m = BitMatrix::from_row_vectors(&rows).unwrap();
            let i = rng.random_range(0..n);
            let j = (i + rng.random_range(1..n)) % n;
            let am = BitMatrix::elementary_add(n, i, j).unwrap().mul(&m).unwrap();
            let sm = BitMatrix::elementary_swap(n, i, j).unwrap().mul(&m).unwrap();
            assert_eq!(am.row_vector(i), m.row_vector(i));
            assert_eq!(am.row_vector(j), m.row_vector(j).xor(&m.row_vector(i)));
            assert_eq!(sm.row_vector(i), m.row_vector(j));
            assert_eq!(sm.row_vector(j), m.row_vector(i));
        }
    }

    #[test]
    fn simplify_preserves_matrix_and_never_grows() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let word = BasisWord::random(4, 10.0, 4.0, &mut rng);
            let out = simplify(&word, 2 * word.len());
            assert!(out.len() <= word.len());
            assert_eq!(out.to_matrix(), word.to_matrix());
        }
        let p1 = w(4, "S:1:2 S:2:1 A:2:1");
        assert_eq!(simplify(&p1, 6), w(4, "A:2:1"));
    }

    #[test]
    fn matches_are_all_applicable() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let word = BasisWord::random(3, 8.0, 2.0, &mut rng);
            for m in find_rule_matches(&word) {
                let out = apply_rule(&word, &rewrite_rules()[m.rule], m.position, m.from, m.to)
                    .unwrap();
                assert_eq!(out.to_matrix(), word.to_matrix());
            }
        }
    }
}

//! Words over the alphabet `{1, …, n}` and the subsemigroup of words admissible
//! for a 0-1 transition matrix.
//!
//! Letters are 1-based. The empty word plays the role of the unit (the vacuum
//! index in every Fock construction). All Fock bases use the *length-lex*
//! order: shorter words first, words of equal length in lexicographic order.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// An `n × n` matrix with entries in `{0, 1}` and no zero row or column.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TransitionMatrix {
    n: usize,
    entries: Vec<u8>,
}

impl TryFrom<Vec<Vec<u8>>> for TransitionMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        TransitionMatrix::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<u8>> {
    fn from(a: TransitionMatrix) -> Self {
        a.rows()
    }
}

impl TransitionMatrix {
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::input("transition matrix must be non-empty"));
        }
        let mut entries = Vec::with_capacity(n * n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::input(format!(
                    "transition matrix row {} has length {}, expected {n}",
                    i + 1,
                    row.len()
                )));
            }
            for &v in row {
                if v > 1 {
                    return Err(Error::input(format!("transition matrix entry {v} is not 0 or 1")));
                }
                entries.push(v);
            }
        }
        let a = TransitionMatrix { n, entries };
        for i in 1..=n {
            if (1..=n).all(|j| a.get(i, j) == 0) {
                return Err(Error::input(format!("transition matrix row {i} is zero")));
            }
            if (1..=n).all(|j| a.get(j, i) == 0) {
                return Err(Error::input(format!("transition matrix column {i} is zero")));
            }
        }
        Ok(a)
    }

    /// The matrix with every entry 1 (no constraint; the full Fock space).
    pub fn all_ones(n: usize) -> Self {
        assert!(n > 0);
        TransitionMatrix { n, entries: vec![1; n * n] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Entry `a_ij`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> u8 {
        debug_assert!((1..=self.n).contains(&i) && (1..=self.n).contains(&j));
        self.entries[(i - 1) * self.n + (j - 1)]
    }

    pub fn allows(&self, i: usize, j: usize) -> bool {
        self.get(i, j) == 1
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let rows = (1..=self.n)
            .map(|i| (1..=self.n).map(|j| self.get(j, i)).collect())
            .collect();
        TransitionMatrix::new(rows).expect("transpose of a valid matrix is valid")
    }

    pub fn is_all_ones(&self) -> bool {
        self.entries.iter().all(|&v| v == 1)
    }

    /// Appends one letter whose row and column are all ones.
    pub fn extend_with_ones(&self) -> Self {
        let n = self.n + 1;
        let rows = (1..=n)
            .map(|i| {
                (1..=n)
                    .map(|j| if i < n && j < n { self.get(i, j) } else { 1 })
                    .collect()
            })
            .collect();
        TransitionMatrix::new(rows).expect("extension keeps rows and columns nonzero")
    }

    fn check_word(&self, w: &Word) -> Result<()> {
        match w.letters().iter().find(|&&l| l == 0 || l > self.n) {
            Some(l) => Err(Error::input(format!("letter {l} outside 1..={}", self.n))),
            None => Ok(()),
        }
    }
}

/// A finite word over `{1, …, n}`; the empty word is the unit.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        Word(letters)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn letter(l: usize) -> Self {
        Word(vec![l])
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First letter `o(w)`.
    pub fn first(&self) -> Result<usize> {
        self.0
            .first()
            .copied()
            .ok_or_else(|| Error::domain("first letter of the empty word"))
    }

    /// Last letter `t(w)`.
    pub fn last(&self) -> Result<usize> {
        self.0
            .last()
            .copied()
            .ok_or_else(|| Error::domain("last letter of the empty word"))
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// `l` followed by this word.
    pub fn prepend(&self, l: usize) -> Word {
        let mut letters = Vec::with_capacity(self.len() + 1);
        letters.push(l);
        letters.extend_from_slice(&self.0);
        Word(letters)
    }

    /// This word followed by `l`.
    pub fn append(&self, l: usize) -> Word {
        let mut letters = self.0.clone();
        letters.push(l);
        Word(letters)
    }

    pub fn reversed(&self) -> Word {
        Word(self.0.iter().rev().copied().collect())
    }

    /// The word with its first letter removed (empty stays empty).
    pub fn tail(&self) -> Word {
        Word(self.0.iter().skip(1).copied().collect())
    }

    /// If `self` is a prefix of `other`, the remaining suffix.
    pub fn strip_prefix_of(&self, other: &Word) -> Option<Word> {
        other.0.strip_prefix(self.0.as_slice()).map(|s| Word(s.to_vec()))
    }
}

impl From<Vec<usize>> for Word {
    fn from(v: Vec<usize>) -> Self {
        Word(v)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "∅");
        }
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Length first, then lexicographic.
pub fn length_lex_cmp(a: &Word, b: &Word) -> Ordering {
    a.len().cmp(&b.len()).then_with(|| a.cmp(b))
}

pub fn is_admissible(a: &TransitionMatrix, w: &Word) -> Result<bool> {
    a.check_word(w)?;
    Ok(w.letters().windows(2).all(|p| a.allows(p[0], p[1])))
}

/// All admissible words of length exactly `m`, in lexicographic order.
pub fn enumerate_admissible(a: &TransitionMatrix, m: usize) -> Vec<Word> {
    if m == 0 {
        return vec![Word::empty()];
    }
    let mut out = Vec::new();
    let mut stack: Vec<usize> = Vec::with_capacity(m);
    extend_words(a, m, &mut stack, &mut out);
    out
}

fn extend_words(a: &TransitionMatrix, m: usize, stack: &mut Vec<usize>, out: &mut Vec<Word>) {
    if stack.len() == m {
        out.push(Word(stack.clone()));
        return;
    }
    for l in 1..=a.n() {
        if stack.last().is_none_or(|&p| a.allows(p, l)) {
            stack.push(l);
            extend_words(a, m, stack, out);
            stack.pop();
        }
    }
}

/// All admissible words of length `≤ max_len`, in length-lex order.
pub fn admissible_up_to(a: &TransitionMatrix, max_len: usize) -> Vec<Word> {
    (0..=max_len).flat_map(|m| enumerate_admissible(a, m)).collect()
}

/// `|Λ_A^m|` by integer matrix powers: the entry sum of `A^{m-1}`.
pub fn count_admissible(a: &TransitionMatrix, m: usize) -> u128 {
    if m == 0 {
        return 1;
    }
    let n = a.n();
    // row vector of ones times A^{m-1}
    let mut v = vec![1u128; n];
    for _ in 1..m {
        let mut next = vec![0u128; n];
        for (i, &vi) in v.iter().enumerate() {
            for (j, nj) in next.iter_mut().enumerate() {
                if a.allows(i + 1, j + 1) {
                    *nj += vi;
                }
            }
        }
        v = next;
    }
    v.iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flip() -> TransitionMatrix {
        TransitionMatrix::new(vec![vec![0, 1], vec![1, 0]]).unwrap()
    }

    #[test]
    fn admissibility_examples() {
        let a = flip();
        assert!(is_admissible(&a, &Word::new(vec![1, 2, 1])).unwrap());
        assert!(is_admissible(&a, &Word::empty()).unwrap());
        assert!(!is_admissible(&a, &Word::new(vec![1, 1])).unwrap());
        assert!(is_admissible(&a, &Word::new(vec![3])).is_err());
    }

    #[test]
    fn enumeration_examples() {
        let a = flip();
        assert_eq!(
            enumerate_admissible(&a, 3),
            vec![Word::new(vec![1, 2, 1]), Word::new(vec![2, 1, 2])]
        );
        assert_eq!(enumerate_admissible(&a, 0), vec![Word::empty()]);
        let ones = TransitionMatrix::all_ones(2);
        let w2: Vec<Vec<usize>> = enumerate_admissible(&ones, 2)
            .into_iter()
            .map(|w| w.letters().to_vec())
            .collect();
        assert_eq!(w2, vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]]);
    }

    #[test]
    fn counting_examples() {
        assert_eq!(count_admissible(&flip(), 3), 2);
        assert_eq!(count_admissible(&flip(), 0), 1);
        assert_eq!(count_admissible(&TransitionMatrix::all_ones(3), 5), 243);
    }

    #[test]
    fn accessors() {
        let w = Word::new(vec![1, 2, 1]);
        assert_eq!(w.first().unwrap(), 1);
        assert_eq!(w.last().unwrap(), 1);
        assert!(Word::empty().first().is_err());
        assert!(Word::empty().last().is_err());
        assert_eq!(Word::letter(1).concat(&Word::new(vec![2, 1])), w);
        assert_eq!(Word::empty().concat(&w), w);
    }

    #[test]
    fn rejects_bad_matrices() {
        assert!(TransitionMatrix::new(vec![vec![0, 0], vec![1, 1]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1, 0], vec![1, 0]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![2]]).is_err());
        assert!(TransitionMatrix::new(vec![vec![1, 1]]).is_err());
    }

    #[test]
    fn length_lex_order() {
        let a = TransitionMatrix::all_ones(2);
        let words = admissible_up_to(&a, 3);
        assert!(words.windows(2).all(|p| length_lex_cmp(&p[0], &p[1]) == Ordering::Less));
        assert_eq!(words.len(), 15);
    }
}

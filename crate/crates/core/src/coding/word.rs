use std::fmt;

use crate::error::{Error, Result};

/// Finite word over `{0, .., l-1}`; displayed and parsed 1-based.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<u32>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    /// Wraps 0-based symbols.
    pub fn from_symbols(symbols: Vec<u32>) -> Self {
        Word(symbols)
    }

    /// Parses `"121"` or, for alphabets above 9, `"1.12.3"`. Symbols are 1-based.
    pub fn parse(s: &str, alphabet: usize) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Word::empty());
        }
        let parts: Vec<&str> = if s.contains('.') {
            s.split('.').collect()
        } else {
            s.split("").filter(|p| !p.is_empty()).collect()
        };
        let mut out = Vec::with_capacity(parts.len());
        for p in parts {
            let v: u32 = p
                .parse()
                .map_err(|_| Error::Parse(format!("bad symbol {p:?} in word {s:?}")))?;
            if v == 0 || v as usize > alphabet {
                return Err(Error::Parse(format!("symbol {v} outside 1..={alphabet}")));
            }
            out.push(v - 1);
        }
        Ok(Word(out))
    }

    pub fn symbols(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, s: u32) {
        self.0.push(s);
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    pub fn is_valid(&self, alphabet: usize) -> bool {
        self.0.iter().all(|&s| (s as usize) < alphabet)
    }

    /// Groups a word of length `k * m` into `m` symbols over the alphabet `l^k`.
    pub fn to_blocks(&self, alphabet: usize, k: usize) -> Option<Word> {
        if k == 0 || !self.len().is_multiple_of(k) {
            return None;
        }
        let blocks = self
            .0
            .chunks(k)
            .map(|c| c.iter().fold(0u64, |acc, &s| acc * alphabet as u64 + s as u64) as u32)
            .collect();
        Some(Word(blocks))
    }

    /// Inverse of [`Word::to_blocks`].
    pub fn from_blocks(&self, alphabet: usize, k: usize) -> Word {
        let mut out = Vec::with_capacity(self.len() * k);
        for &b in &self.0 {
            let mut digits = vec![0u32; k];
            let mut v = b as u64;
            for d in digits.iter_mut().rev() {
                *d = (v % alphabet as u64) as u32;
                v /= alphabet as u64;
            }
            out.extend(digits);
        }
        Word(out)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 9) {
            for s in &self.0 {
                write!(f, "{}", s + 1)?;
            }
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| (s + 1).to_string()).collect();
            f.write_str(&parts.join("."))?;
        }
        Ok(())
    }
}

/// All words of length `n` in lexicographic order.
pub fn all_words(alphabet: usize, n: usize) -> impl Iterator<Item = Word> {
    let total = (alphabet as u64).pow(n as u32);
    (0..total).map(move |mut i| {
        let mut v = vec![0u32; n];
        for d in v.iter_mut().rev() {
            *d = (i % alphabet as u64) as u32;
            i /= alphabet as u64;
        }
        Word(v)
    })
}

//! Levenshtein distance over Unicode scalar values.
//!
//! [`Pattern`] precompiles one side into match bit-vectors and computes the
//! distance to any number of texts with the blocked bit-parallel algorithm
//! (Myers 1999, global variant). [`dp_distance`] is the plain two-row
//! dynamic program kept as the reference implementation.

use std::collections::HashMap;

const WORD: usize = 64;

/// Exact edit distance between two strings.
pub fn levenshtein_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    distance(&a, &b)
}

/// Edit distance between two scalar sequences; picks the shorter side as
/// the bit-vector pattern.
pub fn distance(a: &[char], b: &[char]) -> usize {
    let (pattern, text) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    Pattern::new(pattern).distance(text)
}

/// Plain O(|a|·|b|) dynamic program.
pub fn dp_distance(a: &[char], b: &[char]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for (i, &ca) in a.iter().enumerate() {
        let mut diag = row[0];
        row[0] = i + 1;
        for (j, &cb) in b.iter().enumerate() {
            let up = row[j + 1];
            let sub = diag + usize::from(ca != cb);
            row[j + 1] = sub.min(up + 1).min(row[j] + 1);
            diag = up;
        }
    }
    row[b.len()]
}

#[allow(clippy::large_enum_variant)]
enum MatchTable {
    /// ASCII-only single-word pattern.
    Ascii([u64; 128]),
    /// General case: one run of `blocks` words per distinct scalar value.
    Blocks {
        index: HashMap<char, usize>,
        masks: Vec<u64>,
        zeros: Vec<u64>,
    },
}

/// A compiled edit-distance pattern.
pub struct Pattern {
    len: usize,
    blocks: usize,
    table: MatchTable,
}

impl Pattern {
    pub fn new(pattern: &[char]) -> Self {
        let len = pattern.len();
        let blocks = len.div_ceil(WORD).max(1);
        let table = if len <= WORD && pattern.iter().all(char::is_ascii) {
            let mut masks = [0u64; 128];
            for (i, &c) in pattern.iter().enumerate() {
                masks[c as usize] |= 1 << i;
            }
            MatchTable::Ascii(masks)
        } else {
            let mut index = HashMap::new();
            let mut masks = Vec::new();
            for (i, &c) in pattern.iter().enumerate() {
                let slot = *index.entry(c).or_insert_with(|| {
                    masks.extend(std::iter::repeat_n(0u64, blocks));
                    masks.len() / blocks - 1
                });
                masks[slot * blocks + i / WORD] |= 1 << (i % WORD);
            }
            MatchTable::Blocks {
                index,
                masks,
                zeros: vec![0; blocks],
            }
        };
        Pattern { len, blocks, table }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn distance(&self, text: &[char]) -> usize {
        if self.len == 0 {
            return text.len();
        }
        if text.is_empty() {
            return self.len;
        }
        match &self.table {
            MatchTable::Ascii(masks) => self.single_word(text, |c| {
                if (c as u32) < 128 {
                    masks[c as usize]
                } else {
                    0
                }
            }),
            MatchTable::Blocks { index, masks, zeros } => {
                let lookup = |c: char| match index.get(&c) {
                    Some(&slot) => &masks[slot * self.blocks..(slot + 1) * self.blocks],
                    None => zeros.as_slice(),
                };
                if self.blocks == 1 {
                    self.single_word(text, |c| lookup(c)[0])
                } else {
                    self.multi_word(text, lookup)
                }
            }
        }
    }

    fn single_word(&self, text: &[char], eq_of: impl Fn(char) -> u64) -> usize {
        let high = 1u64 << (self.len - 1);
        let mut pv = !0u64;
        let mut mv = 0u64;
        let mut score = self.len;
        for &c in text {
            let eq = eq_of(c);
            let xv = eq | mv;
            let xh = ((eq & pv).wrapping_add(pv) ^ pv) | eq;
            let mut ph = mv | !(xh | pv);
            let mut mh = pv & xh;
            if ph & high != 0 {
                score += 1;
            } else if mh & high != 0 {
                score -= 1;
            }
            // top row of the global table grows by one per text character
            ph = (ph << 1) | 1;
            mh <<= 1;
            pv = mh | !(xv | ph);
            mv = ph & xv;
        }
        score
    }

    fn multi_word<'a>(&self, text: &[char], eq_of: impl Fn(char) -> &'a [u64]) -> usize {
        let blocks = self.blocks;
        let last_high = 1u64 << ((self.len - 1) % WORD);
        let mut pv = vec![!0u64; blocks];
        let mut mv = vec![0u64; blocks];
        let mut score = self.len as isize;
        for &c in text {
            let eq_blocks = eq_of(c);
            let mut hin: i8 = 1;
            for b in 0..blocks {
                let (p, m) = (pv[b], mv[b]);
                let mut eq = eq_blocks[b];
                let xv = eq | m;
                if hin < 0 {
                    eq |= 1;
                }
                let xh = ((eq & p).wrapping_add(p) ^ p) | eq;
                let mut ph = m | !(xh | p);
                let mut mh = p & xh;
                let high = if b + 1 == blocks { last_high } else { 1 << 63 };
                let hout = if ph & high != 0 {
                    1
                } else if mh & high != 0 {
                    -1
                } else {
                    0
                };
                ph <<= 1;
                mh <<= 1;
                if hin < 0 {
                    mh |= 1;
                } else if hin > 0 {
                    ph |= 1;
                }
                pv[b] = mh | !(xv | ph);
                mv[b] = ph & xv;
                hin = hout;
            }
            score += hin as isize;
        }
        score as usize
    }
}

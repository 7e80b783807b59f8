//! Character-level noise operators: QWERTY keyboard typos and adjacent swaps.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
pub enum OperatorError {
    #[error("word has no character on the QWERTY letter rows")]
    NoMappableCharacter,
    #[error("word has no adjacent pair of distinct characters")]
    Unswappable,
}

/// Rows of a staggered QWERTY keyboard with each row's horizontal offset in
/// key widths. Only letters are typo targets; the digit row appears as a
/// neighbour of the top letter row.
const ROWS: [(&str, f64); 4] = [("1234567890", 0.0), ("qwertyuiop", 0.5), ("asdfghjkl", 0.75), ("zxcvbnm", 1.25)];

fn adjacency() -> &'static HashMap<char, Vec<char>> {
    static MAP: OnceLock<HashMap<char, Vec<char>>> = OnceLock::new();
    MAP.get_or_init(|| {
        let keys: Vec<(char, usize, f64)> = ROWS
            .iter()
            .enumerate()
            .flat_map(|(r, (row, off))| row.chars().enumerate().map(move |(i, c)| (c, r, off + i as f64)))
            .collect();
        let mut map = HashMap::new();
        for &(c, r, x) in keys.iter().filter(|k| k.1 > 0) {
            // Keys on the same row one step away, or on an adjacent row whose
            // centre lies within one key width.
            let neighbours = keys
                .iter()
                .filter(|&&(d, rr, xx)| {
                    d != c
                        && match rr.abs_diff(r) {
                            0 => (xx - x).abs() < 1.5,
                            1 => (xx - x).abs() < 1.0,
                            _ => false,
                        }
                })
                .map(|k| k.0)
                .collect();
            map.insert(c, neighbours);
        }
        map
    })
}

/// QWERTY neighbours of a letter (case-insensitive), or `None` for anything
/// that is not an ASCII letter.
pub fn qwerty_neighbors(ch: char) -> Option<&'static [char]> {
    adjacency().get(&ch.to_ascii_lowercase()).map(Vec::as_slice)
}

fn with_case_of(original: char, replacement: char) -> char {
    if original.is_uppercase() {
        replacement.to_ascii_uppercase()
    } else {
        replacement
    }
}

/// Replace one uniformly chosen letter by a uniformly chosen QWERTY
/// neighbour. Returns the new word and the character position changed.
pub fn keyboard_typo<R: Rng + ?Sized>(word: &str, rng: &mut R) -> Result<(String, usize), OperatorError> {
    let mut chars: Vec<char> = word.chars().collect();
    let positions: Vec<usize> = (0..chars.len()).filter(|&i| qwerty_neighbors(chars[i]).is_some()).collect();
    if positions.is_empty() {
        return Err(OperatorError::NoMappableCharacter);
    }
    let pos = positions[rng.gen_range(0..positions.len())];
    let neighbours = qwerty_neighbors(chars[pos]).expect("position is mappable");
    let pick = neighbours[rng.gen_range(0..neighbours.len())];
    chars[pos] = with_case_of(chars[pos], pick);
    Ok((chars.into_iter().collect(), pos))
}

/// Transpose one uniformly chosen adjacent pair of distinct characters.
/// Returns the new word and the position of the pair's first character.
pub fn swap_noise<R: Rng + ?Sized>(word: &str, rng: &mut R) -> Result<(String, usize), OperatorError> {
    let mut chars: Vec<char> = word.chars().collect();
    let pairs = swappable_positions(&chars);
    if pairs.is_empty() {
        return Err(OperatorError::Unswappable);
    }
    let pos = pairs[rng.gen_range(0..pairs.len())];
    chars.swap(pos, pos + 1);
    Ok((chars.into_iter().collect(), pos))
}

fn swappable_positions(chars: &[char]) -> Vec<usize> {
    (0..chars.len().saturating_sub(1)).filter(|&i| chars[i] != chars[i + 1]).collect()
}

pub fn can_typo(word: &str) -> bool {
    word.chars().any(|c| qwerty_neighbors(c).is_some())
}

pub fn can_swap(word: &str) -> bool {
    let chars: Vec<char> = word.chars().collect();
    !swappable_positions(&chars).is_empty()
}

/// Every word [`keyboard_typo`] can produce from `word`.
pub fn typo_candidates(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    let mut out = Vec::new();
    for (i, &c) in chars.iter().enumerate() {
        for &n in qwerty_neighbors(c).unwrap_or(&[]) {
            let mut v = chars.clone();
            v[i] = with_case_of(c, n);
            out.push(v.into_iter().collect());
        }
    }
    out
}

/// Every word [`swap_noise`] can produce from `word`.
pub fn swap_candidates(word: &str) -> Vec<String> {
    let chars: Vec<char> = word.chars().collect();
    swappable_positions(&chars)
        .into_iter()
        .map(|i| {
            let mut v = chars.clone();
            v.swap(i, i + 1);
            v.into_iter().collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::keyed_rng;
    use std::collections::BTreeSet;

    /// Declared adjacency, written out by hand from a physical QWERTY layout.
    const DECLARED: [(char, &str); 26] = [
        ('q', "12wa"),
        ('w', "23qeas"),
        ('e', "34wrsd"),
        ('r', "45etdf"),
        ('t', "56ryfg"),
        ('y', "67tugh"),
        ('u', "78yihj"),
        ('i', "89uojk"),
        ('o', "90ipkl"),
        ('p', "0ol"),
        ('a', "qwsz"),
        ('s', "weadzx"),
        ('d', "ersfxc"),
        ('f', "rtdgcv"),
        ('g', "tyfhvb"),
        ('h', "yugjbn"),
        ('j', "uihknm"),
        ('k', "iojlm"),
        ('l', "opk"),
        ('z', "asx"),
        ('x', "sdzc"),
        ('c', "dfxv"),
        ('v', "fgcb"),
        ('b', "ghvn"),
        ('n', "hjbm"),
        ('m', "jkn"),
    ];

    fn set(s: &str) -> BTreeSet<char> {
        s.chars().collect()
    }

    #[test]
    fn adjacency_matches_declared_table() {
        for (c, expected) in DECLARED {
            let got: BTreeSet<char> = qwerty_neighbors(c).unwrap().iter().copied().collect();
            assert_eq!(got, set(expected), "neighbours of {c}");
        }
        assert!(qwerty_neighbors('5').is_none());
        assert!(qwerty_neighbors('-').is_none());
        assert!(qwerty_neighbors('é').is_none());
    }

    #[test]
    fn sampled_typos_stay_within_declared_neighbours() {
        // Enumerate many rng outcomes per letter; every emitted neighbour
        // must be declared, and every declared neighbour must be reachable.
        for (c, expected) in DECLARED {
            let mut seen = BTreeSet::new();
            for seed in 0..400 {
                let mut rng = keyed_rng(seed, "typo-test", &c.to_string());
                let (out, pos) = keyboard_typo(&c.to_string(), &mut rng).unwrap();
                assert_eq!(pos, 0);
                seen.insert(out.chars().next().unwrap());
            }
            assert_eq!(seen, set(expected), "letter {c}");
        }
    }

    #[test]
    fn single_letter_a() {
        let mut rng = keyed_rng(3, "t", "a");
        let (out, _) = keyboard_typo("a", &mut rng).unwrap();
        assert!(["q", "w", "s", "z"].contains(&out.as_str()));
    }

    #[test]
    fn reaction_typo_can_yield_zero() {
        assert!(typo_candidates("reaction").contains(&"reacti0n".to_string()));
    }

    #[test]
    fn typo_preserves_case() {
        for seed in 0..50 {
            let mut rng = keyed_rng(seed, "t", "Q");
            let (out, _) = keyboard_typo("Q", &mut rng).unwrap();
            assert!(["1", "2", "W", "A"].contains(&out.as_str()), "{out}");
        }
    }

    #[test]
    fn typo_skips_non_letters() {
        let mut rng = keyed_rng(0, "t", "x");
        assert_eq!(keyboard_typo("(4.9)", &mut rng), Err(OperatorError::NoMappableCharacter));
        for seed in 0..30 {
            let mut rng = keyed_rng(seed, "t", "x");
            let (out, pos) = keyboard_typo("4a", &mut rng).unwrap();
            assert_eq!(pos, 1);
            assert!(out.starts_with('4'));
        }
    }

    #[test]
    fn swap_examples() {
        assert!(swap_candidates("reaction").contains(&"raection".to_string()));
        let mut rng = keyed_rng(0, "t", "ab");
        assert_eq!(swap_noise("ab", &mut rng).unwrap(), ("ba".to_string(), 0));
        assert_eq!(swap_noise("aaa", &mut rng), Err(OperatorError::Unswappable));
        assert_eq!(swap_noise("a", &mut rng), Err(OperatorError::Unswappable));
        assert_eq!(swap_candidates("aab"), vec!["aba".to_string()]);
    }
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{is_primitive_type, is_reserved_word, lex, SyntaxError, TokenKind};

/// One misspelled primitive type keyword.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PerturbationRecord {
    pub original: String,
    pub mutated: String,
    /// Index of the first character of the swapped pair within the keyword.
    pub char_index: usize,
    /// Byte offset of the keyword in the snippet.
    pub snippet_offset: usize,
}

/// Misspell one primitive type keyword by swapping two adjacent characters.
///
/// Returns `Ok(None)` when the text contains no primitive type keyword.
pub fn perturb_primitive_type(
    text: &str,
    seed: u64,
) -> Result<Option<(String, PerturbationRecord)>, SyntaxError> {
    let tokens = lex(text)?;
    let mut candidates: Vec<(usize, &str)> = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Keyword && is_primitive_type(&t.text))
        .map(|t| (t.span.start, t.text.as_str()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    while !candidates.is_empty() {
        let (offset, keyword) = candidates.swap_remove(rng.random_range(0..candidates.len()));
        let valid: Vec<usize> =
            (0..keyword.len() - 1).filter(|&i| swap_at(keyword, i).is_some()).collect();
        if valid.is_empty() {
            continue;
        }
        // Rejection sampling over swap positions; `valid` is non-empty so it
        // terminates.
        let (index, mutated) = loop {
            let i = rng.random_range(0..keyword.len() - 1);
            if let Some(m) = swap_at(keyword, i) {
                break (i, m);
            }
        };
        let mut out = String::with_capacity(text.len());
        out.push_str(&text[..offset]);
        out.push_str(&mutated);
        out.push_str(&text[offset + keyword.len()..]);
        return Ok(Some((
            out,
            PerturbationRecord {
                original: keyword.to_string(),
                mutated,
                char_index: index,
                snippet_offset: offset,
            },
        )));
    }
    Ok(None)
}

/// Swap characters `i` and `i + 1`; `None` if that leaves the word unchanged
/// or produces another reserved word.
fn swap_at(word: &str, i: usize) -> Option<String> {
    let mut chars: Vec<char> = word.chars().collect();
    if chars[i] == chars[i + 1] {
        return None;
    }
    chars.swap(i, i + 1);
    let swapped: String = chars.into_iter().collect();
    (!is_reserved_word(&swapped)).then_some(swapped)
}

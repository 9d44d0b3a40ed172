//! Character n-grams and their bucket hashing.

/// 32-bit FNV-1a over the UTF-8 bytes of `s`.
pub fn fnv1a(s: &str) -> u32 {
    let mut h: u32 = 0x811c_9dc5;
    for b in s.bytes() {
        h ^= b as u32;
        h = h.wrapping_mul(0x0100_0193);
    }
    h
}

/// Character n-grams of `<word>` for `n` in `min..=max`, ordered by `n`
/// and then by start position. Repeated n-grams are yielded once per
/// occurrence.
pub fn ngrams(word: &str, min: usize, max: usize) -> Vec<String> {
    let chars: Vec<char> = std::iter::once('<')
        .chain(word.chars())
        .chain(std::iter::once('>'))
        .collect();
    let mut out = Vec::new();
    for n in min.max(1)..=max {
        if n > chars.len() {
            break;
        }
        for start in 0..=chars.len() - n {
            out.push(chars[start..start + n].iter().collect());
        }
    }
    out
}

/// Bucket ids of the n-grams of `word`, in [`ngrams`] order.
pub fn bucket_ids(word: &str, min: usize, max: usize, buckets: u32) -> Vec<u32> {
    ngrams(word, min, max)
        .iter()
        .map(|g| fnv1a(g) % buckets)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fnv_reference_values() {
        // published FNV-1a 32-bit test vectors
        assert_eq!(fnv1a(""), 0x811c9dc5);
        assert_eq!(fnv1a("a"), 0xe40c292c);
        assert_eq!(fnv1a("foobar"), 0xbf9cf968);
    }

    #[test]
    fn ngrams_with_boundaries() {
        assert_eq!(ngrams("ab", 3, 4), ["<ab", "ab>", "<ab>"]);
        assert_eq!(ngrams("a", 3, 6), ["<a>"]);
        assert_eq!(ngrams("swap", 3, 3), ["<sw", "swa", "wap", "ap>"]);
    }

    #[test]
    fn counts_characters_not_bytes() {
        assert_eq!(ngrams("é", 3, 3), ["<é>"]);
    }
}

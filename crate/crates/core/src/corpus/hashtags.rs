use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use super::{Corpus, Tokenizer};

/// Lowercase hashtag (without `#`) → number of occurrences.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashtagDict(BTreeMap<String, usize>);

impl HashtagDict {
    pub fn from_counts(counts: impl IntoIterator<Item = (String, usize)>) -> Self {
        let mut dict = HashtagDict::default();
        for (tag, n) in counts {
            dict.add(&tag, n);
        }
        dict
    }

    pub fn add(&mut self, tag: &str, n: usize) {
        let tag = tag.trim_start_matches('#').to_lowercase();
        if tag.is_empty() || n == 0 {
            return;
        }
        *self.0.entry(tag).or_default() += n;
    }

    pub fn count(&self, tag: &str) -> usize {
        self.0.get(tag).copied().unwrap_or(0)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, usize)> {
        self.0.iter().map(|(k, &v)| (k.as_str(), v))
    }
}

/// Counts every `#`-prefixed token across the corpus. Raw hashtags are kept;
/// no segmentation happens here.
pub fn build_hashtag_dict(corpus: &Corpus, tokenizer: &Tokenizer) -> HashtagDict {
    let mut dict = HashtagDict::default();
    for tweet in corpus.tweets() {
        for token in tokenizer.tokenize(&tweet.text) {
            if let Some(tag) = token.strip_prefix('#') {
                dict.add(tag, 1);
            }
        }
    }
    dict
}

/// Greedy longest-prefix segmentation of a lowercase tag against
/// `wordlist`. If the tag cannot be consumed completely the tag itself is
/// returned as the only element.
pub fn segment_hashtag(tag: &str, wordlist: &HashSet<String>) -> Vec<String> {
    let mut parts = Vec::new();
    let mut pos = 0;
    while pos < tag.len() {
        let rest = &tag[pos..];
        let longest = (1..=rest.len())
            .rev()
            .filter(|&n| rest.is_char_boundary(n))
            .find(|&n| wordlist.contains(&rest[..n]));
        match longest {
            Some(n) => {
                parts.push(rest[..n].to_string());
                pos += n;
            }
            None => return vec![tag.to_string()],
        }
    }
    if parts.is_empty() {
        vec![tag.to_string()]
    } else {
        parts
    }
}

/// Default segmentation lexicon: non-hashtag, non-mention tokens seen at
/// least twice, plus caller-provided extra words (keywords, county names).
pub fn segmentation_wordlist<'a, I, D>(docs: I, extra: &[String]) -> HashSet<String>
where
    I: IntoIterator<Item = D>,
    D: IntoIterator<Item = &'a String>,
{
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for doc in docs {
        for token in doc {
            if !token.starts_with(['#', '@']) {
                *counts.entry(token.as_str()).or_default() += 1;
            }
        }
    }
    let mut words: HashSet<String> = counts
        .into_iter()
        .filter(|&(_, n)| n >= 2)
        .map(|(w, _)| w.to_string())
        .collect();
    for w in extra {
        for part in w.to_lowercase().split_whitespace() {
            words.insert(part.to_string());
        }
        let joined: String = w.to_lowercase().split_whitespace().collect();
        if !joined.is_empty() {
            words.insert(joined);
        }
    }
    words
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;
    use chrono::{TimeZone, Utc};
    use proptest::prelude::*;

    fn words(ws: &[&str]) -> HashSet<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn corpus(texts: &[&str]) -> Corpus {
        let ts = Utc.with_ymd_and_hms(2014, 8, 24, 12, 0, 0).unwrap();
        Corpus::new(
            texts
                .iter()
                .enumerate()
                .map(|(i, t)| Tweet::new(i.to_string(), "u", ts, *t))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn segment_examples() {
        let w = words(&["california", "earthquake"]);
        assert_eq!(segment_hashtag("californiaearthquake", &w), vec!["california", "earthquake"]);
        assert_eq!(segment_hashtag("xyzzy", &w), vec!["xyzzy"]);
        assert_eq!(segment_hashtag("quakeinsf", &words(&["quake", "in", "sf"])), vec!["quake", "in", "sf"]);
    }

    #[test]
    fn segment_greedy_does_not_backtrack() {
        // "quakes" is taken first, leaving "f" unconsumable
        let w = words(&["quake", "quakes", "sf"]);
        assert_eq!(segment_hashtag("quakesf", &w), vec!["quakesf"]);
    }

    #[test]
    fn dict_examples() {
        let t = Tokenizer::default();
        let d = build_hashtag_dict(&corpus(&["#fire now", "big #fire", "#flood"]), &t);
        assert_eq!(d, HashtagDict::from_counts([("fire".into(), 2), ("flood".into(), 1)]));
        assert!(build_hashtag_dict(&corpus(&["no tags here"]), &t).is_empty());
        let d = build_hashtag_dict(&corpus(&["#Fire", "#fire"]), &t);
        assert_eq!(d.count("fire"), 2);
        assert_eq!(d.len(), 1);
    }

    #[test]
    fn wordlist_uses_min_count_two_plus_extras() {
        let docs: Vec<Vec<String>> = vec![
            vec!["napa".into(), "shake".into(), "#tag".into()],
            vec!["napa".into(), "#tag".into()],
        ];
        let w = segmentation_wordlist(&docs, &["strong wind".to_string()]);
        assert!(w.contains("napa"));
        assert!(!w.contains("shake"));
        assert!(!w.contains("#tag"));
        assert!(w.contains("strong") && w.contains("wind") && w.contains("strongwind"));
    }

    // brute-force scan: find '#', read following word bytes
    fn oracle_counts(texts: &[String]) -> BTreeMap<String, usize> {
        let mut counts = BTreeMap::new();
        for text in texts {
            let lower = text.to_ascii_lowercase();
            let b = lower.as_bytes();
            let mut i = 0;
            while i < b.len() {
                if b[i] == b'#' {
                    let mut j = i + 1;
                    while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                        j += 1;
                    }
                    if j > i + 1 {
                        *counts.entry(lower[i + 1..j].to_string()).or_insert(0) += 1;
                    }
                    i = j;
                } else {
                    i += 1;
                }
            }
        }
        counts
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn dict_matches_scan_oracle(texts in prop::collection::vec("[a-zA-Z #.,]{0,30}", 0..200)) {
            let refs: Vec<&str> = texts.iter().map(String::as_str).collect();
            let d = build_hashtag_dict(&corpus(&refs), &Tokenizer::default());
            let got: BTreeMap<String, usize> = d.iter().map(|(k, v)| (k.to_string(), v)).collect();
            prop_assert_eq!(got, oracle_counts(&texts));
        }

        #[test]
        fn segmentation_concatenates_to_tag(tag in "[a-e]{1,12}", ws in prop::collection::hash_set("[a-e]{1,4}", 0..10)) {
            let parts = segment_hashtag(&tag, &ws);
            if parts.len() > 1 {
                prop_assert_eq!(parts.concat(), tag);
            }
        }
    }
}

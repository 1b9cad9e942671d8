//! Matching-based relevance: core keywords, hashtag expansion, reviewed
//! hashtag ledger, and the conventional name/type hashtag baseline.

mod ledger;
mod review;

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{HashtagDict, Tokenizer, Tweet};
use crate::error::Error;
use crate::regions::{DisasterManifest, DisasterType};

pub use ledger::{HashtagLedger, HashtagStatus, LedgerEntry};
pub use review::{review, sample_tweets, Decision, LedgerLock, ReviewOutcome, Reviewer, TerminalReviewer, MAX_SAMPLES};

/// Per-type seed keywords. The defaults are kept verbatim, including the
/// `buring`/`framing` spellings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoreKeywordSet(BTreeMap<DisasterType, Vec<String>>);

impl Default for CoreKeywordSet {
    fn default() -> Self {
        let table: [(DisasterType, &[&str]); 3] = [
            (DisasterType::Earthquake, &["quake", "tremor", "foreshock", "aftershock"]),
            (
                DisasterType::Flood,
                &["flood", "storm", "typhoon", "tornado", "hurricane", "mudslide", "strong wind", "high water"],
            ),
            (
                DisasterType::Wildfire,
                &["fire", "firing", "burn", "buring", "blaze", "blazing", "flame", "framing"],
            ),
        ];
        CoreKeywordSet(
            table
                .into_iter()
                .map(|(t, ws)| (t, ws.iter().map(|w| w.to_string()).collect()))
                .collect(),
        )
    }
}

impl CoreKeywordSet {
    pub fn get(&self, t: DisasterType) -> &[String] {
        self.0.get(&t).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Adds extra lowercase keywords (aliases) for a type.
    pub fn extend(&mut self, t: DisasterType, words: impl IntoIterator<Item = String>) {
        let list = self.0.entry(t).or_default();
        for w in words {
            let w = w.trim().to_lowercase();
            if !w.is_empty() && !list.contains(&w) {
                list.push(w);
            }
        }
    }

    /// Union over `types`, first-seen order. Hybrid disasters get the
    /// keywords of every listed type.
    pub fn for_types(&self, types: &BTreeSet<DisasterType>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for t in types {
            for w in self.get(*t) {
                if !out.contains(w) {
                    out.push(w.clone());
                }
            }
        }
        out
    }

    /// Keywords for a manifest: its overrides when present, otherwise the
    /// union for its types.
    pub fn for_manifest(&self, manifest: &DisasterManifest) -> Vec<String> {
        match &manifest.keyword_overrides {
            Some(words) => words.iter().map(|w| w.trim().to_lowercase()).filter(|w| !w.is_empty()).collect(),
            None => self.for_types(&manifest.types),
        }
    }
}

/// Hashtags containing any keyword as a contiguous substring (multi-word
/// keywords with spaces removed), by descending count then name.
pub fn expand_candidates(keywords: &[String], dict: &HashtagDict) -> Vec<String> {
    let needles: Vec<String> = keywords
        .iter()
        .map(|k| k.split_whitespace().collect::<String>().to_lowercase())
        .filter(|k| !k.is_empty())
        .collect();
    let mut hits: Vec<(&str, usize)> = dict
        .iter()
        .filter(|(tag, _)| needles.iter().any(|k| tag.contains(k.as_str())))
        .collect();
    hits.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    hits.into_iter().map(|(t, _)| t.to_string()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KeywordMatch {
    /// Keyword anywhere in the lowercased text ("quake" hits "#napaquake").
    #[default]
    Substring,
    /// Keyword words as consecutive plain tokens.
    Token,
}

impl FromStr for KeywordMatch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "substring" => Ok(KeywordMatch::Substring),
            "token" => Ok(KeywordMatch::Token),
            other => Err(Error::Config(format!("keyword_match must be substring|token, got {other:?}"))),
        }
    }
}

/// Final matching terms: keywords plus accepted hashtags.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermSet {
    pub keywords: Vec<String>,
    pub hashtags: BTreeSet<String>,
}

/// Keywords plus the ledger's accepted hashtags. Without a ledger the
/// matcher falls back to keywords only.
pub fn final_terms(keywords: &[String], ledger: Option<&HashtagLedger>) -> TermSet {
    TermSet {
        keywords: keywords.to_vec(),
        hashtags: ledger.map(HashtagLedger::accepted).unwrap_or_default(),
    }
}

fn hashtags_of(tokens: &[String]) -> impl Iterator<Item = &str> {
    tokens.iter().filter_map(|t| t.strip_prefix('#'))
}

fn contains_token_phrase(tokens: &[String], phrase: &str) -> bool {
    let words: Vec<&str> = phrase.split_whitespace().collect();
    if words.is_empty() {
        return false;
    }
    let plain: Vec<&str> = tokens.iter().map(String::as_str).filter(|t| !t.starts_with(['#', '@'])).collect();
    plain.windows(words.len()).any(|w| w == words.as_slice())
}

/// Matching-based relevance classifier.
#[derive(Debug, Clone)]
pub struct MatchingClassifier {
    terms: TermSet,
    mode: KeywordMatch,
    tokenizer: Tokenizer,
}

impl MatchingClassifier {
    pub fn new(terms: TermSet, mode: KeywordMatch, tokenizer: Tokenizer) -> Self {
        MatchingClassifier { terms, mode, tokenizer }
    }

    pub fn terms(&self) -> &TermSet {
        &self.terms
    }

    pub fn is_relevant(&self, tweet: &Tweet) -> bool {
        let tokens = self.tokenizer.tokenize(&tweet.text);
        if hashtags_of(&tokens).any(|h| self.terms.hashtags.contains(h)) {
            return true;
        }
        match self.mode {
            KeywordMatch::Substring => {
                let lower = tweet.text.to_lowercase();
                self.terms.keywords.iter().any(|k| lower.contains(k.as_str()))
            }
            KeywordMatch::Token => self.terms.keywords.iter().any(|k| contains_token_phrase(&tokens, k)),
        }
    }
}

/// Substring-mode matching with the default tokenizer.
pub fn classify_matching(tweet: &Tweet, terms: &TermSet) -> bool {
    MatchingClassifier::new(terms.clone(), KeywordMatch::Substring, Tokenizer::default()).is_relevant(tweet)
}

/// Baseline that only knows `#<type>`, `#<area><type>`, `#<official>` and
/// core keywords as standalone tokens.
#[derive(Debug, Clone)]
pub struct ConventionalClassifier {
    hashtags: BTreeSet<String>,
    keywords: Vec<String>,
    tokenizer: Tokenizer,
}

impl ConventionalClassifier {
    pub fn new(
        manifest: &DisasterManifest,
        keywords: &CoreKeywordSet,
        area_name: Option<&str>,
        official_name: Option<&str>,
        tokenizer: Tokenizer,
    ) -> Self {
        let mut hashtags = BTreeSet::new();
        for t in &manifest.types {
            hashtags.insert(t.as_str().to_string());
            if let Some(area) = area_name.filter(|a| !a.is_empty()) {
                hashtags.insert(format!("{area}{}", t.as_str()));
            }
        }
        if let Some(official) = official_name.filter(|o| !o.is_empty()) {
            hashtags.insert(official.to_string());
        }
        ConventionalClassifier { hashtags, keywords: keywords.for_manifest(manifest), tokenizer }
    }

    /// Uses the manifest's own `area_name`/`official_name`.
    pub fn from_manifest(manifest: &DisasterManifest, keywords: &CoreKeywordSet, tokenizer: Tokenizer) -> Self {
        Self::new(manifest, keywords, manifest.area_name.as_deref(), manifest.official_name.as_deref(), tokenizer)
    }

    pub fn hashtags(&self) -> &BTreeSet<String> {
        &self.hashtags
    }

    pub fn is_relevant(&self, tweet: &Tweet) -> bool {
        let tokens = self.tokenizer.tokenize(&tweet.text);
        hashtags_of(&tokens).any(|h| self.hashtags.contains(h))
            || self.keywords.iter().any(|k| contains_token_phrase(&tokens, k))
    }
}

pub fn classify_conventional(tweet: &Tweet, manifest: &DisasterManifest, area_name: &str, official_name: &str) -> bool {
    ConventionalClassifier::new(manifest, &CoreKeywordSet::default(), Some(area_name), Some(official_name), Tokenizer::default())
        .is_relevant(tweet)
}

/// Percent gain of `n_ours` over `n_conventional`; `None` when the baseline
/// found nothing.
pub fn improvement(n_ours: usize, n_conventional: usize) -> Option<f64> {
    (n_conventional > 0).then(|| 100.0 * (n_ours as f64 - n_conventional as f64) / n_conventional as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{NaiveDate, TimeZone, Utc};
    use proptest::prelude::*;

    fn tw(text: &str) -> Tweet {
        Tweet::new("1", "u", Utc.with_ymd_and_hms(2014, 8, 24, 10, 0, 0).unwrap(), text)
    }

    fn strs(ws: &[&str]) -> Vec<String> {
        ws.iter().map(|s| s.to_string()).collect()
    }

    fn quake_manifest() -> DisasterManifest {
        DisasterManifest {
            disaster_id: "napa_earthquake".into(),
            fema_code: "4193".into(),
            types: [DisasterType::Earthquake].into(),
            start_date: NaiveDate::from_ymd_opt(2014, 8, 24).unwrap(),
            duration_days: 16,
            affected_fips: BTreeSet::new(),
            vicinity_fips: BTreeSet::new(),
            keyword_overrides: None,
            area_name: Some("napa".into()),
            official_name: None,
        }
    }

    #[test]
    fn default_keywords_are_verbatim() {
        let k = CoreKeywordSet::default();
        assert_eq!(k.get(DisasterType::Earthquake), strs(&["quake", "tremor", "foreshock", "aftershock"]).as_slice());
        assert_eq!(k.get(DisasterType::Flood).len(), 8);
        assert!(k.get(DisasterType::Wildfire).contains(&"buring".to_string()));
        let hybrid = k.for_types(&[DisasterType::Flood, DisasterType::Wildfire].into());
        assert_eq!(hybrid.len(), 16);
    }

    #[test]
    fn expansion_examples() {
        let d = HashtagDict::from_counts([("fireworks".into(), 5), ("napafire".into(), 3), ("coffee".into(), 9)]);
        assert_eq!(expand_candidates(&strs(&["fire"]), &d), strs(&["fireworks", "napafire"]));
        let d = HashtagDict::from_counts([("3amearthquake".into(), 2), ("quakeinsf".into(), 1), ("flood".into(), 4)]);
        assert_eq!(expand_candidates(&strs(&["quake"]), &d), strs(&["3amearthquake", "quakeinsf"]));
        assert!(expand_candidates(&strs(&["quake"]), &HashtagDict::default()).is_empty());
        let d = HashtagDict::from_counts([("strongwinds".into(), 1)]);
        assert_eq!(expand_candidates(&strs(&["strong wind"]), &d), strs(&["strongwinds"]));
    }

    #[test]
    fn final_terms_fallback() {
        let t = final_terms(&strs(&["quake"]), None);
        assert!(t.hashtags.is_empty());
        let mut l = HashtagLedger::default();
        l.merge_candidates([("napaquake", 3), ("quakerstate", 2), ("eartquake", 1)]);
        let at = Utc::now();
        l.decide("napaquake", HashtagStatus::Accepted, at, None).unwrap();
        l.decide("quakerstate", HashtagStatus::Rejected, at, None).unwrap();
        let t = final_terms(&strs(&["quake"]), Some(&l));
        assert_eq!(t.hashtags, ["napaquake".to_string()].into());
    }

    #[test]
    fn matching_examples() {
        let terms = TermSet { keywords: CoreKeywordSet::default().get(DisasterType::Earthquake).to_vec(), hashtags: ["napaquake".to_string()].into() };
        assert!(classify_matching(&tw("aftershocks all night #napaquake"), &terms));
        let fire = TermSet { keywords: CoreKeywordSet::default().get(DisasterType::Wildfire).to_vec(), hashtags: BTreeSet::new() };
        assert!(classify_matching(&tw("watching fireworks tonight"), &fire));
        assert!(!classify_matching(&tw("@Securb Safe and Sound! Just a lot of shaking in SF but no damage!"), &terms));
    }

    #[test]
    fn accepted_hashtags_match_exact_tokens_only() {
        let terms = TermSet { keywords: vec![], hashtags: ["staysafenapa".to_string()].into() };
        assert!(classify_matching(&tw("#StaySafeNapa everyone"), &terms));
        assert!(!classify_matching(&tw("#staysafenapa2014"), &terms));
        assert!(!classify_matching(&tw("staysafenapa"), &terms));
    }

    #[test]
    fn token_mode() {
        let terms = TermSet { keywords: strs(&["quake", "strong wind"]), hashtags: BTreeSet::new() };
        let c = MatchingClassifier::new(terms, KeywordMatch::Token, Tokenizer::default());
        assert!(c.is_relevant(&tw("Big quake!")));
        assert!(!c.is_relevant(&tw("earthquake")));
        assert!(c.is_relevant(&tw("a strong wind, again")));
        assert!(!c.is_relevant(&tw("strong winds")));
        assert_eq!("token".parse::<KeywordMatch>().unwrap(), KeywordMatch::Token);
        assert!("fuzzy".parse::<KeywordMatch>().is_err());
    }

    #[test]
    fn conventional_examples() {
        let m = quake_manifest();
        assert!(classify_conventional(&tw("#napaearthquake was scary"), &m, "napa", ""));
        assert!(!classify_conventional(&tw("#3amearthquake"), &m, "napa", ""));
        assert!(classify_conventional(&tw("big quake"), &m, "napa", ""));
        assert!(classify_conventional(&tw("#Earthquake"), &m, "napa", ""));
        assert!(classify_conventional(&tw("#southnapaquake"), &m, "napa", "southnapaquake"));
        assert!(!classify_conventional(&tw("earthquake"), &m, "napa", ""));
    }

    #[test]
    fn improvement_examples() {
        assert_eq!(improvement(180, 100), Some(80.0));
        assert_eq!(improvement(100, 100), Some(0.0));
        assert_eq!(improvement(90, 100), Some(-10.0));
        assert_eq!(improvement(5, 0), None);
    }

    #[test]
    fn conventional_hashtag_hits_need_acceptance() {
        let m = quake_manifest();
        let conv = ConventionalClassifier::from_manifest(&m, &CoreKeywordSet::default(), Tokenizer::default());
        let tweet = tw("#napaearthquake omg");
        assert!(conv.is_relevant(&tweet));
        // keywords that cannot hit the text isolate the hashtag clause
        let mut l = HashtagLedger::default();
        l.merge_candidates([("napaearthquake", 1)]);
        let none = final_terms(&strs(&["tremor"]), Some(&l));
        assert!(!classify_matching(&tweet, &none));
        l.decide("napaearthquake", HashtagStatus::Accepted, Utc::now(), None).unwrap();
        let accepted = final_terms(&strs(&["tremor"]), Some(&l));
        assert!(classify_matching(&tweet, &accepted));
        l.decide("napaearthquake", HashtagStatus::Rejected, Utc::now(), None).unwrap();
        assert!(!classify_matching(&tweet, &final_terms(&strs(&["tremor"]), Some(&l))));
    }

    proptest! {
        #[test]
        fn expansion_equals_substring_oracle(
            kws in prop::collection::vec("[a-d]{1,3}( [a-d]{1,2})?", 0..4),
            dict in prop::collection::btree_map("[a-d]{1,8}", 1usize..20, 0..30),
        ) {
            let d = HashtagDict::from_counts(dict.clone());
            let got: BTreeSet<String> = expand_candidates(&kws, &d).into_iter().collect();
            let mut want = BTreeSet::new();
            for tag in dict.keys() {
                for k in &kws {
                    let k: String = k.chars().filter(|c| *c != ' ').collect();
                    let n = k.len();
                    if (0..=tag.len().saturating_sub(n)).any(|i| tag.len() >= n && tag[i..i + n] == k) {
                        want.insert(tag.clone());
                    }
                }
            }
            prop_assert_eq!(got, want);
        }

        #[test]
        fn refinement_only_adds(text in "[a-z #]{0,40}", accepted in prop::collection::btree_set("[a-z]{1,5}", 0..5)) {
            let kw = strs(&["ab"]);
            let t = tw(&text);
            let base = classify_matching(&t, &TermSet { keywords: kw.clone(), hashtags: BTreeSet::new() });
            let refined = classify_matching(&t, &TermSet { keywords: kw, hashtags: accepted });
            prop_assert!(!base || refined);
        }

        #[test]
        fn keyword_only_terms_equal_substring_search(text in "[a-cA-C .#]{0,30}", k in "[a-c]{1,3}") {
            let got = classify_matching(&tw(&text), &TermSet { keywords: vec![k.clone()], hashtags: BTreeSet::new() });
            prop_assert_eq!(got, text.to_lowercase().contains(&k));
        }
    }
}

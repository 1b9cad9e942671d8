use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::Corpus;

pub const DEFAULT_SPAM_THRESHOLD: usize = 15;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpamStats {
    pub spam_user_count: usize,
    pub total_user_count: usize,
    pub spam_tweet_count: usize,
    pub total_tweet_count: usize,
}

impl SpamStats {
    /// Percent of tweets removed; 0 for an empty corpus.
    pub fn spam_ratio(&self) -> f64 {
        percent(self.spam_tweet_count, self.total_tweet_count)
    }

    /// Percent of users flagged as spammers; 0 when there are no users.
    pub fn user_ratio(&self) -> f64 {
        percent(self.spam_user_count, self.total_user_count)
    }
}

fn percent(part: usize, whole: usize) -> f64 {
    if whole == 0 {
        0.0
    } else {
        100.0 * part as f64 / whole as f64
    }
}

/// Users who post strictly more than `threshold` tweets on some UTC day.
pub fn spam_users(corpus: &Corpus, threshold: usize) -> BTreeSet<String> {
    corpus
        .user_day_counts()
        .into_iter()
        .filter(|(_, days)| days.values().any(|&n| n > threshold))
        .map(|(user, _)| user.to_string())
        .collect()
}

/// Drops every tweet (retweets included) of spam users.
pub fn remove_spam(corpus: &Corpus, threshold: usize) -> (Corpus, SpamStats) {
    let spammers = spam_users(corpus, threshold);
    let kept = corpus.filter(|t| !spammers.contains(&t.user_id));
    let stats = SpamStats {
        spam_user_count: spammers.len(),
        total_user_count: corpus.user_count(),
        spam_tweet_count: corpus.len() - kept.len(),
        total_tweet_count: corpus.len(),
    };
    (kept, stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Tweet;
    use chrono::{Duration, TimeZone, Utc};
    use proptest::prelude::*;

    fn corpus_of(posts: &[(&str, i64, usize)]) -> Corpus {
        // (user, day offset, tweet count)
        let base = Utc.with_ymd_and_hms(2014, 8, 24, 0, 0, 0).unwrap();
        let mut tweets = Vec::new();
        for &(user, day, n) in posts {
            for k in 0..n {
                let ts = base + Duration::days(day) + Duration::minutes(k as i64);
                tweets.push(Tweet::new(format!("{user}-{day}-{k}"), user, ts, "x"));
            }
        }
        Corpus::new(tweets).unwrap()
    }

    #[test]
    fn boundary_is_strict() {
        assert!(spam_users(&corpus_of(&[("a", 0, 15)]), 15).is_empty());
        assert_eq!(spam_users(&corpus_of(&[("a", 0, 16)]), 15).len(), 1);
        assert!(spam_users(&corpus_of(&[("a", 0, 10), ("a", 1, 10), ("a", 2, 10)]), 15).is_empty());
    }

    #[test]
    fn day_boundary_is_utc_midnight() {
        let t0 = Utc.with_ymd_and_hms(2014, 8, 24, 23, 50, 0).unwrap();
        let tweets = (0..20)
            .map(|k| Tweet::new(k.to_string(), "a", t0 + Duration::minutes(k), "x"))
            .collect();
        // 10 tweets before midnight, 10 after
        assert!(spam_users(&Corpus::new(tweets).unwrap(), 15).is_empty());
    }

    #[test]
    fn no_spam_keeps_corpus() {
        let c = corpus_of(&[("a", 0, 3), ("b", 1, 5)]);
        let (kept, stats) = remove_spam(&c, 15);
        assert_eq!(kept.tweets(), c.tweets());
        assert_eq!(stats.spam_ratio(), 0.0);
    }

    #[test]
    fn single_heavy_user_removes_everything() {
        let c = corpus_of(&[("bot", 0, 100), ("bot", 1, 100)]);
        let (kept, stats) = remove_spam(&c, 15);
        assert!(kept.is_empty());
        assert_eq!(stats.spam_ratio(), 100.0);
    }

    #[test]
    fn retweets_of_regular_users_survive() {
        let mut c = corpus_of(&[("a", 0, 2), ("bot", 0, 20)]);
        let mut rt = c.tweets()[0].clone();
        rt.tweet_id = "rt".into();
        rt.is_retweet = true;
        c.push(rt).unwrap();
        let (kept, _) = remove_spam(&c, 15);
        assert!(kept.contains("rt"));
        assert_eq!(kept.len(), 3);
    }

    #[test]
    fn published_totals() {
        let s = SpamStats {
            spam_user_count: 1937,
            total_user_count: 144_297,
            spam_tweet_count: 928_174,
            total_tweet_count: 3_978_713,
        };
        assert!((s.spam_ratio() - 23.33).abs() <= 0.01);
        // 1937 / 144297 is 1.34%; a 0.8% user share does not follow from these counts.
        assert!((s.user_ratio() - 1.3424).abs() <= 1e-3);
    }

    proptest! {
        #[test]
        fn removal_partitions_input(posts in prop::collection::vec((0usize..6, 0i64..3, 1usize..25), 0..15), th in 1usize..30) {
            let names = ["a", "b", "c", "d", "e", "f"];
            let mut seen = std::collections::BTreeMap::new();
            for (u, d, n) in posts {
                seen.insert((names[u], d), n);
            }
            let spec: Vec<(&str, i64, usize)> = seen.into_iter().map(|((u, d), n)| (u, d, n)).collect();
            let c = corpus_of(&spec);
            let (kept, stats) = remove_spam(&c, th);
            let removed = c.filter(|t| !kept.contains(&t.tweet_id));
            prop_assert_eq!(kept.len() + removed.len(), c.len());
            prop_assert_eq!(removed.len(), stats.spam_tweet_count);
            prop_assert!(stats.spam_user_count <= stats.total_user_count);
            let r = stats.spam_ratio();
            prop_assert!((0.0..=100.0).contains(&r));
            // monotone in threshold
            let higher = spam_users(&c, th + 1);
            prop_assert!(higher.is_subset(&spam_users(&c, th)));
        }
    }
}

//! Brute-force reference implementations used by the integration tests.
#![allow(dead_code, clippy::needless_range_loop)]

use std::collections::{BTreeMap, BTreeSet, HashMap};

use chrono::{DateTime, Utc};

/// Singular values of a dense `rows × cols` matrix by one-sided Jacobi
/// rotations, descending.
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    // work on columns
    let mut c: Vec<Vec<f64>> = (0..cols).map(|j| (0..rows).map(|i| a[i][j]).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..cols {
            for q in p + 1..cols {
                let alpha: f64 = c[p].iter().map(|x| x * x).sum();
                let beta: f64 = c[q].iter().map(|x| x * x).sum();
                let gamma: f64 = c[p].iter().zip(&c[q]).map(|(x, y)| x * y).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt().max(f64::MIN_POSITIVE));
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let cs = 1.0 / (1.0 + t * t).sqrt();
                let sn = cs * t;
                for i in 0..rows {
                    let (x, y) = (c[p][i], c[q][i]);
                    c[p][i] = cs * x - sn * y;
                    c[q][i] = sn * x + cs * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut s: Vec<f64> = c.iter().map(|col| col.iter().map(|x| x * x).sum::<f64>().sqrt()).collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Term-document counts keyed by token, tokens ordered by first use.
pub fn dense_counts(docs: &[Vec<String>], min_count: usize) -> (Vec<String>, Vec<Vec<f64>>) {
    let mut order = Vec::new();
    let mut total: HashMap<&str, usize> = HashMap::new();
    for d in docs {
        for t in d {
            let n = total.entry(t).or_insert(0);
            if *n == 0 {
                order.push(t.clone());
            }
            *n += 1;
        }
    }
    order.retain(|t| total[t.as_str()] >= min_count.max(1));
    let rows = docs
        .iter()
        .map(|d| order.iter().map(|t| d.iter().filter(|x| *x == t).count() as f64).collect())
        .collect();
    (order, rows)
}

/// Smoothed idf weighting followed by L2 normalization, per document.
pub fn dense_tfidf(counts: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = counts.len() as f64;
    let v = counts.first().map_or(0, Vec::len);
    let idf: Vec<f64> = (0..v)
        .map(|j| {
            let df = counts.iter().filter(|r| r[j] > 0.0).count() as f64;
            ((1.0 + n) / (1.0 + df)).ln() + 1.0
        })
        .collect();
    counts
        .iter()
        .map(|r| {
            let w: Vec<f64> = r.iter().zip(&idf).map(|(c, i)| c * i).collect();
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm == 0.0 {
                w
            } else {
                w.iter().map(|x| x / norm).collect()
            }
        })
        .collect()
}

/// Every dictionary tag containing some keyword (spaces removed).
pub fn substring_expand(keywords: &[String], tags: &BTreeMap<String, usize>) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for tag in tags.keys() {
        for k in keywords {
            let needle: String = k.chars().filter(|c| !c.is_whitespace()).collect::<String>().to_lowercase();
            if needle.is_empty() {
                continue;
            }
            let (tb, nb) = (tag.as_bytes(), needle.as_bytes());
            if nb.len() <= tb.len() && (0..=tb.len() - nb.len()).any(|s| &tb[s..s + nb.len()] == nb) {
                out.insert(tag.clone());
            }
        }
    }
    out
}

/// Users with more than `threshold` posts on one calendar day (UTC).
pub fn spam_oracle(posts: &[(String, DateTime<Utc>)], threshold: usize) -> BTreeSet<String> {
    let mut out = BTreeSet::new();
    for (user, ts) in posts {
        let same_day = posts.iter().filter(|(u, t)| u == user && t.date_naive() == ts.date_naive()).count();
        if same_day > threshold {
            out.insert(user.clone());
        }
    }
    out
}

/// Central finite-difference gradient.
pub fn fd_gradient(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut xp = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = xp[i];
            xp[i] = orig + h;
            let up = f(&xp);
            xp[i] = orig - h;
            let down = f(&xp);
            xp[i] = orig;
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn rel_err(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

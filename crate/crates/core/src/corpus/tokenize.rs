use std::collections::{BTreeMap, HashSet};
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

use super::hashtags::segment_hashtag;

/// Built-in emoticon/emoji → word replacements.
const DEFAULT_EMOJI: &[(&str, &str)] = &[
    (":)", "happy"),
    (":-)", "happy"),
    (";)", "happy"),
    (";-)", "happy"),
    ("(:", "happy"),
    (":]", "happy"),
    ("^_^", "happy"),
    (":D", "laugh"),
    (":-D", "laugh"),
    ("XD", "laugh"),
    (":(", "sad"),
    (":-(", "sad"),
    (":[", "sad"),
    (":'(", "cry"),
    (":P", "playful"),
    (":p", "playful"),
    (":/", "confused"),
    (":O", "surprised"),
    (":o", "surprised"),
    (":*", "kiss"),
    ("-_-", "annoyed"),
    ("<3", "love"),
    ("</3", "heartbreak"),
    ("\u{1F600}", "happy"),
    ("\u{1F60A}", "happy"),
    ("\u{1F602}", "laugh"),
    ("\u{1F622}", "sad"),
    ("\u{1F62D}", "cry"),
    ("\u{1F631}", "scared"),
    ("\u{1F621}", "angry"),
    ("\u{1F64F}", "pray"),
    ("\u{1F44D}", "good"),
    ("\u{1F494}", "heartbreak"),
    ("\u{2764}\u{FE0F}", "love"),
    ("\u{2764}", "love"),
    ("\u{1F525}", "fire"),
];

/// Emoticon table. ASCII emoticons match whole whitespace-separated
/// chunks; non-ASCII emoji match anywhere.
#[derive(Debug, Clone)]
pub struct EmojiTable {
    ascii: BTreeMap<String, String>,
    // longest first so multi-codepoint sequences win
    unicode: Vec<(String, String)>,
}

impl Default for EmojiTable {
    fn default() -> Self {
        let mut table = EmojiTable { ascii: BTreeMap::new(), unicode: Vec::new() };
        for (emoji, word) in DEFAULT_EMOJI {
            table.insert(emoji, word);
        }
        table
    }
}

impl EmojiTable {
    pub fn empty() -> Self {
        EmojiTable { ascii: BTreeMap::new(), unicode: Vec::new() }
    }

    pub fn insert(&mut self, emoji: &str, word: &str) {
        let word = word.trim().to_ascii_lowercase();
        if emoji.is_ascii() {
            self.ascii.insert(emoji.to_string(), word);
        } else {
            self.unicode.retain(|(e, _)| e != emoji);
            self.unicode.push((emoji.to_string(), word));
            self.unicode.sort_by(|a, b| b.0.len().cmp(&a.0.len()).then_with(|| a.0.cmp(&b.0)));
        }
    }

    pub fn len(&self) -> usize {
        self.ascii.len() + self.unicode.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Extends the table from an `emoji.map` file: `<emoji>\t<word>` per line.
    pub fn extend_from_file(&mut self, path: &Path) -> Result<()> {
        let raw = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        for (i, line) in raw.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with("//") {
                continue;
            }
            let (emoji, word) = line.split_once('\t').ok_or_else(|| {
                Error::Data(format!("{}:{}: expected <emoji>\\t<word>", path.display(), i + 1))
            })?;
            if emoji.is_empty() || word.trim().is_empty() {
                return Err(Error::Data(format!("{}:{}: empty field", path.display(), i + 1)));
            }
            self.insert(emoji, word);
        }
        Ok(())
    }

    fn replace(&self, chunk: &str, out: &mut String) {
        if let Some(word) = self.ascii.get(chunk) {
            out.push_str(word);
            return;
        }
        if chunk.is_ascii() {
            out.push_str(chunk);
            return;
        }
        let mut rest = chunk;
        'outer: while !rest.is_empty() {
            for (emoji, word) in &self.unicode {
                if let Some(tail) = rest.strip_prefix(emoji.as_str()) {
                    out.push(' ');
                    out.push_str(word);
                    out.push(' ');
                    rest = tail;
                    continue 'outer;
                }
            }
            let ch = rest.chars().next().expect("nonempty");
            out.push(ch);
            rest = &rest[ch.len_utf8()..];
        }
    }
}

/// Tweet tokenizer.
///
/// Steps: strip HTML tags, replace emoticons with words, drop non-ASCII
/// characters, lowercase, then split on whitespace and punctuation. `#` and
/// `@` survive only as the first character of a token.
#[derive(Debug, Clone, Default)]
pub struct Tokenizer {
    emoji: EmojiTable,
}

impl Tokenizer {
    pub fn new(emoji: EmojiTable) -> Self {
        Tokenizer { emoji }
    }

    pub fn emoji(&self) -> &EmojiTable {
        &self.emoji
    }

    pub fn tokenize(&self, text: &str) -> Vec<String> {
        let stripped = strip_html_tags(text);
        let mut replaced = String::with_capacity(stripped.len());
        for chunk in stripped.split_whitespace() {
            self.emoji.replace(chunk, &mut replaced);
            replaced.push(' ');
        }
        let ascii: String = replaced
            .chars()
            .filter(char::is_ascii)
            .map(|c| c.to_ascii_lowercase())
            .collect();
        split_tokens(&ascii)
    }

    /// Tokenizes, then splits each hashtag token into words from `wordlist`
    /// where the whole tag can be consumed.
    pub fn tokenize_segmented(&self, text: &str, wordlist: &HashSet<String>) -> Vec<String> {
        let mut out = Vec::new();
        for token in self.tokenize(text) {
            match token.strip_prefix('#') {
                Some(tag) => {
                    let parts = segment_hashtag(tag, wordlist);
                    if parts.len() > 1 {
                        out.extend(parts);
                    } else {
                        out.push(token);
                    }
                }
                None => out.push(token),
            }
        }
        out
    }
}

fn is_word_byte(b: u8) -> bool {
    b.is_ascii_alphanumeric() || b == b'_'
}

fn split_tokens(text: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut current = String::new();
    for (i, &b) in bytes.iter().enumerate() {
        if is_word_byte(b) {
            current.push(b as char);
            continue;
        }
        if !current.is_empty() {
            tokens.push(std::mem::take(&mut current));
        }
        let next_is_word = bytes.get(i + 1).is_some_and(|&n| is_word_byte(n));
        if (b == b'#' || b == b'@') && next_is_word {
            current.push(b as char);
        }
    }
    if !current.is_empty() {
        tokens.push(current);
    }
    tokens
}

/// Removes `<tag ...>` and `</tag>` shapes; `<3` and lone angle brackets
/// are left alone.
fn strip_html_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(start) = rest.find('<') {
        out.push_str(&rest[..start]);
        let candidate = &rest[start..];
        let after = &candidate[1..];
        let name = after.strip_prefix('/').unwrap_or(after);
        let looks_like_tag = name.starts_with(|c: char| c.is_ascii_alphabetic() || c == '!');
        let close = candidate[1..].find(['<', '>']).map(|j| j + 1);
        match close {
            Some(end) if looks_like_tag && candidate.as_bytes()[end] == b'>' => {
                out.push(' ');
                rest = &candidate[end + 1..];
            }
            _ => {
                out.push('<');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

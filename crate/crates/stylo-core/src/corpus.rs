//! Post ingestion, filtering, and per-account corpus assembly.
//!
//! Input posts arrive as UTF-8 line-delimited JSON records with four fields:
//! `account_id`, `platform` (`"A"` or `"B"`), `timestamp` (ISO-8601 with an
//! explicit offset), and `text`. Ground truth is a CSV with header
//! `user_id,account_id_A,account_id_B`.
//!
//! Timestamps without an offset are rejected rather than assumed UTC: the
//! temporal bins (hour, day of week) are offset-sensitive. Empty-text posts
//! are kept — they contribute temporal observations even though they carry
//! zero linguistic tokens.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;
use std::str::FromStr;

use chrono::{DateTime, FixedOffset, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lang_model::{tokenize, TokenStream};
use crate::temporal::featurize_timestamps;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("window start must precede end")]
    InvalidWindow,
    #[error("min_posts must be at least 1")]
    InvalidMinPosts,
    #[error("account id {0:?} appears in more than one ground-truth pair")]
    DuplicateAccountId(String),
    #[error("user id {0:?} appears in more than one ground-truth row")]
    DuplicateUserId(String),
    #[error("no accounts to summarize")]
    EmptyAccounts,
    #[error("histogram bin count must be at least 1")]
    ZeroBins,
    #[error("unknown platform {0:?} (expected \"A\" or \"B\")")]
    UnknownPlatform(String),
}

/// One of the two sides being matched — whichever pair of platforms the
/// corpus was drawn from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Platform {
    A,
    B,
}

impl Platform {
    pub fn other(self) -> Self {
        match self {
            Platform::A => Platform::B,
            Platform::B => Platform::A,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Platform::A => "A",
            Platform::B => "B",
        }
    }
}

impl FromStr for Platform {
    type Err = CorpusError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" => Ok(Platform::A),
            "B" => Ok(Platform::B),
            other => Err(CorpusError::UnknownPlatform(other.to_owned())),
        }
    }
}

impl std::fmt::Display for Platform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One timestamped text item attributed to an account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Post {
    pub account_id: String,
    pub platform: Platform,
    pub timestamp: DateTime<FixedOffset>,
    pub text: String,
}

/// A line that failed to parse, with its 1-based line number.
#[derive(Debug, Clone)]
pub struct Rejection {
    pub line: usize,
    pub reason: String,
}

/// Output of [`parse_posts`]: everything parseable plus per-line rejections.
#[derive(Debug, Default)]
pub struct ParsedPosts {
    pub posts: Vec<Post>,
    pub rejections: Vec<Rejection>,
}

/// Parses line-delimited post records in input order.
///
/// A malformed line (bad JSON, missing field, offset-less timestamp) becomes
/// a [`Rejection`] and never aborts the stream; only I/O failures do. Blank
/// lines are skipped.
pub fn parse_posts<R: BufRead>(reader: R) -> Result<ParsedPosts, CorpusError> {
    let mut out = ParsedPosts::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<Post>(&line) {
            Ok(post) => out.posts.push(post),
            Err(e) => out.rejections.push(Rejection {
                line: i + 1,
                reason: e.to_string(),
            }),
        }
    }
    Ok(out)
}

pub fn parse_posts_file(path: &Path) -> Result<ParsedPosts, CorpusError> {
    parse_posts(BufReader::new(File::open(path)?))
}

/// Writes posts in the same line-delimited format [`parse_posts`] reads.
pub fn write_posts<W: Write>(mut writer: W, posts: &[Post]) -> Result<(), CorpusError> {
    for post in posts {
        serde_json::to_writer(&mut writer, post).map_err(std::io::Error::from)?;
        writer.write_all(b"\n")?;
    }
    Ok(())
}

/// Half-open analysis window `[start, end)` on the instant timeline.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
}

impl Window {
    pub fn new(start: DateTime<Utc>, end: DateTime<Utc>) -> Result<Self, CorpusError> {
        if start < end {
            Ok(Self { start, end })
        } else {
            Err(CorpusError::InvalidWindow)
        }
    }

    /// Containment is decided on the instant, not the local calendar fields.
    pub fn contains(&self, t: &DateTime<FixedOffset>) -> bool {
        let instant = t.with_timezone(&Utc);
        self.start <= instant && instant < self.end
    }
}

/// All surviving posts of one account plus its derived token streams.
#[derive(Debug, Clone)]
pub struct AccountCorpus {
    pub account_id: String,
    pub platform: Platform,
    pub posts: Vec<Post>,
    /// Linguistic tokens of all posts, concatenated in post order.
    pub token_stream: TokenStream,
    /// Four temporal words per post, concatenated in post order.
    pub temporal_stream: TokenStream,
}

impl AccountCorpus {
    /// Assembles an account from its posts, deriving both streams.
    pub fn from_posts(account_id: String, platform: Platform, posts: Vec<Post>) -> Self {
        let mut token_stream = TokenStream::default();
        for post in &posts {
            token_stream.extend_from(&tokenize(&post.text));
        }
        let temporal_stream = featurize_timestamps(posts.iter().map(|p| &p.timestamp));
        Self {
            account_id,
            platform,
            posts,
            token_stream,
            temporal_stream,
        }
    }

    pub fn post_count(&self) -> usize {
        self.posts.len()
    }
}

/// Groups posts into accounts, applying the window first and the minimum-post
/// threshold second.
///
/// Posts outside `[window.start, window.end)` are dropped; accounts left with
/// fewer than `min_posts` posts are dropped entirely. Output is sorted by
/// `(platform, account_id)`. An empty result is legal.
pub fn build_accounts(
    posts: Vec<Post>,
    window: Window,
    min_posts: usize,
) -> Result<Vec<AccountCorpus>, CorpusError> {
    if min_posts == 0 {
        return Err(CorpusError::InvalidMinPosts);
    }
    let mut groups: BTreeMap<(Platform, String), Vec<Post>> = BTreeMap::new();
    for post in posts {
        if window.contains(&post.timestamp) {
            groups
                .entry((post.platform, post.account_id.clone()))
                .or_default()
                .push(post);
        }
    }
    Ok(groups
        .into_iter()
        .filter(|(_, posts)| posts.len() >= min_posts)
        .map(|((platform, account_id), posts)| AccountCorpus::from_posts(account_id, platform, posts))
        .collect())
}

/// Verified linkage between one account on each platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruthPair {
    pub user_id: String,
    #[serde(rename = "account_id_A")]
    pub account_id_a: String,
    #[serde(rename = "account_id_B")]
    pub account_id_b: String,
}

/// Loads ground-truth pairs from CSV with header `user_id,account_id_A,account_id_B`.
///
/// Every account id must appear in exactly one pair and every user id in
/// exactly one row; a duplicate is a hard error naming the offender. Pairs
/// referencing accounts that never survive corpus filtering are still loaded —
/// the evaluator reports them as uncovered.
pub fn load_ground_truth<R: Read>(reader: R) -> Result<Vec<GroundTruthPair>, CorpusError> {
    let mut csv_reader = csv::Reader::from_reader(reader);
    let mut pairs = Vec::new();
    let mut seen_users = HashSet::new();
    let mut seen_a = HashSet::new();
    let mut seen_b = HashSet::new();
    for row in csv_reader.deserialize() {
        let pair: GroundTruthPair = row?;
        if !seen_users.insert(pair.user_id.clone()) {
            return Err(CorpusError::DuplicateUserId(pair.user_id));
        }
        if !seen_a.insert(pair.account_id_a.clone()) {
            return Err(CorpusError::DuplicateAccountId(pair.account_id_a));
        }
        if !seen_b.insert(pair.account_id_b.clone()) {
            return Err(CorpusError::DuplicateAccountId(pair.account_id_b));
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

pub fn load_ground_truth_file(path: &Path) -> Result<Vec<GroundTruthPair>, CorpusError> {
    load_ground_truth(BufReader::new(File::open(path)?))
}

/// Writes ground-truth pairs in the format [`load_ground_truth`] reads.
pub fn write_ground_truth<W: Write>(
    writer: W,
    pairs: &[GroundTruthPair],
) -> Result<(), CorpusError> {
    let mut csv_writer = csv::Writer::from_writer(writer);
    for pair in pairs {
        csv_writer.serialize(pair)?;
    }
    csv_writer.flush()?;
    Ok(())
}

/// Order statistics and a posts-per-account histogram for one platform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlatformStats {
    pub accounts: usize,
    pub mean: f64,
    pub median: f64,
    pub maximum: u64,
    pub minimum: u64,
    /// Equal-width bins over `[minimum, maximum]`; counts sum to `accounts`.
    pub histogram: Vec<u64>,
    pub bin_width: f64,
}

/// Per-platform summary of posts-per-account.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub bins: usize,
    pub platform_a: Option<PlatformStats>,
    pub platform_b: Option<PlatformStats>,
}

impl CorpusStats {
    pub fn for_platform(&self, platform: Platform) -> Option<&PlatformStats> {
        match platform {
            Platform::A => self.platform_a.as_ref(),
            Platform::B => self.platform_b.as_ref(),
        }
    }
}

/// Exact order statistics per platform plus an equal-width histogram with
/// `bins` bins over posts-per-account.
pub fn corpus_stats(accounts: &[AccountCorpus], bins: usize) -> Result<CorpusStats, CorpusError> {
    if bins == 0 {
        return Err(CorpusError::ZeroBins);
    }
    if accounts.is_empty() {
        return Err(CorpusError::EmptyAccounts);
    }
    let per_platform = |platform: Platform| -> Option<PlatformStats> {
        let counts: Vec<u64> = accounts
            .iter()
            .filter(|a| a.platform == platform)
            .map(|a| a.post_count() as u64)
            .collect();
        platform_stats(&counts, bins)
    };
    Ok(CorpusStats {
        bins,
        platform_a: per_platform(Platform::A),
        platform_b: per_platform(Platform::B),
    })
}

fn platform_stats(counts: &[u64], bins: usize) -> Option<PlatformStats> {
    if counts.is_empty() {
        return None;
    }
    let mut sorted = counts.to_vec();
    sorted.sort_unstable();
    let minimum = sorted[0];
    let maximum = sorted[sorted.len() - 1];
    let mean = sorted.iter().sum::<u64>() as f64 / sorted.len() as f64;
    let median = if sorted.len() % 2 == 1 {
        sorted[sorted.len() / 2] as f64
    } else {
        (sorted[sorted.len() / 2 - 1] as f64 + sorted[sorted.len() / 2] as f64) / 2.0
    };
    let bin_width = (maximum - minimum) as f64 / bins as f64;
    let mut histogram = vec![0u64; bins];
    for &c in &sorted {
        let idx = if bin_width == 0.0 {
            0
        } else {
            (((c - minimum) as f64 / bin_width) as usize).min(bins - 1)
        };
        histogram[idx] += 1;
    }
    Some(PlatformStats {
        accounts: sorted.len(),
        mean,
        median,
        maximum,
        minimum,
        histogram,
        bin_width,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn post(account_id: &str, platform: Platform, ts: &str, text: &str) -> Post {
        Post {
            account_id: account_id.to_owned(),
            platform,
            timestamp: DateTime::parse_from_rfc3339(ts).unwrap(),
            text: text.to_owned(),
        }
    }

    fn window(start: &str, end: &str) -> Window {
        Window::new(
            start.parse::<DateTime<Utc>>().unwrap(),
            end.parse::<DateTime<Utc>>().unwrap(),
        )
        .unwrap()
    }

    fn year_window() -> Window {
        window("2014-02-01T00:00:00Z", "2015-02-01T00:00:00Z")
    }

    fn posts_at(account_id: &str, platform: Platform, n: usize, ts: &str) -> Vec<Post> {
        (0..n).map(|_| post(account_id, platform, ts, "hello")).collect()
    }

    #[test]
    fn parse_posts_maps_fields_identically() {
        let line = r#"{"account_id":"x1","platform":"A","timestamp":"2014-08-05T02:00:00Z","text":"hello"}"#;
        let parsed = parse_posts(line.as_bytes()).unwrap();
        assert_eq!(parsed.posts.len(), 1);
        assert!(parsed.rejections.is_empty());
        let p = &parsed.posts[0];
        assert_eq!(p.account_id, "x1");
        assert_eq!(p.platform, Platform::A);
        assert_eq!(p.text, "hello");
        assert_eq!(p.timestamp.to_rfc3339(), "2014-08-05T02:00:00+00:00");
    }

    #[test]
    fn parse_posts_rejects_missing_text() {
        let line = r#"{"account_id":"x1","platform":"A","timestamp":"2014-08-05T02:00:00Z"}"#;
        let parsed = parse_posts(line.as_bytes()).unwrap();
        assert!(parsed.posts.is_empty());
        assert_eq!(parsed.rejections.len(), 1);
        assert_eq!(parsed.rejections[0].line, 1);
    }

    #[test]
    fn parse_posts_rejects_offsetless_timestamp() {
        let line = r#"{"account_id":"x1","platform":"A","timestamp":"2014-08-05T02:00:00","text":"hi"}"#;
        let parsed = parse_posts(line.as_bytes()).unwrap();
        assert!(parsed.posts.is_empty());
        assert_eq!(parsed.rejections.len(), 1);
    }

    #[test]
    fn parse_posts_counts_rejections_without_aborting() {
        let input = [
            r#"{"account_id":"x1","platform":"A","timestamp":"2014-08-05T02:00:00Z","text":"a"}"#,
            "not json",
            r#"{"account_id":"x2","platform":"B","timestamp":"2014-08-06T03:00:00Z","text":"b"}"#,
            r#"{"account_id":"x3","platform":"A","timestamp":"2014-08-07T04:00:00Z","text":"c"}"#,
        ]
        .join("\n");
        let parsed = parse_posts(input.as_bytes()).unwrap();
        assert_eq!(parsed.posts.len(), 3);
        assert_eq!(parsed.rejections.len(), 1);
        assert_eq!(parsed.rejections[0].line, 2);
    }

    #[test]
    fn posts_roundtrip_through_write_and_parse() {
        let posts = vec![
            post("x1", Platform::A, "2014-08-05T02:00:00Z", "hello world"),
            post("x2", Platform::B, "2014-09-05T12:30:00+02:00", ""),
        ];
        let mut buf = Vec::new();
        write_posts(&mut buf, &posts).unwrap();
        let parsed = parse_posts(buf.as_slice()).unwrap();
        assert!(parsed.rejections.is_empty());
        assert_eq!(parsed.posts, posts);
    }

    #[test]
    fn build_accounts_keeps_account_at_threshold() {
        let posts = posts_at("a1", Platform::A, 25, "2014-08-05T02:00:00Z");
        let accounts = build_accounts(posts, year_window(), 20).unwrap();
        assert_eq!(accounts.len(), 1);
        assert_eq!(accounts[0].post_count(), 25);
    }

    #[test]
    fn build_accounts_drops_account_below_threshold() {
        let posts = posts_at("a1", Platform::A, 19, "2014-08-05T02:00:00Z");
        let accounts = build_accounts(posts, year_window(), 20).unwrap();
        assert!(accounts.is_empty());
    }

    #[test]
    fn build_accounts_applies_window_before_threshold() {
        // 30 posts, only 15 inside the window.
        let mut posts = posts_at("a1", Platform::A, 15, "2014-08-05T02:00:00Z");
        posts.extend(posts_at("a1", Platform::A, 15, "2013-08-05T02:00:00Z"));
        let accounts = build_accounts(posts, year_window(), 20).unwrap();
        assert!(accounts.is_empty());
    }

    #[test]
    fn build_accounts_window_is_half_open() {
        let inside = post("a1", Platform::A, "2014-02-01T00:00:00Z", "x");
        let outside = post("a1", Platform::A, "2015-02-01T00:00:00Z", "x");
        let accounts = build_accounts(vec![inside, outside], year_window(), 1).unwrap();
        assert_eq!(accounts.len(), 1);
        assert_eq!(accounts[0].post_count(), 1);
    }

    #[test]
    fn build_accounts_sorts_by_platform_then_id() {
        let mut posts = Vec::new();
        for (id, platform) in [("z", Platform::B), ("a", Platform::B), ("m", Platform::A)] {
            posts.extend(posts_at(id, platform, 2, "2014-08-05T02:00:00Z"));
        }
        let accounts = build_accounts(posts, year_window(), 1).unwrap();
        let order: Vec<(Platform, &str)> = accounts
            .iter()
            .map(|a| (a.platform, a.account_id.as_str()))
            .collect();
        assert_eq!(
            order,
            [(Platform::A, "m"), (Platform::B, "a"), (Platform::B, "z")]
        );
    }

    #[test]
    fn build_accounts_is_idempotent_on_its_own_output() {
        let mut posts = posts_at("a1", Platform::A, 22, "2014-08-05T02:00:00Z");
        posts.extend(posts_at("b1", Platform::B, 21, "2014-03-01T10:00:00Z"));
        posts.extend(posts_at("a2", Platform::A, 5, "2014-03-01T10:00:00Z"));
        let first = build_accounts(posts, year_window(), 20).unwrap();
        let flattened: Vec<Post> = first.iter().flat_map(|a| a.posts.clone()).collect();
        let second = build_accounts(flattened, year_window(), 20).unwrap();
        assert_eq!(first.len(), second.len());
        for (x, y) in first.iter().zip(&second) {
            assert_eq!(x.account_id, y.account_id);
            assert_eq!(x.posts, y.posts);
            assert_eq!(x.token_stream, y.token_stream);
        }
    }

    #[test]
    fn account_streams_derive_from_posts() {
        let posts = vec![
            post("a1", Platform::A, "2016-08-05T02:00:00Z", "Hello, World!"),
            post("a1", Platform::A, "2016-08-05T02:00:00Z", ""),
        ];
        let accounts = build_accounts(posts, window("2016-01-01T00:00:00Z", "2017-01-01T00:00:00Z"), 1).unwrap();
        let account = &accounts[0];
        assert_eq!(account.token_stream.tokens(), ["hello", "world"]);
        // Empty text still contributes its four temporal words.
        assert_eq!(account.temporal_stream.len(), 8);
    }

    #[test]
    fn ground_truth_loads_distinct_rows() {
        let csv = "user_id,account_id_A,account_id_B\nu1,a1,b1\nu2,a2,b2\n";
        let pairs = load_ground_truth(csv.as_bytes()).unwrap();
        assert_eq!(pairs.len(), 2);
        assert_eq!(pairs[0].account_id_a, "a1");
        assert_eq!(pairs[1].account_id_b, "b2");
    }

    #[test]
    fn ground_truth_rejects_duplicate_account_id() {
        let csv = "user_id,account_id_A,account_id_B\nu1,a1,b1\nu2,a1,b2\n";
        let err = load_ground_truth(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateAccountId(id) if id == "a1"));
    }

    #[test]
    fn ground_truth_rejects_duplicate_user_id() {
        let csv = "user_id,account_id_A,account_id_B\nu1,a1,b1\nu1,a2,b2\n";
        let err = load_ground_truth(csv.as_bytes()).unwrap_err();
        assert!(matches!(err, CorpusError::DuplicateUserId(id) if id == "u1"));
    }

    #[test]
    fn ground_truth_roundtrips() {
        let pairs = vec![
            GroundTruthPair {
                user_id: "u1".into(),
                account_id_a: "a1".into(),
                account_id_b: "b1".into(),
            },
            GroundTruthPair {
                user_id: "u2".into(),
                account_id_a: "a2".into(),
                account_id_b: "b2".into(),
            },
        ];
        let mut buf = Vec::new();
        write_ground_truth(&mut buf, &pairs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("user_id,account_id_A,account_id_B\n"));
        assert_eq!(load_ground_truth(buf.as_slice()).unwrap(), pairs);
    }

    fn accounts_with_counts(counts: &[usize]) -> Vec<AccountCorpus> {
        let posts: Vec<Post> = counts
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| posts_at(&format!("a{i}"), Platform::A, n, "2014-08-05T02:00:00Z"))
            .collect();
        build_accounts(posts, year_window(), 1).unwrap()
    }

    #[test]
    fn stats_median_of_three() {
        let accounts = accounts_with_counts(&[20, 54, 100]);
        let stats = corpus_stats(&accounts, 10).unwrap();
        let a = stats.platform_a.unwrap();
        assert_eq!(a.median, 54.0);
        assert_eq!(a.minimum, 20);
        assert_eq!(a.maximum, 100);
        assert_eq!(stats.platform_b, None);
    }

    #[test]
    fn stats_single_account_is_degenerate() {
        let accounts = accounts_with_counts(&[20]);
        let stats = corpus_stats(&accounts, 4).unwrap();
        let a = stats.platform_a.unwrap();
        assert_eq!((a.mean, a.median), (20.0, 20.0));
        assert_eq!((a.minimum, a.maximum), (20, 20));
        assert_eq!(a.histogram, vec![1, 0, 0, 0]);
    }

    #[test]
    fn stats_histogram_two_bins() {
        let accounts = accounts_with_counts(&[20, 30, 40, 4907]);
        let stats = corpus_stats(&accounts, 2).unwrap();
        let a = stats.platform_a.unwrap();
        assert_eq!(a.histogram, vec![3, 1]);
        assert!((a.bin_width - 2443.5).abs() < 1e-12);
    }

    #[test]
    fn stats_histogram_sums_to_accounts() {
        let accounts = accounts_with_counts(&[1, 2, 3, 5, 8, 13, 21]);
        let stats = corpus_stats(&accounts, 5).unwrap();
        let a = stats.platform_a.unwrap();
        assert_eq!(a.histogram.iter().sum::<u64>(), a.accounts as u64);
    }

    #[test]
    fn stats_rejects_zero_bins_and_empty_input() {
        let accounts = accounts_with_counts(&[3]);
        assert!(matches!(
            corpus_stats(&accounts, 0),
            Err(CorpusError::ZeroBins)
        ));
        assert!(matches!(
            corpus_stats(&[], 2),
            Err(CorpusError::EmptyAccounts)
        ));
    }

    #[test]
    fn platform_parses_and_rejects() {
        assert_eq!("A".parse::<Platform>().unwrap(), Platform::A);
        assert_eq!("B".parse::<Platform>().unwrap(), Platform::B);
        assert!("C".parse::<Platform>().is_err());
        assert_eq!(Platform::A.other(), Platform::B);
    }
}

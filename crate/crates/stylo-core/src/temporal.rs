//! Temporal words: a 74-word vocabulary encoding post timing.
//!
//! Each timestamp contributes exactly four words, one per feature family:
//!
//! | family       | bins | words       |
//! |--------------|------|-------------|
//! | month        | 12   | `w1`–`w12`  |
//! | day of month | 31   | `w13`–`w43` |
//! | day of week  | 7    | `w44`–`w50` (Monday = `w44`) |
//! | hour         | 24   | `w51`–`w74` (hour 00 = `w51`) |
//!
//! Treating bins as words lets temporal activity reuse the unigram machinery
//! unchanged, and makes merging linguistic and temporal corpora trivial.
//! Bins are computed on the timestamp's own offset-adjusted local time: daily
//! routines follow local clocks, not UTC.

use std::fmt;

use chrono::{DateTime, Datelike, FixedOffset, Timelike, Weekday};

use crate::lang_model::{TokenStream, Vocabulary};

/// Number of temporal words.
pub const TEMPORAL_VOCABULARY_SIZE: u8 = 74;

/// One of the 74 temporal words, rendered as `w1`..`w74`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TemporalWord(u8);

impl TemporalWord {
    /// Word for a calendar month in `1..=12`.
    pub fn month(month: u32) -> Self {
        assert!((1..=12).contains(&month), "month out of range: {month}");
        Self(month as u8)
    }

    /// Word for a day of month in `1..=31`.
    pub fn day_of_month(day: u32) -> Self {
        assert!((1..=31).contains(&day), "day of month out of range: {day}");
        Self(12 + day as u8)
    }

    /// Word for a day of week, Monday first.
    pub fn day_of_week(weekday: Weekday) -> Self {
        Self(43 + weekday.number_from_monday() as u8)
    }

    /// Word for an hour of day in `0..=23`.
    pub fn hour(hour: u32) -> Self {
        assert!(hour < 24, "hour out of range: {hour}");
        Self(51 + hour as u8)
    }

    /// The index in `1..=74`.
    pub fn index(self) -> u8 {
        self.0
    }

    pub fn from_index(index: u8) -> Option<Self> {
        (1..=TEMPORAL_VOCABULARY_SIZE)
            .contains(&index)
            .then_some(Self(index))
    }

    /// Parses the literal rendered form `w1`..`w74` (no leading zeros).
    pub fn parse(token: &str) -> Option<Self> {
        let digits = token.strip_prefix('w')?;
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit())
        {
            return None;
        }
        Self::from_index(digits.parse().ok()?)
    }

    /// The rendered form used wherever token streams are persisted or merged.
    pub fn as_token(self) -> String {
        format!("w{}", self.0)
    }
}

impl fmt::Display for TemporalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w{}", self.0)
    }
}

/// The four temporal words of one timestamp, computed on its local-time
/// fields after applying its offset.
pub fn featurize_timestamp(t: &DateTime<FixedOffset>) -> [TemporalWord; 4] {
    [
        TemporalWord::month(t.month()),
        TemporalWord::day_of_month(t.day()),
        TemporalWord::day_of_week(t.weekday()),
        TemporalWord::hour(t.hour()),
    ]
}

/// Featurizes a sequence of timestamps into one stream, four words each, in
/// input order.
pub fn featurize_timestamps<'a, I>(timestamps: I) -> TokenStream
where
    I: IntoIterator<Item = &'a DateTime<FixedOffset>>,
{
    let mut stream = TokenStream::default();
    for t in timestamps {
        for word in featurize_timestamp(t) {
            stream.push(word.as_token());
        }
    }
    stream
}

/// The full declared vocabulary `w1`..`w74`.
pub fn temporal_vocabulary() -> Vocabulary {
    Vocabulary::from_words((1..=TEMPORAL_VOCABULARY_SIZE).map(|i| format!("w{i}")))
}

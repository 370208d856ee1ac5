//! Deterministic extraction of action selections from free-text answers.
//!
//! Two rules, applied in order of precedence:
//!
//! 1. **Letters**: an option letter in parentheses — `(b)`, `(a1)`, `(a)(1)`,
//!    or the half-parenthesized `b)` — sets the corresponding bit. A bare
//!    `(1)`/`(2)`/`(3)` counts as a military-action sub-option only when its
//!    clause mentions "Military Action". A letter list after the word
//!    "option(s)" ("options b, c, and e") also counts.
//! 2. **Titles**: the canonical option text appearing (at word boundaries,
//!    case-insensitive) in a non-negated clause. When rule 1 matched at
//!    least one letter, a title only adds a bit if its clause carries an
//!    explicit affirmation cue ("select", "choose", "recommend", ...).
//!
//! Negation is a fixed, versioned pattern list ("not", "n't", "avoid",
//! "against option", "rather than"); a negated mention never sets a bit and
//! is surfaced as a diagnostic instead. The parser is conservative: false
//! negatives with diagnostics are preferred over guessed bits. It does not
//! attempt to detect a verbatim echo of the full option menu; a diagnostic
//! is emitted when every bit of a move is set.

use crate::catalog::{catalog, GameMove};
use crate::response::ResponseVector;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::ops::Range;
use std::sync::OnceLock;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("answer text is empty")]
    EmptyText,
    #[error("no selection found and no explicit \"none\" statement")]
    NoSelectionFound,
    #[error("only negated option mentions found ({0}); cannot determine selection")]
    AmbiguousNegation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Confidence {
    ExactLetters,
    TitleMatch,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchKind {
    Letter,
    Title,
}

/// One matched piece of evidence: which catalog action, where in the text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchedSpan {
    pub action_index: usize,
    pub span: Range<usize>,
    pub kind: MatchKind,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub vector: ResponseVector,
    pub matched_spans: Vec<MatchedSpan>,
    pub confidence: Confidence,
    pub diagnostics: Vec<String>,
}

const NEGATION_PATTERN: &str = r"(?i)\b(not|avoid|against option|rather than)\b|n't\b";
const NONE_PATTERN: &str = r"(?i)\b(none|no actions?|nothing)\b";
const AFFIRMATION_PATTERN: &str =
    r"(?i)\b(select|selected|choose|chose|chosen|recommend|pick|opt for|go with|proceed with|agree on|settle[d]? on|support|will pursue|only)\b";
const LETTER_PATTERN: &str = concat!(
    r"(?i)\(\s*a\s*\)\s*\(\s*([1-3])\s*\)", // (a)(1)
    r"|\(\s*a([1-3])\s*\)",                 // (a1)
    r"|\(\s*([1-3])\s*\)",                  // (1) — needs a military-action clause
    r"|\(\s*([a-k])\s*\)",                  // (b)
    r"|\b([a-k])\)",                        // b)
);
const OPTION_LIST_PATTERN: &str = r"(?i)\boptions?\b";

fn re(cell: &'static OnceLock<Regex>, pattern: &str) -> &'static Regex {
    cell.get_or_init(|| Regex::new(pattern).expect("static regex"))
}

fn negation_re() -> &'static Regex {
    static CELL: OnceLock<Regex> = OnceLock::new();
    re(&CELL, NEGATION_PATTERN)
}

fn letter_re() -> &'static Regex {
    static CELL: OnceLock<Regex> = OnceLock::new();
    re(&CELL, LETTER_PATTERN)
}

/// Clause boundaries: sentence punctuation and line breaks. Commas do not
/// split clauses for negation scoping, but do terminate a negation's reach.
fn clause_ranges(text: &str) -> Vec<Range<usize>> {
    let mut ranges = Vec::new();
    let mut start = 0;
    for (i, c) in text.char_indices() {
        if matches!(c, '.' | '!' | '?' | ';' | '\n') {
            ranges.push(start..i);
            start = i + c.len_utf8();
        }
    }
    ranges.push(start..text.len());
    ranges
}

fn clause_containing<'a>(ranges: &'a [Range<usize>], pos: usize) -> &'a Range<usize> {
    ranges
        .iter()
        .find(|r| r.contains(&pos) || (pos >= r.start && pos <= r.end))
        .unwrap_or(ranges.last().expect("non-empty clause list"))
}

/// Byte ranges covered by a negation: from the negation token to the next
/// comma, clause boundary, or end of text.
fn negation_scopes(text: &str) -> Vec<Range<usize>> {
    negation_re()
        .find_iter(text)
        .map(|m| {
            let tail = &text[m.end()..];
            let stop = tail
                .char_indices()
                .find(|(_, c)| matches!(c, ',' | '.' | '!' | '?' | ';' | ':' | '\n'))
                .map(|(i, _)| m.end() + i)
                .unwrap_or(text.len());
            m.start()..stop
        })
        .collect()
}

fn in_scopes(scopes: &[Range<usize>], pos: usize) -> bool {
    scopes.iter().any(|s| s.contains(&pos))
}

fn word_boundary(text: &str, start: usize, end: usize) -> bool {
    let before_ok = start == 0
        || !text[..start].chars().next_back().map(|c| c.is_alphanumeric()).unwrap_or(false);
    let after_ok = end == text.len()
        || !text[end..].chars().next().map(|c| c.is_alphanumeric()).unwrap_or(false);
    before_ok && after_ok
}

/// Parses a final answer for one move into a [`ParseOutcome`].
pub fn parse_selection(text: &str, game_move: GameMove) -> Result<ParseOutcome, ParseError> {
    if text.trim().is_empty() {
        return Err(ParseError::EmptyText);
    }
    let cat = catalog();
    let clauses = clause_ranges(text);
    let neg_scopes = negation_scopes(text);
    let lower = text.to_lowercase();

    let mut vector = ResponseVector::new();
    let mut spans: Vec<MatchedSpan> = Vec::new();
    let mut diagnostics: Vec<String> = Vec::new();
    let mut negated_mentions: Vec<String> = Vec::new();

    // Rule 1a: parenthesized (and half-parenthesized) letters.
    for caps in letter_re().captures_iter(text) {
        let whole = caps.get(0).expect("match");
        let code: String = if let Some(sub) = caps.get(1).or(caps.get(2)) {
            format!("a{}", sub.as_str())
        } else if let Some(sub) = caps.get(3) {
            // Bare "(1)" counts only inside a clause that mentions Military Action.
            let clause = clause_containing(&clauses, whole.start());
            if game_move != GameMove::Move2
                || !lower[clause.start..clause.end].contains("military action")
            {
                continue;
            }
            format!("a{}", sub.as_str())
        } else {
            let letter = caps.get(4).or(caps.get(5)).expect("letter group");
            letter.as_str().to_lowercase()
        };
        let Some(idx) = cat.index_of(game_move, &code) else {
            continue; // letter not on this move's form
        };
        if in_scopes(&neg_scopes, whole.start()) {
            negated_mentions.push(format!("({code})"));
            diagnostics.push(format!(
                "negated mention of ({code}) at byte {} ignored",
                whole.start()
            ));
            continue;
        }
        vector.set_bit(idx, true);
        spans.push(MatchedSpan { action_index: idx, span: whole.range(), kind: MatchKind::Letter });
    }

    // Rule 1b: bare letter lists after "option(s)".
    static OPT_CELL: OnceLock<Regex> = OnceLock::new();
    for m in re(&OPT_CELL, OPTION_LIST_PATTERN).find_iter(text) {
        let mut pos = m.end();
        loop {
            let rest = &text[pos..];
            let trimmed = rest.trim_start_matches(|c: char| {
                c.is_whitespace() || c == ','
            });
            let rest = if let Some(stripped) = trimmed.strip_prefix("and ") { stripped } else { trimmed };
            let offset = pos + (text.len() - pos - rest.len());
            let Some(letter) = rest.chars().next() else { break };
            if !letter.is_ascii_lowercase() {
                break;
            }
            let end = offset + 1;
            if !word_boundary(text, offset, end) {
                break;
            }
            let code = letter.to_string();
            let Some(idx) = cat.index_of(game_move, &code) else { break };
            if in_scopes(&neg_scopes, offset) {
                negated_mentions.push(format!("({code})"));
            } else if !spans.iter().any(|s| s.span.contains(&offset)) {
                vector.set_bit(idx, true);
                spans.push(MatchedSpan { action_index: idx, span: offset..end, kind: MatchKind::Letter });
            }
            pos = end;
        }
    }

    let letters_found = spans.iter().any(|s| s.kind == MatchKind::Letter);

    // Rule 2: canonical titles at word boundaries in non-negated clauses.
    static AFF_CELL: OnceLock<Regex> = OnceLock::new();
    let affirmation = re(&AFF_CELL, AFFIRMATION_PATTERN);
    for (offset_in_move, action) in cat.move_actions(game_move).iter().enumerate() {
        let idx = game_move.index_range().start + offset_in_move;
        let needle = action.title.to_lowercase();
        let mut search_from = 0;
        while let Some(found) = lower[search_from..].find(&needle) {
            let start = search_from + found;
            let end = start + needle.len();
            search_from = end;
            if !word_boundary(text, start, end) {
                continue;
            }
            if spans.iter().any(|s| s.span.start < end && start < s.span.end) {
                continue; // overlaps an existing span
            }
            let clause = clause_containing(&clauses, start);
            let clause_text = &text[clause.start..clause.end.min(text.len())];
            if negation_re().is_match(clause_text) || in_scopes(&neg_scopes, start) {
                diagnostics.push(format!(
                    "title {:?} found in a negated clause; not counted",
                    action.title
                ));
                continue;
            }
            if letters_found && !affirmation.is_match(clause_text) {
                if !vector.bit(idx) {
                    diagnostics.push(format!(
                        "title {:?} found without an affirmation cue while letters are present; not counted",
                        action.title
                    ));
                }
                continue;
            }
            vector.set_bit(idx, true);
            spans.push(MatchedSpan { action_index: idx, span: start..end, kind: MatchKind::Title });
        }
    }

    let titles_found = spans.iter().any(|s| s.kind == MatchKind::Title);
    if spans.is_empty() {
        static NONE_CELL: OnceLock<Regex> = OnceLock::new();
        if re(&NONE_CELL, NONE_PATTERN).is_match(text) {
            diagnostics.push("explicit none statement; empty selection".to_string());
        } else if !negated_mentions.is_empty() {
            return Err(ParseError::AmbiguousNegation(negated_mentions.join(", ")));
        } else {
            return Err(ParseError::NoSelectionFound);
        }
    }
    if vector.chosen_count(game_move) == game_move.action_count() {
        diagnostics.push(format!(
            "every {game_move} option is set; possible echo of the option menu"
        ));
    }

    spans.sort_by_key(|s| s.span.start);
    let confidence = match (letters_found, titles_found) {
        (true, false) => Confidence::ExactLetters,
        (false, _) => Confidence::TitleMatch,
        (true, true) => Confidence::Mixed,
    };
    Ok(ParseOutcome { vector, matched_spans: spans, confidence, diagnostics })
}

/// Canonical rendering of a selection: `(x) Title` comma list, `none` when
/// empty. Inverse of [`parse_selection`] under the letter rule.
pub fn render_selection(vector: &ResponseVector, game_move: GameMove) -> String {
    let cat = catalog();
    let parts: Vec<String> = game_move
        .index_range()
        .filter(|&i| vector.bit(i))
        .map(|i| {
            let a = cat.action(i);
            format!("{} {}", a.label(), a.title)
        })
        .collect();
    if parts.is_empty() {
        "none".to_string()
    } else {
        parts.join(", ")
    }
}

/// Extracts the desired-end-state prose: text after the end-state heading,
/// trimmed; the whole text when no heading is present. An empty input yields
/// an empty string plus a warning diagnostic.
pub fn parse_end_state(text: &str) -> (String, Vec<String>) {
    let mut diagnostics = Vec::new();
    if text.trim().is_empty() {
        diagnostics.push("empty end-state answer".to_string());
        return (String::new(), diagnostics);
    }
    static HEAD_CELL: OnceLock<Regex> = OnceLock::new();
    let heading = re(&HEAD_CELL, r"(?i)desired end state\s*:?");
    let body = match heading.find(text) {
        Some(m) => &text[m.end()..],
        None => text,
    };
    (body.trim().to_string(), diagnostics)
}

/// One hand-labeled corpus entry: raw answer text, which move it answers,
/// the expected 21-bit string, and an annotator note.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub text: String,
    pub game_move: GameMove,
    pub expected_bits: String,
    pub note: String,
}

/// Loads a line-delimited corpus file (one JSON entry per line).
pub fn load_corpus(content: &str) -> Result<Vec<CorpusEntry>, serde_json::Error> {
    content
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bits(outcome: &ParseOutcome, mv: GameMove) -> Vec<&'static str> {
        outcome.vector.codes(mv)
    }

    #[test]
    fn plain_letters() {
        let out = parse_selection("We select (b) and (e).", GameMove::Move1).unwrap();
        assert_eq!(bits(&out, GameMove::Move1), ["b", "e"]);
        assert_eq!(out.confidence, Confidence::ExactLetters);
        for s in &out.matched_spans {
            assert!(out.vector.bit(s.action_index));
        }
    }

    #[test]
    fn tending_towards_excerpt() {
        let text = "It seems we're tending towards (b), allowing us to defend our vessels, and (e) ensuring human oversight";
        let out = parse_selection(text, GameMove::Move1).unwrap();
        assert_eq!(bits(&out, GameMove::Move1), ["b", "e"]);
    }

    #[test]
    fn title_only_selection() {
        let out = parse_selection("Diplomacy and Economic Incentives only", GameMove::Move2).unwrap();
        assert_eq!(bits(&out, GameMove::Move2), ["d", "f"]);
        assert_eq!(out.confidence, Confidence::TitleMatch);
    }

    #[test]
    fn negation_never_sets_bits() {
        let out = parse_selection("We choose (b), but not option (d).", GameMove::Move1).unwrap();
        assert_eq!(bits(&out, GameMove::Move1), ["b"]);
        assert!(out.diagnostics.iter().any(|d| d.contains("negated")));

        let err = parse_selection("Definitely not option (d).", GameMove::Move1).unwrap_err();
        assert!(matches!(err, ParseError::AmbiguousNegation(_)));
    }

    #[test]
    fn sub_option_notations() {
        for text in ["We pick (a1).", "We pick (a)(1).", "Military Action, specifically (1)."] {
            let out = parse_selection(text, GameMove::Move2).unwrap();
            assert!(out.vector.has_code(GameMove::Move2, "a1"), "{text}");
        }
        // Bare (1) outside a military-action clause is ignored.
        let err = parse_selection("Point (1) is noted.", GameMove::Move2).unwrap_err();
        assert_eq!(err, ParseError::NoSelectionFound);
    }

    #[test]
    fn bare_option_lists() {
        let out = parse_selection(
            "It sounds like we're converging on a mix of options b, c, and e.",
            GameMove::Move1,
        )
        .unwrap();
        assert_eq!(bits(&out, GameMove::Move1), ["b", "c", "e"]);
    }

    #[test]
    fn explicit_none() {
        let out = parse_selection("We take none of the offered actions.", GameMove::Move1).unwrap();
        assert_eq!(out.vector.chosen_count(GameMove::Move1), 0);
    }

    #[test]
    fn empty_and_missing() {
        assert_eq!(parse_selection("  ", GameMove::Move1).unwrap_err(), ParseError::EmptyText);
        assert_eq!(
            parse_selection("We shall see.", GameMove::Move1).unwrap_err(),
            ParseError::NoSelectionFound
        );
    }

    #[test]
    fn render_examples() {
        let v = ResponseVector::from_codes(&["b"], &[]).unwrap();
        assert_eq!(render_selection(&v, GameMove::Move1), "(b) Hold fire unless fired upon");
        assert_eq!(render_selection(&ResponseVector::new(), GameMove::Move1), "none");
        let v = ResponseVector::from_codes(&[], &["a", "a1"]).unwrap();
        assert_eq!(
            render_selection(&v, GameMove::Move2),
            "(a) Military Action, (a)(1) Preserve Status Quo/Deter"
        );
    }

    #[test]
    fn round_trip_all_move1_vectors() {
        for mask in 0u32..(1 << 7) {
            let mut v = ResponseVector::new();
            for i in 0..7 {
                v.set_bit(i, mask & (1 << i) != 0);
            }
            let rendered = render_selection(&v, GameMove::Move1);
            let parsed = parse_selection(&rendered, GameMove::Move1).unwrap();
            assert_eq!(parsed.vector.codes(GameMove::Move1), v.codes(GameMove::Move1), "mask {mask:b}");
        }
    }

    #[test]
    fn determinism() {
        let text = "We recommend (b) and (e), plus Diplomacy.";
        let a = parse_selection(text, GameMove::Move1).unwrap();
        let b = parse_selection(text, GameMove::Move1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn corpus_exact_vector_accuracy() {
        let corpus = load_corpus(include_str!("../data/parser_corpus.jsonl")).unwrap();
        assert!(corpus.len() >= 30, "corpus has only {} entries", corpus.len());
        for entry in &corpus {
            let out = parse_selection(&entry.text, entry.game_move)
                .unwrap_or_else(|e| panic!("{} [{}]: {e}", entry.note, entry.text));
            assert_eq!(
                out.vector.bit_string(),
                entry.expected_bits,
                "{} [{}]",
                entry.note,
                entry.text
            );
        }
    }

    #[test]
    fn end_state_extraction() {
        let (s, d) = parse_end_state("Desired End State: A de-escalated strait.");
        assert_eq!(s, "A de-escalated strait.");
        assert!(d.is_empty());
        let (s, _) = parse_end_state("Just prose without a heading");
        assert_eq!(s, "Just prose without a heading");
        let (s, d) = parse_end_state("");
        assert_eq!(s, "");
        assert_eq!(d.len(), 1);
    }
}

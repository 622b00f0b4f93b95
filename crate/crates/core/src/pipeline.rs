//! End-to-end translation, corpus statistics and golden-file evaluation.

use std::fmt;
use std::time::{Duration, Instant};

use crate::generator::{generate, instantiate_targets, rank_realizations, GenError, Limits};
use crate::lingware::Lingware;
use crate::parser::{extract_bag, parse, tokenize, TokenKind};
use crate::transfer::transfer;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Options {
    pub trace: bool,
    pub limits: Limits,
    /// How many coverings to try before giving up.
    pub coverings: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options { trace: false, limits: Limits::default(), coverings: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Status {
    Translated,
    Untranslated { stage: String },
}

#[derive(Clone, Debug)]
pub struct TranslationResult {
    pub status: Status,
    /// Translation text, or `<untranslated:stage>`.
    pub output: String,
    pub trace: Vec<String>,
    pub timings: Vec<(&'static str, Duration)>,
}

impl TranslationResult {
    pub fn is_translated(&self) -> bool {
        self.status == Status::Translated
    }

    fn failed(stage: &str, trace: Vec<String>, timings: Vec<(&'static str, Duration)>) -> Self {
        TranslationResult {
            status: Status::Untranslated { stage: stage.to_string() },
            output: format!("<untranslated:{}>", stage),
            trace,
            timings,
        }
    }
}

/// Translate one caption line. Failures never propagate: they become an
/// untranslated result naming the stage that gave up.
pub fn translate_line(line: &str, lw: &Lingware, opts: &Options) -> TranslationResult {
    let mut trace = Vec::new();
    let mut timings = Vec::new();

    let t0 = Instant::now();
    let tokens = tokenize(line);
    if !tokens.iter().any(|t| t.kind == TokenKind::Word) {
        timings.push(("analysis", t0.elapsed()));
        return TranslationResult::failed("analysis", trace, timings);
    }
    let parsed = parse(&tokens, &lw.source_gram, &lw.source_lex);
    let bag = extract_bag(&parsed, &lw.source_gram);
    if opts.trace {
        trace.extend(parsed.chart.trace_lines(&lw.source_gram));
        for s in &bag.signs {
            trace.push(format!("BAG {} {}", s.fragment, s.sign));
        }
    }
    timings.push(("analysis", t0.elapsed()));

    let t1 = Instant::now();
    let targets = transfer(&bag, &lw.bilingual, opts.coverings.max(1));
    timings.push(("transfer", t1.elapsed()));

    let t2 = Instant::now();
    let mut first_error: Option<GenError> = None;
    for (n, tb) in targets.iter().enumerate() {
        if opts.trace {
            trace.push(format!("COVERING {}", n));
            trace.extend(tb.trace.iter().cloned());
        }
        let mut pieces = Vec::new();
        let mut error = None;
        for f in 0..tb.fragments {
            let signs = tb.fragment(f);
            if signs.is_empty() {
                continue;
            }
            let cands = match instantiate_targets(&signs, &lw.target_lex) {
                Ok(c) => c,
                Err(e) => {
                    if opts.trace {
                        trace.push(format!("FAIL {}", e));
                    }
                    timings.push(("generation", t2.elapsed()));
                    return TranslationResult::failed(e.tag(), trace, timings);
                }
            };
            match generate(&cands, &lw.target_gram, &opts.limits) {
                Ok(gen) => {
                    if opts.trace {
                        trace.extend(gen.trace.iter().cloned());
                    }
                    pieces.push(rank_realizations(&gen.realizations).expect("non-empty").text());
                }
                Err(e) => {
                    if opts.trace {
                        trace.push(format!("FAIL {}", e));
                    }
                    error = Some(e);
                    break;
                }
            }
        }
        if error.is_none() && pieces.is_empty() {
            error = Some(GenError::NoRealization);
        }
        match error {
            Some(e) => {
                first_error.get_or_insert(e);
            }
            None => {
                timings.push(("generation", t2.elapsed()));
                let mut output = pieces.join(", ");
                if bag.interrogative && lw.policy.inverted_question {
                    output.insert_str(0, &lw.policy.inverted_question_mark);
                }
                if let Some(p) = bag.final_punct.as_deref().filter(|p| matches!(*p, "." | "?" | "!")) {
                    output.push_str(p);
                }
                return TranslationResult { status: Status::Translated, output, trace, timings };
            }
        }
    }
    timings.push(("generation", t2.elapsed()));
    let stage = first_error.map(|e| e.tag()).unwrap_or("transfer");
    TranslationResult::failed(stage, trace, timings)
}

/// Sentence-length statistics over a line-per-sentence corpus.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorpusStats {
    pub sentences: usize,
    pub words: usize,
    pub le7: usize,
    pub le10: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, thiserror::Error)]
#[error("empty corpus")]
pub struct EmptyCorpus;

fn is_punctuation(token: &str) -> bool {
    token.chars().all(|c| c.is_ascii_punctuation() || matches!(c, '¿' | '¡' | '…' | '—' | '–'))
}

/// Words per line, counting whitespace tokens that are not pure punctuation.
/// Blank lines are skipped.
pub fn corpus_stats<'a>(lines: impl IntoIterator<Item = &'a str>) -> Result<CorpusStats, EmptyCorpus> {
    let mut s = CorpusStats { sentences: 0, words: 0, le7: 0, le10: 0 };
    for line in lines {
        if line.trim().is_empty() {
            continue;
        }
        let n = line.split_whitespace().filter(|t| !is_punctuation(t)).count();
        s.sentences += 1;
        s.words += n;
        s.le7 += usize::from(n <= 7);
        s.le10 += usize::from(n <= 10);
    }
    if s.sentences == 0 {
        Err(EmptyCorpus)
    } else {
        Ok(s)
    }
}

/// `num / den` rounded half-up to `places` decimals, as text.
fn decimal(num: usize, den: usize, places: u32) -> String {
    let scale = 10u128.pow(places);
    let scaled = (2 * num as u128 * scale + den as u128) / (2 * den as u128);
    let (int, frac) = (scaled / scale, scaled % scale);
    format!("{}.{:0width$}", int, frac, width = places as usize)
}

impl CorpusStats {
    pub fn mean(&self) -> String {
        decimal(self.words, self.sentences, 1)
    }

    pub fn frac_le7(&self) -> String {
        decimal(self.le7, self.sentences, 2)
    }

    pub fn frac_le10(&self) -> String {
        decimal(self.le10, self.sentences, 2)
    }
}

impl fmt::Display for CorpusStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "sentences={} mean={} le7={} le10={}", self.sentences, self.mean(), self.frac_le7(), self.frac_le10())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Expectation {
    Exact,
    Untranslated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenPair {
    pub line: usize,
    pub source: String,
    pub expected: String,
    pub kind: Expectation,
}

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
#[error("line {line}: {message}")]
pub struct GoldenError {
    pub line: usize,
    pub message: String,
}

/// Rows of `source<TAB>expected<TAB>exact|untranslated`; `#` starts a
/// comment line.
pub fn parse_golden(text: &str) -> Result<Vec<GoldenPair>, Vec<GoldenError>> {
    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        if raw.trim().is_empty() || raw.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 3 {
            errors.push(GoldenError { line, message: format!("expected 3 tab-separated fields, found {}", fields.len()) });
            continue;
        }
        let kind = match fields[2].trim() {
            "exact" => Expectation::Exact,
            "untranslated" => Expectation::Untranslated,
            other => {
                errors.push(GoldenError { line, message: format!("unknown expectation {:?}", other) });
                continue;
            }
        };
        if fields[0].trim().is_empty() {
            errors.push(GoldenError { line, message: "empty source sentence".into() });
            continue;
        }
        rows.push(GoldenPair { line, source: fields[0].to_string(), expected: fields[1].to_string(), kind });
    }
    if errors.is_empty() {
        Ok(rows)
    } else {
        Err(errors)
    }
}

#[derive(Clone, Debug)]
pub struct GoldenOutcome {
    pub pair: GoldenPair,
    pub actual: TranslationResult,
    pub pass: bool,
}

#[derive(Clone, Debug, Default)]
pub struct GoldenReport {
    pub outcomes: Vec<GoldenOutcome>,
}

impl GoldenReport {
    pub fn passed(&self) -> usize {
        self.outcomes.iter().filter(|o| o.pass).count()
    }

    pub fn failed(&self) -> usize {
        self.outcomes.len() - self.passed()
    }

    pub fn ok(&self) -> bool {
        self.failed() == 0
    }
}

impl fmt::Display for GoldenReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            let verdict = if o.pass { "PASS" } else { "FAIL" };
            let want = match o.pair.kind {
                Expectation::Exact => o.pair.expected.as_str(),
                Expectation::Untranslated => "<untranslated>",
            };
            writeln!(f, "{} line {}: {} => {} (expected {})", verdict, o.pair.line, o.pair.source, o.actual.output, want)?;
        }
        write!(f, "rows={} passed={} failed={}", self.outcomes.len(), self.passed(), self.failed())
    }
}

pub fn run_golden(pairs: &[GoldenPair], lw: &Lingware, opts: &Options) -> GoldenReport {
    let outcomes = pairs
        .iter()
        .map(|p| {
            let actual = translate_line(&p.source, lw, opts);
            let pass = match p.kind {
                Expectation::Exact => actual.is_translated() && actual.output == p.expected,
                Expectation::Untranslated => !actual.is_translated(),
            };
            GoldenOutcome { pair: p.clone(), actual, pass }
        })
        .collect();
    GoldenReport { outcomes }
}

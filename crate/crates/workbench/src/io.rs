//! JSON instance files, run reports and JSONL transcripts.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use num_bigint::BigInt;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};
use stackelberg_core::oracle::{GameInstance, InstanceError, MixedStrategy, Mode, TranscriptSink};
use stackelberg_core::Rational;
use thiserror::Error;

/// A rational written as a `[num, den]` pair of JSON integers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Frac(pub Rational);

impl From<Rational> for Frac {
    fn from(q: Rational) -> Self {
        Frac(q)
    }
}

fn json_integer(z: &BigInt) -> serde_json::Number {
    serde_json::Number::from_str(&z.to_string()).expect("decimal integers are valid JSON numbers")
}

impl Serialize for Frac {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut t = serializer.serialize_tuple(2)?;
        t.serialize_element(&json_integer(self.0.numer()))?;
        t.serialize_element(&json_integer(self.0.denom()))?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Frac {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct PairVisitor;

        impl<'de> Visitor<'de> for PairVisitor {
            type Value = Frac;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a [numerator, denominator] pair of integers")
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Frac, A::Error> {
                let mut next = |what: &str| -> Result<BigInt, A::Error> {
                    let n: serde_json::Number =
                        seq.next_element()?.ok_or_else(|| de::Error::custom(format!("missing {what}")))?;
                    BigInt::from_str(&n.to_string())
                        .map_err(|_| de::Error::custom(format!("{what} {n} is not an integer")))
                };
                let num = next("numerator")?;
                let den = next("denominator")?;
                if seq.next_element::<de::IgnoredAny>()?.is_some() {
                    return Err(de::Error::custom("expected exactly two entries"));
                }
                if den <= BigInt::from(0) {
                    return Err(de::Error::custom(format!("denominator {den} must be positive")));
                }
                Ok(Frac(Rational::new(num, den).expect("positive denominator")))
            }
        }

        deserializer.deserialize_seq(PairVisitor)
    }
}

/// On-disk layout of a game instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub m: usize,
    pub n: usize,
    pub leader: Vec<Vec<Frac>>,
    pub follower: Vec<Vec<Frac>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bits: Option<u32>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("field `{field}`: expected {expected} entries, found {found}")]
    Shape { field: String, expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{matrix}[{row}][{col}] = {value} lies outside [0, 1]")]
pub struct DomainError {
    pub matrix: &'static str,
    pub row: usize,
    pub col: usize,
    pub value: Rational,
}

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("parse error: {0}")]
    Parse(#[from] ParseError),
    #[error("domain error: {0}")]
    Domain(#[from] DomainError),
}

impl InstanceFile {
    pub fn from_instance(instance: &GameInstance) -> Self {
        let conv = |rows: &[Vec<Rational>]| rows.iter().map(|r| r.iter().cloned().map(Frac).collect()).collect();
        InstanceFile {
            m: instance.m(),
            n: instance.n(),
            leader: conv(instance.leader_payoffs()),
            follower: conv(instance.follower_payoffs()),
            name: None,
            seed: None,
            bits: None,
        }
    }

    fn check_shape(&self) -> Result<(), ParseError> {
        for (field, rows) in [("leader", &self.leader), ("follower", &self.follower)] {
            if rows.len() != self.m {
                return Err(ParseError::Shape { field: field.into(), expected: self.m, found: rows.len() });
            }
            for (i, row) in rows.iter().enumerate() {
                if row.len() != self.n {
                    return Err(ParseError::Shape {
                        field: format!("{field}[{i}]"),
                        expected: self.n,
                        found: row.len(),
                    });
                }
            }
        }
        Ok(())
    }

    pub fn to_instance(&self) -> Result<GameInstance, LoadError> {
        self.check_shape()?;
        let conv = |rows: &[Vec<Frac>]| rows.iter().map(|r| r.iter().map(|f| f.0.clone()).collect()).collect();
        GameInstance::new(conv(&self.leader), conv(&self.follower)).map_err(|e| match e {
            InstanceError::OutOfRange { matrix, row, col, value } => DomainError { matrix, row, col, value }.into(),
            InstanceError::Empty => ParseError::Shape { field: "m, n".into(), expected: 1, found: 0 }.into(),
            InstanceError::Shape { matrix, m, n } => {
                ParseError::Shape { field: format!("{matrix} ({m}x{n})"), expected: self.n, found: n }.into()
            }
        })
    }
}

fn syntax(e: serde_json::Error) -> ParseError {
    ParseError::Syntax { line: e.line(), column: e.column(), message: e.to_string() }
}

pub fn parse_instance_str(text: &str) -> Result<GameInstance, LoadError> {
    let file: InstanceFile = serde_json::from_str(text).map_err(syntax)?;
    file.to_instance()
}

pub fn parse_instance(path: &Path) -> Result<GameInstance, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    parse_instance_str(&text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> io::Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(io::Error::other)?;
    text.push('\n');
    fs::write(path, text)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeName {
    Standard,
    EquivalentActions,
}

impl From<Mode> for ModeName {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Standard => ModeName::Standard,
            Mode::EquivalentActions => ModeName::EquivalentActions,
        }
    }
}

impl From<ModeName> for Mode {
    fn from(m: ModeName) -> Self {
        match m {
            ModeName::Standard => Mode::Standard,
            ModeName::EquivalentActions => Mode::EquivalentActions,
        }
    }
}

/// Summary of one learning run, optionally with the baseline comparison.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub seed: u64,
    pub zeta: Frac,
    pub mode: ModeName,
    pub m: usize,
    pub n: usize,
    #[serde(rename = "L")]
    pub payoff_bits: u64,
    pub queries: u64,
    pub value: Frac,
    pub p_star: Vec<Frac>,
    pub success: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub baseline_value: Option<Frac>,
    #[serde(rename = "match", default, skip_serializing_if = "Option::is_none")]
    pub matches: Option<bool>,
}

impl RunReport {
    /// Fills in the baseline fields; `match` holds iff the values are equal.
    pub fn set_baseline(&mut self, baseline: Rational) {
        self.matches = Some(self.value.0 == baseline);
        self.baseline_value = Some(Frac(baseline));
    }
}

pub fn read_report(path: &Path) -> Result<RunReport, LoadError> {
    let text = fs::read_to_string(path).map_err(|source| LoadError::Io { path: path.into(), source })?;
    Ok(serde_json::from_str(&text).map_err(syntax)?)
}

#[derive(Serialize)]
struct TranscriptLine<'a> {
    k: u64,
    p: &'a [Frac],
    a: usize,
}

/// Streams every oracle query as one JSON object per line. The first write
/// error is kept and returned by [`JsonlSink::finish`].
pub struct JsonlSink<W: Write> {
    out: W,
    error: Option<io::Error>,
}

impl<W: Write> JsonlSink<W> {
    pub fn new(out: W) -> Self {
        JsonlSink { out, error: None }
    }

    pub fn finish(mut self) -> io::Result<W> {
        if let Some(e) = self.error {
            return Err(e);
        }
        self.out.flush()?;
        Ok(self.out)
    }
}

impl<W: Write> TranscriptSink for JsonlSink<W> {
    fn record(&mut self, index: u64, strategy: &MixedStrategy, response: usize) {
        if self.error.is_some() {
            return;
        }
        let p: Vec<Frac> = strategy.probabilities().into_iter().map(Frac).collect();
        let line = TranscriptLine { k: index, p: &p, a: response };
        let result = serde_json::to_writer(&mut self.out, &line)
            .map_err(io::Error::other)
            .and_then(|()| self.out.write_all(b"\n"));
        self.error = result.err();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fractions_round_trip() {
        let f = Frac(Rational::ratio(3, 4));
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, "[3,4]");
        assert_eq!(serde_json::from_str::<Frac>(&text).unwrap(), f);
        assert_eq!(serde_json::from_str::<Frac>("[6,8]").unwrap(), f);
    }

    #[test]
    fn huge_integers_survive() {
        let text = "[1,340282366920938463463374607431768211456]";
        let f: Frac = serde_json::from_str(text).unwrap();
        assert_eq!(f.0, Rational::pow2(-128));
        assert_eq!(serde_json::to_string(&f).unwrap(), text);
    }

    #[test]
    fn bad_fractions() {
        assert!(serde_json::from_str::<Frac>("[1,0]").unwrap_err().to_string().contains("positive"));
        assert!(serde_json::from_str::<Frac>("[1,-2]").is_err());
        assert!(serde_json::from_str::<Frac>("[1.5,2]").is_err());
        assert!(serde_json::from_str::<Frac>("[1,2,3]").is_err());
        assert!(serde_json::from_str::<Frac>("[1]").is_err());
    }

    #[test]
    fn zero_denominator_reports_position() {
        let text = "{\"m\":1,\"n\":1,\n\"leader\":[[[1,0]]],\"follower\":[[[0,1]]]}";
        match parse_instance_str(text) {
            Err(LoadError::Parse(ParseError::Syntax { line, .. })) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn out_of_range_is_a_domain_error() {
        let text = r#"{"m":1,"n":1,"leader":[[[3,2]]],"follower":[[[0,1]]]}"#;
        match parse_instance_str(text) {
            Err(LoadError::Domain(d)) => {
                assert_eq!((d.matrix, d.row, d.col), ("leader", 0, 0));
                assert_eq!(d.value, Rational::ratio(3, 2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn shape_mismatch_names_the_field() {
        let text = r#"{"m":1,"n":2,"leader":[[[0,1],[1,1]]],"follower":[[[0,1]]]}"#;
        match parse_instance_str(text) {
            Err(LoadError::Parse(ParseError::Shape { field, expected: 2, found: 1 })) => {
                assert_eq!(field, "follower[0]")
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn report_match_flag() {
        let mut r = RunReport {
            seed: 1,
            zeta: Frac(Rational::ratio(1, 10)),
            mode: ModeName::Standard,
            m: 2,
            n: 1,
            payoff_bits: 2,
            queries: 3,
            value: Frac(Rational::one()),
            p_star: vec![Frac(Rational::one()), Frac(Rational::zero())],
            success: true,
            baseline_value: None,
            matches: None,
        };
        let text = serde_json::to_string(&r).unwrap();
        assert!(text.contains("\"L\":2") && !text.contains("match"));
        r.set_baseline(Rational::ratio(1, 2));
        assert_eq!(r.matches, Some(false));
        r.set_baseline(Rational::one());
        assert_eq!(r.matches, Some(true));
        let back: RunReport = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn transcript_lines() {
        let mut sink = JsonlSink::new(Vec::new());
        sink.record(0, &MixedStrategy::pure(2, 1), 3);
        let out = String::from_utf8(sink.finish().unwrap()).unwrap();
        assert_eq!(out, "{\"k\":0,\"p\":[[0,1],[1,1]],\"a\":3}\n");
    }
}

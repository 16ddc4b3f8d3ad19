//! Secondary-structure annotations and their sidecar text form
//! (`helix <start> <end>` / `strand <start> <end>`, 1-based inclusive).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SsKind {
    Helix,
    Strand,
}

impl fmt::Display for SsKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SsKind::Helix => "helix",
            SsKind::Strand => "strand",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsRange {
    /// 1-based, inclusive.
    pub start: usize,
    pub end: usize,
    pub kind: SsKind,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SsAnnotation {
    pub ranges: Vec<SsRange>,
}

impl SsAnnotation {
    pub fn new(mut ranges: Vec<SsRange>) -> Self {
        ranges.sort_by_key(|r| r.start);
        SsAnnotation { ranges }
    }

    /// The whole sequence of length `n` as one range.
    pub fn all(n: usize, kind: SsKind) -> Self {
        SsAnnotation {
            ranges: vec![SsRange {
                start: 1,
                end: n,
                kind,
            }],
        }
    }

    /// Checks the ranges are well formed, disjoint and inside `1..=n`.
    pub fn validate(&self, n: usize) -> Result<()> {
        let mut sorted = self.ranges.clone();
        sorted.sort_by_key(|r| r.start);
        for r in &sorted {
            if r.start == 0 || r.end < r.start || r.end > n {
                return Err(Error::InvalidInput(format!(
                    "{} {}..{} outside sequence of length {n}",
                    r.kind, r.start, r.end
                )));
            }
        }
        for w in sorted.windows(2) {
            if w[1].start <= w[0].end {
                return Err(Error::InvalidInput(format!(
                    "overlapping annotations {}..{} and {}..{}",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        Ok(())
    }

    /// Annotation covering every residue of the 0-based window `k..k+4`.
    pub fn window_kind(&self, k: usize) -> Option<SsKind> {
        let (first, last) = (k + 1, k + 4);
        self.ranges
            .iter()
            .find(|r| r.start <= first && last <= r.end)
            .map(|r| r.kind)
    }

    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let mut ranges = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::Format {
                path: path.to_string(),
                line: i + 1,
                msg: msg.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(err("expected `<helix|strand> <start> <end>`"));
            }
            let kind = match fields[0] {
                "helix" => SsKind::Helix,
                "strand" => SsKind::Strand,
                _ => return Err(err("unknown annotation kind")),
            };
            let start = fields[1].parse().map_err(|_| err("bad start index"))?;
            let end = fields[2].parse().map_err(|_| err("bad end index"))?;
            ranges.push(SsRange { start, end, kind });
        }
        Ok(SsAnnotation::new(ranges))
    }

    pub fn to_text(&self) -> String {
        self.ranges
            .iter()
            .map(|r| format!("{} {} {}\n", r.kind, r.start, r.end))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_round_trip() {
        let text = "# comment\nhelix 2 9\nstrand 12 15\n";
        let a = SsAnnotation::parse(text, "x").unwrap();
        assert_eq!(a.ranges.len(), 2);
        assert_eq!(SsAnnotation::parse(&a.to_text(), "x").unwrap(), a);
        a.validate(15).unwrap();
        assert!(a.validate(14).is_err());
    }

    #[test]
    fn overlap_rejected() {
        let a = SsAnnotation::parse("helix 1 5\nstrand 5 8\n", "x").unwrap();
        assert!(a.validate(10).is_err());
        assert!(SsAnnotation::parse("coil 1 2", "x").is_err());
    }

    #[test]
    fn window_membership() {
        let a = SsAnnotation::parse("helix 3 8\n", "x").unwrap();
        assert_eq!(a.window_kind(1), None);
        assert_eq!(a.window_kind(2), Some(SsKind::Helix));
        assert_eq!(a.window_kind(4), Some(SsKind::Helix));
        assert_eq!(a.window_kind(5), None);
    }
}

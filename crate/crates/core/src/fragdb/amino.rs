//! Residue alphabet and the 9-class torsional clustering of amino acids.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum AminoAcid {
    Ala,
    Arg,
    Asn,
    Asp,
    Cys,
    Gln,
    Glu,
    Gly,
    His,
    Ile,
    Leu,
    Lys,
    Met,
    Phe,
    Pro,
    Ser,
    Thr,
    Trp,
    Tyr,
    Val,
}

use AminoAcid::*;

impl AminoAcid {
    pub const ALL: [AminoAcid; 20] = [
        Ala, Arg, Asn, Asp, Cys, Gln, Glu, Gly, His, Ile, Leu, Lys, Met, Phe, Pro, Ser, Thr, Trp,
        Tyr, Val,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn three_letter(self) -> &'static str {
        const CODES: [&str; 20] = [
            "ALA", "ARG", "ASN", "ASP", "CYS", "GLN", "GLU", "GLY", "HIS", "ILE", "LEU", "LYS",
            "MET", "PHE", "PRO", "SER", "THR", "TRP", "TYR", "VAL",
        ];
        CODES[self.index()]
    }

    pub fn one_letter(self) -> char {
        b"ARNDCQEGHILKMFPSTWYV"[self.index()] as char
    }

    pub fn from_one_letter(c: char) -> Result<AminoAcid> {
        let up = c.to_ascii_uppercase();
        AminoAcid::ALL
            .into_iter()
            .find(|a| a.one_letter() == up)
            .ok_or_else(|| Error::UnknownResidue(c.to_string()))
    }

    /// Class of the amino acid in the 9-class torsional clustering.
    pub fn class(self) -> ClassCode {
        let c = match self {
            Ala => 0,
            Leu | Met => 1,
            Arg | Glu | Gln | Lys => 2,
            Asn | Asp | Ser => 3,
            Thr | Phe | His | Tyr => 4,
            Ile | Val | Trp => 5,
            Cys => 6,
            Gly => 7,
            Pro => 8,
        };
        ClassCode(c)
    }
}

impl fmt::Display for AminoAcid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.three_letter())
    }
}

impl FromStr for AminoAcid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        AminoAcid::ALL
            .into_iter()
            .find(|a| a.three_letter() == up)
            .ok_or_else(|| Error::UnknownResidue(s.trim().to_string()))
    }
}

/// Class of a standard residue; errors on anything outside the 20-letter set.
pub fn classify(code: &str) -> Result<ClassCode> {
    code.parse::<AminoAcid>().map(AminoAcid::class)
}

/// Parses a sequence given either as one-letter codes (`ACDE...`) or as
/// whitespace/dash separated three-letter codes (`ALA-CYS-ASP`).
pub fn parse_sequence(text: &str) -> Result<Vec<AminoAcid>> {
    let trimmed = text.trim();
    let tokens: Vec<&str> = trimmed
        .split(|c: char| c.is_whitespace() || c == '-' || c == ',')
        .filter(|t| !t.is_empty())
        .collect();
    if tokens.len() > 1
        || tokens
            .first()
            .is_some_and(|t| t.len() == 3 && t.parse::<AminoAcid>().is_ok())
    {
        if tokens.iter().all(|t| t.len() == 3) {
            return tokens.iter().map(|t| t.parse()).collect();
        }
    }
    trimmed
        .chars()
        .filter(|c| !c.is_whitespace())
        .map(AminoAcid::from_one_letter)
        .collect()
}

/// Class label of one residue position: 0..=8 for real classes, −1 for the
/// unknown-tuple fallback, −2 for α-helix and −3 for β-strand.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ClassCode(i8);

impl ClassCode {
    pub const UNKNOWN: ClassCode = ClassCode(-1);
    pub const HELIX: ClassCode = ClassCode(-2);
    pub const STRAND: ClassCode = ClassCode(-3);

    pub fn new(v: i8) -> Result<ClassCode> {
        if (-3..=8).contains(&v) {
            Ok(ClassCode(v))
        } else {
            Err(Error::InvalidInput(format!("class code {v} out of range")))
        }
    }

    pub fn value(self) -> i8 {
        self.0
    }

    pub fn is_real(self) -> bool {
        self.0 >= 0
    }

    /// Members γ⁻¹(c) of a real class; empty for the special codes.
    pub fn members(self) -> Vec<AminoAcid> {
        AminoAcid::ALL
            .into_iter()
            .filter(|a| a.class() == self)
            .collect()
    }
}

impl fmt::Display for ClassCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Class labels of a 4-residue window.
pub type ClassTuple = [ClassCode; 4];

pub fn class_tuple(residues: &[AminoAcid]) -> ClassTuple {
    [
        residues[0].class(),
        residues[1].class(),
        residues[2].class(),
        residues[3].class(),
    ]
}

pub fn homogeneous(code: ClassCode) -> ClassTuple {
    [code; 4]
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

macro_rules! pos_tags {
    ($($variant:ident => $tag:literal),* $(,)?) => {
        /// Penn Treebank part-of-speech tags (plus `HYPH`).
        #[allow(non_camel_case_types, clippy::upper_case_acronyms)]
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub enum PosTag {
            $($variant),*
        }

        impl PosTag {
            pub const ALL: &'static [PosTag] = &[$(PosTag::$variant),*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(PosTag::$variant => $tag),*
                }
            }
        }

        impl FromStr for PosTag {
            type Err = String;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                match s {
                    $($tag => Ok(PosTag::$variant),)*
                    _ => Err(s.to_string()),
                }
            }
        }
    };
}

pos_tags! {
    CC => "CC", CD => "CD", DT => "DT", EX => "EX", FW => "FW", IN => "IN",
    JJ => "JJ", JJR => "JJR", JJS => "JJS", LS => "LS", MD => "MD",
    NN => "NN", NNS => "NNS", NNP => "NNP", NNPS => "NNPS", PDT => "PDT",
    POS => "POS", PRP => "PRP", PRP_S => "PRP$", RB => "RB", RBR => "RBR",
    RBS => "RBS", RP => "RP", SYM => "SYM", TO => "TO", UH => "UH",
    VB => "VB", VBD => "VBD", VBG => "VBG", VBN => "VBN", VBP => "VBP",
    VBZ => "VBZ", WDT => "WDT", WP => "WP", WP_S => "WP$", WRB => "WRB",
    Hash => "#", Dollar => "$", OpenQuote => "``", CloseQuote => "''",
    Comma => ",", LeftParen => "-LRB-", RightParen => "-RRB-", Period => ".",
    Colon => ":", HYPH => "HYPH",
}

impl PosTag {
    /// Nouns in the broad sense used by noun similarity: common and proper
    /// nouns plus personal and possessive pronouns.
    pub fn is_noun(self) -> bool {
        matches!(
            self,
            PosTag::NN | PosTag::NNS | PosTag::NNP | PosTag::NNPS | PosTag::PRP | PosTag::PRP_S
        )
    }

    pub fn is_proper_noun(self) -> bool {
        matches!(self, PosTag::NNP | PosTag::NNPS)
    }

    pub fn is_pronoun(self) -> bool {
        matches!(self, PosTag::PRP | PosTag::PRP_S)
    }

    pub fn is_verb(self) -> bool {
        matches!(
            self,
            PosTag::VB | PosTag::VBD | PosTag::VBG | PosTag::VBN | PosTag::VBP | PosTag::VBZ
        )
    }

    /// Positive, comparative and superlative adjectives.
    pub fn is_adjective(self) -> bool {
        matches!(self, PosTag::JJ | PosTag::JJR | PosTag::JJS)
    }

    pub fn is_punctuation(self) -> bool {
        matches!(
            self,
            PosTag::Hash
                | PosTag::Dollar
                | PosTag::OpenQuote
                | PosTag::CloseQuote
                | PosTag::Comma
                | PosTag::LeftParen
                | PosTag::RightParen
                | PosTag::Period
                | PosTag::Colon
                | PosTag::HYPH
        )
    }
}

impl fmt::Display for PosTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for PosTag {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for PosTag {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse()
            .map_err(|s| serde::de::Error::custom(format!("unknown POS tag `{s}`")))
    }
}

/// Named entity types recognised by the toolkit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum NerTag {
    Person,
    Organization,
    Location,
    Money,
    Percent,
    Date,
    Time,
    None,
}

impl NerTag {
    pub const ENTITY_TYPES: [NerTag; 7] = [
        NerTag::Person,
        NerTag::Organization,
        NerTag::Location,
        NerTag::Money,
        NerTag::Percent,
        NerTag::Date,
        NerTag::Time,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NerTag::Person => "PERSON",
            NerTag::Organization => "ORGANIZATION",
            NerTag::Location => "LOCATION",
            NerTag::Money => "MONEY",
            NerTag::Percent => "PERCENT",
            NerTag::Date => "DATE",
            NerTag::Time => "TIME",
            NerTag::None => "NONE",
        }
    }

    pub fn is_entity(self) -> bool {
        self != NerTag::None
    }
}

impl fmt::Display for NerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NerTag {
    type Err = String;

    /// Accepts the seven entity names plus `NONE`, `O` and `_` for no entity.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(match s {
            "PERSON" => NerTag::Person,
            "ORGANIZATION" => NerTag::Organization,
            "LOCATION" => NerTag::Location,
            "MONEY" => NerTag::Money,
            "PERCENT" => NerTag::Percent,
            "DATE" => NerTag::Date,
            "TIME" => NerTag::Time,
            "NONE" | "O" | "_" => NerTag::None,
            _ => return Err(s.to_string()),
        })
    }
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::SigError;

/// The twelve target languages, in the column order of the reference results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum LanguageId {
    CSharp,
    Go,
    Java,
    JavaScript,
    Kotlin,
    Perl,
    PHP,
    Python,
    Ruby,
    Scala,
    Swift,
    TypeScript,
}

/// How a language delimits its documentation comments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommentStyle {
    /// `'''` ... `'''` placed after the signature.
    TripleQuote,
    /// `/** ... */` with star-led lines.
    StarBlock,
    /// A run of lines sharing a prefix such as `//`, `///` or `#`.
    LinePrefix(&'static str),
}

/// How parameter/return/example sections are marked inside a doc comment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TagStyle {
    /// `Args:` / `Returns:` / `Examples:` headed sections.
    Sections,
    /// `@param name text`, `@return text`, `@example`.
    AtTags {
        returns_tag: &'static str,
        sigil: &'static str,
    },
    /// `- Parameter name: text`, `- Returns: text`, `- Example:`.
    SwiftMarkup,
    /// `<summary>`, `<param name="...">`, `<returns>`, `<example>`.
    XmlDoc,
}

impl LanguageId {
    pub const ALL: [LanguageId; 12] = [
        LanguageId::CSharp,
        LanguageId::Go,
        LanguageId::Java,
        LanguageId::JavaScript,
        LanguageId::Kotlin,
        LanguageId::Perl,
        LanguageId::PHP,
        LanguageId::Python,
        LanguageId::Ruby,
        LanguageId::Scala,
        LanguageId::Swift,
        LanguageId::TypeScript,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LanguageId::CSharp => "CSharp",
            LanguageId::Go => "Go",
            LanguageId::Java => "Java",
            LanguageId::JavaScript => "JavaScript",
            LanguageId::Kotlin => "Kotlin",
            LanguageId::Perl => "Perl",
            LanguageId::PHP => "PHP",
            LanguageId::Python => "Python",
            LanguageId::Ruby => "Ruby",
            LanguageId::Scala => "Scala",
            LanguageId::Swift => "Swift",
            LanguageId::TypeScript => "TypeScript",
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            LanguageId::CSharp => "cs",
            LanguageId::Go => "go",
            LanguageId::Java => "java",
            LanguageId::JavaScript => "js",
            LanguageId::Kotlin => "kt",
            LanguageId::Perl => "pl",
            LanguageId::PHP => "php",
            LanguageId::Python => "py",
            LanguageId::Ruby => "rb",
            LanguageId::Scala => "scala",
            LanguageId::Swift => "swift",
            LanguageId::TypeScript => "ts",
        }
    }

    pub fn comment_style(self) -> CommentStyle {
        match self {
            LanguageId::Python => CommentStyle::TripleQuote,
            LanguageId::Java
            | LanguageId::JavaScript
            | LanguageId::TypeScript
            | LanguageId::Kotlin
            | LanguageId::Scala
            | LanguageId::PHP => CommentStyle::StarBlock,
            LanguageId::CSharp | LanguageId::Swift => CommentStyle::LinePrefix("///"),
            LanguageId::Go => CommentStyle::LinePrefix("//"),
            LanguageId::Ruby | LanguageId::Perl => CommentStyle::LinePrefix("#"),
        }
    }

    pub fn tag_style(self) -> TagStyle {
        match self {
            LanguageId::Python | LanguageId::Go | LanguageId::Perl => TagStyle::Sections,
            LanguageId::JavaScript | LanguageId::TypeScript => TagStyle::AtTags {
                returns_tag: "@returns",
                sigil: "",
            },
            LanguageId::PHP => TagStyle::AtTags {
                returns_tag: "@return",
                sigil: "$",
            },
            LanguageId::Java | LanguageId::Kotlin | LanguageId::Scala | LanguageId::Ruby => {
                TagStyle::AtTags {
                    returns_tag: "@return",
                    sigil: "",
                }
            }
            LanguageId::Swift => TagStyle::SwiftMarkup,
            LanguageId::CSharp => TagStyle::XmlDoc,
        }
    }

    /// Whether the docstring follows the signature (Python) rather than preceding it.
    pub fn docstring_after_signature(self) -> bool {
        self == LanguageId::Python
    }

    /// Languages whose surface syntax carries no parameter or return types at all.
    pub fn is_untyped(self) -> bool {
        matches!(
            self,
            LanguageId::JavaScript | LanguageId::Ruby | LanguageId::Perl
        )
    }
}

impl fmt::Display for LanguageId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for LanguageId {
    type Err = SigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        LanguageId::ALL
            .iter()
            .copied()
            .find(|l| l.name() == s)
            .ok_or_else(|| SigError::UnknownLanguage(s.to_string()))
    }
}

impl Serialize for LanguageId {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.name())
    }
}

impl<'de> Deserialize<'de> for LanguageId {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn names_round_trip() {
        for lang in LanguageId::ALL {
            assert_eq!(lang.name().parse::<LanguageId>().unwrap(), lang);
        }
    }

    #[test]
    fn membership_is_closed() {
        assert!("Rust".parse::<LanguageId>().is_err());
        assert!("python".parse::<LanguageId>().is_err());
        assert!("C#".parse::<LanguageId>().is_err());
    }

    #[test]
    fn extensions_are_distinct() {
        let exts: HashSet<_> = LanguageId::ALL.iter().map(|l| l.extension()).collect();
        assert_eq!(exts.len(), 12);
    }
}

//! Closed vocabularies that appear verbatim in documents and reports.

use std::fmt;

/// Returned when a word is not a member of a closed vocabulary.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownKeyword {
    pub vocabulary: &'static str,
    pub found: String,
}

impl fmt::Display for UnknownKeyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown {} `{}`", self.vocabulary, self.found)
    }
}

impl std::error::Error for UnknownKeyword {}

/// A fieldless enum whose members have one canonical spelling.
pub trait Keyword: Copy + Ord + Sized + 'static {
    const VOCABULARY: &'static str;
    const ALL: &'static [Self];

    fn as_str(self) -> &'static str;

    fn from_keyword(word: &str) -> Result<Self, UnknownKeyword> {
        Self::ALL
            .iter()
            .copied()
            .find(|k| k.as_str() == word)
            .ok_or_else(|| UnknownKeyword {
                vocabulary: Self::VOCABULARY,
                found: word.to_string(),
            })
    }

    /// Comma separated list of the accepted spellings, for error messages.
    fn expected() -> String {
        Self::ALL
            .iter()
            .map(|k| k.as_str())
            .collect::<Vec<_>>()
            .join(", ")
    }
}

macro_rules! keyword_enum {
    (
        $(#[$meta:meta])*
        $vis:vis enum $name:ident : $vocab:literal {
            $( $(#[$vmeta:meta])* $variant:ident => $text:literal ),+ $(,)?
        }
    ) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        $vis enum $name {
            $( $(#[$vmeta])* $variant ),+
        }

        impl $crate::keyword::Keyword for $name {
            const VOCABULARY: &'static str = $vocab;
            const ALL: &'static [Self] = &[ $( $name::$variant ),+ ];

            fn as_str(self) -> &'static str {
                match self {
                    $( $name::$variant => $text ),+
                }
            }
        }

        impl ::std::fmt::Display for $name {
            fn fmt(&self, f: &mut ::std::fmt::Formatter<'_>) -> ::std::fmt::Result {
                f.write_str($crate::keyword::Keyword::as_str(*self))
            }
        }

        impl ::std::str::FromStr for $name {
            type Err = $crate::keyword::UnknownKeyword;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$name as $crate::keyword::Keyword>::from_keyword(s)
            }
        }

        impl ::serde::Serialize for $name {
            fn serialize<S: ::serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
                serializer.serialize_str($crate::keyword::Keyword::as_str(*self))
            }
        }
    };
}

pub(crate) use keyword_enum;

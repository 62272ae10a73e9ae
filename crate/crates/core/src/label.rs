//! Binary spam labels and the `domain<TAB>label` file format shared by
//! ground-truth label files and detector verdict exports.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    NonSpam,
    Spam,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::NonSpam => "nonspam",
            Label::Spam => "spam",
        }
    }

    pub fn is_spam(self) -> bool {
        self == Label::Spam
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Label {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "spam" | "1" => Ok(Label::Spam),
            "nonspam" | "non-spam" | "0" => Ok(Label::NonSpam),
            other => Err(Error::invalid(format!("unknown label {other:?}"))),
        }
    }
}

/// Reads `domain<TAB>label` lines. `#` comments and blank lines are skipped.
pub fn read_labels<R: BufRead>(reader: R) -> Result<BTreeMap<String, Label>> {
    let mut out = BTreeMap::new();
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = idx + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: lineno,
                message: format!("expected 2 tab-separated fields, found {}", fields.len()),
            });
        }
        let label = fields[1].parse::<Label>().map_err(|e| Error::Parse {
            line: lineno,
            message: e.to_string(),
        })?;
        out.insert(fields[0].to_string(), label);
    }
    Ok(out)
}

pub fn write_labels<'a, W, I>(mut w: W, labels: I) -> std::io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (&'a str, Label)>,
{
    for (domain, label) in labels {
        writeln!(w, "{domain}\t{label}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_both_spellings() {
        assert_eq!("spam".parse::<Label>().unwrap(), Label::Spam);
        assert_eq!("nonspam".parse::<Label>().unwrap(), Label::NonSpam);
        assert_eq!("Non-Spam".parse::<Label>().unwrap(), Label::NonSpam);
        assert!("maybe".parse::<Label>().is_err());
    }

    #[test]
    fn label_file_roundtrip() {
        let text = "# truth\na.com\tspam\n\nb.org\tnonspam\n";
        let labels = read_labels(text.as_bytes()).unwrap();
        assert_eq!(labels.len(), 2);
        let mut buf = Vec::new();
        write_labels(&mut buf, labels.iter().map(|(d, l)| (d.as_str(), *l))).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a.com\tspam\nb.org\tnonspam\n");
    }

    #[test]
    fn bad_label_names_line() {
        let err = read_labels("a\tspam\nb\tmaybe\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }));
    }
}

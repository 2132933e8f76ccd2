use std::collections::BTreeSet;

use thiserror::Error;

use super::DescriptorSet;

/// One named descriptor document (usually a file).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub name: String,
    pub text: String,
}

impl Document {
    pub fn new(name: impl Into<String>, text: impl Into<String>) -> Self {
        Self { name: name.into(), text: text.into() }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("{document}:{line}: {message}")]
    Syntax { document: String, line: usize, message: String },
    #[error("duplicate descriptor id `{0}`")]
    DuplicateId(String),
}

/// Parses and merges descriptor documents, in order. Cross references are
/// not resolved here.
pub fn parse_descriptor_set(documents: &[Document]) -> Result<DescriptorSet, ParseError> {
    let mut set = DescriptorSet::default();
    for doc in documents {
        let part: DescriptorSet = toml::from_str(&doc.text).map_err(|e| ParseError::Syntax {
            document: doc.name.clone(),
            line: e.span().map_or(1, |span| line_of(&doc.text, span.start)),
            message: e.message().to_string(),
        })?;
        set.ran_nsst.extend(part.ran_nsst);
        set.gnb_nsd.extend(part.gnb_nsd);
        set.vnfd.extend(part.vnfd);
        set.pnfd.extend(part.pnfd);
        set.aux_nsd.extend(part.aux_nsd);
    }

    let mut seen = BTreeSet::new();
    let ids = set
        .ran_nsst
        .iter()
        .map(|d| &d.id)
        .chain(set.gnb_nsd.iter().map(|d| &d.id))
        .chain(set.vnfd.iter().map(|d| &d.id))
        .chain(set.pnfd.iter().map(|d| &d.id))
        .chain(set.aux_nsd.iter().map(|d| &d.id));
    for id in ids {
        if !seen.insert(id.as_str()) {
            return Err(ParseError::DuplicateId(id.clone()));
        }
    }
    Ok(set)
}

/// Canonical single-document form of a descriptor set.
pub fn serialize_descriptor_set(set: &DescriptorSet) -> String {
    toml::to_string(set).expect("descriptor set is always representable as TOML")
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

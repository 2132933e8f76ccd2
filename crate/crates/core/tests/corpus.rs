use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;

use ranslice_core::descriptor::{parse_descriptor_set, validate, Document, ParseError};

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/corpus")
}

/// Outcome named in a file's `# expect:` header.
fn expected(text: &str) -> BTreeSet<String> {
    let header = text.lines().next().and_then(|l| l.strip_prefix("# expect:")).expect("expect header");
    header.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty() && s != "clean").collect()
}

fn outcome(name: &str, text: &str) -> BTreeSet<String> {
    match parse_descriptor_set(&[Document::new(name, text)]) {
        Ok(ds) => validate(&ds).kinds().into_iter().map(|k| format!("{k:?}")).collect(),
        Err(ParseError::Syntax { .. }) => ["syntax".to_string()].into(),
        Err(ParseError::DuplicateId(_)) => ["duplicate-id".to_string()].into(),
    }
}

#[test]
fn every_corpus_file_yields_its_expected_findings() {
    let mut files: Vec<_> = fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "toml"))
        .collect();
    files.sort();
    assert!(files.len() >= 20, "corpus has {} files", files.len());
    for path in files {
        let text = fs::read_to_string(&path).unwrap();
        let name = path.file_name().unwrap().to_string_lossy().to_string();
        assert_eq!(outcome(&name, &text), expected(&text), "{name}");
    }
}

#[test]
fn shipped_data_sets_are_clean() {
    let data = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    for set in ["single-slice", "two-slice-s4", "three-slice-s4"] {
        let text = fs::read_to_string(data.join(set).join("descriptors.toml")).unwrap();
        let ds = parse_descriptor_set(&[Document::new(set, text)]).unwrap();
        assert!(validate(&ds).is_clean(), "{set}: {:?}", validate(&ds).findings);
    }
}

use boxology::corpus::CORPUS;
use boxology::parser::{format, parse};
use boxology::{builtin_taxonomy, Document};
use boxology_testkit::{random_document, random_resolvable_document, rng};
use proptest::prelude::*;

fn generated(seed: u64) -> Document {
    random_document(&mut rng(seed), builtin_taxonomy(), 10)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn parse_inverts_format(seed in any::<u64>()) {
        let doc = generated(seed);
        let text = format(&doc);
        let back = parse(&text).map_err(|d| TestCaseError::fail(format!("{d:?}\n{text}")))?;
        prop_assert_eq!(back.to_canonical_json(), doc.to_canonical_json());
    }

    #[test]
    fn format_is_idempotent(seed in any::<u64>()) {
        let once = format(&generated(seed));
        let twice = format(&parse(&once).unwrap());
        prop_assert_eq!(once, twice);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let doc = random_resolvable_document(&mut rng(seed), builtin_taxonomy(), 10);
        let json = doc.to_canonical_json();
        let back = Document::from_json(&json).unwrap();
        prop_assert_eq!(&back, &doc);
        prop_assert_eq!(back.to_canonical_json(), json);
    }
}

#[test]
fn corpus_files_are_canonically_formatted() {
    for f in &CORPUS {
        let doc = parse(f.source).unwrap();
        assert_eq!(format(&doc), f.source, "{}", f.file_name);
    }
}

#[test]
fn corpus_json_round_trip() {
    for f in &CORPUS {
        let doc = parse(f.source).unwrap();
        let back = Document::from_json(&doc.to_canonical_json()).unwrap();
        assert_eq!(back.to_canonical_json(), doc.to_canonical_json());
        assert_eq!(format(&back), f.source);
    }
}

#[test]
fn crlf_input_formats_to_lf() {
    let crlf = CORPUS[0].source.replace('\n', "\r\n");
    assert_eq!(format(&parse(&crlf).unwrap()), CORPUS[0].source);
}

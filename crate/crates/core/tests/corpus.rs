mod common;

use classmaxent::corpus::{
    build_vocabulary, extract_events, extract_events_unmerged, merge_events, tokenize, total_count, RawCorpus,
    Vocabulary, RESERVED, UNKNOWN,
};
use common::*;
use proptest::prelude::*;

#[test]
fn keeps_exactly_the_requested_number_of_content_words() {
    // u0 twice, every other word once, so the cut is by first occurrence
    let mut words: Vec<String> = (0..70_000).map(|i| format!("u{i}")).collect();
    words.push("u0".into());
    let corpus = RawCorpus { sentences: words.chunks(25).map(|c| c.to_vec()).collect() };
    let vocab = build_vocabulary(&corpus, 60_000).unwrap();
    assert_eq!(vocab.content_len(), 60_000);
    assert_eq!(vocab.len(), 60_003);
    assert_eq!(vocab.id("u0"), Some(3));
    assert_eq!(vocab.id("u59999"), Some(60_002));
    assert_eq!(vocab.id("u60000"), None);
    assert_eq!(vocab.id_or_unknown("u69999"), UNKNOWN);
}

#[test]
fn vocabulary_file_round_trips() {
    let corpus = toy_corpus();
    let vocab = build_vocabulary(&corpus, 40).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("vocab.txt");
    vocab.save(&p).unwrap();
    let text = std::fs::read_to_string(&p).unwrap();
    let first: Vec<&str> = text.lines().take(3).collect();
    assert_eq!(first, RESERVED);
    assert_eq!(Vocabulary::load(&p).unwrap(), vocab);
}

#[test]
fn rejects_invalid_utf8_with_the_line_number() {
    let bytes: &[u8] = b"fine line\nbad \xff byte\n";
    let err = RawCorpus::from_reader(bytes, false).unwrap_err();
    assert!(err.to_string().contains('2'), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn event_mass_equals_token_count(text in "([a-e]{1,2}( [a-e]{1,2}){0,8}\n){1,12}", max in 1usize..10) {
        let corpus = RawCorpus::parse(&text, false);
        let vocab = build_vocabulary(&corpus, max).unwrap();
        prop_assert!(vocab.content_len() <= max);
        let stream = tokenize(&corpus, &vocab);
        let events = extract_events(&stream);
        prop_assert_eq!(total_count(&events), corpus.token_count() as u64);
        let unmerged = extract_events_unmerged(&stream);
        prop_assert_eq!(unmerged.len(), corpus.token_count());
        prop_assert_eq!(merge_events(unmerged), events);
    }
}

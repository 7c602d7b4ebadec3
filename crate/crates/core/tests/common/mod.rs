#![allow(dead_code)]

pub mod oracles;
pub mod props;

use std::io::Cursor;

use prelink::candidates::CandidateIndex;
use prelink::corpus::CorpusStore;
use prelink::forest::{bootstrap_training_set, train_forest, ForestParams};
use prelink::synth::{gen_synthetic_corpus, PerturbationProfile, SyntheticCorpus};
use prelink::ForestModel;

pub fn store_from(corpus: &SyntheticCorpus) -> CorpusStore {
    let files = corpus.to_files();
    let mut store = CorpusStore::new();
    let r = store.ingest_published_from(Cursor::new(files[1].1.as_bytes())).unwrap();
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    let r = store.ingest_preprints_from(Cursor::new(files[0].1.as_bytes())).unwrap();
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    store
}

pub fn synthetic(n: usize, seed: u64) -> (CorpusStore, SyntheticCorpus) {
    let corpus = gen_synthetic_corpus(n, &PerturbationProfile::default(), seed).unwrap();
    (store_from(&corpus), corpus)
}

pub fn trained(store: &CorpusStore, index: &CandidateIndex, seed: u64) -> ForestModel {
    let data = bootstrap_training_set::<f64>(store, index, 3, seed).unwrap();
    train_forest(
        &data,
        &ForestParams {
            seed,
            ..ForestParams::default()
        },
    )
    .unwrap()
}

pub fn published_line(acc: &str, title: &str, authors: &[&str]) -> String {
    serde_json::json!({
        "accession": acc, "title": title, "authors": authors, "abstract": null,
        "doi": null, "source": "S", "document_type": "journal_article", "msc": []
    })
    .to_string()
}

pub fn preprint_line(id: &str, title: &str, authors: &[&str], categories: &[&str]) -> String {
    serde_json::json!({
        "id": id, "version": 1, "title": title, "authors": authors, "abstract": "",
        "categories": categories, "msc": [], "doi": null, "withdrawn": false
    })
    .to_string()
}

pub fn store_of(published: &[String], preprints: &[String]) -> CorpusStore {
    let mut store = CorpusStore::new();
    let r = store.ingest_published_from(Cursor::new(published.join("\n"))).unwrap();
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    let r = store.ingest_preprints_from(Cursor::new(preprints.join("\n"))).unwrap();
    assert!(r.errors.is_empty(), "{:?}", r.errors);
    store
}

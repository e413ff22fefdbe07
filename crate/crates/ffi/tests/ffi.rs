use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use bien::corpus::{parse_tagged_document, Abbreviations, Document, FieldSet, ParseOptions};
use bien::eval::ExperimentConfig;
use bien::features::{FeatureMask, LexiconSet};
use bien::learning::TrainConfig;
use bien::pipeline::{save_bundle, Extractor};
use bien_ffi::*;

const SPEAKERS: &[&str] = &["Dr. Joe Steals", "Prof. Mary Shaw", "John Smith", "Dr. Alice Walker"];
const PLACES: &[&str] = &["Wean Hall 5409", "Baker Hall A51", "Porter Hall 125C"];
const TIMES: &[(&str, &str)] = &[("3:30 PM", "5:00 PM"), ("10:00 am", "11:30 am"), ("4 pm", "5 pm")];

fn documents() -> Vec<Document> {
    let fields = FieldSet::default();
    let abbreviations = Abbreviations::builtin();
    let opts = ParseOptions {
        fields: &fields,
        abbreviations: &abbreviations,
        strict: true,
    };
    (0..24)
        .map(|i| {
            let (st, et) = TIMES[i % TIMES.len()];
            let text = format!(
                "Time:     <stime>{st}</stime> - <etime>{et}</etime>\nPlace:    <location>{}</location>\n\n\
                 <speaker>{}</speaker> will give a talk.\n",
                PLACES[i % PLACES.len()],
                SPEAKERS[i % SPEAKERS.len()],
            );
            parse_tagged_document(&format!("d{i:02}"), &text, &opts).unwrap().document
        })
        .collect()
}

fn trained_dir() -> tempfile::TempDir {
    let cfg = ExperimentConfig {
        train: TrainConfig {
            max_iterations: 5,
            ..TrainConfig::default()
        },
        mask: FeatureMask::parse("no-pos,no-chunk").unwrap(),
        ..ExperimentConfig::default()
    };
    let corpus = documents();
    let docs: Vec<_> = corpus.iter().collect();
    let trained = cfg.fit(&docs).unwrap();
    let dir = tempfile::tempdir().unwrap();
    save_bundle(dir.path(), &trained.model, &trained.gazetteer).unwrap();
    dir
}

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(bien_last_error_message()) }.to_str().unwrap().to_string()
}

fn load(dir: &Path) -> *mut BienExtractor {
    let mut h = ptr::null_mut();
    let path = c(dir.to_str().unwrap());
    assert_eq!(unsafe { bien_extractor_load(path.as_ptr(), ptr::null(), &mut h) }, BienStatus::Ok);
    assert!(!h.is_null());
    h
}

const INPUT: &str = "Time:     4 pm - 5 pm\nPlace:    Wean Hall 5409\n\nDr. Alice Walker will give a talk. ✓\n";

#[test]
fn matches_the_rust_extractor() {
    let dir = trained_dir();
    let rust = Extractor::load(dir.path(), LexiconSet::builtin()).unwrap();
    let h = load(dir.path());
    let input = c(INPUT);
    unsafe {
        let mut out = ptr::null_mut();
        assert_eq!(bien_tag_text(h, input.as_ptr(), &mut out), BienStatus::Ok);
        assert_eq!(CStr::from_ptr(out).to_str().unwrap(), rust.tag_text(INPUT).unwrap());
        bien_string_free(out);

        let mut slots = ptr::null_mut();
        let mut len = 0;
        assert_eq!(bien_extract(h, input.as_ptr(), &mut slots, &mut len), BienStatus::Ok);
        let expected = rust.locate(INPUT).unwrap();
        assert!(!expected.is_empty());
        assert_eq!(len, expected.len());
        for (got, want) in std::slice::from_raw_parts(slots, len).iter().zip(&expected) {
            assert_eq!(got.field as usize, want.field);
            assert_eq!((got.start, got.end), (want.start, want.end));
            assert_eq!(CStr::from_ptr(got.text).to_str().unwrap(), want.text);
        }
        bien_slots_free(slots, len);

        let mut n = 0;
        assert_eq!(bien_field_count(h, &mut n), BienStatus::Ok);
        assert_eq!(n, 4);
        let mut name = ptr::null_mut();
        assert_eq!(bien_field_name(h, 1, &mut name), BienStatus::Ok);
        assert_eq!(CStr::from_ptr(name).to_str().unwrap(), rust.fields().name(1));
        bien_string_free(name);
        assert_eq!(bien_field_name(h, 9, &mut name), BienStatus::Data);

        let mut report = ptr::null_mut();
        assert_eq!(bien_cpt_report(h, &mut report), BienStatus::Ok);
        assert_eq!(
            CStr::from_ptr(report).to_str().unwrap(),
            bien::eval::report_cpt(rust.model()).to_string()
        );
        bien_string_free(report);
        bien_extractor_free(h);
    }
}

#[test]
fn empty_text_gives_no_slots() {
    let dir = trained_dir();
    let h = load(dir.path());
    let empty = c("");
    unsafe {
        let mut slots = ptr::null_mut();
        let mut len = 7;
        assert_eq!(bien_extract(h, empty.as_ptr(), &mut slots, &mut len), BienStatus::Ok);
        assert!(slots.is_null());
        assert_eq!(len, 0);
        bien_slots_free(slots, len);
        bien_extractor_free(h);
    }
}

#[test]
fn errors_report_status_and_message() {
    unsafe {
        let mut h = ptr::null_mut();
        let missing = c("/nonexistent/bien-model");
        assert_eq!(bien_extractor_load(missing.as_ptr(), ptr::null(), &mut h), BienStatus::Io);
        assert!(h.is_null());
        assert!(last_error().contains("/nonexistent/bien-model"), "{}", last_error());

        assert_eq!(bien_extractor_load(ptr::null(), ptr::null(), &mut h), BienStatus::NullArgument);
        assert!(last_error().contains("model_dir"));
        assert_eq!(bien_tag_text(ptr::null(), ptr::null(), ptr::null_mut()), BienStatus::NullArgument);

        let dir = trained_dir();
        let h = load(dir.path());
        assert!(last_error().is_empty());
        let bad = [0xffu8, 0xfe, 0];
        let mut out = ptr::null_mut();
        assert_eq!(bien_tag_text(h, bad.as_ptr().cast(), &mut out), BienStatus::InvalidUtf8);
        assert!(out.is_null());
        bien_extractor_free(h);

        // a damaged model file is a data error
        let model = dir.path().join("model.bien");
        let text = std::fs::read_to_string(&model).unwrap();
        std::fs::write(&model, text.replacen("0.", "1.", 1)).unwrap();
        let path = c(dir.path().to_str().unwrap());
        let mut h = ptr::null_mut();
        assert_eq!(bien_extractor_load(path.as_ptr(), ptr::null(), &mut h), BienStatus::Data);
        assert!(h.is_null());
    }
}

fn header() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = Command::new("cc").arg("--version").output() else {
        eprintln!("no C compiler, skipping");
        return;
    };
    assert!(cc.status.success());
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("use.c");
    std::fs::write(
        &src,
        r#"#include "bien.h"
int main(void) {
    BienExtractor *h = 0;
    BienStatus s = bien_extractor_load("/nonexistent", 0, &h);
    BienSlot *slots = 0;
    size_t n = 0;
    if (s == BIEN_STATUS_OK) {
        bien_extract(h, "Time: 4 pm", &slots, &n);
        bien_slots_free(slots, n);
        bien_extractor_free(h);
    }
    return s == BIEN_STATUS_IO && bien_last_error_message()[0] != 0 ? 0 : 1;
}
"#,
    )
    .unwrap();
    let status = Command::new("cc")
        .args(["-std=c99", "-Wall", "-Werror", "-fsyntax-only", "-I"])
        .arg(header())
        .arg(&src)
        .status()
        .unwrap();
    assert!(status.success());
}

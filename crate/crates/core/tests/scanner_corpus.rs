use std::path::Path;

use lichain::ingestion::{bundled_signatures, match_signatures, scan_invocations, Resolution};

#[derive(Debug, PartialEq)]
enum Expect {
    Ids(Vec<Resolution>),
    NoMatch,
}

fn expectation(source: &str) -> Expect {
    let header = source
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# expect:"))
        .expect("expect header");
    let mut ids = Vec::new();
    for tok in header.split_whitespace() {
        match tok {
            "none" => {}
            "nomatch" => return Expect::NoMatch,
            "U" => ids.push(Resolution::Unresolved),
            t if t.starts_with("L:") => ids.push(Resolution::Literal(t[2..].into())),
            t if t.starts_with("P:") => ids.push(Resolution::PropagatedConstant(t[2..].into())),
            t => panic!("bad token {t}"),
        }
    }
    Expect::Ids(ids)
}

#[test]
fn corpus_matches_expectations() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/scanner");
    let sigs = bundled_signatures();
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    files.sort();
    assert!(files.len() >= 20);
    for path in files {
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let source = std::fs::read_to_string(&path).unwrap();
        let libs = match_signatures(&source, &sigs).unwrap();
        match expectation(&source) {
            Expect::NoMatch => assert!(libs.is_empty(), "{name}: {libs:?}"),
            Expect::Ids(want) => {
                assert!(!libs.is_empty(), "{name}: no library matched");
                let got: Vec<Resolution> = scan_invocations(&name, &source, &sigs)
                    .unwrap()
                    .into_iter()
                    .map(|f| f.resolution)
                    .collect();
                assert_eq!(got, want, "{name}");
            }
        }
    }
}

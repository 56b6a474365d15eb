"""Smoke test for the lichain Python bindings.

Build and install first:  pip install --no-build-isolation -e crates/py
Then run:                 python python/smoke_test.py
"""

import lichain_py as lc


def main() -> None:
    assert lc.attitude_compatible("can", "cannot")
    assert not lc.attitude_compatible("cannot", "can")
    assert len(lc.term_ids()) == 23

    mit = lc.bundled_profile("MIT")
    apache = lc.bundled_profile("Apache-2.0")
    assert mit.license_id == "MIT"
    conflicts = lc.check_pair(mit, apache)
    assert conflicts, "MIT code on an Apache-2.0 dependency should conflict"
    print("MIT -> Apache-2.0 conflicts:", sorted(c["term"] for c in conflicts))

    match = lc.match_template(lc.bundled_text("MIT"))
    assert match == {"license_id": "MIT", "kind": "exact"}, match
    assert lc.match_template("")["kind"] == "not_found"

    rules = lc.extract_rules("You may distribute the Software. You must not use the trademarks.", "x")
    assert rules.attitudes()["Distribute"] == "can", rules.attitudes()

    findings = lc.scan_source('from transformers import AutoModel\nAutoModel.from_pretrained("gpt2")\n')
    assert findings[0]["identifier"] == "gpt2", findings

    records = "\n".join(
        [
            '{"type":"artifact","id":"repo","kind":"oss_repo","license_id":"MIT"}',
            '{"type":"artifact","id":"model","kind":"llm","license_id":"Apache-2.0"}',
            '{"type":"edge","from":"repo","to":"model","kind":"uses_model"}',
        ]
    )
    report = lc.check_graph(records)
    assert report["totals"]["edges_conflicted"] == 1
    assert len(lc.enumerate_chains(records)["chains"]) == 1

    mutants = lc.generate_mutants("MIT")
    assert len(mutants) == 2 * len(mit.declared_terms())
    mutant_id, _text, profile = mutants[0]
    assert "--mut-" in mutant_id
    scores = lc.score_extraction(profile, mit)
    assert scores["precision"] < 1.0

    stats = lc.chi_square_test([[20, 0], [0, 20]])
    assert abs(stats["chi_square"] - 40.0) < 1e-9 and abs(stats["cramers_v"] - 1.0) < 1e-9

    print("python bindings ok:", len(lc.bundled_license_ids()), "bundled licenses")


if __name__ == "__main__":
    main()

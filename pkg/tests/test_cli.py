"""Code book files and the command-line interface."""

from __future__ import annotations

import json

import pytest

from wordcodes.cli import main
from wordcodes.errors import InputError, ValidationError
from wordcodes.serialization import (
    FORMAT_TAG,
    book_from_json,
    book_to_json,
    load_book,
    save_book,
)

REFERENCE_ARGS = ["--probs", "0.4,0.6"]
REFERENCE_M1 = "a,baa,bab,bba,bbb"
REFERENCE_M2 = "ab,ba,bbb,bba,aab,aaa"


def test_book_json_round_trip_is_byte_identical(reference_book, vf3_book):
    for book in (reference_book, vf3_book):
        text = book_to_json(book)
        loaded = book_from_json(text)
        assert book_to_json(loaded) == text
        assert loaded.kind == book.kind
        assert [e.word for e in loaded.entries] == [
            e.word for e in book.entries
        ]
        assert [e.codeword for e in loaded.entries] == [
            e.codeword for e in book.entries
        ]


def test_book_json_rejects_malformed_input(reference_book):
    with pytest.raises(InputError):
        book_from_json("this is not json")
    with pytest.raises(InputError):
        book_from_json(json.dumps({"format": "something-else"}))
    payload = json.loads(book_to_json(reference_book))
    del payload["words"]
    with pytest.raises(InputError):
        book_from_json(json.dumps(payload))


def test_book_json_validates_the_reloaded_code(reference_book):
    payload = json.loads(book_to_json(reference_book))
    assert payload["format"] == FORMAT_TAG
    payload["words"][0]["codeword"] = payload["words"][1]["codeword"]
    with pytest.raises(ValidationError):
        book_from_json(json.dumps(payload))


def test_save_and_load_round_trip(tmp_path, vf3_book):
    path = tmp_path / "book.json"
    save_book(vf3_book, str(path))
    loaded = load_book(str(path))
    assert book_to_json(loaded) == book_to_json(vf3_book)


def test_cli_construct_vv_explicit_sets(tmp_path, capsys):
    out = tmp_path / "vv.json"
    code = main(
        ["construct-vv", *REFERENCE_ARGS, "--m1", REFERENCE_M1,
         "--m2", REFERENCE_M2, "--out", str(out)]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "kind=vv path=extended" in printed
    assert "words=4" in printed
    assert "N̄=1.96" in printed
    assert "R=0.0290" in printed
    assert f"saved={out}" in printed
    book = load_book(str(out))
    words = sorted(book.model.word_to_text(e.word) for e in book.entries)
    assert words == ["a", "ba", "bba", "bbb"]


def test_cli_construct_vf_reports_mode_and_metrics(tmp_path, capsys):
    out = tmp_path / "vf.json"
    code = main(["construct-vf", *REFERENCE_ARGS, "--L", "3", "--out", str(out)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "kind=vf mode=window L=3" in printed
    assert "N̄=2.36" in printed
    assert "delta=0.375" in printed
    assert load_book(str(out)).kind == "vf"


def test_cli_encode_decode_round_trip(tmp_path, capsys):
    book_path = tmp_path / "vf.json"
    assert main(["construct-vf", *REFERENCE_ARGS, "--L", "3",
                 "--out", str(book_path)]) == 0
    message = tmp_path / "message.txt"
    message.write_text("ab\nbab\n", encoding="utf-8")
    digits = tmp_path / "digits.txt"
    assert main(["encode", "--book", str(book_path), "--in", str(message),
                 "--out", str(digits)]) == 0
    assert digits.read_text(encoding="utf-8") == "000001010\n#pad=2\n"
    decoded = tmp_path / "decoded.txt"
    assert main(["decode", "--book", str(book_path), "--in", str(digits),
                 "--out", str(decoded)]) == 0
    assert decoded.read_text(encoding="utf-8") == "abbab\n"
    capsys.readouterr()


def test_cli_decode_skips_comment_lines(tmp_path, capsys):
    book_path = tmp_path / "vf.json"
    assert main(["construct-vf", *REFERENCE_ARGS, "--L", "3",
                 "--out", str(book_path)]) == 0
    digits = tmp_path / "digits.txt"
    digits.write_text("# produced by hand\n000\n001\n", encoding="utf-8")
    out = tmp_path / "decoded.txt"
    assert main(["decode", "--book", str(book_path), "--in", str(digits),
                 "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8") == "abba\n"
    capsys.readouterr()


def test_cli_encode_no_pad_fails_inside_a_word(tmp_path, capsys):
    book_path = tmp_path / "vf.json"
    assert main(["construct-vf", *REFERENCE_ARGS, "--L", "3",
                 "--out", str(book_path)]) == 0
    message = tmp_path / "message.txt"
    message.write_text("b\n", encoding="utf-8")
    code = main(["encode", "--book", str(book_path), "--in", str(message),
                 "--no-pad"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_analyze_prints_metric_tokens(tmp_path, capsys):
    book_path = tmp_path / "vf.json"
    assert main(["construct-vf", *REFERENCE_ARGS, "--L", "3",
                 "--out", str(book_path)]) == 0
    capsys.readouterr()
    assert main(["analyze", "--book", str(book_path)]) == 0
    printed = capsys.readouterr().out
    for token in ("kind=vf", "words=5", "N̄=2.36", "N=3", "R=0.3002",
                  "delta=0.375", "lower=", "upper=", "identity_residual="):
        assert token in printed


def test_cli_scaling_writes_csv(tmp_path, capsys):
    csv_path = tmp_path / "scaling.csv"
    code = main(["experiment", "scaling", *REFERENCE_ARGS,
                 "--t-list", "1,3,4", "--csv", str(csv_path)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "slope=n/a" in printed
    lines = csv_path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == (
        "T,T2,avg_delay,max_delay,redundancy,r_times_nbar_5_3,r_times_nbar"
    )
    assert len(lines) == 4
    assert lines[1].startswith("1,")


def test_cli_sync_writes_json_summary(tmp_path, capsys):
    book_path = tmp_path / "vf.json"
    assert main(["construct-vf", *REFERENCE_ARGS, "--L", "3",
                 "--out", str(book_path)]) == 0
    json_path = tmp_path / "sync.json"
    code = main(["experiment", "sync", "--book", str(book_path),
                 "--trials", "50", "--message-len", "100", "--seed", "1",
                 "--json", str(json_path)])
    assert code == 0
    printed = capsys.readouterr().out
    assert "single_word_fraction=1.0000" in printed
    payload = json.loads(json_path.read_text(encoding="utf-8"))
    assert payload["kind"] == "vf"
    assert payload["trials"] == 50
    assert payload["single_word_fraction"] == 1.0
    assert payload["histogram"] == {"1": 50}


def test_cli_block_list_pairs(capsys):
    code = main(["construct-block", "--input-size", "3", "--list-pairs", "3"])
    assert code == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines == [
        "X=1 L=2 r_bound=1",
        "X=5 L=8 r_bound=0.04",
        "X=41 L=65 r_bound=0.000594884",
    ]


def test_cli_exit_codes(tmp_path, capsys):
    # malformed input values
    assert main(["construct-vv", "--probs", "0.4,0.5"]) == 2
    # well-formed but unsatisfiable requests
    assert main(["construct-vf", "--probs", "0.2,0.3,0.5", "--L", "1"]) == 3
    assert main(["construct-block", "--input-size", "3",
                 "--X", "41", "--L", "65"]) == 3
    # file problems
    assert main(["analyze", "--book", str(tmp_path / "missing.json")]) == 4
    garbage = tmp_path / "garbage.json"
    garbage.write_text("junk\n", encoding="utf-8")
    assert main(["analyze", "--book", str(garbage)]) == 2
    capsys.readouterr()


def test_cli_metrics_grade_has_no_book_to_save(tmp_path, capsys):
    out = tmp_path / "never.json"
    code = main(["construct-vv", *REFERENCE_ARGS, "--T", "19",
                 "--grade", "metrics", "--out", str(out)])
    assert code == 2
    assert not out.exists()
    capsys.readouterr()

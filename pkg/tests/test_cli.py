import subprocess
import sys
from importlib import resources
from pathlib import Path

import pytest

from smtkit import pipeline
from smtkit.cli import main

DATA = resources.files("smtkit") / "data"

# toy corpora are far too small for estimated discounts
pytestmark = pytest.mark.filterwarnings("ignore::smtkit.lm.DiscountFallbackWarning")


def write(path, lines):
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return str(path)


def lines(path):
    return Path(path).read_text(encoding="utf-8").splitlines()


@pytest.fixture
def parallel(tmp_path):
    src = write(tmp_path / "p.src", ["the house", "the book", "a book", "a house", "the big house"])
    tgt = write(tmp_path / "p.tgt", ["das haus", "das buch", "ein buch", "ein haus", "das grosse haus"])
    return src, tgt


# -- exit codes ---------------------------------------------------------------------------


def test_usage_error_exits_1():
    proc = subprocess.run([sys.executable, "-m", "smtkit", "no-such-command"], capture_output=True, text=True)
    assert proc.returncode == 1 and "usage" in proc.stderr
    with pytest.raises(SystemExit) as err:
        main(["evaluate", "only-one-arg"])
    assert err.value.code == 1
    with pytest.raises(SystemExit) as err:
        main(["--order", "0", "lm-train", "a", "b"])
    assert err.value.code == 1


def test_config_error_exits_1(tmp_path):
    cfg = write(tmp_path / "c.cfg", ["stages = tokenize bogus", "source = a", "target = b"])
    assert main(["pipeline", "--config", cfg]) == 1
    assert main(["pipeline"]) == 1


def test_data_errors_exit_2(tmp_path, capsys):
    assert main(["evaluate", str(tmp_path / "missing"), str(tmp_path / "missing")]) == 2
    bad = tmp_path / "bad.txt"
    bad.write_bytes(b"ok\n\xff\xfe\n")
    assert main(["tokenize", str(bad), str(tmp_path / "o")]) == 2
    assert "offset" in capsys.readouterr().err
    trees = write(tmp_path / "t.txt", ["(S (NP a)", ""])
    assert main(["reorder", trees, str(tmp_path / "o")]) == 2


def test_invariant_violation_exits_3(tmp_path, parallel, monkeypatch):
    def lossy(state, cfg, raw):
        return pipeline._State(state.src[1:], state.tgt[1:], state.ids[1:]), {}

    monkeypatch.setitem(pipeline.STAGE_FUNCS, "tokenize", lossy)
    cfg = write(tmp_path / "c.cfg", [f"source = {parallel[0]}", f"target = {parallel[1]}", "stages = tokenize", "output_dir = out"])
    assert main(["pipeline", "--config", cfg]) == 3


def test_version(capsys):
    with pytest.raises(SystemExit) as err:
        main(["--version"])
    assert err.value.code == 0 and capsys.readouterr().out.startswith("smtkit ")


# -- global flags ------------------------------------------------------------------------------


@pytest.mark.parametrize("where", ["before", "after"])
def test_global_flags_either_side_of_command(tmp_path, where):
    inp = write(tmp_path / "in.txt", ["a@@ b"])
    out = str(tmp_path / "out.txt")
    flag = ["--marker", "@@"]
    argv = flag + ["rejoin", inp, out] if where == "before" else ["rejoin", inp, out] + flag
    assert main(argv) == 0
    assert lines(out) == ["ab"]
    order = ["--order", "2"]
    corpus = write(tmp_path / "lm.txt", ["a b", "b a"])
    arpa = str(tmp_path / "lm.arpa")
    argv = order + ["lm-train", corpus, arpa] if where == "before" else ["lm-train", corpus, arpa] + order
    assert main(argv) == 0
    assert "\\3-grams:" not in Path(arpa).read_text(encoding="utf-8")


# -- subcommands ------------------------------------------------------------------------------


def test_normalize_and_tokenize(tmp_path):
    inp = write(tmp_path / "in.txt", ["Ram ate  mango.", "café"])
    assert main(["normalize", inp, str(tmp_path / "n.txt")]) == 0
    assert lines(tmp_path / "n.txt")[1] == "café"
    assert main(["tokenize", inp, str(tmp_path / "t.txt")]) == 0
    assert lines(tmp_path / "t.txt") == ["Ram ate mango .", "café"]


def test_filter_stats_split(tmp_path, parallel, capsys):
    src = write(tmp_path / "f.src", ["a b", " ".join("w" * 81)])
    tgt = write(tmp_path / "f.tgt", ["x", "y"])
    assert main(["filter", src, tgt, str(tmp_path / "o.src"), str(tmp_path / "o.tgt")]) == 0
    assert "pairs_in=2 pairs_out=1 removed=1" in capsys.readouterr().out
    assert main(["stats", *parallel, "--names", "en", "de"]) == 0
    out = capsys.readouterr().out
    assert "en" in out and "de" in out
    assert main(["split", *parallel, str(tmp_path / "s"), "--n-dev", "1", "--n-test", "1"]) == 0
    assert capsys.readouterr().out.split() == ["train=3", "dev=1", "test=1"]
    first = lines(tmp_path / "s.dev.src")
    main(["split", *parallel, str(tmp_path / "s"), "--n-dev", "1", "--n-test", "1"])
    assert lines(tmp_path / "s.dev.src") == first


def test_split_suffix_rejoin_stem(tmp_path, capsys):
    inp = write(tmp_path / "in.txt", ["ramanukku vandaan", "viittil"])
    table = str(DATA / "suffixes_demo.txt")
    assert main(["split-suffix", inp, str(tmp_path / "s.txt"), "--table", table, "--diagnostics"]) == 0
    assert capsys.readouterr().out.startswith("{")
    assert lines(tmp_path / "s.txt") != lines(inp)
    assert main(["rejoin", str(tmp_path / "s.txt"), str(tmp_path / "r.txt")]) == 0
    assert (tmp_path / "r.txt").read_bytes() == Path(inp).read_bytes()
    eng = write(tmp_path / "e.txt", ["walking houses"])
    assert main(["stem", eng, str(tmp_path / "st.txt")]) == 0
    assert len(lines(tmp_path / "st.txt")[0].split()) == 2


def test_reorder_default_rules(tmp_path):
    trees = write(tmp_path / "t.txt", ["(S (NP Ram) (VP (V ate) (NP mango)))"])
    assert main(["reorder", trees, str(tmp_path / "o.txt")]) == 0
    assert lines(tmp_path / "o.txt") == ["Ram mango ate"]


def test_lm_train_and_score(tmp_path, capsys):
    corpus = write(tmp_path / "c.txt", ["a b c", "a b", "b c a"])
    arpa = str(tmp_path / "lm.arpa")
    assert main(["--order", "3", "lm-train", corpus, arpa]) == 0
    assert Path(arpa).read_text(encoding="utf-8").startswith("\\data\\")
    capsys.readouterr()
    assert main(["lm-score", arpa, corpus]) == 0
    out = capsys.readouterr().out.splitlines()
    assert len(out) == 4 and out[-1].startswith("perplexity=")
    assert all(float(x) < 0 for x in out[:3])


def test_translit_train_and_apply(tmp_path):
    lex = write(tmp_path / "lex.tsv", ["ram\traam", "sita\tsiitaa", "tim\ttim"])
    model = str(tmp_path / "m.tsv")
    assert main(["translit-train", lex, model, "--iterations", "5"]) == 0
    corpus = write(tmp_path / "c.txt", ["raam ghar gayaa", "tim ghar gayaa"])
    arpa = str(tmp_path / "lm.arpa")
    assert main(["--order", "2", "lm-train", corpus, arpa]) == 0
    vocab = write(tmp_path / "v.txt", ["ghar", "gayaa"])
    hyp = write(tmp_path / "h.txt", ["ram ghar gayaa", ""])
    assert main(["translit-apply", model, arpa, hyp, str(tmp_path / "o.txt"), "--vocab", vocab, "--k", "5"]) == 0
    out = lines(tmp_path / "o.txt")
    assert out[1] == "" and out[0].split()[1:] == ["ghar", "gayaa"]
    bad = write(tmp_path / "bad.tsv", ["no tab here"])
    assert main(["translit-train", bad, model]) == 2


def test_align_commands(tmp_path, parallel, capsys):
    ttable = str(tmp_path / "t.txt")
    assert main(["align-train", *parallel, ttable, "--iterations", "5"]) == 0
    ll = [float(x.split("=")[-1]) for x in capsys.readouterr().out.splitlines()]
    assert len(ll) == 5 and all(b >= a - 1e-9 for a, b in zip(ll, ll[1:]))
    assert main(["align-viterbi", *parallel, ttable, str(tmp_path / "a.txt")]) == 0
    assert lines(tmp_path / "a.txt")[0] == "0-0 1-1"
    assert main(["align-compare", *parallel]) == 0
    out = capsys.readouterr().out
    assert "surface" in out and "stem" in out


def test_evaluate_prints_table_and_keyvalues(tmp_path, capsys):
    hyp = write(tmp_path / "h.txt", ["a b c d", "e f g h"])
    assert main(["evaluate", hyp, hyp, "--label", "S1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[1].split("|")[0].strip() == "S1"
    assert "bleu_pct=100.0" in out and "one_minus_ter=100.0" in out
    ref = write(tmp_path / "r.txt", ["a"])
    assert main(["evaluate", hyp, ref]) == 2


def test_pipeline_command(tmp_path, parallel, capsys):
    cfg = write(tmp_path / "c.cfg", [f"source = {parallel[0]}", f"target = {parallel[1]}", "variant = S1", "output_dir = run"])
    assert main(["pipeline", "--config", cfg]) == 0
    out = capsys.readouterr().out
    assert out.startswith("status=ok manifest_hash=")
    assert (tmp_path / "run" / "manifest.json").exists()
    assert main(["pipeline", "--config", cfg]) == 0
    assert capsys.readouterr().out == out


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "smtkit", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    for name in ("tokenize", "lm-train", "translit-apply", "align-compare", "evaluate", "pipeline"):
        assert name in proc.stdout

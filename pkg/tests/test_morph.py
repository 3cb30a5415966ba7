import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smtkit.exceptions import MarkerCollisionError
from smtkit.morph import (
    StemRuleTable,
    Stemmer,
    SuffixSplitter,
    SuffixTable,
    read_table_file,
    rejoin,
    shipped_table,
    split_diagnostics,
    split_sentence,
    stem,
    suffix_split,
)

token = st.text(alphabet="abcdeiklmnstu", min_size=1, max_size=8)
suffix_tables = st.sets(st.text(alphabet="abcdeiklmnstu", min_size=1, max_size=4), max_size=10)


# -- tables ---------------------------------------------------------------------


def test_table_sorted_longest_first_then_lexicographic():
    table = SuffixTable(["tu", "stu", "ab", "stu", "a"])
    assert table.suffixes == ("stu", "ab", "tu", "a")


def test_table_rejects_marker_inside_suffix():
    with pytest.raises(ValueError):
        SuffixTable(["x@@y"])
    with pytest.raises(ValueError):
        SuffixTable(["ok"], marker="")


def test_table_file_ignores_comments(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("# comment\nil\n\nukku\n  aal  \n", encoding="utf-8")
    assert read_table_file(path) == ["il", "ukku", "aal"]
    assert SuffixTable.from_file(path).suffixes == ("ukku", "aal", "il")


def test_shipped_tables_load():
    assert "ing" in StemRuleTable.shipped("english").strip_suffixes
    assert len(SuffixTable.from_file(shipped_table("suffixes_demo.txt"))) > 0


# -- suffix_split -------------------------------------------------------------------


def test_split_longest_match_example():
    res = suffix_split("mahinyaaMnii", SuffixTable(["aaMnii"]))
    assert (res.stem, res.suffix) == ("mahiny@@", "aaMnii")


def test_split_word_equal_to_longest_suffix_stays_whole():
    res = suffix_split("stu", SuffixTable(["stu", "tu"]))
    assert (res.stem, res.suffix) == ("stu", None)
    res = suffix_split("tu", SuffixTable(["tu"]))
    assert (res.stem, res.suffix) == ("tu", None)


def test_split_min_stem_len_guard():
    table = SuffixTable(["ukku"])
    assert suffix_split("avanukku", table, min_stem_len=4).suffix == "ukku"
    assert suffix_split("avukku", table, min_stem_len=4) == ("avukku", None)


def test_split_longest_match():
    res = suffix_split("pqrstu", SuffixTable(["stu", "tu"]))
    assert (res.stem, res.suffix) == ("pqr@@", "stu")


def test_split_marker_collision():
    with pytest.raises(MarkerCollisionError):
        suffix_split("ab@@c", SuffixTable(["c"]))
    with pytest.raises(MarkerCollisionError) as err:
        split_sentence(["fine", "ba@@d"], SuffixTable(["d"]))
    assert err.value.position == 1


def test_split_custom_marker():
    res = suffix_split("walking", SuffixTable(["ing"], marker="+"))
    assert res.stem == "walk+"
    assert rejoin(["walk+", "ing"], marker="+") == ("walking",)


@settings(max_examples=300, deadline=None)
@given(token, suffix_tables)
def test_split_invariants(word, suffixes):
    res = suffix_split(word, SuffixTable(suffixes))
    if res.suffix is None:
        assert res.stem == word
    else:
        assert res.stem.endswith("@@")
        assert res.stem[:-2] + res.suffix == word
    matching = [s for s in suffixes if word.endswith(s)]
    if matching:
        longest = max(matching, key=len)
        # the longest match is used, or nothing when it is the whole word
        assert res.suffix == (longest if len(longest) < len(word) else None)
    else:
        assert res.suffix is None


# -- sentences ----------------------------------------------------------------------


def test_split_sentence_examples():
    table = SuffixTable(["aaMnii"])
    assert split_sentence(["mahinyaaMnii"], table) == ("mahiny@@", "aaMnii")
    assert split_sentence(["abc"], SuffixTable([])) == ("abc",)
    assert split_sentence(["mahinyaaMnii"], table, protected=[0]) == ("mahinyaaMnii",)


@pytest.mark.parametrize(
    "tokens,expected",
    [
        (["mahiny@@", "aaMnii"], ("mahinyaaMnii",)),
        (["a@@", "b@@", "c"], ("abc",)),
        (["ab@@"], ("ab",)),
        (["x", "ab@@"], ("x", "ab")),
        ([], ()),
    ],
)
def test_rejoin_examples(tokens, expected):
    assert rejoin(tokens) == expected


@settings(max_examples=300, deadline=None)
@given(st.lists(token, max_size=10), suffix_tables)
def test_round_trip_and_single_split(sentence, suffixes):
    table = SuffixTable(suffixes)
    split = split_sentence(sentence, table)
    assert rejoin(split) == tuple(sentence)
    assert sum(tok.endswith("@@") for tok in split) <= len(sentence)
    assert len(split) <= 2 * len(sentence)


def test_vocabulary_reduction_on_agglutinative_corpus():
    stems = ["bar", "dor", "kam", "nil", "pos"]
    suffixes = ["kal", "ukku", "odu"]
    table = SuffixTable(suffixes)
    corpus = [[s + x for x in suffixes] for s in stems]
    before = {w for s in corpus for w in s}
    after = {w for s in corpus for w in split_sentence(s, table)}
    assert len(before) == 15
    assert len(after) == 8 < len(before)


def test_split_diagnostics():
    diag = split_diagnostics([["walking", "talked", "go"]], SuffixTable(["ing", "ed"]))
    assert diag["tokens"] == 3 and diag["split"] == 2
    assert diag["per_suffix"] == {"ed": 1, "ing": 1}
    assert diag["vocab_after"] == 5


# -- stemming ------------------------------------------------------------------------


def test_stem_examples():
    assert stem("mahinyaaMnii", StemRuleTable(["aaMnii"])) == "mahiny"
    assert stem("ab", StemRuleTable(["b"], min_stem_len=2)) == "ab"
    assert stem("walking", StemRuleTable.shipped("english")) == "walk"


WORDS = {
    "english": "walking talked cats quickly nation national relational organization hopes running sings".split(),
    "hindi": "लड़कों लड़कियाँ किताबें घरों चलता चलती खाना खाने".split(),
}


@pytest.mark.parametrize("lang", ["english", "hindi"])
def test_shipped_stem_tables_idempotent(lang):
    rules = StemRuleTable.shipped(lang)
    for word in WORDS[lang]:
        once = stem(word, rules)
        assert stem(once, rules) == once, (word, once)


def test_estimators():
    splitter = SuffixSplitter(["ing"]).fit([["walking"]])
    out = splitter.transform([["walking", "go"]])
    assert out == [("walk@@", "ing", "go")]
    assert splitter.inverse_transform(out) == [("walking", "go")]
    assert splitter.diagnostics_["split"] == 1
    assert Stemmer().fit().transform([["walking"]]) == [("walk",)]
    assert Stemmer(rules=["ing"]).fit().transform(["singing"]) == [("sing",)]
    assert SuffixSplitter().get_params()["marker"] == "@@"

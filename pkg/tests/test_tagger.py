import pytest
from hypothesis import given
from hypothesis import strategies as st

from rumourseq.tagger import TAG_INDEX, TAGSET, Tagger, pos_count_vector, tag, tokenize


def tags_of(text, tagger=None):
    return [t.tag for t in tag(tokenize(text), tagger)]


def test_tagset_size():
    assert len(TAGSET) == 41
    assert len(set(TAGSET)) == 41
    assert {"USR", "HT", "URL", "RT", "EMO"} <= set(TAGSET)


def test_tokenize_keeps_twitter_units():
    assert tokenize("RT @abc: true? http://t.co/x") == ["RT", "@abc", ":", "true", "?", "http://t.co/x"]
    assert tokenize("Gunman at large #sydneysiege") == ["Gunman", "at", "large", "#sydneysiege"]
    assert tokenize("so sad :( stay safe") == ["so", "sad", ":(", "stay", "safe"]


def test_rule_tags():
    assert tags_of("RT @abc #tag http://t.co/x :)") == ["RT", "USR", "HT", "URL", "EMO"]


def test_lexical_tags():
    assert tags_of("running") == ["VBG"]
    assert tags_of("the") == ["DT"]
    assert tags_of("42") == ["CD"]
    assert tags_of("Ottawa") == ["NNP"]


def test_overrides(tmp_path):
    path = tmp_path / "tags.tsv"
    path.write_text("running\tNN\nottawa\tNNP\n")
    tagger = Tagger.from_file(path)
    assert tags_of("running ottawa", tagger) == ["NN", "NNP"]
    # rule tags win over overrides
    assert tags_of("@running", Tagger({"@running": "NN"})) == ["USR"]


def test_override_tag_outside_tagset_rejected(tmp_path):
    with pytest.raises(ValueError):
        Tagger({"x": "BOGUS"})
    path = tmp_path / "bad.tsv"
    path.write_text("only-one-column\n")
    with pytest.raises(ValueError, match=":1:"):
        Tagger.from_file(path)


@given(st.text(max_size=200))
def test_count_vector_conserves_tokens(text):
    tags = tag(tokenize(text))
    vec = pos_count_vector(tags)
    assert vec.shape == (len(TAGSET),)
    assert vec.sum() == len(tokenize(text))
    assert all(t.tag in TAG_INDEX for t in tags)

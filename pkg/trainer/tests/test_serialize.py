"""Multi-column serialization: separators, budgets, vocabulary."""
import pytest

from coltrain.serialize import (
    SEP_TOKEN,
    TokenStats,
    build_vocab,
    compute_stats,
    serialize_multi_column,
    tokenize,
)
from coltrain.tables import from_rows


def stats():
    return TokenStats(m_columns=100, df={})


def test_state_capital_example():
    t = from_rows(
        "t", ["State", "Capital"],
        [["California", "Sacramento"], ["New York", "Albany"]],
    )
    s = serialize_multi_column(t, stats(), max_seq_len=32)
    assert s.tokens == (
        SEP_TOKEN, "california", "new", "york",
        SEP_TOKEN, "sacramento", "albany",
    )
    assert s.sep_positions == (0, 4)


def test_single_column_single_separator():
    t = from_rows("t", ["a"], [["x"], ["y"]])
    s = serialize_multi_column(t, stats(), max_seq_len=16)
    assert sum(1 for tok in s.tokens if tok == SEP_TOKEN) == 1
    assert s.sep_positions == (0,)


def test_five_columns_budget_law():
    rows = [[f"tok{r}c{c} extra{r}c{c}" for c in range(5)] for r in range(40)]
    t = from_rows("t", [f"h{c}" for c in range(5)], rows)
    s = serialize_multi_column(t, stats(), max_seq_len=256)
    assert sum(1 for tok in s.tokens if tok == SEP_TOKEN) == 5
    assert len(s.tokens) <= 256
    assert len(s.sep_positions) == 5


def test_too_small_budget_rejected():
    t = from_rows("t", ["a", "b"], [["x", "y"]])
    with pytest.raises(ValueError):
        serialize_multi_column(t, stats(), max_seq_len=3)


def test_high_idf_cells_selected_first():
    st = TokenStats(m_columns=100, df={"common": 90, "rare": 1})
    t = from_rows("t", ["a"], [["common"], ["rare"], ["common"]])
    s = serialize_multi_column(t, st, max_seq_len=2)
    # budget of 1 token with one separator: the rare cell wins.
    assert s.tokens == (SEP_TOKEN, "rare")


def test_compute_stats_counts_columns():
    t1 = from_rows("t1", ["a", "b"], [["tok", "tok"], ["x", "y"]])
    t2 = from_rows("t2", ["c"], [["tok"]])
    st = compute_stats([t1, t2])
    assert st.m_columns == 3
    assert st.df["tok"] == 3
    assert st.df["x"] == 1


def test_vocab_contains_specials_and_tokens():
    t = from_rows("t", ["a"], [["Alpha beta"]])
    vocab = build_vocab([t])
    assert vocab.token_to_id["<pad>"] == 0
    assert vocab.token_to_id["<s>"] == 1
    assert vocab.token_to_id["<unk>"] == 2
    assert "alpha" in vocab.token_to_id
    encoded = vocab.encode(("alpha", "never-seen-token"))
    assert encoded[1] == 2


def test_tokenize_matches_engine_rule():
    assert tokenize("U.S.-2020") == ["u", "s", "2020"]
    assert tokenize("New York") == ["new", "york"]

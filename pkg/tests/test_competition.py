import pytest
from hypothesis import given, strategies as st

from vgrank.competition import (
    Dataset,
    ScoringSchema,
    TaskOutcome,
    assemble_dataset,
    rank_tools,
    read_outcomes,
    score,
    write_outcomes,
)

SCHEMA = ScoringSchema()


def out(tool, answer, expected="TRUE", time=1.0, task="t"):
    return TaskOutcome(task, tool, time, answer, expected)


def test_score_lookup():
    assert score(out("a", "UNKNOWN"), SCHEMA) == SCHEMA.unknown
    assert score(out("a", "TRUE"), SCHEMA) == SCHEMA.correct_true
    assert score(out("a", "TRUE", "FALSE"), SCHEMA) == SCHEMA.incorrect_true < 0
    assert score(out("a", "FALSE", "FALSE"), SCHEMA) == SCHEMA.correct_false
    assert score(out("a", "FALSE", "TRUE"), SCHEMA) == SCHEMA.incorrect_false < 0


def test_shipped_example_schema():
    from importlib.resources import files

    path = files("vgrank") / "data" / "schema_example.json"
    assert ScoringSchema.load(path) == ScoringSchema()


def test_schema_sanity_check():
    bad = {**SCHEMA.to_dict(), "incorrect_true": 3}
    with pytest.raises(ValueError):
        ScoringSchema.from_dict(bad)
    assert ScoringSchema.from_dict(bad, sanity_check=False).incorrect_true == 3
    with pytest.raises(ValueError):
        ScoringSchema.from_dict({"correct_true": 1})


def test_highest_score_first():
    pi, missing = rank_tools([out("a", "UNKNOWN"), out("b", "TRUE"), out("c", "FALSE")],
                             SCHEMA, ["a", "b", "c"])
    assert pi.tolist() == [2, 1, 3] and missing == []


def test_time_breaks_ties():
    pi, _ = rank_tools([out("slow", "TRUE", time=20), out("fast", "TRUE", time=10)],
                       SCHEMA, ["slow", "fast"])
    assert pi.tolist() == [2, 1]


def test_only_correct_runs_count_for_time():
    # equal score: b has a long UNKNOWN run which must not count
    outcomes = [out("a", "TRUE", time=5, task="t1"), out("a", "UNKNOWN", time=1, task="t2"),
                out("b", "TRUE", time=6, task="t1"), out("b", "UNKNOWN", time=500, task="t2")]
    pi, _ = rank_tools(outcomes, SCHEMA, ["a", "b"])
    assert pi.tolist() == [1, 2]


def test_all_unknown_is_lexicographic():
    pi, _ = rank_tools([out(t, "UNKNOWN", time=9 - k) for k, t in enumerate("dbca")],
                       SCHEMA, list("abcd"))
    assert pi.tolist() == [1, 2, 3, 4]


def test_missing_record_flagged():
    pi, missing = rank_tools([out("a", "FALSE")], SCHEMA, ["a", "b"])
    assert missing == ["b"] and pi.tolist() == [2, 1]


def test_empty_unit():
    with pytest.raises(ValueError):
        rank_tools([], SCHEMA, ["a"])


outcome_lists = st.lists(
    st.tuples(st.sampled_from(["TRUE", "FALSE", "UNKNOWN"]), st.sampled_from(["TRUE", "FALSE"]),
              st.floats(0, 1000, allow_nan=False)),
    min_size=2, max_size=7,
)


def _unit(records):
    tools = [f"tool{k}" for k in range(len(records))]
    return [out(t, a, e, time) for t, (a, e, time) in zip(tools, records)], tools


@given(outcome_lists, st.floats(0.01, 100))
def test_permutation_and_time_scaling(records, factor):
    outcomes, tools = _unit(records)
    pi, _ = rank_tools(outcomes, SCHEMA, tools)
    assert sorted(pi.tolist()) == list(range(1, len(tools) + 1))
    scaled = [TaskOutcome(o.task, o.tool, o.time * factor, o.answer, o.expected)
              for o in outcomes]
    assert rank_tools(scaled, SCHEMA, tools)[0].tolist() == pi.tolist()


@given(outcome_lists, st.integers(-5, 5))
def test_score_shift(records, shift):
    outcomes, tools = _unit(records)
    shifted = ScoringSchema(*(v + shift for v in SCHEMA.to_dict().values()))
    assert (rank_tools(outcomes, shifted, tools)[0] == rank_tools(outcomes, SCHEMA, tools)[0]).all()


def test_csv_round_trip(tmp_path):
    outcomes = [out("a", "TRUE", time=1.25), out("b", "UNKNOWN", time=3.0)]
    write_outcomes(outcomes, tmp_path / "o.csv")
    assert read_outcomes(tmp_path / "o.csv") == outcomes


def test_csv_rejects_duplicates(tmp_path):
    write_outcomes([out("a", "TRUE"), out("a", "FALSE")], tmp_path / "o.csv")
    with pytest.raises(ValueError, match="duplicate"):
        read_outcomes(tmp_path / "o.csv")


def test_fixture_dataset(fixtures, tmp_path):
    base = fixtures / "competition"
    outcomes = read_outcomes(base / "outcomes.csv")
    ds = assemble_dataset(base / "graphs", outcomes, SCHEMA, filter_tools=False)
    assert ds.tools == ["cbmc", "esbmc", "lazy"]
    assert ds.tasks == ["t1", "t2", "t3"]
    assert ds.rankings.tolist() == [[2, 1, 3], [1, 3, 2], [1, 2, 3]]
    ds.save(tmp_path / "m.json")
    back = Dataset.load(tmp_path / "m.json")
    assert back.tasks == ds.tasks and (back.rankings == ds.rankings).all()
    assert [p.split("/")[-1] for p in back.graphs] == ["t1.json", "t2.json", "t3.json"]


def test_filter_drops_tools_without_correct_outcome(fixtures):
    base = fixtures / "competition"
    outcomes = read_outcomes(base / "outcomes.csv")
    ds = assemble_dataset(base / "graphs", outcomes, SCHEMA, filter_tools=True)
    assert ds.tools == ["cbmc", "esbmc"]
    assert ds.rankings.tolist() == [[2, 1], [1, 2], [1, 2]]


def test_graph_outcome_mismatch(fixtures):
    outcomes = read_outcomes(fixtures / "competition" / "outcomes.csv")
    extra = outcomes + [out("cbmc", "TRUE", task="t4")]
    with pytest.raises(ValueError, match="t4"):
        assemble_dataset(fixtures / "competition" / "graphs", extra, SCHEMA)


def test_missing_records_warn(fixtures):
    outcomes = [o for o in read_outcomes(fixtures / "competition" / "outcomes.csv")
                if not (o.task == "t3" and o.tool == "lazy")]
    with pytest.warns(UserWarning, match="t3"):
        assemble_dataset(fixtures / "competition" / "graphs", outcomes, SCHEMA,
                         filter_tools=False)

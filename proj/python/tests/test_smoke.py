import itertools
import json
import math

import jsonschema
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import argeval


def chain():
    return {
        "root": "r",
        "arguments": [
            {"id": "r", "text": "Treat.", "base_score": 0.5},
            {"id": "a", "text": "Too frail.", "base_score": 0.8},
        ],
        "attacks": [["a", "r"]],
    }


def test_aggregate_and_combine():
    assert argeval.aggregate([]) == 0.0
    assert argeval.aggregate([0.5, 0.5]) == 0.75
    assert argeval.combine(0.5, 0.3, 0.3) == 0.5
    assert argeval.combine(0.5, 0.8, 0.0) == 0.5 - 0.5 * 0.8
    assert argeval.combine(0.5, 0.0, 0.8) == pytest.approx(0.9, abs=1e-15)
    with pytest.raises(ValueError):
        argeval.combine(1.5, 0.0, 0.0)


def test_evaluate_chain():
    strengths = argeval.evaluate(chain())
    assert strengths["a"] == 0.8
    assert strengths["r"] == argeval.root_strength(chain())
    broken = chain()
    broken["attacks"][0][1] = "nowhere"
    with pytest.raises(ValueError):
        argeval.evaluate(broken)


@given(st.lists(st.integers(0, 10).map(lambda x: x / 10), max_size=8))
def test_aggregate_matches_product_form(values):
    expected = 0.0 if not values else 1.0 - math.prod(1.0 - v for v in sorted(values))
    assert argeval.aggregate(values) == pytest.approx(expected, abs=1e-12)


# Conditions over a small parameter universe, checked against jsonschema.

POOLS = {
    "age": st.sampled_from([0, 17, 18, 50, 70, 100]),
    "dose": st.sampled_from([-1.5, 0.0, 2.25, 3, 3.0, 10.0]),
    "flag": st.booleans(),
    "colour": st.sampled_from(["red", "green", "blue"]),
}
TYPES = {"age": "integer", "dose": "number", "flag": "boolean", "colour": "string"}


@st.composite
def constraint(draw):
    name = draw(st.sampled_from(sorted(POOLS)))
    body = {}
    if draw(st.booleans()):
        body["type"] = TYPES[name]
    if draw(st.booleans()):
        body["enum"] = draw(st.lists(POOLS[name], min_size=1, max_size=3))
    if draw(st.integers(0, 4)) == 0:
        body["const"] = draw(POOLS[name])
    if TYPES[name] in ("integer", "number"):
        for key in ("minimum", "maximum", "exclusiveMinimum", "exclusiveMaximum"):
            if draw(st.integers(0, 3)) == 0:
                body[key] = draw(POOLS[name])
    return {"properties": {name: body}}


def compound(children):
    return st.one_of(
        st.lists(children, min_size=1, max_size=3).map(lambda xs: {"anyOf": xs}),
        st.lists(children, min_size=1, max_size=3).map(lambda xs: {"allOf": xs}),
        children.map(lambda x: {"not": x}),
    )


conditions = st.recursive(
    st.one_of(
        constraint(),
        st.lists(st.sampled_from(sorted(POOLS)), min_size=1, max_size=2, unique=True).map(
            lambda names: {"required": names}
        ),
    ),
    compound,
    max_leaves=6,
)
assignments = st.fixed_dictionaries({}, optional=POOLS)


@settings(max_examples=300, deadline=None)
@given(conditions, assignments)
def test_conditions_agree_with_jsonschema(schema, params):
    expected = jsonschema.Draft202012Validator(schema).is_valid(params)
    assert argeval.eval_condition(schema, params) is expected
    normalised = argeval.normalise_condition(schema)
    assert argeval.eval_condition(normalised, params) is expected


def test_condition_errors():
    with pytest.raises(ValueError):
        argeval.eval_condition({"if": {}}, {})
    with pytest.raises(TypeError):
        argeval.eval_condition({"properties": {"age": {"minimum": 3}}}, {"age": "old"})


def framework():
    return {
        "option": {"id": "rt", "name": "Radiotherapy", "description": ""},
        "root": "arg0",
        "arguments": [
            {"id": "arg0", "text": "Radiotherapy is recommended.", "base_score": 0.5},
            {
                "id": "arg1",
                "text": "Poor performance status.",
                "base_score": 0.8,
                "nl_condition": "KPS below 50.",
                "condition": {"properties": {"kps": {"type": "integer", "maximum": 49}}},
            },
            {
                "id": "arg2",
                "text": "Standard of care.",
                "base_score": 0.6,
                "nl_condition": "Always.",
                "condition": True,
            },
        ],
        "attacks": [["arg1", "arg0"]],
        "supports": [["arg2", "arg0"]],
    }


def test_instantiate_and_infer():
    inst = argeval.instantiate(framework(), {"kps": 70})
    assert [a["id"] for a in inst["qbaf"]["arguments"]] == ["arg0", "arg2"]
    assert [r["id"] for r in inst["removed"]] == ["arg1"]
    result = argeval.infer([framework()], {"kps": 70})
    (rec,) = result["recommendations"]
    assert rec["score"] == argeval.combine(0.5, 0.0, 0.6)
    assert argeval.root_strength(rec["qbaf"]) == rec["score"]


def test_labels_grid_and_ndcg():
    assert argeval.label_match(0.5, "recommended")
    assert argeval.label_match(0.5, "not_recommended")
    assert argeval.label_match(0.25, "maybe")
    assert not argeval.label_match(0.2, "maybe")
    grid = argeval.generate_grid([("a", [1, 2]), ("b", ["x", "y", "z"])])
    assert len(grid) == 6
    assert grid[0] == {"a": 1, "b": "x"} and grid[-1] == {"a": 2, "b": "z"}


def brute_ndcg(scores, gains):
    ids = sorted(scores)
    ranked = sorted(ids, key=lambda i: -scores[i])
    dcg = lambda order: sum(gains[i] / math.log2(k + 2) for k, i in enumerate(order))
    ideal = max(dcg(p) for p in itertools.permutations(ids))
    return 1.0 if ideal == 0 else dcg(ranked) / ideal


@given(
    st.dictionaries(
        st.sampled_from("abcde"),
        st.tuples(st.integers(0, 4).map(lambda x: x / 4), st.sampled_from(["recommended", "maybe", "not"])),
        min_size=1,
    )
)
def test_ndcg_matches_brute_force(items):
    scores = {k: v[0] for k, v in items.items()}
    labels = {k: v[1] for k, v in items.items()}
    gain = {"recommended": 2.0, "maybe": 1.0, "not": 0.0}
    expected = brute_ndcg(scores, {k: gain[v] for k, v in labels.items()})
    assert argeval.ndcg(scores, labels) == pytest.approx(expected, abs=1e-12)


def test_store_contest_and_replay(tmp_path):
    store = argeval.Store.open(str(tmp_path / "store"))
    assert store.revision == 0
    assert store.frameworks() == []
    with pytest.raises(argeval.NotFound):
        store.contest(
            {"edit": {"kind": "remove_entity", "entity": "nope"}, "justification": "Not offered."}
        )
    with pytest.raises(argeval.EditRejected):
        store.contest({"edit": {"kind": "remove_entity", "entity": "nope"}, "justification": ""})
    record = store.contest(
        {
            "edit": {"kind": "add_entity", "name": "Radiotherapy", "description": "", "parents": []},
            "justification": "Missing from the guideline extract.",
        }
    )
    assert record["revision"] == 1
    assert store.revision == 1
    assert len(store.log()) == 1
    assert store.replay_digest() == store.digest()
    assert store.replay_digest(0) != store.digest()
    reopened = argeval.Store.open(str(tmp_path / "store"))
    assert reopened.digest() == store.digest()
    json.dumps(store.log())

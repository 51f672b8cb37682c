from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from botsim.agent.action_list import ACTIONS, Action
from botsim.agent.prompts import (
    TEMPLATES, action_bindings, goal_bindings, knowledge_text, numbered, profile_text, render_prompt, render_stream,
    template_source,
)
from botsim.env import Account, AccountKind, Environment, Subreddit, parse_time
from botsim.errors import TemplateError
from botsim.feed import TimelineCursor, build_feed
from conftest import WORKED_NOW, TIME_KNOWLEDGE, worked_env, worked_stream, emma_profile, ev, golden, human


EMMA_PROFILE = (
    '{"UserName": "Emma Nguyen", "Age": "28", "Gender": "Female", "EducationLevel": "Bachelor\'s Degree in '
    'Mechanical", "Preference": "US politics", "Region": "American, New York City", '
    '"UserDescription": "Stay informed, stay curious."}'
)


def test_perception_matches_worked_example():
    env = worked_env()
    assert render_stream(env, worked_stream(env)) == golden("perception_worked_example.txt")


def test_perception_empty_stream():
    env = Environment([human("aaaaaa", "A")], [Subreddit("news")])
    stream = build_feed(env, TimelineCursor("aaaaaa", WORKED_NOW), ["news"])
    assert render_stream(env, stream) == golden("perception_empty.txt")


def test_perception_with_subcomments():
    env = Environment([human("lena00", "Lena"), human("omar00", "Omar")], [Subreddit("news")])
    env.apply(ev("aaaaa1", "post", "lena00", "2024-01-02 10:00:00", content="Ceasefire talks resume in Cairo"))
    env.apply(ev("bbbbb1", "comment1", "omar00", "2024-01-02 10:05:00", "aaaaa1", "About time."))
    env.apply(ev("ccccc1", "comment2", "lena00", "2024-01-02 10:07:30", "bbbbb1", "Agreed, finally."))
    stream = build_feed(env, TimelineCursor("omar00", parse_time("2024-01-02 11:00:00")), ["news"])
    assert render_stream(env, stream) == golden("perception_subcomments.txt")


def test_goal_prompt_matches_worked_example():
    b = goal_bindings(2, "Russian-Ukrainian war", 5, 6, "2024-06-12", "2024-06-14", 11)
    assert render_prompt("goal", b) == golden("goal_worked_example.txt")


def test_rewrite_prompt_matches_worked_example():
    text = ("In scientific theory, the concept of time dimension does not appear out of thin air, but through "
            "rigorous theoretical derivation and experimental verification.")
    assert render_prompt("rewrite", {"Knowledge": text}) == golden("rewrite_example.txt")


def test_decision_prompt_matches_worked_example():
    env = worked_env()
    bindings = {
        "Event": "Time",
        "UserName": '"Emma Nguyen"',
        "UserProfile": EMMA_PROFILE,
        "BrowseContent": render_stream(env, worked_stream(env)).rstrip("\n"),
        "Knowledge": knowledge_text(env.knowledge),
        "HistoryPost": numbered("Post", ["Enough time has passed",
                                         "what a monumental time in history I'm sorry if you weren't there"]),
        "HistoryComment": numbered("Comment", ["Time for some uncomfortable conversations", "This time last week"]),
        **action_bindings(Action.COMMENT, " Attention, a potent fix"),
    }
    assert render_prompt("decision", bindings) == golden("decision_worked_example.txt")


def test_profile_text_fields():
    assert profile_text(Account("emma00", AccountKind.BOT, "Emma Nguyen", 0, emma_profile())) == (
        '{"UserName": "Emma Nguyen", "Age": "28", "Gender": "Female", "EducationLevel": "Bachelor\'s Degree", '
        '"Preference": "US politics", "Region": "American, New York City", '
        '"UserDescription": "Stay informed, stay curious."}'
    )


def test_knowledge_text_forms():
    assert knowledge_text([]) == ""
    assert numbered("Post", []) == ""
    assert numbered("Post", ["a", "b"]) == '{"Post 1": "a", "Post 2": "b"}'


@pytest.mark.parametrize("name", TEMPLATES)
def test_missing_binding_names_template_and_field(name):
    with pytest.raises(TemplateError) as err:
        render_prompt(name, {})
    assert name in str(err.value)


def test_unknown_template():
    with pytest.raises(ValueError):
        render_prompt("nope", {})


def test_every_action_description_has_time_rule_or_no_time():
    for action in (Action.POST, Action.COMMENT, Action.REPOST, Action.LIKE):
        assert "%Y-%m-%d %H:%M:%S" in ACTIONS[action].description


@settings(max_examples=50, deadline=None)
@given(st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=80))
def test_rewrite_renders_knowledge_verbatim(text):
    out = render_prompt("rewrite", {"Knowledge": text})
    assert f"[News]: {text}\n" in out
    assert out.startswith(template_source("rewrite").split("{{")[0])

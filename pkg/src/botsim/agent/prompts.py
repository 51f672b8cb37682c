"""Prompt templates and the helpers that turn simulation state into bindings."""

from __future__ import annotations

import json
from collections.abc import Mapping, Sequence
from functools import lru_cache
from typing import Any

import jinja2
from jinja2 import meta

from botsim.agent.action_list import ACTIONS, GOAL_ACTIONS, GOAL_LABELS, Action
from botsim.env import Account, Environment, KnowledgeItem, format_time
from botsim.errors import TemplateError
from botsim.feed import MessageStream

TEMPLATES = ("perception", "goal", "decision", "rewrite", "text_detect")

_jinja = jinja2.Environment(
    loader=jinja2.PackageLoader("botsim.agent", "templates"),
    undefined=jinja2.StrictUndefined,
    keep_trailing_newline=True,
    trim_blocks=True,
    lstrip_blocks=True,
    autoescape=False,
)


@lru_cache(maxsize=None)
def _placeholders(name: str) -> frozenset[str]:
    source = _jinja.loader.get_source(_jinja, f"{name}.txt")[0]
    return frozenset(meta.find_undeclared_variables(_jinja.parse(source)))


def template_source(name: str) -> str:
    return _jinja.loader.get_source(_jinja, f"{name}.txt")[0]


def render_prompt(template: str, bindings: Mapping[str, Any]) -> str:
    if template not in TEMPLATES:
        raise ValueError(f"unknown template {template!r}")
    missing = sorted(_placeholders(template) - set(bindings))
    if missing:
        raise TemplateError(template, missing)
    try:
        return _jinja.get_template(f"{template}.txt").render(**bindings)
    except jinja2.UndefinedError as exc:
        raise TemplateError(template, [str(exc)]) from None


# binding helpers -----------------------------------------------------------

EDUCATION_DISPLAY = {
    "below-HS": "Below High School",
    "HS": "High School",
    "undergraduate": "Bachelor's Degree",
    "master": "Master's Degree",
    "doctoral": "Doctoral Degree",
}


def _name(env: Environment, account_id: str) -> str:
    acc = env.accounts.get(account_id)
    return acc.screen_name if acc else account_id


def perception_bindings(env: Environment, stream: MessageStream) -> dict[str, Any]:
    posts = []
    for fp in stream.posts:
        comments = []
        for fc in fp.comments:
            comments.append(
                {
                    "CommentID": fc.comment.event_id,
                    "CommentContent": fc.comment.content,
                    "CommentTime": format_time(fc.comment.timestamp),
                    "UserName": _name(env, fc.comment.actor),
                    "SubComNumber": len(fc.replies),
                    "subcomments": [
                        {
                            "SubComID": r.event_id,
                            "SubComContent": r.content,
                            "SubComTime": format_time(r.timestamp),
                            "UserName": _name(env, r.actor),
                        }
                        for r in fc.replies
                    ],
                }
            )
        posts.append(
            {
                "PostID": fp.post.event_id,
                "PostContent": fp.post.content,
                "PostTime": format_time(fp.post.timestamp),
                "UserName": _name(env, fp.post.actor),
                "LikeNumber": fp.like_count,
                "RepostNumber": fp.repost_count,
                "RepostUserName": ", ".join(fp.reposters),
                "CommentNumber": len(fp.comments),
                "comments": comments,
            }
        )
    return {"PostNumber": len(posts), "posts": posts}


def render_stream(env: Environment, stream: MessageStream) -> str:
    return render_prompt("perception", perception_bindings(env, stream))


def profile_text(account: Account) -> str:
    prof = account.profile
    fields = {"UserName": account.screen_name}
    if prof is not None:
        fields.update(
            {
                "Age": str(prof.age),
                "Gender": prof.gender.capitalize(),
                "EducationLevel": EDUCATION_DISPLAY.get(prof.education, prof.education),
                "Preference": prof.preference,
                "Region": prof.region,
                "UserDescription": prof.description,
            }
        )
    return json.dumps(fields, ensure_ascii=False)


def numbered(label: str, texts: Sequence[str]) -> str:
    if not texts:
        return ""
    return json.dumps({f"{label} {i}": t for i, t in enumerate(texts, 1)}, ensure_ascii=False)


def knowledge_text(items: Sequence[KnowledgeItem]) -> str:
    if not items:
        return ""
    if len(items) == 1:
        return json.dumps(items[0].text, ensure_ascii=False)
    return numbered("Knowledge", [k.text for k in items])


def action_bindings(action: Action, comment_example: str = "") -> dict[str, str]:
    info = ACTIONS[action]
    description = info.description.replace("{{CommentExample}}", json.dumps(comment_example, ensure_ascii=False))
    return {
        "ActionName": json.dumps(info.name),
        "ActionPara": info.parameters,
        "ActionDescription": f'"{description}"',
    }


def goal_bindings(
    n_agents: int, event: str, event_num: int, pre_num: int, start: str, end: str, total: int,
) -> dict[str, Any]:
    return {
        "GoalTask": "[Goal Task]",
        "AgentNumber": n_agents,
        "EventNum": event_num,
        "Event": event,
        "PreNum": pre_num,
        "StartTime": start,
        "EndTime": end,
        "Sum": total,
        "actions": [{"name": GOAL_LABELS.get(a, ACTIONS[a].name), "Description": ACTIONS[a].summary} for a in GOAL_ACTIONS],
    }

"""Few-shot text-only bot detection through a decision backend."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from typing import Sequence

from botsim.agent.backend import Backend, DecisionRequest
from botsim.agent.prompts import render_prompt
from botsim.dataset import user_texts
from botsim.detect.metrics import EvalReport, score
from botsim.env import AccountKind, Environment
from botsim.seeding import derive_seed

log = logging.getLogger(__name__)

LABELS = ("human", "bot")
# (humans, bots) among the exemplars for each shot count
SHOT_MIX = {0: (0, 0), 2: (1, 1), 5: (3, 2)}
MAX_TEXTS = 5
REASK_NOTE = "\nAnswer with exactly one word: human or bot.\n"


@dataclass
class TextEvalResult:
    report: EvalReport
    predictions: dict[str, str | None]
    abstained: list[str] = field(default_factory=list)
    prompts: dict[str, str] = field(default_factory=dict)


def parse_verdict(text: str) -> str | None:
    token = text.strip().strip("\"'.").lower()
    return token if token in LABELS else None


def _label(env: Environment, user: str) -> str:
    return "bot" if env.accounts[user].kind is AccountKind.BOT else "human"


def draw_exemplars(env: Environment, exclude: Sequence[str], shots: int, seed: int) -> list[tuple[str, str]]:
    """(user, label) exemplars from users outside ``exclude`` that have text."""
    if shots not in SHOT_MIX:
        raise ValueError(f"shots must be one of {sorted(SHOT_MIX)}")
    n_h, n_b = SHOT_MIX[shots]
    banned = set(exclude)
    pool = {lab: [u for u in sorted(env.accounts) if u not in banned and _label(env, u) == lab and user_texts(env, u)]
            for lab in LABELS}
    rng = random.Random(derive_seed("shots", seed, shots))
    if len(pool["human"]) < n_h or len(pool["bot"]) < n_b:
        raise ValueError(f"not enough labelled users outside the evaluation set for {shots} shots")
    picks = [(u, "human") for u in rng.sample(pool["human"], n_h)] + [(u, "bot") for u in rng.sample(pool["bot"], n_b)]
    rng.shuffle(picks)
    return picks


def build_prompt(env: Environment, user: str, exemplars: Sequence[tuple[str, str]]) -> str:
    shots = [{"texts": user_texts(env, u)[:MAX_TEXTS], "label": lab} for u, lab in exemplars]
    return render_prompt("text_detect", {"shots": shots, "texts": user_texts(env, user)[:MAX_TEXTS]})


def llm_text_eval(backend: Backend, env: Environment, users: Sequence[str], shots: int, seed: int) -> TextEvalResult:
    """Classify each user from its texts; an unparseable verdict after one re-ask counts as wrong."""
    for u in users:
        if not user_texts(env, u):
            raise ValueError(f"user {u} has no texts")
    exemplars = draw_exemplars(env, users, shots, seed)
    truth, preds = [], []
    predictions: dict[str, str | None] = {}
    prompts: dict[str, str] = {}
    abstained = []
    for u in users:
        prompt = build_prompt(env, u, exemplars)
        prompts[u] = prompt
        verdict = None
        for attempt in range(2):
            req = DecisionRequest(prompt + (REASK_NOTE if attempt else ""), {"label": "human|bot"},
                                  derive_seed("classify", seed, u, attempt), task="classify", bindings={"user": u})
            verdict = parse_verdict(backend.complete(req))
            if verdict is not None:
                break
        y = int(_label(env, u) == "bot")
        truth.append(y)
        predictions[u] = verdict
        if verdict is None:
            log.warning("abstention for %s after re-ask", u)
            abstained.append(u)
            preds.append(1 - y)
        else:
            preds.append(int(verdict == "bot"))
    return TextEvalResult(score(truth, preds), predictions, abstained, prompts)

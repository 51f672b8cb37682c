"""Weighted persona sampling for new bot accounts."""

from __future__ import annotations

import random
from collections.abc import Mapping

from botsim.env import RoleSpec
from botsim.errors import ConfigError

# Default tables; override per run. Keys with a dash in "age" are ranges.
DEFAULT_DEMOGRAPHICS: dict[str, dict[str, float]] = {
    "age": {"18-24": 0.44, "25-34": 0.31, "35-49": 0.17, "50-64": 0.06, "65-80": 0.02},
    "gender": {"male": 0.63, "female": 0.37},
    "education": {
        "below-HS": 0.05, "HS": 0.25, "undergraduate": 0.45, "master": 0.19, "doctoral": 0.06,
    },
    "region": {
        "United States": 0.48, "United Kingdom": 0.07, "Canada": 0.07, "Australia": 0.04,
        "Germany": 0.04, "India": 0.05, "Other": 0.25,
    },
    "ideology": {"conservative": 0.36, "moderate": 0.35, "liberal": 0.26, "none": 0.03},
    "preference": {
        "US politics": 0.3, "world news": 0.3, "technology": 0.15,
        "science": 0.1, "sports": 0.1, "uplifting stories": 0.05,
    },
}

FIRST_NAMES = {
    "male": ["James", "Liam", "Noah", "Omar", "Mateo", "Ethan", "Lucas", "Nikolai", "Antonio", "Hiro",
             "Samuel", "David", "Arjun", "Felix", "Daniel", "Marco"],
    "female": ["Emma", "Olivia", "Ava", "Sofia", "Mia", "Amelia", "Priya", "Chloe", "Hana", "Lucia",
               "Grace", "Zoe", "Leah", "Nora", "Isla", "Maya"],
}
LAST_NAMES = ["Nguyen", "Rossi", "Ivanov", "Smith", "Garcia", "Kim", "Patel", "Muller", "Brown", "Silva",
              "Cohen", "Okafor", "Novak", "Tanaka", "Walsh", "Moreau", "Haddad", "Larsen"]

DESCRIPTIONS = {
    "US politics": ["Stay informed, stay curious.", "Policy nerd. Votes in every election.",
                    "Reading the news so you don't have to."],
    "world news": ["Following the world one headline at a time.", "Global citizen, local coffee.",
                   "Maps, history and current events."],
    "technology": ["Gadgets, code and the occasional hot take.", "Building things on weekends."],
    "science": ["Curious about how things work.", "Lab by day, reader by night."],
    "sports": ["Weekend league regular.", "Here for the highlights."],
    "uplifting stories": ["Collecting good news.", "Kindness is contagious."],
}
GENERIC_DESCRIPTIONS = ["Just here to read and chat.", "Lurker turned commenter."]


def _check_table(name: str, table: Mapping[str, float]) -> None:
    if not table:
        raise ConfigError(f"demographic table {name!r} is empty")
    if any(w < 0 for w in table.values()):
        raise ConfigError(f"demographic table {name!r} has negative weights")
    if abs(sum(table.values()) - 1.0) > 1e-9:
        raise ConfigError(f"demographic table {name!r} sums to {sum(table.values())}, not 1")


def _draw(rng: random.Random, table: Mapping[str, float]) -> str:
    u = rng.random()
    acc = 0.0
    keys = list(table)
    for key in keys:
        acc += table[key]
        if u < acc:
            return key
    return keys[-1]


def sample_role(seed: int, demographics: Mapping[str, Mapping[str, float]] | None = None) -> RoleSpec:
    """Draw one persona; identical seeds give identical roles."""
    tables = dict(DEFAULT_DEMOGRAPHICS)
    if demographics:
        tables.update(demographics)
    for name in ("age", "gender", "education", "region", "ideology", "preference"):
        _check_table(name, tables[name])
    rng = random.Random(seed)

    age_key = _draw(rng, tables["age"])
    if "-" in age_key:
        lo, hi = (int(x) for x in age_key.split("-"))
        age = rng.randint(lo, hi)
    else:
        age = int(age_key)
    gender = _draw(rng, tables["gender"])
    education = _draw(rng, tables["education"])
    region = _draw(rng, tables["region"])
    ideology = _draw(rng, tables["ideology"])
    preference = _draw(rng, tables["preference"])
    name = f"{rng.choice(FIRST_NAMES[gender])} {rng.choice(LAST_NAMES)}"
    description = rng.choice(DESCRIPTIONS.get(preference, GENERIC_DESCRIPTIONS))
    return RoleSpec(
        age=age,
        gender=gender,
        education=education,
        preference=preference,
        region=region,
        description=description,
        name=name,
        ideology=None if ideology == "none" else ideology,
    )

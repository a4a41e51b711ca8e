import importlib.resources
import json
import random

import pytest

from hoi_labelforge.knowledge import KnowledgeBase, build_knowledge_base, load_knowledge_base


def demo_kb_path() -> str:
    return str(importlib.resources.files("hoi_labelforge") / "data" / "demo_kb.json")


@pytest.fixture(scope="session")
def demo_kb() -> KnowledgeBase:
    return load_knowledge_base(demo_kb_path())


@pytest.fixture()
def demo_kb_document() -> dict:
    with open(demo_kb_path(), encoding="utf-8") as handle:
        return json.load(handle)


def make_kb(
    n_actions: int,
    n_objects: int,
    hoi_pairs: list[tuple[int, int]],
    correlation: dict[int, list[int]] | None = None,
    affordance: dict[int, list[int]] | None = None,
) -> KnowledgeBase:
    """Small synthetic knowledge base; affordance defaults to everything."""
    if affordance is None:
        affordance = {o: list(range(n_actions)) for o in range(n_objects)}
    if correlation is None:
        correlation = {}
    return build_knowledge_base(
        {
            "version": 1,
            "actions": [
                {"action_id": a, "name": f"act{a}", "gerund": f"doing {a}"}
                for a in range(n_actions)
            ],
            "objects": [
                {"object_id": o, "name": f"obj{o}", "article_phrase": f"an obj {o}"}
                for o in range(n_objects)
            ],
            "hoi_categories": [
                {"hoi_id": k, "action_id": a, "object_id": o}
                for k, (a, o) in enumerate(hoi_pairs)
            ],
            "correlation": {str(k): v for k, v in correlation.items()},
            "affordance": {str(k): v for k, v in affordance.items()},
        }
    )


def random_kb(rng: random.Random) -> KnowledgeBase:
    """Random small knowledge base; category 0 is always the person."""
    n_actions = rng.randint(2, 4)
    n_objects = rng.randint(2, 4)  # including person
    pairs = [(a, o) for a in range(n_actions) for o in range(n_objects)]
    rng.shuffle(pairs)
    n_hoi = rng.randint(2, min(6, len(pairs)))
    hoi_pairs = pairs[:n_hoi]
    correlation = {}
    for k in range(n_hoi):
        if rng.random() < 0.7:
            members = rng.sample(range(n_hoi), rng.randint(1, n_hoi))
            correlation[k] = members  # loader inserts the self-reference if missing
    affordance = {
        o: rng.sample(range(n_actions), rng.randint(1, n_actions)) for o in range(n_objects)
    }
    return make_kb(n_actions, n_objects, hoi_pairs, correlation, affordance)

"""Vocabularies, the interaction category table, and the two lookup dictionaries.

Everything here is plain curated data loaded from a single JSON document:
an action vocabulary, an object vocabulary, the table of (action, object)
interaction categories, a correlation dictionary (interaction -> strongly
co-occurring interactions) and an affordance dictionary (object -> actions
that object plausibly admits).

Gerunds and article phrases are stored, never conjugated in code: English
is irregular enough ("sit on" -> "sitting on") that generating them would
trade correctness for cleverness.  Categories whose phrasing does not fit
the stock sentence patterns carry explicit per-category template overrides.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from .errors import InputError, ValidationError

log = logging.getLogger(__name__)

KB_VERSION = 1


@dataclass(frozen=True)
class ActionEntry:
    action_id: int
    name: str
    gerund: str


@dataclass(frozen=True)
class ObjectEntry:
    object_id: int
    name: str
    article_phrase: str


@dataclass(frozen=True)
class HoiCategory:
    hoi_id: int
    action_id: int
    object_id: int
    template_override_t1: str | None = None
    template_override_t2: str | None = None


@dataclass(frozen=True)
class KnowledgeBase:
    """Immutable bundle of vocabularies and lookup tables.

    Safe to share across any number of worker threads once constructed.
    """

    actions: tuple[ActionEntry, ...]
    objects: tuple[ObjectEntry, ...]
    hoi_categories: tuple[HoiCategory, ...]
    correlation: dict[int, tuple[int, ...]]
    affordance: dict[int, tuple[int, ...]]
    # hoi ids a candidate pair of a given object category may realize:
    # same object AND action allowed by the affordance table.
    allowed_by_object: dict[int, tuple[int, ...]] = field(default_factory=dict)

    @property
    def n_actions(self) -> int:
        return len(self.actions)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_hoi_categories(self) -> int:
        return len(self.hoi_categories)


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValidationError(message)


def _check_int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValidationError(f"{what} must be an integer, got {value!r}")
    return value


def _parse_actions(raw) -> tuple[ActionEntry, ...]:
    _require(isinstance(raw, list), "actions must be a list")
    entries = []
    for position, item in enumerate(raw):
        _require(isinstance(item, dict), f"action entry at position {position} must be an object")
        action_id = _check_int(item.get("action_id"), "action_id")
        _require(action_id == position,
                 f"action_id {action_id} at position {position} breaks contiguous ordering")
        name = item.get("name")
        gerund = item.get("gerund")
        _require(isinstance(name, str) and name != "", f"action {action_id} has no name")
        _require(isinstance(gerund, str) and gerund != "",
                 f"action {action_id} has an empty gerund")
        entries.append(ActionEntry(action_id, name, gerund))
    return tuple(entries)


def _parse_objects(raw) -> tuple[ObjectEntry, ...]:
    _require(isinstance(raw, list), "objects must be a list")
    entries = []
    for position, item in enumerate(raw):
        _require(isinstance(item, dict), f"object entry at position {position} must be an object")
        object_id = _check_int(item.get("object_id"), "object_id")
        _require(object_id == position,
                 f"object_id {object_id} at position {position} breaks contiguous ordering")
        name = item.get("name")
        phrase = item.get("article_phrase")
        _require(isinstance(name, str) and name != "", f"object {object_id} has no name")
        _require(isinstance(phrase, str) and phrase != "",
                 f"object {object_id} has an empty article_phrase")
        entries.append(ObjectEntry(object_id, name, phrase))
    return tuple(entries)


def _parse_hoi_categories(raw, n_actions: int, n_objects: int) -> tuple[HoiCategory, ...]:
    _require(isinstance(raw, list), "hoi_categories must be a list")
    entries = []
    seen_pairs = set()
    for position, item in enumerate(raw):
        _require(isinstance(item, dict), f"hoi entry at position {position} must be an object")
        hoi_id = _check_int(item.get("hoi_id"), "hoi_id")
        _require(hoi_id == position,
                 f"hoi_id {hoi_id} at position {position} breaks contiguous ordering")
        action_id = _check_int(item.get("action_id"), f"hoi {hoi_id} action_id")
        object_id = _check_int(item.get("object_id"), f"hoi {hoi_id} object_id")
        _require(0 <= action_id < n_actions, f"unknown action_id {action_id} in hoi {hoi_id}")
        _require(0 <= object_id < n_objects, f"unknown object_id {object_id} in hoi {hoi_id}")
        pair = (action_id, object_id)
        _require(pair not in seen_pairs,
                 f"duplicate (action_id, object_id) pair {pair} in hoi {hoi_id}")
        seen_pairs.add(pair)
        t1 = item.get("template_override_t1")
        t2 = item.get("template_override_t2")
        _require(t1 is None or isinstance(t1, str), f"hoi {hoi_id} template_override_t1 not a string")
        _require(t2 is None or isinstance(t2, str), f"hoi {hoi_id} template_override_t2 not a string")
        entries.append(HoiCategory(hoi_id, action_id, object_id, t1, t2))
    return tuple(entries)


def _parse_id_key(key: str, what: str) -> int:
    try:
        return int(key, 10)
    except ValueError:
        raise ValidationError(f"{what} key {key!r} is not a decimal integer") from None


def _parse_correlation(raw, n_hoi: int) -> dict[int, tuple[int, ...]]:
    _require(isinstance(raw, dict), "correlation must be an object")
    table: dict[int, tuple[int, ...]] = {}
    for key, values in raw.items():
        hoi_id = _parse_id_key(key, "correlation")
        _require(0 <= hoi_id < n_hoi, f"unknown hoi_id {hoi_id} as correlation key")
        _require(isinstance(values, list), f"correlation set of hoi {hoi_id} must be a list")
        members: list[int] = []
        for value in values:
            member = _check_int(value, f"correlation member of hoi {hoi_id}")
            _require(0 <= member < n_hoi,
                     f"unknown hoi_id {member} in correlation set of hoi {hoi_id}")
            _require(member not in members,
                     f"duplicate hoi_id {member} in correlation set of hoi {hoi_id}")
            members.append(member)
        if hoi_id not in members:
            # The top-1 interaction must stay amplifiable alongside its
            # correlates, so the key is always a member of its own set.
            members.insert(0, hoi_id)
            log.warning("correlation set of hoi %d omitted itself; self-reference inserted", hoi_id)
        table[hoi_id] = tuple(members)
    return table


def _parse_affordance(raw, n_actions: int, n_objects: int) -> dict[int, tuple[int, ...]]:
    _require(isinstance(raw, dict), "affordance must be an object")
    table: dict[int, tuple[int, ...]] = {}
    for key, values in raw.items():
        object_id = _parse_id_key(key, "affordance")
        _require(0 <= object_id < n_objects, f"unknown object_id {object_id} as affordance key")
        _require(isinstance(values, list), f"affordance set of object {object_id} must be a list")
        members: list[int] = []
        for value in values:
            member = _check_int(value, f"affordance member of object {object_id}")
            _require(0 <= member < n_actions, f"unknown action_id {member}")
            _require(member not in members,
                     f"duplicate action_id {member} in affordance set of object {object_id}")
            members.append(member)
        _require(len(members) > 0, f"empty affordance set for object_id {object_id}")
        table[object_id] = tuple(members)
    for object_id in range(n_objects):
        _require(object_id in table, f"missing affordance entry for object_id {object_id}")
    return table


def build_knowledge_base(document: dict) -> KnowledgeBase:
    """Validate a parsed knowledge-base document and assemble the tables."""
    _require(isinstance(document, dict), "knowledge base must be a JSON object")
    _require(document.get("version") == KB_VERSION,
             f"unsupported knowledge-base version {document.get('version')!r}")
    actions = _parse_actions(document.get("actions", []))
    objects = _parse_objects(document.get("objects", []))
    hois = _parse_hoi_categories(document.get("hoi_categories", []), len(actions), len(objects))
    correlation = _parse_correlation(document.get("correlation", {}), len(hois))
    affordance = _parse_affordance(document.get("affordance", {}), len(actions), len(objects))

    allowed_by_object = {
        obj.object_id: tuple(
            hoi.hoi_id
            for hoi in hois
            if hoi.object_id == obj.object_id and hoi.action_id in affordance[obj.object_id]
        )
        for obj in objects
    }
    return KnowledgeBase(
        actions=actions,
        objects=objects,
        hoi_categories=hois,
        correlation=correlation,
        affordance=affordance,
        allowed_by_object=allowed_by_object,
    )


def load_knowledge_base(path: str | Path) -> KnowledgeBase:
    """Load and fully validate the knowledge-base JSON document at `path`."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read knowledge base {path}: {exc}") from exc
    try:
        document = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"knowledge base {path} is not valid JSON: {exc}") from exc
    return build_knowledge_base(document)


def knowledge_base_document(kb: KnowledgeBase) -> dict:
    """Canonical serializable form; load(save(kb)) reproduces `kb` exactly."""
    hois = []
    for hoi in kb.hoi_categories:
        entry: dict = {"hoi_id": hoi.hoi_id, "action_id": hoi.action_id, "object_id": hoi.object_id}
        if hoi.template_override_t1 is not None:
            entry["template_override_t1"] = hoi.template_override_t1
        if hoi.template_override_t2 is not None:
            entry["template_override_t2"] = hoi.template_override_t2
        hois.append(entry)
    return {
        "version": KB_VERSION,
        "actions": [
            {"action_id": a.action_id, "name": a.name, "gerund": a.gerund} for a in kb.actions
        ],
        "objects": [
            {"object_id": o.object_id, "name": o.name, "article_phrase": o.article_phrase}
            for o in kb.objects
        ],
        "hoi_categories": hois,
        "correlation": {str(k): list(v) for k, v in sorted(kb.correlation.items())},
        "affordance": {str(k): list(v) for k, v in sorted(kb.affordance.items())},
    }


def save_knowledge_base(kb: KnowledgeBase, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(knowledge_base_document(kb), indent=2) + "\n", encoding="utf-8"
    )


def render_templates(kb: KnowledgeBase) -> list[dict]:
    """Sentence pair per interaction category, ordered by hoi_id.

    The long form names the object ("a photo of a person riding a
    motorcycle"); the short form keeps only the verb phrase ("a photo of a
    person riding").  Short forms repeat across categories sharing a verb.
    Per-category overrides are passed through verbatim.
    """
    rows = []
    for hoi in kb.hoi_categories:
        gerund = kb.actions[hoi.action_id].gerund
        phrase = kb.objects[hoi.object_id].article_phrase
        t1 = hoi.template_override_t1
        if t1 is None:
            t1 = f"a photo of a person {gerund} {phrase}"
        t2 = hoi.template_override_t2
        if t2 is None:
            t2 = f"a photo of a person {gerund}"
        rows.append({"hoi_id": hoi.hoi_id, "t1": t1, "t2": t2})
    return rows


def lookup_correlated(kb: KnowledgeBase, hoi_id: int) -> tuple[int, ...]:
    """Interactions strongly co-occurring with `hoi_id`, always including itself."""
    if not 0 <= hoi_id < kb.n_hoi_categories:
        raise ValidationError(
            f"hoi_id {hoi_id} out of range [0, {kb.n_hoi_categories})"
        )
    return kb.correlation.get(hoi_id, (hoi_id,))


def lookup_affordance(kb: KnowledgeBase, object_id: int) -> tuple[int, ...]:
    """Actions the object category plausibly admits; never empty."""
    if not 0 <= object_id < kb.n_objects:
        raise ValidationError(f"object_id {object_id} out of range [0, {kb.n_objects})")
    return kb.affordance[object_id]


def allowed_hoi_ids(kb: KnowledgeBase, object_id: int) -> tuple[int, ...]:
    """Interaction categories a pair with this object category may realize."""
    if not 0 <= object_id < kb.n_objects:
        raise ValidationError(f"object_id {object_id} out of range [0, {kb.n_objects})")
    return kb.allowed_by_object[object_id]

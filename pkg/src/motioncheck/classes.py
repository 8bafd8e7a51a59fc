"""Semantic class tables mapping class ids to motion disposition."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Dict, Optional, Union

from .errors import MalformedLine, UnknownClassId


class MotionKind(enum.Enum):
    """How a semantic class constrains per-point motion."""

    STATIC_BY_DEFINITION = "static_by_definition"
    POTENTIALLY_DYNAMIC = "potentially_dynamic"
    IGNORE = "ignore"


_KIND_BY_NAME = {k.value: k for k in MotionKind}


@dataclass
class SemanticClassTable:
    """Lookup from integer class id to name and motion kind.

    ``default`` applies to ids missing from the table; without one,
    lookups of unknown ids raise.
    """

    names: Dict[int, str] = field(default_factory=dict)
    kinds: Dict[int, MotionKind] = field(default_factory=dict)
    default: Optional[MotionKind] = None

    def add(self, class_id: int, name: str, kind: MotionKind) -> None:
        self.names[int(class_id)] = name
        self.kinds[int(class_id)] = kind

    def kind(self, class_id: int) -> MotionKind:
        k = self.kinds.get(int(class_id))
        if k is None:
            if self.default is None:
                raise UnknownClassId(f"class id {class_id} not in table and no default set")
            return self.default
        return k

    def name(self, class_id: int) -> str:
        return self.names.get(int(class_id), f"class_{class_id}")

    def __contains__(self, class_id: int) -> bool:
        return int(class_id) in self.kinds


def read_class_table(path: Union[str, Path]) -> SemanticClassTable:
    """Parse a class table file.

    Lines are ``<id> <name> <kind>``; ``default <kind>`` sets the
    fallback; ``#`` starts a comment; blank lines are skipped.
    """
    table = SemanticClassTable()
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "default":
            if len(parts) != 2 or parts[1] not in _KIND_BY_NAME:
                raise MalformedLine(f"{path}:{lineno}: bad default line {raw!r}")
            table.default = _KIND_BY_NAME[parts[1]]
            continue
        if len(parts) != 3:
            raise MalformedLine(f"{path}:{lineno}: expected '<id> <name> <kind>', got {raw!r}")
        id_text, name, kind_text = parts
        try:
            class_id = int(id_text)
        except ValueError:
            raise MalformedLine(f"{path}:{lineno}: class id {id_text!r} is not an integer")
        if kind_text not in _KIND_BY_NAME:
            raise MalformedLine(
                f"{path}:{lineno}: unknown motion kind {kind_text!r}"
                f" (expected one of {sorted(_KIND_BY_NAME)})"
            )
        table.add(class_id, name, _KIND_BY_NAME[kind_text])
    return table


def semantickitti_table() -> SemanticClassTable:
    """The bundled SemanticKITTI class table."""
    with resources.as_file(
        resources.files("motioncheck").joinpath("data/semantickitti_classes.cfg")
    ) as p:
        return read_class_table(p)

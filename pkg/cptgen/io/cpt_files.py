"""The ``#cpt v1`` text format.

    #cpt v1
    e1r1,e1r2,...                      combined cause labels
    #arities 3,3                       optional
    #parents E=e1|e2|e3;R=r1|r2|r3     optional
    #effect Z                          optional
    z1,p11,p12,...                     one row per effect state

Values are written with 17 significant digits so a load returns the saved
floats exactly.
"""

from pathlib import Path

import numpy as np
import structlog

from cptgen.core.errors import CptError, DimensionError, IoError, ParseError, ValidationError
from cptgen.probability.tables import COLUMN_TOLERANCE, Cpt
from cptgen.probability.vectors import NodeSpec, ProbVector, combined_labels, make_prob_vector

logger = structlog.get_logger("cptgen")

MAGIC = "#cpt v1"
_RESERVED = (",", "|", ";", "=", "\n", "\r")


def _check_label(label: str, what: str) -> None:
    if any(ch in label for ch in _RESERVED) or label.startswith("#") or label != label.strip():
        raise ValidationError(f"{what} label {label!r} cannot be written to a CPT file")


def _format(value: float) -> str:
    return format(float(value), ".17g")


def save_cpt(cpt: Cpt, path: str | Path) -> None:
    """Write ``cpt`` in the ``#cpt v1`` format with LF line endings.

    Raises:
        ValidationError: If a label contains a reserved character.
        IoError: If the file cannot be written.
    """
    for label in cpt.cause_labels:
        _check_label(label, "cause")
    for label in cpt.effect_labels:
        _check_label(label, "effect")

    lines = [MAGIC, ",".join(cpt.cause_labels)]
    if cpt.arities is not None:
        lines.append("#arities " + ",".join(str(a) for a in cpt.arities))
    if cpt.parents is not None:
        for parent in cpt.parents:
            _check_label(parent.name, "parent")
            for state in parent.labels:
                _check_label(state, "parent state")
        lines.append("#parents " + ";".join(f"{p.name}={'|'.join(p.labels)}" for p in cpt.parents))
    _check_label(cpt.effect_name, "effect node")
    lines.append(f"#effect {cpt.effect_name}")
    for label, row in zip(cpt.effect_labels, cpt.entries, strict=True):
        lines.append(",".join([label, *(_format(v) for v in row)]))

    try:
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            f.write("\n".join(lines) + "\n")
    except OSError as e:
        raise IoError(f"cannot write CPT: {e.strerror}", path=str(path)) from e
    logger.info("CPT saved", path=str(path), shape=cpt.shape)


def _parse_arities(text: str, line: int) -> tuple[int, ...]:
    try:
        arities = tuple(int(a) for a in text.split(","))
    except ValueError:
        raise ParseError(f"bad arity list {text!r}", row=line) from None
    if any(a < 1 for a in arities):
        raise ParseError(f"arities must be positive, got {arities}", row=line)
    return arities


def _parse_parents(text: str, line: int) -> tuple[NodeSpec, ...]:
    parents = []
    for item in text.split(";"):
        name, sep, states = item.partition("=")
        if not sep:
            raise ParseError(f"parent entry {item!r} is not NAME=state|state", row=line)
        parents.append(NodeSpec(name, tuple(states.split("|"))))
    return tuple(parents)


def _parse_row(text: str, line: int, n: int) -> tuple[str, list[float]]:
    fields = text.split(",")
    if len(fields) != n + 1:
        raise ParseError(f"row has {len(fields) - 1} probabilities, expected {n}", row=line)
    label, *cells = fields
    values = []
    for cell, column in zip(cells, range(1, n + 1), strict=True):
        try:
            values.append(float(cell))
        except ValueError:
            raise ParseError(f"not a number: {cell!r}", row=line, column=column) from None
    return label, values


def load_cpt(path: str | Path, tolerance: float = COLUMN_TOLERANCE) -> Cpt:
    """Read a ``#cpt v1`` file; LF and CRLF line endings are accepted.

    Columns may miss one by up to ``tolerance``; such columns are renormalized.

    Raises:
        IoError: If the file cannot be read.
        ParseError: If the layout is malformed.
        ValidationError: If an entry is outside [0, 1] or a column does not sum
            to one within ``tolerance``.
    """
    try:
        with open(path, encoding="utf-8", newline="") as f:
            text = f.read()
    except OSError as e:
        raise IoError(f"cannot read CPT: {e.strerror}", path=str(path)) from e
    except UnicodeDecodeError as e:
        raise ParseError(f"not UTF-8 text: {e.reason}", path=str(path)) from e

    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()

    try:
        if not lines or lines[0].strip() != MAGIC:
            raise ParseError(f"first line must be {MAGIC!r}", row=1)
        if len(lines) < 3:
            raise ParseError("missing cause labels or probability rows")
        cause_labels = tuple(lines[1].split(","))

        arities = None
        parents = None
        effect_name = "Z"
        line = 2
        while line < len(lines) and lines[line].startswith("#"):
            directive, _, value = lines[line].partition(" ")
            if directive == "#arities":
                arities = _parse_arities(value, line + 1)
            elif directive == "#parents":
                parents = _parse_parents(value, line + 1)
            elif directive == "#effect":
                effect_name = value.strip()
            else:
                raise ParseError(f"unknown directive {directive!r}", row=line + 1)
            line += 1

        if parents is not None and combined_labels([p.labels for p in parents]) != cause_labels:
            raise ParseError("cause labels disagree with the #parents line", row=2)

        rows = [_parse_row(lines[i], i + 1, len(cause_labels)) for i in range(line, len(lines))]
        if not rows:
            raise ParseError("no probability rows")

        cpt = Cpt(
            effect_labels=tuple(label for label, _ in rows),
            cause_labels=cause_labels,
            entries=np.array([values for _, values in rows], dtype=np.float64),
            arities=arities,
            parents=parents,
            effect_name=effect_name,
            tolerance=tolerance,
        )
    except CptError as e:
        raise e.with_path(path) from None

    logger.info("CPT loaded", path=str(path), shape=cpt.shape)
    return cpt


def load_weights(path: str | Path, labels: tuple[str, ...], tolerance: float) -> ProbVector:
    """Cause weight vector for KL and Euclidean comparison: comma-separated numbers.

    Raises:
        IoError: If the file cannot be read.
        ParseError: If a value is not a number.
        DimensionError: If the count differs from ``labels``.
        ValidationError: If the values are not a probability vector.
    """
    try:
        with open(path, encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise IoError(f"cannot read weights: {e.strerror}", path=str(path)) from e

    cells = [c.strip() for line in text.splitlines() for c in line.split(",") if c.strip()]
    try:
        try:
            values = [float(c) for c in cells]
        except ValueError as e:
            raise ParseError(f"bad weight value: {e}") from None
        if len(values) != len(labels):
            raise DimensionError(f"{len(values)} weights for {len(labels)} cause states")
        return make_prob_vector(labels, values, tolerance)
    except CptError as e:
        raise e.with_path(path) from None

"""CSV observation tables: schema, bit-exact loading, writing and deduplication.

A table has one column per node state, named ``node:state``, grouped by node
in schema order with the effect node last. An optional leading ``site``
column identifies where a row was elicited and is ignored for computation.
"""

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pandas as pd
import structlog
import yaml
from pydantic import BaseModel, ConfigDict, Field
from pydantic import ValidationError as PydanticValidationError

from cptgen.core.errors import CptError, IoError, ParseError, SchemaError, ValidationError
from cptgen.generation.observations import ObservationSet
from cptgen.probability.vectors import DEFAULT_TOLERANCE, NodeSpec

logger = structlog.get_logger("cptgen")

SITE_COLUMN = "site"
_EXACT_SUM = 1e-12


@dataclass(frozen=True)
class ObservationSchema:
    """Ordered nodes of an observation table; the last node is the effect."""

    nodes: tuple[NodeSpec, ...]

    def __post_init__(self) -> None:
        nodes = tuple(self.nodes)
        if len(nodes) < 2:
            raise SchemaError("a schema needs at least one parent and one effect node")
        names = [n.name for n in nodes]
        if len(set(names)) != len(names):
            raise SchemaError(f"duplicate node names in schema: {names}")
        object.__setattr__(self, "nodes", nodes)

    @property
    def parents(self) -> tuple[NodeSpec, ...]:
        return self.nodes[:-1]

    @property
    def effect(self) -> NodeSpec:
        return self.nodes[-1]

    @property
    def effect_node(self) -> str:
        return self.effect.name

    def columns(self) -> list[str]:
        """Header columns in table order, without the site column."""
        return [f"{node.name}:{state}" for node in self.nodes for state in node.labels]


def _split_column(column: str, position: int) -> tuple[str, str]:
    node, sep, state = column.partition(":")
    if not sep or not node or not state:
        raise SchemaError(f"header column {column!r} is not of the form node:state", column=position)
    return node, state


def infer_schema(header: Sequence[str]) -> ObservationSchema:
    """Schema from a ``node:state`` header; nodes keep their order of first appearance.

    Raises:
        SchemaError: If a column is malformed or a node's columns are not contiguous.
    """
    columns = list(header)
    offset = 1 if columns and columns[0] == SITE_COLUMN else 0
    nodes: dict[str, list[str]] = {}
    previous = None
    for position, column in enumerate(columns[offset:], start=offset + 1):
        node, state = _split_column(column, position)
        if node != previous and node in nodes:
            raise SchemaError(f"columns of node {node} are not contiguous", column=position, node=node)
        nodes.setdefault(node, []).append(state)
        previous = node
    return ObservationSchema(tuple(NodeSpec(name, tuple(states)) for name, states in nodes.items()))


class _NodeEntry(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str = Field(..., min_length=1)
    states: list[str] = Field(..., min_length=1)


class _SchemaFile(BaseModel):
    model_config = ConfigDict(extra="forbid")

    nodes: list[_NodeEntry] = Field(..., min_length=2)


def load_schema_file(path: str | Path) -> ObservationSchema:
    """Schema from a YAML file listing ``nodes`` with ``name`` and ``states``, effect last.

    Raises:
        IoError: If the file cannot be read.
        SchemaError: If the content does not describe a valid schema.
    """
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise IoError(f"cannot read schema: {e.strerror}", path=str(path)) from e
    except yaml.YAMLError as e:
        raise ParseError(f"invalid YAML: {e}", path=str(path)) from e

    try:
        parsed = _SchemaFile.model_validate(data)
        return ObservationSchema(tuple(NodeSpec(n.name, tuple(n.states)) for n in parsed.nodes))
    except PydanticValidationError as e:
        raise SchemaError(f"invalid schema file: {e.errors()[0]['msg']}", path=str(path)) from e
    except CptError as e:
        raise e.with_path(path) from None


def _read_table(path: str | Path) -> pd.DataFrame:
    try:
        return pd.read_csv(
            path,
            header=None,
            dtype=str,
            keep_default_na=False,
            skip_blank_lines=True,
            encoding="utf-8",
        )
    except FileNotFoundError as e:
        raise IoError("file not found", path=str(path)) from e
    except pd.errors.EmptyDataError as e:
        raise ParseError("file is empty", path=str(path)) from e
    except pd.errors.ParserError as e:
        raise ParseError(f"malformed CSV: {e}", path=str(path)) from e
    except (OSError, UnicodeDecodeError) as e:
        raise IoError(f"cannot read file: {e}", path=str(path)) from e


def _check_header(header: list[str], schema: ObservationSchema) -> None:
    expected = schema.columns()
    if len(header) != len(expected):
        raise SchemaError(f"header has {len(header)} state columns, schema needs {len(expected)}")
    for position, (found, wanted) in enumerate(zip(header, expected, strict=True), start=1):
        if found != wanted:
            raise SchemaError(f"expected column {wanted!r}, found {found!r}", column=position)


def _parse_values(cells: pd.DataFrame, header: list[str], offset: int) -> np.ndarray:
    values = np.empty(cells.shape, dtype=np.float64)
    for r, row in enumerate(cells.itertuples(index=False), start=1):
        for c, cell in enumerate(row):
            if not isinstance(cell, str) or not cell.strip():
                raise ParseError("missing value", row=r, column=header[c] if c < len(header) else c + offset + 1)
            try:
                values[r - 1, c] = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=r, column=header[c]) from None
    return values


def _validate_block(
    block: np.ndarray,
    node: NodeSpec,
    tolerance: float,
) -> np.ndarray:
    """Row-wise probability checks; small negatives are clamped and rows renormalized."""
    bad = np.flatnonzero(~np.isfinite(block).all(axis=1))
    if bad.size:
        raise ValidationError("non-finite probability", row=int(bad[0]) + 1, node=node.name)
    bad = np.flatnonzero((block < -tolerance).any(axis=1))
    if bad.size:
        r = int(bad[0])
        raise ValidationError(
            f"negative probability {float(block[r].min())!r} beyond tolerance {tolerance}",
            row=r + 1,
            node=node.name,
        )
    sums = block.sum(axis=1)
    bad = np.flatnonzero(np.abs(sums - 1.0) > tolerance)
    if bad.size:
        r = int(bad[0])
        raise ValidationError(
            f"probabilities sum to {float(sums[r])!r}, off by more than {tolerance}",
            row=r + 1,
            node=node.name,
        )
    # Rows within float rounding of the simplex keep their exact values
    needs_fix = ((block < 0.0) | (block > 1.0)).any(axis=1) | (np.abs(sums - 1.0) > _EXACT_SUM)
    if needs_fix.any():
        fixed = np.clip(block[needs_fix], 0.0, None)
        block = block.copy()
        block[needs_fix] = np.clip(fixed / fixed.sum(axis=1, keepdims=True), 0.0, 1.0)
    return block


def load_observations(
    path: str | Path,
    schema: ObservationSchema | None = None,
    tolerance: float = DEFAULT_TOLERANCE,
) -> ObservationSet:
    """Load an observation table, validating every node block row by row.

    Values are parsed from their text with ``float`` so the loaded numbers are
    exactly the written ones. Row numbers in errors and on the result are the
    1-based data rows after the header.

    Args:
        path: CSV file, UTF-8, comma separated, LF or CRLF line endings.
        schema: Expected nodes; inferred from the header when omitted.
        tolerance: Accepted slack on negativity and on each block's sum.

    Raises:
        IoError: If the file cannot be read.
        ParseError: If the CSV is malformed or a value is not a number.
        SchemaError: If the header does not match the schema.
        ValidationError: If a block row is not a probability vector.
    """
    try:
        table = _read_table(path)
        if table.shape[0] < 2:
            raise ParseError("no data rows after the header")
        header = [str(h).strip() for h in table.iloc[0].tolist()]
        has_site = header[0] == SITE_COLUMN
        offset = 1 if has_site else 0
        state_header = header[offset:]

        if schema is None:
            schema = infer_schema(header)
        else:
            _check_header(state_header, schema)

        data = table.iloc[1:].reset_index(drop=True)
        values = _parse_values(data.iloc[:, offset:], state_header, offset)

        blocks = []
        start = 0
        for node in schema.nodes:
            block = values[:, start:start + node.arity]
            blocks.append(_validate_block(block, node, tolerance))
            start += node.arity

        sites = tuple(str(s) for s in data.iloc[:, 0]) if has_site else None
        observations = ObservationSet(
            parents=schema.parents,
            effect=schema.effect,
            parent_blocks=tuple(blocks[:-1]),
            effect_block=blocks[-1],
            row_numbers=tuple(range(1, values.shape[0] + 1)),
            sites=sites,
        )
    except CptError as e:
        if e.path is None:
            e.with_path(path)
        raise

    logger.info("Observations loaded", path=str(path), rows=observations.row_count, nodes=len(schema.nodes))
    return observations


def _schema_of(observations: ObservationSet) -> ObservationSchema:
    return ObservationSchema((*observations.parents, observations.effect))


def save_observations(observations: ObservationSet, path: str | Path) -> None:
    """Write an observation set with shortest round-trip float text and LF line endings.

    Raises:
        IoError: If the file cannot be written.
    """
    columns = _schema_of(observations).columns()
    values = observations.all_blocks()
    frame = pd.DataFrame([[repr(float(v)) for v in row] for row in values], columns=columns)
    if observations.sites is not None:
        frame.insert(0, SITE_COLUMN, list(observations.sites))
    try:
        frame.to_csv(path, index=False, lineterminator="\n", encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write observations: {e.strerror}", path=str(path)) from e
    logger.info("Observations saved", path=str(path), rows=observations.row_count)


def dedup(observations: ObservationSet) -> ObservationSet:
    """Drop rows whose full parent-and-effect value tuple repeats an earlier row.

    Equality is exact on the values; the first occurrence is kept in place.
    """
    duplicated = pd.DataFrame(observations.all_blocks()).duplicated(keep="first").to_numpy()
    if not duplicated.any():
        return observations
    keep = np.flatnonzero(~duplicated)
    logger.info(
        "Duplicate observations removed",
        rows=observations.row_count,
        distinct=int(keep.size),
        removed=int(duplicated.sum()),
    )
    return observations.take(keep.tolist())

"""Reading and writing scenario files.

Scenarios are YAML documents validated against ``data.scenario_schema``.
Binary field blobs are raw little-endian float64 arrays in row-major order,
referenced by a path relative to the scenario file.
"""

import os
import logging

from typing import Union

import numpy as np
import pydantic
import yaml

from core.exceptions import ExpressionError
from core.exceptions import ScenarioError
from data.scenario_schema import BlobRef
from data.scenario_schema import ScenarioFile
from utils.expression_parser import parse_expression


logger = logging.getLogger(__name__)

BLOB_DTYPE = "<f8"


def load_scenario(path: str) -> ScenarioFile:
    """Load, validate and expression-check one scenario file.

    Args:
        path: Scenario YAML path.
    """

    if not os.path.isfile(path):
        raise ScenarioError("scenario", f"file not found: {path}")
    with open(path, "r", encoding = "utf-8") as fp:
        try:
            data = yaml.safe_load(fp)
        except yaml.YAMLError as exc:
            raise ScenarioError("scenario", f"invalid YAML: {exc}") from exc
    scenario = parse_scenario(data = data, source_dir = os.path.dirname(os.path.abspath(path)))
    logger.info("Loaded scenario %s from %s", scenario.name, path)
    return scenario


def parse_scenario(data, source_dir: str = ".") -> ScenarioFile:
    """Validate a scenario mapping.

    Schema violations become ``ScenarioError`` naming the first offending
    field; malformed expressions raise ``ExpressionError`` with the field path
    prefixed to the message.

    Args:
        data: Parsed YAML document.
        source_dir: Directory that blob paths are relative to.
    """

    if not isinstance(data, dict):
        raise ScenarioError("scenario", "top level must be a mapping")
    try:
        scenario = ScenarioFile.model_validate(data)
    except pydantic.ValidationError as exc:
        first = exc.errors()[0]
        field = ".".join(str(item) for item in first.get("loc", ())) or "scenario"
        raise ScenarioError(field, first.get("msg", "invalid value")) from exc

    for field, text, variables in scenario.expression_sites():
        try:
            parse_expression(text, variables = variables)
        except ExpressionError as exc:
            raise ExpressionError(f"{field}: {exc.message}", exc.text, exc.line, exc.column) from exc
    return scenario.with_source_dir(source_dir)


def dump_scenario(scenario: ScenarioFile) -> str:
    """Serialize a scenario to YAML text.

    Args:
        scenario: Scenario to serialize.
    """

    data = scenario.model_dump(mode = "json", exclude_none = True)
    return yaml.safe_dump(data, sort_keys = False, allow_unicode = True)


def save_scenario(scenario: ScenarioFile, path: str) -> None:
    """Write a scenario as YAML.

    Blob references are written unchanged, so blobs must sit at the same
    relative paths next to the new file.

    Args:
        scenario: Scenario to save.
        path: Output path.
    """

    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok = True)
    with open(path, "w", encoding = "utf-8") as fp:
        fp.write(dump_scenario(scenario))
    logger.info("Saved scenario %s to %s", scenario.name, path)


def load_blob(ref: BlobRef, source_dir: str, field: str) -> np.ndarray:
    """Read one binary blob and reshape it.

    Args:
        ref: Blob reference.
        source_dir: Directory the reference is relative to.
        field: Scenario field path, for error messages.
    """

    path = ref.blob if os.path.isabs(ref.blob) else os.path.join(source_dir, ref.blob)
    if not os.path.isfile(path):
        raise ScenarioError(field, f"blob not found: {ref.blob}")
    values = np.fromfile(path, dtype = BLOB_DTYPE)
    expected = int(np.prod(ref.shape))
    if values.size != expected:
        raise ScenarioError(
            field,
            f"blob {ref.blob} holds {values.size} values, shape {ref.shape} needs {expected}"
        )
    return values.reshape(ref.shape).astype(float)


def save_blob(values: Union[np.ndarray, list], path: str) -> BlobRef:
    """Write an array as a row-major little-endian float64 blob.

    Args:
        values: Array to write.
        path: Output path; the returned reference uses its base name.
    """

    array = np.ascontiguousarray(values, dtype = BLOB_DTYPE)
    array.tofile(path)
    return BlobRef(blob = os.path.basename(path), shape = list(array.shape))

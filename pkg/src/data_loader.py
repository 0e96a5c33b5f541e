"""
Data Loader Module
Parses and serializes instance files, nodes files and reports.

Instance files are UTF-8 JSON:
    {
      "kind": "circle" | "line",
      "radius": {"num": "1", "den": "1"},            (circle only)
      "half_angles": [...] | "m_parameters": [...]   (circle)
      "positions": [...]                             (line)
      "generator": {"distribution": ..., "seed": ..., "parameters": {...}}
    }

Accepted scalar forms:
- rationals: {"num": "3", "den": "4"}, decimal strings "0.75", "3/4", ints
- half-angles: any rational form (radians) or {"pi_num": 1, "pi_den": 4};
  both may be combined as {"pi_num", "pi_den", "num", "den"}

Every parse error is raised as InstanceParseError with the JSON path of the
offending field.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

from .arithmetic import GaussianRational, NumericContext, rational_from_json, rational_to_json
from .exceptions import InstanceParseError
from .geometry import Angle, CircleConfig, CollinearConfig, circle_from_m_parameters, normalize_circle, normalize_line

logger = logging.getLogger(__name__)

# Base directory for data files
FILES_DIR = Path(__file__).parent.parent / "data"
FIXTURES_DIR = FILES_DIR / "fixtures"

Kind = Literal["circle", "line"]
KINDS = ("circle", "line")


# =============================================================================
# INSTANCE MODEL
# =============================================================================

@dataclass
class Instance:
    """
    A parsed instance file.

    Attributes:
        kind: circle or line
        radius: Circle radius (1 for lines)
        half_angles: Raw half-angles in file order (circle)
        m_parameters: Pythagorean parameters in file order (circle, exact points)
        positions: Positions in file order (line)
        generator: Distribution, seed and parameters that produced the instance
    """
    kind: Kind
    radius: Fraction = Fraction(1)
    half_angles: Optional[List[Angle]] = None
    m_parameters: Optional[List[Fraction]] = None
    positions: Optional[List[Fraction]] = None
    generator: Dict[str, Any] = field(default_factory=dict)

    @property
    def count(self) -> int:
        for values in (self.half_angles, self.m_parameters, self.positions):
            if values is not None:
                return len(values)
        return 0

    def to_config(self, ctx: Optional[NumericContext] = None) -> Union[CircleConfig, CollinearConfig]:
        """
        Normalize into a sorted configuration.

        Raises:
            DegenerateConfiguration: coincident points
        """
        if self.kind == "line":
            return normalize_line(self.positions)
        if self.m_parameters is not None:
            return circle_from_m_parameters(self.m_parameters, self.radius, ctx)
        return normalize_circle(self.half_angles, self.radius, ctx)


# =============================================================================
# PARSING UTILITIES
# =============================================================================

def parse_rational_field(obj: Any, location: str) -> Fraction:
    """
    Parse an exact rational, reporting failures at location.

    Examples:
        >>> parse_rational_field({"num": "1", "den": "3"}, "radius")
        Fraction(1, 3)
        >>> parse_rational_field("0.25", "positions[0]")
        Fraction(1, 4)
    """
    if isinstance(obj, float):
        raise InstanceParseError("floats are not accepted; use a decimal string", location)
    try:
        return rational_from_json(obj)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise InstanceParseError(str(e), location) from e


def parse_angle(obj: Any, location: str) -> Angle:
    """
    Parse a half-angle: radians as a rational, or a rational multiple of π.

    Examples:
        >>> parse_angle({"pi_num": 1, "pi_den": 4}, "half_angles[1]")
        Angle(pi_multiple=Fraction(1, 4), offset=Fraction(0, 1), atan_of=None)
    """
    if isinstance(obj, dict) and ("pi_num" in obj or "pi_den" in obj):
        unknown = set(obj) - {"pi_num", "pi_den", "num", "den"}
        if unknown:
            raise InstanceParseError(f"unexpected keys {sorted(unknown)}", location)
        try:
            pi_den = int(obj.get("pi_den", 1))
            pi_num = int(obj["pi_num"])
        except (KeyError, ValueError, TypeError) as e:
            raise InstanceParseError(f"bad multiple of pi: {e}", location) from e
        if pi_den <= 0:
            raise InstanceParseError(f"pi_den must be positive, got {pi_den}", location)
        offset = Fraction(0)
        if "num" in obj or "den" in obj:
            offset = parse_rational_field({"num": obj.get("num"), "den": obj.get("den", "1")}, location)
        return Angle(pi_multiple=Fraction(pi_num, pi_den), offset=offset)
    return Angle(offset=parse_rational_field(obj, location))


def angle_to_json(angle: Angle) -> Dict[str, Any]:
    """Canonical form of a half-angle without an arctangent part."""
    if angle.atan_of is not None:
        raise ValueError("arctangent half-angles are stored as m_parameters")
    if angle.offset == 0:
        return {"pi_num": angle.pi_multiple.numerator, "pi_den": angle.pi_multiple.denominator}
    if angle.pi_multiple == 0:
        return rational_to_json(angle.offset)
    return {
        "pi_num": angle.pi_multiple.numerator,
        "pi_den": angle.pi_multiple.denominator,
        **rational_to_json(angle.offset),
    }


def _require_list(raw: Dict[str, Any], key: str) -> List[Any]:
    values = raw[key]
    if not isinstance(values, list):
        raise InstanceParseError(f"expected a list, got {type(values).__name__}", key)
    if len(values) < 2:
        raise InstanceParseError(f"needs at least two points, got {len(values)}", key)
    return values


def parse_instance(raw: Any) -> Instance:
    """
    Validate and convert a decoded instance document.

    Raises:
        InstanceParseError: with the JSON path of the first bad field
    """
    if not isinstance(raw, dict):
        raise InstanceParseError(f"expected an object, got {type(raw).__name__}", "$")

    kind = raw.get("kind")
    if kind not in KINDS:
        raise InstanceParseError(f"kind must be one of {KINDS}, got {kind!r}", "kind")

    generator = raw.get("generator", {})
    if not isinstance(generator, dict):
        raise InstanceParseError("expected an object", "generator")

    if kind == "line":
        stray = {"half_angles", "m_parameters", "radius"} & set(raw)
        if stray:
            raise InstanceParseError(f"not allowed for line instances: {sorted(stray)}", "$")
        if "positions" not in raw:
            raise InstanceParseError("missing field", "positions")
        positions = [
            parse_rational_field(value, f"positions[{index}]")
            for index, value in enumerate(_require_list(raw, "positions"))
        ]
        return Instance(kind="line", positions=positions, generator=generator)

    if "positions" in raw:
        raise InstanceParseError("not allowed for circle instances", "positions")
    radius = parse_rational_field(raw.get("radius", "1"), "radius")
    if radius <= 0:
        raise InstanceParseError(f"radius must be positive, got {radius}", "radius")

    has_angles = "half_angles" in raw
    has_ms = "m_parameters" in raw
    if has_angles == has_ms:
        raise InstanceParseError("exactly one of half_angles or m_parameters is required", "$")

    if has_ms:
        ms = [
            parse_rational_field(value, f"m_parameters[{index}]")
            for index, value in enumerate(_require_list(raw, "m_parameters"))
        ]
        return Instance(kind="circle", radius=radius, m_parameters=ms, generator=generator)

    angles = [
        parse_angle(value, f"half_angles[{index}]")
        for index, value in enumerate(_require_list(raw, "half_angles"))
    ]
    return Instance(kind="circle", radius=radius, half_angles=angles, generator=generator)


def instance_to_dict(instance: Instance) -> Dict[str, Any]:
    """Canonical document for an instance (field order is fixed)."""
    doc: Dict[str, Any] = {"kind": instance.kind}
    if instance.kind == "circle":
        doc["radius"] = rational_to_json(instance.radius)
        if instance.m_parameters is not None:
            doc["m_parameters"] = [rational_to_json(m) for m in instance.m_parameters]
        else:
            doc["half_angles"] = [angle_to_json(angle) for angle in instance.half_angles]
    else:
        doc["positions"] = [rational_to_json(x) for x in instance.positions]
    doc["generator"] = instance.generator
    return doc


def serialize_instance(instance: Instance) -> str:
    """Canonical text: two-space indented JSON with a trailing newline."""
    return json.dumps(instance_to_dict(instance), indent=2, ensure_ascii=False) + "\n"


def instance_digest(instance: Instance) -> str:
    """SHA-256 of the canonical text, hex encoded."""
    return hashlib.sha256(serialize_instance(instance).encode("utf-8")).hexdigest()


# =============================================================================
# FILE I/O
# =============================================================================

def _read_json(path: Union[str, Path]) -> Any:
    path = Path(path)
    if not path.exists():
        raise InstanceParseError(f"file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise InstanceParseError(e.msg, f"{path.name}:{e.lineno}:{e.colno}") from e
    except (OSError, UnicodeDecodeError) as e:
        raise InstanceParseError(str(e), path.name) from e


def load_instance(path: Union[str, Path]) -> Instance:
    """
    Load an instance file.

    Raises:
        InstanceParseError: missing file, bad JSON or invalid fields
    """
    logger.info(f"Loading instance from {path}")
    instance = parse_instance(_read_json(path))
    logger.info(f"Loaded {instance.kind} instance with {instance.count} points")
    return instance


def save_instance(instance: Instance, path: Union[str, Path]) -> str:
    """Write the canonical text and return its digest."""
    text = serialize_instance(instance)
    Path(path).write_text(text, encoding="utf-8")
    logger.info(f"Saved instance to {path}")
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_node(obj: Any, location: str) -> Union[Fraction, GaussianRational]:
    """A rational node, or a Gaussian rational {"re": ..., "im": ...}."""
    if isinstance(obj, dict) and set(obj) == {"re", "im"}:
        return GaussianRational(
            parse_rational_field(obj["re"], f"{location}.re"),
            parse_rational_field(obj["im"], f"{location}.im"),
        )
    return parse_rational_field(obj, location)


def load_nodes(path: Union[str, Path]) -> List[Union[Fraction, GaussianRational]]:
    """
    Load a nodes file {"nodes": [...]}.

    Raises:
        InstanceParseError: missing file, bad JSON or invalid nodes
    """
    raw = _read_json(path)
    if not isinstance(raw, dict) or "nodes" not in raw:
        raise InstanceParseError("expected an object with a 'nodes' list", "$")
    values = raw["nodes"]
    if not isinstance(values, list) or not values:
        raise InstanceParseError("must be a nonempty list", "nodes")
    nodes = [parse_node(value, f"nodes[{index}]") for index, value in enumerate(values)]
    logger.info(f"Loaded {len(nodes)} nodes from {path}")
    return nodes


def export_json(document: Dict[str, Any], path: Union[str, Path]) -> None:
    """Write a report document as indented UTF-8 JSON."""
    with open(path, "w", encoding="utf-8") as f:
        json.dump(document, f, indent=2, ensure_ascii=False)
        f.write("\n")
    logger.info(f"Report exported to {path}")


def load_json(path: Union[str, Path]) -> Any:
    """Read any JSON document (reports, fixture manifests)."""
    return _read_json(path)

"""Line-oriented `key=value` text used by manifests, checkpoints and run configs.

Blank lines and lines starting with `#` are ignored; keys and values are stripped; list values
are comma separated.
"""

from pathlib import Path

from lformer.core.errors import ConfigurationError


def parse_keyvalue(text: str) -> dict[str, str]:
    """Parse `key=value` lines, rejecting malformed and duplicate keys"""
    values: dict[str, str] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"line {number} is not key=value: {raw!r}")
        if key in values:
            raise ConfigurationError(f"duplicate key '{key}' on line {number}")
        values[key] = value.strip()
    return values


def format_value(value: object) -> str:
    match value:
        case None:
            return ""
        case bool():
            return str(value).lower()
        case list() | tuple():
            return ",".join(format_value(v) for v in value)
        case float():
            return repr(value)
        case _:
            return str(value)


def format_keyvalue(values: dict[str, object]) -> str:
    return "".join(f"{key}={format_value(value)}\n" for key, value in values.items())


def split_list(value: str) -> list[str]:
    return [item.strip() for item in value.split(",") if item.strip()]


def read_keyvalue(path: str | Path) -> dict[str, str]:
    return parse_keyvalue(Path(path).read_text(encoding="utf-8"))


def write_keyvalue(path: str | Path, values: dict[str, object]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_keyvalue(values), encoding="utf-8")
    return path

"""Flat key=value experiment configs.

One ``key = value`` pair per line, ``#`` comment lines, blank lines
ignored.  Dotted keys namespace blocks (``target.kind``, ``sweep.dims``)
with no nested syntax.  Values stay strings until a typed getter is
called, so parse -> serialize -> parse round-trips exactly.
"""

import re

from .errors import ConfigError

_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_.]*$")
_MISSING = object()


class Config:
    """Ordered flat key -> string-value map with typed accessors."""

    def __init__(self, items=None):
        self._items = dict(items or {})

    def set(self, key, value):
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"invalid key {key!r}")
        self._items[key] = str(value).strip()

    def __contains__(self, key):
        return key in self._items

    def items(self):
        return self._items.items()

    def get_str(self, key, default=_MISSING) -> str:
        if key not in self._items:
            if default is _MISSING:
                raise ConfigError(f"missing required config key {key!r}")
            return default
        return self._items[key]

    def get_float(self, key, default=_MISSING) -> float:
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        try:
            return float(raw)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r}: expected a number, got {raw!r}")

    def get_int(self, key, default=_MISSING) -> int:
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        try:
            return int(str(raw), 0)
        except (TypeError, ValueError):
            raise ConfigError(f"key {key!r}: expected an integer, got {raw!r}")

    def get_bool(self, key, default=_MISSING) -> bool:
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        low = str(raw).strip().lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ConfigError(f"key {key!r}: expected a boolean, got {raw!r}")

    def get_floats(self, key, default=_MISSING):
        """Comma-separated list of numbers."""
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        try:
            return [float(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"key {key!r}: expected comma-separated numbers, got {raw!r}")

    def get_ints(self, key, default=_MISSING):
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        try:
            return [int(tok) for tok in str(raw).split(",") if tok.strip()]
        except ValueError:
            raise ConfigError(f"key {key!r}: expected comma-separated integers, got {raw!r}")

    def get_vectors(self, key, default=_MISSING):
        """Semicolon-separated list of comma-separated vectors."""
        raw = self.get_str(key, default)
        if raw is default and key not in self._items:
            return default
        out = []
        for part in str(raw).split(";"):
            if not part.strip():
                continue
            try:
                out.append([float(tok) for tok in part.split(",") if tok.strip()])
            except ValueError:
                raise ConfigError(f"key {key!r}: bad vector {part!r}")
        return out


def parse_config(text: str) -> Config:
    """Parse config text; syntax errors carry 1-based line numbers."""
    cfg = Config()
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected 'key = value', got {stripped!r}", line=lineno)
        key, _, value = stripped.partition("=")
        key = key.strip()
        if not _KEY_RE.match(key):
            raise ConfigError(f"invalid key {key!r}", line=lineno)
        cfg._items[key] = value.strip()
    return cfg


def serialize_config(cfg: Config) -> str:
    """Render back to the flat text form (insertion order, LF endings)."""
    return "".join(f"{k} = {v}\n" for k, v in cfg.items())


def load_config(path=None, overrides=(), seed=None, out=None) -> Config:
    """Load a config file (optional) and apply CLI overrides in order."""
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cfg = parse_config(fh.read())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path!r}: {exc}")
    else:
        cfg = Config()
    for pair in overrides:
        if "=" not in pair:
            raise ConfigError(f"--set expects key=value, got {pair!r}")
        key, _, value = pair.partition("=")
        cfg.set(key, value)
    if seed is not None:
        cfg.set("seed", seed)
    if out is not None:
        cfg.set("out", out)
    return cfg

"""Human-readable key-value text format for measures, intensities and run configs.

One ``key = value`` pair per line; ``#`` starts a comment; blank lines are
ignored; a key may repeat only if it is ``fixed_atom``.  Values use a small
expression grammar::

    mixture    := term (" + " term)*
    term       := [weight "*"] part
    part       := atom(x=F) | gaussian(mean=F, var=F) | poisson(mean=F)
                | empirical(points=[F, F, ...])
    jump       := gamma(rate=F) | gengamma(rate=F, sigma=F)
    fixed_atom := F | jump | F          (location | jump | weight)

Floats are written with ``repr`` so that a dump followed by a load is exact.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

from .measures import (
    Atom,
    Empirical,
    FixedAtom,
    GammaJump,
    Gaussian,
    GenGammaJump,
    JumpFamily,
    Mixture1D,
    PoissonLaw,
    ScaledLevyIntensity,
)


class ConfigError(ValueError):
    """Malformed configuration text."""


REPEATABLE_KEYS = frozenset({"fixed_atom"})


# --------------------------------------------------------------------------
# key = value documents
# --------------------------------------------------------------------------


def parse_pairs(text: str) -> list[tuple[str, str]]:
    """Ordered ``(key, value)`` pairs of a key-value document."""
    pairs = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key or not key.replace("_", "").replace("-", "").isalnum():
            raise ConfigError(f"line {lineno}: invalid key {key!r}")
        if key in seen and key not in REPEATABLE_KEYS:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        seen.add(key)
        pairs.append((key, value))
    return pairs


def dump_pairs(pairs) -> str:
    return "".join(f"{k} = {v}\n" for k, v in pairs)


# --------------------------------------------------------------------------
# expression grammar
# --------------------------------------------------------------------------


def _split_top(text: str, sep: str) -> list[str]:
    """Split at ``sep`` occurrences outside parentheses and brackets."""
    out, depth, start, i = [], 0, 0, 0
    while i < len(text):
        ch = text[i]
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
            if depth < 0:
                raise ConfigError(f"unbalanced brackets in {text!r}")
        elif depth == 0 and text.startswith(sep, i):
            out.append(text[start:i])
            start = i + len(sep)
            i = start
            continue
        i += 1
    if depth != 0:
        raise ConfigError(f"unbalanced brackets in {text!r}")
    out.append(text[start:])
    return [s.strip() for s in out]


def _float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"not a number: {s!r}") from None


def _float_list(s: str) -> list[float]:
    s = s.strip()
    if not (s.startswith("[") and s.endswith("]")):
        raise ConfigError(f"expected a bracketed list, got {s!r}")
    inner = s[1:-1].strip()
    return [_float(x) for x in inner.split(",")] if inner else []


def _call(text: str) -> tuple[str, dict[str, str]]:
    """``name(k=v, ...)`` -> ``(name, {k: v})``."""
    text = text.strip()
    if "(" not in text or not text.endswith(")"):
        raise ConfigError(f"expected name(key=value, ...), got {text!r}")
    name, inner = text[:-1].split("(", 1)
    args: dict[str, str] = {}
    for item in _split_top(inner, ","):
        if not item:
            continue
        if "=" not in item:
            raise ConfigError(f"expected key=value argument, got {item!r}")
        k, v = (s.strip() for s in item.split("=", 1))
        if k in args:
            raise ConfigError(f"repeated argument {k!r}")
        args[k] = v
    return name.strip(), args


def _expect(name: str, args: dict, keys: tuple) -> None:
    if set(args) != set(keys):
        raise ConfigError(f"{name} takes arguments {keys}, got {tuple(args)}")


def parse_part(text: str):
    name, args = _call(text)
    if name == "atom":
        _expect(name, args, ("x",))
        return Atom(_float(args["x"]))
    if name == "gaussian":
        _expect(name, args, ("mean", "var"))
        return Gaussian(_float(args["mean"]), _float(args["var"]))
    if name == "poisson":
        _expect(name, args, ("mean",))
        return PoissonLaw(_float(args["mean"]))
    if name == "empirical":
        _expect(name, args, ("points",))
        return Empirical(_float_list(args["points"]))
    raise ConfigError(f"unknown measure {name!r}")


def format_part(p) -> str:
    if isinstance(p, Atom):
        return f"atom(x={p.x!r})"
    if isinstance(p, Gaussian):
        return f"gaussian(mean={p.mean!r}, var={p.var!r})"
    if isinstance(p, PoissonLaw):
        return f"poisson(mean={p.mean!r})"
    if isinstance(p, Empirical):
        return "empirical(points=[" + ", ".join(repr(float(x)) for x in p.points) + "])"
    raise TypeError(f"cannot format {p!r}")


def parse_mixture(text: str) -> Mixture1D:
    comps = []
    for term in _split_top(text, " + "):
        head = _split_top(term, "*")
        if len(head) == 1:
            comps.append((1.0, parse_part(head[0])))
        elif len(head) == 2:
            comps.append((_float(head[0]), parse_part(head[1])))
        else:
            raise ConfigError(f"malformed mixture term {term!r}")
    try:
        return Mixture1D(comps)
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def format_mixture(m: Mixture1D) -> str:
    if len(m.components) == 1 and m.components[0][0] == 1.0:
        return format_part(m.components[0][1])
    return " + ".join(f"{w!r}*{format_part(p)}" for w, p in m.components)


def parse_jump(text: str) -> JumpFamily:
    name, args = _call(text)
    try:
        if name == "gamma":
            _expect(name, args, ("rate",))
            return GammaJump(_float(args["rate"]))
        if name == "gengamma":
            _expect(name, args, ("rate", "sigma"))
            return GenGammaJump(_float(args["rate"]), _float(args["sigma"]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown jump family {name!r}")


def format_jump(j: JumpFamily) -> str:
    if isinstance(j, GammaJump):
        return f"gamma(rate={j.rate!r})"
    if isinstance(j, GenGammaJump):
        return f"gengamma(rate={j.rate!r}, sigma={j.sigma!r})"
    raise TypeError(f"cannot format {j!r}")


# --------------------------------------------------------------------------
# intensities
# --------------------------------------------------------------------------


def intensity_to_pairs(i: ScaledLevyIntensity) -> list[tuple[str, str]]:
    pairs = [("jump", format_jump(i.jump)), ("base", format_mixture(i.base)), ("weight", repr(i.weight))]
    for a in i.fixed_atoms:
        pairs.append(("fixed_atom", f"{a.location!r} | {format_jump(a.jump)} | {a.weight!r}"))
    return pairs


def intensity_from_pairs(pairs) -> ScaledLevyIntensity:
    fields: dict[str, str] = {}
    atoms = []
    for k, v in pairs:
        if k == "fixed_atom":
            parts = [s.strip() for s in v.split("|")]
            if len(parts) != 3:
                raise ConfigError(f"fixed_atom needs 'location | jump | weight', got {v!r}")
            atoms.append(FixedAtom(_float(parts[0]), parse_jump(parts[1]), _float(parts[2])))
        elif k in ("jump", "base", "weight"):
            fields[k] = v
        else:
            raise ConfigError(f"unknown intensity key {k!r}")
    missing = {"jump", "base"} - set(fields)
    if missing:
        raise ConfigError(f"missing keys {sorted(missing)}")
    try:
        return ScaledLevyIntensity(
            parse_jump(fields["jump"]),
            parse_mixture(fields["base"]),
            _float(fields.get("weight", "1.0")),
            tuple(atoms),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def dumps_intensity(i: ScaledLevyIntensity) -> str:
    return dump_pairs(intensity_to_pairs(i))


def loads_intensity(text: str) -> ScaledLevyIntensity:
    return intensity_from_pairs(parse_pairs(text))


def dumps_mixture(m: Mixture1D) -> str:
    return dump_pairs([("measure", format_mixture(m))])


def loads_mixture(text: str) -> Mixture1D:
    pairs = parse_pairs(text)
    if [k for k, _ in pairs] != ["measure"]:
        raise ConfigError("a mixture document has exactly one 'measure' key")
    return parse_mixture(pairs[0][1])


def read_pairs(path: Union[str, Path]) -> list[tuple[str, str]]:
    return parse_pairs(Path(path).read_text())


# --------------------------------------------------------------------------
# scalar values
# --------------------------------------------------------------------------


def parse_float_grid(text: str) -> tuple[float, ...]:
    """``"1, 2.5, 4"`` or ``"start:stop:step"`` (inclusive) or ``"geom(lo, hi, num)"``."""
    text = text.strip()
    if text.startswith("geom"):
        if not (text.startswith("geom(") and text.endswith(")")):
            raise ConfigError(f"malformed grid {text!r}")
        vals = [_float(a) for a in text[5:-1].split(",")]
        if len(vals) != 3 or vals[2] < 1 or vals[2] != int(vals[2]) or not 0 < vals[0] <= vals[1]:
            raise ConfigError(f"geom(lo, hi, num) needs 0 < lo <= hi and integer num >= 1: {text!r}")
        lo, hi, num = vals[0], vals[1], int(vals[2])
        if num == 1:
            return (lo,)
        return tuple(lo * (hi / lo) ** (i / (num - 1)) for i in range(num))
    if ":" in text and "," not in text:
        parts = [_float(p) for p in text.split(":")]
        if len(parts) == 2:
            parts.append(1.0)
        if len(parts) != 3 or parts[2] <= 0 or parts[1] < parts[0]:
            raise ConfigError(f"malformed range {text!r}")
        start, stop, step = parts
        count = int(round((stop - start) / step)) + 1
        out = tuple(start + i * step for i in range(count) if start + i * step <= stop + 1e-9 * step)
        return out
    vals = tuple(_float(x) for x in text.split(",") if x.strip())
    if not vals:
        raise ConfigError("empty grid")
    return vals


def parse_int_grid(text: str) -> tuple[int, ...]:
    vals = parse_float_grid(text)
    ints = tuple(int(round(v)) for v in vals)
    if any(abs(a - b) > 1e-9 for a, b in zip(vals, ints)):
        raise ConfigError(f"grid {text!r} must contain integers")
    return ints


def format_grid(vals) -> str:
    return ", ".join(repr(v) for v in vals)

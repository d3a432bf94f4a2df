"""Module-description files: JSON with rationals written as strings."""
from __future__ import annotations

import json
import re
from fractions import Fraction
from pathlib import Path
from typing import Any, Union

from .diff_module import DiffModule
from .laurent import LaurentElement, RInterval
from .padic_core import Scalar, format_rational, parse_rational


class ModuleFileError(ValueError):
    pass


def scalar_to_json(c: Scalar):
    s = c.simplify()
    if s.level == 0:
        return format_rational(s.coeffs[0])
    return {"level": s.level, "zeta": [format_rational(x) for x in s.coeffs]}


def _entry_to_json(x: LaurentElement):
    terms = [{"nt": nt, "nz": nz, "coeff": scalar_to_json(c)} for (nt, nz), c in sorted(x.terms.items())]
    if x.exact:
        return terms
    return {"terms": terms, "window": [x.lo, x.hi]}


def module_to_dict(M: DiffModule) -> dict:
    return {
        "p": M.p,
        "level": M.level,
        "rank": M.rank,
        "vars": ["t", "z"] if M.relative else ["t"],
        "r_interval": M.interval.to_json(),
        "matrix": [[_entry_to_json(x) for x in row] for row in M.G1],
    }


def dumps_module(M: DiffModule) -> str:
    return json.dumps(module_to_dict(M), indent=2) + "\n"


class _PathError(ModuleFileError):
    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path, self.msg = path, msg


def _fail(path: str, msg: str):
    raise _PathError(path, msg)


_TOKEN = re.compile(r"\.(\w+)|\[(\d+)\]")
_decoder = json.JSONDecoder()


def _skip_ws(text: str, i: int) -> int:
    while i < len(text) and text[i] in " \t\r\n":
        i += 1
    return i


def _locate(text: str, path: str) -> int:
    """Character offset of the value at a path like $.matrix[0][1], as far as it resolves."""
    i = _skip_ws(text, 0)
    for key, idx in _TOKEN.findall(path):
        if text[i:i + 1] == "{" and key:
            i = _skip_ws(text, i + 1)
            while text[i:i + 1] == '"':
                name, i = _decoder.raw_decode(text, i)
                i = _skip_ws(text, _skip_ws(text, i) + 1)
                if name == key:
                    break
                _, i = _decoder.raw_decode(text, i)
                i = _skip_ws(text, i)
                i = _skip_ws(text, i + 1) if text[i:i + 1] == "," else i
            else:
                return i
        elif text[i:i + 1] == "[" and idx:
            i = _skip_ws(text, i + 1)
            for _ in range(int(idx)):
                if text[i:i + 1] == "]":
                    return i
                _, i = _decoder.raw_decode(text, i)
                i = _skip_ws(text, _skip_ws(text, i) + 1)
        else:
            return i
    return i


def _parse_rational(x: Any, path: str) -> Fraction:
    try:
        return parse_rational(x)
    except (ValueError, ZeroDivisionError, TypeError):
        _fail(path, f"not a rational: {x!r}")


def _parse_scalar(p: int, c: Any, path: str) -> Scalar:
    if isinstance(c, dict):
        if "zeta" not in c or "level" not in c:
            _fail(path, "cyclotomic coefficient needs 'level' and 'zeta'")
        coeffs = [_parse_rational(x, f"{path}.zeta[{i}]") for i, x in enumerate(c["zeta"])]
        return Scalar(p, coeffs, int(c["level"]))
    if isinstance(c, (int, str)):
        return Scalar.rational(p, _parse_rational(c, path))
    _fail(path, f"unsupported coefficient {c!r}")


def _parse_entry(p: int, data: Any, path: str, allow_z: bool) -> LaurentElement:
    lo = hi = None
    if isinstance(data, dict):
        lo, hi = data.get("window", [None, None])
        data = data.get("terms", [])
    if not isinstance(data, list):
        _fail(path, "entry must be a list of terms")
    terms = {}
    for i, rec in enumerate(data):
        tp = f"{path}[{i}]"
        if not isinstance(rec, dict) or "nt" not in rec or "coeff" not in rec:
            _fail(tp, "term needs 'nt' and 'coeff'")
        nt, nz = rec["nt"], rec.get("nz", 0)
        if not isinstance(nt, int) or not isinstance(nz, int) or nz < 0:
            _fail(tp, "exponents must be integers, nz >= 0")
        if nz and not allow_z:
            _fail(tp, "z-term in a module declared with vars ['t']")
        c = _parse_scalar(p, rec["coeff"], f"{tp}.coeff")
        key = (nt, nz)
        terms[key] = terms[key] + c if key in terms else c
    return LaurentElement(p, terms, lo, hi)


def module_from_dict(d: dict) -> DiffModule:
    if not isinstance(d, dict):
        _fail("$", "top level must be an object")
    for key in ("p", "rank", "r_interval", "matrix"):
        if key not in d:
            _fail("$", f"missing field '{key}'")
    p, mu = d["p"], d["rank"]
    if not isinstance(p, int) or not isinstance(mu, int) or mu < 1:
        _fail("$", "p and rank must be integers")
    allow_z = "z" in d.get("vars", ["t"])
    lo, hi = (_parse_rational(x, f"$.r_interval[{i}]") for i, x in enumerate(d["r_interval"]))
    try:
        interval = RInterval(lo, hi)
    except ValueError as exc:
        _fail("$.r_interval", str(exc))
    rows = d["matrix"]
    if len(rows) != mu or any(len(r) != mu for r in rows):
        _fail("$.matrix", f"expected a {mu}x{mu} array")
    G = tuple(tuple(_parse_entry(p, rows[i][j], f"$.matrix[{i}][{j}]", allow_z) for j in range(mu))
              for i in range(mu))
    return DiffModule(p, G, interval)


def loads_module(text: str) -> DiffModule:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModuleFileError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        return module_from_dict(d)
    except _PathError as exc:
        line = text.count("\n", 0, _locate(text, exc.path)) + 1
        raise ModuleFileError(f"line {line}: {exc.path}: {exc.msg}") from None


def read_module(path: Union[str, Path]) -> DiffModule:
    return loads_module(Path(path).read_text())


def write_module(M: DiffModule, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_module(M))


def dumps_json(obj: Any) -> str:
    return json.dumps(obj, indent=2) + "\n"

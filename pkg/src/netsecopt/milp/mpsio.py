"""MPS (fixed and free form) and CPLEX-LP text formats.

Fixed-form MPS limits names to 8 characters and numbers to 12.  With
``mangle=True`` every column and row is renamed ``C0000001``/``R0000001`` and
the original names are returned in a sidecar map; passing that map back to
the parser restores them.  Numbers that do not fit 12 characters are rounded
to the closest 12-character representation, so exact round trips need the
free form, which writes every number with ``repr``.

The objective constant is written as the negated right-hand side of the
objective row, the usual convention of commercial solvers.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field

from .problem import BINARY, CONTINUOUS, MilpProblem, ProblemBuilder

FIXED_NAME_LEN = 8
FIXED_NUM_LEN = 12
_SENSE_CODE = {"<=": "L", "=": "E", ">=": "G"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


class NameTooLong(ValueError):
    pass


class ParseError(ValueError):
    pass


@dataclass
class Export:
    text: str
    names: dict = field(default_factory=dict)  # {"columns": {...}, "rows": {...}} when mangled
    lossy: bool = False

    def sidecar_json(self) -> str:
        return json.dumps(self.names, indent=1, sort_keys=True)


def _mangled(problem, col_prefix="C", row_prefix="R"):
    width = max(7, len(str(max(problem.num_cols, problem.num_rows))))
    cols = [f"{col_prefix}{i + 1:0{width}d}" for i in range(problem.num_cols)]
    rows = [f"{row_prefix}{i + 1:0{width}d}" for i in range(problem.num_rows)]
    return cols, rows, {"columns": dict(zip(cols, problem.col_names)),
                        "rows": dict(zip(rows, problem.row_names))}


def _objective_name(row_names) -> str:
    name = "OBJ"
    taken = set(row_names)
    while name in taken:
        name += "_"
    return name


def format_fixed_number(v: float) -> tuple[str, bool]:
    """Shortest text of at most 12 characters; flag whether it is inexact."""
    s = repr(float(v))
    if s.endswith(".0"):
        s = s[:-2]
    if len(s) <= FIXED_NUM_LEN:
        return s, False
    for digits in range(FIXED_NUM_LEN, 0, -1):
        t = f"{v:.{digits}g}"
        if len(t) <= FIXED_NUM_LEN:
            return t, float(t) != v
    raise ValueError(f"cannot format {v!r}")


def _free_number(v: float) -> str:
    s = repr(float(v))
    return s[:-2] if s.endswith(".0") else s


def to_mps(problem: MilpProblem, form: str = "fixed", mangle: bool | None = None) -> Export:
    """Serialize to MPS.  ``mangle=None`` renames only when names would not fit."""
    if form not in ("fixed", "free"):
        raise ValueError("form must be 'fixed' or 'free'")
    names = list(problem.col_names) + list(problem.row_names)
    if form == "fixed":
        fits = all(len(n) <= FIXED_NAME_LEN and not re.search(r"\s", n) for n in names)
    else:
        fits = all(n and not re.search(r"\s", n) for n in names)
    if mangle is None:
        mangle = not fits
    if not mangle and not fits:
        raise NameTooLong("names do not fit the MPS name field; enable mangling")
    if mangle:
        cols, rows, sidecar = _mangled(problem)
    else:
        cols, rows, sidecar = list(problem.col_names), list(problem.row_names), {}
    obj = _objective_name(rows)
    lossy = False

    def num(v):
        nonlocal lossy
        if form == "free":
            return _free_number(v)
        s, inexact = format_fixed_number(v)
        lossy |= inexact
        return s

    if form == "fixed":
        def line(code, n1, n2="", v1=None, n3="", v2=None):
            s = f" {code:<2} {n1:<8}  {n2:<8}"
            if v1 is not None:
                s += f"  {v1:>12}"
            if v2 is not None:
                s += f"   {n3:<8}  {v2:>12}"
            return s.rstrip()
    else:
        def line(code, n1, n2="", v1=None, n3="", v2=None):
            parts = [code, n1, n2] if code else [n1, n2]
            if v1 is not None:
                parts.append(v1)
            if v2 is not None:
                parts += [n3, v2]
            return " " + " ".join(p for p in parts if p != "")

    out = [f"NAME          {problem.name}", "ROWS", f" N  {obj}"]
    for r, s in zip(rows, problem.row_senses):
        out.append(f" {_SENSE_CODE[s]}  {r}")
    out.append("COLUMNS")
    csc = problem.matrix.tocsc()
    ints = problem.integer_mask
    in_int = False
    marker = 0
    for j, cname in enumerate(cols):
        if ints[j] != in_int:
            tag = "'INTORG'" if ints[j] else "'INTEND'"
            out.append(line("", f"MARKER{marker:02d}"[:8], "'MARKER'", None) + f"                 {tag}"
                       if form == "fixed" else f" MARKER{marker:02d} 'MARKER' {tag}")
            marker += 1
            in_int = bool(ints[j])
        entries = [(obj, problem.cost[j])]
        lo, hi = csc.indptr[j], csc.indptr[j + 1]
        entries += [(rows[i], v) for i, v in zip(csc.indices[lo:hi], csc.data[lo:hi])]
        for k in range(0, len(entries), 2):
            a = entries[k]
            if k + 1 < len(entries):
                b = entries[k + 1]
                out.append(line("", cname, a[0], num(a[1]), b[0], num(b[1])))
            else:
                out.append(line("", cname, a[0], num(a[1])))
    if in_int:
        out.append(line("", f"MARKER{marker:02d}", "'MARKER'", None) + "                 'INTEND'"
                   if form == "fixed" else f" MARKER{marker:02d} 'MARKER' 'INTEND'")
    out.append("RHS")
    rhs_entries = []
    if problem.offset != 0.0:
        rhs_entries.append((obj, -problem.offset))
    rhs_entries += [(rows[i], v) for i, v in enumerate(problem.rhs) if v != 0.0]
    for a in rhs_entries:
        out.append(line("", "RHS", a[0], num(a[1])))
    out.append("BOUNDS")
    for j, cname in enumerate(cols):
        lb, ub = problem.lower[j], problem.upper[j]
        if ints[j]:
            if lb == 0.0 and ub == 1.0:
                out.append(line("BV", "BND", cname))
            else:
                out.append(line("LO", "BND", cname, num(lb)))
                out.append(line("UP", "BND", cname, num(ub)))
            continue
        if lb == ub:
            out.append(line("FX", "BND", cname, num(lb)))
            continue
        if math.isinf(lb) and math.isinf(ub):
            out.append(line("FR", "BND", cname))
            continue
        if math.isinf(lb):
            out.append(line("MI", "BND", cname))
        elif lb != 0.0 or ub < 0:
            out.append(line("LO", "BND", cname, num(lb)))
        if not math.isinf(ub):
            out.append(line("UP", "BND", cname, num(ub)))
    out.append("ENDATA")
    return Export("\n".join(out) + "\n", sidecar, lossy)


def parse_mps(text: str, names: dict | None = None) -> MilpProblem:
    """Parse MPS written by :func:`to_mps` (either form)."""
    col_map = (names or {}).get("columns", {})
    row_map = (names or {}).get("rows", {})
    section = None
    pname = "problem"
    obj_name = None
    row_order, senses = [], {}
    col_order, col_int, costs = [], {}, {}
    entries = {}
    rhs = {}
    offset = 0.0
    bounds: dict = {}
    in_int = False
    for raw in text.splitlines():
        if not raw.strip() or raw.startswith("*"):
            continue
        if not raw[0].isspace():
            head = raw.split()
            section = head[0].upper()
            if section == "NAME":
                pname = head[1] if len(head) > 1 else "problem"
            elif section == "ENDATA":
                break
            elif section not in ("ROWS", "COLUMNS", "RHS", "BOUNDS", "RANGES"):
                raise ParseError(f"unknown section {section}")
            continue
        tok = raw.split()
        if section == "ROWS":
            code, name = tok[0].upper(), tok[1]
            if code == "N":
                if obj_name is None:
                    obj_name = name
                continue
            if code not in _CODE_SENSE:
                raise ParseError(f"unknown row type {code!r} for row {name}")
            row_order.append(name)
            senses[name] = _CODE_SENSE[code]
        elif section == "COLUMNS":
            if len(tok) >= 3 and tok[1] == "'MARKER'":
                in_int = tok[2] == "'INTORG'"
                continue
            cname = tok[0]
            if cname not in col_int:
                col_order.append(cname)
                col_int[cname] = in_int
            for k in range(1, len(tok) - 1, 2):
                rname, val = tok[k], float(tok[k + 1])
                if rname == obj_name:
                    costs[cname] = costs.get(cname, 0.0) + val
                else:
                    entries[(rname, cname)] = entries.get((rname, cname), 0.0) + val
        elif section == "RHS":
            for k in range(1, len(tok) - 1, 2):
                rname, val = tok[k], float(tok[k + 1])
                if rname == obj_name:
                    offset = -val
                else:
                    rhs[rname] = val
        elif section == "BOUNDS":
            code, cname = tok[0].upper(), tok[2]
            val = float(tok[3]) if len(tok) > 3 else None
            lo, hi = bounds.get(cname, (None, None))
            if code == "UP":
                hi = val
            elif code == "LO":
                lo = val
            elif code == "FX":
                lo = hi = val
            elif code == "FR":
                lo, hi = -math.inf, math.inf
            elif code == "MI":
                lo = -math.inf
            elif code == "PL":
                hi = math.inf
            elif code == "BV":
                lo, hi = 0.0, 1.0
            else:
                raise ParseError(f"unsupported bound type {code}")
            bounds[cname] = (lo, hi)
        elif section == "RANGES":
            raise ParseError("RANGES are not supported")

    b = ProblemBuilder(name=pname)
    for cname in col_order:
        kind = BINARY if col_int[cname] else CONTINUOUS
        lo, hi = bounds.get(cname, (None, None))
        lo = 0.0 if lo is None else lo
        hi = (1.0 if kind == BINARY else math.inf) if hi is None else hi
        b.add_var(col_map.get(cname, cname), kind, lo, hi, costs.get(cname, 0.0))
    cidx = {c: j for j, c in enumerate(col_order)}
    rows_terms = {r: [] for r in row_order}
    for (rname, cname), val in entries.items():
        rows_terms[rname].append((cidx[cname], val))
    for rname in row_order:
        b.add_row(row_map.get(rname, rname), rows_terms[rname], senses[rname], rhs.get(rname, 0.0))
    b.offset = offset
    return b.build()


# -- CPLEX LP ----------------------------------------------------------------------------

_LP_NAME = re.compile(r"^[A-Za-z!\"#$%&()/,;?@_`'{}|~][A-Za-z0-9!\"#$%&()/,.;?@_`'{}|~]*$")
_LP_RESERVED = {"minimize", "maximize", "minimum", "maximum", "min", "max", "subject", "to",
                "st", "s.t.", "bounds", "bound", "binaries", "binary", "bin", "generals",
                "general", "gen", "end", "free", "inf", "infinity"}


def _lp_ok(name: str) -> bool:
    return bool(_LP_NAME.match(name)) and name.lower() not in _LP_RESERVED


def _lp_terms(pairs, width=72):
    lines, cur = [], ""
    for name, v in pairs:
        t = f"{'+' if v >= 0 else '-'} {_free_number(abs(v))} {name}"
        if cur and len(cur) + len(t) + 1 > width:
            lines.append(cur)
            cur = ""
        cur = f"{cur} {t}" if cur else t
    if cur:
        lines.append(cur)
    return lines or ["0"]


def to_lp(problem: MilpProblem, mangle: bool | None = None) -> Export:
    fits = all(_lp_ok(n) for n in list(problem.col_names) + list(problem.row_names))
    if mangle is None:
        mangle = not fits
    if not mangle and not fits:
        raise NameTooLong("names are not valid LP identifiers; enable mangling")
    if mangle:
        cols, rows, sidecar = _mangled(problem, "x", "c")
    else:
        cols, rows, sidecar = list(problem.col_names), list(problem.row_names), {}
    obj = _objective_name(rows).lower()
    out = [f"\\ Problem: {problem.name}", "Minimize"]
    terms = _lp_terms(zip(cols, problem.cost))
    if problem.offset != 0.0:
        sign = "+" if problem.offset >= 0 else "-"
        terms[-1] += f" {sign} {_free_number(abs(problem.offset))}"
    out.append(f" {obj}: {terms[0]}")
    out += [f"   {t}" for t in terms[1:]]
    out.append("Subject To")
    csr = problem.matrix.tocsr()
    for i, rname in enumerate(rows):
        lo, hi = csr.indptr[i], csr.indptr[i + 1]
        pairs = [(cols[j], v) for j, v in zip(csr.indices[lo:hi], csr.data[lo:hi])]
        if not pairs:
            pairs = [(cols[0], 0.0)] if cols else []
        terms = _lp_terms(pairs)
        terms[-1] += f" {problem.row_senses[i]} {_free_number(problem.rhs[i])}"
        out.append(f" {rname}: {terms[0]}")
        out += [f"   {t}" for t in terms[1:]]
    out.append("Bounds")
    ints = problem.integer_mask
    for j, cname in enumerate(cols):
        lb, ub = problem.lower[j], problem.upper[j]
        if ints[j] and lb == 0.0 and ub == 1.0:
            continue
        if lb == ub:
            out.append(f" {cname} = {_free_number(lb)}")
        elif math.isinf(lb) and math.isinf(ub):
            out.append(f" {cname} free")
        else:
            los = "-inf" if math.isinf(lb) else _free_number(lb)
            his = "+inf" if math.isinf(ub) else _free_number(ub)
            out.append(f" {los} <= {cname} <= {his}")
    binaries = [c for j, c in enumerate(cols) if ints[j]]
    if binaries:
        out.append("Binaries")
        for k in range(0, len(binaries), 8):
            out.append(" " + " ".join(binaries[k:k + 8]))
    out.append("End")
    return Export("\n".join(out) + "\n", sidecar, False)


_SECTION_RE = re.compile(
    r"^\s*(minimize|minimum|min|maximize|maximum|max|subject\s+to|such\s+that|st|s\.t\.|"
    r"bounds?|binaries|binary|bin|generals?|gen|end)\s*$", re.IGNORECASE)


def _lp_number(tok: str) -> float:
    t = tok.lower()
    if t in ("inf", "+inf", "infinity", "+infinity"):
        return math.inf
    if t in ("-inf", "-infinity"):
        return -math.inf
    return float(tok)


def _parse_linear(text: str):
    """Parse ``+ 3 x - y + 2`` into ([(name, coef)], constant)."""
    toks = re.findall(r"[+-]|[^\s+-]+(?:[eE][+-]?\d+)?", text)
    # re-join exponent signs split by the tokenizer, e.g. '1e' '-' '06'
    merged = []
    for t in toks:
        if merged and re.fullmatch(r"\d*\.?\d*[eE]", merged[-1]) and t in "+-":
            merged[-1] += t
            continue
        if merged and re.fullmatch(r"\d*\.?\d*[eE][+-]", merged[-1]):
            merged[-1] += t
            continue
        merged.append(t)
    terms, const = [], 0.0
    sign, coef = 1.0, None
    for t in merged:
        if t in "+-":
            sign = 1.0 if t == "+" else -1.0
            continue
        try:
            val = float(t)
        except ValueError:
            terms.append((t, sign * (1.0 if coef is None else coef)))
            sign, coef = 1.0, None
            continue
        if coef is not None:
            const += sign * coef
            sign = 1.0
        coef = val
    if coef is not None:
        const += sign * coef
    return terms, const


def parse_lp(text: str, names: dict | None = None) -> MilpProblem:
    col_map = (names or {}).get("columns", {})
    row_map = (names or {}).get("rows", {})
    pname = "problem"
    sections: dict = {"obj": [], "st": [], "bounds": [], "bin": []}
    current = None
    for raw in text.splitlines():
        if raw.startswith("\\"):
            m = re.match(r"\\\s*Problem:\s*(\S+)", raw)
            if m:
                pname = m.group(1)
            continue
        line = raw.split("\\", 1)[0]
        if not line.strip():
            continue
        m = _SECTION_RE.match(line)
        if m:
            key = m.group(1).lower()
            if key.startswith("max"):
                raise ParseError("maximization objectives are not supported")
            if key.startswith("min"):
                current = "obj"
            elif key in ("st", "s.t.") or key.startswith("subject") or key.startswith("such"):
                current = "st"
            elif key.startswith("bound"):
                current = "bounds"
            elif key.startswith("bin"):
                current = "bin"
            elif key.startswith("gen"):
                raise ParseError("general integers are not supported")
            else:
                current = None
            continue
        if current is None:
            raise ParseError(f"text outside any section: {line!r}")
        sections[current].append(line.strip())

    obj_text = " ".join(sections["obj"])
    if ":" in obj_text:
        obj_text = obj_text.split(":", 1)[1]
    obj_terms, offset = _parse_linear(obj_text)

    rows = []
    buf = ""
    for line in sections["st"]:
        buf = f"{buf} {line}" if buf else line
        m = re.match(r"^(?:(\S+?)\s*:)?\s*(.*?)\s*(<=|>=|=<|=>|<|>|=)\s*(\S+)$", buf)
        if m:
            rows.append(m.groups())
            buf = ""
    if buf:
        raise ParseError(f"unterminated constraint: {buf!r}")

    order, seen = [], set()

    def note(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    for n, _ in obj_terms:
        note(n)
    parsed_rows = []
    for k, (rname, expr, sense, rhs) in enumerate(rows):
        terms, const = _parse_linear(expr)
        for n, _ in terms:
            note(n)
        sense = {"=<": "<=", "<": "<=", "=>": ">=", ">": ">="}.get(sense, sense)
        parsed_rows.append((rname or f"R{k + 1}", terms, sense, _lp_number(rhs) - const))

    bnd = {}
    for line in sections["bounds"]:
        toks = line.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            bnd[toks[0]] = (-math.inf, math.inf)
            note(toks[0])
        elif len(toks) == 3 and toks[1] == "=":
            v = _lp_number(toks[2])
            bnd[toks[0]] = (v, v)
            note(toks[0])
        elif len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            bnd[toks[2]] = (_lp_number(toks[0]), _lp_number(toks[4]))
            note(toks[2])
        elif len(toks) == 3 and toks[1] in ("<=", ">="):
            name, v = toks[0], _lp_number(toks[2])
            lo, hi = bnd.get(name, (0.0, math.inf))
            bnd[name] = (lo, v) if toks[1] == "<=" else (v, hi)
            note(name)
        else:
            raise ParseError(f"unsupported bound line {line!r}")
    binaries = set()
    for line in sections["bin"]:
        for n in line.split():
            binaries.add(n)
            note(n)

    b = ProblemBuilder(name=pname)
    cost = dict()
    for n, v in obj_terms:
        cost[n] = cost.get(n, 0.0) + v
    for n in order:
        kind = BINARY if n in binaries else CONTINUOUS
        lo, hi = bnd.get(n, (0.0, 1.0 if kind == BINARY else math.inf))
        b.add_var(col_map.get(n, n), kind, lo, hi, cost.get(n, 0.0))
    idx = {n: j for j, n in enumerate(order)}
    for rname, terms, sense, rhs in parsed_rows:
        b.add_row(row_map.get(rname, rname), [(idx[n], v) for n, v in terms], sense, rhs)
    b.offset = offset
    return b.build()


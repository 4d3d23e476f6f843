"""Line-oriented text formats for pipeline artifacts.

Versioned grammars, all coordinates in µm with 3 decimal places:

* ``.nlc`` netlist     -- ``comp <id> <pmos|nmos> [module=<tag>]`` / ``io <name>`` /
  ``net <id>: <pin-ref>+`` with pin-ref ``c<id>.<0|1|2>`` or ``io.<name>``
* ``.lay`` layout      -- ``substrate <W> <H> <rho>`` / ``comp <id> <kind> <x> <y> <theta>`` /
  ``slot <x> <y>``
* ``.plc`` placement   -- ``map c<l> -> p<p>`` / ``map io.<name> -> slot<k>``
* ``.rte`` routing     -- print-ordered ``wire <x1> <y1> <x2> <y2> net=<id>`` /
  ``insu <x> <y>`` plus trailing ``fail net=<id> reason=<code>`` lines
* ``.prt`` partition   -- ``block <id> [module=<tag>]: c<id> ...``
* ``.fpl`` floorplan   -- ``rect <block> <x> <y> <w> <h>``

Lines of the form ``# key=value`` directly after the version header carry
metadata (artifact hash chaining); they round-trip unchanged.
"""

from __future__ import annotations

from .model import (
    CompPin,
    Insulator,
    IoPin,
    Kind,
    LogicalCircuit,
    LogicalComponent,
    Net,
    PhysicalComponent,
    PhysicalLayout,
    Placement,
    RoutingSolution,
    Wire,
    canonical_segment,
)


class FormatError(ValueError):
    """Malformed artifact file; carries a 1-based line number when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


def _fmt(x: float) -> str:
    return f"{x:.3f}"


def _split_header(text: str, tag: str):
    lines = text.splitlines()
    if not lines or not lines[0].strip().startswith(tag + " "):
        raise FormatError(f"expected '{tag} <version>' header", 1)
    version = lines[0].strip().split()[1]
    if version != "1":
        raise FormatError(f"unsupported {tag} version {version}", 1)
    meta: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    for i, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            kv = line[1:].strip()
            if "=" in kv:
                k, v = kv.split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        body.append((i, line))
    return meta, body


def _meta_lines(meta: dict[str, str] | None) -> list[str]:
    return [f"# {k}={v}" for k, v in (meta or {}).items()]


def _parse_pin_ref(token: str, lineno: int):
    if token.startswith("io."):
        name = token[3:]
        if not name:
            raise FormatError("empty io pin name", lineno)
        return IoPin(name)
    if token.startswith("c") and "." in token:
        comp_s, pin_s = token[1:].split(".", 1)
        try:
            return CompPin(int(comp_s), int(pin_s))
        except ValueError:
            raise FormatError(f"bad pin reference {token!r}", lineno)
    raise FormatError(f"bad pin reference {token!r}", lineno)


# -- netlist (.nlc) ---------------------------------------------------------

def write_netlist(circuit: LogicalCircuit, meta: dict[str, str] | None = None) -> str:
    out = ["nlc 1"]
    out += _meta_lines(meta)
    if circuit.name:
        out.append(f"# name={circuit.name}")
    for c in circuit.components:
        tag = f" module={c.module_tag}" if c.module_tag else ""
        out.append(f"comp {c.id} {c.kind.value}{tag}")
    for name in circuit.io_pins:
        out.append(f"io {name}")
    for net in circuit.nets:
        refs = " ".join(str(r) for r in net.members)
        out.append(f"net {net.id}: {refs}")
    return "\n".join(out) + "\n"


def read_netlist(text: str) -> LogicalCircuit:
    meta, body = _split_header(text, "nlc")
    comps: list[LogicalComponent] = []
    io_pins: list[str] = []
    nets: list[Net] = []
    for lineno, line in body:
        fields = line.split()
        if fields[0] == "comp":
            if len(fields) < 3:
                raise FormatError("comp needs '<id> <kind>'", lineno)
            try:
                cid = int(fields[1])
            except ValueError:
                raise FormatError(f"bad component id {fields[1]!r}", lineno)
            try:
                kind = Kind(fields[2])
            except ValueError:
                raise FormatError(f"unknown component kind {fields[2]!r}", lineno)
            tag = None
            for extra in fields[3:]:
                if extra.startswith("module="):
                    tag = extra[len("module="):]
                else:
                    raise FormatError(f"unexpected token {extra!r}", lineno)
            comps.append(LogicalComponent(cid, kind, tag))
        elif fields[0] == "io":
            if len(fields) != 2:
                raise FormatError("io needs a single name", lineno)
            io_pins.append(fields[1])
        elif fields[0] == "net":
            head, _, rest = line.partition(":")
            parts = head.split()
            if len(parts) != 2 or not rest.strip():
                raise FormatError("net needs '<id>: <pin-ref>+'", lineno)
            try:
                nid = int(parts[1])
            except ValueError:
                raise FormatError(f"bad net id {parts[1]!r}", lineno)
            members = tuple(_parse_pin_ref(tok, lineno) for tok in rest.split())
            nets.append(Net(nid, members))
        else:
            raise FormatError(f"unknown directive {fields[0]!r}", lineno)
    circuit = LogicalCircuit(meta.get("name", ""), comps, io_pins, nets)
    circuit.validate()
    return circuit


# -- layout (.lay) ----------------------------------------------------------

def write_layout(layout: PhysicalLayout, meta: dict[str, str] | None = None) -> str:
    out = ["lay 1"]
    out += _meta_lines(meta)
    out.append(f"substrate {_fmt(layout.width)} {_fmt(layout.height)} {_fmt(layout.mean_pitch)}")
    for c in layout.components:
        out.append(
            f"comp {c.id} {c.kind.value} {_fmt(c.center[0])} {_fmt(c.center[1])} {c.theta:.6f}"
        )
    for (x, y) in layout.io_slots:
        out.append(f"slot {_fmt(x)} {_fmt(y)}")
    return "\n".join(out) + "\n"


def read_layout(text: str) -> PhysicalLayout:
    _, body = _split_header(text, "lay")
    width = height = pitch = None
    comps: list[PhysicalComponent] = []
    slots: list[tuple[float, float]] = []
    for lineno, line in body:
        fields = line.split()
        if fields[0] == "substrate":
            if len(fields) != 4:
                raise FormatError("substrate needs '<W> <H> <rho>'", lineno)
            width, height, pitch = (float(v) for v in fields[1:])
        elif fields[0] == "comp":
            if len(fields) != 6:
                raise FormatError("comp needs '<id> <kind> <x> <y> <theta>'", lineno)
            try:
                kind = Kind(fields[2])
            except ValueError:
                raise FormatError(f"unknown component kind {fields[2]!r}", lineno)
            comps.append(
                PhysicalComponent(int(fields[1]), kind, (float(fields[3]), float(fields[4])), float(fields[5]))
            )
        elif fields[0] == "slot":
            if len(fields) != 3:
                raise FormatError("slot needs '<x> <y>'", lineno)
            slots.append((float(fields[1]), float(fields[2])))
        else:
            raise FormatError(f"unknown directive {fields[0]!r}", lineno)
    if width is None:
        raise FormatError("missing substrate line")
    return PhysicalLayout(width, height, comps, slots, pitch)


# -- placement (.plc) -------------------------------------------------------

def write_placement(placement: Placement, meta: dict[str, str] | None = None) -> str:
    out = ["plc 1"]
    out += _meta_lines(meta)
    for lid in sorted(placement.comp_map):
        out.append(f"map c{lid} -> p{placement.comp_map[lid]}")
    for name in sorted(placement.io_map):
        out.append(f"map io.{name} -> slot{placement.io_map[name]}")
    return "\n".join(out) + "\n"


def read_placement(text: str) -> Placement:
    _, body = _split_header(text, "plc")
    placement = Placement()
    for lineno, line in body:
        fields = line.split()
        if len(fields) != 4 or fields[0] != "map" or fields[2] != "->":
            raise FormatError("expected 'map <src> -> <dst>'", lineno)
        src, dst = fields[1], fields[3]
        if src.startswith("c") and dst.startswith("p"):
            try:
                placement.comp_map[int(src[1:])] = int(dst[1:])
            except ValueError:
                raise FormatError(f"bad mapping {line!r}", lineno)
        elif src.startswith("io.") and dst.startswith("slot"):
            placement.io_map[src[3:]] = int(dst[4:])
        else:
            raise FormatError(f"bad mapping {line!r}", lineno)
    return placement


# -- routing (.rte) ---------------------------------------------------------

def write_routing(solution: RoutingSolution, meta: dict[str, str] | None = None) -> str:
    out = ["rte 1"]
    full_meta = dict(meta or {})
    if solution.grid_g is not None:
        full_meta.setdefault("g", _fmt(solution.grid_g))
    out += _meta_lines(full_meta)
    for prim in solution.sequence:
        if isinstance(prim, Wire):
            (x1, y1), (x2, y2) = prim.a, prim.b
            out.append(f"wire {_fmt(x1)} {_fmt(y1)} {_fmt(x2)} {_fmt(y2)} net={prim.net}")
        else:
            out.append(f"insu {_fmt(prim.p[0])} {_fmt(prim.p[1])}")
    for net_id, reason in solution.failures:
        out.append(f"fail net={net_id} reason={reason}")
    return "\n".join(out) + "\n"


def read_routing(text: str) -> RoutingSolution:
    meta, body = _split_header(text, "rte")
    sol = RoutingSolution(grid_g=float(meta["g"]) if "g" in meta else None)
    for lineno, line in body:
        fields = line.split()
        if fields[0] == "wire":
            if len(fields) != 6 or not fields[5].startswith("net="):
                raise FormatError("wire needs '<x1> <y1> <x2> <y2> net=<id>'", lineno)
            a = (float(fields[1]), float(fields[2]))
            b = (float(fields[3]), float(fields[4]))
            net = int(fields[5][4:])
            sol.sequence.append(Wire(a, b, net))
        elif fields[0] == "insu":
            if len(fields) != 3:
                raise FormatError("insu needs '<x> <y>'", lineno)
            sol.sequence.append(Insulator((float(fields[1]), float(fields[2]))))
        elif fields[0] == "fail":
            net = reason = None
            for tok in fields[1:]:
                if tok.startswith("net="):
                    net = int(tok[4:])
                elif tok.startswith("reason="):
                    reason = tok[7:]
            if net is None or reason is None:
                raise FormatError("fail needs 'net=<id> reason=<code>'", lineno)
            sol.failures.append((net, reason))
        else:
            raise FormatError(f"unknown directive {fields[0]!r}", lineno)
    _rebuild_trees(sol)
    return sol


def _rebuild_trees(sol: RoutingSolution) -> None:
    """Derive per-net segment sets from the print sequence."""
    sol.per_net_trees = {}
    for prim in sol.sequence:
        if isinstance(prim, Wire):
            sol.per_net_trees.setdefault(prim.net, set()).add(canonical_segment(prim.a, prim.b))


# -- partition (.prt) -------------------------------------------------------

def write_partition(part, meta: dict[str, str] | None = None) -> str:
    out = ["prt 1"]
    out += _meta_lines(meta)
    members: dict[int, list[int]] = {b: [] for b in range(part.n_blocks)}
    for cid, b in enumerate(part.block_of):
        members[b].append(cid)
    for b in range(part.n_blocks):
        tag = ""
        if part.block_module and part.block_module.get(b):
            tag = f" module={part.block_module[b]}"
        comps = " ".join(f"c{c}" for c in members[b])
        out.append(f"block {b}{tag}: {comps}")
    return "\n".join(out) + "\n"


def read_partition(text: str, n_components: int):
    from .partition import PartitionResult

    _, body = _split_header(text, "prt")
    block_of = [-1] * n_components
    block_module: dict[int, str] = {}
    n_blocks = 0
    for lineno, line in body:
        head, _, rest = line.partition(":")
        fields = head.split()
        if fields[0] != "block":
            raise FormatError(f"unknown directive {fields[0]!r}", lineno)
        b = int(fields[1])
        n_blocks = max(n_blocks, b + 1)
        for extra in fields[2:]:
            if extra.startswith("module="):
                block_module[b] = extra[len("module="):]
        for tok in rest.split():
            if not tok.startswith("c"):
                raise FormatError(f"bad member {tok!r}", lineno)
            block_of[int(tok[1:])] = b
    if any(b < 0 for b in block_of):
        raise FormatError("partition does not cover all components")
    return PartitionResult(block_of, n_blocks, 0.02, block_module or None)


# -- floorplan (.fpl) -------------------------------------------------------

def write_floorplan(fp, meta: dict[str, str] | None = None) -> str:
    out = ["fpl 1"]
    out += _meta_lines(meta)
    for b in sorted(fp.rects):
        x, y, w, h = fp.rects[b]
        out.append(f"rect {b} {_fmt(x)} {_fmt(y)} {_fmt(w)} {_fmt(h)}")
    return "\n".join(out) + "\n"


def read_floorplan(text: str):
    from .floorplan import Floorplan

    _, body = _split_header(text, "fpl")
    rects = {}
    for lineno, line in body:
        fields = line.split()
        if fields[0] != "rect" or len(fields) != 6:
            raise FormatError("expected 'rect <block> <x> <y> <w> <h>'", lineno)
        rects[int(fields[1])] = tuple(float(v) for v in fields[2:])
    return Floorplan(rects=rects, tree=None)

"""Gate-level netlists and their expansion to transistor-level circuits.

Each supported gate expands to a fixed static-CMOS template; templates are
plain data so alternative libraries can be swapped in.  Gate-level documents
use the ``.gnl`` format::

    gnl 1
    input a
    output sum
    gate XOR2 x1 [module=<tag>] A=a B=b Y=t1

Power rails ``vdd``/``gnd`` are implicit I/O pins, created on demand.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .formats import FormatError, _split_header
from .model import CompPin, IoPin, Kind, LogicalCircuit, LogicalComponent, ModelError, Net

P = Kind.PMOS
N = Kind.NMOS

# Template entries are (kind, gate-net, source-net, drain-net); net names are
# ports of the gate, the rails VDD/GND, or template-internal nodes.
GATE_TEMPLATES: dict[str, dict] = {
    "INV": {
        "ports": ("A", "Y"),
        "transistors": [
            (P, "A", "VDD", "Y"),
            (N, "A", "GND", "Y"),
        ],
    },
    "NAND2": {
        "ports": ("A", "B", "Y"),
        "transistors": [
            (P, "A", "VDD", "Y"),
            (P, "B", "VDD", "Y"),
            (N, "A", "n1", "Y"),
            (N, "B", "GND", "n1"),
        ],
    },
    "NOR2": {
        "ports": ("A", "B", "Y"),
        "transistors": [
            (P, "A", "VDD", "p1"),
            (P, "B", "p1", "Y"),
            (N, "A", "GND", "Y"),
            (N, "B", "GND", "Y"),
        ],
    },
    "AND2": {
        "ports": ("A", "B", "Y"),
        "transistors": [
            (P, "A", "VDD", "t"),
            (P, "B", "VDD", "t"),
            (N, "A", "n1", "t"),
            (N, "B", "GND", "n1"),
            (P, "t", "VDD", "Y"),
            (N, "t", "GND", "Y"),
        ],
    },
    "OR2": {
        "ports": ("A", "B", "Y"),
        "transistors": [
            (P, "A", "VDD", "p1"),
            (P, "B", "p1", "t"),
            (N, "A", "GND", "t"),
            (N, "B", "GND", "t"),
            (P, "t", "VDD", "Y"),
            (N, "t", "GND", "Y"),
        ],
    },
    # Y = A xor B: pull-up branches (A=0,B=1) and (A=1,B=0), matching pull-downs.
    "XOR2": {
        "ports": ("A", "B", "Y"),
        "transistors": [
            (P, "A", "VDD", "an"),
            (N, "A", "GND", "an"),
            (P, "B", "VDD", "bn"),
            (N, "B", "GND", "bn"),
            (P, "A", "VDD", "pm1"),
            (P, "bn", "pm1", "Y"),
            (P, "an", "VDD", "pm2"),
            (P, "B", "pm2", "Y"),
            (N, "A", "nm1", "Y"),
            (N, "B", "GND", "nm1"),
            (N, "an", "nm2", "Y"),
            (N, "bn", "GND", "nm2"),
        ],
    },
    # Y = S ? B : A, as clock-free AOI with input/output inverters.
    "MUX2": {
        "ports": ("A", "B", "S", "Y"),
        "transistors": [
            (P, "S", "VDD", "sn"),
            (N, "S", "GND", "sn"),
            (N, "A", "nm1", "yn"),
            (N, "sn", "GND", "nm1"),
            (N, "B", "nm2", "yn"),
            (N, "S", "GND", "nm2"),
            (P, "A", "VDD", "pm"),
            (P, "sn", "VDD", "pm"),
            (P, "B", "pm", "yn"),
            (P, "S", "pm", "yn"),
            (P, "yn", "VDD", "Y"),
            (N, "yn", "GND", "Y"),
        ],
    },
    # Positive-edge master/slave latch pair from transmission gates.
    "DFF": {
        "ports": ("D", "CLK", "Q"),
        "transistors": [
            (P, "CLK", "VDD", "cn"),
            (N, "CLK", "GND", "cn"),
            (P, "cn", "VDD", "cb"),
            (N, "cn", "GND", "cb"),
            (P, "cb", "D", "mx"),
            (N, "cn", "D", "mx"),
            (P, "mx", "VDD", "my"),
            (N, "mx", "GND", "my"),
            (P, "my", "VDD", "mf"),
            (N, "my", "GND", "mf"),
            (P, "cn", "mf", "mx"),
            (N, "cb", "mf", "mx"),
            (P, "cn", "my", "sx"),
            (N, "cb", "my", "sx"),
            (P, "sx", "VDD", "sy"),
            (N, "sx", "GND", "sy"),
            (P, "sy", "VDD", "sf"),
            (N, "sy", "GND", "sf"),
            (P, "cb", "sf", "sx"),
            (N, "cn", "sf", "sx"),
            (P, "sy", "VDD", "qn"),
            (N, "sy", "GND", "qn"),
            (P, "qn", "VDD", "Q"),
            (N, "qn", "GND", "Q"),
        ],
    },
}

GATE_SIZES = {name: len(t["transistors"]) for name, t in GATE_TEMPLATES.items()}

VDD_NAME = "vdd"
GND_NAME = "gnd"


@dataclass
class GateInstance:
    gate_type: str
    name: str
    conns: dict[str, str]
    module_tag: str | None = None


@dataclass
class GateNetlist:
    name: str
    inputs: list[str] = field(default_factory=list)
    outputs: list[str] = field(default_factory=list)
    gates: list[GateInstance] = field(default_factory=list)


def parse_gate_netlist(text: str) -> GateNetlist:
    meta, body = _split_header(text, "gnl")
    doc = GateNetlist(meta.get("name", ""))
    for lineno, line in body:
        fields = line.split()
        if fields[0] == "input":
            doc.inputs.append(fields[1])
        elif fields[0] == "output":
            doc.outputs.append(fields[1])
        elif fields[0] == "gate":
            if len(fields) < 3:
                raise FormatError("gate needs '<type> <name> <port>=<net>...'", lineno)
            gtype, gname = fields[1], fields[2]
            conns: dict[str, str] = {}
            tag = None
            for tok in fields[3:]:
                if "=" not in tok:
                    raise FormatError(f"bad connection {tok!r}", lineno)
                k, v = tok.split("=", 1)
                if k == "module":
                    tag = v
                else:
                    conns[k] = v
            doc.gates.append(GateInstance(gtype, gname, conns, tag))
        else:
            raise FormatError(f"unknown directive {fields[0]!r}", lineno)
    return doc


def write_gate_netlist(doc: GateNetlist) -> str:
    out = ["gnl 1"]
    if doc.name:
        out.append(f"# name={doc.name}")
    out += [f"input {n}" for n in doc.inputs]
    out += [f"output {n}" for n in doc.outputs]
    for g in doc.gates:
        tag = f" module={g.module_tag}" if g.module_tag else ""
        conns = " ".join(f"{k}={v}" for k, v in g.conns.items())
        out.append(f"gate {g.gate_type} {g.name}{tag} {conns}")
    return "\n".join(out) + "\n"


def expand_gates(doc: GateNetlist, templates: dict | None = None) -> LogicalCircuit:
    """Expand a gate-level netlist into a transistor-level circuit.

    Each instance is replaced by its CMOS template; template-internal nodes
    become fresh nets and VDD/GND collapse onto implicit power I/O pins.
    Module tags propagate from the gate instances to their transistors.
    """
    templates = templates or GATE_TEMPLATES
    comps: list[LogicalComponent] = []
    net_members: dict[str, list] = {}
    net_order: list[str] = []

    def touch(net_name: str) -> list:
        if net_name not in net_members:
            net_members[net_name] = []
            net_order.append(net_name)
        return net_members[net_name]

    io_pins = list(doc.inputs) + list(doc.outputs)
    for name in io_pins:
        touch(name).append(IoPin(name))

    uses_power = False
    for inst in doc.gates:
        if inst.gate_type not in templates:
            raise ModelError(f"unknown gate type {inst.gate_type!r} in {inst.name}")
        template = templates[inst.gate_type]
        for port in template["ports"]:
            if port not in inst.conns:
                raise ModelError(f"gate {inst.name} missing connection for port {port}")

        def resolve(local: str) -> str:
            nonlocal uses_power
            if local == "VDD":
                uses_power = True
                return VDD_NAME
            if local == "GND":
                uses_power = True
                return GND_NAME
            if local in template["ports"]:
                return inst.conns[local]
            return f"{inst.name}.{local}"  # template-internal node

        for kind, g_net, s_net, d_net in template["transistors"]:
            cid = len(comps)
            comps.append(LogicalComponent(cid, kind, inst.module_tag))
            touch(resolve(g_net)).append(CompPin(cid, 0))
            touch(resolve(s_net)).append(CompPin(cid, 1))
            touch(resolve(d_net)).append(CompPin(cid, 2))

    if uses_power:
        for rail in (VDD_NAME, GND_NAME):
            if rail not in io_pins:
                io_pins.append(rail)
            touch(rail).append(IoPin(rail))

    nets = [Net(i, tuple(net_members[n])) for i, n in enumerate(net_order)]
    circuit = LogicalCircuit(doc.name, comps, io_pins, nets)
    circuit.validate()
    return circuit


def full_adder() -> GateNetlist:
    """1-bit full adder over the gate library (expands to 42 transistors)."""
    doc = GateNetlist("full_adder", inputs=["a", "b", "cin"], outputs=["sum", "cout"])
    doc.gates = [
        GateInstance("XOR2", "x1", {"A": "a", "B": "b", "Y": "t1"}),
        GateInstance("XOR2", "x2", {"A": "t1", "B": "cin", "Y": "sum"}),
        GateInstance("AND2", "a1", {"A": "a", "B": "b", "Y": "t2"}),
        GateInstance("AND2", "a2", {"A": "t1", "B": "cin", "Y": "t3"}),
        GateInstance("OR2", "o1", {"A": "t2", "B": "t3", "Y": "cout"}),
    ]
    return doc

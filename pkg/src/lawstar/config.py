"""System configuration documents: parsing, validation and canonical emission.

A document is YAML. Finite systems list ``nodes`` (label and block sizes),
generating ``order`` pairs ``[lower, upper]`` and ``maps`` for those pairs; a
lazy chain is given by a ``chain`` section instead. Named ``elements`` are
threads, given by per-node ``coords``, by their coordinate at the greatest
node (``top``) or, on chains, by a built-in ``generator``.

Complex numbers are written as plain numbers or ``[re, im]`` pairs and
matrices are row-major lists of rows. Unknown fields are rejected and every
error carries the line and field where it was found.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import CoherenceError, ConfigError, LawstarError
from .limits import (
    UNITARY_TOL,
    ChainSystem,
    ConnectingMap,
    IndexPoset,
    ProjectiveSystem,
    Thread,
    lift,
    validate_system,
)
from .matstar import AlgebraElement, FinStarAlgebra

TOP_FIELDS = {"name", "seed", "tolerances", "nodes", "order", "maps", "chain", "elements"}
NODE_FIELDS = {"label", "blocks"}
MAP_FIELDS = {"source", "target", "kept_blocks", "unitaries"}
CHAIN_FIELDS = {"block_size", "horizon"}
ELEMENT_FIELDS = {"coords", "top", "generator", "params", "declared_bound", "monotone"}
TOLERANCE_FIELDS = {"coherence"}
GENERATORS = ("diag_harmonic", "diag_linear", "const_block")


# located YAML ---------------------------------------------------------------------

_SCALARS = yaml.constructor.SafeConstructor()


class _Doc:
    """Plain values from a YAML tree plus the source line of every path."""

    def __init__(self, text: str):
        try:
            root = yaml.compose(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, "problem_mark", None)
            where = f"line {mark.line + 1}" if mark else None
            raise ConfigError(f"malformed document: {getattr(exc, 'problem', exc)}", where) from None
        self.lines: dict[tuple, int] = {}
        self.value = {} if root is None else self._plain(root, ())

    def _plain(self, node, path):
        self.lines[path] = node.start_mark.line + 1
        if isinstance(node, yaml.MappingNode):
            out = {}
            for k, v in node.value:
                key = k.value
                if key in out:
                    raise ConfigError(f"duplicate field {key!r}", self.where(path, line=k.start_mark.line + 1))
                out[key] = self._plain(v, path + (key,))
            return out
        if isinstance(node, yaml.SequenceNode):
            return [self._plain(v, path + (i,)) for i, v in enumerate(node.value)]
        return _SCALARS.construct_object(node)

    def where(self, path, line=None) -> str:
        probe = tuple(path)
        while line is None and probe:
            line = self.lines.get(probe)
            probe = probe[:-1]
        line = line if line is not None else self.lines.get((), 1)
        dotted = "".join(f"[{p}]" if isinstance(p, int) else (f".{p}" if i else str(p)) for i, p in enumerate(path))
        return f"line {line}, field {dotted or '<root>'}"

    def fail(self, message, path):
        raise ConfigError(message, self.where(path))


def _fields(doc: _Doc, value, allowed, path, required=()):
    if not isinstance(value, dict):
        doc.fail("expected a mapping", path)
    for key in value:
        if key not in allowed:
            doc.fail(f"unknown field {key!r} (allowed: {', '.join(sorted(allowed))})", path + (key,))
    for key in required:
        if key not in value:
            doc.fail(f"missing field {key!r}", path)
    return value


def _int(doc, value, path, minimum=None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        doc.fail(f"expected an integer, got {value!r}", path)
    if minimum is not None and value < minimum:
        doc.fail(f"expected an integer >= {minimum}, got {value}", path)
    return value


def _real(doc, value, path) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        doc.fail(f"malformed number {value!r}", path)
    return float(value)


def _complex(doc, value, path) -> complex:
    if isinstance(value, list):
        if len(value) != 2:
            doc.fail("complex numbers are [re, im] pairs", path)
        return complex(_real(doc, value[0], path + (0,)), _real(doc, value[1], path + (1,)))
    return complex(_real(doc, value, path))


def _matrix(doc, value, n, path) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        doc.fail(f"expected a {n}x{n} matrix as a list of {n} rows", path)
    rows = []
    for i, row in enumerate(value):
        if not isinstance(row, list) or len(row) != n:
            doc.fail(f"row {i} must have {n} entries", path + (i,))
        rows.append([_complex(doc, v, path + (i, j)) for j, v in enumerate(row)])
    return np.array(rows, dtype=complex).reshape(n, n)


def _label(doc, value, path) -> str:
    if isinstance(value, (dict, list)) or value is None:
        doc.fail("node labels are scalars", path)
    return str(value)


# the config ---------------------------------------------------------------------------

@dataclass
class ElementSpec:
    name: str
    form: str  # coords | top | generator
    data: object
    params: dict = field(default_factory=dict)
    declared_bound: float | None = None
    monotone: bool = False


@dataclass
class SystemConfig:
    name: str = ""
    seed: int = 0
    coherence_tol: float = 1e-8
    nodes: list = field(default_factory=list)  # [(label, block sizes)]
    order: list = field(default_factory=list)  # [(lower, upper)]
    maps: list = field(default_factory=list)  # [(source, target, kept, unitaries or None)]
    chain: dict | None = None
    elements: dict = field(default_factory=dict)
    system: object = field(default=None, repr=False, compare=False)
    threads: dict = field(default_factory=dict, repr=False, compare=False)

    def semantic_key(self):
        """Everything that defines the system, with matrices as nested lists."""
        def arr(a):
            return None if a is None else np.asarray(a).tolist()

        maps = [(s, t, tuple(k), None if u is None else tuple(arr(v) for v in u)) for s, t, k, u in self.maps]
        elements = []
        for name in sorted(self.elements):
            e = self.elements[name]
            if e.form == "coords":
                data = {n: [arr(b) for b in blocks] for n, blocks in e.data.items()}
            elif e.form == "top":
                data = [arr(b) for b in e.data]
            else:
                data = e.data
            params = {k: arr(v) if isinstance(v, np.ndarray) else v for k, v in e.params.items()}
            elements.append((name, e.form, data, params, e.declared_bound, e.monotone))
        return (self.name, self.seed, self.coherence_tol, [tuple(n) for n in self.nodes],
                [tuple(p) for p in self.order], maps, self.chain, elements)


def _parse_nodes(doc, raw):
    nodes, seen = [], set()
    if not isinstance(raw.get("nodes"), list) or not raw["nodes"]:
        doc.fail("a finite system needs a nonempty 'nodes' list", ("nodes",))
    for i, item in enumerate(raw["nodes"]):
        path = ("nodes", i)
        _fields(doc, item, NODE_FIELDS, path, required=("label", "blocks"))
        label = _label(doc, item["label"], path + ("label",))
        if label in seen:
            doc.fail(f"duplicate node label {label!r}", path + ("label",))
        seen.add(label)
        blocks = item["blocks"]
        if not isinstance(blocks, list) or not blocks:
            doc.fail("blocks must be a nonempty list of block sizes", path + ("blocks",))
        sizes = tuple(_int(doc, b, path + ("blocks", j), minimum=1) for j, b in enumerate(blocks))
        nodes.append((label, sizes))
    return nodes


def _parse_order(doc, raw, labels):
    order = []
    for i, pair in enumerate(raw.get("order") or []):
        path = ("order", i)
        if not isinstance(pair, list) or len(pair) != 2:
            doc.fail("order entries are [lower, upper] pairs", path)
        a, b = (_label(doc, p, path + (j,)) for j, p in enumerate(pair))
        for j, n in enumerate((a, b)):
            if n not in labels:
                doc.fail(f"order refers to missing node {n!r}", path + (j,))
        order.append((a, b))
    return order


def _parse_maps(doc, raw, sizes):
    maps = []
    for i, item in enumerate(raw.get("maps") or []):
        path = ("maps", i)
        _fields(doc, item, MAP_FIELDS, path, required=("source", "target", "kept_blocks"))
        src = _label(doc, item["source"], path + ("source",))
        tgt = _label(doc, item["target"], path + ("target",))
        for key, n in (("source", src), ("target", tgt)):
            if n not in sizes:
                doc.fail(f"map refers to missing node {n!r}", path + (key,))
        kept = item["kept_blocks"]
        if not isinstance(kept, list):
            doc.fail("kept_blocks must be a list of source block indices", path + ("kept_blocks",))
        kept = tuple(_int(doc, k, path + ("kept_blocks", j), minimum=0) for j, k in enumerate(kept))
        if len(kept) != len(sizes[tgt]):
            doc.fail(f"kept_blocks needs one entry per block of {tgt!r} ({len(sizes[tgt])})", path + ("kept_blocks",))
        for j, k in enumerate(kept):
            if k >= len(sizes[src]):
                doc.fail(f"source {src!r} has no block {k}", path + ("kept_blocks", j))
            if sizes[src][k] != sizes[tgt][j]:
                doc.fail(f"block {k} of {src!r} has size {sizes[src][k]}, block {j} of {tgt!r} has "
                         f"size {sizes[tgt][j]}", path + ("kept_blocks", j))
        unitaries = item.get("unitaries")
        if unitaries is not None:
            if not isinstance(unitaries, list) or len(unitaries) != len(kept):
                doc.fail("unitaries needs one entry (matrix or null) per kept block", path + ("unitaries",))
            us = []
            for j, u in enumerate(unitaries):
                upath = path + ("unitaries", j)
                if u is None:
                    us.append(None)
                    continue
                n = sizes[tgt][j]
                m = _matrix(doc, u, n, upath)
                defect = float(np.linalg.norm(m.conj().T @ m - np.eye(n), 2))
                if defect > UNITARY_TOL:
                    doc.fail(f"declared unitary is not unitary (||U*U - 1|| = {defect:.3e})", upath)
                us.append(m)
            unitaries = tuple(us)
        maps.append((src, tgt, kept, unitaries))
    return maps


def _parse_chain(doc, raw):
    item = _fields(doc, raw["chain"], CHAIN_FIELDS, ("chain",))
    return {
        "block_size": _int(doc, item.get("block_size", 1), ("chain", "block_size"), minimum=1),
        "horizon": _int(doc, item.get("horizon", 50), ("chain", "horizon"), minimum=1),
    }


def _parse_blocks(doc, value, sizes, path):
    if not isinstance(value, list) or len(value) != len(sizes):
        doc.fail(f"expected {len(sizes)} blocks", path)
    return [_matrix(doc, b, n, path + (j,)) for j, (b, n) in enumerate(zip(value, sizes))]


def _parse_elements(doc, raw, sizes, top, chain):
    elements = {}
    items = raw.get("elements") or {}
    if not isinstance(items, dict):
        doc.fail("elements must be a mapping from names to definitions", ("elements",))
    for name, item in items.items():
        path = ("elements", name)
        _fields(doc, item, ELEMENT_FIELDS, path)
        forms = [f for f in ("coords", "top", "generator") if f in item]
        if len(forms) != 1:
            doc.fail("an element needs exactly one of coords, top, generator", path)
        form = forms[0]
        params = {}
        bound = item.get("declared_bound")
        if bound is not None:
            bound = _real(doc, bound, path + ("declared_bound",))
        monotone = item.get("monotone", False)
        if not isinstance(monotone, bool):
            doc.fail("monotone is true or false", path + ("monotone",))
        if form == "generator":
            if chain is None:
                doc.fail("generator elements need a chain system", path + ("generator",))
            gen = item["generator"]
            if gen not in GENERATORS:
                doc.fail(f"unknown generator {gen!r} (known: {', '.join(GENERATORS)})", path + ("generator",))
            raw_params = _fields(doc, item.get("params") or {}, {"matrix", "scale"}, path + ("params",))
            if "scale" in raw_params:
                params["scale"] = _complex(doc, raw_params["scale"], path + ("params", "scale"))
            if "matrix" in raw_params:
                if gen != "const_block":
                    doc.fail("only const_block takes a matrix", path + ("params", "matrix"))
                params["matrix"] = _matrix(doc, raw_params["matrix"], chain["block_size"], path + ("params", "matrix"))
            data = gen
        elif "params" in item:
            doc.fail("params only apply to generator elements", path + ("params",))
        elif chain is not None and form == "top":
            doc.fail("top form needs a finite system; use a generator on chains", path + ("top",))
        elif form == "top":
            data = _parse_blocks(doc, item["top"], sizes[top], path + ("top",))
        else:
            coords = item["coords"]
            if not isinstance(coords, dict):
                doc.fail("coords maps node labels to block lists", path + ("coords",))
            data = {}
            for n, blocks in coords.items():
                if chain is not None:
                    doc.fail("explicit coordinates are not supported on chains", path + ("coords", n))
                label = str(n)
                if label not in sizes:
                    doc.fail(f"coords refer to missing node {label!r}", path + ("coords", n))
                data[label] = _parse_blocks(doc, blocks, sizes[label], path + ("coords", n))
            missing = [n for n in sizes if n not in data]
            if missing:
                doc.fail(f"coords missing for nodes {missing}", path + ("coords",))
        elements[str(name)] = ElementSpec(str(name), form, data, params, bound, monotone)
    return elements


def generator_rule(chain: ChainSystem, spec: ElementSpec):
    n = chain.block_size
    scale = spec.params.get("scale", 1.0)
    if spec.data == "diag_harmonic":
        def rule(k):
            return AlgebraElement(chain.algebra(k), [scale / j * np.eye(n) for j in range(1, k + 1)])
    elif spec.data == "diag_linear":
        def rule(k):
            return AlgebraElement(chain.algebra(k), [scale * j * np.eye(n) for j in range(1, k + 1)])
    else:
        block = scale * spec.params.get("matrix", np.eye(n))

        def rule(k):
            return AlgebraElement(chain.algebra(k), [block] * k)
    return rule


def _build(doc: _Doc, cfg: SystemConfig, horizon: int | None):
    if cfg.chain is not None:
        h = cfg.chain["horizon"] if horizon is None else horizon
        system = ChainSystem(cfg.chain["block_size"], h, label=cfg.name)
    else:
        labels = [n for n, _ in cfg.nodes]
        algebras = {n: FinStarAlgebra(s, n) for n, s in cfg.nodes}
        poset = IndexPoset(labels, cfg.order)
        problems = poset.problems()
        if problems:
            kind, witness = problems[0]
            doc.fail(f"order is not a directed partial order ({kind} fails at {witness})", ("order",))
        maps = {}
        for i, (src, tgt, kept, us) in enumerate(cfg.maps):
            if not poset.leq(tgt, src) or src == tgt:
                doc.fail(f"map {src!r} -> {tgt!r} needs {tgt!r} strictly below {src!r} in the order", ("maps", i))
            if (tgt, src) in maps:
                doc.fail(f"second map for the pair ({tgt!r}, {src!r})", ("maps", i))
            maps[(tgt, src)] = ConnectingMap(src, tgt, algebras[src], algebras[tgt], kept, us)
        for i, (a, b) in enumerate(cfg.order):
            if (a, b) not in maps:
                doc.fail(f"no map given for the order pair ({a!r}, {b!r})", ("order", i))
        try:
            system = ProjectiveSystem(poset, algebras, maps, label=cfg.name)
        except LawstarError as exc:
            doc.fail(str(exc), ("maps",))
    report = validate_system(system, tol=cfg.coherence_tol)
    if not report.ok:
        bad = report.failures()[0]
        doc.fail(f"system fails validation: {bad['check']} at {bad['witness']}", ("maps",) if cfg.maps else ())
    cfg.system = system
    for name, spec in cfg.elements.items():
        path = ("elements", name)
        try:
            if spec.form == "generator":
                cfg.threads[name] = Thread(system, rule=generator_rule(system, spec),
                                           declared_bound=spec.declared_bound, monotone=spec.monotone, label=name)
            elif spec.form == "top":
                x = system.push(AlgebraElement(system.algebra(system.top()), spec.data))
                cfg.threads[name] = Thread(system, x.coords, declared_bound=spec.declared_bound,
                                           monotone=spec.monotone, label=name)
            else:
                coords = {n: AlgebraElement(system.algebra(n), blocks) for n, blocks in spec.data.items()}
                cfg.threads[name] = lift(coords, system, cfg.coherence_tol, declared_bound=spec.declared_bound,
                                         monotone=spec.monotone, label=name)
        except CoherenceError as exc:
            doc.fail(str(exc), path)


def parse_config(text: str, horizon: int | None = None) -> SystemConfig:
    """Parse, build and validate a system document; raise ``ConfigError`` with a location."""
    doc = _Doc(text)
    raw = _fields(doc, doc.value, TOP_FIELDS, ())
    cfg = SystemConfig()
    cfg.name = str(raw.get("name", ""))
    cfg.seed = _int(doc, raw.get("seed", 0), ("seed",), minimum=0)
    tols = _fields(doc, raw.get("tolerances") or {}, TOLERANCE_FIELDS, ("tolerances",))
    if "coherence" in tols:
        cfg.coherence_tol = _real(doc, tols["coherence"], ("tolerances", "coherence"))
    if "chain" in raw:
        for key in ("nodes", "order", "maps"):
            if key in raw:
                doc.fail("a chain system takes no explicit nodes, order or maps", (key,))
        cfg.chain = _parse_chain(doc, raw)
        sizes, top = {}, None
    else:
        cfg.nodes = _parse_nodes(doc, raw)
        sizes = dict(cfg.nodes)
        cfg.order = _parse_order(doc, raw, sizes)
        cfg.maps = _parse_maps(doc, raw, sizes)
        top = None
        if not IndexPoset([n for n, _ in cfg.nodes], cfg.order).problems():
            top = IndexPoset([n for n, _ in cfg.nodes], cfg.order).top()
    cfg.elements = _parse_elements(doc, raw, sizes, top, cfg.chain)
    _build(doc, cfg, horizon)
    return cfg


def load_config(path: str, horizon: int | None = None) -> SystemConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc.strerror}", path) from None
    return parse_config(text, horizon)


# emission -----------------------------------------------------------------------------

def _num(z):
    z = complex(z)
    return float(z.real) if z.imag == 0 else [float(z.real), float(z.imag)]


class _Row(list):
    """A matrix row, always emitted on one line."""


class _Dumper(yaml.SafeDumper):
    pass


_Dumper.add_representer(_Row, lambda d, row: d.represent_sequence("tag:yaml.org,2002:seq", row, flow_style=True))


def _emit_matrix(m):
    return [_Row(_num(v) for v in row) for row in np.asarray(m)]


def config_document(cfg: SystemConfig) -> dict:
    doc: dict = {}
    if cfg.name:
        doc["name"] = cfg.name
    doc["seed"] = cfg.seed
    doc["tolerances"] = {"coherence": cfg.coherence_tol}
    if cfg.chain is not None:
        doc["chain"] = dict(cfg.chain)
    else:
        doc["nodes"] = [{"label": n, "blocks": list(s)} for n, s in cfg.nodes]
        doc["order"] = [[a, b] for a, b in cfg.order]
        maps = []
        for src, tgt, kept, us in cfg.maps:
            item = {"source": src, "target": tgt, "kept_blocks": list(kept)}
            if us is not None:
                item["unitaries"] = [None if u is None else _emit_matrix(u) for u in us]
            maps.append(item)
        doc["maps"] = maps
    if cfg.elements:
        elements = {}
        for name, e in cfg.elements.items():
            item: dict = {}
            if e.form == "coords":
                item["coords"] = {n: [_emit_matrix(b) for b in blocks] for n, blocks in e.data.items()}
            elif e.form == "top":
                item["top"] = [_emit_matrix(b) for b in e.data]
            else:
                item["generator"] = e.data
                if e.params:
                    item["params"] = {k: _emit_matrix(v) if k == "matrix" else _num(v) for k, v in e.params.items()}
            if e.declared_bound is not None:
                item["declared_bound"] = e.declared_bound
            if e.monotone:
                item["monotone"] = True
            elements[name] = item
        doc["elements"] = elements
    return doc


def emit_config(cfg: SystemConfig) -> str:
    """Canonical YAML for ``cfg``; floats are written with full round-trip precision."""
    return yaml.dump(config_document(cfg), Dumper=_Dumper, sort_keys=False, default_flow_style=None, width=100)


def config_from_system(system: ProjectiveSystem, elements: dict | None = None, name: str = "",
                       seed: int = 0) -> SystemConfig:
    """Describe a finite system (and named threads, by their top coordinate) as a config."""
    cfg = SystemConfig(name=name, seed=seed)
    cfg.nodes = [(str(n), system.algebra(n).block_sizes) for n in system.nodes]
    pairs = list(system.explicit_maps) or system.pairs()
    cfg.order = [(str(a), str(b)) for a, b in pairs]
    for a, b in pairs:
        g = system.map(a, b)
        us = None
        if g.unitaries is not None:
            us = tuple(None if g.unitary(j) is None else np.asarray(g.unitary(j)) for j in range(len(g.kept_blocks)))
        cfg.maps.append((str(b), str(a), tuple(g.kept_blocks), us))
    top = system.top()
    for key, x in (elements or {}).items():
        cfg.elements[key] = ElementSpec(key, "top", [np.asarray(b) for b in x(top).blocks])
    return cfg

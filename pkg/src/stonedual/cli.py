"""Command-line front end: parse instance documents, run checks, print reports.

Instance documents are JSON files validated against
``schemas/instance.schema.json`` and then checked semantically (invariant
factor chains, dangling names, map shapes).  Every report lists its checks
sorted by name; structured reports are byte-identical for the same input and
seed.  Exit codes: 0 all checks pass, 1 a check failed, 2 input error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Callable

import jsonschema
import numpy as np

from . import cohomtree, cosheafside, dualbridge, sheafside
from .cohomtree import DEFAULT_DEGREE_CAP, Tree, TreeAction
from .cosheafside import CosheafTable, ProSheafSystem
from .finab import AbHom, AlgebraError, Exactness, FinAbGroup, double_dual_check, dual_group
from .ringmod import (
    FinGroup,
    FiniteRing,
    FinModule,
    GSet,
    ModHom,
    cyclic_ring,
    dual_module,
    evaluation_mod_hom,
    group_ring,
    module_from_group,
    permutation_module,
    trivial_module,
    verify_module_axioms,
)
from .sheafside import EtaleSystem, PresheafTable
from .stone import LevelChain, all_covers, subsets, validate_chain
from .verdict import Verdict

SUBCOMMANDS = ("validate", "dualize", "sections", "directsum", "roundtrip", "duality-square", "cohomology", "shapiro", "mv-check")
DEGREE_CAP_ENV = "STONEDUAL_DEGREE_CAP"
EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """A problem with the instance document; ``path`` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
        self.message = message


def load_schema(name: str) -> dict:
    return json.loads(resources.files("stonedual").joinpath("schemas", name).read_text())


def _fmt_path(parts) -> str:
    out = ""
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else (f".{p}" if out else str(p))
    return out


# --------------------------------------------------------------------------
# Parsed documents


@dataclass
class InstanceDocument:
    path: str
    raw: dict
    kind: str
    groups: dict[str, FinGroup] = field(default_factory=dict)
    rings: dict[str, FiniteRing] = field(default_factory=dict)
    modules: dict[str, FinModule] = field(default_factory=dict)
    maps: dict[str, ModHom] = field(default_factory=dict)
    chains: dict[str, LevelChain] = field(default_factory=dict)
    obj: Any = None
    extras: dict = field(default_factory=dict)


def parse_instance(path) -> InstanceDocument:
    path = Path(path)
    if not path.is_file():
        raise InputError("", f"no such file: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise InputError("", f"not valid JSON: {e}") from None
    return parse_document(raw, str(path))


def parse_document(raw: Any, path: str = "<document>") -> InstanceDocument:
    validator = jsonschema.Draft202012Validator(load_schema("instance.schema.json"))
    errors = sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message))
    if errors:
        err = jsonschema.exceptions.best_match(errors)
        raise InputError(_fmt_path(err.absolute_path) or "$", err.message)
    doc = InstanceDocument(path, raw, raw["kind"])
    _Builder(doc).build()
    return doc


class _Builder:
    def __init__(self, doc: InstanceDocument):
        self.doc = doc
        self.raw = doc.raw

    def fail(self, parts, message):
        raise InputError(_fmt_path(parts), message)

    def guard(self, parts, fn, *args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AlgebraError as e:
            self.fail(parts, str(e))

    def ref(self, table: str, name: str, parts):
        found = getattr(self.doc, table)
        if name not in found:
            self.fail(parts, f"unknown {table[:-1]} {name!r} (declared: {sorted(found) or 'none'})")
        return found[name]

    def build(self):
        for name in self.raw.get("groups", {}):
            self.group(name, ())
        for name, entry in self.raw.get("rings", {}).items():
            self.doc.rings[name] = self.ring(name, entry)
        for name, entry in self.raw.get("modules", {}).items():
            self.doc.modules[name] = self.module(name, entry)
        for name, entry in self.raw.get("maps", {}).items():
            self.doc.maps[name] = self.map(name, entry)
        for name, entry in self.raw.get("chains", {}).items():
            self.doc.chains[name] = self.chain(name, entry)
        getattr(self, "body_" + self.doc.kind.replace("-", "_"))(self.raw["body"])

    # library sections

    def group(self, name: str, stack) -> FinGroup:
        if name in self.doc.groups:
            return self.doc.groups[name]
        entries = self.raw.get("groups", {})
        if name not in entries:
            self.fail(("groups",) + tuple(stack[-1:]), f"unknown group {name!r}")
        if name in stack:
            self.fail(("groups", name), "groups are defined in terms of each other")
        entry = entries[name]
        parts = ("groups", name)
        if "cyclic" in entry:
            G = FinGroup.cyclic(entry["cyclic"])
        elif "symmetric" in entry:
            G = FinGroup.symmetric(entry["symmetric"])
        elif "product" in entry:
            a, b = (self.group(n, stack + (name,)) for n in entry["product"])
            G = FinGroup.direct_product(a, b)
        else:
            G = self.guard(parts + ("table",), FinGroup, entry["table"])
        G = FinGroup(G.table, name=name)
        self.doc.groups[name] = G
        return G

    def ring(self, name: str, entry) -> FiniteRing:
        parts = ("rings", name)
        if "cyclic" in entry:
            return cyclic_ring(entry["cyclic"])
        if "group_ring" in entry:
            gr = entry["group_ring"]
            G = self.ref("groups", gr["group"], parts + ("group_ring", "group"))
            return group_ring(gr["modulus"], G)
        t = entry["table"]
        A = self.guard(parts + ("table", "factors"), FinAbGroup, t["factors"])
        r = A.rank
        mult = t["mult"]
        if len(mult) != r or any(len(row) != r or any(len(v) != r for v in row) for row in mult):
            self.fail(parts + ("table", "mult"), f"need a {r} x {r} table of length-{r} vectors")
        if len(t["one"]) != r:
            self.fail(parts + ("table", "one"), f"need a length-{r} vector")
        return self.guard(parts + ("table",), FiniteRing, A, mult, tuple(t["one"]), name=name)

    def module(self, name: str, entry) -> FinModule:
        parts = ("modules", name)
        R = self.ref("rings", entry["ring"], parts + ("ring",))
        side = entry.get("side", "left")
        if "permutation" in entry:
            return self.permutation_module(name, entry, R, side)
        A = self.guard(parts + ("factors",), FinAbGroup, entry["factors"])
        if "action" not in entry:
            M = self.guard(parts, module_from_group, A, R, side)
            return FinModule(M.group, M.ring, M.action, side, name=name, check=False)
        acts = entry["action"]
        if len(acts) != R.rank:
            self.fail(parts + ("action",), f"need one matrix per ring generator ({R.rank}), got {len(acts)}")
        homs = []
        for i, mat in enumerate(acts):
            homs.append(self.hom(parts + ("action", i), A, A, mat))
        return self.guard(parts + ("action",), FinModule, A, R, tuple(homs), side, name=name)

    def permutation_module(self, name: str, entry, R: FiniteRing, side: str) -> FinModule:
        parts = ("modules", name, "permutation")
        G = R.group
        if G is None:
            self.fail(parts, "permutation modules need a group ring Z/m[G]")
        perms = entry["permutation"]
        if len(perms) != G.order:
            self.fail(parts, f"need one permutation per group element ({G.order}), got {len(perms)}")
        n = len(perms[0]) if perms else 0
        for g, p in enumerate(perms):
            if sorted(p) != list(range(n)):
                self.fail(parts + (g,), f"not a permutation of 0..{n - 1}")
        Y = self.guard(parts, GSet, G, n, tuple(tuple(p) for p in perms))
        M = self.guard(parts, permutation_module, R.modulus, Y, side)
        if "factors" in entry and tuple(entry["factors"]) != M.group.factors:
            self.fail(("modules", name, "factors"), f"a permutation module on {n} points has factors {list(M.group.factors)}")
        return FinModule(M.group, M.ring, M.action, side, name=name, check=False)

    def hom(self, parts, A: FinAbGroup, B: FinAbGroup, mat) -> AbHom:
        if len(mat) != B.rank or any(len(row) != A.rank for row in mat):
            self.fail(parts, f"need a {B.rank} x {A.rank} matrix (rows = target generators)")
        M = np.array(mat, dtype=np.int64).reshape(B.rank, A.rank)
        return self.guard(parts, AbHom, A, B, M)

    def map(self, name: str, entry) -> ModHom:
        parts = ("maps", name)
        M = self.ref("modules", entry["source"], parts + ("source",))
        N = self.ref("modules", entry["target"], parts + ("target",))
        h = self.hom(parts + ("matrix",), M.group, N.group, entry["matrix"])
        return self.guard(parts, ModHom, M, N, h)

    def chain(self, name: str, entry) -> LevelChain:
        parts = ("chains", name)
        return self.guard(parts, LevelChain, tuple(entry["sizes"]), tuple(tuple(p) for p in entry.get("projections", ())))

    def map_ref(self, ref: str, source: str, target: str, parts) -> ModHom:
        """A named map, or ``id`` / ``zero``, that must go ``source -> target``."""
        M, N = self.doc.modules[source], self.doc.modules[target]
        if ref == "zero":
            return ModHom.zero(M, N)
        if ref == "id":
            if source != target:
                self.fail(parts, f"'id' needs equal source and target, got {source!r} -> {target!r}")
            return ModHom.identity(M)
        f = self.ref("maps", ref, parts)
        entry = self.raw["maps"][ref]
        if (entry["source"], entry["target"]) != (source, target):
            self.fail(parts, f"map {ref!r} goes {entry['source']} -> {entry['target']}, expected {source} -> {target}")
        return f

    # bodies

    def body_group(self, body):
        self.doc.obj = self.guard(("body", "factors"), FinAbGroup, body["factors"])

    def body_ring(self, body):
        self.doc.obj = self.ref("rings", body["ring"], ("body", "ring"))

    def body_module(self, body):
        M = self.ref("modules", body["module"], ("body", "module"))
        self.doc.obj = M
        subs = body.get("subgroups")
        if subs is not None:
            G = M.ring.group
            if G is None:
                self.fail(("body", "subgroups"), "subgroups need a module over a group ring")
            for i, H in enumerate(subs):
                if not self.guard(("body", "subgroups", i), G.is_subgroup, frozenset(H)):
                    self.fail(("body", "subgroups", i), f"{sorted(H)} is not a subgroup")
            self.doc.extras["subgroups"] = [frozenset(H) for H in subs]

    def body_chain(self, body):
        self.doc.obj = self.ref("chains", body["chain"], ("body", "chain"))

    def _table(self, body, cls):
        ch = self.ref("chains", body["chain"], ("body", "chain"))
        level = body.get("level", ch.top)
        if level > ch.top:
            self.fail(("body", "level"), f"chain has levels 0..{ch.top}")
        n = ch.sizes[level]
        if n > sheafside.TABLE_POINT_CAP:
            self.fail(("body", "level"), f"tables are limited to {sheafside.TABLE_POINT_CAP} points")
        values, names = {}, {}
        for key, mname in body["values"].items():
            U = self._subset(key, n, ("body", "values", key))
            names[U] = mname
            values[U] = self.ref("modules", mname, ("body", "values", key))
        for U in subsets(range(n)):
            if U not in values:
                self.fail(("body", "values"), f"no value on {_subset_key(U)!r}")
        covariant = cls is CosheafTable
        given = {}
        for key, ref in body["maps"].items():
            if "<" not in key:
                self.fail(("body", "maps", key), "keys look like 'U<V' with U, V comma-separated point lists")
            a, b = key.split("<", 1)
            U = self._subset(a, n, ("body", "maps", key))
            V = self._subset(b, n, ("body", "maps", key))
            if not U < V:
                self.fail(("body", "maps", key), "need a strict inclusion U < V")
            src, dst = (names[U], names[V]) if covariant else (names[V], names[U])
            given[(U, V)] = self.map_ref(ref, src, dst, ("body", "maps", key))
        hasse = {(U, V): f for (U, V), f in given.items() if len(V - U) == 1}
        table = self.guard(("body", "maps"), cls.from_hasse, ch, level, values, hasse)
        full = table.res if cls is PresheafTable else table.cor
        for (U, V), f in given.items():
            if full[(U, V)] != f:
                self.fail(("body", "maps", f"{_subset_key(U)}<{_subset_key(V)}"), "disagrees with the composite of one-point maps")
        self.doc.obj = table

    def _subset(self, key: str, n: int, parts) -> frozenset:
        try:
            pts = [int(t) for t in key.split(",")] if key.strip() else []
        except ValueError:
            self.fail(parts, f"{key!r} is not a comma-separated list of points")
        if any(not 0 <= x < n for x in pts) or len(set(pts)) != len(pts):
            self.fail(parts, f"{key!r} is not a subset of 0..{n - 1}")
        return frozenset(pts)

    def body_sheaf(self, body):
        self._table(body, PresheafTable)

    def body_cosheaf(self, body):
        self._table(body, CosheafTable)

    def _system(self, body, cls):
        ch = self.ref("chains", body["chain"], ("body", "chain"))
        R = self.ref("rings", body["ring"], ("body", "ring"))
        side = body.get("side", "left")
        fib = body["fibres"]
        if len(fib) != ch.depth:
            self.fail(("body", "fibres"), f"need one list per level ({ch.depth}), got {len(fib)}")
        fibres = []
        for l, names in enumerate(fib):
            if len(names) != ch.sizes[l]:
                self.fail(("body", "fibres", l), f"level {l} has {ch.sizes[l]} points, got {len(names)} fibres")
            mods = []
            for x, mname in enumerate(names):
                M = self.ref("modules", mname, ("body", "fibres", l, x))
                if M.ring != R or M.side != side:
                    self.fail(("body", "fibres", l, x), f"module {mname!r} is not a {side} module over {body['ring']!r}")
                mods.append(M)
            fibres.append(tuple(mods))
        maps_raw = body.get("maps", [])
        if len(maps_raw) != ch.depth - 1:
            self.fail(("body", "maps"), f"need one list per projection ({ch.depth - 1}), got {len(maps_raw)}")
        maps = []
        for l, refs in enumerate(maps_raw):
            if len(refs) != ch.sizes[l + 1]:
                self.fail(("body", "maps", l), f"level {l + 1} has {ch.sizes[l + 1]} points, got {len(refs)} maps")
            row = []
            for x, ref in enumerate(refs):
                lo, hi = fib[l][ch.projections[l][x]], fib[l + 1][x]
                src, dst = (lo, hi) if cls is EtaleSystem else (hi, lo)
                row.append(self.map_ref(ref, src, dst, ("body", "maps", l, x)))
            maps.append(tuple(row))
        self.doc.obj = self.guard(("body",), cls, ch, tuple(fibres), tuple(maps), R, side)
        if "universal" in body:
            if cls is not ProSheafSystem:
                self.fail(("body", "universal"), "a universal-property target needs a prosheaf instance")
            u = body["universal"]
            P = self.ref("modules", u["target"], ("body", "universal", "target"))
            top = fib[-1]
            if len(u["beta"]) != len(top):
                self.fail(("body", "universal", "beta"), f"need one map per top-level point ({len(top)})")
            beta = [self.map_ref(ref, top[x], u["target"], ("body", "universal", "beta", x)) for x, ref in enumerate(u["beta"])]
            self.doc.extras["universal"] = (P, beta)
        if "functors" in body:
            if cls is not EtaleSystem:
                self.fail(("body", "functors"), "functor lifting needs an etale instance")
            self.doc.extras["functors"] = list(body["functors"])

    def body_etale(self, body):
        self._system(body, EtaleSystem)

    def body_prosheaf(self, body):
        self._system(body, ProSheafSystem)

    def body_tree_action(self, body):
        G = self.ref("groups", body["group"], ("body", "group"))
        A = self.ref("modules", body["coefficients"], ("body", "coefficients"))
        if A.ring.group != G:
            self.fail(("body", "coefficients"), f"coefficients must be a module over Z/m[{body['group']}]")
        tree = self.guard(("body", "edges"), Tree, body["vertices"], tuple(tuple(e) for e in body["edges"]))
        perms = body["vertex_action"]
        if len(perms) != G.order:
            self.fail(("body", "vertex_action"), f"need one permutation per group element ({G.order})")
        for g, p in enumerate(perms):
            if sorted(p) != list(range(body["vertices"])):
                self.fail(("body", "vertex_action", g), f"not a permutation of 0..{body['vertices'] - 1}")
        TA = self.guard(("body", "vertex_action"), TreeAction, G, tree, tuple(tuple(p) for p in perms))
        self.doc.obj = TA
        self.doc.extras["coefficients"] = A


def _subset_key(U) -> str:
    return ",".join(map(str, sorted(U)))


# --------------------------------------------------------------------------
# Reports


@dataclass
class Check:
    name: str
    ok: bool
    reason: str = ""
    witness: Any = None
    data: Any = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "ok": self.ok}
        if not self.ok:
            out["reason"] = self.reason or "check failed"
            out["witness"] = plain(self.witness if self.witness is not None else self.reason or "check failed")
        if self.data is not None:
            out["data"] = plain(self.data)
        return out


@dataclass
class Options:
    seed: int = 0
    degree_cap: int = DEFAULT_DEGREE_CAP
    fmt: str = "text"
    timing: bool = False


def plain(x):
    """JSON-ready form: residue tuples and matrices as lists, sets sorted."""
    if isinstance(x, (bool, str)) or x is None:
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, FinAbGroup):
        return {"factors": list(x.factors), "order": x.order}
    if isinstance(x, AbHom):
        return {"matrix": x.matrix.tolist()}
    if isinstance(x, ModHom):
        return {"source": list(x.source.group.factors), "target": list(x.target.group.factors), "matrix": x.hom.matrix.tolist()}
    if isinstance(x, FinModule):
        return {"factors": list(x.group.factors), "order": x.order, "side": x.side}
    if isinstance(x, Exactness):
        return {"position": x.position, "reason": x.reason, "witness": plain(x.witness)}
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (set, frozenset)):
        return sorted(plain(v) for v in x)
    if isinstance(x, dict):
        return {str(k): plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [plain(v) for v in x]
    return str(x)


def _from_verdict(name: str, v: Verdict, data=None) -> Check:
    return Check(name, bool(v), v.reason, v.witness, data if data is not None else (v.details or None))


def _safe(name: str, fn: Callable[[], list[Check] | Check]) -> list[Check]:
    """Run one check; an algebra error inside it is a failed check, not a crash."""
    try:
        out = fn()
    except AlgebraError as e:
        return [Check(name, False, str(e), {"error": str(e)})]
    return out if isinstance(out, list) else [out]


# --------------------------------------------------------------------------
# Commands


def _validate(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj = doc.obj
    kind = doc.kind
    if kind == "group":
        return [
            Check("group.invariant_factors", True, data={"factors": list(obj.factors), "order": obj.order}),
            Check("group.double_dual", double_dual_check(obj), "evaluation map is not bijective", list(obj.factors)),
        ]
    if kind == "ring":
        return [Check("ring.axioms", True, data={"order": obj.order, "characteristic": obj.characteristic, "commutative": obj.is_commutative()})]
    if kind == "module":
        return _safe("module.axioms", lambda: Check("module.axioms", verify_module_axioms(obj), "module axioms fail", data={"factors": list(obj.group.factors), "side": obj.side}))
    if kind == "chain":
        ok, bad = validate_chain(obj)
        return [Check("chain.surjective", ok, f"projection {bad} is not onto", {"projection": bad}, {"sizes": list(obj.sizes)})]
    if kind == "sheaf":
        return _condition_checks(obj, "sheaf", sheafside.sheaf_condition_check, sheafside.disjoint_union_check)
    if kind == "cosheaf":
        return _condition_checks(obj, "cosheaf", cosheafside.cosheaf_condition_check, cosheafside.codisjoint_union_check)
    if kind in ("etale", "prosheaf"):
        ok, bad = validate_chain(obj.chain)
        return [
            Check(f"{kind}.structure", True, data={"levels": [len(f) for f in obj.fibres]}),
            Check(f"{kind}.chain_surjective", ok, f"projection {bad} is not onto", {"projection": bad}),
        ]
    if kind == "tree-action":
        TA = obj

        _, verdicts = cohomtree.tree_sequence(doc.extras["coefficients"].ring.modulus, TA)
        bad = next((v for v in verdicts if not v), None)
        exact = Check("tree.exact_sequence", bad is None)
        if bad is not None:
            exact.reason = f"edge/vertex sequence is not exact at position {bad.position}: {bad.reason}"
            exact.witness = {"position": bad.position, "element": plain(bad.witness)}
        return [Check("tree.is_tree", TA.tree.is_tree(), "graph is not a tree", {"edges": list(TA.tree.edges)}), exact]
    raise InputError("kind", f"validate does not handle {kind!r}")


def condition_over_covers(table, check):
    """First cover where the (co)sheaf sequence is not exact, or ``None``."""
    for cover in all_covers(table.points):
        v = check(table, cover.members)
        if not v:
            return cover, v
    return None


def _condition_checks(table, label, cond, disjoint) -> list[Check]:
    du = disjoint(table)
    bad = condition_over_covers(table, cond)
    cover_check = Check(f"{label}.condition_all_covers", bad is None)
    if bad is not None:
        cover, ex = bad
        cover_check.reason = f"not exact at position {ex.position}: {ex.reason}"
        cover_check.witness = {"cover": [sorted(m) for m in cover.members], "position": ex.position, "element": plain(ex.witness)}
    agree = Check(f"{label}.criteria_agree", bool(du) == (bad is None), "the cover condition and the disjoint-union condition disagree",
                  {"disjoint_union": bool(du), "all_covers": bad is None})
    return [_from_verdict(f"{label}.disjoint_union", du), cover_check, agree]


def _dualize(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj, kind = doc.obj, doc.kind
    if kind == "group":
        D = dual_group(obj)
        return [Check("dual.order", D.order == obj.order, "orders differ", {"dual": list(D.factors)}, {"dual": D}),
                Check("dual.double_dual", double_dual_check(obj), "evaluation map is not bijective", list(obj.factors))]
    if kind == "module":
        D = dual_module(obj)
        ev = evaluation_mod_hom(obj)
        return [Check("dual.module", D.order == obj.order, "orders differ", None, {"dual": D}),
                Check("dual.double_dual", ev.is_iso(), "evaluation is not an isomorphism", ev)]
    if kind == "etale":
        S = dualbridge.dual_etale_to_prosheaf(obj)
        data = {"fibres": [[M for M in level] for level in S.fibres], "maps": [[f for f in row] for row in S.maps]}
        return ([Check("dual.system", True, data=data)]
                + _safe("dual.fibre_duality", lambda: _from_verdict("dual.fibre_duality", dualbridge.fibre_duality_check(obj)))
                + _safe("dual.double_dual", lambda: _from_verdict("dual.double_dual", dualbridge.double_dual_system_check(obj))))
    if kind == "prosheaf":
        E = dualbridge.dual_prosheaf_to_etale(obj)
        data = {"fibres": [[M for M in level] for level in E.fibres], "maps": [[f for f in row] for row in E.transitions]}
        return ([Check("dual.system", True, data=data)]
                + _safe("dual.fibre_duality", lambda: _from_verdict("dual.fibre_duality", dualbridge.fibre_duality_check(E))))
    if kind in ("sheaf", "cosheaf"):
        if kind == "sheaf":
            D, before, after = dualbridge.dual_table(obj), sheafside.is_sheaf(obj), None
            after = cosheafside.is_cosheaf(D)
        else:
            D, before = dualbridge.dual_cotable(obj), cosheafside.is_cosheaf(obj)
            after = sheafside.is_sheaf(D)
        data = {"values": {_subset_key(U): M for U, M in sorted(D.values.items(), key=lambda kv: (len(kv[0]), sorted(kv[0])))}}
        return [Check("dual.table", True, data=data),
                Check("dual.condition_preserved", before == after, "the dual table changes the gluing condition", {"before": before, "after": after})]
    raise InputError("kind", f"dualize does not handle {kind!r}")


def _sections(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj, kind = doc.obj, doc.kind
    if kind == "etale":
        gs = sheafside.global_sections(obj)
        data = {
            "levels": [{"level": l, "module": M} for l, M in enumerate(gs.modules)],
            "chain_maps": list(gs.maps),
            "value": gs.value,
        }
        checks = [Check("sections.global", True, data=data)]
        for tag in doc.extras.get("functors", []):
            name = f"sections.functor.{tag}"

            def lift(tag=tag, name=name):
                fl = sheafside.lift_functor_sheaf(tag, obj)
                return _from_verdict(name, fl.verdict, {"fibres": [list(level) for level in fl.system.fibres]})

            checks += _safe(name, lift)
        return checks
    if kind == "sheaf":
        X = frozenset(obj.points)
        du = sheafside.disjoint_union_check(obj)
        return [Check("sections.global", True, data={"value": obj(X)}), _from_verdict("sections.product_decomposition", du)]
    raise InputError("kind", f"sections does not handle {kind!r}")


def _directsum(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj, kind = doc.obj, doc.kind
    if kind == "prosheaf":
        chain, omega = cosheafside.profinite_direct_sum(obj)
        data = {"levels": [{"level": l, "module": M} for l, M in enumerate(chain.modules)], "chain_maps": list(chain.maps), "value": chain.value}
        inj = all(c.hom.is_injective() for c in omega.components)
        checks = [Check("directsum.sum", True, data=data), Check("directsum.omega_injective", inj, "a component of omega is not injective")]
        if "universal" in doc.extras:
            P, beta = doc.extras["universal"]

            def up():
                fac = cosheafside.universal_property_check(obj, P, beta)
                return _from_verdict("directsum.universal_property", fac.verdict,
                                     {"beta_tilde": fac.beta_tilde, "candidates_checked": fac.candidates_checked, "solutions": fac.solutions})

            checks += _safe("directsum.universal_property", up)
        return checks
    if kind == "cosheaf":
        X = frozenset(obj.points)
        du = cosheafside.codisjoint_union_check(obj)
        return [Check("directsum.sum", True, data={"value": obj(X)}), _from_verdict("directsum.sum_decomposition", du)]
    raise InputError("kind", f"directsum does not handle {kind!r}")


def _roundtrip(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj, kind = doc.obj, doc.kind
    if kind in ("sheaf", "etale"):
        return _safe("roundtrip", lambda: _from_verdict("roundtrip", sheafside.roundtrip_check(obj)))
    if kind in ("cosheaf", "prosheaf"):
        return _safe("roundtrip", lambda: _from_verdict("roundtrip", cosheafside.roundtrip_check_co(obj)))
    raise InputError("kind", f"roundtrip does not handle {kind!r}")


def _duality_square(doc: InstanceDocument, opts: Options) -> list[Check]:
    obj, kind = doc.obj, doc.kind
    if kind not in ("etale", "prosheaf"):
        raise InputError("kind", f"duality-square does not handle {kind!r}")
    E = obj if kind == "etale" else dualbridge.dual_prosheaf_to_etale(obj)

    def pairing():
        w = dualbridge.sum_product_duality_check(E, opts.seed)
        data = {"levels": [{"level": p.level, "order": p.order_module_side, "pairs_checked": p.pairs_checked} for p in w.levels],
                "chain_compatible": list(w.chain_compatible)}
        bad = next((p for p in w.levels if not p.ok), None)
        witness = None if bad is None else {"level": bad.level, "pairing": bad.pairing}
        return Check("duality.pairing", w.ok, w.reason, witness, data)

    def square():
        rep = dualbridge.square_commutes_check(obj, opts.seed)
        return _from_verdict("duality.square", rep.verdict, {"witness": rep.witness, "morphisms": list(rep.morphisms)})

    return _safe("duality.pairing", pairing) + _safe("duality.square", square)


def _group_of(doc: InstanceDocument) -> tuple[FinGroup, FinModule]:
    if doc.kind != "module":
        raise InputError("kind", "cohomology needs a module instance over a group ring")
    M = doc.obj
    if M.ring.group is None:
        raise InputError("body.module", "cohomology needs a module over a group ring Z/m[G]")
    return M.ring.group, M


def _cohomology(doc: InstanceDocument, opts: Options) -> list[Check]:
    G, A = _group_of(doc)
    n = opts.degree_cap

    def run():
        bar = cohomtree.bar_cohomology(G, A, n)
        ext = cohomtree.ext_via_resolution(trivial_module(A.ring.modulus, G, A.side), A, n)
        ok = [b.factors for b in bar] == [e.factors for e in ext]
        witness = None
        if not ok:
            d = next(i for i, (b, e) in enumerate(zip(bar, ext)) if b.factors != e.factors)
            witness = {"degree": d, "bar": bar[d], "ext": ext[d]}
        return [Check("cohomology.bar", True, data={"degrees": [{"n": i, "group": H} for i, H in enumerate(bar)]}),
                Check("cohomology.ext_agrees", ok, "Ext of the trivial module differs from bar cohomology", witness,
                      {"degrees": [{"n": i, "group": H} for i, H in enumerate(ext)]})]

    return _safe("cohomology.bar", run)


def _shapiro(doc: InstanceDocument, opts: Options) -> list[Check]:
    G, A = _group_of(doc)
    subs = doc.extras.get("subgroups") or G.all_subgroups()
    checks = []
    for H in subs:
        name = "shapiro.H=" + "[" + ",".join(map(str, sorted(H))) + "]"

        def run(H=H, name=name):
            rep = cohomtree.shapiro_check(G, H, A, opts.degree_cap)
            witness = None
            if not rep.ok:
                d = next(i for i, (e, b) in enumerate(zip(rep.ext_side, rep.bar_side)) if e.factors != b.factors)
                witness = {"degree": d, "ext": rep.ext_side[d], "bar": rep.bar_side[d]}
            return Check(name, rep.ok, "Ext of the induced module differs from subgroup cohomology", witness,
                         {"subgroup": sorted(H), "ext": rep.ext_side, "bar": rep.bar_side})

        checks += _safe(name, run)
    return checks


def _mv_check(doc: InstanceDocument, opts: Options) -> list[Check]:
    if doc.kind != "tree-action":
        raise InputError("kind", f"mv-check does not handle {doc.kind!r}")
    TA, A = doc.obj, doc.extras["coefficients"]
    m = A.ring.modulus

    _, verdicts = cohomtree.tree_sequence(m, TA)
    bad = next((v for v in verdicts if not v), None)
    seq = Check("mv.tree_sequence", bad is None, data={"vertices": TA.tree.n_vertices, "edges": len(TA.tree.edges)})
    if bad is not None:
        seq.reason = f"edge/vertex sequence is not exact at position {bad.position} ({bad.reason}); the graph is not a tree"
        seq.witness = {"position": bad.position, "element": plain(bad.witness)}
        return [seq]

    def mv():
        rep = cohomtree.mayer_vietoris_check(m, TA, A, opts.degree_cap)
        bad = rep.les.first_failure()
        les = Check("mv.les_exact", rep.les.exact, "" if bad is None else f"not exact at position {bad.position}: {bad.reason}",
                    None if bad is None else {"position": bad.position, "term": rep.les.terms[bad.position][0], "element": plain(bad.witness)},
                    {"terms": [{"name": n, "group": H} for n, H in rep.les.terms]})
        wrong = [i for i, a in enumerate(rep.terms_agree) if not a]
        agree = Check("mv.terms_agree", not wrong, "an Ext term differs from the stabilizer cohomology",
                      None if not wrong else {"term": rep.terms[wrong[0]][0], "ext": rep.les.terms[wrong[0]][1], "bar": rep.terms[wrong[0]][1]},
                      {"terms": [{"name": n, "group": H} for n, H in rep.terms]})
        return [les, agree]

    return [seq] + _safe("mv.les_exact", mv)


COMMANDS: dict[str, Callable[[InstanceDocument, Options], list[Check]]] = {
    "validate": _validate,
    "dualize": _dualize,
    "sections": _sections,
    "directsum": _directsum,
    "roundtrip": _roundtrip,
    "duality-square": _duality_square,
    "cohomology": _cohomology,
    "shapiro": _shapiro,
    "mv-check": _mv_check,
}


def run_command(subcommand: str, document: InstanceDocument, options: Options | None = None) -> dict:
    """Run one subcommand and return the report as a plain dictionary."""
    options = options or Options()
    if subcommand not in COMMANDS:
        raise InputError("command", f"unknown subcommand {subcommand!r}")
    start = time.perf_counter()
    checks = sorted(COMMANDS[subcommand](document, options), key=lambda c: c.name)
    ok = all(c.ok for c in checks)
    report = {
        "command": subcommand,
        "instance": Path(document.path).name,
        "kind": document.kind,
        "seed": options.seed,
        "degree_cap": options.degree_cap,
        "status": "pass" if ok else "fail",
        "exit_code": EXIT_PASS if ok else EXIT_FAIL,
        "checks": [c.as_dict() for c in checks],
    }
    if options.timing:
        report["timing_seconds"] = round(time.perf_counter() - start, 3)
    return report


def error_report(subcommand: str, path: str, error: InputError, options: Options) -> dict:
    return {
        "command": subcommand,
        "instance": Path(path).name,
        "kind": None,
        "seed": options.seed,
        "degree_cap": options.degree_cap,
        "status": "input-error",
        "exit_code": EXIT_INPUT,
        "error": str(error),
        "checks": [],
    }


def render_structured(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def render_text(report: dict) -> str:
    lines = [f"{report['command']} {report['instance']} (kind {report['kind']}, seed {report['seed']}, degree cap {report['degree_cap']})"]
    if report["status"] == "input-error":
        lines.append(f"INPUT ERROR {report['error']}")
    for c in report["checks"]:
        tag = "PASS" if c["ok"] else "FAIL"
        line = f"{tag} {c['name']}"
        if not c["ok"]:
            line += f": {c['reason']}; witness {json.dumps(c['witness'], sort_keys=True)}"
        lines.append(line)
        if c["ok"] and "data" in c:
            lines.append("     " + json.dumps(c["data"], sort_keys=True))
    if "timing_seconds" in report:
        lines.append(f"time {report['timing_seconds']:.3f}s")
    lines.append(report["status"].upper())
    return "\n".join(lines) + "\n"


def default_degree_cap() -> int:
    raw = os.environ.get(DEGREE_CAP_ENV)
    if raw is None:
        return DEFAULT_DEGREE_CAP
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(DEGREE_CAP_ENV, f"not an integer: {raw!r}") from None
    if cap < 0:
        raise InputError(DEGREE_CAP_ENV, "must be non-negative")
    return cap


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stonedual", description="Finite-scale checks for sheaves and cosheaves of modules on Stone spaces.")
    p.add_argument("command", choices=SUBCOMMANDS)
    p.add_argument("instance", help="path to a JSON instance document")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--degree-cap", type=int, default=None, help=f"top cohomological degree (default 2, or ${DEGREE_CAP_ENV})")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--timing", action="store_true", help="add wall-clock time to the report")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    opts = Options(seed=args.seed, fmt=args.format, timing=args.timing)
    render = render_structured if args.format == "structured" else render_text
    try:
        opts.degree_cap = args.degree_cap if args.degree_cap is not None else default_degree_cap()
        if opts.degree_cap < 0:
            raise InputError("--degree-cap", "must be non-negative")
        doc = parse_instance(args.instance)
        report = run_command(args.command, doc, opts)
    except InputError as e:
        report = error_report(args.command, args.instance, e, opts)
    sys.stdout.write(render(report))
    return report["exit_code"]


if __name__ == "__main__":
    raise SystemExit(main())

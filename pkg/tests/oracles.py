"""Reference implementations the test suite trusts over the package.

Everything here is deliberately naive: plain dicts, token-name string
rules, linear scans, recursion.  The package is only touched to snapshot
data (profile vocabularies, scene objects), never for logic, so a bug in
the engine cannot hide in its own oracle.
"""

from __future__ import annotations

import re

_PARAM_RE = re.compile(r"^([a-z_]+)\[([^\[\]]+)\]$")


class NaiveError(Exception):
    pass


# ----------------------------------------------------------------------
# plain-data snapshots


def profile_doc(profile) -> dict:
    return {
        "attributes": {a: list(v) for a, v in profile.attributes.items()},
        "taxonomy": [tuple(edge) for edge in profile.taxonomy],
        "spatial": {r: tuple(v) for r, v in profile.spatial.items()},
        "count_max": profile.count_max,
    }


def scene_doc(scene) -> dict:
    doc = {
        "objects": [
            {"id": o.id, "position": tuple(o.position), "entries": dict(o.entries)}
            for o in scene.objects
        ]
    }
    if scene.directions is not None:
        doc["directions"] = {r: tuple(v) for r, v in scene.directions.items()}
    return doc


# ----------------------------------------------------------------------
# vocabulary rules


def naive_leaves(entry: str, taxonomy) -> set[str]:
    children = [c for p, c in taxonomy if p == entry]
    if not children:
        return {entry}
    out: set[str] = set()
    for child in children:
        out |= naive_leaves(child, taxonomy)
    return out


def extended_vocab(profile: dict, attr: str) -> list[str]:
    """Filterable entries for one attribute: vocabulary plus the taxonomy
    groupings whose leaves all live in that vocabulary."""
    vocab = list(profile["attributes"][attr])
    parents: list[str] = []
    for parent, _child in profile["taxonomy"]:
        if parent not in parents:
            parents.append(parent)
    for node in parents:
        if naive_leaves(node, profile["taxonomy"]) <= set(profile["attributes"][attr]):
            vocab.append(node)
    return vocab


def catalog_names(profile: dict) -> list[str]:
    """Every token name one profile should instantiate."""
    attrs = profile["attributes"]
    names = ["scene", "unique", "union", "intersect", "count", "exist"]
    names += [f"equal_{a}" for a in attrs]
    names += ["equal_integer", "greater_than", "less_than"]
    names += [f"query_{a}" for a in attrs]
    names += [f"relate_{r}" for r in profile["spatial"]]
    names += [f"same_{a}" for a in attrs]
    for a in attrs:
        names += [f"filter_{a}[{entry}]" for entry in extended_vocab(profile, a)]
    return names


def naive_signature(name: str, profile: dict):
    """(input type strings, output type string); entries carry their attribute."""
    match = _PARAM_RE.match(name)
    if match is not None:
        base = match.group(1)
        if base.startswith("filter_") and base[len("filter_"):] in profile["attributes"]:
            return ("scene",), "scene"
        raise NaiveError(f"unknown token {name}")
    if name == "scene":
        return (), "scene"
    if name == "unique":
        return ("scene",), "object"
    if name in ("union", "intersect"):
        return ("scene", "scene"), "scene"
    if name == "count":
        return ("scene",), "number"
    if name == "exist":
        return ("scene",), "boolean"
    if name in ("equal_integer", "greater_than", "less_than"):
        return ("number", "number"), "boolean"
    if name.startswith("equal_") and name[len("equal_"):] in profile["attributes"]:
        attr = name[len("equal_"):]
        return (f"entry:{attr}", f"entry:{attr}"), "boolean"
    if name.startswith("query_") and name[len("query_"):] in profile["attributes"]:
        return ("object",), f"entry:{name[len('query_'):]}"
    if name.startswith("relate_") and name[len("relate_"):] in profile["spatial"]:
        return ("object",), "scene"
    if name.startswith("same_") and name[len("same_"):] in profile["attributes"]:
        return ("object",), "scene"
    raise NaiveError(f"unknown token {name}")


# frozen literal table for the default profile; never computed
EXPECTED_CLEVR_CATALOG = {
    "scene": ((), "scene"),
    "unique": (("scene",), "object"),
    "union": (("scene", "scene"), "scene"),
    "intersect": (("scene", "scene"), "scene"),
    "count": (("scene",), "number"),
    "exist": (("scene",), "boolean"),
    "equal_color": (("entry:color", "entry:color"), "boolean"),
    "equal_shape": (("entry:shape", "entry:shape"), "boolean"),
    "equal_material": (("entry:material", "entry:material"), "boolean"),
    "equal_size": (("entry:size", "entry:size"), "boolean"),
    "equal_integer": (("number", "number"), "boolean"),
    "greater_than": (("number", "number"), "boolean"),
    "less_than": (("number", "number"), "boolean"),
    "query_color": (("object",), "entry:color"),
    "query_shape": (("object",), "entry:shape"),
    "query_material": (("object",), "entry:material"),
    "query_size": (("object",), "entry:size"),
    "relate_left": (("object",), "scene"),
    "relate_right": (("object",), "scene"),
    "relate_front": (("object",), "scene"),
    "relate_behind": (("object",), "scene"),
    "same_color": (("object",), "scene"),
    "same_shape": (("object",), "scene"),
    "same_material": (("object",), "scene"),
    "same_size": (("object",), "scene"),
    "filter_color[gray]": (("scene",), "scene"),
    "filter_color[red]": (("scene",), "scene"),
    "filter_color[blue]": (("scene",), "scene"),
    "filter_color[green]": (("scene",), "scene"),
    "filter_color[brown]": (("scene",), "scene"),
    "filter_color[purple]": (("scene",), "scene"),
    "filter_color[cyan]": (("scene",), "scene"),
    "filter_color[yellow]": (("scene",), "scene"),
    "filter_shape[cube]": (("scene",), "scene"),
    "filter_shape[sphere]": (("scene",), "scene"),
    "filter_shape[cylinder]": (("scene",), "scene"),
    "filter_material[rubber]": (("scene",), "scene"),
    "filter_material[metal]": (("scene",), "scene"),
    "filter_size[small]": (("scene",), "scene"),
    "filter_size[large]": (("scene",), "scene"),
}


# ----------------------------------------------------------------------
# naive evaluation

# values: ("scene", sorted id list) / ("object", id) / ("entry", attr, value)
#         ("number", n) / ("boolean", b)


def naive_execute(tokens, scene: dict, profile: dict):
    """Evaluate a postfix stream; any fault raises NaiveError."""
    objects = {o["id"]: o for o in scene["objects"]}
    order = [o["id"] for o in scene["objects"]]
    directions = dict(profile["spatial"])
    directions.update(scene.get("directions", {}))
    taxonomy = profile["taxonomy"]
    stack = []

    def popk(kind):
        if not stack:
            raise NaiveError("underflow")
        value = stack.pop()
        if value[0] != kind:
            raise NaiveError(f"wanted {kind}, got {value[0]}")
        return value

    for name in tokens:
        match = _PARAM_RE.match(name)
        if match is not None and match.group(1).startswith("filter_"):
            attr = match.group(1)[len("filter_"):]
            entry = match.group(2)
            leaves = naive_leaves(entry, taxonomy)
            ids = popk("scene")[1]
            stack.append(("scene", [i for i in ids if objects[i]["entries"][attr] in leaves]))
        elif name == "scene":
            stack.append(("scene", sorted(order)))
        elif name == "unique":
            ids = popk("scene")[1]
            if len(ids) != 1:
                raise NaiveError("unique needs exactly one")
            stack.append(("object", ids[0]))
        elif name in ("union", "intersect"):
            b = popk("scene")[1]
            a = popk("scene")[1]
            merged = set(a) | set(b) if name == "union" else set(a) & set(b)
            stack.append(("scene", sorted(merged)))
        elif name == "count":
            stack.append(("number", len(popk("scene")[1])))
        elif name == "exist":
            stack.append(("boolean", len(popk("scene")[1]) > 0))
        elif name in ("equal_integer", "greater_than", "less_than"):
            b = popk("number")[1]
            a = popk("number")[1]
            result = a == b if name == "equal_integer" else (a > b if name == "greater_than" else a < b)
            stack.append(("boolean", result))
        elif name.startswith("equal_") and name[len("equal_"):] in profile["attributes"]:
            attr = name[len("equal_"):]
            b = popk("entry")
            a = popk("entry")
            if a[1] != attr or b[1] != attr:
                raise NaiveError("entry attribute mismatch")
            stack.append(("boolean", a[2] == b[2]))
        elif name.startswith("query_") and name[len("query_"):] in profile["attributes"]:
            attr = name[len("query_"):]
            oid = popk("object")[1]
            stack.append(("entry", attr, objects[oid]["entries"][attr]))
        elif name.startswith("relate_") and name[len("relate_"):] in profile["spatial"]:
            rel = name[len("relate_"):]
            anchor = popk("object")[1]
            vec = directions[rel]
            origin = objects[anchor]["position"]
            kept = []
            for oid in sorted(objects):
                if oid == anchor:
                    continue
                delta = [a - b for a, b in zip(objects[oid]["position"], origin)]
                if sum(d * v for d, v in zip(delta, vec)) > 0:
                    kept.append(oid)
            stack.append(("scene", kept))
        elif name.startswith("same_") and name[len("same_"):] in profile["attributes"]:
            attr = name[len("same_"):]
            anchor = popk("object")[1]
            want = objects[anchor]["entries"][attr]
            kept = [oid for oid in sorted(objects) if oid != anchor and objects[oid]["entries"][attr] == want]
            stack.append(("scene", kept))
        else:
            raise NaiveError(f"unknown token {name}")
    if len(stack) != 1:
        raise NaiveError(f"{len(stack)} values left on stack")
    return stack[0]


def naive_type_check(tokens, profile: dict, coarse: bool = False):
    """(ok, result type string) for a structurally valid postfix stream."""
    stack: list[str] = []
    ok = True
    for name in tokens:
        ins, out = naive_signature(name, profile)
        if len(stack) < len(ins):
            raise NaiveError("not a tree")
        got = stack[len(stack) - len(ins):]
        del stack[len(stack) - len(ins):]
        for want, found in zip(ins, got):
            if coarse:
                if want.split(":")[0] != found.split(":")[0]:
                    ok = False
            elif want != found:
                ok = False
        stack.append(out)
    if len(stack) != 1:
        raise NaiveError("not a tree")
    return ok, stack[0]


# ----------------------------------------------------------------------
# program enumeration (postfix token tuples)


def typed_pools(profile: dict, max_depth: int):
    """pools[d][type] = all well-typed trees of exact depth d, materialized."""
    pools: dict[int, dict[str, list[tuple]]] = {d: {} for d in range(1, max_depth + 1)}
    for depth in range(1, max_depth + 1):
        for tree in iter_typed_exact(profile, pools, depth):
            _ok, out = naive_type_check(tree, profile)
            pools[depth].setdefault(out, []).append(tree)
    return pools


def iter_typed_exact(profile: dict, pools, depth: int):
    """Yield well-typed trees of exact depth ``depth``; ``pools`` must hold
    every exact depth below it."""
    names = catalog_names(profile)
    if depth == 1:
        for name in names:
            if not naive_signature(name, profile)[0]:
                yield (name,)
        return
    for name in names:
        ins, _out = naive_signature(name, profile)
        if len(ins) == 1:
            for sub in pools[depth - 1].get(ins[0], []):
                yield sub + (name,)
        elif len(ins) == 2:
            for da in range(1, depth):
                for db in range(1, depth):
                    if max(da, db) != depth - 1:
                        continue
                    for a in pools[da].get(ins[0], []):
                        for b in pools[db].get(ins[1], []):
                            yield a + b + (name,)


def count_typed(pools) -> int:
    return sum(len(trees) for by_type in pools.values() for trees in by_type.values())


def arity_table(profile: dict) -> dict[str, int]:
    return {name: len(naive_signature(name, profile)[0]) for name in catalog_names(profile)}


def iter_arbitrary_exact(profile: dict, depth: int):
    """All arity-respecting trees of exact depth, well-typed or not."""
    arities = arity_table(profile)
    if depth == 1:
        for name, arity in arities.items():
            if arity == 0:
                yield (name,)
        return
    exact_below = list(iter_arbitrary_exact(profile, depth - 1))
    shallower = []
    for d in range(1, depth - 1):
        shallower.extend(iter_arbitrary_exact(profile, d))
    for name, arity in arities.items():
        if arity == 1:
            for sub in exact_below:
                yield sub + (name,)
        elif arity == 2:
            for a in exact_below:
                for b in exact_below:
                    yield a + b + (name,)
            for a in exact_below:
                for b in shallower:
                    yield a + b + (name,)
                    yield b + a + (name,)


def random_arbitrary_tree(profile: dict, max_depth: int, rng) -> tuple:
    """One arity-respecting tree, uniform token choice at every node."""
    arities = arity_table(profile)
    leaves = [n for n, a in arities.items() if a == 0]
    everything = list(arities)

    def grow(budget: int) -> tuple:
        name = rng.choice(leaves) if budget <= 1 else rng.choice(everything)
        parts = [grow(budget - 1) for _ in range(arities[name])]
        return tuple(t for part in parts for t in part) + (name,)

    return grow(max_depth)


# matching the engine's value objects without importing its constructors


def engine_value_to_plain(value):
    """Engine runtime value -> oracle tuple form, by duck typing."""
    if hasattr(value, "ids"):
        return ("scene", sorted(value.ids))
    if hasattr(value, "attribute"):
        return ("entry", value.attribute, value.value)
    if hasattr(value, "id"):
        return ("object", value.id)
    if isinstance(value.value, bool):
        return ("boolean", value.value)
    return ("number", value.value)

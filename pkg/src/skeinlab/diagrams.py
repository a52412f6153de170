"""Objects, string diagrams, matchings, and canonical reduced diagrams.

Objects are words over U (up) and D (down), stored as plain strings.  A
diagram is a domain word plus a sequence of one-generator slices, each slice
acting at a 1-based strand position:

    X+ / X-    crossing of strands (i, i+1), positive / negative
    cupL       insert U D at position i          (unit -> up down)
    cupR       insert D U at position i          (unit -> down up)
    capL       delete D U at positions (i, i+1)
    capR       delete U D at positions (i, i+1)
    togUD      toggle D -> U at position i
    togDU      toggle U -> D at position i

Morphisms are finite linear combinations of diagrams with Scalar
coefficients.  Matchings pair up the boundary points -1..-len(domain) (bottom,
left to right) and 1..len(codomain) (top, left to right); each matching has a
unique canonical reduced diagram, built in three stages (caps, permutation,
cups) with all crossings positive and toggles in fixed positions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from .errors import (
    CompositionMismatch, InvalidMatching, InvalidSlice, NotAnOSMorphism,
)
from .scalars import Scalar, ONE, parse_scalar, format_scalar

UP = "U"
DOWN = "D"

SLICE_KINDS = ("X+", "X-", "cupL", "cupR", "capL", "capR", "togUD", "togDU")

_CUP_LETTERS = {"cupL": "UD", "cupR": "DU"}
_CAP_LETTERS = {"capL": "DU", "capR": "UD"}
_TOG_IN = {"togUD": "D", "togDU": "U"}
_TOG_OUT = {"togUD": "U", "togDU": "D"}


def flip_letter(x):
    return UP if x == DOWN else DOWN


def apply_slice(word, kind, pos):
    """Apply one generator slice to a word; raises InvalidSlice on mismatch."""
    i = pos - 1
    if kind in ("X+", "X-"):
        if not (0 <= i and i + 1 < len(word)):
            raise InvalidSlice(f"crossing at {pos} needs two strands in {word!r}")
        return word[:i] + word[i + 1] + word[i] + word[i + 2:]
    if kind in _CUP_LETTERS:
        if not (0 <= i <= len(word)):
            raise InvalidSlice(f"cup at {pos} out of range in {word!r}")
        return word[:i] + _CUP_LETTERS[kind] + word[i:]
    if kind in _CAP_LETTERS:
        if not (0 <= i and i + 1 < len(word)) or word[i:i + 2] != _CAP_LETTERS[kind]:
            raise InvalidSlice(f"{kind} at {pos} needs {_CAP_LETTERS[kind]!r} in {word!r}")
        return word[:i] + word[i + 2:]
    if kind in _TOG_IN:
        if not (0 <= i < len(word)) or word[i] != _TOG_IN[kind]:
            raise InvalidSlice(f"{kind} at {pos} needs {_TOG_IN[kind]!r} in {word!r}")
        return word[:i] + _TOG_OUT[kind] + word[i + 1:]
    raise InvalidSlice(f"unknown slice kind {kind!r}")


@lru_cache(maxsize=200000)
def _codomain(domain, slices):
    w = domain
    for kind, pos in slices:
        w = apply_slice(w, kind, pos)
    return w


@dataclass(frozen=True)
class DiagramTerm:
    """A single string diagram: domain word plus generator slices."""

    domain: str
    slices: tuple

    def __post_init__(self):
        object.__setattr__(self, "slices", tuple((k, p) for k, p in self.slices))
        _codomain(self.domain, self.slices)  # validates

    @property
    def codomain(self):
        return _codomain(self.domain, self.slices)

    def then(self, kind, pos):
        return DiagramTerm(self.domain, self.slices + ((kind, pos),))

    def crossing_count(self):
        return sum(1 for k, _ in self.slices if k in ("X+", "X-"))

    def __str__(self):
        body = " ".join(f"{k}@{p}" for k, p in self.slices) or "id"
        return f"[{self.domain} | {body}]"


def identity_term(word):
    return DiagramTerm(word, ())


class Morphism:
    """A Scalar-linear combination of diagrams sharing a boundary."""

    __slots__ = ("domain", "codomain", "terms")

    def __init__(self, domain, codomain, terms=None):
        self.domain = domain
        self.codomain = codomain
        self.terms = {}
        if terms:
            for d, c in terms.items() if isinstance(terms, dict) else terms:
                if d.domain != domain or d.codomain != codomain:
                    raise CompositionMismatch(
                        f"term boundary {d.domain}->{d.codomain} differs from {domain}->{codomain}")
                if c:
                    s = self.terms.get(d)
                    s = s + c if s is not None else c
                    if s:
                        self.terms[d] = s
                    else:
                        self.terms.pop(d, None)

    @staticmethod
    def from_term(term, coeff=ONE):
        return Morphism(term.domain, term.codomain, {term: coeff})

    @staticmethod
    def identity(word):
        return Morphism.from_term(identity_term(word))

    @staticmethod
    def zero(domain, codomain):
        return Morphism(domain, codomain)

    def __add__(self, other):
        if (self.domain, self.codomain) != (other.domain, other.codomain):
            raise CompositionMismatch("sum of morphisms with different boundaries")
        out = dict(self.terms)
        for d, c in other.terms.items():
            s = out.get(d)
            s = s + c if s is not None else c
            if s:
                out[d] = s
            else:
                out.pop(d, None)
        m = Morphism.zero(self.domain, self.codomain)
        m.terms = out
        return m

    def __sub__(self, other):
        return self + other.scale(Scalar.from_int(-1))

    def scale(self, c):
        m = Morphism.zero(self.domain, self.codomain)
        if c:
            m.terms = {d: x * c for d, x in self.terms.items()}
        return m

    def is_zero(self):
        return not self.terms

    def compose(self, other):
        """self after other (categorical composition self . other)."""
        if other.codomain != self.domain:
            raise CompositionMismatch(
                f"cannot compose: {other.domain}->{other.codomain} then {self.domain}->{self.codomain}")
        m = Morphism.zero(other.domain, self.codomain)
        out = {}
        for d1, c1 in other.terms.items():
            for d2, c2 in self.terms.items():
                d = DiagramTerm(d1.domain, d1.slices + d2.slices)
                c = c1 * c2
                s = out.get(d)
                s = s + c if s is not None else c
                if s:
                    out[d] = s
                else:
                    out.pop(d, None)
        m.terms = out
        return m

    def then(self, kind, pos):
        """Append one generator slice on top of every term."""
        out = {}
        for d, c in self.terms.items():
            out[d.then(kind, pos)] = c
        m = Morphism.zero(self.domain, apply_slice(self.codomain, kind, pos))
        m.terms = out
        return m

    def is_os(self):
        return all(k not in ("togUD", "togDU") for d in self.terms for k, _ in d.slices)

    def __str__(self):
        if not self.terms:
            return f"0 : {self.domain} -> {self.codomain}"
        return " + ".join(f"({c}) {d}" for d, c in self.terms.items())


def compose(f, g):
    """compose(f, g) = f after g."""
    return f.compose(g)


def tensor_right(f, g):
    """Horizontal juxtaposition f (x) g; g must be toggle-free (an OS morphism)."""
    if not g.is_os():
        raise NotAnOSMorphism("right tensor factor contains toggles")
    shift = len(f.codomain)
    out = {}
    dom = f.domain + g.domain
    cod = f.codomain + g.codomain
    for d1, c1 in f.terms.items():
        for d2, c2 in g.terms.items():
            slices = d1.slices + tuple((k, p + shift) for k, p in d2.slices)
            d = DiagramTerm(dom, slices)
            c = c1 * c2
            s = out.get(d)
            s = s + c if s is not None else c
            if s:
                out[d] = s
            else:
                out.pop(d, None)
    m = Morphism.zero(dom, cod)
    m.terms = out
    return m


# ---------------------------------------------------------------------------
# Matchings


def canon_matching(pairs):
    """Canonical tuple form of a matching: each pair ascending, pairs sorted."""
    ps = [tuple(sorted(p)) for p in pairs]
    ps.sort(key=lambda p: (abs(p[0]), p[0] > 0, abs(p[1])))
    return tuple(ps)


def matching_points(lam, mu):
    return [-i for i in range(1, len(lam) + 1)] + list(range(1, len(mu) + 1))


def is_valid_matching(m, lam, mu):
    pts = sorted(matching_points(lam, mu))
    seen = sorted(x for p in m for x in p)
    return seen == pts and all(len(set(p)) == 2 for p in m)


def enumerate_matchings(lam, mu):
    """All perfect matchings of the boundary points; empty list when odd."""
    pts = matching_points(lam, mu)
    if len(pts) % 2:
        return []
    out = []

    def rec(rest, acc):
        if not rest:
            out.append(canon_matching(acc))
            return
        a = rest[0]
        for k in range(1, len(rest)):
            b = rest[k]
            rec(rest[1:k] + rest[k + 1:], acc + [(a, b)])

    rec(pts, [])
    return sorted(out)


def double_factorial(n):
    out = 1
    while n > 1:
        out *= n
        n -= 2
    return out


def hom_dimension(lam, mu):
    n = len(lam) + len(mu)
    return double_factorial(n - 1) if n % 2 == 0 else 0


def interleaves(p1, p2, lam_len, mu_len):
    """Whether two pairs cross in the cyclic boundary order."""

    def coord(x):
        # bottom -1..-l left-to-right, then top right-to-left
        return -x - 1 if x < 0 else lam_len + (mu_len - x)

    a, b = sorted(coord(x) for x in p1)
    c, d = sorted(coord(x) for x in p2)
    return (a < c < b < d) or (c < a < d < b)


def required_toggles(m, lam, mu):
    """Which pairs of a matching carry a toggle in the reduced diagram."""

    def letter(x):
        return lam[-x - 1] if x < 0 else mu[x - 1]

    out = {}
    for p in canon_matching(m):
        a, b = p
        if a < 0 < b:  # through strand: toggle iff letters differ
            out[p] = 1 if letter(a) != letter(b) else 0
        else:  # cup or cap: toggle iff letters agree
            out[p] = 1 if letter(a) == letter(b) else 0
    return out


# ---------------------------------------------------------------------------
# Canonical reduced diagrams


def canonical_diagram(m, lam, mu):
    """The fixed reduced diagram for a matching: caps gathered at the bottom,
    through strands permuted by positive crossings, cups spread at the top.
    All crossings are positive; toggles sit at the bottom of through strands
    and next to the left endpoint of cup/cap strands."""
    m = canon_matching(m)
    if not is_valid_matching(m, lam, mu):
        raise InvalidMatching(f"not a ({lam},{mu})-matching: {m}")

    slices = []
    caps = []      # (a, b) bottom positions 1-based, a < b
    cups = []      # (a, b) top positions 1-based, a < b
    throughs = []  # (bottom, top) 1-based
    for p in m:
        x, y = p
        if x < 0 and y < 0:
            caps.append(tuple(sorted((-x, -y))))
        elif x > 0 and y > 0:
            cups.append(tuple(sorted((x, y))))
        else:
            throughs.append((-x, y))

    # stage 0: toggles at the very bottom (through strands and cap pairs)
    word = list(lam)
    for bot, top in sorted(throughs):
        if lam[bot - 1] != mu[top - 1]:
            kind = "togUD" if word[bot - 1] == DOWN else "togDU"
            slices.append((kind, bot))
            word[bot - 1] = flip_letter(word[bot - 1])
    for a, b in sorted(caps):
        if lam[a - 1] == lam[b - 1]:
            kind = "togUD" if word[a - 1] == DOWN else "togDU"
            slices.append((kind, a))
            word[a - 1] = flip_letter(word[a - 1])

    # stage a: caps by ascending right endpoint (inner pairs first, so no two
    # strands cross twice); the right partner walks left to adjacency
    positions = list(range(1, len(lam) + 1))  # original bottom index per slot
    for a, b in sorted(caps, key=lambda p: p[1]):
        pa = positions.index(a)
        pb = positions.index(b)
        for j in range(pb - 1, pa, -1):
            slices.append(("X+", j + 1))
            positions[j], positions[j + 1] = positions[j + 1], positions[j]
            word[j], word[j + 1] = word[j + 1], word[j]
        kind = "capL" if word[pa] == DOWN else "capR"
        if "".join(word[pa:pa + 2]) != _CAP_LETTERS[kind]:
            raise InvalidMatching(f"orientation clash capping {a},{b} in {lam}->{mu}")
        slices.append((kind, pa + 1))
        del positions[pa:pa + 2]
        del word[pa:pa + 2]

    # stage b: selection sort of through strands into top order
    top_of = {bot: top for bot, top in throughs}
    targets = [top_of[b] for b in positions]
    for i in range(len(targets)):
        j = min(range(i, len(targets)), key=lambda k: targets[k])
        while j > i:
            slices.append(("X+", j))
            targets[j - 1], targets[j] = targets[j], targets[j - 1]
            word[j - 1], word[j] = word[j], word[j - 1]
            j -= 1

    # stage c: cups by ascending left endpoint; right leg walks right
    placed = sorted(t for _, t in throughs)  # final top positions present
    for a, b in sorted(cups):
        ins = sum(1 for t in placed if t < a)
        span = sum(1 for t in placed if a < t < b)
        right_letter = mu[b - 1]
        left_letter = mu[a - 1] if mu[a - 1] != mu[b - 1] else flip_letter(mu[a - 1])
        kind = "cupL" if (left_letter, right_letter) == (UP, DOWN) else "cupR"
        slices.append((kind, ins + 1))
        for s in range(span):
            slices.append(("X+", ins + 2 + s))
        placed.extend((a, b))
        placed.sort()

    # stage d: toggles next to the left endpoint of each cup
    for a, b in sorted(cups):
        if mu[a - 1] == mu[b - 1]:
            kind = "togUD" if mu[a - 1] == UP else "togDU"
            slices.append((kind, a))

    term = DiagramTerm(lam, tuple(slices))
    if term.codomain != mu:
        raise InvalidMatching(f"internal: canonical diagram codomain {term.codomain} != {mu}")
    return term


# ---------------------------------------------------------------------------
# Strand tracing


class Trace:
    """Traced diagram: strands as event paths, plus a crossing table.

    The diagram is first turned into a port graph (each toggle, extremum, and
    crossing pass is a small node with two ports), then strands are read off
    by walking the graph from every boundary point; leftover nodes belong to
    closed components.

    Path events, in travel order:
        ("bot", k)        bottom endpoint -k
        ("top", k)        top endpoint k
        ("tog", kind)     a toggle
        ("min"|"max", d)  extremum; d is "LR" when travel crosses left-to-right
        ("cross", cid)    one pass through crossing cid
    Crossing table: cid -> {"letters": (x, y), "sign": +-1, "writhe": +-1,
    "slice_index": i, "strands": set by annotate()}.
    """

    def __init__(self, term):
        self.term = term
        self.crossings = {}
        self.open = []    # list of event paths (bottom-first when through/cap)
        self.closed = []  # list of cyclic event paths
        self._build(term)

    def _build(self, term):
        nodes = {}   # nid -> ("tog", kind) | ("min"|"max",) | ("pass", cid)
        link = {}    # port -> port, symmetric; port = (nid, 0|1) or ("bot"/"top", k)
        nid = [0]

        def new_node(data):
            nodes[nid[0]] = data
            nid[0] += 1
            return nid[0] - 1

        def connect(p1, p2):
            link[p1] = p2
            link[p2] = p1

        word = term.domain
        # live[i] = open port at position i
        live = [("bot", k + 1) for k in range(len(word))]
        cid = 0
        for idx, (kind, pos) in enumerate(term.slices):
            i = pos - 1
            if kind in ("X+", "X-"):
                x, y = word[i], word[i + 1]
                sign = 1 if kind == "X+" else -1
                self.crossings[cid] = {
                    "letters": (x, y),
                    "sign": sign,
                    "writhe": sign if x == y else -sign,
                    "slice_index": idx,
                }
                pa = new_node(("pass", cid, "lo"))  # bottom-left -> top-right
                pb = new_node(("pass", cid, "hi"))  # bottom-right -> top-left
                connect(live[i], (pa, 0))
                connect(live[i + 1], (pb, 0))
                live[i], live[i + 1] = (pb, 1), (pa, 1)
                cid += 1
            elif kind in _CUP_LETTERS:
                n = new_node(("min",))
                live[i:i] = [(n, 0), (n, 1)]  # port 0 = left leg, 1 = right leg
            elif kind in _CAP_LETTERS:
                n = new_node(("max",))
                connect(live[i], (n, 0))
                connect(live[i + 1], (n, 1))
                del live[i:i + 2]
            elif kind in _TOG_IN:
                n = new_node(("tog", kind))
                connect(live[i], (n, 0))
                live[i] = (n, 1)
            word = apply_slice(word, kind, pos)

        for j, port in enumerate(live):
            connect(port, ("top", j + 1))

        visited = set()

        def walk(start_port):
            """Walk from a boundary port; emit events; return the path."""
            path = [(start_port[0], start_port[1])]
            port = link[start_port]
            while True:
                if port[0] in ("bot", "top"):
                    path.append((port[0], port[1]))
                    return path
                n, p = port
                if n in visited and nodes[n][0] != "pass":
                    return path  # cycle closed
                data = nodes[n]
                if data[0] == "tog":
                    visited.add(n)
                    path.append(("tog", data[1]))
                elif data[0] == "min":
                    visited.add(n)
                    path.append(("min", "LR" if p == 0 else "RL"))
                elif data[0] == "max":
                    visited.add(n)
                    path.append(("max", "LR" if p == 0 else "RL"))
                else:  # pass
                    visited.add(n)
                    path.append(("cross", data[1]))
                port = link[(n, 1 - p)]

        # open strands, walked from the bottom then remaining tops
        starts = [("bot", k + 1) for k in range(len(term.domain))]
        starts += [("top", k + 1) for k in range(len(term.codomain))]
        seen_bounds = set()
        for s in starts:
            if s in seen_bounds:
                continue
            path = walk(s)
            first, last = path[0], path[-1]
            for e in (first, last):
                if e[0] in ("bot", "top"):
                    seen_bounds.add((e[0], e[1]))
            if first[0] == "top" and last[0] in ("bot", "top"):
                # normalize: bottom-first if it has a bottom end; else leave
                if last[0] == "bot":
                    path = [_flip_ev(e) for e in reversed(path)]
            self.open.append(path)

        # closed components: walk unvisited non-pass nodes (a closed component
        # always has an extremum, since cups/caps are the only turnbacks)
        for n, data in nodes.items():
            if n in visited or data[0] == "pass":
                continue
            # trace the cycle starting here, as if entering this node at port 0
            cyc = []
            port = (n, 0)
            while True:
                nn, pp = port
                if nn in visited:
                    break
                visited.add(nn)
                d = nodes[nn]
                if d[0] == "tog":
                    cyc.append(("tog", d[1]))
                elif d[0] in ("min", "max"):
                    cyc.append((d[0], "LR" if pp == 0 else "RL"))
                else:
                    cyc.append(("cross", d[1]))
                port = link[(nn, 1 - pp)]
            self.closed.append(cyc)

    def endpoints(self):
        out = []
        for path in self.open:
            pts = []
            for e in (path[0], path[-1]):
                if e[0] == "bot":
                    pts.append(-e[1])
                elif e[0] == "top":
                    pts.append(e[1])
            out.append(tuple(sorted(pts)))
        return out

    def annotate(self):
        """Attach strand indices to crossing records; returns pair->crossings map."""
        for c in self.crossings.values():
            c["strands"] = []
        for si, path in enumerate(self.open):
            for e in path:
                if e[0] == "cross":
                    self.crossings[e[1]]["strands"].append(("open", si))
        for si, cyc in enumerate(self.closed):
            for e in cyc:
                if e[0] == "cross":
                    self.crossings[e[1]]["strands"].append(("closed", si))
        return self.crossings


def _flip_ev(ev):
    """Reverse travel direction through one event."""
    if ev[0] in ("min", "max"):
        return (ev[0], "RL" if ev[1] == "LR" else "LR")
    return ev


def boundary_matching(term):
    """The pairing of boundary points induced by a diagram's strands
    (closed components are ignored)."""
    tr = Trace(term)
    return canon_matching(tr.endpoints())


class NormalForm:
    """Expansion of a morphism in the canonical matching basis."""

    __slots__ = ("domain", "codomain", "coeffs")

    def __init__(self, domain, codomain, coeffs=None):
        self.domain = domain
        self.codomain = codomain
        self.coeffs = {m: c for m, c in (coeffs or {}).items() if c}

    def __eq__(self, other):
        return (isinstance(other, NormalForm)
                and self.domain == other.domain
                and self.codomain == other.codomain
                and self.coeffs == other.coeffs)

    def __repr__(self):
        if not self.coeffs:
            return "NormalForm(0)"
        return "NormalForm(" + ", ".join(f"{m}: {c}" for m, c in sorted(self.coeffs.items())) + ")"

    def to_json(self):
        return {
            "domain": self.domain,
            "codomain": self.codomain,
            "coeffs": [
                {"matching": [list(p) for p in m], "coeff": format_scalar(c, compact=True)}
                for m, c in sorted(self.coeffs.items())
            ],
        }

    @staticmethod
    def from_json(obj):
        coeffs = {}
        for ent in obj["coeffs"]:
            m = canon_matching(tuple(tuple(p) for p in ent["matching"]))
            coeffs[m] = parse_scalar(ent["coeff"])
        return NormalForm(obj["domain"], obj["codomain"], coeffs)


# ---------------------------------------------------------------------------
# JSON interchange for morphisms


def morphism_to_json(f):
    return {
        "domain": f.domain,
        "codomain": f.codomain,
        "terms": [
            {"coeff": format_scalar(c, compact=True),
             "slices": [f"{k}@{p}" for k, p in d.slices]}
            for d, c in sorted(f.terms.items(), key=lambda kv: str(kv[0]))
        ],
    }


def morphism_from_json(obj):
    dom = obj["domain"]
    terms = {}
    cod = obj.get("codomain")
    for ent in obj["terms"]:
        slices = []
        for s in ent["slices"]:
            kind, _, pos = s.partition("@")
            slices.append((kind, int(pos)))
        d = DiagramTerm(dom, tuple(slices))
        terms[d] = terms.get(d, Scalar.from_int(0)) + parse_scalar(ent["coeff"])
    if not terms:
        if cod is None:
            raise CompositionMismatch("empty morphism needs explicit codomain")
        return Morphism.zero(dom, cod)
    some = next(iter(terms))
    return Morphism(dom, some.codomain, terms)

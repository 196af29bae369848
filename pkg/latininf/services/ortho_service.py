"""Orthomorphisms, complete mappings, strong complete mappings and their builders.

For a mapping θ: G ⇀ G write

    η(g) = g⁻¹θ(g)      (θ is an orthomorphism when η is a bijection)
    ζ(g) = gθ(g)        (θ is a complete mapping when ζ is a bijection)

and θ is a strong complete mapping (SCM) when it is both. A ``PartialMapping``
tracks the ranges of θ and of the companions it was asked to keep injective;
an ``OrthomorphismFamily`` does the same for k mappings plus every
η_ij(g) = θ_i(g)⁻¹θ_j(g) on shared domain points.

Finite SCMs come with an ``SCMCertificate`` (the total mapping plus the
exhaustive check that produced it). Composite constructions (direct
product / sum, quotient, the E2 field block) all end in ``certify``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from itertools import combinations, product
from math import gcd
from multiprocessing import Pool

from latininf.errors import (
    BadOrder, BadTransversal, BlockTooLarge, CapExceeded, EmptyParts,
    ExtensionFailed, LatinInfError, MappingClash, NonPositiveDistance,
    NotSquareful, OutOfRange, UnassignedIndex, UnsupportedGroup, VerifyFailed,
)
from latininf.groups import (
    CyclicGroup, DirectSum, ElementaryTwoGroup, GroupKernel, nim_mul, parse_group,
)
from latininf.index import as_point
from latininf.models import Requirement, VerificationReport
from latininf.services.scheduler_service import diagonal_pairs, enumeration, interleave
from latininf.services.square_service import LatinRegion
from latininf.utils.constants import (
    BRUTE_FORCE_CAP, FAMILY_MAX_GROWTH, FIELD_EXHAUSTIVE_MAX_M, FIELD_SAFETY_MAX_M,
    MAPPING_MAX_GROWTH, SEARCH_BUDGET, SQUAREFUL,
)
from latininf.utils.formatting import format_rational, normalize_rational

logger = logging.getLogger(__name__)

ETA = "eta"      # g ↦ g⁻¹θ(g)
ZETA = "zeta"    # g ↦ gθ(g)

ORTHOMORPHISM = (ETA,)
COMPLETE = (ZETA,)
STRONG = (ETA, ZETA)

# build_scm_greedy requirement families
SCM_DOMAIN = "D^dom_g"
SCM_RANGE = "D^ran_h"
SCM_ETA = "D^eta_h"
SCM_ZETA = "D^zeta_h"

# build_moo_family requirement families
MOO_DOMAIN = "D_i^g"
MOO_RANGE = "D_i^h"
MOO_ETA = "E_i^h"
MOO_PAIR = "E_ij^h"


def companion(group: GroupKernel, kind: str, g, v):
    if kind == ETA:
        return group._op(group._inv(g), v)
    return group._op(g, v)


def _candidates(group: GroupKernel, budget: int):
    for k in range(budget):
        try:
            yield group.enumerate(k)
        except OutOfRange:
            return


# ─── single mappings ─────────────────────────────────────────────────

class PartialMapping:
    """A partial injection θ with the ranges of the tracked companions.

    ``tracks`` names the companions kept injective: (eta,) for an
    orthomorphism, (zeta,) for a complete mapping, both for an SCM.
    """

    def __init__(self, group: GroupKernel, tracks: tuple = STRONG,
                 search_budget: int = SEARCH_BUDGET):
        unknown = set(tracks) - {ETA, ZETA}
        if unknown:
            raise ValueError(f"Unknown companion(s): {', '.join(sorted(unknown))}")
        self.group = group
        self.tracks = tuple(k for k in (ETA, ZETA) if k in tracks)
        self.search_budget = search_budget
        self.theta: dict = {}
        self.ran_theta: dict = {}
        self.ran: dict = {k: {} for k in self.tracks}

    def size(self) -> int:
        return len(self.theta)

    @property
    def is_total(self) -> bool:
        return self.group.is_finite and len(self.theta) == self.group.order

    def __call__(self, g):
        return self.theta[self.group.coerce(g)]

    def domain(self) -> list:
        return sorted(self.theta, key=self.group.index_of)

    def clash(self, g, v) -> str | None:
        """Why θ(g) = v is not allowed, or None."""
        grp = self.group
        if g in self.theta:
            return f"{grp.encode(g)} is already mapped"
        if v in self.ran_theta:
            return f"{grp.encode(v)} is already the value at {grp.encode(self.ran_theta[v])}"
        for kind in self.tracks:
            c = companion(grp, kind, g, v)
            if c in self.ran[kind]:
                return f"{kind} value {grp.encode(c)} is already taken at {grp.encode(self.ran[kind][c])}"
        return None

    def assign(self, g, v) -> "PartialMapping":
        g, v = self.group.coerce(g), self.group.coerce(v)
        problem = self.clash(g, v)
        if problem:
            raise MappingClash(f"theta({self.group.encode(g)}) = {self.group.encode(v)}: {problem}")
        self._store(g, v)
        return self

    def _store(self, g, v) -> None:
        self.theta[g] = v
        self.ran_theta[v] = g
        for kind in self.tracks:
            self.ran[kind][companion(self.group, kind, g, v)] = g

    @classmethod
    def from_pairs(cls, group: GroupKernel, pairs, tracks: tuple = STRONG,
                   enforce: bool = True) -> "PartialMapping":
        """Build from (g, θ(g)) pairs; ``enforce=False`` only refuses a point mapped twice."""
        m = cls(group, tracks)
        for g, v in pairs:
            if enforce:
                m.assign(g, v)
                continue
            g, v = group.coerce(g), group.coerce(v)
            if g in m.theta:
                raise MappingClash(f"{group.encode(g)} is mapped twice")
            m._store(g, v)
        return m

    @classmethod
    def from_function(cls, group: GroupKernel, fn, tracks: tuple = STRONG) -> "PartialMapping":
        """The total mapping x ↦ fn(x) on a finite group, unchecked."""
        return cls.from_pairs(group, ((g, fn(g)) for g in group.elements()), tracks, enforce=False)

    def to_dict(self) -> dict:
        enc = self.group.encode
        return {
            "group": self.group.descriptor,
            "tracks": list(self.tracks),
            "pairs": [[enc(g), enc(v)] for g, v in self.theta.items()],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "PartialMapping":
        group = parse_group(doc["group"])
        pairs = [(group.decode(g), group.decode(v)) for g, v in doc["pairs"]]
        return cls.from_pairs(group, pairs, tuple(doc.get("tracks", STRONG)))

    # ─── meet rules ──────────────────────────────────────────────────

    def _first_fit(self, pick, what: str) -> None:
        """Store the first pick(x) = (g, v) over the enumeration that is clash-free."""
        for x in _candidates(self.group, self.search_budget):
            g, v = pick(x)
            if self.clash(g, v) is None:
                self._store(g, v)
                return
        raise ExtensionFailed(f"no legal extension for {what} within {self.search_budget} candidates")

    def meet_domain(self, g) -> None:
        if g not in self.theta:
            self._first_fit(lambda v: (g, v), f"{self.group.encode(g)} in dom theta")

    def meet_range(self, h) -> None:
        if h not in self.ran_theta:
            self._first_fit(lambda g: (g, h), f"{self.group.encode(h)} in ran theta")

    def meet_eta(self, h) -> None:
        # θ(g) = gh, so η(g) = h and ζ(g) = g²h
        if h not in self.ran[ETA]:
            op = self.group._op
            self._first_fit(lambda g: (g, op(g, h)), f"{self.group.encode(h)} in ran eta")

    def meet_zeta(self, h) -> None:
        # θ(g) = g⁻¹h, so ζ(g) = h and η(g) = g⁻²h
        if h not in self.ran[ZETA]:
            op, inv = self.group._op, self.group._inv
            self._first_fit(lambda g: (g, op(inv(g), h)), f"{self.group.encode(h)} in ran zeta")

    # ─── scheduler protocol ──────────────────────────────────────────

    def satisfied(self, req: Requirement) -> bool:
        h = req.params[0]
        if req.family == SCM_DOMAIN:
            return h in self.theta
        if req.family == SCM_RANGE:
            return h in self.ran_theta
        if req.family == SCM_ETA:
            return h in self.ran[ETA]
        if req.family == SCM_ZETA:
            return h in self.ran[ZETA]
        raise ValueError(f"Unknown requirement family '{req.family}'")

    def meet(self, req: Requirement) -> None:
        rule = {
            SCM_DOMAIN: self.meet_domain,
            SCM_RANGE: self.meet_range,
            SCM_ETA: self.meet_eta,
            SCM_ZETA: self.meet_zeta,
        }.get(req.family)
        if rule is None:
            raise ValueError(f"Unknown requirement family '{req.family}'")
        rule(*req.params)

    def check(self) -> VerificationReport:
        return check_mapping(self)


def _as_mapping(m) -> PartialMapping:
    return m.mapping if isinstance(m, SCMCertificate) else m


def _injectivity_witnesses(group: GroupKernel, theta: dict, kinds: tuple) -> list[dict]:
    enc = group.encode
    witnesses = []
    points = sorted(theta, key=group.index_of)
    for label in ("theta",) + tuple(kinds):
        seen = {}
        for g in points:
            value = theta[g] if label == "theta" else companion(group, label, g, theta[g])
            if value in seen:
                witnesses.append({
                    "map": label, "value": enc(value), "points": [enc(seen[value]), enc(g)],
                })
            else:
                seen[value] = g
    return witnesses


def _verify(m, kinds: tuple, name: str) -> VerificationReport:
    """Exhaustive bijectivity on a total finite mapping, injectivity otherwise."""
    m = _as_mapping(m)
    witnesses = _injectivity_witnesses(m.group, m.theta, kinds)
    stats = {"domain": len(m.theta), "exhaustive": m.is_total}
    return VerificationReport(name, not witnesses, witnesses, stats)


def verify_orthomorphism(m) -> VerificationReport:
    return _verify(m, ORTHOMORPHISM, "orthomorphism")


def verify_complete_mapping(m) -> VerificationReport:
    return _verify(m, COMPLETE, "complete-mapping")


def verify_scm(m) -> VerificationReport:
    return _verify(m, STRONG, "scm")


def check_mapping(m: PartialMapping) -> VerificationReport:
    """Injectivity of θ and the tracked companions, and tracked ranges equal
    to ranges recomputed from θ alone."""
    grp = m.group
    witnesses = _injectivity_witnesses(grp, m.theta, m.tracks)
    if {v: g for g, v in m.theta.items()} != m.ran_theta:
        witnesses.append({"map": "theta", "violation": "tracked range differs from recomputation"})
    for kind in m.tracks:
        recomputed = {companion(grp, kind, g, v): g for g, v in m.theta.items()}
        if recomputed != m.ran[kind]:
            witnesses.append({"map": kind, "violation": "tracked range differs from recomputation"})
    name = {ORTHOMORPHISM: "partial-orthomorphism", COMPLETE: "partial-complete-mapping",
            STRONG: "partial-scm"}.get(m.tracks, "partial-mapping")
    return VerificationReport(name, not witnesses, witnesses, {"domain": len(m.theta)})


def verify_mutually_orthogonal(mappings: list) -> VerificationReport:
    """θ_a(g)⁻¹θ_b(g) is injective on the shared domain of every pair a < b."""
    mappings = [_as_mapping(m) for m in mappings]
    if len({m.group for m in mappings}) > 1:
        raise ValueError("all mappings must be over the same group")
    witnesses = []
    shared_total = 0
    for (a, ma), (b, mb) in combinations(enumerate(mappings), 2):
        grp = ma.group
        shared = sorted(set(ma.theta) & set(mb.theta), key=grp.index_of)
        shared_total += len(shared)
        seen = {}
        for g in shared:
            value = grp.op(grp.inv(ma.theta[g]), mb.theta[g])
            if value in seen:
                witnesses.append({
                    "mappings": [a, b], "value": grp.encode(value),
                    "points": [grp.encode(seen[value]), grp.encode(g)],
                })
            else:
                seen[value] = g
    stats = {"mappings": len(mappings), "shared_points": shared_total}
    return VerificationReport("mutually-orthogonal", not witnesses, witnesses, stats)


def theta_from_R_terrace(t, d) -> PartialMapping:
    """θ_d(e) = e and θ_d(a(i)) = a(i+d) for a kind R terrace a."""
    if t.kind != "R":
        raise ValueError(f"theta_from_R_terrace needs a kind R terrace, got kind {t.kind}")
    d = as_point(d)
    if d <= 0:
        raise NonPositiveDistance(f"distance must be > 0, got {format_rational(d)}")
    if not t.index.has_distance(d):
        raise OutOfRange(f"{format_rational(d)} is not an admissible distance of {t.index.kind}")
    grp = t.group
    m = PartialMapping(grp, ORTHOMORPHISM)
    m.assign(grp.identity(), grp.identity())
    for i in sorted(t.forward):
        j = normalize_rational(i + d)
        if j in t.forward:
            m.assign(t.forward[i], t.forward[j])
    return m


# ─── greedy SCM over a squareful group ───────────────────────────────

def scm_stream(group: GroupKernel):
    def family(tag):
        for g in enumeration(group.enumerate, group.order):
            yield Requirement(tag, (g,))

    return interleave([family(SCM_DOMAIN), family(SCM_RANGE), family(SCM_ETA), family(SCM_ZETA)])


def build_scm_greedy(group: GroupKernel, steps: int, state: PartialMapping | None = None,
                     start: int = 0, verify_each: bool = False):
    """Grow a partial SCM meeting the first ``steps`` requirements.

    Squarefulness is what lets the η and ζ rules dodge ``g²h`` / ``g⁻²h``
    collisions; groups with few squares are refused up front.
    """
    from latininf.services.scheduler_service import run

    if group.is_finite:
        raise UnsupportedGroup(f"{group.descriptor} is finite; use scm_cyclic or brute_force_scm_search")
    if group.classification != SQUAREFUL:
        raise NotSquareful(f"{group.descriptor} is {group.classification}, not squareful")
    state = state if state is not None else PartialMapping(group, STRONG)
    return run(state, scm_stream(group), steps, verify_each=verify_each, start=start,
               growth_bound=MAPPING_MAX_GROWTH)


# ─── families of mutually orthogonal orthomorphisms ──────────────────

class OrthomorphismFamily:
    """k partial orthomorphisms, pairwise orthogonal on shared points."""

    def __init__(self, group: GroupKernel, k: int, search_budget: int = SEARCH_BUDGET):
        if k < 1:
            raise ValueError(f"family size must be >= 1, got {k}")
        self.group = group
        self.k = k
        self.search_budget = search_budget
        self.thetas: list[dict] = [{} for _ in range(k)]
        self.ran_theta: list[dict] = [{} for _ in range(k)]
        self.ran_eta: list[dict] = [{} for _ in range(k)]
        self.ran_pair: dict = {pair: {} for pair in combinations(range(k), 2)}

    def size(self) -> int:
        return sum(len(t) for t in self.thetas)

    def _pair_value(self, va, vb):
        return self.group._op(self.group._inv(va), vb)

    def _pair_updates(self, i: int, g, v) -> list[tuple]:
        """((a, b), η_ab(g)) for every j != i already defined at g."""
        out = []
        for j in range(self.k):
            if j == i or g not in self.thetas[j]:
                continue
            vj = self.thetas[j][g]
            if i < j:
                out.append(((i, j), self._pair_value(v, vj)))
            else:
                out.append(((j, i), self._pair_value(vj, v)))
        return out

    def clash(self, i: int, g, v) -> str | None:
        grp = self.group
        if g in self.thetas[i]:
            return f"theta_{i}({grp.encode(g)}) is already defined"
        if v in self.ran_theta[i]:
            return f"{grp.encode(v)} is already a value of theta_{i}"
        if companion(grp, ETA, g, v) in self.ran_eta[i]:
            return f"eta_{i} would repeat a value"
        for pair, value in self._pair_updates(i, g, v):
            if value in self.ran_pair[pair]:
                return f"eta_{pair[0]}{pair[1]} would repeat {grp.encode(value)}"
        return None

    def assign(self, i: int, g, v) -> "OrthomorphismFamily":
        g, v = self.group.coerce(g), self.group.coerce(v)
        problem = self.clash(i, g, v)
        if problem:
            raise MappingClash(problem)
        self._store(i, g, v)
        return self

    def _store(self, i: int, g, v) -> None:
        for pair, value in self._pair_updates(i, g, v):
            self.ran_pair[pair][value] = g
        self.thetas[i][g] = v
        self.ran_theta[i][v] = g
        self.ran_eta[i][companion(self.group, ETA, g, v)] = g

    def _retract(self, i: int, g) -> None:
        v = self.thetas[i].pop(g)
        del self.ran_theta[i][v]
        del self.ran_eta[i][companion(self.group, ETA, g, v)]
        for pair, value in self._pair_updates(i, g, v):
            del self.ran_pair[pair][value]

    def mapping(self, i: int) -> PartialMapping:
        return PartialMapping.from_pairs(self.group, self.thetas[i].items(), ORTHOMORPHISM)

    def _fresh_point(self):
        for g in _candidates(self.group, self.search_budget):
            if not any(g in t for t in self.thetas):
                return g
        raise ExtensionFailed(f"no point outside every domain within {self.search_budget} candidates")

    def _first_fit(self, i: int, pick, what: str) -> None:
        for x in _candidates(self.group, self.search_budget):
            g, v = pick(x)
            if self.clash(i, g, v) is None:
                self._store(i, g, v)
                return
        raise ExtensionFailed(f"no legal extension for {what} within {self.search_budget} candidates")

    # ─── meet rules ──────────────────────────────────────────────────

    def meet_domain(self, i: int, g) -> None:
        if g not in self.thetas[i]:
            self._first_fit(i, lambda v: (g, v), f"{self.group.encode(g)} in dom theta_{i}")

    def meet_range(self, i: int, h) -> None:
        if h not in self.ran_theta[i]:
            self._first_fit(i, lambda g: (g, h), f"{self.group.encode(h)} in ran theta_{i}")

    def meet_eta(self, i: int, h) -> None:
        if h not in self.ran_eta[i]:
            op = self.group._op
            self._first_fit(i, lambda g: (g, op(g, h)), f"{self.group.encode(h)} in ran eta_{i}")

    def meet_pair(self, i: int, j: int, h) -> None:
        """Extend θ_i and θ_j at one fresh point g with θ_i(g)⁻¹θ_j(g) = h."""
        if h in self.ran_pair[(i, j)]:
            return
        g = self._fresh_point()
        op = self.group._op
        for hi in _candidates(self.group, self.search_budget):
            if self.clash(i, g, hi) is not None:
                continue
            self._store(i, g, hi)
            hj = op(hi, h)
            if self.clash(j, g, hj) is None:
                self._store(j, g, hj)
                return
            self._retract(i, g)
        raise ExtensionFailed(
            f"no legal pair for eta_{i}{j} = {self.group.encode(h)} within {self.search_budget} candidates"
        )

    # ─── scheduler protocol ──────────────────────────────────────────

    def satisfied(self, req: Requirement) -> bool:
        if req.family == MOO_DOMAIN:
            i, g = req.params
            return g in self.thetas[i]
        if req.family == MOO_RANGE:
            i, h = req.params
            return h in self.ran_theta[i]
        if req.family == MOO_ETA:
            i, h = req.params
            return h in self.ran_eta[i]
        if req.family == MOO_PAIR:
            i, j, h = req.params
            return h in self.ran_pair[(i, j)]
        raise ValueError(f"Unknown requirement family '{req.family}'")

    def meet(self, req: Requirement) -> None:
        rule = {
            MOO_DOMAIN: self.meet_domain,
            MOO_RANGE: self.meet_range,
            MOO_ETA: self.meet_eta,
            MOO_PAIR: self.meet_pair,
        }.get(req.family)
        if rule is None:
            raise ValueError(f"Unknown requirement family '{req.family}'")
        rule(*req.params)

    def check(self) -> VerificationReport:
        return check_family(self)

    def to_dict(self) -> dict:
        enc = self.group.encode
        return {
            "group": self.group.descriptor,
            "k": self.k,
            "mappings": [[[enc(g), enc(v)] for g, v in t.items()] for t in self.thetas],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "OrthomorphismFamily":
        group = parse_group(doc["group"])
        family = cls(group, int(doc["k"]))
        if len(doc["mappings"]) != family.k:
            raise ValueError(f"family of size {family.k} lists {len(doc['mappings'])} mappings")
        for i, pairs in enumerate(doc["mappings"]):
            for g, v in pairs:
                family.assign(i, group.decode(g), group.decode(v))
        return family


def check_family(f: OrthomorphismFamily) -> VerificationReport:
    grp = f.group
    witnesses = []
    for i, theta in enumerate(f.thetas):
        for w in _injectivity_witnesses(grp, theta, ORTHOMORPHISM):
            witnesses.append({"mapping": i, **w})
        if {v: g for g, v in theta.items()} != f.ran_theta[i]:
            witnesses.append({"mapping": i, "violation": "tracked theta range differs"})
        if {companion(grp, ETA, g, v): g for g, v in theta.items()} != f.ran_eta[i]:
            witnesses.append({"mapping": i, "violation": "tracked eta range differs"})
    report = verify_mutually_orthogonal([f.mapping(i) for i in range(f.k)]) if f.k > 1 else None
    if report is not None:
        witnesses.extend(report.witnesses)
    for (a, b), tracked in f.ran_pair.items():
        shared = set(f.thetas[a]) & set(f.thetas[b])
        recomputed = {grp.op(grp.inv(f.thetas[a][g]), f.thetas[b][g]): g for g in shared}
        if recomputed != tracked:
            witnesses.append({"mappings": [a, b], "violation": "tracked pair range differs"})
    stats = {"k": f.k, "points": f.size()}
    return VerificationReport("moo-family", not witnesses, witnesses, stats)


def moo_stream(family: OrthomorphismFamily):
    grp, k = family.group, family.k

    def per_mapping(tag):
        for i, g in diagonal_pairs(lambda i: i, grp.enumerate, k, grp.order):
            yield Requirement(tag, (i, g))

    streams = [per_mapping(MOO_DOMAIN), per_mapping(MOO_RANGE), per_mapping(MOO_ETA)]
    pairs = list(combinations(range(k), 2))
    if pairs:
        streams.append(
            Requirement(MOO_PAIR, (*pair, h))
            for pair, h in diagonal_pairs(pairs.__getitem__, grp.enumerate, len(pairs), grp.order)
        )
    return interleave(streams)


def build_moo_family(group: GroupKernel, k: int, steps: int,
                     state: OrthomorphismFamily | None = None, start: int = 0,
                     verify_each: bool = False):
    from latininf.services.scheduler_service import run

    if group.is_finite:
        raise UnsupportedGroup(f"{group.descriptor} is finite; the greedy family needs an infinite group")
    state = state if state is not None else OrthomorphismFamily(group, k)
    if state.k != k:
        raise ValueError(f"resumed family has k={state.k}, asked for k={k}")
    return run(state, moo_stream(state), steps, verify_each=verify_each, start=start,
               growth_bound=FAMILY_MAX_GROWTH)


# ─── finite SCMs ─────────────────────────────────────────────────────

@dataclass
class SCMCertificate:
    """A total SCM of a finite group and the exhaustive check that accepted it."""

    group: GroupKernel
    mapping: PartialMapping
    transcript: VerificationReport

    def __call__(self, g):
        return self.mapping(g)

    def to_dict(self) -> dict:
        return {**self.mapping.to_dict(), "transcript": self.transcript.to_dict()}


def certify(mapping: PartialMapping) -> SCMCertificate:
    if not mapping.is_total:
        raise ValueError(
            f"only total mappings on finite groups can be certified "
            f"({len(mapping.theta)} points on {mapping.group.descriptor})"
        )
    report = verify_scm(mapping)
    if not report.passed:
        raise VerifyFailed(f"{mapping.group.descriptor}: not an SCM: {report.witnesses[0]}")
    return SCMCertificate(mapping.group, mapping, report)


def scm_cyclic(n: int) -> SCMCertificate:
    """θ(x) = 2x on Z_n; an SCM exactly when 2 and 3 are units mod n."""
    if n < 1 or gcd(n, 6) != 1:
        raise BadOrder(f"x -> 2x is an SCM of Z_n only when gcd(n, 6) = 1, got n = {n}")
    return certify(PartialMapping.from_function(CyclicGroup(n), lambda x: 2 * x % n))


def scm_exists_finite_abelian(factors: list[int]) -> bool:
    """SCM exists iff the Sylow 2- and 3-subgroups are each trivial or non-cyclic.

    ``factors`` are the orders of any cyclic decomposition; a Sylow
    p-subgroup is cyclic and non-trivial exactly when one factor is divisible by p.
    """
    if any(not isinstance(n, int) or n < 1 for n in factors):
        raise ValueError(f"cyclic factor orders must be positive integers, got {factors}")
    return all(sum(1 for n in factors if n % p == 0) != 1 for p in (2, 3))


def _tables(group: GroupKernel):
    elems = group.elements()
    pos = {g: k for k, g in enumerate(elems)}
    mul = [[pos[group._op(a, b)] for b in elems] for a in elems]
    inv = [pos[group._inv(a)] for a in elems]
    return elems, mul, inv


def _scm_branch(args) -> tuple[int, list | None]:
    """Depth-first search for an SCM with θ(first element) fixed; (nodes, pairs or None)."""
    descriptor, first = args
    group = parse_group(descriptor)
    elems, mul, inv = _tables(group)
    n = len(elems)
    theta = [0] * n
    used_theta, used_eta, used_zeta = [False] * n, [False] * n, [False] * n
    nodes = 0

    def dfs(p: int) -> bool:
        nonlocal nodes
        if p == n:
            return True
        for v in ((first,) if p == 0 else range(n)):
            e, z = mul[inv[p]][v], mul[p][v]
            if used_theta[v] or used_eta[e] or used_zeta[z]:
                continue
            nodes += 1
            used_theta[v] = used_eta[e] = used_zeta[z] = True
            theta[p] = v
            if dfs(p + 1):
                return True
            used_theta[v] = used_eta[e] = used_zeta[z] = False
        return False

    if not dfs(0):
        return nodes, None
    return nodes, [(elems[k], elems[theta[k]]) for k in range(n)]


def brute_force_scm_search(group: GroupKernel, cap: int = BRUTE_FORCE_CAP,
                           jobs: int = 1) -> PartialMapping | None:
    """First SCM in (θ(e_0), θ(e_1), ...) lexicographic order, or None."""
    if not group.is_finite:
        raise UnsupportedGroup(f"{group.descriptor} is infinite; nothing to search exhaustively")
    if group.order > cap:
        raise CapExceeded(f"|G| = {group.order} exceeds the brute-force cap of {cap}")
    tasks = [(group.descriptor, v) for v in range(group.order)]
    if jobs > 1 and len(tasks) > 1:
        with Pool(processes=jobs) as pool:
            results = pool.map(_scm_branch, tasks)
    else:
        results = []
        for task in tasks:
            results.append(_scm_branch(task))
            if results[-1][1] is not None:
                break
    logger.info("SCM search on %s: %d nodes", group.descriptor, sum(n for n, _ in results))
    for _, pairs in results:
        if pairs is not None:
            return PartialMapping.from_pairs(group, pairs, STRONG)
    return None


# ─── compositions ────────────────────────────────────────────────────

def _compose(parts: list, normalize: bool, product_tag: bool):
    if not parts:
        raise EmptyParts("a composite SCM needs at least one part")
    mappings = [_as_mapping(p) for p in parts]
    shifts = []
    for m in mappings:
        e = m.group.identity()
        if not normalize:
            shifts.append(e)
        elif e not in m.theta:
            raise UnassignedIndex(f"normalizing needs theta(e) on {m.group.descriptor}")
        else:
            shifts.append(m.group.inv(m.theta[e]))
    if len(mappings) == 1:
        m, c = mappings[0], shifts[0]
        if not normalize:
            composite = m
        else:
            composite = PartialMapping.from_pairs(
                m.group, ((g, m.group.op(v, c)) for g, v in m.theta.items()), STRONG, enforce=False
            )
    else:
        finite = all(m.group.is_finite for m in mappings)
        tag = "prod" if product_tag and finite and len(mappings) == 2 else "sum"
        group = DirectSum([m.group for m in mappings], tag=tag)
        pairs = []
        for point in product(*[m.domain() for m in mappings]):
            value = tuple(
                m.group.op(m.theta[x], c) for m, x, c in zip(mappings, point, shifts)
            )
            pairs.append((point, value))
        composite = PartialMapping.from_pairs(group, pairs, STRONG, enforce=False)
    if composite.is_total:
        return certify(composite)
    report = verify_scm(composite)
    if not report.passed:
        raise VerifyFailed(f"composite is not a partial SCM: {report.witnesses[0]}")
    return composite


def scm_direct_product(parts: list):
    """φ(g_1, ..., g_n) = (φ_1(g_1), ..., φ_n(g_n)); certified when every part is total."""
    return _compose(parts, normalize=False, product_tag=True)


def scm_direct_sum(parts: list):
    """Direct sum with every part shifted to fix the identity: φ′_i(x) = φ_i(x)φ_i(e)⁻¹."""
    return _compose(parts, normalize=True, product_tag=False)


def canonical_transversal(group: GroupKernel, subgroup: set) -> list:
    """Least enumerated element of every coset of ``subgroup``."""
    reps, covered = [], set()
    for g in group.elements():
        if g in covered:
            continue
        reps.append(g)
        covered.update(group.op(g, h) for h in subgroup)
    return reps


def scm_quotient(group: GroupKernel, subgroup, theta_h, phi_q, reps=None) -> SCMCertificate:
    """β(r + h) = α(φ(r + H)) + θ(h), α sending a coset to its representative.

    ``subgroup`` lists H as elements of G; ``theta_h`` maps H to H (an SCM of
    H); ``phi_q`` maps each representative to any element of the image coset
    (an SCM of G/H read through the representatives).
    """
    if not group.is_finite:
        raise UnsupportedGroup(f"{group.descriptor} is infinite; the quotient construction is finite here")
    h_elems = {group.coerce(h) for h in subgroup}
    e = group.identity()
    if e not in h_elems or any(group.op(a, group.inv(b)) not in h_elems for a in h_elems for b in h_elems):
        raise LatinInfError(f"the listed elements are not a subgroup of {group.descriptor}")
    theta_h = dict(_as_mapping(theta_h).theta) if not isinstance(theta_h, dict) else theta_h
    phi_q = dict(_as_mapping(phi_q).theta) if not isinstance(phi_q, dict) else phi_q
    reps = canonical_transversal(group, h_elems) if reps is None else [group.coerce(r) for r in reps]

    coset = {}
    for r in reps:
        for h in h_elems:
            g = group.op(r, h)
            if g in coset:
                raise BadTransversal(
                    f"{group.encode(r)} and {group.encode(coset[g][0])} lie in the same coset"
                )
            coset[g] = (r, h)
    if len(coset) != group.order:
        raise BadTransversal(f"{len(reps)} representatives miss some cosets of a subgroup of order {len(h_elems)}")
    if set(theta_h) != h_elems:
        raise UnassignedIndex("theta_h must be defined on exactly the subgroup")
    missing = [r for r in reps if r not in phi_q]
    if missing:
        raise UnassignedIndex(f"phi_q is undefined at representative {group.encode(missing[0])}")

    def beta(g):
        r, h = coset[g]
        return group.op(coset[group.coerce(phi_q[r])][0], group.coerce(theta_h[h]))

    return certify(PartialMapping.from_function(group, beta))


def scm_quotient_cyclic(h_order: int, q_order: int) -> SCMCertificate:
    """SCM of Z_{hq} from H = ⟨q⟩ ≅ Z_h and G/H ≅ Z_q, both via x ↦ 2x."""
    theta_part = scm_cyclic(h_order)
    phi_part = scm_cyclic(q_order)
    group = CyclicGroup(h_order * q_order)
    subgroup = [q_order * x for x in range(h_order)]
    theta_h = {q_order * x: q_order * theta_part(x) for x in range(h_order)}
    reps = list(range(q_order))
    phi_q = {r: phi_part(r) for r in reps}
    return scm_quotient(group, subgroup, theta_h, phi_q, reps)


# ─── the E2 field block ──────────────────────────────────────────────

def field_block(m: int) -> ElementaryTwoGroup:
    """{0..2^(2^m)-1} under xor: the additive group of the nim field of that order."""
    return ElementaryTwoGroup(1 << m)


def field_multiplier_mapping(m: int, a: int) -> PartialMapping:
    """x ↦ a⊗x on the field block of order 2^(2^m)."""
    group = field_block(m)
    a = group.coerce(a)
    return PartialMapping.from_function(group, lambda x: nim_mul(a, x))


def nim_table(bits: int) -> list[list[int]]:
    n = 1 << bits
    return [[nim_mul(x, y) for y in range(n)] for x in range(n)]


def field_axiom_witnesses(n: int) -> list[dict]:
    """Exhaustive field axioms for ({0..n-1}, xor, nim_mul); first failure per axiom."""
    found: dict = {}
    for x in range(n):
        if x and not any(nim_mul(x, y) == 1 for y in range(n)):
            found.setdefault("inverse", {"axiom": "inverse", "x": x})
        for y in range(n):
            xy = nim_mul(x, y)
            if xy >= n:
                found.setdefault("closure", {"axiom": "closure", "x": x, "y": y})
            if xy != nim_mul(y, x):
                found.setdefault("commutative", {"axiom": "commutative", "x": x, "y": y})
            for z in range(n):
                if nim_mul(xy, z) != nim_mul(x, nim_mul(y, z)):
                    found.setdefault("associative", {"axiom": "associative", "x": x, "y": y, "z": z})
                if nim_mul(x, y ^ z) != xy ^ nim_mul(x, z):
                    found.setdefault("distributive", {"axiom": "distributive", "x": x, "y": y, "z": z})
    return list(found.values())


def scm_elementary_2group(m: int, a: int = 2) -> SCMCertificate:
    """x ↦ a⊗x on the E2 block of order 2^(2^m) for a ∉ {0, 1}.

    For m up to FIELD_EXHAUSTIVE_MAX_M the field axioms are also checked
    exhaustively; up to FIELD_SAFETY_MAX_M only the SCM property is.
    """
    if m < 1:
        raise BadOrder(f"the field block needs at least 4 elements (m >= 1), got m = {m}")
    if m > FIELD_SAFETY_MAX_M:
        raise BlockTooLarge(f"m = {m} gives a block of 2^{1 << m} elements; the cap is m = {FIELD_SAFETY_MAX_M}")
    cert = certify(field_multiplier_mapping(m, a))
    exhaustive = m <= FIELD_EXHAUSTIVE_MAX_M
    if exhaustive:
        witnesses = field_axiom_witnesses(cert.group.order)
        if witnesses:
            raise VerifyFailed(f"nim arithmetic is not a field on {cert.group.descriptor}: {witnesses[0]}")
    cert.transcript.statistics["field_axioms"] = "exhaustive" if exhaustive else "unchecked"
    return cert


# ─── squares from mappings ───────────────────────────────────────────

def _window_points(group: GroupKernel, points, what: str) -> list:
    if points is None:
        if not group.is_finite:
            raise ValueError(f"{what} must be given for the infinite group {group.descriptor}")
        return group.elements()
    return [group.coerce(p) for p in points]


def cayley_table_window(group: GroupKernel, rows=None, cols=None) -> LatinRegion:
    rows = _window_points(group, rows, "rows")
    cols = _window_points(group, cols, "cols")
    region = LatinRegion(group.descriptor, group.descriptor)
    for i in rows:
        for j in cols:
            region.place(i, j, group.op(i, j))
    return region


def normal_mult_window(group: GroupKernel, rows=None, cols=None) -> LatinRegion:
    """Cell (i, j) = g_i g_j⁻¹."""
    rows = _window_points(group, rows, "rows")
    cols = _window_points(group, cols, "cols")
    region = LatinRegion(group.descriptor, group.descriptor)
    for i in rows:
        for j in cols:
            region.place(i, j, group.op(i, group.inv(j)))
    return region


def l_theta_window(mapping, rows=None, cols=None) -> LatinRegion:
    """Cell (i, j) = g_i θ(g_j); columns default to dom θ, rows to the columns."""
    m = _as_mapping(mapping)
    group = m.group
    cols = m.domain() if cols is None else [group.coerce(c) for c in cols]
    rows = cols if rows is None else [group.coerce(r) for r in rows]
    for j in cols:
        if j not in m.theta:
            raise UnassignedIndex(f"{group.encode(j)} is not in dom theta")
    region = LatinRegion(group.descriptor, group.descriptor)
    for i in rows:
        for j in cols:
            region.place(i, j, group.op(i, m.theta[j]), enforce=False)
    return region


def knut_vic(mapping, rows=None) -> LatinRegion:
    """L(i, j) = i + θ(j): the whole square for a total SCM, a window otherwise."""
    m = _as_mapping(mapping)
    if rows is None and m.is_total:
        rows = m.group.elements()
    return l_theta_window(m, rows=rows)

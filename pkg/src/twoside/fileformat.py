"""Line-based text format for NTU, TU and organization markets.

One declaration per line, ``#`` starts a comment, names must be declared
before they are used::

    kind ntu                      # or: kind tu / kind org
    untiered                      # ntu only: sides and wings dropped
    agent L1 left                 # ntu/tu; side is left, center or right
    contract x left L1 M1         # ntu: id, wing, upstream, downstream ('-' wing when untiered)
    pref M1 : {x,y} > {u} > {}    # ntu: ranked bundles, best first
    primitive w left L1 M1        # tu: like contract
    value M1 {w} 5/2              # tu: omitted bundles are worth 0
    orgs o1 o2                    # org: the first org sits on the left
    applicant i1 : o2 > o1        # org: acceptable orgs, best first
    org o1 : {i1,i2} > {i1}       # org: ranked applicant sets

``emit`` writes the canonical form: declarations grouped in the order above,
ids sorted, rationals as ``num/den`` (integers bare), zero values omitted.
Errors carry the line number.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Union

from twoside.errors import InputError
from twoside.ntu import Contract, NtuMarket, RankedPreference, Side, _check_wing, fmt_bundle
from twoside.pickside import OrgMarket
from twoside.tu import TuMarket, Valuation, fmt_outcome

_ID = re.compile(r"^[A-Za-z0-9_.@^-]+$")

Market = Union[NtuMarket, TuMarket, OrgMarket]


def _err(lineno: int, msg: str) -> InputError:
    return InputError(f"line {lineno}: {msg}")


def _ident(tok: str, lineno: int, what: str) -> str:
    if not _ID.match(tok) or tok == "-":
        raise _err(lineno, f"bad {what} id {tok!r}")
    return tok


def _bundle(tok: str, lineno: int) -> frozenset:
    tok = tok.strip()
    if not (tok.startswith("{") and tok.endswith("}")):
        raise _err(lineno, f"expected a bundle like {{a,b}}, got {tok!r}")
    inner = tok[1:-1].strip()
    if not inner:
        return frozenset()
    items = [x.strip() for x in inner.split(",")]
    for x in items:
        _ident(x, lineno, "bundle member")
    if len(set(items)) != len(items):
        raise _err(lineno, f"bundle {tok} repeats a member")
    return frozenset(items)


def _ranking(text: str, lineno: int) -> list:
    text = text.strip()
    if not text:
        return []
    return [_bundle(part, lineno) for part in text.split(">")]


def _rational(tok: str, lineno: int) -> Fraction:
    if not re.match(r"^-?\d+(/\d+)?$", tok):
        raise _err(lineno, f"bad rational {tok!r} (use integers or num/den)")
    try:
        return Fraction(tok)
    except ZeroDivisionError:
        raise _err(lineno, f"zero denominator in {tok!r}") from None


def fmt_rational(x: Fraction) -> str:
    return str(Fraction(x))


def _lines(text: str):
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield n, line


def parse(text: str) -> Market:
    lines = list(_lines(text))
    if not lines:
        raise InputError("empty document")
    n, first = lines[0]
    parts = first.split()
    if len(parts) != 2 or parts[0] != "kind":
        raise _err(n, "document must start with 'kind ntu|tu|org'")
    kind = parts[1]
    if kind == "ntu":
        return _parse_ntu(lines[1:])
    if kind == "tu":
        return _parse_tu(lines[1:])
    if kind == "org":
        return _parse_org(lines[1:])
    raise _err(n, f"unknown kind {kind!r}")


def _split_head(line: str, lineno: int):
    if ":" not in line:
        raise _err(lineno, "expected '<keyword> <id> : ...'")
    head, rest = line.split(":", 1)
    words = head.split()
    if len(words) != 2:
        raise _err(lineno, "expected '<keyword> <id> : ...'")
    return words[1], rest


def _parse_agents_and_links(lines, link_kw: str, tiered_default: bool = True):
    """Shared part of ntu/tu: agent and contract/primitive declarations."""
    agents: dict = {}
    links: dict = {}
    tiered = tiered_default
    rest = []
    for n, line in lines:
        words = line.split()
        kw = words[0]
        if kw == "untiered":
            if link_kw != "contract":
                raise _err(n, "'untiered' only applies to ntu markets")
            if agents or links:
                raise _err(n, "'untiered' must come before any declaration")
            if len(words) != 1:
                raise _err(n, "'untiered' takes no arguments")
            tiered = False
        elif kw == "agent":
            if tiered and len(words) != 3:
                raise _err(n, "expected 'agent <id> <side>'")
            if not tiered and len(words) != 2:
                raise _err(n, "expected 'agent <id>' in an untiered market")
            aid = _ident(words[1], n, "agent")
            if aid in agents:
                raise _err(n, f"duplicate agent {aid!r}")
            if tiered:
                try:
                    agents[aid] = Side(words[2])
                except ValueError:
                    raise _err(n, f"bad side {words[2]!r}") from None
            else:
                agents[aid] = None
        elif kw == link_kw:
            if len(words) != 5:
                raise _err(n, f"expected '{link_kw} <id> <wing> <upstream> <downstream>'")
            cid = _ident(words[1], n, link_kw)
            if cid in links:
                raise _err(n, f"duplicate {link_kw} {cid!r}")
            up, down = words[3], words[4]
            for a in (up, down):
                if a not in agents:
                    raise _err(n, f"unknown agent {a!r}")
            if up == down:
                raise _err(n, "an agent cannot contract with itself")
            if tiered:
                if words[2] not in ("left", "right"):
                    raise _err(n, f"wing must be left or right, got {words[2]!r}")
                c = Contract(cid, up, down, Side(words[2]))
                try:
                    _check_wing(c, agents)
                except InputError as e:
                    raise _err(n, str(e)) from None
            else:
                if words[2] != "-":
                    raise _err(n, "untiered contracts take '-' as wing")
                c = Contract(cid, up, down, None)
            links[cid] = (c, n)
        else:
            rest.append((n, line))
    return agents, links, tiered, rest


def _own_sets(agents, links):
    own = {a: set() for a in agents}
    for c, _ in links.values():
        own[c.upstream].add(c.id)
        own[c.downstream].add(c.id)
    return own


def _parse_ntu(lines) -> NtuMarket:
    agents, links, tiered, rest = _parse_agents_and_links(lines, "contract")
    own = _own_sets(agents, links)
    prefs: dict = {}
    for n, line in rest:
        if line.split()[0] != "pref":
            raise _err(n, f"unexpected declaration {line.split()[0]!r} in an ntu market")
        aid, body = _split_head(line, n)
        if aid not in agents:
            raise _err(n, f"unknown agent {aid!r}")
        if aid in prefs:
            raise _err(n, f"second preference line for {aid}")
        ranking = _ranking(body, n)
        for b in ranking:
            if not b <= own[aid]:
                raise _err(n, f"bundle {fmt_bundle(b)} names contracts {fmt_bundle(b - own[aid])} that {aid} does not sign")
        if len(set(ranking)) != len(ranking):
            raise _err(n, f"ranking of {aid} lists a bundle twice")
        prefs[aid] = RankedPreference(aid, tuple(ranking))
    for a in agents:
        prefs.setdefault(a, RankedPreference(a, ()))
    return NtuMarket(agents, {cid: c for cid, (c, _) in links.items()}, prefs, tiered=tiered)


def _parse_tu(lines) -> TuMarket:
    agents, links, _, rest = _parse_agents_and_links(lines, "primitive")
    own = _own_sets(agents, links)
    values: dict = {a: {} for a in agents}
    for n, line in rest:
        words = line.split(None, 2)
        if words[0] != "value":
            raise _err(n, f"unexpected declaration {words[0]!r} in a tu market")
        m = re.match(r"^value\s+(\S+)\s+(\{[^}]*\})\s+(\S+)$", line)
        if not m:
            raise _err(n, "expected 'value <agent> {bundle} <rational>'")
        aid = m.group(1)
        if aid not in agents:
            raise _err(n, f"unknown agent {aid!r}")
        b = _bundle(m.group(2), n)
        if not b <= own[aid]:
            raise _err(n, f"bundle {fmt_bundle(b)} names primitives {fmt_bundle(b - own[aid])} that {aid} does not sign")
        if b in values[aid]:
            raise _err(n, f"second value for {aid} {fmt_bundle(b)}")
        values[aid][b] = _rational(m.group(3), n)
    vals = {a: Valuation.from_map(a, own[a], values[a]) for a in agents}
    return TuMarket(agents, {cid: c for cid, (c, _) in links.items()}, vals)


def _parse_org(lines) -> OrgMarket:
    orgs = None
    applicants: dict = {}
    org_rank: dict = {}
    for n, line in lines:
        kw = line.split()[0]
        if kw == "orgs":
            if orgs is not None:
                raise _err(n, "second 'orgs' line")
            orgs = tuple(_ident(x, n, "org") for x in line.split()[1:])
            if len(orgs) < 2 or len(set(orgs)) != len(orgs):
                raise _err(n, "need at least two distinct organizations")
        elif kw == "applicant":
            if orgs is None:
                raise _err(n, "'orgs' must come first")
            aid, body = _split_head(line, n)
            _ident(aid, n, "applicant")
            if aid in applicants or aid in orgs:
                raise _err(n, f"duplicate id {aid!r}")
            ranking = [x.strip() for x in body.split(">")] if body.strip() else []
            for o in ranking:
                if o not in orgs:
                    raise _err(n, f"unknown org {o!r}")
            if len(set(ranking)) != len(ranking):
                raise _err(n, "ordering repeats an organization")
            applicants[aid] = tuple(ranking)
        elif kw == "org":
            if orgs is None:
                raise _err(n, "'orgs' must come first")
            oid, body = _split_head(line, n)
            if oid not in orgs:
                raise _err(n, f"unknown org {oid!r}")
            if oid in org_rank:
                raise _err(n, f"second ranking for {oid}")
            org_rank[oid] = (n, _ranking(body, n))
        else:
            raise _err(n, f"unexpected declaration {kw!r} in an org market")
    if orgs is None:
        raise InputError("org market without an 'orgs' line")
    prefs = {}
    for o in orgs:
        n, ranking = org_rank.get(o, (0, []))
        for b in ranking:
            if not b <= set(applicants):
                raise _err(n, f"unknown applicant(s) {fmt_bundle(b - set(applicants))}")
        if len(set(ranking)) != len(ranking):
            raise _err(n, f"ranking of {o} lists a set twice")
        prefs[o] = RankedPreference(o, tuple(ranking))
    return OrgMarket(orgs, tuple(applicants), prefs, applicants)


def _fmt_ranking(ranking) -> str:
    return " > ".join(fmt_bundle(b) for b in ranking)


def emit(market: Market) -> str:
    out = []
    if isinstance(market, NtuMarket):
        out.append("kind ntu")
        if not market.tiered:
            out.append("untiered")
        for a in sorted(market.agents):
            side = market.agents[a]
            out.append(f"agent {a} {side.value}" if side is not None else f"agent {a}")
        for cid in sorted(market.contracts):
            c = market.contracts[cid]
            wing = c.wing.value if c.wing is not None else "-"
            out.append(f"contract {cid} {wing} {c.upstream} {c.downstream}")
        for a in sorted(market.preferences):
            ranking = market.preferences[a].ranking
            out.append(f"pref {a} : {_fmt_ranking(ranking)}".rstrip())
    elif isinstance(market, TuMarket):
        out.append("kind tu")
        for a in sorted(market.agents):
            out.append(f"agent {a} {market.agents[a].value}")
        for wid in sorted(market.primitives):
            c = market.primitives[wid]
            out.append(f"primitive {wid} {c.wing.value} {c.upstream} {c.downstream}")
        for a in sorted(market.valuations):
            for b, val in market.valuations[a].items():
                if val != 0:
                    out.append(f"value {a} {fmt_bundle(b)} {fmt_rational(val)}")
    elif isinstance(market, OrgMarket):
        out.append("kind org")
        out.append("orgs " + " ".join(market.orgs))
        for a in market.applicants:
            out.append(f"applicant {a} : {' > '.join(market.applicant_preferences[a])}".rstrip())
        for o in sorted(market.orgs):
            out.append(f"org {o} : {_fmt_ranking(market.org_preferences[o].ranking)}".rstrip())
    else:
        raise TypeError(f"cannot emit {type(market).__name__}")
    return "\n".join(out) + "\n"


def load(path) -> Market:
    with open(path, encoding="utf-8") as fh:
        return parse(fh.read())


def parse_priced(text: str) -> dict:
    """``<primitive> <rational>`` per line: prices, or a TU outcome."""
    out: dict = {}
    for n, line in _lines(text):
        words = line.split()
        if len(words) != 2:
            raise _err(n, "expected '<primitive> <rational>'")
        w = _ident(words[0], n, "primitive")
        if w in out:
            raise _err(n, f"primitive {w} given twice")
        out[w] = _rational(words[1], n)
    return out


def emit_priced(items) -> str:
    return "".join(f"{w} {fmt_rational(t)}\n" for w, t in sorted(dict(items).items()))


__all__ = ["emit", "emit_priced", "fmt_outcome", "fmt_rational", "load", "parse", "parse_priced"]
